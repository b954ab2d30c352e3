//! Run reports. Facts accumulate in a stable order; the machine rendering
//! is one `key: value` line per fact (byte-identical for identical inputs
//! and seed), and the human rendering presents the same facts grouped by
//! key prefix.

use std::fmt::Display;

#[derive(Clone, Debug)]
pub struct Report {
    facts: Vec<(String, String)>,
    checks: usize,
    failures: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Human,
    Machine,
}

impl Report {
    pub fn new(name: &str, mode: &str, seed: u64, order_cap: u32) -> Self {
        let mut r = Report {
            facts: Vec::new(),
            checks: 0,
            failures: 0,
        };
        r.fact("problem", name);
        r.fact("mode", mode);
        r.fact("seed", seed);
        r.fact("order-cap", order_cap);
        r
    }

    pub fn fact(&mut self, key: impl Into<String>, value: impl Display) {
        self.facts.push((key.into(), value.to_string()));
    }

    /// Record a pass/fail assertion.
    pub fn check(&mut self, key: impl Into<String>, passed: bool) {
        self.checks += 1;
        if !passed {
            self.failures += 1;
        }
        self.facts
            .push((key.into(), if passed { "pass" } else { "fail" }.to_string()));
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn facts(&self) -> &[(String, String)] {
        &self.facts
    }

    /// First fact value recorded under the key.
    pub fn value(&self, key: &str) -> Option<&str> {
        self.facts
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// All (key, value) pairs whose key ends with the suffix.
    pub fn values_with_suffix<'a>(&'a self, suffix: &'a str) -> impl Iterator<Item = (&'a str, &'a str)> {
        self.facts
            .iter()
            .filter(move |(k, _)| k.ends_with(suffix))
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn failures(&self) -> usize {
        self.failures
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Machine => self.render_machine(),
            Format::Human => self.render_human(),
        }
    }

    pub fn render_machine(&self) -> String {
        let mut out = String::from("report-format: 1\n");
        for (k, v) in &self.facts {
            out.push_str(k);
            out.push_str(": ");
            out.push_str(v);
            out.push('\n');
        }
        out.push_str(&format!("checks: {}\n", self.checks));
        out.push_str(&format!("failures: {}\n", self.failures));
        out.push_str(&format!(
            "status: {}\n",
            if self.passed() { "pass" } else { "fail" }
        ));
        out
    }

    pub fn render_human(&self) -> String {
        let mut out = String::new();
        let mut last_group = String::new();
        for (k, v) in &self.facts {
            let group = k.split(['.', '[']).next().unwrap_or("").to_string();
            if group != last_group && !last_group.is_empty() {
                out.push('\n');
            }
            last_group = group;
            out.push_str(&format!("  {k:<34} {v}\n"));
        }
        out.push_str(&format!(
            "\n{} of {} checks passed: {}\n",
            self.checks - self.failures,
            self.checks,
            if self.passed() { "PASS" } else { "FAIL" }
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn machine_rendering_is_stable() {
        let mut r = Report::new("demo", "solve", 7, 8);
        r.fact("generators", 5);
        r.check("offshell[0]", true);
        let a = r.render_machine();
        let b = r.render_machine();
        assert_eq!(a, b);
        assert!(a.starts_with("report-format: 1\nproblem: demo\nmode: solve\nseed: 7\n"));
        assert!(a.ends_with("checks: 1\nfailures: 0\nstatus: pass\n"));
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn failures_flip_status() {
        let mut r = Report::new("demo", "solve", 7, 8);
        r.check("expected[0].span", false);
        assert!(!r.passed());
        assert_eq!(r.exit_code(), 1);
        assert!(r.render_machine().contains("status: fail"));
        // both renderings carry the same facts
        let human = r.render_human();
        assert!(human.contains("expected[0].span"));
        assert!(human.contains("fail"));
    }
}
