//! Problem-file ingestion.
//!
//! Line-oriented key/value format, versioned with a `format = 1` header.
//! `#` starts a comment. Top-level keys describe the system; optional
//! sections refine the run:
//!
//! ```text
//! format = 1
//! name = spinning_particle
//! coordinates = x            # comma-separated
//! order = 2
//! lagrangian = (1/2)*(x''^2 - x'^2)
//!
//! [parameters]               # exact rationals, substituted at parse time
//! m = 1
//!
//! [ansatz]
//! zeta_degree = 2            # or "none"
//! eta_t_degree = 1
//! eta_x_degree = 1
//! inverse_coords = false
//! frequencies = auto         # auto | none | comma list of rationals
//! gauge_t_degree = 3         # optional, defaults to eta_t_degree
//! gauge_jet_degree = 2       # optional, defaults to eta_x_degree
//!
//! [numeric]
//! initial = 1, 0, -1, 0      # repeatable, one trajectory per line
//! t_end = 10
//! step = 0.001
//! tol_abs = 1e-7
//! tol_rel = 1e-8
//!
//! [transform]
//! t_of = t
//! x_of = x*exp(t)            # repeatable, one per coordinate in order
//! F = -x*x'*exp(2*t)
//! G = x'*exp(t) - x*exp(t)
//! cyclic_index = 0
//! expect_cyclic = true
//! expect_l_prime = ...
//! expect_l_tilde = ...
//! expect_momentum = ...
//! momentum_matches = ...
//!
//! [expected]
//! integral = x' + x'''       # repeatable
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use noether_core::rational::{parse_rational, Rational};
use noether_core::symmetry::{AnsatzConfig, FrequencySpec};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug)]
pub struct NumericSection {
    pub initials: Vec<Vec<f64>>,
    pub t_end: f64,
    pub step: f64,
    pub tol_abs: f64,
    pub tol_rel: f64,
}

#[derive(Clone, Debug, Default)]
pub struct TransformSection {
    pub t_of: String,
    pub x_of: Vec<String>,
    pub f: Option<String>,
    pub gauge: Option<String>,
    pub cyclic_index: usize,
    pub expect_cyclic: Option<bool>,
    pub expect_l_prime: Option<String>,
    pub expect_l_tilde: Option<String>,
    pub expect_momentum: Option<String>,
    pub momentum_matches: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ProblemFile {
    pub name: String,
    pub coordinates: Vec<String>,
    pub order: u32,
    pub parameters: BTreeMap<String, Rational>,
    pub lagrangian: String,
    pub ansatz: AnsatzConfig,
    pub numeric: Option<NumericSection>,
    pub transform: Option<TransformSection>,
    pub expected: Vec<String>,
}

pub fn load(path: &Path) -> CliResult<ProblemFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    parse_problem(&text)
}

pub fn parse_problem(text: &str) -> CliResult<ProblemFile> {
    let mut format_seen = false;
    let mut name = None;
    let mut coordinates: Vec<String> = Vec::new();
    let mut order = None;
    let mut parameters = BTreeMap::new();
    let mut lagrangian = None;
    let mut ansatz = AnsatzConfig::default();
    let mut numeric: Option<NumericBuilder> = None;
    let mut transform: Option<TransformSection> = None;
    let mut expected = Vec::new();

    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let Some(sec) = rest.strip_suffix(']') else {
                return Err(CliError::at_line(line_no, "malformed section header"));
            };
            section = sec.trim().to_string();
            match section.as_str() {
                "parameters" | "ansatz" | "expected" => {}
                "numeric" => numeric = Some(NumericBuilder::default()),
                "transform" => transform = Some(TransformSection::default()),
                other => {
                    return Err(CliError::at_line(line_no, format!("unknown section [{other}]")))
                }
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::at_line(line_no, "expected `key = value`"));
        };
        let key = key.trim();
        let value = value.trim();
        if !format_seen {
            if key != "format" {
                return Err(CliError::at_line(
                    line_no,
                    "the first entry must be `format = 1`",
                ));
            }
            if value != "1" {
                return Err(CliError::at_line(line_no, format!("unsupported format {value}")));
            }
            format_seen = true;
            continue;
        }
        match section.as_str() {
            "" => match key {
                "name" => name = Some(value.to_string()),
                "coordinates" => {
                    coordinates = value
                        .split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect();
                }
                "order" => {
                    order = Some(parse_u32(value, line_no, "order")?);
                }
                "lagrangian" => lagrangian = Some(value.to_string()),
                other => {
                    return Err(CliError::at_line(line_no, format!("unknown key `{other}`")))
                }
            },
            "parameters" => {
                let r = parse_rational(value).ok_or_else(|| {
                    CliError::at_line(line_no, format!("parameter `{key}` is not a rational"))
                })?;
                parameters.insert(key.to_string(), r);
            }
            "ansatz" => apply_ansatz_key(&mut ansatz, key, value, line_no)?,
            "numeric" => {
                let n = numeric.as_mut().expect("section seen");
                match key {
                    "initial" => n.initials.push(parse_number_list(value, line_no)?),
                    "t_end" => n.t_end = Some(parse_f64(value, line_no, "t_end")?),
                    "step" => n.step = Some(parse_f64(value, line_no, "step")?),
                    "tol_abs" => n.tol_abs = Some(parse_f64(value, line_no, "tol_abs")?),
                    "tol_rel" => n.tol_rel = Some(parse_f64(value, line_no, "tol_rel")?),
                    other => {
                        return Err(CliError::at_line(
                            line_no,
                            format!("unknown key `{other}` in [numeric]"),
                        ))
                    }
                }
            }
            "transform" => {
                let t = transform.as_mut().expect("section seen");
                match key {
                    "t_of" => t.t_of = value.to_string(),
                    "x_of" => t.x_of.push(value.to_string()),
                    "F" => t.f = Some(value.to_string()),
                    "G" => t.gauge = Some(value.to_string()),
                    "cyclic_index" => t.cyclic_index = parse_u32(value, line_no, key)? as usize,
                    "expect_cyclic" => t.expect_cyclic = Some(parse_bool(value, line_no)?),
                    "expect_l_prime" => t.expect_l_prime = Some(value.to_string()),
                    "expect_l_tilde" => t.expect_l_tilde = Some(value.to_string()),
                    "expect_momentum" => t.expect_momentum = Some(value.to_string()),
                    "momentum_matches" => t.momentum_matches = Some(value.to_string()),
                    other => {
                        return Err(CliError::at_line(
                            line_no,
                            format!("unknown key `{other}` in [transform]"),
                        ))
                    }
                }
            }
            "expected" => match key {
                "integral" => expected.push(value.to_string()),
                other => {
                    return Err(CliError::at_line(
                        line_no,
                        format!("unknown key `{other}` in [expected]"),
                    ))
                }
            },
            _ => unreachable!("validated section"),
        }
    }

    if !format_seen {
        return Err(CliError::input("missing `format = 1` header"));
    }
    let name = name.ok_or_else(|| CliError::input("missing `name`"))?;
    if coordinates.is_empty() {
        return Err(CliError::input("missing `coordinates`"));
    }
    let order = order.ok_or_else(|| CliError::input("missing `order`"))?;
    let lagrangian = lagrangian.ok_or_else(|| CliError::input("missing `lagrangian`"))?;
    let numeric = match numeric {
        None => None,
        Some(b) => Some(b.build()?),
    };
    if let Some(t) = &transform {
        if t.t_of.is_empty() {
            return Err(CliError::input("[transform] requires `t_of`"));
        }
        if t.x_of.len() != coordinates.len() {
            return Err(CliError::input(format!(
                "[transform] provides {} x_of entries for {} coordinates",
                t.x_of.len(),
                coordinates.len()
            )));
        }
        if t.cyclic_index >= coordinates.len() {
            return Err(CliError::input("cyclic_index out of range"));
        }
    }
    Ok(ProblemFile {
        name,
        coordinates,
        order,
        parameters,
        lagrangian,
        ansatz,
        numeric,
        transform,
        expected,
    })
}

#[derive(Default)]
struct NumericBuilder {
    initials: Vec<Vec<f64>>,
    t_end: Option<f64>,
    step: Option<f64>,
    tol_abs: Option<f64>,
    tol_rel: Option<f64>,
}

impl NumericBuilder {
    fn build(self) -> CliResult<NumericSection> {
        if self.initials.is_empty() {
            return Err(CliError::input("[numeric] requires at least one `initial`"));
        }
        Ok(NumericSection {
            initials: self.initials,
            t_end: self.t_end.ok_or_else(|| CliError::input("[numeric] requires `t_end`"))?,
            step: self.step.ok_or_else(|| CliError::input("[numeric] requires `step`"))?,
            tol_abs: self.tol_abs.unwrap_or(1e-7),
            tol_rel: self.tol_rel.unwrap_or(1e-8),
        })
    }
}

fn apply_ansatz_key(
    config: &mut AnsatzConfig,
    key: &str,
    value: &str,
    line_no: usize,
) -> CliResult<()> {
    match key {
        "zeta_degree" => {
            config.zeta_degree = if value == "none" {
                None
            } else {
                Some(parse_u32(value, line_no, key)?)
            };
        }
        "zeta_x_degree" => config.zeta_x_degree = parse_u32(value, line_no, key)?,
        "eta_t_degree" => config.eta_t_degree = parse_u32(value, line_no, key)?,
        "eta_x_degree" => config.eta_x_degree = parse_u32(value, line_no, key)?,
        "inverse_coords" => config.inverse_coords = parse_bool(value, line_no)?,
        "gauge_t_degree" => config.gauge_t_degree = Some(parse_u32(value, line_no, key)?),
        "gauge_jet_degree" => config.gauge_jet_degree = Some(parse_u32(value, line_no, key)?),
        "frequencies" => {
            config.frequencies = match value {
                "auto" => FrequencySpec::Auto,
                "none" => FrequencySpec::List(Vec::new()),
                list => {
                    let mut freqs = Vec::new();
                    for part in list.split(',') {
                        let r = parse_rational(part).ok_or_else(|| {
                            CliError::at_line(
                                line_no,
                                format!("frequency `{}` is not a rational", part.trim()),
                            )
                        })?;
                        freqs.push(r);
                    }
                    FrequencySpec::List(freqs)
                }
            };
        }
        other => {
            return Err(CliError::at_line(
                line_no,
                format!("unknown key `{other}` in [ansatz]"),
            ))
        }
    }
    Ok(())
}

fn parse_u32(value: &str, line_no: usize, key: &str) -> CliResult<u32> {
    value
        .parse()
        .map_err(|_| CliError::at_line(line_no, format!("`{key}` expects a non-negative integer")))
}

fn parse_bool(value: &str, line_no: usize) -> CliResult<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(CliError::at_line(line_no, "expected true or false")),
    }
}

/// Accepts decimal floats and exact rationals ("1", "-1/4", "0.001").
fn parse_f64(value: &str, line_no: usize, key: &str) -> CliResult<f64> {
    if let Some(r) = parse_rational(value) {
        return Ok(noether_core::rational::to_f64(&r));
    }
    value
        .parse()
        .map_err(|_| CliError::at_line(line_no, format!("`{key}` expects a number")))
}

fn parse_number_list(value: &str, line_no: usize) -> CliResult<Vec<f64>> {
    value
        .split(',')
        .map(|part| parse_f64(part.trim(), line_no, "initial"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "format = 1\nname = demo\ncoordinates = x\norder = 2\nlagrangian = (1/2)*x''^2\n";

    #[test]
    fn minimal_file() {
        let p = parse_problem(MINIMAL).unwrap();
        assert_eq!(p.name, "demo");
        assert_eq!(p.coordinates, vec!["x".to_string()]);
        assert_eq!(p.order, 2);
        assert!(p.numeric.is_none());
        assert!(p.transform.is_none());
    }

    #[test]
    fn format_header_required() {
        let err = parse_problem("name = demo\n").unwrap_err();
        assert!(err.to_string().contains("format"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn sections_and_repeats() {
        let text = format!(
            "{MINIMAL}\n[parameters]\nm = 1/2\n\n[ansatz]\nzeta_degree = none\nfrequencies = 1, 1/2\n\n\
             [numeric]\ninitial = 1, 0, -1, 0\ninitial = 0, 1, 0, -1\nt_end = 10\nstep = 0.001\n\n\
             [expected]\nintegral = x' + x'''\nintegral = x''\n"
        );
        let p = parse_problem(&text).unwrap();
        assert_eq!(p.parameters["m"], noether_core::rational::rat(1, 2));
        assert_eq!(p.ansatz.zeta_degree, None);
        assert!(matches!(&p.ansatz.frequencies, FrequencySpec::List(l) if l.len() == 2));
        let n = p.numeric.unwrap();
        assert_eq!(n.initials.len(), 2);
        assert_eq!(n.tol_rel, 1e-8);
        assert_eq!(p.expected.len(), 2);
    }

    #[test]
    fn error_lines_are_reported() {
        let text = format!("{MINIMAL}[ansatz]\nbogus = 3\n");
        let err = parse_problem(&text).unwrap_err();
        assert!(err.to_string().contains("line 7"), "{err}");
    }

    #[test]
    fn transform_arity_checked() {
        let text = format!("{MINIMAL}[transform]\nt_of = t\n");
        let err = parse_problem(&text).unwrap_err();
        assert!(err.to_string().contains("x_of"));
    }
}
