//! Canonical text rendering. The output re-parses to a structurally
//! identical expression (round-trip law): derivatives print in D-notation
//! `D(x,k)`, fractions parenthesize, transcendental arguments print as
//! `w*t` / `w*x`.

use num_traits::{One, Signed, Zero};

use super::{Expr, Term, TransArg, TransKind};
use crate::rational::{is_integer, Rational};

pub fn to_text(e: &Expr, coords: &[impl AsRef<str>]) -> String {
    if e.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, term) in e.terms().iter().enumerate() {
        let neg = term.coeff().is_negative();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        push_term(&mut out, term, coords);
    }
    out
}

fn push_term(out: &mut String, term: &Term, coords: &[impl AsRef<str>]) {
    let mag = term.coeff().abs();
    let mut factors: Vec<String> = Vec::new();
    if !term.t_power().is_zero() {
        factors.push(powered("t", term.t_power()));
    }
    for (jv, e) in term.jet_exponents() {
        let base = if jv.order == 0 {
            coord_name(coords, jv.coord)
        } else {
            format!("D({},{})", coord_name(coords, jv.coord), jv.order)
        };
        factors.push(powered(&base, e));
    }
    for f in term.trans_factors() {
        let kind = match f.kind {
            TransKind::Sin => "sin",
            TransKind::Cos => "cos",
            TransKind::Exp => "exp",
        };
        let var = match f.arg {
            TransArg::Time => "t".to_string(),
            TransArg::Coord(i) => coord_name(coords, i),
        };
        let arg = if f.freq.is_one() {
            var
        } else if (-&f.freq).is_one() {
            format!("-{var}")
        } else {
            format!("{}*{var}", rational_text(&f.freq))
        };
        factors.push(format!("{kind}({arg})"));
    }
    if factors.is_empty() || !mag.is_one() {
        let c = if is_integer(&mag) {
            mag.numer().to_string()
        } else {
            format!("({}/{})", mag.numer(), mag.denom())
        };
        factors.insert(0, c);
    }
    out.push_str(&factors.join("*"));
}

fn coord_name(coords: &[impl AsRef<str>], i: usize) -> String {
    coords
        .get(i)
        .map(|s| s.as_ref().to_string())
        .unwrap_or_else(|| format!("q{i}"))
}

fn powered(base: &str, e: &Rational) -> String {
    if e.is_one() {
        return base.to_string();
    }
    if is_integer(e) && !e.is_negative() {
        return format!("{base}^{}", e.numer());
    }
    format!("{base}^({})", rational_text(e))
}

fn rational_text(r: &Rational) -> String {
    if is_integer(r) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
