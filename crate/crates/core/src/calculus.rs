//! Jet-space differential operators: partials with respect to time and jet
//! variables, the total time derivative, and the higher-order
//! Euler-Lagrange operator E_i(L) = sum_k (-1)^k D_t^k dL/dx_i^(k).

use crate::error::{Error, Result};
use crate::expr::{canonical_sum, Expr, JetVar, Term, TransArg, TrigKind};
use crate::rational::Rational;
use num_traits::Zero;

/// Differentiation target for [`partial`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Diff {
    /// Explicit time dependence only (t-powers and transcendental factors
    /// in t); jet variables are held fixed.
    Time,
    Var(JetVar),
}

/// A Lagrangian together with its coordinate count and derivative order N.
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianSpec {
    pub n_coords: usize,
    pub order: u32,
    pub lagrangian: Expr,
}

impl LagrangianSpec {
    pub fn new(n_coords: usize, order: u32, lagrangian: Expr) -> Result<Self> {
        if order < 1 {
            return Err(Error::Config("Lagrangian order must be at least 1".into()));
        }
        for v in lagrangian.jet_vars() {
            if v.coord >= n_coords {
                return Err(Error::Config(format!(
                    "Lagrangian references coordinate {} but only {} are declared",
                    v.coord, n_coords
                )));
            }
            if v.order > order {
                return Err(Error::Config(format!(
                    "Lagrangian references derivative order {} above the declared order {}",
                    v.order, order
                )));
            }
        }
        Ok(LagrangianSpec {
            n_coords,
            order,
            lagrangian,
        })
    }
}

/// Exact partial derivative; all jet variables are independent symbols.
pub fn partial(e: &Expr, d: Diff) -> Expr {
    let mut raw: Vec<Term> = Vec::new();
    for term in e.terms() {
        match d {
            Diff::Time => {
                if !term.key.t_power.is_zero() {
                    raw.push(power_rule_time(term));
                }
                trans_contributions(term, TransArg::Time, &mut raw);
            }
            Diff::Var(v) => {
                if term.key.jets.contains_key(&v) {
                    raw.push(power_rule_jet(term, v));
                }
                if v.order == 0 {
                    trans_contributions(term, TransArg::Coord(v.coord), &mut raw);
                }
            }
        }
    }
    canonical_sum(raw)
}

fn power_rule_time(term: &Term) -> Term {
    let p = term.key.t_power.clone();
    let mut key = term.key.clone();
    key.t_power = &p - Rational::from_integer(1.into());
    Term {
        coeff: &term.coeff * &p,
        key,
    }
}

fn power_rule_jet(term: &Term, v: JetVar) -> Term {
    let e = term.key.jets[&v].clone();
    let mut jets = term.key.jets.clone();
    let one = Rational::from_integer(1.into());
    let reduced = &e - &one;
    if reduced.is_zero() {
        jets.remove(&v);
    } else {
        jets.insert(v, reduced);
    }
    Term {
        coeff: &term.coeff * &e,
        key: crate::expr::TermKey::from_jets(jets, term.key.t_power.clone(), term.key.trans.clone()),
    }
}

/// Chain-rule contributions of sin/cos/exp factors over the given argument.
fn trans_contributions(term: &Term, arg: TransArg, raw: &mut Vec<Term>) {
    let Some(at) = term.key.trans.get(&arg) else {
        return;
    };
    if let Some(f) = &at.exp {
        // d exp(f u)/du = f exp(f u): same key, scaled coefficient.
        raw.push(Term {
            coeff: &term.coeff * f,
            key: term.key.clone(),
        });
    }
    if let Some((kind, f)) = &at.trig {
        let (new_kind, sign) = match kind {
            TrigKind::Sin => (TrigKind::Cos, Rational::from_integer(1.into())),
            TrigKind::Cos => (TrigKind::Sin, Rational::from_integer((-1).into())),
        };
        let mut key = term.key.clone();
        let slot = key.trans.get_mut(&arg).expect("factor present");
        slot.trig = Some((new_kind, f.clone()));
        raw.push(Term {
            coeff: &term.coeff * f * sign,
            key,
        });
    }
}

/// Total time derivative D_t e = de/dt + sum_i,k x_i^(k+1) de/dx_i^(k).
pub fn total_derivative(e: &Expr, cap: u32) -> Result<Expr> {
    let mut acc = partial(e, Diff::Time);
    for v in e.jet_vars() {
        let de = partial(e, Diff::Var(v));
        if de.is_zero() {
            continue;
        }
        if v.order + 1 > cap {
            return Err(Error::OrderCapExceeded {
                cap,
                needed: v.order + 1,
            });
        }
        acc = acc.add(&de.mul(&Expr::jet(v.coord, v.order + 1)));
    }
    Ok(acc)
}

/// D_t applied n times.
pub fn total_derivative_n(e: &Expr, n: u32, cap: u32) -> Result<Expr> {
    let mut acc = e.clone();
    for _ in 0..n {
        acc = total_derivative(&acc, cap)?;
    }
    Ok(acc)
}

/// The Euler-Lagrange expression E_i(L); the equation of motion is
/// E_i(L) = 0. Valid for any order N via the alternating-sign sum.
pub fn euler_lagrange(spec: &LagrangianSpec, i: usize, cap: u32) -> Result<Expr> {
    assert!(i < spec.n_coords, "coordinate index out of range");
    let mut acc = Expr::zero();
    for k in 0..=spec.order {
        let dl = partial(&spec.lagrangian, Diff::Var(JetVar::new(i, k)));
        if dl.is_zero() {
            continue;
        }
        let dk = total_derivative_n(&dl, k, cap)?;
        acc = if k % 2 == 0 { acc.add(&dk) } else { acc.sub(&dk) };
    }
    Ok(acc)
}
