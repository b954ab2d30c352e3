//! Numeric verification: reduce Euler-Lagrange systems to explicit
//! first-order form, integrate with fixed-step classical RK4, and measure
//! conservation drift of charges along trajectories.

use std::collections::BTreeMap;

use num_traits::{ToPrimitive, Zero};

use crate::calculus::{euler_lagrange, partial, Diff, LagrangianSpec};
use crate::error::{Error, Result};
use crate::expr::{Expr, JetVar, TransArg, TransKind};
use crate::rational::{is_integer, rat_int, to_f64, Rational};

/// Explicit first-order system dy/dt = f(t, y).
#[derive(Clone, Debug)]
pub struct FirstOrderSystem {
    /// Jet variable stored in each state slot, grouped per coordinate in
    /// ascending order: x_i, x_i', ..., x_i^(l_i - 1).
    pub state_layout: Vec<JetVar>,
    pub rhs: Vec<Expr>,
    /// Determinant of the leading-coefficient matrix; evaluated at the
    /// initial state before integration (threshold 1e-9).
    pub leading_det: Expr,
    /// Solved derivative order per coordinate.
    pub solved_orders: Vec<u32>,
}

impl FirstOrderSystem {
    pub fn dim(&self) -> usize {
        self.state_layout.len()
    }

    pub fn state_index(&self, v: JetVar) -> Option<usize> {
        self.state_layout.iter().position(|s| *s == v)
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub step: f64,
    /// Set when integration stopped early on a non-finite state.
    pub truncated_at: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftReport {
    pub max_abs: f64,
    pub max_rel: f64,
}

/// Solve each coordinate's highest derivative from the Euler-Lagrange
/// system. The equations must be linear in the leading derivatives and the
/// leading-coefficient matrix must be invertible in closed form (a
/// single-term determinant).
pub fn reduce_to_first_order(spec: &LagrangianSpec, cap: u32) -> Result<FirstOrderSystem> {
    let n = spec.n_coords;
    let els: Vec<Expr> = (0..n)
        .map(|i| euler_lagrange(spec, i, cap))
        .collect::<Result<_>>()?;
    let mut solved_orders = vec![0u32; n];
    for el in &els {
        for v in el.jet_vars() {
            solved_orders[v.coord] = solved_orders[v.coord].max(v.order);
        }
    }
    for (i, &l) in solved_orders.iter().enumerate() {
        if l == 0 {
            return Err(Error::DegenerateLeadingCoefficient(format!(
                "coordinate {i} does not appear in the equations of motion"
            )));
        }
    }
    let leading: Vec<JetVar> = (0..n)
        .map(|i| JetVar::new(i, solved_orders[i]))
        .collect();

    // Coefficient matrix and remainder: E_e = sum_i C[e][i] u_i + R_e.
    let mut coeff = vec![vec![Expr::zero(); n]; n];
    let mut rest = Vec::with_capacity(n);
    for (e, el) in els.iter().enumerate() {
        let mut r = el.clone();
        for (i, u) in leading.iter().enumerate() {
            let c = partial(el, Diff::Var(*u));
            for u2 in &leading {
                if !partial(&c, Diff::Var(*u2)).is_zero() {
                    return Err(Error::NotReducible(format!(
                        "equation {e} is nonlinear in the leading derivatives"
                    )));
                }
            }
            r = r.sub(&c.mul(&Expr::jet(u.coord, u.order)));
            coeff[e][i] = c;
        }
        for u in &leading {
            if !partial(&r, Diff::Var(*u)).is_zero() {
                return Err(Error::NotReducible(format!(
                    "equation {e} is nonlinear in the leading derivatives"
                )));
            }
        }
        rest.push(r);
    }

    let det = expr_det(&coeff);
    if det.is_zero() {
        return Err(Error::DegenerateLeadingCoefficient(
            "leading-coefficient matrix has identically zero determinant".into(),
        ));
    }
    let det_inv = det.pow(&rat_int(-1)).map_err(|_| {
        Error::NotReducible(format!(
            "leading-coefficient determinant {det} is not invertible in closed form"
        ))
    })?;

    // u = -C^(-1) R via the adjugate: u_i = -(1/det) sum_e cof(e,i) R_e.
    let mut solved = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = Expr::zero();
        for (e, r) in rest.iter().enumerate() {
            if r.is_zero() {
                continue;
            }
            let cof = cofactor(&coeff, e, i);
            if cof.is_zero() {
                continue;
            }
            acc = acc.add(&cof.mul(r));
        }
        solved.push(acc.neg().mul(&det_inv));
    }

    let mut state_layout = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..n {
        for k in 0..solved_orders[i] {
            state_layout.push(JetVar::new(i, k));
            if k + 1 < solved_orders[i] {
                rhs.push(Expr::jet(i, k + 1));
            } else {
                rhs.push(solved[i].clone());
            }
        }
    }
    let sys = FirstOrderSystem {
        state_layout,
        rhs,
        leading_det: det,
        solved_orders,
    };
    for e in &sys.rhs {
        for v in e.jet_vars() {
            if sys.state_index(v).is_none() {
                return Err(Error::VerificationFailure(format!(
                    "reduced right-hand side references {v:?} outside the state"
                )));
            }
        }
    }
    Ok(sys)
}

fn expr_det(m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    match n {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        _ => {
            let mut det = Expr::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor = minor_matrix(m, 0, j);
                let term = m[0][j].mul(&expr_det(&minor));
                det = if j % 2 == 0 { det.add(&term) } else { det.sub(&term) };
            }
            det
        }
    }
}

fn cofactor(m: &[Vec<Expr>], row: usize, col: usize) -> Expr {
    let minor = minor_matrix(m, row, col);
    let d = expr_det(&minor);
    if (row + col) % 2 == 0 {
        d
    } else {
        d.neg()
    }
}

fn minor_matrix(m: &[Vec<Expr>], row: usize, col: usize) -> Vec<Vec<Expr>> {
    m.iter()
        .enumerate()
        .filter(|(r, _)| *r != row)
        .map(|(_, rw)| {
            rw.iter()
                .enumerate()
                .filter(|(c, _)| *c != col)
                .map(|(_, e)| e.clone())
                .collect()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// compiled evaluation

enum PowKind {
    Int(i32),
    Frac(f64),
}

enum TransTarget {
    Time,
    State(usize),
}

struct CompiledTerm {
    coeff: f64,
    t_power: Option<PowKind>,
    factors: Vec<(usize, PowKind)>,
    trans: Vec<(TransKind, f64, TransTarget)>,
}

/// Expression specialized to a state layout for fast repeated evaluation.
pub struct CompiledExpr {
    terms: Vec<CompiledTerm>,
}

impl CompiledExpr {
    pub fn compile(e: &Expr, sys: &FirstOrderSystem) -> Result<CompiledExpr> {
        let mut terms = Vec::with_capacity(e.terms().len());
        for term in e.terms() {
            let mut ct = CompiledTerm {
                coeff: to_f64(term.coeff()),
                t_power: if term.t_power().is_zero() {
                    None
                } else {
                    Some(pow_kind(term.t_power()))
                },
                factors: Vec::new(),
                trans: Vec::new(),
            };
            for (jv, exp) in term.jet_exponents() {
                let idx = sys
                    .state_index(*jv)
                    .ok_or_else(|| Error::UnboundJetVar(format!("{jv:?}")))?;
                ct.factors.push((idx, pow_kind(exp)));
            }
            for f in term.trans_factors() {
                let target = match f.arg {
                    TransArg::Time => TransTarget::Time,
                    TransArg::Coord(i) => TransTarget::State(
                        sys.state_index(JetVar::new(i, 0))
                            .ok_or_else(|| Error::UnboundJetVar(format!("x{i}")))?,
                    ),
                };
                ct.trans.push((f.kind, to_f64(&f.freq), target));
            }
            terms.push(ct);
        }
        Ok(CompiledExpr { terms })
    }

    /// Plain IEEE evaluation; domain violations surface as NaN/inf in the
    /// caller's finiteness checks.
    pub fn eval(&self, t: f64, state: &[f64]) -> f64 {
        let mut total = 0.0;
        for term in &self.terms {
            let mut v = term.coeff;
            if let Some(p) = &term.t_power {
                v *= apply_pow(t, p);
            }
            for (idx, p) in &term.factors {
                v *= apply_pow(state[*idx], p);
            }
            for (kind, freq, target) in &term.trans {
                let u = match target {
                    TransTarget::Time => t,
                    TransTarget::State(i) => state[*i],
                };
                v *= match kind {
                    TransKind::Sin => (freq * u).sin(),
                    TransKind::Cos => (freq * u).cos(),
                    TransKind::Exp => (freq * u).exp(),
                };
            }
            total += v;
        }
        total
    }
}

fn pow_kind(e: &Rational) -> PowKind {
    if is_integer(e) {
        if let Some(k) = e.numer().to_i32() {
            return PowKind::Int(k);
        }
    }
    PowKind::Frac(to_f64(e))
}

fn apply_pow(base: f64, p: &PowKind) -> f64 {
    match p {
        PowKind::Int(k) => base.powi(*k),
        PowKind::Frac(f) => base.powf(*f),
    }
}

const LEADING_DET_THRESHOLD: f64 = 1e-9;

/// Fixed-step classical RK4 on [0, t_end]. A non-finite state truncates the
/// trajectory and records the time; the leading determinant is checked at
/// the initial state when it is not constant.
pub fn integrate(
    sys: &FirstOrderSystem,
    initial: &[f64],
    t_end: f64,
    step: f64,
) -> Result<Trajectory> {
    if initial.len() != sys.dim() {
        return Err(Error::Config(format!(
            "initial state has {} entries, system needs {}",
            initial.len(),
            sys.dim()
        )));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Config("step must be positive".into()));
    }
    if initial.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("initial state must be finite".into()));
    }
    let det = CompiledExpr::compile(&sys.leading_det, sys)?;
    let det0 = det.eval(0.0, initial);
    if !det0.is_finite() || det0.abs() < LEADING_DET_THRESHOLD {
        return Err(Error::DegenerateLeadingCoefficient(format!(
            "|det| = {:.3e} at the initial state",
            det0.abs()
        )));
    }

    let rhs: Vec<CompiledExpr> = sys
        .rhs
        .iter()
        .map(|e| CompiledExpr::compile(e, sys))
        .collect::<Result<_>>()?;
    let dim = sys.dim();
    let n_steps = if t_end <= 0.0 {
        0
    } else {
        (t_end / step).round().max(1.0) as usize
    };

    let eval_all = |t: f64, y: &[f64], out: &mut [f64]| {
        for (o, f) in out.iter_mut().zip(&rhs) {
            *o = f.eval(t, y);
        }
    };

    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    let mut y = initial.to_vec();
    times.push(0.0);
    states.push(y.clone());
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];
    let mut tmp = vec![0.0; dim];
    let mut truncated_at = None;
    for s in 0..n_steps {
        let t = s as f64 * step;
        eval_all(t, &y, &mut k1);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * step * k1[i];
        }
        eval_all(t + 0.5 * step, &tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = y[i] + 0.5 * step * k2[i];
        }
        eval_all(t + 0.5 * step, &tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = y[i] + step * k3[i];
        }
        eval_all(t + step, &tmp, &mut k4);
        for i in 0..dim {
            y[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = (s + 1) as f64 * step;
        if y.iter().any(|v| !v.is_finite()) {
            truncated_at = Some(t_next);
            break;
        }
        times.push(t_next);
        states.push(y.clone());
    }
    Ok(Trajectory {
        times,
        states,
        step,
        truncated_at,
    })
}

/// Max absolute and relative drift of a charge along a trajectory:
/// max |I(t) - I(0)| and that over max(1, |I(0)|).
pub fn drift(traj: &Trajectory, sys: &FirstOrderSystem, charge: &Expr) -> Result<DriftReport> {
    let compiled = CompiledExpr::compile(charge, sys)?;
    let mut values = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(t, y)| compiled.eval(*t, y));
    let i0 = values
        .next()
        .ok_or_else(|| Error::Domain("empty trajectory".into()))?;
    if !i0.is_finite() {
        return Err(Error::Domain("charge is non-finite at t = 0".into()));
    }
    let mut max_abs: f64 = 0.0;
    for v in values {
        if !v.is_finite() {
            return Err(Error::Domain("charge became non-finite".into()));
        }
        max_abs = max_abs.max((v - i0).abs());
    }
    Ok(DriftReport {
        max_abs,
        max_rel: max_abs / 1.0_f64.max(i0.abs()),
    })
}

/// Evaluate an expression on a trajectory sample via the state layout
/// (reference path used by tests; the compiled path is used above).
pub fn eval_on_state(
    e: &Expr,
    sys: &FirstOrderSystem,
    t: f64,
    state: &[f64],
) -> Result<f64> {
    let mut jets = BTreeMap::new();
    for (i, v) in sys.state_layout.iter().enumerate() {
        jets.insert(*v, state[i]);
    }
    e.eval_numeric(t, &jets)
}
