//! Point transformations and cyclic coordinates for second-order
//! Lagrangians: transform L into a primed frame, test cyclicity, lift gauge
//! functions to F, build the equivalent Lagrangian L' + dF/dt', and compute
//! Ostrogradsky conjugate momenta.
//!
//! All re-expression runs in the forward direction only: unprimed
//! quantities are rewritten in primed variables by substituting the forward
//! map and its total derivatives. The factor dt/dt' must be a single
//! invertible term (monomial), which covers t = t' and monomial time maps.

use std::collections::BTreeMap;

use crate::calculus::{partial, total_derivative, Diff, LagrangianSpec};
use crate::error::{Error, Result};
use crate::expr::{substitute, Expr, JetVar, Substitution};
use crate::rational::rat_int;

/// Forward point transformation x_i = x_i(x', t'), t = t(x', t'). The
/// expressions are written over the primed frame using the same coordinate
/// names; they must be derivative-free.
#[derive(Clone, Debug, PartialEq)]
pub struct PointTransformation {
    pub t_of: Expr,
    pub x_of: Vec<Expr>,
}

impl PointTransformation {
    pub fn new(t_of: Expr, x_of: Vec<Expr>) -> Result<Self> {
        for e in x_of.iter().chain([&t_of]) {
            if e.max_order() > 0 {
                return Err(Error::Config(
                    "point transformations must not reference derivatives".into(),
                ));
            }
        }
        Ok(PointTransformation { t_of, x_of })
    }

    pub fn identity(n_coords: usize) -> Self {
        PointTransformation {
            t_of: Expr::time(),
            x_of: (0..n_coords).map(|i| Expr::jet(i, 0)).collect(),
        }
    }
}

/// dt/dt' and its reciprocal; the reciprocal exists only for single-term
/// factors.
fn time_factor(tr: &PointTransformation, cap: u32) -> Result<(Expr, Expr)> {
    let dt = total_derivative(&tr.t_of, cap)?;
    if dt.is_zero() {
        return Err(Error::NonInvertibleTimeFactor(
            "dt/dt' is identically zero".into(),
        ));
    }
    let inv = dt
        .pow(&rat_int(-1))
        .map_err(|_| Error::NonInvertibleTimeFactor(format!("dt/dt' = {dt}")))?;
    Ok((dt, inv))
}

/// Rewrite an unprimed expression in primed variables:
/// x_i -> x_of_i, and each derivative by the chain rule
/// d^k x_i/dt^k -> D'(previous) / (dt/dt').
pub fn transform_expr(e: &Expr, tr: &PointTransformation, cap: u32) -> Result<Expr> {
    let n = tr.x_of.len();
    let max_order = e
        .jet_vars()
        .iter()
        .map(|v| {
            if v.coord >= n {
                Err(Error::SubstitutionDomainError(format!(
                    "coordinate index {} outside the transformation",
                    v.coord
                )))
            } else {
                Ok(v.order)
            }
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);
    let (_, inv) = time_factor(tr, cap)?;
    let mut subs = Substitution {
        time: Some(tr.t_of.clone()),
        jets: BTreeMap::new(),
    };
    for (i, x0) in tr.x_of.iter().enumerate() {
        let mut repl = x0.clone();
        subs.jets.insert(JetVar::new(i, 0), repl.clone());
        for k in 1..=max_order {
            repl = total_derivative(&repl, cap)?.mul(&inv);
            subs.jets.insert(JetVar::new(i, k), repl.clone());
        }
    }
    substitute(e, &subs)
}

/// L'(x', x'', ...; t') = L(x, x', x''; t) * dt/dt' under the forward map.
pub fn transform_lagrangian(
    spec: &LagrangianSpec,
    tr: &PointTransformation,
    cap: u32,
) -> Result<LagrangianSpec> {
    if spec.order != 2 {
        return Err(Error::Config(
            "point transformations are implemented for second-order Lagrangians".into(),
        ));
    }
    if tr.x_of.len() != spec.n_coords {
        return Err(Error::Config(
            "transformation arity does not match the coordinate count".into(),
        ));
    }
    let (dt, _) = time_factor(tr, cap)?;
    let body = transform_expr(&spec.lagrangian, tr, cap)?;
    LagrangianSpec::new(spec.n_coords, 2, body.mul(&dt))
}

/// dL/dx_k = 0 identically.
pub fn is_cyclic(spec: &LagrangianSpec, k: usize) -> bool {
    assert!(k < spec.n_coords, "coordinate index out of range");
    partial(&spec.lagrangian, Diff::Var(JetVar::new(k, 0))).is_zero()
}

/// Ostrogradsky momentum conjugate to x_k for a second-order Lagrangian in
/// its own frame: p_k = dL/dx_k' - D_t(dL/dx_k'').
pub fn ostrogradsky_momentum(spec: &LagrangianSpec, k: usize, cap: u32) -> Result<Expr> {
    if spec.order != 2 {
        return Err(Error::Config(
            "Ostrogradsky momenta are implemented for second-order Lagrangians".into(),
        ));
    }
    assert!(k < spec.n_coords, "coordinate index out of range");
    let d1 = partial(&spec.lagrangian, Diff::Var(JetVar::new(k, 1)));
    let d2 = partial(&spec.lagrangian, Diff::Var(JetVar::new(k, 2)));
    Ok(d1.sub(&total_derivative(&d2, cap)?))
}

/// Check G = -dF/dx_k' after re-expressing G in primed variables. F is
/// given over the primed frame with jet order <= 1.
pub fn gauge_lift_check(
    gauge: &Expr,
    f: &Expr,
    tr: &PointTransformation,
    k: usize,
    cap: u32,
) -> Result<bool> {
    if f.max_order() > 1 {
        return Err(Error::Config("F must have jet order at most 1".into()));
    }
    let lhs = partial(f, Diff::Var(JetVar::new(k, 0))).neg();
    let rhs = transform_expr(gauge, tr, cap)?;
    Ok(lhs == rhs)
}

/// L~' = L' + D_t' F; adding a total derivative leaves the equations of
/// motion unchanged while making x_k' cyclic when F matches the gauge.
pub fn equivalent_lagrangian(
    spec_primed: &LagrangianSpec,
    f: &Expr,
    cap: u32,
) -> Result<LagrangianSpec> {
    if f.max_order() > 1 {
        return Err(Error::Config("F must have jet order at most 1".into()));
    }
    let body = spec_primed.lagrangian.add(&total_derivative(f, cap)?);
    LagrangianSpec::new(spec_primed.n_coords, spec_primed.order, body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::euler_lagrange;
    use crate::expr::parse;
    use crate::DEFAULT_ORDER_CAP as CAP;

    fn p1(text: &str) -> Expr {
        parse(text, &["x"], &BTreeMap::new()).unwrap()
    }

    fn oscillator() -> LagrangianSpec {
        LagrangianSpec::new(1, 2, p1("(1/2)*(x''^2 - x^2)")).unwrap()
    }

    fn exp_map() -> PointTransformation {
        PointTransformation::new(Expr::time(), vec![p1("x*exp(t)")]).unwrap()
    }

    #[test]
    fn oscillator_transforms_to_exponential_frame() {
        let lp = transform_lagrangian(&oscillator(), &exp_map(), CAP).unwrap();
        let want = p1("(1/2)*((x''*exp(t) + 2*x'*exp(t) + x*exp(t))^2 - x^2*exp(2*t))");
        assert_eq!(lp.lagrangian, want);
        assert!(!is_cyclic(&lp, 0));
    }

    #[test]
    fn identity_transformation_is_neutral() {
        let spec = oscillator();
        let lp = transform_lagrangian(&spec, &PointTransformation::identity(1), CAP).unwrap();
        assert_eq!(lp.lagrangian, spec.lagrangian);
    }

    #[test]
    fn gauge_lift_and_equivalent_lagrangian() {
        // G = x'e^t - xe^t re-expressed in the primed frame is x'e^{2t};
        // F = -x x' e^{2t} satisfies G = -dF/dx.
        let g = p1("x'*exp(t) - x*exp(t)");
        let f = p1("-x*x'*exp(2*t)");
        assert!(gauge_lift_check(&g, &f, &exp_map(), 0, CAP).unwrap());
        assert!(gauge_lift_check(&Expr::zero(), &Expr::zero(), &exp_map(), 0, CAP).unwrap());

        let lp = transform_lagrangian(&oscillator(), &exp_map(), CAP).unwrap();
        let lt = equivalent_lagrangian(&lp, &f, CAP).unwrap();
        let want = p1("(1/2)*exp(2*t)*(x''^2 + 2*x'^2 + 4*x''*x')");
        assert_eq!(lt.lagrangian, want);
        assert!(is_cyclic(&lt, 0));

        // momentum from the equivalent Lagrangian
        let p = ostrogradsky_momentum(&lt, 0, CAP).unwrap();
        assert_eq!(p, p1("-exp(2*t)*(x''' + 2*x'' + 2*x')"));
    }

    #[test]
    fn momentum_basics() {
        let free = LagrangianSpec::new(1, 2, p1("(1/2)*x'^2")).unwrap();
        assert_eq!(ostrogradsky_momentum(&free, 0, CAP).unwrap(), p1("x'"));
        let acc = LagrangianSpec::new(1, 2, p1("(1/2)*x''^2")).unwrap();
        assert_eq!(ostrogradsky_momentum(&acc, 0, CAP).unwrap(), p1("-x'''"));
    }

    #[test]
    fn total_derivative_leaves_equations_of_motion_unchanged() {
        let spec = oscillator();
        for f_text in ["x*x'*sin(t)", "t^2*x'^2 - x^3", "x'*exp(-2*t)"] {
            let f = p1(f_text);
            let lt = equivalent_lagrangian(&spec, &f, CAP).unwrap();
            assert_eq!(
                euler_lagrange(&lt, 0, CAP).unwrap(),
                euler_lagrange(&spec, 0, CAP).unwrap(),
                "gauge term {f_text} changed the dynamics"
            );
        }
    }

    #[test]
    fn quartic_example_full_path() {
        // L = x'^4 + 3x^2 x''^2 under t = -1/x', x = t' x'^(-3/2)
        let spec = LagrangianSpec::new(1, 2, p1("x'^4 + 3*x^2*x''^2")).unwrap();
        let tr = PointTransformation::new(p1("-x^(-1)"), vec![p1("t*x^(-3/2)")]).unwrap();
        let lp = transform_lagrangian(&spec, &tr, CAP).unwrap();
        // gauge G = 3x^2 x'^2 lifts through F
        let g = p1("3*x^2*x'^2");
        let f = p1("3*t^2*x'^(-2)*x^(-1) - (9/2)*t^3*x'^(-1)*x^(-2) + (9/4)*t^4*x^(-3)");
        assert!(gauge_lift_check(&g, &f, &tr, 0, CAP).unwrap());
        let lt = equivalent_lagrangian(&lp, &f, CAP).unwrap();
        assert_eq!(lt.lagrangian, p1("3*x''^2*t^2*x'^(-5) + x'^(-3)"));
        assert!(is_cyclic(&lt, 0));
    }

    #[test]
    fn polar_map_of_planar_lagrangian() {
        // Chern-Simons-like particle at m=1, lambda=2 under the polar map
        // t = t', x = y' sin x', y = y' cos x'.
        let coords = ["x", "y"];
        let p2 = |s: &str| parse(s, &coords, &BTreeMap::new()).unwrap();
        let l = p2("(2/2)*(y'*x'' - x'*y'') + (1/2)*(x'^2 + y'^2)");
        let spec = LagrangianSpec::new(2, 2, l).unwrap();
        let tr =
            PointTransformation::new(Expr::time(), vec![p2("y*sin(x)"), p2("y*cos(x)")]).unwrap();
        let lp = transform_lagrangian(&spec, &tr, CAP).unwrap();
        let want = p2(
            "(2/2)*(x'^3*y^2 + 2*x'*y'^2 + x''*y'*y - x'*y''*y) + (1/2)*(y'^2 + x'^2*y^2)",
        );
        assert_eq!(lp.lagrangian, want);
        assert!(is_cyclic(&lp, 0));
        assert!(!is_cyclic(&lp, 1));
    }

    #[test]
    fn non_invertible_time_factor() {
        // t = x'^2 + t' gives dt/dt' = 1 + 2 x x' (two terms)
        let tr = PointTransformation::new(p1("x^2 + t"), vec![p1("x")]).unwrap();
        let spec = oscillator();
        assert!(matches!(
            transform_lagrangian(&spec, &tr, CAP),
            Err(Error::NonInvertibleTimeFactor(_))
        ));
    }
}
