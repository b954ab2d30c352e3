//! Variational-symmetry determining system.
//!
//! For generators t -> t + zeta s, x_i -> x_i + eta_i s with gauge G, the
//! invariance identity
//!
//! ```text
//! sum_i sum_{k=0..N} dL/dx_i^(k) * [D_t^k(eta_i - x_i' zeta) + x_i^(k+1) zeta]
//!   + dL/dt * zeta + L * D_t(zeta) - D_t(G) = 0
//! ```
//!
//! must hold identically in the jet variables. Over a finite ansatz the
//! identity is linear in the unknown coefficients, so collecting the
//! coefficient of every distinct monomial yields one homogeneous linear
//! equation per monomial; the nullspace of that system is the space of
//! variational symmetries within the ansatz.

use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive, Zero};

use crate::calculus::{euler_lagrange, partial, total_derivative, Diff, LagrangianSpec};
use crate::error::{Error, Result};
use crate::expr::{Expr, JetVar, TermKey, TransArg, TransKind};
use crate::linsolve::RationalMatrix;
use crate::rational::{format_rational, nth_root, Rational};

/// Frequency content of the transcendental ansatz blocks.
#[derive(Clone, Debug, PartialEq)]
pub enum FrequencySpec {
    /// Derive from the characteristic roots of the linearized equations of
    /// motion; falls back to none (with a note) for nonlinear systems.
    Auto,
    /// Explicit frequencies; each enters with sin, cos and both
    /// exponential signs. May be empty.
    List(Vec<Rational>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnsatzConfig {
    /// Highest power of t in the zeta basis; None for no zeta freedom.
    pub zeta_degree: Option<u32>,
    /// Coordinate-monomial degree allowed in zeta (0 = time-only, the
    /// default; every worked case has zeta = zeta(t)).
    pub zeta_x_degree: u32,
    pub eta_t_degree: u32,
    pub eta_x_degree: u32,
    /// Add x_j^(-1) basis elements to eta (and allow exponent -1 on
    /// order-0 coordinates in the gauge monomials).
    pub inverse_coords: bool,
    pub frequencies: FrequencySpec,
    /// Gauge-basis degrees; default to the eta degrees when absent.
    pub gauge_t_degree: Option<u32>,
    pub gauge_jet_degree: Option<u32>,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        AnsatzConfig {
            zeta_degree: Some(2),
            zeta_x_degree: 0,
            eta_t_degree: 1,
            eta_x_degree: 1,
            inverse_coords: false,
            frequencies: FrequencySpec::Auto,
            gauge_t_degree: None,
            gauge_jet_degree: None,
        }
    }
}

/// Unknown-coefficient templates for (zeta, eta_i, G).
#[derive(Clone, Debug)]
pub struct GeneratorAnsatz {
    pub zeta_basis: Vec<Expr>,
    /// One basis list per coordinate.
    pub eta_basis: Vec<Vec<Expr>>,
    pub gauge_basis: Vec<Expr>,
    /// Diagnostics from frequency resolution (irrational roots etc.).
    pub notes: Vec<String>,
}

impl GeneratorAnsatz {
    pub fn unknown_count(&self) -> usize {
        self.zeta_basis.len()
            + self.eta_basis.iter().map(|b| b.len()).sum::<usize>()
            + self.gauge_basis.len()
    }

    /// Instantiate a coefficient vector into concrete (zeta, eta, gauge).
    pub fn instantiate(&self, coeffs: &[Rational]) -> (Expr, Vec<Expr>, Expr) {
        assert_eq!(coeffs.len(), self.unknown_count(), "coefficient count");
        let mut it = coeffs.iter();
        let mut zeta = Expr::zero();
        for b in &self.zeta_basis {
            zeta = zeta.add(&b.scale(it.next().unwrap()));
        }
        let mut eta = Vec::with_capacity(self.eta_basis.len());
        for basis in &self.eta_basis {
            let mut e = Expr::zero();
            for b in basis {
                e = e.add(&b.scale(it.next().unwrap()));
            }
            eta.push(e);
        }
        let mut gauge = Expr::zero();
        for b in &self.gauge_basis {
            gauge = gauge.add(&b.scale(it.next().unwrap()));
        }
        (zeta, eta, gauge)
    }
}

/// Homogeneous linear system: one row per monomial of the expanded
/// identity, one column per ansatz unknown.
#[derive(Clone, Debug)]
pub struct DeterminingSystem {
    pub matrix: RationalMatrix,
    pub unknown_count: usize,
}

impl DeterminingSystem {
    pub fn row_count(&self) -> usize {
        self.matrix.rows()
    }

    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        self.matrix.nullspace()
    }

    pub fn rank(&self) -> usize {
        self.matrix.rank()
    }
}

/// A concrete variational symmetry with its characteristics
/// Q_i = eta_i - x_i' zeta.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryGenerator {
    pub zeta: Expr,
    pub eta: Vec<Expr>,
    pub gauge: Expr,
    pub characteristics: Vec<Expr>,
}

impl SymmetryGenerator {
    pub fn new(zeta: Expr, eta: Vec<Expr>, gauge: Expr) -> Self {
        let characteristics = eta
            .iter()
            .enumerate()
            .map(|(i, e)| e.sub(&Expr::jet(i, 1).mul(&zeta)))
            .collect();
        SymmetryGenerator {
            zeta,
            eta,
            gauge,
            characteristics,
        }
    }
}

/// Cached partial derivatives of L for repeated identity evaluation.
pub struct IdentityAssembler<'a> {
    spec: &'a LagrangianSpec,
    cap: u32,
    dl: Vec<Vec<Expr>>, // dl[i][k] = dL/dx_i^(k)
    dl_t: Expr,
}

impl<'a> IdentityAssembler<'a> {
    pub fn new(spec: &'a LagrangianSpec, cap: u32) -> Self {
        let dl = (0..spec.n_coords)
            .map(|i| {
                (0..=spec.order)
                    .map(|k| partial(&spec.lagrangian, Diff::Var(JetVar::new(i, k))))
                    .collect()
            })
            .collect();
        let dl_t = partial(&spec.lagrangian, Diff::Time);
        IdentityAssembler {
            spec,
            cap,
            dl,
            dl_t,
        }
    }

    /// The determining identity's left-hand side; zero iff the triple is a
    /// variational symmetry with gauge G.
    pub fn identity(&self, zeta: &Expr, eta: &[Expr], gauge: &Expr) -> Result<Expr> {
        assert_eq!(eta.len(), self.spec.n_coords, "eta arity");
        let mut acc = Expr::zero();
        if !zeta.is_zero() {
            let dz = total_derivative(zeta, self.cap)?;
            acc = acc.add(&self.spec.lagrangian.mul(&dz));
            acc = acc.add(&self.dl_t.mul(zeta));
        }
        if !gauge.is_zero() {
            acc = acc.sub(&total_derivative(gauge, self.cap)?);
        }
        for i in 0..self.spec.n_coords {
            let q = eta[i].sub(&Expr::jet(i, 1).mul(zeta));
            let mut dkq = q;
            for k in 0..=self.spec.order {
                if k > 0 {
                    dkq = total_derivative(&dkq, self.cap)?;
                }
                let dl = &self.dl[i][k as usize];
                if dl.is_zero() {
                    continue;
                }
                let mut bracket = dkq.clone();
                if !zeta.is_zero() {
                    bracket = bracket.add(&Expr::jet(i, k + 1).mul(zeta));
                }
                acc = acc.add(&dl.mul(&bracket));
            }
        }
        Ok(acc)
    }
}

/// One-shot evaluation of the determining identity.
pub fn determining_identity(
    spec: &LagrangianSpec,
    zeta: &Expr,
    eta: &[Expr],
    gauge: &Expr,
    cap: u32,
) -> Result<Expr> {
    IdentityAssembler::new(spec, cap).identity(zeta, eta, gauge)
}

/// Resolved transcendental frequency sets.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResolvedFrequencies {
    pub trig: Vec<Rational>,
    pub exp: Vec<Rational>,
    pub notes: Vec<String>,
}

/// Resolve a frequency spec; Auto inspects the characteristic polynomial of
/// the linearized (constant-coefficient) Euler-Lagrange system and keeps
/// rational real parts (exponential modes) and rational imaginary parts
/// (trigonometric modes). Irrational factors are reported in the notes and
/// left to explicit configuration.
pub fn resolve_frequencies(
    spec: &LagrangianSpec,
    freq: &FrequencySpec,
    cap: u32,
) -> Result<ResolvedFrequencies> {
    match freq {
        FrequencySpec::List(list) => {
            let mut trig = Vec::new();
            let mut exp = Vec::new();
            for f in list {
                if f.is_zero() {
                    return Err(Error::Config("frequency 0 is not allowed".into()));
                }
                let a = f.abs();
                if !trig.contains(&a) {
                    trig.push(a.clone());
                    exp.push(a);
                }
            }
            trig.sort();
            exp.sort();
            Ok(ResolvedFrequencies {
                trig,
                exp,
                notes: Vec::new(),
            })
        }
        FrequencySpec::Auto => auto_frequencies(spec, cap),
    }
}

fn auto_frequencies(spec: &LagrangianSpec, cap: u32) -> Result<ResolvedFrequencies> {
    let n = spec.n_coords;
    let mut none = ResolvedFrequencies::default();
    // M[i][j](r): coefficient polynomial of coordinate j in equation i.
    let mut m: Vec<Vec<Poly>> = vec![vec![Vec::new(); n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        let el = euler_lagrange(spec, i, cap)?;
        for term in el.terms() {
            let linear = term.t_power().is_zero()
                && term.trans_factors().is_empty()
                && term.jet_exponents().count() == 1
                && term
                    .jet_exponents()
                    .all(|(_, e)| *e == Rational::from_integer(1.into()));
            if !linear {
                none.notes.push(
                    "equations of motion are not linear with constant coefficients; \
                     no frequencies derived"
                        .into(),
                );
                return Ok(none);
            }
            let (jv, _) = term.jet_exponents().next().unwrap();
            poly_add_coeff(&mut row[jv.coord], jv.order as usize, term.coeff().clone());
        }
    }
    let mut det = poly_det(&m);
    poly_trim(&mut det);
    if det.is_empty() {
        none.notes
            .push("degenerate linear system (zero characteristic determinant)".into());
        return Ok(none);
    }
    // Strip r^m.
    while det.first().map(|c| c.is_zero()).unwrap_or(false) {
        det.remove(0);
    }
    if det.len() <= 1 {
        return Ok(none); // constant: only zero roots existed
    }

    let mut remaining = det.clone();
    let mut exp = Vec::new();
    for root in rational_roots(&det) {
        if root.is_zero() {
            continue;
        }
        let a = root.abs();
        if !exp.contains(&a) {
            exp.push(a);
        }
        while let Some(q) = poly_div_linear(&remaining, &root) {
            remaining = q;
            if poly_eval(&remaining, &root) != Rational::zero() {
                break;
            }
        }
    }

    // Pure imaginary roots i*w: split det(r) = E(r^2) + r*O(r^2); both parts
    // must vanish at s = -w^2.
    let (even, odd) = poly_split(&det);
    let mut trig = Vec::new();
    let candidates = if odd.is_empty() {
        rational_roots(&even)
    } else if even.is_empty() {
        rational_roots(&odd)
    } else {
        rational_roots(&even)
            .into_iter()
            .filter(|s| poly_eval(&odd, s).is_zero())
            .collect()
    };
    for s in candidates {
        if !s.is_negative() {
            continue;
        }
        if let Some(w) = nth_root(&(-&s), 2) {
            let w = w.abs();
            if !trig.contains(&w) {
                trig.push(w.clone());
            }
            let quad = vec![-s.clone(), Rational::zero(), Rational::from_integer(1.into())];
            while let Some(q) = poly_div_exact(&remaining, &quad) {
                remaining = q;
            }
        } else {
            none.notes.push(format!(
                "characteristic root with irrational frequency (w^2 = {}); configure manually",
                format_rational(&(-&s))
            ));
        }
    }
    poly_trim(&mut remaining);
    if remaining.len() > 1 {
        none.notes.push(format!(
            "unresolved characteristic factor of degree {}; configure frequencies manually",
            remaining.len() - 1
        ));
    }
    trig.sort();
    exp.sort();
    Ok(ResolvedFrequencies {
        trig,
        exp,
        notes: none.notes,
    })
}

/// Build the finite ansatz bases for (zeta, eta, G).
pub fn build_ansatz(spec: &LagrangianSpec, config: &AnsatzConfig, cap: u32) -> Result<GeneratorAnsatz> {
    let n = spec.n_coords;
    let freqs = resolve_frequencies(spec, &config.frequencies, cap)?;
    let taus = tau_factors(&freqs);

    let mut zeta_basis = Vec::new();
    if let Some(dz) = config.zeta_degree {
        for mono in coord_monomials(n, config.zeta_x_degree) {
            for p in 0..=dz {
                zeta_basis.push(monomial_expr(&mono, p, None));
            }
        }
    }

    let mut eta_coord = Vec::new();
    for mono in coord_monomials(n, config.eta_x_degree) {
        eta_coord.push(mono);
    }
    let mut eta_basis = Vec::new();
    for _ in 0..n {
        let mut basis = Vec::new();
        for mono in &eta_coord {
            for tau in &taus {
                for p in 0..=config.eta_t_degree {
                    basis.push(monomial_expr(mono, p, tau.as_ref()));
                }
            }
        }
        if config.inverse_coords {
            for j in 0..n {
                let mut mono = vec![0i64; n];
                mono[j] = -1;
                for tau in &taus {
                    for p in 0..=config.eta_t_degree {
                        basis.push(monomial_expr(&mono, p, tau.as_ref()));
                    }
                }
            }
        }
        eta_basis.push(basis);
    }

    let g_t = config.gauge_t_degree.unwrap_or(config.eta_t_degree);
    let g_d = config.gauge_jet_degree.unwrap_or(config.eta_x_degree);
    let max_gauge_order = spec.order - 1;
    let jet_list: Vec<JetVar> = (0..n)
        .flat_map(|i| (0..=max_gauge_order).map(move |k| JetVar::new(i, k)))
        .collect();
    let mut gauge_basis = Vec::new();
    for mono in jet_monomials(&jet_list, g_d, config.inverse_coords) {
        for tau in &taus {
            for p in 0..=g_t {
                // Exclude the pure constant: D_t of it vanishes, which would
                // add a trivial nullspace direction.
                if p == 0 && tau.is_none() && mono.iter().all(|(_, e)| *e == 0) {
                    continue;
                }
                gauge_basis.push(jet_monomial_expr(&mono, p, tau.as_ref()));
            }
        }
    }

    let ansatz = GeneratorAnsatz {
        zeta_basis,
        eta_basis,
        gauge_basis,
        notes: freqs.notes,
    };
    if ansatz.unknown_count() == 0 {
        return Err(Error::Config("ansatz has no unknowns".into()));
    }
    Ok(ansatz)
}

fn tau_factors(freqs: &ResolvedFrequencies) -> Vec<Option<(TransKind, Rational)>> {
    let mut taus: Vec<Option<(TransKind, Rational)>> = vec![None];
    for w in &freqs.trig {
        taus.push(Some((TransKind::Sin, w.clone())));
        taus.push(Some((TransKind::Cos, w.clone())));
    }
    for w in &freqs.exp {
        taus.push(Some((TransKind::Exp, w.clone())));
        taus.push(Some((TransKind::Exp, -w.clone())));
    }
    taus
}

/// Monomials over the order-0 coordinates with total degree <= d, in
/// ascending-degree then lexicographic order.
fn coord_monomials(n: usize, d: u32) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for total in 0..=d {
        let mut current = vec![0i64; n];
        fill_monomials(n, 0, total as i64, &mut current, &mut out);
    }
    out
}

fn fill_monomials(n: usize, idx: usize, left: i64, current: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if idx == n {
        if left == 0 {
            out.push(current.clone());
        }
        return;
    }
    if idx == n - 1 {
        current[idx] = left;
        out.push(current.clone());
        current[idx] = 0;
        return;
    }
    for e in 0..=left {
        current[idx] = e;
        fill_monomials(n, idx + 1, left - e, current, out);
    }
    current[idx] = 0;
}

/// Monomials over the given jet variables with sum |e_v| <= d; order-0
/// coordinates may carry exponent -1 when `inverse` is set.
fn jet_monomials(vars: &[JetVar], d: u32, inverse: bool) -> Vec<Vec<(JetVar, i64)>> {
    let mut out = Vec::new();
    let mut current: Vec<(JetVar, i64)> = vars.iter().map(|v| (*v, 0)).collect();
    fn rec(
        vars: &[JetVar],
        idx: usize,
        budget: i64,
        inverse: bool,
        current: &mut Vec<(JetVar, i64)>,
        out: &mut Vec<Vec<(JetVar, i64)>>,
    ) {
        if idx == vars.len() {
            out.push(current.clone());
            return;
        }
        let lo = if inverse && vars[idx].order == 0 { -1 } else { 0 };
        for e in lo..=budget {
            if e.abs() > budget {
                continue;
            }
            current[idx].1 = e;
            rec(vars, idx + 1, budget - e.abs(), inverse, current, out);
        }
        current[idx].1 = 0;
    }
    rec(vars, 0, d as i64, inverse, &mut current, &mut out);
    out
}

fn monomial_expr(mono: &[i64], t_power: u32, tau: Option<&(TransKind, Rational)>) -> Expr {
    let pairs: Vec<(JetVar, i64)> = mono
        .iter()
        .enumerate()
        .map(|(j, &e)| (JetVar::new(j, 0), e))
        .collect();
    jet_monomial_expr(&pairs, t_power, tau)
}

fn jet_monomial_expr(
    mono: &[(JetVar, i64)],
    t_power: u32,
    tau: Option<&(TransKind, Rational)>,
) -> Expr {
    let mut e = Expr::time_pow(Rational::from_integer((t_power as i64).into()));
    for (v, exp) in mono {
        if *exp != 0 {
            e = e.mul(&Expr::jet_pow(*v, Rational::from_integer((*exp).into())));
        }
    }
    if let Some((kind, freq)) = tau {
        e = e.mul(&Expr::trans(*kind, TransArg::Time, freq.clone()));
    }
    e
}

/// Collect the identity's coefficient of every monomial, one homogeneous
/// equation per monomial, by linearity in the unknowns.
pub fn assemble_system(
    spec: &LagrangianSpec,
    ansatz: &GeneratorAnsatz,
    cap: u32,
) -> Result<DeterminingSystem> {
    let n = spec.n_coords;
    let asm = IdentityAssembler::new(spec, cap);
    let zero_eta = vec![Expr::zero(); n];
    let unknowns = ansatz.unknown_count();
    let mut columns: Vec<Expr> = Vec::with_capacity(unknowns);
    for b in &ansatz.zeta_basis {
        columns.push(asm.identity(b, &zero_eta, &Expr::zero())?);
    }
    for (i, basis) in ansatz.eta_basis.iter().enumerate() {
        for b in basis {
            let mut eta = zero_eta.clone();
            eta[i] = b.clone();
            columns.push(asm.identity(&Expr::zero(), &eta, &Expr::zero())?);
        }
    }
    for b in &ansatz.gauge_basis {
        columns.push(asm.identity(&Expr::zero(), &zero_eta, b)?);
    }

    let mut rows: BTreeMap<TermKey, BTreeMap<usize, Rational>> = BTreeMap::new();
    for (col, contribution) in columns.iter().enumerate() {
        for term in contribution.terms() {
            rows.entry(term.key.clone())
                .or_default()
                .insert(col, term.coeff().clone());
        }
    }
    let mut matrix = RationalMatrix::new(rows.len(), unknowns);
    for (r, (_, entries)) in rows.into_iter().enumerate() {
        for (c, v) in entries {
            matrix.set(r, c, v);
        }
    }
    Ok(DeterminingSystem {
        matrix,
        unknown_count: unknowns,
    })
}

/// Instantiate nullspace vectors into generators; every generator is
/// re-verified against the identity (a failure indicates an internal bug).
pub fn extract_generators(
    spec: &LagrangianSpec,
    ansatz: &GeneratorAnsatz,
    nullspace_basis: &[Vec<Rational>],
    cap: u32,
) -> Result<Vec<SymmetryGenerator>> {
    let asm = IdentityAssembler::new(spec, cap);
    let mut out = Vec::with_capacity(nullspace_basis.len());
    for v in nullspace_basis {
        if v.iter().all(|c| c.is_zero()) {
            return Err(Error::VerificationFailure(
                "zero vector offered as a nullspace basis element".into(),
            ));
        }
        let (zeta, eta, gauge) = ansatz.instantiate(v);
        let residue = asm.identity(&zeta, &eta, &gauge)?;
        if !residue.is_zero() {
            return Err(Error::VerificationFailure(format!(
                "nullspace vector fails re-substitution; residue {residue}"
            )));
        }
        out.push(SymmetryGenerator::new(zeta, eta, gauge));
    }
    Ok(out)
}

/// Full pipeline: ansatz -> system -> nullspace -> verified generators.
pub fn find_symmetries(
    spec: &LagrangianSpec,
    config: &AnsatzConfig,
    cap: u32,
) -> Result<(GeneratorAnsatz, DeterminingSystem, Vec<SymmetryGenerator>)> {
    let ansatz = build_ansatz(spec, config, cap)?;
    let system = assemble_system(spec, &ansatz, cap)?;
    let basis = system.nullspace();
    let generators = extract_generators(spec, &ansatz, &basis, cap)?;
    Ok((ansatz, system, generators))
}

// ---------------------------------------------------------------------------
// dense univariate polynomials over the rationals (characteristic analysis)

type Poly = Vec<Rational>;

fn poly_trim(p: &mut Poly) {
    while p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
}

fn poly_add_coeff(p: &mut Poly, k: usize, c: Rational) {
    if p.len() <= k {
        p.resize(k + 1, Rational::zero());
    }
    p[k] += c;
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::zero(); a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (j, cb) in b.iter().enumerate() {
            if !cb.is_zero() {
                out[i + j] += ca * cb;
            }
        }
    }
    out
}

fn poly_sub(a: &Poly, b: &Poly) -> Poly {
    let mut out = a.clone();
    for (i, c) in b.iter().enumerate() {
        poly_add_coeff(&mut out, i, -c.clone());
    }
    poly_trim(&mut out);
    out
}

fn poly_det(m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    if n == 0 {
        return vec![Rational::from_integer(1.into())];
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut det: Poly = Vec::new();
    for j in 0..n {
        let minor: Vec<Vec<Poly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let term = poly_mul(&m[0][j], &poly_det(&minor));
        det = if j % 2 == 0 {
            let mut d = det;
            for (i, c) in term.iter().enumerate() {
                poly_add_coeff(&mut d, i, c.clone());
            }
            d
        } else {
            poly_sub(&det, &term)
        };
    }
    poly_trim(&mut det);
    det
}

fn poly_eval(p: &Poly, x: &Rational) -> Rational {
    let mut acc = Rational::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Even/odd split: p(r) = E(r^2) + r * O(r^2).
fn poly_split(p: &Poly) -> (Poly, Poly) {
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for (k, c) in p.iter().enumerate() {
        if k % 2 == 0 {
            poly_add_coeff(&mut even, k / 2, c.clone());
        } else {
            poly_add_coeff(&mut odd, k / 2, c.clone());
        }
    }
    poly_trim(&mut even);
    poly_trim(&mut odd);
    (even, odd)
}

/// Distinct rational roots by the rational-root theorem (coefficients are
/// cleared to integers first; oversized coefficients yield no candidates).
fn rational_roots(p: &Poly) -> Vec<Rational> {
    let mut p = p.clone();
    poly_trim(&mut p);
    if p.len() <= 1 {
        return Vec::new();
    }
    // Clear denominators.
    let mut lcm = num_bigint::BigInt::from(1);
    for c in &p {
        lcm = num_integer::lcm(lcm, c.denom().clone());
    }
    let ints: Vec<num_bigint::BigInt> = p.iter().map(|c| c.numer() * &lcm / c.denom()).collect();
    let lead = ints.last().unwrap().clone();
    let mut trail = num_bigint::BigInt::from(0);
    for c in &ints {
        if !c.is_zero() {
            trail = c.clone();
            break;
        }
    }
    let (Some(lead), Some(trail)) = (lead.abs().to_i64(), trail.abs().to_i64()) else {
        return Vec::new();
    };
    let mut roots = Vec::new();
    for num in divisors(trail) {
        for den in divisors(lead) {
            for sign in [1i64, -1] {
                let cand = Rational::new((sign * num).into(), den.into());
                if poly_eval(&p, &cand).is_zero() && !roots.contains(&cand) {
                    roots.push(cand);
                }
            }
        }
    }
    roots.sort();
    roots
}

fn divisors(n: i64) -> Vec<i64> {
    let n = n.abs();
    if n == 0 {
        return vec![1];
    }
    if n > 1_000_000_000_000 {
        // Too large for trial division; candidates degrade gracefully to
        // an "unresolved factor" note upstream.
        return vec![1, n];
    }
    let mut out = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    out
}

/// Divide p by (r - root); None when the remainder is nonzero.
fn poly_div_linear(p: &Poly, root: &Rational) -> Option<Poly> {
    if p.len() <= 1 {
        return None;
    }
    let mut q = vec![Rational::zero(); p.len() - 1];
    let mut carry = Rational::zero();
    for k in (0..p.len()).rev() {
        let c = &p[k] + &carry;
        if k == 0 {
            if !c.is_zero() {
                return None;
            }
        } else {
            carry = &c * root;
            q[k - 1] = c;
        }
    }
    Some(q)
}

/// Exact polynomial division; None when the remainder is nonzero.
fn poly_div_exact(p: &Poly, d: &Poly) -> Option<Poly> {
    let mut rem = p.clone();
    poly_trim(&mut rem);
    let mut div = d.clone();
    poly_trim(&mut div);
    if div.is_empty() || rem.len() < div.len() {
        return None;
    }
    let mut q = vec![Rational::zero(); rem.len() - div.len() + 1];
    while rem.len() >= div.len() {
        let k = rem.len() - div.len();
        let f = rem.last().unwrap() / div.last().unwrap();
        q[k] = f.clone();
        for (i, dc) in div.iter().enumerate() {
            let delta = &f * dc;
            rem[k + i] -= delta;
        }
        poly_trim(&mut rem);
        if rem.is_empty() {
            break;
        }
    }
    if rem.is_empty() {
        Some(q)
    } else {
        None
    }
}
