//! Immutable symbolic expressions with exact rational arithmetic and a
//! canonical normal form.
//!
//! The representable class is fixed: finite sums of monomials
//! `c * t^p * prod x_i^(k)^e * prod trans`, where every exponent is an exact
//! rational and each transcendental factor is `sin`, `cos` or `exp` of a
//! rational multiple of `t` or of a single order-0 coordinate. Products of
//! sines and cosines over the same argument are eliminated by
//! product-to-sum rewriting, and exponential factors merge by frequency
//! addition, so canonical terms carry at most one `sin`-or-`cos` and one
//! `exp` per argument. Structural equality of canonical forms decides
//! mathematical equality within the class.

mod parser;
mod print;

pub use parser::parse;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{is_integer, nth_root, pow_i64, to_f64, Rational};

/// A coordinate or one of its time derivatives, treated as an independent
/// symbol: `coord` indexes the declared coordinates, `order` is the
/// derivative order (0 is the coordinate itself).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JetVar {
    pub coord: usize,
    pub order: u32,
}

impl JetVar {
    pub fn new(coord: usize, order: u32) -> Self {
        JetVar { coord, order }
    }

    /// The next-higher derivative of the same coordinate.
    pub fn raised(self) -> Self {
        JetVar {
            coord: self.coord,
            order: self.order + 1,
        }
    }
}

/// Argument of a transcendental factor: time or an order-0 coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransArg {
    Time,
    Coord(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransKind {
    Sin,
    Cos,
    Exp,
}

/// One transcendental factor `kind(freq * arg)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransFactor {
    pub arg: TransArg,
    pub kind: TransKind,
    pub freq: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum TrigKind {
    Sin,
    Cos,
}

impl TrigKind {
    pub(crate) fn to_kind(self) -> TransKind {
        match self {
            TrigKind::Sin => TransKind::Sin,
            TrigKind::Cos => TransKind::Cos,
        }
    }
}

/// Canonical transcendental content attached to one argument: at most one
/// exponential and at most one sine-or-cosine (positive frequency).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) struct ArgTrans {
    pub(crate) trig: Option<(TrigKind, Rational)>,
    pub(crate) exp: Option<Rational>,
}

impl ArgTrans {
    pub(crate) fn is_empty(&self) -> bool {
        self.trig.is_none() && self.exp.is_none()
    }
}

/// The coefficient-free part of a term; total ordering follows
/// (total jet degree descending, jet variables, t-power, transcendentals).
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct TermKey {
    pub(crate) degree: Rational,
    pub(crate) jets: BTreeMap<JetVar, Rational>,
    pub(crate) t_power: Rational,
    pub(crate) trans: BTreeMap<TransArg, ArgTrans>,
}

impl TermKey {
    pub(crate) fn unit() -> Self {
        TermKey {
            degree: Rational::zero(),
            jets: BTreeMap::new(),
            t_power: Rational::zero(),
            trans: BTreeMap::new(),
        }
    }

    pub(crate) fn from_jets(
        jets: BTreeMap<JetVar, Rational>,
        t_power: Rational,
        trans: BTreeMap<TransArg, ArgTrans>,
    ) -> Self {
        let degree = jets.values().fold(Rational::zero(), |acc, e| acc + e);
        TermKey {
            degree,
            jets,
            t_power,
            trans,
        }
    }
}

impl PartialOrd for TermKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TermKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .degree
            .cmp(&self.degree)
            .then_with(|| self.jets.cmp(&other.jets))
            .then_with(|| self.t_power.cmp(&other.t_power))
            .then_with(|| self.trans.cmp(&other.trans))
    }
}

/// One canonical monomial with its rational coefficient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub(crate) coeff: Rational,
    pub(crate) key: TermKey,
}

impl Term {
    pub fn coeff(&self) -> &Rational {
        &self.coeff
    }

    pub fn t_power(&self) -> &Rational {
        &self.key.t_power
    }

    pub fn jet_exponents(&self) -> impl Iterator<Item = (&JetVar, &Rational)> {
        self.key.jets.iter()
    }

    pub fn trans_factors(&self) -> Vec<TransFactor> {
        let mut out = Vec::new();
        for (arg, at) in &self.key.trans {
            if let Some((k, f)) = &at.trig {
                out.push(TransFactor {
                    arg: *arg,
                    kind: k.to_kind(),
                    freq: f.clone(),
                });
            }
            if let Some(f) = &at.exp {
                out.push(TransFactor {
                    arg: *arg,
                    kind: TransKind::Exp,
                    freq: f.clone(),
                });
            }
        }
        out
    }

    /// True when the term is a bare rational constant.
    pub fn is_constant(&self) -> bool {
        self.key.jets.is_empty() && self.key.t_power.is_zero() && self.key.trans.is_empty()
    }

    /// All jet variables the term depends on, including coordinates that
    /// appear only inside transcendental arguments.
    pub fn jet_vars(&self) -> BTreeSet<JetVar> {
        let mut vars: BTreeSet<JetVar> = self.key.jets.keys().copied().collect();
        for arg in self.key.trans.keys() {
            if let TransArg::Coord(i) = arg {
                vars.insert(JetVar::new(*i, 0));
            }
        }
        vars
    }
}

/// Canonical symbolic expression: an ordered sum of distinct monomials.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Expr {
    terms: Vec<Term>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Expr::rational(Rational::one())
    }

    pub fn rational(r: Rational) -> Self {
        if r.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: vec![Term {
                coeff: r,
                key: TermKey::unit(),
            }],
        }
    }

    pub fn int(n: i64) -> Self {
        Expr::rational(crate::rational::rat_int(n))
    }

    /// `t`
    pub fn time() -> Self {
        Expr::time_pow(Rational::one())
    }

    /// `t^p`
    pub fn time_pow(p: Rational) -> Self {
        if p.is_zero() {
            return Expr::one();
        }
        Expr {
            terms: vec![Term {
                coeff: Rational::one(),
                key: TermKey::from_jets(BTreeMap::new(), p, BTreeMap::new()),
            }],
        }
    }

    /// `x_coord^(order)`
    pub fn jet(coord: usize, order: u32) -> Self {
        Expr::jet_pow(JetVar::new(coord, order), Rational::one())
    }

    pub fn jet_pow(v: JetVar, e: Rational) -> Self {
        if e.is_zero() {
            return Expr::one();
        }
        let mut jets = BTreeMap::new();
        jets.insert(v, e);
        Expr {
            terms: vec![Term {
                coeff: Rational::one(),
                key: TermKey::from_jets(jets, Rational::zero(), BTreeMap::new()),
            }],
        }
    }

    /// A single transcendental factor; frequency signs and zeros normalize
    /// (`sin(0) = 0`, `cos(0) = exp(0) = 1`, `sin(-w u) = -sin(w u)`,
    /// `cos(-w u) = cos(w u)`).
    pub fn trans(kind: TransKind, arg: TransArg, freq: Rational) -> Self {
        if freq.is_zero() {
            return match kind {
                TransKind::Sin => Expr::zero(),
                TransKind::Cos | TransKind::Exp => Expr::one(),
            };
        }
        let mut coeff = Rational::one();
        let at = match kind {
            TransKind::Exp => ArgTrans {
                trig: None,
                exp: Some(freq),
            },
            TransKind::Sin | TransKind::Cos => {
                let trig = match normalize_trig(
                    if kind == TransKind::Sin {
                        TrigKind::Sin
                    } else {
                        TrigKind::Cos
                    },
                    freq,
                    &mut coeff,
                ) {
                    Some(t) => Some(t),
                    None => return Expr::zero(),
                };
                ArgTrans { trig, exp: None }
            }
        };
        let mut trans = BTreeMap::new();
        trans.insert(arg, at);
        Expr {
            terms: vec![Term {
                coeff,
                key: TermKey::from_jets(BTreeMap::new(), Rational::zero(), trans),
            }],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Some(r) when the expression is the constant r (including zero).
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 if self.terms[0].is_constant() => Some(self.terms[0].coeff.clone()),
            _ => None,
        }
    }

    /// Every jet variable appearing anywhere in the expression.
    pub fn jet_vars(&self) -> BTreeSet<JetVar> {
        let mut vars = BTreeSet::new();
        for t in &self.terms {
            vars.extend(t.jet_vars());
        }
        vars
    }

    /// Highest derivative order of any jet variable (0 for jet-free).
    pub fn max_order(&self) -> u32 {
        self.jet_vars().iter().map(|v| v.order).max().unwrap_or(0)
    }

    pub fn depends_on_time(&self) -> bool {
        self.terms.iter().any(|t| {
            !t.key.t_power.is_zero() || t.key.trans.contains_key(&TransArg::Time)
        })
    }

    pub fn neg(&self) -> Expr {
        Expr {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: -t.coeff.clone(),
                    key: t.key.clone(),
                })
                .collect(),
        }
    }

    pub fn scale(&self, r: &Rational) -> Expr {
        if r.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: &t.coeff * r,
                    key: t.key.clone(),
                })
                .collect(),
        }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        // Both inputs are sorted by key; merge and combine equal keys.
        let mut out: Vec<Term> = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut a = self.terms.iter().peekable();
        let mut b = other.terms.iter().peekable();
        loop {
            let pick = match (a.peek(), b.peek()) {
                (Some(ta), Some(tb)) => ta.key.cmp(&tb.key),
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, Some(_)) => std::cmp::Ordering::Greater,
                (None, None) => break,
            };
            match pick {
                std::cmp::Ordering::Less => out.push(a.next().unwrap().clone()),
                std::cmp::Ordering::Greater => out.push(b.next().unwrap().clone()),
                std::cmp::Ordering::Equal => {
                    let ta = a.next().unwrap();
                    let tb = b.next().unwrap();
                    let c = &ta.coeff + &tb.coeff;
                    if !c.is_zero() {
                        out.push(Term {
                            coeff: c,
                            key: ta.key.clone(),
                        });
                    }
                }
            }
        }
        Expr { terms: out }
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        let mut raw = Vec::new();
        for ta in &self.terms {
            for tb in &other.terms {
                mul_terms(ta, tb, &mut raw);
            }
        }
        canonical_sum(raw)
    }

    /// `self^r`. Non-negative integer exponents apply to any expression;
    /// negative or fractional exponents require a single trig-free term
    /// whose coefficient has an exact rational root.
    pub fn pow(&self, r: &Rational) -> Result<Expr> {
        if r.is_zero() {
            return Ok(Expr::one());
        }
        if self.terms.is_empty() {
            if r.is_negative() {
                return Err(Error::Domain("zero raised to a negative power".into()));
            }
            return Ok(Expr::zero());
        }
        if is_integer(r) && !r.is_negative() {
            let k = r
                .to_integer()
                .to_u32()
                .ok_or_else(|| Error::Domain("integer exponent too large".into()))?;
            let mut acc = Expr::one();
            let mut base = self.clone();
            let mut k = k;
            while k > 0 {
                if k & 1 == 1 {
                    acc = acc.mul(&base);
                }
                k >>= 1;
                if k > 0 {
                    base = base.mul(&base);
                }
            }
            return Ok(acc);
        }
        if self.terms.len() != 1 {
            return Err(Error::NonMonomialFractionalPower);
        }
        term_pow(&self.terms[0], r).map(|t| Expr { terms: vec![t] })
    }

    /// IEEE-double evaluation; every jet variable present must be bound.
    pub fn eval_numeric(&self, t: f64, jets: &BTreeMap<JetVar, f64>) -> Result<f64> {
        let mut total = 0.0;
        for term in &self.terms {
            let mut v = to_f64(&term.coeff);
            if !term.key.t_power.is_zero() {
                v *= pow_f64(t, &term.key.t_power)?;
            }
            for (jv, e) in &term.key.jets {
                let base = *jets
                    .get(jv)
                    .ok_or_else(|| Error::UnboundJetVar(format!("{jv:?}")))?;
                v *= pow_f64(base, e)?;
            }
            for (arg, at) in &term.key.trans {
                let u = match arg {
                    TransArg::Time => t,
                    TransArg::Coord(i) => *jets
                        .get(&JetVar::new(*i, 0))
                        .ok_or_else(|| Error::UnboundJetVar(format!("x{i}")))?,
                };
                if let Some((k, f)) = &at.trig {
                    let a = to_f64(f) * u;
                    v *= match k {
                        TrigKind::Sin => a.sin(),
                        TrigKind::Cos => a.cos(),
                    };
                }
                if let Some(f) = &at.exp {
                    v *= (to_f64(f) * u).exp();
                }
            }
            total += v;
        }
        Ok(total)
    }

    /// Exact rational evaluation at an [`ExactPoint`]. The point stores a
    /// base `s` and a root index `d` per variable, the variable's value
    /// being `s^d`; fractional exponents whose denominators divide `d`
    /// then evaluate exactly. Transcendental factors take the independent
    /// rational values recorded in the point.
    pub fn eval_exact(&self, point: &ExactPoint) -> Result<Rational> {
        let mut total = Rational::zero();
        for term in &self.terms {
            let mut v = term.coeff.clone();
            if !term.key.t_power.is_zero() {
                let (base, d) = point
                    .time
                    .as_ref()
                    .ok_or_else(|| Error::UnboundJetVar("t".into()))?;
                v *= pow_base(base, *d, &term.key.t_power)?;
            }
            for (jv, e) in &term.key.jets {
                let (base, d) = point
                    .jets
                    .get(jv)
                    .ok_or_else(|| Error::UnboundJetVar(format!("{jv:?}")))?;
                v *= pow_base(base, *d, e)?;
            }
            for f in term.trans_factors() {
                let val = point
                    .trans
                    .get(&f)
                    .ok_or_else(|| Error::UnboundJetVar(format!("{f:?}")))?;
                v *= val;
            }
            total += v;
        }
        Ok(total)
    }
}

/// Evaluation point for [`Expr::eval_exact`].
#[derive(Clone, Debug, Default)]
pub struct ExactPoint {
    /// (base s, root index d): the value of t is s^d.
    pub time: Option<(Rational, u32)>,
    pub jets: BTreeMap<JetVar, (Rational, u32)>,
    /// Independent value assigned to each distinct transcendental factor.
    pub trans: BTreeMap<TransFactor, Rational>,
}

fn pow_base(base: &Rational, droot: u32, e: &Rational) -> Result<Rational> {
    // value^e = (base^droot)^e = base^(droot * e); exact when the product
    // is an integer.
    let scaled = e * Rational::from_integer(droot.into());
    if !is_integer(&scaled) {
        return Err(Error::Domain(format!(
            "exponent {e} not resolvable with root index {droot}"
        )));
    }
    let k = scaled
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::Domain("exponent overflow".into()))?;
    pow_i64(base, k)
}

fn pow_f64(base: f64, e: &Rational) -> Result<f64> {
    if is_integer(e) {
        let k = e
            .to_integer()
            .to_i32()
            .ok_or_else(|| Error::Domain("exponent overflow".into()))?;
        if base == 0.0 && k < 0 {
            return Err(Error::Domain("zero base with negative exponent".into()));
        }
        return Ok(base.powi(k));
    }
    if base < 0.0 {
        return Err(Error::Domain(format!(
            "negative base {base} with fractional exponent {e}"
        )));
    }
    if base == 0.0 && e.is_negative() {
        return Err(Error::Domain("zero base with negative exponent".into()));
    }
    Ok(base.powf(to_f64(e)))
}

fn term_pow(term: &Term, r: &Rational) -> Result<Term> {
    for at in term.key.trans.values() {
        if at.trig.is_some() {
            return Err(Error::NonMonomialFractionalPower);
        }
    }
    let root_index = r
        .denom()
        .to_u32()
        .ok_or_else(|| Error::Domain("exponent denominator too large".into()))?;
    let numer = r
        .numer()
        .to_i64()
        .ok_or_else(|| Error::Domain("exponent numerator too large".into()))?;
    let rooted = nth_root(&term.coeff, root_index).ok_or_else(|| {
        Error::NonRationalCoefficientRoot(
            crate::rational::format_rational(&term.coeff),
            root_index,
        )
    })?;
    let coeff = pow_i64(&rooted, numer)?;
    let jets: BTreeMap<JetVar, Rational> = term
        .key
        .jets
        .iter()
        .map(|(v, e)| (*v, e * r))
        .collect();
    let t_power = &term.key.t_power * r;
    let mut trans = BTreeMap::new();
    for (arg, at) in &term.key.trans {
        if let Some(f) = &at.exp {
            trans.insert(
                *arg,
                ArgTrans {
                    trig: None,
                    exp: Some(f * r),
                },
            );
        }
    }
    Ok(Term {
        coeff,
        key: TermKey::from_jets(jets, t_power, trans),
    })
}

fn normalize_trig(kind: TrigKind, freq: Rational, coeff: &mut Rational) -> Option<(TrigKind, Rational)> {
    if freq.is_zero() {
        return match kind {
            TrigKind::Sin => None, // sin(0) = 0: caller drops the term
            TrigKind::Cos => unreachable!("cos(0) handled before normalization"),
        };
    }
    if freq.is_negative() {
        if kind == TrigKind::Sin {
            *coeff = -std::mem::take(coeff);
        }
        Some((kind, -freq))
    } else {
        Some((kind, freq))
    }
}

/// Multiply two canonical terms; product-to-sum rewriting of trig pairs can
/// split the product into up to 2^k raw terms (k = shared trig arguments).
fn mul_terms(a: &Term, b: &Term, out: &mut Vec<Term>) {
    let coeff = &a.coeff * &b.coeff;
    if coeff.is_zero() {
        return;
    }
    let t_power = &a.key.t_power + &b.key.t_power;
    let mut jets = a.key.jets.clone();
    for (v, e) in &b.key.jets {
        let slot = jets.entry(*v).or_insert_with(Rational::zero);
        *slot += e;
    }
    jets.retain(|_, e| !e.is_zero());

    let args: BTreeSet<TransArg> = a
        .key
        .trans
        .keys()
        .chain(b.key.trans.keys())
        .copied()
        .collect();

    let mut variants: Vec<(Rational, BTreeMap<TransArg, ArgTrans>)> =
        vec![(coeff, BTreeMap::new())];
    for arg in args {
        let pa = a.key.trans.get(&arg);
        let pb = b.key.trans.get(&arg);
        let exp = merge_exp(pa, pb);
        let trig_alts = merge_trig(pa, pb);
        let mut next = Vec::with_capacity(variants.len() * trig_alts.len());
        for (c, map) in &variants {
            for (mult, trig) in &trig_alts {
                let c2 = c * mult;
                if c2.is_zero() {
                    continue;
                }
                let at = ArgTrans {
                    trig: trig.clone(),
                    exp: exp.clone(),
                };
                let mut m2 = map.clone();
                if !at.is_empty() {
                    m2.insert(arg, at);
                }
                next.push((c2, m2));
            }
        }
        variants = next;
    }
    for (c, trans) in variants {
        out.push(Term {
            coeff: c,
            key: TermKey::from_jets(jets.clone(), t_power.clone(), trans),
        });
    }
}

fn merge_exp(a: Option<&ArgTrans>, b: Option<&ArgTrans>) -> Option<Rational> {
    let fa = a.and_then(|x| x.exp.clone());
    let fb = b.and_then(|x| x.exp.clone());
    match (fa, fb) {
        (None, None) => None,
        (Some(f), None) | (None, Some(f)) => Some(f),
        (Some(fa), Some(fb)) => {
            let s = fa + fb;
            if s.is_zero() {
                None
            } else {
                Some(s)
            }
        }
    }
}

type TrigAlt = (Rational, Option<(TrigKind, Rational)>);

fn merge_trig(a: Option<&ArgTrans>, b: Option<&ArgTrans>) -> Vec<TrigAlt> {
    let ta = a.and_then(|x| x.trig.clone());
    let tb = b.and_then(|x| x.trig.clone());
    match (ta, tb) {
        (None, None) => vec![(Rational::one(), None)],
        (Some(t), None) | (None, Some(t)) => vec![(Rational::one(), Some(t))],
        (Some((ka, fa)), Some((kb, fb))) => {
            let half = crate::rational::rat(1, 2);
            let sum = &fa + &fb;
            let diff = &fa - &fb;
            // sin A sin B = (cos(A-B) - cos(A+B))/2
            // cos A cos B = (cos(A-B) + cos(A+B))/2
            // sin A cos B = (sin(A+B) + sin(A-B))/2
            // cos A sin B = (sin(A+B) - sin(A-B))/2
            let pairs: [(Rational, TrigKind, Rational); 2] = match (ka, kb) {
                (TrigKind::Sin, TrigKind::Sin) => [
                    (half.clone(), TrigKind::Cos, diff),
                    (-half, TrigKind::Cos, sum),
                ],
                (TrigKind::Cos, TrigKind::Cos) => [
                    (half.clone(), TrigKind::Cos, diff),
                    (half, TrigKind::Cos, sum),
                ],
                (TrigKind::Sin, TrigKind::Cos) => [
                    (half.clone(), TrigKind::Sin, sum),
                    (half, TrigKind::Sin, diff),
                ],
                (TrigKind::Cos, TrigKind::Sin) => [
                    (half.clone(), TrigKind::Sin, sum),
                    (-half, TrigKind::Sin, diff),
                ],
            };
            let mut alts = Vec::with_capacity(2);
            for (mut mult, kind, freq) in pairs {
                if freq.is_zero() {
                    match kind {
                        TrigKind::Sin => continue, // sin(0) = 0
                        TrigKind::Cos => alts.push((mult, None)),
                    }
                } else {
                    let trig = normalize_trig(kind, freq, &mut mult);
                    match trig {
                        Some(t) => alts.push((mult, Some(t))),
                        None => continue,
                    }
                }
            }
            alts
        }
    }
}

/// Sort raw terms by key, combine equal keys, drop zeros.
pub(crate) fn canonical_sum(mut raw: Vec<Term>) -> Expr {
    raw.sort_by(|a, b| a.key.cmp(&b.key));
    let mut out: Vec<Term> = Vec::with_capacity(raw.len());
    for t in raw {
        if t.coeff.is_zero() {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.key == t.key => {
                last.coeff += &t.coeff;
                if last.coeff.is_zero() {
                    out.pop();
                }
            }
            _ => out.push(t),
        }
    }
    Expr { terms: out }
}

impl std::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::mul(self, rhs)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

/// Replacement map for [`substitute`]: jet variables and time map to whole
/// expressions. Unmapped jet variables pass through unchanged.
#[derive(Clone, Debug, Default)]
pub struct Substitution {
    pub time: Option<Expr>,
    pub jets: BTreeMap<JetVar, Expr>,
}

impl Substitution {
    /// Frequency scaling for transcendental arguments: the replacement of
    /// `arg` must itself be `c * t` or `c * x_j` (a single linear term).
    fn trans_target(&self, arg: TransArg) -> Result<Option<(TransArg, Rational)>> {
        let repl = match arg {
            TransArg::Time => match &self.time {
                None => return Ok(None),
                Some(e) => e,
            },
            TransArg::Coord(i) => match self.jets.get(&JetVar::new(i, 0)) {
                None => return Ok(None),
                Some(e) => e,
            },
        };
        linear_variable(repl)
            .map(Some)
            .ok_or_else(|| Error::SubstitutionDomainError(
                "transcendental argument mapped to a non-linear expression".into(),
            ))
    }
}

/// Some((arg, c)) when e = c * t or c * x_j exactly.
pub(crate) fn linear_variable(e: &Expr) -> Option<(TransArg, Rational)> {
    if e.terms.len() != 1 {
        return None;
    }
    let t = &e.terms[0];
    if !t.key.trans.is_empty() {
        return None;
    }
    if t.key.jets.is_empty() && t.key.t_power.is_one() {
        return Some((TransArg::Time, t.coeff.clone()));
    }
    if t.key.t_power.is_zero() && t.key.jets.len() == 1 {
        let (jv, e1) = t.key.jets.iter().next().unwrap();
        if jv.order == 0 && e1.is_one() {
            return Some((TransArg::Coord(jv.coord), t.coeff.clone()));
        }
    }
    None
}

/// Substitute jet variables and time by expressions. Exponents apply to the
/// replacements via [`Expr::pow`], so fractional or negative powers require
/// monomial replacements.
pub fn substitute(e: &Expr, subs: &Substitution) -> Result<Expr> {
    let mut total = Expr::zero();
    for term in &e.terms {
        let mut acc = Expr::rational(term.coeff.clone());
        if !term.key.t_power.is_zero() {
            let base = match &subs.time {
                Some(repl) => repl.clone(),
                None => Expr::time(),
            };
            acc = acc.mul(&base.pow(&term.key.t_power)?);
        }
        for (jv, exp) in &term.key.jets {
            let base = match subs.jets.get(jv) {
                Some(repl) => repl.clone(),
                None => Expr::jet(jv.coord, jv.order),
            };
            acc = acc.mul(&base.pow(exp)?);
        }
        for f in term.trans_factors() {
            let factor = match subs.trans_target(f.arg)? {
                None => Expr::trans(f.kind, f.arg, f.freq.clone()),
                Some((new_arg, c)) => Expr::trans(f.kind, new_arg, &f.freq * &c),
            };
            acc = acc.mul(&factor);
        }
        total = total.add(&acc);
    }
    Ok(total)
}

impl fmt::Display for Expr {
    /// Debug-oriented rendering with positional coordinate names `q0..`;
    /// use [`print::to_text`] when real names are known.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..16).map(|i| format!("q{i}")).collect();
        f.write_str(&print::to_text(self, &names))
    }
}

pub use print::to_text;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    fn x() -> Expr {
        Expr::jet(0, 0)
    }

    #[test]
    fn add_cancels() {
        let e = x().add(&x().neg());
        assert!(e.is_zero());
    }

    #[test]
    fn exp_frequencies_merge() {
        let a = Expr::trans(TransKind::Exp, TransArg::Time, rat_int(1));
        let b = Expr::trans(TransKind::Exp, TransArg::Time, rat_int(-1));
        assert_eq!(a.mul(&b), Expr::one());
    }

    #[test]
    fn product_to_sum() {
        // sin(t)cos(t) = sin(2t)/2
        let s = Expr::trans(TransKind::Sin, TransArg::Time, rat_int(1));
        let c = Expr::trans(TransKind::Cos, TransArg::Time, rat_int(1));
        let p = s.mul(&c);
        let expected = Expr::trans(TransKind::Sin, TransArg::Time, rat_int(2)).scale(&rat(1, 2));
        assert_eq!(p, expected);
        // numeric agreement at 10 points
        let jets = BTreeMap::new();
        for k in 0..10 {
            let t = -4.0 + 0.9 * k as f64;
            let got = p.eval_numeric(t, &jets).unwrap();
            assert!((got - t.sin() * t.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn sin_squared_reduces() {
        let s = Expr::trans(TransKind::Sin, TransArg::Time, rat_int(1));
        let p = s.mul(&s);
        // sin^2 t = 1/2 - cos(2t)/2
        let expected = Expr::rational(rat(1, 2)).add(
            &Expr::trans(TransKind::Cos, TransArg::Time, rat_int(2)).scale(&rat(-1, 2)),
        );
        assert_eq!(p, expected);
        // and sin^2 + cos^2 = 1
        let c = Expr::trans(TransKind::Cos, TransArg::Time, rat_int(1));
        assert_eq!(s.mul(&s).add(&c.mul(&c)), Expr::one());
    }

    #[test]
    fn coordinate_argument_trig() {
        let sx = Expr::trans(TransKind::Sin, TransArg::Coord(0), rat_int(1));
        let cx = Expr::trans(TransKind::Cos, TransArg::Coord(0), rat_int(1));
        assert_eq!(sx.mul(&sx).add(&cx.mul(&cx)), Expr::one());
        // arguments over different variables do not merge
        let st = Expr::trans(TransKind::Sin, TransArg::Time, rat_int(1));
        let p = sx.mul(&st);
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.terms()[0].trans_factors().len(), 2);
    }

    #[test]
    fn monomial_powers() {
        // (x'^(-3/2))^2 = x'^(-3)
        let base = Expr::jet_pow(JetVar::new(0, 1), rat(-3, 2));
        let sq = base.pow(&rat_int(2)).unwrap();
        assert_eq!(sq, Expr::jet_pow(JetVar::new(0, 1), rat(-3, 1)));
        // numeric cross-check at x' = 4: 4^(-3) = 1/64
        let mut jets = BTreeMap::new();
        jets.insert(JetVar::new(0, 1), 4.0);
        assert!((sq.eval_numeric(0.0, &jets).unwrap() - 4.0f64.powi(-3)).abs() < 1e-15);
    }

    #[test]
    fn fractional_power_requires_monomial() {
        let e = x().add(&Expr::one());
        assert_eq!(
            e.pow(&rat(1, 2)).unwrap_err(),
            Error::NonMonomialFractionalPower
        );
        // and an exact coefficient root
        let e = x().scale(&rat_int(2));
        assert!(matches!(
            e.pow(&rat(1, 2)).unwrap_err(),
            Error::NonRationalCoefficientRoot(..)
        ));
        let e = x().scale(&rat_int(4));
        let r = e.pow(&rat(1, 2)).unwrap();
        assert_eq!(r, Expr::jet_pow(JetVar::new(0, 0), rat(1, 2)).scale(&rat_int(2)));
    }

    #[test]
    fn eval_examples() {
        // (1/2)(x''^2 - x'^2) at x'=0, x''=2 -> 2.0
        let l = Expr::jet(0, 2)
            .pow(&rat_int(2))
            .unwrap()
            .sub(&Expr::jet(0, 1).pow(&rat_int(2)).unwrap())
            .scale(&rat(1, 2));
        let mut jets = BTreeMap::new();
        jets.insert(JetVar::new(0, 1), 0.0);
        jets.insert(JetVar::new(0, 2), 2.0);
        assert_eq!(l.eval_numeric(0.0, &jets).unwrap(), 2.0);

        // x^(5) at 3.5
        let mut jets = BTreeMap::new();
        jets.insert(JetVar::new(0, 5), 3.5);
        assert_eq!(Expr::jet(0, 5).eval_numeric(1.0, &jets).unwrap(), 3.5);

        // x'^4 + 3x^2x''^2 at (1,1,2) -> 13
        let l = Expr::jet(0, 1).pow(&rat_int(4)).unwrap().add(
            &Expr::jet(0, 0)
                .pow(&rat_int(2))
                .unwrap()
                .mul(&Expr::jet(0, 2).pow(&rat_int(2)).unwrap())
                .scale(&rat_int(3)),
        );
        let mut jets = BTreeMap::new();
        jets.insert(JetVar::new(0, 0), 1.0);
        jets.insert(JetVar::new(0, 1), 1.0);
        jets.insert(JetVar::new(0, 2), 2.0);
        assert_eq!(l.eval_numeric(0.0, &jets).unwrap(), 13.0);
    }

    #[test]
    fn unbound_jet_var() {
        let jets = BTreeMap::new();
        assert!(matches!(
            x().eval_numeric(0.0, &jets).unwrap_err(),
            Error::UnboundJetVar(_)
        ));
    }

    #[test]
    fn substitution_scales_frequencies() {
        // sin(2t) under t -> 3t has frequency 6
        let e = Expr::trans(TransKind::Sin, TransArg::Time, rat_int(2));
        let subs = Substitution {
            time: Some(Expr::time().scale(&rat_int(3))),
            jets: BTreeMap::new(),
        };
        let got = substitute(&e, &subs).unwrap();
        assert_eq!(got, Expr::trans(TransKind::Sin, TransArg::Time, rat_int(6)));
    }

    #[test]
    fn exact_evaluation_with_roots() {
        // x^(3/2) at x = (2/3)^2 = 4/9 evaluates to (2/3)^3 = 8/27
        let e = Expr::jet_pow(JetVar::new(0, 0), rat(3, 2));
        let mut point = ExactPoint::default();
        point.jets.insert(JetVar::new(0, 0), (rat(2, 3), 2));
        assert_eq!(e.eval_exact(&point).unwrap(), rat(8, 27));
    }
}
