//! Ratio dynamics for eventually periodic driving sequences.
//!
//! At an anchor `n` with `u_n = 0` the pair `(f(n-1), f(n-2))` determines the
//! future, so one period acts on it linearly and on `h` by a Möbius map. The map is
//! classified exactly through `κ = tr²/det`; periods made only of ones reduce
//! to the cubic `X³ - aX - b`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::polyrat::{decimal_string, rational_string};
use crate::ptm;
use crate::seqcore::{f_numeric_word, BinarySeq, MetaFibParams};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DynError {
    #[error("word is empty")]
    EmptyWord,
    #[error("L-forms need a word starting with 0")]
    LeadingOne,
    #[error("period contains no 0; use the cubic branch")]
    AllOnes,
    #[error("a = b = 0 gives an ultimately zero sequence")]
    ZeroParams,
}

fn ser_display<T: fmt::Display, S: Serializer>(x: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(x)
}

fn ser_opt_rat<S: Serializer>(x: &Option<BigRational>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(q) => s.serialize_some(&rational_string(q)),
        None => s.serialize_none(),
    }
}

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

/// `g(0) = g(1) = 1`, `g(n) = a g(n-1) + b g(n-2)`.
pub fn g_sequence(a: i64, b: i64, n_max: usize) -> Vec<BigInt> {
    let (a, b) = (big(a), big(b));
    let mut g = vec![BigInt::one(), BigInt::one()];
    for n in 2..=n_max {
        let next = &a * &g[n - 1] + &b * &g[n - 2];
        g.push(next);
    }
    g.truncate(n_max + 1);
    g
}

/// A maximal run `u_{n0} = 0`, `u_{n0+1} = 1`, `u_{n0+j} = 0` for `2 <= j <= d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZeroRunWindow {
    pub n0: usize,
    pub d: usize,
    /// `false` when `f(n0) = 0`.
    pub checked: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Prop01000Report {
    pub windows: Vec<ZeroRunWindow>,
    pub identities: usize,
    /// `(n0, j)` where the ratio identity fails.
    pub violations: Vec<(usize, usize)>,
}

/// Checks `f(n0+j+1)/f(n0+j) = g(j+1)/g(j)` on every window inside `word[..horizon]`.
pub fn check_prop_01000(word: &[u8], a: i64, b: i64, horizon: usize) -> Prop01000Report {
    let horizon = horizon.min(word.len());
    let mut report = Prop01000Report::default();
    if horizon < 4 {
        return report;
    }
    let f = f_numeric_word(MetaFibParams::new(a, b), word, horizon - 1);
    let g = g_sequence(a, b, horizon);
    for n0 in 2..horizon.saturating_sub(2) {
        if word[n0] != 0 || word[n0 + 1] != 1 || word[n0 + 2] != 0 {
            continue;
        }
        let mut d = 2;
        while n0 + d + 1 < horizon && word[n0 + d + 1] == 0 {
            d += 1;
        }
        // the ratio at j needs f(n0 + j + 1)
        let d = d.min(horizon - 1 - n0);
        let checked = !f[n0].is_zero();
        if checked {
            for j in 0..d {
                report.identities += 1;
                if &f[n0 + j + 1] * &g[j] != &f[n0 + j] * &g[j + 1] {
                    report.violations.push((n0, j));
                }
            }
        }
        report.windows.push(ZeroRunWindow { n0, d, checked });
    }
    report
}

/// Indices `4 <= n <= n_max` where `h(n) = g(m+2)/g(m+1)`, `m = n - 2^⌊log₂(n+1)⌋`, fails
/// for `u` the indicator of the powers of two.
pub fn pow2_identity_violations(a: i64, b: i64, n_max: usize) -> Vec<usize> {
    let word = BinarySeq::PowersOfTwo.prefix(n_max + 2);
    let f = f_numeric_word(MetaFibParams::new(a, b), &word, n_max + 1);
    let g = g_sequence(a, b, n_max + 2);
    (4..=n_max)
        .filter(|&n| {
            let p = 1usize << (usize::BITS - 1 - (n + 1).leading_zeros());
            // m = n - p >= -1
            let m1 = n + 1 - p;
            &f[n + 1] * &g[m1] != &f[n] * &g[m1 + 1]
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub text: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub conditions: Vec<Condition>,
    pub applicable: bool,
}

impl ConditionReport {
    fn new(items: Vec<(&str, bool)>) -> Self {
        let conditions: Vec<Condition> = items
            .into_iter()
            .map(|(text, holds)| Condition {
                text: text.to_string(),
                holds,
            })
            .collect();
        let applicable = conditions.iter().all(|c| c.holds);
        ConditionReport { conditions, applicable }
    }
}

fn excluded_b(a: i64, b: i64) -> [(&'static str, bool); 3] {
    let (a2, b) = (big(a) * big(a), big(b));
    [
        ("b != -a^2", b != -&a2),
        ("b != -a^2/2", &b * 2 != -&a2),
        ("b != -a^2/3", &b * 3 != -&a2),
    ]
}

fn is_square(n: &BigInt) -> bool {
    !n.is_negative() && {
        let r = n.sqrt();
        &r * &r == *n
    }
}

/// Conditions under which windows `0 1 0^d` force infinitely many ratios.
pub fn thm62_conditions(a: i64, b: i64) -> ConditionReport {
    let mut items = vec![("a != 0", a != 0), ("a + b != 1", big(a) + big(b) != BigInt::one())];
    items.extend(excluded_b(a, b));
    ConditionReport::new(items)
}

/// Conditions under which arbitrarily long zero runs force infinitely many ratios.
pub fn thm64_conditions(a: i64, b: i64) -> ConditionReport {
    let mut items = vec![("a != 0", a != 0)];
    items.extend(excluded_b(a, b));
    let disc = big(a) * big(a) + big(b) * 4;
    items.push(("a^2 + 4b is not the square of an integer", !is_square(&disc)));
    ConditionReport::new(items)
}

/// Multiplicative order of the root ratio of `X² - aX - b` when it is a root of unity.
pub fn root_ratio_order(a: i64, b: i64) -> Option<u32> {
    let (a2, b) = (big(a) * big(a), big(b));
    if a == 0 {
        Some(2)
    } else if &b * 2 == -&a2 {
        Some(4)
    } else if b == -&a2 {
        Some(3)
    } else if &b * 3 == -&a2 {
        Some(6)
    } else {
        None
    }
}

/// `p·x₁ + q·x₂`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LinForm {
    #[serde(serialize_with = "ser_display")]
    pub p: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub q: BigInt,
}

impl LinForm {
    pub fn new(p: impl Into<BigInt>, q: impl Into<BigInt>) -> Self {
        LinForm { p: p.into(), q: q.into() }
    }

    fn combine(a: &BigInt, x: &LinForm, b: &BigInt, y: &LinForm) -> LinForm {
        LinForm {
            p: a * &x.p + b * &y.p,
            q: a * &x.q + b * &y.q,
        }
    }

    pub fn apply(&self, v: &(BigInt, BigInt)) -> BigInt {
        &self.p * &v.0 + &self.q * &v.1
    }
}

impl fmt::Display for LinForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*x1 + {}*x2", self.p, self.q)
    }
}

/// `[L_{-2}, L_{-1}, L_0, …, L_{len-1}]` for a word starting with 0.
pub fn l_forms(word: &[u8], a: i64, b: i64) -> Result<Vec<LinForm>, DynError> {
    match word.first() {
        None => return Err(DynError::EmptyWord),
        Some(&x) if x != 0 => return Err(DynError::LeadingOne),
        _ => {}
    }
    let (a, b) = (big(a), big(b));
    let mut l = vec![LinForm::new(0, 1), LinForm::new(1, 0)];
    l.push(LinForm::combine(&a, &l[1], &b, &l[0]));
    for (k, &bit) in word.iter().enumerate().skip(1) {
        // L_k lives at index k + 2
        let i = k + 2;
        let next = if bit == 0 {
            LinForm::combine(&a, &l[i - 1], &b, &l[i - 2])
        } else {
            LinForm::combine(&a, &l[i - 2], &b, &l[i - 3])
        };
        l.push(next);
    }
    Ok(l)
}

/// The map `x ↦ (r x + s)/(t x + u)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MobiusMatrix {
    #[serde(serialize_with = "ser_display")]
    pub r: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub s: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub t: BigInt,
    #[serde(serialize_with = "ser_display")]
    pub u: BigInt,
}

impl MobiusMatrix {
    pub fn new(r: impl Into<BigInt>, s: impl Into<BigInt>, t: impl Into<BigInt>, u: impl Into<BigInt>) -> Self {
        MobiusMatrix {
            r: r.into(),
            s: s.into(),
            t: t.into(),
            u: u.into(),
        }
    }

    fn from_rows(top: &LinForm, bottom: &LinForm) -> Self {
        MobiusMatrix::new(top.p.clone(), top.q.clone(), bottom.p.clone(), bottom.q.clone())
    }

    pub fn det(&self) -> BigInt {
        &self.r * &self.u - &self.s * &self.t
    }

    pub fn trace(&self) -> BigInt {
        &self.r + &self.u
    }

    pub fn is_zero(&self) -> bool {
        self.r.is_zero() && self.s.is_zero() && self.t.is_zero() && self.u.is_zero()
    }

    pub fn is_scalar(&self) -> bool {
        self.s.is_zero() && self.t.is_zero() && self.r == self.u
    }

    /// `tr²/det`, absent for singular matrices.
    pub fn kappa(&self) -> Option<BigRational> {
        let det = self.det();
        (!det.is_zero()).then(|| BigRational::new(self.trace().pow(2), det))
    }

    /// Action on a projective vector `(x₁, x₂)` standing for `x₁/x₂`.
    pub fn apply(&self, v: &(BigInt, BigInt)) -> (BigInt, BigInt) {
        (&self.r * &v.0 + &self.s * &v.1, &self.t * &v.0 + &self.u * &v.1)
    }
}

impl fmt::Display for MobiusMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.r, self.s, self.t, self.u)
    }
}

/// Rotates a period to its first 0 and returns the one-period map.
pub fn period_mobius(period: &[u8], a: i64, b: i64) -> Result<MobiusMatrix, DynError> {
    if period.is_empty() {
        return Err(DynError::EmptyWord);
    }
    let start = period.iter().position(|&x| x == 0).ok_or(DynError::AllOnes)?;
    let word: Vec<u8> = period[start..].iter().chain(&period[..start]).copied().collect();
    let l = l_forms(&word, a, b)?;
    let n = l.len();
    Ok(MobiusMatrix::from_rows(&l[n - 1], &l[n - 2]))
}

/// `(a + b√d)/c` with `c > 0`; `b = 0` whenever `d` is a square.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Quad {
    a: BigInt,
    b: BigInt,
    d: BigInt,
    c: BigInt,
}

impl Quad {
    fn rational(n: BigInt, c: BigInt) -> Quad {
        Quad::new(n, BigInt::zero(), BigInt::zero(), c)
    }

    fn new(mut a: BigInt, mut b: BigInt, mut d: BigInt, mut c: BigInt) -> Quad {
        assert!(!c.is_zero());
        if b.is_zero() || d.is_zero() {
            b = BigInt::zero();
            d = BigInt::zero();
        } else if is_square(&d) {
            a += &b * d.sqrt();
            b = BigInt::zero();
            d = BigInt::zero();
        }
        if c.is_negative() {
            a = -a;
            b = -b;
            c = -c;
        }
        let g = a.gcd(&b).gcd(&c);
        Quad {
            a: a / &g,
            b: b / &g,
            d,
            c: c / g,
        }
    }

    /// Image under `x ↦ (α x + β)/(γ x + δ)`; `None` is ∞.
    fn mobius(&self, num: &LinForm, den: &LinForm) -> Option<Quad> {
        let x = &num.p * &self.a + &num.q * &self.c;
        let y = &num.p * &self.b;
        let z = &den.p * &self.a + &den.q * &self.c;
        let w = &den.p * &self.b;
        let norm = &z * &z - &w * &w * &self.d;
        if norm.is_zero() {
            return None;
        }
        let a = &x * &z - &y * &w * &self.d;
        let b = &y * &z - &x * &w;
        Some(Quad::new(a, b, self.d.clone(), norm))
    }

    fn to_limit(&self) -> LimitPoint {
        if self.b.is_zero() {
            let q = BigRational::new(self.a.clone(), self.c.clone());
            return LimitPoint::rational(q);
        }
        // c²x² - 2ac x + (a² - b²d)
        let mut coeffs = vec![
            &self.a * &self.a - &self.b * &self.b * &self.d,
            -(&self.a * &self.c) * 2,
            &self.c * &self.c,
        ];
        let g = coeffs.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
        for x in &mut coeffs {
            *x /= &g;
        }
        let scale = BigInt::from(10u32).pow(30);
        let s = (&self.d * &scale * &scale).sqrt();
        let den = &self.c * &scale;
        let lo_root = BigRational::new(&self.a * &scale + &self.b * &s, den.clone());
        let hi_root = BigRational::new(&self.a * &scale + &self.b * (&s + 1), den);
        let (lo, hi) = if lo_root <= hi_root { (lo_root, hi_root) } else { (hi_root, lo_root) };
        LimitPoint::Algebraic { coeffs, lo, hi }
    }
}

/// An accumulation point: ∞, or a real algebraic number given by its minimal
/// polynomial (ascending integer coefficients) and an isolating interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LimitPoint {
    Infinity,
    Algebraic {
        coeffs: Vec<BigInt>,
        lo: BigRational,
        hi: BigRational,
    },
}

impl LimitPoint {
    pub fn rational(q: BigRational) -> Self {
        LimitPoint::Algebraic {
            coeffs: vec![-q.numer().clone(), q.denom().clone()],
            lo: q.clone(),
            hi: q,
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            LimitPoint::Infinity => 0,
            LimitPoint::Algebraic { coeffs, .. } => coeffs.len() - 1,
        }
    }

    /// Exact value when rational.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            LimitPoint::Algebraic { coeffs, lo, .. } if coeffs.len() == 2 => Some(lo.clone()),
            _ => None,
        }
    }

    /// Midpoint of the isolating interval.
    pub fn midpoint(&self) -> Option<BigRational> {
        match self {
            LimitPoint::Infinity => None,
            LimitPoint::Algebraic { lo, hi, .. } => Some((lo + hi) / BigInt::from(2)),
        }
    }

    pub fn approx_f64(&self) -> f64 {
        self.midpoint().and_then(|m| m.to_f64()).unwrap_or(f64::INFINITY)
    }

    pub fn decimal(&self) -> String {
        match self.midpoint() {
            None => "inf".into(),
            Some(m) => decimal_string(&m, 15),
        }
    }

    pub fn poly_string(&self) -> String {
        match self {
            LimitPoint::Infinity => "inf".into(),
            LimitPoint::Algebraic { coeffs, .. } => poly_string(coeffs),
        }
    }
}

fn poly_string(coeffs: &[BigInt]) -> String {
    let mut out = String::new();
    for (k, c) in coeffs.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        }
        let var = match k {
            0 => String::new(),
            1 => "x".into(),
            _ => format!("x^{k}"),
        };
        if var.is_empty() {
            out.push_str(&mag.to_string());
        } else if mag.is_one() {
            out.push_str(&var);
        } else {
            out.push_str(&format!("{mag}*{var}"));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for LimitPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitPoint::Infinity => write!(f, "inf"),
            _ => write!(f, "root of {} near {}", self.poly_string(), self.decimal()),
        }
    }
}

impl Serialize for LimitPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("LimitPoint", 4)?;
        match self {
            LimitPoint::Infinity => {
                st.serialize_field("poly", "inf")?;
                st.serialize_field("lo", &Option::<String>::None)?;
                st.serialize_field("hi", &Option::<String>::None)?;
            }
            LimitPoint::Algebraic { lo, hi, .. } => {
                st.serialize_field("poly", &self.poly_string())?;
                st.serialize_field("lo", &Some(rational_string(lo)))?;
                st.serialize_field("hi", &Some(rational_string(hi)))?;
            }
        }
        st.serialize_field("approx", &self.decimal())?;
        st.end()
    }
}

/// Outcome of a classification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "tag")]
pub enum OrbitKind {
    /// The one-period map is singular: `h` repeats once it has seen a full period.
    ConstantMap,
    /// `order` is the multiplicative order of the eigenvalue ratio; `h_period` and
    /// `h_preperiod` are the guaranteed (not necessarily least) values.
    FiniteOrbit {
        order: u32,
        h_period: usize,
        h_preperiod: usize,
    },
    Accumulation { limits: Vec<LimitPoint> },
    DenseInR,
    /// `f` vanishes from `index` on (when known).
    Degenerate { index: Option<usize> },
}

impl OrbitKind {
    pub fn tag(&self) -> &'static str {
        match self {
            OrbitKind::ConstantMap => "ConstantMap",
            OrbitKind::FiniteOrbit { .. } => "FiniteOrbit",
            OrbitKind::Accumulation { .. } => "Accumulation",
            OrbitKind::DenseInR => "DenseInR",
            OrbitKind::Degenerate { .. } => "Degenerate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassifyResult {
    pub kind: OrbitKind,
    #[serde(serialize_with = "ser_opt_rat")]
    pub kappa: Option<BigRational>,
    pub notes: Vec<String>,
}

impl ClassifyResult {
    fn new(kind: OrbitKind, kappa: Option<BigRational>) -> Self {
        ClassifyResult {
            kind,
            kappa,
            notes: Vec::new(),
        }
    }

    fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }

    pub fn order(&self) -> Option<u32> {
        match self.kind {
            OrbitKind::FiniteOrbit { order, .. } => Some(order),
            _ => None,
        }
    }
}

fn finite(order: u32) -> OrbitKind {
    OrbitKind::FiniteOrbit {
        order,
        h_period: order as usize,
        h_preperiod: 0,
    }
}

fn is_fixed(m: &MobiusMatrix, v: &(BigInt, BigInt)) -> bool {
    let w = m.apply(v);
    &w.0 * &v.1 == &w.1 * &v.0
}

/// Attracting fixed point of a hyperbolic map.
fn dominant_fixed_point(m: &MobiusMatrix) -> Option<Quad> {
    let tr = m.trace();
    let disc = tr.pow(2) - m.det() * 4;
    if m.t.is_zero() {
        // eigenvalues r (towards ∞) and u (towards s/(u - r))
        return (m.u.abs() > m.r.abs()).then(|| Quad::rational(m.s.clone(), &m.u - &m.r));
    }
    let sign = if tr.is_negative() { -BigInt::one() } else { BigInt::one() };
    Some(Quad::new(&m.r - &m.u, sign, disc, &m.t * 2))
}

fn quad_limit(q: Option<Quad>) -> LimitPoint {
    q.map_or(LimitPoint::Infinity, |q| q.to_limit())
}

/// Classifies the orbit of `x0` (projective, `x0.0/x0.1`) under `m`.
pub fn classify_mobius(m: &MobiusMatrix, x0: Option<&(BigInt, BigInt)>) -> ClassifyResult {
    if m.is_zero() || x0.is_some_and(|v| v.0.is_zero() && v.1.is_zero()) {
        return ClassifyResult::new(OrbitKind::Degenerate { index: None }, None);
    }
    let Some(kappa) = m.kappa() else {
        if let Some(v) = x0 {
            let w = m.apply(v);
            if w.0.is_zero() && w.1.is_zero() {
                return ClassifyResult::new(OrbitKind::Degenerate { index: None }, None)
                    .note("the period map sends the starting vector to zero");
            }
        }
        return ClassifyResult::new(OrbitKind::ConstantMap, None).note("singular period map");
    };
    if x0.is_some_and(|v| is_fixed(m, v)) {
        return ClassifyResult::new(finite(1), Some(kappa)).note("starting point is a fixed point");
    }
    let four = BigRational::from_integer(BigInt::from(4));
    if kappa.is_integer() && !kappa.is_negative() && kappa < four {
        let order = [2, 3, 4, 6][kappa.to_integer().to_usize().unwrap()];
        return ClassifyResult::new(finite(order), Some(kappa));
    }
    if kappa == four {
        if m.is_scalar() {
            return ClassifyResult::new(finite(1), Some(kappa)).note("scalar matrix");
        }
        let fp = (!m.t.is_zero()).then(|| Quad::rational(&m.r - &m.u, &m.t * 2));
        return ClassifyResult::new(
            OrbitKind::Accumulation {
                limits: vec![quad_limit(fp)],
            },
            Some(kappa),
        )
        .note("parabolic: convergence to the fixed point is only O(1/j)");
    }
    if kappa.is_negative() || kappa > four {
        let fp = dominant_fixed_point(m);
        return ClassifyResult::new(
            OrbitKind::Accumulation {
                limits: vec![quad_limit(fp)],
            },
            Some(kappa),
        );
    }
    ClassifyResult::new(OrbitKind::DenseInR, Some(kappa)).note("eigenvalue ratio on the unit circle, not a root of unity")
}

fn cubic_eval(a: &BigInt, b: &BigInt, x: &BigRational) -> BigRational {
    x * x * x - x * BigRational::from_integer(a.clone()) - BigRational::from_integer(b.clone())
}

/// Distinct integer roots of `X³ - aX - b`.
fn cubic_integer_roots(a: &BigInt, b: &BigInt) -> Vec<BigInt> {
    let is_root = |r: &BigInt| r * r * r - a * r - b == BigInt::zero();
    let mut roots = BTreeSet::new();
    if b.is_zero() {
        roots.insert(BigInt::zero());
        if is_square(a) {
            roots.insert(a.sqrt());
            roots.insert(-a.sqrt());
        }
    } else {
        let n = b.abs();
        let mut d = BigInt::one();
        while &d * &d <= n {
            if (&n % &d).is_zero() {
                for c in [d.clone(), &n / &d] {
                    for r in [c.clone(), -c] {
                        if is_root(&r) {
                            roots.insert(r);
                        }
                    }
                }
            }
            d += 1;
        }
    }
    roots.into_iter().collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Which {
    Largest,
    Smallest,
}

/// Largest or smallest real root of `X³ - aX - b` as an exact limit point.
fn cubic_root_limit(a: &BigInt, b: &BigInt, which: Which) -> LimitPoint {
    let mut roots: Vec<LimitPoint> = Vec::new();
    let ints = cubic_integer_roots(a, b);
    if let Some(r) = ints.first() {
        for r in &ints {
            roots.push(LimitPoint::rational(BigRational::from_integer(r.clone())));
        }
        // X² + rX + (r² - a), roots (-r ± √(4a - 3r²))/2
        let disc: BigInt = a * 4 - r * r * 3;
        if !disc.is_negative() && !is_square(&disc) {
            for sgn in [1, -1] {
                roots.push(Quad::new(-r.clone(), BigInt::from(sgn), disc.clone(), BigInt::from(2)).to_limit());
            }
        }
    } else {
        for (lo, hi) in cubic_isolating_intervals(a, b) {
            roots.push(bisect_cubic(a, b, lo, hi));
        }
    }
    let key = |p: &LimitPoint| p.approx_f64();
    let pick = match which {
        Which::Largest => roots.iter().max_by(|x, y| key(x).total_cmp(&key(y))),
        Which::Smallest => roots.iter().min_by(|x, y| key(x).total_cmp(&key(y))),
    };
    pick.cloned().expect("a cubic has a real root")
}

fn cubic_isolating_intervals(a: &BigInt, b: &BigInt) -> Vec<(BigRational, BigRational)> {
    let bound = BigRational::from_integer(BigInt::one() + a.abs().max(b.abs()));
    let disc: BigInt = a.pow(3) * 4 - b * b * 27;
    if !disc.is_positive() {
        return vec![(-bound.clone(), bound)];
    }
    // critical points ±√(a/3), approximated from inside
    let scale = BigInt::from(10u32).pow(20);
    let c_num: BigInt = a * &scale * &scale / 3;
    let c = BigRational::new(c_num.sqrt(), scale);
    vec![(-bound.clone(), -c.clone()), (-c.clone(), c.clone()), (c, bound)]
}

fn bisect_cubic(a: &BigInt, b: &BigInt, mut lo: BigRational, mut hi: BigRational) -> LimitPoint {
    let two = BigRational::from_integer(BigInt::from(2));
    let lo_sign = cubic_eval(a, b, &lo).signum();
    for _ in 0..110 {
        let mid = (&lo + &hi) / &two;
        let v = cubic_eval(a, b, &mid);
        if v.is_zero() {
            return LimitPoint::rational(mid);
        }
        if v.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    LimitPoint::Algebraic {
        coeffs: vec![-b.clone(), -a.clone(), BigInt::zero(), BigInt::one()],
        lo,
        hi,
    }
}

/// Classification for `u_n = 1` eventually, from `(f(t), f(t+1), f(t+2))` where
/// `f(n+3) = a f(n+1) + b f(n)` holds for `n >= t`.
pub fn classify_all_ones_window(a: i64, b: i64, window: [BigInt; 3], t: usize) -> Result<ClassifyResult, DynError> {
    if a == 0 && b == 0 {
        return Err(DynError::ZeroParams);
    }
    let (ab, bb) = (big(a), big(b));
    let mut y = window.to_vec();
    for n in 0..3 {
        let next = &ab * &y[n + 1] + &bb * &y[n];
        y.push(next);
    }
    if y.iter().all(Zero::is_zero) {
        return Ok(ClassifyResult::new(OrbitKind::Degenerate { index: Some(t) }, None));
    }
    let roots = cubic_integer_roots(&ab, &bb);
    for r in &roots {
        if (0..3).all(|n| y[n + 1] == r * &y[n]) {
            if r.is_zero() {
                return Ok(ClassifyResult::new(OrbitKind::Degenerate { index: Some(t + 1) }, None));
            }
            let kind = OrbitKind::FiniteOrbit {
                order: 1,
                h_period: 1,
                h_preperiod: t,
            };
            return Ok(ClassifyResult::new(kind, None).note(format!("geometric tail with ratio {r}")));
        }
    }
    for r in &roots {
        // X² + rX + (r² - a): y(n+2) = -r y(n+1) + (a - r²) y(n)
        let p = r * r - &ab;
        if (0..3).all(|n| &y[n + 2] + r * &y[n + 1] + &p * &y[n] == BigInt::zero()) {
            let m = MobiusMatrix::new(-r.clone(), -p, 1, 0);
            let mut res = classify_mobius(&m, Some(&(y[1].clone(), y[0].clone())));
            if let OrbitKind::FiniteOrbit { h_preperiod, .. } = &mut res.kind {
                *h_preperiod = t;
            }
            return Ok(res.note(format!("tail annihilated by the quadratic factor with root {r} removed")));
        }
    }
    let disc: BigInt = ab.pow(3) * 4 - &bb * &bb * 27;
    let fin = |order: u32, pre: usize| OrbitKind::FiniteOrbit {
        order,
        h_period: order as usize,
        h_preperiod: pre,
    };
    let acc = |p: LimitPoint| OrbitKind::Accumulation { limits: vec![p] };
    let res = if b == 0 {
        ClassifyResult::new(fin(2, t + 1), None).note("roots 0 and a pair of opposite roots")
    } else if a == 0 {
        ClassifyResult::new(fin(3, t), None).note("roots are the cube roots of b")
    } else if disc.is_zero() {
        let q = BigRational::new(&bb * 3, ab.clone());
        ClassifyResult::new(acc(LimitPoint::rational(q)), None).note("double root; the simple root dominates")
    } else if disc.is_positive() {
        let which = if b > 0 { Which::Largest } else { Which::Smallest };
        ClassifyResult::new(acc(cubic_root_limit(&ab, &bb, which)), None).note("three real roots")
    } else if a > 0 {
        ClassifyResult::new(acc(cubic_root_limit(&ab, &bb, Which::Largest)), None)
            .note("real root dominates the complex pair")
    } else {
        ClassifyResult::new(OrbitKind::DenseInR, None).note("complex pair dominates; its ratio is not a root of unity")
    };
    Ok(res)
}

/// `u_n = 1` for all `n`.
pub fn classify_all_ones(a: i64, b: i64) -> Result<ClassifyResult, DynError> {
    classify_all_ones_window(a, b, [BigInt::one(), BigInt::one(), big(a) + big(b)], 0)
}

/// Full report for an eventually periodic driving sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodicClassification {
    pub result: ClassifyResult,
    pub m: usize,
    pub l: usize,
    pub t: usize,
    /// First anchor `n >= max(m, 2)` with `u_n = 0`.
    pub n0: Option<usize>,
    pub matrix: Option<MobiusMatrix>,
    /// Least period and preperiod of `h` seen on the computed prefix.
    pub observed_period: Option<usize>,
    pub observed_preperiod: Option<usize>,
}

fn observe_period(h: &[Option<BigRational>]) -> Option<(usize, usize)> {
    let n = h.len();
    let tail = n / 2;
    let p = (1..=(n - tail) / 2).find(|&p| (tail..n - p).all(|i| h[i] == h[i + p]))?;
    let mut pre = tail;
    while pre > 0 && h[pre - 1] == h[pre - 1 + p] {
        pre -= 1;
    }
    Some((p, pre))
}

/// Exact `h(0..n_max)` for `pre · per^ω`.
pub fn periodic_ratios(pre: &[u8], per: &[u8], a: i64, b: i64, n_max: usize) -> Vec<Option<BigRational>> {
    let word = periodic_word(pre, per, n_max + 2);
    let f = f_numeric_word(MetaFibParams::new(a, b), &word, n_max + 1);
    f.windows(2)
        .map(|w| (!w[0].is_zero()).then(|| BigRational::new(w[1].clone(), w[0].clone())))
        .collect()
}

fn periodic_word(pre: &[u8], per: &[u8], len: usize) -> Vec<u8> {
    (0..len)
        .map(|n| if n < pre.len() { pre[n] } else { per[(n - pre.len()) % per.len()] })
        .collect()
}

/// Classifies `V(f)` for `u = pre · per^ω`.
pub fn classify_periodic_u(pre: &[u8], per: &[u8], a: i64, b: i64) -> Result<PeriodicClassification, DynError> {
    if per.is_empty() {
        return Err(DynError::EmptyWord);
    }
    if a == 0 && b == 0 {
        return Err(DynError::ZeroParams);
    }
    let (m, l) = (pre.len(), per.len());
    let horizon = m.max(2) + 3 + 48 * l + 24;
    let word = periodic_word(pre, per, horizon + 2);
    let f = f_numeric_word(MetaFibParams::new(a, b), &word, horizon + 1);
    let h: Vec<Option<BigRational>> = f
        .windows(2)
        .map(|w| (!w[0].is_zero()).then(|| BigRational::new(w[1].clone(), w[0].clone())))
        .collect();
    let zero_tail = {
        let mut i = f.len();
        while i > 0 && f[i - 1].is_zero() {
            i -= 1;
        }
        (f.len() - i >= 3).then_some(i)
    };
    let (t, n0, matrix, mut result) = if !per.contains(&0) {
        let t = m.saturating_sub(3);
        let window = [f[t].clone(), f[t + 1].clone(), f[t + 2].clone()];
        (t, None, None, classify_all_ones_window(a, b, window, t)?)
    } else {
        let n0 = (m.max(2)..).find(|&n| word[n] == 0).expect("period contains 0");
        let rotated = &word[n0..n0 + l];
        let forms = l_forms(rotated, a, b)?;
        let mat = MobiusMatrix::from_rows(&forms[l + 1], &forms[l]);
        let v0 = (f[n0 - 1].clone(), f[n0 - 2].clone());
        let mut res = classify_mobius(&mat, Some(&v0));
        match &mut res.kind {
            OrbitKind::FiniteOrbit {
                order,
                h_period,
                h_preperiod,
            } => {
                *h_period = *order as usize * l;
                *h_preperiod = n0 - 2;
            }
            OrbitKind::Accumulation { limits } => {
                *limits = residue_limits(&forms, &limits[0]);
            }
            _ => {}
        }
        (n0 - 2, Some(n0), Some(mat), res)
    };
    if let OrbitKind::Degenerate { index } = &mut result.kind {
        *index = zero_tail;
    } else if zero_tail.is_some() {
        result = ClassifyResult::new(OrbitKind::Degenerate { index: zero_tail }, result.kappa)
            .note("f vanishes identically on the tail");
    }
    let observed = match result.kind {
        OrbitKind::FiniteOrbit { .. } | OrbitKind::ConstantMap => observe_period(&h),
        _ => None,
    };
    Ok(PeriodicClassification {
        result,
        m,
        l,
        t,
        n0,
        matrix,
        observed_period: observed.map(|x| x.0),
        observed_preperiod: observed.map(|x| x.1),
    })
}

/// Images of the period limit under the per-residue maps `L_i / L_{i-1}`, `-1 <= i <= l-2`.
fn residue_limits(forms: &[LinForm], z: &LimitPoint) -> Vec<LimitPoint> {
    let l = forms.len() - 2;
    let quad = limit_to_quad(z);
    let mut out: Vec<LimitPoint> = Vec::new();
    for i in 1..=l {
        let (num, den) = (&forms[i], &forms[i - 1]);
        let img = match &quad {
            Some(q) => q.mobius(num, den),
            None if den.p.is_zero() => None,
            None => Some(Quad::rational(num.p.clone(), den.p.clone())),
        };
        let p = quad_limit(img);
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

fn limit_to_quad(z: &LimitPoint) -> Option<Quad> {
    match z {
        LimitPoint::Infinity => None,
        LimitPoint::Algebraic { coeffs, lo, .. } => {
            if coeffs.len() == 2 {
                return Some(Quad::rational(lo.numer().clone(), lo.denom().clone()));
            }
            // c2 x² + c1 x + c0 with the root inside [lo, hi]
            let (c0, c1, c2) = (&coeffs[0], &coeffs[1], &coeffs[2]);
            let disc: BigInt = c1 * c1 - c0 * c2 * 4;
            let plus = Quad::new(-c1.clone(), BigInt::one(), disc.clone(), c2 * 2);
            let minus = Quad::new(-c1.clone(), -BigInt::one(), disc, c2 * 2);
            let mid = z.approx_f64();
            let d = |q: &Quad| (q.to_limit().approx_f64() - mid).abs();
            Some(if d(&plus) <= d(&minus) { plus } else { minus })
        }
    }
}

/// Exact orbit statistics of `x0` under a Möbius map.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitStats {
    pub steps: usize,
    pub distinct: usize,
    pub pole_hits: usize,
    /// Smallest gap between distinct finite orbit values.
    pub min_gap: Option<f64>,
    /// `|x_N - x_{N-1}|` for the last two finite values.
    pub last_step: Option<f64>,
}

fn normalize(v: (BigInt, BigInt)) -> (BigInt, BigInt) {
    let g = v.0.gcd(&v.1);
    if g.is_zero() {
        return v;
    }
    let (mut x, mut y) = (v.0 / &g, v.1 / &g);
    if y.is_negative() || (y.is_zero() && x.is_negative()) {
        x = -x;
        y = -y;
    }
    (x, y)
}

/// Exact orbit `x0, M x0, …` (`steps + 1` points).
pub fn exact_orbit(m: &MobiusMatrix, x0: &(BigInt, BigInt), steps: usize) -> Vec<(BigInt, BigInt)> {
    let mut v = normalize(x0.clone());
    let mut out = vec![v.clone()];
    for _ in 0..steps {
        v = normalize(m.apply(&v));
        out.push(v.clone());
    }
    out
}

pub fn empirical_orbit(m: &MobiusMatrix, x0: &(BigInt, BigInt), steps: usize) -> OrbitStats {
    let orbit = exact_orbit(m, x0, steps);
    let distinct: BTreeSet<&(BigInt, BigInt)> = orbit.iter().collect();
    let values: Vec<BigRational> = orbit
        .iter()
        .filter(|v| !v.1.is_zero())
        .map(|v| BigRational::new(v.0.clone(), v.1.clone()))
        .collect();
    let mut sorted: Vec<&BigRational> = values.iter().collect::<BTreeSet<_>>().into_iter().collect();
    sorted.dedup();
    let min_gap = sorted
        .windows(2)
        .map(|w| (w[1] - w[0]).to_f64().unwrap_or(f64::INFINITY))
        .min_by(f64::total_cmp);
    let last_step = (values.len() >= 2).then(|| {
        let n = values.len();
        (&values[n - 1] - &values[n - 2]).abs().to_f64().unwrap_or(f64::INFINITY)
    });
    OrbitStats {
        steps,
        distinct: distinct.len(),
        pole_hits: orbit.iter().filter(|v| v.1.is_zero()).count(),
        min_gap,
        last_step,
    }
}

/// Distinct orbit values (rounded to 1e-12) in each `[k, k+1)` for `k` in `lo..hi`,
/// computed in floating point with renormalized vectors.
pub fn orbit_interval_counts(m: &MobiusMatrix, x0: &(BigInt, BigInt), steps: usize, lo: i32, hi: i32) -> Vec<usize> {
    let to_f = |x: &BigInt| x.to_f64().unwrap_or(0.0);
    let (r, s, t, u) = (to_f(&m.r), to_f(&m.s), to_f(&m.t), to_f(&m.u));
    let (mut x, mut y) = (to_f(&x0.0), to_f(&x0.1));
    let norm = x.hypot(y);
    (x, y) = (x / norm, y / norm);
    let mut seen: Vec<BTreeSet<i64>> = vec![BTreeSet::new(); (hi - lo) as usize];
    for _ in 0..steps {
        if y != 0.0 {
            let z = x / y;
            let k = z.floor();
            if k >= lo as f64 && k < hi as f64 {
                seen[(k as i32 - lo) as usize].insert((z * 1e12).round() as i64);
            }
        }
        let (nx, ny) = (r * x + s * y, t * x + u * y);
        let norm = nx.hypot(ny);
        (x, y) = (nx / norm, ny / norm);
    }
    seen.iter().map(BTreeSet::len).collect()
}

/// `f(n+6) = -b² f(n)` violations for `u = (011)^ω` and `n` in `range`.
pub fn remark66_violations(a: i64, b: i64, range: std::ops::Range<usize>) -> Vec<usize> {
    let word = periodic_word(&[], &[0, 1, 1], range.end + 8);
    let f = f_numeric_word(MetaFibParams::new(a, b), &word, range.end + 6);
    let q = -(big(b) * big(b));
    range.filter(|&n| f[n + 6] != &q * &f[n]).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DZeroReport {
    pub i: i32,
    pub a: i64,
    pub b: i64,
    pub zero: bool,
    pub note: Option<String>,
}

/// Whether `d_i(a, b) = 0`, with the known consequence for the Thue–Morse driver.
pub fn d_zero_check(i: i32, a: i64, b: i64) -> DZeroReport {
    let zero = ptm::d(i).eval_int(&big(a), &big(b)).is_zero();
    let note = match (i, a, b) {
        _ if !zero => None,
        (_, 0, 0) => Some("a = b = 0: f(n) = 0 for n >= 2".to_string()),
        (1, _, _) => Some("b = -a: f has infinitely many values and infinitely many zeros".to_string()),
        (2, -2, 4) => Some("f(n) = 0 for n >= 3".to_string()),
        (4, 1, -1) => Some("f is 2-automatic; f(n) = 0 and f(n) != 0 both occur infinitely often".to_string()),
        (5, 2, -2) => Some("f(n) = 0 for n >= 10".to_string()),
        _ => Some(format!("h_{} is undefined", i + 1)),
    };
    DZeroReport { i, a, b, zero, note }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(big(n), big(d))
    }

    #[test]
    fn g_small_cases() {
        let v: Vec<i64> = g_sequence(1, 1, 5).iter().map(|x| x.to_i64().unwrap()).collect();
        assert_eq!(v, [1, 1, 2, 3, 5, 8]);
        let v: Vec<i64> = g_sequence(0, 2, 5).iter().map(|x| x.to_i64().unwrap()).collect();
        assert_eq!(v, [1, 1, 2, 2, 4, 4]);
        assert!(g_sequence(1, 0, 10).iter().all(One::is_one));
    }

    #[test]
    fn condition_reports() {
        assert!(thm62_conditions(1, 1).applicable);
        assert!(thm64_conditions(1, 1).applicable);
        assert!(!thm62_conditions(0, 5).applicable);
        let r = thm62_conditions(2, -2);
        assert!(!r.applicable);
        assert!(!r.conditions.iter().find(|c| c.text == "b != -a^2/2").unwrap().holds);
        assert!(!thm64_conditions(1, 2).applicable);
        assert!(thm62_conditions(1, 2).applicable);
    }

    #[test]
    fn root_orders() {
        assert_eq!(root_ratio_order(0, 7), Some(2));
        assert_eq!(root_ratio_order(2, -2), Some(4));
        assert_eq!(root_ratio_order(3, -9), Some(3));
        assert_eq!(root_ratio_order(6, -12), Some(6));
        assert_eq!(root_ratio_order(1, 1), None);
    }

    #[test]
    fn l_form_seeds_and_steps() {
        let l = l_forms(&[0], 1, 1).unwrap();
        assert_eq!(l[2], LinForm::new(1, 1));
        let l = l_forms(&[0, 0], 2, 3).unwrap();
        assert_eq!(l[3], LinForm::new(2 * 2 + 3, 2 * 3));
        let l = l_forms(&[0, 1], 2, 3).unwrap();
        assert_eq!(l[3], l[2]);
        assert_eq!(l_forms(&[1], 1, 1), Err(DynError::LeadingOne));
    }

    #[test]
    fn period_maps() {
        assert_eq!(period_mobius(&[0], 1, 1).unwrap(), MobiusMatrix::new(1, 1, 1, 0));
        assert_eq!(period_mobius(&[0], 0, 2).unwrap(), MobiusMatrix::new(0, 2, 1, 0));
        assert_eq!(period_mobius(&[1, 0], 1, 1).unwrap(), period_mobius(&[0, 1], 1, 1).unwrap());
        assert_eq!(period_mobius(&[1, 1], 1, 1), Err(DynError::AllOnes));
        let m = period_mobius(&[0, 1, 1], 4, -8).unwrap();
        assert_eq!(m, MobiusMatrix::new(8, -32, 4, -8));
        assert_eq!(m.kappa(), Some(BigRational::zero()));
    }

    #[test]
    fn golden_ratio_limit() {
        let res = classify_mobius(&MobiusMatrix::new(1, 1, 1, 0), None);
        assert_eq!(res.kappa, Some(rat(-1, 1)));
        let OrbitKind::Accumulation { limits } = &res.kind else { panic!("{res:?}") };
        assert_eq!(limits[0].poly_string(), "x^2 - x - 1");
        assert_eq!(limits[0].decimal(), "1.61803398874989");
    }

    #[test]
    fn mobius_table() {
        assert_eq!(classify_mobius(&MobiusMatrix::new(0, 2, 1, 0), None).order(), Some(2));
        let dense = classify_mobius(&MobiusMatrix::new(1, -3, 1, 0), None);
        assert_eq!(dense.kind, OrbitKind::DenseInR);
        assert_eq!(dense.kappa, Some(rat(1, 3)));
        assert_eq!(classify_mobius(&MobiusMatrix::new(2, 0, 0, 2), None).order(), Some(1));
        assert_eq!(classify_mobius(&MobiusMatrix::new(1, 2, 2, 4), None).kind, OrbitKind::ConstantMap);
        // 2 is a fixed point of x -> (x + 2)/x
        let m = MobiusMatrix::new(1, 2, 1, 0);
        assert_eq!(classify_mobius(&m, Some(&(big(2), big(1)))).order(), Some(1));
        let OrbitKind::Accumulation { limits } = classify_mobius(&m, Some(&(big(1), big(1)))).kind else {
            panic!()
        };
        assert_eq!(limits[0].as_rational(), Some(rat(2, 1)));
    }

    #[test]
    fn parabolic_fixed_point() {
        // x -> (2x - 1)/x has the double fixed point 1
        let m = MobiusMatrix::new(2, -1, 1, 0);
        assert_eq!(m.kappa(), Some(rat(4, 1)));
        let OrbitKind::Accumulation { limits } = classify_mobius(&m, None).kind else { panic!() };
        assert_eq!(limits[0].as_rational(), Some(rat(1, 1)));
    }

    #[test]
    fn all_ones_cases() {
        let r = classify_all_ones(1, 1).unwrap();
        let OrbitKind::Accumulation { limits } = &r.kind else { panic!("{r:?}") };
        assert_eq!(limits[0].poly_string(), "x^3 - x - 1");
        assert_eq!(limits[0].decimal(), "1.32471795724475");
        assert_eq!(classify_all_ones(0, 2).unwrap().order(), Some(3));
        assert_eq!(classify_all_ones(3, 0).unwrap().order(), Some(2));
        assert_eq!(classify_all_ones(-3, 5).unwrap().kind, OrbitKind::DenseInR);
        assert_eq!(classify_all_ones(0, 0), Err(DynError::ZeroParams));
        // quadratic factor X² + 2X + 2 alone: eigenvalue ratio of order 4
        let w = [big(1), big(1), big(-4)];
        let r = classify_all_ones_window(2, 4, w, 0).unwrap();
        assert_eq!(r.order(), Some(4));
        // three real roots of X³ - 7X - 6 = (X+1)(X+2)(X-3)
        let OrbitKind::Accumulation { limits } = classify_all_ones(7, 6).unwrap().kind else { panic!() };
        assert_eq!(limits[0].as_rational(), Some(rat(3, 1)));
        // X³ - 3X + 2 = (X - 1)²(X + 2) and the start 1, 1, 1 is geometric
        assert_eq!(classify_all_ones(3, -2).unwrap().order(), Some(1));
        // X³ - 3X - 2 = (X + 1)²(X - 2): the simple root dominates
        let OrbitKind::Accumulation { limits } = classify_all_ones(3, 2).unwrap().kind else { panic!() };
        assert_eq!(limits[0].as_rational(), Some(rat(2, 1)));
    }

    #[test]
    fn periodic_classifications() {
        let c = classify_periodic_u(&[], &[0], 1, 1).unwrap();
        assert_eq!(c.result.kind.tag(), "Accumulation");
        let c = classify_periodic_u(&[], &[0, 1, 1], 4, -8).unwrap();
        assert_eq!(c.result.order(), Some(2));
        assert_eq!(c.observed_period, Some(6));
        let c = classify_periodic_u(&[], &[0, 1, 1, 1, 1], 0, 1).unwrap();
        assert_eq!(c.result.kind, OrbitKind::ConstantMap);
        // f is constant here, so h is already periodic with period 1
        assert_eq!(c.observed_period, Some(1));
        let c = classify_periodic_u(&[], &[0, 0, 1], 0, 2).unwrap();
        assert!(c.observed_period.unwrap() <= 6);
    }

    #[test]
    fn accumulation_has_one_limit_per_residue() {
        let c = classify_periodic_u(&[], &[0, 0, 1, 1], 1, 1).unwrap();
        let OrbitKind::Accumulation { limits } = &c.result.kind else { panic!("{c:?}") };
        assert_eq!(limits.len(), 2);
        let h = periodic_ratios(&[], &[0, 0, 1, 1], 1, 1, 400);
        for lim in limits {
            let x = lim.approx_f64();
            assert!(h[300..].iter().any(|v| (v.as_ref().unwrap().to_f64().unwrap() - x).abs() < 1e-9));
        }
    }

    #[test]
    fn degenerate_tail() {
        // period "0" gives 1, 1, 0, -1, -1, 0, ...; period "01" vanishes from n = 2
        let c = classify_periodic_u(&[], &[0], 1, -1).unwrap();
        assert_ne!(c.result.kind.tag(), "Degenerate");
        let c = classify_periodic_u(&[], &[0, 1], 1, -1).unwrap();
        assert_eq!(c.result.kind.tag(), "Degenerate");
    }

    #[test]
    fn remark_66_geometric_interleave() {
        assert!(remark66_violations(4, -8, 6..60).is_empty());
        assert!(!remark66_violations(4, -7, 6..60).is_empty());
    }

    #[test]
    fn pow2_identity() {
        assert!(pow2_identity_violations(1, 1, 512).is_empty());
    }

    #[test]
    fn prop_windows() {
        let word = periodic_word(&[], &[0, 1, 0, 0, 0, 0, 0], 400);
        let r = check_prop_01000(&word, 2, 3, 400);
        assert!(r.violations.is_empty());
        assert!(r.windows.iter().all(|w| w.d == 7 || w.n0 + 8 > 400));
        assert!(r.identities > 200);
    }

    #[test]
    fn d_zero_catalogue() {
        assert!(d_zero_check(2, -2, 4).zero);
        assert!(d_zero_check(5, 2, -2).zero);
        assert!(d_zero_check(4, 1, -1).zero);
        assert!((1..=6).all(|i| !d_zero_check(i, 1, 1).zero));
    }

    #[test]
    fn orbit_statistics() {
        let m = MobiusMatrix::new(0, 2, 1, 0);
        let s = empirical_orbit(&m, &(big(1), big(1)), 50);
        assert_eq!(s.distinct, 2);
        let s = empirical_orbit(&MobiusMatrix::new(1, 1, 1, 0), &(big(1), big(1)), 200);
        assert!(s.last_step.unwrap() < 1e-6);
        let counts = orbit_interval_counts(&MobiusMatrix::new(1, -3, 1, 0), &(big(1), big(1)), 20000, -2, 2);
        assert!(counts.iter().all(|&c| c >= 25), "{counts:?}");
    }
}
