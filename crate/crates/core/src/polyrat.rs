//! Exact arithmetic over ℤ[a,b] and its fraction field.
//!
//! Polynomials are sparse maps from monomials to nonzero big integers, kept in
//! degree-lexicographic order with `a > b`. Rational functions are compared by
//! cross-multiplication; no multivariate gcd is ever computed.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Monomial `a^i b^j`, ordered by total degree, then by the exponent of `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Mono {
    pub i: u32,
    pub j: u32,
}

impl Mono {
    pub const ONE: Mono = Mono { i: 0, j: 0 };

    pub fn new(i: u32, j: u32) -> Self {
        Mono { i, j }
    }

    pub fn degree(self) -> u32 {
        self.i + self.j
    }

    fn divides(self, other: Mono) -> bool {
        self.i <= other.i && self.j <= other.j
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.degree(), self.i).cmp(&(other.degree(), other.i))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("cannot parse polynomial `{input}`: {reason}")]
pub struct ParseError {
    pub input: String,
    pub reason: String,
}

fn parse_err(input: &str, reason: impl Into<String>) -> ParseError {
    ParseError {
        input: input.to_string(),
        reason: reason.into(),
    }
}

/// Sparse polynomial in `a`, `b` with integer coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct PolyZab {
    terms: BTreeMap<Mono, BigInt>,
}

impl PolyZab {
    pub fn zero() -> Self {
        PolyZab::default()
    }

    pub fn one() -> Self {
        PolyZab::constant(BigInt::one())
    }

    pub fn a() -> Self {
        PolyZab::monomial(BigInt::one(), Mono::new(1, 0))
    }

    pub fn b() -> Self {
        PolyZab::monomial(BigInt::one(), Mono::new(0, 1))
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        PolyZab::monomial(c.into(), Mono::ONE)
    }

    pub fn monomial(c: BigInt, m: Mono) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        PolyZab { terms }
    }

    /// Builds a polynomial from `(i, j, coefficient)` triples, summing repeats.
    pub fn from_terms<I, C>(terms: I) -> Self
    where
        I: IntoIterator<Item = (u32, u32, C)>,
        C: Into<BigInt>,
    {
        let mut p = PolyZab::zero();
        for (i, j, c) in terms {
            p.add_term(Mono::new(i, j), c.into());
        }
        p
    }

    fn add_term(&mut self, m: Mono, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&Mono::ONE).is_some_and(|c| c.is_one())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &BigInt)> {
        self.terms.iter()
    }

    pub fn leading(&self) -> Option<(Mono, &BigInt)> {
        self.terms.iter().next_back().map(|(m, c)| (*m, c))
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.leading().map(|(m, _)| m.degree())
    }

    /// Gcd of the coefficients (zero for the zero polynomial).
    pub fn content(&self) -> BigInt {
        self.terms
            .values()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn scale(&self, c: &BigInt) -> PolyZab {
        if c.is_zero() {
            return PolyZab::zero();
        }
        PolyZab {
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    /// Divides every coefficient by `c`, which must divide all of them.
    fn div_scalar(&self, c: &BigInt) -> PolyZab {
        PolyZab {
            terms: self.terms.iter().map(|(m, v)| (*m, v / c)).collect(),
        }
    }

    pub fn mul_a(&self) -> PolyZab {
        PolyZab {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (Mono::new(m.i + 1, m.j), v.clone()))
                .collect(),
        }
    }

    pub fn mul_b(&self) -> PolyZab {
        PolyZab {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (Mono::new(m.i, m.j + 1), v.clone()))
                .collect(),
        }
    }

    /// Exact quotient `self / q`, or `None` when `q` does not divide `self` in ℤ[a,b].
    pub fn div_exact(&self, q: &PolyZab) -> Option<PolyZab> {
        let (lm, lc) = q.leading()?;
        let lc = lc.clone();
        let mut rem = self.clone();
        let mut quot = PolyZab::zero();
        while let Some((rm, rc)) = rem.leading() {
            if !lm.divides(rm) {
                return None;
            }
            let (c, r) = rc.div_rem(&lc);
            if !r.is_zero() {
                return None;
            }
            let m = Mono::new(rm.i - lm.i, rm.j - lm.j);
            for (qm, qc) in &q.terms {
                rem.add_term(Mono::new(qm.i + m.i, qm.j + m.j), -(qc * &c));
            }
            quot.add_term(m, c);
        }
        Some(quot)
    }

    pub fn eval(&self, a: &BigRational, b: &BigRational) -> BigRational {
        let mut a_pows: Vec<BigRational> = vec![BigRational::one()];
        let mut b_pows: Vec<BigRational> = vec![BigRational::one()];
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            while a_pows.len() <= m.i as usize {
                let next = a_pows.last().unwrap() * a;
                a_pows.push(next);
            }
            while b_pows.len() <= m.j as usize {
                let next = b_pows.last().unwrap() * b;
                b_pows.push(next);
            }
            acc += BigRational::from_integer(c.clone()) * &a_pows[m.i as usize] * &b_pows[m.j as usize];
        }
        acc
    }

    pub fn eval_int(&self, a: &BigInt, b: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for (m, c) in &self.terms {
            acc += c * num_traits::pow(a.clone(), m.i as usize) * num_traits::pow(b.clone(), m.j as usize);
        }
        acc
    }

    pub fn eval_mod(&self, pt: &FingerprintPoint) -> u64 {
        let mut acc = 0u64;
        for (m, c) in &self.terms {
            let cm = bigint_mod_p(c);
            let t = mul_mod(cm, mul_mod(pow_mod(pt.a, m.i as u64), pow_mod(pt.b, m.j as u64)));
            acc = add_mod(acc, t);
        }
        acc
    }
}

impl fmt::Display for PolyZab {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || *m == Mono::ONE {
                factors.push(mag.to_string());
            }
            match m.i {
                0 => {}
                1 => factors.push("a".into()),
                e => factors.push(format!("a^{e}")),
            }
            match m.j {
                0 => {}
                1 => factors.push("b".into()),
                e => factors.push(format!("b^{e}")),
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

impl FromStr for PolyZab {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let src: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if src.is_empty() {
            return Err(parse_err(s, "empty input"));
        }
        let mut poly = PolyZab::zero();
        let mut rest = src.as_str();
        let mut first = true;
        while !rest.is_empty() {
            let mut sign = BigInt::one();
            if let Some(r) = rest.strip_prefix('+') {
                if first {
                    return Err(parse_err(s, "leading `+`"));
                }
                rest = r;
            } else if let Some(r) = rest.strip_prefix('-') {
                sign = -sign;
                rest = r;
            } else if !first {
                return Err(parse_err(s, "expected `+` or `-` between terms"));
            }
            first = false;
            let end = rest.find(['+', '-']).unwrap_or(rest.len());
            let term = &rest[..end];
            rest = &rest[end..];
            if term.is_empty() {
                return Err(parse_err(s, "empty term"));
            }
            let mut coef = sign;
            let mut mono = Mono::ONE;
            for factor in term.split('*') {
                let (base, exp) = match factor.split_once('^') {
                    Some((base, e)) => {
                        let e: u32 = e.parse().map_err(|_| parse_err(s, format!("bad exponent in `{factor}`")))?;
                        (base, e)
                    }
                    None => (factor, 1),
                };
                match base {
                    "a" => mono.i += exp,
                    "b" => mono.j += exp,
                    _ => {
                        let c: BigInt = base
                            .parse()
                            .map_err(|_| parse_err(s, format!("unknown factor `{factor}`")))?;
                        coef *= num_traits::pow(c, exp as usize);
                    }
                }
            }
            poly.add_term(mono, coef);
        }
        Ok(poly)
    }
}

impl Add<&PolyZab> for &PolyZab {
    type Output = PolyZab;
    fn add(self, rhs: &PolyZab) -> PolyZab {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl Sub<&PolyZab> for &PolyZab {
    type Output = PolyZab;
    fn sub(self, rhs: &PolyZab) -> PolyZab {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c.clone());
        }
        out
    }
}

impl Mul<&PolyZab> for &PolyZab {
    type Output = PolyZab;
    fn mul(self, rhs: &PolyZab) -> PolyZab {
        let mut out = PolyZab::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(Mono::new(m1.i + m2.i, m1.j + m2.j), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &PolyZab {
    type Output = PolyZab;
    fn neg(self) -> PolyZab {
        PolyZab {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr<PolyZab> for PolyZab {
            type Output = PolyZab;
            fn $method(self, rhs: PolyZab) -> PolyZab {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&PolyZab> for PolyZab {
            type Output = PolyZab;
            fn $method(self, rhs: &PolyZab) -> PolyZab {
                (&self).$method(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for PolyZab {
    type Output = PolyZab;
    fn neg(self) -> PolyZab {
        -&self
    }
}

/// Quotient of two polynomials, stored with joint content removed and a
/// positive leading coefficient in the denominator.
#[derive(Clone, Debug)]
pub struct RatFn {
    num: PolyZab,
    den: PolyZab,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RatFnError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl RatFn {
    pub fn new(num: PolyZab, den: PolyZab) -> Result<Self, RatFnError> {
        if den.is_zero() {
            return Err(RatFnError::ZeroDenominator);
        }
        Ok(RatFn::canonical(num, den))
    }

    fn canonical(num: PolyZab, den: PolyZab) -> Self {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return RatFn {
                num,
                den: PolyZab::one(),
            };
        }
        let mut g = num.content().gcd(&den.content());
        if den.leading().unwrap().1.is_negative() {
            g = -g;
        }
        if g.is_one() {
            RatFn { num, den }
        } else {
            RatFn {
                num: num.div_scalar(&g),
                den: den.div_scalar(&g),
            }
        }
    }

    pub fn from_poly(p: PolyZab) -> Self {
        RatFn {
            num: p,
            den: PolyZab::one(),
        }
    }

    pub fn one() -> Self {
        RatFn::from_poly(PolyZab::one())
    }

    pub fn num(&self) -> &PolyZab {
        &self.num
    }

    pub fn den(&self) -> &PolyZab {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn recip(&self) -> Result<RatFn, RatFnError> {
        RatFn::new(self.den.clone(), self.num.clone())
    }

    pub fn add(&self, other: &RatFn) -> RatFn {
        if self.den == other.den {
            return RatFn::canonical(&self.num + &other.num, self.den.clone());
        }
        RatFn::canonical(
            &(&self.num * &other.den) + &(&other.num * &self.den),
            &self.den * &other.den,
        )
    }

    pub fn neg(&self) -> RatFn {
        RatFn::canonical(-&self.num, self.den.clone())
    }

    pub fn sub(&self, other: &RatFn) -> RatFn {
        self.add(&other.neg())
    }

    /// Product with cheap cancellation of exactly divisible cross factors.
    pub fn mul(&self, other: &RatFn) -> RatFn {
        let (n1, d2) = cancel_pair(&self.num, &other.den);
        let (n2, d1) = cancel_pair(&other.num, &self.den);
        RatFn::canonical(&n1 * &n2, &d1 * &d2)
    }

    pub fn div(&self, other: &RatFn) -> Result<RatFn, RatFnError> {
        Ok(self.mul(&other.recip()?))
    }

    /// Removes any of the given polynomials that divide both numerator and denominator.
    pub fn reduce_by(&self, candidates: &[&PolyZab]) -> RatFn {
        let mut num = self.num.clone();
        let mut den = self.den.clone();
        for c in candidates {
            if c.is_zero() || c.total_degree() == Some(0) {
                continue;
            }
            loop {
                match (num.div_exact(c), den.div_exact(c)) {
                    (Some(n), Some(d)) => {
                        num = n;
                        den = d;
                    }
                    _ => break,
                }
            }
        }
        RatFn::canonical(num, den)
    }

    pub fn eval(&self, a: &BigRational, b: &BigRational) -> Option<BigRational> {
        let d = self.den.eval(a, b);
        if d.is_zero() {
            None
        } else {
            Some(self.num.eval(a, b) / d)
        }
    }

    pub fn fingerprint(&self, pt: &FingerprintPoint) -> Option<u64> {
        let d = self.den.eval_mod(pt);
        if d == 0 {
            return None;
        }
        Some(mul_mod(self.num.eval_mod(pt), inv_mod(d)))
    }
}

fn cancel_pair(n: &PolyZab, d: &PolyZab) -> (PolyZab, PolyZab) {
    if d.total_degree().unwrap_or(0) > 0 && n.len() >= d.len() {
        if let Some(q) = n.div_exact(d) {
            return (q, PolyZab::one());
        }
    }
    if n.total_degree().unwrap_or(0) > 0 && d.len() >= n.len() {
        if let Some(q) = d.div_exact(n) {
            return (PolyZab::one(), q);
        }
    }
    (n.clone(), d.clone())
}

impl PartialEq for RatFn {
    fn eq(&self, other: &Self) -> bool {
        if self.num == other.num && self.den == other.den {
            return true;
        }
        &self.num * &other.den == &other.num * &self.den
    }
}

impl Eq for RatFn {}

impl From<PolyZab> for RatFn {
    fn from(p: PolyZab) -> Self {
        RatFn::from_poly(p)
    }
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl FromStr for RatFn {
    type Err = RatFnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let strip = |x: &str| -> String {
            let x = x.trim();
            x.strip_prefix('(')
                .and_then(|y| y.strip_suffix(')'))
                .unwrap_or(x)
                .to_string()
        };
        match t.split_once('/') {
            Some((n, d)) => RatFn::new(strip(n).parse()?, strip(d).parse()?),
            None => Ok(RatFn::from_poly(strip(t).parse()?)),
        }
    }
}

/// Mersenne prime 2^61 − 1 used for fingerprints.
pub const FINGERPRINT_PRIME: u64 = (1u64 << 61) - 1;

fn add_mod(x: u64, y: u64) -> u64 {
    let s = x + y;
    if s >= FINGERPRINT_PRIME {
        s - FINGERPRINT_PRIME
    } else {
        s
    }
}

fn mul_mod(x: u64, y: u64) -> u64 {
    ((x as u128 * y as u128) % FINGERPRINT_PRIME as u128) as u64
}

fn pow_mod(mut x: u64, mut e: u64) -> u64 {
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, x);
        }
        x = mul_mod(x, x);
        e >>= 1;
    }
    acc
}

fn inv_mod(x: u64) -> u64 {
    pow_mod(x, FINGERPRINT_PRIME - 2)
}

fn bigint_mod_p(c: &BigInt) -> u64 {
    let p = BigInt::from(FINGERPRINT_PRIME);
    c.mod_floor(&p).to_u64().expect("residue fits in u64")
}

/// Evaluation point `(a₀, b₀)` modulo [`FINGERPRINT_PRIME`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FingerprintPoint {
    pub a: u64,
    pub b: u64,
}

impl FingerprintPoint {
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        FingerprintPoint {
            a: rng.gen_range(2..FINGERPRINT_PRIME),
            b: rng.gen_range(2..FINGERPRINT_PRIME),
        }
    }
}

impl Default for FingerprintPoint {
    fn default() -> Self {
        FingerprintPoint::from_seed(0)
    }
}

/// Assigns small stable ids to rational functions up to exact equality.
#[derive(Clone, Debug)]
pub struct InternTable {
    point: FingerprintPoint,
    values: Vec<RatFn>,
    buckets: HashMap<u64, Vec<usize>>,
    unprintable: Vec<usize>,
}

impl Default for InternTable {
    fn default() -> Self {
        InternTable::new(FingerprintPoint::default())
    }
}

impl InternTable {
    pub fn new(point: FingerprintPoint) -> Self {
        InternTable {
            point,
            values: Vec::new(),
            buckets: HashMap::new(),
            unprintable: Vec::new(),
        }
    }

    pub fn with_seed(seed: u64) -> Self {
        InternTable::new(FingerprintPoint::from_seed(seed))
    }

    pub fn point(&self) -> FingerprintPoint {
        self.point
    }

    /// Id of an existing equal entry, if any.
    pub fn lookup(&self, x: &RatFn) -> Option<usize> {
        let candidates = match x.fingerprint(&self.point) {
            Some(fp) => self.buckets.get(&fp)?.as_slice(),
            None => self.unprintable.as_slice(),
        };
        candidates.iter().copied().find(|&id| self.values[id] == *x)
    }

    pub fn intern(&mut self, x: RatFn) -> usize {
        let fp = x.fingerprint(&self.point);
        let bucket = match fp {
            Some(fp) => self.buckets.entry(fp).or_default(),
            None => &mut self.unprintable,
        };
        if let Some(&id) = bucket.iter().find(|&&id| self.values[id] == x) {
            return id;
        }
        let id = self.values.len();
        bucket.push(id);
        self.values.push(x);
        id
    }

    pub fn get(&self, id: usize) -> &RatFn {
        &self.values[id]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[RatFn] {
        &self.values
    }
}

/// Renders an exact rational as `p/q`, or `p` when integral.
pub fn rational_string(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `p/q` or `p` into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(BigRational::new(p.trim().parse().ok()?, q))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// Decimal rendering of an exact rational with `sig` significant digits,
/// rounded half away from zero.
pub fn decimal_string(x: &BigRational, sig: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let neg = x.is_negative();
    let ax = x.abs();
    let ten = BigInt::from(10);
    // Find e with 10^e <= ax < 10^(e+1).
    let mut e: i64 = ax.numer().to_string().len() as i64 - ax.denom().to_string().len() as i64;
    let pow10 = |k: i64| -> BigRational {
        if k >= 0 {
            BigRational::from_integer(num_traits::pow(ten.clone(), k as usize))
        } else {
            BigRational::new(BigInt::one(), num_traits::pow(ten.clone(), (-k) as usize))
        }
    };
    while pow10(e) > ax {
        e -= 1;
    }
    while pow10(e + 1) <= ax {
        e += 1;
    }
    let shift = sig as i64 - 1 - e;
    let scaled = &ax * pow10(shift);
    let twice = &scaled * BigRational::from_integer(BigInt::from(2));
    let mut digits = ((twice.to_integer() + BigInt::one()) / BigInt::from(2)).to_string();
    let mut shift = shift;
    if digits.len() > sig {
        digits.pop();
        shift -= 1;
    }
    let body = if shift <= 0 {
        let zeros = "0".repeat((-shift) as usize);
        format!("{digits}{zeros}")
    } else if (shift as usize) < digits.len() {
        let split = digits.len() - shift as usize;
        let (int, frac) = digits.split_at(split);
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            int.to_string()
        } else {
            format!("{int}.{frac}")
        }
    } else {
        let zeros = "0".repeat(shift as usize - digits.len());
        let frac = format!("{zeros}{digits}");
        format!("0.{}", frac.trim_end_matches('0'))
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}
