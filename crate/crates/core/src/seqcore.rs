//! Driving sequences and the shifted binary recurrence.
//!
//! `f(0) = f(1) = 1`, `f(2) = a + b` and `f(n) = a f(n - u_n - 1) + b f(n - u_n - 2)`
//! for `n >= 3`. Ratios `h(n) = f(n+1)/f(n)` are produced numerically over ℚ or
//! symbolically over ℚ(a, b) as interned ids.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;
use std::path::Path;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::automata::{explore, AutomatonError, Dfao, Direction};
use crate::polyrat::{InternTable, PolyZab, RatFn};

#[derive(Debug, Error)]
pub enum SeqError {
    #[error("cannot parse sequence spec `{spec}`: {reason}")]
    Parse { spec: String, reason: String },
    #[error("cannot read `{path}`: {reason}")]
    Io { path: String, reason: String },
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error("periodic sequence needs a nonempty period")]
    EmptyPeriod,
    #[error("word contains a symbol other than 0 and 1")]
    NotBinary,
    #[error("sequence is not automatic in this representation: {0}")]
    NotAutomatic(String),
    #[error("u_{index} = {value} is outside 0..{r}")]
    SymbolOutOfRange { index: usize, value: u8, r: usize },
    #[error("substitution at position {k} < 2 is not allowed")]
    SubstitutionTooEarly { k: usize },
    #[error("no substitutable block at position {k}")]
    NoBlockAt { k: usize },
    #[error("h({n}) matches neither ratio rule; the input is not a ratio sequence")]
    NeitherRule { n: usize },
    #[error("h({n}) matches both ratio rules")]
    BothRules { n: usize },
    #[error("need at least {needed} terms, got {got}")]
    TooShort { needed: usize, got: usize },
}

/// Index → bit provider.
#[derive(Clone, Debug)]
pub enum BinarySeq {
    /// Parity of the binary digit sum.
    ThueMorse,
    /// Parity of the number of `11` blocks in binary.
    RudinShapiro,
    /// 1 exactly at powers of two.
    PowersOfTwo,
    /// 1 exactly at perfect squares.
    Squares,
    Periodic { preperiod: Vec<u8>, period: Vec<u8> },
    /// Base-k lsd automaton with outputs in {0, 1}.
    Automatic(Arc<Dfao<u8>>),
    /// n ↦ inner(⌊n / divisor⌋).
    ScaledIndex { inner: Box<BinarySeq>, divisor: u64 },
    /// Bits of `prefix` override the suffix sequence at the same indices.
    Literal { prefix: Vec<u8>, suffix: Box<BinarySeq> },
    /// n ↦ parts[n mod parts.len()](n).
    Interleave(Vec<BinarySeq>),
}

fn check_bits(w: &[u8]) -> Result<(), SeqError> {
    if w.iter().all(|&x| x <= 1) {
        Ok(())
    } else {
        Err(SeqError::NotBinary)
    }
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

impl BinarySeq {
    pub fn periodic(preperiod: Vec<u8>, period: Vec<u8>) -> Result<Self, SeqError> {
        if period.is_empty() {
            return Err(SeqError::EmptyPeriod);
        }
        check_bits(&preperiod)?;
        check_bits(&period)?;
        Ok(BinarySeq::Periodic { preperiod, period })
    }

    pub fn automatic(d: Dfao<u8>) -> Result<Self, SeqError> {
        let d = d.to_lsd()?;
        if d.tracks() != 1 || d.realized_outputs().iter().any(|&o| o > 1) {
            return Err(SeqError::NotBinary);
        }
        Ok(BinarySeq::Automatic(Arc::new(d)))
    }

    pub fn scaled(inner: BinarySeq, divisor: u64) -> Result<Self, SeqError> {
        if divisor == 0 {
            return Err(SeqError::Parse {
                spec: "scaled".into(),
                reason: "divisor must be positive".into(),
            });
        }
        Ok(BinarySeq::ScaledIndex {
            inner: Box::new(inner),
            divisor,
        })
    }

    pub fn literal(prefix: Vec<u8>, suffix: BinarySeq) -> Result<Self, SeqError> {
        check_bits(&prefix)?;
        Ok(BinarySeq::Literal {
            prefix,
            suffix: Box::new(suffix),
        })
    }

    /// Finite word followed by zeros.
    pub fn word(w: &[u8]) -> Result<Self, SeqError> {
        BinarySeq::literal(w.to_vec(), BinarySeq::periodic(vec![], vec![0])?)
    }

    pub fn eval(&self, n: u64) -> u8 {
        match self {
            BinarySeq::ThueMorse => (n.count_ones() % 2) as u8,
            BinarySeq::RudinShapiro => ((n & (n >> 1)).count_ones() % 2) as u8,
            BinarySeq::PowersOfTwo => n.is_power_of_two() as u8,
            BinarySeq::Squares => (isqrt(n).pow(2) == n) as u8,
            BinarySeq::Periodic { preperiod, period } => {
                let m = preperiod.len() as u64;
                if n < m {
                    preperiod[n as usize]
                } else {
                    period[((n - m) % period.len() as u64) as usize]
                }
            }
            BinarySeq::Automatic(d) => *d.evaluate(n),
            BinarySeq::ScaledIndex { inner, divisor } => inner.eval(n / divisor),
            BinarySeq::Literal { prefix, suffix } => match prefix.get(n as usize) {
                Some(&bit) => bit,
                None => suffix.eval(n),
            },
            BinarySeq::Interleave(parts) => parts[(n % parts.len() as u64) as usize].eval(n),
        }
    }

    /// The first `len` terms.
    pub fn prefix(&self, len: usize) -> Vec<u8> {
        (0..len as u64).map(|n| self.eval(n)).collect()
    }

    /// Parses `ptm | rs | pow2 | squares | periodic:<pre>;<per> | scaled:<spec>/<d>
    /// | dfao:<path> | literal:<bits>;<spec>`.
    pub fn parse_spec(spec: &str) -> Result<Self, SeqError> {
        let err = |reason: &str| SeqError::Parse {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let bits = |s: &str| -> Result<Vec<u8>, SeqError> {
            s.trim()
                .chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(err("bit strings may only contain 0 and 1")),
                })
                .collect()
        };
        let s = spec.trim();
        match s {
            "ptm" => return Ok(BinarySeq::ThueMorse),
            "rs" => return Ok(BinarySeq::RudinShapiro),
            "pow2" => return Ok(BinarySeq::PowersOfTwo),
            "squares" => return Ok(BinarySeq::Squares),
            _ => {}
        }
        let (kind, rest) = s.split_once(':').ok_or_else(|| err("unknown sequence"))?;
        match kind {
            "periodic" => {
                let (pre, per) = rest.split_once(';').ok_or_else(|| err("expected periodic:<pre>;<per>"))?;
                BinarySeq::periodic(bits(pre)?, bits(per)?).map_err(|e| err(&e.to_string()))
            }
            "scaled" => {
                let (inner, d) = rest.rsplit_once('/').ok_or_else(|| err("expected scaled:<spec>/<d>"))?;
                let d: u64 = d.trim().parse().map_err(|_| err("divisor is not a number"))?;
                BinarySeq::scaled(BinarySeq::parse_spec(inner)?, d).map_err(|e| err(&e.to_string()))
            }
            "literal" => {
                let (pre, inner) = rest.split_once(';').ok_or_else(|| err("expected literal:<bits>;<spec>"))?;
                BinarySeq::literal(bits(pre)?, BinarySeq::parse_spec(inner)?)
            }
            "dfao" => BinarySeq::from_walnut_file(Path::new(rest.trim())),
            _ => Err(err("unknown sequence kind")),
        }
    }

    pub fn from_walnut_file(path: &Path) -> Result<Self, SeqError> {
        let text = std::fs::read_to_string(path).map_err(|e| SeqError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        BinarySeq::automatic(Dfao::<u8>::parse_walnut(&text)?)
    }

    /// Minimal lsd-first base-2 automaton generating the sequence, when one is known.
    pub fn to_dfao(&self) -> Result<Dfao<u8>, SeqError> {
        let lsd = Direction::Lsd;
        let d = match self {
            BinarySeq::ThueMorse => Dfao::new(2, 1, lsd, 0, vec![0, 1, 1, 0], vec![0, 1])?,
            BinarySeq::RudinShapiro => {
                // (parity of 11-blocks so far, previous digit)
                explore(
                    2,
                    1,
                    lsd,
                    (0u8, 0u8),
                    |&(p, last), d| (p ^ (last & d as u8), d as u8),
                    |&(p, _)| p,
                )
                .0
            }
            BinarySeq::PowersOfTwo => {
                // 0: only zeros read, 1: exactly one 1 read, 2: two or more
                explore(2, 1, lsd, 0u8, |&s, d| if d == 1 { (s + 1).min(2) } else { s }, |&s| (s == 1) as u8).0
            }
            BinarySeq::Squares => return Err(SeqError::NotAutomatic("the characteristic sequence of squares".into())),
            BinarySeq::Periodic { preperiod, period } => {
                let m = preperiod.len() as u64;
                let l = period.len() as u64;
                let t = ValueTracker::new(2, m, l);
                explore(2, 1, lsd, t.start(), |s, d| t.step(s, d), |s| match s.exact {
                    Some(v) => preperiod[v as usize],
                    None => period[((s.modulo + l - m % l) % l) as usize],
                })
                .0
            }
            BinarySeq::Automatic(d) => return Ok((**d).clone()),
            BinarySeq::ScaledIndex { inner, divisor } => {
                let base = inner.to_dfao()?;
                let k = base.base() as u64;
                let mut e = 0u32;
                let mut p = 1u64;
                while p < *divisor {
                    p *= k;
                    e += 1;
                }
                if p != *divisor {
                    return Err(SeqError::NotAutomatic(format!(
                        "index scaling by {divisor} is only supported for powers of the base"
                    )));
                }
                // Skip the e lowest digits, then run the inner automaton.
                explore(
                    base.base(),
                    1,
                    lsd,
                    (0u32, base.initial()),
                    |&(skipped, q), d| if skipped < e { (skipped + 1, q) } else { (e, base.step(q, d)) },
                    |&(_, q)| *base.output(q),
                )
                .0
            }
            BinarySeq::Literal { prefix, suffix } => {
                let inner = suffix.to_dfao()?;
                let t = ValueTracker::new(inner.base(), prefix.len() as u64, 1);
                explore(
                    inner.base(),
                    1,
                    lsd,
                    (t.start(), inner.initial()),
                    |(s, q), d| (t.step(s, d), inner.step(*q, d)),
                    |(s, q)| match s.exact {
                        Some(v) => prefix[v as usize],
                        None => *inner.output(*q),
                    },
                )
                .0
            }
            BinarySeq::Interleave(parts) => {
                let autos: Vec<Dfao<u8>> = parts.iter().map(|p| p.to_dfao()).collect::<Result<_, _>>()?;
                let k = autos[0].base();
                if autos.iter().any(|a| a.base() != k) {
                    return Err(SeqError::NotAutomatic("interleaved parts use different bases".into()));
                }
                let t = ValueTracker::new(k, 0, parts.len() as u64);
                explore(
                    k,
                    1,
                    lsd,
                    (t.start(), autos.iter().map(|a| a.initial()).collect::<Vec<_>>()),
                    |(s, qs), d| (t.step(s, d), qs.iter().zip(&autos).map(|(&q, a)| a.step(q, d)).collect()),
                    |(s, qs)| *autos[s.modulo as usize].output(qs[s.modulo as usize]),
                )
                .0
            }
        };
        Ok(d.zero_saturate()?.minimize())
    }
}

/// Tracks, while reading lsd digits, the value modulo `modulus` and the exact value while it is below `cap`.
#[derive(Clone, Copy, Debug)]
struct ValueTracker {
    base: u64,
    cap: u64,
    modulus: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct TrackState {
    modulo: u64,
    pow_mod: u64,
    exact: Option<u64>,
    pow_exact: Option<u64>,
}

impl ValueTracker {
    fn new(base: u32, cap: u64, modulus: u64) -> Self {
        ValueTracker {
            base: base as u64,
            cap,
            modulus,
        }
    }

    fn start(&self) -> TrackState {
        TrackState {
            modulo: 0,
            pow_mod: 1 % self.modulus,
            exact: (self.cap > 0).then_some(0),
            pow_exact: Some(1).filter(|&p| p < self.cap.max(1)),
        }
    }

    fn step(&self, s: &TrackState, d: usize) -> TrackState {
        let d = d as u64;
        let exact = match (s.exact, s.pow_exact) {
            (Some(v), Some(p)) => Some(v + d * p).filter(|&x| x < self.cap),
            (Some(v), None) if d == 0 => Some(v),
            _ => None,
        };
        TrackState {
            modulo: (s.modulo + d * s.pow_mod) % self.modulus,
            pow_mod: s.pow_mod * self.base % self.modulus,
            exact,
            pow_exact: s.pow_exact.map(|p| p * self.base).filter(|&p| p < self.cap),
        }
    }
}

/// Integer coefficients of the recurrence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MetaFibParams {
    pub a: i64,
    pub b: i64,
}

impl MetaFibParams {
    pub fn new(a: i64, b: i64) -> Self {
        MetaFibParams { a, b }
    }
}

/// A ratio `h(n)`; `value` is `None` where `f(n) = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RatioPoint<V> {
    pub n: usize,
    pub value: Option<V>,
}

impl<V> RatioPoint<V> {
    pub fn defined(&self) -> bool {
        self.value.is_some()
    }
}

fn run_recurrence<T: Clone>(word: &[u8], n_max: usize, seeds: [T; 3], combine: impl Fn(&T, &T) -> T) -> Vec<T> {
    let mut f: Vec<T> = seeds.to_vec();
    f.truncate(n_max + 1);
    for n in 3..=n_max {
        let s = word[n] as usize;
        let next = combine(&f[n - s - 1], &f[n - s - 2]);
        f.push(next);
    }
    f
}

/// Numeric `f(0..=n_max)` for a finite driving word of length > n_max.
pub fn f_numeric_word(p: MetaFibParams, word: &[u8], n_max: usize) -> Vec<BigInt> {
    let (a, b) = (BigInt::from(p.a), BigInt::from(p.b));
    run_recurrence(word, n_max, [BigInt::one(), BigInt::one(), &a + &b], |x, y| &a * x + &b * y)
}

pub fn compute_f_numeric(p: MetaFibParams, u: &BinarySeq, n_max: usize) -> Vec<BigInt> {
    f_numeric_word(p, &u.prefix(n_max + 1), n_max)
}

/// Symbolic `f(0..=n_max)` over ℤ[a, b].
pub fn f_symbolic_word(word: &[u8], n_max: usize) -> Vec<PolyZab> {
    let s = &PolyZab::a() + &PolyZab::b();
    run_recurrence(word, n_max, [PolyZab::one(), PolyZab::one(), s], |x, y| &x.mul_a() + &y.mul_b())
}

pub fn compute_f_symbolic(u: &BinarySeq, n_max: usize) -> Vec<PolyZab> {
    f_symbolic_word(&u.prefix(n_max + 1), n_max)
}

/// Exact ratios of consecutive numeric terms.
pub fn compute_h_numeric(f: &[BigInt]) -> Vec<RatioPoint<BigRational>> {
    f.windows(2)
        .enumerate()
        .map(|(n, w)| RatioPoint {
            n,
            value: (!w[0].is_zero()).then(|| BigRational::new(w[1].clone(), w[0].clone())),
        })
        .collect()
}

/// Interned ratios of consecutive symbolic terms.
pub fn compute_h_symbolic(f: &[PolyZab], table: &mut InternTable) -> Vec<RatioPoint<usize>> {
    f.windows(2)
        .enumerate()
        .map(|(n, w)| RatioPoint {
            n,
            value: RatFn::new(w[1].clone(), w[0].clone()).ok().map(|r| table.intern(r)),
        })
        .collect()
}

/// `a + b/Y`.
fn rule_plain(y: &RatFn) -> RatFn {
    RatFn::new(&y.num().mul_a() + &y.den().mul_b(), y.num().clone()).expect("nonzero ratio")
}

/// `a/Y + b/(XY)`, cancelling the denominator of `Y` against the numerator of `X` when possible.
fn rule_skip(x: &RatFn, y: &RatFn) -> RatFn {
    let num = &x.num().mul_a() + &x.den().mul_b();
    if x.num() == y.den() {
        return RatFn::new(num, y.num().clone()).expect("nonzero ratio");
    }
    match x.num().div_exact(y.den()) {
        Some(q) => RatFn::new(num, &q * y.num()).expect("nonzero ratio"),
        None => RatFn::new(&num * y.den(), x.num() * y.num()).expect("nonzero ratio"),
    }
}

/// `a + b/(XY)`.
fn rule_tilde_mixed(x: &RatFn, y: &RatFn) -> RatFn {
    let (q, dx) = match x.num().div_exact(y.den()) {
        Some(q) => (q, x.den().clone()),
        None => (x.num() * y.den(), x.den() * y.den()),
    };
    let qy = &q * y.num();
    RatFn::new(&qy.mul_a() + &dx.mul_b(), qy).expect("nonzero ratio")
}

/// `(a + b)/Y`.
fn rule_tilde_sum(y: &RatFn) -> RatFn {
    let s = &PolyZab::a() + &PolyZab::b();
    RatFn::new(&s * y.den(), y.num().clone()).expect("nonzero ratio")
}

/// Interned seeds `h(0) = 1`, `h(1) = a + b`.
pub fn seed_ids(table: &mut InternTable) -> (usize, usize) {
    let one = table.intern(RatFn::one());
    let s = table.intern(RatFn::from_poly(&PolyZab::a() + &PolyZab::b()));
    (one, s)
}

/// Memoized symbolic ratio recurrence keyed by `(h(n-2), h(n-1), symbol)`.
pub struct RatioEngine<'t> {
    table: &'t mut InternTable,
    memo: HashMap<(usize, usize, u8), usize>,
}

impl<'t> RatioEngine<'t> {
    pub fn new(table: &'t mut InternTable) -> Self {
        RatioEngine {
            table,
            memo: HashMap::new(),
        }
    }

    /// Next ratio for the single-sequence recurrence given `u_{n+1}`.
    pub fn next(&mut self, x: usize, y: usize, bit: u8) -> usize {
        self.next_with(x, y, bit, |t, x, y, bit| {
            if bit == 0 {
                rule_plain(t.get(y))
            } else {
                rule_skip(t.get(x), t.get(y))
            }
        })
    }

    /// Next ratio for the two-sequence recurrence given `(u_{n+1}, v_{n+1})`.
    pub fn next_tilde(&mut self, x: usize, y: usize, u: u8, v: u8) -> usize {
        let key = 2 + 2 * u + v;
        self.next_with(x, y, key, |t, x, y, key| match key {
            2 => rule_plain(t.get(y)),
            3 => rule_tilde_mixed(t.get(x), t.get(y)),
            4 => rule_tilde_sum(t.get(y)),
            _ => rule_skip(t.get(x), t.get(y)),
        })
    }

    fn next_with(
        &mut self,
        x: usize,
        y: usize,
        key: u8,
        rule: impl Fn(&InternTable, usize, usize, u8) -> RatFn,
    ) -> usize {
        if let Some(&id) = self.memo.get(&(x, y, key)) {
            return id;
        }
        let r = rule(self.table, x, y, key);
        let id = self.table.intern(r);
        self.memo.insert((x, y, key), id);
        id
    }

    pub fn table(&self) -> &InternTable {
        self.table
    }
}

/// Symbolic `h(0..horizon)` as intern ids; needs `word.len() > horizon`.
pub fn symbolic_ratio_ids(word: &[u8], horizon: usize, table: &mut InternTable) -> Vec<usize> {
    assert!(word.len() > horizon, "driving word too short for the horizon");
    let (one, s) = seed_ids(table);
    let mut h = vec![one, s];
    h.truncate(horizon);
    let mut eng = RatioEngine::new(table);
    for n in 2..horizon {
        let id = eng.next(h[n - 2], h[n - 1], word[n + 1]);
        h.push(id);
    }
    h
}

/// Symbolic two-sequence ratios `h̃(0..horizon)` as intern ids.
pub fn symbolic_tilde_ratio_ids(u: &[u8], v: &[u8], horizon: usize, table: &mut InternTable) -> Vec<usize> {
    assert!(u.len() > horizon && v.len() > horizon, "driving words too short for the horizon");
    let (one, s) = seed_ids(table);
    let mut h = vec![one, s];
    h.truncate(horizon);
    let mut eng = RatioEngine::new(table);
    for n in 2..horizon {
        let id = eng.next_tilde(h[n - 2], h[n - 1], u[n + 1], v[n + 1]);
        h.push(id);
    }
    h
}

/// Numeric two-sequence variant, coefficient `b` on the second term.
pub fn f_tilde_word(p: MetaFibParams, u: &[u8], v: &[u8], n_max: usize) -> Vec<BigInt> {
    let (a, b) = (BigInt::from(p.a), BigInt::from(p.b));
    let mut f = vec![BigInt::one(), BigInt::one(), &a + &b];
    f.truncate(n_max + 1);
    for n in 3..=n_max {
        let next = &a * &f[n - 1 - u[n] as usize] + &b * &f[n - 2 - v[n] as usize];
        f.push(next);
    }
    f
}

pub fn compute_f_tilde(p: MetaFibParams, u: &BinarySeq, v: &BinarySeq, n_max: usize) -> Vec<BigInt> {
    f_tilde_word(p, &u.prefix(n_max + 1), &v.prefix(n_max + 1), n_max)
}

pub fn compute_h_tilde(f: &[BigInt]) -> Vec<RatioPoint<BigRational>> {
    compute_h_numeric(f)
}

/// Reset positions with gap statistics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResetReport {
    pub positions: Vec<usize>,
    /// Gap size → number of occurrences.
    pub gaps: BTreeMap<usize, usize>,
    pub max_gap_seen: usize,
    pub horizon: usize,
}

impl ResetReport {
    fn from_positions(positions: Vec<usize>, horizon: usize) -> Self {
        let mut gaps = BTreeMap::new();
        for w in positions.windows(2) {
            *gaps.entry(w[1] - w[0]).or_insert(0) += 1;
        }
        let max_gap_seen = gaps.keys().next_back().copied().unwrap_or(0);
        ResetReport {
            positions,
            gaps,
            max_gap_seen,
            horizon,
        }
    }
}

fn positions_where(horizon: usize, hit: impl Fn(usize) -> bool) -> Vec<usize> {
    std::iter::once(0).chain((1..horizon).filter(|&n| hit(n))).collect()
}

/// Positions `n < horizon` with `(u_n, u_{n+1}, u_{n+2}) = (0, 1, 0)`, plus 0; needs `word.len() >= horizon + 2`.
pub fn reset_set_word(word: &[u8], horizon: usize) -> ResetReport {
    reset_set_general_word(2, word, horizon)
}

pub fn reset_set(u: &BinarySeq, horizon: usize) -> ResetReport {
    reset_set_word(&u.prefix(horizon + 2), horizon)
}

/// Two-sequence resets: `(u_n, u_{n+1})` is `(0,1)` or `(1,0)` and `(v_n, v_{n+1}, v_{n+2}) = (0,1,0)`.
pub fn reset_set_tilde_word(u: &[u8], v: &[u8], horizon: usize) -> ResetReport {
    let pos = positions_where(horizon, |n| u[n] != u[n + 1] && v[n..n + 3] == [0, 1, 0]);
    ResetReport::from_positions(pos, horizon)
}

pub fn reset_set_tilde(u: &BinarySeq, v: &BinarySeq, horizon: usize) -> ResetReport {
    reset_set_tilde_word(&u.prefix(horizon + 2), &v.prefix(horizon + 2), horizon)
}

/// Order-r resets: `(u_n, …, u_{n+r}) = (0, 1, …, r−1, 0)`, plus 0.
pub fn reset_set_general_word(r: usize, word: &[u8], horizon: usize) -> ResetReport {
    let pattern: Vec<u8> = (0..r as u8).chain(std::iter::once(0)).collect();
    let pos = positions_where(horizon, |n| word[n..n + r + 1] == pattern[..]);
    ResetReport::from_positions(pos, horizon)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Substitution {
    /// `(0,0,0) → (0,1,1,0)`
    Expand,
    /// `(0,1,1,0) → (0,0,0)`
    Contract,
}

impl Substitution {
    fn blocks(self) -> (&'static [u8], &'static [u8]) {
        match self {
            Substitution::Expand => (&[0, 0, 0], &[0, 1, 1, 0]),
            Substitution::Contract => (&[0, 1, 1, 0], &[0, 0, 0]),
        }
    }
}

/// One left-to-right pass of non-overlapping substitutions at positions `k >= 2`.
pub fn substitute_blocks(word: &[u8], dir: Substitution) -> Vec<u8> {
    let (from, to) = dir.blocks();
    let mut out: Vec<u8> = word.iter().take(2).copied().collect();
    let mut i = out.len();
    while i < word.len() {
        if word[i..].starts_with(from) {
            out.extend_from_slice(to);
            i += from.len();
        } else {
            out.push(word[i]);
            i += 1;
        }
    }
    out
}

/// A single substitution at position `k`, which must be at least 2.
pub fn substitute_at(word: &[u8], k: usize, dir: Substitution) -> Result<Vec<u8>, SeqError> {
    if k < 2 {
        return Err(SeqError::SubstitutionTooEarly { k });
    }
    let (from, to) = dir.blocks();
    if !word.get(k..).is_some_and(|w| w.starts_with(from)) {
        return Err(SeqError::NoBlockAt { k });
    }
    let mut out = word[..k].to_vec();
    out.extend_from_slice(to);
    out.extend_from_slice(&word[k + from.len()..]);
    Ok(out)
}

/// One distinct value of a ratio list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValueEntry<V> {
    pub value: V,
    pub count: usize,
    pub first: usize,
    pub last: usize,
}

/// Distinct defined values in order of first occurrence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValueSet<V> {
    pub entries: Vec<ValueEntry<V>>,
    pub undefined: usize,
}

impl<V> ValueSet<V> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn value_set<V: Clone + Eq + Hash>(points: &[RatioPoint<V>]) -> ValueSet<V> {
    let mut index: HashMap<&V, usize> = HashMap::new();
    let mut entries: Vec<ValueEntry<V>> = Vec::new();
    let mut undefined = 0;
    for p in points {
        match &p.value {
            None => undefined += 1,
            Some(v) => match index.get(v) {
                Some(&i) => {
                    entries[i].count += 1;
                    entries[i].last = p.n;
                }
                None => {
                    index.insert(v, entries.len());
                    entries.push(ValueEntry {
                        value: v.clone(),
                        count: 1,
                        first: p.n,
                        last: p.n,
                    });
                }
            },
        }
    }
    ValueSet { entries, undefined }
}

/// Wraps a plain id list as ratio points.
pub fn id_points(ids: &[usize]) -> Vec<RatioPoint<usize>> {
    ids.iter()
        .enumerate()
        .map(|(n, &id)| RatioPoint { n, value: Some(id) })
        .collect()
}

/// Recovers `u_3, u_4, …` from symbolic ratios `h(0), h(1), …`.
pub fn recover_u(h: &[RatFn]) -> Result<Vec<u8>, SeqError> {
    if h.len() < 3 {
        return Err(SeqError::TooShort { needed: 3, got: h.len() });
    }
    let mut out = Vec::with_capacity(h.len() - 2);
    for n in 2..h.len() {
        if h[n - 1].is_zero() || h[n - 2].is_zero() {
            return Err(SeqError::NeitherRule { n });
        }
        let zero = rule_plain(&h[n - 1]) == h[n];
        let one = rule_skip(&h[n - 2], &h[n - 1]) == h[n];
        match (zero, one) {
            (true, true) => return Err(SeqError::BothRules { n }),
            (true, false) => out.push(0),
            (false, true) => out.push(1),
            (false, false) => return Err(SeqError::NeitherRule { n }),
        }
    }
    Ok(out)
}

/// Order-r recurrence: `f(n) = 1` for `n <= r − 1` (negative indices included),
/// `f(r) = a_1 + … + a_r`, `f(n) = Σ a_j f(n − j − u_n)` for `n >= r + 1`.
pub fn compute_f_general_order(coeffs: &[BigInt], u: &[u8], n_max: usize) -> Result<Vec<BigInt>, SeqError> {
    let r = coeffs.len();
    if r < 2 {
        return Err(SeqError::TooShort { needed: 2, got: r });
    }
    if u.len() <= n_max {
        return Err(SeqError::TooShort {
            needed: n_max + 1,
            got: u.len(),
        });
    }
    if let Some((index, &value)) = u.iter().enumerate().find(|(_, &x)| x as usize >= r) {
        return Err(SeqError::SymbolOutOfRange { index, value, r });
    }
    let mut f: Vec<BigInt> = vec![BigInt::one(); r];
    f.push(coeffs.iter().sum());
    f.truncate(n_max + 1);
    for n in r + 1..=n_max {
        let mut acc = BigInt::zero();
        for (j, a) in coeffs.iter().enumerate() {
            let idx = n as i64 - (j as i64 + 1) - u[n] as i64;
            let term = if idx < 0 { BigInt::one() } else { f[idx as usize].clone() };
            acc += a * term;
        }
        f.push(acc);
    }
    Ok(f)
}
