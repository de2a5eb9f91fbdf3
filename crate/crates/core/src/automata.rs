//! Base-k deterministic finite automata with output.
//!
//! Inputs are digit strings of the index. Operations that index arithmetic
//! needs (shifts, windows, gap predicates) require least-significant-digit
//! first reading and trailing-zero invariant outputs.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::{self, Debug, Write as _};
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bounds shared by every output alphabet.
pub trait Output: Clone + Eq + Ord + Hash + Debug {}
impl<T: Clone + Eq + Ord + Hash + Debug> Output for T {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Lsd,
    Msd,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Lsd => Direction::Msd,
            Direction::Msd => Direction::Lsd,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Lsd => "lsd",
            Direction::Msd => "msd",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("state {state} has no transition on symbol {symbol}")]
    NotTotal { state: usize, symbol: String },
    #[error("line {line}: transition to undeclared state {state}")]
    DanglingState { line: usize, state: usize },
    #[error("incompatible automata: {0}")]
    Mismatch(String),
    #[error("operation requires {0}-first input")]
    WrongDirection(Direction),
    #[error("outputs along the 0-cycle from state {state} are not constant")]
    UnstableZeroCycle { state: usize },
    #[error("{0}")]
    Invalid(String),
}

/// Deterministic finite automaton with output over tuples of base-k digits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfao<O> {
    base: u32,
    tracks: u32,
    direction: Direction,
    initial: usize,
    delta: Vec<usize>,
    outputs: Vec<O>,
}

/// Automaton whose outputs are accept/reject.
pub type Dfa = Dfao<bool>;

/// Digits of `n` in base `k`, least significant first; empty for zero.
pub fn digits_lsd(mut n: u64, k: u32) -> Vec<usize> {
    let mut out = Vec::new();
    while n > 0 {
        out.push((n % k as u64) as usize);
        n /= k as u64;
    }
    out
}

/// Value of an lsd-first digit string, `None` on overflow.
pub fn value_lsd(digits: &[usize], k: u32) -> Option<u64> {
    let mut v: u64 = 0;
    for &d in digits.iter().rev() {
        v = v.checked_mul(k as u64)?.checked_add(d as u64)?;
    }
    Some(v)
}

/// Breadth-first construction of the reachable part of an implicitly given automaton.
/// Returns the automaton together with the abstract state of every numbered state.
pub fn explore<S, O, F, G>(
    base: u32,
    tracks: u32,
    direction: Direction,
    init: S,
    mut step: F,
    mut out: G,
) -> (Dfao<O>, Vec<S>)
where
    S: Clone + Eq + Hash,
    F: FnMut(&S, usize) -> S,
    G: FnMut(&S) -> O,
{
    let alpha = (base as usize).pow(tracks);
    let mut index: HashMap<S, usize> = HashMap::new();
    let mut states = vec![init.clone()];
    index.insert(init, 0);
    let mut delta = Vec::new();
    let mut next = 0;
    while next < states.len() {
        let s = states[next].clone();
        for sym in 0..alpha {
            let t = step(&s, sym);
            let id = match index.get(&t) {
                Some(&id) => id,
                None => {
                    let id = states.len();
                    index.insert(t.clone(), id);
                    states.push(t);
                    id
                }
            };
            delta.push(id);
        }
        next += 1;
    }
    let outputs = states.iter().map(&mut out).collect();
    (
        Dfao {
            base,
            tracks,
            direction,
            initial: 0,
            delta,
            outputs,
        },
        states,
    )
}

impl<O: Output> Dfao<O> {
    pub fn new(
        base: u32,
        tracks: u32,
        direction: Direction,
        initial: usize,
        delta: Vec<usize>,
        outputs: Vec<O>,
    ) -> Result<Self, AutomatonError> {
        if base < 2 {
            return Err(AutomatonError::Invalid(format!("base {base} < 2")));
        }
        if tracks < 1 {
            return Err(AutomatonError::Invalid("at least one track required".into()));
        }
        let n = outputs.len();
        let alpha = (base as usize).pow(tracks);
        if n == 0 || initial >= n {
            return Err(AutomatonError::Invalid("initial state out of range".into()));
        }
        if delta.len() != n * alpha {
            return Err(AutomatonError::Invalid("transition table is not total".into()));
        }
        if let Some(pos) = delta.iter().position(|&t| t >= n) {
            return Err(AutomatonError::Invalid(format!(
                "state {} symbol {} targets missing state {}",
                pos / alpha,
                pos % alpha,
                delta[pos]
            )));
        }
        Ok(Dfao {
            base,
            tracks,
            direction,
            initial,
            delta,
            outputs,
        })
    }

    /// Single-state automaton with a constant output.
    pub fn constant(base: u32, direction: Direction, value: O) -> Self {
        Dfao {
            base,
            tracks: 1,
            direction,
            initial: 0,
            delta: vec![0; base as usize],
            outputs: vec![value],
        }
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn tracks(&self) -> u32 {
        self.tracks
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn num_states(&self) -> usize {
        self.outputs.len()
    }

    pub fn alphabet_size(&self) -> usize {
        (self.base as usize).pow(self.tracks)
    }

    pub fn step(&self, q: usize, sym: usize) -> usize {
        self.delta[q * self.alphabet_size() + sym]
    }

    pub fn output(&self, q: usize) -> &O {
        &self.outputs[q]
    }

    pub fn outputs(&self) -> &[O] {
        &self.outputs
    }

    pub fn run<I: IntoIterator<Item = usize>>(&self, word: I) -> usize {
        word.into_iter().fold(self.initial, |q, s| self.step(q, s))
    }

    /// Output on the canonical representation of `n` (single track).
    pub fn evaluate(&self, n: u64) -> &O {
        let digits = digits_lsd(n, self.base);
        let q = match self.direction {
            Direction::Lsd => self.run(digits),
            Direction::Msd => self.run(digits.into_iter().rev()),
        };
        &self.outputs[q]
    }

    pub fn map_outputs<P: Output>(&self, mut f: impl FnMut(&O) -> P) -> Dfao<P> {
        Dfao {
            base: self.base,
            tracks: self.tracks,
            direction: self.direction,
            initial: self.initial,
            delta: self.delta.clone(),
            outputs: self.outputs.iter().map(&mut f).collect(),
        }
    }

    fn require_lsd(&self) -> Result<(), AutomatonError> {
        if self.direction == Direction::Lsd {
            Ok(())
        } else {
            Err(AutomatonError::WrongDirection(Direction::Lsd))
        }
    }

    fn require_single_track(&self) -> Result<(), AutomatonError> {
        if self.tracks == 1 {
            Ok(())
        } else {
            Err(AutomatonError::Mismatch("operation needs a single input track".into()))
        }
    }

    /// States reachable from the initial state, in BFS order.
    pub fn reachable(&self) -> Vec<usize> {
        let mut seen = vec![false; self.num_states()];
        let mut order = vec![self.initial];
        seen[self.initial] = true;
        let mut i = 0;
        while i < order.len() {
            let q = order[i];
            for s in 0..self.alphabet_size() {
                let t = self.step(q, s);
                if !seen[t] {
                    seen[t] = true;
                    order.push(t);
                }
            }
            i += 1;
        }
        order
    }

    /// Reachable product with outputs combined by `combine`.
    pub fn product<P: Output, R: Output>(
        &self,
        other: &Dfao<P>,
        mut combine: impl FnMut(&O, &P) -> R,
    ) -> Result<Dfao<R>, AutomatonError> {
        if self.base != other.base || self.tracks != other.tracks || self.direction != other.direction {
            return Err(AutomatonError::Mismatch(format!(
                "base/tracks/direction ({}, {}, {}) vs ({}, {}, {})",
                self.base, self.tracks, self.direction, other.base, other.tracks, other.direction
            )));
        }
        let (dfao, _) = explore(
            self.base,
            self.tracks,
            self.direction,
            (self.initial, other.initial),
            |&(p, q), s| (self.step(p, s), other.step(q, s)),
            |&(p, q)| combine(&self.outputs[p], &other.outputs[q]),
        );
        Ok(dfao)
    }

    /// Moore partition refinement seeded by outputs, renumbered in BFS order.
    pub fn minimize(&self) -> Dfao<O> {
        let reach = self.reachable();
        let alpha = self.alphabet_size();
        let distinct: BTreeSet<&O> = reach.iter().map(|&q| &self.outputs[q]).collect();
        let out_rank: HashMap<&O, usize> = distinct.into_iter().enumerate().map(|(i, o)| (o, i)).collect();
        let mut class = vec![usize::MAX; self.num_states()];
        for &q in &reach {
            class[q] = out_rank[&self.outputs[q]];
        }
        let mut count = out_rank.len();
        loop {
            let mut sigs: HashMap<Vec<usize>, usize> = HashMap::new();
            let mut next = vec![usize::MAX; self.num_states()];
            for &q in &reach {
                let mut sig = Vec::with_capacity(alpha + 1);
                sig.push(class[q]);
                sig.extend((0..alpha).map(|s| class[self.step(q, s)]));
                let fresh = sigs.len();
                next[q] = *sigs.entry(sig).or_insert(fresh);
            }
            let new_count = sigs.len();
            class = next;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        let mut rep = vec![usize::MAX; count];
        for &q in &reach {
            if rep[class[q]] == usize::MAX {
                rep[class[q]] = q;
            }
        }
        let (dfao, _) = explore(
            self.base,
            self.tracks,
            self.direction,
            class[self.initial],
            |&c, s| class[self.step(rep[c], s)],
            |&c| self.outputs[rep[c]].clone(),
        );
        dfao
    }

    /// Replaces each output by the output on the eventual 0-cycle.
    pub fn zero_saturate(&self) -> Result<Dfao<O>, AutomatonError> {
        self.require_lsd()?;
        let mut outputs = self.outputs.clone();
        for q in 0..self.num_states() {
            let mut path = vec![q];
            let mut pos: HashMap<usize, usize> = HashMap::from([(q, 0)]);
            let start = loop {
                let t = self.step(*path.last().unwrap(), 0);
                if let Some(&i) = pos.get(&t) {
                    break i;
                }
                pos.insert(t, path.len());
                path.push(t);
            };
            let cycle = &path[start..];
            let o = &self.outputs[cycle[0]];
            if cycle.iter().any(|&c| &self.outputs[c] != o) {
                return Err(AutomatonError::UnstableZeroCycle { state: q });
            }
            outputs[q] = o.clone();
        }
        Ok(Dfao {
            outputs,
            ..self.clone()
        })
    }

    /// True when appending zeros never changes the output (lsd semantics).
    pub fn is_zero_saturated(&self) -> bool {
        (0..self.num_states()).all(|q| self.outputs[self.step(q, 0)] == self.outputs[q])
    }

    /// Automaton reading digits in the opposite order and computing the same values.
    pub fn reverse_direction(&self) -> Result<Dfao<O>, AutomatonError> {
        let n = self.num_states();
        let init: Vec<O> = self.outputs.clone();
        let (rev, _) = explore(
            self.base,
            self.tracks,
            self.direction.flip(),
            init,
            |g, s| (0..n).map(|q| g[self.step(q, s)].clone()).collect::<Vec<O>>(),
            |g| g[self.initial].clone(),
        );
        let rev = rev.minimize();
        if rev.direction == Direction::Lsd {
            Ok(rev.zero_saturate()?.minimize())
        } else {
            Ok(rev)
        }
    }

    /// Converts to lsd-first reading, normalized.
    pub fn to_lsd(&self) -> Result<Dfao<O>, AutomatonError> {
        match self.direction {
            Direction::Lsd => Ok(self.zero_saturate()?.minimize()),
            Direction::Msd => self.reverse_direction(),
        }
    }

    /// n ↦ A(n + j).
    pub fn shift_by_constant(&self, j: u64) -> Result<Dfao<O>, AutomatonError> {
        self.require_lsd()?;
        self.require_single_track()?;
        if j == 0 {
            return Ok(self.clone());
        }
        let k = self.base as u64;
        let (dfao, _) = explore(
            self.base,
            1,
            Direction::Lsd,
            (self.initial, j),
            |&(q, r), d| {
                let t = d as u64 + r;
                (self.step(q, (t % k) as usize), t / k)
            },
            |&(q, r)| self.outputs[digits_lsd(r, self.base).into_iter().fold(q, |q, d| self.step(q, d))].clone(),
        );
        Ok(dfao.minimize())
    }

    /// n ↦ patch[n] for n < patch.len(), else A(n − patch.len()).
    pub fn shift_back(&self, patch: &[O]) -> Result<Dfao<O>, AutomatonError> {
        self.require_lsd()?;
        self.require_single_track()?;
        let j = patch.len() as u64;
        if j == 0 {
            return Ok(self.clone());
        }
        let k = self.base as u64;
        // (state of A, pending subtrahend, value read so far if < j, k^t if <= j)
        type St = (usize, u64, Option<u64>, Option<u64>);
        let (dfao, _) = explore(
            self.base,
            1,
            Direction::Lsd,
            (self.initial, j, Some(0u64), Some(1u64)) as St,
            |&(q, r, v, pw), d| {
                let d = d as u64;
                let mut t = d as i64 - (r % k) as i64;
                let mut r2 = r / k;
                if t < 0 {
                    t += k as i64;
                    r2 += 1;
                }
                let v2 = match (v, pw) {
                    (Some(v), Some(p)) => Some(v + d * p).filter(|&x| x < j),
                    (Some(v), None) if d == 0 => Some(v),
                    _ => None,
                };
                let pw2 = pw.map(|p| p * k).filter(|&p| p <= j);
                (self.step(q, t as usize), r2, v2, pw2)
            },
            |&(q, r, v, _)| {
                // A pending borrow with an unknown value never ends a complete input.
                match (r > 0, v) {
                    (true, Some(v)) => patch[v as usize].clone(),
                    _ => self.outputs[q].clone(),
                }
            },
        );
        Ok(dfao.minimize())
    }

    /// n ↦ (A(n), A(n+1), …, A(n+w)).
    pub fn window(&self, w: usize) -> Result<Dfao<Vec<O>>, AutomatonError> {
        self.require_lsd()?;
        let mut acc = self.map_outputs(|o| vec![o.clone()]);
        for i in 1..=w {
            let sh = self.shift_by_constant(i as u64)?;
            acc = acc
                .product(&sh, |v, o| {
                    let mut v = v.clone();
                    v.push(o.clone());
                    v
                })?
                .minimize();
        }
        Ok(acc)
    }

    /// The set of values taken by the automaton.
    pub fn realized_outputs(&self) -> BTreeSet<O> {
        self.reachable().into_iter().map(|q| self.outputs[q].clone()).collect()
    }

    /// Shortest input reaching a state with each realized output, as an index value.
    pub fn output_witnesses(&self) -> BTreeMap<O, Option<u64>> {
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.num_states()];
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        let mut witness = BTreeMap::new();
        while let Some(q) = queue.pop_front() {
            if !witness.contains_key(&self.outputs[q]) {
                let mut word = Vec::new();
                let mut cur = q;
                while let Some((p, s)) = parent[cur] {
                    word.push(s);
                    cur = p;
                }
                word.reverse();
                if self.direction == Direction::Msd {
                    word.reverse();
                }
                let value = if self.tracks == 1 { value_lsd(&word, self.base) } else { None };
                witness.insert(self.outputs[q].clone(), value);
            }
            for s in 0..self.alphabet_size() {
                let t = self.step(q, s);
                if !seen[t] {
                    seen[t] = true;
                    parent[t] = Some((q, s));
                    queue.push_back(t);
                }
            }
        }
        witness
    }

    /// Accepts n iff (A(n), …, A(n+|pattern|−1)) equals the pattern.
    pub fn block_dfa(&self, pattern: &[O]) -> Result<Dfa, AutomatonError> {
        if pattern.is_empty() {
            return Err(AutomatonError::Invalid("empty pattern".into()));
        }
        let win = self.window(pattern.len() - 1)?;
        Ok(win.map_outputs(|v| v.as_slice() == pattern).minimize())
    }

    /// Graphviz rendering of the transition structure.
    pub fn to_dot(&self, label: impl Fn(&O) -> String) -> String {
        let mut s = String::from("digraph dfao {\n  rankdir=LR;\n");
        let _ = writeln!(s, "  start [shape=point];\n  start -> q{};", self.initial);
        for q in 0..self.num_states() {
            let _ = writeln!(s, "  q{q} [label=\"{q}/{}\"];", label(&self.outputs[q]).replace('"', "'"));
        }
        for q in 0..self.num_states() {
            let mut by_target: BTreeMap<usize, Vec<String>> = BTreeMap::new();
            for sym in 0..self.alphabet_size() {
                by_target.entry(self.step(q, sym)).or_default().push(self.symbol_text(sym, ","));
            }
            for (t, syms) in by_target {
                let _ = writeln!(s, "  q{q} -> q{t} [label=\"{}\"];", syms.join(" "));
            }
        }
        s.push_str("}\n");
        s
    }

    fn symbol_digits(&self, sym: usize) -> Vec<usize> {
        let k = self.base as usize;
        (0..self.tracks).map(|t| sym / k.pow(t) % k).collect()
    }

    fn symbol_text(&self, sym: usize, sep: &str) -> String {
        self.symbol_digits(sym)
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(sep)
    }
}

impl Dfa {
    /// Complement of the accepted set.
    pub fn complement(&self) -> Dfa {
        self.map_outputs(|b| !b)
    }

    /// True iff infinitely many canonical inputs are accepted.
    pub fn is_infinite(&self) -> Result<bool, AutomatonError> {
        let d = self.to_lsd()?;
        // Product with "last symbol nonzero"; canonical lsd words end in a nonzero symbol.
        let n = d.num_states();
        let alpha = d.alphabet_size();
        let node = |q: usize, nz: bool| 2 * q + nz as usize;
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); 2 * n];
        let mut pred: Vec<Vec<usize>> = vec![Vec::new(); 2 * n];
        for q in 0..n {
            for nz in [false, true] {
                for s in 0..alpha {
                    let t = node(d.step(q, s), s != 0);
                    succ[node(q, nz)].push(t);
                    pred[t].push(node(q, nz));
                }
            }
        }
        let start = node(d.initial, false);
        let mut reach = vec![false; 2 * n];
        let mut stack = vec![start];
        reach[start] = true;
        while let Some(x) = stack.pop() {
            for &y in &succ[x] {
                if !reach[y] {
                    reach[y] = true;
                    stack.push(y);
                }
            }
        }
        let mut coreach = vec![false; 2 * n];
        let mut stack: Vec<usize> = (0..n).filter(|&q| d.outputs[q]).map(|q| node(q, true)).collect();
        for &x in &stack {
            coreach[x] = true;
        }
        while let Some(x) = stack.pop() {
            for &y in &pred[x] {
                if !coreach[y] {
                    coreach[y] = true;
                    stack.push(y);
                }
            }
        }
        let live: Vec<bool> = (0..2 * n).map(|x| reach[x] && coreach[x]).collect();
        Ok(has_cycle(&succ, &live))
    }

    /// Realizable gaps between consecutive accepted indices, up to `c_max`.
    pub fn gap_values(&self, c_max: usize) -> Result<GapReport, AutomatonError> {
        self.require_lsd()?;
        self.require_single_track()?;
        let win = self.window(c_max)?;
        let classify = |v: &Vec<bool>| -> Option<Option<usize>> {
            if !v[0] {
                return None;
            }
            Some((1..=c_max).find(|&j| v[j]))
        };
        let mut gaps = BTreeMap::new();
        let mut exceeds = None;
        for (o, w) in win.output_witnesses() {
            match classify(&o) {
                Some(Some(c)) => {
                    let e = gaps.entry(c).or_insert(w);
                    if w < *e {
                        *e = w;
                    }
                }
                Some(None) => {
                    if exceeds.is_none_or(|e: Option<u64>| w < e) {
                        exceeds = Some(w);
                    }
                }
                None => {}
            }
        }
        Ok(GapReport {
            c_max,
            gaps,
            exceeds_c_max: exceeds,
        })
    }
}

/// Realizable gap sizes with a witness index for each.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GapReport {
    pub c_max: usize,
    pub gaps: BTreeMap<usize, Option<u64>>,
    /// Witness of an accepted index followed by no accepted index within `c_max`.
    pub exceeds_c_max: Option<Option<u64>>,
}

fn has_cycle(succ: &[Vec<usize>], live: &[bool]) -> bool {
    // Iterative three-colour DFS restricted to live nodes.
    let n = succ.len();
    let mut colour = vec![0u8; n];
    for root in 0..n {
        if !live[root] || colour[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        colour[root] = 1;
        while let Some(&mut (x, ref mut i)) = stack.last_mut() {
            if *i < succ[x].len() {
                let y = succ[x][*i];
                *i += 1;
                if !live[y] {
                    continue;
                }
                match colour[y] {
                    0 => {
                        colour[y] = 1;
                        stack.push((y, 0));
                    }
                    1 => return true,
                    _ => {}
                }
            } else {
                colour[x] = 2;
                stack.pop();
            }
        }
    }
    false
}

/// Output values that can be written in and read from Walnut files.
pub trait WalnutSymbol: Sized {
    fn to_walnut(&self) -> String;
    fn from_walnut(s: &str) -> Option<Self>;
}

macro_rules! walnut_int {
    ($($t:ty),*) => {$(
        impl WalnutSymbol for $t {
            fn to_walnut(&self) -> String {
                self.to_string()
            }
            fn from_walnut(s: &str) -> Option<Self> {
                s.parse().ok()
            }
        }
    )*};
}
walnut_int!(u8, u32, u64, i64, usize);

impl WalnutSymbol for bool {
    fn to_walnut(&self) -> String {
        if *self { "1" } else { "0" }.to_string()
    }
    fn from_walnut(s: &str) -> Option<Self> {
        match s {
            "1" => Some(true),
            "0" => Some(false),
            _ => None,
        }
    }
}

/// Parsed Walnut header: base, tracks and direction.
pub(crate) fn parse_walnut_header(line: &str, lineno: usize) -> Result<(u32, u32, Direction), AutomatonError> {
    let syntax = |msg: String| AutomatonError::Syntax { line: lineno, msg };
    let mut base = None;
    let mut direction = None;
    let mut tracks = 0u32;
    let mut rest = line.trim();
    while !rest.is_empty() {
        let (tok, tail) = if rest.starts_with('{') {
            let end = rest
                .find('}')
                .ok_or_else(|| syntax("unterminated alphabet".into()))?;
            rest.split_at(end + 1)
        } else {
            let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
            rest.split_at(end)
        };
        rest = tail.trim_start();
        let (dir, k) = if let Some(set) = tok.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
            let digits: Result<Vec<u32>, _> = set.split(',').map(|d| d.trim().parse::<u32>()).collect();
            let digits = digits.map_err(|_| syntax(format!("unsupported alphabet `{tok}`")))?;
            if digits.iter().enumerate().any(|(i, &d)| d != i as u32) || digits.len() < 2 {
                return Err(syntax(format!("alphabet `{tok}` is not {{0,…,k-1}}")));
            }
            (Direction::Msd, digits.len() as u32)
        } else if let Some(k) = tok.strip_prefix("lsd_") {
            (Direction::Lsd, k.parse().map_err(|_| syntax(format!("unsupported numeration system `{tok}`")))?)
        } else if let Some(k) = tok.strip_prefix("msd_") {
            (Direction::Msd, k.parse().map_err(|_| syntax(format!("unsupported numeration system `{tok}`")))?)
        } else {
            return Err(syntax(format!("unrecognized header token `{tok}`")));
        };
        if k < 2 {
            return Err(syntax(format!("base {k} < 2")));
        }
        if base.is_some_and(|b| b != k) || direction.is_some_and(|d| d != dir) {
            return Err(syntax("tracks with different numeration systems".into()));
        }
        base = Some(k);
        direction = Some(dir);
        tracks += 1;
    }
    match (base, direction) {
        (Some(b), Some(d)) => Ok((b, tracks, d)),
        _ => Err(syntax("missing header".into())),
    }
}

pub(crate) fn walnut_header(base: u32, tracks: u32, direction: Direction) -> String {
    vec![format!("{direction}_{base}"); tracks as usize].join(" ")
}

/// Meaningful lines with 1-based line numbers; comments and blanks dropped.
pub(crate) fn walnut_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = match l.find("//") {
            Some(p) => &l[..p],
            None => l,
        };
        let l = l.trim();
        (!l.is_empty() && !l.starts_with('#')).then_some((i + 1, l))
    })
}

impl<O: Output + WalnutSymbol> Dfao<O> {
    /// Parses a Walnut automaton or word automaton; state 0 is initial.
    pub fn parse_walnut(text: &str) -> Result<Self, AutomatonError> {
        let mut lines = walnut_lines(text);
        let (hl, header) = lines.next().ok_or(AutomatonError::Syntax {
            line: 0,
            msg: "empty file".into(),
        })?;
        let (base, tracks, direction) = parse_walnut_header(header, hl)?;
        let alpha = (base as usize).pow(tracks);
        let mut states: BTreeMap<usize, (O, Vec<Option<(usize, usize)>>)> = BTreeMap::new();
        let mut current: Option<usize> = None;
        for (ln, line) in lines {
            let syntax = |msg: String| AutomatonError::Syntax { line: ln, msg };
            if let Some((lhs, rhs)) = line.split_once("->") {
                let q = current.ok_or_else(|| syntax("transition before any state".into()))?;
                let digits: Result<Vec<usize>, _> = lhs.split_whitespace().map(str::parse::<usize>).collect();
                let digits = digits.map_err(|_| syntax(format!("bad input symbol `{}`", lhs.trim())))?;
                if digits.len() != tracks as usize || digits.iter().any(|&d| d >= base as usize) {
                    return Err(syntax(format!("input symbol `{}` does not fit the header", lhs.trim())));
                }
                let targets: Vec<&str> = rhs.split_whitespace().collect();
                if targets.len() != 1 {
                    return Err(syntax("expected exactly one target state".into()));
                }
                let t: usize = targets[0]
                    .parse()
                    .map_err(|_| syntax(format!("bad target `{}`", targets[0])))?;
                let sym = digits
                    .iter()
                    .enumerate()
                    .map(|(i, d)| d * (base as usize).pow(i as u32))
                    .sum::<usize>();
                let slot = &mut states.get_mut(&q).unwrap().1[sym];
                if slot.is_some() {
                    return Err(syntax(format!("duplicate transition on `{}`", lhs.trim())));
                }
                *slot = Some((t, ln));
            } else {
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() != 2 {
                    return Err(syntax(format!("expected `state output`, found `{line}`")));
                }
                let q: usize = parts[0].parse().map_err(|_| syntax(format!("bad state `{}`", parts[0])))?;
                let o = O::from_walnut(parts[1]).ok_or_else(|| syntax(format!("bad output `{}`", parts[1])))?;
                if states.insert(q, (o, vec![None; alpha])).is_some() {
                    return Err(syntax(format!("state {q} declared twice")));
                }
                current = Some(q);
            }
        }
        if !states.contains_key(&0) {
            return Err(AutomatonError::Syntax {
                line: hl,
                msg: "no initial state 0".into(),
            });
        }
        let ids: HashMap<usize, usize> = states.keys().enumerate().map(|(i, &q)| (q, i)).collect();
        let mut delta = Vec::with_capacity(states.len() * alpha);
        let mut outputs = Vec::with_capacity(states.len());
        let dummy = Dfao::<O> {
            base,
            tracks,
            direction,
            initial: 0,
            delta: Vec::new(),
            outputs: Vec::new(),
        };
        for (&q, (o, trans)) in &states {
            for (sym, t) in trans.iter().enumerate() {
                match t {
                    None => {
                        return Err(AutomatonError::NotTotal {
                            state: q,
                            symbol: dummy.symbol_text(sym, " "),
                        })
                    }
                    Some((t, ln)) => {
                        let id = *ids
                            .get(t)
                            .ok_or(AutomatonError::DanglingState { line: *ln, state: *t })?;
                        delta.push(id);
                    }
                }
            }
            outputs.push(o.clone());
        }
        Dfao::new(base, tracks, direction, ids[&0], delta, outputs)
    }

    /// Walnut text; states are renumbered in BFS order so the initial state is 0.
    pub fn to_walnut(&self) -> String {
        let order = self.reachable();
        let mut id = vec![usize::MAX; self.num_states()];
        for (i, &q) in order.iter().enumerate() {
            id[q] = i;
        }
        let mut s = String::new();
        let _ = writeln!(
            s,
            "// {}-first base-{} automaton, {} states",
            self.direction,
            self.base,
            order.len()
        );
        let _ = writeln!(s, "{}", walnut_header(self.base, self.tracks, self.direction));
        for (i, &q) in order.iter().enumerate() {
            if i > 0 {
                s.push('\n');
            }
            let _ = writeln!(s, "{} {}", i, self.outputs[q].to_walnut());
            for sym in 0..self.alphabet_size() {
                let _ = writeln!(s, "{} -> {}", self.symbol_text(sym, " "), id[self.step(q, sym)]);
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ptm() -> Dfao<u8> {
        Dfao::new(2, 1, Direction::Lsd, 0, vec![0, 1, 1, 0], vec![0, 1]).unwrap()
    }

    fn t(n: u64) -> u8 {
        (n.count_ones() % 2) as u8
    }

    const FIGURE_ONE: &str = "msd_2\n0 0\n0 -> 0\n1 -> 1\n\n1 1\n0 -> 1\n1 -> 0\n";

    #[test]
    fn parse_ptm_figure() {
        let a = Dfao::<u8>::parse_walnut(FIGURE_ONE).unwrap();
        assert_eq!(a.num_states(), 2);
        assert_eq!(*a.evaluate(3), 0);
        for n in 0..64 {
            assert_eq!(*a.evaluate(n), t(n));
        }
    }

    #[test]
    fn walnut_round_trip_is_byte_stable() {
        let text = ptm().to_walnut();
        let back = Dfao::<u8>::parse_walnut(&text).unwrap();
        assert_eq!(back.to_walnut(), text);
    }

    #[test]
    fn missing_transition_is_named() {
        let err = Dfao::<u8>::parse_walnut("lsd_2\n0 0\n0 -> 0\n").unwrap_err();
        assert_eq!(
            err,
            AutomatonError::NotTotal {
                state: 0,
                symbol: "1".into()
            }
        );
        let err = Dfao::<u8>::parse_walnut("lsd_2\n0 0\n0 -> 0\n1 -> 7\n").unwrap_err();
        assert_eq!(err, AutomatonError::DanglingState { line: 4, state: 7 });
        let err = Dfao::<u8>::parse_walnut("lsd_fib\n0 0\n").unwrap_err();
        assert!(matches!(err, AutomatonError::Syntax { line: 1, .. }));
    }

    #[test]
    fn bare_alphabet_and_multitrack_headers() {
        let a = Dfao::<u8>::parse_walnut("{0,1}\n0 0\n0 -> 0\n1 -> 1\n1 1\n0 -> 1\n1 -> 0\n").unwrap();
        assert_eq!(a.direction(), Direction::Msd);
        let m = Dfao::<bool>::parse_walnut(
            "lsd_2 lsd_2\n0 1\n0 0 -> 0\n0 1 -> 1\n1 0 -> 1\n1 1 -> 0\n1 0\n0 0 -> 1\n0 1 -> 1\n1 0 -> 1\n1 1 -> 1\n",
        )
        .unwrap();
        assert_eq!(m.tracks(), 2);
        assert_eq!(m.alphabet_size(), 4);
        assert_eq!(Dfao::<bool>::parse_walnut(&m.to_walnut()).unwrap().to_walnut(), m.to_walnut());
    }

    #[test]
    fn minimize_collapses_duplicates() {
        let dup = Dfao::new(2, 1, Direction::Lsd, 0, vec![2, 1, 3, 0, 0, 3, 1, 2], vec![0u8, 1, 0, 1]).unwrap();
        let m = dup.minimize();
        assert_eq!(m.num_states(), 2);
        for n in 0..256 {
            assert_eq!(m.evaluate(n), dup.evaluate(n));
        }
        assert_eq!(m.minimize(), m);
    }

    #[test]
    fn shift_matches_scan() {
        let s = ptm().shift_by_constant(3).unwrap();
        let got: Vec<u8> = (0..5).map(|n| *s.evaluate(n)).collect();
        assert_eq!(got, vec![0, 1, 0, 0, 1]);
        let s2 = ptm().shift_by_constant(1).unwrap().shift_by_constant(1).unwrap();
        let s3 = ptm().shift_by_constant(2).unwrap();
        for n in 0..4096 {
            assert_eq!(s2.evaluate(n), s3.evaluate(n));
            assert_eq!(*s3.evaluate(n), t(n + 2));
        }
    }

    #[test]
    fn shift_back_patches_prefix() {
        let s = ptm().shift_back(&[7, 8, 9]).unwrap();
        assert_eq!(*s.evaluate(0), 7);
        assert_eq!(*s.evaluate(2), 9);
        for n in 3..2048 {
            assert_eq!(*s.evaluate(n), t(n - 3));
        }
        assert!(s.is_zero_saturated());
    }

    #[test]
    fn window_realizes_scanned_triples() {
        let w = ptm().window(2).unwrap();
        let scanned: BTreeSet<Vec<u8>> = (0..4096).map(|n| vec![t(n), t(n + 1), t(n + 2)]).collect();
        assert_eq!(w.realized_outputs(), scanned);
        assert_eq!(*w.evaluate(3), vec![0, 1, 0]);
    }

    #[test]
    fn block_and_infinitude() {
        let b = ptm().block_dfa(&[0, 1, 0]).unwrap();
        assert!(*b.evaluate(3) && *b.evaluate(10));
        assert!(!*b.evaluate(0) && !*b.evaluate(1) && !*b.evaluate(2));
        assert!(b.is_infinite().unwrap());
        let never = ptm().block_dfa(&[0, 0, 0, 0, 0]).unwrap();
        assert_eq!(never.realized_outputs(), BTreeSet::from([false]));
        assert!(!never.is_infinite().unwrap());
    }

    #[test]
    fn singleton_language_is_finite() {
        // Accepts exactly 5 = 101 (lsd).
        let d = Dfa::new(
            2,
            1,
            Direction::Lsd,
            0,
            vec![4, 1, 2, 4, 4, 3, 3, 4, 4, 4],
            vec![false, false, false, true, false],
        )
        .unwrap();
        let d = d.zero_saturate().unwrap();
        let accepted: Vec<u64> = (0..64).filter(|&n| *d.evaluate(n)).collect();
        assert_eq!(accepted, vec![5]);
        assert!(!d.is_infinite().unwrap());
    }

    #[test]
    fn gaps_of_ptm_block() {
        let b = ptm().block_dfa(&[0, 1, 0]).unwrap();
        let g = b.gap_values(16).unwrap();
        assert_eq!(g.gaps.keys().copied().collect::<Vec<_>>(), vec![3, 5, 7, 9]);
        assert_eq!(g.exceeds_c_max, None);
        for (c, w) in &g.gaps {
            let n = w.unwrap();
            assert!(*b.evaluate(n) && *b.evaluate(n + *c as u64));
        }
    }

    #[test]
    fn reversal_preserves_values() {
        let msd = ptm().reverse_direction().unwrap();
        assert_eq!(msd.direction(), Direction::Msd);
        for n in 0..4096 {
            assert_eq!(*msd.evaluate(n), t(n));
        }
        let back = msd.reverse_direction().unwrap();
        assert_eq!(back.direction(), Direction::Lsd);
        for n in 0..4096 {
            assert_eq!(*back.evaluate(n), t(n));
        }
    }

    #[test]
    fn zero_saturation_repairs_or_rejects() {
        // States 1 and 2 alternate under 0 with different outputs.
        let bad = Dfao::new(2, 1, Direction::Lsd, 0, vec![0, 1, 2, 0, 1, 0], vec![0u8, 1, 0]).unwrap();
        assert_eq!(bad.zero_saturate(), Err(AutomatonError::UnstableZeroCycle { state: 1 }));
        // State 2 is an odd-parity state with a wrong output that falls into the true odd state.
        let perturbed = Dfao::new(2, 1, Direction::Lsd, 0, vec![0, 2, 1, 0, 1, 0], vec![0u8, 1, 0]).unwrap();
        assert_eq!(*perturbed.evaluate(1), 0);
        let fixed = perturbed.zero_saturate().unwrap();
        assert!(fixed.is_zero_saturated());
        for n in 0..256 {
            assert_eq!(*fixed.evaluate(n), t(n));
        }
    }

    #[test]
    fn product_with_constant_keeps_classes() {
        let c = Dfao::constant(2, Direction::Lsd, 9u8);
        let p = ptm().product(&c, |x, _| *x).unwrap().minimize();
        assert_eq!(p, ptm().minimize());
        let mismatched = Dfao::constant(3, Direction::Lsd, 0u8);
        assert!(ptm().product(&mismatched, |x, _| *x).is_err());
    }

    #[test]
    fn dot_mentions_every_state() {
        let dot = ptm().to_dot(|o| o.to_string());
        assert!(dot.contains("q0 -> q1") && dot.contains("q1 [label=\"1/1\"]"));
    }
}
