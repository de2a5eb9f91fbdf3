//! The ratio-pair transducer and the window construction of ratio automata.
//!
//! A state `(X, Y)` stands for two consecutive ratios. Reading 0 moves to
//! `(Y, a + b/Y)`, reading 1 to `(Y, a/Y + b/(XY))`; every transition outputs `X`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::automata::{parse_walnut_header, walnut_lines, AutomatonError, Dfao, Direction};
use crate::polyrat::{InternTable, PolyZab, RatFn};
use crate::seqcore::{seed_ids, symbolic_ratio_ids, symbolic_tilde_ratio_ids, RatioEngine};

/// Largest truncation depth accepted by default.
pub const MAX_C: usize = 16;

#[derive(Debug, Error)]
pub enum TransduceError {
    #[error("truncation depth {c} outside 3..={max}")]
    DepthOutOfRange { c: usize, max: usize },
    #[error("bounded-gap certificate violated: window {window:?} at index {start:?} contains no reset")]
    NoReset { window: Vec<u8>, start: Option<u64> },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

/// A transducer state: interned ratios `X`, `Y` and BFS depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RatPairState {
    pub x: usize,
    pub y: usize,
    pub depth: usize,
}

/// Depth-truncated transducer; state 0 is `(1, a + b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransducerTc {
    pub c: usize,
    pub states: Vec<RatPairState>,
    /// `transitions[q][bit] = (target, output id)`.
    pub transitions: Vec<[(usize, usize); 2]>,
}

fn check_depth(c: usize) -> Result<(), TransduceError> {
    if (3..=MAX_C).contains(&c) {
        Ok(())
    } else {
        Err(TransduceError::DepthOutOfRange { c, max: MAX_C })
    }
}

/// Breadth-first construction; states at depth `c − 1` return to the initial state.
pub fn build_transducer(c: usize, table: &mut InternTable) -> Result<TransducerTc, TransduceError> {
    check_depth(c)?;
    let (one, s) = seed_ids(table);
    let mut eng = RatioEngine::new(table);
    let mut states = vec![RatPairState { x: one, y: s, depth: 0 }];
    let mut index: HashMap<(usize, usize), usize> = HashMap::from([((one, s), 0)]);
    let mut transitions = Vec::new();
    let mut next = 0;
    while next < states.len() {
        let st = states[next];
        let mut row = [(0, st.x); 2];
        if st.depth + 1 < c {
            for bit in 0..2u8 {
                let y2 = eng.next(st.x, st.y, bit);
                let key = (st.y, y2);
                let target = *index.entry(key).or_insert_with(|| {
                    states.push(RatPairState {
                        x: st.y,
                        y: y2,
                        depth: st.depth + 1,
                    });
                    states.len() - 1
                });
                row[bit as usize] = (target, st.x);
            }
        }
        transitions.push(row);
        next += 1;
    }
    Ok(TransducerTc { c, states, transitions })
}

impl TransducerTc {
    /// Runs the transducer on a word, returning the output ids.
    pub fn run(&self, word: &[u8]) -> Vec<usize> {
        let mut q = 0;
        word.iter()
            .map(|&bit| {
                let (t, o) = self.transitions[q][bit as usize];
                q = t;
                o
            })
            .collect()
    }

    /// Distinct output ids.
    pub fn output_alphabet(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.transitions.iter().flat_map(|r| r.iter().map(|t| t.1)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Walnut transducer text; outputs are intern ids.
    pub fn to_walnut(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "// ratio-pair transducer, depth {}, {} states", self.c, self.states.len());
        s.push_str("{0,1}\n");
        for (q, row) in self.transitions.iter().enumerate() {
            if q > 0 {
                s.push('\n');
            }
            let _ = writeln!(s, "{q}");
            for (bit, (t, o)) in row.iter().enumerate() {
                let _ = writeln!(s, "{bit} -> {t} / {o}");
            }
        }
        s
    }

    /// State labels as canonical rational-function strings.
    pub fn labels(&self, table: &InternTable) -> TransducerLabels {
        let mut outputs = BTreeMap::new();
        for o in self.output_alphabet() {
            outputs.insert(o, table.get(o).to_string());
        }
        TransducerLabels {
            c: self.c,
            states: self
                .states
                .iter()
                .enumerate()
                .map(|(id, st)| StateLabel {
                    id,
                    depth: st.depth,
                    x: st.x,
                    y: st.y,
                    x_label: table.get(st.x).to_string(),
                    y_label: table.get(st.y).to_string(),
                })
                .collect(),
            outputs,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StateLabel {
    pub id: usize,
    pub depth: usize,
    pub x: usize,
    pub y: usize,
    pub x_label: String,
    pub y_label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransducerLabels {
    pub c: usize,
    pub states: Vec<StateLabel>,
    pub outputs: BTreeMap<usize, String>,
}

/// Parsed Walnut transducer: `rows[q][bit] = (target, output)`.
pub fn parse_walnut_transducer(text: &str) -> Result<Vec<Vec<(usize, usize)>>, TransduceError> {
    let mut lines = walnut_lines(text);
    let (hl, header) = lines.next().ok_or(TransduceError::Syntax {
        line: 0,
        msg: "empty file".into(),
    })?;
    let (base, tracks, _) = parse_walnut_header(header, hl)?;
    let alpha = (base as usize).pow(tracks);
    let mut rows: BTreeMap<usize, Vec<Option<(usize, usize)>>> = BTreeMap::new();
    let mut current = None;
    for (ln, line) in lines {
        let syntax = |msg: &str| TransduceError::Syntax {
            line: ln,
            msg: msg.to_string(),
        };
        if let Some((lhs, rhs)) = line.split_once("->") {
            let q = current.ok_or_else(|| syntax("transition before any state"))?;
            let sym: usize = lhs.trim().parse().map_err(|_| syntax("bad input symbol"))?;
            let (t, o) = rhs.split_once('/').ok_or_else(|| syntax("expected `target / output`"))?;
            let t: usize = t.trim().parse().map_err(|_| syntax("bad target"))?;
            let o: usize = o.trim().parse().map_err(|_| syntax("bad output"))?;
            let row: &mut Vec<Option<(usize, usize)>> = rows.get_mut(&q).unwrap();
            if sym >= alpha || row[sym].is_some() {
                return Err(syntax("input symbol out of range or repeated"));
            }
            row[sym] = Some((t, o));
        } else {
            let q: usize = line.parse().map_err(|_| syntax("expected a state number"))?;
            rows.insert(q, vec![None; alpha]);
            current = Some(q);
        }
    }
    let n = rows.len();
    rows.into_iter()
        .enumerate()
        .map(|(i, (q, row))| {
            if i != q {
                return Err(TransduceError::Syntax {
                    line: 0,
                    msg: format!("states must be numbered 0..{n}"),
                });
            }
            row.into_iter()
                .enumerate()
                .map(|(sym, t)| match t {
                    Some((t, _)) if t >= n => Err(TransduceError::Automaton(AutomatonError::DanglingState {
                        line: 0,
                        state: t,
                    })),
                    Some(x) => Ok(x),
                    None => Err(TransduceError::Automaton(AutomatonError::NotTotal {
                        state: q,
                        symbol: sym.to_string(),
                    })),
                })
                .collect()
        })
        .collect()
}

/// Driving input for the window construction.
#[derive(Clone, Copy, Debug)]
pub enum WindowInput<'a> {
    /// One driving sequence `u`.
    Single(&'a Dfao<u8>),
    /// Two driving sequences, encoded as `2 u_n + v_n`.
    Pair(&'a Dfao<u8>, &'a Dfao<u8>),
}

fn pair_seed(table: &mut InternTable) -> usize {
    let s = &PolyZab::a() + &PolyZab::b();
    let d2 = &s.mul_a() + &PolyZab::b();
    table.intern(RatFn::new(d2, s).expect("nonzero"))
}

/// Ratio at offset `c` of a window, from the latest reset at offset `< c`.
fn window_value(w: &[u8], c: usize, pair: bool, eng: &mut RatioEngine, seeds: (usize, usize, usize)) -> Option<usize> {
    let (one, s, h2) = seeds;
    if pair {
        let u = |i: usize| w[i] >> 1;
        let v = |i: usize| w[i] & 1;
        let i = (0..c).rev().find(|&i| u(i) != u(i + 1) && (v(i), v(i + 1), v(i + 2)) == (0, 1, 0))?;
        let (mut x, mut y, start) = if u(i) == 0 { (one, s, i + 2) } else { (h2, h2, i + 1) };
        if start > c {
            return Some(if i == c { x } else { y });
        }
        for o in start..=c {
            let z = eng.next_tilde(x, y, u(o + 1), v(o + 1));
            x = y;
            y = z;
        }
        Some(y)
    } else {
        let i = (0..c).rev().find(|&i| w[i..i + 3] == [0, 1, 0])?;
        let (mut x, mut y) = (one, s);
        for o in i + 2..=c {
            let z = eng.next(x, y, w[o + 1]);
            x = y;
            y = z;
        }
        Some(y)
    }
}

/// DFAO computing `n ↦ id of h(n)` from windows of the driving sequence,
/// valid when every index has a reset within the following `c` positions.
pub fn transduce_via_windows(
    input: WindowInput,
    c: usize,
    table: &mut InternTable,
) -> Result<Dfao<usize>, TransduceError> {
    check_depth(c)?;
    let (driver, pair) = match input {
        WindowInput::Single(u) => (u.to_lsd()?, false),
        WindowInput::Pair(u, v) => (u.to_lsd()?.product(&v.to_lsd()?, |x, y| 2 * x + y)?.minimize(), true),
    };
    let win = driver.window(c + 2)?.shift_by_constant(3)?;
    let (one, s) = seed_ids(table);
    let h2 = pair_seed(table);
    let witnesses = win.output_witnesses();
    let mut values: HashMap<Vec<u8>, usize> = HashMap::new();
    {
        let mut eng = RatioEngine::new(table);
        for (w, n) in &witnesses {
            match window_value(w, c, pair, &mut eng, (one, s, h2)) {
                Some(id) => {
                    values.insert(w.clone(), id);
                }
                None => {
                    return Err(TransduceError::NoReset {
                        window: w.clone(),
                        start: n.map(|n| n + 3),
                    })
                }
            }
        }
    }
    let mapped = win.map_outputs(|w| values[w]);
    let p = c + 3;
    let prefix: Vec<u8> = (0..p as u64 + 3).map(|n| *driver.evaluate(n)).collect();
    let patch = if pair {
        let u: Vec<u8> = prefix.iter().map(|x| x >> 1).collect();
        let v: Vec<u8> = prefix.iter().map(|x| x & 1).collect();
        symbolic_tilde_ratio_ids(&u, &v, p, table)
    } else {
        symbolic_ratio_ids(&prefix, p, table)
    };
    Ok(mapped.shift_back(&patch)?.minimize())
}

/// Checks that the reset block occurs infinitely often with gaps at most `c`.
pub fn certify_gaps(u: &Dfao<u8>, c: usize) -> Result<bool, TransduceError> {
    let block = u.to_lsd()?.block_dfa(&[0, 1, 0])?;
    Ok(block.is_infinite()? && block.gap_values(c)?.exceeds_c_max.is_none())
}

impl TransducerTc {
    /// Direction used by emitted ratio automata.
    pub fn direction(&self) -> Direction {
        Direction::Lsd
    }
}
