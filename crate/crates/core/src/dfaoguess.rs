//! Kernel-based automaton guessing and exact verification of ratio automata.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::automata::{AutomatonError, Dfao, Direction, Output};
use crate::polyrat::{PolyZab, RatFn};

#[derive(Debug, Error)]
pub enum GuessError {
    #[error("horizon {horizon} is below base × max_states = {needed}; refusing to guess")]
    InsufficientHorizon { horizon: usize, needed: usize },
    #[error("more than {max_states} kernel classes at horizon {horizon}: not plausibly automatic at this horizon")]
    TooManyStates { max_states: usize, horizon: usize },
    #[error("kernel element {modulus}n + {residue} has only {visible} visible terms (need {needed})")]
    InsufficientEvidence {
        modulus: u64,
        residue: u64,
        visible: usize,
        needed: usize,
    },
    #[error("automaton output {0} has no rational-function label")]
    MissingLabel(usize),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
}

/// Parameters of the kernel guesser.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuessConfig {
    pub base: u32,
    pub horizon: usize,
    pub max_states: usize,
    pub direction: Direction,
    /// Smallest visible prefix accepted for a kernel element.
    pub min_evidence: usize,
}

impl Default for GuessConfig {
    fn default() -> Self {
        GuessConfig {
            base: 2,
            horizon: 1 << 16,
            max_states: 4096,
            direction: Direction::Lsd,
            min_evidence: 4,
        }
    }
}

/// Guesses a DFAO for `values` by identifying k-kernel elements
/// `n ↦ values[k^j n + i]` whose visible prefixes agree.
pub fn guess_dfao<O: Output>(values: &[O], cfg: &GuessConfig) -> Result<Dfao<O>, GuessError> {
    let k = cfg.base as usize;
    let horizon = cfg.horizon.min(values.len());
    let needed = k * cfg.max_states;
    if horizon < needed {
        return Err(GuessError::InsufficientHorizon { horizon, needed });
    }
    let prefix = |modulus: usize, residue: usize| -> Vec<&O> {
        values[..horizon].iter().skip(residue).step_by(modulus).collect()
    };
    // Kernel states as (k^j, i) with their visible prefixes.
    let mut states: Vec<(usize, usize)> = vec![(1, 0)];
    let mut prefixes: Vec<Vec<&O>> = vec![prefix(1, 0)];
    let mut delta: Vec<usize> = Vec::new();
    let mut next = 0;
    while next < states.len() {
        let (m, i) = states[next];
        for d in 0..k {
            let (cm, ci) = (m * k, i + d * m);
            let p = prefix(cm, ci);
            if p.len() < cfg.min_evidence {
                return Err(GuessError::InsufficientEvidence {
                    modulus: cm as u64,
                    residue: ci as u64,
                    visible: p.len(),
                    needed: cfg.min_evidence,
                });
            }
            let found = prefixes
                .iter()
                .position(|q| q.len() >= p.len() && q[..p.len()] == p[..]);
            let id = match found {
                Some(id) => id,
                None => {
                    if states.len() == cfg.max_states {
                        return Err(GuessError::TooManyStates {
                            max_states: cfg.max_states,
                            horizon,
                        });
                    }
                    states.push((cm, ci));
                    prefixes.push(p);
                    states.len() - 1
                }
            };
            delta.push(id);
        }
        next += 1;
    }
    let outputs = prefixes.iter().map(|p| p[0].clone()).collect();
    let dfao = Dfao::new(cfg.base, 1, Direction::Lsd, 0, delta, outputs)?.minimize();
    Ok(match cfg.direction {
        Direction::Lsd => dfao,
        Direction::Msd => dfao.reverse_direction()?,
    })
}

/// One symbolic identity check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationCheck {
    /// Output ids involved, oldest first.
    pub ids: Vec<usize>,
    /// Label of the newest id.
    pub actual: String,
    /// Value the recurrence demands.
    pub expected: String,
    pub holds: bool,
    /// An index n at which the tuple is realized.
    pub witness: Option<u64>,
}

/// Outcome of verifying a ratio automaton.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub states: usize,
    pub outputs: usize,
    pub base_cases: Vec<RelationCheck>,
    /// Realized `(K(n), K(n+1))` with `u_{n+2} = 0`, checked against `h_y = a + b/h_x`.
    pub pairs: Vec<RelationCheck>,
    /// Realized `(K(n), K(n+1), K(n+2))` with `u_{n+3} = 1`, checked against `h_z = a/h_y + b/(h_y h_x)`.
    pub triples: Vec<RelationCheck>,
    pub proved: bool,
}

impl Certificate {
    /// First failed check, if any.
    pub fn counterexample(&self) -> Option<&RelationCheck> {
        self.base_cases
            .iter()
            .chain(&self.pairs)
            .chain(&self.triples)
            .find(|c| !c.holds)
    }

    pub fn pair_ids(&self) -> BTreeSet<(usize, usize)> {
        self.pairs.iter().map(|c| (c.ids[0], c.ids[1])).collect()
    }

    pub fn triple_ids(&self) -> BTreeSet<(usize, usize, usize)> {
        self.triples.iter().map(|c| (c.ids[0], c.ids[1], c.ids[2])).collect()
    }
}

fn ab() -> (RatFn, RatFn) {
    (RatFn::from_poly(PolyZab::a()), RatFn::from_poly(PolyZab::b()))
}

/// Proves `h(n) = labels[K(n)]` for all n by checking the base cases and the
/// recurrence on every realized pair and triple.
pub fn verify_ratio_dfao(k: &Dfao<usize>, u: &Dfao<u8>, labels: &[RatFn]) -> Result<Certificate, GuessError> {
    let k = k.to_lsd()?;
    let u = u.to_lsd()?;
    let label = |id: usize| labels.get(id).ok_or(GuessError::MissingLabel(id));
    for &o in &k.realized_outputs() {
        label(o)?;
    }
    let (a, b) = ab();
    let sum = RatFn::from_poly(&PolyZab::a() + &PolyZab::b());
    let check = |ids: Vec<usize>, expected: RatFn, witness: Option<u64>| -> Result<RelationCheck, GuessError> {
        let actual = label(*ids.last().unwrap())?;
        Ok(RelationCheck {
            holds: *actual == expected,
            actual: actual.to_string(),
            expected: expected.to_string(),
            ids,
            witness,
        })
    };
    let base_cases = vec![
        check(vec![*k.evaluate(0)], RatFn::one(), Some(0))?,
        check(vec![*k.evaluate(1)], sum, Some(1))?,
    ];

    let window = k.window(2)?;
    let gate = u.shift_by_constant(2)?.product(&u.shift_by_constant(3)?, |x, y| (*x, *y))?;
    let joint = window.product(&gate, |w, g| (w.clone(), *g))?.minimize();
    let mut pairs: BTreeMap<(usize, usize), Option<u64>> = BTreeMap::new();
    let mut triples: BTreeMap<(usize, usize, usize), Option<u64>> = BTreeMap::new();
    for ((w, (u2, u3)), n) in joint.output_witnesses() {
        if u2 == 0 {
            let e = pairs.entry((w[0], w[1])).or_insert(n);
            *e = (*e).min(n);
        }
        if u3 == 1 {
            let e = triples.entry((w[0], w[1], w[2])).or_insert(n);
            *e = (*e).min(n);
        }
    }
    let mut pair_checks = Vec::new();
    for (&(x, y), &n) in &pairs {
        let hx = label(x)?;
        let expected = a.add(&b.div(hx).map_err(|_| GuessError::MissingLabel(x))?);
        pair_checks.push(check(vec![x, y], expected, n)?);
    }
    let mut triple_checks = Vec::new();
    for (&(x, y, z), &n) in &triples {
        let (hx, hy) = (label(x)?, label(y)?);
        let expected = a
            .div(hy)
            .and_then(|t| Ok(t.add(&b.div(&hy.mul(hx))?)))
            .map_err(|_| GuessError::MissingLabel(y))?;
        triple_checks.push(check(vec![x, y, z], expected, n)?);
    }
    let proved = base_cases.iter().chain(&pair_checks).chain(&triple_checks).all(|c| c.holds);
    Ok(Certificate {
        states: k.num_states(),
        outputs: k.realized_outputs().len(),
        base_cases,
        pairs: pair_checks,
        triples: triple_checks,
        proved,
    })
}

/// For each realized output, whether it is taken at infinitely many indices.
pub fn outputs_infinitely_often<O: Output>(k: &Dfao<O>) -> Result<BTreeMap<O, bool>, GuessError> {
    let k = k.to_lsd()?;
    let mut out = BTreeMap::new();
    for o in k.realized_outputs() {
        let pre = k.map_outputs(|x| *x == o).minimize();
        out.insert(o, pre.is_infinite()?);
    }
    Ok(out)
}

/// Result of comparing two automata up to a relabeling of outputs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Comparison<O1, O2> {
    pub equal: bool,
    /// The relabeling used or inferred, as far as it is consistent.
    pub relabeling: Vec<(O1, O2)>,
    pub conflict: Option<Conflict<O1, O2>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Conflict<O1, O2> {
    pub n: Option<u64>,
    pub left: O1,
    pub right: O2,
}

/// Compares `A` and `B` index by index; with no relabeling, infers a bijection of outputs.
pub fn compare_dfaos<O1: Output, O2: Output>(
    a: &Dfao<O1>,
    b: &Dfao<O2>,
    relabel: Option<&BTreeMap<O1, O2>>,
) -> Result<Comparison<O1, O2>, GuessError> {
    let a = a.to_lsd()?;
    let b = b.to_lsd()?;
    let joint = a.product(&b, |x, y| (x.clone(), y.clone()))?.minimize();
    let mut realized: Vec<((O1, O2), Option<u64>)> = joint.output_witnesses().into_iter().collect();
    realized.sort_by_key(|(_, n)| n.unwrap_or(u64::MAX));
    let mut forward: BTreeMap<O1, O2> = BTreeMap::new();
    let mut backward: BTreeMap<O2, O1> = BTreeMap::new();
    if let Some(map) = relabel {
        let mut seen = BTreeSet::new();
        if map.values().any(|v| !seen.insert(v)) {
            return Err(GuessError::Automaton(AutomatonError::Invalid(
                "relabeling is not injective".into(),
            )));
        }
    }
    for ((x, y), n) in realized {
        let ok = match relabel {
            Some(map) => map.get(&x) == Some(&y),
            None => {
                let f = forward.get(&x).is_none_or(|v| *v == y);
                let g = backward.get(&y).is_none_or(|v| *v == x);
                f && g
            }
        };
        if !ok {
            let relabeling = match relabel {
                Some(map) => map.clone().into_iter().collect(),
                None => forward.into_iter().collect(),
            };
            return Ok(Comparison {
                equal: false,
                relabeling,
                conflict: Some(Conflict { n, left: x, right: y }),
            });
        }
        forward.insert(x.clone(), y.clone());
        backward.insert(y, x);
    }
    let relabeling = match relabel {
        Some(map) => map.clone().into_iter().collect(),
        None => forward.into_iter().collect(),
    };
    Ok(Comparison {
        equal: true,
        relabeling,
        conflict: None,
    })
}
