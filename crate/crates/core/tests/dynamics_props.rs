use std::collections::BTreeSet;

use metafib::dynamics::{
    check_prop_01000, classify_mobius, classify_periodic_u, g_sequence, orbit_interval_counts, root_ratio_order,
    thm62_conditions, MobiusMatrix, OrbitKind,
};
use metafib::seqcore::{f_numeric_word, MetaFibParams};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn words(max_len: usize) -> Vec<Vec<u8>> {
    (1..=max_len)
        .flat_map(|l| (0..1u32 << l).map(move |x| (0..l).map(|i| ((x >> i) & 1) as u8).collect()))
        .collect()
}

fn periodic_f(per: &[u8], a: i64, b: i64, n_max: usize) -> Vec<BigInt> {
    let w: Vec<u8> = (0..n_max + 2).map(|n| per[n % per.len()]).collect();
    f_numeric_word(MetaFibParams::new(a, b), &w, n_max)
}

#[test]
fn kappa_table_matches_root_orders() {
    for a in -20i64..=20 {
        for b in -20i64..=20 {
            if b == 0 {
                continue;
            }
            let m = MobiusMatrix::new(a, b, 1, 0);
            assert_eq!(classify_mobius(&m, None).order(), root_ratio_order(a, b), "a = {a}, b = {b}");
        }
    }
}

#[test]
fn finite_orbits_are_periodic() {
    let mut seen = 0;
    for per in words(4) {
        let l = per.len();
        for a in -8i64..=8 {
            for b in -8i64..=8 {
                if a == 0 && b == 0 {
                    continue;
                }
                let pc = classify_periodic_u(&[], &per, a, b).unwrap();
                let OrbitKind::FiniteOrbit { order, .. } = pc.result.kind else {
                    continue;
                };
                seen += 1;
                let p = order as usize * l;
                let start = pc.n0.unwrap_or(pc.t + 2);
                let n_max = start + 500 * l + p + 2;
                let f = periodic_f(&per, a, b, n_max);
                // h(n + p) = h(n), compared by cross-multiplication.
                for n in start..start + 500 * l {
                    assert_eq!(
                        &f[n + p + 1] * &f[n],
                        &f[n + 1] * &f[n + p],
                        "per {per:?}, a = {a}, b = {b}, n = {n}"
                    );
                }
            }
        }
    }
    assert!(seen > 100, "{seen} finite cases");
}

/// Nonnegative fraction `n/d` with `d > 0`, ordered by cross-multiplication.
#[derive(PartialEq, Eq)]
struct Frac(BigInt, BigInt);

impl PartialOrd for Frac {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frac {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.0 * &other.1).cmp(&(&other.0 * &self.1))
    }
}

/// `|q(m) - q(n)|` for `q(k) = num(k)/den(k)`.
fn gap(num: &[BigInt], den: &[BigInt], m: usize, n: usize) -> Option<Frac> {
    if den[m].is_zero() || den[n].is_zero() {
        return None;
    }
    let d = &num[m] * &den[n] - &num[n] * &den[m];
    Some(Frac(d.abs(), (&den[m] * &den[n]).abs()))
}

#[test]
fn accumulation_residues_are_cauchy() {
    let mut seen = 0;
    for per in words(4) {
        let l = per.len();
        for a in -8i64..=8 {
            for b in -8i64..=8 {
                if a == 0 && b == 0 {
                    continue;
                }
                let pc = classify_periodic_u(&[], &per, a, b).unwrap();
                if pc.result.kind.tag() != "Accumulation" {
                    continue;
                }
                seen += 1;
                let start = pc.n0.unwrap_or(pc.t + 2);
                let steps = 500;
                let f = periodic_f(&per, a, b, start + (steps + 1) * l + 2);
                for i in 0..l {
                    // Residues tending to infinity are compared through 1/h.
                    let last = start + i + (steps - 1) * l;
                    let (num, den) = if f[last + 1].abs() > f[last].abs() {
                        (&f[..f.len() - 1], &f[1..])
                    } else {
                        (&f[1..], &f[..f.len() - 1])
                    };
                    let d: Vec<Option<Frac>> = (1..steps)
                        .map(|j| gap(num, den, start + i + j * l, start + i + (j - 1) * l))
                        .collect();
                    // Complex subdominant roots make single steps oscillate, so
                    // compare maxima over blocks of 25 steps.
                    let block_max: Vec<Option<&Frac>> = d[100..]
                        .chunks(25)
                        .map(|c| c.iter().map(Option::as_ref).collect::<Option<Vec<_>>>().and_then(|v| v.into_iter().max()))
                        .collect();
                    for k in 0..block_max.len() - 1 {
                        let (x, y) = (block_max[k], block_max[k + 1]);
                        assert!(
                            x.is_some() && y.is_some() && (y < x || x.is_some_and(|x| x.0.is_zero())),
                            "per {per:?}, a = {a}, b = {b}, residue {i}, block {k}"
                        );
                    }
                }
            }
        }
    }
    assert!(seen > 100, "{seen} accumulation cases");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dense_orbits_fill_unit_intervals(per in prop::collection::vec(0u8..2, 1..5), a in -8i64..=8, b in -8i64..=8) {
        prop_assume!(per.contains(&0) && !(a == 0 && b == 0));
        let pc = classify_periodic_u(&[], &per, a, b).unwrap();
        prop_assume!(pc.result.kind == OrbitKind::DenseInR);
        let (m, n0) = (pc.matrix.unwrap(), pc.n0.unwrap());
        let f = periodic_f(&per, a, b, n0 + 2);
        let counts = orbit_interval_counts(&m, &(f[n0 - 1].clone(), f[n0 - 2].clone()), 100_000, -2, 2);
        prop_assert!(counts.iter().all(|&c| c >= 25), "{:?}", counts);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn zero_run_identity(w in prop::collection::vec(prop::sample::select(vec![0u8, 0, 0, 1]), 20..200), a in -6i64..=6, b in -6i64..=6) {
        let report = check_prop_01000(&w, a, b, w.len());
        prop_assert!(report.violations.is_empty(), "{:?}", report.violations);
    }

    #[test]
    fn long_zero_runs_carry_the_binary_recurrence(
        fill in prop::collection::vec(prop::collection::vec(0u8..2, 0..4), 8),
        a in -5i64..=5,
        b in -5i64..=5,
    ) {
        prop_assume!(thm62_conditions(a, b).applicable);
        // Windows 0 1 0^d for d = 2..=9, separated by random filler.
        let d_max = 9;
        let mut w = vec![1u8, 1];
        for (d, f) in (2..=d_max).zip(&fill) {
            w.extend([0, 1]);
            w.extend(std::iter::repeat_n(0, d - 1));
            w.push(1);
            w.extend(f);
        }
        w.extend([1, 1]);
        let report = check_prop_01000(&w, a, b, w.len());
        prop_assume!(report.windows.iter().any(|x| x.checked && x.d >= d_max));
        let f = f_numeric_word(MetaFibParams::new(a, b), &w, w.len() - 1);
        let values: BTreeSet<BigRational> = f
            .windows(2)
            .filter(|p| !p[0].is_zero())
            .map(|p| BigRational::new(p[1].clone(), p[0].clone()))
            .collect();
        let g = g_sequence(a, b, d_max + 1);
        for j in 0..d_max {
            if !g[j].is_zero() {
                let q = BigRational::new(g[j + 1].clone(), g[j].clone());
                prop_assert!(values.contains(&q), "g({})/g({}) = {} missing", j + 1, j, q);
            }
        }
    }
}
