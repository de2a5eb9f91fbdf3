//! Closed forms for the Thue–Morse driven ratio classes.

use crate::polyrat::{PolyZab, RatFn};

const D_POLYS: [&str; 8] = [
    "1",
    "1",
    "a + b",
    "a^2 + a*b + b",
    "a^3 + a^2*b + 2*a*b + b^2",
    "a^4 + a^3*b + 3*a^2*b + 2*a*b^2 + b^2",
    "a^5 + a^4*b + 4*a^3*b + 3*a^2*b^2 + 3*a*b^2 + b^3",
    "a^6 + a^5*b + 5*a^4*b + 4*a^3*b^2 + 6*a^2*b^2 + 3*a*b^3 + b^3",
];

/// Auxiliary polynomial `d_i` for `-1 <= i <= 6`.
pub fn d(i: i32) -> PolyZab {
    assert!((-1..=6).contains(&i), "d_i is tabulated for -1 <= i <= 6");
    D_POLYS[(i + 1) as usize].parse().expect("tabulated polynomial")
}

/// Ratio class `h_i = d_i / d_{i-1}` for `0 <= i <= 6`.
pub fn h_class(i: i32) -> RatFn {
    assert!((0..=6).contains(&i), "h_i is tabulated for 0 <= i <= 6");
    RatFn::new(d(i), d(i - 1)).expect("d_i is nonzero")
}

/// All seven ratio classes in index order.
pub fn h_classes() -> Vec<RatFn> {
    (0..=6).map(h_class).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_satisfies_binary_recurrence() {
        for i in 1..=6 {
            let rhs = &d(i - 1).mul_a() + &d(i - 2).mul_b();
            assert_eq!(d(i), rhs, "d_{i}");
        }
    }

    #[test]
    fn classes_are_pairwise_distinct() {
        let hs = h_classes();
        for x in 0..hs.len() {
            for y in x + 1..hs.len() {
                assert_ne!(hs[x], hs[y]);
            }
        }
    }
}
