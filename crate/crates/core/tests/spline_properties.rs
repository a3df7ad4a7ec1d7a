mod common;

use bicens::spline::{bspline_all, ispline_all, mspline_all, KnotVector};
use proptest::prelude::*;

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn knot_vector() -> impl Strategy<Value = KnotVector> {
    (1usize..=5, prop::collection::vec(0.01f64..4.99, 0..7)).prop_filter_map("distinct interior", |(order, mut xs)| {
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        KnotVector::new(order, 0.0, 5.0, xs).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partition_of_unity(kv in knot_vector()) {
        let u = kv.extended();
        for s in grid(0.0, 5.0, 1000) {
            let total: f64 = bspline_all(u, kv.order(), s).unwrap().iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12, "s={s} sum={total}");
        }
    }

    #[test]
    fn isplines_monotone_and_bounded(kv in knot_vector()) {
        let u = kv.extended();
        let mut prev = ispline_all(u, kv.order(), 0.0).unwrap();
        for s in grid(0.0, 5.0, 1000) {
            let cur = ispline_all(u, kv.order(), s).unwrap();
            for (i, (&a, &b)) in prev.iter().zip(&cur).enumerate() {
                prop_assert!(a <= b + 1e-14, "I_{i} decreases at s={s}");
                prop_assert!((0.0..=1.0).contains(&b), "I_{i}({s}) = {b}");
            }
            prev = cur;
        }
    }

    #[test]
    fn m_and_b_splines_nonnegative(kv in knot_vector()) {
        let u = kv.extended();
        for s in grid(0.0, 5.0, 1000) {
            prop_assert!(mspline_all(u, kv.order(), s).unwrap().iter().all(|&v| v >= 0.0));
            prop_assert!(bspline_all(u, kv.order(), s).unwrap().iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn ispline_is_tail_sum_of_bsplines(kv in knot_vector()) {
        let u = kv.extended();
        for s in grid(0.0, 5.0, 1000) {
            let is = ispline_all(u, kv.order(), s).unwrap();
            let ns = bspline_all(u, kv.order(), s).unwrap();
            let mut tail = 0.0;
            for i in (0..ns.len()).rev() {
                tail += ns[i];
                prop_assert!((is[i] - tail).abs() < 1e-10, "i={i} s={s}: {} vs {tail}", is[i]);
            }
        }
    }

    #[test]
    fn msplines_have_unit_mass(kv in knot_vector()) {
        let u = kv.extended();
        let k = kv.order();
        for i in 0..kv.basis_count() {
            let f = |s: f64| mspline_all(u, k, s).unwrap()[i];
            // piecewise polynomial: integrate span by span
            let mass: f64 = (i..i + k)
                .filter(|&j| u[j + 1] > u[j])
                .map(|j| common::simpson(&f, u[j], u[j + 1], 1e-12))
                .sum();
            prop_assert!((mass - 1.0).abs() < 1e-8, "M_{i} mass {mass}");
        }
    }
}

#[test]
fn cubic_basis_on_one_interior_knot() {
    let kv = KnotVector::from_quantiles(&[1.0, 2.0, 3.0, 4.0], 1, 4, 0.0, 5.0).unwrap();
    assert_eq!(kv.extended(), &[0.0, 0.0, 0.0, 0.0, 2.5, 5.0, 5.0, 5.0, 5.0]);
    assert_eq!(kv.basis_count(), 5);
    let u = kv.extended();
    for s in grid(0.0, 5.0, 50) {
        let is = ispline_all(u, 4, s).unwrap();
        for i in 0..5 {
            let tail: f64 = (i..5).map(|m| kv.bspline(m, s).unwrap()).sum();
            assert!((is[i] - tail).abs() < 1e-10);
        }
    }
}

#[test]
fn bspline_is_difference_of_adjacent_isplines() {
    let kv = KnotVector::new(3, 0.0, 5.0, vec![0.7, 1.9, 3.3]).unwrap();
    let mut rng = common::rng(11);
    for _ in 0..200 {
        let s: f64 = rand::Rng::random_range(&mut rng, 0.0..5.0);
        let is = kv.ispline_all(s);
        for i in 0..kv.basis_count() {
            let next = is.get(i + 1).copied().unwrap_or(0.0);
            assert!((kv.bspline(i, s).unwrap() - (is[i] - next)).abs() < 1e-10);
        }
    }
}

#[test]
fn unit_mass_of_linear_hat() {
    let kv = KnotVector::new(2, 0.0, 2.0, vec![1.0]).unwrap();
    let mass = common::simpson(&|s| kv.mspline(1, s).unwrap(), 0.0, 2.0, 1e-12);
    assert!((mass - 1.0).abs() < 1e-8);
}
