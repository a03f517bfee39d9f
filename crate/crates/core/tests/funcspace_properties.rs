// SPDX-License-Identifier: MIT OR Apache-2.0

use lpvar::funcspace::{is_in_fq_delta, qvar_norm_step, riemann_sums, weighted_sum};
use lpvar::{StepFunction, WeightFunction};
use proptest::prelude::*;

fn step_strategy() -> impl Strategy<Value = StepFunction> {
    (1usize..8)
        .prop_flat_map(|m| {
            (
                prop::collection::btree_set(1u32..1000, m - 1),
                prop::collection::vec(-3.0f64..3.0, m),
                -3.0f64..3.0,
            )
        })
        .prop_map(|(cuts, values, at_zero)| {
            let mut knots = vec![0.0];
            knots.extend(cuts.into_iter().map(|c| c as f64 / 1000.0));
            knots.push(1.0);
            StepFunction::new(knots, values, at_zero).unwrap()
        })
}

fn scaled(s: &StepFunction, c: f64) -> StepFunction {
    StepFunction::new(
        s.knots().to_vec(),
        s.values().iter().map(|v| c * v).collect(),
        c * s.at_zero(),
    )
    .unwrap()
}

#[test]
fn indicator_norm_is_two_for_every_endpoint() {
    for t in [1e-9, 0.1, 0.25, 0.5, 0.9, 1.0 - 1e-9] {
        for q in [1.0, 1.5, 2.0, 3.0, 7.0] {
            let (semi, sup, full) =
                qvar_norm_step(&StepFunction::indicator(t).unwrap(), q).unwrap();
            assert_eq!((semi, sup, full), (1.0, 1.0, 2.0));
        }
    }
}

#[test]
fn class_membership() {
    let half = WeightFunction::Step(scaled(&StepFunction::indicator(0.5).unwrap(), 0.5));
    assert!(is_in_fq_delta(&half, 2.0, 0.1).unwrap());
    assert!(!is_in_fq_delta(&half, 2.0, 0.125).unwrap());
    let full = WeightFunction::Step(StepFunction::indicator(0.5).unwrap());
    assert!(!is_in_fq_delta(&full, 2.0, 0.1).unwrap());
}

#[test]
fn weighted_sum_uses_right_endpoints() {
    let f = WeightFunction::identity();
    assert_eq!(
        weighted_sum(&[1.0, 1.0, 1.0, 1.0], &f),
        0.25 + 0.5 + 0.75 + 1.0
    );
    let ind = WeightFunction::Step(StepFunction::indicator(0.5).unwrap());
    assert_eq!(weighted_sum(&[1.0, 2.0, 4.0, 8.0], &ind), 3.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn seminorm_is_absolutely_homogeneous(s in step_strategy(), c in -5.0f64..5.0, q in 1.0f64..6.0) {
        let (semi, sup, _) = qvar_norm_step(&s, q).unwrap();
        let (semi_c, sup_c, _) = qvar_norm_step(&scaled(&s, c), q).unwrap();
        prop_assert!((semi_c - c.abs() * semi).abs() <= 1e-12 * (1.0 + semi_c.abs()));
        prop_assert!((sup_c - c.abs() * sup).abs() <= 1e-12 * (1.0 + sup_c));
    }

    #[test]
    fn seminorm_vanishes_only_for_constants(s in step_strategy(), q in 1.0f64..6.0) {
        let (semi, _, _) = qvar_norm_step(&s, q).unwrap();
        let attained = s.attained();
        let constant = attained.iter().all(|&v| v == attained[0]);
        prop_assert_eq!(semi == 0.0, constant);
    }

    #[test]
    fn seminorm_decreases_in_q(s in step_strategy(), q in 1.0f64..5.0, dq in 0.0f64..3.0) {
        let (lo, _, _) = qvar_norm_step(&s, q).unwrap();
        let (hi, _, _) = qvar_norm_step(&s, q + dq).unwrap();
        prop_assert!(hi <= lo * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn riemann_error_bounded_by_jumps(s in step_strategy(), n in 1usize..3000) {
        let sup = s.attained().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let pieces = s.pieces();
        let (i_n, i) = riemann_sums(&WeightFunction::Step(s), n);
        prop_assert!((i_n - i).abs() <= sup * sup * pieces as f64 / n as f64 + 1e-12);
    }

    #[test]
    fn riemann_error_for_powers(a in 0.0f64..4.0, n in 1usize..3000) {
        let (i_n, i) = riemann_sums(&WeightFunction::power(a).unwrap(), n);
        prop_assert!((i_n - i).abs() <= 1.0 / n as f64 + 1e-12);
    }

    #[test]
    fn monotone_polynomial_norm_is_endpoint_gap(c1 in 0.0f64..2.0, c2 in 0.0f64..2.0, c0 in -1.0f64..1.0, q in 1.0f64..4.0) {
        let f = WeightFunction::poly(vec![c0, c1, c2]).unwrap();
        let norms = f.qvar_norms(q).unwrap();
        prop_assert!((norms.seminorm - (c1 + c2)).abs() <= 1e-12 * (1.0 + c1 + c2));
        // Fine step approximation of the same function.
        let m = 400;
        let knots: Vec<f64> = (0..=m).map(|k| k as f64 / m as f64).collect();
        let values: Vec<f64> = knots[1..].iter().map(|&x| f.eval(x)).collect();
        let step = StepFunction::new(knots, values, f.eval(0.0)).unwrap();
        let (semi, _, _) = qvar_norm_step(&step, q).unwrap();
        prop_assert!((semi - norms.seminorm).abs() <= 1e-9 * (1.0 + semi));
    }
}
