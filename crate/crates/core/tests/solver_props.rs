use proptest::prelude::*;
use tradeoff_core::closedform::devetak_berger;
use tradeoff_core::oracle::brute_force_m_many;
use tradeoff_core::qcore::{shannon_entropy, Ensemble, PureState};
use tradeoff_core::solver::{solve_m, trade_off_curve, SimplexGrid};
use tradeoff_core::symmetry::{covariant_solve_m, orbits, symmetrize, GroupAction};
use tradeoff_core::C64;

fn state(dim: usize) -> impl Strategy<Value = PureState> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
        .prop_filter("nonzero", |v| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-3)
        .prop_map(|v| PureState::normalized(v.into_iter().map(|(re, im)| C64::new(re, im)).collect()).unwrap())
}

fn distribution(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, n).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

fn ensemble(m: usize, dim: usize) -> impl Strategy<Value = Ensemble> {
    (prop::collection::vec(state(dim), m), distribution(m)).prop_map(|(s, p)| Ensemble::new(s, p).unwrap())
}

fn small_source() -> impl Strategy<Value = Ensemble> {
    (2usize..4, 2usize..4).prop_flat_map(|(m, d)| ensemble(m, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn curves_are_convex_monotone_and_above_the_schumacher_line(e in small_source()) {
        let g = SimplexGrid::default_for(&e).unwrap();
        let curve = trade_off_curve(&e, 9, &g).unwrap();
        let s = e.entropy();
        let h = shannon_entropy(e.probs());
        let pts = curve.points();
        prop_assert!((pts[0].1 - s).abs() < 1e-6);
        prop_assert!(pts.last().unwrap().1.abs() < 1e-6);
        prop_assert!((pts.last().unwrap().0 - h).abs() < 1e-9);
        for w in pts.windows(2) {
            prop_assert!(w[1].0 > w[0].0);
            prop_assert!(w[1].1 <= w[0].1 + 1e-9);
            // M(E, R + δ) ≥ M(E, R) − δ
            prop_assert!(w[1].1 >= w[0].1 - (w[1].0 - w[0].0) - 1e-9);
        }
        for w in pts.windows(3) {
            let mid = w[0].1 + (w[2].1 - w[0].1) * (w[1].0 - w[0].0) / (w[2].0 - w[0].0);
            prop_assert!(w[1].1 <= mid + 1e-9, "{:?}", w);
        }
        for &(r, q) in &pts {
            prop_assert!(q + r >= s - 2.0 * g.tolerance());
        }
        for sample in &curve.samples {
            prop_assert!(sample.support_size() <= e.len() + 1);
        }
    }

    #[test]
    fn two_state_solver_agrees_with_exhaustive_search(e in (2usize..4).prop_flat_map(|d| ensemble(2, d))) {
        let steps = 60;
        let g = SimplexGrid::new(&e, 64).unwrap();
        let rates = [0.1, 0.4, 0.7];
        let reference = brute_force_m_many(&e, &rates, 3, steps).unwrap();
        for (&r, b) in rates.iter().zip(reference) {
            let v = solve_m(&e, r, &g).unwrap().value;
            prop_assert!((v - b).abs() <= g.tolerance() + 2.0 / steps as f64, "R={r}: solver {v}, oracle {b}");
        }
    }

    #[test]
    fn covariant_optimum_matches_the_free_one(a in state(2), b in state(2), r in 0.05f64..0.95) {
        prop_assume!(a.overlap(&b) < 0.98);
        let e = Ensemble::uniform(vec![a.clone(), b.clone()]).unwrap();
        let action = GroupAction::pair_swap(&a, &b).unwrap();
        let g = SimplexGrid::new(&e, 32).unwrap();
        let cov = covariant_solve_m(&e, &action, r, &g, false).unwrap().solution.value;
        let free = solve_m(&e, r, &g).unwrap().value;
        prop_assert!(cov >= free - 1e-9, "{cov} < {free}");
        prop_assert!(cov - free <= 2.0 * g.tolerance());
    }

    #[test]
    fn closed_form_respects_the_schumacher_bound(l in 1e-3f64..50.0) {
        let (r, q) = devetak_berger(l).unwrap();
        prop_assert!(q + r >= 1.0 - 1e-9);
    }
}

proptest! {
    #[test]
    fn symmetrize_is_idempotent_and_normalized(p in distribution(4)) {
        let action = GroupAction::bb84(std::f64::consts::PI / 8.0);
        let once = symmetrize(&p, &action);
        let twice = symmetrize(&once, &action);
        prop_assert!((once.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(once.iter().zip(&twice).all(|(a, b)| (a - b).abs() < 1e-12));
    }
}

#[test]
fn orbits_partition_the_labels() {
    let action = GroupAction::bb84(std::f64::consts::PI / 8.0);
    let mut seen: Vec<usize> = orbits(&action)
        .into_iter()
        .inspect(|o| assert_eq!(action.order() % o.len(), 0))
        .flatten()
        .collect();
    seen.sort_unstable();
    assert_eq!(seen, vec![0, 1, 2, 3]);
}

#[test]
fn mixing_orthonormal_sources_breaks_concavity() {
    let basis = |d: usize| (0..d).map(|k| PureState::basis(4, k)).collect::<Vec<_>>();
    let solve = |e: &Ensemble| solve_m(e, 1.9, &SimplexGrid::default_for(e).unwrap()).unwrap().value;
    // Half of a four-state source and half of a two-state source on the first two labels.
    let mixed = solve(&Ensemble::new(basis(4), vec![0.375, 0.375, 0.125, 0.125]).unwrap());
    let four = solve(&Ensemble::uniform(basis(4)).unwrap());
    let two = solve(&Ensemble::uniform(basis(2)).unwrap());
    assert!(mixed < 1e-6, "{mixed}");
    assert!((0.5 * (four + two) - 0.05).abs() < 1e-6, "{four} {two}");
}
