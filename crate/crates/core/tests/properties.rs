use locnet::activation::{SigmoidKind, SigmoidSpec};
use locnet::capacity::{empirical_covering, evaluate_family, sample_phi_net};
use locnet::harness::sparse_rate_factor;
use locnet::learn::{cells_per_axis, erm_fit, generalization_error, Dataset, ErmConfig};
use locnet::netcore::{build_approximant, AnchorRule, LocalizerNet, PhiBounds};
use locnet::partition::{make_partition, MultiIndex};
use locnet::targets::{make_lipschitz_target, make_sparse_target, verify_lipschitz};
use locnet::threshold_for;
use locnet::verify::{check_sparse_bound, unit_grid};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn kind() -> impl Strategy<Value = SigmoidKind> {
    prop::sample::select(SigmoidKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn localizer_is_below_eps_outside_and_near_one_inside(
        n in 1usize..=6,
        d in 1usize..=3,
        eps in prop::sample::select(vec![1e-2, 1e-4]),
        k in kind(),
        pick in any::<u64>(),
    ) {
        let p = make_partition(n, d).unwrap();
        let j = p.multi_index((pick % p.cell_count() as u64) as usize);
        let sigma = SigmoidSpec::new(k);
        let net = LocalizerNet::new(p, j.clone(), threshold_for(sigma, eps).unwrap(), sigma).unwrap();
        let pts = if d == 3 { 21 } else { 41 };
        for x in unit_grid::<f64>(d, pts) {
            let v = net.eval(&x).unwrap();
            if p.cell_contains(&j, &x) {
                prop_assert!(v >= 1.0 - eps, "inside {x:?}: {v}");
            } else {
                prop_assert!(v < eps, "outside {x:?}: {v}");
            }
        }
    }

    #[test]
    fn generated_targets_are_lipschitz(seed in any::<u64>(), d in 1usize..=3, r in prop::sample::select(vec![0.5, 1.0]), sparse in any::<bool>()) {
        let t = if sparse {
            make_sparse_target(seed, 3, 1 + (seed % 3) as usize, r, 1.5, d).unwrap()
        } else {
            make_lipschitz_target(seed, r, 1.5, d).unwrap()
        };
        let rep = verify_lipschitz(|x| t.eval(x), d, r, 1.5, 10_000, seed);
        prop_assert!(rep.pass, "ratio {}", rep.max_ratio);
    }

    #[test]
    fn sparse_factor_in_unit_interval(big_n in 1usize..=8, d in 1usize..=3, frac in 0.0f64..1.0, r in 0.1f64..=1.0) {
        let cells = big_n.pow(d as u32);
        let s = 1 + ((cells - 1) as f64 * frac) as usize;
        let f = sparse_rate_factor(s, big_n, d, r).unwrap();
        prop_assert!(f > 0.0 && f <= 1.0);
        prop_assert_eq!(f == 1.0, s == cells);
    }
}

/// Sup errors `(all grid points, points in a single closed cell)` for
/// `n ∈ {4N, 8N, 16N}`, `ε = n^{-d-r}`.
fn refinement_errors(seed: u64) -> Vec<(f64, f64)> {
    let sigma = SigmoidSpec::logistic();
    let d = 1 + (seed % 2) as usize;
    let r = if seed < 3 { 1.0 } else { 0.5 };
    let big_n = 2;
    let t = make_sparse_target(seed, big_n, 1, r, 1.0, d).unwrap();
    [4 * big_n, 8 * big_n, 16 * big_n]
        .into_iter()
        .map(|n| {
            let eps = (n as f64).powf(-(d as f64) - r);
            let gain = threshold_for(sigma, eps).unwrap();
            let p = make_partition(n, d).unwrap();
            let net = build_approximant(|x| t.eval(x), p, AnchorRule::Center, gain, sigma).unwrap();
            let rep = check_sparse_bound(&t, &net, eps, 41, false).unwrap();
            (rep.sup_error, rep.sup_error_single_cell)
        })
        .collect()
}

#[test]
fn sparse_sup_error_does_not_grow_under_refinement() {
    let bad: Vec<_> = (0..6u64)
        .map(|seed| (seed, refinement_errors(seed)))
        .filter(|(_, e)| e.windows(2).any(|w| w[1].0 > w[0].0))
        .collect();
    assert!(bad.is_empty(), "sup error grows for {bad:?}");
}

#[test]
fn sparse_error_off_shared_faces_decays_under_refinement() {
    for seed in 0..6u64 {
        let errs = refinement_errors(seed);
        assert!(errs.windows(2).all(|w| w[1].1 <= w[0].1), "seed {seed}: {errs:?}");
    }
}

#[test]
fn cover_count_grows_with_cell_count() {
    let bounds = PhiBounds::new(2.0, 1.0, 10.0);
    let grid = unit_grid::<f64>(1, 41);
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for n in [2usize, 3, 4] {
        let nets: Vec<_> = (0..2000)
            .map(|_| sample_phi_net(&mut rng, n, 1, bounds, SigmoidSpec::logistic()))
            .collect();
        let est = empirical_covering(&evaluate_family(&nets, &grid), 0.2).unwrap();
        assert!(est.sandwich_holds());
        xs.push(n as f64);
        ys.push((est.net_size_upper as f64).ln());
    }
    let mx = xs.iter().sum::<f64>() / 3.0;
    let my = ys.iter().sum::<f64>() / 3.0;
    let slope: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!(slope > 0.0, "log cover {ys:?}");
}

fn constant_dataset(c: f64, m: usize, seed: u64) -> Dataset<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..m).map(|_| vec![rng.gen::<f64>()]).collect();
    Dataset::new(1, x, vec![c; m], c, 0.0, seed).unwrap()
}

#[test]
fn noiseless_constant_error_shrinks_along_schedule() {
    let c = 0.6;
    for seed in 0..5u64 {
        let mut prev: Option<(f64, f64)> = None;
        for m in [256, 512, 1024, 2048, 4096] {
            let data = constant_dataset(c, m, seed * 100 + m as u64);
            let n = cells_per_axis(m, 1.0, 1);
            let fit = erm_fit(&data, &ErmConfig::new(n, SigmoidSpec::logistic(), 1.0)).unwrap();
            let est = generalization_error(|x| fit.predict_clipped(x), |_| c, 1, 5000, seed);
            if let Some((mean, se)) = prev {
                // once the fit is exact, errors sit at the square of the solver tolerance
                let floor = 1e-20;
                assert!(
                    est.mean <= mean + 2.0 * (se + est.std_error) + floor,
                    "seed {seed} m {m}: {} > {mean}",
                    est.mean
                );
            }
            prev = Some((est.mean, est.std_error));
        }
        assert!(prev.unwrap().0 < 1e-3);
    }
}

#[test]
fn learner_beats_zero_predictor() {
    for seed in 0..10u64 {
        for m in [256, 1024] {
            let t = make_lipschitz_target(seed, 1.0, 1.0, 1).unwrap();
            let data = locnet::learn::sample_dataset(seed + 7, m, &t, 0.1).unwrap();
            let n = cells_per_axis(m, 1.0, 1);
            let fit = erm_fit(&data, &ErmConfig::new(n, SigmoidSpec::logistic(), 1.0)).unwrap();
            let fitted = generalization_error(|x| fit.estimator.eval_unchecked(x), |x| t.eval(x), 1, 5000, seed);
            let zero = generalization_error(|_| 0.0, |x| t.eval(x), 1, 5000, seed);
            assert!(fitted.mean <= zero.mean, "seed {seed} m {m}");
        }
    }
}

#[test]
fn corner_cell_index_roundtrip() {
    let p = make_partition(3, 2).unwrap();
    let last = MultiIndex::new(vec![3, 3]);
    assert_eq!(p.multi_index(p.linear_index(&last)), last);
}
