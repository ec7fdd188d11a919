use proptest::prelude::*;

use projdiff::linalg::{self, dot, norm_sq};
use projdiff::{
    detect_burn_in, fit_linear_rate, hard_threshold, parse_model, BoxSet, LrGmmPrior, Matrix, ModelFile,
    NoiseSchedule, RecoveryTrace, ScheduleKind, SeededRng, Subspace, TraceHeader, TraceRow, UnionOfSubspaces,
};

fn union_strategy() -> impl Strategy<Value = (UnionOfSubspaces<f64>, u64)> {
    (2usize..9, 1usize..4, 1usize..5, any::<u64>()).prop_filter_map("rank below ambient", |(d, r, k, seed)| {
        (r < d).then(|| {
            let mut rng = SeededRng::new(seed);
            (UnionOfSubspaces::random(d, r, k, &mut rng).unwrap(), seed)
        })
    })
}

fn point(d: usize, seed: u64) -> Vec<f64> {
    SeededRng::substream(seed, 7).gaussian_vec(d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn subspace_projection_is_orthogonal((u, seed) in union_strategy()) {
        let x = point(u.ambient_dim(), seed);
        for e in u.components() {
            let p = e.project(&x).unwrap();
            let pp = e.project(&p).unwrap();
            prop_assert!(linalg::distance(&p, &pp) < 1e-12);
            let resid = linalg::sub(&x, &p);
            prop_assert!(dot(&resid, &p).abs() < 1e-12 * norm_sq(&x).max(1.0));
            let pyth = norm_sq(&p) + norm_sq(&resid) - norm_sq(&x);
            prop_assert!(pyth.abs() < 1e-12 * norm_sq(&x).max(1.0));
            prop_assert!((e.distance(&x).unwrap() - linalg::norm(&resid)).abs() < 1e-12);
        }
    }

    #[test]
    fn union_projection_is_a_closest_point((u, seed) in union_strategy()) {
        let x = point(u.ambient_dim(), seed);
        let proj = u.project(&x, 1e-9).unwrap();
        let dist = linalg::distance(&x, &proj.point);
        for e in u.components() {
            prop_assert!(dist <= e.distance(&x).unwrap() + 1e-12);
        }
        let norms = u.projection_norms_sq(&x).unwrap();
        let best = norms[proj.argmin_set[0]];
        prop_assert!(norms.iter().all(|&n| n <= best + 1e-9));
        let gap = u.frontier_gap(&x).unwrap();
        prop_assert!(gap >= 0.0);
        if u.len() == 1 {
            prop_assert!(gap.is_infinite());
        } else {
            let mut sorted = norms.clone();
            sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
            prop_assert!((gap - (sorted[0] - sorted[1])).abs() < 1e-12);
        }
    }

    #[test]
    fn weights_form_a_distribution((u, seed) in union_strategy(), log_sigma in -5.0f64..1.0) {
        let x = point(u.ambient_dim(), seed);
        let p = LrGmmPrior::uniform(u);
        let sigma = 10f64.powf(log_sigma);
        let eval = p.denoiser(&x, sigma).unwrap();
        prop_assert!(eval.weights.iter().all(|&w| (0.0..=1.0).contains(&w)));
        prop_assert!((eval.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(eval.log_density.is_finite());
        prop_assert!(linalg::all_finite(&eval.value));
        // The denoiser never leaves the ball of radius ‖x‖.
        prop_assert!(linalg::norm(&eval.value) <= linalg::norm(&x) * (1.0 + 1e-12));
    }

    #[test]
    fn hard_threshold_keeps_the_largest_entries(x in prop::collection::vec(-10.0f64..10.0, 1..12), s_frac in 0.0f64..1.0) {
        let s = 1 + ((x.len() - 1) as f64 * s_frac) as usize;
        let h = hard_threshold(&x, s).unwrap();
        prop_assert!(h.iter().filter(|v| **v != 0.0).count() <= s);
        let mut energies: Vec<f64> = x.iter().map(|v| v * v).collect();
        energies.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let top: f64 = energies[..s].iter().sum();
        prop_assert!((norm_sq(&h) - top).abs() <= 1e-12 * top.max(1.0));
        for i in 0..x.len() {
            prop_assert!(h[i] == 0.0 || h[i] == x[i]);
        }
    }

    #[test]
    fn box_projection_and_denoiser_stay_inside(
        half in prop::collection::vec(0.1f64..3.0, 1..6),
        seed in any::<u64>(),
        log_sigma in -4.0f64..1.0,
    ) {
        let lower: Vec<f64> = half.iter().map(|h| -h).collect();
        let b = BoxSet::new(lower, half.clone()).unwrap();
        let y: Vec<f64> = SeededRng::new(seed).gaussian_vec(half.len()).iter().map(|v| 3.0 * v).collect();
        let p = b.project(&y).unwrap();
        prop_assert!(b.contains(&p));
        prop_assert_eq!(b.project(&p).unwrap(), p.clone());
        let d = projdiff::box_denoiser(&b, &y, 10f64.powf(log_sigma)).unwrap();
        prop_assert!(b.contains(&d));
    }

    #[test]
    fn finite_schedules_descend_between_exact_endpoints(
        kind in prop::sample::select(vec![ScheduleKind::Geometric, ScheduleKind::Linear, ScheduleKind::Cosine]),
        sigma_max in 0.01f64..2.0,
        frac in 1e-6f64..0.99,
        horizon in 1usize..300,
    ) {
        let sigma_min = sigma_max * frac;
        let s = NoiseSchedule::from_kind(kind, sigma_max, sigma_min, horizon, 0.9).unwrap();
        prop_assert_eq!(s.sigma(0).unwrap(), sigma_max);
        prop_assert!((s.sigma(horizon).unwrap() - sigma_min).abs() <= 1e-14 * sigma_max);
        for n in 0..horizon {
            prop_assert!(s.sigma(n + 1).unwrap() <= s.sigma(n).unwrap());
        }
        prop_assert!(s.sigma(horizon + 1).is_err());
        if kind == ScheduleKind::Geometric {
            let q = s.geometric_ratio().unwrap();
            for n in 0..horizon {
                let r = s.sigma(n + 1).unwrap() / s.sigma(n).unwrap();
                prop_assert!((r - q).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rate_fit_is_exact_on_geometric_decay(rho in 0.05f64..0.99, c in 1e-3f64..1e3, len in 5usize..80) {
        let rows: Vec<f64> = (0..len).map(|n| (c * rho.powi(n as i32)).powi(2)).collect();
        let trace = synthetic_trace(&rows, &vec![vec![0.0, 1.0]; len]);
        match fit_linear_rate(&trace, 0) {
            Ok(fit) => prop_assert!((fit.rate - rho).abs() < 1e-9 * rho.max(1e-3), "{} vs {rho}", fit.rate),
            // Decay that reaches the floor too quickly leaves too few points.
            Err(_) => prop_assert!(rows.iter().filter(|&&m| m >= projdiff::diagnostics::MSE_FLOOR).count() < 5),
        }
    }

    #[test]
    fn burn_in_marks_a_stable_suffix(pattern in prop::collection::vec(0usize..3, 1..40)) {
        // Row n is closest to component pattern[n].
        let dists: Vec<Vec<f64>> = pattern.iter().map(|&k| (0..3).map(|j| if j == k { 0.1 } else { 1.0 }).collect()).collect();
        let trace = synthetic_trace(&vec![1.0; pattern.len()], &dists);
        let got = detect_burn_in(&trace, 1).unwrap();
        let expected = (0..pattern.len()).find(|&n| pattern[n..].iter().all(|&k| k == 1));
        prop_assert_eq!(got, expected);
    }

    #[test]
    fn model_files_round_trip((u, seed) in union_strategy()) {
        let k = u.len();
        let mut rng = SeededRng::new(seed);
        let raw: Vec<f64> = (0..k).map(|_| rng.uniform_in(0.1, 1.0)).collect();
        let total: f64 = raw.iter().sum();
        let pi: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let prior = LrGmmPrior::new(u.clone(), &pi).unwrap();
        for model in [ModelFile::Union(u.clone()), ModelFile::Prior(prior)] {
            let back: ModelFile<f64> = parse_model(&model.to_text()).unwrap();
            prop_assert_eq!(back.to_text(), model.to_text());
        }
        let a = Matrix::from_fn(3, u.ambient_dim(), |i, j| rng.gaussian() * (i + j + 1) as f64);
        let back: ModelFile<f64> = parse_model(&ModelFile::Matrix(a.clone()).to_text()).unwrap();
        match back {
            ModelFile::Matrix(b) => prop_assert_eq!(b, a),
            _ => prop_assert!(false, "wrong kind"),
        }
    }

    #[test]
    fn traces_round_trip(mses in prop::collection::vec(1e-30f64..1e3, 1..20), seed in any::<u64>()) {
        let mut rng = SeededRng::new(seed);
        let dists: Vec<Vec<f64>> = mses.iter().map(|_| vec![rng.uniform(), rng.uniform()]).collect();
        // Iterates are not part of the CSV format.
        let trace = synthetic_trace(&mses, &dists);
        let back = RecoveryTrace::<f64>::read_csv(trace.to_csv_string().as_bytes()).unwrap();
        prop_assert_eq!(back, trace);
    }
}

fn synthetic_trace(mses: &[f64], dists: &[Vec<f64>]) -> RecoveryTrace<f64> {
    let k = dists.first().map_or(0, Vec::len);
    RecoveryTrace {
        header: TraceHeader {
            problem_hash: "0".into(),
            schedule: "geometric sigma_max=1 sigma_min=0.1 N=10".into(),
            schedule_kind: ScheduleKind::Geometric,
            mu: 1.0,
            seed: 0,
            prior: "synthetic".into(),
            d: 2,
            m: 2,
            n_iters: mses.len() - 1,
            num_components: Some(k),
            true_component: Some(1),
        },
        rows: mses
            .iter()
            .zip(dists)
            .enumerate()
            .map(|(n, (&mse, d))| TraceRow {
                n,
                sigma: 0.5,
                x: None,
                mse,
                residual: mse.sqrt(),
                subspace_distances: d.clone(),
                frontier_gap: 0.1,
                weight_entropy: 0.0,
            })
            .collect(),
    }
}

#[test]
fn coordinate_subspace_projection_zeroes_other_axes() {
    let e = Subspace::coordinate(4, &[1, 3]).unwrap();
    assert_eq!(e.project(&[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![0.0, 2.0, 0.0, 4.0]);
}
