//! Broken prior evaluations must be caught by the check suite.

use projdiff::linalg;
use projdiff::LrGmmPrior;
use projdiff_cli::checks::{single_component_law, tweedie_identity, weight_stability, PriorOps};

/// `Σ ω_k P_k x` without the `1/(1+σ²)` shrinkage.
fn denoise_without_shrinkage(p: &LrGmmPrior<f64>, x: &[f64], sigma: f64) -> projdiff::Result<Vec<f64>> {
    let w = p.weights(x, sigma * sigma)?;
    let mut out = vec![0.0; x.len()];
    for (wk, comp) in w.iter().zip(p.union().components()) {
        linalg::axpy(*wk, &comp.project(x)?, &mut out);
    }
    Ok(out)
}

/// Weights normalised in the linear domain.
fn naive_weights(p: &LrGmmPrior<f64>, x: &[f64], sigma: f64) -> projdiff::Result<Vec<f64>> {
    let t = sigma * sigma;
    let raw: Vec<f64> = (0..p.num_components())
        .map(|k| Ok(p.log_pi()[k].exp() * p.log_component_density(k, x, t)?.exp()))
        .collect::<projdiff::Result<_>>()?;
    let total: f64 = raw.iter().sum();
    Ok(raw.iter().map(|v| v / total).collect())
}

#[test]
fn exact_ops_pass() {
    let ops = PriorOps::exact();
    assert!(tweedie_identity(&ops, 60).pass);
    assert!(weight_stability(&ops, 50).pass);
    assert!(single_component_law(&ops).pass);
}

#[test]
fn missing_shrinkage_fails_tweedie() {
    let ops = PriorOps {
        denoise: denoise_without_shrinkage,
        ..PriorOps::exact()
    };
    let r = tweedie_identity(&ops, 60);
    assert!(!r.pass, "{r:?}");
    assert!(!single_component_law(&ops).pass);
}

#[test]
fn naive_weights_fail_stability() {
    let ops = PriorOps {
        weights: naive_weights,
        ..PriorOps::exact()
    };
    let r = weight_stability(&ops, 50);
    assert!(!r.pass, "{r:?}");
    // At moderate noise the naive form is still accurate.
    let x = [0.3, -0.2, 0.5];
    let mut rng = projdiff::SeededRng::new(1);
    let p = LrGmmPrior::<f64>::random_uniform(3, 1, 3, &mut rng).unwrap();
    let a = naive_weights(&p, &x, 0.5).unwrap();
    let b = p.weights(&x, 0.25).unwrap();
    assert!(linalg::distance(&a, &b) < 1e-12);
}
