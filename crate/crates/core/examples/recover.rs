//! One recovery from 20 Gaussian measurements of a 64-dimensional signal
//! drawn from an 8-component mixture of 5-dimensional subspaces.

use projdiff::{
    detect_burn_in, fit_linear_rate, gaussian_operator, run_recovery, Prior64, Problem64, RecoveryOptions,
    Schedule64, SeededRng,
};

fn main() -> projdiff::Result<()> {
    let mut rng = SeededRng::new(1);
    let prior = Prior64::random_uniform(64, 5, 8, &mut rng)?;
    let (x_true, k) = prior.sample_with_component(&mut rng);
    let a = gaussian_operator(20, 64, &mut rng)?;
    let problem = Problem64::with_default_step(a, x_true, 1)?;
    let schedule = Schedule64::geometric(0.5, 1e-4, 150)?;

    let mut opts = RecoveryOptions::new(150);
    opts.model = Some(prior.union());
    opts.true_component = Some(k);
    let trace = run_recovery(&problem, &prior, &schedule, &opts)?;

    let burn_in = detect_burn_in(&trace, k)?;
    println!("final mse {:e}", trace.final_mse().unwrap());
    println!("burn-in {burn_in:?}");
    if let Some(n) = burn_in {
        let fit = fit_linear_rate(&trace, n)?;
        println!("rate {:.4} (r2 {:.4})", fit.rate, fit.r2);
    }
    Ok(())
}
