//! Quantitative checks on priors and traces: the projection-error bound off
//! the frontier, burn-in detection, and log-linear rate fits.

use std::io::Write;

use crate::error::{Error, Result};
use crate::linalg;
use crate::lrgmm::LrGmmPrior;
use crate::model_sets::frontier_gap_from_norms;
use crate::scalar::Real;
use crate::trace::{fmt17, RecoveryTrace};

/// Fits stop at the first mse below this value.
pub const MSE_FLOOR: f64 = 1e-28;

/// Minimum number of points for any fit.
pub const MIN_FIT_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionGap<T> {
    /// `‖D_σ(x) − P_Σ(x)‖ / ‖x‖`
    pub gap: T,
    /// `2 Σ_{ℓ≠k} (π_ℓ/π_k) exp(−η / (2t(1+t))) + t`, `t = σ²`
    pub bound: T,
    /// Frontier gap of `x`.
    pub eta: T,
}

/// Relative denoiser error against the metric projection, together with the
/// exponential-plus-`σ²` bound that holds away from the frontier.
pub fn projection_gap<T: Real>(prior: &LrGmmPrior<T>, x: &[T], sigma: T) -> Result<ProjectionGap<T>> {
    let xn = linalg::norm(x);
    if xn == T::zero() {
        return Err(Error::invalid("projection gap is undefined at x = 0"));
    }
    let union = prior.union();
    let norms = union.projection_norms_sq(x)?;
    let (k, eta) = frontier_gap_from_norms(&norms);
    if !(eta > T::zero()) {
        return Err(Error::Frontier { gap: eta.as_f64() });
    }
    let eval = prior.denoiser(x, sigma)?;
    let target = union.components()[k].project(x)?;
    let gap = linalg::distance(&eval.value, &target) / xn;

    let t = sigma * sigma;
    let log_pi = prior.log_pi();
    let decay = (-eta / (T::lit(2.0) * t * (T::one() + t))).exp();
    let ratio_sum: T = log_pi
        .iter()
        .enumerate()
        .filter(|&(l, _)| l != k)
        .map(|(_, &lp)| (lp - log_pi[k]).exp())
        .sum();
    let bound = T::lit(2.0) * ratio_sum * decay + t;
    Ok(ProjectionGap { gap, bound, eta })
}

/// Index of the strictly closest component, or `None` on ties.
fn unique_argmin<T: Real>(d: &[T]) -> Option<usize> {
    let mut best = 0;
    for (k, &v) in d.iter().enumerate() {
        if v < d[best] {
            best = k;
        }
    }
    let tied = d.iter().enumerate().any(|(k, &v)| k != best && !(v > d[best]));
    (!tied).then_some(best)
}

/// Smallest `n*` such that from row `n*` on the strictly closest component
/// is `true_component`. Rows where several components tie count as not
/// identified.
pub fn detect_burn_in<T: Real>(trace: &RecoveryTrace<T>, true_component: usize) -> Result<Option<usize>> {
    if trace.rows.is_empty() || trace.rows.iter().any(|r| r.subspace_distances.is_empty()) {
        return Err(Error::invalid("trace has no subspace distances"));
    }
    let mut start: Option<usize> = None;
    for row in &trace.rows {
        if unique_argmin(&row.subspace_distances) == Some(true_component) {
            start.get_or_insert(row.n);
        } else {
            start = None;
        }
    }
    Ok(start)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

/// Ordinary least squares `y ≈ slope·x + intercept` with coefficient of
/// determination. A perfect fit of constant data reports `r2 = 1`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(Error::InsufficientData { needed: 2, have: n.min(ys.len()) });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("regressor is constant"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(LinearFit { slope, intercept, r2, points: n })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    /// Per-iteration contraction factor `exp(slope)` of `‖x_n − x̂‖`.
    pub rate: f64,
    pub r2: f64,
    pub points: usize,
}

/// Fits `½ log mse_n` against `n` from `from_n` to the end of the trace (or
/// to the first mse below [`MSE_FLOOR`]).
pub fn fit_linear_rate<T: Real>(trace: &RecoveryTrace<T>, from_n: usize) -> Result<RateFit> {
    let last = trace.rows.last().map(|r| r.n).unwrap_or(0);
    if from_n >= last {
        return Err(Error::invalid(format!("from_n = {from_n} must precede the last row n = {last}")));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for row in trace.rows.iter().filter(|r| r.n >= from_n) {
        let mse = row.mse.as_f64();
        if !(mse >= MSE_FLOOR) {
            break;
        }
        xs.push(row.n as f64);
        ys.push(0.5 * mse.ln());
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData { needed: MIN_FIT_POINTS, have: xs.len() });
    }
    let fit = least_squares(&xs, &ys)?;
    Ok(RateFit {
        rate: fit.slope.exp(),
        r2: fit.r2,
        points: fit.points,
    })
}

/// Slope of `log gap` against `log(σ √log(1/σ))`.
pub fn fit_convex_rate<T: Real>(curve: &[(T, T)]) -> Result<LinearFit> {
    if curve.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData { needed: MIN_FIT_POINTS, have: curve.len() });
    }
    let mut xs = Vec::with_capacity(curve.len());
    let mut ys = Vec::with_capacity(curve.len());
    for &(s, g) in curve {
        let (s, g) = (s.as_f64(), g.as_f64());
        if !(g > 0.0) || !(s > 0.0 && s < 1.0) {
            return Err(Error::invalid(format!("curve point (σ={s}, gap={g}) must have 0<σ<1 and gap>0")));
        }
        xs.push((s * (1.0 / s).ln().sqrt()).ln());
        ys.push(g.ln());
    }
    least_squares(&xs, &ys)
}

/// One line of a diagnostics report.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, value: f64, bound: f64, pass: bool) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            pass,
        }
    }
}

/// `name,value,bound,pass` CSV.
pub fn write_report_csv<W: Write>(records: &[CheckRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "name,value,bound,pass")?;
    for r in records {
        writeln!(w, "{},{},{},{}", r.name, fmt17(r.value), fmt17(r.bound), r.pass)?;
    }
    Ok(())
}

pub fn report_summary(records: &[CheckRecord]) -> String {
    let failed: Vec<&CheckRecord> = records.iter().filter(|r| !r.pass).collect();
    let mut s = String::new();
    for r in records {
        s.push_str(&format!(
            "[{}] {:<40} value={:<12.4e} bound={:.4e}\n",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.value,
            r.bound
        ));
    }
    s.push_str(&format!("{} checks, {} failed\n", records.len(), failed.len()));
    s
}
