//! Noise schedules `σ_n` driving the time-varying denoiser.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    /// `σ_max (σ_min/σ_max)^{n/N}`
    Geometric,
    /// `σ_n² = σ_max² + (n/N)(σ_min² − σ_max²)`
    Linear,
    /// `σ_min + ½(σ_max − σ_min)(1 + cos(π n / N))`
    Cosine,
    /// `σ_max aⁿ`, no horizon
    InfiniteGeometric,
}

impl ScheduleKind {
    pub const ALL: [ScheduleKind; 4] = [
        ScheduleKind::Geometric,
        ScheduleKind::Linear,
        ScheduleKind::Cosine,
        ScheduleKind::InfiniteGeometric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScheduleKind::Geometric => "geometric",
            ScheduleKind::Linear => "linear",
            ScheduleKind::Cosine => "cosine",
            ScheduleKind::InfiniteGeometric => "infinite_geometric",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl std::fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSchedule<T> {
    kind: ScheduleKind,
    sigma_max: T,
    sigma_min: T,
    horizon: usize,
    ratio: T,
}

impl<T: Real> NoiseSchedule<T> {
    fn finite(kind: ScheduleKind, sigma_max: T, sigma_min: T, horizon: usize) -> Result<Self> {
        if !(sigma_min > T::zero()) || !(sigma_min <= sigma_max) || !sigma_max.is_finite() {
            return Err(Error::invalid(format!(
                "{kind} schedule needs 0 < sigma_min <= sigma_max, got [{sigma_min}, {sigma_max}]"
            )));
        }
        if horizon == 0 {
            return Err(Error::invalid("schedule horizon N must be positive"));
        }
        Ok(Self {
            kind,
            sigma_max,
            sigma_min,
            horizon,
            ratio: T::nan(),
        })
    }

    pub fn geometric(sigma_max: T, sigma_min: T, horizon: usize) -> Result<Self> {
        Self::finite(ScheduleKind::Geometric, sigma_max, sigma_min, horizon)
    }

    pub fn linear(sigma_max: T, sigma_min: T, horizon: usize) -> Result<Self> {
        Self::finite(ScheduleKind::Linear, sigma_max, sigma_min, horizon)
    }

    pub fn cosine(sigma_max: T, sigma_min: T, horizon: usize) -> Result<Self> {
        Self::finite(ScheduleKind::Cosine, sigma_max, sigma_min, horizon)
    }

    pub fn infinite_geometric(sigma_max: T, ratio: T) -> Result<Self> {
        if !(sigma_max > T::zero()) || !sigma_max.is_finite() {
            return Err(Error::invalid("sigma_max must be positive"));
        }
        if !(ratio > T::zero() && ratio < T::one()) {
            return Err(Error::invalid(format!("ratio a must lie in (0, 1), got {ratio}")));
        }
        Ok(Self {
            kind: ScheduleKind::InfiniteGeometric,
            sigma_max,
            sigma_min: T::zero(),
            horizon: 0,
            ratio,
        })
    }

    /// Builds any kind from the common parameter set; `ratio` is used only
    /// by the infinite geometric schedule, `sigma_min`/`horizon` only by the
    /// finite ones.
    pub fn from_kind(kind: ScheduleKind, sigma_max: T, sigma_min: T, horizon: usize, ratio: T) -> Result<Self> {
        match kind {
            ScheduleKind::InfiniteGeometric => Self::infinite_geometric(sigma_max, ratio),
            k => Self::finite(k, sigma_max, sigma_min, horizon),
        }
    }

    #[inline]
    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    #[inline]
    pub fn sigma_max(&self) -> T {
        self.sigma_max
    }

    #[inline]
    pub fn sigma_min(&self) -> T {
        self.sigma_min
    }

    /// `None` for the infinite geometric schedule.
    pub fn horizon(&self) -> Option<usize> {
        (self.kind != ScheduleKind::InfiniteGeometric).then_some(self.horizon)
    }

    pub fn ratio(&self) -> Option<T> {
        (self.kind == ScheduleKind::InfiniteGeometric).then_some(self.ratio)
    }

    /// `σ_n`. Finite schedules are defined for `0 ≤ n ≤ N`.
    pub fn sigma(&self, n: usize) -> Result<T> {
        if let Some(horizon) = self.horizon() {
            if n > horizon {
                return Err(Error::invalid(format!("index {n} outside schedule domain 0..={horizon}")));
            }
        }
        let frac = || T::from_usize_lossy(n) / T::from_usize_lossy(self.horizon);
        let (hi, lo) = (self.sigma_max, self.sigma_min);
        let s = match self.kind {
            ScheduleKind::Geometric => hi * (lo / hi).powf(frac()),
            ScheduleKind::Linear => {
                let f = frac();
                ((T::one() - f) * hi * hi + f * lo * lo).sqrt()
            }
            ScheduleKind::Cosine => {
                let c = T::lit(0.5) * (T::one() + (T::PI() * frac()).cos());
                c * hi + (T::one() - c) * lo
            }
            ScheduleKind::InfiniteGeometric => hi * self.ratio.powi(n as i32),
        };
        Ok(s)
    }

    /// Per-iteration decay factor of the geometric schedules.
    pub fn geometric_ratio(&self) -> Option<T> {
        match self.kind {
            ScheduleKind::Geometric => Some((self.sigma_min / self.sigma_max).powf(T::one() / T::from_usize_lossy(self.horizon))),
            ScheduleKind::InfiniteGeometric => Some(self.ratio),
            _ => None,
        }
    }

    pub fn descriptor(&self) -> String {
        match self.kind {
            ScheduleKind::InfiniteGeometric => {
                format!("infinite_geometric sigma_max={} a={}", self.sigma_max, self.ratio)
            }
            k => format!(
                "{k} sigma_max={} sigma_min={} N={}",
                self.sigma_max, self.sigma_min, self.horizon
            ),
        }
    }
}

pub fn schedule_sigma<T: Real>(s: &NoiseSchedule<T>, n: usize) -> Result<T> {
    s.sigma(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints() {
        let g = NoiseSchedule::geometric(0.5f64, 1e-4, 150).unwrap();
        assert_eq!(g.sigma(0).unwrap(), 0.5);
        assert!((g.sigma(150).unwrap() - 1e-4).abs() < 1e-18);
        assert!(g.sigma(151).is_err());

        let l = NoiseSchedule::linear(0.5f64, 1e-4, 150).unwrap();
        assert_eq!(l.sigma(0).unwrap(), 0.5);
        assert!((l.sigma(150).unwrap() - 1e-4).abs() < 1e-15);
    }

    #[test]
    fn cosine_midpoint() {
        let c = NoiseSchedule::cosine(0.5f64, 1e-4, 150).unwrap();
        let mid = c.sigma(75).unwrap();
        assert!((mid - (1e-4 + 0.5 * (0.5 - 1e-4))).abs() < 1e-15);
    }

    #[test]
    fn geometric_midpoint_value() {
        let g = NoiseSchedule::geometric(0.5f64, 1e-4, 150).unwrap();
        let v = g.sigma(75).unwrap();
        assert!((v - 0.5 * (2e-4f64).sqrt()).abs() < 1e-15);
        assert!((v - 7.0711e-3).abs() < 1e-7);
    }

    #[test]
    fn infinite_geometric_has_no_horizon() {
        let s = NoiseSchedule::infinite_geometric(0.5f64, 0.9).unwrap();
        assert_eq!(s.horizon(), None);
        assert!(s.sigma(1_000).unwrap() > 0.0);
        assert!((s.sigma(2).unwrap() - 0.5 * 0.81).abs() < 1e-15);
        assert!(NoiseSchedule::infinite_geometric(0.5f64, 1.0).is_err());
    }

    #[test]
    fn invalid_ranges() {
        assert!(NoiseSchedule::geometric(0.1, 0.5, 10).is_err());
        assert!(NoiseSchedule::cosine(0.5, 0.0, 10).is_err());
        assert!(NoiseSchedule::linear(0.5, 0.1, 0).is_err());
    }
}
