//! One trial of an experiment: prior, sensing operator, ground truth and one
//! recovery run per schedule.
//!
//! Seed streams for trial seed `s`: prior `(s, 0)`, operator `(s, 1)`,
//! ground truth `(s, 2)`. A fixed `prior.seed` or `sensing.seed` replaces
//! `s` for that stream.

use projdiff::io::{read_model, ModelFile};
use projdiff::{
    gaussian_operator, run_recovery, BoxSet, Denoiser, Error, LrGmmPrior, Matrix, OracleProjection, RecoveryOptions,
    RecoveryTrace, SeededRng, SensingProblem, UnionOfSubspaces,
};

use crate::config::{DenoiserMode, ExperimentConfig, MuMode, PiMode, PriorConfig};

pub const PRIOR_STREAM: u64 = 0;
pub const OPERATOR_STREAM: u64 = 1;
pub const SIGNAL_STREAM: u64 = 2;

#[derive(Debug, Clone)]
pub enum Prior {
    Mixture(LrGmmPrior<f64>),
    Box(BoxSet<f64>),
}

impl Prior {
    pub fn build(cfg: &PriorConfig, trial_seed: u64) -> projdiff::Result<Self> {
        Ok(match cfg {
            PriorConfig::Lrgmm { d, r, k, pi, seed } => {
                let mut rng = SeededRng::substream(seed.unwrap_or(trial_seed), PRIOR_STREAM);
                let union = UnionOfSubspaces::random(*d, *r, *k, &mut rng)?;
                match pi {
                    PiMode::Uniform => Prior::Mixture(LrGmmPrior::uniform(union)),
                    PiMode::Explicit(w) => Prior::Mixture(LrGmmPrior::new(union, w)?),
                }
            }
            PriorConfig::Sparse { d, s } => Prior::Mixture(LrGmmPrior::sparse_gmm(*d, *s)?),
            PriorConfig::Box { d, s, half_width } => Prior::Box(BoxSet::centered_cube(*s, *d, *half_width)?),
            PriorConfig::File { path } => match read_model::<f64>(path)? {
                ModelFile::Prior(p) => Prior::Mixture(p),
                ModelFile::Union(u) => Prior::Mixture(LrGmmPrior::uniform(u)),
                ModelFile::Box(b) => Prior::Box(b),
                ModelFile::Matrix(_) => {
                    return Err(Error::InvalidArgument(format!("{} holds a matrix, not a prior", path.display())))
                }
            },
        })
    }

    pub fn ambient_dim(&self) -> usize {
        match self {
            Prior::Mixture(p) => p.ambient_dim(),
            Prior::Box(b) => b.ambient_dim(),
        }
    }

    pub fn union(&self) -> Option<&UnionOfSubspaces<f64>> {
        match self {
            Prior::Mixture(p) => Some(p.union()),
            Prior::Box(_) => None,
        }
    }

    /// Ground truth and, for mixtures, its component.
    pub fn sample(&self, rng: &mut SeededRng) -> (Vec<f64>, Option<usize>) {
        match self {
            Prior::Mixture(p) => {
                let (x, k) = p.sample_with_component(rng);
                (x, Some(k))
            }
            Prior::Box(b) => (b.sample(rng), None),
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            Prior::Mixture(p) => p.descriptor(),
            Prior::Box(b) => format!("box d={} active={}", b.ambient_dim(), b.intrinsic_dim()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trial {
    pub seed: u64,
    pub prior: Prior,
    pub problem: SensingProblem<f64>,
    pub true_component: Option<usize>,
}

impl Trial {
    pub fn build(cfg: &ExperimentConfig, trial_seed: u64) -> projdiff::Result<Self> {
        let prior = Prior::build(&cfg.prior, trial_seed)?;
        let d = prior.ambient_dim();
        let a: Matrix<f64> = match (&cfg.sensing.matrix, cfg.sensing.m) {
            (Some(path), _) => match read_model::<f64>(path)? {
                ModelFile::Matrix(a) => a,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "{} holds a {}, not a matrix",
                        path.display(),
                        other.kind()
                    )))
                }
            },
            (None, Some(m)) => {
                let mut rng = SeededRng::substream(cfg.sensing.seed.unwrap_or(trial_seed), OPERATOR_STREAM);
                gaussian_operator(m, d, &mut rng)?
            }
            (None, None) => return Err(Error::InvalidArgument("sensing needs m or matrix".into())),
        };
        projdiff::error::check_dim(d, a.cols())?;
        let (x_true, true_component) = prior.sample(&mut SeededRng::substream(trial_seed, SIGNAL_STREAM));
        let problem = match cfg.sensing.mu {
            MuMode::Auto => SensingProblem::with_default_step(a, x_true, trial_seed)?,
            MuMode::Explicit(mu) => SensingProblem::from_signal(a, x_true, mu, trial_seed)?,
        };
        Ok(Self {
            seed: trial_seed,
            prior,
            problem,
            true_component,
        })
    }

    /// Runs schedule `idx` of the configuration.
    pub fn run(&self, cfg: &ExperimentConfig, idx: usize) -> projdiff::Result<RecoveryTrace<f64>> {
        let schedule = cfg.schedules[idx]
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let mut opts = RecoveryOptions::new(cfg.run.n_iters);
        opts.model = self.prior.union();
        opts.true_component = self.true_component;
        opts.prior_descriptor = self.prior.descriptor();
        opts.record_iterates = Some(false);
        let oracle;
        let denoiser: &dyn Denoiser<f64> = match (&self.prior, cfg.run.denoiser) {
            (Prior::Mixture(p), DenoiserMode::Mmse) => p,
            (Prior::Mixture(p), DenoiserMode::Projection) => {
                oracle = OracleProjection::new(p.union());
                &oracle
            }
            (Prior::Box(b), DenoiserMode::Mmse) => b,
            (Prior::Box(_), DenoiserMode::Projection) => {
                return Err(Error::Unsupported("projection denoiser needs a union of subspaces".into()))
            }
        };
        run_recovery(&self.problem, denoiser, &schedule, &opts)
    }
}
