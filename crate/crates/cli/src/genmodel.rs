//! `gen-model`: writes a model file from a short spec string such as
//! `lrgmm:d=64,r=5,K=8,seed=1`.

use std::collections::BTreeMap;

use projdiff::io::ModelFile;
use projdiff::{gaussian_operator, BoxSet, LrGmmPrior, SeededRng, UnionOfSubspaces};

use crate::error::CliError;
use crate::experiment::{OPERATOR_STREAM, PRIOR_STREAM};

pub const SPEC_HELP: &str = "\
lrgmm:d=<d>,r=<r>,K=<K>[,seed=<s>]   uniform mixture of K random r-dim subspaces
union:d=<d>,r=<r>,K=<K>[,seed=<s>]   the same subspaces without weights
sparse:d=<d>,s=<s>                   all C(d,s) coordinate subspaces
box:d=<d>,s=<s>[,half_width=<h>]     [-h,h]^s x {0}^(d-s)
matrix:m=<m>,d=<d>[,seed=<s>]        i.i.d. standard normal m x d matrix";

fn parse_fields(body: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for part in body.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("expected key=value, found '{part}'")))?;
        if out.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("duplicate key '{}'", k.trim())));
        }
    }
    Ok(out)
}

struct Fields(BTreeMap<String, String>);

impl Fields {
    fn take<T: std::str::FromStr>(&mut self, key: &str, default: Option<T>) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.0.remove(key) {
            Some(v) => v
                .parse()
                .map_err(|e| CliError::Config(format!("{key}={v}: {e}"))),
            None => default.ok_or_else(|| CliError::Config(format!("missing {key}"))),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        match self.0.keys().next() {
            Some(k) => Err(CliError::Config(format!("unknown key '{k}'"))),
            None => Ok(()),
        }
    }
}

pub fn generate(spec: &str) -> Result<ModelFile<f64>, CliError> {
    let (kind, body) = spec.split_once(':').unwrap_or((spec, ""));
    let mut f = Fields(parse_fields(body)?);
    let core = |e: projdiff::Error| CliError::Config(format!("{spec}: {e}"));
    let model = match kind {
        "lrgmm" | "union" => {
            let d = f.take("d", None)?;
            let r = f.take("r", None)?;
            let k = f.take("K", None)?;
            let seed = f.take("seed", Some(0u64))?;
            let union = UnionOfSubspaces::random(d, r, k, &mut SeededRng::substream(seed, PRIOR_STREAM)).map_err(core)?;
            if kind == "lrgmm" {
                ModelFile::Prior(LrGmmPrior::uniform(union))
            } else {
                ModelFile::Union(union)
            }
        }
        "sparse" => {
            let d = f.take("d", None)?;
            let s = f.take("s", None)?;
            ModelFile::Prior(LrGmmPrior::sparse_gmm(d, s).map_err(core)?)
        }
        "box" => {
            let d = f.take("d", None)?;
            let s = f.take("s", None)?;
            let h = f.take("half_width", Some(1.0))?;
            ModelFile::Box(BoxSet::centered_cube(s, d, h).map_err(core)?)
        }
        "matrix" => {
            let m = f.take("m", None)?;
            let d = f.take("d", None)?;
            let seed = f.take("seed", Some(0u64))?;
            ModelFile::Matrix(gaussian_operator(m, d, &mut SeededRng::substream(seed, OPERATOR_STREAM)).map_err(core)?)
        }
        other => return Err(CliError::Config(format!("unknown model kind '{other}'\n{SPEC_HELP}"))),
    };
    f.finish()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn specs() {
        assert!(matches!(generate("lrgmm:d=8,r=2,K=3,seed=1"), Ok(ModelFile::Prior(p)) if p.num_components() == 3));
        assert!(matches!(generate("sparse:d=5,s=2"), Ok(ModelFile::Prior(p)) if p.num_components() == 10));
        assert!(matches!(generate("box:d=3,s=2,half_width=0.5"), Ok(ModelFile::Box(_))));
        assert!(matches!(generate("matrix:m=2,d=3"), Ok(ModelFile::Matrix(a)) if a.rows() == 2));
        assert!(generate("lrgmm:d=8,r=2").is_err());
        assert!(generate("box:d=3,s=2,colour=red").is_err());
        assert!(generate("cone:d=3").is_err());
    }

    #[test]
    fn same_seed_same_subspaces_as_experiment_prior() {
        let cfg = crate::config::PriorConfig::Lrgmm {
            d: 10,
            r: 2,
            k: 3,
            pi: crate::config::PiMode::Uniform,
            seed: Some(4),
        };
        let built = crate::experiment::Prior::build(&cfg, 99).unwrap();
        match (generate("lrgmm:d=10,r=2,K=3,seed=4").unwrap(), built) {
            (ModelFile::Prior(p), crate::experiment::Prior::Mixture(q)) => assert_eq!(p, q),
            _ => panic!("unexpected model kinds"),
        }
    }
}
