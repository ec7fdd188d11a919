//! Recovery traces and their CSV serialisation.
//!
//! ```text
//! # projdiff-trace v1
//! # {"problem_hash":"…","schedule":"…",…}
//! n,sigma,mse,residual,frontier_gap,weight_entropy,dist_0,…,dist_{K-1}
//! 0,5.0000000000000000e-1,…
//! ```
//!
//! Floats are written with 17 significant digits and LF line endings.
//! Unavailable quantities are written as `NaN`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::schedule::ScheduleKind;

pub const TRACE_MAGIC: &str = "# projdiff-trace v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub problem_hash: String,
    pub schedule: String,
    pub schedule_kind: ScheduleKind,
    pub mu: f64,
    pub seed: u64,
    pub prior: String,
    pub d: usize,
    pub m: usize,
    pub n_iters: usize,
    pub num_components: Option<usize>,
    pub true_component: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow<T> {
    pub n: usize,
    pub sigma: T,
    /// The iterate, when iterates are recorded.
    pub x: Option<Vec<T>>,
    pub mse: T,
    pub residual: T,
    /// Distance to each component of the model union; empty without a model.
    pub subspace_distances: Vec<T>,
    pub frontier_gap: T,
    pub weight_entropy: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryTrace<T> {
    pub header: TraceHeader,
    pub rows: Vec<TraceRow<T>>,
}

impl<T: Real> RecoveryTrace<T> {
    pub fn final_mse(&self) -> Option<T> {
        self.rows.last().map(|r| r.mse)
    }

    /// Keeps rows with `n < len`.
    pub fn truncated(&self, len: usize) -> Self {
        Self {
            header: self.header.clone(),
            rows: self.rows.iter().take(len).cloned().collect(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let k = self.rows.first().map_or(0, |r| r.subspace_distances.len());
        writeln!(w, "{TRACE_MAGIC}")?;
        writeln!(w, "# {}", serde_json::to_string(&self.header).map_err(std::io::Error::other)?)?;
        write!(w, "n,sigma,mse,residual,frontier_gap,weight_entropy")?;
        for j in 0..k {
            write!(w, ",dist_{j}")?;
        }
        writeln!(w)?;
        for r in &self.rows {
            write!(
                w,
                "{},{},{},{},{},{}",
                r.n,
                fmt17(r.sigma),
                fmt17(r.mse),
                fmt17(r.residual),
                fmt17(r.frontier_gap),
                fmt17(r.weight_entropy)
            )?;
            for &dist in &r.subspace_distances {
                write!(w, ",{}", fmt17(dist))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("trace CSV is UTF-8")
    }

    /// Parses a v1 trace. Iterates are never stored in CSV, so `x` is `None`.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, Ok(l))) => Ok((i + 1, l)),
                Some((i, Err(e))) => Err(Error::Parse { line: i + 1, msg: e.to_string() }),
                None => Err(Error::Parse { line: 0, msg: format!("missing {what}") }),
            }
        };
        let (ln, magic) = next("magic line")?;
        if magic.trim_end() != TRACE_MAGIC {
            return Err(Error::Parse { line: ln, msg: "not a projdiff v1 trace".into() });
        }
        let (ln, meta) = next("metadata line")?;
        let json = meta
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse { line: ln, msg: "metadata line must start with '#'".into() })?;
        let header: TraceHeader =
            serde_json::from_str(json.trim()).map_err(|e| Error::Parse { line: ln, msg: e.to_string() })?;
        let (ln, cols) = next("column header")?;
        let names: Vec<&str> = cols.trim_end().split(',').collect();
        if names.len() < 6 || names[..6] != ["n", "sigma", "mse", "residual", "frontier_gap", "weight_entropy"] {
            return Err(Error::Parse { line: ln, msg: "unexpected column header".into() });
        }
        let k = names.len() - 6;
        let mut rows = Vec::new();
        for (i, line) in lines {
            let line = line.map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 6 + k {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("expected {} fields, found {}", 6 + k, fields.len()),
                });
            }
            let num = |j: usize| -> Result<T> {
                fields[j]
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| Error::Parse { line: i + 1, msg: format!("field {}: {e}", names[j]) })
            };
            let n = fields[0]
                .parse::<usize>()
                .map_err(|e| Error::Parse { line: i + 1, msg: format!("field n: {e}") })?;
            rows.push(TraceRow {
                n,
                sigma: num(1)?,
                x: None,
                mse: num(2)?,
                residual: num(3)?,
                frontier_gap: num(4)?,
                weight_entropy: num(5)?,
                subspace_distances: (6..6 + k).map(num).collect::<Result<_>>()?,
            });
        }
        Ok(Self { header, rows })
    }
}

/// 17 significant digits: exact round trip for `f64`.
pub fn fmt17<T: Real>(v: T) -> String {
    let v = v.as_f64();
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_trace() -> RecoveryTrace<f64> {
        RecoveryTrace {
            header: TraceHeader {
                problem_hash: "abcd".into(),
                schedule: "geometric sigma_max=0.5 sigma_min=0.0001 N=150".into(),
                schedule_kind: ScheduleKind::Geometric,
                mu: 0.0123,
                seed: 7,
                prior: "lrgmm d=2 K=2 r=1".into(),
                d: 2,
                m: 1,
                n_iters: 1,
                num_components: Some(2),
                true_component: Some(1),
            },
            rows: vec![
                TraceRow {
                    n: 0,
                    sigma: 0.5,
                    x: None,
                    mse: 0.1 + 0.2,
                    residual: 1.0 / 3.0,
                    subspace_distances: vec![0.0, std::f64::consts::PI],
                    frontier_gap: f64::INFINITY,
                    weight_entropy: f64::NAN,
                },
                TraceRow {
                    n: 1,
                    sigma: 1e-4,
                    x: None,
                    mse: 1e-300,
                    residual: 0.0,
                    subspace_distances: vec![1.5, 2.5],
                    frontier_gap: 3.0,
                    weight_entropy: 0.25,
                },
            ],
        }
    }

    #[test]
    fn csv_layout() {
        let s = sample_trace().to_csv_string();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], TRACE_MAGIC);
        assert!(lines[1].starts_with("# {"));
        assert_eq!(lines[2], "n,sigma,mse,residual,frontier_gap,weight_entropy,dist_0,dist_1");
        assert!(lines[3].starts_with("0,5.0000000000000000e-1,"));
        assert!(!s.contains('\r'));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let t = sample_trace();
        let back = RecoveryTrace::<f64>::read_csv(t.to_csv_string().as_bytes()).unwrap();
        assert_eq!(back.header, t.header);
        for (a, b) in back.rows.iter().zip(&t.rows) {
            assert_eq!(a.mse.to_bits(), b.mse.to_bits());
            assert_eq!(a.residual.to_bits(), b.residual.to_bits());
            assert_eq!(a.subspace_distances, b.subspace_distances);
            assert_eq!(a.frontier_gap, b.frontier_gap);
        }
        assert!(back.rows[0].weight_entropy.is_nan());
    }

    #[test]
    fn rejects_foreign_files() {
        assert!(RecoveryTrace::<f64>::read_csv("a,b\n1,2\n".as_bytes()).is_err());
        let mut s = sample_trace().to_csv_string();
        s.push_str("2,0.1\n");
        assert!(matches!(
            RecoveryTrace::<f64>::read_csv(s.as_bytes()),
            Err(Error::Parse { line: 6, .. })
        ));
    }
}
