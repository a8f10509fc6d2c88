//! Phase-diagram sweeps: run one experiment per grid point and write CSV.

use std::io::Write;

use planted_core::{Problem, ProblemParams};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::experiment::{run_error_experiment, ExperimentConfig};

/// Header of sweep CSV files.
pub const CSV_HEADER: &str = "alpha,beta,n,k,extra_params,solver,type1,type2,trials,seed";

/// Grid point: exponent coordinates (`k = ⌈n^β⌉`, signal `n^{−α}`) or a raw
/// parameter record, whose CSV row carries NaN exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridPoint {
    /// Exponent coordinates.
    Exponents {
        /// Signal exponent.
        alpha: f64,
        /// Sparsity exponent.
        beta: f64,
        /// Size.
        n: usize,
    },
    /// Explicit generator parameters.
    Raw(ProblemParams),
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Signal exponent.
    pub alpha: f64,
    /// Sparsity exponent.
    pub beta: f64,
    /// Size.
    pub n: usize,
    /// Planted size.
    pub k: usize,
    /// Remaining parameters as `key=value` pairs joined by `;`.
    pub extra_params: String,
    /// Solver name.
    pub solver: String,
    /// Type I rate (NaN if the point failed).
    pub type1: f64,
    /// Type II rate (NaN if the point failed).
    pub type2: f64,
    /// Trials per hypothesis.
    pub trials: usize,
    /// Seed of this point.
    pub seed: u64,
}

/// Generator parameters at `point`, keeping the other fields of `base`.
///
/// Signal mapping by problem: `μ = n^{−α}` for BC, SROS and SSW; `μ = k n^{−α}`
/// for ROS; `p = q + n^{−α}` for PDS; `q = n^{−α}` for PIS; `θ = n^{−α}` for
/// sparse PCA (with `d = n` unless `base.d` is set); `ρ = n^{−α}` for SSBM.
/// PC keeps its density and only `k` moves.
pub fn params_at(base: &ProblemParams, alpha: f64, beta: f64, n: usize) -> ProblemParams {
    let nf = n as f64;
    let k = (nf.powf(beta) - 1e-9).ceil().clamp(1.0, nf) as usize;
    let s = nf.powf(-alpha);
    let mut p = ProblemParams { n, k, ..base.clone() };
    match base.problem {
        Problem::PC => {}
        Problem::PIS => p.q = s,
        Problem::PDS => p.p = (p.q + s).min(1.0),
        Problem::SSBM => p.rho = s.min(p.q.min(1.0 - p.q)),
        Problem::BC | Problem::SROS | Problem::SSW => p.mu = s,
        Problem::ROS => p.mu = k as f64 * s,
        Problem::SPCA | Problem::BSPCA | Problem::USPCA | Problem::UBSPCA => {
            if p.d == 0 || p.d < k {
                p.d = n;
            }
            p.k = k.min(p.d);
            p.theta = s;
        }
    }
    p
}

fn extras(p: &ProblemParams) -> String {
    let mut v = Vec::new();
    match p.problem {
        Problem::PC => v.push(format!("p={}", p.p)),
        Problem::PIS => v.push(format!("q={}", p.q)),
        Problem::PDS => v.extend([format!("p={}", p.p), format!("q={}", p.q)]),
        Problem::SSBM => v.extend([format!("q={}", p.q), format!("rho={}", p.rho)]),
        Problem::BC | Problem::ROS | Problem::SROS | Problem::SSW => v.push(format!("mu={}", p.mu)),
        _ => v.extend([format!("d={}", p.d), format!("theta={}", p.theta)]),
    }
    v.join(";")
}

/// Run `base` at every grid point. Point `i` uses seed `base.seed + i`; a
/// point that fails to configure, or whose every trial fails, yields a row with NaN rates.
pub fn phase_sweep(base: &ExperimentConfig, grid: &[GridPoint]) -> Vec<SweepRow> {
    grid.iter()
        .enumerate()
        .map(|(i, pt)| {
            let (alpha, beta, params) = match pt {
                GridPoint::Exponents { alpha, beta, n } => (*alpha, *beta, params_at(&base.params, *alpha, *beta, *n)),
                GridPoint::Raw(p) => (f64::NAN, f64::NAN, p.clone()),
            };
            let seed = base.seed.wrapping_add(i as u64);
            let cfg = ExperimentConfig { params: params.clone(), seed, output: None, ..base.clone() };
            let (type1, type2) = match run_error_experiment(&cfg) {
                Ok(r) if r.type1.failures + r.type2.failures < 2 * r.trials => (r.type1.rate, r.type2.rate),
                _ => (f64::NAN, f64::NAN),
            };
            SweepRow {
                alpha,
                beta,
                n: params.n,
                k: params.k,
                extra_params: extras(&params),
                solver: base.solver.name.as_str().to_string(),
                type1,
                type2,
                trials: base.trials,
                seed,
            }
        })
        .collect()
}

/// Write rows under [`CSV_HEADER`].
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Cartesian grid over `alphas × betas` at size `n`.
pub fn grid(alphas: &[f64], betas: &[f64], n: usize) -> Vec<GridPoint> {
    alphas.iter().flat_map(|&alpha| betas.iter().map(move |&beta| GridPoint::Exponents { alpha, beta, n })).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{SolverName, SolverSpec};

    #[test]
    fn header_and_rows() {
        let base = ExperimentConfig {
            problem: Problem::BC,
            params: ProblemParams::matrix(Problem::BC, 30, 5, 1.0),
            pipeline: None,
            solver: SolverSpec::new(SolverName::BcSumMax),
            trials: 3,
            seed: 10,
            output: None,
        };
        let rows = phase_sweep(&base, &grid(&[0.0, 0.5], &[0.5], 30));
        assert_eq!(rows[1].seed, 11);
        assert_eq!(rows[0].k, 6);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn failed_point_is_nan() {
        let base = ExperimentConfig {
            problem: Problem::SSBM,
            params: ProblemParams::ssbm(20, 4, 0.5, 0.1),
            pipeline: None,
            solver: SolverSpec::new(SolverName::BcSumMax),
            trials: 2,
            seed: 0,
            output: None,
        };
        let rows = phase_sweep(&base, &grid(&[0.5], &[0.5], 20));
        assert!(rows[0].type1.is_nan());
    }

    #[test]
    fn raw_point() {
        let base = ExperimentConfig {
            problem: Problem::BC,
            params: ProblemParams::matrix(Problem::BC, 30, 5, 1.0),
            pipeline: None,
            solver: SolverSpec::new(SolverName::BcSumMax),
            trials: 2,
            seed: 1,
            output: None,
        };
        let rows = phase_sweep(&base, &[GridPoint::Raw(ProblemParams::matrix(Problem::BC, 20, 4, 2.0))]);
        assert!(rows[0].alpha.is_nan());
        assert_eq!((rows[0].n, rows[0].k), (20, 4));
        assert_eq!(rows[0].extra_params, "mu=2");
    }

    #[test]
    fn signal_mapping() {
        let p = params_at(&ProblemParams::pds(100, 1, 0.3, 0.2), 1.0, 0.5, 100);
        assert_eq!(p.k, 10);
        assert!((p.p - 0.21).abs() < 1e-12);
    }
}
