//! Parallel experiment sweeps. Every task is a pure function of
//! `(config, N, sample index)` and results are collected in index order, so
//! output does not depend on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{
    additive_energy, additive_energy_fingerprint, difference_energy, difference_energy_fingerprint,
    difference_profile,
};
use crate::error::{Error, Result};
use crate::fixed::FixedPointReal;
use crate::harness::config::ExperimentConfig;
use crate::seqgen::{dilate_mod1, generate_sequence, sample_alpha, IntegerSequence, SequenceSpec};
use crate::stats::{
    number_variance_exact, number_variance_montecarlo, pair_correlation_direct,
    pair_correlation_fourier, TestFunction, WindowParams,
};
use crate::theory::{deviation_fraction, fourier_coefficient_from_profile};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub seq_id: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub beta: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub alpha_hex: String,
    pub sigma2: f64,
    #[serde(rename = "sigma2_over_L")]
    pub sigma2_over_l: f64,
    pub r2_tent: f64,
    pub method: String,
}

impl ExperimentRow {
    pub fn alpha(&self) -> Result<FixedPointReal> {
        FixedPointReal::from_hex(&self.alpha_hex)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub n_alpha: u64,
    pub median_ratio: f64,
    pub mean_ratio: f64,
    pub deviation_fraction: f64,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarianceRun {
    pub rows: Vec<ExperimentRow>,
    pub summary: Vec<SummaryRow>,
}

/// A 64-bit stream id for task `(n, index)`, mixed with SplitMix64 so
/// neighbouring tasks get unrelated streams.
pub fn task_seed(seed: u64, n: usize, index: u64) -> u64 {
    let mut z = seed;
    for word in [n as u64, index] {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15).wrapping_add(word);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
    }
    z
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// `Σ²_N(L, α)` for every `N` in the schedule and `α = sample_alpha(seed, i)`,
/// `i < alpha_samples`. The same `α` values are used at every `N`.
pub fn run_variance_experiment(cfg: &ExperimentConfig) -> Result<VarianceRun> {
    cfg.validate()?;
    let seq_id = cfg.seq.id();
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for n in cfg.schedule.sizes() {
        let seq = generate_sequence(&cfg.seq, n)?;
        let params = WindowParams::from_beta(n, cfg.beta)?;
        let block: Vec<ExperimentRow> = (0..cfg.alpha_samples)
            .into_par_iter()
            .map(|i| variance_row(cfg, &seq_id, &seq, &params, i))
            .collect::<Result<_>>()
            .map_err(|e| with_context(e, &format!("N = {n}")))?;
        let ratios: Vec<f64> = block.iter().map(|r| r.sigma2_over_l).collect();
        let sigma2: Vec<f64> = block.iter().map(|r| r.sigma2).collect();
        summary.push(SummaryRow {
            n,
            l: params.l,
            n_alpha: cfg.alpha_samples,
            median_ratio: median(&ratios),
            mean_ratio: ratios.iter().sum::<f64>() / ratios.len() as f64,
            deviation_fraction: deviation_fraction(&sigma2, params.l, cfg.delta),
            delta: cfg.delta,
        });
        rows.extend(block);
    }
    Ok(VarianceRun { rows, summary })
}

fn variance_row(
    cfg: &ExperimentConfig,
    seq_id: &str,
    seq: &IntegerSequence,
    params: &WindowParams,
    index: u64,
) -> Result<ExperimentRow> {
    let alpha = sample_alpha(cfg.seed, index);
    let points = dilate_mod1(alpha, seq);
    let variance = match cfg.mc_samples {
        Some(m) => {
            number_variance_montecarlo(&points, params, m, task_seed(cfg.seed, params.n, index))?
        }
        None => number_variance_exact(&points, params)?,
    };
    let r2 = pair_correlation_direct(&points, params, &TestFunction::Tent)?.r2;
    let method = serde_json::to_value(variance.method)?
        .as_str()
        .unwrap_or_default()
        .to_string();
    Ok(ExperimentRow {
        seq_id: seq_id.to_string(),
        n: params.n,
        beta: cfg.beta,
        l: params.l,
        alpha_hex: alpha.to_hex(),
        sigma2: variance.sigma2,
        sigma2_over_l: variance.sigma2 / params.l,
        r2_tent: r2,
        method,
    })
}

fn with_context(e: Error, ctx: &str) -> Error {
    match e {
        Error::Budget(m) => Error::Budget(format!("{ctx}: {m}")),
        Error::Config(m) => Error::Config(format!("{ctx}: {m}")),
        Error::Window(m) => Error::Window(format!("{ctx}: {m}")),
        Error::Overflow(m) => Error::Overflow(format!("{ctx}: {m}")),
        other => other,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyRow {
    pub seq_id: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub energy: u128,
    pub energy_over_n2: f64,
    pub log_energy_over_log_n: f64,
    pub difference_energy: u128,
    /// `exact`, or `fingerprint` when terms exceed 64 bits.
    pub route: String,
}

pub fn energy_row(spec: &SequenceSpec, n: usize) -> Result<EnergyRow> {
    let (energy, de, route) = match generate_sequence(spec, n) {
        Ok(seq) => (
            additive_energy(&seq).energy,
            difference_energy(&difference_profile(&seq)),
            "exact",
        ),
        Err(Error::Overflow(_)) => (
            additive_energy_fingerprint(spec, n)?,
            difference_energy_fingerprint(spec, n)?,
            "fingerprint",
        ),
        Err(e) => return Err(e),
    };
    let nf = n as f64;
    Ok(EnergyRow {
        seq_id: spec.id(),
        n,
        energy,
        energy_over_n2: energy as f64 / (nf * nf),
        log_energy_over_log_n: (energy as f64).ln() / nf.ln(),
        difference_energy: de,
        route: route.to_string(),
    })
}

/// One [`EnergyRow`] per `N` in the schedule.
pub fn run_energy_sweep(cfg: &ExperimentConfig) -> Result<Vec<EnergyRow>> {
    cfg.validate()?;
    cfg.schedule
        .sizes()
        .into_iter()
        .map(|n| energy_row(&cfg.seq, n).map_err(|e| with_context(e, &format!("N = {n}"))))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCorrRow {
    pub seq_id: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub beta: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub alpha_hex: String,
    pub r2_direct: f64,
    pub r2_fourier: f64,
    pub truncation_bound: f64,
    pub cutoff: u64,
}

/// `R²_N(L, α, Δ)` by both routes for each sampled `α`.
pub fn run_paircorr_experiment(cfg: &ExperimentConfig) -> Result<Vec<PairCorrRow>> {
    cfg.validate()?;
    let seq_id = cfg.seq.id();
    let mut rows = Vec::new();
    for n in cfg.schedule.sizes() {
        let seq = generate_sequence(&cfg.seq, n)?;
        let params = WindowParams::from_beta(n, cfg.beta)?;
        let block: Vec<PairCorrRow> = (0..cfg.alpha_samples)
            .into_par_iter()
            .map(|i| {
                let alpha = sample_alpha(cfg.seed, i);
                let direct = pair_correlation_direct(
                    &dilate_mod1(alpha, &seq),
                    &params,
                    &TestFunction::Tent,
                )?;
                let fourier = pair_correlation_fourier(&seq, alpha, &params, cfg.tol)?;
                Ok(PairCorrRow {
                    seq_id: seq_id.clone(),
                    n,
                    beta: cfg.beta,
                    l: params.l,
                    alpha_hex: alpha.to_hex(),
                    r2_direct: direct.r2,
                    r2_fourier: fourier.r2,
                    truncation_bound: fourier.truncation_bound.unwrap_or(0.0),
                    cutoff: fourier.cutoff.unwrap_or(0),
                })
            })
            .collect::<Result<_>>()
            .map_err(|e| with_context(e, &format!("N = {n}")))?;
        rows.extend(block);
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoeffRow {
    pub seq_id: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub k: i64,
    pub b_k: f64,
}

/// `b_k` for `k = k_min..=k_max` (skipping 0) at every `N` in the schedule.
pub fn run_coefficients(cfg: &ExperimentConfig, k_min: i64, k_max: i64) -> Result<Vec<CoeffRow>> {
    cfg.validate()?;
    if k_min > k_max {
        return Err(Error::Config(format!("empty k range {k_min}..{k_max}")));
    }
    let seq_id = cfg.seq.id();
    let mut rows = Vec::new();
    for n in cfg.schedule.sizes() {
        let seq = generate_sequence(&cfg.seq, n)?;
        let params = WindowParams::from_beta(n, cfg.beta)?;
        let profile = difference_profile(&seq);
        let block: Vec<CoeffRow> = (k_min..=k_max)
            .into_par_iter()
            .filter(|&k| k != 0)
            .map(|k| {
                Ok(CoeffRow {
                    seq_id: seq_id.clone(),
                    n,
                    l: params.l,
                    k,
                    b_k: fourier_coefficient_from_profile(&profile, k, &params)?.value,
                })
            })
            .collect::<Result<_>>()?;
        rows.extend(block);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Schedule;
    use crate::harness::output::to_csv_string;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            schedule: Schedule::Explicit(vec![50, 200]),
            alpha_samples: 4,
            seed: 11,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn variance_run_shape() {
        let run = run_variance_experiment(&small_cfg()).unwrap();
        assert_eq!(run.rows.len(), 8);
        assert_eq!(run.summary.len(), 2);
        assert_eq!(run.rows[0].n, 50);
        assert_eq!(run.rows[4].n, 200);
        // The same α at every N.
        assert_eq!(run.rows[1].alpha_hex, run.rows[5].alpha_hex);
        for r in &run.rows {
            assert_eq!(r.sigma2_over_l, r.sigma2 / r.l);
            assert_eq!(r.method, "exact_tent");
            let identity = r.l - r.l * r.l + r.l * r.r2_tent;
            assert!((r.sigma2 - identity).abs() < 1e-9 * r.l.max(1.0).powi(2));
        }
    }

    #[test]
    fn variance_run_is_repeatable() {
        let a = to_csv_string(&run_variance_experiment(&small_cfg()).unwrap().rows).unwrap();
        let b = to_csv_string(&run_variance_experiment(&small_cfg()).unwrap().rows).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("seq_id,N,beta,L,alpha_hex,sigma2,sigma2_over_L,r2_tent,method\n"));
    }

    #[test]
    fn unit_window() {
        let cfg = ExperimentConfig {
            beta: 0.0,
            ..small_cfg()
        };
        let run = run_variance_experiment(&cfg).unwrap();
        assert!(run.rows.iter().all(|r| r.l == 1.0 && r.sigma2 >= 0.0));
    }

    #[test]
    fn monte_carlo_rows() {
        let cfg = ExperimentConfig {
            mc_samples: Some(2000),
            ..small_cfg()
        };
        let run = run_variance_experiment(&cfg).unwrap();
        assert!(run.rows.iter().all(|r| r.method == "monte_carlo"));
    }

    #[test]
    fn energy_rows() {
        let cfg = ExperimentConfig {
            seq: SequenceSpec::monomial(1),
            schedule: Schedule::Explicit(vec![10, 20]),
            ..ExperimentConfig::default()
        };
        let rows = run_energy_sweep(&cfg).unwrap();
        for r in rows {
            let n = r.n as u128;
            assert_eq!(r.energy, (2 * n * n * n + n) / 3);
            assert_eq!(r.route, "exact");
        }
        let row = energy_row(&SequenceSpec::lacunary(2), 100).unwrap();
        assert_eq!(row.route, "fingerprint");
        assert_eq!(row.energy, 2 * 100 * 100 - 100);
        assert_eq!(row.difference_energy, 100 * 99);
    }

    #[test]
    fn paircorr_and_coeffs() {
        let cfg = ExperimentConfig {
            schedule: Schedule::Explicit(vec![30]),
            alpha_samples: 2,
            ..ExperimentConfig::default()
        };
        for r in run_paircorr_experiment(&cfg).unwrap() {
            assert!((r.r2_direct - r.r2_fourier).abs() <= cfg.tol + 1e-9);
        }
        let rows = run_coefficients(&cfg, -3, 3).unwrap();
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[0].b_k, rows[5].b_k);
    }

    #[test]
    fn task_seeds_differ() {
        assert_ne!(task_seed(1, 10, 0), task_seed(1, 10, 1));
        assert_ne!(task_seed(1, 10, 0), task_seed(1, 11, 0));
        assert_eq!(task_seed(7, 3, 2), task_seed(7, 3, 2));
    }
}
