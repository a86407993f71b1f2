//! Randomised verification suites over the `theory` and `stats` checks,
//! reported as a machine-readable pass/fail summary.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed::FixedPointReal;
use crate::seqgen::{dilate_mod1, generate_sequence, IntegerSequence, SequenceSpec};
use crate::stats::{number_variance_sweep, pair_correlation_direct, TestFunction, WindowParams};
use crate::theory::{
    alpha_grid_mean, lemma1_check, lemma2_check, mean_pair_correlation, x_second_moment,
    MomentBudget, MomentMethod,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Lemma1,
    Lemma2,
    Parseval,
    Mean,
    Identity,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Lemma1,
        Suite::Lemma2,
        Suite::Parseval,
        Suite::Mean,
        Suite::Identity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma1 => "lemma1",
            Suite::Lemma2 => "lemma2",
            Suite::Parseval => "parseval",
            Suite::Mean => "mean",
            Suite::Identity => "identity",
        }
    }

    fn default_trials(self) -> usize {
        match self {
            Suite::Lemma1 | Suite::Lemma2 => 1000,
            Suite::Parseval => 6,
            Suite::Mean => 10,
            Suite::Identity => 200,
        }
    }

    /// Distinct RNG stream per suite.
    fn stream(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub suites: Vec<Suite>,
    /// Truncation tolerance for the lemma checks.
    pub tol: f64,
    pub seed: u64,
    /// Overrides each suite's default trial count.
    pub trials: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            suites: Suite::ALL.to_vec(),
            tol: 1e-9,
            seed: 0,
            trials: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub trials: usize,
    pub failures: usize,
    pub passed: bool,
    /// Largest observed `lhs/bound` or relative error, depending on the suite.
    pub worst: f64,
    pub criterion: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub tol: f64,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

/// Runs the selected suites. A failing check is reported, not raised;
/// errors such as an impossible tolerance are raised.
pub fn run_verification_suite(opts: &VerifyOptions) -> Result<VerificationReport> {
    let mut suites = Vec::new();
    for &suite in &opts.suites {
        let trials = opts.trials.unwrap_or_else(|| suite.default_trials());
        let mut rng = ChaCha20Rng::seed_from_u64(opts.seed);
        rng.set_stream(suite.stream());
        let report = match suite {
            Suite::Lemma1 => lemma1_suite(&mut rng, trials, opts.tol),
            Suite::Lemma2 => lemma2_suite(&mut rng, trials, opts.tol),
            Suite::Parseval => parseval_suite(&mut rng, trials),
            Suite::Mean => mean_suite(&mut rng, trials),
            Suite::Identity => identity_suite(&mut rng, trials),
        }
        .map_err(|e| match e {
            Error::Budget(m) => Error::Budget(format!("suite {suite}: {m}")),
            other => other,
        })?;
        suites.push(report);
    }
    Ok(VerificationReport {
        seed: opts.seed,
        tol: opts.tol,
        passed: suites.iter().all(|s| s.passed),
        suites,
    })
}

/// `(ok, score)` per trial, folded into a report.
fn fold(suite: Suite, criterion: &str, outcomes: Vec<(bool, f64)>) -> SuiteReport {
    let failures = outcomes.iter().filter(|o| !o.0).count();
    SuiteReport {
        suite,
        trials: outcomes.len(),
        failures,
        passed: failures == 0,
        worst: outcomes.iter().map(|o| o.1).fold(0.0, f64::max),
        criterion: criterion.to_string(),
    }
}

/// `a` log-uniform on `(10⁻³, 10³]`.
pub fn random_lemma1_args(rng: &mut impl Rng, trials: usize) -> Vec<f64> {
    (0..trials)
        .map(|_| {
            let a = 10f64.powf(rng.gen_range(-3.0..3.0));
            if rng.gen::<bool>() {
                a
            } else {
                -a
            }
        })
        .collect()
}

fn lemma1_suite(rng: &mut ChaCha20Rng, trials: usize, tol: f64) -> Result<SuiteReport> {
    let args = random_lemma1_args(rng, trials);
    let outcomes = args
        .par_iter()
        .map(|&a| lemma1_check(a, tol).map(|c| (c.ok, (c.lhs + c.tail_bound) / c.bound)))
        .collect::<Result<Vec<_>>>()?;
    Ok(fold(Suite::Lemma1, "lhs + tail < 1/|a|", outcomes))
}

/// `(w_r, w_s, N, β)` with `w ∈ [−10⁶, 10⁶] \ {0}`, `N ∈ [10², 10⁶]`,
/// `β ∈ [0, 1/2)`.
pub fn random_lemma2_args(rng: &mut impl Rng, trials: usize) -> Vec<(i64, i64, usize, f64)> {
    let w = |rng: &mut dyn rand::RngCore| loop {
        let v = rng.gen_range(-1_000_000i64..=1_000_000);
        if v != 0 {
            return v;
        }
    };
    (0..trials)
        .map(|_| {
            let wr = w(rng);
            let ws = w(rng);
            (
                wr,
                ws,
                rng.gen_range(100..=1_000_000usize),
                rng.gen_range(0.0..0.5),
            )
        })
        .collect()
}

fn lemma2_suite(rng: &mut ChaCha20Rng, trials: usize, tol: f64) -> Result<SuiteReport> {
    let args = random_lemma2_args(rng, trials);
    let outcomes = args
        .par_iter()
        .map(|&(wr, ws, n, beta)| {
            let params = WindowParams::from_beta(n, beta)?;
            lemma2_check(wr, ws, &params, tol).map(|c| (c.ok, (c.lhs + tol) / c.bound))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fold(
        Suite::Lemma2,
        "lhs + tol < gcd/sqrt|w_r w_s|",
        outcomes,
    ))
}

fn random_custom(rng: &mut impl Rng, n: usize, spread: i64) -> IntegerSequence {
    let mut terms: Vec<i64> = Vec::with_capacity(n);
    while terms.len() < n {
        let t = rng.gen_range(-spread..=spread);
        if !terms.contains(&t) {
            terms.push(t);
        }
    }
    IntegerSequence::from_terms(terms).expect("distinct small terms")
}

fn parseval_suite(rng: &mut ChaCha20Rng, trials: usize) -> Result<SuiteReport> {
    let cases: Vec<(IntegerSequence, f64)> = (0..trials)
        .map(|_| {
            let n = rng.gen_range(3..=6);
            (random_custom(rng, n, 12), rng.gen_range(0.0..0.5))
        })
        .collect();
    let budget = MomentBudget::default();
    let outcomes = cases
        .par_iter()
        .map(|(seq, beta)| {
            let params = WindowParams::from_beta(seq.len(), *beta)?;
            let p = x_second_moment(seq, &params, MomentMethod::Parseval, &budget)?;
            let g = x_second_moment(seq, &params, MomentMethod::AlphaGrid, &budget)?;
            let rel = (p.value - g.value).abs() / p.value.max(f64::MIN_POSITIVE);
            Ok((rel <= 1e-3, rel))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fold(
        Suite::Parseval,
        "parseval vs alpha grid, relative 1e-3",
        outcomes,
    ))
}

fn mean_suite(rng: &mut ChaCha20Rng, trials: usize) -> Result<SuiteReport> {
    let cases: Vec<(IntegerSequence, f64)> = (0..trials)
        .map(|_| {
            let n = rng.gen_range(2..=64);
            let seq = if rng.gen::<bool>() {
                generate_sequence(&SequenceSpec::monomial(2), n).expect("small squares")
            } else {
                random_custom(rng, n, 500)
            };
            (seq, rng.gen_range(0.0..0.5))
        })
        .collect();
    let outcomes = cases
        .par_iter()
        .map(|(seq, beta)| {
            let params = WindowParams::from_beta(seq.len(), *beta)?;
            let grid = alpha_grid_mean(seq, &params, None)?;
            let exact = mean_pair_correlation(&params);
            let rel = (grid.mean - exact).abs() / exact;
            Ok((rel <= 1e-4, rel))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fold(
        Suite::Mean,
        "alpha-grid mean vs L - L/N, relative 1e-4",
        outcomes,
    ))
}

/// A random identity instance: `(N, β, α)` with `N ∈ [2, 500]`, `β ∈ [0, ½)`.
pub fn random_identity_args(
    rng: &mut impl Rng,
    trials: usize,
) -> Vec<(usize, f64, FixedPointReal)> {
    (0..trials)
        .map(|_| {
            (
                rng.gen_range(2..=500),
                rng.gen_range(0.0..0.5),
                FixedPointReal::from_numerator(rng.gen()),
            )
        })
        .collect()
}

fn identity_suite(rng: &mut ChaCha20Rng, trials: usize) -> Result<SuiteReport> {
    let args = random_identity_args(rng, trials);
    let seq_all = generate_sequence(&SequenceSpec::monomial(2), 500)?;
    let outcomes = args
        .par_iter()
        .map(|&(n, beta, alpha)| {
            let seq = IntegerSequence::from_terms(seq_all.terms()[..n].to_vec())?;
            let params = WindowParams::from_beta(n, beta)?;
            let pts = dilate_mod1(alpha, &seq);
            let sigma2 = number_variance_sweep(&pts, &params)?.sigma2;
            let r2 = pair_correlation_direct(&pts, &params, &TestFunction::Tent)?.r2;
            let l = params.l;
            let err = (sigma2 - (l - l * l + l * r2)).abs() / l.max(1.0).powi(2);
            Ok((err <= 1e-9, err))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(fold(
        Suite::Identity,
        "|sigma2 - (L - L^2 + L R2)| <= 1e-9 max(1, L^2)",
        outcomes,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        let opts = VerifyOptions {
            trials: Some(3),
            ..VerifyOptions::default()
        };
        let report = run_verification_suite(&opts).unwrap();
        assert!(report.passed, "{report:?}");
        assert_eq!(report.suites.len(), 5);
    }

    #[test]
    fn zero_tolerance_is_a_budget_error() {
        let opts = VerifyOptions {
            suites: vec![Suite::Lemma1],
            tol: 0.0,
            trials: Some(2),
            ..VerifyOptions::default()
        };
        let err = run_verification_suite(&opts).unwrap_err();
        assert!(
            matches!(err, Error::Budget(ref m) if m.contains("lemma1")),
            "{err}"
        );
    }

    #[test]
    fn seeded_selection_is_reproducible() {
        let opts = VerifyOptions {
            suites: vec![Suite::Identity, Suite::Lemma2],
            seed: 9,
            trials: Some(5),
            ..VerifyOptions::default()
        };
        assert_eq!(
            run_verification_suite(&opts).unwrap(),
            run_verification_suite(&opts).unwrap()
        );
        assert_eq!("parseval".parse::<Suite>().unwrap(), Suite::Parseval);
        assert!("nope".parse::<Suite>().is_err());
    }
}
