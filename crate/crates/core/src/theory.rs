//! Numerical checks of the analytic inputs behind the variance theorem:
//! the `Δ̂` second-moment bound, the gcd bound, the Fourier coefficients
//! `b_k` of `R²` in `α`, its mean, and the second moment of
//! `X_N = R² − ⟨R²⟩`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{binary_gcd, difference_profile, DifferenceProfile};
use crate::error::{Error, Result};
use crate::fixed::FixedPointReal;
use crate::seqgen::{dilate_mod1, generate_sequence, sample_alpha, IntegerSequence, SequenceSpec};
use crate::stats::{
    number_variance_exact, pair_correlation_direct, tent, tent_fourier, tent_fourier_at_multiple,
    TestFunction, WindowParams,
};
use crate::sum::pairwise_sum;

/// Largest number of terms any truncated series here will sum.
pub const MAX_SERIES_TERMS: u64 = 1_000_000_000;

const PI4: f64 = PI * PI * PI * PI;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Check {
    pub a: f64,
    pub lhs: f64,
    pub tail_bound: f64,
    pub bound: f64,
    pub cutoff: u64,
    pub ok: bool,
}

/// `∑_{n≠0} Δ̂(an)² < 1/|a|`, summed over `0 < |n| ≤ M` with `M` the
/// smallest cutoff whose tail bound `4/(3π⁴a⁴M³)` is at most `tol`.
pub fn lemma1_check(a: f64, tol: f64) -> Result<Lemma1Check> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::Config(format!(
            "lemma 1 needs finite a != 0, got {a}"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Budget(format!(
            "tail tolerance must be positive, got {tol}"
        )));
    }
    let a = a.abs();
    let tail = |m: f64| 4.0 / (3.0 * PI4 * a.powi(4) * m * m * m);
    let mut cutoff = (4.0 / (3.0 * PI4 * a.powi(4) * tol)).cbrt().ceil().max(1.0);
    while tail(cutoff) > tol {
        cutoff += 1.0;
    }
    if cutoff > MAX_SERIES_TERMS as f64 {
        return Err(Error::Budget(format!(
            "lemma 1 at a = {a} needs {cutoff:.3e} terms for tol = {tol:.1e}"
        )));
    }
    let cutoff = cutoff as u64;
    let terms = series(cutoff, |n| {
        let t = tent_fourier(a * n as f64);
        t * t
    });
    let lhs = 2.0 * terms;
    let tail_bound = tail(cutoff as f64);
    let bound = 1.0 / a;
    Ok(Lemma1Check {
        a,
        lhs,
        tail_bound,
        bound,
        cutoff,
        ok: lhs + tail_bound < bound,
    })
}

/// `∑_{n=1}^{m} term(n)` in parallel chunks reduced in index order.
fn series(m: u64, term: impl Fn(u64) -> f64 + Sync) -> f64 {
    const CHUNK: u64 = 1 << 16;
    let partials: Vec<f64> = (0..m.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let terms: Vec<f64> = (c * CHUNK + 1..=((c + 1) * CHUNK).min(m))
                .map(&term)
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    pairwise_sum(&partials)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma2Route {
    /// Truncated sum over `n₀` with an explicit tail bound.
    Direct,
    /// Poisson summation: a finite sum of exactly integrated convolutions.
    Poisson,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Check {
    pub w_r: i64,
    pub w_s: i64,
    pub lhs: f64,
    /// Rigorous bound on the truncation error of `lhs` (zero on the Poisson route).
    pub tail_bound: f64,
    pub bound: f64,
    pub route: Lemma2Route,
    pub ok: bool,
}

/// `ℓ·∑_{n₀≠0} Δ̂(ℓn₀w_s/d)·Δ̂(ℓn₀w_r/d) < gcd(w_r, w_s)/√|w_r·w_s|` with
/// `d = gcd(w_r, w_s)` and `ℓ = L/N`.
///
/// The check passes only if `lhs + tol` is below the bound, and `lhs` is
/// always within `tol` of the full series.
pub fn lemma2_check(w_r: i64, w_s: i64, params: &WindowParams, tol: f64) -> Result<Lemma2Check> {
    if w_r == 0 || w_s == 0 {
        return Err(Error::Config("lemma 2 needs nonzero w_r and w_s".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Budget(format!(
            "tail tolerance must be positive, got {tol}"
        )));
    }
    let d = binary_gcd(w_r.unsigned_abs(), w_s.unsigned_abs());
    let u = (w_r.unsigned_abs() / d) as f64;
    let v = (w_s.unsigned_abs() / d) as f64;
    let ell = params.ell;
    let (a, b) = (ell * u, ell * v);
    let bound = d as f64 / ((w_r.unsigned_abs() as f64) * (w_s.unsigned_abs() as f64)).sqrt();

    // Δ̂(x) ≤ 1/(π²x²), so the tail beyond M is at most ℓ·2/(3π⁴a²b²M³).
    let direct_terms = (2.0 * ell / (3.0 * PI4 * a * a * b * b * tol))
        .cbrt()
        .ceil()
        .max(1.0);
    let poisson_terms = 2.0 * (a + b).floor() + 1.0;
    let (phi, tail_bound, route) = if direct_terms <= poisson_terms {
        if direct_terms > MAX_SERIES_TERMS as f64 {
            return Err(Error::Budget(format!(
                "lemma 2 direct sum needs {direct_terms:.3e} terms"
            )));
        }
        let m = direct_terms as u64;
        let s = series(m, |n| {
            tent_fourier(a * n as f64) * tent_fourier(b * n as f64)
        });
        let tail = ell * 2.0 / (3.0 * PI4 * a * a * b * b * (m as f64).powi(3));
        (2.0 * s, tail, Lemma2Route::Direct)
    } else {
        if poisson_terms > MAX_SERIES_TERMS as f64 {
            return Err(Error::Budget(format!(
                "lemma 2 Poisson sum needs {poisson_terms:.3e} terms"
            )));
        }
        (poisson_phi(a, b), 0.0, Lemma2Route::Poisson)
    };
    let lhs = ell * phi;
    Ok(Lemma2Check {
        w_r,
        w_s,
        lhs,
        tail_bound,
        bound,
        route,
        ok: lhs + tol.max(tail_bound) < bound,
    })
}

/// `∑_{n≠0} Δ̂(an)·Δ̂(bn)` for `a, b > 0` by Poisson summation:
/// `∑_n Δ̂(an)Δ̂(bn) = ∑_m ĝ(m)` with `ĝ(m) = (1/ab)∫Δ(t/a)·Δ((m−t)/b) dt`,
/// which vanishes for `|m| ≥ a + b`.
fn poisson_phi(a: f64, b: f64) -> f64 {
    let reach = (a + b).floor() as i64;
    let terms: Vec<f64> = (0..=reach)
        .into_par_iter()
        .map(|m| {
            let g = tent_convolution(a, b, m as f64) / (a * b);
            if m == 0 {
                g
            } else {
                2.0 * g
            }
        })
        .collect();
    pairwise_sum(&terms) - 1.0
}

/// `∫Δ(t/a)·Δ((m−t)/b) dt`. The integrand is quadratic between the
/// breakpoints `−a, 0, a, m−b, m, m+b`, so Simpson's rule is exact there.
fn tent_convolution(a: f64, b: f64, m: f64) -> f64 {
    let lo = (-a).max(m - b);
    let hi = a.min(m + b);
    if lo >= hi {
        return 0.0;
    }
    let h = |t: f64| tent(t / a) * tent((m - t) / b);
    let mut knots = vec![lo, hi];
    knots.extend([0.0, m].into_iter().filter(|&k| lo < k && k < hi));
    knots.sort_by(f64::total_cmp);
    knots
        .windows(2)
        .map(|w| {
            let (x0, x1) = (w[0], w[1]);
            (x1 - x0) / 6.0 * (h(x0) + 4.0 * h(0.5 * (x0 + x1)) + h(x1))
        })
        .sum()
}

/// `b_{k,N}(L)`, the `k`-th Fourier coefficient of `α ↦ R²_N(L, α, Δ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierCoefficient {
    pub k: i64,
    pub value: f64,
    pub n: usize,
    pub l: f64,
}

/// `b_k = (L/N²)·∑_{n | k} W_N(k/n)·Δ̂(ℓn)` over positive and negative
/// divisors `n`. A finite sum; nothing is truncated.
pub fn fourier_coefficient(
    seq: &IntegerSequence,
    k: i64,
    params: &WindowParams,
) -> Result<FourierCoefficient> {
    fourier_coefficient_from_profile(&difference_profile(seq), k, params)
}

pub fn fourier_coefficient_from_profile(
    profile: &DifferenceProfile,
    k: i64,
    params: &WindowParams,
) -> Result<FourierCoefficient> {
    if k == 0 {
        return Err(Error::Config("use mean_pair_correlation for b_0".into()));
    }
    let ell = FixedPointReal::from_f64(params.ell);
    let mut terms = Vec::new();
    for n in divisors(k.unsigned_abs()) {
        let w = k / n as i64;
        // n and −n pair W(w) with W(−w); Δ̂ is even.
        let weight = profile.get(w) + profile.get(-w);
        if weight > 0 {
            terms.push(weight as f64 * tent_fourier_at_multiple(ell, params.ell, n as i64));
        }
    }
    let nf = params.n as f64;
    Ok(FourierCoefficient {
        k,
        value: params.l / (nf * nf) * pairwise_sum(&terms),
        n: params.n,
        l: params.l,
    })
}

/// Positive divisors of `k ≥ 1` in increasing order, by trial division.
pub fn divisors(k: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d <= k / d {
        if k.is_multiple_of(d) {
            small.push(d);
            if d != k / d {
                large.push(k / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// `⟨R²_N(L, ·, Δ)⟩ = b₀ = L − L/N`.
pub fn mean_pair_correlation(params: &WindowParams) -> f64 {
    params.l - params.l / params.n as f64
}

/// `X_N(L, α) = R²_N(L, α, Δ) − ⟨R²⟩`.
pub fn centered_statistic(
    seq: &IntegerSequence,
    alpha: FixedPointReal,
    params: &WindowParams,
) -> Result<f64> {
    let r2 = pair_correlation_direct(&dilate_mod1(alpha, seq), params, &TestFunction::Tent)?.r2;
    Ok(r2 - mean_pair_correlation(params))
}

fn is_prime(n: u64) -> bool {
    n >= 2 && divisors(n).len() == 2
}

fn next_prime(n: u64) -> u64 {
    (n.max(2)..).find(|&p| is_prime(p)).unwrap()
}

fn prev_prime(n: u64) -> u64 {
    (2..=n).rev().find(|&p| is_prime(p)).unwrap_or(2)
}

/// `R²` at every `α = g/G`, `g = 0..G`.
fn r2_on_grid(seq: &IntegerSequence, params: &WindowParams, grid: u64) -> Result<Vec<f64>> {
    (0..grid)
        .into_par_iter()
        .map(|g| {
            let alpha = FixedPointReal::from_ratio(g as u128, grid as u128)?;
            let pts = dilate_mod1(alpha, seq);
            Ok(pair_correlation_direct(&pts, params, &TestFunction::Tent)?.r2)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMean {
    pub mean: f64,
    pub grid: u64,
}

/// Mean of `R²` over the equispaced grid `α = g/G`.
///
/// The grid average equals `∑_{G | k} b_k`. With `G` a prime above every
/// difference, `G | nw` forces `G | n`, so the aliasing error is at most
/// `L/(3ℓ²G²)`. When `grid` is `None`, `G` is the first prime with
/// `ℓG ≥ 100` (relative error below `4·10⁻⁵`).
pub fn alpha_grid_mean(
    seq: &IntegerSequence,
    params: &WindowParams,
    grid: Option<u64>,
) -> Result<GridMean> {
    let grid = match grid {
        Some(g) if g > 0 => g,
        Some(_) => return Err(Error::Config("grid must be positive".into())),
        None => {
            let spread = max_difference(seq)?;
            next_prime((2 * spread + 1).max((100.0 / params.ell).ceil() as u64))
        }
    };
    let values = r2_on_grid(seq, params, grid)?;
    Ok(GridMean {
        mean: pairwise_sum(&values) / grid as f64,
        grid,
    })
}

fn max_difference(seq: &IntegerSequence) -> Result<u64> {
    let t = seq.terms();
    let (lo, hi) = (t.iter().min(), t.iter().max());
    match (lo, hi) {
        (Some(&lo), Some(&hi)) => Ok((hi as i128 - lo as i128) as u64),
        _ => Err(Error::Config("empty sequence".into())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentMethod {
    Parseval,
    AlphaGrid,
}

/// Work limits for [`x_second_moment`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentBudget {
    /// Parseval route: frequencies `|n| ≤ ⌈c/ℓ⌉`.
    pub cutoff_factor: f64,
    /// Parseval route: cap on the number of `(n, w)` products visited.
    pub max_products: u64,
    /// α-grid route: relative change at which refinement stops.
    pub rel_tol: f64,
    /// α-grid route: largest grid size.
    pub max_grid: u64,
}

impl Default for MomentBudget {
    fn default() -> Self {
        Self {
            cutoff_factor: 64.0,
            max_products: 4_000_000_000,
            rel_tol: 1e-3,
            max_grid: 1 << 16,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XSecondMoment {
    pub value: f64,
    pub method: MomentMethod,
    /// Parseval: rigorous bound on `|value − ∫|X_N|²|`.
    /// α-grid: the last refinement change.
    pub error_estimate: f64,
    /// Parseval: the cutoff `M`. α-grid: the final grid size.
    pub resolution: u64,
}

/// `∫₀¹ |X_N(L, α)|² dα`.
pub fn x_second_moment(
    seq: &IntegerSequence,
    params: &WindowParams,
    method: MomentMethod,
    budget: &MomentBudget,
) -> Result<XSecondMoment> {
    if seq.len() != params.n {
        return Err(Error::Window(format!(
            "sequence has {} terms but window is for N = {}",
            seq.len(),
            params.n
        )));
    }
    match method {
        MomentMethod::Parseval => moment_parseval(seq, params, budget),
        MomentMethod::AlphaGrid => moment_alpha_grid(seq, params, budget),
    }
}

/// `∑_{k≠0} b_k²`. For `k > 0`, `b_k = 2(L/N²)·s_k` with
/// `s_k = ∑_{n,w>0, nw=k} W(w)·Δ̂(ℓn)`, and `b_{−k} = b_k`, so the moment is
/// `8(L/N²)²·∑_{k>0} s_k²`. The `s_k` are accumulated in dense blocks of `k`.
///
/// Truncating at `n ≤ M` changes each `b_k` by `t_k`, and Cauchy–Schwarz
/// over divisors gives `∑ t_k² ≤ T = 4·DE/(π⁴L²M²)` with `DE = ∑ W²`; the
/// reported error bound is `2√(S·T) + T`.
fn moment_parseval(
    seq: &IntegerSequence,
    params: &WindowParams,
    budget: &MomentBudget,
) -> Result<XSecondMoment> {
    const BLOCK: u64 = 1 << 22;
    let profile = difference_profile(seq);
    let pos: Vec<(u64, f64)> = profile
        .positive()
        .iter()
        .map(|&(w, c)| (w as u64, c as f64))
        .collect();
    let nf = params.n as f64;
    if pos.is_empty() {
        return Ok(XSecondMoment {
            value: 0.0,
            method: MomentMethod::Parseval,
            error_estimate: 0.0,
            resolution: 0,
        });
    }
    let cutoff = (budget.cutoff_factor / params.ell).ceil().max(1.0) as u64;
    let products = cutoff as u128 * pos.len() as u128;
    let w_max = pos.last().unwrap().0;
    let k_max = cutoff as u128 * w_max as u128;
    if products > budget.max_products as u128 || k_max > u64::MAX as u128 / 2 {
        return Err(Error::Budget(format!(
            "Parseval route needs {products} products (cap {}); reduce N or the cutoff factor",
            budget.max_products
        )));
    }
    let k_max = k_max as u64;
    let ell = FixedPointReal::from_f64(params.ell);
    let weights: Vec<f64> = (1..=cutoff)
        .map(|n| tent_fourier_at_multiple(ell, params.ell, n as i64))
        .collect();
    let blocks = k_max.div_ceil(BLOCK);
    let partials: Vec<f64> = (0..blocks)
        .into_par_iter()
        .map(|blk| {
            let k0 = blk * BLOCK + 1;
            let k1 = ((blk + 1) * BLOCK).min(k_max);
            let mut s = vec![0.0f64; (k1 - k0 + 1) as usize];
            for &(w, c) in &pos {
                let n_lo = k0.div_ceil(w);
                let n_hi = (k1 / w).min(cutoff);
                for n in n_lo..=n_hi {
                    s[(n * w - k0) as usize] += c * weights[(n - 1) as usize];
                }
            }
            let sq: Vec<f64> = s.iter().map(|x| x * x).collect();
            pairwise_sum(&sq)
        })
        .collect();
    let scale = params.l / (nf * nf);
    let value = 8.0 * scale * scale * pairwise_sum(&partials);
    let de: f64 = 2.0 * pos.iter().map(|p| p.1 * p.1).sum::<f64>();
    let m = cutoff as f64;
    let t = 4.0 * de / (PI4 * params.l * params.l * m * m);
    Ok(XSecondMoment {
        value,
        method: MomentMethod::Parseval,
        error_estimate: 2.0 * (value * t).sqrt() + t,
        resolution: cutoff,
    })
}

/// Rectangle rule (the trapezoidal rule for a periodic integrand) on prime
/// grids near `2^p`, refined with Richardson extrapolation
/// `(r²·I₂ − I₁)/(r² − 1)` until two successive extrapolants agree to
/// `rel_tol`.
fn moment_alpha_grid(
    seq: &IntegerSequence,
    params: &WindowParams,
    budget: &MomentBudget,
) -> Result<XSecondMoment> {
    let mean = mean_pair_correlation(params);
    let quad = |grid: u64| -> Result<f64> {
        let sq: Vec<f64> = r2_on_grid(seq, params, grid)?
            .into_iter()
            .map(|r| (r - mean) * (r - mean))
            .collect();
        Ok(pairwise_sum(&sq) / grid as f64)
    };
    let mut size = 256u64;
    let mut prev: Option<(u64, f64)> = None;
    let mut prev_extrap: Option<f64> = None;
    while size <= budget.max_grid {
        let grid = prev_prime(size);
        let value = quad(grid)?;
        if let Some((g1, i1)) = prev {
            let r2 = (grid as f64 / g1 as f64).powi(2);
            let extrap = (r2 * value - i1) / (r2 - 1.0);
            if let Some(e0) = prev_extrap {
                let change = (extrap - e0).abs();
                if change <= budget.rel_tol * extrap.abs() || extrap.abs() < f64::MIN_POSITIVE {
                    return Ok(XSecondMoment {
                        value: extrap.max(0.0),
                        method: MomentMethod::AlphaGrid,
                        error_estimate: change,
                        resolution: grid,
                    });
                }
            }
            prev_extrap = Some(extrap);
        }
        prev = Some((grid, value));
        size *= 2;
    }
    Err(Error::Budget(format!(
        "alpha-grid quadrature not stable to {:.1e} within {} points",
        budget.rel_tol, budget.max_grid
    )))
}

/// Fraction of `alpha_samples` sampled `α` with `|Σ²_N(L, α) − L| > δL`.
pub fn deviation_measure(
    spec: &SequenceSpec,
    params: &WindowParams,
    delta: f64,
    alpha_samples: u64,
    seed: u64,
) -> Result<f64> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::Config(format!(
            "delta must be positive, got {delta}"
        )));
    }
    if alpha_samples == 0 {
        return Err(Error::Config("need at least one alpha sample".into()));
    }
    let seq = generate_sequence(spec, params.n)?;
    let sigma2 = sampled_variances(&seq, params, alpha_samples, seed)?;
    Ok(deviation_fraction(&sigma2, params.l, delta))
}

/// Exact `Σ²` at `α = sample_alpha(seed, i)` for `i < alpha_samples`.
pub fn sampled_variances(
    seq: &IntegerSequence,
    params: &WindowParams,
    alpha_samples: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    (0..alpha_samples)
        .into_par_iter()
        .map(|i| {
            let pts = dilate_mod1(sample_alpha(seed, i), seq);
            Ok(number_variance_exact(&pts, params)?.sigma2)
        })
        .collect()
}

pub fn deviation_fraction(sigma2: &[f64], l: f64, delta: f64) -> f64 {
    let bad = sigma2
        .iter()
        .filter(|&&s| (s - l).abs() > delta * l)
        .count();
    bad as f64 / sigma2.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma1_examples() {
        let c = lemma1_check(1.0, 1e-12).unwrap();
        assert!(c.lhs < 1e-25 && c.ok && c.bound == 1.0);

        let c = lemma1_check(0.5, 1e-13).unwrap();
        assert!((c.lhs - 1.0 / 3.0).abs() < 1e-10, "{}", c.lhs);
        assert!(c.ok && c.bound == 2.0);

        let c = lemma1_check(100.0, 1e-12).unwrap();
        assert!(c.lhs < 0.01 && c.ok);

        assert!(matches!(lemma1_check(0.5, 0.0), Err(Error::Budget(_))));
        assert!(lemma1_check(0.0, 1e-6).is_err());
    }

    #[test]
    fn lemma1_matches_poisson_closed_form() {
        // ∑_{n∈ℤ} Δ̂(an)² = 2/(3a) for 0 < a ≤ 1/2.
        for a in [0.01, 0.1, 0.3, 0.5] {
            let c = lemma1_check(a, 1e-12).unwrap();
            let exact = 2.0 / (3.0 * a) - 1.0;
            assert!((c.lhs - exact).abs() < 1e-9 * exact.max(1.0), "a = {a}");
        }
    }

    #[test]
    fn lemma2_examples() {
        let p = WindowParams::from_l(2, 1.0).unwrap();
        let c = lemma2_check(1, 1, &p, 1e-12).unwrap();
        assert!((c.lhs - 1.0 / 6.0).abs() < 1e-10, "{}", c.lhs);
        assert!(c.ok && c.bound == 1.0);

        let p = WindowParams::from_l(5, 5.0).unwrap();
        let c = lemma2_check(2, 3, &p, 1e-12).unwrap();
        assert!(c.lhs.abs() < 1e-12, "{}", c.lhs);
        assert!(c.ok && (c.bound - 1.0 / 6f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn lemma2_routes_agree() {
        // Both routes on inputs where either is cheap.
        for (a, b) in [(0.7, 0.9), (1.3, 2.6), (0.55, 3.1), (5.0, 0.6)] {
            let direct = 2.0
                * series(200_000, |n| {
                    tent_fourier(a * n as f64) * tent_fourier(b * n as f64)
                });
            let poisson = poisson_phi(a, b);
            assert!(
                (direct - poisson).abs() < 1e-9,
                "{a} {b}: {direct} vs {poisson}"
            );
        }
    }

    #[test]
    fn tent_convolution_total_mass() {
        // ∑_m of the convolution over a fine grid integrates to a·b.
        let (a, b) = (0.7, 1.9);
        let h = 1e-3;
        let total: f64 = (-3000..=3000)
            .map(|i| tent_convolution(a, b, i as f64 * h) * h)
            .sum();
        assert!((total - a * b).abs() < 1e-6);
    }

    #[test]
    fn divisor_lists() {
        assert_eq!(divisors(1), vec![1]);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(divisors(49), vec![1, 7, 49]);
        assert!(is_prime(65521) && !is_prime(65535));
        assert_eq!(prev_prime(1 << 16), 65521);
    }

    #[test]
    fn fourier_coefficient_examples() {
        let seq = IntegerSequence::from_terms(vec![1, 2]).unwrap();
        let p = WindowParams::from_l(2, 0.6).unwrap();
        let b = fourier_coefficient(&seq, 3, &p).unwrap();
        let expect = 0.6 / 2.0 * tent_fourier(3.0 * 0.3);
        assert!((b.value - expect).abs() < 1e-15);
        let b_neg = fourier_coefficient(&seq, -3, &p).unwrap();
        assert_eq!(b.value, b_neg.value);

        let seq = IntegerSequence::from_terms(vec![0, 10]).unwrap();
        assert_eq!(fourier_coefficient(&seq, 3, &p).unwrap().value, 0.0);
        assert!(fourier_coefficient(&seq, 0, &p).is_err());
    }

    #[test]
    fn mean_examples() {
        assert_eq!(
            mean_pair_correlation(&WindowParams::from_l(2, 1.0).unwrap()),
            0.5
        );
        let seq = IntegerSequence::from_terms(vec![1, 2, 3, 5]).unwrap();
        let p = WindowParams::from_beta(4, 0.3).unwrap();
        let m = alpha_grid_mean(&seq, &p, None).unwrap();
        let expect = mean_pair_correlation(&p);
        assert!((m.mean - expect).abs() < 1e-4 * expect);
    }

    #[test]
    fn second_moment_routes_agree() {
        let seq = IntegerSequence::from_terms(vec![1, 2, 3, 5]).unwrap();
        let p = WindowParams::from_beta(4, 0.3).unwrap();
        let budget = MomentBudget::default();
        let a = x_second_moment(&seq, &p, MomentMethod::Parseval, &budget).unwrap();
        let b = x_second_moment(&seq, &p, MomentMethod::AlphaGrid, &budget).unwrap();
        assert!(a.value > 0.0);
        assert!((a.value - b.value).abs() < 1e-3 * a.value, "{a:?} {b:?}");
        assert!((a.value - b.value).abs() <= a.error_estimate);
    }

    #[test]
    fn parseval_matches_truncated_coefficients() {
        // Oracle: b_k from an explicit divisor loop restricted to n ≤ M.
        let seq = IntegerSequence::from_terms(vec![1, 3, 4]).unwrap();
        let p = WindowParams::from_l(3, 0.9).unwrap();
        let budget = MomentBudget {
            cutoff_factor: 40.0,
            ..MomentBudget::default()
        };
        let m = x_second_moment(&seq, &p, MomentMethod::Parseval, &budget).unwrap();
        let cutoff = m.resolution as i64;
        let prof = difference_profile(&seq);
        let mut total = 0.0;
        for k in 1..=3 * cutoff {
            let mut b = 0.0;
            for n in (1..=cutoff).filter(|n| k % n == 0) {
                b += (prof.get(k / n) + prof.get(-k / n)) as f64 * tent_fourier(p.ell * n as f64);
            }
            b *= p.l / 9.0;
            total += 2.0 * b * b;
        }
        assert!(
            (m.value - total).abs() < 1e-9 * total,
            "{} vs {total}",
            m.value
        );
    }

    #[test]
    fn deviation_is_monotone_in_delta() {
        let spec = SequenceSpec::monomial(2);
        let p = WindowParams::from_beta(400, 0.3).unwrap();
        let seq = generate_sequence(&spec, 400).unwrap();
        let s = sampled_variances(&seq, &p, 40, 5).unwrap();
        let mut last = 1.0;
        for delta in [0.05, 0.1, 0.25, 0.5, 1.0, 1e3] {
            let f = deviation_fraction(&s, p.l, delta);
            assert!(f <= last);
            last = f;
        }
        assert_eq!(last, 0.0);
        assert_eq!(
            deviation_measure(&spec, &p, 0.25, 40, 5).unwrap(),
            deviation_fraction(&s, p.l, 0.25)
        );
    }
}
