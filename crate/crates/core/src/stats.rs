//! Counting statistics of a point set on the circle: the window count
//! `S_N(ℓ)`, the number variance `Σ²_N(L)` and the pair correlation
//! `R²_N(L, f)`.
//!
//! Window membership is decided on exact fixed-point numerators; floating
//! point only enters when a test function is evaluated.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixed::{arc_numerator, FixedPointReal, TWO_POW_128};
use crate::seqgen::{IntegerSequence, PointSet};
use crate::sum::pairwise_sum;

/// Default truncation tolerance for the Fourier-side pair correlation.
pub const DEFAULT_FOURIER_TOL: f64 = 1e-6;
/// Largest frequency cutoff the Fourier route will accept.
pub const DEFAULT_MAX_FOURIER_TERMS: u64 = 1_000_000_000;

/// Scale parameters of one measurement: `N`, `L` and `ℓ = L/N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowParams {
    pub n: usize,
    /// `Some(β)` when `L = N^β`.
    pub beta: Option<f64>,
    pub l: f64,
    pub ell: f64,
}

impl WindowParams {
    /// `L = N^β`, `0 ≤ β < 1`.
    pub fn from_beta(n: usize, beta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::Window(format!("beta = {beta} outside [0, 1)")));
        }
        let mut p = Self::from_l(n, (n as f64).powf(beta))?;
        p.beta = Some(beta);
        Ok(p)
    }

    /// Explicit `L`; requires `0 < L/N ≤ 1`.
    pub fn from_l(n: usize, l: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Window("N must be positive".into()));
        }
        let ell = l / n as f64;
        if !(l > 0.0 && ell <= 1.0) {
            return Err(Error::Window(format!(
                "need 0 < ell <= 1, got L = {l}, N = {n}, ell = {ell}"
            )));
        }
        Ok(Self {
            n,
            beta: None,
            l,
            ell,
        })
    }

    /// `ℓ·2^128`, or `None` when the window is the whole circle.
    fn ell_numerator(&self) -> Option<u128> {
        arc_numerator(self.ell)
    }
}

/// `Δ(x) = max{1 − |x|, 0}`.
#[inline]
pub fn tent(x: f64) -> f64 {
    (1.0 - x.abs()).max(0.0)
}

/// `Δ̂(x) = sin²(πx)/(πx)²`, continuous through `x = 0`.
#[inline]
pub fn tent_fourier(x: f64) -> f64 {
    let y = PI * x;
    if y.abs() < 1e-8 {
        // sinc² = 1 − y²/3 + O(y⁴)
        return 1.0 - y * y / 3.0;
    }
    let s = y.sin();
    s * s / (y * y)
}

/// `Δ̂(r·n)` where `r` is given exactly as a fixed point fraction; the sine is
/// taken of the exact fractional part of `r·n`, so large `n` lose no phase.
#[inline]
pub(crate) fn tent_fourier_at_multiple(r: FixedPointReal, r_f64: f64, n: i64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let s = (PI * r.mul_int(n).to_f64()).sin();
    let denom = PI * r_f64 * n as f64;
    s * s / (denom * denom)
}

/// An even test function with compact support `[−R, R]`.
#[derive(Clone, Debug, PartialEq)]
pub enum TestFunction {
    /// `Δ`, support radius 1.
    Tent,
    /// `χ` of `[−1/2, 1/2)`.
    IntervalIndicator,
    /// Samples of `f` on the uniform grid `0, R/(k−1), …, R`, linearly
    /// interpolated and extended evenly; zero beyond `R`.
    Custom {
        samples: Vec<f64>,
        radius: Option<f64>,
    },
}

impl TestFunction {
    pub fn support_radius(&self) -> Result<f64> {
        match self {
            TestFunction::Tent => Ok(1.0),
            TestFunction::IntervalIndicator => Ok(0.5),
            TestFunction::Custom { radius, samples } => match radius {
                Some(r) if *r > 0.0 && r.is_finite() && samples.len() >= 2 => Ok(*r),
                _ => Err(Error::Support),
            },
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Tent => tent(x),
            TestFunction::IntervalIndicator => {
                if (-0.5..0.5).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::Custom { samples, radius } => {
                let Some(r) = *radius else { return 0.0 };
                let ax = x.abs();
                if ax > r || samples.len() < 2 {
                    return 0.0;
                }
                let pos = ax / r * (samples.len() - 1) as f64;
                let i = (pos.floor() as usize).min(samples.len() - 2);
                let t = pos - i as f64;
                samples[i] * (1.0 - t) + samples[i + 1] * t
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceMethod {
    ExactTent,
    Fourier,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceResult {
    pub sigma2: f64,
    pub method: VarianceMethod,
    pub mc_stderr: Option<f64>,
    pub params: WindowParams,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairCorrMethod {
    Direct,
    Fourier,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCorrResult {
    pub r2: f64,
    pub method: PairCorrMethod,
    /// Rigorous bound on the neglected Fourier tail (Fourier route only).
    pub truncation_bound: Option<f64>,
    /// Frequency cutoff `M` used by the Fourier route.
    pub cutoff: Option<u64>,
    pub params: WindowParams,
}

/// `#{j : x_j ∈ [x₀ − ℓ/2, x₀ + ℓ/2) + ℤ}`.
pub fn count_in_interval(
    points: &PointSet,
    center: FixedPointReal,
    params: &WindowParams,
) -> usize {
    let Some(ell) = params.ell_numerator() else {
        return points.len();
    };
    let lo = center.numerator().wrapping_sub(ell >> 1);
    count_arc(points.points(), lo, ell)
}

/// Points in the half-open arc `[lo, lo + len)`.
fn count_arc(sorted: &[FixedPointReal], lo: u128, len: u128) -> usize {
    let below = |x: u128| sorted.partition_point(|p| p.numerator() < x);
    let (hi, wrapped) = lo.overflowing_add(len);
    if wrapped {
        (sorted.len() - below(lo)) + below(hi)
    } else {
        below(hi) - below(lo)
    }
}

/// For every unordered pair `{i, j}` with sorted positions `i < j` and gap
/// `g = x_j − x_i`, the total contribution of the ordered pairs `(i, j)` and
/// `(j, i)` to `∑_m f((x_i − x_j + m)/ℓ)` is `2·∑_m f((g + m)/ℓ)`. This sums
/// that quantity over all pairs, returned per anchor point `i` so that the
/// final reduction is done in a fixed order.
fn pair_kernel_sums(points: &PointSet, ell: f64, f: &TestFunction, radius: f64) -> Vec<f64> {
    let pts: Vec<u128> = points.numerators().collect();
    let n = pts.len();
    let reach = radius * ell;
    if reach <= 0.5 {
        // Windowed scan: only pairs at circular distance ≤ R·ℓ ≤ 1/2 matter
        // and each contributing direction is met exactly once.
        let thr = (reach * TWO_POW_128) as u128;
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                for t in 1..n {
                    let k = (i + t) % n;
                    let gap = pts[k].wrapping_sub(pts[i]);
                    if (k < i && gap == 0) || gap > thr {
                        break;
                    }
                    acc += 2.0 * f.eval(gap as f64 / TWO_POW_128 / ell);
                }
                acc
            })
            .collect()
    } else {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = 0.0;
                for j in i + 1..n {
                    let g = (pts[j] - pts[i]) as f64 / TWO_POW_128;
                    let m_lo = (-reach - g).ceil() as i64;
                    let m_hi = (reach - g).floor() as i64;
                    for m in m_lo..=m_hi {
                        acc += 2.0 * f.eval((g + m as f64) / ell);
                    }
                }
                acc
            })
            .collect()
    }
}

/// `Σ² = ℓ·∑_{i,j}∑_m Δ((x_i − x_j + m)/ℓ) − L²` by a windowed scan of the
/// sorted circle. The diagonal contributes exactly `L`.
pub fn number_variance_exact(points: &PointSet, params: &WindowParams) -> Result<VarianceResult> {
    check_window(points, params)?;
    let off_diagonal = pairwise_sum(&pair_kernel_sums(
        points,
        params.ell,
        &TestFunction::Tent,
        1.0,
    ));
    let second_moment = params.l + params.ell * off_diagonal;
    Ok(VarianceResult {
        sigma2: second_moment - params.l * params.l,
        method: VarianceMethod::ExactTent,
        mc_stderr: None,
        params: *params,
    })
}

/// `Σ²` from the exact integral `∫₀¹ S_N(ℓ)² dx₀`, evaluated by sweeping the
/// piecewise-constant window count around the circle. Shares no code with
/// the pair scan and serves as its independent check.
pub fn number_variance_sweep(points: &PointSet, params: &WindowParams) -> Result<VarianceResult> {
    check_window(points, params)?;
    let done = |sigma2| VarianceResult {
        sigma2,
        method: VarianceMethod::ExactTent,
        mc_stderr: None,
        params: *params,
    };
    let Some(ell) = params.ell_numerator() else {
        return Ok(done(0.0));
    };
    let half = ell >> 1;
    // Point p is counted for centres x₀ in the arc [p + half − ℓ, p + half)
    // (up to a null set).
    let mut events: Vec<(u128, i64)> = Vec::with_capacity(2 * points.len());
    for p in points.numerators() {
        let start = p.wrapping_add(half).wrapping_sub(ell);
        events.push((start, 1));
        events.push((start.wrapping_add(ell), -1));
    }
    events.sort_unstable();
    let origin = events[0].0;
    let mut count = points
        .numerators()
        .filter(|&p| origin.wrapping_sub(p.wrapping_add(half).wrapping_sub(ell)) < ell)
        .count() as i64;
    // Events at `origin` are already reflected in `count`.
    let mut idx = events.iter().take_while(|e| e.0 == origin).count();
    let mut pos = origin;
    let mut pieces = Vec::with_capacity(events.len());
    while idx < events.len() {
        let next = events[idx].0;
        let len = next - pos;
        pieces.push(len as f64 / TWO_POW_128 * (count * count) as f64);
        while idx < events.len() && events[idx].0 == next {
            count += events[idx].1;
            idx += 1;
        }
        pos = next;
    }
    // Closing piece back around to the origin.
    let len = origin.wrapping_sub(pos);
    pieces.push(len as f64 / TWO_POW_128 * (count * count) as f64);
    Ok(done(pairwise_sum(&pieces) - params.l * params.l))
}

/// Monte Carlo estimate of `⟨(S_N(ℓ) − L)²⟩` over `samples` uniform centres.
///
/// Squares are taken about the exact mean `L`. The estimate is a pure
/// function of the inputs and `seed`.
pub fn number_variance_montecarlo(
    points: &PointSet,
    params: &WindowParams,
    samples: u64,
    seed: u64,
) -> Result<VarianceResult> {
    check_window(points, params)?;
    if samples < 2 {
        return Err(Error::Config("Monte Carlo needs at least 2 samples".into()));
    }
    const CHUNK: u64 = 1 << 14;
    let chunks = samples.div_ceil(CHUNK);
    let partials: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            // Every centre consumes four 32-bit words.
            rng.set_word_pos((c * CHUNK * 4) as u128);
            let end = ((c + 1) * CHUNK).min(samples);
            let (mut s2, mut s4) = (0.0, 0.0);
            for _ in c * CHUNK..end {
                let x0 = FixedPointReal::from_numerator(rng.gen());
                let d = count_in_interval(points, x0, params) as f64 - params.l;
                let d2 = d * d;
                s2 += d2;
                s4 += d2 * d2;
            }
            (s2, s4)
        })
        .collect();
    let s2 = pairwise_sum(&partials.iter().map(|p| p.0).collect::<Vec<_>>());
    let s4 = pairwise_sum(&partials.iter().map(|p| p.1).collect::<Vec<_>>());
    let m = samples as f64;
    let mean = s2 / m;
    let var = ((s4 - m * mean * mean) / (m - 1.0)).max(0.0);
    Ok(VarianceResult {
        sigma2: mean,
        method: VarianceMethod::MonteCarlo,
        mc_stderr: Some((var / m).sqrt()),
        params: *params,
    })
}

/// `R²_N(L, f) = (1/N)·∑_{i≠j}∑_m f((x_i − x_j + m)/ℓ)`.
///
/// Visits only pairs at circular distance ≤ `R·ℓ` when `R·ℓ ≤ 1/2`, and
/// falls back to all pairs otherwise.
pub fn pair_correlation_direct(
    points: &PointSet,
    params: &WindowParams,
    f: &TestFunction,
) -> Result<PairCorrResult> {
    let radius = f.support_radius()?;
    check_window(points, params)?;
    let total = pairwise_sum(&pair_kernel_sums(points, params.ell, f, radius));
    Ok(PairCorrResult {
        r2: total / points.len() as f64,
        method: PairCorrMethod::Direct,
        truncation_bound: None,
        cutoff: None,
        params: *params,
    })
}

/// Pair correlation for `f = Δ` on the Fourier side,
///
/// `R² = (L/N²)·∑_n Δ̂(ℓn)·(|∑_j e(n·α·a_j)|² − N)`,
///
/// truncated at `|n| ≤ M` where `M` is the smallest cutoff whose rigorous
/// tail bound is at most `tol`.
pub fn pair_correlation_fourier(
    seq: &IntegerSequence,
    alpha: FixedPointReal,
    params: &WindowParams,
    tol: f64,
) -> Result<PairCorrResult> {
    pair_correlation_fourier_with_ceiling(seq, alpha, params, tol, DEFAULT_MAX_FOURIER_TERMS)
}

pub fn pair_correlation_fourier_with_ceiling(
    seq: &IntegerSequence,
    alpha: FixedPointReal,
    params: &WindowParams,
    tol: f64,
    max_terms: u64,
) -> Result<PairCorrResult> {
    let n = seq.len();
    if n != params.n {
        return Err(Error::Window(format!(
            "sequence has {n} terms but window is for N = {}",
            params.n
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Budget(format!(
            "Fourier truncation tolerance must be positive, got {tol}"
        )));
    }
    let done = |r2, bound, cutoff| PairCorrResult {
        r2,
        method: PairCorrMethod::Fourier,
        truncation_bound: Some(bound),
        cutoff: Some(cutoff),
        params: *params,
    };
    if n < 2 {
        return Ok(done(0.0, 0.0, 0));
    }
    let xs: Vec<FixedPointReal> = seq.terms().iter().map(|&a| alpha.mul_int(a)).collect();
    let tail = FourierTail::new(&xs, params);
    let cutoff = tail.cutoff_for(tol, max_terms).ok_or_else(|| {
        Error::Budget(format!(
            "Fourier tail bound {:.3e} at M = {max_terms} exceeds tol = {tol:.3e}; raise tol",
            tail.bound(max_terms)
        ))
    })?;
    let sum = fourier_partial_sum(&xs, params, cutoff);
    let nf = n as f64;
    let r2 = params.l / (nf * nf) * sum;
    Ok(done(r2, tail.bound(cutoff), cutoff))
}

/// `(N² − N) + 2·∑_{n=1}^{M} Δ̂(ℓn)·(|S_n|² − N)` with `S_n = ∑_j e(n·x_j)`.
fn fourier_partial_sum(xs: &[FixedPointReal], params: &WindowParams, cutoff: u64) -> f64 {
    const CHUNK: u64 = 512;
    let nf = xs.len() as f64;
    let ell = FixedPointReal::from_f64(params.ell);
    let ell_is_one = params.ell >= 1.0;
    let steps: Vec<(f64, f64)> = xs.iter().map(|x| unit(*x)).collect();
    let chunks = cutoff.div_ceil(CHUNK);
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let first = c * CHUNK + 1;
            let last = ((c + 1) * CHUNK).min(cutoff);
            // Re-anchor from the exact phases at the start of every chunk.
            let (mut re, mut im): (Vec<f64>, Vec<f64>) =
                xs.iter().map(|x| unit(x.mul_int(first as i64))).unzip();
            let mut acc = 0.0;
            for n in first..=last {
                let (sr, si) = re
                    .iter()
                    .zip(&im)
                    .fold((0.0, 0.0), |(a, b), (r, i)| (a + r, b + i));
                let weight = if ell_is_one {
                    0.0
                } else {
                    tent_fourier_at_multiple(ell, params.ell, n as i64)
                };
                acc += weight * (sr * sr + si * si - nf);
                for ((r, i), (cr, ci)) in re.iter_mut().zip(im.iter_mut()).zip(&steps) {
                    let nr = *r * cr - *i * ci;
                    *i = *r * ci + *i * cr;
                    *r = nr;
                }
            }
            acc
        })
        .collect();
    nf * nf - nf + 2.0 * pairwise_sum(&partials)
}

#[inline]
fn unit(x: FixedPointReal) -> (f64, f64) {
    let (s, c) = (2.0 * PI * x.to_f64()).sin_cos();
    (c, s)
}

/// Rigorous bound for the Fourier tail `|∑_{|n|>M} …|`.
///
/// Writing `Δ̂(nℓ) = (1 − cos 2πnℓ)/(2π²ℓ²n²)`, the tail of a single pair
/// with phase `θ` is `(1/π²ℓ²)·[G(θ) − G(θ+ℓ)/2 − G(θ−ℓ)/2]` with
/// `G(x) = ∑_{n>M} cos(2πnx)/n²`. Abel summation gives
/// `|G(x)| ≤ min(1/M, 1/((M+1)²·|sin πx|))`, and the same bound holds for
/// every finite block `∑_{M<n≤M'}`. Summing over pairs, the `L/N²` prefactor
/// cancels against `1/ℓ²` to `1/L`.
///
/// The `|sin πx|` values are binned into logarithmic buckets and each bucket
/// charged at its lower edge, which keeps the bound rigorous in `O(1)`
/// memory.
struct FourierTail {
    /// Half-weights per bucket: the `θ` term counts 2, the `θ ± ℓ` terms 1.
    buckets: Vec<u64>,
    zero_weight: u64,
    l: f64,
}

const SUB_OCTAVES: f64 = 64.0;
const MIN_LOG2: f64 = -130.0;

impl FourierTail {
    fn new(xs: &[FixedPointReal], params: &WindowParams) -> Self {
        let n_buckets = (-MIN_LOG2 * SUB_OCTAVES) as usize + 1;
        let ell = FixedPointReal::from_f64(params.ell);
        let per_anchor: Vec<(Vec<u64>, u64)> = (0..xs.len())
            .into_par_iter()
            .map(|i| {
                let mut b = vec![0u64; n_buckets];
                let mut zeros = 0u64;
                for xj in &xs[i + 1..] {
                    let theta = xj.wrapping_sub(xs[i]);
                    for (phase, w) in [
                        (theta, 2),
                        (theta.wrapping_add(ell), 1),
                        (theta.wrapping_sub(ell), 1),
                    ] {
                        match bucket_of(phase) {
                            Some(k) => b[k] += w,
                            None => zeros += w,
                        }
                    }
                }
                (b, zeros)
            })
            .collect();
        let mut buckets = vec![0u64; n_buckets];
        let mut zero_weight = 0;
        for (b, z) in per_anchor {
            for (acc, v) in buckets.iter_mut().zip(b) {
                *acc += v;
            }
            zero_weight += z;
        }
        Self {
            buckets,
            zero_weight,
            l: params.l,
        }
    }

    fn bound(&self, cutoff: u64) -> f64 {
        let m = cutoff.max(1) as f64;
        let cap = 1.0 / m;
        let mut total = self.zero_weight as f64 * cap;
        for (k, &w) in self.buckets.iter().enumerate() {
            if w == 0 {
                continue;
            }
            let s_lo = (MIN_LOG2 + k as f64 / SUB_OCTAVES).exp2();
            total += w as f64 * cap.min(1.0 / ((m + 1.0) * (m + 1.0) * s_lo));
        }
        // Half-weights, and both orderings of each pair.
        total * 0.5 * 2.0 / (PI * PI * self.l)
    }

    /// Smallest `M ≤ max_terms` with `bound(M) ≤ tol`.
    fn cutoff_for(&self, tol: f64, max_terms: u64) -> Option<u64> {
        if self.bound(max_terms) > tol {
            return None;
        }
        if self.bound(1) <= tol {
            return Some(1);
        }
        let (mut lo, mut hi) = (1u64, max_terms);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.bound(mid) <= tol {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    }
}

/// Bucket of `|sin πx|` (lower edges `2^(MIN_LOG2 + k/SUB_OCTAVES)`), or
/// `None` when `x` is an integer.
fn bucket_of(x: FixedPointReal) -> Option<usize> {
    let num = x.numerator();
    let dist = num.min(num.wrapping_neg());
    if dist == 0 {
        return None;
    }
    let s = (PI * (dist as f64 / TWO_POW_128)).sin();
    let pos = ((s.log2() - MIN_LOG2) * SUB_OCTAVES).floor();
    // Step one bucket down to stay clear of rounding at the edges.
    Some((pos as i64 - 1).max(0) as usize)
}

fn check_window(points: &PointSet, params: &WindowParams) -> Result<()> {
    if points.len() != params.n {
        return Err(Error::Window(format!(
            "point set has {} points but window is for N = {}",
            points.len(),
            params.n
        )));
    }
    if !(params.ell > 0.0 && params.ell <= 1.0) {
        return Err(Error::Window(format!("ell = {} not in (0, 1]", params.ell)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqgen::{dilate_mod1, generate_sequence, sample_alpha, SequenceSpec};

    fn fp(x: f64) -> FixedPointReal {
        FixedPointReal::from_f64(x)
    }

    #[test]
    fn tent_values() {
        assert_eq!(tent(0.0), 1.0);
        assert_eq!(tent(0.5), 0.5);
        assert_eq!(tent(-2.0), 0.0);
        assert_eq!(tent(-1.0), 0.0);
    }

    #[test]
    fn tent_fourier_values() {
        assert_eq!(tent_fourier(0.0), 1.0);
        for n in [-3, -1, 1, 2, 17] {
            assert!(tent_fourier(n as f64).abs() < 1e-30);
        }
        assert!((tent_fourier(0.5) - 4.0 / (PI * PI)).abs() < 1e-15);
        assert!((tent_fourier(0.5) - 0.405_284_735).abs() < 1e-9);
        // Continuity through the series switch-over.
        let a = tent_fourier(0.999e-8 / PI);
        let b = tent_fourier(1.001e-8 / PI);
        assert!((a - b).abs() < 1e-15);
        assert!(tent_fourier(1e-9) <= 1.0);
    }

    #[test]
    fn window_params_validation() {
        let p = WindowParams::from_beta(10_000, 0.5).unwrap();
        assert!((p.l - 100.0).abs() < 1e-9);
        assert!((p.ell - 0.01).abs() < 1e-12);
        assert!(WindowParams::from_l(4, 5.0).is_err());
        assert!(WindowParams::from_l(4, 0.0).is_err());
        assert!(WindowParams::from_l(4, 4.0).is_ok());
        assert!(WindowParams::from_beta(4, 1.0).is_err());
    }

    #[test]
    fn count_examples() {
        let one = PointSet::from_f64(&[0.5]);
        let p = WindowParams::from_l(1, 0.1).unwrap();
        assert_eq!(count_in_interval(&one, fp(0.5), &p), 1);

        // Dyadic endpoints: [0.5, 0.625) includes 0.5, [0.375, 0.5) does not.
        let p = WindowParams::from_l(1, 0.125).unwrap();
        assert_eq!(count_in_interval(&one, fp(0.5625), &p), 1);
        assert_eq!(count_in_interval(&one, fp(0.4375), &p), 0);

        let four = PointSet::from_f64(&[0.0, 0.25, 0.5, 0.75]);
        let full = WindowParams::from_l(4, 4.0).unwrap();
        for x0 in [0.0, 0.1, 0.9] {
            assert_eq!(count_in_interval(&four, fp(x0), &full), 4);
        }
    }

    #[test]
    fn count_wraps_around_zero() {
        let pts = PointSet::from_f64(&[0.02, 0.97, 0.5]);
        let p = WindowParams::from_l(3, 0.3).unwrap();
        // [0.9, 1.0) ∪ [0, 0.1)
        assert_eq!(count_in_interval(&pts, fp(0.0), &p), 2);
        assert_eq!(count_in_interval(&pts, fp(0.5), &p), 1);
    }

    #[test]
    fn single_point_is_bernoulli() {
        for &(x, ell) in &[(0.3, 0.25), (0.9, 0.5), (0.0, 0.8), (0.1, 1.0)] {
            let pts = PointSet::from_f64(&[x]);
            let p = WindowParams::from_l(1, ell).unwrap();
            let v = number_variance_exact(&pts, &p).unwrap().sigma2;
            assert!((v - ell * (1.0 - ell)).abs() < 1e-15, "{x} {ell} {v}");
            let s = number_variance_sweep(&pts, &p).unwrap().sigma2;
            assert!((s - ell * (1.0 - ell)).abs() < 1e-12, "{x} {ell} {s}");
        }
    }

    #[test]
    fn two_point_hand_value() {
        let pts = PointSet::from_f64(&[0.1, 0.3]);
        let p = WindowParams::from_l(2, 0.8).unwrap();
        let v = number_variance_exact(&pts, &p).unwrap().sigma2;
        assert!((v - 0.56).abs() < 1e-12, "{v}");
        let r = pair_correlation_direct(&pts, &p, &TestFunction::Tent)
            .unwrap()
            .r2;
        assert!((r - 0.5).abs() < 1e-12, "{r}");
        let s = number_variance_sweep(&pts, &p).unwrap().sigma2;
        assert!((s - 0.56).abs() < 1e-12, "{s}");
    }

    #[test]
    fn antipodal_pair_has_no_near_pairs() {
        let pts = PointSet::from_f64(&[0.0, 0.5]);
        let p = WindowParams::from_l(2, 0.5).unwrap();
        let r = pair_correlation_direct(&pts, &p, &TestFunction::Tent).unwrap();
        assert_eq!(r.r2, 0.0);
    }

    #[test]
    fn coincident_points() {
        // α = 0 puts every point at the origin: S is N or 0.
        let seq = generate_sequence(&SequenceSpec::monomial(1), 5).unwrap();
        let pts = dilate_mod1(FixedPointReal::ZERO, &seq);
        let p = WindowParams::from_l(5, 1.0).unwrap();
        let ell = p.ell;
        let expect = 25.0 * ell - 1.0;
        for v in [
            number_variance_exact(&pts, &p).unwrap().sigma2,
            number_variance_sweep(&pts, &p).unwrap().sigma2,
        ] {
            assert!((v - expect).abs() < 1e-12, "{v} vs {expect}");
        }
    }

    #[test]
    fn lattice_has_zero_variance() {
        let n = 8;
        let seq = generate_sequence(&SequenceSpec::monomial(1), n).unwrap();
        let alpha = FixedPointReal::from_numerator(1 << 125);
        let pts = dilate_mod1(alpha, &seq);
        for k in 1..=n {
            let p = WindowParams::from_l(n, k as f64).unwrap();
            assert!(number_variance_exact(&pts, &p).unwrap().sigma2.abs() < 1e-12);
            let mc = number_variance_montecarlo(&pts, &p, 10_000, 3).unwrap();
            assert_eq!(mc.sigma2, 0.0);
            assert_eq!(number_variance_sweep(&pts, &p).unwrap().sigma2, 0.0);
        }
    }

    #[test]
    fn identity_on_random_points() {
        for seed in 0..30u64 {
            let n = 2 + (seed as usize * 37) % 300;
            let seq = generate_sequence(&SequenceSpec::monomial(2), n).unwrap();
            let pts = dilate_mod1(sample_alpha(seed, 0), &seq);
            let p = WindowParams::from_beta(n, 0.45 * (seed as f64 / 30.0)).unwrap();
            let v = number_variance_exact(&pts, &p).unwrap().sigma2;
            let r = pair_correlation_direct(&pts, &p, &TestFunction::Tent)
                .unwrap()
                .r2;
            let rhs = p.l - p.l * p.l + p.l * r;
            assert!((v - rhs).abs() <= 1e-9 * p.l.powi(2).max(1.0));
            let s = number_variance_sweep(&pts, &p).unwrap().sigma2;
            assert!((v - s).abs() <= 1e-9 * p.l.powi(2).max(1.0), "{v} {s}");
        }
    }

    #[test]
    fn windowed_and_full_scans_agree() {
        // Indicator with R = 1/2 and ℓ = 1: the wide path; compare against
        // brute-force ∑_{i≠j}∑_m over a generous m range.
        let raw = [0.05, 0.11, 0.13, 0.4, 0.77, 0.95];
        let pts = PointSet::from_f64(&raw);
        for l in [0.3, 1.2, 3.0, 5.9] {
            let p = WindowParams::from_l(raw.len(), l).unwrap();
            for f in [TestFunction::Tent, TestFunction::IntervalIndicator] {
                let got = pair_correlation_direct(&pts, &p, &f).unwrap().r2;
                let mut brute = 0.0;
                for (i, a) in pts.points().iter().enumerate() {
                    for (j, b) in pts.points().iter().enumerate() {
                        if i == j {
                            continue;
                        }
                        let d = a.to_f64() - b.to_f64();
                        for m in -3..=3 {
                            brute += f.eval((d + m as f64) / p.ell);
                        }
                    }
                }
                brute /= raw.len() as f64;
                assert!((got - brute).abs() < 1e-12, "{l} {f:?}: {got} vs {brute}");
            }
        }
    }

    #[test]
    fn custom_function_requires_radius() {
        let pts = PointSet::from_f64(&[0.1, 0.2]);
        let p = WindowParams::from_l(2, 0.5).unwrap();
        let f = TestFunction::Custom {
            samples: vec![1.0, 0.0],
            radius: None,
        };
        assert!(matches!(
            pair_correlation_direct(&pts, &p, &f),
            Err(Error::Support)
        ));
        // Tabulated tent reproduces the built-in tent.
        let f = TestFunction::Custom {
            samples: vec![1.0, 0.5, 0.0],
            radius: Some(1.0),
        };
        let a = pair_correlation_direct(&pts, &p, &f).unwrap().r2;
        let b = pair_correlation_direct(&pts, &p, &TestFunction::Tent)
            .unwrap()
            .r2;
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn rotation_invariance() {
        let seq = generate_sequence(&SequenceSpec::monomial(2), 200).unwrap();
        let alpha = sample_alpha(11, 4);
        let pts = dilate_mod1(alpha, &seq);
        let shift = sample_alpha(12, 0);
        let rotated =
            PointSet::from_points(pts.points().iter().map(|x| x.wrapping_add(shift)).collect());
        let p = WindowParams::from_beta(200, 0.4).unwrap();
        let a = pair_correlation_direct(&pts, &p, &TestFunction::Tent)
            .unwrap()
            .r2;
        let b = pair_correlation_direct(&rotated, &p, &TestFunction::Tent)
            .unwrap()
            .r2;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn fourier_two_point_closed_form() {
        let seq = crate::seqgen::IntegerSequence::from_terms(vec![1, 2]).unwrap();
        let half = FixedPointReal::from_numerator(1 << 127);
        for l in [0.3, 0.7, 1.1] {
            let p = WindowParams::from_l(2, l).unwrap();
            let r = pair_correlation_fourier(&seq, half, &p, 1e-7).unwrap();
            // (L/4)·∑_n Δ̂(Ln/2)·2(−1)^n, summed far past the cutoff.
            let terms = 20_000_000i64;
            let closed_tail = 4.0 / (PI * PI * l * terms as f64);
            let mut closed = 2.0;
            for n in 1..=terms {
                let s = if n % 2 == 0 { 1.0 } else { -1.0 };
                closed += 2.0 * 2.0 * s * tent_fourier(l * n as f64 / 2.0);
            }
            closed *= l / 4.0;
            assert!(
                (r.r2 - closed).abs() < 1e-7 + closed_tail + 1e-9,
                "{l}: {} vs {closed}",
                r.r2
            );
            let pts = dilate_mod1(half, &seq);
            let d = pair_correlation_direct(&pts, &p, &TestFunction::Tent)
                .unwrap()
                .r2;
            assert!((r.r2 - d).abs() < 1e-7 + 1e-9);
        }
    }

    #[test]
    fn fourier_matches_direct_small() {
        for seed in 0..8u64 {
            let n = 3 + seed as usize * 7;
            let seq = generate_sequence(&SequenceSpec::monomial(2), n).unwrap();
            let alpha = sample_alpha(seed, 1);
            let p = WindowParams::from_beta(n, 0.1 + 0.05 * seed as f64).unwrap();
            let tol = 1e-6;
            let f = pair_correlation_fourier(&seq, alpha, &p, tol).unwrap();
            let d = pair_correlation_direct(&dilate_mod1(alpha, &seq), &p, &TestFunction::Tent)
                .unwrap()
                .r2;
            assert!(f.truncation_bound.unwrap() <= tol);
            assert!((f.r2 - d).abs() <= tol + 1e-9, "{seed}: {} vs {d}", f.r2);
        }
    }

    #[test]
    fn fourier_budget_errors() {
        let seq = generate_sequence(&SequenceSpec::monomial(2), 10).unwrap();
        let p = WindowParams::from_beta(10, 0.3).unwrap();
        let alpha = sample_alpha(1, 1);
        assert!(matches!(
            pair_correlation_fourier(&seq, alpha, &p, 0.0),
            Err(Error::Budget(_))
        ));
        assert!(matches!(
            pair_correlation_fourier_with_ceiling(&seq, alpha, &p, 1e-9, 100),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn montecarlo_bernoulli_and_determinism() {
        let pts = PointSet::from_f64(&[0.37]);
        let p = WindowParams::from_l(1, 0.5).unwrap();
        let a = number_variance_montecarlo(&pts, &p, 1_000_000, 42).unwrap();
        assert!((a.sigma2 - 0.25).abs() < 0.002, "{}", a.sigma2);
        let b = number_variance_montecarlo(&pts, &p, 1_000_000, 42).unwrap();
        assert_eq!(a.sigma2.to_bits(), b.sigma2.to_bits());
        assert_eq!(a.mc_stderr, b.mc_stderr);
        assert!(number_variance_montecarlo(&pts, &p, 1, 42).is_err());
    }

    #[test]
    fn mean_count_is_l() {
        let seq = generate_sequence(&SequenceSpec::monomial(2), 300).unwrap();
        let pts = dilate_mod1(sample_alpha(5, 5), &seq);
        let p = WindowParams::from_beta(300, 0.35).unwrap();
        let m = 1_000_000u64;
        let mut rng = ChaCha20Rng::seed_from_u64(99);
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..m {
            let c = count_in_interval(&pts, FixedPointReal::from_numerator(rng.gen()), &p) as f64;
            s1 += c;
            s2 += c * c;
        }
        let mean = s1 / m as f64;
        let var = s2 / m as f64 - mean * mean;
        assert!((mean - p.l).abs() <= 5.0 * (var / m as f64).sqrt());
    }
}
