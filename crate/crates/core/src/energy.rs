//! Additive energy, difference profiles and gcd-sum diagnostics.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seqgen::{IntegerSequence, SequenceKind, SequenceSpec};
use crate::sum::pairwise_sum;

/// Default cap on the number of distinct differences for the `O(D²)` gcd sum.
pub const DEFAULT_MAX_DISTINCT_DIFFERENCES: usize = 20_000;

/// `E_N(𝒜) = ∑_s r(s)²` together with the pair-sum multiplicities `r(s)`
/// (ordered pairs, `i = j` included), sorted by `s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnergyProfile {
    pub n: usize,
    pub energy: u128,
    pub sum_multiplicities: Vec<(i64, u64)>,
}

impl EnergyProfile {
    pub fn multiplicity(&self, s: i64) -> u64 {
        self.sum_multiplicities
            .binary_search_by_key(&s, |e| e.0)
            .map_or(0, |i| self.sum_multiplicities[i].1)
    }
}

/// `W_N(w) = #{i ≠ j : a_i − a_j = w}` for every nonzero difference that
/// occurs, sorted by `w`. Zero counts are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferenceProfile {
    pub n: usize,
    pub counts: Vec<(i64, u64)>,
}

impl DifferenceProfile {
    pub fn get(&self, w: i64) -> u64 {
        self.counts
            .binary_search_by_key(&w, |e| e.0)
            .map_or(0, |i| self.counts[i].1)
    }

    /// Number of distinct nonzero differences (both signs).
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|e| e.1).sum()
    }

    /// Entries with `w > 0`; the profile is symmetric so these determine it.
    pub fn positive(&self) -> &[(i64, u64)] {
        let start = self.counts.partition_point(|e| e.0 < 0);
        &self.counts[start..]
    }
}

/// Run-length encodes a sorted slice.
fn run_lengths<T: Copy + PartialEq>(sorted: &[T]) -> Vec<(T, u64)> {
    let mut out: Vec<(T, u64)> = Vec::new();
    for &x in sorted {
        match out.last_mut() {
            Some((v, c)) if *v == x => *c += 1,
            _ => out.push((x, 1)),
        }
    }
    out
}

/// Additive energy by sorting the `N(N+1)/2` unordered pair sums.
pub fn additive_energy(seq: &IntegerSequence) -> EnergyProfile {
    let a = seq.terms();
    let n = a.len();
    let mut off: Vec<i64> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for (i, &x) in a.iter().enumerate() {
        off.extend(a[i + 1..].iter().map(|&y| x + y));
    }
    off.par_sort_unstable();
    let mut diag: Vec<i64> = a.iter().map(|&x| 2 * x).collect();
    diag.sort_unstable();

    // r(s) = 2·#{i < j : a_i + a_j = s} + [s = 2a_i for some i]
    let off = run_lengths(&off);
    let mut merged = Vec::with_capacity(off.len() + diag.len());
    let (mut p, mut q) = (0, 0);
    while p < off.len() || q < diag.len() {
        let next_off = off.get(p).map(|e| e.0);
        let next_diag = diag.get(q).copied();
        match (next_off, next_diag) {
            (Some(s), Some(t)) if s == t => {
                merged.push((s, 2 * off[p].1 + 1));
                p += 1;
                q += 1;
            }
            (Some(s), Some(t)) if s < t => {
                merged.push((s, 2 * off[p].1));
                p += 1;
            }
            (Some(s), None) => {
                merged.push((s, 2 * off[p].1));
                p += 1;
            }
            (_, Some(t)) => {
                merged.push((t, 1));
                q += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    let energy = merged.iter().map(|&(_, r)| (r as u128) * (r as u128)).sum();
    EnergyProfile {
        n,
        energy,
        sum_multiplicities: merged,
    }
}

pub fn difference_profile(seq: &IntegerSequence) -> DifferenceProfile {
    let mut a = seq.terms().to_vec();
    a.sort_unstable();
    let n = a.len();
    let mut diffs: Vec<i64> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for (i, &x) in a.iter().enumerate() {
        diffs.extend(a[i + 1..].iter().map(|&y| y - x));
    }
    diffs.par_sort_unstable();
    let positive = run_lengths(&diffs);
    let mut counts: Vec<(i64, u64)> = positive.iter().rev().map(|&(w, c)| (-w, c)).collect();
    counts.extend(positive);
    DifferenceProfile { n, counts }
}

/// `∑_w W_N(w)² = #{(i,j,k,l) : i ≠ j, k ≠ l, a_i − a_j = a_k − a_l}`.
pub fn difference_energy(profile: &DifferenceProfile) -> u128 {
    profile
        .counts
        .iter()
        .map(|&(_, c)| (c as u128) * (c as u128))
        .sum()
}

/// Binary (Stein) gcd.
pub fn binary_gcd(mut a: u64, mut b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GcdSumDiagnostic {
    /// `∑_{r,s} W(w_r)·W(w_s)·gcd(w_r, w_s)/√|w_r·w_s|`.
    pub exact_sum: f64,
    /// `∑_r W(w_r)²·exp(10·log r / log log(r + 1))`, `w_r` ranked by `|w|`
    /// ascending with negatives first.
    pub majorant: f64,
    /// `∑_r W(w_r)²`.
    pub difference_energy: f64,
    pub distinct: usize,
}

/// The gcd-sum majorant factor for rank `r ≥ 1`.
pub fn gcd_sum_factor(r: u64) -> f64 {
    let r = r as f64;
    let ll = (r + 1.0).ln().ln();
    (10.0 * r.ln() / ll).exp()
}

pub fn gcd_sum_diagnostic(profile: &DifferenceProfile) -> Result<GcdSumDiagnostic> {
    gcd_sum_diagnostic_with_cap(profile, DEFAULT_MAX_DISTINCT_DIFFERENCES)
}

pub fn gcd_sum_diagnostic_with_cap(
    profile: &DifferenceProfile,
    max_distinct: usize,
) -> Result<GcdSumDiagnostic> {
    let d = profile.distinct();
    if d == 0 {
        return Err(Error::Config("difference profile is empty".into()));
    }
    if d > max_distinct {
        return Err(Error::Budget(format!(
            "{d} distinct differences exceed the gcd-sum cap of {max_distinct}"
        )));
    }
    // The summand depends on |w_r|, |w_s| only and W is symmetric, so the
    // full double sum is four times the sum over positive differences.
    let pos = profile.positive();
    let rows: Vec<f64> = (0..pos.len())
        .into_par_iter()
        .map(|r| {
            let (u, wu) = pos[r];
            let terms: Vec<f64> = pos
                .iter()
                .map(|&(v, wv)| {
                    let g = binary_gcd(u as u64, v as u64) as f64;
                    (wu * wv) as f64 * g / ((u as f64) * (v as f64)).sqrt()
                })
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    let exact_sum = 4.0 * pairwise_sum(&rows);

    // Rank order: |w| ascending, −w before +w.
    let mut ranked: Vec<f64> = Vec::with_capacity(d);
    for &(_, c) in pos {
        let c2 = (c as f64) * (c as f64);
        ranked.push(c2);
        ranked.push(c2);
    }
    let majorant_terms: Vec<f64> = ranked
        .iter()
        .enumerate()
        .map(|(i, &c2)| c2 * gcd_sum_factor(i as u64 + 1))
        .collect();
    Ok(GcdSumDiagnostic {
        exact_sum,
        majorant: pairwise_sum(&majorant_terms),
        difference_energy: pairwise_sum(&ranked),
        distinct: d,
    })
}

/// Two 62-bit primes for which 2 is a primitive root, so powers of small
/// bases do not cycle within any feasible range.
const FINGERPRINT_PRIMES: [u64; 2] = [4_611_686_018_427_387_847, 4_611_686_018_427_387_787];

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, p);
        }
        b = mul_mod(b, b, p);
        e >>= 1;
    }
    acc
}

/// `aₙ mod p` for `n = 1..=count`, without materialising `aₙ`.
fn residues(spec: &SequenceSpec, count: usize, p: u64) -> Result<Vec<u64>> {
    let reduce = |x: i128| x.rem_euclid(p as i128) as u64;
    match &spec.kind {
        SequenceKind::Monomial { d } => Ok((1..=count)
            .map(|n| pow_mod(reduce(n as i128 + spec.offset as i128), *d as u64, p))
            .collect()),
        SequenceKind::Lacunary { base } => {
            let first = n_plus_offset(1, spec.offset)?;
            let mut cur = pow_mod(*base, first, p);
            let step = *base % p;
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                out.push(cur);
                cur = mul_mod(cur, step, p);
            }
            Ok(out)
        }
        SequenceKind::Custom(terms) => {
            if terms.len() < count {
                return Err(Error::Config(format!(
                    "custom sequence has {} terms, {count} requested",
                    terms.len()
                )));
            }
            Ok(terms[..count].iter().map(|&t| reduce(t as i128)).collect())
        }
    }
}

fn n_plus_offset(n: usize, offset: i64) -> Result<u64> {
    u64::try_from(n as i64 + offset)
        .map_err(|_| Error::Config(format!("lacunary exponent {n} + {offset} is negative")))
}

/// Additive energy of the first `count` terms of `spec` computed on residues
/// modulo two 62-bit primes, so sequences whose terms do not fit in 64 bits
/// (for example `2ⁿ` with `n > 62`) can still be measured.
///
/// Equal sums always have equal fingerprints; unequal sums collide only if
/// their difference is divisible by both primes (a ~2⁻¹²⁴ event for
/// unstructured data). Agrees with [`additive_energy`] wherever both apply.
pub fn additive_energy_fingerprint(spec: &SequenceSpec, count: usize) -> Result<u128> {
    if count == 0 {
        return Err(Error::Config("sequence length must be at least 1".into()));
    }
    let [p, q] = FINGERPRINT_PRIMES;
    let rp = residues(spec, count, p)?;
    let rq = residues(spec, count, q)?;
    let key = |i: usize, j: usize| -> u128 {
        let sp = (rp[i] + rp[j]) % p;
        let sq = (rq[i] + rq[j]) % q;
        ((sp as u128) << 64) | sq as u128
    };
    let mut off: Vec<u128> = Vec::with_capacity(count * (count - 1) / 2);
    for i in 0..count {
        off.extend((i + 1..count).map(|j| key(i, j)));
    }
    off.par_sort_unstable();
    let mut diag: Vec<u128> = (0..count).map(|i| key(i, i)).collect();
    diag.sort_unstable();
    if diag.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config("sequence terms are not distinct".into()));
    }
    let off = run_lengths(&off);
    let mut energy: u128 = 0;
    let mut q_idx = 0;
    for &(s, c) in &off {
        while q_idx < diag.len() && diag[q_idx] < s {
            energy += 1;
            q_idx += 1;
        }
        let r = if q_idx < diag.len() && diag[q_idx] == s {
            q_idx += 1;
            2 * c as u128 + 1
        } else {
            2 * c as u128
        };
        energy += r * r;
    }
    energy += (diag.len() - q_idx) as u128;
    Ok(energy)
}

/// `∑_w W_N(w)²` of the first `count` terms of `spec`, on the same
/// two-prime residues as [`additive_energy_fingerprint`].
pub fn difference_energy_fingerprint(spec: &SequenceSpec, count: usize) -> Result<u128> {
    if count == 0 {
        return Err(Error::Config("sequence length must be at least 1".into()));
    }
    let [p, q] = FINGERPRINT_PRIMES;
    let rp = residues(spec, count, p)?;
    let rq = residues(spec, count, q)?;
    // Keys for i < j only, canonicalised so that w and −w share a key. Each
    // unordered pair with |a_i − a_j| = |w| is counted once, so a class holds
    // W(w) = W(−w) pairs and contributes W(w)² + W(−w)².
    let mut keys: Vec<u128> = Vec::with_capacity(count * (count - 1) / 2);
    for i in 0..count {
        for j in i + 1..count {
            let dp = (rp[i] + p - rp[j]) % p;
            let dq = (rq[i] + q - rq[j]) % q;
            let fwd = ((dp as u128) << 64) | dq as u128;
            let back = ((((p - dp) % p) as u128) << 64) | ((q - dq) % q) as u128;
            keys.push(fwd.min(back));
        }
    }
    keys.par_sort_unstable();
    Ok(run_lengths(&keys)
        .into_iter()
        .map(|(_, c)| 2 * (c as u128) * (c as u128))
        .sum())
}
