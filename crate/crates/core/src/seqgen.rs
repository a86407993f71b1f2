//! Integer sequences, the sampling of dilation factors and the dilated point
//! set `{α·aₙ mod 1}`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::fixed::FixedPointReal;

/// Terms must stay below this magnitude so that pair sums and differences fit
/// in an `i64`.
pub const TERM_LIMIT: i64 = 1 << 62;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SequenceKind {
    /// `aₙ = (n + offset)^d`.
    Monomial { d: u32 },
    /// `aₙ = base^(n + offset)`.
    Lacunary { base: u64 },
    /// Terms supplied verbatim; `offset` is ignored.
    Custom(Vec<i64>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceSpec {
    pub kind: SequenceKind,
    pub offset: i64,
}

impl SequenceSpec {
    pub fn monomial(d: u32) -> Self {
        Self {
            kind: SequenceKind::Monomial { d },
            offset: 0,
        }
    }

    pub fn lacunary(base: u64) -> Self {
        Self {
            kind: SequenceKind::Lacunary { base },
            offset: 0,
        }
    }

    pub fn custom(terms: Vec<i64>) -> Self {
        Self {
            kind: SequenceKind::Custom(terms),
            offset: 0,
        }
    }

    pub fn with_offset(mut self, offset: i64) -> Self {
        self.offset = offset;
        self
    }

    /// Reads a custom sequence: one signed decimal integer per line, blank
    /// lines and lines starting with `#` skipped.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Ok(Self::custom(parse_sequence_text(&text)?))
    }

    /// A short identifier used in experiment output.
    pub fn id(&self) -> String {
        let base = match &self.kind {
            SequenceKind::Monomial { d } => format!("monomial:d={d}"),
            SequenceKind::Lacunary { base } => format!("lacunary:base={base}"),
            SequenceKind::Custom(terms) => format!("custom:len={}", terms.len()),
        };
        if self.offset != 0 && !matches!(self.kind, SequenceKind::Custom(_)) {
            format!("{base}:offset={}", self.offset)
        } else {
            base
        }
    }

    /// The `n`-th term (1-based) as an unbounded integer, if it fits `i128`.
    pub(crate) fn term_i128(&self, n: usize) -> Option<i128> {
        match &self.kind {
            SequenceKind::Monomial { d } => {
                let base = n as i128 + self.offset as i128;
                base.checked_pow(*d)
            }
            SequenceKind::Lacunary { base } => {
                let exp = u32::try_from(n as i64 + self.offset).ok()?;
                (*base as i128).checked_pow(exp)
            }
            SequenceKind::Custom(terms) => terms.get(n - 1).map(|&t| t as i128),
        }
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Parses `monomial:d=2`, `lacunary:base=3` or `custom:1,5,9` (an optional
/// trailing `:offset=K` applies to the first two). File-backed custom
/// sequences are resolved by the caller.
impl FromStr for SequenceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default();
        let mut spec = match kind {
            "monomial" | "lacunary" => {
                let arg = parts
                    .next()
                    .ok_or_else(|| Error::Config(format!("missing parameter in {s:?}")))?;
                let (key, value) = arg
                    .split_once('=')
                    .ok_or_else(|| Error::Config(format!("expected key=value in {s:?}")))?;
                match (kind, key) {
                    ("monomial", "d") => Self::monomial(parse_num(value)?),
                    ("lacunary", "base") => Self::lacunary(parse_num(value)?),
                    _ => return Err(Error::Config(format!("unknown parameter {key:?}"))),
                }
            }
            "custom" => {
                let list = parts.next().unwrap_or_default();
                let terms = list
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| parse_num::<i64>(t.trim()))
                    .collect::<Result<Vec<_>>>()?;
                return Ok(Self::custom(terms));
            }
            _ => return Err(Error::Config(format!("unknown sequence kind in {s:?}"))),
        };
        for extra in parts {
            match extra.split_once('=') {
                Some(("offset", v)) => spec.offset = parse_num(v)?,
                _ => return Err(Error::Config(format!("unexpected {extra:?} in {s:?}"))),
            }
        }
        Ok(spec)
    }
}

fn parse_num<T: FromStr>(s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Config(format!("cannot parse {s:?} as a number")))
}

pub fn parse_sequence_text(text: &str) -> Result<Vec<i64>> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'))
        .map(|(i, line)| {
            line.parse::<i64>()
                .map_err(|e| Error::Parse(format!("line {}: {line:?}: {e}", i + 1)))
        })
        .collect()
}

/// The first `N` terms of a sequence of distinct integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerSequence {
    terms: Vec<i64>,
    spec: SequenceSpec,
}

impl IntegerSequence {
    /// Validates distinctness and the magnitude budget.
    pub fn new(terms: Vec<i64>, spec: SequenceSpec) -> Result<Self> {
        if let Some((pos, &t)) = terms
            .iter()
            .enumerate()
            .find(|(_, t)| t.unsigned_abs() >= TERM_LIMIT as u64)
        {
            return Err(Error::Overflow(format!(
                "term {t} at position {} exceeds 2^62",
                pos + 1
            )));
        }
        let mut order: Vec<usize> = (0..terms.len()).collect();
        order.sort_by_key(|&i| (terms[i], i));
        for w in order.windows(2) {
            if terms[w[0]] == terms[w[1]] {
                return Err(Error::Duplicate {
                    value: terms[w[0]],
                    first: w[0] + 1,
                    second: w[1] + 1,
                });
            }
        }
        Ok(Self { terms, spec })
    }

    pub fn from_terms(terms: Vec<i64>) -> Result<Self> {
        let spec = SequenceSpec::custom(terms.clone());
        Self::new(terms, spec)
    }

    pub fn terms(&self) -> &[i64] {
        &self.terms
    }

    pub fn spec(&self) -> &SequenceSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Generates `(a₁, …, a_N)` according to `spec`.
pub fn generate_sequence(spec: &SequenceSpec, n: usize) -> Result<IntegerSequence> {
    if n == 0 {
        return Err(Error::Config("sequence length must be at least 1".into()));
    }
    let terms = match &spec.kind {
        SequenceKind::Custom(list) => {
            if list.len() < n {
                return Err(Error::Config(format!(
                    "custom sequence has {} terms, {n} requested",
                    list.len()
                )));
            }
            list[..n].to_vec()
        }
        SequenceKind::Monomial { d } if *d == 0 => {
            return Err(Error::Config("monomial degree must be at least 1".into()))
        }
        SequenceKind::Lacunary { base } if *base < 2 => {
            return Err(Error::Config("lacunary base must be at least 2".into()))
        }
        _ => (1..=n)
            .map(|i| {
                spec.term_i128(i)
                    .filter(|t| t.unsigned_abs() < TERM_LIMIT as u128)
                    .map(|t| t as i64)
                    .ok_or_else(|| {
                        Error::Overflow(format!("term {i} of {spec} does not fit in 62 bits"))
                    })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    IntegerSequence::new(terms, spec.clone())
}

/// The sorted fractional parts `{α·aₙ}` with back-references to `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    points: Vec<FixedPointReal>,
    source_index: Vec<u32>,
}

impl PointSet {
    /// Sorts arbitrary points on the circle.
    pub fn from_points(raw: Vec<FixedPointReal>) -> Self {
        assert!(raw.len() < u32::MAX as usize, "too many points");
        let mut idx: Vec<u32> = (0..raw.len() as u32).collect();
        idx.sort_by_key(|&i| raw[i as usize]);
        let points = idx.iter().map(|&i| raw[i as usize]).collect();
        Self {
            points,
            source_index: idx,
        }
    }

    /// Convenience constructor from `f64` coordinates (reduced mod 1).
    pub fn from_f64(raw: &[f64]) -> Self {
        Self::from_points(raw.iter().map(|&x| FixedPointReal::from_f64(x)).collect())
    }

    pub fn points(&self) -> &[FixedPointReal] {
        &self.points
    }

    /// Sorted position → 0-based index into the generating sequence.
    pub fn source_index(&self) -> &[u32] {
        &self.source_index
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub(crate) fn numerators(&self) -> impl ExactSizeIterator<Item = u128> + '_ {
        self.points.iter().map(|p| p.numerator())
    }
}

/// `{α·aₙ mod 1}` with no rounding, sorted.
pub fn dilate_mod1(alpha: FixedPointReal, seq: &IntegerSequence) -> PointSet {
    PointSet::from_points(seq.terms().iter().map(|&a| alpha.mul_int(a)).collect())
}

/// A uniformly distributed `α` on the `2^-128` grid, a pure function of
/// `(seed, index)`.
pub fn sample_alpha(seed: u64, index: u64) -> FixedPointReal {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    FixedPointReal::from_numerator(rng.gen())
}
