//! Piecewise-linear expansion profiles `f_d` in normalized units (α = u/v).

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::interval::{parse_rational, Interval, IntervalError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("no built-in profile for degree {0} (supported: 5, 6, 7, 8)")]
    UnsupportedDegree(u32),
    #[error("segment domain {0} is empty")]
    EmptyDomain(String),
    #[error("profile has no segments")]
    NoSegments,
    #[error("argument {0} lies outside the profile domain")]
    OutOfDomain(String),
    #[error("profile text, line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Interval(#[from] IntervalError),
}

pub type Result<T> = std::result::Result<T, ProfileError>;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `β = slope·α + offset` for α in `[domain_lo, domain_hi]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineSegment {
    domain_lo: BigRational,
    domain_hi: BigRational,
    slope: BigRational,
    offset: BigRational,
}

impl AffineSegment {
    pub fn new(
        domain_lo: BigRational,
        domain_hi: BigRational,
        slope: BigRational,
        offset: BigRational,
    ) -> Result<Self> {
        if domain_lo >= domain_hi {
            return Err(ProfileError::EmptyDomain(format!("[{domain_lo}, {domain_hi}]")));
        }
        Ok(Self {
            domain_lo,
            domain_hi,
            slope,
            offset,
        })
    }

    /// Segment through `(x0, y0)` and `(x1, y1)`.
    pub fn through(x0: BigRational, y0: BigRational, x1: BigRational, y1: BigRational) -> Result<Self> {
        if x0 >= x1 {
            return Err(ProfileError::EmptyDomain(format!("[{x0}, {x1}]")));
        }
        let slope = (&y1 - &y0) / (&x1 - &x0);
        let offset = &y0 - &slope * &x0;
        Self::new(x0, x1, slope, offset)
    }

    pub fn domain_lo(&self) -> &BigRational {
        &self.domain_lo
    }

    pub fn domain_hi(&self) -> &BigRational {
        &self.domain_hi
    }

    pub fn slope(&self) -> &BigRational {
        &self.slope
    }

    pub fn offset(&self) -> &BigRational {
        &self.offset
    }

    pub fn eval(&self, alpha: &BigRational) -> BigRational {
        &self.slope * alpha + &self.offset
    }

    pub fn contains(&self, alpha: &BigRational) -> bool {
        &self.domain_lo <= alpha && alpha <= &self.domain_hi
    }

    /// Same affine map over a different domain.
    pub fn with_domain(&self, lo: BigRational, hi: BigRational) -> Result<Self> {
        Self::new(lo, hi, self.slope.clone(), self.offset.clone())
    }

    /// Image under the reflection `(α, β) ↦ (1 − β, 1 − α)`; `None` for a flat segment.
    pub fn reflected(&self) -> Option<AffineSegment> {
        if self.slope.is_zero() {
            return None;
        }
        let one = BigRational::one();
        let k = &self.slope;
        let lo = &one - self.eval(&self.domain_hi);
        let hi = &one - self.eval(&self.domain_lo);
        let slope = k.recip();
        let offset = (k + &self.offset - &one) / k;
        if k.is_negative() {
            return Some(AffineSegment {
                domain_lo: hi,
                domain_hi: lo,
                slope,
                offset,
            });
        }
        Some(AffineSegment {
            domain_lo: lo,
            domain_hi: hi,
            slope,
            offset,
        })
    }
}

/// Exact-rational piecewise-linear profile for degree `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseLinearProfile {
    degree: u32,
    segments: Vec<AffineSegment>,
}

impl PiecewiseLinearProfile {
    /// Segments must be listed left to right; structural properties are not
    /// enforced here, see [`check_structure`](Self::check_structure).
    pub fn new(degree: u32, segments: Vec<AffineSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(ProfileError::NoSegments);
        }
        Ok(Self { degree, segments })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn segments(&self) -> &[AffineSegment] {
        &self.segments
    }

    fn domain(&self) -> (&BigRational, &BigRational) {
        (
            self.segments[0].domain_lo(),
            self.segments[self.segments.len() - 1].domain_hi(),
        )
    }

    /// Exact `f(α)`. A breakpoint resolves to the left segment.
    pub fn eval_rational(&self, alpha: &BigRational) -> Result<BigRational> {
        self.segments
            .iter()
            .find(|s| s.contains(alpha))
            .map(|s| s.eval(alpha))
            .ok_or_else(|| ProfileError::OutOfDomain(alpha.to_string()))
    }

    /// Enclosure of `{f(x) : x ∈ alpha}`.
    pub fn eval_interval(&self, alpha: &Interval) -> Result<Interval> {
        let (lo, hi) = self.domain();
        let a_lo = BigRational::from_float(alpha.lo()).expect("finite");
        let a_hi = BigRational::from_float(alpha.hi()).expect("finite");
        if a_lo < *lo || a_hi > *hi {
            return Err(ProfileError::OutOfDomain(alpha.to_string()));
        }
        let mut out: Option<Interval> = None;
        for s in &self.segments {
            if a_hi < s.domain_lo || a_lo > s.domain_hi {
                continue;
            }
            let dom = Interval::from_rationals(&s.domain_lo, &s.domain_hi)?;
            let piece = alpha.intersect(&dom).unwrap_or(*alpha);
            let slope = Interval::from_rational(&s.slope)?;
            let offset = Interval::from_rational(&s.offset)?;
            let y = slope.mul(&piece)?.add(&offset)?;
            out = Some(match out {
                Some(acc) => acc.hull(&y),
                None => y,
            });
        }
        out.ok_or_else(|| ProfileError::OutOfDomain(alpha.to_string()))
    }

    /// Smallest admissible neighbour count `⌈v·f(u/v)⌉` for a `u`-subset.
    pub fn required_neighbours(&self, u: u64, v: u64) -> Result<u64> {
        let alpha = BigRational::new(BigInt::from(u), BigInt::from(v));
        let scaled = self.eval_rational(&alpha)? * int(v as i64);
        let ceil = scaled.ceil().to_integer();
        Ok(u64::try_from(ceil).expect("non-negative profile value"))
    }

    pub fn max_slope(&self) -> &BigRational {
        self.segments.iter().map(|s| s.slope()).max().expect("non-empty")
    }

    pub fn check_structure(&self) -> StructureReport {
        let zero = BigRational::zero();
        let one = BigRational::one();
        let mut entries = Vec::new();

        let mut tiling = Vec::new();
        if self.segments[0].domain_lo != zero {
            tiling.push(format!("starts at {}", self.segments[0].domain_lo));
        }
        let last = &self.segments[self.segments.len() - 1];
        if last.domain_hi != one {
            tiling.push(format!("ends at {}", last.domain_hi));
        }
        for w in self.segments.windows(2) {
            if w[0].domain_hi != w[1].domain_lo {
                tiling.push(format!(
                    "gap or overlap between {} and {}",
                    w[0].domain_hi, w[1].domain_lo
                ));
            }
        }
        entries.push(StructureCheck::new(Property::Tiling, tiling));

        let mut cont = Vec::new();
        for w in self.segments.windows(2) {
            let x = &w[1].domain_lo;
            let (l, r) = (w[0].eval(x), w[1].eval(x));
            if l != r {
                cont.push(format!("at {x}: {l} != {r}"));
            }
        }
        entries.push(StructureCheck::new(Property::Continuity, cont));

        let at_zero = self.segments[0].eval(&self.segments[0].domain_lo);
        entries.push(StructureCheck::new(
            Property::Origin,
            (at_zero != zero)
                .then(|| format!("f(0) = {at_zero}"))
                .into_iter()
                .collect(),
        ));
        let at_one = last.eval(&last.domain_hi);
        entries.push(StructureCheck::new(
            Property::Endpoint,
            (at_one != one)
                .then(|| format!("f(1) = {at_one}"))
                .into_iter()
                .collect(),
        ));

        let mut sym = Vec::new();
        for s in &self.segments {
            match s.reflected() {
                Some(r) if self.segments.contains(&r) => {}
                Some(r) => sym.push(format!(
                    "reflection of {}·α + {} on [{}, {}] missing (expected {}·α + {} on [{}, {}])",
                    s.slope, s.offset, s.domain_lo, s.domain_hi, r.slope, r.offset, r.domain_lo, r.domain_hi
                )),
                None => sym.push(format!("flat segment on [{}, {}]", s.domain_lo, s.domain_hi)),
            }
        }
        entries.push(StructureCheck::new(Property::Symmetry, sym));

        let bound = int(i64::from(self.degree) - 1);
        let slopes = self
            .segments
            .iter()
            .filter(|s| s.slope >= bound)
            .map(|s| format!("slope {} ≥ {}", s.slope, bound))
            .collect();
        entries.push(StructureCheck::new(Property::SlopeBound, slopes));

        StructureReport {
            degree: self.degree,
            max_slope: self.max_slope().clone(),
            entries,
        }
    }

    /// One header line `d <degree>` followed by `lo hi slope offset` per segment.
    pub fn to_text(&self) -> String {
        let mut out = format!("d {}\n", self.degree);
        for s in &self.segments {
            out.push_str(&format!("{} {} {} {}\n", s.domain_lo, s.domain_hi, s.slope, s.offset));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut degree = None;
        let mut segments = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| ProfileError::Parse {
                line: i + 1,
                msg: msg.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if degree.is_none() {
                match fields.as_slice() {
                    ["d", d] => degree = Some(d.parse().map_err(|_| err("bad degree"))?),
                    _ => return Err(err("expected header `d <degree>`")),
                }
                continue;
            }
            let nums = fields
                .iter()
                .map(|f| parse_rational(f).ok_or_else(|| err("bad rational")))
                .collect::<Result<Vec<_>>>()?;
            match <[BigRational; 4]>::try_from(nums) {
                Ok([lo, hi, k, m]) => segments.push(AffineSegment::new(lo, hi, k, m)?),
                Err(_) => return Err(err("expected four fields")),
            }
        }
        let degree = degree.ok_or(ProfileError::Parse {
            line: 0,
            msg: "empty profile".into(),
        })?;
        Self::new(degree, segments)
    }
}

/// The expansion profile `f_d` for `d ∈ {5, 6, 7, 8}`.
pub fn builtin_profile(d: u32) -> Result<PiecewiseLinearProfile> {
    // (domain_hi, slope, offset); each leg starts where the previous one ends.
    let legs: Vec<(BigRational, BigRational, BigRational)> = match d {
        5 => vec![
            (rat(3, 20), int(2), int(0)),
            (rat(3, 10), rat(4, 3), rat(1, 10)),
            (rat(1, 2), int(1), rat(1, 5)),
            (rat(7, 10), rat(3, 4), rat(13, 40)),
            (int(1), rat(1, 2), rat(1, 2)),
        ],
        6 => vec![
            (rat(1, 10), rat(5, 2), int(0)),
            (rat(1, 4), rat(5, 3), rat(1, 12)),
            (rat(1, 2), int(1), rat(1, 4)),
            (rat(3, 4), rat(3, 5), rat(9, 20)),
            (int(1), rat(2, 5), rat(3, 5)),
        ],
        7 => vec![
            (rat(1, 10), int(3), int(0)),
            (rat(3, 20), int(2), rat(1, 10)),
            (rat(3, 10), rat(21, 15), rat(19, 100)),
            (rat(39, 100), int(1), rat(31, 100)),
            (rat(3, 5), rat(15, 21), rat(59, 140)),
            (rat(7, 10), rat(1, 2), rat(11, 20)),
            (int(1), rat(1, 3), rat(2, 3)),
        ],
        8 => vec![
            (rat(1, 10), int(3), int(0)),
            (rat(1, 5), int(2), rat(1, 10)),
            (rat(1, 3), rat(5, 4), rat(1, 4)),
            (rat(1, 2), rat(4, 5), rat(2, 5)),
            (rat(7, 10), rat(1, 2), rat(11, 20)),
            (int(1), rat(1, 3), rat(2, 3)),
        ],
        _ => return Err(ProfileError::UnsupportedDegree(d)),
    };
    let mut lo = BigRational::zero();
    let mut segments = Vec::with_capacity(legs.len());
    for (hi, slope, offset) in legs {
        segments.push(AffineSegment::new(lo, hi.clone(), slope, offset)?);
        lo = hi;
    }
    PiecewiseLinearProfile::new(d, segments)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    Tiling,
    Continuity,
    Origin,
    Endpoint,
    Symmetry,
    SlopeBound,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Property::Tiling => "tiling",
            Property::Continuity => "continuity",
            Property::Origin => "f(0)=0",
            Property::Endpoint => "f(1)=1",
            Property::Symmetry => "reflection symmetry",
            Property::SlopeBound => "slope < d-1",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone)]
pub struct StructureCheck {
    pub property: Property,
    pub failures: Vec<String>,
}

impl StructureCheck {
    fn new(property: Property, failures: Vec<String>) -> Self {
        Self { property, failures }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct StructureReport {
    pub degree: u32,
    pub max_slope: BigRational,
    pub entries: Vec<StructureCheck>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(StructureCheck::passed)
    }

    pub fn get(&self, property: Property) -> &StructureCheck {
        self.entries
            .iter()
            .find(|e| e.property == property)
            .expect("every property is checked")
    }
}

impl fmt::Display for StructureReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let status = if e.passed() { "pass" } else { "FAIL" };
            writeln!(f, "{status} {}", e.property)?;
            for msg in &e.failures {
                writeln!(f, "     {msg}")?;
            }
        }
        write!(f, "max slope {} (bound {})", self.max_slope, self.degree - 1)
    }
}
