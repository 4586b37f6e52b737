//! Certified upper bounds on the rate function `Q(α, β)` along profile
//! boundaries, the convexity-region certificate, and level-curve brackets.
//!
//! `Q` is evaluated in log space:
//!
//! ```text
//! ln Q = (d-1)·φ(1-α) + (d-1)·φ(β) - φ(α) - φ(1-β) - d·φ(β-α),   φ(x) = x ln x
//! ```
//!
//! with `φ(0) = 0`, which is the `0^0 = 1` convention for the power form.

use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::interval::{Interval, IntervalError};
use crate::profiles::{builtin_profile, AffineSegment, ProfileError};

/// Default split budget per boundary segment.
pub const DEFAULT_MAX_DEPTH: u32 = 60;

/// The bound every claim is checked against.
pub const CLAIM_BOUND: &str = "[0.9999]";

// Recursion above this depth runs sequentially; the upper levels are plenty
// to keep every worker busy.
const PARALLEL_DEPTH: u32 = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifierError {
    #[error("degree {0} is not supported here")]
    Degree(u32),
    #[error("argument outside the domain of Q: {0}")]
    Domain(String),
    #[error("bound {0} does not lie below 1")]
    Bound(Interval),
    #[error("margin-shrunk triangle is empty")]
    EmptyTriangle,
    #[error("point {0} lies outside the convexity triangle")]
    OutsideTriangle(String),
    #[error("need at least 2 samples, got {0}")]
    Samples(usize),
    #[error("no sign change of Q - 1 on (alpha, 1) for alpha = {0}")]
    NoSignChange(f64),
    #[error("Q - 1 changes sign more than once for alpha = {0}")]
    MultipleCrossings(f64),
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

pub type Result<T> = std::result::Result<T, VerifierError>;

/// The exponential rate `Q` of the union-bound term for degree `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QFunction {
    degree: u32,
}

impl QFunction {
    pub fn new(degree: u32) -> Result<Self> {
        if degree < 3 {
            return Err(VerifierError::Degree(degree));
        }
        Ok(Self { degree })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Enclosure of `Q` over `alpha × beta` restricted to `β ≥ α`.
    pub fn eval(&self, alpha: &Interval, beta: &Interval) -> Result<Interval> {
        let gap = beta.sub(alpha)?;
        self.eval_with_gap(alpha, beta, &gap)
    }

    /// As [`eval`](Self::eval) with a separately enclosed `β - α`, which is
    /// much tighter when `β` is an affine function of `α`.
    pub fn eval_with_gap(&self, alpha: &Interval, beta: &Interval, gap: &Interval) -> Result<Interval> {
        Ok(self.ln_eval_with_gap(alpha, beta, gap)?.exp()?)
    }

    pub fn ln_eval_with_gap(&self, alpha: &Interval, beta: &Interval, gap: &Interval) -> Result<Interval> {
        let one = Interval::point(1.0);
        let d = f64::from(self.degree);
        if gap.hi() < 0.0 {
            return Err(VerifierError::Domain(format!("beta {beta} below alpha {alpha}")));
        }
        // The exact gap is non-negative; rounding may push the enclosure below 0.
        let gap = Interval::new(gap.lo().max(0.0), gap.hi())?;
        let one_minus_alpha = one.sub(alpha)?;
        let one_minus_beta = one.sub(beta)?;
        for (name, x) in [
            ("alpha", alpha),
            ("beta", beta),
            ("1-alpha", &one_minus_alpha),
            ("1-beta", &one_minus_beta),
        ] {
            if x.lo() < 0.0 {
                return Err(VerifierError::Domain(format!("{name} = {x}")));
            }
        }
        let sum = one_minus_alpha
            .xlnx()?
            .add(&beta.xlnx()?)?
            .scale(d - 1.0)?
            .sub(&alpha.xlnx()?)?
            .sub(&one_minus_beta.xlnx()?)?
            .sub(&gap.xlnx()?.scale(d)?)?;
        Ok(sum)
    }

    /// The same quantity written with interval powers, term by term as a
    /// product of `x^(c·x)` factors. Independent of the log-space route.
    pub fn eval_power_form(&self, alpha: &Interval, beta: &Interval) -> Result<Interval> {
        let one = Interval::point(1.0);
        let d = Interval::point(f64::from(self.degree));
        let dm1 = d.sub(&one)?;
        let oma = one.sub(alpha)?;
        let omb = one.sub(beta)?;
        let raw_gap = beta.sub(alpha)?;
        if raw_gap.hi() < 0.0 {
            return Err(VerifierError::Domain(format!("beta {beta} below alpha {alpha}")));
        }
        let gap = Interval::new(raw_gap.lo().max(0.0), raw_gap.hi())?;
        let num = oma.pow(&dm1.mul(&oma)?)?.mul(&beta.pow(&dm1.mul(beta)?)?)?;
        let den = alpha.pow(alpha)?.mul(&omb.pow(&omb)?)?.mul(&gap.pow(&d.mul(&gap)?)?)?;
        Ok(num.div(&den)?)
    }
}

/// Enclosure of `Q(α, β)` for degree `d`.
pub fn q_eval(d: u32, alpha: &Interval, beta: &Interval) -> Result<Interval> {
    QFunction::new(d)?.eval(alpha, beta)
}

/// Plain floating-point `Q`, for plotting and sanity checks only.
pub fn q_scalar(d: u32, alpha: f64, beta: f64) -> f64 {
    let phi = |x: f64| if x == 0.0 { 0.0 } else { x * x.ln() };
    let d = f64::from(d);
    ((d - 1.0) * (phi(1.0 - alpha) + phi(beta)) - phi(alpha) - phi(1.0 - beta) - d * phi(beta - alpha)).exp()
}

/// One leg of a claim: `β = slope·α + offset` over `preimage`.
#[derive(Debug, Clone)]
pub struct BoundarySegment {
    exact: AffineSegment,
    preimage: Interval,
    slope: Interval,
    offset: Interval,
    gap_slope: Interval,
}

impl BoundarySegment {
    pub fn new(exact: AffineSegment) -> Result<Self> {
        let preimage = Interval::from_rationals(exact.domain_lo(), exact.domain_hi())?;
        let slope = Interval::from_rational(exact.slope())?;
        let offset = Interval::from_rational(exact.offset())?;
        let gap_slope = Interval::from_rational(&(exact.slope() - BigRational::one()))?;
        Ok(Self {
            exact,
            preimage,
            slope,
            offset,
            gap_slope,
        })
    }

    /// The same leg checked only over `preimage`, which may be a single point.
    pub fn restricted(&self, preimage: Interval) -> Result<Self> {
        let dom = Interval::from_rationals(self.exact.domain_lo(), self.exact.domain_hi())?;
        if !preimage.is_subset(&dom) {
            return Err(VerifierError::Domain(format!("{preimage} not within {dom}")));
        }
        Ok(Self {
            preimage,
            ..self.clone()
        })
    }

    pub fn exact(&self) -> &AffineSegment {
        &self.exact
    }

    pub fn preimage(&self) -> &Interval {
        &self.preimage
    }

    pub fn beta(&self, alpha: &Interval) -> Result<Interval> {
        Ok(self.slope.mul(alpha)?.add(&self.offset)?)
    }

    pub fn gap(&self, alpha: &Interval) -> Result<Interval> {
        Ok(self.gap_slope.mul(alpha)?.add(&self.offset)?)
    }
}

/// A logged subinterval and the upper end of its certified enclosure of `Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub subinterval: Interval,
    pub certified_sup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FailureReason {
    DepthExhausted,
    /// The subinterval cannot be split further in double precision.
    Unsplittable,
}

/// The leftmost subinterval on which certification gave up.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub segment: usize,
    pub subinterval: Interval,
    pub enclosure: std::result::Result<Interval, String>,
    pub reason: FailureReason,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let why = match self.reason {
            FailureReason::DepthExhausted => "depth budget exhausted",
            FailureReason::Unsplittable => "subinterval cannot be split",
        };
        write!(f, "segment {} subinterval {}: {why}; ", self.segment, self.subinterval)?;
        match &self.enclosure {
            Ok(e) => write!(f, "Q enclosure {e}"),
            Err(msg) => write!(f, "evaluation failed: {msg}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerificationTask {
    pub degree: u32,
    pub segments: Vec<BoundarySegment>,
    pub bound: Interval,
    pub max_depth: u32,
    /// Pre-split each preimage by bisection until no piece is wider than this.
    pub max_width: Option<f64>,
}

impl VerificationTask {
    pub fn new(degree: u32, segments: Vec<BoundarySegment>, bound: Interval) -> Result<Self> {
        QFunction::new(degree)?;
        Ok(Self {
            degree,
            segments,
            bound,
            max_depth: DEFAULT_MAX_DEPTH,
            max_width: None,
        })
    }

    /// The task of the claim for degree `d`: the first legs of `f_d` over
    /// `[1e-5, α_max]` with the last leg's formula carried up to `α_max`.
    pub fn claim(d: u32) -> Result<Self> {
        Self::claim_with_bound(d, Interval::parse_decimal(CLAIM_BOUND)?)
    }

    pub fn claim_with_bound(d: u32, bound: Interval) -> Result<Self> {
        if bound.lo() >= 1.0 {
            return Err(VerifierError::Bound(bound));
        }
        let legs = claim_legs(d)?;
        let segments = legs.into_iter().map(BoundarySegment::new).collect::<Result<Vec<_>>>()?;
        Self::new(d, segments, bound)
    }

    pub fn preimage(&self) -> Option<Interval> {
        self.segments.iter().map(|s| *s.preimage()).reduce(|a, b| a.hull(&b))
    }
}

/// Claim range `(legs, α_max)` per degree.
pub fn claim_range(d: u32) -> Result<(usize, BigRational)> {
    let r = |n: i64, m: i64| BigRational::new(BigInt::from(n), BigInt::from(m));
    match d {
        5 => Ok((3, r(1, 2))),
        6 => Ok((3, r(1, 2))),
        7 => Ok((4, r(39, 100))),
        8 => Ok((3, r(34, 100))),
        _ => Err(VerifierError::Degree(d)),
    }
}

/// Smallest α the claims cover.
pub fn claim_alpha_min() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(100_000))
}

/// Exact boundary legs checked for degree `d`.
pub fn claim_legs(d: u32) -> Result<Vec<AffineSegment>> {
    let (count, alpha_max) = claim_range(d)?;
    let profile = builtin_profile(d)?;
    let alpha_min = claim_alpha_min();
    let mut legs: Vec<AffineSegment> = profile.segments()[..count].to_vec();
    legs[0] = legs[0].with_domain(alpha_min, legs[0].domain_hi().clone())?;
    let last = legs.len() - 1;
    legs[last] = legs[last].with_domain(legs[last].domain_lo().clone(), alpha_max)?;
    Ok(legs)
}

/// Ordered verification log.
#[derive(Debug, Clone, Default)]
pub struct Transcript {
    pub records: Vec<Record>,
    pub failure: Option<Failure>,
}

impl Transcript {
    pub fn verified(&self) -> bool {
        self.failure.is_none()
    }

    pub fn count(&self) -> usize {
        self.records.len()
    }

    pub fn max_certified_sup(&self) -> Option<f64> {
        self.records.iter().map(|r| r.certified_sup).reduce(f64::max)
    }

    /// The `"[lo,hi]: sup"` log, one record per line.
    pub fn to_log(&self) -> String {
        self.to_string()
    }

    pub fn summary(&self) -> String {
        match (&self.failure, self.max_certified_sup()) {
            (None, Some(sup)) => format!("verified, {} subintervals, max certified sup {sup}", self.count()),
            (None, None) => "verified, empty task".into(),
            (Some(f), _) => format!("NOT verified after {} subintervals: {f}", self.count()),
        }
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.records {
            writeln!(f, "{}: {}", r.subinterval, r.certified_sup)?;
        }
        Ok(())
    }
}

struct Checker<'a> {
    q: QFunction,
    segment: &'a BoundarySegment,
    index: usize,
    bound: Interval,
    max_depth: u32,
    abort: &'a AtomicBool,
    parallel: bool,
}

enum Outcome {
    Done(Vec<Record>),
    Failed(Box<Failure>),
    Aborted,
}

impl Checker<'_> {
    fn enclose(&self, i: &Interval) -> Result<Interval> {
        let beta = self.segment.beta(i)?;
        let gap = self.segment.gap(i)?;
        self.q.eval_with_gap(i, &beta, &gap)
    }

    fn check(&self, i: Interval, depth: u32) -> Outcome {
        if self.abort.load(Ordering::Relaxed) {
            return Outcome::Aborted;
        }
        let enclosure = self.enclose(&i);
        if let Ok(e) = &enclosure {
            if e.clt(&self.bound) {
                return Outcome::Done(vec![Record {
                    subinterval: i,
                    certified_sup: e.hi(),
                }]);
            }
        }
        let fail = |reason| {
            self.abort.store(true, Ordering::Relaxed);
            Outcome::Failed(Box::new(Failure {
                segment: self.index,
                subinterval: i,
                enclosure: enclosure.clone().map_err(|e| e.to_string()),
                reason,
            }))
        };
        if depth >= self.max_depth {
            return fail(FailureReason::DepthExhausted);
        }
        let Some((left, right)) = i.bisect() else {
            return fail(FailureReason::Unsplittable);
        };
        if self.parallel && depth < PARALLEL_DEPTH {
            let (l, r) = rayon::join(|| self.check(left, depth + 1), || self.check(right, depth + 1));
            merge(l, r)
        } else {
            match self.check(left, depth + 1) {
                Outcome::Done(l) => merge(Outcome::Done(l), self.check(right, depth + 1)),
                other => other,
            }
        }
    }
}

fn merge(left: Outcome, right: Outcome) -> Outcome {
    match (left, right) {
        (Outcome::Done(mut l), Outcome::Done(r)) => {
            l.extend(r);
            Outcome::Done(l)
        }
        (Outcome::Failed(f), _) | (_, Outcome::Failed(f)) => Outcome::Failed(f),
        _ => Outcome::Aborted,
    }
}

fn initial_pieces(preimage: Interval, max_width: Option<f64>) -> Vec<Interval> {
    let Some(w) = max_width else {
        return vec![preimage];
    };
    let mut out = vec![preimage];
    while out.iter().any(|p| p.width() > w) {
        out = out
            .into_iter()
            .flat_map(|p| match p.bisect() {
                Some((l, r)) if p.width() > w => vec![l, r],
                _ => vec![p],
            })
            .collect();
    }
    out
}

fn run_segment(
    task: &VerificationTask,
    index: usize,
    parallel: bool,
) -> std::result::Result<Vec<Record>, Option<Failure>> {
    let abort = AtomicBool::new(false);
    let checker = Checker {
        q: QFunction { degree: task.degree },
        segment: &task.segments[index],
        index,
        bound: task.bound,
        max_depth: task.max_depth,
        abort: &abort,
        parallel,
    };
    let mut records = Vec::new();
    for piece in initial_pieces(*task.segments[index].preimage(), task.max_width) {
        match checker.check(piece, 0) {
            Outcome::Done(r) => records.extend(r),
            Outcome::Failed(f) => return Err(Some(*f)),
            Outcome::Aborted => return Err(None),
        }
    }
    Ok(records)
}

/// Certifies one segment by recursive bisection. Returns the records in
/// left-to-right order, or the leftmost failing subinterval.
pub fn check_segment(task: &VerificationTask, index: usize) -> std::result::Result<Vec<Record>, Failure> {
    match run_segment(task, index, true) {
        Ok(records) => Ok(records),
        // A parallel failure may be any failing branch; redo it sequentially
        // so the reported subinterval is always the leftmost one.
        Err(_) => match run_segment(task, index, false) {
            Err(Some(f)) => Err(f),
            Ok(_) | Err(None) => unreachable!("sequential rerun disagrees with parallel run"),
        },
    }
}

/// Runs every segment of the task; stops at the first failing segment.
pub fn verify_task(task: &VerificationTask) -> Transcript {
    let mut transcript = Transcript::default();
    for index in 0..task.segments.len() {
        match check_segment(task, index) {
            Ok(records) => transcript.records.extend(records),
            Err(f) => {
                transcript.failure = Some(f);
                break;
            }
        }
    }
    transcript
}

pub fn verify_claim(d: u32) -> Result<Transcript> {
    Ok(verify_task(&VerificationTask::claim(d)?))
}

// ---------------------------------------------------------------------------
// Convexity region

/// The second-derivative numerator `(d-2)(1-x²-y²) - d·y·(1+x²-y²)`.
pub fn convexity_expression(d: u32, x: &Interval, y: &Interval) -> Result<Interval> {
    let one = Interval::point(1.0);
    let df = f64::from(d);
    let x2 = x.sqr()?;
    let y2 = y.sqr()?;
    let first = one.sub(&x2)?.sub(&y2)?.scale(df - 2.0)?;
    let second = y.mul(&one.add(&x2)?.sub(&y2)?)?.scale(df)?;
    Ok(first.sub(&second)?)
}

/// Exact value of the convexity expression at a point of the (unshrunk) triangle.
pub fn convexity_expression_at(d: u32, x: &BigRational, y: &BigRational) -> Result<BigRational> {
    if !(5..=8).contains(&d) {
        return Err(VerifierError::Degree(d));
    }
    let zero = BigRational::zero();
    if !in_triangle(d, &zero, x, y) {
        return Err(VerifierError::OutsideTriangle(format!("({x}, {y})")));
    }
    let one = BigRational::one();
    let df = BigRational::from_integer(BigInt::from(d));
    let two = BigRational::from_integer(BigInt::from(2));
    let x2 = x * x;
    let y2 = y * y;
    Ok((&df - &two) * (&one - &x2 - &y2) - &df * y * (&one + &x2 - &y2))
}

/// `0 ≤ y ≤ 1 - 2/d - margin` and `|x| ≤ (d(1-y)-2)/(d-2) - margin`.
pub fn in_triangle(d: u32, margin: &BigRational, x: &BigRational, y: &BigRational) -> bool {
    let one = BigRational::one();
    let df = BigRational::from_integer(BigInt::from(d));
    let two = BigRational::from_integer(BigInt::from(2));
    let y_max = &one - &two / &df - margin;
    if y < &BigRational::zero() || y > &y_max {
        return false;
    }
    let x_max = (&df * (&one - y) - &two) / (&df - &two) - margin;
    let ax = if x < &BigRational::zero() { -x } else { x.clone() };
    ax <= x_max
}

#[derive(Debug, Clone)]
pub struct ConvexityReport {
    pub degree: u32,
    pub margin: BigRational,
    /// Boxes on which the expression was certified non-negative.
    pub boxes: usize,
    /// Smallest certified lower bound over all boxes.
    pub min_lower_bound: f64,
    pub max_depth_used: u32,
    pub failure: Option<(Interval, Interval)>,
}

impl ConvexityReport {
    pub fn certified(&self) -> bool {
        self.failure.is_none()
    }
}

impl fmt::Display for ConvexityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.failure {
            None => write!(
                f,
                "d={}: certified on {} boxes (depth {}), min lower bound {:e}",
                self.degree, self.boxes, self.max_depth_used, self.min_lower_bound
            ),
            Some((x, y)) => write!(f, "d={}: NOT certified on box x={x} y={y}", self.degree),
        }
    }
}

struct BoxStats {
    boxes: usize,
    min_lower: f64,
    depth: u32,
}

struct ConvexityChecker<'a> {
    d: u32,
    margin: Interval,
    y_max: Interval,
    max_depth: u32,
    abort: &'a AtomicBool,
}

impl ConvexityChecker<'_> {
    fn x_max(&self, y: f64) -> Result<Interval> {
        let df = f64::from(self.d);
        let y = Interval::point(y);
        let num = Interval::point(1.0).sub(&y)?.scale(df)?.sub(&Interval::point(2.0))?;
        Ok(num.div(&Interval::point(df - 2.0))?.sub(&self.margin)?)
    }

    fn check(
        &self,
        x: Interval,
        y: Interval,
        depth: u32,
    ) -> std::result::Result<BoxStats, Option<(Interval, Interval)>> {
        if self.abort.load(Ordering::Relaxed) {
            return Err(None);
        }
        let empty = Ok(BoxStats {
            boxes: 0,
            min_lower: f64::INFINITY,
            depth,
        });
        // Clip to a superset of the part of the box inside the triangle.
        if y.lo() > self.y_max.hi() {
            return empty;
        }
        let y_c = Interval::new(y.lo(), y.hi().min(self.y_max.hi())).map_err(|_| Some((x, y)))?;
        let xm = self.x_max(y_c.lo()).map_err(|_| Some((x, y)))?.hi();
        if xm < 0.0 || x.lo() > xm || x.hi() < -xm {
            return empty;
        }
        let x_c = Interval::new(x.lo().max(-xm), x.hi().min(xm)).map_err(|_| Some((x, y)))?;
        if let Ok(e) = convexity_expression(self.d, &x_c, &y_c) {
            if e.lo() >= 0.0 {
                return Ok(BoxStats {
                    boxes: 1,
                    min_lower: e.lo(),
                    depth,
                });
            }
        }
        let fail = || {
            self.abort.store(true, Ordering::Relaxed);
            Err(Some((x_c, y_c)))
        };
        if depth >= self.max_depth {
            return fail();
        }
        let (Some((xl, xr)), Some((yl, yr))) = (x_c.bisect(), y_c.bisect()) else {
            return fail();
        };
        let quads = [(xl, yl), (xr, yl), (xl, yr), (xr, yr)];
        let run = |(bx, by): (Interval, Interval)| self.check(bx, by, depth + 1);
        let results: Vec<_> = if depth < PARALLEL_DEPTH / 2 {
            use rayon::prelude::*;
            quads.into_par_iter().map(run).collect()
        } else {
            let mut out = Vec::with_capacity(4);
            for q in quads {
                let r = run(q);
                let failed = r.is_err();
                out.push(r);
                if failed {
                    break;
                }
            }
            out
        };
        let mut acc = BoxStats {
            boxes: 0,
            min_lower: f64::INFINITY,
            depth,
        };
        let mut aborted = false;
        for r in results {
            match r {
                Ok(s) => {
                    acc.boxes += s.boxes;
                    acc.min_lower = acc.min_lower.min(s.min_lower);
                    acc.depth = acc.depth.max(s.depth);
                }
                Err(Some(b)) => return Err(Some(b)),
                Err(None) => aborted = true,
            }
        }
        if aborted {
            Err(None)
        } else {
            Ok(acc)
        }
    }
}

/// Certifies `(d-2)(1-x²-y²) ≥ d·y·(1+x²-y²)` on the triangle shrunk by `margin`.
pub fn convexity_check(d: u32, margin: &BigRational, max_depth: u32) -> Result<ConvexityReport> {
    if !(5..=8).contains(&d) {
        return Err(VerifierError::Degree(d));
    }
    if margin <= &BigRational::zero() {
        return Err(VerifierError::Domain(format!("margin {margin} must be positive")));
    }
    let one = BigRational::one();
    let df = BigRational::from_integer(BigInt::from(d));
    let two = BigRational::from_integer(BigInt::from(2));
    let y_max = &one - &two / &df - margin;
    let x_max0 = &one - margin;
    if y_max < BigRational::zero() || x_max0 <= BigRational::zero() {
        return Err(VerifierError::EmptyTriangle);
    }
    let abort = AtomicBool::new(false);
    let checker = ConvexityChecker {
        d,
        margin: Interval::from_rational(margin)?,
        y_max: Interval::from_rational(&y_max)?,
        max_depth,
        abort: &abort,
    };
    let x = Interval::new(-1.0, 1.0)?;
    let y = Interval::new(0.0, checker.y_max.hi())?;
    let outcome = checker.check(x, y, 0);
    let mut report = ConvexityReport {
        degree: d,
        margin: margin.clone(),
        boxes: 0,
        min_lower_bound: f64::INFINITY,
        max_depth_used: 0,
        failure: None,
    };
    match outcome {
        Ok(s) => {
            report.boxes = s.boxes;
            report.min_lower_bound = s.min_lower;
            report.max_depth_used = s.depth;
        }
        Err(Some(b)) => report.failure = Some(b),
        Err(None) => unreachable!("abort without a failing box"),
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Level curve Q = 1

/// `alpha` and a bracket `beta` on which `Q(alpha, ·) - 1` certifiably changes sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelPoint {
    pub alpha: Interval,
    pub beta: Interval,
}

const LEVEL_SCAN: usize = 64;
const LEVEL_BETA_MAX: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Below,
    Above,
    Unknown,
}

fn side(q: &QFunction, alpha: &Interval, beta: f64) -> Side {
    let one = Interval::point(1.0);
    match q.eval(alpha, &Interval::point(beta)) {
        Ok(e) if e.clt(&one) => Side::Below,
        Ok(e) if one.clt(&e) => Side::Above,
        _ => Side::Unknown,
    }
}

/// Brackets the `β > α` solving `Q(α, β) = 1`.
pub fn level_point(d: u32, alpha: f64) -> Result<LevelPoint> {
    let q = QFunction::new(d)?;
    if !(alpha > 0.0 && alpha < LEVEL_BETA_MAX) {
        return Err(VerifierError::Domain(format!("alpha = {alpha}")));
    }
    let a = Interval::point(alpha);
    let grid: Vec<f64> = (0..=LEVEL_SCAN)
        .map(|j| alpha + (LEVEL_BETA_MAX - alpha) * j as f64 / LEVEL_SCAN as f64)
        .collect();
    let sides: Vec<Side> = grid.iter().map(|&b| side(&q, &a, b)).collect();
    let known: Vec<(f64, Side)> = grid
        .iter()
        .zip(&sides)
        .filter(|(_, s)| **s != Side::Unknown)
        .map(|(b, s)| (*b, *s))
        .collect();
    let changes: Vec<usize> = known
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].1 != w[1].1)
        .map(|(i, _)| i)
        .collect();
    let i = match changes.as_slice() {
        [] => return Err(VerifierError::NoSignChange(alpha)),
        [i] if known[*i].1 == Side::Below => *i,
        _ => return Err(VerifierError::MultipleCrossings(alpha)),
    };
    let (mut lo, mut hi) = (known[i].0, known[i + 1].0);
    loop {
        let bracket = Interval::new(lo, hi)?;
        let Some((left, _)) = bracket.bisect() else {
            break;
        };
        let m = left.hi();
        match side(&q, &a, m) {
            Side::Below => lo = m,
            Side::Above => hi = m,
            Side::Unknown => break,
        }
    }
    Ok(LevelPoint {
        alpha: a,
        beta: Interval::new(lo, hi)?,
    })
}

/// `samples` equally spaced interior α values, `i/(samples+1)`.
pub fn level_curve(d: u32, samples: usize) -> Result<Vec<LevelPoint>> {
    if samples < 2 {
        return Err(VerifierError::Samples(samples));
    }
    use rayon::prelude::*;
    (1..=samples)
        .into_par_iter()
        .map(|i| level_point(d, i as f64 / (samples + 1) as f64))
        .collect()
}

pub fn level_curve_csv(points: &[LevelPoint]) -> String {
    let mut out = String::from("alpha_lo,alpha_hi,beta_lo,beta_hi\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.alpha.lo(),
            p.alpha.hi(),
            p.beta.lo(),
            p.beta.hi()
        ));
    }
    out
}
