//! Exact big-rational evaluation of the union-bound terms
//!
//! ```text
//! P(u, n) = C(v,u) · C(v,n) · C(dn,du) / C(dv,du)
//! ```
//!
//! and the checks built on it: monotonicity in `n`, the induction near the
//! corners of the region, the exhaustive union bound at small `v`, and the
//! gap between `(1/v)·ln(v²P)` and `ln Q`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::interval::ln_rational;
use crate::profiles::{PiecewiseLinearProfile, ProfileError};
use crate::verifier::q_scalar;

/// Largest `v` accepted by [`union_bound_exhaustive`].
pub const EXHAUSTIVE_MAX_V: u64 = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExactError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("v = {v} leaves no u with 1 <= u <= delta*v")]
    EmptyRange { v: u64 },
    #[error("v = {v} exceeds the enumeration budget ({max})")]
    EnumerationBudget { v: u64, max: u64 },
    #[error("({k}, {d}) is not one of the lemma cases")]
    LemmaCase { k: u32, d: u32 },
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

pub type Result<T> = std::result::Result<T, ExactError>;

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn rat_int(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `C(n, k)`, zero for `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc = acc * big(n - k + i) / big(i);
    }
    acc
}

/// `∏_{i=0}^{len-1} (top - i)`.
fn falling(top: u64, len: u64) -> BigUint {
    (0..len).fold(BigUint::one(), |acc, i| acc * big(top - i))
}

/// `C(dn,du) / C(dv,du)`: probability that a fixed `u`-set has all its
/// neighbours inside a fixed `n`-set.
pub fn containment_probability(u: u64, n: u64, v: u64, d: u64) -> Result<BigRational> {
    if !(u <= n && n <= v) || d == 0 {
        return Err(ExactError::Precondition(format!(
            "need 0 <= u <= n <= v and d >= 1, got u={u} n={n} v={v} d={d}"
        )));
    }
    // C(dn,du)/C(dv,du) = ∏_{i<du} (dn-i)/(dv-i)
    let du = d * u;
    Ok(ratio(falling(d * n, du), falling(d * v, du)))
}

/// `P(u, n)` for degree `d` on `2v` nodes.
pub fn p_value(u: u64, n: u64, v: u64, d: u64) -> Result<BigRational> {
    let contain = containment_probability(u, n, v, d)?;
    let sets = BigInt::from(binomial(v, u) * binomial(v, n));
    Ok(contain * BigRational::from_integer(sets))
}

/// `P(u, n+1) / P(u, n)` via `(v-n)/(n+1) · ∏_{i=1}^{d} (dn+i)/(dn-du+i)`.
pub fn monotone_in_n(u: u64, n: u64, v: u64, d: u64) -> Result<BigRational> {
    if !(1 <= u && u <= n && n < v) || d == 0 {
        return Err(ExactError::Precondition(format!(
            "need 1 <= u <= n < v and d >= 1, got u={u} n={n} v={v} d={d}"
        )));
    }
    let (dn, du) = (d * n, d * u);
    let mut num = big(v - n);
    let mut den = big(n + 1);
    for i in 1..=d {
        num *= big(dn + i);
        den *= big(dn - du + i);
    }
    Ok(ratio(num, den))
}

/// `δ = 10⁻⁵`.
pub fn default_delta() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(100_000))
}

/// One of the `(k, d)` pairs of the corner induction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LemmaCase {
    k: u32,
    d: u32,
}

impl LemmaCase {
    pub const ALL: [LemmaCase; 4] = [
        LemmaCase { k: 2, d: 5 },
        LemmaCase { k: 3, d: 6 },
        LemmaCase { k: 3, d: 7 },
        LemmaCase { k: 3, d: 8 },
    ];

    pub fn new(k: u32, d: u32) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.k == k && c.d == d)
            .ok_or(ExactError::LemmaCase { k, d })
    }

    pub fn for_degree(d: u32) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.d == d)
            .ok_or(ExactError::LemmaCase { k: 0, d })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// `δ^{-(d-k-1)} · (1 - (kd+3d)δ) · (k-1)^{(k-1)d} / k^{kd}`, the hand
    /// lower bound on the induction ratio.
    pub fn ratio_estimate(&self, delta: &BigRational) -> BigRational {
        let (k, d) = (i64::from(self.k), i64::from(self.d));
        let inv_delta = delta.recip();
        let power = num_traits::pow(inv_delta, (d - k - 1) as usize);
        let factor = BigRational::one() - BigRational::from_integer(BigInt::from(k * d + 3 * d)) * delta;
        let km1 = num_traits::pow(BigInt::from(k - 1), ((k - 1) * d) as usize);
        let kk = num_traits::pow(BigInt::from(k), (k * d) as usize);
        power * factor * BigRational::new(km1, kk)
    }
}

impl fmt::Display for LemmaCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(k={}, d={})", self.k, self.d)
    }
}

#[derive(Debug, Clone)]
pub struct LemmaRow {
    pub u: u64,
    /// `2k·δ²v²·P(u, ku)`.
    pub scaled_p: BigRational,
    pub bound_holds: bool,
    /// `P(u, ku) / P(u+1, ku+k)`, for `u < ⌊δv⌋`.
    pub step_ratio: Option<BigRational>,
    pub step_holds: bool,
    pub dominates_estimate: bool,
}

#[derive(Debug, Clone)]
pub struct MonotoneRow {
    pub u: u64,
    pub n: u64,
    pub ratio: BigRational,
    pub agrees_with_quotient: bool,
}

#[derive(Debug, Clone)]
pub struct LemmaReport {
    pub case: LemmaCase,
    pub v: u64,
    pub rows: Vec<LemmaRow>,
    pub monotone: Vec<MonotoneRow>,
}

impl LemmaReport {
    pub fn bound_holds(&self) -> bool {
        self.rows.iter().all(|r| r.bound_holds)
    }

    pub fn induction_holds(&self) -> bool {
        self.rows.iter().all(|r| r.step_holds)
    }

    pub fn monotone_holds(&self) -> bool {
        let one = BigRational::one();
        self.monotone.iter().all(|m| m.ratio > one && m.agrees_with_quotient)
    }

    pub fn estimate_dominated(&self) -> bool {
        self.rows.iter().all(|r| r.dominates_estimate)
    }

    pub fn passed(&self) -> bool {
        self.bound_holds() && self.induction_holds() && self.monotone_holds()
    }

    /// Plain-text `(u, n, value)` table.
    pub fn to_table(&self) -> String {
        let mut out = format!("# case {} v={}\n# quantity u n value\n", self.case, self.v);
        let k = u64::from(self.case.k);
        for r in &self.rows {
            out.push_str(&format!("bound {} {} {:e}\n", r.u, k * r.u, approx(&r.scaled_p)));
            if let Some(s) = &r.step_ratio {
                out.push_str(&format!("step {} {} {:e}\n", r.u, k * r.u, approx(s)));
            }
        }
        for m in &self.monotone {
            out.push_str(&format!("monotone {} {} {:e}\n", m.u, m.n, approx(&m.ratio)));
        }
        out
    }
}

/// Floating-point approximation of a rational far outside the `f64` range.
pub fn approx(r: &BigRational) -> f64 {
    match r.to_f64() {
        Some(x) if x.is_finite() && x != 0.0 => x,
        _ if r.is_zero() => 0.0,
        _ => ln_rational(r).map_or(f64::NAN, f64::exp),
    }
}

/// Exact corner induction for `u = 1..⌊δv⌋`: the bound `2kδ²v²P(u,ku) < 1/2`,
/// the step `P(u,ku)/P(u+1,ku+k) > 1`, and `P(u,n+1)/P(u,n) > 1` for `u ≤ n < ku`.
pub fn extreme_lemma_check(case: LemmaCase, v: u64, delta: &BigRational) -> Result<LemmaReport> {
    let u_max = (delta * rat_int(v)).floor().to_integer().to_u64().unwrap_or(0);
    if u_max == 0 {
        return Err(ExactError::EmptyRange { v });
    }
    let k = u64::from(case.k);
    let d = u64::from(case.d);
    if k * (u_max + 1) > v {
        return Err(ExactError::Precondition(format!("v = {v} too small for k = {k}")));
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let one = BigRational::one();
    let estimate = case.ratio_estimate(delta);
    let scale = rat_int(2 * k) * delta * delta * rat_int(v) * rat_int(v);

    let rows = (1..=u_max)
        .into_par_iter()
        .map(|u| -> Result<LemmaRow> {
            let p = p_value(u, k * u, v, d)?;
            let scaled_p = &scale * &p;
            let step_ratio = if u < u_max {
                Some(&p / p_value(u + 1, k * u + k, v, d)?)
            } else {
                None
            };
            let step_holds = step_ratio.as_ref().is_none_or(|r| r > &one);
            let dominates_estimate = step_ratio.as_ref().is_none_or(|r| r > &estimate);
            Ok(LemmaRow {
                u,
                bound_holds: scaled_p < half,
                scaled_p,
                step_ratio,
                step_holds,
                dominates_estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let lattice: Vec<(u64, u64)> = (1..=u_max).flat_map(|u| (u..k * u).map(move |n| (u, n))).collect();
    let monotone = lattice
        .into_par_iter()
        .map(|(u, n)| -> Result<MonotoneRow> {
            let ratio = monotone_in_n(u, n, v, d)?;
            let direct = p_value(u, n + 1, v, d)? / p_value(u, n, v, d)?;
            Ok(MonotoneRow {
                u,
                n,
                agrees_with_quotient: direct == ratio,
                ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(LemmaReport {
        case,
        v,
        rows,
        monotone,
    })
}

/// The bad region `Ω` on the integer lattice, split at distance `δv` from the corners.
#[derive(Debug, Clone)]
pub struct RegionSpec {
    pub v: u64,
    pub d: u64,
    pub profile: PiecewiseLinearProfile,
    pub delta: BigRational,
}

impl RegionSpec {
    pub fn new(v: u64, profile: PiecewiseLinearProfile) -> Self {
        Self {
            v,
            d: u64::from(profile.degree()),
            profile,
            delta: default_delta(),
        }
    }

    pub fn with_delta(mut self, delta: BigRational) -> Self {
        self.delta = delta;
        self
    }

    /// Largest `n` with `n < v·f(u/v)`: a `u`-set whose neighbours fit into
    /// an `n`-set violates the profile.
    pub fn n_max(&self, u: u64) -> Result<Option<u64>> {
        let required = self.profile.required_neighbours(u, self.v)?;
        Ok(required.checked_sub(1).map(|n| n.min(self.v)))
    }

    /// All `(u, n)` with `1 ≤ u ≤ n < v·f(u/v)`, ordered by `u` then `n`.
    pub fn omega(&self) -> Result<Vec<(u64, u64)>> {
        let mut out = Vec::new();
        for u in 1..=self.v {
            if let Some(top) = self.n_max(u)? {
                out.extend((u..=top).map(|n| (u, n)));
            }
        }
        Ok(out)
    }

    /// `min(u, v - n) ≤ δv`.
    pub fn is_extreme(&self, u: u64, n: u64) -> bool {
        let dv = &self.delta * rat_int(self.v);
        rat_int(u.min(self.v - n)) <= dv
    }

    /// `(|Ω_δ|, |Ω′|)`.
    pub fn split_sizes(&self) -> Result<(usize, usize)> {
        let omega = self.omega()?;
        let extreme = omega.iter().filter(|(u, n)| self.is_extreme(*u, *n)).count();
        Ok((extreme, omega.len() - extreme))
    }
}

/// `2·δv·v·f(δ)·max_extreme + v²·max_interior` given certified maxima of `P`.
pub fn union_bound(
    spec: &RegionSpec,
    max_p_extreme: &BigRational,
    max_p_interior: &BigRational,
) -> Result<BigRational> {
    let v = rat_int(spec.v);
    let f_delta = spec.profile.eval_rational(&spec.delta)?;
    let extreme = rat_int(2) * &spec.delta * &v * &v * f_delta * max_p_extreme;
    let interior = &v * &v * max_p_interior;
    Ok(extreme + interior)
}

/// `2·Σ_{(u,n)∈Ω} P(u,n)`, exactly.
pub fn union_bound_exhaustive(spec: &RegionSpec) -> Result<BigRational> {
    let (v, d) = (spec.v, spec.d);
    if v > EXHAUSTIVE_MAX_V {
        return Err(ExactError::EnumerationBudget {
            v,
            max: EXHAUSTIVE_MAX_V,
        });
    }
    if v == 0 {
        return Ok(BigRational::zero());
    }
    let row_v: Vec<BigUint> = binomial_row(v);
    // C(dv, du) for u = 0..=v.
    let mut row_dv = Vec::with_capacity(v as usize + 1);
    let mut c = BigUint::one();
    for j in 0..=d * v {
        if j % d == 0 {
            row_dv.push(c.clone());
        }
        c = c * big(d * v - j) / big(j + 1);
    }
    let ranges: Vec<(u64, u64)> = (1..=v)
        .filter_map(|u| spec.n_max(u).map(|top| top.map(|t| (u, t))).transpose())
        .collect::<Result<Vec<_>>>()?;
    let terms: Vec<BigRational> = ranges
        .into_par_iter()
        .filter(|(u, top)| u <= top)
        .map(|(u, top)| {
            // Σ_n C(v,n)·C(dn,du), stepping C(dn,du) → C(dn+d,du).
            let du = d * u;
            let mut c_dn = BigUint::one();
            let mut sum = BigUint::zero();
            for n in u..=top {
                sum += &row_v[n as usize] * &c_dn;
                let dn = d * n;
                let mut num = BigUint::one();
                let mut den = BigUint::one();
                for i in 1..=d {
                    num *= big(dn + i);
                    den *= big(dn + i - du);
                }
                c_dn = c_dn * num / den;
            }
            ratio(big(2) * &row_v[u as usize] * sum, row_dv[u as usize].clone())
        })
        .collect();
    Ok(terms.into_iter().fold(BigRational::zero(), |acc, t| acc + t))
}

fn binomial_row(n: u64) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigUint::one();
    for k in 0..=n {
        row.push(c.clone());
        c = c * big(n - k) / big(k + 1);
    }
    row
}

/// CSV rows `u,n,region,ln_p` over `Ω`.
pub fn omega_csv(spec: &RegionSpec) -> Result<String> {
    let mut out = String::from("u,n,region,ln_p\n");
    for (u, n) in spec.omega()? {
        let p = p_value(u, n, spec.v, spec.d)?;
        let region = if spec.is_extreme(u, n) { "extreme" } else { "interior" };
        let ln_p = ln_rational(&p).unwrap_or(f64::NEG_INFINITY);
        out.push_str(&format!("{u},{n},{region},{ln_p}\n"));
    }
    Ok(out)
}

/// `(1/v)·ln(v²·P(u,n)) - ln Q(u/v, n/v)`.
///
/// `ln P` is taken from the exact rational by splitting off powers of two, so
/// the result is accurate to roughly `1e-13`, far below the `ln(v)/v` scale
/// of the gap itself.
pub fn stirling_gap(u: u64, n: u64, v: u64, d: u64) -> Result<f64> {
    if !(0 < u && u <= n && n < v) {
        return Err(ExactError::Precondition(format!(
            "need 0 < u <= n < v, got u={u} n={n} v={v}"
        )));
    }
    let p = p_value(u, n, v, d)?;
    let ln_p = ln_rational(&p).expect("P > 0 inside the region");
    let vf = v as f64;
    let lhs = (2.0 * vf.ln() + ln_p) / vf;
    let ln_q = q_scalar(d as u32, u as f64 / vf, n as f64 / vf).ln();
    Ok(lhs - ln_q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::builtin_profile;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), big(10));
        assert_eq!(binomial(20, 5), big(15504));
        assert_eq!(binomial(7, 0), big(1));
        assert_eq!(binomial(3, 5), big(0));
        assert_eq!(binomial_row(6), [1u64, 6, 15, 20, 15, 6, 1].map(big).to_vec());
    }

    #[test]
    fn p_values() {
        // u = 0: only the set counts survive.
        assert_eq!(p_value(0, 3, 7, 5).unwrap(), q(35, 1));
        // 4·4·C(5,5)/C(20,5) = 16/15504.
        assert_eq!(p_value(1, 1, 4, 5).unwrap(), q(1, 969));
        assert_eq!(p_value(6, 6, 6, 3).unwrap(), q(1, 1));
        assert_eq!(containment_probability(1, 2, 6, 5).unwrap(), q(252, 142_506));
        assert!(p_value(3, 2, 7, 5).is_err());
        assert!(p_value(1, 8, 7, 5).is_err());
    }

    #[test]
    fn monotone_matches_quotient() {
        let r = monotone_in_n(1, 1, 100, 5).unwrap();
        assert!(r > BigRational::one());
        assert_eq!(r, p_value(1, 2, 100, 5).unwrap() / p_value(1, 1, 100, 5).unwrap());
        let r = monotone_in_n(2, 50, 100, 6).unwrap();
        assert_eq!(r, p_value(2, 51, 100, 6).unwrap() / p_value(2, 50, 100, 6).unwrap());
        assert!(monotone_in_n(0, 1, 100, 5).is_err());
        assert!(monotone_in_n(1, 100, 100, 5).is_err());
    }

    #[test]
    fn lemma_base_case_d5() {
        let report = extreme_lemma_check(LemmaCase::new(2, 5).unwrap(), 100_000, &default_delta()).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert!(report.passed());
        // 4·10⁻¹⁰·10¹⁰·P(1,2) with P(1,2) ≈ 4.84e-10.
        let x = approx(&report.rows[0].scaled_p);
        assert!((1.9e-9..2.0e-9).contains(&x), "{x}");
    }

    #[test]
    fn lemma_two_steps_d8() {
        let report = extreme_lemma_check(LemmaCase::new(3, 8).unwrap(), 200_000, &default_delta()).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert!(report.passed());
        let step = report.rows[0].step_ratio.as_ref().unwrap();
        assert_eq!(
            step,
            &(p_value(1, 3, 200_000, 8).unwrap() / p_value(2, 6, 200_000, 8).unwrap())
        );
        assert!(report.estimate_dominated());
    }

    #[test]
    fn lemma_base_case_d6_beats_coarse_bound() {
        let v = 100_000u64;
        let report = extreme_lemma_check(LemmaCase::new(3, 6).unwrap(), v, &default_delta()).unwrap();
        // 10⁻¹⁰ · 3⁷ · (v/(v-1))^6
        let coarse = q(2187, 10_000_000_000) * num_traits::pow(q(v as i64, v as i64 - 1), 6);
        assert!(report.rows[0].scaled_p < coarse);
        assert!(coarse < q(1, 2));
    }

    #[test]
    fn lemma_errors() {
        assert!(LemmaCase::new(2, 6).is_err());
        assert!(matches!(
            extreme_lemma_check(LemmaCase::new(2, 5).unwrap(), 99_999, &default_delta()),
            Err(ExactError::EmptyRange { .. })
        ));
    }

    #[test]
    fn union_bound_edges() {
        let spec = RegionSpec::new(0, builtin_profile(5).unwrap());
        assert_eq!(union_bound_exhaustive(&spec).unwrap(), BigRational::zero());
        let spec = RegionSpec::new(EXHAUSTIVE_MAX_V + 1, builtin_profile(5).unwrap());
        assert!(union_bound_exhaustive(&spec).is_err());
    }

    #[test]
    fn union_bound_matches_direct_sum() {
        for d in 5..=8 {
            let spec = RegionSpec::new(17, builtin_profile(d).unwrap());
            let direct = spec
                .omega()
                .unwrap()
                .into_iter()
                .map(|(u, n)| p_value(u, n, spec.v, spec.d).unwrap())
                .fold(BigRational::zero(), |a, b| a + b)
                * q(2, 1);
            assert_eq!(union_bound_exhaustive(&spec).unwrap(), direct);
        }
    }

    #[test]
    fn union_bound_reflection_invariant() {
        for d in 5..=8 {
            let spec = RegionSpec::new(24, builtin_profile(d).unwrap());
            let v = spec.v;
            let omega = spec.omega().unwrap();
            let mut reflected: Vec<(u64, u64)> = omega.iter().map(|&(u, n)| (v - n, v - u)).collect();
            reflected.sort();
            assert_eq!(reflected, omega, "d={d}");
            let sum = |pts: &[(u64, u64)]| {
                pts.iter()
                    .map(|&(u, n)| p_value(u, n, v, spec.d).unwrap())
                    .fold(BigRational::zero(), |a, b| a + b)
            };
            let direct: Vec<_> = omega.iter().map(|&(u, n)| (v - n, v - u)).collect();
            assert_eq!(sum(&omega), sum(&direct));
        }
    }

    #[test]
    fn union_bound_at_v10_d5_is_recorded() {
        let spec = RegionSpec::new(10, builtin_profile(5).unwrap());
        let b = approx(&union_bound_exhaustive(&spec).unwrap());
        // Independent evaluation: 0.0074371127953664...
        assert!((b - 0.007_437_112_795_366_411).abs() < 1e-15, "{b}");
    }

    #[test]
    fn parametric_union_bound() {
        let spec = RegionSpec::new(1_000_000, builtin_profile(5).unwrap());
        let zero = BigRational::zero();
        let one = BigRational::one();
        // Only the interior term: v².
        assert_eq!(
            union_bound(&spec, &zero, &one).unwrap(),
            BigRational::from_integer(BigInt::from(1_000_000u64 * 1_000_000))
        );
        // Only the extreme term: 2·δv·v·f(δ) = 2·10·10⁶·2·10⁻⁵ = 400.
        assert_eq!(union_bound(&spec, &one, &zero).unwrap(), q(400, 1));
    }

    #[test]
    fn region_split() {
        let spec = RegionSpec::new(40, builtin_profile(6).unwrap()).with_delta(q(1, 10));
        let (extreme, interior) = spec.split_sizes().unwrap();
        assert_eq!(extreme + interior, spec.omega().unwrap().len());
        assert!(extreme > 0 && interior > 0);
        assert!(spec.is_extreme(4, 10));
        assert!(!spec.is_extreme(5, 10));
        assert!(spec.is_extreme(20, 36));
        let csv = omega_csv(&spec).unwrap();
        assert_eq!(csv.lines().count(), spec.omega().unwrap().len() + 1);
    }

    #[test]
    fn stirling_gap_examples() {
        assert!(stirling_gap(30, 30, 100, 6).unwrap().is_finite());
        let g200 = stirling_gap(50, 100, 200, 6).unwrap().abs();
        let g100 = stirling_gap(25, 50, 100, 6).unwrap().abs();
        assert!(g200 < g100);
        let g = stirling_gap(100, 200, 400, 5).unwrap().abs();
        assert!(g <= 5.0 * 400f64.ln() / 400.0);
        assert!(stirling_gap(0, 3, 10, 5).is_err());
        assert!(stirling_gap(3, 10, 10, 5).is_err());
    }

    proptest! {
        #[test]
        fn containment_factor_is_a_probability(v in 1u64..40, d in 1u64..6, a in 0u64..40, b in 0u64..40) {
            let n = b % (v + 1);
            let u = a % (n + 1);
            let c = containment_probability(u, n, v, d).unwrap();
            prop_assert!(c >= BigRational::zero() && c <= BigRational::one());
            let p = p_value(u, n, v, d).unwrap();
            let cap = BigRational::from_integer(BigInt::from(binomial(v, u) * binomial(v, n)));
            prop_assert!(p <= cap);
        }

        #[test]
        fn p_is_reflection_symmetric(v in 1u64..30, d in 1u64..6, a in 0u64..30, b in 0u64..30) {
            let n = b % (v + 1);
            let u = a % (n + 1);
            prop_assert_eq!(p_value(u, n, v, d).unwrap(), p_value(v - n, v - u, v, d).unwrap());
        }
    }
}
