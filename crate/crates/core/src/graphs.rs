//! Random `d`-regular bipartite multigraphs from a uniform perfect matching
//! on `dv + dv` points, and brute-force expansion oracles at small `v`.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::exact::{approx, containment_probability, ExactError};
use crate::profiles::{PiecewiseLinearProfile, ProfileError};

/// Largest `v` for which [`expansion_report`] enumerates all subsets.
pub const EXHAUSTIVE_MAX_V: u32 = 22;

/// Two-sided 95% normal quantile used for the Wilson intervals.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("v = {v}, d = {d}: both must be at least 1")]
    Size { v: u32, d: u32 },
    #[error("v = {0} is too large for exhaustive subset enumeration (max {EXHAUSTIVE_MAX_V})")]
    TooLarge(u32),
    #[error("no trials requested")]
    NoTrials,
    #[error("node {0} out of range")]
    Node(u32),
    #[error("permutation of length {len} does not match d*v = {expected}")]
    Matching { len: usize, expected: usize },
    #[error("edge list, line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

pub type Result<T> = std::result::Result<T, GraphError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Bipartite multigraph on `v + v` nodes; `edges[i] = (left, right)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteMultigraph {
    v: u32,
    d: u32,
    edges: Vec<(u32, u32)>,
}

impl BipartiteMultigraph {
    /// Collapses a perfect matching `left point i ↦ right point matching[i]`
    /// on `dv + dv` points: point `p` belongs to node `p / d`.
    pub fn from_matching(v: u32, d: u32, matching: &[u32]) -> Result<Self> {
        if v == 0 || d == 0 {
            return Err(GraphError::Size { v, d });
        }
        let expected = (v * d) as usize;
        if matching.len() != expected {
            return Err(GraphError::Matching {
                len: matching.len(),
                expected,
            });
        }
        let edges = matching
            .iter()
            .enumerate()
            .map(|(i, &j)| (i as u32 / d, j / d))
            .collect();
        Ok(Self { v, d, edges })
    }

    pub fn v(&self) -> u32 {
        self.v
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn degrees(&self, side: Side) -> Vec<u32> {
        let mut deg = vec![0u32; self.v as usize];
        for &(l, r) in &self.edges {
            let node = if side == Side::Left { l } else { r };
            deg[node as usize] += 1;
        }
        deg
    }

    pub fn is_regular(&self) -> bool {
        [Side::Left, Side::Right]
            .iter()
            .all(|&s| self.degrees(s).iter().all(|&x| x == self.d))
    }

    /// Number of distinct opposite-side nodes adjacent to `nodes`.
    pub fn neighbour_set_size(&self, side: Side, nodes: &[u32]) -> Result<usize> {
        let mut in_set = vec![false; self.v as usize];
        for &n in nodes {
            *in_set.get_mut(n as usize).ok_or(GraphError::Node(n))? = true;
        }
        let mut seen = vec![false; self.v as usize];
        for &(l, r) in &self.edges {
            let (from, to) = if side == Side::Left { (l, r) } else { (r, l) };
            if in_set[from as usize] {
                seen[to as usize] = true;
            }
        }
        Ok(seen.into_iter().filter(|&s| s).count())
    }

    /// Opposite-side neighbourhood of each node as a bitmask (`v ≤ 64`).
    fn masks(&self, side: Side) -> Vec<u64> {
        let mut masks = vec![0u64; self.v as usize];
        for &(l, r) in &self.edges {
            let (from, to) = if side == Side::Left { (l, r) } else { (r, l) };
            masks[from as usize] |= 1 << to;
        }
        masks
    }

    /// Edge list with a `v d` header line.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.v, self.d);
        for (l, r) in &self.edges {
            out.push_str(&format!("{l} {r}\n"));
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let pair = |(i, line): (usize, &str)| -> Result<(u32, u32)> {
            let err = |msg: &str| GraphError::Parse {
                line: i + 1,
                msg: msg.into(),
            };
            let mut it = line.split_whitespace().map(|t| t.parse::<u32>());
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
                _ => Err(err("expected two non-negative integers")),
            }
        };
        let (v, d) = pair(lines.next().ok_or(GraphError::Parse {
            line: 0,
            msg: "missing header".into(),
        })?)?;
        if v == 0 || d == 0 {
            return Err(GraphError::Size { v, d });
        }
        let edges = lines.map(pair).collect::<Result<Vec<_>>>()?;
        if let Some(&(l, r)) = edges.iter().find(|(l, r)| *l >= v || *r >= v) {
            return Err(GraphError::Node(l.max(r)));
        }
        Ok(Self { v, d, edges })
    }
}

/// The collapsed graph of a uniformly random perfect matching.
pub fn sample(v: u32, d: u32, seed: u64) -> Result<BipartiteMultigraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(v, d, &mut rng)
}

pub fn sample_with<R: Rng + ?Sized>(v: u32, d: u32, rng: &mut R) -> Result<BipartiteMultigraph> {
    if v == 0 || d == 0 {
        return Err(GraphError::Size { v, d });
    }
    let mut matching: Vec<u32> = (0..v * d).collect();
    matching.shuffle(rng);
    BipartiteMultigraph::from_matching(v, d, &matching)
}

/// Per-trial seeds drawn from one master stream, so results do not depend
/// on how trials are scheduled.
pub fn trial_seeds(seed: u64, trials: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| rng.gen()).collect()
}

/// Minimum neighbourhood size over all `u`-subsets, for each side and each `u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionReport {
    pub min_left: Vec<u32>,
    pub min_right: Vec<u32>,
}

impl ExpansionReport {
    /// Smallest `u` at which either side falls below `⌈v·f(u/v)⌉`.
    pub fn first_violation(&self, profile: &PiecewiseLinearProfile) -> Result<Option<u32>> {
        let v = (self.min_left.len() - 1) as u64;
        for u in 0..=v {
            let need = profile.required_neighbours(u, v)?;
            let got = self.min_left[u as usize].min(self.min_right[u as usize]);
            if u64::from(got) < need {
                return Ok(Some(u as u32));
            }
        }
        Ok(None)
    }

    /// CSV `u,min_left,min_right,required`.
    pub fn to_csv(&self, profile: &PiecewiseLinearProfile) -> Result<String> {
        let v = (self.min_left.len() - 1) as u64;
        let mut out = String::from("u,min_left,min_right,required\n");
        for u in 0..=v {
            let need = profile.required_neighbours(u, v)?;
            out.push_str(&format!(
                "{u},{},{},{need}\n",
                self.min_left[u as usize], self.min_right[u as usize]
            ));
        }
        Ok(out)
    }
}

fn side_minima(masks: &[u64]) -> Vec<u32> {
    let v = masks.len();
    let mut best = vec![u32::MAX; v + 1];
    let mut nb = vec![0u64; 1 << v];
    best[0] = 0;
    for set in 1usize..(1 << v) {
        let low = set.trailing_zeros() as usize;
        let cur = nb[set & (set - 1)] | masks[low];
        nb[set] = cur;
        let size = set.count_ones() as usize;
        best[size] = best[size].min(cur.count_ones());
    }
    best
}

/// Exhaustive over all `2^v` subsets of each side.
pub fn expansion_report(g: &BipartiteMultigraph) -> Result<ExpansionReport> {
    if g.v > EXHAUSTIVE_MAX_V {
        return Err(GraphError::TooLarge(g.v));
    }
    Ok(ExpansionReport {
        min_left: side_minima(&g.masks(Side::Left)),
        min_right: side_minima(&g.masks(Side::Right)),
    })
}

/// A Bernoulli frequency with its Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proportion {
    pub hits: u64,
    pub trials: u64,
    pub lo: f64,
    pub hi: f64,
}

impl Proportion {
    pub fn new(hits: u64, trials: u64) -> Result<Self> {
        if trials == 0 {
            return Err(GraphError::NoTrials);
        }
        let n = trials as f64;
        let p = hits as f64 / n;
        let z2 = Z_95 * Z_95;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = Z_95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        Ok(Self {
            hits,
            trials,
            lo: (centre - half).clamp(0.0, p),
            hi: (centre + half).clamp(p, 1.0),
        })
    }

    pub fn rate(&self) -> f64 {
        self.hits as f64 / self.trials as f64
    }
}

impl fmt::Display for Proportion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}/{} = {:.4} (95% CI [{:.4}, {:.4}])",
            self.hits,
            self.trials,
            self.rate(),
            self.lo,
            self.hi
        )
    }
}

/// Fraction of sampled graphs that miss the profile somewhere on either side.
pub fn violation_rate(v: u32, d: u32, profile: &PiecewiseLinearProfile, trials: u64, seed: u64) -> Result<Proportion> {
    if trials == 0 {
        return Err(GraphError::NoTrials);
    }
    if v > EXHAUSTIVE_MAX_V {
        return Err(GraphError::TooLarge(v));
    }
    let hits = trial_seeds(seed, trials)
        .into_par_iter()
        .map(|s| -> Result<u64> {
            let g = sample(v, d, s)?;
            let report = expansion_report(&g)?;
            Ok(u64::from(report.first_violation(profile)?.is_some()))
        })
        .sum::<Result<u64>>()?;
    Proportion::new(hits, trials)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub hits: u64,
    pub trials: u64,
    pub estimate: f64,
    pub exact: f64,
    /// `(estimate - exact) / sqrt(exact(1-exact)/trials)`; zero when the
    /// exact probability is 0 or 1 and the estimate matches it.
    pub z_score: f64,
}

/// Monte Carlo estimate of `Pr[N(U) ⊆ N]` for `U = {0..u}` on the left and
/// `N = {0..n}` on the right, against the exact `C(dn,du)/C(dv,du)`.
pub fn containment_probability_oracle(v: u32, d: u32, u: u32, n: u32, trials: u64, seed: u64) -> Result<OracleResult> {
    if trials == 0 {
        return Err(GraphError::NoTrials);
    }
    if v == 0 || d == 0 {
        return Err(GraphError::Size { v, d });
    }
    let exact = if u > n {
        0.0
    } else {
        approx(&containment_probability(
            u64::from(u),
            u64::from(n),
            u64::from(v),
            u64::from(d),
        )?)
    };
    const CHUNK: u64 = 4096;
    let chunks = trials.div_ceil(CHUNK);
    let hits: u64 = trial_seeds(seed, chunks)
        .into_par_iter()
        .enumerate()
        .map(|(c, s)| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let count = CHUNK.min(trials - c as u64 * CHUNK);
            let mut hits = 0;
            for _ in 0..count {
                let g = sample_with(v, d, &mut rng).expect("validated sizes");
                if g.edges.iter().all(|&(l, r)| l >= u || r < n) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let estimate = hits as f64 / trials as f64;
    let sd = (exact * (1.0 - exact) / trials as f64).sqrt();
    let z_score = if sd > 0.0 {
        (estimate - exact) / sd
    } else if estimate == exact {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(OracleResult {
        hits,
        trials,
        estimate,
        exact,
        z_score,
    })
}
