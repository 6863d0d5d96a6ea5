//! Randomized experiments on worst-case shortest controllable lengths.
//!
//! Each cell `(n, r, m)` draws seeded random systems with invertible `A_i`
//! and input ranks governed by a [`RankMode`], computes exact shortest
//! controllable lengths by BFS, and checks them against every applicable
//! upper bound. Cells can also be seeded with a known extremal system to
//! confirm the bound is attained.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremal::{family_a, family_rank};
use crate::linalg::{rat, RationalMatrix};
use crate::reach::v_chain;
use crate::search::{invertible_length_bound, shortest_controllable_sequences_with, SearchOptions, SearchStatus};
use crate::system::SwitchedSystem;

/// Constraint on `rank(B_i)` for sampled systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankSpec {
    Exactly(usize),
    AtLeast(usize),
    Unconstrained,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankMode {
    Exactly,
    AtLeast,
    Unconstrained,
}

impl RankMode {
    pub fn spec(self, r: usize) -> RankSpec {
        match self {
            RankMode::Exactly => RankSpec::Exactly(r),
            RankMode::AtLeast => RankSpec::AtLeast(r),
            RankMode::Unconstrained => RankSpec::Unconstrained,
        }
    }
}

const RESAMPLE_BUDGET: usize = 10_000;

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, bound: i64) -> RationalMatrix {
    let mut m = RationalMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, rat(rng.gen_range(-bound..=bound)));
        }
    }
    m
}

fn random_of_rank(rng: &mut ChaCha8Rng, rows: usize, cols: usize, rank: usize, bound: i64) -> Result<RationalMatrix> {
    for _ in 0..RESAMPLE_BUDGET {
        let m = random_matrix(rng, rows, cols, bound);
        if m.rank() == rank {
            return Ok(m);
        }
    }
    Err(Error::BudgetExceeded(format!(
        "could not sample a {rows}x{cols} matrix of rank {rank}"
    )))
}

/// Random `n x p` input matrix of exact rank `k`, built as a product of full-rank factors.
fn random_input(rng: &mut ChaCha8Rng, n: usize, k: usize, bound: i64) -> Result<RationalMatrix> {
    if k == 0 {
        return Ok(RationalMatrix::zeros(n, 1));
    }
    let p = k + rng.gen_range(0..=1usize);
    let left = random_of_rank(rng, n, k, k, bound)?;
    let right = random_of_rank(rng, k, p, k, bound)?;
    let b = left.mul(&right)?;
    debug_assert_eq!(b.rank(), k);
    Ok(b)
}

/// Draws a system with integer entries in `[-entry_bound, entry_bound]`, every
/// `A_i` invertible and every `B_i` satisfying `rank_spec`.
pub fn sample_system_with_rng(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    rank_spec: RankSpec,
    entry_bound: i64,
) -> Result<SwitchedSystem> {
    if n == 0 || m == 0 || entry_bound < 1 {
        return Err(Error::InvalidParameters(format!(
            "need n ≥ 1, m ≥ 1 and a positive entry bound (got n = {n}, m = {m}, bound = {entry_bound})"
        )));
    }
    let rank_range = match rank_spec {
        RankSpec::Exactly(r) => r..=r,
        RankSpec::AtLeast(r) => r..=n,
        RankSpec::Unconstrained => 0..=n,
    };
    if *rank_range.start() > n {
        return Err(Error::InvalidParameters(format!(
            "rank {} exceeds n = {n}",
            rank_range.start()
        )));
    }
    let mut pairs = Vec::with_capacity(m);
    for _ in 0..m {
        let a = random_of_rank(rng, n, n, n, entry_bound)?;
        let k = rng.gen_range(rank_range.clone());
        pairs.push((a, random_input(rng, n, k, entry_bound)?));
    }
    SwitchedSystem::from_pairs(pairs)
}

pub fn sample_system(n: usize, m: usize, rank_spec: RankSpec, entry_bound: i64, seed: u64) -> Result<SwitchedSystem> {
    sample_system_with_rng(&mut ChaCha8Rng::seed_from_u64(seed), n, m, rank_spec, entry_bound)
}

/// Experiment grid. Ranges are inclusive; `r` is clipped to `n − 1` per cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundExperimentConfig {
    pub n_range: [usize; 2],
    pub r_range: [usize; 2],
    pub m_range: [usize; 2],
    pub samples: usize,
    pub entry_bound: i64,
    pub seed: u64,
    /// Defaults to `n(n+1)/2`, which is sound because sampled `A_i` are invertible.
    pub depth_cap: Option<usize>,
    pub state_limit: usize,
    pub rank_mode: RankMode,
    pub plant_extremal: bool,
}

impl Default for BoundExperimentConfig {
    fn default() -> Self {
        Self {
            n_range: [2, 4],
            r_range: [0, 3],
            m_range: [1, 4],
            samples: 50,
            entry_bound: 2,
            seed: 0,
            depth_cap: None,
            state_limit: 100_000,
            rank_mode: RankMode::AtLeast,
            plant_extremal: true,
        }
    }
}

impl BoundExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let ranges = [
            ("n_range", self.n_range),
            ("r_range", self.r_range),
            ("m_range", self.m_range),
        ];
        for (name, [lo, hi]) in ranges {
            if lo > hi {
                return Err(Error::InvalidParameters(format!("{name} is empty ([{lo}, {hi}])")));
            }
        }
        if self.n_range[0] < 1 || self.m_range[0] < 1 {
            return Err(Error::InvalidParameters("n and m must be at least 1".into()));
        }
        if self.samples == 0 || self.entry_bound < 1 || self.state_limit == 0 {
            return Err(Error::InvalidParameters(
                "samples, entry_bound and state_limit must be positive".into(),
            ));
        }
        if self.depth_cap == Some(0) {
            return Err(Error::InvalidParameters("depth_cap must be positive".into()));
        }
        Ok(())
    }

    /// Cells `(n, r, m)` in report order.
    pub fn cells(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for n in self.n_range[0]..=self.n_range[1] {
            let r_hi = self.r_range[1].min(n - 1);
            if self.rank_mode == RankMode::Unconstrained {
                for m in self.m_range[0]..=self.m_range[1] {
                    out.push((n, 0, m));
                }
                continue;
            }
            for r in self.r_range[0]..=r_hi {
                for m in self.m_range[0]..=self.m_range[1] {
                    out.push((n, r, m));
                }
            }
        }
        out
    }
}

/// An observed length above an applicable bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// Sample index, or `None` for the planted extremal system.
    pub sample: Option<usize>,
    pub length: Option<usize>,
    pub bound: usize,
    pub rule: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlantedCheck {
    pub family: String,
    pub family_modes: usize,
    pub expected: usize,
    pub observed: Option<usize>,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CellReport {
    pub n: usize,
    pub r: usize,
    pub m: usize,
    pub samples: usize,
    pub controllable: usize,
    pub inconclusive: usize,
    pub max_len: Option<usize>,
    pub min_len: Option<usize>,
    /// Tightest applicable upper bound.
    pub bound: usize,
    pub bound_rules: Vec<String>,
    pub tightness: String,
    pub violations: Vec<Violation>,
    pub histogram: BTreeMap<usize, usize>,
    pub planted: Option<PlantedCheck>,
    pub wall_time_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub config: BoundExperimentConfig,
    pub cells: Vec<CellReport>,
    pub total_violations: usize,
}

/// Upper bounds `(rule, value)` that apply to a cell.
pub fn applicable_bounds(n: usize, r: usize, mode: RankMode) -> Vec<(String, usize)> {
    let mut rules = vec![("length ≤ n(n+1)/2".to_string(), invertible_length_bound(n))];
    if mode != RankMode::Unconstrained && r >= 1 && r < n {
        rules.push(("length ≤ (n−r+1)(n−r)/2 + 1".to_string(), (n - r + 1) * (n - r) / 2 + 1));
        if r == n - 1 {
            rules.push(("r = n−1 ⇒ length ≤ 2".to_string(), 2));
        }
        if (n, r) == (3, 1) {
            rules.push(("(n, r) = (3, 1) ⇒ length ≤ 4".to_string(), 4));
        }
    }
    rules
}

fn tightness(n: usize, r: usize, m: usize, mode: RankMode) -> &'static str {
    let r = if mode == RankMode::Unconstrained { 0 } else { r };
    let proven = if r == 0 {
        m >= n && n >= 2
    } else {
        n - r == 1 || m >= n - r
    };
    if proven {
        "proven-tight"
    } else {
        "bound unproven-tight"
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn sample_seed(seed: u64, n: usize, r: usize, m: usize, sample: usize) -> u64 {
    let cell = (n as u64) << 48 | (r as u64) << 40 | (m as u64) << 32 | sample as u64;
    mix(mix(seed) ^ cell)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Outcome {
    NotControllable,
    Length(usize),
    Inconclusive,
    /// Controllable, yet no controllable sequence within `n(n+1)/2`.
    MissedInvertibleBound,
}

fn shortest_length(sys: &SwitchedSystem, cfg: &BoundExperimentConfig) -> Outcome {
    let sound_cap = invertible_length_bound(sys.n());
    let cap = cfg.depth_cap.unwrap_or(sound_cap);
    let opts = SearchOptions {
        depth_cap: Some(cap),
        witness_cap: 1,
        state_limit: cfg.state_limit,
    };
    match shortest_controllable_sequences_with(sys, &opts) {
        Ok(res) => match res.status {
            SearchStatus::Controllable => Outcome::Length(res.shortest_length.expect("controllable")),
            SearchStatus::ProvablyNotControllable => Outcome::NotControllable,
            SearchStatus::NotControllableWithinDepth => {
                if !v_chain(sys).fixed_point().is_full() {
                    Outcome::NotControllable
                } else if cap >= sound_cap {
                    Outcome::MissedInvertibleBound
                } else {
                    Outcome::Inconclusive
                }
            }
        },
        Err(_) => Outcome::Inconclusive,
    }
}

fn planted_system(n: usize, r: usize, m: usize, mode: RankMode) -> Option<(String, SwitchedSystem, usize)> {
    if m < 2 {
        return None;
    }
    let (label, mut sys, expected) = match (mode, r) {
        (RankMode::Exactly, 0) => return None,
        (RankMode::Unconstrained, _) | (_, 0) => {
            if n < 2 {
                return None;
            }
            let k = m.min(n);
            (format!("family_a({n}, {k})"), family_a(n, k).ok()?, n + k * (k - 1) / 2)
        }
        (_, r) => {
            if n < r + 2 {
                return None;
            }
            let k = m.min(n - r);
            (
                format!("family_rank({n}, {r}, {k})"),
                family_rank(n, r, k).ok()?,
                n - r + 1 + k * (k - 1) / 2,
            )
        }
    };
    while sys.m() < m {
        sys = sys.with_duplicated_mode(1).ok()?;
    }
    Some((label, sys, expected))
}

pub fn run_bound_experiment(cfg: &BoundExperimentConfig) -> Result<BoundReport> {
    cfg.validate()?;
    let cells = cfg.cells();
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.samples).map(move |s| (c, s)))
        .collect();
    let outcomes: Vec<(Outcome, u128)> = jobs
        .par_iter()
        .map(|&(c, s)| {
            let (n, r, m) = cells[c];
            let start = Instant::now();
            let seed = sample_seed(cfg.seed, n, r, m, s);
            let outcome = match sample_system(n, m, cfg.rank_mode.spec(r), cfg.entry_bound, seed) {
                Ok(sys) => shortest_length(&sys, cfg),
                Err(_) => Outcome::Inconclusive,
            };
            (outcome, start.elapsed().as_micros())
        })
        .collect();
    let planted: Vec<Option<PlantedCheck>> = cells
        .par_iter()
        .map(|&(n, r, m)| {
            if !cfg.plant_extremal {
                return None;
            }
            let (family, sys, expected) = planted_system(n, r, m, cfg.rank_mode)?;
            let observed = match shortest_length(&sys, cfg) {
                Outcome::Length(len) => Some(len),
                _ => None,
            };
            Some(PlantedCheck {
                family,
                family_modes: sys.m(),
                expected,
                observed,
                matches: observed == Some(expected),
            })
        })
        .collect();

    let mut reports = Vec::with_capacity(cells.len());
    for (c, (&(n, r, m), planted)) in cells.iter().zip(planted).enumerate() {
        let rules = applicable_bounds(n, r, cfg.rank_mode);
        let bound = rules.iter().map(|(_, b)| *b).min().expect("at least one rule");
        let mut cell = CellReport {
            n,
            r,
            m,
            samples: cfg.samples,
            controllable: 0,
            inconclusive: 0,
            max_len: None,
            min_len: None,
            bound,
            bound_rules: rules.iter().map(|(rule, _)| rule.clone()).collect(),
            tightness: tightness(n, r, m, cfg.rank_mode).to_string(),
            violations: Vec::new(),
            histogram: BTreeMap::new(),
            planted: None,
            wall_time_ms: 0,
        };
        let mut micros = 0u128;
        for (s, &(outcome, us)) in outcomes[c * cfg.samples..(c + 1) * cfg.samples].iter().enumerate() {
            micros += us;
            match outcome {
                Outcome::NotControllable => {}
                Outcome::Inconclusive => cell.inconclusive += 1,
                Outcome::MissedInvertibleBound => {
                    cell.controllable += 1;
                    cell.violations.push(Violation {
                        sample: Some(s),
                        length: None,
                        bound: invertible_length_bound(n),
                        rule: "controllable but no controllable sequence within n(n+1)/2".into(),
                    });
                }
                Outcome::Length(len) => {
                    cell.controllable += 1;
                    *cell.histogram.entry(len).or_default() += 1;
                    cell.max_len = Some(cell.max_len.map_or(len, |x| x.max(len)));
                    cell.min_len = Some(cell.min_len.map_or(len, |x| x.min(len)));
                    for (rule, b) in &rules {
                        if len > *b {
                            cell.violations.push(Violation {
                                sample: Some(s),
                                length: Some(len),
                                bound: *b,
                                rule: rule.clone(),
                            });
                        }
                    }
                }
            }
        }
        if let Some(check) = &planted {
            let over = check.observed.is_none_or(|len| len > bound);
            if !check.matches || over {
                cell.violations.push(Violation {
                    sample: None,
                    length: check.observed,
                    bound,
                    rule: format!("planted {} should have length {}", check.family, check.expected),
                });
            }
        }
        cell.planted = planted;
        cell.wall_time_ms = (micros / 1000) as u64;
        reports.push(cell);
    }
    let total_violations = reports.iter().map(|c| c.violations.len()).sum();
    Ok(BoundReport {
        config: cfg.clone(),
        cells: reports,
        total_violations,
    })
}

impl BoundReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>2} {:>2} {:>2} {:>7} {:>5} {:>5} {:>5} {:>4}  {:<22} {:<28} histogram",
            "n", "r", "m", "samples", "ctrl", "incl", "max", "bnd", "tightness", "planted"
        );
        for c in &self.cells {
            let hist: Vec<String> = c.histogram.iter().map(|(len, k)| format!("{len}:{k}")).collect();
            let planted = match &c.planted {
                Some(p) => format!(
                    "{}={}{}",
                    p.expected,
                    p.observed.map_or("-".to_string(), |o| o.to_string()),
                    if p.matches { " ok" } else { " MISMATCH" }
                ),
                None => "-".into(),
            };
            let _ = writeln!(
                out,
                "{:>2} {:>2} {:>2} {:>7} {:>5} {:>5} {:>5} {:>4}  {:<22} {:<28} {}{}",
                c.n,
                c.r,
                c.m,
                c.samples,
                c.controllable,
                c.inconclusive,
                c.max_len.map_or("-".to_string(), |x| x.to_string()),
                c.bound,
                c.tightness,
                planted,
                hist.join(" "),
                if c.violations.is_empty() {
                    String::new()
                } else {
                    format!("  VIOLATIONS: {}", c.violations.len())
                }
            );
        }
        let _ = writeln!(out, "total violations: {}", self.total_violations);
        out
    }
}
