//! Breadth-first search over the automaton of reachable subspaces.
//!
//! States are canonical subspaces; reading mode `σ` in state `W` moves to
//! `A_σ W + Im(B_σ)`. Starting from `{0}`, the state reached by a word `π` is
//! exactly `R(π)`, so a shortest path to `R^n` is a shortest controllable
//! sequence.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Subspace;
use crate::reach::{reachable_set, reachable_space_of_sequence, v_chain};
use crate::system::{ModeSequence, SwitchedSystem};

pub const DEFAULT_STATE_LIMIT: usize = 100_000;
pub const DEFAULT_WITNESS_CAP: usize = 64;

/// Deterministic transition system on canonical subspaces.
#[derive(Clone, Debug)]
pub struct SubspaceAutomaton {
    n: usize,
    m: usize,
    states: Vec<Subspace>,
    depth: Vec<usize>,
    /// Target per mode (0-based); `None` for states left unexpanded at the depth cap.
    edges: Vec<Option<Vec<usize>>>,
    index: HashMap<Subspace, usize>,
    accepting: Option<usize>,
    depth_explored: usize,
    closed: bool,
}

impl SubspaceAutomaton {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn num_modes(&self) -> usize {
        self.m
    }

    /// States in discovery order; index 0 is the zero subspace.
    pub fn states(&self) -> &[Subspace] {
        &self.states
    }

    pub fn initial(&self) -> usize {
        0
    }

    /// Index of `R^n`, if it was discovered.
    pub fn accepting(&self) -> Option<usize> {
        self.accepting
    }

    /// BFS depth at which a state was first discovered.
    pub fn depth_of(&self, state: usize) -> usize {
        self.depth[state]
    }

    /// Successor per mode (0-based modes), or `None` if the state was not expanded.
    pub fn successors(&self, state: usize) -> Option<&[usize]> {
        self.edges[state].as_deref()
    }

    pub fn find(&self, space: &Subspace) -> Option<usize> {
        self.index.get(space).copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().flatten().map(Vec::len).sum()
    }

    pub fn depth_explored(&self) -> usize {
        self.depth_explored
    }

    /// Every discovered state was expanded and produced no new states.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Length of a shortest path from `{0}` to `R^n`.
    pub fn shortest_path_length(&self) -> Option<usize> {
        self.accepting.map(|s| self.depth[s])
    }

    pub fn summary(&self) -> String {
        let shortest = match self.shortest_path_length() {
            Some(len) => format!("shortest path to R^{} has length {len}", self.n),
            None => format!("R^{} not reached", self.n),
        };
        format!(
            "states: {}, edges: {}, depth explored: {}, {}, {}",
            self.states.len(),
            self.edge_count(),
            self.depth_explored,
            if self.closed { "closed" } else { "open" },
            shortest
        )
    }
}

fn explore(
    sys: &SwitchedSystem,
    depth_cap: usize,
    state_limit: usize,
    stop_at_full: bool,
) -> Result<SubspaceAutomaton> {
    let n = sys.n();
    let zero = Subspace::zero(n);
    let mut auto = SubspaceAutomaton {
        n,
        m: sys.m(),
        states: vec![zero.clone()],
        depth: vec![0],
        edges: vec![None],
        index: HashMap::from([(zero.clone(), 0)]),
        accepting: None,
        depth_explored: 0,
        closed: false,
    };
    if zero.is_full() {
        auto.accepting = Some(0);
    }
    let mut frontier = vec![0usize];
    let mut depth = 0;
    while depth < depth_cap && !frontier.is_empty() {
        let images: Vec<Vec<Subspace>> = frontier
            .par_iter()
            .map(|&s| sys.modes().iter().map(|md| md.step(&auto.states[s])).collect())
            .collect();
        let mut next = Vec::new();
        // merge in (frontier order, mode order) so numbering is schedule independent
        for (&s, succ) in frontier.iter().zip(images) {
            let mut targets = Vec::with_capacity(succ.len());
            for space in succ {
                let t = match auto.index.get(&space) {
                    Some(&t) => t,
                    None => {
                        let t = auto.states.len();
                        if t >= state_limit {
                            return Err(Error::StateLimit { limit: state_limit });
                        }
                        if space.is_full() {
                            auto.accepting = Some(t);
                        }
                        auto.index.insert(space.clone(), t);
                        auto.states.push(space);
                        auto.depth.push(depth + 1);
                        auto.edges.push(None);
                        next.push(t);
                        t
                    }
                };
                targets.push(t);
            }
            auto.edges[s] = Some(targets);
        }
        frontier = next;
        depth += 1;
        auto.depth_explored = depth;
        if stop_at_full && auto.accepting.is_some() {
            break;
        }
    }
    auto.closed = frontier.is_empty();
    Ok(auto)
}

/// Explores all subspaces reachable from `{0}` by words of length ≤ `depth_cap`.
pub fn build_automaton(sys: &SwitchedSystem, depth_cap: usize) -> Result<SubspaceAutomaton> {
    build_automaton_with_limit(sys, depth_cap, DEFAULT_STATE_LIMIT)
}

pub fn build_automaton_with_limit(
    sys: &SwitchedSystem,
    depth_cap: usize,
    state_limit: usize,
) -> Result<SubspaceAutomaton> {
    if depth_cap == 0 {
        return Err(Error::InvalidParameters("depth cap must be at least 1".into()));
    }
    explore(sys, depth_cap, state_limit, false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    Controllable,
    NotControllableWithinDepth,
    ProvablyNotControllable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub status: SearchStatus,
    pub shortest_length: Option<usize>,
    /// Shortest controllable sequences in lexicographic order, at most `witness_cap` of them.
    pub witnesses: Vec<ModeSequence>,
    /// More shortest sequences exist than were returned.
    pub witnesses_truncated: bool,
    pub depth_cap_used: usize,
    pub states_explored: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    /// Required when some `A_i` is singular; defaults to `n(n+1)/2` otherwise.
    pub depth_cap: Option<usize>,
    pub witness_cap: usize,
    pub state_limit: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            depth_cap: None,
            witness_cap: DEFAULT_WITNESS_CAP,
            state_limit: DEFAULT_STATE_LIMIT,
        }
    }
}

/// `n(n+1)/2`: every controllable system with invertible `A_i` has a
/// controllable sequence at most this long.
pub fn invertible_length_bound(n: usize) -> usize {
    n * (n + 1) / 2
}

pub fn shortest_controllable_sequences(
    sys: &SwitchedSystem,
    depth_cap: Option<usize>,
    witness_cap: usize,
) -> Result<SearchResult> {
    shortest_controllable_sequences_with(
        sys,
        &SearchOptions {
            depth_cap,
            witness_cap,
            ..SearchOptions::default()
        },
    )
}

pub fn shortest_controllable_sequences_with(sys: &SwitchedSystem, opts: &SearchOptions) -> Result<SearchResult> {
    let cap = match opts.depth_cap {
        Some(0) => return Err(Error::InvalidParameters("depth cap must be at least 1".into())),
        Some(cap) => cap,
        None if sys.all_a_invertible() => invertible_length_bound(sys.n()),
        None => {
            return Err(Error::Precondition(
                "some A_i is singular: no length bound is known, so an explicit depth cap is required".into(),
            ))
        }
    };
    let auto = explore(sys, cap, opts.state_limit, true)?;
    let mut result = SearchResult {
        status: SearchStatus::NotControllableWithinDepth,
        shortest_length: None,
        witnesses: Vec::new(),
        witnesses_truncated: false,
        depth_cap_used: cap,
        states_explored: auto.states.len(),
    };
    if let Some(target) = auto.accepting {
        let len = auto.depth[target];
        let (witnesses, truncated) = enumerate_witnesses(&auto, target, len, opts.witness_cap);
        result.status = SearchStatus::Controllable;
        result.shortest_length = Some(len);
        result.witnesses = witnesses;
        result.witnesses_truncated = truncated;
    } else if auto.closed || matches!(reachable_set(sys), Ok(r) if !r.is_full()) {
        // closure enumerates every R(π); otherwise the fixed-point criterion decides
        result.status = SearchStatus::ProvablyNotControllable;
    }
    Ok(result)
}

/// All words of length `len` from `{0}` to `target`, lexicographically, up to `cap`.
fn enumerate_witnesses(auto: &SubspaceAutomaton, target: usize, len: usize, cap: usize) -> (Vec<ModeSequence>, bool) {
    // hits[k][s]: s reaches target in exactly k steps
    let count = auto.states.len();
    let mut hits = vec![vec![false; count]; len + 1];
    hits[0][target] = true;
    for k in 1..=len {
        for s in 0..count {
            if let Some(succ) = &auto.edges[s] {
                hits[k][s] = succ.iter().any(|&t| hits[k - 1][t]);
            }
        }
    }
    let mut out = Vec::new();
    let mut word = Vec::with_capacity(len);
    let truncated = walk(auto, &hits, 0, len, &mut word, &mut out, cap);
    (out, truncated)
}

/// Depth-first walk in mode order; returns true once the cap cut enumeration short.
fn walk(
    auto: &SubspaceAutomaton,
    hits: &[Vec<bool>],
    state: usize,
    remaining: usize,
    word: &mut Vec<usize>,
    out: &mut Vec<ModeSequence>,
    cap: usize,
) -> bool {
    if remaining == 0 {
        if out.len() == cap {
            return true;
        }
        out.push(ModeSequence(word.clone()));
        return false;
    }
    let succ = auto.edges[state]
        .as_ref()
        .expect("states before the target layer are expanded");
    for (sigma, &t) in succ.iter().enumerate() {
        if hits[remaining - 1][t] {
            word.push(sigma + 1);
            let stop = walk(auto, hits, t, remaining - 1, word, out, cap);
            word.pop();
            if stop {
                return true;
            }
        }
    }
    false
}

/// Builds a controllable sequence by repeatedly prepending the first
/// (length-then-lexicographic) word of length ≤ `k` that enlarges `R(π)`,
/// where `k` is the least index with `dim R(π) < dim V_k`. The result has
/// length at most `n(n+1)/2`.
pub fn greedy_controllable_sequence(sys: &SwitchedSystem) -> Result<ModeSequence> {
    if !sys.all_a_invertible() {
        return Err(Error::Precondition(
            "greedy construction requires every A_i invertible".into(),
        ));
    }
    let chain = v_chain(sys);
    if !chain.fixed_point().is_full() {
        return Err(Error::Precondition("system is not controllable".into()));
    }
    let m = sys.m();
    let mut word: Vec<usize> = Vec::new();
    let mut reached = Subspace::zero(sys.n());
    while !reached.is_full() {
        let k = (1..=chain.ell)
            .find(|&k| reached.dim() < chain.space(k).dim())
            .expect("reached is a proper subspace of V_ℓ = R^n");
        let mut extended = None;
        'lengths: for len in 1..=k {
            let mut prefix = vec![0usize; len];
            loop {
                let start = prefix
                    .iter()
                    .fold(Subspace::zero(sys.n()), |w, &s| sys.modes()[s].step(&w));
                let candidate = word.iter().fold(start, |w, &s| sys.modes()[s - 1].step(&w));
                if candidate.dim() > reached.dim() {
                    extended = Some((prefix, candidate));
                    break 'lengths;
                }
                if !next_word(&mut prefix, m) {
                    break;
                }
            }
        }
        let (prefix, candidate) =
            extended.ok_or_else(|| Error::Precondition("no enlarging prefix found; are all A_i invertible?".into()))?;
        word = prefix.into_iter().map(|s| s + 1).chain(word).collect();
        reached = candidate;
    }
    Ok(ModeSequence(word))
}

/// Next word in lexicographic order (last letter varies fastest).
fn next_word(word: &mut [usize], radix: usize) -> bool {
    for d in word.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

/// Verifies a witness list against direct evaluation of `R(π)`.
pub fn verify_witnesses(sys: &SwitchedSystem, result: &SearchResult) -> Result<bool> {
    for w in &result.witnesses {
        if Some(w.len()) != result.shortest_length || !reachable_space_of_sequence(sys, w)?.is_full() {
            return Ok(false);
        }
    }
    Ok(true)
}

fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

fn node_label(space: &Subspace) -> String {
    if space.is_zero() || space.is_full() || space.coordinate_support().is_some() {
        space.to_string()
    } else {
        format!("dim {} #{:08x}", space.dim(), fnv1a(&space.to_string()) as u32)
    }
}

/// Renders the automaton as a Graphviz digraph.
pub fn export_dot(auto: &SubspaceAutomaton) -> String {
    let mut out = String::new();
    out.push_str("digraph automaton {\n");
    out.push_str("  rankdir=LR;\n");
    out.push_str("  node [shape=circle, fontname=\"Helvetica\"];\n");
    out.push_str("  start [shape=point, label=\"\"];\n");
    for (i, space) in auto.states.iter().enumerate() {
        let mut attrs = vec![format!("label=\"{}\"", node_label(space))];
        if i == auto.initial() {
            attrs.push("shape=doublecircle".into());
        }
        if Some(i) == auto.accepting {
            attrs.push("style=filled".into());
            attrs.push("fillcolor=\"palegreen\"".into());
            attrs.push("penwidth=2".into());
        } else if auto.edges[i].is_none() {
            attrs.push("style=dashed".into());
        }
        let _ = writeln!(out, "  s{i} [{}];", attrs.join(", "));
    }
    out.push_str("  start -> s0;\n");
    for (i, succ) in auto.edges.iter().enumerate() {
        if let Some(succ) = succ {
            for (sigma, t) in succ.iter().enumerate() {
                let _ = writeln!(out, "  s{i} -> s{t} [label=\"{}\"];", sigma + 1);
            }
        }
    }
    out.push_str("}\n");
    out
}
