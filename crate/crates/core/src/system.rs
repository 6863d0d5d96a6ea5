//! Switched linear control systems `x_k = A_{i_k} x_{k-1} + B_{i_k} u_k`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{parse_rational, rat, RationalMatrix, Subspace};

/// One mode `(A, B)`. `B` may have any number of columns, including zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mode {
    a: RationalMatrix,
    b: RationalMatrix,
    image_b: Subspace,
}

impl Mode {
    pub fn new(a: RationalMatrix, b: RationalMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                rows: a.rows(),
                cols: a.cols(),
            });
        }
        if b.rows() != a.rows() {
            return Err(Error::DimensionMismatch(format!(
                "A is {}x{} but B has {} rows",
                a.rows(),
                a.cols(),
                b.rows()
            )));
        }
        let image_b = Subspace::column_space(&b);
        Ok(Self { a, b, image_b })
    }

    pub fn a(&self) -> &RationalMatrix {
        &self.a
    }

    pub fn b(&self) -> &RationalMatrix {
        &self.b
    }

    /// `Im(B)`.
    pub fn image_b(&self) -> &Subspace {
        &self.image_b
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    /// One transition of the reachable space: `W ↦ A W + Im(B)`.
    pub fn step(&self, w: &Subspace) -> Subspace {
        w.image_plus_unchecked(&self.a, &self.image_b)
    }

    /// `Im(A) + Im(B) = R^n`.
    pub fn is_regular(&self) -> bool {
        Subspace::column_space(&self.a).sum_unchecked(&self.image_b).is_full()
    }
}

/// A switched system on `Q^n` with `m ≥ 1` modes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwitchedSystem {
    n: usize,
    modes: Vec<Mode>,
    flags: SystemFlags,
}

/// Cached structural facts about a system.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SystemFlags {
    pub all_a_invertible: bool,
    pub all_modes_regular: bool,
    pub some_b_nonzero: bool,
}

impl SwitchedSystem {
    pub fn new(modes: Vec<Mode>) -> Result<Self> {
        let Some(first) = modes.first() else {
            return Err(Error::InvalidSystem("a system needs at least one mode".into()));
        };
        let n = first.dim();
        if n == 0 {
            return Err(Error::InvalidSystem("state dimension must be at least 1".into()));
        }
        if let Some(i) = modes.iter().position(|md| md.dim() != n) {
            return Err(Error::InvalidSystem(format!(
                "mode {} has dimension {} but mode 1 has dimension {n}",
                i + 1,
                modes[i].dim()
            )));
        }
        let flags = SystemFlags {
            all_a_invertible: modes.iter().all(|md| md.a.rank() == n),
            all_modes_regular: modes.iter().all(Mode::is_regular),
            some_b_nonzero: modes.iter().any(|md| !md.image_b.is_zero()),
        };
        Ok(Self { n, modes, flags })
    }

    /// Convenience constructor from `(A, B)` pairs.
    pub fn from_pairs(pairs: Vec<(RationalMatrix, RationalMatrix)>) -> Result<Self> {
        let modes = pairs
            .into_iter()
            .map(|(a, b)| Mode::new(a, b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(modes)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    /// Mode by its 1-based index.
    pub fn mode(&self, sigma: usize) -> Result<&Mode> {
        if sigma == 0 || sigma > self.modes.len() {
            return Err(Error::InvalidMode {
                index: sigma,
                modes: self.modes.len(),
            });
        }
        Ok(&self.modes[sigma - 1])
    }

    pub fn flags(&self) -> SystemFlags {
        self.flags
    }

    pub fn all_a_invertible(&self) -> bool {
        self.flags.all_a_invertible
    }

    pub fn all_modes_regular(&self) -> bool {
        self.flags.all_modes_regular
    }

    pub fn some_b_nonzero(&self) -> bool {
        self.flags.some_b_nonzero
    }

    /// A copy with mode `sigma` (1-based) appended again at the end.
    pub fn with_duplicated_mode(&self, sigma: usize) -> Result<Self> {
        let extra = self.mode(sigma)?.clone();
        let mut modes = self.modes.clone();
        modes.push(extra);
        Self::new(modes)
    }

    /// Checks that every index of `seq` names a mode of this system.
    pub fn check_sequence(&self, seq: &ModeSequence) -> Result<()> {
        match seq.0.iter().find(|&&s| s == 0 || s > self.m()) {
            Some(&bad) => Err(Error::InvalidMode {
                index: bad,
                modes: self.m(),
            }),
            None => Ok(()),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SystemFile = serde_json::from_str(text)?;
        file.into_system()
    }

    /// JSON text with one matrix row per line.
    pub fn to_json(&self) -> String {
        let file = SystemFile::from_system(self);
        let grid = |g: &[Vec<Entry>]| {
            let rows: Vec<String> = g
                .iter()
                .map(|row| serde_json::to_string(row).expect("entries serialize"))
                .collect();
            format!("[{}]", rows.join(", "))
        };
        let modes: Vec<String> = file
            .modes
            .iter()
            .map(|md| {
                format!(
                    "    {{\n      \"A\": {},\n      \"B\": {}\n    }}",
                    grid(&md.a),
                    grid(&md.b)
                )
            })
            .collect();
        format!(
            "{{\n  \"n\": {},\n  \"modes\": [\n{}\n  ]\n}}\n",
            file.n,
            modes.join(",\n")
        )
    }
}

/// Parses a system from the JSON exchange format.
pub fn load_system(bytes: &[u8]) -> Result<SwitchedSystem> {
    let file: SystemFile = serde_json::from_slice(bytes)?;
    file.into_system()
}

/// Writes a system in the JSON exchange format.
pub fn save_system(sys: &SwitchedSystem) -> Vec<u8> {
    sys.to_json().into_bytes()
}

/// A finite switching word, stored with 1-based mode indices in time order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeSequence(pub Vec<usize>);

impl ModeSequence {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// `self` followed in time by `other`.
    pub fn concat(&self, other: &Self) -> Self {
        let mut word = self.0.clone();
        word.extend_from_slice(&other.0);
        Self(word)
    }

    /// Digit string when every index is a single digit (`"122121"`),
    /// comma-separated indices otherwise.
    pub fn render(&self, num_modes: usize) -> String {
        if self.0.is_empty() {
            return "ε".to_string();
        }
        if num_modes <= 9 && self.0.iter().all(|&s| s <= 9) {
            self.0.iter().map(|s| char::from(b'0' + *s as u8)).collect()
        } else {
            let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
            parts.join(",")
        }
    }
}

impl fmt::Display for ModeSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.0.iter().copied().max().unwrap_or(0);
        f.write_str(&self.render(width))
    }
}

impl FromStr for ModeSequence {
    type Err = Error;

    /// Accepts `"122121"`, `"1,2,2"`, or `""`/`"ε"` for the empty word.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "ε" {
            return Ok(Self::empty());
        }
        let bad = || Error::InvalidParameters(format!("cannot parse mode sequence {s:?}"));
        let word = if s.contains(',') {
            s.split(',')
                .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?
        } else {
            s.chars()
                .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(bad))
                .collect::<Result<Vec<_>>>()?
        };
        if word.contains(&0) {
            return Err(bad());
        }
        Ok(Self(word))
    }
}

impl From<Vec<usize>> for ModeSequence {
    fn from(word: Vec<usize>) -> Self {
        Self(word)
    }
}

/// Per-mode validity facts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ModeValidity {
    /// 1-based mode index.
    pub mode: usize,
    pub a_invertible: bool,
    /// `Im(A) + Im(B) = R^n`.
    pub regular: bool,
    pub rank_b: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidityReport {
    pub modes: Vec<ModeValidity>,
    pub all_a_invertible: bool,
    pub all_modes_regular: bool,
    /// Necessary for a controllable sequence to exist: its last mode must be regular.
    pub some_mode_regular: bool,
    pub some_b_nonzero: bool,
}

pub fn validate(sys: &SwitchedSystem) -> ValidityReport {
    let modes: Vec<ModeValidity> = sys
        .modes()
        .iter()
        .enumerate()
        .map(|(i, md)| ModeValidity {
            mode: i + 1,
            a_invertible: md.a().rank() == sys.n(),
            regular: md.is_regular(),
            rank_b: md.image_b().dim(),
        })
        .collect();
    ValidityReport {
        all_a_invertible: modes.iter().all(|v| v.a_invertible),
        all_modes_regular: modes.iter().all(|v| v.regular),
        some_mode_regular: modes.iter().any(|v| v.regular),
        some_b_nonzero: modes.iter().any(|v| v.rank_b > 0),
        modes,
    }
}

const RANDOM_GAIN_ATTEMPTS: usize = 256;
const GAIN_SEED: u64 = 0x5eed_0001;

/// Gains `K_i` (each `p_i x n`) with `A_i + B_i K_i` invertible.
///
/// Tries `K = 0`, then a gain that adds independent columns of `B` onto the
/// dependent columns of `A`, and finally seeded random integer gains.
pub fn feedback_gains(sys: &SwitchedSystem) -> Result<Vec<RationalMatrix>> {
    let mut rng = ChaCha8Rng::seed_from_u64(GAIN_SEED);
    sys.modes()
        .iter()
        .enumerate()
        .map(|(i, md)| {
            if !md.is_regular() {
                return Err(Error::Precondition(format!(
                    "mode {} has Im(A)+Im(B) != R^n, no feedback can make A invertible",
                    i + 1
                )));
            }
            gain_for_mode(md, &mut rng)
                .ok_or_else(|| Error::BudgetExceeded(format!("no invertible A+BK found for mode {}", i + 1)))
        })
        .collect()
}

fn closed_loop(md: &Mode, k: &RationalMatrix) -> RationalMatrix {
    md.a()
        .add(&md.b().mul(k).expect("B is n x p, K is p x n"))
        .expect("same shape")
}

fn gain_for_mode(md: &Mode, rng: &mut ChaCha8Rng) -> Option<RationalMatrix> {
    let n = md.dim();
    let p = md.b().cols();
    let zero = RationalMatrix::zeros(p, n);
    if md.a().rank() == n {
        return Some(zero);
    }
    // Column completion: keep A's independent columns, and route one independent
    // column of B into each dependent column of A.
    let pivots = md.a().pivot_columns();
    let dependent: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let mut span = Subspace::from_vectors_unchecked(n, pivots.iter().map(|&c| md.a().column(c)).collect());
    let mut chosen = Vec::new();
    for j in 0..p {
        if chosen.len() == dependent.len() {
            break;
        }
        let grown = span.sum_unchecked(&Subspace::from_vectors_unchecked(n, vec![md.b().column(j)]));
        if grown.dim() > span.dim() {
            chosen.push(j);
            span = grown;
        }
    }
    if chosen.len() == dependent.len() {
        let mut k = zero.clone();
        for (&col, &j) in dependent.iter().zip(&chosen) {
            k.set(j, col, rat(1));
        }
        if closed_loop(md, &k).rank() == n {
            return Some(k);
        }
    }
    for attempt in 0..RANDOM_GAIN_ATTEMPTS {
        let bound = 1 + (attempt / 32) as i64;
        let mut k = zero.clone();
        for r in 0..p {
            for c in 0..n {
                k.set(r, c, rat(rng.gen_range(-bound..=bound)));
            }
        }
        if closed_loop(md, &k).rank() == n {
            return Some(k);
        }
    }
    None
}

/// Replaces each `A_i` by `A_i + B_i K_i` so that all state matrices are
/// invertible; reachable spaces of every sequence are unchanged.
pub fn feedback_regularize(sys: &SwitchedSystem) -> Result<SwitchedSystem> {
    let gains = feedback_gains(sys)?;
    let modes = sys
        .modes()
        .iter()
        .zip(&gains)
        .map(|(md, k)| Mode::new(closed_loop(md, k), md.b().clone()))
        .collect::<Result<Vec<_>>>()?;
    SwitchedSystem::new(modes)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Text(String),
    Int(i64),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeFile {
    #[serde(rename = "A")]
    a: Vec<Vec<Entry>>,
    #[serde(rename = "B")]
    b: Vec<Vec<Entry>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    n: usize,
    modes: Vec<ModeFile>,
}

fn parse_grid(grid: &[Vec<Entry>], rows: usize, what: &str) -> Result<RationalMatrix> {
    if grid.is_empty() {
        return Ok(RationalMatrix::zeros(rows, 0));
    }
    if grid.len() != rows {
        return Err(Error::InvalidSystem(format!(
            "{what} has {} rows, expected n = {rows}",
            grid.len()
        )));
    }
    let parsed = grid
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| match e {
                    Entry::Text(s) => parse_rational(s),
                    Entry::Int(v) => Ok(rat(*v)),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    RationalMatrix::from_rows(parsed).map_err(|e| Error::InvalidSystem(format!("{what}: {e}")))
}

fn write_grid(m: &RationalMatrix) -> Vec<Vec<Entry>> {
    if m.cols() == 0 {
        return Vec::new();
    }
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|v| Entry::Text(v.to_string())).collect())
        .collect()
}

impl SystemFile {
    fn into_system(self) -> Result<SwitchedSystem> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidSystem("n must be at least 1".into()));
        }
        if self.modes.is_empty() {
            return Err(Error::InvalidSystem("m = 0: at least one mode is required".into()));
        }
        let modes = self
            .modes
            .iter()
            .enumerate()
            .map(|(i, md)| {
                let a = parse_grid(&md.a, n, &format!("mode {} A", i + 1))?;
                if a.cols() != n {
                    return Err(Error::InvalidSystem(format!(
                        "mode {} A is {}x{}, expected {n}x{n}",
                        i + 1,
                        a.rows(),
                        a.cols()
                    )));
                }
                let b = parse_grid(&md.b, n, &format!("mode {} B", i + 1))?;
                Mode::new(a, b)
            })
            .collect::<Result<Vec<_>>>()?;
        SwitchedSystem::new(modes)
    }

    fn from_system(sys: &SwitchedSystem) -> Self {
        Self {
            n: sys.n(),
            modes: sys
                .modes()
                .iter()
                .map(|md| ModeFile {
                    a: write_grid(md.a()),
                    b: write_grid(md.b()),
                })
                .collect(),
        }
    }
}

/// Serializes a matrix as a grid of rational strings (used by CLI reports).
pub fn matrix_to_json(m: &RationalMatrix) -> serde_json::Value {
    serde_json::Value::Array(
        (0..m.rows())
            .map(|i| {
                serde_json::Value::Array(
                    m.row(i)
                        .iter()
                        .map(|v| serde_json::Value::String(v.to_string()))
                        .collect(),
                )
            })
            .collect(),
    )
}
