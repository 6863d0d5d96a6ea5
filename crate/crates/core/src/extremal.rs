//! Extremal families with known shortest controllable lengths, and the
//! weight-function certificate that lower-bounds those lengths.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{RationalMatrix, Subspace};
use crate::system::{Mode, SwitchedSystem};

/// `P_k`: the cyclic shift `e_i ↦ e_{i+1}`, `e_k ↦ e_1`; `P_1 = [1]`.
pub fn cyclic_matrix(k: usize) -> Result<RationalMatrix> {
    if k == 0 {
        return Err(Error::InvalidParameters("cyclic_matrix requires k ≥ 1".into()));
    }
    let mut p = RationalMatrix::zeros(k, k);
    p.set(0, k - 1, crate::linalg::rat(1));
    for i in 1..k {
        p.set(i, i - 1, crate::linalg::rat(1));
    }
    Ok(p)
}

fn id(k: usize) -> RationalMatrix {
    RationalMatrix::identity(k)
}

fn p(k: usize) -> RationalMatrix {
    cyclic_matrix(k).expect("k ≥ 1")
}

/// `diag(Id_{n-m+k-2}, P_2, Id_{m-k})`, or with a zero leading block when `degenerate`.
fn swap_mode_matrix(n: usize, m: usize, k: usize, degenerate: bool) -> RationalMatrix {
    let lead = n + k - m - 2;
    let head = if degenerate {
        RationalMatrix::zeros(lead, lead)
    } else {
        id(lead)
    };
    RationalMatrix::block_diag(&[head, p(2), id(m - k)])
}

fn check_a_range(n: usize, m: usize, name: &str) -> Result<()> {
    if m < 2 || m > n {
        return Err(Error::InvalidParameters(format!(
            "{name} requires 2 ≤ m ≤ n (got n = {n}, m = {m})"
        )));
    }
    Ok(())
}

fn check_rank_range(n: usize, r: usize, m: usize, name: &str) -> Result<()> {
    if r < 1 || m < 2 || m + r > n {
        return Err(Error::InvalidParameters(format!(
            "{name} requires r ≥ 1, m ≥ 2 and m ≤ n − r (got n = {n}, r = {r}, m = {m})"
        )));
    }
    Ok(())
}

fn build(modes: Vec<(RationalMatrix, RationalMatrix)>) -> SwitchedSystem {
    SwitchedSystem::new(
        modes
            .into_iter()
            .map(|(a, b)| Mode::new(a, b).expect("family blocks are consistent"))
            .collect(),
    )
    .expect("family has at least two modes")
}

fn single_input_modes(n: usize, m: usize, degenerate: bool) -> SwitchedSystem {
    let mut modes = vec![(
        RationalMatrix::block_diag(&[p(n - m + 1), id(m - 1)]),
        RationalMatrix::unit_column(n, 0),
    )];
    for k in 2..=m {
        modes.push((swap_mode_matrix(n, m, k, degenerate), RationalMatrix::zeros(n, 1)));
    }
    build(modes)
}

fn rank_modes(n: usize, r: usize, m: usize, degenerate: bool) -> SwitchedSystem {
    let b = id(r).vstack(&RationalMatrix::zeros(n - r, r)).expect("r columns");
    let mut modes = vec![(
        RationalMatrix::block_diag(&[id(r - 1), p(n - r - m + 2), id(m - 1)]),
        b.clone(),
    )];
    for k in 2..=m {
        modes.push((swap_mode_matrix(n, m, k, degenerate), b.clone()));
    }
    build(modes)
}

/// Single-input family attaining `n + m(m-1)/2` (`2 ≤ m ≤ n`).
pub fn family_a(n: usize, m: usize) -> Result<SwitchedSystem> {
    check_a_range(n, m, "family_a")?;
    Ok(single_input_modes(n, m, false))
}

/// `family_a(n, n)` padded with copies of mode 1 up to `m > n` modes; attains `n(n+1)/2`.
pub fn family_b(n: usize, m: usize) -> Result<SwitchedSystem> {
    if n < 2 || m <= n {
        return Err(Error::InvalidParameters(format!(
            "family_b requires n ≥ 2 and m > n (got n = {n}, m = {m})"
        )));
    }
    let mut sys = single_input_modes(n, n, false);
    while sys.m() < m {
        sys = sys.with_duplicated_mode(1)?;
    }
    Ok(sys)
}

/// Rank-`r` family attaining `n − r + 1 + m(m-1)/2` (`r ≥ 1`, `2 ≤ m ≤ n − r`).
pub fn family_rank(n: usize, r: usize, m: usize) -> Result<SwitchedSystem> {
    check_rank_range(n, r, m, "family_rank")?;
    Ok(rank_modes(n, r, m, false))
}

/// [`family_a`] with a zero leading block in modes `2..m` (singular state matrices).
pub fn family_degenerate(n: usize, m: usize) -> Result<SwitchedSystem> {
    check_a_range(n, m, "family_degenerate")?;
    Ok(single_input_modes(n, m, true))
}

/// [`family_rank`] with a zero leading block in modes `2..m`.
pub fn family_degenerate_rank(n: usize, r: usize, m: usize) -> Result<SwitchedSystem> {
    check_rank_range(n, r, m, "family_degenerate_rank")?;
    Ok(rank_modes(n, r, m, true))
}

/// Identifies one of the generated families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyTag {
    SingleInput,
    SingleInputPadded,
    Rank,
    Degenerate,
    DegenerateRank,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 5] = [
        FamilyTag::SingleInput,
        FamilyTag::SingleInputPadded,
        FamilyTag::Rank,
        FamilyTag::Degenerate,
        FamilyTag::DegenerateRank,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyTag::SingleInput => "family-a",
            FamilyTag::SingleInputPadded => "family-b",
            FamilyTag::Rank => "family-rank",
            FamilyTag::Degenerate => "degenerate",
            FamilyTag::DegenerateRank => "degenerate-rank",
        }
    }

    /// Whether the family takes a rank parameter `r`.
    pub fn uses_rank(self) -> bool {
        matches!(self, FamilyTag::Rank | FamilyTag::DegenerateRank)
    }

    fn rank(self, r: Option<usize>) -> Result<usize> {
        r.ok_or_else(|| Error::InvalidParameters(format!("family {} requires a rank r", self.name())))
    }

    pub fn generate(self, n: usize, r: Option<usize>, m: usize) -> Result<SwitchedSystem> {
        match self {
            FamilyTag::SingleInput => family_a(n, m),
            FamilyTag::SingleInputPadded => family_b(n, m),
            FamilyTag::Rank => family_rank(n, self.rank(r)?, m),
            FamilyTag::Degenerate => family_degenerate(n, m),
            FamilyTag::DegenerateRank => family_degenerate_rank(n, self.rank(r)?, m),
        }
    }

    /// Exact minimal controllable-sequence length of the family.
    pub fn minimal_length(self, n: usize, r: Option<usize>, m: usize) -> Result<usize> {
        // validates parameters the same way the generator does
        self.generate(n, r, m)?;
        Ok(match self {
            FamilyTag::SingleInput => n + m * (m - 1) / 2,
            FamilyTag::SingleInputPadded => n * (n + 1) / 2,
            FamilyTag::Rank => n - self.rank(r)? + 1 + m * (m - 1) / 2,
            FamilyTag::Degenerate => (n - m + 1) * m + m * (m - 1) / 2,
            FamilyTag::DegenerateRank => m * (2 * n + 1 - m - 2 * self.rank(r)?) / 2 + 1,
        })
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "thm2a" | "a" | "family-a" => Ok(FamilyTag::SingleInput),
            "thm2b" | "b" | "family-b" => Ok(FamilyTag::SingleInputPadded),
            "thm3" | "rank" | "family-rank" => Ok(FamilyTag::Rank),
            "degenerate" | "family-degenerate" => Ok(FamilyTag::Degenerate),
            "degenerate-rank" | "family-degenerate-rank" => Ok(FamilyTag::DegenerateRank),
            other => Err(Error::InvalidParameters(format!(
                "unknown family {other:?} (expected family-a, family-b, family-rank, degenerate or degenerate-rank)"
            ))),
        }
    }
}

/// Nonnegative integer weight per canonical basis vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightVector(pub Vec<u64>);

impl WeightVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Weight of `span{e_i : i ∈ support}` (0-based indices).
    pub fn of_support(&self, support: &[usize]) -> u64 {
        support.iter().map(|&i| self.0[i]).sum()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

/// The weight table matching a family's structure. `r` is ignored by
/// single-input families.
pub fn canonical_weights(tag: FamilyTag, n: usize, r: Option<usize>, m: usize) -> Result<WeightVector> {
    tag.generate(n, r, m)?;
    // 1-based basis index i
    let weights = (1..=n).map(|i| -> u64 {
        match tag {
            FamilyTag::SingleInput | FamilyTag::SingleInputPadded => {
                let m = m.min(n);
                if i <= n - m + 1 {
                    1
                } else {
                    (i + m - n) as u64
                }
            }
            FamilyTag::Degenerate => {
                if i <= n - m + 1 {
                    1
                } else {
                    i as u64
                }
            }
            FamilyTag::Rank | FamilyTag::DegenerateRank => {
                let r = r.expect("validated above");
                if i < r {
                    0
                } else if i <= n - m + 1 {
                    1
                } else if tag == FamilyTag::Rank {
                    (i + m - n) as u64
                } else {
                    (i - r) as u64
                }
            }
        }
    });
    Ok(WeightVector(weights.collect()))
}

/// A coordinate subspace and mode on which the weight grows by more than one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateViolation {
    /// 0-based coordinate indices of the source subspace.
    pub source: Vec<usize>,
    /// 1-based mode index.
    pub mode: usize,
    pub target: Vec<usize>,
    pub weight_before: u64,
    pub weight_after: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertificateReport {
    /// No violations: every controllable sequence has length ≥ `lower_bound`.
    pub holds: bool,
    /// `ν(R^n)`.
    pub lower_bound: u64,
    pub pairs_checked: usize,
    pub violations: Vec<CertificateViolation>,
}

const MAX_CERTIFICATE_DIM: usize = 20;

/// Bitmask of `∩_k Im B_k` if every `Im B_k` is a coordinate subspace, else 0.
fn common_input_support(sys: &SwitchedSystem) -> u64 {
    let mut floor = u64::MAX;
    for md in sys.modes() {
        match md.image_b().coordinate_support() {
            Some(support) => floor &= support.iter().fold(0u64, |acc, &i| acc | 1 << i),
            None => return 0,
        }
    }
    floor
}

/// Checks `ν(A_k S + Im B_k) ≤ ν(S) + 1` for every mode `k` and every
/// coordinate subspace `S` that can occur as some `R(π)`: the zero space and
/// the coordinate subspaces containing `∩_k Im B_k` (when that intersection is
/// itself coordinate). This makes `ν(R^n)` a lower bound on the length of any
/// controllable sequence.
pub fn verify_weight_certificate(sys: &SwitchedSystem, weights: &WeightVector) -> Result<CertificateReport> {
    let n = sys.n();
    if weights.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for a system of dimension {n}",
            weights.len()
        )));
    }
    if n > MAX_CERTIFICATE_DIM {
        return Err(Error::BudgetExceeded(format!(
            "exhaustive certificate check limited to n ≤ {MAX_CERTIFICATE_DIM}"
        )));
    }
    let floor = common_input_support(sys);
    let masks: Vec<u64> = (0u64..1 << n)
        .filter(|&mask| mask == 0 || mask & floor == floor)
        .collect();
    let per_mask: Vec<Result<Vec<CertificateViolation>>> = masks
        .par_iter()
        .map(|&mask| {
            let source: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let space = Subspace::coordinate(n, source.iter().copied());
            let before = weights.of_support(&source);
            let mut found = Vec::new();
            for (k, md) in sys.modes().iter().enumerate() {
                let image = md.step(&space);
                let target = image.coordinate_support().ok_or_else(|| {
                    Error::CertificateInapplicable(format!(
                        "mode {} maps {space} to {image}, which is not a coordinate subspace",
                        k + 1
                    ))
                })?;
                let after = weights.of_support(&target);
                if after > before + 1 {
                    found.push(CertificateViolation {
                        source: source.clone(),
                        mode: k + 1,
                        target,
                        weight_before: before,
                        weight_after: after,
                    });
                }
            }
            Ok(found)
        })
        .collect();
    let mut violations = Vec::new();
    for v in per_mask {
        violations.extend(v?);
    }
    Ok(CertificateReport {
        holds: violations.is_empty(),
        lower_bound: weights.total(),
        pairs_checked: masks.len() * sys.m(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::single_mode;
    use crate::system::validate;

    #[test]
    fn cyclic_matrices() {
        assert_eq!(cyclic_matrix(1).unwrap(), RationalMatrix::identity(1));
        assert_eq!(cyclic_matrix(2).unwrap(), RationalMatrix::from_ints(&[[0, 1], [1, 0]]));
        assert!(cyclic_matrix(0).is_err());
        for k in 1..=6 {
            let pk = cyclic_matrix(k).unwrap();
            assert_eq!(pk.pow(k as u32).unwrap(), RationalMatrix::identity(k));
            assert!(pk.is_invertible().unwrap());
            if k > 1 {
                assert_ne!(pk.pow(k as u32 - 1).unwrap(), RationalMatrix::identity(k));
            }
        }
    }

    #[test]
    fn family_a_shape() {
        let sys = family_a(3, 2).unwrap();
        assert_eq!(
            sys.modes()[0].a(),
            &RationalMatrix::from_ints(&[[0, 1, 0], [1, 0, 0], [0, 0, 1]])
        );
        assert_eq!(
            sys.modes()[1].a(),
            &RationalMatrix::from_ints(&[[1, 0, 0], [0, 0, 1], [0, 1, 0]])
        );
        assert!(sys.all_a_invertible());
        // n = m uses P_1 = [1] in the first block
        let square = family_a(3, 3).unwrap();
        assert_eq!(square.modes()[0].a(), &RationalMatrix::identity(3));
        assert!(family_a(3, 1).is_err());
        let err = family_a(2, 3).unwrap_err().to_string();
        assert!(err.contains("2 ≤ m ≤ n"), "{err}");
    }

    #[test]
    fn family_rank_shape() {
        let sys = family_rank(5, 2, 3).unwrap();
        assert!(sys.all_a_invertible());
        for md in sys.modes() {
            assert_eq!(md.image_b().dim(), 2);
        }
        assert!(family_rank(4, 2, 3).is_err());
        assert!(family_rank(4, 0, 2).is_err());
    }

    #[test]
    fn degenerate_shape() {
        let sys = family_degenerate(3, 2).unwrap();
        assert!(!sys.modes()[1].a().is_invertible().unwrap());
        let report = validate(&sys);
        assert!(report.modes[0].regular);
        assert!(!report.all_a_invertible);
        let dr = family_degenerate_rank(5, 1, 2).unwrap();
        assert!(!dr.all_a_invertible());
        assert!(dr.modes().iter().all(|md| md.image_b().dim() == 1));
    }

    #[test]
    fn closed_forms() {
        assert_eq!(FamilyTag::SingleInput.minimal_length(3, None, 2).unwrap(), 4);
        assert_eq!(FamilyTag::SingleInput.minimal_length(4, None, 3).unwrap(), 7);
        assert_eq!(FamilyTag::Rank.minimal_length(4, Some(1), 2).unwrap(), 5);
        assert_eq!(FamilyTag::Rank.minimal_length(5, Some(2), 3).unwrap(), 7);
        assert_eq!(FamilyTag::Degenerate.minimal_length(3, None, 2).unwrap(), 5);
        assert_eq!(FamilyTag::Degenerate.minimal_length(4, None, 2).unwrap(), 7);
        assert_eq!(FamilyTag::DegenerateRank.minimal_length(4, Some(1), 2).unwrap(), 6);
        assert_eq!(FamilyTag::DegenerateRank.minimal_length(5, Some(1), 2).unwrap(), 8);
        assert_eq!(FamilyTag::SingleInputPadded.minimal_length(3, None, 5).unwrap(), 6);
        assert!(FamilyTag::Rank.minimal_length(5, None, 2).is_err());
    }

    #[test]
    fn canonical_weight_tables() {
        assert_eq!(
            canonical_weights(FamilyTag::SingleInput, 4, None, 3).unwrap().0,
            vec![1, 1, 2, 3]
        );
        assert_eq!(
            canonical_weights(FamilyTag::Degenerate, 4, None, 2).unwrap().0,
            vec![1, 1, 1, 4]
        );
        assert_eq!(
            canonical_weights(FamilyTag::Rank, 4, Some(2), 2).unwrap().0,
            vec![0, 1, 1, 2]
        );
        assert_eq!(
            canonical_weights(FamilyTag::SingleInput, 3, None, 2).unwrap().0,
            vec![1, 1, 2]
        );
        assert_eq!(
            canonical_weights(FamilyTag::SingleInputPadded, 3, None, 4).unwrap().0,
            vec![1, 2, 3]
        );
    }

    #[test]
    fn certificates() {
        let report = verify_weight_certificate(&family_a(3, 2).unwrap(), &WeightVector(vec![1, 1, 2])).unwrap();
        assert!(report.holds);
        assert_eq!(report.lower_bound, 4);
        assert_eq!(report.pairs_checked, 16);

        let rank_sys = family_rank(4, 1, 2).unwrap();
        let w = canonical_weights(FamilyTag::Rank, 4, Some(1), 2).unwrap();
        let report = verify_weight_certificate(&rank_sys, &w).unwrap();
        assert!(report.holds, "{:?}", report.violations);
        assert_eq!(report.lower_bound, 5);
        // zero space plus the 8 supersets of {e1}
        assert_eq!(report.pairs_checked, 18);

        let trivial = single_mode(RationalMatrix::identity(3), RationalMatrix::unit_column(3, 0));
        let report = verify_weight_certificate(&trivial, &WeightVector(vec![1, 0, 0])).unwrap();
        assert!(report.holds);
        assert_eq!(report.lower_bound, 1);
    }

    #[test]
    fn certificate_failures() {
        // weight 5 on e1 jumps by 5 on the first step
        let trivial = single_mode(RationalMatrix::identity(2), RationalMatrix::unit_column(2, 0));
        let report = verify_weight_certificate(&trivial, &WeightVector(vec![5, 0])).unwrap();
        assert!(!report.holds);
        assert_eq!(report.violations[0].source, Vec::<usize>::new());
        assert_eq!(report.violations[0].mode, 1);

        let rotation = single_mode(
            RationalMatrix::from_ints(&[[1, 1], [0, 1]]),
            RationalMatrix::zeros(2, 1),
        );
        assert!(matches!(
            verify_weight_certificate(&rotation, &WeightVector(vec![1, 1])),
            Err(Error::CertificateInapplicable(_))
        ));
        assert!(verify_weight_certificate(&trivial, &WeightVector(vec![1])).is_err());
    }

    #[test]
    fn tags_parse() {
        for tag in FamilyTag::ALL {
            assert_eq!(tag.name().parse::<FamilyTag>().unwrap(), tag);
        }
        assert!("nope".parse::<FamilyTag>().is_err());
    }
}
