//! Reduction of a system whose input matrices share a rank-`r` image to an
//! `(n − r)`-dimensional switched system.
//!
//! After a basis change putting `V_1` on the first `r` coordinates, a shear
//! `Q = (Id_r, P; 0, Id_{n-r})` is chosen so that every bottom-right block of
//! `Q⁻¹ A_k Q` is invertible. The trailing coordinates then evolve as
//! `x̂_j = Â_k x̂_{j-1} + B̂_k û_j`, where `B̂_k` is the bottom-left block and
//! `û_j` is the previous leading state, which the real input steers freely.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{rat, RationalMatrix, Subspace};
use crate::reach::v_chain;
use crate::system::{Mode, SwitchedSystem};

/// How a shear was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformOrigin {
    /// `D` already invertible, `P = 0`.
    Zero,
    /// Column completion: one column of `C` added onto each dependent column of `D`.
    Constructive,
    /// Seeded random sampling.
    Random,
    /// Supplied by the caller.
    Given,
}

/// The shear `Q = (Id_r, P; 0, Id_{n-r})`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockTransform {
    r: usize,
    p: RationalMatrix,
    origin: TransformOrigin,
}

impl BlockTransform {
    pub fn new(n: usize, p: RationalMatrix) -> Result<Self> {
        let r = p.rows();
        if r == 0 || r >= n || p.cols() != n - r {
            return Err(Error::DimensionMismatch(format!(
                "P must be r x (n-r) with 1 ≤ r < n; got {}x{} for n = {n}",
                p.rows(),
                p.cols()
            )));
        }
        Ok(Self {
            r,
            p,
            origin: TransformOrigin::Given,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.r + self.p.cols()
    }

    pub fn p(&self) -> &RationalMatrix {
        &self.p
    }

    pub fn origin(&self) -> TransformOrigin {
        self.origin
    }

    fn assemble(&self, p: &RationalMatrix) -> RationalMatrix {
        let top = RationalMatrix::identity(self.r).hstack(p).expect("r rows");
        let bottom = RationalMatrix::zeros(self.n() - self.r, self.r)
            .hstack(&RationalMatrix::identity(self.n() - self.r))
            .expect("n-r rows");
        top.vstack(&bottom).expect("n columns")
    }

    pub fn q(&self) -> RationalMatrix {
        self.assemble(&self.p)
    }

    /// `Q⁻¹ = (Id_r, −P; 0, Id_{n-r})`.
    pub fn q_inv(&self) -> RationalMatrix {
        self.assemble(&self.p.neg())
    }

    /// `Q⁻¹ M Q`.
    pub fn conjugate(&self, m: &RationalMatrix) -> Result<RationalMatrix> {
        self.q_inv().mul(m)?.mul(&self.q())
    }

    /// Bottom-right `(n−r) x (n−r)` block of `Q⁻¹ M Q`, which equals `C P + D`.
    pub fn trailing_block(&self, m: &RationalMatrix) -> Result<RationalMatrix> {
        let n = self.n();
        Ok(self.conjugate(m)?.block(self.r..n, self.r..n))
    }
}

fn check_shape(m: &RationalMatrix, r: usize) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    if r == 0 || r >= m.rows() {
        return Err(Error::InvalidParameters(format!(
            "block size r must satisfy 1 ≤ r < n (got r = {r}, n = {})",
            m.rows()
        )));
    }
    Ok(())
}

/// Column-completion choice of `P` for one matrix, without the random fallback.
fn constructive_p(m: &RationalMatrix, r: usize) -> Option<(RationalMatrix, TransformOrigin)> {
    let n = m.rows();
    let c = m.block(r..n, 0..r);
    let d = m.block(r..n, r..n);
    let mut p = RationalMatrix::zeros(r, n - r);
    let independent = d.pivot_columns();
    if independent.len() == n - r {
        return Some((p, TransformOrigin::Zero));
    }
    let dependent: Vec<usize> = (0..n - r).filter(|i| !independent.contains(i)).collect();
    let mut span = Subspace::from_vectors_unchecked(n - r, independent.iter().map(|&j| d.column(j)).collect());
    let mut chosen = Vec::new();
    for j in 0..r {
        if chosen.len() == dependent.len() {
            break;
        }
        let grown = span.sum_unchecked(&Subspace::from_vectors_unchecked(n - r, vec![c.column(j)]));
        if grown.dim() > span.dim() {
            chosen.push(j);
            span = grown;
        }
    }
    if chosen.len() < dependent.len() {
        return None;
    }
    for (&i, &j) in dependent.iter().zip(&chosen) {
        p.set(j, i, rat(1));
    }
    Some((p, TransformOrigin::Constructive))
}

fn trailing_invertible(m: &RationalMatrix, r: usize, p: &RationalMatrix) -> bool {
    let n = m.rows();
    let c = m.block(r..n, 0..r);
    let d = m.block(r..n, r..n);
    c.mul(p)
        .and_then(|cp| cp.add(&d))
        .map(|t| t.rank() == n - r)
        .unwrap_or(false)
}

const RANDOM_ROUNDS: usize = 12;
const ATTEMPTS_PER_ROUND: usize = 16;
const TRANSFORM_SEED: u64 = 0x51ab_5eed;

fn random_p(rng: &mut ChaCha8Rng, r: usize, cols: usize, bound: i64) -> RationalMatrix {
    let mut p = RationalMatrix::zeros(r, cols);
    for i in 0..r {
        for j in 0..cols {
            p.set(i, j, rat(rng.gen_range(-bound..=bound)));
        }
    }
    p
}

fn search_common_p(matrices: &[&RationalMatrix], r: usize, seed: u64) -> Result<BlockTransform> {
    let n = matrices[0].rows();
    let works = |p: &RationalMatrix| matrices.iter().all(|m| trailing_invertible(m, r, p));
    for m in matrices {
        if let Some((p, origin)) = constructive_p(m, r) {
            if works(&p) {
                return Ok(BlockTransform { r, p, origin });
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bound = 1i64;
    for _ in 0..RANDOM_ROUNDS {
        for _ in 0..ATTEMPTS_PER_ROUND {
            let p = random_p(&mut rng, r, n - r, bound);
            if works(&p) {
                return Ok(BlockTransform {
                    r,
                    p,
                    origin: TransformOrigin::Random,
                });
            }
        }
        bound *= 2;
    }
    Err(Error::BudgetExceeded(format!(
        "no shear with invertible trailing blocks found after {} attempts",
        RANDOM_ROUNDS * ATTEMPTS_PER_ROUND
    )))
}

/// A shear whose trailing block `C P + D` of `Q⁻¹ M Q` is invertible.
pub fn find_block_transform(m: &RationalMatrix, r: usize) -> Result<BlockTransform> {
    check_shape(m, r)?;
    if !m.is_invertible()? {
        return Err(Error::Precondition("matrix must be invertible".into()));
    }
    search_common_p(&[m], r, TRANSFORM_SEED)
}

/// One shear making every mode's trailing block invertible at once.
pub fn find_common_transform(sys: &SwitchedSystem, r: usize) -> Result<BlockTransform> {
    find_common_transform_seeded(sys, r, TRANSFORM_SEED)
}

pub fn find_common_transform_seeded(sys: &SwitchedSystem, r: usize, seed: u64) -> Result<BlockTransform> {
    if !sys.all_a_invertible() {
        return Err(Error::Precondition("every A_k must be invertible".into()));
    }
    let matrices: Vec<&RationalMatrix> = sys.modes().iter().map(Mode::a).collect();
    check_shape(matrices[0], r)?;
    search_common_p(&matrices, r, seed)
}

/// Output of [`reduce_rank_system`].
#[derive(Clone, Debug)]
pub struct Reduction {
    pub r: usize,
    /// The `(n − r)`-dimensional system `(Â_k, B̂_k)`.
    pub reduced: SwitchedSystem,
    pub transform: BlockTransform,
    /// `T` with `V_1 = T · span{e_1..e_r}`.
    pub basis_change: RationalMatrix,
    /// Each `A_k` in the combined coordinates `(T Q)⁻¹ A_k (T Q)`.
    pub transformed: Vec<RationalMatrix>,
}

pub fn reduce_rank_system(sys: &SwitchedSystem) -> Result<Reduction> {
    reduce_rank_system_seeded(sys, TRANSFORM_SEED)
}

pub fn reduce_rank_system_seeded(sys: &SwitchedSystem, seed: u64) -> Result<Reduction> {
    let n = sys.n();
    if !sys.all_a_invertible() {
        return Err(Error::Precondition("reduction requires every A_k invertible".into()));
    }
    let ranks: Vec<usize> = sys.modes().iter().map(|md| md.image_b().dim()).collect();
    let r = ranks[0];
    if ranks.iter().any(|&k| k != r) {
        return Err(Error::Precondition(format!(
            "input ranks differ across modes ({ranks:?}); the reduction needs every Im(B_k) equal \
             to V_1 (when dim V_1 > r the bound follows from the direct prefix argument instead)"
        )));
    }
    if r == 0 || r >= n {
        return Err(Error::Precondition(format!(
            "reduction needs 1 ≤ r < n (got r = {r}, n = {n})"
        )));
    }
    let v1 = v_chain(sys).spaces[0].clone();
    if v1.dim() != r {
        return Err(Error::Precondition(format!(
            "dim V_1 = {} > r = {r}: the images of the B_k differ, so the reduction does not apply \
             (that case is bounded by the direct prefix argument)",
            v1.dim()
        )));
    }
    // T = [basis of V_1 | complementary unit vectors]
    let pivots = v1.pivots();
    let mut columns: Vec<Vec<_>> = v1.basis().to_vec();
    for j in (0..n).filter(|j| !pivots.contains(j)) {
        let mut e = vec![rat(0); n];
        e[j] = rat(1);
        columns.push(e);
    }
    let t = RationalMatrix::from_rows(columns)?.transpose();
    let t_inv = t.inverse()?.expect("pivot completion is a basis");
    let moved: Vec<RationalMatrix> = sys
        .modes()
        .iter()
        .map(|md| t_inv.mul(md.a())?.mul(&t))
        .collect::<Result<_>>()?;
    let moved_sys = SwitchedSystem::from_pairs(
        moved
            .iter()
            .zip(sys.modes())
            .map(|(a, md)| Ok((a.clone(), t_inv.mul(md.b())?)))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let transform = find_common_transform_seeded(&moved_sys, r, seed)?;
    let mut reduced_modes = Vec::with_capacity(sys.m());
    let mut transformed = Vec::with_capacity(sys.m());
    for a in &moved {
        let conj = transform.conjugate(a)?;
        let a_hat = conj.block(r..n, r..n);
        let b_hat = conj.block(r..n, 0..r);
        reduced_modes.push(Mode::new(a_hat, b_hat)?);
        transformed.push(conj);
    }
    Ok(Reduction {
        r,
        reduced: SwitchedSystem::new(reduced_modes)?,
        transform,
        basis_change: t,
        transformed,
    })
}
