//! Reachable spaces of switching sequences and the reachable set of a system.

use crate::error::{Error, Result};
use crate::linalg::{RationalMatrix, Subspace};
use crate::system::{feedback_regularize, ModeSequence, SwitchedSystem};

/// Default cap on the number of terms in [`ge_characterization`].
pub const GE_DEFAULT_BUDGET: u64 = 1_000_000;

/// `R(π)`, the states reachable from the origin at time `|π|` along `π`.
///
/// Evaluated as the left fold `W ← A_σ W + Im(B_σ)` in time order.
pub fn reachable_space_of_sequence(sys: &SwitchedSystem, seq: &ModeSequence) -> Result<Subspace> {
    sys.check_sequence(seq)?;
    Ok(seq
        .indices()
        .iter()
        .fold(Subspace::zero(sys.n()), |w, &s| sys.modes()[s - 1].step(&w)))
}

/// State-transition matrix `A_π = A_{i_k} ⋯ A_{i_1}`; identity for the empty word.
pub fn transition_matrix(sys: &SwitchedSystem, seq: &ModeSequence) -> Result<RationalMatrix> {
    sys.check_sequence(seq)?;
    seq.indices()
        .iter()
        .try_fold(RationalMatrix::identity(sys.n()), |acc, &s| {
            sys.modes()[s - 1].a().mul(&acc)
        })
}

/// Checks `R(π1 π2) = A_{π2} R(π1) + R(π2)`. Always true; exposed as a self-test.
pub fn concat_identity_check(sys: &SwitchedSystem, first: &ModeSequence, second: &ModeSequence) -> Result<bool> {
    let joined = reachable_space_of_sequence(sys, &first.concat(second))?;
    let moved = reachable_space_of_sequence(sys, first)?.image(&transition_matrix(sys, second)?)?;
    let rhs = moved.sum(&reachable_space_of_sequence(sys, second)?)?;
    Ok(joined == rhs)
}

/// The nested chain `V_1 ⊆ V_2 ⊆ …` up to its fixed point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VChain {
    /// `V_1, …, V_ℓ`; the next iterate equals the last entry.
    pub spaces: Vec<Subspace>,
    /// Fixed-point index `ℓ`.
    pub ell: usize,
    /// Every `B_i` is zero, so `V_1 = {0}` and the chain is trivial.
    pub all_b_zero: bool,
}

impl VChain {
    pub fn dims(&self) -> Vec<usize> {
        self.spaces.iter().map(Subspace::dim).collect()
    }

    pub fn fixed_point(&self) -> &Subspace {
        self.spaces.last().expect("chain is never empty")
    }

    /// `V_k` for `k ≥ 1` (constant past `ℓ`); `V_0 = {0}`.
    pub fn space(&self, k: usize) -> Subspace {
        match k {
            0 => Subspace::zero(self.fixed_point().ambient_dim()),
            k => self.spaces[(k - 1).min(self.spaces.len() - 1)].clone(),
        }
    }
}

/// `V_1 = Σ Im(B_i)`, `V_{k+1} = V_k + Σ A_i V_k`, iterated to its fixed point.
pub fn v_chain(sys: &SwitchedSystem) -> VChain {
    let n = sys.n();
    let first = sys
        .modes()
        .iter()
        .fold(Subspace::zero(n), |acc, md| acc.sum_unchecked(md.image_b()));
    let all_b_zero = first.is_zero();
    let mut spaces = vec![first];
    loop {
        let current = spaces.last().expect("nonempty");
        let next = sys.modes().iter().fold(current.clone(), |acc, md| {
            acc.sum_unchecked(&current.image(md.a()).expect("square"))
        });
        if &next == current {
            break;
        }
        spaces.push(next);
    }
    let ell = spaces.len();
    debug_assert!(all_b_zero || ell <= n);
    VChain {
        spaces,
        ell,
        all_b_zero,
    }
}

/// The reachable set `R`, equal to the fixed point `V_ℓ` when all `A_i` are invertible.
///
/// Systems with singular `A_i` are accepted when every mode has
/// `Im(A_i) + Im(B_i) = R^n`; they are feedback-regularized first, which
/// leaves every `R(π)` unchanged.
pub fn reachable_set(sys: &SwitchedSystem) -> Result<Subspace> {
    if sys.all_a_invertible() {
        return Ok(v_chain(sys).fixed_point().clone());
    }
    if sys.all_modes_regular() {
        let regular = feedback_regularize(sys)?;
        return Ok(v_chain(&regular).fixed_point().clone());
    }
    Err(Error::Precondition(
        "some A_i is singular and Im(A_i)+Im(B_i) != R^n for some mode; the fixed-point \
         characterization needs invertible state matrices (or the relaxed rank condition), \
         so the reachable set is not decided here"
            .into(),
    ))
}

pub fn is_controllable(sys: &SwitchedSystem) -> Result<bool> {
    Ok(reachable_set(sys)?.is_full())
}

/// Classical Kalman space `Im(B, AB, …, A^{n-1}B)` of a single pair.
pub fn kalman_space(a: &RationalMatrix, b: &RationalMatrix) -> Result<Subspace> {
    let n = a.rows();
    let mut block = b.clone();
    let mut acc = b.clone();
    for _ in 1..n {
        block = a.mul(&block)?;
        acc = acc.hstack(&block)?;
    }
    Ok(Subspace::column_space(&acc))
}

/// Brute-force sum `Σ A_{i_n}^{j_n} ⋯ A_{i_1}^{j_1} Im(B_{i_1})` over
/// `i_k ∈ {1..m}`, `j_k ∈ {0..n-1}`. Only intended as a cross-check at tiny sizes.
pub fn ge_characterization(sys: &SwitchedSystem, budget: u64) -> Result<Subspace> {
    if !sys.all_a_invertible() {
        return Err(Error::Precondition(
            "the term-sum formula assumes every A_i invertible".into(),
        ));
    }
    let n = sys.n();
    let m = sys.m();
    let terms = (m as u64)
        .checked_pow(n as u32)
        .and_then(|a| (n as u64).checked_pow(n as u32).and_then(|b| a.checked_mul(b)));
    match terms {
        Some(t) if t <= budget => {}
        _ => {
            return Err(Error::BudgetExceeded(format!(
                "m^n * n^n terms exceed the budget of {budget}; use reachable_set instead"
            )))
        }
    }
    // powers[i][j] = A_i^j
    let powers: Vec<Vec<RationalMatrix>> = sys
        .modes()
        .iter()
        .map(|md| (0..n as u32).map(|j| md.a().pow(j)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut total = Subspace::zero(n);
    let mut modes = vec![0usize; n];
    let mut exps = vec![0usize; n];
    loop {
        let mut product = sys.modes()[modes[0]].b().clone();
        for k in 0..n {
            product = powers[modes[k]][exps[k]].mul(&product)?;
        }
        total = total.sum_unchecked(&Subspace::column_space(&product));
        if !advance(&mut exps, n) && !advance(&mut modes, m) {
            break;
        }
    }
    Ok(total)
}

/// Odometer increment over `{0..radix-1}^len`; false after wrapping to all zeros.
fn advance(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}
