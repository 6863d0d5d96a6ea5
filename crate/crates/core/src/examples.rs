//! Small reference systems used in tests, benches and the CLI docs.

use crate::linalg::RationalMatrix;
use crate::system::SwitchedSystem;

/// Three-dimensional, two-mode system whose shortest controllable sequences
/// have length 6 (`122121`, `121121`, `121221`).
pub fn cycle_swap() -> SwitchedSystem {
    let a1 = RationalMatrix::from_ints(&[[1, 0, 0], [0, 0, 1], [0, 1, 0]]);
    let a2 = RationalMatrix::from_ints(&[[0, 0, 1], [1, 0, 0], [0, 1, 0]]);
    let b1 = RationalMatrix::from_ints(&[[1], [0], [0]]);
    let b2 = RationalMatrix::from_ints(&[[0], [0], [0]]);
    SwitchedSystem::from_pairs(vec![(a1, b1), (a2, b2)]).expect("well-formed")
}

/// Single-mode system `(A, B)`.
pub fn single_mode(a: RationalMatrix, b: RationalMatrix) -> SwitchedSystem {
    SwitchedSystem::from_pairs(vec![(a, b)]).expect("well-formed")
}
