//! Defender-side geometric control: the maximal (A,B)-invariant subspace
//! inside `Ker C`, the fixed-point iteration that computes it, and friend
//! matrices rendering it invariant under `A+BF`.

use crate::ratmat::{Matrix, Subspace};
use crate::{Error, Result};

/// Outcome of the invariant-subspace iteration.
#[derive(Clone, Debug)]
pub struct VStarResult {
    pub vstar: Subspace,
    /// Number of refinement steps executed before the fixed point.
    pub iterations: usize,
    /// dim V₀, dim V₁, …, non-increasing, ending at the fixed point.
    pub iterate_dims: Vec<usize>,
}

/// Maximal (A,B)-invariant subspace contained in `Ker C`.
///
/// V₀ = Ker C; V_{i+1} = Ker C ∩ {x : Ax ∈ V_i + Im B}, realized as the
/// kernel of `[C; Z_i A]` where the rows of `Z_i` annihilate `[V_i B]`.
/// The dimensions strictly decrease until the fixed point, which is
/// reached within dim Ker C + 1 steps.
pub fn vstar(a: &Matrix, b: &Matrix, c: &Matrix) -> VStarResult {
    assert_eq!(a.rows(), a.cols(), "state matrix must be square");
    assert_eq!(b.rows(), a.rows(), "input matrix row mismatch");
    assert_eq!(c.cols(), a.rows(), "output matrix column mismatch");
    let mut v = c.kernel_basis();
    let mut dims = vec![v.dim()];
    let mut iterations = 0usize;
    loop {
        let vb = v.basis().hstack(b);
        let z = Subspace::span_of_columns(&vb).left_annihilator_rows();
        let next = if z.rows() == 0 {
            // Im [V B] is everything; the constraint is vacuous
            c.kernel_basis()
        } else {
            c.vstack(&(&z * a)).kernel_basis()
        };
        iterations += 1;
        dims.push(next.dim());
        let fixed = next.dim() == v.dim();
        v = next;
        if fixed {
            break;
        }
    }
    VStarResult {
        vstar: v,
        iterations,
        iterate_dims: dims,
    }
}

/// A feedback F with `(A+BF)·V ⊆ V`, built by the two pseudoinverse
/// solves `[X; U] = pinv([V B])·AV` (U = bottom k rows) and
/// `F = −U·pinv(V)`.
///
/// The zero subspace admits every feedback; the canonical representative
/// returned for it is `F = 0`. Errors with [`Error::NotInvariant`] when
/// `AV ⊄ Im[V B]`, i.e. the subspace is not (A,B)-invariant.
pub fn friend(a: &Matrix, b: &Matrix, v: &Subspace) -> Result<Matrix> {
    let n = a.rows();
    let k = b.cols();
    if v.is_zero() {
        return Ok(Matrix::zeros(k, n));
    }
    let vb = v.basis().hstack(b);
    let av = a * v.basis();
    if vb.hstack(&av).rank() != vb.rank() {
        return Err(Error::NotInvariant);
    }
    let xu = &vb.pinv() * &av;
    let r = v.dim();
    let u = Matrix::from_fn(k, r, |i, j| xu[(r + i, j)].clone());
    Ok(-&(&u * &v.basis().pinv()))
}

/// Rank test for `(A+BF)·V ⊆ V`, column by column.
pub fn is_friend(a: &Matrix, b: &Matrix, f: &Matrix, v: &Subspace) -> bool {
    if v.is_zero() {
        return true;
    }
    let closed = a + &(b * f);
    v.contains_columns(&(&closed * v.basis()))
}

/// Dimension of the unobservable subspace of the pair `(C, M)`: the
/// kernel of the stacked observability matrix `[C; CM; …; CM^{n-1}]`.
pub fn unobservable_dim(c: &Matrix, m: &Matrix) -> usize {
    observability_kernel(c, m).dim()
}

/// The unobservable subspace itself.
pub fn observability_kernel(c: &Matrix, m: &Matrix) -> Subspace {
    assert!(m.is_square());
    assert_eq!(c.cols(), m.rows());
    let n = m.rows();
    let mut stacked = c.clone();
    let mut row = c.clone();
    for _ in 1..n {
        row = &row * m;
        stacked = stacked.vstack(&row);
    }
    stacked.kernel_basis()
}
