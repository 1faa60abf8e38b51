//! Relative degree and the normal-form reduction.
//!
//! For a square-channel system (A₀, B₁, C₀) with a relative degree, the
//! coordinate change stacks the output chains ξⁱ_j = cᵢA₀^{j-1}x̃ followed
//! by complement rows pᵢ annihilating B₁. In these coordinates the first
//! input drives only the chain ends, and when `Im B₂` lies inside the
//! maximal invariant subspace of `Ker C₀`, the second input drives only
//! the internal z-dynamics.

use crate::ratmat::{Matrix, Subspace};
use crate::{Error, Result};
use num_traits::Zero;

/// Blocks of the normal form. Row order of `t_nf`: the m output chains
/// (lengths r₁, …, r_m), then the n₀−s complement rows.
#[derive(Clone, Debug)]
pub struct NormalFormModel {
    /// Relative degree of each output channel.
    pub r: Vec<usize>,
    /// Total chain length s = Σ rᵢ.
    pub s: usize,
    /// The invertible coordinate change.
    pub t_nf: Matrix,
    /// z-dynamics block ((n₀−s) × (n₀−s)).
    pub z_dynamics: Matrix,
    /// Coupling from the chain coordinates into ż ((n₀−s) × s).
    pub xi_to_z: Matrix,
    /// Chain-end coupling from z (m × (n₀−s)).
    pub z_to_chain_ends: Matrix,
    /// Chain-end coupling from ξ (m × s).
    pub xi_to_chain_ends: Matrix,
    /// Decoupling matrix (m × m, nonsingular).
    pub decoupling: Matrix,
    /// Second input as seen by the z-dynamics ((n₀−s) × k).
    pub b2_z: Matrix,
    /// Whether `Im B₂` stays out of every chain coordinate (equivalently,
    /// Im B₂ ⊆ V*). Reported, not fatal.
    pub hypothesis_holds: bool,
}

/// Per-output relative degree: the smallest rᵢ with cᵢA₀^{rᵢ-1}B₁ ≠ 0 and
/// all lower powers zero, requiring a square channel count and a
/// nonsingular decoupling matrix.
pub fn relative_degree(a0: &Matrix, b1: &Matrix, c0: &Matrix) -> Result<Vec<usize>> {
    let n = a0.rows();
    let m = c0.rows();
    if b1.cols() != m {
        return Err(Error::NoRelativeDegree);
    }
    let mut degrees = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = Matrix::from_rows(vec![c0.row(i)]);
        let mut found = None;
        for power in 1..=n {
            if !(&row * b1).is_zero() {
                found = Some(power);
                break;
            }
            row = &row * a0;
        }
        match found {
            Some(r) => degrees.push(r),
            None => return Err(Error::NoRelativeDegree),
        }
    }
    if decoupling_matrix(a0, b1, c0, &degrees).inverse().is_none() {
        return Err(Error::NoRelativeDegree);
    }
    Ok(degrees)
}

fn decoupling_matrix(a0: &Matrix, b1: &Matrix, c0: &Matrix, r: &[usize]) -> Matrix {
    let mut rows = Vec::new();
    for (i, &ri) in r.iter().enumerate() {
        let ci = Matrix::from_rows(vec![c0.row(i)]);
        rows.push((&(&ci * &a0.pow(ri - 1)) * b1).row(0));
    }
    Matrix::from_rows(rows)
}

/// Builds the full normal form. The complement rows pᵢ are the
/// deterministic echelon basis of the left annihilator of B₁, filtered to
/// keep the transform invertible.
pub fn to_normal_form(
    a0: &Matrix,
    b1: &Matrix,
    b2: &Matrix,
    c0: &Matrix,
) -> Result<NormalFormModel> {
    let n = a0.rows();
    let m = c0.rows();
    let r = relative_degree(a0, b1, c0)?;
    let s: usize = r.iter().sum();

    // chain rows c_i A^{j-1}
    let mut chain_rows: Vec<Vec<crate::ratmat::Rat>> = Vec::with_capacity(s);
    let mut chain_end_positions = Vec::with_capacity(m);
    for (i, &ri) in r.iter().enumerate() {
        let mut row = Matrix::from_rows(vec![c0.row(i)]);
        for j in 0..ri {
            chain_rows.push(row.row(0));
            if j + 1 == ri {
                chain_end_positions.push(chain_rows.len() - 1);
            }
            row = &row * a0;
        }
    }
    let mut t = Matrix::from_rows(chain_rows);
    if t.rank() != s {
        return Err(Error::NoRelativeDegree);
    }

    // complement rows from the left annihilator of B1
    let ann = Subspace::span_of_columns(&b1).left_annihilator_rows();
    let mut taken = 0usize;
    for i in 0..ann.rows() {
        if taken == n - s {
            break;
        }
        let cand = Matrix::from_rows(vec![ann.row(i)]);
        let test = t.vstack(&cand);
        if test.rank() > t.rank() {
            t = test;
            taken += 1;
        }
    }
    if t.rows() != n || t.rank() != n {
        return Err(Error::NoRelativeDegree);
    }

    let t_inv = t
        .inverse()
        .expect("transform is invertible by construction");
    let a_hat = &(&t * a0) * &t_inv;
    let b2_hat = &t * b2;

    let z_rows: Vec<usize> = (s..n).collect();
    let take = |rows: &[usize], cols: std::ops::Range<usize>| {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| {
            a_hat[(rows[i], cols.start + j)].clone()
        })
    };
    let z_dynamics = take(&z_rows, s..n);
    let xi_to_z = take(&z_rows, 0..s);
    let z_to_chain_ends = take(&chain_end_positions, s..n);
    let xi_to_chain_ends = take(&chain_end_positions, 0..s);
    let decoupling = decoupling_matrix(a0, b1, c0, &r);
    let b2_z = Matrix::from_fn(n - s, b2.cols(), |i, j| b2_hat[(s + i, j)].clone());
    let hypothesis_holds = (0..s).all(|i| (0..b2.cols()).all(|j| b2_hat[(i, j)].is_zero()));

    Ok(NormalFormModel {
        r,
        s,
        t_nf: t,
        z_dynamics,
        xi_to_z,
        z_to_chain_ends,
        xi_to_chain_ends,
        decoupling,
        b2_z,
        hypothesis_holds,
    })
}

impl NormalFormModel {
    /// The attacker's channel map: `U₁ = L⁻¹(Ĉ − R)`, the feedback gain
    /// realizing an arbitrary reduced-system output matrix Ĉ.
    pub fn u1_from_chat(&self, chat: &Matrix) -> Matrix {
        let l_inv = self
            .decoupling
            .inverse()
            .expect("decoupling matrix is nonsingular");
        &l_inv * &(chat - &self.z_to_chain_ends)
    }
}
