//! Exact Jordan decomposition for matrices whose spectrum is fully
//! rational. Inputs with irrational or complex eigenvalues are rejected
//! with [`Error::NonRationalSpectrum`] rather than approximated: the block
//! structure feeds integer-valued dimension computations downstream, and
//! approximate eigenvalues would silently change those integers.
//!
//! Deterministic conventions, fixed here and relied on by the synthesis
//! and game modules:
//!
//! * eigenvalues ordered by algebraic multiplicity descending, ties by
//!   value ascending;
//! * blocks within an eigenvalue ordered by size descending;
//! * generalized-eigenvector chains built top-down by echelon completion
//!   of the kernel filtration, so the transform `T` is reproducible.

use crate::ratmat::{Matrix, Rat};
use crate::roots::integer_roots;
use crate::{Error, Result};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

/// Structure of one eigenvalue: multiplicities, block sizes (descending),
/// and where each ranked block sits in the block layout of `J`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EigenStructure {
    pub eigenvalue: Rat,
    pub algebraic_mult: usize,
    pub geometric_mult: usize,
    /// Jordan block sizes, sorted descending.
    pub block_sizes: Vec<usize>,
    /// `descending_order[j]` = index (within this eigenvalue's layout) of
    /// the j-th largest block. Identity for decompositions produced here;
    /// nontrivial for externally supplied layouts.
    pub descending_order: Vec<usize>,
}

impl EigenStructure {
    /// Block sizes in layout order (the order blocks occupy rows of `J`).
    pub fn layout_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.block_sizes.len()];
        for (rank, &layout_idx) in self.descending_order.iter().enumerate() {
            sizes[layout_idx] = self.block_sizes[rank];
        }
        sizes
    }
}

/// A full Jordan decomposition `T⁻¹ M T = J` with exact equality
/// `M·T = T·J`, plus the per-eigenvalue structure in layout order.
#[derive(Clone, Debug)]
pub struct JordanDecomposition {
    pub j: Matrix,
    pub t: Matrix,
    pub spectrum: Vec<EigenStructure>,
}

impl JordanDecomposition {
    pub fn dim(&self) -> usize {
        self.j.rows()
    }

    /// Builds a decomposition directly from a block layout
    /// (eigenvalue, block sizes in layout order), with `T = I`.
    /// Used for systems already given in Jordan coordinates.
    pub fn from_layout(layout: &[(Rat, Vec<usize>)]) -> Self {
        let spectrum: Vec<EigenStructure> = layout
            .iter()
            .map(|(lam, sizes)| {
                let mut order: Vec<usize> = (0..sizes.len()).collect();
                order.sort_by_key(|&k| (std::cmp::Reverse(sizes[k]), k));
                let mut desc = sizes.clone();
                desc.sort_unstable_by(|a, b| b.cmp(a));
                EigenStructure {
                    eigenvalue: lam.clone(),
                    algebraic_mult: sizes.iter().sum(),
                    geometric_mult: sizes.len(),
                    block_sizes: desc,
                    descending_order: order,
                }
            })
            .collect();
        let j = build_jordan_matrix(layout);
        let t = Matrix::identity(j.rows());
        JordanDecomposition { j, t, spectrum }
    }

    /// Row offset of each block, per eigenvalue, in layout order.
    pub fn block_offsets(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut off = 0usize;
        for es in &self.spectrum {
            let mut offs = Vec::new();
            for s in es.layout_sizes() {
                offs.push(off);
                off += s;
            }
            out.push(offs);
        }
        out
    }
}

/// Assembles the block-diagonal Jordan matrix for a layout.
pub fn build_jordan_matrix(layout: &[(Rat, Vec<usize>)]) -> Matrix {
    let n: usize = layout.iter().map(|(_, s)| s.iter().sum::<usize>()).sum();
    let mut j = Matrix::zeros(n, n);
    let mut off = 0;
    for (lam, sizes) in layout {
        for &s in sizes {
            for i in 0..s {
                j[(off + i, off + i)] = lam.clone();
                if i + 1 < s {
                    j[(off + i, off + i + 1)] = Rat::one();
                }
            }
            off += s;
        }
    }
    j
}

/// All eigenvalues with algebraic multiplicities, sorted by multiplicity
/// descending then value ascending. Errors when the characteristic
/// polynomial has any non-rational root.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<(Rat, usize)>> {
    assert!(m.is_square(), "eigenvalues need a square matrix");
    let n = m.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    // scale to an integer matrix: eigenvalues of d·M are d·λ and the
    // characteristic polynomial becomes monic with integer coefficients
    let mut d = BigInt::one();
    for r in 0..n {
        for c in 0..n {
            d = d.lcm(m[(r, c)].denom());
        }
    }
    let scaled = m.scale(&Rat::from_integer(d.clone()));
    let int_poly: Vec<BigInt> = int_char_poly(&scaled);
    let roots = integer_roots(&int_poly);
    let total: usize = roots.iter().map(|(_, mult)| mult).sum();
    if total != n {
        return Err(Error::NonRationalSpectrum);
    }
    let mut out: Vec<(Rat, usize)> = roots
        .into_iter()
        .map(|(r, mult)| (Rat::new(r, d.clone()), mult))
        .collect();
    out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

/// Faddeev–LeVerrier over the integers (all divisions are exact for an
/// integer matrix).
fn int_char_poly(m: &Matrix) -> Vec<BigInt> {
    let n = m.rows();
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[n] = BigInt::one();
    let mut mk: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigInt::one()
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect();
    let mi: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)].to_integer()).collect())
        .collect();
    for k in 1..=n {
        // mk = m * mk
        let mut next = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            for l in 0..n {
                if mi[i][l].is_zero() {
                    continue;
                }
                for j in 0..n {
                    if !mk[l][j].is_zero() {
                        next[i][j] += &mi[i][l] * &mk[l][j];
                    }
                }
            }
        }
        mk = next;
        let tr: BigInt = (0..n).map(|i| mk[i][i].clone()).sum();
        let c = -tr / BigInt::from(k);
        coeffs[n - k] = c.clone();
        for i in 0..n {
            mk[i][i] += &c;
        }
    }
    coeffs
}

/// Largest geometric multiplicity over the spectrum.
pub fn max_geometric_multiplicity(m: &Matrix) -> Result<usize> {
    let eig = eigenvalues(m)?;
    let n = m.rows();
    let mut best = 0;
    for (lam, _) in eig {
        let shifted = m - &Matrix::identity(n).scale(&lam);
        best = best.max(n - shifted.rank());
    }
    Ok(best)
}

/// Full Jordan decomposition. See the module docs for the deterministic
/// ordering conventions.
pub fn jordan_decompose(m: &Matrix) -> Result<JordanDecomposition> {
    assert!(m.is_square());
    let n = m.rows();
    let eig = eigenvalues(m)?;
    let mut t_cols: Vec<Matrix> = Vec::with_capacity(n);
    let mut layout: Vec<(Rat, Vec<usize>)> = Vec::new();
    let mut spectrum = Vec::new();
    for (lam, sigma) in eig {
        let chains = jordan_chains(m, &lam, sigma);
        let sizes: Vec<usize> = chains.iter().map(|c| c.len()).collect();
        for chain in &chains {
            for v in chain {
                t_cols.push(v.clone());
            }
        }
        spectrum.push(EigenStructure {
            eigenvalue: lam.clone(),
            algebraic_mult: sigma,
            geometric_mult: sizes.len(),
            block_sizes: sizes.clone(),
            descending_order: (0..sizes.len()).collect(),
        });
        layout.push((lam, sizes));
    }
    let t = Matrix::from_fn(n, n, |r, c| t_cols[c][(r, 0)].clone());
    let j = build_jordan_matrix(&layout);
    debug_assert_eq!(m * &t, &t * &j, "similarity check");
    Ok(JordanDecomposition { j, t, spectrum })
}

/// Generalized-eigenvector chains for one eigenvalue, longest first.
/// Each chain is `[N^{len-1}v, ..., Nv, v]` (eigenvector first) so the
/// resulting block carries ones on the superdiagonal.
fn jordan_chains(m: &Matrix, lam: &Rat, sigma: usize) -> Vec<Vec<Matrix>> {
    let n = m.rows();
    let nmat = m - &Matrix::identity(n).scale(lam);
    // kernel filtration of N, N^2, ... until it saturates at sigma
    let mut kernels = Vec::new();
    let mut power = Matrix::identity(n);
    loop {
        power = &power * &nmat;
        let k = power.kernel_basis();
        let dim = k.dim();
        kernels.push(k);
        if dim == sigma {
            break;
        }
    }
    let depth = kernels.len();
    let dims: Vec<usize> = std::iter::once(0)
        .chain(kernels.iter().map(|k| k.dim()))
        .collect();

    // chains as (length, top), selected top-down by echelon completion
    let mut chains: Vec<(usize, Matrix)> = Vec::new();
    let mut carried: Vec<Matrix> = Vec::new();
    for level in (1..=depth).rev() {
        let mut span: Vec<Matrix> = Vec::new();
        if level >= 2 {
            let lower = kernels[level - 2].basis();
            for c in 0..lower.cols() {
                span.push(lower.column(c));
            }
        }
        span.extend(carried.iter().cloned());
        let mut span_mat = cols_to_matrix(n, &span);
        let mut span_rank = span_mat.rank();
        let mut need = (dims[level] - dims[level - 1]).saturating_sub(carried.len());
        let cand = kernels[level - 1].basis();
        for c in 0..cand.cols() {
            if need == 0 {
                break;
            }
            let v = cand.column(c);
            let test = span_mat.hstack(&v);
            if test.rank() > span_rank {
                span_rank += 1;
                span_mat = test;
                chains.push((level, v));
                need -= 1;
            }
        }
        debug_assert_eq!(need, 0, "kernel filtration must supply all chain tops");
        carried = chains
            .iter()
            .filter(|(len, _)| *len >= level)
            .map(|(len, top)| {
                let mut w = top.clone();
                for _ in 0..(len - level + 1) {
                    w = &nmat * &w;
                }
                w
            })
            .collect();
    }
    chains.sort_by_key(|(len, _)| std::cmp::Reverse(*len));
    chains
        .into_iter()
        .map(|(len, top)| {
            let mut vs = vec![top];
            for _ in 1..len {
                let w = &nmat * vs.last().unwrap();
                vs.push(w);
            }
            vs.reverse();
            vs
        })
        .collect()
}

fn cols_to_matrix(rows: usize, cols: &[Matrix]) -> Matrix {
    Matrix::from_fn(rows, cols.len(), |r, c| cols[c][(r, 0)].clone())
}
