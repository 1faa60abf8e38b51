//! Attacker-side synthesis: choose the sensor matrix `C` that minimizes
//! the unobservable subspace of `(C, A+BF)`.
//!
//! Everything is driven by the Jordan structure of the dual state matrix
//! `(A+BF)ᵀ`: the reachable subspace of the dual pair splits across
//! distinct eigenvalues, full reach of one block needs its bottom row
//! fed, and the best achievable total is the sum of the `min(m, αᵢ)`
//! largest block sizes per eigenvalue. The canonical constructor places
//! unit rows under the largest blocks; tie-equivalent block selections
//! form the finite candidate family the game engine searches.

use crate::jordan::{jordan_decompose, JordanDecomposition};
use crate::ratmat::{Matrix, Rat};
use crate::{Error, Result};
use num_traits::One;

/// Per-eigenvalue block choice realizing the maximal reachable dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSelection {
    /// For each eigenvalue (layout order), the chosen block indices.
    pub chosen: Vec<Vec<usize>>,
    /// Total block size across the chosen sets.
    pub achieved_dim: usize,
}

fn last_rows_per_block(jd: &JordanDecomposition, bhat: &Matrix) -> Vec<Vec<Vec<Rat>>> {
    let offsets = jd.block_offsets();
    let mut out = Vec::new();
    for (ei, es) in jd.spectrum.iter().enumerate() {
        let sizes = es.layout_sizes();
        let rows = sizes
            .iter()
            .enumerate()
            .map(|(k, &s)| bhat.row(offsets[ei][k] + s - 1))
            .collect();
        out.push(rows);
    }
    out
}

fn stack_rows(rows: &[&Vec<Rat>]) -> Matrix {
    Matrix::from_rows(rows.iter().map(|r| (*r).clone()).collect())
}

/// Dimension of the reachable subspace of `(J, B̂)`, exploiting the block
/// structure: the space splits across distinct eigenvalues, and within one
/// eigenvalue the shifted matrix acts as a pure chain shift, so the
/// per-eigenvalue dimension is the rank of the short Krylov stack
/// `[B̂_λ, N B̂_λ, …, N^{d-1} B̂_λ]` with `d` the largest block size.
///
/// This agrees with the bottom-row selection of
/// [`optimal_block_selection`] whenever every block is fed through its
/// bottom row (in particular on everything [`build_optimal_bhat`]
/// produces), and stays exact when inputs feed blocks mid-chain, which
/// the bottom-row count misses.
pub fn controllable_dim(jd: &JordanDecomposition, bhat: &Matrix) -> Result<usize> {
    if bhat.rows() != jd.dim() {
        return Err(Error::ShapeMismatch(format!(
            "B-hat has {} rows for an order-{} Jordan form",
            bhat.rows(),
            jd.dim()
        )));
    }
    let offsets = jd.block_offsets();
    let mut total = 0usize;
    for (ei, es) in jd.spectrum.iter().enumerate() {
        let sizes = es.layout_sizes();
        let sigma = es.algebraic_mult;
        // rows of B̂ belonging to this eigenvalue's blocks
        let mut rows = Vec::with_capacity(sigma);
        for (k, &s) in sizes.iter().enumerate() {
            for t in 0..s {
                rows.push(bhat.row(offsets[ei][k] + t));
            }
        }
        let b_sect = Matrix::from_rows(rows);
        // the within-eigenvalue shift: ones above the diagonal inside
        // each block
        let mut shift = Matrix::zeros(sigma, sigma);
        let mut off = 0;
        for &s in &sizes {
            for t in 0..s.saturating_sub(1) {
                shift[(off + t, off + t + 1)] = Rat::one();
            }
            off += s;
        }
        let d = sizes.iter().copied().max().unwrap_or(0);
        let mut krylov = b_sect.clone();
        let mut p = b_sect;
        for _ in 1..d {
            p = &shift * &p;
            krylov = krylov.hstack(&p);
        }
        total += krylov.rank();
    }
    Ok(total)
}

/// The bottom-row block enumeration: per eigenvalue, among the
/// size-`s_i` independent subsets of bottom rows (`s_i` = rank of the
/// stacked bottom rows), the one with the largest total block size; ties
/// break to the lexicographically smallest index set. Subset exhaustion
/// is capped at geometric multiplicity 12.
///
/// Exact for inputs supported on block bottom rows; used by the
/// synthesis path to pick blocks.
pub fn optimal_block_selection(jd: &JordanDecomposition, bhat: &Matrix) -> Result<BlockSelection> {
    let per_eig = last_rows_per_block(jd, bhat);
    let mut chosen = Vec::new();
    let mut total = 0usize;
    for (es, rows) in jd.spectrum.iter().zip(&per_eig) {
        let alpha = es.geometric_mult;
        assert!(
            alpha <= 12,
            "geometric multiplicity above the exhaustive-search cap"
        );
        let sizes = es.layout_sizes();
        let all: Vec<&Vec<Rat>> = rows.iter().collect();
        let s_i = stack_rows(&all).rank();
        let mut best: Option<(usize, Vec<usize>)> = None;
        for combo in combinations(alpha, s_i) {
            let sub: Vec<&Vec<Rat>> = combo.iter().map(|&k| &rows[k]).collect();
            if stack_rows(&sub).rank() == s_i {
                let tot: usize = combo.iter().map(|&k| sizes[k]).sum();
                if best.as_ref().map_or(true, |(bt, _)| tot > *bt) {
                    best = Some((tot, combo.clone()));
                }
            }
        }
        let (tot, combo) = best.unwrap_or((0, Vec::new()));
        total += tot;
        chosen.push(combo);
    }
    Ok(BlockSelection {
        chosen,
        achieved_dim: total,
    })
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// True when `B̂` maximizes the reachable dimension: for each eigenvalue,
/// either all bottom rows are independent (`m ≥ αᵢ`) or some choice of the
/// `m` largest blocks has independent bottom rows (`m < αᵢ`).
pub fn is_max_controllable(jd: &JordanDecomposition, bhat: &Matrix, m: usize) -> Result<bool> {
    if bhat.rows() != jd.dim() || bhat.cols() != m {
        return Err(Error::ShapeMismatch(format!(
            "B-hat is {}x{}, expected {}x{}",
            bhat.rows(),
            bhat.cols(),
            jd.dim(),
            m
        )));
    }
    let per_eig = last_rows_per_block(jd, bhat);
    for (es, rows) in jd.spectrum.iter().zip(&per_eig) {
        let alpha = es.geometric_mult;
        let all: Vec<&Vec<Rat>> = rows.iter().collect();
        if m >= alpha {
            if stack_rows(&all).rank() != alpha {
                return Ok(false);
            }
        } else {
            let sizes = es.layout_sizes();
            let ok = tied_largest_selections(&sizes, m).into_iter().any(|sel| {
                let sub: Vec<&Vec<Rat>> = sel.iter().map(|&k| &rows[k]).collect();
                stack_rows(&sub).rank() == m
            });
            if !ok {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// All ways to pick blocks carrying the `count` largest sizes (every
/// resolution of size ties), each listed in (size desc, index asc) order.
/// The first entry is the canonical pick.
pub(crate) fn tied_largest_selections(sizes: &[usize], count: usize) -> Vec<Vec<usize>> {
    let alpha = sizes.len();
    if alpha <= count {
        return vec![(0..alpha).collect()];
    }
    let mut order: Vec<usize> = (0..alpha).collect();
    order.sort_by_key(|&k| (std::cmp::Reverse(sizes[k]), k));
    let threshold = sizes[order[count - 1]];
    let must: Vec<usize> = (0..alpha).filter(|&k| sizes[k] > threshold).collect();
    let tied: Vec<usize> = (0..alpha).filter(|&k| sizes[k] == threshold).collect();
    let take = count - must.len();
    combinations(tied.len(), take)
        .into_iter()
        .map(|combo| {
            let mut sel = must.clone();
            sel.extend(combo.into_iter().map(|i| tied[i]));
            sel.sort_by_key(|&k| (std::cmp::Reverse(sizes[k]), k));
            sel
        })
        .collect()
}

/// The canonical optimal `B̂`: unit bottom rows assigned column-by-column
/// to the largest blocks (all blocks when `αᵢ < m`), zeros elsewhere.
pub fn build_optimal_bhat(jd: &JordanDecomposition, m: usize) -> Matrix {
    build_bhat_for_selection(jd, m, &canonical_selection(jd, m))
}

pub(crate) fn canonical_selection(jd: &JordanDecomposition, m: usize) -> Vec<Vec<usize>> {
    jd.spectrum
        .iter()
        .map(|es| tied_largest_selections(&es.layout_sizes(), m)[0].clone())
        .collect()
}

/// Every tie-equivalent block selection (cartesian product over
/// eigenvalues of the tied choices), canonical first.
pub(crate) fn selection_family(jd: &JordanDecomposition, m: usize) -> Vec<Vec<Vec<usize>>> {
    let per_eig: Vec<Vec<Vec<usize>>> = jd
        .spectrum
        .iter()
        .map(|es| tied_largest_selections(&es.layout_sizes(), m))
        .collect();
    let mut out = vec![Vec::new()];
    for choices in per_eig {
        let mut next = Vec::new();
        for partial in &out {
            for c in &choices {
                let mut p = partial.clone();
                p.push(c.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}

pub(crate) fn build_bhat_for_selection(
    jd: &JordanDecomposition,
    m: usize,
    selection: &[Vec<usize>],
) -> Matrix {
    let n = jd.dim();
    let offsets = jd.block_offsets();
    let mut bhat = Matrix::zeros(n, m);
    for (ei, es) in jd.spectrum.iter().enumerate() {
        let sizes = es.layout_sizes();
        for (col, &block) in selection[ei].iter().enumerate() {
            let last_row = offsets[ei][block] + sizes[block] - 1;
            bhat[(last_row, col)] = Rat::one();
        }
    }
    bhat
}

/// Sensor synthesis: Jordan-decomposes the dual matrix `(A+BF)ᵀ`, builds
/// the canonical optimal `B̂`, and returns `C = B̂ᵀTᵀ`.
pub fn minimize_unobservable(a: &Matrix, b: &Matrix, f: &Matrix, m: usize) -> Result<Matrix> {
    let closed = a + &(b * f);
    let jd = jordan_decompose(&closed.transpose())?;
    let bhat = build_optimal_bhat(&jd, m);
    Ok((&jd.t * &bhat).transpose())
}

/// All canonical constructions over tie-equivalent block selections, in
/// selection order (canonical first).
pub fn minimize_unobservable_candidates(
    a: &Matrix,
    b: &Matrix,
    f: &Matrix,
    m: usize,
) -> Result<Vec<Matrix>> {
    let closed = a + &(b * f);
    let jd = jordan_decompose(&closed.transpose())?;
    Ok(selection_family(&jd, m)
        .iter()
        .map(|sel| (&jd.t * &build_bhat_for_selection(&jd, m, sel)).transpose())
        .collect())
}

/// Closed-form optimum of the attacker's problem:
/// `n − Σᵢ (sum of the min(m, αᵢ) largest block sizes of λᵢ)`.
/// Needs only the rank sequence of `(M − λI)^j`, not the transform.
pub fn min_unobservable_dim(m_mat: &Matrix, m: usize) -> Result<usize> {
    let eig = crate::jordan::eigenvalues(m_mat)?;
    let n = m_mat.rows();
    let mut reachable = 0usize;
    for (lam, sigma) in eig {
        let shifted = m_mat - &Matrix::identity(n).scale(&lam);
        let sizes = block_sizes_from_ranks(&shifted, sigma);
        reachable += sizes.iter().take(m.min(sizes.len())).sum::<usize>();
    }
    Ok(n - reachable)
}

/// Jordan block sizes of one eigenvalue (descending) recovered from the
/// rank sequence: #blocks of size ≥ j = rank(N^{j-1}) − rank(N^j).
pub(crate) fn block_sizes_from_ranks(shifted: &Matrix, sigma: usize) -> Vec<usize> {
    let n = shifted.rows();
    let mut ranks = vec![n];
    let mut power = Matrix::identity(n);
    loop {
        power = &power * shifted;
        ranks.push(power.rank());
        if n - ranks.last().unwrap() == sigma {
            break;
        }
    }
    let ge: Vec<usize> = (1..ranks.len()).map(|j| ranks[j - 1] - ranks[j]).collect();
    let mut sizes = Vec::new();
    for j in (1..=ge.len()).rev() {
        let count = ge[j - 1] - if j < ge.len() { ge[j] } else { 0 };
        sizes.extend(std::iter::repeat(j).take(count));
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}
