//! Exact rational scalars, dense matrices and subspaces.
//!
//! Everything downstream (Jordan forms, V* iterations, the game engine)
//! rides on the operations here. Two conventions are load-bearing and must
//! not change:
//!
//! * elimination always pivots on the leftmost column, topmost row, so
//!   echelon forms, kernels and pseudoinverses are deterministic;
//! * [`Matrix::kernel_basis`] produces the reduced-echelon kernel basis
//!   (one vector per free column, unit entry in the free position), the
//!   same basis `null(A, 'r')` style solvers emit.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

/// Exact rational scalar: arbitrary-precision, always normalized
/// (positive denominator, reduced fraction).
pub type Rat = BigRational;

/// Rational from an integer.
pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Rational from a numerator/denominator pair.
pub fn ratio(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p/q"`, plain integers, and exact decimals (`"0.3"` becomes
/// 3/10). Exponents and anything else are rejected.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty rational literal".into());
    }
    if let Some((p, q)) = s.split_once('/') {
        let num: BigInt = p
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator {p:?}"))?;
        let den: BigInt = q
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator {q:?}"))?;
        if den.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rat::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.trim_start().starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| format!("bad decimal {s:?}"))?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("bad decimal {s:?}"));
        }
        let frac_num: BigInt = frac.parse().map_err(|_| format!("bad decimal {s:?}"))?;
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let mag = int_part.abs() * &scale + frac_num;
        let signed = if neg { -mag } else { mag };
        return Ok(Rat::new(signed, scale));
    }
    let n: BigInt = s.parse().map_err(|_| format!("bad rational {s:?}"))?;
    Ok(Rat::from_integer(n))
}

/// Dense row-major matrix of exact rationals. Equality is entrywise exact.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix({}x{}) {}", self.rows, self.cols, self)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, "; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self[(r, c)])?;
            }
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Rat;
    fn index(&self, (r, c): (usize, usize)) -> &Rat {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Rat {
        &mut self.data[r * self.cols + c]
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| rat(x)).collect())
                .collect(),
        )
    }

    /// Builds from string entries (`"3/10"`, `"0.3"`, `"-2"`). Panics on
    /// malformed input; meant for fixtures and tests.
    pub fn from_str_rows(rows: &[&[&str]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|s| parse_rat(s).expect("bad literal"))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn column_vector(entries: Vec<Rat>) -> Self {
        let n = entries.len();
        Matrix {
            rows: n,
            cols: 1,
            data: entries,
        }
    }

    pub fn diagonal(entries: &[Rat]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn scale(&self, s: &Rat) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn row(&self, r: usize) -> Vec<Rat> {
        (0..self.cols).map(|c| self[(r, c)].clone()).collect()
    }

    pub fn column(&self, c: usize) -> Matrix {
        Matrix::from_fn(self.rows, 1, |r, _| self[(r, c)].clone())
    }

    /// Horizontal concatenation `[self other]`.
    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "hstack row mismatch");
        Matrix::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self[(r, c)].clone()
            } else {
                other[(r, c - self.cols)].clone()
            }
        })
    }

    /// Vertical concatenation `[self; other]`.
    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "vstack col mismatch");
        Matrix::from_fn(self.rows + other.rows, self.cols, |r, c| {
            if r < self.rows {
                self[(r, c)].clone()
            } else {
                other[(r - self.rows, c)].clone()
            }
        })
    }

    /// Block-diagonal stacking: `self` top-left, `other` bottom-right,
    /// zeros elsewhere. Defined for rectangular blocks as well.
    pub fn direct_sum(&self, other: &Matrix) -> Matrix {
        Matrix::from_fn(self.rows + other.rows, self.cols + other.cols, |r, c| {
            if r < self.rows && c < self.cols {
                self[(r, c)].clone()
            } else if r >= self.rows && c >= self.cols {
                other[(r - self.rows, c - self.cols)].clone()
            } else {
                Rat::zero()
            }
        })
    }

    pub fn pow(&self, k: usize) -> Matrix {
        assert!(self.is_square(), "pow needs a square matrix");
        let mut acc = Matrix::identity(self.rows);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Reduced row echelon form with its pivot columns. Pivot selection is
    /// leftmost column, topmost nonzero row.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut pr = 0usize;
        for pc in 0..m.cols {
            if pr == m.rows {
                break;
            }
            let Some(sel) = (pr..m.rows).find(|&r| !m[(r, pc)].is_zero()) else {
                continue;
            };
            if sel != pr {
                for c in 0..m.cols {
                    m.data.swap(sel * m.cols + c, pr * m.cols + c);
                }
            }
            let inv = m[(pr, pc)].recip();
            for c in pc..m.cols {
                let v = &m[(pr, c)] * &inv;
                m[(pr, c)] = v;
            }
            for r in 0..m.rows {
                if r != pr && !m[(r, pc)].is_zero() {
                    let f = m[(r, pc)].clone();
                    for c in pc..m.cols {
                        let v = &m[(r, c)] - &(&f * &m[(pr, c)]);
                        m[(r, c)] = v;
                    }
                }
            }
            pivots.push(pc);
            pr += 1;
        }
        (m, pivots)
    }

    /// Rank by fraction-free (Bareiss) elimination on the row-wise integer
    /// scaling of the matrix. Row scaling by positive integers does not
    /// change the row space.
    pub fn rank(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            return 0;
        }
        let mut m: Vec<Vec<BigInt>> = (0..self.rows)
            .map(|r| {
                let mut l = BigInt::one();
                for c in 0..self.cols {
                    l = l.lcm(self[(r, c)].denom());
                }
                (0..self.cols)
                    .map(|c| (&self[(r, c)] * Rat::from_integer(l.clone())).to_integer())
                    .collect()
            })
            .collect();
        let (rows, cols) = (self.rows, self.cols);
        let mut prev = BigInt::one();
        let mut pr = 0usize;
        for pc in 0..cols {
            if pr == rows {
                break;
            }
            let Some(sel) = (pr..rows).find(|&r| !m[r][pc].is_zero()) else {
                continue;
            };
            m.swap(sel, pr);
            for r in pr + 1..rows {
                for c in pc + 1..cols {
                    let num = &m[pr][pc] * &m[r][c] - &m[r][pc] * &m[pr][c];
                    debug_assert!((&num % &prev).is_zero(), "fraction-free step must divide");
                    m[r][c] = num / &prev;
                }
                m[r][pc] = BigInt::zero();
            }
            prev = m[pr][pc].clone();
            pr += 1;
        }
        pr
    }

    /// Deterministic basis of `Ker self` (reduced-echelon construction:
    /// one basis column per free column, with a unit in the free position).
    pub fn kernel_basis(&self) -> Subspace {
        if self.rows == 0 {
            return Subspace::full(self.cols);
        }
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Matrix::zeros(self.cols, free.len());
        for (j, &fc) in free.iter().enumerate() {
            basis[(fc, j)] = Rat::one();
            for (i, &pc) in pivots.iter().enumerate() {
                basis[(pc, j)] = -r[(i, fc)].clone();
            }
        }
        Subspace {
            ambient: self.cols,
            basis,
        }
    }

    /// Inverse of a square matrix, `None` when singular.
    pub fn inverse(&self) -> Option<Matrix> {
        assert!(self.is_square(), "inverse needs a square matrix");
        let n = self.rows;
        let (r, pivots) = self.hstack(&Matrix::identity(n)).rref();
        if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
            return None;
        }
        Some(Matrix::from_fn(n, n, |i, j| r[(i, n + j)].clone()))
    }

    /// Moore–Penrose pseudoinverse via the full-rank factorization
    /// `M = C R` taken from the echelon form (C = pivot columns of M,
    /// R = nonzero echelon rows), so `pinv = Rᵀ(RRᵀ)⁻¹(CᵀC)⁻¹Cᵀ`.
    /// Exact for any rank, including zero.
    pub fn pinv(&self) -> Matrix {
        let (r, pivots) = self.rref();
        let k = pivots.len();
        if k == 0 {
            return Matrix::zeros(self.cols, self.rows);
        }
        let cf = Matrix::from_fn(self.rows, k, |i, j| self[(i, pivots[j])].clone());
        let rf = Matrix::from_fn(k, self.cols, |i, j| r[(i, j)].clone());
        let ctc_inv = (&cf.transpose() * &cf)
            .inverse()
            .expect("CᵀC is invertible");
        let rrt_inv = (&rf * &rf.transpose())
            .inverse()
            .expect("RRᵀ is invertible");
        &(&(&rf.transpose() * &rrt_inv) * &ctc_inv) * &cf.transpose()
    }

    /// Monic characteristic polynomial coefficients, constant term first,
    /// computed by the Faddeev–LeVerrier recurrence (exact over rationals).
    pub fn char_poly(&self) -> Vec<Rat> {
        assert!(self.is_square(), "char_poly needs a square matrix");
        let n = self.rows;
        let mut coeffs = vec![Rat::zero(); n + 1];
        coeffs[n] = Rat::one();
        let mut mk = Matrix::identity(n);
        for k in 1..=n {
            mk = self * &mk;
            let tr: Rat = (0..n).map(|i| mk[(i, i)].clone()).sum();
            let c = -tr / rat(k as i64);
            coeffs[n - k] = c.clone();
            for i in 0..n {
                let v = &mk[(i, i)] + &c;
                mk[(i, i)] = v;
            }
        }
        coeffs
    }

    /// Evaluates a polynomial (constant term first) at this matrix.
    pub fn eval_poly(&self, coeffs: &[Rat]) -> Matrix {
        assert!(self.is_square());
        let n = self.rows;
        let mut acc = Matrix::zeros(n, n);
        for c in coeffs.iter().rev() {
            acc = self * &acc;
            for i in 0..n {
                let v = &acc[(i, i)] + c;
                acc[(i, i)] = v;
            }
        }
        acc
    }

    /// Largest absolute numerator/denominator, as a rough size gauge.
    pub fn magnitude_digits(&self) -> usize {
        self.data
            .iter()
            .map(|x| x.numer().abs().max(x.denom().clone()).to_string().len())
            .max()
            .unwrap_or(1)
    }
}

impl Add for &Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "add shape mismatch"
        );
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "sub shape mismatch"
        );
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| -a).collect(),
        }
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "mul shape mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    if !rhs[(k, j)].is_zero() {
                        let v = &out[(i, j)] + &(a * &rhs[(k, j)]);
                        out[(i, j)] = v;
                    }
                }
            }
        }
        out
    }
}

/// A linear subspace of ℝⁿ, stored as a column-stacked full-rank basis.
/// Zero columns encode the zero subspace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient: usize,
    basis: Matrix,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Matrix::zeros(ambient, 0),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: Matrix::identity(ambient),
        }
    }

    /// Span of the columns of `m`, reduced to a deterministic full-rank
    /// basis (echelon columns of the row space of `mᵀ`).
    pub fn span_of_columns(m: &Matrix) -> Self {
        let (r, pivots) = m.transpose().rref();
        let basis = Matrix::from_fn(m.rows(), pivots.len(), |i, j| r[(j, i)].clone());
        Subspace {
            ambient: m.rows(),
            basis,
        }
    }

    /// Wraps an already-independent basis. Panics if columns are dependent.
    pub fn from_basis(basis: Matrix) -> Self {
        assert_eq!(
            basis.rank(),
            basis.cols(),
            "basis columns must be independent"
        );
        Subspace {
            ambient: basis.rows(),
            basis,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    /// Membership by rank test: v ∈ S ⇔ rank([basis v]) = rank(basis).
    pub fn contains(&self, v: &Matrix) -> bool {
        assert_eq!(v.rows(), self.ambient);
        assert_eq!(v.cols(), 1);
        if self.dim() == 0 {
            return v.is_zero();
        }
        self.basis.hstack(v).rank() == self.dim()
    }

    /// True when every column of `m` lies in this subspace.
    pub fn contains_columns(&self, m: &Matrix) -> bool {
        if m.cols() == 0 {
            return true;
        }
        if self.dim() == 0 {
            return m.is_zero();
        }
        self.basis.hstack(m).rank() == self.dim()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        self.contains_columns(other.basis())
    }

    pub fn same_space(&self, other: &Subspace) -> bool {
        self.dim() == other.dim() && self.contains_subspace(other)
    }

    /// Deterministic rows spanning the left annihilator:
    /// `annihilator * basis = 0`, one row per missing dimension.
    pub fn left_annihilator_rows(&self) -> Matrix {
        self.basis.transpose().kernel_basis().basis().transpose()
    }
}
