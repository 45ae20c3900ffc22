//! Dense complex matrices and the handful of factorizations the rest of the
//! crate needs.
//!
//! Matrices here are tiny (at most a few hundred rows), so everything is a
//! plain row-major `Vec<Complex64>`. Eigenvalue, SVD and QR work is delegated
//! to `nalgebra`.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;

/// A 2x2 complex matrix, row-major: `m[row][col]`.
pub type Mat2 = [[C64; 2]; 2];

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Builds a matrix from row slices. Panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        ComplexMatrix {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn from_mat2(m: &Mat2) -> Self {
        Self::from_fn(2, 2, |r, c| m[r][c])
    }

    /// Panics unless the matrix is 2x2.
    pub fn to_mat2(&self) -> Mat2 {
        assert_eq!((self.rows, self.cols), (2, 2));
        [[self[(0, 0)], self[(0, 1)]], [self[(1, 0)], self[(1, 1)]]]
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch in matmul");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matvec");
        (0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Kronecker product `self ⊗ rhs`; `self` indexes the more significant part.
    pub fn kron(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        Self::from_fn(self.rows * rhs.rows, self.cols * rhs.cols, |r, c| {
            self[(r / rhs.rows, c / rhs.cols)] * rhs[(r % rhs.rows, c % rhs.cols)]
        })
    }

    /// Block-diagonal sum `self ⊕ rhs`.
    pub fn direct_sum(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut out = Self::zeros(self.rows + rhs.rows, self.cols + rhs.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] = self[(r, c)];
            }
        }
        for r in 0..rhs.rows {
            for c in 0..rhs.cols {
                out[(self.rows + r, self.cols + c)] = rhs[(r, c)];
            }
        }
        out
    }

    /// Copies out the `rows x cols` block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> ComplexMatrix {
        Self::from_fn(rows, cols, |r, c| self[(r0 + r, c0 + c)])
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn frobenius_distance(&self, rhs: &ComplexMatrix) -> f64 {
        self.sub(rhs).frobenius_norm()
    }

    /// `‖M·M† − I‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.matmul(&self.dagger())
            .frobenius_distance(&Self::identity(self.rows))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() < tol
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().iter().sum()
    }

    pub fn pow(&self, mut e: u32) -> ComplexMatrix {
        assert!(self.is_square());
        let mut base = self.clone();
        let mut acc = Self::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.matmul(&base);
            }
            base = base.matmul(&base);
            e >>= 1;
        }
        acc
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)])
    }

    pub(crate) fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Minimum over global phases of `‖a − e^{iγ} b‖_F`.
///
/// The optimal phase is the argument of `tr(b† a)`. The distance is evaluated
/// directly rather than through `‖a‖² + ‖b‖² − 2|tr(b† a)|`, which loses
/// half the digits to cancellation.
pub fn phase_aligned_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols));
    let ph = best_phase(a, b);
    a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - ph * y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// The phase `e^{iγ}` that best aligns `b` onto `a`.
pub fn best_phase(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let overlap: C64 = b.data.iter().zip(&a.data).map(|(x, y)| x.conj() * y).sum();
    if overlap.norm() < 1e-300 {
        ONE
    } else {
        overlap / overlap.norm()
    }
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

pub fn mat2_dagger(a: &Mat2) -> Mat2 {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

pub const MAT2_IDENTITY: Mat2 = [[ONE, ZERO], [ZERO, ONE]];

/// Eigenvalues of a square complex matrix from its complex Schur form.
///
/// Returns `None` when the QR iteration does not converge.
pub fn eigenvalues(m: &ComplexMatrix) -> Option<Vec<C64>> {
    assert!(m.is_square());
    let (_, t) = schur(m)?;
    Some((0..t.rows()).map(|i| t[(i, i)]).collect())
}

/// Complex Schur form `m = Q·T·Q†`.
///
/// Highly structured inputs (permutation-like walk operators) can stall the
/// shifted QR iteration, so on failure the matrix is conjugated by a fixed
/// pseudo-random unitary and the factorization retried.
pub fn schur(m: &ComplexMatrix) -> Option<(ComplexMatrix, ComplexMatrix)> {
    let max_iter = 50 * m.rows().max(4);
    if let Some(s) = nalgebra::Schur::try_new(m.to_nalgebra(), f64::EPSILON, max_iter) {
        let (q, t) = s.unpack();
        return Some((ComplexMatrix::from_nalgebra(&q), ComplexMatrix::from_nalgebra(&t)));
    }
    for seed in 1..4u64 {
        let v = scrambler(m.rows(), seed);
        let conj = v.dagger().matmul(m).matmul(&v);
        if let Some(s) = nalgebra::Schur::try_new(conj.to_nalgebra(), f64::EPSILON, max_iter) {
            let (q, t) = s.unpack();
            let q = v.matmul(&ComplexMatrix::from_nalgebra(&q));
            return Some((q, ComplexMatrix::from_nalgebra(&t)));
        }
    }
    None
}

fn scrambler(n: usize, seed: u64) -> ComplexMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let g = ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    qr(&g).0
}

/// Unitary eigendecomposition `m = V·diag(λ)·V†` of a normal matrix.
///
/// The Schur form of a normal matrix is diagonal, so the Schur vectors are an
/// orthonormal eigenbasis even when eigenvalues are degenerate.
pub fn normal_eigen(m: &ComplexMatrix) -> Option<(ComplexMatrix, Vec<C64>)> {
    let (q, t) = schur(m)?;
    let vals = (0..t.rows()).map(|i| t[(i, i)]).collect();
    Some((q, vals))
}

/// Eigendecomposition `m = V·diag(λ)·V†` of a unitary matrix.
///
/// The Hermitian and anti-Hermitian parts of a unitary commute, so a generic
/// real combination of them is a Hermitian matrix sharing its eigenvectors.
/// Combinations are tried until `V†·m·V` comes out diagonal; the Schur route
/// is the last resort.
pub fn unitary_eigen(m: &ComplexMatrix) -> Option<(ComplexMatrix, Vec<C64>)> {
    let n = m.rows();
    let md = m.dagger();
    let herm = m.add(&md).scale(C64::new(0.5, 0.0));
    let anti = m.sub(&md).scale(C64::new(0.0, -0.5));
    for c in [0.537_714_8, 1.713_9, -0.811_2, 3.301_7] {
        let h = herm.add(&anti.scale(C64::new(c, 0.0)));
        let h = h.add(&h.dagger()).scale(C64::new(0.5, 0.0));
        let eig = nalgebra::SymmetricEigen::new(h.to_nalgebra());
        let v = ComplexMatrix::from_nalgebra(&eig.eigenvectors);
        let d = v.dagger().matmul(m).matmul(&v);
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .filter(|(r, c)| r != c)
            .map(|(r, c)| d[(r, c)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off < 1e-12 * n as f64 {
            return Some((v, d.diagonal()));
        }
    }
    normal_eigen(m)
}

/// Thin SVD `m = U·diag(s)·V†`; returns `(U, s, V†)`.
pub fn svd(m: &ComplexMatrix) -> Option<(ComplexMatrix, Vec<f64>, ComplexMatrix)> {
    let svd = nalgebra::SVD::try_new(m.to_nalgebra(), true, true, 1e-15, 10_000)?;
    let u = svd.u.as_ref()?;
    let vt = svd.v_t.as_ref()?;
    Some((
        ComplexMatrix::from_nalgebra(u),
        svd.singular_values.iter().copied().collect(),
        ComplexMatrix::from_nalgebra(vt),
    ))
}

/// Householder QR `m = Q·R` of a square matrix.
pub fn qr(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let qr = m.to_nalgebra().qr();
    (
        ComplexMatrix::from_nalgebra(&qr.q()),
        ComplexMatrix::from_nalgebra(&qr.r()),
    )
}

pub fn determinant(m: &ComplexMatrix) -> C64 {
    m.to_nalgebra().determinant()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_hermitian_eigenvalue(m: &ComplexMatrix) -> f64 {
    let eig = nalgebra::SymmetricEigen::new(m.to_nalgebra());
    eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut a = theta.rem_euclid(TAU);
    if a > PI {
        a -= TAU;
    }
    a
}
