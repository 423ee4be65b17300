//! Dense complex linear algebra: matrices, Hermitian eigensolver, exponentials.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
use num_traits::Zero;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Build from row-major nested data. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
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

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// Matrix product. Zero entries of `self` are skipped, which keeps the
    /// ladder-operator products used throughout the crate cheap.
    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &CMatrix, f: impl Fn(Complex64, Complex64) -> Complex64) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        CMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, z: Complex64) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&a| a * z).collect() }
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    /// `AB - BA`.
    pub fn commutator(&self, other: &CMatrix) -> CMatrix {
        self.mul(other).sub(&other.mul(self))
    }

    /// `AB + BA`.
    pub fn anticommutator(&self, other: &CMatrix) -> CMatrix {
        self.mul(other).add(&other.mul(self))
    }

    /// Max-norm `max |a_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Max-norm restricted to the given rows and columns.
    pub fn max_abs_masked(&self, keep_row: impl Fn(usize) -> bool, keep_col: impl Fn(usize) -> bool) -> f64 {
        let mut m = 0.0f64;
        for r in (0..self.rows).filter(|&r| keep_row(r)) {
            for c in (0..self.cols).filter(|&c| keep_col(c)) {
                m = m.max(self[(r, c)].norm());
            }
        }
        m
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `max |A - A†|`.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                dev = dev.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        dev
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "vector length mismatch");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .map(|(&a, &x)| a * x)
                    .sum()
            })
            .collect()
    }

    /// Submatrix with the selected rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> CMatrix {
        CMatrix::from_fn(rows.len(), cols.len(), |r, c| self[(rows[r], cols[c])])
    }

    /// Integer power of a square matrix.
    pub fn pow(&self, k: u32) -> CMatrix {
        let mut acc = CMatrix::identity(self.rows);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// `Σ conj(a_i) b_i`.
pub fn vdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalized(v: &[Complex64]) -> Vec<Complex64> {
    let n = norm(v);
    v.iter().map(|z| z / n).collect()
}

/// `|ψ⟩⟨ψ|`.
pub fn outer(psi: &[Complex64]) -> CMatrix {
    CMatrix::from_fn(psi.len(), psi.len(), |r, c| psi[r] * psi[c].conj())
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigh {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: CMatrix,
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot with a diagonal unitary,
/// then applies a real Givens rotation. Zero off-diagonal entries are never
/// touched, so block-diagonal inputs yield block-diagonal eigenvectors.
pub fn eigh(a: &CMatrix) -> Eigh {
    assert!(a.is_square(), "eigh needs a square matrix");
    let n = a.rows();
    let mut m = a.clone();
    // enforce exact Hermiticity of the working copy
    for r in 0..n {
        m[(r, r)] = Complex64::new(m[(r, r)].re, 0.0);
        for c in r + 1..n {
            let avg = (m[(r, c)] + m[(c, r)].conj()) * 0.5;
            m[(r, c)] = avg;
            m[(c, r)] = avg.conj();
        }
    }
    let mut v = CMatrix::identity(n);
    let scale = m.frobenius().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let mut off = 0.0;
        for r in 0..n {
            for c in r + 1..n {
                off += m[(r, c)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-16 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 || mag <= 1e-18 * scale {
                    if mag != 0.0 {
                        m[(p, q)] = ZERO;
                        m[(q, p)] = ZERO;
                    }
                    continue;
                }
                let phase = apq / mag; // e^{iα}
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // U = D R with D_qq = e^{-iα}
                let upp = Complex64::new(c, 0.0);
                let uqp = -phase.conj() * s;
                let upq = Complex64::new(s, 0.0);
                let uqq = phase.conj() * c;
                // A <- A U
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = akp * upp + akq * uqp;
                    m[(k, q)] = akp * upq + akq * uqq;
                }
                // A <- U† A
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = upp.conj() * apk + uqp.conj() * aqk;
                    m[(q, k)] = upq.conj() * apk + uqq.conj() * aqk;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
                // V <- V U
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * upp + vkq * uqp;
                    v[(k, q)] = vkp * upq + vkq * uqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Eigh { values, vectors }
}

/// `exp(-i t K) v` for Hermitian `K`, by scaling and a truncated Taylor series
/// applied to the vector.
pub fn expm_apply_hermitian(k: &CMatrix, t: f64, v: &[Complex64]) -> Vec<Complex64> {
    let bound = (0..k.rows())
        .map(|r| k.row(r).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
        * t.abs();
    let steps = ((bound / 0.5).ceil() as usize).max(1);
    let dt = Complex64::new(0.0, -t / steps as f64);
    let mut out = v.to_vec();
    for _ in 0..steps {
        let mut term = out.clone();
        let mut acc = out.clone();
        for order in 1..40 {
            term = k.matvec(&term).into_iter().map(|z| z * dt / order as f64).collect();
            let size = norm(&term);
            for (a, b) in acc.iter_mut().zip(&term) {
                *a += b;
            }
            if size <= 1e-18 * norm(&acc).max(1e-300) {
                break;
            }
        }
        out = acc;
    }
    out
}

/// `exp(-i t K)` for Hermitian `K` via its eigendecomposition.
pub fn expm_hermitian(k: &CMatrix, t: f64) -> CMatrix {
    let e = eigh(k);
    let n = k.rows();
    let phases: Vec<Complex64> = e.values.iter().map(|&l| Complex64::new(0.0, -l * t).exp()).collect();
    let mut out = CMatrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            let mut acc = ZERO;
            for (j, ph) in phases.iter().enumerate() {
                acc += e.vectors[(r, j)] * ph * e.vectors[(c, j)].conj();
            }
            out[(r, c)] = acc;
        }
    }
    out
}

/// Numerical rank of a set of vectors by modified Gram–Schmidt with
/// relative tolerance `tol`.
pub fn rank(vectors: &[Vec<Complex64>], tol: f64) -> usize {
    let scale = vectors.iter().map(|v| norm(v)).fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _pass in 0..2 {
            for b in &basis {
                let proj = vdot(b, &w);
                for (x, y) in w.iter_mut().zip(b) {
                    *x -= proj * y;
                }
            }
        }
        let nw = norm(&w);
        if nw > tol * scale {
            basis.push(w.iter().map(|z| z / nw).collect());
        }
    }
    basis.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigh_two_by_two_closed_form() {
        let s2 = 2f64.sqrt();
        let m = CMatrix::from_rows(&[vec![c(2.0, 0.0), c(s2, 0.0)], vec![c(s2, 0.0), c(2.0, 0.0)]]);
        let e = eigh(&m);
        assert!((e.values[0] - (2.0 - s2)).abs() < 1e-14);
        assert!((e.values[1] - (2.0 + s2)).abs() < 1e-14);
    }

    #[test]
    fn eigh_complex_residuals() {
        let n = 7;
        let m = CMatrix::from_fn(n, n, |r, col| {
            let x = (r * 7 + col * 3) as f64;
            if r == col {
                c(x.sin() * 3.0, 0.0)
            } else if r < col {
                c((x * 0.37).cos(), (x * 0.11).sin())
            } else {
                let y = (col * 7 + r * 3) as f64;
                c((y * 0.37).cos(), -(y * 0.11).sin())
            }
        });
        assert!(m.hermitian_deviation() < 1e-15);
        let e = eigh(&m);
        for k in 0..n {
            let v = e.vectors.column(k);
            let hv = m.matvec(&v);
            let res: f64 = hv.iter().zip(&v).map(|(a, b)| (a - b * e.values[k]).norm()).fold(0.0, f64::max);
            assert!(res < 1e-12, "residual {res}");
        }
        let gram = e.vectors.adjoint().mul(&e.vectors);
        assert!(gram.sub(&CMatrix::identity(n)).max_abs() < 1e-13);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eigh_diagonal_sorts() {
        let m = CMatrix::from_real_diag(&[3.0, -1.0, 2.0]);
        let e = eigh(&m);
        assert_eq!(e.values, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn expm_routes_agree() {
        let m = CMatrix::from_rows(&[
            vec![c(1.0, 0.0), c(0.5, 0.2), c(0.0, 0.0)],
            vec![c(0.5, -0.2), c(-1.0, 0.0), c(0.3, 0.0)],
            vec![c(0.0, 0.0), c(0.3, 0.0), c(0.2, 0.0)],
        ]);
        let u = expm_hermitian(&m, 2.3);
        let v = [c(1.0, 0.0), c(0.0, 1.0), c(0.5, 0.0)];
        let a = u.matvec(&v);
        let b = expm_apply_hermitian(&m, 2.3, &v);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn rank_detects_dependence() {
        let a = vec![c(1.0, 0.0), c(0.0, 0.0)];
        let b = vec![c(2.0, 0.0), c(0.0, 0.0)];
        let d = vec![c(0.0, 0.0), c(0.0, 1.0)];
        assert_eq!(rank(&[a.clone(), b], 1e-10), 1);
        assert_eq!(rank(&[a, d], 1e-10), 2);
    }
}
