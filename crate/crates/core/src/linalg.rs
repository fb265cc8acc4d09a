//! Dense row-major matrices and a one-sided Jacobi SVD.
//!
//! The matrices in this crate are tall and thin (vocabulary × dimension) or
//! small and square (dimension × dimension), so a straightforward dense
//! representation is all that is needed.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

#[derive(Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows.min(8) {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        if self.rows > 8 {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{} values do not fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::ShapeMismatch(alloc::format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        t
    }

    /// `self · other`
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(alloc::format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows,
                self.cols,
                other.rows,
                other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for (k, &a) in self.row(r).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · other`, without materializing the transpose.
    pub fn t_matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::ShapeMismatch(alloc::format!(
                "cannot multiply ({}x{})ᵀ by {}x{}",
                self.rows,
                self.cols,
                other.rows,
                other.cols
            )));
        }
        let mut out = Matrix::zeros(self.cols, other.cols);
        for r in 0..self.rows {
            let b_row = other.row(r);
            for (k, &a) in self.row(r).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self · v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        self.row_iter().map(|r| dot(r, v)).collect()
    }

    /// `selfᵀ · v`
    pub fn t_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (row, &x) in self.row_iter().zip(v) {
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a * x;
            }
        }
        out
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, factor: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|x| x * x).sum())
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Matrix) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| libm::fabs(a - b))
            .fold(0.0, f64::max))
    }

    /// Returns a copy with every row scaled to unit L2 norm.
    pub fn normalized_rows(&self) -> Result<Matrix> {
        let mut out = self.clone();
        for r in 0..out.rows {
            let row = out.row_mut(r);
            let n = norm(row);
            if n == 0.0 {
                return Err(Error::ZeroVector { row: r });
            }
            row.iter_mut().for_each(|x| *x /= n);
        }
        Ok(out)
    }

    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (k, &c) in cols.iter().enumerate() {
                out.data[r * cols.len() + k] = self.get(r, c);
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    fn check_same_shape(&self, other: &Matrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch(alloc::format!(
                "{}x{} vs {}x{}",
                self.rows,
                self.cols,
                other.rows,
                other.cols
            )));
        }
        Ok(())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Cosine similarity; zero when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let d = norm(a) * norm(b);
    if d == 0.0 {
        0.0
    } else {
        dot(a, b) / d
    }
}

/// Thin singular value decomposition `A = U · diag(s) · Vᵀ`.
///
/// For an `m × n` input with `k = min(m, n)`, `u` is `m × k`, `v` is `n × k`
/// and `s` holds `k` non-increasing singular values. Each left singular
/// vector is signed so that its largest-magnitude component is positive.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

const MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD.
///
/// Converges to full relative accuracy, which matters for the orthogonality
/// guarantees the alignment code relies on. Left singular vectors belonging
/// to zero singular values are completed to an orthonormal set.
pub fn svd(a: &Matrix) -> Result<Svd> {
    if a.rows() < a.cols() {
        let t = svd_tall(&a.transpose())?;
        // Aᵀ = U S Vᵀ  =>  A = V S Uᵀ
        let mut out = Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        };
        fix_signs(&mut out);
        return Ok(out);
    }
    svd_tall(a)
}

fn svd_tall(a: &Matrix) -> Result<Svd> {
    let (m, n) = a.shape();
    // Columns of A as contiguous rows.
    let mut g = a.transpose();
    let mut vt = Matrix::identity(n);
    if !g.is_finite() {
        return Err(Error::SvdNoConvergence { sweeps: 0 });
    }
    let tol = libm::sqrt(m as f64) * f64::EPSILON;

    let mut converged = n < 2;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (gp, gq) = two_rows(&mut g, p, q);
                let alpha = dot(gp, gp);
                let beta = dot(gq, gq);
                let gamma = dot(gp, gq);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                if libm::fabs(gamma) <= tol * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = libm::copysign(1.0, zeta) / (libm::fabs(zeta) + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate(gp, gq, c, s);
                let (vp, vq) = two_rows(&mut vt, p, q);
                rotate(vp, vq, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::SvdNoConvergence { sweeps });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|p| norm(g.row(p))).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));

    let s_max = norms.iter().cloned().fold(0.0, f64::max);
    let cutoff = s_max * f64::EPSILON * (m.max(n) as f64);
    let mut u = Matrix::zeros(m, n);
    let mut v = Matrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (k, &p) in order.iter().enumerate() {
        let sigma = norms[p];
        for r in 0..n {
            v.set(r, k, vt.get(p, r));
        }
        if sigma > cutoff && sigma > 0.0 {
            for r in 0..m {
                u.set(r, k, g.get(p, r) / sigma);
            }
            s.push(sigma);
        } else {
            missing.push(k);
            s.push(if sigma > 0.0 { sigma } else { 0.0 });
        }
    }
    complete_orthonormal(&mut u, &missing);
    let mut out = Svd { u, s, v };
    fix_signs(&mut out);
    Ok(out)
}

fn two_rows(m: &mut Matrix, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let cols = m.cols;
    let (head, tail) = m.data.split_at_mut(q * cols);
    (&mut head[p * cols..(p + 1) * cols], &mut tail[..cols])
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (a, b) in x.iter_mut().zip(y.iter_mut()) {
        let (xa, yb) = (*a, *b);
        *a = c * xa - s * yb;
        *b = s * xa + c * yb;
    }
}

/// Fills the listed columns of `u` with unit vectors orthogonal to all other
/// columns, by Gram-Schmidt over the standard basis.
fn complete_orthonormal(u: &mut Matrix, missing: &[usize]) {
    if missing.is_empty() {
        return;
    }
    let (m, k) = u.shape();
    let mut filled: Vec<bool> = vec![true; k];
    for &c in missing {
        filled[c] = false;
    }
    let mut basis = 0;
    for &c in missing {
        while basis < m {
            let mut cand = vec![0.0; m];
            cand[basis] = 1.0;
            basis += 1;
            // Two passes of modified Gram-Schmidt for stability.
            for _ in 0..2 {
                for other in (0..k).filter(|&o| filled[o]) {
                    let proj: f64 = (0..m).map(|r| u.get(r, other) * cand[r]).sum();
                    for (r, x) in cand.iter_mut().enumerate() {
                        *x -= proj * u.get(r, other);
                    }
                }
            }
            let n = norm(&cand);
            if n > 1e-8 {
                for (r, x) in cand.iter().enumerate() {
                    u.set(r, c, x / n);
                }
                filled[c] = true;
                break;
            }
        }
    }
}

fn fix_signs(svd: &mut Svd) {
    let (m, k) = svd.u.shape();
    for c in 0..k {
        let mut best = 0.0;
        for r in 0..m {
            let x = svd.u.get(r, c);
            if libm::fabs(x) > libm::fabs(best) {
                best = x;
            }
        }
        if best < 0.0 {
            for r in 0..m {
                svd.u.set(r, c, -svd.u.get(r, c));
            }
            for r in 0..svd.v.rows() {
                svd.v.set(r, c, -svd.v.get(r, c));
            }
        }
    }
}

impl Svd {
    /// `U · diag(s) · Vᵀ`
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for r in 0..us.rows() {
            for (x, s) in us.row_mut(r).iter_mut().zip(&self.s) {
                *x *= s;
            }
        }
        us.matmul(&self.v.transpose()).expect("svd factors are conformant")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    fn orthonormality_error(m: &Matrix) -> f64 {
        let g = m.t_matmul(m).unwrap();
        g.max_abs_diff(&Matrix::identity(m.cols())).unwrap()
    }

    #[test]
    fn reconstructs_tall_wide_and_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &(r, c) in &[(30, 5), (5, 30), (12, 12), (1, 4), (4, 1)] {
            let a = random(r, c, &mut rng);
            let d = svd(&a).unwrap();
            assert!(d.reconstruct().max_abs_diff(&a).unwrap() < 1e-12, "{r}x{c}");
            assert!(orthonormality_error(&d.u) < 1e-12);
            assert!(orthonormality_error(&d.v) < 1e-12);
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rank_deficient_input_still_has_orthonormal_u() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut a = random(10, 4, &mut rng);
        for r in 0..10 {
            let v = a.get(r, 0);
            a.set(r, 3, 2.0 * v);
        }
        let d = svd(&a).unwrap();
        assert!(d.s[3] < 1e-12);
        assert!(orthonormality_error(&d.u) < 1e-12);
        assert!(d.reconstruct().max_abs_diff(&a).unwrap() < 1e-12);
    }

    #[test]
    fn zero_matrix() {
        let d = svd(&Matrix::zeros(3, 3)).unwrap();
        assert_eq!(d.s, vec![0.0; 3]);
        assert!(orthonormality_error(&d.u) < 1e-12);
    }

    #[test]
    fn sign_convention_largest_component_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random(8, 3, &mut rng);
        let d = svd(&a).unwrap();
        for c in 0..3 {
            let col = d.u.column(c);
            let best = col.iter().cloned().fold(0.0f64, |b, x| if x.abs() > b.abs() { x } else { b });
            assert!(best > 0.0);
        }
    }

    #[test]
    fn matmul_variants_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random(6, 4, &mut rng);
        let b = random(6, 3, &mut rng);
        let direct = a.transpose().matmul(&b).unwrap();
        assert!(a.t_matmul(&b).unwrap().max_abs_diff(&direct).unwrap() < 1e-14);
        let v: Vec<f64> = (0..6).map(|_| rng.gen()).collect();
        let tv = a.t_mul_vec(&v);
        let col = Matrix::from_vec(6, 1, v).unwrap();
        let expect = a.t_matmul(&col).unwrap();
        for (x, y) in tv.iter().zip(expect.as_slice()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn shape_errors() {
        assert!(Matrix::from_vec(2, 2, vec![1.0]).is_err());
        assert!(Matrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(Matrix::zeros(2, 3).matmul(&Matrix::zeros(2, 3)).is_err());
        assert_eq!(
            Matrix::zeros(2, 2).normalized_rows(),
            Err(Error::ZeroVector { row: 0 })
        );
    }
}
