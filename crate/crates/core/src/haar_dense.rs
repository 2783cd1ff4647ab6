//! Dense O(n³) baseline: Haar sampling through implicit Householder QR.
//!
//! [`umult`] applies a Haar-distributed orthogonal or unitary matrix to a
//! block of columns without ever forming the Gaussian matrix whose QR factor
//! it is. [`sample_haar_dense`] applies it to the identity, skipping the
//! columns that are still zero at each step.

use std::ops::{Index, IndexMut};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::factored_form::Field;
use crate::rand_dist::{std_normal_complex, std_normal_real, RngStream};
use crate::scalar::{cone, czero, from_c64, unit_phase, Real};

/// Largest order accepted by [`trace_power_sums`].
pub const TRACE_ORDER_CAP: usize = 2048;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![czero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = cone();
        }
        m
    }

    pub fn from_diagonal(d: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Domain(format!(
                "{} entries do not fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
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

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex<T>] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Mutable access to two distinct rows.
    pub fn row_pair_mut(&mut self, i: usize, k: usize) -> (&mut [Complex<T>], &mut [Complex<T>]) {
        assert!(i < k);
        let cols = self.cols;
        let (head, tail) = self.data.split_at_mut(k * cols);
        (&mut head[i * cols..(i + 1) * cols], &mut tail[..cols])
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == czero() {
                    continue;
                }
                let src = other.row(k);
                for (o, &b) in out.row_mut(i).iter_mut().zip(src) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(czero(), |acc, i| acc + self[(i, i)])
    }

    /// Largest entry modulus of `M*M - I`.
    pub fn gram_defect(&self) -> T {
        let g = self.adjoint().matmul(self);
        let mut worst = T::zero();
        for i in 0..g.rows {
            for j in 0..g.cols {
                let e = if i == j { g[(i, j)] - cone() } else { g[(i, j)] };
                worst = worst.max(e.norm());
            }
        }
        worst
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |w, (a, b)| w.max((*a - *b).norm()))
    }

    /// True when every entry below the first subdiagonal is exactly zero.
    pub fn is_upper_hessenberg(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i <= j + 1 || self[(i, j)] == czero()))
    }

    /// Determinant by LU factorization with partial pivoting.
    pub fn determinant(&self) -> Complex<T> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = cone::<T>();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&x, &y| a[(x, k)].norm().partial_cmp(&a[(y, k)].norm()).unwrap())
                .unwrap();
            if a[(p, k)] == czero() {
                return czero();
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(p * n + j, k * n + j);
                }
                det = -det;
            }
            let pivot = a[(k, k)];
            det = det * pivot;
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                if f == czero() {
                    continue;
                }
                for j in k..n {
                    let v = a[(k, j)];
                    a[(i, j)] = a[(i, j)] - f * v;
                }
            }
        }
        det
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

fn draw<T: Real>(field: Field, rng: &mut RngStream) -> Complex<T> {
    match field {
        Field::Real => Complex::new(T::of(std_normal_real(rng)), T::zero()),
        Field::Complex => from_c64(std_normal_complex(rng)),
    }
}

/// One Householder step of the implicit sampler: draws `v ~ N_F^k` and
/// returns the unit reflector direction `u` and the sign `d = -e^{i Arg v1}`.
fn reflector_step<T: Real>(k: usize, field: Field, rng: &mut RngStream) -> (Vec<Complex<T>>, Complex<T>) {
    let mut v: Vec<Complex<T>> = (0..k).map(|_| draw(field, rng)).collect();
    let d = -unit_phase(v[0]);
    let nv = v.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt();
    v[0] = v[0] - d.scale(nv);
    let nu = v.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt();
    if nu > T::zero() {
        for z in &mut v {
            *z = z.unscale(nu);
        }
    }
    (v, d)
}

/// Reflects rows `r0..r0+u.len()` of `x`, restricted to columns `c0..`:
/// `X₂ ← X₂ - 2u(u*X₂)`.
fn reflect_rows<T: Real>(x: &mut DenseMatrix<T>, u: &[Complex<T>], r0: usize, c0: usize) {
    let cols = x.cols;
    let mut w = vec![czero::<T>(); cols - c0];
    for (i, ui) in u.iter().enumerate() {
        let uc = ui.conj();
        for (wj, &xij) in w.iter_mut().zip(&x.row(r0 + i)[c0..]) {
            *wj = *wj + uc * xij;
        }
    }
    let two = T::one() + T::one();
    for (i, ui) in u.iter().enumerate() {
        let f = ui.scale(two);
        for (xij, &wj) in x.row_mut(r0 + i)[c0..].iter_mut().zip(&w) {
            *xij = *xij - f * wj;
        }
    }
}

fn finish<T: Real>(x: &mut DenseMatrix<T>, mut d: Vec<Complex<T>>, field: Field, rng: &mut RngStream) {
    let z: Complex<T> = draw(field, rng);
    d.push(-unit_phase(z));
    for (i, di) in d.into_iter().enumerate() {
        for v in x.row_mut(i) {
            *v = di * *v;
        }
    }
}

/// Overwrites `x` (n×m) with `QX`, `Q` Haar-distributed over O(n) (`Real`)
/// or U(n) (`Complex`). About `2n²m` flops.
pub fn umult<T: Real>(x: &mut DenseMatrix<T>, field: Field, rng: &mut RngStream) -> Result<()> {
    let n = x.rows;
    if n == 0 || x.cols == 0 {
        return Err(Error::ZeroOrder);
    }
    let mut d = vec![cone::<T>(); n - 1];
    for k in 2..=n {
        let (u, dk) = reflector_step::<T>(k, field, rng);
        d[n - k] = dk;
        reflect_rows(x, &u, n - k, 0);
    }
    finish(x, d, field, rng);
    Ok(())
}

/// Samples a dense Haar matrix from O(n) or U(n): `umult` applied to `I`.
///
/// Consumes exactly the same draws as `umult(I)`. Before step `k` only the
/// trailing k×k block of the last k rows is nonzero, which brings the cost
/// down to about `4n³/3` flops.
pub fn sample_haar_dense<T: Real>(n: usize, field: Field, rng: &mut RngStream) -> Result<DenseMatrix<T>> {
    if n == 0 {
        return Err(Error::ZeroOrder);
    }
    let mut x = DenseMatrix::identity(n);
    let mut d = vec![cone::<T>(); n - 1];
    for k in 2..=n {
        let (u, dk) = reflector_step::<T>(k, field, rng);
        d[n - k] = dk;
        reflect_rows(&mut x, &u, n - k, n - k);
    }
    finish(&mut x, d, field, rng);
    Ok(x)
}

/// `trace(M^k)` for `k = 1..=kmax`, by repeated multiplication.
pub fn trace_power_sums<T: Real>(m: &DenseMatrix<T>, kmax: usize) -> Result<Vec<Complex<T>>> {
    if !m.is_square() {
        return Err(Error::Domain("trace power sums need a square matrix".into()));
    }
    if kmax == 0 {
        return Err(Error::Domain("kmax must be at least 1".into()));
    }
    if m.rows > TRACE_ORDER_CAP {
        return Err(Error::DenseCapExceeded {
            n: m.rows,
            cap: TRACE_ORDER_CAP,
        });
    }
    let mut out = Vec::with_capacity(kmax);
    let mut p = m.clone();
    out.push(p.trace());
    for _ in 1..kmax {
        p = p.matmul(m);
        out.push(p.trace());
    }
    Ok(out)
}
