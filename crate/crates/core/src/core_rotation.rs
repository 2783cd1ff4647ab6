//! Algebra of essentially 2×2 core transformations.
//!
//! A [`CoreRotation`] is the plane rotation
//!
//! ```text
//! [  c   s ]
//! [ -s  c̄ ]      c complex, s real, |c|² + s² = 1
//! ```
//!
//! acting on two adjacent indices. The operations here (refactoring a 2×2
//! unitary, fusion, passing a diagonal through a rotation, and the turnover)
//! are everything the core-chasing QR sweep needs. All of them are pure
//! value-to-value functions.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, unit_phase, Real};

/// Dense 2×2 complex matrix, row-major.
pub type Mat2<T> = [[Complex<T>; 2]; 2];
/// Dense 3×3 complex matrix, row-major.
pub type Mat3<T> = [[Complex<T>; 3]; 3];

/// Unitarity defect above which [`rotation_from_unitary2`] refuses its input.
pub const UNITARY_DEFECT_LIMIT: f64 = 1e-10;

/// Plane rotation with complex cosine and real sine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoreRotation<T> {
    c: Complex<T>,
    s: T,
}

impl<T: Real> CoreRotation<T> {
    /// Builds a rotation, rescaling `(c, s)` onto `|c|² + s² = 1`.
    ///
    /// A zero pair yields the identity.
    pub fn new(c: Complex<T>, s: T) -> Self {
        let nrm = (c.norm_sqr() + s * s).sqrt();
        if nrm <= T::phase_floor() || !nrm.is_finite() {
            return Self::identity();
        }
        Self { c: c.unscale(nrm), s: s / nrm }
    }

    /// Builds a rotation without rescaling. The caller guarantees the
    /// normalization invariant.
    pub(crate) fn from_parts(c: Complex<T>, s: T) -> Self {
        Self { c, s }
    }

    pub fn identity() -> Self {
        Self { c: cone(), s: T::zero() }
    }

    pub fn c(&self) -> Complex<T> {
        self.c
    }

    pub fn s(&self) -> T {
        self.s
    }

    /// Conjugate transpose `G*`, again a rotation: `G(c̄, -s)`.
    pub fn adjoint(&self) -> Self {
        Self { c: self.c.conj(), s: -self.s }
    }

    /// `| |c|² + s² - 1 |`.
    pub fn norm_defect(&self) -> T {
        (self.c.norm_sqr() + self.s * self.s - T::one()).abs()
    }

    pub fn is_identity(&self) -> bool {
        self.s == T::zero() && self.c == cone()
    }

    pub fn dense(&self) -> Mat2<T> {
        dense2(self)
    }

    pub fn cast<U: Real>(&self) -> CoreRotation<U> {
        CoreRotation {
            c: Complex::new(U::of(self.c.re.to_f64().unwrap()), U::of(self.c.im.to_f64().unwrap())),
            s: U::of(self.s.to_f64().unwrap()),
        }
    }
}

impl<T: Real> Default for CoreRotation<T> {
    fn default() -> Self {
        Self::identity()
    }
}

/// Pair of unimodular scalars forming a 2×2 unitary diagonal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagonalPair<T> {
    pub d1: Complex<T>,
    pub d2: Complex<T>,
}

impl<T: Real> DiagonalPair<T> {
    pub fn new(d1: Complex<T>, d2: Complex<T>) -> Self {
        Self { d1, d2 }
    }

    pub fn identity() -> Self {
        Self { d1: cone(), d2: cone() }
    }

    pub fn dense(&self) -> Mat2<T> {
        [[self.d1, czero()], [czero(), self.d2]]
    }
}

/// A core rotation together with the plane `(j, j+1)` it acts on (0-based).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndexedRotation<T> {
    pub rot: CoreRotation<T>,
    pub j: usize,
}

impl<T: Real> IndexedRotation<T> {
    pub fn new(rot: CoreRotation<T>, j: usize) -> Self {
        Self { rot, j }
    }
}

/// Materializes a rotation as a dense 2×2 matrix.
pub fn dense2<T: Real>(g: &CoreRotation<T>) -> Mat2<T> {
    let s = Complex::new(g.s, T::zero());
    [[g.c, s], [-s, g.c.conj()]]
}

pub fn mul2<T: Real>(a: &Mat2<T>, b: &Mat2<T>) -> Mat2<T> {
    let mut out = [[czero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mul3<T: Real>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[czero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

/// Embeds an indexed rotation into the 3×3 window starting at `base`.
fn embed3<T: Real>(g: &IndexedRotation<T>, base: usize) -> Mat3<T> {
    let mut m = [[czero(); 3]; 3];
    for (k, row) in m.iter_mut().enumerate() {
        row[k] = cone();
    }
    let k = g.j - base;
    let b = dense2(&g.rot);
    m[k][k] = b[0][0];
    m[k][k + 1] = b[0][1];
    m[k + 1][k] = b[1][0];
    m[k + 1][k + 1] = b[1][1];
    m
}

/// Dense 3×3 product `a·b·c` of three rotations whose planes fit in one
/// 3×3 window (the window starts at the smallest index).
pub fn dense3<T: Real>(a: &IndexedRotation<T>, b: &IndexedRotation<T>, c: &IndexedRotation<T>) -> Mat3<T> {
    let base = a.j.min(b.j).min(c.j);
    assert!(
        a.j.max(b.j).max(c.j) <= base + 1,
        "rotations do not fit in a 3x3 window"
    );
    mul3(&mul3(&embed3(a, base), &embed3(b, base)), &embed3(c, base))
}

/// Largest entry of `U*U - I`.
pub fn unitary_defect2<T: Real>(u: &Mat2<T>) -> T {
    let mut worst = T::zero();
    for i in 0..2 {
        for j in 0..2 {
            let mut g = u[0][i].conj() * u[0][j] + u[1][i].conj() * u[1][j];
            if i == j {
                g = g - cone();
            }
            worst = worst.max(g.norm());
        }
    }
    worst
}

/// Splits a 2×2 unitary as `U = G·diag(d1, d2)` with `G` a real-sine rotation.
///
/// With `θ = Arg conj(u21)`: `c = u11 e^{iθ}`, `s = -u21 e^{iθ} = -|u21|`,
/// `d1 = e^{-iθ}|u11|² + e^{iθ}u21²`, `d2 = e^{iθ}(u11 u22 - u21 u12)`.
pub fn rotation_from_unitary2<T: Real>(u: &Mat2<T>) -> Result<(CoreRotation<T>, DiagonalPair<T>)> {
    let defect = unitary_defect2(u);
    if !(defect <= T::of(UNITARY_DEFECT_LIMIT)) {
        return Err(Error::NotUnitary {
            defect: defect.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(split_unitary2(u[0][0], u[1][0], u[0][0] * u[1][1] - u[1][0] * u[0][1]))
}

/// Core of the 2×2 split, from the first column and the determinant.
pub(crate) fn split_unitary2<T: Real>(
    u11: Complex<T>,
    u21: Complex<T>,
    det: Complex<T>,
) -> (CoreRotation<T>, DiagonalPair<T>) {
    let phi = unit_phase(u21.conj());
    let c = u11 * phi;
    let s = -u21.norm();
    let d1 = phi.conj() * u11.norm_sqr() + phi * u21 * u21;
    let d2 = phi * det;
    (
        CoreRotation::new(c, s),
        DiagonalPair::new(unit_phase(d1), unit_phase(d2)),
    )
}

/// Product of two rotations on the same plane, refactored as `G·diag(d1, d2)`.
pub fn fuse<T: Real>(a: &CoreRotation<T>, b: &CoreRotation<T>) -> (CoreRotation<T>, DiagonalPair<T>) {
    let (ca, sa, cb, sb) = (a.c, a.s, b.c, b.s);
    let u11 = ca * cb - Complex::new(sa * sb, T::zero());
    let u21 = -(cb.scale(sa)) - ca.conj().scale(sb);
    let phi = unit_phase(u21.conj());
    let c = u11 * phi;
    let s = -u21.norm();
    // both factors have determinant one, so d = (e^{-iθ}, e^{iθ})
    (CoreRotation::new(c, s), DiagonalPair::new(phi.conj(), phi))
}

/// Product of two rotations on the same plane, refactored as `diag(d1, d2)·G`.
pub fn fuse_left<T: Real>(a: &CoreRotation<T>, b: &CoreRotation<T>) -> (DiagonalPair<T>, CoreRotation<T>) {
    let (g, d) = fuse(a, b);
    passthrough_right(&g, &d)
}

/// `diag(d1, d2)·G(c, s) = G(c·d1·conj(d2), s)·diag(d2, d1)`.
pub fn passthrough_left<T: Real>(d: &DiagonalPair<T>, g: &CoreRotation<T>) -> (CoreRotation<T>, DiagonalPair<T>) {
    (
        CoreRotation::from_parts(g.c * d.d1 * d.d2.conj(), g.s),
        DiagonalPair::new(d.d2, d.d1),
    )
}

/// `G(c, s)·diag(d1, d2) = diag(d2, d1)·G(c·d1·conj(d2), s)`.
pub fn passthrough_right<T: Real>(g: &CoreRotation<T>, d: &DiagonalPair<T>) -> (DiagonalPair<T>, CoreRotation<T>) {
    (
        DiagonalPair::new(d.d2, d.d1),
        CoreRotation::from_parts(g.c * d.d1 * d.d2.conj(), g.s),
    )
}

/// Result of a turnover `A_i B_{i+1} C_i = X_{i+1} Y_i Z_{i+1}`.
#[derive(Clone, Copy, Debug)]
pub struct Turnover<T> {
    pub x: IndexedRotation<T>,
    pub y: IndexedRotation<T>,
    pub z: IndexedRotation<T>,
    /// The first column of the product was already a multiple of `e1`, so
    /// `x` is the identity and all phases live in `y` and `z`.
    pub degenerate: bool,
}

/// Turnover on the index pattern `(i, i+1, i)`.
pub fn turnover<T: Real>(
    a: &IndexedRotation<T>,
    b: &IndexedRotation<T>,
    c: &IndexedRotation<T>,
) -> Result<Turnover<T>> {
    let i = a.j;
    if c.j != i || b.j != i + 1 {
        return Err(Error::Domain(format!(
            "turnover needs index pattern (i, i+1, i), got ({}, {}, {})",
            a.j, b.j, c.j
        )));
    }
    let (x, y, z, degenerate) = turnover_cores(&a.rot, &b.rot, &c.rot);
    Ok(Turnover {
        x: IndexedRotation::new(x, i + 1),
        y: IndexedRotation::new(y, i),
        z: IndexedRotation::new(z, i + 1),
        degenerate,
    })
}

/// Turnover on bare rotations: given `A` on `(0,1)`, `B` on `(1,2)`, `C` on
/// `(0,1)`, returns `X` on `(1,2)`, `Y` on `(0,1)`, `Z` on `(1,2)` with
/// `ABC = XYZ`, plus the degeneracy flag.
///
/// `X` zeroes the `(3,1)` entry of the product, `Y` then reduces its first
/// column to `e1`, and `Z` is read off the remaining 2×2 block.
pub fn turnover_cores<T: Real>(
    a: &CoreRotation<T>,
    b: &CoreRotation<T>,
    c: &CoreRotation<T>,
) -> (CoreRotation<T>, CoreRotation<T>, CoreRotation<T>, bool) {
    let (ca, sa) = (a.c, a.s);
    let (cb, sb) = (b.c, b.s);
    let (cc, sc) = (c.c, c.s);
    let real = |x: T| Complex::new(x, T::zero());

    // M = A·B·C, all nine entries.
    let m11 = ca * cc - cb.scale(sa * sc);
    let m12 = ca.scale(sc) + (cc.conj() * cb).scale(sa);
    let m13 = real(sa * sb);
    let m21 = -(cc.scale(sa)) - (ca.conj() * cb).scale(sc);
    let m22 = ca.conj() * cc.conj() * cb - real(sa * sc);
    let m23 = ca.conj().scale(sb);
    let m31 = sb * sc;
    let m32 = -(cc.conj().scale(sb));
    let m33 = cb.conj();

    let rho = (m21.norm_sqr() + m31 * m31).sqrt();
    let degenerate = rho <= T::phase_floor();
    let (cx, sx) = if degenerate {
        (cone(), T::zero())
    } else {
        (m21.unscale(rho), -m31 / rho)
    };
    let y = CoreRotation::new(m11, -rho);
    let x = CoreRotation::from_parts(cx, sx);

    // rows 2 and 3 of X*·M restricted to columns 2, 3
    let r2 = [cx.conj() * m22 - m32.scale(sx), cx.conj() * m23 - m33.scale(sx)];
    let r3 = [m22.scale(sx) + cx * m32, m23.scale(sx) + cx * m33];
    // row 2 of Y*·(X*·M)
    let (cy, sy) = (y.c, y.s);
    let w22 = m12.scale(sy) + cy * r2[0];
    let w23 = m13.scale(sy) + cy * r2[1];
    let (w32, w33) = (r3[0], r3[1]);

    let two = T::one() + T::one();
    let cz = (w22 + w33.conj()).unscale(two);
    let sz = (w23.re - w32.re) / two;
    (x, y, CoreRotation::new(cz, sz), degenerate)
}
