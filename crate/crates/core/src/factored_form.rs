//! O(n)-parameter representations of random unitary Hessenberg matrices.
//!
//! A [`HouseholderFactorization`] stores `H = P₁⋯P_{n-1}·D` with each `P_j`
//! a 2×2 reflector on `(j, j+1)`. A [`DescendingFactorization`] stores
//! `H = G₁⋯G_{n-1}·D` with real-sine plane rotations, the form the QR solver
//! consumes. Both are drawn so that the spectrum of `H` is distributed like
//! that of a Haar matrix from U(n) or O(n), optionally conditioned on the
//! determinant.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_complex::{Complex, Complex64};

use crate::core_rotation::{split_unitary2, CoreRotation, Mat2};
use crate::error::{Error, Result};
use crate::haar_dense::DenseMatrix;
use crate::rand_dist::{chi_complex_sq, chi_real, std_normal_complex, std_normal_real, uniform_phase, RngStream};
use crate::scalar::{cone, czero, from_c64, to_c64, unit_phase, Real};

/// Default order cap for [`DescendingFactorization::to_dense`].
pub const DEFAULT_DENSE_CAP: usize = 2048;

/// Scalar field of the sampled group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    /// O(n) and its determinant slices.
    Real,
    /// U(n) and its determinant slices.
    Complex,
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Real => "real",
            Field::Complex => "complex",
        })
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(Error::InvalidSpec(format!("unknown field '{other}'"))),
        }
    }
}

/// What to sample: order, field, optional determinant `ξ`, and seed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleSpec {
    pub n: usize,
    pub field: Field,
    pub det: Option<Complex64>,
    pub seed: u64,
}

impl SampleSpec {
    pub fn new(n: usize, field: Field) -> Self {
        Self { n, field, det: None, seed: 0 }
    }

    pub fn with_det(mut self, xi: Complex64) -> Self {
        self.det = Some(xi);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Fresh stream seeded from `seed`.
    pub fn rng(&self) -> RngStream {
        RngStream::new(self.seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::ZeroOrder);
        }
        if let Some(xi) = self.det {
            if !((xi.norm() - 1.0).abs() <= 1e-12) {
                return Err(Error::InvalidSpec(format!("|xi| = {} is not 1", xi.norm())));
            }
            if self.field == Field::Real && xi.im != 0.0 {
                return Err(Error::InvalidSpec(
                    "real matrices only admit determinant +1 or -1".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Test-only perturbations of the sampler, used to check that the
/// validation suite catches a broken sampler.
#[doc(hidden)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mutation {
    #[default]
    None,
    /// Replaces every chi draw by zero.
    SkipChi,
}

/// One reflector record `(α_j, β_j)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReflectorPair<T> {
    pub alpha: Complex<T>,
    pub beta: T,
}

impl<T: Real> ReflectorPair<T> {
    /// `v = (α + e^{iθ}‖w‖, β)` with `θ = Arg α`, `w = (α, β)`.
    pub fn direction(&self) -> [Complex<T>; 2] {
        let w = (self.alpha.norm_sqr() + self.beta * self.beta).sqrt();
        [
            self.alpha + unit_phase(self.alpha).scale(w),
            Complex::new(self.beta, T::zero()),
        ]
    }

    /// The 2×2 block `I - 2vv*/‖v‖²`; the identity when `v = 0`.
    pub fn block(&self) -> Mat2<T> {
        let v = self.direction();
        let nv = v[0].norm_sqr() + v[1].norm_sqr();
        let mut p = [[cone(), czero()], [czero(), cone()]];
        if nv <= T::zero() {
            return p;
        }
        let f = (T::one() + T::one()) / nv;
        for i in 0..2 {
            for j in 0..2 {
                p[i][j] = p[i][j] - (v[i] * v[j].conj()).scale(f);
            }
        }
        p
    }
}

/// `H = P₁⋯P_{n-1}·D`, `D = -diag(e^{iθ_1}, …, e^{iθ_n})`.
#[derive(Clone, Debug, PartialEq)]
pub struct HouseholderFactorization<T> {
    pub field: Field,
    pub pairs: Vec<ReflectorPair<T>>,
    /// `e^{iθ_j}` for `j = 1..=n`.
    pub phase_factors: Vec<Complex<T>>,
}

impl<T: Real> HouseholderFactorization<T> {
    pub fn n(&self) -> usize {
        self.phase_factors.len()
    }

    /// Phases `θ_j` in `(-π, π]`.
    pub fn phases(&self) -> Vec<T> {
        self.phase_factors.iter().map(|z| z.arg()).collect()
    }

    /// Explicit product of the reflectors and `D`.
    pub fn to_dense(&self) -> DenseMatrix<T> {
        let n = self.n();
        let mut h = DenseMatrix::from_diagonal(&self.phase_factors.iter().map(|&z| -z).collect::<Vec<_>>());
        for (j, pair) in self.pairs.iter().enumerate().rev() {
            apply_rows(&mut h, j, &pair.block(), j);
        }
        debug_assert_eq!(h.rows(), n);
        h
    }

    /// `det H = -∏ e^{iθ_j}` (each reflector has determinant -1).
    pub fn determinant(&self) -> Complex<T> {
        -self.phase_factors.iter().fold(cone::<T>(), |a, &z| a * z)
    }
}

/// Left-multiplies rows `j, j+1` of `h` by the 2×2 block `b`, touching only
/// columns `first_col..`.
fn apply_rows<T: Real>(h: &mut DenseMatrix<T>, j: usize, b: &Mat2<T>, first_col: usize) {
    let (r0, r1) = h.row_pair_mut(j, j + 1);
    for (x, y) in r0[first_col..].iter_mut().zip(&mut r1[first_col..]) {
        let (a0, a1) = (*x, *y);
        *x = b[0][0] * a0 + b[0][1] * a1;
        *y = b[1][0] * a0 + b[1][1] * a1;
    }
}

/// `H = G₁⋯G_{n-1}·D` with real-sine rotations `G_j` on `(j, j+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DescendingFactorization<T> {
    field: Field,
    rotations: Vec<CoreRotation<T>>,
    diagonal: Vec<Complex<T>>,
}

impl<T: Real> DescendingFactorization<T> {
    /// Assembles a factorization, checking lengths and `|d_j| = 1`.
    pub fn new(field: Field, rotations: Vec<CoreRotation<T>>, diagonal: Vec<Complex<T>>) -> Result<Self> {
        if diagonal.is_empty() {
            return Err(Error::ZeroOrder);
        }
        if rotations.len() + 1 != diagonal.len() {
            return Err(Error::Domain(format!(
                "{} rotations do not match {} diagonal entries",
                rotations.len(),
                diagonal.len()
            )));
        }
        let tol = T::of(1e-12).max(T::epsilon() * T::of(64.0));
        if let Some(d) = diagonal.iter().find(|d| !((d.norm() - T::one()).abs() <= tol)) {
            return Err(Error::Domain(format!("diagonal entry {d} is not unimodular")));
        }
        if let Some(g) = rotations.iter().find(|g| !(g.norm_defect() <= tol)) {
            return Err(Error::Domain(format!("rotation {g:?} is not normalized")));
        }
        Ok(Self { field, rotations, diagonal })
    }

    pub(crate) fn from_parts(field: Field, rotations: Vec<CoreRotation<T>>, diagonal: Vec<Complex<T>>) -> Self {
        Self { field, rotations, diagonal }
    }

    pub fn into_parts(self) -> (Field, Vec<CoreRotation<T>>, Vec<Complex<T>>) {
        (self.field, self.rotations, self.diagonal)
    }

    pub fn n(&self) -> usize {
        self.diagonal.len()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rotations(&self) -> &[CoreRotation<T>] {
        &self.rotations
    }

    pub fn diagonal(&self) -> &[Complex<T>] {
        &self.diagonal
    }

    /// `det H = ∏ d_j`, since every rotation has determinant one.
    pub fn determinant(&self) -> Complex<T> {
        self.diagonal.iter().fold(cone(), |a, &d| a * d)
    }

    /// Entry `h_{ij}` (0-based) from the closed form
    /// `h_ij = conj(c_{i-1}) (∏_{k=i}^{j-1} s_k) c_j d_j` for `i ≤ j`, with
    /// `c_{-1} = c_{n-1} = 1`, and `h_{j+1,j} = -s_j d_j`. Entries below the
    /// subdiagonal are exactly zero.
    pub fn entry(&self, i: usize, j: usize) -> Complex<T> {
        entry_of(&self.rotations, &self.diagonal, i, j)
    }

    /// Explicit `G₁⋯G_{n-1}·D`, for `n ≤` [`DEFAULT_DENSE_CAP`].
    pub fn to_dense(&self) -> Result<DenseMatrix<T>> {
        self.to_dense_capped(DEFAULT_DENSE_CAP)
    }

    pub fn to_dense_capped(&self, cap: usize) -> Result<DenseMatrix<T>> {
        let n = self.n();
        if n > cap {
            return Err(Error::DenseCapExceeded { n, cap });
        }
        let mut h = DenseMatrix::from_diagonal(&self.diagonal);
        for (j, g) in self.rotations.iter().enumerate().rev() {
            // rows j, j+1 of G_{j+1}⋯D vanish left of column j
            apply_rows(&mut h, j, &g.dense(), j);
        }
        Ok(h)
    }

    /// Converts the scalar type.
    pub fn cast<U: Real>(&self) -> DescendingFactorization<U> {
        DescendingFactorization {
            field: self.field,
            rotations: self.rotations.iter().map(|g| g.cast()).collect(),
            diagonal: self.diagonal.iter().map(|&d| from_c64(to_c64(d))).collect(),
        }
    }

    /// Text form: `n field`, then `Re(c) Im(c) s` per rotation, then
    /// `Re(d) Im(d)` per diagonal entry. Values round-trip exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n(), self.field);
        for g in &self.rotations {
            let _ = writeln!(out, "{} {} {}", g.c().re, g.c().im, g.s());
        }
        for d in &self.diagonal {
            let _ = writeln!(out, "{} {}", d.re, d.im);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hl, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let mut head = header.split_whitespace();
        let n: usize = parse_token(head.next(), hl)?;
        let field: Field = head
            .next()
            .ok_or_else(|| Error::Parse { line: hl, msg: "missing field".into() })?
            .parse()
            .map_err(|e: Error| Error::Parse { line: hl, msg: e.to_string() })?;
        if n == 0 {
            return Err(Error::ZeroOrder);
        }
        let mut rotations = Vec::with_capacity(n - 1);
        for _ in 0..n - 1 {
            let (ln, l) = lines.next().ok_or(Error::Parse {
                line: hl,
                msg: "truncated rotation list".into(),
            })?;
            let v = parse_row::<T>(l, 3, ln)?;
            rotations.push(CoreRotation::from_parts(Complex::new(v[0], v[1]), v[2]));
        }
        let mut diagonal = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, l) = lines.next().ok_or(Error::Parse {
                line: hl,
                msg: "truncated diagonal".into(),
            })?;
            let v = parse_row::<T>(l, 2, ln)?;
            diagonal.push(Complex::new(v[0], v[1]));
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::Parse { line: ln, msg: "trailing data".into() });
        }
        Self::new(field, rotations, diagonal)
    }
}

fn parse_token<V: FromStr>(tok: Option<&str>, line: usize) -> Result<V> {
    let tok = tok.ok_or_else(|| Error::Parse { line, msg: "missing value".into() })?;
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse '{tok}'"),
    })
}

fn parse_row<T: Real>(line: &str, width: usize, ln: usize) -> Result<Vec<T>> {
    let vals: Vec<f64> = line
        .split_whitespace()
        .map(|t| parse_token(Some(t), ln))
        .collect::<Result<_>>()?;
    if vals.len() != width {
        return Err(Error::Parse {
            line: ln,
            msg: format!("expected {width} values, found {}", vals.len()),
        });
    }
    Ok(vals.into_iter().map(T::of).collect())
}

pub(crate) fn entry_of<T: Real>(rot: &[CoreRotation<T>], d: &[Complex<T>], i: usize, j: usize) -> Complex<T> {
    let n = d.len();
    assert!(i < n && j < n, "entry ({i}, {j}) out of range for order {n}");
    if i > j + 1 {
        return czero();
    }
    if i == j + 1 {
        return -d[j].scale(rot[j].s());
    }
    let left = if i == 0 { cone() } else { rot[i - 1].c().conj() };
    let right = if j + 1 == n { cone() } else { rot[j].c() };
    let prod = rot[i..j].iter().fold(T::one(), |p, g| p * g.s());
    left * right * d[j].scale(prod)
}

fn draw_alpha<T: Real>(field: Field, rng: &mut RngStream) -> Complex<T> {
    match field {
        Field::Real => Complex::new(T::of(std_normal_real(rng)), T::zero()),
        Field::Complex => from_c64(std_normal_complex(rng)),
    }
}

/// `β_j` with `β_j² ~ χ²_F(k)`.
fn draw_beta<T: Real>(field: Field, k: u32, rng: &mut RngStream, mutation: Mutation) -> Result<T> {
    if mutation == Mutation::SkipChi {
        return Ok(T::zero());
    }
    Ok(T::of(match field {
        Field::Real => chi_real(k, rng)?,
        Field::Complex => chi_complex_sq(k, rng)?.sqrt(),
    }))
}

/// `e^{iθ_n}` for the unconstrained terminal phase.
fn draw_terminal<T: Real>(field: Field, rng: &mut RngStream) -> Complex<T> {
    match field {
        // θ_n uniform on {0, π}, from the sign of a real normal
        Field::Real => unit_phase(Complex::new(T::of(std_normal_real(rng)), T::zero())),
        Field::Complex => {
            let t = T::of(uniform_phase(rng));
            Complex::new(t.cos(), t.sin())
        }
    }
}

fn det_target<T: Real>(xi: Complex64) -> Complex<T> {
    unit_phase(from_c64(xi))
}

/// Samples the reflector form: `α_j ~ N_F(0,1)`, `β_j² ~ χ²_F(n-j)`.
///
/// Draw order per step is `α_j` then `β_j`, followed by one terminal draw
/// when no determinant is prescribed.
pub fn sample_householder_form<T: Real>(spec: &SampleSpec, rng: &mut RngStream) -> Result<HouseholderFactorization<T>> {
    sample_householder_form_with(spec, rng, Mutation::None)
}

#[doc(hidden)]
pub fn sample_householder_form_with<T: Real>(
    spec: &SampleSpec,
    rng: &mut RngStream,
    mutation: Mutation,
) -> Result<HouseholderFactorization<T>> {
    spec.validate()?;
    let n = spec.n;
    let mut pairs = Vec::with_capacity(n - 1);
    let mut phase_factors = Vec::with_capacity(n);
    for j in 1..n {
        let alpha = draw_alpha::<T>(spec.field, rng);
        let beta = draw_beta::<T>(spec.field, (n - j) as u32, rng, mutation)?;
        phase_factors.push(unit_phase(alpha));
        pairs.push(ReflectorPair { alpha, beta });
    }
    let last = match spec.det {
        None => draw_terminal(spec.field, rng),
        Some(xi) => {
            // det H = -∏ e^{iθ_j}
            let partial = phase_factors.iter().fold(cone::<T>(), |a, &z| a * z);
            unit_phase(-det_target::<T>(xi) * partial.conj())
        }
    };
    phase_factors.push(last);
    Ok(HouseholderFactorization {
        field: spec.field,
        pairs,
        phase_factors,
    })
}

/// One refactoring step: `diag(δ, 1)·P_j = G_j·diag(a, b)`.
///
/// Returns `G_j`, the factor `a` that lands on `d_j`, and the carry `b`
/// that multiplies the next reflector from the left.
fn refactor_step<T: Real>(pair: &ReflectorPair<T>, carry: Complex<T>) -> (CoreRotation<T>, Complex<T>, Complex<T>) {
    let p = pair.block();
    let u11 = carry * p[0][0];
    let u12 = carry * p[0][1];
    let (u21, u22) = (p[1][0], p[1][1]);
    let (g, d) = split_unitary2(u11, u21, u11 * u22 - u21 * u12);
    (g, d.d1, d.d2)
}

/// Rewrites `P₁⋯P_{n-1}·D` as `G₁⋯G_{n-1}·D̃` in O(n).
pub fn refactor_to_rotations<T: Real>(h: &HouseholderFactorization<T>) -> DescendingFactorization<T> {
    let n = h.n();
    let mut rotations = Vec::with_capacity(n.saturating_sub(1));
    let mut diagonal = Vec::with_capacity(n);
    let mut carry = cone::<T>();
    for (pair, &phase) in h.pairs.iter().zip(&h.phase_factors) {
        let (g, a, b) = refactor_step(pair, carry);
        rotations.push(g);
        diagonal.push(unit_phase(-phase * a));
        carry = b;
    }
    diagonal.push(unit_phase(-h.phase_factors[n - 1] * carry));
    DescendingFactorization::from_parts(h.field, rotations, diagonal)
}

/// Samples the rotation form directly, in one O(n) pass.
///
/// Consumes the same draws in the same order as [`sample_householder_form`],
/// so with equal streams the result matches
/// `refactor_to_rotations(sample_householder_form(..))`.
pub fn sample_descending<T: Real>(spec: &SampleSpec, rng: &mut RngStream) -> Result<DescendingFactorization<T>> {
    sample_descending_with(spec, rng, Mutation::None)
}

#[doc(hidden)]
pub fn sample_descending_with<T: Real>(
    spec: &SampleSpec,
    rng: &mut RngStream,
    mutation: Mutation,
) -> Result<DescendingFactorization<T>> {
    spec.validate()?;
    let n = spec.n;
    let mut rotations = Vec::with_capacity(n - 1);
    let mut diagonal = Vec::with_capacity(n);
    let mut carry = cone::<T>();
    for j in 1..n {
        let alpha = draw_alpha::<T>(spec.field, rng);
        let beta = draw_beta::<T>(spec.field, (n - j) as u32, rng, mutation)?;
        let (g, a, b) = refactor_step(&ReflectorPair { alpha, beta }, carry);
        rotations.push(g);
        diagonal.push(unit_phase(-unit_phase(alpha) * a));
        carry = b;
    }
    let last = match spec.det {
        None => unit_phase(-draw_terminal::<T>(spec.field, rng) * carry),
        Some(xi) => {
            let partial = diagonal.iter().fold(cone::<T>(), |a, &d| a * d);
            unit_phase(det_target::<T>(xi) * partial.conj())
        }
    };
    diagonal.push(last);
    Ok(DescendingFactorization::from_parts(spec.field, rotations, diagonal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::det_cofactor;
    use proptest::prelude::*;

    type C = Complex64;

    fn pipeline(spec: &SampleSpec, seed: u64) -> (DescendingFactorization<f64>, DescendingFactorization<f64>) {
        let direct = sample_descending::<f64>(spec, &mut RngStream::new(seed)).unwrap();
        let h = sample_householder_form::<f64>(spec, &mut RngStream::new(seed)).unwrap();
        (direct, refactor_to_rotations(&h))
    }

    fn dense_diff(a: &DescendingFactorization<f64>, b: &DescendingFactorization<f64>) -> f64 {
        a.to_dense().unwrap().max_abs_diff(&b.to_dense().unwrap())
    }

    #[test]
    fn spec_validation() {
        assert!(matches!(SampleSpec::new(0, Field::Real).validate(), Err(Error::ZeroOrder)));
        let s = SampleSpec::new(3, Field::Complex).with_det(C::new(1.1, 0.0));
        assert!(matches!(s.validate(), Err(Error::InvalidSpec(_))));
        let s = SampleSpec::new(3, Field::Real).with_det(C::new(0.0, 1.0));
        assert!(matches!(s.validate(), Err(Error::InvalidSpec(_))));
        assert!(SampleSpec::new(3, Field::Real).with_det(C::new(-1.0, 0.0)).validate().is_ok());
        assert!(SampleSpec::new(3, Field::Complex).with_det(C::new(0.6, 0.8)).validate().is_ok());
        assert_eq!("real".parse::<Field>().unwrap(), Field::Real);
        assert!("quaternion".parse::<Field>().is_err());
    }

    #[test]
    fn order_one_samples() {
        let spec = SampleSpec::new(1, Field::Complex);
        let h = sample_householder_form::<f64>(&spec, &mut RngStream::new(3)).unwrap();
        assert!(h.pairs.is_empty());
        assert!((h.phase_factors[0].norm() - 1.0).abs() < 1e-15);
        let f = sample_descending::<f64>(&spec, &mut RngStream::new(3)).unwrap();
        assert!(f.rotations().is_empty());
        assert_eq!(f.n(), 1);
        let m = f.to_dense().unwrap();
        assert_eq!(m[(0, 0)], f.diagonal()[0]);
    }

    #[test]
    fn order_one_phase_is_uniform() {
        let spec = SampleSpec::new(1, Field::Complex);
        let rng = RngStream::new(17);
        let th: Vec<f64> = (0..20_000)
            .map(|i| crate::stats::phase_of(sample_descending::<f64>(&spec, &mut rng.child(i)).unwrap().diagonal()[0]))
            .collect();
        assert!(crate::stats::ks_uniform_phase(&th) < crate::stats::ks_critical_001(th.len()));
    }

    #[test]
    fn beta_squared_mean_at_order_two() {
        let spec = SampleSpec::new(2, Field::Complex);
        let rng = RngStream::new(5);
        let n = 100_000;
        let mean = (0..n)
            .map(|i| {
                let h = sample_householder_form::<f64>(&spec, &mut rng.child(i)).unwrap();
                h.pairs[0].beta * h.pairs[0].beta
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn reflectors_are_unitary() {
        let spec = SampleSpec::new(12, Field::Complex);
        for seed in 0..50 {
            let h = sample_householder_form::<f64>(&spec, &mut RngStream::new(seed)).unwrap();
            for p in &h.pairs {
                assert!(p.beta >= 0.0);
                assert!(crate::core_rotation::unitary_defect2(&p.block()) <= 1e-13);
            }
        }
    }

    #[test]
    fn constrained_determinants() {
        for seed in 0..100 {
            let spec = SampleSpec::new(10, Field::Complex).with_det(C::new(1.0, 0.0));
            let (f, g) = pipeline(&spec, seed);
            assert!((f.determinant() - 1.0).norm() <= 1e-12);
            assert!((g.determinant() - 1.0).norm() <= 1e-12);
            let xi = C::new(0.6, -0.8);
            let spec = SampleSpec::new(7, Field::Complex).with_det(xi);
            let f = sample_descending::<f64>(&spec, &mut RngStream::new(seed)).unwrap();
            assert!((f.determinant().arg() - xi.arg()).abs() <= 1e-12);
            let spec = SampleSpec::new(9, Field::Real).with_det(C::new(-1.0, 0.0));
            let f = sample_descending::<f64>(&spec, &mut RngStream::new(seed)).unwrap();
            assert!((f.determinant() + 1.0).norm() <= 1e-13);
        }
    }

    #[test]
    fn householder_determinant_matches_dense() {
        for seed in 0..20 {
            for field in [Field::Real, Field::Complex] {
                let h = sample_householder_form::<f64>(&SampleSpec::new(6, field), &mut RngStream::new(seed)).unwrap();
                assert!((h.determinant() - det_cofactor(&h.to_dense())).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn refactor_agrees_densely() {
        for seed in 0..100 {
            for n in [2usize, 5, 13, 40] {
                let field = if seed % 3 == 0 { Field::Real } else { Field::Complex };
                let h = sample_householder_form::<f64>(&SampleSpec::new(n, field), &mut RngStream::new(seed)).unwrap();
                let f = refactor_to_rotations(&h);
                let diff = f.to_dense().unwrap().max_abs_diff(&h.to_dense());
                let tol = if n == 5 { 1e-13 } else { 1e-12 * n as f64 };
                assert!(diff <= tol, "n={n} seed={seed} diff={diff:e}");
            }
        }
    }

    #[test]
    fn refactor_preserves_determinant() {
        for seed in 0..30 {
            let n = 2 + seed as usize % 9;
            let h = sample_householder_form::<f64>(&SampleSpec::new(n, Field::Complex), &mut RngStream::new(seed)).unwrap();
            let f = refactor_to_rotations(&h);
            assert!((f.determinant() - det_cofactor(&h.to_dense())).norm() <= 1e-12);
        }
    }

    #[test]
    fn degenerate_reflector_gives_identity_rotation() {
        let h = HouseholderFactorization {
            field: Field::Real,
            pairs: vec![ReflectorPair { alpha: C::new(0.7, 0.0), beta: 0.0 }],
            phase_factors: vec![C::new(1.0, 0.0), C::new(-1.0, 0.0)],
        };
        let f = refactor_to_rotations(&h);
        assert_eq!(f.rotations()[0].s(), 0.0);
        assert!(f.to_dense().unwrap().max_abs_diff(&h.to_dense()) < 1e-15);
    }

    #[test]
    fn transcript_matched_pipeline() {
        let (f, g) = pipeline(&SampleSpec::new(6, Field::Complex), 2024);
        assert!(dense_diff(&f, &g) <= 1e-13);
        for seed in 0..100 {
            for n in [1usize, 2, 3, 8, 17, 33, 64] {
                for spec in [
                    SampleSpec::new(n, Field::Complex),
                    SampleSpec::new(n, Field::Real),
                    SampleSpec::new(n, Field::Complex).with_det(C::new(0.0, 1.0)),
                    SampleSpec::new(n, Field::Real).with_det(C::new(1.0, 0.0)),
                ] {
                    let (f, g) = pipeline(&spec, seed);
                    assert!(dense_diff(&f, &g) <= 1e-12 * n as f64, "n={n} seed={seed} {spec:?}");
                }
            }
        }
    }

    #[test]
    fn real_samples_are_real() {
        for seed in 0..50 {
            let f = sample_descending::<f64>(&SampleSpec::new(15, Field::Real), &mut RngStream::new(seed)).unwrap();
            for g in f.rotations() {
                assert_eq!(g.c().im, 0.0);
            }
            for d in f.diagonal() {
                assert!(*d == C::new(1.0, 0.0) || *d == C::new(-1.0, 0.0), "{d}");
            }
        }
    }

    #[test]
    fn dense_form_examples() {
        let one = C::new(1.0, 0.0);
        let swap = CoreRotation::new(C::new(0.0, 0.0), 1.0);
        let f = DescendingFactorization::new(Field::Real, vec![swap, swap], vec![one; 3]).unwrap();
        let m = f.to_dense().unwrap();
        // [[0,1,0],[-1,0,0],[0,0,1]]·[[1,0,0],[0,0,1],[0,-1,0]]
        let z = C::new(0.0, 0.0);
        let want = DenseMatrix::from_rows(3, 3, vec![z, z, one, -one, z, z, z, -one, z]).unwrap();
        assert_eq!(m, want);
        let f = sample_descending::<f64>(&SampleSpec::new(50, Field::Complex), &mut RngStream::new(9)).unwrap();
        let m = f.to_dense().unwrap();
        assert!(m.gram_defect() <= 1e-12);
        assert!(m.is_upper_hessenberg());
        assert!(matches!(f.to_dense_capped(10), Err(Error::DenseCapExceeded { n: 50, cap: 10 })));
    }

    #[test]
    fn entries_match_dense() {
        for seed in 0..20 {
            let n = 1 + seed as usize % 9;
            let f = sample_descending::<f64>(&SampleSpec::new(n, Field::Complex), &mut RngStream::new(seed)).unwrap();
            let m = f.to_dense().unwrap();
            for i in 0..n {
                for j in 0..n {
                    assert!((f.entry(i, j) - m[(i, j)]).norm() <= 1e-14, "({i},{j})");
                }
            }
            for j in 0..n.saturating_sub(1) {
                assert!((m[(j + 1, j)].norm() - f.rotations()[j].s().abs()).abs() <= 1e-14);
            }
            if n >= 2 {
                let (g0, gl) = (f.rotations()[0], f.rotations()[n - 2]);
                assert!((f.entry(1, 0) + f.diagonal()[0] * g0.s()).norm() < 1e-15);
                assert!((f.entry(0, 0) - g0.c() * f.diagonal()[0]).norm() < 1e-15);
                assert!((f.entry(n - 1, n - 1) - gl.c().conj() * f.diagonal()[n - 1]).norm() < 1e-15);
            }
            if n > 2 {
                assert_eq!(f.entry(n - 1, 0), C::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn determinant_matches_cofactor() {
        let f = DescendingFactorization::new(Field::Complex, vec![CoreRotation::identity(); 3], vec![C::new(1.0, 0.0); 4]).unwrap();
        assert_eq!(f.determinant(), C::new(1.0, 0.0));
        for seed in 0..30 {
            let n = 1 + seed as usize % 8;
            let f = sample_descending::<f64>(&SampleSpec::new(n, Field::Complex), &mut RngStream::new(seed)).unwrap();
            assert!((f.determinant().norm() - 1.0).abs() <= 1e-13);
            assert!((f.determinant() - det_cofactor(&f.to_dense().unwrap())).norm() <= 1e-12);
        }
    }

    #[test]
    fn constructor_rejects_bad_input() {
        let one = C::new(1.0, 0.0);
        assert!(DescendingFactorization::<f64>::new(Field::Real, vec![], vec![]).is_err());
        assert!(DescendingFactorization::new(Field::Real, vec![], vec![one, one]).is_err());
        assert!(DescendingFactorization::new(Field::Real, vec![], vec![C::new(2.0, 0.0)]).is_err());
    }

    #[test]
    fn text_round_trip() {
        for field in [Field::Real, Field::Complex] {
            let f = sample_descending::<f64>(&SampleSpec::new(9, field), &mut RngStream::new(4)).unwrap();
            let g = DescendingFactorization::<f64>::from_text(&f.to_text()).unwrap();
            assert_eq!(f, g);
            let f32v = f.cast::<f32>();
            assert_eq!(DescendingFactorization::<f32>::from_text(&f32v.to_text()).unwrap(), f32v);
        }
        let with_comments = "# order 1\n1 complex\n\n0 1\n";
        assert_eq!(DescendingFactorization::<f64>::from_text(with_comments).unwrap().diagonal()[0], C::new(0.0, 1.0));
    }

    #[test]
    fn text_errors() {
        let cases = ["", "2 complex\n1 0 0\n1 0\n", "1 complex\n1 0\n1 0\n", "1 octonion\n1 0\n", "1 real\nx 0\n", "1 real\n1 0 0\n"];
        for t in cases {
            assert!(DescendingFactorization::<f64>::from_text(t).is_err(), "{t:?}");
        }
        assert!(matches!(DescendingFactorization::<f64>::from_text("0 real\n"), Err(Error::ZeroOrder)));
    }

    #[test]
    fn skip_chi_mutation_zeroes_sines() {
        let spec = SampleSpec::new(8, Field::Complex);
        let f = sample_descending_with::<f64>(&spec, &mut RngStream::new(1), Mutation::SkipChi).unwrap();
        assert!(f.rotations().iter().all(|g| g.s() == 0.0));
    }

    #[test]
    fn single_precision_sampler() {
        let spec = SampleSpec::new(30, Field::Complex);
        let a = sample_descending::<f32>(&spec, &mut RngStream::new(8)).unwrap();
        let b = sample_descending::<f64>(&spec, &mut RngStream::new(8)).unwrap();
        let diff = a.cast::<f64>().to_dense().unwrap().max_abs_diff(&b.to_dense().unwrap());
        assert!(diff < 1e-4, "{diff}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sampled_factorizations_are_unitary_hessenberg(n in 1usize..40, seed in any::<u64>(), real in any::<bool>()) {
            let field = if real { Field::Real } else { Field::Complex };
            let f = sample_descending::<f64>(&SampleSpec::new(n, field), &mut RngStream::new(seed)).unwrap();
            prop_assert_eq!(f.n(), n);
            for d in f.diagonal() {
                prop_assert!((d.norm() - 1.0).abs() <= 1e-14);
            }
            let m = f.to_dense().unwrap();
            prop_assert!(m.gram_defect() <= 1e-12);
            prop_assert!(m.is_upper_hessenberg());
        }

        #[test]
        fn serialization_round_trips(n in 1usize..20, seed in any::<u64>()) {
            let f = sample_descending::<f64>(&SampleSpec::new(n, Field::Complex), &mut RngStream::new(seed)).unwrap();
            prop_assert_eq!(DescendingFactorization::<f64>::from_text(&f.to_text()).unwrap(), f);
        }
    }
}
