//! Single-shift core-chasing QR for unitary Hessenberg matrices given as
//! `G₁⋯G_{n-1}·D`.
//!
//! Because the triangular factor of a unitary Hessenberg matrix is the
//! unitary diagonal `D`, moving a core transformation through it is an O(1)
//! passthrough. A sweep is then O(n) core operations and the whole
//! eigenvalue computation O(n²) flops with O(n) memory.

use num_complex::{Complex, Complex64};

use crate::core_rotation::{fuse, fuse_left, passthrough_left, turnover_cores, CoreRotation, DiagonalPair};
use crate::error::{Error, Result};
use crate::factored_form::{entry_of, DescendingFactorization, Field};
use crate::scalar::{cone, to_c64, unit_phase, Real};
use crate::stats::EigenSample;

/// Phases closer than this are treated as a conjugate pair (or as a real
/// eigenvalue) when symmetrizing the spectrum of a real input.
pub const CONJUGATE_PAIR_TOL: f64 = 1e-8;

/// Chases without a deflation after which an exceptional shift is used.
const EXCEPTIONAL_PERIOD: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions<T> {
    /// A rotation with `|s| ≤ deflation_tol` is treated as the identity.
    pub deflation_tol: T,
    /// Chase budget per eigenvalue; the solver gives up after
    /// `max_iter_per_eig · n` chases.
    pub max_iter_per_eig: usize,
}

impl<T: Real> Default for SolverOptions<T> {
    /// `1e-14` in double precision, `8ε` where that is below unit roundoff.
    fn default() -> Self {
        Self {
            deflation_tol: T::of(1e-14).max(T::epsilon() * T::of(8.0)),
            max_iter_per_eig: 30,
        }
    }
}

impl<T: Real> SolverOptions<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.deflation_tol >= T::zero() && self.deflation_tol < T::of(1e-6)) {
            return Err(Error::InvalidOptions(format!(
                "deflation_tol must lie in [0, 1e-6), got {}",
                self.deflation_tol
            )));
        }
        if self.max_iter_per_eig == 0 {
            return Err(Error::InvalidOptions("max_iter_per_eig must be positive".into()));
        }
        Ok(())
    }
}

/// Mutable solver state: the factorization being chased, the active window
/// and the eigenvalues emitted so far.
///
/// Rows and columns below `hi` have been emitted. The window `[lo, hi]` is
/// an unreduced block: rotation `lo - 1` (if any) and rotation `hi` (if any)
/// are the identity.
#[derive(Clone, Debug)]
pub struct ChaseState<T> {
    field: Field,
    rot: Vec<CoreRotation<T>>,
    d: Vec<Complex<T>>,
    lo: usize,
    hi: usize,
    remaining: usize,
    chases: usize,
    turnovers: usize,
    since_deflation: usize,
    out: Vec<Complex<T>>,
}

impl<T: Real> ChaseState<T> {
    pub fn new(f: DescendingFactorization<T>) -> Self {
        let (field, rot, d) = f.into_parts();
        let n = d.len();
        Self {
            field,
            rot,
            d,
            lo: 0,
            hi: n - 1,
            remaining: n,
            chases: 0,
            turnovers: 0,
            since_deflation: 0,
            out: Vec::with_capacity(n),
        }
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    /// Active window `(lo, hi)`, inclusive and 0-based.
    pub fn window(&self) -> (usize, usize) {
        (self.lo, self.hi)
    }

    pub fn chases(&self) -> usize {
        self.chases
    }

    pub fn turnovers(&self) -> usize {
        self.turnovers
    }

    pub fn is_done(&self) -> bool {
        self.remaining == 0
    }

    /// Eigenvalues emitted so far, in deflation order.
    pub fn emitted(&self) -> &[Complex<T>] {
        &self.out
    }

    /// Current factorization, unitarily similar to the input.
    pub fn factorization(&self) -> DescendingFactorization<T> {
        DescendingFactorization::from_parts(self.field, self.rot.clone(), self.d.clone())
    }

    fn entry(&self, i: usize, j: usize) -> Complex<T> {
        entry_of(&self.rot, &self.d, i, j)
    }

    fn emit(&mut self, z: Complex<T>) {
        self.out.push(unit_phase(z));
        self.remaining -= 1;
        self.since_deflation = 0;
    }

    /// Emits converged trailing blocks and recomputes `lo` for the new `hi`.
    fn settle(&mut self) {
        while self.remaining > 0 {
            let hi = self.hi;
            let mut lo = hi;
            while lo > 0 && self.rot[lo - 1].s() != T::zero() {
                lo -= 1;
            }
            self.lo = lo;
            match hi - lo {
                0 => {
                    let z = self.d[hi];
                    self.emit(z);
                }
                1 => {
                    let g = self.rot[lo];
                    let (a, b) = solve_block2(g.c(), g.s(), self.d[lo], self.d[hi]);
                    self.emit(a);
                    self.emit(b);
                }
                _ => return,
            }
            if self.remaining == 0 {
                self.lo = 0;
                self.hi = 0;
                return;
            }
            self.hi = lo - 1;
        }
    }
}

/// Output of [`eigenvalues_with_report`].
#[derive(Clone, Debug)]
pub struct SolveReport<T> {
    pub sample: EigenSample<T>,
    pub chases: usize,
    pub turnovers: usize,
}

/// Eigenvalues of the unitary Hessenberg matrix `f`, in deflation order
/// (conjugate-symmetrized when `f` is real).
pub fn eigenvalues<T: Real>(f: DescendingFactorization<T>, opts: &SolverOptions<T>) -> Result<EigenSample<T>> {
    eigenvalues_with_report(f, opts).map(|r| r.sample)
}

pub fn eigenvalues_with_report<T: Real>(
    f: DescendingFactorization<T>,
    opts: &SolverOptions<T>,
) -> Result<SolveReport<T>> {
    opts.validate()?;
    let n = f.n();
    let field = f.field();
    let mut st = ChaseState::new(f);
    deflate_scan(&mut st, opts);
    let budget = opts.max_iter_per_eig * n;
    while !st.is_done() {
        if st.chases >= budget {
            return Err(Error::NoConvergence {
                n,
                chases: st.chases,
                partial: st.out.iter().map(|&z| to_c64(z)).collect(),
            });
        }
        let shift = if st.since_deflation > 0 && st.since_deflation.is_multiple_of(EXCEPTIONAL_PERIOD) {
            exceptional_shift(st.since_deflation / EXCEPTIONAL_PERIOD)
        } else {
            wilkinson_shift(&st)
        };
        chase_step(&mut st, shift);
        deflate_scan(&mut st, opts);
    }
    let mut values = std::mem::take(&mut st.out);
    if field == Field::Real {
        symmetrize_conjugates(&mut values);
    }
    Ok(SolveReport {
        sample: EigenSample::new_unchecked(values),
        chases: st.chases,
        turnovers: st.turnovers,
    })
}

/// Deterministic shift used when the Wilkinson shift stalls.
fn exceptional_shift<T: Real>(k: usize) -> Complex<T> {
    // golden-angle spacing keeps successive exceptional shifts apart
    let t = T::of(2.399_963_229_728_653 * k as f64);
    Complex::new(t.cos(), t.sin())
}

/// Eigenvalue of the trailing 2×2 block of the window closest to the corner
/// entry, projected onto the unit circle. Ties go to the larger imaginary
/// part; a vanishing eigenvalue gives shift 1.
pub fn wilkinson_shift<T: Real>(state: &ChaseState<T>) -> Complex<T> {
    let hi = state.hi;
    assert!(hi > state.lo, "shift needs an active block of size 2 or more");
    let a = state.entry(hi - 1, hi - 1);
    let b = state.entry(hi - 1, hi);
    let c = state.entry(hi, hi - 1);
    let d = state.entry(hi, hi);
    let two = T::one() + T::one();
    let half = (a - d).unscale(two);
    let disc = (half * half + b * c).sqrt();
    let mid = (a + d).unscale(two);
    let (l1, l2) = (mid + disc, mid - disc);
    let (e1, e2) = ((l1 - d).norm(), (l2 - d).norm());
    let scale = T::one().max(a.norm()).max(d.norm());
    let tie = T::epsilon() * T::of(16.0) * scale;
    let pick = if (e1 - e2).abs() <= tie {
        if l1.im >= l2.im {
            l1
        } else {
            l2
        }
    } else if e1 < e2 {
        l1
    } else {
        l2
    };
    if pick.norm() <= T::phase_floor() {
        cone()
    } else {
        unit_phase(pick)
    }
}

/// One implicit single-shift sweep over the active window.
///
/// The first rotation has first column proportional to
/// `(h_lo,lo - ρ, h_lo+1,lo)`. It is fused into `G_lo` from the left,
/// passed through `D` on the right, and chased down the window by
/// turnovers until it is fused into `G_{hi-1}`.
pub fn chase_step<T: Real>(state: &mut ChaseState<T>, shift: Complex<T>) {
    let (lo, hi) = (state.lo, state.hi);
    if hi <= lo {
        return;
    }
    let x = state.entry(lo, lo) - shift;
    let y = state.entry(lo + 1, lo);
    let ny = y.norm();
    if ny == T::zero() {
        // block already split at lo
        state.settle();
        return;
    }
    let nrm = (x.norm_sqr() + ny * ny).sqrt();
    let first = CoreRotation::new(x * unit_phase(y).conj().unscale(nrm), -ny / nrm);
    state.chases += 1;
    state.since_deflation += 1;

    // H ← Q* H Q. The right factor goes through D first.
    let (mut misfit, dp) = passthrough_left(&DiagonalPair::new(state.d[lo], state.d[lo + 1]), &first);
    state.d[lo] = dp.d1;
    state.d[lo + 1] = dp.d2;
    // Q*·G_lo = Δ·F; Δ moves to the right end by a diagonal similarity.
    let (delta, top) = fuse_left(&first.adjoint(), &state.rot[lo]);
    state.rot[lo] = top;
    state.d[lo] = unit_phase(state.d[lo] * delta.d1);
    state.d[lo + 1] = unit_phase(state.d[lo + 1] * delta.d2);

    for j in lo..hi - 1 {
        let (x, y, z, _) = turnover_cores(&state.rot[j], &state.rot[j + 1], &misfit);
        state.turnovers += 1;
        state.rot[j] = y;
        state.rot[j + 1] = z;
        let (next, dp) = passthrough_left(&DiagonalPair::new(state.d[j + 1], state.d[j + 2]), &x);
        state.d[j + 1] = dp.d1;
        state.d[j + 2] = dp.d2;
        misfit = next;
    }

    let (bottom, p) = fuse(&state.rot[hi - 1], &misfit);
    state.rot[hi - 1] = bottom;
    state.d[hi - 1] = unit_phase(state.d[hi - 1] * p.d1);
    state.d[hi] = unit_phase(state.d[hi] * p.d2);
}

/// Deflates every rotation of the window with `|s| ≤ deflation_tol`, then
/// emits the 1×1 and 2×2 blocks that split off at the bottom.
///
/// A deflated rotation `diag(c, c̄)` is removed by `d_j ← c·d_j`,
/// `d_{j+1} ← c̄·d_{j+1}`.
pub fn deflate_scan<T: Real>(state: &mut ChaseState<T>, opts: &SolverOptions<T>) {
    if state.is_done() {
        return;
    }
    for j in state.lo..state.hi {
        let g = state.rot[j];
        if g.s() != T::zero() && g.s().abs() > opts.deflation_tol {
            continue;
        }
        if g.is_identity() {
            continue;
        }
        let c = unit_phase(g.c());
        state.d[j] = unit_phase(c * state.d[j]);
        state.d[j + 1] = unit_phase(c.conj() * state.d[j + 1]);
        state.rot[j] = CoreRotation::identity();
    }
    state.settle();
}

/// Both eigenvalues of `[[c·d1, s·d2], [-s·d1, c̄·d2]]`, projected onto the
/// unit circle. Roots of `λ² - τλ + Δ` with `τ = c·d1 + c̄·d2`, `Δ = d1·d2`.
pub fn solve_block2<T: Real>(c: Complex<T>, s: T, d1: Complex<T>, d2: Complex<T>) -> (Complex<T>, Complex<T>) {
    if s == T::zero() {
        return (unit_phase(c * d1), unit_phase(c.conj() * d2));
    }
    let two = T::one() + T::one();
    let tau = c * d1 + c.conj() * d2;
    let det = d1 * d2;
    let half = tau.unscale(two);
    let mut root = (half * half - det).sqrt();
    // take the root that avoids cancellation
    if (half.conj() * root).re < T::zero() {
        root = -root;
    }
    let big = half + root;
    let small = if big.norm() <= T::phase_floor() { half - root } else { det / big };
    (unit_phase(big), unit_phase(small))
}

/// Restores exact conjugate symmetry of a real matrix's spectrum.
///
/// Values within [`CONJUGATE_PAIR_TOL`] of the real axis snap to `±1`; the
/// rest are matched upper/lower half-plane by phase and each matched pair
/// gets the averaged phase.
pub fn symmetrize_conjugates<T: Real>(values: &mut [Complex<T>]) {
    let tol = T::of(CONJUGATE_PAIR_TOL);
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for (k, z) in values.iter_mut().enumerate() {
        let t = z.arg();
        if t.abs() <= tol {
            *z = cone();
        } else if (T::PI() - t.abs()) <= tol {
            *z = -cone::<T>();
        } else if t > T::zero() {
            upper.push((t, k));
        } else {
            lower.push((-t, k));
        }
    }
    if upper.len() != lower.len() {
        return;
    }
    let by_phase = |a: &(T, usize), b: &(T, usize)| a.0.partial_cmp(&b.0).unwrap();
    upper.sort_by(by_phase);
    lower.sort_by(by_phase);
    for (&(tu, ku), &(tl, kl)) in upper.iter().zip(&lower) {
        if (tu - tl).abs() <= tol {
            let t = (tu + tl) / (T::one() + T::one());
            values[ku] = Complex::new(t.cos(), t.sin());
            values[kl] = Complex::new(t.cos(), -t.sin());
        }
    }
}

/// Convenience wrapper returning `Complex64` values for any scalar type.
pub fn eigenvalues_c64<T: Real>(f: DescendingFactorization<T>, opts: &SolverOptions<T>) -> Result<Vec<Complex64>> {
    Ok(eigenvalues(f, opts)?.values().iter().map(|&z| to_c64(z)).collect())
}
