//! Monte-Carlo validation of the samplers and the solver.
//!
//! Each check returns a [`Criterion`] carrying the observed statistic and the
//! threshold it was compared against. Trials run on a rayon pool; trial `i`
//! always uses child stream `i` of the root seed, so results do not depend
//! on the number of workers.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::core_rotation::{
    dense3, fuse, fuse_left, mul2, passthrough_left, passthrough_right, rotation_from_unitary2, turnover, CoreRotation,
    DiagonalPair, IndexedRotation, Mat2, Mat3,
};
use crate::error::{Error, Result};
use crate::factored_form::{
    refactor_to_rotations, sample_descending_with, sample_householder_form, Field, Mutation, SampleSpec,
};
use crate::haar_dense::{sample_haar_dense, trace_power_sums};
use crate::rand_dist::{std_normal_complex, std_normal_real, RngStream};
use crate::scalar::unit_phase;
use crate::stats::{
    atom_mass, ks_critical_001, ks_uniform_phase, periodicity_defect, phase_of, spacings, tv_distance,
    uniform_edges, wigner_density, EigenSample, HistogramCounts,
};
use crate::unitary_qr::{eigenvalues, SolverOptions};

const TAU: f64 = 2.0 * PI;

/// Trial count the periodicity and moment thresholds are calibrated for.
pub const REFERENCE_TRIALS: usize = 100_000;

/// Spacing TV tolerance against the Wigner surmise.
pub const SPACING_TV_TOL: f64 = 0.03;

/// Upper end of the spacing histogram support.
pub const SPACING_MAX: f64 = 3.0;

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq)]
pub struct Criterion {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Criterion {
    /// Passes when `statistic < threshold`.
    pub fn below(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            statistic,
            threshold,
            pass: statistic < threshold,
        }
    }

    /// Passes when `statistic ≤ threshold`.
    pub fn at_most(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            statistic,
            threshold,
            pass: statistic <= threshold,
        }
    }

    /// Passes when `statistic ≥ threshold`.
    pub fn at_least(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            statistic,
            threshold,
            pass: statistic >= threshold,
        }
    }
}

impl fmt::Display for Criterion {
    /// `name<TAB>statistic<TAB>threshold<TAB>PASS|FAIL`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{:.6e}\t{:.6e}\t{}",
            self.name,
            self.statistic,
            self.threshold,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Runs `f(i, child_i)` for `i in 0..trials`, results in trial order.
pub fn par_trials<R, F>(trials: usize, seed: u64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64, &mut RngStream) -> R + Sync,
{
    let root = RngStream::new(seed);
    (0..trials as u64)
        .into_par_iter()
        .map(|i| f(i, &mut root.child(i)))
        .collect()
}

/// Like [`par_trials`] but stops at the first error (in trial order).
pub fn try_par_trials<R, F>(trials: usize, seed: u64, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(u64, &mut RngStream) -> Result<R> + Sync,
{
    par_trials(trials, seed, f).into_iter().collect()
}

/// Samples one factored matrix and returns its eigenvalues.
pub fn sample_eigenvalues(spec: &SampleSpec, rng: &mut RngStream, mutation: Mutation) -> Result<EigenSample> {
    let f = sample_descending_with::<f64>(spec, rng, mutation)?;
    eigenvalues(f, &SolverOptions::default())
}

/// Eigenvalue samples of `trials` matrices drawn from `spec` (its seed is
/// the root seed).
pub fn eigen_trials(spec: &SampleSpec, trials: usize, mutation: Mutation) -> Result<Vec<EigenSample>> {
    try_par_trials(trials, spec.seed, |_, rng| sample_eigenvalues(spec, rng, mutation))
}

/// Power-sum and determinant agreement of the solver with the dense form,
/// plus unimodularity, over orders `ns` and `seeds` seeds per order.
pub fn spectral_oracle(ns: &[usize], seeds: u64, fields: &[Field], seed: u64) -> Result<Vec<Criterion>> {
    let mut cases = Vec::new();
    for &n in ns {
        for &field in fields {
            for s in 0..seeds {
                cases.push((n, field, s));
            }
        }
    }
    let root = RngStream::new(seed);
    let rows: Vec<(f64, f64, f64)> = cases
        .par_iter()
        .enumerate()
        .map(|(i, &(n, field, _))| -> Result<(f64, f64, f64)> {
            let mut rng = root.child(i as u64);
            let f = sample_descending_with::<f64>(&SampleSpec::new(n, field), &mut rng, Mutation::None)?;
            let want = trace_power_sums(&f.to_dense()?, 5)?;
            let det = f.determinant();
            let e = eigenvalues(f, &SolverOptions::default())?;
            let mut power = e.values().to_vec();
            let mut psum_err = 0.0f64;
            for w in &want {
                let got: Complex64 = power.iter().sum();
                psum_err = psum_err.max((got - w).norm());
                for (p, z) in power.iter_mut().zip(e.values()) {
                    *p *= z;
                }
            }
            let prod: Complex64 = e.values().iter().product();
            let modulus = e.values().iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max);
            Ok((psum_err / n as f64, (prod - det).norm() / n as f64, modulus))
        })
        .collect::<Result<_>>()?;
    let worst = |k: usize| {
        rows.iter()
            .map(|r| [r.0, r.1, r.2][k])
            .fold(0.0, f64::max)
    };
    Ok(vec![
        Criterion::at_most("spectral_power_sums_per_n", worst(0), 1e-8),
        Criterion::at_most("spectral_determinant_per_n", worst(1), 1e-10),
        Criterion::at_most("spectral_unit_modulus", worst(2), 1e-12),
    ])
}

/// Dense agreement of the fused sampler with the two-stage pipeline on a
/// shared draw transcript, for orders `1..=max_n`.
pub fn pipeline_equivalence(max_n: usize, seeds: u64, seed: u64) -> Result<Criterion> {
    let cases: Vec<(usize, Field, u64)> = (1..=max_n)
        .flat_map(|n| (0..seeds).flat_map(move |s| [(n, Field::Complex, s), (n, Field::Real, s)]))
        .collect();
    let root = RngStream::new(seed);
    let worst = cases
        .par_iter()
        .enumerate()
        .map(|(i, &(n, field, _))| -> Result<f64> {
            let spec = SampleSpec::new(n, field);
            let stream = root.child(i as u64);
            let direct = sample_descending_with::<f64>(&spec, &mut stream.clone(), Mutation::None)?;
            let staged = refactor_to_rotations(&sample_householder_form::<f64>(&spec, &mut stream.clone())?);
            Ok(direct.to_dense()?.max_abs_diff(&staged.to_dense()?) / n as f64)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(Criterion::at_most("pipeline_dense_diff_per_n", worst, 1e-12))
}

/// KS test of one uniformly chosen eigenvalue phase per matrix.
pub fn phase_uniformity(spec: &SampleSpec, trials: usize, mutation: Mutation) -> Result<Criterion> {
    let n = spec.n as u64;
    let picks = try_par_trials(trials, spec.seed, |_, rng| {
        let e = sample_eigenvalues(spec, rng, mutation)?;
        let k = (rng.next_u64() % n) as usize;
        Ok(phase_of(e.values()[k]))
    })?;
    Ok(Criterion::below("phase_uniformity_ks", ks_uniform_phase(&picks), ks_critical_001(trials)))
}

/// Pooled spacing histogram of `samples`, `bins` bins on `[0, 3]`.
pub fn spacing_counts(samples: &[EigenSample], bins: usize) -> Result<HistogramCounts> {
    let mut acc = HistogramCounts::new(uniform_edges(0.0, SPACING_MAX, bins))?;
    for s in samples {
        acc.extend(spacings(s)?);
    }
    Ok(acc)
}

/// Pooled phase histogram of `samples`, `bins` bins on `[0, 2π)`.
pub fn phase_counts(samples: &[EigenSample], bins: usize) -> Result<HistogramCounts> {
    let mut acc = HistogramCounts::new(uniform_edges(0.0, TAU, bins))?;
    for s in samples {
        acc.extend(s.values().iter().map(|&z| phase_of(z)));
    }
    Ok(acc)
}

/// TV distance between the pooled spacing histogram and the Wigner surmise.
pub fn spacing_tv(samples: &[EigenSample], bins: usize) -> Result<Criterion> {
    let h = spacing_counts(samples, bins)?.finish()?;
    let tv = tv_distance(&h, |z| wigner_density(z).unwrap_or(0.0));
    Ok(Criterion::below("spacing_wigner_tv", tv, SPACING_TV_TOL))
}

/// Threshold scaled from its calibration at [`REFERENCE_TRIALS`] by the
/// Monte-Carlo error ratio `sqrt(REFERENCE_TRIALS / trials)`.
pub fn scaled_threshold(base: f64, trials: usize) -> f64 {
    base * (REFERENCE_TRIALS as f64 / trials.max(1) as f64).sqrt().max(1.0)
}

/// Defect of the pooled phase histogram under rotation by `2π/n`.
pub fn periodicity(samples: &[EigenSample], n: usize, bins: usize, threshold: f64) -> Result<Criterion> {
    let h = phase_counts(samples, bins)?.finish()?;
    Ok(Criterion::below("phase_periodicity_defect", periodicity_defect(&h, n)?, threshold))
}

/// Tolerance for an eigenvalue to count as exactly `±1`.
pub const ATOM_TOL: f64 = 1e-8;

/// Number of real-field samples missing an eigenvalue forced by parity and
/// determinant: `det` is always an eigenvalue for odd `n`, and both `±1`
/// are for even `n` with `det = -1`.
pub fn atom_violations(samples: &[EigenSample], n: usize) -> Result<Criterion> {
    let mut bad = 0usize;
    for s in samples {
        let det: Complex64 = s.values().iter().product();
        let th: Vec<f64> = s.values().iter().map(|&z| phase_of(z)).collect();
        let has = |t: f64| atom_mass(&th, t, ATOM_TOL).map(|m| m > 0.0);
        let ok = if n % 2 == 1 {
            has(if det.re > 0.0 { 0.0 } else { PI })?
        } else if det.re < 0.0 {
            has(0.0)? && has(PI)?
        } else {
            true
        };
        if !ok {
            bad += 1;
        }
    }
    Ok(Criterion::at_most("orthogonal_atom_violations", bad as f64, 0.0))
}

/// Largest `|Arg(∏λ) - Arg ξ|` over the samples.
pub fn determinant_slice(samples: &[EigenSample], xi: Complex64) -> Criterion {
    let worst = samples
        .iter()
        .map(|s| {
            let p: Complex64 = s.values().iter().product();
            (p * xi.conj()).arg().abs()
        })
        .fold(0.0, f64::max);
    Criterion::at_most("determinant_phase_error", worst, 1e-9)
}

/// Entry second moments and Gram defects of dense Haar samples.
pub fn dense_invariance(n: usize, field: Field, trials: usize, seed: u64, moment_tol: f64) -> Result<Vec<Criterion>> {
    let per = try_par_trials(trials, seed, |_, rng| {
        let q = sample_haar_dense::<f64>(n, field, rng)?;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = q[(i, j)].norm_sqr();
            }
        }
        Ok((m, q.gram_defect()))
    })?;
    let mut mean = vec![0.0; n * n];
    for (m, _) in &per {
        for (a, b) in mean.iter_mut().zip(m) {
            *a += b;
        }
    }
    let target = 1.0 / n as f64;
    let rel = mean
        .iter()
        .map(|a| ((a / trials as f64) - target).abs() / target)
        .fold(0.0, f64::max);
    let gram = per.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(vec![
        Criterion::below("dense_entry_moment_rel_err", rel, moment_tol),
        Criterion::at_most("dense_gram_defect", gram, 1e-12),
    ])
}

/// KS test of `Arg det Q` for dense complex samples.
pub fn dense_det_uniformity(n: usize, trials: usize, seed: u64) -> Result<Criterion> {
    let th = try_par_trials(trials, seed, |_, rng| {
        Ok(phase_of(sample_haar_dense::<f64>(n, Field::Complex, rng)?.determinant()))
    })?;
    Ok(Criterion::below("dense_det_phase_ks", ks_uniform_phase(&th), ks_critical_001(trials)))
}

fn random_rotation(rng: &mut RngStream) -> CoreRotation<f64> {
    CoreRotation::new(std_normal_complex(rng), std_normal_real(rng))
}

fn random_pair(rng: &mut RngStream) -> DiagonalPair<f64> {
    DiagonalPair::new(unit_phase(std_normal_complex(rng)), unit_phase(std_normal_complex(rng)))
}

/// Random 2×2 unitary from two complex Gaussian columns, orthonormalized
/// with two Gram-Schmidt passes.
fn random_unitary2(rng: &mut RngStream) -> Mat2<f64> {
    let a = [std_normal_complex(rng), std_normal_complex(rng)];
    let na = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
    let q = [a[0] / na, a[1] / na];
    let mut r = [std_normal_complex(rng), std_normal_complex(rng)];
    for _ in 0..2 {
        let p = q[0].conj() * r[0] + q[1].conj() * r[1];
        r = [r[0] - q[0] * p, r[1] - q[1] * p];
    }
    let nr = (r[0].norm_sqr() + r[1].norm_sqr()).sqrt();
    [[q[0], r[0] / nr], [q[1], r[1] / nr]]
}

fn diff2(a: &Mat2<f64>, b: &Mat2<f64>) -> f64 {
    (0..4).map(|k| (a[k / 2][k % 2] - b[k / 2][k % 2]).norm()).fold(0.0, f64::max)
}

fn diff3(a: &Mat3<f64>, b: &Mat3<f64>) -> f64 {
    (0..9).map(|k| (a[k / 3][k % 3] - b[k / 3][k % 3]).norm()).fold(0.0, f64::max)
}

/// Randomized dense-oracle checks of every rotation-algebra operation.
pub fn rotation_algebra(cases: usize, seed: u64) -> Result<Vec<Criterion>> {
    let mut rng = RngStream::new(seed);
    let (mut fz, mut pl, mut pr, mut tv, mut sp, mut norm) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..cases {
        let (a, b, c) = (random_rotation(&mut rng), random_rotation(&mut rng), random_rotation(&mut rng));
        let want = mul2(&a.dense(), &b.dense());
        let (g, d) = fuse(&a, &b);
        let (dl, gl) = fuse_left(&a, &b);
        fz = fz
            .max(diff2(&mul2(&g.dense(), &d.dense()), &want))
            .max(diff2(&mul2(&dl.dense(), &gl.dense()), &want));

        let p = random_pair(&mut rng);
        let (h, e) = passthrough_left(&p, &a);
        pl = pl.max(diff2(&mul2(&p.dense(), &a.dense()), &mul2(&h.dense(), &e.dense())));
        let (e, h) = passthrough_right(&a, &p);
        pr = pr.max(diff2(&mul2(&a.dense(), &p.dense()), &mul2(&e.dense(), &h.dense())));

        let (ia, ib, ic) = (IndexedRotation::new(a, 0), IndexedRotation::new(b, 1), IndexedRotation::new(c, 0));
        let t = turnover(&ia, &ib, &ic)?;
        tv = tv.max(diff3(&dense3(&ia, &ib, &ic), &dense3(&t.x, &t.y, &t.z)));
        for r in [g, gl, t.x.rot, t.y.rot, t.z.rot] {
            norm = norm.max(r.norm_defect());
        }

        let u = random_unitary2(&mut rng);
        let (g, d) = rotation_from_unitary2(&u)?;
        sp = sp.max(diff2(&mul2(&g.dense(), &d.dense()), &u));
    }
    Ok(vec![
        Criterion::at_most("rotation_fuse", fz, 1e-14),
        Criterion::at_most("rotation_passthrough_left", pl, 1e-15),
        Criterion::at_most("rotation_passthrough_right", pr, 1e-15),
        Criterion::at_most("rotation_turnover", tv, 1e-14),
        Criterion::at_most("rotation_from_unitary2", sp, 1e-14),
        Criterion::at_most("rotation_normalization", norm, 1e-14),
    ])
}

/// Sampling method checked by [`suite`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    Factored,
    Dense,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "factored" => Ok(Method::Factored),
            "dense" => Ok(Method::Dense),
            other => Err(Error::InvalidOptions(format!("unknown method '{other}'"))),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Factored => "factored",
            Method::Dense => "dense",
        })
    }
}

/// Configuration of a validation run at a chosen scale.
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub spec: SampleSpec,
    pub trials: usize,
    pub phase_bins: usize,
    pub spacing_bins: usize,
    pub method: Method,
    #[doc(hidden)]
    pub mutation: Mutation,
}

impl SuiteConfig {
    pub fn new(spec: SampleSpec, trials: usize) -> Self {
        Self {
            spec,
            trials,
            phase_bins: 50,
            spacing_bins: 30,
            method: Method::Factored,
            mutation: Mutation::None,
        }
    }
}

/// Smallest order for which the spacing law is compared with the surmise.
pub const SPACING_MIN_ORDER: usize = 8;

/// Runs every check that applies to the configured ensemble.
///
/// Factored runs always check the solver against the dense oracle and the
/// unit-modulus invariant. Unconstrained complex ensembles add the phase KS
/// test, determinant-constrained ones the determinant check and, for complex
/// fields, the `2π/n` periodicity; real ensembles check the forced `±1`
/// eigenvalues. The spacing comparison runs for complex ensembles with
/// `n ≥ 8`. Dense runs check Gram defects and entry moments, plus the
/// determinant phase for unconstrained complex ensembles.
pub fn suite(cfg: &SuiteConfig) -> Result<Vec<Criterion>> {
    if cfg.trials == 0 {
        return Err(Error::InvalidOptions("trials must be at least 1".into()));
    }
    cfg.spec.validate()?;
    let spec = cfg.spec;
    let n = spec.n;
    let mut out = Vec::new();
    if cfg.method == Method::Dense {
        if spec.det.is_some() {
            return Err(Error::InvalidOptions("the dense method does not support --det".into()));
        }
        let tol = scaled_threshold(0.02, cfg.trials);
        out.extend(dense_invariance(n, spec.field, cfg.trials, spec.seed, tol)?);
        if spec.field == Field::Complex {
            out.push(dense_det_uniformity(n, cfg.trials, spec.seed ^ 0x5eed)?);
        }
        return Ok(out);
    }

    let oracle_seeds = cfg.trials.clamp(1, 20) as u64;
    if n <= 64 {
        out.extend(spectral_oracle(&[n], oracle_seeds, &[spec.field], spec.seed ^ 0x0c1e)?);
    }
    let samples = eigen_trials(&spec, cfg.trials, cfg.mutation)?;
    let modulus = samples
        .iter()
        .flat_map(|s| s.values().iter().map(|z| (z.norm() - 1.0).abs()))
        .fold(0.0, f64::max);
    out.push(Criterion::at_most("eigen_unit_modulus", modulus, 1e-12));
    match (spec.field, spec.det) {
        (Field::Complex, None) => out.push(phase_uniformity(&spec, cfg.trials, cfg.mutation)?),
        (Field::Complex, Some(xi)) => {
            out.push(determinant_slice(&samples, xi));
            if cfg.phase_bins.is_multiple_of(n) {
                out.push(periodicity(&samples, n, cfg.phase_bins, scaled_threshold(0.02, cfg.trials))?);
            }
        }
        (Field::Real, det) => {
            if let Some(xi) = det {
                out.push(determinant_slice(&samples, xi));
            }
            out.push(atom_violations(&samples, n)?);
        }
    }
    if spec.field == Field::Complex && n >= SPACING_MIN_ORDER {
        out.push(spacing_tv(&samples, cfg.spacing_bins)?);
    }
    Ok(out)
}

/// Phase and spacing histograms of a sampled ensemble, as written by the
/// `hist` command.
pub fn ensemble_histograms(
    spec: &SampleSpec,
    trials: usize,
    phase_bins: usize,
    spacing_bins: usize,
) -> Result<(crate::stats::Histogram, Option<crate::stats::Histogram>)> {
    let samples = eigen_trials(spec, trials, Mutation::None)?;
    let phase = phase_counts(&samples, phase_bins)?.finish()?;
    let spacing = if spec.n >= 2 {
        Some(spacing_counts(&samples, spacing_bins)?.finish()?)
    } else {
        None
    };
    Ok((phase, spacing))
}
