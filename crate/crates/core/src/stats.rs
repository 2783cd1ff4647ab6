//! Phase and spacing statistics of eigenvalue samples.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{to_c64, Real};

const TAU: f64 = 2.0 * PI;

/// Eigenvalues of one matrix, unsorted, each of unit modulus.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenSample<T = f64> {
    values: Vec<Complex<T>>,
}

impl<T: Real> EigenSample<T> {
    /// Checks `| |λ| - 1 | ≤ max(1e-12, 64ε)` for every value.
    pub fn new(values: Vec<Complex<T>>) -> Result<Self> {
        let tol = T::of(1e-12).max(T::epsilon() * T::of(64.0));
        if let Some(z) = values.iter().find(|z| (z.norm() - T::one()).abs() > tol) {
            return Err(Error::Domain(format!("eigenvalue {z} is not unimodular")));
        }
        Ok(Self { values })
    }

    pub(crate) fn new_unchecked(values: Vec<Complex<T>>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Phase of `z` in `[0, 2π)`.
pub fn phase_of(z: Complex<f64>) -> f64 {
    let t = z.im.atan2(z.re);
    if t < 0.0 {
        // t + 2π can round up to 2π for t just below zero
        let u = t + TAU;
        if u >= TAU {
            0.0
        } else {
            u
        }
    } else {
        t
    }
}

/// Phases in `[0, 2π)`, ascending.
pub fn phases<T: Real>(s: &EigenSample<T>) -> Vec<f64> {
    let mut out: Vec<f64> = s.values.iter().map(|&z| phase_of(to_c64(z))).collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Normalized nearest-neighbour spacings `ζ_i = (n/2π)(θ_{i+1} - θ_i)`,
/// with the last gap wrapping around the circle.
pub fn spacings<T: Real>(s: &EigenSample<T>) -> Result<Vec<f64>> {
    let n = s.len();
    if n < 2 {
        return Err(Error::Domain(format!("spacings need at least two eigenvalues, got {n}")));
    }
    let th = phases(s);
    let scale = n as f64 / TAU;
    let mut out: Vec<f64> = th.windows(2).map(|w| scale * (w[1] - w[0])).collect();
    out.push(scale * (th[0] + TAU - th[n - 1]));
    Ok(out)
}

/// Wigner surmise `p(ζ) = (πζ/2)·exp(-πζ²/4)`.
pub fn wigner_density(z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::Domain(format!("spacing must be nonnegative, got {z}")));
    }
    Ok(0.5 * PI * z * (-0.25 * PI * z * z).exp())
}

/// Distribution function of the Wigner surmise, `1 - exp(-πζ²/4)`.
pub fn wigner_cdf(z: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else {
        -(-0.25 * PI * z * z).exp_m1()
    }
}

/// Density histogram over fixed bin edges.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    edges: Vec<f64>,
    densities: Vec<f64>,
    samples: u64,
    clamped: u64,
}

impl Histogram {
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    pub fn bins(&self) -> usize {
        self.densities.len()
    }

    /// Number of values that were binned, including clamped ones.
    pub fn samples(&self) -> u64 {
        self.samples
    }

    /// Number of values outside the edges that were counted in the nearest
    /// boundary bin.
    pub fn clamped(&self) -> u64 {
        self.clamped
    }

    /// Probability mass of each bin.
    pub fn masses(&self) -> Vec<f64> {
        self.densities
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, w)| d * (w[1] - w[0]))
            .collect()
    }

    /// Total area under the histogram, 1 up to rounding.
    pub fn area(&self) -> f64 {
        self.masses().iter().sum()
    }

    /// Two columns `bin_left density`, one row per bin, then a row with the
    /// last edge and density 0.
    pub fn to_dat(&self) -> String {
        let mut out = String::new();
        for (e, d) in self.edges.iter().zip(&self.densities) {
            let _ = writeln!(out, "{e:.17e} {d:.17e}");
        }
        let _ = writeln!(out, "{:.17e} 0", self.edges[self.edges.len() - 1]);
        out
    }

    /// Parses the output of [`Histogram::to_dat`]. Sample counts are not
    /// part of the format and read back as 0.
    pub fn from_dat(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut densities = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse = |t: Option<&str>| -> Result<f64> {
                let t = t.ok_or_else(|| Error::Parse { line: k + 1, msg: "expected two columns".into() })?;
                t.parse().map_err(|e| Error::Parse { line: k + 1, msg: format!("{t:?}: {e}") })
            };
            let mut it = line.split_whitespace();
            edges.push(parse(it.next())?);
            densities.push(parse(it.next())?);
            if it.next().is_some() {
                return Err(Error::Parse { line: k + 1, msg: "expected two columns".into() });
            }
        }
        if densities.len() < 2 {
            return Err(Error::Parse { line: 0, msg: "histogram needs at least one bin".into() });
        }
        densities.pop();
        check_edges(&edges)?;
        Ok(Self { edges, densities, samples: 0, clamped: 0 })
    }
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::Domain("need at least two bin edges".into()));
    }
    if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("bin edges must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// `b + 1` equally spaced edges spanning `[lo, hi]`.
pub fn uniform_edges(lo: f64, hi: f64, bins: usize) -> Vec<f64> {
    let w = (hi - lo) / bins as f64;
    let mut e: Vec<f64> = (0..=bins).map(|k| lo + w * k as f64).collect();
    e[bins] = hi;
    e
}

/// Raw bin counts, mergeable across workers.
#[derive(Clone, Debug, PartialEq)]
pub struct HistogramCounts {
    edges: Vec<f64>,
    counts: Vec<u64>,
    clamped: u64,
}

impl HistogramCounts {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        check_edges(&edges)?;
        let b = edges.len() - 1;
        Ok(Self { edges, counts: vec![0; b], clamped: 0 })
    }

    pub fn add(&mut self, x: f64) {
        let b = self.counts.len();
        let k = if x < self.edges[0] || x.is_nan() {
            self.clamped += 1;
            0
        } else if x >= self.edges[b] {
            self.clamped += 1;
            b - 1
        } else {
            // last edge ≤ x handled above, so the index is a real bin
            self.edges.partition_point(|&e| e <= x) - 1
        };
        self.counts[k] += 1;
    }

    pub fn extend<I: IntoIterator<Item = f64>>(&mut self, xs: I) {
        for x in xs {
            self.add(x);
        }
    }

    /// Adds the counts of `other`, which must share the same edges.
    pub fn merge(mut self, other: &Self) -> Result<Self> {
        if self.edges != other.edges {
            return Err(Error::Domain("cannot merge histograms with different edges".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.clamped += other.clamped;
        Ok(self)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn finish(&self) -> Result<Histogram> {
        let total = self.total();
        if total == 0 {
            return Err(Error::Domain("histogram of an empty sample".into()));
        }
        let t = total as f64;
        let densities = self
            .counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, w)| c as f64 / (t * (w[1] - w[0])))
            .collect();
        Ok(Histogram {
            edges: self.edges.clone(),
            densities,
            samples: total,
            clamped: self.clamped,
        })
    }
}

/// Density histogram of `values`. Values outside the edges go to the
/// nearest boundary bin and are reported by [`Histogram::clamped`].
pub fn histogram(values: &[f64], edges: &[f64]) -> Result<Histogram> {
    let mut acc = HistogramCounts::new(edges.to_vec())?;
    acc.extend(values.iter().copied());
    acc.finish()
}

/// Kolmogorov-Smirnov statistic of a sample against the uniform law on
/// `[0, 2π)`.
pub fn ks_uniform_phase(samples: &[f64]) -> f64 {
    let mut x: Vec<f64> = samples.iter().map(|t| (t / TAU).clamp(0.0, 1.0)).collect();
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &f)| ((i + 1) as f64 / n - f).max(f - i as f64 / n))
        .fold(0.0, f64::max)
}

/// Asymptotic one-sample Kolmogorov critical value at α = 0.01.
pub fn ks_critical_001(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic two-sample Kolmogorov critical value at α = 0.01.
pub fn ks_two_sample_critical_001(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.628 * ((n + m) / (n * m)).sqrt()
}

/// Composite Simpson rule with `panels` (even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let m = panels + panels % 2;
    let h = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * k as f64);
    }
    acc * h / 3.0
}

/// Total variation distance between a histogram and a probability density.
///
/// Bin masses of the density are integrated numerically. Density mass
/// falling outside the histogram support counts as disagreement, so
/// disjoint supports give 1.
pub fn tv_distance<F: Fn(f64) -> f64>(h: &Histogram, density: F) -> f64 {
    let mut inside = 0.0;
    let mut diff = 0.0;
    for (w, hm) in h.edges.windows(2).zip(h.masses()) {
        let p = simpson(&density, w[0], w[1], 64);
        inside += p;
        diff += (p - hm).abs();
    }
    0.5 * (diff + (1.0 - inside).max(0.0))
}

/// Total variation distance between a phase histogram on `[0, 2π)` and its
/// rotation by `2π/n`, i.e. by `bins/n` bins. A point mass gives 1.
pub fn periodicity_defect(h: &Histogram, n: usize) -> Result<f64> {
    let b = h.bins();
    if n == 0 || !b.is_multiple_of(n) {
        return Err(Error::Domain(format!("{b} bins are not divisible by n = {n}")));
    }
    let shift = b / n;
    let m = h.masses();
    Ok(0.5 * (0..b).map(|k| (m[k] - m[(k + shift) % b]).abs()).sum::<f64>())
}

/// Fraction of `samples` within circular distance `tol` of `theta0`.
pub fn atom_mass(samples: &[f64], theta0: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if samples.is_empty() {
        return Ok(0.0);
    }
    let hits = samples.iter().filter(|&&t| circular_distance(t, theta0) <= tol).count();
    Ok(hits as f64 / samples.len() as f64)
}

/// Distance between two angles along the circle, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}
