//! Seedable random variate generation.
//!
//! Every draw goes through [`RngStream`], a ChaCha12 generator
//! (`rand_chacha` 0.3) keyed from a 64-bit seed. Normals use the Marsaglia
//! polar method, gamma variates the Marsaglia-Tsang squeeze. Neither caches
//! spare values, so the transcript of a stream depends only on the sequence
//! of calls made on it.

use num_complex::Complex64;
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

/// Name and version of the raw generator, recorded in reports.
pub const GENERATOR: &str = "chacha12/rand_chacha-0.3";

/// Largest degree accepted by the sum-of-squares chi oracle.
pub const GAUSSIAN_SUM_MAX_DEGREE: u32 = 64;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic single-owner random stream.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream number `index`.
    ///
    /// The child is seeded with `splitmix64(seed ^ splitmix64(index + 1))`,
    /// independent of how many draws the parent has made. Trial `i` of a
    /// Monte-Carlo run uses `child(i)`, which keeps results identical for any
    /// worker count.
    pub fn child(&self, index: u64) -> Self {
        Self::new(splitmix64(self.seed ^ splitmix64(index.wrapping_add(1))))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on the open interval `(-1, 1)`, never exactly `-1`.
    fn symmetric_open(&mut self) -> f64 {
        // 2k+1 over 2^53 stays strictly inside (0, 2)
        let k = self.next_u64() >> 12;
        ((2 * k + 1) as f64) / (1u64 << 52) as f64 - 1.0
    }

    /// One pair of independent N(0,1) variates from the polar method.
    fn normal_pair(&mut self) -> (f64, f64) {
        loop {
            let u = self.symmetric_open();
            let v = self.symmetric_open();
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                return (u * f, v * f);
            }
        }
    }
}

/// Draws from N_R(0, 1).
pub fn std_normal_real(rng: &mut RngStream) -> f64 {
    rng.normal_pair().0
}

/// Draws from N_C(0, 1): independent real and imaginary parts, each N(0, 1/2).
pub fn std_normal_complex(rng: &mut RngStream) -> Complex64 {
    let (x, y) = rng.normal_pair();
    Complex64::new(x, y) * std::f64::consts::FRAC_1_SQRT_2
}

/// Gamma(shape, 1) variate, shape > 0.
pub fn gamma(shape: f64, rng: &mut RngStream) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        // boost: G(a) = G(a+1) U^{1/a}
        let g = gamma(shape + 1.0, rng);
        let u = 1.0 - rng.uniform();
        return g * u.powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = std_normal_real(rng);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = 1.0 - rng.uniform();
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// How chi variates are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ChiMethod {
    /// Square root of a Gamma(k/2, 2) variate; O(1) per draw.
    #[default]
    Gamma,
    /// Square root of an explicit sum of `k` squared normals (k ≤ 64).
    GaussianSum,
}

/// Draws `sqrt(X)` with `X ~ χ²_R(k)`.
pub fn chi_real(k: u32, rng: &mut RngStream) -> Result<f64> {
    chi_real_with(k, ChiMethod::Gamma, rng)
}

pub fn chi_real_with(k: u32, method: ChiMethod, rng: &mut RngStream) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroDegree);
    }
    match method {
        ChiMethod::Gamma => Ok((2.0 * gamma(0.5 * k as f64, rng)).sqrt()),
        ChiMethod::GaussianSum => {
            if k > GAUSSIAN_SUM_MAX_DEGREE {
                return Err(Error::Domain(format!(
                    "sum-of-squares chi limited to k <= {GAUSSIAN_SUM_MAX_DEGREE}, got {k}"
                )));
            }
            let sum: f64 = (0..k)
                .map(|_| {
                    let x = std_normal_real(rng);
                    x * x
                })
                .sum();
            Ok(sum.sqrt())
        }
    }
}

/// Draws from χ²_C(k), realized as χ²_R(2k)/2.
pub fn chi_complex_sq(k: u32, rng: &mut RngStream) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroDegree);
    }
    let r = chi_real(2 * k, rng)?;
    Ok(0.5 * r * r)
}

/// Uniform phase on `(-π, π]`.
pub fn uniform_phase(rng: &mut RngStream) -> f64 {
    std::f64::consts::PI - std::f64::consts::TAU * rng.uniform()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(xs: &[f64]) -> (f64, f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let skew = xs.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n / var.powf(1.5);
        (mean, var, skew)
    }

    #[test]
    fn transcript_is_reproducible() {
        let mut a = RngStream::new(42);
        let mut b = RngStream::new(42);
        for _ in 0..1000 {
            assert_eq!(std_normal_real(&mut a).to_bits(), std_normal_real(&mut b).to_bits());
            assert_eq!(chi_real(7, &mut a).unwrap().to_bits(), chi_real(7, &mut b).unwrap().to_bits());
        }
    }

    #[test]
    fn children_differ_and_ignore_parent_position() {
        let root = RngStream::new(5);
        let mut advanced = root.clone();
        advanced.next_u64();
        assert_eq!(root.child(3).next_u64(), advanced.child(3).next_u64());
        assert_ne!(root.child(3).next_u64(), root.child(4).next_u64());
    }

    #[test]
    fn normal_moments() {
        let mut rng = RngStream::new(1);
        let xs: Vec<f64> = (0..1_000_000).map(|_| std_normal_real(&mut rng)).collect();
        let (m, v, s) = moments(&xs);
        assert!(m.abs() < 0.005, "mean {m}");
        assert!((v - 1.0).abs() < 0.01, "var {v}");
        assert!(s.abs() < 0.01, "skew {s}");
    }

    #[test]
    fn complex_normal_moments() {
        let mut rng = RngStream::new(2);
        let zs: Vec<Complex64> = (0..1_000_000).map(|_| std_normal_complex(&mut rng)).collect();
        let n = zs.len() as f64;
        let m2 = zs.iter().map(|z| z.norm_sqr()).sum::<f64>() / n;
        assert!((m2 - 1.0).abs() < 0.01);
        let (mx, my) = (
            zs.iter().map(|z| z.re).sum::<f64>() / n,
            zs.iter().map(|z| z.im).sum::<f64>() / n,
        );
        let cov = zs.iter().map(|z| (z.re - mx) * (z.im - my)).sum::<f64>() / n;
        let vx = zs.iter().map(|z| (z.re - mx).powi(2)).sum::<f64>() / n;
        let vy = zs.iter().map(|z| (z.im - my).powi(2)).sum::<f64>() / n;
        assert!((cov / (vx * vy).sqrt()).abs() < 0.01);
        assert!((vx - 0.5).abs() < 0.01 && (vy - 0.5).abs() < 0.01);
    }

    #[test]
    fn chi_moments() {
        let mut rng = RngStream::new(3);
        for k in [1u32, 2, 5, 20] {
            let xs: Vec<f64> = (0..1_000_000)
                .map(|_| chi_real(k, &mut rng).unwrap().powi(2))
                .collect();
            let (m, v, _) = moments(&xs);
            let kf = k as f64;
            assert!((m / kf - 1.0).abs() < 0.02, "k={k} mean {m}");
            assert!((v / (2.0 * kf) - 1.0).abs() < 0.02, "k={k} var {v}");
        }
    }

    #[test]
    fn chi_complex_moments() {
        let mut rng = RngStream::new(4);
        let xs: Vec<f64> = (0..1_000_000).map(|_| chi_complex_sq(4, &mut rng).unwrap()).collect();
        let (m, v, _) = moments(&xs);
        assert!((m - 4.0).abs() < 0.05 && (v - 4.0).abs() < 0.05, "{m} {v}");
        let ones: f64 = (0..200_000).map(|_| chi_complex_sq(1, &mut rng).unwrap()).sum::<f64>() / 2e5;
        assert!((ones - 1.0).abs() < 0.02);
    }

    #[test]
    fn zero_degree_rejected() {
        let mut rng = RngStream::new(0);
        assert!(matches!(chi_real(0, &mut rng), Err(Error::ZeroDegree)));
        assert!(matches!(chi_complex_sq(0, &mut rng), Err(Error::ZeroDegree)));
        assert!(chi_real_with(65, ChiMethod::GaussianSum, &mut rng).is_err());
    }

    #[test]
    fn uniform_phase_range_and_mean() {
        let mut rng = RngStream::new(6);
        let mut acc = Complex64::new(0.0, 0.0);
        let n = 1_000_000;
        for _ in 0..n {
            let t = uniform_phase(&mut rng);
            assert!(t > -std::f64::consts::PI && t <= std::f64::consts::PI);
            acc += Complex64::from_polar(1.0, t);
        }
        assert!((acc / n as f64).norm() < 0.005);
    }

    use crate::stats::{ks_critical_001, ks_two_sample, ks_two_sample_critical_001};
    use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

    fn ks_against<F: Fn(f64) -> f64>(xs: &mut [f64], cdf: F) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                ((i + 1) as f64 / n - f).max(f - i as f64 / n)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn normal_ks() {
        let mut rng = RngStream::new(7);
        let mut xs: Vec<f64> = (0..100_000).map(|_| std_normal_real(&mut rng)).collect();
        let law = Normal::new(0.0, 1.0).unwrap();
        let d = ks_against(&mut xs, |x| law.cdf(x));
        assert!(d < ks_critical_001(xs.len()), "{d}");
    }

    #[test]
    fn chi_square_law_ks() {
        let mut rng = RngStream::new(8);
        for k in [1u32, 3, 10] {
            let law = ChiSquared::new(k as f64).unwrap();
            let mut xs: Vec<f64> = (0..100_000).map(|_| chi_real(k, &mut rng).unwrap().powi(2)).collect();
            let d = ks_against(&mut xs, |x| law.cdf(x));
            assert!(d < ks_critical_001(xs.len()), "k={k} {d}");
        }
    }

    #[test]
    fn gamma_method_matches_gaussian_sum() {
        let mut rng = RngStream::new(9);
        let n = 100_000;
        for k in [1u32, 5, 40] {
            let a: Vec<f64> = (0..n).map(|_| chi_real(k, &mut rng).unwrap()).collect();
            let b: Vec<f64> = (0..n).map(|_| chi_real_with(k, ChiMethod::GaussianSum, &mut rng).unwrap()).collect();
            assert!(ks_two_sample(&a, &b) < ks_two_sample_critical_001(n, n), "k={k}");
        }
    }

    #[test]
    fn complex_chi_matches_its_definitions() {
        let mut rng = RngStream::new(10);
        let n = 100_000;
        for k in [1u32, 4] {
            let a: Vec<f64> = (0..n).map(|_| chi_complex_sq(k, &mut rng).unwrap()).collect();
            let b: Vec<f64> = (0..n).map(|_| 0.5 * chi_real(2 * k, &mut rng).unwrap().powi(2)).collect();
            assert!(ks_two_sample(&a, &b) < ks_two_sample_critical_001(n, n), "k={k}");
            // sum of k squared complex normals
            let c: Vec<f64> = (0..n)
                .map(|_| (0..k).map(|_| std_normal_complex(&mut rng).norm_sqr()).sum())
                .collect();
            assert!(ks_two_sample(&a, &c) < ks_two_sample_critical_001(n, n), "k={k}");
        }
    }

    #[test]
    fn complex_normal_phase_is_uniform() {
        let mut rng = RngStream::new(11);
        let mut xs: Vec<f64> = (0..100_000).map(|_| std_normal_complex(&mut rng).arg()).collect();
        let d = ks_against(&mut xs, |t| (t + std::f64::consts::PI) / std::f64::consts::TAU);
        assert!(d < ks_critical_001(xs.len()));
    }

    #[test]
    fn uniform_phase_is_flat() {
        let mut rng = RngStream::new(12);
        let bins = 50;
        let n = 1_000_000;
        let mut counts = vec![0u64; bins];
        for _ in 0..n {
            let t = uniform_phase(&mut rng);
            let k = (((t + std::f64::consts::PI) / std::f64::consts::TAU) * bins as f64) as usize;
            counts[k.min(bins - 1)] += 1;
        }
        let e = n as f64 / bins as f64;
        let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        let crit = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.999);
        assert!(stat < crit, "{stat} vs {crit}");
    }
}
