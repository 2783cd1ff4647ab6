//! Wall-clock timing of the factored and dense samplers and log-log slope
//! fits of the resulting curves.

use std::fmt;
use std::hint::black_box;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::factored_form::{sample_descending, Field, SampleSpec};
use crate::haar_dense::sample_haar_dense;
use crate::rand_dist::RngStream;
use crate::unitary_qr::{eigenvalues_with_report, SolverOptions};
use crate::validation::Method;

/// Best observed time of one sample at order `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Timing {
    pub n: usize,
    pub method: Method,
    pub seconds: f64,
    /// QR sweeps performed by the factored solver; 0 for the dense method.
    pub chases: usize,
}

impl fmt::Display for Timing {
    /// `n<TAB>method<TAB>seconds<TAB>chases`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{:.6e}\t{}", self.n, self.method, self.seconds, self.chases)
    }
}

/// One factored run: sample the rotation form, then all eigenvalues.
fn factored_once(n: usize, field: Field, rng: &mut RngStream) -> Result<usize> {
    let f = sample_descending::<f64>(&SampleSpec::new(n, field), rng)?;
    let r = eigenvalues_with_report(f, &SolverOptions::default())?;
    black_box(r.sample.values());
    Ok(r.chases)
}

fn dense_once(n: usize, field: Field, rng: &mut RngStream) -> Result<usize> {
    black_box(sample_haar_dense::<f64>(n, field, rng)?);
    Ok(0)
}

/// Times one method at order `n`: repeats until `min_seconds` have elapsed
/// (at least once) and keeps the fastest repetition.
pub fn time_method(method: Method, n: usize, field: Field, seed: u64, min_seconds: f64) -> Result<Timing> {
    let root = RngStream::new(seed);
    let start = Instant::now();
    let mut best = f64::INFINITY;
    let mut chases = 0;
    let mut rep = 0u64;
    while rep == 0 || start.elapsed().as_secs_f64() < min_seconds {
        let mut rng = root.child(rep);
        let t = Instant::now();
        let c = match method {
            Method::Factored => factored_once(n, field, &mut rng)?,
            Method::Dense => dense_once(n, field, &mut rng)?,
        };
        let dt = t.elapsed().as_secs_f64();
        if dt < best {
            best = dt;
            chases = c;
        }
        rep += 1;
    }
    Ok(Timing {
        n,
        method,
        seconds: best,
        chases,
    })
}

/// Least-squares slope of `log t` against `log n`.
pub fn loglog_slope(points: &[(usize, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Domain("slope fit needs at least two points".into()));
    }
    if points.iter().any(|&(n, t)| n == 0 || !(t > 0.0)) {
        return Err(Error::Domain("slope fit needs positive sizes and times".into()));
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, t)| t.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("slope fit needs at least two distinct sizes".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Slope of the timings of one method.
pub fn method_slope(timings: &[Timing], method: Method) -> Result<f64> {
    let pts: Vec<(usize, f64)> = timings
        .iter()
        .filter(|t| t.method == method)
        .map(|t| (t.n, t.seconds))
        .collect();
    loglog_slope(&pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_laws() {
        let pts: Vec<(usize, f64)> = [16usize, 32, 64, 128].iter().map(|&n| (n, 3e-9 * (n as f64).powi(3))).collect();
        assert!((loglog_slope(&pts).unwrap() - 3.0).abs() < 1e-12);
        let pts: Vec<(usize, f64)> = [10usize, 100].iter().map(|&n| (n, 0.5 * (n as f64).powi(2))).collect();
        assert!((loglog_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn slope_rejects_bad_input() {
        assert!(loglog_slope(&[(4, 1.0)]).is_err());
        assert!(loglog_slope(&[(4, 1.0), (4, 2.0)]).is_err());
        assert!(loglog_slope(&[(4, 1.0), (8, 0.0)]).is_err());
    }

    #[test]
    fn timings_are_positive() {
        for m in [Method::Factored, Method::Dense] {
            let t = time_method(m, 16, Field::Complex, 1, 0.0).unwrap();
            assert!(t.seconds > 0.0);
            assert_eq!(t.n, 16);
            assert_eq!(t.chases > 0, m == Method::Factored);
        }
        let t = time_method(Method::Factored, 8, Field::Real, 1, 0.0).unwrap();
        assert_eq!(t.to_string().split('\t').count(), 4);
    }
}
