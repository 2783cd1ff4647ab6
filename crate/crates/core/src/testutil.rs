//! Independent oracles shared by the unit tests.

use num_complex::Complex64;

use crate::haar_dense::DenseMatrix;

/// Determinant by cofactor expansion along the first row.
pub fn det_cofactor(m: &DenseMatrix<f64>) -> Complex64 {
    let n = m.rows();
    let a: Vec<Vec<Complex64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
    det_rec(&a)
}

fn det_rec(a: &[Vec<Complex64>]) -> Complex64 {
    let n = a.len();
    if n == 1 {
        return a[0][0];
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for col in 0..n {
        let minor: Vec<Vec<Complex64>> = a[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(k, _)| k != col).map(|(_, &v)| v).collect())
            .collect();
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        acc += a[0][col] * sign * det_rec(&minor);
    }
    acc
}

/// Monic characteristic polynomial coefficients `[1, c1, ..., cn]` by
/// Faddeev-LeVerrier.
pub fn char_poly(m: &DenseMatrix<f64>) -> Vec<Complex64> {
    let n = m.rows();
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    let mut mk = DenseMatrix::<f64>::zeros(n, n);
    for k in 1..=n {
        // M_k = A·M_{k-1} + c_{k-1} I, c_k = -tr(A M_k)/k
        let mut next = m.matmul(&mk);
        for i in 0..n {
            next[(i, i)] += coeffs[k - 1];
        }
        let am = m.matmul(&next);
        coeffs.push(-am.trace() / k as f64);
        mk = next;
    }
    coeffs
}

/// Roots of a monic polynomial by Durand-Kerner iteration.
pub fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let eval = |z: Complex64| coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32)).collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

pub fn power_sums(values: &[Complex64], kmax: usize) -> Vec<Complex64> {
    (1..=kmax).map(|k| values.iter().map(|z| z.powu(k as u32)).sum()).collect()
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Distance between two multisets of complex numbers under the best greedy
/// matching.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut left: Vec<Complex64> = b.to_vec();
    let mut worst = 0.0f64;
    for x in a {
        let (k, d) = left
            .iter()
            .enumerate()
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        worst = worst.max(d);
        left.swap_remove(k);
    }
    worst
}
