//! Acceptance suite: one test per criterion, each writing a single
//! `[PASS]`/`[FAIL]` line to stderr. Tests hold a shared lock so that timings are not
//! disturbed by each other.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use haar_eigs::bench::{method_slope, time_method, Timing};
use haar_eigs::validation::{
    atom_violations, dense_invariance, determinant_slice, eigen_trials, periodicity, phase_uniformity,
    pipeline_equivalence, rotation_algebra, spacing_tv, spectral_oracle, Criterion, Method,
};
use haar_eigs::{Field, SampleSpec};
use num_complex::Complex64;

static SERIAL: Mutex<()> = Mutex::new(());

fn report(id: u32, title: &str, limit: Duration, run: impl FnOnce() -> Vec<Criterion>) {
    let _guard = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let results = run();
    let elapsed = start.elapsed();
    let in_time = elapsed < limit;
    let pass = in_time && results.iter().all(|c| c.pass);
    let detail: Vec<String> = results
        .iter()
        .map(|c| format!("{}={:.3e} (limit {:.3e})", c.name, c.statistic, c.threshold))
        .collect();
    // Written to the raw stderr handle so the line survives libtest's output capture.
    let _ = writeln!(
        std::io::stderr(),
        "[{}] criterion {id}: {title}: {} [{:.1}s of {}s]",
        if pass { "PASS" } else { "FAIL" },
        detail.join(", "),
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    for c in &results {
        assert!(c.pass, "criterion {id}: {c}");
    }
    assert!(in_time, "criterion {id} took {elapsed:?}, limit {limit:?}");
}

#[test]
fn criterion_01_spectral_correctness() {
    report(1, "spectral correctness", Duration::from_secs(30), || {
        let ns: Vec<usize> = (2..=50).collect();
        spectral_oracle(&ns, 100, &[Field::Real, Field::Complex], 1).unwrap()
    });
}

#[test]
fn criterion_02_pipeline_equivalence() {
    report(2, "pipeline equivalence", Duration::from_secs(10), || {
        vec![pipeline_equivalence(64, 100, 2).unwrap()]
    });
}

#[test]
fn criterion_03_unitary_phase_uniformity() {
    report(3, "U(n) phase uniformity", Duration::from_secs(60), || {
        let spec = SampleSpec::new(10, Field::Complex).with_seed(3);
        vec![phase_uniformity(&spec, 100_000, Default::default()).unwrap()]
    });
}

#[test]
fn criterion_04_wigner_spacing() {
    report(4, "Wigner surmise spacing", Duration::from_secs(30), || {
        let spec = SampleSpec::new(10, Field::Complex).with_seed(4);
        let samples = eigen_trials(&spec, 10_000, Default::default()).unwrap();
        vec![spacing_tv(&samples, 30).unwrap()]
    });
}

#[test]
fn criterion_05_special_unitary_periodicity() {
    report(5, "SU(n) periodicity", Duration::from_secs(90), || {
        let spec = SampleSpec::new(10, Field::Complex)
            .with_det(Complex64::new(1.0, 0.0))
            .with_seed(5);
        let samples = eigen_trials(&spec, 100_000, Default::default()).unwrap();
        vec![
            periodicity(&samples, 10, 100, 0.02).unwrap(),
            spacing_tv(&samples, 30).unwrap(),
        ]
    });
}

#[test]
fn criterion_06_orthogonal_atoms() {
    report(6, "orthogonal atoms and parity", Duration::from_secs(60), || {
        let cases = [(10usize, -1.0f64), (9, 1.0), (9, -1.0)];
        cases
            .iter()
            .enumerate()
            .map(|(k, &(n, det))| {
                let spec = SampleSpec::new(n, Field::Real)
                    .with_det(Complex64::new(det, 0.0))
                    .with_seed(60 + k as u64);
                let samples = eigen_trials(&spec, 10_000, Default::default()).unwrap();
                let mut c = atom_violations(&samples, n).unwrap();
                c.name = format!("{}_n{n}_det{det:+}", c.name);
                c
            })
            .collect()
    });
}

#[test]
fn criterion_07_determinant_slice() {
    report(7, "determinant slice", Duration::from_secs(5), || {
        let xi = Complex64::from_polar(1.0, PI / 3.0);
        let spec = SampleSpec::new(8, Field::Complex).with_det(xi).with_seed(7);
        let samples = eigen_trials(&spec, 1000, Default::default()).unwrap();
        vec![determinant_slice(&samples, xi)]
    });
}

#[test]
fn criterion_08_complexity_scaling() {
    report(8, "complexity scaling", Duration::from_secs(300), || {
        let mut timings: Vec<Timing> = Vec::new();
        for n in [256usize, 512, 1024, 2048, 4096] {
            timings.push(time_method(Method::Factored, n, Field::Complex, 8, 0.5).unwrap());
        }
        for n in [256usize, 512, 1024, 2048] {
            timings.push(time_method(Method::Dense, n, Field::Complex, 8, 0.5).unwrap());
        }
        for t in &timings {
            let _ = writeln!(std::io::stderr(), "    {t}");
        }
        let fs = method_slope(&timings, Method::Factored).unwrap();
        let ds = method_slope(&timings, Method::Dense).unwrap();
        let at = |m: Method| timings.iter().find(|t| t.n == 2048 && t.method == m).unwrap().seconds;
        vec![
            Criterion::at_least("factored_slope_low", fs, 1.7),
            Criterion::at_most("factored_slope_high", fs, 2.5),
            Criterion::at_least("dense_slope", ds, 2.6),
            Criterion::below("factored_over_dense_at_2048", at(Method::Factored) / at(Method::Dense), 1.0),
        ]
    });
}

#[test]
fn criterion_09_rotation_algebra() {
    report(9, "rotation algebra properties", Duration::from_secs(10), || {
        rotation_algebra(10_000, 9).unwrap()
    });
}

#[test]
fn criterion_10_dense_haar_invariance() {
    report(10, "dense Haar invariance", Duration::from_secs(60), || {
        dense_invariance(8, Field::Complex, 100_000, 10, 0.02).unwrap()
    });
}
