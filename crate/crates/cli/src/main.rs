//! `haar-eigs`: sample eigenvalues of Haar unitary and orthogonal matrices,
//! write phase and spacing histograms, run the validation suite and time the
//! samplers.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use haar_eigs::bench::{method_slope, time_method, Timing};
use haar_eigs::factored_form::Mutation;
use haar_eigs::validation::{ensemble_histograms, par_trials, sample_eigenvalues, suite, Method, SuiteConfig};
use haar_eigs::{
    eigenvalues, sample_descending, sample_haar_dense, DescendingFactorization, Error, Field, SampleSpec,
    SolverOptions,
};
use num_complex::Complex64;

#[derive(Parser, Debug)]
#[command(name = "haar-eigs", version, about = "Eigenvalues of Haar-distributed unitary and orthogonal matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write sampled eigenvalues as CSV (`trial,re,im`).
    Sample(Common),
    /// Write phase and spacing histograms (`eig-dist-*.dat`, `eig-spacing-*.dat`).
    Hist(HistArgs),
    /// Run the validation suite; exit status 0 iff every check passes.
    Validate(ValidateArgs),
    /// Time the factored and dense samplers and fit log-log slopes.
    Bench(BenchArgs),
    /// Write one sampled rotation factorization in text form.
    Factor(Common),
    /// Read a rotation factorization and write its eigenvalues as CSV.
    Solve(SolveArgs),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Matrix order.
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Scalar field: real (orthogonal group) or complex (unitary group).
    #[arg(long, default_value = "complex")]
    field: Field,
    /// Determinant constraint: none, +1, -1 or phase:<radians>.
    #[arg(long, default_value = "none", allow_hyphen_values = true)]
    det: String,
    /// Number of sampled matrices.
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    /// Root seed; trial i uses child stream i.
    #[arg(long, env = "HAAR_EIGS_SEED", default_value_t = 0)]
    seed: u64,
    /// Sampling method.
    #[arg(long, default_value = "factored")]
    method: Method,
    /// Output file (directory for `hist`); standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; all available cores when omitted.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Debug)]
struct HistArgs {
    #[command(flatten)]
    common: Common,
    /// Phase bins on [0, 2π).
    #[arg(long, default_value_t = 50)]
    bins: usize,
    /// Spacing bins on [0, 3].
    #[arg(long, default_value_t = 30)]
    spacing_bins: usize,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    /// Phase bins for the periodicity check.
    #[arg(long, default_value_t = 100)]
    bins: usize,
    /// Spacing bins on [0, 3].
    #[arg(long, default_value_t = 30)]
    spacing_bins: usize,
    #[arg(long, hide = true, default_value = "none")]
    mutate: String,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated matrix orders.
    #[arg(long, value_delimiter = ',', default_value = "256,512,1024,2048")]
    sizes: Vec<usize>,
    /// Methods to time.
    #[arg(long, value_delimiter = ',', default_value = "factored,dense")]
    methods: Vec<Method>,
    /// Minimum wall time spent per (order, method); the fastest repetition is reported.
    #[arg(long, default_value_t = 0.5)]
    min_seconds: f64,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Factorization file written by `factor`.
    #[arg(long)]
    input: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `none`, `+1`, `1`, `-1` or `phase:<radians>`.
fn parse_det(s: &str, field: Field) -> Result<Option<Complex64>> {
    let xi = match s.trim() {
        "none" => return Ok(None),
        "+1" | "1" => Complex64::new(1.0, 0.0),
        "-1" => Complex64::new(-1.0, 0.0),
        other => {
            let Some(r) = other.strip_prefix("phase:") else {
                bail!("--det must be none, +1, -1 or phase:<radians>, got '{other}'");
            };
            if field != Field::Complex {
                bail!("--det phase:<r> needs --field complex");
            }
            let t: f64 = r.parse().with_context(|| format!("bad phase '{r}'"))?;
            Complex64::from_polar(1.0, t)
        }
    };
    Ok(Some(xi))
}

impl Common {
    fn spec(&self) -> Result<SampleSpec> {
        if self.trials == 0 {
            bail!("--trials must be at least 1");
        }
        let mut spec = SampleSpec::new(self.n, self.field).with_seed(self.seed);
        spec.det = parse_det(&self.det, self.field)?;
        spec.validate()?;
        Ok(spec)
    }

    fn install_workers(&self) -> Result<()> {
        if let Some(w) = self.workers {
            if w == 0 {
                bail!("--workers must be at least 1");
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build_global()
                .context("cannot configure the worker pool")?;
        }
        Ok(())
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot write {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// File tag naming the ensemble: `U10`, `SU10`, `O9`, `SO9`, `Ominus9`,
/// `U8-phase1.047`.
fn ensemble_tag(spec: &SampleSpec, det: &str) -> String {
    let n = spec.n;
    match (spec.field, spec.det) {
        (Field::Complex, None) => format!("U{n}"),
        (Field::Real, None) => format!("O{n}"),
        (Field::Complex, Some(xi)) if xi == Complex64::new(1.0, 0.0) => format!("SU{n}"),
        (Field::Real, Some(xi)) if xi.re > 0.0 => format!("SO{n}"),
        (Field::Real, Some(_)) => format!("Ominus{n}"),
        (Field::Complex, Some(_)) => {
            let t = det.trim().trim_start_matches("phase:");
            if det.trim() == "-1" {
                format!("U{n}-detminus1")
            } else {
                format!("U{n}-phase{t}")
            }
        }
    }
}

fn cmd_sample(c: &Common) -> Result<ExitCode> {
    let spec = c.spec()?;
    c.install_workers()?;
    let mut out = open_out(c.out.as_deref())?;
    if c.method == Method::Dense {
        if spec.det.is_some() {
            bail!("--method dense does not support --det");
        }
        let mats = par_trials(c.trials, spec.seed, |_, rng| sample_haar_dense::<f64>(spec.n, spec.field, rng));
        writeln!(out, "trial,row,col,re,im")?;
        for (t, m) in mats.into_iter().enumerate() {
            let m = m?;
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    writeln!(out, "{t},{i},{j},{:e},{:e}", m[(i, j)].re, m[(i, j)].im)?;
                }
            }
        }
        out.flush()?;
        return Ok(ExitCode::SUCCESS);
    }
    let results = par_trials(c.trials, spec.seed, |_, rng| sample_eigenvalues(&spec, rng, Mutation::None));
    writeln!(out, "trial,re,im")?;
    for (t, r) in results.into_iter().enumerate() {
        match r {
            Ok(e) => {
                for z in e.values() {
                    writeln!(out, "{t},{:e},{:e}", z.re, z.im)?;
                }
            }
            Err(Error::NoConvergence { chases, partial, .. }) => {
                for z in &partial {
                    writeln!(out, "{t},{:e},{:e}", z.re, z.im)?;
                }
                writeln!(
                    out,
                    "# incomplete: trial {t} did not converge after {chases} sweeps; output stops here"
                )?;
                out.flush()?;
                eprintln!("error: trial {t} did not converge");
                return Ok(ExitCode::from(2));
            }
            Err(e) => return Err(e.into()),
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_hist(a: &HistArgs) -> Result<ExitCode> {
    let c = &a.common;
    let spec = c.spec()?;
    if c.method != Method::Factored {
        bail!("histograms are computed from eigenvalues; use --method factored");
    }
    if a.bins < 2 || a.spacing_bins < 2 {
        bail!("--bins and --spacing-bins must be at least 2");
    }
    c.install_workers()?;
    let dir = c.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let tag = ensemble_tag(&spec, &c.det);
    let (phase, spacing) = ensemble_histograms(&spec, c.trials, a.bins, a.spacing_bins)?;
    let mut files = vec![(dir.join(format!("eig-dist-{tag}.dat")), phase)];
    if let Some(s) = spacing {
        if s.clamped() > 0 {
            eprintln!("note: {} spacings above 3 counted in the last bin", s.clamped());
        }
        files.push((dir.join(format!("eig-spacing-{tag}.dat")), s));
    }
    for (path, h) in files {
        fs::write(&path, h.to_dat()).with_context(|| format!("cannot write {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(a: &ValidateArgs) -> Result<ExitCode> {
    let c = &a.common;
    let spec = c.spec()?;
    c.install_workers()?;
    let mutation = match a.mutate.as_str() {
        "none" => Mutation::None,
        "skip-chi" => Mutation::SkipChi,
        other => bail!("unknown mutation '{other}'"),
    };
    let mut cfg = SuiteConfig::new(spec, c.trials);
    cfg.phase_bins = a.bins;
    cfg.spacing_bins = a.spacing_bins;
    cfg.method = c.method;
    cfg.mutation = mutation;
    let results = suite(&cfg)?;
    let mut out = open_out(c.out.as_deref())?;
    writeln!(out, "# criterion\tstatistic\tthreshold\tresult")?;
    for r in &results {
        writeln!(out, "{r}")?;
    }
    out.flush()?;
    Ok(if results.iter().all(|r| r.pass) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_bench(a: &BenchArgs) -> Result<ExitCode> {
    let c = &a.common;
    c.spec()?;
    if a.sizes.is_empty() || a.sizes.contains(&0) {
        bail!("--sizes must list positive orders");
    }
    let mut out = open_out(c.out.as_deref())?;
    writeln!(out, "n\tmethod\tseconds\tchases")?;
    let mut timings: Vec<Timing> = Vec::new();
    for &m in &a.methods {
        for &n in &a.sizes {
            let t = time_method(m, n, c.field, c.seed, a.min_seconds)?;
            writeln!(out, "{t}")?;
            out.flush()?;
            timings.push(t);
        }
    }
    for &m in &a.methods {
        if let Ok(s) = method_slope(&timings, m) {
            writeln!(out, "# slope\t{m}\t{s:.4}")?;
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_factor(c: &Common) -> Result<ExitCode> {
    let spec = c.spec()?;
    if c.method != Method::Factored {
        bail!("factor writes the rotation form; use --method factored");
    }
    let mut rng = spec.rng().child(0);
    let f = sample_descending::<f64>(&spec, &mut rng)?;
    let mut out = open_out(c.out.as_deref())?;
    out.write_all(f.to_text().as_bytes())?;
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(a: &SolveArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&a.input).with_context(|| format!("cannot read {}", a.input.display()))?;
    let f = DescendingFactorization::<f64>::from_text(&text)?;
    let e = eigenvalues(f, &SolverOptions::default())?;
    let mut out = open_out(a.out.as_deref())?;
    writeln!(out, "trial,re,im")?;
    for z in e.values() {
        writeln!(out, "0,{:e},{:e}", z.re, z.im)?;
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match &cli.command {
        Command::Sample(c) => cmd_sample(c),
        Command::Hist(a) => cmd_hist(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Factor(c) => cmd_factor(c),
        Command::Solve(a) => cmd_solve(a),
    };
    match run {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
