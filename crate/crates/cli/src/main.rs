//! `qgl`: generate datasets, build QUBOs, compute gaps and run sweeps.
//!
//! Exit codes: 0 success, 1 invalid input or usage, 2 I/O failure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use qgl_core::annealing::{gap_bound_report, weyl_check, AnnealSchedule, DEFAULT_GRID_POINTS};
use qgl_core::datagen::{gen_circles, gen_cones, CirclesParams, ConesParams, DataSet};
use qgl_core::embeddings::{clustering_qubo, svm_qubo, SvmHyperparams};
use qgl_core::harness::{self, gnuplot_script, parse_key_values, run_sweep, summarize, SweepConfig};
use qgl_core::kernels::{gram_circles, gram_linear};
use qgl_core::spectrum::{enumerate_spectrum_with, EnumerateOptions};
use qgl_core::{with_threads, Error, QuboInstance, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "qgl", version, about = "Spectral gaps of QUBO embeddings of clustering and SVM training")]
struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true, env = "QGL_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labelled 2-D dataset as CSV.
    Gen(GenArgs),
    /// Build a QUBO instance from a dataset.
    Qubo(QuboArgs),
    /// Exact spectral gap by exhaustive enumeration (single-line JSON).
    Gap(GapArgs),
    /// Minimum gap along the linear annealing path and the gap bound check.
    Ahgap(AhgapArgs),
    /// Seeded parameter sweep: records CSV plus correlation summary.
    Sweep(Box<SweepArgs>),
    /// Weyl-inequality check on random symmetric matrix pairs.
    WeylCheck(WeylArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Cones,
    Circles,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    Clustering,
    Svm,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Linear,
    Circles,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    w: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
}

#[derive(Args)]
struct QuboArgs {
    #[arg(long, value_enum)]
    problem: ProblemArg,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = KernelArg::Linear)]
    kernel: KernelArg,
    /// Feature-map coefficient of the circles kernel.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Scale so that the largest |Q_ij| is 1.
    #[arg(long)]
    normalize: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GapArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Allow enumeration beyond 28 variables (up to 32).
    #[arg(long)]
    force_large: bool,
}

#[derive(Args)]
struct AhgapArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid: usize,
}

#[derive(Args)]
struct SweepArgs {
    /// Flat `key = value` file; flags below override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    summary: PathBuf,
    /// Also write a gnuplot script plotting the records.
    #[arg(long)]
    gnuplot: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    generator: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long)]
    lo: Option<String>,
    #[arg(long)]
    hi: Option<String>,
    #[arg(long)]
    sweep2: Option<String>,
    #[arg(long)]
    lo2: Option<String>,
    #[arg(long)]
    hi2: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    normalize: Option<String>,
    #[arg(long)]
    rho: Option<String>,
    #[arg(long)]
    w: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    c: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
}

impl SweepArgs {
    fn overrides(&self) -> [(&'static str, &Option<String>); 20] {
        [
            ("problem", &self.problem),
            ("generator", &self.generator),
            ("n", &self.n),
            ("sweep", &self.sweep),
            ("lo", &self.lo),
            ("hi", &self.hi),
            ("sweep2", &self.sweep2),
            ("lo2", &self.lo2),
            ("hi2", &self.hi2),
            ("samples", &self.samples),
            ("seed", &self.seed),
            ("normalize", &self.normalize),
            ("rho", &self.rho),
            ("w", &self.w),
            ("D", &self.d),
            ("r", &self.r),
            ("sigma", &self.sigma),
            ("a", &self.a),
            ("C", &self.c),
            ("lambda", &self.lambda),
        ]
    }
}

#[derive(Args)]
struct WeylArgs {
    #[arg(long)]
    dim: usize,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let threads = cli.threads;
    match with_threads(threads, move || run(cli.cmd)).and_then(|r| r) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Gen(a) => cmd_gen(a),
        Command::Qubo(a) => cmd_qubo(a),
        Command::Gap(a) => cmd_gap(a),
        Command::Ahgap(a) => cmd_ahgap(a),
        Command::Sweep(a) => cmd_sweep(*a),
        Command::WeylCheck(a) => cmd_weyl(a),
    }
}

fn required(v: Option<f64>, flag: &str, family: &str) -> Result<f64> {
    v.ok_or_else(|| Error::Contract(format!("--{flag} is required for --family {family}")))
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let data = match a.family {
        Family::Cones => gen_cones(&ConesParams {
            n: a.n,
            rho: required(a.rho, "rho", "cones")?,
            w: required(a.w, "w", "cones")?,
            d: required(a.d, "d", "cones")?,
            seed: a.seed,
        })?,
        Family::Circles => gen_circles(&CirclesParams {
            n: a.n,
            r: required(a.r, "r", "circles")?,
            sigma: a.sigma,
            a: 1.0,
            seed: a.seed,
        })?,
    };
    data.write_csv(&a.out)?;
    let (neg, pos) = data.label_counts();
    println!("n: {}", data.len());
    println!("labels: -1={neg} +1={pos}");
    match data.min_cross_distance() {
        Some(d) => println!("min_cross_distance: {d}"),
        None => println!("min_cross_distance: none"),
    }
    Ok(())
}

fn cmd_qubo(a: QuboArgs) -> Result<()> {
    let data = DataSet::read_csv(&a.input)?;
    let km = match a.kernel {
        KernelArg::Linear => gram_linear(&data),
        KernelArg::Circles => {
            if !(a.a > 0.0 && a.a.is_finite()) {
                return Err(Error::Contract(format!("--a must be positive, got {}", a.a)));
            }
            gram_circles(&data, a.a)
        }
    };
    let q = match a.problem {
        ProblemArg::Clustering => {
            if a.c.is_some() || a.lambda.is_some() {
                return Err(Error::Contract("--c and --lambda apply only to --problem svm".into()));
            }
            clustering_qubo(&km.center())?
        }
        ProblemArg::Svm => {
            let hp = SvmHyperparams {
                c: a.c.ok_or_else(|| Error::Contract("--c is required for --problem svm".into()))?,
                lam: a.lambda.ok_or_else(|| Error::Contract("--lambda is required for --problem svm".into()))?,
            };
            svm_qubo(&km, &data.labels, &hp)?
        }
    };
    let q = if a.normalize { q.normalize_inf()? } else { q };
    q.write(&a.out)
}

fn cmd_gap(a: GapArgs) -> Result<()> {
    let q = QuboInstance::read(&a.input)?;
    let s = enumerate_spectrum_with(&q, EnumerateOptions { allow_large: a.force_large })?;
    let bits: String = s.ground_state.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
    let record = serde_json::json!({
        "n": q.n(),
        "min_energy": s.min_energy,
        "second_energy": s.second_energy,
        "gap": s.gap,
        "ground_degeneracy": s.ground_degeneracy,
        "ground_state": bits,
    });
    println!("{record}");
    Ok(())
}

fn cmd_ahgap(a: AhgapArgs) -> Result<()> {
    let q = QuboInstance::read(&a.input)?;
    let rep = gap_bound_report(&q, &AnnealSchedule::linear(), a.grid)?;
    println!("s_star: {}", rep.s_star);
    println!("min_gap: {}", rep.min_gap);
    println!("problem_gap: {}", rep.problem_gap);
    println!("driver_gap: {}", rep.driver_gap);
    println!("bound: {}", rep.bound);
    println!("bound_ok: {}", rep.bound_ok);
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let mut pairs: BTreeMap<String, String> = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
            parse_key_values(&text, path)?
        }
        None => BTreeMap::new(),
    };
    for (key, value) in a.overrides() {
        if let Some(v) = value {
            // A flag replaces whatever spelling of the same key the file used.
            pairs.retain(|k, _| !k.eq_ignore_ascii_case(key));
            pairs.insert(key.to_string(), v.clone());
        }
    }
    let cfg = SweepConfig::from_pairs(&pairs)?;
    let records = run_sweep(&cfg)?;
    harness::write_csv(&records, &a.out)?;
    let report = summarize(&records)?;
    write(&a.summary, &report.to_text())?;
    if let Some(path) = &a.gnuplot {
        write(path, &gnuplot_script(&a.out.to_string_lossy(), &report, cfg.swept.param))?;
    }
    println!("records: {}", records.len());
    print!("{}", report.to_text());
    Ok(())
}

fn cmd_weyl(a: WeylArgs) -> Result<()> {
    if a.dim == 0 {
        return Err(Error::Contract("--dim must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let (mut violations, mut worst, mut bound_failures) = (0usize, f64::NEG_INFINITY, 0usize);
    for _ in 0..a.trials {
        let nu = random_symmetric(&mut rng, a.dim);
        let rho = random_symmetric(&mut rng, a.dim);
        let rep = weyl_check(&nu, &rho)?;
        violations += rep.violations;
        worst = worst.max(rep.max_violation);
        bound_failures += usize::from(!rep.gap_bound_holds);
    }
    println!("trials: {}", a.trials);
    println!("dim: {}", a.dim);
    if a.trials > 0 {
        println!("max_violation: {worst:e}");
    }
    println!("gap_bound_failures: {bound_failures}");
    println!("{violations} violations");
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

/// `(X + X^T) / 2` with `X_ij` uniform on `[-1, 1)`.
fn random_symmetric(rng: &mut impl Rng, d: usize) -> DMatrix<f64> {
    let x = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-1.0..1.0));
    (&x + x.transpose()) * 0.5
}
