//! Seeded parameter sweeps: sample a dataset per record, embed it, enumerate
//! the spectrum, and relate the swept parameter to the spectral gap.
//!
//! Sample `k` uses `derived_seed = splitmix64(master_seed + (k + 1) * GOLDEN)`,
//! the `k`-th output of a SplitMix64 stream started at `master_seed`. The
//! dataset generator consumes ChaCha8 stream 0 of that seed; swept values
//! are drawn from stream 1, so records never depend on one another.

mod stats;

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::datagen::{gen_circles, gen_cones, CirclesParams, ConesParams};
use crate::embeddings::{clustering_qubo, svm_qubo, SvmHyperparams};
use crate::error::{Error, Result};
use crate::kernels::{gram_circles, gram_linear};
use crate::spectrum::enumerate_spectrum;

pub use stats::{average_ranks, fit_poly, pearson, spearman, PolyFit};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer applied to `x`.
pub fn splitmix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed for sample `index` of a sweep.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Clustering,
    Svm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    Cones,
    Circles,
}

/// Every scalar a sweep can fix or vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Param {
    Rho,
    W,
    D,
    R,
    Sigma,
    A,
    C,
    Lambda,
}

impl Param {
    pub const ALL: [Param; 8] = [Param::Rho, Param::W, Param::D, Param::R, Param::Sigma, Param::A, Param::C, Param::Lambda];

    /// Column name in the sweep CSV.
    pub fn name(self) -> &'static str {
        match self {
            Param::Rho => "rho",
            Param::W => "w",
            Param::D => "D",
            Param::R => "r",
            Param::Sigma => "sigma",
            Param::A => "a",
            Param::C => "C",
            Param::Lambda => "lambda",
        }
    }

    fn used_by(self, problem: Problem, generator: Generator) -> bool {
        match self {
            Param::Rho | Param::W | Param::D => generator == Generator::Cones,
            Param::R | Param::Sigma | Param::A => generator == Generator::Circles,
            Param::C | Param::Lambda => problem == Problem::Svm,
        }
    }
}

macro_rules! impl_names {
    ($ty:ty, $($variant:path => $($s:literal)|+),+ $(,)?) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($($s)|+ => Ok($variant),)+
                    other => Err(Error::contract(format!(
                        concat!("unknown ", stringify!($ty), " {:?}"), other
                    ))),
                }
            }
        }
    };
}

impl_names!(Problem, Problem::Clustering => "clustering", Problem::Svm => "svm");
impl_names!(Generator, Generator::Cones => "cones", Generator::Circles => "circles");
impl_names!(Param,
    Param::Rho => "rho", Param::W => "w", Param::D => "D" | "d", Param::R => "r",
    Param::Sigma => "sigma", Param::A => "a", Param::C => "C" | "c", Param::Lambda => "lambda" | "lam",
);

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Clustering => "clustering",
            Problem::Svm => "svm",
        })
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Generator::Cones => "cones",
            Generator::Circles => "circles",
        })
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub param: Param,
    pub lo: f64,
    pub hi: f64,
}

impl SweepRange {
    pub fn new(param: Param, lo: f64, hi: f64) -> Self {
        Self { param, lo, hi }
    }

    fn draw(&self, rng: &mut impl Rng) -> f64 {
        self.lo + (self.hi - self.lo) * rng.gen::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub problem: Problem,
    pub generator: Generator,
    pub n: usize,
    pub fixed: BTreeMap<Param, f64>,
    pub swept: SweepRange,
    /// Optional second parameter sampled independently (joint 2-D sweep).
    pub swept2: Option<SweepRange>,
    pub samples: usize,
    pub master_seed: u64,
    pub normalize: bool,
}

impl SweepConfig {
    pub fn new(problem: Problem, generator: Generator, n: usize, swept: SweepRange) -> Self {
        Self {
            problem,
            generator,
            n,
            fixed: BTreeMap::new(),
            swept,
            swept2: None,
            samples: 1,
            master_seed: 0,
            normalize: true,
        }
    }

    pub fn fix(mut self, param: Param, value: f64) -> Self {
        self.fixed.insert(param, value);
        self
    }

    pub fn samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn normalize(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn with_second(mut self, range: SweepRange) -> Self {
        self.swept2 = Some(range);
        self
    }

    fn required(&self) -> Vec<Param> {
        let mut req = match self.generator {
            Generator::Cones => vec![Param::Rho, Param::W, Param::D],
            Generator::Circles => vec![Param::R, Param::Sigma, Param::A],
        };
        if self.problem == Problem::Svm {
            req.extend([Param::C, Param::Lambda]);
        }
        req
    }

    fn ranges(&self) -> impl Iterator<Item = &SweepRange> {
        std::iter::once(&self.swept).chain(self.swept2.as_ref())
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::contract("samples must be >= 1"));
        }
        if self.n > crate::spectrum::DEFAULT_MAX_VARS {
            return Err(Error::contract(format!(
                "n = {} exceeds the enumeration limit of {}",
                self.n,
                crate::spectrum::DEFAULT_MAX_VARS
            )));
        }
        for r in self.ranges() {
            if !(r.lo.is_finite() && r.hi.is_finite() && r.lo <= r.hi) {
                return Err(Error::contract(format!("invalid interval [{}, {}] for {}", r.lo, r.hi, r.param)));
            }
            if self.fixed.contains_key(&r.param) {
                return Err(Error::contract(format!("{} is both fixed and swept", r.param)));
            }
            if !r.param.used_by(self.problem, self.generator) {
                return Err(Error::contract(format!(
                    "{} is not a parameter of {}/{}",
                    r.param, self.problem, self.generator
                )));
            }
        }
        if let Some(r2) = &self.swept2 {
            if r2.param == self.swept.param {
                return Err(Error::contract("the two swept parameters must differ"));
            }
        }
        for (&p, &v) in &self.fixed {
            if !p.used_by(self.problem, self.generator) {
                return Err(Error::contract(format!("{p} is not a parameter of {}/{}", self.problem, self.generator)));
            }
            if !v.is_finite() {
                return Err(Error::contract(format!("{p} must be finite")));
            }
        }
        for p in self.required() {
            let given = self.fixed.contains_key(&p) || self.ranges().any(|r| r.param == p);
            if !given && !(p == Param::A) {
                return Err(Error::contract(format!("missing value for {p}")));
            }
        }
        Ok(())
    }

    /// Parse from flat `key = value` pairs. Keys: `problem`, `generator`,
    /// `n`, any parameter name, `sweep`/`lo`/`hi`, `sweep2`/`lo2`/`hi2`,
    /// `samples`, `seed`, `normalize`.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| pairs.get(k).map(|s| s.trim());
        let need = |k: &str| get(k).ok_or_else(|| Error::contract(format!("missing required key `{k}`")));
        fn num<T: FromStr>(k: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::contract(format!("`{k}`: cannot parse {v:?}")))
        }

        let problem: Problem = need("problem")?.parse()?;
        let generator: Generator = need("generator")?.parse()?;
        let n: usize = num("n", need("n")?)?;
        let swept = SweepRange::new(need("sweep")?.parse()?, num("lo", need("lo")?)?, num("hi", need("hi")?)?);
        let mut cfg = SweepConfig::new(problem, generator, n, swept);
        if let Some(p2) = get("sweep2") {
            cfg.swept2 = Some(SweepRange::new(p2.parse()?, num("lo2", need("lo2")?)?, num("hi2", need("hi2")?)?));
        }
        if let Some(v) = get("samples") {
            cfg.samples = num("samples", v)?;
        }
        if let Some(v) = get("seed") {
            cfg.master_seed = num("seed", v)?;
        }
        if let Some(v) = get("normalize") {
            cfg.normalize = num("normalize", v)?;
        }
        const KNOWN: [&str; 13] =
            ["problem", "generator", "n", "sweep", "lo", "hi", "sweep2", "lo2", "hi2", "samples", "seed", "normalize", "threads"];
        for (k, v) in pairs {
            if KNOWN.contains(&k.as_str()) {
                continue;
            }
            let p: Param = k.parse().map_err(|_| Error::contract(format!("unknown key `{k}`")))?;
            cfg.fixed.insert(p, num(k, v.trim())?);
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Flat `key = value` text, one option per line; `#` starts a comment.
pub fn parse_key_values(text: &str, origin: &Path) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(origin, idx + 1, "expected `key = value`"))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub sample_index: usize,
    pub seed: u64,
    pub problem: Problem,
    pub generator: Generator,
    pub n: usize,
    /// Value of every parameter that applies to this problem/generator.
    pub params: BTreeMap<Param, f64>,
    pub swept_name: Param,
    pub swept_value: f64,
    pub sg: Option<f64>,
    pub min_energy: f64,
    pub ground_degeneracy: u64,
}

impl SweepRecord {
    pub fn param(&self, p: Param) -> Option<f64> {
        self.params.get(&p).copied()
    }
}

fn sample_params(cfg: &SweepConfig, seed: u64) -> BTreeMap<Param, f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut params = cfg.fixed.clone();
    for r in cfg.ranges() {
        params.insert(r.param, r.draw(&mut rng));
    }
    if cfg.generator == Generator::Circles {
        params.entry(Param::A).or_insert(1.0);
    }
    params
}

fn run_sample(cfg: &SweepConfig, index: usize) -> Result<SweepRecord> {
    let seed = derive_seed(cfg.master_seed, index as u64);
    let params = sample_params(cfg, seed);
    let p = |k: Param| params[&k];

    let (data, kernel) = match cfg.generator {
        Generator::Cones => {
            let ds = gen_cones(&ConesParams { n: cfg.n, rho: p(Param::Rho), w: p(Param::W), d: p(Param::D), seed })?;
            let k = gram_linear(&ds);
            (ds, k)
        }
        Generator::Circles => {
            let ds = gen_circles(&CirclesParams {
                n: cfg.n,
                r: p(Param::R),
                sigma: p(Param::Sigma),
                a: p(Param::A),
                seed,
            })?;
            let k = gram_circles(&ds, p(Param::A));
            (ds, k)
        }
    };
    let q = match cfg.problem {
        Problem::Clustering => clustering_qubo(&kernel.center())?,
        Problem::Svm => svm_qubo(&kernel, &data.labels, &SvmHyperparams { c: p(Param::C), lam: p(Param::Lambda) })?,
    };
    let q = if cfg.normalize {
        match q.normalize_inf() {
            Ok(nq) => nq,
            Err(Error::DegenerateInstance) => q,
            Err(e) => return Err(e),
        }
    } else {
        q
    };
    let summary = enumerate_spectrum(&q)?;
    Ok(SweepRecord {
        sample_index: index,
        seed,
        problem: cfg.problem,
        generator: cfg.generator,
        n: cfg.n,
        swept_name: cfg.swept.param,
        swept_value: params[&cfg.swept.param],
        params,
        sg: summary.gap,
        min_energy: summary.min_energy,
        ground_degeneracy: summary.ground_degeneracy,
    })
}

/// Evaluate every sample (in parallel on the current rayon pool) and return
/// the records in sample order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    (0..cfg.samples).into_par_iter().map(|k| run_sample(cfg, k)).collect()
}

pub const CSV_HEADER: [&str; 18] = [
    "sample_index",
    "seed",
    "problem",
    "generator",
    "n",
    "rho",
    "w",
    "D",
    "r",
    "sigma",
    "a",
    "C",
    "lambda",
    "swept_name",
    "swept_value",
    "sg",
    "min_energy",
    "ground_degeneracy",
];

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn records_to_csv(records: &[SweepRecord]) -> String {
    let mut out = CSV_HEADER.join(",");
    out.push('\n');
    for r in records {
        write!(out, "{},{},{},{},{}", r.sample_index, r.seed, r.problem, r.generator, r.n).unwrap();
        for p in Param::ALL {
            out.push(',');
            if let Some(v) = r.param(p) {
                out.push_str(&fmt_f(v));
            }
        }
        let sg = r.sg.map(fmt_f).unwrap_or_default();
        writeln!(
            out,
            ",{},{},{},{},{}",
            r.swept_name,
            fmt_f(r.swept_value),
            sg,
            fmt_f(r.min_energy),
            r.ground_degeneracy
        )
        .unwrap();
    }
    out
}

pub fn write_csv(records: &[SweepRecord], path: &Path) -> Result<()> {
    fs::write(path, records_to_csv(records)).map_err(|e| Error::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, path)
}

pub fn parse_csv(text: &str, origin: &Path) -> Result<Vec<SweepRecord>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::parse(origin, 1, e.to_string()))?;
    if headers.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::parse(origin, 1, format!("expected header `{}`", CSV_HEADER.join(","))));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse(origin, e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::parse(origin, line, format!("expected {} fields, got {}", CSV_HEADER.len(), rec.len())));
        }
        let field = |k: usize| rec[k].trim();
        let parse = |k: usize| -> Result<f64> {
            field(k)
                .parse::<f64>()
                .map_err(|_| Error::parse(origin, line, format!("{}: bad number {:?}", CSV_HEADER[k], field(k))))
        };
        let parse_opt = |k: usize| -> Result<Option<f64>> {
            if field(k).is_empty() {
                Ok(None)
            } else {
                parse(k).map(Some)
            }
        };
        let parse_int = |k: usize| -> Result<u64> {
            field(k)
                .parse::<u64>()
                .map_err(|_| Error::parse(origin, line, format!("{}: bad integer {:?}", CSV_HEADER[k], field(k))))
        };
        let named = |k: usize| -> Result<&str> { Ok(field(k)) };
        let at_line = |e: Error| Error::parse(origin, line, e.to_string());

        let mut params = BTreeMap::new();
        for (offset, p) in Param::ALL.iter().enumerate() {
            if let Some(v) = parse_opt(5 + offset)? {
                params.insert(*p, v);
            }
        }
        out.push(SweepRecord {
            sample_index: parse_int(0)? as usize,
            seed: parse_int(1)?,
            problem: named(2)?.parse().map_err(at_line)?,
            generator: named(3)?.parse().map_err(at_line)?,
            n: parse_int(4)? as usize,
            params,
            swept_name: named(13)?.parse().map_err(at_line)?,
            swept_value: parse(14)?,
            sg: parse_opt(15)?,
            min_energy: parse(16)?,
            ground_degeneracy: parse_int(17)?,
        });
    }
    Ok(out)
}

/// Correlation axis for a swept parameter. The inner radius `r` of the
/// circles data is reported as the margin `1 - r`.
pub fn correlation_axis(param: Param, value: f64) -> f64 {
    match param {
        Param::R => 1.0 - value,
        _ => value,
    }
}

pub fn axis_label(param: Param) -> String {
    match param {
        Param::R => "1-r".to_string(),
        p => p.name().to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationReport {
    pub axis: String,
    pub count: usize,
    pub count_excluded: usize,
    pub pearson: f64,
    pub spearman: f64,
    pub quad_fit: [f64; 3],
    pub lin_fit: [f64; 2],
    pub r2_quad: f64,
    pub r2_lin: f64,
}

impl CorrelationReport {
    /// One `key: value` per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "axis: {}", self.axis).unwrap();
        writeln!(s, "count: {}", self.count).unwrap();
        writeln!(s, "count_excluded: {}", self.count_excluded).unwrap();
        writeln!(s, "pearson: {}", self.pearson).unwrap();
        writeln!(s, "spearman: {}", self.spearman).unwrap();
        writeln!(s, "quad_fit: {} {} {}", self.quad_fit[0], self.quad_fit[1], self.quad_fit[2]).unwrap();
        writeln!(s, "r2_quad: {}", self.r2_quad).unwrap();
        writeln!(s, "lin_fit: {} {}", self.lin_fit[0], self.lin_fit[1]).unwrap();
        writeln!(s, "r2_lin: {}", self.r2_lin).unwrap();
        s
    }
}

/// Correlate the swept parameter (on its [`correlation_axis`]) with the
/// gap over records that have one.
pub fn summarize(records: &[SweepRecord]) -> Result<CorrelationReport> {
    let first = records.first().ok_or_else(|| Error::contract("no records to summarize"))?;
    let param = first.swept_name;
    if records.iter().any(|r| r.swept_name != param) {
        return Err(Error::contract("records mix different swept parameters"));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = records
        .iter()
        .filter_map(|r| r.sg.map(|g| (correlation_axis(param, r.swept_value), g)))
        .unzip();
    let quad = fit_poly(&xs, &ys, 2)?;
    let lin = fit_poly(&xs, &ys, 1)?;
    Ok(CorrelationReport {
        axis: axis_label(param),
        count: xs.len(),
        count_excluded: records.len() - xs.len(),
        pearson: pearson(&xs, &ys)?,
        spearman: spearman(&xs, &ys)?,
        quad_fit: [quad.coeffs[0], quad.coeffs[1], quad.coeffs[2]],
        lin_fit: [lin.coeffs[0], lin.coeffs[1]],
        r2_quad: quad.r2,
        r2_lin: lin.r2,
    })
}

/// Gnuplot script plotting the gap against the swept parameter with the
/// fitted quadratic overlaid.
pub fn gnuplot_script(csv_path: &str, report: &CorrelationReport, swept: Param) -> String {
    let col = 15;
    let x = if swept == Param::R { format!("(1-${col})") } else { format!("${col}") };
    let [c0, c1, c2] = report.quad_fit;
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel '{axis}'\n\
         set ylabel 'spectral gap'\n\
         f(x) = {c0:e} + {c1:e}*x + {c2:e}*x**2\n\
         plot '{csv_path}' using {x}:16 with points pt 7 ps 0.5 title 'records', \\\n     f(x) with lines lw 2 title 'quadratic fit'\n",
        axis = report.axis
    )
}
