//! Seeded synthetic two-class datasets in the plane.
//!
//! Randomness comes from ChaCha8 (a counter-based stream cipher generator)
//! seeded from a single `u64` via `SeedableRng::seed_from_u64`. Uniform
//! doubles are the 53-bit `[0, 1)` draws of `rand`'s `Standard`
//! distribution. Gaussian noise uses the Marsaglia polar method, which
//! yields one normal pair per accepted draw and is applied to the two
//! coordinates of a point.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConesParams {
    pub n: usize,
    /// Cluster size ratio in `(0, 1)`.
    pub rho: f64,
    /// Spread: each coordinate is triangular on `[0, 2w]` with mode `w`.
    pub w: f64,
    /// Separating margin between the clusters along the first axis.
    pub d: f64,
    pub seed: u64,
}

impl ConesParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::contract(format!("cones: n must be >= 2, got {}", self.n)));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::contract(format!("cones: rho must lie in (0, 1), got {}", self.rho)));
        }
        if !(self.w > 0.0 && self.w.is_finite()) {
            return Err(Error::contract(format!("cones: w must be positive, got {}", self.w)));
        }
        if !(self.d >= 0.0 && self.d.is_finite()) {
            return Err(Error::contract(format!("cones: D must be nonnegative, got {}", self.d)));
        }
        Ok(())
    }

    /// Size of the first (label -1) cluster: `clamp(floor(rho n), 1, n - 1)`.
    pub fn first_cluster_size(&self) -> usize {
        cones_first_cluster_size(self.n, self.rho)
    }
}

pub fn cones_first_cluster_size(n: usize, rho: f64) -> usize {
    ((rho * n as f64).floor() as usize).clamp(1, n - 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirclesParams {
    /// Even, at least 4.
    pub n: usize,
    /// Inner radius in `[0, 1)`; the outer radius is 1.
    pub r: f64,
    pub sigma: f64,
    /// Feature-map coefficient, only consumed by the circles kernel.
    pub a: f64,
    pub seed: u64,
}

impl CirclesParams {
    pub fn validate(&self) -> Result<()> {
        if self.n < 4 || !self.n.is_multiple_of(2) {
            return Err(Error::contract(format!("circles: n must be even and >= 4, got {}", self.n)));
        }
        if !(self.r >= 0.0 && self.r < 1.0) {
            return Err(Error::contract(format!("circles: r must lie in [0, 1), got {}", self.r)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::contract(format!("circles: sigma must be nonnegative, got {}", self.sigma)));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::contract(format!("circles: a must be positive, got {}", self.a)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataMeta {
    Cones(ConesParams),
    Circles(CirclesParams),
    /// Read back from a file; generator parameters are unknown.
    Loaded,
}

impl DataMeta {
    pub fn name(&self) -> &'static str {
        match self {
            DataMeta::Cones(_) => "cones",
            DataMeta::Circles(_) => "circles",
            DataMeta::Loaded => "loaded",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    pub points: Vec<[f64; 2]>,
    pub labels: Vec<i8>,
    pub meta: DataMeta,
}

impl DataSet {
    pub fn new(points: Vec<[f64; 2]>, labels: Vec<i8>, meta: DataMeta) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::contract("dataset: point and label counts differ"));
        }
        if points.len() < 2 {
            return Err(Error::contract("dataset: need at least two points"));
        }
        if labels.iter().any(|&y| y != 1 && y != -1) {
            return Err(Error::contract("dataset: labels must be -1 or +1"));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::contract("dataset: coordinates must be finite"));
        }
        Ok(Self { points, labels, meta })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(count of -1 labels, count of +1 labels)`.
    pub fn label_counts(&self) -> (usize, usize) {
        let neg = self.labels.iter().filter(|&&y| y == -1).count();
        (neg, self.len() - neg)
    }

    /// Smallest Euclidean distance between two points of different labels.
    pub fn min_cross_distance(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if self.labels[i] != self.labels[j] {
                    let d = dist(self.points[i], self.points[j]);
                    best = Some(best.map_or(d, |b| b.min(d)));
                }
            }
        }
        best
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x1,x2,label\n");
        for (p, y) in self.points.iter().zip(&self.labels) {
            writeln!(out, "{:.16e},{:.16e},{}", p[0], p[1], y).unwrap();
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, path)
    }

    pub fn parse_csv(text: &str, origin: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(|e| Error::parse(origin, 1, e.to_string()))?;
        if headers != vec!["x1", "x2", "label"] {
            return Err(Error::parse(origin, 1, "expected header `x1,x2,label`"));
        }
        let mut points = Vec::new();
        let mut labels = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line() as usize);
                Error::parse(origin, line, e.to_string())
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            if rec.len() != 3 {
                return Err(Error::parse(origin, line, "expected 3 fields"));
            }
            let num = |k: usize| -> Result<f64> {
                rec[k]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(origin, line, format!("bad number {:?}", &rec[k])))
            };
            let x1 = num(0)?;
            let x2 = num(1)?;
            let y: i8 = rec[2]
                .trim()
                .parse()
                .map_err(|_| Error::parse(origin, line, format!("bad label {:?}", &rec[2])))?;
            if y != 1 && y != -1 {
                return Err(Error::parse(origin, line, format!("label must be -1 or 1, got {y}")));
            }
            points.push([x1, x2]);
            labels.push(y);
        }
        Self::new(points, labels, DataMeta::Loaded)
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Inverse CDF of the symmetric triangular distribution on `[0, 2w]` with mode `w`.
pub fn sample_triangular(u: f64, w: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::contract(format!("triangular: u must lie in [0, 1], got {u}")));
    }
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::contract(format!("triangular: w must be positive, got {w}")));
    }
    Ok(triangular_inv(u, w))
}

fn triangular_inv(u: f64, w: f64) -> f64 {
    if u <= 0.5 {
        2.0 * w * (u / 2.0).sqrt()
    } else {
        2.0 * w * (1.0 - ((1.0 - u) / 2.0).sqrt())
    }
}

/// Two linearly separable clusters with a guaranteed margin, randomly
/// rotated and column-mean centered.
pub fn gen_cones(p: &ConesParams) -> Result<DataSet> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let n1 = p.first_cluster_size();
    let mut x = cones_unrotated(p, n1, &mut rng);

    let theta = 2.0 * PI * rng.gen::<f64>();
    let (sin, cos) = theta.sin_cos();
    // Row vectors times R(theta) = [[cos, -sin], [sin, cos]].
    for row in x.iter_mut() {
        let [a, b] = *row;
        *row = [a * cos + b * sin, -a * sin + b * cos];
    }

    let nf = p.n as f64;
    let mu = x.iter().fold([0.0, 0.0], |m, r| [m[0] + r[0], m[1] + r[1]]);
    let mu = [mu[0] / nf, mu[1] / nf];
    for row in x.iter_mut() {
        row[0] -= mu[0];
        row[1] -= mu[1];
    }

    let labels = (0..p.n).map(|i| if i < n1 { -1 } else { 1 }).collect();
    DataSet::new(x, labels, DataMeta::Cones(*p))
}

fn cones_unrotated(p: &ConesParams, n1: usize, rng: &mut impl Rng) -> Vec<[f64; 2]> {
    let mut x: Vec<[f64; 2]> = (0..p.n)
        .map(|_| {
            let a = triangular_inv(rng.gen::<f64>(), p.w);
            let b = triangular_inv(rng.gen::<f64>(), p.w);
            [a, b]
        })
        .collect();
    for row in x.iter_mut().skip(n1) {
        row[0] += 2.0 * p.w + p.d;
    }
    x
}

/// Marsaglia polar method: one pair of independent standard normals.
fn normal_pair(rng: &mut impl Rng) -> (f64, f64) {
    loop {
        let u = 2.0 * rng.gen::<f64>() - 1.0;
        let v = 2.0 * rng.gen::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            let f = (-2.0 * s.ln() / s).sqrt();
            return (u * f, v * f);
        }
    }
}

/// Concentric circles: `n/2` points on the unit circle (label -1), `n/2` on
/// radius `r` (label +1), at equally spaced angles, plus isotropic Gaussian noise.
pub fn gen_circles(p: &CirclesParams) -> Result<DataSet> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let half = p.n / 2;
    let mut points = Vec::with_capacity(p.n);
    let mut labels = Vec::with_capacity(p.n);
    for (radius, label) in [(1.0, -1), (p.r, 1)] {
        for k in 0..half {
            let angle = 2.0 * PI * k as f64 / half as f64;
            let (sin, cos) = angle.sin_cos();
            points.push([radius * cos, radius * sin]);
            labels.push(label);
        }
    }
    for pt in points.iter_mut() {
        let (e1, e2) = normal_pair(&mut rng);
        pt[0] += p.sigma * e1;
        pt[1] += p.sigma * e2;
    }
    DataSet::new(points, labels, DataMeta::Circles(*p))
}
