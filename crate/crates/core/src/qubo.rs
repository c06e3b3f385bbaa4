//! QUBO and Ising representations.
//!
//! A [`QuboInstance`] stores an upper-triangular `n x n` matrix `Q` and
//! defines the energy `f_Q(z) = sum_{i <= j} Q_ij z_i z_j` over binary
//! vectors `z in {0,1}^n`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative tolerance used when checking a matrix for symmetry.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct QuboInstance {
    q: DMatrix<f64>,
}

impl QuboInstance {
    /// Build from a square matrix that must already be upper triangular.
    pub fn new(q: DMatrix<f64>) -> Result<Self> {
        let n = q.nrows();
        if n == 0 {
            return Err(Error::contract("QUBO must have at least one variable"));
        }
        if q.ncols() != n {
            return Err(Error::contract(format!("QUBO matrix must be square, got {}x{}", n, q.ncols())));
        }
        for j in 0..n {
            for i in 0..n {
                let v = q[(i, j)];
                if !v.is_finite() {
                    return Err(Error::contract(format!("non-finite entry Q[{i},{j}]")));
                }
                if i > j && v != 0.0 {
                    return Err(Error::contract(format!("strictly-lower entry Q[{i},{j}] = {v} must be zero")));
                }
            }
        }
        Ok(Self { q })
    }

    /// Build from a row-major nested vector.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::contract("QUBO rows must all have length n"));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(DMatrix::zeros(n, n))
    }

    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.q[(i, j)]
    }

    /// Largest absolute entry, the `||Q||_inf` used for normalization.
    pub fn max_abs(&self) -> f64 {
        self.q.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    fn check_state(&self, z: &[u8]) -> Result<()> {
        if z.len() != self.n() {
            return Err(Error::contract(format!(
                "state has length {}, instance has {} variables",
                z.len(),
                self.n()
            )));
        }
        if z.iter().any(|&b| b > 1) {
            return Err(Error::contract("state entries must be 0 or 1"));
        }
        Ok(())
    }

    /// `f_Q(z)` for an explicit binary vector.
    pub fn energy(&self, z: &[u8]) -> Result<f64> {
        self.check_state(z)?;
        let n = self.n();
        let mut e = 0.0;
        for i in 0..n {
            if z[i] == 0 {
                continue;
            }
            for j in i..n {
                if z[j] == 1 {
                    e += self.q[(i, j)];
                }
            }
        }
        Ok(e)
    }

    /// `f_Q` for a packed state (bit `i` is `z_i`). Bits at or above `n` are ignored.
    pub fn energy_packed(&self, state: u64) -> f64 {
        let n = self.n();
        let mut e = 0.0;
        for i in 0..n {
            if state >> i & 1 == 0 {
                continue;
            }
            for j in i..n {
                if state >> j & 1 == 1 {
                    e += self.q[(i, j)];
                }
            }
        }
        e
    }

    /// Energy change from flipping bit `i` of `z`:
    /// `(1 - 2 z_i) (Q_ii + sum_{j<i} Q_ji z_j + sum_{j>i} Q_ij z_j)`.
    pub fn flip_delta(&self, z: &[u8], i: usize) -> Result<f64> {
        self.check_state(z)?;
        if i >= self.n() {
            return Err(Error::contract(format!("flip index {i} out of range for n = {}", self.n())));
        }
        let mut field = self.q[(i, i)];
        for (j, &zj) in z.iter().enumerate() {
            if zj == 1 && j != i {
                field += if j < i { self.q[(j, i)] } else { self.q[(i, j)] };
            }
        }
        let sign = if z[i] == 0 { 1.0 } else { -1.0 };
        Ok(sign * field)
    }

    /// Substitute `z = (s + 1) / 2` to obtain the equivalent spin model.
    pub fn to_ising(&self) -> IsingInstance {
        let n = self.n();
        let mut j = DMatrix::zeros(n, n);
        let mut h = vec![0.0; n];
        let mut c = 0.0;
        for a in 0..n {
            let qaa = self.q[(a, a)];
            h[a] += qaa / 2.0;
            c += qaa / 2.0;
            for b in a + 1..n {
                let qab = self.q[(a, b)];
                j[(a, b)] = qab / 4.0;
                h[a] += qab / 4.0;
                h[b] += qab / 4.0;
                c += qab / 4.0;
            }
        }
        IsingInstance { j, h, c }
    }

    /// Convert the quadratic form `z^T M z + linear^T z` (with `M` symmetric)
    /// into upper-triangular QUBO form. Any constant offset of the source
    /// objective is not represented; gaps are translation invariant.
    pub fn from_symmetric(m: &DMatrix<f64>, linear: &[f64]) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n || linear.len() != n {
            return Err(Error::contract("from_symmetric: dimension mismatch"));
        }
        check_symmetric(m)?;
        let mut q = DMatrix::zeros(n, n);
        for i in 0..n {
            q[(i, i)] = m[(i, i)] + linear[i];
            for j in i + 1..n {
                q[(i, j)] = m[(i, j)] + m[(j, i)];
            }
        }
        Self::new(q)
    }

    /// Scale so the largest absolute entry is exactly 1.
    pub fn normalize_inf(&self) -> Result<Self> {
        let m = self.max_abs();
        if m == 0.0 {
            return Err(Error::DegenerateInstance);
        }
        Ok(Self { q: self.q.map(|v| v / m) })
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.q.map(|v| v * factor))
    }

    /// Serialize to the text format: first line `n`, then `i j value` for
    /// every nonzero entry (0-based, `i <= j`, 17 significant digits).
    pub fn to_text(&self) -> String {
        let n = self.n();
        let mut out = format!("{n}\n");
        for i in 0..n {
            for j in i..n {
                let v = self.q[(i, j)];
                if v != 0.0 {
                    writeln!(out, "{i} {j} {v:.16e}").unwrap();
                }
            }
        }
        out
    }

    pub fn parse_text(text: &str, origin: &Path) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut q = DMatrix::zeros(0, 0);
        let mut seen = std::collections::HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some(size) = n else {
                let size: usize = line
                    .parse()
                    .map_err(|_| Error::parse(origin, line_no, format!("expected variable count, got {line:?}")))?;
                if size == 0 {
                    return Err(Error::parse(origin, line_no, "variable count must be positive"));
                }
                n = Some(size);
                q = DMatrix::zeros(size, size);
                continue;
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::parse(origin, line_no, "expected `i j value`"));
            }
            let i: usize = fields[0]
                .parse()
                .map_err(|_| Error::parse(origin, line_no, format!("bad row index {:?}", fields[0])))?;
            let j: usize = fields[1]
                .parse()
                .map_err(|_| Error::parse(origin, line_no, format!("bad column index {:?}", fields[1])))?;
            let v: f64 = fields[2]
                .parse()
                .map_err(|_| Error::parse(origin, line_no, format!("bad value {:?}", fields[2])))?;
            if i > j || j >= size {
                return Err(Error::parse(origin, line_no, format!("index pair ({i}, {j}) invalid for n = {size}")));
            }
            if !v.is_finite() {
                return Err(Error::parse(origin, line_no, "value must be finite"));
            }
            if !seen.insert((i, j)) {
                return Err(Error::parse(origin, line_no, format!("duplicate entry ({i}, {j})")));
            }
            q[(i, j)] = v;
        }
        if n.is_none() {
            return Err(Error::parse(origin, 0, "missing variable count"));
        }
        Self::new(q)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_text(&text, path)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Error unless `m` is square and symmetric within [`SYMMETRY_TOL`] relative
/// to its largest entry.
pub(crate) fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::contract("matrix must be square"));
    }
    let scale = m.iter().fold(1.0_f64, |s, v| s.max(v.abs()));
    for i in 0..n {
        for j in i + 1..n {
            if !m[(i, j)].is_finite() || !m[(j, i)].is_finite() {
                return Err(Error::contract("matrix entries must be finite"));
            }
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::contract(format!(
                    "matrix is not symmetric at ({i}, {j}): {} vs {}",
                    m[(i, j)],
                    m[(j, i)]
                )));
            }
        }
    }
    Ok(())
}

/// Spin form `sum_{i<j} J_ij s_i s_j + sum_i h_i s_i + c` over `s in {-1,+1}^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingInstance {
    pub j: DMatrix<f64>,
    pub h: Vec<f64>,
    pub c: f64,
}

impl IsingInstance {
    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn energy(&self, s: &[i8]) -> Result<f64> {
        let n = self.n();
        if s.len() != n || s.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::contract("spin vector must have length n and entries in {-1, +1}"));
        }
        let mut e = self.c;
        for a in 0..n {
            let sa = f64::from(s[a]);
            e += self.h[a] * sa;
            for b in a + 1..n {
                e += self.j[(a, b)] * sa * f64::from(s[b]);
            }
        }
        Ok(e)
    }
}

/// Exact low-end statistics of the energy landscape of a QUBO.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSummary {
    pub min_energy: f64,
    /// Lowest energy strictly above the ground level.
    pub second_energy: Option<f64>,
    pub gap: Option<f64>,
    pub ground_degeneracy: u64,
    /// Ground state with the smallest packed index.
    pub ground_state: Vec<u8>,
}

/// Unpack the low `n` bits of `state` into a 0/1 vector.
pub fn unpack(state: u64, n: usize) -> Vec<u8> {
    (0..n).map(|i| (state >> i & 1) as u8).collect()
}

pub fn pack(z: &[u8]) -> u64 {
    z.iter().enumerate().fold(0, |acc, (i, &b)| acc | (u64::from(b & 1) << i))
}
