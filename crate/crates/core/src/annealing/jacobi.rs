//! Cyclic Jacobi eigenvalue iteration for dense real symmetric matrices.
//!
//! Pairs are visited in round-robin (tournament) order: each sweep is `d - 1`
//! rounds of `d / 2` disjoint rotations, so every off-diagonal pair is
//! annihilated once per sweep. Disjoint rotations commute, which lets a round
//! apply all row rotations and then all column rotations as contiguous passes
//! over each row instead of strided column updates.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::qubo::check_symmetric;

pub const MAX_SWEEPS: usize = 100;
/// Converged once the off-diagonal Frobenius norm drops below this times `||M||_F`.
pub const REL_TOL: f64 = 1e-12;

/// All eigenvalues of a symmetric matrix in ascending order.
pub fn eigenvalues_symmetric(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(m)?;
    let d = m.nrows();
    let mut a: Vec<f64> = (0..d * d).map(|k| m[(k / d, k % d)]).collect();
    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let target = REL_TOL * norm;

    // Entries below `skip` cannot keep the off-diagonal norm above `target`
    // (d(d-1) of them sum to less than target^2), so they are not rotated.
    let skip = target / d.max(1) as f64;
    let schedule = round_robin(d);
    let mut rotations = Vec::with_capacity(d / 2);
    let mut converged = off_norm(&a, d) <= target;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        for round in &schedule {
            rotations.clear();
            rotations.extend(round.iter().filter_map(|&(p, q)| Rotation::annihilating(&a, d, p, q, skip)));
            apply_round(&mut a, d, &rotations);
        }
        symmetrize(&mut a, d);
        sweeps += 1;
        converged = off_norm(&a, d) <= target;
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps, residual: off_norm(&a, d) });
    }
    let mut ev: Vec<f64> = (0..d).map(|i| a[i * d + i]).collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

fn off_norm(a: &[f64], d: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..d {
        for j in i + 1..d {
            s += a[i * d + j] * a[i * d + j];
        }
    }
    (2.0 * s).sqrt()
}

/// Rounds of disjoint pairs `(p, q)`, `p < q`, covering every pair once
/// (circle method; an odd `d` gets a bye each round).
fn round_robin(d: usize) -> Vec<Vec<(usize, usize)>> {
    let m = d + d % 2;
    let mut players: Vec<usize> = (0..m).collect();
    let mut rounds = Vec::with_capacity(m.saturating_sub(1));
    for _ in 1..m {
        let round = (0..m / 2)
            .map(|i| (players[i], players[m - 1 - i]))
            .filter(|&(x, y)| x < d && y < d)
            .map(|(x, y)| (x.min(y), x.max(y)))
            .collect();
        rounds.push(round);
        players[1..].rotate_right(1);
    }
    rounds
}

struct Rotation {
    p: usize,
    q: usize,
    c: f64,
    s: f64,
    /// New diagonal entries `(a_pp, a_qq)`.
    diag: (f64, f64),
}

impl Rotation {
    /// Rotation zeroing `a[p][q]`, or `None` if it is already negligible.
    fn annihilating(a: &[f64], d: usize, p: usize, q: usize, skip: f64) -> Option<Self> {
        let apq = a[p * d + q];
        if apq.abs() <= skip {
            return None;
        }
        let app = a[p * d + p];
        let aqq = a[q * d + q];
        let theta = (aqq - app) / (2.0 * apq);
        let t = if theta.abs() > 1e150 {
            0.5 / theta
        } else {
            theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
        };
        let c = 1.0 / (t * t + 1.0).sqrt();
        Some(Self { p, q, c, s: t * c, diag: (app - t * apq, aqq + t * apq) })
    }
}

/// `A <- J^T A J` for a set of rotations acting on disjoint index pairs.
fn apply_round(a: &mut [f64], d: usize, rotations: &[Rotation]) {
    for r in rotations {
        let (head, tail) = a.split_at_mut(r.q * d);
        let row_p = &mut head[r.p * d..(r.p + 1) * d];
        for (x, y) in row_p.iter_mut().zip(tail[..d].iter_mut()) {
            let (xp, xq) = (*x, *y);
            *x = r.c * xp - r.s * xq;
            *y = r.s * xp + r.c * xq;
        }
    }
    for row in a.chunks_exact_mut(d) {
        for r in rotations {
            let (xp, xq) = (row[r.p], row[r.q]);
            row[r.p] = r.c * xp - r.s * xq;
            row[r.q] = r.s * xp + r.c * xq;
        }
    }
    for r in rotations {
        a[r.p * d + r.p] = r.diag.0;
        a[r.q * d + r.q] = r.diag.1;
        a[r.p * d + r.q] = 0.0;
        a[r.q * d + r.p] = 0.0;
    }
}

/// Remove round-off asymmetry introduced by the separate row and column passes.
fn symmetrize(a: &mut [f64], d: usize) {
    for i in 0..d {
        for j in i + 1..d {
            let v = 0.5 * (a[i * d + j] + a[j * d + i]);
            a[i * d + j] = v;
            a[j * d + i] = v;
        }
    }
}
