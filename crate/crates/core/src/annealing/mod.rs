//! Dense analysis of the annealing Hamiltonian `H(s) = f(s) H_I + g(s) H_P`
//! for small `n`, and numerical checks of Weyl's eigenvalue inequality and
//! the gap bound it implies.
//!
//! `H_I` is the transverse field `-sum_i sigma_x^(i)`; `H_P` is diagonal with
//! the QUBO energies. Both are real symmetric. Gaps here use eigenvalues
//! with multiplicity, so a degenerate ground level has gap 0.

mod jacobi;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qubo::{check_symmetric, QuboInstance};

pub use jacobi::{eigenvalues_symmetric, MAX_SWEEPS};

/// Largest qubit count accepted for dense `2^n x 2^n` matrices.
pub const MAX_DENSE_QUBITS: usize = 12;
/// Largest qubit count accepted by [`gap_bound_check`].
pub const MAX_BOUND_CHECK_QUBITS: usize = 8;
pub const DEFAULT_GRID_POINTS: usize = 201;
/// Width of the final golden-section bracket in `s`.
pub const S_RESOLUTION: f64 = 1e-6;
pub const BOUND_TOL: f64 = 1e-8;
pub const WEYL_TOL: f64 = 1e-8;
/// Spectral gap of the transverse field for any `n`.
pub const DRIVER_GAP: f64 = 2.0;

const SCHEDULE_CHECK_POINTS: usize = 101;

type ScheduleFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A pair of schedule functions `f` (driver weight) and `g` (problem weight).
#[derive(Clone)]
pub struct AnnealSchedule {
    f: ScheduleFn,
    g: ScheduleFn,
    descriptor: String,
}

impl fmt::Debug for AnnealSchedule {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("AnnealSchedule").field("descriptor", &self.descriptor).finish()
    }
}

impl AnnealSchedule {
    /// `f(s) = 1 - s`, `g(s) = s`.
    pub fn linear() -> Self {
        Self { f: Arc::new(|s| 1.0 - s), g: Arc::new(|s| s), descriptor: "linear".into() }
    }

    /// Validated custom schedule: endpoints `f(0) = g(1) = 1`,
    /// `f(1) = g(0) = 0`, values in `[0, 1]`, `f` nonincreasing and `g`
    /// nondecreasing on a uniform grid.
    pub fn custom(
        descriptor: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let sched = Self { f: Arc::new(f), g: Arc::new(g), descriptor: descriptor.into() };
        sched.validate()?;
        Ok(sched)
    }

    fn validate(&self) -> Result<()> {
        let eps = 1e-12;
        let (f0, f1, g0, g1) = (self.f(0.0), self.f(1.0), self.g(0.0), self.g(1.0));
        if (f0 - 1.0).abs() > eps || f1.abs() > eps || g0.abs() > eps || (g1 - 1.0).abs() > eps {
            return Err(Error::contract(format!(
                "schedule {}: need f(0) = g(1) = 1 and f(1) = g(0) = 0",
                self.descriptor
            )));
        }
        let mut prev = (f0, g0);
        for k in 1..SCHEDULE_CHECK_POINTS {
            let s = k as f64 / (SCHEDULE_CHECK_POINTS - 1) as f64;
            let (f, g) = (self.f(s), self.g(s));
            let in_range = |v: f64| (-eps..=1.0 + eps).contains(&v);
            if !in_range(f) || !in_range(g) || f > prev.0 + eps || g < prev.1 - eps {
                return Err(Error::contract(format!(
                    "schedule {}: f must decrease and g increase within [0, 1] (violated at s = {s})",
                    self.descriptor
                )));
            }
            prev = (f, g);
        }
        Ok(())
    }

    pub fn f(&self, s: f64) -> f64 {
        (self.f)(s)
    }

    pub fn g(&self, s: f64) -> f64 {
        (self.g)(s)
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    /// Whether `f = 1 - g` holds on the check grid.
    pub fn is_complementary(&self) -> bool {
        (0..SCHEDULE_CHECK_POINTS).all(|k| {
            let s = k as f64 / (SCHEDULE_CHECK_POINTS - 1) as f64;
            (self.f(s) + self.g(s) - 1.0).abs() <= 1e-12
        })
    }
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self::linear()
    }
}

/// Real symmetric `2^n x 2^n` Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHamiltonian {
    qubits: usize,
    m: DMatrix<f64>,
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DENSE_QUBITS {
        return Err(Error::contract(format!(
            "dense Hamiltonians support 1..={MAX_DENSE_QUBITS} qubits, got {n}"
        )));
    }
    Ok(())
}

impl DenseHamiltonian {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let dim = m.nrows();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::contract(format!("Hamiltonian dimension must be 2^n with n >= 1, got {dim}")));
        }
        let qubits = dim.trailing_zeros() as usize;
        check_qubits(qubits)?;
        check_symmetric(&m)?;
        Ok(Self { qubits, m })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigenvalues_symmetric(&self.m)
    }
}

/// Diagonal matrix whose entry at index `b` is the QUBO energy of state `b`.
pub fn problem_hamiltonian(q: &QuboInstance) -> Result<DenseHamiltonian> {
    let n = q.n();
    check_qubits(n)?;
    let energies: Vec<f64> = (0..1u64 << n).map(|b| q.energy_packed(b)).collect();
    Ok(DenseHamiltonian { qubits: n, m: DMatrix::from_diagonal(&energies.into()) })
}

/// `-sum_i sigma_x^(i)`: entry -1 between states at Hamming distance one.
pub fn transverse_field(n: usize) -> Result<DenseHamiltonian> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for u in 0..dim {
        for i in 0..n {
            m[(u, u ^ (1 << i))] = -1.0;
        }
    }
    Ok(DenseHamiltonian { qubits: n, m })
}

/// Precomputed `H_I` and `H_P` for repeated evaluation along a schedule.
struct Interpolation {
    driver: DMatrix<f64>,
    problem_diag: Vec<f64>,
}

impl Interpolation {
    fn new(q: &QuboInstance) -> Result<Self> {
        let hp = problem_hamiltonian(q)?;
        let driver = transverse_field(q.n())?.m;
        Ok(Self { driver, problem_diag: hp.m.diagonal().iter().cloned().collect() })
    }

    fn gap(&self, sched: &AnnealSchedule, s: f64) -> Result<f64> {
        let (f, g) = (sched.f(s), sched.g(s));
        let mut h = &self.driver * f;
        for (i, e) in self.problem_diag.iter().enumerate() {
            h[(i, i)] += g * e;
        }
        let ev = eigenvalues_symmetric(&h)?;
        Ok(ev[1] - ev[0])
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::contract(format!("s must lie in [0, 1], got {s}")));
    }
    Ok(())
}

/// `lambda_2(s) - lambda_1(s)` of `H(s)`, eigenvalues counted with multiplicity.
pub fn gap_at(q: &QuboInstance, sched: &AnnealSchedule, s: f64) -> Result<f64> {
    check_s(s)?;
    Interpolation::new(q)?.gap(sched, s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinGap {
    pub s_star: f64,
    pub gap: f64,
}

/// Minimum of [`gap_at`] over `s in [0, 1]`: a uniform grid of `grid_points`
/// values, then golden-section refinement inside the grid cell pair around
/// the best grid point.
pub fn min_gap_schedule(q: &QuboInstance, sched: &AnnealSchedule, grid_points: usize) -> Result<MinGap> {
    if grid_points < 2 {
        return Err(Error::contract("grid needs at least two points"));
    }
    let interp = Interpolation::new(q)?;
    let step = 1.0 / (grid_points - 1) as f64;
    let grid: Vec<f64> = (0..grid_points)
        .into_par_iter()
        .map(|k| interp.gap(sched, (k as f64 * step).min(1.0)))
        .collect::<Result<_>>()?;

    let mut best_k = 0;
    for (k, &g) in grid.iter().enumerate() {
        if g < grid[best_k] {
            best_k = k;
        }
    }
    let mut best = MinGap { s_star: (best_k as f64 * step).min(1.0), gap: grid[best_k] };

    let mut lo = (best_k as f64 - 1.0).max(0.0) * step;
    let mut hi = ((best_k + 1) as f64 * step).min(1.0);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut g1 = interp.gap(sched, x1)?;
    let mut g2 = interp.gap(sched, x2)?;
    while hi - lo > S_RESOLUTION {
        if g1 <= g2 {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - inv_phi * (hi - lo);
            g1 = interp.gap(sched, x1)?;
        } else {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + inv_phi * (hi - lo);
            g2 = interp.gap(sched, x2)?;
        }
    }
    for (s, g) in [(x1, g1), (x2, g2)] {
        if g < best.gap {
            best = MinGap { s_star: s, gap: g };
        }
    }
    Ok(best)
}

/// Outcome of checking `nu_i + rho_1 <= mu_i <= nu_i + rho_m` for `M = N + R`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylReport {
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub rho: Vec<f64>,
    /// Largest amount by which any inequality is exceeded (0 when all hold).
    pub max_violation: f64,
    /// Indices violating beyond [`WEYL_TOL`].
    pub violations: usize,
    pub gap_sum: f64,
    pub gap_first: f64,
    /// `rho_m - rho_1`.
    pub spectral_range: f64,
    /// `gap(M) <= gap(N) + ER(R)` within [`WEYL_TOL`].
    pub gap_bound_holds: bool,
}

impl WeylReport {
    pub fn holds(&self) -> bool {
        self.violations == 0 && self.gap_bound_holds
    }
}

pub fn weyl_check(nu: &DMatrix<f64>, rho: &DMatrix<f64>) -> Result<WeylReport> {
    if nu.shape() != rho.shape() {
        return Err(Error::contract(format!("dimension mismatch: {:?} vs {:?}", nu.shape(), rho.shape())));
    }
    if nu.nrows() < 2 {
        return Err(Error::contract("Weyl check needs dimension >= 2"));
    }
    let m = nu + rho;
    let mu_ev = eigenvalues_symmetric(&m)?;
    let nu_ev = eigenvalues_symmetric(nu)?;
    let rho_ev = eigenvalues_symmetric(rho)?;
    let (r_lo, r_hi) = (rho_ev[0], rho_ev[rho_ev.len() - 1]);

    let mut max_violation = 0.0_f64;
    let mut violations = 0;
    for (mu_i, nu_i) in mu_ev.iter().zip(&nu_ev) {
        let excess = (nu_i + r_lo - mu_i).max(mu_i - nu_i - r_hi).max(0.0);
        max_violation = max_violation.max(excess);
        if excess > WEYL_TOL {
            violations += 1;
        }
    }
    let gap_sum = mu_ev[1] - mu_ev[0];
    let gap_first = nu_ev[1] - nu_ev[0];
    let spectral_range = r_hi - r_lo;
    Ok(WeylReport {
        gap_bound_holds: gap_sum <= gap_first + spectral_range + WEYL_TOL,
        mu: mu_ev,
        nu: nu_ev,
        rho: rho_ev,
        max_violation,
        violations,
        gap_sum,
        gap_first,
        spectral_range,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapBoundReport {
    pub s_star: f64,
    pub min_gap: f64,
    /// Two-lowest difference of the diagonal `H_P`, with multiplicity.
    pub problem_gap: f64,
    pub driver_gap: f64,
    pub bound: f64,
    pub bound_ok: bool,
}

/// Raw (with multiplicity) gap of the problem Hamiltonian.
pub fn problem_gap_raw(q: &QuboInstance) -> f64 {
    let (mut lo, mut next) = (f64::INFINITY, f64::INFINITY);
    for b in 0..1u64 << q.n() {
        let e = q.energy_packed(b);
        if e < lo {
            next = lo;
            lo = e;
        } else if e < next {
            next = e;
        }
    }
    next - lo
}

/// Check `min_s gap(H(s)) <= min(gap(H_P), gap(H_I))` for `n <= 8`.
pub fn gap_bound_check(q: &QuboInstance, sched: &AnnealSchedule) -> Result<GapBoundReport> {
    if q.n() > MAX_BOUND_CHECK_QUBITS {
        return Err(Error::contract(format!(
            "gap bound check supports at most {MAX_BOUND_CHECK_QUBITS} variables, got {}",
            q.n()
        )));
    }
    gap_bound_report(q, sched, DEFAULT_GRID_POINTS)
}

/// Same check as [`gap_bound_check`] with an explicit grid, limited only by
/// the dense size guard.
pub fn gap_bound_report(q: &QuboInstance, sched: &AnnealSchedule, grid_points: usize) -> Result<GapBoundReport> {
    if !sched.is_complementary() {
        return Err(Error::contract(format!(
            "schedule {} does not satisfy f = 1 - g",
            sched.descriptor()
        )));
    }
    let mg = min_gap_schedule(q, sched, grid_points)?;
    let problem_gap = problem_gap_raw(q);
    let bound = problem_gap.min(DRIVER_GAP);
    Ok(GapBoundReport {
        s_star: mg.s_star,
        min_gap: mg.gap,
        problem_gap,
        driver_gap: DRIVER_GAP,
        bound,
        bound_ok: mg.gap <= bound + BOUND_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(v: f64) -> QuboInstance {
        QuboInstance::from_rows(&[vec![v]]).unwrap()
    }

    #[test]
    fn problem_hamiltonian_diagonals() {
        let h = problem_hamiltonian(&single(1.0)).unwrap();
        assert_eq!(h.matrix(), &DMatrix::from_diagonal(&vec![0.0, 1.0].into()));
        let q = QuboInstance::from_rows(&[vec![1.0, 2.0], vec![0.0, 3.0]]).unwrap();
        let h = problem_hamiltonian(&q).unwrap();
        assert_eq!(h.matrix().diagonal().as_slice(), &[0.0, 1.0, 3.0, 6.0]);
        assert!(problem_hamiltonian(&QuboInstance::zeros(13).unwrap()).is_err());
    }

    #[test]
    fn transverse_field_spectra() {
        let h1 = transverse_field(1).unwrap();
        assert_eq!(h1.matrix(), &DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]));
        let ev = transverse_field(2).unwrap().eigenvalues().unwrap();
        for (a, b) in ev.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
        let ev = transverse_field(3).unwrap().eigenvalues().unwrap();
        assert!((ev[0] + 3.0).abs() < 1e-12 && (ev[1] - ev[0] - 2.0).abs() < 1e-12);
        assert!(transverse_field(0).is_err() && transverse_field(13).is_err());
    }

    #[test]
    fn single_qubit_gap_values() {
        let q = single(1.0);
        let lin = AnnealSchedule::linear();
        assert!((gap_at(&q, &lin, 0.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((gap_at(&q, &lin, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((gap_at(&q, &lin, 0.8).unwrap() - 0.8f64.sqrt()).abs() < 1e-12);
        assert!(gap_at(&q, &lin, 1.5).is_err());
    }

    #[test]
    fn single_qubit_min_gap() {
        let mg = min_gap_schedule(&single(1.0), &AnnealSchedule::linear(), 201).unwrap();
        assert!((mg.s_star - 0.8).abs() < 1e-5);
        assert!((mg.gap - 0.8f64.sqrt()).abs() < 1e-6);
        let mg = min_gap_schedule(&QuboInstance::zeros(1).unwrap(), &AnnealSchedule::linear(), 201).unwrap();
        assert!(mg.gap.abs() < 1e-12 && (mg.s_star - 1.0).abs() < 1e-5);
        assert!(min_gap_schedule(&single(1.0), &AnnealSchedule::linear(), 1).is_err());
    }

    #[test]
    fn schedule_validation() {
        assert!(AnnealSchedule::custom("quad", |s| (1.0 - s) * (1.0 - s), |s| s * s).is_ok());
        assert!(AnnealSchedule::custom("bad-end", |s| 1.0 - s, |s| 0.5 * s).is_err());
        assert!(AnnealSchedule::custom("bumpy", |s| 1.0 - s, |s| s + 0.5 * (20.0 * s).sin() * s * (1.0 - s)).is_err());
    }

    #[test]
    fn bound_check_refuses_noncomplementary_schedule() {
        let quad = AnnealSchedule::custom("quad", |s| (1.0 - s) * (1.0 - s), |s| s * s).unwrap();
        assert!(gap_bound_check(&single(1.0), &quad).is_err());
        assert!(gap_bound_check(&QuboInstance::zeros(9).unwrap(), &AnnealSchedule::linear()).is_err());
    }

    #[test]
    fn bound_check_single_qubit() {
        let r = gap_bound_check(&single(1.0), &AnnealSchedule::linear()).unwrap();
        assert!(r.bound_ok);
        assert_eq!(r.bound, 1.0);
        assert!((r.min_gap - 0.894427).abs() < 1e-5);
    }

    #[test]
    fn bound_check_degenerate_clustering() {
        let q = QuboInstance::from_rows(&[vec![-1.0, 2.0], vec![0.0, -1.0]]).unwrap();
        let r = gap_bound_check(&q, &AnnealSchedule::linear()).unwrap();
        assert_eq!(r.problem_gap, 0.0);
        assert!(r.min_gap.abs() < 1e-8);
        assert!(r.bound_ok);
    }

    #[test]
    fn weyl_examples() {
        let n = DMatrix::from_diagonal(&vec![0.0, 1.0].into());
        let r = weyl_check(&n, &DMatrix::zeros(2, 2)).unwrap();
        assert!(r.holds());
        assert_eq!(r.spectral_range, 0.0);
        assert_eq!(r.max_violation, 0.0);

        let rho = DMatrix::from_diagonal(&vec![-1.0, 1.0].into());
        let r = weyl_check(&DMatrix::zeros(2, 2), &rho).unwrap();
        assert_eq!(r.mu, r.rho);
        // Lower bound tight for i = 1, upper for i = 2.
        assert_eq!(r.nu[0] + r.rho[0], r.mu[0]);
        assert_eq!(r.mu[1], r.nu[1] + r.rho[1]);
        assert!(r.holds());
        assert!(weyl_check(&DMatrix::zeros(2, 2), &DMatrix::zeros(3, 3)).is_err());
    }
}
