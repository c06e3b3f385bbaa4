use approx::assert_relative_eq;
use qgl_core::datagen::{gen_circles, gen_cones, CirclesParams, ConesParams};
use qgl_core::embeddings::{clustering_qubo, svm_qubo, SvmHyperparams};
use qgl_core::harness::{derive_seed, run_sweep, Generator, Param, Problem, SweepConfig, SweepRange};
use qgl_core::kernels::{gram_circles, gram_linear};
use qgl_core::qubo::unpack;
use qgl_core::spectrum::{enumerate_spectrum, spectral_gap};

/// Soft-margin SVM dual objective in binary form, straight from the data:
/// `-sum z_i + C/2 sum z_i z_j y_i y_j k(x_i, x_j) + C lambda (sum y_i z_i)^2`.
fn svm_objective(points: &[[f64; 2]], y: &[i8], z: &[u8], c: f64, lam: f64, a: f64) -> f64 {
    let phi = |p: [f64; 2]| [p[0], p[1], a * (p[0] * p[0] + p[1] * p[1])];
    let mut w = [0.0; 3];
    let mut ysum = 0.0;
    for i in 0..z.len() {
        if z[i] == 1 {
            let f = phi(points[i]);
            for k in 0..3 {
                w[k] += f64::from(y[i]) * f[k];
            }
            ysum += f64::from(y[i]);
        }
    }
    let ones = z.iter().filter(|&&b| b == 1).count() as f64;
    -ones + 0.5 * c * w.iter().map(|v| v * v).sum::<f64>() + c * lam * ysum * ysum
}

#[test]
fn svm_qubo_energy_equals_dual_objective() {
    let data = gen_circles(&CirclesParams { n: 10, r: 0.4, sigma: 0.1, a: 1.5, seed: 3 }).unwrap();
    let (c, lam) = (0.3, 2.0);
    let q = svm_qubo(&gram_circles(&data, 1.5), &data.labels, &SvmHyperparams { c, lam }).unwrap();
    for s in 0..1u64 << 10 {
        let z = unpack(s, 10);
        let want = svm_objective(&data.points, &data.labels, &z, c, lam, 1.5);
        assert_relative_eq!(q.energy(&z).unwrap(), want, epsilon = 1e-10, max_relative = 1e-12);
    }
}

#[test]
fn clustering_qubo_energy_equals_split_imbalance() {
    // With a centered linear kernel the energy of z is -|sum_i s_i x_i|^2 / 4
    // over centered points, s = 2z - 1.
    let data = gen_cones(&ConesParams { n: 9, rho: 0.3, w: 0.4, d: 0.7, seed: 12 }).unwrap();
    let q = clustering_qubo(&gram_linear(&data).center()).unwrap();
    let n = data.len();
    let mean = data.points.iter().fold([0.0; 2], |m, p| [m[0] + p[0] / n as f64, m[1] + p[1] / n as f64]);
    for s in 0..1u64 << n {
        let z = unpack(s, n);
        let mut v = [0.0; 2];
        for i in 0..n {
            let sign = if z[i] == 1 { 1.0 } else { -1.0 };
            v[0] += sign * (data.points[i][0] - mean[0]);
            v[1] += sign * (data.points[i][1] - mean[1]);
        }
        let want = -0.25 * (v[0] * v[0] + v[1] * v[1]);
        assert_relative_eq!(q.energy(&z).unwrap(), want, epsilon = 1e-10);
    }
}

#[test]
fn sweep_records_can_be_reproduced_from_their_seeds() {
    let cfg = SweepConfig::new(Problem::Svm, Generator::Cones, 8, SweepRange::new(Param::D, 0.0, 1.0))
        .fix(Param::W, 0.2)
        .fix(Param::Rho, 0.5)
        .fix(Param::C, 0.1)
        .fix(Param::Lambda, 1.0)
        .samples(12)
        .seed(99);
    for rec in run_sweep(&cfg).unwrap() {
        assert_eq!(rec.seed, derive_seed(99, rec.sample_index as u64));
        let data =
            gen_cones(&ConesParams { n: 8, rho: 0.5, w: 0.2, d: rec.swept_value, seed: rec.seed }).unwrap();
        let q = svm_qubo(&gram_linear(&data), &data.labels, &SvmHyperparams { c: 0.1, lam: 1.0 }).unwrap();
        let s = enumerate_spectrum(&q.normalize_inf().unwrap()).unwrap();
        assert_eq!(rec.sg, s.gap);
        assert_eq!(rec.ground_degeneracy, s.ground_degeneracy);
    }
}

#[test]
fn unnormalized_gap_scales_with_the_kernel() {
    let data = gen_cones(&ConesParams { n: 10, rho: 0.5, w: 0.2, d: 0.4, seed: 5 }).unwrap();
    let km = gram_linear(&data).center();
    let g = spectral_gap(&clustering_qubo(&km).unwrap()).unwrap().unwrap();
    for c in [0.25, 3.0, 40.0] {
        let gc = spectral_gap(&clustering_qubo(&km.scaled(c)).unwrap()).unwrap().unwrap();
        assert_relative_eq!(gc, c * g, max_relative = 1e-9);
    }
}

#[test]
fn normalization_divides_gap_by_the_largest_entry() {
    let base = SweepConfig::new(Problem::Clustering, Generator::Circles, 8, SweepRange::new(Param::R, 0.0, 0.9))
        .fix(Param::Sigma, 0.05)
        .samples(10)
        .seed(4);
    let norm = run_sweep(&base).unwrap();
    let raw = run_sweep(&base.clone().normalize(false)).unwrap();
    for (a, b) in norm.iter().zip(&raw) {
        let data = gen_circles(&CirclesParams { n: 8, r: b.swept_value, sigma: 0.05, a: 1.0, seed: b.seed }).unwrap();
        let scale = clustering_qubo(&gram_circles(&data, 1.0).center()).unwrap().max_abs();
        assert_relative_eq!(a.sg.unwrap() * scale, b.sg.unwrap(), max_relative = 1e-9);
    }
}
