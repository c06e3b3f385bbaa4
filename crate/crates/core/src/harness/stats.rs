//! Correlation coefficients and least-squares polynomial fits.

use crate::error::{Error, Result};

fn check_pair(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::contract(format!("length mismatch: {} vs {}", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(Error::contract("need at least two observations"));
    }
    Ok(())
}

pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_pair(xs, ys)?;
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant input".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks with ties replaced by their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation (Pearson correlation of average ranks).
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_pair(xs, ys)?;
    pearson(&average_ranks(xs), &average_ranks(ys))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    /// Ascending powers: `y = coeffs[0] + coeffs[1] x + ...`.
    pub coeffs: Vec<f64>,
    /// `1 - SS_res / SS_tot`, defined as 0 when `ys` is constant.
    pub r2: f64,
}

impl PolyFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

/// Ordinary least squares of degree 1 or 2 via the normal equations on
/// mean-centered `x`.
pub fn fit_poly(xs: &[f64], ys: &[f64], degree: usize) -> Result<PolyFit> {
    if !(1..=2).contains(&degree) {
        return Err(Error::contract(format!("degree must be 1 or 2, got {degree}")));
    }
    if xs.len() != ys.len() || xs.len() < degree + 1 {
        return Err(Error::contract("need equal lengths and at least degree + 1 points"));
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let k = degree + 1;

    // Power sums of t = x - mean up to 2 * degree.
    let mut pow_sums = vec![0.0; 2 * degree + 1];
    let mut rhs = vec![0.0; k];
    for (x, y) in xs.iter().zip(ys) {
        let t = x - mean;
        let mut p = 1.0;
        for (e, s) in pow_sums.iter_mut().enumerate() {
            *s += p;
            if e < k {
                rhs[e] += p * y;
            }
            p *= t;
        }
    }
    let mut a: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| pow_sums[i + j]).collect()).collect();
    let centered = solve(&mut a, &mut rhs)?;

    // Expand sum_e b_e (x - mean)^e into powers of x.
    let mut coeffs = vec![0.0; k];
    for (e, b) in centered.iter().enumerate() {
        for (p, c) in coeffs.iter_mut().enumerate().take(e + 1) {
            *c += b * binomial(e, p) * (-mean).powi((e - p) as i32);
        }
    }

    let my = ys.iter().sum::<f64>() / n;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let t = x - mean;
        let pred = centered.iter().rev().fold(0.0, |acc, c| acc * t + c);
        ss_res += (y - pred).powi(2);
        ss_tot += (y - my).powi(2);
    }
    let r2 = if ss_tot == 0.0 { 0.0 } else { 1.0 - ss_res / ss_tot };
    Ok(PolyFit { coeffs, r2 })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Gaussian elimination with partial pivoting.
fn solve(a: &mut [Vec<f64>], b: &mut [f64]) -> Result<Vec<f64>> {
    let k = b.len();
    let scale = a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(Error::Singular);
    }
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if a[piv][col].abs() <= 1e-12 * scale {
            return Err(Error::Singular);
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..k {
            let f = a[row][col] / a[col][col];
            for c in col..k {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; k];
    for row in (0..k).rev() {
        let s: f64 = (row + 1..k).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn spearman_monotone() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[30.0, 20.0, 10.0]).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn spearman_with_ties() {
        // Ranks: x -> (1, 2.5, 2.5, 4), y -> (1, 3, 2, 4).
        let rx = [1.0, 2.5, 2.5, 4.0];
        let ry = [1.0, 3.0, 2.0, 4.0];
        let m = 2.5;
        let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - m) * (b - m)).sum();
        let sxx: f64 = rx.iter().map(|a| (a - m) * (a - m)).sum();
        let syy: f64 = ry.iter().map(|b| (b - m) * (b - m)).sum();
        let expected = sxy / (sxx * syy).sqrt();
        let got = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((expected - 0.9486832980505138).abs() < 1e-15);
    }

    #[test]
    fn correlation_errors() {
        assert!(matches!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), Err(Error::UndefinedCorrelation(_))));
        assert!(pearson(&[1.0], &[1.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0]).is_err());
    }

    #[test]
    fn exact_quadratic_fit() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x * x + 1.0).collect();
        let fit = fit_poly(&xs, &ys, 2).unwrap();
        for (c, e) in fit.coeffs.iter().zip([1.0, 0.0, 2.0]) {
            assert!((c - e).abs() < 1e-12, "{:?}", fit.coeffs);
        }
        assert!((fit.r2 - 1.0).abs() < 1e-12);
        assert!((fit.eval(1.5) - 5.5).abs() < 1e-12);
    }

    #[test]
    fn constant_response() {
        let fit = fit_poly(&[0.0, 1.0, 2.0], &[3.0, 3.0, 3.0], 1).unwrap();
        assert!(fit.coeffs[1].abs() < 1e-15);
        assert!((fit.coeffs[0] - 3.0).abs() < 1e-15);
        assert_eq!(fit.r2, 0.0);
    }

    #[test]
    fn singular_design() {
        assert!(matches!(fit_poly(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0], 1), Err(Error::Singular)));
        assert!(fit_poly(&[1.0, 2.0], &[1.0, 2.0], 2).is_err());
        assert!(fit_poly(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 3).is_err());
    }

    #[test]
    fn noisy_quadratic_prefers_quadratic_model() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let xs: Vec<f64> = (0..200).map(|_| rng.gen_range(0.0..1.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x - x + 0.05 * rng.gen_range(-1.0..1.0)).collect();
        let lin = fit_poly(&xs, &ys, 1).unwrap();
        let quad = fit_poly(&xs, &ys, 2).unwrap();
        assert!(quad.r2 > lin.r2);
        assert!((quad.coeffs[2] - 3.0).abs() < 0.1);
    }
}
