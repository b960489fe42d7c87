//! Small statistical helpers: compensated summation, quantiles,
//! Kolmogorov–Smirnov tests, sample covariances and 3×3 matrix norms.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.carry += (self.sum - t) + value;
        } else {
            self.carry += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Elementwise compensated accumulator for 3-vectors.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedVec3([CompensatedSum; 3]);

impl CompensatedVec3 {
    pub fn add(&mut self, v: &Vector3<f64>) {
        for (acc, x) in self.0.iter_mut().zip(v.iter()) {
            acc.add(*x);
        }
    }

    pub fn value(&self) -> Vector3<f64> {
        Vector3::from_fn(|i, _| self.0[i].value())
    }
}

/// Elementwise compensated accumulator for 3×3 matrices.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedMat3([[CompensatedSum; 3]; 3]);

impl CompensatedMat3 {
    pub fn add(&mut self, m: &Matrix3<f64>) {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j].add(m[(i, j)]);
            }
        }
    }

    pub fn value(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.0[i][j].value())
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample standard deviation; zero for fewer than two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Linear-interpolation quantile (type 7) of unsorted data.
pub fn quantile(xs: &[f64], p: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

fn quantile_sorted(v: &[f64], p: f64) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    let h = (v.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

pub fn iqr(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.75) - quantile_sorted(&v, 0.25)
}

/// Sample covariance (denominator `m - 1`) of 3-vectors; `None` below two rows.
pub fn sample_covariance(rows: &[Vector3<f64>]) -> Option<Matrix3<f64>> {
    if rows.len() < 2 {
        return None;
    }
    let m = rows.len() as f64;
    let centre = rows.iter().sum::<Vector3<f64>>() / m;
    let mut acc = Matrix3::zeros();
    for r in rows {
        let d = r - centre;
        acc += d * d.transpose();
    }
    Some(symmetrize(&(acc / (m - 1.0))))
}

/// Sample correlation of two equally long series.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

pub fn symmetrize(m: &Matrix3<f64>) -> Matrix3<f64> {
    (m + m.transpose()) * 0.5
}

/// `‖a - b‖_F / ‖b‖_F`.
pub fn frobenius_relative(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

pub fn to_rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [
        [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
        [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
        [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
    ]
}

pub fn from_rows(rows: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| rows[i][j])
}

/// Result of a one-sample Kolmogorov–Smirnov test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample KS test of `xs` against the continuous CDF `cdf`.
pub fn ks_test(xs: &[f64], cdf: impl Fn(f64) -> f64) -> KsResult {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let statistic = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let sqrt_n = n.sqrt();
    let p_value = kolmogorov_sf((sqrt_n + 0.12 + 0.11 / sqrt_n) * statistic);
    KsResult { statistic, p_value }
}

pub fn ks_test_normal(xs: &[f64]) -> KsResult {
    let normal = Normal::standard();
    ks_test(xs, |x| normal.cdf(x))
}

pub fn ks_test_exponential(xs: &[f64]) -> KsResult {
    ks_test(xs, |x| if x <= 0.0 { 0.0 } else { -(-x).exp_m1() })
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.18 {
        // Small-x form of the CDF converges faster.
        let pi2 = std::f64::consts::PI.powi(2);
        let c = (2.0 * std::f64::consts::PI).sqrt() / x;
        let cdf: f64 = (1..=20)
            .map(|k| {
                let j = (2 * k - 1) as f64;
                (-j * j * pi2 / (8.0 * x * x)).exp()
            })
            .sum::<f64>()
            * c;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let sf: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            let sign = if k as i64 % 2 == 1 { 1.0 } else { -1.0 };
            sign * (-2.0 * k * k * x * x).exp()
        })
        .sum::<f64>()
        * 2.0;
    sf.clamp(0.0, 1.0)
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}
