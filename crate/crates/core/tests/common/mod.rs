//! Independent oracles shared by the integration tests.
//!
//! None of these reuse the spectral or pencil code paths under test: they
//! work from closed-form functions, dense determinants, brute force and
//! truncated series.

#![allow(dead_code)]

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;
use qpos_core::linalg::CMatrix;
use qpos_core::{LineBundleMetric, MetricField, ScalarField, TorusGeometry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    DMatrix::from_fn(n, n, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMatrix {
    let a = gaussian_matrix(rng, n);
    (&a + a.adjoint()).map(|z| z * (0.5 * scale))
}

/// `AA* + floor·Id`, so the smallest eigenvalue is at least `floor`.
pub fn random_pd(rng: &mut ChaCha8Rng, n: usize, floor: f64) -> CMatrix {
    let a = gaussian_matrix(rng, n).map(|z| z * 0.5);
    &a * a.adjoint() + CMatrix::identity(n, n).map(|z| z * floor)
}

pub fn unitary(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    gaussian_matrix(rng, n).qr().q()
}

pub fn with_spectrum(rng: &mut ChaCha8Rng, eigenvalues: &[f64]) -> CMatrix {
    let n = eigenvalues.len();
    let u = unitary(rng, n);
    let d = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c(eigenvalues[i], 0.0)
        } else {
            c(0.0, 0.0)
        }
    });
    let m = &u * d * u.adjoint();
    (&m + m.adjoint()).map(|z| z * 0.5)
}

/// A band-limited real trigonometric polynomial with closed-form derivatives.
#[derive(Clone, Debug)]
pub struct TrigPolynomial {
    /// `(amplitude, integer wavevector, phase)` for `a·cos(k·x + θ)`.
    pub terms: Vec<(f64, Vec<i32>, f64)>,
}

impl TrigPolynomial {
    pub fn random(
        rng: &mut ChaCha8Rng,
        real_dim: usize,
        terms: usize,
        max_freq: i32,
        amplitude: f64,
    ) -> Self {
        let terms = (0..terms)
            .map(|_| {
                let k: Vec<i32> = (0..real_dim)
                    .map(|_| rng.random_range(-max_freq..=max_freq))
                    .collect();
                let a = amplitude * rng.random_range(-1.0..1.0);
                let theta = rng.random_range(0.0..std::f64::consts::TAU);
                (a, k, theta)
            })
            .collect();
        Self { terms }
    }

    fn phase(k: &[i32], x: &[f64], theta: f64) -> f64 {
        k.iter().zip(x).map(|(&k, &x)| k as f64 * x).sum::<f64>() + theta
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(a, k, t)| a * Self::phase(k, x, *t).cos())
            .sum()
    }

    /// `∂²/∂x_a∂x_b` on period-2π axes.
    pub fn second(&self, x: &[f64], a: usize, b: usize) -> f64 {
        self.terms
            .iter()
            .map(|(amp, k, t)| -amp * (k[a] * k[b]) as f64 * Self::phase(k, x, *t).cos())
            .sum()
    }

    /// Closed-form `∂²/∂z_j∂z̄_k`.
    pub fn complex_hessian(&self, x: &[f64], j: usize, k: usize) -> Complex64 {
        let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
        let re = self.second(x, xj, xk) + self.second(x, yj, yk);
        let im = self.second(x, xj, yk) - self.second(x, yj, xk);
        c(0.25 * re, 0.25 * im)
    }

    /// Mean over the `2π`-periodic torus.
    pub fn mean(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(_, k, _)| k.iter().all(|&k| k == 0))
            .map(|(a, _, t)| a * t.cos())
            .sum()
    }

    pub fn sample(&self, geometry: &TorusGeometry) -> ScalarField {
        ScalarField::from_fn(geometry, |x| self.eval(x)).unwrap()
    }

    /// Largest frequency in absolute value over all axes.
    pub fn bandwidth(&self) -> i32 {
        self.terms
            .iter()
            .flat_map(|(_, k, _)| k.iter().map(|k| k.abs()))
            .max()
            .unwrap_or(0)
    }
}

/// Central-difference `∂²/∂z_j∂z̄_k` of an arbitrary function at `x`.
pub fn fd_complex_hessian(
    f: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    j: usize,
    k: usize,
    h: f64,
) -> Complex64 {
    let second = |a: usize, b: usize| {
        let shifted = |da: f64, db: f64| {
            let mut y = x.to_vec();
            y[a] += da;
            y[b] += db;
            f(&y)
        };
        if a == b {
            (shifted(h, 0.0) - 2.0 * f(x) + shifted(-h, 0.0)) / (h * h)
        } else {
            (shifted(h, h) - shifted(h, -h) - shifted(-h, h) + shifted(-h, -h)) / (4.0 * h * h)
        }
    };
    let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
    let re = second(xj, xk) + second(yj, yk);
    let im = second(xj, yk) - second(yj, xk);
    c(0.25 * re, 0.25 * im)
}

/// Dense determinant by cofactor expansion.
pub fn det(m: &CMatrix) -> Complex64 {
    let n = m.nrows();
    match n {
        0 => c(1.0, 0.0),
        1 => m[(0, 0)],
        _ => (0..n)
            .map(|col| {
                let minor = m.clone().remove_row(0).remove_column(col);
                let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
                m[(0, col)] * det(&minor) * sign
            })
            .sum(),
    }
}

/// Roots of `det(R − λΩ)` by sign scanning and bisection on `[−bound, bound]`,
/// sorted descending.
pub fn pencil_roots_by_bisection(
    r: &CMatrix,
    omega: &CMatrix,
    bound: f64,
    scan: usize,
) -> Vec<f64> {
    let p = |lambda: f64| det(&(r - omega.map(|z| z * lambda))).re;
    let mut roots = Vec::new();
    let step = 2.0 * bound / scan as f64;
    let mut a = -bound;
    let mut pa = p(a);
    for i in 1..=scan {
        let b = -bound + i as f64 * step;
        let pb = p(b);
        if pa == 0.0 {
            roots.push(a);
        } else if pa.signum() != pb.signum() && pb != 0.0 {
            let (mut lo, mut hi, mut plo) = (a, b, pa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                let pm = p(mid);
                if pm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if pm.signum() == plo.signum() {
                    lo = mid;
                    plo = pm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        a = b;
        pa = pb;
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    roots
}

/// Least sum over all `count`-element index subsets.
pub fn min_subset_sum(values: &[f64], count: usize) -> f64 {
    (0..values.len())
        .combinations(count)
        .map(|s| s.iter().map(|&i| values[i]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

/// `Ω^{-1} Σ_{k=0}^{K} (λ₀ RΩ^{-1})^k / (k+1)!`.
pub fn uniformized_inverse_series(
    r: &CMatrix,
    omega: &CMatrix,
    lambda0: f64,
    terms: usize,
) -> CMatrix {
    let n = r.nrows();
    let inv = omega.clone().try_inverse().expect("invertible metric");
    let a = (r * &inv).map(|z| z * lambda0);
    let mut power = CMatrix::identity(n, n);
    let mut factorial = 1.0;
    let mut sum = CMatrix::zeros(n, n);
    for k in 0..=terms {
        factorial *= (k + 1) as f64;
        sum += power.map(|z| z / factorial);
        power = &power * &a;
    }
    inv * sum
}

/// Riemann sum of an analytic function on a uniform grid with `samples` per
/// axis over `[0, 2π)^d`.
pub fn riemann_sum(f: &dyn Fn(&[f64]) -> f64, dim: usize, samples: usize) -> f64 {
    let h = std::f64::consts::TAU / samples as f64;
    let total = samples.pow(dim as u32);
    let mut acc = 0.0;
    let mut comp = 0.0;
    let mut x = vec![0.0; dim];
    for p in 0..total {
        let mut rest = p;
        for axis in (0..dim).rev() {
            x[axis] = (rest % samples) as f64 * h;
            rest /= samples;
        }
        // Kahan summation keeps the oracle's own rounding below the tolerance.
        let y = f(&x) - comp;
        let t = acc + y;
        comp = (t - acc) - y;
        acc = t;
    }
    acc * h.powi(dim as i32)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

pub fn bundle(r: CMatrix, phi: ScalarField) -> LineBundleMetric {
    LineBundleMetric::new(r, phi).unwrap()
}

pub fn constant_metric(geometry: &TorusGeometry, omega: &CMatrix) -> MetricField {
    MetricField::constant(geometry, omega).unwrap()
}

/// A q-positive bundle with a (generally non-constant) base metric.
pub struct QInstance {
    pub bundle: LineBundleMetric,
    pub metric: MetricField,
    pub q: usize,
}

/// Rejection-samples q-positive instances whose uniformizing exponent
/// `λ₀·max|λ|` stays below `max_exponent`.
pub fn random_q_positive(
    rng: &mut ChaCha8Rng,
    geometry: &TorusGeometry,
    q: usize,
    max_exponent: f64,
) -> QInstance {
    use qpos_core::q_positivity::{generalized_eigenvalues, lambda0};
    let n = geometry.complex_dim();
    loop {
        let mut spectrum: Vec<f64> = (0..n - q).map(|_| rng.random_range(0.5..2.0)).collect();
        spectrum.extend((0..q).map(|_| rng.random_range(-2.0..2.0)));
        let r = with_spectrum(rng, &spectrum);
        let phi = TrigPolynomial::random(rng, 2 * n, 3, 2, 0.08).sample(geometry);
        let u = TrigPolynomial::random(rng, 2 * n, 2, 2, 0.15).sample(geometry);
        let omega = random_pd(rng, n, 0.7);
        let metric = MetricField::constant(geometry, &omega)
            .unwrap()
            .conformal(&u)
            .unwrap();
        let bundle = LineBundleMetric::new(r, phi).unwrap();
        let ev = generalized_eigenvalues(&qpos_core::chern_curvature(&bundle).unwrap(), &metric)
            .unwrap();
        let Ok(l0) = lambda0(&ev, q, 1e-9 * ev.max_abs()) else {
            continue;
        };
        if l0 * ev.max_abs() <= max_exponent {
            return QInstance { bundle, metric, q };
        }
    }
}
