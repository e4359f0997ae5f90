//! Numerical kernels shared by the curve, transport and forms modules.
//!
//! Periodic data (loops) is handled with the DFT on the uniform grid
//! `t_j = j/N`; open data (paths) on `t_j = j/(N-1)` uses eighth-order
//! finite-difference stencils and a matching composite quadrature.

use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Stencil width of the open-grid derivative and quadrature rules.
const STENCIL: usize = 9;

/// Forward DFT normalized so that `f(t_j) = Σ_k a_k e^{2πik t_j}`.
/// Coefficients are returned in FFT order (k = 0, 1, …, N/2, −N/2+1, …, −1).
pub fn dft(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    for c in &mut buf {
        *c *= scale;
    }
    buf
}

/// Inverse of [`dft`], keeping the real part.
pub fn idft(coeffs: &[Complex64]) -> Vec<f64> {
    let n = coeffs.len();
    let mut buf = coeffs.to_vec();
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re).collect()
}

/// Signed frequency of FFT bin `j` for an `n`-point transform.
/// The Nyquist bin (even `n`) is reported as `+n/2`.
pub fn frequency(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Index of the Nyquist bin, if any.
pub fn nyquist_bin(n: usize) -> Option<usize> {
    (n % 2 == 0).then_some(n / 2)
}

/// Spectral derivative of periodic samples on [0, 1). The Nyquist mode is dropped.
pub fn periodic_derivative(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut c = dft(values);
    for (j, cj) in c.iter_mut().enumerate() {
        if Some(j) == nyquist_bin(n) {
            *cj = Complex64::new(0.0, 0.0);
        } else {
            let k = frequency(j, n) as f64;
            *cj *= Complex64::new(0.0, 2.0 * PI * k);
        }
    }
    idft(&c)
}

/// Real trigonometric interpolant of periodic samples, evaluable off-grid.
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    coeffs: Vec<Complex64>,
}

impl TrigInterpolant {
    pub fn new(values: &[f64]) -> Self {
        Self { coeffs: dft(values) }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Mean value (coefficient a_0).
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Value and first derivative at an arbitrary parameter `t`.
    pub fn eval_with_derivative(&self, t: f64) -> (f64, f64) {
        let n = self.coeffs.len();
        let half = n / 2;
        let step = Complex64::from_polar(1.0, 2.0 * PI * t);
        let mut rot = step;
        let mut value = self.coeffs[0].re;
        let mut deriv = 0.0;
        let top = if n % 2 == 0 { half } else { half + 1 };
        for k in 1..top {
            let term = self.coeffs[k] * rot;
            value += 2.0 * term.re;
            // d/dt Re(a e^{2πikt}) = Re(2πik a e^{2πikt})
            deriv += 2.0 * (2.0 * PI * k as f64) * (-term.im);
            rot *= step;
        }
        if n % 2 == 0 && n > 0 {
            let a = self.coeffs[half].re;
            let arg = PI * n as f64 * t;
            value += a * arg.cos();
            deriv -= a * PI * n as f64 * arg.sin();
        }
        (value, deriv)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_with_derivative(t).0
    }

    /// Antiderivative of `f − mean` vanishing at t = 0, evaluated at `t`.
    pub fn eval_antiderivative(&self, t: f64) -> f64 {
        let n = self.coeffs.len();
        let half = n / 2;
        let step = Complex64::from_polar(1.0, 2.0 * PI * t);
        let mut rot = step;
        let mut out = 0.0;
        let top = if n % 2 == 0 { half } else { half + 1 };
        for k in 1..top {
            // ∫_0^t a e^{2πiks} ds = a (e^{2πikt} − 1) / (2πik)
            let denom = Complex64::new(0.0, 2.0 * PI * k as f64);
            let term = self.coeffs[k] * (rot - Complex64::new(1.0, 0.0)) / denom;
            out += 2.0 * term.re;
            rot *= step;
        }
        if n % 2 == 0 && n > 0 {
            let a = self.coeffs[half].re;
            out += a * (PI * n as f64 * t).sin() / (PI * n as f64);
        }
        out
    }
}

/// Band-limited upsampling of periodic samples by an integer factor.
/// Returns values and derivatives on the fine grid `t = i / (N·factor)`.
pub fn upsample_with_derivative(values: &[f64], factor: usize) -> (Vec<f64>, Vec<f64>) {
    let n = values.len();
    let m = n * factor;
    let c = dft(values);
    let mut fine = vec![Complex64::new(0.0, 0.0); m];
    let mut dfine = vec![Complex64::new(0.0, 0.0); m];
    for (j, &cj) in c.iter().enumerate() {
        let k = frequency(j, n);
        if Some(j) == nyquist_bin(n) && factor > 1 {
            // split the Nyquist term into the ±N/2 modes of the finer grid
            let kp = (n / 2) as i64;
            let ip = kp as usize;
            let im = m - kp as usize;
            fine[ip] += cj * 0.5;
            fine[im] += cj * 0.5;
            dfine[ip] += cj * 0.5 * Complex64::new(0.0, 2.0 * PI * kp as f64);
            dfine[im] += cj * 0.5 * Complex64::new(0.0, -2.0 * PI * kp as f64);
            continue;
        }
        let idx = if k >= 0 { k as usize } else { (m as i64 + k) as usize };
        fine[idx] += cj;
        if !(Some(j) == nyquist_bin(n)) {
            dfine[idx] += cj * Complex64::new(0.0, 2.0 * PI * k as f64);
        }
    }
    let unscale = |v: Vec<Complex64>| -> Vec<f64> {
        let mut buf = v;
        let mut planner = FftPlanner::new();
        planner.plan_fft_inverse(m).process(&mut buf);
        buf.iter().map(|z| z.re).collect()
    };
    (unscale(fine), unscale(dfine))
}

/// Finite-difference weights (Fornberg) for derivatives `0..=order` at `z`
/// using nodes `x`. Returns `w[d][j]`.
pub fn fornberg_weights(z: f64, x: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

fn stencil_start(i: usize, n: usize) -> usize {
    i.saturating_sub(STENCIL / 2).min(n - STENCIL)
}

/// Eighth-order derivative of samples on the open uniform grid over [0, 1].
pub fn open_derivative(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    assert!(n >= STENCIL, "open grid needs at least {STENCIL} samples");
    let h = 1.0 / (n - 1) as f64;
    let nodes: Vec<f64> = (0..STENCIL).map(|j| j as f64).collect();
    let weights: Vec<Vec<f64>> = (0..STENCIL)
        .map(|p| fornberg_weights(p as f64, &nodes, 1)[1].clone())
        .collect();
    (0..n)
        .map(|i| {
            let s = stencil_start(i, n);
            let w = &weights[i - s];
            (0..STENCIL).map(|j| w[j] * values[s + j]).sum::<f64>() / h
        })
        .collect()
}

/// Quadrature weights on the open uniform grid over [0, 1], exact for
/// polynomials of degree 8 on every sub-interval.
pub fn open_quadrature_weights(n: usize) -> Vec<f64> {
    assert!(n >= STENCIL, "open grid needs at least {STENCIL} samples");
    let h = 1.0 / (n - 1) as f64;
    let center = (STENCIL / 2) as f64;
    let nodes: Vec<f64> = (0..STENCIL).map(|j| j as f64 - center).collect();
    let vander = DMatrix::from_fn(STENCIL, STENCIL, |p, j| nodes[j].powi(p as i32));
    let lu = vander.lu();
    let mut cache: Vec<Option<Vec<f64>>> = vec![None; STENCIL];
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let s = stencil_start(i, n).min(n - STENCIL);
        let a = i - s;
        if cache[a].is_none() {
            let lo = a as f64 - center;
            let hi = lo + 1.0;
            let moments = DVector::from_fn(STENCIL, |p, _| {
                let e = p as i32 + 1;
                (hi.powi(e) - lo.powi(e)) / e as f64
            });
            let c = lu.solve(&moments).expect("Vandermonde system is nonsingular");
            cache[a] = Some(c.iter().copied().collect());
        }
        let c = cache[a].as_ref().unwrap();
        for j in 0..STENCIL {
            w[s + j] += c[j] * h;
        }
    }
    w
}

/// Cumulative trapezoid integral: out[0] = 0, out[j] = ∫_0^{t_j}.
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dft_roundtrip_and_derivative() {
        let n = 64;
        let f: Vec<f64> = (0..n)
            .map(|j| (2.0 * PI * 3.0 * j as f64 / n as f64).sin())
            .collect();
        let back = idft(&dft(&f));
        for (a, b) in f.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13);
        }
        let d = periodic_derivative(&f);
        for (j, dj) in d.iter().enumerate() {
            let t = j as f64 / n as f64;
            assert!((dj - 6.0 * PI * (6.0 * PI * t).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn interpolant_matches_off_grid() {
        let n = 32;
        let f = |t: f64| (2.0 * PI * t).cos() + 0.3 * (4.0 * PI * t).sin();
        let s: Vec<f64> = (0..n).map(|j| f(j as f64 / n as f64)).collect();
        let it = TrigInterpolant::new(&s);
        let t = 0.123_456;
        let (v, d) = it.eval_with_derivative(t);
        assert!((v - f(t)).abs() < 1e-13);
        let exact_d = -2.0 * PI * (2.0 * PI * t).sin() + 0.3 * 4.0 * PI * (4.0 * PI * t).cos();
        assert!((d - exact_d).abs() < 1e-11);
        // ∫_0^t cos(2πs) ds = sin(2πt)/(2π); ∫ 0.3 sin(4πs) = 0.3(1 − cos 4πt)/(4π)
        let anti = (2.0 * PI * t).sin() / (2.0 * PI) + 0.3 * (1.0 - (4.0 * PI * t).cos()) / (4.0 * PI);
        assert!((it.eval_antiderivative(t) - anti).abs() < 1e-13);
    }

    #[test]
    fn upsample_reproduces_band_limited() {
        let n = 16;
        let f = |t: f64| (2.0 * PI * t).sin() + 0.5 * (6.0 * PI * t).cos();
        let s: Vec<f64> = (0..n).map(|j| f(j as f64 / n as f64)).collect();
        let (fine, dfine) = upsample_with_derivative(&s, 4);
        for (i, (v, d)) in fine.iter().zip(&dfine).enumerate() {
            let t = i as f64 / 64.0;
            assert!((v - f(t)).abs() < 1e-12);
            let exact = 2.0 * PI * (2.0 * PI * t).cos() - 3.0 * PI * (6.0 * PI * t).sin();
            assert!((d - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn fornberg_central_first_derivative() {
        let w = fornberg_weights(0.0, &[-1.0, 0.0, 1.0], 1);
        assert!((w[1][0] + 0.5).abs() < 1e-15);
        assert!(w[1][1].abs() < 1e-15);
        assert!((w[1][2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn open_rules_exact_on_polynomials() {
        let n = 33;
        let t: Vec<f64> = (0..n).map(|j| j as f64 / (n - 1) as f64).collect();
        let f: Vec<f64> = t.iter().map(|x| x.powi(7) - 2.0 * x * x).collect();
        let d = open_derivative(&f);
        for (x, dx) in t.iter().zip(&d) {
            assert!((dx - (7.0 * x.powi(6) - 4.0 * x)).abs() < 1e-10);
        }
        let w = open_quadrature_weights(n);
        let q: f64 = w.iter().zip(&f).map(|(a, b)| a * b).sum();
        assert!((q - (1.0 / 8.0 - 2.0 / 3.0)).abs() < 1e-13);
    }

    #[test]
    fn open_quadrature_spectral_like_on_smooth() {
        let n = 513;
        let w = open_quadrature_weights(n);
        let q: f64 = (0..n)
            .map(|j| w[j] * (3.0 * j as f64 / (n - 1) as f64).exp())
            .sum();
        assert!((q - (3f64.exp() - 1.0) / 3.0).abs() < 1e-13);
    }
}
