//! The Atiyah 1-form `μ(X) = ½∫ g(X, γ') dt` and its differential `ω`.
//!
//! On loops `ω(U, V) = ∫ g(∇_t U, V) dt`; the antisymmetric form
//! `½∫ [g(V, ∇_t U) − g(U, ∇_t V)] dt` is evaluated separately so the two
//! can be compared. On paths `ω` picks up the boundary term
//! `−½[g(U, V)]_0^1`.

use crate::curve::{self, DiscreteLoop, TangentField};
use crate::error::{GeomError, Result};
use crate::manifold::Manifold;
use crate::spectral;
use crate::transport::{self, DEFAULT_KERNEL_TOL};
use nalgebra::{DMatrix, DVector};

/// Relative singular-value threshold for numeric kernels.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormVariant {
    Loop,
    Path,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormEvaluation {
    pub value: f64,
    pub quadrature_n: usize,
    pub variant: FormVariant,
}

impl FormEvaluation {
    fn new(value: f64, gamma: &DiscreteLoop) -> Self {
        Self {
            value,
            quadrature_n: gamma.n(),
            variant: if gamma.is_periodic() {
                FormVariant::Loop
            } else {
                FormVariant::Path
            },
        }
    }
}

fn check_attached(gamma: &DiscreteLoop, fields: &[&TangentField]) -> Result<()> {
    for f in fields {
        if f.len() != gamma.n() {
            return Err(GeomError::InvalidCurve(format!(
                "field has {} samples, curve has {}",
                f.len(),
                gamma.n()
            )));
        }
        if f.dim() != gamma.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: gamma.dim(),
                actual: f.dim(),
            });
        }
    }
    Ok(())
}

/// `μ_γ(X)`.
pub fn mu(m: &Manifold, gamma: &DiscreteLoop, x: &TangentField) -> Result<FormEvaluation> {
    check_attached(gamma, &[x])?;
    let vel = curve::velocity(gamma);
    let ip = curve::pointwise_inner(m, gamma, x, &vel)?;
    Ok(FormEvaluation::new(0.5 * curve::integrate(gamma, &ip), gamma))
}

/// `ω_γ(U, V) = ∫ g(∇_t U, V) dt` on a loop.
pub fn omega_loop(
    m: &Manifold,
    gamma: &DiscreteLoop,
    u: &TangentField,
    v: &TangentField,
) -> Result<FormEvaluation> {
    if !gamma.is_periodic() {
        return Err(GeomError::PathVariant);
    }
    check_attached(gamma, &[u, v])?;
    let du = transport::covariant_derivative(m, gamma, u)?;
    let ip = curve::pointwise_inner(m, gamma, &du, v)?;
    Ok(FormEvaluation::new(curve::integrate(gamma, &ip), gamma))
}

/// `½∫ [g(V, ∇_t U) − g(U, ∇_t V)] dt` on a loop (the form before the
/// integration-by-parts step).
pub fn omega_loop_antisymmetric(
    m: &Manifold,
    gamma: &DiscreteLoop,
    u: &TangentField,
    v: &TangentField,
) -> Result<FormEvaluation> {
    if !gamma.is_periodic() {
        return Err(GeomError::PathVariant);
    }
    check_attached(gamma, &[u, v])?;
    let du = transport::covariant_derivative(m, gamma, u)?;
    let dv = transport::covariant_derivative(m, gamma, v)?;
    let a = curve::pointwise_inner(m, gamma, v, &du)?;
    let b = curve::pointwise_inner(m, gamma, u, &dv)?;
    let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    Ok(FormEvaluation::new(0.5 * curve::integrate(gamma, &diff), gamma))
}

/// `ω_γ(U, V) = ∫ g(∇_t U, V) dt − ½[g(U(1), V(1)) − g(U(0), V(0))]` on a path.
pub fn omega_path(
    m: &Manifold,
    gamma: &DiscreteLoop,
    u: &TangentField,
    v: &TangentField,
) -> Result<FormEvaluation> {
    if gamma.is_periodic() {
        return Err(GeomError::LoopVariant);
    }
    check_attached(gamma, &[u, v])?;
    let du = transport::covariant_derivative(m, gamma, u)?;
    let ip = curve::pointwise_inner(m, gamma, &du, v)?;
    let uv = curve::pointwise_inner(m, gamma, u, v)?;
    let boundary = 0.5 * (uv[uv.len() - 1] - uv[0]);
    Ok(FormEvaluation::new(curve::integrate(gamma, &ip) - boundary, gamma))
}

/// `ω` with the variant chosen by the curve's periodicity.
pub fn omega(
    m: &Manifold,
    gamma: &DiscreteLoop,
    u: &TangentField,
    v: &TangentField,
) -> Result<FormEvaluation> {
    if gamma.is_periodic() {
        omega_loop(m, gamma, u, v)
    } else {
        omega_path(m, gamma, u, v)
    }
}

/// Flat two-parameter variation `θ(u, v) = γ + u·U + v·V` in chart
/// coordinates. Its coordinate fields commute by construction.
#[derive(Debug, Clone)]
pub struct TwoParamVariation {
    pub base: DiscreteLoop,
    pub dir_u: TangentField,
    pub dir_v: TangentField,
}

impl TwoParamVariation {
    pub fn new(base: DiscreteLoop, dir_u: TangentField, dir_v: TangentField) -> Result<Self> {
        check_attached(&base, &[&dir_u, &dir_v])?;
        Ok(Self { base, dir_u, dir_v })
    }

    pub fn realize(&self, u: f64, v: f64) -> Result<DiscreteLoop> {
        let samples = self
            .base
            .samples()
            .iter()
            .zip(self.dir_u.vectors().iter().zip(self.dir_v.vectors()))
            .map(|(p, (a, b))| p + a * u + b * v)
            .collect();
        self.base.with_samples(samples)
    }
}

/// `|Û(μ(V̂)) − V̂(μ(Û)) − ω(U, V)|` with the directional derivatives taken
/// by central differences of step `h` along the flat variation.
pub fn cartan_check(m: &Manifold, var: &TwoParamVariation, h: f64) -> Result<f64> {
    if !m.is_flat_chart() {
        return Err(GeomError::UnsupportedManifold {
            op: "cartan_check",
            manifold: m.to_string(),
        });
    }
    if !(h > 0.0) {
        return Err(GeomError::InvalidCurve(format!("step h must be positive, got {h}")));
    }
    let mu_at = |u: f64, v: f64, field: &TangentField| -> Result<f64> {
        let loop_ = var.realize(u, v)?;
        Ok(mu(m, &loop_, field)?.value)
    };
    let u_mu_v = (mu_at(h, 0.0, &var.dir_v)? - mu_at(-h, 0.0, &var.dir_v)?) / (2.0 * h);
    let v_mu_u = (mu_at(0.0, h, &var.dir_u)? - mu_at(0.0, -h, &var.dir_u)?) / (2.0 * h);
    let w = omega(m, &var.base, &var.dir_u, &var.dir_v)?.value;
    Ok((u_mu_v - v_mu_u - w).abs())
}

/// Matrix `Ω_ab = ω(b_a, b_b)` over a list of fields.
pub fn form_matrix(
    m: &Manifold,
    gamma: &DiscreteLoop,
    basis: &[TangentField],
) -> Result<DMatrix<f64>> {
    let metrics = gamma
        .samples()
        .iter()
        .map(|p| m.metric_at(p))
        .collect::<Result<Vec<_>>>()?;
    let derivs = basis
        .iter()
        .map(|b| transport::covariant_derivative(m, gamma, b))
        .collect::<Result<Vec<_>>>()?;
    let weights: Vec<f64> = if gamma.is_periodic() {
        vec![1.0 / gamma.n() as f64; gamma.n()]
    } else {
        spectral::open_quadrature_weights(gamma.n())
    };
    let nb = basis.len();
    let last = gamma.n() - 1;
    let inner = |j: usize, x: &DVector<f64>, y: &DVector<f64>| x.dot(&(&metrics[j] * y));
    Ok(DMatrix::from_fn(nb, nb, |a, b| {
        let mut s = 0.0;
        for j in 0..gamma.n() {
            s += weights[j] * inner(j, &derivs[a].vectors()[j], &basis[b].vectors()[j]);
        }
        if !gamma.is_periodic() {
            let ua = &basis[a].vectors();
            let ub = &basis[b].vectors();
            s -= 0.5 * (inner(last, &ua[last], &ub[last]) - inner(0, &ua[0], &ub[0]));
        }
        s
    }))
}

/// Gram matrix `G_ab = ∫ g(b_a, b_b) dt`.
pub fn gram_matrix(
    m: &Manifold,
    gamma: &DiscreteLoop,
    basis: &[TangentField],
) -> Result<DMatrix<f64>> {
    let nb = basis.len();
    let mut out = DMatrix::zeros(nb, nb);
    for a in 0..nb {
        for b in a..nb {
            let ip = curve::pointwise_inner(m, gamma, &basis[a], &basis[b])?;
            let v = curve::integrate(gamma, &ip);
            out[(a, b)] = v;
            out[(b, a)] = v;
        }
    }
    Ok(out)
}

/// Map to an L²-orthonormal basis of the span, dropping dependent directions.
pub fn orthonormalizer(gram: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = gram.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > 1e-10 * max)
        .collect();
    DMatrix::from_fn(gram.nrows(), keep.len(), |r, c| {
        let i = keep[c];
        eig.eigenvectors[(r, i)] / eig.eigenvalues[i].sqrt()
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankProfile {
    /// Singular values of the form matrix in an L²-orthonormal basis, descending.
    pub singular_values: Vec<f64>,
    /// Count of singular values below `RANK_TOL · σ_max`.
    pub kernel_dim: usize,
    pub basis_size: usize,
}

impl RankProfile {
    pub fn smallest_relative(&self) -> f64 {
        let max = self.singular_values.first().copied().unwrap_or(0.0);
        let min = self.singular_values.last().copied().unwrap_or(0.0);
        if max > 0.0 {
            min / max
        } else {
            0.0
        }
    }
}

/// Rank analysis of `ω` restricted to the span of `basis`.
pub fn rank_profile_of(
    m: &Manifold,
    gamma: &DiscreteLoop,
    basis: &[TangentField],
) -> Result<RankProfile> {
    let q = orthonormalizer(&gram_matrix(m, gamma, basis)?);
    Ok(rank_profile_of_matrix(&(q.transpose() * form_matrix(m, gamma, basis)? * q)))
}

pub(crate) fn rank_profile_of_matrix(matrix: &DMatrix<f64>) -> RankProfile {
    let anti = (matrix - matrix.transpose()) * 0.5;
    let mut sv: Vec<f64> = anti.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let max = sv.first().copied().unwrap_or(0.0);
    let kernel_dim = sv.iter().filter(|&&s| s <= RANK_TOL * max).count();
    RankProfile {
        basis_size: sv.len(),
        singular_values: sv,
        kernel_dim,
    }
}

/// Rank analysis of `ω` on band-limited fields with modes up to `k_max`.
///
/// Loops use the Fourier basis with the periodic parallel fields appended;
/// paths use sine modes when the basepoint is fixed and cosine modes otherwise.
pub fn omega_rank_profile(m: &Manifold, gamma: &DiscreteLoop, k_max: usize) -> Result<RankProfile> {
    let dim = gamma.dim();
    if 2 * k_max * dim + dim > gamma.n() {
        return Err(GeomError::BasisTooLarge {
            size: 2 * k_max * dim + dim,
            samples: gamma.n(),
        });
    }
    let mut basis = curve::fourier_basis(gamma, k_max, gamma.basepoint_fixed());
    if gamma.is_periodic() && !gamma.basepoint_fixed() {
        basis.extend(transport::periodic_parallel_fields(m, gamma, DEFAULT_KERNEL_TOL)?);
    }
    rank_profile_of(m, gamma, &basis)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricRecovery {
    pub omega: f64,
    pub reference: f64,
    pub ratio: f64,
}

/// At the constant loop at `p`, compare `ω(f₁v₁, f₂v₂)` with
/// `⟨v₁, v₂⟩_g ∫ f₁' f₂ dt`. The scalar functions are sampled on the loop grid
/// and must vanish at t = 0.
pub fn metric_recovery(
    m: &Manifold,
    p: &DVector<f64>,
    v1: &DVector<f64>,
    v2: &DVector<f64>,
    f1: &[f64],
    f2: &[f64],
) -> Result<MetricRecovery> {
    if f1.len() != f2.len() {
        return Err(GeomError::InvalidCurve("f1 and f2 differ in length".into()));
    }
    for f in [f1, f2] {
        if f[0].abs() > curve::BASED_TOLERANCE {
            return Err(GeomError::NotBasedField { norm: f[0].abs() });
        }
    }
    let gamma = DiscreteLoop::closed(vec![p.clone(); f1.len()], DVector::zeros(p.len()))?;
    gamma.validate(m)?;
    let x1 = TangentField::new(f1.iter().map(|&f| v1 * f).collect());
    let x2 = TangentField::new(f2.iter().map(|&f| v2 * f).collect());
    let w = omega_loop(m, &gamma, &x1, &x2)?.value;
    let g = m.metric_at(p)?;
    let df1 = spectral::periodic_derivative(f1);
    let integral: f64 = df1.iter().zip(f2).map(|(a, b)| a * b).sum::<f64>() / f1.len() as f64;
    let reference = v1.dot(&(g * v2)) * integral;
    if reference.abs() < 1e-12 {
        return Err(GeomError::DegenerateTestCase { omega: w, reference });
    }
    Ok(MetricRecovery {
        omega: w,
        reference,
        ratio: w / reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;
    use std::f64::consts::PI;

    fn circle(n: usize) -> DiscreteLoop {
        DiscreteLoop::closed_from_fn(n, dvector![0.0, 0.0], |t| {
            dvector![(2.0 * PI * t).cos(), (2.0 * PI * t).sin()]
        })
        .unwrap()
    }

    #[test]
    fn mu_examples() {
        let m = Manifold::euclidean(2);
        let g = circle(256);
        let v = curve::velocity(&g);
        assert!((mu(&m, &g, &v).unwrap().value - 2.0 * PI * PI).abs() < 1e-8);
        let radial = TangentField::new(g.samples().to_vec());
        assert!(mu(&m, &g, &radial).unwrap().value.abs() < 1e-10);
        let c = DiscreteLoop::closed(vec![dvector![0.5, 0.5]; 32], dvector![0.0, 0.0]).unwrap();
        assert_eq!(mu(&m, &c, &TangentField::zeros(32, 2)).unwrap().value, 0.0);
    }

    #[test]
    fn omega_flat_example() {
        // ∫ 2π cos(2πt)(cos(2πt) − 1) dt = π
        let m = Manifold::euclidean(1);
        let g = DiscreteLoop::closed_from_fn(128, dvector![0.0], |t| dvector![0.2 * (2.0 * PI * t).sin()]).unwrap();
        let u = TangentField::from_fn(&g, |t| dvector![(2.0 * PI * t).sin()]);
        let v = TangentField::from_fn(&g, |t| dvector![(2.0 * PI * t).cos() - 1.0]);
        let w = omega_loop(&m, &g, &u, &v).unwrap().value;
        assert!((w - PI).abs() < 1e-8);
        assert!(omega_loop(&m, &g, &u, &u).unwrap().value.abs() < 1e-9);
        assert!(matches!(
            omega_path(&m, &g, &u, &v),
            Err(GeomError::LoopVariant)
        ));
    }

    #[test]
    fn omega_path_constant_fields_vanish() {
        let m = Manifold::euclidean(2);
        let p = DiscreteLoop::path_from_fn(65, |t| dvector![t, 2.0 * t]).unwrap();
        let u = TangentField::new(vec![dvector![1.0, 0.5]; 65]);
        let v = TangentField::new(vec![dvector![-0.3, 2.0]; 65]);
        assert!(omega_path(&m, &p, &u, &v).unwrap().value.abs() < 1e-12);
    }

    #[test]
    fn based_path_kernel_trivial() {
        let m = Manifold::euclidean(2);
        let p = DiscreteLoop::path_from_fn(513, |t| dvector![t, 0.3 * t * t]).unwrap().with_basepoint_fixed(true);
        let prof = omega_rank_profile(&m, &p, 4).unwrap();
        assert_eq!(prof.kernel_dim, 0);
    }

    #[test]
    fn euclidean_loop_kernel_is_constants() {
        let m = Manifold::euclidean(2);
        let prof = omega_rank_profile(&m, &circle(256), 4).unwrap();
        assert_eq!(prof.kernel_dim, 2);
    }

    #[test]
    fn metric_recovery_example() {
        let m = Manifold::euclidean(2);
        let n = 128;
        let f1: Vec<f64> = (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).sin()).collect();
        let f2: Vec<f64> = (0..n).map(|j| 1.0 - (2.0 * PI * j as f64 / n as f64).cos()).collect();
        let r = metric_recovery(&m, &dvector![0.0, 0.0], &dvector![1.0, 0.0], &dvector![1.0, 0.0], &f1, &f2).unwrap();
        assert!((r.omega + PI).abs() < 1e-8);
        assert!((r.ratio - 1.0).abs() < 1e-12);
        let ortho = metric_recovery(&m, &dvector![0.0, 0.0], &dvector![1.0, 0.0], &dvector![0.0, 1.0], &f1, &f2);
        match ortho {
            Err(GeomError::DegenerateTestCase { omega, reference }) => {
                assert!(omega.abs() < 1e-10 && reference.abs() < 1e-10)
            }
            other => panic!("expected degenerate case, got {other:?}"),
        }
    }

    #[test]
    fn cartan_rejects_curved() {
        let m = Manifold::sphere(1.0);
        let g = DiscreteLoop::closed_from_fn(32, dvector![0.0, 2.0 * PI], |t| dvector![1.0, 2.0 * PI * t]).unwrap();
        let z = TangentField::zeros(32, 2);
        let var = TwoParamVariation::new(g, z.clone(), z).unwrap();
        assert!(matches!(
            cartan_check(&m, &var, 1e-4),
            Err(GeomError::UnsupportedManifold { .. })
        ));
    }
}
