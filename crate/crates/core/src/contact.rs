//! Liouville lift of the expanding field, the contact form on the length-one
//! level set, and the Reeb field with its closed flow.
//!
//! `α(Y) = ω(X̂, Y)` where `X̂_γ(t) = X(γ(t))`. On manifolds where
//! `∇X = ½ Id` this equals `μ(Y)`.

use crate::curve::{self, ArclengthMap, DiscreteLoop, TangentField};
use crate::error::{GeomError, Result};
use crate::forms::{self, RankProfile};
use crate::manifold::Manifold;
use crate::transport::{self, DEFAULT_KERNEL_TOL};
use nalgebra::{DMatrix, DVector};

/// Speeds below this fraction of the mean speed count as degenerate.
pub const MIN_RELATIVE_SPEED: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactEvaluation {
    pub alpha_value: f64,
    pub mu_value: f64,
    pub residual: f64,
}

/// Length level set `{γ : length(γ) = target_length}`, based or free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSetSpec {
    pub target_length: f64,
    pub based: bool,
    pub tolerance: f64,
}

impl LevelSetSpec {
    pub fn unit(based: bool) -> Self {
        Self {
            target_length: 1.0,
            based,
            tolerance: 1e-6,
        }
    }

    pub fn contains(&self, m: &Manifold, gamma: &DiscreteLoop) -> Result<bool> {
        Ok((curve::length(m, gamma)? - self.target_length).abs() < self.tolerance)
    }

    pub fn check(&self, m: &Manifold, gamma: &DiscreteLoop) -> Result<f64> {
        let length = curve::length(m, gamma)?;
        if (length - self.target_length).abs() < self.tolerance {
            Ok(length)
        } else {
            Err(GeomError::NotOnLevelSet {
                length,
                target: self.target_length,
                tolerance: self.tolerance,
            })
        }
    }
}

/// `X̂_γ(t_j) = X(γ(t_j))`.
pub fn lift_field(m: &Manifold, gamma: &DiscreteLoop) -> Result<TangentField> {
    Ok(TangentField::new(
        gamma
            .samples()
            .iter()
            .map(|p| m.expanding_field(p))
            .collect::<Result<Vec<_>>>()?,
    ))
}

pub fn alpha(m: &Manifold, gamma: &DiscreteLoop, y: &TangentField) -> Result<ContactEvaluation> {
    let x = lift_field(m, gamma)?;
    let alpha_value = forms::omega(m, gamma, &x, y)?.value;
    let mu_value = forms::mu(m, gamma, y)?.value;
    Ok(ContactEvaluation {
        alpha_value,
        mu_value,
        residual: (alpha_value - mu_value).abs(),
    })
}

/// `ψ_s ∘ γ` for the analytic flow of the expanding field.
pub fn flow_loop(m: &Manifold, gamma: &DiscreteLoop, s: f64) -> Result<DiscreteLoop> {
    let mut samples = Vec::with_capacity(gamma.n());
    let mut jac0 = None;
    for p in gamma.samples() {
        let (q, jac) = m.expanding_flow(s, p)?;
        jac0.get_or_insert(jac);
        samples.push(q);
    }
    // The flows are affine, so the Jacobian carries deck translations.
    let winding = jac0.unwrap() * gamma.winding();
    gamma.with_samples(samples)?.with_winding(winding)
}

/// `ψ_s* U` along `γ`.
pub fn push_forward(m: &Manifold, gamma: &DiscreteLoop, u: &TangentField, s: f64) -> Result<TangentField> {
    Ok(TangentField::new(
        gamma
            .samples()
            .iter()
            .zip(u.vectors())
            .map(|(p, v)| Ok(m.expanding_flow(s, p)?.1 * v))
            .collect::<Result<Vec<_>>>()?,
    ))
}

/// `|d/ds ω_{ψ_s γ}(ψ_s* U, ψ_s* V)|_{s=0} − ω_γ(U, V)|` by central differences.
pub fn liouville_residual(
    m: &Manifold,
    gamma: &DiscreteLoop,
    u: &TangentField,
    v: &TangentField,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(GeomError::InvalidCurve(format!("step h must be positive, got {h}")));
    }
    let at = |s: f64| -> Result<f64> {
        let g = flow_loop(m, gamma, s)?;
        let pu = push_forward(m, gamma, u, s)?;
        let pv = push_forward(m, gamma, v, s)?;
        Ok(forms::omega(m, &g, &pu, &pv)?.value)
    };
    let deriv = (at(h)? - at(-h)?) / (2.0 * h);
    Ok((deriv - forms::omega(m, gamma, u, v)?.value).abs())
}

/// `d/ds length(ψ_s ∘ γ)` at `s = 0` by central differences.
pub fn length_derivative(m: &Manifold, gamma: &DiscreteLoop, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(GeomError::InvalidCurve(format!("step h must be positive, got {h}")));
    }
    let plus = curve::length(m, &flow_loop(m, gamma, h)?)?;
    let minus = curve::length(m, &flow_loop(m, gamma, -h)?)?;
    Ok((plus - minus) / (2.0 * h))
}

fn check_speeds(m: &Manifold, gamma: &DiscreteLoop) -> Result<Vec<f64>> {
    let speeds = curve::speeds(m, gamma)?;
    let mean = speeds.iter().sum::<f64>() / speeds.len() as f64;
    let min_speed = speeds.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_speed <= MIN_RELATIVE_SPEED * mean {
        return Err(GeomError::DegenerateVelocity { min_speed });
    }
    Ok(speeds)
}

/// `R = 2γ'/‖γ'‖` on a loop in the unit level set.
pub fn reeb_field(m: &Manifold, gamma: &DiscreteLoop) -> Result<TangentField> {
    reeb_field_on(m, gamma, &LevelSetSpec::unit(gamma.basepoint_fixed()))
}

pub fn reeb_field_on(m: &Manifold, gamma: &DiscreteLoop, level: &LevelSetSpec) -> Result<TangentField> {
    level.check(m, gamma)?;
    let speeds = check_speeds(m, gamma)?;
    let vel = curve::velocity(gamma);
    Ok(TangentField::new(
        vel.vectors()
            .iter()
            .zip(&speeds)
            .map(|(v, s)| v * (2.0 / s))
            .collect(),
    ))
}

/// Flow of the Reeb field for time `s`: each point moves forward by
/// arclength `2s`. Closed of period ½ on the unit level set.
pub fn reeb_flow(m: &Manifold, gamma: &DiscreteLoop, s: f64) -> Result<DiscreteLoop> {
    if !gamma.is_periodic() {
        return Err(GeomError::PathVariant);
    }
    LevelSetSpec::unit(false).check(m, gamma)?;
    check_speeds(m, gamma)?;
    let map = ArclengthMap::new(m, gamma)?;
    let params: Vec<f64> = (0..gamma.n())
        .map(|j| map.param_at_arclength(map.sigma(gamma.param(j)).0 + 2.0 * s))
        .collect();
    // Stays on the lift, so flows compose exactly; after a full period the
    // result differs from γ by its winding when the chart is periodic.
    let samples = params.iter().map(|&t| map.position(t)).collect();
    gamma.with_samples(samples)
}

/// `d/ds reeb_flow(γ, s)` at `s = 0` by the five-point central stencil.
pub fn reeb_flow_velocity(m: &Manifold, gamma: &DiscreteLoop, h: f64) -> Result<TangentField> {
    if !(h > 0.0) {
        return Err(GeomError::InvalidCurve(format!("step h must be positive, got {h}")));
    }
    let flows = [2.0 * h, h, -h, -2.0 * h]
        .iter()
        .map(|&s| reeb_flow(m, gamma, s))
        .collect::<Result<Vec<_>>>()?;
    let weights = [-1.0, 8.0, -8.0, 1.0];
    Ok(TangentField::new(
        (0..gamma.n())
            .map(|j| {
                flows
                    .iter()
                    .zip(weights)
                    .fold(DVector::zeros(gamma.dim()), |acc, (f, w)| acc + &f.samples()[j] * w)
                    / (12.0 * h)
            })
            .collect(),
    ))
}

/// `ℓ(V) = ∫ g(∇_t V, γ'/‖γ'‖) dt`, the first-order change of length along `V`.
pub fn length_variation(m: &Manifold, gamma: &DiscreteLoop, v: &TangentField) -> Result<f64> {
    let speeds = check_speeds(m, gamma)?;
    let dv = transport::covariant_derivative(m, gamma, v)?;
    let vel = curve::velocity(gamma);
    let ip = curve::pointwise_inner(m, gamma, &dv, &vel)?;
    let vals: Vec<f64> = ip.iter().zip(&speeds).map(|(a, s)| a / s).collect();
    Ok(curve::integrate(gamma, &vals))
}

/// Band-limited basis (based or free) with the periodic parallel fields
/// appended in the free case, together with an L²-orthonormalizer.
fn level_basis(
    m: &Manifold,
    gamma: &DiscreteLoop,
    k_max: usize,
    based: bool,
) -> Result<(Vec<TangentField>, DMatrix<f64>)> {
    let mut basis = curve::fourier_basis(gamma, k_max, based);
    if gamma.is_periodic() && !based {
        basis.extend(transport::periodic_parallel_fields(m, gamma, DEFAULT_KERNEL_TOL)?);
    }
    let q = forms::orthonormalizer(&forms::gram_matrix(m, gamma, &basis)?);
    Ok((basis, q))
}

fn combine(basis: &[TangentField], coeffs: &[f64], n: usize, dim: usize) -> TangentField {
    basis
        .iter()
        .zip(coeffs)
        .fold(TangentField::zeros(n, dim), |acc, (b, &c)| acc.plus(&b.scaled(c)))
}

/// Removes from `y` its component along the `ℓ`-gradient in the band-limited
/// basis with modes up to `k_max`, so the result is tangent to the level set.
pub fn project_tangent_to_level(
    m: &Manifold,
    gamma: &DiscreteLoop,
    y: &TangentField,
    k_max: usize,
) -> Result<TangentField> {
    let based = gamma.basepoint_fixed() || y.vanishes_at_base();
    let (basis, q) = level_basis(m, gamma, k_max, based)?;
    let ell: Vec<f64> = basis
        .iter()
        .map(|b| length_variation(m, gamma, b))
        .collect::<Result<_>>()?;
    // Gradient coefficients in the raw basis: Q Qᵀ ℓ.
    let ell = DVector::from_vec(ell);
    let grad = &q * (q.transpose() * &ell);
    let g_field = combine(&basis, grad.as_slice(), gamma.n(), gamma.dim());
    let denom = length_variation(m, gamma, &g_field)?;
    if denom.abs() < 1e-14 {
        return Ok(y.clone());
    }
    let c = length_variation(m, gamma, y)? / denom;
    Ok(y.minus(&g_field.scaled(c)))
}

/// Rank analysis of `ω` on `{Y : α(Y) = 0, ℓ(Y) = 0}` within the band-limited
/// basis (based fields when `based`).
pub fn quasi_contact_profile(
    m: &Manifold,
    gamma: &DiscreteLoop,
    k_max: usize,
    based: bool,
) -> Result<RankProfile> {
    let dim = gamma.dim();
    if 2 * k_max * dim + dim > gamma.n() {
        return Err(GeomError::BasisTooLarge {
            size: 2 * k_max * dim + dim,
            samples: gamma.n(),
        });
    }
    LevelSetSpec::unit(based).check(m, gamma)?;
    let (basis, q) = level_basis(m, gamma, k_max, based)?;
    let mut constraints = DMatrix::zeros(2, basis.len());
    for (a, b) in basis.iter().enumerate() {
        constraints[(0, a)] = alpha(m, gamma, b)?.alpha_value;
        constraints[(1, a)] = length_variation(m, gamma, b)?;
    }
    let cq = constraints * &q;
    // Null space of the constraints in the orthonormal coordinates.
    let svd = cq.clone().transpose().svd(true, false);
    let u = svd.u.unwrap();
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-12 * smax.max(1.0))
        .count();
    let full = DMatrix::<f64>::identity(cq.ncols(), cq.ncols());
    let range = u.columns(0, rank).into_owned();
    let proj = &full - &range * range.transpose();
    // Orthonormal basis of the complement via the eigenvectors of the projector.
    let eig = proj.symmetric_eigen();
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > 0.5)
        .collect();
    let null = DMatrix::from_fn(cq.ncols(), keep.len(), |r, c| eig.eigenvectors[(r, keep[c])]);
    let omega_q = q.transpose() * forms::form_matrix(m, gamma, &basis)? * &q;
    Ok(forms::rank_profile_of_matrix(
        &(null.transpose() * omega_q * null),
    ))
}

/// Numeric kernel dimension of `dα` restricted to `ker α` on the level set.
pub fn quasi_contact_kernel(m: &Manifold, gamma: &DiscreteLoop, k_max: usize, based: bool) -> Result<usize> {
    Ok(quasi_contact_profile(m, gamma, k_max, based)?.kernel_dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;
    use std::f64::consts::PI;

    fn unit_circle(n: usize) -> DiscreteLoop {
        let r = 0.5 / PI;
        DiscreteLoop::closed_from_fn(n, dvector![0.0, 0.0], |t| {
            dvector![r * (2.0 * PI * t).cos(), r * (2.0 * PI * t).sin()]
        })
        .unwrap()
    }

    #[test]
    fn lift_on_stabilized_is_unit_time() {
        let m = Manifold::stabilized(Manifold::euclidean(1));
        let g = DiscreteLoop::closed_from_fn(32, dvector![0.0, 0.0], |t| {
            dvector![(2.0 * PI * t).cos(), (2.0 * PI * t).sin()]
        })
        .unwrap();
        let x = lift_field(&m, &g).unwrap();
        assert!(x.vectors().iter().all(|v| v == &dvector![0.0, 1.0]));
    }

    #[test]
    fn reeb_on_unit_circle() {
        let m = Manifold::euclidean(2);
        let g = unit_circle(256);
        let r = reeb_field(&m, &g).unwrap();
        assert!((alpha(&m, &g, &r).unwrap().alpha_value - 1.0).abs() < 1e-7);
        assert!((alpha(&m, &g, &r.scaled(0.5)).unwrap().alpha_value - 0.5).abs() < 1e-7);
        let back = reeb_flow(&m, &g, 0.5).unwrap();
        assert!(back.sup_distance(&g) < 1e-9);
        let quarter = reeb_flow(&m, &g, 0.25).unwrap();
        let r0 = 0.5 / PI;
        let want = DiscreteLoop::closed_from_fn(256, dvector![0.0, 0.0], |t| {
            dvector![-r0 * (2.0 * PI * t).cos(), -r0 * (2.0 * PI * t).sin()]
        })
        .unwrap();
        assert!(quarter.sup_distance(&want) < 1e-9);
    }

    #[test]
    fn off_level_set_rejected() {
        let m = Manifold::euclidean(2);
        let g = DiscreteLoop::closed_from_fn(64, dvector![0.0, 0.0], |t| {
            dvector![(2.0 * PI * t).cos(), (2.0 * PI * t).sin()]
        })
        .unwrap();
        assert!(matches!(reeb_field(&m, &g), Err(GeomError::NotOnLevelSet { .. })));
        assert!(matches!(reeb_flow(&m, &g, 0.1), Err(GeomError::NotOnLevelSet { .. })));
    }

    #[test]
    fn length_derivative_is_half_length() {
        let m = Manifold::euclidean(2);
        let g = DiscreteLoop::closed_from_fn(128, dvector![0.0, 0.0], |t| {
            dvector![(2.0 * PI * t).cos(), (2.0 * PI * t).sin()]
        })
        .unwrap();
        assert!((length_derivative(&m, &g, 1e-4).unwrap() - PI).abs() < 1e-5);
    }

    #[test]
    fn contact_kernels() {
        let m = Manifold::euclidean(2);
        let g = unit_circle(256);
        assert_eq!(quasi_contact_kernel(&m, &g, 6, false).unwrap(), 2);
        let gb = g.clone().with_basepoint_fixed(true);
        assert_eq!(quasi_contact_kernel(&m, &gb, 6, true).unwrap(), 0);
        let y = curve::random_tangent_field(&g, 3, 6, false).unwrap();
        let t = project_tangent_to_level(&m, &g, &y, 6).unwrap();
        assert!(length_variation(&m, &g, &t).unwrap().abs() < 1e-12);
    }
}
