//! Almost complex structure on based loops.
//!
//! A based field is trivialized (by développement, or by left translation on
//! a group), its Fourier coefficients `a_k` are multiplied by `i·sign(k)`
//! with `a_0` fixed, and the value at `t = 0` is subtracted so the result is
//! again based.
//!
//! At finite even `N` the Nyquist coefficient has no sign partner and is
//! discarded, so `Ĵ² = −Id` holds exactly on fields whose trivialization has
//! no Nyquist content. [`AcsOperator::project_to_domain`] removes it.

use crate::curve::{self, DiscreteLoop, TangentField};
use crate::error::{GeomError, Result};
use crate::manifold::{so3_right_jacobian, Manifold, ManifoldKind};
use crate::spectral;
use crate::transport::{self, DevelopedField, HolonomyRecord, DEFAULT_SUBSTEPS};
use nalgebra::{DMatrix, DVector};
use rustfft::num_complex::Complex64;
use std::f64::consts::PI;

/// Tolerance for the imaginary part of [`omega_fourier`], relative to the
/// absolute sum of its terms.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Fourier coefficients `a_k`, `k = −K..K` with `K = N/2 − 1`, of a real
/// vector-valued function on the periodic grid: `f(t_j) = Σ a_k e^{2πik t_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    coeffs: Vec<DVector<Complex64>>,
    samples: usize,
}

impl FourierField {
    pub fn max_mode(&self) -> i64 {
        (self.coeffs.len() as i64 - 1) / 2
    }

    /// `a_k`; panics if `|k| > K`.
    pub fn coeff(&self, k: i64) -> &DVector<Complex64> {
        &self.coeffs[(k + self.max_mode()) as usize]
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn dim(&self) -> usize {
        self.coeffs.first().map(|c| c.len()).unwrap_or(0)
    }

    /// `max_k ‖a_{−k} − conj(a_k)‖`.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let kk = self.max_mode();
        (0..=kk)
            .map(|k| (self.coeff(-k) - self.coeff(k).conjugate()).norm())
            .fold(0.0, f64::max)
    }

    /// `Σ_k a_k`, the value at `t = 0`.
    pub fn value_at_zero(&self) -> DVector<Complex64> {
        let mut s = DVector::zeros(self.dim());
        for c in &self.coeffs {
            s += c;
        }
        s
    }

    /// Resample on the original grid.
    pub fn to_samples(&self) -> DevelopedField {
        let n = self.samples;
        let kk = self.max_mode();
        let comps: Vec<Vec<f64>> = (0..self.dim())
            .map(|d| {
                let mut spec = vec![Complex64::new(0.0, 0.0); n];
                for k in -kk..=kk {
                    spec[k.rem_euclid(n as i64) as usize] = self.coeff(k)[d];
                }
                spectral::idft(&spec)
            })
            .collect();
        DevelopedField::from_components(&comps)
    }
}

/// DFT of a developed field, Nyquist mode dropped.
pub fn to_fourier(f: &DevelopedField) -> FourierField {
    let n = f.len();
    let kk = (n / 2) as i64 - 1;
    let spectra: Vec<Vec<Complex64>> = (0..f.dim()).map(|d| spectral::dft(&f.component(d))).collect();
    let coeffs = (-kk..=kk)
        .map(|k| {
            let j = k.rem_euclid(n as i64) as usize;
            DVector::from_fn(f.dim(), |d, _| spectra[d][j])
        })
        .collect();
    FourierField { coeffs, samples: n }
}

/// `⟨a, b⟩ = Σ_i a_i conj(b_i)`.
fn hermitian(a: &DVector<Complex64>, b: &DVector<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

/// `Σ_k 2πik ⟨a_k, b_k⟩` before taking the real part.
pub fn omega_fourier_complex(a: &FourierField, b: &FourierField) -> Complex64 {
    let kk = a.max_mode().min(b.max_mode());
    (-kk..=kk)
        .map(|k| Complex64::new(0.0, 2.0 * PI * k as f64) * hermitian(a.coeff(k), b.coeff(k)))
        .sum()
}

/// `ω = Σ_k 2πik ⟨a_k, b_k⟩`. The sum is real for real sources; debug
/// builds assert the imaginary residue is negligible.
pub fn omega_fourier(a: &FourierField, b: &FourierField) -> f64 {
    let z = omega_fourier_complex(a, b);
    debug_assert!(
        z.im.abs() <= IMAG_RESIDUE_TOL * (1.0 + fourier_scale(a, b)),
        "imaginary residue {} in omega_fourier",
        z.im
    );
    z.re
}

pub(crate) fn fourier_scale(a: &FourierField, b: &FourierField) -> f64 {
    let kk = a.max_mode().min(b.max_mode());
    (-kk..=kk)
        .map(|k| 2.0 * PI * k.abs() as f64 * a.coeff(k).norm() * b.coeff(k).norm())
        .sum()
}

/// `Σ_{k>0} 2πk Re(⟨a_k, b_k⟩ + ⟨a_{−k}, b_{−k}⟩)`.
pub fn compat_metric_fourier(a: &FourierField, b: &FourierField) -> f64 {
    let kk = a.max_mode().min(b.max_mode());
    (1..=kk)
        .map(|k| {
            2.0 * PI
                * k as f64
                * (hermitian(a.coeff(k), b.coeff(k)) + hermitian(a.coeff(-k), b.coeff(-k))).re
        })
        .sum()
}

/// `J̃` followed by subtraction of the value at 0, on samples.
pub fn multiplier(f: &DevelopedField) -> DevelopedField {
    let n = f.len();
    let comps: Vec<Vec<f64>> = (0..f.dim())
        .map(|d| {
            let mut spec = spectral::dft(&f.component(d));
            for (j, c) in spec.iter_mut().enumerate() {
                let k = spectral::frequency(j, n);
                if spectral::nyquist_bin(n) == Some(j) {
                    *c = Complex64::new(0.0, 0.0);
                } else if k != 0 {
                    *c *= Complex64::new(0.0, k.signum() as f64);
                }
            }
            let mut vals = spectral::idft(&spec);
            let v0 = vals[0];
            vals.iter_mut().for_each(|v| *v -= v0);
            vals
        })
        .collect();
    DevelopedField::from_components(&comps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcsMode {
    Developpement,
    LeftTrivialization,
}

impl AcsMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AcsMode::Developpement => "developpement",
            AcsMode::LeftTrivialization => "left_trivialization",
        }
    }
}

#[derive(Debug, Clone)]
enum Trivialization {
    Frames(HolonomyRecord),
    /// Per-sample maps to the Lie algebra and their inverses.
    Left(Vec<(DMatrix<f64>, DMatrix<f64>)>),
}

/// `Ĵ` at a fixed based loop, with the trivialization precomputed.
#[derive(Debug, Clone)]
pub struct AcsOperator {
    mode: AcsMode,
    manifold: Manifold,
    base: DiscreteLoop,
    triv: Trivialization,
}

impl AcsOperator {
    pub fn new(mode: AcsMode, m: &Manifold, gamma: &DiscreteLoop) -> Result<Self> {
        if !gamma.is_periodic() {
            return Err(GeomError::PathVariant);
        }
        gamma.validate(m)?;
        let triv = match mode {
            AcsMode::Developpement => Trivialization::Frames(transport::parallel_transport_with(
                m,
                gamma,
                None,
                DEFAULT_SUBSTEPS,
            )?),
            AcsMode::LeftTrivialization => {
                Trivialization::Left(left_maps(m, gamma, "AcsOperator::left_trivialization")?)
            }
        };
        Ok(Self {
            mode,
            manifold: m.clone(),
            base: gamma.clone(),
            triv,
        })
    }

    pub fn developpement(m: &Manifold, gamma: &DiscreteLoop) -> Result<Self> {
        Self::new(AcsMode::Developpement, m, gamma)
    }

    pub fn left_trivialization(m: &Manifold, gamma: &DiscreteLoop) -> Result<Self> {
        Self::new(AcsMode::LeftTrivialization, m, gamma)
    }

    pub fn mode(&self) -> AcsMode {
        self.mode
    }

    pub fn base_loop(&self) -> &DiscreteLoop {
        &self.base
    }

    pub fn manifold(&self) -> &Manifold {
        &self.manifold
    }

    fn check_field(&self, u: &TangentField, based: bool) -> Result<()> {
        if u.len() != self.base.n() {
            return Err(GeomError::InvalidCurve(format!(
                "field has {} samples, loop has {}",
                u.len(),
                self.base.n()
            )));
        }
        if u.dim() != self.base.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: self.base.dim(),
                actual: u.dim(),
            });
        }
        if based {
            let norm = u.vectors()[0].norm();
            if norm > curve::BASED_TOLERANCE {
                return Err(GeomError::NotBasedField { norm });
            }
        }
        Ok(())
    }

    /// The trivialized field `Û`.
    pub fn develop(&self, u: &TangentField) -> Result<DevelopedField> {
        self.check_field(u, false)?;
        match &self.triv {
            Trivialization::Frames(rec) => transport::develop_with(&self.manifold, &self.base, rec, u),
            Trivialization::Left(maps) => Ok(DevelopedField {
                values: maps.iter().zip(u.vectors()).map(|((a, _), v)| a * v).collect(),
            }),
        }
    }

    pub fn undevelop(&self, f: &DevelopedField) -> TangentField {
        match &self.triv {
            Trivialization::Frames(rec) => transport::undevelop_with(rec, f),
            Trivialization::Left(maps) => TangentField::new(
                maps.iter().zip(&f.values).map(|((_, b), v)| b * v).collect(),
            ),
        }
    }

    /// `Ĵ(U)`.
    pub fn apply_j(&self, u: &TangentField) -> Result<TangentField> {
        self.check_field(u, true)?;
        let out = self.undevelop(&multiplier(&self.develop(u)?));
        Ok(out.refresh_based())
    }

    /// Removes the Nyquist content of `Û` and re-bases, producing a field on
    /// which `Ĵ² = −Id` holds to rounding.
    pub fn project_to_domain(&self, u: &TangentField) -> Result<TangentField> {
        let dev = self.develop(u)?;
        let n = dev.len();
        let comps: Vec<Vec<f64>> = (0..dev.dim())
            .map(|d| {
                let mut spec = spectral::dft(&dev.component(d));
                if let Some(j) = spectral::nyquist_bin(n) {
                    spec[j] = Complex64::new(0.0, 0.0);
                }
                let mut vals = spectral::idft(&spec);
                let v0 = vals[0];
                vals.iter_mut().for_each(|v| *v -= v0);
                vals
            })
            .collect();
        Ok(self
            .undevelop(&DevelopedField::from_components(&comps))
            .refresh_based())
    }

    pub fn fourier(&self, u: &TangentField) -> Result<FourierField> {
        Ok(to_fourier(&self.develop(u)?))
    }

    /// `ω(U, V)` through the Fourier expression.
    pub fn omega_fourier(&self, u: &TangentField, v: &TangentField) -> Result<f64> {
        Ok(omega_fourier(&self.fourier(u)?, &self.fourier(v)?))
    }

    /// `g(U, V) = ω(U, ĴV)` in closed form.
    pub fn compat_metric(&self, u: &TangentField, v: &TangentField) -> Result<f64> {
        self.check_field(u, true)?;
        self.check_field(v, true)?;
        Ok(compat_metric_fourier(&self.fourier(u)?, &self.fourier(v)?))
    }
}

fn left_maps(
    m: &Manifold,
    gamma: &DiscreteLoop,
    op: &'static str,
) -> Result<Vec<(DMatrix<f64>, DMatrix<f64>)>> {
    match m.kind() {
        ManifoldKind::RotationGroup3 => gamma
            .samples()
            .iter()
            .map(|p| {
                let jr = so3_right_jacobian(p);
                let inv = jr.clone().try_inverse().ok_or_else(|| {
                    GeomError::ChartDomain(format!("singular right Jacobian at {p:?}"))
                })?;
                Ok((jr, inv))
            })
            .collect(),
        ManifoldKind::FlatTorus(n) => Ok(vec![
            (DMatrix::identity(*n, *n), DMatrix::identity(*n, *n));
            gamma.n()
        ]),
        _ => Err(GeomError::UnsupportedManifold {
            op,
            manifold: m.to_string(),
        }),
    }
}

/// `dL_{γ(t)}⁻¹ U(t)` on a group manifold.
pub fn left_trivialize(m: &Manifold, gamma: &DiscreteLoop, u: &TangentField) -> Result<DevelopedField> {
    let maps = left_maps(m, gamma, "left_trivialize")?;
    Ok(DevelopedField {
        values: maps.iter().zip(u.vectors()).map(|((a, _), v)| a * v).collect(),
    })
}

/// Sup-norm difference between `Ĵ` at `gamma` and at `gamma_near`, both read
/// in their développement trivializations, on the developed test field of `u`.
pub fn chart_constancy_check(
    m: &Manifold,
    gamma: &DiscreteLoop,
    gamma_near: &DiscreteLoop,
    u: &TangentField,
) -> Result<f64> {
    let a = AcsOperator::developpement(m, gamma)?;
    let b = AcsOperator::developpement(m, gamma_near)?;
    let hat = a.develop(u)?;
    let u_near = b.undevelop(&hat).refresh_based();
    let ja = a.develop(&a.apply_j(u)?)?;
    let jb = b.develop(&b.apply_j(&u_near)?)?;
    Ok(ja.max_diff(&jb))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn circle(n: usize) -> DiscreteLoop {
        DiscreteLoop::closed_from_fn(n, dvector![0.0, 0.0], |t| {
            dvector![(2.0 * PI * t).cos() - 1.0, (2.0 * PI * t).sin()]
        })
        .unwrap()
    }

    #[test]
    fn fourier_of_sine() {
        let g = circle(64);
        let f = DevelopedField {
            values: (0..64).map(|j| dvector![(2.0 * PI * g.param(j)).sin(), 1.0]).collect(),
        };
        let a = to_fourier(&f);
        assert!((a.coeff(1)[0] - Complex64::new(0.0, -0.5)).norm() < 1e-14);
        assert!((a.coeff(-1)[0] - Complex64::new(0.0, 0.5)).norm() < 1e-14);
        assert!((a.coeff(0)[1] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(a.to_samples().max_diff(&f) < 1e-13);
    }

    #[test]
    fn j_of_sine_is_cos_minus_one() {
        let m = Manifold::euclidean(2);
        let g = circle(128);
        let op = AcsOperator::developpement(&m, &g).unwrap();
        let u = TangentField::from_fn(&g, |t| dvector![(2.0 * PI * t).sin(), 0.0]).refresh_based();
        let ju = op.apply_j(&u).unwrap();
        let want = TangentField::from_fn(&g, |t| dvector![(2.0 * PI * t).cos() - 1.0, 0.0]);
        assert!(ju.minus(&want).max_norm() < 1e-9);
        let jju = op.apply_j(&ju).unwrap();
        assert!(jju.plus(&u).max_norm() < 1e-12);
        assert!((op.compat_metric(&u, &u).unwrap() - PI).abs() < 1e-9);
        assert!((op.omega_fourier(&u, &ju).unwrap() - PI).abs() < 1e-9);
    }

    #[test]
    fn unbased_field_rejected() {
        let m = Manifold::euclidean(2);
        let g = circle(64);
        let op = AcsOperator::developpement(&m, &g).unwrap();
        let u = TangentField::new(vec![dvector![1.0, 0.0]; 64]);
        assert!(matches!(op.apply_j(&u), Err(GeomError::NotBasedField { .. })));
    }

    #[test]
    fn left_trivialization_rejects_sphere() {
        let m = Manifold::sphere(1.0);
        let g = DiscreteLoop::closed_from_fn(32, dvector![0.0, 2.0 * PI], |t| dvector![1.0, 2.0 * PI * t]).unwrap();
        assert!(matches!(
            AcsOperator::left_trivialization(&m, &g),
            Err(GeomError::UnsupportedManifold { .. })
        ));
    }
}
