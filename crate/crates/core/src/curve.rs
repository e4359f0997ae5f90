//! Sampled loops, paths and tangent fields along them.

use crate::error::{GeomError, Result};
use crate::manifold::{ManifoldKind, Manifold};
use crate::spectral::{self, TrigInterpolant};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

/// Smallest admissible sample count.
pub const MIN_SAMPLES: usize = 16;
/// Default sample count for loops.
pub const DEFAULT_LOOP_SAMPLES: usize = 512;
/// Default sample count for paths.
pub const DEFAULT_PATH_SAMPLES: usize = 513;

/// A sampled closed loop (`t_j = j/N`) or open path (`t_j = j/(N−1)`).
///
/// Loops may wind around a periodic chart direction: the lifted coordinates
/// satisfy `x(t + 1) = x(t) + winding`. Paths always have zero winding.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLoop {
    samples: Vec<DVector<f64>>,
    periodic: bool,
    basepoint_fixed: bool,
    winding: DVector<f64>,
}

impl DiscreteLoop {
    fn validate_shape(samples: &[DVector<f64>], periodic: bool) -> Result<usize> {
        let n = samples.len();
        if n < MIN_SAMPLES {
            return Err(GeomError::InvalidCurve(format!(
                "need at least {MIN_SAMPLES} samples, got {n}"
            )));
        }
        if periodic && n % 2 != 0 {
            return Err(GeomError::InvalidCurve(format!(
                "loops need an even sample count, got {n}"
            )));
        }
        let dim = samples[0].len();
        if let Some(bad) = samples.iter().find(|s| s.len() != dim) {
            return Err(GeomError::DimensionMismatch {
                expected: dim,
                actual: bad.len(),
            });
        }
        Ok(dim)
    }

    /// Closed loop from lifted samples and the deck translation `winding`.
    pub fn closed(samples: Vec<DVector<f64>>, winding: DVector<f64>) -> Result<Self> {
        let dim = Self::validate_shape(&samples, true)?;
        if winding.len() != dim {
            return Err(GeomError::DimensionMismatch {
                expected: dim,
                actual: winding.len(),
            });
        }
        Ok(Self {
            samples,
            periodic: true,
            basepoint_fixed: false,
            winding,
        })
    }

    /// Closed loop sampling `f` on `t_j = j/N`; `f(1) = f(0) + winding`.
    pub fn closed_from_fn(
        n: usize,
        winding: DVector<f64>,
        f: impl Fn(f64) -> DVector<f64>,
    ) -> Result<Self> {
        let samples = (0..n).map(|j| f(j as f64 / n as f64)).collect();
        Self::closed(samples, winding)
    }

    pub fn path(samples: Vec<DVector<f64>>) -> Result<Self> {
        let dim = Self::validate_shape(&samples, false)?;
        Ok(Self {
            samples,
            periodic: false,
            basepoint_fixed: false,
            winding: DVector::zeros(dim),
        })
    }

    pub fn path_from_fn(n: usize, f: impl Fn(f64) -> DVector<f64>) -> Result<Self> {
        let samples = (0..n)
            .map(|j| f(j as f64 / (n - 1).max(1) as f64))
            .collect();
        Self::path(samples)
    }

    /// Mark the curve as a member of the based space (`γ(0)` fixed).
    pub fn with_basepoint_fixed(mut self, fixed: bool) -> Self {
        self.basepoint_fixed = fixed;
        self
    }

    pub fn samples(&self) -> &[DVector<f64>] {
        &self.samples
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].len()
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn basepoint_fixed(&self) -> bool {
        self.basepoint_fixed
    }

    pub fn winding(&self) -> &DVector<f64> {
        &self.winding
    }

    /// Parameter of sample `j`.
    pub fn param(&self, j: usize) -> f64 {
        if self.periodic {
            j as f64 / self.n() as f64
        } else {
            j as f64 / (self.n() - 1) as f64
        }
    }

    /// Grid spacing.
    pub fn spacing(&self) -> f64 {
        if self.periodic {
            1.0 / self.n() as f64
        } else {
            1.0 / (self.n() - 1) as f64
        }
    }

    /// Every sample admissible in the chart of `m`.
    pub fn validate(&self, m: &Manifold) -> Result<()> {
        if self.dim() != m.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: m.dim(),
                actual: self.dim(),
            });
        }
        for (j, p) in self.samples.iter().enumerate() {
            m.check_point(p).map_err(|e| match e {
                GeomError::ChartDomain(msg) => GeomError::ChartDomain(format!("sample {j}: {msg}")),
                other => other,
            })?;
        }
        Ok(())
    }

    /// Coordinate `d` with the winding ramp removed (periodic for loops).
    pub fn periodic_component(&self, d: usize) -> Vec<f64> {
        let w = self.winding[d];
        self.samples
            .iter()
            .enumerate()
            .map(|(j, p)| p[d] - w * self.param(j))
            .collect()
    }

    /// Off-grid evaluator of a loop's position and velocity.
    pub fn interpolant(&self) -> Result<LoopInterpolant> {
        if !self.periodic {
            return Err(GeomError::PathVariant);
        }
        Ok(LoopInterpolant {
            coords: (0..self.dim())
                .map(|d| TrigInterpolant::new(&self.periodic_component(d)))
                .collect(),
            winding: self.winding.clone(),
        })
    }

    /// Same curve metadata with replaced samples.
    pub fn with_samples(&self, samples: Vec<DVector<f64>>) -> Result<Self> {
        let mut out = if self.periodic {
            Self::closed(samples, self.winding.clone())?
        } else {
            Self::path(samples)?
        };
        out.basepoint_fixed = self.basepoint_fixed;
        Ok(out)
    }

    /// Same samples with a different winding vector.
    pub fn with_winding(mut self, winding: DVector<f64>) -> Result<Self> {
        if winding.len() != self.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim(),
                actual: winding.len(),
            });
        }
        self.winding = winding;
        Ok(self)
    }

    /// Largest chart distance between corresponding samples.
    pub fn sup_distance(&self, other: &DiscreteLoop) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `sup_distance` after moving `other` by whole chart periods so that the
    /// basepoints are as close as possible: the distance of the curves in M.
    pub fn sup_distance_on(&self, m: &Manifold, other: &DiscreteLoop) -> f64 {
        let mut shift = DVector::zeros(self.dim());
        for (d, period) in m.chart_periods().iter().enumerate() {
            if let Some(p) = period {
                shift[d] = p * ((self.samples[0][d] - other.samples[0][d]) / p).round();
            }
        }
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b - &shift).norm())
            .fold(0.0, f64::max)
    }
}

/// Trigonometric interpolation of a closed loop, winding included.
#[derive(Debug, Clone)]
pub struct LoopInterpolant {
    coords: Vec<TrigInterpolant>,
    winding: DVector<f64>,
}

impl LoopInterpolant {
    pub fn position(&self, t: f64) -> DVector<f64> {
        DVector::from_fn(self.coords.len(), |d, _| {
            self.coords[d].eval(t) + self.winding[d] * t
        })
    }

    pub fn position_velocity(&self, t: f64) -> (DVector<f64>, DVector<f64>) {
        let n = self.coords.len();
        let mut x = DVector::zeros(n);
        let mut v = DVector::zeros(n);
        for d in 0..n {
            let (a, b) = self.coords[d].eval_with_derivative(t);
            x[d] = a + self.winding[d] * t;
            v[d] = b + self.winding[d];
        }
        (x, v)
    }
}

/// A vector field sampled along a curve; `vectors[j]` is attached at sample `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentField {
    vectors: Vec<DVector<f64>>,
    vanishes_at_base: bool,
}

/// Threshold for `‖U(0)‖` below which a field counts as based.
pub const BASED_TOLERANCE: f64 = 1e-12;

impl TangentField {
    pub fn new(vectors: Vec<DVector<f64>>) -> Self {
        Self {
            vectors,
            vanishes_at_base: false,
        }
    }

    pub fn zeros(n: usize, dim: usize) -> Self {
        Self {
            vectors: vec![DVector::zeros(dim); n],
            vanishes_at_base: true,
        }
    }

    /// Field tangent to the based space. Fails unless `‖U(0)‖ < 1e-12`.
    pub fn based(vectors: Vec<DVector<f64>>) -> Result<Self> {
        let norm = vectors.first().map(|v| v.norm()).unwrap_or(0.0);
        if norm >= BASED_TOLERANCE {
            return Err(GeomError::NotBasedField { norm });
        }
        Ok(Self {
            vectors,
            vanishes_at_base: true,
        })
    }

    pub fn from_fn(gamma: &DiscreteLoop, f: impl Fn(f64) -> DVector<f64>) -> Self {
        Self::new((0..gamma.n()).map(|j| f(gamma.param(j))).collect())
    }

    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.vectors
    }

    pub fn into_vectors(self) -> Vec<DVector<f64>> {
        self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map(|v| v.len()).unwrap_or(0)
    }

    pub fn vanishes_at_base(&self) -> bool {
        self.vanishes_at_base
    }

    /// Recompute the based flag from the data.
    pub fn refresh_based(mut self) -> Self {
        self.vanishes_at_base = self
            .vectors
            .first()
            .map(|v| v.norm() < BASED_TOLERANCE)
            .unwrap_or(true);
        self
    }

    pub fn component(&self, d: usize) -> Vec<f64> {
        self.vectors.iter().map(|v| v[d]).collect()
    }

    pub fn from_components(components: &[Vec<f64>]) -> Self {
        let n = components[0].len();
        Self::new(
            (0..n)
                .map(|j| DVector::from_fn(components.len(), |d, _| components[d][j]))
                .collect(),
        )
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            vectors: self.vectors.iter().map(|v| v * c).collect(),
            vanishes_at_base: self.vanishes_at_base,
        }
    }

    pub fn plus(&self, other: &TangentField) -> Self {
        Self::new(
            self.vectors
                .iter()
                .zip(&other.vectors)
                .map(|(a, b)| a + b)
                .collect(),
        )
        .refresh_based()
    }

    pub fn minus(&self, other: &TangentField) -> Self {
        self.plus(&other.scaled(-1.0))
    }

    /// Largest chart-coordinate Euclidean norm over the samples.
    pub fn max_norm(&self) -> f64 {
        self.vectors.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Sampled velocity γ' (the canonical section ξ). Spectral for loops,
/// eighth-order finite differences for paths.
pub fn velocity(gamma: &DiscreteLoop) -> TangentField {
    let comps: Vec<Vec<f64>> = (0..gamma.dim())
        .map(|d| {
            if gamma.is_periodic() {
                let w = gamma.winding()[d];
                spectral::periodic_derivative(&gamma.periodic_component(d))
                    .into_iter()
                    .map(|x| x + w)
                    .collect()
            } else {
                let vals: Vec<f64> = gamma.samples().iter().map(|p| p[d]).collect();
                spectral::open_derivative(&vals)
            }
        })
        .collect();
    TangentField::from_components(&comps)
}

/// Derivative in the parameter of a field along the curve (no connection term).
pub fn parameter_derivative(gamma: &DiscreteLoop, field: &TangentField) -> TangentField {
    let comps: Vec<Vec<f64>> = (0..field.dim())
        .map(|d| {
            let c = field.component(d);
            if gamma.is_periodic() {
                spectral::periodic_derivative(&c)
            } else {
                spectral::open_derivative(&c)
            }
        })
        .collect();
    TangentField::from_components(&comps)
}

/// `∫_0^1 f(t) dt` of samples on the curve's grid: periodic trapezoid for
/// loops, the high-order open rule for paths.
pub fn integrate(gamma: &DiscreteLoop, values: &[f64]) -> f64 {
    if gamma.is_periodic() {
        values.iter().sum::<f64>() / values.len() as f64
    } else {
        spectral::open_quadrature_weights(values.len())
            .iter()
            .zip(values)
            .map(|(w, v)| w * v)
            .sum()
    }
}

/// g-inner product of two fields at every sample.
pub fn pointwise_inner(
    m: &Manifold,
    gamma: &DiscreteLoop,
    a: &TangentField,
    b: &TangentField,
) -> Result<Vec<f64>> {
    gamma
        .samples()
        .iter()
        .zip(a.vectors().iter().zip(b.vectors()))
        .map(|(p, (u, v))| Ok(u.dot(&(m.metric_at(p)? * v))))
        .collect()
}

/// `‖γ'(t_j)‖_g` at every sample.
pub fn speeds(m: &Manifold, gamma: &DiscreteLoop) -> Result<Vec<f64>> {
    let v = velocity(gamma);
    Ok(pointwise_inner(m, gamma, &v, &v)?
        .into_iter()
        .map(|s| s.max(0.0).sqrt())
        .collect())
}

/// Riemannian length.
pub fn length(m: &Manifold, gamma: &DiscreteLoop) -> Result<f64> {
    Ok(integrate(gamma, &speeds(m, gamma)?))
}

const DEGENERATE_LENGTH: f64 = 1e-10;

/// Solve `σ(t) = target` for a monotone σ with derivative `speed`; `lo ≤ t ≤ hi` brackets the root.
fn invert_monotone(
    target: f64,
    mut guess: f64,
    mut lo: f64,
    mut hi: f64,
    sigma: impl Fn(f64) -> (f64, f64),
) -> f64 {
    for _ in 0..100 {
        let (s, ds) = sigma(guess);
        let r = s - target;
        if r.abs() < 1e-15 {
            return guess;
        }
        if r > 0.0 {
            hi = guess;
        } else {
            lo = guess;
        }
        let newton = guess - r / ds;
        guess = if ds > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo < 1e-16 {
            break;
        }
    }
    guess
}

/// Arclength-anchored parametrization tools for a closed loop.
#[derive(Debug, Clone)]
pub(crate) struct ArclengthMap {
    speed: TrigInterpolant,
    length: f64,
    curve: LoopInterpolant,
}

impl ArclengthMap {
    pub(crate) fn new(m: &Manifold, gamma: &DiscreteLoop) -> Result<Self> {
        let s = speeds(m, gamma)?;
        let speed = TrigInterpolant::new(&s);
        let length = speed.mean();
        if length < DEGENERATE_LENGTH {
            return Err(GeomError::DegenerateLoop { length });
        }
        Ok(Self {
            speed,
            length,
            curve: gamma.interpolant()?,
        })
    }

    pub(crate) fn length(&self) -> f64 {
        self.length
    }

    /// Cumulative arclength from t = 0 and its derivative.
    pub(crate) fn sigma(&self, t: f64) -> (f64, f64) {
        (
            self.length * t + self.speed.eval_antiderivative(t),
            self.speed.eval(t),
        )
    }

    /// Parameter (on the lifted line) at which cumulative arclength equals `s`.
    pub(crate) fn param_at_arclength(&self, s: f64) -> f64 {
        let turns = (s / self.length).floor();
        let rem = s - turns * self.length;
        let t = invert_monotone(rem, rem / self.length, 0.0, 1.0, |t| self.sigma(t));
        t + turns
    }

    /// Lifted position at parameter `t` (any real), honouring the winding.
    pub(crate) fn position(&self, t: f64) -> DVector<f64> {
        let turns = t.floor();
        self.curve.position(t - turns) + &self.curve.winding * turns
    }
}

/// Constant-speed reparametrization with the same image and basepoint.
pub fn arclength_reparam(m: &Manifold, gamma: &DiscreteLoop) -> Result<DiscreteLoop> {
    gamma.validate(m)?;
    if gamma.is_periodic() {
        let map = ArclengthMap::new(m, gamma)?;
        let n = gamma.n();
        let samples = (0..n)
            .map(|j| map.position(map.param_at_arclength(map.length() * j as f64 / n as f64)))
            .collect();
        gamma.with_samples(samples)
    } else {
        let s = speeds(m, gamma)?;
        let h = gamma.spacing();
        let cum = spectral::cumulative_trapezoid(&s, h);
        let total = *cum.last().unwrap();
        if total < DEGENERATE_LENGTH {
            return Err(GeomError::DegenerateLoop { length: total });
        }
        let n = gamma.n();
        let samples = (0..n)
            .map(|j| {
                let target = total * j as f64 / (n - 1) as f64;
                let idx = match cum.binary_search_by(|c| c.partial_cmp(&target).unwrap()) {
                    Ok(i) => i.min(n - 2),
                    Err(i) => i.saturating_sub(1).min(n - 2),
                };
                let seg = cum[idx + 1] - cum[idx];
                let frac = if seg > 0.0 { (target - cum[idx]) / seg } else { 0.0 };
                cubic_sample(gamma.samples(), idx as f64 + frac)
            })
            .collect();
        gamma.with_samples(samples)
    }
}

/// Four-point Lagrange cubic interpolation of samples at fractional index `x`.
fn cubic_sample(samples: &[DVector<f64>], x: f64) -> DVector<f64> {
    let n = samples.len();
    let base = (x.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let nodes: Vec<f64> = (0..4).map(|i| (base + i) as f64).collect();
    let w = spectral::fornberg_weights(x, &nodes, 0);
    (0..4).fold(DVector::zeros(samples[0].len()), |acc, i| {
        acc + &samples[base + i] * w[0][i]
    })
}

/// Rescale a curve into the length-one hypersurface: coordinate scaling on
/// Euclidean space, a shift `t ↦ t − 2 ln L` of the stabilizing coordinate
/// on stabilized manifolds (where `ψ_s^* g = e^s g`).
pub fn scale_to_unit_length(m: &Manifold, gamma: &DiscreteLoop) -> Result<DiscreteLoop> {
    let len = length(m, gamma)?;
    if len < DEGENERATE_LENGTH {
        return Err(GeomError::DegenerateLoop { length: len });
    }
    let out = match m.kind() {
        ManifoldKind::Euclidean(_) => {
            let samples = gamma.samples().iter().map(|p| p / len).collect();
            let mut out = gamma.with_samples(samples)?;
            out.winding = gamma.winding() / len;
            out
        }
        ManifoldKind::Stabilized(_) => {
            let shift = -2.0 * len.ln();
            let last = m.dim() - 1;
            let samples = gamma
                .samples()
                .iter()
                .map(|p| {
                    let mut q = p.clone();
                    q[last] += shift;
                    q
                })
                .collect();
            gamma.with_samples(samples)?
        }
        _ => {
            return Err(GeomError::UnsupportedManifold {
                op: "scale_to_unit_length",
                manifold: m.to_string(),
            })
        }
    };
    Ok(out)
}

/// Deterministic band-limited random field along `gamma`.
///
/// Loops use modes `|k| ≤ k_max`. Based loop fields are `w(t)·sin⁴(πt)` with
/// `w` of band `k_max − 2`, so they vanish to fourth order at the basepoint
/// (for `k_max < 2` the field is `w − w(0)`). Paths use `cos(πkt)` modes, or
/// `sin(πkt)` modes vanishing at both ends when based, `k ≤ 2·k_max`.
pub fn random_tangent_field(
    gamma: &DiscreteLoop,
    seed: u64,
    k_max: usize,
    based: bool,
) -> Result<TangentField> {
    let n = gamma.n();
    if gamma.is_periodic() && 2 * k_max >= n {
        return Err(GeomError::BasisTooLarge {
            size: k_max,
            samples: n,
        });
    }
    let dim = gamma.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let mut comps = vec![vec![0.0; n]; dim];
    if gamma.is_periodic() {
        let windowed = based && k_max >= 2;
        let band = if windowed { k_max - 2 } else { k_max };
        for comp in comps.iter_mut() {
            let coeffs: Vec<(f64, f64)> = (0..=band)
                .map(|k| {
                    let damp = 1.0 / (1.0 + k as f64);
                    (normal() * damp, if k == 0 { 0.0 } else { normal() * damp })
                })
                .collect();
            let eval = |t: f64| -> f64 {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, (a, b))| {
                        let x = 2.0 * PI * k as f64 * t;
                        a * x.cos() + b * x.sin()
                    })
                    .sum()
            };
            let w0 = eval(0.0);
            for (j, c) in comp.iter_mut().enumerate() {
                let t = gamma.param(j);
                *c = if windowed {
                    eval(t) * (PI * t).sin().powi(4)
                } else if based {
                    eval(t) - w0
                } else {
                    eval(t)
                };
            }
            if based {
                comp[0] = 0.0;
            }
        }
    } else {
        for comp in comps.iter_mut() {
            let modes: Vec<(usize, f64)> = if based {
                (1..=2 * k_max).map(|k| (k, normal() / k as f64)).collect()
            } else {
                (0..=2 * k_max).map(|k| (k, normal() / (1.0 + k as f64))).collect()
            };
            for (j, c) in comp.iter_mut().enumerate() {
                let t = gamma.param(j);
                *c = modes
                    .iter()
                    .map(|&(k, a)| {
                        let x = PI * k as f64 * t;
                        if based {
                            a * x.sin()
                        } else {
                            a * x.cos()
                        }
                    })
                    .sum();
            }
            if based {
                comp[0] = 0.0;
                comp[n - 1] = 0.0;
            }
        }
    }
    let field = TangentField::from_components(&comps);
    Ok(if based { field.refresh_based() } else { field })
}

/// Deterministic basis of band-limited coordinate fields (see
/// [`random_tangent_field`] for the mode conventions).
pub fn fourier_basis(gamma: &DiscreteLoop, k_max: usize, based: bool) -> Vec<TangentField> {
    let dim = gamma.dim();
    let mut scalars: Vec<Box<dyn Fn(f64) -> f64>> = Vec::new();
    if gamma.is_periodic() {
        if !based {
            scalars.push(Box::new(|_| 1.0));
        }
        for k in 1..=k_max {
            let w = 2.0 * PI * k as f64;
            if based {
                scalars.push(Box::new(move |t| (w * t).cos() - 1.0));
            } else {
                scalars.push(Box::new(move |t| (w * t).cos()));
            }
            scalars.push(Box::new(move |t| (w * t).sin()));
        }
    } else if based {
        for k in 1..=2 * k_max {
            let w = PI * k as f64;
            scalars.push(Box::new(move |t| (w * t).sin()));
        }
    } else {
        for k in 0..=2 * k_max {
            let w = PI * k as f64;
            scalars.push(Box::new(move |t| (w * t).cos()));
        }
    }
    let mut out = Vec::with_capacity(dim * scalars.len());
    for d in 0..dim {
        for f in &scalars {
            let field = TangentField::from_fn(gamma, |t| {
                let mut v = DVector::zeros(dim);
                v[d] = f(t);
                v
            });
            out.push(if based {
                let mut vs = field.into_vectors();
                vs[0].fill(0.0);
                if !gamma.is_periodic() {
                    let last = vs.len() - 1;
                    vs[last].fill(0.0);
                }
                TangentField::new(vs).refresh_based()
            } else {
                field
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn circle(n: usize, r: f64) -> DiscreteLoop {
        DiscreteLoop::closed_from_fn(n, dvector![0.0, 0.0], |t| {
            dvector![r * (2.0 * PI * t).cos(), r * (2.0 * PI * t).sin()]
        })
        .unwrap()
    }

    #[test]
    fn shape_validation() {
        let odd = vec![dvector![0.0]; 17];
        assert!(DiscreteLoop::closed(odd, dvector![0.0]).is_err());
        let short = vec![dvector![0.0]; 8];
        assert!(DiscreteLoop::path(short).is_err());
        assert!(DiscreteLoop::path(vec![dvector![0.0]; 17]).is_ok());
    }

    #[test]
    fn velocity_of_constant_and_circle() {
        let c = DiscreteLoop::closed(vec![dvector![1.0, 2.0]; 32], dvector![0.0, 0.0]).unwrap();
        assert!(velocity(&c).max_norm() < 1e-14);
        let g = circle(256, 1.0);
        let v = velocity(&g);
        for (j, vj) in v.vectors().iter().enumerate() {
            let t = g.param(j);
            let exact = dvector![-(2.0 * PI * t).sin(), (2.0 * PI * t).cos()] * (2.0 * PI);
            assert!((vj - exact).norm() < 1e-10);
        }
    }

    #[test]
    fn path_velocity_quadratic() {
        let p = DiscreteLoop::path_from_fn(512, |t| dvector![t * t, 0.0]).unwrap();
        let v = velocity(&p);
        for (j, vj) in v.vectors().iter().enumerate() {
            assert!((vj - dvector![2.0 * p.param(j), 0.0]).norm() < 1e-8);
        }
    }

    #[test]
    fn lengths() {
        let m = Manifold::euclidean(2);
        let c = DiscreteLoop::closed(vec![dvector![1.0, 2.0]; 32], dvector![0.0, 0.0]).unwrap();
        assert_eq!(length(&m, &c).unwrap(), 0.0);
        assert!((length(&m, &circle(256, 1.0)).unwrap() - 2.0 * PI).abs() < 1e-10);
        let s = Manifold::sphere(1.0);
        let th = PI / 3.0;
        let lat = DiscreteLoop::closed_from_fn(256, dvector![0.0, 2.0 * PI], |t| {
            dvector![th, 2.0 * PI * t]
        })
        .unwrap();
        assert!((length(&s, &lat).unwrap() - 2.0 * PI * th.sin()).abs() < 1e-8);
    }

    #[test]
    fn reparam_ellipse_constant_speed() {
        let m = Manifold::euclidean(2);
        let e = DiscreteLoop::closed_from_fn(512, dvector![0.0, 0.0], |t| {
            dvector![2.0 * (2.0 * PI * t).cos(), (2.0 * PI * t).sin()]
        })
        .unwrap();
        let r = arclength_reparam(&m, &e).unwrap();
        let s = speeds(&m, &r).unwrap();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        let sd = (s.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / s.len() as f64).sqrt();
        assert!(sd / mean < 1e-6, "relative spread {}", sd / mean);
        assert!((length(&m, &r).unwrap() - length(&m, &e).unwrap()).abs() < 1e-6);
        let c = circle(128, 1.0);
        assert!(arclength_reparam(&m, &c).unwrap().sup_distance(&c) < 1e-8);
        let pt = DiscreteLoop::closed(vec![dvector![1.0, 2.0]; 32], dvector![0.0, 0.0]).unwrap();
        assert!(matches!(
            arclength_reparam(&m, &pt),
            Err(GeomError::DegenerateLoop { .. })
        ));
    }

    #[test]
    fn scale_to_unit() {
        let m = Manifold::euclidean(2);
        let c = scale_to_unit_length(&m, &circle(128, 2.0)).unwrap();
        assert!((length(&m, &c).unwrap() - 1.0).abs() < 1e-9);
        assert!((c.samples()[0][0] - 1.0 / (2.0 * PI)).abs() < 1e-12);
        let s = Manifold::stabilized(Manifold::euclidean(1));
        let g = DiscreteLoop::closed_from_fn(256, dvector![0.0, 0.0], |t| {
            dvector![(2.0 * PI * t).cos(), 0.3 * (2.0 * PI * t).sin() + 0.5]
        })
        .unwrap();
        let l0 = length(&s, &g).unwrap();
        let u = scale_to_unit_length(&s, &g).unwrap();
        assert!((length(&s, &u).unwrap() - 1.0).abs() < 1e-6);
        assert!((u.samples()[3][1] - g.samples()[3][1] + 2.0 * l0.ln()).abs() < 1e-14);
        assert!(scale_to_unit_length(&Manifold::flat_torus(2), &circle(32, 0.1)).is_err());
    }

    #[test]
    fn random_fields() {
        let g = circle(64, 1.0);
        let a = random_tangent_field(&g, 5, 0, false).unwrap();
        assert!(a.vectors().iter().all(|v| (v - &a.vectors()[0]).norm() < 1e-15));
        let b = random_tangent_field(&g, 5, 4, true).unwrap();
        assert_eq!(b.vectors()[0].norm(), 0.0);
        assert!(b.vanishes_at_base());
        assert_eq!(b, random_tangent_field(&g, 5, 4, true).unwrap());
        assert!(random_tangent_field(&g, 5, 32, false).is_err());
    }
}
