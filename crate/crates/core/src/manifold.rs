//! Built-in single-chart Riemannian manifolds.
//!
//! Every manifold is described in one chart with a declared admissible
//! region. Points and tangent vectors are chart-coordinate `DVector`s.
//!
//! | selector        | chart                              | metric                      |
//! |-----------------|------------------------------------|-----------------------------|
//! | `euclidean:<n>` | identity                           | `δ_ij`                      |
//! | `sphere:<r>`    | colatitude θ ∈ (0, π), longitude φ | `r² diag(1, sin²θ)`         |
//! | `torus:<n>`     | universal cover of ℝⁿ/ℤⁿ           | `δ_ij`                      |
//! | `so3`           | exponential coordinates, ‖ξ‖ < π   | `J_r(ξ)ᵀ J_r(ξ)`            |
//! | `stab:<inner>`  | inner chart × ℝ (last coordinate t) | `e^t (g_inner ⊕ 1)`        |

use crate::curve::DiscreteLoop;
use crate::error::{GeomError, Result};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Chart coordinates of a point.
pub type Point = DVector<f64>;

/// Gram matrix of the metric in chart coordinates.
pub type MetricMatrix = DMatrix<f64>;

/// Default central-difference step for the Koszul fallback.
pub const CHRISTOFFEL_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub enum ManifoldKind {
    Euclidean(usize),
    Sphere(f64),
    FlatTorus(usize),
    RotationGroup3,
    Stabilized(Box<Manifold>),
}

/// Expanding (conformal Killing, `L_X g = g`) vector fields with analytic flows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpandingField {
    /// `X(p) = p/2` on Euclidean space; flow `p ↦ e^{s/2} p`.
    HalfPosition,
    /// `X = ∂/∂t` on a stabilized manifold; flow `t ↦ t + s`.
    TimeTranslation,
    /// The zero field. Never expanding; used to exercise the residual check.
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifold {
    kind: ManifoldKind,
    field_override: Option<ExpandingField>,
}

/// Christoffel symbols `Γ^k_{ij}` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        self.data[(k * self.dim + i) * self.dim + j] = v;
    }

    /// `Γ(u, v)^k = Γ^k_{ij} u^i v^j`.
    pub fn contract(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        DVector::from_fn(n, |k, _| {
            let mut s = 0.0;
            for i in 0..n {
                if u[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    s += self.get(k, i, j) * u[i] * v[j];
                }
            }
            s
        })
    }

    /// Matrix `A^k_j = Γ^k_{ij} u^i`, so that `Γ(u, v) = A v`.
    pub fn contract_first(&self, u: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |k, j| (0..n).map(|i| self.get(k, i, j) * u[i]).sum())
    }

    pub fn max_abs_diff(&self, other: &Christoffel) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest violation of `Γ^k_{ij} = Γ^k_{ji}`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        worst
    }
}

fn hat(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0)
}

/// Right Jacobian of the SO(3) exponential: `R⁻¹ dR = hat(J_r(ξ) dξ)`.
pub fn so3_right_jacobian(xi: &DVector<f64>) -> DMatrix<f64> {
    let v = Vector3::new(xi[0], xi[1], xi[2]);
    let theta2 = v.norm_squared();
    let theta = theta2.sqrt();
    let (a, b) = if theta < 1e-4 {
        (
            0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0,
            1.0 / 6.0 - theta2 / 120.0 + theta2 * theta2 / 5040.0,
        )
    } else {
        (
            (1.0 - theta.cos()) / theta2,
            (theta - theta.sin()) / (theta2 * theta),
        )
    };
    let k = hat(&v);
    let jr = Matrix3::identity() - k * a + k * k * b;
    DMatrix::from_fn(3, 3, |i, j| jr[(i, j)])
}

impl Manifold {
    pub fn new(kind: ManifoldKind) -> Self {
        Self {
            kind,
            field_override: None,
        }
    }

    pub fn euclidean(n: usize) -> Self {
        Self::new(ManifoldKind::Euclidean(n))
    }

    pub fn sphere(radius: f64) -> Self {
        Self::new(ManifoldKind::Sphere(radius))
    }

    pub fn flat_torus(n: usize) -> Self {
        Self::new(ManifoldKind::FlatTorus(n))
    }

    pub fn rotation_group() -> Self {
        Self::new(ManifoldKind::RotationGroup3)
    }

    pub fn stabilized(base: Manifold) -> Self {
        Self::new(ManifoldKind::Stabilized(Box::new(base)))
    }

    /// Replace the declared expanding field (used for negative checks).
    pub fn with_expanding_field(mut self, field: ExpandingField) -> Self {
        self.field_override = Some(field);
        self
    }

    pub fn kind(&self) -> &ManifoldKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            ManifoldKind::Euclidean(n) | ManifoldKind::FlatTorus(n) => *n,
            ManifoldKind::Sphere(_) => 2,
            ManifoldKind::RotationGroup3 => 3,
            ManifoldKind::Stabilized(base) => base.dim() + 1,
        }
    }

    /// True when straight chart-coordinate displacements are legitimate
    /// variations with a metric that is either constant or a pure `e^t` factor.
    pub fn is_flat_chart(&self) -> bool {
        match &self.kind {
            ManifoldKind::Euclidean(_) | ManifoldKind::FlatTorus(_) => true,
            ManifoldKind::Stabilized(base) => matches!(
                base.kind,
                ManifoldKind::Euclidean(_) | ManifoldKind::FlatTorus(_)
            ),
            _ => false,
        }
    }

    pub fn is_group(&self) -> bool {
        matches!(
            self.kind,
            ManifoldKind::RotationGroup3 | ManifoldKind::FlatTorus(_)
        )
    }

    /// Chart periods per coordinate (deck translations of the universal cover
    /// or angular coordinates).
    pub fn chart_periods(&self) -> Vec<Option<f64>> {
        match &self.kind {
            ManifoldKind::Euclidean(n) => vec![None; *n],
            ManifoldKind::FlatTorus(n) => vec![Some(1.0); *n],
            ManifoldKind::Sphere(_) => vec![None, Some(2.0 * PI)],
            ManifoldKind::RotationGroup3 => vec![None; 3],
            ManifoldKind::Stabilized(base) => {
                let mut p = base.chart_periods();
                p.push(None);
                p
            }
        }
    }

    fn unsupported(&self, op: &'static str) -> GeomError {
        GeomError::UnsupportedManifold {
            op,
            manifold: self.to_string(),
        }
    }

    pub fn check_point(&self, p: &DVector<f64>) -> Result<()> {
        if p.len() != self.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim(),
                actual: p.len(),
            });
        }
        if p.iter().any(|x| !x.is_finite()) {
            return Err(GeomError::ChartDomain(format!("non-finite point {:?}", p.as_slice())));
        }
        match &self.kind {
            ManifoldKind::Sphere(_) => {
                let theta = p[0];
                if !(theta > 0.0 && theta < PI) {
                    return Err(GeomError::ChartDomain(format!(
                        "colatitude {theta} outside (0, π)"
                    )));
                }
            }
            ManifoldKind::RotationGroup3 => {
                let norm = p.norm();
                if norm >= PI {
                    return Err(GeomError::ChartDomain(format!(
                        "exponential coordinate norm {norm} outside [0, π)"
                    )));
                }
            }
            ManifoldKind::Stabilized(base) => {
                base.check_point(&p.rows(0, base.dim()).into_owned())?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Gram matrix of `g` at `p`.
    pub fn metric_at(&self, p: &DVector<f64>) -> Result<MetricMatrix> {
        self.check_point(p)?;
        Ok(self.metric_unchecked(p))
    }

    fn metric_unchecked(&self, p: &DVector<f64>) -> MetricMatrix {
        match &self.kind {
            ManifoldKind::Euclidean(n) | ManifoldKind::FlatTorus(n) => DMatrix::identity(*n, *n),
            ManifoldKind::Sphere(r) => {
                let s = p[0].sin();
                DMatrix::from_diagonal(&DVector::from_vec(vec![r * r, r * r * s * s]))
            }
            ManifoldKind::RotationGroup3 => {
                let jr = so3_right_jacobian(p);
                jr.transpose() * jr
            }
            ManifoldKind::Stabilized(base) => {
                let n = base.dim();
                let t = p[n];
                let gb = base.metric_unchecked(&p.rows(0, n).into_owned());
                let mut g = DMatrix::zeros(n + 1, n + 1);
                g.view_mut((0, 0), (n, n)).copy_from(&gb);
                g[(n, n)] = 1.0;
                g * t.exp()
            }
        }
    }

    /// Christoffel symbols of the Levi-Civita connection at `p`.
    pub fn christoffel_at(&self, p: &DVector<f64>) -> Result<Christoffel> {
        self.check_point(p)?;
        Ok(self.christoffel_unchecked(p))
    }

    fn christoffel_unchecked(&self, p: &DVector<f64>) -> Christoffel {
        match &self.kind {
            ManifoldKind::Euclidean(n) | ManifoldKind::FlatTorus(n) => Christoffel::zeros(*n),
            ManifoldKind::Sphere(_) => {
                let (s, c) = p[0].sin_cos();
                let mut g = Christoffel::zeros(2);
                g.set(0, 1, 1, -s * c);
                g.set(1, 0, 1, c / s);
                g.set(1, 1, 0, c / s);
                g
            }
            ManifoldKind::RotationGroup3 => self.koszul_fd(p, CHRISTOFFEL_FD_STEP),
            ManifoldKind::Stabilized(base) => {
                let n = base.dim();
                let gb = base.christoffel_unchecked(&p.rows(0, n).into_owned());
                let b = base.metric_unchecked(&p.rows(0, n).into_owned());
                let mut g = Christoffel::zeros(n + 1);
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            g.set(k, i, j, gb.get(k, i, j));
                        }
                    }
                }
                // conformal factor e^t: ½(δ^k_i ∂_j t + δ^k_j ∂_i t − B_ij B^{kl} ∂_l t)
                let tt = n;
                for k in 0..=n {
                    for i in 0..=n {
                        for j in 0..=n {
                            let mut v = g.get(k, i, j);
                            if j == tt && k == i {
                                v += 0.5;
                            }
                            if i == tt && k == j {
                                v += 0.5;
                            }
                            if k == tt {
                                let bij = if i < n && j < n {
                                    b[(i, j)]
                                } else if i == tt && j == tt {
                                    1.0
                                } else {
                                    0.0
                                };
                                v -= 0.5 * bij;
                            }
                            g.set(k, i, j, v);
                        }
                    }
                }
                g
            }
        }
    }

    /// Koszul formula with central differences of the metric, step `h`.
    /// Closed forms are checked against this; `so3` uses it directly.
    pub fn christoffel_fd(&self, p: &DVector<f64>, h: f64) -> Result<Christoffel> {
        self.check_point(p)?;
        Ok(self.koszul_fd(p, h))
    }

    fn koszul_fd(&self, p: &DVector<f64>, h: f64) -> Christoffel {
        let n = self.dim();
        let dg: Vec<DMatrix<f64>> = (0..n)
            .map(|l| {
                let mut pp = p.clone();
                let mut pm = p.clone();
                pp[l] += h;
                pm[l] -= h;
                (self.metric_unchecked(&pp) - self.metric_unchecked(&pm)) / (2.0 * h)
            })
            .collect();
        let ginv = self
            .metric_unchecked(p)
            .try_inverse()
            .expect("metric is positive definite");
        let mut out = Christoffel::zeros(n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                    }
                    out.set(k, i, j, 0.5 * s);
                }
            }
        }
        out
    }

    /// RK4 solution of `γ'' + Γ(γ', γ') = 0` on `[0, T]` with `steps` steps.
    /// Returns positions and velocities (with respect to time) at each step.
    pub fn geodesic_states(
        &self,
        p: &DVector<f64>,
        v: &DVector<f64>,
        total_time: f64,
        steps: usize,
    ) -> Result<(Vec<DVector<f64>>, Vec<DVector<f64>>)> {
        if steps < 2 {
            return Err(GeomError::InvalidCurve(format!("geodesic needs steps >= 2, got {steps}")));
        }
        if v.len() != self.dim() {
            return Err(GeomError::DimensionMismatch {
                expected: self.dim(),
                actual: v.len(),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(GeomError::InvalidCurve("non-finite initial velocity".into()));
        }
        self.check_point(p)?;
        let h = total_time / steps as f64;
        let accel = |x: &DVector<f64>, u: &DVector<f64>| -> Result<DVector<f64>> {
            Ok(-self.christoffel_at(x)?.contract(u, u))
        };
        let mut xs = vec![p.clone()];
        let mut vs = vec![v.clone()];
        let (mut x, mut u) = (p.clone(), v.clone());
        for _ in 0..steps {
            let k1x = u.clone();
            let k1v = accel(&x, &u)?;
            let x2 = &x + &k1x * (h / 2.0);
            let u2 = &u + &k1v * (h / 2.0);
            let k2x = u2.clone();
            let k2v = accel(&x2, &u2)?;
            let x3 = &x + &k2x * (h / 2.0);
            let u3 = &u + &k2v * (h / 2.0);
            let k3x = u3.clone();
            let k3v = accel(&x3, &u3)?;
            let x4 = &x + &k3x * h;
            let u4 = &u + &k3v * h;
            let k4x = u4.clone();
            let k4v = accel(&x4, &u4)?;
            x += (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6.0);
            u += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
            self.check_point(&x)?;
            xs.push(x.clone());
            vs.push(u.clone());
        }
        Ok((xs, vs))
    }

    /// Geodesic from `p` with initial velocity `v`, as an open path whose
    /// samples are the `steps + 1` RK4 states on `[0, T]`.
    pub fn geodesic(
        &self,
        p: &DVector<f64>,
        v: &DVector<f64>,
        total_time: f64,
        steps: usize,
    ) -> Result<DiscreteLoop> {
        let (xs, _) = self.geodesic_states(p, v, total_time, steps)?;
        DiscreteLoop::path(xs)
    }

    /// The field that the loop-space constructions lift, if one is declared.
    pub fn expanding_kind(&self) -> Option<ExpandingField> {
        if let Some(f) = self.field_override {
            return Some(f);
        }
        match self.kind {
            ManifoldKind::Euclidean(_) => Some(ExpandingField::HalfPosition),
            ManifoldKind::Stabilized(_) => Some(ExpandingField::TimeTranslation),
            _ => None,
        }
    }

    fn require_expanding(&self, op: &'static str) -> Result<ExpandingField> {
        let field = self.expanding_kind().ok_or_else(|| self.unsupported(op))?;
        match (field, &self.kind) {
            (ExpandingField::HalfPosition, ManifoldKind::Euclidean(_))
            | (ExpandingField::TimeTranslation, ManifoldKind::Stabilized(_))
            | (ExpandingField::Zero, _) => Ok(field),
            _ => Err(self.unsupported(op)),
        }
    }

    /// Chart components of the expanding field at `p`.
    pub fn expanding_field(&self, p: &DVector<f64>) -> Result<DVector<f64>> {
        let field = self.require_expanding("expanding_field")?;
        self.check_point(p)?;
        let n = self.dim();
        Ok(match field {
            ExpandingField::HalfPosition => p * 0.5,
            ExpandingField::TimeTranslation => {
                let mut x = DVector::zeros(n);
                x[n - 1] = 1.0;
                x
            }
            ExpandingField::Zero => DVector::zeros(n),
        })
    }

    /// Time-`s` flow of the expanding field at `p` and its Jacobian.
    pub fn expanding_flow(&self, s: f64, p: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let field = self.require_expanding("expanding_flow")?;
        let n = self.dim();
        Ok(match field {
            ExpandingField::HalfPosition => {
                let f = (0.5 * s).exp();
                (p * f, DMatrix::identity(n, n) * f)
            }
            ExpandingField::TimeTranslation => {
                let mut q = p.clone();
                q[n - 1] += s;
                (q, DMatrix::identity(n, n))
            }
            ExpandingField::Zero => (p.clone(), DMatrix::identity(n, n)),
        })
    }

    /// `‖(L_X g − g)(p)‖_F`, with `L_X g` from central differences of the
    /// pullback `ψ_s^* g` at `s = ±h`.
    pub fn conformal_killing_residual(&self, p: &DVector<f64>, h: f64) -> Result<f64> {
        if !(h > 0.0) {
            return Err(GeomError::InvalidCurve(format!("step h must be positive, got {h}")));
        }
        self.require_expanding("conformal_killing_residual")?;
        let g = self.metric_at(p)?;
        let pullback = |s: f64| -> Result<DMatrix<f64>> {
            let (q, jac) = self.expanding_flow(s, p)?;
            Ok(jac.transpose() * self.metric_at(&q)? * jac)
        };
        let lie = (pullback(h)? - pullback(-h)?) / (2.0 * h);
        Ok((lie - g).norm())
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ManifoldKind::Euclidean(n) => write!(f, "euclidean:{n}"),
            ManifoldKind::Sphere(r) => write!(f, "sphere:{r}"),
            ManifoldKind::FlatTorus(n) => write!(f, "torus:{n}"),
            ManifoldKind::RotationGroup3 => write!(f, "so3"),
            ManifoldKind::Stabilized(base) => write!(f, "stab:{base}"),
        }
    }
}

impl FromStr for Manifold {
    type Err = GeomError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| GeomError::Config(format!("manifold `{s}`: {msg}"));
        let s = s.trim();
        if let Some(inner) = s.strip_prefix("stab:") {
            return Ok(Manifold::stabilized(inner.parse()?));
        }
        if s == "so3" {
            return Ok(Manifold::rotation_group());
        }
        let (name, arg) = s.split_once(':').ok_or_else(|| bad("expected <kind>:<arg>"))?;
        match name {
            "euclidean" | "torus" => {
                let n: usize = arg.parse().map_err(|_| bad("dimension must be a positive integer"))?;
                if n == 0 {
                    return Err(bad("dimension must be positive"));
                }
                Ok(if name == "euclidean" {
                    Manifold::euclidean(n)
                } else {
                    Manifold::flat_torus(n)
                })
            }
            "sphere" => {
                let r: f64 = arg.parse().map_err(|_| bad("radius must be a number"))?;
                if !(r > 0.0 && r.is_finite()) {
                    return Err(bad("radius must be positive"));
                }
                Ok(Manifold::sphere(r))
            }
            _ => Err(bad("unknown manifold kind")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn flat_metrics_are_identity() {
        let m = Manifold::euclidean(2);
        assert_eq!(m.metric_at(&dvector![0.3, -1.2]).unwrap(), DMatrix::identity(2, 2));
        let s = Manifold::stabilized(Manifold::euclidean(1));
        let g = s.metric_at(&dvector![0.7, 0.0]).unwrap();
        assert!((g - DMatrix::<f64>::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn sphere_equator_metric() {
        let m = Manifold::sphere(1.0);
        let g = m.metric_at(&dvector![PI / 2.0, 0.0]).unwrap();
        assert!((g - DMatrix::<f64>::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn sphere_pole_rejected() {
        let m = Manifold::sphere(1.0);
        assert!(matches!(
            m.metric_at(&dvector![0.0, 1.0]),
            Err(GeomError::ChartDomain(_))
        ));
        assert!(matches!(
            m.metric_at(&dvector![PI, 1.0]),
            Err(GeomError::ChartDomain(_))
        ));
    }

    #[test]
    fn so3_chart_bound() {
        let m = Manifold::rotation_group();
        assert!(m.metric_at(&dvector![3.2, 0.0, 0.0]).is_err());
        let g = m.metric_at(&dvector![0.0, 0.0, 0.0]).unwrap();
        assert!((g - DMatrix::<f64>::identity(3, 3)).norm() < 1e-15);
    }

    #[test]
    fn sphere_christoffel_closed_form() {
        let m = Manifold::sphere(1.0);
        let th: f64 = 0.9;
        let g = m.christoffel_at(&dvector![th, 0.4]).unwrap();
        assert!((g.get(0, 1, 1) + th.sin() * th.cos()).abs() < 1e-15);
        assert!((g.get(1, 0, 1) - 1.0 / th.tan()).abs() < 1e-15);
        assert_eq!(g.get(0, 0, 0), 0.0);
    }

    #[test]
    fn stabilized_christoffel_half_terms() {
        // e^t(dx² + dt²): Γ^x_{xt} = ½, Γ^t_{xx} = −½, Γ^t_{tt} = ½
        let m = Manifold::stabilized(Manifold::euclidean(1));
        let g = m.christoffel_at(&dvector![0.2, -0.3]).unwrap();
        assert!((g.get(0, 0, 1) - 0.5).abs() < 1e-15);
        assert!((g.get(1, 0, 0) + 0.5).abs() < 1e-15);
        assert!((g.get(1, 1, 1) - 0.5).abs() < 1e-15);
        assert_eq!(g.get(0, 0, 0), 0.0);
    }

    #[test]
    fn expanding_fields() {
        let s = Manifold::stabilized(Manifold::euclidean(1));
        assert_eq!(s.expanding_field(&dvector![0.4, 2.0]).unwrap(), dvector![0.0, 1.0]);
        let e = Manifold::euclidean(2);
        assert_eq!(e.expanding_field(&dvector![2.0, -4.0]).unwrap(), dvector![1.0, -2.0]);
        assert!(matches!(
            Manifold::sphere(1.0).expanding_field(&dvector![1.0, 0.0]),
            Err(GeomError::UnsupportedManifold { .. })
        ));
        assert!(Manifold::flat_torus(2).expanding_field(&dvector![0.1, 0.1]).is_err());
    }

    #[test]
    fn conformal_killing_zero_field_gives_metric_norm() {
        let m = Manifold::euclidean(2).with_expanding_field(ExpandingField::Zero);
        let r = m.conformal_killing_residual(&dvector![0.3, 0.1], 1e-3).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn parse_roundtrip() {
        for s in ["euclidean:2", "sphere:1", "torus:3", "so3", "stab:euclidean:1", "stab:sphere:2"] {
            let m: Manifold = s.parse().unwrap();
            assert_eq!(m.to_string(), s);
        }
        assert!("sphere:-1".parse::<Manifold>().is_err());
        assert!("klein:2".parse::<Manifold>().is_err());
        assert!("euclidean:0".parse::<Manifold>().is_err());
    }

    #[test]
    fn straight_geodesic() {
        let m = Manifold::euclidean(2);
        let path = m.geodesic(&dvector![0.0, 0.0], &dvector![1.0, 0.0], 1.0, 32).unwrap();
        let last = path.samples().last().unwrap();
        assert!((last - dvector![1.0, 0.0]).norm() < 1e-15);
        let still = m.geodesic(&dvector![0.5, 0.5], &dvector![0.0, 0.0], 1.0, 16).unwrap();
        assert!(still.samples().iter().all(|p| *p == dvector![0.5, 0.5]));
    }
}
