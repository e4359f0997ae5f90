//! The registered checks of each suite.

use crate::acs::{self, AcsOperator};
use crate::contact;
use crate::curve::{self, DiscreteLoop, TangentField};
use crate::error::{GeomError, Result};
use crate::forms::{self, TwoParamVariation};
use crate::io;
use crate::manifold::{Manifold, ManifoldKind};
use crate::spectral;
use crate::suite::{standard_point, Check, Context, Criterion, SuiteName};
use crate::transport::{self, DevelopedField, DEFAULT_KERNEL_TOL, DEFAULT_SUBSTEPS};
use nalgebra::DVector;
use rand::Rng;
use std::f64::consts::PI;

/// Tolerance keys accepted by `--tol`.
const KEYS: &[&str] = &[
    "manifold.metric_symmetry",
    "manifold.metric_positive",
    "manifold.christoffel_fd",
    "manifold.christoffel_symmetry",
    "manifold.metric_compatibility",
    "manifold.geodesic_speed",
    "manifold.conformal_killing",
    "curve.spectral_derivative",
    "curve.trapezoid_exact",
    "curve.path_quadrature",
    "curve.length_invariance",
    "curve.uniform_speed",
    "curve.csv_round_trip",
    "curve.based_fields",
    "transport.orthogonality",
    "transport.kernel_bound",
    "transport.parallel_frames",
    "transport.develop_inverse",
    "transport.develop_isometry",
    "transport.flat_identity",
    "transport.geodesic_line",
    "transport.holonomy_latitude",
    "transport.rk4_order",
    "forms.stokes",
    "forms.antisymmetry",
    "forms.path_antisymmetry",
    "forms.kernel_holonomy",
    "forms.based_path_kernel",
    "forms.path_nondegeneracy",
    "forms.cartan",
    "forms.cartan_decay",
    "forms.cartan_floor",
    "forms.metric_recovery",
    "acs.j_square",
    "acs.j_based",
    "acs.sine_example",
    "acs.compat_symmetry",
    "acs.compat_positive",
    "acs.cauchy_schwarz",
    "acs.omega_fourier",
    "acs.symplectic_invariance",
    "acs.fourier_round_trip",
    "acs.conjugate_symmetry",
    "acs.based_sum",
    "acs.chart_constancy",
    "acs.left_flat",
    "acs.left_differs",
    "acs.left_isometry",
    "contact.lift_field",
    "contact.alpha_mu",
    "contact.liouville",
    "contact.liouville_decay",
    "contact.liouville_floor",
    "contact.length_derivative",
    "contact.transversality",
    "contact.reeb_alpha",
    "contact.reeb_tangency",
    "contact.reeb_period",
    "contact.reeb_additivity",
    "contact.reeb_derivative",
    "contact.quasi_contact_bound",
    "contact.quasi_contact_based",
];

pub fn is_known_tolerance(name: &str) -> bool {
    let base = name
        .strip_suffix(".lo")
        .or_else(|| name.strip_suffix(".hi"))
        .unwrap_or(name);
    KEYS.contains(&name) || KEYS.contains(&base)
}

/// Step sizes for the observed-order checks.
pub const DECAY_STEPS: [f64; 3] = [1e-3, 5e-4, 2.5e-4];
/// Residuals below this are treated as rounding noise in decay checks.
pub const DECAY_FLOOR: f64 = 1e-10;
/// Step of the five-point Reeb derivative; truncation is O(h⁴).
pub const REEB_STEP: f64 = 2.5e-4;
/// Random field pairs per form identity.
const PAIRS: usize = 50;

fn max_of(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    let mut m = 0.0f64;
    for v in values {
        m = m.max(v?);
    }
    Ok(m)
}

fn min_of(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    let mut m = f64::INFINITY;
    for v in values {
        m = m.min(v?);
    }
    Ok(m)
}

/// Mean observed order `log₂(r(h)/r(h/2))` over successive halvings.
pub fn observed_order(residuals: &[f64]) -> f64 {
    let orders: Vec<f64> = residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    orders.iter().sum::<f64>() / orders.len() as f64
}

fn is_euclidean_like(m: &Manifold) -> bool {
    matches!(m.kind(), ManifoldKind::Euclidean(_) | ManifoldKind::FlatTorus(_))
}

struct Registry<'a> {
    checks: Vec<Check<'a>>,
}

impl<'a> Registry<'a> {
    fn add(
        &mut self,
        key: &'static str,
        suite: SuiteName,
        anchor: &'static str,
        criterion: Criterion,
        run: impl Fn() -> Result<f64> + 'a,
    ) {
        self.add_id(key.to_string(), key, suite, anchor, criterion, run);
    }

    fn add_id(
        &mut self,
        id: String,
        key: &'static str,
        suite: SuiteName,
        anchor: &'static str,
        criterion: Criterion,
        run: impl Fn() -> Result<f64> + 'a,
    ) {
        debug_assert!(KEYS.contains(&key), "unregistered key {key}");
        self.checks.push(Check {
            id,
            key,
            suite,
            anchor,
            criterion,
            run: Box::new(run),
        });
    }
}

/// All checks that apply to the context's manifold.
pub fn registry(ctx: &Context) -> Vec<Check<'_>> {
    let mut r = Registry { checks: Vec::new() };
    manifold_checks(ctx, &mut r);
    curve_checks(ctx, &mut r);
    transport_checks(ctx, &mut r);
    forms_checks(ctx, &mut r);
    acs_checks(ctx, &mut r);
    contact_checks(ctx, &mut r);
    r.checks
}

fn points(ctx: &Context, tag: u64, count: usize) -> Vec<DVector<f64>> {
    let mut rng = ctx.rng(tag);
    (0..count).map(|_| standard_point(&ctx.manifold, &mut rng)).collect()
}

fn manifold_checks<'a>(ctx: &'a Context, r: &mut Registry<'a>) {
    use SuiteName::Manifold as S;
    let m = &ctx.manifold;
    r.add("manifold.metric_symmetry", S, "g_ij = g_ji", Criterion::AtMost(1e-12), move || {
        max_of(points(ctx, 10, 20).iter().map(|p| {
            let g = m.metric_at(p)?;
            Ok((&g - g.transpose()).amax())
        }))
    });
    r.add("manifold.metric_positive", S, "min eigenvalue of g > 0", Criterion::Above(0.0), move || {
        min_of(points(ctx, 11, 20).iter().map(|p| {
            Ok(m.metric_at(p)?.symmetric_eigen().eigenvalues.min())
        }))
    });
    r.add(
        "manifold.christoffel_fd",
        S,
        "Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij), closed form vs finite differences",
        Criterion::AtMost(1e-6),
        move || {
            max_of(points(ctx, 12, 10).iter().map(|p| {
                Ok(m.christoffel_at(p)?.max_abs_diff(&m.christoffel_fd(p, 1e-4)?))
            }))
        },
    );
    r.add("manifold.christoffel_symmetry", S, "Γ^k_ij = Γ^k_ji", Criterion::AtMost(1e-12), move || {
        max_of(points(ctx, 13, 10).iter().map(|p| Ok(m.christoffel_at(p)?.asymmetry())))
    });
    r.add(
        "manifold.metric_compatibility",
        S,
        "∂_k g_ij = g_lj Γ^l_ki + g_il Γ^l_kj",
        Criterion::AtMost(1e-6),
        move || max_of(points(ctx, 14, 10).iter().map(|p| metric_compatibility(m, p))),
    );
    r.add(
        "manifold.geodesic_speed",
        S,
        "g(γ', γ') constant along geodesics",
        Criterion::AtMost(1e-8),
        move || {
            let mut rng = ctx.rng(15);
            max_of(points(ctx, 16, 5).iter().map(|p| {
                let v = DVector::from_fn(m.dim(), |_, _| rng.random_range(-1.0..1.0));
                let g = m.metric_at(p)?;
                let v = &v * (0.4 / v.dot(&(&g * &v)).sqrt());
                let (xs, vs) = m.geodesic_states(p, &v, 1.0, 400)?;
                let s0 = v.dot(&(&g * &v));
                max_of(xs.iter().zip(&vs).map(|(x, u)| {
                    Ok((u.dot(&(m.metric_at(x)? * u)) - s0).abs() / s0)
                }))
            }))
        },
    );
    if m.expanding_kind().is_some() {
        r.add(
            "manifold.conformal_killing",
            S,
            "L_X g = g for the expanding field X",
            Criterion::AtMost(1e-6),
            move || {
                max_of(points(ctx, 17, 10).iter().map(|p| m.conformal_killing_residual(p, 1e-4)))
            },
        );
    }
}

fn metric_compatibility(m: &Manifold, p: &DVector<f64>) -> Result<f64> {
    let n = m.dim();
    let h = 1e-5;
    let g = m.metric_at(p)?;
    let gam = m.christoffel_at(p)?;
    let mut worst = 0.0f64;
    for k in 0..n {
        let mut e = DVector::zeros(n);
        e[k] = h;
        let dg = (m.metric_at(&(p + &e))? - m.metric_at(&(p - &e))?) / (2.0 * h);
        for i in 0..n {
            for j in 0..n {
                let rhs: f64 = (0..n)
                    .map(|l| g[(l, j)] * gam.get(l, k, i) + g[(i, l)] * gam.get(l, k, j))
                    .sum();
                worst = worst.max((dg[(i, j)] - rhs).abs());
            }
        }
    }
    Ok(worst)
}

fn curve_checks<'a>(ctx: &'a Context, r: &mut Registry<'a>) {
    use SuiteName::Curve as S;
    let m = &ctx.manifold;
    let dim = m.dim();
    r.add(
        "curve.spectral_derivative",
        S,
        "γ'(t_j) = Σ 2πik c_k e^{2πik t_j} for band-limited samples",
        Criterion::AtMost(1e-9),
        move || {
            let g = DiscreteLoop::closed_from_fn(ctx.n, DVector::zeros(dim), |t| {
                DVector::from_fn(dim, |i, _| (2.0 * PI * (i + 1) as f64 * t).sin())
            })?;
            let v = curve::velocity(&g);
            Ok((0..ctx.n)
                .map(|j| {
                    let t = g.param(j);
                    let want = DVector::from_fn(dim, |i, _| {
                        let w = 2.0 * PI * (i + 1) as f64;
                        w * (w * t).cos()
                    });
                    (&v.vectors()[j] - want).norm()
                })
                .fold(0.0, f64::max))
        },
    );
    r.add(
        "curve.trapezoid_exact",
        S,
        "periodic trapezoid: ∫_0^1 cos²(10πt) dt = ½",
        Criterion::AtMost(1e-12),
        move || {
            let vals: Vec<f64> = (0..ctx.n)
                .map(|j| (10.0 * PI * j as f64 / ctx.n as f64).cos().powi(2))
                .collect();
            Ok(vals.iter().sum::<f64>() / ctx.n as f64 - 0.5)
        },
    );
    r.add(
        "curve.path_quadrature",
        S,
        "open-interval quadrature: ∫_0^1 (t⁸ + e^t) dt = 1/9 + e − 1",
        Criterion::AtMost(1e-12),
        move || {
            let w = spectral::open_quadrature_weights(ctx.n + 1);
            let s: f64 = (0..=ctx.n)
                .map(|j| {
                    let t = j as f64 / ctx.n as f64;
                    w[j] * (t.powi(8) + t.exp())
                })
                .sum();
            Ok(s - (1.0 / 9.0 + std::f64::consts::E - 1.0))
        },
    );
    r.add(
        "curve.length_invariance",
        S,
        "length(γ∘φ) = length(γ) under reparametrization",
        Criterion::AtMost(1e-8),
        move || {
            max_of(ctx.loops.iter().map(|g| {
                let l = curve::length(m, g)?;
                Ok((curve::length(m, &curve::arclength_reparam(m, g)?)? - l).abs() / l)
            }))
        },
    );
    r.add(
        "curve.uniform_speed",
        S,
        "arclength parametrization has ‖γ'‖ ≡ length(γ)",
        Criterion::AtMost(1e-6),
        move || {
            max_of(ctx.loops.iter().map(|g| {
                let a = curve::arclength_reparam(m, g)?;
                let l = curve::length(m, &a)?;
                Ok(curve::speeds(m, &a)?
                    .iter()
                    .map(|s| (s - l).abs() / l)
                    .fold(0.0, f64::max))
            }))
        },
    );
    r.add(
        "curve.csv_round_trip",
        S,
        "load(emit(γ)) = γ at 17 significant digits",
        Criterion::AtMost(0.0),
        move || {
            let g = &ctx.loops[0];
            let mut buf = Vec::new();
            io::write_loop(g, &mut buf)?;
            let back = io::read_loop(m, buf.as_slice())?;
            if back.winding() != g.winding() {
                return Ok(f64::INFINITY);
            }
            Ok(back.sup_distance(g))
        },
    );
    r.add("curve.based_fields", S, "U(0) = 0 for based fields", Criterion::AtMost(1e-12), move || {
        max_of(ctx.loops.iter().enumerate().map(|(i, g)| {
            let u = curve::random_tangent_field(g, ctx.field_seed(100 + i as u64), ctx.k_max, true)?;
            Ok(u.vectors()[0].norm())
        }))
    });
}

fn transport_checks<'a>(ctx: &'a Context, r: &mut Registry<'a>) {
    use SuiteName::Transport as S;
    let m = &ctx.manifold;
    let dim = m.dim();
    r.add(
        "transport.orthogonality",
        S,
        "holonomy P_0^1 is g-orthogonal: ‖EᵀE − I‖",
        Criterion::AtMost(1e-10),
        move || {
            max_of(ctx.loops.iter().map(|g| {
                Ok(transport::parallel_transport_with(m, g, None, DEFAULT_SUBSTEPS)?.orthogonality_defect())
            }))
        },
    );
    r.add(
        "transport.kernel_bound",
        S,
        "dim ker(E − I) ≤ dim M",
        Criterion::AtMost(0.0),
        move || {
            max_of(ctx.loops.iter().map(|g| {
                Ok((transport::kernel_dimension(m, g, DEFAULT_KERNEL_TOL)? as f64 - dim as f64).max(0.0))
            }))
        },
    );
    r.add(
        "transport.parallel_frames",
        S,
        "∇_t F = 0 for transported frames, relative to ‖γ'‖",
        Criterion::AtMost(1e-6),
        move || {
            max_of(ctx.paths.iter().take(3).map(|p| {
                let rec = transport::parallel_transport_with(m, p, None, DEFAULT_SUBSTEPS)?;
                let speed = curve::speeds(m, p)?.iter().cloned().fold(0.0, f64::max).max(1e-300);
                max_of((0..dim).map(|c| {
                    let f = transport::frame_column_field(&rec, c);
                    let d = transport::covariant_derivative(m, p, &f)?;
                    let norms = curve::pointwise_inner(m, p, &d, &d)?;
                    Ok(norms.iter().cloned().fold(0.0, f64::max).sqrt() / speed)
                }))
            }))
        },
    );
    r.add(
        "transport.develop_inverse",
        S,
        "U = F·Û inverts Û = Fᵀ g U",
        Criterion::AtMost(1e-12),
        move || {
            max_of(ctx.loops.iter().take(5).enumerate().map(|(i, g)| {
                let rec = transport::parallel_transport_with(m, g, None, DEFAULT_SUBSTEPS)?;
                let u = curve::random_tangent_field(g, ctx.field_seed(200 + i as u64), ctx.k_max, false)?;
                let hat = transport::develop_with(m, g, &rec, &u)?;
                let back = transport::undevelop_with(&rec, &hat);
                Ok(back.minus(&u).max_norm() / u.max_norm())
            }))
        },
    );
    r.add(
        "transport.develop_isometry",
        S,
        "|Û(t)|² = g(U(t), U(t))",
        Criterion::AtMost(1e-10),
        move || {
            max_of(ctx.loops.iter().take(5).enumerate().map(|(i, g)| {
                let u = curve::random_tangent_field(g, ctx.field_seed(210 + i as u64), ctx.k_max, false)?;
                let hat = transport::developpement(m, g, &u)?;
                let gu = curve::pointwise_inner(m, g, &u, &u)?;
                let scale = gu.iter().cloned().fold(0.0, f64::max);
                Ok(hat
                    .values
                    .iter()
                    .zip(&gu)
                    .map(|(h, q)| (h.norm_squared() - q).abs() / scale)
                    .fold(0.0, f64::max))
            }))
        },
    );
    if is_euclidean_like(m) {
        r.add(
            "transport.flat_identity",
            S,
            "flat chart with identity frame: Û = U",
            Criterion::AtMost(1e-12),
            move || {
                max_of(ctx.loops.iter().take(3).enumerate().map(|(i, g)| {
                    let u = curve::random_tangent_field(g, ctx.field_seed(220 + i as u64), ctx.k_max, false)?;
                    let hat = transport::developpement(m, g, &u)?;
                    Ok(hat
                        .values
                        .iter()
                        .zip(u.vectors())
                        .map(|(a, b)| (a - b).norm())
                        .fold(0.0, f64::max))
                }))
            },
        );
    }
    r.add(
        "transport.geodesic_line",
        S,
        "Cartan development of a geodesic is a straight line",
        Criterion::AtMost(1e-6),
        move || {
            let mut rng = ctx.rng(230);
            max_of(points(ctx, 231, 3).iter().map(|p| {
                let v = DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0));
                let g = m.metric_at(p)?;
                let v = &v * (0.4 / v.dot(&(&g * &v)).sqrt());
                let path = m.geodesic(p, &v, 1.0, ctx.n)?;
                Ok(transport::line_residual(&transport::cartan_development(m, &path)?))
            }))
        },
    );
    if let ManifoldKind::Sphere(_) = m.kind() {
        let latitudes: [(&str, f64); 3] = [("pi_6", PI / 6.0), ("pi_3", PI / 3.0), ("pi_2_5", PI / 2.5)];
        for (name, th) in latitudes {
            r.add_id(
                format!("transport.holonomy_latitude.{name}"),
                "transport.holonomy_latitude",
                S,
                "latitude at colatitude θ: holonomy angle 2π(1 − cos θ) mod 2π",
                Criterion::AtMost(1e-6),
                move || {
                    let ang = latitude_angle(m, th, ctx.n, DEFAULT_SUBSTEPS)?;
                    Ok(angle_error(ang, 2.0 * PI * (1.0 - th.cos())))
                },
            );
        }
        r.add(
            "transport.rk4_order",
            S,
            "RK4 transport error ratio under substep doubling ≈ 2⁴ (N = 16, substeps 1→2→4); value is the ratio farthest from 16",
            Criterion::Between(12.0, 20.0),
            move || {
                let mut worst: f64 = 16.0;
                for (_, th) in latitudes {
                    let target = 2.0 * PI * (1.0 - th.cos());
                    let errs = [1, 2, 4]
                        .iter()
                        .map(|&s| Ok(angle_error(latitude_angle(m, th, 16, s)?, target)))
                        .collect::<Result<Vec<_>>>()?;
                    for w in errs.windows(2) {
                        let ratio = w[0] / w[1];
                        if (ratio - 16.0).abs() > (worst - 16.0).abs() {
                            worst = ratio;
                        }
                    }
                }
                Ok(worst)
            },
        );
    }
}

/// Rotation angle of the holonomy along the latitude at colatitude `th`.
pub fn latitude_angle(m: &Manifold, th: f64, n: usize, substeps: usize) -> Result<f64> {
    let g = DiscreteLoop::closed_from_fn(n, DVector::from_vec(vec![0.0, 2.0 * PI]), |t| {
        DVector::from_vec(vec![th, 2.0 * PI * t])
    })?;
    let rec = transport::parallel_transport_with(m, &g, None, substeps)?;
    Ok(transport::rotation_angle(&rec.end_matrix))
}

/// Distance between two angles modulo 2π.
pub fn angle_error(a: f64, b: f64) -> f64 {
    ((a - b + PI).rem_euclid(2.0 * PI) - PI).abs()
}

fn forms_checks<'a>(ctx: &'a Context, r: &mut Registry<'a>) {
    use SuiteName::Forms as S;
    let m = &ctx.manifold;
    let dim = m.dim();
    let pair = move |g: &DiscreteLoop, tag: u64| -> Result<(TangentField, TangentField)> {
        Ok((
            curve::random_tangent_field(g, ctx.field_seed(tag), ctx.k_max, false)?,
            curve::random_tangent_field(g, ctx.field_seed(tag + 50_000), ctx.k_max, false)?,
        ))
    };
    r.add(
        "forms.stokes",
        S,
        "½∫[g(V, ∇U) − g(U, ∇V)] dt = ∫ g(∇U, V) dt on loops",
        Criterion::AtMost(1e-8),
        move || {
            max_of((0..PAIRS).map(|i| {
                let g = &ctx.loops[i % ctx.loops.len()];
                let (u, v) = pair(g, 300 + i as u64)?;
                Ok((forms::omega_loop_antisymmetric(m, g, &u, &v)?.value
                    - forms::omega_loop(m, g, &u, &v)?.value)
                    .abs())
            }))
        },
    );
    r.add(
        "forms.antisymmetry",
        S,
        "ω(U, V) + ω(V, U) = 0 with ω(U, V) = ∫ g(∇U, V) dt",
        Criterion::AtMost(1e-9),
        move || {
            max_of((0..PAIRS).map(|i| {
                let g = &ctx.loops[i % ctx.loops.len()];
                let (u, v) = pair(g, 400 + i as u64)?;
                Ok((forms::omega_loop(m, g, &u, &v)?.value + forms::omega_loop(m, g, &v, &u)?.value).abs())
            }))
        },
    );
    r.add(
        "forms.path_antisymmetry",
        S,
        "on paths ω(U, V) = ∫ g(∇U, V) dt − ½[g(U, V)]_0^1 is antisymmetric",
        Criterion::AtMost(1e-9),
        move || {
            max_of((0..PAIRS).map(|i| {
                let p = &ctx.paths[i % ctx.paths.len()];
                let (u, v) = pair(p, 500 + i as u64)?;
                Ok((forms::omega_path(m, p, &u, &v)?.value + forms::omega_path(m, p, &v, &u)?.value).abs())
            }))
        },
    );
    for (i, g) in ctx.loops.iter().enumerate() {
        r.add_id(
            format!("forms.kernel_holonomy.loop{i:02}"),
            "forms.kernel_holonomy",
            S,
            "ker ω = periodic parallel fields: |numeric dim ker ω − dim ker(E − I)|",
            Criterion::AtMost(0.0),
            move || {
                let numeric = forms::omega_rank_profile(m, g, ctx.k_max)?.kernel_dim;
                let oracle = transport::kernel_dimension(m, g, DEFAULT_KERNEL_TOL)?;
                Ok((numeric as f64 - oracle as f64).abs())
            },
        );
    }
    r.add(
        "forms.based_path_kernel",
        S,
        "on based paths ker ω = 0 (sine basis)",
        Criterion::AtMost(0.0),
        move || {
            max_of(ctx.paths.iter().take(3).map(|p| {
                let p = p.clone().with_basepoint_fixed(true);
                Ok(forms::omega_rank_profile(m, &p, ctx.k_max)?.kernel_dim as f64)
            }))
        },
    );
    r.add(
        "forms.path_nondegeneracy",
        S,
        "based paths, K_max = 16: σ_min/σ_max of the form matrix bounded away from 0",
        Criterion::Above(1e-6),
        move || {
            let k = 16.min((ctx.n - dim) / (2 * dim));
            min_of(ctx.paths.iter().take(3).map(|p| {
                let p = p.clone().with_basepoint_fixed(true);
                Ok(forms::omega_rank_profile(m, &p, k)?.smallest_relative())
            }))
        },
    );
    if m.is_flat_chart() {
        let variations = move || -> Result<Vec<TwoParamVariation>> {
            (0..10)
                .map(|i| {
                    let g = ctx.loops[i % ctx.loops.len()].clone();
                    let (u, v) = pair(&g, 600 + i as u64)?;
                    TwoParamVariation::new(g, u, v)
                })
                .collect()
        };
        r.add(
            "forms.cartan",
            S,
            "dμ(U, V) = U(μ(V)) − V(μ(U)) = ω(U, V), central differences at h = 1e-4",
            Criterion::AtMost(1e-6),
            move || max_of(variations()?.iter().map(|var| forms::cartan_check(m, var, 1e-4))),
        );
        let decay = move || -> Result<Vec<f64>> {
            let vars = variations()?;
            DECAY_STEPS
                .iter()
                .map(|&h| max_of(vars.iter().map(|var| forms::cartan_check(m, var, h))))
                .collect()
        };
        match decay() {
            Ok(res) if res.iter().all(|&x| x < DECAY_FLOOR) => r.add(
                "forms.cartan_floor",
                S,
                "Cartan residual at rounding level for h ∈ {1e-3, 5e-4, 2.5e-4} (μ linear in the chart: no h² term)",
                Criterion::AtMost(DECAY_FLOOR),
                move || Ok(decay()?.into_iter().fold(0.0, f64::max)),
            ),
            _ => r.add(
                "forms.cartan_decay",
                S,
                "Cartan residual O(h²): observed order over h ∈ {1e-3, 5e-4, 2.5e-4}",
                Criterion::Between(1.5, 2.5),
                move || Ok(observed_order(&decay()?)),
            ),
        }
    }
    r.add(
        "forms.metric_recovery",
        S,
        "constant loop at p: ω(f₁v₁, f₂v₂) = g(v₁, v₂) ∫ f₁' f₂ dt; relative error",
        Criterion::AtMost(1e-6),
        move || metric_recovery_check(ctx, 20),
    );
}

/// Scalar `Σ a_k(cos 2πkt − 1) + b_k sin 2πkt`.
struct BasedScalar {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl BasedScalar {
    fn random(rng: &mut impl Rng, k: usize) -> Self {
        Self {
            a: (0..k).map(|_| rng.random_range(-1.0..1.0)).collect(),
            b: (0..k).map(|_| rng.random_range(-1.0..1.0)).collect(),
        }
    }

    fn samples(&self, n: usize) -> Vec<f64> {
        (0..n)
            .map(|j| {
                let t = j as f64 / n as f64;
                self.a
                    .iter()
                    .zip(&self.b)
                    .enumerate()
                    .map(|(i, (a, b))| {
                        let x = 2.0 * PI * (i + 1) as f64 * t;
                        a * (x.cos() - 1.0) + b * x.sin()
                    })
                    .sum()
            })
            .collect()
    }

    /// `∫ f' h dt = π Σ k (b_k c_k − a_k d_k)`.
    fn derivative_pairing(&self, other: &BasedScalar) -> f64 {
        (0..self.a.len())
            .map(|i| PI * (i + 1) as f64 * (self.b[i] * other.a[i] - self.a[i] * other.b[i]))
            .sum()
    }
}

fn metric_recovery_check(ctx: &Context, tuples: usize) -> Result<f64> {
    let m = &ctx.manifold;
    let mut rng = ctx.rng(700);
    let mut worst = 0.0f64;
    let mut done = 0;
    let mut attempts = 0;
    while done < tuples {
        attempts += 1;
        if attempts > 10 * tuples {
            return Err(GeomError::DegenerateTestCase {
                omega: 0.0,
                reference: 0.0,
            });
        }
        let p = standard_point(m, &mut rng);
        let v1 = DVector::from_fn(m.dim(), |_, _| rng.random_range(-1.0..1.0));
        let v2 = DVector::from_fn(m.dim(), |_, _| rng.random_range(-1.0..1.0));
        let f1 = BasedScalar::random(&mut rng, 4);
        let f2 = BasedScalar::random(&mut rng, 4);
        let rec = match forms::metric_recovery(m, &p, &v1, &v2, &f1.samples(ctx.n), &f2.samples(ctx.n)) {
            Ok(rec) => rec,
            Err(GeomError::DegenerateTestCase { .. }) => continue,
            Err(e) => return Err(e),
        };
        let analytic = v1.dot(&(m.metric_at(&p)? * &v2)) * f1.derivative_pairing(&f2);
        if analytic.abs() < 1e-3 {
            continue;
        }
        worst = worst
            .max((rec.ratio - 1.0).abs())
            .max(((rec.omega - analytic) / analytic).abs());
        done += 1;
    }
    Ok(worst)
}

fn acs_checks<'a>(ctx: &'a Context, r: &mut Registry<'a>) {
    use SuiteName::Acs as S;
    let m = &ctx.manifold;
    let dim = m.dim();
    let flat = is_euclidean_like(m);
    let based_loops = || -> Vec<DiscreteLoop> {
        ctx.loops.iter().take(5).map(|g| g.clone().with_basepoint_fixed(true)).collect()
    };
    // Operators and 10 random based fields per loop, 50 in total.
    let setup = move || -> Result<Vec<(AcsOperator, Vec<TangentField>)>> {
        based_loops()
            .into_iter()
            .enumerate()
            .map(|(i, g)| {
                let op = AcsOperator::developpement(m, &g)?;
                let fields = (0..10)
                    .map(|k| curve::random_tangent_field(&g, ctx.field_seed(800 + 10 * i as u64 + k), ctx.k_max, true))
                    .collect::<Result<Vec<_>>>()?;
                Ok((op, fields))
            })
            .collect()
    };
    let over_pairs = move |f: &dyn Fn(&AcsOperator, &TangentField, &TangentField) -> Result<f64>| -> Result<f64> {
        let s = setup()?;
        max_of(s.iter().flat_map(|(op, fs)| {
            (0..fs.len()).map(move |k| f(op, &fs[k], &fs[(k + 1) % fs.len()]))
        }))
    };
    r.add("acs.j_square", S, "Ĵ² = −Id on based loops", Criterion::AtMost(1e-8), move || {
        over_pairs(&|op, u, _| {
            let jj = op.apply_j(&op.apply_j(u)?)?;
            Ok(jj.plus(u).max_norm() / u.max_norm())
        })
    });
    r.add("acs.j_based", S, "Ĵ(U)(0) = 0", Criterion::AtMost(1e-10), move || {
        over_pairs(&|op, u, _| Ok(op.apply_j(u)?.vectors()[0].norm()))
    });
    r.add(
        "acs.sine_example",
        S,
        "Û = sin(2πt)e₁ gives Ĵ(Û) = (cos 2πt − 1)e₁",
        Criterion::AtMost(1e-9),
        move || {
            let g = ctx.loops[0].clone().with_basepoint_fixed(true);
            let op = AcsOperator::developpement(m, &g)?;
            let e1 = |f: &dyn Fn(f64) -> f64| DevelopedField {
                values: (0..ctx.n)
                    .map(|j| {
                        let mut v = DVector::zeros(dim);
                        v[0] = f(g.param(j));
                        v
                    })
                    .collect(),
            };
            let hat = e1(&|t| (2.0 * PI * t).sin());
            let mut hat0 = hat.clone();
            hat0.values[0].fill(0.0);
            let u = op.undevelop(&hat0);
            let out = op.develop(&op.apply_j(&u)?)?;
            Ok(out.max_diff(&e1(&|t| (2.0 * PI * t).cos() - 1.0)))
        },
    );
    r.add("acs.compat_symmetry", S, "g_J(U, V) = g_J(V, U)", Criterion::AtMost(1e-10), move || {
        over_pairs(&|op, u, v| Ok((op.compat_metric(u, v)? - op.compat_metric(v, u)?).abs()))
    });
    r.add(
        "acs.compat_positive",
        S,
        "g_J(U, U) = Σ_{k>0} 2πk(|a_k|² + |a_{−k}|²) > 0 for U ≠ 0",
        Criterion::Above(0.0),
        move || {
            let s = setup()?;
            min_of(s.iter().flat_map(|(op, fs)| fs.iter().map(move |u| op.compat_metric(u, u))))
        },
    );
    r.add(
        "acs.cauchy_schwarz",
        S,
        "g_J(U, V)² ≤ g_J(U, U) g_J(V, V); relative excess",
        Criterion::AtMost(1e-9),
        move || {
            over_pairs(&|op, u, v| {
                let uv = op.compat_metric(u, v)?;
                let uu = op.compat_metric(u, u)?;
                let vv = op.compat_metric(v, v)?;
                Ok(((uv * uv - uu * vv) / (uu * vv)).max(0.0))
            })
        },
    );
    r.add(
        "acs.omega_fourier",
        S,
        "ω(U, V) = Σ_k 2πik⟨a_k, b_k⟩ against quadrature ∫ g(∇U, V) dt",
        Criterion::AtMost(if flat { 1e-7 } else { 1e-5 }),
        move || {
            over_pairs(&|op, u, v| {
                Ok((op.omega_fourier(u, v)? - forms::omega_loop(m, op.base_loop(), u, v)?.value).abs())
            })
        },
    );
    r.add(
        "acs.symplectic_invariance",
        S,
        "ω(ĴU, ĴV) = ω(U, V) in the Fourier expression",
        Criterion::AtMost(1e-7),
        move || {
            over_pairs(&|op, u, v| {
                let ju = op.apply_j(u)?;
                let jv = op.apply_j(v)?;
                Ok((op.omega_fourier(&ju, &jv)? - op.omega_fourier(u, v)?).abs())
            })
        },
    );
    r.add(
        "acs.fourier_round_trip",
        S,
        "f(t_j) = Σ a_k e^{2πik t_j} reproduces the samples",
        Criterion::AtMost(1e-10),
        move || {
            over_pairs(&|op, u, _| {
                let hat = op.develop(u)?;
                Ok(acs::to_fourier(&hat).to_samples().max_diff(&hat))
            })
        },
    );
    r.add("acs.conjugate_symmetry", S, "a_{−k} = conj(a_k)", Criterion::AtMost(1e-10), move || {
        over_pairs(&|op, u, _| Ok(op.fourier(u)?.conjugate_asymmetry()))
    });
    r.add("acs.based_sum", S, "Σ_k a_k = Û(0) = 0", Criterion::AtMost(1e-8), move || {
        over_pairs(&|op, u, _| Ok(op.fourier(u)?.value_at_zero().norm()))
    });
    r.add(
        "acs.chart_constancy",
        S,
        "Ĵ is the same multiplier in the trivializations at γ and γ + εW, ε = 1e-2",
        Criterion::AtMost(if flat { 1e-7 } else { 1e-6 }),
        move || {
            max_of(based_loops().iter().enumerate().map(|(i, g)| {
                let w = curve::random_tangent_field(g, ctx.field_seed(900 + i as u64), 3, true)?;
                let near = g.with_samples(
                    g.samples()
                        .iter()
                        .zip(w.vectors())
                        .map(|(p, x)| p + x * 1e-2)
                        .collect(),
                )?;
                let u = curve::random_tangent_field(g, ctx.field_seed(910 + i as u64), ctx.k_max, true)?;
                acs::chart_constancy_check(m, g, &near, &u)
            }))
        },
    );
    if m.is_group() {
        let left_vs_dev = move || -> Result<f64> {
            let g = ctx.loops[0].clone().with_basepoint_fixed(true);
            let dev = AcsOperator::developpement(m, &g)?;
            let left = AcsOperator::left_trivialization(m, &g)?;
            max_of((0..10).map(|k| {
                let u = curve::random_tangent_field(&g, ctx.field_seed(950 + k), ctx.k_max, true)?;
                Ok(left.apply_j(&u)?.minus(&dev.apply_j(&u)?).max_norm() / u.max_norm())
            }))
        };
        match m.kind() {
            ManifoldKind::FlatTorus(_) => r.add(
                "acs.left_flat",
                S,
                "flat group: left-trivialized Ĵ = développement Ĵ",
                Criterion::AtMost(1e-8),
                left_vs_dev,
            ),
            _ => r.add(
                "acs.left_differs",
                S,
                "non-flat group: left-trivialized Ĵ ≠ développement Ĵ (relative sup-norm)",
                Criterion::Above(1e-3),
                left_vs_dev,
            ),
        }
        r.add(
            "acs.left_isometry",
            S,
            "|dL_γ⁻¹ U| = ‖U‖_g for the bi-invariant metric",
            Criterion::AtMost(1e-10),
            move || {
                max_of(ctx.loops.iter().take(3).enumerate().map(|(i, g)| {
                    let u = curve::random_tangent_field(g, ctx.field_seed(960 + i as u64), ctx.k_max, false)?;
                    let lt = acs::left_trivialize(m, g, &u)?;
                    let gu = curve::pointwise_inner(m, g, &u, &u)?;
                    Ok(lt
                        .values
                        .iter()
                        .zip(&gu)
                        .map(|(a, q)| (a.norm_squared() - q).abs() / q.max(1e-300))
                        .fold(0.0, f64::max))
                }))
            },
        );
    }
}

fn contact_checks<'a>(ctx: &'a Context, r: &mut Registry<'a>) {
    use SuiteName::Contact as S;
    let m = &ctx.manifold;
    let Some(kind) = m.expanding_kind() else {
        return;
    };
    let dim = m.dim();
    let unit_loops = move || -> Result<Vec<DiscreteLoop>> {
        ctx.loops.iter().take(5).map(|g| curve::scale_to_unit_length(m, g)).collect()
    };
    r.add(
        "contact.lift_field",
        S,
        "X̂_γ(t) = X(γ(t))",
        Criterion::AtMost(0.0),
        move || {
            let g = &ctx.loops[0];
            let x = contact::lift_field(m, g)?;
            Ok(g.samples()
                .iter()
                .zip(x.vectors())
                .map(|(p, v)| {
                    let want = match kind {
                        crate::manifold::ExpandingField::HalfPosition => p * 0.5,
                        crate::manifold::ExpandingField::TimeTranslation => {
                            let mut e = DVector::zeros(dim);
                            e[dim - 1] = 1.0;
                            e
                        }
                        crate::manifold::ExpandingField::Zero => DVector::zeros(dim),
                    };
                    (v - want).norm()
                })
                .fold(0.0, f64::max))
        },
    );
    r.add(
        "contact.alpha_mu",
        S,
        "α(Y) = ω(X̂, Y) = ∫ g(∇_{γ'}X, Y) dt = ½∫ g(γ', Y) dt = μ(Y)",
        Criterion::AtMost(1e-6),
        move || {
            max_of((0..PAIRS).map(|i| {
                let g = &ctx.loops[i % ctx.loops.len()];
                let y = curve::random_tangent_field(g, ctx.field_seed(1000 + i as u64), ctx.k_max, false)?;
                Ok(contact::alpha(m, g, &y)?.residual)
            }))
        },
    );
    let liouville_pairs = move |h: f64| -> Result<f64> {
        max_of((0..5).map(|i| {
            let g = &ctx.loops[i];
            let u = curve::random_tangent_field(g, ctx.field_seed(1100 + i as u64), ctx.k_max, false)?;
            let v = curve::random_tangent_field(g, ctx.field_seed(1150 + i as u64), ctx.k_max, false)?;
            contact::liouville_residual(m, g, &u, &v, h)
        }))
    };
    r.add(
        "contact.liouville",
        S,
        "L_X̂ ω = ω: |d/ds ω_{ψ_s γ}(ψ_s* U, ψ_s* V)|₀ − ω(U, V)| at h = 1e-4",
        Criterion::AtMost(1e-5),
        move || liouville_pairs(1e-4),
    );
    let decay = move || -> Result<Vec<f64>> { DECAY_STEPS.iter().map(|&h| liouville_pairs(h)).collect() };
    match decay() {
        Ok(res) if res.iter().all(|&x| x < DECAY_FLOOR) => r.add(
            "contact.liouville_floor",
            S,
            "Liouville residual at rounding level for h ∈ {1e-3, 5e-4, 2.5e-4}",
            Criterion::AtMost(DECAY_FLOOR),
            move || Ok(decay()?.into_iter().fold(0.0, f64::max)),
        ),
        _ => r.add(
            "contact.liouville_decay",
            S,
            "Liouville residual O(h²): observed order over h ∈ {1e-3, 5e-4, 2.5e-4}",
            Criterion::Between(1.5, 2.5),
            move || Ok(observed_order(&decay()?)),
        ),
    }
    r.add(
        "contact.length_derivative",
        S,
        "d/ds length(ψ_s∘γ)|₀ = ½ length(γ), as ψ_s* g = e^s g scales lengths by e^{s/2}; note: the factor ½ comes from the square root, dropping it would give length(γ)",
        Criterion::AtMost(1e-5),
        move || {
            max_of(ctx.loops.iter().map(|g| {
                Ok((contact::length_derivative(m, g, 1e-4)? - 0.5 * curve::length(m, g)?).abs())
            }))
        },
    );
    r.add(
        "contact.transversality",
        S,
        "d/ds length(ψ_s∘γ)|₀ > 0: X̂ transverse to the level sets of length",
        Criterion::Above(0.0),
        move || min_of(ctx.loops.iter().map(|g| contact::length_derivative(m, g, 1e-4))),
    );
    if dim < 2 {
        return;
    }
    r.add(
        "contact.reeb_alpha",
        S,
        "R = 2γ'/‖γ'‖ on length(γ) = 1: α(R) = 1",
        Criterion::AtMost(1e-6),
        move || {
            max_of(unit_loops()?.iter().map(|g| {
                let rf = contact::reeb_field(m, g)?;
                Ok((contact::alpha(m, g, &rf)?.alpha_value - 1.0).abs())
            }))
        },
    );
    r.add(
        "contact.reeb_tangency",
        S,
        "dα(V, R) = ω(V, R) = 0 for V tangent to length = 1",
        Criterion::AtMost(1e-6),
        move || {
            let loops = unit_loops()?;
            max_of((0..20).map(|i| {
                let g = &loops[i % loops.len()];
                let rf = contact::reeb_field(m, g)?;
                let y = curve::random_tangent_field(g, ctx.field_seed(1200 + i as u64), ctx.k_max, false)?;
                let v = contact::project_tangent_to_level(m, g, &y, ctx.k_max)?;
                Ok(forms::omega_loop(m, g, &v, &rf)?.value.abs())
            }))
        },
    );
    r.add(
        "contact.reeb_period",
        S,
        "Reeb flow θ(s, t) = γ(σ⁻¹(σ(t) + 2s)) is closed of period ½",
        Criterion::AtMost(1e-6),
        move || max_of(unit_loops()?.iter().map(|g| Ok(contact::reeb_flow(m, g, 0.5)?.sup_distance_on(m, g)))),
    );
    r.add(
        "contact.reeb_additivity",
        S,
        "flow(flow(γ, a), b) = flow(γ, a + b)",
        Criterion::AtMost(1e-6),
        move || {
            max_of(unit_loops()?.iter().map(|g| {
                let ab = contact::reeb_flow(m, &contact::reeb_flow(m, g, 0.13)?, 0.21)?;
                Ok(ab.sup_distance_on(m, &contact::reeb_flow(m, g, 0.34)?))
            }))
        },
    );
    r.add(
        "contact.reeb_derivative",
        S,
        "d/ds flow(γ, s)|₀ = R, sup over t of ‖·‖_g",
        Criterion::AtMost(1e-5),
        move || {
            max_of(unit_loops()?.iter().map(|g| {
                let rf = contact::reeb_field(m, g)?;
                let diff = contact::reeb_flow_velocity(m, g, REEB_STEP)?.minus(&rf);
                let sq = curve::pointwise_inner(m, g, &diff, &diff)?;
                Ok(sq.iter().cloned().fold(0.0, f64::max).sqrt())
            }))
        },
    );
    r.add(
        "contact.quasi_contact_bound",
        S,
        "dim ker(dα|ker α) on length = 1 ≤ dim ker(E − I) ≤ dim M; value is the excess",
        Criterion::AtMost(0.0),
        move || {
            max_of(unit_loops()?.iter().take(3).map(|g| {
                let k = contact::quasi_contact_kernel(m, g, ctx.k_max, false)? as f64;
                let hol = transport::kernel_dimension(m, g, DEFAULT_KERNEL_TOL)? as f64;
                Ok((k - hol).max(0.0) + (hol - dim as f64).max(0.0))
            }))
        },
    );
    r.add(
        "contact.quasi_contact_based",
        S,
        "based loops of length 1: ker(dα|ker α) = 0",
        Criterion::AtMost(0.0),
        move || {
            max_of(unit_loops()?.iter().take(3).map(|g| {
                let g = g.clone().with_basepoint_fixed(true);
                Ok(contact::quasi_contact_kernel(m, &g, ctx.k_max, true)? as f64)
            }))
        },
    );
}
