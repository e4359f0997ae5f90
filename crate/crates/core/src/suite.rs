//! Verification suites: configuration, standard test curves and reports.

use crate::checks;
use crate::curve::DiscreteLoop;
use crate::error::{GeomError, Result};
use crate::manifold::{Manifold, ManifoldKind};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::panic::{self, AssertUnwindSafe};
use std::str::FromStr;
use std::time::Instant;

pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_K_MAX: usize = 8;
/// Number of standard loops generated per manifold.
pub const STANDARD_LOOPS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SuiteName {
    Manifold,
    Curve,
    Transport,
    Forms,
    Acs,
    Contact,
    All,
}

impl SuiteName {
    pub const CONCRETE: [SuiteName; 6] = [
        SuiteName::Manifold,
        SuiteName::Curve,
        SuiteName::Transport,
        SuiteName::Forms,
        SuiteName::Acs,
        SuiteName::Contact,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Manifold => "manifold",
            SuiteName::Curve => "curve",
            SuiteName::Transport => "transport",
            SuiteName::Forms => "forms",
            SuiteName::Acs => "acs",
            SuiteName::Contact => "contact",
            SuiteName::All => "all",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SuiteName {
    type Err = GeomError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "manifold" => SuiteName::Manifold,
            "curve" => SuiteName::Curve,
            "transport" => SuiteName::Transport,
            "forms" => SuiteName::Forms,
            "acs" => SuiteName::Acs,
            "contact" => SuiteName::Contact,
            "all" => SuiteName::All,
            other => return Err(GeomError::Config(format!("unknown suite {other:?}"))),
        })
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub manifold: String,
    pub n: usize,
    pub seed: u64,
    pub k_max: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub suites: Vec<SuiteName>,
    /// Replaces the first standard loop when given.
    pub loop_override: Option<DiscreteLoop>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            manifold: "euclidean:2".into(),
            n: 512,
            seed: DEFAULT_SEED,
            k_max: DEFAULT_K_MAX,
            tolerances: BTreeMap::new(),
            suites: vec![SuiteName::All],
            loop_override: None,
        }
    }
}

impl SuiteConfig {
    /// Checks the invariants and parses the manifold.
    pub fn validate(&self) -> Result<Manifold> {
        let m: Manifold = self.manifold.parse()?;
        if self.n < 64 || self.n % 2 != 0 {
            return Err(GeomError::Config(format!("N must be even and at least 64, got {}", self.n)));
        }
        if self.k_max == 0 || 2 * self.k_max >= self.n {
            return Err(GeomError::Config(format!(
                "K_max must satisfy 0 < K_max < N/2, got {}",
                self.k_max
            )));
        }
        if self.suites.is_empty() {
            return Err(GeomError::Config("no suites selected".into()));
        }
        for (name, v) in &self.tolerances {
            if !checks::is_known_tolerance(name) {
                return Err(GeomError::Config(format!("unknown tolerance {name:?}")));
            }
            if !v.is_finite() {
                return Err(GeomError::Config(format!("tolerance {name} must be finite")));
            }
        }
        if let Some(g) = &self.loop_override {
            if g.dim() != m.dim() {
                return Err(GeomError::Config(format!(
                    "loop has dimension {}, manifold {}",
                    g.dim(),
                    m.dim()
                )));
            }
        }
        Ok(m)
    }

    pub fn includes(&self, suite: SuiteName) -> bool {
        self.suites.iter().any(|&s| s == suite || s == SuiteName::All)
    }
}

/// Parses `name=value`.
pub fn parse_tolerance(s: &str) -> Result<(String, f64)> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| GeomError::Config(format!("tolerance must be name=value, got {s:?}")))?;
    let v: f64 = value
        .trim()
        .parse()
        .map_err(|_| GeomError::Config(format!("bad tolerance value {value:?}")))?;
    Ok((name.trim().to_string(), v))
}

fn ser_f64<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn de_f64<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// One check outcome. Non-finite values are serialized as null.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub suite: String,
    pub check_id: String,
    pub paper_anchor: String,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub value: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub tolerance: f64,
    pub passed: bool,
    pub runtime_ms: f64,
}

impl ReportRecord {
    pub const FIELDS: [&'static str; 7] = [
        "suite",
        "check_id",
        "paper_anchor",
        "value",
        "tolerance",
        "passed",
        "runtime_ms",
    ];

    /// Equality ignoring the timing, with values compared bitwise.
    pub fn same_outcome(&self, other: &ReportRecord) -> bool {
        self.suite == other.suite
            && self.check_id == other.check_id
            && self.paper_anchor == other.paper_anchor
            && self.value.to_bits() == other.value.to_bits()
            && self.tolerance.to_bits() == other.tolerance.to_bits()
            && self.passed == other.passed
    }
}

/// Pass rule of a check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Criterion {
    /// `|value| ≤ tol`.
    AtMost(f64),
    /// `value > bound`.
    Above(f64),
    /// `lo ≤ value ≤ hi`; the reported tolerance is `hi`.
    Between(f64, f64),
}

impl Criterion {
    pub fn passes(&self, value: f64) -> bool {
        match *self {
            Criterion::AtMost(t) => value.abs() <= t,
            Criterion::Above(b) => value > b,
            Criterion::Between(lo, hi) => (lo..=hi).contains(&value),
        }
    }

    pub fn reported_tolerance(&self) -> f64 {
        match *self {
            Criterion::AtMost(t) | Criterion::Above(t) => t,
            Criterion::Between(_, hi) => hi,
        }
    }

    /// Applies overrides keyed by `key` (and `key.lo` / `key.hi` for ranges).
    pub fn with_overrides(self, key: &str, tol: &BTreeMap<String, f64>) -> Self {
        match self {
            Criterion::AtMost(t) => Criterion::AtMost(*tol.get(key).unwrap_or(&t)),
            Criterion::Above(b) => Criterion::Above(*tol.get(key).unwrap_or(&b)),
            Criterion::Between(lo, hi) => Criterion::Between(
                *tol.get(&format!("{key}.lo")).unwrap_or(&lo),
                *tol.get(&format!("{key}.hi")).unwrap_or(&hi),
            ),
        }
    }
}

/// Band-limited scalar `Σ_{k=1}^{K} a_k cos 2πkt + b_k sin 2πkt`.
#[derive(Debug, Clone)]
pub struct Band {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Band {
    pub fn random(rng: &mut ChaCha8Rng, k_max: usize, amplitude: f64) -> Self {
        let mut draw = |k: usize| amplitude * rng.random_range(-1.0..1.0) / k as f64;
        let a = (1..=k_max).map(&mut draw).collect();
        let b = (1..=k_max).map(&mut draw).collect();
        Self { a, b }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.a
            .iter()
            .zip(&self.b)
            .enumerate()
            .map(|(i, (a, b))| {
                let x = 2.0 * PI * (i + 1) as f64 * t;
                a * x.cos() + b * x.sin()
            })
            .sum()
    }
}

/// A curve given in closed form, sampled as a loop or as a path.
pub struct Shape {
    f: Box<dyn Fn(f64) -> DVector<f64>>,
    pub winding: DVector<f64>,
}

impl Shape {
    pub fn new(f: impl Fn(f64) -> DVector<f64> + 'static, winding: DVector<f64>) -> Self {
        Self {
            f: Box::new(f),
            winding,
        }
    }

    pub fn eval(&self, t: f64) -> DVector<f64> {
        (self.f)(t)
    }

    pub fn sample_loop(&self, n: usize) -> Result<DiscreteLoop> {
        DiscreteLoop::closed_from_fn(n, self.winding.clone(), |t| self.eval(t))
    }

    pub fn sample_path(&self, n: usize) -> Result<DiscreteLoop> {
        DiscreteLoop::path_from_fn(n, |t| self.eval(t))
    }
}

/// Derived stream seed for a tagged sub-task.
pub fn sub_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard test curve `j` on `m`.
pub fn standard_shape(m: &Manifold, j: usize, rng: &mut ChaCha8Rng) -> Shape {
    match m.kind() {
        ManifoldKind::Euclidean(d) => {
            let d = *d;
            let c: Vec<f64> = (0..d).map(|_| rng.random_range(-0.5..0.5)).collect();
            let r1 = rng.random_range(0.6..1.4);
            let r2 = rng.random_range(0.6..1.4);
            let bands: Vec<Band> = (0..d).map(|_| Band::random(rng, 3, 0.1)).collect();
            Shape::new(
                move |t| {
                    let w = 2.0 * PI * t;
                    DVector::from_fn(d, |i, _| {
                        let base = match i {
                            0 => r1 * w.cos(),
                            1 => r2 * w.sin(),
                            _ => 0.0,
                        };
                        c[i] + base + bands[i].eval(t)
                    })
                },
                DVector::zeros(d),
            )
        }
        ManifoldKind::FlatTorus(d) => {
            let d = *d;
            let mut w: Vec<f64> = (0..d).map(|i| ((j + i) % 3) as f64 - 1.0).collect();
            if w.iter().all(|&x| x == 0.0) {
                w[0] = 1.0;
            }
            let x0: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
            // |band'| < 0.54, so a unit winding keeps the speed away from 0.
            let bands: Vec<Band> = (0..d).map(|_| Band::random(rng, 3, 0.02)).collect();
            let wv = DVector::from_vec(w.clone());
            Shape::new(
                move |t| DVector::from_fn(d, |i, _| x0[i] + w[i] * t + bands[i].eval(t)),
                wv,
            )
        }
        ManifoldKind::Sphere(_) => {
            let winding = DVector::from_vec(vec![0.0, 2.0 * PI]);
            let exact = [PI / 2.0, PI / 3.0, PI / 6.0];
            if j < exact.len() {
                let th = exact[j];
                return Shape::new(move |t| DVector::from_vec(vec![th, 2.0 * PI * t]), winding);
            }
            let th0 = if j % 2 == 0 {
                rng.random_range(0.6..1.2)
            } else {
                rng.random_range(1.9..2.5)
            };
            let phi0 = rng.random_range(0.0..2.0 * PI);
            let bt = Band::random(rng, 3, 0.1);
            let bp = Band::random(rng, 3, 0.2);
            Shape::new(
                move |t| DVector::from_vec(vec![th0 + bt.eval(t), phi0 + 2.0 * PI * t + bp.eval(t)]),
                winding,
            )
        }
        ManifoldKind::RotationGroup3 => {
            // Quadrature pair in the first two axes keeps the speed ≥ 2π·min(a, b).
            let a = rng.random_range(0.4..0.8);
            let b = rng.random_range(0.4..0.8);
            let c = rng.random_range(-0.4..0.4);
            let bands: Vec<Band> = (0..3).map(|_| Band::random(rng, 2, 0.05)).collect();
            let origin: Vec<f64> = bands.iter().map(|b| b.eval(0.0)).collect();
            Shape::new(
                move |t| {
                    let w = 2.0 * PI * t;
                    let base = [a * (w.cos() - 1.0), b * w.sin(), c * (2.0 * w).sin()];
                    DVector::from_fn(3, |i, _| base[i] + bands[i].eval(t) - origin[i])
                },
                DVector::zeros(3),
            )
        }
        ManifoldKind::Stabilized(base) => {
            let inner = standard_shape(base, j, rng);
            let rs = rng.random_range(0.4..0.8);
            let bs = Band::random(rng, 2, 0.05);
            let d = base.dim();
            let mut winding = DVector::zeros(d + 1);
            winding.rows_mut(0, d).copy_from(&inner.winding);
            Shape::new(
                move |t| {
                    let x = inner.eval(t);
                    DVector::from_fn(d + 1, |i, _| {
                        if i < d {
                            x[i]
                        } else {
                            rs * (2.0 * PI * t).sin() + bs.eval(t)
                        }
                    })
                },
                winding,
            )
        }
    }
}

/// A point of the chart interior away from its boundary.
pub fn standard_point(m: &Manifold, rng: &mut ChaCha8Rng) -> DVector<f64> {
    match m.kind() {
        ManifoldKind::Euclidean(d) => DVector::from_fn(*d, |_, _| rng.random_range(-1.0..1.0)),
        ManifoldKind::FlatTorus(d) => DVector::from_fn(*d, |_, _| rng.random_range(0.0..1.0)),
        ManifoldKind::Sphere(_) => DVector::from_vec(vec![
            rng.random_range(1.0..2.1),
            rng.random_range(0.0..2.0 * PI),
        ]),
        ManifoldKind::RotationGroup3 => {
            let v = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
            let nrm = v.norm();
            if nrm > 1.0 {
                v / nrm
            } else {
                v
            }
        }
        ManifoldKind::Stabilized(base) => {
            let p = standard_point(base, rng);
            let d = p.len();
            let s = rng.random_range(-1.0..1.0);
            DVector::from_fn(d + 1, |i, _| if i < d { p[i] } else { s })
        }
    }
}

/// Shared state of a suite run.
pub struct Context {
    pub manifold: Manifold,
    pub n: usize,
    pub seed: u64,
    pub k_max: usize,
    pub shapes: Vec<Shape>,
    pub loops: Vec<DiscreteLoop>,
    pub paths: Vec<DiscreteLoop>,
}

impl Context {
    pub fn new(cfg: &SuiteConfig) -> Result<Self> {
        let manifold = cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, 1));
        let shapes: Vec<Shape> = (0..STANDARD_LOOPS)
            .map(|j| standard_shape(&manifold, j, &mut rng))
            .collect();
        let mut loops = shapes
            .iter()
            .map(|s| s.sample_loop(cfg.n))
            .collect::<Result<Vec<_>>>()?;
        if let Some(g) = &cfg.loop_override {
            loops[0] = g.clone();
        }
        let paths = shapes
            .iter()
            .map(|s| s.sample_path(cfg.n + 1))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            manifold,
            n: cfg.n,
            seed: cfg.seed,
            k_max: cfg.k_max,
            shapes,
            loops,
            paths,
        })
    }

    pub fn rng(&self, tag: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(sub_seed(self.seed, tag))
    }

    pub fn field_seed(&self, tag: u64) -> u64 {
        sub_seed(self.seed, tag)
    }
}

/// A registered check.
pub struct Check<'a> {
    pub id: String,
    /// Tolerance override key.
    pub key: &'static str,
    pub suite: SuiteName,
    pub anchor: &'static str,
    pub criterion: Criterion,
    pub run: Box<dyn Fn() -> Result<f64> + 'a>,
}

fn run_check(check: &Check<'_>, tol: &BTreeMap<String, f64>) -> ReportRecord {
    let criterion = check.criterion.with_overrides(check.key, tol);
    let start = Instant::now();
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| (check.run)()));
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let (value, passed, note) = match outcome {
        Ok(Ok(v)) => (v, v.is_finite() && criterion.passes(v), String::new()),
        Ok(Err(e)) => (f64::NAN, false, format!(" [error: {e}]")),
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            (f64::NAN, false, format!(" [panic: {msg}]"))
        }
    };
    ReportRecord {
        suite: check.suite.as_str().to_string(),
        check_id: check.id.clone(),
        paper_anchor: format!("{}{note}", check.anchor),
        value,
        tolerance: criterion.reported_tolerance(),
        passed,
        runtime_ms,
    }
}

/// Runs every registered check of the selected suites, sorted by check id.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<ReportRecord>> {
    let ctx = Context::new(cfg)?;
    let registry = checks::registry(&ctx);
    let mut records: Vec<ReportRecord> = registry
        .iter()
        .filter(|c| cfg.includes(c.suite))
        .map(|c| run_check(c, &cfg.tolerances))
        .collect();
    records.sort_by(|a, b| a.check_id.cmp(&b.check_id));
    Ok(records)
}

/// Process exit code for a finished run.
pub fn exit_code(records: &[ReportRecord]) -> i32 {
    if records.iter().all(|r| r.passed) {
        0
    } else {
        1
    }
}
