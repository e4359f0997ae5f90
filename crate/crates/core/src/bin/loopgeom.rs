use clap::{Args, Parser, Subcommand};
use loopgeom::acs::AcsOperator;
use loopgeom::curve::{self, DiscreteLoop};
use loopgeom::io::{self, ReportFormat};
use loopgeom::suite::{self, Context, ReportRecord, SuiteConfig, SuiteName};
use loopgeom::{contact, forms, transport, GeomError, Result};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "loopgeom", version, about = "Numerical checks on loop and path spaces of Riemannian manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// euclidean:<n>, sphere:<r>, torus:<n>, so3 or stab:<manifold>
    #[arg(long, global = true, default_value = "euclidean:2")]
    manifold: String,
    /// Samples per loop.
    #[arg(long, global = true, default_value_t = 512)]
    n: usize,
    #[arg(long, global = true, env = "LOOPGEOM_SEED", default_value_t = suite::DEFAULT_SEED)]
    seed: u64,
    /// Highest Fourier mode of test fields and bases.
    #[arg(long = "k-max", global = true, default_value_t = suite::DEFAULT_K_MAX)]
    k_max: usize,
    /// Loop CSV (t,x1,...,xn) used instead of the first standard loop.
    #[arg(long = "loop", global = true)]
    loop_csv: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "json")]
    format: String,
    /// Tolerance override name=value, repeatable.
    #[arg(long = "tol", global = true)]
    tol: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the check suites and emit a report.
    Verify {
        /// manifold, curve, transport, forms, acs, contact or all; repeatable.
        #[arg(long, default_value = "all")]
        suite: Vec<String>,
    },
    /// Holonomy of the loop: matrix, rotation angle, dim ker(E − I).
    Holonomy,
    /// Numeric kernel of ω against the holonomy oracle.
    KernelDim,
    /// ω and μ on random fields along the loop.
    Forms {
        #[arg(long, default_value_t = 5)]
        pairs: usize,
    },
    /// Almost complex structure on random based fields.
    Acs {
        #[arg(long, default_value_t = 5)]
        fields: usize,
    },
    /// α = μ, length derivative and quasi-contact kernel.
    Contact {
        #[arg(long, default_value_t = 5)]
        fields: usize,
    },
    /// Reeb flow of the loop rescaled to length 1, written as loop CSV.
    Reeb {
        /// Flow time.
        #[arg(long, default_value_t = 0.25)]
        s: f64,
        /// Rescale a --loop input to length 1 first.
        #[arg(long)]
        normalize: bool,
    },
}

fn config(common: &Common, suites: Vec<SuiteName>) -> Result<SuiteConfig> {
    let mut cfg = SuiteConfig {
        manifold: common.manifold.clone(),
        n: common.n,
        seed: common.seed,
        k_max: common.k_max,
        tolerances: BTreeMap::new(),
        suites,
        loop_override: None,
    };
    for t in &common.tol {
        let (name, v) = suite::parse_tolerance(t)?;
        cfg.tolerances.insert(name, v);
    }
    if let Some(path) = &common.loop_csv {
        let m = cfg.validate()?;
        let g = io::load_loop(&m, path)?;
        if !g.is_periodic() {
            return Err(GeomError::Config(format!("{} holds a path, expected a loop", path.display())));
        }
        cfg.n = g.n();
        cfg.loop_override = Some(g);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output(common: &Common) -> Result<Box<dyn Write>> {
    Ok(match &common.out {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn emit_json(common: &Common, v: &Value) -> Result<()> {
    let mut out = output(common)?;
    serde_json::to_writer_pretty(&mut out, v).map_err(|e| GeomError::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn summary(records: &[ReportRecord]) {
    for r in records {
        eprintln!(
            "{} {:<40} value={:<12.4e} tol={:.1e}",
            if r.passed { "pass" } else { "FAIL" },
            r.check_id,
            r.value,
            r.tolerance
        );
    }
    let failed = records.iter().filter(|r| !r.passed).count();
    eprintln!("{} checks, {} failed", records.len(), failed);
}

fn run(cli: &Cli) -> std::result::Result<u8, (u8, GeomError)> {
    let c = &cli.common;
    let cfg_err = |e: GeomError| (2u8, e);
    let format: ReportFormat = c.format.parse().map_err(cfg_err)?;
    let suites = match &cli.command {
        Command::Verify { suite } => suite
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<SuiteName>>>()
            .map_err(cfg_err)?,
        _ => vec![SuiteName::All],
    };
    let cfg = config(c, suites).map_err(cfg_err)?;
    let fail = |e: GeomError| (1u8, e);
    if let Command::Verify { .. } = cli.command {
        let records = suite::run_suite(&cfg).map_err(cfg_err)?;
        let out = output(c).map_err(fail)?;
        io::write_report(&records, format, out).map_err(fail)?;
        summary(&records);
        return Ok(suite::exit_code(&records) as u8);
    }
    let ctx = Context::new(&cfg).map_err(cfg_err)?;
    let m = &ctx.manifold;
    let g = &ctx.loops[0];
    let value = match &cli.command {
        Command::Verify { .. } => unreachable!(),
        Command::Holonomy => holonomy(&ctx, g),
        Command::KernelDim => kernel_dim(&ctx, g),
        Command::Forms { pairs } => forms_report(&ctx, g, *pairs),
        Command::Acs { fields } => acs_report(&ctx, g, *fields),
        Command::Contact { fields } => contact_report(&ctx, g, *fields),
        Command::Reeb { s, normalize } => {
            let start = if c.loop_csv.is_none() || *normalize {
                curve::scale_to_unit_length(m, g)
            } else {
                Ok(g.clone())
            };
            let flowed = start.and_then(|g| contact::reeb_flow(m, &g, *s)).map_err(fail)?;
            let out = output(c).map_err(fail)?;
            io::write_loop(&flowed, out).map_err(fail)?;
            return Ok(0);
        }
    }
    .map_err(fail)?;
    emit_json(c, &value).map_err(fail)?;
    Ok(0)
}

fn matrix_rows(e: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..e.nrows()).map(|i| e.row(i).iter().cloned().collect()).collect()
}

fn holonomy(ctx: &Context, g: &DiscreteLoop) -> Result<Value> {
    let m = &ctx.manifold;
    let rec = transport::parallel_transport_with(m, g, None, transport::DEFAULT_SUBSTEPS)?;
    Ok(json!({
        "manifold": m.to_string(),
        "n": g.n(),
        "holonomy": matrix_rows(&rec.end_matrix),
        "rotation_angle": transport::rotation_angle(&rec.end_matrix),
        "orthogonality_defect": rec.orthogonality_defect(),
        "kernel_dim": transport::unit_eigenspace_dim(&rec.end_matrix, transport::DEFAULT_KERNEL_TOL),
    }))
}

fn kernel_dim(ctx: &Context, g: &DiscreteLoop) -> Result<Value> {
    let m = &ctx.manifold;
    let free = forms::omega_rank_profile(m, g, ctx.k_max)?;
    let based = forms::omega_rank_profile(m, &g.clone().with_basepoint_fixed(true), ctx.k_max)?;
    Ok(json!({
        "manifold": m.to_string(),
        "k_max": ctx.k_max,
        "omega_kernel_dim": free.kernel_dim,
        "holonomy_kernel_dim": transport::kernel_dimension(m, g, transport::DEFAULT_KERNEL_TOL)?,
        "based_kernel_dim": based.kernel_dim,
        "basis_size": free.basis_size,
        "smallest_relative_singular_value": free.smallest_relative(),
    }))
}

fn forms_report(ctx: &Context, g: &DiscreteLoop, pairs: usize) -> Result<Value> {
    let m = &ctx.manifold;
    let mut rows = Vec::new();
    for i in 0..pairs as u64 {
        let u = curve::random_tangent_field(g, ctx.field_seed(10_000 + i), ctx.k_max, false)?;
        let v = curve::random_tangent_field(g, ctx.field_seed(20_000 + i), ctx.k_max, false)?;
        let uv = forms::omega_loop(m, g, &u, &v)?.value;
        let vu = forms::omega_loop(m, g, &v, &u)?.value;
        rows.push(json!({
            "omega_uv": uv,
            "omega_vu": vu,
            "antisymmetry": uv + vu,
            "mu_u": forms::mu(m, g, &u)?.value,
        }));
    }
    Ok(json!({ "manifold": m.to_string(), "pairs": rows }))
}

fn acs_report(ctx: &Context, g: &DiscreteLoop, fields: usize) -> Result<Value> {
    let m = &ctx.manifold;
    let g = g.clone().with_basepoint_fixed(true);
    let op = AcsOperator::developpement(m, &g)?;
    let mut rows = Vec::new();
    for i in 0..fields as u64 {
        let u = curve::random_tangent_field(&g, ctx.field_seed(30_000 + i), ctx.k_max, true)?;
        let v = curve::random_tangent_field(&g, ctx.field_seed(40_000 + i), ctx.k_max, true)?;
        let jj = op.apply_j(&op.apply_j(&u)?)?;
        rows.push(json!({
            "j_square_residual": jj.plus(&u).max_norm() / u.max_norm(),
            "omega_fourier": op.omega_fourier(&u, &v)?,
            "omega_quadrature": forms::omega_loop(m, &g, &u, &v)?.value,
            "compat_metric_uu": op.compat_metric(&u, &u)?,
        }));
    }
    Ok(json!({ "manifold": m.to_string(), "mode": op.mode().as_str(), "fields": rows }))
}

fn contact_report(ctx: &Context, g: &DiscreteLoop, fields: usize) -> Result<Value> {
    let m = &ctx.manifold;
    let mut alpha = Vec::new();
    for i in 0..fields as u64 {
        let y = curve::random_tangent_field(g, ctx.field_seed(50_000 + i), ctx.k_max, false)?;
        let e = contact::alpha(m, g, &y)?;
        alpha.push(json!({ "alpha": e.alpha_value, "mu": e.mu_value, "residual": e.residual }));
    }
    let unit = curve::scale_to_unit_length(m, g)?;
    Ok(json!({
        "manifold": m.to_string(),
        "length": curve::length(m, g)?,
        "length_derivative": contact::length_derivative(m, g, 1e-4)?,
        "alpha": alpha,
        "quasi_contact_kernel": contact::quasi_contact_kernel(m, &unit, ctx.k_max, false)?,
        "quasi_contact_kernel_based": contact::quasi_contact_kernel(m, &unit.with_basepoint_fixed(true), ctx.k_max, true)?,
    }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err((code, e)) => {
            eprintln!("loopgeom: {e}");
            ExitCode::from(code)
        }
    }
}
