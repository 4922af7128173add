//! Command line front end: geometry checking, gluing reports,
//! reparameterization, boundary initialization, L2 projection and
//! convergence studies, and SVG rendering.
//!
//! Exit codes: 0 on success, 1 on mathematical failure (non-AS-G1 input,
//! irregular patches, infeasible fits) with JSON diagnostics on standard
//! output, 2 on usage errors.

use asg1_core::gluing::{check_asg1, compute_exact_gluing, fit_linear_gluing, GluingData};
use asg1_core::io::{geometry_to_rat, parse_geometry, parse_rat, serialize_geometry};
use asg1_core::multipatch::{check_regularity, MultiPatch, Regularity};
use asg1_core::optimizer::{init_from_boundary, reparameterize, ObjectiveWeights};
use asg1_core::projection::{geometry_to_f64, run_convergence, C1Mode, TargetFunction};
use asg1_core::scalar::Scalar;
use asg1_core::svg::{render_convergence, render_geometry};
use asg1_core::{NumberMode, Rat};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "asg1",
    version,
    about = "AS-G1 multi-patch parameterization toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ReparamArgs {
    /// Input geometry file (JSON).
    input: PathBuf,
    /// Target degree.
    #[arg(short)]
    p: usize,
    /// Target regularity.
    #[arg(short)]
    r: i32,
    /// Inner knots per direction.
    #[arg(short, default_value_t = 0)]
    k: usize,
    /// Weight of the parametric length functional.
    #[arg(long, default_value = "0")]
    lambda_l: String,
    /// Weight of the uniformity functional.
    #[arg(long, default_value = "0")]
    lambda_u: String,
    /// Weight of the beta term in the gluing fit.
    #[arg(long, default_value = "1/100")]
    lambda_beta: String,
    /// Run the pipeline in exact rational arithmetic (default).
    #[arg(long, conflicts_with = "float")]
    exact: bool,
    /// Run the pipeline in f64 arithmetic.
    #[arg(long)]
    float: bool,
    /// Where to write the reparameterized geometry.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Certify whether every interface of a geometry is AS-G1.
    Check { input: PathBuf },
    /// Report exact and fitted gluing data per interface.
    Gluing {
        input: PathBuf,
        #[arg(long, default_value = "1/100")]
        lambda_beta: String,
    },
    /// Construct an AS-G1 reparameterization in S_k^{p,r}.
    Reparam(ReparamArgs),
    /// Fill patch interiors from fixed boundary control points.
    InitBoundary {
        input: PathBuf,
        #[arg(long, default_value = "1")]
        lambda_l: String,
        #[arg(long, default_value = "0")]
        lambda_u: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// L2-project a target function onto the C1 space at one level.
    Project {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        level: usize,
        #[arg(long, default_value = "paper23")]
        target: String,
        /// Use exact (higher-degree) gluing functions instead of fitted
        /// linear ones; works on non-AS-G1 geometries.
        #[arg(long)]
        exact_gluing: bool,
    },
    /// Dyadic-refinement convergence study; prints CSV.
    Convergence {
        input: PathBuf,
        #[arg(long, default_value_t = 3)]
        levels: usize,
        #[arg(long, default_value = "paper23")]
        target: String,
        /// Also write the CSV table to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also write a log-log SVG plot to this file.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long)]
        exact_gluing: bool,
    },
    /// Render a geometry to SVG.
    Render {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 4)]
        isolines: usize,
    },
    /// Check topology and patch regularity.
    Validate { input: PathBuf },
}

/// Failures that carry an exit code: 1 for mathematical infeasibility
/// (diagnostics as JSON on stdout), 2 for usage problems (message on
/// stderr).
enum Failure {
    Math(serde_json::Value),
    Usage(String),
}

impl Failure {
    fn math(kind: &str, detail: impl ToString) -> Failure {
        Failure::Math(json!({ "error": kind, "detail": detail.to_string() }))
    }
}

type CmdResult = Result<(), Failure>;

fn read_geometry(path: &Path) -> Result<asg1_core::io::ParsedGeometry, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    parse_geometry(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<(), Failure> {
    std::fs::write(path, content)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn parse_weight(name: &str, s: &str) -> Result<Rat, Failure> {
    let v = parse_rat(s).map_err(|e| Failure::Usage(format!("--{name}: {e}")))?;
    if v.is_negative() {
        return Err(Failure::Usage(format!("--{name} must be non-negative")));
    }
    Ok(v)
}

fn interface_label(geom: &MultiPatch<Rat>, idx: usize) -> serde_json::Value {
    let itf = &geom.interfaces[idx];
    json!({
        "patch_a": itf.edge_a.patch,
        "side_a": format!("{:?}", itf.edge_a.side).to_lowercase(),
        "patch_b": itf.edge_b.patch,
        "side_b": format!("{:?}", itf.edge_b.side).to_lowercase(),
    })
}

fn gluing_json(g: &GluingData<Rat>) -> serde_json::Value {
    let f = |v: &Rat| v.to_f64();
    json!({
        "a0_l": f(&g.a0_l), "a1_l": f(&g.a1_l),
        "a0_r": f(&g.a0_r), "a1_r": f(&g.a1_r),
        "b0_l": f(&g.b0_l), "b1_l": f(&g.b1_l),
        "b0_r": f(&g.b0_r), "b1_r": f(&g.b1_r),
    })
}

fn cmd_check(input: &Path) -> CmdResult {
    let parsed = read_geometry(input)?;
    let geom = &parsed.geometry;
    let mut entries = Vec::new();
    let mut all = true;
    for (idx, itf) in geom.interfaces.iter().enumerate() {
        let report = check_asg1(geom, itf)
            .map_err(|e| Failure::math("gluing_failure", e))?;
        all &= report.is_asg1;
        let mut entry = interface_label(geom, idx);
        entry["is_asg1"] = json!(report.is_asg1);
        if let Some(w) = &report.witness {
            entry["witness"] = gluing_json(w);
        }
        entries.push(entry);
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({ "is_asg1": all, "interfaces": entries })).unwrap()
    );
    if all {
        Ok(())
    } else {
        Err(Failure::Math(json!({
            "error": "not_asg1",
            "detail": "at least one interface admits no linear gluing data"
        })))
    }
}

fn cmd_gluing(input: &Path, lambda_beta: &str) -> CmdResult {
    let parsed = read_geometry(input)?;
    let geom = &parsed.geometry;
    let lam = parse_weight("lambda-beta", lambda_beta)?;
    let mut entries = Vec::new();
    for (idx, itf) in geom.interfaces.iter().enumerate() {
        let exact = compute_exact_gluing(geom, itf)
            .map_err(|e| Failure::math("gluing_failure", e))?;
        let fitted = fit_linear_gluing(&exact, &lam)
            .map_err(|e| Failure::math("gluing_fit_failure", e))?;
        let mut entry = interface_label(geom, idx);
        entry["alpha_degree"] = json!(exact.alpha_l.space.degree());
        entry["beta_bar_degree"] = json!(exact.beta_bar.space.degree());
        entry["fitted"] = gluing_json(&fitted);
        entries.push(entry);
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&json!({ "interfaces": entries })).unwrap()
    );
    Ok(())
}

fn gluing_from_f64(g: &GluingData<f64>) -> GluingData<Rat> {
    GluingData {
        a0_l: Rat::from_f64(g.a0_l),
        a1_l: Rat::from_f64(g.a1_l),
        a0_r: Rat::from_f64(g.a0_r),
        a1_r: Rat::from_f64(g.a1_r),
        b0_l: Rat::from_f64(g.b0_l),
        b1_l: Rat::from_f64(g.b1_l),
        b0_r: Rat::from_f64(g.b0_r),
        b1_r: Rat::from_f64(g.b1_r),
    }
}

fn cmd_reparam(args: &ReparamArgs) -> CmdResult {
    let parsed = read_geometry(&args.input)?;
    let fail = |e: asg1_core::optimizer::OptimizerError| Failure::math("reparam_failure", e);
    let (report, geometry, gluing, mode) = if args.float {
        let weights = ObjectiveWeights {
            lambda_l: parse_weight("lambda-l", &args.lambda_l)?.to_f64(),
            lambda_u: parse_weight("lambda-u", &args.lambda_u)?.to_f64(),
            lambda_beta: parse_weight("lambda-beta", &args.lambda_beta)?.to_f64(),
            quadrature_per_span: args.p + 2,
        };
        let geom_f = geometry_to_f64(&parsed.geometry)
            .map_err(|e| Failure::math("conversion_failure", e))?;
        let res = reparameterize(&geom_f, args.p, args.r, args.k, &weights).map_err(fail)?;
        let geometry = geometry_to_rat(&res.geometry)
            .map_err(|e| Failure::math("conversion_failure", e))?;
        let gluing: Vec<GluingData<Rat>> = res.gluing.iter().map(gluing_from_f64).collect();
        (res.report, geometry, gluing, NumberMode::Float64)
    } else {
        let weights = ObjectiveWeights {
            lambda_l: parse_weight("lambda-l", &args.lambda_l)?,
            lambda_u: parse_weight("lambda-u", &args.lambda_u)?,
            lambda_beta: parse_weight("lambda-beta", &args.lambda_beta)?,
            quadrature_per_span: args.p + 2,
        };
        let res =
            reparameterize(&parsed.geometry, args.p, args.r, args.k, &weights).map_err(fail)?;
        (
            res.report,
            res.geometry,
            res.gluing,
            NumberMode::ExactRational,
        )
    };
    if report.interfaces_asg1.iter().any(|b| !b) || report.patches_regular.iter().any(|b| !b) {
        return Err(Failure::Math(json!({
            "error": "reparam_not_certified",
            "report": report,
        })));
    }
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    if let Some(out) = &args.output {
        let text = serialize_geometry(&geometry, Some(&gluing), mode)
            .map_err(|e| Failure::math("serialize_failure", e))?;
        write_file(out, &text)?;
    }
    Ok(())
}

fn cmd_init_boundary(
    input: &Path,
    lambda_l: &str,
    lambda_u: &str,
    output: Option<&Path>,
) -> CmdResult {
    let parsed = read_geometry(input)?;
    let weights = ObjectiveWeights {
        lambda_l: parse_weight("lambda-l", lambda_l)?,
        lambda_u: parse_weight("lambda-u", lambda_u)?,
        lambda_beta: Rat::from_ratio(1, 100),
        quadrature_per_span: parsed.geometry.space().degree() + 2,
    };
    let geom = init_from_boundary(&parsed.geometry, &weights)
        .map_err(|e| Failure::math("init_failure", e))?;
    let text = serialize_geometry(&geom, None, NumberMode::ExactRational)
        .map_err(|e| Failure::math("serialize_failure", e))?;
    match output {
        Some(path) => write_file(path, &text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn fitted_gluing(parsed: &asg1_core::io::ParsedGeometry) -> Result<Vec<GluingData<Rat>>, Failure> {
    if let Some(g) = &parsed.gluing {
        return Ok(g.clone());
    }
    let lam = Rat::from_ratio(1, 100);
    parsed
        .geometry
        .interfaces
        .iter()
        .map(|itf| {
            compute_exact_gluing(&parsed.geometry, itf)
                .and_then(|exact| fit_linear_gluing(&exact, &lam))
                .map_err(|e| Failure::math("gluing_fit_failure", e))
        })
        .collect()
}

fn resolve_target(name: &str) -> Result<TargetFunction, Failure> {
    TargetFunction::by_name(name)
        .map_err(|e| Failure::Usage(format!("unknown target function: {e}")))
}

fn cmd_convergence(
    input: &Path,
    levels: usize,
    target: &str,
    csv: Option<&Path>,
    svg: Option<&Path>,
    exact_gluing: bool,
) -> CmdResult {
    let parsed = read_geometry(input)?;
    let tf = resolve_target(target)?;
    let fitted;
    let mode = if exact_gluing {
        C1Mode::ExactGluing
    } else {
        fitted = fitted_gluing(&parsed)?;
        C1Mode::Fitted(&fitted)
    };
    let report = run_convergence(&parsed.geometry, mode, levels, &tf, None)
        .map_err(|e| Failure::math("projection_failure", e))?;
    let table = report.to_csv();
    print!("{table}");
    if let Some(path) = csv {
        write_file(path, &table)?;
    }
    if let Some(path) = svg {
        let plot =
            render_convergence(&report).map_err(|e| Failure::math("render_failure", e))?;
        write_file(path, &plot)?;
    }
    Ok(())
}

fn cmd_project(input: &Path, level: usize, target: &str, exact_gluing: bool) -> CmdResult {
    let parsed = read_geometry(input)?;
    let tf = resolve_target(target)?;
    let fitted;
    let mode = if exact_gluing {
        C1Mode::ExactGluing
    } else {
        fitted = fitted_gluing(&parsed)?;
        C1Mode::Fitted(&fitted)
    };
    let report = run_convergence(&parsed.geometry, mode, level, &tf, None)
        .map_err(|e| Failure::math("projection_failure", e))?;
    let row = report.rows.last().expect("at least one level");
    println!("{}", serde_json::to_string_pretty(row).unwrap());
    Ok(())
}

fn cmd_render(input: &Path, output: &Path, isolines: usize) -> CmdResult {
    let parsed = read_geometry(input)?;
    let geom_f =
        geometry_to_f64(&parsed.geometry).map_err(|e| Failure::math("conversion_failure", e))?;
    let svg =
        render_geometry(&geom_f, isolines).map_err(|e| Failure::math("render_failure", e))?;
    write_file(output, &svg)
}

fn cmd_validate(input: &Path) -> CmdResult {
    let parsed = read_geometry(input)?;
    let geom = &parsed.geometry;
    let mut patches = Vec::new();
    let mut all_regular = true;
    for pm in &geom.patches {
        let reg = check_regularity(pm, 4).map_err(|e| Failure::math("regularity_failure", e))?;
        let ok = matches!(reg, Regularity::Regular);
        all_regular &= ok;
        patches.push(json!({ "id": pm.id, "regular": ok }));
    }
    let summary = json!({
        "patches": patches,
        "interfaces": geom.interfaces.len(),
        "boundary_edges": geom.boundary_edges.len(),
        "vertices": geom.vertices.len(),
        "regular": all_regular,
    });
    println!("{}", serde_json::to_string_pretty(&summary).unwrap());
    if all_regular {
        Ok(())
    } else {
        Err(Failure::Math(json!({
            "error": "irregular_patch",
            "detail": "at least one patch failed the regularity check"
        })))
    }
}

/// The implementation is single-threaded; the variable is validated and a
/// value of 1 is honored exactly, larger caps are accepted as upper bounds.
fn check_thread_env() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("ASG1_NUM_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Failure::Usage(format!("ASG1_NUM_THREADS must be a positive integer, got {v:?}")))?;
        if n == 0 {
            return Err(Failure::Usage(
                "ASG1_NUM_THREADS must be a positive integer".to_string(),
            ));
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> CmdResult {
    check_thread_env()?;
    match &cli.command {
        Command::Check { input } => cmd_check(input),
        Command::Gluing { input, lambda_beta } => cmd_gluing(input, lambda_beta),
        Command::Reparam(args) => cmd_reparam(args),
        Command::InitBoundary {
            input,
            lambda_l,
            lambda_u,
            output,
        } => cmd_init_boundary(input, lambda_l, lambda_u, output.as_deref()),
        Command::Project {
            input,
            level,
            target,
            exact_gluing,
        } => cmd_project(input, *level, target, *exact_gluing),
        Command::Convergence {
            input,
            levels,
            target,
            csv,
            svg,
            exact_gluing,
        } => cmd_convergence(
            input,
            *levels,
            target,
            csv.as_deref(),
            svg.as_deref(),
            *exact_gluing,
        ),
        Command::Render {
            input,
            output,
            isolines,
        } => cmd_render(input, output, *isolines),
        Command::Validate { input } => cmd_validate(input),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Math(diag)) => {
            println!("{}", serde_json::to_string_pretty(&diag).unwrap());
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
