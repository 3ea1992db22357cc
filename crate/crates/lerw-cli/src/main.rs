//! `lerw` — exact-identity suites, scaling studies, and Monte Carlo for the
//! loop-erased random walk edge Green's function.
//!
//! Exit codes: 0 all checks passed, 1 a check failed, 2 usage error.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lerw_core::experiments::{run_study, square_named_edge, StudyConfig, STUDY_NAMES};
use lerw_core::lattice::{
    boundary_edges, standard_domain, BoundaryEdge, DomainSpec, LatticeDomain,
};
use lerw_core::lerw::mc_edge_probability;
use lerw_core::spinor::{
    rectangle_boundary_kernel, rectangle_kernel, slit_escape_profile, spinor, KernelMethod,
    KernelSide,
};
use lerw_core::verify;
use serde_json::json;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "lerw", version, about)]
struct Cli {
    /// Worker threads (default: LERW_WORKERS env var, then all cores).
    /// Never affects results, only wall time.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run exact-identity verification suites
    Verify {
        #[command(subcommand)]
        what: VerifyCmd,
    },
    /// Monte Carlo estimate of P(a,b;A)
    Mc(McArgs),
    /// Run a named scaling study
    Study(StudyArgs),
    /// Rectangle Poisson kernels: Fourier series vs direct solve
    RectKernel(RectArgs),
    /// Slit-square escape profile and total mass K(n)
    Slit(SlitArgs),
    /// Spinor observable Λ_A(z, a) on a square domain
    Spinor(SpinorArgs),
    /// Domain file utilities
    Domain {
        #[command(subcommand)]
        what: DomainCmd,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Determinant identity + Fomin + partition + slit-square decomposition
    /// over all enumerable domains
    Exact {
        /// bounding box for the identity corpus (4 or 5)
        #[arg(long, default_value_t = 4)]
        max_box: u8,
        /// write the JSON report here as well as stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cut-independence of loop signs and of the identity RHS
    Cut {
        #[arg(long, default_value_t = 100)]
        loops: usize,
        #[arg(long, default_value_t = 10)]
        instances: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct McArgs {
    /// domain descriptor: square:<n>, rect:<n>x<m>, slit-square:<n>, file:<path>
    #[arg(long)]
    domain: String,
    /// boundary edge: named position (right-mid, …) or midpoint "x.5,y"
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StudyArgs {
    /// one of: loops, spinor, beurling, green34, sin3, qbar, green00
    name: String,
    /// comma-separated ascending sizes
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<u32>>,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum MethodArg {
    Fourier,
    Solve,
}

#[derive(Copy, Clone, ValueEnum)]
enum SideArg {
    Discrete,
    Continuum,
}

#[derive(Args)]
struct RectArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    m: u32,
    /// boundary heights; omitted = compare the full grid
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    kp: Option<u32>,
    #[arg(long, value_enum, default_value_t = MethodArg::Fourier)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t = SideArg::Discrete)]
    side: SideArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SlitArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args)]
struct SpinorArgs {
    /// square side parameter
    #[arg(long)]
    n: u32,
    /// start vertex: 0 or 1
    #[arg(long, default_value_t = 0)]
    z: u8,
    #[arg(long)]
    a: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum DomainCmd {
    /// Validate a domain JSON file ({"vertices": [[x,y], ...]})
    Check { file: PathBuf },
}

fn resolve_edge(domain: &LatticeDomain, spec: &DomainSpec, sel: &str) -> Result<BoundaryEdge> {
    if let DomainSpec::Square(n) = spec {
        if let Some(e) = square_named_edge(*n, sel) {
            return Ok(e);
        }
    }
    // midpoint coordinates "x,y" with half-integer parts
    if let Some((xs, ys)) = sel.split_once(',') {
        let x: f64 = xs.trim().parse().context("midpoint x")?;
        let y: f64 = ys.trim().parse().context("midpoint y")?;
        let target = ((2.0 * x).round() as i32, (2.0 * y).round() as i32);
        return boundary_edges(domain)
            .into_iter()
            .find(|e| e.midpoint2() == target)
            .ok_or_else(|| anyhow!("no boundary edge with midpoint ({x}, {y})"));
    }
    bail!("unknown boundary-edge selector `{sel}` (use a named position or `x,y`)")
}

fn emit(value: &serde_json::Value, out: Option<&PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    println!("{text}");
    if let Some(path) = out {
        std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn write_file(path: &PathBuf, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn main() {
    let cli = Cli::parse();
    let workers = cli.workers.or_else(|| {
        std::env::var("LERW_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(w) = workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .ok();
    }
    match run(cli.command) {
        Ok(true) => std::process::exit(0),
        Ok(false) => std::process::exit(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}

fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Verify { what } => verify_cmd(what),
        Command::Mc(args) => mc_cmd(args),
        Command::Study(args) => study_cmd(args),
        Command::RectKernel(args) => rect_cmd(args),
        Command::Slit(args) => slit_cmd(args),
        Command::Spinor(args) => spinor_cmd(args),
        Command::Domain { what } => domain_cmd(what),
    }
}

fn verify_cmd(what: VerifyCmd) -> Result<bool> {
    match what {
        VerifyCmd::Exact { max_box, out } => {
            if !(3..=5).contains(&max_box) {
                bail!("--max-box must be 3, 4, or 5");
            }
            let mut reports = Vec::new();
            reports.push(verify::identity_suite(max_box));
            reports.push(verify::fomin_suite(max_box.min(4)));
            reports.push(verify::partition_suite(max_box.min(4)));
            reports.push(verify::lemma51_suite(8, 4, 4));
            for r in &reports {
                println!("{}", r.line());
            }
            let pass = reports.iter().all(|r| r.pass);
            let value = json!({
                "suite": "verify exact",
                "max_box": max_box,
                "pass": pass,
                "reports": reports,
            });
            emit(&value, out.as_ref())?;
            Ok(pass)
        }
        VerifyCmd::Cut {
            loops,
            instances,
            out,
        } => {
            let rep = verify::cut_independence_suite(loops, instances);
            println!("{}", rep.line());
            let pass = rep.pass;
            emit(&json!({ "suite": "verify cut", "pass": pass, "reports": [rep] }), out.as_ref())?;
            Ok(pass)
        }
    }
}

fn mc_cmd(args: McArgs) -> Result<bool> {
    let spec = DomainSpec::parse(&args.domain)?;
    let domain = standard_domain(&spec)?;
    let a = resolve_edge(&domain, &spec, &args.a)?;
    let b = resolve_edge(&domain, &spec, &args.b)?;
    let est = mc_edge_probability(&domain, a, b, args.samples, args.seed)
        .map_err(|e| anyhow!("{e}"))?;
    emit(
        &json!({
            "domain": args.domain,
            "a": format!("{a}"),
            "b": format!("{b}"),
            "mean": est.mean,
            "stderr": est.stderr,
            "samples": est.samples,
            "seed": est.seed,
        }),
        args.out.as_ref(),
    )?;
    Ok(true)
}

fn study_cmd(args: StudyArgs) -> Result<bool> {
    if !STUDY_NAMES.contains(&args.name.as_str()) {
        bail!("unknown study `{}`; known: {}", args.name, STUDY_NAMES.join(", "));
    }
    let mut config = StudyConfig {
        samples: args.samples,
        seed: args.seed,
        ..Default::default()
    };
    if let Some(sizes) = args.sizes {
        config.sizes = sizes;
    }
    let result = run_study(&args.name, &config).map_err(|e| anyhow!("{e}"))?;
    let csv = result.to_csv();
    if let Some(path) = &args.out_csv {
        write_file(path, &csv)?;
    } else {
        print!("{csv}");
    }
    let summary = result.summary_json();
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if let Some(path) = &args.out_json {
        write_file(path, &serde_json::to_string_pretty(&summary)?)?;
    }
    Ok(result.pass)
}

fn rect_cmd(args: RectArgs) -> Result<bool> {
    let method = match args.method {
        MethodArg::Fourier => KernelMethod::Fourier,
        MethodArg::Solve => KernelMethod::Solve,
    };
    let side = match args.side {
        SideArg::Discrete => KernelSide::Discrete,
        SideArg::Continuum => KernelSide::Continuum,
    };
    match (args.k, args.kp) {
        (Some(k), Some(kp)) => {
            let value = rectangle_kernel(args.n, args.m, k, kp, method, side)
                .map_err(|e| anyhow!("{e}"))?;
            let boundary = rectangle_boundary_kernel(args.n, args.m, k, kp, side)
                .map_err(|e| anyhow!("{e}"))?;
            emit(
                &json!({
                    "n": args.n, "m": args.m, "k": k, "kp": kp,
                    "interior": value,
                    "boundary": boundary,
                }),
                args.out.as_ref(),
            )?;
            Ok(true)
        }
        (None, None) => {
            // full-grid agreement check between the two discrete methods
            let mut worst = 0.0f64;
            for k in 1..args.m {
                for kp in 1..args.m {
                    let f = rectangle_kernel(
                        args.n, args.m, k, kp, KernelMethod::Fourier, KernelSide::Discrete,
                    )
                    .map_err(|e| anyhow!("{e}"))?;
                    let s = rectangle_kernel(
                        args.n, args.m, k, kp, KernelMethod::Solve, KernelSide::Discrete,
                    )
                    .map_err(|e| anyhow!("{e}"))?;
                    worst = worst.max((f - s).abs());
                }
            }
            let pass = worst <= 1e-10;
            emit(
                &json!({
                    "n": args.n, "m": args.m,
                    "pairs": (args.m - 1) * (args.m - 1),
                    "max_abs_diff_fourier_vs_solve": worst,
                    "tolerance": 1e-10,
                    "pass": pass,
                }),
                args.out.as_ref(),
            )?;
            Ok(pass)
        }
        _ => bail!("provide both --k and --kp, or neither"),
    }
}

fn slit_cmd(args: SlitArgs) -> Result<bool> {
    let prof = slit_escape_profile(args.n).map_err(|e| anyhow!("{e}"))?;
    let mut csv = String::from("study,n,observable,value\n");
    for (q, p, v) in &prof.values {
        csv.push_str(&format!(
            "slit,{},escape_{}_{}_{}_{},{:.17e}\n",
            prof.n, q.x, q.y, p.x, p.y, v
        ));
    }
    csv.push_str(&format!("slit,{},K_n,{:.17e}\n", prof.n, prof.total));
    if let Some(path) = &args.out_csv {
        write_file(path, &csv)?;
    } else {
        print!("{csv}");
    }
    let value = json!({ "n": prof.n, "K_n": prof.total, "edges": prof.values.len() });
    println!("{}", serde_json::to_string_pretty(&value)?);
    if let Some(path) = &args.out_json {
        write_file(path, &serde_json::to_string_pretty(&value)?)?;
    }
    Ok(true)
}

fn spinor_cmd(args: SpinorArgs) -> Result<bool> {
    let spec = DomainSpec::Square(args.n);
    let domain = standard_domain(&spec)?;
    let a = resolve_edge(&domain, &spec, &args.a)?;
    let z = match args.z {
        0 => lerw_core::lattice::ORIGIN,
        1 => lerw_core::lattice::ONE,
        _ => bail!("--z must be 0 or 1"),
    };
    let table = lerw_core::lattice::build_branch_cut(&domain)?;
    let lam = spinor(&domain, &table, z, &a).map_err(|e| anyhow!("{e}"))?;
    emit(
        &json!({
            "n": args.n,
            "z": args.z,
            "a": format!("{a}"),
            "lambda": lam,
        }),
        args.out.as_ref(),
    )?;
    Ok(true)
}

fn domain_cmd(what: DomainCmd) -> Result<bool> {
    match what {
        DomainCmd::Check { file } => {
            let spec = DomainSpec::File(file.display().to_string());
            match standard_domain(&spec) {
                Ok(domain) => {
                    let (min, max) = domain.bounding_box();
                    emit(
                        &json!({
                            "file": file.display().to_string(),
                            "valid": true,
                            "vertices": domain.len(),
                            "boundary_edges": boundary_edges(&domain).len(),
                            "bounding_box": [[min.x, min.y], [max.x, max.y]],
                        }),
                        None,
                    )?;
                    Ok(true)
                }
                Err(e) => {
                    emit(
                        &json!({
                            "file": file.display().to_string(),
                            "valid": false,
                            "reason": e.to_string(),
                        }),
                        None,
                    )?;
                    Ok(false)
                }
            }
        }
    }
}
