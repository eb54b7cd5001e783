//! Command-line interface: net construction, measure evaluation, witness
//! extraction, membership decisions, exponent curves, and the experiment
//! drivers.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use entdetect::coherence;
use entdetect::error::Error;
use entdetect::experiment::{
    boundary_scan, emit_plot_script, rho_p_lambda_delta, sweep_lambda, write_boundary_csv,
    write_exponent_csv, write_sweep_csv, ExperimentSpec, PlotKind,
};
use entdetect::hermitian::DensityMatrix;
use entdetect::measures::{
    default_alpha_grid, exponent_curve, min_sep_relative_entropy, min_sep_renyi,
};
use entdetect::membership::{decide_membership, ppt_test, DEFAULT_PPT_THRESHOLD};
use entdetect::net::complex_net;
use entdetect::solver::SolverConfig;
use entdetect::states::{embed_padded, maximally_entangled, product_density, random_density};
use entdetect::witness::{extract_witness, validate_witness};

const EXIT_USAGE: u8 = 64;
const EXIT_INFEASIBLE: u8 = 65;
const EXIT_NUMERICAL: u8 = 70;
const EXIT_IO: u8 = 74;

#[derive(Parser)]
#[command(
    name = "entdetect",
    about = "Detectability-based entanglement measures, witnesses, and membership tests",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Flat `key = value` config file supplying defaults for the solver
    /// knobs (and grids, where applicable); explicit flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Step damping of the multiplicative update.
    #[arg(long)]
    gamma: Option<f64>,
    /// Iteration cap.
    #[arg(long)]
    max_iter: Option<usize>,
    /// Relative objective-change stop threshold (0 disables early stopping).
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Eigenvalue floor for logarithms and negative powers.
    #[arg(long)]
    eig_floor: Option<f64>,
    /// Double the damping and retry when the descent condition fails.
    #[arg(long)]
    adaptive_gamma: Option<bool>,
}

impl SolverArgs {
    /// Base config from the config file (or defaults), with explicit flags
    /// layered on top.
    fn to_config(&self) -> Result<SolverConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => {
                ExperimentSpec::from_config_str(&std::fs::read_to_string(path)?)?.solver
            }
            None => SolverConfig {
                rel_tol: 1e-11,
                ..SolverConfig::default()
            },
        };
        if let Some(v) = self.gamma {
            cfg.gamma = v;
        }
        if let Some(v) = self.max_iter {
            cfg.max_iter = v;
        }
        if let Some(v) = self.rel_tol {
            cfg.rel_tol = v;
        }
        if let Some(v) = self.eig_floor {
            cfg.eig_floor = v;
        }
        if let Some(v) = self.adaptive_gamma {
            cfg.adaptive_gamma = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build a complex net and report its covering certificate.
    Net {
        /// Points per circle.
        #[arg(long)]
        n: usize,
        /// Complex dimension.
        #[arg(long)]
        d: usize,
        /// Write the net as JSON.
        #[arg(long)]
        export: Option<PathBuf>,
        /// Also estimate ε₂ by Haar sampling.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate the measure of a state stored in the matrix file format.
    Measure {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 16)]
        net_n: usize,
        /// Rényi order; omit for the relative-entropy measure.
        #[arg(long)]
        alpha: Option<f64>,
        /// Write the result JSON here (otherwise stdout only).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include the minimizing separable state in the result JSON.
        #[arg(long, default_value_t = false)]
        with_sep_state: bool,
        /// Write the iteration trace CSV here.
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Coherence measures of a single-system state.
    Coherence {
        #[arg(long)]
        state: PathBuf,
        /// Also evaluate the Rényi coherence at this order.
        #[arg(long)]
        alpha: Option<f64>,
        /// Write the results as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Extract a witness from the measure minimizer and validate it.
    Witness {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 16)]
        net_n: usize,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output prefix; writes <out>.json (operator) and <out>_meta.json.
        #[arg(long, default_value = "witness")]
        out: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Decide separability membership. Exit code: 0 separable-consistent,
    /// 1 entangled, 2 inconclusive.
    Membership {
        #[arg(long)]
        state: PathBuf,
        /// Promise threshold ε₁ on the measure.
        #[arg(long)]
        eps1: f64,
        #[arg(long, default_value_t = 16)]
        net_n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Exponent curves from measure runs over the default α-grid.
    Exponent {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 16)]
        net_n: usize,
        #[arg(long, default_value_t = 0.5)]
        r_max: f64,
        #[arg(long, default_value_t = 20)]
        r_steps: usize,
        #[arg(long, default_value = "exponent.csv")]
        out: PathBuf,
        /// Also emit a plot script next to the CSV.
        #[arg(long, default_value_t = false)]
        plot: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Measure-vs-λ sweep over the experiment family.
    Sweep {
        /// Flat key = value config file; flags override nothing once given.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        p: Option<f64>,
        /// Comma-separated λ grid.
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        /// Comma-separated δ grid.
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
        #[arg(long)]
        net_n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
        #[arg(long, default_value_t = false)]
        plot: bool,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Detection-onset boundaries of the measure vs the partial-transpose
    /// test.
    Boundary {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
        #[arg(long)]
        net_n: Option<usize>,
        #[arg(long, default_value_t = 1e-8)]
        measure_threshold: f64,
        #[arg(long, default_value_t = -1e-8, allow_hyphen_values = true)]
        ppt_threshold: f64,
        #[arg(long, default_value = "boundary.csv")]
        out: PathBuf,
        #[arg(long, default_value_t = false)]
        plot: bool,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// End-to-end demonstration: sweep, boundary, witness, and membership
    /// on the experiment family, with plot scripts.
    Demo {
        #[arg(long, default_value = "demo_out")]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn exit_for(err: &Error) -> u8 {
    match err {
        Error::Infeasible(_) => EXIT_INFEASIBLE,
        Error::Numerical(_) | Error::Domain(_) => EXIT_NUMERICAL,
        Error::Io(_) => EXIT_IO,
        Error::Validation(_) | Error::Parameter(_) | Error::Format(_) => EXIT_USAGE,
    }
}

fn load_state(path: &Path) -> Result<DensityMatrix, Error> {
    let text = std::fs::read_to_string(path)?;
    DensityMatrix::from_json_str(&text)
}

fn load_spec(config: Option<&PathBuf>) -> Result<ExperimentSpec, Error> {
    match config {
        Some(path) => ExperimentSpec::from_config_str(&std::fs::read_to_string(path)?),
        None => Ok(ExperimentSpec::default()),
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Net {
            n,
            d,
            export,
            samples,
            seed,
        } => {
            let net = complex_net(n, d)?;
            println!(
                "net: n = {n}, d = {d}, points = {}, eps2 bound = {}",
                net.size(),
                net.eps2_bound
            );
            if let Some(count) = samples {
                let est = net.estimate_eps2(count, seed);
                println!("sampled eps2 estimate ({count} samples, seed {seed}): {est}");
            }
            if let Some(path) = export {
                std::fs::write(&path, net.to_json_string())?;
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
        Command::Measure {
            state,
            net_n,
            alpha,
            out,
            with_sep_state,
            trace_out,
            solver,
        } => {
            let rho = load_state(&state)?;
            let (da, db) = rho.require_dims()?;
            let net = complex_net(net_n, da.min(db))?;
            let cfg = solver.to_config()?;
            let result = match alpha {
                Some(a) => min_sep_renyi(&rho, &net, a, &cfg)?,
                None => min_sep_relative_entropy(&rho, &net, &cfg)?,
            };
            println!(
                "value = {} (alpha = {}, {} iterations, gap bound {:.3e}, interval [{}, {}])",
                result.value,
                result.alpha,
                result.iterations,
                result.gap_bound,
                result.interval.0,
                result.interval.1
            );
            if let Some(path) = out {
                std::fs::write(&path, result.to_json_string(with_sep_state))?;
                println!("wrote {}", path.display());
            }
            if let Some(path) = trace_out {
                let file = std::fs::File::create(&path)?;
                result.trace.write_csv(file)?;
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
        Command::Coherence {
            state,
            alpha,
            out,
            solver,
        } => {
            let rho = load_state(&state)?;
            let cfg = solver.to_config()?;
            let closed = coherence::rel_entropy(&rho)?;
            let iterative = coherence::rel_entropy_iterative(&rho, &cfg)?;
            println!("relative-entropy coherence: closed form = {closed}, iterative = {iterative}");
            let mut doc = serde_json::json!({
                "closed_form": closed.value(),
                "iterative": iterative,
            });
            if let Some(a) = alpha {
                let v = coherence::renyi(&rho, a, &cfg)?;
                println!("Rényi coherence (alpha = {a}): {v}");
                doc["alpha"] = serde_json::json!(a);
                doc["renyi"] = serde_json::json!(v.value());
            }
            if let Some(path) = out {
                std::fs::write(&path, doc.to_string())?;
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
        Command::Witness {
            state,
            net_n,
            samples,
            seed,
            out,
            solver,
        } => {
            let rho = load_state(&state)?;
            let (da, db) = rho.require_dims()?;
            let net = complex_net(net_n, da.min(db))?;
            let cfg = solver.to_config()?;
            let measure = min_sep_relative_entropy(&rho, &net, &cfg)?;
            let w = extract_witness(&rho, &measure)?;
            let report = validate_witness(&w, samples, seed)?;
            println!(
                "witness: offset = {:.6}, slack = {:.6}, Tr rho W = {:.6}",
                w.offset, w.slack, w.tr_rho_w
            );
            println!(
                "validation: min margin = {:.6} over {} samples + {} grid products, {} violations",
                report.min_margin, report.samples, report.grid_products, report.violations
            );
            let op_path = out.with_extension("json");
            std::fs::write(
                &op_path,
                serde_json::to_string(&w.w.to_matrix_file(rho.dims()))
                    .expect("witness operator serialization"),
            )?;
            let meta_path = PathBuf::from(format!("{}_meta.json", out.display()));
            std::fs::write(&meta_path, w.to_json_sidecar(Some(&report)))?;
            println!("wrote {} and {}", op_path.display(), meta_path.display());
            Ok(0)
        }
        Command::Membership {
            state,
            eps1,
            net_n,
            out,
            solver,
        } => {
            let rho = load_state(&state)?;
            let (da, db) = rho.require_dims()?;
            let net = complex_net(net_n, da.min(db))?;
            let verdict = decide_membership(&rho, &net, eps1, &solver.to_config()?)?;
            println!("{}", verdict.to_json_string());
            if let Some(path) = out {
                std::fs::write(&path, verdict.to_json_string())?;
            }
            Ok(verdict.exit_code() as u8)
        }
        Command::Exponent {
            state,
            net_n,
            r_max,
            r_steps,
            out,
            plot,
            solver,
        } => {
            let rho = load_state(&state)?;
            let (da, db) = rho.require_dims()?;
            let net = complex_net(net_n, da.min(db))?;
            let cfg = solver.to_config()?;
            let mut samples = Vec::new();
            for &a in &default_alpha_grid() {
                let m = min_sep_renyi(&rho, &net, a, &cfg)?;
                log::info!("alpha {a}: {}", m.value);
                samples.push((a, m.value.as_f64()));
            }
            let r_grid: Vec<f64> = (0..=r_steps)
                .map(|k| r_max * k as f64 / r_steps.max(1) as f64)
                .collect();
            let curve = exponent_curve(&samples, &r_grid)?;
            let file = std::fs::File::create(&out)?;
            write_exponent_csv(&curve, file)?;
            println!("wrote {}", out.display());
            if plot {
                let script = out.with_extension("py");
                emit_plot_script(&out, PlotKind::Exponent, &script)?;
                println!("wrote {}", script.display());
            }
            Ok(0)
        }
        Command::Sweep {
            config,
            p,
            lambdas,
            deltas,
            net_n,
            seed,
            out,
            plot,
            max_iter,
        } => {
            let mut spec = load_spec(config.as_ref())?;
            if let Some(v) = p {
                spec.p = v;
            }
            if let Some(v) = lambdas {
                spec.lambda_grid = v;
            }
            if let Some(v) = deltas {
                spec.delta_grid = v;
            }
            if let Some(v) = net_n {
                spec.net_n = v;
            }
            if let Some(v) = seed {
                spec.seed = v;
            }
            if let Some(v) = max_iter {
                spec.solver.max_iter = v;
            }
            let rows = sweep_lambda(&spec)?;
            let file = std::fs::File::create(&out)?;
            write_sweep_csv(&rows, file)?;
            println!("wrote {} ({} rows)", out.display(), rows.len());
            if plot {
                let script = out.with_extension("py");
                emit_plot_script(&out, PlotKind::Sweep, &script)?;
                println!("wrote {}", script.display());
            }
            Ok(0)
        }
        Command::Boundary {
            config,
            p,
            deltas,
            net_n,
            measure_threshold,
            ppt_threshold,
            out,
            plot,
            max_iter,
        } => {
            let mut spec = load_spec(config.as_ref())?;
            spec.p = p.unwrap_or(0.1);
            if let Some(v) = deltas {
                spec.delta_grid = v;
            }
            if let Some(v) = net_n {
                spec.net_n = v;
            }
            if let Some(v) = max_iter {
                spec.solver.max_iter = v;
            }
            let rows = boundary_scan(&spec, measure_threshold, ppt_threshold)?;
            for r in &rows {
                println!(
                    "delta = {}: measure onset λ = {}, partial-transpose onset λ = {} \
                     (crossings {})",
                    r.delta,
                    r.lambda_ours,
                    r.lambda_ppt,
                    if r.crossings_ok { "ok" } else { "missing" }
                );
            }
            let file = std::fs::File::create(&out)?;
            write_boundary_csv(&rows, file)?;
            println!("wrote {}", out.display());
            if plot {
                let script = out.with_extension("py");
                emit_plot_script(&out, PlotKind::Boundary, &script)?;
                println!("wrote {}", script.display());
            }
            Ok(0)
        }
        Command::Demo { out, config, seed } => run_demo(&out, config.as_ref(), seed),
    }
}

fn run_demo(out: &Path, config: Option<&PathBuf>, seed: u64) -> Result<u8, Error> {
    std::fs::create_dir_all(out)?;
    let started = std::time::Instant::now();

    let mut spec = load_spec(config)?;
    spec.seed = seed;
    spec.output_dir = out.to_path_buf();

    println!("[1/4] measure-vs-λ sweep at p = {} ...", spec.p);
    let rows = sweep_lambda(&spec)?;
    let sweep_csv = out.join("sweep.csv");
    write_sweep_csv(&rows, std::fs::File::create(&sweep_csv)?)?;
    emit_plot_script(&sweep_csv, PlotKind::Sweep, &out.join("sweep_plot.py"))?;
    println!("      wrote {} ({} rows)", sweep_csv.display(), rows.len());

    println!("[2/4] detection boundaries at p = 0.1 ...");
    let boundary_spec = ExperimentSpec {
        p: 0.1,
        delta_grid: vec![0.05, 0.1, 0.2],
        solver: SolverConfig {
            max_iter: 4000,
            rel_tol: 1e-11,
            ..spec.solver.clone()
        },
        ..spec.clone()
    };
    let brows = boundary_scan(&boundary_spec, 1e-8, DEFAULT_PPT_THRESHOLD)?;
    let boundary_csv = out.join("boundary.csv");
    write_boundary_csv(&brows, std::fs::File::create(&boundary_csv)?)?;
    emit_plot_script(
        &boundary_csv,
        PlotKind::Boundary,
        &out.join("boundary_plot.py"),
    )?;
    for r in &brows {
        println!(
            "      delta = {}: measure onset λ = {:.4} vs partial-transpose onset λ = {:.4}",
            r.delta, r.lambda_ours, r.lambda_ppt
        );
    }

    println!("[3/4] witness extraction on the (p, λ, δ) = (1/2, 0.9, 0.01) state ...");
    let rho = rho_p_lambda_delta(0.5, 0.9, 0.01)?;
    let net = complex_net(spec.net_n, 2)?;
    let wcfg = SolverConfig {
        max_iter: 6000,
        rel_tol: 1e-12,
        ..spec.solver.clone()
    };
    let measure = min_sep_relative_entropy(&rho, &net, &wcfg)?;
    std::fs::write(out.join("measure.json"), measure.to_json_string(true))?;
    let w = extract_witness(&rho, &measure)?;
    let report = validate_witness(&w, 10_000, seed)?;
    std::fs::write(
        out.join("witness.json"),
        serde_json::to_string(&w.w.to_matrix_file(rho.dims())).expect("witness serialization"),
    )?;
    std::fs::write(
        out.join("witness_meta.json"),
        w.to_json_sidecar(Some(&report)),
    )?;
    println!(
        "      measure = {}, Tr rho W = {:.4}, min sampled margin = {:.4} ({} violations)",
        measure.value, w.tr_rho_w, report.min_margin, report.violations
    );

    println!("[4/4] membership decisions ...");
    let mcfg = SolverConfig {
        max_iter: 2000,
        rel_tol: 0.0,
        ..spec.solver.clone()
    };
    let bell = DensityMatrix::from_pure(&maximally_entangled(2), Some((2, 2)))?;
    let padded = embed_padded(&bell, (4, 2), 1e-6)?;
    let v1 = decide_membership(&padded, &net, 0.3, &mcfg)?;
    let mut rng = entdetect::states::seeded_rng(seed);
    let prod = product_density(&random_density(4, &mut rng), &random_density(2, &mut rng))?;
    let v2 = decide_membership(&prod, &net, 0.3, &mcfg)?;
    println!(
        "      padded Bell state → {} (objective {:.4}); product state → {} (objective {:.2e})",
        v1.decision, v1.objective, v2.decision, v2.objective
    );
    std::fs::write(out.join("membership_bell.json"), v1.to_json_string())?;
    std::fs::write(out.join("membership_product.json"), v2.to_json_string())?;
    let (ppt_eig, ppt_flag) = ppt_test(&padded, DEFAULT_PPT_THRESHOLD)?;
    println!(
        "      padded Bell partial-transpose min eigenvalue: {ppt_eig:.6} (entangled: {ppt_flag})"
    );

    println!(
        "demo complete in {:.1?}; outputs under {}",
        started.elapsed(),
        out.display()
    );
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own help/version paths exit cleanly
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_for(&err))
        }
    }
}
