//! Argument parsing and command dispatch.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use kpp_core::asymptotics::{
    coupled_w_supercritical, coupled_z_over_y, fit_field_tail_constant, fit_log_shift,
    fit_rotated_shift, level_set, log_shift_error, rotated_supercritical_check,
    tail_expansion_check,
};
use kpp_core::bbm::{simulate_replica, SimConfig};
use kpp_core::martingales::martingale_trajectory;
use kpp_core::pde_2d::{cascade_march, residual, Domain, WaveSelect};
use kpp_core::potential::{
    anharmonic_bound_check, conformal_eta, eta, green_asymptotics_check, green_quarter,
    harmonicity_check, varpi, HarmonicProbe, MapDirection, QuarterPoint,
};
use kpp_core::seed::replica_seed;
use kpp_core::wave_mc::{
    extinction_from, phi_estimate_at, phi_supercritical_at, sample_waves, DEFAULT_ALPHA,
};
use kpp_core::waves_1d::{fit_tail_constant, solve_steady_phi, solve_wave_1d};
use kpp_core::C_STAR;

use crate::accept::{run_suite, AcceptContext, SuiteProfile};
use crate::config::{init_threads, splice_config_args};
use crate::csvio::{self, ReportRow};
use crate::manifest::RunDir;
use crate::svg;

#[derive(Parser, Debug)]
#[command(
    name = "kpp",
    about = "Branching Brownian motion martingales and KPP traveling waves in the Dirichlet half-plane",
    version
)]
struct Cli {
    /// Master seed for all derived replica streams.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Root directory for append-only run outputs.
    #[arg(long, global = true, default_value = "runs")]
    output_dir: PathBuf,
    /// Worker threads (KPP_THREADS env var also caps the pool).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also render SVG plots next to the CSVs.
    #[arg(long, global = true)]
    plot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate killed/free BBM replicas and write population snapshots.
    Simulate(SimulateArgs),
    /// Evaluate the martingale family along checkpoint times.
    Martingales(MartingalesArgs),
    /// Monte Carlo traveling-wave estimates on a probe grid.
    McWave(McWaveArgs),
    /// 1D solvers: steady state phi and traveling waves w_c.
    #[command(name = "ode-1d")]
    Ode1d(Ode1dArgs),
    /// Fit the minimal-speed tail constant K*.
    FitTail(FitTailArgs),
    /// March the 2D traveling wave to steady state.
    PdeWave(PdeWaveArgs),
    /// Quantitative asymptotic checks on computed fields.
    Verify(VerifyArgs),
    /// Quarter-plane potential-theory checks.
    Potential(PotentialArgs),
    /// Run the acceptance suite.
    Accept(AcceptArgs),
}

#[derive(Args, Debug)]
struct SimArgsCommon {
    /// Start height of the root particle.
    #[arg(long, default_value_t = 1.0)]
    origin_y: f64,
    /// Simulation horizon T.
    #[arg(long, default_value_t = 2.0)]
    horizon: f64,
    /// Checkpoint times (comma separated); defaults to the horizon.
    #[arg(long, value_delimiter = ',')]
    checkpoints: Vec<f64>,
    /// Sub-step cap for kill checks and path trackers.
    #[arg(long, default_value_t = 0.01)]
    dt_max: f64,
    /// Disable killing on the boundary.
    #[arg(long)]
    no_killing: bool,
    /// Particle budget per replica.
    #[arg(long, default_value_t = 5_000_000)]
    population_cap: usize,
    #[arg(long, default_value_t = 100)]
    replicas: usize,
}

impl SimArgsCommon {
    fn config(&self, seed: u64) -> SimConfig {
        let mut cfg = SimConfig::new(self.origin_y, self.horizon, !self.no_killing, seed);
        if !self.checkpoints.is_empty() {
            cfg.checkpoint_times = self.checkpoints.clone();
        }
        cfg.dt_max = self.dt_max;
        cfg.population_cap = self.population_cap;
        cfg
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    sim: SimArgsCommon,
}

#[derive(Args, Debug)]
struct MartingalesArgs {
    #[command(flatten)]
    sim: SimArgsCommon,
    /// Shaving thresholds alpha (repeatable).
    #[arg(long = "alpha")]
    alphas: Vec<f64>,
    /// Supercritical lambda values (paired with --mu by position).
    #[arg(long = "lambda")]
    lambdas: Vec<f64>,
    /// Supercritical mu values (paired with --lambda by position).
    #[arg(long = "mu")]
    mus: Vec<f64>,
}

#[derive(Args, Debug)]
struct McWaveArgs {
    /// Probe abscissae (repeatable).
    #[arg(long = "x", required = true)]
    xs: Vec<f64>,
    /// Start heights (repeatable); one batch per height.
    #[arg(long = "y", required = true)]
    ys: Vec<f64>,
    #[arg(long = "T", default_value_t = 8.0)]
    horizon: f64,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = 20_000)]
    replicas: usize,
    /// Also estimate the supercritical wave for this lambda.
    #[arg(long)]
    lambda: Option<f64>,
    /// Supercritical mu (with --lambda).
    #[arg(long)]
    mu: Option<f64>,
    /// Report the extinction fraction of each batch.
    #[arg(long)]
    extinction: bool,
}

#[derive(Args, Debug)]
struct Ode1dArgs {
    /// Wave speed c >= sqrt(2) (within 1e-6).
    #[arg(long)]
    c: Option<f64>,
    /// Solve the y-only steady state phi instead of a wave.
    #[arg(long)]
    phi: bool,
    #[arg(long, default_value_t = -20.0)]
    x_lo: f64,
    #[arg(long, default_value_t = 30.0)]
    x_hi: f64,
    #[arg(long, default_value_t = 0.01)]
    h: f64,
    /// Extent for the steady state.
    #[arg(long, default_value_t = 30.0)]
    y_max: f64,
}

#[derive(Args, Debug)]
struct FitTailArgs {
    #[arg(long, default_value_t = 12.0)]
    window_lo: f64,
    #[arg(long, default_value_t = 22.0)]
    window_hi: f64,
    #[arg(long, default_value_t = 0.01)]
    h: f64,
}

#[derive(Args, Debug)]
struct PdeWaveArgs {
    /// Frame speed; sqrt(2) within 1e-6 selects the minimal wave.
    #[arg(long)]
    c: Option<f64>,
    /// Supercritical lambda (with --mu).
    #[arg(long)]
    lambda: Option<f64>,
    /// Supercritical mu (with --lambda).
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long, default_value_t = -10.0)]
    x_lo: f64,
    /// Right edge of the domain.
    #[arg(long = "Lx", default_value_t = 25.0)]
    lx: f64,
    /// Top edge of the domain.
    #[arg(long = "Ly", default_value_t = 40.0)]
    ly: f64,
    #[arg(long, default_value_t = 0.05)]
    h: f64,
    #[arg(long, default_value_t = 5e-6)]
    tol: f64,
    #[arg(long, default_value_t = 8_000_000)]
    max_steps: usize,
}

impl PdeWaveArgs {
    fn select(&self) -> Result<WaveSelect> {
        match (self.c, self.lambda, self.mu) {
            (_, Some(lambda), Some(mu)) => {
                let s = WaveSelect::Supercritical { lambda, mu };
                s.validate().map_err(|e| anyhow!("{e}"))?;
                Ok(s)
            }
            (Some(c), None, None) => {
                if (c - C_STAR).abs() <= 1e-6 {
                    Ok(WaveSelect::Minimal)
                } else if c < C_STAR {
                    bail!("no traveling wave below c* = sqrt(2): c = {c}")
                } else {
                    bail!(
                        "supercritical fields are parametrized by (lambda, mu) on the arc P_c; \
                         pass --lambda and --mu"
                    )
                }
            }
            (None, None, None) => Ok(WaveSelect::Minimal),
            _ => bail!("--lambda and --mu must be given together"),
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum VerifyCheck {
    LogShift,
    Tail,
    Tameness,
    Rotated,
    CoupledZ,
    CoupledW,
    LevelSet,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    check: VerifyCheck,
    /// Use the reduced-size workload.
    #[arg(long)]
    quick: bool,
    #[arg(long, default_value_t = 20_000)]
    replicas: usize,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum PotentialCheck {
    Green,
    Eta,
    Anharmonic,
    Harmonicity,
}

#[derive(Args, Debug)]
struct PotentialArgs {
    #[arg(long, value_enum)]
    check: PotentialCheck,
    #[arg(long, default_value_t = 3000)]
    samples: usize,
}

#[derive(Args, Debug)]
struct AcceptArgs {
    /// Reduced-size suite (same tolerances).
    #[arg(long)]
    quick: bool,
    /// Print every detail line, not only failures.
    #[arg(long)]
    verbose: bool,
}

/// Parse and execute; returns the process exit status.
pub fn run(argv: Vec<String>) -> i32 {
    let argv = match splice_config_args(argv) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 2;
        }
    };
    let mut full = vec!["kpp".to_string()];
    full.extend(argv);
    let cli = match Cli::try_parse_from(&full) {
        Ok(c) => c,
        Err(e) => {
            // clap renders usage itself; keep its exit semantics for help.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let threads = init_threads(cli.threads);
    match dispatch(&cli, threads, &full[1..]) {
        Ok(status) => status,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn dispatch(cli: &Cli, threads: usize, argv: &[String]) -> Result<i32> {
    let name = match &cli.command {
        Command::Simulate(_) => "simulate",
        Command::Martingales(_) => "martingales",
        Command::McWave(_) => "mc-wave",
        Command::Ode1d(_) => "ode-1d",
        Command::FitTail(_) => "fit-tail",
        Command::PdeWave(_) => "pde-wave",
        Command::Verify(_) => "verify",
        Command::Potential(_) => "potential",
        Command::Accept(_) => "accept",
    };
    let run_dir = RunDir::create(&cli.output_dir, name, argv)?;
    let mut extra = serde_json::json!({});
    let status = match &cli.command {
        Command::Simulate(args) => cmd_simulate(cli, args, &run_dir)?,
        Command::Martingales(args) => cmd_martingales(cli, args, &run_dir)?,
        Command::McWave(args) => cmd_mc_wave(cli, args, &run_dir)?,
        Command::Ode1d(args) => cmd_ode1d(cli, args, &run_dir)?,
        Command::FitTail(args) => cmd_fit_tail(args, &run_dir, &mut extra)?,
        Command::PdeWave(args) => cmd_pde_wave(cli, args, &run_dir, &mut extra)?,
        Command::Verify(args) => cmd_verify(cli, args, &run_dir)?,
        Command::Potential(args) => cmd_potential(cli, args, &run_dir)?,
        Command::Accept(args) => cmd_accept(cli, args, &run_dir)?,
    };
    run_dir.write_manifest(cli.seed, threads, extra)?;
    println!("outputs in {}", run_dir.path.display());
    Ok(status)
}

fn cmd_simulate(cli: &Cli, args: &SimulateArgs, dir: &RunDir) -> Result<i32> {
    let series = kpp_core::runner::map_replicas(args.sim.replicas, |i| {
        let cfg = args.sim.config(replica_seed(cli.seed, i));
        Ok((i, simulate_replica(&cfg)?))
    })
    .map_err(|e| anyhow!("{e}"))?;
    csvio::write(&dir.file("snapshots.csv"), &csvio::snapshot_csv(&series))?;
    let total: usize = series.iter().flat_map(|(_, s)| s.iter()).map(|s| s.particles.len()).sum();
    println!("{} replicas, {total} particle records", args.sim.replicas);
    Ok(0)
}

fn cmd_martingales(cli: &Cli, args: &MartingalesArgs, dir: &RunDir) -> Result<i32> {
    if args.lambdas.len() != args.mus.len() {
        bail!("--lambda and --mu must be paired");
    }
    let lam_mu: Vec<(f64, f64)> =
        args.lambdas.iter().copied().zip(args.mus.iter().copied()).collect();
    let base = args.sim.config(cli.seed);
    let res = martingale_trajectory(&base, &args.alphas, &lam_mu, args.sim.replicas)
        .map_err(|e| anyhow!("{e}"))?;
    csvio::write(&dir.file("martingales.csv"), &csvio::martingale_series_csv(&res.reports))?;
    csvio::write(&dir.file("summary.csv"), &csvio::summary_csv(&res.summaries))?;
    if cli.plot {
        let medians: Vec<(f64, f64)> =
            res.summaries.iter().map(|s| (s.t, s.w.median)).collect();
        csvio::write(
            &dir.file("w_median.svg"),
            &svg::line_plot(&[("median W_t", &medians)], "t", "W"),
        )?;
    }
    println!("martingale series over {} replicas, {} checkpoints", args.sim.replicas, res.summaries.len());
    Ok(0)
}

fn cmd_mc_wave(cli: &Cli, args: &McWaveArgs, dir: &RunDir) -> Result<i32> {
    let lam_mu = match (args.lambda, args.mu) {
        (Some(l), Some(m)) => Some((l, m)),
        (None, None) => None,
        _ => bail!("--lambda and --mu must be given together"),
    };
    let mut rows = Vec::new();
    let mut super_rows = Vec::new();
    for (k, &y) in args.ys.iter().enumerate() {
        let batch = sample_waves(
            y,
            args.horizon,
            args.alpha,
            lam_mu,
            args.replicas,
            replica_seed(cli.seed, k as u64),
        )
        .map_err(|e| anyhow!("{e}"))?;
        for &x in &args.xs {
            rows.push((x, y, phi_estimate_at(&batch, x), args.alpha));
            if lam_mu.is_some() {
                super_rows.push((
                    x,
                    y,
                    phi_supercritical_at(&batch, x).map_err(|e| anyhow!("{e}"))?,
                    args.alpha,
                ));
            }
        }
        if args.extinction {
            let e = extinction_from(&batch);
            println!("extinction(y={y}, T={}) = {:.5} +- {:.5}", args.horizon, e.value, e.std_error);
        }
    }
    csvio::write(&dir.file("probes.csv"), &csvio::probe_grid_csv(&rows))?;
    if !super_rows.is_empty() {
        csvio::write(&dir.file("probes_supercritical.csv"), &csvio::probe_grid_csv(&super_rows))?;
    }
    println!("{} probe estimates at T = {}", rows.len(), args.horizon);
    Ok(0)
}

fn cmd_ode1d(cli: &Cli, args: &Ode1dArgs, dir: &RunDir) -> Result<i32> {
    if args.phi {
        let phi = solve_steady_phi(args.y_max, args.h).map_err(|e| anyhow!("{e}"))?;
        csvio::write(&dir.file("phi.csv"), &csvio::profile_csv(&phi))?;
        println!("phi solved on [0, {}]: phi'(0) = {:.8}", args.y_max, phi.derivs[0]);
        if cli.plot {
            let pts: Vec<(f64, f64)> =
                (0..phi.len()).map(|i| (phi.x_at(i), phi.values[i])).collect();
            csvio::write(&dir.file("phi.svg"), &svg::line_plot(&[("phi", &pts)], "y", "phi"))?;
        }
        return Ok(0);
    }
    let c = args.c.ok_or_else(|| anyhow!("pass --c for a wave or --phi for the steady state"))?;
    let wave =
        solve_wave_1d(c, (args.x_lo, args.x_hi), args.h).map_err(|e| anyhow!("{e}"))?;
    csvio::write(&dir.file("wave.csv"), &csvio::profile_csv(&wave))?;
    if cli.plot {
        let pts: Vec<(f64, f64)> =
            (0..wave.len()).map(|i| (wave.x_at(i), wave.values[i])).collect();
        csvio::write(&dir.file("wave.svg"), &svg::line_plot(&[("w_c", &pts)], "x", "w")) ?;
    }
    println!("w_c solved for c = {c} on [{}, {}]", args.x_lo, args.x_hi);
    Ok(0)
}

fn cmd_fit_tail(args: &FitTailArgs, dir: &RunDir, extra: &mut serde_json::Value) -> Result<i32> {
    let wave = solve_wave_1d(C_STAR, (-20.0, args.window_hi + 8.0), args.h)
        .map_err(|e| anyhow!("{e}"))?;
    let (k_star, a, resid) = fit_tail_constant(&wave, (args.window_lo, args.window_hi))
        .map_err(|e| anyhow!("{e}"))?;
    println!("K* = {k_star:.8}, a = {a:.6}, fit residual = {resid:.3e} on [{}, {}]",
        args.window_lo, args.window_hi);
    *extra = serde_json::json!({"k_star": k_star, "a": a, "residual": resid});
    csvio::write(
        &dir.file("tail_fit.csv"),
        &format!("window_lo,window_hi,k_star,a,residual\n{},{},{k_star},{a},{resid}\n",
            args.window_lo, args.window_hi),
    )?;
    Ok(0)
}

fn cmd_pde_wave(
    cli: &Cli,
    args: &PdeWaveArgs,
    dir: &RunDir,
    extra: &mut serde_json::Value,
) -> Result<i32> {
    let select = args.select()?;
    let domain =
        Domain { x_lo: args.x_lo, x_hi: args.lx, y_hi: args.ly, hx: args.h, hy: args.h };
    let res = cascade_march(select, &domain, args.tol, args.max_steps)
        .map_err(|e| anyhow!("{e}"))?;
    let (sup, l2) = residual(&res.field);
    csvio::write(&dir.file("field.csv"), &csvio::field_csv(&res.field))?;
    let sidecar = serde_json::json!({
        "x_lo": res.field.x_lo,
        "x_hi": res.field.x_hi(),
        "y_hi": res.field.y_hi(),
        "hx": res.field.hx,
        "hy": res.field.hy,
        "nx": res.field.nx,
        "ny": res.field.ny,
        "frame_speed_c": res.field.frame_speed_c,
        "bc": res.field.bc,
        "converged": res.converged,
        "steps": res.steps,
        "residual_sup": sup,
        "residual_l2": l2,
        "residual_history": res.residual_history,
    });
    csvio::write(&dir.file("field.json"), &serde_json::to_string_pretty(&sidecar)?)?;
    if cli.plot {
        csvio::write(&dir.file("field.svg"), &svg::heatmap(&res.field, 160))?;
    }
    *extra = sidecar;
    if !res.converged {
        eprintln!(
            "warning: not converged after {} steps (residual {:.3e}); history tail: {:?}",
            res.steps,
            res.final_residual,
            &res.residual_history[res.residual_history.len().saturating_sub(4)..]
        );
        return Ok(1);
    }
    println!("steady field in {} steps, residual {sup:.3e}", res.steps);
    Ok(0)
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs, dir: &RunDir) -> Result<i32> {
    let mut profile = if args.quick { SuiteProfile::quick() } else { SuiteProfile::full() };
    profile.seed = cli.seed;
    profile.coupled_replicas = args.replicas.min(profile.coupled_replicas);
    let ctx = AcceptContext::new(profile);
    let mut rows: Vec<ReportRow> = Vec::new();
    let mut push = |check: &str, param: String, y: String, value: f64, tol: f64| {
        rows.push(ReportRow {
            check: check.to_string(),
            param,
            y,
            value,
            tolerance: tol,
            pass: value <= tol,
        });
    };
    match args.check {
        VerifyCheck::LogShift => {
            let field = &ctx.field_main().field;
            let wave = ctx.wave_cstar();
            let shift = fit_log_shift(field, wave, 32.0).map_err(|e| anyhow!("{e}"))?;
            for &y in &[8.0, 16.0, 32.0] {
                let e = log_shift_error(field, wave, y, shift, true).map_err(|e| anyhow!("{e}"))?;
                push("log-shift", format!("shift={shift:.4}"), y.to_string(), e, 0.05 * (32.0 / y));
            }
        }
        VerifyCheck::Tail => {
            let (k_star, _, _) = ctx.k_star();
            let field = &ctx.tail_main().field;
            let (k_field, _) = fit_field_tail_constant(field, 5.0, (8.0, 13.0))
                .map_err(|e| anyhow!("{e}"))?;
            let shift = (k_field / k_star).ln() / std::f64::consts::SQRT_2;
            let x_max = field.x_hi() - 3.0 * field.y_hi() / std::f64::consts::PI;
            let rep = tail_expansion_check(field, k_star, shift, x_max)
                .map_err(|e| anyhow!("{e}"))?;
            push("tail", format!("K*={k_star:.5}"), String::new(), rep.sup_e, 2.0);
            for (f, s) in rep.sup_by_radius {
                push("tail-subregion", format!("radius-fraction={f}"), String::new(), s, 2.0);
            }
        }
        VerifyCheck::Tameness => {
            let (c_main, arg, c_coarse) = crate::accept::tameness_report(&ctx);
            push(
                "tameness",
                format!("argmax=({:.2},{:.2})", arg.0, arg.1),
                String::new(),
                (c_main - c_coarse).abs() / c_main,
                0.10,
            );
            println!("tameness constant C = {c_main:.5} at ({:.2}, {:.2})", arg.0, arg.1);
        }
        VerifyCheck::Rotated => {
            let (lambda, mu) = crate::accept::SUPER_LM;
            let field = &ctx.field_super().field;
            let wave = ctx.wave_rot();
            let shift =
                fit_rotated_shift(field, lambda, mu, wave, 32.0).map_err(|e| anyhow!("{e}"))?;
            let checks =
                rotated_supercritical_check(field, lambda, mu, &[8.0, 16.0, 32.0], wave, shift)
                    .map_err(|e| anyhow!("{e}"))?;
            for row in checks {
                push("rotated", format!("lm=({lambda},{mu})"), row.y.to_string(), row.sup, 0.25);
            }
        }
        VerifyCheck::CoupledZ => {
            let rows_z = coupled_z_over_y(&[2.0, 8.0, 32.0], 6.0, profile.coupled_replicas, cli.seed)
                .map_err(|e| anyhow!("{e}"))?;
            for row in rows_z {
                push(
                    "coupled-z-slope",
                    format!("slope={:.4}", row.slope),
                    row.y.to_string(),
                    (row.slope - row.y).abs(),
                    4.0 * row.slope_se,
                );
                push("coupled-z-l2", String::new(), row.y.to_string(), row.l2_distance, f64::INFINITY);
            }
        }
        VerifyCheck::CoupledW => {
            let (lambda, mu) = crate::accept::SUPER_LM;
            let (rows_w, monotone) =
                coupled_w_supercritical(lambda, mu, &[2.0, 8.0], 6.0, profile.coupled_replicas, cli.seed)
                    .map_err(|e| anyhow!("{e}"))?;
            for row in rows_w {
                push(
                    "coupled-w-gap",
                    format!("target={:.5}", row.target),
                    row.y.to_string(),
                    (row.mean_gap - row.target).abs(),
                    4.0 * row.se_gap,
                );
            }
            push("coupled-w-monotone", String::new(), String::new(), f64::from(!monotone as u8), 0.5);
        }
        VerifyCheck::LevelSet => {
            let field = &ctx.field_main().field;
            let curve = level_set(field, 0.5).map_err(|e| anyhow!("{e}"))?;
            let increasing = curve.sigma.windows(2).all(|w| w[1] > w[0] - 1e-9);
            push("level-set-increasing", String::new(), String::new(), f64::from(!increasing as u8), 0.5);
            // sigma(y) <= 1.6 log y + C with C stable under refinement.
            let fit_c = |f: &kpp_core::pde_2d::Field2D| -> Result<f64> {
                let c = level_set(f, 0.5).map_err(|e| anyhow!("{e}"))?;
                Ok(c
                    .ys
                    .iter()
                    .zip(&c.sigma)
                    .filter(|(&y, _)| (10.0..=35.0).contains(&y))
                    .map(|(&y, &s)| s - 1.6 * y.ln())
                    .fold(f64::NEG_INFINITY, f64::max))
            };
            let c_main = fit_c(field)?;
            let c_coarse = fit_c(&ctx.field_coarse().field)?;
            push(
                "level-set-logbound",
                format!("C_fit={c_main:.4}"),
                String::new(),
                (c_main - c_coarse).abs(),
                0.15,
            );
        }
    }
    let all_pass = rows.iter().all(|r| r.pass);
    for r in &rows {
        println!(
            "[{}] {} {} y={} value={:.5} tol={:.5}",
            if r.pass { "PASS" } else { "FAIL" },
            r.check,
            r.param,
            if r.y.is_empty() { "-" } else { &r.y },
            r.value,
            r.tolerance
        );
    }
    csvio::write(&dir.file("report.csv"), &csvio::report_csv(&rows))?;
    Ok(if all_pass { 0 } else { 1 })
}

fn cmd_potential(cli: &Cli, args: &PotentialArgs, dir: &RunDir) -> Result<i32> {
    let mut rows: Vec<ReportRow> = Vec::new();
    let mut push = |check: &str, param: String, value: f64, tol: f64| {
        rows.push(ReportRow {
            check: check.to_string(),
            param,
            y: String::new(),
            value,
            tolerance: tol,
            pass: value <= tol,
        });
    };
    match args.check {
        PotentialCheck::Green => {
            let z = QuarterPoint { x: 1.0, y: 1.0 };
            let x = QuarterPoint { x: 1.0, y: 2.0 };
            let g = green_quarter(z, x).map_err(|e| anyhow!("{e}"))?;
            let exact = (3.0 * 5.0f64.sqrt() / 13.0f64.sqrt()).ln() / std::f64::consts::PI;
            push("green-hand-value", format!("G={g:.6}"), (g - exact).abs(), 1e-12);
            let stats =
                green_asymptotics_check(args.samples.max(1000), cli.seed).map_err(|e| anyhow!("{e}"))?;
            push("green-near-bracket", format!("[{:.3},{:.3}]", stats.near.min, stats.near.max),
                f64::from(!(stats.near.min >= 0.2 && stats.near.max <= 1.5) as u8), 0.5);
            push("green-mid-bracket", format!("[{:.3},{:.3}]", stats.mid.min, stats.mid.max),
                f64::from(!(stats.mid.min >= 0.004 && stats.mid.max <= 10.0) as u8), 0.5);
            push("green-far-bracket", format!("[{:.3},{:.3}]", stats.far.min, stats.far.max),
                f64::from(!(stats.far.min >= 0.05 && stats.far.max <= 20.0) as u8), 0.5);
        }
        PotentialCheck::Eta => {
            let z = Complex64::new(1.0, 1.0);
            let inv = conformal_eta(z, MapDirection::Inverse).map_err(|e| anyhow!("{e}"))?;
            push(
                "eta-inverse-hand-value",
                format!("{:.6}+{:.6}i", inv.re, inv.im),
                (inv - Complex64::new(0.430978, 0.672151)).norm(),
                1e-5,
            );
            let mut worst = 0.0f64;
            let mut gap = 0.0f64;
            for k in 0..args.samples {
                let r = 1000.0f64.powf(k as f64 / args.samples as f64);
                let th = std::f64::consts::FRAC_PI_2 * ((k % 17) as f64 / 17.0);
                let z = Complex64::new(r * th.cos(), r * th.sin());
                let w = eta(z).map_err(|e| anyhow!("{e}"))?;
                worst = worst.max((kpp_core::potential::eta_inverse(w) - z).norm());
                gap = gap.max((w - varpi(z)).norm());
            }
            push("eta-round-trip", String::new(), worst, 1e-10);
            push("eta-vs-varpi", String::new(), gap, 2.0);
        }
        PotentialCheck::Anharmonic => {
            let points = [
                QuarterPoint { x: 0.5, y: 0.5 },
                QuarterPoint { x: 2.0, y: 2.0 },
                QuarterPoint { x: 8.0, y: 2.0 },
                QuarterPoint { x: 20.0, y: 20.0 },
            ];
            for row in anharmonic_bound_check(&points, 200).map_err(|e| anyhow!("{e}"))? {
                push(
                    "anharmonic-ratio",
                    format!("x=({},{}) stable={}", row.point.x, row.point.y, row.stable),
                    row.ratio_to_y,
                    50.0,
                );
            }
        }
        PotentialCheck::Harmonicity => {
            let z = QuarterPoint { x: 2.0, y: 3.0 };
            let coarse =
                harmonicity_check(HarmonicProbe::GreenAt(z), (0.5, 6.0), (0.5, 6.0), 0.08, 0.8)
                    .map_err(|e| anyhow!("{e}"))?;
            let fine =
                harmonicity_check(HarmonicProbe::GreenAt(z), (0.5, 6.0), (0.5, 6.0), 0.04, 0.8)
                    .map_err(|e| anyhow!("{e}"))?;
            push("harmonicity-order", format!("{coarse:.3e}->{fine:.3e}"),
                f64::from(!(coarse / fine >= 3.5) as u8), 0.5);
            let xy = harmonicity_check(HarmonicProbe::BilinearXY, (0.5, 4.0), (0.5, 4.0), 0.1, 0.0)
                .map_err(|e| anyhow!("{e}"))?;
            push("harmonicity-bilinear", String::new(), xy, 1e-10);
            let cubic =
                harmonicity_check(HarmonicProbe::CubicReZ3, (0.5, 4.0), (0.5, 4.0), 0.1, 0.0)
                    .map_err(|e| anyhow!("{e}"))?;
            push("harmonicity-cubic", String::new(), cubic, 1e-9);
        }
    }
    let all_pass = rows.iter().all(|r| r.pass);
    for r in &rows {
        println!(
            "[{}] {} {} value={:.5e} tol={:.5e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.check,
            r.param,
            r.value,
            r.tolerance
        );
    }
    csvio::write(&dir.file("report.csv"), &csvio::report_csv(&rows))?;
    Ok(if all_pass { 0 } else { 1 })
}

fn cmd_accept(cli: &Cli, args: &AcceptArgs, dir: &RunDir) -> Result<i32> {
    let mut profile = if args.quick { SuiteProfile::quick() } else { SuiteProfile::full() };
    profile.seed = cli.seed;
    let results = run_suite(profile, args.verbose);
    let mut body = String::from("criterion,name,pass\n");
    for r in &results {
        body.push_str(&format!("{},{},{}\n", r.id, r.name.replace(',', ";"), r.passed));
    }
    csvio::write(&dir.file("acceptance.csv"), &body)?;
    let mut log = String::new();
    for r in &results {
        log.push_str(&format!("criterion {}: {}\n", r.id, if r.passed { "PASS" } else { "FAIL" }));
        for d in &r.details {
            log.push_str(&format!("  {d}\n"));
        }
    }
    csvio::write(&dir.file("acceptance.log"), &log)?;
    Ok(if results.iter().all(|r| r.passed) { 0 } else { 1 })
}
