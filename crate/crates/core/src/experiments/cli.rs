//! The `hydrogen-lab` command line. Every subcommand reads an optional JSON
//! config, applies flag overrides, and writes `<command>.csv` plus
//! `<command>.json` into the output directory.

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::path::{Path, PathBuf};

use super::config::{ExperimentConfig, FrameSpec, SymbolConfig};
use super::report::{fmt_f64, write_csv, write_summary, write_table, Summary};
use super::{
    check_n_budget, cross_decay_study, mixed_measure_study, run_invariants, theorem1_study, ConvergenceRecord,
    GeodesicMeasure, InvariantResult,
};
use crate::error::{Error, Result};
use crate::geometry::{hamiltonian, kepler_state, AlphaFrame, KeplerOrbit, Vec3, Vec4};
use crate::quantize::matrix_element;
use crate::states::{fock_multiplier, hydrogen_residual, riesz_apply, GridSpec, MomentumState};
use crate::stationary::{hessian_det_closed, hessian_numeric};

#[derive(Debug, Parser)]
#[command(
    name = "hydrogen-lab",
    version,
    about = "Semiclassical experiments with hydrogen coherent states"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON experiment config; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Frame as e1+ie2, theta0:<rad> or r1,r2,r3,r4;i1,i2,i3,i4. Repeat for `mixed`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    frame: Vec<String>,
    #[arg(long = "E", global = true, allow_hyphen_values = true)]
    energy: Option<f64>,
    /// Comma-separated N values.
    #[arg(long = "N", global = true, value_delimiter = ',')]
    n: Option<Vec<u32>>,
    #[arg(long, global = true)]
    symbol: Option<String>,
    /// JSON object of symbol parameters.
    #[arg(long, global = true)]
    symbol_params: Option<String>,
    /// multiplier, grid-wigner or monte-carlo.
    #[arg(long, global = true)]
    method: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    allow_large_n: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the Kepler orbit of a frame over one period.
    Orbit {
        #[arg(long, default_value_t = 256)]
        samples: usize,
    },
    /// Norms, Fock eigenvalue check and momentum-space residual of a coherent state.
    State {
        /// Also write the position-space grid container.
        #[arg(long)]
        grid: bool,
    },
    /// Diagonal matrix elements for each N.
    Matelem,
    /// Convergence of diagonal matrix elements to the orbit average.
    Converge,
    /// Decay of cross terms between two frames.
    Cross {
        #[arg(long, allow_hyphen_values = true)]
        beta_frame: Option<String>,
    },
    /// Superposition of several frames (repeat --frame) with --weights.
    Mixed {
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
    },
    /// Closed-form against numeric Hessian determinants along an orbit.
    Hessian {
        #[arg(long, allow_hyphen_values = true, default_value_t = std::f64::consts::FRAC_PI_4)]
        theta0: f64,
        #[arg(long, default_value_t = 20)]
        beta_samples: usize,
    },
    /// The property suite; exit 0 when everything passes.
    Invariants,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Orbit { .. } => "orbit",
            Command::State { .. } => "state",
            Command::Matelem => "matelem",
            Command::Converge => "converge",
            Command::Cross { .. } => "cross",
            Command::Mixed { .. } => "mixed",
            Command::Hessian { .. } => "hessian",
            Command::Invariants => "invariants",
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.class().exit_code()
        }
    }
}

fn merged_config(c: &Common, cmd: &Command) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(d) = &c.output_dir {
        cfg.output_dir = d.clone();
    }
    match (cmd, c.frame.as_slice()) {
        (_, []) => {}
        (Command::Mixed { .. }, fs) => cfg.frames = Some(fs.iter().map(|f| FrameSpec::Text(f.clone())).collect()),
        (_, [f]) => cfg.frame = FrameSpec::Text(f.clone()),
        _ => return Err(Error::Config("--frame may only be repeated for `mixed`".into())),
    }
    if let Some(e) = c.energy {
        cfg.energy = e;
    }
    if let Some(n) = &c.n {
        cfg.n_list = n.clone();
    }
    if let Some(s) = &c.symbol {
        cfg.symbol = SymbolConfig::named(s);
    }
    if let Some(p) = &c.symbol_params {
        cfg.symbol.params = serde_json::from_str(p).map_err(|e| Error::Config(format!("--symbol-params: {e}")))?;
    }
    if let Some(m) = &c.method {
        cfg.method = Some(m.parse()?);
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    cfg.allow_large_n |= c.allow_large_n;
    match cmd {
        Command::Cross { beta_frame: Some(b) } => cfg.beta_frame = Some(FrameSpec::Text(b.clone())),
        Command::Mixed { weights: Some(w) } => cfg.weights = Some(w.clone()),
        _ => {}
    }
    if !(cfg.energy < 0.0) {
        return Err(Error::Config(format!("E = {} must be negative", cfg.energy)));
    }
    if cfg.n_list.is_empty() {
        return Err(Error::Config("N_list is empty".into()));
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<i32> {
    let cfg = merged_config(&cli.common, &cli.command)?;
    let name = cli.command.name();
    let out = cfg.output_dir.clone();
    let mut summary = Summary::new(name, &cfg)?;
    let csv = out.join(format!("{name}.csv"));
    let mut code = 0;
    match &cli.command {
        Command::Orbit { samples } => orbit(&cfg, *samples, &csv, &mut summary)?,
        Command::State { grid } => state(&cfg, *grid, &out, &csv, &mut summary)?,
        Command::Matelem => matelem(&cfg, &csv, &mut summary)?,
        Command::Converge => {
            check_n_budget(&cfg.n_list, cfg.allow_large_n)?;
            let frame = cfg.frame.to_frame()?;
            let a = cfg.symbol.build(&frame, &cfg.scale(cfg.n_list[0])?)?;
            let rec = theorem1_study(&frame, cfg.energy, &a, &cfg.n_list, &cfg.quantize_options())?;
            if rec.len() >= 3 {
                summary
                    .invariant_failures
                    .extend(failure("errors_nonincreasing", rec.errors_monotone(), ""));
            }
            record(&rec, &csv, &mut summary)?;
        }
        Command::Cross { .. } => {
            check_n_budget(&cfg.n_list, cfg.allow_large_n)?;
            let alpha = cfg.frame.to_frame()?;
            let beta = cfg
                .beta_frame
                .as_ref()
                .ok_or_else(|| Error::Config("cross needs --beta-frame (or beta_frame in the config)".into()))?
                .to_frame()?;
            let a = cfg.symbol.build(&alpha, &cfg.scale(cfg.n_list[0])?)?;
            let rec = cross_decay_study(&alpha, &beta, cfg.energy, &a, &cfg.n_list, &cfg.quantize_options())?;
            if let Some(sp) = rec.superpolynomial {
                summary
                    .invariant_failures
                    .extend(failure("ratios_decreasing", sp, "successive |m| ratios"));
            }
            record(&rec, &csv, &mut summary)?;
        }
        Command::Mixed { .. } => {
            check_n_budget(&cfg.n_list, cfg.allow_large_n)?;
            let frames = cfg.frames.clone().unwrap_or_else(|| vec![cfg.frame.clone()]);
            let frames: Vec<AlphaFrame> = frames.iter().map(|f| f.to_frame()).collect::<Result<_>>()?;
            let weights = cfg
                .weights
                .clone()
                .unwrap_or_else(|| vec![1.0 / frames.len() as f64; frames.len()]);
            if weights.len() != frames.len() {
                return Err(Error::Config(format!(
                    "{} weights for {} frames",
                    weights.len(),
                    frames.len()
                )));
            }
            let measure = GeodesicMeasure::new(weights.into_iter().zip(frames.iter().copied()).collect())?;
            let a = cfg.symbol.build(&frames[0], &cfg.scale(cfg.n_list[0])?)?;
            let rec = mixed_measure_study(&measure, cfg.energy, &a, &cfg.n_list, &cfg.quantize_options())?;
            record(&rec, &csv, &mut summary)?;
        }
        Command::Hessian { theta0, beta_samples } => hessian(*theta0, *beta_samples, &csv, &mut summary)?,
        Command::Invariants => {
            let results = run_invariants();
            let rows: Vec<Vec<String>> = results
                .iter()
                .map(|r| {
                    vec![
                        r.name.clone(),
                        r.passed.to_string(),
                        fmt_f64(r.measured),
                        fmt_f64(r.threshold),
                    ]
                })
                .collect();
            for r in &results {
                println!(
                    "{} {:<28} {:.3e} (≤ {:.1e})",
                    if r.passed { "ok  " } else { "FAIL" },
                    r.name,
                    r.measured,
                    r.threshold
                );
            }
            write_table(&csv, &["name", "passed", "measured", "threshold"], &rows)?;
            summary.invariant_failures = results.iter().filter(|r| !r.passed).cloned().collect();
            for r in results {
                summary.push(r)?;
            }
            if !summary.invariant_failures.is_empty() {
                code = crate::error::ErrorClass::Numerical.exit_code();
            }
        }
    }
    let json = out.join(format!("{name}.json"));
    write_summary(&json, &summary)?;
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(code)
}

fn failure(name: &str, passed: bool, detail: &str) -> Option<InvariantResult> {
    (!passed).then(|| InvariantResult {
        name: name.into(),
        passed,
        measured: f64::NAN,
        threshold: f64::NAN,
        detail: detail.into(),
        wall_time_s: 0.0,
    })
}

fn record(rec: &ConvergenceRecord, csv: &Path, summary: &mut Summary) -> Result<()> {
    println!("{}", rec.label);
    println!("{:>4}  {:>22}  {:>22}  {:>10}", "N", "value", "predicted", "error");
    for k in 0..rec.len() {
        println!(
            "{:>4}  {:>22.15e}  {:>22.15e}  {:>10.3e}",
            rec.n_values[k], rec.values[k], rec.predicted, rec.errors[k]
        );
    }
    if let Some(r) = rec.rate {
        println!("fitted rate {r:.3}");
    }
    write_csv(csv, rec)?;
    summary.push(rec)
}

fn orbit(cfg: &ExperimentConfig, samples: usize, csv: &Path, summary: &mut Summary) -> Result<()> {
    if samples == 0 {
        return Err(Error::Config("--samples must be positive".into()));
    }
    let scale = cfg.scale(cfg.n_list[0])?;
    let orbit = KeplerOrbit::new(cfg.frame.to_frame()?, scale);
    let mut rows = vec![];
    let mut skipped = 0;
    for k in 0..samples {
        let t = orbit.period() * k as f64 / samples as f64;
        match kepler_state(&orbit, t) {
            Ok(p) => rows.push(
                [t, p.x[0], p.x[1], p.x[2], p.xi[0], p.xi[1], p.xi[2], hamiltonian(&p)?]
                    .into_iter()
                    .map(fmt_f64)
                    .collect(),
            ),
            Err(Error::CollisionInstant { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    write_table(csv, &["t", "x1", "x2", "x3", "xi1", "xi2", "xi3", "H"], &rows)?;
    println!(
        "period {:.12}, {} samples, collision {}",
        orbit.period(),
        rows.len(),
        orbit.collision
    );
    summary.push(json!({
        "period": orbit.period(),
        "collision": orbit.collision,
        "collision_time": orbit.t_collision,
        "samples": rows.len(),
        "skipped_at_collision": skipped,
    }))
}

fn state(cfg: &ExperimentConfig, grid: bool, out: &Path, csv: &Path, summary: &mut Summary) -> Result<()> {
    let frame = cfg.frame.to_frame()?;
    let probes = [
        Vec4::new(0.6, 0.0, 0.8, 0.0),
        Vec4::new(0.5, 0.5, 0.5, 0.5),
        Vec4::new(0.0, 0.6, 0.0, -0.8),
    ];
    let mut rows = vec![];
    for &n in &cfg.n_list {
        let st = MomentumState::new(frame, cfg.scale(n)?);
        let mut fock: f64 = 0.0;
        for u in &probes {
            let phi = st.spherical().eval(u)?;
            if phi.norm() > 1e-8 {
                fock = fock.max((riesz_apply(st.spherical(), u)?.value * fock_multiplier(n) - phi).norm() / phi.norm());
            }
        }
        let p0 = st.scale.p0();
        let samples: Vec<Vec3> = [
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.3, 0.8, 0.1),
            Vec3::new(0.0, 1.2, 0.0),
        ]
        .iter()
        .map(|v| v * p0)
        .collect();
        // the Coulomb convolution quadrature is only resolved for small N
        let residual = match hydrogen_residual(&st, &samples) {
            Ok(r) => r,
            Err(Error::NonConvergence { .. }) => f64::NAN,
            Err(e) => return Err(e),
        };
        let mut row = vec![
            n.to_string(),
            fmt_f64(st.spherical().norm_squared()),
            fmt_f64(st.norm_squared()),
            fmt_f64(fock),
            fmt_f64(residual),
        ];
        let mut entry = json!({
            "N": n, "sphere_norm2": st.spherical().norm_squared(), "momentum_norm2": st.norm_squared(),
            "fock_rel_error": fock, "hydrogen_residual": residual,
        });
        if grid {
            let g = st.to_position_grid(&GridSpec::default())?;
            std::fs::create_dir_all(out)?;
            let path = out.join(format!("state_N{n}.grid"));
            let sidecar = g.write(&path)?;
            row.push(fmt_f64(g.norm_squared()));
            entry["position_norm2"] = json!(g.norm_squared());
            entry["mean_position"] = json!(g.mean_position());
            entry["grid_file"] = json!(path);
            entry["grid_header"] = json!(sidecar);
        }
        println!(
            "N = {n}: |Φ|² = {:.12}, |FΨ|² = {:.12}, Fock {fock:.2e}, residual {residual:.2e}",
            st.spherical().norm_squared(),
            st.norm_squared()
        );
        rows.push(row);
        summary.push(entry)?;
    }
    let mut header = vec![
        "N",
        "sphere_norm2",
        "momentum_norm2",
        "fock_rel_error",
        "hydrogen_residual",
    ];
    if grid {
        header.push("position_norm2");
    }
    write_table(csv, &header, &rows)
}

fn matelem(cfg: &ExperimentConfig, csv: &Path, summary: &mut Summary) -> Result<()> {
    check_n_budget(&cfg.n_list, cfg.allow_large_n)?;
    let frame = cfg.frame.to_frame()?;
    let a = cfg.symbol.build(&frame, &cfg.scale(cfg.n_list[0])?)?;
    let opts = cfg.quantize_options();
    let mut rows = vec![];
    for &n in &cfg.n_list {
        let st = MomentumState::new(frame, cfg.scale(n)?);
        let r = matrix_element(&a, &st, &st, &opts)?;
        println!(
            "N = {n}: {:.15e} {:+.3e}i ± {:.2e} ({:?})",
            r.value.re, r.value.im, r.error_estimate, r.method
        );
        rows.push(vec![
            n.to_string(),
            fmt_f64(r.value.re),
            fmt_f64(r.value.im),
            fmt_f64(r.error_estimate),
            serde_json::to_value(r.method)?.as_str().unwrap_or_default().to_string(),
        ]);
        summary.push(json!({"N": n, "report": r}))?;
    }
    write_table(csv, &["N", "re", "im", "error_estimate", "method"], &rows)
}

fn hessian(theta0: f64, samples: usize, csv: &Path, summary: &mut Summary) -> Result<()> {
    if samples == 0 {
        return Err(Error::Config("--beta-samples must be positive".into()));
    }
    let mut rows = vec![];
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let beta = -std::f64::consts::PI + std::f64::consts::TAU * (k as f64 + 0.5) / samples as f64;
        let closed = hessian_det_closed(beta, theta0);
        match hessian_numeric(beta, theta0) {
            Ok(r) => {
                let rel = (r.sqrt_abs_det - closed).abs() / closed;
                worst = worst.max(rel);
                rows.push(vec![
                    fmt_f64(beta),
                    fmt_f64(closed),
                    fmt_f64(r.sqrt_abs_det),
                    fmt_f64(rel),
                ]);
            }
            // the collision chart degenerates where cos β = 0
            Err(Error::IllConditioned(_)) | Err(Error::InvalidInput(_)) => {
                rows.push(vec![fmt_f64(beta), fmt_f64(closed), "nan".into(), "nan".into()])
            }
            Err(e) => return Err(e),
        }
    }
    println!("θ0 = {theta0}: worst relative difference {worst:.3e} over {samples} samples");
    write_table(csv, &["beta", "closed", "numeric", "rel_error"], &rows)?;
    summary.push(json!({"theta0": theta0, "beta_samples": samples, "max_rel_error": worst}))
}
