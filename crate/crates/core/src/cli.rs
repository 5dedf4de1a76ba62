//! Command dispatch and JSON reports.
//!
//! Exit status: 0 certified / pass, 1 not certified / fail, 2 error.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{self, ConfigError, RunConfig};
use crate::decay::{self, Channel, DecayError};
use crate::model::{self, ModelError, NormMode, ValidationGrid};
use crate::simulate::{self, SimError};
use crate::stability::{self, Certificate, StabilityError, StabilityMatrix};

/// The worked example shipped with the crate.
pub const EXAMPLE_CONFIG: &str = include_str!("../examples/paper_example.json");

/// Majorant printed alongside the worked example, and its reported radius.
pub const PRINTED_MAJORANT: [[f64; 5]; 5] = [
    [0.0, 0.1, 0.505, 0.5, 0.0],
    [0.25, 0.0, 0.1, 0.1, 0.0],
    [0.25, 1.01, 0.0, 0.1, 0.0],
    [0.5, 0.0, 0.0, 0.0, 0.1],
    [0.1, 0.0, 0.0, 0.3, 0.0],
];
pub const PRINTED_RADIUS: f64 = 0.8443;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Validate,
    Certify,
    CertifyCorollary,
    Simulate,
    Decay,
    Apriori,
    ReproduceExample,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Certify => "certify",
            Command::CertifyCorollary => "certify-corollary",
            Command::Simulate => "simulate",
            Command::Decay => "decay",
            Command::Apriori => "apriori",
            Command::ReproduceExample => "reproduce-example",
        }
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "validate" => Command::Validate,
            "certify" => Command::Certify,
            "certify-corollary" => Command::CertifyCorollary,
            "simulate" => Command::Simulate,
            "decay" => Command::Decay,
            "apriori" => Command::Apriori,
            "reproduce-example" => Command::ReproduceExample,
            other => return Err(format!("unknown command `{other}`")),
        })
    }
}

#[derive(Debug, Clone, Default)]
pub struct Options {
    pub step: Option<f64>,
    pub t_end: Option<f64>,
    pub mode: Option<NormMode>,
    pub three_halves: bool,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Stability(#[from] StabilityError),
    #[error(transparent)]
    Simulate(#[from] SimError),
    #[error(transparent)]
    Decay(#[from] DecayError),
    #[error("writing {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0} requires a config file")]
    MissingConfig(&'static str),
}

impl CliError {
    /// Module the error originated in.
    pub fn module(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::MissingConfig(_) => "config",
            CliError::Model(_) => "model",
            CliError::Stability(_) => "stability",
            CliError::Simulate(_) => "simulate",
            CliError::Decay(_) => "decay",
            CliError::Output { .. } => "cli",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: Value,
    /// Human-readable summary (used by `reproduce-example`).
    pub text: Option<String>,
}

impl Outcome {
    /// The report without its `metadata` block; byte-stable across runs.
    pub fn payload(&self) -> Value {
        let mut v = self.report.clone();
        if let Some(o) = v.as_object_mut() {
            o.remove("metadata");
        }
        v
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn empty_report(command: Command, config_hash: &str) -> Value {
    json!({
        "command": command.as_str(),
        "config_sha256": config_hash,
        "verdict": Value::Null,
        "matrix": Value::Null,
        "spectral_radius": Value::Null,
        "minors": Value::Null,
        "hypotheses": Value::Null,
        "norms": Value::Null,
        "decay": Value::Null,
        "apriori": Value::Null,
        "metadata": {
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "generated_unix_seconds": SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        },
    })
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn certificate_into(report: &mut Value, c: &Certificate) {
    report["verdict"] = to_value(&c.verdict);
    report["matrix"] = to_value(&c.matrix);
    report["spectral_radius"] = json!(c.spectral_radius);
    report["minors"] = to_value(&c.leading_minors);
    report["hypotheses"] = to_value(&c.hypothesis_report);
    report["norms"] = to_value(&c.norms);
    report["certificate"] = json!({
        "method": c.method,
        "reason": c.reason,
        "marginal": c.marginal,
        "corollary_lhs": c.corollary_lhs,
        "t0_note": "certified at the configured t0 only; no search over later start times",
    });
}

struct Context<'a> {
    cfg: &'a RunConfig,
    opts: &'a Options,
}

impl Context<'_> {
    fn grid(&self) -> ValidationGrid {
        let n = &self.cfg.numerics;
        let default = ValidationGrid::default_for(&self.cfg.system, n.period_hint);
        ValidationGrid { step: n.grid_step.unwrap_or(default.step), horizon: n.horizon.unwrap_or(default.horizon) }
    }

    fn mode(&self) -> NormMode {
        self.opts.mode.unwrap_or(NormMode::Declared)
    }

    fn step(&self) -> f64 {
        let min_lag = self.cfg.system.min_positive_lag().unwrap_or(1.0).min(1.0);
        self.opts.step.or(self.cfg.numerics.step).unwrap_or(min_lag / 20.0)
    }

    fn window(&self) -> f64 {
        self.cfg.numerics.window.unwrap_or(5.0 * (self.cfg.system.max_lag() + 1.0))
    }

    fn t_end(&self) -> f64 {
        let span = (10.0 * self.window()).max(100.0);
        self.opts.t_end.or(self.cfg.numerics.t_end).unwrap_or(self.cfg.system.t0 + span)
    }

    fn certify(&self) -> Result<Certificate, CliError> {
        Ok(stability::certify_theorem31_with(
            &self.cfg.system,
            self.mode(),
            &self.grid(),
            &self.cfg.numerics.tolerances,
        )?)
    }

    fn first_order(&self) -> Value {
        let s = &self.cfg.system;
        to_value(&stability::first_order_report(s.b1.upper, s.g1.max_lag, self.opts.three_halves))
    }

    fn write_csv(&self, traj: &simulate::Trajectory, path: &Path) -> Result<(), CliError> {
        let io = |source| CliError::Output { path: path.to_path_buf(), source };
        let file = File::create(path).map_err(io)?;
        traj.write_csv(BufWriter::new(file)).map_err(io)
    }
}

fn verdict_exit(ok: bool) -> i32 {
    if ok {
        0
    } else {
        1
    }
}

fn dispatch(command: Command, cfg: &RunConfig, opts: &Options, report: &mut Value) -> Result<(i32, Option<String>), CliError> {
    let ctx = Context { cfg, opts };
    match command {
        Command::Validate => {
            cfg.system.check()?;
            let r = model::validate(&cfg.system, &ctx.grid());
            let ok = r.all_passed();
            report["verdict"] = json!(if ok { "pass" } else { "fail" });
            report["hypotheses"] = to_value(&r);
            Ok((verdict_exit(ok), None))
        }
        Command::Certify => {
            let c = ctx.certify()?;
            certificate_into(report, &c);
            report["first_order"] = ctx.first_order();
            Ok((verdict_exit(c.is_certified()), None))
        }
        Command::CertifyCorollary => {
            let c = stability::certify_corollary31_with(&cfg.system, &ctx.grid(), &cfg.numerics.tolerances)?;
            certificate_into(report, &c);
            report["cross_check"] = c.cross_check.as_ref().map_or(Value::Null, |x| {
                json!({"verdict": x.verdict, "spectral_radius": x.spectral_radius, "minors": x.leading_minors})
            });
            Ok((verdict_exit(c.is_certified()), None))
        }
        Command::Simulate => {
            let traj = simulate::integrate(&cfg.system, &cfg.initial, &cfg.forcing, ctx.t_end(), ctx.step())?;
            let path = opts
                .out
                .clone()
                .or_else(|| cfg.outputs.trajectory.clone())
                .unwrap_or_else(|| PathBuf::from("trajectory.csv"));
            ctx.write_csv(&traj, &path)?;
            report["verdict"] = json!("pass");
            report["simulation"] = json!({
                "step": traj.step,
                "t_end": traj.end_time(),
                "sup_norms": traj.sup_norms(),
                "stats": traj.stats,
                "trajectory_csv": path,
            });
            Ok((0, None))
        }
        Command::Decay => {
            let traj = simulate::integrate(&cfg.system, &cfg.initial, &cfg.forcing, ctx.t_end(), ctx.step())?;
            if let Some(path) = &cfg.outputs.trajectory {
                ctx.write_csv(&traj, path)?;
            }
            let window = ctx.window();
            let est = decay::estimate_decay(&traj, Channel::Max, window)?;
            if let Some(path) = &cfg.outputs.plot_data {
                let io = |source| CliError::Output { path: path.clone(), source };
                est.write_plot_data(BufWriter::new(File::create(path).map_err(io)?)).map_err(io)?;
            }
            let mut notes = Vec::new();
            if window <= cfg.system.max_lag() {
                notes.push(format!("window {window} does not exceed the largest lag {}", cfg.system.max_lag()));
            }
            if traj.end_time() - traj.t0 < 10.0 * window {
                notes.push("trajectory spans fewer than 10 windows".to_string());
            }
            let decaying = est.mu > 0.0;
            report["verdict"] = json!(if decaying { "decaying" } else { "not_decaying" });
            report["decay"] = json!({
                "M": est.m,
                "M_fit": est.m_fit,
                "mu": est.mu,
                "r_squared": est.r_squared,
                "channel": est.channel,
                "window": window,
                "points": est.points.len(),
                "notes": notes,
            });
            report["simulation"] = json!({"step": traj.step, "t_end": traj.end_time(), "stats": traj.stats});
            Ok((verdict_exit(decaying), None))
        }
        Command::Apriori => {
            let c = ctx.certify()?;
            certificate_into(report, &c);
            if !c.is_certified() {
                return Ok((1, None));
            }
            let t1 = cfg.numerics.apriori_t1.or(opts.t_end).unwrap_or_else(|| ctx.t_end());
            let r = simulate::verify_apriori(&cfg.system, &cfg.forcing, &c, t1, ctx.step())?;
            let ok = r.all_hold;
            report["apriori"] = to_value(&r);
            report["verdict"] = json!(if ok { "pass" } else { "fail" });
            Ok((verdict_exit(ok), None))
        }
        Command::ReproduceExample => reproduce(&ctx, report),
    }
}

fn reproduce(ctx: &Context<'_>, report: &mut Value) -> Result<(i32, Option<String>), CliError> {
    let cfg = ctx.cfg;
    let printed = stability::spectral_radius(&PRINTED_MAJORANT, stability::DEFAULT_RADIUS_TOL)?;
    let printed_m = stability::is_m_matrix(&StabilityMatrix(PRINTED_MAJORANT).complement(), stability::DEFAULT_MINOR_TOL)?;
    let c = ctx.certify()?;
    certificate_into(report, &c);

    let traj = simulate::integrate(&cfg.system, &cfg.initial, &cfg.forcing, ctx.t_end(), ctx.step())?;
    let est = decay::estimate_decay(&traj, Channel::Max, ctx.window())?;
    report["decay"] = json!({"M": est.m, "mu": est.mu, "r_squared": est.r_squared, "window": ctx.window()});
    report["printed_majorant"] = json!({
        "spectral_radius": printed,
        "reported": PRINTED_RADIUS,
        "minors": printed_m.minors,
    });

    let s = &cfg.system;
    let n = &c.norms;
    let mut t = String::new();
    let _ = writeln!(t, "{:<28} {:>14} {:>14}", "quantity", "reference", "computed");
    let mut row = |name: &str, reference: String, computed: String| {
        let _ = writeln!(t, "{name:<28} {reference:>14} {computed:>14}");
    };
    row("r(printed majorant)", format!("~{PRINTED_RADIUS}"), format!("{printed:.6}"));
    row("r(A) from config", format!("<= {PRINTED_RADIUS}"), format!("{:.6}", c.spectral_radius));
    row("alpha1^2 >= 4 A2", "1 >= 1".into(), format!("{} >= {}", s.a1.lower.powi(2), 4.0 * s.a2.upper));
    row("|a1/a2|", "5.05".into(), format!("{:.6}", n.r_a1_a2));
    row("|a3/a2|", "0.5".into(), format!("{:.6}", n.r_a3_a2));
    row("|a2/a1|", "0.25".into(), format!("{:.6}", n.r_a2_a1));
    row("|a3/a1|", "0.1".into(), format!("{:.6}", n.r_a3_a1));
    row("|b2/b1|", "0.5".into(), format!("{:.6}", n.r_b2_b1));
    row("verdict", "stable".into(), format!("{:?}", c.verdict));
    row("decay rate mu", "(not given)".into(), format!("{:.6}", est.mu));
    row("fit r^2", "-".into(), format!("{:.6}", est.r_squared));

    let ok = c.is_certified() && printed < 1.0 && est.mu > 0.0;
    report["verdict"] = to_value(&c.verdict);
    Ok((verdict_exit(ok), Some(t)))
}

/// Runs one command. `config` may be `None` only for `reproduce-example`,
/// which then uses the shipped worked example.
pub fn run(command: Command, config: Option<&Path>, opts: &Options) -> Outcome {
    let bytes = match config {
        Some(p) => std::fs::read(p).map_err(|source| CliError::Config(ConfigError::Io { path: p.to_path_buf(), source })),
        None if command == Command::ReproduceExample => Ok(EXAMPLE_CONFIG.as_bytes().to_vec()),
        None => Err(CliError::MissingConfig(command.as_str())),
    };
    let hash = bytes.as_ref().map(|b| sha256_hex(b)).unwrap_or_default();
    let mut report = empty_report(command, &hash);
    let result = bytes
        .and_then(|b| config::parse_config(&b).map_err(CliError::from))
        .and_then(|cfg| {
            let r = dispatch(command, &cfg, opts, &mut report);
            if r.is_ok() {
                let target = match command {
                    Command::Simulate => cfg.outputs.report.clone(),
                    _ => opts.out.clone().or_else(|| cfg.outputs.report.clone()),
                };
                if let Some(path) = target {
                    write_report(&report, &path)?;
                }
            }
            r
        });
    match result {
        Ok((exit_code, text)) => Outcome { exit_code, report, text },
        Err(e) => {
            report["verdict"] = json!("error");
            report["error"] = json!({"module": e.module(), "message": e.to_string()});
            Outcome { exit_code: 2, report, text: None }
        }
    }
}

fn write_report(report: &Value, path: &Path) -> Result<(), CliError> {
    let io = |source| CliError::Output { path: path.to_path_buf(), source };
    let text = serde_json::to_string_pretty(report).expect("json");
    std::fs::write(path, text + "\n").map_err(io)
}
