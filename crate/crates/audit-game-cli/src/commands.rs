//! Subcommand execution.
//!
//! Exit codes: 0 on success, 2 on validation/config errors, 3 when a
//! requested closed form is infeasible — the diagnostics are still written.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use audit_game::game::{
    backward_induction_equilibrium, AuditGameParams, GameState, PayoffVectors, SignalPolicy,
};
use audit_game::optimizer::{brute_force_diff_oracle, solve_diff_max};
use audit_game::roc::{default_thresholds, roc_curve_with, LabelScheme};
use audit_game::sim::{play_iterated, Role};
use audit_game::zd::{control_gradients, control_range_and_dominance, equalizer_strategy};
use audit_game::Error;

use crate::config::{parse_strategy, ConfigError, ExperimentConfig, ModelChoice};
use crate::figures::emit_figure_data;
use crate::manifest::RunManifest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

const USAGE: &str =
    "usage: audit-game <command> [--config <path>] [--seed <u64>] [--out <dir>] [--format csv|json]

commands:
  payoffs      payoff vectors of the configured model
  equilibrium  one-shot sequential equilibrium
  equalize     equalizer strategy pinning the attacker's utility at (p1, p4)
  range        control ranges and dominance of the strategy variables
  optimize     closed-form utility-difference bounds over the phi grid
  oracle       brute-force grid search for attacker-independent differences
  simulate     iterated tournament between the configured strategies
  roc          detection curve of the configured tournament
  figures      emit every figure-ready CSV panel";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OutputFormat {
    Csv,
    Json,
}

struct Invocation {
    command: String,
    config: ExperimentConfig,
    format: Option<OutputFormat>,
}

fn parse_args(argv: &[String]) -> Result<Invocation, String> {
    let mut command = None;
    let mut config_path: Option<PathBuf> = None;
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut format = None;

    let mut it = argv.iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--config" => {
                let v = it.next().ok_or("--config needs a path")?;
                config_path = Some(PathBuf::from(v));
            }
            "--seed" => {
                let v = it.next().ok_or("--seed needs a value")?;
                overrides.push(("seed".into(), v.clone()));
            }
            "--out" => {
                let v = it.next().ok_or("--out needs a directory")?;
                overrides.push(("out".into(), v.clone()));
            }
            "--format" => {
                let v = it.next().ok_or("--format needs csv or json")?;
                format = Some(match v.as_str() {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    other => return Err(format!("unknown format `{other}`")),
                });
            }
            "--help" | "-h" => return Err(USAGE.to_string()),
            other if command.is_none() && !other.starts_with('-') => {
                command = Some(other.to_string());
            }
            other => return Err(format!("unexpected argument `{other}`\n{USAGE}")),
        }
    }
    let command = command.ok_or(USAGE.to_string())?;

    let mut config = match config_path {
        Some(path) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
            ExperimentConfig::parse(&text).map_err(|e| e.to_string())?
        }
        None => ExperimentConfig::default(),
    };
    for (key, value) in overrides {
        config.set(&key, &value, None).map_err(|e| e.to_string())?;
    }
    Ok(Invocation {
        command,
        config,
        format,
    })
}

/// Map a library validation error to the config key it invalidates.
fn offending_key(e: &Error) -> &'static str {
    match e {
        Error::NonPositiveParameter { name, .. } => match *name {
            "t_d" => "t_d",
            "t_m" => "t_m",
            "c" => "c",
            "r_a" => "r_a",
            _ => "s_a",
        },
        Error::OrderingViolated { .. } => "t_d",
        Error::PolicyViolated { .. } => "tau",
        _ => "config",
    }
}

struct Context {
    cfg: ExperimentConfig,
    payoffs: PayoffVectors,
    format: OutputFormat,
}

impl Context {
    fn build(inv: &Invocation, default_format: OutputFormat) -> Result<Context, ConfigError> {
        let cfg = inv.config.clone();
        let params = AuditGameParams::new(cfg.t_d, cfg.t_m, cfg.c, cfg.r_a, cfg.s_a, cfg.strict)
            .map_err(|e| ConfigError {
                key: offending_key(&e).into(),
                line: None,
                message: e.to_string(),
            })?;
        let payoffs = match cfg.model {
            ModelChoice::Deterministic => PayoffVectors::deterministic(&params),
            ModelChoice::Probabilistic => {
                let policy = SignalPolicy::new(cfg.tau, cfg.delta).map_err(|e| ConfigError {
                    key: "tau".into(),
                    line: None,
                    message: e.to_string(),
                })?;
                PayoffVectors::probabilistic(&params, &policy)
            }
        };
        Ok(Context {
            format: inv.format.unwrap_or(default_format),
            cfg,
            payoffs,
        })
    }

    fn labels(&self) -> LabelScheme {
        if self.cfg.standard_labels {
            LabelScheme::Standard
        } else {
            LabelScheme::Inverted
        }
    }
}

/// Run one CLI invocation; returns the process exit code.
pub fn run_command(argv: &[String]) -> i32 {
    let inv = match parse_args(argv) {
        Ok(inv) => inv,
        Err(message) => {
            eprintln!("{message}");
            return EXIT_CONFIG;
        }
    };
    let result = match inv.command.as_str() {
        "payoffs" => cmd_payoffs(&inv),
        "equilibrium" => cmd_equilibrium(&inv),
        "equalize" => cmd_equalize(&inv),
        "range" => cmd_range(&inv),
        "optimize" => cmd_optimize(&inv),
        "oracle" => cmd_oracle(&inv),
        "simulate" => cmd_simulate(&inv),
        "roc" => cmd_roc(&inv),
        "figures" => cmd_figures(&inv),
        other => {
            eprintln!("unknown command `{other}`\n{USAGE}");
            return EXIT_CONFIG;
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            EXIT_CONFIG
        }
    }
}

type CmdResult = Result<i32, Box<dyn std::error::Error>>;

fn finish(manifest: &mut RunManifest, dir: &Path, code: i32) -> CmdResult {
    manifest.write(dir)?;
    Ok(code)
}

fn cmd_payoffs(inv: &Invocation) -> CmdResult {
    let ctx = Context::build(inv, OutputFormat::Json).map_err(exit_config)?;
    let mut manifest = RunManifest::new("payoffs", &ctx.cfg);
    let body = match ctx.format {
        OutputFormat::Json => {
            let value = json!({
                "model": format!("{:?}", ctx.payoffs.model()).to_lowercase(),
                "states": GameState::all().map(|s| s.label()),
                "u_d": ctx.payoffs.u_d(),
                "u_a": ctx.payoffs.u_a(),
            });
            serde_json::to_string_pretty(&value)?
        }
        OutputFormat::Csv => {
            let mut lines = vec!["state,u_d,u_a".to_string()];
            for s in GameState::all() {
                lines.push(format!(
                    "{},{},{}",
                    s.label(),
                    ctx.payoffs.u_d()[s.index()],
                    ctx.payoffs.u_a()[s.index()]
                ));
            }
            lines.join("\n") + "\n"
        }
    };
    let name = match ctx.format {
        OutputFormat::Json => "payoffs.json",
        OutputFormat::Csv => "payoffs.csv",
    };
    manifest.write_output(&ctx.cfg.out, name, &body)?;
    println!("{body}");
    finish(&mut manifest, &ctx.cfg.out, EXIT_OK)
}

fn cmd_equilibrium(inv: &Invocation) -> CmdResult {
    let ctx = Context::build(inv, OutputFormat::Json).map_err(exit_config)?;
    let mut manifest = RunManifest::new("equilibrium", &ctx.cfg);
    let eq = backward_induction_equilibrium(&ctx.payoffs);
    let value = json!({
        "equilibrium": eq.state.label(),
        "responses": {
            "after_no_signal": format!("{:?}", eq.attacker_response[0]).to_lowercase(),
            "after_signal": format!("{:?}", eq.attacker_response[1]).to_lowercase(),
        },
    });
    let body = serde_json::to_string_pretty(&value)?;
    manifest.write_output(&ctx.cfg.out, "equilibrium.json", &body)?;
    println!("{body}");
    finish(&mut manifest, &ctx.cfg.out, EXIT_OK)
}

fn cmd_equalize(inv: &Invocation) -> CmdResult {
    let ctx = Context::build(inv, OutputFormat::Json).map_err(exit_config)?;
    let mut manifest = RunManifest::new("equalize", &ctx.cfg);
    let eq = match equalizer_strategy(ctx.cfg.p1, ctx.cfg.p4, &ctx.payoffs) {
        Ok(eq) => eq,
        Err(e) => return config_fail(e),
    };
    let (clamped, moved) = eq.clamped();
    let value = json!({
        "p1": ctx.cfg.p1,
        "p4": ctx.cfg.p4,
        "candidate": eq.candidate,
        "alpha": eq.alpha,
        "gamma": eq.gamma,
        "predicted_u_a": eq.predicted_u_a,
        "feasible": eq.feasible,
        "violations": eq.violations,
        "clamped_projection": clamped.probs(),
    });
    let body = serde_json::to_string_pretty(&value)?;
    manifest.write_output(&ctx.cfg.out, "equalize.json", &body)?;
    println!("{body}");
    let code = if eq.feasible {
        EXIT_OK
    } else {
        if moved {
            manifest.warn(format!(
                "equalizer candidate at ({}, {}) is infeasible; clamped projection provided",
                ctx.cfg.p1, ctx.cfg.p4
            ));
        }
        EXIT_INFEASIBLE
    };
    finish(&mut manifest, &ctx.cfg.out, code)
}

fn cmd_range(inv: &Invocation) -> CmdResult {
    let ctx = Context::build(inv, OutputFormat::Json).map_err(exit_config)?;
    let mut manifest = RunManifest::new("range", &ctx.cfg);
    let analysis = match control_range_and_dominance(ctx.cfg.p1, ctx.cfg.p4, &ctx.payoffs) {
        Ok(a) => a,
        Err(e) => return config_fail(e),
    };
    let gradients = control_gradients(ctx.cfg.p1, ctx.cfg.p4, &ctx.payoffs).ok();
    let value = json!({
        "p1": ctx.cfg.p1,
        "p4": ctx.cfg.p4,
        "ranges": analysis.ranges,
        "dominant": analysis.dominant,
        "gradients": gradients,
    });
    let body = serde_json::to_string_pretty(&value)?;
    manifest.write_output(&ctx.cfg.out, "range.json", &body)?;
    println!("{body}");
    finish(&mut manifest, &ctx.cfg.out, EXIT_OK)
}

fn cmd_optimize(inv: &Invocation) -> CmdResult {
    let ctx = Context::build(inv, OutputFormat::Csv).map_err(exit_config)?;
    let mut manifest = RunManifest::new("optimize", &ctx.cfg);
    let grid = ctx.cfg.effective_phi_grid();
    let report = match solve_diff_max(&ctx.payoffs, &grid) {
        Ok(r) => r,
        Err(e) => return config_fail(e),
    };
    let body = match ctx.format {
        OutputFormat::Csv => {
            let mut lines = vec![
                "phi,gamma_min,gamma_max,feasible,value,binding_lower_state,binding_upper_state,p1,p2,p3,p4"
                    .to_string(),
            ];
            for s in &report.solutions {
                lines.push(format!(
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    s.phi,
                    s.bounds.gamma_min,
                    s.bounds.gamma_max,
                    s.feasible,
                    s.value,
                    GameState::from_index(s.bounds.binding_lower)
                        .unwrap()
                        .label(),
                    GameState::from_index(s.bounds.binding_upper)
                        .unwrap()
                        .label(),
                    s.candidate[0],
                    s.candidate[1],
                    s.candidate[2],
                    s.candidate[3],
                ));
            }
            lines.join("\n") + "\n"
        }
        OutputFormat::Json => serde_json::to_string_pretty(&report)?,
    };
    let name = match ctx.format {
        OutputFormat::Csv => "optimize.csv",
        OutputFormat::Json => "optimize.json",
    };
    manifest.write_output(&ctx.cfg.out, name, &body)?;
    println!("{body}");
    let code = match report.best_solution() {
        Some(best) => {
            println!(
                "best: phi = {}, enforced u_d - u_a = {}",
                best.phi, best.value
            );
            EXIT_OK
        }
        None => {
            manifest.warn(
                "no phi on the grid admits a playable strategy; closed-form values reported per phi"
                    .to_string(),
            );
            EXIT_INFEASIBLE
        }
    };
    finish(&mut manifest, &ctx.cfg.out, code)
}

fn cmd_oracle(inv: &Invocation) -> CmdResult {
    let ctx = Context::build(inv, OutputFormat::Csv).map_err(exit_config)?;
    let mut manifest = RunManifest::new("oracle", &ctx.cfg);
    let report = brute_force_diff_oracle(&ctx.payoffs, ctx.cfg.p_step, ctx.cfg.q_step);
    let body = match ctx.format {
        OutputFormat::Csv => {
            let mut lines = vec!["p1,p2,p3,p4,value,spread".to_string()];
            for cell in &report.enforcing {
                lines.push(format!(
                    "{},{},{},{},{},{}",
                    cell.p[0], cell.p[1], cell.p[2], cell.p[3], cell.value, cell.spread
                ));
            }
            lines.join("\n") + "\n"
        }
        OutputFormat::Json => serde_json::to_string_pretty(&report)?,
    };
    let name = match ctx.format {
        OutputFormat::Csv => "oracle.csv",
        OutputFormat::Json => "oracle.json",
    };
    manifest.write_output(&ctx.cfg.out, name, &body)?;
    println!(
        "oracle: {} defender cells, {} enforcing, {} without enough ergodic attacker cells",
        report.p_cells,
        report.enforcing.len(),
        report.non_ergodic_cells
    );
    if let Some(best) = report.best() {
        println!(
            "best enforcing cell: p = {:?}, value = {}",
            best.p, best.value
        );
    }
    finish(&mut manifest, &ctx.cfg.out, EXIT_OK)
}

fn resolve_specs(
    cfg: &ExperimentConfig,
) -> Result<(audit_game::sim::StrategySpec, audit_game::sim::StrategySpec), ConfigError> {
    Ok((
        parse_strategy(Role::Defender, &cfg.defender)?,
        parse_strategy(Role::Attacker, &cfg.attacker)?,
    ))
}

fn cmd_simulate(inv: &Invocation) -> CmdResult {
    let ctx = Context::build(inv, OutputFormat::Csv).map_err(exit_config)?;
    let mut manifest = RunManifest::new("simulate", &ctx.cfg);
    let (defender, attacker) = resolve_specs(&ctx.cfg).map_err(exit_config)?;
    let result = match play_iterated(
        &defender,
        &attacker,
        &ctx.payoffs,
        ctx.cfg.rounds,
        ctx.cfg.repetitions,
        ctx.cfg.seed,
    ) {
        Ok(r) => r,
        Err(e) => return config_fail(e),
    };
    if result.config.defender_clamped {
        manifest.warn(format!(
            "defender `{}` is an infeasible zero-determinant candidate projected onto [0,1]",
            result.config.defender
        ));
    }
    let mut lines = vec!["round,mean_u_d,mean_u_a,mean_diff".to_string()];
    for t in 0..result.config.rounds as usize {
        let d = result.per_round_mean_u_d[t];
        let a = result.per_round_mean_u_a[t];
        lines.push(format!("{t},{d},{a},{}", d - a));
    }
    let body = lines.join("\n") + "\n";
    manifest.write_output(&ctx.cfg.out, "simulate.csv", &body)?;
    println!(
        "simulate: {} vs {} over {}x{} rounds: mean u_d = {}, mean u_a = {}",
        result.config.defender,
        result.config.attacker,
        result.config.repetitions,
        result.config.rounds,
        result.mean_u_d,
        result.mean_u_a
    );
    finish(&mut manifest, &ctx.cfg.out, EXIT_OK)
}

fn cmd_roc(inv: &Invocation) -> CmdResult {
    let ctx = Context::build(inv, OutputFormat::Csv).map_err(exit_config)?;
    let mut manifest = RunManifest::new("roc", &ctx.cfg);
    let (defender, attacker) = resolve_specs(&ctx.cfg).map_err(exit_config)?;
    let result = match play_iterated(
        &defender,
        &attacker,
        &ctx.payoffs,
        ctx.cfg.rounds,
        ctx.cfg.repetitions,
        ctx.cfg.seed,
    ) {
        Ok(r) => r,
        Err(e) => return config_fail(e),
    };
    let curve = roc_curve_with(
        &result,
        &default_thresholds(ctx.cfg.thresholds),
        ctx.labels(),
    );
    let body = match ctx.format {
        OutputFormat::Csv => {
            let mut lines = vec!["threshold,fpr,tpr".to_string()];
            for p in &curve.points {
                lines.push(format!("{},{},{}", p.threshold, p.fpr, p.tpr));
            }
            lines.join("\n") + "\n"
        }
        OutputFormat::Json => serde_json::to_string_pretty(&curve)?,
    };
    let name = match ctx.format {
        OutputFormat::Csv => "roc.csv",
        OutputFormat::Json => "roc.json",
    };
    manifest.write_output(&ctx.cfg.out, name, &body)?;
    for theta in &curve.skipped_thresholds {
        manifest.warn(format!("threshold {theta} skipped: empty rate denominator"));
    }
    println!("roc: auc = {}", curve.auc);
    finish(&mut manifest, &ctx.cfg.out, EXIT_OK)
}

fn cmd_figures(inv: &Invocation) -> CmdResult {
    let ctx = Context::build(inv, OutputFormat::Csv).map_err(exit_config)?;
    let mut manifest = RunManifest::new("figures", &ctx.cfg);
    let (files, warnings) = match emit_figure_data(&ctx.cfg) {
        Ok(out) => out,
        Err(e) => return config_fail(e),
    };
    for w in warnings {
        manifest.warn(w);
    }
    for file in &files {
        manifest.write_output(&ctx.cfg.out, &file.name, &file.content)?;
    }
    println!(
        "figures: wrote {} files to {}",
        files.len(),
        ctx.cfg.out.display()
    );
    finish(&mut manifest, &ctx.cfg.out, EXIT_OK)
}

/// Library errors reaching the CLI surface are user-input problems.
fn config_fail(e: Error) -> CmdResult {
    eprintln!("{e}");
    Ok(EXIT_CONFIG)
}

fn exit_config(e: ConfigError) -> Box<dyn std::error::Error> {
    Box::new(e)
}
