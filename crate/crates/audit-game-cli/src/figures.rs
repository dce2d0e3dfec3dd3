//! Deterministic emission of figure-ready CSV data.
//!
//! Each panel becomes one CSV file with a header row; numeric cells use the
//! shortest round-trip decimal form. Panels are generated concurrently, each
//! tournament seeded by a stable hash of the master seed and the panel's
//! identifiers, then written in sorted order so reruns are byte-identical.

use rayon::prelude::*;

use audit_game::game::{AuditGameParams, PayoffVectors, SignalPolicy};
use audit_game::optimizer::gamma_bounds;
use audit_game::roc::{default_thresholds, roc_curve_with, LabelScheme};
use audit_game::sim::{play_iterated, StrategyKind, StrategySpec};
use audit_game::zd::{attacker_utility_at_tau, attacker_utility_formula};
use audit_game::Error;

use crate::config::ExperimentConfig;
use crate::manifest::fnv1a64;

/// An emitted figure file.
pub struct FigureFile {
    pub name: String,
    pub content: String,
}

/// Files plus warnings produced by one figure panel.
type PanelOutput = Result<(Vec<FigureFile>, Vec<String>), Error>;
type PanelJob = Box<dyn Fn() -> PanelOutput + Send + Sync>;

/// Panel seed derived from the master seed and the panel path.
fn panel_seed(master: u64, tag: &str) -> u64 {
    master ^ fnv1a64(tag.as_bytes())
}

fn fmt_row(cells: &[String]) -> String {
    cells.join(",")
}

fn num(x: f64) -> String {
    format!("{x}")
}

const BASELINES: [(&str, StrategyKind); 5] = [
    ("all0", StrategyKind::All0),
    ("all1", StrategyKind::All1),
    ("rand", StrategyKind::Rand),
    ("tft", StrategyKind::Tft),
    ("wsls", StrategyKind::Wsls),
];

fn defender_lineup(zd: StrategyKind) -> Vec<(&'static str, StrategyKind)> {
    let mut v = vec![("zd", zd)];
    v.extend(BASELINES.iter().cloned());
    v
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

/// The domain a variable sweeps: the config's declared `[lo, hi]` when the
/// sweep declaration names this variable, the full unit interval otherwise.
fn sweep_domain(cfg: &ExperimentConfig, variable: &str) -> (f64, f64) {
    match cfg.sweep_variable.as_deref() {
        Some(v) if v == variable => (cfg.sweep_lo, cfg.sweep_hi),
        _ => (0.0, 1.0),
    }
}

/// Emit every figure panel. Returns the files plus any warnings (clamped
/// zero-determinant strategies, infeasible closed-form cells).
pub fn emit_figure_data(cfg: &ExperimentConfig) -> Result<(Vec<FigureFile>, Vec<String>), Error> {
    let params = AuditGameParams::new(cfg.t_d, cfg.t_m, cfg.c, cfg.r_a, cfg.s_a, cfg.strict)?;
    let policy = SignalPolicy::new(cfg.tau, cfg.delta)?;
    let det = PayoffVectors::deterministic(&params);
    let prob = PayoffVectors::probabilistic(&params, &policy);

    let mut jobs: Vec<PanelJob> = Vec::new();

    // fig3: pinned attacker utility versus p1 and versus p4, deterministic.
    {
        let cfg = cfg.clone();
        jobs.push(Box::new(move || {
            Ok((
                vec![
                    sweep_file("fig3_p1_sweep.csv", "p1", &det, cfg.p4, true, &cfg)?,
                    sweep_file("fig3_p4_sweep.csv", "p4", &det, cfg.p1, false, &cfg)?,
                ],
                Vec::new(),
            ))
        }));
    }

    // fig4: the same sweeps in the probabilistic model, plus tau sweeps.
    {
        let cfg = cfg.clone();
        jobs.push(Box::new(move || {
            let mut files = vec![
                sweep_file("fig4_p1_sweep.csv", "p1", &prob, cfg.p4, true, &cfg)?,
                sweep_file("fig4_p4_sweep.csv", "p4", &prob, cfg.p1, false, &cfg)?,
            ];
            let (tau_lo, tau_hi) = sweep_domain(&cfg, "tau");
            let mut lines = vec!["tau,p1,p4,u_a".to_string()];
            for &(p1, p4) in &[(0.2, 0.2), (0.5, 0.5), (0.8, 0.2), (0.2, 0.8)] {
                for tau in linspace(tau_lo, tau_hi, cfg.sweep_steps) {
                    let u = attacker_utility_at_tau(p1, p4, &params, tau)?;
                    lines.push(fmt_row(&[num(tau), num(p1), num(p4), num(u)]));
                }
            }
            files.push(FigureFile {
                name: "fig4_tau_sweep.csv".into(),
                content: lines.join("\n") + "\n",
            });
            Ok((files, Vec::new()))
        }));
    }

    // fig5: per-round mean attacker utility for each defender strategy
    // against every baseline attacker, deterministic model.
    for (def_name, def_kind) in defender_lineup(StrategyKind::ZdEqualizer {
        p1: cfg.p1,
        p4: cfg.p4,
        clamp: true,
    }) {
        let cfg = cfg.clone();
        let def_kind = def_kind.clone();
        jobs.push(Box::new(move || {
            panel_rounds_file(
                "fig5",
                def_name,
                &def_kind,
                &det,
                &cfg,
                RoundColumn::AttackerUtility,
            )
        }));
    }

    // fig6: detection curves per attacker baseline, deterministic model.
    {
        let cfg = cfg.clone();
        jobs.push(Box::new(move || fig6_files(&det, &cfg)));
    }

    // fig7: closed-form difference bound over the policy square at the
    // configured phi, plus the two affine slices.
    {
        let cfg = cfg.clone();
        jobs.push(Box::new(move || fig7_files(&params, &cfg)));
    }

    // fig8: per-round mean utility difference, probabilistic model.
    for (def_name, def_kind) in defender_lineup(StrategyKind::ZdDiffMax {
        phi: cfg.phi,
        clamp: true,
    }) {
        let cfg = cfg.clone();
        let def_kind = def_kind.clone();
        jobs.push(Box::new(move || {
            panel_rounds_file(
                "fig8",
                def_name,
                &def_kind,
                &prob,
                &cfg,
                RoundColumn::UtilityDifference,
            )
        }));
    }

    let results: Vec<PanelOutput> = jobs.par_iter().map(|job| job()).collect();

    let mut files = Vec::new();
    let mut warnings = Vec::new();
    for r in results {
        let (f, w) = r?;
        files.extend(f);
        warnings.extend(w);
    }
    files.sort_by(|a, b| a.name.cmp(&b.name));
    warnings.sort();
    warnings.dedup();
    Ok((files, warnings))
}

fn sweep_file(
    name: &str,
    variable: &str,
    payoffs: &PayoffVectors,
    fixed: f64,
    sweep_is_p1: bool,
    cfg: &ExperimentConfig,
) -> Result<FigureFile, Error> {
    let (lo, hi) = sweep_domain(cfg, variable);
    let mut lines = vec![format!("{variable},u_a")];
    for x in linspace(lo, hi, cfg.sweep_steps) {
        let (p1, p4) = if sweep_is_p1 { (x, fixed) } else { (fixed, x) };
        let u = match attacker_utility_formula(p1, p4, payoffs) {
            Ok(u) => u,
            // The degenerate corner is excluded by its one-sided limit.
            Err(Error::DegenerateTarget) => {
                if sweep_is_p1 {
                    payoffs.u_a()[3]
                } else {
                    0.0
                }
            }
            Err(e) => return Err(e),
        };
        lines.push(fmt_row(&[num(x), num(u)]));
    }
    Ok(FigureFile {
        name: name.to_string(),
        content: lines.join("\n") + "\n",
    })
}

enum RoundColumn {
    AttackerUtility,
    UtilityDifference,
}

fn panel_rounds_file(
    fig: &str,
    def_name: &str,
    def_kind: &StrategyKind,
    payoffs: &PayoffVectors,
    cfg: &ExperimentConfig,
    column: RoundColumn,
) -> PanelOutput {
    let mut warnings = Vec::new();
    let mut header = vec!["round".to_string()];
    header.extend(BASELINES.iter().map(|(n, _)| n.to_string()));
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (att_name, att_kind) in BASELINES.iter() {
        let seed = panel_seed(cfg.seed, &format!("{fig}/{def_name}/{att_name}"));
        let result = play_iterated(
            &StrategySpec::defender(def_kind.clone()),
            &StrategySpec::attacker(att_kind.clone()),
            payoffs,
            cfg.rounds,
            cfg.repetitions,
            seed,
        )?;
        if result.config.defender_clamped {
            warnings.push(format!(
                "{fig}: defender `{}` is an infeasible zero-determinant candidate projected onto [0,1]",
                result.config.defender
            ));
        }
        columns.push(match column {
            RoundColumn::AttackerUtility => result.per_round_mean_u_a,
            RoundColumn::UtilityDifference => result
                .per_round_mean_u_d
                .iter()
                .zip(result.per_round_mean_u_a.iter())
                .map(|(d, a)| d - a)
                .collect(),
        });
    }
    let mut lines = vec![fmt_row(&header)];
    for t in 0..cfg.rounds as usize {
        let mut row = vec![num(t as f64)];
        row.extend(columns.iter().map(|col| num(col[t])));
        lines.push(fmt_row(&row));
    }
    Ok((
        vec![FigureFile {
            name: format!("{fig}_{def_name}.csv"),
            content: lines.join("\n") + "\n",
        }],
        warnings,
    ))
}

fn fig6_files(det: &PayoffVectors, cfg: &ExperimentConfig) -> PanelOutput {
    let labels = if cfg.standard_labels {
        LabelScheme::Standard
    } else {
        LabelScheme::Inverted
    };
    let thresholds = default_thresholds(cfg.thresholds);
    let mut files = Vec::new();
    let mut warnings = Vec::new();
    let mut auc_lines = vec!["attacker,defender,auc".to_string()];
    for (att_name, att_kind) in BASELINES.iter() {
        let mut lines = vec!["defender,threshold,fpr,tpr".to_string()];
        for (def_name, def_kind) in defender_lineup(StrategyKind::ZdEqualizer {
            p1: cfg.p1,
            p4: cfg.p4,
            clamp: true,
        }) {
            let seed = panel_seed(cfg.seed, &format!("fig6/{def_name}/{att_name}"));
            let result = play_iterated(
                &StrategySpec::defender(def_kind.clone()),
                &StrategySpec::attacker(att_kind.clone()),
                det,
                cfg.rounds,
                cfg.repetitions,
                seed,
            )?;
            if result.config.defender_clamped {
                warnings.push(format!(
                    "fig6: defender `{}` is an infeasible zero-determinant candidate projected onto [0,1]",
                    result.config.defender
                ));
            }
            let curve = roc_curve_with(&result, &thresholds, labels);
            for p in &curve.points {
                lines.push(fmt_row(&[
                    def_name.to_string(),
                    num(p.threshold),
                    num(p.fpr),
                    num(p.tpr),
                ]));
            }
            auc_lines.push(fmt_row(&[
                att_name.to_string(),
                def_name.to_string(),
                num(curve.auc),
            ]));
        }
        files.push(FigureFile {
            name: format!("fig6_{att_name}.csv"),
            content: lines.join("\n") + "\n",
        });
    }
    files.push(FigureFile {
        name: "fig6_auc.csv".into(),
        content: auc_lines.join("\n") + "\n",
    });
    Ok((files, warnings))
}

fn fig7_files(params: &AuditGameParams, cfg: &ExperimentConfig) -> PanelOutput {
    let mut warnings = Vec::new();
    let mut any_infeasible = false;
    let header = "tau,delta,gamma_min,value,feasible".to_string();

    let mut cell = |tau: f64, delta: f64| -> Result<Option<String>, Error> {
        let Ok(policy) = SignalPolicy::new(tau, delta) else {
            return Ok(None);
        };
        let payoffs = PayoffVectors::probabilistic(params, &policy);
        let bounds = gamma_bounds(&payoffs, cfg.phi)?;
        if !bounds.feasible {
            any_infeasible = true;
        }
        Ok(Some(fmt_row(&[
            num(tau),
            num(delta),
            num(bounds.gamma_min),
            num(-bounds.gamma_min),
            bounds.feasible.to_string(),
        ])))
    };

    let axis = linspace(0.0, 1.0, cfg.sweep_steps);
    let mut surface = vec![header.clone()];
    for &tau in &axis {
        for &delta in &axis {
            if let Some(row) = cell(tau, delta)? {
                surface.push(row);
            }
        }
    }

    // Slice with tau - delta held at the configured gap.
    let gap = cfg.tau - cfg.delta;
    let mut slice_diff = vec![header.clone()];
    for tau in linspace(gap.max(0.0), 1.0, cfg.sweep_steps) {
        if let Some(row) = cell(tau, tau - gap)? {
            slice_diff.push(row);
        }
    }

    // Slice with delta proportional to tau at the configured ratio.
    let ratio = cfg.delta / cfg.tau;
    let mut slice_ratio = vec![header];
    for tau in linspace(0.0, 1.0, cfg.sweep_steps) {
        if let Some(row) = cell(tau, tau * ratio)? {
            slice_ratio.push(row);
        }
    }

    if any_infeasible {
        warnings.push(format!(
            "fig7: no playable strategy attains the closed-form bound at phi = {} for some or all policy cells; rows carry feasible=false",
            cfg.phi
        ));
    }
    Ok((
        vec![
            FigureFile {
                name: "fig7_surface.csv".into(),
                content: surface.join("\n") + "\n",
            },
            FigureFile {
                name: "fig7_slice_diff.csv".into(),
                content: slice_diff.join("\n") + "\n",
            },
            FigureFile {
                name: "fig7_slice_ratio.csv".into(),
                content: slice_ratio.join("\n") + "\n",
            },
        ],
        warnings,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_declaration_restricts_the_named_variable() {
        let cfg = ExperimentConfig {
            sweep_variable: Some("p1".to_string()),
            sweep_lo: 0.2,
            sweep_hi: 0.8,
            sweep_steps: 7,
            ..ExperimentConfig::default()
        };
        let (files, _) = emit_figure_data(&cfg).unwrap();
        let fig3 = files
            .iter()
            .find(|f| f.name == "fig3_p1_sweep.csv")
            .unwrap();
        let rows: Vec<&str> = fig3.content.lines().skip(1).collect();
        assert_eq!(rows.len(), 7);
        assert!(rows[0].starts_with("0.2,"));
        assert!(rows[6].starts_with("0.8,"));
        // Other variables keep the full unit interval.
        let fig4 = files
            .iter()
            .find(|f| f.name == "fig4_p4_sweep.csv")
            .unwrap();
        let rows: Vec<&str> = fig4.content.lines().skip(1).collect();
        assert!(rows[0].starts_with("0,"));
        assert!(rows.last().unwrap().starts_with("1,"));
    }

    #[test]
    fn monotone_decline_along_the_p1_sweep() {
        let (files, _) = emit_figure_data(&ExperimentConfig::default()).unwrap();
        let fig3 = files
            .iter()
            .find(|f| f.name == "fig3_p1_sweep.csv")
            .unwrap();
        let values: Vec<f64> = fig3
            .content
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert!((values[0] - 10.0 / 3.0).abs() < 1e-12);
        assert_eq!(*values.last().unwrap(), 0.0);
        assert!(values.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }
}
