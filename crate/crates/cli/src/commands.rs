use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use serde_json::json;

use g2lab::error::{Error, Result};
use g2lab::fields::{DecayTable, LieField};
use g2lab::forms::checks::run_suite;
use g2lab::forms::write_form;
use g2lab::g2::{euclidean_phi, normalize, G2Structure, NormalizeOptions};
use g2lab::model::{canonical_connection, instanton_defect, pullback_to_cone, transition_residual, Flat, Linear};
use g2lab::poly::PolyFormField;
use g2lab::rescale::{c5_deviation, covariance_suite, family, ScaleMap, FAMILIES};
use g2lab::sampling::sphere_points;
use g2lab::solver::{build_problem, default_init, fit_decay_rate, solve_monopole, SolveStatus, SolverConfig};
use g2lab::{KForm, Point};

use crate::Command;

/// Tolerance of the residual covariance identity.
const COVARIANCE_TOL: f64 = 1e-9;

pub struct Outcome {
    pub summary: String,
    pub code: u8,
}

impl Outcome {
    fn new(ok: bool, summary: String) -> Self {
        Self { summary, code: if ok { 0 } else { 2 } }
    }
}

/// Caps the rayon pool at `G2LAB_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("G2LAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidInput(format!("G2LAB_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::InvalidInput(e.to_string()))
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Inconsistency(_) | Error::NotConverged { .. } => 2,
        _ => 1,
    }
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> Result<()> {
    fs::create_dir_all(dir)?;
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidInput(e.to_string()))?;
    fs::write(dir.join(name), text + "\n")?;
    Ok(())
}

/// A family name, or a form file with optional per-term exponents.
fn load_phi(source: &str) -> Result<PolyFormField> {
    if FAMILIES.contains(&source) {
        return family(source);
    }
    let text = fs::read_to_string(source).map_err(|e| {
        Error::InvalidInput(format!(
            "`{source}` is neither a family ({}) nor a readable file: {e}",
            FAMILIES.join(", ")
        ))
    })?;
    let phi = PolyFormField::parse(&text)?;
    if phi.degree() != 3 {
        return Err(Error::InvalidInput(format!("expected a 3-form, got degree {}", phi.degree())));
    }
    Ok(phi)
}

fn point(at: &Option<Vec<f64>>) -> Result<Point> {
    let mut x = [0.0; 7];
    if let Some(v) = at {
        if v.len() != 7 {
            return Err(Error::InvalidInput(format!("--at needs 7 coordinates, got {}", v.len())));
        }
        x.copy_from_slice(v);
    }
    Ok(x)
}

fn constant_phi(source: &str, at: &Option<Vec<f64>>) -> Result<KForm> {
    Ok(load_phi(source)?.eval(&point(at)?))
}

pub fn run(cmd: &Command, out: &Path) -> Result<Outcome> {
    match cmd {
        Command::AlgebraCheck { seed, trials } => {
            let checks = run_suite(*seed, *trials);
            write_json(out, "algebra-check.json", &json!({ "seed": seed, "trials": trials, "checks": checks }))?;
            let failed: Vec<String> = checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| format!("{} (error {:e}, {})", c.name, c.max_error, c.witness.as_deref().unwrap_or("")))
                .collect();
            let summary = if failed.is_empty() {
                format!("algebra-check: {} invariants passed over {trials} trials (seed {seed})", checks.len())
            } else {
                format!("algebra-check: FAILED {}", failed.join("; "))
            };
            Ok(Outcome::new(failed.is_empty(), summary))
        }
        Command::G2Derive { phi, at } => {
            let st = G2Structure::from_phi(constant_phi(phi, at)?)?;
            let g = st.g.entries();
            let dev = (0..7)
                .flat_map(|i| (0..7).map(move |j| (i, j)))
                .map(|(i, j)| (g[i][j] - if i == j { 1.0 } else { 0.0 }).abs())
                .fold(0.0, f64::max);
            write_json(
                out,
                "g2-derive.json",
                &json!({
                    "phi": write_form(&st.phi),
                    "metric": g,
                    "psi": write_form(&st.psi),
                    "volume_density": st.g.det().sqrt(),
                    "margin": st.margin,
                }),
            )?;
            let terms = st.psi.terms().count();
            Ok(Outcome::new(
                true,
                format!("g2-derive: max |g − I| = {dev:.3e}, ψ has {terms} terms, margin {:.6}", st.margin),
            ))
        }
        Command::Normalize { phi, at, seed, restarts, tol } => {
            let form = constant_phi(phi, at)?;
            let opts = NormalizeOptions { tol: *tol, restarts: *restarts, seed: *seed, ..NormalizeOptions::default() };
            match normalize(&form, &opts) {
                Ok(r) => {
                    write_json(
                        out,
                        "normalize.json",
                        &json!({ "l": r.l, "residual": r.residual, "restart": r.restart, "restarts_run": r.restarts_run }),
                    )?;
                    Ok(Outcome::new(
                        true,
                        format!("normalize: residual {:.3e} after {} restart(s)", r.residual, r.restarts_run),
                    ))
                }
                Err(Error::NotConverged { iterations, best_residual }) => {
                    write_json(out, "normalize.json", &json!({ "converged": false, "best_residual": best_residual }))?;
                    Ok(Outcome::new(
                        false,
                        format!(
                            "normalize: best residual {best_residual:.3e} above {tol:e} after {iterations} iterations"
                        ),
                    ))
                }
                Err(e) => Err(e),
            }
        }
        Command::InstantonCheck { model, rank, samples, radius, tol } => {
            let base: g2lab::model::ChartConnection = match model.as_str() {
                "canonical" => canonical_connection(6)?,
                "flat" => Arc::new(Flat { m: *rank }),
                file => Arc::new(Linear::parse(&fs::read_to_string(file)?)?),
            };
            if !(*radius > 0.0) {
                return Err(Error::InvalidInput("radius must be positive".into()));
            }
            let pts: Vec<Point> = sphere_points(*samples).into_iter().map(|p| p.map(|c| c * radius)).collect();
            let cone = pullback_to_cone(base.clone());
            let report = instanton_defect(&cone as &dyn LieField, &euclidean_phi(), &pts)?;
            let transition = transition_residual(&base, &pts)?;
            write_json(
                out,
                "instanton-check.json",
                &json!({ "model": base.name(), "rank": base.rank(), "defect": report.defect,
                         "transition_residual": transition, "points": report.points }),
            )?;
            let ok = report.defect <= *tol;
            Ok(Outcome::new(
                ok,
                format!(
                    "instanton-check: {} defect {:.3e} ({}), transition residual {transition:.3e}",
                    base.name(),
                    report.defect,
                    if ok { "within tolerance" } else { "above tolerance" }
                ),
            ))
        }
        Command::RescaleCheck { phi, lambda, constant, seed, points } => {
            let form = load_phi(phi)?;
            let s = ScaleMap::new(*lambda)?;
            let c5 = c5_deviation(&form, s, *constant)?;
            let cov = covariance_suite(&form, s, *seed, *points)?;
            let worst = cov.iter().map(|c| c.rel_error).fold(0.0, f64::max);
            write_json(
                out,
                "rescale-check.json",
                &json!({ "phi": phi, "c5": c5, "covariance_max_rel_error": worst, "covariance": cov }),
            )?;
            let ok = c5.min_margin() > 0.0 && worst <= COVARIANCE_TOL;
            Ok(Outcome::new(
                ok,
                format!(
                    "rescale-check: λ = {lambda}, min margin {:.3e}, covariance defect {worst:.3e}",
                    c5.min_margin()
                ),
            ))
        }
        Command::Solve { config } => {
            let cfg = SolverConfig::parse(&fs::read_to_string(config)?)?;
            let problem = build_problem(&cfg)?;
            let init = default_init(&problem, &cfg)?;
            let (profiles, report) = solve_monopole(&problem, &cfg, &init)?;
            let exact_error = problem.exact.as_ref().map(|e| profiles.max_difference(e));
            write_json(
                out,
                "report.json",
                &json!({ "config": cfg, "report": report, "exact_profile_error": exact_error }),
            )?;
            fs::write(out.join("profiles.csv"), profiles.to_csv())?;
            if let Some(t) = &report.decay_table {
                fs::write(out.join("decay.csv"), t.to_csv())?;
            }
            let slope = report.decay.as_ref().map_or(f64::NAN, |d| d.slope);
            Ok(Outcome::new(
                report.status == SolveStatus::Converged,
                format!(
                    "solve: {:?} after {} iterations, residual {:.3e} → {:.3e}, decay slope {slope:.3}",
                    report.status, report.iterations, report.initial_residual, report.final_residual
                ),
            ))
        }
        Command::DecayFit { table, theta } => {
            let t = DecayTable::from_csv(&fs::read_to_string(table)?)?;
            let fit = fit_decay_rate(&t, *theta)?;
            write_json(out, "decay-fit.json", &fit)?;
            Ok(Outcome::new(
                fit.meets_target,
                format!(
                    "decay-fit: slope {:.4} over {} radii, target {:.2} ({:?})",
                    fit.slope, fit.radii_used, fit.target, fit.status
                ),
            ))
        }
    }
}
