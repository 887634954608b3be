//! Figure datasets: one CSV per panel plus a `manifest.json`.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use super::scan::{bounds_scan, cloud_csv};
use super::{CliError, CliResult};
use crate::channels::{linspace, p_kernel, Channel, NonMarkovParams};
use crate::dynamics::{closed_form_ewl_nm, closed_form_ewl_pd, default_grid, rf_example_initial, sweep, Trajectory};
use crate::measures::{bloch_report, measures_x};
use crate::numerics::fmt_sig12;
use crate::states::{ewl, BellDiagonal, EwlKind, EwlParams};

pub const FIGURE_NAMES: [&str; 6] = ["fig1", "fig2", "fig3", "fig4", "fig5", "fig6"];

/// Cloud size for fig1 when `--samples` is not given.
const FIG1_SAMPLES: usize = 10_000;
/// Points along each parameter axis of fig2.
const FIG2_AXIS: usize = 101;
/// Points along the secondary (r or α²) axis of the fig3/fig4 surfaces.
const SURFACE_AXIS: usize = 21;

#[derive(Serialize)]
struct Panel {
    panel: &'static str,
    file: String,
    description: String,
    columns: Vec<&'static str>,
    parameters: Value,
}

#[derive(Serialize)]
struct Manifest {
    figure: String,
    panels: Vec<Panel>,
}

pub fn write_figure(name: &str, dir: &Path, samples: Option<usize>, seed: u64) -> CliResult<()> {
    if !FIGURE_NAMES.contains(&name) {
        return Err(CliError::Domain(format!(
            "unknown figure `{name}`; valid names: {}",
            FIGURE_NAMES.join(", ")
        )));
    }
    if samples == Some(0) {
        return Err(CliError::Domain("samples must be at least 1".into()));
    }
    let panels: Vec<(Panel, String)> = match name {
        "fig1" => fig1(samples.unwrap_or(FIG1_SAMPLES), seed),
        "fig2" => fig2(),
        "fig3" => fig3(),
        "fig4" => fig4()?,
        "fig5" => fig5()?,
        _ => fig6()?,
    };
    fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
    let mut manifest = Manifest {
        figure: name.to_string(),
        panels: Vec::new(),
    };
    for (panel, csv) in panels {
        let path = dir.join(&panel.file);
        fs::write(&path, csv).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
        manifest.panels.push(panel);
    }
    let path = dir.join("manifest.json");
    fs::write(&path, super::to_json(&manifest))
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn csv_rows(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = r.into_iter().map(fmt_sig12).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn axis(points: usize) -> Vec<f64> {
    linspace(0.0, 1.0, points).expect("unit axis")
}

fn fig1(samples: usize, seed: u64) -> Vec<(Panel, String)> {
    let (_, cloud) = bounds_scan(samples, seed);
    let panel = Panel {
        panel: "a",
        file: "fig1.csv".into(),
        description: "Bell-diagonal samples in the (D_G, B) plane with the lower curve 4*sqrt(D_G) and upper curve 2*sqrt(1+2*D_G)".into(),
        columns: vec!["series", "D_G", "B"],
        parameters: json!({"samples": samples, "seed": seed, "curve_points": 101}),
    };
    vec![(panel, cloud_csv(&cloud))]
}

fn fig2() -> Vec<(Panel, String)> {
    let ax = axis(FIG2_AXIS);
    let mut b_rows = Vec::new();
    let mut d_rows = Vec::new();
    for &a2 in &ax {
        for &r in &ax {
            let m = measures_x(&ewl(&EwlParams::with_alpha_sq(EwlKind::Phi, r, a2).expect("unit axes")));
            b_rows.push(vec![a2, r, m.b]);
            d_rows.push(vec![a2, r, m.d_g]);
        }
    }
    let params = json!({"alpha_sq": {"start": 0, "stop": 1, "points": FIG2_AXIS},
                        "r": {"start": 0, "stop": 1, "points": FIG2_AXIS}});
    vec![
        (
            Panel {
                panel: "a",
                file: "fig2a.csv".into(),
                description: "B of the initial EWL state over (alpha^2, r)".into(),
                columns: vec!["alpha_sq", "r", "B"],
                parameters: params.clone(),
            },
            csv_rows("alpha_sq,r,B", b_rows),
        ),
        (
            Panel {
                panel: "b",
                file: "fig2b.csv".into(),
                description: "D_G of the initial EWL state over (alpha^2, r)".into(),
                columns: vec!["alpha_sq", "r", "D_G"],
                parameters: params,
            },
            csv_rows("alpha_sq,r,D_G", d_rows),
        ),
    ]
}

fn fig3() -> Vec<(Panel, String)> {
    let ps = default_grid(&Channel::PhaseDamping);
    let ax = axis(SURFACE_AXIS);
    let mut out = Vec::new();
    // (a)(b): α² = ½ over (p, r); (c)(d): r = 1 over (p, α²).
    for (tag_b, tag_d, fixed, var) in [("a", "b", "alpha_sq", "r"), ("c", "d", "r", "alpha_sq")] {
        let mut b_rows = Vec::new();
        let mut d_rows = Vec::new();
        for &p in &ps {
            for &v in &ax {
                let (r, a2) = if var == "r" { (v, 0.5) } else { (1.0, v) };
                let (b, d) = closed_form_ewl_pd(r, a2.sqrt(), p).expect("grid in range");
                b_rows.push(vec![p, v, b]);
                d_rows.push(vec![p, v, d]);
            }
        }
        let fixed_val = if fixed == "r" { 1.0 } else { 0.5 };
        let params = json!({fixed: fixed_val,
                            "p": {"start": 0, "stop": 1, "points": ps.len()},
                            var: {"start": 0, "stop": 1, "points": SURFACE_AXIS}});
        for (tag, q, rows) in [(tag_b, "B", b_rows), (tag_d, "D_G", d_rows)] {
            out.push((
                Panel {
                    panel: tag,
                    file: format!("fig3{tag}.csv"),
                    description: format!("{q} of the EWL state under phase damping over (p, {var}) at {fixed} = {fixed_val}"),
                    columns: vec!["p", var, q],
                    parameters: params.clone(),
                },
                csv_rows(&format!("p,{var},{q}"), rows),
            ));
        }
    }
    out
}

fn fig4() -> CliResult<Vec<(Panel, String)>> {
    let ratio = 1e-3;
    let prm = NonMarkovParams::from_ratio(ratio)?;
    let grid = default_grid(&Channel::AmplitudeNonMarkov(prm));
    let pt: Vec<f64> = grid.iter().map(|&t| p_kernel(t, &prm)).collect::<crate::Result<_>>()?;
    let ax = axis(SURFACE_AXIS);
    let mut out = Vec::new();
    // Φ in (a)(b), Ψ in (c)(d); (a)(c) at α² = ½ over r, (b)(d) at r = 1 over α².
    for (tag, kind, var) in [
        ("a", EwlKind::Phi, "r"),
        ("b", EwlKind::Phi, "alpha_sq"),
        ("c", EwlKind::Psi, "r"),
        ("d", EwlKind::Psi, "alpha_sq"),
    ] {
        let mut rows = Vec::with_capacity(grid.len() * ax.len());
        for (&t, &p) in grid.iter().zip(&pt) {
            for &v in &ax {
                let (r, a2) = if var == "r" { (v, 0.5) } else { (1.0, v) };
                let x = closed_form_ewl_nm(kind, r, a2.sqrt(), p.clamp(0.0, 1.0))?;
                rows.push(vec![t, v, bloch_report(&x.bloch(), None).b]);
            }
        }
        let branch = if kind == EwlKind::Phi { "Phi" } else { "Psi" };
        let (fixed, fixed_val) = if var == "r" { ("alpha_sq", 0.5) } else { ("r", 1.0) };
        out.push((
            Panel {
                panel: tag,
                file: format!("fig4{tag}.csv"),
                description: format!("B of the {branch} branch under non-Markovian decay over (Gamma t, {var}) at {fixed} = {fixed_val}"),
                columns: vec!["Gamma_t", var, "B"],
                parameters: json!({"branch": branch, "lam_over_gamma": ratio, fixed: fixed_val,
                                   "Gamma_t": {"start": 0, "stop": grid[grid.len() - 1], "points": grid.len()},
                                   var: {"start": 0, "stop": 1, "points": SURFACE_AXIS}}),
            },
            csv_rows(&format!("Gamma_t,{var},B"), rows),
        ));
    }
    Ok(out)
}

fn series_csv(traj: &Trajectory, kernel_name: &str) -> String {
    let rows = traj
        .grid
        .iter()
        .zip(&traj.reports)
        .zip(&traj.kernel)
        .map(|((t, r), k)| vec![*t, r.b - 2.0, 2.0 * r.d_g, *k]);
    csv_rows(&format!("t,B-2,2D_G,{kernel_name}"), rows)
}

fn fig5() -> CliResult<Vec<(Panel, String)>> {
    let ratio = 1e-4;
    let ch = Channel::AmplitudeNonMarkov(NonMarkovParams::from_ratio(ratio)?);
    let grid = default_grid(&ch);
    let mut out = Vec::new();
    for (tag, kind, a2, r) in [
        ("a", EwlKind::Phi, 1.0 / 3.0, 1.0),
        ("b", EwlKind::Psi, 1.0 / 3.0, 1.0),
        ("c", EwlKind::Phi, 0.5, 0.85),
        ("d", EwlKind::Psi, 0.5, 0.85),
    ] {
        let rho = ewl(&EwlParams::with_alpha_sq(kind, r, a2)?).density();
        let traj = sweep(&rho, &ch, &grid)?;
        let branch = if kind == EwlKind::Phi { "Phi" } else { "Psi" };
        out.push((
            Panel {
                panel: tag,
                file: format!("fig5{tag}.csv"),
                description: format!("B-2 and 2*D_G of the {branch} branch against Gamma t; t is Gamma t"),
                columns: vec!["t", "B-2", "2D_G", "P_t"],
                parameters: json!({"branch": branch, "alpha_sq": a2, "r": r, "lam_over_gamma": ratio,
                                   "Gamma_t": {"start": 0, "stop": grid[grid.len() - 1], "points": grid.len()}}),
            },
            series_csv(&traj, "P_t"),
        ));
    }
    Ok(out)
}

fn fig6() -> CliResult<Vec<(Panel, String)>> {
    let ch = Channel::RandomField { g: 1.0 };
    let grid = default_grid(&ch);
    let l0 = rf_example_initial();
    let rho = BellDiagonal::from_eigenvalues(&l0)?.density();
    let traj = sweep(&rho, &ch, &grid)?;
    Ok(vec![(
        Panel {
            panel: "a",
            file: "fig6.csv".into(),
            description: "B-2 and 2*D_G under the random external field; t is gt".into(),
            columns: vec!["t", "B-2", "2D_G", "f"],
            parameters: json!({"lambda_psi_plus": l0.psi_plus, "lambda_psi_minus": l0.psi_minus,
                               "lambda_phi_plus": l0.phi_plus, "lambda_phi_minus": l0.phi_minus,
                               "gt": {"start": 0, "stop": grid[grid.len() - 1], "points": grid.len()}}),
        },
        series_csv(&traj, "f"),
    )])
}
