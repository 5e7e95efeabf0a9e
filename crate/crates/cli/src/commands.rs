//! Command implementations. Grid outputs are buffered per point in grid
//! order (y-major rows, x increasing) so byte-identical files come out
//! regardless of worker scheduling.

use crate::config::{Mode, RunConfig};
use crate::target::{evaluate_grid_rows, load_seed_file, load_seed_pair, PointData, Target};
use crate::{CheckKind, CliError};
use forge_core::contour::standard_q;
use forge_core::coords::{joyce_to_twistor, twistor_to_joyce, JoycePoint};
use forge_core::curvature::{
    curvature_report, einstein_certificate, CurvatureReport, Orientation, ScalarSign,
    CERT_PROBE_STEP,
};
use forge_core::joyce::{catalogue, catalogue_fields, JoyceError, MetricJet};
use forge_core::series::{ode_residual, solve_phi2, validate_seed, DEFAULT_BOUNDARY_TOL};
use forge_core::twistor::{
    bracket_coefficient, identity_defect, involution_matrix, mat2_det, mat2_mul, span_residual,
    standard_quadratics, FramePoint, SpanConstant,
};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::input("io", format!("cannot write `{}`: {e}", path.display())))
}

#[derive(Serialize)]
struct Summary {
    check: String,
    target: String,
    mode: Mode,
    points: usize,
    max: f64,
    mean: f64,
    tolerance: f64,
    pass: bool,
    config_hash: String,
}

fn emit_summary(
    check: &str,
    cfg: &RunConfig,
    residuals: &[f64],
    tolerance: f64,
    outdir: &Path,
) -> Result<ExitCode, CliError> {
    let max = residuals.iter().cloned().fold(0.0, f64::max);
    let mean = residuals.iter().sum::<f64>() / residuals.len().max(1) as f64;
    let summary = Summary {
        check: check.into(),
        target: cfg.target.clone(),
        mode: cfg.mode,
        points: residuals.len(),
        max,
        mean,
        tolerance,
        pass: max < tolerance,
        config_hash: cfg.hash(),
    };
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_file(&outdir.join(format!("{check}_summary.json")), &text)?;
    println!("{text}");
    Ok(if summary.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

pub fn seed_validate(file: &str, cfg: &RunConfig) -> Result<ExitCode, CliError> {
    let (phi1, phi2) = load_seed_pair(file, cfg.terms)?;
    let report = validate_seed(&phi1, &phi2, DEFAULT_BOUNDARY_TOL);
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("report serializes")
    );
    Ok(if report.nondegenerate {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn ode_sample_points(radius: f64) -> Vec<Complex64> {
    // Deterministic 7x7 box clipped to |z| <= 0.5·min(1, radius·0.9).
    let cap = 0.5 * (0.9 * radius).min(1.0);
    let mut pts = Vec::new();
    for iy in 0..7 {
        for ix in 0..7 {
            let re = -0.35 + 0.7 * ix as f64 / 6.0;
            let im = -0.35 + 0.7 * iy as f64 / 6.0;
            let z = Complex64::new(re * cap / 0.5, im * cap / 0.5);
            pts.push(z);
        }
    }
    pts
}

pub fn seed_solve(
    file: &str,
    terms: Option<usize>,
    out: Option<&Path>,
    cfg: &RunConfig,
) -> Result<ExitCode, CliError> {
    let seed = load_seed_file(file)?;
    let phi1 = seed.phi1.to_series();
    let n = terms.unwrap_or(seed.truncation).max(1);
    let phi2 = solve_phi2(&phi1, n).map_err(CliError::domain)?;
    let samples = ode_sample_points(phi2.radius().min(phi1.radius()));
    let residual = ode_residual(&phi1, &phi2, &samples).map_err(CliError::domain)?;
    let payload = serde_json::json!({
        "phi2": {
            "odd_coefficients": phi2.coefficients().iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
            "radius": phi2.radius(),
        },
        "terms": n,
        "ode_residual": residual,
        "config_hash": cfg.hash(),
    });
    let text = serde_json::to_string_pretty(&payload).expect("payload serializes");
    match out {
        Some(path) => {
            write_file(path, &text)?;
            println!("ode_residual = {residual}");
        }
        None => {
            println!("{text}");
            eprintln!("ode_residual = {residual}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn g_eval(
    file: &str,
    r: Complex64,
    s: Complex64,
    order: usize,
    cfg: &RunConfig,
) -> Result<ExitCode, CliError> {
    if order > 3 {
        return Err(CliError::input("order", "jet order is at most 3"));
    }
    let target = Target::parse(file, cfg)?;
    let ev = target.requires_seed("g eval")?;
    let jet = ev.eval_g_jet(r, s, order).map_err(CliError::domain)?;
    let mut out = String::from("re_r,im_r,re_s,im_s,m,n,re_G1,im_G1,re_G2,im_G2,err\n");
    for (&(m, n), &(g1, g2)) in jet.partials() {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.re, r.im, s.re, s.im, m, n, g1.re, g1.im, g2.re, g2.im, jet.error_estimate
        ));
    }
    print!("{out}");
    std::io::stdout().flush().ok();
    Ok(ExitCode::SUCCESS)
}

fn metric_closure<'a>(
    target: &'a Target,
) -> Box<dyn Fn(f64, f64) -> Result<MetricJet, JoyceError> + Sync + 'a> {
    match target {
        Target::Builtin(pair) => {
            let pair = *pair;
            Box::new(move |x: f64, y: f64| {
                let p = JoycePoint::new(x, y)?;
                let jets = [pair.0.jet3(x, y), pair.1.jet3(x, y)];
                forge_core::joyce::assemble_metric(&forge_core::coords::pq_from_field_jets(
                    &jets, p,
                ))
            })
        }
        Target::Seed { evaluator, .. } => Box::new(move |x: f64, y: f64| {
            let p = JoycePoint::new(x, y)?;
            let (r, s) = joyce_to_twistor(&p)?;
            let gj = evaluator.eval_g_jet(r, s, 3)?;
            let fj = forge_core::coords::f_jet_from_g(&gj, p.zeta(), p.xi(), None)?;
            forge_core::joyce::assemble_metric(&forge_core::coords::pq_jet(&fj, p))
        }),
    }
}

pub fn verify(
    check: CheckKind,
    target_spec: &str,
    cfg: &RunConfig,
    outdir: &Path,
) -> Result<ExitCode, CliError> {
    let target = Target::parse(target_spec, cfg)?;
    let name = check.name();
    match check {
        CheckKind::Ode => {
            let (phi1, phi2) = match &target {
                Target::Seed { phi1, phi2, .. } => (phi1, phi2),
                Target::Builtin(_) => {
                    return Err(CliError::input(
                        "seed-required",
                        "`verify ode` needs a seed file",
                    ))
                }
            };
            let cap = 0.9 * phi1.radius().min(phi2.radius());
            let mut rows = String::from("re_z,im_z,residual\n");
            let mut residuals = Vec::new();
            for y in cfg.grid.ys() {
                for x in cfg.grid.xs() {
                    let z = Complex64::new(x, y);
                    if z.norm() >= cap {
                        continue;
                    }
                    let res = ode_residual(phi1, phi2, &[z]).map_err(CliError::domain)?;
                    rows.push_str(&format!("{x},{y},{res}\n"));
                    residuals.push(res);
                }
            }
            write_file(&outdir.join(format!("{name}_residuals.csv")), &rows)?;
            emit_summary(name, cfg, &residuals, cfg.tolerances.ode, outdir)
        }
        CheckKind::Twistor => {
            let (phi1, phi2) = match &target {
                Target::Seed { phi1, phi2, .. } => (phi1, phi2),
                Target::Builtin(_) => {
                    return Err(CliError::input(
                        "seed-required",
                        "`verify twistor` needs a seed file",
                    ))
                }
            };
            let (q1, q2) = standard_quadratics();
            let cap = 0.9 * phi1.radius().min(phi2.radius());
            let four_i = Complex64::new(0.0, 4.0);
            let mut rows =
                String::from("re_z,im_z,involution,determinant,span,bracket,residual\n");
            let mut residuals = Vec::new();
            for y in cfg.grid.ys() {
                for x in cfg.grid.xs() {
                    let z = Complex64::new(x, y);
                    if z.norm() >= cap || z.norm() < 1e-6 {
                        continue;
                    }
                    let fp = FramePoint::new(z, (&q1, &q2), (phi1, phi2))
                        .map_err(CliError::domain)?;
                    let a = involution_matrix(&fp).map_err(CliError::domain)?;
                    let fm = FramePoint::new(-z, (&q1, &q2), (phi1, phi2))
                        .map_err(CliError::domain)?;
                    let am = involution_matrix(&fm).map_err(CliError::domain)?;
                    let inv = identity_defect(&mat2_mul(&a, &am));
                    let det = (mat2_det(&a) + Complex64::new(1.0, 0.0)).norm();
                    let span = span_residual(&fp, SpanConstant::PlusTwo)
                        .map_err(CliError::domain)?;
                    let bracket = (bracket_coefficient((&q1, &q2), z)
                        .map_err(CliError::domain)?
                        - four_i * z)
                        .norm();
                    let res = inv.max(det).max(span).max(bracket);
                    rows.push_str(&format!("{x},{y},{inv},{det},{span},{bracket},{res}\n"));
                    residuals.push(res);
                }
            }
            write_file(&outdir.join(format!("{name}_residuals.csv")), &rows)?;
            emit_summary(name, cfg, &residuals, cfg.tolerances.twistor, outdir)
        }
        CheckKind::GPde => {
            let ev = target.requires_seed("verify g-pde")?;
            let xs = cfg.grid.xs();
            let ys = cfg.grid.ys();
            let points: Result<Vec<(f64, f64, Complex64, Complex64, f64)>, CliError> = ys
                .par_iter()
                .flat_map(|&y| xs.par_iter().map(move |&x| (x, y)))
                .map(|(x, y)| {
                    let p = JoycePoint::new(x, y).map_err(CliError::domain)?;
                    let (r, s) = joyce_to_twistor(&p).map_err(CliError::domain)?;
                    let res = ev
                        .einstein_pde_residual(r, s, standard_q())
                        .map_err(CliError::domain)?;
                    Ok((x, y, r, s, res))
                })
                .collect();
            let points = points?;
            let mut rows = String::from("x,y,re_r,im_r,re_s,im_s,residual\n");
            let mut residuals = Vec::new();
            for (x, y, r, s, res) in points {
                rows.push_str(&format!("{x},{y},{},{},{},{},{res}\n", r.re, r.im, s.re, s.im));
                residuals.push(res);
            }
            write_file(&outdir.join(format!("{name}_residuals.csv")), &rows)?;
            emit_summary(name, cfg, &residuals, cfg.tolerances.pde, outdir)
        }
        CheckKind::Cp | CheckKind::Joyce | CheckKind::Asd => {
            let points = evaluate_grid_rows(&target, &cfg.grid.xs(), &cfg.grid.ys(), cfg.mode)?;
            let mut rows = String::from("x,y,residual\n");
            let mut residuals = Vec::new();
            for pt in &points {
                let res = match check {
                    CheckKind::Cp => pt.cp_residual,
                    CheckKind::Joyce => pt.joyce_residual,
                    CheckKind::Asd => {
                        let mj = pt.metric().map_err(CliError::domain)?;
                        curvature_report(&mj, Orientation::Standard)
                            .map_err(CliError::domain)?
                            .asd_residual
                    }
                    _ => unreachable!(),
                };
                rows.push_str(&format!("{},{},{res}\n", pt.x, pt.y));
                residuals.push(res);
            }
            let tol = match check {
                CheckKind::Cp => cfg.tolerances.cp,
                CheckKind::Joyce => cfg.tolerances.joyce,
                _ => cfg.tolerances.asd,
            };
            write_file(&outdir.join(format!("{name}_residuals.csv")), &rows)?;
            emit_summary(name, cfg, &residuals, tol, outdir)
        }
        CheckKind::Einstein => {
            let metric_at = metric_closure(&target);
            let xs = cfg.grid.xs();
            let ys = cfg.grid.ys();
            let grid: Vec<(f64, f64)> = ys
                .iter()
                .flat_map(|&y| xs.iter().map(move |&x| (x, y)))
                .collect();
            let certs: Result<Vec<(f64, f64, f64, ScalarSign)>, CliError> = grid
                .par_iter()
                .map(|&(x, y)| {
                    let cert = einstein_certificate(&metric_at, x, y, CERT_PROBE_STEP)
                        .map_err(CliError::domain)?;
                    Ok((x, y, cert.residual, cert.scalar_sign))
                })
                .collect();
            let certs = certs?;
            let mut rows = String::from("x,y,residual,scalar_sign\n");
            let mut residuals = Vec::new();
            for (x, y, res, sign) in certs {
                rows.push_str(&format!("{x},{y},{res},{}\n", sign_name(sign)));
                residuals.push(res);
            }
            write_file(&outdir.join(format!("{name}_residuals.csv")), &rows)?;
            emit_summary(name, cfg, &residuals, cfg.tolerances.gauge, outdir)
        }
    }
}

fn sign_name(sign: ScalarSign) -> &'static str {
    match sign {
        ScalarSign::Positive => "positive",
        ScalarSign::Negative => "negative",
        ScalarSign::Zero => "zero",
    }
}

fn metric_header(mode: Mode) -> String {
    let labels = [
        "g_xx", "g_xy", "g_xu1", "g_xu2", "g_yy", "g_yu1", "g_yu2", "g_u1u1", "g_u1u2", "g_u2u2",
    ];
    let mut header = String::from("x,y");
    for label in labels {
        match mode {
            Mode::Real => header.push_str(&format!(",{label}")),
            Mode::Complexified => header.push_str(&format!(",re_{label},im_{label}")),
        }
    }
    header.push_str(",joyce,ash,cp\n");
    header
}

fn metric_row(pt: &PointData, mj: &MetricJet, mode: Mode) -> String {
    let mut row = format!("{},{}", pt.x, pt.y);
    for i in 0..4 {
        for j in i..4 {
            let v = mj.g[i][j];
            match mode {
                Mode::Real => row.push_str(&format!(",{}", v.re)),
                Mode::Complexified => row.push_str(&format!(",{},{}", v.re, v.im)),
            }
        }
    }
    row.push_str(&format!(
        ",{},{},{}\n",
        pt.joyce_residual, pt.ash_residual, pt.cp_residual
    ));
    row
}

fn curvature_row(pt: &PointData, rep: &CurvatureReport, gauge: f64, sign: ScalarSign) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}\n",
        pt.x,
        pt.y,
        rep.scalar.re,
        rep.ricci0_norm,
        rep.wplus_norm,
        rep.wminus_norm,
        rep.asd_residual,
        gauge,
        sign_name(sign)
    )
}

pub fn metric_grid(
    target_spec: &str,
    cfg: &RunConfig,
    outdir: &Path,
) -> Result<ExitCode, CliError> {
    let target = Target::parse(target_spec, cfg)?;
    let points = evaluate_grid_rows(&target, &cfg.grid.xs(), &cfg.grid.ys(), cfg.mode)?;
    let metric_at = metric_closure(&target);

    let computed: Result<Vec<(MetricJet, CurvatureReport, f64, ScalarSign)>, CliError> = points
        .par_iter()
        .map(|pt| {
            let mj = pt.metric().map_err(CliError::domain)?;
            let rep = curvature_report(&mj, Orientation::Standard).map_err(CliError::domain)?;
            let cert = einstein_certificate(&metric_at, pt.x, pt.y, CERT_PROBE_STEP)
                .map_err(CliError::domain)?;
            Ok((mj, rep, cert.residual, cert.scalar_sign))
        })
        .collect();
    let computed = computed?;

    let mut metric_csv = metric_header(cfg.mode);
    let mut curvature_csv = String::from(
        "x,y,scalar,ricci0_norm,wplus,wminus,asd_residual,gauge_residual,scalar_sign\n",
    );
    let mut worst_asd = 0.0f64;
    let mut worst_gauge = 0.0f64;
    for (pt, (mj, rep, gauge, sign)) in points.iter().zip(&computed) {
        metric_csv.push_str(&metric_row(pt, mj, cfg.mode));
        curvature_csv.push_str(&curvature_row(pt, rep, *gauge, *sign));
        worst_asd = worst_asd.max(rep.asd_residual);
        worst_gauge = worst_gauge.max(*gauge);
    }
    write_file(&outdir.join("metric.csv"), &metric_csv)?;
    write_file(&outdir.join("curvature.csv"), &curvature_csv)?;
    let summary = serde_json::json!({
        "check": "metric-grid",
        "target": cfg.target,
        "mode": cfg.mode,
        "points": points.len(),
        "max_asd_residual": worst_asd,
        "max_gauge_residual": worst_gauge,
        "tolerance": { "asd": cfg.tolerances.asd, "gauge": cfg.tolerances.gauge },
        "config_hash": cfg.hash(),
    });
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_file(&outdir.join("metric_summary.json"), &text)?;
    println!("{text}");
    Ok(ExitCode::SUCCESS)
}

pub fn transform(
    x: Option<f64>,
    y: Option<f64>,
    r: Option<Complex64>,
    s: Option<Complex64>,
) -> Result<ExitCode, CliError> {
    let payload = match (x, y, r, s) {
        (Some(x), Some(y), None, None) => {
            let p = JoycePoint::new(x, y).map_err(CliError::domain)?;
            let (r, s) = joyce_to_twistor(&p).map_err(CliError::domain)?;
            serde_json::json!({
                "x": x, "y": y,
                "zeta": [p.zeta().re, p.zeta().im],
                "xi": [p.xi().re, p.xi().im],
                "r": [r.re, r.im],
                "s": [s.re, s.im],
            })
        }
        (None, None, Some(r), Some(s)) => {
            let img = twistor_to_joyce(r, s).map_err(CliError::domain)?;
            serde_json::json!({
                "r": [r.re, r.im],
                "s": [s.re, s.im],
                "zeta": [img.zeta.re, img.zeta.im],
                "xi": [img.xi.re, img.xi.im],
                "on_real_slice": img.joyce.is_some(),
                "x": img.joyce.map(|p| p.x()),
                "y": img.joyce.map(|p| p.y()),
            })
        }
        _ => {
            return Err(CliError::input(
                "transform",
                "pass either --x and --y, or --r and --s",
            ))
        }
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&payload).expect("payload serializes")
    );
    Ok(ExitCode::SUCCESS)
}

pub fn seeds_list() -> Result<ExitCode, CliError> {
    println!("builtin fields (axially symmetric solutions):");
    for field in catalogue_fields() {
        let formula = match field.name() {
            "x" => "x",
            "log_y" => "log y",
            "x2_minus_half_y2" => "x^2 - y^2/2",
            "inv_norm" => "(x^2 + y^2)^(-1/2)",
            other => other,
        };
        println!("  {:>18}  {formula}", field.name());
    }
    println!("builtin pairs (use as builtin:<f1>,<f2>):");
    for pair in catalogue() {
        println!("  builtin:{}", pair.name());
    }
    Ok(ExitCode::SUCCESS)
}

pub fn plotdata(
    target_spec: &str,
    quantity: &str,
    cfg: &RunConfig,
    outdir: &Path,
) -> Result<ExitCode, CliError> {
    let target = Target::parse(target_spec, cfg)?;
    let points = evaluate_grid_rows(&target, &cfg.grid.xs(), &cfg.grid.ys(), cfg.mode)?;
    let needs_curvature = matches!(
        quantity,
        "scalar" | "ricci0_norm" | "wplus" | "wminus" | "asd_residual"
    );
    let needs_gauge = quantity == "gauge_residual";
    let metric_at = metric_closure(&target);

    let values: Result<Vec<f64>, CliError> = points
        .par_iter()
        .map(|pt| {
            Ok(match quantity {
                "joyce" => pt.joyce_residual,
                "ash" => pt.ash_residual,
                "cp" => pt.cp_residual,
                "det" => pt.pq.det.norm(),
                _ if needs_curvature => {
                    let mj = pt.metric().map_err(CliError::domain)?;
                    let rep =
                        curvature_report(&mj, Orientation::Standard).map_err(CliError::domain)?;
                    match quantity {
                        "scalar" => rep.scalar.re,
                        "ricci0_norm" => rep.ricci0_norm,
                        "wplus" => rep.wplus_norm,
                        "wminus" => rep.wminus_norm,
                        _ => rep.asd_residual,
                    }
                }
                _ if needs_gauge => {
                    einstein_certificate(&metric_at, pt.x, pt.y, CERT_PROBE_STEP)
                        .map_err(CliError::domain)?
                        .residual
                }
                _ => {
                    return Err(CliError::input(
                        "quantity",
                        format!(
                            "unknown quantity `{quantity}`; use joyce|ash|cp|det|scalar|\
                             ricci0_norm|wplus|wminus|asd_residual|gauge_residual"
                        ),
                    ))
                }
            })
        })
        .collect();
    let values = values?;

    let mut csv = String::from("x,y,value\n");
    for (pt, v) in points.iter().zip(&values) {
        csv.push_str(&format!("{},{},{v}\n", pt.x, pt.y));
    }
    let path = outdir.join(format!("plotdata_{quantity}.csv"));
    write_file(&path, &csv)?;
    println!("wrote {} rows to {}", values.len(), path.display());
    Ok(ExitCode::SUCCESS)
}
