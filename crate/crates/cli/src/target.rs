//! Verification targets: a seed file driving the contour pipeline, or a
//! builtin harmonic pair named as `builtin:<f1>,<f2>`.

use crate::config::{Mode, RunConfig};
use crate::CliError;
use forge_core::contour::GEvaluator;
use forge_core::coords::{
    align_phase, cp_residual_of_jets, f_jet_from_g, joyce_to_twistor, pq_alignment_entries,
    pq_from_field_jets, JoycePoint, PqJet,
};
use forge_core::jets::{Jet2, Jet3};
use forge_core::joyce::{
    ash_residual_of_jets, assemble_metric, joyce_residual, BuiltinPair, JoyceError, MetricJet,
};
use forge_core::series::{solve_phi2, ParitySeries, SeedFile};
use num_complex::Complex64;
use std::path::Path;

pub enum Target {
    Seed {
        phi1: ParitySeries,
        phi2: ParitySeries,
        evaluator: GEvaluator,
    },
    Builtin(BuiltinPair),
}

impl Target {
    pub fn parse(spec: &str, cfg: &RunConfig) -> Result<Target, CliError> {
        if let Some(name) = spec.strip_prefix("builtin:") {
            let pair = BuiltinPair::from_name(name).ok_or_else(|| CliError::input(
                "unknown-builtin",
                format!("`{name}` is not a builtin pair; see `forge seeds list`"),
            ))?;
            return Ok(Target::Builtin(pair));
        }
        let (phi1, phi2) = load_seed_pair(spec, cfg.terms)?;
        let evaluator = GEvaluator::new(phi1.clone(), phi2.clone())
            .with_nodes(cfg.nodes)
            .with_rho(cfg.rho)
            .with_safety(cfg.safety);
        Ok(Target::Seed {
            phi1,
            phi2,
            evaluator,
        })
    }

    pub fn requires_seed(&self, what: &str) -> Result<&GEvaluator, CliError> {
        match self {
            Target::Seed { evaluator, .. } => Ok(evaluator),
            Target::Builtin(_) => Err(CliError::input(
                "seed-required",
                format!("`{what}` needs a seed file, not a builtin pair"),
            )),
        }
    }
}

pub fn load_seed_file(path: &str) -> Result<SeedFile, CliError> {
    let text = std::fs::read_to_string(Path::new(path))
        .map_err(|e| CliError::input("seed-io", format!("cannot read `{path}`: {e}")))?;
    SeedFile::from_json(&text)
        .map_err(|e| CliError::input("seed-schema", format!("cannot parse `{path}`: {e}")))
}

pub fn load_seed_pair(
    path: &str,
    terms: Option<usize>,
) -> Result<(ParitySeries, ParitySeries), CliError> {
    let file = load_seed_file(path)?;
    let phi1 = file.phi1.to_series();
    let n = terms.unwrap_or(file.truncation).max(1);
    let phi2 = solve_phi2(&phi1, n).map_err(CliError::domain)?;
    Ok((phi1, phi2))
}

/// Everything a grid command needs at one point.
pub struct PointData {
    pub x: f64,
    pub y: f64,
    pub pq: PqJet,
    pub joyce_residual: f64,
    pub ash_residual: f64,
    pub cp_residual: f64,
}

impl PointData {
    pub fn metric(&self) -> Result<MetricJet, JoyceError> {
        assemble_metric(&self.pq)
    }
}

/// Evaluates the field jets over the grid row by row. Rows run left to
/// right so the square-root branch can be continued along each row; the
/// rows themselves are independent.
pub fn evaluate_grid_rows(
    target: &Target,
    xs: &[f64],
    ys: &[f64],
    mode: Mode,
) -> Result<Vec<PointData>, CliError> {
    use rayon::prelude::*;
    let rows: Result<Vec<Vec<PointData>>, CliError> = ys
        .par_iter()
        .map(|&y| {
            let mut row = Vec::with_capacity(xs.len());
            let mut hint: Option<Complex64> = None;
            for &x in xs {
                let p = JoycePoint::new(x, y).map_err(CliError::domain)?;
                let jets: [Jet3; 2] = match target {
                    Target::Builtin(pair) => [pair.0.jet3(x, y), pair.1.jet3(x, y)],
                    Target::Seed { evaluator, .. } => {
                        let (r, s) = joyce_to_twistor(&p).map_err(CliError::domain)?;
                        let gj = evaluator.eval_g_jet(r, s, 3).map_err(CliError::domain)?;
                        let fj = f_jet_from_g(&gj, p.zeta(), p.xi(), hint)
                            .map_err(CliError::domain)?;
                        hint = Some(fj.lambda);
                        [fj.xy_jet3(0), fj.xy_jet3(1)]
                    }
                };
                let pq = pq_from_field_jets(&jets, p);
                row.push(PointData {
                    x,
                    y,
                    joyce_residual: joyce_residual(&pq),
                    ash_residual: ash_residual_of_jets(&jets, p),
                    cp_residual: cp_residual_of_jets(&jets, p),
                    pq,
                });
            }
            Ok(row)
        })
        .collect();
    let mut points: Vec<PointData> = rows?.into_iter().flatten().collect();

    if mode == Mode::Real {
        realify(&mut points)?;
    }
    Ok(points)
}

/// Reality threshold for extracting real P, Q data after alignment.
pub const REALITY_TOL: f64 = 1e-8;

// Aligns the global phase over all grid entries and keeps real parts.
// Failing data is reported, never silently projected.
fn realify(points: &mut [PointData]) -> Result<(), CliError> {
    let mut entries = Vec::new();
    for pt in points.iter() {
        entries.extend(pq_alignment_entries(&pt.pq));
    }
    let phase = align_phase(&entries);
    let scale = entries.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let worst = entries
        .iter()
        .map(|v| (phase * v).im.abs())
        .fold(0.0, f64::max);
    if worst > REALITY_TOL * scale.max(1.0) {
        return Err(CliError::input(
            "reality",
            format!(
                "imaginary residual {worst:.3e} after global phase alignment exceeds {REALITY_TOL:.0e}; \
                 run in complexified mode"
            ),
        ));
    }
    for pt in points.iter_mut() {
        let fix = |j: &mut Jet2| {
            for z in [&mut j.v, &mut j.d1, &mut j.d2, &mut j.d11, &mut j.d12, &mut j.d22] {
                *z = Complex64::new((phase * *z).re, 0.0);
            }
        };
        for i in 0..2 {
            fix(&mut pt.pq.p[i]);
            fix(&mut pt.pq.q[i]);
        }
        pt.pq.det = pt.pq.p[0].v * pt.pq.q[1].v - pt.pq.q[0].v * pt.pq.p[1].v;
    }
    Ok(())
}
