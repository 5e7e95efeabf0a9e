//! Axially symmetric harmonic seeds, the Joyce equations, and assembly of
//! the toric block metric with its derivative jets.
//!
//! A harmonic pair F = (F₁, F₂) solves F_xx + F_yy + F_y/y = 0 on the upper
//! half-plane. P = −y·F_x and Q = y·F_y then satisfy the first-order system
//! P_x = Q_y, P_y + Q_x = P/y, and the block metric built from them is
//! anti-self-dual. Builtin entries are closed forms; pipeline entries come
//! from the contour transform of a seed pair and carry residual
//! certificates instead of identities.

use crate::contour::{ContourError, GEvaluator};
use crate::coords::{
    f_jet_from_g, joyce_to_twistor, pq_from_field_jets, CoordsError, JoycePoint, PqJet,
};
use crate::jets::{Jet2, Jet3};
use num_complex::Complex64;
use thiserror::Error;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Error)]
pub enum JoyceError {
    #[error("P, Q pairing is degenerate: |P1*Q2 - Q1*P2| = {det_abs}")]
    Degenerate { det_abs: f64 },
    #[error(transparent)]
    Contour(#[from] ContourError),
    #[error(transparent)]
    Coords(#[from] CoordsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Builtin,
    Pipeline,
}

/// An evaluable pair F = (F₁, F₂) with partial derivatives through order
/// three at any upper half-plane point.
pub trait HarmonicPair {
    fn jet3(&self, p: JoycePoint) -> Result<[Jet3; 2], JoyceError>;
    fn provenance(&self) -> Provenance;
}

/// Closed-form scalar fields with hand-coded derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinField {
    /// x
    X,
    /// −x
    NegX,
    /// log y
    LogY,
    /// x² − y²/2
    XxMinusHalfYy,
    /// (x² + y²)^{−1/2}
    InvNorm,
    /// y — deliberately not a solution; kept for residual tests.
    Y,
}

impl BuiltinField {
    pub fn name(&self) -> &'static str {
        match self {
            BuiltinField::X => "x",
            BuiltinField::NegX => "-x",
            BuiltinField::LogY => "log_y",
            BuiltinField::XxMinusHalfYy => "x2_minus_half_y2",
            BuiltinField::InvNorm => "inv_norm",
            BuiltinField::Y => "y",
        }
    }

    pub fn from_name(name: &str) -> Option<BuiltinField> {
        Some(match name {
            "x" => BuiltinField::X,
            "-x" => BuiltinField::NegX,
            "log_y" => BuiltinField::LogY,
            "x2_minus_half_y2" => BuiltinField::XxMinusHalfYy,
            "inv_norm" => BuiltinField::InvNorm,
            "y" => BuiltinField::Y,
            _ => return None,
        })
    }

    pub fn jet3(&self, x: f64, y: f64) -> Jet3 {
        match self {
            BuiltinField::X => Jet3 {
                f: c(x),
                fx: c(1.0),
                ..Jet3::default()
            },
            BuiltinField::NegX => Jet3 {
                f: c(-x),
                fx: c(-1.0),
                ..Jet3::default()
            },
            BuiltinField::LogY => Jet3 {
                f: c(y.ln()),
                fy: c(1.0 / y),
                fyy: c(-1.0 / (y * y)),
                fyyy: c(2.0 / (y * y * y)),
                ..Jet3::default()
            },
            BuiltinField::XxMinusHalfYy => Jet3 {
                f: c(x * x - 0.5 * y * y),
                fx: c(2.0 * x),
                fy: c(-y),
                fxx: c(2.0),
                fyy: c(-1.0),
                ..Jet3::default()
            },
            BuiltinField::InvNorm => {
                let rho = 1.0 / (x * x + y * y).sqrt();
                let r3 = rho * rho * rho;
                let r5 = r3 * rho * rho;
                let r7 = r5 * rho * rho;
                Jet3 {
                    f: c(rho),
                    fx: c(-x * r3),
                    fy: c(-y * r3),
                    fxx: c(-r3 + 3.0 * x * x * r5),
                    fxy: c(3.0 * x * y * r5),
                    fyy: c(-r3 + 3.0 * y * y * r5),
                    fxxx: c(9.0 * x * r5 - 15.0 * x * x * x * r7),
                    fxxy: c(3.0 * y * r5 - 15.0 * x * x * y * r7),
                    fxyy: c(3.0 * x * r5 - 15.0 * x * y * y * r7),
                    fyyy: c(9.0 * y * r5 - 15.0 * y * y * y * r7),
                }
            }
            BuiltinField::Y => Jet3 {
                f: c(y),
                fy: c(1.0),
                ..Jet3::default()
            },
        }
    }
}

/// A pair of builtin fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuiltinPair(pub BuiltinField, pub BuiltinField);

impl BuiltinPair {
    pub fn name(&self) -> String {
        format!("{},{}", self.0.name(), self.1.name())
    }

    pub fn from_name(name: &str) -> Option<BuiltinPair> {
        let (a, b) = name.split_once(',')?;
        Some(BuiltinPair(
            BuiltinField::from_name(a.trim())?,
            BuiltinField::from_name(b.trim())?,
        ))
    }
}

impl HarmonicPair for BuiltinPair {
    fn jet3(&self, p: JoycePoint) -> Result<[Jet3; 2], JoyceError> {
        Ok([self.0.jet3(p.x(), p.y()), self.1.jet3(p.x(), p.y())])
    }

    fn provenance(&self) -> Provenance {
        Provenance::Builtin
    }
}

/// The harmonic catalogue fields.
pub fn catalogue_fields() -> [BuiltinField; 4] {
    [
        BuiltinField::X,
        BuiltinField::LogY,
        BuiltinField::XxMinusHalfYy,
        BuiltinField::InvNorm,
    ]
}

/// Catalogue pairings, chosen so the P, Q pairing stays nondegenerate on the
/// upper half-plane test windows (several other combinations of the same
/// fields degenerate along the y-axis).
pub fn catalogue() -> Vec<BuiltinPair> {
    vec![
        BuiltinPair(BuiltinField::NegX, BuiltinField::LogY),
        BuiltinPair(BuiltinField::LogY, BuiltinField::X),
        BuiltinPair(BuiltinField::X, BuiltinField::XxMinusHalfYy),
        BuiltinPair(BuiltinField::InvNorm, BuiltinField::X),
    ]
}

/// Seed-driven pair obtained through the contour transform.
pub struct PipelinePair {
    evaluator: GEvaluator,
}

impl PipelinePair {
    pub fn new(evaluator: GEvaluator) -> PipelinePair {
        PipelinePair { evaluator }
    }

    pub fn evaluator(&self) -> &GEvaluator {
        &self.evaluator
    }

    /// Field jets together with the square-root branch used, for callers
    /// that continue the branch along grid rows.
    pub fn jet3_hinted(
        &self,
        p: JoycePoint,
        branch_hint: Option<Complex64>,
    ) -> Result<([Jet3; 2], Complex64), JoyceError> {
        let (r, s) = joyce_to_twistor(&p)?;
        let gj = self.evaluator.eval_g_jet(r, s, 3)?;
        let fj = f_jet_from_g(&gj, p.zeta(), p.xi(), branch_hint)?;
        Ok(([fj.xy_jet3(0), fj.xy_jet3(1)], fj.lambda))
    }
}

impl HarmonicPair for PipelinePair {
    fn jet3(&self, p: JoycePoint) -> Result<[Jet3; 2], JoyceError> {
        Ok(self.jet3_hinted(p, None)?.0)
    }

    fn provenance(&self) -> Provenance {
        Provenance::Pipeline
    }
}

/// Max over components of |F_xx + F_yy + F_y/y|.
pub fn ash_residual(pair: &dyn HarmonicPair, p: JoycePoint) -> Result<f64, JoyceError> {
    let jets = pair.jet3(p)?;
    Ok(ash_residual_of_jets(&jets, p))
}

pub fn ash_residual_of_jets(jets: &[Jet3; 2], p: JoycePoint) -> f64 {
    jets.iter()
        .map(|j| (j.fxx + j.fyy + j.fy / c(p.y())).norm())
        .fold(0.0, f64::max)
}

/// Max absolute residual of the four scalar equations P_x = Q_y and
/// P_y + Q_x = P/y.
pub fn joyce_residual(pq: &PqJet) -> f64 {
    let y = c(pq.point.y());
    let mut worst = 0.0f64;
    for i in 0..2 {
        worst = worst.max((pq.p[i].d1 - pq.q[i].d2).norm());
        worst = worst.max((pq.p[i].d2 + pq.q[i].d1 - pq.p[i].v / y).norm());
    }
    worst
}

/// P, Q data for a harmonic pair at a point.
pub fn pq_jet_of_pair(pair: &dyn HarmonicPair, p: JoycePoint) -> Result<PqJet, JoyceError> {
    let jets = pair.jet3(p)?;
    Ok(pq_from_field_jets(&jets, p))
}

/// The toric block metric with first and second (x, y)-derivatives in the
/// coordinate frame (∂x, ∂y, ∂u₁, ∂u₂).
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub point: JoycePoint,
    pub g: [[Complex64; 4]; 4],
    /// dg[a] = ∂g/∂x for a = 0, ∂g/∂y for a = 1.
    pub dg: [[[Complex64; 4]; 4]; 2],
    /// d2g[0] = ∂²g/∂x², d2g[1] = ∂²g/∂x∂y, d2g[2] = ∂²g/∂y².
    pub d2g: [[[Complex64; 4]; 4]; 3],
}

impl MetricJet {
    /// Flat metric, all derivatives zero. Useful as a curvature oracle.
    pub fn flat(point: JoycePoint) -> MetricJet {
        let mut g = [[Complex64::default(); 4]; 4];
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = c(1.0);
        }
        MetricJet {
            point,
            g,
            dg: [[[Complex64::default(); 4]; 4]; 2],
            d2g: [[[Complex64::default(); 4]; 4]; 3],
        }
    }

    /// Constant-curvature metric y^{−2}·identity on the upper half-space.
    pub fn hyperbolic(point: JoycePoint) -> MetricJet {
        let y = point.y();
        let mut jet = MetricJet::flat(point);
        for i in 0..4 {
            jet.g[i][i] = c(y.powi(-2));
            jet.dg[1][i][i] = c(-2.0 * y.powi(-3));
            jet.d2g[2][i][i] = c(6.0 * y.powi(-4));
        }
        jet
    }

    /// Largest imaginary part across the metric and its derivatives.
    pub fn imaginary_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max(self.g[i][j].im.abs());
                for a in 0..2 {
                    worst = worst.max(self.dg[a][i][j].im.abs());
                }
                for a in 0..3 {
                    worst = worst.max(self.d2g[a][i][j].im.abs());
                }
            }
        }
        worst
    }

    /// Drops imaginary parts; callers must first check `imaginary_residual`.
    pub fn realified(&self) -> MetricJet {
        let mut out = self.clone();
        let re = |z: &mut Complex64| *z = c(z.re);
        for i in 0..4 {
            for j in 0..4 {
                re(&mut out.g[i][j]);
                for a in 0..2 {
                    re(&mut out.dg[a][i][j]);
                }
                for a in 0..3 {
                    re(&mut out.d2g[a][i][j]);
                }
            }
        }
        out
    }

    /// Deliberately breaks one fiber entry: scales its value by (1 + rel)
    /// and drops its derivative data, leaving a jet that is not the 2-jet of
    /// any metric in the torus-rescaling class. Used by perturbation tests.
    pub fn perturb_fiber_entry(&self, i: usize, j: usize, rel: f64) -> MetricJet {
        assert!(i >= 2 && j >= 2);
        let mut out = self.clone();
        let scaled = out.g[i][j] * c(1.0 + rel);
        for (a, b) in [(i, j), (j, i)] {
            out.g[a][b] = scaled;
            for slot in 0..2 {
                out.dg[slot][a][b] = Complex64::default();
            }
            for slot in 0..3 {
                out.d2g[slot][a][b] = Complex64::default();
            }
        }
        out
    }
}

/// Assembles the block metric (dx² + dy²)/y² + fiber(P, Q) and its first and
/// second derivatives from a P, Q jet. Complex data is accepted as-is; the
/// bilinear formulas are the same in real and complexified mode.
pub fn assemble_metric(pq: &PqJet) -> Result<MetricJet, JoyceError> {
    if pq.degenerate {
        return Err(JoyceError::Degenerate {
            det_abs: pq.det.norm(),
        });
    }
    let y = pq.point.y();
    // Base block 1/y² with explicit y-derivatives.
    let base = Jet2 {
        v: c(y.powi(-2)),
        d2: c(-2.0 * y.powi(-3)),
        d22: c(6.0 * y.powi(-4)),
        ..Jet2::ZERO
    };
    let det = pq.p[0] * pq.q[1] - pq.q[0] * pq.p[1];
    let det2 = det * det;
    // Fiber entries (P₂²+Q₂²)/det², −(P₁P₂+Q₁Q₂)/det², (P₁²+Q₁²)/det².
    let g22 = (pq.p[1] * pq.p[1] + pq.q[1] * pq.q[1]) / det2;
    let g23 = -(pq.p[0] * pq.p[1] + pq.q[0] * pq.q[1]) / det2;
    let g33 = (pq.p[0] * pq.p[0] + pq.q[0] * pq.q[0]) / det2;

    let mut jet = MetricJet {
        point: pq.point,
        g: [[Complex64::default(); 4]; 4],
        dg: [[[Complex64::default(); 4]; 4]; 2],
        d2g: [[[Complex64::default(); 4]; 4]; 3],
    };
    let mut put = |i: usize, j: usize, e: Jet2| {
        jet.g[i][j] = e.v;
        jet.g[j][i] = e.v;
        for (slot, v) in [(0, e.d1), (1, e.d2)] {
            jet.dg[slot][i][j] = v;
            jet.dg[slot][j][i] = v;
        }
        for (slot, v) in [(0, e.d11), (1, e.d12), (2, e.d22)] {
            jet.d2g[slot][i][j] = v;
            jet.d2g[slot][j][i] = v;
        }
    };
    put(0, 0, base);
    put(1, 1, base);
    put(2, 2, g22);
    put(2, 3, g23);
    put(3, 3, g33);
    Ok(jet)
}
