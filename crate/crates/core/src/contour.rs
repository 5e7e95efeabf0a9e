//! Contour-integral evaluation of the twistor-coordinate potentials G₁, G₂
//! and their mixed (r, s)-partials.
//!
//! The integrand z·φ(z)/((z²−r)^{1/2}(z²−s)^{1/2}) lives on the double cover
//! branched over ±√r and ±√s. Between the finite cut through ±√r and the cut
//! through infinity beyond ±√s there is an annulus on which a fixed product
//! branch is single valued. The contour has one component around each cut,
//! realized here as two circles inside that annulus: the inner one lies in
//! the seed's disc of convergence and carries φ; the outer one lies in the
//! domain of the antipodally reflected seed conj(φ(−1/z̄)), which is the same
//! data seen from the chart at infinity, and enters with the opposite
//! orientation. Trapezoidal sums on circles of analyticity converge
//! geometrically, so node doubling is a sharp error estimate.

use crate::series::{ParitySeries, SeriesError};
use num_complex::Complex64;
use std::collections::BTreeMap;
use thiserror::Error;

pub const MIN_NODES: usize = 64;
const TAU: f64 = std::f64::consts::TAU;

/// (2m−1)!!/2^m for m = 0..3, the kernel coefficients of ∂^m_r (z²−r)^{−1/2}.
const HALF_FACTORIAL: [f64; 4] = [1.0, 0.5, 0.75, 1.875];

#[derive(Debug, Error)]
pub enum ContourError {
    #[error("branch cut violated: need |r| < |z|^2 < |s| with margins (|r|={abs_r}, |z|={abs_z}, |s|={abs_s})")]
    CutViolation {
        abs_r: f64,
        abs_z: f64,
        abs_s: f64,
    },
    #[error("no admissible contour radius in ({lo}, {hi}) for this (r, s) and seed radius")]
    NoAdmissibleContour { lo: f64, hi: f64 },
    #[error("point is degenerate for the twistor transform: {reason}")]
    DegeneratePoint { reason: String },
    #[error("node doubling still changes the jet by {error} at the {nodes}-node budget")]
    NonConvergence { error: f64, nodes: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Quadrature evaluator for a fixed seed pair.
#[derive(Clone, Debug)]
pub struct GEvaluator {
    phi: (ParitySeries, ParitySeries),
    nodes: usize,
    rho: f64,
    safety: f64,
    node_tol: f64,
    max_nodes: usize,
}

/// Values and mixed (r, s)-partials of (G₁, G₂) at one point.
#[derive(Clone, Debug)]
pub struct GJet {
    pub r: Complex64,
    pub s: Complex64,
    pub max_order: usize,
    partials: BTreeMap<(u8, u8), (Complex64, Complex64)>,
    pub error_estimate: f64,
}

impl GJet {
    /// The (m, n) partial pair (∂^{m+n}G₁/∂r^m∂s^n, same for G₂).
    pub fn partial(&self, m: usize, n: usize) -> (Complex64, Complex64) {
        self.partials[&(m as u8, n as u8)]
    }

    pub fn partials(&self) -> &BTreeMap<(u8, u8), (Complex64, Complex64)> {
        &self.partials
    }

    /// A_i = ∂G_i/∂r.
    pub fn a(&self) -> (Complex64, Complex64) {
        self.partial(1, 0)
    }

    /// B_i = ∂G_i/∂s.
    pub fn b(&self) -> (Complex64, Complex64) {
        self.partial(0, 1)
    }
}

/// The factor (z²−r)^{1/2} realized as z·√(1 − r/z²), single valued off the
/// segment joining ±√r and asymptotic to z for large |z|.
pub fn branch_factor_r(z: Complex64, r: Complex64) -> Result<Complex64, ContourError> {
    if r.norm() >= z.norm_sqr() {
        return Err(ContourError::CutViolation {
            abs_r: r.norm(),
            abs_z: z.norm(),
            abs_s: f64::INFINITY,
        });
    }
    Ok(z * (Complex64::new(1.0, 0.0) - r / (z * z)).sqrt())
}

/// The factor (z²−s)^{1/2} realized as i·√s·√(1 − z²/s), single valued off
/// the cut through infinity beyond ±√s. The sign convention σ = i is fixed;
/// only sign-invariant products are exported as metric data.
pub fn branch_factor_s(z: Complex64, s: Complex64) -> Result<Complex64, ContourError> {
    if z.norm_sqr() >= s.norm() {
        return Err(ContourError::CutViolation {
            abs_r: 0.0,
            abs_z: z.norm(),
            abs_s: s.norm(),
        });
    }
    Ok(Complex64::new(0.0, 1.0) * s.sqrt() * (Complex64::new(1.0, 0.0) - z * z / s).sqrt())
}

/// The product (z²−r)^{1/2}(z²−s)^{1/2} on the annulus between the cuts.
pub fn branch_sqrt_pair(
    z: Complex64,
    r: Complex64,
    s: Complex64,
) -> Result<Complex64, ContourError> {
    if r.norm() >= z.norm_sqr() || z.norm_sqr() >= s.norm() {
        return Err(ContourError::CutViolation {
            abs_r: r.norm(),
            abs_z: z.norm(),
            abs_s: s.norm(),
        });
    }
    Ok(branch_factor_r(z, r)? * branch_factor_s(z, s)?)
}

/// The seed transported to the chart at infinity by the antipodal map:
/// φ̂(z) = conj(φ(−1/z̄)), a Laurent series converging for |z| > 1/radius.
pub fn reflected_eval(series: &ParitySeries, z: Complex64) -> Result<Complex64, SeriesError> {
    let w = -z.conj().inv();
    Ok(series.eval(w)?.value.conj())
}

impl GEvaluator {
    pub fn new(phi1: ParitySeries, phi2: ParitySeries) -> GEvaluator {
        GEvaluator {
            phi: (phi1, phi2),
            nodes: 4096,
            rho: 0.8,
            safety: 0.9,
            node_tol: 1e-9,
            max_nodes: 1 << 16,
        }
    }

    pub fn with_nodes(mut self, nodes: usize) -> GEvaluator {
        assert!(nodes >= MIN_NODES && nodes.is_power_of_two());
        self.nodes = nodes;
        self
    }

    pub fn with_rho(mut self, rho: f64) -> GEvaluator {
        assert!(rho > 0.0);
        self.rho = rho;
        self
    }

    pub fn with_safety(mut self, safety: f64) -> GEvaluator {
        assert!(safety > 0.0 && safety < 1.0);
        self.safety = safety;
        self
    }

    pub fn with_node_tol(mut self, tol: f64) -> GEvaluator {
        self.node_tol = tol;
        self
    }

    pub fn with_max_nodes(mut self, max_nodes: usize) -> GEvaluator {
        self.max_nodes = max_nodes;
        self
    }

    pub fn phi(&self) -> (&ParitySeries, &ParitySeries) {
        (&self.phi.0, &self.phi.1)
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    fn min_radius(&self) -> f64 {
        self.phi.0.radius().min(self.phi.1.radius())
    }

    /// Checks the admissibility margins and picks the outer contour radius.
    ///
    /// Inner circle: √|r| ≤ safety·rho and rho ≤ safety·min(radius, √|s|).
    /// Outer circle: inside the reflected seed's domain |z| > 1/radius and
    /// still below √|s|, placed at the geometric mean of its margin interval.
    pub fn admissibility(&self, r: Complex64, s: Complex64) -> Result<f64, ContourError> {
        let scale = 1.0 + r.norm() + s.norm();
        if r.norm() < 1e-12 * scale {
            return Err(ContourError::DegeneratePoint {
                reason: "r = 0 sits on the branch point".into(),
            });
        }
        if (r - s).norm() < 1e-10 * scale {
            return Err(ContourError::DegeneratePoint {
                reason: "r = s collapses the annulus".into(),
            });
        }
        if r.norm() >= 1.0 {
            return Err(ContourError::DegeneratePoint {
                reason: "|r| >= 1 is outside the coordinate regime".into(),
            });
        }
        let sr = r.norm().sqrt();
        let ss = s.norm().sqrt();
        let rad = self.min_radius();
        if sr > self.safety * self.rho || self.rho > self.safety * rad.min(ss) {
            return Err(ContourError::CutViolation {
                abs_r: r.norm(),
                abs_z: self.rho,
                abs_s: s.norm(),
            });
        }
        let lo = (sr / self.safety).max(1.0 / (self.safety * rad));
        let hi = self.safety * ss;
        if lo >= hi {
            return Err(ContourError::NoAdmissibleContour { lo, hi });
        }
        Ok((lo * hi).sqrt())
    }

    /// Evaluates the jet with the configured node count, doubling until the
    /// change drops below the node tolerance or the budget is exhausted.
    pub fn eval_g_jet(
        &self,
        r: Complex64,
        s: Complex64,
        max_order: usize,
    ) -> Result<GJet, ContourError> {
        let mut n = self.nodes;
        let mut prev = self.eval_g_jet_fixed(r, s, max_order, n)?;
        loop {
            let next = self.eval_g_jet_fixed(r, s, max_order, 2 * n)?;
            let err = jet_difference(&prev, &next);
            if err <= self.node_tol {
                return Ok(GJet {
                    error_estimate: err,
                    ..next
                });
            }
            if 2 * n >= self.max_nodes {
                return Err(ContourError::NonConvergence {
                    error: err,
                    nodes: 2 * n,
                });
            }
            n *= 2;
            prev = next;
        }
    }

    /// Single-resolution jet with no node-doubling estimate attached.
    pub fn eval_g_jet_fixed(
        &self,
        r: Complex64,
        s: Complex64,
        max_order: usize,
        nodes: usize,
    ) -> Result<GJet, ContourError> {
        assert!(max_order <= 3);
        let rho_out = self.admissibility(r, s)?;
        let mut partials = self.circle_sums(Piece::Inner, self.rho, nodes, r, s, max_order)?;
        let outer = self.circle_sums(Piece::Outer, rho_out, nodes, r, s, max_order)?;
        for (key, val) in partials.iter_mut() {
            let o = outer[key];
            val.0 -= o.0;
            val.1 -= o.1;
        }
        Ok(GJet {
            r,
            s,
            max_order,
            partials,
            error_estimate: 0.0,
        })
    }

    fn circle_sums(
        &self,
        piece: Piece,
        rho: f64,
        nodes: usize,
        r: Complex64,
        s: Complex64,
        max_order: usize,
    ) -> Result<BTreeMap<(u8, u8), (Complex64, Complex64)>, ContourError> {
        let mut sums: BTreeMap<(u8, u8), (Complex64, Complex64)> = BTreeMap::new();
        for m in 0..=max_order {
            for n in 0..=(max_order - m) {
                sums.insert((m as u8, n as u8), Default::default());
            }
        }
        for k in 0..nodes {
            let z = Complex64::from_polar(rho, TAU * k as f64 / nodes as f64);
            let (f1, f2) = match piece {
                Piece::Inner => (self.phi.0.eval(z)?.value, self.phi.1.eval(z)?.value),
                Piece::Outer => (
                    reflected_eval(&self.phi.0, z)?,
                    reflected_eval(&self.phi.1, z)?,
                ),
            };
            let fr_inv = branch_factor_r(z, r)?.inv();
            let fs_inv = branch_factor_s(z, s)?.inv();
            // Odd powers fr^{-(2m+1)}, fs^{-(2n+1)} share one branch choice.
            let mut fr_pow = [Complex64::default(); 4];
            let mut fs_pow = [Complex64::default(); 4];
            let fr2 = fr_inv * fr_inv;
            let fs2 = fs_inv * fs_inv;
            fr_pow[0] = fr_inv;
            fs_pow[0] = fs_inv;
            for j in 1..4 {
                fr_pow[j] = fr_pow[j - 1] * fr2;
                fs_pow[j] = fs_pow[j - 1] * fs2;
            }
            // Trapezoidal rule on the circle: ∮ f dz = (2πi/n) Σ f(z_k) z_k,
            // and the integrand already carries one factor of z.
            let w1 = z * z * f1;
            let w2 = z * z * f2;
            for (&(m, n), acc) in sums.iter_mut() {
                let kern = fr_pow[m as usize] * fs_pow[n as usize];
                acc.0 += w1 * kern;
                acc.1 += w2 * kern;
            }
        }
        // Prefactor −1/(4πi) combines with the 2πi/n trapezoid weight and the
        // kernel derivative coefficients.
        for (&(m, n), acc) in sums.iter_mut() {
            let c = -HALF_FACTORIAL[m as usize] * HALF_FACTORIAL[n as usize]
                / (2.0 * nodes as f64);
            acc.0 *= c;
            acc.1 *= c;
        }
        Ok(sums)
    }

    /// Residual of ∂²G/∂r∂s = (∂G/∂r − ∂G/∂s)/(2(r−s)), the kernel identity
    /// that certifies the quadrature; normalized by max(1, |lhs|) and taken
    /// over both components.
    pub fn g_consistency_residual(
        &self,
        r: Complex64,
        s: Complex64,
    ) -> Result<f64, ContourError> {
        let jet = self.eval_g_jet(r, s, 2)?;
        let (a1, a2) = jet.a();
        let (b1, b2) = jet.b();
        let (m1, m2) = jet.partial(1, 1);
        let den = 2.0 * (r - s);
        let mut worst = 0.0f64;
        for (lhs, rhs) in [(m1, (a1 - b1) / den), (m2, (a2 - b2) / den)] {
            worst = worst.max((lhs - rhs).norm() / lhs.norm().max(1.0));
        }
        Ok(worst)
    }

    /// |(ar+b)A₁ + (cr+d)A₂ + (as+b)B₁ + (cs+d)B₂| — zero exactly when the
    /// seed satisfies the matching constant-combination ODE.
    pub fn einstein_pde_residual(
        &self,
        r: Complex64,
        s: Complex64,
        q_coeffs: [Complex64; 4],
    ) -> Result<f64, ContourError> {
        let jet = self.eval_g_jet(r, s, 1)?;
        Ok(einstein_pde_residual_of_jet(&jet, q_coeffs))
    }
}

/// The PDE combination evaluated on an already computed jet.
pub fn einstein_pde_residual_of_jet(jet: &GJet, q_coeffs: [Complex64; 4]) -> f64 {
    let [a, b, c, d] = q_coeffs;
    let (a1, a2) = jet.a();
    let (b1, b2) = jet.b();
    ((a * jet.r + b) * a1 + (c * jet.r + d) * a2 + (a * jet.s + b) * b1 + (c * jet.s + d) * b2)
        .norm()
}

/// Standard coefficient quadruple (1, 1, i, −i), i.e. q₁ = z²+1, q₂ = i(z²−1).
pub fn standard_q() -> [Complex64; 4] {
    [
        Complex64::new(1.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
    ]
}

fn jet_difference(a: &GJet, b: &GJet) -> f64 {
    let mut worst = 0.0f64;
    for (key, va) in a.partials() {
        let vb = b.partials()[key];
        worst = worst.max((va.0 - vb.0).norm()).max((va.1 - vb.1).norm());
    }
    worst
}

#[derive(Clone, Copy)]
enum Piece {
    Inner,
    Outer,
}
