//! Parity-restricted truncated power series and the seed ODE machinery.
//!
//! An odd series stores the coefficients of z^(2k+1), an even series those of
//! z^(2k). Oddness of the seed components is therefore structural and cannot
//! be violated by arithmetic. Every evaluation reports a geometric tail
//! estimate so truncation error is never silent.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default tolerance for the |φ₁'(0) − 1| = 1 boundary detection.
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-9;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("evaluation point |z| = {abs_z} is outside the stored disc of radius {radius}")]
    OutsideDomain { abs_z: f64, radius: f64 },
    #[error("geometric tail ratio {ratio} is not below 1; stored radius overstates convergence")]
    DivergentTail { ratio: f64 },
    #[error("expected a series of parity {expected:?}")]
    ParityMismatch { expected: Parity },
}

/// Truncated power series with coefficients of a single parity.
#[derive(Clone, Debug, PartialEq)]
pub struct ParitySeries {
    parity: Parity,
    coeffs: Vec<Complex64>,
    radius: f64,
}

/// An evaluated series value together with its truncation-tail estimate.
#[derive(Clone, Copy, Debug)]
pub struct SeriesValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

impl ParitySeries {
    pub fn new(parity: Parity, coeffs: Vec<Complex64>, radius: f64) -> ParitySeries {
        assert!(radius > 0.0, "radius must be positive");
        assert!(!coeffs.is_empty(), "truncation order must be at least one");
        ParitySeries {
            parity,
            coeffs,
            radius,
        }
    }

    pub fn odd(coeffs: Vec<Complex64>, radius: f64) -> ParitySeries {
        ParitySeries::new(Parity::Odd, coeffs, radius)
    }

    pub fn even(coeffs: Vec<Complex64>, radius: f64) -> ParitySeries {
        ParitySeries::new(Parity::Even, coeffs, radius)
    }

    /// Odd series with real coefficient list, a convenience for tests and
    /// seed construction.
    pub fn odd_real(coeffs: &[f64], radius: f64) -> ParitySeries {
        ParitySeries::odd(
            coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
            radius,
        )
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Number of stored coefficients.
    pub fn truncation(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of the k-th stored monomial; zero beyond the truncation.
    pub fn coefficient(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Exponent of the k-th stored monomial.
    pub fn exponent(&self, k: usize) -> u32 {
        match self.parity {
            Parity::Odd => 2 * k as u32 + 1,
            Parity::Even => 2 * k as u32,
        }
    }

    /// Evaluates the truncated sum and bounds the dropped tail by a geometric
    /// estimate anchored at the last stored term.
    pub fn eval(&self, z: Complex64) -> Result<SeriesValue, SeriesError> {
        let abs_z = z.norm();
        if abs_z >= self.radius {
            return Err(SeriesError::OutsideDomain {
                abs_z,
                radius: self.radius,
            });
        }
        let w = z * z;
        let mut acc = Complex64::default();
        for ck in self.coeffs.iter().rev() {
            acc = acc * w + ck;
        }
        let value = match self.parity {
            Parity::Odd => z * acc,
            Parity::Even => acc,
        };

        // Stored trailing zeros declare an exact polynomial: no tail.
        let tail_bound = match self.coeffs.iter().rposition(|c| c.norm() > 0.0) {
            None => 0.0,
            Some(k) if k + 1 < self.coeffs.len() => 0.0,
            Some(k) => {
                let ratio = self.tail_ratio(abs_z);
                if ratio >= 1.0 {
                    return Err(SeriesError::DivergentTail { ratio });
                }
                let t_last = self.coeffs[k].norm() * abs_z.powi(self.exponent(k) as i32);
                t_last * ratio / (1.0 - ratio)
            }
        };
        Ok(SeriesValue { value, tail_bound })
    }

    // Per-term geometric ratio in |z|², from the declared radius, sharpened
    // by the settled trailing coefficient ratios once enough terms are
    // stored for asymptotics to be meaningful.
    fn tail_ratio(&self, abs_z: f64) -> f64 {
        let z2 = abs_z * abs_z;
        let base = z2 / (self.radius * self.radius);
        if self.coeffs.len() < 8 {
            return base;
        }
        let mut trailing: Option<f64> = None;
        let mut pairs = 0;
        for k in (1..self.coeffs.len()).rev() {
            let prev = self.coeffs[k - 1].norm();
            let cur = self.coeffs[k].norm();
            if prev > 0.0 && cur > 0.0 {
                let r = cur / prev;
                trailing = Some(trailing.map_or(r, |b: f64| b.min(r)));
                pairs += 1;
                if pairs == 4 {
                    break;
                }
            }
        }
        match trailing {
            Some(r) => base.max(z2 * r),
            None => base,
        }
    }

    /// Termwise derivative. The parity flips; the radius is preserved.
    pub fn derivative(&self) -> ParitySeries {
        match self.parity {
            Parity::Odd => {
                // d/dz sum c_k z^(2k+1) = sum (2k+1) c_k z^(2k)
                let coeffs = self
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * Complex64::new((2 * k + 1) as f64, 0.0))
                    .collect();
                ParitySeries::even(coeffs, self.radius)
            }
            Parity::Even => {
                // d/dz sum c_k z^(2k) = sum 2(j+1) c_{j+1} z^(2j+1)
                let mut coeffs: Vec<Complex64> = (1..self.coeffs.len())
                    .map(|k| self.coeffs[k] * Complex64::new((2 * k) as f64, 0.0))
                    .collect();
                if coeffs.is_empty() {
                    coeffs.push(Complex64::default());
                }
                ParitySeries::odd(coeffs, self.radius)
            }
        }
    }

    pub fn scaled(&self, k: Complex64) -> ParitySeries {
        ParitySeries {
            parity: self.parity,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
            radius: self.radius,
        }
    }

    /// Truncated Cauchy product. Like parities multiply to an even series,
    /// mixed parities to an odd one; the result keeps the smaller truncation
    /// and radius of the operands.
    pub fn mul(&self, other: &ParitySeries) -> ParitySeries {
        let n = self.coeffs.len().min(other.coeffs.len());
        let radius = self.radius.min(other.radius);
        let (parity, offset) = match (self.parity, other.parity) {
            (Parity::Odd, Parity::Odd) => (Parity::Even, 1),
            (Parity::Even, Parity::Even) => (Parity::Even, 0),
            _ => (Parity::Odd, 0),
        };
        let mut coeffs = vec![Complex64::default(); n];
        for (k, out) in coeffs.iter_mut().enumerate() {
            if k < offset {
                continue;
            }
            let target = k - offset;
            for i in 0..=target {
                let j = target - i;
                if i < self.coeffs.len() && j < other.coeffs.len() {
                    *out += self.coeffs[i] * other.coeffs[j];
                }
            }
        }
        ParitySeries::new(parity, coeffs, radius)
    }
}

/// Solves (z²+1)φ₁' + i(z²−1)φ₂' = 2 for the unique odd φ₂ with φ₂(0) = 0.
///
/// With φ₁ = Σ a_k z^(2k+1) the even-degree coefficients of the equation give
/// w₀ = 2 − a₀ and w_j = −[(2j+1)a_j + (2j−1)a_{j−1}]; then the coefficient
/// of z^(2j) in φ₂' is i·Σ_{l≤j} w_l.
pub fn solve_phi2(phi1: &ParitySeries, n_terms: usize) -> Result<ParitySeries, SeriesError> {
    solve_ode_constant(phi1, Complex64::new(2.0, 0.0), n_terms)
}

/// The same linear recursion with the right-hand constant free. The factor
/// 1/(z²−1) in the inversion limits convergence to the unit disc, so the
/// returned radius is min(radius(φ₁), 1).
pub fn solve_ode_constant(
    phi1: &ParitySeries,
    constant: Complex64,
    n_terms: usize,
) -> Result<ParitySeries, SeriesError> {
    if phi1.parity() != Parity::Odd {
        return Err(SeriesError::ParityMismatch {
            expected: Parity::Odd,
        });
    }
    assert!(n_terms >= 1);
    let a = |j: usize| phi1.coefficient(j);
    let mut coeffs = Vec::with_capacity(n_terms);
    let mut partial = constant - a(0); // running sum of the w_l
    coeffs.push(I * partial);
    for j in 1..n_terms {
        let w = -(Complex64::new((2 * j + 1) as f64, 0.0) * a(j)
            + Complex64::new((2 * j - 1) as f64, 0.0) * a(j - 1));
        partial += w;
        coeffs.push(I * partial / Complex64::new((2 * j + 1) as f64, 0.0));
    }
    Ok(ParitySeries::odd(coeffs, phi1.radius().min(1.0)))
}

/// Maximum of |(z²+1)φ₁'(z) + i(z²−1)φ₂'(z) − 2| over the sample points.
pub fn ode_residual(
    phi1: &ParitySeries,
    phi2: &ParitySeries,
    samples: &[Complex64],
) -> Result<f64, SeriesError> {
    let d1 = phi1.derivative();
    let d2 = phi2.derivative();
    let mut worst = 0.0f64;
    for &z in samples {
        let z2 = z * z;
        let f = (z2 + 1.0) * d1.eval(z)?.value + I * (z2 - 1.0) * d2.eval(z)?.value;
        worst = worst.max((f - 2.0).norm());
    }
    Ok(worst)
}

/// Evaluates f(z) = (az²+b)φ₁'(z) + (cz²+d)φ₂'(z) over the samples and
/// reports its mean and the maximum deviation from that mean.
pub fn combination_constancy(
    phi1: &ParitySeries,
    phi2: &ParitySeries,
    q_coeffs: [Complex64; 4],
    samples: &[Complex64],
) -> Result<(Complex64, f64), SeriesError> {
    assert!(!samples.is_empty());
    let d1 = phi1.derivative();
    let d2 = phi2.derivative();
    let [a, b, cq, d] = q_coeffs;
    let mut values = Vec::with_capacity(samples.len());
    for &z in samples {
        let z2 = z * z;
        let f = (a * z2 + b) * d1.eval(z)?.value + (cq * z2 + d) * d2.eval(z)?.value;
        values.push(f);
    }
    let mean = values.iter().sum::<Complex64>() / Complex64::new(samples.len() as f64, 0.0);
    let deviation = values
        .iter()
        .map(|f| (f - mean).norm())
        .fold(0.0, f64::max);
    Ok((mean, deviation))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    Inside,
    Outside,
    Boundary,
}

/// Admissibility report for a seed pair, driven by the derivative at zero.
#[derive(Clone, Debug, Serialize)]
pub struct SeedReport {
    pub derivative_at_zero: [[f64; 2]; 2],
    pub nondegenerate: bool,
    pub circle_distance: f64,
    pub component: Component,
    pub reality_obstruction: f64,
    pub tolerance: f64,
}

/// Checks |φ₁'(0) − 1| ≠ 1 and non-reality of conj(φ₁'(0))·φ₂'(0).
///
/// Boundary seeds are reported, never silently accepted: on the circle the
/// normal bundle of the central twistor line degenerates.
pub fn validate_seed(phi1: &ParitySeries, phi2: &ParitySeries, tol: f64) -> SeedReport {
    let d1 = phi1
        .derivative()
        .eval(Complex64::default())
        .expect("origin is interior")
        .value;
    let d2 = phi2
        .derivative()
        .eval(Complex64::default())
        .expect("origin is interior")
        .value;
    let circle_distance = (d1 - Complex64::new(1.0, 0.0)).norm();
    let component = if circle_distance < 1.0 - tol {
        Component::Inside
    } else if circle_distance > 1.0 + tol {
        Component::Outside
    } else {
        Component::Boundary
    };
    let reality_obstruction = (d1.conj() * d2).im.abs();
    SeedReport {
        derivative_at_zero: [[d1.re, d1.im], [d2.re, d2.im]],
        nondegenerate: component != Component::Boundary && reality_obstruction > tol,
        circle_distance,
        component,
        reality_obstruction,
        tolerance: tol,
    }
}

/// On-disk seed description. Coefficient k multiplies z^(2k+1).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedFile {
    pub phi1: SeedSeriesData,
    pub truncation: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedSeriesData {
    pub odd_coefficients: Vec<[f64; 2]>,
    pub radius: f64,
}

impl SeedSeriesData {
    pub fn to_series(&self) -> ParitySeries {
        ParitySeries::odd(
            self.odd_coefficients
                .iter()
                .map(|&[re, im]| Complex64::new(re, im))
                .collect(),
            self.radius,
        )
    }

    pub fn from_series(series: &ParitySeries) -> SeedSeriesData {
        SeedSeriesData {
            odd_coefficients: series.coefficients().iter().map(|c| [c.re, c.im]).collect(),
            radius: series.radius(),
        }
    }
}

impl SeedFile {
    pub fn from_json(text: &str) -> Result<SeedFile, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("seed serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng as _, SeedableRng as _};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn disc_samples(n: usize, max_abs: f64, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let r = max_abs * rand::Rng::gen::<f64>(&mut rng).sqrt();
                let t = std::f64::consts::TAU * rand::Rng::gen::<f64>(&mut rng);
                Complex64::from_polar(r, t)
            })
            .collect()
    }

    /// Closed form for the seed φ₁ = 3z: φ₂ = i(3z − 4·artanh z).
    fn artanh_pair_phi2(n: usize) -> ParitySeries {
        let mut coeffs = vec![c(0.0, -1.0)];
        for j in 1..n {
            coeffs.push(c(0.0, -4.0 / (2.0 * j as f64 + 1.0)));
        }
        ParitySeries::odd(coeffs, 1.0)
    }

    #[test]
    fn eval_single_term() {
        let s = ParitySeries::odd_real(&[1.0], 10.0);
        let v = s.eval(c(0.3, 0.0)).unwrap();
        assert_eq!(v.value, c(0.3, 0.0));
    }

    #[test]
    fn eval_at_origin_respects_parity() {
        let odd = ParitySeries::odd_real(&[2.0, 3.0], 2.0);
        assert_eq!(odd.eval(c(0.0, 0.0)).unwrap().value, c(0.0, 0.0));
        let even = ParitySeries::even(vec![c(5.0, 1.0), c(2.0, 0.0)], 2.0);
        assert_eq!(even.eval(c(0.0, 0.0)).unwrap().value, c(5.0, 1.0));
    }

    #[test]
    fn eval_matches_artanh_closed_form() {
        // φ₂ for the seed 3z, truncated at 40 terms, against i(3z − 4 artanh z).
        let phi2 = artanh_pair_phi2(40);
        let z: f64 = 0.5;
        let artanh = 0.5 * ((1.0 + z) / (1.0 - z)).ln();
        let expect = c(0.0, 3.0 * z - 4.0 * artanh);
        let got = phi2.eval(c(z, 0.0)).unwrap();
        assert!((got.value - expect).norm() < 1e-10);
        assert!(got.tail_bound < 1e-10);
    }

    #[test]
    fn eval_outside_domain_is_rejected() {
        let s = ParitySeries::odd_real(&[1.0], 1.0);
        assert!(matches!(
            s.eval(c(1.5, 0.0)),
            Err(SeriesError::OutsideDomain { .. })
        ));
    }

    #[test]
    fn divergent_tail_is_detected() {
        // Coefficients growing like 4^k have true radius 1/2; the declared
        // radius lies about it and evaluation past the true disc must refuse.
        let coeffs: Vec<Complex64> = (0..12).map(|k| c(4.0_f64.powi(k), 0.0)).collect();
        let s = ParitySeries::odd(coeffs, 0.9);
        assert!(matches!(
            s.eval(c(0.6, 0.0)),
            Err(SeriesError::DivergentTail { .. })
        ));
    }

    #[test]
    fn derivative_flips_parity() {
        let s = ParitySeries::odd_real(&[1.0], 3.0);
        let d = s.derivative();
        assert_eq!(d.parity(), Parity::Even);
        assert_eq!(d.coefficient(0), c(1.0, 0.0));

        let cubic = ParitySeries::odd_real(&[0.0, 1.0], 3.0);
        let d = cubic.derivative();
        assert_eq!(d.coefficient(0), c(0.0, 0.0));
        assert_eq!(d.coefficient(1), c(3.0, 0.0));

        let dd = cubic.derivative().derivative();
        assert_eq!(dd.parity(), Parity::Odd);
        assert_eq!(dd.coefficient(0), c(6.0, 0.0));
    }

    #[test]
    fn solve_phi2_linear_seed_is_exact() {
        let phi1 = ParitySeries::odd_real(&[1.0], 10.0);
        let phi2 = solve_phi2(&phi1, 20).unwrap();
        assert_eq!(phi2.coefficient(0), c(0.0, 1.0));
        for k in 1..20 {
            assert_eq!(phi2.coefficient(k).norm(), 0.0);
        }
        assert_eq!(phi2.radius(), 1.0);
    }

    #[test]
    fn solve_phi2_matches_artanh_coefficients() {
        let phi1 = ParitySeries::odd_real(&[3.0], 10.0);
        let phi2 = solve_phi2(&phi1, 40).unwrap();
        let closed = artanh_pair_phi2(40);
        for k in 0..40 {
            assert!((phi2.coefficient(k) - closed.coefficient(k)).norm() < 1e-14);
        }
    }

    #[test]
    fn solve_phi2_zero_seed_gives_artanh() {
        let phi1 = ParitySeries::odd_real(&[0.0], 10.0);
        let phi2 = solve_phi2(&phi1, 10).unwrap();
        for j in 0..10 {
            let expect = c(0.0, 2.0 / (2.0 * j as f64 + 1.0));
            assert!((phi2.coefficient(j) - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn ode_residual_reference_pairs() {
        let samples = disc_samples(50, 0.5, 7);
        let phi1 = ParitySeries::odd_real(&[1.0], 10.0);
        let phi2 = solve_phi2(&phi1, 30).unwrap();
        assert!(ode_residual(&phi1, &phi2, &samples).unwrap() < 1e-14);

        let phi1 = ParitySeries::odd_real(&[3.0], 10.0);
        let phi2 = solve_phi2(&phi1, 60).unwrap();
        assert!(ode_residual(&phi1, &phi2, &samples).unwrap() < 1e-12);
    }

    #[test]
    fn ode_residual_of_cubic_perturbation() {
        // φ₂ = iz + εz³ leaves residual |i(z²−1)·3εz²| = 0.5625 ε at z = 0.5.
        let eps = 1e-3;
        let phi1 = ParitySeries::odd_real(&[1.0], 10.0);
        let phi2 = ParitySeries::odd(vec![c(0.0, 1.0), c(eps, 0.0)], 10.0);
        let r = ode_residual(&phi1, &phi2, &[c(0.5, 0.0)]).unwrap();
        assert!((r - 0.5625 * eps).abs() < 1e-12);
    }

    #[test]
    fn combination_constancy_reference_values() {
        let phi1 = ParitySeries::odd_real(&[1.0], 10.0);
        let phi2 = ParitySeries::odd(vec![c(0.0, 1.0)], 10.0);
        let samples = disc_samples(20, 0.5, 11);
        let std_q = [c(1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)];
        let (mean, dev) = combination_constancy(&phi1, &phi2, std_q, &samples).unwrap();
        assert!((mean - c(2.0, 0.0)).norm() < 1e-14);
        assert!(dev < 1e-14);

        // With (1,0,0,0) the combination is z², which spreads over samples of
        // distinct modulus.
        let q = [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let pts = [c(0.1, 0.0), c(0.4, 0.0)];
        let (_, dev) = combination_constancy(&phi1, &phi2, q, &pts).unwrap();
        assert!(dev > 1e-2);
    }

    #[test]
    fn combination_constancy_for_recursion_output() {
        let phi1 = ParitySeries::odd(vec![c(1.0, 0.0), c(0.2, 0.0)], 10.0);
        let phi2 = solve_phi2(&phi1, 60).unwrap();
        let samples = disc_samples(25, 0.5, 13);
        let std_q = [c(1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0)];
        let (mean, dev) = combination_constancy(&phi1, &phi2, std_q, &samples).unwrap();
        assert!((mean - c(2.0, 0.0)).norm() < 1e-10);
        assert!(dev < 1e-10);
    }

    #[test]
    fn validate_seed_reference_cases() {
        let tol = DEFAULT_BOUNDARY_TOL;

        let phi1 = ParitySeries::odd_real(&[1.0], 10.0);
        let phi2 = solve_phi2(&phi1, 5).unwrap();
        let rep = validate_seed(&phi1, &phi2, tol);
        assert_eq!(rep.component, Component::Inside);
        assert!(rep.nondegenerate);
        assert!(rep.circle_distance.abs() < 1e-15);

        let phi1 = ParitySeries::odd_real(&[2.0], 10.0);
        let phi2 = solve_phi2(&phi1, 5).unwrap();
        let rep = validate_seed(&phi1, &phi2, tol);
        assert_eq!(rep.component, Component::Boundary);
        assert!(!rep.nondegenerate);

        let phi1 = ParitySeries::odd_real(&[3.0], 10.0);
        let phi2 = solve_phi2(&phi1, 5).unwrap();
        // φ₂'(0) = i(2 − 3) = −i from the recursion.
        assert!((phi2.coefficient(0) - c(0.0, -1.0)).norm() < 1e-15);
        let rep = validate_seed(&phi1, &phi2, tol);
        assert_eq!(rep.component, Component::Outside);
        assert!((rep.circle_distance - 2.0).abs() < 1e-15);
        assert!(rep.nondegenerate);
        assert!((rep.reality_obstruction - 3.0).abs() < 1e-15);
    }

    #[test]
    fn circle_criterion_matches_reality_obstruction() {
        // For recursion output, conj(φ₁'(0))·φ₂'(0) is real exactly when
        // φ₁'(0) sits on the circle |w − 1| = 1.
        for k in 0..12 {
            let theta = std::f64::consts::TAU * k as f64 / 12.0;
            let on = c(1.0, 0.0) + Complex64::from_polar(1.0, theta);
            let off = c(1.0, 0.0) + Complex64::from_polar(1.3, theta);
            for (w, expect_real) in [(on, true), (off, false)] {
                let phi1 = ParitySeries::odd(vec![w], 10.0);
                let phi2 = solve_phi2(&phi1, 4).unwrap();
                let rep = validate_seed(&phi1, &phi2, DEFAULT_BOUNDARY_TOL);
                if expect_real {
                    assert!(rep.reality_obstruction < 1e-12, "theta={theta}");
                } else {
                    // Away from w = 0 and w = 2 the obstruction is macroscopic.
                    assert!(rep.reality_obstruction > 1e-3, "theta={theta}");
                }
            }
        }
    }

    #[test]
    fn recursion_agrees_with_radial_integration() {
        // Independent oracle: integrate φ₂' = (2 − (z²+1)φ₁')/(i(z²−1)) along
        // the radial path with classical RK4.
        let phi1 = ParitySeries::odd(vec![c(1.0, 0.2), c(-0.3, 0.1), c(0.05, 0.0)], 10.0);
        let phi2 = solve_phi2(&phi1, 80).unwrap();
        let d1 = phi1.derivative();
        let rhs = |w: Complex64| {
            let w2 = w * w;
            (c(2.0, 0.0) - (w2 + 1.0) * d1.eval(w).unwrap().value) / (I * (w2 - 1.0))
        };
        for &z in &[c(0.5, 0.0), c(0.3, 0.2), c(-0.1, 0.4)] {
            let steps = 4000;
            let h = z / steps as f64;
            let mut acc = Complex64::default();
            for k in 0..steps {
                let w0 = h * k as f64;
                let k1 = rhs(w0);
                let k2 = rhs(w0 + 0.5 * h);
                let k3 = rhs(w0 + 0.5 * h);
                let k4 = rhs(w0 + h);
                let _ = k3;
                acc += h * (k1 + (k2 + k3) * 2.0 + k4) / 6.0;
            }
            let series_value = phi2.eval(z).unwrap().value;
            assert!(
                (series_value - acc).norm() < 1e-12,
                "z={z} diff={}",
                (series_value - acc).norm()
            );
        }
    }

    proptest! {
        #[test]
        fn parity_closure(coeffs in proptest::collection::vec(-1.0f64..1.0, 1..5)) {
            let odd = ParitySeries::odd_real(&coeffs, 2.0);
            prop_assert_eq!(odd.derivative().parity(), Parity::Even);
            prop_assert_eq!(odd.derivative().derivative().parity(), Parity::Odd);
            prop_assert_eq!(odd.mul(&odd).parity(), Parity::Even);
            let even = odd.derivative();
            prop_assert_eq!(even.mul(&even).parity(), Parity::Even);
            prop_assert_eq!(odd.mul(&even).parity(), Parity::Odd);
            let phi2 = solve_phi2(&odd, 12).unwrap();
            prop_assert_eq!(phi2.parity(), Parity::Odd);
        }

        #[test]
        fn ode_exactness_for_random_polynomial_seeds(
            re in proptest::collection::vec(-1.0f64..1.0, 5),
            im in proptest::collection::vec(-1.0f64..1.0, 5),
        ) {
            // Degree ≤ 9 odd polynomial with unit-disc coefficients.
            let coeffs: Vec<Complex64> = re.iter().zip(&im)
                .map(|(&a, &b)| Complex64::new(a, b)).collect();
            let phi1 = ParitySeries::odd(coeffs, 10.0);
            let phi2 = solve_phi2(&phi1, 40).unwrap();
            let samples = disc_samples(50, 0.5, 99);
            prop_assert!(ode_residual(&phi1, &phi2, &samples).unwrap() < 1e-12);
        }
    }

    #[test]
    fn mul_matches_pointwise_product() {
        let a = ParitySeries::odd(vec![c(1.0, 0.5), c(0.2, -0.1), c(0.0, 0.3)], 2.0);
        let b = ParitySeries::odd(vec![c(0.7, 0.0), c(-0.4, 0.2), c(0.1, 0.1)], 2.0);
        let p = a.mul(&b);
        let z = c(0.3, 0.1);
        let direct = a.eval(z).unwrap().value * b.eval(z).unwrap().value;
        // Truncated product only carries terms up to the kept order.
        assert!((p.eval(z).unwrap().value - direct).norm() < 5e-3);
        let za = c(0.05, 0.02);
        let direct = a.eval(za).unwrap().value * b.eval(za).unwrap().value;
        assert!((p.eval(za).unwrap().value - direct).norm() < 1e-7);
    }

    #[test]
    fn seed_file_round_trip() {
        let text = r#"{ "phi1": { "odd_coefficients": [[1.0, 0.0], [0.2, 0.0]], "radius": 10.0 }, "truncation": 48 }"#;
        let file = SeedFile::from_json(text).unwrap();
        let series = file.phi1.to_series();
        assert_eq!(series.truncation(), 2);
        assert_eq!(series.coefficient(1), c(0.2, 0.0));
        assert_eq!(file.truncation, 48);
        let back = SeedFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back.phi1.odd_coefficients, file.phi1.odd_coefficients);
    }
}
