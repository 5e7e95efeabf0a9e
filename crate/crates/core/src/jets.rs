//! Fixed-order jet types used to transport derivatives through coordinate
//! changes and algebraic formulas in closed form.
//!
//! `Jet2` carries a value with first and second partials in two variables;
//! `Jet3` extends this to third order. The variable pair is contextual:
//! (ζ, ξ) while working on the twistor side, (x, y) on the Joyce side.

use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Value plus first and second partial derivatives in two variables.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub v: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
    pub d11: Complex64,
    pub d12: Complex64,
    pub d22: Complex64,
}

impl Jet2 {
    pub const ZERO: Jet2 = Jet2 {
        v: Complex64::new(0.0, 0.0),
        d1: Complex64::new(0.0, 0.0),
        d2: Complex64::new(0.0, 0.0),
        d11: Complex64::new(0.0, 0.0),
        d12: Complex64::new(0.0, 0.0),
        d22: Complex64::new(0.0, 0.0),
    };

    pub fn constant(v: Complex64) -> Jet2 {
        Jet2 { v, ..Jet2::ZERO }
    }

    /// The first coordinate as a jet (value `v`, unit derivative along axis 1).
    pub fn var1(v: Complex64) -> Jet2 {
        Jet2 {
            v,
            d1: c(1.0),
            ..Jet2::ZERO
        }
    }

    /// The second coordinate as a jet.
    pub fn var2(v: Complex64) -> Jet2 {
        Jet2 {
            v,
            d2: c(1.0),
            ..Jet2::ZERO
        }
    }

    pub fn scale(self, k: Complex64) -> Jet2 {
        Jet2 {
            v: k * self.v,
            d1: k * self.d1,
            d2: k * self.d2,
            d11: k * self.d11,
            d12: k * self.d12,
            d22: k * self.d22,
        }
    }

    /// Multiplicative inverse, valid where the value is nonzero.
    pub fn inv(self) -> Jet2 {
        let w = self.v.inv();
        let w2 = w * w;
        let w3 = w2 * w;
        Jet2 {
            v: w,
            d1: -self.d1 * w2,
            d2: -self.d2 * w2,
            d11: c(2.0) * self.d1 * self.d1 * w3 - self.d11 * w2,
            d12: c(2.0) * self.d1 * self.d2 * w3 - self.d12 * w2,
            d22: c(2.0) * self.d2 * self.d2 * w3 - self.d22 * w2,
        }
    }

    pub fn max_entry_norm(self) -> f64 {
        self.v
            .norm()
            .max(self.d1.norm())
            .max(self.d2.norm())
            .max(self.d11.norm())
            .max(self.d12.norm())
            .max(self.d22.norm())
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
            d11: self.d11 + o.d11,
            d12: self.d12 + o.d12,
            d22: self.d22 + o.d22,
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(c(-1.0))
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        Jet2 {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + self.v * o.d2,
            d11: self.d11 * o.v + c(2.0) * self.d1 * o.d1 + self.v * o.d11,
            d12: self.d12 * o.v + self.d1 * o.d2 + self.d2 * o.d1 + self.v * o.d12,
            d22: self.d22 * o.v + c(2.0) * self.d2 * o.d2 + self.v * o.d22,
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        self * o.inv()
    }
}

/// Scalar field value with all partial derivatives through total order three.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet3 {
    pub f: Complex64,
    pub fx: Complex64,
    pub fy: Complex64,
    pub fxx: Complex64,
    pub fxy: Complex64,
    pub fyy: Complex64,
    pub fxxx: Complex64,
    pub fxxy: Complex64,
    pub fxyy: Complex64,
    pub fyyy: Complex64,
}

impl Jet3 {
    /// Order-two view of the field itself.
    pub fn jet2(&self) -> Jet2 {
        Jet2 {
            v: self.f,
            d1: self.fx,
            d2: self.fy,
            d11: self.fxx,
            d12: self.fxy,
            d22: self.fyy,
        }
    }

    /// Order-two view of the first-variable derivative.
    pub fn dx_jet2(&self) -> Jet2 {
        Jet2 {
            v: self.fx,
            d1: self.fxx,
            d2: self.fxy,
            d11: self.fxxx,
            d12: self.fxxy,
            d22: self.fxyy,
        }
    }

    /// Order-two view of the second-variable derivative.
    pub fn dy_jet2(&self) -> Jet2 {
        Jet2 {
            v: self.fy,
            d1: self.fxy,
            d2: self.fyy,
            d11: self.fxxy,
            d12: self.fxyy,
            d22: self.fyyy,
        }
    }
}
