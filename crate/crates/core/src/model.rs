//! Physical parameters of the driven-dissipative Kerr dimer.
//!
//! All rates are expressed in units of the cavity loss rate `gamma`. The
//! Hamiltonian in the frame rotating at the drive frequency is
//!
//! ```text
//! H = -J (a1† a2 + a2† a1) + U/2 (a1†² a1² + a2†² a2²)
//!     + Δω (a1† a1 + a2† a2) + F (a1† + a2†) + F* (a1 + a2)
//! ```
//!
//! and each cavity loses photons through the jump operator `sqrt(2γ) a_i`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// The five rates (J, U, F, Δω, γ) defining one dimer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    j: f64,
    u: f64,
    f: Complex64,
    delta_omega: f64,
    gamma: f64,
}

impl SystemParams {
    /// Validated constructor.
    pub fn new(j: f64, u: f64, f: impl Into<Complex64>, delta_omega: f64, gamma: f64) -> Result<Self> {
        let f = f.into();
        let finite = [j, u, f.re, f.im, delta_omega, gamma].iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("all rates must be finite".into()));
        }
        if gamma <= 0.0 {
            return Err(Error::InvalidParameter(format!("gamma must be positive, got {gamma}")));
        }
        if j < 0.0 {
            return Err(Error::InvalidParameter(format!("tunneling J must be non-negative, got {j}")));
        }
        Ok(Self { j, u, f, delta_omega, gamma })
    }

    /// Parameters with γ = 1, the convention used by the command line.
    pub fn in_units_of_gamma(j: f64, u: f64, f: impl Into<Complex64>, delta_omega: f64) -> Result<Self> {
        Self::new(j, u, f, delta_omega, 1.0)
    }

    pub fn j(&self) -> f64 {
        self.j
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn f(&self) -> Complex64 {
        self.f
    }

    pub fn delta_omega(&self) -> f64 {
        self.delta_omega
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Complex decay constant κ = γ + iΔω.
    pub fn kappa(&self) -> Complex64 {
        Complex64::new(self.gamma, self.delta_omega)
    }

    pub fn with_j(self, j: f64) -> Result<Self> {
        Self::new(j, self.u, self.f, self.delta_omega, self.gamma)
    }

    pub fn with_u(self, u: f64) -> Result<Self> {
        Self::new(self.j, u, self.f, self.delta_omega, self.gamma)
    }

    pub fn with_f(self, f: impl Into<Complex64>) -> Result<Self> {
        Self::new(self.j, self.u, f, self.delta_omega, self.gamma)
    }

    pub fn with_delta_omega(self, delta_omega: f64) -> Result<Self> {
        Self::new(self.j, self.u, self.f, delta_omega, self.gamma)
    }

    /// Multiplies every rate by `s`; time then runs in units of `1/s`.
    pub fn scaled(self, s: f64) -> Result<Self> {
        Self::new(s * self.j, s * self.u, s * self.f, s * self.delta_omega, s * self.gamma)
    }

    pub fn derived(&self) -> Result<DerivedConstants> {
        DerivedConstants::new(self)
    }
}

/// Constants κ, c and d built from the rates.
///
/// `c = 2iκ/U` and `d = c*`, so `c + d = -4Δω/U` is real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub kappa: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl DerivedConstants {
    pub fn new(params: &SystemParams) -> Result<Self> {
        if params.u == 0.0 {
            return Err(Error::ZeroKerr);
        }
        let kappa = params.kappa();
        let c = Complex64::new(0.0, 2.0) * kappa / params.u;
        Ok(Self { kappa, c, d: c.conj() })
    }

    /// `c + d`, real by construction.
    pub fn c_plus_d(&self) -> f64 {
        (self.c + self.d).re
    }
}
