//! Mean-field amplitudes and their equations of motion.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::SystemParams;

/// Per-site amplitude above which a mean-field trajectory counts as runaway.
pub const DIVERGENCE_GUARD: f64 = 1e3;

/// Residual norm below which the flow is considered stationary.
pub const STATIONARY_RHS: f64 = 1e-9;

/// Duration (in units of 1/γ) the flow must stay stationary to count as converged.
pub const STATIONARY_WINDOW: f64 = 10.0;

/// Mean-field amplitudes `(<a1>, <a2>)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldState {
    pub alpha1: Complex64,
    pub alpha2: Complex64,
}

impl MeanFieldState {
    pub fn new(alpha1: Complex64, alpha2: Complex64) -> Self {
        Self { alpha1, alpha2 }
    }

    /// Builds the state from occupations and phases of both sites.
    pub fn from_polar(n1: f64, theta1: f64, n2: f64, theta2: f64) -> Self {
        Self {
            alpha1: Complex64::from_polar(n1.max(0.0).sqrt(), theta1),
            alpha2: Complex64::from_polar(n2.max(0.0).sqrt(), theta2),
        }
    }

    pub fn vacuum() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn n1(&self) -> f64 {
        self.alpha1.norm_sqr()
    }

    pub fn n2(&self) -> f64 {
        self.alpha2.norm_sqr()
    }

    pub fn theta1(&self) -> f64 {
        self.alpha1.arg()
    }

    pub fn theta2(&self) -> f64 {
        self.alpha2.arg()
    }

    pub fn delta_n(&self) -> f64 {
        self.n1() - self.n2()
    }

    /// Relative phase θ1 − θ2 wrapped to (−π, π].
    pub fn delta_theta(&self) -> f64 {
        wrap_phase(self.theta1() - self.theta2())
    }

    /// Sites exchanged.
    pub fn swapped(&self) -> Self {
        Self::new(self.alpha2, self.alpha1)
    }

    /// Largest component-wise distance between two states.
    pub fn distance(&self, other: &Self) -> f64 {
        (self.alpha1 - other.alpha1).norm().max((self.alpha2 - other.alpha2).norm())
    }

    pub(crate) fn to_real(self) -> [f64; 4] {
        [self.alpha1.re, self.alpha1.im, self.alpha2.re, self.alpha2.im]
    }

    pub(crate) fn from_real(v: [f64; 4]) -> Self {
        Self::new(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]))
    }

    fn axpy(&self, h: f64, k: (Complex64, Complex64)) -> Self {
        Self::new(self.alpha1 + h * k.0, self.alpha2 + h * k.1)
    }
}

/// Wraps an angle to (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Time derivatives `(dα1/dt, dα2/dt)`.
///
/// `dα_i/dt = F − α_i (κ + iU|α_i|²) + iJ α_j`; the conjugate equations follow
/// by conjugation.
pub fn rhs(params: &SystemParams, state: &MeanFieldState) -> (Complex64, Complex64) {
    let kappa = params.kappa();
    let f = params.f();
    let iu = Complex64::new(0.0, params.u());
    let ij = Complex64::new(0.0, params.j());
    let (a1, a2) = (state.alpha1, state.alpha2);
    let d1 = f - a1 * (kappa + iu * a1.norm_sqr()) + ij * a2;
    let d2 = f - a2 * (kappa + iu * a2.norm_sqr()) + ij * a1;
    (d1, d2)
}

pub(crate) fn rhs_norm(d: (Complex64, Complex64)) -> f64 {
    (d.0.norm_sqr() + d.1.norm_sqr()).sqrt()
}

/// Output of [`integrate`].
#[derive(Debug, Clone)]
pub struct MeanFieldTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<MeanFieldState>,
    /// Time at which the stationarity window was completed, if it was.
    pub converged_at: Option<f64>,
}

impl MeanFieldTrajectory {
    pub fn final_state(&self) -> MeanFieldState {
        *self.states.last().expect("trajectory holds at least the initial state")
    }

    pub fn converged(&self) -> bool {
        self.converged_at.is_some()
    }
}

/// Fixed-step RK4 integration of the mean-field flow.
///
/// Integration stops early once `‖rhs‖ < 1e-9` has held for `10/γ`.
pub fn integrate(
    params: &SystemParams,
    initial: MeanFieldState,
    t_final: f64,
    dt: f64,
) -> Result<MeanFieldTrajectory> {
    if !(dt > 0.0) || !(t_final > 0.0) {
        return Err(Error::InvalidParameter("dt and t_final must be positive".into()));
    }
    let steps = (t_final / dt).ceil() as usize;
    let window = STATIONARY_WINDOW / params.gamma();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut state = initial;
    let mut t = 0.0;
    times.push(t);
    states.push(state);
    let mut quiet_since: Option<f64> = None;
    let mut converged_at = None;

    for _ in 0..steps {
        let k1 = rhs(params, &state);
        let k2 = rhs(params, &state.axpy(0.5 * dt, k1));
        let k3 = rhs(params, &state.axpy(0.5 * dt, k2));
        let k4 = rhs(params, &state.axpy(dt, k3));
        state = MeanFieldState::new(
            state.alpha1 + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            state.alpha2 + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        );
        t += dt;
        let magnitude = state.alpha1.norm().max(state.alpha2.norm());
        if !(magnitude <= DIVERGENCE_GUARD) {
            return Err(Error::Divergence { time: t, magnitude });
        }
        times.push(t);
        states.push(state);

        if rhs_norm(rhs(params, &state)) < STATIONARY_RHS {
            let start = *quiet_since.get_or_insert(t);
            if t - start >= window {
                converged_at = Some(t);
                break;
            }
        } else {
            quiet_since = None;
        }
    }
    Ok(MeanFieldTrajectory { times, states, converged_at })
}
