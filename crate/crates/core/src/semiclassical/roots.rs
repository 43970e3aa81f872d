//! Enumeration of mean-field steady states by multi-start Newton iteration.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use super::dynamics::{rhs, rhs_norm, MeanFieldState, DIVERGENCE_GUARD};
use super::cubic::{symmetric_branch, symmetric_state};
use super::stability::{Stability, StabilityMatrix};
use crate::error::{Error, Result};
use crate::model::SystemParams;

/// Two roots closer than this (largest component-wise distance) are the same root.
pub const DEDUP_TOLERANCE: f64 = 1e-6;

/// Relative tolerance on `|Δn|` and absolute tolerance on `|Δθ|` for symmetric states.
pub const SYMMETRY_TOLERANCE: f64 = 1e-6;

/// Largest residual of the steady-state equations a reported root may carry.
pub const ROOT_RESIDUAL: f64 = 1e-9;

/// Upper bound on the number of fixed points of the dimer.
pub const MAX_ROOTS: usize = 9;

const MAX_NEWTON_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symmetry {
    SymmetryPreserving,
    SymmetryBreaking,
}

impl Symmetry {
    pub fn of(state: &MeanFieldState) -> Self {
        let scale = 1.0 + state.n1() + state.n2();
        if state.delta_n().abs() < SYMMETRY_TOLERANCE * scale && state.delta_theta().abs() < SYMMETRY_TOLERANCE {
            Symmetry::SymmetryPreserving
        } else {
            Symmetry::SymmetryBreaking
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Symmetry::SymmetryPreserving => "preserving",
            Symmetry::SymmetryBreaking => "breaking",
        }
    }
}

/// A classified fixed point of the mean-field flow.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateSolution {
    pub state: MeanFieldState,
    pub eigenvalues: [Complex64; 4],
    pub stability: Stability,
    pub symmetry: Symmetry,
}

impl SteadyStateSolution {
    pub fn classify(params: &SystemParams, state: MeanFieldState) -> Self {
        let eigenvalues = StabilityMatrix::new(params, &state).eigenvalues();
        Self {
            state,
            eigenvalues,
            stability: Stability::classify(&eigenvalues),
            symmetry: Symmetry::of(&state),
        }
    }

    pub fn is_stable(&self) -> bool {
        self.stability == Stability::Stable
    }
}

/// Deterministic grid of Newton starting points.
///
/// Each site gets `n_amplitude × n_phase` starts with amplitudes spaced
/// uniformly in `sqrt(n)` over `[0, sqrt(n_max)]` and phases uniformly in
/// `[0, 2π)`; the grid for the dimer is the Cartesian product of both sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchGrid {
    pub n_amplitude: usize,
    pub n_phase: usize,
    /// Defaults to `2|F|²/γ² + 10` when `None`.
    pub n_max: Option<f64>,
}

impl Default for SearchGrid {
    fn default() -> Self {
        Self { n_amplitude: 8, n_phase: 8, n_max: None }
    }
}

impl SearchGrid {
    pub fn n_max_for(&self, params: &SystemParams) -> f64 {
        self.n_max
            .unwrap_or_else(|| 2.0 * params.f().norm_sqr() / params.gamma().powi(2) + 10.0)
    }

    fn site_points(&self, params: &SystemParams) -> Vec<Complex64> {
        let amp_max = self.n_max_for(params).sqrt();
        let na = self.n_amplitude.max(1);
        let np = self.n_phase.max(1);
        let mut pts = Vec::with_capacity(na * np);
        for ia in 0..na {
            let r = if na == 1 { amp_max } else { amp_max * ia as f64 / (na - 1) as f64 };
            for ip in 0..np {
                let theta = 2.0 * PI * ip as f64 / np as f64;
                pts.push(Complex64::from_polar(r, theta));
            }
        }
        pts
    }

    pub fn starts(&self, params: &SystemParams) -> Vec<MeanFieldState> {
        let site = self.site_points(params);
        let mut out = Vec::with_capacity(site.len() * site.len());
        for &a1 in &site {
            for &a2 in &site {
                out.push(MeanFieldState::new(a1, a2));
            }
        }
        out
    }
}

fn residual_vector(params: &SystemParams, v: &Vector4<f64>) -> Vector4<f64> {
    let s = MeanFieldState::from_real([v[0], v[1], v[2], v[3]]);
    let (r1, r2) = rhs(params, &s);
    Vector4::new(r1.re, r1.im, r2.re, r2.im)
}

/// Real Jacobian of the residual in `(Re α1, Im α1, Re α2, Im α2)`.
fn jacobian(params: &SystemParams, v: &Vector4<f64>) -> Matrix4<f64> {
    let s = MeanFieldState::from_real([v[0], v[1], v[2], v[3]]);
    // Residual r_i depends on α through Wirtinger derivatives (∂r/∂α, ∂r/∂α*) = −(A_row).
    let a = StabilityMatrix::new(params, &s).a;
    let mut jac = Matrix4::zeros();
    for bi in 0..2 {
        for bj in 0..2 {
            let p = -a[(2 * bi, 2 * bj)];
            let q = -a[(2 * bi, 2 * bj + 1)];
            let sum = p + q;
            let diff = p - q;
            jac[(2 * bi, 2 * bj)] = sum.re;
            jac[(2 * bi, 2 * bj + 1)] = -diff.im;
            jac[(2 * bi + 1, 2 * bj)] = sum.im;
            jac[(2 * bi + 1, 2 * bj + 1)] = diff.re;
        }
    }
    jac
}

/// Damped Newton iteration from one start; `None` when it fails to converge.
pub fn newton(params: &SystemParams, start: MeanFieldState) -> Option<MeanFieldState> {
    let scale = 1.0 + params.f().norm();
    let mut v = Vector4::from(start.to_real());
    let mut r = residual_vector(params, &v);
    let mut rn = r.norm();
    for _ in 0..MAX_NEWTON_ITERATIONS {
        if rn < 1e-13 * scale {
            break;
        }
        let step = jacobian(params, &v).lu().solve(&(-r))?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = v + lambda * step;
            let tr = residual_vector(params, &trial);
            let tn = tr.norm();
            if tn.is_finite() && tn < rn * (1.0 - 1e-4 * lambda) {
                v = trial;
                r = tr;
                rn = tn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            // Stalled: accept only if already at round-off level.
            break;
        }
        if v.iter().any(|x| !x.is_finite()) || v.norm() > 2.0 * DIVERGENCE_GUARD {
            return None;
        }
    }
    let state = MeanFieldState::from_real([v[0], v[1], v[2], v[3]]);
    (rhs_norm(rhs(params, &state)) < ROOT_RESIDUAL * scale).then_some(state)
}

/// All distinct fixed points reachable from the search grid, classified.
///
/// Roots are returned sorted by `(n1 + n2, n1)`. Each found root's mirror image is also used
/// as a start so that symmetry-breaking pairs are returned together.
pub fn find_all_steady_states(params: &SystemParams, grid: &SearchGrid) -> Result<Vec<SteadyStateSolution>> {
    let mut roots: Vec<MeanFieldState> = Vec::new();
    let push = |s: MeanFieldState, roots: &mut Vec<MeanFieldState>| {
        if roots.iter().all(|r| r.distance(&s) >= DEDUP_TOLERANCE) {
            roots.push(s);
        }
    };
    for start in grid.starts(params) {
        if let Some(s) = newton(params, start) {
            push(s, &mut roots);
        }
    }
    for b in symmetric_branch(params) {
        if let Some(s) = newton(params, symmetric_state(params, b.n)) {
            push(s, &mut roots);
        }
    }
    // Mirror images, then site amplitudes recombined across known roots (exact
    // products at J = 0, close to the hybridized roots at small J).
    let mut tried = 0;
    while tried < roots.len() && roots.len() <= MAX_ROOTS {
        let known = roots.len();
        for k in tried..known {
            let r = roots[k];
            let mut starts = vec![r.swapped()];
            for other in roots[..known].to_vec() {
                starts.push(MeanFieldState::new(r.alpha1, other.alpha2));
                starts.push(MeanFieldState::new(other.alpha1, r.alpha2));
            }
            for start in starts {
                if let Some(s) = newton(params, start) {
                    push(s, &mut roots);
                }
            }
        }
        tried = known;
    }
    if roots.is_empty() {
        return Err(Error::NoSteadyState);
    }
    roots.sort_by(|a, b| {
        (a.n1() + a.n2())
            .total_cmp(&(b.n1() + b.n2()))
            .then(a.n1().total_cmp(&b.n1()))
    });
    Ok(roots.into_iter().map(|s| SteadyStateSolution::classify(params, s)).collect())
}

/// Residuals `|F|² − RHS` of the two real state equations obtained by
/// eliminating the drive phase from the steady-state conditions.
///
/// ```text
/// |F|² = n1 (γ² + (U n1 + Δω)²) − 2γJ√(n1 n2) sin Δθ − 2J√(n1 n2)(U n1 + Δω) cos Δθ + J² n2
/// |F|² = n2 (γ² + (U n2 + Δω)²) + 2γJ√(n1 n2) sin Δθ − 2J√(n1 n2)(U n2 + Δω) cos Δθ + J² n1
/// ```
pub fn state_equation_residual(params: &SystemParams, n1: f64, n2: f64, delta_theta: f64) -> (f64, f64) {
    let (g, u, dw, j) = (params.gamma(), params.u(), params.delta_omega(), params.j());
    let f2 = params.f().norm_sqr();
    let root = (n1 * n2).sqrt();
    let (sin, cos) = delta_theta.sin_cos();
    let e1 = u * n1 + dw;
    let e2 = u * n2 + dw;
    let rhs1 = n1 * (g * g + e1 * e1) - 2.0 * g * j * root * sin - 2.0 * j * root * e1 * cos + j * j * n2;
    let rhs2 = n2 * (g * g + e2 * e2) + 2.0 * g * j * root * sin - 2.0 * j * root * e2 * cos + j * j * n1;
    (f2 - rhs1, f2 - rhs2)
}
