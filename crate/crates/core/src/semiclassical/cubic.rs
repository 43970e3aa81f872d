//! Symmetric (n1 = n2, Δθ = 0) steady states from the closed-form cubic.
//!
//! For equal occupations the state equations collapse to
//! `|F|² = n (γ² + (U n + Δω)²) − 2 J n (U n + Δω) + J² n`, i.e.
//! `U² n³ + 2U(Δω − J) n² + (γ² + (Δω − J)²) n − |F|² = 0`.
//! At `J = 0` this is the single-cavity bistability curve.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::dynamics::MeanFieldState;
use super::stability::{Stability, StabilityMatrix};
use crate::model::SystemParams;

/// One root of the symmetric-branch cubic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    pub n: f64,
    pub stability: Stability,
}

/// Real roots of `a3 x³ + a2 x² + a1 x + a0`, ascending, each polished by Newton steps.
///
/// Degrades to the quadratic or linear formula when the leading coefficients vanish.
pub fn real_cubic_roots(a3: f64, a2: f64, a1: f64, a0: f64) -> Vec<f64> {
    let scale = a3.abs().max(a2.abs()).max(a1.abs()).max(a0.abs());
    if scale == 0.0 {
        return Vec::new();
    }
    let tiny = 1e-14 * scale;
    let mut roots = if a3.abs() <= tiny {
        if a2.abs() <= tiny {
            if a1.abs() <= tiny {
                Vec::new()
            } else {
                vec![-a0 / a1]
            }
        } else {
            let disc = a1 * a1 - 4.0 * a2 * a0;
            if disc < 0.0 {
                Vec::new()
            } else {
                // Numerically stable pair.
                let q = -0.5 * (a1 + a1.signum() * disc.sqrt());
                let mut v = Vec::new();
                if q != 0.0 {
                    v.push(q / a2);
                    v.push(a0 / q);
                } else {
                    v.push(0.0);
                }
                v
            }
        }
    } else {
        let b = a2 / a3;
        let c = a1 / a3;
        let d = a0 / a3;
        // Depressed cubic t³ + p t + q with x = t − b/3.
        let p = c - b * b / 3.0;
        let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
        let shift = -b / 3.0;
        let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
        if p == 0.0 && q == 0.0 {
            vec![shift]
        } else if disc > 0.0 {
            let sq = disc.sqrt();
            let u = (-q / 2.0 + sq).cbrt();
            let v = (-q / 2.0 - sq).cbrt();
            vec![u + v + shift]
        } else {
            // Three real roots (two may coincide): trigonometric form.
            let m = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
            let phi = arg.acos() / 3.0;
            (0..3)
                .map(|k| m * (phi - 2.0 * PI * k as f64 / 3.0).cos() + shift)
                .collect()
        }
    };
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let f = ((a3 * *r + a2) * *r + a1) * *r + a0;
            let df = (3.0 * a3 * *r + 2.0 * a2) * *r + a1;
            if df == 0.0 {
                break;
            }
            let step = f / df;
            if !step.is_finite() {
                break;
            }
            *r -= step;
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// Coefficients `(a3, a2, a1, a0)` of the symmetric-branch cubic in `n`.
pub fn symmetric_cubic_coefficients(params: &SystemParams) -> (f64, f64, f64, f64) {
    let u = params.u();
    let e = params.delta_omega() - params.j();
    let g = params.gamma();
    (u * u, 2.0 * u * e, g * g + e * e, -params.f().norm_sqr())
}

/// Mean-field amplitude of the symmetric state with occupation `n`:
/// `α = F / (κ + iUn − iJ)` on both sites.
pub fn symmetric_state(params: &SystemParams, n: f64) -> MeanFieldState {
    let denom = params.kappa() + Complex64::new(0.0, params.u() * n - params.j());
    let alpha = params.f() / denom;
    MeanFieldState::new(alpha, alpha)
}

/// Non-negative real roots of the symmetric cubic, each classified by the
/// full dimer stability matrix (so antisymmetric fluctuations are included).
pub fn symmetric_branch(params: &SystemParams) -> Vec<BranchPoint> {
    let (a3, a2, a1, a0) = symmetric_cubic_coefficients(params);
    let mut out: Vec<BranchPoint> = Vec::new();
    for n in real_cubic_roots(a3, a2, a1, a0) {
        if n < -1e-12 {
            continue;
        }
        let n = n.max(0.0);
        if out.iter().any(|b| (b.n - n).abs() <= 1e-12 * (1.0 + n)) {
            continue;
        }
        let stability = StabilityMatrix::new(params, &symmetric_state(params, n)).classify();
        out.push(BranchPoint { n, stability });
    }
    out
}

/// `d|F|²/dn` along the symmetric branch. For a single cavity (`J = 0`) a root is
/// stable exactly when this is positive.
pub fn symmetric_slope(params: &SystemParams, n: f64) -> f64 {
    let (a3, a2, a1, _) = symmetric_cubic_coefficients(params);
    (3.0 * a3 * n + 2.0 * a2) * n + a1
}

/// Drive strengths `|F|` at the turning points of the symmetric branch, ascending.
///
/// Between the two values the symmetric cubic has three positive roots. Empty when the branch
/// is monotonic.
pub fn symmetric_turning_points(params: &SystemParams) -> Vec<f64> {
    let (a3, a2, a1, _) = symmetric_cubic_coefficients(params);
    let mut out: Vec<f64> = real_cubic_roots(0.0, 3.0 * a3, 2.0 * a2, a1)
        .into_iter()
        .filter(|n| *n > 0.0)
        .map(|n| (((a3 * n + a2) * n + a1) * n).max(0.0).sqrt())
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cubic_with_known_roots() {
        // (x-1)(x-2)(x-3)
        let r = real_cubic_roots(1.0, -6.0, 11.0, -6.0);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        // x³ + x + 1 has one real root near -0.6823278
        let r = real_cubic_roots(1.0, 0.0, 1.0, 1.0);
        assert_eq!(r.len(), 1);
        assert_abs_diff_eq!(r[0], -0.682_327_803_828_019_3, epsilon = 1e-13);
        // linear and quadratic degenerations
        assert_eq!(real_cubic_roots(0.0, 0.0, 2.0, -4.0), vec![2.0]);
        let r = real_cubic_roots(0.0, 1.0, -3.0, 2.0);
        assert_abs_diff_eq!(r[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r[1], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn single_cavity_s_curve_in_bistable_window() {
        let p = SystemParams::new(0.0, 0.6, 2.6, -3.0, 1.0).unwrap();
        let b = symmetric_branch(&p);
        assert_eq!(b.len(), 3);
        assert_eq!(b[0].stability, Stability::Stable);
        assert_eq!(b[1].stability, Stability::Unstable);
        assert_eq!(b[2].stability, Stability::Stable);
        for pt in &b {
            let n = pt.n;
            assert_abs_diff_eq!(n * (1.0 + (0.6 * n - 3.0).powi(2)), 2.6 * 2.6, epsilon = 1e-10);
            assert_eq!(symmetric_slope(&p, n) > 0.0, pt.stability == Stability::Stable);
        }
        let tp = symmetric_turning_points(&p);
        assert_eq!(tp.len(), 2);
        assert!(tp[0] < 2.6 && 2.6 < tp[1]);
    }

    #[test]
    fn linear_limit() {
        let p = SystemParams::new(0.2, 0.0, 1.5, -3.0, 1.0).unwrap();
        let b = symmetric_branch(&p);
        assert_eq!(b.len(), 1);
        let expected = 1.5 * 1.5 / (1.0 + 9.0 + 2.0 * 0.2 * 3.0 + 0.04);
        assert_abs_diff_eq!(b[0].n, expected, epsilon = 1e-14);
    }

    #[test]
    fn symmetric_state_is_a_fixed_point() {
        let p = SystemParams::new(0.1, 0.6, 2.6, -3.0, 1.0).unwrap();
        for pt in symmetric_branch(&p) {
            let s = symmetric_state(&p, pt.n);
            assert_abs_diff_eq!(s.n1(), pt.n, epsilon = 1e-10);
            let (d1, d2) = crate::semiclassical::dynamics::rhs(&p, &s);
            assert!(d1.norm() < 1e-10 && d2.norm() < 1e-10);
        }
    }
}
