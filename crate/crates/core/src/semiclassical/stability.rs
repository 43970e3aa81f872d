//! Linear stability of mean-field fixed points.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;

use super::dynamics::MeanFieldState;
use crate::model::SystemParams;

/// Half-width of the band of eigenvalue real parts treated as marginal.
pub const MARGINAL_BAND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stability {
    Stable,
    Unstable,
    Marginal,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Unstable => "unstable",
            Stability::Marginal => "marginal",
        }
    }

    /// Classifies a spectrum of the fluctuation matrix `A` (fluctuations obey `dδ/dt = −A δ`).
    pub fn classify(eigenvalues: &[Complex64]) -> Self {
        if eigenvalues.iter().all(|l| l.re > MARGINAL_BAND) {
            Stability::Stable
        } else if eigenvalues.iter().any(|l| l.re < -MARGINAL_BAND) {
            Stability::Unstable
        } else {
            Stability::Marginal
        }
    }
}

/// Fluctuation matrix `A` acting on `(δα1, δα1*, δα2, δα2*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityMatrix {
    pub a: Matrix4<Complex64>,
}

impl StabilityMatrix {
    /// Linearizes the mean-field flow around `state`.
    ///
    /// The hopping entries carry the signs that follow from `+iJ α_j` in the
    /// flow: `A[0][2] = A[2][0] = −iJ` and `A[1][3] = A[3][1] = +iJ`.
    pub fn new(params: &SystemParams, state: &MeanFieldState) -> Self {
        let kappa = params.kappa();
        let u = params.u();
        let i = Complex64::new(0.0, 1.0);
        let ij = i * params.j();
        let zero = Complex64::new(0.0, 0.0);
        let (a1, a2) = (state.alpha1, state.alpha2);
        let (n1, n2) = (a1.norm_sqr(), a2.norm_sqr());
        #[rustfmt::skip]
        let a = Matrix4::new(
            kappa + i * 2.0 * n1 * u,      i * a1 * a1 * u,                    -ij,                        zero,
            -i * a1.conj() * a1.conj() * u, kappa.conj() - i * 2.0 * n1 * u,   zero,                       ij,
            -ij,                            zero,                              kappa + i * 2.0 * n2 * u,   i * a2 * a2 * u,
            zero,                           ij,                                -i * a2.conj() * a2.conj() * u, kappa.conj() - i * 2.0 * n2 * u,
        );
        Self { a }
    }

    pub fn trace(&self) -> Complex64 {
        self.a.trace()
    }

    pub fn determinant(&self) -> Complex64 {
        self.a.determinant()
    }

    /// Eigenvalues from a complex Schur decomposition, sorted by real part.
    pub fn eigenvalues(&self) -> [Complex64; 4] {
        let ev: Vector4<Complex64> = self
            .a
            .schur()
            .eigenvalues()
            .unwrap_or_else(|| self.real_form_eigenvalues());
        let mut out = [ev[0], ev[1], ev[2], ev[3]];
        out.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        out
    }

    /// Spectrum via the real 4×4 matrix similar to `A` in the basis
    /// `(Re δα1, Im δα1, Re δα2, Im δα2)`.
    fn real_form_eigenvalues(&self) -> Vector4<Complex64> {
        let m = self.real_form();
        m.complex_eigenvalues()
    }

    /// The real representation `T A T⁻¹` of `A`.
    pub fn real_form(&self) -> Matrix4<f64> {
        // δα = x + i y, δα* = x − i y; so (δα, δα*) = S (x, y) with S = [[1, i], [1, −i]].
        let mut out = Matrix4::zeros();
        for bi in 0..2 {
            for bj in 0..2 {
                let p = self.a[(2 * bi, 2 * bj)];
                let q = self.a[(2 * bi, 2 * bj + 1)];
                // Row of A acting on δα: dδα = p δα + q δα*; real and imaginary parts give the
                // real block [[Re(p+q), −Im(p−q)], [Im(p+q), Re(p−q)]].
                let s = p + q;
                let t = p - q;
                out[(2 * bi, 2 * bj)] = s.re;
                out[(2 * bi, 2 * bj + 1)] = -t.im;
                out[(2 * bi + 1, 2 * bj)] = s.im;
                out[(2 * bi + 1, 2 * bj + 1)] = t.re;
            }
        }
        out
    }

    pub fn classify(&self) -> Stability {
        Stability::classify(&self.eigenvalues())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::semiclassical::dynamics::rhs;
    use approx::assert_abs_diff_eq;

    /// Largest distance under a greedy nearest-neighbour matching of two spectra.
    pub(crate) fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
        let mut pool: Vec<Complex64> = b.to_vec();
        let mut worst: f64 = 0.0;
        for x in a {
            let (k, d) = pool
                .iter()
                .enumerate()
                .map(|(k, y)| (k, (x - y).norm()))
                .min_by(|p, q| p.1.total_cmp(&q.1))
                .unwrap();
            worst = worst.max(d);
            pool.swap_remove(k);
        }
        worst
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        v
    }

    /// Central-difference Jacobian of the real flow; `A` is similar to its negative.
    fn finite_difference_spectrum(p: &SystemParams, s: &MeanFieldState) -> Vec<Complex64> {
        let h = 1e-6;
        let base = s.to_real();
        let mut jac = Matrix4::<f64>::zeros();
        for k in 0..4 {
            let mut plus = base;
            let mut minus = base;
            plus[k] += h;
            minus[k] -= h;
            let fp = rhs(p, &MeanFieldState::from_real(plus));
            let fm = rhs(p, &MeanFieldState::from_real(minus));
            let dp = [fp.0.re, fp.0.im, fp.1.re, fp.1.im];
            let dm = [fm.0.re, fm.0.im, fm.1.re, fm.1.im];
            for r in 0..4 {
                jac[(r, k)] = -(dp[r] - dm[r]) / (2.0 * h);
            }
        }
        sorted(jac.complex_eigenvalues().iter().copied().collect())
    }

    #[test]
    fn printed_entries() {
        let p = SystemParams::new(0.1, 0.6, 2.6, -3.0, 1.0).unwrap();
        let s = MeanFieldState::from_polar(2.0, 0.3, 1.0, -0.2);
        let m = StabilityMatrix::new(&p, &s);
        let i = Complex64::new(0.0, 1.0);
        assert_eq!(m.a[(0, 0)], p.kappa() + i * 2.0 * s.n1() * 0.6);
        assert_eq!(m.a[(0, 1)], i * s.alpha1 * s.alpha1 * 0.6);
        assert_eq!(m.a[(1, 1)], p.kappa().conj() - i * 2.0 * s.n1() * 0.6);
        assert_eq!(m.a[(3, 3)], p.kappa().conj() - i * 2.0 * s.n2() * 0.6);
        assert_eq!(m.a[(0, 3)], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn origin_spectrum_has_real_part_gamma() {
        let p = SystemParams::new(0.4, 0.6, 0.0, -3.0, 1.0).unwrap();
        let m = StabilityMatrix::new(&p, &MeanFieldState::vacuum());
        let ev = m.eigenvalues();
        for l in ev {
            assert_abs_diff_eq!(l.re, 1.0, epsilon = 1e-12);
        }
        let mut ims: Vec<f64> = ev.iter().map(|l| l.im).collect();
        ims.sort_by(f64::total_cmp);
        // ±(Δω ± J)
        for (got, want) in ims.iter().zip([-3.4, -2.6, 2.6, 3.4]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        assert_eq!(m.classify(), Stability::Stable);
    }

    #[test]
    fn spectrum_matches_finite_difference_jacobian() {
        let p = SystemParams::new(0.3, 0.6, 2.6, -3.0, 1.0).unwrap();
        for s in [
            MeanFieldState::from_polar(1.5, 0.7, 4.0, -1.1),
            MeanFieldState::from_polar(0.2, 2.0, 0.3, 2.5),
            MeanFieldState::from_polar(6.0, -0.4, 6.0, -0.4),
        ] {
            let m = StabilityMatrix::new(&p, &s);
            let ev = m.eigenvalues();
            let fd = finite_difference_spectrum(&p, &s);
            assert!(spectrum_distance(&ev, &fd) < 1e-6, "{ev:?} vs {fd:?}");
            let real: Vec<Complex64> = m.real_form().complex_eigenvalues().iter().copied().collect();
            assert!(spectrum_distance(&ev, &real) < 1e-9, "{ev:?} vs {real:?}");
        }
    }

    #[test]
    fn hurwitz_data_consistent_with_spectrum() {
        let p = SystemParams::new(0.1, 0.6, 2.6, -3.0, 1.0).unwrap();
        let m = StabilityMatrix::new(&p, &MeanFieldState::from_polar(3.0, 0.1, 2.0, 0.5));
        let ev = m.eigenvalues();
        let tr: Complex64 = ev.iter().sum();
        let det: Complex64 = ev.iter().product();
        assert!((tr - m.trace()).norm() < 1e-10);
        assert!((det - m.determinant()).norm() < 1e-8 * (1.0 + det.norm()));
        // A is similar to a real matrix, so trace and determinant are real.
        assert!(m.trace().im.abs() < 1e-12);
        assert!(m.determinant().im.abs() < 1e-9 * (1.0 + det.norm()));
    }

    #[test]
    fn classification_bands() {
        let c = |re: f64| Complex64::new(re, 0.0);
        assert_eq!(Stability::classify(&[c(1.0), c(2e-8)]), Stability::Stable);
        assert_eq!(Stability::classify(&[c(1.0), c(-2e-8)]), Stability::Unstable);
        assert_eq!(Stability::classify(&[c(1.0), c(5e-9)]), Stability::Marginal);
    }
}
