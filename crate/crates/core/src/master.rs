//! Lindblad evolution of the dimer density matrix and its steady state.
//!
//! `dρ/dt = −i[H, ρ] + γ Σ_i (2 a_i ρ a_i† − a_i†a_i ρ − ρ a_i†a_i)`,
//! i.e. jump operators `sqrt(2γ) a_i`.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::{build_hamiltonian, DensityMatrix, FockBasis, Site};
use crate::model::SystemParams;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Cutoff population above which a steady state is flagged as under-resolved.
pub const CUTOFF_TAIL_LIMIT: f64 = 1e-6;

/// Lindblad generator assembled for repeated application.
///
/// The Hamiltonian is split into its diagonal (merged with the anti-commutator
/// of the loss term) and its off-diagonal part `V` (drive and hopping). Inputs
/// are assumed Hermitian: only the upper triangle of `L(ρ)` is computed and
/// the lower one is mirrored.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    basis: FockBasis,
    gamma: f64,
    /// `−i H_ii − γ (m1 + m2)` per basis state.
    diag: Vec<Complex64>,
    /// `V` by diagonals: `(d, −i V_{k,k+d}, +i conj(V_{k,k+d}))` over `k`,
    /// zero where `k + d` is out of range.
    bands: Vec<(isize, Vec<Complex64>, Vec<Complex64>)>,
    /// `sqrt(m_s + 1)` for raising site `s`, or 0 at the cutoff.
    raise: [Vec<f64>; 2],
    stride: [usize; 2],
}

impl Liouvillian {
    pub fn new(params: &SystemParams, basis: &FockBasis) -> Self {
        let h = build_hamiltonian(params, basis).matrix;
        let gamma = params.gamma();
        let diag = h
            .diagonal()
            .iter()
            .enumerate()
            .map(|(i, hii)| {
                let (m1, m2) = basis.occupations(i);
                -I * hii - gamma * (m1 + m2) as f64
            })
            .collect();
        let n = basis.dim();
        let mut bands: Vec<(isize, Vec<Complex64>, Vec<Complex64>)> = Vec::new();
        for (r, c, x) in h.off_diagonal().triplets() {
            let d = c as isize - r as isize;
            let band = match bands.iter().position(|b| b.0 == d) {
                Some(p) => &mut bands[p],
                None => {
                    bands.push((d, vec![ZERO; n], vec![ZERO; n]));
                    bands.last_mut().unwrap()
                }
            };
            band.1[r] = -I * x;
            band.2[r] = I * x.conj();
        }
        bands.sort_by_key(|b| b.0);
        let raise_for = |site: Site| -> Vec<f64> {
            (0..basis.dim())
                .map(|i| {
                    let (m1, m2) = basis.occupations(i);
                    let m = if site == Site::One { m1 } else { m2 };
                    if m < basis.n_max() {
                        ((m + 1) as f64).sqrt()
                    } else {
                        0.0
                    }
                })
                .collect()
        };
        Self {
            basis: *basis,
            gamma,
            diag,
            bands,
            raise: [raise_for(Site::One), raise_for(Site::Two)],
            stride: [basis.n_max() + 1, 1],
        }
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    /// Entries of row `r` of `V` as `(column, value)`.
    fn v_row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.bands.iter().filter_map(move |(d, m, _)| {
            let v = I * m[r];
            (v != ZERO).then(|| ((r as isize + d) as usize, v))
        })
    }

    /// `out = L(ρ)` on row-major data of a Hermitian `ρ`.
    pub fn apply_into(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.basis.dim();
        debug_assert_eq!(rho.len(), n * n);
        debug_assert_eq!(out.len(), n * n);
        let two_gamma = 2.0 * self.gamma;
        for i in 0..n {
            let hi = self.diag[i];
            let row = &rho[i * n..(i + 1) * n];
            let out_row = &mut out[i * n..(i + 1) * n];
            for j in i..n {
                out_row[j] = (hi + self.diag[j].conj()) * row[j];
            }
            for (d, minus_i_v, i_vc) in &self.bands {
                // −i V ρ, row i: V_{i,i+d} ρ_{i+d,·}
                let w = minus_i_v[i];
                if w != ZERO {
                    let k = (i as isize + d) as usize;
                    let src = &rho[k * n + i..(k + 1) * n];
                    for (o, s) in out_row[i..].iter_mut().zip(src) {
                        *o += w * s;
                    }
                }
                // +i ρ V, element (i, j): ρ_{i,j+d} conj(V_{j,j+d})
                let lo = i.max((-d).max(0) as usize);
                let hi = if *d > 0 { n - *d as usize } else { n };
                if lo < hi {
                    let src = &row[(lo as isize + d) as usize..(hi as isize + d) as usize];
                    for ((o, s), c) in out_row[lo..hi].iter_mut().zip(src).zip(&i_vc[lo..hi]) {
                        *o += c * s;
                    }
                }
            }
            // 2γ Σ_s a_s ρ a_s†: element (i, j) picks up ρ(i + e_s, j + e_s).
            for s in 0..2 {
                let (w, e) = (&self.raise[s], self.stride[s]);
                let wi = w[i];
                if wi == 0.0 {
                    continue;
                }
                let wi = two_gamma * wi;
                let src = &rho[(i + e) * n + i + e..(i + e) * n + n];
                for ((o, r), wj) in out_row[i..n - e].iter_mut().zip(src).zip(&w[i..n - e]) {
                    *o += (wi * wj) * r;
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                out[i * n + j] = out[j * n + i].conj();
            }
        }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> DensityMatrix {
        let n = self.basis.dim();
        let mut out = DensityMatrix::zeros(n);
        self.apply_into(rho.data(), out.data_mut());
        out
    }

    /// Gershgorin bound on the spectral radius of the generator.
    pub fn spectral_bound(&self) -> f64 {
        let n = self.basis.dim();
        let vsum: Vec<f64> = (0..n).map(|r| self.v_row(r).map(|(_, v)| v.norm()).sum()).collect();
        let mut bound: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let jump: f64 = (0..2).map(|s| 2.0 * self.gamma * self.raise[s][i] * self.raise[s][j]).sum();
                let r = (self.diag[i] + self.diag[j].conj()).norm() + vsum[i] + vsum[j] + jump;
                bound = bound.max(r);
            }
        }
        bound
    }

    /// An RK4 step inside the stability region for this generator.
    pub fn stable_rk4_step(&self) -> f64 {
        2.5 / self.spectral_bound()
    }

    /// The generator as a sparse `dim² × dim²` matrix acting on row-major `vec(ρ)`.
    pub fn superoperator_triplets(&self) -> Vec<(usize, usize, Complex64)> {
        let n = self.basis.dim();
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                t.push((i * n + j, i * n + j, self.diag[i] + self.diag[j].conj()));
            }
        }
        for i in 0..n {
            for (k, v) in self.v_row(i) {
                for j in 0..n {
                    // −i V_ik ρ_kj
                    t.push((i * n + j, k * n + j, -I * v));
                    // +i ρ_ji V_ik  (row j, column k of the output)
                    t.push((j * n + k, j * n + i, I * v));
                }
            }
        }
        for s in 0..2 {
            let (w, e) = (&self.raise[s], self.stride[s]);
            for i in 0..n {
                if w[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    if w[j] == 0.0 {
                        continue;
                    }
                    t.push((i * n + j, (i + e) * n + (j + e), Complex64::new(2.0 * self.gamma * w[i] * w[j], 0.0)));
                }
            }
        }
        t
    }
}

/// `dρ/dt` for one density matrix.
pub fn lindblad_rhs(params: &SystemParams, basis: &FockBasis, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: rho.dim() });
    }
    Ok(Liouvillian::new(params, basis).apply(rho))
}

/// Steady state and its on-site observables.
#[derive(Debug, Clone)]
pub struct MasterRunResult {
    pub rho_ss: DensityMatrix,
    pub n1: f64,
    pub n2: f64,
    /// `⟨a1†² a1²⟩`, unnormalized.
    pub big_g2_1: f64,
    pub big_g2_2: f64,
    /// `⟨a_i†² a_i²⟩ / n_i²`; NaN when `n_i = 0`.
    pub g2_1: f64,
    pub g2_2: f64,
    pub converged: bool,
    /// `‖L(ρ)‖_F` of the returned state.
    pub residual: f64,
    /// Propagation time used (0 for the direct solver).
    pub time: f64,
    /// Population of basis states with `m1 = n_max` or `m2 = n_max`.
    pub cutoff_population: f64,
}

impl MasterRunResult {
    pub fn from_rho(basis: &FockBasis, rho: DensityMatrix, converged: bool, residual: f64, time: f64) -> Self {
        let pops = rho.populations();
        let dot = |w: &[f64]| pops.iter().zip(w).map(|(p, x)| p * x).sum::<f64>();
        let n1 = dot(&basis.site_occupations(Site::One));
        let n2 = dot(&basis.site_occupations(Site::Two));
        let big_g2_1 = dot(&basis.pair_occupations(Site::One));
        let big_g2_2 = dot(&basis.pair_occupations(Site::Two));
        let norm = |g: f64, n: f64| if n > 0.0 { g / (n * n) } else { f64::NAN };
        let cutoff_population = rho.cutoff_population(basis);
        Self {
            g2_1: norm(big_g2_1, n1),
            g2_2: norm(big_g2_2, n2),
            n1,
            n2,
            big_g2_1,
            big_g2_2,
            rho_ss: rho,
            converged,
            residual,
            time,
            cutoff_population,
        }
    }

    /// Site-averaged occupation.
    pub fn n(&self) -> f64 {
        0.5 * (self.n1 + self.n2)
    }

    /// Site-averaged `⟨a†² a²⟩`.
    pub fn big_g2(&self) -> f64 {
        0.5 * (self.big_g2_1 + self.big_g2_2)
    }

    /// Site-averaged normalized correlator.
    pub fn g2(&self) -> f64 {
        0.5 * (self.g2_1 + self.g2_2)
    }

    /// False when the truncation tail is too heavy for the cutoff to be trusted.
    pub fn cutoff_adequate(&self) -> bool {
        self.cutoff_population < CUTOFF_TAIL_LIMIT
    }
}

/// Controls for [`evolve_to_steady`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub dt: f64,
    pub tol: f64,
    pub t_max: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { dt: 2e-3, tol: 1e-8, t_max: 500.0 }
    }
}

/// RK4 propagation until `‖dρ/dt‖_F < tol` or `t = t_max`.
///
/// The state is re-Hermitized and trace-normalized after every step.
pub fn evolve_to_steady(
    params: &SystemParams,
    basis: &FockBasis,
    rho0: &DensityMatrix,
    options: &EvolveOptions,
) -> Result<MasterRunResult> {
    if !(options.dt > 0.0) || !(options.t_max > 0.0) || !(options.tol > 0.0) {
        return Err(Error::InvalidParameter("dt, tol and t_max must be positive".into()));
    }
    if rho0.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: rho0.dim() });
    }
    let liou = Liouvillian::new(params, basis);
    let n = basis.dim();
    let len = n * n;
    let dt = options.dt;
    let mut rho = rho0.clone();
    rho.hermitize();
    rho.normalize_trace();
    let mut k1 = vec![ZERO; len];
    let mut k2 = vec![ZERO; len];
    let mut k3 = vec![ZERO; len];
    let mut k4 = vec![ZERO; len];
    let mut tmp = vec![ZERO; len];
    let mut t = 0.0;
    let residual_of = |k: &[Complex64]| k.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    loop {
        liou.apply_into(rho.data(), &mut k1);
        let residual = residual_of(&k1);
        if residual < options.tol {
            return Ok(MasterRunResult::from_rho(basis, rho, true, residual, t));
        }
        if t >= options.t_max {
            return Ok(MasterRunResult::from_rho(basis, rho, false, residual, t));
        }
        let r = rho.data();
        for ((o, x), k) in tmp.iter_mut().zip(r).zip(&k1) {
            *o = x + 0.5 * dt * k;
        }
        liou.apply_into(&tmp, &mut k2);
        for ((o, x), k) in tmp.iter_mut().zip(r).zip(&k2) {
            *o = x + 0.5 * dt * k;
        }
        liou.apply_into(&tmp, &mut k3);
        for ((o, x), k) in tmp.iter_mut().zip(r).zip(&k3) {
            *o = x + dt * k;
        }
        liou.apply_into(&tmp, &mut k4);
        let w = dt / 6.0;
        for (i, x) in rho.data_mut().iter_mut().enumerate() {
            *x += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        rho.hermitize();
        rho.normalize_trace();
        t += dt;
    }
}

/// Largest Hilbert-space dimension accepted by [`steady_state_direct`].
pub const DIRECT_MAX_DIM: usize = 256;

/// Steady state from a sparse LU solve of `L vec(ρ) = 0` with the
/// `ρ(0,0)` equation replaced by `tr ρ = 1`.
pub fn steady_state_direct(params: &SystemParams, basis: &FockBasis) -> Result<MasterRunResult> {
    steady_state_direct_with_limit(params, basis, DIRECT_MAX_DIM)
}

/// [`steady_state_direct`] with an explicit dimension limit.
pub fn steady_state_direct_with_limit(params: &SystemParams, basis: &FockBasis, max_dim: usize) -> Result<MasterRunResult> {
    if basis.dim() > max_dim {
        return Err(Error::InvalidParameter(format!(
            "dimension {} exceeds the direct-solver limit {max_dim}; use evolve_to_steady",
            basis.dim()
        )));
    }
    let liou = Liouvillian::new(params, basis);
    let n = basis.dim();
    let size = n * n;
    let mut triplets: Vec<Triplet<usize, usize, Complex64>> = liou
        .superoperator_triplets()
        .into_iter()
        .filter(|&(r, _, _)| r != 0)
        .map(|(r, c, v)| Triplet::new(r, c, v))
        .collect();
    for k in 0..n {
        triplets.push(Triplet::new(0, k * n + k, Complex64::new(1.0, 0.0)));
    }
    let matrix = SparseColMat::<usize, Complex64>::try_new_from_triplets(size, size, &triplets)
        .map_err(|e| Error::SingularSystem(format!("{e:?}")))?;
    let lu = matrix
        .sp_lu()
        .map_err(|e| Error::SingularSystem(format!("{e:?}; use evolve_to_steady instead")))?;
    let rhs = faer::Col::<Complex64>::from_fn(size, |i| if i == 0 { Complex64::new(1.0, 0.0) } else { ZERO });
    let x = lu.solve(&rhs);
    let data: Vec<Complex64> = (0..size).map(|i| x[i]).collect();
    if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularSystem("non-finite solution".into()));
    }
    let mut rho = DensityMatrix::from_data(n, data)?;
    rho.hermitize();
    rho.normalize_trace();
    let residual = liou.apply(&rho).frobenius_norm();
    Ok(MasterRunResult::from_rho(basis, rho, true, residual, 0.0))
}

/// Bytes the GMRES basis may occupy.
pub const KRYLOV_MEMORY_BUDGET: usize = 1 << 31;

/// Controls for [`steady_state_krylov`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    /// Target `‖b − A x‖` of the trace-constrained system (`‖b‖ = 1`).
    pub tol: f64,
    /// Krylov subspace size before restarting; clamped so the basis fits in
    /// [`KRYLOV_MEMORY_BUDGET`].
    pub restart: usize,
    pub max_iterations: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { tol: 1e-11, restart: 300, max_iterations: 3000 }
    }
}

impl Liouvillian {
    /// Trace-constrained generator: `L(x)` with the `(0,0)` entry replaced by `tr x`.
    fn constrained_apply(&self, x: &[Complex64], out: &mut [Complex64]) {
        self.apply_into(x, out);
        let n = self.basis.dim();
        out[0] = (0..n).map(|k| x[k * n + k]).sum();
    }

    /// Solves `P y = r` where `P` keeps the diagonal and jump parts of the
    /// constrained generator. `P` is triangular in Fock ordering: the jump term
    /// only reaches higher occupations and the trace row is resolved last.
    fn precondition_into(&self, r: &[Complex64], y: &mut [Complex64]) {
        let n = self.basis.dim();
        let two_gamma = 2.0 * self.gamma;
        for i in (0..n).rev() {
            for j in (i..n).rev() {
                if i == 0 && j == 0 {
                    continue;
                }
                let mut s = r[i * n + j];
                for t in 0..2 {
                    let w = self.raise[t][i] * self.raise[t][j];
                    if w != 0.0 {
                        let e = self.stride[t];
                        s -= two_gamma * w * y[(i + e) * n + j + e];
                    }
                }
                y[i * n + j] = s / (self.diag[i] + self.diag[j].conj());
            }
        }
        y[0] = r[0] - (1..n).map(|k| y[k * n + k]).sum::<Complex64>();
        for i in 0..n {
            for j in 0..i {
                y[i * n + j] = y[j * n + i].conj();
            }
        }
    }
}

fn real_dot(x: &[Complex64], y: &[Complex64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a.re * b.re + a.im * b.im).sum()
}

fn axpy(alpha: f64, x: &[Complex64], y: &mut [Complex64]) {
    for (b, a) in y.iter_mut().zip(x) {
        *b += alpha * a;
    }
}

/// Steady state by restarted, right-preconditioned GMRES on the
/// trace-constrained generator.
///
/// Iterates live in the real vector space of Hermitian matrices, so every
/// Krylov vector stays Hermitian. `initial` seeds the iteration (e.g. the
/// solution at a neighbouring drive value).
pub fn steady_state_krylov(
    params: &SystemParams,
    basis: &FockBasis,
    initial: Option<&DensityMatrix>,
    options: &KrylovOptions,
) -> Result<MasterRunResult> {
    if !(options.tol > 0.0) || options.restart == 0 || options.max_iterations == 0 {
        return Err(Error::InvalidParameter("tol, restart and max_iterations must be positive".into()));
    }
    let liou = Liouvillian::new(params, basis);
    let n = basis.dim();
    let len = n * n;
    let m = options.restart.min((KRYLOV_MEMORY_BUDGET / (len * 16)).max(10));
    let mut b = vec![ZERO; len];
    b[0] = Complex64::new(1.0, 0.0);

    let mut x = vec![ZERO; len];
    match initial {
        Some(rho) => {
            if rho.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: rho.dim() });
            }
            let mut rho = rho.clone();
            rho.hermitize();
            x.copy_from_slice(rho.data());
        }
        None => liou.precondition_into(&b, &mut x),
    }

    let mut basis_vecs: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
    let mut z = vec![ZERO; len];
    let mut w = vec![ZERO; len];
    let mut h = vec![vec![0.0; m]; m + 1];
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < options.max_iterations {
        liou.constrained_apply(&x, &mut w);
        let mut r: Vec<Complex64> = b.iter().zip(&w).map(|(bi, wi)| bi - wi).collect();
        let beta = real_dot(&r, &r).sqrt();
        if beta < options.tol {
            converged = true;
            break;
        }
        r.iter_mut().for_each(|v| *v /= beta);
        basis_vecs.clear();
        basis_vecs.push(r);
        g.iter_mut().for_each(|v| *v = 0.0);
        g[0] = beta;
        let mut k_done = 0;
        for k in 0..m {
            liou.precondition_into(&basis_vecs[k], &mut z);
            liou.constrained_apply(&z, &mut w);
            for (j, v) in basis_vecs.iter().enumerate() {
                let hj = real_dot(&w, v);
                h[j][k] = hj;
                axpy(-hj, v, &mut w);
            }
            let hk1 = real_dot(&w, &w).sqrt();
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let rho_k = h[k][k].hypot(hk1);
            cs[k] = h[k][k] / rho_k;
            sn[k] = hk1 / rho_k;
            h[k][k] = rho_k;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            iterations += 1;
            k_done = k + 1;
            if g[k + 1].abs() < options.tol || hk1 == 0.0 || iterations >= options.max_iterations {
                break;
            }
            if k + 1 < m {
                w.iter_mut().for_each(|v| *v /= hk1);
                basis_vecs.push(w.clone());
            }
        }
        // Back-substitution for the least-squares coefficients.
        let mut y = vec![0.0; k_done];
        for i in (0..k_done).rev() {
            let s: f64 = (i + 1..k_done).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        w.iter_mut().for_each(|v| *v = ZERO);
        for (yi, v) in y.iter().zip(&basis_vecs) {
            axpy(*yi, v, &mut w);
        }
        liou.precondition_into(&w, &mut z);
        axpy(1.0, &z, &mut x);
    }
    if !converged {
        liou.constrained_apply(&x, &mut w);
        let r: f64 = b.iter().zip(&w).map(|(bi, wi)| (bi - wi).norm_sqr()).sum::<f64>().sqrt();
        converged = r < options.tol;
    }
    let mut rho = DensityMatrix::from_data(n, x)?;
    rho.hermitize();
    rho.normalize_trace();
    let residual = liou.apply(&rho).frobenius_norm();
    Ok(MasterRunResult::from_rho(basis, rho, converged, residual, 0.0))
}

/// Smallest cutoff tried by [`solve_with_tail_cutoff`].
pub const MIN_CUTOFF: usize = 6;

/// Initial Fock cutoff guess from the largest semiclassical symmetric-branch occupation.
pub fn suggested_cutoff(params: &SystemParams) -> usize {
    let n_sc = crate::semiclassical::symmetric_branch(params).iter().map(|p| p.n).fold(0.0, f64::max);
    let guess = n_sc + 3.0 * n_sc.sqrt() + 2.0;
    (guess.ceil() as usize).max(MIN_CUTOFF)
}

/// Krylov steady state with the cutoff raised in steps of 2 (from
/// [`suggested_cutoff`]) until the cutoff population drops below
/// `tail_limit · min(1, ⟨a†²a²⟩)`, so weakly driven pair correlators are
/// converged in relative terms too.
pub fn solve_with_tail_cutoff(
    params: &SystemParams,
    tail_limit: f64,
    max_cutoff: usize,
    options: &KrylovOptions,
) -> Result<(FockBasis, MasterRunResult)> {
    let mut n_max = suggested_cutoff(params).min(max_cutoff);
    loop {
        let basis = FockBasis::new(n_max)?;
        let r = steady_state_krylov(params, &basis, None, options)?;
        if r.cutoff_population < tail_limit * r.big_g2().min(1.0) || n_max >= max_cutoff {
            return Ok((basis, r));
        }
        n_max = (n_max + 2).min(max_cutoff);
    }
}
