//! Truncated two-mode Fock space, sparse operators and state containers.
//!
//! Basis states `|m1, m2⟩` with `0 ≤ m_i ≤ n_max` are indexed row-major:
//! `index = m1 (n_max + 1) + m2`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::SystemParams;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Product Fock basis of two cavities with a per-site photon cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockBasis {
    n_max: usize,
    dim: usize,
}

impl FockBasis {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::InvalidParameter("photon cutoff n_max must be at least 1".into()));
        }
        Ok(Self { n_max, dim: (n_max + 1) * (n_max + 1) })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self, m1: usize, m2: usize) -> usize {
        debug_assert!(m1 <= self.n_max && m2 <= self.n_max);
        m1 * (self.n_max + 1) + m2
    }

    pub fn occupations(&self, index: usize) -> (usize, usize) {
        (index / (self.n_max + 1), index % (self.n_max + 1))
    }

    /// Index of the state with the two sites exchanged.
    pub fn swapped_index(&self, index: usize) -> usize {
        let (m1, m2) = self.occupations(index);
        self.index(m2, m1)
    }

    /// Whether a basis state touches the cutoff on either site.
    pub fn at_cutoff(&self, index: usize) -> bool {
        let (m1, m2) = self.occupations(index);
        m1 == self.n_max || m2 == self.n_max
    }

    /// `m_site` for every basis index.
    pub fn site_occupations(&self, site: Site) -> Vec<f64> {
        (0..self.dim)
            .map(|i| {
                let (m1, m2) = self.occupations(i);
                match site {
                    Site::One => m1 as f64,
                    Site::Two => m2 as f64,
                }
            })
            .collect()
    }

    /// `m (m − 1)` on one site for every basis index: the diagonal of `a†² a²`.
    pub fn pair_occupations(&self, site: Site) -> Vec<f64> {
        self.site_occupations(site).into_iter().map(|m| m * (m - 1.0)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Site {
    One,
    Two,
}

impl Site {
    pub fn both() -> [Site; 2] {
        [Site::One, Site::Two]
    }
}

/// Compressed-sparse-row complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and exact zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside {dim}x{dim}");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut m = Self { dim, row_ptr, cols, vals };
        m.prune();
        m
    }

    fn prune(&mut self) {
        if self.vals.iter().all(|v| *v != ZERO) {
            return;
        }
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for r in 0..self.dim {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.vals[k] != ZERO {
                    cols.push(self.cols[k]);
                    vals.push(self.vals[k]);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        *self = Self { dim: self.dim, row_ptr, cols, vals };
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Non-zeros of one row as `(col, value)` pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    /// All non-zeros as `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.row(r).find(|&(cc, _)| cc == c).map(|(_, v)| v).unwrap_or(ZERO)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (r, c, s * v)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(self.dim, self.triplets().chain(other.triplets()).collect())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut t = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    t.push((r, c, a * b));
                }
            }
        }
        Self::from_triplets(self.dim, t)
    }

    /// Diagonal entries.
    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|r| self.get(r, r)).collect()
    }

    /// Copy with the diagonal removed.
    pub fn off_diagonal(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().filter(|&(r, c, _)| r != c).collect())
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        }
    }

    /// `out += A M` for a row-major dense `M` of the same dimension.
    pub fn mul_dense_add(&self, m: &[Complex64], out: &mut [Complex64]) {
        let n = self.dim;
        for r in 0..n {
            let out_row = &mut out[r * n..(r + 1) * n];
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let v = self.vals[k];
                let src = &m[self.cols[k] * n..(self.cols[k] + 1) * n];
                for (o, s) in out_row.iter_mut().zip(src) {
                    *o += v * s;
                }
            }
        }
    }

    pub fn to_dense(&self) -> Vec<Complex64> {
        let mut d = vec![ZERO; self.dim * self.dim];
        for (r, c, v) in self.triplets() {
            d[r * self.dim + c] += v;
        }
        d
    }

    /// Largest `|A − A†|` element.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.adjoint();
        self.add(&adj.scale(Complex64::new(-1.0, 0.0)))
            .triplets()
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max)
    }
}

/// Role of an assembled operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorRole {
    Annihilate(Site),
    Number(Site),
    Hamiltonian,
}

/// A named sparse operator on the two-mode space.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteOperator {
    pub role: OperatorRole,
    pub matrix: SparseMatrix,
}

/// `a_site` with `a |…m…⟩ = √m |…m−1…⟩`.
pub fn annihilation(basis: &FockBasis, site: Site) -> SiteOperator {
    let mut t = Vec::new();
    for i in 0..basis.dim() {
        let (m1, m2) = basis.occupations(i);
        match site {
            Site::One if m1 > 0 => t.push((basis.index(m1 - 1, m2), i, Complex64::new((m1 as f64).sqrt(), 0.0))),
            Site::Two if m2 > 0 => t.push((basis.index(m1, m2 - 1), i, Complex64::new((m2 as f64).sqrt(), 0.0))),
            _ => {}
        }
    }
    SiteOperator { role: OperatorRole::Annihilate(site), matrix: SparseMatrix::from_triplets(basis.dim(), t) }
}

/// `a_site† a_site`.
pub fn number(basis: &FockBasis, site: Site) -> SiteOperator {
    let t = basis
        .site_occupations(site)
        .into_iter()
        .enumerate()
        .map(|(i, m)| (i, i, Complex64::new(m, 0.0)))
        .collect();
    SiteOperator { role: OperatorRole::Number(site), matrix: SparseMatrix::from_triplets(basis.dim(), t) }
}

/// Dimer Hamiltonian in the drive frame:
/// `−J(a1†a2 + a2†a1) + U/2 Σ a_i†² a_i² + Δω Σ n_i + F Σ a_i† + F* Σ a_i`.
pub fn build_hamiltonian(params: &SystemParams, basis: &FockBasis) -> SiteOperator {
    let (j, u, dw, f) = (params.j(), params.u(), params.delta_omega(), params.f());
    let nm = basis.n_max();
    let mut t = Vec::new();
    for i in 0..basis.dim() {
        let (m1, m2) = basis.occupations(i);
        let (x1, x2) = (m1 as f64, m2 as f64);
        let diag = 0.5 * u * (x1 * (x1 - 1.0) + x2 * (x2 - 1.0)) + dw * (x1 + x2);
        t.push((i, i, Complex64::new(diag, 0.0)));
        // F a1† : |m1⟩ → √(m1+1) |m1+1⟩ ; F* a1 is its adjoint.
        if m1 < nm {
            let k = basis.index(m1 + 1, m2);
            let amp = (x1 + 1.0).sqrt();
            t.push((k, i, f * amp));
            t.push((i, k, f.conj() * amp));
        }
        if m2 < nm {
            let k = basis.index(m1, m2 + 1);
            let amp = (x2 + 1.0).sqrt();
            t.push((k, i, f * amp));
            t.push((i, k, f.conj() * amp));
        }
        // −J a1† a2 : |m1, m2⟩ → √(m1+1)√m2 |m1+1, m2−1⟩ ; a2† a1 is its adjoint.
        if m1 < nm && m2 > 0 {
            let k = basis.index(m1 + 1, m2 - 1);
            let amp = -j * ((x1 + 1.0) * x2).sqrt();
            t.push((k, i, Complex64::new(amp, 0.0)));
            t.push((i, k, Complex64::new(amp, 0.0)));
        }
    }
    SiteOperator { role: OperatorRole::Hamiltonian, matrix: SparseMatrix::from_triplets(basis.dim(), t) }
}

/// Dense density matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn from_data(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: data.len() });
        }
        Ok(Self { dim, data })
    }

    /// Projector onto `|m1, m2⟩`.
    pub fn fock(basis: &FockBasis, m1: usize, m2: usize) -> Self {
        let mut rho = Self::zeros(basis.dim());
        let i = basis.index(m1, m2);
        rho.data[i * basis.dim() + i] = Complex64::new(1.0, 0.0);
        rho
    }

    pub fn vacuum(basis: &FockBasis) -> Self {
        Self::fock(basis, 0, 0)
    }

    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn pure(psi: &StateVector) -> Self {
        let n = psi.dim();
        let norm = psi.norm_sqr();
        let mut data = vec![ZERO; n * n];
        for (i, a) in psi.amplitudes().iter().enumerate() {
            for (j, b) in psi.amplitudes().iter().enumerate() {
                data[i * n + j] = a * b.conj() / norm;
            }
        }
        Self { dim: n, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Real diagonal (populations).
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `ρ ← (ρ + ρ†)/2`.
    pub fn hermitize(&mut self) {
        let n = self.dim;
        for i in 0..n {
            self.data[i * n + i].im = 0.0;
            for j in (i + 1)..n {
                let a = self.data[i * n + j];
                let b = self.data[j * n + i];
                let m = 0.5 * (a + b.conj());
                self.data[i * n + j] = m;
                self.data[j * n + i] = m.conj();
            }
        }
    }

    /// Largest `|ρ − ρ†|` element.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    /// Scales to unit trace.
    pub fn normalize_trace(&mut self) {
        let tr = self.trace().re;
        if tr != 0.0 {
            let s = 1.0 / tr;
            self.data.iter_mut().for_each(|z| *z *= s);
        }
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.dim;
        let m = nalgebra::DMatrix::from_fn(n, n, |i, j| 0.5 * (self.data[i * n + j] + self.data[j * n + i].conj()));
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// `P ρ P` with `P` the site-exchange permutation.
    pub fn swapped(&self, basis: &FockBasis) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let si = basis.swapped_index(i);
            for j in 0..n {
                out.data[si * n + basis.swapped_index(j)] = self.data[i * n + j];
            }
        }
        out
    }

    /// Frobenius distance to another density matrix.
    pub fn distance(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    /// Population of basis states at the cutoff on either site.
    pub fn cutoff_population(&self, basis: &FockBasis) -> f64 {
        (0..self.dim).filter(|&i| basis.at_cutoff(i)).map(|i| self.data[i * self.dim + i].re).sum()
    }
}

/// Dense state vector (not necessarily normalized).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Self {
        Self { amps }
    }

    pub fn fock(basis: &FockBasis, m1: usize, m2: usize) -> Self {
        let mut amps = vec![ZERO; basis.dim()];
        amps[basis.index(m1, m2)] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn vacuum(basis: &FockBasis) -> Self {
        Self::fock(basis, 0, 0)
    }

    /// Truncated, normalized product coherent state `|α1⟩ ⊗ |α2⟩`.
    pub fn coherent(basis: &FockBasis, alpha1: Complex64, alpha2: Complex64) -> Self {
        let site = |alpha: Complex64| {
            let mut c = Vec::with_capacity(basis.n_max() + 1);
            let mut v = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
            for m in 0..=basis.n_max() {
                if m > 0 {
                    v = v * alpha / (m as f64).sqrt();
                }
                c.push(v);
            }
            c
        };
        let (c1, c2) = (site(alpha1), site(alpha2));
        let mut amps = vec![ZERO; basis.dim()];
        for (i, a) in amps.iter_mut().enumerate() {
            let (m1, m2) = basis.occupations(i);
            *a = c1[m1] * c2[m2];
        }
        let mut s = Self { amps };
        s.normalize();
        s
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            let s = 1.0 / n;
            self.amps.iter_mut().for_each(|z| *z *= s);
        }
    }
}

/// Expectation values of sparse operators.
pub trait Expectation {
    fn expectation(&self, op: &SparseMatrix) -> Result<Complex64>;
}

impl Expectation for DensityMatrix {
    /// `tr(ρ O)`.
    fn expectation(&self, op: &SparseMatrix) -> Result<Complex64> {
        if op.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: op.dim() });
        }
        // tr(ρO) = Σ_{r,c} ρ_{c r} O_{r c}
        Ok(op.triplets().map(|(r, c, v)| self.data[c * self.dim + r] * v).sum())
    }
}

impl Expectation for StateVector {
    /// `⟨ψ|O|ψ⟩ / ⟨ψ|ψ⟩`.
    fn expectation(&self, op: &SparseMatrix) -> Result<Complex64> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: op.dim() });
        }
        let mut y = vec![ZERO; self.dim()];
        op.mul_vec(&self.amps, &mut y);
        let num: Complex64 = self.amps.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
        Ok(num / self.norm_sqr())
    }
}
