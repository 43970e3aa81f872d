//! Monte-Carlo wavefunction unraveling of the dimer master equation.
//!
//! Between jumps `|ψ⟩` evolves under `H_eff = H − iγ(n̂₁ + n̂₂)` without
//! renormalization; a jump through `sqrt(2γ) a_i` fires once `‖ψ‖²` drops
//! below a uniform threshold.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fockspace::{build_hamiltonian, FockBasis, Site, StateVector};
use crate::model::SystemParams;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest per-step jump probability before the step is subdivided.
pub const MAX_JUMP_PROBABILITY: f64 = 0.1;
/// Squared norm below which a trajectory is declared lost.
pub const NORM_FLOOR: f64 = 1e-250;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    pub n_traj: usize,
    pub t_final: f64,
    pub dt: f64,
    pub seed: u64,
    pub sample_interval: f64,
    /// Leading fraction of `t_final` excluded from time averages and statistics.
    pub transient_fraction: f64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self { n_traj: 200, t_final: 2000.0, dt: 1e-2, seed: 0, sample_interval: 1.0, transient_fraction: 0.2 }
    }
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_traj == 0 {
            return Err(Error::InvalidParameter("n_traj must be at least 1".into()));
        }
        for (name, v) in [("t_final", self.t_final), ("dt", self.dt), ("sample_interval", self.sample_interval)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.transient_fraction) {
            return Err(Error::InvalidParameter("transient_fraction must lie in [0, 1)".into()));
        }
        Ok(())
    }

    /// Start of the averaging window.
    pub fn t_transient(&self) -> f64 {
        self.transient_fraction * self.t_final
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub channel: Site,
    /// `⟨n̂₁⟩` right after the jump.
    pub n1_post: f64,
    pub n2_post: f64,
}

impl JumpEvent {
    pub fn dn_post(&self) -> f64 {
        self.n1_post - self.n2_post
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub n1: f64,
    pub n2: f64,
}

/// Time averages over `[t_transient, t_final]` for a single trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TimeAverages {
    pub n1: f64,
    pub n2: f64,
    pub big_g2_1: f64,
    pub big_g2_2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub seed: u64,
    /// RNG stream index (the trajectory's position in the ensemble).
    pub stream: u64,
    pub t_final: f64,
    pub t_transient: f64,
    pub jumps: Vec<JumpEvent>,
    pub samples: Vec<Sample>,
    pub averages: TimeAverages,
}

/// `−i H_eff` stored as a diagonal plus constant-offset bands.
#[derive(Debug, Clone)]
struct EffectiveGenerator {
    diag: Vec<Complex64>,
    bands: Vec<(isize, Vec<Complex64>)>,
}

impl EffectiveGenerator {
    fn new(params: &SystemParams, basis: &FockBasis) -> Self {
        let h = build_hamiltonian(params, basis).matrix;
        let n = basis.dim();
        let diag = h
            .diagonal()
            .iter()
            .enumerate()
            .map(|(i, hii)| {
                let (m1, m2) = basis.occupations(i);
                -I * hii - params.gamma() * (m1 + m2) as f64
            })
            .collect();
        let mut bands: Vec<(isize, Vec<Complex64>)> = Vec::new();
        for (r, c, v) in h.off_diagonal().triplets() {
            let d = c as isize - r as isize;
            let p = match bands.iter().position(|b| b.0 == d) {
                Some(p) => p,
                None => {
                    bands.push((d, vec![ZERO; n]));
                    bands.len() - 1
                }
            };
            bands[p].1[r] = -I * v;
        }
        bands.sort_by_key(|b| b.0);
        Self { diag, bands }
    }

    /// Gershgorin bound on the spectral radius.
    fn spectral_bound(&self) -> f64 {
        (0..self.diag.len())
            .map(|i| self.diag[i].norm() + self.bands.iter().map(|b| b.1[i].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        for ((o, d), p) in out.iter_mut().zip(&self.diag).zip(psi) {
            *o = d * p;
        }
        let n = psi.len();
        for (d, w) in &self.bands {
            let (lo, hi) = if *d > 0 { (0, n - *d as usize) } else { ((-d) as usize, n) };
            let src = &psi[(lo as isize + d) as usize..(hi as isize + d) as usize];
            for ((o, c), s) in out[lo..hi].iter_mut().zip(&w[lo..hi]).zip(src) {
                *o += c * s;
            }
        }
    }
}

struct Rk4Work {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4Work {
    fn new(n: usize) -> Self {
        Self { k1: vec![ZERO; n], k2: vec![ZERO; n], k3: vec![ZERO; n], k4: vec![ZERO; n], tmp: vec![ZERO; n] }
    }
}

fn rk4(gen: &EffectiveGenerator, psi: &mut [Complex64], h: f64, w: &mut Rk4Work) {
    gen.apply(psi, &mut w.k1);
    for ((o, p), k) in w.tmp.iter_mut().zip(psi.iter()).zip(&w.k1) {
        *o = p + 0.5 * h * k;
    }
    gen.apply(&w.tmp, &mut w.k2);
    for ((o, p), k) in w.tmp.iter_mut().zip(psi.iter()).zip(&w.k2) {
        *o = p + 0.5 * h * k;
    }
    gen.apply(&w.tmp, &mut w.k3);
    for ((o, p), k) in w.tmp.iter_mut().zip(psi.iter()).zip(&w.k3) {
        *o = p + h * k;
    }
    gen.apply(&w.tmp, &mut w.k4);
    let s = h / 6.0;
    for (i, p) in psi.iter_mut().enumerate() {
        *p += s * (w.k1[i] + 2.0 * w.k2[i] + 2.0 * w.k3[i] + w.k4[i]);
    }
}

#[derive(Clone, Copy)]
struct Moments {
    norm_sqr: f64,
    n1: f64,
    n2: f64,
    big_g2_1: f64,
    big_g2_2: f64,
}

struct Occupations {
    m1: Vec<f64>,
    m2: Vec<f64>,
    g1: Vec<f64>,
    g2: Vec<f64>,
    lower: [Vec<Option<(usize, f64)>>; 2],
}

impl Occupations {
    fn new(basis: &FockBasis) -> Self {
        let lower_for = |site: Site| {
            (0..basis.dim())
                .map(|i| {
                    let (m1, m2) = basis.occupations(i);
                    match site {
                        Site::One if m1 > 0 => Some((basis.index(m1 - 1, m2), (m1 as f64).sqrt())),
                        Site::Two if m2 > 0 => Some((basis.index(m1, m2 - 1), (m2 as f64).sqrt())),
                        _ => None,
                    }
                })
                .collect()
        };
        Self {
            m1: basis.site_occupations(Site::One),
            m2: basis.site_occupations(Site::Two),
            g1: basis.pair_occupations(Site::One),
            g2: basis.pair_occupations(Site::Two),
            lower: [lower_for(Site::One), lower_for(Site::Two)],
        }
    }

    /// Normalized moments of an unnormalized state.
    fn moments(&self, psi: &[Complex64]) -> Moments {
        let (mut s, mut n1, mut n2, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (k, a) in psi.iter().enumerate() {
            let p = a.norm_sqr();
            s += p;
            n1 += p * self.m1[k];
            n2 += p * self.m2[k];
            g1 += p * self.g1[k];
            g2 += p * self.g2[k];
        }
        if s > 0.0 {
            Moments { norm_sqr: s, n1: n1 / s, n2: n2 / s, big_g2_1: g1 / s, big_g2_2: g2 / s }
        } else {
            Moments { norm_sqr: 0.0, n1: 0.0, n2: 0.0, big_g2_1: 0.0, big_g2_2: 0.0 }
        }
    }

    /// `ψ ← a_s ψ / ‖a_s ψ‖`.
    fn jump(&self, psi: &mut [Complex64], site: Site, buf: &mut [Complex64]) {
        let lower = &self.lower[if site == Site::One { 0 } else { 1 }];
        buf.iter_mut().for_each(|z| *z = ZERO);
        for (k, l) in lower.iter().enumerate() {
            if let Some((target, w)) = l {
                buf[*target] = w * psi[k];
            }
        }
        let norm = buf.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for (p, b) in psi.iter_mut().zip(buf.iter()) {
            *p = b / norm;
        }
    }
}

/// Threshold in `(0, 1]` so a zero draw cannot disable jumps.
fn draw_threshold(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.gen::<f64>()
}

/// The RNG for trajectory `stream` of an ensemble seeded by `seed`.
pub fn trajectory_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One trajectory from the vacuum; `stream` selects an independent RNG stream
/// of `config.seed`.
///
/// Each step of `config.dt` is split into equal sub-steps when the jump
/// probability would exceed [`MAX_JUMP_PROBABILITY`] or when `config.dt` lies
/// outside the RK4 stability region of `H_eff`. The jump decision is made per
/// sub-step; once the threshold is crossed the jump time is placed by
/// interpolating `ln ‖ψ‖²` and the sub-step is redone up to that time. Time
/// averages use the trapezoid rule on each jump-free piece.
pub fn run_trajectory(
    params: &SystemParams,
    basis: &FockBasis,
    config: &TrajectoryConfig,
    stream: u64,
) -> Result<TrajectoryRecord> {
    run_trajectory_from(params, basis, config, stream, &StateVector::vacuum(basis))
}

pub fn run_trajectory_from(
    params: &SystemParams,
    basis: &FockBasis,
    config: &TrajectoryConfig,
    stream: u64,
    psi0: &StateVector,
) -> Result<TrajectoryRecord> {
    config.validate()?;
    if psi0.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: psi0.dim() });
    }
    let gen = EffectiveGenerator::new(params, basis);
    // RK4 stability: keep h·|λ|max inside the stability region.
    let stable_sub = (config.dt * gen.spectral_bound() / 2.5).ceil().max(1.0) as u64;
    let occ = Occupations::new(basis);
    let mut rng = trajectory_rng(config.seed, stream);
    let n = basis.dim();
    let two_gamma = 2.0 * params.gamma();

    let mut psi = psi0.amplitudes().to_vec();
    let s0 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    psi.iter_mut().for_each(|z| *z /= s0);
    let mut work = Rk4Work::new(n);
    let mut start = vec![ZERO; n];

    let mut threshold = draw_threshold(&mut rng);
    let n_steps = (config.t_final / config.dt).round().max(1.0) as u64;
    let t_transient = config.t_transient();
    let mut jumps = Vec::new();
    let mut samples = Vec::new();
    let mut acc = TimeAverages::default();
    let mut window = 0.0;
    let mut next_sample = 0u64;

    let mut m = occ.moments(&psi);
    samples.push(Sample { time: 0.0, n1: m.n1, n2: m.n2 });
    next_sample += 1;

    for step in 0..n_steps {
        let t0 = step as f64 * config.dt;
        let p_jump = two_gamma * (m.n1 + m.n2) * config.dt;
        let n_sub = if p_jump > MAX_JUMP_PROBABILITY { (p_jump / MAX_JUMP_PROBABILITY).ceil() as u64 } else { 1 };
        let n_sub = n_sub.max(stable_sub);
        let h = config.dt / n_sub as f64;
        for sub in 0..n_sub {
            let mut t = t0 + sub as f64 * h;
            let mut remaining = h;
            // Jump-free pieces of the sub-step; a jump ends a piece early.
            while remaining > 0.0 {
                start.copy_from_slice(&psi);
                let m_start = m;
                rk4(&gen, &mut psi, remaining, &mut work);
                m = occ.moments(&psi);
                if m.norm_sqr < NORM_FLOOR {
                    return Err(Error::NormUnderflow(m.norm_sqr));
                }
                let mut piece = remaining;
                let jumped = m.norm_sqr < threshold;
                if jumped {
                    // ‖ψ‖² decays close to exponentially within a step: interpolate
                    // log‖ψ‖² to place the jump, then redo the partial step.
                    let frac = ((m_start.norm_sqr / threshold).ln() / (m_start.norm_sqr / m.norm_sqr).ln()).clamp(0.0, 1.0);
                    piece = (remaining * frac).max(1e-12 * h).min(remaining);
                    psi.copy_from_slice(&start);
                    rk4(&gen, &mut psi, piece, &mut work);
                    m = occ.moments(&psi);
                }
                if t >= t_transient {
                    let half = 0.5 * piece;
                    acc.n1 += half * (m_start.n1 + m.n1);
                    acc.n2 += half * (m_start.n2 + m.n2);
                    acc.big_g2_1 += half * (m_start.big_g2_1 + m.big_g2_1);
                    acc.big_g2_2 += half * (m_start.big_g2_2 + m.big_g2_2);
                    window += piece;
                }
                t += piece;
                remaining -= piece;
                if jumped {
                    let channel = if rng.gen::<f64>() * (m.n1 + m.n2) < m.n1 { Site::One } else { Site::Two };
                    occ.jump(&mut psi, channel, &mut start);
                    m = occ.moments(&psi);
                    jumps.push(JumpEvent { time: t, channel, n1_post: m.n1, n2_post: m.n2 });
                    threshold = draw_threshold(&mut rng);
                }
                if remaining < 1e-12 * h {
                    remaining = 0.0;
                }
            }
        }
        let t1 = (step + 1) as f64 * config.dt;
        while (next_sample as f64) * config.sample_interval <= t1 + 1e-9 * config.dt {
            samples.push(Sample { time: next_sample as f64 * config.sample_interval, n1: m.n1, n2: m.n2 });
            next_sample += 1;
        }
    }
    if window > 0.0 {
        acc.n1 /= window;
        acc.n2 /= window;
        acc.big_g2_1 /= window;
        acc.big_g2_2 /= window;
    }
    Ok(TrajectoryRecord {
        seed: config.seed,
        stream,
        t_final: n_steps as f64 * config.dt,
        t_transient,
        jumps,
        samples,
        averages: acc,
    })
}

/// All `config.n_traj` trajectories, run in parallel, returned in stream order.
pub fn run_ensemble(params: &SystemParams, basis: &FockBasis, config: &TrajectoryConfig) -> Result<Vec<TrajectoryRecord>> {
    config.validate()?;
    (0..config.n_traj as u64).into_par_iter().map(|k| run_trajectory(params, basis, config, k)).collect()
}

/// Ensemble means with standard errors from the between-trajectory spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleAverage {
    pub n_traj: usize,
    pub n1: f64,
    pub n2: f64,
    pub n1_err: f64,
    pub n2_err: f64,
    /// Site-averaged occupation.
    pub n: f64,
    pub n_err: f64,
    /// Site-averaged `⟨a†² a²⟩`.
    pub big_g2: f64,
    pub big_g2_err: f64,
    /// `big_g2 / n²`, error by linear propagation including the covariance.
    pub g2: f64,
    pub g2_err: f64,
}

impl EnsembleAverage {
    pub fn from_records(records: &[TrajectoryRecord]) -> Result<Self> {
        if records.len() < 2 {
            return Err(Error::InvalidParameter("ensemble statistics need at least 2 trajectories".into()));
        }
        let k = records.len() as f64;
        let mean = |f: &dyn Fn(&TimeAverages) -> f64| records.iter().map(|r| f(&r.averages)).sum::<f64>() / k;
        let cov = |f: &dyn Fn(&TimeAverages) -> f64, g: &dyn Fn(&TimeAverages) -> f64| {
            let (mf, mg) = (mean(f), mean(g));
            records.iter().map(|r| (f(&r.averages) - mf) * (g(&r.averages) - mg)).sum::<f64>() / (k - 1.0) / k
        };
        let n1f = |a: &TimeAverages| a.n1;
        let n2f = |a: &TimeAverages| a.n2;
        let nf = |a: &TimeAverages| 0.5 * (a.n1 + a.n2);
        let gf = |a: &TimeAverages| 0.5 * (a.big_g2_1 + a.big_g2_2);
        let n = mean(&nf);
        let big = mean(&gf);
        let (var_n, var_g, cov_ng) = (cov(&nf, &nf), cov(&gf, &gf), cov(&nf, &gf));
        let (g2, g2_err) = if n > 0.0 {
            let dg = 1.0 / (n * n);
            let dn = -2.0 * big / (n * n * n);
            (big / (n * n), (dg * dg * var_g + dn * dn * var_n + 2.0 * dg * dn * cov_ng).max(0.0).sqrt())
        } else {
            (f64::NAN, f64::NAN)
        };
        Ok(Self {
            n_traj: records.len(),
            n1: mean(&n1f),
            n2: mean(&n2f),
            n1_err: cov(&n1f, &n1f).sqrt(),
            n2_err: cov(&n2f, &n2f).sqrt(),
            n,
            n_err: var_n.sqrt(),
            big_g2: big,
            big_g2_err: var_g.sqrt(),
            g2,
            g2_err,
        })
    }
}

/// Run the ensemble and reduce it to averages.
pub fn ensemble_average(params: &SystemParams, basis: &FockBasis, config: &TrajectoryConfig) -> Result<EnsembleAverage> {
    if config.n_traj < 2 {
        return Err(Error::InvalidParameter("ensemble statistics need at least 2 trajectories".into()));
    }
    EnsembleAverage::from_records(&run_ensemble(params, basis, config)?)
}

/// Fixed-width histogram with bin centers on integer multiples of `bin_width`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: f64,
    /// Index of the first bin: its center is `first_bin · bin_width`.
    pub first_bin: i64,
    pub counts: Vec<f64>,
}

impl Histogram {
    pub fn new(bin_width: f64, first_bin: i64, counts: Vec<f64>) -> Result<Self> {
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(Error::InvalidParameter("bin width must be positive".into()));
        }
        Ok(Self { bin_width, first_bin, counts })
    }

    /// Weighted histogram padded with one empty bin on each side.
    pub fn from_weighted(values: impl IntoIterator<Item = (f64, f64)>, bin_width: f64) -> Result<Self> {
        if !(bin_width > 0.0 && bin_width.is_finite()) {
            return Err(Error::InvalidParameter("bin width must be positive".into()));
        }
        let pairs: Vec<(i64, f64)> = values.into_iter().map(|(x, w)| ((x / bin_width).round() as i64, w)).collect();
        let lo = pairs.iter().map(|p| p.0).min().ok_or(Error::Empty("histogram samples"))? - 1;
        let hi = pairs.iter().map(|p| p.0).max().unwrap() + 1;
        let mut counts = vec![0.0; (hi - lo + 1) as usize];
        for (b, w) in pairs {
            counts[(b - lo) as usize] += w;
        }
        Ok(Self { bin_width, first_bin: lo, counts })
    }

    pub fn center(&self, k: usize) -> f64 {
        (self.first_bin + k as i64) as f64 * self.bin_width
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.counts.len()).map(|k| self.center(k))
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.centers().zip(&self.counts).map(|(x, c)| x * c).sum::<f64>() / self.total()
    }

    pub fn std_dev(&self) -> f64 {
        let m = self.mean();
        (self.centers().zip(&self.counts).map(|(x, c)| c * (x - m).powi(2)).sum::<f64>() / self.total()).sqrt()
    }

    /// Local maxima of the counts after a centered moving average over
    /// `2·half_window + 1` bins, as `(center, smoothed height)`, highest first.
    /// Maxima below `min_fraction` of the highest one are dropped.
    pub fn peaks(&self, half_window: usize, min_fraction: f64) -> Vec<(f64, f64)> {
        let len = self.counts.len();
        let smooth: Vec<f64> = (0..len)
            .map(|k| {
                let lo = k.saturating_sub(half_window);
                let hi = (k + half_window).min(len - 1);
                self.counts[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
            })
            .collect();
        let mut out: Vec<(f64, f64)> = Vec::new();
        for k in 0..len {
            let left = if k == 0 { f64::NEG_INFINITY } else { smooth[k - 1] };
            // Plateaus count once, at their left edge.
            let right = smooth[k + 1..].iter().copied().find(|&v| v != smooth[k]).unwrap_or(f64::NEG_INFINITY);
            if smooth[k] > 0.0 && smooth[k] > left && smooth[k] > right {
                out.push((self.center(k), smooth[k]));
            }
        }
        out.sort_by(|a, b| b.1.total_cmp(&a.1));
        if let Some(&(_, top)) = out.first() {
            out.retain(|p| p.1 >= min_fraction * top);
        }
        out
    }
}

/// How jump events are weighted in [`jump_histograms`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// Every jump counts once.
    #[default]
    PerJump,
    /// Each jump is weighted by the time until the next jump (or the end of the run).
    DwellTime,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Binning {
    pub bin_width: f64,
    pub weighting: Weighting,
}

impl Default for Binning {
    fn default() -> Self {
        Self { bin_width: 0.25, weighting: Weighting::PerJump }
    }
}

/// Histograms of post-jump `⟨n̂₁⟩` and `Δn = ⟨n̂₁⟩ − ⟨n̂₂⟩` over all jumps after
/// each record's transient.
pub fn jump_histograms(records: &[TrajectoryRecord], binning: &Binning) -> Result<(Histogram, Histogram)> {
    let mut n1 = Vec::new();
    let mut dn = Vec::new();
    for r in records {
        let kept: Vec<&JumpEvent> = r.jumps.iter().filter(|e| e.time >= r.t_transient).collect();
        for (i, e) in kept.iter().enumerate() {
            let w = match binning.weighting {
                Weighting::PerJump => 1.0,
                Weighting::DwellTime => kept.get(i + 1).map_or(r.t_final, |next| next.time) - e.time,
            };
            n1.push((e.n1_post, w));
            dn.push((e.dn_post(), w));
        }
    }
    if n1.is_empty() {
        return Err(Error::Empty("jump events"));
    }
    Ok((Histogram::from_weighted(n1, binning.bin_width)?, Histogram::from_weighted(dn, binning.bin_width)?))
}

/// Standard deviation of Δn in excess of a single central peak.
///
/// The core width is read off the half-maximum crossing of the bin containing
/// Δn = 0 (linear interpolation; Gaussian conversion `σ = HWHM / sqrt(2 ln 2)`),
/// and the statistic is `sqrt(max(0, σ_total² − σ_core²))`.
pub fn dn_spread_statistic(hist_dn: &Histogram) -> Result<f64> {
    if hist_dn.counts.len() < 2 {
        return Err(Error::DegenerateHistogram("need at least two bins"));
    }
    let total = hist_dn.total();
    if !(total > 0.0) {
        return Err(Error::DegenerateHistogram("no weight"));
    }
    let sigma_total = hist_dn.std_dev();
    let zero = -hist_dn.first_bin;
    let sigma_core = if zero >= 0 && (zero as usize) < hist_dn.counts.len() && hist_dn.counts[zero as usize] > 0.0 {
        let z = zero as usize;
        let half = 0.5 * hist_dn.counts[z];
        let crossing = |dir: isize| -> f64 {
            let mut k = z as isize;
            loop {
                let next = k + dir;
                if next < 0 || next as usize >= hist_dn.counts.len() {
                    return (k - z as isize).unsigned_abs() as f64;
                }
                let (c0, c1) = (hist_dn.counts[k as usize], hist_dn.counts[next as usize]);
                if c1 < half {
                    return (k - z as isize).unsigned_abs() as f64 + (c0 - half) / (c0 - c1);
                }
                k = next;
            }
        };
        let hwhm = 0.5 * (crossing(-1) + crossing(1)) * hist_dn.bin_width;
        hwhm / (2.0 * std::f64::consts::LN_2).sqrt()
    } else {
        0.0
    };
    Ok((sigma_total * sigma_total - sigma_core * sigma_core).max(0.0).sqrt())
}

/// Outcome of the two-sample Kolmogorov–Smirnov mirror test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MirrorTest {
    pub statistic: f64,
    pub critical: f64,
    pub alpha: f64,
    pub n_a: usize,
    pub n_b: usize,
    /// Spacing used to thin the correlated jump sequence.
    pub thinning: f64,
    pub passed: bool,
}

/// Integrated autocorrelation time of the sampled Δn series (post-transient),
/// pooled over records, in units of time. Sums the autocorrelation up to its
/// first non-positive value.
pub fn dn_autocorrelation_time(records: &[TrajectoryRecord]) -> Result<f64> {
    let series: Vec<Vec<f64>> = records
        .iter()
        .map(|r| r.samples.iter().filter(|s| s.time >= r.t_transient).map(|s| s.n1 - s.n2).collect::<Vec<_>>())
        .filter(|s| s.len() > 2)
        .collect();
    if series.is_empty() {
        return Err(Error::Empty("sampled time series"));
    }
    let spacing = records
        .iter()
        .find_map(|r| (r.samples.len() > 1).then(|| r.samples[1].time - r.samples[0].time))
        .ok_or(Error::Empty("sampled time series"))?;
    let count: usize = series.iter().map(Vec::len).sum();
    let mean = series.iter().flatten().sum::<f64>() / count as f64;
    let var = series.iter().flatten().map(|x| (x - mean).powi(2)).sum::<f64>() / count as f64;
    if var == 0.0 {
        return Ok(spacing);
    }
    let max_lag = series.iter().map(Vec::len).max().unwrap() / 2;
    let mut tau = 1.0;
    for lag in 1..max_lag {
        let (mut s, mut c) = (0.0, 0usize);
        for x in &series {
            for i in 0..x.len().saturating_sub(lag) {
                s += (x[i] - mean) * (x[i + lag] - mean);
                c += 1;
            }
        }
        let rho = s / c as f64 / var;
        if rho <= 0.0 {
            break;
        }
        tau += 2.0 * rho;
    }
    Ok(tau * spacing)
}

/// Two-sample KS test of Δn (even-indexed records) against −Δn (odd-indexed
/// records). Each record contributes post-transient jump events at least
/// `thinning` apart so that samples are close to independent.
pub fn mirror_symmetry_test(records: &[TrajectoryRecord], alpha: f64, thinning: f64) -> Result<MirrorTest> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter("alpha must lie in (0, 1)".into()));
    }
    let thin = |r: &TrajectoryRecord| {
        let mut out = Vec::new();
        let mut next = r.t_transient;
        for e in &r.jumps {
            if e.time >= next {
                out.push(e.dn_post());
                next = e.time + thinning;
            }
        }
        out
    };
    let mut a: Vec<f64> = records.iter().step_by(2).flat_map(thin).collect();
    let mut b: Vec<f64> = records.iter().skip(1).step_by(2).flat_map(thin).map(|x| -x).collect();
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("jump events"));
    }
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let d = ks_statistic(&a, &b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let critical = (-(alpha / 2.0).ln() / 2.0).sqrt() * ((na + nb) / (na * nb)).sqrt();
    Ok(MirrorTest {
        statistic: d,
        critical,
        alpha,
        n_a: a.len(),
        n_b: b.len(),
        thinning,
        passed: d < critical,
    })
}

/// `sup |F_a − F_b|` for sorted samples.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}
