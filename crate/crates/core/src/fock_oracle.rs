//! Brute-force Fock-space reference simulator for up to three modes.
//!
//! States are stored as density matrices restricted to total photon number
//! `t <= cutoff`, one block per `t`. A passive network conserves total photon
//! number, so each block evolves independently and the truncation is exact
//! for every retained block. Coherences between different `t` are dropped:
//! they never reach photon-counting statistics after a number-conserving
//! network. The mass discarded above the cutoff is reported as `tail_mass`.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interferometer::{Interferometer, TwoModeLayer};
use crate::numeric::{CompensatedSum, ZERO};
use crate::pattern::DetectionPattern;
use crate::states::GaussianModeState;

pub const MAX_MODES: usize = 3;
pub const DEFAULT_TAIL_BOUND: f64 = 1e-8;
/// Upper limit on the automatically selected total-photon cutoff.
pub const AUTO_CUTOFF_CAP: usize = 60;
/// Upper limit on stored density-matrix entries across all blocks.
pub const MAX_STORED_ENTRIES: usize = 4_000_000;
const TRACE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cutoff {
    /// Smallest cutoff with discarded mass below the tail bound.
    Auto,
    /// Maximum total photon number kept.
    Fixed(usize),
}

#[derive(Clone, Debug)]
struct Sector {
    basis: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
    /// Row-major `dim x dim`.
    rho: Vec<Complex64>,
}

impl Sector {
    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.rho[i * self.dim() + i].re).sum()
    }
}

#[derive(Clone, Debug)]
pub struct FockState {
    modes: usize,
    cutoff: usize,
    sectors: Vec<Sector>,
    tail_mass: f64,
}

/// Single-mode density in the Fock basis.
enum ModeDensity {
    Diagonal(Vec<f64>),
    Pure(Vec<f64>),
}

impl ModeDensity {
    fn from_state(state: &GaussianModeState, n_max: usize) -> Result<Self> {
        if state.v_x() == state.v_p() {
            // geometric law with mean (V - 1)/2
            let nbar = state.mean_photon_number();
            let ratio = nbar / (nbar + 1.0);
            let mut p = Vec::with_capacity(n_max + 1);
            let mut x = 1.0 / (nbar + 1.0);
            for _ in 0..=n_max {
                p.push(x);
                x *= ratio;
            }
            Ok(ModeDensity::Diagonal(p))
        } else if state.is_pure() {
            // x-antisqueezed vacuum: c_{2n} = tanh(r)^n sqrt((2n)!) / (2^n n!) / sqrt(cosh r)
            let tanh_r = 2.0 * state.q_params().lambda;
            let cosh_r = 1.0 / (1.0 - tanh_r * tanh_r).sqrt();
            let mut c = vec![0.0; n_max + 1];
            let mut amp = 1.0 / cosh_r.sqrt();
            let mut n = 0usize;
            while 2 * n <= n_max {
                c[2 * n] = amp;
                amp *= tanh_r * (((2 * n + 1) * (2 * n + 2)) as f64).sqrt() / (2 * n + 2) as f64;
                n += 1;
            }
            Ok(ModeDensity::Pure(c))
        } else {
            Err(Error::InvalidState(
                "fock oracle supports vacuum, thermal and pure squeezed states only".into(),
            ))
        }
    }

    fn population(&self, n: usize) -> f64 {
        match self {
            ModeDensity::Diagonal(p) => p[n],
            ModeDensity::Pure(c) => c[n] * c[n],
        }
    }

    fn element(&self, n: usize, m: usize) -> f64 {
        match self {
            ModeDensity::Diagonal(p) => {
                if n == m {
                    p[n]
                } else {
                    0.0
                }
            }
            ModeDensity::Pure(c) => c[n] * c[m],
        }
    }
}

/// All occupation vectors of `modes` modes with total `t`, lexicographically descending.
fn compositions(modes: usize, t: usize) -> Vec<Vec<u32>> {
    fn rec(modes: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() + 1 == modes {
            cur.push(left as u32);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k as u32);
            rec(modes, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(modes, t, &mut Vec::with_capacity(modes), &mut out);
    out
}

fn sector_dim(modes: usize, t: usize) -> usize {
    // C(t + modes - 1, modes - 1)
    (1..modes).fold(1usize, |acc, k| acc * (t + k) / k)
}

impl FockState {
    pub fn prepare(states: &[GaussianModeState], cutoff: Cutoff) -> Result<Self> {
        Self::prepare_with_tail_bound(states, cutoff, DEFAULT_TAIL_BOUND)
    }

    pub fn prepare_with_tail_bound(states: &[GaussianModeState], cutoff: Cutoff, tail_bound: f64) -> Result<Self> {
        let modes = states.len();
        if modes == 0 || modes > MAX_MODES {
            return Err(Error::InvalidState(format!(
                "fock oracle handles 1..={MAX_MODES} modes, got {modes}"
            )));
        }
        let n_max = match cutoff {
            Cutoff::Auto => AUTO_CUTOFF_CAP,
            Cutoff::Fixed(c) => c,
        };
        let densities = states
            .iter()
            .map(|s| ModeDensity::from_state(s, n_max))
            .collect::<Result<Vec<_>>>()?;

        // total photon-number distribution by convolution
        let mut total = vec![0.0; n_max + 1];
        total[0] = 1.0;
        for d in &densities {
            let mut next = vec![0.0; n_max + 1];
            for (t, &pt) in total.iter().enumerate() {
                for n in 0..=n_max - t {
                    next[t + n] += pt * d.population(n);
                }
            }
            total = next;
        }
        let mut kept = 0.0;
        let mut chosen = None;
        for (t, &p) in total.iter().enumerate() {
            kept += p;
            let tail = (1.0 - kept).max(0.0);
            if cutoff == Cutoff::Auto && tail < tail_bound && t >= modes {
                chosen = Some((t, tail));
                break;
            }
        }
        let (cutoff, tail_mass) = match (cutoff, chosen) {
            (Cutoff::Auto, Some(c)) => c,
            (Cutoff::Auto, None) => {
                return Err(Error::Cutoff(format!(
                    "no cutoff up to {AUTO_CUTOFF_CAP} photons reaches tail bound {tail_bound:.1e}"
                )))
            }
            (Cutoff::Fixed(c), _) => {
                let tail = (1.0 - total.iter().sum::<f64>()).max(0.0);
                if tail > tail_bound {
                    return Err(Error::Cutoff(format!(
                        "cutoff {c} leaves tail mass {tail:.3e} above bound {tail_bound:.1e}"
                    )));
                }
                (c, tail)
            }
        };
        let entries: usize = (0..=cutoff).map(|t| sector_dim(modes, t).pow(2)).sum();
        if entries > MAX_STORED_ENTRIES {
            return Err(Error::Cutoff(format!(
                "cutoff {cutoff} on {modes} modes needs {entries} density entries (limit {MAX_STORED_ENTRIES})"
            )));
        }

        let sectors = (0..=cutoff)
            .map(|t| {
                let basis = compositions(modes, t);
                let dim = basis.len();
                let mut rho = vec![ZERO; dim * dim];
                for (a, na) in basis.iter().enumerate() {
                    for (b, nb) in basis.iter().enumerate() {
                        let v: f64 = densities
                            .iter()
                            .zip(na.iter().zip(nb))
                            .map(|(d, (&x, &y))| d.element(x as usize, y as usize))
                            .product();
                        rho[a * dim + b] = Complex64::new(v, 0.0);
                    }
                }
                let index = basis.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
                Sector { basis, index, rho }
            })
            .collect();
        Ok(Self {
            modes,
            cutoff,
            sectors,
            tail_mass,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Maximum total photon number retained.
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn trace(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for s in &self.sectors {
            acc.add(Complex64::new(s.trace(), 0.0));
        }
        acc.value().re
    }

    /// Largest `|rho_ab - conj(rho_ba)|` over all blocks.
    pub fn hermitian_defect(&self) -> f64 {
        self.sectors
            .iter()
            .map(|s| {
                let d = s.dim();
                let mut worst = 0.0f64;
                for a in 0..d {
                    for b in 0..d {
                        worst = worst.max((s.rho[a * d + b] - s.rho[b * d + a].conj()).norm());
                    }
                }
                worst
            })
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue across all blocks.
    pub fn min_eigenvalue(&self) -> f64 {
        self.sectors
            .iter()
            .map(|s| {
                let d = s.dim();
                let m = crate::numeric::CMatrix::from_row_slice(d, d, &s.rho);
                m.symmetric_eigenvalues().iter().fold(f64::INFINITY, |a, &b| a.min(b))
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Applies the network through its two-mode decomposition.
    pub fn apply_network(&self, net: &Interferometer) -> Result<FockState> {
        if net.modes() != self.modes {
            return Err(Error::DimensionMismatch {
                expected: self.modes,
                got: net.modes(),
                context: "network modes vs fock state modes",
            });
        }
        let before = self.trace();
        let decomposition = net.decompose();
        let mut out = self.clone();
        for layer in &decomposition.layers {
            for sector in &mut out.sectors {
                apply_layer(sector, layer);
            }
        }
        for sector in &mut out.sectors {
            let d = sector.dim();
            let phase: Vec<Complex64> = sector
                .basis
                .iter()
                .map(|n| {
                    n.iter()
                        .zip(&decomposition.phases)
                        .fold(Complex64::new(1.0, 0.0), |acc, (&k, p)| acc * p.powu(k))
                })
                .collect();
            for a in 0..d {
                for b in 0..d {
                    sector.rho[a * d + b] *= phase[a] * phase[b].conj();
                }
            }
        }
        let leakage = (out.trace() - before).abs();
        if leakage > TRACE_TOL {
            return Err(Error::Cutoff(format!("trace changed by {leakage:.3e} under the network")));
        }
        Ok(out)
    }

    /// Probability of an arbitrary photon-count outcome.
    pub fn outcome_probability(&self, counts: &[u32]) -> Result<f64> {
        if counts.len() != self.modes {
            return Err(Error::DimensionMismatch {
                expected: self.modes,
                got: counts.len(),
                context: "outcome length vs modes",
            });
        }
        let t: usize = counts.iter().map(|&c| c as usize).sum();
        if t > self.cutoff {
            return Err(Error::Cutoff(format!("outcome with {t} photons exceeds cutoff {}", self.cutoff)));
        }
        let s = &self.sectors[t];
        let i = s.index[counts];
        Ok(s.rho[i * s.dim() + i].re)
    }

    pub fn pattern_probability(&self, pattern: &DetectionPattern) -> Result<f64> {
        self.outcome_probability(&pattern.counts())
    }

    /// Every retained outcome with its probability.
    pub fn outcomes(&self) -> impl Iterator<Item = (&[u32], f64)> {
        self.sectors.iter().flat_map(|s| {
            let d = s.dim();
            s.basis.iter().enumerate().map(move |(i, n)| (n.as_slice(), s.rho[i * d + i].re))
        })
    }
}

pub fn prepare_input(states: &[GaussianModeState], cutoff: Cutoff) -> Result<FockState> {
    FockState::prepare(states, cutoff)
}

pub fn apply_network(state: &FockState, net: &Interferometer) -> Result<FockState> {
    state.apply_network(net)
}

pub fn pattern_probability(state: &FockState, pattern: &DetectionPattern) -> Result<f64> {
    state.pattern_probability(pattern)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Image of `|a, b>` on the layer's modes: amplitudes on `|k, a + b - k>`.
fn two_mode_image(t: &[[Complex64; 2]; 2], a: u32, b: u32) -> Vec<Complex64> {
    let n = a + b;
    let mut out = vec![ZERO; n as usize + 1];
    for u in 0..=a {
        let left = t[0][0].powu(u) * t[0][1].powu(a - u) * binomial(a, u);
        for v in 0..=b {
            let right = t[1][0].powu(v) * t[1][1].powu(b - v) * binomial(b, v);
            out[(u + v) as usize] += left * right;
        }
    }
    let norm = factorial(a) * factorial(b);
    for (k, z) in out.iter_mut().enumerate() {
        let k = k as u32;
        *z *= (factorial(k) * factorial(n - k) / norm).sqrt();
    }
    out
}

fn apply_layer(sector: &mut Sector, layer: &TwoModeLayer) {
    let d = sector.dim();
    let block = layer.block();
    let (i, j) = layer.modes;
    // sparse columns of the layer operator G: G|col> = sum_row g |row>
    let columns: Vec<Vec<(usize, Complex64)>> = sector
        .basis
        .iter()
        .map(|n| {
            let image = two_mode_image(&block, n[i], n[j]);
            let total = n[i] + n[j];
            image
                .into_iter()
                .enumerate()
                .filter(|(_, g)| *g != ZERO)
                .map(|(k, g)| {
                    let mut m = n.clone();
                    m[i] = k as u32;
                    m[j] = total - k as u32;
                    (sector.index[&m], g)
                })
                .collect()
        })
        .collect();

    // X = G rho
    let mut x = vec![ZERO; d * d];
    for (r, col) in columns.iter().enumerate() {
        let src = &sector.rho[r * d..(r + 1) * d];
        for &(r2, g) in col {
            let dst = &mut x[r2 * d..(r2 + 1) * d];
            for (o, s) in dst.iter_mut().zip(src) {
                *o += g * s;
            }
        }
    }
    // rho' = X G^H
    let mut out = vec![ZERO; d * d];
    for row in 0..d {
        let src = &x[row * d..(row + 1) * d];
        let dst = &mut out[row * d..(row + 1) * d];
        for (c, col) in columns.iter().enumerate() {
            let v = src[c];
            if v == ZERO {
                continue;
            }
            for &(c2, g) in col {
                dst[c2] += v * g.conj();
            }
        }
    }
    sector.rho = out;
}
