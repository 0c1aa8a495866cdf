//! Exact sampling for classical Gaussian inputs.
//!
//! A state with `v_p >= 1` is a Gaussian mixture of coherent states: the
//! coherent amplitude has independent real and imaginary parts with variances
//! `(v_x - 1)/4` and `(v_p - 1)/4`. Each shot draws such an amplitude per input
//! mode, propagates it through the network, and draws every output count from
//! a Poisson law with mean `|beta_k|^2`. Multi-photon counts are kept.
//!
//! Every shot owns a ChaCha8 stream selected by `(seed, shot index)`, so the
//! histogram does not depend on how shots are split across threads.
//!
//! The frequency estimator here is plain Monte Carlo. Its relative error is
//! only controlled for probabilities well above `1/shots`; exponentially small
//! probabilities are not resolved by this estimator.

use std::collections::{BTreeMap, HashMap};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interferometer::Interferometer;
use crate::numeric::ZERO;
use crate::pattern::DetectionPattern;
use crate::states::GaussianModeState;

const SHARD_SHOTS: u64 = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct SampleReport {
    pub shots: u64,
    pub seed: u64,
    /// Full photon-count pattern -> occurrences.
    pub histogram: BTreeMap<Vec<u32>, u64>,
    pub elapsed: Duration,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatternEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub count: u64,
    /// False when the pattern never occurred; the zero estimate is then only a bound.
    pub observed: bool,
}

impl SampleReport {
    pub fn count(&self, counts: &[u32]) -> u64 {
        self.histogram.get(counts).copied().unwrap_or(0)
    }

    pub fn estimate(&self, pattern: &DetectionPattern) -> PatternEstimate {
        estimate_pattern_probability(self, pattern)
    }

    pub fn mean_total_photons(&self) -> f64 {
        let total: f64 = self
            .histogram
            .iter()
            .map(|(k, &c)| k.iter().map(|&x| x as f64).sum::<f64>() * c as f64)
            .sum();
        total / self.shots as f64
    }
}

/// Binomial frequency estimate with standard error `sqrt(p(1-p)/shots)`.
pub fn estimate_pattern_probability(report: &SampleReport, pattern: &DetectionPattern) -> PatternEstimate {
    binomial_estimate(report.count(&pattern.counts()), report.shots)
}

pub fn binomial_estimate(count: u64, shots: u64) -> PatternEstimate {
    if shots == 0 {
        return PatternEstimate {
            estimate: 0.0,
            standard_error: 0.0,
            count,
            observed: false,
        };
    }
    let p = count as f64 / shots as f64;
    PatternEstimate {
        estimate: p,
        standard_error: (p * (1.0 - p) / shots as f64).sqrt(),
        count,
        observed: count > 0,
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SamplerOptions {
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

/// Per-mode standard deviations of the coherent-amplitude mixture.
#[derive(Clone, Debug)]
pub struct CoherentMixture {
    sigma: Vec<(f64, f64)>,
}

impl CoherentMixture {
    pub fn new(states: &[GaussianModeState]) -> Result<Self> {
        let sigma = states
            .iter()
            .enumerate()
            .map(|(mode, s)| {
                if !s.is_classical() {
                    return Err(Error::NonClassical { mode, v_p: s.v_p() });
                }
                let sd = |v: f64| ((v - 1.0).max(0.0) / 4.0).sqrt();
                Ok((sd(s.v_x()), sd(s.v_p())))
            })
            .collect::<Result<_>>()?;
        Ok(Self { sigma })
    }

    pub fn modes(&self) -> usize {
        self.sigma.len()
    }

    pub fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, alpha: &mut [Complex64]) {
        for (a, &(sx, sp)) in alpha.iter_mut().zip(&self.sigma) {
            let re = if sx > 0.0 { sx * rng.sample::<f64, _>(StandardNormal) } else { 0.0 };
            let im = if sp > 0.0 { sp * rng.sample::<f64, _>(StandardNormal) } else { 0.0 };
            *a = Complex64::new(re, im);
        }
    }
}

/// One coherent amplitude per mode drawn from the states' P functions.
pub fn draw_coherent_inputs<R: Rng + ?Sized>(states: &[GaussianModeState], rng: &mut R) -> Result<Vec<Complex64>> {
    let mix = CoherentMixture::new(states)?;
    let mut alpha = vec![ZERO; states.len()];
    mix.draw_into(rng, &mut alpha);
    Ok(alpha)
}

pub fn sample_patterns(
    states: &[GaussianModeState],
    net: &Interferometer,
    shots: u64,
    seed: u64,
) -> Result<SampleReport> {
    sample_patterns_with(states, net, shots, seed, &SamplerOptions::default())
}

pub fn sample_patterns_with(
    states: &[GaussianModeState],
    net: &Interferometer,
    shots: u64,
    seed: u64,
    options: &SamplerOptions,
) -> Result<SampleReport> {
    if shots == 0 {
        return Err(Error::InvalidState("shot count must be at least 1".into()));
    }
    if states.len() != net.modes() {
        return Err(Error::DimensionMismatch {
            expected: net.modes(),
            got: states.len(),
            context: "input states vs network modes",
        });
    }
    let mix = CoherentMixture::new(states)?;
    let start = Instant::now();
    let key = ChaCha8Rng::seed_from_u64(seed).get_seed();
    let shards = shots.div_ceil(SHARD_SHOTS);

    let run = || {
        (0..shards)
            .into_par_iter()
            .map(|shard| {
                let lo = shard * SHARD_SHOTS;
                let hi = (lo + SHARD_SHOTS).min(shots);
                run_shard(&mix, net, key, lo..hi)
            })
            .reduce(HashMap::new, merge)
    };
    let merged = match options.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidState(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    Ok(SampleReport {
        shots,
        seed,
        histogram: merged.into_iter().collect(),
        elapsed: start.elapsed(),
    })
}

fn merge(mut a: HashMap<Vec<u32>, u64>, b: HashMap<Vec<u32>, u64>) -> HashMap<Vec<u32>, u64> {
    if a.len() < b.len() {
        return merge(b, a);
    }
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    a
}

fn run_shard(
    mix: &CoherentMixture,
    net: &Interferometer,
    key: [u8; 32],
    range: std::ops::Range<u64>,
) -> HashMap<Vec<u32>, u64> {
    let m = mix.modes();
    let mut alpha = vec![ZERO; m];
    let mut beta = vec![ZERO; m];
    let mut counts = vec![0u32; m];
    let mut hist = HashMap::new();
    for shot in range {
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(shot);
        mix.draw_into(&mut rng, &mut alpha);
        net.propagate_into(&alpha, &mut beta);
        for (c, b) in counts.iter_mut().zip(&beta) {
            *c = poisson_count(&mut rng, b.norm_sqr());
        }
        match hist.get_mut(&counts) {
            Some(n) => *n += 1,
            None => {
                hist.insert(counts.clone(), 1u64);
            }
        }
    }
    hist
}

fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u32 {
    if mean <= 0.0 {
        return 0;
    }
    if mean < 30.0 {
        // sequential inversion
        let u: f64 = rng.random();
        let mut p = (-mean).exp();
        let mut cdf = p;
        let mut k = 0u32;
        while u > cdf && k < 1000 {
            k += 1;
            p *= mean / k as f64;
            cdf += p;
        }
        return k;
    }
    Poisson::new(mean).map(|d| d.sample(rng) as u32).unwrap_or(0)
}
