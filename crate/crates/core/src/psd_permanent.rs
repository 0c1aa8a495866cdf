//! Permanents of positive-semidefinite Hermitian matrices by thermal sampling.
//!
//! Write `H = V diag(d) V^H` and pick `q = d_max / (1 - headroom)`. Thermal
//! inputs with `1 - mu_j = d_j / q` sent through the network whose output-by-input
//! transfer matrix is `V` give `D~ = H / q`, so the all-ones pattern has
//! probability `p = (prod mu_j) Per(H) / q^N`. Sampling that pattern and
//! inverting gives an unbiased estimate of `Per(H)`.
//!
//! Estimates based on fewer than [`LOW_CONFIDENCE_COUNT`] observed events are
//! flagged: the frequency estimator carries no multiplicative guarantee there.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interferometer::Interferometer;
use crate::matrix_functions::{permanent, DEFAULT_PERMANENT_LIMIT};
use crate::numeric::{hermitian_defect, hermitian_part, max_abs, CMatrix};
use crate::pattern::DetectionPattern;
use crate::sampler::{sample_patterns_with, SamplerOptions};
use crate::states::GaussianModeState;

pub const DEFAULT_HEADROOM: f64 = 0.1;
pub const LOW_CONFIDENCE_COUNT: u64 = 100;
/// Largest dimension served by the sampling path.
pub const SAMPLING_LIMIT: usize = 16;
/// Largest dimension for which the exact value is attached automatically.
pub const AUTO_EXACT_LIMIT: usize = 12;

const HERMITIAN_TOL: f64 = 1e-10;
const NEGATIVE_EIG_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct ThermalEmbedding {
    h: CMatrix,
    /// Columns are eigenvectors of `h`.
    eigenvectors: CMatrix,
    eigenvalues: Vec<f64>,
    q: f64,
    mu: Vec<f64>,
    states: Vec<GaussianModeState>,
    network: Interferometer,
}

impl ThermalEmbedding {
    pub fn new(h: &CMatrix) -> Result<Self> {
        Self::with_headroom(h, DEFAULT_HEADROOM)
    }

    pub fn with_headroom(h: &CMatrix, headroom: f64) -> Result<Self> {
        if !(headroom > 0.0 && headroom < 1.0) {
            return Err(Error::InvalidState(format!("headroom {headroom} must lie in (0, 1)")));
        }
        let n = h.nrows();
        if h.ncols() != n {
            return Err(Error::NotSquare { rows: n, cols: h.ncols() });
        }
        if n == 0 {
            return Err(Error::InvalidState("empty matrix".into()));
        }
        let scale = max_abs(h);
        let defect = hermitian_defect(h);
        if defect > HERMITIAN_TOL * scale.max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        let h = hermitian_part(h);
        let eig = h.clone().symmetric_eigen();
        let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        for &d in &eigenvalues {
            if d < -NEGATIVE_EIG_TOL * scale {
                return Err(Error::NotPsd(d));
            }
        }
        for d in &mut eigenvalues {
            *d = d.max(0.0);
        }
        let eigenvectors = eig.eigenvectors;

        let d_max = eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
        let q = if d_max > 0.0 { d_max / (1.0 - headroom) } else { 1.0 };
        let mu: Vec<f64> = eigenvalues.iter().map(|d| 1.0 - d / q).collect();
        let states = mu
            .iter()
            .map(|&m| GaussianModeState::thermal(2.0 / m - 1.0))
            .collect::<Result<Vec<_>>>()?;
        // rows index inputs, so the stored network matrix is V^T
        let network = Interferometer::with_tolerance(eigenvectors.transpose(), 1e-9)?;

        let emb = Self {
            h,
            eigenvectors,
            eigenvalues,
            q,
            mu,
            states,
            network,
        };
        let recon = max_abs(&(emb.reconstruct() - &emb.h));
        if recon > 1e-9 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Numerical(format!("eigendecomposition reconstruction error {recon:.3e}")));
        }
        Ok(emb)
    }

    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn is_zero(&self) -> bool {
        self.eigenvalues.iter().all(|&d| d == 0.0)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    /// Thermal variances `V_j = 2/mu_j - 1`.
    pub fn variances(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.v_x()).collect()
    }

    pub fn states(&self) -> &[GaussianModeState] {
        &self.states
    }

    pub fn network(&self) -> &Interferometer {
        &self.network
    }

    /// `V diag(d) V^H`
    pub fn reconstruct(&self) -> CMatrix {
        let mut vd = self.eigenvectors.clone();
        for (j, mut col) in vd.column_iter_mut().enumerate() {
            col *= num_complex::Complex64::new(self.eigenvalues[j], 0.0);
        }
        vd * self.eigenvectors.adjoint()
    }

    /// Factor `q^N / prod mu_j` converting the all-ones probability into `Per(H)`.
    pub fn probability_to_permanent(&self) -> f64 {
        let mu_prod: f64 = self.mu.iter().product();
        self.q.powi(self.dim() as i32) / mu_prod
    }
}

pub fn embed(h: &CMatrix) -> Result<ThermalEmbedding> {
    ThermalEmbedding::new(h)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PermanentEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub exact: Option<f64>,
    pub count: u64,
    pub shots: u64,
    pub low_confidence: bool,
}

impl PermanentEstimate {
    /// `estimate / exact` when the exact value is known and nonzero.
    pub fn ratio(&self) -> Option<f64> {
        self.exact.filter(|&e| e != 0.0).map(|e| self.estimate / e)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EstimateOptions {
    pub headroom: f64,
    /// Attach the exact value regardless of size (up to the Ryser limit).
    pub force_exact: bool,
    pub sampler: SamplerOptions,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            headroom: DEFAULT_HEADROOM,
            force_exact: false,
            sampler: SamplerOptions::default(),
        }
    }
}

pub fn estimate_permanent(h: &CMatrix, shots: u64, seed: u64) -> Result<PermanentEstimate> {
    estimate_permanent_with(h, shots, seed, &EstimateOptions::default())
}

pub fn estimate_permanent_with(
    h: &CMatrix,
    shots: u64,
    seed: u64,
    opts: &EstimateOptions,
) -> Result<PermanentEstimate> {
    if shots == 0 {
        return Err(Error::InvalidState("shot count must be at least 1".into()));
    }
    let emb = ThermalEmbedding::with_headroom(h, opts.headroom)?;
    let n = emb.dim();
    if n > SAMPLING_LIMIT {
        return Err(Error::CostLimit {
            what: "sampled PSD permanent",
            dim: n,
            limit: SAMPLING_LIMIT,
        });
    }
    let exact = if opts.force_exact || n <= AUTO_EXACT_LIMIT {
        Some(exact_permanent_psd(&emb.h)?)
    } else {
        None
    };
    if emb.is_zero() {
        return Ok(PermanentEstimate {
            estimate: 0.0,
            standard_error: 0.0,
            exact,
            count: 0,
            shots,
            low_confidence: false,
        });
    }
    let report = sample_patterns_with(emb.states(), emb.network(), shots, seed, &opts.sampler)?;
    let est = report.estimate(&DetectionPattern::ones(n));
    let factor = emb.probability_to_permanent();
    Ok(PermanentEstimate {
        estimate: est.estimate * factor,
        standard_error: est.standard_error * factor,
        exact,
        count: est.count,
        shots,
        low_confidence: est.count < LOW_CONFIDENCE_COUNT,
    })
}

/// Ryser permanent of a PSD Hermitian matrix, checked to be real and non-negative.
pub fn exact_permanent_psd(h: &CMatrix) -> Result<f64> {
    let n = h.nrows();
    let per = permanent(h).map_err(|e| match e {
        Error::CostLimit { dim, .. } => Error::CostLimit {
            what: "exact PSD permanent",
            dim,
            limit: DEFAULT_PERMANENT_LIMIT,
        },
        other => other,
    })?;
    let scale = max_abs(h).powi(n as i32);
    if per.im.abs() > 1e-10 * per.norm().max(scale) {
        return Err(Error::Numerical(format!(
            "PSD permanent has imaginary part {:.3e} (value {:.6e})",
            per.im, per.re
        )));
    }
    if per.re < -1e-10 * scale {
        return Err(Error::Numerical(format!("PSD permanent is negative: {:.6e}", per.re)));
    }
    Ok(per.re.max(0.0))
}
