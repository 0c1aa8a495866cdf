//! Exact single-photon detection probabilities.
//!
//! Four routes compute `p(n)` for a pattern `n ∈ {0,1}^M`:
//!
//! * coherent inputs: `exp(-I) prod_k |beta_k|^{2 n_k}`;
//! * general Gaussian inputs: `K haf(B)` over the pairing matrix of second
//!   derivatives of the output Q-function exponent;
//! * thermal inputs (`C = 0`): `(prod_s mu_s) Per(D~_n)`;
//! * pure squeezed inputs (`D~ = 0`): `K |2^{N/2} haf(C_n)|^2`, zero for odd `N`.
//!
//! The specialized routes refuse inputs outside their domain rather than
//! falling back to the general one.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interferometer::Interferometer;
use crate::matrix_functions::{hafnian, permanent, submatrix_by_pattern};
use crate::numeric::CMatrix;
use crate::pattern::DetectionPattern;
use crate::qform::OutputQForm;

/// Largest imaginary residue or negative excursion tolerated on a probability.
pub const RESIDUE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    General,
    Thermal,
    Squeezed,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::General => "general",
            Engine::Thermal => "thermal",
            Engine::Squeezed => "squeezed",
        }
    }

    pub fn probability(self, qform: &OutputQForm, pattern: &DetectionPattern) -> Result<f64> {
        match self {
            Engine::General => prob_general(qform, pattern),
            Engine::Thermal => prob_thermal(qform, pattern),
            Engine::Squeezed => prob_squeezed(qform, pattern),
        }
    }

    /// Engines whose preconditions hold for this output form; `General` always first.
    pub fn applicable(qform: &OutputQForm) -> Vec<Engine> {
        let mut out = vec![Engine::General];
        if qform.all_thermal() {
            out.push(Engine::Thermal);
        }
        if qform.all_pure() {
            out.push(Engine::Squeezed);
        }
        out
    }

    /// Cheapest applicable engine.
    pub fn preferred(qform: &OutputQForm) -> Engine {
        if qform.all_thermal() {
            Engine::Thermal
        } else if qform.all_pure() {
            Engine::Squeezed
        } else {
            Engine::General
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "general" => Ok(Engine::General),
            "thermal" => Ok(Engine::Thermal),
            "squeezed" => Ok(Engine::Squeezed),
            other => Err(Error::Parse(format!("unknown engine {other:?}"))),
        }
    }
}

fn check_pattern(modes: usize, pattern: &DetectionPattern) -> Result<()> {
    if pattern.modes() != modes {
        return Err(Error::DimensionMismatch {
            expected: modes,
            got: pattern.modes(),
            context: "pattern length vs mode count",
        });
    }
    Ok(())
}

/// Collapses a complex probability estimate to a real value in `[0, 1]`.
fn finish(value: Complex64, route: &str) -> Result<f64> {
    if value.im.abs() > RESIDUE_TOL {
        return Err(Error::Numerical(format!(
            "{route}: imaginary residue {:.3e} on probability {:.6e}",
            value.im, value.re
        )));
    }
    if value.re < -RESIDUE_TOL {
        return Err(Error::Numerical(format!("{route}: negative probability {:.6e}", value.re)));
    }
    Ok(value.re.clamp(0.0, 1.0))
}

/// Detection probability for a coherent input `alpha`.
pub fn prob_coherent(net: &Interferometer, alpha: &[Complex64], pattern: &DetectionPattern) -> Result<f64> {
    check_pattern(net.modes(), pattern)?;
    let beta = net.propagate_coherent(alpha)?;
    let intensity: f64 = beta.iter().map(|b| b.norm_sqr()).sum();
    let weight: f64 = beta
        .iter()
        .zip(pattern.flags())
        .filter(|(_, &f)| f)
        .map(|(b, _)| b.norm_sqr())
        .product();
    Ok((-intensity).exp() * weight)
}

/// Symmetric `2N x 2N` matrix of second derivatives of the exponent `F`,
/// with labels `(a_{s_1}..a_{s_N}, conj(a_{s_1})..conj(a_{s_N}))`, detected modes ascending.
pub fn pairing_matrix(qform: &OutputQForm, pattern: &DetectionPattern) -> Result<CMatrix> {
    check_pattern(qform.modes(), pattern)?;
    let idx = pattern.detected();
    let n = idx.len();
    let (c, dt) = (qform.c(), qform.d_tilde());
    Ok(CMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
        (true, true) => c[(idx[i], idx[j])] * 2.0,
        (true, false) => dt[(idx[i], idx[j - n])],
        (false, true) => dt[(idx[j], idx[i - n])],
        (false, false) => c[(idx[i - n], idx[j - n])].conj() * 2.0,
    }))
}

/// `K haf(B)`; valid for any product Gaussian input.
pub fn prob_general(qform: &OutputQForm, pattern: &DetectionPattern) -> Result<f64> {
    let b = pairing_matrix(qform, pattern)?;
    let h = hafnian(&b)?;
    finish(h * qform.k(), "general engine")
}

/// `(prod mu_s) Per(D~_n)`; requires `lambda_s = 0` for every input.
pub fn prob_thermal(qform: &OutputQForm, pattern: &DetectionPattern) -> Result<f64> {
    if !qform.all_thermal() {
        return Err(Error::Contract(
            "thermal engine requires every input to have lambda = 0 (thermal or vacuum)".into(),
        ));
    }
    check_pattern(qform.modes(), pattern)?;
    let sub = submatrix_by_pattern(qform.d_tilde(), pattern)?;
    let per = permanent(&sub)?;
    let mu_product: f64 = qform.input_params().iter().map(|p| p.mu).product();
    finish(per * mu_product, "thermal engine")
}

/// `K |O_N|^2` with `O_N = 2^{N/2} haf(C_n)`; requires `mu_s = 1` for every input.
pub fn prob_squeezed(qform: &OutputQForm, pattern: &DetectionPattern) -> Result<f64> {
    if !qform.all_pure() {
        return Err(Error::Contract(
            "squeezed engine requires every input to be pure (mu = 1)".into(),
        ));
    }
    check_pattern(qform.modes(), pattern)?;
    if pattern.n() % 2 == 1 {
        return Ok(0.0);
    }
    let o_n = squeezed_amplitude(qform, pattern)?;
    finish(Complex64::new(qform.k() * o_n.norm_sqr(), 0.0), "squeezed engine")
}

/// The pairing sum `O_N = 2^{N/2} haf(C_n)` for an even pattern.
pub fn squeezed_amplitude(qform: &OutputQForm, pattern: &DetectionPattern) -> Result<Complex64> {
    let sub = submatrix_by_pattern(qform.c(), pattern)?;
    let h = hafnian(&sub)?;
    Ok(h * 2f64.powi(pattern.n() as i32 / 2))
}
