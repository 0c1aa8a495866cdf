//! Single-mode Gaussian input states.
//!
//! Quadrature variances use the convention where the vacuum has `v_x = v_p = 1`.
//! States carry zero first moments; a displacement in front of a passive
//! network is equivalent to one behind it and is not represented here. Any
//! phase rotation is assumed to have been folded into the network, so every
//! state is stored with `v_x >= v_p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on `v_x * v_p - 1` under which a state is treated as pure.
pub const PURITY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianModeState {
    v_x: f64,
    v_p: f64,
}

/// Parameters of the single-mode Husimi function
/// `Q(a) = sqrt(mu^2 - 4 lambda^2)/pi * exp(lambda (a^2 + conj(a)^2) - mu |a|^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QFunctionParams {
    pub lambda: f64,
    pub mu: f64,
    /// `1 - mu`, computed without cancellation; exactly zero for pure states.
    pub mu_complement: f64,
}

impl QFunctionParams {
    /// `sqrt(mu^2 - 4 lambda^2)`, this mode's factor of the output normalization.
    pub fn normalization(&self) -> f64 {
        ((self.mu - 2.0 * self.lambda) * (self.mu + 2.0 * self.lambda)).sqrt()
    }

    pub fn is_thermal(&self) -> bool {
        self.lambda == 0.0
    }

    pub fn is_pure(&self) -> bool {
        self.mu_complement == 0.0
    }
}

impl GaussianModeState {
    /// Validates raw quadrature variances.
    pub fn new(v_x: f64, v_p: f64) -> Result<Self> {
        if !(v_x.is_finite() && v_p.is_finite()) || v_x <= 0.0 || v_p <= 0.0 {
            return Err(Error::InvalidState(format!(
                "variances must be finite and positive (v_x = {v_x}, v_p = {v_p})"
            )));
        }
        if v_x < v_p {
            return Err(Error::InvalidState(format!(
                "v_x = {v_x} < v_p = {v_p}; rotate the mode by pi/2 inside the network instead"
            )));
        }
        if v_x * v_p < 1.0 - PURITY_TOL {
            return Err(Error::InvalidState(format!(
                "v_x * v_p = {} violates the uncertainty bound",
                v_x * v_p
            )));
        }
        Ok(Self { v_x, v_p })
    }

    pub fn vacuum() -> Self {
        Self { v_x: 1.0, v_p: 1.0 }
    }

    /// Thermal state with quadrature variance `v` (mean photon number `(v-1)/2`).
    pub fn thermal(v: f64) -> Result<Self> {
        if !(v >= 1.0 - PURITY_TOL) {
            return Err(Error::InvalidState(format!("thermal variance {v} < 1")));
        }
        Self::new(v.max(1.0), v.max(1.0))
    }

    /// Squeezed vacuum with `v_x = e^{2|r|}`, `v_p = e^{-2|r|}`.
    pub fn squeezed(r: f64) -> Result<Self> {
        Self::squeezed_thermal(1.0, r)
    }

    /// Squeezed thermal state: `v_x = v e^{2|r|}`, `v_p = v e^{-2|r|}`.
    pub fn squeezed_thermal(v: f64, r: f64) -> Result<Self> {
        if !r.is_finite() {
            return Err(Error::InvalidState(format!("squeezing {r} is not finite")));
        }
        if !(v >= 1.0 - PURITY_TOL) {
            return Err(Error::InvalidState(format!("thermal variance {v} < 1")));
        }
        let r = r.abs();
        let v = v.max(1.0);
        Self::new(v * (2.0 * r).exp(), v * (-2.0 * r).exp())
    }

    pub fn v_x(&self) -> f64 {
        self.v_x
    }

    pub fn v_p(&self) -> f64 {
        self.v_p
    }

    pub fn is_pure(&self) -> bool {
        (self.v_x * self.v_p - 1.0).abs() <= PURITY_TOL
    }

    /// `(lambda, mu)` of the Husimi function.
    pub fn q_params(&self) -> QFunctionParams {
        let (vx, vp) = (self.v_x, self.v_p);
        let lambda = if vx == vp {
            0.0
        } else {
            1.0 / (2.0 * vp + 2.0) - 1.0 / (2.0 * vx + 2.0)
        };
        if self.is_pure() {
            QFunctionParams {
                lambda,
                mu: 1.0,
                mu_complement: 0.0,
            }
        } else {
            // 1 - mu = (v_x v_p - 1) / ((v_x + 1)(v_p + 1))
            let mu_complement = ((vx * vp - 1.0) / ((vx + 1.0) * (vp + 1.0))).max(0.0);
            QFunctionParams {
                lambda,
                mu: 1.0 / (vx + 1.0) + 1.0 / (vp + 1.0),
                mu_complement,
            }
        }
    }

    /// A non-negative Gaussian P function exists iff `v_p >= 1`.
    pub fn is_classical(&self) -> bool {
        self.v_p >= 1.0 - PURITY_TOL
    }

    pub fn is_vacuum(&self) -> bool {
        self.v_x == 1.0 && self.v_p == 1.0
    }

    pub fn mean_photon_number(&self) -> f64 {
        ((self.v_x + self.v_p) / 4.0 - 0.5).max(0.0)
    }
}

/// Free-function form of [`GaussianModeState::q_params`].
pub fn derive_q_params(state: &GaussianModeState) -> QFunctionParams {
    state.q_params()
}

/// Tagged state record as it appears in run configs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateDescriptor {
    Vacuum,
    Thermal { v: f64 },
    Squeezed { r: f64 },
    SqueezedThermal { v: f64, r: f64 },
    Variances { v_x: f64, v_p: f64 },
}

impl StateDescriptor {
    pub fn build(&self) -> Result<GaussianModeState> {
        match *self {
            StateDescriptor::Vacuum => Ok(GaussianModeState::vacuum()),
            StateDescriptor::Thermal { v } => GaussianModeState::thermal(v),
            StateDescriptor::Squeezed { r } => GaussianModeState::squeezed(r),
            StateDescriptor::SqueezedThermal { v, r } => GaussianModeState::squeezed_thermal(v, r),
            StateDescriptor::Variances { v_x, v_p } => GaussianModeState::new(v_x, v_p),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn vacuum_params() {
        let p = GaussianModeState::vacuum().q_params();
        assert_eq!(p.lambda, 0.0);
        assert_eq!(p.mu, 1.0);
        assert_eq!(p.normalization(), 1.0);
    }

    #[test]
    fn thermal_params() {
        let p = GaussianModeState::thermal(3.0).unwrap().q_params();
        assert_eq!(p.lambda, 0.0);
        assert_eq!(p.mu, 0.5);
        assert_eq!(p.mu_complement, 0.5);
    }

    #[test]
    fn squeezed_params() {
        let s = GaussianModeState::squeezed(0.5).unwrap();
        let p = s.q_params();
        assert_abs_diff_eq!(p.lambda, 0.5f64.tanh() / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.lambda, 0.231059, epsilon = 1e-6);
        assert_eq!(p.mu, 1.0);
        assert_eq!(p.mu_complement, 0.0);
        assert_abs_diff_eq!(p.normalization(), 1.0 / 0.5f64.cosh(), epsilon = 1e-15);
    }

    #[test]
    fn rejects_unphysical() {
        assert!(GaussianModeState::new(0.5, 0.5).is_err());
        assert!(GaussianModeState::new(-1.0, 2.0).is_err());
        assert!(GaussianModeState::new(1.0, 2.0).is_err());
        assert!(GaussianModeState::new(f64::NAN, 1.0).is_err());
        assert!(GaussianModeState::thermal(0.9).is_err());
    }

    #[test]
    fn classicality() {
        assert!(GaussianModeState::thermal(3.0).unwrap().is_classical());
        assert!(!GaussianModeState::squeezed(0.3).unwrap().is_classical());
        assert!(GaussianModeState::new(4.0, 1.5).unwrap().is_classical());
        assert!(GaussianModeState::vacuum().is_classical());
    }

    #[test]
    fn mean_photons() {
        assert_eq!(GaussianModeState::vacuum().mean_photon_number(), 0.0);
        // geometric law with mean (V - 1)/2
        assert_abs_diff_eq!(
            GaussianModeState::thermal(3.0).unwrap().mean_photon_number(),
            1.0,
            epsilon = 1e-15
        );
        let n = GaussianModeState::squeezed(0.5).unwrap().mean_photon_number();
        assert_abs_diff_eq!(n, 0.5f64.sinh().powi(2), epsilon = 1e-14);
        assert_abs_diff_eq!(n, 0.27154, epsilon = 1e-5);
    }

    #[test]
    fn negative_squeezing_is_canonicalized() {
        let a = GaussianModeState::squeezed(-0.4).unwrap();
        let b = GaussianModeState::squeezed(0.4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn descriptor_json() {
        let d: StateDescriptor =
            serde_json::from_str(r#"{"type":"squeezed_thermal","v":1.2,"r":0.3}"#).unwrap();
        assert_eq!(d, StateDescriptor::SqueezedThermal { v: 1.2, r: 0.3 });
        let d: StateDescriptor = serde_json::from_str(r#"{"type":"vacuum"}"#).unwrap();
        assert!(d.build().unwrap().is_vacuum());
        assert!(serde_json::from_str::<StateDescriptor>(r#"{"type":"coherent","alpha":1}"#).is_err());
    }

    proptest! {
        #[test]
        fn q_function_normalizable(v in 1.0f64..20.0, r in 0.0f64..2.0) {
            let p = GaussianModeState::squeezed_thermal(v, r).unwrap().q_params();
            prop_assert!(p.mu * p.mu > 4.0 * p.lambda * p.lambda);
            prop_assert!(p.mu > 0.0 && p.mu <= 1.0);
            prop_assert!(p.lambda >= 0.0);
            prop_assert!((p.mu + p.mu_complement - 1.0).abs() < 1e-14);
        }

        #[test]
        fn lambda_zero_iff_symmetric(v in 1.0f64..20.0, r in 0.0f64..2.0) {
            let s = GaussianModeState::squeezed_thermal(v, r).unwrap();
            prop_assert_eq!(s.q_params().lambda == 0.0, s.v_x() == s.v_p());
        }

        #[test]
        fn mu_one_iff_pure(v in prop_oneof![Just(1.0f64), 1.001f64..20.0], r in 0.0f64..2.0) {
            let s = GaussianModeState::squeezed_thermal(v, r).unwrap();
            prop_assert_eq!(s.q_params().mu == 1.0, v == 1.0);
        }
    }
}
