//! Output Husimi-function parameterization `(K, C, D~)`.
//!
//! With `W = U^T` the output-by-input transfer matrix, the output Q function of
//! a product Gaussian input is `K/pi^M exp(a C a^T + conj(a C a^T) - a D a^H)` with
//! `C = W diag(lambda) W^T` and `D = W diag(mu) W^H`. Every exact engine consumes
//! `D~ = 1 - D = W diag(1 - mu) W^H` instead of `D`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interferometer::Interferometer;
use crate::numeric::{hermitian_defect, hermitian_part, max_abs, CMatrix};
use crate::states::{GaussianModeState, QFunctionParams};

/// Eigenvalue floor accepted for `D~` before it is considered non-PSD.
pub const PSD_FLOOR: f64 = -1e-10;

#[derive(Clone, Debug)]
pub struct OutputQForm {
    k: f64,
    c: CMatrix,
    d_tilde: CMatrix,
    params: Vec<QFunctionParams>,
}

impl OutputQForm {
    pub fn build(states: &[GaussianModeState], net: &Interferometer) -> Result<Self> {
        let m = net.modes();
        if states.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: states.len(),
                context: "input states vs network modes",
            });
        }
        let params: Vec<QFunctionParams> = states.iter().map(|s| s.q_params()).collect();
        let k = params.iter().map(|p| p.normalization()).product::<f64>();

        let w = net.matrix().transpose();
        let lambda = DVector::from_iterator(m, params.iter().map(|p| Complex64::new(p.lambda, 0.0)));
        let nu = DVector::from_iterator(m, params.iter().map(|p| Complex64::new(p.mu_complement, 0.0)));

        let c = scaled_product(&w, &lambda, &w.transpose());
        let c = (&c + c.transpose()).scale(0.5);
        let d_tilde = hermitian_part(&scaled_product(&w, &nu, &w.adjoint()));

        let qf = Self {
            k,
            c,
            d_tilde,
            params,
        };
        qf.check_invariants()?;
        Ok(qf)
    }

    fn check_invariants(&self) -> Result<()> {
        if !(self.k > 0.0 && self.k <= 1.0 + 1e-12) {
            return Err(Error::Numerical(format!("normalization K = {} outside (0, 1]", self.k)));
        }
        let sym = max_abs(&(&self.c - self.c.transpose()));
        if sym > 1e-12 {
            return Err(Error::Numerical(format!("C not symmetric: {sym:.3e}")));
        }
        let herm = hermitian_defect(&self.d_tilde);
        if herm > 1e-12 {
            return Err(Error::NotHermitian(herm));
        }
        let min_eig = self.min_d_tilde_eigenvalue();
        if min_eig < PSD_FLOOR {
            return Err(Error::NotPsd(min_eig));
        }
        Ok(())
    }

    pub fn min_d_tilde_eigenvalue(&self) -> f64 {
        if self.all_pure() {
            return 0.0;
        }
        self.d_tilde
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b))
    }

    pub fn modes(&self) -> usize {
        self.c.nrows()
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn c(&self) -> &CMatrix {
        &self.c
    }

    pub fn d_tilde(&self) -> &CMatrix {
        &self.d_tilde
    }

    /// `D = 1 - D~`, rebuilt on demand.
    pub fn d(&self) -> CMatrix {
        let m = self.modes();
        CMatrix::identity(m, m) - &self.d_tilde
    }

    pub fn input_params(&self) -> &[QFunctionParams] {
        &self.params
    }

    /// Every input has `lambda = 0` (thermal or vacuum).
    pub fn all_thermal(&self) -> bool {
        self.params.iter().all(|p| p.is_thermal())
    }

    /// Every input has `mu = 1` (squeezed or plain vacuum).
    pub fn all_pure(&self) -> bool {
        self.params.iter().all(|p| p.is_pure())
    }
}

/// `A diag(d) B`
fn scaled_product(a: &CMatrix, d: &DVector<Complex64>, b: &CMatrix) -> CMatrix {
    let mut ad = a.clone();
    for (j, mut col) in ad.column_iter_mut().enumerate() {
        col *= d[j];
    }
    ad * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::CMatrix;

    fn real_rotation(t: f64) -> Interferometer {
        let c = |x: f64| Complex64::new(x, 0.0);
        Interferometer::new(CMatrix::from_row_slice(
            2,
            2,
            &[c(t.cos()), c(-t.sin()), c(t.sin()), c(t.cos())],
        ))
        .unwrap()
    }

    #[test]
    fn vacuum_gives_trivial_form() {
        let net = Interferometer::haar_random(4, 3).unwrap();
        let q = OutputQForm::build(&[GaussianModeState::vacuum(); 4], &net).unwrap();
        assert_eq!(q.k(), 1.0);
        assert_eq!(max_abs(q.c()), 0.0);
        assert_eq!(max_abs(q.d_tilde()), 0.0);
    }

    #[test]
    fn equal_thermal_is_uncorrelated() {
        let net = Interferometer::haar_random(4, 9).unwrap();
        let th = GaussianModeState::thermal(2.5).unwrap();
        let q = OutputQForm::build(&[th; 4], &net).unwrap();
        let nu = th.q_params().mu_complement;
        assert_eq!(max_abs(q.c()), 0.0);
        let expect = CMatrix::identity(4, 4).scale(nu);
        assert!(max_abs(&(q.d_tilde() - expect)) < 1e-14);
    }

    #[test]
    fn equal_squeezing_through_orthogonal_network() {
        let net = real_rotation(0.8);
        let s = GaussianModeState::squeezed(0.6).unwrap();
        let q = OutputQForm::build(&[s; 2], &net).unwrap();
        let lambda = s.q_params().lambda;
        assert!(max_abs(&(q.c() - CMatrix::identity(2, 2).scale(lambda))) < 1e-15);
        assert_eq!(max_abs(q.d_tilde()), 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let net = Interferometer::identity(3);
        assert!(OutputQForm::build(&[GaussianModeState::vacuum(); 2], &net).is_err());
    }

    #[test]
    fn trace_and_spectrum_of_d() {
        for seed in 0..10 {
            let net = Interferometer::haar_random(5, seed).unwrap();
            let states: Vec<_> = (0..5)
                .map(|i| GaussianModeState::squeezed_thermal(1.0 + 0.7 * i as f64, 0.1 * i as f64).unwrap())
                .collect();
            let q = OutputQForm::build(&states, &net).unwrap();
            let mu_sum: f64 = q.input_params().iter().map(|p| p.mu).sum();
            assert!((q.d().trace().re - mu_sum).abs() < 1e-12);
            let eig = q.d().symmetric_eigenvalues();
            assert!(eig.iter().all(|&e| e > 0.0 && e <= 1.0 + 1e-12));
            assert!(q.min_d_tilde_eigenvalue() >= PSD_FLOOR);
        }
    }
}
