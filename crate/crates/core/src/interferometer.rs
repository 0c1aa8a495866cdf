//! Passive linear-optical networks.
//!
//! The matrix `U` is stored with rows indexing input modes and columns indexing
//! output modes: an input coherent state `alpha` leaves as `beta_k = sum_j alpha_j U_jk`,
//! and creation operators transform as `a_j^dag -> sum_k U_jk a_k^dag`.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::numeric::{max_abs, CMatrix, ONE, ZERO};

pub const DEFAULT_UNITARITY_TOL: f64 = 1e-10;

/// A validated `M x M` unitary network matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Interferometer {
    u: CMatrix,
    unitarity_defect: f64,
}

impl Interferometer {
    pub fn new(u: CMatrix) -> Result<Self> {
        Self::with_tolerance(u, DEFAULT_UNITARITY_TOL)
    }

    pub fn with_tolerance(u: CMatrix, tolerance: f64) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::NotSquare {
                rows: u.nrows(),
                cols: u.ncols(),
            });
        }
        if u.nrows() == 0 {
            return Err(Error::InvalidState("network must have at least one mode".into()));
        }
        let defect = unitarity_defect(&u);
        if !(defect <= tolerance) {
            return Err(Error::NotUnitary { defect, tolerance });
        }
        Ok(Self {
            u,
            unitarity_defect: defect,
        })
    }

    pub fn identity(modes: usize) -> Self {
        Self {
            u: CMatrix::identity(modes, modes),
            unitarity_defect: 0.0,
        }
    }

    /// Haar-distributed unitary drawn with a seeded ChaCha8 stream.
    ///
    /// Entries of a complex Ginibre matrix are orthonormalized by QR and the
    /// columns are rephased by `R_ii/|R_ii|` so the result is Haar rather than
    /// biased by the QR sign convention.
    pub fn haar_random(modes: usize, seed: u64) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidState("haar_random needs at least one mode".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = std::f64::consts::FRAC_1_SQRT_2;
        let z = CMatrix::from_fn(modes, modes, |_, _| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re * scale, im * scale)
        });
        let qr = z.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..modes {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
            for i in 0..modes {
                q[(i, j)] *= phase;
            }
        }
        Self::new(q)
    }

    pub fn modes(&self) -> usize {
        self.u.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.u
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.unitarity_defect
    }

    /// Output coherent amplitudes `beta = U^T alpha`.
    pub fn propagate_coherent(&self, alpha: &[Complex64]) -> Result<Vec<Complex64>> {
        let m = self.modes();
        if alpha.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: alpha.len(),
                context: "coherent amplitudes",
            });
        }
        let mut beta = vec![ZERO; m];
        self.propagate_into(alpha, &mut beta);
        Ok(beta)
    }

    /// Allocation-free propagation for hot loops; slices must have length `modes()`.
    pub(crate) fn propagate_into(&self, alpha: &[Complex64], beta: &mut [Complex64]) {
        for (k, b) in beta.iter_mut().enumerate() {
            *b = alpha
                .iter()
                .enumerate()
                .fold(ZERO, |acc, (j, a)| acc + a * self.u[(j, k)]);
        }
    }

    /// Relabels output modes: output `k` of the result is output `perm[k]` of `self`.
    pub fn permute_outputs(&self, perm: &[usize]) -> Result<Self> {
        let m = self.modes();
        if perm.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: perm.len(),
                context: "output permutation",
            });
        }
        let u = CMatrix::from_fn(m, m, |i, k| self.u[(i, perm[k])]);
        Self::new(u)
    }

    /// Triangular decomposition into two-mode rotations and output phases.
    ///
    /// Below-diagonal entries are nulled column by column with rotations on
    /// adjacent rows, bottom-up. The result satisfies
    /// `U = L_1 L_2 ... L_n diag(phases)`, so applying the layers in order and
    /// then the phases reproduces the network.
    pub fn decompose(&self) -> Decomposition {
        let m = self.modes();
        let mut v = self.u.clone();
        let mut layers = Vec::new();
        for col in 0..m.saturating_sub(1) {
            for row in (col + 1..m).rev() {
                let a = v[(row - 1, col)];
                let b = v[(row, col)];
                if b.norm() <= 1e-15 {
                    continue;
                }
                let layer = TwoModeLayer {
                    modes: (row - 1, row),
                    theta: b.norm().atan2(a.norm()),
                    phi: if a.norm() > 0.0 { a.arg() - b.arg() } else { -b.arg() },
                };
                layer.apply_adjoint_left(&mut v);
                layers.push(layer);
            }
        }
        let phases = (0..m)
            .map(|i| {
                let d = v[(i, i)];
                if d.norm() > 0.0 { d / d.norm() } else { ONE }
            })
            .collect();
        Decomposition {
            modes: m,
            layers,
            phases,
        }
    }
}

/// `‖UᴴU − 1‖_max`
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - CMatrix::identity(n, n)))
}

/// Free-function alias of [`Interferometer::new`].
pub fn validate(u: CMatrix) -> Result<Interferometer> {
    Interferometer::new(u)
}

/// One rotation on adjacent modes `(i, j)`: the 2x2 block
/// `[[e^{i phi} cos theta, -e^{i phi} sin theta], [sin theta, cos theta]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoModeLayer {
    pub modes: (usize, usize),
    pub theta: f64,
    pub phi: f64,
}

impl TwoModeLayer {
    /// Row-major 2x2 block.
    pub fn block(&self) -> [[Complex64; 2]; 2] {
        let (s, c) = self.theta.sin_cos();
        let e = Complex64::from_polar(1.0, self.phi);
        [
            [e * c, -e * s],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ]
    }

    pub fn embed(&self, modes: usize) -> CMatrix {
        let mut m = CMatrix::identity(modes, modes);
        let b = self.block();
        let (i, j) = self.modes;
        m[(i, i)] = b[0][0];
        m[(i, j)] = b[0][1];
        m[(j, i)] = b[1][0];
        m[(j, j)] = b[1][1];
        m
    }

    fn apply_adjoint_left(&self, v: &mut CMatrix) {
        let b = self.block();
        let (i, j) = self.modes;
        for col in 0..v.ncols() {
            let x = v[(i, col)];
            let y = v[(j, col)];
            v[(i, col)] = b[0][0].conj() * x + b[1][0].conj() * y;
            v[(j, col)] = b[0][1].conj() * x + b[1][1].conj() * y;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub modes: usize,
    pub layers: Vec<TwoModeLayer>,
    pub phases: Vec<Complex64>,
}

impl Decomposition {
    pub fn recompose(&self) -> CMatrix {
        let m = self.modes;
        let product = self
            .layers
            .iter()
            .fold(CMatrix::identity(m, m), |acc, l| acc * l.embed(m));
        product * CMatrix::from_diagonal(&DVector::from_vec(self.phases.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hadamard() -> CMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_row_slice(2, 2, &[c(h, 0.), c(h, 0.), c(h, 0.), c(-h, 0.)])
    }

    #[test]
    fn validates_identity_and_hadamard() {
        let id = Interferometer::new(CMatrix::identity(4, 4)).unwrap();
        assert_eq!(id.unitarity_defect(), 0.0);
        assert!(Interferometer::new(hadamard()).is_ok());
    }

    #[test]
    fn rejects_bad_matrices() {
        let shear = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(1., 0.), c(1., 0.)]);
        assert!(matches!(Interferometer::new(shear), Err(Error::NotUnitary { .. })));
        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(Interferometer::new(rect), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn haar_single_mode_is_a_phase() {
        for seed in 0..5 {
            let u = Interferometer::haar_random(1, seed).unwrap();
            assert!((u.matrix()[(0, 0)].norm() - 1.0).abs() < 1e-14);
        }
        assert!(Interferometer::haar_random(0, 1).is_err());
    }

    #[test]
    fn haar_is_deterministic() {
        let a = Interferometer::haar_random(5, 42).unwrap();
        let b = Interferometer::haar_random(5, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, Interferometer::haar_random(5, 43).unwrap());
    }

    #[test]
    fn haar_second_moment() {
        // E|U_11|^2 = 1/M, Var|U_11|^2 = (M-1)/(M^2 (M+1))
        let m = 6.0;
        let xs: Vec<f64> = (1..=100)
            .map(|s| Interferometer::haar_random(6, s).unwrap().matrix()[(0, 0)].norm_sqr())
            .collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let se = ((m - 1.0) / (m * m * (m + 1.0)) / xs.len() as f64).sqrt();
        assert!((mean - 1.0 / m).abs() < 5.0 * se, "mean {mean}");
    }

    #[test]
    fn propagation_examples() {
        let alpha = vec![c(0.3, -0.2), c(1.0, 0.5)];
        let id = Interferometer::identity(2);
        assert_eq!(id.propagate_coherent(&alpha).unwrap(), alpha);

        let bs = Interferometer::new(hadamard()).unwrap();
        let g = c(1.2, 0.7);
        let beta = bs.propagate_coherent(&[g, c(0., 0.)]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((beta[0] - g * h).norm() < 1e-15);
        assert!((beta[1] - g * h).norm() < 1e-15);
        assert!(bs.propagate_coherent(&[g]).is_err());
    }

    #[test]
    fn decompose_identity_is_empty() {
        let d = Interferometer::identity(4).decompose();
        assert!(d.layers.is_empty());
        assert!(d.phases.iter().all(|p| *p == ONE));
    }

    #[test]
    fn decompose_real_rotation() {
        let t: f64 = 0.37;
        let u = CMatrix::from_row_slice(
            2,
            2,
            &[c(t.cos(), 0.), c(-t.sin(), 0.), c(t.sin(), 0.), c(t.cos(), 0.)],
        );
        let d = Interferometer::new(u.clone()).unwrap().decompose();
        assert_eq!(d.layers.len(), 1);
        assert!((d.layers[0].theta - t).abs() < 1e-14);
        assert!(max_abs(&(d.recompose() - u)) < 1e-14);
    }

    #[test]
    fn decompose_haar_four_modes() {
        let net = Interferometer::haar_random(4, 11).unwrap();
        let d = net.decompose();
        assert!(d.layers.len() <= 6);
        assert!(max_abs(&(d.recompose() - net.matrix())) <= 1e-10);
    }

    proptest! {
        #[test]
        fn recomposition_roundtrip(m in 1usize..=8, seed in any::<u64>()) {
            let net = Interferometer::haar_random(m, seed).unwrap();
            let d = net.decompose();
            prop_assert!(d.layers.len() <= m * (m - 1) / 2);
            prop_assert!(max_abs(&(d.recompose() - net.matrix())) <= 1e-10);
        }

        #[test]
        fn propagation_is_linear_and_norm_preserving(
            seed in any::<u64>(),
            a in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 5),
            b in proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 5),
            s in (-3.0f64..3.0, -3.0f64..3.0),
        ) {
            let net = Interferometer::haar_random(5, seed).unwrap();
            let a: Vec<_> = a.into_iter().map(|(x, y)| c(x, y)).collect();
            let b: Vec<_> = b.into_iter().map(|(x, y)| c(x, y)).collect();
            let s = c(s.0, s.1);
            let combo: Vec<_> = a.iter().zip(&b).map(|(x, y)| x + s * y).collect();
            let lhs = net.propagate_coherent(&combo).unwrap();
            let pa = net.propagate_coherent(&a).unwrap();
            let pb = net.propagate_coherent(&b).unwrap();
            for k in 0..5 {
                prop_assert!((lhs[k] - (pa[k] + s * pb[k])).norm() < 1e-12);
            }
            let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
            let nb: f64 = pa.iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((na - nb).abs() < 1e-12);
        }
    }
}
