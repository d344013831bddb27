//! Physical parameters and the Hamiltonians of the modulated Kerr cavity.
//!
//! Every Hamiltonian used here has the same shape in the number basis:
//!
//! ```text
//! H(t) = sum_n d_n(t) |n><n| + sum_n [ c_n(t) |n+2><n| + h.c. ]
//! d_n(t) = d0(t) + d1(t) n + d2(t) n^2
//! c_n(t) = A(t) sqrt((n+1)(n+2)) exp(i w(t) n)
//! ```
//!
//! [`Hamiltonian`] exposes that structure directly (diagonal coefficients,
//! their time integrals, and the pair coupling) so the propagators can apply
//! it in `O(dim)` and move into the frame co-rotating with the diagonal.
//! [`Hamiltonian::to_dense`] materializes the same operator from ladder
//! matrix products for checks at small dimension.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fock::{DenseOperator, Ladder};
use crate::C64;

/// Cavity frequency, modulation depth, Kerr shift and truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    omega0: f64,
    epsilon: f64,
    kerr: f64,
    dim: usize,
}

impl ModelParams {
    pub fn new(omega0: f64, epsilon: f64, kerr: f64, dim: usize) -> Result<Self> {
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::InvalidParameter {
                field: "omega0",
                reason: format!("must be finite and > 0, got {omega0}"),
            });
        }
        if !(epsilon.is_finite() && (0.0..1.0).contains(&epsilon)) {
            return Err(Error::InvalidParameter {
                field: "epsilon",
                reason: format!("must lie in [0, 1), got {epsilon}"),
            });
        }
        if !(kerr.is_finite() && kerr >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "kerr",
                reason: format!("must be finite and >= 0, got {kerr}"),
            });
        }
        if dim < 2 {
            return Err(Error::InvalidDimension { dim, min: 2 });
        }
        Ok(Self {
            omega0,
            epsilon,
            kerr,
            dim,
        })
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kerr(&self) -> f64 {
        self.kerr
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Drive strength `g = epsilon omega0 / 2`.
    pub fn g(&self) -> f64 {
        self.epsilon * self.omega0 / 2.0
    }

    pub fn with_kerr(&self, kerr: f64) -> Result<Self> {
        Self::new(self.omega0, self.epsilon, kerr, self.dim)
    }

    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::new(self.omega0, self.epsilon, self.kerr, dim)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.omega0, epsilon, self.kerr, self.dim)
    }

    pub fn with_omega0(&self, omega0: f64) -> Result<Self> {
        Self::new(omega0, self.epsilon, self.kerr, self.dim)
    }

    /// Kerr revival time `2 pi / K` (infinite for `K = 0`).
    pub fn revival_time(&self) -> f64 {
        2.0 * PI / self.kerr
    }
}

/// Which form of the frequency and squeezing rate to use.
///
/// `Exact` keeps `omega(t) = omega0 (1 + eps sin 2 omega0 t)` and
/// `chi = omega'/(4 omega)`; `Approximate` sets `omega = omega0` and
/// `chi = (eps omega0 / 2) cos 2 omega0 t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChiMode {
    #[default]
    Exact,
    Approximate,
}

/// `omega0 (1 + eps sin(2 omega0 t))`.
pub fn instantaneous_frequency(p: &ModelParams, t: f64) -> f64 {
    p.omega0 * (1.0 + p.epsilon * (2.0 * p.omega0 * t).sin())
}

/// Cavity frequency entering the Hamiltonian under the given mode.
pub fn frequency(p: &ModelParams, t: f64, mode: ChiMode) -> f64 {
    match mode {
        ChiMode::Exact => instantaneous_frequency(p, t),
        ChiMode::Approximate => p.omega0,
    }
}

/// `int_0^t frequency(s) ds`.
pub fn integrated_frequency(p: &ModelParams, t: f64, mode: ChiMode) -> f64 {
    match mode {
        ChiMode::Exact => {
            p.omega0 * t + 0.5 * p.epsilon * (1.0 - (2.0 * p.omega0 * t).cos())
        }
        ChiMode::Approximate => p.omega0 * t,
    }
}

/// Squeezing rate `chi(t) = omega'(t) / (4 omega(t))`, or its first-order form.
pub fn squeezing_rate(p: &ModelParams, t: f64, mode: ChiMode) -> f64 {
    let c = (2.0 * p.omega0 * t).cos();
    match mode {
        ChiMode::Exact => {
            p.epsilon * p.omega0 * p.omega0 * c / (2.0 * instantaneous_frequency(p, t))
        }
        ChiMode::Approximate => 0.5 * p.epsilon * p.omega0 * c,
    }
}

/// `f(t) = i g exp(2 i K t)`.
pub fn drive_function(p: &ModelParams, t: f64) -> C64 {
    C64::new(0.0, p.g()) * C64::from_polar(1.0, 2.0 * p.kerr * t)
}

/// Quadratic in the photon number: `c0 + c1 n + c2 n^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quadratic {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Quadratic {
    pub fn at(&self, n: usize) -> f64 {
        let n = n as f64;
        self.c0 + n * (self.c1 + n * self.c2)
    }
}

/// Pair coupling `<n+2|H|n> = amplitude sqrt((n+1)(n+2)) exp(i twist n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCoupling {
    pub amplitude: C64,
    pub twist: f64,
}

/// The Hamiltonians of the model, all of the banded form described in the
/// module docs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hamiltonian {
    /// `omega(t) a+a + i chi(t)(a+^2 - a^2) + (K/2) a+^2 a^2`.
    Full { params: ModelParams, mode: ChiMode },
    /// Rotating-wave generator `(i eps omega0 / 4)(a+^2 - a^2) + (K/2) a+^2 a^2`.
    Rwa { params: ModelParams },
    /// `-K L0 + f(t) L+ + f*(t) L-` with `L+ = a+^2 / 2`, `L- = a^2 / 2`.
    InteractionTilde { params: ModelParams },
    /// Same, but with the time-dependent generators
    /// `L+(t) = a+^2 exp(2iKt a+a) / 2`. Exact frame change of [`Hamiltonian::Rwa`]
    /// up to the constant `K/4`.
    Interaction { params: ModelParams },
}

impl Hamiltonian {
    pub fn params(&self) -> &ModelParams {
        match self {
            Hamiltonian::Full { params, .. }
            | Hamiltonian::Rwa { params }
            | Hamiltonian::InteractionTilde { params }
            | Hamiltonian::Interaction { params } => params,
        }
    }

    pub fn dim(&self) -> usize {
        self.params().dim
    }

    /// Diagonal `d_n(t)`.
    pub fn diagonal(&self, t: f64) -> Quadratic {
        let p = self.params();
        let half_k = 0.5 * p.kerr;
        match *self {
            Hamiltonian::Full { mode, .. } => Quadratic {
                c0: 0.0,
                c1: frequency(p, t, mode) - half_k,
                c2: half_k,
            },
            Hamiltonian::Rwa { .. } => Quadratic {
                c0: 0.0,
                c1: -half_k,
                c2: half_k,
            },
            Hamiltonian::InteractionTilde { .. } | Hamiltonian::Interaction { .. } => {
                Quadratic {
                    c0: -0.5 * half_k,
                    c1: -half_k,
                    c2: 0.0,
                }
            }
        }
    }

    /// `int_0^t d_n(s) ds`, coefficient-wise.
    pub fn diagonal_phase(&self, t: f64) -> Quadratic {
        let p = self.params();
        match *self {
            Hamiltonian::Full { mode, .. } => Quadratic {
                c0: 0.0,
                c1: integrated_frequency(p, t, mode) - 0.5 * p.kerr * t,
                c2: 0.5 * p.kerr * t,
            },
            _ => {
                let d = self.diagonal(t);
                Quadratic {
                    c0: d.c0 * t,
                    c1: d.c1 * t,
                    c2: d.c2 * t,
                }
            }
        }
    }

    pub fn pair(&self, t: f64) -> PairCoupling {
        let p = self.params();
        match *self {
            Hamiltonian::Full { mode, .. } => PairCoupling {
                amplitude: C64::new(0.0, squeezing_rate(p, t, mode)),
                twist: 0.0,
            },
            Hamiltonian::Rwa { .. } => PairCoupling {
                amplitude: C64::new(0.0, 0.5 * p.g()),
                twist: 0.0,
            },
            Hamiltonian::InteractionTilde { .. } => PairCoupling {
                amplitude: 0.5 * drive_function(p, t),
                twist: 0.0,
            },
            Hamiltonian::Interaction { .. } => PairCoupling {
                amplitude: 0.5 * drive_function(p, t),
                twist: 2.0 * p.kerr * t,
            },
        }
    }

    /// `y = H(t) x` in `O(dim)`.
    pub fn apply(&self, t: f64, x: &[C64], y: &mut [C64]) {
        let dim = x.len();
        let d = self.diagonal(t);
        for (n, (yn, xn)) in y.iter_mut().zip(x).enumerate() {
            *yn = xn * d.at(n);
        }
        let pair = self.pair(t);
        let step = C64::from_polar(1.0, pair.twist);
        let mut w = pair.amplitude;
        for n in 0..dim.saturating_sub(2) {
            if n % 256 == 0 {
                w = pair.amplitude * C64::from_polar(1.0, pair.twist * n as f64);
            }
            let c = w * pair_norm(n);
            y[n + 2] += c * x[n];
            y[n] += c.conj() * x[n + 2];
            w *= step;
        }
    }

    /// Dense matrix built from ladder-operator products.
    pub fn to_dense(&self, t: f64) -> DenseOperator {
        let p = self.params();
        let l = Ladder::new(p.dim).expect("dim >= 2 by construction");
        self.to_dense_with(&l, t)
    }

    /// As [`Hamiltonian::to_dense`], reusing prebuilt ladder matrices.
    pub fn to_dense_with(&self, l: &Ladder, t: f64) -> DenseOperator {
        let p = self.params();
        let i = C64::new(0.0, 1.0);
        let kerr_term = (0.5 * p.kerr) * &l.kerr;
        match *self {
            Hamiltonian::Full { mode, .. } => {
                let squeeze = (i * squeezing_rate(p, t, mode)) * &(&l.a_dag_sq - &l.a_sq);
                &(&(frequency(p, t, mode) * &l.number) + &squeeze) + &kerr_term
            }
            Hamiltonian::Rwa { .. } => {
                let squeeze = (i * 0.5 * p.g()) * &(&l.a_dag_sq - &l.a_sq);
                &squeeze + &kerr_term
            }
            Hamiltonian::InteractionTilde { .. } => {
                let (l0, lp, lm) = su11_generators(l, None);
                let f = drive_function(p, t);
                &(&(-p.kerr * &l0) + &(f * &lp)) + &(f.conj() * &lm)
            }
            Hamiltonian::Interaction { .. } => {
                let (l0, lp, lm) = su11_generators(l, Some(2.0 * p.kerr * t));
                let f = drive_function(p, t);
                &(&(-p.kerr * &l0) + &(f * &lp)) + &(f.conj() * &lm)
            }
        }
    }
}

/// `sqrt((n+1)(n+2))`, the `<n+2|a+^2|n>` matrix element.
#[inline]
pub fn pair_norm(n: usize) -> f64 {
    (((n + 1) * (n + 2)) as f64).sqrt()
}

/// `(L0, L+, L-)` with `L0 = (a+a + 1/2)/2`. With `phase = Some(theta)` the
/// raising and lowering generators carry `exp(+-i theta a+a)`.
pub fn su11_generators(
    l: &Ladder,
    phase: Option<f64>,
) -> (DenseOperator, DenseOperator, DenseOperator) {
    let dim = l.dim();
    let l0 = DenseOperator::diagonal_fn(dim, |n| 0.5 * (n as f64 + 0.5));
    let (lp, lm) = match phase {
        None => (0.5 * &l.a_dag_sq, 0.5 * &l.a_sq),
        Some(theta) => {
            let rot = DenseOperator::from_diagonal(
                (0..dim).map(|n| C64::from_polar(1.0, theta * n as f64)),
            );
            let lp = 0.5 * &l.a_dag_sq.matmul(&rot).expect("same dim");
            (lp.clone(), lp.adjoint())
        }
    };
    (l0, lp, lm)
}

/// Convenience builders mirroring the operations list.
pub fn hamiltonian_full(p: &ModelParams, t: f64, mode: ChiMode) -> DenseOperator {
    Hamiltonian::Full { params: *p, mode }.to_dense(t)
}

pub fn hamiltonian_rwa(p: &ModelParams) -> DenseOperator {
    Hamiltonian::Rwa { params: *p }.to_dense(0.0)
}

pub fn hamiltonian_interaction_tilde(p: &ModelParams, t: f64) -> DenseOperator {
    Hamiltonian::InteractionTilde { params: *p }.to_dense(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params(eps: f64, kerr: f64, dim: usize) -> ModelParams {
        ModelParams::new(1.0, eps, kerr, dim).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(matches!(
            ModelParams::new(0.0, 0.1, 0.0, 8),
            Err(Error::InvalidParameter { field: "omega0", .. })
        ));
        assert!(matches!(
            ModelParams::new(1.0, 1.0, 0.0, 8),
            Err(Error::InvalidParameter { field: "epsilon", .. })
        ));
        assert!(matches!(
            ModelParams::new(1.0, 0.1, -0.1, 8),
            Err(Error::InvalidParameter { field: "kerr", .. })
        ));
        assert!(ModelParams::new(1.0, 0.1, 0.0, 1).is_err());
    }

    #[test]
    fn drive_strength() {
        let p = ModelParams::new(1.7, 0.1, 0.0, 4).unwrap();
        assert_eq!(p.g(), 0.1 * 1.7 / 2.0);
    }

    #[test]
    fn frequency_examples() {
        let p = params(0.1, 0.0, 4);
        assert_eq!(instantaneous_frequency(&p, 0.0), 1.0);
        assert_abs_diff_eq!(instantaneous_frequency(&p, PI / 4.0), 1.1, epsilon = 1e-15);
        let flat = params(0.0, 0.0, 4);
        for t in [0.3, 2.0, 17.0] {
            assert_eq!(instantaneous_frequency(&flat, t), 1.0);
        }
    }

    #[test]
    fn integrated_frequency_matches_quadrature() {
        let p = params(0.1, 0.0, 4);
        let t = 3.7;
        let n = 20_000;
        let h = t / n as f64;
        // composite Simpson
        let mut s = instantaneous_frequency(&p, 0.0) + instantaneous_frequency(&p, t);
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * instantaneous_frequency(&p, k as f64 * h);
        }
        s *= h / 3.0;
        assert_abs_diff_eq!(integrated_frequency(&p, t, ChiMode::Exact), s, epsilon = 1e-12);
    }

    #[test]
    fn squeezing_rate_examples() {
        let p = params(0.1, 0.0, 4);
        assert_abs_diff_eq!(squeezing_rate(&p, 0.0, ChiMode::Exact), 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(squeezing_rate(&p, 0.0, ChiMode::Approximate), 0.05, epsilon = 1e-15);
        let flat = params(0.0, 0.0, 4);
        assert_eq!(squeezing_rate(&flat, 1.3, ChiMode::Exact), 0.0);
        assert_eq!(squeezing_rate(&flat, 1.3, ChiMode::Approximate), 0.0);

        let worst = (0..100_000)
            .map(|k| k as f64 * 1e-4)
            .map(|t| {
                (squeezing_rate(&p, t, ChiMode::Exact) - squeezing_rate(&p, t, ChiMode::Approximate))
                    .abs()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 0.005, "sup |exact - approx| = {worst}");
    }

    #[test]
    fn exact_chi_matches_finite_difference() {
        let p = params(0.2, 0.0, 4);
        let h = 1e-5;
        for t in [0.1, 0.9, 2.4] {
            let dw = (instantaneous_frequency(&p, t + h) - instantaneous_frequency(&p, t - h))
                / (2.0 * h);
            let chi = dw / (4.0 * instantaneous_frequency(&p, t));
            assert_abs_diff_eq!(squeezing_rate(&p, t, ChiMode::Exact), chi, epsilon = 1e-9);
        }
    }

    #[test]
    fn full_hamiltonian_diagonal_cases() {
        let p = params(0.0, 0.0, 6);
        let h = hamiltonian_full(&p, 0.7, ChiMode::Exact);
        for i in 0..6 {
            for j in 0..6 {
                let expected = if i == j { i as f64 } else { 0.0 };
                assert_abs_diff_eq!(h[(i, j)].re, expected, epsilon = 1e-14);
                assert_eq!(h[(i, j)].im, 0.0);
            }
        }

        let p = params(0.0, 0.5, 8);
        let h = hamiltonian_full(&p, 0.0, ChiMode::Exact);
        for n in 0..8 {
            let nf = n as f64;
            assert_abs_diff_eq!(h[(n, n)].re, nf + 0.25 * nf * (nf - 1.0), epsilon = 1e-12);
        }
    }

    #[test]
    fn rwa_examples() {
        let p = params(0.0, 0.3, 7);
        let h = hamiltonian_rwa(&p);
        for n in 0..7 {
            let nf = n as f64;
            assert_abs_diff_eq!(h[(n, n)].re, 0.15 * nf * (nf - 1.0), epsilon = 1e-14);
        }
        let expected_trace: f64 = (0..7).map(|n| 0.15 * (n * (n.max(1) - 1)) as f64).sum();
        assert_abs_diff_eq!(h.trace().re, expected_trace, epsilon = 1e-12);

        let p = params(0.1, 0.0, 10);
        let h = hamiltonian_rwa(&p);
        for n in 0..8 {
            let v = 0.025 * (((n + 1) * (n + 2)) as f64).sqrt();
            assert_abs_diff_eq!(h[(n + 2, n)].im, v, epsilon = 1e-15);
            assert_abs_diff_eq!(h[(n + 2, n)].re, 0.0, epsilon = 1e-15);
            assert_eq!(h[(n, n + 2)], h[(n + 2, n)].conj());
        }
        assert!(h.is_hermitian());
    }

    #[test]
    fn drive_function_examples() {
        let p = params(0.1, 0.3, 4);
        assert_eq!(drive_function(&p, 0.0), C64::new(0.0, 0.05));
        let p0 = params(0.1, 0.0, 4);
        for t in [0.0, 1.0, 11.0] {
            assert_eq!(drive_function(&p0, t), C64::new(0.0, 0.05));
            assert_abs_diff_eq!(drive_function(&p, t).norm(), 0.05, epsilon = 1e-16);
        }
    }

    #[test]
    fn interaction_tilde_examples() {
        let p = params(0.1, 0.0, 10);
        let h = hamiltonian_interaction_tilde(&p, 0.0);
        let l = Ladder::new(10).unwrap();
        let expected = C64::new(0.0, 0.025) * &(&l.a_dag_sq - &l.a_sq);
        assert!((&h - &expected).max_abs() <= 1e-15);

        let p = params(0.1, 0.3, 10);
        let h = hamiltonian_interaction_tilde(&p, 1.3);
        for n in 0..10 {
            assert_abs_diff_eq!(h[(n, n)].re, -0.15 * (n as f64 + 0.5), epsilon = 1e-14);
        }
        assert!(h.is_hermitian());
    }

    #[test]
    fn su11_commutators() {
        let l = Ladder::new(24).unwrap();
        for phase in [None, Some(0.37)] {
            let (l0, lp, lm) = su11_generators(&l, phase);
            let c = lm.commutator(&lp).unwrap();
            let c0p = l0.commutator(&lp).unwrap();
            let c0m = l0.commutator(&lm).unwrap();
            // truncation spoils the top two rows/columns
            for i in 0..20 {
                for j in 0..20 {
                    assert!((c[(i, j)] - 2.0 * l0[(i, j)]).norm() < 1e-12);
                    assert!((c0p[(i, j)] - lp[(i, j)]).norm() < 1e-12);
                    assert!((c0m[(i, j)] + lm[(i, j)]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn banded_apply_matches_dense() {
        let p = params(0.1, 0.37, 12);
        let x: Vec<C64> = (0..12)
            .map(|n| C64::new((n as f64 * 0.7).sin(), (n as f64 * 1.3).cos()))
            .collect();
        for h in [
            Hamiltonian::Full { params: p, mode: ChiMode::Exact },
            Hamiltonian::Full { params: p, mode: ChiMode::Approximate },
            Hamiltonian::Rwa { params: p },
            Hamiltonian::InteractionTilde { params: p },
            Hamiltonian::Interaction { params: p },
        ] {
            for t in [0.0, 0.8, 5.3] {
                let dense = h.to_dense(t);
                let mut want = vec![C64::new(0.0, 0.0); 12];
                dense.apply_slice(&x, &mut want);
                let mut got = vec![C64::new(0.0, 0.0); 12];
                h.apply(t, &x, &mut got);
                let err = want.iter().zip(&got).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                assert!(err < 1e-13, "{h:?} t={t} err={err}");
                assert!(dense.is_hermitian());
            }
        }
    }

    proptest! {
        #[test]
        fn full_hamiltonian_is_periodic_and_hermitian(
            t in 0.0f64..30.0, eps in 0.0f64..0.5, kerr in 0.0f64..0.6,
        ) {
            let p = params(eps, kerr, 12);
            for mode in [ChiMode::Exact, ChiMode::Approximate] {
                let a = hamiltonian_full(&p, t, mode);
                let b = hamiltonian_full(&p, t + PI, mode);
                prop_assert!((&a - &b).max_abs() <= 1e-12 * a.max_abs().max(1.0));
                prop_assert!(a.hermiticity_residual() <= 1e-12 * a.max_abs());
            }
            prop_assert!(hamiltonian_interaction_tilde(&p, t).is_hermitian());
            let exact = Hamiltonian::Interaction { params: p };
            prop_assert!(exact.to_dense(t).is_hermitian());
        }
    }
}
