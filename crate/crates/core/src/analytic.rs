//! Closed-form results for the Kerr cavity.
//!
//! The short-time propagator factorizes as
//!
//! ```text
//! U(t) = exp(beta/4 - iKt/4) exp(-i omega0 t n - i (K/2) t n^2)
//!        exp(alpha/2 a+^2) exp(beta/2 n) exp(gamma/2 a^2)
//! ```
//!
//! with Wei–Norman coefficients `alpha, beta, gamma` that solve a Riccati
//! system in closed form. All three regimes (`g > K/2`, `g = K/2`,
//! `g < K/2`) are written through the same two functions
//!
//! ```text
//! q(t)     = cosh(eta t) + i (K/2) sinh(eta t) / eta
//! sigma(t) = sinh(eta t) / eta
//! ```
//!
//! which turn into their trigonometric versions for `K/2 > g` and into
//! `1 + i (K/2) t` and `t` at the critical point.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fock::{DenseOperator, FockVector, Ladder};
use crate::model::{su11_generators, Hamiltonian, ModelParams};
use crate::C64;

/// Relative tolerance on `g^2 - (K/2)^2` below which the critical formulas are used.
pub const CRITICAL_TOL: f64 = 1e-12;

/// Term-ratio stopping criterion for the `exp(x a+^2)` / `exp(x a^2)` series.
pub const SERIES_TOL: f64 = 1e-16;

const POLE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegimeKind {
    /// `K/2 < g`: exponential growth.
    Hyperbolic,
    /// `K/2 = g`: quadratic growth.
    Critical,
    /// `K/2 > g`: bounded oscillation.
    Trigonometric,
}

impl RegimeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RegimeKind::Hyperbolic => "hyperbolic",
            RegimeKind::Critical => "critical",
            RegimeKind::Trigonometric => "trigonometric",
        }
    }
}

impl std::fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    pub kind: RegimeKind,
    /// `sqrt(|g^2 - (K/2)^2|)`; zero in the critical regime.
    pub eta: f64,
}

pub fn classify_regime(p: &ModelParams) -> Regime {
    let g2 = p.g() * p.g();
    let h2 = 0.25 * p.kerr() * p.kerr();
    let gap = g2 - h2;
    let scale = g2.max(h2).max(1e-30);
    if gap.abs() <= CRITICAL_TOL * scale {
        Regime {
            kind: RegimeKind::Critical,
            eta: 0.0,
        }
    } else if gap > 0.0 {
        Regime {
            kind: RegimeKind::Hyperbolic,
            eta: gap.sqrt(),
        }
    } else {
        Regime {
            kind: RegimeKind::Trigonometric,
            eta: (-gap).sqrt(),
        }
    }
}

/// `(q, sigma, ln q)` with `ln q` continuous in `t` from `ln 1 = 0`.
fn regime_functions(p: &ModelParams, t: f64) -> (C64, f64, C64) {
    let half_k = 0.5 * p.kerr();
    let regime = classify_regime(p);
    match regime.kind {
        RegimeKind::Hyperbolic => {
            let x = regime.eta * t;
            let sigma = x.sinh() / regime.eta;
            let q = C64::new(x.cosh(), half_k * sigma);
            // Re q > 0, principal branch is continuous
            (q, sigma, q.ln())
        }
        RegimeKind::Critical => {
            let q = C64::new(1.0, half_k * t);
            (q, t, q.ln())
        }
        RegimeKind::Trigonometric => {
            let x = regime.eta * t;
            let sigma = x.sin() / regime.eta;
            let q = C64::new(x.cos(), half_k * sigma);
            // q e^{-ix} has positive real part for all x, so its principal
            // argument plus x is the continuous argument of q.
            let turned = q * C64::from_polar(1.0, -x);
            let arg = x + turned.arg();
            (q, sigma, C64::new(q.norm().ln(), arg))
        }
    }
}

/// Wei–Norman coefficients at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeiNormanCoeffs {
    pub t: f64,
    pub alpha: C64,
    pub beta: C64,
    pub gamma: C64,
}

pub fn wei_norman_coeffs(p: &ModelParams, t: f64) -> Result<WeiNormanCoeffs> {
    let (q, sigma, ln_q) = regime_functions(p, t);
    if q.norm() < POLE_TOL {
        return Err(Error::Pole { t });
    }
    let g = p.g();
    let k = p.kerr();
    let ratio = C64::new(g * sigma, 0.0) / q;
    Ok(WeiNormanCoeffs {
        t,
        alpha: ratio * C64::from_polar(1.0, 2.0 * k * t),
        beta: C64::new(0.0, 2.0 * k * t) - 2.0 * ln_q,
        gamma: -ratio,
    })
}

/// Coefficients of `N(t) = phi1 a+^2 + phi2 a+a + phi3 a^2 + phi4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiCoeffs {
    pub phi1: C64,
    pub phi2: f64,
    pub phi3: C64,
    pub phi4: f64,
}

/// The four combinations as complex numbers, before the reality of `phi2`
/// and `phi4` is imposed.
pub fn phi_coeffs_raw(p: &ModelParams, t: f64) -> Result<[C64; 4]> {
    let WeiNormanCoeffs {
        alpha, beta, gamma, ..
    } = wei_norman_coeffs(p, t)?;
    let e = (-beta).exp();
    let phi1 = alpha * e;
    let phi2 = 1.0 - 2.0 * alpha * gamma * e;
    let phi3 = alpha * gamma * gamma * e - gamma;
    let phi4 = -alpha * gamma * e;
    Ok([phi1, phi2, phi3, phi4])
}

pub fn phi_coeffs(p: &ModelParams, t: f64) -> Result<PhiCoeffs> {
    let [phi1, phi2, phi3, phi4] = phi_coeffs_raw(p, t)?;
    debug_assert!((phi1 - phi3.conj()).norm() <= 1e-10 * (1.0 + phi1.norm()));
    debug_assert!(phi2.im.abs() <= 1e-10 * (1.0 + phi2.norm()));
    debug_assert!(phi4.im.abs() <= 1e-10 * (1.0 + phi4.norm()));
    Ok(PhiCoeffs {
        phi1,
        phi2: phi2.re,
        phi3,
        phi4: phi4.re.max(0.0),
    })
}

/// Mean photon number generated from vacuum, `g^2 sigma(t)^2`:
/// `(g/eta)^2 sinh^2(eta t)`, `g^2 t^2` or `(g/eta)^2 sin^2(eta t)`.
pub fn vacuum_photon_number(p: &ModelParams, t: f64) -> f64 {
    let (_, sigma, _) = regime_functions(p, t);
    let gs = p.g() * sigma;
    gs * gs
}

/// Times `m pi / eta` (`m = 1, 2, ...`) at which the trigonometric-regime
/// photon number vanishes, up to `t_max`. Empty outside that regime.
pub fn vacuum_zero_times(p: &ModelParams, t_max: f64) -> Vec<f64> {
    let regime = classify_regime(p);
    if regime.kind != RegimeKind::Trigonometric {
        return Vec::new();
    }
    (1..)
        .map(|m| m as f64 * PI / regime.eta)
        .take_while(|&t| t <= t_max)
        .collect()
}

/// `<0| U+ a+a U |0>` for the squeeze operator `U = exp(r/2 (a+^2 - a^2))`
/// built as a dense matrix exponential. Converges to `sinh^2 r` as `dim`
/// grows.
pub fn empty_cavity_squeeze_check(r: f64, dim: usize) -> Result<f64> {
    let l = Ladder::new(dim)?;
    let generator = (0.5 * r) * &(&l.a_dag_sq - &l.a_sq);
    let u = generator.exp();
    let n_t = u.adjoint().matmul(&l.number)?.matmul(&u)?;
    Ok(n_t[(0, 0)].re)
}

/// Coherent state `|z>` evolved for time `t` under `(K/2) a+^2 a^2`.
pub fn kerr_evolved_coherent(z: C64, kerr: f64, t: f64, dim: usize) -> Result<FockVector> {
    let start = FockVector::coherent(z, dim)?;
    let amps = start
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(n, c)| {
            let pairs = (n * n.saturating_sub(1)) as f64;
            c * C64::from_polar(1.0, -0.5 * kerr * t * pairs)
        })
        .collect();
    FockVector::from_amplitudes(amps)
}

/// `exp(x a+^2)` (raising) or `exp(x a^2)` (lowering) applied to `amps` as
/// a power series. On the truncated space both are nilpotent, so the series
/// is finite; it stops early once a term falls below [`SERIES_TOL`]
/// relative to the partial sum.
pub fn apply_pair_exponential(x: C64, raising: bool, amps: &[C64]) -> Vec<C64> {
    let dim = amps.len();
    let mut sum = amps.to_vec();
    if x == C64::new(0.0, 0.0) {
        return sum;
    }
    let mut term = amps.to_vec();
    let mut next = vec![C64::new(0.0, 0.0); dim];
    for k in 1.. {
        let coef = x / k as f64;
        next.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        if raising {
            for n in 0..dim.saturating_sub(2) {
                next[n + 2] = coef * crate::model::pair_norm(n) * term[n];
            }
        } else {
            for n in 0..dim.saturating_sub(2) {
                next[n] = coef * crate::model::pair_norm(n) * term[n + 2];
            }
        }
        std::mem::swap(&mut term, &mut next);
        let term_norm: f64 = term.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        for (s, t) in sum.iter_mut().zip(&term) {
            *s += t;
        }
        let sum_norm: f64 = sum.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if term_norm == 0.0 || term_norm <= SERIES_TOL * sum_norm || k > dim {
            break;
        }
    }
    sum
}

/// Applies the factorized short-time propagator to `state`.
pub fn apply_factorized_propagator(
    p: &ModelParams,
    t: f64,
    state: &FockVector,
) -> Result<FockVector> {
    if state.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: state.dim(),
        });
    }
    let WeiNormanCoeffs {
        alpha, beta, gamma, ..
    } = wei_norman_coeffs(p, t)?;
    for (name, value) in [("alpha", alpha), ("gamma", gamma)] {
        if value.norm() >= 1.0 {
            return Err(Error::RegimeBreakdown {
                t,
                coefficient: name,
                magnitude: value.norm(),
            });
        }
    }
    let k = p.kerr();
    let w0 = p.omega0();

    let mut amps = apply_pair_exponential(0.5 * gamma, false, state.amplitudes());
    for (n, c) in amps.iter_mut().enumerate() {
        *c *= (0.5 * beta * n as f64).exp();
    }
    let mut amps = apply_pair_exponential(0.5 * alpha, true, &amps);
    let global = (0.25 * beta - C64::new(0.0, 0.25 * k * t)).exp();
    for (n, c) in amps.iter_mut().enumerate() {
        let nf = n as f64;
        let phase = -w0 * t * nf - 0.5 * k * t * nf * nf;
        *c *= global * C64::from_polar(1.0, phase);
    }
    FockVector::from_amplitudes(amps)
}

/// Heisenberg-picture number operator as a dense matrix.
pub fn heisenberg_number_matrix(p: &ModelParams, t: f64) -> Result<DenseOperator> {
    let phi = phi_coeffs(p, t)?;
    let l = Ladder::new(p.dim())?;
    let id = DenseOperator::identity(p.dim());
    Ok(&(&(&(phi.phi1 * &l.a_dag_sq) + &(phi.phi2 * &l.number)) + &(phi.phi3 * &l.a_sq))
        + &(phi.phi4 * &id))
}

fn require_trigonometric(p: &ModelParams) -> Result<Regime> {
    let regime = classify_regime(p);
    if regime.kind != RegimeKind::Trigonometric {
        return Err(Error::WrongRegime {
            required: "trigonometric",
            found: regime.kind.as_str(),
        });
    }
    Ok(regime)
}

/// `n`-th eigenvalue `-eta~ (n + 1/2)` of `-K L0 + f L+ + f* L-`.
pub fn su11_eigenvalue(p: &ModelParams, n: usize) -> Result<f64> {
    let regime = require_trigonometric(p)?;
    Ok(-regime.eta * (n as f64 + 0.5))
}

/// Residuals of the displacement construction on the lower part of the basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementResidual {
    /// Direct exponential against the three-factor product.
    pub factorization: f64,
    /// `D H D+` against `-sqrt(K^2 - 4g^2) L0`.
    pub diagonalization: f64,
}

impl DisplacementResidual {
    pub fn max(&self) -> f64 {
        self.factorization.max(self.diagonalization)
    }
}

/// Builds the displacement `D = exp(zeta L+(t) - zeta* L-(t))` that
/// diagonalizes the interaction Hamiltonian, both as a dense exponential and
/// as the three-factor disentangled product, and measures the two
/// identities on basis states `n < dim / 2`.
///
/// `|zeta| = artanh(2g/K) / 2` and `arg zeta = 2Kt - pi/2`.
pub fn displacement_factorization_check(
    p: &ModelParams,
    t: f64,
    dim: usize,
) -> Result<DisplacementResidual> {
    displacement_residual_on_block(p, t, dim, dim / 2)
}

/// As [`displacement_factorization_check`], with residuals taken on the
/// basis states `n < block`.
pub fn displacement_residual_on_block(
    p: &ModelParams,
    t: f64,
    dim: usize,
    block: usize,
) -> Result<DisplacementResidual> {
    if block == 0 || block > dim {
        return Err(Error::InvalidParameter {
            field: "block",
            reason: format!("must lie in [1, {dim}], got {block}"),
        });
    }
    let regime = require_trigonometric(p)?;
    let p = p.with_dim(dim)?;
    let k = p.kerr();
    let l = Ladder::new(dim)?;
    let (l0, lp, lm) = su11_generators(&l, Some(2.0 * k * t));
    let h = Hamiltonian::Interaction { params: p }.to_dense_with(&l, t);

    let modulus = 0.5 * (2.0 * p.g() / k).atanh();
    let direction = C64::from_polar(1.0, 2.0 * k * t - 0.5 * PI);
    let zeta = direction * modulus;

    let direct = (&(zeta * &lp) - &(zeta.conj() * &lm)).exp();
    let tau = direction * modulus.tanh();
    let factored = (tau * &lp)
        .exp()
        .matmul(&((-2.0 * modulus.cosh().ln()) * &l0).exp())?
        .matmul(&((-tau.conj()) * &lm).exp())?;

    let rotated = direct.matmul(&h)?.matmul(&direct.adjoint())?;
    let target = (-2.0 * regime.eta) * &l0;

    let mut residual = DisplacementResidual {
        factorization: 0.0,
        diagonalization: 0.0,
    };
    for i in 0..block {
        for j in 0..block {
            residual.factorization = residual
                .factorization
                .max((direct[(i, j)] - factored[(i, j)]).norm());
            residual.diagonalization = residual
                .diagonalization
                .max((rotated[(i, j)] - target[(i, j)]).norm());
        }
    }
    Ok(residual)
}
