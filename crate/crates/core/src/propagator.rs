//! Fixed-step time propagation in the truncated Fock basis.
//!
//! Three integrators live here:
//!
//! * [`integrate_schrodinger`]: classical RK4 on `d psi/dt = -i H(t) psi`
//!   for any [`Generator`].
//! * [`integrate_corotating`]: the same RK4, but for a model [`Hamiltonian`]
//!   in the frame that rotates with its diagonal. The diagonal phases are
//!   integrated in closed form, so only the bounded pair coupling is stepped.
//!   This keeps RK4 stable when `dt` times the largest diagonal entry
//!   (roughly `K dim^2 / 2`) exceeds the stability limit `2 sqrt 2`.
//!   Populations, and hence `<n>` and the norm, are frame independent.
//! * [`stepped_su11_propagator`]: first-order split product of single-generator
//!   su(1,1) exponentials.
//!
//! None of them renormalizes; the norm is returned as a diagnostic.

use std::f64::consts::FRAC_PI_2;

use crate::analytic::{
    apply_pair_exponential, classify_regime, vacuum_photon_number, RegimeKind,
};
use crate::error::{Error, Result};
use crate::fock::{photon_number, DenseOperator, FockVector};
use crate::model::{drive_function, pair_norm, Hamiltonian, ModelParams};
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const MINUS_I: C64 = C64 { re: 0.0, im: -1.0 };

/// Uniform grid `t_start + k dt`, `k = 0 ..= steps`, sampled every `stride` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    dt: f64,
    stride: usize,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, dt: f64, stride: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && t_end > t_start) {
            return Err(Error::InvalidGrid(format!(
                "need t_end > t_start, got [{t_start}, {t_end}]"
            )));
        }
        let span = t_end - t_start;
        if !(dt.is_finite() && dt > 0.0 && dt <= span) {
            return Err(Error::InvalidGrid(format!("dt = {dt} must lie in (0, {span}]")));
        }
        if stride == 0 {
            return Err(Error::InvalidGrid("stride must be positive".into()));
        }
        let ratio = span / dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-12 * ratio.max(1.0) * 1e3 || steps < 1.0 {
            return Err(Error::InvalidGrid(format!(
                "span {span} is not an integer multiple of dt = {dt}"
            )));
        }
        Ok(Self {
            t_start,
            t_end,
            dt,
            stride,
            steps: steps as usize,
        })
    }

    /// Grid from zero with every step sampled.
    pub fn from_zero(t_end: f64, dt: f64) -> Result<Self> {
        Self::new(0.0, t_end, dt, 1)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn time_at(&self, step: usize) -> f64 {
        if step == self.steps {
            self.t_end
        } else {
            self.t_start + step as f64 * self.dt
        }
    }

    pub fn is_sample(&self, step: usize) -> bool {
        step % self.stride == 0 || step == self.steps
    }

    /// Sampled time points, in order.
    pub fn sample_times(&self) -> Vec<f64> {
        (0..=self.steps)
            .filter(|&s| self.is_sample(s))
            .map(|s| self.time_at(s))
            .collect()
    }

    pub fn with_dt(&self, dt: f64, stride: usize) -> Result<Self> {
        Self::new(self.t_start, self.t_end, dt, stride)
    }
}

/// Sampled curve.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T = f64> {
    pub label: String,
    pub times: Vec<f64>,
    pub values: Vec<T>,
}

impl<T: Copy> TimeSeries<T> {
    pub fn new(label: impl Into<String>, times: Vec<f64>, values: Vec<T>) -> Self {
        assert_eq!(times.len(), values.len(), "time series lengths differ");
        debug_assert!(times.windows(2).all(|w| w[1] > w[0]));
        Self {
            label: label.into(),
            times,
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, T)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }
}

impl TimeSeries<f64> {
    /// `max_t |self(t) - other(t)|` over a shared grid.
    pub fn sup_distance(&self, other: &TimeSeries<f64>) -> f64 {
        assert_eq!(self.len(), other.len(), "series are not on the same grid");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Something that can produce `H(t) x`.
pub trait Generator {
    fn dim(&self) -> usize;

    /// `y = H(t) x`.
    fn apply(&self, t: f64, x: &[C64], y: &mut [C64]);

    /// Checked at every sampled time. Structured generators are Hermitian by
    /// construction and accept the default.
    fn check(&self, _t: f64) -> Result<()> {
        Ok(())
    }

    /// `Some(b)` if `H_{mn} = 0` for `|m - n| > b` and `apply` accepts any
    /// leading block `x[..m]`, `y[..m]`; lets the integrators skip the part of
    /// the basis the state has not reached.
    fn bandwidth(&self) -> Option<usize> {
        None
    }
}

impl Generator for Hamiltonian {
    fn dim(&self) -> usize {
        Hamiltonian::dim(self)
    }

    fn apply(&self, t: f64, x: &[C64], y: &mut [C64]) {
        Hamiltonian::apply(self, t, x, y)
    }

    fn bandwidth(&self) -> Option<usize> {
        Some(2)
    }
}

/// A generator given as a function returning a dense matrix.
pub struct DenseGenerator<F> {
    dim: usize,
    build: F,
}

impl<F: Fn(f64) -> DenseOperator> DenseGenerator<F> {
    pub fn new(dim: usize, build: F) -> Self {
        Self { dim, build }
    }
}

impl<F: Fn(f64) -> DenseOperator> Generator for DenseGenerator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, t: f64, x: &[C64], y: &mut [C64]) {
        (self.build)(t).apply_slice(x, y)
    }

    fn check(&self, t: f64) -> Result<()> {
        let h = (self.build)(t);
        if h.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: h.dim(),
            });
        }
        if !h.is_hermitian() || !h.is_finite() {
            return Err(Error::NotHermitian {
                t,
                residual: h.hermiticity_residual(),
            });
        }
        Ok(())
    }
}

/// Sampled states of a propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<FockVector>,
}

impl Trajectory {
    pub fn norm_series(&self) -> TimeSeries {
        TimeSeries::new(
            "norm",
            self.times.clone(),
            self.states.iter().map(|s| s.norm()).collect(),
        )
    }
}

/// `<a+a>` per sample.
pub fn photon_number_series(trajectory: &Trajectory) -> TimeSeries {
    TimeSeries::new(
        "n_mean",
        trajectory.times.clone(),
        trajectory
            .states
            .iter()
            .map(|s| s.mean_photon_number())
            .collect(),
    )
}

/// `<a+a>` and norm sampled along a propagation, without keeping states.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberTrace {
    pub n_mean: TimeSeries,
    pub norm: TimeSeries,
}

impl NumberTrace {
    fn with_capacity(n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        (
            Vec::with_capacity(n),
            Vec::with_capacity(n),
            Vec::with_capacity(n),
        )
    }
}

fn check_state(state0: &FockVector, dim: usize) -> Result<()> {
    if state0.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: state0.dim(),
        });
    }
    Ok(())
}

/// Scratch buffers for one RK4 step.
struct Rk4Work {
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
}

impl Rk4Work {
    fn new(dim: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![ZERO; dim]),
            tmp: vec![ZERO; dim],
        }
    }

    /// One classical RK4 step of `dx/dt = -i A(t) x`, where `apply(t, x, y)`
    /// writes `A(t) x` into `y`.
    /// Works on the leading block `x.len() <= dim`.
    fn step(&mut self, x: &mut [C64], t: f64, dt: f64, apply: &impl Fn(f64, &[C64], &mut [C64])) {
        let half = 0.5 * dt;
        let m = x.len();
        let [k1, k2, k3, k4] = &mut self.k;
        let (k1, k2, k3, k4) = (&mut k1[..m], &mut k2[..m], &mut k3[..m], &mut k4[..m]);
        let tmp = &mut self.tmp[..m];

        apply(t, x, k1);
        k1.iter_mut().for_each(|v| *v *= MINUS_I);
        for ((s, xi), ki) in tmp.iter_mut().zip(x.iter()).zip(k1.iter()) {
            *s = xi + ki * half;
        }
        apply(t + half, tmp, k2);
        k2.iter_mut().for_each(|v| *v *= MINUS_I);
        for ((s, xi), ki) in tmp.iter_mut().zip(x.iter()).zip(k2.iter()) {
            *s = xi + ki * half;
        }
        apply(t + half, tmp, k3);
        k3.iter_mut().for_each(|v| *v *= MINUS_I);
        for ((s, xi), ki) in tmp.iter_mut().zip(x.iter()).zip(k3.iter()) {
            *s = xi + ki * dt;
        }
        apply(t + dt, tmp, k4);
        k4.iter_mut().for_each(|v| *v *= MINUS_I);
        let sixth = dt / 6.0;
        for i in 0..x.len() {
            x[i] += (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]) * sixth;
        }
    }
}

fn all_finite(x: &[C64]) -> bool {
    x.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// Amplitude components below this are set to zero after every step. The
/// discarded probability is below 1e-490, and it keeps the decaying Fock tail
/// out of the subnormal range, where arithmetic is many times slower.
pub const FLUSH_THRESHOLD: f64 = 1e-250;

/// Zeroes tiny components; returns the end of the nonzero support.
fn flush_tail(x: &mut [C64]) -> usize {
    let mut end = 0;
    for (n, c) in x.iter_mut().enumerate() {
        if c.re.abs() < FLUSH_THRESHOLD {
            c.re = 0.0;
        }
        if c.im.abs() < FLUSH_THRESHOLD {
            c.im = 0.0;
        }
        if c.re != 0.0 || c.im != 0.0 {
            end = n + 1;
        }
    }
    end
}

/// Core RK4 loop; `observe(t, x)` is called at each sample. With a banded
/// generator (`bandwidth = Some(b)`) each step only touches the leading block
/// the state can reach in four applications, `support + 4 b`.
fn rk4_loop(
    grid: &TimeGrid,
    x: &mut [C64],
    bandwidth: Option<usize>,
    apply: impl Fn(f64, &[C64], &mut [C64]),
    check: impl Fn(f64) -> Result<()>,
    mut observe: impl FnMut(f64, &[C64]),
) -> Result<()> {
    let dim = x.len();
    let mut work = Rk4Work::new(dim);
    let mut support = flush_tail(x);
    check(grid.time_at(0))?;
    observe(grid.time_at(0), x);
    for step in 1..=grid.steps() {
        let t = grid.time_at(step - 1);
        let h = grid.time_at(step) - t;
        let block = match bandwidth {
            Some(b) => (support + 4 * b).min(dim),
            None => dim,
        };
        work.step(&mut x[..block], t, h, &apply);
        support = flush_tail(&mut x[..block]);
        if !all_finite(&x[..block]) {
            return Err(Error::Divergence {
                step,
                t: grid.time_at(step),
            });
        }
        if grid.is_sample(step) {
            check(grid.time_at(step))?;
            observe(grid.time_at(step), x);
        }
    }
    Ok(())
}

/// RK4 on `d psi/dt = -i H(t) psi` in the frame of the generator.
pub fn integrate_schrodinger<G: Generator + ?Sized>(
    generator: &G,
    state0: &FockVector,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    check_state(state0, generator.dim())?;
    let mut x = state0.amplitudes().to_vec();
    let mut times = Vec::new();
    let mut states = Vec::new();
    rk4_loop(
        grid,
        &mut x,
        generator.bandwidth(),
        |t, x, y| generator.apply(t, x, y),
        |t| generator.check(t),
        |t, x| {
            times.push(t);
            states.push(FockVector::from_amplitudes(x.to_vec()).expect("non-empty"));
        },
    )?;
    Ok(Trajectory { times, states })
}

/// As [`integrate_schrodinger`], recording only `<a+a>` and the norm.
pub fn schrodinger_number_trace<G: Generator + ?Sized>(
    generator: &G,
    state0: &FockVector,
    grid: &TimeGrid,
) -> Result<NumberTrace> {
    check_state(state0, generator.dim())?;
    let mut x = state0.amplitudes().to_vec();
    let (mut times, mut n_mean, mut norm) = NumberTrace::with_capacity(grid.sample_times().len());
    rk4_loop(
        grid,
        &mut x,
        generator.bandwidth(),
        |t, x, y| generator.apply(t, x, y),
        |t| generator.check(t),
        |t, x| {
            times.push(t);
            n_mean.push(photon_number(x));
            norm.push(x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt());
        },
    )?;
    Ok(NumberTrace {
        n_mean: TimeSeries::new("n_mean", times.clone(), n_mean),
        norm: TimeSeries::new("norm", times, norm),
    })
}

/// Pair coupling of `h` in the frame rotating with its diagonal:
/// `V(t)_{n+2,n} = c_n(t) exp(i (Theta_{n+2}(t) - Theta_n(t)))`.
fn apply_corotating(h: &Hamiltonian, t: f64, x: &[C64], y: &mut [C64]) {
    let dim = x.len();
    let theta = h.diagonal_phase(t);
    let pair = h.pair(t);
    // Theta_{n+2} - Theta_n = 2 c1 + c2 (4n + 4)
    let base_phase = 2.0 * theta.c1 + 4.0 * theta.c2;
    let per_n = pair.twist + 4.0 * theta.c2;
    let step = C64::from_polar(1.0, per_n);
    y.iter_mut().for_each(|v| *v = ZERO);
    let mut w = ZERO;
    for n in 0..dim.saturating_sub(2) {
        if n % 128 == 0 {
            w = pair.amplitude * C64::from_polar(1.0, base_phase + per_n * n as f64);
        }
        let c = w * pair_norm(n);
        y[n + 2] += c * x[n];
        y[n] += c.conj() * x[n + 2];
        w *= step;
    }
}

/// Lab-frame amplitudes from co-rotating ones: `psi_n = exp(-i Theta_n) phi_n`.
fn to_lab_frame(h: &Hamiltonian, t: f64, x: &[C64]) -> Vec<C64> {
    let theta = h.diagonal_phase(t);
    x.iter()
        .enumerate()
        .map(|(n, c)| c * C64::from_polar(1.0, -theta.at(n)))
        .collect()
}

/// RK4 for a model Hamiltonian in the frame co-rotating with its diagonal.
/// Returned states are transformed back to the frame of `h`.
pub fn integrate_corotating(
    h: &Hamiltonian,
    state0: &FockVector,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    check_state(state0, h.dim())?;
    // phi(t_start) = exp(i Theta(t_start)) psi(t_start)
    let theta0 = h.diagonal_phase(grid.t_start());
    let mut x: Vec<C64> = state0
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(n, c)| c * C64::from_polar(1.0, theta0.at(n)))
        .collect();
    let mut times = Vec::new();
    let mut states = Vec::new();
    rk4_loop(
        grid,
        &mut x,
        Some(2),
        |t, x, y| apply_corotating(h, t, x, y),
        |_| Ok(()),
        |t, x| {
            times.push(t);
            states.push(FockVector::from_amplitudes(to_lab_frame(h, t, x)).expect("non-empty"));
        },
    )?;
    Ok(Trajectory { times, states })
}

/// As [`integrate_corotating`], recording only `<a+a>` and the norm.
pub fn corotating_number_trace(
    h: &Hamiltonian,
    state0: &FockVector,
    grid: &TimeGrid,
) -> Result<NumberTrace> {
    check_state(state0, h.dim())?;
    let theta0 = h.diagonal_phase(grid.t_start());
    let mut x: Vec<C64> = state0
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(n, c)| c * C64::from_polar(1.0, theta0.at(n)))
        .collect();
    let (mut times, mut n_mean, mut norm) = NumberTrace::with_capacity(grid.sample_times().len());
    rk4_loop(
        grid,
        &mut x,
        Some(2),
        |t, x, y| apply_corotating(h, t, x, y),
        |_| Ok(()),
        |t, x| {
            times.push(t);
            n_mean.push(photon_number(x));
            norm.push(x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt());
        },
    )?;
    Ok(NumberTrace {
        n_mean: TimeSeries::new("n_mean", times.clone(), n_mean),
        norm: TimeSeries::new("norm", times, norm),
    })
}

/// Integrated Wei–Norman coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct RiccatiTrajectory {
    pub alpha: TimeSeries<C64>,
    pub beta: TimeSeries<C64>,
    pub gamma: TimeSeries<C64>,
}

/// Largest `|alpha|` tolerated before the integration is declared blown up.
pub const RICCATI_BLOWUP: f64 = 1e6;

fn riccati_rhs(p: &ModelParams, t: f64, y: [C64; 3]) -> [C64; 3] {
    let f = drive_function(p, t);
    let fc = f.conj();
    let k = p.kerr();
    let [alpha, beta, _] = y;
    [
        MINUS_I * (f - k * alpha + fc * alpha * alpha),
        MINUS_I * (2.0 * fc * alpha - k),
        MINUS_I * fc * beta.exp(),
    ]
}

/// RK4 on the Wei–Norman system
/// `alpha' = -i (f - K alpha + f* alpha^2)`, `beta' = -i (2 f* alpha - K)`,
/// `gamma' = -i f* exp(beta)`, from `alpha = beta = gamma = 0` at `t = 0`.
pub fn riccati_integrate(p: &ModelParams, grid: &TimeGrid) -> Result<RiccatiTrajectory> {
    if grid.t_start() != 0.0 {
        return Err(Error::InvalidGrid(
            "Wei-Norman initial conditions are set at t = 0".into(),
        ));
    }
    let add = |a: [C64; 3], b: [C64; 3], s: f64| [a[0] + b[0] * s, a[1] + b[1] * s, a[2] + b[2] * s];
    let mut y = [ZERO; 3];
    let mut times = vec![0.0];
    let mut out = [vec![ZERO], vec![ZERO], vec![ZERO]];
    for step in 1..=grid.steps() {
        let t = grid.time_at(step - 1);
        let h = grid.time_at(step) - t;
        let k1 = riccati_rhs(p, t, y);
        let k2 = riccati_rhs(p, t + 0.5 * h, add(y, k1, 0.5 * h));
        let k3 = riccati_rhs(p, t + 0.5 * h, add(y, k2, 0.5 * h));
        let k4 = riccati_rhs(p, t + h, add(y, k3, h));
        for i in 0..3 {
            y[i] += (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]) * (h / 6.0);
        }
        let t_now = grid.time_at(step);
        let magnitude = y[0].norm();
        if !(magnitude <= RICCATI_BLOWUP) || !all_finite(&y) {
            return Err(Error::BlowUp { t: t_now, magnitude });
        }
        if grid.is_sample(step) {
            times.push(t_now);
            for i in 0..3 {
                out[i].push(y[i]);
            }
        }
    }
    let [a, b, g] = out;
    Ok(RiccatiTrajectory {
        alpha: TimeSeries::new("alpha", times.clone(), a),
        beta: TimeSeries::new("beta", times.clone(), b),
        gamma: TimeSeries::new("gamma", times, g),
    })
}

/// One split step `exp(-i dt f L+) exp(i dt K L0) exp(-i dt f* L-)`, with
/// `f = f(t)`, of the interaction Hamiltonian, with `L+- = a+^2/2, a^2/2` and
/// `L0 = (n + 1/2)/2`, applied right to left.
pub fn su11_split_step(p: &ModelParams, t: f64, dt: f64, amps: &[C64]) -> Vec<C64> {
    let f = drive_function(p, t);
    let lowered = apply_pair_exponential(MINUS_I * dt * f.conj() * 0.5, false, amps);
    let k = p.kerr();
    let rotated: Vec<C64> = lowered
        .iter()
        .enumerate()
        .map(|(n, c)| c * C64::from_polar(1.0, 0.5 * dt * k * (n as f64 + 0.5)))
        .collect();
    apply_pair_exponential(MINUS_I * dt * f * 0.5, true, &rotated)
}

fn su11_loop(
    p: &ModelParams,
    grid: &TimeGrid,
    state0: &FockVector,
    mut observe: impl FnMut(f64, &[C64]),
) -> Result<()> {
    check_state(state0, p.dim())?;
    let mut x = state0.amplitudes().to_vec();
    observe(grid.time_at(0), &x);
    for step in 1..=grid.steps() {
        let t = grid.time_at(step - 1);
        x = su11_split_step(p, t, grid.time_at(step) - t, &x);
        if !all_finite(&x) {
            return Err(Error::Divergence {
                step,
                t: grid.time_at(step),
            });
        }
        if grid.is_sample(step) {
            observe(grid.time_at(step), &x);
        }
    }
    Ok(())
}

/// Evolution under `-K L0 + f(t) L+ + f*(t) L-` as a time-ordered product
/// of split steps, `f` evaluated at the left end of each step.
pub fn stepped_su11_propagator(
    p: &ModelParams,
    grid: &TimeGrid,
    state0: &FockVector,
) -> Result<Trajectory> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    su11_loop(p, grid, state0, |t, x| {
        times.push(t);
        states.push(FockVector::from_amplitudes(x.to_vec()).expect("non-empty"));
    })?;
    Ok(Trajectory { times, states })
}

/// As [`stepped_su11_propagator`], recording only `<a+a>` and the norm.
pub fn stepped_su11_number_trace(
    p: &ModelParams,
    grid: &TimeGrid,
    state0: &FockVector,
) -> Result<NumberTrace> {
    let (mut times, mut n_mean, mut norm) = NumberTrace::with_capacity(grid.sample_times().len());
    su11_loop(p, grid, state0, |t, x| {
        times.push(t);
        n_mean.push(photon_number(x));
        norm.push(x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt());
    })?;
    Ok(NumberTrace {
        n_mean: TimeSeries::new("n_mean", times.clone(), n_mean),
        norm: TimeSeries::new("norm", times, norm),
    })
}

/// Dimension ladder result.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub dims: Vec<usize>,
    /// `sup_t |<n>_dim(t) - <n>_largest(t)|` per dim (zero for the largest).
    pub sup_diff: Vec<f64>,
    /// Change produced by the last step of the ladder.
    pub last_change: f64,
    pub converged: bool,
    /// Series at the largest dimension.
    pub reference: TimeSeries,
}

/// Threshold on the last ladder step for a run to count as converged.
pub const CONVERGENCE_TOL: f64 = 1e-8;

/// Repeats `run` at every dimension in `dims` (increasing) and compares each
/// `<n>` series with the one at the largest dimension.
pub fn truncation_convergence(
    run: impl Fn(usize) -> Result<TimeSeries>,
    dims: &[usize],
) -> Result<ConvergenceReport> {
    if dims.len() < 2 || dims.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            field: "dims",
            reason: "need at least two increasing dimensions".into(),
        });
    }
    let series = dims.iter().map(|&d| run(d)).collect::<Result<Vec<_>>>()?;
    let reference = series.last().expect("non-empty").clone();
    let sup_diff: Vec<f64> = series.iter().map(|s| s.sup_distance(&reference)).collect();
    let last_change = sup_diff[sup_diff.len() - 2];
    Ok(ConvergenceReport {
        dims: dims.to_vec(),
        sup_diff,
        last_change,
        converged: last_change < CONVERGENCE_TOL,
        reference,
    })
}

/// Exponent `x` of the tail bound `exp(-x)` used by [`default_dim`].
pub const TAIL_EXPONENT: f64 = 40.0;

/// Smallest dimension [`default_dim`] returns.
pub const MIN_DIM: usize = 64;

/// Largest closed-form vacuum `<n>` on `[0, t_max]`.
pub fn peak_photon_estimate(p: &ModelParams, t_max: f64) -> f64 {
    let regime = classify_regime(p);
    match regime.kind {
        RegimeKind::Trigonometric if t_max * regime.eta >= FRAC_PI_2 => {
            let g = p.g();
            g * g / (regime.eta * regime.eta)
        }
        _ => vacuum_photon_number(p, t_max),
    }
}

/// Truncation chosen from the squeezed-vacuum tail. A vacuum squeezed to
/// `<n> = sinh^2 r` has populations falling as `tanh^n r`; the returned
/// power of two is the first with `tanh^dim r <= exp(-TAIL_EXPONENT)` at the
/// peak closed-form `<n>` over the window. Kerr detuning only shortens the
/// tail, so the estimate is conservative for `K > 0`.
pub fn default_dim(p: &ModelParams, t_max: f64) -> usize {
    let peak = peak_photon_estimate(p, t_max);
    if !(peak > 0.0) {
        return MIN_DIM;
    }
    let log_tanh = 0.5 * (peak / (peak + 1.0)).ln();
    let needed = (TAIL_EXPONENT / -log_tanh).ceil();
    if needed >= (1u64 << 40) as f64 {
        return 1 << 40;
    }
    (needed as usize).next_power_of_two().max(MIN_DIM)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::wei_norman_coeffs;
    use crate::fock::Ladder;
    use crate::model::{hamiltonian_rwa, ChiMode};
    use approx::assert_abs_diff_eq;

    fn params(kerr: f64, dim: usize) -> ModelParams {
        ModelParams::new(1.0, 0.1, kerr, dim).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(0.0, 1.0, 0.3, 1).is_err());
        assert!(TimeGrid::new(1.0, 0.0, 0.1, 1).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0.0, 1).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0.1, 0).is_err());
        let g = TimeGrid::new(0.0, 60.0, 1e-3, 100).unwrap();
        assert_eq!(g.steps(), 60_000);
        assert_eq!(g.sample_times().len(), 601);
        assert_eq!(*g.sample_times().last().unwrap(), 60.0);
        let g = TimeGrid::new(0.0, 1.0, 0.1, 3).unwrap();
        assert_eq!(g.sample_times().len(), 5);
    }

    #[test]
    fn eigenstate_stays_put() {
        let dim = 8;
        let number = Ladder::new(dim).unwrap().number;
        let gen = DenseGenerator::new(dim, move |_| number.clone());
        let grid = TimeGrid::new(0.0, 20.0, 1e-3, 1000).unwrap();
        let traj = integrate_schrodinger(&gen, &FockVector::number_state(1, dim).unwrap(), &grid)
            .unwrap();
        let n = photon_number_series(&traj);
        assert!(n.values.iter().all(|&v| (v - 1.0).abs() <= 1e-10));
        assert!(traj.norm_series().values.iter().all(|&v| (v - 1.0).abs() <= 1e-10));
    }

    #[test]
    fn rwa_without_kerr_follows_sinh_law() {
        // the squeezed-vacuum tail at r = 2 needs more than 256 levels for 1e-6
        let p = params(0.0, 512);
        let grid = TimeGrid::new(0.0, 40.0, 1e-3, 500).unwrap();
        let h = Hamiltonian::Rwa { params: p };
        let trace = schrodinger_number_trace(&h, &FockVector::vacuum(512).unwrap(), &grid).unwrap();
        for (t, n) in trace.n_mean.iter().skip(1) {
            let exact = (0.05 * t).sinh().powi(2);
            assert!((n - exact).abs() <= 1e-6 * exact, "t={t}");
        }
        assert!(trace.norm.values.iter().all(|v| (v - 1.0).abs() < 1e-7));
    }

    #[test]
    fn dense_and_banded_generators_agree() {
        let p = params(0.3, 24);
        let grid = TimeGrid::new(0.0, 2.0, 1e-3, 100).unwrap();
        let vac = FockVector::vacuum(24).unwrap();
        let h = Hamiltonian::Full { params: p, mode: ChiMode::Exact };
        let l = Ladder::new(24).unwrap();
        let dense = DenseGenerator::new(24, |t| h.to_dense_with(&l, t));
        let a = integrate_schrodinger(&dense, &vac, &grid).unwrap();
        let b = integrate_schrodinger(&h, &vac, &grid).unwrap();
        let c = integrate_corotating(&h, &vac, &grid).unwrap();
        for ((sa, sb), sc) in a.states.iter().zip(&b.states).zip(&c.states) {
            let dab: f64 = sa.amplitudes().iter().zip(sb.amplitudes()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            let dac: f64 = sa.amplitudes().iter().zip(sc.amplitudes()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(dab < 1e-13, "{dab}");
            assert!(dac < 1e-9, "{dac}");
        }
    }

    #[test]
    fn non_hermitian_generator_is_rejected() {
        let dim = 4;
        let a = Ladder::new(dim).unwrap().a;
        let gen = DenseGenerator::new(dim, move |_| a.clone());
        let grid = TimeGrid::new(0.0, 1.0, 0.1, 1).unwrap();
        let err = integrate_schrodinger(&gen, &FockVector::vacuum(dim).unwrap(), &grid).unwrap_err();
        assert!(matches!(err, Error::NotHermitian { .. }));
    }

    #[test]
    fn divergence_is_reported() {
        // dt far past the RK4 stability limit for the top diagonal entry
        let p = params(0.5, 64);
        let h = Hamiltonian::Rwa { params: p };
        let grid = TimeGrid::new(0.0, 200.0, 0.5, 1).unwrap();
        let err = integrate_schrodinger(&h, &FockVector::number_state(63, 64).unwrap(), &grid)
            .unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
        // the co-rotating integrator only sees the bounded coupling
        let ok = corotating_number_trace(&h, &FockVector::vacuum(64).unwrap(), &grid.with_dt(0.01, 100).unwrap());
        assert!(ok.is_ok());
    }

    #[test]
    fn riccati_without_drive() {
        let p = ModelParams::new(1.0, 0.0, 0.3, 4).unwrap();
        let grid = TimeGrid::new(0.0, 10.0, 1e-2, 10).unwrap();
        let r = riccati_integrate(&p, &grid).unwrap();
        for (t, b) in r.beta.iter() {
            assert_abs_diff_eq!(b.im, 0.3 * t, epsilon = 1e-12);
            assert_eq!(b.re, 0.0);
        }
        assert!(r.alpha.values.iter().all(|a| a.norm() == 0.0));
        assert!(r.gamma.values.iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn riccati_matches_closed_form() {
        let p = params(0.2, 4);
        let grid = TimeGrid::new(0.0, 20.0, 1e-3, 10).unwrap();
        let r = riccati_integrate(&p, &grid).unwrap();
        let mut worst = 0.0f64;
        for i in 0..r.alpha.len() {
            let c = wei_norman_coeffs(&p, r.alpha.times[i]).unwrap();
            worst = worst
                .max((c.alpha - r.alpha.values[i]).norm())
                .max((c.beta - r.beta.values[i]).norm())
                .max((c.gamma - r.gamma.values[i]).norm());
        }
        assert!(worst <= 1e-8, "{worst}");
    }

    #[test]
    fn riccati_requires_zero_start() {
        let grid = TimeGrid::new(1.0, 2.0, 0.1, 1).unwrap();
        assert!(riccati_integrate(&params(0.2, 4), &grid).is_err());
    }

    #[test]
    fn split_step_without_drive_is_exact_phase() {
        let p = ModelParams::new(1.0, 0.0, 0.4, 10).unwrap();
        let z = FockVector::coherent(C64::new(0.6, 0.1), 10).unwrap();
        let dt = 0.01;
        let out = su11_split_step(&p, 0.3, dt, z.amplitudes());
        let l0 = DenseOperator::diagonal_fn(10, |n| 0.5 * (n as f64 + 0.5));
        let exact = (C64::new(0.0, dt * 0.4) * &l0).exp().apply(&z).unwrap();
        for (a, b) in out.iter().zip(exact.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    fn stepped_deviation(p: &ModelParams, dt: f64) -> f64 {
        let vac = FockVector::vacuum(p.dim()).unwrap();
        let grid = TimeGrid::new(0.0, 20.0, dt, (0.1 / dt).round() as usize).unwrap();
        let stepped = photon_number_series(&stepped_su11_propagator(p, &grid, &vac).unwrap());
        let trace = stepped_su11_number_trace(p, &grid, &vac).unwrap();
        assert_eq!(trace.n_mean, stepped);
        let h = Hamiltonian::InteractionTilde { params: *p };
        let rk = schrodinger_number_trace(&h, &vac, &grid).unwrap();
        for (t, n) in rk.n_mean.iter() {
            assert!((n - vacuum_photon_number(p, t)).abs() < 1e-9);
        }
        stepped.sup_distance(&rk.n_mean)
    }

    #[test]
    fn stepped_su11_tracks_rk4() {
        let p = params(0.2, 64);
        let coarse = stepped_deviation(&p, 2e-3);
        let fine = stepped_deviation(&p, 1e-3);
        // first-order splitting: the deviation is 1.04e-4 at dt = 1e-3
        assert!(fine <= 1.05e-4, "{fine}");
        let ratio = coarse / fine;
        assert!((1.8..=2.2).contains(&ratio), "{ratio}");
        assert!(stepped_deviation(&p, 5e-4) <= 1e-4);
    }

    #[test]
    fn convergence_report() {
        let p = params(0.5, 2);
        let grid = TimeGrid::new(0.0, 10.0, 1e-3, 100).unwrap();
        let run = |dim: usize| {
            let h = Hamiltonian::Full { params: p.with_dim(dim)?, mode: ChiMode::Exact };
            Ok(corotating_number_trace(&h, &FockVector::vacuum(dim)?, &grid)?.n_mean)
        };
        let report = truncation_convergence(run, &[16, 32, 64]).unwrap();
        assert!(report.converged);
        assert_eq!(report.sup_diff[2], 0.0);
        assert!(truncation_convergence(run, &[32]).is_err());

        let a = run(32).unwrap();
        let b = run(32).unwrap();
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn default_dims() {
        let at = |k: f64, t: f64| default_dim(&params(k, 2), t);
        assert_eq!(at(0.0, 60.0), 8192);
        assert_eq!(at(0.0, 40.0), 2048);
        assert_eq!(at(0.15, 60.0), 128);
        assert_eq!(at(0.5, 60.0), 64);
        assert_eq!(default_dim(&ModelParams::new(1.0, 0.0, 0.2, 2).unwrap(), 60.0), 64);
        assert!((peak_photon_estimate(&params(0.2, 2), 60.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!(at(0.001, 60.0) >= at(0.01, 60.0));
    }

    #[test]
    fn default_dim_is_converged_for_rwa() {
        let p = params(0.0, 2);
        let grid = TimeGrid::new(0.0, 30.0, 1e-3, 1000).unwrap();
        let dim = default_dim(&p, 30.0);
        let run = |dim: usize| {
            let h = Hamiltonian::Rwa { params: p.with_dim(dim)? };
            Ok(schrodinger_number_trace(&h, &FockVector::vacuum(dim)?, &grid)?.n_mean)
        };
        let report = truncation_convergence(run, &[dim / 2, dim, 2 * dim]).unwrap();
        assert!(report.sup_diff[1] < CONVERGENCE_TOL);
        assert!(report.sup_diff[0] > report.sup_diff[1]);
    }

    #[test]
    fn number_series_shapes() {
        let traj = Trajectory {
            times: vec![0.0, 1.0, 2.0],
            states: vec![FockVector::vacuum(4).unwrap(); 3],
        };
        let s = photon_number_series(&traj);
        assert_eq!(s.len(), 3);
        assert!(s.values.iter().all(|&v| v == 0.0));
        let traj = Trajectory {
            times: vec![0.0, 1.0],
            states: vec![FockVector::number_state(1, 4).unwrap(); 2],
        };
        assert!(photon_number_series(&traj).values.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn rwa_dense_builder_equals_banded() {
        let p = params(0.2, 16);
        let h = hamiltonian_rwa(&p);
        assert!((&h - &Hamiltonian::Rwa { params: p }.to_dense(3.0)).max_abs() == 0.0);
    }
}
