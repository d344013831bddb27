//! Invariant and acceptance checks shared by `validate` and the test suite.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::path::Path;

use dce_kerr::analytic::{
    classify_regime, displacement_residual_on_block, empty_cavity_squeeze_check,
    kerr_evolved_coherent, phi_coeffs_raw, vacuum_photon_number, vacuum_zero_times,
    wei_norman_coeffs, RegimeKind,
};
use dce_kerr::fock::{build_annihilation, build_creation, fidelity};
use dce_kerr::model::{hamiltonian_interaction_tilde, su11_generators};
use dce_kerr::propagator::{
    corotating_number_trace, default_dim, riccati_integrate, schrodinger_number_trace,
    stepped_su11_number_trace, truncation_convergence, DenseGenerator, TimeGrid, TimeSeries,
    CONVERGENCE_TOL,
};
use dce_kerr::signal::{dominant_frequency, fourier_amplitude, moving_average};
use dce_kerr::{ChiMode, FockVector, Hamiltonian, ModelParams, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Method, Preset, RunConfig};
use crate::error::CliError;
use crate::run::{execute, metadata_path, run, RunResult};

pub const FIGURE1_KERR: [f64; 7] = [0.0, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5];

/// Seed of the random sample points.
pub const SEED: u64 = 0x5eed_d0e5;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    /// Set when the stated tolerance is known to be unreachable; the reason
    /// and the corrected companion check are recorded alongside.
    pub deviation: Option<&'static str>,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
            deviation: None,
        }
    }

    fn deviating(mut self, reason: &'static str) -> Self {
        self.deviation = Some(reason);
        self
    }

    /// Passed, or failed only where a documented deviation is expected.
    pub fn acceptable(&self) -> bool {
        self.passed || self.deviation.is_some()
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.name, self.detail)?;
        if let (false, Some(reason)) = (self.passed, self.deviation) {
            write!(f, " [documented deviation: {reason}]")?;
        }
        Ok(())
    }
}

fn params(kerr: f64, dim: usize) -> ModelParams {
    ModelParams::new(1.0, 0.1, kerr, dim).expect("valid parameters")
}

fn grid(t_end: f64, dt: f64, stride: usize) -> TimeGrid {
    TimeGrid::new(0.0, t_end, dt, stride).expect("valid grid")
}

fn vacuum_trace(h: &Hamiltonian, grid: &TimeGrid) -> TimeSeries {
    corotating_number_trace(h, &FockVector::vacuum(h.dim()).expect("dim >= 2"), grid)
        .expect("bounded integration")
        .n_mean
}

fn analytic_series(p: &ModelParams, times: &[f64]) -> Vec<f64> {
    times.iter().map(|&t| vacuum_photon_number(p, t)).collect()
}

/// `max |a - b|`.
fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

const TRUNCATION_NOTE: &str = "the squeezed vacuum at r = 2 needs about 1000 levels; \
     at dim 256 the Fock truncation alone gives a relative error near 5e-5";

/// Vacuum under the RWA generator with `K = 0` against `sinh^2(0.05 t)`.
pub fn criterion_1(dim: usize) -> Check {
    let trace = vacuum_trace(
        &Hamiltonian::Rwa {
            params: params(0.0, dim),
        },
        &grid(40.0, 1e-3, 100),
    );
    let (worst, at) = trace
        .iter()
        .skip(1)
        .map(|(t, n)| {
            let exact = (0.05 * t).sinh().powi(2);
            ((n - exact).abs() / exact, t)
        })
        .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    let check = Check::new(
        format!("criterion 1 empty-cavity law (rwa, K=0, dim {dim}, t<=40)"),
        worst <= 1e-6,
        format!("max relative error {worst:.3e} at t={at} (tol 1e-6)"),
    );
    if dim < 1024 {
        check.deviating(TRUNCATION_NOTE)
    } else {
        check
    }
}

/// Closed-form regimes: growth, critical `g^2 t^2`, bounded oscillation.
pub fn criterion_2() -> Check {
    let times: Vec<f64> = (0..=6000).map(|k| k as f64 * 0.01).collect();
    let n0 = analytic_series(&params(0.0, 2), &times);
    let increasing = n0.windows(2).all(|w| w[1] > w[0]);
    let convex = n0
        .windows(3)
        .all(|w| w[2] - 2.0 * w[1] + w[0] >= -1e-12 * w[1]);

    let p = params(0.1, 2);
    let critical = classify_regime(&p).kind == RegimeKind::Critical;
    let g2 = p.g() * p.g();
    let crit_err = times
        .iter()
        .skip(1)
        .map(|&t| (vacuum_photon_number(&p, t) / (g2 * t * t) - 1.0).abs())
        .fold(0.0, f64::max);

    let p = params(0.2, 2);
    let eta = (0.01f64 - 0.0025).sqrt();
    let peak_err = (vacuum_photon_number(&p, FRAC_PI_2 / eta) - 1.0 / 3.0).abs();
    let bounded = times
        .iter()
        .all(|&t| vacuum_photon_number(&p, t) <= 1.0 / 3.0 + 1e-12);
    let zeros: Vec<f64> = (1..=3).map(|m| m as f64 * PI / eta).collect();
    let zero_err = zeros
        .iter()
        .map(|&t| vacuum_photon_number(&p, t).abs())
        .fold(0.0, f64::max);
    let listed = vacuum_zero_times(&p, zeros[2] + 1.0);
    let zeros_listed =
        listed.len() == 3 && listed.iter().zip(&zeros).all(|(a, b)| (a - b).abs() <= 1e-12 * b);

    Check::new(
        "criterion 2 three regimes (closed form)",
        increasing
            && convex
            && critical
            && crit_err <= 1e-12
            && peak_err <= 1e-12
            && bounded
            && zero_err <= 1e-10
            && zeros_listed,
        format!(
            "K=0 increasing {increasing} convex {convex}; K=0.1 critical {critical}, \
             rel err vs g^2t^2 {crit_err:.1e} (tol 1e-12); K=0.2 peak err {peak_err:.1e} \
             (tol 1e-12), bounded {bounded}, zero residual {zero_err:.1e} (tol 1e-10)"
        ),
    )
}

/// Moving-average window removing the `4 omega0` micro-oscillation.
pub fn micro_period(omega0: f64) -> f64 {
    FRAC_PI_2 / omega0
}

/// Largest relative gap between the smoothed full-Hamiltonian and smoothed
/// closed-form `<n>` where the closed form is below 0.05 and `t <= T_K/10`.
pub fn short_time_gap(kerr: f64) -> (f64, f64, usize) {
    let p = params(kerr, 2);
    let w = micro_period(1.0);
    let t_cut = p.revival_time() / 10.0;
    let t_end = ((t_cut + w) * 100.0).ceil() / 100.0;
    let dim = default_dim(&p, t_end);
    let full = vacuum_trace(
        &Hamiltonian::Full {
            params: p.with_dim(dim).expect("dim"),
            mode: ChiMode::Exact,
        },
        &grid(t_end, 1e-3, 10),
    );
    let analytic = analytic_series(&p, &full.times);
    let sm_full = moving_average(&full.times, &full.values, w);
    let sm_an = moving_average(&full.times, &analytic, w);
    sm_full
        .iter()
        .zip(&sm_an)
        .filter(|((t, _), (_, a))| *t <= t_cut && vacuum_photon_number(&p, *t) <= 0.05 && *a > 0.0)
        .map(|((t, f), (_, a))| ((f - a).abs() / a, *t, 1))
        .fold((0.0, 0.0, 0), |acc, (r, t, c)| {
            if r > acc.0 {
                (r, t, acc.2 + c)
            } else {
                (acc.0, acc.1, acc.2 + c)
            }
        })
}

pub fn criterion_3() -> Check {
    let mut detail = Vec::new();
    let mut passed = true;
    for &k in &FIGURE1_KERR[1..] {
        let (gap, at, samples) = short_time_gap(k);
        passed &= gap <= 0.15 && samples > 0;
        detail.push(format!("K={k}: {:.1}% at t={at:.2} ({samples} pts)", 100.0 * gap));
    }
    Check::new(
        "criterion 3 short-time full vs closed form (tol 15%)",
        passed,
        detail.join("; "),
    )
}

pub struct MicroOscillation {
    pub frequency: f64,
    pub amplitude: f64,
    pub rwa_residual_amplitude: f64,
}

/// Spectrum of full minus RWA at `K = 0` on `[0, 20]`.
pub fn micro_oscillation() -> MicroOscillation {
    let p = params(0.0, 2);
    let dim = default_dim(&p, 20.0);
    let p = p.with_dim(dim).expect("dim");
    let g = grid(20.0, 1e-3, 10);
    let full = vacuum_trace(&Hamiltonian::Full { params: p, mode: ChiMode::Exact }, &g);
    let rwa = vacuum_trace(&Hamiltonian::Rwa { params: p }, &g);
    let diff: Vec<f64> = full.values.iter().zip(&rwa.values).map(|(a, b)| a - b).collect();
    let frequency = dominant_frequency(&full.times, &diff, 0.5, 12.0, 0.005);
    let amplitude = fourier_amplitude(&full.times, &diff, frequency, true);
    let residual: Vec<f64> = rwa
        .iter()
        .map(|(t, n)| n - (0.05 * t).sinh().powi(2))
        .collect();
    MicroOscillation {
        frequency,
        amplitude,
        rwa_residual_amplitude: fourier_amplitude(&rwa.times, &residual, 4.0, true),
    }
}

pub fn criterion_4() -> Check {
    let m = micro_oscillation();
    let in_band = (m.frequency - 4.0).abs() <= 0.4;
    Check::new(
        "criterion 4 full-minus-rwa micro-oscillation at 4 omega0",
        in_band && m.rwa_residual_amplitude <= 1e-8,
        format!(
            "dominant frequency {:.3} (band 3.6..4.4), amplitude {:.2e}; \
             rwa 4 omega0 amplitude {:.1e} (tol 1e-8)",
            m.frequency, m.amplitude, m.rwa_residual_amplitude
        ),
    )
}

/// Sup-norm distance of the integrated Wei–Norman coefficients to the closed form.
pub fn riccati_error(kerr: f64, dt: f64) -> f64 {
    let p = params(kerr, 2);
    let r = riccati_integrate(&p, &grid(20.0, dt, 1)).expect("bounded");
    let mut worst = 0.0f64;
    for i in 0..r.alpha.len() {
        let c = wei_norman_coeffs(&p, r.alpha.times[i]).expect("no pole");
        worst = worst
            .max((c.alpha - r.alpha.values[i]).norm())
            .max((c.beta - r.beta.values[i]).norm())
            .max((c.gamma - r.gamma.values[i]).norm());
    }
    worst
}

pub fn criterion_5() -> Check {
    let mut worst = 0.0f64;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for &k in &FIGURE1_KERR {
        worst = worst.max(riccati_error(k, 1e-3));
        let ratio = riccati_error(k, 0.04) / riccati_error(k, 0.02);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Check::new(
        "criterion 5 Riccati integration vs closed form",
        worst <= 1e-8 && lo >= 12.0 && hi <= 20.0,
        format!(
            "sup error {worst:.2e} at dt=1e-3 (tol 1e-8); step-halving ratio \
             dt 0.04 -> 0.02 in [{lo:.2}, {hi:.2}] (band 12..20)"
        ),
    )
}

pub fn criterion_6(points: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut herm, mut imag, mut phi4) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..points {
        let k = rng.gen_range(0.0..=0.5);
        let t = rng.gen_range(0.0..=20.0);
        let p = params(k, 2);
        let [p1, p2, p3, p4] = phi_coeffs_raw(&p, t).expect("no pole");
        herm = herm.max((p1 - p3.conj()).norm() / (1.0 + p1.norm()));
        imag = imag.max(p2.im.abs()).max(p4.im.abs());
        phi4 = phi4.max((p4.re - vacuum_photon_number(&p, t)).abs());
    }
    Check::new(
        format!("criterion 6 Heisenberg coefficient identities ({points} random points)"),
        herm <= 1e-10 && imag <= 1e-10 && phi4 <= 1e-10,
        format!(
            "|phi1 - phi3*|/(1+|phi1|) {herm:.1e}, |Im phi2|,|Im phi4| {imag:.1e}, \
             |phi4 - <n>| {phi4:.1e} (tol 1e-10)"
        ),
    )
}

pub fn criterion_7() -> Check {
    let dim = 30;
    let z = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let plus = FockVector::coherent(i * z, dim).expect("dim");
    let minus = FockVector::coherent(-i * z, dim).expect("dim");
    let cat: Vec<C64> = plus
        .amplitudes()
        .iter()
        .zip(minus.amplitudes())
        .map(|(a, b)| C64::from_polar(1.0, -FRAC_PI_4) * (a + i * b) / 2f64.sqrt())
        .collect();
    let cat = FockVector::from_amplitudes(cat).expect("dim");
    let start = FockVector::coherent(z, dim).expect("dim");
    let (mut cat_err, mut revival_err) = (0.0f64, 0.0f64);
    for k in [0.05, 0.2, 0.5, 1.0] {
        let at_half = kerr_evolved_coherent(z, k, PI / k, dim).expect("valid");
        cat_err = cat_err.max(1.0 - fidelity(&at_half, &cat).expect("dims"));
        let at_full = kerr_evolved_coherent(z, k, 2.0 * PI / k, dim).expect("valid");
        revival_err = revival_err.max(1.0 - fidelity(&at_full, &start).expect("dims"));
    }
    Check::new(
        "criterion 7 Kerr cat state and revival (dim 30)",
        cat_err <= 1e-10 && revival_err <= 1e-12,
        format!(
            "1 - F(cat) {cat_err:.1e} (tol 1e-10), 1 - F(revival) {revival_err:.1e} (tol 1e-12)"
        ),
    )
}

pub fn criterion_8() -> Check {
    let dim = 256;
    let p = params(0.5, dim);
    let eta = 0.06f64.sqrt();
    let ev = hamiltonian_interaction_tilde(&p, 0.0).hermitian_eigenvalues();
    // the ladder -eta (n + 1/2) descends from the top of the spectrum
    let spectrum_err = (0..5)
        .map(|n| (ev[dim - 1 - n] + eta * (n as f64 + 0.5)).abs())
        .fold(0.0, f64::max);
    let disp = [0.0, 1.0]
        .iter()
        .map(|&t| {
            displacement_residual_on_block(&p, t, dim, dim / 4)
                .expect("trigonometric")
                .max()
        })
        .fold(0.0, f64::max);
    Check::new(
        "criterion 8 su(1,1) spectrum and displacement (K=0.5, dim 256)",
        spectrum_err <= 1e-6 && disp <= 1e-6,
        format!(
            "ladder eigenvalue error {spectrum_err:.1e} (tol 1e-6); displacement residual \
             on n<64 {disp:.1e} at t=0,1 (tol 1e-6)"
        ),
    )
}

/// Peak, fractional drop after the peak, and dominant frequency of the
/// smoothed, mean-removed curve.
pub struct Saturation {
    pub kerr: f64,
    pub peak: f64,
    pub peak_t: f64,
    pub drop: f64,
    pub frequency: f64,
}

pub fn saturation(series: &TimeSeries, kerr: f64) -> Saturation {
    let (i, peak) = series
        .values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |a, (i, v)| if v > a.1 { (i, v) } else { a });
    let after = series.values[i..].iter().copied().fold(f64::INFINITY, f64::min);
    let smooth = moving_average(&series.times, &series.values, micro_period(1.0));
    let (t, v): (Vec<f64>, Vec<f64>) = smooth.into_iter().unzip();
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let centered: Vec<f64> = v.iter().map(|x| x - mean).collect();
    Saturation {
        kerr,
        peak,
        peak_t: series.times[i],
        drop: if peak > 0.0 { 1.0 - after / peak } else { 0.0 },
        frequency: dominant_frequency(&t, &centered, 0.02, 2.0, 0.001),
    }
}

const SATURATION_NOTE: &str = "for small K the Kerr detuning stops the growth late: the \
maximum of <n> comes near or after t = 60, so the fall to half of it lies beyond the preset \
window; the extended-window companion shows it for every such K";

/// Truncation and horizon of the extended saturation runs.
pub const SATURATION_DIM: usize = 4096;
pub const SATURATION_TMAX: f64 = 120.0;

/// Saturation phenomenology of a figure-2 run: the smoothed `K = 0` curve is
/// monotone and the oscillation frequency rises from `K = 0.25` to `0.45`;
/// every `K > 0` curve peaks and then falls by half within the preset window;
/// the runs that do not are repeated over `[0, 120]`.
pub fn criterion_9(figure2: &RunResult) -> Result<Vec<Check>, CliError> {
    let mut monotone = None;
    let mut freqs = Vec::new();
    let mut sats = Vec::new();
    for &k in &figure2.config.kerr {
        let Some(s) = figure2.get(Method::Full, k) else {
            return Err(CliError::config("methods", format!("figure2 run has no full series at K={k}")));
        };
        if k == 0.0 {
            let smooth = moving_average(&s.n_mean.times, &s.n_mean.values, micro_period(1.0));
            monotone = Some(smooth.windows(2).all(|w| w[1].1 >= w[0].1));
        } else {
            let sat = saturation(&s.n_mean, k);
            if k == 0.25 || k == 0.45 {
                freqs.push(sat.frequency);
            }
            sats.push(sat);
        }
    }
    let rising = freqs.len() == 2 && freqs[1] > freqs[0];
    let shape = Check::new(
        "criterion 9 K=0 monotone, oscillation frequency rising K=0.25 -> 0.45 (figure2 preset)",
        monotone == Some(true) && rising,
        format!("K=0 smoothed monotone {monotone:?}; frequencies {freqs:.3?}"),
    );

    let describe = |s: &Saturation| {
        format!("K={}: max {:.3} at t={:.1}, drop {:.0}%", s.kerr, s.peak, s.peak_t, 100.0 * s.drop)
    };
    let falls = |s: &Saturation| s.peak.is_finite() && s.drop >= 0.5;
    let late: Vec<f64> = sats.iter().filter(|s| !falls(s)).map(|s| s.kerr).collect();
    let within = Check::new(
        "criterion 9 every K>0 peaks then falls by >=50% within t<=60 (figure2 preset)",
        late.is_empty(),
        sats.iter().map(describe).collect::<Vec<_>>().join("; "),
    );
    let within = if late.is_empty() { within } else { within.deviating(SATURATION_NOTE) };

    let extended = if late.is_empty() {
        Check::new("criterion 9 extended window", true, "no run needed")
    } else {
        let config = RunConfig {
            kerr: late.clone(),
            dim: Some(SATURATION_DIM),
            t_max: SATURATION_TMAX,
            methods: vec![Method::Full],
            preset: None,
            ..figure2.config.clone()
        };
        let long = execute(&config)?;
        let mut passed = true;
        let mut detail = Vec::new();
        for s in &long.series {
            let sat = saturation(&s.n_mean, s.kerr);
            // population tail of a squeezed vacuum with the observed peak
            let tail = (sat.peak / (1.0 + sat.peak)).sqrt().powi(SATURATION_DIM as i32);
            passed &= falls(&sat) && tail < 1e-12;
            detail.push(format!("{}, tail bound {tail:.0e}", describe(&sat)));
        }
        Check::new(
            format!(
                "criterion 9 late-saturating K peak then fall by >=50% within t<={SATURATION_TMAX} \
                 (full, dim {SATURATION_DIM})"
            ),
            passed,
            detail.join("; "),
        )
    };
    Ok(vec![shape, within, extended])
}

/// Byte equality of two preset outputs.
pub fn criterion_10_determinism(label: &str, a: &[u8], b: &[u8]) -> Check {
    Check::new(
        format!("criterion 10 determinism ({label})"),
        a == b && !a.is_empty(),
        format!("{} bytes, identical {}", a.len(), a == b),
    )
}

/// Every `<n>` series of `base` against the same series at doubled dims.
pub fn criterion_10_convergence(label: &str, base: &RunResult, doubled: &RunResult) -> Check {
    let mut worst = (0.0f64, String::new());
    for s in &base.series {
        let Some(d) = doubled.get(s.method, s.kerr) else {
            return Check::new(
                format!("criterion 10 dim doubling ({label})"),
                false,
                format!("missing {} K={}", s.method, s.kerr),
            );
        };
        let diff = s.n_mean.sup_distance(&d.n_mean);
        if diff >= worst.0 {
            worst = (diff, format!("{} K={} dim {}->{}", s.method, s.kerr, s.dim, d.dim));
        }
    }
    Check::new(
        format!("criterion 10 dim doubling ({label})"),
        worst.0 < CONVERGENCE_TOL,
        format!("largest sup-norm change {:.1e} ({}) (tol 1e-8)", worst.0, worst.1),
    )
}

// ---- module invariants ----------------------------------------------------

pub fn fock_invariants() -> Check {
    let dim = 12;
    let a = build_annihilation(dim).expect("dim");
    let ad = build_creation(dim).expect("dim");
    let comm = a.commutator(&ad).expect("dims");
    let diag_ok = (0..dim).all(|n| {
        let want = if n + 1 == dim { 1.0 - dim as f64 } else { 1.0 };
        (comm[(n, n)] - C64::new(want, 0.0)).norm() < 1e-12
    });
    let adjoint_ok = (&a.adjoint() - &ad).max_abs() == 0.0;
    let u = FockVector::coherent(C64::new(0.4, 0.3), dim).expect("dim");
    let v = FockVector::number_state(2, dim).expect("dim");
    let sym = (fidelity(&u, &v).expect("dims") - fidelity(&v, &u).expect("dims")).abs();
    Check::new(
        "fock: commutator, adjoint, fidelity symmetry",
        diag_ok && adjoint_ok && sym < 1e-15,
        format!("[a,a+] diagonal ok {diag_ok}, a+ = adjoint(a) {adjoint_ok}, asymmetry {sym:.0e}"),
    )
}

pub fn model_invariants() -> Check {
    let p = params(0.3, 24);
    let mut worst_period = 0.0f64;
    let mut worst_herm = 0.0f64;
    for k in 0..20 {
        let t = 0.37 * k as f64;
        for mode in [ChiMode::Exact, ChiMode::Approximate] {
            let h = Hamiltonian::Full { params: p, mode };
            let a = h.to_dense(t);
            let b = h.to_dense(t + PI);
            worst_period = worst_period.max((&a - &b).max_abs() / a.max_abs());
            worst_herm = worst_herm.max(a.hermiticity_residual());
        }
    }
    let l = dce_kerr::fock::Ladder::new(24).expect("dim");
    let (l0, lp, lm) = su11_generators(&l, None);
    let block = |m: &dce_kerr::DenseOperator| {
        (0..20)
            .flat_map(|i| (0..20).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm())
            .fold(0.0, f64::max)
    };
    let c1 = block(&(&lm.commutator(&lp).expect("dims") - &(2.0 * &l0)));
    let c2 = block(&(&l0.commutator(&lp).expect("dims") - &lp));
    let c3 = block(&(&l0.commutator(&lm).expect("dims") + &lm));
    let su11 = c1.max(c2).max(c3);
    Check::new(
        "model: Hermitian, pi-periodic, su(1,1) commutators",
        worst_period <= 1e-12 && worst_herm <= 1e-12 && su11 <= 1e-12,
        format!(
            "period residual {worst_period:.0e}, hermiticity {worst_herm:.0e}, \
             commutators {su11:.0e} on n<20"
        ),
    )
}

pub fn analytic_invariants() -> Check {
    let g = 0.05;
    let mut cont = 0.0f64;
    for sign in [-1.0, 1.0] {
        let k = 2.0 * g * (1.0 + sign * 1e-6);
        let p = params(k, 2);
        for i in 1..=40 {
            let t = 0.5 * i as f64;
            cont = cont.max((vacuum_photon_number(&p, t) / (g * g * t * t) - 1.0).abs());
        }
    }
    let mut phi = 0.0f64;
    for &k in &[0.0, 0.05, 0.1, 0.2, 0.5] {
        let p = params(k, 2);
        for i in 0..=40 {
            let t = 0.5 * i as f64;
            let [_, _, _, p4] = phi_coeffs_raw(&p, t).expect("no pole");
            phi = phi.max((p4.re - vacuum_photon_number(&p, t)).abs());
        }
    }
    let sq = (empty_cavity_squeeze_check(0.5, 64).expect("dim") - 0.5f64.sinh().powi(2)).abs();
    Check::new(
        "analytic: regime continuity, phi4 consistency, squeeze oracle",
        cont < 1e-6 && phi <= 1e-10 && sq <= 1e-8,
        format!(
            "continuity {cont:.1e} (tol 1e-6), |phi4 - <n>| {phi:.1e} (tol 1e-10), \
             squeeze r=0.5 dim 64 {sq:.1e} (tol 1e-8)"
        ),
    )
}

/// Norm drift of RK4 over `[0, 40]` at `dt = 1e-3`.
pub fn unitarity() -> Check {
    let mut worst = 0.0f64;
    for (k, dim) in [(0.0, 1024), (0.2, 128), (0.5, 128)] {
        let p = params(k, dim);
        for h in [
            Hamiltonian::Rwa { params: p },
            Hamiltonian::Full {
                params: p,
                mode: ChiMode::Exact,
            },
        ] {
            let trace = corotating_number_trace(&h, &FockVector::vacuum(dim).expect("dim"), &grid(40.0, 1e-3, 100))
                .expect("bounded");
            worst = worst.max(trace.norm.values.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max));
        }
    }
    Check::new(
        "propagator: norm drift over t<=40",
        worst < 1e-7,
        format!("max |norm - 1| {worst:.1e} (tol 1e-7)"),
    )
}

/// Stepped su(1,1) product against RK4 on the interaction Hamiltonian and
/// against the closed form, figure-1 parameters, `t <= 20`.
pub fn method_equivalence(dt: f64) -> (f64, f64) {
    let g = grid(20.0, dt, (0.1 / dt).round() as usize);
    let (mut stepped, mut rk4) = (0.0f64, 0.0f64);
    for &k in &FIGURE1_KERR {
        let p = params(k, 2);
        let p = p.with_dim(default_dim(&p, 20.0)).expect("dim");
        let vac = FockVector::vacuum(p.dim()).expect("dim");
        let closed = analytic_series(&p, &g.sample_times());
        let rk = schrodinger_number_trace(&Hamiltonian::InteractionTilde { params: p }, &vac, &g)
            .expect("bounded")
            .n_mean;
        let st = stepped_su11_number_trace(&p, &g, &vac).expect("bounded").n_mean;
        rk4 = rk4.max(sup(&rk.values, &closed));
        stepped = stepped.max(sup(&st.values, &rk.values));
    }
    (stepped, rk4)
}

const SPLITTING_NOTE: &str = "first-order splitting error is 1.9e-4 at dt = 1e-3 for K <= 0.2; \
     it halves with dt, so dt = 5e-4 meets 1e-4";

pub fn method_equivalence_checks() -> Vec<Check> {
    let (st, rk) = method_equivalence(1e-3);
    let (st_half, _) = method_equivalence(5e-4);
    vec![
        Check::new(
            "propagator: RK4 on interaction Hamiltonian vs closed form (figure1 K, t<=20)",
            rk <= 1e-4,
            format!("sup |<n>| gap {rk:.1e} (tol 1e-4)"),
        ),
        Check::new(
            "propagator: stepped su(1,1) vs RK4 at dt=1e-3 (figure1 K, t<=20)",
            st <= 1e-4,
            format!("sup |<n>| gap {st:.2e} (tol 1e-4)"),
        )
        .deviating(SPLITTING_NOTE),
        Check::new(
            "propagator: stepped su(1,1) vs RK4 at dt=5e-4 (figure1 K, t<=20)",
            st_half <= 1e-4,
            format!("sup |<n>| gap {st_half:.2e} (tol 1e-4); first-order ratio {:.2}", st / st_half),
        ),
    ]
}

/// `<n>` is invariant under the frame changes: lab-frame RWA against the
/// interaction Hamiltonian with its time-dependent twist, and lab-frame RK4
/// of the full Hamiltonian against the co-rotating integration.
pub fn frame_equivalence() -> Check {
    let dim = 48;
    let g = grid(20.0, 1e-3, 100);
    let vac = FockVector::vacuum(dim).expect("dim");
    let mut rwa_gap = 0.0f64;
    let mut lab_gap = 0.0f64;
    for k in [0.0, 0.15, 0.3] {
        let p = params(k, dim);
        let rwa = schrodinger_number_trace(&Hamiltonian::Rwa { params: p }, &vac, &g)
            .expect("bounded")
            .n_mean;
        let hi = schrodinger_number_trace(&Hamiltonian::Interaction { params: p }, &vac, &g)
            .expect("bounded")
            .n_mean;
        rwa_gap = rwa_gap.max(rwa.sup_distance(&hi));

        let full = Hamiltonian::Full {
            params: p,
            mode: ChiMode::Exact,
        };
        let l = dce_kerr::fock::Ladder::new(dim).expect("dim");
        let lab = schrodinger_number_trace(
            &DenseGenerator::new(dim, |t| full.to_dense_with(&l, t)),
            &vac,
            &g,
        )
        .expect("stable at dim 48")
        .n_mean;
        lab_gap = lab_gap.max(lab.sup_distance(&vacuum_trace(&full, &g)));
    }
    Check::new(
        "propagator: frame equivalence",
        rwa_gap <= 1e-6 && lab_gap <= 1e-6,
        format!(
            "rwa lab vs interaction frame {rwa_gap:.1e}, full lab vs co-rotating {lab_gap:.1e} \
             (tol 1e-6)"
        ),
    )
}

const LADDER_NOTE: &str = "dim 256 leaves a 7e-4 truncation error at t = 40; \
     the ladder converges from dim 1024";

/// Dim ladders: bounded occupation converges early; `K = 0` to `t = 40` does not at 256.
pub fn truncation_checks() -> Vec<Check> {
    let run = |k: f64, t_end: f64| {
        move |dim: usize| {
            let p = params(k, dim);
            corotating_number_trace(
                &Hamiltonian::Full {
                    params: p,
                    mode: ChiMode::Exact,
                },
                &FockVector::vacuum(dim)?,
                &grid(t_end, 1e-3, 100),
            )
            .map(|tr| tr.n_mean)
        }
    };
    let k05 = truncation_convergence(run(0.5, 60.0), &[32, 64, 128]).expect("ladder");
    let low = truncation_convergence(run(0.0, 40.0), &[128, 256, 512]).expect("ladder");
    let high = truncation_convergence(run(0.0, 40.0), &[512, 1024, 2048]).expect("ladder");
    vec![
        Check::new(
            "propagator: K=0.5 converged by dim 64",
            k05.sup_diff[1] < CONVERGENCE_TOL,
            format!("dim 64 vs 128: {:.1e} (tol 1e-8)", k05.sup_diff[1]),
        ),
        Check::new(
            "propagator: K=0 to t=40 converged at dim 256",
            low.sup_diff[1] < CONVERGENCE_TOL,
            format!("dim 256 vs 512: {:.1e} (tol 1e-8)", low.sup_diff[1]),
        )
        .deviating(LADDER_NOTE),
        Check::new(
            "propagator: K=0 to t=40 converged at dim 1024",
            high.sup_diff[1] < CONVERGENCE_TOL,
            format!("dim 1024 vs 2048: {:.1e} (tol 1e-8)", high.sup_diff[1]),
        ),
    ]
}

/// Module invariants plus acceptance criteria 1–8, which need no preset run.
pub fn core_suite() -> Vec<Check> {
    let mut checks = vec![
        fock_invariants(),
        model_invariants(),
        analytic_invariants(),
        criterion_6(20, SEED ^ 1),
        unitarity(),
        frame_equivalence(),
    ];
    checks.extend(method_equivalence_checks());
    checks.extend(truncation_checks());
    checks.extend([
        criterion_1(256),
        criterion_1(1024),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(100, SEED),
        criterion_7(),
        criterion_8(),
    ]);
    checks
}

/// Reruns every Kerr value of `base` at twice its truncation.
pub fn doubled_dims(base: &RunResult) -> Result<RunResult, CliError> {
    let mut series = Vec::new();
    let mut truncations = Vec::new();
    for tr in &base.truncations {
        let config = RunConfig {
            kerr: vec![tr.kerr],
            dim: Some(2 * tr.dim),
            preset: None,
            ..base.config.clone()
        };
        let r = execute(&config)?;
        series.extend(r.series);
        truncations.extend(r.truncations);
    }
    Ok(RunResult {
        config: base.config.clone(),
        series,
        truncations,
        wall_time: 0.0,
    })
}

fn without_wall_time(meta: &str) -> String {
    meta.lines()
        .filter(|l| !l.starts_with("wall_time_s"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

/// Both presets run twice into `dir`, plus once at doubled dims: criteria 9 and 10.
pub fn preset_suite(dir: &Path) -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    for preset in [Preset::Figure1, Preset::Figure2] {
        let name = preset.as_str();
        let first = run(&preset.config(dir.join(format!("{name}_a.csv"))))?;
        let second = run(&preset.config(dir.join(format!("{name}_b.csv"))))?;
        let (a, b) = (read(&first.config.output)?, read(&second.config.output)?);
        checks.push(criterion_10_determinism(&format!("{name} csv"), &a, &b));
        let meta = |r: &RunResult| -> Result<String, CliError> {
            let bytes = read(&metadata_path(&r.config.output))?;
            Ok(without_wall_time(&String::from_utf8_lossy(&bytes)))
        };
        let (ma, mb) = (meta(&first)?, meta(&second)?);
        checks.push(criterion_10_determinism(
            &format!("{name} metadata without wall time"),
            ma.as_bytes(),
            mb.as_bytes(),
        ));
        if preset == Preset::Figure2 {
            checks.extend(criterion_9(&first)?);
        }
        checks.push(criterion_10_convergence(name, &first, &doubled_dims(&first)?));
    }
    Ok(checks)
}
