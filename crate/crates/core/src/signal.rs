//! Post-processing of uniformly sampled real curves.

use std::f64::consts::PI;

use crate::C64;

/// Integral of the piecewise-linear interpolant of `values` from `times[0]` to `x`.
fn cumulative(times: &[f64], values: &[f64], prefix: &[f64], x: f64) -> f64 {
    let i = match times.partition_point(|&t| t <= x) {
        0 => 0,
        k => (k - 1).min(times.len() - 2),
    };
    let h = times[i + 1] - times[i];
    let s = x - times[i];
    let slope = (values[i + 1] - values[i]) / h;
    prefix[i] + s * values[i] + 0.5 * slope * s * s
}

/// Centered moving average over a window of exact length `window`,
/// computed from the linear interpolant. Returns `(t, mean)` only where the
/// whole window lies inside the sampled range.
pub fn moving_average(times: &[f64], values: &[f64], window: f64) -> Vec<(f64, f64)> {
    assert_eq!(times.len(), values.len());
    if times.len() < 2 {
        return Vec::new();
    }
    let mut prefix = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    prefix.push(0.0);
    for i in 1..times.len() {
        acc += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
        prefix.push(acc);
    }
    let (lo, hi) = (times[0], times[times.len() - 1]);
    let half = 0.5 * window;
    times
        .iter()
        .filter(|&&t| t - half >= lo - 1e-12 && t + half <= hi + 1e-12)
        .map(|&t| {
            let a = (t - half).max(lo);
            let b = (t + half).min(hi);
            let integral =
                cumulative(times, values, &prefix, b) - cumulative(times, values, &prefix, a);
            (t, integral / window)
        })
        .collect()
}

/// Amplitude of the `exp(i omega t)` component, `(2/T) |int x(t) e^{-i omega t} dt|`
/// by the trapezoid rule, optionally under a Hann window (rescaled so a pure
/// sinusoid of amplitude `A` still reads `A`).
pub fn fourier_amplitude(times: &[f64], values: &[f64], omega: f64, hann: bool) -> f64 {
    let n = times.len();
    if n < 2 {
        return 0.0;
    }
    let t0 = times[0];
    let span = times[n - 1] - t0;
    let weight = |t: f64| {
        if hann {
            2.0 * (PI * (t - t0) / span).sin().powi(2)
        } else {
            1.0
        }
    };
    let mut sum = C64::new(0.0, 0.0);
    for i in 0..n {
        let h = match i {
            0 => 0.5 * (times[1] - times[0]),
            k if k == n - 1 => 0.5 * (times[k] - times[k - 1]),
            k => 0.5 * (times[k + 1] - times[k - 1]),
        };
        let t = times[i];
        sum += C64::from_polar(h * weight(t) * values[i], -omega * t);
    }
    2.0 * sum.norm() / span
}

/// Angular frequency with the largest Hann-windowed amplitude in `[lo, hi]`,
/// scanned with step `resolution`.
pub fn dominant_frequency(times: &[f64], values: &[f64], lo: f64, hi: f64, resolution: f64) -> f64 {
    let steps = ((hi - lo) / resolution).ceil() as usize;
    (0..=steps)
        .map(|k| lo + k as f64 * resolution)
        .map(|w| (w, fourier_amplitude(times, values, w, true)))
        .fold((lo, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
        .0
}

/// Removes the slow part of a curve: `x(t) - moving_average(x)(t)`.
pub fn high_pass(times: &[f64], values: &[f64], window: f64) -> (Vec<f64>, Vec<f64>) {
    let avg = moving_average(times, values, window);
    let mut t_out = Vec::with_capacity(avg.len());
    let mut v_out = Vec::with_capacity(avg.len());
    let mut j = 0;
    for (t, m) in avg {
        while times[j] < t {
            j += 1;
        }
        t_out.push(t);
        v_out.push(values[j] - m);
    }
    (t_out, v_out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(n: usize, h: f64) -> Vec<f64> {
        (0..n).map(|k| k as f64 * h).collect()
    }

    #[test]
    fn moving_average_removes_full_periods() {
        let t = grid(2001, 0.01);
        let w = 4.0;
        let period = 2.0 * PI / w;
        let v: Vec<f64> = t.iter().map(|&t| 0.3 * t + (w * t).sin()).collect();
        let avg = moving_average(&t, &v, period);
        assert!(!avg.is_empty());
        for (t, m) in avg {
            // linear part passes, the sinusoid averages to the interpolation error
            assert_abs_diff_eq!(m, 0.3 * t, epsilon = 2e-5);
        }
    }

    #[test]
    fn moving_average_window_bounds() {
        let t = grid(101, 0.1);
        let v = vec![1.0; 101];
        let avg = moving_average(&t, &v, 2.0);
        assert_abs_diff_eq!(avg[0].0, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(avg.last().unwrap().0, 9.0, epsilon = 1e-12);
        assert!(avg.iter().all(|&(_, m)| (m - 1.0).abs() < 1e-12));
    }

    #[test]
    fn fourier_amplitude_of_sinusoid() {
        let t = grid(20_001, 0.001);
        let v: Vec<f64> = t.iter().map(|&t| 0.02 * (4.0 * t + 0.3).cos()).collect();
        assert_abs_diff_eq!(fourier_amplitude(&t, &v, 4.0, true), 0.02, epsilon = 2e-4);
        assert!(fourier_amplitude(&t, &v, 2.0, true) < 1e-4);
        let f = dominant_frequency(&t, &v, 0.5, 10.0, 0.01);
        assert_abs_diff_eq!(f, 4.0, epsilon = 0.02);
    }
}
