//! Bandwidth-limited detection, conversion to optical power and the
//! inference of a wavefront speed-difference bound from recorded power.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral::TimeGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Non-overlapping windows.
    #[default]
    Tumbling,
    /// Centred moving mean evaluated at every sample.
    Sliding,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorModel {
    /// Hz
    pub bandwidth: f64,
    /// Boxcar span, s.
    pub window: f64,
    /// Optical power corresponding to unit input intensity, W.
    pub probe_power: f64,
    /// Recorded power above which a delay is declared, W.
    pub threshold_power: f64,
    /// Time at which a window boundary is placed, s.
    #[serde(default)]
    pub window_offset: f64,
    #[serde(default)]
    pub averaging: Averaging,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self {
            bandwidth: 5.0e9,
            window: 0.2e-9,
            probe_power: 1.0e-3,
            threshold_power: 2.5e-12,
            window_offset: 0.0,
            averaging: Averaging::Tumbling,
        }
    }
}

impl DetectorModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(invalid(
                "bandwidth",
                format!("must be positive, got {}", self.bandwidth),
            ));
        }
        if !(self.window > 0.0 && self.window.is_finite()) {
            return Err(invalid(
                "window",
                format!("must be positive, got {}", self.window),
            ));
        }
        let ratio = self.window * self.bandwidth;
        if !(0.5..=2.0).contains(&ratio) {
            return Err(invalid(
                "window",
                format!("window·bandwidth = {ratio} is not within a factor 2 of 1"),
            ));
        }
        if !(self.probe_power > 0.0 && self.probe_power.is_finite()) {
            return Err(invalid(
                "probe_power",
                format!("must be positive, got {}", self.probe_power),
            ));
        }
        if !(self.threshold_power >= 0.0 && self.threshold_power.is_finite()) {
            return Err(invalid("threshold_power", "must be non-negative"));
        }
        if !self.window_offset.is_finite() {
            return Err(invalid("window_offset", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AveragingWindow {
    pub first: usize,
    pub count: usize,
    pub t_start: f64,
    pub t_center: f64,
    pub value: f64,
}

/// Detector output: the window list plus the value seen at every raw sample.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedSeries {
    pub windows: Vec<AveragingWindow>,
    pub per_sample: Vec<f64>,
}

impl AveragedSeries {
    /// Largest value among windows starting in `[from, to)`.
    pub fn max_in(&self, from: f64, to: f64) -> f64 {
        self.windows
            .iter()
            .filter(|w| w.t_start >= from && w.t_start < to)
            .map(|w| w.value)
            .fold(0.0, f64::max)
    }

    pub fn max(&self) -> f64 {
        self.windows.iter().map(|w| w.value).fold(0.0, f64::max)
    }
}

fn window_samples(grid: &TimeGrid, det: &DetectorModel) -> Result<usize> {
    if det.window < 2.0 * grid.dt() {
        return Err(invalid(
            "window",
            format!(
                "{:e} s is shorter than two samples ({:e} s)",
                det.window,
                2.0 * grid.dt()
            ),
        ));
    }
    Ok((det.window / grid.dt()).round() as usize)
}

pub fn boxcar_average(
    series: &[f64],
    grid: &TimeGrid,
    det: &DetectorModel,
) -> Result<AveragedSeries> {
    if series.len() != grid.len() {
        return Err(crate::Error::LengthMismatch {
            expected: grid.len(),
            actual: series.len(),
        });
    }
    let m = window_samples(grid, det)?;
    match det.averaging {
        Averaging::Tumbling => Ok(tumbling(series, grid, det, m)),
        Averaging::Sliding => Ok(sliding(series, grid, m)),
    }
}

fn tumbling(series: &[f64], grid: &TimeGrid, det: &DetectorModel, m: usize) -> AveragedSeries {
    let n = series.len();
    let anchor = ((det.window_offset - grid.t_start()) / grid.dt()).round() as i64;
    let phase = anchor.rem_euclid(m as i64) as usize;
    let mut bounds = Vec::with_capacity(n / m + 2);
    if phase > 0 {
        bounds.push((0, phase));
    }
    let mut first = phase;
    while first < n {
        let count = m.min(n - first);
        bounds.push((first, count));
        first += count;
    }

    let mut per_sample = vec![0.0; n];
    let windows = bounds
        .into_iter()
        .map(|(first, count)| {
            let slice = &series[first..first + count];
            let value = slice.iter().sum::<f64>() / count as f64;
            per_sample[first..first + count].fill(value);
            AveragingWindow {
                first,
                count,
                t_start: grid.time(first),
                t_center: grid.time(first) + (count - 1) as f64 * grid.dt() / 2.0,
                value,
            }
        })
        .collect();
    AveragedSeries {
        windows,
        per_sample,
    }
}

fn sliding(series: &[f64], grid: &TimeGrid, m: usize) -> AveragedSeries {
    let n = series.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for v in series {
        acc += v;
        prefix.push(acc);
    }
    let half = m / 2;
    let mut per_sample = Vec::with_capacity(n);
    let windows = (0..n)
        .map(|j| {
            let lo = j.saturating_sub(half);
            let hi = (lo + m).min(n);
            let value = (prefix[hi] - prefix[lo]) / (hi - lo) as f64;
            per_sample.push(value);
            AveragingWindow {
                first: lo,
                count: hi - lo,
                t_start: grid.time(j),
                t_center: grid.time(j),
                value,
            }
        })
        .collect();
    AveragedSeries {
        windows,
        per_sample,
    }
}

/// Dimensionless intensity (input normalised to one) to watts.
pub fn to_power(intensity: f64, det: &DetectorModel) -> f64 {
    intensity * det.probe_power
}

/// Transit time `z1 n0 / c` through the first crystal, with `n0 = k0 c / ω31`.
pub fn propagation_time(z1: f64, k0: f64, omega31: f64) -> f64 {
    z1 * k0 / omega31
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub max_recorded_power: f64,
    pub threshold_power: f64,
    pub t1: f64,
    pub tau_d_inferred_floor: f64,
    pub delta_v_over_v0: f64,
    pub exceeds_threshold: bool,
}

/// `Δv/v0 ≃ τd/t1` for the reference delay the recorded power resolves.
pub fn speed_bound(
    max_power: f64,
    det: &DetectorModel,
    t1: f64,
    tau_d_ref: f64,
) -> Result<BoundReport> {
    if !(t1 > 0.0 && t1.is_finite()) {
        return Err(invalid("t1", format!("must be positive, got {t1}")));
    }
    if !max_power.is_finite() || !tau_d_ref.is_finite() {
        return Err(invalid(
            "max_power",
            "power and reference delay must be finite",
        ));
    }
    let floor = tau_d_ref.abs();
    Ok(BoundReport {
        max_recorded_power: max_power,
        threshold_power: det.threshold_power,
        t1,
        tau_d_inferred_floor: floor,
        delta_v_over_v0: floor / t1,
        exceeds_threshold: max_power > det.threshold_power,
    })
}

/// Smallest non-zero calibrated `|τd|` whose simulated power reaches
/// `recorded`. Calibration entries are `(τd, max power)`.
pub fn reference_delay(calibration: &[(f64, f64)], recorded: f64) -> Option<f64> {
    calibration
        .iter()
        .filter(|(tau, power)| *tau != 0.0 && *power >= recorded)
        .map(|(tau, _)| tau.abs())
        .min_by(f64::total_cmp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid(n: usize) -> TimeGrid {
        TimeGrid::new(-(n as f64 / 8.0) * 1e-13, 1e-13, n).unwrap()
    }

    #[test]
    fn constant_series_is_unchanged() {
        let g = grid(1 << 14);
        let avg = boxcar_average(&vec![0.37; 1 << 14], &g, &DetectorModel::default()).unwrap();
        assert!(avg.windows.iter().all(|w| (w.value - 0.37).abs() < 1e-14));
        assert!(avg.per_sample.iter().all(|v| (v - 0.37).abs() < 1e-14));
    }

    #[test]
    fn windows_align_to_offset() {
        let g = grid(1 << 14);
        let avg = boxcar_average(&vec![1.0; 1 << 14], &g, &DetectorModel::default()).unwrap();
        assert!(avg
            .windows
            .iter()
            .any(|w| w.t_start == 0.0 && w.count == 2000));
        let det = DetectorModel {
            window_offset: 0.05e-9,
            ..Default::default()
        };
        let avg = boxcar_average(&vec![1.0; 1 << 14], &g, &det).unwrap();
        assert!(avg
            .windows
            .iter()
            .any(|w| (w.t_start - 0.05e-9).abs() < 1e-20));
    }

    #[test]
    fn impulse_is_diluted() {
        let g = grid(1 << 14);
        let mut x = vec![0.0; 1 << 14];
        let j = g.index_of(0.1e-9);
        x[j] = 5.0;
        let avg = boxcar_average(&x, &g, &DetectorModel::default()).unwrap();
        let w = avg
            .windows
            .iter()
            .find(|w| w.first <= j && j < w.first + w.count)
            .unwrap();
        assert_eq!(w.count, 2000);
        assert_relative_eq!(w.value, 5.0 / 2000.0, max_relative = 1e-15);
        assert_relative_eq!(w.t_center, 0.5 * 1999.0 * 1e-13, max_relative = 1e-9);
    }

    #[test]
    fn window_shorter_than_two_samples_rejected() {
        let g = TimeGrid::new(0.0, 1.5e-10, 64).unwrap();
        let det = DetectorModel::default();
        assert!(boxcar_average(&vec![0.0; 64], &g, &det).is_err());
    }

    #[test]
    fn sliding_mean_smooths_step() {
        let g = grid(1 << 14);
        let x: Vec<f64> = g
            .times()
            .map(|t| if t >= 0.0 { 1.0 } else { 0.0 })
            .collect();
        let det = DetectorModel {
            averaging: Averaging::Sliding,
            ..Default::default()
        };
        let avg = boxcar_average(&x, &g, &det).unwrap();
        assert_relative_eq!(avg.per_sample[g.index_of(0.0)], 0.5, epsilon = 1e-3);
        assert_eq!(avg.per_sample[g.index_of(-0.2e-9)], 0.0);
        assert_eq!(avg.per_sample[g.index_of(0.2e-9)], 1.0);
    }

    #[test]
    fn power_conversion() {
        let det = DetectorModel::default();
        assert_relative_eq!(
            to_power(2.5e-9, &det),
            2.5e-12,
            max_relative = 4.0 * f64::EPSILON
        );
        assert_eq!(to_power(0.0, &det), 0.0);
        assert_relative_eq!(to_power(6.6e-6, &det), 6.6e-9, max_relative = 1e-15);
    }

    #[test]
    fn bound_from_forty_femtoseconds() {
        let det = DetectorModel::default();
        let r = speed_bound(3.0e-12, &det, 400e-12, 40e-15).unwrap();
        assert_relative_eq!(r.delta_v_over_v0, 1.0e-4, max_relative = 1e-12);
        assert!(r.exceeds_threshold);
        assert_eq!(r.delta_v_over_v0 * r.t1, r.tau_d_inferred_floor);
        let zero = speed_bound(0.0, &det, 400e-12, 0.0).unwrap();
        assert_eq!(zero.delta_v_over_v0, 0.0);
        assert!(!zero.exceeds_threshold);
        assert!(speed_bound(0.0, &det, 0.0, 1e-15).is_err());
    }

    #[test]
    fn transit_time_for_long_crystal() {
        let w = crate::media::carrier_angular_frequency(crate::media::TRANSITION_WAVELENGTH);
        let t1 = propagation_time(0.055, crate::media::K0, w);
        assert_relative_eq!(t1, 3.98e-10, max_relative = 2e-3);
    }

    #[test]
    fn reference_delay_picks_smallest_resolving() {
        let cal = [
            (0.0, 1e-13),
            (-40e-15, 2.5e-12),
            (40e-15, 5.9e-13),
            (4e-12, 6.6e-9),
        ];
        assert_eq!(reference_delay(&cal, 1e-12), Some(40e-15));
        assert_eq!(reference_delay(&cal, 3e-12), Some(4e-12));
        assert_eq!(reference_delay(&cal, 1e-8), None);
    }

    #[test]
    fn detector_validation() {
        assert!(DetectorModel::default().validate().is_ok());
        assert!(DetectorModel {
            window: 1e-9,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(DetectorModel {
            probe_power: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    proptest! {
        #[test]
        fn averaging_preserves_mean_and_never_raises_max(
            x in prop::collection::vec(0.0f64..1.0, 4096),
            offset in -1e-9f64..1e-9,
        ) {
            let g = grid(4096);
            let det = DetectorModel { window: 0.2e-9, bandwidth: 5e9, window_offset: offset, ..Default::default() };
            let avg = boxcar_average(&x, &g, &det).unwrap();
            let raw_mean = x.iter().sum::<f64>() / x.len() as f64;
            let weighted = avg.windows.iter().map(|w| w.value * w.count as f64).sum::<f64>() / x.len() as f64;
            prop_assert!((raw_mean - weighted).abs() <= 1e-12 * raw_mean.max(1e-300));
            let raw_max = x.iter().cloned().fold(0.0, f64::max);
            prop_assert!(avg.max() <= raw_max);
        }
    }
}
