//! Visibility from Fourier-plane two-beam profiles.
//!
//! Model: A·exp(−(y − y0)²/w²)·[1 + V·cos(2πy/Λ + φ)] + B, fitted in the
//! Cartesian form E(y)·(A + P·cos θ + Q·sin θ) + B with θ = 2πy/Λ so that
//! V → 0 stays well conditioned.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rustfft::{num_complex::Complex, FftPlanner};

use super::lm::{self, CurveModel, LmConfig};
use crate::error::{Error, Result};
use crate::optics::{ModeGeometry, Profile};

/// Expected fringe period and envelope width for one beam pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeHint {
    pub period: f64,
    pub envelope_width: f64,
}

impl FringeHint {
    pub fn new(geom: &ModeGeometry, pair: (usize, usize)) -> Self {
        Self { period: geom.fringe_period(pair), envelope_width: geom.envelope_width() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FringeFlags {
    /// No dominant spatial frequency was found; the visibility is a V≈0 candidate.
    pub no_fringe: bool,
    /// The raw fitted visibility exceeded 1 and was clamped.
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringeFitResult {
    pub amplitude: f64,
    pub envelope_center: f64,
    pub envelope_width: f64,
    /// Infinite when no modulation was fitted.
    pub fringe_period: f64,
    pub visibility: f64,
    pub phase: f64,
    pub offset: f64,
    pub residual_rms: f64,
    pub flags: FringeFlags,
}

/// [A, y0, w, P, Q, Λ, B]
struct FringeModel;

impl CurveModel for FringeModel {
    fn n_params(&self) -> usize {
        7
    }

    fn eval(&self, p: &[f64], y: f64, grad: &mut [f64]) -> f64 {
        let (a, y0, w, pc, qs, period, b) = (p[0], p[1], p[2], p[3], p[4], p[5], p[6]);
        let dy = y - y0;
        let e = (-(dy * dy) / (w * w)).exp();
        let theta = 2.0 * PI * y / period;
        let (s, c) = theta.sin_cos();
        let inner = a + pc * c + qs * s;
        grad[0] = e;
        grad[1] = e * inner * 2.0 * dy / (w * w);
        grad[2] = e * inner * 2.0 * dy * dy / (w * w * w);
        grad[3] = e * c;
        grad[4] = e * s;
        grad[5] = e * (-pc * s + qs * c) * (-2.0 * PI * y / (period * period));
        grad[6] = 1.0;
        e * inner + b
    }
}

fn is_uniform(positions: &[f64]) -> bool {
    let n = positions.len();
    let step = (positions[n - 1] - positions[0]) / (n - 1) as f64;
    step > 0.0 && positions.windows(2).all(|w| ((w[1] - w[0]) - step).abs() <= 1e-6 * step)
}

/// Weighted centre and 1/e half-width of the profile.
fn moments(profile: &Profile) -> (f64, f64) {
    let total = profile.total();
    let mean = profile.positions.iter().zip(&profile.values).map(|(y, v)| y * v).sum::<f64>() / total;
    let var =
        profile.positions.iter().zip(&profile.values).map(|(y, v)| (y - mean) * (y - mean) * v).sum::<f64>() / total;
    (mean, (2.0 * var).sqrt())
}

/// Linear amplitudes [A, P, Q, B] for a fixed envelope and period.
fn linear_init(profile: &Profile, y0: f64, w: f64, period: Option<f64>) -> Option<[f64; 4]> {
    let ys = &profile.positions;
    let cols = if period.is_some() { 4 } else { 2 };
    let design = DMatrix::from_fn(ys.len(), cols, |r, c| {
        let y = ys[r];
        let e = (-((y - y0) / w).powi(2)).exp();
        match (c, period) {
            (0, _) => e,
            (1, None) => 1.0,
            (1, Some(l)) => e * (2.0 * PI * y / l).cos(),
            (2, Some(l)) => e * (2.0 * PI * y / l).sin(),
            _ => 1.0,
        }
    });
    let sol = lm::linear_lstsq(&design, &profile.values)?;
    Some(if period.is_some() { [sol[0], sol[1], sol[2], sol[3]] } else { [sol[0], 0.0, 0.0, sol[1]] })
}

/// Dominant spatial period of the profile after removing a smooth envelope.
fn dominant_period(profile: &Profile, y0: f64, w: f64) -> Option<f64> {
    let n = profile.len();
    let step = profile.spacing();
    let [a, _, _, b] = linear_init(profile, y0, w, None)?;
    let residual: Vec<f64> = profile
        .positions
        .iter()
        .zip(&profile.values)
        .map(|(&y, &v)| v - a * (-((y - y0) / w).powi(2)).exp() - b)
        .collect();

    let size = (8 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = residual.iter().map(|&r| Complex::new(r, 0.0)).collect();
    buf.resize(size, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(size).process(&mut buf);
    let mag: Vec<f64> = buf[..size / 2].iter().map(|z| z.norm()).collect();

    // frequencies below 1/w belong to the envelope
    let k_min = ((size as f64 * step / w).ceil() as usize).max(1);
    if k_min + 2 >= mag.len() {
        return None;
    }
    let (k_peak, peak) = (k_min..mag.len() - 1).map(|k| (k, mag[k])).max_by(|a, b| a.1.total_cmp(&b.1))?;

    let mut tail: Vec<f64> = mag[mag.len() / 2..].to_vec();
    tail.sort_by(f64::total_cmp);
    let floor = tail[tail.len() / 2];
    if peak < 2e-3 * profile.total() || peak < 6.0 * floor || k_peak <= k_min {
        return None;
    }
    // parabolic refinement around the peak bin
    let (l, c, r) = (mag[k_peak - 1], mag[k_peak], mag[k_peak + 1]);
    let denom = l - 2.0 * c + r;
    let shift = if denom != 0.0 { (0.5 * (l - r) / denom).clamp(-0.5, 0.5) } else { 0.0 };
    let freq = (k_peak as f64 + shift) / (size as f64 * step);
    Some(1.0 / freq)
}

/// Fits the two-beam fringe model to a Fourier-plane profile.
///
/// The starting period is the dominant spatial frequency of the profile; the
/// envelope starts from the profile's second moment. When no dominant
/// frequency is found the result carries `no_fringe`: with a hint the
/// visibility is fitted at the hinted period, otherwise it is reported as 0.
pub fn fit_fringe(profile: &Profile, hint: Option<&FringeHint>) -> Result<FringeFitResult> {
    if profile.len() < 8 {
        return Err(Error::InputContract(format!("profile has only {} samples", profile.len())));
    }
    if profile.total() <= 0.0 {
        return Err(Error::Degenerate("profile carries no counts".into()));
    }
    let uniform = is_uniform(&profile.positions);
    if !uniform && hint.is_none() {
        return Err(Error::InputContract("spectral period detection needs uniformly spaced positions".into()));
    }
    let (y0, w_moment) = moments(profile);
    let w0 = w_moment.max(2.0 * profile.spacing());

    let detected = if uniform { dominant_period(profile, y0, w0) } else { None };
    let detected = match (detected, hint) {
        (Some(l), Some(h)) if (l - h.period).abs() > 0.25 * h.period => None,
        (d, _) => d,
    };

    let cfg = LmConfig::default();
    let ys = &profile.positions;
    let vs = &profile.values;
    let (period, free, no_fringe) = match (detected, hint) {
        (Some(l), _) => (Some(l), [true; 7], false),
        (None, Some(h)) => (Some(h.period), [true, true, true, true, true, false, true], true),
        (None, None) => (None, [true, true, true, false, false, false, true], true),
    };
    let [a, pc, qs, b] = linear_init(profile, y0, w0, period)
        .ok_or_else(|| Error::Degenerate("singular fringe amplitude system".into()))?;
    let start = [a, y0, w0, pc, qs, period.unwrap_or(1.0), b];
    let rep = lm::fit(&FringeModel, ys, vs, &start, Some(&free), &cfg)?;
    let p = &rep.params;

    let (amplitude, mut pc, mut qs, mut period_fit) = (p[0], p[3], p[4], p[5]);
    if amplitude <= 0.0 {
        return Err(Error::Degenerate(format!("fitted envelope amplitude {amplitude} is not positive")));
    }
    if period_fit < 0.0 {
        period_fit = -period_fit;
        qs = -qs;
    }
    if period.is_none() {
        pc = 0.0;
        qs = 0.0;
        period_fit = f64::INFINITY;
    }
    let raw_v = pc.hypot(qs) / amplitude;
    let clamped = raw_v > 1.0;
    Ok(FringeFitResult {
        amplitude,
        envelope_center: p[1],
        envelope_width: p[2].abs(),
        fringe_period: period_fit,
        visibility: raw_v.min(1.0),
        phase: (-qs).atan2(pc),
        offset: p[6],
        residual_rms: rep.residual_rms,
        flags: FringeFlags { no_fringe, clamped },
    })
}
