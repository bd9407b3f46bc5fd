//! Populations from image-plane profiles: three-Gaussian fit plus a constant background.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::lm::{self, CurveModel, LmConfig};
use crate::error::{Error, Result};
use crate::optics::{ModeGeometry, Profile};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPeak {
    pub center: f64,
    /// σ in exp(−(y − c)²/σ²).
    pub width: f64,
    /// a·σ·√π, clamped at zero.
    pub area: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakFitResult {
    pub modes: [GaussianPeak; 3],
    /// Fitted constant background per sample.
    pub offset: f64,
    pub residual_rms: f64,
    /// Areas normalized to unit sum, (ρ11, ρ22, ρ33).
    pub populations: [f64; 3],
}

fn gauss(y: f64, c: f64, w: f64) -> f64 {
    let u = (y - c) / w;
    (-u * u).exp()
}

/// Independent peaks: [a1, c1, w1, a2, c2, w2, a3, c3, w3, B].
struct ThreeGaussians;

impl CurveModel for ThreeGaussians {
    fn n_params(&self) -> usize {
        10
    }

    fn eval(&self, p: &[f64], y: f64, grad: &mut [f64]) -> f64 {
        let mut f = p[9];
        for k in 0..3 {
            let (a, c, w) = (p[3 * k], p[3 * k + 1], p[3 * k + 2]);
            let g = gauss(y, c, w);
            let dy = y - c;
            grad[3 * k] = g;
            grad[3 * k + 1] = a * g * 2.0 * dy / (w * w);
            grad[3 * k + 2] = a * g * 2.0 * dy * dy / (w * w * w);
            f += a * g;
        }
        grad[9] = 1.0;
        f
    }
}

/// Equally spaced peaks of common width: [a1, a2, a3, c1, spacing, w, B].
struct LadderGaussians;

impl CurveModel for LadderGaussians {
    fn n_params(&self) -> usize {
        7
    }

    fn eval(&self, p: &[f64], y: f64, grad: &mut [f64]) -> f64 {
        let (c1, s, w) = (p[3], p[4], p[5]);
        let mut f = p[6];
        grad[3] = 0.0;
        grad[4] = 0.0;
        grad[5] = 0.0;
        for k in 0..3 {
            let c = c1 + k as f64 * s;
            let g = gauss(y, c, w);
            let dy = y - c;
            let dc = p[k] * g * 2.0 * dy / (w * w);
            grad[k] = g;
            grad[3] += dc;
            grad[4] += dc * k as f64;
            grad[5] += p[k] * g * 2.0 * dy * dy / (w * w * w);
            f += p[k] * g;
        }
        grad[6] = 1.0;
        f
    }
}

/// Box-smoothed copy of `v` with half-window `h`.
fn smooth(v: &[f64], h: usize) -> Vec<f64> {
    (0..v.len())
        .map(|i| {
            let lo = i.saturating_sub(h);
            let hi = (i + h + 1).min(v.len());
            v[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Indices of the local maxima of `v` whose prominence exceeds `min_prominence`.
fn prominent_maxima(v: &[f64], min_prominence: f64) -> Vec<usize> {
    let n = v.len();
    let mut out = Vec::new();
    for i in 0..n {
        let left_ok = i == 0 || v[i] > v[i - 1];
        let right_ok = i + 1 == n || v[i] >= v[i + 1];
        if !(left_ok && right_ok) {
            continue;
        }
        // lowest point on each side before reaching higher ground
        let mut left_min = v[i];
        let mut j = i;
        while j > 0 && v[j - 1] <= v[i] {
            j -= 1;
            left_min = left_min.min(v[j]);
        }
        let left_bounded = j > 0;
        let mut right_min = v[i];
        let mut j = i;
        while j + 1 < n && v[j + 1] <= v[i] {
            j += 1;
            right_min = right_min.min(v[j]);
        }
        let right_bounded = j + 1 < n;
        let base = match (left_bounded, right_bounded) {
            (true, true) => left_min.max(right_min),
            (true, false) => left_min,
            (false, true) => right_min,
            (false, false) => left_min.min(right_min),
        };
        if v[i] - base >= min_prominence {
            out.push(i);
        }
    }
    out
}

/// Width σ from the half-maximum crossing around sample `i`, or `None`.
fn width_at(y: &[f64], v: &[f64], i: usize, baseline: f64) -> Option<f64> {
    let half = baseline + (v[i] - baseline) / 2.0;
    let mut j = i;
    while j + 1 < v.len() && v[j + 1] > half {
        j += 1;
    }
    if j + 1 >= v.len() {
        return None;
    }
    let t = (v[j] - half) / (v[j] - v[j + 1]);
    let hwhm = y[j] + t * (y[j + 1] - y[j]) - y[i];
    (hwhm > 0.0).then(|| hwhm / 2f64.ln().sqrt())
}

fn initial_geometry(profile: &Profile, hint: Option<&ModeGeometry>) -> Result<([f64; 3], f64)> {
    if let Some(g) = hint {
        return Ok(([g.mode_center(1), g.mode_center(2), g.mode_center(3)], g.sigma_g));
    }
    let values = &profile.values;
    let smoothed = smooth(values, 2);
    let top = smoothed.iter().cloned().fold(0.0, f64::max);
    let baseline = smoothed.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut peaks = prominent_maxima(&smoothed, 0.05 * (top - baseline));
    if peaks.len() < 3 {
        return Err(Error::FitDegeneracy { found: peaks.len() });
    }
    peaks.sort_by(|&a, &b| smoothed[b].total_cmp(&smoothed[a]));
    peaks.truncate(3);
    let tallest = peaks[0];
    peaks.sort_unstable();
    let centers = [peaks[0], peaks[1], peaks[2]].map(|i| profile.positions[i]);
    let spacing = (centers[2] - centers[0]) / 2.0;
    let width =
        width_at(&profile.positions, values, tallest, baseline).filter(|w| *w < spacing).unwrap_or(spacing / 4.0);
    Ok((centers, width))
}

/// Fits three Gaussians plus a constant to an image-plane profile.
///
/// Centres and width are seeded from `hint` when given, otherwise from the
/// three most prominent local maxima. A common-width, equally spaced fit runs
/// first; each peak carrying at least 5% of the tallest amplitude then gets
/// its own centre and width.
pub fn fit_populations(profile: &Profile, hint: Option<&ModeGeometry>) -> Result<PeakFitResult> {
    if profile.len() < 8 {
        return Err(Error::InputContract(format!("profile has only {} samples", profile.len())));
    }
    if profile.total() <= 0.0 {
        return Err(Error::FitDegeneracy { found: 0 });
    }
    let (centers, width) = initial_geometry(profile, hint)?;
    let ys = &profile.positions;
    let vs = &profile.values;

    // amplitudes and background are linear given the geometry
    let design = DMatrix::from_fn(ys.len(), 4, |r, c| if c < 3 { gauss(ys[r], centers[c], width) } else { 1.0 });
    let lin = lm::linear_lstsq(&design, vs).ok_or_else(|| Error::Degenerate("singular amplitude system".into()))?;
    let spacing = (centers[2] - centers[0]) / 2.0;
    let ladder0 = [lin[0], lin[1], lin[2], centers[0], spacing, width, lin[3]];
    let cfg = LmConfig::default();
    let ladder = lm::fit(&LadderGaussians, ys, vs, &ladder0, None, &cfg)?;
    let lp = &ladder.params;

    let mut full0 = [0.0; 10];
    let mut free = [true; 10];
    let tallest = lp[..3].iter().fold(0.0f64, |m, a| m.max(a.abs()));
    for k in 0..3 {
        full0[3 * k] = lp[k];
        full0[3 * k + 1] = lp[3] + k as f64 * lp[4];
        full0[3 * k + 2] = lp[5].abs();
        if lp[k].abs() < 0.05 * tallest {
            free[3 * k + 1] = false;
            free[3 * k + 2] = false;
        }
    }
    full0[9] = lp[6];
    let full = lm::fit(&ThreeGaussians, ys, vs, &full0, Some(&free), &cfg)?;
    let p = &full.params;

    let modes: [GaussianPeak; 3] = std::array::from_fn(|k| {
        let (a, c, w) = (p[3 * k], p[3 * k + 1], p[3 * k + 2].abs());
        GaussianPeak { center: c, width: w, area: (a * w * PI.sqrt()).max(0.0) }
    });
    let total: f64 = modes.iter().map(|m| m.area).sum();
    if total <= 0.0 {
        return Err(Error::FitDegeneracy { found: 0 });
    }
    let populations = modes.map(|m| m.area / total);
    Ok(PeakFitResult { modes, offset: p[9], residual_rms: full.residual_rms, populations })
}
