use super::detector::DetectorFrame;
use crate::error::{Error, Result};

/// Axis a profile is indexed along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileAxis {
    /// One value per row (counts summed across columns): a profile along world `y`.
    Rows,
    /// One value per column: a profile along world `x`.
    Cols,
}

/// Sampled 1D profile: positions in length units, nonnegative values.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub positions: Vec<f64>,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn new(positions: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if positions.len() != values.len() {
            return Err(Error::InputContract("positions and values differ in length".into()));
        }
        if positions.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InputContract("profile entries must be finite".into()));
        }
        if values.iter().any(|&v| v < 0.0) {
            return Err(Error::InputContract("profile values must be nonnegative".into()));
        }
        Ok(Self { positions, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Mean spacing of the positions.
    pub fn spacing(&self) -> f64 {
        match self.positions.len() {
            0 | 1 => 1.0,
            n => (self.positions[n - 1] - self.positions[0]) / (n - 1) as f64,
        }
    }
}

/// Integrated transverse optical profile of a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Itop {
    /// Values normalized to unit sum, or all zero for an empty frame.
    pub profile: Profile,
    /// Set when the frame had no counts.
    pub empty: bool,
}

/// Sums counts along the other axis and normalizes to unit total.
///
/// When the detector is rotated, pixels are binned by world coordinate and
/// the profile is the along-axis factor of a separable fit, so uneven
/// pixel coverage of the bins does not leak into the profile.
pub fn itop(frame: &DetectorFrame, axis: ProfileAxis) -> Itop {
    let spec = frame.spec();
    let (positions, mut values) =
        if spec.axis_rotation == 0.0 { aligned_sums(frame, axis) } else { rotated_sums(frame, axis) };
    let total: f64 = values.iter().sum();
    let empty = total <= 0.0;
    if !empty {
        values.iter_mut().for_each(|v| *v /= total);
    }
    Itop { profile: Profile { positions, values }, empty }
}

fn aligned_sums(frame: &DetectorFrame, axis: ProfileAxis) -> (Vec<f64>, Vec<f64>) {
    let spec = frame.spec();
    let (rows, cols) = (spec.rows, spec.cols);
    match axis {
        ProfileAxis::Rows => (
            (0..rows).map(|r| spec.pixel_center(r, 0).1).collect(),
            (0..rows).map(|r| (0..cols).map(|c| frame.get(r, c)).sum()).collect(),
        ),
        ProfileAxis::Cols => (
            (0..cols).map(|c| spec.pixel_center(0, c).0).collect(),
            (0..cols).map(|c| (0..rows).map(|r| frame.get(r, c)).sum()).collect(),
        ),
    }
}

fn rotated_sums(frame: &DetectorFrame, axis: ProfileAxis) -> (Vec<f64>, Vec<f64>) {
    let spec = frame.spec();
    // (along, across) world coordinates of every pixel centre.
    let coords: Vec<(f64, f64)> = (0..spec.rows)
        .flat_map(|r| (0..spec.cols).map(move |c| (r, c)))
        .map(|(r, c)| {
            let (u, v) = spec.pixel_center(r, c);
            let (x, y) = spec.to_world(u, v);
            match axis {
                ProfileAxis::Rows => (y, x),
                ProfileAxis::Cols => (x, y),
            }
        })
        .collect();
    let range = |f: fn(&(f64, f64)) -> f64| {
        coords.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), w| (lo.min(w), hi.max(w)))
    };
    let (lo, hi) = range(|p| p.0);
    let (tlo, thi) = range(|p| p.1);
    let bin = |w: f64, lo: f64, width: f64, n: usize| (((w - lo) / width).round() as usize).min(n - 1);

    // Finest bin width that leaves no profile bin without pixels.
    let mut width = spec.pitch;
    let mut along = Vec::new();
    for k in [8.0, 4.0, 2.0, 1.0] {
        width = spec.pitch / k;
        let n = ((hi - lo) / width).round() as usize + 1;
        along = coords.iter().map(|p| bin(p.0, lo, width, n)).collect();
        let mut hit = vec![false; n];
        along.iter().for_each(|&b| hit[b] = true);
        if hit.iter().all(|&h| h) {
            break;
        }
    }
    let n = ((hi - lo) / width).round() as usize + 1;
    let nt = ((thi - tlo) / width).round() as usize + 1;
    let across: Vec<usize> = coords.iter().map(|p| bin(p.1, tlo, width, nt)).collect();
    let counts: Vec<f64> = (0..spec.rows).flat_map(|r| (0..spec.cols).map(move |c| frame.get(r, c))).collect();

    // Rank-one Poisson fit, counts ≈ F(along) G(across), by alternating ratio
    // updates. A bin that covers every transverse position keeps its plain sum.
    let ratio = |idx: &[usize], other_idx: &[usize], other: &[f64], len: usize| {
        let mut num = vec![0.0; len];
        let mut den = vec![0.0; len];
        for ((&i, &j), &v) in idx.iter().zip(other_idx).zip(&counts) {
            num[i] += v;
            den[i] += other[j];
        }
        num.iter().zip(&den).map(|(a, b)| if *b > 0.0 { a / b } else { 0.0 }).collect::<Vec<f64>>()
    };
    let mut f = ratio(&along, &across, &vec![1.0; nt], n);
    for _ in 0..200 {
        let g = ratio(&across, &along, &f, nt);
        let next = ratio(&along, &across, &g, n);
        let scale = next.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let change = next.iter().zip(&f).fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()));
        f = next;
        if change <= 1e-14 * scale {
            break;
        }
    }
    let positions = (0..n).map(|b| lo + b as f64 * width).collect();
    (positions, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::detector::DetectorSpec;

    fn spec(rows: usize, cols: usize) -> DetectorSpec {
        DetectorSpec::centered(rows, cols, 1.0, (0.0, 0.0))
    }

    #[test]
    fn single_pixel_is_delta() {
        let mut counts = vec![0.0; 20];
        counts[2 * 5 + 3] = 17.0;
        let frame = DetectorFrame::new(counts, spec(4, 5)).unwrap();
        let rows = itop(&frame, ProfileAxis::Rows);
        assert_eq!(rows.profile.values, vec![0.0, 0.0, 1.0, 0.0]);
        let cols = itop(&frame, ProfileAxis::Cols);
        assert_eq!(cols.profile.values, vec![0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(!rows.empty);
    }

    #[test]
    fn uniform_frame_is_flat() {
        let frame = DetectorFrame::new(vec![3.0; 24], spec(6, 4)).unwrap();
        let p = itop(&frame, ProfileAxis::Rows);
        for v in p.profile.values {
            assert!((v - 1.0 / 6.0).abs() < 1e-15);
        }
        assert_eq!(p.profile.positions[0], -2.5);
    }

    #[test]
    fn empty_frame_is_flagged() {
        let p = itop(&DetectorFrame::zeros(spec(3, 3)), ProfileAxis::Cols);
        assert!(p.empty);
        assert!(p.profile.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn half_turn_reverses_profile() {
        let mut counts = vec![0.0; 12];
        counts[0] = 1.0; // row 0
        counts[3 * 3 + 1] = 3.0; // row 3
        let s = DetectorSpec { axis_rotation: std::f64::consts::PI, ..spec(4, 3) };
        let frame = DetectorFrame::new(counts, s).unwrap();
        let p = itop(&frame, ProfileAxis::Rows);
        assert_eq!(p.profile.len(), 4);
        assert!((p.profile.values[0] - 0.75).abs() < 1e-15);
        assert!((p.profile.values[3] - 0.25).abs() < 1e-15);
        assert!((p.profile.positions[0] + 1.5).abs() < 1e-12);
    }
}
