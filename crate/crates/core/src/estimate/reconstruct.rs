use super::fringe::FringeFitResult;
use super::peaks::PeakFitResult;
use crate::error::{Error, Result};
use crate::timecourse::PAIRS;

/// Outcome of one two-beam measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairMeasurement {
    Fitted(FringeFitResult),
    /// Both beams of the pair were dark; the coherence modulus is undefined.
    NoLight,
}

/// The six plotted quantities: ρ11, ρ22, ρ33, |σ12|, |σ13|, |σ23|.
///
/// Undefined moduli are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementEstimate {
    pub populations: [f64; 3],
    pub abs_sigma: [f64; 3],
}

impl ElementEstimate {
    pub fn as_array(&self) -> [f64; 6] {
        let [a, b, c] = self.populations;
        let [d, e, f] = self.abs_sigma;
        [a, b, c, d, e, f]
    }
}

/// Combines one population fit with the three pair measurements (ordered 12, 13, 23).
pub fn reconstruct_elements(
    populations: &PeakFitResult,
    fringes: [Option<&PairMeasurement>; 3],
) -> Result<ElementEstimate> {
    let missing: Vec<(usize, usize)> =
        fringes.iter().zip(PAIRS).filter_map(|(m, pair)| m.is_none().then_some(pair)).collect();
    if !missing.is_empty() {
        return Err(Error::PartialResult { missing });
    }
    let abs_sigma = fringes.map(|m| match m {
        Some(PairMeasurement::Fitted(f)) => f.visibility / 2.0,
        _ => f64::NAN,
    });
    Ok(ElementEstimate { populations: populations.populations, abs_sigma })
}

/// Mean and sample standard deviation of repeated estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregatedEstimate {
    pub mean: [f64; 6],
    pub std: [f64; 6],
    pub repetitions: usize,
}

impl AggregatedEstimate {
    /// NaN entries are skipped per quantity; a quantity with no finite samples is NaN.
    pub fn from_estimates(estimates: &[ElementEstimate]) -> Self {
        let mut mean = [f64::NAN; 6];
        let mut std = [f64::NAN; 6];
        for q in 0..6 {
            let xs: Vec<f64> = estimates.iter().map(|e| e.as_array()[q]).filter(|x| x.is_finite()).collect();
            if xs.is_empty() {
                continue;
            }
            let n = xs.len() as f64;
            let m = xs.iter().sum::<f64>() / n;
            mean[q] = m;
            std[q] =
                if xs.len() > 1 { (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
        }
        Self { mean, std, repetitions: estimates.len() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimate::fringe::FringeFlags;
    use crate::estimate::peaks::GaussianPeak;

    fn peaks(p: [f64; 3]) -> PeakFitResult {
        let m = GaussianPeak { center: 0.0, width: 1.0, area: 1.0 };
        PeakFitResult { modes: [m; 3], offset: 0.0, residual_rms: 0.0, populations: p }
    }

    fn fringe(v: f64) -> PairMeasurement {
        PairMeasurement::Fitted(FringeFitResult {
            amplitude: 1.0,
            envelope_center: 0.0,
            envelope_width: 1.0,
            fringe_period: 0.1,
            visibility: v,
            phase: 0.0,
            offset: 0.0,
            residual_rms: 0.0,
            flags: FringeFlags::default(),
        })
    }

    #[test]
    fn balanced_state() {
        let f = fringe(1.0);
        let est = reconstruct_elements(&peaks([1.0 / 3.0; 3]), [Some(&f); 3]).unwrap();
        assert_eq!(est.abs_sigma, [0.5; 3]);
    }

    #[test]
    fn missing_pairs_are_listed() {
        let f = fringe(1.0);
        let err = reconstruct_elements(&peaks([1.0 / 3.0; 3]), [Some(&f), None, None]).unwrap_err();
        assert_eq!(err, Error::PartialResult { missing: vec![(1, 3), (2, 3)] });
    }

    #[test]
    fn dark_pair_is_nan_and_aggregates_skip_it() {
        let f = fringe(0.5);
        let dark = PairMeasurement::NoLight;
        let a = reconstruct_elements(&peaks([1.0, 0.0, 0.0]), [Some(&f), Some(&f), Some(&dark)]).unwrap();
        assert!(a.abs_sigma[2].is_nan());
        let g = fringe(0.7);
        let b = reconstruct_elements(&peaks([0.8, 0.2, 0.0]), [Some(&g), Some(&g), Some(&dark)]).unwrap();
        let agg = AggregatedEstimate::from_estimates(&[a, b]);
        assert!((agg.mean[0] - 0.9).abs() < 1e-15);
        assert!((agg.std[0] - 0.02f64.sqrt()).abs() < 1e-15);
        assert!((agg.mean[3] - 0.3).abs() < 1e-15);
        assert!(agg.mean[5].is_nan());
    }
}
