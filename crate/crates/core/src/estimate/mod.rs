//! Recovery of density-matrix elements from detector profiles.

pub mod fringe;
pub mod lm;
pub mod peaks;
pub mod reconstruct;

pub use fringe::{fit_fringe, FringeFitResult, FringeFlags, FringeHint};
pub use peaks::{fit_populations, GaussianPeak, PeakFitResult};
pub use reconstruct::{reconstruct_elements, AggregatedEstimate, ElementEstimate, PairMeasurement};
