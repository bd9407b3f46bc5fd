use super::detector::{pixel_integrals, sample_counts, DetectorFrame, DetectorSpec};
use super::fields::ImageField;
use super::geometry::ModeGeometry;
use crate::channel::{branch_state, KrausSet, COMPLETENESS_TOL};
use crate::error::{Error, Result};
use crate::state::{pure_density, InitialState};

/// Image-plane exposure of a channel realized as a sequence of Kraus frames.
///
/// Each operator K_i maps the initial state to the conditional state
/// K_i ρ0 K_i†, whose image field is rendered with weight Tr(K_i ρ0 K_i†)
/// and added to one frame. The expected total is `mean_photons`. Each branch
/// draws its own Poisson noise, so the sum is statistically a single exposure
/// of the channel output.
pub fn frame_sequence(
    kraus: &KrausSet,
    state: &InitialState,
    geom: &ModeGeometry,
    spec: &DetectorSpec,
) -> Result<DetectorFrame> {
    spec.validate()?;
    let residual = kraus.completeness_residual();
    if residual.is_nan() || residual > COMPLETENESS_TOL {
        return Err(Error::Precondition(format!("Kraus set is not trace preserving (residual {residual:.3e})")));
    }
    let rho0 = pure_density(state);

    let mut branches = Vec::with_capacity(kraus.operators().len());
    for k in kraus.operators() {
        let (out, weight) = branch_state(k, &rho0);
        if weight <= 0.0 {
            continue;
        }
        let field = ImageField { populations: [out[(0, 0)].re, out[(1, 1)].re, out[(2, 2)].re], geom: *geom };
        branches.push(pixel_integrals(&field, spec)?);
    }

    let total: f64 = branches.iter().flatten().sum();
    let mut frame = DetectorFrame::zeros(*spec);
    if total <= 0.0 {
        return Ok(frame);
    }
    let scale = spec.mean_photons / total;
    let n = spec.pixel_count() as u64;
    for (b, integrals) in branches.iter().enumerate() {
        let expected: Vec<f64> = integrals.iter().map(|v| v * scale).collect();
        let counts = sample_counts(&expected, spec, b as u64 * n);
        frame.accumulate(&DetectorFrame::new(counts, *spec)?)?;
    }
    Ok(frame)
}
