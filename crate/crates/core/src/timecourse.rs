//! Decay rates, elapsed time and evolution sweeps.

use rayon::prelude::*;

use crate::channel::{apply_channel, build_kraus, closed_form_evolve, DecayType, JumpProbabilities};
use crate::error::{check_range, Error, Result};
use crate::state::{project_subspace, pure_density, visibility, DensityMatrix, InitialState};

/// Level pairs in the order used by every per-pair output.
pub const PAIRS: [(usize, usize); 3] = [(1, 2), (1, 3), (2, 3)];

/// Spontaneous decay rates γ_ij in inverse time units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRates {
    pub gamma21: f64,
    pub gamma31: f64,
    pub gamma32: f64,
}

impl DecayRates {
    pub fn new(gamma21: f64, gamma31: f64, gamma32: f64) -> Result<Self> {
        for (name, g) in [("gamma21", gamma21), ("gamma31", gamma31), ("gamma32", gamma32)] {
            if !g.is_finite() || g < 0.0 {
                return Err(Error::Range { name, value: g, lo: 0.0, hi: f64::INFINITY });
            }
        }
        Ok(Self { gamma21, gamma31, gamma32 })
    }

    /// Reference rates: equal cascade rates, γ31 = 2γ32 for Λ, γ21 = 2γ31 for V.
    pub fn reference(decay_type: DecayType) -> Self {
        match decay_type {
            DecayType::Cascade => Self { gamma21: 1.0, gamma31: 0.0, gamma32: 1.0 },
            DecayType::Lambda => Self { gamma21: 0.0, gamma31: 2.0, gamma32: 1.0 },
            DecayType::V => Self { gamma21: 2.0, gamma31: 1.0, gamma32: 0.0 },
        }
    }

    /// Rate that sets the sweep clock in probability mode.
    ///
    /// Cascade and V use the slowest active channel so that progress 1 means
    /// full decay of every channel; Λ uses the total depletion rate of level 3.
    fn clock_rate(&self, decay_type: DecayType) -> f64 {
        let slowest = |a: f64, b: f64| match (a > 0.0, b > 0.0) {
            (true, true) => a.min(b),
            (true, false) => a,
            (false, true) => b,
            (false, false) => 0.0,
        };
        match decay_type {
            DecayType::Cascade => slowest(self.gamma21, self.gamma32),
            DecayType::Lambda => self.gamma31 + self.gamma32,
            DecayType::V => slowest(self.gamma21, self.gamma31),
        }
    }
}

fn decayed(gamma: f64, t: f64) -> f64 {
    if gamma == 0.0 {
        0.0
    } else {
        -(-gamma * t).exp_m1()
    }
}

/// Jump probabilities after elapsed time `t`.
///
/// Cascade and V use independent exponentials 1 − e^{−γt}. Λ splits the
/// total depletion 1 − e^{−Γt}, Γ = γ31 + γ32, in the branching ratio, so
/// p31 + p32 ≤ 1 holds for every t.
pub fn probs_at_time(decay_type: DecayType, rates: &DecayRates, t: f64) -> Result<JumpProbabilities> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Range { name: "t", value: t, lo: 0.0, hi: f64::INFINITY });
    }
    let r = rates;
    Ok(match decay_type {
        DecayType::Cascade => JumpProbabilities { p21: decayed(r.gamma21, t), p31: 0.0, p32: decayed(r.gamma32, t) },
        DecayType::Lambda => {
            let total = r.gamma31 + r.gamma32;
            if total == 0.0 {
                JumpProbabilities::zero()
            } else {
                let depleted = decayed(total, t);
                let p31 = r.gamma31 / total * depleted;
                JumpProbabilities { p21: 0.0, p31, p32: (depleted - p31).max(0.0) }
            }
        }
        DecayType::V => JumpProbabilities { p21: decayed(r.gamma21, t), p31: decayed(r.gamma31, t), p32: 0.0 },
    })
}

/// Jump probabilities at decay progress `s` ∈ [0, 1].
///
/// `s` is the decayed fraction of the clock channel (see [`DecayRates`]);
/// other channels follow as 1 − (1 − s)^{γ/γ_clock}. Equivalent to
/// [`probs_at_time`] at t = −ln(1 − s)/γ_clock but exact at s = 1.
pub fn probs_at_progress(decay_type: DecayType, rates: &DecayRates, s: f64) -> Result<JumpProbabilities> {
    check_range("progress", s, 0.0, 1.0)?;
    let clock = rates.clock_rate(decay_type);
    if clock == 0.0 {
        if s == 0.0 {
            return Ok(JumpProbabilities::zero());
        }
        return Err(Error::Degenerate(format!("all {decay_type} decay rates are zero; progress {s} is unreachable")));
    }
    let follow = |gamma: f64| {
        if gamma == 0.0 {
            0.0
        } else if gamma == clock {
            s
        } else {
            1.0 - (1.0 - s).powf(gamma / clock)
        }
    };
    let r = rates;
    Ok(match decay_type {
        DecayType::Cascade => JumpProbabilities { p21: follow(r.gamma21), p31: 0.0, p32: follow(r.gamma32) },
        DecayType::Lambda => {
            let p31 = r.gamma31 / clock * s;
            JumpProbabilities { p21: 0.0, p31, p32: (s - p31).max(0.0) }
        }
        DecayType::V => JumpProbabilities { p21: follow(r.gamma21), p31: follow(r.gamma31), p32: 0.0 },
    })
}

/// Sweep abscissae: elapsed times or decay-progress values.
#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    Times(Vec<f64>),
    Progress(Vec<f64>),
}

impl Samples {
    pub fn values(&self) -> &[f64] {
        match self {
            Samples::Times(v) | Samples::Progress(v) => v,
        }
    }

    pub fn len(&self) -> usize {
        self.values().len()
    }

    pub fn is_empty(&self) -> bool {
        self.values().is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    decay_type: DecayType,
    rates: DecayRates,
    samples: Samples,
}

impl SweepSpec {
    pub fn new(decay_type: DecayType, rates: DecayRates, samples: Samples) -> Result<Self> {
        let values = samples.values();
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InputContract("sweep samples must be strictly increasing".into()));
        }
        for &v in values {
            match samples {
                Samples::Progress(_) => check_range("progress sample", v, 0.0, 1.0)?,
                Samples::Times(_) => {
                    if v.is_nan() || v < 0.0 {
                        return Err(Error::Range { name: "time sample", value: v, lo: 0.0, hi: f64::INFINITY });
                    }
                }
            }
        }
        Ok(Self { decay_type, rates, samples })
    }

    /// Progress grid 0, step, 2·step, …, 1.
    pub fn progress_grid(decay_type: DecayType, rates: DecayRates, step: f64) -> Result<Self> {
        if !(step > 0.0 && step <= 1.0) {
            return Err(Error::Range { name: "step", value: step, lo: f64::MIN_POSITIVE, hi: 1.0 });
        }
        let n = (1.0 / step).round() as usize;
        if ((n as f64) * step - 1.0).abs() > 1e-9 {
            return Err(Error::InputContract(format!("step {step} does not divide [0, 1]")));
        }
        let values = (0..=n).map(|k| k as f64 / n as f64).collect();
        Self::new(decay_type, rates, Samples::Progress(values))
    }

    pub fn decay_type(&self) -> DecayType {
        self.decay_type
    }

    pub fn rates(&self) -> &DecayRates {
        &self.rates
    }

    pub fn samples(&self) -> &Samples {
        &self.samples
    }

    /// Jump probabilities at every sample.
    pub fn probabilities(&self) -> Result<Vec<JumpProbabilities>> {
        self.samples.values().iter().map(|&v| self.probs_at(v)).collect()
    }

    fn probs_at(&self, v: f64) -> Result<JumpProbabilities> {
        match self.samples {
            Samples::Times(_) => probs_at_time(self.decay_type, &self.rates, v),
            Samples::Progress(_) => probs_at_progress(self.decay_type, &self.rates, v),
        }
    }
}

/// Evolution result at one sweep sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub sample: f64,
    pub probs: JumpProbabilities,
    pub rho: DensityMatrix,
    pub populations: [f64; 3],
    /// Visibility per pair in [`PAIRS`] order; `None` when the pair carries no population.
    pub visibilities: [Option<f64>; 3],
}

impl SweepRecord {
    /// |σ_ij| = V_ij / 2 per pair.
    pub fn abs_sigma(&self) -> [Option<f64>; 3] {
        self.visibilities.map(|v| v.map(|v| v / 2.0))
    }
}

/// Evolves `state` under `decay_type` with the given probabilities.
///
/// Zero-phase states use the closed forms; phased states go through the Kraus sum.
pub fn evolve(decay_type: DecayType, probs: JumpProbabilities, state: &InitialState) -> Result<DensityMatrix> {
    if state.has_zero_phases() {
        closed_form_evolve(decay_type, probs, state)
    } else {
        apply_channel(&build_kraus(decay_type, probs)?, &pure_density(state))
    }
}

/// Pair visibilities of ρ; `None` where the pair carries no population.
pub fn pair_visibilities(rho: &DensityMatrix) -> Result<[Option<f64>; 3]> {
    let mut out = [None; 3];
    for (slot, &(i, j)) in out.iter_mut().zip(PAIRS.iter()) {
        *slot = match project_subspace(rho, i, j) {
            Ok(sub) => Some(visibility(&sub)),
            Err(Error::Degenerate(_)) => None,
            Err(e) => return Err(e),
        };
    }
    Ok(out)
}

/// Evaluates one record.
pub fn evaluate(
    decay_type: DecayType,
    sample: f64,
    probs: JumpProbabilities,
    state: &InitialState,
) -> Result<SweepRecord> {
    let rho = evolve(decay_type, probs, state)?;
    Ok(SweepRecord { sample, probs, populations: rho.populations(), visibilities: pair_visibilities(&rho)?, rho })
}

/// Evaluates every sample of the sweep. Records keep the sample order.
pub fn run_sweep(spec: &SweepSpec, state: &InitialState) -> Result<Vec<SweepRecord>> {
    let probs = spec.probabilities()?;
    spec.samples
        .values()
        .par_iter()
        .zip(probs.par_iter())
        .map(|(&sample, &p)| evaluate(spec.decay_type, sample, p, state))
        .collect()
}
