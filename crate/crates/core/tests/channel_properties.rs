use nalgebra::Matrix3;
use num_complex::Complex64;
use proptest::prelude::*;
use qjump_core::channel::COMPLETENESS_TOL;
use qjump_core::state::min_eigenvalue;
use qjump_core::timecourse::{evaluate, probs_at_progress};
use qjump_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

/// Every valid probability triple on the 11-point grid of the active parameters.
fn grid_probs(t: DecayType) -> Vec<JumpProbabilities> {
    let mut out = vec![];
    for &a in &grid() {
        for &b in &grid() {
            let p = match t {
                DecayType::Cascade => JumpProbabilities { p21: a, p31: 0.0, p32: b },
                DecayType::Lambda => JumpProbabilities { p21: 0.0, p31: a, p32: b },
                DecayType::V => JumpProbabilities { p21: a, p31: b, p32: 0.0 },
            };
            if t == DecayType::Lambda && a + b > 1.0 + 1e-12 {
                continue;
            }
            out.push(p);
        }
    }
    out
}

fn random_mixed(rng: &mut impl Rng) -> DensityMatrix {
    let g = Matrix3::from_fn(|_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let m = g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::new(m / tr).unwrap()
}

/// Kraus sum written out element by element.
fn brute_force_kraus_sum(ops: &[ComplexMatrix], rho: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros();
    for k in ops {
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..3 {
                    for b in 0..3 {
                        acc += k[(i, a)] * rho[(a, b)] * k[(j, b)].conj();
                    }
                }
                out[(i, j)] += acc;
            }
        }
    }
    out
}

fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn completeness_on_grid() {
    for t in DecayType::ALL {
        for p in grid_probs(t) {
            let k = build_kraus(t, p).unwrap();
            assert!(k.completeness_residual() <= COMPLETENESS_TOL, "{t} {p:?}");
        }
    }
}

#[test]
fn closed_forms_match_kraus_application() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for t in DecayType::ALL {
        for _ in 0..100 {
            let intensities = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
            let state = InitialState::from_intensities(intensities).unwrap();
            let a = rng.random::<f64>();
            let b = rng.random::<f64>() * if t == DecayType::Lambda { 1.0 - a } else { 1.0 };
            let p = match t {
                DecayType::Cascade => JumpProbabilities::new(a, 0.0, b),
                DecayType::Lambda => JumpProbabilities::new(0.0, a, b),
                DecayType::V => JumpProbabilities::new(a, b, 0.0),
            }
            .unwrap();
            let closed = closed_form_evolve(t, p, &state).unwrap();
            let k = build_kraus(t, p).unwrap();
            let kraus = apply_channel(&k, &pure_density(&state)).unwrap();
            let brute = brute_force_kraus_sum(k.operators(), pure_density(&state).matrix());
            assert!(max_diff(closed.matrix(), kraus.matrix()) <= 1e-12);
            assert!(max_diff(closed.matrix(), &brute) <= 1e-12);
        }
    }
}

#[test]
fn zero_probability_is_exact_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for t in DecayType::ALL {
        let k = build_kraus(t, JumpProbabilities::zero()).unwrap();
        for _ in 0..20 {
            let rho = random_mixed(&mut rng);
            let out = apply_channel(&k, &rho).unwrap();
            assert!(max_diff(out.matrix(), rho.matrix()) <= 1e-14);
        }
    }
}

#[test]
fn absorbing_limits() {
    let eq = InitialState::equal();
    let c = closed_form_evolve(DecayType::Cascade, JumpProbabilities::new(1.0, 0.0, 1.0).unwrap(), &eq).unwrap();
    assert!((c.populations()[0] - 1.0).abs() <= 1e-15);
    for a in grid() {
        let p = JumpProbabilities::new(0.0, a, 1.0 - a).unwrap();
        let rec = evaluate(DecayType::Lambda, 1.0, p, &eq).unwrap();
        assert!(rec.populations[2].abs() <= 1e-15);
        let s = rec.abs_sigma();
        assert!(s[1].unwrap().abs() <= 1e-15 && s[2].unwrap().abs() <= 1e-15);
    }
    let v = closed_form_evolve(DecayType::V, JumpProbabilities::new(1.0, 1.0, 0.0).unwrap(), &eq).unwrap();
    assert!((v.populations()[0] - 1.0).abs() <= 1e-15);
}

#[test]
fn populations_are_monotone_along_decay() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let state = InitialState::from_intensities([rng.random(), rng.random(), rng.random()]).unwrap();
        for t in DecayType::ALL {
            let rates = DecayRates::new(rng.random(), rng.random(), rng.random()).unwrap();
            let mut prev: Option<[f64; 3]> = None;
            for s in (0..=40).map(|k| k as f64 / 40.0) {
                let p = match probs_at_progress(t, &rates, s) {
                    Ok(p) => p,
                    Err(_) => continue,
                };
                let pops = timecourse::evolve(t, p, &state).unwrap().populations();
                if let Some(q) = prev {
                    if matches!(t, DecayType::Lambda | DecayType::V) {
                        assert!(pops[2] <= q[2] + 1e-14);
                    }
                    if matches!(t, DecayType::Cascade | DecayType::V) {
                        assert!(pops[0] >= q[0] - 1e-14);
                    }
                }
                prev = Some(pops);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn channel_output_is_a_state(seed in any::<u64>(), t in 0usize..3, a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        let t = DecayType::ALL[t];
        let b = if t == DecayType::Lambda { b * (1.0 - a) } else { b };
        let p = match t {
            DecayType::Cascade => JumpProbabilities::new(a, 0.0, b),
            DecayType::Lambda => JumpProbabilities::new(0.0, a, b),
            DecayType::V => JumpProbabilities::new(a, b, 0.0),
        }.unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_mixed(&mut rng);
        let out = apply_channel(&build_kraus(t, p).unwrap(), &rho).unwrap();
        prop_assert!((out.matrix().trace().re - 1.0).abs() <= 1e-12);
        prop_assert!(min_eigenvalue(out.matrix()) >= -1e-10);
        prop_assert!(DensityMatrix::new(*out.matrix()).is_ok());
        for (i, j) in PAIRS {
            if let Ok(sub) = project_subspace(&out, i, j) {
                let v = visibility(&sub);
                prop_assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn pure_states_have_unit_purity(i1 in 0.0..10.0f64, i2 in 0.0..10.0f64, i3 in 0.01..10.0f64,
                                    f1 in -3.2..3.2f64, f2 in -3.2..3.2f64, f3 in -3.2..3.2f64) {
        let rho = pure_density(&InitialState::new([i1, i2, i3], [f1, f2, f3]).unwrap());
        prop_assert!((rho.purity() - 1.0).abs() <= 1e-12);
        prop_assert!(DensityMatrix::new(*rho.matrix()).is_ok());
    }

    #[test]
    fn lambda_time_parametrization_stays_valid(g31 in 0.0..5.0f64, g32 in 0.0..5.0f64, t in 0.0..100.0f64) {
        let rates = DecayRates::new(g31, g31, g32).unwrap();
        let p = probs_at_time(DecayType::Lambda, &rates, t).unwrap();
        prop_assert!(p.p31 + p.p32 <= 1.0 + 1e-15);
        prop_assert!(build_kraus(DecayType::Lambda, p).is_ok());
        let later = probs_at_time(DecayType::Lambda, &rates, t + 0.5).unwrap();
        prop_assert!(later.p31 >= p.p31 && later.p32 >= p.p32);
    }
}

#[test]
fn cascade_pair_renormalization() {
    for p in [0.0, 0.125, 0.5, 0.875] {
        let i = [1.0, 2.0, 0.5];
        let state = InitialState::from_intensities(i).unwrap();
        let rho = closed_form_evolve(DecayType::Cascade, JumpProbabilities::new(p, 0.0, p).unwrap(), &state).unwrap();
        let sub = project_subspace(&rho, 1, 2).unwrap();
        let i_r = i[0] + i[1] + p * i[2];
        assert!((sub.renorm_intensity(state.total_intensity()) - i_r).abs() < 1e-12);
        let s11 = (i[0] + i[1] * p + i[2] * p * p) / i_r;
        let s12 = (i[0] * i[1]).sqrt() * (1.0 - p).sqrt() / i_r;
        assert!((sub.sigma()[(0, 0)].re - s11).abs() < 1e-12);
        assert!((sub.coherence().re - s12).abs() < 1e-12);
    }
    let rho = closed_form_evolve(
        DecayType::Cascade,
        JumpProbabilities::new(0.25, 0.0, 0.25).unwrap(),
        &InitialState::equal(),
    )
    .unwrap();
    let v = visibility(&project_subspace(&rho, 1, 2).unwrap());
    assert!((v - 2.0 * 0.75f64.sqrt() / 2.25).abs() < 1e-12);
    assert!((v - 0.7698).abs() < 1e-4);
}
