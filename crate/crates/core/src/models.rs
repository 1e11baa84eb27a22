//! Shipped benchmark models used across the test suites and example configs,
//! plus seeded random-model generators for property sweeps.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::process::{JumpLaw, ModulatedModel, RegimeExponent, TransitionJump};
use crate::tail::{IimTiming, ItmTiming};

/// Single-regime Brownian log price.
pub fn scalar_brownian(drift: f64, diffusion_var: f64) -> ModulatedModel {
    ModulatedModel::new(
        vec![RegimeExponent::brownian(drift, diffusion_var)],
        DMatrix::zeros(1, 1),
        DVector::from_element(1, 1.0),
    )
    .expect("valid scalar model")
}

/// Two diffusive regimes with symmetric switching at unit rate.
pub fn two_regime() -> ModulatedModel {
    ModulatedModel::new(
        vec![
            RegimeExponent::brownian(-0.1, 1.0),
            RegimeExponent::brownian(0.1, 0.25),
        ],
        DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]),
        DVector::from_vec(vec![0.5, 0.5]),
    )
    .expect("valid two-regime model")
}

/// The two-regime model enriched with compound-Poisson jumps in the first
/// regime and a two-point jump fired on the 0 -> 1 switch.
pub fn two_regime_with_jumps() -> ModulatedModel {
    let mut regimes = vec![
        RegimeExponent::brownian(-0.1, 1.0),
        RegimeExponent::brownian(0.1, 0.25),
    ];
    regimes[0].jump_intensity = 0.8;
    regimes[0].jump_law = JumpLaw::Gaussian {
        mean: 0.05,
        variance: 0.04,
    };
    ModulatedModel::new(
        regimes,
        DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]),
        DVector::from_vec(vec![0.5, 0.5]),
    )
    .expect("valid model")
    .with_switch_jump(
        0,
        1,
        TransitionJump {
            probability: 0.5,
            jump_law: JumpLaw::TwoPoint {
                first: -0.2,
                prob_first: 0.5,
                second: 0.15,
            },
        },
    )
    .expect("valid switch jump")
}

/// Scalar benchmark timing on the unit grid: a single type whose trade
/// probability makes the exponent equation land exactly at alpha = 1 for
/// the standard Brownian model.
pub fn scalar_iim_benchmark_timing() -> IimTiming {
    IimTiming::new(vec![1.0 - (-0.5f64).exp()], vec![1.0], 1).expect("valid timing")
}

/// Same probability, price observed at the second successful opportunity.
pub fn scalar_iim_negbin_timing() -> IimTiming {
    IimTiming::new(vec![1.0 - (-0.5f64).exp()], vec![1.0], 2).expect("valid timing")
}

/// Exponential benchmark: one arrival type, no completion stages.
pub fn scalar_itm_benchmark_timing() -> ItmTiming {
    ItmTiming::new(vec![0.5], vec![1.0], vec![]).expect("valid timing")
}

/// Two trading types on the unit grid.
pub fn two_regime_iim_timing() -> IimTiming {
    IimTiming::new(vec![0.2, 0.6], vec![0.5, 0.5], 1).expect("valid timing")
}

/// Two arrival types with one completion stage; arrival-dominant case.
pub fn two_regime_itm_timing() -> ItmTiming {
    ItmTiming::new(vec![0.5, 2.0], vec![0.5, 0.5], vec![1.0]).expect("valid timing")
}

/// Random irreducible generator with all off-diagonal rates positive.
pub fn random_generator(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let mut g = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut row_sum = 0.0;
        for k in 0..n {
            if j != k {
                let rate = rng.random_range(0.2..1.5);
                g[(j, k)] = rate;
                row_sum += rate;
            }
        }
        g[(j, j)] = -row_sum;
    }
    g
}

/// Random well-posed model for property sweeps: irreducible switching, a
/// nondegenerate diffusion in every regime (so the tail is nonlattice), and
/// occasional compound-Poisson and switch jumps.
pub fn random_model(rng: &mut impl Rng, max_regimes: usize) -> ModulatedModel {
    let n = rng.random_range(1..=max_regimes.max(1));
    let generator = random_generator(rng, n);

    let mut regimes = Vec::with_capacity(n);
    for _ in 0..n {
        let mut regime =
            RegimeExponent::brownian(rng.random_range(-0.3..0.3), rng.random_range(0.2..1.2));
        if rng.random::<f64>() < 0.5 {
            regime.jump_intensity = rng.random_range(0.1..0.6);
            regime.jump_law = match rng.random_range(0..3) {
                0 => JumpLaw::Degenerate {
                    size: rng.random_range(-0.3..0.3),
                },
                1 => JumpLaw::Gaussian {
                    mean: rng.random_range(-0.2..0.2),
                    variance: rng.random_range(0.0..0.2),
                },
                _ => JumpLaw::TwoPoint {
                    first: rng.random_range(-0.4..0.0),
                    prob_first: rng.random_range(0.2..0.8),
                    second: rng.random_range(0.0..0.4),
                },
            };
        }
        regimes.push(regime);
    }

    let mut raw = vec![0.0; n];
    for w in raw.iter_mut() {
        *w = rng.random_range(0.1..1.0);
    }
    let total: f64 = raw.iter().sum();
    // renormalize exactly so the distribution check passes bit-for-bit
    let mut initial = DVector::from_vec(raw.iter().map(|w| w / total).collect::<Vec<_>>());
    let sum: f64 = initial.iter().sum();
    initial[n - 1] += 1.0 - sum;

    let mut model =
        ModulatedModel::new(regimes, generator, initial).expect("generated model is valid");
    if n > 1 && rng.random::<f64>() < 0.4 {
        let from = rng.random_range(0..n);
        let mut to = rng.random_range(0..n);
        if to == from {
            to = (to + 1) % n;
        }
        model = model
            .with_switch_jump(
                from,
                to,
                TransitionJump {
                    probability: rng.random_range(0.2..0.9),
                    jump_law: JumpLaw::Gaussian {
                        mean: rng.random_range(-0.2..0.2),
                        variance: rng.random_range(0.0..0.1),
                    },
                },
            )
            .expect("valid switch jump");
    }
    model
}
