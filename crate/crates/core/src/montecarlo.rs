//! Exact simulation of the modulated log price at a random trade time:
//! embedded-chain regime paths, per-sojourn diffusion and compound-Poisson
//! increments, switch jumps, and both trade-timing families.
//!
//! Substreams are counter-derived from (seed, stream index), so batches are
//! bit-reproducible regardless of how the work is scheduled. In the
//! incidence family the latent process still evolves in continuous time;
//! the trade time merely lands on the (scaled) unit grid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp1, Open01, Poisson, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::process::{JumpLaw, ModulatedModel};
use crate::tail::{IimTiming, ItmTiming, TimingKind, TimingModel};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum McError {
    #[error("sample count must be at least 1")]
    EmptyBatch,
    #[error("stream count must be at least 1")]
    ZeroStreams,
    #[error("grid step must be positive and finite")]
    BadGridStep,
}

/// Realized log-price draws with the provenance needed to regenerate them.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub log_prices: Vec<f64>,
    pub trade_times: Vec<f64>,
    pub seed: u64,
    pub streams: u32,
    pub timing_kind: TimingKind,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.log_prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_prices.is_empty()
    }

    /// P_T = e^{X_T} per draw.
    pub fn prices(&self) -> Vec<f64> {
        self.log_prices.iter().map(|x| x.exp()).collect()
    }

    /// Substream that produced row `index`.
    pub fn stream_of(&self, index: usize) -> u32 {
        for (s, range) in stream_ranges(self.len(), self.streams)
            .into_iter()
            .enumerate()
        {
            if range.contains(&index) {
                return s as u32;
            }
        }
        self.streams - 1
    }
}

/// Contiguous per-stream slices: stream order then within-stream order fixes
/// the concatenation independently of execution interleaving.
pub fn stream_ranges(count: usize, streams: u32) -> Vec<std::ops::Range<usize>> {
    let streams = streams.max(1) as usize;
    let base = count / streams;
    let rem = count % streams;
    let mut ranges = Vec::with_capacity(streams);
    let mut start = 0;
    for i in 0..streams {
        let len = base + usize::from(i < rem);
        ranges.push(start..start + len);
        start += len;
    }
    ranges
}

fn substream(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn pick_weighted(weights: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u * total < acc {
            return i;
        }
    }
    weights.len() - 1
}

fn draw_jump(law: &JumpLaw, rng: &mut impl Rng) -> f64 {
    match *law {
        JumpLaw::Degenerate { size } => size,
        JumpLaw::Gaussian { mean, variance } => {
            let z: f64 = StandardNormal.sample(rng);
            mean + variance.sqrt() * z
        }
        JumpLaw::TwoPoint {
            first,
            prob_first,
            second,
        } => {
            if rng.random::<f64>() < prob_first {
                first
            } else {
                second
            }
        }
    }
}

/// Geometric on {1, 2, ...} by inversion.
fn draw_geometric(p: f64, rng: &mut impl Rng) -> u64 {
    let u: f64 = Open01.sample(rng);
    1 + (u.ln() / (1.0 - p).ln()).floor() as u64
}

fn draw_exponential(rate: f64, rng: &mut impl Rng) -> f64 {
    let e: f64 = rng.sample(Exp1);
    e / rate
}

fn iim_trade_time(timing: &IimTiming, grid_step: f64, rng: &mut impl Rng) -> f64 {
    let j = pick_weighted(timing.weights(), rng);
    let p = timing.probabilities()[j];
    let grid_count: u64 = (0..timing.trade_count())
        .map(|_| draw_geometric(p, rng))
        .sum();
    grid_step * grid_count as f64
}

fn itm_trade_time(timing: &ItmTiming, rng: &mut impl Rng) -> f64 {
    let j = pick_weighted(timing.weights(), rng);
    let mut t = draw_exponential(timing.arrival_rates()[j], rng);
    for &nu in timing.completion_rates() {
        t += draw_exponential(nu, rng);
    }
    t
}

/// One draw of the trade time T.
pub fn sample_trade_time(timing: &TimingModel, grid_step: f64, rng: &mut impl Rng) -> f64 {
    match timing {
        TimingModel::Iim(t) => iim_trade_time(t, grid_step, rng),
        TimingModel::Itm(t) => itm_trade_time(t, rng),
    }
}

/// One exact draw of X_t: the regime path is simulated by the embedded chain
/// with exponential sojourns, and each sojourn contributes its Gaussian part
/// plus a Poisson number of compound jumps; switch jumps fire on transitions.
pub fn sample_x_at(model: &ModulatedModel, t: f64, rng: &mut impl Rng) -> f64 {
    assert!(t > 0.0, "time must be positive");
    let generator = model.generator();
    let n = generator.nrows();

    let mut regime = pick_weighted(model.initial_distribution().as_slice(), rng);
    let mut x = 0.0;
    let mut elapsed = 0.0;
    loop {
        let exit_rate = -generator[(regime, regime)];
        let sojourn = if exit_rate > 0.0 {
            draw_exponential(exit_rate, rng)
        } else {
            f64::INFINITY
        };
        let horizon = t - elapsed;
        let h = sojourn.min(horizon);

        let spec = &model.regimes()[regime];
        if spec.diffusion_var > 0.0 || spec.drift != 0.0 {
            let z: f64 = StandardNormal.sample(rng);
            x += spec.drift * h + (spec.diffusion_var * h).sqrt() * z;
        }
        let mean_jumps = spec.jump_intensity * h;
        if mean_jumps > 0.0 {
            let count = Poisson::new(mean_jumps).expect("positive mean").sample(rng) as u64;
            for _ in 0..count {
                x += draw_jump(&spec.jump_law, rng);
            }
        }

        if sojourn >= horizon {
            return x;
        }
        elapsed += sojourn;

        // embedded-chain transition out of the current regime
        let row: Vec<f64> = (0..n)
            .map(|k| {
                if k == regime {
                    0.0
                } else {
                    generator[(regime, k)]
                }
            })
            .collect();
        let next = pick_weighted(&row, rng);
        let jump = model.switch_jump(regime, next);
        if jump.probability > 0.0 && rng.random::<f64>() < jump.probability {
            x += draw_jump(&jump.jump_law, rng);
        }
        regime = next;
    }
}

/// Compose a trade-time draw with the latent process at that time.
pub fn sample_realized_price(
    model: &ModulatedModel,
    timing: &TimingModel,
    grid_step: f64,
    rng: &mut impl Rng,
) -> (f64, f64) {
    let t = sample_trade_time(timing, grid_step, rng);
    let x = sample_x_at(model, t, rng);
    (x, t)
}

/// Deterministic batch: `count` draws partitioned over `streams` substreams
/// keyed by (seed, stream index) and concatenated in stream order.
pub fn run_batch(
    model: &ModulatedModel,
    timing: &TimingModel,
    count: usize,
    seed: u64,
    streams: u32,
    grid_step: f64,
) -> Result<SampleBatch, McError> {
    if count == 0 {
        return Err(McError::EmptyBatch);
    }
    if streams == 0 {
        return Err(McError::ZeroStreams);
    }
    if !grid_step.is_finite() || grid_step <= 0.0 {
        return Err(McError::BadGridStep);
    }

    let ranges = stream_ranges(count, streams);
    let chunks: Vec<(Vec<f64>, Vec<f64>)> = (0..streams as usize)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, i as u64);
            let len = ranges[i].len();
            let mut xs = Vec::with_capacity(len);
            let mut ts = Vec::with_capacity(len);
            for _ in 0..len {
                let (x, t) = sample_realized_price(model, timing, grid_step, &mut rng);
                xs.push(x);
                ts.push(t);
            }
            (xs, ts)
        })
        .collect();

    let mut log_prices = Vec::with_capacity(count);
    let mut trade_times = Vec::with_capacity(count);
    for (xs, ts) in chunks {
        log_prices.extend(xs);
        trade_times.extend(ts);
    }
    Ok(SampleBatch {
        log_prices,
        trade_times,
        seed,
        streams,
        timing_kind: timing.kind(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;
    use crate::process::{JumpLaw, ModulatedModel, RegimeExponent};
    use nalgebra::{DMatrix, DVector};

    fn mean_and_se(values: impl Iterator<Item = f64>) -> (f64, f64, usize) {
        let mut n = 0usize;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for v in values {
            n += 1;
            sum += v;
            sumsq += v * v;
        }
        let mean = sum / n as f64;
        let var = (sumsq / n as f64 - mean * mean).max(0.0);
        (mean, (var / n as f64).sqrt(), n)
    }

    fn single_type_iim(p: f64) -> IimTiming {
        IimTiming::new(vec![p], vec![1.0], 1).unwrap()
    }

    #[test]
    fn near_degenerate_geometric_hits_the_first_grid_point() {
        let timing = TimingModel::Iim(single_type_iim(0.999));
        let mut rng = substream(1, 0);
        let mut first = 0usize;
        let n = 100_000;
        for _ in 0..n {
            if sample_trade_time(&timing, 1.0, &mut rng) == 1.0 {
                first += 1;
            }
        }
        let rate = first as f64 / n as f64;
        assert!((rate - 0.999).abs() < 3.0 * (0.999f64 * 0.001 / n as f64).sqrt());
    }

    #[test]
    fn geometric_trade_time_mean() {
        let timing = TimingModel::Iim(single_type_iim(0.5));
        let mut rng = substream(2, 0);
        let (mean, se, _) =
            mean_and_se((0..1_000_000).map(|_| sample_trade_time(&timing, 1.0, &mut rng)));
        assert!((mean - 2.0).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn itm_trade_time_mean_and_histogram() {
        let timing_model = ItmTiming::new(vec![1.0], vec![1.0], vec![2.0, 2.0]).unwrap();
        let spec = timing_model.type_spec(0).unwrap();
        let timing = TimingModel::Itm(timing_model);
        let mut rng = substream(3, 0);
        let n = 1_000_000usize;
        let draws: Vec<f64> = (0..n)
            .map(|_| sample_trade_time(&timing, 1.0, &mut rng))
            .collect();
        let (mean, se, _) = mean_and_se(draws.iter().copied());
        assert!((mean - 2.0).abs() < 3.0 * se, "mean {mean}, se {se}");

        // binned chi-squared against the analytic density, 1% level
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let edges: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
        let mut observed = vec![0usize; edges.len()]; // last bin is the tail
        for &d in &draws {
            let bin = ((d / 0.25) as usize).min(edges.len() - 1);
            observed[bin] += 1;
        }
        let mut chi2 = 0.0;
        let mut dof = 0usize;
        for (i, &obs) in observed.iter().enumerate() {
            let lo = edges[i];
            let hi = edges.get(i + 1).copied();
            let p = match hi {
                Some(hi) => spec.cdf(hi) - spec.cdf(lo),
                None => 1.0 - spec.cdf(lo),
            };
            let expected = p * n as f64;
            if expected >= 5.0 {
                chi2 += (obs as f64 - expected).powi(2) / expected;
                dof += 1;
            }
        }
        let crit = ChiSquared::new((dof - 1) as f64).unwrap().inverse_cdf(0.99);
        assert!(chi2 < crit, "chi2 {chi2} vs critical {crit} at {dof} bins");
    }

    #[test]
    fn brownian_variance_at_time_four() {
        let model = models::scalar_brownian(0.0, 1.0);
        let mut rng = substream(4, 0);
        let n = 1_000_000usize;
        let draws: Vec<f64> = (0..n).map(|_| sample_x_at(&model, 4.0, &mut rng)).collect();
        let (second_moment, se, _) = mean_and_se(draws.iter().map(|x| x * x));
        assert!(
            (second_moment - 4.0).abs() < 3.0 * se,
            "second moment {second_moment}, se {se}"
        );
    }

    #[test]
    fn compound_poisson_count_mean() {
        let regime = RegimeExponent {
            drift: 0.0,
            diffusion_var: 0.0,
            jump_intensity: 2.0,
            jump_law: JumpLaw::Degenerate { size: 1.0 },
        };
        let model = ModulatedModel::new(
            vec![regime],
            DMatrix::zeros(1, 1),
            DVector::from_element(1, 1.0),
        )
        .unwrap();
        let mut rng = substream(5, 0);
        let (mean, se, _) = mean_and_se((0..1_000_000).map(|_| sample_x_at(&model, 3.0, &mut rng)));
        assert!((mean - 6.0).abs() < 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn batches_are_bit_reproducible() {
        let model = models::two_regime_with_jumps();
        let timing = TimingModel::Iim(models::two_regime_iim_timing());
        let a = run_batch(&model, &timing, 10_000, 42, 8, 1.0).unwrap();
        let b = run_batch(&model, &timing, 10_000, 42, 8, 1.0).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.log_prices), bits(&b.log_prices));
        assert_eq!(bits(&a.trade_times), bits(&b.trade_times));

        let c = run_batch(&model, &timing, 10_000, 43, 8, 1.0).unwrap();
        assert_ne!(bits(&a.log_prices), bits(&c.log_prices));
    }

    #[test]
    fn zero_count_is_rejected() {
        let model = models::scalar_brownian(0.0, 1.0);
        let timing = TimingModel::Iim(models::scalar_iim_benchmark_timing());
        assert_eq!(
            run_batch(&model, &timing, 0, 1, 1, 1.0),
            Err(McError::EmptyBatch)
        );
    }
}
