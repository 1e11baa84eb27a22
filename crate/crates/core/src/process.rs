//! Markov-modulated Lévy process: regime-level Lévy exponents, switch-time
//! jumps, and the matrix Laplace exponent A(z) = G ⊙ Υ(z) + Ψ(z).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::matexp::{matexp, MatExpError};

/// Dense arithmetic throughout; regime counts are expected to be small.
pub const MAX_REGIMES: usize = 64;

const SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("regime count {0} is outside 1..={MAX_REGIMES}")]
    BadRegimeCount(usize),
    #[error("generator must be {n}x{n}, got {rows}x{cols}")]
    BadGeneratorShape { n: usize, rows: usize, cols: usize },
    #[error("generator row {row} sums to {sum:.3e}, not 0")]
    RowSumNonZero { row: usize, sum: f64 },
    #[error("generator entry ({row},{col}) = {value:.3e} is negative")]
    NegativeOffDiagonal { row: usize, col: usize, value: f64 },
    #[error("generator is not irreducible")]
    NotIrreducible,
    #[error("initial distribution entry {index} = {value:.3e} is negative")]
    NegativeInitialWeight { index: usize, value: f64 },
    #[error("initial distribution sums to {sum:.3e}, not 1")]
    InitialNotNormalized { sum: f64 },
    #[error("diffusion variance {0:.3e} is negative")]
    NegativeVariance(f64),
    #[error("jump intensity {0:.3e} is negative")]
    NegativeIntensity(f64),
    #[error("jump-law probability {0:.3e} is outside [0,1]")]
    BadJumpProbability(f64),
    #[error("switch-jump probability {0:.3e} is outside [0,1]")]
    BadSwitchProbability(f64),
    #[error("switch jump ({0},{0}) must stay degenerate at zero")]
    DiagonalSwitchJump(usize),
    #[error("switch jump indices ({from},{to}) out of range for {n} regimes")]
    SwitchIndexOutOfRange { from: usize, to: usize, n: usize },
}

/// Distribution of a single jump; the moment generating function is
/// closed-form for every member of the family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpLaw {
    Degenerate {
        size: f64,
    },
    Gaussian {
        mean: f64,
        variance: f64,
    },
    TwoPoint {
        first: f64,
        prob_first: f64,
        second: f64,
    },
}

impl JumpLaw {
    pub fn zero() -> Self {
        JumpLaw::Degenerate { size: 0.0 }
    }

    fn validate(&self) -> Result<(), ModelError> {
        match *self {
            JumpLaw::Degenerate { .. } => Ok(()),
            JumpLaw::Gaussian { variance, .. } => {
                if variance < 0.0 {
                    Err(ModelError::NegativeVariance(variance))
                } else {
                    Ok(())
                }
            }
            JumpLaw::TwoPoint { prob_first, .. } => {
                if !(0.0..=1.0).contains(&prob_first) {
                    Err(ModelError::BadJumpProbability(prob_first))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// E[e^{zU}]
    pub fn mgf(&self, z: Complex64) -> Complex64 {
        match *self {
            JumpLaw::Degenerate { size } => (z * size).exp(),
            JumpLaw::Gaussian { mean, variance } => (z * mean + z * z * (variance / 2.0)).exp(),
            JumpLaw::TwoPoint {
                first,
                prob_first,
                second,
            } => (z * first).exp() * prob_first + (z * second).exp() * (1.0 - prob_first),
        }
    }

    pub fn mgf_real(&self, s: f64) -> f64 {
        match *self {
            JumpLaw::Degenerate { size } => (s * size).exp(),
            JumpLaw::Gaussian { mean, variance } => (s * mean + s * s * variance / 2.0).exp(),
            JumpLaw::TwoPoint {
                first,
                prob_first,
                second,
            } => prob_first * (s * first).exp() + (1.0 - prob_first) * (s * second).exp(),
        }
    }

    pub fn mgf_deriv_real(&self, s: f64) -> f64 {
        match *self {
            JumpLaw::Degenerate { size } => size * (s * size).exp(),
            JumpLaw::Gaussian { mean, variance } => {
                (mean + variance * s) * (s * mean + s * s * variance / 2.0).exp()
            }
            JumpLaw::TwoPoint {
                first,
                prob_first,
                second,
            } => {
                prob_first * first * (s * first).exp()
                    + (1.0 - prob_first) * second * (s * second).exp()
            }
        }
    }

    /// Law of -U; realizes the sign-flipped process within the family.
    pub fn negated(&self) -> Self {
        match *self {
            JumpLaw::Degenerate { size } => JumpLaw::Degenerate { size: -size },
            JumpLaw::Gaussian { mean, variance } => JumpLaw::Gaussian {
                mean: -mean,
                variance,
            },
            JumpLaw::TwoPoint {
                first,
                prob_first,
                second,
            } => JumpLaw::TwoPoint {
                first: -first,
                prob_first,
                second: -second,
            },
        }
    }
}

/// Per-regime Lévy triplet restricted to compound Poisson jumps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeExponent {
    pub drift: f64,
    pub diffusion_var: f64,
    pub jump_intensity: f64,
    pub jump_law: JumpLaw,
}

impl RegimeExponent {
    pub fn brownian(drift: f64, diffusion_var: f64) -> Self {
        RegimeExponent {
            drift,
            diffusion_var,
            jump_intensity: 0.0,
            jump_law: JumpLaw::zero(),
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.diffusion_var < 0.0 {
            return Err(ModelError::NegativeVariance(self.diffusion_var));
        }
        if self.jump_intensity < 0.0 {
            return Err(ModelError::NegativeIntensity(self.jump_intensity));
        }
        self.jump_law.validate()
    }

    /// ψ(z) = μz + σ²z²/2 + κ(E[e^{zU}] − 1); ψ(0) = 0 exactly.
    pub fn levy_exponent(&self, z: Complex64) -> Complex64 {
        z * self.drift
            + z * z * (self.diffusion_var / 2.0)
            + (self.jump_law.mgf(z) - 1.0) * self.jump_intensity
    }

    pub fn levy_exponent_real(&self, s: f64) -> f64 {
        self.drift * s
            + self.diffusion_var * s * s / 2.0
            + self.jump_intensity * (self.jump_law.mgf_real(s) - 1.0)
    }

    pub fn levy_exponent_deriv_real(&self, s: f64) -> f64 {
        self.drift + self.diffusion_var * s + self.jump_intensity * self.jump_law.mgf_deriv_real(s)
    }

    pub fn negated(&self) -> Self {
        RegimeExponent {
            drift: -self.drift,
            diffusion_var: self.diffusion_var,
            jump_intensity: self.jump_intensity,
            jump_law: self.jump_law.negated(),
        }
    }
}

/// Extra jump attached to a regime switch: fires with the given probability,
/// with size drawn from the jump law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionJump {
    pub probability: f64,
    pub jump_law: JumpLaw,
}

impl TransitionJump {
    pub fn none() -> Self {
        TransitionJump {
            probability: 0.0,
            jump_law: JumpLaw::zero(),
        }
    }

    /// E[e^{zV}] where V is the jump size U with the firing probability and 0
    /// otherwise; identically 1 when no jump is attached.
    pub fn transform(&self, z: Complex64) -> Complex64 {
        self.jump_law.mgf(z) * self.probability + (1.0 - self.probability)
    }

    pub fn transform_real(&self, s: f64) -> f64 {
        1.0 - self.probability + self.probability * self.jump_law.mgf_real(s)
    }

    pub fn transform_deriv_real(&self, s: f64) -> f64 {
        self.probability * self.jump_law.mgf_deriv_real(s)
    }

    pub fn negated(&self) -> Self {
        TransitionJump {
            probability: self.probability,
            jump_law: self.jump_law.negated(),
        }
    }
}

/// Evaluable matrix Laplace exponent: z ↦ A(z) with its entrywise derivative.
pub trait LaplaceExponent {
    fn dim(&self) -> usize;
    fn eval(&self, s: f64) -> DMatrix<f64>;
    fn deriv(&self, s: f64) -> DMatrix<f64>;
    fn eval_complex(&self, z: Complex64) -> DMatrix<Complex64>;
}

/// Laplace exponent of the sign-flipped process: s ↦ A(−s).
pub struct ReflectedExponent<'a, F: LaplaceExponent + ?Sized>(pub &'a F);

impl<F: LaplaceExponent + ?Sized> LaplaceExponent for ReflectedExponent<'_, F> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, s: f64) -> DMatrix<f64> {
        self.0.eval(-s)
    }

    fn deriv(&self, s: f64) -> DMatrix<f64> {
        -self.0.deriv(-s)
    }

    fn eval_complex(&self, z: Complex64) -> DMatrix<Complex64> {
        self.0.eval_complex(-z)
    }
}

/// Latent log-price dynamics: N regimes modulated by an irreducible
/// continuous-time chain, with optional jumps at regime switches.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulatedModel {
    regimes: Vec<RegimeExponent>,
    generator: DMatrix<f64>,
    switch_jumps: Vec<TransitionJump>, // row-major N x N, diagonal inert
    initial: DVector<f64>,
}

fn strongly_connected(edges: &DMatrix<f64>) -> bool {
    let n = edges.nrows();
    if n <= 1 {
        return true;
    }
    let reach = |transpose: bool| -> usize {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(j) = stack.pop() {
            for k in 0..n {
                let w = if transpose {
                    edges[(k, j)]
                } else {
                    edges[(j, k)]
                };
                if j != k && w > 0.0 && !seen[k] {
                    seen[k] = true;
                    count += 1;
                    stack.push(k);
                }
            }
        }
        count
    };
    reach(false) == n && reach(true) == n
}

impl ModulatedModel {
    pub fn new(
        regimes: Vec<RegimeExponent>,
        generator: DMatrix<f64>,
        initial: DVector<f64>,
    ) -> Result<Self, ModelError> {
        let n = regimes.len();
        if n == 0 || n > MAX_REGIMES {
            return Err(ModelError::BadRegimeCount(n));
        }
        if generator.shape() != (n, n) {
            return Err(ModelError::BadGeneratorShape {
                n,
                rows: generator.nrows(),
                cols: generator.ncols(),
            });
        }
        for regime in &regimes {
            regime.validate()?;
        }
        for j in 0..n {
            let sum: f64 = generator.row(j).iter().sum();
            if sum.abs() > SUM_TOL {
                return Err(ModelError::RowSumNonZero { row: j, sum });
            }
            for k in 0..n {
                if j != k && generator[(j, k)] < -SUM_TOL {
                    return Err(ModelError::NegativeOffDiagonal {
                        row: j,
                        col: k,
                        value: generator[(j, k)],
                    });
                }
            }
        }
        if !strongly_connected(&generator) {
            return Err(ModelError::NotIrreducible);
        }
        if initial.len() != n {
            return Err(ModelError::BadGeneratorShape {
                n,
                rows: initial.len(),
                cols: 1,
            });
        }
        for (i, &w) in initial.iter().enumerate() {
            if w < 0.0 {
                return Err(ModelError::NegativeInitialWeight { index: i, value: w });
            }
        }
        let total: f64 = initial.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(ModelError::InitialNotNormalized { sum: total });
        }
        Ok(ModulatedModel {
            switch_jumps: vec![TransitionJump::none(); n * n],
            regimes,
            generator,
            initial,
        })
    }

    /// Attach a jump to the switch `from -> to`.
    pub fn with_switch_jump(
        mut self,
        from: usize,
        to: usize,
        jump: TransitionJump,
    ) -> Result<Self, ModelError> {
        let n = self.dim();
        if from >= n || to >= n {
            return Err(ModelError::SwitchIndexOutOfRange { from, to, n });
        }
        if from == to {
            return Err(ModelError::DiagonalSwitchJump(from));
        }
        if !(0.0..=1.0).contains(&jump.probability) {
            return Err(ModelError::BadSwitchProbability(jump.probability));
        }
        jump.jump_law.validate()?;
        self.switch_jumps[from * n + to] = jump;
        Ok(self)
    }

    pub fn regimes(&self) -> &[RegimeExponent] {
        &self.regimes
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    pub fn initial_distribution(&self) -> &DVector<f64> {
        &self.initial
    }

    pub fn switch_jump(&self, from: usize, to: usize) -> &TransitionJump {
        &self.switch_jumps[from * self.dim() + to]
    }

    /// The model of −X; drifts and jump sizes flip sign, everything else stays.
    pub fn negated(&self) -> Self {
        let n = self.dim();
        let mut out = self.clone();
        out.regimes = self.regimes.iter().map(RegimeExponent::negated).collect();
        for j in 0..n {
            for k in 0..n {
                out.switch_jumps[j * n + k] = self.switch_jumps[j * n + k].negated();
            }
        }
        out
    }

    /// M_t(s) = w₀' e^{A(s)t} 1_N.
    pub fn mgf_at_time(&self, s: f64, t: f64) -> Result<f64, MatExpError> {
        assert!(t > 0.0, "time must be positive");
        let e = matexp(&(self.eval(s) * t))?;
        let ones = DVector::from_element(self.dim(), 1.0);
        Ok(self.initial.dot(&(e * ones)))
    }
}

impl LaplaceExponent for ModulatedModel {
    fn dim(&self) -> usize {
        self.regimes.len()
    }

    fn eval(&self, s: f64) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |j, k| {
            let mut v = self.generator[(j, k)] * self.switch_jumps[j * n + k].transform_real(s);
            if j == k {
                v += self.regimes[j].levy_exponent_real(s);
            }
            v
        })
    }

    fn deriv(&self, s: f64) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |j, k| {
            let mut v =
                self.generator[(j, k)] * self.switch_jumps[j * n + k].transform_deriv_real(s);
            if j == k {
                v += self.regimes[j].levy_exponent_deriv_real(s);
            }
            v
        })
    }

    fn eval_complex(&self, z: Complex64) -> DMatrix<Complex64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |j, k| {
            let mut v = self.switch_jumps[j * n + k].transform(z) * self.generator[(j, k)];
            if j == k {
                v += self.regimes[j].levy_exponent(z);
            }
            v
        })
    }
}
