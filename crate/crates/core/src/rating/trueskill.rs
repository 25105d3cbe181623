//! Two-player TrueSkill: closed-form Gaussian update with an optional draw
//! margin.

use serde::{Deserialize, Serialize};

use crate::error::{ArenaError, Result};

pub const DEFAULT_MU: f64 = 25.0;
pub const DEFAULT_SIGMA: f64 = 25.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rating {
    pub mu: f64,
    pub sigma: f64,
}

impl Rating {
    pub fn new(mu: f64, sigma: f64) -> Self {
        Rating { mu, sigma }
    }

    /// Conservative skill estimate `mu - k*sigma`.
    pub fn lower(&self, k: f64) -> f64 {
        self.mu - k * self.sigma
    }

    pub fn upper(&self, k: f64) -> f64 {
        self.mu + k * self.sigma
    }
}

impl Default for Rating {
    fn default() -> Self {
        Rating::new(DEFAULT_MU, DEFAULT_SIGMA)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrueskillParams {
    pub mu0: f64,
    pub sigma0: f64,
    /// Performance noise.
    pub beta: f64,
    /// Additive dynamics applied to sigma before each update.
    pub tau: f64,
    /// Probability of a draw between equal players, in [0, 1).
    pub draw_probability: f64,
}

impl Default for TrueskillParams {
    fn default() -> Self {
        TrueskillParams {
            mu0: DEFAULT_MU,
            sigma0: DEFAULT_SIGMA,
            beta: DEFAULT_SIGMA / 2.0,
            tau: 0.0,
            draw_probability: 0.0,
        }
    }
}

impl TrueskillParams {
    pub fn with_draw_probability(mut self, eps: f64) -> Self {
        self.draw_probability = eps;
        self
    }

    pub fn initial(&self) -> Rating {
        Rating::new(self.mu0, self.sigma0)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.beta > 0.0
            && self.sigma0 > 0.0
            && self.tau >= 0.0
            && (0.0..1.0).contains(&self.draw_probability)
            && [self.mu0, self.sigma0, self.beta, self.tau].iter().all(|x| x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(ArenaError::InvalidInput(format!(
                "invalid TrueSkill parameters {self:?}"
            )))
        }
    }

    /// Draw margin for a 1v1 game.
    pub fn draw_margin(&self) -> f64 {
        norm_ppf((self.draw_probability + 1.0) / 2.0) * std::f64::consts::SQRT_2 * self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchResult {
    AWins,
    BWins,
    Draw,
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Inverse standard normal CDF: rational initial guess refined by Halley steps.
pub fn norm_ppf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    if p == 0.5 {
        return 0.0;
    }
    // Acklam's coefficients.
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let lo = 0.02425;
    let mut x = if p < lo {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - lo {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    for _ in 0..2 {
        let e = norm_cdf(x) - p;
        let u = e * (2.0 * std::f64::consts::PI).sqrt() * (x * x / 2.0).exp();
        x -= u / (1.0 + x * u / 2.0);
    }
    x
}

/// Mean correction for a win with performance gap `t` and margin `e`.
pub fn v_win(t: f64, e: f64) -> f64 {
    let x = t - e;
    let denom = norm_cdf(x);
    if denom < 1e-300 {
        // Asymptotic phi(x)/Phi(x) ~ -x for very negative x.
        return -x;
    }
    norm_pdf(x) / denom
}

pub fn w_win(t: f64, e: f64) -> f64 {
    let v = v_win(t, e);
    v * (v + t - e)
}

/// Mean correction for a draw.
pub fn v_draw(t: f64, e: f64) -> f64 {
    let denom = norm_cdf(e - t) - norm_cdf(-e - t);
    if denom < 1e-12 {
        // Limit of a vanishing margin: the performance gap is pinned to zero.
        return -t;
    }
    (norm_pdf(-e - t) - norm_pdf(e - t)) / denom
}

pub fn w_draw(t: f64, e: f64) -> f64 {
    let denom = norm_cdf(e - t) - norm_cdf(-e - t);
    if denom < 1e-12 {
        return 1.0;
    }
    let v = v_draw(t, e);
    v * v + ((e - t) * norm_pdf(e - t) + (e + t) * norm_pdf(e + t)) / denom
}

/// Updates both ratings after one game.
pub fn trueskill_update_1v1(
    a: Rating,
    b: Rating,
    result: MatchResult,
    params: &TrueskillParams,
) -> Result<(Rating, Rating)> {
    params.validate()?;
    if !(a.sigma > 0.0 && b.sigma > 0.0 && a.mu.is_finite() && b.mu.is_finite()) {
        return Err(ArenaError::InvalidInput("ratings must be finite with sigma > 0".into()));
    }
    let tau2 = params.tau * params.tau;
    let var_a = a.sigma * a.sigma + tau2;
    let var_b = b.sigma * b.sigma + tau2;
    let c2 = 2.0 * params.beta * params.beta + var_a + var_b;
    let c = c2.sqrt();
    let e = params.draw_margin() / c;

    let (winner, loser, var_w, var_l, swapped) = match result {
        MatchResult::BWins => (b, a, var_b, var_a, true),
        _ => (a, b, var_a, var_b, false),
    };
    let t = (winner.mu - loser.mu) / c;
    let (v, w) = match result {
        MatchResult::Draw => (v_draw(t, e), w_draw(t, e)),
        _ => (v_win(t, e), w_win(t, e)),
    };
    let new_w = Rating::new(
        winner.mu + var_w / c * v,
        (var_w * (1.0 - var_w / c2 * w)).sqrt(),
    );
    let new_l = Rating::new(
        loser.mu - var_l / c * v,
        (var_l * (1.0 - var_l / c2 * w)).sqrt(),
    );
    for r in [new_w, new_l] {
        if !(r.mu.is_finite() && r.sigma.is_finite() && r.sigma > 0.0) {
            return Err(ArenaError::InvalidInput(format!(
                "non-finite TrueSkill update from {a:?} vs {b:?}"
            )));
        }
    }
    Ok(if swapped { (new_l, new_w) } else { (new_w, new_l) })
}
