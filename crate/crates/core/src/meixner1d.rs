//! One-dimensional Meixner families.
//!
//! A centered Meixner variable is fixed by its three-term recurrence
//! coefficients `α_n = α n + α₀` and `ω_n = β n² + (t − β) n`. In the
//! orthonormal polynomial basis the annihilation, preservation and creation
//! operators are a single tridiagonal chain:
//!
//! ```text
//! a⁺ e_n = √ω_{n+1} e_{n+1},   a⁰ e_n = α_n e_n,   a⁻ e_n = √ω_n e_{n−1}.
//! ```
//!
//! Finite support `k` cuts the chain after grade `k − 1`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_in_span, SpanMember};
use crate::graded::{bracket, GradedOperator, Grading};

/// Relative residual below which a least-squares bracket fit counts as an
/// exact identity.
pub const CLOSURE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Support {
    Infinite,
    Finite(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiSpec {
    pub alpha: f64,
    #[serde(default)]
    pub alpha0: f64,
    pub beta: f64,
    pub t: f64,
    pub support: Support,
}

impl JacobiSpec {
    pub fn infinite(alpha: f64, beta: f64, t: f64) -> Self {
        JacobiSpec {
            alpha,
            alpha0: 0.0,
            beta,
            t,
            support: Support::Infinite,
        }
    }

    pub fn finite(alpha: f64, beta: f64, t: f64, k: usize) -> Self {
        JacobiSpec {
            alpha,
            alpha0: 0.0,
            beta,
            t,
            support: Support::Finite(k),
        }
    }

    pub fn gaussian() -> Self {
        Self::infinite(0.0, 0.0, 1.0)
    }

    pub fn centered(&self) -> Self {
        JacobiSpec {
            alpha0: 0.0,
            ..*self
        }
    }

    /// Number of nonzero grades in the chain (`None` for infinite support).
    pub fn chain_len(&self) -> Option<usize> {
        match self.support {
            Support::Infinite => None,
            Support::Finite(k) => Some(k),
        }
    }

    pub fn alpha_n(&self, n: usize) -> f64 {
        match self.support {
            Support::Finite(k) if n >= k => 0.0,
            _ => self.alpha * n as f64 + self.alpha0,
        }
    }

    pub fn omega_n(&self, n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        match self.support {
            Support::Finite(k) if n >= k => 0.0,
            _ => {
                let n = n as f64;
                self.beta * n * n + (self.t - self.beta) * n
            }
        }
    }

    /// Checks positivity of `ω_n` over the grades a truncation at `level`
    /// can see.
    pub fn validate(&self, level: usize) -> Result<()> {
        let finite = [self.alpha, self.alpha0, self.beta, self.t]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidSpec("parameters must be finite".into()));
        }
        match self.support {
            Support::Infinite => {
                if self.beta < 0.0 {
                    return Err(Error::InvalidSpec(format!(
                        "infinite support requires beta >= 0, got {}",
                        self.beta
                    )));
                }
                if self.t <= 0.0 {
                    return Err(Error::InvalidSpec(format!(
                        "infinite support requires t > 0, got {}",
                        self.t
                    )));
                }
            }
            Support::Finite(0) => {
                return Err(Error::InvalidSpec("support size must be at least 1".into()))
            }
            Support::Finite(1) => {}
            Support::Finite(k) => {
                if self.t <= 0.0 {
                    return Err(Error::InvalidSpec(format!(
                        "finite support requires t > 0, got {}",
                        self.t
                    )));
                }
                // ω_n > 0 for 1 ≤ n ≤ k − 1, i.e. t + β(k − 2) > 0
                if let Some(n) = (1..k).find(|&n| self.omega_n(n) <= 0.0) {
                    return Err(Error::InvalidSpec(format!(
                        "omega_{n} = {} must be positive below the support size {k}",
                        self.omega_n(n)
                    )));
                }
            }
        }
        if let Some(n) = (1..=level.min(self.chain_len().map_or(level, |k| k - 1)))
            .find(|&n| self.omega_n(n) <= 0.0)
        {
            return Err(Error::InvalidSpec(format!(
                "omega_{n} = {} is not positive",
                self.omega_n(n)
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MeixnerClass {
    /// Infinite support with `α ≠ 0` or `α = β = 0`.
    #[serde(rename = "U_f")]
    UFinite,
    /// Infinite support, `α = 0`, `β ≠ 0` (symmetric hyperbolic secant).
    #[serde(rename = "U_inf")]
    UInfinite,
    /// Finite support, `α ≠ 0`, `t = −β(k − 1)` (non-symmetric binomial).
    #[serde(rename = "B_f")]
    BFinite,
    /// Finite support and symmetric (`α = 0`); includes point masses.
    #[serde(rename = "B_inf")]
    BInfinite,
    /// Finite support, `α ≠ 0`, but the chain end violates `t = −β(k − 1)`.
    NotMeixnerLie,
}

impl MeixnerClass {
    /// Membership in `M_L = M_{u,f} ∪ M_{b,f}`.
    pub fn is_meixner_lie(self) -> bool {
        matches!(self, MeixnerClass::UFinite | MeixnerClass::BFinite)
    }

    pub fn tag(self) -> &'static str {
        match self {
            MeixnerClass::UFinite => "U_f",
            MeixnerClass::UInfinite => "U_inf",
            MeixnerClass::BFinite => "B_f",
            MeixnerClass::BInfinite => "B_inf",
            MeixnerClass::NotMeixnerLie => "NotMeixnerLie",
        }
    }
}

impl fmt::Display for MeixnerClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

const PARAM_EPS: f64 = 1e-12;

pub fn classify1d(spec: &JacobiSpec) -> MeixnerClass {
    let zero = |x: f64| x.abs() <= PARAM_EPS;
    match spec.support {
        Support::Infinite => {
            if !zero(spec.alpha) || zero(spec.beta) {
                MeixnerClass::UFinite
            } else {
                MeixnerClass::UInfinite
            }
        }
        Support::Finite(k) => {
            if k <= 1 || zero(spec.alpha) {
                MeixnerClass::BInfinite
            } else if (spec.t + spec.beta * (k as f64 - 1.0)).abs()
                <= PARAM_EPS * (1.0 + spec.t.abs())
            {
                MeixnerClass::BFinite
            } else {
                MeixnerClass::NotMeixnerLie
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApcTriple {
    pub minus: GradedOperator,
    pub zero: GradedOperator,
    pub plus: GradedOperator,
}

impl ApcTriple {
    pub fn grading(&self) -> &Arc<Grading> {
        self.minus.grading()
    }

    /// Componentwise `Σ cᵢ · tripleᵢ`.
    pub fn combine(coeffs: &[f64], triples: &[&ApcTriple]) -> Result<ApcTriple> {
        let pick = |f: fn(&ApcTriple) -> &GradedOperator| -> Result<GradedOperator> {
            let ops: Vec<&GradedOperator> = triples.iter().map(|t| f(t)).collect();
            GradedOperator::linear_combination(coeffs, &ops)
        };
        Ok(ApcTriple {
            minus: pick(|t| &t.minus)?,
            zero: pick(|t| &t.zero)?,
            plus: pick(|t| &t.plus)?,
        })
    }
}

/// Grade dimensions of a single chain truncated at `level`.
pub fn chain_dims(spec: &JacobiSpec, level: usize) -> Vec<usize> {
    (0..=level)
        .map(|n| match spec.chain_len() {
            Some(k) if n >= k => 0,
            _ => 1,
        })
        .collect()
}

pub fn build_triple(spec: &JacobiSpec, level: usize) -> Result<ApcTriple> {
    spec.validate(level)?;
    let grading = Grading::new(chain_dims(spec, level))?;
    let mut minus = GradedOperator::zeros(&grading, -1);
    let mut zero = GradedOperator::zeros(&grading, 0);
    for n in 0..=level {
        if grading.dim(n) == 0 {
            break;
        }
        zero.block_mut(n).expect("in range")[(0, 0)] = spec.alpha_n(n);
        if n >= 1 {
            minus.block_mut(n).expect("in range")[(0, 0)] = spec.omega_n(n).sqrt();
        }
    }
    let plus = minus.adjoint();
    Ok(ApcTriple { minus, zero, plus })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LieClosure1d {
    pub closed: bool,
    pub alpha_fit: f64,
    pub q_fit: f64,
    pub s_fit: f64,
    pub residual: f64,
}

/// Fits `[a⁻, a⁰] = α a⁻` and `[a⁻, a⁺] = q a⁰ + s I` over the valid
/// grades of the triple.
pub fn lie_closure_1d(triple: &ApcTriple) -> Result<LieClosure1d> {
    let g = triple.grading();
    if g.truncation() < 4 && !g.is_terminated() {
        return Err(Error::TruncationTooSmall {
            truncation: g.truncation(),
            reason: "one-dimensional closure fits need N >= 4".into(),
        });
    }
    let mz = bracket(&triple.minus, &triple.zero)?;
    let mp = bracket(&triple.minus, &triple.plus)?;
    let scale_mz = triple.minus.norm() * triple.zero.norm();
    let scale_mp = triple.minus.norm() * triple.plus.norm();
    let first = fit_in_span(&mz, &[SpanMember::Op(&triple.minus)], scale_mz)?;
    let second = fit_in_span(
        &mp,
        &[SpanMember::Op(&triple.zero), SpanMember::Identity],
        scale_mp,
    )?;
    let residual = first.residual.max(second.residual);
    Ok(LieClosure1d {
        closed: residual < CLOSURE_TOLERANCE,
        alpha_fit: first.coeffs[0],
        q_fit: second.coeffs[0],
        s_fit: second.coeffs[1],
        residual,
    })
}

/// Named classical families, centered, with their recurrence parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Gaussian,
    Poisson,
    Gamma,
    NegativeBinomial,
    Binomial,
    HyperbolicSecant,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Gaussian,
        Preset::Poisson,
        Preset::Gamma,
        Preset::NegativeBinomial,
        Preset::Binomial,
        Preset::HyperbolicSecant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Gaussian => "gaussian",
            Preset::Poisson => "poisson",
            Preset::Gamma => "gamma",
            Preset::NegativeBinomial => "negative_binomial",
            Preset::Binomial => "binomial",
            Preset::HyperbolicSecant => "hyperbolic_secant",
        }
    }

    pub fn from_name(name: &str) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.name() == name)
    }

    /// The distribution the parameters describe (before centering).
    pub fn description(self) -> &'static str {
        match self {
            Preset::Gaussian => "standard normal N(0, 1)",
            Preset::Poisson => "Poisson(1) (Charlier)",
            Preset::Gamma => "Exponential(1) = Gamma(1, 1) (Laguerre)",
            Preset::NegativeBinomial => "geometric, negative binomial r = 1, p = 1/2 (Meixner)",
            Preset::Binomial => "Binomial(4, 1/4) (Krawtchouk)",
            Preset::HyperbolicSecant => "hyperbolic secant, density sech(pi x / 2) / 2 (Meixner-Pollaczek)",
        }
    }

    pub fn spec(self) -> JacobiSpec {
        match self {
            Preset::Gaussian => JacobiSpec::infinite(0.0, 0.0, 1.0),
            // α_n = n + λ, ω_n = λ n with λ = 1
            Preset::Poisson => JacobiSpec::infinite(1.0, 0.0, 1.0),
            // α_n = 2n + θ, ω_n = n(n + θ − 1) with θ = 1
            Preset::Gamma => JacobiSpec::infinite(2.0, 1.0, 1.0),
            // α_n = ((1 + c)n + rc)/(1 − c), ω_n = c n (n + r − 1)/(1 − c)² with r = 1, c = 1/2
            Preset::NegativeBinomial => JacobiSpec::infinite(3.0, 2.0, 2.0),
            // α_n = pK + n(1 − 2p), ω_n = p(1 − p) n (K + 1 − n) with K = 4, p = 1/4
            Preset::Binomial => JacobiSpec::finite(0.5, -3.0 / 16.0, 0.75, 5),
            // α_n = 0, ω_n = n²
            Preset::HyperbolicSecant => JacobiSpec::infinite(0.0, 1.0, 1.0),
        }
    }

    /// Mean of the uncentered distribution (the dropped `α₀`).
    pub fn mean(self) -> f64 {
        match self {
            Preset::Gaussian | Preset::HyperbolicSecant => 0.0,
            Preset::Poisson | Preset::Gamma | Preset::Binomial | Preset::NegativeBinomial => 1.0,
        }
    }
}
