//! Two-dimensional operator models on a shared truncated chaos space.
//!
//! Grade `n` of a two-factor model is spanned by the tensor words
//! `e_i ⊗ e_j` of total degree `i + j = n`, ordered by decreasing `i`.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{Matrix2, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded::{GradedOperator, GradedVector, Grading, OperatorSum, Term};
use crate::meixner1d::{ApcTriple, JacobiSpec, Preset};

pub const DEFAULT_TRUNCATION: usize = 12;

/// Relative tolerance on the Gram determinant of `{φ, Xφ, Yφ}`.
pub const NONDEGENERACY_TOLERANCE: f64 = 1e-9;

/// Parameters of two independent centered Meixner variables `T`, `Z`
/// (`α = 1`, `t' = 1`) whose preservation operators are mixed:
/// `a_x⁰ = p a_t⁰ + s' a_z⁰`, `a_y⁰ = r a_t⁰ + v a_z⁰`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedPreservationSpec {
    pub c: f64,
    pub d: f64,
    pub j: f64,
    pub k: f64,
    pub p: f64,
    pub r: f64,
    pub s_prime: f64,
    pub v: f64,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
}

impl MixedPreservationSpec {
    /// `α` and `t'` of the underlying factors.
    pub const FACTOR_ALPHA: f64 = 1.0;
    pub const FACTOR_T: f64 = 1.0;

    pub fn beta_t(&self) -> f64 {
        0.5 * (self.c * self.p + self.d * self.r)
    }

    pub fn beta_z(&self) -> f64 {
        0.5 * (self.j * self.s_prime + self.k * self.v)
    }

    pub fn with_truncation(self, n: usize) -> Self {
        MixedPreservationSpec {
            truncation: Some(n),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.c,
            self.d,
            self.j,
            self.k,
            self.p,
            self.r,
            self.s_prime,
            self.v,
        ];
        if vals.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidMixedSpec("parameters must be finite".into()));
        }
        let ortho = |a: f64, b: f64, c: f64, d: f64| {
            (a * c + b * d).abs() <= ORTHO_TOL * (1.0 + (a * c).abs() + (b * d).abs())
        };
        if !ortho(self.c, self.d, self.s_prime, self.v) {
            return Err(Error::InvalidMixedSpec(format!(
                "(c, d) must be orthogonal to (s', v): c s' + d v = {:e}",
                self.c * self.s_prime + self.d * self.v
            )));
        }
        if !ortho(self.j, self.k, self.p, self.r) {
            return Err(Error::InvalidMixedSpec(format!(
                "(j, k) must be orthogonal to (p, r): j p + k r = {:e}",
                self.j * self.p + self.k * self.r
            )));
        }
        factor_spec(self.beta_t()).map_err(|e| Error::InvalidMixedSpec(format!("T factor: {e}")))?;
        factor_spec(self.beta_z()).map_err(|e| Error::InvalidMixedSpec(format!("Z factor: {e}")))?;
        Ok(())
    }
}

const ORTHO_TOL: f64 = 1e-9;
/// Negative `β` within this distance of zero is treated as zero.
const BETA_SNAP: f64 = 1e-10;

/// The `α = 1`, `t = 1` factor with the given `β`. Negative `β` is only
/// admissible when it closes a Krawtchouk chain, `β = −1/(k − 1)`.
pub fn factor_spec(beta: f64) -> Result<JacobiSpec> {
    let (a, t) = (
        MixedPreservationSpec::FACTOR_ALPHA,
        MixedPreservationSpec::FACTOR_T,
    );
    if beta >= -BETA_SNAP {
        return Ok(JacobiSpec::infinite(a, beta.max(0.0), t));
    }
    let k = 1.0 - 1.0 / beta;
    let rounded = k.round();
    if rounded >= 2.0 && (k - rounded).abs() <= 1e-9 * rounded {
        Ok(JacobiSpec::finite(a, beta, t, rounded as usize))
    } else {
        Err(Error::InvalidSpec(format!(
            "beta = {beta} is negative and does not terminate a binomial chain"
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApcSystem {
    pub grading: Arc<Grading>,
    pub x: ApcTriple,
    pub y: ApcTriple,
    pub vacuum: GradedVector,
}

impl ApcSystem {
    pub fn new(x: ApcTriple, y: ApcTriple) -> Result<Self> {
        let grading = x.grading().clone();
        if y.grading() != &grading {
            return Err(Error::GradingMismatch);
        }
        let vacuum = GradedVector::vacuum(&grading);
        Ok(ApcSystem {
            grading,
            x,
            y,
            vacuum,
        })
    }

    pub fn truncation(&self) -> usize {
        self.grading.truncation()
    }

    pub fn triple(&self, var: Var) -> &ApcTriple {
        match var {
            Var::X => &self.x,
            Var::Y => &self.y,
        }
    }

    /// `a⁻ + a⁰ + a⁺` of the chosen variable.
    pub fn variable(&self, var: Var) -> OperatorSum {
        let t = self.triple(var);
        OperatorSum::new(
            &self.grading,
            vec![
                (1.0, Term::Op(t.minus.clone())),
                (1.0, Term::Op(t.zero.clone())),
                (1.0, Term::Op(t.plus.clone())),
            ],
        )
        .expect("shared grading")
    }

    /// `(E[X], E[Y]) = (⟨a_x⁰φ, φ⟩, ⟨a_y⁰φ, φ⟩)`.
    pub fn means(&self) -> (f64, f64) {
        let m = |op: &GradedOperator| op.block(0).map_or(0.0, |b| b[(0, 0)]);
        (m(&self.x.zero), m(&self.y.zero))
    }

    pub fn require_centered(&self) -> Result<()> {
        let (mx, my) = self.means();
        let scale = 1.0 + self.x.zero.norm() + self.y.zero.norm();
        if mx.abs() > 1e-10 * scale || my.abs() > 1e-10 * scale {
            return Err(Error::NotCentered {
                mean_x: mx,
                mean_y: my,
            });
        }
        Ok(())
    }

    /// `(X', Y') = M (X, Y)`, componentwise on each APC part, without an
    /// invertibility check.
    pub fn linear_combination(&self, m: &Matrix2<f64>) -> Result<ApcSystem> {
        let x = ApcTriple::combine(&[m[(0, 0)], m[(0, 1)]], &[&self.x, &self.y])?;
        let y = ApcTriple::combine(&[m[(1, 0)], m[(1, 1)]], &[&self.x, &self.y])?;
        Ok(ApcSystem {
            grading: self.grading.clone(),
            x,
            y,
            vacuum: self.vacuum.clone(),
        })
    }
}

/// Grade layout of a two-factor tensor model truncated at total degree
/// `level`, with a lookup from `(i, j)` to `(grade, index)`.
struct ProductLayout {
    grading: Arc<Grading>,
    words: Vec<Vec<(usize, usize)>>,
    index: HashMap<(usize, usize), usize>,
}

impl ProductLayout {
    fn new(len_x: Option<usize>, len_y: Option<usize>, level: usize) -> Result<Self> {
        let mut words = Vec::with_capacity(level + 1);
        let mut index = HashMap::new();
        for n in 0..=level {
            let grade: Vec<(usize, usize)> = (0..=n)
                .rev()
                .map(|i| (i, n - i))
                .filter(|&(i, j)| len_x.is_none_or(|k| i < k) && len_y.is_none_or(|k| j < k))
                .collect();
            for (idx, w) in grade.iter().enumerate() {
                index.insert(*w, idx);
            }
            words.push(grade);
        }
        let grading = Grading::new(words.iter().map(|w| w.len()).collect())?;
        Ok(ProductLayout {
            grading,
            words,
            index,
        })
    }

    /// Operator acting on one tensor factor: `(i, j) ↦ coeff · (i', j')`.
    fn factor_op(
        &self,
        shift: i32,
        action: impl Fn(usize, usize) -> Option<((usize, usize), f64)>,
    ) -> GradedOperator {
        let mut op = GradedOperator::zeros(&self.grading, shift);
        for (n, grade) in self.words.iter().enumerate() {
            let Some(block) = op.block_mut(n) else { continue };
            for (col, &(i, j)) in grade.iter().enumerate() {
                if let Some((target, coeff)) = action(i, j) {
                    if let Some(&row) = self.index.get(&target) {
                        block[(row, col)] = coeff;
                    }
                }
            }
        }
        op
    }
}

pub fn build_product(spec_x: &JacobiSpec, spec_y: &JacobiSpec, level: usize) -> Result<ApcSystem> {
    spec_x.validate(level)?;
    spec_y.validate(level)?;
    let layout = ProductLayout::new(spec_x.chain_len(), spec_y.chain_len(), level)?;

    let x_minus = layout.factor_op(-1, |i, j| {
        (i >= 1).then(|| ((i - 1, j), spec_x.omega_n(i).sqrt()))
    });
    let x_zero = layout.factor_op(0, |i, j| Some(((i, j), spec_x.alpha_n(i))));
    let y_minus = layout.factor_op(-1, |i, j| {
        (j >= 1).then(|| ((i, j - 1), spec_y.omega_n(j).sqrt()))
    });
    let y_zero = layout.factor_op(0, |i, j| Some(((i, j), spec_y.alpha_n(j))));

    let x = ApcTriple {
        plus: x_minus.adjoint(),
        minus: x_minus,
        zero: x_zero,
    };
    let y = ApcTriple {
        plus: y_minus.adjoint(),
        minus: y_minus,
        zero: y_zero,
    };
    ApcSystem::new(x, y)
}

pub fn build_mixed(spec: &MixedPreservationSpec) -> Result<ApcSystem> {
    spec.validate()?;
    let level = spec.truncation.unwrap_or(DEFAULT_TRUNCATION);
    let t = factor_spec(spec.beta_t())?;
    let z = factor_spec(spec.beta_z())?;
    let base = build_product(&t, &z, level)?;
    let x = ApcTriple {
        minus: base.x.minus.clone(),
        zero: GradedOperator::linear_combination(
            &[spec.p, spec.s_prime],
            &[&base.x.zero, &base.y.zero],
        )?,
        plus: base.x.plus.clone(),
    };
    let y = ApcTriple {
        minus: base.y.minus.clone(),
        zero: GradedOperator::linear_combination(&[spec.r, spec.v], &[&base.x.zero, &base.y.zero])?,
        plus: base.y.plus.clone(),
    };
    ApcSystem::new(x, y)
}

pub fn mix_linear(sys: &ApcSystem, m: &Matrix2<f64>) -> Result<ApcSystem> {
    let det = m.determinant();
    if !det.is_finite() || det.abs() <= 1e-12 * m.norm_squared() || m.norm_squared() == 0.0 {
        return Err(Error::SingularMatrix(det));
    }
    sys.linear_combination(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonDegeneracy {
    pub ok: bool,
    pub gram_det: f64,
}

pub fn check_nondegenerate(sys: &ApcSystem) -> NonDegeneracy {
    let phi = &sys.vacuum;
    let xphi = sys.variable(Var::X).apply(phi).expect("shared grading").vector;
    let yphi = sys.variable(Var::Y).apply(phi).expect("shared grading").vector;
    let vs = [phi, &xphi, &yphi];
    let gram = Matrix3::from_fn(|i, j| vs[i].inner(vs[j]).expect("shared grading"));
    let gram_det = gram.determinant();
    let diag = gram[(0, 0)] * gram[(1, 1)] * gram[(2, 2)];
    NonDegeneracy {
        ok: diag > 0.0 && gram_det > NONDEGENERACY_TOLERANCE * diag,
        gram_det,
    }
}

/// A one-dimensional factor given either by preset name or explicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FactorSpec {
    Preset(String),
    Explicit(JacobiSpec),
}

impl FactorSpec {
    pub fn resolve(&self) -> Result<JacobiSpec> {
        match self {
            FactorSpec::Explicit(s) => Ok(*s),
            FactorSpec::Preset(name) => Preset::from_name(name)
                .map(Preset::spec)
                .ok_or_else(|| Error::InvalidSpec(format!("unknown preset `{name}`"))),
        }
    }
}

/// Declarative description of a two-dimensional system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemSpec {
    Product {
        x: FactorSpec,
        y: FactorSpec,
        #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
        truncation: Option<usize>,
    },
    Mixed(MixedPreservationSpec),
    LinearMix {
        matrix: [[f64; 2]; 2],
        base: Box<SystemSpec>,
    },
}

impl SystemSpec {
    /// Truncation named in the spec itself, if any.
    pub fn truncation(&self) -> Option<usize> {
        match self {
            SystemSpec::Product { truncation, .. } => *truncation,
            SystemSpec::Mixed(m) => m.truncation,
            SystemSpec::LinearMix { base, .. } => base.truncation(),
        }
    }

    /// Builds the system; `default_truncation` applies where the spec does
    /// not name one.
    pub fn build(&self, default_truncation: usize) -> Result<ApcSystem> {
        match self {
            SystemSpec::Product { x, y, truncation } => build_product(
                &x.resolve()?,
                &y.resolve()?,
                truncation.unwrap_or(default_truncation),
            ),
            SystemSpec::Mixed(m) => {
                let m = MixedPreservationSpec {
                    truncation: Some(m.truncation.unwrap_or(default_truncation)),
                    ..*m
                };
                build_mixed(&m)
            }
            SystemSpec::LinearMix { matrix, base } => {
                let m = Matrix2::new(matrix[0][0], matrix[0][1], matrix[1][0], matrix[1][1]);
                mix_linear(&base.build(default_truncation)?, &m)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graded::{bracket, commutator};

    fn example2() -> MixedPreservationSpec {
        MixedPreservationSpec {
            c: 1.0,
            d: 0.0,
            j: 0.0,
            k: 1.0,
            p: 1.0,
            r: 0.0,
            s_prime: 0.0,
            v: 1.0,
            truncation: Some(8),
        }
    }

    #[test]
    fn product_layout_dims() {
        let g = JacobiSpec::gaussian();
        let sys = build_product(&g, &g, 6).unwrap();
        assert_eq!(sys.grading.dims(), &[1, 2, 3, 4, 5, 6, 7]);
        let c = bracket(&sys.x.minus, &sys.y.plus).unwrap();
        assert_eq!(c.max_abs_valid(), 0.0);
        let k2 = JacobiSpec::finite(0.5, -0.25, 0.25, 2);
        let fin = build_product(&k2, &k2, 5).unwrap();
        assert_eq!(fin.grading.dims(), &[1, 2, 1, 0, 0, 0]);
    }

    #[test]
    fn product_cross_brackets_vanish() {
        let sys = build_product(
            &JacobiSpec::infinite(1.0, 0.5, 1.0),
            &JacobiSpec::finite(1.0, -0.5, 1.0, 3),
            7,
        )
        .unwrap();
        for a in [&sys.x.minus, &sys.x.zero, &sys.x.plus] {
            for b in [&sys.y.minus, &sys.y.zero, &sys.y.plus] {
                assert!(bracket(a, b).unwrap().max_abs_valid() < 1e-14);
            }
        }
    }

    #[test]
    fn example2_beta_and_bracket() {
        let spec = example2();
        assert_eq!(spec.beta_t(), 0.5);
        assert_eq!(spec.beta_z(), 0.5);
        let sys = build_mixed(&spec).unwrap();
        let lhs = bracket(&sys.x.minus, &sys.x.plus).unwrap();
        let rhs = sys
            .x
            .zero
            .add_scaled(1.0, &GradedOperator::identity(&sys.grading))
            .unwrap();
        assert!(lhs.max_abs_diff_valid(&rhs).unwrap() < 1e-10);
    }

    #[test]
    fn mixed_with_r_s_zero_is_a_product() {
        let spec = MixedPreservationSpec {
            c: 1.0,
            d: 0.0,
            j: 0.0,
            k: 2.0,
            p: 0.6,
            r: 0.0,
            s_prime: 0.0,
            v: 1.5,
            truncation: Some(7),
        };
        let mixed = build_mixed(&spec).unwrap();
        let product = build_product(
            &JacobiSpec::infinite(0.6, spec.beta_t(), 1.0),
            &JacobiSpec::infinite(1.5, spec.beta_z(), 1.0),
            7,
        )
        .unwrap();
        assert_eq!(mixed.x.minus, product.x.minus);
        assert!(mixed.x.zero.max_abs_diff_valid(&product.x.zero).unwrap() < 1e-14);
        assert!(mixed.y.zero.max_abs_diff_valid(&product.y.zero).unwrap() < 1e-14);
        let xy = commutator(mixed.variable(Var::X), mixed.variable(Var::Y)).unwrap();
        assert!(xy.max_abs_valid() < 1e-12);
    }

    #[test]
    fn rejects_bad_mixed_specs() {
        let mut s = example2();
        s.s_prime = 1.0;
        assert!(matches!(build_mixed(&s), Err(Error::InvalidMixedSpec(_))));
        let mut s = example2();
        // β_T = −0.3 is neither ≥ 0 nor of the form 1/(1 − k)
        s.c = -0.6;
        assert!(build_mixed(&s).is_err());
        let mut s = example2();
        s.c = -1.0;
        let sys = build_mixed(&s).unwrap();
        assert_eq!(sys.grading.dims()[4], 3);
    }

    #[test]
    fn krawtchouk_factor() {
        let f = factor_spec(-0.5).unwrap();
        assert_eq!(f.support, crate::meixner1d::Support::Finite(3));
        assert!(factor_spec(-0.3).is_err());
        assert_eq!(factor_spec(-1e-14).unwrap().beta, 0.0);
    }

    #[test]
    fn mixing_composes() {
        let sys = build_mixed(&example2()).unwrap();
        let m1 = Matrix2::new(1.0, 2.0, -0.5, 1.0);
        let m2 = Matrix2::new(0.3, 0.0, 1.0, -2.0);
        let a = mix_linear(&mix_linear(&sys, &m1).unwrap(), &m2).unwrap();
        let b = mix_linear(&sys, &(m2 * m1)).unwrap();
        assert!(a.x.zero.max_abs_diff_valid(&b.x.zero).unwrap() < 1e-12);
        assert!(a.y.minus.max_abs_diff_valid(&b.y.minus).unwrap() < 1e-12);
        assert_eq!(mix_linear(&sys, &Matrix2::identity()).unwrap(), sys);
        assert!(mix_linear(&sys, &Matrix2::new(1.0, 0.0, 2.0, 0.0)).is_err());
    }

    #[test]
    fn nondegeneracy() {
        let g = JacobiSpec::gaussian();
        let sys = build_product(&g, &g, 6).unwrap();
        let nd = check_nondegenerate(&sys);
        assert!(nd.ok);
        assert!((nd.gram_det - 1.0).abs() < 1e-14);
        let bad = sys
            .linear_combination(&Matrix2::new(1.0, 0.0, 2.0, 0.0))
            .unwrap();
        assert!(!check_nondegenerate(&bad).ok);
    }

    #[test]
    fn system_spec_json() {
        let s: SystemSpec = serde_json::from_str(
            r#"{"kind":"linear_mix","matrix":[[1,2],[0,1]],
                "base":{"kind":"product","x":"gaussian","y":{"alpha":1,"beta":0,"t":1,"support":"infinite"}}}"#,
        )
        .unwrap();
        let sys = s.build(6).unwrap();
        assert_eq!(sys.truncation(), 6);
        let m: SystemSpec = serde_json::from_str(
            r#"{"kind":"mixed","c":1,"d":0,"j":0,"k":1,"p":1,"r":0,"s_prime":0,"v":1,"N":5}"#,
        )
        .unwrap();
        assert_eq!(m.build(12).unwrap().truncation(), 5);
    }
}
