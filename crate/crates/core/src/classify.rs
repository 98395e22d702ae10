//! Reduction of a two-dimensional `M_L` vector to a pair of independent
//! Meixner variables with mixed preservation operators.
//!
//! The pipeline is: rescale to unit variances, remove the mixed
//! annihilation couplings `q, s, r', u` with a linear change of variables
//! read off a homogeneous quadratic, rescale again, and in the
//! `γ = δ = 0` branch rotate to zero covariance. The result is certified by
//! comparing joint moments with the reconstructed normal form.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::apc::{moment, moment_equal, MomentEquality, Word};
use crate::error::{Error, Result};
use crate::fit::{fit_in_span, SpanMember};
use crate::graded::number_operator;
use crate::lie::{check_ml, extract_coefficients, StructureCoefficients};
use crate::vectors2d::{build_mixed, check_nondegenerate, mix_linear, ApcSystem, MixedPreservationSpec};

pub const DEFAULT_DEGREE: usize = 8;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;
/// `normalize` rejects `|e| ≥ 1 − CORRELATION_MARGIN`.
pub const CORRELATION_MARGIN: f64 = 1e-9;
/// Absolute bound on `q, s, r', u` after the coupling stage.
pub const COUPLING_TOLERANCE: f64 = 1e-8;
/// Smallest discriminant accepted by the coupling stage.
pub const DISCRIMINANT_FLOOR: f64 = 1e-10;

pub type Mat2 = [[f64; 2]; 2];

fn to_rows(m: &Matrix2<f64>) -> Mat2 {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

fn is_identity(m: &Matrix2<f64>, tol: f64) -> bool {
    (m - Matrix2::identity()).abs().max() <= tol
}

/// Second moments `(E[X²], E[Y²], E[XY])`.
fn second_moments(sys: &ApcSystem) -> Result<(f64, f64, f64)> {
    let w = |s: &str| s.parse::<Word>().expect("literal word");
    Ok((
        moment(sys, &w("xx"))?,
        moment(sys, &w("yy"))?,
        moment(sys, &w("xy"))?,
    ))
}

/// Rescales to `E[X²] = E[Y²] = 1` and returns the rescaled system with
/// the diagonal matrix used.
pub fn normalize(sys: &ApcSystem) -> Result<(ApcSystem, Matrix2<f64>)> {
    sys.require_centered()?;
    let nd = check_nondegenerate(sys);
    if !nd.ok {
        return Err(Error::Degenerate(format!(
            "Gram determinant of (1, X, Y) is {:e}",
            nd.gram_det
        )));
    }
    let (b, h, _) = second_moments(sys)?;
    if !(b > 0.0 && h > 0.0) {
        return Err(Error::Degenerate(format!(
            "E[X^2] = {b:e}, E[Y^2] = {h:e}"
        )));
    }
    let m = Matrix2::new(1.0 / b.sqrt(), 0.0, 0.0, 1.0 / h.sqrt());
    let out = if is_identity(&m, 1e-15) {
        sys.clone()
    } else {
        mix_linear(sys, &m)?
    };
    let (_, _, e) = second_moments(&out)?;
    if e.abs() >= 1.0 - CORRELATION_MARGIN {
        return Err(Error::Degenerate(format!(
            "normalized covariance e = {e} is not strictly inside (-1, 1)"
        )));
    }
    Ok((out, m))
}

/// Data of the coupling-elimination stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticStage {
    /// `"r'"` for `r'β² − γβα − qα² = 0`, `"u"` for `uβ² + δβα − sα² = 0`.
    pub equation: String,
    /// `γ² + 4r'q`.
    pub discriminant_r: f64,
    /// `δ² + 4us`.
    pub discriminant_u: f64,
    /// `(α, β)` of the two roots, in stage-matrix row order.
    pub roots: [[f64; 2]; 2],
}

/// Roots `(α, β)` of `Aβ² + Bβα + Cα² = 0`, normalized to unit length
/// with the first nonzero entry positive, sorted by `β/α` with `α = 0`
/// last.
fn projective_roots(a: f64, b: f64, c: f64) -> Result<[[f64; 2]; 2]> {
    let disc = b * b - 4.0 * a * c;
    let scale = a.abs().max(b.abs()).max(c.abs());
    if disc.is_nan() || disc <= DISCRIMINANT_FLOOR * scale * scale {
        return Err(Error::NonPositiveDiscriminant(disc));
    }
    let sq = disc.sqrt();
    let qq = -0.5 * (b + b.signum() * sq);
    let qq = if b == 0.0 { -0.5 * sq } else { qq };
    // solve in whichever affine chart keeps the leading coefficient large
    let mut roots: Vec<[f64; 2]> = if a.abs() >= c.abs() {
        vec![[1.0, qq / a], [1.0, c / qq]]
    } else {
        vec![[qq / c, 1.0], [a / qq, 1.0]]
    };
    for r in roots.iter_mut() {
        let n = r[0].hypot(r[1]);
        let sign = if r[0].abs() > 1e-300 { r[0].signum() } else { r[1].signum() };
        *r = [sign * r[0] / n, sign * r[1] / n];
        if r[0].abs() < 1e-15 {
            *r = [0.0, 1.0];
        }
    }
    let key = |r: &[f64; 2]| {
        if r[0] == 0.0 {
            f64::INFINITY
        } else {
            r[1] / r[0]
        }
    };
    roots.sort_by(|x, y| key(x).total_cmp(&key(y)));
    Ok([roots[0], roots[1]])
}

/// Outcome of [`eliminate_couplings`]: the new system and the matrix
/// `D₂ M` (quadratic mix followed by rescale).
#[derive(Debug, Clone)]
pub struct Elimination {
    pub system: ApcSystem,
    pub mix: Matrix2<f64>,
    pub rescale: Matrix2<f64>,
    pub quadratic: Option<QuadraticStage>,
}

impl Elimination {
    pub fn matrix(&self) -> Matrix2<f64> {
        self.rescale * self.mix
    }
}

/// Removes the mixed annihilation couplings of a normalized system.
pub fn eliminate_couplings(sys: &ApcSystem) -> Result<Elimination> {
    let cf = extract_coefficients(sys)?;
    let scale = 1.0 + cf.values().iter().map(|(_, x)| x.abs()).fold(0.0, f64::max);
    if cf
        .couplings()
        .iter()
        .all(|x| x.abs() <= COUPLING_TOLERANCE * scale)
    {
        return Ok(Elimination {
            system: sys.clone(),
            mix: Matrix2::identity(),
            rescale: Matrix2::identity(),
            quadratic: None,
        });
    }
    let eq_r = (cf.r_prime, -cf.gamma, -cf.q);
    let eq_u = (cf.u, cf.delta, -cf.s);
    let size = |e: &(f64, f64, f64)| e.0.abs().max(e.1.abs()).max(e.2.abs());
    let (name, chosen, other) = if size(&eq_r) >= size(&eq_u) {
        ("r'", eq_r, eq_u)
    } else {
        ("u", eq_u, eq_r)
    };
    if size(&chosen) <= COUPLING_TOLERANCE * scale {
        return Err(Error::InconsistentCoefficients(
            "couplings are nonzero but both quadratics vanish".into(),
        ));
    }
    let roots = projective_roots(chosen.0, chosen.1, chosen.2)?;
    // the two quadratics are proportional, so the roots solve both
    for [al, be] in roots {
        let val = other.0 * be * be + other.1 * be * al + other.2 * al * al;
        if val.abs() > 1e-6 * scale {
            return Err(Error::InconsistentCoefficients(format!(
                "root ({al}, {be}) leaves {val:e} in the companion quadratic"
            )));
        }
    }
    let mix = Matrix2::new(roots[0][0], roots[0][1], roots[1][0], roots[1][1]);
    let mixed = mix_linear(sys, &mix)?;
    let (system, rescale) = normalize(&mixed)?;
    let after = extract_coefficients(&system)?;
    if let Some(bad) = after.couplings().iter().find(|x| x.abs() >= COUPLING_TOLERANCE) {
        return Err(Error::Postcondition(format!(
            "coupling {bad:e} survived elimination"
        )));
    }
    Ok(Elimination {
        system,
        mix,
        rescale,
        quadratic: Some(QuadraticStage {
            equation: name.to_string(),
            discriminant_r: cf.gamma * cf.gamma + 4.0 * cf.r_prime * cf.q,
            discriminant_u: cf.delta * cf.delta + 4.0 * cf.u * cf.s,
            roots,
        }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumberOperatorCertificate {
    pub ok: bool,
    pub p: f64,
    pub v: f64,
}

/// Checks `a_x⁰ = p N` and `a_y⁰ = v N` on grades `0..N`.
pub fn certify_case2_number_operator(sys: &ApcSystem) -> Result<NumberOperatorCertificate> {
    let num = number_operator(&sys.grading);
    let top = sys.truncation().saturating_sub(1);
    let fit = |op| -> Result<(f64, bool)> {
        let f = fit_in_span(op, &[SpanMember::Op(&num)], 0.0)?;
        let diff = op.add_scaled(-f.coeffs[0], &num)?;
        let err = diff.max_abs_over(0..=top);
        Ok((f.coeffs[0], err <= DEFAULT_TOLERANCE * (1.0 + f.coeffs[0].abs())))
    };
    let (p, okx) = fit(&sys.x.zero)?;
    let (v, oky) = fit(&sys.y.zero)?;
    Ok(NumberOperatorCertificate {
        ok: okx && oky,
        p,
        v,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTaken {
    AlreadyDiagonal,
    Case1,
    Case2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub name: String,
    pub matrix: Mat2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    /// `S` with `(X', Y') = S (X, Y)`.
    pub transform: Mat2,
    pub stages: Vec<Stage>,
    pub case: CaseTaken,
    pub target: MixedPreservationSpec,
    pub audit: MomentEquality,
    pub coefficients_before: StructureCoefficients,
    pub coefficients_after: StructureCoefficients,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadratic: Option<QuadraticStage>,
}

impl ClassificationReport {
    pub fn transform_matrix(&self) -> Matrix2<f64> {
        let t = self.transform;
        Matrix2::new(t[0][0], t[0][1], t[1][0], t[1][1])
    }
}

fn coefficient_scale(cf: &StructureCoefficients) -> f64 {
    1.0 + cf.values().iter().map(|(_, x)| x.abs()).fold(0.0, f64::max)
}

/// Runs the full pipeline and certifies the result up to moments of
/// `degree`.
pub fn decouple(sys: &ApcSystem, degree: usize, tol: f64) -> Result<ClassificationReport> {
    let n = sys.truncation();
    if n < degree + 2 {
        return Err(Error::TruncationTooSmall {
            truncation: n,
            reason: format!("moment audit of degree {degree} needs N >= {}", degree + 2),
        });
    }
    sys.require_centered()?;
    let verdict = check_ml(sys)?;
    if !verdict.is_ml {
        return Err(Error::NotMeixnerLie(
            verdict
                .violated_brackets
                .iter()
                .map(|b| b.bracket.clone())
                .collect(),
        ));
    }
    let coefficients_before = extract_coefficients(sys)?;

    let mut stages = Vec::new();
    let (s1, d1) = normalize(sys)?;
    stages.push(Stage {
        name: "rescale".into(),
        matrix: to_rows(&d1),
    });
    let elim = eliminate_couplings(&s1)?;
    if elim.quadratic.is_some() {
        stages.push(Stage {
            name: "quadratic-mix".into(),
            matrix: to_rows(&elim.mix),
        });
        stages.push(Stage {
            name: "rescale".into(),
            matrix: to_rows(&elim.rescale),
        });
    }
    let mut transform = elim.matrix() * d1;
    let mut current = elim.system;
    let mut cf = extract_coefficients(&current)?;

    let scale = coefficient_scale(&cf);
    let case1 = cf.gamma.abs() > tol * scale || cf.delta.abs() > tol * scale;
    let case = if case1 {
        if [cf.e, cf.f, cf.g].iter().any(|x| x.abs() > tol * scale) {
            return Err(Error::Postcondition(format!(
                "Case 1 requires [a_x-, a_y+] = 0, found e = {:e}, f = {:e}, g = {:e}",
                cf.e, cf.f, cf.g
            )));
        }
        cf.e = 0.0;
        cf.f = 0.0;
        cf.g = 0.0;
        if elim.quadratic.is_none() && is_identity(&transform, 1e-12) {
            CaseTaken::AlreadyDiagonal
        } else {
            CaseTaken::Case1
        }
    } else {
        let cert = certify_case2_number_operator(&current)?;
        if !cert.ok {
            return Err(Error::Postcondition(
                "preservation operators are not multiples of the number operator".into(),
            ));
        }
        let e = cf.e;
        if e.abs() > 1e-12 {
            let rot = Matrix2::new(
                1.0 / (2.0 * (1.0 + e)).sqrt(),
                1.0 / (2.0 * (1.0 + e)).sqrt(),
                1.0 / (2.0 * (1.0 - e)).sqrt(),
                -1.0 / (2.0 * (1.0 - e)).sqrt(),
            );
            current = mix_linear(&current, &rot)?;
            transform = rot * transform;
            stages.push(Stage {
                name: "rotation".into(),
                matrix: to_rows(&rot),
            });
            cf = extract_coefficients(&current)?;
        }
        CaseTaken::Case2
    };

    let target = MixedPreservationSpec {
        c: cf.c,
        d: cf.d,
        j: cf.j,
        k: cf.k,
        p: cf.p,
        r: cf.r,
        s_prime: cf.s_prime,
        v: cf.v,
        truncation: Some(n),
    };
    let target_sys = build_mixed(&target)
        .map_err(|e| Error::Postcondition(format!("recovered target is invalid: {e}")))?;
    let audit = moment_equal(&current, &target_sys, degree, tol)?;
    if !audit.equal {
        return Err(Error::AuditFailed {
            worst_word: audit.worst_word,
            worst_diff: audit.worst_diff,
        });
    }
    Ok(ClassificationReport {
        transform: to_rows(&transform),
        stages,
        case,
        target,
        audit,
        coefficients_before,
        coefficients_after: cf,
        quadratic: elim.quadratic,
    })
}
