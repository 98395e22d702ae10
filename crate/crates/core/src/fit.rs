//! Least-squares expansion of an operator in a span of operators.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graded::GradedOperator;

#[derive(Debug, Clone, Copy)]
pub enum SpanMember<'a> {
    Identity,
    Op(&'a GradedOperator),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fit {
    pub coeffs: Vec<f64>,
    /// `‖A c − b‖_F / scale`.
    pub residual: f64,
    /// Source grades that entered the fit.
    pub grades: Vec<usize>,
}

/// Relative cut-off for singular values of the design matrix.
const RANK_RTOL: f64 = 1e-9;

/// Fits `target ≈ Σ cᵢ memberᵢ` over the source grades where the target
/// and every member have exact blocks inside the trusted window. Rank
/// deficient designs get the minimum-norm solution.
///
/// The residual is relative to `max(‖b‖, scale_hint, max column norm)`;
/// callers pass the product of factor norms for commutators so that a
/// numerically-zero bracket does not divide by its own noise.
pub fn fit_in_span(
    target: &GradedOperator,
    members: &[SpanMember<'_>],
    scale_hint: f64,
) -> Result<Fit> {
    let g = target.grading().clone();
    for m in members {
        if let SpanMember::Op(op) = m {
            if op.grading() != &g {
                return Err(Error::GradingMismatch);
            }
            if op.shift() != target.shift() {
                return Err(Error::InvalidGrading(format!(
                    "span member has shift {}, target has shift {}",
                    op.shift(),
                    target.shift()
                )));
            }
        }
    }
    if !members.is_empty()
        && target.shift() != 0
        && members.iter().any(|m| matches!(m, SpanMember::Identity))
    {
        return Err(Error::InvalidGrading(
            "identity can only expand shift-0 operators".into(),
        ));
    }

    let grades: Vec<usize> = target
        .valid_sources()
        .filter(|&n| {
            members.iter().all(|m| match m {
                SpanMember::Identity => true,
                SpanMember::Op(op) => op.is_exact(n) && op.block(n).is_some(),
            })
        })
        .collect();

    let rows: usize = grades
        .iter()
        .map(|&n| target.block(n).map_or(0, |b| b.len()))
        .sum();
    let mut design = DMatrix::zeros(rows, members.len());
    let mut rhs = DVector::zeros(rows);
    let mut row = 0;
    for &n in &grades {
        let b = target.block(n).expect("valid source");
        let len = b.len();
        rhs.rows_mut(row, len).copy_from_slice(b.as_slice());
        for (j, m) in members.iter().enumerate() {
            match m {
                SpanMember::Identity => {
                    let d = b.nrows();
                    for i in 0..d {
                        // column-major position of (i, i)
                        design[(row + i * d + i, j)] = 1.0;
                    }
                }
                SpanMember::Op(op) => {
                    let ob = op.block(n).expect("checked above");
                    design
                        .view_mut((row, j), (len, 1))
                        .copy_from_slice(ob.as_slice());
                }
            }
        }
        row += len;
    }

    let col_max = (0..members.len())
        .map(|j| design.column(j).norm())
        .fold(0.0, f64::max);
    let scale = rhs.norm().max(scale_hint).max(col_max);

    let coeffs = if members.is_empty() || rows == 0 {
        DVector::zeros(members.len())
    } else {
        let svd = design.clone().svd(true, true);
        let smax = svd.singular_values.max();
        if smax == 0.0 {
            DVector::zeros(members.len())
        } else {
            svd.solve(&rhs, smax * RANK_RTOL)
                .map_err(|e| Error::InconsistentCoefficients(e.to_string()))?
        }
    };
    let resid = if rows == 0 {
        0.0
    } else {
        (&design * &coeffs - &rhs).norm()
    };
    let residual = if scale > 0.0 { resid / scale } else { 0.0 };
    Ok(Fit {
        coeffs: coeffs.iter().copied().collect(),
        residual,
        grades,
    })
}
