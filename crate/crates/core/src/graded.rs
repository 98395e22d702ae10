//! Finite truncations of a graded chaos space `G_0 ⊕ G_1 ⊕ … ⊕ G_N`.
//!
//! Every grade carries an orthonormal basis, so vectors are lists of dense
//! per-grade coordinate blocks and an operator of fixed grade shift `s` is
//! a list of dense matrices `G_n → G_{n+s}`. Grade dimensions stay tiny
//! (at most `N + 1` in two variables), so everything is dense and exact up
//! to floating point.
//!
//! Truncation at `N` corrupts products whose intermediate grade leaves the
//! space. Such blocks are zeroed and tagged inexact; [`Grading::valid_top`]
//! gives the highest source grade on which commutator identities are
//! asserted.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grading {
    dims: Vec<usize>,
}

impl Grading {
    pub fn new(dims: Vec<usize>) -> Result<Arc<Self>> {
        if dims.len() < 3 {
            return Err(Error::InvalidGrading(format!(
                "truncation level must be at least 2, got {}",
                dims.len().saturating_sub(1)
            )));
        }
        if dims[0] != 1 {
            return Err(Error::InvalidGrading(format!(
                "vacuum grade must be one-dimensional, got {}",
                dims[0]
            )));
        }
        if let Some(first_zero) = dims.iter().position(|&d| d == 0) {
            if dims[first_zero..].iter().any(|&d| d != 0) {
                return Err(Error::InvalidGrading(
                    "grade dimensions must stay zero once the chain terminates".into(),
                ));
            }
        }
        Ok(Arc::new(Grading { dims }))
    }

    /// Truncation level `N`.
    pub fn truncation(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, grade: usize) -> usize {
        self.dims.get(grade).copied().unwrap_or(0)
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// The chain ends inside the truncation window, so nothing is lost by
    /// truncating: the model is the full space.
    pub fn is_terminated(&self) -> bool {
        self.dims.contains(&0)
    }

    /// Highest source grade on which identities between products of
    /// operators are trusted.
    pub fn valid_top(&self) -> usize {
        if self.is_terminated() {
            self.truncation()
        } else {
            self.truncation() - 2
        }
    }

    fn target(&self, grade: usize, shift: i32) -> Option<usize> {
        let t = grade as i64 + shift as i64;
        (0..=self.truncation() as i64)
            .contains(&t)
            .then_some(t as usize)
    }
}

fn same_grading(a: &Arc<Grading>, b: &Arc<Grading>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::GradingMismatch)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradedVector {
    grading: Arc<Grading>,
    blocks: Vec<DVector<f64>>,
}

impl GradedVector {
    pub fn zeros(grading: &Arc<Grading>) -> Self {
        let blocks = grading.dims.iter().map(|&d| DVector::zeros(d)).collect();
        GradedVector {
            grading: grading.clone(),
            blocks,
        }
    }

    /// The vacuum vector φ.
    pub fn vacuum(grading: &Arc<Grading>) -> Self {
        let mut v = Self::zeros(grading);
        v.blocks[0][0] = 1.0;
        v
    }

    /// The `index`-th orthonormal basis vector of grade `grade`.
    pub fn basis(grading: &Arc<Grading>, grade: usize, index: usize) -> Self {
        let mut v = Self::zeros(grading);
        v.blocks[grade][index] = 1.0;
        v
    }

    pub fn from_blocks(grading: &Arc<Grading>, blocks: Vec<DVector<f64>>) -> Result<Self> {
        if blocks.len() != grading.dims.len()
            || blocks.iter().zip(&grading.dims).any(|(b, &d)| b.len() != d)
        {
            return Err(Error::GradingMismatch);
        }
        Ok(GradedVector {
            grading: grading.clone(),
            blocks,
        })
    }

    pub fn grading(&self) -> &Arc<Grading> {
        &self.grading
    }

    pub fn block(&self, grade: usize) -> &DVector<f64> {
        &self.blocks[grade]
    }

    pub fn blocks(&self) -> &[DVector<f64>] {
        &self.blocks
    }

    pub fn inner(&self, other: &GradedVector) -> Result<f64> {
        same_grading(&self.grading, &other.grading)?;
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.dot(b))
            .sum())
    }

    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Grades carrying a nonzero coordinate.
    pub fn support(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .enumerate()
            .filter(|(_, b)| b.iter().any(|&x| x != 0.0))
            .map(|(n, _)| n)
            .collect()
    }

    pub fn axpy(&mut self, coeff: f64, other: &GradedVector) -> Result<()> {
        same_grading(&self.grading, &other.grading)?;
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            a.axpy(coeff, b, 1.0);
        }
        Ok(())
    }

    /// Stacked coordinates in grade order.
    pub fn to_flat(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.grading.total_dim(),
            self.blocks.iter().flat_map(|b| b.iter().copied()),
        )
    }
}

/// Result of applying an operator; `truncated` is set when a nonzero
/// component was pushed past the top grade and dropped.
#[derive(Debug, Clone)]
pub struct Applied {
    pub vector: GradedVector,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradedOperator {
    grading: Arc<Grading>,
    shift: i32,
    /// Indexed by source grade; `None` when the target grade is out of range.
    blocks: Vec<Option<DMatrix<f64>>>,
    exact: Vec<bool>,
}

impl GradedOperator {
    pub fn zeros(grading: &Arc<Grading>, shift: i32) -> Self {
        let blocks = (0..grading.dims.len())
            .map(|n| {
                grading
                    .target(n, shift)
                    .map(|t| DMatrix::zeros(grading.dims[t], grading.dims[n]))
            })
            .collect();
        GradedOperator {
            grading: grading.clone(),
            shift,
            blocks,
            exact: vec![true; grading.dims.len()],
        }
    }

    pub fn identity(grading: &Arc<Grading>) -> Self {
        let mut op = Self::zeros(grading, 0);
        for (n, b) in op.blocks.iter_mut().enumerate() {
            *b = Some(DMatrix::identity(grading.dims[n], grading.dims[n]));
        }
        op
    }

    /// Builds an operator from per-source-grade blocks. Entries for source
    /// grades whose target is out of range must be `None`.
    pub fn from_blocks(
        grading: &Arc<Grading>,
        shift: i32,
        blocks: Vec<Option<DMatrix<f64>>>,
    ) -> Result<Self> {
        if blocks.len() != grading.dims.len() {
            return Err(Error::GradingMismatch);
        }
        for (n, b) in blocks.iter().enumerate() {
            match (grading.target(n, shift), b) {
                (Some(t), Some(m)) => {
                    if m.nrows() != grading.dims[t] || m.ncols() != grading.dims[n] {
                        return Err(Error::InvalidGrading(format!(
                            "block at grade {n} has shape {}x{}, expected {}x{}",
                            m.nrows(),
                            m.ncols(),
                            grading.dims[t],
                            grading.dims[n]
                        )));
                    }
                }
                (None, None) => {}
                (Some(_), None) => {
                    return Err(Error::InvalidGrading(format!("missing block at grade {n}")))
                }
                (None, Some(_)) => {
                    return Err(Error::InvalidGrading(format!(
                        "grade {n} block targets a grade outside the truncation"
                    )))
                }
            }
        }
        Ok(GradedOperator {
            grading: grading.clone(),
            shift,
            blocks,
            exact: vec![true; grading.dims.len()],
        })
    }

    pub fn grading(&self) -> &Arc<Grading> {
        &self.grading
    }

    pub fn shift(&self) -> i32 {
        self.shift
    }

    pub fn block(&self, source: usize) -> Option<&DMatrix<f64>> {
        self.blocks.get(source).and_then(|b| b.as_ref())
    }

    pub fn block_mut(&mut self, source: usize) -> Option<&mut DMatrix<f64>> {
        self.blocks.get_mut(source).and_then(|b| b.as_mut())
    }

    pub fn is_exact(&self, source: usize) -> bool {
        self.exact[source]
    }

    /// Source grades whose block is present, exact and inside the trusted
    /// window.
    pub fn valid_sources(&self) -> impl Iterator<Item = usize> + '_ {
        (0..=self.grading.valid_top()).filter(move |&n| self.exact[n] && self.blocks[n].is_some())
    }

    pub fn apply(&self, v: &GradedVector) -> Result<Applied> {
        same_grading(&self.grading, &v.grading)?;
        let mut out = GradedVector::zeros(&self.grading);
        let mut truncated = false;
        for (n, src) in v.blocks.iter().enumerate() {
            match (&self.blocks[n], self.grading.target(n, self.shift)) {
                (Some(m), Some(t)) => out.blocks[t] += m * src,
                _ => {
                    // Shift −1 on grade 0 is genuinely zero; only upward
                    // overflow loses mass.
                    if self.shift > 0 && src.iter().any(|&x| x != 0.0) {
                        truncated = true;
                    }
                }
            }
        }
        Ok(Applied {
            vector: out,
            truncated,
        })
    }

    pub fn adjoint(&self) -> GradedOperator {
        let g = &self.grading;
        let mut blocks = vec![None; g.dims.len()];
        let mut exact = vec![true; g.dims.len()];
        for (m, slot) in blocks.iter_mut().enumerate() {
            // adjoint block at source m is the transpose of the original
            // block at source m − shift
            if let Some(src) = g.target(m, -self.shift) {
                if let Some(b) = &self.blocks[src] {
                    *slot = Some(b.transpose());
                    exact[m] = self.exact[src];
                }
            }
        }
        GradedOperator {
            grading: g.clone(),
            shift: -self.shift,
            blocks,
            exact,
        }
    }

    /// Operator product `self · other`.
    pub fn compose(&self, other: &GradedOperator) -> Result<GradedOperator> {
        same_grading(&self.grading, &other.grading)?;
        let g = &self.grading;
        let shift = self.shift + other.shift;
        let mut out = GradedOperator::zeros(g, shift);
        for n in 0..g.dims.len() {
            if g.target(n, shift).is_none() {
                continue;
            }
            let mid = n as i64 + other.shift as i64;
            if mid < 0 {
                continue;
            }
            match g.target(n, other.shift) {
                Some(m) => {
                    if let (Some(a), Some(b)) = (&self.blocks[m], &other.blocks[n]) {
                        out.blocks[n] = Some(a * b);
                    }
                    out.exact[n] = self.exact[m] && other.exact[n];
                }
                None => {
                    // intermediate grade above N
                    out.exact[n] = g.is_terminated();
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, coeff: f64) -> GradedOperator {
        let mut out = self.clone();
        for b in out.blocks.iter_mut().flatten() {
            *b *= coeff;
        }
        out
    }

    /// `self + coeff · other` for operators of equal shift.
    pub fn add_scaled(&self, coeff: f64, other: &GradedOperator) -> Result<GradedOperator> {
        same_grading(&self.grading, &other.grading)?;
        if self.shift != other.shift {
            return Err(Error::InvalidGrading(format!(
                "cannot add shift {} and shift {} operators",
                self.shift, other.shift
            )));
        }
        let mut out = self.clone();
        for n in 0..out.blocks.len() {
            if let (Some(a), Some(b)) = (out.blocks[n].as_mut(), other.blocks[n].as_ref()) {
                *a += b * coeff;
            }
            out.exact[n] = self.exact[n] && other.exact[n];
        }
        Ok(out)
    }

    /// `Σ coeffs[i] · ops[i]`; all operators must share a shift.
    pub fn linear_combination(coeffs: &[f64], ops: &[&GradedOperator]) -> Result<GradedOperator> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidGrading("empty linear combination".into()))?;
        let mut acc = GradedOperator::zeros(&first.grading, first.shift);
        for (c, op) in coeffs.iter().zip(ops) {
            acc = acc.add_scaled(*c, op)?;
        }
        Ok(acc)
    }

    /// Frobenius norm over the blocks of the given source grades.
    pub fn norm_over(&self, grades: impl IntoIterator<Item = usize>) -> f64 {
        grades
            .into_iter()
            .filter_map(|n| self.blocks.get(n).and_then(|b| b.as_ref()))
            .map(|b| b.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    /// Frobenius norm over all present blocks.
    pub fn norm(&self) -> f64 {
        self.norm_over(0..self.blocks.len())
    }

    /// Largest absolute entry over the blocks of the given source grades.
    pub fn max_abs_over(&self, grades: impl IntoIterator<Item = usize>) -> f64 {
        grades
            .into_iter()
            .filter_map(|n| self.blocks.get(n).and_then(|b| b.as_ref()))
            .flat_map(|b| b.iter().map(|x| x.abs()))
            .fold(0.0, f64::max)
    }

    /// Largest absolute entry of `self − other` over valid source grades of
    /// both operators.
    pub fn max_abs_diff_valid(&self, other: &GradedOperator) -> Result<f64> {
        same_grading(&self.grading, &other.grading)?;
        if self.shift != other.shift {
            return Err(Error::InvalidGrading("shift mismatch".into()));
        }
        let diff = self.add_scaled(-1.0, other)?;
        let grades: Vec<usize> = diff.valid_sources().collect();
        Ok(diff.max_abs_over(grades))
    }

    /// Largest absolute entry over [`valid_sources`](Self::valid_sources).
    pub fn max_abs_valid(&self) -> f64 {
        let grades: Vec<usize> = self.valid_sources().collect();
        self.max_abs_over(grades)
    }

    /// Dense matrix on the stacked basis of all grades.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let g = &self.grading;
        let offsets: Vec<usize> = g
            .dims
            .iter()
            .scan(0, |acc, &d| {
                let o = *acc;
                *acc += d;
                Some(o)
            })
            .collect();
        let total = g.total_dim();
        let mut out = DMatrix::zeros(total, total);
        for (n, b) in self.blocks.iter().enumerate() {
            if let (Some(b), Some(t)) = (b, g.target(n, self.shift)) {
                out.view_mut((offsets[t], offsets[n]), (b.nrows(), b.ncols()))
                    .copy_from(b);
            }
        }
        out
    }
}

/// `N`: multiplies grade `n` by `n`.
pub fn number_operator(grading: &Arc<Grading>) -> GradedOperator {
    let mut op = GradedOperator::zeros(grading, 0);
    for (n, b) in op.blocks.iter_mut().enumerate() {
        *b = Some(DMatrix::identity(grading.dims[n], grading.dims[n]) * n as f64);
    }
    op
}

/// Homogeneous commutator `[a, b] = ab − ba`.
pub fn bracket(a: &GradedOperator, b: &GradedOperator) -> Result<GradedOperator> {
    a.compose(b)?.add_scaled(-1.0, &b.compose(a)?)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Identity,
    Op(GradedOperator),
}

/// A finite linear combination of graded operators and the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSum {
    grading: Arc<Grading>,
    terms: Vec<(f64, Term)>,
}

impl From<GradedOperator> for OperatorSum {
    fn from(op: GradedOperator) -> Self {
        OperatorSum {
            grading: op.grading.clone(),
            terms: vec![(1.0, Term::Op(op))],
        }
    }
}

impl From<&GradedOperator> for OperatorSum {
    fn from(op: &GradedOperator) -> Self {
        op.clone().into()
    }
}

impl From<&OperatorSum> for OperatorSum {
    fn from(s: &OperatorSum) -> Self {
        s.clone()
    }
}

impl OperatorSum {
    pub fn new(grading: &Arc<Grading>, terms: Vec<(f64, Term)>) -> Result<Self> {
        for (_, t) in &terms {
            if let Term::Op(op) = t {
                same_grading(grading, &op.grading)?;
            }
        }
        Ok(OperatorSum {
            grading: grading.clone(),
            terms,
        })
    }

    pub fn grading(&self) -> &Arc<Grading> {
        &self.grading
    }

    pub fn terms(&self) -> &[(f64, Term)] {
        &self.terms
    }

    /// One operator per distinct shift, identity folded into shift 0,
    /// sorted by shift.
    pub fn components(&self) -> Vec<GradedOperator> {
        let mut out: Vec<GradedOperator> = Vec::new();
        for (c, t) in &self.terms {
            let op = match t {
                Term::Identity => GradedOperator::identity(&self.grading).scale(*c),
                Term::Op(op) => op.scale(*c),
            };
            match out.iter_mut().find(|o| o.shift == op.shift) {
                Some(acc) => *acc = acc.add_scaled(1.0, &op).expect("shared grading"),
                None => out.push(op),
            }
        }
        out.sort_by_key(|o| o.shift);
        out
    }

    pub fn component(&self, shift: i32) -> GradedOperator {
        self.components()
            .into_iter()
            .find(|o| o.shift == shift)
            .unwrap_or_else(|| GradedOperator::zeros(&self.grading, shift))
    }

    pub fn apply(&self, v: &GradedVector) -> Result<Applied> {
        same_grading(&self.grading, &v.grading)?;
        let mut out = GradedVector::zeros(&self.grading);
        let mut truncated = false;
        for (c, t) in &self.terms {
            match t {
                Term::Identity => out.axpy(*c, v)?,
                Term::Op(op) => {
                    let a = op.apply(v)?;
                    truncated |= a.truncated;
                    out.axpy(*c, &a.vector)?;
                }
            }
        }
        Ok(Applied {
            vector: out,
            truncated,
        })
    }

    /// Largest absolute entry over valid blocks of every component.
    pub fn max_abs_valid(&self) -> f64 {
        self.components()
            .iter()
            .map(|c| {
                let grades: Vec<usize> = c.valid_sources().collect();
                c.max_abs_over(grades)
            })
            .fold(0.0, f64::max)
    }
}

/// `[A, B] = AB − BA` for sums of graded operators. The result carries one
/// term per shift; blocks touched by truncation are tagged inexact.
pub fn commutator(a: impl Into<OperatorSum>, b: impl Into<OperatorSum>) -> Result<OperatorSum> {
    let a: OperatorSum = a.into();
    let b: OperatorSum = b.into();
    same_grading(&a.grading, &b.grading)?;
    let mut terms = Vec::new();
    // The identity commutes with everything, so only operator parts matter.
    let ac = a.components();
    let bc = b.components();
    for x in &ac {
        for y in &bc {
            terms.push((1.0, Term::Op(bracket(x, y)?)));
        }
    }
    let collapsed = OperatorSum {
        grading: a.grading.clone(),
        terms,
    }
    .components()
    .into_iter()
    .map(|op| (1.0, Term::Op(op)))
    .collect();
    Ok(OperatorSum {
        grading: a.grading,
        terms: collapsed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> Arc<Grading> {
        Grading::new(vec![1; n + 1]).unwrap()
    }

    /// 1D annihilator with a⁻ e_n = √ω_n e_{n−1}.
    fn annihilator(g: &Arc<Grading>, omega: impl Fn(usize) -> f64) -> GradedOperator {
        let mut op = GradedOperator::zeros(g, -1);
        for n in 1..=g.truncation() {
            op.block_mut(n).unwrap()[(0, 0)] = omega(n).sqrt();
        }
        op
    }

    #[test]
    fn grading_validation() {
        assert!(Grading::new(vec![1, 2]).is_err());
        assert!(Grading::new(vec![2, 1, 1]).is_err());
        assert!(Grading::new(vec![1, 0, 1]).is_err());
        let g = Grading::new(vec![1, 2, 1, 0, 0]).unwrap();
        assert!(g.is_terminated());
        assert_eq!(g.valid_top(), 4);
        assert_eq!(chain(6).valid_top(), 4);
    }

    #[test]
    fn identity_fixes_vacuum_and_lowering_kills_it() {
        let g = chain(5);
        let phi = GradedVector::vacuum(&g);
        let id = GradedOperator::identity(&g);
        assert_eq!(id.apply(&phi).unwrap().vector, phi);
        let am = annihilator(&g, |n| n as f64);
        let out = am.apply(&phi).unwrap();
        assert_eq!(out.vector.norm(), 0.0);
        assert!(!out.truncated);
    }

    #[test]
    fn overflow_is_flagged() {
        let g = chain(3);
        let ap = annihilator(&g, |n| n as f64).adjoint();
        let top = GradedVector::basis(&g, 3, 0);
        assert!(ap.apply(&top).unwrap().truncated);
        let low = GradedVector::basis(&g, 1, 0);
        let out = ap.apply(&low).unwrap();
        assert!(!out.truncated);
        assert_eq!(out.vector.support(), vec![2]);
    }

    #[test]
    fn gaussian_canonical_commutator() {
        let g = chain(8);
        let am = annihilator(&g, |n| n as f64);
        let ap = am.adjoint();
        let c = bracket(&am, &ap).unwrap();
        let id = GradedOperator::identity(&g);
        assert!(c.max_abs_diff_valid(&id).unwrap() < 1e-12);
        // the top block is corrupted by truncation and tagged inexact
        assert!(!c.is_exact(8));
        assert!(c.is_exact(7));
    }

    #[test]
    fn number_operator_lowering_relation() {
        let g = chain(7);
        let am = annihilator(&g, |n| (2 * n * n) as f64 + n as f64);
        let nop = number_operator(&g);
        let c = bracket(&am, &nop).unwrap();
        assert!(c.max_abs_diff_valid(&am).unwrap() < 1e-12);
        let v = GradedVector::basis(&g, 3, 0);
        let nv = nop.apply(&v).unwrap().vector;
        assert_eq!(nv.block(3)[0], 3.0);
    }

    #[test]
    fn adjoint_involution_and_pairing() {
        let g = Grading::new(vec![1, 2, 3, 3, 3]).unwrap();
        let mut op = GradedOperator::zeros(&g, 1);
        let mut k = 0.0;
        for n in 0..4 {
            for x in op.block_mut(n).unwrap().iter_mut() {
                k += 1.0;
                *x = (k * 0.37f64).sin();
            }
        }
        assert_eq!(op.adjoint().adjoint(), op);
        let u = GradedVector::from_blocks(
            &g,
            (0..5)
                .map(|n| DVector::from_fn(g.dim(n), |i, _| (n + i) as f64 * 0.5 - 1.0))
                .collect(),
        )
        .unwrap();
        let mut v = GradedVector::zeros(&g);
        v.axpy(1.0, &GradedVector::basis(&g, 2, 1)).unwrap();
        v.axpy(-2.0, &GradedVector::basis(&g, 3, 0)).unwrap();
        let lhs = op.apply(&u).unwrap().vector.inner(&v).unwrap();
        let rhs = u.inner(&op.adjoint().apply(&v).unwrap().vector).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn commutator_of_sums_splits_by_shift() {
        let g = chain(6);
        let am = annihilator(&g, |n| n as f64);
        let ap = am.adjoint();
        let x = OperatorSum::new(
            &g,
            vec![(1.0, Term::Op(am.clone())), (1.0, Term::Op(ap.clone()))],
        )
        .unwrap();
        let self_comm = commutator(&x, &x).unwrap();
        assert!(self_comm.max_abs_valid() < 1e-14);
        let c = commutator(&am, &x).unwrap();
        // [a⁻, a⁻ + a⁺] = I on valid grades
        assert!(
            c.component(0)
                .max_abs_diff_valid(&GradedOperator::identity(&g))
                .unwrap()
                < 1e-12
        );
        assert!(c.component(-2).norm() < 1e-14);
    }

    #[test]
    fn mismatched_gradings_are_rejected() {
        let a = GradedVector::vacuum(&chain(3));
        let b = GradedVector::vacuum(&chain(4));
        assert_eq!(a.inner(&b), Err(Error::GradingMismatch));
    }
}
