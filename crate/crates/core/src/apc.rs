//! Moments, moment equality, and the minimal joint APC decomposition of a
//! moment functional.
//!
//! A word `w = ℓ₁ℓ₂…ℓ_L` over `{x, y}` stands for the operator product
//! `ℓ₁ ℓ₂ ⋯ ℓ_L`, so `E[w] = ⟨ℓ₁(ℓ₂(⋯ℓ_L φ)), φ⟩`. Since `X`, `Y` are
//! symmetric, `⟨uφ, vφ⟩ = E[rev(u) v]`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded::{GradedOperator, GradedVector, Grading, OperatorSum};
use crate::meixner1d::ApcTriple;
use crate::vectors2d::{ApcSystem, Var};

pub const MAX_WORD_LEN: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    X,
    Y,
}

impl Letter {
    pub fn var(self) -> Var {
        match self {
            Letter::X => Var::X,
            Letter::Y => Var::Y,
        }
    }
}

/// A word over `{x, y}` of length at most [`MAX_WORD_LEN`], packed with the
/// first letter in the most significant bit so that, within one length,
/// numeric order is lexicographic order with `x < y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    len: u8,
    bits: u32,
}

impl Word {
    pub const EMPTY: Word = Word { len: 0, bits: 0 };

    pub fn from_letters(letters: &[Letter]) -> Word {
        assert!(letters.len() <= MAX_WORD_LEN, "word too long");
        let bits = letters
            .iter()
            .fold(0u32, |acc, l| (acc << 1) | (*l == Letter::Y) as u32);
        Word {
            len: letters.len() as u8,
            bits,
        }
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn letter(&self, i: usize) -> Letter {
        debug_assert!(i < self.len());
        if (self.bits >> (self.len() - 1 - i)) & 1 == 1 {
            Letter::Y
        } else {
            Letter::X
        }
    }

    pub fn letters(&self) -> impl DoubleEndedIterator<Item = Letter> + '_ {
        (0..self.len()).map(|i| self.letter(i))
    }

    pub fn reversed(&self) -> Word {
        let v: Vec<Letter> = self.letters().rev().collect();
        Word::from_letters(&v)
    }

    /// `self · other`.
    pub fn concat(&self, other: &Word) -> Word {
        assert!(self.len() + other.len() <= MAX_WORD_LEN, "word too long");
        Word {
            len: self.len + other.len,
            bits: (self.bits << other.len) | other.bits,
        }
    }

    pub fn prepend(&self, l: Letter) -> Word {
        Word::from_letters(&[l]).concat(self)
    }

    pub fn counts(&self) -> (usize, usize) {
        let y = self.bits.count_ones() as usize;
        (self.len() - y, y)
    }

    /// Position in the length-then-lex enumeration of all words.
    pub fn index(&self) -> usize {
        (1usize << self.len) - 1 + self.bits as usize
    }

    pub fn from_index(index: usize) -> Word {
        let len = usize::BITS - 1 - (index + 1).leading_zeros();
        Word {
            len: len as u8,
            bits: (index + 1 - (1 << len)) as u32,
        }
    }

    /// Number of words of length at most `len`.
    pub fn count_up_to(len: usize) -> usize {
        (1usize << (len + 1)) - 1
    }

    /// All words of length at most `len`, in length-then-lex order.
    pub fn all_up_to(len: usize) -> impl Iterator<Item = Word> {
        (0..Self::count_up_to(len)).map(Word::from_index)
    }

    fn split(&self, tail_len: usize) -> (Word, Word) {
        let head_len = self.len() - tail_len;
        let head = Word {
            len: head_len as u8,
            bits: if tail_len == 32 { 0 } else { self.bits >> tail_len },
        };
        let tail = Word {
            len: tail_len as u8,
            bits: self.bits & ((1u64 << tail_len) - 1) as u32,
        };
        (head, tail)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.letters() {
            f.write_str(match l {
                Letter::X => "x",
                Letter::Y => "y",
            })?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Word> {
        let letters = s
            .chars()
            .map(|c| match c {
                'x' => Ok(Letter::X),
                'y' => Ok(Letter::Y),
                other => Err(Error::MalformedMoments(format!(
                    "unexpected letter `{other}` in word `{s}`"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        if letters.len() > MAX_WORD_LEN {
            return Err(Error::MalformedMoments(format!("word `{s}` too long")));
        }
        Ok(Word::from_letters(&letters))
    }
}

/// Expectation functional on words of bounded length.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentFunctional {
    degree_cap: usize,
    storage: Storage,
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    /// `table[a][b] = E[x^a y^b]`, `a + b ≤ cap`.
    Commutative(Vec<Vec<Option<f64>>>),
    /// Indexed by [`Word::index`].
    Words(Vec<Option<f64>>),
}

impl MomentFunctional {
    pub fn degree_cap(&self) -> usize {
        self.degree_cap
    }

    pub fn is_commutative(&self) -> bool {
        matches!(self.storage, Storage::Commutative(_))
    }

    pub fn get(&self, w: &Word) -> Result<f64> {
        let missing = || Error::InsufficientMoments(format!("E[{w}] is not defined"));
        if w.is_empty() {
            return Ok(1.0);
        }
        if w.len() > self.degree_cap {
            return Err(missing());
        }
        match &self.storage {
            Storage::Commutative(t) => {
                let (a, b) = w.counts();
                t[a][b].ok_or_else(missing)
            }
            Storage::Words(t) => t[w.index()].ok_or_else(missing),
        }
    }

    /// Word-indexed functional; `f` is called for every nonempty word.
    pub fn from_word_fn(degree_cap: usize, f: impl Fn(Word) -> f64) -> Result<Self> {
        check_cap(degree_cap)?;
        let table = Word::all_up_to(degree_cap)
            .map(|w| Some(if w.is_empty() { 1.0 } else { f(w) }))
            .collect();
        Ok(MomentFunctional {
            degree_cap,
            storage: Storage::Words(table),
        })
    }

    /// Commutative functional from `E[x^a y^b]`.
    pub fn from_counts_fn(degree_cap: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        check_cap(degree_cap)?;
        let table = (0..=degree_cap)
            .map(|a| {
                (0..=degree_cap - a)
                    .map(|b| Some(if a + b == 0 { 1.0 } else { f(a, b) }))
                    .collect()
            })
            .collect();
        Ok(MomentFunctional {
            degree_cap,
            storage: Storage::Commutative(table),
        })
    }

    /// Moments of a system for all words up to `degree_cap`. Requires the
    /// system truncation to be at least `⌈degree_cap / 2⌉`.
    pub fn from_system(sys: &ApcSystem, degree_cap: usize) -> Result<Self> {
        check_cap(degree_cap)?;
        let half = degree_cap.div_ceil(2);
        let states = word_states(sys, half)?;
        Self::from_word_fn(degree_cap, |w| {
            let tail = w.len().div_ceil(2);
            let (head, tail) = w.split(tail);
            states[tail.index()]
                .inner(&states[head.reversed().index()])
                .expect("shared grading")
        })
    }

    /// Commutative table of a system whose variables commute.
    pub fn from_commuting_system(sys: &ApcSystem, degree_cap: usize) -> Result<Self> {
        let full = Self::from_system(sys, degree_cap)?;
        Self::from_counts_fn(degree_cap, |a, b| {
            let letters: Vec<Letter> = std::iter::repeat_n(Letter::X, a)
                .chain(std::iter::repeat_n(Letter::Y, b))
                .collect();
            full.get(&Word::from_letters(&letters)).expect("in range")
        })
    }

    /// Returns a copy with `E[w]` (and, for commutative tables, every word
    /// with the same letter counts) replaced.
    pub fn with_value(&self, w: &Word, value: f64) -> Result<Self> {
        if w.is_empty() || w.len() > self.degree_cap {
            return Err(Error::MalformedMoments(format!("cannot set E[{w}]")));
        }
        let mut out = self.clone();
        match &mut out.storage {
            Storage::Commutative(t) => {
                let (a, b) = w.counts();
                t[a][b] = Some(value);
            }
            Storage::Words(t) => t[w.index()] = Some(value),
        }
        Ok(out)
    }

    pub fn to_json(&self) -> MomentFunctionalJson {
        let mut moments = BTreeMap::new();
        match &self.storage {
            Storage::Commutative(t) => {
                for (a, row) in t.iter().enumerate() {
                    for (b, v) in row.iter().enumerate() {
                        if let Some(v) = v {
                            moments.insert(format!("x{a}y{b}"), *v);
                        }
                    }
                }
            }
            Storage::Words(t) => {
                for (i, v) in t.iter().enumerate() {
                    if let Some(v) = v {
                        moments.insert(Word::from_index(i).to_string(), *v);
                    }
                }
            }
        }
        MomentFunctionalJson {
            degree_cap: self.degree_cap,
            commutative: self.is_commutative(),
            moments,
        }
    }

    pub fn from_json(j: &MomentFunctionalJson) -> Result<Self> {
        check_cap(j.degree_cap)?;
        let cap = j.degree_cap;
        let storage = if j.commutative {
            let mut t: Vec<Vec<Option<f64>>> = (0..=cap).map(|a| vec![None; cap - a + 1]).collect();
            for (key, &val) in &j.moments {
                let (a, b) = parse_counts_key(key)?;
                if a + b > cap {
                    return Err(Error::MalformedMoments(format!(
                        "key `{key}` exceeds degree cap {cap}"
                    )));
                }
                t[a][b] = Some(val);
            }
            t[0][0] = Some(1.0);
            Storage::Commutative(t)
        } else {
            let mut t = vec![None; Word::count_up_to(cap)];
            for (key, &val) in &j.moments {
                let w: Word = key.parse()?;
                if w.len() > cap {
                    return Err(Error::MalformedMoments(format!(
                        "word `{key}` exceeds degree cap {cap}"
                    )));
                }
                t[w.index()] = Some(val);
            }
            t[0] = Some(1.0);
            Storage::Words(t)
        };
        if let Some(v) = j.moments.get("").or_else(|| j.moments.get("x0y0")) {
            if (v - 1.0).abs() > 1e-12 {
                return Err(Error::MalformedMoments(format!(
                    "E[I] must be 1, got {v}"
                )));
            }
        }
        Ok(MomentFunctional {
            degree_cap: cap,
            storage,
        })
    }
}

fn check_cap(cap: usize) -> Result<()> {
    if cap > MAX_WORD_LEN {
        return Err(Error::MalformedMoments(format!(
            "degree cap {cap} exceeds the supported maximum {MAX_WORD_LEN}"
        )));
    }
    Ok(())
}

fn parse_counts_key(key: &str) -> Result<(usize, usize)> {
    let bad = || Error::MalformedMoments(format!("expected a key of the form x<a>y<b>, got `{key}`"));
    let rest = key.strip_prefix('x').ok_or_else(bad)?;
    let (a, b) = rest.split_once('y').ok_or_else(bad)?;
    Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
}

/// Wire form of a [`MomentFunctional`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentFunctionalJson {
    pub degree_cap: usize,
    pub commutative: bool,
    pub moments: BTreeMap<String, f64>,
}

/// `wφ` for every word `w` with `|w| ≤ len`, indexed by [`Word::index`].
fn word_states(sys: &ApcSystem, len: usize) -> Result<Vec<GradedVector>> {
    if len > sys.truncation() {
        return Err(Error::TruncationTooSmall {
            truncation: sys.truncation(),
            reason: format!("words of length {len} need N >= {len}"),
        });
    }
    let vars = [sys.variable(Var::X), sys.variable(Var::Y)];
    let mut states: Vec<GradedVector> = Vec::with_capacity(Word::count_up_to(len));
    states.push(sys.vacuum.clone());
    for idx in 1..Word::count_up_to(len) {
        let w = Word::from_index(idx);
        let (head, tail) = w.split(w.len() - 1);
        let op = &vars[(head.letter(0) == Letter::Y) as usize];
        states.push(op.apply(&states[tail.index()])?.vector);
    }
    Ok(states)
}

/// `E[w] = ⟨wφ, φ⟩`.
pub fn moment(sys: &ApcSystem, word: &Word) -> Result<f64> {
    if word.len() > sys.truncation() {
        return Err(Error::WordTooLong {
            word: word.to_string(),
            len: word.len(),
            truncation: sys.truncation(),
        });
    }
    let mut state = sys.vacuum.clone();
    for l in word.letters().rev() {
        state = sys.variable(l.var()).apply(&state)?.vector;
    }
    state.inner(&sys.vacuum)
}

/// All moments of words up to `degree`, indexed by [`Word::index`].
pub fn moments_up_to(sys: &ApcSystem, degree: usize) -> Result<Vec<f64>> {
    let states = word_states(sys, degree)?;
    Ok(states.iter().map(|s| s.block(0)[0]).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEquality {
    pub equal: bool,
    pub degree: usize,
    pub worst_word: String,
    pub worst_diff: f64,
}

/// Compares all moments of words up to `degree`; equality holds when the
/// largest difference is at most `tol · (1 + max |moment|)`.
pub fn moment_equal(a: &ApcSystem, b: &ApcSystem, degree: usize, tol: f64) -> Result<MomentEquality> {
    let ma = moments_up_to(a, degree)?;
    let mb = moments_up_to(b, degree)?;
    let mut worst = (Word::EMPTY, 0.0f64);
    let mut scale = 0.0f64;
    for (i, (x, y)) in ma.iter().zip(&mb).enumerate() {
        scale = scale.max(x.abs()).max(y.abs());
        let diff = (x - y).abs();
        if diff > worst.1 || diff.is_nan() {
            worst = (Word::from_index(i), diff);
        }
    }
    Ok(MomentEquality {
        equal: worst.1 <= tol * (1.0 + scale),
        degree,
        worst_word: worst.0.to_string(),
        worst_diff: worst.1,
    })
}

/// Relative squared-norm threshold under which a Gram–Schmidt direction is
/// treated as zero.
pub const RANK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct DecompositionResult {
    pub system: ApcSystem,
    pub grade_dims: Vec<usize>,
    pub rank_tolerance_used: f64,
    /// `false` when the moment table stops at `2N`, so the preservation
    /// block on grade `N` could not be computed and was left at zero.
    pub top_block_complete: bool,
}

/// Minimal joint APC decomposition of `mf` on the chaos spaces up to
/// grade `level`.
///
/// Grade `n` is obtained by Gram–Schmidt (with one reorthogonalization
/// pass) of the candidates `x·e`, `y·e` for `e` in the grade `n − 1`
/// basis, taken with all `x·` candidates first. Polynomials are stored as
/// coefficient vectors over words.
pub fn decompose(mf: &MomentFunctional, level: usize) -> Result<DecompositionResult> {
    if level < 2 {
        return Err(Error::TruncationTooSmall {
            truncation: level,
            reason: "decomposition needs N >= 2".into(),
        });
    }
    if 2 * level > mf.degree_cap() {
        return Err(Error::InsufficientMoments(format!(
            "truncation {level} needs moments up to degree {}, table stops at {}",
            2 * level,
            mf.degree_cap()
        )));
    }
    let nwords = Word::count_up_to(level);
    // gram[w1, w2] = ⟨w1φ, w2φ⟩
    let gram = DMatrix::from_fn(nwords, nwords, |i, j| {
        let w = Word::from_index(i).reversed().concat(&Word::from_index(j));
        mf.get(&w).unwrap_or(f64::NAN)
    });
    if gram.iter().any(|x| x.is_nan()) {
        return Err(Error::InsufficientMoments(
            "moment table has gaps below degree 2N".into(),
        ));
    }
    if (0..nwords).any(|i| (0..i).any(|j| (gram[(i, j)] - gram[(j, i)]).abs() > 1e-9 * (1.0 + gram[(i, j)].abs()))) {
        return Err(Error::MalformedMoments(
            "moments are not invariant under word reversal".into(),
        ));
    }

    let prepend = |c: &DVector<f64>, l: Letter, len: usize| -> DVector<f64> {
        let mut out = DVector::zeros(nwords);
        for idx in 0..Word::count_up_to(len) {
            if c[idx] != 0.0 {
                out[Word::from_index(idx).prepend(l).index()] = c[idx];
            }
        }
        out
    };
    let ip = |a: &DVector<f64>, b: &DVector<f64>| -> f64 { (a.transpose() * &gram * b)[(0, 0)] };

    let mut e0 = DVector::zeros(nwords);
    e0[0] = 1.0;
    let mut basis: Vec<Vec<DVector<f64>>> = vec![vec![e0]];

    for n in 1..=level {
        let prev = &basis[n - 1];
        let candidates: Vec<DVector<f64>> = [Letter::X, Letter::Y]
            .iter()
            .flat_map(|&l| prev.iter().map(move |e| (l, e)))
            .map(|(l, e)| prepend(e, l, n - 1))
            .collect();
        let lower: Vec<&DVector<f64>> = basis.iter().flatten().collect();
        let mut residuals = Vec::with_capacity(candidates.len());
        let mut raw_max = 0.0f64;
        for cand in &candidates {
            let raw = ip(cand, cand);
            raw_max = raw_max.max(raw);
            let mut r = cand.clone();
            for _ in 0..2 {
                for e in &lower {
                    let c = ip(&r, e);
                    r.axpy(-c, e, 1.0);
                }
            }
            residuals.push(r);
        }
        let norms: Vec<f64> = residuals.iter().map(|r| ip(r, r)).collect();
        let grade_max = norms.iter().copied().fold(0.0, f64::max);
        if let Some(bad) = norms.iter().find(|&&v| v < -RANK_TOLERANCE * raw_max.max(1.0)) {
            return Err(Error::NotPsd(format!(
                "negative squared norm {bad:e} at grade {n}"
            )));
        }
        let mut accepted: Vec<DVector<f64>> = Vec::new();
        if grade_max > RANK_TOLERANCE * raw_max {
            for mut r in residuals {
                for _ in 0..2 {
                    for e in &accepted {
                        let c = ip(&r, e);
                        r.axpy(-c, e, 1.0);
                    }
                }
                let nn = ip(&r, &r);
                if nn < -RANK_TOLERANCE * grade_max {
                    return Err(Error::NotPsd(format!(
                        "negative squared norm {nn:e} at grade {n}"
                    )));
                }
                if nn > RANK_TOLERANCE * grade_max {
                    accepted.push(r / nn.sqrt());
                }
            }
        }
        basis.push(accepted);
    }
    // Keep the chain-termination invariant: nothing after an empty grade.
    if let Some(z) = basis.iter().position(|b| b.is_empty()) {
        for b in basis.iter_mut().skip(z) {
            b.clear();
        }
    }

    let dims: Vec<usize> = basis.iter().map(|b| b.len()).collect();
    let grading = Grading::new(dims.clone())?;
    let mut top_block_complete = true;

    let mut triple_for = |l: Letter| -> Result<ApcTriple> {
        let mut minus = GradedOperator::zeros(&grading, -1);
        let mut zero = GradedOperator::zeros(&grading, 0);
        for n in 0..=level {
            for (jdx, ej) in basis[n].iter().enumerate() {
                // ⟨X e_j, e_i⟩ = Σ c_j(w) c_i(w') E[rev(w) ℓ w']
                let word_fn = |target: &DVector<f64>, target_len: usize| -> Option<f64> {
                    let mut acc = 0.0;
                    for a in 0..Word::count_up_to(n) {
                        if ej[a] == 0.0 {
                            continue;
                        }
                        let left = Word::from_index(a).reversed().concat(&Word::from_letters(&[l]));
                        for b in 0..Word::count_up_to(target_len) {
                            if target[b] == 0.0 {
                                continue;
                            }
                            acc += ej[a] * target[b] * mf.get(&left.concat(&Word::from_index(b))).ok()?;
                        }
                    }
                    Some(acc)
                };
                if n >= 1 {
                    for (idx, ei) in basis[n - 1].iter().enumerate() {
                        let v = word_fn(ei, n - 1).ok_or_else(|| {
                            Error::InsufficientMoments(format!("annihilation block at grade {n}"))
                        })?;
                        minus.block_mut(n).expect("in range")[(idx, jdx)] = v;
                    }
                }
                for (idx, ei) in basis[n].iter().enumerate() {
                    match word_fn(ei, n) {
                        Some(v) => zero.block_mut(n).expect("in range")[(idx, jdx)] = v,
                        None if n == level => top_block_complete = false,
                        None => {
                            return Err(Error::InsufficientMoments(format!(
                                "preservation block at grade {n}"
                            )))
                        }
                    }
                }
            }
        }
        // symmetrize away rounding so that a⁰ is exactly self-adjoint
        for n in 0..=level {
            if let Some(b) = zero.block_mut(n) {
                let s = (&*b + b.transpose()) * 0.5;
                b.copy_from(&s);
            }
        }
        if !top_block_complete {
            if let Some(b) = zero.block_mut(level) {
                b.fill(0.0);
            }
        }
        let plus = minus.adjoint();
        Ok(ApcTriple { minus, zero, plus })
    };
    let x = triple_for(Letter::X)?;
    let y = triple_for(Letter::Y)?;
    Ok(DecompositionResult {
        system: ApcSystem::new(x, y)?,
        grade_dims: dims,
        rank_tolerance_used: RANK_TOLERANCE,
        top_block_complete,
    })
}

/// `X` as an [`OperatorSum`], re-exported for callers that only hold words.
pub fn letter_operator(sys: &ApcSystem, l: Letter) -> OperatorSum {
    sys.variable(l.var())
}
