//! Commutator tables on `W = span{I, a_x^ε, a_y^ε}` and the structure
//! coefficients of two-dimensional vectors of class `M_L`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_in_span, SpanMember};
use crate::graded::{bracket, GradedOperator};
use crate::meixner1d::CLOSURE_TOLERANCE;
use crate::vectors2d::ApcSystem;

/// Tolerance of each Jacobi-identity check, relative to `1 + |lhs| + |rhs|`.
pub const JACOBI_TOLERANCE: f64 = 1e-8;

/// Named members of the spanning set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Gen {
    I,
    XM,
    X0,
    XP,
    YM,
    Y0,
    YP,
}

impl Gen {
    const ALL: [Gen; 7] = [Gen::I, Gen::XM, Gen::X0, Gen::XP, Gen::YM, Gen::Y0, Gen::YP];

    fn label(self) -> &'static str {
        match self {
            Gen::I => "I",
            Gen::XM => "x-",
            Gen::X0 => "x0",
            Gen::XP => "x+",
            Gen::YM => "y-",
            Gen::Y0 => "y0",
            Gen::YP => "y+",
        }
    }

    fn op(self, sys: &ApcSystem) -> Option<&GradedOperator> {
        Some(match self {
            Gen::I => return None,
            Gen::XM => &sys.x.minus,
            Gen::X0 => &sys.x.zero,
            Gen::XP => &sys.x.plus,
            Gen::YM => &sys.y.minus,
            Gen::Y0 => &sys.y.zero,
            Gen::YP => &sys.y.plus,
        })
    }
}

/// Least-squares expansion of one bracket in the matching shift sector of
/// `W`. `coeffs` follow the order of `basis`; an empty basis means the
/// bracket is required to vanish.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketFit {
    pub bracket: String,
    pub basis: Vec<String>,
    pub coeffs: Vec<f64>,
    pub residual: f64,
}

impl BracketFit {
    pub fn closed(&self) -> bool {
        self.residual < CLOSURE_TOLERANCE
    }
}

fn valid_norm(op: &GradedOperator) -> f64 {
    let grades: Vec<usize> = op.valid_sources().collect();
    op.norm_over(grades)
}

fn fit_bracket(sys: &ApcSystem, a: Gen, b: Gen) -> Result<BracketFit> {
    let name = format!("[{},{}]", a.label(), b.label());
    let (Some(oa), Some(ob)) = (a.op(sys), b.op(sys)) else {
        return Ok(BracketFit {
            bracket: name,
            basis: vec![],
            coeffs: vec![],
            residual: 0.0,
        });
    };
    let br = bracket(oa, ob)?;
    let hint = valid_norm(oa) * valid_norm(ob);
    let basis: &[Gen] = match br.shift() {
        -1 => &[Gen::XM, Gen::YM],
        0 => &[Gen::I, Gen::X0, Gen::Y0],
        1 => &[Gen::XP, Gen::YP],
        _ => &[],
    };
    // [x0, y0] is shift 0 but must vanish outright
    let basis = if (a, b) == (Gen::X0, Gen::Y0) { &[] } else { basis };
    let members: Vec<SpanMember<'_>> = basis
        .iter()
        .map(|g| g.op(sys).map_or(SpanMember::Identity, SpanMember::Op))
        .collect();
    let fit = if members.is_empty() {
        let scale = hint.max(f64::MIN_POSITIVE);
        let n = valid_norm(&br);
        crate::fit::Fit {
            coeffs: vec![],
            residual: if n == 0.0 { 0.0 } else { n / scale.max(n) },
            grades: vec![],
        }
    } else {
        fit_in_span(&br, &members, hint)?
    };
    Ok(BracketFit {
        bracket: name,
        basis: basis.iter().map(|g| g.label().to_string()).collect(),
        coeffs: fit.coeffs,
        residual: fit.residual,
    })
}

/// All 21 brackets between distinct members of `W`.
pub fn bracket_table(sys: &ApcSystem) -> Result<Vec<BracketFit>> {
    require_truncation(sys)?;
    let mut out = Vec::with_capacity(21);
    for (i, &a) in Gen::ALL.iter().enumerate() {
        for &b in &Gen::ALL[i + 1..] {
            out.push(fit_bracket(sys, a, b)?);
        }
    }
    Ok(out)
}

fn require_truncation(sys: &ApcSystem) -> Result<()> {
    if sys.truncation() < 5 && !sys.grading.is_terminated() {
        return Err(Error::TruncationTooSmall {
            truncation: sys.truncation(),
            reason: "bracket fits need N >= 5".into(),
        });
    }
    Ok(())
}

fn find<'a>(table: &'a [BracketFit], name: &str) -> &'a BracketFit {
    table
        .iter()
        .find(|f| f.bracket == name)
        .expect("bracket present in table")
}

/// The seventeen coefficients of
///
/// ```text
/// [x-,x+] = bI + c x0 + d y0        [x-,x0] = p x- + q y-
/// [x-,y+] = [y-,x+] = eI + f x0 + g y0
/// [y-,y+] = hI + j x0 + k y0        [x-,y0] = r x- + s y-
///                                   [y-,x0] = r' x- + s' y-
///                                   [y-,y0] = u x- + v y-
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureCoefficients {
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub h: f64,
    pub j: f64,
    pub k: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
    pub r_prime: f64,
    pub s_prime: f64,
    pub u: f64,
    pub v: f64,
    /// `s' − p`.
    pub gamma: f64,
    /// `r − v`.
    pub delta: f64,
    /// Worst relative residual over all brackets and consistency checks.
    pub residual: f64,
    pub brackets: Vec<BracketFit>,
}

impl StructureCoefficients {
    /// The seventeen coefficients in declaration order.
    pub fn values(&self) -> [(&'static str, f64); 17] {
        [
            ("b", self.b),
            ("c", self.c),
            ("d", self.d),
            ("e", self.e),
            ("f", self.f),
            ("g", self.g),
            ("h", self.h),
            ("j", self.j),
            ("k", self.k),
            ("p", self.p),
            ("q", self.q),
            ("r", self.r),
            ("s", self.s),
            ("r_prime", self.r_prime),
            ("s_prime", self.s_prime),
            ("u", self.u),
            ("v", self.v),
        ]
    }

    /// Largest absolute difference between the coefficients of two sets.
    pub fn max_abs_diff(&self, other: &StructureCoefficients) -> f64 {
        self.values()
            .iter()
            .zip(other.values())
            .map(|((_, a), (_, b))| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn couplings(&self) -> [f64; 4] {
        [self.q, self.s, self.r_prime, self.u]
    }

    pub fn is_closed(&self) -> bool {
        self.residual < CLOSURE_TOLERANCE
    }
}

/// Relative disagreement between two fits of the same quantity, folded
/// into the residual.
fn agreement(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

/// Fits the bracket relations of a centered system and returns the
/// seventeen coefficients together with the per-bracket residuals.
pub fn extract_coefficients(sys: &ApcSystem) -> Result<StructureCoefficients> {
    sys.require_centered()?;
    require_truncation(sys)?;
    require_independent_annihilators(sys)?;
    let table = bracket_table(sys)?;

    let xmxp = find(&table, "[x-,x+]");
    let xmyp = find(&table, "[x-,y+]");
    let ymxp = find(&table, "[x+,y-]");
    let ymyp = find(&table, "[y-,y+]");
    let xmx0 = find(&table, "[x-,x0]");
    let xmy0 = find(&table, "[x-,y0]");
    let x0ym = find(&table, "[x0,y-]");
    let ymy0 = find(&table, "[y-,y0]");

    let (b, c, d) = (xmxp.coeffs[0], xmxp.coeffs[1], xmxp.coeffs[2]);
    let (e, f, g) = (xmyp.coeffs[0], xmyp.coeffs[1], xmyp.coeffs[2]);
    let (h, j, k) = (ymyp.coeffs[0], ymyp.coeffs[1], ymyp.coeffs[2]);
    let (p, q) = (xmx0.coeffs[0], xmx0.coeffs[1]);
    let (r, s) = (xmy0.coeffs[0], xmy0.coeffs[1]);
    // [y-,x0] = −[x0,y-]
    let (r_prime, s_prime) = (-x0ym.coeffs[0], -x0ym.coeffs[1]);
    let (u, v) = (ymy0.coeffs[0], ymy0.coeffs[1]);

    let mut residual = table.iter().map(|f| f.residual).fold(0.0, f64::max);

    // [y-,x+] = −[x+,y-] must carry the same triple as [x-,y+].
    for (a, bb) in [(e, -ymxp.coeffs[0]), (f, -ymxp.coeffs[1]), (g, -ymxp.coeffs[2])] {
        residual = residual.max(agreement(a, bb));
    }
    // E[XY] read off the vacuum
    let br = bracket(&sys.x.minus, &sys.y.plus)?;
    let e_vac = br.block(0).map_or(0.0, |m| m[(0, 0)]);
    residual = residual.max(agreement(e, e_vac));
    // the raising-side expansions are adjoints of the lowering ones
    let x0xp = find(&table, "[x0,x+]");
    let xpy0 = find(&table, "[x+,y0]");
    let x0yp = find(&table, "[x0,y+]");
    let y0yp = find(&table, "[y0,y+]");
    let pairs = [
        (p, x0xp.coeffs[0]),
        (q, x0xp.coeffs[1]),
        (r, -xpy0.coeffs[0]),
        (s, -xpy0.coeffs[1]),
        (r_prime, x0yp.coeffs[0]),
        (s_prime, x0yp.coeffs[1]),
        (u, y0yp.coeffs[0]),
        (v, y0yp.coeffs[1]),
    ];
    for (a, bb) in pairs {
        residual = residual.max(agreement(a, bb));
    }

    Ok(StructureCoefficients {
        b,
        c,
        d,
        e,
        f,
        g,
        h,
        j,
        k,
        p,
        q,
        r,
        s,
        r_prime,
        s_prime,
        u,
        v,
        gamma: s_prime - p,
        delta: r - v,
        residual,
        brackets: table,
    })
}

fn require_independent_annihilators(sys: &ApcSystem) -> Result<()> {
    let fit = fit_in_span(&sys.y.minus, &[SpanMember::Op(&sys.x.minus)], 0.0)?;
    let back = fit_in_span(&sys.x.minus, &[SpanMember::Op(&sys.y.minus)], 0.0)?;
    if fit.residual < 1e-9 || back.residual < 1e-9 {
        return Err(Error::Degenerate(
            "a_x⁻ and a_y⁻ are linearly dependent".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureVerdict {
    #[serde(rename = "is_ML")]
    pub is_ml: bool,
    pub coefficients: Option<StructureCoefficients>,
    pub violated_brackets: Vec<BracketFit>,
}

/// Decides whether `W` is closed under commutators. Coefficients are
/// attached when the system is closed, centered and non-degenerate.
pub fn check_ml(sys: &ApcSystem) -> Result<ClosureVerdict> {
    let table = bracket_table(sys)?;
    let mut violated: Vec<BracketFit> = table.iter().filter(|f| !f.closed()).cloned().collect();
    let ymxp = find(&table, "[x+,y-]");
    let xmyp = find(&table, "[x-,y+]");
    // [x-,y+] and [y-,x+] = −[x+,y-] must coincide
    let ab = bracket(&sys.x.minus, &sys.y.plus)?;
    let ba = bracket(&sys.y.minus, &sys.x.plus)?;
    let diff = ab.add_scaled(-1.0, &ba)?;
    let scale = (valid_norm(&sys.x.minus) * valid_norm(&sys.y.plus)).max(f64::MIN_POSITIVE);
    let cross = valid_norm(&diff) / scale;
    if (cross.is_nan() || cross >= CLOSURE_TOLERANCE) && xmyp.closed() && ymxp.closed() {
        violated.push(BracketFit {
            bracket: "[x-,y+] - [y-,x+]".into(),
            basis: vec![],
            coeffs: vec![],
            residual: cross,
        });
    }
    let is_ml = violated.is_empty();
    let coefficients = if is_ml {
        extract_coefficients(sys).ok().filter(|c| c.is_closed())
    } else {
        None
    };
    Ok(ClosureVerdict {
        is_ml,
        coefficients,
        violated_brackets: violated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// Consequences of the Jacobi identity for the bracket table. The last
/// four are only meaningful, and only reported, when `q = s = r' = u = 0`.
pub fn jacobi_audit(cf: &StructureCoefficients) -> Vec<JacobiCheck> {
    let check = |name: &str, lhs: f64, rhs: f64| JacobiCheck {
        name: name.to_string(),
        lhs,
        rhs,
        pass: (lhs - rhs).abs() <= JACOBI_TOLERANCE * (1.0 + lhs.abs() + rhs.abs()),
    };
    let StructureCoefficients {
        b,
        c,
        d,
        e,
        f,
        g,
        h,
        j,
        k,
        p,
        q,
        r,
        s,
        r_prime,
        s_prime,
        u,
        v,
        gamma,
        delta,
        ..
    } = *cf;
    let mut out = vec![
        check("s*r' = u*q", s * r_prime, u * q),
        check("s*gamma = -q*delta", s * gamma, -q * delta),
        check("u*gamma = -r'*delta", u * gamma, -r_prime * delta),
        // reduces to r' − q = −eγ once b = h = 1
        check("r'*b - q*h = -e*gamma", r_prime * b - q * h, -e * gamma),
    ];
    let scale = 1.0 + cf.values().iter().map(|(_, x)| x.abs()).fold(0.0, f64::max);
    if cf.couplings().iter().all(|x| x.abs() <= JACOBI_TOLERANCE * scale) {
        out.extend([
            check("c*s' + d*v = 0", c * s_prime + d * v, 0.0),
            check("j*p + k*r = 0", j * p + k * r, 0.0),
            check("f*p + g*r = 0", f * p + g * r, 0.0),
            check("f*s' + g*v = 0", f * s_prime + g * v, 0.0),
        ]);
    }
    out
}
