//! Random parameter generators for randomized self-tests.

use nalgebra::Matrix2;
use rand::Rng;

use crate::meixner1d::JacobiSpec;
use crate::vectors2d::MixedPreservationSpec;

/// Infinite-support spec with `α ∈ [−2, 2]`, `β ∈ [0, 2]`, `t ∈ (0, 2]`.
pub fn random_jacobi_spec<R: Rng + ?Sized>(rng: &mut R) -> JacobiSpec {
    JacobiSpec::infinite(
        rng.random_range(-2.0..=2.0),
        rng.random_range(0.0..=2.0),
        2.0 - rng.random_range(0.0..2.0),
    )
}

fn unit<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    (th.cos(), th.sin())
}

/// Mixed-preservation parameters with both orthogonality constraints and
/// `β_T, β_Z ≥ 0`.
///
/// `(p, r)` is drawn at an acute angle to `(c, d)`; then
/// `(s', v) = λ(−d, c)` and `(j, k) = μ(−r, p)` with `λ, μ > 0`, which makes
/// `β_Z = λμ β_T`.
pub fn random_mixed_spec<R: Rng + ?Sized>(rng: &mut R) -> MixedPreservationSpec {
    let (c0, d0) = unit(rng);
    let len_cd = rng.random_range(0.5..1.5);
    let (c, d) = (len_cd * c0, len_cd * d0);
    let phi: f64 = rng.random_range(-1.2..1.2);
    let len_pr = rng.random_range(0.3..1.5);
    let (p, r) = (
        len_pr * (c0 * phi.cos() - d0 * phi.sin()),
        len_pr * (c0 * phi.sin() + d0 * phi.cos()),
    );
    let lambda = rng.random_range(0.3..1.5) / len_cd;
    let mu = rng.random_range(0.3..1.5) / len_pr;
    MixedPreservationSpec {
        c,
        d,
        j: -mu * r,
        k: mu * p,
        p,
        r,
        s_prime: -lambda * d,
        v: lambda * c,
        truncation: None,
    }
}

/// Independent classical pair: `r = s' = 0` forces `d = j = 0`.
pub fn random_commutative_spec<R: Rng + ?Sized>(rng: &mut R) -> MixedPreservationSpec {
    let sign = |rng: &mut R| if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let p: f64 = sign(rng) * rng.random_range(0.3..1.5);
    let v: f64 = sign(rng) * rng.random_range(0.3..1.5);
    // c p ≥ 0 and k v ≥ 0 keep both β nonnegative
    let c = p.signum() * rng.random_range(0.0..1.5);
    let k = v.signum() * rng.random_range(0.0..1.5);
    MixedPreservationSpec {
        c,
        d: 0.0,
        j: 0.0,
        k,
        p,
        r: 0.0,
        s_prime: 0.0,
        v,
        truncation: None,
    }
}

pub fn condition_number(m: &Matrix2<f64>) -> f64 {
    let sv = m.singular_values();
    let (hi, lo) = (sv.max(), sv.min());
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Matrix with entries in `[−2, 2]` and condition number at most `max_cond`.
pub fn random_mixing_matrix<R: Rng + ?Sized>(rng: &mut R, max_cond: f64) -> Matrix2<f64> {
    loop {
        let m = Matrix2::from_fn(|_, _| rng.random_range(-2.0..=2.0));
        if condition_number(&m) <= max_cond {
            return m;
        }
    }
}
