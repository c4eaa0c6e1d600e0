//! Rank-one closed forms: terminating Gauss series, Gegenbauer-type
//! polynomials, the explicit eigenfunction formula they assemble into, and
//! the one-dimensional Bessel-type series that appears in the scaling limit.
//!
//! Everything here is an independent oracle for the triangular solve: the
//! closed form is built from hypergeometric coefficient recursions, never
//! from the operator, so exact agreement of the two paths is a meaningful
//! check rather than a tautology.
//!
//! Coordinates: rank-one weights are integers `n`, and the "analyst's"
//! variable z relates to the simple-root coordinate t of the evaluation
//! point by z = 2t, so that `e^n` evaluated at t is `exp(n z)`.

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use crate::algebra::TrigPoly;
use crate::error::{EngineError, Result};
use crate::rat::{q_to_f64, qi, qr, Q};
use crate::rootsys::Weight;

/// Maximum number of terms granted to the convergent Bessel-type series.
const BESSEL_MAX_TERMS: usize = 500;

/// Coefficients `t_j` of `u^j` in the Gauss series with parameters
/// `(a, b; c)`, which must terminate: `a` or `b` is required to be a
/// nonpositive integer.  The recursion is
/// `t_{j+1} = t_j (a+j)(b+j) / ((c+j)(j+1))`.
fn gauss_coeffs(a: &Q, b: &Q, c: &Q) -> Result<Vec<Q>> {
    let degree_of = |q: &Q| -> Option<usize> {
        if q.is_integer() && !q.is_positive() {
            Some((-q.to_integer()).try_into().unwrap())
        } else {
            None
        }
    };
    let m = match (degree_of(a), degree_of(b)) {
        (Some(da), Some(db)) => da.min(db),
        (Some(da), None) => da,
        (None, Some(db)) => db,
        (None, None) => return Err(EngineError::NonTerminatingSeries),
    };
    let mut coeffs = Vec::with_capacity(m + 1);
    let mut t = Q::one();
    coeffs.push(t.clone());
    for j in 0..m {
        let jq = qi(j as i64);
        let den = (c + &jq) * qi(j as i64 + 1);
        if den.is_zero() {
            return Err(EngineError::InvalidArgument(format!(
                "lower parameter {} hits a nonpositive integer before the series terminates",
                c
            )));
        }
        t = t * (a + &jq) * (b + &jq) / den;
        coeffs.push(t.clone());
    }
    Ok(coeffs)
}

/// Exact value of a terminating Gauss hypergeometric sum at a rational
/// argument.
pub fn hyp2f1(a: &Q, b: &Q, c: &Q, u: &Q) -> Result<Q> {
    let coeffs = gauss_coeffs(a, b, c)?;
    let mut acc = Q::zero();
    for t in coeffs.iter().rev() {
        acc = acc * u + t;
    }
    Ok(acc)
}

/// Floating-point Gauss sum.  Terminating series are summed in full; a
/// non-terminating series is summed inside the unit disc until the tail is
/// negligible and rejected on or outside it.
pub fn hyp2f1_f64(a: f64, b: f64, c: f64, u: f64) -> Result<f64> {
    let degree_of = |v: f64| -> Option<u64> {
        if v <= 0.0 && v.fract() == 0.0 {
            Some(-v as u64)
        } else {
            None
        }
    };
    let terminates = match (degree_of(a), degree_of(b)) {
        (Some(da), Some(db)) => Some(da.min(db)),
        (Some(da), None) => Some(da),
        (None, Some(db)) => Some(db),
        (None, None) => None,
    };
    if terminates.is_none() && u.abs() >= 1.0 {
        return Err(EngineError::NonTerminatingSeries);
    }
    let max_terms = terminates.unwrap_or(100_000);
    let mut t = 1.0_f64;
    let mut acc = 1.0_f64;
    for j in 0..max_terms {
        let jf = j as f64;
        if c + jf == 0.0 {
            return Err(EngineError::InvalidArgument(format!(
                "lower parameter {} hits a nonpositive integer",
                c
            )));
        }
        t *= (a + jf) * (b + jf) * u / ((c + jf) * (jf + 1.0));
        acc += t;
        if terminates.is_none() && t.abs() <= 1e-17 * (acc.abs() + 1.0) {
            return Ok(acc);
        }
    }
    if terminates.is_some() {
        Ok(acc)
    } else {
        Err(EngineError::SeriesLimit {
            terms: max_terms as usize,
        })
    }
}

/// Gegenbauer-type polynomial of degree `m` with parameter `k`, normalized
/// to 1 at `x = 1`: the terminating Gauss sum with parameters
/// `(m + 2k, -m; k + 1/2)` at `u = (1-x)/2`.
pub fn gegenbauer_q(m: u32, k: &Q, x: &Q) -> Result<Q> {
    let a = qi(m as i64) + qi(2) * k;
    let b = qi(-(m as i64));
    let c = k + qr(1, 2);
    let u = (Q::one() - x) / qi(2);
    hyp2f1(&a, &b, &c, &u)
}

/// Floating-point Gegenbauer-type value for large degrees.  Same recursion
/// as the exact path, with an early exit once the tail is negligible (the
/// series terminates at degree `m` regardless).
pub fn gegenbauer_q_approx(m: u64, k: f64, x: f64) -> f64 {
    let a = m as f64 + 2.0 * k;
    let b = -(m as f64);
    let c = k + 0.5;
    let u = (1.0 - x) / 2.0;
    let mut t = 1.0_f64;
    let mut acc = 1.0_f64;
    for j in 0..m {
        let jf = j as f64;
        t *= (a + jf) * (b + jf) * u / ((c + jf) * (jf + 1.0));
        acc += t;
        if t.abs() < 1e-18 * (acc.abs() + 1.0) {
            break;
        }
    }
    acc
}

fn check_rank_one_k(k: &Q) -> Result<()> {
    if k.is_negative() {
        return Err(EngineError::InvalidArgument(format!(
            "multiplicity {} is negative",
            k
        )));
    }
    Ok(())
}

/// The closed form for the normalized rank-one eigenfunction (value 1 at the
/// origin), as an exact trigonometric polynomial:
///
/// ```text
/// E_n / E_n(0) = Q_m^k(cosh z) + ((n~ + k)/(2k+1)) sinh z Q_{m-1}^{k+1}(cosh z)
/// ```
///
/// with `m = |n|` and spectral point `n~ = n + k` for `n > 0`, `n - k` for
/// `n < 0`; for `n = 0` the second term carries an exact factor 0.
pub fn closed_e_trig(n: i64, k: &Q) -> Result<TrigPoly> {
    check_rank_one_k(k)?;
    let m = n.unsigned_abs() as u32;

    // cosh, sinh, and u = (1 - cosh)/2 in the weight lattice.
    let mut cosh = TrigPoly::zero();
    cosh.add_term(Weight(vec![1]), qr(1, 2));
    cosh.add_term(Weight(vec![-1]), qr(1, 2));
    let mut sinh = TrigPoly::zero();
    sinh.add_term(Weight(vec![1]), qr(1, 2));
    sinh.add_term(Weight(vec![-1]), qr(-1, 2));
    let u = TrigPoly::constant(1, Q::one()).sub(&cosh).scale(&qr(1, 2));

    let eval_series = |coeffs: &[Q]| -> TrigPoly {
        let mut acc = TrigPoly::zero();
        for t in coeffs.iter().rev() {
            acc = acc.mul(&u).add(&TrigPoly::constant(1, t.clone()));
        }
        acc
    };

    let a = qi(m as i64) + qi(2) * k;
    let c = k + qr(1, 2);
    let mut g = eval_series(&gauss_coeffs(&a, &qi(-(m as i64)), &c)?);
    if m >= 1 {
        let tilde = if n > 0 { qi(n) + k } else { qi(n) - k };
        let factor = (tilde + k) / (qi(2) * k + qi(1));
        let a2 = qi(m as i64 - 1) + qi(2) * (k + Q::one());
        let c2 = k + qr(3, 2);
        let lower = eval_series(&gauss_coeffs(&a2, &qi(-(m as i64 - 1)), &c2)?);
        g = g.add(&sinh.mul(&lower).scale(&factor));
    }
    Ok(g)
}

/// Floating-point version of the closed form, in the analyst's coordinate
/// (value of the normalized eigenfunction at the point with z = 2t).
pub fn closed_e_f64(n: i64, k: f64, z: f64) -> f64 {
    let m = n.unsigned_abs();
    let x = z.cosh();
    let mut g = gegenbauer_q_approx(m, k, x);
    if m >= 1 {
        let tilde = if n > 0 { n as f64 + k } else { n as f64 - k };
        let factor = (tilde + k) / (2.0 * k + 1.0);
        g += factor * z.sinh() * gegenbauer_q_approx(m - 1, k + 1.0, x);
    }
    g
}

/// Gegenbauer-type value continued to complex argument.
pub fn gegenbauer_q_complex(m: u64, k: f64, x: Complex64) -> Complex64 {
    let a = m as f64 + 2.0 * k;
    let b = -(m as f64);
    let c = k + 0.5;
    let u = (Complex64::new(1.0, 0.0) - x) / 2.0;
    let mut t = Complex64::new(1.0, 0.0);
    let mut acc = t;
    for j in 0..m {
        let jf = j as f64;
        t = t * (a + jf) * (b + jf) * u / ((c + jf) * (jf + 1.0));
        acc += t;
        if t.norm() < 1e-18 * (acc.norm() + 1.0) {
            break;
        }
    }
    acc
}

/// Closed form of the normalized eigenfunction at a complex point of the
/// analyst's coordinate.
pub fn closed_e(n: i64, k: f64, z: Complex64) -> Complex64 {
    let m = n.unsigned_abs();
    let x = z.cosh();
    let mut g = gegenbauer_q_complex(m, k, x);
    if m >= 1 {
        let tilde = if n > 0 { n as f64 + k } else { n as f64 - k };
        let factor = (tilde + k) / (2.0 * k + 1.0);
        g += z.sinh() * gegenbauer_q_complex(m - 1, k + 1.0, x) * factor;
    }
    g
}

/// Bessel-type power series `sum_j (-w^2/4)^j / (j! (alpha+1)_j)`, the
/// degree-infinity limit of the Gegenbauer-type polynomials.  Requires
/// `alpha > -1`.
pub fn bessel_j(alpha: &Q, w: Complex64) -> Result<Complex64> {
    if *alpha <= qi(-1) {
        return Err(EngineError::InvalidArgument(format!(
            "series parameter {} is not greater than -1",
            alpha
        )));
    }
    let alpha = q_to_f64(alpha);
    let ratio = -w * w / 4.0;
    let mut t = Complex64::new(1.0, 0.0);
    let mut acc = t;
    for j in 0..BESSEL_MAX_TERMS {
        let jf = j as f64;
        t = t * ratio / ((jf + 1.0) * (alpha + jf + 1.0));
        acc += t;
        if t.norm() <= 1e-17 * (acc.norm() + 1.0) && jf + 1.0 > w.norm() {
            return Ok(acc);
        }
    }
    Err(EngineError::SeriesLimit {
        terms: BESSEL_MAX_TERMS,
    })
}

/// The rank-one symmetric kernel limit: the Bessel-type series of parameter
/// `k - 1/2` at the rotated argument `i * lambda * z` (real-valued for real
/// inputs).
pub fn bessel_limit_rank_one(k: &Q, lambda: f64, z: f64) -> Result<f64> {
    check_rank_one_k(k)?;
    let alpha = k - qr(1, 2);
    let v = bessel_j(&alpha, Complex64::new(0.0, lambda * z))?;
    Ok(v.re)
}

/// One row of the oscillatory degeneration `Q_n^k(cos(z/n)) -> j_{k-1/2}(z)`:
/// returns the degree-`n` value, the Bessel-type reference, and their gap.
pub fn gegenbauer_bessel_limit(k: &Q, z: f64, n: u64) -> Result<(f64, f64, f64)> {
    check_rank_one_k(k)?;
    let approx = gegenbauer_q_approx(n, q_to_f64(k), (z / n as f64).cos());
    let reference = bessel_j(&(k - qr(1, 2)), Complex64::new(z, 0.0))?.re;
    Ok((approx, reference, (approx - reference).abs()))
}
