//! Difference-reflection operators on the weight lattice and the triangular
//! solve for their joint eigenfunctions.
//!
//! For a direction `xi` the operator acts on an exponential `e^nu` as
//!
//! ```text
//! D_xi e^nu = (<nu,xi> - <rho(k),xi>) e^nu
//!           + sum_{alpha > 0} k_alpha <alpha,xi> * trunc_alpha(nu)
//! ```
//!
//! where `trunc_alpha(nu)` is the truncated geometric string between `nu` and
//! its reflection `sigma_alpha nu`: with `m = <nu, alpha^v>`,
//!
//! ```text
//! m > 0:  e^nu + e^{nu-alpha} + ... + e^{nu-(m-1)alpha}
//! m = 0:  0
//! m < 0:  -(e^{nu+alpha} + ... + e^{nu+|m|alpha})
//! ```
//!
//! All strings stay inside the downset of `nu`, so the operator is triangular
//! in any linear extension of the dominance-type order, and its diagonal
//! entry at `nu` is exactly `<nu~, xi>`.  The eigenfunction `E_lambda` with
//! unit coefficient on `e^lambda` is therefore obtained by one back
//! substitution over the downset of `lambda`.
//!
//! Coefficient bookkeeping: `c = E_lambda(0)` is the sum of all coefficients,
//! and dividing the coefficients by `c` yields the probability vector studied
//! by the limit routines.  Nonnegativity of every coefficient is enforced
//! here (a violation is reported as an error, never silently normalized).

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_traits::{One, Signed, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::TrigPoly;
use crate::error::{EngineError, Result};
use crate::rat::{format_q, qi, qr, Q};
use crate::rootsys::{Multiplicity, Point, RootSystem, SpectralVector, Weight};

/// How many perturbed spectral directions to try before giving up on a
/// pairwise-distinct spectrum.
pub const SPECTRAL_RETRIES: usize = 32;

const PRIMES: [i64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Apply the difference-reflection operator in direction `xi` (simple-root
/// coordinates) to a trigonometric polynomial.  Exact in every coefficient.
pub fn apply_cherednik(rs: &RootSystem, k: &Multiplicity, xi: &Point, f: &TrigPoly) -> TrigPoly {
    let rho_xi = rs.ip(&rs.rho(k).0, &xi.0);
    // Per positive root: fundamental coordinates and k_alpha * <alpha, xi>,
    // dropping roots that cannot contribute.
    let mut strings: Vec<(usize, Weight, Q)> = Vec::new();
    for (ri, root) in rs.positive_roots.iter().enumerate() {
        let ka = k.value(root.orbit);
        if ka.is_zero() {
            continue;
        }
        let alpha_pt: Vec<Q> = root.coords.iter().map(|&c| qi(c)).collect();
        let factor = ka * rs.ip(&alpha_pt, &xi.0);
        if factor.is_zero() {
            continue;
        }
        strings.push((ri, Weight(root.fund.clone()), factor));
    }

    let mut out = TrigPoly::zero();
    for (nu, coeff) in f.terms() {
        let diag = rs.ip(&rs.weight_point(nu).0, &xi.0) - &rho_xi;
        out.add_term(nu.clone(), coeff * &diag);
        for (ri, alpha, factor) in &strings {
            let m = rs.weight_coroot_pairing(nu, &rs.positive_roots[*ri]);
            let c = coeff * factor;
            if m > 0 {
                for j in 0..m {
                    out.add_term(nu.sub(&alpha.scale(j)), c.clone());
                }
            } else if m < 0 {
                for j in 1..=(-m) {
                    out.add_term(nu.add(&alpha.scale(j)), -c.clone());
                }
            }
        }
    }
    out
}

/// A nonsymmetric eigenpolynomial, normalized to unit coefficient on its
/// leading exponential.
#[derive(Debug, Clone, PartialEq)]
pub struct EPoly {
    pub lambda: Weight,
    /// The polynomial itself; coefficient of `e^lambda` is 1, all others are
    /// nonnegative and supported on the downset of `lambda`.
    pub poly: TrigPoly,
    /// Spectral vector `lambda~` in simple-root coordinates.
    pub spectral: SpectralVector,
    /// Value at the origin, i.e. the coefficient sum.  Strictly positive.
    pub c: Q,
}

impl EPoly {
    pub fn coeff(&self, nu: &Weight) -> Q {
        self.poly.coeff(nu)
    }

    /// Coefficients divided by their sum: an exact probability vector.
    pub fn prob_coeffs(&self) -> Vec<(Weight, Q)> {
        self.poly
            .terms()
            .map(|(nu, a)| (nu.clone(), a / &self.c))
            .collect()
    }

    /// The polynomial scaled to take value 1 at the origin.
    pub fn normalized(&self) -> TrigPoly {
        self.poly.scale(&(Q::one() / &self.c))
    }
}

/// Pick a direction whose spectrum separates the downset: first choice is a
/// fixed prime vector, then seeded rational perturbations of it.  Falls back
/// to a direction that at least separates `lambda` from everything below it
/// (all the back substitution needs); gives up only when every attempt has
/// `<nu~,xi> = <lambda~,xi>` for some strictly lower `nu`.
fn spectral_direction(
    rs: &RootSystem,
    tildes: &[Point],
    downset: &[Weight],
    seed: u64,
) -> Result<(Point, Vec<Q>)> {
    let n = tildes.len();
    let mut fallback: Option<(Point, Vec<Q>)> = None;
    let mut collision: Option<String> = None;
    for attempt in 0..SPECTRAL_RETRIES {
        let mut coords: Vec<Q> = (0..rs.rank).map(|i| qi(PRIMES[i % PRIMES.len()])).collect();
        if attempt > 0 {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed ^ (attempt as u64).wrapping_mul(0x9e3779b97f4a7c15));
            for c in coords.iter_mut() {
                *c += qr((rng.next_u32() % 2048) as i64 + 1, 2048);
            }
        }
        let xi = Point(coords);
        let spectrum: Vec<Q> = tildes.iter().map(|t| rs.ip(&t.0, &xi.0)).collect();
        let mut sorted = spectrum.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() == n {
            return Ok((xi, spectrum));
        }
        let s_top = &spectrum[n - 1];
        match spectrum[..n - 1].iter().position(|s| s == s_top) {
            None => {
                if fallback.is_none() {
                    fallback = Some((xi, spectrum));
                }
            }
            Some(i) => {
                if collision.is_none() {
                    collision = Some(format!("{}", downset[i]));
                }
            }
        }
    }
    fallback.ok_or(EngineError::DegenerateSpectrum {
        nu: collision.unwrap_or_else(|| "?".into()),
        retries: SPECTRAL_RETRIES,
    })
}

/// Solve for the eigenpolynomial of `lambda` by back substitution over its
/// downset.
///
/// Invariants enforced on the way (any failure is an error, not a bad
/// answer): the operator never leaves the downset, its diagonal matches the
/// spectral vectors, every coefficient is nonnegative, and the finished
/// polynomial is an exact simultaneous eigenfunction of the operators in all
/// simple-root directions.
pub fn compute_e(
    rs: &RootSystem,
    k: &Multiplicity,
    lambda: &Weight,
    limit: usize,
    seed: u64,
) -> Result<EPoly> {
    if lambda.rank() != rs.rank {
        return Err(EngineError::InvalidArgument(format!(
            "weight {} has rank {}, root system {} has rank {}",
            lambda,
            lambda.rank(),
            rs.code(),
            rs.rank
        )));
    }
    let downset = rs.downset(lambda, limit)?;
    let n = downset.len();
    let index: HashMap<&Weight, usize> = downset.iter().zip(0..).collect();
    let tildes: Vec<Point> = downset.iter().map(|nu| rs.tilde(k, nu).0).collect();
    let (xi, spectrum) = spectral_direction(rs, &tildes, &downset, seed)?;
    let s_top = spectrum[n - 1].clone();

    let mut a = vec![Q::zero(); n];
    let mut accum = vec![Q::zero(); n];
    a[n - 1] = Q::one();
    for idx in (0..n).rev() {
        if idx < n - 1 {
            // Spectral direction guarantees a nonzero denominator here.
            a[idx] = &accum[idx] / (&s_top - &spectrum[idx]);
            if a[idx].is_zero() {
                continue;
            }
        }
        let image = apply_cherednik(rs, k, &xi, &TrigPoly::exponential(downset[idx].clone()));
        for (mu, m_coeff) in image.terms() {
            if *mu == downset[idx] {
                if *m_coeff != spectrum[idx] {
                    return Err(EngineError::Internal(format!(
                        "operator diagonal at {} is {}, spectral vector pairing gives {}",
                        mu,
                        format_q(m_coeff),
                        format_q(&spectrum[idx])
                    )));
                }
                continue;
            }
            let j = *index.get(mu).ok_or_else(|| {
                EngineError::Internal(format!(
                    "operator image of {} leaves the downset of {} at {}",
                    downset[idx], lambda, mu
                ))
            })?;
            if j >= idx {
                return Err(EngineError::Internal(format!(
                    "downset order is not a linear extension: {} appears at or after {}",
                    mu, downset[idx]
                )));
            }
            accum[j] += &a[idx] * m_coeff;
        }
    }

    let mut poly = TrigPoly::zero();
    let mut c = Q::zero();
    for (idx, coeff) in a.into_iter().enumerate() {
        if coeff.is_negative() {
            return Err(EngineError::PositivityViolation {
                lambda: format!("{}", lambda),
                nu: format!("{}", downset[idx]),
                coeff: format_q(&coeff),
            });
        }
        c += &coeff;
        poly.add_term(downset[idx].clone(), coeff);
    }
    if !c.is_positive() {
        return Err(EngineError::Internal(format!(
            "coefficient sum of E_{} is {}",
            lambda,
            format_q(&c)
        )));
    }

    let spectral = rs.tilde(k, lambda);
    for i in 0..rs.rank {
        let mut e = vec![Q::zero(); rs.rank];
        e[i] = Q::one();
        let dir = Point(e);
        let s = rs.ip(&spectral.0 .0, &dir.0);
        if apply_cherednik(rs, k, &dir, &poly) != poly.scale(&s) {
            return Err(EngineError::Internal(format!(
                "E_{} is not an eigenfunction in simple direction {}",
                lambda, i
            )));
        }
    }

    Ok(EPoly {
        lambda: lambda.clone(),
        poly,
        spectral,
        c,
    })
}

fn weyl_sum(rs: &RootSystem, p: &TrigPoly) -> TrigPoly {
    let mut acc = TrigPoly::zero();
    for w in &rs.weyl {
        acc = acc.add(&p.map_weights(w));
    }
    acc
}

fn dominant_weyl_sum(rs: &RootSystem, ep: &EPoly) -> Result<TrigPoly> {
    if !rs.is_dominant(&ep.lambda) {
        return Err(EngineError::NotDominant(format!("{}", ep.lambda)));
    }
    let sum = weyl_sum(rs, &ep.poly);
    // Invariance under the simple generators implies full W-invariance.
    for &gi in &rs.simple {
        if sum.map_weights(&rs.weyl[gi]) != sum {
            return Err(EngineError::Internal(format!(
                "symmetrization of E_{} is not Weyl invariant",
                ep.lambda
            )));
        }
    }
    Ok(sum)
}

/// Weyl-symmetrized eigenpolynomial of a dominant weight, scaled so the
/// orbit sum of `lambda` appears with unit coefficient.
pub fn symmetrize(rs: &RootSystem, ep: &EPoly) -> Result<TrigPoly> {
    let orbit_len = rs.orbit_weights(&ep.lambda).len();
    Ok(dominant_weyl_sum(rs, ep)?.scale(&qr(orbit_len as i64, rs.weyl_order() as i64)))
}

/// Weyl-symmetrized eigenpolynomial of a dominant weight, scaled to take
/// value 1 at the origin.
pub fn symmetric_normalized(rs: &RootSystem, ep: &EPoly) -> Result<TrigPoly> {
    let denom = qi(rs.weyl_order() as i64) * &ep.c;
    Ok(dominant_weyl_sum(rs, ep)?.scale(&(Q::one() / denom)))
}

/// Value of the normalized symmetric eigenfunction of a dominant weight:
/// the symmetrization divided by its value at the origin.
pub fn eval_f(
    rs: &RootSystem,
    k: &Multiplicity,
    lambda: &Weight,
    z: &crate::algebra::ComplexPoint,
    limit: usize,
    seed: u64,
) -> Result<num_complex::Complex64> {
    let ep = compute_e(rs, k, lambda, limit, seed)?;
    symmetric_normalized(rs, &ep)?.eval(rs, z)
}

/// Re-verify every defining invariant of a finished eigenpolynomial: unit
/// leading coefficient, nonnegative coefficients, the spectral vector, and
/// the eigen-equations in all simple directions.  Meant for artifacts read
/// back from storage, where the solver's in-flight checks never ran.
pub fn verify_epoly(rs: &RootSystem, k: &Multiplicity, ep: &EPoly) -> Result<()> {
    if ep.coeff(&ep.lambda) != Q::one() {
        return Err(EngineError::Internal(format!(
            "leading coefficient of E_{} is {}, not 1",
            ep.lambda,
            format_q(&ep.coeff(&ep.lambda))
        )));
    }
    for (nu, a) in ep.poly.terms() {
        if a < &Q::zero() {
            return Err(EngineError::PositivityViolation {
                lambda: format!("{}", ep.lambda),
                nu: format!("{}", nu),
                coeff: format_q(a),
            });
        }
    }
    if ep.c != ep.poly.sum_coeffs() || ep.c <= Q::zero() {
        return Err(EngineError::Internal(format!(
            "normalization constant {} does not match coefficient mass {}",
            format_q(&ep.c),
            format_q(&ep.poly.sum_coeffs())
        )));
    }
    let tilde = rs.tilde(k, &ep.lambda);
    if ep.spectral.0 != tilde.0 {
        return Err(EngineError::Internal(format!(
            "spectral vector of E_{} is {}, expected {}",
            ep.lambda, ep.spectral.0, tilde.0
        )));
    }
    for i in 0..rs.rank {
        let mut dir = vec![Q::zero(); rs.rank];
        dir[i] = Q::one();
        let xi = Point(dir);
        let s = rs.ip(&ep.spectral.0 .0, &xi.0);
        if apply_cherednik(rs, k, &xi, &ep.poly) != ep.poly.scale(&s) {
            return Err(EngineError::Internal(format!(
                "eigen-equation fails for E_{} in simple direction {}",
                ep.lambda, i
            )));
        }
    }
    Ok(())
}

/// The spectral vector of any weight lies on the Weyl orbit of
/// `lambda_+ + rho(k)`.  Returns whether that holds for `lambda`.
pub fn spectral_orbit_check(rs: &RootSystem, k: &Multiplicity, lambda: &Weight) -> bool {
    let tilde = rs.tilde(k, lambda).0;
    let (lambda_plus, _) = rs.dominant_rep(lambda);
    let target = rs.weight_point(&lambda_plus).add(&rs.rho(k));
    rs.orbit_points(&target).iter().any(|p| *p == tilde)
}

type EKey = (String, Vec<i64>, Vec<String>, u64);

/// Process-wide memo for eigenpolynomials, keyed by system code, weight,
/// multiplicity values, and seed.  The solve is deterministic, so concurrent
/// computations of the same key agree and the first insert wins.
#[derive(Default)]
pub struct ECache {
    map: Mutex<HashMap<EKey, Arc<EPoly>>>,
}

impl ECache {
    pub fn new() -> Self {
        ECache::default()
    }

    pub fn get_or_compute(
        &self,
        rs: &RootSystem,
        k: &Multiplicity,
        lambda: &Weight,
        limit: usize,
        seed: u64,
    ) -> Result<Arc<EPoly>> {
        let key: EKey = (
            rs.code(),
            lambda.0.clone(),
            k.values().iter().map(format_q).collect(),
            seed,
        );
        if let Some(hit) = self.map.lock().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let computed = Arc::new(compute_e(rs, k, lambda, limit, seed)?);
        let mut guard = self.map.lock().unwrap();
        Ok(guard.entry(key).or_insert(computed).clone())
    }
}
