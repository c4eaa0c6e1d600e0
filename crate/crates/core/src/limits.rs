//! Orbit measures and scaling-limit diagnostics.
//!
//! The normalized coefficients of an eigenpolynomial form a probability
//! measure on rescaled lattice points.  This module materializes that
//! measure, takes its exact moments, checks its support against the orbit
//! hull, and tabulates how fast the rescaled eigenfunctions approach the
//! kernel they converge to.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::algebra::ComplexPoint;
use crate::cherednik::{compute_e, symmetric_normalized};
use crate::dunkl::{bessel_jw_with, build_intertwiner, expw, v_moment_with, KernelSeries};
use crate::error::{EngineError, Result};
use crate::rat::{q_to_f64, qi, Q};
use crate::rootsys::{Multiplicity, Point, RootSystem, Weight};

/// A finitely supported measure with rational atom positions and weights,
/// constrained to total mass exactly 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteMeasure {
    atoms: BTreeMap<Point, Q>,
}

impl DiscreteMeasure {
    /// Build a probability measure from (position, weight) pairs.  Duplicate
    /// positions are merged, zero weights dropped; negative weights or total
    /// mass different from 1 are rejected.
    pub fn new(pairs: Vec<(Point, Q)>) -> Result<Self> {
        let mut atoms: BTreeMap<Point, Q> = BTreeMap::new();
        for (p, w) in pairs {
            if w.is_negative() {
                return Err(EngineError::InvalidArgument(format!(
                    "negative weight {} at {}",
                    w, p
                )));
            }
            if w.is_zero() {
                continue;
            }
            let slot = atoms.entry(p).or_insert_with(Q::zero);
            *slot = slot.clone() + w;
        }
        let mass: Q = atoms.values().cloned().sum();
        if !mass.is_one() {
            return Err(EngineError::InvalidArgument(format!(
                "total mass {} is not 1",
                mass
            )));
        }
        Ok(DiscreteMeasure { atoms })
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&Point, &Q)> {
        self.atoms.iter()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mass(&self) -> Q {
        self.atoms.values().cloned().sum()
    }

    /// The pushforward under `x -> s x`.
    pub fn dilate(&self, s: &Q) -> DiscreteMeasure {
        DiscreteMeasure {
            atoms: self
                .atoms
                .iter()
                .map(|(p, w)| (p.scale(s), w.clone()))
                .collect(),
        }
    }
}

/// The coefficient measure of an eigenpolynomial at lattice scale `n`: the
/// normalized coefficient of `e^nu` becomes the weight of the atom `nu / n`.
pub fn measure_from_epoly(
    rs: &RootSystem,
    ep: &crate::cherednik::EPoly,
    n: i64,
) -> Result<DiscreteMeasure> {
    if n < 1 {
        return Err(EngineError::InvalidArgument(format!(
            "lattice scale {} is not positive",
            n
        )));
    }
    let inv = qi(1) / qi(n);
    let pairs = ep
        .prob_coeffs()
        .into_iter()
        .map(|(nu, b)| (rs.weight_point(&nu).scale(&inv), b))
        .collect();
    DiscreteMeasure::new(pairs)
}

/// The level-`n` approximation to the representing measure of the kernel at
/// `lambda`: the coefficient measure of the eigenpolynomial at `n lambda`.
pub fn measure_approx(
    rs: &RootSystem,
    k: &Multiplicity,
    lambda: &Weight,
    n: i64,
    limit: usize,
    seed: u64,
) -> Result<DiscreteMeasure> {
    if n < 1 {
        return Err(EngineError::InvalidArgument(format!(
            "lattice scale {} is not positive",
            n
        )));
    }
    let ep = compute_e(rs, k, &lambda.scale(n), limit, seed)?;
    measure_from_epoly(rs, &ep, n)
}

/// Exact `m`-th moment of the pairing with `z` under the measure.
pub fn measure_moment(rs: &RootSystem, mu: &DiscreteMeasure, z: &Point, m: usize) -> Q {
    let mut acc = Q::zero();
    for (p, w) in mu.atoms() {
        let pairing = rs.ip(&p.0, &z.0);
        let mut pw = Q::one();
        for _ in 0..m {
            pw = pw * &pairing;
        }
        acc = acc + w * pw;
    }
    acc
}

/// Whether every atom of the measure lies in the convex hull of the Weyl
/// orbit of `lambda`.
pub fn support_check(rs: &RootSystem, mu: &DiscreteMeasure, lambda: &Weight) -> Result<bool> {
    for (p, _) in mu.atoms() {
        if !rs.hull_contains(lambda, p)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One evaluation of an approximation against its limiting reference.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub n: i64,
    pub z: String,
    pub approx: f64,
    pub reference: f64,
    pub error: f64,
    pub note: String,
}

/// A labeled block of convergence rows, renderable as CSV or JSON.
#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub label: String,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,z,approx,reference,error,note\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{:.11e},{:.11e},{:.11e},{}\n",
                r.n, r.z, r.approx, r.reference, r.error, r.note
            ));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "label": self.label,
            "rows": self.rows.iter().map(|r| json!({
                "n": r.n,
                "z": r.z,
                "approx": r.approx,
                "reference": r.reference,
                "error": r.error,
                "note": r.note,
            })).collect::<Vec<_>>(),
        })
    }

    /// Largest error among the rows at lattice scale `n`.
    pub fn max_error_at(&self, n: i64) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| r.error)
            .fold(0.0, f64::max)
    }
}

fn overflow_rows(rows: &mut Vec<ConvergenceRow>, n: i64, zs: &[Point]) {
    for z in zs {
        rows.push(ConvergenceRow {
            n,
            z: format!("{}", z),
            approx: f64::NAN,
            reference: f64::NAN,
            error: f64::NAN,
            note: "downset overflow".into(),
        });
    }
}

/// Tabulate `E_{n lambda}(z / n)` against the truncated kernel at
/// `(lambda, z)` over a grid of evaluation points and lattice scales.  A
/// downset overflow at some scale is recorded in its rows and the run
/// continues with the next scale.
pub fn scaling_error_table(
    rs: &RootSystem,
    k: &Multiplicity,
    lambda: &Weight,
    zs: &[Point],
    ns: &[i64],
    order: usize,
    limit: usize,
    seed: u64,
) -> Result<ConvergenceTable> {
    let x = rs.weight_point(lambda);
    let series = expw(rs, k, &x, order)?;
    let mut rows = Vec::with_capacity(zs.len() * ns.len());
    for &n in ns {
        if n < 1 {
            return Err(EngineError::InvalidArgument(format!(
                "lattice scale {} is not positive",
                n
            )));
        }
        let ep = match compute_e(rs, k, &lambda.scale(n), limit, seed) {
            Ok(ep) => ep,
            Err(EngineError::DownsetOverflow { .. }) => {
                overflow_rows(&mut rows, n, zs);
                continue;
            }
            Err(e) => return Err(e),
        };
        let normalized = ep.normalized();
        for z in zs {
            let zc = ComplexPoint::from_point(z);
            let approx = normalized.eval(rs, &zc.scale(1.0 / n as f64))?;
            let (reference, tail) = series.eval(&zc);
            rows.push(ConvergenceRow {
                n,
                z: format!("{}", z),
                approx: approx.re,
                reference: reference.re,
                error: (approx - reference).norm(),
                note: format!("tail={:.3e}", tail),
            });
        }
    }
    Ok(ConvergenceTable {
        label: format!("scaling {} lambda={}", rs.code(), lambda),
        rows,
    })
}

/// Same tabulation for the symmetric normalized eigenfunction against the
/// Weyl-averaged kernel.  Requires a dominant `lambda`.
pub fn symmetric_error_table(
    rs: &RootSystem,
    k: &Multiplicity,
    lambda: &Weight,
    zs: &[Point],
    ns: &[i64],
    order: usize,
    limit: usize,
    seed: u64,
) -> Result<ConvergenceTable> {
    if !rs.is_dominant(lambda) {
        return Err(EngineError::NotDominant(format!("{}", lambda)));
    }
    let x = rs.weight_point(lambda);
    let series: KernelSeries = expw(rs, k, &x, order)?;
    let mut rows = Vec::with_capacity(zs.len() * ns.len());
    for &n in ns {
        if n < 1 {
            return Err(EngineError::InvalidArgument(format!(
                "lattice scale {} is not positive",
                n
            )));
        }
        let ep = match compute_e(rs, k, &lambda.scale(n), limit, seed) {
            Ok(ep) => ep,
            Err(EngineError::DownsetOverflow { .. }) => {
                overflow_rows(&mut rows, n, zs);
                continue;
            }
            Err(e) => return Err(e),
        };
        let f = symmetric_normalized(rs, &ep)?;
        for z in zs {
            let zc = ComplexPoint::from_point(z);
            let approx = f.eval(rs, &zc.scale(1.0 / n as f64))?;
            let (reference, tail) = bessel_jw_with(rs, &series, &zc);
            rows.push(ConvergenceRow {
                n,
                z: format!("{}", z),
                approx: approx.re,
                reference: reference.re,
                error: (approx - reference).norm(),
                note: format!("tail={:.3e}", tail),
            });
        }
    }
    Ok(ConvergenceTable {
        label: format!("symmetric {} lambda={}", rs.code(), lambda),
        rows,
    })
}

/// Tabulate the `m`-th moment of the level-`n` measures against the exact
/// moment of the intertwined exponential.
pub fn moment_convergence(
    rs: &RootSystem,
    k: &Multiplicity,
    lambda: &Weight,
    z: &Point,
    m: usize,
    ns: &[i64],
    limit: usize,
    seed: u64,
) -> Result<ConvergenceTable> {
    let vop = build_intertwiner(rs, k, m)?;
    let x = rs.weight_point(lambda);
    let target = q_to_f64(&v_moment_with(rs, &vop, &x, z, m)?);
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let mu = match measure_approx(rs, k, lambda, n, limit, seed) {
            Ok(mu) => mu,
            Err(EngineError::DownsetOverflow { .. }) => {
                rows.push(ConvergenceRow {
                    n,
                    z: format!("{}", z),
                    approx: f64::NAN,
                    reference: f64::NAN,
                    error: f64::NAN,
                    note: "downset overflow".into(),
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let approx = q_to_f64(&measure_moment(rs, &mu, z, m));
        rows.push(ConvergenceRow {
            n,
            z: format!("{}", z),
            approx,
            reference: target,
            error: (approx - target).abs(),
            note: String::new(),
        });
    }
    Ok(ConvergenceTable {
        label: format!("moment {} lambda={} m={}", rs.code(), lambda, m),
        rows,
    })
}
