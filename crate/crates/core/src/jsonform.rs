//! JSON views of the exact objects.  Every rational is rendered as a
//! `"p/q"` string so values survive the trip through text output without
//! precision loss; floats appear only where the underlying quantity is a
//! float to begin with.

use serde_json::{json, Value};

use crate::algebra::{MultiPoly, TrigPoly};
use crate::cherednik::EPoly;
use crate::dunkl::{Intertwiner, KernelSeries};
use crate::limits::DiscreteMeasure;
use crate::rat::{format_q, Q};
use crate::rootsys::{Point, RootSystem, Weight};

pub fn q_json(q: &Q) -> Value {
    Value::String(format_q(q))
}

pub fn point_json(p: &Point) -> Value {
    Value::Array(p.0.iter().map(q_json).collect())
}

pub fn weight_json(w: &Weight) -> Value {
    Value::Array(w.0.iter().map(|&c| json!(c)).collect())
}

pub fn trig_json(p: &TrigPoly) -> Value {
    Value::Array(
        p.terms()
            .map(|(w, c)| json!({"weight": weight_json(w), "coeff": q_json(c)}))
            .collect(),
    )
}

pub fn multi_json(p: &MultiPoly) -> Value {
    Value::Array(
        p.terms()
            .map(|(e, c)| json!({"exponents": e, "coeff": q_json(c)}))
            .collect(),
    )
}

/// Full record of one eigenpolynomial: exact coefficients, the normalization
/// constant, the probability weights, and the spectral vector.
pub fn epoly_json(rs: &RootSystem, ep: &EPoly) -> Value {
    json!({
        "system": rs.code(),
        "lambda": weight_json(&ep.lambda),
        "coeffs": trig_json(&ep.poly),
        "c": q_json(&ep.c),
        "prob": ep
            .prob_coeffs()
            .iter()
            .map(|(w, b)| json!({"weight": weight_json(w), "b": q_json(b)}))
            .collect::<Vec<_>>(),
        "spectral": point_json(&ep.spectral.0),
    })
}

fn bad(msg: &str) -> crate::error::EngineError {
    crate::error::EngineError::InvalidArgument(format!("malformed eigenpolynomial record: {msg}"))
}

fn q_from(v: &Value) -> crate::error::Result<Q> {
    crate::rat::parse_q(v.as_str().ok_or_else(|| bad("rational is not a string"))?)
}

fn weight_from(v: &Value) -> crate::error::Result<Weight> {
    let arr = v.as_array().ok_or_else(|| bad("weight is not an array"))?;
    let coords = arr
        .iter()
        .map(|c| c.as_i64().ok_or_else(|| bad("weight coordinate is not an integer")))
        .collect::<std::result::Result<Vec<i64>, _>>()?;
    Ok(Weight(coords))
}

/// Rebuild an eigenpolynomial from its JSON record.  The caller is expected
/// to re-verify the invariants; see `cherednik::verify_epoly`.
pub fn epoly_from_json(v: &Value) -> crate::error::Result<EPoly> {
    let lambda = weight_from(&v["lambda"])?;
    let mut poly = TrigPoly::zero();
    for t in v["coeffs"].as_array().ok_or_else(|| bad("coeffs missing"))? {
        poly.add_term(weight_from(&t["weight"])?, q_from(&t["coeff"])?);
    }
    let c = q_from(&v["c"])?;
    let spectral = v["spectral"]
        .as_array()
        .ok_or_else(|| bad("spectral missing"))?
        .iter()
        .map(q_from)
        .collect::<crate::error::Result<Vec<Q>>>()?;
    Ok(EPoly {
        lambda,
        poly,
        spectral: crate::rootsys::SpectralVector(Point(spectral)),
        c,
    })
}

/// A discrete measure as a list of (position, weight) pairs.
pub fn measure_json(mu: &DiscreteMeasure) -> Value {
    Value::Array(
        mu.atoms()
            .map(|(p, w)| json!({"point": point_json(p), "weight": q_json(w)}))
            .collect(),
    )
}

/// The intertwiner table, stage by stage: each monomial with its exact image.
pub fn intertwiner_json(vop: &Intertwiner) -> Value {
    let stages: Vec<Value> = (0..=vop.max_degree())
        .map(|m| {
            json!({
                "degree": m,
                "images": vop
                    .stage(m)
                    .map(|(e, p)| json!({"monomial": e, "image": multi_json(p)}))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({"rank": vop.rank(), "stages": stages})
}

/// The truncated kernel series: base point and per-degree exact polynomials.
pub fn kernel_json(series: &KernelSeries) -> Value {
    json!({
        "x": point_json(&series.x),
        "terms": series.h.iter().map(multi_json).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cherednik::compute_e;
    use crate::dunkl::{build_intertwiner, expw};
    use crate::limits::measure_approx;
    use crate::rat::{qi, qr};
    use crate::rootsys::{Multiplicity, DEFAULT_DOWNSET_LIMIT};

    #[test]
    fn epoly_serializes_exact_fractions() {
        let rs = RootSystem::from_code("A1").unwrap();
        let k = Multiplicity::uniform(&rs, qr(1, 2)).unwrap();
        let ep = compute_e(&rs, &k, &Weight(vec![-1]), DEFAULT_DOWNSET_LIMIT, 0).unwrap();
        let v = epoly_json(&rs, &ep);
        assert_eq!(v["system"], "A1");
        assert_eq!(v["c"], "4/3");
        assert_eq!(v["lambda"][0], -1);
        assert_eq!(v["prob"][0]["b"], "3/4");
        assert_eq!(v["prob"][1]["b"], "1/4");
        assert_eq!(v["spectral"][0], "-3/4");
    }

    #[test]
    fn epoly_round_trips_through_json() {
        let rs = RootSystem::from_code("B2").unwrap();
        let k = Multiplicity::per_orbit(&rs, vec![qr(1, 2), qi(1)]).unwrap();
        let ep = compute_e(&rs, &k, &Weight(vec![-1, 1]), DEFAULT_DOWNSET_LIMIT, 0).unwrap();
        let back = epoly_from_json(&epoly_json(&rs, &ep)).unwrap();
        assert_eq!(back, ep);
        crate::cherednik::verify_epoly(&rs, &k, &back).unwrap();

        // A tampered coefficient fails re-verification.
        let mut v = epoly_json(&rs, &ep);
        v["coeffs"][0]["coeff"] = serde_json::Value::String("7/5".into());
        let bad = epoly_from_json(&v).unwrap();
        assert!(crate::cherednik::verify_epoly(&rs, &k, &bad).is_err());
    }

    #[test]
    fn measure_and_kernel_shapes() {
        let rs = RootSystem::from_code("A1").unwrap();
        let k = Multiplicity::uniform(&rs, qr(1, 2)).unwrap();
        let mu = measure_approx(&rs, &k, &Weight(vec![-1]), 1, DEFAULT_DOWNSET_LIMIT, 0).unwrap();
        let v = measure_json(&mu);
        assert_eq!(v[0]["point"][0], "-1/2");
        assert_eq!(v[0]["weight"], "3/4");
        assert_eq!(v[1]["weight"], "1/4");

        let series = expw(&rs, &k, &Point(vec![qr(1, 2)]), 3).unwrap();
        let kv = kernel_json(&series);
        assert_eq!(kv["x"][0], "1/2");
        assert_eq!(kv["terms"].as_array().unwrap().len(), 4);
        // Degree zero term is the constant 1.
        assert_eq!(kv["terms"][0][0]["coeff"], "1");
    }

    #[test]
    fn intertwiner_stage_dump() {
        let rs = RootSystem::from_code("A1").unwrap();
        let k = Multiplicity::uniform(&rs, qr(1, 2)).unwrap();
        let vop = build_intertwiner(&rs, &k, 2).unwrap();
        let v = intertwiner_json(&vop);
        assert_eq!(v["rank"], 1);
        let stages = v["stages"].as_array().unwrap();
        assert_eq!(stages.len(), 3);
        // V x = x/2 at k = 1/2.
        assert_eq!(stages[1]["images"][0]["image"][0]["coeff"], "1/2");
        assert_eq!(q_json(&qi(7)), "7");
    }
}
