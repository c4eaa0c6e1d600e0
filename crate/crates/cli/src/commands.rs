//! The seven subcommands.  Each returns rendered output plus a verdict; the
//! caller owns all writing, so output stays single-writer even when the
//! sweeps themselves run on a worker pool.

use rayon::prelude::*;
use serde_json::{json, Value};

use opdam_core::algebra::{ComplexPoint, MultiPoly};
use opdam_core::cherednik::{
    compute_e, spectral_orbit_check, symmetric_normalized, verify_epoly, EPoly,
};
use opdam_core::dunkl::{apply_dunkl, build_intertwiner, expw};
use opdam_core::error::EngineError;
use opdam_core::jsonform::{epoly_json, intertwiner_json, kernel_json, measure_json};
use opdam_core::limits::{
    measure_approx, measure_moment, moment_convergence, scaling_error_table, support_check,
    symmetric_error_table, ConvergenceTable,
};
use opdam_core::rankone::{closed_e_trig, gegenbauer_bessel_limit, gegenbauer_q_approx};
use opdam_core::rat::{format_q, parse_q, q_to_f64, Q};
use opdam_core::rootsys::{Multiplicity, Point, RootSystem, Weight};

use num_traits::{One, Zero};

use crate::cache::{epoly_key, DiskCache};
use crate::config::RunConfig;

/// A failed run, classified by exit code: 1 invariant violation, 2 bad
/// configuration, 3 resource limit.
#[derive(Debug)]
pub enum Failure {
    Invariant(String),
    Config(String),
    Resource(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Invariant(_) => 1,
            Failure::Config(_) => 2,
            Failure::Resource(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Failure::Invariant(_) => "invariant",
            Failure::Config(_) => "config",
            Failure::Resource(_) => "resource",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Invariant(m) | Failure::Config(m) | Failure::Resource(m) => m,
        }
    }
}

fn engine_failure(e: EngineError) -> Failure {
    match e {
        EngineError::DownsetOverflow { .. }
        | EngineError::WeylTooLarge { .. }
        | EngineError::SeriesLimit { .. }
        | EngineError::EvalOverflow { .. } => Failure::Resource(e.to_string()),
        EngineError::UnsupportedRootSystem(_)
        | EngineError::InvalidArgument(_)
        | EngineError::NotDominant(_)
        | EngineError::NonTerminatingSeries => Failure::Config(e.to_string()),
        EngineError::PositivityViolation { .. }
        | EngineError::DegenerateSpectrum { .. }
        | EngineError::RankDeficientIntertwiner { .. }
        | EngineError::Internal(_) => Failure::Invariant(e.to_string()),
    }
}

pub struct Output {
    pub text: String,
    pub ok: bool,
}

fn ok_output(text: String) -> Result<Output, Failure> {
    Ok(Output { text, ok: true })
}

fn render_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

struct Ctx {
    rs: RootSystem,
    k: Multiplicity,
}

fn context(cfg: &RunConfig) -> Result<Ctx, Failure> {
    let rs = cfg.root_system().map_err(Failure::Config)?;
    let k = cfg.multiplicity(&rs).map_err(Failure::Config)?;
    Ok(Ctx { rs, k })
}

fn coords_label(p: &Point) -> String {
    p.0.iter().map(format_q).collect::<Vec<_>>().join(" ")
}

fn weight_label(w: &Weight) -> String {
    w.0.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
}

/// Obtain one eigenpolynomial, preferring the disk cache; freshly computed
/// results are stored back, and whatever is served has been fully verified.
fn epoly_cached(
    cfg: &RunConfig,
    ctx: &Ctx,
    lambda: &Weight,
) -> Result<EPoly, Failure> {
    let cache = match &cfg.cache_dir {
        Some(dir) => Some(DiskCache::open(dir).map_err(Failure::Config)?),
        None => None,
    };
    let key = epoly_key(&ctx.rs, &ctx.k, lambda, cfg.seed);
    if let Some(cache) = &cache {
        if let Some(ep) = cache.load_epoly(&ctx.rs, &ctx.k, &key).map_err(Failure::Invariant)? {
            return Ok(ep);
        }
    }
    let ep = compute_e(&ctx.rs, &ctx.k, lambda, cfg.downset_limit, cfg.seed)
        .map_err(engine_failure)?;
    if let Some(cache) = &cache {
        cache.store_epoly(&ctx.rs, &ep, &key).map_err(Failure::Config)?;
    }
    Ok(ep)
}

pub fn cmd_epoly(cfg: &RunConfig) -> Result<Output, Failure> {
    let ctx = context(cfg)?;
    let lambda = cfg.weight(&ctx.rs).map_err(Failure::Config)?;
    let ep = epoly_cached(cfg, &ctx, &lambda)?;
    verify_epoly(&ctx.rs, &ctx.k, &ep).map_err(engine_failure)?;

    if cfg.format == "csv" {
        let mut text = String::from("weight,coeff,b\n");
        for (nu, a) in ep.poly.terms() {
            text.push_str(&format!(
                "{},{},{}\n",
                weight_label(nu),
                format_q(a),
                format_q(&(a / &ep.c))
            ));
        }
        return ok_output(text);
    }
    let mut v = epoly_json(&ctx.rs, &ep);
    v["verified"] = json!(true);
    ok_output(render_json(&v))
}

pub fn cmd_dunkl_v(cfg: &RunConfig) -> Result<Output, Failure> {
    let ctx = context(cfg)?;
    let vop = build_intertwiner(&ctx.rs, &ctx.k, cfg.order).map_err(engine_failure)?;
    if cfg.format == "csv" {
        let mut text = String::from("degree,monomial,image_exponents,coeff\n");
        for m in 0..=vop.max_degree() {
            for (e, p) in vop.stage(m) {
                let mono = e.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
                for (f, c) in p.terms() {
                    let fe = f.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
                    text.push_str(&format!("{},{},{},{}\n", m, mono, fe, format_q(c)));
                }
            }
        }
        return ok_output(text);
    }
    ok_output(render_json(&intertwiner_json(&vop)))
}

pub fn cmd_expw(cfg: &RunConfig) -> Result<Output, Failure> {
    let ctx = context(cfg)?;
    let lambda = cfg.weight(&ctx.rs).map_err(Failure::Config)?;
    let zs = cfg.zgrid(&ctx.rs).map_err(Failure::Config)?;
    let x = ctx.rs.weight_point(&lambda);
    let series = expw(&ctx.rs, &ctx.k, &x, cfg.order).map_err(engine_failure)?;
    let values: Vec<(String, f64, f64, f64)> = zs
        .iter()
        .map(|z| {
            let (v, tail) = series.eval(&ComplexPoint::from_point(z));
            (coords_label(z), v.re, v.im, tail)
        })
        .collect();

    if cfg.format == "csv" {
        let mut text = String::from("z,re,im,tail\n");
        for (z, re, im, tail) in &values {
            text.push_str(&format!("{},{:.11e},{:.11e},{:.11e}\n", z, re, im, tail));
        }
        return ok_output(text);
    }
    ok_output(render_json(&json!({
        "kernel": kernel_json(&series),
        "values": values
            .iter()
            .map(|(z, re, im, tail)| json!({"z": z, "re": re, "im": im, "tail": tail}))
            .collect::<Vec<_>>(),
    })))
}

fn csv_block(out: &mut String, label: &str, table: &ConvergenceTable) {
    out.push_str(&format!("# {}\n", label));
    out.push_str(&table.to_csv());
}

pub fn cmd_limit(cfg: &RunConfig) -> Result<Output, Failure> {
    let ctx = context(cfg)?;
    let lambda = cfg.weight(&ctx.rs).map_err(Failure::Config)?;
    let zs = cfg.zgrid(&ctx.rs).map_err(Failure::Config)?;
    if zs.is_empty() {
        return Err(Failure::Config("limit needs a nonempty z-grid".into()));
    }
    let ns = cfg.scales();

    let scaling = scaling_error_table(
        &ctx.rs, &ctx.k, &lambda, &zs, &ns, cfg.order, cfg.downset_limit, cfg.seed,
    )
    .map_err(engine_failure)?;

    let mut moment_tables = Vec::new();
    for m in cfg.moment_orders() {
        let t = moment_convergence(
            &ctx.rs, &ctx.k, &lambda, &zs[0], m, &ns, cfg.downset_limit, cfg.seed,
        )
        .map_err(engine_failure)?;
        moment_tables.push((m, t));
    }

    let mut notes: Vec<String> = Vec::new();
    let symmetric = if ctx.rs.is_dominant(&lambda) {
        Some(
            symmetric_error_table(
                &ctx.rs, &ctx.k, &lambda, &zs, &ns, cfg.order, cfg.downset_limit, cfg.seed,
            )
            .map_err(engine_failure)?,
        )
    } else {
        notes.push(format!(
            "symmetric table skipped: {} is not dominant",
            lambda
        ));
        None
    };

    if cfg.format == "csv" {
        let mut text = String::new();
        for n in &notes {
            text.push_str(&format!("# note: {}\n", n));
        }
        csv_block(&mut text, &scaling.label, &scaling);
        for (_, t) in &moment_tables {
            csv_block(&mut text, &t.label, t);
        }
        if let Some(t) = &symmetric {
            csv_block(&mut text, &t.label, t);
        }
        return ok_output(text);
    }
    ok_output(render_json(&json!({
        "scaling": scaling.to_json(),
        "moments": moment_tables.iter().map(|(m, t)| json!({"m": m, "table": t.to_json()})).collect::<Vec<_>>(),
        "symmetric": symmetric.as_ref().map(|t| t.to_json()),
        "notes": notes,
    })))
}

pub fn cmd_measure(cfg: &RunConfig) -> Result<Output, Failure> {
    let ctx = context(cfg)?;
    let lambda = cfg.weight(&ctx.rs).map_err(Failure::Config)?;
    let zs = cfg.zgrid(&ctx.rs).map_err(Failure::Config)?;
    let ns = if cfg.n_list.is_empty() { vec![1] } else { cfg.n_list.clone() };

    let mut records = Vec::new();
    for &n in &ns {
        let mu = measure_approx(&ctx.rs, &ctx.k, &lambda, n, cfg.downset_limit, cfg.seed)
            .map_err(engine_failure)?;
        if !support_check(&ctx.rs, &mu, &lambda).map_err(engine_failure)? {
            return Err(Failure::Invariant(format!(
                "measure at scale {} has an atom outside the orbit hull of {}",
                n, lambda
            )));
        }
        let mut moments = Vec::new();
        if let Some(z) = zs.first() {
            for m in cfg.moment_orders() {
                let value = measure_moment(&ctx.rs, &mu, z, m);
                moments.push(json!({
                    "m": m,
                    "z": coords_label(z),
                    "value": format_q(&value),
                    "value_f64": q_to_f64(&value),
                }));
            }
        }
        records.push((n, mu, moments));
    }

    if cfg.format == "csv" {
        let mut text = String::from("n,point,weight\n");
        for (n, mu, _) in &records {
            for (p, w) in mu.atoms() {
                text.push_str(&format!("{},{},{}\n", n, coords_label(p), format_q(w)));
            }
        }
        return ok_output(text);
    }
    ok_output(render_json(&json!(records
        .iter()
        .map(|(n, mu, moments)| json!({
            "n": n,
            "atoms": measure_json(mu),
            "support_ok": true,
            "moments": moments,
        }))
        .collect::<Vec<_>>())))
}

pub fn cmd_rankone(cfg: &RunConfig) -> Result<Output, Failure> {
    let ctx = context(cfg)?;
    if ctx.rs.code() != "A1" {
        return Err(Failure::Config(format!(
            "rankone requires system A1, got {}",
            ctx.rs.code()
        )));
    }
    let kq = ctx.k.values()[0].clone();

    // Exact oracle: the triangular solve must reproduce the closed form
    // coefficient by coefficient.
    let mut oracle_cases = 0usize;
    for n in -8i64..=8 {
        let ep = compute_e(&ctx.rs, &ctx.k, &Weight(vec![n]), cfg.downset_limit, cfg.seed)
            .map_err(engine_failure)?;
        let closed = closed_e_trig(n, &kq).map_err(engine_failure)?;
        if ep.normalized() != closed {
            return Err(Failure::Invariant(format!(
                "closed form disagrees with the solver at n={}",
                n
            )));
        }
        oracle_cases += 1;
    }

    // Float oracle: the symmetric normalized eigenfunction equals the
    // Gegenbauer-type polynomial of cosh at deterministic sample points.
    let mut float_cases = 0usize;
    let mut state = cfg.seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next_z = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) * 4.0 - 2.0
    };
    for n in 1i64..=4 {
        let ep = compute_e(&ctx.rs, &ctx.k, &Weight(vec![n]), cfg.downset_limit, cfg.seed)
            .map_err(engine_failure)?;
        let f = symmetric_normalized(&ctx.rs, &ep).map_err(engine_failure)?;
        for _ in 0..20 {
            let z = next_z();
            let v = f
                .eval(&ctx.rs, &ComplexPoint::real(vec![z / 2.0]))
                .map_err(engine_failure)?;
            let want = gegenbauer_q_approx(n as u64, q_to_f64(&kq), z.cosh());
            if (v.re - want).abs() > 1e-10 * want.abs().max(1.0) {
                return Err(Failure::Invariant(format!(
                    "symmetric eigenfunction disagrees with the degree-{} polynomial at z={}",
                    n, z
                )));
            }
            float_cases += 1;
        }
    }

    // Classical limit rows over the configured scales.
    let mut limit_rows = Vec::new();
    for &n in &cfg.scales() {
        for t in [0.5, 1.0, 2.0] {
            let (approx, reference, error) =
                gegenbauer_bessel_limit(&kq, t, n as u64).map_err(engine_failure)?;
            limit_rows.push(json!({
                "n": n,
                "z": t,
                "approx": approx,
                "reference": reference,
                "error": error,
            }));
        }
    }

    if cfg.format == "csv" {
        let mut text = String::from("n,z,approx,reference,error\n");
        for r in &limit_rows {
            text.push_str(&format!(
                "{},{},{:.11e},{:.11e},{:.11e}\n",
                r["n"],
                r["z"],
                r["approx"].as_f64().unwrap(),
                r["reference"].as_f64().unwrap(),
                r["error"].as_f64().unwrap()
            ));
        }
        return ok_output(text);
    }
    ok_output(render_json(&json!({
        "oracle_cases": oracle_cases,
        "float_cases": float_cases,
        "limit_rows": limit_rows,
    })))
}

struct CheckRow {
    check: &'static str,
    system: String,
    cases: usize,
    pass: bool,
    detail: String,
}

fn weight_box(rank: usize, bound: i64) -> Vec<Weight> {
    let mut out = Vec::new();
    let mut cur = vec![-bound; rank];
    loop {
        out.push(Weight(cur.clone()));
        let mut i = 0;
        loop {
            if i == rank {
                return out;
            }
            cur[i] += 1;
            if cur[i] <= bound {
                break;
            }
            cur[i] = -bound;
            i += 1;
        }
    }
}

fn verify_multiplicities(rs: &RootSystem) -> Vec<Multiplicity> {
    let mut ks = vec![
        Multiplicity::uniform(rs, Q::zero()).unwrap(),
        Multiplicity::uniform(rs, parse_q("1/2").unwrap()).unwrap(),
        Multiplicity::uniform(rs, Q::one()).unwrap(),
    ];
    if rs.orbit_count == 2 {
        ks.push(Multiplicity::per_orbit(rs, vec![parse_q("1/2").unwrap(), Q::one()]).unwrap());
        ks.push(Multiplicity::per_orbit(rs, vec![Q::one(), parse_q("1/2").unwrap()]).unwrap());
    }
    ks
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Output, Failure> {
    let systems = if cfg.verify_systems.is_empty() {
        vec!["A1".to_string(), "A2".to_string(), "B2".to_string()]
    } else {
        cfg.verify_systems.clone()
    };
    let cap = cfg.downset_limit.min(120);
    let mut rows: Vec<CheckRow> = Vec::new();

    for code in &systems {
        let rs = RootSystem::from_code(code).map_err(|e| Failure::Config(e.to_string()))?;
        let bound = if rs.rank == 1 { 6 } else { 2 };
        let lambdas = weight_box(rs.rank, bound);
        let ks = verify_multiplicities(&rs);

        // Positivity, mass, hull, and spectral-orbit sweeps share the
        // computed eigenpolynomials; the sweep is parallel over weights.
        let mut sweep_cases = 0usize;
        let mut sweep_fail: Option<String> = None;
        let mut hull_cases = 0usize;
        let mut spectral_cases = 0usize;
        for k in &ks {
            let results: Vec<Result<(usize, usize), String>> = lambdas
                .par_iter()
                .map(|lam| {
                    let ep = match compute_e(&rs, k, lam, cap, cfg.seed) {
                        Ok(ep) => ep,
                        Err(EngineError::DownsetOverflow { .. }) => return Ok((0, 0)),
                        Err(e) => return Err(format!("lambda={}: {}", lam, e)),
                    };
                    let mut mass = Q::zero();
                    for (_, b) in ep.prob_coeffs() {
                        mass = mass + b;
                    }
                    if !mass.is_one() || !ep.coeff(lam).is_one() {
                        return Err(format!("lambda={}: mass or leading term off", lam));
                    }
                    let mut hull = 0usize;
                    for (nu, _) in ep.poly.terms() {
                        let p = rs.weight_point(nu);
                        if !rs.hull_contains(lam, &p).map_err(|e| e.to_string())? {
                            return Err(format!("lambda={}: {} outside hull", lam, nu));
                        }
                        hull += 1;
                    }
                    let mut spectral = 0usize;
                    if rs.is_dominant(lam) {
                        if !spectral_orbit_check(&rs, k, lam) {
                            return Err(format!("lambda={}: spectral vector off orbit", lam));
                        }
                        spectral = 1;
                    }
                    Ok((hull, spectral))
                })
                .collect();
            for r in results {
                match r {
                    Ok((h, s)) => {
                        sweep_cases += 1;
                        hull_cases += h;
                        spectral_cases += s;
                    }
                    Err(m) => {
                        sweep_cases += 1;
                        if sweep_fail.is_none() {
                            sweep_fail = Some(m);
                        }
                    }
                }
            }
        }
        rows.push(CheckRow {
            check: "positivity",
            system: code.clone(),
            cases: sweep_cases,
            pass: sweep_fail.is_none(),
            detail: sweep_fail.clone().unwrap_or_default(),
        });
        rows.push(CheckRow {
            check: "hull",
            system: code.clone(),
            cases: hull_cases,
            pass: sweep_fail.is_none(),
            detail: String::new(),
        });
        rows.push(CheckRow {
            check: "spectral-orbit",
            system: code.clone(),
            cases: spectral_cases,
            pass: sweep_fail.is_none(),
            detail: String::new(),
        });

        // Intertwining identity on all monomials of low degree.
        let mut inter_cases = 0usize;
        let mut inter_fail: Option<String> = None;
        'outer: for k in &ks {
            let vop = match build_intertwiner(&rs, k, 4) {
                Ok(v) => v,
                Err(e) => {
                    inter_fail = Some(e.to_string());
                    break;
                }
            };
            for m in 1..=4usize {
                let monos: Vec<Vec<u32>> = vop.stage(m).map(|(e, _)| e.clone()).collect();
                for e in monos {
                    let xe = MultiPoly::monomial(e.clone(), Q::one());
                    for j in 0..rs.rank {
                        let mut dir = vec![Q::zero(); rs.rank];
                        dir[j] = Q::one();
                        let lhs = match apply_dunkl(
                            &rs,
                            k,
                            &Point(dir),
                            vop.monomial_image(&e).unwrap(),
                        ) {
                            Ok(p) => p,
                            Err(err) => {
                                inter_fail = Some(err.to_string());
                                break 'outer;
                            }
                        };
                        let rhs = vop.apply(&xe.partial(j)).unwrap();
                        if lhs != rhs {
                            inter_fail =
                                Some(format!("intertwining fails at monomial {:?}", e));
                            break 'outer;
                        }
                        inter_cases += 1;
                    }
                }
            }
        }
        rows.push(CheckRow {
            check: "intertwining",
            system: code.clone(),
            cases: inter_cases,
            pass: inter_fail.is_none(),
            detail: inter_fail.unwrap_or_default(),
        });

        if code == "A1" {
            let mut oracle_cases = 0usize;
            let mut oracle_fail: Option<String> = None;
            for k in verify_multiplicities(&rs) {
                let kq = k.values()[0].clone();
                for n in -6i64..=6 {
                    match compute_e(&rs, &k, &Weight(vec![n]), cap, cfg.seed) {
                        Ok(ep) => {
                            let closed = closed_e_trig(n, &kq).unwrap();
                            if ep.normalized() != closed {
                                oracle_fail = Some(format!("n={} k={}", n, format_q(&kq)));
                            }
                            oracle_cases += 1;
                        }
                        Err(e) => oracle_fail = Some(e.to_string()),
                    }
                }
            }
            rows.push(CheckRow {
                check: "rank-one-oracle",
                system: code.clone(),
                cases: oracle_cases,
                pass: oracle_fail.is_none(),
                detail: oracle_fail.unwrap_or_default(),
            });
        }
    }

    if let Some(dir) = &cfg.cache_dir {
        let cache = DiskCache::open(dir).map_err(Failure::Config)?;
        let (cases, pass, detail) = match cache.verify_all() {
            Ok(n) => (n, true, String::new()),
            Err(m) => (0, false, m),
        };
        rows.push(CheckRow {
            check: "cache-integrity",
            system: "-".into(),
            cases,
            pass,
            detail,
        });
    }

    let all_pass = rows.iter().all(|r| r.pass);
    let text = if cfg.format == "csv" {
        let mut text = String::from("check,system,cases,pass,detail\n");
        for r in &rows {
            text.push_str(&format!(
                "{},{},{},{},{}\n",
                r.check, r.system, r.cases, r.pass, r.detail
            ));
        }
        text
    } else {
        render_json(&json!({
            "pass": all_pass,
            "checks": rows
                .iter()
                .map(|r| json!({
                    "check": r.check,
                    "system": r.system,
                    "cases": r.cases,
                    "pass": r.pass,
                    "detail": r.detail,
                }))
                .collect::<Vec<_>>(),
        }))
    };
    Ok(Output { text, ok: all_pass })
}
