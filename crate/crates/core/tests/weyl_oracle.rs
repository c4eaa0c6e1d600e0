//! Independent cross-check of the root-system tables against explicit
//! Euclidean realizations.  The group and root data here are produced by
//! floating-point reflection closure from textbook coordinate models, with
//! no reference to the engine's Gram/Cartan bookkeeping, so agreement of
//! counts, lengths, and pairings is a genuine consistency check.

use opdam_core::rat::q_to_f64;
use opdam_core::rootsys::RootSystem;

type Vecf = Vec<f64>;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn reflect(v: &[f64], mirror: &[f64]) -> Vecf {
    let c = 2.0 * dot(v, mirror) / dot(mirror, mirror);
    v.iter().zip(mirror).map(|(x, m)| x - c * m).collect()
}

fn key(v: &[f64]) -> Vec<i64> {
    v.iter().map(|x| (x * 1e6).round() as i64).collect()
}

/// Euclidean simple roots matching the engine's labeling and length
/// conventions (short squared length 2, except the halved-root rank-one
/// model where the single root has squared length 4).
fn realization(code: &str) -> Vec<Vecf> {
    let e = |n: usize, i: usize| -> Vecf {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    };
    let sub = |a: &[f64], b: &[f64]| -> Vecf { a.iter().zip(b).map(|(x, y)| x - y).collect() };
    let smul = |s: f64, a: &[f64]| -> Vecf { a.iter().map(|x| s * x).collect() };
    let r2 = std::f64::consts::SQRT_2;
    let family = &code[..1];
    let rank: usize = code[1..].parse().unwrap();
    match family {
        "A" => {
            if rank == 1 {
                return vec![vec![2.0]];
            }
            let n = rank + 1;
            (0..rank).map(|i| sub(&e(n, i), &e(n, i + 1))).collect()
        }
        "B" => {
            let mut roots: Vec<Vecf> = (0..rank - 1)
                .map(|i| smul(r2, &sub(&e(rank, i), &e(rank, i + 1))))
                .collect();
            roots.push(smul(r2, &e(rank, rank - 1)));
            roots
        }
        "C" => {
            let mut roots: Vec<Vecf> = (0..rank - 1)
                .map(|i| sub(&e(rank, i), &e(rank, i + 1)))
                .collect();
            roots.push(smul(2.0, &e(rank, rank - 1)));
            roots
        }
        "D" => {
            let mut roots: Vec<Vecf> = (0..rank - 1)
                .map(|i| sub(&e(rank, i), &e(rank, i + 1)))
                .collect();
            let mut last = e(rank, rank - 1);
            last[rank - 2] = 1.0;
            roots.push(last);
            roots
        }
        "G" => {
            let s3 = 3.0f64.sqrt();
            vec![
                vec![r2, 0.0],
                vec![-1.5 * r2, r2 * s3 / 2.0],
            ]
        }
        _ => panic!("unknown code {code}"),
    }
}

/// All roots by reflection closure of the simple ones.
fn root_closure(simple: &[Vecf]) -> Vec<Vecf> {
    let mut roots: Vec<Vecf> = simple.to_vec();
    let mut seen: std::collections::BTreeSet<Vec<i64>> = roots.iter().map(|v| key(v)).collect();
    loop {
        let mut grew = false;
        let snapshot = roots.clone();
        for r in &snapshot {
            for s in simple {
                let t = reflect(r, s);
                if seen.insert(key(&t)) {
                    roots.push(t);
                    grew = true;
                }
            }
        }
        if !grew {
            return roots;
        }
    }
}

/// Order of the group generated by the simple reflections, by closure on
/// rounded matrices.
fn group_order(simple: &[Vecf]) -> usize {
    let n = simple[0].len();
    let identity: Vec<Vecf> = (0..n)
        .map(|i| {
            let mut row = vec![0.0; n];
            row[i] = 1.0;
            row
        })
        .collect();
    let apply = |m: &[Vecf], s: &[f64]| -> Vec<Vecf> {
        m.iter().map(|row| reflect(row, s)).collect()
    };
    let mat_key = |m: &[Vecf]| -> Vec<i64> { m.iter().flat_map(|row| key(row)).collect() };

    let mut frontier = vec![identity.clone()];
    let mut seen = std::collections::BTreeSet::new();
    seen.insert(mat_key(&identity));
    while let Some(m) = frontier.pop() {
        for s in simple {
            let t = apply(&m, s);
            if seen.insert(mat_key(&t)) {
                frontier.push(t);
            }
        }
    }
    seen.len()
}

#[test]
fn tables_match_euclidean_models() {
    for code in ["A1", "A2", "A3", "B2", "B3", "C2", "C3", "D4", "G2"] {
        let rs = RootSystem::from_code(code).unwrap();
        let simple = realization(code);
        assert_eq!(simple.len(), rs.rank, "{code} rank");

        // Gram matrix of the model equals the engine's exactly.
        for i in 0..rs.rank {
            for j in 0..rs.rank {
                let want = q_to_f64(&rs.gram[i][j]);
                let got = dot(&simple[i], &simple[j]);
                assert!(
                    (got - want).abs() < 1e-9,
                    "{code} gram[{i}][{j}] {got} vs {want}"
                );
            }
        }

        // Root count from reflection closure.
        let roots = root_closure(&simple);
        assert_eq!(roots.len(), 2 * rs.positive_roots.len(), "{code} roots");

        // Group order from matrix closure.
        assert_eq!(group_order(&simple), rs.weyl_order(), "{code} weyl order");

        // Each engine positive root maps into the closed root set, with the
        // engine's squared length.
        let root_keys: std::collections::BTreeSet<Vec<i64>> =
            roots.iter().map(|v| key(v)).collect();
        for root in &rs.positive_roots {
            let n = simple[0].len();
            let mut v = vec![0.0; n];
            for (c, s) in root.coords.iter().zip(&simple) {
                for (vi, si) in v.iter_mut().zip(s) {
                    *vi += *c as f64 * si;
                }
            }
            assert!(root_keys.contains(&key(&v)), "{code} missing root {:?}", root.coords);
            assert!(
                (dot(&v, &v) - q_to_f64(&root.len2)).abs() < 1e-9,
                "{code} root length mismatch"
            );
        }

        // Length split: the number of distinct root lengths matches the
        // engine's orbit count.
        let mut lens: Vec<i64> = roots.iter().map(|v| (dot(v, v) * 1e6).round() as i64).collect();
        lens.sort();
        lens.dedup();
        assert_eq!(lens.len(), rs.orbit_count, "{code} orbit count");
    }
}
