//! Rational Dunkl operators, the degree-preserving intertwining operator,
//! and the kernel series it generates.
//!
//! The operator in direction `xi` acts on polynomials (variables are the
//! simple-root coordinates of the argument) as
//!
//! ```text
//! T_xi p = d_xi p + sum_{alpha > 0} k_alpha <alpha, xi> (p - sigma_alpha p) / <alpha, .>
//! ```
//!
//! The intertwining operator `V` is the unique degree-preserving linear map
//! with `V 1 = 1` and `T_xi V = V d_xi`; it is constructed stage by stage in
//! the degree, each stage an exact overdetermined linear solve.  Applying
//! `V` in the first argument of the plain exponential `exp <x, z>` and
//! truncating produces the kernel series whose Weyl average is the
//! Bessel-type function of the scaling limits.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use std::collections::BTreeMap;

use crate::algebra::{divided_difference, ComplexPoint, MultiPoly};
use crate::error::{EngineError, Result};
use crate::linalg::{solve_exact, QVec};
use crate::rat::{qi, Q};
use crate::rootsys::{Multiplicity, Point, RootSystem};

/// Apply the Dunkl operator in direction `xi` (simple-root coordinates).
pub fn apply_dunkl(
    rs: &RootSystem,
    k: &Multiplicity,
    xi: &Point,
    p: &MultiPoly,
) -> Result<MultiPoly> {
    let mut out = p.dir_derivative(&xi.0);
    for root in &rs.positive_roots {
        let ka = k.value(root.orbit);
        if ka.is_zero() {
            continue;
        }
        let alpha_pt: Vec<Q> = root.coords.iter().map(|&c| qi(c)).collect();
        let factor = ka * rs.ip(&alpha_pt, &xi.0);
        if factor.is_zero() {
            continue;
        }
        out = out.add(&divided_difference(rs, root, p)?.scale(&factor));
    }
    Ok(out)
}

/// All exponent vectors of the given total degree, in a fixed deterministic
/// order.
fn monomials_of_degree(rank: usize, m: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; rank];
    fn rec(i: usize, remaining: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i + 1 == cur.len() {
            cur[i] = remaining;
            out.push(cur.clone());
            return;
        }
        for v in 0..=remaining {
            cur[i] = v;
            rec(i + 1, remaining - v, cur, out);
        }
    }
    rec(0, m, &mut cur, &mut out);
    out
}

fn exponent_factorial(e: &[u32]) -> Q {
    let mut f = BigInt::one();
    for &ei in e {
        for t in 2..=ei as u64 {
            f *= t;
        }
    }
    Q::from_integer(f)
}

/// The intertwining operator, realized as the table of images of all
/// monomials up to a fixed degree.
#[derive(Debug, Clone)]
pub struct Intertwiner {
    rank: usize,
    stages: Vec<BTreeMap<Vec<u32>, MultiPoly>>,
}

/// Build the intertwiner table degree by degree.  Stage `m` solves the
/// stacked system `T_{alpha_j} q_e = e_j V x^{e - delta_j}` over all simple
/// directions `j` at once; the solve is exact and verifies full column rank
/// and consistency, so a returned table genuinely intertwines.
pub fn build_intertwiner(
    rs: &RootSystem,
    k: &Multiplicity,
    max_degree: usize,
) -> Result<Intertwiner> {
    let r = rs.rank;
    let mut stages: Vec<BTreeMap<Vec<u32>, MultiPoly>> = Vec::with_capacity(max_degree + 1);
    let mut base = BTreeMap::new();
    base.insert(vec![0u32; r], MultiPoly::one(r));
    stages.push(base);

    for m in 1..=max_degree as u32 {
        let monos = monomials_of_degree(r, m);
        let lower = monomials_of_degree(r, m - 1);
        let lower_index: BTreeMap<&[u32], usize> = lower
            .iter()
            .enumerate()
            .map(|(i, e)| (e.as_slice(), i))
            .collect();
        let nrows = r * lower.len();

        let mut a = vec![vec![Q::zero(); monos.len()]; nrows];
        for (fi, f) in monos.iter().enumerate() {
            let xf = MultiPoly::monomial(f.clone(), Q::one());
            for j in 0..r {
                let mut dir = vec![Q::zero(); r];
                dir[j] = Q::one();
                let t = apply_dunkl(rs, k, &Point(dir), &xf)?;
                for (g, c) in t.terms() {
                    a[j * lower.len() + lower_index[g.as_slice()]][fi] = c.clone();
                }
            }
        }

        let prev = &stages[m as usize - 1];
        let mut rhs: Vec<QVec> = Vec::with_capacity(monos.len());
        for e in &monos {
            let mut v = vec![Q::zero(); nrows];
            for j in 0..r {
                if e[j] == 0 {
                    continue;
                }
                let mut e2 = e.clone();
                e2[j] -= 1;
                for (g, c) in prev[&e2].terms() {
                    v[j * lower.len() + lower_index[g.as_slice()]] = qi(e[j] as i64) * c;
                }
            }
            rhs.push(v);
        }

        let sols = solve_exact(&a, &rhs).map_err(|_| EngineError::RankDeficientIntertwiner {
            degree: m as usize,
        })?;
        let mut stage = BTreeMap::new();
        for (e, coeffs) in monos.iter().zip(sols) {
            let mut img = MultiPoly::zero();
            for (f, c) in monos.iter().zip(coeffs) {
                img.add_term(f.clone(), c);
            }
            stage.insert(e.clone(), img);
        }
        stages.push(stage);
    }
    Ok(Intertwiner { rank: r, stages })
}

impl Intertwiner {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn max_degree(&self) -> usize {
        self.stages.len() - 1
    }

    /// Image of a single monomial, if the table extends that far.
    pub fn monomial_image(&self, e: &[u32]) -> Option<&MultiPoly> {
        let m: u32 = e.iter().sum();
        self.stages.get(m as usize)?.get(e)
    }

    /// Monomial images at one homogeneity degree, in lexicographic order.
    pub fn stage(&self, m: usize) -> impl Iterator<Item = (&Vec<u32>, &MultiPoly)> {
        self.stages.get(m).into_iter().flatten()
    }

    /// Apply the operator to a polynomial of degree within the table.
    pub fn apply(&self, p: &MultiPoly) -> Result<MultiPoly> {
        let mut out = MultiPoly::zero();
        for (e, c) in p.terms() {
            let img = self.monomial_image(e).ok_or_else(|| {
                EngineError::InvalidArgument(format!(
                    "intertwiner table holds degrees up to {}, polynomial has a term of degree {}",
                    self.max_degree(),
                    e.iter().sum::<u32>()
                ))
            })?;
            out = out.add(&img.scale(c));
        }
        Ok(out)
    }
}

/// Truncated kernel series in the second argument, the first argument baked
/// in: term `h[m]` is the intertwined degree-m piece of `exp <x, z>`, an
/// exact polynomial in the simple-root coordinates of `z`.
#[derive(Debug, Clone)]
pub struct KernelSeries {
    pub x: Point,
    pub h: Vec<MultiPoly>,
}

/// Build the kernel series at `x` truncated after total degree `order`,
/// constructing a fresh intertwiner table.
pub fn expw(rs: &RootSystem, k: &Multiplicity, x: &Point, order: usize) -> Result<KernelSeries> {
    let vop = build_intertwiner(rs, k, order)?;
    expw_with(rs, &vop, x, order)
}

/// Value of the truncated kernel at a single point, with the tail proxy.
pub fn expw_truncated(
    rs: &RootSystem,
    k: &Multiplicity,
    x: &Point,
    z: &ComplexPoint,
    order: usize,
) -> Result<(Complex64, f64)> {
    Ok(expw(rs, k, x, order)?.eval(z))
}

/// Build the kernel series from an existing intertwiner table (which must
/// extend to `order`).
pub fn expw_with(
    rs: &RootSystem,
    vop: &Intertwiner,
    x: &Point,
    order: usize,
) -> Result<KernelSeries> {
    if order > vop.max_degree() {
        return Err(EngineError::InvalidArgument(format!(
            "kernel order {} exceeds intertwiner table degree {}",
            order,
            vop.max_degree()
        )));
    }
    let r = rs.rank;
    // Powers of the coordinate forms <alpha_j-dual expansion>: lf[j] is the
    // linear polynomial z -> <e_j, z>, so prod_j lf[j]^{e_j} carries the
    // monomial x^e of the expanded exponential.
    let mut unit = vec![Q::zero(); r];
    let lf: Vec<MultiPoly> = (0..r)
        .map(|j| {
            unit[j] = Q::one();
            let p = MultiPoly::linear_form(rs, &unit);
            unit[j] = Q::zero();
            p
        })
        .collect();
    let mut powers: Vec<Vec<MultiPoly>> = Vec::with_capacity(r);
    for f in &lf {
        let mut col = vec![MultiPoly::one(r)];
        for t in 1..=order {
            col.push(col[t - 1].mul(f));
        }
        powers.push(col);
    }

    let mut h = Vec::with_capacity(order + 1);
    for m in 0..=order as u32 {
        let mut hm = MultiPoly::zero();
        for e in monomials_of_degree(r, m) {
            let img = vop
                .monomial_image(&e)
                .expect("stage within table by construction");
            let val = img.eval_point(&x.0);
            if val.is_zero() {
                continue;
            }
            let coeff = val / exponent_factorial(&e);
            let mut zpoly = powers[0][e[0] as usize].clone();
            for j in 1..r {
                if e[j] > 0 {
                    zpoly = zpoly.mul(&powers[j][e[j] as usize]);
                }
            }
            hm = hm.add(&zpoly.scale(&coeff));
        }
        h.push(hm);
    }
    Ok(KernelSeries { x: x.clone(), h })
}

impl KernelSeries {
    pub fn order(&self) -> usize {
        self.h.len() - 1
    }

    /// Value of the truncation at `z`, together with the magnitude of the
    /// highest-order term as the reported tail proxy.
    pub fn eval(&self, z: &ComplexPoint) -> (Complex64, f64) {
        let mut acc = Complex64::new(0.0, 0.0);
        for hm in &self.h {
            acc += hm.eval_complex(z);
        }
        let tail = self.h[self.h.len() - 1].eval_complex(z).norm();
        (acc, tail)
    }
}

/// Weyl average of the kernel series: the symmetric Bessel-type function.
/// Returns the averaged value and the worst per-chamber tail proxy.
pub fn bessel_jw_with(
    rs: &RootSystem,
    series: &KernelSeries,
    z: &ComplexPoint,
) -> (Complex64, f64) {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut tail = 0.0f64;
    for w in &rs.weyl {
        let (v, t) = series.eval(&z.apply_int_matrix(&w.mat_sr));
        acc += v;
        tail = tail.max(t);
    }
    (acc / rs.weyl_order() as f64, tail)
}

/// Truncated symmetric Bessel-type value at a single point.
pub fn bessel_jw(
    rs: &RootSystem,
    k: &Multiplicity,
    x: &Point,
    z: &ComplexPoint,
    order: usize,
) -> Result<(Complex64, f64)> {
    let series = expw(rs, k, x, order)?;
    Ok(bessel_jw_with(rs, &series, z))
}

/// Exact directional moment of the intertwined exponential: the intertwiner
/// applied to `<., z>^m`, evaluated at `x`.
pub fn v_moment_with(
    rs: &RootSystem,
    vop: &Intertwiner,
    x: &Point,
    z: &Point,
    m: usize,
) -> Result<Q> {
    let p = MultiPoly::linear_form(rs, &z.0).pow(m as u32);
    Ok(vop.apply(&p)?.eval_point(&x.0))
}

/// Exact directional moment built from a fresh intertwiner table.
pub fn v_moment(
    rs: &RootSystem,
    k: &Multiplicity,
    x: &Point,
    z: &Point,
    m: usize,
) -> Result<Q> {
    let vop = build_intertwiner(rs, k, m)?;
    v_moment_with(rs, &vop, x, z, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rankone::bessel_j;
    use crate::rat::{q_to_f64, qr};

    fn a1() -> RootSystem {
        RootSystem::from_code("A1").unwrap()
    }

    #[test]
    fn dunkl_rank_one_frozen() {
        let rs = a1();
        let k = Multiplicity::uniform(&rs, qr(1, 2)).unwrap();
        let x = MultiPoly::var(1, 0);

        // In the fundamental-weight direction, the doubled coordinate maps
        // to the constant 1 + 2k.
        let omega = rs.fundamental_weight(0);
        let out = apply_dunkl(&rs, &k, &omega, &x.scale(&qi(2))).unwrap();
        assert_eq!(out, MultiPoly::constant(1, qi(2)));

        // In the simple-root direction: X^m -> (m + k(1 - (-1)^m)) X^{m-1}.
        let alpha = Point(vec![Q::one()]);
        for m in 1..=5u32 {
            let out = apply_dunkl(&rs, &k, &alpha, &x.pow(m)).unwrap();
            let factor = qi(m as i64) + if m % 2 == 1 { qi(2) * qr(1, 2) } else { Q::zero() };
            assert_eq!(out, x.pow(m - 1).scale(&factor), "m={}", m);
        }

        // Constants are annihilated.
        let out = apply_dunkl(&rs, &k, &alpha, &MultiPoly::one(1)).unwrap();
        assert!(out.is_zero());
    }

    #[test]
    fn dunkl_preserves_homogeneity_dropping_one_degree() {
        let rs = RootSystem::from_code("B2").unwrap();
        let k = Multiplicity::per_orbit(&rs, vec![qr(1, 2), qi(1)]).unwrap();
        let p = MultiPoly::var(2, 0)
            .pow(3)
            .add(&MultiPoly::var(2, 0).mul(&MultiPoly::var(2, 1).pow(2)));
        for j in 0..2 {
            let mut dir = vec![Q::zero(); 2];
            dir[j] = Q::one();
            let out = apply_dunkl(&rs, &k, &Point(dir), &p).unwrap();
            assert!(out.is_homogeneous());
            assert_eq!(out.degree(), Some(2));
        }
    }

    #[test]
    fn dunkl_operators_commute() {
        for code in ["A2", "B2", "G2"] {
            let rs = RootSystem::from_code(code).unwrap();
            let k = if rs.orbit_count == 2 {
                Multiplicity::per_orbit(&rs, vec![qr(1, 2), qr(5, 3)]).unwrap()
            } else {
                Multiplicity::uniform(&rs, qr(2, 3)).unwrap()
            };
            let d0 = Point(vec![Q::one(), Q::zero()]);
            let d1 = Point(vec![Q::zero(), Q::one()]);
            let polys = [
                MultiPoly::var(2, 0).pow(3).mul(&MultiPoly::var(2, 1)),
                MultiPoly::var(2, 0).add(&MultiPoly::var(2, 1)).pow(4),
                MultiPoly::var(2, 0)
                    .pow(2)
                    .sub(&MultiPoly::var(2, 1).pow(2))
                    .mul(&MultiPoly::var(2, 0)),
            ];
            for p in &polys {
                let ab =
                    apply_dunkl(&rs, &k, &d0, &apply_dunkl(&rs, &k, &d1, p).unwrap()).unwrap();
                let ba =
                    apply_dunkl(&rs, &k, &d1, &apply_dunkl(&rs, &k, &d0, p).unwrap()).unwrap();
                assert_eq!(ab, ba, "{}", code);
            }
        }
    }

    #[test]
    fn dunkl_reduces_to_derivative_without_multiplicity() {
        let rs = RootSystem::from_code("A2").unwrap();
        let k = Multiplicity::uniform(&rs, Q::zero()).unwrap();
        let p = MultiPoly::var(2, 0).pow(2).mul(&MultiPoly::var(2, 1));
        let dir = Point(vec![qi(2), qi(-1)]);
        let out = apply_dunkl(&rs, &k, &dir, &p).unwrap();
        assert_eq!(out, p.dir_derivative(&dir.0));
    }

    #[test]
    fn intertwiner_rank_one_frozen() {
        let rs = a1();
        let k = Multiplicity::uniform(&rs, qr(1, 2)).unwrap();
        let vop = build_intertwiner(&rs, &k, 4).unwrap();
        let x = MultiPoly::var(1, 0);
        // V X^m = X^m / (1+2k) for m = 1, 2; 3 X^3 / ((1+2k)(3+2k)) next.
        assert_eq!(vop.apply(&x).unwrap(), x.scale(&qr(1, 2)));
        assert_eq!(vop.apply(&x.pow(2)).unwrap(), x.pow(2).scale(&qr(1, 2)));
        assert_eq!(vop.apply(&x.pow(3)).unwrap(), x.pow(3).scale(&qr(3, 8)));
        assert_eq!(vop.apply(&x.pow(4)).unwrap(), x.pow(4).scale(&qr(3, 8)));
        // V 1 = 1.
        assert_eq!(vop.apply(&MultiPoly::one(1)).unwrap(), MultiPoly::one(1));
    }

    #[test]
    fn intertwiner_intertwines() {
        for code in ["A2", "B2"] {
            let rs = RootSystem::from_code(code).unwrap();
            let k = if rs.orbit_count == 2 {
                Multiplicity::per_orbit(&rs, vec![qr(1, 2), qi(2)]).unwrap()
            } else {
                Multiplicity::uniform(&rs, qr(1, 2)).unwrap()
            };
            let deg = 4;
            let vop = build_intertwiner(&rs, &k, deg).unwrap();
            for m in 1..=deg as u32 {
                for e in monomials_of_degree(rs.rank, m) {
                    let xe = MultiPoly::monomial(e.clone(), Q::one());
                    for j in 0..rs.rank {
                        let mut dir = vec![Q::zero(); rs.rank];
                        dir[j] = Q::one();
                        let lhs =
                            apply_dunkl(&rs, &k, &Point(dir), &vop.apply(&xe).unwrap()).unwrap();
                        let rhs = vop.apply(&xe.partial(j)).unwrap();
                        assert_eq!(lhs, rhs, "{} e={:?} j={}", code, e, j);
                    }
                }
            }
        }
    }

    #[test]
    fn intertwiner_without_multiplicity_is_identity() {
        let rs = RootSystem::from_code("G2").unwrap();
        let k = Multiplicity::uniform(&rs, Q::zero()).unwrap();
        let vop = build_intertwiner(&rs, &k, 3).unwrap();
        for m in 0..=3u32 {
            for e in monomials_of_degree(2, m) {
                let xe = MultiPoly::monomial(e, Q::one());
                assert_eq!(vop.apply(&xe).unwrap(), xe);
            }
        }
    }

    #[test]
    fn kernel_series_rank_one_frozen() {
        let rs = a1();
        let k = Multiplicity::uniform(&rs, qr(1, 2)).unwrap();
        // First argument 1 in the doubled coordinate = 1/2 in simple-root
        // coordinates.
        let series = expw(&rs, &k, &Point(vec![qr(1, 2)]), 3).unwrap();
        assert_eq!(series.h[0], MultiPoly::one(1));
        assert_eq!(series.h[1], MultiPoly::var(1, 0));
        assert_eq!(series.h[2], MultiPoly::var(1, 0).pow(2));
        assert_eq!(series.h[3], MultiPoly::var(1, 0).pow(3).scale(&qr(1, 2)));
    }

    #[test]
    fn kernel_series_without_multiplicity_is_the_exponential() {
        let rs = RootSystem::from_code("A2").unwrap();
        let k = Multiplicity::uniform(&rs, Q::zero()).unwrap();
        let x = Point(vec![qr(2, 3), qr(1, 3)]);
        let series = expw(&rs, &k, &x, 5).unwrap();
        let lin = MultiPoly::linear_form(&rs, &x.0);
        for m in 0..=5u32 {
            let want = lin.pow(m).scale(&(Q::one() / exponent_factorial(&[m])));
            assert_eq!(series.h[m as usize], want, "m={}", m);
        }
    }

    #[test]
    fn kernel_matches_bessel_composition() {
        // Truncated kernel against the independent convergent series:
        // value = j_{k-1/2}(i t) + t/(2k+1) j_{k+1/2}(i t) with t the product
        // of the doubled coordinates.
        let rs = a1();
        for (knum, kden) in [(1i64, 2i64), (1, 1), (2, 1)] {
            let kq = qr(knum, kden);
            let k = Multiplicity::uniform(&rs, kq.clone()).unwrap();
            let series = expw(&rs, &k, &Point(vec![qr(1, 2)]), 30).unwrap();
            for t in [0.5, 1.0, 2.0] {
                let z = ComplexPoint::real(vec![t / 2.0]);
                let (value, tail) = series.eval(&z);
                let alpha_low = &kq - qr(1, 2);
                let alpha_high = &kq + qr(1, 2);
                let it = Complex64::new(0.0, t);
                let want = bessel_j(&alpha_low, it).unwrap()
                    + bessel_j(&alpha_high, it).unwrap() * t / (2.0 * q_to_f64(&kq) + 1.0);
                assert!(
                    (value - want).norm() < 1e-12,
                    "k={} t={} got {} want {}",
                    kq,
                    t,
                    value,
                    want
                );
                assert!(tail < 1e-12);
            }
        }

        // Frozen spot value at k = 1/2, both arguments 1.
        let k = Multiplicity::uniform(&rs, qr(1, 2)).unwrap();
        let series = expw(&rs, &k, &Point(vec![qr(1, 2)]), 30).unwrap();
        let (value, _) = series.eval(&ComplexPoint::real(vec![0.5]));
        assert!((value.re - 1.8312249817444935).abs() < 1e-12);
    }

    #[test]
    fn weyl_average_matches_rank_one_bessel() {
        let rs = a1();
        for (knum, kden) in [(1i64, 2i64), (1, 1)] {
            let kq = qr(knum, kden);
            let k = Multiplicity::uniform(&rs, kq.clone()).unwrap();
            let series = expw(&rs, &k, &Point(vec![qr(1, 2)]), 30).unwrap();
            for t in [0.5, 1.0, 2.0] {
                let (value, _) = bessel_jw_with(&rs, &series, &ComplexPoint::real(vec![t / 2.0]));
                let want = crate::rankone::bessel_limit_rank_one(&kq, 1.0, t).unwrap();
                assert!(
                    (value.re - want).abs() < 1e-12,
                    "k={} t={} got {} want {}",
                    kq,
                    t,
                    value.re,
                    want
                );
                assert!(value.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn moments_rank_one_frozen() {
        let rs = a1();
        let k = Multiplicity::uniform(&rs, qr(1, 2)).unwrap();
        let vop = build_intertwiner(&rs, &k, 3).unwrap();
        // lambda = 1 and z = 1 in the doubled coordinate.
        let x = Point(vec![qr(1, 2)]);
        let z = Point(vec![qr(1, 2)]);
        // <lambda, z> = 1, so the moments are 1/(1+2k), 1/(1+2k),
        // 3/((1+2k)(3+2k)).
        assert_eq!(v_moment_with(&rs, &vop, &x, &z, 0).unwrap(), Q::one());
        assert_eq!(v_moment_with(&rs, &vop, &x, &z, 1).unwrap(), qr(1, 2));
        assert_eq!(v_moment_with(&rs, &vop, &x, &z, 2).unwrap(), qr(1, 2));
        assert_eq!(v_moment_with(&rs, &vop, &x, &z, 3).unwrap(), qr(3, 8));
        // Scaling z doubles per degree.
        let z2 = Point(vec![Q::one()]);
        assert_eq!(v_moment_with(&rs, &vop, &x, &z2, 2).unwrap(), qi(2));

        // Fresh-table entry point agrees with the precomputed table.
        assert_eq!(v_moment(&rs, &k, &x, &z, 3).unwrap(), qr(3, 8));
    }

    #[test]
    fn kernel_is_symmetric_in_its_arguments() {
        let rs = RootSystem::from_code("A2").unwrap();
        let k = Multiplicity::uniform(&rs, qr(1, 2)).unwrap();
        let x = Point(vec![qr(1, 2), qr(1, 3)]);
        let y = Point(vec![qr(1, 4), qr(1, 2)]);
        let (a, ta) = expw_truncated(&rs, &k, &x, &ComplexPoint::from_point(&y), 16).unwrap();
        let (b, tb) = expw_truncated(&rs, &k, &y, &ComplexPoint::from_point(&x), 16).unwrap();
        assert!(
            (a - b).norm() < 1e-10 + ta + tb,
            "kernel asymmetry {} vs {}",
            a,
            b
        );
    }
}
