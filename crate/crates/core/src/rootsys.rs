//! Crystallographic root systems, their Weyl groups, and the weight
//! combinatorics the operator modules build on.
//!
//! Coordinates are fixed once and for all:
//!
//! * weights live in the fundamental-weight basis as integer vectors,
//! * points of the ambient space (roots included) live in the simple-root
//!   basis as rational vectors,
//! * every inner product goes through the rational Gram matrix
//!   `B[i][j] = <alpha_i, alpha_j>` of the simple roots.
//!
//! Normalization: short roots have squared length 2, except for the rank-one
//! system where the unique positive root has squared length 4 (so the weight
//! lattice is the usual integers and exponentials read `e^{n z}` with `n` an
//! integer).  Weyl group elements are stored as integer matrices in both
//! bases; the group is enumerated by breadth-first closure over the simple
//! reflections and capped at order 1152.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{EngineError, Result};
use crate::linalg::{self, imat_identity, imat_mul, imat_vec_i64, QMat};
use crate::rat::{qi, to_i64, Q};

pub const WEYL_ORDER_CAP: usize = 1152;

/// Default ceiling on downset enumeration.
pub const DEFAULT_DOWNSET_LIMIT: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    A,
    B,
    C,
    D,
    G,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Family::A => 'A',
            Family::B => 'B',
            Family::C => 'C',
            Family::D => 'D',
            Family::G => 'G',
        };
        write!(f, "{c}")
    }
}

/// Display `[a, b, ...]` for coordinate newtypes.
macro_rules! fmt_vec_display {
    () => {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write!(f, "[")?;
            for (i, c) in self.0.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{c}")?;
            }
            write!(f, "]")
        }
    };
}

/// A weight lattice element in fundamental-weight coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(pub Vec<i64>);

impl Weight {
    pub fn zero(rank: usize) -> Self {
        Weight(vec![0; rank])
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &Weight) -> Weight {
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Weight) -> Weight {
        Weight(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, n: i64) -> Weight {
        Weight(self.0.iter().map(|a| a * n).collect())
    }

    pub fn neg(&self) -> Weight {
        self.scale(-1)
    }
}

impl fmt::Display for Weight {
    fmt_vec_display!();
}

/// A rational point of the ambient space in simple-root coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point(pub Vec<Q>);

impl Point {
    pub fn zero(rank: usize) -> Self {
        Point(vec![Q::zero(); rank])
    }

    pub fn scale(&self, s: &Q) -> Point {
        Point(self.0.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl fmt::Display for Point {
    fmt_vec_display!();
}

/// A positive root with everything the operator modules ask about it.
#[derive(Debug, Clone)]
pub struct Root {
    /// Simple-root coordinates (integers for a crystallographic system).
    pub coords: Vec<i64>,
    /// Fundamental-weight coordinates, i.e. `<alpha, alpha_j^v>` per j.
    pub fund: Vec<i64>,
    /// Squared length.
    pub len2: Q,
    /// Length-orbit index, shortest orbit first.
    pub orbit: usize,
}

/// A Weyl group element as integer matrices in both coordinate systems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeylElement {
    /// Action on simple-root coordinates.
    pub mat_sr: Vec<Vec<i64>>,
    /// Action on fundamental-weight coordinates.
    pub mat_fund: Vec<Vec<i64>>,
    /// Reduced-ish word in the simple generators (left-to-right application order).
    pub word: Vec<usize>,
}

impl WeylElement {
    pub fn identity(rank: usize) -> Self {
        WeylElement {
            mat_sr: imat_identity(rank),
            mat_fund: imat_identity(rank),
            word: Vec::new(),
        }
    }

    pub fn apply_weight(&self, w: &Weight) -> Weight {
        Weight(imat_vec_i64(&self.mat_fund, &w.0))
    }

    pub fn apply_point(&self, p: &Point) -> Point {
        Point(linalg::imat_vec_q(&self.mat_sr, &p.0))
    }
}

/// One nonnegative rational multiplicity value per root-length orbit,
/// shortest orbit first; such a function is exactly a Weyl-invariant
/// assignment `alpha -> k_alpha`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multiplicity {
    per_orbit: Vec<Q>,
}

impl Multiplicity {
    pub fn uniform(rs: &RootSystem, k: Q) -> Result<Self> {
        Multiplicity::per_orbit(rs, vec![k; rs.orbit_count])
    }

    pub fn per_orbit(rs: &RootSystem, values: Vec<Q>) -> Result<Self> {
        if values.len() != rs.orbit_count {
            return Err(EngineError::InvalidArgument(format!(
                "{} multiplicity values given, root system {} has {} length orbits",
                values.len(),
                rs.code(),
                rs.orbit_count
            )));
        }
        if values.iter().any(|v| v.is_negative()) {
            return Err(EngineError::InvalidArgument(
                "multiplicity values must be nonnegative".into(),
            ));
        }
        Ok(Multiplicity { per_orbit: values })
    }

    pub fn value(&self, orbit: usize) -> &Q {
        &self.per_orbit[orbit]
    }

    pub fn values(&self) -> &[Q] {
        &self.per_orbit
    }

    pub fn is_zero(&self) -> bool {
        self.per_orbit.iter().all(|v| v.is_zero())
    }
}

/// The spectral vector attached to a weight: a rational point of the ambient
/// space whose pairings drive the triangular eigen-solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralVector(pub Point);

/// An irreducible crystallographic root system with precomputed Weyl group.
#[derive(Debug, Clone)]
pub struct RootSystem {
    pub family: Family,
    pub rank: usize,
    /// Gram matrix of the simple roots.
    pub gram: QMat,
    /// Cartan pairings `cartan[i][j] = <alpha_j, alpha_i^v>`.
    pub cartan: Vec<Vec<i64>>,
    /// Fundamental-weight to simple-root change of basis (columns are the
    /// fundamental weights).
    pub fund_to_sr: QMat,
    /// Inverse of `fund_to_sr`.
    pub sr_to_fund: QMat,
    pub positive_roots: Vec<Root>,
    /// Number of root-length orbits (1 or 2 for the supported families).
    pub orbit_count: usize,
    pub weyl: Vec<WeylElement>,
    /// Indices of the simple reflections inside `weyl`.
    pub simple: Vec<usize>,
}

fn family_gram(family: Family, rank: usize) -> Result<QMat> {
    let bad = || {
        Err(EngineError::UnsupportedRootSystem(format!(
            "{family}{rank}"
        )))
    };
    let mut g = vec![vec![Q::zero(); rank]; rank];
    match family {
        Family::A => {
            if rank == 0 {
                return bad();
            }
            if rank == 1 {
                // Rank one uses the halved-root convention: the single
                // positive root has squared length 4 so that the weight
                // lattice is Z and pairings with points read n*z.
                g[0][0] = qi(4);
                return Ok(g);
            }
            for i in 0..rank {
                g[i][i] = qi(2);
                if i + 1 < rank {
                    g[i][i + 1] = qi(-1);
                    g[i + 1][i] = qi(-1);
                }
            }
        }
        Family::B => {
            if rank < 2 {
                return bad();
            }
            // alpha_1..alpha_{r-1} long (len^2 = 4), alpha_r short (len^2 = 2).
            for i in 0..rank {
                g[i][i] = if i + 1 == rank { qi(2) } else { qi(4) };
                if i + 1 < rank {
                    g[i][i + 1] = qi(-2);
                    g[i + 1][i] = qi(-2);
                }
            }
        }
        Family::C => {
            if rank < 2 {
                return bad();
            }
            // alpha_1..alpha_{r-1} short (len^2 = 2), alpha_r long (len^2 = 4).
            for i in 0..rank {
                g[i][i] = if i + 1 == rank { qi(4) } else { qi(2) };
                if i + 2 < rank {
                    g[i][i + 1] = qi(-1);
                    g[i + 1][i] = qi(-1);
                }
            }
            if rank >= 2 {
                g[rank - 2][rank - 1] = qi(-2);
                g[rank - 1][rank - 2] = qi(-2);
            }
        }
        Family::D => {
            if rank < 4 {
                return bad();
            }
            for i in 0..rank {
                g[i][i] = qi(2);
            }
            for i in 0..rank - 2 {
                g[i][i + 1] = qi(-1);
                g[i + 1][i] = qi(-1);
            }
            g[rank - 3][rank - 1] = qi(-1);
            g[rank - 1][rank - 3] = qi(-1);
        }
        Family::G => {
            if rank != 2 {
                return bad();
            }
            g[0][0] = qi(2);
            g[1][1] = qi(6);
            g[0][1] = qi(-3);
            g[1][0] = qi(-3);
        }
    }
    Ok(g)
}

fn expected_weyl_order(family: Family, rank: usize) -> usize {
    let fact = |n: usize| (1..=n).product::<usize>();
    match family {
        Family::A => fact(rank + 1),
        Family::B | Family::C => (1 << rank) * fact(rank),
        Family::D => (1 << (rank - 1)) * fact(rank),
        Family::G => 12,
    }
}

fn expected_positive_count(family: Family, rank: usize) -> usize {
    match family {
        Family::A => rank * (rank + 1) / 2,
        Family::B | Family::C => rank * rank,
        Family::D => rank * (rank - 1),
        Family::G => 6,
    }
}

impl RootSystem {
    pub fn build(family: Family, rank: usize) -> Result<RootSystem> {
        let gram = family_gram(family, rank)?;

        let mut cartan = vec![vec![0i64; rank]; rank];
        for i in 0..rank {
            for j in 0..rank {
                let pairing = qi(2) * &gram[i][j] / &gram[i][i];
                cartan[i][j] = to_i64(&pairing)?;
            }
        }

        // fund_to_sr = B^{-1} D with D = diag(<alpha_i,alpha_i>/2); its
        // columns are the fundamental weights in simple-root coordinates.
        let gram_inv = linalg::invert(&gram)?;
        let mut fund_to_sr = vec![vec![Q::zero(); rank]; rank];
        for i in 0..rank {
            for j in 0..rank {
                fund_to_sr[i][j] = &gram_inv[i][j] * &gram[j][j] / qi(2);
            }
        }
        let sr_to_fund = linalg::invert(&fund_to_sr)?;

        // Simple reflections in both bases.
        let mut gen_sr = Vec::with_capacity(rank);
        let mut gen_fund = Vec::with_capacity(rank);
        for i in 0..rank {
            let mut s = imat_identity(rank);
            for j in 0..rank {
                s[i][j] -= cartan[i][j];
            }
            gen_sr.push(s);
            let mut f = imat_identity(rank);
            for j in 0..rank {
                f[j][i] -= cartan[j][i];
            }
            gen_fund.push(f);
        }

        // Breadth-first closure of the generator set.
        let mut weyl: Vec<WeylElement> = vec![WeylElement::identity(rank)];
        let mut index: HashMap<Vec<Vec<i64>>, usize> = HashMap::new();
        index.insert(weyl[0].mat_sr.clone(), 0);
        let mut queue: VecDeque<usize> = VecDeque::from([0]);
        while let Some(at) = queue.pop_front() {
            for i in 0..rank {
                let mat_sr = imat_mul(&gen_sr[i], &weyl[at].mat_sr);
                if index.contains_key(&mat_sr) {
                    continue;
                }
                if weyl.len() >= WEYL_ORDER_CAP {
                    return Err(EngineError::WeylTooLarge {
                        seen: weyl.len() + 1,
                        cap: WEYL_ORDER_CAP,
                    });
                }
                let mat_fund = imat_mul(&gen_fund[i], &weyl[at].mat_fund);
                let mut word = weyl[at].word.clone();
                word.push(i);
                index.insert(mat_sr.clone(), weyl.len());
                weyl.push(WeylElement {
                    mat_sr,
                    mat_fund,
                    word,
                });
                queue.push_back(weyl.len() - 1);
            }
        }
        let expected = expected_weyl_order(family, rank);
        if weyl.len() != expected {
            return Err(EngineError::Internal(format!(
                "Weyl closure produced {} elements, expected {}",
                weyl.len(),
                expected
            )));
        }
        let simple: Vec<usize> = gen_sr.iter().map(|g| index[g]).collect();

        // All roots are Weyl images of the simple roots; keep the positive half.
        let mut all_roots: BTreeSet<Vec<i64>> = BTreeSet::new();
        for w in &weyl {
            for i in 0..rank {
                let root: Vec<i64> = (0..rank).map(|r| w.mat_sr[r][i]).collect();
                all_roots.insert(root);
            }
        }
        let mut positive: Vec<Vec<i64>> = Vec::new();
        for r in &all_roots {
            let nonneg = r.iter().all(|&c| c >= 0);
            let nonpos = r.iter().all(|&c| c <= 0);
            if !(nonneg || nonpos) {
                return Err(EngineError::Internal(format!(
                    "root with mixed signs: {r:?}"
                )));
            }
            if nonneg {
                positive.push(r.clone());
            }
        }
        if positive.len() * 2 != all_roots.len()
            || positive.len() != expected_positive_count(family, rank)
        {
            return Err(EngineError::Internal(format!(
                "positive root count {} does not match the family count {}",
                positive.len(),
                expected_positive_count(family, rank)
            )));
        }
        positive.sort_by_key(|r| (r.iter().sum::<i64>(), r.clone()));

        let ip = |a: &[i64], b: &[i64]| -> Q {
            let mut acc = Q::zero();
            for (i, &ai) in a.iter().enumerate() {
                if ai == 0 {
                    continue;
                }
                for (j, &bj) in b.iter().enumerate() {
                    if bj != 0 {
                        acc += qi(ai) * &gram[i][j] * qi(bj);
                    }
                }
            }
            acc
        };
        let mut lengths: Vec<Q> = positive
            .iter()
            .map(|r| ip(r, r))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        lengths.sort();
        let orbit_count = lengths.len();

        let mut roots = Vec::with_capacity(positive.len());
        for coords in positive {
            let len2 = ip(&coords, &coords);
            let orbit = lengths.iter().position(|l| *l == len2).unwrap();
            let mut fund = Vec::with_capacity(rank);
            for j in 0..rank {
                let mut e_j = vec![0i64; rank];
                e_j[j] = 1;
                let pairing = qi(2) * ip(&coords, &e_j) / &gram[j][j];
                fund.push(to_i64(&pairing)?);
            }
            roots.push(Root {
                coords,
                fund,
                len2,
                orbit,
            });
        }

        Ok(RootSystem {
            family,
            rank,
            gram,
            cartan,
            fund_to_sr,
            sr_to_fund,
            positive_roots: roots,
            orbit_count,
            weyl,
            simple,
        })
    }

    /// Parse codes like "A2", "B3", "G2".
    pub fn from_code(code: &str) -> Result<RootSystem> {
        let code = code.trim();
        let mut chars = code.chars();
        let family = match chars.next() {
            Some('A') | Some('a') => Family::A,
            Some('B') | Some('b') => Family::B,
            Some('C') | Some('c') => Family::C,
            Some('D') | Some('d') => Family::D,
            Some('G') | Some('g') => Family::G,
            _ => return Err(EngineError::UnsupportedRootSystem(code.into())),
        };
        let rank: usize = chars
            .as_str()
            .parse()
            .map_err(|_| EngineError::UnsupportedRootSystem(code.into()))?;
        RootSystem::build(family, rank)
    }

    pub fn code(&self) -> String {
        format!("{}{}", self.family, self.rank)
    }

    pub fn weyl_order(&self) -> usize {
        self.weyl.len()
    }

    /// Gram inner product of two rational points.
    pub fn ip(&self, x: &[Q], y: &[Q]) -> Q {
        let mut acc = Q::zero();
        for (i, xi) in x.iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            let mut row = Q::zero();
            for (j, yj) in y.iter().enumerate() {
                if !yj.is_zero() {
                    row += &self.gram[i][j] * yj;
                }
            }
            acc += xi * row;
        }
        acc
    }

    /// Simple-root coordinates of a weight.
    pub fn weight_point(&self, w: &Weight) -> Point {
        let v: Vec<Q> = w.0.iter().map(|&c| qi(c)).collect();
        Point(linalg::mat_vec(&self.fund_to_sr, &v))
    }

    /// Fundamental-weight coordinates of a lattice point; errors when the
    /// point is not on the weight lattice.
    pub fn point_weight(&self, p: &Point) -> Result<Weight> {
        let v = linalg::mat_vec(&self.sr_to_fund, &p.0);
        let mut coords = Vec::with_capacity(v.len());
        for q in &v {
            coords.push(to_i64(q).map_err(|_| {
                EngineError::InvalidArgument(format!("{p} is not a weight"))
            })?);
        }
        Ok(Weight(coords))
    }

    /// The fundamental weight with index `i`, in simple-root coordinates.
    pub fn fundamental_weight(&self, i: usize) -> Point {
        Point(self.fund_to_sr.iter().map(|row| row[i].clone()).collect())
    }

    /// Integer pairing `<w, alpha^v>` of a weight with the coroot of a
    /// positive root.
    pub fn weight_coroot_pairing(&self, w: &Weight, root: &Root) -> i64 {
        // <w, alpha^v> = sum_j a_j (|alpha_j|^2 / |alpha|^2) c_j stays integral.
        let mut acc = Q::zero();
        for (j, &aj) in root.coords.iter().enumerate() {
            if aj != 0 && w.0[j] != 0 {
                acc += qi(aj) * &self.gram[j][j] * qi(w.0[j]);
            }
        }
        to_i64(&(acc / &root.len2)).expect("coroot pairing of a weight is integral")
    }

    /// Rational pairing `<x, alpha^v>` of a point with a coroot.
    pub fn point_coroot_pairing(&self, x: &Point, root: &Root) -> Q {
        let root_q: Vec<Q> = root.coords.iter().map(|&c| qi(c)).collect();
        qi(2) * self.ip(&x.0, &root_q) / &root.len2
    }

    fn simple_reflect_weight(&self, i: usize, w: &Weight) -> Weight {
        let ci = w.0[i];
        let mut out = w.0.clone();
        for j in 0..self.rank {
            out[j] -= ci * self.cartan[j][i];
        }
        Weight(out)
    }

    /// Dominant representative of a weight together with an element sending
    /// the weight to it.
    pub fn dominant_rep(&self, w: &Weight) -> (Weight, WeylElement) {
        let mut cur = w.clone();
        let mut elem = WeylElement::identity(self.rank);
        let cap = 8 * self.positive_roots.len() + 8;
        for _ in 0..cap {
            match (0..self.rank).find(|&i| cur.0[i] < 0) {
                None => return (cur, elem),
                Some(i) => {
                    cur = self.simple_reflect_weight(i, &cur);
                    let gen = &self.weyl[self.simple[i]];
                    elem = WeylElement {
                        mat_sr: imat_mul(&gen.mat_sr, &elem.mat_sr),
                        mat_fund: imat_mul(&gen.mat_fund, &elem.mat_fund),
                        word: {
                            let mut word = elem.word;
                            word.push(i);
                            word
                        },
                    };
                }
            }
        }
        unreachable!("dominant chamber reached within |R+| reflections");
    }

    /// Dominant representative of an arbitrary rational point.
    pub fn dominant_rep_point(&self, x: &Point) -> Point {
        let mut cur = x.clone();
        let cap = 16 * self.weyl.len() + 16;
        for _ in 0..cap {
            let mut moved = false;
            for i in 0..self.rank {
                // <cur, alpha_i^v> = 2 (B cur)_i / B_ii
                let mut bi = Q::zero();
                for (j, c) in cur.0.iter().enumerate() {
                    if !c.is_zero() {
                        bi += &self.gram[i][j] * c;
                    }
                }
                if bi.is_negative() {
                    let gen = &self.weyl[self.simple[i]];
                    cur = gen.apply_point(&cur);
                    moved = true;
                    break;
                }
            }
            if !moved {
                return cur;
            }
        }
        unreachable!("dominant chamber reached in finitely many reflections");
    }

    pub fn is_dominant(&self, w: &Weight) -> bool {
        w.0.iter().all(|&c| c >= 0)
    }

    /// Weyl orbit of a weight, sorted for determinism.
    pub fn orbit_weights(&self, w: &Weight) -> Vec<Weight> {
        let mut seen: BTreeSet<Weight> = BTreeSet::new();
        let mut queue = VecDeque::from([w.clone()]);
        seen.insert(w.clone());
        while let Some(cur) = queue.pop_front() {
            for i in 0..self.rank {
                let next = self.simple_reflect_weight(i, &cur);
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Weyl orbit of a rational point, sorted for determinism.
    pub fn orbit_points(&self, x: &Point) -> Vec<Point> {
        let mut seen: BTreeSet<Point> = BTreeSet::new();
        seen.insert(x.clone());
        let mut queue = VecDeque::from([x.clone()]);
        while let Some(cur) = queue.pop_front() {
            for i in 0..self.rank {
                let next = self.weyl[self.simple[i]].apply_point(&cur);
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
        seen.into_iter().collect()
    }

    /// Is `q` a nonnegative-integer combination of simple roots?  `q` is
    /// given in simple-root coordinates.
    fn in_positive_root_cone(&self, q: &[Q]) -> bool {
        q.iter().all(|c| c.is_integer() && !c.is_negative())
    }

    /// The ordering the eigen-solve is triangular against: `nu` precedes
    /// `lambda` iff they are equal, or `nu_+` lies strictly below `lambda_+`
    /// in dominance order, or both have the same dominant representative and
    /// `lambda` lies strictly below `nu` in dominance order (the order turns
    /// around inside an orbit).
    pub fn tri_leq(&self, nu: &Weight, lambda: &Weight) -> bool {
        if nu == lambda {
            return true;
        }
        let (nu_p, _) = self.dominant_rep(nu);
        let (la_p, _) = self.dominant_rep(lambda);
        if nu_p == la_p {
            let diff = self.weight_point(&nu.sub(lambda));
            return self.in_positive_root_cone(&diff.0);
        }
        let diff = self.weight_point(&la_p.sub(&nu_p));
        self.in_positive_root_cone(&diff.0)
    }

    /// All weights below `lambda` in the solve order, listed along a linear
    /// extension that puts `lambda` last.  Sort key: height of
    /// `lambda_+ - nu_+` descending, then the height functional of `nu`
    /// descending (a linear extension of reversed dominance inside each
    /// orbit), then coordinates lexicographically.
    pub fn downset(&self, lambda: &Weight, limit: usize) -> Result<Vec<Weight>> {
        let (la_p, _) = self.dominant_rep(lambda);
        let la_p_sr = self.weight_point(&la_p);

        // Bounding box: inside the orbit hull every simple-root coordinate is
        // at least the orbit-wide minimum of that coordinate.
        let orbit = self.orbit_points(&la_p_sr);
        let mut q_max: Vec<i64> = Vec::with_capacity(self.rank);
        for i in 0..self.rank {
            let min_i = orbit
                .iter()
                .map(|p| p.0[i].clone())
                .min()
                .expect("orbit is nonempty");
            let span = &la_p_sr.0[i] - min_i;
            q_max.push(span.floor().to_integer().try_into().map_err(|_| {
                EngineError::Internal("downset box exceeds i64".into())
            })?);
        }
        let volume: i128 = q_max.iter().map(|&m| m as i128 + 1).product();
        if volume > 50_000_000 {
            return Err(EngineError::DownsetOverflow {
                lambda: lambda.to_string(),
                limit,
            });
        }

        // Enumerate dominant mu = lambda_+ - q over the integer box.
        let mut dominants: Vec<Weight> = Vec::new();
        let mut q = vec![0i64; self.rank];
        'outer: loop {
            let mut mu = la_p.clone();
            for (i, &qi_) in q.iter().enumerate() {
                if qi_ != 0 {
                    for j in 0..self.rank {
                        mu.0[j] -= qi_ * self.cartan[j][i];
                    }
                }
            }
            if self.is_dominant(&mu) {
                dominants.push(mu);
            }
            // odometer increment
            for i in 0..self.rank {
                if q[i] < q_max[i] {
                    q[i] += 1;
                    continue 'outer;
                }
                q[i] = 0;
            }
            break;
        }

        let mut out: Vec<Weight> = Vec::new();
        for mu in &dominants {
            if *mu == la_p {
                for nu in self.orbit_weights(mu) {
                    // Same dominant representative: keep nu iff lambda is
                    // below nu in dominance order (or equal).
                    let diff = self.weight_point(&nu.sub(lambda));
                    if self.in_positive_root_cone(&diff.0) {
                        out.push(nu);
                    }
                }
            } else {
                out.extend(self.orbit_weights(mu));
            }
            if out.len() > limit {
                return Err(EngineError::DownsetOverflow {
                    lambda: lambda.to_string(),
                    limit,
                });
            }
        }

        let height = |p: &Point| -> Q {
            p.0.iter().fold(Q::zero(), |acc, c| acc + c)
        };
        let mut keyed: Vec<(Q, Q, Weight)> = out
            .into_iter()
            .map(|nu| {
                let (nu_p, _) = self.dominant_rep(&nu);
                let gap = height(&self.weight_point(&la_p.sub(&nu_p)));
                let h = height(&self.weight_point(&nu));
                (gap, h, nu)
            })
            .collect();
        keyed.sort_by(|a, b| {
            b.0.cmp(&a.0)
                .then_with(|| b.1.cmp(&a.1))
                .then_with(|| a.2.cmp(&b.2))
        });
        let sorted: Vec<Weight> = keyed.into_iter().map(|(_, _, nu)| nu).collect();
        if sorted.last() != Some(lambda) {
            return Err(EngineError::Internal(format!(
                "downset linear extension does not end at lambda={lambda}"
            )));
        }
        Ok(sorted)
    }

    /// Half the multiplicity-weighted sum of the positive roots.
    pub fn rho(&self, k: &Multiplicity) -> Point {
        let mut acc = vec![Q::zero(); self.rank];
        for root in &self.positive_roots {
            let ka = k.value(root.orbit);
            if ka.is_zero() {
                continue;
            }
            for (i, &c) in root.coords.iter().enumerate() {
                if c != 0 {
                    acc[i] += ka * qi(c);
                }
            }
        }
        Point(acc.into_iter().map(|c| c / qi(2)).collect())
    }

    /// The spectral vector `lambda~`: shift `lambda` by half the k-weighted
    /// sum of positive roots signed by which side of each root hyperplane the
    /// weight's coroot pairing falls on (pairing zero counts as negative).
    pub fn tilde(&self, k: &Multiplicity, lambda: &Weight) -> SpectralVector {
        let mut acc = self.weight_point(lambda).0;
        for root in &self.positive_roots {
            let ka = k.value(root.orbit);
            if ka.is_zero() {
                continue;
            }
            let m = self.weight_coroot_pairing(lambda, root);
            let sign = if m > 0 { qi(1) } else { qi(-1) };
            let f = ka * sign / qi(2);
            for (i, &c) in root.coords.iter().enumerate() {
                if c != 0 {
                    acc[i] += &f * qi(c);
                }
            }
        }
        SpectralVector(Point(acc))
    }

    /// Convex-hull membership `x in C(lambda)`, decided twice over: once by
    /// the dual-cone test `lambda_+ - x_+ in C*` (checked against the
    /// fundamental-weight generators of the dominant chamber), once by exact
    /// LP feasibility of a convex combination over the orbit.  Disagreement
    /// is a hard failure.
    pub fn hull_contains(&self, lambda: &Weight, x: &Point) -> Result<bool> {
        let (la_p, _) = self.dominant_rep(lambda);
        let la_p_sr = self.weight_point(&la_p);
        let x_p = self.dominant_rep_point(x);
        let gap = la_p_sr.sub(&x_p);
        let mut dual = true;
        for i in 0..self.rank {
            let omega = self.fundamental_weight(i);
            if self.ip(&gap.0, &omega.0).is_negative() {
                dual = false;
                break;
            }
        }

        let orbit = self.orbit_points(&la_p_sr);
        let mut columns: Vec<Vec<Q>> = Vec::with_capacity(orbit.len());
        for p in &orbit {
            let mut col = p.0.clone();
            col.push(Q::one());
            columns.push(col);
        }
        let mut target = x.0.clone();
        target.push(Q::one());
        let lp = linalg::nonneg_combination_exists(&columns, &target);

        if dual != lp {
            return Err(EngineError::Internal(format!(
                "hull membership of {x} in C({lambda}) disagrees: dual-cone {dual}, LP {lp}"
            )));
        }
        Ok(dual)
    }
}
