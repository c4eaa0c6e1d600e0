//! Sparse exact polynomial structures.
//!
//! Two kinds of object live here:
//!
//! * [`TrigPoly`] — finite sums `sum_nu a_nu e^nu` over the weight lattice,
//!   the carrier for eigenpolynomials.  Multiplication adds weights.
//! * [`MultiPoly`] — polynomials on the ambient space in its simple-root
//!   coordinates, the carrier for rational Dunkl calculus.
//!
//! Both keep their coefficients in `BTreeMap`s so iteration order, equality,
//! and serialization are canonical.  Coefficients are exact rationals; the
//! only floating point is in the evaluation methods, which take a complex
//! point and never feed anything back.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{EngineError, Result};
use crate::linalg;
use crate::rat::{q_to_f64, qi, Q};
use crate::rootsys::{Point, Root, RootSystem, Weight, WeylElement};

/// Real part beyond which `exp` leaves f64 range.
const EXP_OVERFLOW_RE: f64 = 709.0;

/// A point of the complexified ambient space, simple-root coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPoint {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexPoint {
    pub fn new(re: Vec<f64>, im: Vec<f64>) -> Self {
        assert_eq!(re.len(), im.len(), "mismatched component lengths");
        ComplexPoint { re, im }
    }

    pub fn real(re: Vec<f64>) -> Self {
        let im = vec![0.0; re.len()];
        ComplexPoint { re, im }
    }

    pub fn from_point(p: &Point) -> Self {
        ComplexPoint::real(p.0.iter().map(q_to_f64).collect())
    }

    pub fn rank(&self) -> usize {
        self.re.len()
    }

    pub fn component(&self, i: usize) -> Complex64 {
        Complex64::new(self.re[i], self.im[i])
    }

    pub fn scale(&self, s: f64) -> ComplexPoint {
        ComplexPoint {
            re: self.re.iter().map(|x| x * s).collect(),
            im: self.im.iter().map(|x| x * s).collect(),
        }
    }

    /// Image under an integer matrix acting on simple-root coordinates.
    pub fn apply_int_matrix(&self, m: &[Vec<i64>]) -> ComplexPoint {
        let act = |v: &[f64]| -> Vec<f64> {
            m.iter()
                .map(|row| row.iter().zip(v).map(|(&a, &x)| a as f64 * x).sum())
                .collect()
        };
        ComplexPoint {
            re: act(&self.re),
            im: act(&self.im),
        }
    }
}

/// A finite exponential sum `sum a_nu e^nu` with exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrigPoly {
    terms: BTreeMap<Weight, Q>,
}

impl TrigPoly {
    pub fn zero() -> Self {
        TrigPoly::default()
    }

    pub fn exponential(nu: Weight) -> Self {
        let mut t = TrigPoly::zero();
        t.add_term(nu, Q::one());
        t
    }

    pub fn constant(rank: usize, c: Q) -> Self {
        let mut t = TrigPoly::zero();
        t.add_term(Weight::zero(rank), c);
        t
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Weight, &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, nu: &Weight) -> Q {
        self.terms.get(nu).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, nu: Weight, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(nu) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let mut out = self.clone();
        for (nu, c) in &other.terms {
            out.add_term(nu.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &TrigPoly) -> TrigPoly {
        let mut out = self.clone();
        for (nu, c) in &other.terms {
            out.add_term(nu.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Q) -> TrigPoly {
        if s.is_zero() {
            return TrigPoly::zero();
        }
        TrigPoly {
            terms: self
                .terms
                .iter()
                .map(|(nu, c)| (nu.clone(), c * s))
                .collect(),
        }
    }

    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        let mut out = TrigPoly::zero();
        for (nu, a) in &self.terms {
            for (mu, b) in &other.terms {
                out.add_term(nu.add(mu), a * b);
            }
        }
        out
    }

    /// Push every exponent through a Weyl element: `e^nu -> e^{w nu}`, which
    /// realizes `f(z) -> f(w^{-1} z)`.
    pub fn map_weights(&self, w: &WeylElement) -> TrigPoly {
        let mut out = TrigPoly::zero();
        for (nu, c) in &self.terms {
            out.add_term(w.apply_weight(nu), c.clone());
        }
        out
    }

    /// Exact value at the origin: the plain sum of coefficients.
    pub fn sum_coeffs(&self) -> Q {
        self.terms
            .values()
            .fold(Q::zero(), |acc, c| acc + c)
    }

    /// Evaluate at a complex point (simple-root coordinates).  Errors when
    /// some `exp(<nu, z>)` leaves f64 range.
    pub fn eval(&self, rs: &RootSystem, z: &ComplexPoint) -> Result<Complex64> {
        let rank = rs.rank;
        assert_eq!(z.rank(), rank, "point rank mismatch");
        // <nu, z> = nu_sr . (B z); form B z once.
        let bz: Vec<Complex64> = (0..rank)
            .map(|i| {
                (0..rank)
                    .map(|j| q_to_f64(&rs.gram[i][j]) * z.component(j))
                    .sum()
            })
            .collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for (nu, c) in &self.terms {
            let nu_sr = rs.weight_point(nu);
            let mut pairing = Complex64::new(0.0, 0.0);
            for i in 0..rank {
                pairing += q_to_f64(&nu_sr.0[i]) * bz[i];
            }
            if pairing.re.abs() > EXP_OVERFLOW_RE {
                return Err(EngineError::EvalOverflow { re: pairing.re });
            }
            acc += q_to_f64(c) * pairing.exp();
        }
        Ok(acc)
    }
}

/// A sparse polynomial in the simple-root coordinates of the ambient space.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MultiPoly {
    terms: BTreeMap<Vec<u32>, Q>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly::default()
    }

    pub fn constant(rank: usize, c: Q) -> Self {
        let mut p = MultiPoly::zero();
        p.add_term(vec![0; rank], c);
        p
    }

    pub fn one(rank: usize) -> Self {
        MultiPoly::constant(rank, Q::one())
    }

    /// The coordinate function `x_i`.
    pub fn var(rank: usize, i: usize) -> Self {
        let mut e = vec![0u32; rank];
        e[i] = 1;
        let mut p = MultiPoly::zero();
        p.add_term(e, Q::one());
        p
    }

    pub fn monomial(expts: Vec<u32>, c: Q) -> Self {
        let mut p = MultiPoly::zero();
        p.add_term(expts, c);
        p
    }

    /// The linear form `x -> <v, x>` for a rational vector `v` (simple-root
    /// coordinates); its coefficients are the entries of `B v`.
    pub fn linear_form(rs: &RootSystem, v: &[Q]) -> Self {
        let bv = linalg::mat_vec(&rs.gram, v);
        let mut p = MultiPoly::zero();
        for (i, c) in bv.into_iter().enumerate() {
            let mut e = vec![0u32; rs.rank];
            e[i] = 1;
            p.add_term(e, c);
        }
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Q)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, e: &[u32]) -> Q {
        self.terms.get(e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, e: Vec<u32>, c: Q) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(entry) => {
                entry.insert(c);
            }
            Entry::Occupied(mut entry) => {
                let sum = entry.get() + &c;
                if sum.is_zero() {
                    entry.remove();
                } else {
                    *entry.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Q) -> MultiPoly {
        if s.is_zero() {
            return MultiPoly::zero();
        }
        MultiPoly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c * s))
                .collect(),
        }
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> MultiPoly {
        let rank = self.terms.keys().next().map_or(0, |e| e.len());
        let mut acc = MultiPoly::one(rank.max(1));
        if self.is_zero() && n > 0 {
            return MultiPoly::zero();
        }
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum())
            .max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degrees = self
            .terms
            .keys()
            .map(|e| e.iter().map(|&x| x as usize).sum::<usize>());
        match degrees.next() {
            None => true,
            Some(d0) => degrees.all(|d| d == d0),
        }
    }

    pub fn homogeneous_component(&self, d: usize) -> MultiPoly {
        MultiPoly {
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.iter().map(|&x| x as usize).sum::<usize>() == d)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect(),
        }
    }

    /// Partial derivative in coordinate `i`.
    pub fn partial(&self, i: usize) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[i] -= 1;
            out.add_term(e2, c * qi(e[i] as i64));
        }
        out
    }

    /// Directional derivative along a rational vector (simple-root coords).
    pub fn dir_derivative(&self, u: &[Q]) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (i, ui) in u.iter().enumerate() {
            if !ui.is_zero() {
                out = out.add(&self.partial(i).scale(ui));
            }
        }
        out
    }

    /// Composition with an integer matrix: `p(x) -> p(M x)`.
    pub fn compose_int_matrix(&self, m: &[Vec<i64>]) -> MultiPoly {
        let rank = m.len();
        // (M x)_i as linear polynomials, powers cached per variable.
        let lins: Vec<MultiPoly> = (0..rank)
            .map(|i| {
                let mut p = MultiPoly::zero();
                for j in 0..rank {
                    if m[i][j] != 0 {
                        let mut e = vec![0u32; rank];
                        e[j] = 1;
                        p.add_term(e, qi(m[i][j]));
                    }
                }
                p
            })
            .collect();
        let max_pow: Vec<u32> = (0..rank)
            .map(|i| self.terms.keys().map(|e| e[i]).max().unwrap_or(0))
            .collect();
        let mut powers: Vec<Vec<MultiPoly>> = Vec::with_capacity(rank);
        for i in 0..rank {
            let mut ps = vec![MultiPoly::one(rank)];
            for n in 1..=max_pow[i] {
                let next = ps[(n - 1) as usize].mul(&lins[i]);
                ps.push(next);
            }
            powers.push(ps);
        }
        let mut out = MultiPoly::zero();
        for (e, c) in &self.terms {
            let mut term = MultiPoly::constant(rank, c.clone());
            for (i, &ei) in e.iter().enumerate() {
                if ei > 0 {
                    term = term.mul(&powers[i][ei as usize]);
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// `p(sigma_alpha x)` for a (positive) root's reflection.
    pub fn reflect(&self, rs: &RootSystem, root: &Root) -> MultiPoly {
        self.compose_int_matrix(&reflection_matrix(rs, root))
    }

    /// Exact evaluation at a rational point.
    pub fn eval_point(&self, x: &[Q]) -> Q {
        let mut acc = Q::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (i, &ei) in e.iter().enumerate() {
                for _ in 0..ei {
                    term *= &x[i];
                }
            }
            acc += term;
        }
        acc
    }

    /// Float evaluation at a complex point.
    pub fn eval_complex(&self, z: &ComplexPoint) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut term = Complex64::new(q_to_f64(c), 0.0);
            for (i, &ei) in e.iter().enumerate() {
                if ei > 0 {
                    term *= z.component(i).powu(ei);
                }
            }
            acc += term;
        }
        acc
    }
}

/// Integer reflection matrix of a root, acting on simple-root coordinates.
pub fn reflection_matrix(rs: &RootSystem, root: &Root) -> Vec<Vec<i64>> {
    // sigma_alpha x = x - <x, alpha^v> alpha; columns are images of basis vectors.
    let rank = rs.rank;
    let a: Vec<Q> = root.coords.iter().map(|&c| qi(c)).collect();
    let ba = linalg::mat_vec(&rs.gram, &a);
    let mut m = vec![vec![0i64; rank]; rank];
    for j in 0..rank {
        // image of alpha_j: e_j - (2 <alpha_j, alpha> / <alpha,alpha>) a
        let factor = qi(2) * &ba[j] / &root.len2;
        for i in 0..rank {
            let mut entry = if i == j { Q::one() } else { Q::zero() };
            entry -= &factor * &a[i];
            m[i][j] = crate::rat::to_i64(&entry)
                .expect("crystallographic reflections are integral on the root lattice");
        }
    }
    m
}

/// The divided difference `(p - sigma_alpha p) / <alpha, .>`, exact.
///
/// Divisibility of the numerator by the root's linear form is a theorem;
/// a nonzero remainder therefore flags a coordinate-system bug and is a hard
/// failure, never a rounding concern.
pub fn divided_difference(rs: &RootSystem, root: &Root, p: &MultiPoly) -> Result<MultiPoly> {
    let numerator = p.sub(&p.reflect(rs, root));
    if numerator.is_zero() {
        return Ok(MultiPoly::zero());
    }
    let ell = MultiPoly::linear_form(
        rs,
        &root.coords.iter().map(|&c| qi(c)).collect::<Vec<Q>>(),
    );
    divide_by_linear(&numerator, &ell).ok_or_else(|| {
        EngineError::Internal(format!(
            "divided difference has nonzero remainder for root {:?}",
            root.coords
        ))
    })
}

/// Exact division by a linear form; `None` when a remainder survives.
fn divide_by_linear(p: &MultiPoly, ell: &MultiPoly) -> Option<MultiPoly> {
    // Pivot on the first variable appearing in the form.
    let (pivot_e, pivot_c) = ell
        .terms()
        .find(|(e, _)| e.iter().sum::<u32>() == 1)
        .expect("linear form has a degree-one term");
    let j = pivot_e.iter().position(|&x| x == 1).unwrap();
    let cj = pivot_c.clone();

    let mut rem = p.clone();
    let mut quot = MultiPoly::zero();
    loop {
        // Largest exponent in the pivot variable still present.
        let Some((e, c)) = rem
            .terms
            .iter()
            .filter(|(e, _)| e[j] > 0)
            .max_by_key(|(e, _)| (e[j], (*e).clone()))
            .map(|(e, c)| (e.clone(), c.clone()))
        else {
            break;
        };
        let mut qe = e.clone();
        qe[j] -= 1;
        let qc = c / &cj;
        quot.add_term(qe.clone(), qc.clone());
        // rem -= (qc * x^qe) * ell
        for (le, lc) in ell.terms() {
            let me: Vec<u32> = qe.iter().zip(le).map(|(a, b)| a + b).collect();
            rem.add_term(me, -(&qc * lc));
        }
    }
    if rem.is_zero() {
        Some(quot)
    } else {
        None
    }
}
