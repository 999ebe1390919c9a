//! Simplicial cohomology with integer or rational coefficients.
//!
//! A presentation of `H^k` is read off two Smith normal forms. With
//! `U δ_{k-1} V = D` of rank `r`, the coordinates `y = U z` split a cocycle
//! `z` into a head (`y_i`, `i < r`, meaningful mod `d_i`) and a tail
//! (`y_i`, `i ≥ r`, which coboundaries never touch). The cocycle condition
//! cuts a lattice `L` out of the tail; a second SNF gives `L` a basis, and
//! the tail's coefficients in that basis are the free coordinates.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::complex::{Complex, ComplexError, SimplicialMap};
use crate::intlinalg::{
    integer_kernel, rational_rank, smith_normal_form, Int, IntMatrix, Rat, RatMatrix, SmithDecomposition,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CohomologyError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cochain of degree {0} is not closed")]
    NotClosed(usize),
    #[error("classes belong to different presentations")]
    IncomparableClasses,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionError { expected: usize, found: usize },
}

impl From<ComplexError> for CohomologyError {
    fn from(e: ComplexError) -> Self {
        CohomologyError::InvalidParameter(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ring {
    Z,
    Q,
}

/// Simplicial coboundary of a `k`-cochain, computed from the face tables.
pub fn coboundary<R>(k: &Complex, deg: usize, z: &[R]) -> Vec<R>
where
    R: Clone + Zero + std::ops::Sub<Output = R>,
{
    (0..k.count(deg + 1))
        .map(|i| {
            let mut acc = R::zero();
            for (j, &f) in k.faces(deg + 1, i).iter().enumerate() {
                if j % 2 == 0 {
                    acc = acc + z[f].clone();
                } else {
                    acc = acc - z[f].clone();
                }
            }
            acc
        })
        .collect()
}

/// Simplicial boundary of an integer `k`-chain.
pub fn boundary(k: &Complex, deg: usize, c: &[Int]) -> Vec<Int> {
    let mut out = vec![Int::zero(); if deg == 0 { 0 } else { k.count(deg - 1) }];
    if deg == 0 {
        return out;
    }
    for (i, x) in c.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, &f) in k.faces(deg, i).iter().enumerate() {
            if j % 2 == 0 {
                out[f] += x;
            } else {
                out[f] -= x;
            }
        }
    }
    out
}

/// SNF of the coboundary `C^deg -> C^{deg+1}`, cached on the complex.
pub(crate) fn coboundary_snf(k: &Complex, deg: usize) -> Arc<SmithDecomposition> {
    k.caches.coboundary_snf[deg]
        .get_or_init(|| Arc::new(smith_normal_form(&k.coboundary_matrix(deg))))
        .clone()
}

#[derive(Debug, Clone)]
pub struct GroupPresentation {
    degree: usize,
    ring: Ring,
    fingerprint: u64,
    free_rank: usize,
    torsion: Vec<Int>,
    /// Number of `k`-simplices.
    n: usize,
    /// Rank of `δ_{k-1}`.
    r: usize,
    u: IntMatrix,
    u_inv: IntMatrix,
    /// `(row, d)` for head rows with invariant factor `d > 1`.
    torsion_rows: Vec<(usize, Int)>,
    /// Tail coordinates → free coordinates.
    free_to: IntMatrix,
    /// Free coordinates → tail coordinates.
    free_from: IntMatrix,
}

impl GroupPresentation {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn torsion(&self) -> &[Int] {
        &self.torsion
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    fn same_group(&self, other: &GroupPresentation) -> bool {
        self.fingerprint == other.fingerprint && self.degree == other.degree && self.ring == other.ring
    }

    /// Representative cocycle for the given coordinates.
    pub fn from_coords(&self, free: &[Int], torsion: &[Int]) -> Result<Vec<Int>, CohomologyError> {
        if free.len() != self.free_rank {
            return Err(CohomologyError::DimensionError { expected: self.free_rank, found: free.len() });
        }
        let tors_len = if self.ring == Ring::Z { self.torsion.len() } else { 0 };
        if torsion.len() != tors_len {
            return Err(CohomologyError::DimensionError { expected: tors_len, found: torsion.len() });
        }
        let mut y = vec![Int::zero(); self.n];
        for ((row, d), t) in self.torsion_rows.iter().zip(torsion) {
            y[*row] = t.mod_floor(d);
        }
        let tail = self.free_from.mul_vec(free).expect("shape");
        for (i, t) in tail.into_iter().enumerate() {
            y[self.r + i] = t;
        }
        Ok(self.u_inv.mul_vec(&y).expect("shape"))
    }

    /// Representative cocycle of the `i`-th free generator.
    pub fn free_generator(&self, i: usize) -> Vec<Int> {
        let mut e = vec![Int::zero(); self.free_rank];
        e[i] = Int::one();
        let t = vec![Int::zero(); self.torsion.len()];
        self.from_coords(&e, &t).expect("shape")
    }

    /// Representative cocycle of the `i`-th torsion generator.
    pub fn torsion_generator(&self, i: usize) -> Vec<Int> {
        let mut t = vec![Int::zero(); self.torsion.len()];
        t[i] = Int::one();
        self.from_coords(&vec![Int::zero(); self.free_rank], &t).expect("shape")
    }

    /// Renders as `Z^r ⊕ Z/d1 ⊕ …` (or `Q^r`).
    pub fn describe(&self) -> String {
        let base = if self.ring == Ring::Z { "Z" } else { "Q" };
        let mut parts = Vec::new();
        if self.free_rank > 0 || self.torsion.is_empty() {
            parts.push(format!("{base}^{}", self.free_rank));
        }
        parts.extend(self.torsion.iter().map(|d| format!("Z/{d}")));
        parts.join(" ⊕ ")
    }
}

impl PartialEq for GroupPresentation {
    fn eq(&self, other: &Self) -> bool {
        self.same_group(other) && self.free_rank == other.free_rank && self.torsion == other.torsion
    }
}

/// Element of `H^k(K; ℤ)` in canonical coordinates.
#[derive(Debug, Clone)]
pub struct ClassHk {
    presentation: Arc<GroupPresentation>,
    free: Vec<Int>,
    torsion: Vec<Int>,
}

impl ClassHk {
    /// Builds a class from coordinates; torsion entries are reduced.
    pub fn new(presentation: Arc<GroupPresentation>, free: Vec<Int>, torsion: Vec<Int>) -> Result<Self, CohomologyError> {
        if presentation.ring != Ring::Z {
            return Err(CohomologyError::InvalidParameter("integer classes need a Z presentation".into()));
        }
        if free.len() != presentation.free_rank {
            return Err(CohomologyError::DimensionError { expected: presentation.free_rank, found: free.len() });
        }
        if torsion.len() != presentation.torsion.len() {
            return Err(CohomologyError::DimensionError {
                expected: presentation.torsion.len(),
                found: torsion.len(),
            });
        }
        let torsion = torsion.iter().zip(&presentation.torsion).map(|(t, d)| t.mod_floor(d)).collect();
        Ok(ClassHk { presentation, free, torsion })
    }

    pub fn zero(presentation: Arc<GroupPresentation>) -> Self {
        let (f, t) = (presentation.free_rank, presentation.torsion.len());
        ClassHk { presentation, free: vec![Int::zero(); f], torsion: vec![Int::zero(); t] }
    }

    pub fn presentation(&self) -> &Arc<GroupPresentation> {
        &self.presentation
    }

    pub fn free_coords(&self) -> &[Int] {
        &self.free
    }

    pub fn torsion_coords(&self) -> &[Int] {
        &self.torsion
    }

    pub fn is_zero(&self) -> bool {
        self.free.iter().all(Zero::is_zero) && self.torsion.iter().all(Zero::is_zero)
    }

    pub fn is_torsion(&self) -> bool {
        self.free.iter().all(Zero::is_zero)
    }

    pub fn representative(&self) -> Vec<Int> {
        self.presentation.from_coords(&self.free, &self.torsion).expect("consistent class")
    }

    pub fn add(&self, other: &ClassHk) -> Result<ClassHk, CohomologyError> {
        if !self.presentation.same_group(&other.presentation) {
            return Err(CohomologyError::IncomparableClasses);
        }
        let free = self.free.iter().zip(&other.free).map(|(a, b)| a + b).collect();
        let torsion = self.torsion.iter().zip(&other.torsion).map(|(a, b)| a + b).collect();
        ClassHk::new(self.presentation.clone(), free, torsion)
    }

    pub fn neg(&self) -> ClassHk {
        let free = self.free.iter().map(|a| -a).collect();
        let torsion = self.torsion.iter().map(|a| -a).collect();
        ClassHk::new(self.presentation.clone(), free, torsion).expect("same shape")
    }

    pub fn scale(&self, n: i64) -> ClassHk {
        let n = Int::from(n);
        let free = self.free.iter().map(|a| a * &n).collect();
        let torsion = self.torsion.iter().map(|a| a * &n).collect();
        ClassHk::new(self.presentation.clone(), free, torsion).expect("same shape")
    }

    /// Order in the group; `None` for classes of infinite order.
    pub fn order(&self) -> Option<Int> {
        if !self.is_torsion() {
            return None;
        }
        Some(self.torsion.iter().zip(&self.presentation.torsion).fold(Int::one(), |acc, (t, d)| {
            acc.lcm(&(d / t.gcd(d)))
        }))
    }
}

impl PartialEq for ClassHk {
    fn eq(&self, other: &Self) -> bool {
        self.presentation.same_group(&other.presentation) && self.free == other.free && self.torsion == other.torsion
    }
}

impl fmt::Display for ClassHk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let free: Vec<String> = self.free.iter().map(ToString::to_string).collect();
        let tors: Vec<String> =
            self.torsion.iter().zip(&self.presentation.torsion).map(|(t, d)| format!("{t} mod {d}")).collect();
        write!(f, "free=({}) torsion=({})", free.join(","), tors.join(","))
    }
}

fn integer_presentation(k: &Complex, degree: usize) -> GroupPresentation {
    let n = k.count(degree);
    let (r, u, u_inv, torsion_rows) = if degree == 0 {
        (0, IntMatrix::identity(n), IntMatrix::identity(n), Vec::new())
    } else {
        let snf = coboundary_snf(k, degree - 1);
        let rows: Vec<(usize, Int)> =
            snf.diagonal.iter().enumerate().filter(|(_, d)| !d.is_one()).map(|(i, d)| (i, d.clone())).collect();
        (snf.rank(), snf.u.clone(), snf.u_inv.clone(), rows)
    };
    // cocycle condition on the tail: δ_k · U_inv[:, r..]
    let cob = k.coboundary_matrix(degree);
    let mut tail_cols = IntMatrix::zeros(n, n - r);
    for i in 0..n {
        for j in r..n {
            tail_cols.set(i, j - r, u_inv.get(i, j).clone());
        }
    }
    let m = cob.mul(&tail_cols).expect("shape");
    let snf2 = smith_normal_form(&m);
    let r2 = snf2.rank();
    let f = (n - r) - r2;
    let mut free_to = IntMatrix::zeros(f, n - r);
    let mut free_from = IntMatrix::zeros(n - r, f);
    for a in 0..f {
        for b in 0..n - r {
            free_to.set(a, b, snf2.v_inv.get(r2 + a, b).clone());
            free_from.set(b, a, snf2.v.get(b, r2 + a).clone());
        }
    }
    GroupPresentation {
        degree,
        ring: Ring::Z,
        fingerprint: k.fingerprint(),
        free_rank: f,
        torsion: torsion_rows.iter().map(|(_, d)| d.clone()).collect(),
        n,
        r,
        u,
        u_inv,
        torsion_rows,
        free_to,
        free_from,
    }
}

/// Presentation of `H^degree(K; ring)`. Integer presentations are cached.
pub fn cohomology_group(k: &Complex, degree: usize, ring: Ring) -> Result<Arc<GroupPresentation>, CohomologyError> {
    if degree > k.dimension() {
        return Err(CohomologyError::InvalidParameter(format!(
            "degree {degree} exceeds dimension {}",
            k.dimension()
        )));
    }
    let z = presentation(k, degree);
    match ring {
        Ring::Z => Ok(z),
        Ring::Q => {
            // Betti number computed independently by rational ranks.
            let rank_of = |d: usize| rational_rank(&RatMatrix::from_int(&k.coboundary_matrix(d)));
            let below = if degree == 0 { 0 } else { rank_of(degree - 1) };
            let betti = k.count(degree) - below - rank_of(degree);
            assert_eq!(betti, z.free_rank, "rational and integral ranks disagree");
            let mut q = (*z).clone();
            q.ring = Ring::Q;
            q.torsion.clear();
            q.torsion_rows.clear();
            Ok(Arc::new(q))
        }
    }
}

/// Integer presentation in any degree up to `dimension + 3` (zero above the dimension).
pub(crate) fn presentation(k: &Complex, degree: usize) -> Arc<GroupPresentation> {
    k.caches.presentations[degree].get_or_init(|| Arc::new(integer_presentation(k, degree))).clone()
}

fn check_cocycle<R>(k: &Complex, deg: usize, z: &[R]) -> Result<(), CohomologyError>
where
    R: Clone + Zero + std::ops::Sub<Output = R>,
{
    if z.len() != k.count(deg) {
        return Err(CohomologyError::DimensionError { expected: k.count(deg), found: z.len() });
    }
    if coboundary(k, deg, z).iter().all(Zero::is_zero) {
        Ok(())
    } else {
        Err(CohomologyError::NotClosed(deg))
    }
}

/// Canonical coordinates of an integer cocycle.
pub fn class_coordinates(
    k: &Complex,
    z: &[Int],
    pres: &Arc<GroupPresentation>,
) -> Result<ClassHk, CohomologyError> {
    if pres.fingerprint != k.fingerprint() || pres.ring != Ring::Z {
        return Err(CohomologyError::IncomparableClasses);
    }
    check_cocycle(k, pres.degree, z)?;
    let y = pres.u.mul_vec(z).expect("shape");
    let torsion = pres.torsion_rows.iter().map(|(row, d)| y[*row].mod_floor(d)).collect();
    let free = pres.free_to.mul_vec(&y[pres.r..]).expect("shape");
    Ok(ClassHk { presentation: pres.clone(), free, torsion })
}

/// Free coordinates of a rational cocycle (the image in `H^k(K; ℚ)`).
pub fn rational_coordinates(k: &Complex, z: &[Rat], pres: &GroupPresentation) -> Result<Vec<Rat>, CohomologyError> {
    if pres.fingerprint != k.fingerprint() {
        return Err(CohomologyError::IncomparableClasses);
    }
    check_cocycle(k, pres.degree, z)?;
    let y = RatMatrix::from_int(&pres.u).mul_vec(z).expect("shape");
    Ok(RatMatrix::from_int(&pres.free_to).mul_vec(&y[pres.r..]).expect("shape"))
}

/// Class of an integer cocycle in the cached `H^deg(K; ℤ)` presentation.
pub fn class_of(k: &Complex, deg: usize, z: &[Int]) -> Result<ClassHk, CohomologyError> {
    if deg > k.dimension() + 3 {
        return Err(CohomologyError::InvalidParameter(format!("degree {deg} is out of range")));
    }
    let pres = presentation(k, deg);
    class_coordinates(k, z, &pres)
}

pub fn classes_equal(a: &ClassHk, b: &ClassHk) -> Result<bool, CohomologyError> {
    if !a.presentation.same_group(&b.presentation) {
        return Err(CohomologyError::IncomparableClasses);
    }
    Ok(a.free == b.free && a.torsion == b.torsion)
}

/// Evaluation of a rational cochain on an integer chain.
pub fn pair_with_cycle(z: &[Rat], c: &[Int]) -> Result<Rat, CohomologyError> {
    if z.len() != c.len() {
        return Err(CohomologyError::DimensionError { expected: z.len(), found: c.len() });
    }
    Ok(z.iter().zip(c).filter(|(_, n)| !n.is_zero()).map(|(x, n)| x * Rat::from_integer(n.clone())).sum())
}

/// Integer basis of `ker ∂_deg`, each vector scaled so its first nonzero entry is positive.
pub fn cycle_basis(k: &Complex, deg: usize) -> Arc<Vec<Vec<Int>>> {
    k.caches.cycle_bases[deg]
        .get_or_init(|| {
            let mut basis = if deg == 0 {
                (0..k.count(0))
                    .map(|i| {
                        let mut e = vec![Int::zero(); k.count(0)];
                        e[i] = Int::one();
                        e
                    })
                    .collect()
            } else if deg > k.dimension() {
                Vec::new()
            } else {
                integer_kernel(&k.boundary_matrix(deg).expect("in range"))
            };
            for v in &mut basis {
                if v.iter().find(|x| !x.is_zero()).is_some_and(Signed::is_negative) {
                    v.iter_mut().for_each(|x| *x = -&*x);
                }
            }
            Arc::new(basis)
        })
        .clone()
}

/// The generator of `ker ∂_top` when it has rank one (a connected orientable pseudomanifold).
pub fn fundamental_cycle(k: &Complex) -> Option<Vec<Int>> {
    let basis = cycle_basis(k, k.dimension());
    if basis.len() == 1 {
        Some(basis[0].clone())
    } else {
        None
    }
}

/// `φ^*` on integer classes.
pub fn pullback_class(map: &SimplicialMap, c: &ClassHk) -> Result<ClassHk, CohomologyError> {
    let target = map.target();
    if c.presentation.fingerprint != target.fingerprint() {
        return Err(CohomologyError::IncomparableClasses);
    }
    let deg = c.presentation.degree;
    let z = map.pullback_cochain(deg, &c.representative());
    class_of(map.source(), deg, &z)
}
