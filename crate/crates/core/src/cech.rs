//! The Čech–simplicial double complex of the vertex-star cover.
//!
//! An element of bidegree `(p, q)` assigns to every `p`-simplex `σ` (a Čech
//! index) a `q`-cochain on the closed star `St(σ)`. The Čech differential `δ`
//! takes alternating sums of restrictions, `d` is the simplicial coboundary
//! inside each star, and the total differential is `D = δ + (−1)^p d`.
//!
//! Rows are exact by the min-vertex contraction `K`, columns by the cone
//! contraction `h` towards the apex `min σ`; `descend` and `ascend` are the
//! two zig-zags built from them.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::complex::{Complex, SimplicialMap};
use crate::intlinalg::{Int, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CechError {
    #[error("invalid degree: {0}")]
    InvalidDegree(String),
    #[error("not closed: {0}")]
    NotClosed(String),
    #[error("local values disagree on {0}")]
    GluingFailure(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

/// Coefficient ring of a cochain.
pub trait Coeff:
    Clone + PartialEq + fmt::Debug + Zero + Neg<Output = Self> + Add<Output = Self> + Sub<Output = Self> + Send + Sync
{
}

impl<T> Coeff for T where
    T: Clone + PartialEq + fmt::Debug + Zero + Neg<Output = T> + Add<Output = T> + Sub<Output = T> + Send + Sync
{
}

fn signed<R: Coeff>(x: R, negative: bool) -> R {
    if negative {
        -x
    } else {
        x
    }
}

/// Inserts `v` into the sorted simplex `s`; returns the result and the number
/// of entries of `s` below `v`, or `None` when `v ∈ s`.
fn insert_vertex(s: &[usize], v: usize) -> Option<(Vec<usize>, usize)> {
    match s.binary_search(&v) {
        Ok(_) => None,
        Err(pos) => {
            let mut out = Vec::with_capacity(s.len() + 1);
            out.extend_from_slice(&s[..pos]);
            out.push(v);
            out.extend_from_slice(&s[pos..]);
            Some((out, pos))
        }
    }
}

/// Element of bidegree `(p, q)` of the double complex.
#[derive(Clone, PartialEq)]
pub struct BiCochain<R> {
    base: Arc<Complex>,
    p: usize,
    q: usize,
    /// `values[σ][j]` is the value on the `j`-th `q`-cell of `St(σ)`.
    values: Vec<Vec<R>>,
}

impl<R: fmt::Debug> fmt::Debug for BiCochain<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BiCochain").field("p", &self.p).field("q", &self.q).field("values", &self.values).finish()
    }
}

impl<R: Coeff> BiCochain<R> {
    pub fn zeros(base: Arc<Complex>, p: usize, q: usize) -> Self {
        let values = (0..base.count(p)).map(|s| vec![R::zero(); base.star_of(p, s).cells(q).len()]).collect();
        BiCochain { base, p, q, values }
    }

    /// Builds a cochain from `f(σ, ρ)` with global simplex indices.
    pub fn from_fn(base: Arc<Complex>, p: usize, q: usize, mut f: impl FnMut(usize, usize) -> R) -> Self {
        let values = (0..base.count(p))
            .map(|s| base.star_of(p, s).cells(q).iter().map(|&r| f(s, r)).collect())
            .collect();
        BiCochain { base, p, q, values }
    }

    /// `π^*c`: restriction of a global `q`-cochain to every star.
    pub fn from_global(base: Arc<Complex>, p: usize, q: usize, c: &[R]) -> Self {
        Self::from_fn(base, p, q, |_, r| c[r].clone())
    }

    pub fn base(&self) -> &Arc<Complex> {
        &self.base
    }

    pub fn cech_degree(&self) -> usize {
        self.p
    }

    pub fn form_degree(&self) -> usize {
        self.q
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.p, self.q)
    }

    /// Values on `St(σ)`, in the order of its `q`-cells.
    pub fn local(&self, sigma: usize) -> &[R] {
        &self.values[sigma]
    }

    /// Value of the local cochain at `σ` on the global `q`-simplex `ρ`, if `ρ ∈ St(σ)`.
    pub fn get(&self, sigma: usize, rho: usize) -> Option<&R> {
        let j = self.base.star_of(self.p, sigma).position(self.q, rho)?;
        Some(&self.values[sigma][j])
    }

    fn at(&self, sigma: usize, rho: usize) -> &R {
        self.get(sigma, rho).unwrap_or_else(|| panic!("simplex {rho} outside star of {sigma}"))
    }

    pub fn set(&mut self, sigma: usize, rho: usize, value: R) {
        let j = self.base.star_of(self.p, sigma).position(self.q, rho).expect("simplex inside star");
        self.values[sigma][j] = value;
    }

    /// Iterates `(σ, ρ, value)` over all entries.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &R)> + '_ {
        self.values.iter().enumerate().flat_map(move |(s, vals)| {
            let cells = self.base.star_of(self.p, s).cells(self.q);
            cells.iter().zip(vals).map(move |(&r, v)| (s, r, v))
        })
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().flatten().all(Zero::is_zero)
    }

    pub fn map<S: Coeff>(&self, f: impl Fn(&R) -> S) -> BiCochain<S> {
        BiCochain {
            base: self.base.clone(),
            p: self.p,
            q: self.q,
            values: self.values.iter().map(|v| v.iter().map(&f).collect()).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&R, &R) -> R) -> Self {
        assert_eq!(self.bidegree(), other.bidegree(), "bidegree mismatch");
        assert!(Arc::ptr_eq(&self.base, &other.base) || *self.base == *other.base, "base mismatch");
        BiCochain {
            base: self.base.clone(),
            p: self.p,
            q: self.q,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(x, y)).collect())
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    pub fn neg(&self) -> Self {
        self.map(|a| -a.clone())
    }

    /// Multiplies by `(−1)^k`.
    pub fn sign(&self, k: usize) -> Self {
        if k.is_multiple_of(2) {
            self.clone()
        } else {
            self.neg()
        }
    }

    /// Čech differential, raising `p`.
    pub fn cech_delta(&self) -> Self {
        let k = &self.base;
        let p = self.p + 1;
        let values = (0..k.count(p))
            .map(|t| {
                let faces = k.faces(p, t);
                k.star_of(p, t)
                    .cells(self.q)
                    .iter()
                    .map(|&r| {
                        faces.iter().enumerate().fold(R::zero(), |acc, (i, &f)| {
                            let v = self.at(f, r).clone();
                            if i % 2 == 0 {
                                acc + v
                            } else {
                                acc - v
                            }
                        })
                    })
                    .collect()
            })
            .collect();
        BiCochain { base: k.clone(), p, q: self.q, values }
    }

    /// Simplicial coboundary inside each star, raising `q`.
    pub fn simp_d(&self) -> Self {
        let k = &self.base;
        let q = self.q + 1;
        let values = (0..k.count(self.p))
            .map(|s| {
                let st = k.star_of(self.p, s);
                st.cells(q)
                    .iter()
                    .map(|&r| {
                        k.faces(q, r).iter().enumerate().fold(R::zero(), |acc, (j, &f)| {
                            let v = self.values[s][st.position(self.q, f).expect("face-closed")].clone();
                            if j % 2 == 0 {
                                acc + v
                            } else {
                                acc - v
                            }
                        })
                    })
                    .collect()
            })
            .collect();
        BiCochain { base: k.clone(), p: self.p, q, values }
    }

    /// Min-vertex contraction `K`, lowering `p`:
    /// `(Kx)_τ(ρ) = x_{v τ}(ρ)` with `v = min ρ`, zero when `v ∈ τ`.
    pub fn contraction_k(&self) -> Result<Self, CechError> {
        if self.p == 0 {
            return Err(CechError::InvalidDegree("K needs Čech degree at least 1".into()));
        }
        let k = &self.base;
        let p = self.p - 1;
        let values = (0..k.count(p))
            .map(|t| {
                let tau = k.simplex(p, t);
                k.star_of(p, t)
                    .cells(self.q)
                    .iter()
                    .map(|&r| {
                        let v = k.simplex(self.q, r)[0];
                        match insert_vertex(tau, v) {
                            None => R::zero(),
                            Some((sigma, below)) => {
                                let s = k.index_of(&sigma).expect("v τ ⊆ ρ ∪ τ");
                                signed(self.at(s, r).clone(), below % 2 == 1)
                            }
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(BiCochain { base: k.clone(), p, q: self.q, values })
    }

    /// Cone contraction `h` towards `a = min σ`, lowering `q`:
    /// `(hx)_σ(ρ) = x_σ(a ρ)`, zero when `a ∈ ρ`.
    pub fn cone_contraction(&self) -> Result<Self, CechError> {
        if self.q == 0 {
            return Err(CechError::InvalidDegree("h needs form degree at least 1".into()));
        }
        let k = &self.base;
        let q = self.q - 1;
        let values = (0..k.count(self.p))
            .map(|s| {
                let apex = k.simplex(self.p, s)[0];
                let st = k.star_of(self.p, s);
                st.cells(q)
                    .iter()
                    .map(|&r| match insert_vertex(k.simplex(q, r), apex) {
                        None => R::zero(),
                        Some((cone, below)) => {
                            let c = k.index_of(&cone).expect("star is a cone");
                            let j = st.position(self.q, c).expect("star is a cone");
                            signed(self.values[s][j].clone(), below % 2 == 1)
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(BiCochain { base: k.clone(), p: self.p, q, values })
    }

    /// Glues a `δ`-closed Čech-0 family to a global cochain, checking agreement on overlaps.
    pub fn glue(&self) -> Result<Vec<R>, CechError> {
        if self.p != 0 {
            return Err(CechError::InvalidDegree(format!("glue needs Čech degree 0, got {}", self.p)));
        }
        let k = &self.base;
        let global: Vec<R> = (0..k.count(self.q)).map(|r| self.at(k.simplex(self.q, r)[0], r).clone()).collect();
        for (s, r, v) in self.entries() {
            if *v != global[r] {
                return Err(CechError::GluingFailure(format!(
                    "{} in the star of {}",
                    k.format_simplex(k.simplex(self.q, r)),
                    k.format_simplex(k.simplex(0, s))
                )));
            }
        }
        Ok(global)
    }

    /// For a locally constant `(p, 0)` cochain: the constant on each star.
    pub fn constants(&self) -> Result<Vec<R>, CechError> {
        if self.q != 0 {
            return Err(CechError::InvalidDegree("constants need form degree 0".into()));
        }
        self.values
            .iter()
            .enumerate()
            .map(|(s, vals)| {
                let first = vals[0].clone();
                if vals.iter().all(|v| *v == first) {
                    Ok(first)
                } else {
                    Err(CechError::NotClosed(format!(
                        "local function at {} is not constant",
                        self.base.format_simplex(self.base.simplex(self.p, s))
                    )))
                }
            })
            .collect()
    }

    /// `(p, 0)` cochain that is constant `c[σ]` on every star.
    pub fn constant(base: Arc<Complex>, p: usize, c: &[R]) -> Self {
        Self::from_fn(base, p, 0, |s, _| c[s].clone())
    }
}

impl<R: Coeff> BiCochain<R> {
    /// Pullback along a simplicial map into the base: both the Čech index
    /// and the local simplex are pushed forward, with orientation signs and
    /// zero on degenerate images.
    pub fn pullback(&self, map: &SimplicialMap) -> Result<Self, CechError> {
        if **map.target() != *self.base {
            return Err(CechError::ShapeMismatch("map does not land in the base complex".into()));
        }
        let source = map.source().clone();
        let k = &self.base;
        let (p, q) = (self.p, self.q);
        Ok(BiCochain::from_fn(source.clone(), p, q, |s, r| {
            let (Some((ts, sign_s)), Some((tr, sign_r))) =
                (map.image(source.simplex(p, s)), map.image(source.simplex(q, r)))
            else {
                return R::zero();
            };
            let v = self.get(ts, tr).unwrap_or_else(|| {
                panic!("image of a star simplex leaves the star of {}", k.format_simplex(k.simplex(p, ts)))
            });
            signed(v.clone(), sign_s * sign_r < 0)
        }))
    }
}

impl BiCochain<Int> {
    pub fn to_rat(&self) -> BiCochain<Rat> {
        self.map(|x| Rat::from_integer(x.clone()))
    }
}

impl BiCochain<Rat> {
    /// Integer cochain, if every value is integral.
    pub fn to_int(&self) -> Option<BiCochain<Int>> {
        if self.values.iter().flatten().all(|x| x.is_integer()) {
            Some(self.map(|x| x.to_integer()))
        } else {
            None
        }
    }
}

/// Free-function forms of the four basic operators.
pub fn cech_delta<R: Coeff>(x: &BiCochain<R>) -> BiCochain<R> {
    x.cech_delta()
}

pub fn simp_d<R: Coeff>(x: &BiCochain<R>) -> BiCochain<R> {
    x.simp_d()
}

pub fn contraction_k<R: Coeff>(x: &BiCochain<R>) -> Result<BiCochain<R>, CechError> {
    x.contraction_k()
}

pub fn cone_contraction<R: Coeff>(x: &BiCochain<R>) -> Result<BiCochain<R>, CechError> {
    x.cone_contraction()
}

/// Element of total degree `n`: components `parts[p]` of bidegree `(p, n − p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalCochain<R> {
    degree: usize,
    parts: Vec<BiCochain<R>>,
}

pub type TotalCocycle<R> = TotalCochain<R>;

impl<R: Coeff> TotalCochain<R> {
    pub fn zeros(base: Arc<Complex>, degree: usize) -> Self {
        let parts = (0..=degree).map(|p| BiCochain::zeros(base.clone(), p, degree - p)).collect();
        TotalCochain { degree, parts }
    }

    /// Assembles from components; missing bidegrees are zero.
    pub fn from_parts(base: Arc<Complex>, degree: usize, parts: Vec<BiCochain<R>>) -> Result<Self, CechError> {
        let mut t = Self::zeros(base, degree);
        for b in parts {
            let (p, q) = b.bidegree();
            if p + q != degree {
                return Err(CechError::ShapeMismatch(format!("bidegree ({p},{q}) in total degree {degree}")));
            }
            t.parts[p] = t.parts[p].add(&b);
        }
        Ok(t)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn part(&self, p: usize) -> &BiCochain<R> {
        &self.parts[p]
    }

    pub fn parts(&self) -> &[BiCochain<R>] {
        &self.parts
    }

    pub fn base(&self) -> &Arc<Complex> {
        self.parts[0].base()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.degree, other.degree);
        TotalCochain { degree: self.degree, parts: self.parts.iter().zip(&other.parts).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.degree, other.degree);
        TotalCochain { degree: self.degree, parts: self.parts.iter().zip(&other.parts).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(BiCochain::is_zero)
    }

    /// Total differential `D = δ + (−1)^p d`.
    pub fn total_d(&self) -> Self {
        let n = self.degree + 1;
        let mut out = Self::zeros(self.base().clone(), n);
        for (p, x) in self.parts.iter().enumerate() {
            out.parts[p + 1] = out.parts[p + 1].add(&x.cech_delta());
            out.parts[p] = out.parts[p].add(&x.simp_d().sign(p));
        }
        out
    }

    pub fn is_closed(&self) -> bool {
        self.total_d().is_zero()
    }
}

impl TotalCochain<Int> {
    pub fn to_rat(&self) -> TotalCochain<Rat> {
        TotalCochain { degree: self.degree, parts: self.parts.iter().map(BiCochain::to_rat).collect() }
    }
}

/// Result of the descent staircase: `z = π^*c + D(primitive)`.
#[derive(Debug, Clone)]
pub struct Descent<R> {
    pub cocycle: Vec<R>,
    pub primitive: TotalCochain<R>,
}

/// Moves a total cocycle into Čech degree 0 and glues it to a global cocycle.
pub fn descend_with_primitive<R: Coeff>(z: &TotalCochain<R>) -> Result<Descent<R>, CechError> {
    if !z.is_closed() {
        return Err(CechError::NotClosed(format!("total cochain of degree {} is not D-closed", z.degree)));
    }
    let n = z.degree;
    let base = z.base().clone();
    let mut parts = z.parts.clone();
    let mut primitive = if n == 0 { None } else { Some(TotalCochain::zeros(base, n - 1)) };
    for p in (1..=n).rev() {
        let y = parts[p].contraction_k()?;
        parts[p] = parts[p].sub(&y.cech_delta());
        debug_assert!(parts[p].is_zero());
        parts[p - 1] = parts[p - 1].sub(&y.simp_d().sign(p - 1));
        let prim = primitive.as_mut().expect("n ≥ 1");
        prim.parts[p - 1] = prim.parts[p - 1].add(&y);
    }
    let cocycle = parts[0].glue()?;
    let primitive = primitive.unwrap_or_else(|| TotalCochain { degree: 0, parts: Vec::new() });
    Ok(Descent { cocycle, primitive })
}

pub fn descend<R: Coeff>(z: &TotalCochain<R>) -> Result<Vec<R>, CechError> {
    descend_with_primitive(z).map(|d| d.cocycle)
}

/// Result of the ascent staircase: `y = top + D(primitive)` with `top`
/// concentrated in bidegree `(upto, n − upto)`.
#[derive(Debug, Clone)]
pub struct Ascent<R> {
    pub top: BiCochain<R>,
    pub primitive: TotalCochain<R>,
}

/// Pushes the components of a total cocycle in Čech degrees `< upto` upwards
/// with the cone contraction, until everything sits in Čech degree `upto`.
pub fn ascend_cochain<R: Coeff>(y: &TotalCochain<R>, upto: usize) -> Result<Ascent<R>, CechError> {
    let n = y.degree;
    if upto > n {
        return Err(CechError::InvalidDegree(format!("cannot ascend degree {n} to Čech degree {upto}")));
    }
    let base = y.base().clone();
    let mut parts = y.parts.clone();
    let mut primitive = if n == 0 { None } else { Some(TotalCochain::zeros(base, n - 1)) };
    for p in 0..upto {
        if !parts[p].simp_d().is_zero() {
            return Err(CechError::NotClosed(format!("component in bidegree ({p},{}) is not d-closed", n - p)));
        }
        let x = parts[p].cone_contraction()?.sign(p);
        parts[p] = parts[p].sub(&x.simp_d().sign(p));
        debug_assert!(parts[p].is_zero());
        parts[p + 1] = parts[p + 1].sub(&x.cech_delta());
        let prim = primitive.as_mut().expect("n ≥ 1");
        prim.parts[p] = prim.parts[p].add(&x);
    }
    for p in upto + 1..=n {
        if !parts[p].is_zero() {
            return Err(CechError::ShapeMismatch(format!("component in Čech degree {p} above {upto}")));
        }
    }
    let top = parts.swap_remove(upto);
    let primitive = primitive.unwrap_or_else(|| TotalCochain { degree: 0, parts: Vec::new() });
    Ok(Ascent { top, primitive })
}

/// Ascends a global cocycle `c` of degree `n` to a locally constant `(n, 0)` cochain.
pub fn ascend<R: Coeff>(base: &Arc<Complex>, n: usize, c: &[R]) -> Result<Ascent<R>, CechError> {
    if c.len() != base.count(n) {
        return Err(CechError::ShapeMismatch(format!("expected {} values, found {}", base.count(n), c.len())));
    }
    if !crate::cohomology::coboundary(base, n, c).iter().all(Zero::is_zero) {
        return Err(CechError::NotClosed(format!("global {n}-cochain is not a cocycle")));
    }
    let start = TotalCochain::from_parts(base.clone(), n, vec![BiCochain::from_global(base.clone(), 0, n, c)])?;
    let a = ascend_cochain(&start, n)?;
    Ok(a)
}
