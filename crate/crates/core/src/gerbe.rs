//! Bundle gerbes in local form over the star cover.
//!
//! A circle-valued function on a star is a pair `(θ, w)`: rational vertex
//! phases in turns and integer edge windings with `dw = 0`, taken modulo
//! `(θ, w) ∼ (θ + n, w − dn)` for integer vertex functions `n`. Its
//! logarithmic derivative is `dlog = dθ + w`. Multiplication of functions is
//! addition of pairs.
//!
//! Gerbe data is a Čech 2-cochain `g` of such functions whose Čech
//! coboundary is trivial: `n = δθ` is integral and `δw = −dn`.

use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::cech::{ascend, ascend_cochain, descend_with_primitive, BiCochain, CechError, TotalCochain};
use crate::cohomology::{class_coordinates, class_of, coboundary_snf, presentation, ClassHk, CohomologyError};
use crate::complex::{Complex, SimplicialMap};
use crate::intlinalg::{solve_integer_linear, Int, Rat};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GerbeError {
    #[error("not a cocycle at {0}")]
    NotACocycle(String),
    #[error("invalid circle function: {0}")]
    InvalidCircleFunction(String),
    #[error("gerbes live on different complexes")]
    BaseMismatch,
    #[error("nonzero Dixmier-Douady class {0}")]
    NonzeroClass(ClassHk),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error(transparent)]
    Cech(#[from] CechError),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
}

/// A circle-valued function on one star: phases on its vertices, windings on its edges.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleFunction {
    /// `(vertex, phase)` over the carrier's vertices.
    pub theta: Vec<(usize, Rat)>,
    /// `(edge index, winding)` over the carrier's edges.
    pub winding: Vec<(usize, Int)>,
}

/// A Čech `p`-cochain of circle functions.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleCochain {
    pub theta: BiCochain<Rat>,
    pub winding: BiCochain<Int>,
}

impl CircleCochain {
    pub fn new(theta: BiCochain<Rat>, winding: BiCochain<Int>) -> Result<Self, GerbeError> {
        if theta.bidegree().1 != 0
            || winding.bidegree().1 != 1
            || theta.cech_degree() != winding.cech_degree()
            || theta.base() != winding.base()
        {
            return Err(GerbeError::InvalidCircleFunction("phases and windings do not match".into()));
        }
        let c = CircleCochain { theta, winding };
        c.check_flat()?;
        Ok(c)
    }

    pub fn trivial(base: Arc<Complex>, p: usize) -> Self {
        CircleCochain { theta: BiCochain::zeros(base.clone(), p, 0), winding: BiCochain::zeros(base, p, 1) }
    }

    /// Constant phases `c[σ]` with zero windings.
    pub fn constant(base: Arc<Complex>, p: usize, c: &[Rat]) -> Self {
        CircleCochain { theta: BiCochain::constant(base.clone(), p, c), winding: BiCochain::zeros(base, p, 1) }
    }

    pub fn base(&self) -> &Arc<Complex> {
        self.theta.base()
    }

    pub fn cech_degree(&self) -> usize {
        self.theta.cech_degree()
    }

    fn check_flat(&self) -> Result<(), GerbeError> {
        let dw = self.winding.simp_d();
        if let Some((s, r, _)) = dw.entries().find(|(_, _, v)| !v.is_zero()) {
            let k = self.base();
            return Err(GerbeError::InvalidCircleFunction(format!(
                "winding not closed on {} in the star of {}",
                k.format_simplex(k.simplex(2, r)),
                k.format_simplex(k.simplex(self.cech_degree(), s))
            )));
        }
        Ok(())
    }

    /// The function at Čech index `σ`.
    pub fn function(&self, sigma: usize) -> CircleFunction {
        let k = self.base();
        let st = k.star_of(self.cech_degree(), sigma);
        CircleFunction {
            theta: st.cells(0).iter().map(|&v| (v, self.theta.get(sigma, v).unwrap().clone())).collect(),
            winding: st.cells(1).iter().map(|&e| (e, self.winding.get(sigma, e).unwrap().clone())).collect(),
        }
    }

    /// `dθ + w`, the logarithmic derivative.
    pub fn dlog(&self) -> BiCochain<Rat> {
        self.theta.simp_d().add(&self.winding.to_rat())
    }

    pub fn cech_delta(&self) -> Self {
        CircleCochain { theta: self.theta.cech_delta(), winding: self.winding.cech_delta() }
    }

    /// Pointwise product (sum of pairs).
    pub fn mul(&self, other: &Self) -> Self {
        CircleCochain { theta: self.theta.add(&other.theta), winding: self.winding.add(&other.winding) }
    }

    /// Pointwise inverse.
    pub fn inv(&self) -> Self {
        CircleCochain { theta: self.theta.neg(), winding: self.winding.neg() }
    }

    /// If the pair represents the constant function 1, the integer `n` with `θ = n` and `w = −dn`.
    pub fn as_trivial(&self) -> Option<BiCochain<Int>> {
        let n = self.theta.to_int()?;
        if n.simp_d().add(&self.winding).is_zero() {
            Some(n)
        } else {
            None
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.as_trivial().is_some()
    }

    pub fn equivalent(&self, other: &Self) -> bool {
        self.mul(&other.inv()).is_trivial()
    }

    /// Representative with all phases in `[0, 1)`.
    pub fn canonical(&self) -> Self {
        let floor = self.theta.map(|x| x.floor().to_integer());
        CircleCochain {
            theta: self.theta.sub(&floor.to_rat()),
            winding: self.winding.add(&floor.simp_d()),
        }
    }

    pub fn pullback(&self, map: &SimplicialMap) -> Result<Self, GerbeError> {
        Ok(CircleCochain { theta: self.theta.pullback(map)?, winding: self.winding.pullback(map)? })
    }
}

/// Local bundle gerbe: a Čech 2-cochain of circle functions with `δg = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GerbeData {
    g: CircleCochain,
}

/// A Čech 1-cochain `h` of circle functions with `δh = g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trivialization {
    pub h: CircleCochain,
}

impl GerbeData {
    /// Wraps and validates gerbe data.
    pub fn new(g: CircleCochain) -> Result<Self, GerbeError> {
        if g.cech_degree() != 2 {
            return Err(GerbeError::InvalidCircleFunction(format!(
                "gerbe data lives in Čech degree 2, not {}",
                g.cech_degree()
            )));
        }
        g.check_flat()?;
        let gerbe = GerbeData { g };
        gerbe.validate()?;
        Ok(gerbe)
    }

    pub fn trivial(base: Arc<Complex>) -> Self {
        GerbeData { g: CircleCochain::trivial(base, 2) }
    }

    pub fn base(&self) -> &Arc<Complex> {
        self.g.base()
    }

    pub fn data(&self) -> &CircleCochain {
        &self.g
    }

    pub fn theta(&self) -> &BiCochain<Rat> {
        &self.g.theta
    }

    pub fn winding(&self) -> &BiCochain<Int> {
        &self.g.winding
    }

    /// Checks `δg = 1`, naming the first offending 3-simplex.
    pub fn validate(&self) -> Result<(), GerbeError> {
        let dg = self.g.cech_delta();
        let k = self.base();
        let n = dg.theta.map(|x| x.clone());
        for s in 0..k.count(3) {
            let bad = || GerbeError::NotACocycle(k.format_simplex(k.simplex(3, s)));
            if !n.local(s).iter().all(Rat::is_integer) {
                return Err(bad());
            }
            let st = k.star_of(3, s);
            for &e in st.cells(1) {
                let f = k.simplex(1, e);
                let (a, b) = (dg.theta.get(s, f[0]).unwrap(), dg.theta.get(s, f[1]).unwrap());
                let dn = (b - a).to_integer();
                if dg.winding.get(s, e).unwrap() + &dn != Int::zero() {
                    return Err(bad());
                }
            }
        }
        Ok(())
    }

    /// The integer total 3-cocycle `(δθ, −w)` in bidegrees `(3,0)` and `(2,1)`.
    pub fn dd_total(&self) -> TotalCochain<Int> {
        let n = self.g.theta.cech_delta().to_int().expect("validated gerbe");
        TotalCochain::from_parts(self.base().clone(), 3, vec![n, self.g.winding.neg()]).expect("bidegrees")
    }

    pub fn dual(&self) -> Self {
        GerbeData { g: self.g.inv() }
    }

    pub fn tensor(&self, other: &Self) -> Result<Self, GerbeError> {
        if self.base() != other.base() {
            return Err(GerbeError::BaseMismatch);
        }
        Ok(GerbeData { g: self.g.mul(&other.g) })
    }

    /// `g · δh`.
    pub fn apply_gauge(&self, h: &CircleCochain) -> Result<Self, GerbeError> {
        if h.base() != self.base() || h.cech_degree() != 1 {
            return Err(GerbeError::BaseMismatch);
        }
        h.check_flat()?;
        Ok(GerbeData { g: self.g.mul(&h.cech_delta()) })
    }

    pub fn pullback(&self, map: &SimplicialMap) -> Result<Self, GerbeError> {
        if **map.target() != **self.base() {
            return Err(GerbeError::InvalidMap("map does not land in the gerbe's base".into()));
        }
        GerbeData::new(self.g.pullback(map)?)
    }

    /// Integer 3-cocycle representing the Dixmier-Douady class.
    pub fn dd_cocycle(&self) -> Result<Vec<Int>, GerbeError> {
        Ok(descend_with_primitive(&self.dd_total())?.cocycle)
    }

    pub fn dd_class(&self) -> Result<ClassHk, GerbeError> {
        Ok(class_of(self.base(), 3, &self.dd_cocycle()?)?)
    }

    /// Constructs `h` with `δh = g`, or reports the class as the obstruction.
    pub fn trivialize(&self) -> Result<Trivialization, GerbeError> {
        let k = self.base().clone();
        let z = self.dd_total();
        let descent = descend_with_primitive(&z)?;
        let Some(b) = coboundary_snf(&k, 2).solve(&descent.cocycle).expect("shape") else {
            return Err(GerbeError::NonzeroClass(class_of(&k, 3, &descent.cocycle)?));
        };
        // z = D(Y + π*b); push the primitive up to Čech degree 2
        let y = descent.primitive.add(
            &TotalCochain::from_parts(k.clone(), 2, vec![BiCochain::from_global(k.clone(), 0, 2, &b)])?,
        );
        let m = ascend_cochain(&y, 2)?.top;
        // δM = δθ and dM = −w, so θ − M is δ-closed and g = δ(K(θ − M), 0)
        let rest = self.g.theta.sub(&m.to_rat());
        let h = CircleCochain {
            theta: rest.contraction_k()?,
            winding: BiCochain::zeros(k.clone(), 1, 1),
        };
        let t = Trivialization { h };
        if !t.verify(self) {
            return Err(GerbeError::NotACocycle("trivialization failed to verify".into()));
        }
        Ok(t)
    }

    /// Witness of stable isomorphism: a trivialization of `self ⊗ other*`.
    pub fn stable_iso(&self, other: &Self) -> Result<Option<Trivialization>, GerbeError> {
        match self.tensor(&other.dual())?.trivialize() {
            Ok(t) => Ok(Some(t)),
            Err(GerbeError::NonzeroClass(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }

    /// A gerbe realizing the class `c ∈ H³(K; ℤ)`.
    pub fn from_class(k: &Arc<Complex>, c: &ClassHk) -> Result<Self, GerbeError> {
        let pres = presentation(k, 3);
        if **c.presentation() != *pres {
            return Err(CohomologyError::IncomparableClasses.into());
        }
        let top = ascend(k, 3, &c.representative())?.top;
        let theta = top.to_rat().contraction_k()?;
        let g = GerbeData { g: CircleCochain { theta, winding: BiCochain::zeros(k.clone(), 2, 1) } };
        g.validate()?;
        debug_assert_eq!(g.dd_class()?, *c);
        Ok(g)
    }

    /// A gerbe with constant phases and no windings realizing the torsion class `c`.
    /// Its logarithmic derivative vanishes, so it is flat.
    pub fn flat_from_class(k: &Arc<Complex>, c: &ClassHk) -> Result<Self, GerbeError> {
        let Some(order) = c.order() else {
            return Err(GerbeError::NonzeroClass(c.clone()));
        };
        let z: Vec<Int> = c.representative().iter().map(|x| x * &order).collect();
        let delta2 = k.coboundary_matrix(2);
        let b = solve_integer_linear(&delta2, &z)
            .expect("shape")
            .expect("a multiple by the order is a coboundary");
        let phases: Vec<Rat> = b.iter().map(|x| Rat::new(x.clone(), order.clone())).collect();
        let g = GerbeData::new(CircleCochain::constant(k.clone(), 2, &phases))?;
        debug_assert_eq!(g.dd_class()?, *c);
        Ok(g)
    }
}

impl Trivialization {
    /// Exact check of `δh ∼ g`.
    pub fn verify(&self, g: &GerbeData) -> bool {
        self.h.check_flat().is_ok() && self.h.cech_delta().equivalent(&g.g)
    }
}

/// Integer class coordinates of a 3-cocycle, for callers holding a bare cocycle.
pub fn h3_class(k: &Complex, z: &[Int]) -> Result<ClassHk, GerbeError> {
    Ok(class_coordinates(k, z, &presentation(k, 3))?)
}

/// Integer vertex function on every 1-star: random-ish gauge helper used by tests and examples.
pub fn gauge_from_fn(
    base: Arc<Complex>,
    theta: impl FnMut(usize, usize) -> Rat,
    n: impl FnMut(usize, usize) -> Int,
) -> CircleCochain {
    // windings are made flat by taking them exact: w = d n
    let n = BiCochain::from_fn(base.clone(), 1, 0, n);
    CircleCochain { theta: BiCochain::from_fn(base, 1, 0, theta), winding: n.simp_d() }
}
