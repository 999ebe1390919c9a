//! Connections, curvings and Deligne classes.
//!
//! A "p-form on U_σ" is a rational simplicial p-cochain on `St(σ)`. A
//! Deligne triple `(g, A, f)` satisfies `δg = 1`, `δA = dlog g` and
//! `δf = dA`; its three-curvature is the global 3-cocycle `ω` glued from
//! `df`. Phases are measured in turns, so `ω` itself (not `ω / 2πi`)
//! represents the Dixmier-Douady class over the rationals.

use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use thiserror::Error;

use crate::cech::{ascend_cochain, BiCochain, CechError, TotalCochain};
use crate::cohomology::{
    coboundary, cycle_basis, pair_with_cycle, presentation, rational_coordinates, ClassHk, CohomologyError,
};
use crate::complex::Complex;
use crate::gerbe::{CircleCochain, GerbeData, GerbeError};
use crate::intlinalg::{solve_rational_linear, Int, Rat, RatMatrix};

/// Why a Deligne triple fails to trivialize.
#[derive(Debug, Clone, PartialEq)]
pub enum DeligneObstruction {
    /// The underlying gerbe has a nonzero Dixmier-Douady class.
    DixmierDouady(ClassHk),
    /// After removing the connection, the leftover global 2-form is not closed
    /// (equivalently, the three-curvature is nonzero).
    NonExactResidual,
    /// The leftover closed 2-form has these non-integral periods on a basis of 2-cycles.
    NonIntegralPeriods(Vec<Rat>),
}

impl fmt::Display for DeligneObstruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeligneObstruction::DixmierDouady(c) => write!(f, "Dixmier-Douady class {c}"),
            DeligneObstruction::NonExactResidual => f.write_str("residual 2-form is not closed"),
            DeligneObstruction::NonIntegralPeriods(p) => {
                let s: Vec<String> = p.iter().map(ToString::to_string).collect();
                write!(f, "residual periods ({}) are not all integers", s.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeligneError {
    #[error(transparent)]
    Gerbe(#[from] GerbeError),
    #[error("not a connection: {0}")]
    NotAConnection(String),
    #[error("relation {relation} fails at {at}")]
    RelationFailed { relation: &'static str, at: String },
    #[error("nonzero Deligne class: {0}")]
    NonzeroClass(DeligneObstruction),
    #[error("Deligne cocycles live on different complexes")]
    BaseMismatch,
    #[error("cochain is not closed: {0}")]
    NotClosed(String),
    #[error(transparent)]
    Cech(#[from] CechError),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
}

/// `A`: a rational local 1-cochain per edge, bidegree `(1,1)`.
pub type Connection = BiCochain<Rat>;
/// `f`: a rational local 2-cochain per vertex, bidegree `(0,2)`.
pub type Curving = BiCochain<Rat>;

#[derive(Debug, Clone, PartialEq)]
pub struct DeligneCocycle {
    pub g: GerbeData,
    pub a: Connection,
    pub f: Curving,
}

/// `(h, k)` with `g = δh`, `A = δk + dlog h`, `f = dk`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeligneTrivialization {
    pub h: CircleCochain,
    pub k: BiCochain<Rat>,
}

fn first_nonzero(x: &BiCochain<Rat>) -> Option<String> {
    let k = x.base();
    let (p, q) = x.bidegree();
    x.entries()
        .find(|(_, _, v)| !v.is_zero())
        .map(|(s, r, _)| format!("{} in the star of {}", k.format_simplex(k.simplex(q, r)), k.format_simplex(k.simplex(p, s))))
}

fn check_shape(x: &BiCochain<Rat>, base: &Arc<Complex>, bidegree: (usize, usize), what: &str) -> Result<(), DeligneError> {
    if x.bidegree() != bidegree || x.base() != base {
        return Err(DeligneError::NotAConnection(format!("{what} has the wrong shape")));
    }
    Ok(())
}

/// `A := K(dlog g)`, so that `δA = dlog g`.
pub fn connection_for(g: &GerbeData) -> Result<Connection, DeligneError> {
    g.validate()?;
    let dlog = g.data().dlog();
    let a = dlog.contraction_k()?;
    if a.cech_delta() != dlog {
        return Err(DeligneError::RelationFailed {
            relation: "δA = dlog g",
            at: first_nonzero(&a.cech_delta().sub(&dlog)).unwrap_or_default(),
        });
    }
    Ok(a)
}

/// `f := K(dA)`, so that `δf = dA`.
pub fn curving_for(g: &GerbeData, a: &Connection) -> Result<Curving, DeligneError> {
    check_shape(a, g.base(), (1, 1), "connection")?;
    let defect = a.cech_delta().sub(&g.data().dlog());
    if let Some(at) = first_nonzero(&defect) {
        return Err(DeligneError::NotAConnection(format!("δA ≠ dlog g on {at}")));
    }
    let curvature = a.simp_d();
    let f = curvature.contraction_k()?;
    debug_assert_eq!(f.cech_delta(), curvature);
    Ok(f)
}

impl DeligneCocycle {
    /// Builds the triple from a gerbe with the canonical connection and curving.
    pub fn connect(g: GerbeData) -> Result<Self, DeligneError> {
        let a = connection_for(&g)?;
        let f = curving_for(&g, &a)?;
        Ok(DeligneCocycle { g, a, f })
    }

    pub fn new(g: GerbeData, a: Connection, f: Curving) -> Result<Self, DeligneError> {
        let d = DeligneCocycle { g, a, f };
        d.validate()?;
        Ok(d)
    }

    pub fn base(&self) -> &Arc<Complex> {
        self.g.base()
    }

    /// Checks the three relations exactly, naming the first failure.
    pub fn validate(&self) -> Result<(), DeligneError> {
        self.g.validate()?;
        check_shape(&self.a, self.base(), (1, 1), "connection")?;
        check_shape(&self.f, self.base(), (0, 2), "curving")?;
        if let Some(at) = first_nonzero(&self.a.cech_delta().sub(&self.g.data().dlog())) {
            return Err(DeligneError::RelationFailed { relation: "δA = dlog g", at });
        }
        if let Some(at) = first_nonzero(&self.f.cech_delta().sub(&self.a.simp_d())) {
            return Err(DeligneError::RelationFailed { relation: "δf = dA", at });
        }
        Ok(())
    }

    /// Global 3-cocycle `ω` with `df = π*ω`.
    pub fn three_curvature(&self) -> Result<Vec<Rat>, DeligneError> {
        self.validate()?;
        let omega = self.f.simp_d().glue()?;
        debug_assert!(coboundary(self.base(), 3, &omega).iter().all(Zero::is_zero));
        Ok(omega)
    }

    pub fn tensor(&self, other: &Self) -> Result<Self, DeligneError> {
        if self.base() != other.base() {
            return Err(DeligneError::BaseMismatch);
        }
        Ok(DeligneCocycle { g: self.g.tensor(&other.g)?, a: self.a.add(&other.a), f: self.f.add(&other.f) })
    }

    pub fn dual(&self) -> Self {
        DeligneCocycle { g: self.g.dual(), a: self.a.neg(), f: self.f.neg() }
    }

    /// Same gerbe and connection, curving shifted by the pullback of a global 2-cochain.
    pub fn shift_curving(&self, rho: &[Rat]) -> Self {
        let shift = BiCochain::from_global(self.base().clone(), 0, 2, rho);
        DeligneCocycle { g: self.g.clone(), a: self.a.clone(), f: self.f.add(&shift) }
    }

    /// Gauge action of a pair `(h, k)`: `(g·δh, A + dlog h + δk, f + dk)`.
    /// Leaves the Deligne class unchanged.
    pub fn apply_gauge(&self, h: &CircleCochain, k: &BiCochain<Rat>) -> Result<Self, DeligneError> {
        check_shape(k, self.base(), (0, 1), "gauge 1-form")?;
        let g = self.g.apply_gauge(h)?;
        Ok(DeligneCocycle {
            g,
            a: self.a.add(&h.dlog()).add(&k.cech_delta()),
            f: self.f.add(&k.simp_d()),
        })
    }

    /// Constructs `(h, k)` with `g = δh`, `A = δk + dlog h`, `f = dk`.
    pub fn trivialize(&self) -> Result<DeligneTrivialization, DeligneError> {
        self.validate()?;
        let base = self.base().clone();
        // (i) the gerbe itself
        let h0 = match self.g.trivialize() {
            Ok(t) => t.h,
            Err(GerbeError::NonzeroClass(c)) => {
                return Err(DeligneError::NonzeroClass(DeligneObstruction::DixmierDouady(c)))
            }
            Err(e) => return Err(e.into()),
        };
        // (ii) the connection, up to a δ-closed remainder
        let a_rest = self.a.sub(&h0.dlog());
        let k0 = a_rest.contraction_k()?;
        // (iii) the curving, up to a global 2-form
        let f_rest = self.f.sub(&k0.simp_d());
        let phi = f_rest.glue()?;
        if !coboundary(&base, 2, &phi).iter().all(Zero::is_zero) {
            return Err(DeligneError::NonzeroClass(DeligneObstruction::NonExactResidual));
        }
        let periods: Vec<Rat> =
            cycle_basis(&base, 2).iter().map(|c| pair_with_cycle(&phi, c)).collect::<Result<_, _>>()?;
        if !periods.iter().all(Rat::is_integer) {
            return Err(DeligneError::NonzeroClass(DeligneObstruction::NonIntegralPeriods(periods)));
        }
        // integral part: an integer cocycle with the same rational class
        let pres = presentation(&base, 2);
        let coords = rational_coordinates(&base, &phi, &pres)?;
        assert!(coords.iter().all(Rat::is_integer), "integral periods force integral free coordinates");
        let free: Vec<Int> = coords.iter().map(Rat::to_integer).collect();
        let c2 = pres.from_coords(&free, &vec![Int::zero(); pres.torsion().len()])?;
        let c2q: Vec<Rat> = c2.iter().cloned().map(Rat::from_integer).collect();
        let exact: Vec<Rat> = phi.iter().zip(&c2q).map(|(a, b)| a - b).collect();
        let delta1 = RatMatrix::from_int(&base.coboundary_matrix(1));
        let beta = solve_rational_linear(&delta1, &exact)
            .expect("shape")
            .expect("a closed form with zero class is exact");
        // (iv) realize c2 as the curvature of a flat correction: c2 = d x1, δx1 = d y2
        let start = TotalCochain::from_parts(base.clone(), 2, vec![BiCochain::from_global(base.clone(), 0, 2, &c2)])?;
        let ascent = ascend_cochain(&start, 2)?;
        let (x1, y2) = (ascent.primitive.part(0), ascent.primitive.part(1));
        let chi = CircleCochain::new(y2.to_rat().neg(), BiCochain::zeros(base.clone(), 1, 1))?;
        let h = h0.mul(&chi);
        let k = k0.add(&x1.to_rat()).add(&BiCochain::from_global(base.clone(), 0, 1, &beta));
        let t = DeligneTrivialization { h, k };
        t.verify(self)?;
        Ok(t)
    }
}

impl DeligneTrivialization {
    /// Exact re-check of `g = δh`, `A = δk + dlog h`, `f = dk`.
    pub fn verify(&self, d: &DeligneCocycle) -> Result<(), DeligneError> {
        if !self.h.cech_delta().equivalent(d.g.data()) {
            return Err(DeligneError::RelationFailed { relation: "g = δh", at: "some 2-simplex".into() });
        }
        if let Some(at) = first_nonzero(&d.a.sub(&self.k.cech_delta().add(&self.h.dlog()))) {
            return Err(DeligneError::RelationFailed { relation: "A = δk + dlog h", at });
        }
        if let Some(at) = first_nonzero(&d.f.sub(&self.k.simp_d())) {
            return Err(DeligneError::RelationFailed { relation: "f = dk", at });
        }
        Ok(())
    }
}

/// Periods of a closed rational 3-cochain over integer 3-cycles.
pub fn periods(k: &Complex, omega: &[Rat], cycles: &[Vec<Int>]) -> Result<Vec<Rat>, DeligneError> {
    if !coboundary(k, 3, omega).iter().all(Zero::is_zero) {
        return Err(DeligneError::NotClosed("three-form".into()));
    }
    Ok(cycles.iter().map(|c| pair_with_cycle(omega, c)).collect::<Result<_, _>>()?)
}

/// Equality of Deligne classes, with the trivialization of `d1 ⊗ d2*` as witness.
pub fn deligne_equal(
    d1: &DeligneCocycle,
    d2: &DeligneCocycle,
) -> Result<(bool, Option<DeligneTrivialization>), DeligneError> {
    match d1.tensor(&d2.dual())?.trivialize() {
        Ok(t) => Ok((true, Some(t))),
        Err(DeligneError::NonzeroClass(_)) => Ok((false, None)),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::{class_of, cohomology_group, fundamental_cycle, Ring};
    use crate::complex::{example_complex, ExampleSpace};
    use crate::gerbe::gauge_from_fn;
    use num_traits::{One, Signed};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn space(s: ExampleSpace) -> Arc<Complex> {
        Arc::new(example_complex(s).unwrap())
    }

    fn generator(k: &Arc<Complex>) -> GerbeData {
        let pres = presentation(k, 3);
        GerbeData::from_class(k, &ClassHk::new(pres, vec![Int::one()], vec![]).unwrap()).unwrap()
    }

    fn rq(v: &[Int]) -> Vec<Rat> {
        v.iter().cloned().map(Rat::from_integer).collect()
    }

    #[test]
    fn trivial_triple() {
        let k = space(ExampleSpace::Sphere(3));
        let d = DeligneCocycle::connect(GerbeData::trivial(k.clone())).unwrap();
        assert!(d.a.is_zero() && d.f.is_zero());
        assert!(d.three_curvature().unwrap().iter().all(Zero::is_zero));
        let t = d.trivialize().unwrap();
        assert!(t.h.is_trivial() && t.k.is_zero());
        assert_eq!(d.dual(), d);
        assert_eq!(d.tensor(&d).unwrap(), d);
    }

    #[test]
    fn generator_periods() {
        for s in [ExampleSpace::Sphere(3), ExampleSpace::Torus3] {
            let k = space(s);
            let g = generator(&k);
            let d = DeligneCocycle::connect(g.clone()).unwrap();
            let omega = d.three_curvature().unwrap();
            let fc = fundamental_cycle(&k).unwrap();
            let p = periods(&k, &omega, std::slice::from_ref(&fc)).unwrap();
            assert!(p[0].is_integer() && p[0].abs().is_one());
            let pairing = pair_with_cycle(&rq(&g.dd_cocycle().unwrap()), &fc).unwrap();
            assert_eq!(p[0], pairing);
            assert!(matches!(
                d.trivialize(),
                Err(DeligneError::NonzeroClass(DeligneObstruction::DixmierDouady(_)))
            ));
        }
    }

    #[test]
    fn flat_torsion_gerbe_has_zero_curvature() {
        let x = space(ExampleSpace::Rp2xS1);
        let pres = presentation(&x, 3);
        let c = ClassHk::new(pres, vec![], vec![Int::one()]).unwrap();
        let g = GerbeData::flat_from_class(&x, &c).unwrap();
        let d = DeligneCocycle::connect(g.clone()).unwrap();
        assert!(d.a.is_zero() && d.f.is_zero());
        assert!(d.three_curvature().unwrap().iter().all(Zero::is_zero));
        assert!(!g.dd_class().unwrap().is_zero());
    }

    #[test]
    fn validation_names_relation() {
        let k = space(ExampleSpace::Sphere(3));
        let d = DeligneCocycle::connect(generator(&k)).unwrap();
        let mut bad = d.clone();
        let (s, r, v) = bad.a.entries().next().map(|(s, r, v)| (s, r, v.clone())).unwrap();
        bad.a.set(s, r, v + Rat::one());
        assert!(matches!(bad.validate(), Err(DeligneError::RelationFailed { relation: "δA = dlog g", .. })));
        assert!(matches!(curving_for(&bad.g, &bad.a), Err(DeligneError::NotAConnection(_))));
        let rho: Vec<Rat> = (0..k.count(2)).map(|i| Rat::new((i as i64).into(), 7.into())).collect();
        let shifted = d.shift_curving(&rho);
        shifted.validate().unwrap();
        let dw: Vec<Rat> = d.three_curvature().unwrap().iter().zip(coboundary(&k, 2, &rho)).map(|(a, b)| a + b).collect();
        assert_eq!(shifted.three_curvature().unwrap(), dw);
    }

    #[test]
    fn connection_differences_are_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let k = space(ExampleSpace::Torus3);
        let g = generator(&k);
        let a = connection_for(&g).unwrap();
        let other = a.add(&BiCochain::<Rat>::from_fn(k.clone(), 0, 1, |_, _| Rat::from_integer(rng.gen_range(-3..4).into())).cech_delta());
        let diff = a.sub(&other);
        assert!(diff.cech_delta().is_zero());
        assert_eq!(diff.contraction_k().unwrap().cech_delta(), diff);
        curving_for(&g, &other).unwrap();
    }

    #[test]
    fn tensor_with_dual_trivializes() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let k = space(ExampleSpace::Torus3);
        let g = generator(&k);
        let gauge = gauge_from_fn(
            k.clone(),
            |_, _| Rat::new(rng.gen_range(-5..6).into(), 3.into()),
            |s, v| Int::from(((s + v) % 3) as i64 - 1),
        );
        let d1 = DeligneCocycle::connect(g.clone()).unwrap();
        let k1 = BiCochain::from_fn(k.clone(), 0, 1, |s, r| Rat::new(((s * 7 + r) % 5).into(), 4.into()));
        let d2 = d1.apply_gauge(&gauge, &k1).unwrap();
        d2.validate().unwrap();
        // the canonical triple of the gauged gerbe may differ by a flat class, but stays valid
        DeligneCocycle::connect(g.apply_gauge(&gauge).unwrap()).unwrap().validate().unwrap();
        let t = d1.tensor(&d1.dual()).unwrap().trivialize().unwrap();
        t.verify(&d1.tensor(&d1.dual()).unwrap()).unwrap();
        let (eq, w) = deligne_equal(&d1, &d2).unwrap();
        assert!(eq && w.is_some());
    }

    #[test]
    fn curving_shifts() {
        let k = space(ExampleSpace::Torus3);
        let d = DeligneCocycle::connect(GerbeData::trivial(k.clone())).unwrap();
        let pres = cohomology_group(&k, 2, Ring::Z).unwrap();
        let gen2 = rq(&pres.free_generator(0));
        let half: Vec<Rat> = gen2.iter().map(|x| x / Rat::from_integer(2.into())).collect();
        let integral = d.shift_curving(&gen2);
        let non_integral = d.shift_curving(&half);
        assert!(deligne_equal(&d, &integral).unwrap().0);
        let (eq, _) = deligne_equal(&d, &non_integral).unwrap();
        assert!(!eq);
        assert!(matches!(
            d.tensor(&non_integral.dual()).unwrap().trivialize(),
            Err(DeligneError::NonzeroClass(DeligneObstruction::NonIntegralPeriods(_)))
        ));
        let y: Vec<Rat> = (0..k.count(1)).map(|i| Rat::new((i as i64 % 5).into(), 3.into())).collect();
        assert!(deligne_equal(&d, &d.shift_curving(&coboundary(&k, 1, &y))).unwrap().0);
        let non_closed: Vec<Rat> = (0..k.count(2)).map(|i| Rat::from_integer(((i == 0) as i64).into())).collect();
        assert!(matches!(
            d.shift_curving(&non_closed).trivialize(),
            Err(DeligneError::NonzeroClass(DeligneObstruction::NonExactResidual))
        ));
        assert_eq!(class_of(&k, 2, &pres.free_generator(0)).unwrap().free_coords()[0], Int::one());
    }
}
