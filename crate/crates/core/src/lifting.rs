//! Lifting gerbes of principal bundles with finite structure group.
//!
//! A central extension `1 → U(1) → Ĝ → G → 1` is given by a normalized
//! rational 2-cocycle `ε` on `G` (values in turns, cocycle identity mod 1).
//! A bundle is a `G`-valued transition function on the edges. Its lifting
//! gerbe has the constant phase `ε(t₀₁, t₁₂)` on the star of each triangle.
//!
//! A lift is a Čech 1-cochain `λ` of rational local phases, one per edge
//! star, with `δλ + ε(t₀₁, t₁₂)` an integer constant on every triangle star.

use std::sync::Arc;

use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::cech::{BiCochain, CechError};
use crate::cohomology::{class_of, coboundary, coboundary_snf, ClassHk};
use crate::complex::{Complex, SimplicialMap};
use crate::gerbe::{CircleCochain, GerbeData, GerbeError};
use crate::intlinalg::{Int, Rat};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LiftingError {
    #[error("group axiom fails: {0}")]
    GroupAxiom(String),
    #[error("extension cocycle fails: {0}")]
    ExtensionAxiom(String),
    #[error("transition functions violate the cocycle condition on {0}")]
    CocycleViolation(String),
    #[error("invalid bundle: {0}")]
    InvalidBundle(String),
    #[error("bundle and extension use different groups")]
    GroupMismatch,
    #[error(transparent)]
    Gerbe(#[from] GerbeError),
    #[error(transparent)]
    Cech(#[from] CechError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    elements: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    /// Validates a multiplication table: closure, associativity, identity, inverses.
    pub fn new(elements: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self, LiftingError> {
        let n = elements.len();
        if n == 0 {
            return Err(LiftingError::GroupAxiom("empty group".into()));
        }
        if table.len() != n || table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return Err(LiftingError::GroupAxiom("table is not a closed n×n table".into()));
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(LiftingError::GroupAxiom(format!(
                            "associativity fails for ({},{},{})",
                            elements[a], elements[b], elements[c]
                        )));
                    }
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| LiftingError::GroupAxiom("no identity".into()))?;
        let inverses = (0..n)
            .map(|a| {
                (0..n)
                    .find(|&b| table[a][b] == identity && table[b][a] == identity)
                    .ok_or_else(|| LiftingError::GroupAxiom(format!("{} has no inverse", elements[a])))
            })
            .collect::<Result<_, _>>()?;
        Ok(FiniteGroup { elements, table, identity, inverses })
    }

    /// `ℤ/n` with elements `"0"…"n-1"`.
    pub fn cyclic(n: usize) -> Self {
        let elements = (0..n).map(|i| i.to_string()).collect();
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        FiniteGroup::new(elements, table).expect("cyclic group")
    }

    /// `ℤ/2 × ℤ/2` with elements `"00","10","01","11"` (index = a + 2b).
    pub fn klein() -> Self {
        let elements = ["00", "10", "01", "11"].iter().map(|s| s.to_string()).collect();
        let table = (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect();
        FiniteGroup::new(elements, table).expect("Klein group")
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn element_index(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == name)
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverses[a]
    }
}

/// `G ×_ε U(1)` presented by a normalized rational 2-cocycle.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralExtension {
    group: FiniteGroup,
    epsilon: Vec<Vec<Rat>>,
}

impl CentralExtension {
    pub fn new(group: FiniteGroup, epsilon: Vec<Vec<Rat>>) -> Result<Self, LiftingError> {
        let e = CentralExtension { group, epsilon };
        e.validate()?;
        Ok(e)
    }

    pub fn split(group: FiniteGroup) -> Self {
        let n = group.order();
        CentralExtension { group, epsilon: vec![vec![Rat::zero(); n]; n] }
    }

    /// `ε(a, b) = f(a, b)` on element indices.
    pub fn from_fn(group: FiniteGroup, f: impl Fn(usize, usize) -> Rat) -> Result<Self, LiftingError> {
        let n = group.order();
        let epsilon = (0..n).map(|a| (0..n).map(|b| f(a, b)).collect()).collect();
        CentralExtension::new(group, epsilon)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn epsilon(&self, a: usize, b: usize) -> &Rat {
        &self.epsilon[a][b]
    }

    /// Normalization and the cocycle identity mod 1.
    pub fn validate(&self) -> Result<(), LiftingError> {
        let g = &self.group;
        let n = g.order();
        if self.epsilon.len() != n || self.epsilon.iter().any(|r| r.len() != n) {
            return Err(LiftingError::ExtensionAxiom("ε must be an n×n table".into()));
        }
        let e = g.identity();
        for a in 0..n {
            if !self.epsilon[e][a].is_zero() || !self.epsilon[a][e].is_zero() {
                return Err(LiftingError::ExtensionAxiom(format!("not normalized at {}", g.elements[a])));
            }
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let lhs = &self.epsilon[a][b] + &self.epsilon[g.mul(a, b)][c];
                    let rhs = &self.epsilon[b][c] + &self.epsilon[a][g.mul(b, c)];
                    if !(lhs - rhs).is_integer() {
                        return Err(LiftingError::ExtensionAxiom(format!(
                            "cocycle identity fails for ({},{},{})",
                            g.elements[a], g.elements[b], g.elements[c]
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A `G`-bundle: transition element per edge `(v₀ < v₁)`; the reverse edge carries the inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalBundleData {
    base: Arc<Complex>,
    group: FiniteGroup,
    transition: Vec<usize>,
}

impl PrincipalBundleData {
    pub fn new(base: Arc<Complex>, group: FiniteGroup, transition: Vec<usize>) -> Result<Self, LiftingError> {
        let b = PrincipalBundleData { base, group, transition };
        b.validate()?;
        Ok(b)
    }

    pub fn trivial(base: Arc<Complex>, group: FiniteGroup) -> Self {
        let transition = vec![group.identity(); base.count(1)];
        PrincipalBundleData { base, group, transition }
    }

    pub fn base(&self) -> &Arc<Complex> {
        &self.base
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn transitions(&self) -> &[usize] {
        &self.transition
    }

    /// Transition from `u` to `v` (either orientation); identity when `u = v`.
    pub fn transition(&self, u: usize, v: usize) -> usize {
        if u == v {
            return self.group.identity();
        }
        let (a, b) = (u.min(v), u.max(v));
        let t = self.transition[self.base.index_of(&[a, b]).expect("edge of the base")];
        if u < v {
            t
        } else {
            self.group.inv(t)
        }
    }

    /// `t(v₀v₁)·t(v₁v₂) = t(v₀v₂)` on every triangle.
    pub fn validate(&self) -> Result<(), LiftingError> {
        let k = &self.base;
        if self.transition.len() != k.count(1) || self.transition.iter().any(|&t| t >= self.group.order()) {
            return Err(LiftingError::InvalidBundle("one group element per edge is required".into()));
        }
        for s in k.simplices(2) {
            let lhs = self.group.mul(self.transition(s[0], s[1]), self.transition(s[1], s[2]));
            if lhs != self.transition(s[0], s[2]) {
                return Err(LiftingError::CocycleViolation(k.format_simplex(s)));
            }
        }
        Ok(())
    }

    /// Transition functions composed with a simplicial map into the base.
    pub fn pullback(&self, map: &SimplicialMap) -> Result<Self, LiftingError> {
        if **map.target() != *self.base {
            return Err(LiftingError::InvalidBundle("map does not land in the bundle's base".into()));
        }
        let src = map.source().clone();
        let transition = src.simplices(1).iter().map(|e| self.transition(map.apply(e[0]), map.apply(e[1]))).collect();
        PrincipalBundleData::new(src, self.group.clone(), transition)
    }
}

/// Rational local phases per edge star.
#[derive(Debug, Clone, PartialEq)]
pub struct Lift {
    pub phase: BiCochain<Rat>,
}

fn check_pair(b: &PrincipalBundleData, e: &CentralExtension) -> Result<(), LiftingError> {
    if b.group != e.group {
        return Err(LiftingError::GroupMismatch);
    }
    b.validate()?;
    e.validate()
}

/// The 2-cochain `σ ↦ ε(t₀₁, t₁₂)`.
pub fn pulled_back_epsilon(b: &PrincipalBundleData, e: &CentralExtension) -> Vec<Rat> {
    b.base
        .simplices(2)
        .iter()
        .map(|s| e.epsilon(b.transition(s[0], s[1]), b.transition(s[1], s[2])).clone())
        .collect()
}

pub fn lifting_gerbe(b: &PrincipalBundleData, e: &CentralExtension) -> Result<GerbeData, LiftingError> {
    check_pair(b, e)?;
    let phases = pulled_back_epsilon(b, e);
    Ok(GerbeData::new(CircleCochain::constant(b.base.clone(), 2, &phases))?)
}

pub fn lifting_obstruction(b: &PrincipalBundleData, e: &CentralExtension) -> Result<ClassHk, LiftingError> {
    Ok(lifting_gerbe(b, e)?.dd_class()?)
}

impl Lift {
    /// Checks that `δλ + ε(t₀₁, t₁₂)` is an integer constant on every triangle star.
    pub fn verify(&self, b: &PrincipalBundleData, e: &CentralExtension) -> bool {
        if self.phase.bidegree() != (1, 0) || self.phase.base() != &b.base {
            return false;
        }
        let eps = pulled_back_epsilon(b, e);
        let defect = self.phase.cech_delta().add(&BiCochain::constant(b.base.clone(), 2, &eps));
        (0..b.base.count(2)).all(|s| {
            let vals = defect.local(s);
            vals.iter().all(|v| v.is_integer() && *v == vals[0])
        })
    }
}

/// Solves the lifted cocycle condition directly: find integers `m` with
/// `δm = δε_t`, then contract `m − ε_t`.
pub fn find_lift(b: &PrincipalBundleData, e: &CentralExtension) -> Result<Option<Lift>, LiftingError> {
    check_pair(b, e)?;
    let k = &b.base;
    let eps = pulled_back_epsilon(b, e);
    let target: Vec<Int> = coboundary(k, 2, &eps)
        .into_iter()
        .map(|x| {
            assert!(x.is_integer(), "ε satisfies the cocycle identity mod 1");
            x.to_integer()
        })
        .collect();
    let m = if k.count(3) == 0 {
        vec![Int::zero(); k.count(2)]
    } else {
        match coboundary_snf(k, 2).solve(&target).expect("shape") {
            Some(m) => m,
            None => return Ok(None),
        }
    };
    let rest: Vec<Rat> = m.iter().zip(&eps).map(|(m, e)| Rat::from_integer(m.clone()) - e).collect();
    let phase = BiCochain::constant(k.clone(), 2, &rest).contraction_k()?;
    let lift = Lift { phase };
    assert!(lift.verify(b, e), "constructed lift must verify");
    Ok(Some(lift))
}

/// Generators of the `ℤ/n`-valued simplicial 1-cocycles (as integer vectors mod n).
pub fn cyclic_cocycle_generators(k: &Complex, n: u32) -> Vec<Vec<Int>> {
    let n = Int::from(n);
    let snf = coboundary_snf(k, 1);
    let cols = k.count(1);
    (0..cols)
        .map(|i| {
            let scale = match snf.diagonal.get(i) {
                Some(d) => &n / d.gcd(&n),
                None => Int::one(),
            };
            snf.v.column(i).into_iter().map(|x| (x * &scale).mod_floor(&n)).collect()
        })
        .filter(|v: &Vec<Int>| v.iter().any(|x| !x.is_zero()))
        .collect()
}

/// Class of `δε_t` read as an integer 3-cocycle; equals the obstruction.
pub fn bockstein_class(b: &PrincipalBundleData, e: &CentralExtension) -> Result<ClassHk, LiftingError> {
    let eps = pulled_back_epsilon(b, e);
    let z: Vec<Int> = coboundary(&b.base, 2, &eps).into_iter().map(|x| x.to_integer()).collect();
    Ok(class_of(&b.base, 3, &z).map_err(GerbeError::from)?)
}
