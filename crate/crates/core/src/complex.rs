//! Finite abstract simplicial complexes.
//!
//! Vertices carry labels but are addressed internally by their position in
//! the complex's total order. A simplex is a strictly increasing vector of
//! such positions. Simplices of each dimension are kept sorted
//! lexicographically, and that order indexes every cochain in the crate.
//!
//! The complex doubles as the nerve of its own open-vertex-star cover: the
//! vertices `v0 < … < vp` span a simplex exactly when the open stars of the
//! `vi` meet, and the overlap is carried by the closed star `St(v0…vp)`.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::cohomology::GroupPresentation;
use crate::intlinalg::{Int, IntMatrix, SmithDecomposition};

pub type Simplex = Vec<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexError {
    #[error("invalid simplex {0}: {1}")]
    InvalidSimplex(String, &'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{0} is not a simplex of the complex")]
    NotASimplex(String),
    #[error("invalid simplicial map: {0}")]
    InvalidMap(String),
}

/// Vertex identifier. Integers order before strings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Int(i64),
    Str(String),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Int(i) => write!(f, "{i}"),
            Label::Str(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Label {
    fn from(v: i64) -> Self {
        Label::Int(v)
    }
}

impl From<&str> for Label {
    fn from(v: &str) -> Self {
        Label::Str(v.to_owned())
    }
}

/// Face-closed set of simplices of some parent complex, stored per dimension
/// as sorted global simplex indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subcomplex {
    cells: Vec<Vec<usize>>,
}

impl Subcomplex {
    /// Global indices of the `q`-simplices; empty when `q` exceeds the dimension.
    pub fn cells(&self, q: usize) -> &[usize] {
        self.cells.get(q).map_or(&[], Vec::as_slice)
    }

    /// Position of the global `q`-simplex `idx` within [`Self::cells`].
    pub fn position(&self, q: usize, idx: usize) -> Option<usize> {
        self.cells(q).binary_search(&idx).ok()
    }

    pub fn contains(&self, q: usize, idx: usize) -> bool {
        self.position(q, idx).is_some()
    }

    pub fn dimension(&self) -> usize {
        self.cells.len().saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Default, Clone)]
pub(crate) struct Caches {
    /// SNF of the coboundary `C^k -> C^{k+1}`, by `k`.
    pub coboundary_snf: Vec<OnceLock<Arc<SmithDecomposition>>>,
    /// Integer cohomology presentations, by degree.
    pub presentations: Vec<OnceLock<Arc<GroupPresentation>>>,
    /// Integer bases of the cycle groups `ker ∂_k`, by `k`.
    pub cycle_bases: Vec<OnceLock<Arc<Vec<Vec<Int>>>>>,
}

#[derive(Debug)]
pub struct Complex {
    labels: Vec<Label>,
    simplices: Vec<Vec<Simplex>>,
    lookup: Vec<HashMap<Simplex, usize>>,
    /// `faces[q][i][j]` is the index of the face of `simplices[q][i]` omitting vertex `j`.
    faces: Vec<Vec<Vec<usize>>>,
    maximal: Vec<Simplex>,
    fingerprint: u64,
    stars: OnceLock<Vec<Vec<Subcomplex>>>,
    pub(crate) caches: Caches,
}

impl PartialEq for Complex {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self, other)
            || self.fingerprint == other.fingerprint
            && self.labels == other.labels
            && self.simplices == other.simplices
    }
}

impl Eq for Complex {}

impl Clone for Complex {
    fn clone(&self) -> Self {
        Complex::from_indexed(self.labels.clone(), self.maximal.clone())
    }
}

impl Complex {
    /// Face closure of `maximal_simplices`, with vertices ordered by their labels.
    pub fn build<L: Into<Label> + Clone>(maximal_simplices: &[Vec<L>]) -> Result<Complex, ComplexError> {
        let tuples: Vec<Vec<Label>> =
            maximal_simplices.iter().map(|s| s.iter().cloned().map(Into::into).collect()).collect();
        let labels: BTreeSet<Label> = tuples.iter().flatten().cloned().collect();
        Complex::with_vertex_order(labels.into_iter().collect(), &tuples)
    }

    /// Face closure of `maximal_simplices` with an explicit vertex order.
    pub fn with_vertex_order(order: Vec<Label>, maximal_simplices: &[Vec<Label>]) -> Result<Complex, ComplexError> {
        let mut position = HashMap::new();
        for (i, l) in order.iter().enumerate() {
            if position.insert(l.clone(), i).is_some() {
                return Err(ComplexError::InvalidParameter(format!("vertex {l} listed twice")));
            }
        }
        let mut indexed = Vec::with_capacity(maximal_simplices.len());
        for t in maximal_simplices {
            let show = || format!("[{}]", t.iter().map(ToString::to_string).collect::<Vec<_>>().join(","));
            if t.is_empty() {
                return Err(ComplexError::InvalidSimplex(show(), "empty tuple"));
            }
            let mut s = Vec::with_capacity(t.len());
            for l in t {
                match position.get(l) {
                    Some(&i) => s.push(i),
                    None => return Err(ComplexError::InvalidSimplex(show(), "unknown vertex")),
                }
            }
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(ComplexError::InvalidSimplex(show(), "repeated vertex"));
            }
            indexed.push(s);
        }
        let used: BTreeSet<usize> = indexed.iter().flatten().copied().collect();
        if used.len() != order.len() {
            let missing = (0..order.len()).find(|i| !used.contains(i)).unwrap();
            return Err(ComplexError::InvalidParameter(format!(
                "vertex {} lies in no simplex",
                order[missing]
            )));
        }
        Ok(Complex::from_indexed(order, indexed))
    }

    fn from_indexed(labels: Vec<Label>, generators: Vec<Simplex>) -> Complex {
        let mut by_dim: Vec<BTreeSet<Simplex>> = Vec::new();
        for g in &generators {
            let n = g.len();
            for mask in 1u64..(1u64 << n) {
                let face: Simplex = (0..n).filter(|b| mask & (1 << b) != 0).map(|b| g[b]).collect();
                let q = face.len() - 1;
                if by_dim.len() <= q {
                    by_dim.resize_with(q + 1, BTreeSet::new);
                }
                by_dim[q].insert(face);
            }
        }
        let simplices: Vec<Vec<Simplex>> = by_dim.into_iter().map(|s| s.into_iter().collect()).collect();
        let lookup: Vec<HashMap<Simplex, usize>> = simplices
            .iter()
            .map(|level| level.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
        let faces: Vec<Vec<Vec<usize>>> = simplices
            .iter()
            .enumerate()
            .map(|(q, level)| {
                if q == 0 {
                    return vec![Vec::new(); level.len()];
                }
                level
                    .iter()
                    .map(|s| {
                        (0..s.len())
                            .map(|j| {
                                let f: Simplex = s.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &v)| v).collect();
                                lookup[q - 1][&f]
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut is_face = vec![Vec::new(); simplices.len()];
        for (q, level) in simplices.iter().enumerate() {
            is_face[q] = vec![false; level.len()];
        }
        for q in 1..simplices.len() {
            for f in &faces[q] {
                for &i in f {
                    is_face[q - 1][i] = true;
                }
            }
        }
        let mut maximal = Vec::new();
        for (q, level) in simplices.iter().enumerate() {
            for (i, s) in level.iter().enumerate() {
                if !is_face[q][i] {
                    maximal.push(s.clone());
                }
            }
        }
        maximal.sort();
        let mut h = DefaultHasher::new();
        labels.hash(&mut h);
        maximal.hash(&mut h);
        let fingerprint = h.finish();
        let dims = simplices.len();
        Complex {
            labels,
            simplices,
            lookup,
            faces,
            maximal,
            fingerprint,
            stars: OnceLock::new(),
            caches: Caches {
                // a few degrees past the top, where groups vanish but are still asked for
                coboundary_snf: (0..dims + 4).map(|_| OnceLock::new()).collect(),
                presentations: (0..dims + 4).map(|_| OnceLock::new()).collect(),
                cycle_bases: (0..dims + 4).map(|_| OnceLock::new()).collect(),
            },
        }
    }

    pub fn dimension(&self) -> usize {
        self.simplices.len() - 1
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &Label {
        &self.labels[v]
    }

    pub fn vertex_index(&self, label: &Label) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Stable hash of vertex order and maximal simplices.
    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// The `q`-simplices in canonical order; empty beyond the dimension.
    pub fn simplices(&self, q: usize) -> &[Simplex] {
        self.simplices.get(q).map_or(&[], Vec::as_slice)
    }

    pub fn count(&self, q: usize) -> usize {
        self.simplices(q).len()
    }

    pub fn simplex(&self, q: usize, i: usize) -> &Simplex {
        &self.simplices[q][i]
    }

    pub fn index_of(&self, s: &[usize]) -> Option<usize> {
        if s.is_empty() {
            return None;
        }
        self.lookup.get(s.len() - 1)?.get(s).copied()
    }

    /// Indices of the codimension-one faces, the `j`-th omitting vertex `j`.
    pub fn faces(&self, q: usize, i: usize) -> &[usize] {
        &self.faces[q][i]
    }

    pub fn maximal_simplices(&self) -> &[Simplex] {
        &self.maximal
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.simplices.iter().enumerate().map(|(q, l)| if q % 2 == 0 { l.len() as i64 } else { -(l.len() as i64) }).sum()
    }

    pub fn format_simplex(&self, s: &[usize]) -> String {
        let parts: Vec<String> = s.iter().map(|&v| self.labels[v].to_string()).collect();
        format!("<{}>", parts.join(","))
    }

    /// Closed star `St(σ) = {τ : τ ∪ σ ∈ K}` of the `q`-simplex with index `i`.
    pub fn star_of(&self, q: usize, i: usize) -> &Subcomplex {
        &self.stars.get_or_init(|| self.compute_stars())[q][i]
    }

    /// Closed star of a simplex given as a vertex tuple (in any order).
    pub fn star(&self, sigma: &[usize]) -> Result<&Subcomplex, ComplexError> {
        let mut s = sigma.to_vec();
        s.sort_unstable();
        match self.index_of(&s) {
            Some(i) if s.windows(2).all(|w| w[0] < w[1]) => Ok(self.star_of(s.len() - 1, i)),
            _ => Err(ComplexError::NotASimplex(format!("{sigma:?}"))),
        }
    }

    fn compute_stars(&self) -> Vec<Vec<Subcomplex>> {
        // faces of each maximal simplex, as (dim, index)
        let mut max_faces: Vec<Vec<(usize, usize)>> = Vec::with_capacity(self.maximal.len());
        let mut by_vertex: Vec<Vec<usize>> = vec![Vec::new(); self.num_vertices()];
        for (m, g) in self.maximal.iter().enumerate() {
            let n = g.len();
            let mut list = Vec::with_capacity((1 << n) - 1);
            for mask in 1u64..(1u64 << n) {
                let face: Simplex = (0..n).filter(|b| mask & (1 << b) != 0).map(|b| g[b]).collect();
                list.push((face.len() - 1, self.lookup[face.len() - 1][&face]));
            }
            max_faces.push(list);
            by_vertex[g[0]].push(m);
            for &v in &g[1..] {
                by_vertex[v].push(m);
            }
        }
        self.simplices
            .iter()
            .map(|level| {
                level
                    .iter()
                    .map(|s| {
                        let mut cells: Vec<Vec<usize>> = vec![Vec::new(); self.simplices.len()];
                        for &m in &by_vertex[s[0]] {
                            let g = &self.maximal[m];
                            if s.iter().all(|v| g.binary_search(v).is_ok()) {
                                for &(q, idx) in &max_faces[m] {
                                    cells[q].push(idx);
                                }
                            }
                        }
                        for c in &mut cells {
                            c.sort_unstable();
                            c.dedup();
                        }
                        while cells.last().is_some_and(Vec::is_empty) {
                            cells.pop();
                        }
                        Subcomplex { cells }
                    })
                    .collect()
            })
            .collect()
    }

    /// Matrix of `∂: C_dim -> C_{dim-1}`; rows are `(dim-1)`-simplices, columns `dim`-simplices.
    pub fn boundary_matrix(&self, dim: usize) -> Result<IntMatrix, ComplexError> {
        if dim == 0 || dim > self.dimension() {
            return Err(ComplexError::InvalidParameter(format!(
                "boundary dimension {dim} outside 1..={}",
                self.dimension()
            )));
        }
        let mut m = IntMatrix::zeros(self.count(dim - 1), self.count(dim));
        for i in 0..self.count(dim) {
            for (j, &f) in self.faces[dim][i].iter().enumerate() {
                m.set(f, i, if j % 2 == 0 { Int::from(1) } else { Int::from(-1) });
            }
        }
        Ok(m)
    }

    /// Matrix of the simplicial coboundary `C^k -> C^{k+1}` (zero rows past the top dimension).
    pub fn coboundary_matrix(&self, k: usize) -> IntMatrix {
        if k >= self.dimension() {
            return IntMatrix::zeros(0, self.count(k));
        }
        self.boundary_matrix(k + 1).expect("in range").transpose()
    }

    pub fn vertex_tuple(&self, labels: &[Label]) -> Result<Simplex, ComplexError> {
        labels
            .iter()
            .map(|l| self.vertex_index(l).ok_or_else(|| ComplexError::NotASimplex(format!("unknown vertex {l}"))))
            .collect()
    }
}

/// Sorts a vertex tuple, returning the sign of the sorting permutation,
/// or `None` when a vertex repeats.
pub fn sort_with_sign(tuple: &[usize]) -> Option<(Simplex, i32)> {
    let mut s = tuple.to_vec();
    let mut sign = 1;
    // insertion sort, counting transpositions
    for i in 1..s.len() {
        let mut j = i;
        while j > 0 && s[j - 1] > s[j] {
            s.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if s.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((s, sign))
    }
}

/// Named test spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExampleSpace {
    /// Boundary of the `(n+1)`-simplex.
    Sphere(usize),
    /// The `m`-gon.
    Circle(usize),
    /// Six-vertex real projective plane.
    Rp2,
    Torus2,
    Torus3,
    Rp2xS1,
}

impl ExampleSpace {
    pub fn name(&self) -> String {
        match self {
            ExampleSpace::Sphere(n) => format!("sphere{n}"),
            ExampleSpace::Circle(m) => format!("circle{m}"),
            ExampleSpace::Rp2 => "rp2".into(),
            ExampleSpace::Torus2 => "torus2".into(),
            ExampleSpace::Torus3 => "torus3".into(),
            ExampleSpace::Rp2xS1 => "rp2_x_s1".into(),
        }
    }

    pub fn parse(name: &str) -> Option<ExampleSpace> {
        match name {
            "rp2" => Some(ExampleSpace::Rp2),
            "torus2" => Some(ExampleSpace::Torus2),
            "torus3" => Some(ExampleSpace::Torus3),
            "rp2_x_s1" => Some(ExampleSpace::Rp2xS1),
            _ => {
                if let Some(n) = name.strip_prefix("sphere") {
                    n.parse().ok().map(ExampleSpace::Sphere)
                } else if let Some(m) = name.strip_prefix("circle") {
                    m.parse().ok().map(ExampleSpace::Circle)
                } else {
                    None
                }
            }
        }
    }
}

const RP2_TRIANGLES: [[i64; 3]; 10] = [
    [0, 1, 2],
    [0, 2, 3],
    [0, 3, 4],
    [0, 4, 5],
    [0, 1, 5],
    [1, 2, 4],
    [2, 3, 5],
    [1, 3, 4],
    [2, 4, 5],
    [1, 3, 5],
];

pub fn example_complex(space: ExampleSpace) -> Result<Complex, ComplexError> {
    match space {
        ExampleSpace::Sphere(n) => {
            if n == 0 {
                return Err(ComplexError::InvalidParameter("sphere dimension must be at least 1".into()));
            }
            let all: Vec<i64> = (0..=(n as i64 + 1)).collect();
            let facets: Vec<Vec<i64>> =
                (0..all.len()).map(|skip| all.iter().copied().filter(|&v| v != skip as i64).collect()).collect();
            Complex::build(&facets)
        }
        ExampleSpace::Circle(m) => {
            if m < 3 {
                return Err(ComplexError::InvalidParameter(format!("circle needs at least 3 vertices, got {m}")));
            }
            let m = m as i64;
            let edges: Vec<Vec<i64>> = (0..m).map(|i| vec![i, (i + 1) % m]).collect();
            Complex::build(&edges)
        }
        ExampleSpace::Rp2 => {
            let tris: Vec<Vec<i64>> = RP2_TRIANGLES.iter().map(|t| t.to_vec()).collect();
            Complex::build(&tris)
        }
        ExampleSpace::Torus2 => {
            let c = example_complex(ExampleSpace::Circle(3))?;
            Ok(simplicial_product(&c, &c))
        }
        ExampleSpace::Torus3 => {
            let c = example_complex(ExampleSpace::Circle(3))?;
            Ok(simplicial_product(&simplicial_product(&c, &c), &c))
        }
        ExampleSpace::Rp2xS1 => {
            let p = example_complex(ExampleSpace::Rp2)?;
            let c = example_complex(ExampleSpace::Circle(3))?;
            Ok(simplicial_product(&p, &c))
        }
    }
}

/// Staircase triangulation of `|a| × |b|`. Vertex `(i, j)` gets position
/// `i * |b| + j`, i.e. lexicographic order, and label `"{a_i}x{b_j}"`.
pub fn simplicial_product(a: &Complex, b: &Complex) -> Complex {
    let nb = b.num_vertices();
    let labels: Vec<Label> = a
        .labels
        .iter()
        .flat_map(|x| b.labels.iter().map(move |y| Label::Str(format!("{x}x{y}"))))
        .collect();
    let mut generators = Vec::new();
    for s in &a.maximal {
        for t in &b.maximal {
            let (p, q) = (s.len() - 1, t.len() - 1);
            // lattice paths from (0,0) to (p,q): choose which of the p+q steps go right
            for mask in 0u64..(1u64 << (p + q)) {
                if mask.count_ones() as usize != p {
                    continue;
                }
                let (mut i, mut j) = (0, 0);
                let mut chain = vec![s[0] * nb + t[0]];
                for step in 0..p + q {
                    if mask & (1 << step) != 0 {
                        i += 1;
                    } else {
                        j += 1;
                    }
                    chain.push(s[i] * nb + t[j]);
                }
                generators.push(chain);
            }
        }
    }
    Complex::from_indexed(labels, generators)
}

/// Simplicial map given by a function on vertex positions.
#[derive(Debug, Clone)]
pub struct SimplicialMap {
    source: Arc<Complex>,
    target: Arc<Complex>,
    vertex_map: Vec<usize>,
}

impl SimplicialMap {
    pub fn new(source: Arc<Complex>, target: Arc<Complex>, vertex_map: Vec<usize>) -> Result<Self, ComplexError> {
        if vertex_map.len() != source.num_vertices() {
            return Err(ComplexError::InvalidMap(format!(
                "vertex map has {} entries for {} vertices",
                vertex_map.len(),
                source.num_vertices()
            )));
        }
        if let Some(&v) = vertex_map.iter().find(|&&v| v >= target.num_vertices()) {
            return Err(ComplexError::InvalidMap(format!("image vertex {v} out of range")));
        }
        for s in &source.maximal {
            let mut image: Vec<usize> = s.iter().map(|&v| vertex_map[v]).collect();
            image.sort_unstable();
            image.dedup();
            if target.index_of(&image).is_none() {
                return Err(ComplexError::InvalidMap(format!(
                    "image of {} is not a simplex",
                    source.format_simplex(s)
                )));
            }
        }
        Ok(SimplicialMap { source, target, vertex_map })
    }

    pub fn identity(k: Arc<Complex>) -> Self {
        let n = k.num_vertices();
        SimplicialMap { source: k.clone(), target: k, vertex_map: (0..n).collect() }
    }

    /// Collapses the whole source onto the target vertex `v`.
    pub fn constant(source: Arc<Complex>, target: Arc<Complex>, v: usize) -> Result<Self, ComplexError> {
        let n = source.num_vertices();
        SimplicialMap::new(source, target, vec![v; n])
    }

    /// The two projections of `product = simplicial_product(a, b)`.
    pub fn product_projections(
        product: Arc<Complex>,
        a: Arc<Complex>,
        b: Arc<Complex>,
    ) -> Result<(Self, Self), ComplexError> {
        let nb = b.num_vertices();
        let n = product.num_vertices();
        if n != a.num_vertices() * nb {
            return Err(ComplexError::InvalidMap("vertex count is not a product".into()));
        }
        let first = SimplicialMap::new(product.clone(), a, (0..n).map(|v| v / nb).collect())?;
        let second = SimplicialMap::new(product, b, (0..n).map(|v| v % nb).collect())?;
        Ok((first, second))
    }

    pub fn source(&self) -> &Arc<Complex> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Complex> {
        &self.target
    }

    pub fn vertex_map(&self) -> &[usize] {
        &self.vertex_map
    }

    pub fn apply(&self, v: usize) -> usize {
        self.vertex_map[v]
    }

    /// Image of a source simplex as a sorted target simplex index with the
    /// orientation sign, or `None` if the image is degenerate.
    pub fn image(&self, s: &[usize]) -> Option<(usize, i32)> {
        let img: Vec<usize> = s.iter().map(|&v| self.vertex_map[v]).collect();
        let (sorted, sign) = sort_with_sign(&img)?;
        Some((self.target.index_of(&sorted).expect("simplicial map"), sign))
    }

    /// Pullback of an integer or rational `k`-cochain on the target.
    pub fn pullback_cochain<R>(&self, k: usize, c: &[R]) -> Vec<R>
    where
        R: Clone + num_traits::Zero + std::ops::Neg<Output = R>,
    {
        self.source
            .simplices(k)
            .iter()
            .map(|s| match self.image(s) {
                Some((i, 1)) => c[i].clone(),
                Some((i, _)) => -c[i].clone(),
                None => R::zero(),
            })
            .collect()
    }

    /// True when the vertex map is weakly order preserving.
    pub fn is_monotone(&self) -> bool {
        let n = self.source.num_vertices();
        (1..n).all(|v| self.vertex_map[v - 1] <= self.vertex_map[v])
    }
}
