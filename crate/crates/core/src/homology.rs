//! Squarefree divisor complexes, reduced homology and Betti numbers of
//! semigroup rings.
//!
//! `beta_{i,lambda}(K[S]) = dim H~_{i-1}(Delta(lambda); K)` where `Delta(lambda)`
//! has as faces the sets `T` of generator indices with `lambda - sum_T g` in `S`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::eqp::{degree_of, QuasiPolynomial};
use crate::factor::{factorizations_capped, FactorError};
use crate::numsg::{NumsgError, SemigroupView};
use crate::polyfam::{FamilyError, ParametricFamily};

pub const MAX_VERTICES: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomologyError {
    #[error("the void complex has no reduced homology")]
    EmptyComplex,
    #[error("face contains vertex {vertex} but the complex has {vertices} vertices")]
    VertexOutOfRange { vertex: usize, vertices: usize },
    #[error("at most {MAX_VERTICES} vertices are supported, got {0}")]
    TooManyVertices(usize),
    #[error("face set is not closed under taking subsets")]
    NotClosed,
    #[error("{0:?} is not in the semigroup")]
    NotMember(Vec<u64>),
    #[error("generators must be nonzero vectors of one common dimension")]
    InvalidGenerators,
    #[error("a degree cap is required when the semigroup has dimension > 1")]
    MissingCap,
    #[error("homological index must be at least 1")]
    InvalidIndex,
    #[error("invalid field `{0}`: use q, f2, f3, f<p> for a prime p")]
    InvalidField(String),
    #[error("degree must be even, got {0}")]
    OddDegree(u32),
    #[error("parameter n = {0} is too small")]
    SmallParameter(u64),
    #[error("generator value overflows 64 bits")]
    Overflow,
    #[error("verification failed at mu = {mu}: {check}")]
    VerificationFailed { mu: u64, check: String },
    #[error("bound violated: {0}")]
    BoundViolation(String),
    #[error(transparent)]
    Semigroup(#[from] NumsgError),
    #[error(transparent)]
    Factor(#[from] FactorError),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldSpec {
    Rationals,
    PrimeField(u64),
}

impl FieldSpec {
    pub fn prime(p: u64) -> Result<Self, HomologyError> {
        if is_prime(p) {
            Ok(FieldSpec::PrimeField(p))
        } else {
            Err(HomologyError::InvalidField(format!("f{p}")))
        }
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

impl FromStr for FieldSpec {
    type Err = HomologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        if t == "q" || t == "qq" || t == "rationals" {
            return Ok(FieldSpec::Rationals);
        }
        let digits = t
            .strip_prefix("gf")
            .or_else(|| t.strip_prefix('f'))
            .ok_or_else(|| HomologyError::InvalidField(s.to_string()))?;
        let p = digits
            .parse::<u64>()
            .map_err(|_| HomologyError::InvalidField(s.to_string()))?;
        FieldSpec::prime(p).map_err(|_| HomologyError::InvalidField(s.to_string()))
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Rationals => write!(f, "q"),
            FieldSpec::PrimeField(p) => write!(f, "f{p}"),
        }
    }
}

/// Lexicographic order on equal-size vertex sets, as masks.
fn lex_cmp(a: u32, b: u32) -> std::cmp::Ordering {
    if a == b {
        return std::cmp::Ordering::Equal;
    }
    let d = a ^ b;
    let low = d & d.wrapping_neg();
    if a & low != 0 {
        std::cmp::Ordering::Less
    } else {
        std::cmp::Ordering::Greater
    }
}

fn face_order(a: &u32, b: &u32) -> std::cmp::Ordering {
    a.count_ones().cmp(&b.count_ones()).then(lex_cmp(*a, *b))
}

fn mask_vertices(mask: u32) -> Vec<usize> {
    (0..32).filter(|v| mask >> v & 1 == 1).collect()
}

/// Abstract simplicial complex on vertices `0..k`; faces are stored as bitmasks
/// sorted by size and then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SimplicialComplex {
    vertices: usize,
    faces: Vec<u32>,
}

impl SimplicialComplex {
    /// Checks that `faces` (0-based vertex lists) are closed under subsets.
    pub fn new(vertices: usize, faces: impl IntoIterator<Item = Vec<usize>>) -> Result<Self, HomologyError> {
        if vertices > MAX_VERTICES {
            return Err(HomologyError::TooManyVertices(vertices));
        }
        let mut masks = Vec::new();
        for face in faces {
            let mut m = 0u32;
            for v in face {
                if v >= vertices {
                    return Err(HomologyError::VertexOutOfRange { vertex: v, vertices });
                }
                m |= 1 << v;
            }
            masks.push(m);
        }
        Self::from_masks(vertices, masks)
    }

    /// Smallest complex containing every facet.
    pub fn generated_by(vertices: usize, facets: &[Vec<usize>]) -> Result<Self, HomologyError> {
        let mut all = Vec::new();
        for f in facets {
            let n = f.len();
            for sub in 0u32..(1 << n) {
                all.push((0..n).filter(|i| sub >> i & 1 == 1).map(|i| f[i]).collect());
            }
        }
        Self::new(vertices, all)
    }

    pub(crate) fn from_masks(vertices: usize, mut masks: Vec<u32>) -> Result<Self, HomologyError> {
        masks.sort_by(face_order);
        masks.dedup();
        let set: std::collections::HashSet<u32> = masks.iter().copied().collect();
        for &m in &masks {
            let mut rest = m;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                if !set.contains(&(m ^ bit)) {
                    return Err(HomologyError::NotClosed);
                }
                rest ^= bit;
            }
        }
        Ok(SimplicialComplex { vertices, faces: masks })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    /// The complex with no faces at all, not even the empty one.
    pub fn is_void(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn faces(&self) -> Vec<Vec<usize>> {
        self.faces.iter().map(|&m| mask_vertices(m)).collect()
    }

    pub fn contains_face(&self, face: &[usize]) -> bool {
        let m = face.iter().fold(0u32, |m, &v| m | 1 << v);
        self.faces.binary_search_by(|f| face_order(f, &m)).is_ok()
    }

    /// `-1` for `{emptyset}`.
    pub fn dimension(&self) -> i64 {
        self.faces.last().map_or(-1, |f| f.count_ones() as i64 - 1)
    }

    /// `counts[q + 1]` is the number of `q`-dimensional faces.
    pub fn face_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; (self.dimension() + 2).max(0) as usize];
        for f in &self.faces {
            counts[f.count_ones() as usize] += 1;
        }
        counts
    }

    pub fn reduced_euler_characteristic(&self) -> i64 {
        self.face_counts()
            .iter()
            .enumerate()
            .map(|(s, &c)| if s % 2 == 1 { c as i64 } else { -(c as i64) })
            .sum()
    }

    /// Faces of dimension at most `q`.
    pub fn skeleton(&self, q: i64) -> SimplicialComplex {
        SimplicialComplex {
            vertices: self.vertices,
            faces: self
                .faces
                .iter()
                .copied()
                .filter(|f| (f.count_ones() as i64) <= q + 1)
                .collect(),
        }
    }

    fn faces_of_size(&self, s: u32) -> &[u32] {
        let lo = self.faces.partition_point(|f| f.count_ones() < s);
        let hi = self.faces.partition_point(|f| f.count_ones() <= s);
        &self.faces[lo..hi]
    }

    /// Matrix of the boundary map from `q`-faces to `(q-1)`-faces (the empty
    /// face for `q = 0`), rows indexed by `(q-1)`-faces. Removing the `j`-th
    /// smallest vertex carries the sign `(-1)^j`.
    pub fn boundary_matrix(&self, q: i64) -> Vec<Vec<i64>> {
        if q < 0 {
            return Vec::new();
        }
        let cols = self.faces_of_size(q as u32 + 1);
        let rows = self.faces_of_size(q as u32);
        let index: HashMap<u32, usize> = rows.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        let mut m = vec![vec![0i64; cols.len()]; rows.len()];
        for (c, &face) in cols.iter().enumerate() {
            for (j, v) in mask_vertices(face).into_iter().enumerate() {
                let r = index[&(face ^ (1 << v))];
                m[r][c] = if j % 2 == 0 { 1 } else { -1 };
            }
        }
        m
    }

    fn components(&self) -> usize {
        let verts: Vec<usize> = self.faces_of_size(1).iter().map(|f| f.trailing_zeros() as usize).collect();
        let mut parent: Vec<usize> = (0..self.vertices).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        let mut count = verts.len();
        for &e in self.faces_of_size(2) {
            let a = e.trailing_zeros() as usize;
            let b = 31 - e.leading_zeros() as usize;
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
                count -= 1;
            }
        }
        count
    }
}

/// Rank of an integer matrix over the field.
pub fn matrix_rank(m: &[Vec<i64>], field: FieldSpec) -> usize {
    match field {
        FieldSpec::Rationals => rank_rational(m),
        FieldSpec::PrimeField(p) => rank_mod_p(m, p),
    }
}

fn rank_mod_p(m: &[Vec<i64>], p: u64) -> usize {
    let p = p as i128;
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .map(|row| row.iter().map(|&x| (x as i128).rem_euclid(p)).collect())
        .collect();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..a.len()).find(|&r| a[r][c] != 0) else {
            continue;
        };
        a.swap(rank, piv);
        let inv = mod_inverse(a[rank][c], p);
        for x in a[rank].iter_mut() {
            *x = *x * inv % p;
        }
        for r in 0..a.len() {
            if r != rank && a[r][c] != 0 {
                let f = a[r][c];
                for j in c..cols {
                    a[r][j] = (a[r][j] - f * a[rank][j]).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn mod_inverse(a: i128, p: i128) -> i128 {
    let e = a.extended_gcd(&p);
    e.x.rem_euclid(p)
}

/// Fraction-free (Bareiss) elimination over the integers.
fn rank_rational(m: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| row.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let cols = a.first().map_or(0, Vec::len);
    let mut prev = BigInt::from(1);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..a.len()).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, piv);
        for r in rank + 1..a.len() {
            for j in c + 1..cols {
                let v = (&a[rank][c] * &a[r][j] - &a[r][c] * &a[rank][j]) / &prev;
                a[r][j] = v;
            }
            a[r][c] = BigInt::zero();
        }
        prev = a[rank][c].clone();
        rank += 1;
    }
    rank
}

/// `dims[q]` is `dim H~_q` for `q = 0..=dim`; `H~_{-1}` is reported by
/// [`reduced_homology_minus_one`].
pub fn reduced_homology_dims(c: &SimplicialComplex, field: FieldSpec) -> Result<Vec<usize>, HomologyError> {
    if c.is_void() {
        return Err(HomologyError::EmptyComplex);
    }
    let top = c.dimension().max(0);
    Ok((0..=top).map(|q| homology_in_degree(c, q, field)).collect())
}

/// `dim H~_{-1}`: 1 for `{emptyset}`, 0 otherwise.
pub fn reduced_homology_minus_one(c: &SimplicialComplex) -> Result<usize, HomologyError> {
    if c.is_void() {
        return Err(HomologyError::EmptyComplex);
    }
    Ok(usize::from(c.dimension() == -1))
}

fn homology_in_degree(c: &SimplicialComplex, q: i64, field: FieldSpec) -> usize {
    let faces = c.faces_of_size(q as u32 + 1).len();
    let rank_q = matrix_rank(&c.boundary_matrix(q), field);
    let rank_up = matrix_rank(&c.boundary_matrix(q + 1), field);
    faces - rank_q - rank_up
}

fn validate(gens: &[Vec<u64>]) -> Result<usize, HomologyError> {
    let dim = gens.first().map(Vec::len).ok_or(HomologyError::InvalidGenerators)?;
    if dim == 0 || gens.iter().any(|g| g.len() != dim || g.iter().all(|&x| x == 0)) {
        return Err(HomologyError::InvalidGenerators);
    }
    if gens.len() > MAX_VERTICES {
        return Err(HomologyError::TooManyVertices(gens.len()));
    }
    Ok(dim)
}

/// Memoized membership in an affine semigroup, by depth-first search on `lambda - g`.
#[derive(Debug, Clone)]
pub struct AffineMembership {
    gens: Vec<Vec<u64>>,
    memo: HashMap<Vec<u64>, bool>,
}

impl AffineMembership {
    pub fn new(gens: &[Vec<u64>]) -> Result<Self, HomologyError> {
        validate(gens)?;
        Ok(AffineMembership { gens: gens.to_vec(), memo: HashMap::new() })
    }

    pub fn contains(&mut self, lambda: &[u64]) -> bool {
        if lambda.iter().all(|&x| x == 0) {
            return true;
        }
        if let Some(&b) = self.memo.get(lambda) {
            return b;
        }
        let mut found = false;
        for i in 0..self.gens.len() {
            if self.gens[i].iter().zip(lambda).all(|(g, l)| g <= l) {
                let rest: Vec<u64> = lambda.iter().zip(&self.gens[i]).map(|(l, g)| l - g).collect();
                if self.contains(&rest) {
                    found = true;
                    break;
                }
            }
        }
        self.memo.insert(lambda.to_vec(), found);
        found
    }
}

pub fn affine_member(gens: &[Vec<u64>], lambda: &[u64]) -> Result<bool, HomologyError> {
    Ok(AffineMembership::new(gens)?.contains(lambda))
}

/// Faces with at most `max_size` vertices of the complex at `lambda`.
fn complex_masks(k: usize, max_size: u32, mut is_face: impl FnMut(u32) -> bool) -> Vec<u32> {
    let mut faces = vec![0u32];
    // Grow faces one vertex at a time, keeping the largest vertex last.
    let mut frontier = vec![0u32];
    for _ in 0..max_size.min(k as u32) {
        let mut next = Vec::new();
        for &f in &frontier {
            let start = if f == 0 { 0 } else { 32 - f.leading_zeros() as usize };
            for v in start..k {
                let g = f | 1 << v;
                let closed = (0..k).filter(|&u| g >> u & 1 == 1 && u != v).all(|u| {
                    faces.binary_search_by(|x| face_order(x, &(g ^ 1 << u))).is_ok()
                });
                if closed && is_face(g) {
                    next.push(g);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_by(face_order);
        faces.extend_from_slice(&next);
        frontier = next;
    }
    faces
}

/// Membership oracle over `N^m` shared by the Betti routines.
enum Lattice<'a> {
    Numerical { view: SemigroupView, gens: &'a [u64] },
    Affine(AffineMembership),
}

impl Lattice<'_> {
    fn contains(&mut self, lambda: &[u64]) -> bool {
        match self {
            Lattice::Numerical { view, .. } => view.contains(lambda[0]),
            Lattice::Affine(a) => a.contains(lambda),
        }
    }

    fn gen(&self, i: usize) -> Vec<u64> {
        match self {
            Lattice::Numerical { gens, .. } => vec![gens[i]],
            Lattice::Affine(a) => a.gens[i].clone(),
        }
    }

    fn len(&self) -> usize {
        match self {
            Lattice::Numerical { gens, .. } => gens.len(),
            Lattice::Affine(a) => a.gens.len(),
        }
    }

    fn complex(&mut self, lambda: &[u64], max_size: u32) -> Result<SimplicialComplex, HomologyError> {
        if !self.contains(lambda) {
            return Err(HomologyError::NotMember(lambda.to_vec()));
        }
        let k = self.len();
        let gens: Vec<Vec<u64>> = (0..k).map(|i| self.gen(i)).collect();
        let masks = complex_masks(k, max_size, |f| {
            let mut rest = lambda.to_vec();
            for (i, g) in gens.iter().enumerate() {
                if f >> i & 1 == 1 {
                    for (r, x) in rest.iter_mut().zip(g) {
                        match r.checked_sub(*x) {
                            Some(v) => *r = v,
                            None => return false,
                        }
                    }
                }
            }
            self.contains(&rest)
        });
        SimplicialComplex::from_masks(k, masks)
    }
}

fn lattice(gens: &[Vec<u64>]) -> Result<Lattice<'static>, HomologyError> {
    Ok(Lattice::Affine(AffineMembership::new(gens)?))
}

/// The squarefree divisor complex of `lambda`; vertex `i` is `gens[i]`.
pub fn sq_divisor_complex(gens: &[Vec<u64>], lambda: &[u64]) -> Result<SimplicialComplex, HomologyError> {
    if lambda.len() != validate(gens)? {
        return Err(HomologyError::InvalidGenerators);
    }
    lattice(gens)?.complex(lambda, MAX_VERTICES as u32)
}

pub fn sq_divisor_complex_numerical(gens: &[u64], lambda: u64) -> Result<SimplicialComplex, HomologyError> {
    numerical_lattice(gens)?.complex(&[lambda], MAX_VERTICES as u32)
}

fn numerical_lattice(gens: &[u64]) -> Result<Lattice<'_>, HomologyError> {
    if gens.is_empty() || gens.contains(&0) {
        return Err(HomologyError::InvalidGenerators);
    }
    if gens.len() > MAX_VERTICES {
        return Err(HomologyError::TooManyVertices(gens.len()));
    }
    Ok(Lattice::Numerical { view: SemigroupView::build(gens)?, gens })
}

/// `dim H~_{i-1}` of a complex known to contain its `i`-skeleton.
fn betti_from_complex(c: &SimplicialComplex, i: usize, field: FieldSpec) -> usize {
    if i == 1 {
        // H~_0 is the number of components minus one, in every characteristic.
        return c.components().saturating_sub(1);
    }
    homology_in_degree(c, i as i64 - 1, field)
}

pub fn graded_betti(gens: &[Vec<u64>], lambda: &[u64], i: usize, field: FieldSpec) -> Result<usize, HomologyError> {
    if i == 0 {
        return Err(HomologyError::InvalidIndex);
    }
    if lambda.len() != validate(gens)? {
        return Err(HomologyError::InvalidGenerators);
    }
    let c = lattice(gens)?.complex(lambda, i as u32 + 1)?;
    Ok(betti_from_complex(&c, i, field))
}

pub fn graded_betti_numerical(gens: &[u64], lambda: u64, i: usize, field: FieldSpec) -> Result<usize, HomologyError> {
    if i == 0 {
        return Err(HomologyError::InvalidIndex);
    }
    let c = numerical_lattice(gens)?.complex(&[lambda], i as u32 + 1)?;
    Ok(betti_from_complex(&c, i, field))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoarseBetti {
    pub value: usize,
    /// True when every degree with a nonzero graded Betti number was visited.
    pub complete: bool,
}

/// Upper end of the degrees that can carry `beta_i` for a numerical semigroup:
/// beyond `F + (i + 1) * max(gens)` every `i`-subset of generators is a face of
/// the `i`-skeleton, which is then acyclic in degree `i - 1`.
pub fn betti_degree_cutoff(gens: &[u64], i: usize) -> Result<u64, HomologyError> {
    let view = SemigroupView::build(gens)?;
    let d = view.gcd();
    let reduced = view.normalized();
    let f = reduced.frobenius()?;
    let max = *reduced.gens().last().expect("nonempty");
    Ok(d * (f + (i as i64 + 1) * max as i64) as u64)
}

/// Degrees that can carry `beta_i`. If `Delta(lambda)` contained `T + v` for
/// every face `T` with `|T| <= i` avoiding the vertex `v` of the smallest
/// generator, its `i`-skeleton would be a cone and `H~_{i-1}` would vanish.
/// A witness `T` has `lambda - sum(T)` in `Ap(S, g_v)`.
fn betti_candidates(view: &SemigroupView, gens: &[u64], i: usize) -> Result<Vec<u64>, HomologyError> {
    let d = view.gcd();
    let reduced = view.normalized();
    let m = reduced.multiplicity();
    let apery = reduced.apery_set(m)?;
    let v = gens.iter().position(|&g| g == d * m).expect("smallest generator");
    let others: Vec<u64> = gens.iter().enumerate().filter(|&(j, _)| j != v).map(|(_, &g)| g).collect();
    let mut sums = vec![(0u64, 0usize)];
    for &g in &others {
        let grown: Vec<(u64, usize)> = sums.iter().filter(|&&(_, c)| c < i).map(|&(s, c)| (s + g, c + 1)).collect();
        sums.extend(grown);
    }
    let mut sums: Vec<u64> = sums.into_iter().map(|(s, _)| s).collect();
    sums.sort_unstable();
    sums.dedup();
    let mut out: Vec<u64> = apery.iter().flat_map(|&w| sums.iter().map(move |&s| d * w + s)).collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Graded Betti numbers of `K[S]` in increasing degree; only nonzero entries
/// are returned. Only the candidate degrees from the Apéry set of the smallest
/// generator are visited.
pub fn graded_betti_numerical_all(gens: &[u64], i: usize, field: FieldSpec) -> Result<Vec<(u64, usize)>, HomologyError> {
    if i == 0 {
        return Err(HomologyError::InvalidIndex);
    }
    let lat = numerical_lattice(gens)?;
    let Lattice::Numerical { view, .. } = &lat else { unreachable!() };
    let k = gens.len();
    let max_size = i as u32 + 1;
    let degrees = betti_candidates(view, gens, i)?;
    let mut out: Vec<(u64, usize)> = degrees
        .par_chunks(4096)
        .map(|chunk| {
            let mut cache: HashMap<Vec<u32>, usize> = HashMap::new();
            let mut found = Vec::new();
            for &lambda in chunk {
                if !view.contains(lambda) {
                    continue;
                }
                let vertices = gens.iter().filter(|&&g| g <= lambda && view.contains(lambda - g)).count();
                // A nonzero H~_{i-1} needs at least i + 1 vertices.
                if vertices < i + 1 {
                    continue;
                }
                let masks = complex_masks(k, max_size, |f| {
                    let s: u64 = (0..k).filter(|&v| f >> v & 1 == 1).map(|v| gens[v]).sum();
                    s <= lambda && view.contains(lambda - s)
                });
                let b = *cache.entry(masks.clone()).or_insert_with(|| {
                    let c = SimplicialComplex { vertices: k, faces: masks };
                    betti_from_complex(&c, i, field)
                });
                if b > 0 {
                    found.push((lambda, b));
                }
            }
            found
        })
        .flatten()
        .collect();
    out.sort_unstable();
    Ok(out)
}

pub fn coarse_betti_numerical(gens: &[u64], i: usize, field: FieldSpec) -> Result<CoarseBetti, HomologyError> {
    let value = graded_betti_numerical_all(gens, i, field)?.iter().map(|(_, b)| b).sum();
    Ok(CoarseBetti { value, complete: true })
}

/// `beta_i(K[S])`. Complete for `m = 1`; for `m > 1` only degrees in the box
/// `[0, degree_cap]^m` are summed and the result is a lower bound.
pub fn coarse_betti(
    gens: &[Vec<u64>],
    i: usize,
    field: FieldSpec,
    degree_cap: Option<u64>,
) -> Result<CoarseBetti, HomologyError> {
    let dim = validate(gens)?;
    if i == 0 {
        return Err(HomologyError::InvalidIndex);
    }
    if dim == 1 {
        let flat: Vec<u64> = gens.iter().map(|g| g[0]).collect();
        return coarse_betti_numerical(&flat, i, field);
    }
    let cap = degree_cap.ok_or(HomologyError::MissingCap)?;
    let mut lat = lattice(gens)?;
    let mut cache: HashMap<SimplicialComplex, usize> = HashMap::new();
    let mut value = 0;
    let mut lambda = vec![0u64; dim];
    loop {
        if lat.contains(&lambda) {
            let c = lat.complex(&lambda, i as u32 + 1)?;
            value += *cache.entry(c).or_insert_with_key(|c| betti_from_complex(c, i, field));
        }
        // Next point of the box in odometer order.
        let mut j = 0;
        while j < dim && lambda[j] == cap {
            lambda[j] = 0;
            j += 1;
        }
        if j == dim {
            break;
        }
        lambda[j] += 1;
    }
    Ok(CoarseBetti { value, complete: false })
}

/// Nonzero `beta_{i,lambda}` of a numerical semigroup ring, `0 <= i <= max_i`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GradedBettiTable {
    pub entries: BTreeMap<(usize, Vec<u64>), usize>,
    pub totals: BTreeMap<usize, usize>,
}

impl GradedBettiTable {
    pub fn get(&self, i: usize, lambda: &[u64]) -> usize {
        self.entries.get(&(i, lambda.to_vec())).copied().unwrap_or(0)
    }

    /// One `lambda;i;beta` line per nonzero entry, coordinates of `lambda` comma separated.
    pub fn to_text(&self) -> String {
        let mut out = String::from("lambda;i;beta\n");
        for ((i, lambda), b) in &self.entries {
            let l: Vec<String> = lambda.iter().map(u64::to_string).collect();
            out.push_str(&format!("{};{};{}\n", l.join(","), i, b));
        }
        out
    }
}

pub fn graded_betti_table(gens: &[u64], max_i: usize, field: FieldSpec) -> Result<GradedBettiTable, HomologyError> {
    let mut table = GradedBettiTable::default();
    table.entries.insert((0, vec![0]), 1);
    table.totals.insert(0, 1);
    for i in 1..=max_i {
        let all = graded_betti_numerical_all(gens, i, field)?;
        table.totals.insert(i, all.iter().map(|(_, b)| b).sum());
        for (lambda, b) in all {
            table.entries.insert((i, vec![lambda]), b);
        }
    }
    Ok(table)
}

/// Size of a minimal presentation, i.e. `beta_1` over the rationals.
pub fn minimal_presentation_size(gens: &[u64]) -> Result<usize, HomologyError> {
    Ok(coarse_betti_numerical(gens, 1, FieldSpec::Rationals)?.value)
}

/// Minimal presentation size counted on factorization graphs: for each degree,
/// the number of classes of factorizations linked through shared support, minus one.
pub fn presentation_size_by_factorizations(gens: &[u64]) -> Result<usize, HomologyError> {
    let view = SemigroupView::build(gens)?;
    let cutoff = betti_degree_cutoff(gens, 1)?;
    let mut total = 0;
    for lambda in (0..=cutoff).filter(|&l| view.contains(l)) {
        let facts = factorizations_capped(&view, lambda, u128::MAX)?;
        let k = view.gens().len();
        let mut parent: Vec<usize> = (0..facts.len() + k).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (f, fac) in facts.iter().enumerate() {
            for (j, &z) in fac.coeffs.iter().enumerate() {
                if z > 0 {
                    let (a, b) = (find(&mut parent, f), find(&mut parent, facts.len() + j));
                    parent[a] = b;
                }
            }
        }
        let roots: std::collections::HashSet<usize> =
            (0..facts.len()).map(|f| find(&mut parent, f)).collect();
        total += roots.len() - 1;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BresinskyGenerators {
    pub gens: [u64; 4],
    /// `M = 2 n^{d/2} - 1`.
    pub modulus: u64,
}

/// `4n^d - 2n^{d/2}, 4n^d - 1, 4n^d + 2n^{d/2}, 4n^d + 4n^{d/2} - 1`.
pub fn bresinsky_generators(d: u32, n: u64) -> Result<BresinskyGenerators, HomologyError> {
    if d % 2 == 1 || d == 0 {
        return Err(HomologyError::OddDegree(d));
    }
    let h = n.checked_pow(d / 2).ok_or(HomologyError::Overflow)?;
    let big = h
        .checked_mul(h)
        .and_then(|x| x.checked_mul(4))
        .ok_or(HomologyError::Overflow)?;
    let gens = [
        big - 2 * h,
        big - 1,
        big + 2 * h,
        (big + 4 * h).checked_sub(1).ok_or(HomologyError::Overflow)?,
    ];
    Ok(BresinskyGenerators { gens, modulus: 2 * h - 1 })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BresinskyReport {
    pub generators: BresinskyGenerators,
    /// `(mu, f(mu), beta_{1,f(mu)})`.
    pub degrees: Vec<(u64, u64, usize)>,
    pub lower_bound: u64,
    pub coarse_beta1: Option<usize>,
}

/// Checks every step of the lower bound `beta_1 >= 2n^{d/2}` for the family:
/// both expressions of `f(mu)`, `f(mu+1) = f(mu) - M`, the residues mod `M`,
/// the split of the complex at `f(mu)` into an `{a1,a2}` side and an `{a3,a4}`
/// side, and the non-membership of `f(mu) - a_r - a_s`.
pub fn verify_bresinsky(d: u32, n: u64, with_coarse: bool) -> Result<BresinskyReport, HomologyError> {
    let g = bresinsky_generators(d, n)?;
    if n < 2 {
        return Err(HomologyError::SmallParameter(n));
    }
    let [a1, a2, a3, a4] = g.gens;
    let m = g.modulus;
    let top = m + 1;
    let view = SemigroupView::build(&g.gens)?;
    let fail = |mu: u64, check: String| HomologyError::VerificationFailed { mu, check };
    for (idx, (a, want)) in [(a1, 0), (a2, 0), (a3, 2 % m), (a4, 2 % m)].into_iter().enumerate() {
        if a % m != want {
            return Err(fail(0, format!("a_{} = {a} is not {want} mod {m}", idx + 1)));
        }
    }
    let f = |mu: u64| (mu + 1) * a1 + (top - mu) * a2;
    let mut degrees = Vec::new();
    for mu in 1..=top {
        let v = f(mu);
        let other = (mu - 1) * a3 + (top - mu) * a4;
        if v != other {
            return Err(fail(mu, format!("(mu+1)a1 + (2n^(d/2)-mu)a2 = {v} but (mu-1)a3 + (2n^(d/2)-mu)a4 = {other}")));
        }
        if mu < top && f(mu + 1) + m != v {
            return Err(fail(mu, "f(mu+1) != f(mu) - M".into()));
        }
        for (r, ar) in [(1, a1), (2, a2)] {
            for (s, as_) in [(3, a3), (4, a4)] {
                let rest = v - ar - as_;
                if (rest + 2) % m != 0 {
                    return Err(fail(mu, format!("f(mu) - a_{r} - a_{s} is not -2 mod M")));
                }
                if view.contains(rest) {
                    return Err(fail(mu, format!("f(mu) - a_{r} - a_{s} = {rest} lies in S")));
                }
            }
        }
        let c = sq_divisor_complex_numerical(&g.gens, v)?;
        // An edge is guaranteed only when both coefficients of its representation are positive.
        if mu < top && !c.contains_face(&[0, 1]) {
            return Err(fail(mu, "{a1,a2} is not a face".into()));
        }
        if mu > 1 && mu < top && !c.contains_face(&[2, 3]) {
            return Err(fail(mu, "{a3,a4} is not a face".into()));
        }
        let low_side = c.contains_face(&[0]) || c.contains_face(&[1]);
        let high_side = c.contains_face(&[2]) || c.contains_face(&[3]);
        let cross = [[0, 2], [0, 3], [1, 2], [1, 3]].iter().any(|e| c.contains_face(e));
        if !low_side || !high_side || cross || c.components() < 2 {
            return Err(fail(mu, "complex does not split into {a1,a2} and {a3,a4} sides".into()));
        }
        let beta = graded_betti_numerical(&g.gens, v, 1, FieldSpec::Rationals)?;
        if beta < 1 {
            return Err(fail(mu, "beta_1 vanishes at f(mu)".into()));
        }
        degrees.push((mu, v, beta));
    }
    let coarse_beta1 = if with_coarse {
        let b = minimal_presentation_size(&g.gens)?;
        if (b as u64) < top {
            return Err(fail(0, format!("beta_1 = {b} is below 2n^(d/2) = {top}")));
        }
        Some(b)
    } else {
        None
    };
    Ok(BresinskyReport { generators: g, degrees, lower_bound: top, coarse_beta1 })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeBoundReport {
    pub fitted_degree: usize,
    /// Sum of generator degrees.
    pub sum_bound: usize,
    /// Smallest generator degree, checked for `i = 1` only.
    pub min_bound: Option<usize>,
    /// Number of samples checked against `(2a_1 - k + 1)(k - 2)/2 + 1`.
    pub samples_checked: usize,
}

/// Checks a fitted `beta_i` against the degree bounds; `samples` are `(n, beta_i(S_n))`.
pub fn check_degree_bounds(
    fam: &ParametricFamily,
    i: usize,
    fitted: &QuasiPolynomial,
    samples: &[(u64, u64)],
) -> Result<DegreeBoundReport, HomologyError> {
    if fam.dim() != 1 {
        return Err(HomologyError::InvalidGenerators);
    }
    let degs: Vec<usize> = fam.degrees().iter().map(|&d| d.max(0) as usize).collect();
    let fitted_degree = degree_of(fitted);
    let sum_bound: usize = degs.iter().sum();
    if fitted_degree > sum_bound {
        return Err(HomologyError::BoundViolation(format!(
            "fitted degree {fitted_degree} exceeds the sum of generator degrees {sum_bound}"
        )));
    }
    let mut min_bound = None;
    let mut samples_checked = 0;
    if i == 1 {
        let lo = *degs.iter().min().expect("nonempty family");
        if fitted_degree > lo {
            return Err(HomologyError::BoundViolation(format!(
                "fitted degree {fitted_degree} exceeds the smallest generator degree {lo}"
            )));
        }
        min_bound = Some(lo);
        let k = fam.num_generators() as i128;
        for &(n, beta) in samples {
            let gens = fam.instantiate_numerical(n)?;
            let a1 = *gens.iter().min().expect("nonempty") as i128;
            let bound = (2 * a1 - k + 1) * (k - 2) / 2 + 1;
            if beta as i128 > bound {
                return Err(HomologyError::BoundViolation(format!(
                    "beta_1 = {beta} at n = {n} exceeds (2a_1 - k + 1)(k - 2)/2 + 1 = {bound}"
                )));
            }
            samples_checked += 1;
        }
    }
    Ok(DegreeBoundReport { fitted_degree, sum_bound, min_bound, samples_checked })
}
