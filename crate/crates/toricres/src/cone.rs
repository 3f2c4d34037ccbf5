//! Rational polyhedral cones in a fixed coordinate lattice ℤ^d.
//!
//! A cone is held in both representations: lineality basis plus extreme rays,
//! and equations plus facet normals. Conversion between them is done with the
//! double description method.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exactmath::{
    dot, dot_iq, hermite_normal_form, integer_kernel, is_lattice_basis_part, is_zero_vec,
    primitive, primitive_of_rat, rank_i, solve_q, to_rat_vec, Int, IntMatrix, IntVec, RatVec,
    Rational,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConeError {
    #[error("cone is not regular")]
    NotRegular,
    #[error("cone is not simplicial")]
    NotSimplicial,
    #[error("cone is not a face of the given cone")]
    NotAFace,
    #[error("ambient dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

#[derive(Clone, Debug)]
pub struct Cone {
    ambient: usize,
    lineality: Vec<IntVec>,
    rays: Vec<IntVec>,
    equations: Vec<IntVec>,
    facets: Vec<IntVec>,
}

/// A face together with a dual witness `ω` such that the face is `C ∩ ω^⊥`.
#[derive(Clone, Debug)]
pub struct Face {
    pub cone: Cone,
    pub witness: IntVec,
}

impl PartialEq for Cone {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.lineality == other.lineality && self.rays == other.rays
    }
}

impl Eq for Cone {}

impl Hash for Cone {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.ambient.hash(state);
        self.lineality.hash(state);
        self.rays.hash(state);
    }
}

impl PartialOrd for Cone {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cone {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.ambient, self.dim(), &self.lineality, &self.rays).cmp(&(
            other.ambient,
            other.dim(),
            &other.lineality,
            &other.rays,
        ))
    }
}

impl fmt::Display for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: &IntVec| {
            let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            format!("({})", s.join(","))
        };
        write!(f, "cone[")?;
        let rs: Vec<String> = self.rays.iter().map(show).collect();
        write!(f, "{}", rs.join(" "))?;
        if !self.lineality.is_empty() {
            let ls: Vec<String> = self.lineality.iter().map(show).collect();
            write!(f, " | lin {}", ls.join(" "))?;
        }
        write!(f, "]")
    }
}

struct DdRay {
    v: IntVec,
    tight: Vec<bool>,
}

/// Double description: generators of `{x : e·x = 0 (e ∈ eqs), a·x ≥ 0 (a ∈ ineqs)}`.
/// Returns a lineality basis and the extreme rays modulo lineality.
fn double_description(d: usize, eqs: &[IntVec], ineqs: &[IntVec]) -> (Vec<IntVec>, Vec<IntVec>) {
    let mut lin: Vec<IntVec> = integer_kernel(eqs, d);
    let mut rays: Vec<DdRay> = Vec::new();
    let mut processed = 0;
    for a in ineqs {
        if is_zero_vec(a) {
            for r in rays.iter_mut() {
                r.tight.push(true);
            }
            processed += 1;
            continue;
        }
        if let Some(pos) = lin.iter().position(|l| !dot(a, l).is_zero()) {
            let mut l0 = lin.swap_remove(pos);
            let mut al0 = dot(a, &l0);
            if al0.is_negative() {
                l0 = l0.iter().map(|x| -x).collect();
                al0 = -al0;
            }
            for l in lin.iter_mut() {
                let al = dot(a, l);
                if !al.is_zero() {
                    let v: IntVec = l.iter().zip(&l0).map(|(x, y)| &al0 * x - &al * y).collect();
                    *l = primitive(&v);
                }
            }
            for r in rays.iter_mut() {
                let ar = dot(a, &r.v);
                if !ar.is_zero() {
                    let v: IntVec = r.v.iter().zip(&l0).map(|(x, y)| &al0 * x - &ar * y).collect();
                    r.v = primitive(&v);
                }
                r.tight.push(true);
            }
            let mut tight = vec![true; processed];
            tight.push(false);
            processed += 1;
            rays.push(DdRay { v: primitive(&l0), tight });
            continue;
        }
        let vals: Vec<Int> = rays.iter().map(|r| dot(a, &r.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        let mut new_rays: Vec<DdRay> = Vec::new();
        if !neg.is_empty() && !pos.is_empty() {
            let need = d.saturating_sub(lin.len() + 2);
            for &p in &pos {
                for &n in &neg {
                    let common: Vec<bool> = rays[p]
                        .tight
                        .iter()
                        .zip(&rays[n].tight)
                        .map(|(x, y)| *x && *y)
                        .collect();
                    if common.iter().filter(|&&b| b).count() < need.saturating_sub(eqs.len()) {
                        continue;
                    }
                    let adjacent = (0..rays.len()).all(|r| {
                        r == p
                            || r == n
                            || common.iter().zip(&rays[r].tight).any(|(c, t)| *c && !*t)
                    });
                    if !adjacent {
                        continue;
                    }
                    let v: IntVec = rays[n]
                        .v
                        .iter()
                        .zip(&rays[p].v)
                        .map(|(x, y)| &vals[p] * x - &vals[n] * y)
                        .collect();
                    let mut tight = common;
                    tight.push(true);
                    new_rays.push(DdRay { v: primitive(&v), tight });
                }
            }
        }
        let old = std::mem::take(&mut rays);
        for (i, mut r) in old.into_iter().enumerate() {
            if vals[i].is_negative() {
                continue;
            }
            r.tight.push(vals[i].is_zero());
            rays.push(r);
        }
        rays.extend(new_rays);
        processed += 1;
    }
    (lin, rays.into_iter().map(|r| r.v).collect())
}

/// Saturated HNF basis of the rational span of `vs`.
fn canonical_subspace(vs: &[IntVec], d: usize) -> Vec<IntVec> {
    if vs.is_empty() {
        return Vec::new();
    }
    let perp = integer_kernel(vs, d);
    let sat = integer_kernel(&perp, d);
    if sat.is_empty() {
        return Vec::new();
    }
    let (h, _) = hermite_normal_form(&IntMatrix::new(sat, d));
    h.rows.into_iter().filter(|r| !is_zero_vec(r)).collect()
}

/// Orthogonal projection of `v` onto the complement of span(`basis`), made primitive.
fn project_out(v: &[Int], basis: &[IntVec]) -> IntVec {
    if basis.is_empty() {
        return primitive(v);
    }
    let gram: Vec<RatVec> = basis
        .iter()
        .map(|b| basis.iter().map(|c| Rational::from_integer(dot(b, c))).collect())
        .collect();
    let rhs: RatVec = basis.iter().map(|b| Rational::from_integer(dot(b, v))).collect();
    let c = solve_q(&gram, &rhs, basis.len()).expect("basis is independent");
    let mut out: RatVec = to_rat_vec(v);
    for (ci, b) in c.iter().zip(basis) {
        for (o, bj) in out.iter_mut().zip(b) {
            *o -= ci * Rational::from_integer(bj.clone());
        }
    }
    primitive_of_rat(&out)
}

fn canonical_rays(rays: Vec<IntVec>, lin: &[IntVec]) -> Vec<IntVec> {
    let set: BTreeSet<IntVec> = rays
        .iter()
        .map(|r| project_out(r, lin))
        .filter(|r| !is_zero_vec(r))
        .collect();
    set.into_iter().collect()
}

fn linearly_independent(vs: &[IntVec]) -> bool {
    rank_i(vs) == vs.len()
}

impl Cone {
    fn assemble(
        d: usize,
        lin: Vec<IntVec>,
        rays: Vec<IntVec>,
        eqs: Vec<IntVec>,
        facets: Vec<IntVec>,
    ) -> Cone {
        let lineality = canonical_subspace(&lin, d);
        let rays = canonical_rays(rays, &lineality);
        let equations = canonical_subspace(&eqs, d);
        let facets = canonical_rays(facets, &equations);
        Cone { ambient: d, lineality, rays, equations, facets }
    }

    /// `convcone(generators)` in ℤ^d.
    pub fn from_generators(d: usize, generators: &[IntVec]) -> Cone {
        let gens: Vec<IntVec> = {
            let s: BTreeSet<IntVec> = generators
                .iter()
                .filter(|g| !is_zero_vec(g))
                .map(|g| primitive(g))
                .collect();
            s.into_iter().collect()
        };
        if linearly_independent(&gens) {
            return Self::simplicial(d, gens);
        }
        let (dl, dr) = double_description(d, &[], &gens);
        let (l, r) = double_description(d, &dl, &dr);
        Self::assemble(d, l, r, dl, dr)
    }

    fn simplicial(d: usize, gens: Vec<IntVec>) -> Cone {
        let eqs = integer_kernel(&gens, d);
        let gram: Vec<RatVec> = gens
            .iter()
            .map(|b| gens.iter().map(|c| Rational::from_integer(dot(b, c))).collect())
            .collect();
        let k = gens.len();
        let facets: Vec<IntVec> = (0..k)
            .map(|i| {
                let mut e = vec![Rational::zero(); k];
                e[i] = Rational::one();
                let c = solve_q(&gram, &e, k).expect("independent generators");
                let mut w = vec![Rational::zero(); d];
                for (ci, g) in c.iter().zip(&gens) {
                    for (wj, gj) in w.iter_mut().zip(g) {
                        *wj += ci * Rational::from_integer(gj.clone());
                    }
                }
                primitive_of_rat(&w)
            })
            .collect();
        Self::assemble(d, Vec::new(), gens, eqs, facets)
    }

    pub fn from_i64(d: usize, generators: &[&[i64]]) -> Cone {
        let g: Vec<IntVec> = generators.iter().map(|v| crate::exactmath::ivec(v)).collect();
        Self::from_generators(d, &g)
    }

    /// `{x : e·x = 0, a·x ≥ 0}`.
    pub fn from_inequalities(d: usize, equations: &[IntVec], inequalities: &[IntVec]) -> Cone {
        let (l, r) = double_description(d, equations, inequalities);
        if l.is_empty() && linearly_independent(&r) {
            return Self::simplicial(d, r);
        }
        let (dl, dr) = double_description(d, &l, &r);
        Self::assemble(d, l, r, dl, dr)
    }

    /// Cone with known irredundant V-representation.
    fn from_vrep(d: usize, lin: Vec<IntVec>, rays: Vec<IntVec>) -> Cone {
        if lin.is_empty() && linearly_independent(&rays) {
            return Self::simplicial(d, rays);
        }
        let (dl, dr) = double_description(d, &lin, &rays);
        Self::assemble(d, lin, rays, dl, dr)
    }

    pub fn zero(d: usize) -> Cone {
        Self::assemble(d, Vec::new(), Vec::new(), crate::exactmath::IntMatrix::identity(d).rows, Vec::new())
    }

    pub fn full(d: usize) -> Cone {
        Self::assemble(d, crate::exactmath::IntMatrix::identity(d).rows, Vec::new(), Vec::new(), Vec::new())
    }

    pub fn ray(v: &[Int]) -> Cone {
        Self::from_generators(v.len(), &[v.to_vec()])
    }

    /// The nonnegative orthant spanned by the standard basis.
    pub fn orthant(d: usize) -> Cone {
        Self::simplicial(d, crate::exactmath::IntMatrix::identity(d).rows)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.ambient - self.equations.len()
    }

    pub fn lineality_dim(&self) -> usize {
        self.lineality.len()
    }

    /// Extreme rays modulo lineality; primitive edge generators when strongly convex.
    pub fn rays(&self) -> &[IntVec] {
        &self.rays
    }

    pub fn lineality_basis(&self) -> &[IntVec] {
        &self.lineality
    }

    /// Inner facet normals, projected into the span of the cone.
    pub fn facet_normals(&self) -> &[IntVec] {
        &self.facets
    }

    /// Basis of the orthogonal complement of the linear span.
    pub fn equations(&self) -> &[IntVec] {
        &self.equations
    }

    /// Generating set: rays and both signs of the lineality basis.
    pub fn generators(&self) -> Vec<IntVec> {
        let mut g = self.rays.clone();
        for l in &self.lineality {
            g.push(l.clone());
            g.push(l.iter().map(|x| -x).collect());
        }
        g
    }

    pub fn dual(&self) -> Cone {
        Cone {
            ambient: self.ambient,
            lineality: self.equations.clone(),
            rays: self.facets.clone(),
            equations: self.lineality.clone(),
            facets: self.rays.clone(),
        }
    }

    pub fn contains(&self, x: &[Int]) -> bool {
        self.equations.iter().all(|e| dot(e, x).is_zero())
            && self.facets.iter().all(|a| !dot(a, x).is_negative())
    }

    pub fn contains_q(&self, x: &[Rational]) -> bool {
        self.equations.iter().all(|e| dot_iq(e, x).is_zero())
            && self.facets.iter().all(|a| !dot_iq(a, x).is_negative())
    }

    /// Membership in the relative interior.
    pub fn relint_contains(&self, x: &[Int]) -> bool {
        self.equations.iter().all(|e| dot(e, x).is_zero())
            && self.facets.iter().all(|a| dot(a, x).is_positive())
    }

    pub fn relint_contains_q(&self, x: &[Rational]) -> bool {
        self.equations.iter().all(|e| dot_iq(e, x).is_zero())
            && self.facets.iter().all(|a| dot_iq(a, x).is_positive())
    }

    pub fn contains_cone(&self, other: &Cone) -> bool {
        other.generators().iter().all(|g| self.contains(g))
    }

    /// Integer point in the relative interior (sum of the rays).
    pub fn relint_point(&self) -> IntVec {
        let mut p = vec![Int::zero(); self.ambient];
        for r in &self.rays {
            for (pi, ri) in p.iter_mut().zip(r) {
                *pi += ri;
            }
        }
        p
    }

    pub fn is_strongly_convex(&self) -> bool {
        self.lineality.is_empty()
    }

    /// `C ∩ (−C)`.
    pub fn minimal_face(&self) -> Cone {
        Self::assemble(
            self.ambient,
            self.lineality.clone(),
            Vec::new(),
            integer_kernel(&self.lineality, self.ambient),
            Vec::new(),
        )
    }

    pub fn is_simplicial(&self) -> bool {
        self.is_strongly_convex() && self.rays.len() == self.dim()
    }

    pub fn is_regular(&self) -> bool {
        self.is_simplicial() && is_lattice_basis_part(&self.rays)
    }

    pub fn barycenter(&self) -> Result<IntVec, ConeError> {
        if !self.is_regular() {
            return Err(ConeError::NotRegular);
        }
        Ok(self.relint_point())
    }

    /// `C ∩ ω^⊥` for `ω` in the dual cone.
    pub fn face_at(&self, omega: &[Int]) -> Cone {
        let rays: Vec<IntVec> =
            self.rays.iter().filter(|r| dot(omega, r).is_zero()).cloned().collect();
        Self::from_vrep(self.ambient, self.lineality.clone(), rays)
    }

    /// Smallest face containing the point `x ∈ C`.
    pub fn minimal_face_containing(&self, x: &[Int]) -> Cone {
        let tight: Vec<&IntVec> = self.facets.iter().filter(|a| dot(a, x).is_zero()).collect();
        let rays: Vec<IntVec> = self
            .rays
            .iter()
            .filter(|r| tight.iter().all(|a| dot(a, r).is_zero()))
            .cloned()
            .collect();
        Self::from_vrep(self.ambient, self.lineality.clone(), rays)
    }

    pub fn is_face_of(&self, s: &Cone) -> bool {
        s.contains_cone(self) && &s.minimal_face_containing(&self.relint_point()) == self
    }

    /// Facets, each with its inner normal.
    pub fn facets(&self) -> Vec<Face> {
        self.facets
            .iter()
            .map(|a| Face { cone: self.face_at(a), witness: a.clone() })
            .collect()
    }

    /// All faces, each with a witness in the relative interior of its normal cone.
    pub fn faces(&self) -> Vec<Face> {
        let nr = self.rays.len();
        let tight: Vec<Vec<bool>> = self
            .facets
            .iter()
            .map(|a| self.rays.iter().map(|r| dot(a, r).is_zero()).collect())
            .collect();
        let mut seen: BTreeSet<Vec<bool>> = BTreeSet::new();
        let full = vec![true; nr];
        seen.insert(full.clone());
        let mut stack = vec![full];
        while let Some(s) = stack.pop() {
            for t in &tight {
                let n: Vec<bool> = s.iter().zip(t).map(|(x, y)| *x && *y).collect();
                if seen.insert(n.clone()) {
                    stack.push(n);
                }
            }
        }
        seen.into_iter()
            .map(|set| {
                let rays: Vec<IntVec> =
                    (0..nr).filter(|&i| set[i]).map(|i| self.rays[i].clone()).collect();
                let mut witness = vec![Int::zero(); self.ambient];
                for (a, t) in self.facets.iter().zip(&tight) {
                    if (0..nr).all(|i| !set[i] || t[i]) {
                        for (w, ai) in witness.iter_mut().zip(a) {
                            *w += ai;
                        }
                    }
                }
                Face { cone: Self::from_vrep(self.ambient, self.lineality.clone(), rays), witness }
            })
            .collect()
    }

    pub fn intersection(&self, other: &Cone) -> Cone {
        let mut eqs = self.equations.clone();
        eqs.extend(other.equations.iter().cloned());
        let mut ineqs = self.facets.clone();
        ineqs.extend(other.facets.iter().cloned());
        Self::from_inequalities(self.ambient, &eqs, &ineqs)
    }

    pub fn minkowski_sum(&self, other: &Cone) -> Cone {
        let mut g = self.generators();
        g.extend(other.generators());
        Self::from_generators(self.ambient, &g)
    }

    /// Face of a simplicial cone spanned by the complementary edges of `f`.
    pub fn opposite_face(f: &Cone, s: &Cone) -> Result<Cone, ConeError> {
        if !s.is_simplicial() {
            return Err(ConeError::NotSimplicial);
        }
        if !f.is_strongly_convex() || !f.rays.iter().all(|r| s.rays.contains(r)) {
            return Err(ConeError::NotAFace);
        }
        let rest: Vec<IntVec> = s.rays.iter().filter(|r| !f.rays.contains(r)).cloned().collect();
        Ok(Self::simplicial(s.ambient, rest))
    }

    /// Linear span as a subspace cone.
    pub fn span(&self) -> Cone {
        Self::assemble(
            self.ambient,
            self.generators(),
            Vec::new(),
            self.equations.clone(),
            Vec::new(),
        )
    }
}
