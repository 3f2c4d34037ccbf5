//! Convex pseudo polytopes `conv(X) + convcone(Y)` with rational `X`.
//!
//! Everything is derived from the homogenization cone
//! `C = convcone({(x, 1) : x ∈ X} ∪ {(y, 0) : y ∈ Y})` in one extra dimension:
//! faces of `C` not contained in `{t = 0}` are the faces of the polytope, and the
//! normal cone of a face is the projection of the dual face of `C`.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::cone::Cone;
use crate::exactmath::{
    dot, dot_iq, integer_kernel, lcm_denoms, rat_int, Int, IntVec, RatVec, Rational,
};
use crate::fan::{Fan, FanError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolytopeError {
    #[error("a pseudo polytope needs at least one point")]
    Empty,
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("functional is not bounded below on the polytope")]
    Unbounded,
    #[error("direction is not orthogonal to the lineality space")]
    NotInSpan,
    #[error("{0} is not in the height set")]
    NotAHeight(Rational),
    #[error("support of the normal fan is not a regular cone")]
    SupportNotRegular,
    #[error("not an edge of the normal fan support")]
    NotAnEdge,
    #[error(transparent)]
    Fan(#[from] FanError),
}

#[derive(Debug)]
pub struct PseudoPolytope {
    dim: usize,
    vertices: Vec<RatVec>,
    stab: Cone,
    hom: Cone,
    normal_cones: OnceLock<Vec<Cone>>,
    fan: OnceLock<Fan>,
}

impl Clone for PseudoPolytope {
    fn clone(&self) -> Self {
        PseudoPolytope {
            dim: self.dim,
            vertices: self.vertices.clone(),
            stab: self.stab.clone(),
            hom: self.hom.clone(),
            normal_cones: self.normal_cones.clone(),
            fan: self.fan.clone(),
        }
    }
}

impl PartialEq for PseudoPolytope {
    fn eq(&self, other: &Self) -> bool {
        self.hom == other.hom
    }
}

impl Eq for PseudoPolytope {}

/// A face with the ω it minimizes and its normal cone.
#[derive(Clone, Debug)]
pub struct PolytopeFace {
    pub vertices: Vec<RatVec>,
    pub recession: Cone,
    pub witness: IntVec,
    pub normal_cone: Cone,
    pub dim: usize,
}

/// Height data of a pair `(Φ, S)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairHeight {
    /// Sorted distinct values of `⟨b_H, ·⟩` on the skeleton of the pair.
    pub values: Vec<Rational>,
    pub height: Rational,
    /// Indices into `PseudoPolytope::vertices`.
    pub vertices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GProfile {
    pub weierstrass: bool,
    pub simple: bool,
    pub top_vertex: RatVec,
    pub height: Rational,
}

fn homogenize(x: &[Rational]) -> IntVec {
    let l = lcm_denoms(x);
    let mut v: IntVec = x.iter().map(|c| (c * rat_int(&l)).to_integer()).collect();
    v.push(l);
    v
}

impl PseudoPolytope {
    pub fn new(d: usize, points: &[RatVec], recession: &[IntVec]) -> Result<Self, PolytopeError> {
        if points.is_empty() {
            return Err(PolytopeError::Empty);
        }
        if points.iter().any(|p| p.len() != d) || recession.iter().any(|y| y.len() != d) {
            return Err(PolytopeError::DimensionMismatch);
        }
        let mut gens: Vec<IntVec> = points.iter().map(|p| homogenize(p)).collect();
        for y in recession {
            let mut v = y.clone();
            v.push(Int::zero());
            gens.push(v);
        }
        let hom = Cone::from_generators(d + 1, &gens);
        Ok(Self::from_hom(d, hom, Cone::from_generators(d, recession)))
    }

    fn from_hom(d: usize, hom: Cone, stab: Cone) -> Self {
        let mut vertices: Vec<RatVec> = hom
            .rays()
            .iter()
            .filter(|r| r[d].is_positive())
            .map(|r| r[..d].iter().map(|c| Rational::new(c.clone(), r[d].clone())).collect())
            .collect();
        vertices.sort();
        PseudoPolytope {
            dim: d,
            vertices,
            stab,
            hom,
            normal_cones: OnceLock::new(),
            fan: OnceLock::new(),
        }
    }

    /// Newton polyhedron: `conv(points) + ℝ₀^d`.
    pub fn newton(d: usize, support: &[IntVec]) -> Result<Self, PolytopeError> {
        let pts: Vec<RatVec> = support.iter().map(|p| p.iter().map(rat_int).collect()).collect();
        Self::new(d, &pts, &crate::exactmath::IntMatrix::identity(d).rows)
    }

    pub fn from_i64(d: usize, points: &[&[i64]], recession: &[&[i64]]) -> Result<Self, PolytopeError> {
        let pts: Vec<RatVec> =
            points.iter().map(|p| p.iter().map(|&c| Rational::from_integer(c.into())).collect()).collect();
        let rec: Vec<IntVec> = recession.iter().map(|y| crate::exactmath::ivec(y)).collect();
        Self::new(d, &pts, &rec)
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    /// One canonical point per minimal face (orthogonal to the lineality space), sorted.
    pub fn vertices(&self) -> &[RatVec] {
        &self.vertices
    }

    /// Characteristic number: the count of minimal faces.
    pub fn c(&self) -> usize {
        self.vertices.len()
    }

    pub fn stab(&self) -> &Cone {
        &self.stab
    }

    pub fn lineality_dim(&self) -> usize {
        self.stab.lineality_dim()
    }

    pub fn homogenization(&self) -> &Cone {
        &self.hom
    }

    pub fn minkowski_sum(&self, other: &PseudoPolytope) -> PseudoPolytope {
        let mut pts = Vec::new();
        for a in &self.vertices {
            for b in &other.vertices {
                pts.push(a.iter().zip(b).map(|(x, y)| x + y).collect());
            }
        }
        let mut rec = self.stab.generators();
        rec.extend(other.stab.generators());
        Self::new(self.dim, &pts, &rec).expect("nonempty sum")
    }

    /// `S + X` for a cone `X`.
    pub fn plus_cone(&self, x: &Cone) -> PseudoPolytope {
        let mut rec = self.stab.generators();
        rec.extend(x.generators());
        Self::new(self.dim, &self.vertices, &rec).expect("nonempty")
    }

    fn face_from_hom(&self, fc: &Cone) -> PolytopeFace {
        let d = self.dim;
        let vertices: Vec<RatVec> = fc
            .rays()
            .iter()
            .filter(|r| r[d].is_positive())
            .map(|r| r[..d].iter().map(|c| Rational::new(c.clone(), r[d].clone())).collect())
            .collect();
        let rec: Vec<IntVec> = fc
            .generators()
            .iter()
            .filter(|r| r[d].is_zero())
            .map(|r| r[..d].to_vec())
            .collect();
        let dual_face = self.hom.dual().face_at(&fc.relint_point());
        let proj: Vec<IntVec> = dual_face.generators().iter().map(|g| g[..d].to_vec()).collect();
        let normal_cone = Cone::from_generators(d, &proj);
        PolytopeFace {
            vertices,
            recession: Cone::from_generators(d, &rec),
            witness: normal_cone.relint_point(),
            dim: fc.dim() - 1,
            normal_cone,
        }
    }

    /// Normal cones `Δ(F, S)` of the minimal faces, aligned with `vertices()`.
    pub fn vertex_normal_cones(&self) -> &[Cone] {
        self.normal_cones.get_or_init(|| {
            self.vertices
                .iter()
                .map(|v| {
                    let fc = self.hom.minimal_face_containing(&homogenize(v));
                    self.face_from_hom(&fc).normal_cone
                })
                .collect()
        })
    }

    /// All faces, each with witness and normal cone.
    pub fn faces(&self) -> Vec<PolytopeFace> {
        let d = self.dim;
        self.hom
            .faces()
            .iter()
            .filter(|f| f.cone.rays().iter().any(|r| r[d].is_positive()))
            .map(|f| self.face_from_hom(&f.cone))
            .collect()
    }

    pub fn normal_fan(&self) -> &Fan {
        self.fan
            .get_or_init(|| Fan::from_cones_unchecked(self.dim, self.vertex_normal_cones()))
    }

    /// `min{⟨ω, x⟩ : x ∈ S}`.
    pub fn ord_at(&self, omega: &[Int]) -> Result<Rational, PolytopeError> {
        if !self.stab.dual().contains(omega) {
            return Err(PolytopeError::Unbounded);
        }
        Ok(self
            .vertices
            .iter()
            .map(|v| dot_iq(omega, v))
            .min()
            .expect("nonempty"))
    }

    /// The face `Δ(ω, S)` where `⟨ω, ·⟩` attains its minimum.
    pub fn face_at(&self, omega: &[Int]) -> Result<PolytopeFace, PolytopeError> {
        let ord = self.ord_at(omega)?;
        let den = ord.denom().clone();
        let mut w: IntVec = omega.iter().map(|c| c * &den).collect();
        w.push(-(ord * rat_int(&den)).to_integer());
        Ok(self.face_from_hom(&self.hom.face_at(&w)))
    }

    fn check_direction(&self, h_ray: &[Int]) -> Result<(), PolytopeError> {
        if h_ray.len() != self.dim {
            return Err(PolytopeError::DimensionMismatch);
        }
        if self.stab.lineality_basis().iter().any(|l| !dot(l, h_ray).is_zero()) {
            return Err(PolytopeError::NotInSpan);
        }
        Ok(())
    }

    /// Sorted distinct values of `⟨b_H, ·⟩` on the skeleton.
    pub fn height_set(&self, h_ray: &[Int]) -> Result<Vec<Rational>, PolytopeError> {
        self.check_direction(h_ray)?;
        let s: BTreeSet<Rational> = self.vertices.iter().map(|v| dot_iq(h_ray, v)).collect();
        Ok(s.into_iter().collect())
    }

    pub fn height(&self, h_ray: &[Int]) -> Result<Rational, PolytopeError> {
        let s = self.height_set(h_ray)?;
        Ok(s.last().unwrap() - s.first().unwrap())
    }

    /// `den(S/N)`: the least `m` with `m·a ∈ N + L` for all skeleton points `a`.
    pub fn den(&self) -> Int {
        let basis = integer_kernel(self.stab.lineality_basis(), self.dim);
        let mut l = Int::one();
        for v in &self.vertices {
            for f in &basis {
                l = l.lcm(dot_iq(f, v).denom());
            }
        }
        l
    }

    /// Indices of minimal faces whose normal cone meets some maximal cone of `phi` full-dimensionally.
    pub fn pair_vertices(&self, phi: &Fan) -> Vec<usize> {
        let ncs = self.vertex_normal_cones();
        (0..self.vertices.len())
            .filter(|&i| phi.maximal().iter().any(|m| ncs[i].intersection(m).dim() == m.dim()))
            .collect()
    }

    pub fn pair_height(&self, h_ray: &[Int], phi: &Fan) -> Result<PairHeight, PolytopeError> {
        self.check_direction(h_ray)?;
        let vertices = self.pair_vertices(phi);
        let s: BTreeSet<Rational> =
            vertices.iter().map(|&i| dot_iq(h_ray, &self.vertices[i])).collect();
        let values: Vec<Rational> = s.into_iter().collect();
        let height = values.last().unwrap() - values.first().unwrap();
        Ok(PairHeight { values, height, vertices })
    }

    /// Cones `Δ(F, S) ∩ Δ` of full dimension with `Δ ∈ Φ^max` and `F` passing `keep`.
    fn level_cones(&self, h_ray: &[Int], phi: &Fan, keep: impl Fn(&Rational) -> bool) -> Vec<Cone> {
        let ncs = self.vertex_normal_cones();
        let mut out = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if !keep(&dot_iq(h_ray, v)) {
                continue;
            }
            for m in phi.maximal() {
                let x = ncs[i].intersection(m);
                if x.dim() == m.dim() {
                    out.push(x);
                }
            }
        }
        out
    }

    /// `(Π(h), Σ(h))`.
    pub fn levels(&self, h_ray: &[Int], phi: &Fan, h: &Rational) -> Result<(Fan, Fan), PolytopeError> {
        let ph = self.pair_height(h_ray, phi)?;
        if !ph.values.contains(h) {
            return Err(PolytopeError::NotAHeight(h.clone()));
        }
        let pi = self.level_cones(h_ray, phi, |x| x == h);
        let sigma = self.level_cones(h_ray, phi, |x| x >= h);
        Ok((
            Fan::from_cones_unchecked(self.dim, &pi),
            Fan::from_cones_unchecked(self.dim, &sigma),
        ))
    }

    /// Every face with recession cone equal to the lineality space has dimension at most `ℓ + 1`.
    pub fn is_semisimple(&self) -> bool {
        let l = self.lineality_dim();
        self.faces()
            .iter()
            .filter(|f| f.recession.dim() == l)
            .all(|f| f.dim <= l + 1)
    }

    /// Weierstrass/simple flags, top minimal face and height with respect to an edge `G` of `|Σ(S)|`.
    pub fn g_profile(&self, g: &Cone) -> Result<GProfile, PolytopeError> {
        let support = self.stab.dual();
        if !support.is_regular() {
            return Err(PolytopeError::SupportNotRegular);
        }
        if g.dim() != 1 || !support.rays().contains(&g.rays()[0]) {
            return Err(PolytopeError::NotAnEdge);
        }
        let b = g.rays()[0].clone();
        let g_op = Cone::opposite_face(g, &support).expect("edge of a simplicial cone");
        let weierstrass = self.normal_fan().contains(&g_op);
        let simple = weierstrass && self.is_semisimple();
        let top_vertex = self
            .vertices
            .iter()
            .max_by(|a, b2| dot_iq(&b, a).cmp(&dot_iq(&b, b2)))
            .expect("nonempty")
            .clone();
        Ok(GProfile { weierstrass, simple, top_vertex, height: self.height(&b)? })
    }
}
