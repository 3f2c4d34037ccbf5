//! Fans: finite face-closed cone collections, subdivisions and star subdivisions,
//! and the structure data of H-simple fans.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use thiserror::Error;

use crate::cone::Cone;
use crate::exactmath::{dot, IntVec, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FanError {
    #[error("empty cone collection")]
    Empty,
    #[error("ambient dimension mismatch")]
    DimensionMismatch,
    #[error("not face-closed: face {face} of {cone} missing")]
    NotFaceClosed { cone: String, face: String },
    #[error("cones {0} and {1} do not meet in a common face")]
    BadIntersection(String, String),
    #[error("cone {0} is not in the fan")]
    NotInFan(String),
    #[error("cone {0} is not regular")]
    NotRegular(String),
    #[error("invalid center at position {index}: {reason}")]
    InvalidCenter { index: usize, reason: String },
    #[error("support is not a regular cone")]
    SupportNotRegular,
    #[error("{0} is not an edge of the support")]
    NotAnEdge(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fan {
    ambient: usize,
    cones: BTreeSet<Cone>,
    maximal: Vec<Cone>,
}

/// Face closure of a cone collection; also returns the inputs that are not proper faces of others.
fn face_closure(generators: &[Cone]) -> (BTreeSet<Cone>, Vec<Cone>) {
    let mut all = BTreeSet::new();
    let mut proper = BTreeSet::new();
    for g in generators {
        if all.contains(g) {
            continue;
        }
        for f in g.faces() {
            if &f.cone != g {
                proper.insert(f.cone.clone());
            }
            all.insert(f.cone);
        }
    }
    let maximal: BTreeSet<Cone> = generators.iter().filter(|g| !proper.contains(g)).cloned().collect();
    (all, maximal.into_iter().collect())
}

impl Fan {
    /// Fan generated by a collection of cones meeting pairwise in common faces.
    pub fn from_cones(d: usize, cones: &[Cone]) -> Result<Fan, FanError> {
        validate_fan(d, cones, true)
    }

    /// Unchecked construction; callers guarantee the fan axioms.
    pub(crate) fn from_cones_unchecked(d: usize, cones: &[Cone]) -> Fan {
        let (all, maximal) = face_closure(cones);
        Fan { ambient: d, cones: all, maximal }
    }

    /// `F(C)`: all faces of one cone.
    pub fn face_fan(c: &Cone) -> Fan {
        Self::from_cones_unchecked(c.ambient_dim(), std::slice::from_ref(c))
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn cones(&self) -> impl Iterator<Item = &Cone> {
        self.cones.iter()
    }

    pub fn len(&self) -> usize {
        self.cones.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cones.is_empty()
    }

    pub fn maximal(&self) -> &[Cone] {
        &self.maximal
    }

    pub fn contains(&self, c: &Cone) -> bool {
        self.cones.contains(c)
    }

    pub fn dim(&self) -> usize {
        self.maximal.iter().map(|c| c.dim()).max().unwrap_or(0)
    }

    /// Cones of a given dimension.
    pub fn cones_of_dim(&self, k: usize) -> Vec<Cone> {
        self.cones.iter().filter(|c| c.dim() == k).cloned().collect()
    }

    /// Primitive generators of the one-dimensional cones, sorted.
    pub fn rays(&self) -> Vec<IntVec> {
        let mut r: Vec<IntVec> = self
            .cones
            .iter()
            .filter(|c| c.dim() == 1 && c.is_strongly_convex())
            .map(|c| c.rays()[0].clone())
            .collect();
        r.sort();
        r
    }

    pub fn is_regular(&self) -> bool {
        self.maximal.iter().all(|c| c.is_regular())
    }

    /// All maximal cones have the same dimension.
    pub fn is_flat(&self) -> bool {
        let d = self.dim();
        self.maximal.iter().all(|c| c.dim() == d)
    }

    pub fn support_contains(&self, x: &[crate::exactmath::Int]) -> bool {
        self.maximal.iter().any(|c| c.contains(x))
    }

    /// The unique cone whose relative interior contains `x`.
    pub fn carrier(&self, x: &[crate::exactmath::Int]) -> Option<Cone> {
        self.maximal
            .iter()
            .find(|c| c.contains(x))
            .map(|c| c.minimal_face_containing(x))
    }

    /// Carrier of a cone: the smallest cone of the fan containing it.
    pub fn carrier_of(&self, c: &Cone) -> Option<Cone> {
        self.carrier(&c.relint_point())
    }

    /// `Σ/F`: cones containing `F`.
    pub fn star_of(&self, f: &Cone) -> Vec<Cone> {
        self.cones.iter().filter(|c| c.contains_cone(f)).cloned().collect()
    }

    /// `Σ ∖ X`: cones contained in `X`.
    pub fn restrict_to(&self, x: &Cone) -> Vec<Cone> {
        self.cones.iter().filter(|c| x.contains_cone(c)).cloned().collect()
    }

    /// Subfan of cones contained in the support of `other`.
    pub fn restrict_to_support(&self, other: &Fan) -> Vec<Cone> {
        self.cones
            .iter()
            .filter(|c| other.maximal.iter().any(|m| m.contains_cone(c)))
            .cloned()
            .collect()
    }

    /// `|Σ|` when it is convex.
    pub fn support_cone(&self) -> Option<Cone> {
        let mut gens = Vec::new();
        for c in &self.maximal {
            gens.extend(c.generators());
        }
        let s = Cone::from_generators(self.ambient, &gens);
        let d = s.dim();
        if self.maximal.iter().any(|c| c.dim() != d) {
            return None;
        }
        // Every codimension-one cone is on the boundary of s or shared by two maximal cones.
        for f in self.cones.iter().filter(|c| c.dim() + 1 == d) {
            let owners = self.maximal.iter().filter(|m| m.contains_cone(f)).count();
            let boundary = !s.relint_contains(&f.relint_point());
            if (boundary && owners != 1) || (!boundary && owners != 2) {
                return None;
            }
        }
        Some(s)
    }

    /// Every cone of `self` lies inside some cone of `phi`.
    pub fn is_subdivision(&self, phi: &Fan) -> bool {
        self.maximal.iter().all(|c| phi.maximal.iter().any(|m| m.contains_cone(c)))
    }

    /// `|self| = |other|`, for `self` refining `other`.
    pub fn same_support(&self, other: &Fan) -> bool {
        self.is_subdivision(other) && other.maximal.iter().all(|m| self.covers(m))
    }

    /// The maximal cones inside `m` tile it: same dimension, and every facet
    /// is either on the boundary of `m` or shared by exactly two of them.
    fn covers(&self, m: &Cone) -> bool {
        let inside: Vec<&Cone> = self.maximal.iter().filter(|c| m.contains_cone(c)).collect();
        if inside.is_empty() || inside.iter().any(|c| c.dim() != m.dim()) {
            return false;
        }
        if m.dim() == m.lineality_dim() {
            return inside.len() == 1;
        }
        let boundary: Vec<Cone> = m.facets().into_iter().map(|f| f.cone).collect();
        let mut count: BTreeMap<Cone, usize> = BTreeMap::new();
        for c in &inside {
            for f in c.facets() {
                *count.entry(f.cone).or_default() += 1;
            }
        }
        count.iter().all(|(f, n)| *n == 2 || (*n == 1 && boundary.iter().any(|b| b.contains_cone(f))))
    }

    /// `Σ * F`: star subdivision with center `F`.
    pub fn star_subdivision(&self, f: &Cone) -> Result<Fan, FanError> {
        if !self.contains(f) {
            return Err(FanError::NotInFan(f.to_string()));
        }
        if !f.is_regular() {
            return Err(FanError::NotRegular(f.to_string()));
        }
        if f.dim() <= 1 {
            return Ok(self.clone());
        }
        let b = f.barycenter().map_err(|_| FanError::NotRegular(f.to_string()))?;
        let mut gens: Vec<Cone> = Vec::new();
        for g in &self.maximal {
            if !g.contains_cone(f) {
                gens.push(g.clone());
                continue;
            }
            if !g.is_regular() {
                return Err(FanError::NotRegular(g.to_string()));
            }
            for r in f.rays() {
                let mut rs: Vec<IntVec> = g.rays().iter().filter(|x| *x != r).cloned().collect();
                rs.push(b.clone());
                gens.push(Cone::from_generators(self.ambient, &rs));
            }
        }
        Ok(Self::from_cones_unchecked(self.ambient, &gens))
    }

    /// Left fold of star subdivisions, validating each center before use.
    pub fn iterated_star(&self, centers: &[Cone]) -> Result<Fan, FanError> {
        let mut cur = self.clone();
        for (i, f) in centers.iter().enumerate() {
            let index = i + 1;
            if !cur.contains(f) {
                return Err(FanError::InvalidCenter { index, reason: format!("{f} not in fan") });
            }
            if !f.is_regular() || f.dim() < 2 {
                return Err(FanError::InvalidCenter {
                    index,
                    reason: format!("{f} is not a regular cone of dimension at least 2"),
                });
            }
            cur = cur.star_subdivision(f)?;
        }
        Ok(cur)
    }

    /// H-simple structure data, or `None` when the fan is not H-simple.
    pub fn h_simple_profile(&self, h: &Cone) -> Result<Option<HSimpleProfile>, FanError> {
        let s = self.support_cone().ok_or(FanError::SupportNotRegular)?;
        if !s.is_regular() {
            return Err(FanError::SupportNotRegular);
        }
        if h.dim() != 1 || !s.rays().contains(&h.rays()[0]) {
            return Err(FanError::NotAnEdge(h.to_string()));
        }
        let b_h = h.rays()[0].clone();
        let h_op = Cone::opposite_face(h, &s).expect("h is an edge of a simplicial cone");
        if !self.contains(&h_op) {
            return Ok(None);
        }
        let dim = s.dim();
        let interior = |c: &Cone| s.relint_contains(&c.relint_point());
        if self.cones.iter().any(|c| interior(c) && c.dim() + 1 < dim) {
            return Ok(None);
        }
        let h_order = |list: Vec<Cone>| -> Vec<Cone> {
            let mut keyed: Vec<(Cone, Cone)> =
                list.into_iter().map(|c| (c.minkowski_sum(h), c)).collect();
            keyed.sort_by(|(a, _), (b, _)| {
                if a == b {
                    std::cmp::Ordering::Equal
                } else if a.contains_cone(b) {
                    std::cmp::Ordering::Less
                } else {
                    std::cmp::Ordering::Greater
                }
            });
            keyed.into_iter().map(|(_, c)| c).collect()
        };
        let ordered_max = h_order(self.cones_of_dim(dim));
        let mut skel: Vec<Cone> =
            self.cones.iter().filter(|c| c.dim() + 1 == dim && interior(c)).cloned().collect();
        skel.push(h_op.clone());
        let skeleton = h_order(skel);
        let mut constants = BTreeMap::new();
        for (i, sk) in skeleton.iter().enumerate() {
            let n = sk
                .equations()
                .iter()
                .find(|n| !dot(n, &b_h).is_zero())
                .expect("skeleton cone does not contain H");
            for e in s.rays().iter().filter(|e| **e != b_h) {
                let c = -Rational::new(dot(n, e), dot(n, &b_h));
                constants.insert((i + 1, e.clone()), c);
            }
        }
        Ok(Some(HSimpleProfile { h: h.clone(), h_ray: b_h, ordered_max, skeleton, constants }))
    }

    /// Plain-text export: header, sorted rays, then maximal cones by ray index.
    pub fn to_text(&self) -> String {
        let rays = self.rays();
        let mut out = format!(
            "FAN dim={} rays={} cones={}\n",
            self.ambient,
            rays.len(),
            self.maximal.len()
        );
        for (i, r) in rays.iter().enumerate() {
            let s: Vec<String> = r.iter().map(|x| x.to_string()).collect();
            out.push_str(&format!("RAY {i}: {}\n", s.join(" ")));
        }
        let mut lines: Vec<Vec<usize>> = self
            .maximal
            .iter()
            .map(|c| {
                let mut idx: Vec<usize> =
                    c.rays().iter().filter_map(|r| rays.iter().position(|x| x == r)).collect();
                idx.sort();
                idx
            })
            .collect();
        lines.sort();
        for idx in lines {
            let s: Vec<String> = idx.iter().map(|x| x.to_string()).collect();
            out.push_str(&format!("CONE: {}\n", s.join(" ")));
        }
        out
    }
}

/// Checks the fan axioms; with `close` the input is face-closed first.
pub fn validate_fan(d: usize, cones: &[Cone], close: bool) -> Result<Fan, FanError> {
    if cones.is_empty() {
        return Err(FanError::Empty);
    }
    if cones.iter().any(|c| c.ambient_dim() != d) {
        return Err(FanError::DimensionMismatch);
    }
    if !close {
        let set: BTreeSet<&Cone> = cones.iter().collect();
        for c in cones {
            for f in c.faces() {
                if !set.contains(&f.cone) {
                    return Err(FanError::NotFaceClosed {
                        cone: c.to_string(),
                        face: f.cone.to_string(),
                    });
                }
            }
        }
    }
    let fan = Fan::from_cones_unchecked(d, cones);
    for (i, a) in fan.maximal.iter().enumerate() {
        for b in &fan.maximal[i + 1..] {
            let x = a.intersection(b);
            if !x.is_face_of(a) || !x.is_face_of(b) {
                return Err(FanError::BadIntersection(a.to_string(), b.to_string()));
            }
        }
    }
    Ok(fan)
}

/// Real intersection `⋂̂ Φ(j)`; the empty family gives `{V}`.
pub fn real_intersection(d: usize, fans: &[Fan]) -> Fan {
    let mut cur: Vec<Cone> = vec![Cone::full(d)];
    for f in fans {
        let mut next = BTreeSet::new();
        for a in &cur {
            for b in &f.maximal {
                next.insert(a.intersection(b));
            }
        }
        // Keep only cones not contained in another; the rest are faces.
        let list: Vec<Cone> = next.iter().cloned().collect();
        cur = list
            .iter()
            .filter(|c| !list.iter().any(|o| o != *c && o.contains_cone(c)))
            .cloned()
            .collect();
    }
    Fan::from_cones_unchecked(d, &cur)
}

/// Ordered maximal cones and skeleton of an H-simple fan, with structure constants.
#[derive(Clone, Debug)]
pub struct HSimpleProfile {
    pub h: Cone,
    pub h_ray: IntVec,
    pub ordered_max: Vec<Cone>,
    pub skeleton: Vec<Cone>,
    /// `(i, b_E) ↦ c(Σ, i, E)` with `i` starting at 1.
    pub constants: BTreeMap<(usize, IntVec), Rational>,
}

impl HSimpleProfile {
    pub fn r(&self) -> usize {
        self.ordered_max.len()
    }

    pub fn constant(&self, i: usize, e: &IntVec) -> Option<&Rational> {
        self.constants.get(&(i, e.clone()))
    }
}
