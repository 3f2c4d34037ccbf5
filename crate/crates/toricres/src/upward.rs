//! Upward subdivisions of normal fans, driven by strictly decreasing heights.
//!
//! The recursion is: compute the characteristic function γ of `(H, Φ, S)`,
//! lay out a compatible edge schedule, perform the basic subdivision it
//! describes, then recurse into each level part `Ω(i)` with its own direction
//! `H(i)`. Heights are exact rationals and are checked at every node.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::cone::Cone;
use crate::exactmath::{add_vec, dot, dot_iq, floor_ceil, scale_vec, Int, IntVec, Rational};
use crate::fan::{real_intersection, Fan, FanError};
use crate::polytope::{PolytopeError, PseudoPolytope};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UpwardError {
    #[error("hypothesis failed: {0}")]
    Hypothesis(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Fan(#[from] FanError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

type Result<T> = std::result::Result<T, UpwardError>;

pub(crate) fn fmt_vec(v: &[Int]) -> String {
    let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", s.join(","))
}

fn fmt_rat(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Facets of `Δ` forming its H-upper and H-lower boundaries.
pub fn h_boundaries(delta: &Cone, h_ray: &[Int]) -> Result<(Vec<Cone>, Vec<Cone>)> {
    if delta.equations().iter().any(|e| !dot(e, h_ray).is_zero()) {
        return Err(UpwardError::Hypothesis(format!(
            "direction {} not in the span of {delta}",
            fmt_vec(h_ray)
        )));
    }
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    for f in delta.facets() {
        let v = dot(&f.witness, h_ray);
        if v.is_negative() {
            upper.push(f.cone);
        } else if v.is_positive() {
            lower.push(f.cone);
        }
    }
    Ok((upper, lower))
}

/// Interval of `t` with `base + t·dir ∈ cone`; `None` when empty, open ends as `None`.
pub fn line_interval(
    cone: &Cone,
    base: &[Int],
    dir: &[Int],
) -> Option<(Option<Rational>, Option<Rational>)> {
    let mut lo: Option<Rational> = None;
    let mut hi: Option<Rational> = None;
    let mut fixed: Option<Rational> = None;
    for e in cone.equations() {
        let a = dot(e, dir);
        let b = dot(e, base);
        if a.is_zero() {
            if !b.is_zero() {
                return None;
            }
        } else {
            let t = -Rational::new(b, a);
            if fixed.as_ref().is_some_and(|f| *f != t) {
                return None;
            }
            fixed = Some(t);
        }
    }
    for f in cone.facet_normals() {
        let a = dot(f, dir);
        let b = dot(f, base);
        if a.is_zero() {
            if b.is_negative() {
                return None;
            }
        } else {
            let t = -Rational::new(b, a.clone());
            if a.is_positive() {
                lo = Some(lo.map_or(t.clone(), |l| l.max(t)));
            } else {
                hi = Some(hi.map_or(t.clone(), |h| h.min(t)));
            }
        }
    }
    if let Some(t) = fixed {
        if lo.as_ref().is_some_and(|l| *l > t) || hi.as_ref().is_some_and(|h| *h < t) {
            return None;
        }
        return Some((Some(t.clone()), Some(t)));
    }
    if let (Some(l), Some(h)) = (&lo, &hi) {
        if l > h {
            return None;
        }
    }
    Some((lo, hi))
}

/// `(H, Φ)` is admissible for `S`: Φ flat regular of dim ≥ 2, starry around `H`,
/// inside `|Σ(S)|`, and `Σ(S) ∧̂ F(Δ)` is H-simple for every maximal `Δ`.
pub fn check_admissible(h_ray: &IntVec, phi: &Fan, s: &PseudoPolytope) -> Result<()> {
    let h = Cone::ray(h_ray);
    let fail = |m: String| Err(UpwardError::Hypothesis(m));
    if !phi.is_flat() || !phi.is_regular() || phi.dim() < 2 {
        return fail("Φ must be a flat regular fan of dimension at least 2".into());
    }
    if !phi.contains(&h) {
        return fail(format!("H = {} is not a ray of Φ", fmt_vec(h_ray)));
    }
    let support = s.stab().dual();
    for d in phi.maximal() {
        if !d.contains_cone(&h) {
            return fail(format!("Φ is not starry around H: {d}"));
        }
        if !support.contains_cone(d) {
            return fail(format!("{d} is not inside the normal fan support"));
        }
        let local = real_intersection(s.ambient_dim(), &[s.normal_fan().clone(), Fan::face_fan(d)]);
        match local.h_simple_profile(&h) {
            Ok(Some(_)) => {}
            _ => return fail(format!("Σ(S) restricted to {d} is not H-simple")),
        }
    }
    Ok(())
}

/// Characteristic function of `(H, Φ, S)` and derived counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacteristicData {
    pub gamma: BTreeMap<IntVec, Rational>,
    pub m: usize,
    pub m_bar: usize,
    pub fractional: Vec<IntVec>,
    pub h_of: BTreeMap<IntVec, Rational>,
}

fn to_usize(x: &Int) -> usize {
    x.to_string().parse().expect("small nonnegative count")
}

/// Whether `p ∈ |Σ| − ∂₊^H|Σ|`: `p` lies in some cone that also contains `p + εb_H`.
fn strictly_below_top(fan: &Fan, p: &[Int], h_ray: &[Int]) -> bool {
    fan.maximal().iter().any(|k| match line_interval(k, p, h_ray) {
        Some((lo, hi)) => {
            let zero = Rational::zero();
            lo.is_none_or(|l| l <= zero) && hi.is_none_or(|h| h > zero)
        }
        None => false,
    })
}

pub fn characteristic_function(
    h_ray: &IntVec,
    phi: &Fan,
    s: &PseudoPolytope,
) -> Result<CharacteristicData> {
    let ph = s.pair_height(h_ray, phi)?;
    if !ph.height.is_positive() {
        return Err(UpwardError::Hypothesis("pair height must be positive".into()));
    }
    let top = ph.values.last().unwrap().clone();
    let (_, sigma_max) = s.levels(h_ray, phi, &top)?;
    let edges: Vec<IntVec> = phi.rays().into_iter().filter(|r| r != h_ray).collect();
    let mut gamma = BTreeMap::new();
    for e in &edges {
        let mut best: Option<Rational> = None;
        for k in sigma_max.maximal() {
            if let Some((_, hi)) = line_interval(k, e, h_ray) {
                let hi = hi.ok_or_else(|| {
                    UpwardError::Invariant(format!("top level cone {k} contains H"))
                })?;
                best = Some(best.map_or(hi.clone(), |b| b.max(hi)));
            }
        }
        let g = best.unwrap_or_else(Rational::zero);
        if g.is_negative() {
            return Err(UpwardError::Invariant(format!("γ{} = {g} < 0", fmt_vec(e))));
        }
        gamma.insert(e.clone(), g);
    }
    let mut m = 0;
    let mut m_bar = 0;
    let mut fractional = Vec::new();
    let mut level_cache: BTreeMap<Rational, Fan> = BTreeMap::new();
    let mut h_of = BTreeMap::new();
    for (e, g) in &gamma {
        let (fl, ce) = floor_ceil(g);
        m += to_usize(&ce);
        m_bar += to_usize(&fl);
        if fl == ce {
            continue;
        }
        fractional.push(e.clone());
        let p = add_vec(e, &scale_vec(h_ray, &ce));
        let mut valid = Vec::new();
        for h in &ph.values {
            if !level_cache.contains_key(h) {
                level_cache.insert(h.clone(), s.levels(h_ray, phi, h)?.1);
            }
            let sig = &level_cache[h];
            valid.push(sig.support_contains(&p) && strictly_below_top(sig, &p, h_ray));
        }
        let count = valid.iter().take_while(|b| **b).count();
        if count == 0 || valid[count..].iter().any(|b| *b) || count == valid.len() {
            return Err(UpwardError::Invariant(format!(
                "level set for {} is not a proper initial segment",
                fmt_vec(e)
            )));
        }
        h_of.insert(e.clone(), ph.values[count - 1].clone());
    }
    if m == 0 {
        return Err(UpwardError::Invariant("all γ vanish at positive height".into()));
    }
    Ok(CharacteristicData { gamma, m, m_bar, fractional, h_of })
}

/// Deterministic compatible schedule: integer parts edge by edge, then the
/// fractional edges by decreasing `h`, ties broken lexicographically.
pub fn compatible_mapping(data: &CharacteristicData) -> Vec<IntVec> {
    let mut out = Vec::with_capacity(data.m);
    for (e, g) in &data.gamma {
        let (fl, _) = floor_ceil(g);
        for _ in 0..to_usize(&fl) {
            out.push(e.clone());
        }
    }
    let mut tail = data.fractional.clone();
    tail.sort_by(|a, b| data.h_of[b].cmp(&data.h_of[a]).then_with(|| a.cmp(b)));
    out.extend(tail);
    out
}

/// Data of the basic subdivision for a schedule `E(1..m)`.
#[derive(Clone, Debug)]
pub struct BasicSubdivision {
    pub h_ray: IntVec,
    pub schedule: Vec<IntVec>,
    /// `F(1..m)`.
    pub f: Vec<Cone>,
    /// Primitive generators of `G(1..m)`.
    pub g: Vec<IntVec>,
    /// Primitive generators of `H(1..m+1)`.
    pub h_seq: Vec<IntVec>,
    pub omega: Fan,
    /// `Ω(1..m+1)`.
    pub parts: Vec<Fan>,
}

pub fn basic_subdivision(h_ray: &IntVec, phi: &Fan, schedule: &[IntVec]) -> Result<BasicSubdivision> {
    let d = phi.ambient_dim();
    let h = Cone::ray(h_ray);
    let mut counts: BTreeMap<IntVec, Int> = BTreeMap::new();
    let mut f = Vec::new();
    let mut g = Vec::new();
    let mut h_seq = Vec::new();
    for e in schedule {
        if e == h_ray || !phi.contains(&Cone::ray(e)) {
            return Err(UpwardError::Hypothesis(format!("{} is not an edge off H", fmt_vec(e))));
        }
        let s = counts.entry(e.clone()).or_insert_with(Int::zero);
        let gi = add_vec(e, &scale_vec(h_ray, s));
        *s += Int::one();
        let hi = add_vec(&gi, h_ray);
        f.push(Cone::from_generators(d, &[gi.clone(), h_ray.clone()]));
        g.push(gi);
        h_seq.push(hi);
    }
    h_seq.push(h_ray.clone());
    let omega = phi.iterated_star(&f)?;
    let mut parts = Vec::new();
    for i in 0..schedule.len() {
        let gh = Cone::from_generators(d, &[g[i].clone(), h_seq[i].clone()]);
        parts.push(Fan::from_cones_unchecked(d, &omega.star_of(&gh)));
    }
    parts.push(Fan::from_cones_unchecked(d, &omega.star_of(&h)));
    Ok(BasicSubdivision { h_ray: h_ray.clone(), schedule: schedule.to_vec(), f, g, h_seq, omega, parts })
}

/// One node of the upward-subdivision recursion.
#[derive(Clone, Debug)]
pub struct UsdNode {
    pub depth: usize,
    pub h_ray: IntVec,
    pub phi: Fan,
    pub height: Rational,
    pub data: Option<CharacteristicData>,
    pub basic: Option<BasicSubdivision>,
    /// `height(H(i), Ω(i), S)` for `i = 1..m+1`.
    pub level_heights: Vec<Rational>,
    /// `M(0..m+1)`.
    pub stage: Vec<usize>,
    /// Subproblems for `i = 1..m+1`.
    pub children: Vec<UsdNode>,
    pub centers: Vec<Cone>,
    /// `Φ * F(1) * ⋯ * F(M)`.
    pub result: Fan,
}

impl UsdNode {
    pub fn m(&self) -> usize {
        self.data.as_ref().map_or(0, |d| d.m)
    }

    pub fn m_bar(&self) -> usize {
        self.data.as_ref().map_or(0, |d| d.m_bar)
    }

    /// `LEVEL` lines in pre-order.
    pub fn trace(&self) -> String {
        let mut out = String::new();
        self.trace_into(&mut out);
        out
    }

    fn trace_into(&self, out: &mut String) {
        let _ = writeln!(
            out,
            "LEVEL depth={} H={} height={} m={} mbar={}",
            self.depth,
            fmt_vec(&self.h_ray),
            fmt_rat(&self.height),
            self.m(),
            self.m_bar()
        );
        for c in &self.children {
            c.trace_into(out);
        }
    }

    /// Every node in pre-order.
    pub fn nodes(&self) -> Vec<&UsdNode> {
        let mut v = vec![self];
        for c in &self.children {
            v.extend(c.nodes());
        }
        v
    }
}

fn leaf(depth: usize, h_ray: &IntVec, phi: Fan, height: Rational) -> UsdNode {
    UsdNode {
        depth,
        h_ray: h_ray.clone(),
        result: phi.clone(),
        phi,
        height,
        data: None,
        basic: None,
        level_heights: Vec::new(),
        stage: Vec::new(),
        children: Vec::new(),
        centers: Vec::new(),
    }
}

/// Upward subdivision of `(H, Φ, S)` after checking admissibility.
pub fn upward_subdivision(h_ray: &IntVec, phi: &Fan, s: &PseudoPolytope) -> Result<UsdNode> {
    check_admissible(h_ray, phi, s)?;
    usd_rec(0, h_ray, phi, s)
}

fn usd_rec(depth: usize, h_ray: &IntVec, phi: &Fan, s: &PseudoPolytope) -> Result<UsdNode> {
    let d = phi.ambient_dim();
    let height = s.pair_height(h_ray, phi)?.height;
    if height.is_zero() {
        return Ok(leaf(depth, h_ray, phi.clone(), height));
    }
    let data = characteristic_function(h_ray, phi, s)?;
    let schedule = compatible_mapping(&data);
    let basic = basic_subdivision(h_ray, phi, &schedule)?;
    let m = data.m;
    let m_bar = data.m_bar;
    let mut level_heights = Vec::new();
    for (i, part) in basic.parts.iter().enumerate() {
        let lh = s.pair_height(&basic.h_seq[i], part)?.height;
        if lh >= height {
            return Err(UpwardError::Invariant(format!(
                "height inequality fails at level {}: {} ≥ {}",
                i + 1,
                fmt_rat(&lh),
                fmt_rat(&height)
            )));
        }
        if i < m_bar && !lh.is_zero() {
            return Err(UpwardError::Invariant(format!(
                "level {} ≤ m̄ has height {}",
                i + 1,
                fmt_rat(&lh)
            )));
        }
        level_heights.push(lh);
    }
    let mut stage = vec![m; m + 2];
    let mut centers = basic.f.clone();
    let mut current = basic.omega.clone();
    let mut children = Vec::new();
    for mu in 1..=m + 1 {
        let part = &basic.parts[mu - 1];
        let hm = &basic.h_seq[mu - 1];
        if mu <= m_bar {
            children.push(leaf(depth + 1, hm, part.clone(), level_heights[mu - 1].clone()));
            continue;
        }
        let sub = Fan::from_cones_unchecked(d, &current.restrict_to_support(part));
        let child = usd_rec(depth + 1, hm, &sub, s)?;
        if child.height != level_heights[mu - 1] {
            return Err(UpwardError::Invariant(format!(
                "refined level {mu} changed height: {} vs {}",
                fmt_rat(&child.height),
                fmt_rat(&level_heights[mu - 1])
            )));
        }
        current = current.iterated_star(&child.centers)?;
        centers.extend(child.centers.iter().cloned());
        stage[mu] = stage[mu - 1] + child.centers.len();
        children.push(child);
    }
    Ok(UsdNode {
        depth,
        h_ray: h_ray.clone(),
        phi: phi.clone(),
        height,
        data: Some(data),
        basic: Some(basic),
        level_heights,
        stage,
        children,
        centers,
        result: current,
    })
}

/// Rays of `Φ̃` not contained in `|Φ − (Φ/H)|`.
pub fn free_rays(node: &UsdNode) -> Vec<IntVec> {
    let h = Cone::ray(&node.h_ray);
    let lower: Vec<Cone> = node.phi.cones().filter(|c| !c.contains_cone(&h)).cloned().collect();
    node.result
        .rays()
        .into_iter()
        .filter(|r| !lower.iter().any(|c| c.contains(r)))
        .collect()
}

/// Whether `Θ ⊄ |Φ − (Φ/H)|`.
pub fn off_lower_part(node: &UsdNode, theta: &Cone) -> bool {
    let h = Cone::ray(&node.h_ray);
    !node.phi.maximal().iter().any(|m| {
        node.phi
            .cones()
            .filter(|c| !c.contains_cone(&h) && m.contains_cone(c))
            .any(|c| c.contains_cone(theta))
    })
}

/// H-ordered index together with the lower part and lower main part below a free ray.
#[derive(Clone, Debug)]
pub struct LowerPart {
    pub index: usize,
    pub psi: Fan,
    pub psi_open: Vec<Cone>,
}

pub fn lower_parts(node: &UsdNode) -> BTreeMap<IntVec, LowerPart> {
    let mut out = BTreeMap::new();
    let Some(basic) = &node.basic else {
        out.insert(
            node.h_ray.clone(),
            LowerPart { index: 1, psi: node.phi.clone(), psi_open: node.phi.cones().cloned().collect() },
        );
        return out;
    };
    let m = node.m();
    let d = node.phi.ambient_dim();
    for (k, child) in node.children.iter().enumerate() {
        let i = k + 1;
        let g_cone = if i <= m { Some(Cone::ray(&basic.g[k])) } else { None };
        for (gamma, lp) in lower_parts(child) {
            let index = i - 1 + node.stage[i - 1] - m + lp.index;
            let psi_open = match &g_cone {
                Some(g) => lp
                    .psi_open
                    .into_iter()
                    .filter(|t| {
                        basic.omega.carrier_of(t).is_some_and(|c| c.contains_cone(g))
                    })
                    .collect(),
                None => lp.psi_open,
            };
            let _ = d;
            out.insert(gamma, LowerPart { index, psi: lp.psi, psi_open });
        }
    }
    out
}

/// The free ray whose lower main part contains `Θ`.
pub fn owner(parts: &BTreeMap<IntVec, LowerPart>, theta: &Cone) -> Option<IntVec> {
    let mut it = parts.iter().filter(|(_, lp)| lp.psi_open.contains(theta));
    let first = it.next().map(|(g, _)| g.clone());
    if it.next().is_some() {
        return None;
    }
    first
}

/// Tallies of the hard height verification.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HardHeightReport {
    pub codim_one: usize,
    pub equalities: usize,
    pub constancy: usize,
    pub factor_checks: usize,
}

fn width(face_vertices: &[Vec<Rational>], b: &[Int]) -> Rational {
    let vals: Vec<Rational> = face_vertices.iter().map(|v| dot_iq(b, v)).collect();
    vals.iter().max().unwrap() - vals.iter().min().unwrap()
}

/// Verifies the hard height inequality and its equality criterion on every cone
/// of `Σ*` off the lower part; with `factor`, also the version for a summand `T` of `S`.
pub fn hard_height_check(
    node: &UsdNode,
    s: &PseudoPolytope,
    factor: Option<&PseudoPolytope>,
) -> Result<HardHeightReport> {
    let d = s.ambient_dim();
    let parts = lower_parts(node);
    let common = real_intersection(d, &[s.normal_fan().clone(), node.phi.clone()]);
    let h = Cone::ray(&node.h_ray);
    let mut report = HardHeightReport::default();
    let bad = |m: String| Err(UpwardError::Invariant(m));
    for theta in node.result.cones() {
        if !off_lower_part(node, theta) {
            continue;
        }
        let x = theta.relint_point();
        let lambda = common.carrier(&x).expect("Σ* lies in |Φ|");
        let delta = node.phi.carrier(&x).expect("Σ* lies in |Φ|");
        let sd = s.plus_cone(&delta.dual());
        let face = sd.face_at(&lambda.relint_point())?;
        if face.normal_cone != lambda {
            return bad(format!("normal cone of the face over {lambda} is {}", face.normal_cone));
        }
        if lambda.dim() == delta.dim() {
            for w in delta.rays().iter().chain(delta.lineality_basis()) {
                if !width(&face.vertices, w).is_zero() {
                    return bad(format!("⟨ω,·⟩ not constant over face of {lambda}"));
                }
            }
            report.constancy += 1;
            continue;
        }
        if lambda.dim() + 1 != delta.dim() {
            return bad(format!("carrier dimensions {} and {}", lambda.dim(), delta.dim()));
        }
        report.codim_one += 1;
        let Some(gamma) = owner(&parts, theta) else {
            return bad(format!("{theta} has no unique owner"));
        };
        let limit = sd.height(&node.h_ray)?;
        let w = width(&face.vertices, &gamma);
        if face.recession.generators().iter().any(|y| !dot(y, &gamma).is_zero()) {
            return bad(format!("unbounded Γ-values over face of {lambda}"));
        }
        if w > limit {
            return bad(format!(
                "hard height inequality fails at {theta}: {} > {}",
                fmt_rat(&w),
                fmt_rat(&limit)
            ));
        }
        let profile = sd
            .normal_fan()
            .h_simple_profile(&h)?
            .ok_or_else(|| UpwardError::Invariant(format!("Σ(S + {delta}∨) not H-simple")))?;
        let integral = delta
            .rays()
            .iter()
            .filter(|e| **e != node.h_ray)
            .all(|e| profile.constant(2, e).is_some_and(|c| c.is_integer()));
        let criterion = sd.c() == 2 && integral;
        if (w == limit) != criterion {
            return bad(format!("equality criterion mismatch at {theta}"));
        }
        if w == limit {
            report.equalities += 1;
            if *theta != lambda || gamma != node.h_ray {
                return bad(format!("equality at {theta} without Θ = Λ and Γ = H"));
            }
        }
        if let Some(t) = factor {
            let td = t.plus_cone(&delta.dual());
            if td.normal_fan().contains(&lambda) {
                let ft = td.face_at(&lambda.relint_point())?;
                let wt = width(&ft.vertices, &gamma);
                let lt = td.height(&node.h_ray)?;
                if wt > lt {
                    return bad(format!("factor hard height inequality fails at {theta}"));
                }
                report.factor_checks += 1;
            }
        }
    }
    Ok(report)
}

/// `Σ*` subdivides `Σ(S) ∧̂ Φ`.
pub fn subdivides_normal_fan(node: &UsdNode, s: &PseudoPolytope) -> bool {
    let common = real_intersection(s.ambient_dim(), &[s.normal_fan().clone(), node.phi.clone()]);
    node.result.is_subdivision(&common) && node.result.same_support(&node.phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{ivec, rat};

    fn cusp() -> PseudoPolytope {
        PseudoPolytope::newton(2, &[ivec(&[0, 2]), ivec(&[3, 0])]).unwrap()
    }

    #[test]
    fn boundaries() {
        let (u, l) = h_boundaries(&Cone::full(2), &ivec(&[0, 1])).unwrap();
        assert!(u.is_empty() && l.is_empty());
        let c = Cone::from_i64(2, &[&[1, 0], &[1, 2]]);
        let (u, l) = h_boundaries(&c, &ivec(&[0, 1])).unwrap();
        assert_eq!(u, vec![Cone::from_i64(2, &[&[1, 2]])]);
        assert_eq!(l, vec![Cone::from_i64(2, &[&[1, 0]])]);
        let (u, l) = h_boundaries(&Cone::orthant(2), &ivec(&[0, 1])).unwrap();
        assert!(u.is_empty());
        assert_eq!(l, vec![Cone::from_i64(2, &[&[1, 0]])]);
    }

    #[test]
    fn cusp_characteristic() {
        let phi = Fan::face_fan(&Cone::orthant(2));
        let data = characteristic_function(&ivec(&[0, 1]), &phi, &cusp()).unwrap();
        assert_eq!(data.gamma[&ivec(&[1, 0])], rat(3, 2));
        assert_eq!((data.m, data.m_bar), (2, 1));
        assert_eq!(data.fractional, vec![ivec(&[1, 0])]);
        assert_eq!(compatible_mapping(&data), vec![ivec(&[1, 0]), ivec(&[1, 0])]);
    }

    #[test]
    fn cusp_basic() {
        let phi = Fan::face_fan(&Cone::orthant(2));
        let b = basic_subdivision(&ivec(&[0, 1]), &phi, &[ivec(&[1, 0]), ivec(&[1, 0])]).unwrap();
        assert_eq!(b.omega.rays(), vec![ivec(&[0, 1]), ivec(&[1, 0]), ivec(&[1, 1]), ivec(&[1, 2])]);
        let empty = basic_subdivision(&ivec(&[0, 1]), &phi, &[]).unwrap();
        assert_eq!(empty.omega, phi);
        assert_eq!(empty.parts, vec![phi.clone()]);
    }

    #[test]
    fn cusp_upward() {
        let phi = Fan::face_fan(&Cone::orthant(2));
        let s = cusp();
        let node = upward_subdivision(&ivec(&[0, 1]), &phi, &s).unwrap();
        assert_eq!(node.centers.len(), 3);
        assert_eq!(
            node.centers,
            vec![
                Cone::orthant(2),
                Cone::from_i64(2, &[&[1, 1], &[0, 1]]),
                Cone::from_i64(2, &[&[1, 1], &[1, 2]])
            ]
        );
        assert_eq!(
            node.result.rays(),
            vec![ivec(&[0, 1]), ivec(&[1, 0]), ivec(&[1, 1]), ivec(&[1, 2]), ivec(&[2, 3])]
        );
        assert_eq!(node.result.maximal().len(), 4);
        assert_eq!(node.level_heights, vec![rat(0, 1), rat(1, 1), rat(0, 1)]);
        assert!(subdivides_normal_fan(&node, &s));
        let parts = lower_parts(&node);
        let idx: Vec<(IntVec, usize)> = parts.iter().map(|(g, lp)| (g.clone(), lp.index)).collect();
        assert_eq!(
            idx,
            vec![(ivec(&[0, 1]), 4), (ivec(&[1, 1]), 1), (ivec(&[1, 2]), 3), (ivec(&[2, 3]), 2)]
        );
        hard_height_check(&node, &s, None).unwrap();
    }

    #[test]
    fn height_zero_is_identity() {
        let phi = Fan::face_fan(&Cone::orthant(2));
        let s = PseudoPolytope::newton(2, &[ivec(&[1, 1])]).unwrap();
        let node = upward_subdivision(&ivec(&[0, 1]), &phi, &s).unwrap();
        assert!(node.centers.is_empty());
        assert_eq!(node.result, phi);
        let parts = lower_parts(&node);
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[&ivec(&[0, 1])].index, 1);
    }
}
