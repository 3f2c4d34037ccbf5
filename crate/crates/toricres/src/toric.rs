//! Toric charts of a regular fan: variable systems, monomial pullbacks with
//! translation to a point, and the local frame chosen at each point.

use std::collections::BTreeMap;

use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::cone::Cone;
use crate::exactmath::{dot, inverse_q, IntMatrix, IntVec, Rational};
use crate::fan::Fan;
use crate::newton::{FactoredPoly, MultiPoly};
use crate::upward::{fmt_vec, off_lower_part, owner, LowerPart, UsdNode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ToricError {
    #[error("maximal cone {0} is not regular of full dimension")]
    NotRegular(String),
    #[error("bad point: {0}")]
    BadPoint(String),
    #[error("{0} has no owning free ray")]
    NoOwner(String),
    #[error("no chart contains {0}")]
    NoChart(String),
}

type Result<T> = std::result::Result<T, ToricError>;

/// Affine chart `U(Δ)` of a regular maximal cone, with variables `u1..ud`
/// dual to the sorted edges of `Δ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    pub id: usize,
    pub cone: Cone,
    pub edges: Vec<IntVec>,
    pub vars: Vec<String>,
}

impl Chart {
    pub fn new(id: usize, cone: &Cone) -> Result<Chart> {
        let d = cone.ambient_dim();
        if cone.dim() != d || !cone.is_regular() {
            return Err(ToricError::NotRegular(cone.to_string()));
        }
        let edges = cone.rays().to_vec();
        let vars = (1..=d).map(|i| format!("u{i}")).collect();
        Ok(Chart { id, cone: cone.clone(), edges, vars })
    }

    /// Exponent of `u_i` in the image of the original variable `j`: `⟨b_{E_i}, f_j⟩`.
    pub fn exponent(&self, i: usize, j: usize) -> u32 {
        self.edges[i][j].to_u32().expect("edges lie in the positive orthant")
    }

    /// Dual basis `b∨_{E_i}`, columns of the inverse edge matrix.
    pub fn dual_basis(&self) -> Vec<IntVec> {
        let m = IntMatrix::new(self.edges.clone(), self.edges.len());
        let inv = inverse_q(&m).expect("unimodular");
        let d = self.edges.len();
        (0..d)
            .map(|i| (0..d).map(|j| inv[j][i].to_integer()).collect())
            .collect()
    }

    /// `CHART <id>: rays=<indices> subst x=<monomial> ...`.
    pub fn report_line(&self, fan_rays: &[IntVec], orig_vars: &[String]) -> String {
        let idx: Vec<String> = self
            .edges
            .iter()
            .map(|e| fan_rays.iter().position(|r| r == e).map_or("?".into(), |i| i.to_string()))
            .collect();
        let subst: Vec<String> = orig_vars
            .iter()
            .enumerate()
            .map(|(j, x)| {
                let mono: Vec<String> = (0..self.edges.len())
                    .filter_map(|i| match self.exponent(i, j) {
                        0 => None,
                        1 => Some(self.vars[i].clone()),
                        k => Some(format!("{}^{k}", self.vars[i])),
                    })
                    .collect();
                format!("{x}={}", if mono.is_empty() { "1".into() } else { mono.join("*") })
            })
            .collect();
        format!("CHART {}: rays={} subst {}", self.id, idx.join(","), subst.join(" "))
    }
}

pub fn charts(fan: &Fan) -> Result<Vec<Chart>> {
    let mut max: Vec<Cone> = fan.maximal().to_vec();
    max.sort();
    max.iter().enumerate().map(|(i, c)| Chart::new(i, c)).collect()
}

/// A closed point of a chart over the origin: the face `Θ` where the chart
/// variables vanish and nonzero values `c_E` off `Θ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartPoint {
    pub theta: Cone,
    pub values: Vec<Rational>,
}

impl ChartPoint {
    pub fn new(chart: &Chart, theta: &Cone, values: &[Rational]) -> Result<ChartPoint> {
        if !theta.is_face_of(&chart.cone) {
            return Err(ToricError::BadPoint(format!("{theta} is not a face of {}", chart.cone)));
        }
        for (e, c) in chart.edges.iter().zip(values) {
            if theta.contains(e) != c.is_zero() {
                return Err(ToricError::BadPoint(format!(
                    "c = {c} on edge {} disagrees with {theta}",
                    fmt_vec(e)
                )));
            }
        }
        Ok(ChartPoint { theta: theta.clone(), values: values.to_vec() })
    }
}

/// Images `x_j ↦ ∏_i (u_i + c_i)^{⟨b_{E_i}, f_j⟩}` over the chart variables.
fn images(chart: &Chart, point: &ChartPoint, phi: &MultiPoly) -> Vec<MultiPoly> {
    let f = phi.field();
    let shifted: Vec<MultiPoly> = (0..chart.edges.len())
        .map(|i| {
            let u = MultiPoly::var(f, &chart.vars, i);
            u.add(&MultiPoly::constant(f, &chart.vars, &point.values[i]))
        })
        .collect();
    (0..phi.nvars())
        .map(|j| {
            (0..chart.edges.len()).fold(MultiPoly::one(f, &chart.vars), |acc, i| {
                acc.mul(&shifted[i].pow(chart.exponent(i, j)))
            })
        })
        .collect()
}

pub fn pullback(chart: &Chart, point: &ChartPoint, phi: &MultiPoly) -> MultiPoly {
    phi.compose(&images(chart, point, phi), None)
}

/// Factor-by-factor pullback, split into coordinate monomials, units and the
/// remaining non-unit factors.
pub fn pullback_factored(chart: &Chart, point: &ChartPoint, phi: &FactoredPoly) -> FactoredPoly {
    let imgs = images(chart, point, &phi.unit);
    let f = phi.field();
    let d = chart.edges.len();
    let mut unit = phi.unit.compose(&imgs, None);
    let mut coord = vec![0u32; d];
    let mut rest: Vec<(MultiPoly, u32)> = Vec::new();
    for (w, a) in &phi.factors {
        let p = w.compose(&imgs, None);
        let m = p.monomial_content();
        let q = p.divide_monomial(&m).expect("content divides");
        for i in 0..d {
            coord[i] += m[i] * a;
        }
        if q.constant_term().is_zero() {
            rest.push((q, *a));
        } else {
            unit = unit.mul(&q.pow(*a));
        }
    }
    let mut factors: Vec<(MultiPoly, u32)> = (0..d)
        .filter(|&i| coord[i] > 0)
        .map(|i| (MultiPoly::var(f, &chart.vars, i), coord[i]))
        .collect();
    factors.extend(rest);
    FactoredPoly { unit, factors }
}

/// Where `z̄` lives at a point: the owning free ray, the chart and the index of `z̄`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalFrame {
    Inner { owner: IntVec, chart: Cone, z_index: usize },
    Outer,
}

/// The frame at a point with zero-face `Θ`: `Γ` owns `Θ`, and the chart is the
/// lexicographically least maximal cone of `Σ*` inside `|Ψ(Γ)|` containing `Θ + Γ`.
pub fn chart_local_frame(node: &UsdNode, parts: &BTreeMap<IntVec, LowerPart>, theta: &Cone) -> Result<LocalFrame> {
    if !off_lower_part(node, theta) {
        return Ok(LocalFrame::Outer);
    }
    let gamma = owner(parts, theta).ok_or_else(|| ToricError::NoOwner(theta.to_string()))?;
    let psi = &parts[&gamma].psi;
    let mut cands: Vec<&Cone> = node
        .result
        .maximal()
        .iter()
        .filter(|m| m.contains_cone(theta) && m.rays().contains(&gamma))
        .filter(|m| psi.maximal().iter().any(|p| p.contains_cone(m)))
        .collect();
    cands.sort();
    let chart = cands
        .first()
        .ok_or_else(|| ToricError::NoChart(format!("{theta} + {}", fmt_vec(&gamma))))?;
    let z_index = chart.rays().iter().position(|r| *r == gamma).unwrap();
    Ok(LocalFrame::Inner { owner: gamma, chart: (*chart).clone(), z_index })
}

/// Rays of the fan with the charts in which each is a visible coordinate divisor.
pub fn divisor_ledger(charts: &[Chart]) -> BTreeMap<IntVec, Vec<usize>> {
    let mut out: BTreeMap<IntVec, Vec<usize>> = BTreeMap::new();
    for c in charts {
        for e in &c.edges {
            out.entry(e.clone()).or_default().push(c.id);
        }
    }
    out
}

/// Monomial exponent of `χ(a)` in the chart: `(⟨b_{E_i}, a⟩)_i`.
pub fn chart_exponent(chart: &Chart, a: &[crate::exactmath::Int]) -> IntVec {
    chart.edges.iter().map(|e| dot(e, a)).collect()
}
