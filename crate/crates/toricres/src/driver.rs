//! Problem files, the single resolution step with its certificate checks, the
//! resolution game against an automatic adversary, and the command runners.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::cone::Cone;
use crate::exactmath::{int, rat_int, Int, IntVec, Rational};
use crate::fan::{Fan, FanError};
use crate::newton::{
    eliminate_removable, factored_is_weierstrass, format_point, generic_tilt, inv_inv2, is_z_simple,
    main_factor, newton_polyhedron, parse_poly, removable_faces, weierstrass_data, FactoredPoly, Field,
    Invariants, MultiPoly, NewtonError, Simplicity,
};
use crate::polytope::PolytopeError;
use crate::toric::{charts, chart_local_frame, pullback_factored, Chart, ChartPoint, LocalFrame, ToricError};
use crate::upward::{fmt_vec, lower_parts, upward_subdivision, UpwardError, UsdNode};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DriverError {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("hypothesis not met: {0}")]
    Hypothesis(String),
    #[error("step assertion violated: {0}")]
    Assertion(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl DriverError {
    pub fn exit_code(&self) -> i32 {
        match self {
            DriverError::Parse { .. } => 2,
            DriverError::Hypothesis(_) | DriverError::Io(_) => 1,
            DriverError::Assertion(_) => 3,
        }
    }
}

impl From<NewtonError> for DriverError {
    fn from(e: NewtonError) -> Self {
        match e {
            NewtonError::Parse { col, msg } => DriverError::Parse { line: 0, col, msg },
            NewtonError::InvIsOne(_) => DriverError::Assertion(e.to_string()),
            NewtonError::Polytope(_) => DriverError::Assertion(e.to_string()),
            _ => DriverError::Hypothesis(e.to_string()),
        }
    }
}

impl From<UpwardError> for DriverError {
    fn from(e: UpwardError) -> Self {
        match e {
            UpwardError::Hypothesis(_) => DriverError::Hypothesis(e.to_string()),
            _ => DriverError::Assertion(e.to_string()),
        }
    }
}

impl From<ToricError> for DriverError {
    fn from(e: ToricError) -> Self {
        DriverError::Assertion(e.to_string())
    }
}

impl From<FanError> for DriverError {
    fn from(e: FanError) -> Self {
        DriverError::Assertion(e.to_string())
    }
}

impl From<PolytopeError> for DriverError {
    fn from(e: PolytopeError) -> Self {
        DriverError::Assertion(e.to_string())
    }
}

type Result<T> = std::result::Result<T, DriverError>;

pub const DEFAULT_ORDER: u32 = 16;
pub const DEFAULT_VALUES: &str = "1,-1,2";

/// Command-line settings that take precedence over the problem file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub field: Option<Field>,
    pub z: Option<String>,
    pub order: Option<u32>,
    pub values: Option<String>,
}

/// A parsed problem `(P, z, φ)` with session settings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub field: Field,
    pub vars: Vec<String>,
    pub z: usize,
    pub phi: FactoredPoly,
    pub order: u32,
    pub values: Vec<Rational>,
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// `Q` or `Fp:<p>`.
pub fn parse_field(s: &str) -> std::result::Result<Field, String> {
    if s == "Q" {
        return Ok(Field::Q);
    }
    let p = s
        .strip_prefix("Fp:")
        .and_then(|p| p.parse::<u64>().ok())
        .ok_or_else(|| format!("expected Q or Fp:<p>, got '{s}'"))?;
    if !is_prime(p) {
        return Err(format!("{p} is not prime"));
    }
    Ok(Field::Fp(p))
}

/// Comma-separated sample values, reduced into the field, zeros and duplicates dropped.
pub fn parse_values(s: &str, field: Field) -> std::result::Result<Vec<Rational>, String> {
    let mut out = Vec::new();
    for tok in s.split(',') {
        let tok = tok.trim();
        let (n, d) = tok.split_once('/').unwrap_or((tok, "1"));
        let n: Int = n.parse().map_err(|_| format!("bad value '{tok}'"))?;
        let d: Int = d.parse().map_err(|_| format!("bad value '{tok}'"))?;
        if d.is_zero() {
            return Err(format!("bad value '{tok}'"));
        }
        let v = field
            .reduce(&Rational::new(n, d))
            .ok_or_else(|| format!("value '{tok}' undefined in {field}"))?;
        if !v.is_zero() && !out.contains(&v) {
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err("no nonzero sample values".into());
    }
    Ok(out)
}

fn perr(line: usize, col: usize, msg: impl Into<String>) -> DriverError {
    DriverError::Parse { line, col, msg: msg.into() }
}

/// Parses the line-oriented problem grammar. Monomial content of each factor is
/// split off into coordinate factors.
pub fn parse_problem(text: &str, ov: &Overrides) -> Result<Problem> {
    let mut field = Field::Q;
    let mut vars: Option<Vec<String>> = None;
    let mut z_name: Option<String> = None;
    let mut unit_src: Option<(usize, usize, String)> = None;
    let mut factor_src: Vec<(usize, usize, u32, String)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap();
        let trimmed = body.trim_start();
        let indent = body.len() - trimmed.len();
        let trimmed = trimmed.trim_end();
        if trimmed.is_empty() {
            continue;
        }
        let (kw, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
        let rest_col = indent + kw.len() + 1 + (rest.len() - rest.trim_start().len()) + 1;
        let rest = rest.trim();
        match kw {
            "field" => {
                field = if rest == "Q" {
                    Field::Q
                } else if let Some(p) = rest.strip_prefix("Fp").map(str::trim) {
                    let p = p
                        .strip_prefix("p=")
                        .and_then(|p| p.trim().parse::<u64>().ok())
                        .ok_or_else(|| perr(line, rest_col, "expected 'Fp p=<prime>'"))?;
                    if !is_prime(p) {
                        return Err(perr(line, rest_col, format!("{p} is not prime")));
                    }
                    Field::Fp(p)
                } else {
                    return Err(perr(line, rest_col, "expected 'Q' or 'Fp p=<prime>'"));
                };
            }
            "vars" => {
                let names: Vec<String> = rest.split_whitespace().map(String::from).collect();
                let valid = |n: &String| {
                    n.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                        && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                };
                if names.is_empty() || !names.iter().all(valid) {
                    return Err(perr(line, rest_col, "expected variable names"));
                }
                if names.iter().collect::<BTreeSet<_>>().len() != names.len() {
                    return Err(perr(line, rest_col, "duplicate variable"));
                }
                vars = Some(names);
            }
            "z" => z_name = Some(rest.to_string()),
            "unit" => unit_src = Some((line, rest_col, rest.to_string())),
            "factor" => {
                let (m, poly) = rest
                    .split_once(':')
                    .ok_or_else(|| perr(line, rest_col, "expected '<mult> : <poly>'"))?;
                let mult: u32 = m
                    .trim()
                    .parse()
                    .ok()
                    .filter(|m| *m > 0)
                    .ok_or_else(|| perr(line, rest_col, "multiplicity must be a positive integer"))?;
                let col = rest_col + m.len() + 1 + (poly.len() - poly.trim_start().len());
                factor_src.push((line, col, mult, poly.trim().to_string()));
            }
            _ => return Err(perr(line, indent + 1, format!("unknown keyword '{kw}'"))),
        }
    }
    if let Some(f) = ov.field {
        field = f;
    }
    let vars = vars.ok_or_else(|| perr(0, 0, "missing 'vars' line"))?;
    let z_name = ov.z.clone().or(z_name).ok_or_else(|| perr(0, 0, "missing 'z' line"))?;
    let z = vars
        .iter()
        .position(|v| *v == z_name)
        .ok_or_else(|| perr(0, 0, format!("z = '{z_name}' is not a declared variable")))?;
    let poly = |line: usize, col: usize, s: &str| -> Result<MultiPoly> {
        parse_poly(s, field, &vars).map_err(|e| match e {
            NewtonError::Parse { col: c, msg } => perr(line, col + c - 1, msg),
            other => perr(line, col, other.to_string()),
        })
    };
    let unit = match &unit_src {
        Some((l, c, s)) => {
            let u = poly(*l, *c, s)?;
            if u.constant_term().is_zero() {
                return Err(perr(*l, *c, "unit must have a nonzero constant term"));
            }
            u
        }
        None => MultiPoly::one(field, &vars),
    };
    let mut unit = unit;
    let mut coord = vec![0u32; vars.len()];
    let mut rest = Vec::new();
    for (l, c, m, s) in &factor_src {
        let f = poly(*l, *c, s)?;
        if f.is_zero() || !f.constant_term().is_zero() {
            return Err(perr(*l, *c, "factor must be a nonzero non-unit"));
        }
        let content = f.monomial_content();
        let q = f.divide_monomial(&content).expect("content divides");
        for (k, e) in coord.iter_mut().zip(&content) {
            *k += e * m;
        }
        if q.constant_term().is_zero() {
            rest.push((q, *m));
        } else {
            unit = unit.mul(&q.pow(*m));
        }
    }
    if factor_src.is_empty() {
        return Err(perr(0, 0, "no 'factor' lines"));
    }
    let mut factors: Vec<(MultiPoly, u32)> = (0..vars.len())
        .filter(|&i| coord[i] > 0)
        .map(|i| (MultiPoly::var(field, &vars, i), coord[i]))
        .collect();
    factors.extend(rest);
    let values = parse_values(ov.values.as_deref().unwrap_or(DEFAULT_VALUES), field)
        .map_err(|m| perr(0, 0, m))?;
    Ok(Problem {
        field,
        vars,
        z,
        phi: FactoredPoly { unit, factors },
        order: ov.order.unwrap_or(DEFAULT_ORDER),
        values,
    })
}

impl Problem {
    /// The problem in file grammar; re-parses to an equal problem.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        match self.field {
            Field::Q => s.push_str("field Q\n"),
            Field::Fp(p) => {
                let _ = writeln!(s, "field Fp p={p}");
            }
        }
        let _ = writeln!(s, "vars {}", self.vars.join(" "));
        let _ = writeln!(s, "z {}", self.vars[self.z]);
        let _ = writeln!(s, "unit {}", self.phi.unit);
        for (f, m) in &self.phi.factors {
            let _ = writeln!(s, "factor {m} : {f}");
        }
        s
    }

    fn with_state(&self, vars: Vec<String>, z: usize, phi: FactoredPoly) -> Problem {
        Problem { field: self.field, vars, z, phi, order: self.order, values: self.values.clone() }
    }

    pub fn expanded(&self) -> MultiPoly {
        self.phi.expand()
    }
}

fn fmt_inv2(i: &Invariants) -> String {
    i.inv2.map_or("-".into(), |v| v.to_string())
}

fn sample_header(p: &Problem) -> String {
    let v: Vec<String> = p.values.iter().map(|x| x.to_string()).collect();
    format!(
        "SAMPLE field={} order={} values={} (points are a finite sample, not all closed points)",
        p.field,
        p.order,
        v.join(",")
    )
}

/// `weierstrass=… simple=… removable=… inv=… [inv2=…]`.
pub fn check_line(p: &Problem) -> Result<String> {
    let phi = p.expanded();
    let wd = weierstrass_data(&phi, p.z)?;
    if !wd.is_type {
        return Ok("weierstrass=no simple=no removable=- inv=-".into());
    }
    let simple = matches!(is_z_simple(&phi, p.z)?, Simplicity::Simple);
    let inv = inv_inv2(&p.phi, p.z, p.order)?;
    let main = main_factor(&p.phi, p.z)?;
    let removable = if main.factors.is_empty() {
        "none".to_string()
    } else {
        match removable_faces(&main.expand(), p.z)?.len() {
            0 => "none".to_string(),
            k => k.to_string(),
        }
    };
    let mut s = format!(
        "weierstrass=yes simple={} removable={removable} inv={}",
        if simple { "yes" } else { "no" },
        inv.inv
    );
    if let Some(v) = inv.inv2 {
        let _ = write!(s, " inv2={v}");
    }
    Ok(s)
}

/// One enumerated point of the step: chart, zero face, values and the local invariants.
#[derive(Clone, Debug)]
pub struct Branch {
    pub chart: usize,
    pub theta: Cone,
    pub values: Vec<Rational>,
    pub owner: IntVec,
    pub z_index: usize,
    pub weierstrass: bool,
    pub inv: Invariants,
    pub state: FactoredPoly,
    pub vars: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct StepReport {
    pub before: Invariants,
    pub node: UsdNode,
    pub charts: Vec<Chart>,
    pub branches: Vec<Branch>,
}

fn check_step_hypotheses(p: &Problem) -> Result<Invariants> {
    if p.vars.len() < 2 {
        return Err(DriverError::Hypothesis("dimension must be at least 2".into()));
    }
    let phi = p.expanded();
    match is_z_simple(&phi, p.z)? {
        Simplicity::Simple => {}
        Simplicity::NotWeierstrass => {
            return Err(DriverError::Hypothesis(format!("Γ₊ is not of {}-Weierstrass type", p.vars[p.z])))
        }
        Simplicity::HighFace(v) => {
            let pts: Vec<String> = v.iter().map(|x| format_point(x)).collect();
            return Err(DriverError::Hypothesis(format!(
                "Γ₊ is not {}-simple: compact face of dimension {} with vertices {}",
                p.vars[p.z],
                v.len().min(p.vars.len()) - 1,
                pts.join(" ")
            )));
        }
    }
    let inv = inv_inv2(&p.phi, p.z, p.order)?;
    if inv.inv > 0 {
        let psi = main_factor(&p.phi, p.z)?.expand();
        let rem = removable_faces(&psi, p.z)?;
        if let Some(f) = rem.first() {
            let pts: Vec<String> = f.vertices.iter().map(|x| format_point(x)).collect();
            return Err(DriverError::Hypothesis(format!(
                "main factor has a z-removable face with vertices {}",
                pts.join(" ")
            )));
        }
    } else {
        if inv.inv2.unwrap_or(0) < 2 {
            return Err(DriverError::Hypothesis("inv = 0 and inv2 ≤ 1: already normal crossings".into()));
        }
        if !p.phi.factors.iter().any(|(f, _)| f.divisible_by_var(p.z)) {
            return Err(DriverError::Hypothesis(format!("{} does not divide φ", p.vars[p.z])));
        }
    }
    Ok(inv)
}

/// Cartesian product of `k` copies of `values`, in lexicographic index order.
fn assignments(values: &[Rational], k: usize) -> Vec<Vec<Rational>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|a| {
                values.iter().map(move |v| {
                    let mut b = a.clone();
                    b.push(v.clone());
                    b
                })
            })
            .collect();
    }
    out
}

/// The upward subdivision of the orthant face fan for `Γ₊(P, φ)` in direction `f_z∨`.
pub fn problem_usd(p: &Problem) -> Result<UsdNode> {
    let d = p.vars.len();
    let s = newton_polyhedron(&p.expanded())?;
    let h: IntVec = (0..d).map(|i| int((i == p.z) as i64)).collect();
    let phi = Fan::face_fan(&Cone::orthant(d));
    Ok(upward_subdivision(&h, &phi, &s)?)
}

pub fn resolution_step(p: &Problem) -> Result<StepReport> {
    let before = check_step_hypotheses(p)?;
    let node = problem_usd(p)?;
    let parts = lower_parts(&node);
    let chs = charts(&node.result)?;
    let mut branches = Vec::new();
    let mut thetas: Vec<&Cone> = node
        .result
        .cones()
        .filter(|t| t.dim() > 0 && t.relint_point().iter().all(|c| c.is_positive()))
        .collect();
    thetas.sort();
    for theta in thetas {
        let LocalFrame::Inner { owner, chart, z_index } = chart_local_frame(&node, &parts, theta)? else {
            return Err(DriverError::Assertion(format!("{theta} lies over the lower part")));
        };
        let ch = chs.iter().find(|c| c.cone == chart).expect("chart of Σ*");
        let free: Vec<usize> = (0..ch.edges.len()).filter(|&i| !theta.contains(&ch.edges[i])).collect();
        for vals in assignments(&p.values, free.len()) {
            let mut c = vec![Rational::zero(); ch.edges.len()];
            for (k, &i) in free.iter().enumerate() {
                c[i] = vals[k].clone();
            }
            let point = ChartPoint::new(ch, theta, &c)?;
            let state = pullback_factored(ch, &point, &p.phi);
            let weierstrass = factored_is_weierstrass(&state, z_index)?;
            let where_ = format!("chart {} Θ={theta} c={}", ch.id, format_point(&c));
            if !weierstrass {
                return Err(DriverError::Assertion(format!("not Weierstrass type at {where_}")));
            }
            let inv = inv_inv2(&state, z_index, p.order)?;
            if before.inv > 0 && inv.inv >= before.inv {
                return Err(DriverError::Assertion(format!(
                    "inv did not drop at {where_}: {} → {}",
                    before.inv, inv.inv
                )));
            }
            if before.inv == 0 && (inv.inv != 0 || inv.inv2 >= before.inv2) {
                return Err(DriverError::Assertion(format!(
                    "inv2 did not drop at {where_}: {} → {}",
                    fmt_inv2(&before),
                    fmt_inv2(&inv)
                )));
            }
            branches.push(Branch {
                chart: ch.id,
                theta: theta.clone(),
                values: c,
                owner: owner.clone(),
                z_index,
                weierstrass,
                inv,
                state,
                vars: ch.vars.clone(),
            });
        }
    }
    Ok(StepReport { before, node, charts: chs, branches })
}

fn ray_indices(rays: &[IntVec], c: &Cone) -> String {
    let v: Vec<String> = c
        .rays()
        .iter()
        .filter_map(|r| rays.iter().position(|x| x == r))
        .map(|i| i.to_string())
        .collect();
    v.join(",")
}

pub fn render_usd(node: &UsdNode) -> String {
    let mut s = node.trace();
    for (i, c) in node.centers.iter().enumerate() {
        let _ = writeln!(s, "CENTER {}: {c}", i + 1);
    }
    s.push_str(&node.result.to_text());
    s
}

impl StepReport {
    pub fn render(&self, p: &Problem) -> String {
        let mut s = format!("STEP inv={} inv2={}\n", self.before.inv, fmt_inv2(&self.before));
        let _ = writeln!(s, "{}", sample_header(p));
        s.push_str(&render_usd(&self.node));
        let rays = self.node.result.rays();
        for c in &self.charts {
            let _ = writeln!(s, "{}", c.report_line(&rays, &p.vars));
        }
        for b in &self.branches {
            let _ = writeln!(
                s,
                "BRANCH chart={} theta={} point={} owner={} zbar={} weierstrass={} inv={} inv2={}",
                b.chart,
                ray_indices(&rays, &b.theta),
                format_point(&b.values),
                fmt_vec(&b.owner),
                b.vars[b.z_index],
                if b.weierstrass { "yes" } else { "no" },
                b.inv.inv,
                fmt_inv2(&b.inv)
            );
        }
        let max_inv = self.branches.iter().map(|b| b.inv.inv).max().unwrap_or(0);
        let max_inv2 = self.branches.iter().filter_map(|b| b.inv.inv2).max();
        let _ = writeln!(
            s,
            "SUMMARY branches={} max_inv={} max_inv2={} assertions=ok",
            self.branches.len(),
            max_inv,
            max_inv2.map_or("-".into(), |v| v.to_string())
        );
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Adversary {
    Exhaustive,
    Worst,
}

/// One node of the game tree.
#[derive(Clone, Debug)]
pub struct GameEntry {
    pub path: String,
    pub step: usize,
    pub action: String,
    pub inv: Option<Invariants>,
    pub state: Problem,
}

#[derive(Clone, Debug)]
pub struct GameTrace {
    pub adversary: Adversary,
    pub entries: Vec<GameEntry>,
    pub won: bool,
    /// Largest number of actions along a won path.
    pub steps: usize,
    /// Unmet hypothesis that ended play at some node.
    pub stop: Option<DriverError>,
}

impl GameTrace {
    pub fn render(&self, p: &Problem, max_steps: usize) -> String {
        let adv = match self.adversary {
            Adversary::Exhaustive => "exhaustive",
            Adversary::Worst => "worst",
        };
        let mut s = format!("GAME adversary={adv} max_steps={max_steps}\n");
        let _ = writeln!(s, "{}", sample_header(p));
        for e in &self.entries {
            let (inv, inv2) = e.inv.as_ref().map_or(("-".into(), "-".into()), |i| (i.inv.to_string(), fmt_inv2(i)));
            let _ = writeln!(s, "NODE path={} step={} action={} inv={inv} inv2={inv2}", e.path, e.step, e.action);
            for l in e.state.to_text().lines() {
                let _ = writeln!(s, "  {l}");
            }
        }
        let result = match (&self.stop, self.won) {
            (Some(_), _) => "stop",
            (None, true) => "win",
            (None, false) => "open",
        };
        let _ = writeln!(s, "RESULT {result} steps={}", self.steps);
        if let Some(e) = &self.stop {
            let _ = writeln!(s, "STOP reason={e}");
        }
        s
    }
}

fn substitute_all(phi: &FactoredPoly, z: usize, image: &MultiPoly) -> FactoredPoly {
    phi.map(|w| w.substitute(z, image))
}

/// The next action at a state, or `None` once it has normal crossings.
enum Move {
    Win(Invariants),
    Replace(String, Problem),
    Step(Invariants, Vec<(String, Problem, Invariants)>),
}

fn next_move(p: &Problem) -> Result<Move> {
    let z = p.z;
    if !factored_is_weierstrass(&p.phi, z)? {
        let t = generic_tilt(&p.expanded(), z)?;
        let alpha: Vec<String> = t.alpha.iter().map(|a| a.to_string()).collect();
        let phi = p.phi.map(|w| t.apply(w, z));
        return Ok(Move::Replace(format!("tilt(alpha={})", alpha.join(",")), p.with_state(p.vars.clone(), z, phi)));
    }
    let inv = inv_inv2(&p.phi, z, p.order)?;
    if inv.inv == 0 && inv.inv2.unwrap_or(0) <= 1 {
        return Ok(Move::Win(inv));
    }
    if inv.inv > 0 {
        let psi = main_factor(&p.phi, z)?.expand();
        if !removable_faces(&psi, z)?.is_empty() {
            let e = eliminate_removable(&psi, z, p.order)?;
            if !e.chi0.is_zero() {
                let zvar = MultiPoly::var(p.field, &p.vars, z);
                let phi = substitute_all(&p.phi, z, &zvar.sub(&e.chi0));
                let action = format!("eliminate(chi0={})", e.chi0.to_string().replace(' ', ""));
                return Ok(Move::Replace(action, p.with_state(p.vars.clone(), z, phi)));
            }
        }
    } else if !p.phi.factors.iter().any(|(f, _)| f.divisible_by_var(z)) {
        let lin = p.phi.factors.iter().find_map(|(f, _)| {
            let co = f.coefficients_in(z);
            let a = co.get(&1)?;
            (co.len() <= 2 && co.keys().all(|k| *k <= 1) && a.len() == 1 && !a.constant_term().is_zero())
                .then(|| co.get(&0).cloned().unwrap_or_else(|| MultiPoly::zero(p.field, &p.vars)).scale(&p.field.inv(&a.constant_term())))
        });
        let Some(b) = lin else {
            return Err(DriverError::Hypothesis(
                "inv = 0 and z does not divide φ, with no linear smooth factor to recentre on; out of scope".into(),
            ));
        };
        let zvar = MultiPoly::var(p.field, &p.vars, z);
        let phi = substitute_all(&p.phi, z, &zvar.sub(&b));
        let action = format!("recentre(z+{})", b.to_string().replace(' ', ""));
        return Ok(Move::Replace(action, p.with_state(p.vars.clone(), z, phi)));
    }
    let report = resolution_step(p)?;
    let succ = report
        .branches
        .into_iter()
        .map(|b| {
            let action = format!(
                "step(chart={},theta={},point={})",
                b.chart,
                ray_indices(&report.node.result.rays(), &b.theta),
                format_point(&b.values)
            );
            (action, p.with_state(b.vars.clone(), b.z_index, b.state), b.inv)
        })
        .collect();
    Ok(Move::Step(inv, succ))
}

pub fn play_game(p: &Problem, adversary: Adversary, max_steps: usize) -> Result<GameTrace> {
    let mut entries = Vec::new();
    let mut frontier: Vec<(String, Problem, String)> = vec![("0".into(), p.clone(), "start".into())];
    let mut won_depth = 0;
    for step in 0..=max_steps {
        let mut next = Vec::new();
        for (path, state, action) in frontier {
            let mv = match next_move(&state) {
                Ok(mv) => mv,
                Err(e @ DriverError::Hypothesis(_)) => {
                    let inv = factored_is_weierstrass(&state.phi, state.z)
                        .ok()
                        .filter(|w| *w)
                        .and_then(|_| inv_inv2(&state.phi, state.z, state.order).ok());
                    entries.push(GameEntry { path, step, action, inv, state });
                    return Ok(GameTrace { adversary, entries, won: false, steps: step, stop: Some(e) });
                }
                Err(e) => return Err(e),
            };
            let inv = match &mv {
                Move::Win(i) | Move::Step(i, _) => Some(i.clone()),
                Move::Replace(..) => inv_inv2(&state.phi, state.z, state.order).ok(),
            };
            entries.push(GameEntry { path: path.clone(), step, action, inv, state });
            if step == max_steps {
                if !matches!(mv, Move::Win(_)) {
                    return Ok(GameTrace { adversary, entries, won: false, steps: max_steps, stop: None });
                }
                continue;
            }
            match mv {
                Move::Win(_) => won_depth = won_depth.max(step),
                Move::Replace(a, q) => next.push((format!("{path}.0"), q, a)),
                Move::Step(_, succ) => {
                    let chosen: Vec<(usize, (String, Problem, Invariants))> = match adversary {
                        Adversary::Exhaustive => succ.into_iter().enumerate().collect(),
                        Adversary::Worst => {
                            let key = |i: &Invariants| (i.inv, i.inv2.unwrap_or(0));
                            let best = succ.iter().map(|s| key(&s.2)).max();
                            succ.into_iter()
                                .enumerate()
                                .filter(|(_, s)| Some(key(&s.2)) == best)
                                .take(1)
                                .collect()
                        }
                    };
                    for (k, (a, q, _)) in chosen {
                        next.push((format!("{path}.{k}"), q, a));
                    }
                }
            }
        }
        if next.is_empty() {
            return Ok(GameTrace { adversary, entries, won: true, steps: won_depth, stop: None });
        }
        frontier = next;
    }
    unreachable!("the last round either wins everywhere or returns open")
}

/// Normal fan of `Γ₊(P, φ)` in fan text.
pub fn render_np(p: &Problem) -> Result<String> {
    let phi = p.expanded();
    let s = newton_polyhedron(&phi)?;
    let mut out = format!("NP dim={} vertices={} c={}\n", p.vars.len(), s.vertices().len(), s.c());
    for (i, v) in s.vertices().iter().enumerate() {
        let t: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(out, "VERTEX {i}: {}", t.join(" "));
    }
    let mut faces: Vec<(usize, Vec<usize>)> = s
        .faces()
        .iter()
        .filter(|f| f.recession.dim() == 0 && f.dim > 0)
        .map(|f| {
            let mut idx: Vec<usize> =
                f.vertices.iter().filter_map(|v| s.vertices().iter().position(|w| w == v)).collect();
            idx.sort();
            (f.dim, idx)
        })
        .collect();
    faces.sort();
    for (d, idx) in faces {
        let t: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "FACE dim={d} compact vertices={}", t.join(","));
    }
    let wd = weierstrass_data(&phi, p.z)?;
    if let Some(top) = wd.top_vertex {
        let t: Vec<Rational> = top.iter().map(|&a| rat_int(&int(a as i64))).collect();
        let _ = writeln!(out, "TOP vertex={} height={}", format_point(&t), wd.z_height.unwrap());
    }
    Ok(out)
}

/// Reads the `FAN` block of fan text.
pub fn parse_fan_text(text: &str) -> Result<Fan> {
    let mut dim = None;
    let mut rays: Vec<IntVec> = Vec::new();
    let mut cones = Vec::new();
    let mut started = false;
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        let t = line.trim();
        if let Some(rest) = t.strip_prefix("FAN ") {
            started = true;
            let d = rest
                .split_whitespace()
                .find_map(|kv| kv.strip_prefix("dim="))
                .and_then(|v| v.parse::<usize>().ok())
                .ok_or_else(|| perr(line_no, 1, "FAN header needs dim="))?;
            dim = Some(d);
        } else if !started {
            continue;
        } else if let Some(rest) = t.strip_prefix("RAY ") {
            let (_, coords) = rest.split_once(':').ok_or_else(|| perr(line_no, 1, "expected 'RAY i: …'"))?;
            let v: std::result::Result<IntVec, _> = coords.split_whitespace().map(|c| c.parse::<Int>()).collect();
            rays.push(v.map_err(|_| perr(line_no, 1, "bad ray coordinate"))?);
        } else if let Some(rest) = t.strip_prefix("CONE:") {
            let idx: std::result::Result<Vec<usize>, _> = rest.split_whitespace().map(|c| c.parse::<usize>()).collect();
            let idx = idx.map_err(|_| perr(line_no, 1, "bad cone index"))?;
            let gens: Option<Vec<IntVec>> = idx.iter().map(|&i| rays.get(i).cloned()).collect();
            let gens = gens.ok_or_else(|| perr(line_no, 1, "cone index out of range"))?;
            cones.push(Cone::from_generators(dim.unwrap(), &gens));
        }
    }
    let d = dim.ok_or_else(|| perr(0, 0, "no FAN block"))?;
    if rays.iter().any(|r| r.len() != d) {
        return Err(perr(0, 0, "ray dimension mismatch"));
    }
    Ok(Fan::from_cones(d, &cones)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Np,
    Fan,
    Usd,
    Check,
    Step,
    Game,
    ExportFan,
}

/// Options shared by the commands.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub overrides: Overrides,
    pub adversary: Adversary,
    pub max_steps: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { overrides: Overrides::default(), adversary: Adversary::Exhaustive, max_steps: 10 }
    }
}

/// Output of a command; a game that stopped on an unmet hypothesis carries
/// both its trace and the error.
#[derive(Clone, Debug)]
pub struct Report {
    pub text: String,
    pub status: Result<()>,
}

/// Runs one command on the input text.
pub fn run(cmd: Command, input: &str, opts: &RunOptions) -> Result<Report> {
    let ok = |text: String| Ok(Report { text, status: Ok(()) });
    if cmd == Command::ExportFan && input.lines().any(|l| l.trim_start().starts_with("FAN ")) {
        return ok(parse_fan_text(input)?.to_text());
    }
    let p = parse_problem(input, &opts.overrides)?;
    match cmd {
        Command::Np => ok(render_np(&p)?),
        Command::Fan => ok(newton_polyhedron(&p.expanded())?.normal_fan().to_text()),
        Command::Usd => ok(render_usd(&problem_usd(&p)?)),
        Command::ExportFan => ok(problem_usd(&p)?.result.to_text()),
        Command::Check => ok(check_line(&p)? + "\n"),
        Command::Step => ok(resolution_step(&p)?.render(&p)),
        Command::Game => {
            let trace = play_game(&p, opts.adversary, opts.max_steps)?;
            let text = trace.render(&p, opts.max_steps);
            Ok(Report { text, status: trace.stop.map_or(Ok(()), Err) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUSP: &str = "field Q\nvars x z\nz z\nfactor 1 : z^2 + x^3\n";

    #[test]
    fn parse_roundtrip() {
        let p = parse_problem(CUSP, &Overrides::default()).unwrap();
        assert_eq!(p.vars, vec!["x", "z"]);
        assert_eq!(p.values.len(), 3);
        let q = parse_problem(&p.to_text(), &Overrides::default()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn parse_errors() {
        let e = parse_problem("field Q\nvars x z\nz z\nfactor 1 : z^2 + x^^3\n", &Overrides::default()).unwrap_err();
        assert!(matches!(e, DriverError::Parse { line: 4, col: 20, .. }), "{e:?}");
        assert_eq!(e.exit_code(), 2);
        assert!(parse_problem("field Fp p=4\nvars x z\nz z\nfactor 1 : z\n", &Overrides::default()).is_err());
    }

    #[test]
    fn cusp_check_and_step() {
        let p = parse_problem(CUSP, &Overrides::default()).unwrap();
        assert_eq!(check_line(&p).unwrap(), "weierstrass=yes simple=yes removable=none inv=2");
        let r = resolution_step(&p).unwrap();
        assert!(!r.branches.is_empty());
        assert!(r.branches.iter().all(|b| b.inv.inv == 0));
    }

    #[test]
    fn not_simple_is_hypothesis_failure() {
        let p = parse_problem("field Q\nvars x y z\nz z\nfactor 1 : z^2+x^3+y^3\n", &Overrides::default()).unwrap();
        let e = resolution_step(&p).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert!(e.to_string().contains("compact face of dimension 2"), "{e}");
    }

    #[test]
    fn fan_text_roundtrip() {
        let p = parse_problem(CUSP, &Overrides::default()).unwrap();
        let text = run(Command::Usd, CUSP, &RunOptions::default()).unwrap().text;
        let fan = parse_fan_text(&text).unwrap();
        assert_eq!(fan, problem_usd(&p).unwrap().result);
    }
}
