//! Sparse polynomials and truncated series over ℚ or F_p, Newton polyhedra,
//! and the singularity invariants built on them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::exactmath::{int, rat_int, Int, IntVec, RatVec, Rational};
use crate::polytope::{PolytopeError, PolytopeFace, PseudoPolytope};

pub type Exponent = Vec<u32>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NewtonError {
    #[error("column {col}: {msg}")]
    Parse { col: usize, msg: String },
    #[error("the zero polynomial has no Newton polyhedron")]
    ZeroPolynomial,
    #[error("not of Weierstrass type in {0}")]
    NotWeierstrass(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("no tilt found over {0}; a field extension is needed")]
    TiltExhausted(String),
    #[error("inv = 1 computed for {0}")]
    InvIsOne(String),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
}

type Result<T> = std::result::Result<T, NewtonError>;

/// Coefficient field, fixed per session.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Q,
    Fp(u64),
}

impl Field {
    pub fn characteristic(&self) -> u64 {
        match self {
            Field::Q => 0,
            Field::Fp(p) => *p,
        }
    }

    /// Maps a rational into the field; fails if the denominator vanishes mod p.
    pub fn reduce(&self, c: &Rational) -> Option<Rational> {
        match self {
            Field::Q => Some(c.clone()),
            Field::Fp(p) => {
                let p = int(*p as i64);
                let den = c.denom().mod_floor(&p);
                if den.is_zero() {
                    return None;
                }
                let inv = den.modpow(&(&p - int(2)), &p);
                Some(rat_int(&(c.numer() * inv).mod_floor(&p)))
            }
        }
    }

    fn norm(&self, c: Rational) -> Rational {
        match self {
            Field::Q => c,
            Field::Fp(_) => self.reduce(&c).expect("F_p element"),
        }
    }

    pub fn inv(&self, c: &Rational) -> Rational {
        assert!(!c.is_zero(), "division by zero");
        match self {
            Field::Q => c.recip(),
            Field::Fp(p) => {
                let p = int(*p as i64);
                rat_int(&c.to_integer().modpow(&(&p - int(2)), &p))
            }
        }
    }

    pub fn elem(&self, c: &Rational) -> FieldElem {
        FieldElem { field: *self, value: self.reduce(c).expect("representable") }
    }

    /// Small sample elements in a fixed order: 0, 1, −1, 2, −2, … (at most `bound` of them).
    pub fn small_elements(&self, bound: usize) -> Vec<Rational> {
        let mut out: Vec<Rational> = Vec::new();
        let mut k = 0i64;
        while out.len() < bound {
            for v in if k == 0 { vec![0] } else { vec![k, -k] } {
                let r = self.norm(rat_int(&int(v)));
                if !out.contains(&r) {
                    out.push(r);
                }
            }
            k += 1;
            if let Field::Fp(p) = self {
                if k as u64 > *p {
                    break;
                }
            }
        }
        out.truncate(bound);
        out
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Q => write!(f, "Q"),
            Field::Fp(p) => write!(f, "F_{p}"),
        }
    }
}

/// A field element tagged with its field.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FieldElem {
    pub field: Field,
    pub value: Rational,
}

impl FieldElem {
    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn add(&self, o: &FieldElem) -> FieldElem {
        FieldElem { field: self.field, value: self.field.norm(&self.value + &o.value) }
    }

    pub fn mul(&self, o: &FieldElem) -> FieldElem {
        FieldElem { field: self.field, value: self.field.norm(&self.value * &o.value) }
    }

    pub fn neg(&self) -> FieldElem {
        FieldElem { field: self.field, value: self.field.norm(-&self.value) }
    }

    pub fn inv(&self) -> FieldElem {
        FieldElem { field: self.field, value: self.field.inv(&self.value) }
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Sparse polynomial with exponent vectors over ordered variable names.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    field: Field,
    vars: Vec<String>,
    terms: BTreeMap<Exponent, Rational>,
}

impl MultiPoly {
    pub fn zero(field: Field, vars: &[String]) -> Self {
        MultiPoly { field, vars: vars.to_vec(), terms: BTreeMap::new() }
    }

    pub fn constant(field: Field, vars: &[String], c: &Rational) -> Self {
        Self::monomial(field, vars, vec![0; vars.len()], c)
    }

    pub fn one(field: Field, vars: &[String]) -> Self {
        Self::constant(field, vars, &Rational::one())
    }

    pub fn var(field: Field, vars: &[String], i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        Self::monomial(field, vars, e, &Rational::one())
    }

    pub fn monomial(field: Field, vars: &[String], exp: Exponent, c: &Rational) -> Self {
        let mut p = Self::zero(field, vars);
        p.add_term(exp, c.clone());
        p
    }

    pub fn from_terms(field: Field, vars: &[String], terms: impl IntoIterator<Item = (Exponent, Rational)>) -> Self {
        let mut p = Self::zero(field, vars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, exp: Exponent, c: Rational) {
        assert_eq!(exp.len(), self.vars.len());
        let entry = self.terms.entry(exp).or_insert_with(Rational::zero);
        *entry = self.field.norm(&*entry + c);
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: &[u32]) -> Rational {
        self.terms.get(exp).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&vec![0; self.nvars()])
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// `supp(P, φ)` as integer vectors.
    pub fn support(&self) -> Vec<IntVec> {
        self.terms.keys().map(|e| e.iter().map(|&x| int(x as i64)).collect()).collect()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Lowest total degree of a term.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).min()
    }

    pub fn homogeneous_part(&self, deg: u32) -> Self {
        self.filter(|e| e.iter().sum::<u32>() == deg)
    }

    pub fn filter(&self, keep: impl Fn(&Exponent) -> bool) -> Self {
        MultiPoly {
            field: self.field,
            vars: self.vars.clone(),
            terms: self.terms.iter().filter(|(e, _)| keep(e)).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    /// Drops terms of total degree `≥ order`.
    pub fn truncate(&self, order: u32) -> Self {
        self.filter(|e| e.iter().sum::<u32>() < order)
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.vars, o.vars, "variable mismatch");
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Rational::one())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let c = self.field.norm(c.clone());
        Self::from_terms(self.field, &self.vars, self.terms.iter().map(|(e, v)| (e.clone(), v * &c)))
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.mul_trunc(o, None)
    }

    pub fn mul_trunc(&self, o: &Self, order: Option<u32>) -> Self {
        assert_eq!(self.vars, o.vars, "variable mismatch");
        let mut acc: BTreeMap<Exponent, Rational> = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                let e: Exponent = a.iter().zip(b).map(|(x, y)| x + y).collect();
                if order.is_some_and(|o| e.iter().sum::<u32>() >= o) {
                    continue;
                }
                *acc.entry(e).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        Self::from_terms(self.field, &self.vars, acc)
    }

    pub fn pow(&self, k: u32) -> Self {
        self.pow_trunc(k, None)
    }

    pub fn pow_trunc(&self, k: u32, order: Option<u32>) -> Self {
        let mut r = Self::one(self.field, &self.vars);
        let mut b = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                r = r.mul_trunc(&b, order);
            }
            k >>= 1;
            if k > 0 {
                b = b.mul_trunc(&b, order);
            }
        }
        r
    }

    pub fn derivative(&self, i: usize) -> Self {
        Self::from_terms(
            self.field,
            &self.vars,
            self.terms.iter().filter(|(e, _)| e[i] > 0).map(|(e, c)| {
                let mut e2 = e.clone();
                e2[i] -= 1;
                (e2, c * rat_int(&int(e[i] as i64)))
            }),
        )
    }

    /// Replaces every variable `i` by `images[i]` (all over the target's variables).
    pub fn compose(&self, images: &[MultiPoly], order: Option<u32>) -> MultiPoly {
        assert_eq!(images.len(), self.nvars());
        let target = &images[0];
        let mut cache: Vec<BTreeMap<u32, MultiPoly>> = vec![BTreeMap::new(); images.len()];
        let mut out = MultiPoly::zero(self.field, target.vars());
        for (e, c) in &self.terms {
            let mut t = MultiPoly::constant(self.field, target.vars(), c);
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let p = cache[i].entry(k).or_insert_with(|| images[i].pow_trunc(k, order)).clone();
                t = t.mul_trunc(&p, order);
            }
            out = out.add(&t);
        }
        out
    }

    /// `φ` with variable `i` replaced by `p`.
    pub fn substitute(&self, i: usize, p: &MultiPoly) -> MultiPoly {
        let images: Vec<MultiPoly> = (0..self.nvars())
            .map(|j| if j == i { p.clone() } else { MultiPoly::var(self.field, &self.vars, j) })
            .collect();
        self.compose(&images, None)
    }

    /// Componentwise minimum of exponents.
    pub fn monomial_content(&self) -> Exponent {
        let mut m = vec![u32::MAX; self.nvars()];
        for e in self.terms.keys() {
            for (a, b) in m.iter_mut().zip(e) {
                *a = (*a).min(*b);
            }
        }
        if self.is_zero() {
            m.iter_mut().for_each(|a| *a = 0);
        }
        m
    }

    /// `φ / x^m`, if every term is divisible by `x^m`.
    pub fn divide_monomial(&self, m: &[u32]) -> Option<MultiPoly> {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e.iter().zip(m).any(|(a, b)| a < b) {
                return None;
            }
            terms.insert(e.iter().zip(m).map(|(a, b)| a - b).collect(), c.clone());
        }
        Some(MultiPoly { field: self.field, vars: self.vars.clone(), terms })
    }

    pub fn divisible_by_var(&self, i: usize) -> bool {
        !self.is_zero() && self.terms.keys().all(|e| e[i] > 0)
    }

    /// Coefficients in variable `i`: `φ = Σ_j c_j · x_i^j`, with `x_i` absent from `c_j`.
    pub fn coefficients_in(&self, i: usize) -> BTreeMap<u32, MultiPoly> {
        let mut out: BTreeMap<u32, MultiPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[i] = 0;
            out.entry(e[i])
                .or_insert_with(|| MultiPoly::zero(self.field, &self.vars))
                .add_term(e2, c.clone());
        }
        out
    }

    /// The same polynomial over renamed variables.
    pub fn with_vars(&self, vars: &[String]) -> MultiPoly {
        assert_eq!(vars.len(), self.nvars());
        MultiPoly { field: self.field, vars: vars.to_vec(), terms: self.terms.clone() }
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = matches!(self.field, Field::Q) && c.is_negative();
            let a = if neg { -c.clone() } else { c.clone() };
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let mono: Vec<String> = e
                .iter()
                .zip(&self.vars)
                .filter(|(x, _)| **x > 0)
                .map(|(x, v)| if *x == 1 { v.clone() } else { format!("{v}^{x}") })
                .collect();
            if mono.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{a}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    field: Field,
    vars: &'a [String],
}

impl Parser<'_> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(NewtonError::Parse { col: self.pos + 1, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<Int> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).unwrap().parse().unwrap())
    }

    fn expr(&mut self) -> Result<MultiPoly> {
        let mut acc = MultiPoly::zero(self.field, self.vars);
        let mut sign = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -1
            }
            Some(b'+') => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        loop {
            let t = self.term()?;
            acc = if sign < 0 { acc.sub(&t) } else { acc.add(&t) };
            match self.peek() {
                Some(b'+') => sign = 1,
                Some(b'-') => sign = -1,
                _ => return Ok(acc),
            }
            self.pos += 1;
        }
    }

    fn term(&mut self) -> Result<MultiPoly> {
        let mut acc = self.power()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc.mul(&self.power()?);
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<MultiPoly> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let k = self.number()?;
            let Some(k) = k.to_u32() else {
                return self.err("exponent too large");
            };
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<MultiPoly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.number()?;
                let mut d = Int::one();
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    d = self.number()?;
                    if d.is_zero() {
                        return self.err("zero denominator");
                    }
                }
                let Some(c) = self.field.reduce(&Rational::new(n, d)) else {
                    return self.err(format!("denominator vanishes in {}", self.field));
                };
                Ok(MultiPoly::constant(self.field, self.vars, &c))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match self.vars.iter().position(|v| v == name) {
                    Some(i) => Ok(MultiPoly::var(self.field, self.vars, i)),
                    None => {
                        self.pos = start;
                        self.err(format!("undeclared variable '{name}'"))
                    }
                }
            }
            Some(_) => self.err("unexpected character"),
            None => self.err("unexpected end of input"),
        }
    }
}

/// Parses `±term ± term …` with terms `c*x^a*…`, parenthesized groups and powers allowed.
pub fn parse_poly(text: &str, field: Field, vars: &[String]) -> Result<MultiPoly> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, field, vars };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// Polynomial modulo terms of total degree `≥ order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    pub poly: MultiPoly,
    pub order: u32,
}

impl TruncatedSeries {
    pub fn new(poly: &MultiPoly, order: u32) -> Self {
        TruncatedSeries { poly: poly.truncate(order), order }
    }

    pub fn mul(&self, o: &TruncatedSeries) -> TruncatedSeries {
        let order = self.order.min(o.order);
        TruncatedSeries { poly: self.poly.mul_trunc(&o.poly, Some(order)), order }
    }

    pub fn is_unit(&self) -> bool {
        !self.poly.constant_term().is_zero()
    }

    /// Inverse of a unit via the geometric series.
    pub fn inverse(&self) -> Option<TruncatedSeries> {
        let c0 = self.poly.constant_term();
        if c0.is_zero() {
            return None;
        }
        let f = self.poly.field();
        let vars = self.poly.vars();
        let c0inv = f.inv(&c0);
        let one = MultiPoly::one(f, vars);
        let t = one.sub(&self.poly.scale(&c0inv));
        let mut acc = one.clone();
        let mut pw = one;
        for _ in 1..self.order.max(1) {
            pw = pw.mul_trunc(&t, Some(self.order));
            if pw.is_zero() {
                break;
            }
            acc = acc.add(&pw);
        }
        Some(TruncatedSeries { poly: acc.scale(&c0inv).truncate(self.order), order: self.order })
    }
}

/// `u · ∏ ω^{a(ω)}` with trusted irreducible factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoredPoly {
    pub unit: MultiPoly,
    pub factors: Vec<(MultiPoly, u32)>,
}

impl FactoredPoly {
    pub fn from_poly(p: &MultiPoly) -> Self {
        FactoredPoly { unit: MultiPoly::one(p.field(), p.vars()), factors: vec![(p.clone(), 1)] }
    }

    pub fn vars(&self) -> &[String] {
        self.unit.vars()
    }

    pub fn field(&self) -> Field {
        self.unit.field()
    }

    pub fn expand(&self) -> MultiPoly {
        self.factors.iter().fold(self.unit.clone(), |acc, (f, a)| acc.mul(&f.pow(*a)))
    }

    pub fn map(&self, f: impl Fn(&MultiPoly) -> MultiPoly) -> FactoredPoly {
        FactoredPoly {
            unit: f(&self.unit),
            factors: self.factors.iter().map(|(w, a)| (f(w), *a)).collect(),
        }
    }
}

impl fmt::Display for FactoredPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.unit)?;
        for (w, a) in &self.factors {
            if *a == 1 {
                write!(f, "·({w})")?;
            } else {
                write!(f, "·({w})^{a}")?;
            }
        }
        Ok(())
    }
}

pub fn newton_polyhedron(phi: &MultiPoly) -> Result<PseudoPolytope> {
    if phi.is_zero() {
        return Err(NewtonError::ZeroPolynomial);
    }
    Ok(PseudoPolytope::newton(phi.nvars(), &phi.support())?)
}

/// `(ord(P, ω, φ), in(P, ω, φ))`; the order is `None` (∞) for `φ = 0`.
pub fn ord_in(phi: &MultiPoly, omega: &[Rational]) -> (Option<Rational>, MultiPoly) {
    let pair = |e: &Exponent| -> Rational {
        e.iter().zip(omega).map(|(a, w)| w * rat_int(&int(*a as i64))).sum()
    };
    let Some(ord) = phi.terms().map(|(e, _)| pair(e)).min() else {
        return (None, phi.clone());
    };
    let init = phi.filter(|e| pair(e) == ord);
    (Some(ord), init)
}

/// `ps(P, F, φ)`: the terms whose exponents lie on the face `F` of `Γ₊(P, φ)`.
pub fn partial_sum(phi: &MultiPoly, face: &PolytopeFace) -> MultiPoly {
    let w: RatVec = face.witness.iter().map(rat_int).collect();
    ord_in(phi, &w).1
}

/// Weierstrass-type data of `Γ₊(P, φ)` with respect to `z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeierstrassData {
    pub is_type: bool,
    pub top_vertex: Option<Exponent>,
    pub z_height: Option<u32>,
}

pub fn weierstrass_data(phi: &MultiPoly, z: usize) -> Result<WeierstrassData> {
    if phi.is_zero() {
        return Err(NewtonError::ZeroPolynomial);
    }
    let mut m = phi.monomial_content();
    let best = phi
        .terms()
        .map(|(e, _)| e)
        .filter(|e| (0..e.len()).all(|i| i == z || e[i] == m[i]))
        .map(|e| e[z])
        .min();
    Ok(match best {
        Some(h) => {
            m[z] = h;
            WeierstrassData { is_type: true, top_vertex: Some(m), z_height: Some(h) }
        }
        None => WeierstrassData { is_type: false, top_vertex: None, z_height: None },
    })
}

/// `φ ≡ unit · x^monomial · poly` modulo total degree `order`, with `poly` a
/// Weierstrass polynomial in `z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalized {
    pub unit: TruncatedSeries,
    pub monomial: Exponent,
    pub poly: MultiPoly,
    pub order: u32,
}

pub fn weierstrass_normalize(phi: &MultiPoly, z: usize, order: u32) -> Result<Normalized> {
    let wd = weierstrass_data(phi, z)?;
    let Some(top) = wd.top_vertex else {
        return Err(NewtonError::NotWeierstrass(phi.to_string()));
    };
    let h = top[z];
    let mut mono = top.clone();
    mono[z] = 0;
    let f = phi.divide_monomial(&mono).expect("content divides").truncate(order);
    let fld = phi.field();
    let vars = phi.vars();
    let mut hi = MultiPoly::zero(fld, vars);
    let mut lo = MultiPoly::zero(fld, vars);
    for (e, c) in f.terms() {
        let mut e2 = e.clone();
        if e[z] >= h {
            e2[z] -= h;
            hi = hi.add(&MultiPoly::monomial(fld, vars, e2, c));
        } else {
            lo = lo.add(&MultiPoly::monomial(fld, vars, e2, c));
        }
    }
    let e_inv = TruncatedSeries::new(&hi, order).inverse().expect("z-regular");
    let mut zh = vec![0; phi.nvars()];
    zh[z] = h;
    let mut g = MultiPoly::monomial(fld, vars, zh.clone(), &Rational::one()).truncate(order);
    let mut q = MultiPoly::zero(fld, vars);
    let mut r = MultiPoly::zero(fld, vars);
    for _ in 0..=order + 1 {
        if g.is_zero() {
            break;
        }
        let mut quo = MultiPoly::zero(fld, vars);
        for (e, c) in g.terms() {
            if e[z] >= h {
                let mut e2 = e.clone();
                e2[z] -= h;
                quo = quo.add(&MultiPoly::monomial(fld, vars, e2, c));
            } else {
                r = r.add(&MultiPoly::monomial(fld, vars, e.clone(), c));
            }
        }
        let step = quo.mul_trunc(&e_inv.poly, Some(order));
        q = q.add(&step);
        g = step.mul_trunc(&lo, Some(order)).neg();
    }
    let w = MultiPoly::monomial(fld, vars, zh, &Rational::one()).sub(&r).truncate(order);
    let unit = TruncatedSeries::new(&q, order).inverse().expect("quotient is a unit");
    debug_assert_eq!(unit.poly.mul_trunc(&w, Some(order)), f);
    Ok(Normalized { unit, monomial: mono, poly: w, order })
}

/// Outcome of the z-simplicity test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Simplicity {
    Simple,
    NotWeierstrass,
    /// A compact face of dimension ≥ 2, by its vertices.
    HighFace(Vec<RatVec>),
}

pub fn is_z_simple(phi: &MultiPoly, z: usize) -> Result<Simplicity> {
    if !weierstrass_data(phi, z)?.is_type {
        return Ok(Simplicity::NotWeierstrass);
    }
    if phi.nvars() <= 2 {
        return Ok(Simplicity::Simple);
    }
    let poly = newton_polyhedron(phi)?;
    let mut bad: Vec<PolytopeFace> = poly
        .faces()
        .into_iter()
        .filter(|f| f.recession.dim() == 0 && f.dim >= 2)
        .collect();
    bad.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    Ok(match bad.into_iter().next() {
        Some(f) => Simplicity::HighFace(f.vertices),
        None => Simplicity::Simple,
    })
}

pub fn format_point(v: &[Rational]) -> String {
    let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", s.join(","))
}

/// A z-removable compact face with its `χ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RemovableFace {
    pub vertices: Vec<RatVec>,
    pub dim: usize,
    pub chi: MultiPoly,
    /// `ρ` of the far vertex, for edges.
    pub c: Option<RatVec>,
    /// `⟨δ̄₀, c(F)⟩`, for edges.
    pub weight: Option<Rational>,
}

fn check_no_coordinate_divides(phi: &MultiPoly, z: usize) -> Result<()> {
    if let Some(i) = (0..phi.nvars()).find(|&i| i != z && phi.divisible_by_var(i)) {
        return Err(NewtonError::Precondition(format!("{} divides {phi}", phi.vars()[i])));
    }
    Ok(())
}

/// Candidate `χ` with `ps = (z + χ)^h`, including the char-p root extraction.
fn chi_candidate(ps: &MultiPoly, z: usize, h: u32) -> Option<MultiPoly> {
    let fld = ps.field();
    let p = fld.characteristic() as u32;
    let (q, hhat) = if p > 0 && h.is_multiple_of(p) {
        let mut q = 1;
        while h.is_multiple_of(q * p) {
            q *= p;
        }
        (q, h / q)
    } else {
        (1, h)
    };
    let coeffs = ps.coefficients_in(z);
    let c = coeffs.get(&(h - q)).cloned().unwrap_or_else(|| MultiPoly::zero(fld, ps.vars()));
    let c = c.scale(&fld.inv(&rat_int(&int(hhat as i64))));
    if q == 1 {
        return Some(c);
    }
    let mut terms = Vec::new();
    for (e, v) in c.terms() {
        if e.iter().any(|a| a % q != 0) {
            return None;
        }
        terms.push((e.iter().map(|a| a / q).collect(), v.clone()));
    }
    Some(MultiPoly::from_terms(fld, ps.vars(), terms))
}

pub fn removable_faces(phi: &MultiPoly, z: usize) -> Result<Vec<RemovableFace>> {
    let wd = weierstrass_data(phi, z)?;
    if !wd.is_type {
        return Err(NewtonError::NotWeierstrass(phi.to_string()));
    }
    check_no_coordinate_divides(phi, z)?;
    if phi.nvars() <= 1 || !phi.constant_term().is_zero() {
        return Ok(Vec::new());
    }
    let h = wd.z_height.unwrap();
    let fld = phi.field();
    let vars = phi.vars();
    let top: RatVec = wd.top_vertex.unwrap().iter().map(|&a| rat_int(&int(a as i64))).collect();
    let zvar = MultiPoly::var(fld, vars, z);
    let mut out = Vec::new();
    for face in newton_polyhedron(phi)?.faces() {
        if face.recession.dim() != 0 || face.dim == 0 || !face.vertices.contains(&top) {
            continue;
        }
        let ps = partial_sum(phi, &face);
        let mut zh = vec![0; phi.nvars()];
        zh[z] = h;
        let u0 = ps.coeff(&zh);
        let ps = ps.scale(&fld.inv(&u0));
        let Some(chi) = chi_candidate(&ps, z, h) else { continue };
        if zvar.add(&chi).pow(h) != ps {
            continue;
        }
        let (c, weight) = if face.dim == 1 {
            let far = face.vertices.iter().find(|v| **v != top).unwrap();
            let den = rat_int(&int(h as i64)) - &far[z];
            let c: RatVec = (0..far.len()).filter(|&i| i != z).map(|i| &far[i] / &den).collect();
            let w = c.iter().sum();
            (Some(c), Some(w))
        } else {
            (None, None)
        };
        let mut vertices = face.vertices.clone();
        vertices.sort();
        out.push(RemovableFace { vertices, dim: face.dim, chi, c, weight });
    }
    out.sort_by(|a, b| a.vertices.cmp(&b.vertices));
    Ok(out)
}

/// One greedy elimination step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElimStep {
    pub chi: MultiPoly,
    pub c: RatVec,
    pub weight: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Elimination {
    pub chi0: MultiPoly,
    pub steps: Vec<ElimStep>,
    /// `ψ` written in `z + χ₀`.
    pub result: MultiPoly,
    pub order: u32,
}

/// Greedy removal of z-removable edges of weight `< order`, smallest weight
/// first, ties broken by lexicographically smallest `c(F)`.
pub fn eliminate_removable(psi: &MultiPoly, z: usize, order: u32) -> Result<Elimination> {
    let fld = psi.field();
    let vars = psi.vars();
    let zvar = MultiPoly::var(fld, vars, z);
    let mut cur = psi.clone();
    let mut chi0 = MultiPoly::zero(fld, vars);
    let mut steps = Vec::new();
    let limit = Rational::from_integer(int(order as i64));
    for _ in 0..=4 * order {
        let mut cands: Vec<RemovableFace> = removable_faces(&cur, z)?
            .into_iter()
            .filter(|f| f.weight.as_ref().is_some_and(|w| *w < limit))
            .collect();
        cands.sort_by(|a, b| a.weight.cmp(&b.weight).then_with(|| a.c.cmp(&b.c)));
        let Some(best) = cands.into_iter().next() else {
            return Ok(Elimination { chi0, steps, result: cur, order });
        };
        cur = cur.substitute(z, &zvar.sub(&best.chi));
        chi0 = chi0.add(&best.chi);
        steps.push(ElimStep { chi: best.chi, c: best.c.unwrap(), weight: best.weight.unwrap() });
    }
    Err(NewtonError::Precondition(format!("elimination did not settle below order {order}")))
}

/// `∂ω/∂z` is a unit: the coefficient of the bare `z` is nonzero.
pub fn dz_is_unit(w: &MultiPoly, z: usize) -> bool {
    let mut e = vec![0; w.nvars()];
    e[z] = 1;
    !w.coeff(&e).is_zero()
}

pub fn main_factor(phi: &FactoredPoly, z: usize) -> Result<FactoredPoly> {
    let mut factors = Vec::new();
    for (w, a) in &phi.factors {
        if !w.constant_term().is_zero() {
            return Err(NewtonError::Precondition(format!("factor {w} is a unit")));
        }
        if (0..w.nvars()).any(|i| i != z && w.divisible_by_var(i)) || dz_is_unit(w, z) {
            continue;
        }
        factors.push((w.clone(), *a));
    }
    Ok(FactoredPoly { unit: MultiPoly::one(phi.field(), phi.vars()), factors })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invariants {
    pub inv: u32,
    pub inv2: Option<usize>,
    pub order: u32,
}

/// Root `g` of a smooth factor, `ω = unit · (z − g)` modulo `order`.
pub fn smooth_root(w: &MultiPoly, z: usize, order: u32) -> Result<MultiPoly> {
    let n = weierstrass_normalize(w, z, order)?;
    let zvar = MultiPoly::var(w.field(), w.vars(), z);
    Ok(zvar.sub(&n.poly))
}

/// Weierstrass type of the product, decided factor by factor.
pub fn factored_is_weierstrass(phi: &FactoredPoly, z: usize) -> Result<bool> {
    for (w, _) in &phi.factors {
        if !weierstrass_data(w, z)?.is_type {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn inv_inv2(phi: &FactoredPoly, z: usize, order: u32) -> Result<Invariants> {
    if !factored_is_weierstrass(phi, z)? {
        return Err(NewtonError::NotWeierstrass(phi.to_string()));
    }
    let main = main_factor(phi, z)?;
    let mut inv = 0;
    for (w, a) in &main.factors {
        let h = weierstrass_data(w, z)?
            .z_height
            .ok_or_else(|| NewtonError::NotWeierstrass(w.to_string()))?;
        inv += h * a;
    }
    if inv == 1 {
        return Err(NewtonError::InvIsOne(phi.to_string()));
    }
    if inv > 0 {
        return Ok(Invariants { inv, inv2: None, order });
    }
    let mut roots = BTreeSet::new();
    for (w, _) in &phi.factors {
        if dz_is_unit(w, z) {
            roots.insert(smooth_root(w, z, order)?.to_string());
        }
    }
    Ok(Invariants { inv, inv2: Some(roots.len()), order })
}

/// Coordinate change `x ↦ x + α(x)·z` making `Γ₊` Weierstrass with top vertex `h·f_z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tilt {
    /// `α(x)` per variable, `0` at `z`.
    pub alpha: Vec<Rational>,
    pub h: u32,
}

impl Tilt {
    pub fn apply(&self, phi: &MultiPoly, z: usize) -> MultiPoly {
        let fld = phi.field();
        let vars = phi.vars();
        let zvar = MultiPoly::var(fld, vars, z);
        let images: Vec<MultiPoly> = (0..phi.nvars())
            .map(|i| MultiPoly::var(fld, vars, i).add(&zvar.scale(&self.alpha[i])))
            .collect();
        phi.compose(&images, None)
    }

    pub fn is_identity(&self) -> bool {
        self.alpha.iter().all(|a| a.is_zero())
    }
}

pub fn generic_tilt(phi: &MultiPoly, z: usize) -> Result<Tilt> {
    let h = phi.order().ok_or(NewtonError::ZeroPolynomial)?;
    let init = phi.homogeneous_part(h);
    let fld = phi.field();
    let others: Vec<usize> = (0..phi.nvars()).filter(|&i| i != z).collect();
    let sample = fld.small_elements(7);
    let total = sample.len().pow(others.len() as u32);
    let mut tuples: Vec<Vec<usize>> = (0..total)
        .map(|mut k| {
            others
                .iter()
                .map(|_| {
                    let d = k % sample.len();
                    k /= sample.len();
                    d
                })
                .collect()
        })
        .collect();
    tuples.sort_by_key(|t| (t.iter().copied().max().unwrap_or(0), t.clone()));
    for t in tuples {
        let mut alpha = vec![Rational::zero(); phi.nvars()];
        for (k, &i) in others.iter().enumerate() {
            alpha[i] = sample[t[k]].clone();
        }
        let val: Rational = init
            .terms()
            .map(|(e, c)| {
                others.iter().fold(c.clone(), |acc, &i| {
                    acc * num_traits::pow(alpha[i].clone(), e[i] as usize)
                })
            })
            .sum();
        if !fld.norm(val).is_zero() {
            return Ok(Tilt { alpha, h });
        }
    }
    Err(NewtonError::TiltExhausted(fld.to_string()))
}

/// `ρ(Γ₊ ∩ U)` in the hyperplane `⟨f_z∨, ·⟩ = 0`, or `None` when empty.
pub fn rho_projection(phi: &MultiPoly, z: usize, h: u32) -> Result<Option<PseudoPolytope>> {
    let n = phi.nvars();
    let hh = rat_int(&int(h as i64));
    let pts: Vec<RatVec> = phi
        .terms()
        .filter(|(e, _)| e[z] < h)
        .map(|(e, _)| {
            let den = &hh - rat_int(&int(e[z] as i64));
            (0..n).filter(|&i| i != z).map(|i| rat_int(&int(e[i] as i64)) / &den).collect()
        })
        .collect();
    if pts.is_empty() {
        return Ok(None);
    }
    let rec: Vec<IntVec> = (0..n - 1)
        .map(|i| (0..n - 1).map(|j| int((i == j) as i64)).collect())
        .collect();
    Ok(Some(PseudoPolytope::new(n - 1, &pts, &rec)?))
}

/// `α` and `β` are comparable in the product order.
pub fn monotonicity_check(alpha: &[u32], beta: &[u32]) -> bool {
    alpha.iter().zip(beta).all(|(a, b)| a <= b) || alpha.iter().zip(beta).all(|(a, b)| a >= b)
}

/// `φ` is a monomial times a unit: `Γ₊` has a single vertex carrying a nonzero coefficient.
pub fn is_monomial_times_unit(phi: &MultiPoly) -> bool {
    if phi.is_zero() {
        return false;
    }
    let m = phi.monomial_content();
    !phi.coeff(&m).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rat;

    fn vars(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    fn p(s: &str, v: &[&str]) -> MultiPoly {
        parse_poly(s, Field::Q, &vars(v)).unwrap()
    }

    #[test]
    fn parse_and_print() {
        let f = p("z^2 + x^3 - 1/2*x*z", &["x", "z"]);
        assert_eq!(f.to_string(), "x^3 - 1/2*x*z + z^2");
        assert_eq!(p("(z+x)^2", &["x", "z"]), p("z^2+2*x*z+x^2", &["x", "z"]));
        let e = parse_poly("z^2 + w", Field::Q, &vars(&["x", "z"])).unwrap_err();
        assert_eq!(e, NewtonError::Parse { col: 7, msg: "undeclared variable 'w'".into() });
        assert!(parse_poly("1/2*x", Field::Fp(2), &vars(&["x"])).is_err());
        let f2 = parse_poly("3*x - 1", Field::Fp(2), &vars(&["x"])).unwrap();
        assert_eq!(f2.to_string(), "x + 1");
    }

    #[test]
    fn ord_and_initial() {
        let f = p("z^2 + x^3", &["x", "z"]);
        assert_eq!(ord_in(&f, &[rat(2, 1), rat(3, 1)]), (Some(rat(6, 1)), f.clone()));
        assert_eq!(ord_in(&f, &[rat(1, 1), rat(1, 1)]), (Some(rat(2, 1)), p("z^2", &["x", "z"])));
        let zero = MultiPoly::zero(Field::Q, &vars(&["x", "z"]));
        assert_eq!(ord_in(&zero, &[rat(1, 1), rat(1, 1)]).0, None);
    }

    #[test]
    fn weierstrass() {
        let wd = weierstrass_data(&p("z^2+x^3", &["x", "z"]), 1).unwrap();
        assert_eq!((wd.top_vertex, wd.z_height), (Some(vec![0, 2]), Some(2)));
        let wd = weierstrass_data(&p("x*z+x^2", &["x", "z"]), 1).unwrap();
        assert_eq!(wd.top_vertex, Some(vec![1, 1]));
        assert!(!weierstrass_data(&p("z*y+x^2", &["x", "y", "z"]), 2).unwrap().is_type);
        let f = p("z^2 + x*z + x^3 + z^3*x + 2*z^2*x", &["x", "z"]);
        let n = weierstrass_normalize(&f, 1, 10).unwrap();
        assert_eq!(n.unit.poly.mul_trunc(&n.poly, Some(10)), f.truncate(10));
        let coeffs = n.poly.coefficients_in(1);
        assert_eq!(coeffs.keys().copied().max(), Some(2));
        assert!(coeffs.values().all(|c| c.constant_term().is_zero() || c.is_one_const()));
    }

    impl MultiPoly {
        fn is_one_const(&self) -> bool {
            self.len() == 1 && self.constant_term().is_one()
        }
    }

    #[test]
    fn simplicity() {
        assert_eq!(is_z_simple(&p("z^2+x^3", &["x", "z"]), 1).unwrap(), Simplicity::Simple);
        assert!(matches!(
            is_z_simple(&p("z^2+x^3+y^3", &["x", "y", "z"]), 2).unwrap(),
            Simplicity::HighFace(_)
        ));
    }

    #[test]
    fn removable() {
        let v = ["x", "z"];
        let r = removable_faces(&p("(z+x)^2", &v), 1).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].chi, p("x", &v));
        assert!(removable_faces(&p("z^2+x^3", &v), 1).unwrap().is_empty());
        let f2 = parse_poly("z^2+x^2", Field::Fp(2), &vars(&v)).unwrap();
        let r = removable_faces(&f2, 1).unwrap();
        assert_eq!(r[0].chi.to_string(), "x");
    }

    #[test]
    fn elimination() {
        let v = ["x", "z"];
        let e = eliminate_removable(&p("(z+x)^2+x^5", &v), 1, 8).unwrap();
        assert_eq!(e.chi0, p("x", &v));
        assert_eq!(e.result, p("z^2+x^5", &v));
        let e = eliminate_removable(&p("(z+x+x^2)^3", &v), 1, 8).unwrap();
        assert_eq!(e.chi0, p("x+x^2", &v));
        assert_eq!(e.steps.len(), 2);
        assert_eq!(e.steps[0].chi, p("x", &v));
        assert_eq!(eliminate_removable(&p("z^2+x^3", &v), 1, 8).unwrap().chi0, p("0", &v));
    }

    #[test]
    fn invariants() {
        let v = ["x", "z"];
        let fp = |fs: &[&str]| FactoredPoly {
            unit: p("1", &v),
            factors: fs.iter().map(|s| (p(s, &v), 1)).collect(),
        };
        assert_eq!(inv_inv2(&fp(&["z^2+x^3"]), 1, 16).unwrap().inv, 2);
        let i = inv_inv2(&fp(&["x", "x", "z"]), 1, 16).unwrap();
        assert_eq!((i.inv, i.inv2), (0, Some(1)));
        let i = inv_inv2(&fp(&["z", "z+x", "z+2*x"]), 1, 16).unwrap();
        assert_eq!((i.inv, i.inv2), (0, Some(3)));
        let m = main_factor(&fp(&["z+x", "z^2+x^3"]), 1).unwrap();
        assert_eq!(m.factors, vec![(p("z^2+x^3", &v), 1)]);
        let i = inv_inv2(&fp(&["z", "z*(1+x)"]), 1, 16).unwrap();
        assert_eq!(i.inv2, Some(1));
    }

    #[test]
    fn tilt() {
        let v = ["x", "z"];
        let t = generic_tilt(&p("x*z", &v), 1).unwrap();
        assert_eq!(t.alpha, vec![rat(1, 1), rat(0, 1)]);
        let g = t.apply(&p("x*z", &v), 1);
        assert_eq!(weierstrass_data(&g, 1).unwrap().top_vertex, Some(vec![0, 2]));
        assert!(generic_tilt(&p("z^2", &v), 1).unwrap().is_identity());
        assert!(generic_tilt(&p("x^2+y^2", &["x", "y", "z"]), 2).is_ok());
    }

    #[test]
    fn rho() {
        let v = ["x", "z"];
        assert!(rho_projection(&p("z^2", &v), 1, 2).unwrap().is_none());
        let r = rho_projection(&p("z^2+x^3", &v), 1, 2).unwrap().unwrap();
        assert_eq!(r.vertices(), &[vec![rat(3, 2)]]);
    }
}
