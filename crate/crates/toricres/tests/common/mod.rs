//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toricres::cone::Cone;
use toricres::exactmath::{ivec, rat, to_rat_vec, IntVec};
use toricres::newton::{is_z_simple, newton_polyhedron, Field, MultiPoly, Simplicity};
use toricres::polytope::PseudoPolytope;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn var_names(d: usize) -> Vec<String> {
    match d {
        2 => vec!["x".into(), "z".into()],
        3 => vec!["x".into(), "y".into(), "z".into()],
        _ => (1..=d).map(|i| format!("x{i}")).collect(),
    }
}

pub fn random_vec(r: &mut ChaCha8Rng, d: usize, lo: i64, hi: i64) -> IntVec {
    loop {
        let v: Vec<i64> = (0..d).map(|_| r.gen_range(lo..=hi)).collect();
        if v.iter().any(|c| *c != 0) {
            return ivec(&v);
        }
    }
}

/// Cone spanned by 1 to d+2 random generators with entries in [-4, 4].
pub fn random_cone(r: &mut ChaCha8Rng, d: usize) -> Cone {
    let k = r.gen_range(1..=d + 2);
    let gens: Vec<IntVec> = (0..k).map(|_| random_vec(r, d, -4, 4)).collect();
    Cone::from_generators(d, &gens)
}

/// Pointed cone inside the positive orthant.
pub fn random_positive_cone(r: &mut ChaCha8Rng, d: usize) -> Cone {
    let k = r.gen_range(1..=d + 1);
    let gens: Vec<IntVec> = (0..k).map(|_| random_vec(r, d, 0, 3)).collect();
    Cone::from_generators(d, &gens)
}

pub fn random_points(r: &mut ChaCha8Rng, d: usize, n: usize, lo: i64, hi: i64) -> Vec<IntVec> {
    (0..n).map(|_| ivec(&(0..d).map(|_| r.gen_range(lo..=hi)).collect::<Vec<_>>())).collect()
}

/// Pseudo polytope with 1 to 5 points in [-3, 3]^d and a random recession cone.
pub fn random_polytope(r: &mut ChaCha8Rng, d: usize) -> PseudoPolytope {
    let n = r.gen_range(1..=5);
    let pts: Vec<Vec<_>> = random_points(r, d, n, -3, 3)
        .iter()
        .map(|p| to_rat_vec(p))
        .collect();
    let rec = if r.gen_bool(0.5) { Cone::orthant(d) } else { random_positive_cone(r, d) };
    PseudoPolytope::new(d, &pts, &rec.generators()).expect("valid polytope")
}

/// Random polynomial with exponents up to `max_exp` and coefficients in ±{1, 2, 3}.
pub fn random_poly(r: &mut ChaCha8Rng, field: Field, d: usize, terms: usize, max_exp: u32) -> MultiPoly {
    let vars = var_names(d);
    let t = (0..terms).map(|_| {
        let e: Vec<u32> = (0..d).map(|_| r.gen_range(0..=max_exp)).collect();
        let c = *[1i64, -1, 2, -2, 3].choose(r).unwrap();
        (e, rat(c, 1))
    });
    MultiPoly::from_terms(field, &vars, t)
}

/// `z^h` plus up to three monomials of lower z-degree, with exponents ≤ 6,
/// resampled until the Newton polyhedron is z-simple with positive height.
pub fn random_z_simple(r: &mut ChaCha8Rng, d: usize) -> (MultiPoly, PseudoPolytope) {
    let vars = var_names(d);
    let z = d - 1;
    loop {
        let h = r.gen_range(2..=6u32);
        let mut terms = vec![];
        let mut top = vec![0u32; d];
        top[z] = h;
        terms.push((top, rat(1, 1)));
        for _ in 0..r.gen_range(1..=3) {
            let mut e: Vec<u32> = (0..d).map(|_| r.gen_range(0..=6)).collect();
            e[z] = r.gen_range(0..h);
            if e.iter().all(|c| *c == 0) {
                continue;
            }
            terms.push((e, rat(1, 1)));
        }
        let phi = MultiPoly::from_terms(Field::Q, &vars, terms);
        if phi.len() < 2 || (0..d).any(|i| i != z && phi.divisible_by_var(i)) {
            continue;
        }
        if !matches!(is_z_simple(&phi, z), Ok(Simplicity::Simple)) {
            continue;
        }
        let s = newton_polyhedron(&phi).unwrap();
        return (phi, s);
    }
}
