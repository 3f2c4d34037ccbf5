mod common;

use num_traits::Signed;
use proptest::prelude::*;
use rand::Rng;
use toricres::exactmath::{dot_iq, ivec, rat, IntVec, RatVec, Rational};
use toricres::polytope::{PolytopeFace, PseudoPolytope};

/// Newton polyhedron of 1 to 5 random points in [0, 4]^d.
fn random_newton(seed: u64, d: usize) -> PseudoPolytope {
    let mut r = common::rng(seed);
    let n = r.gen_range(1..=5);
    PseudoPolytope::newton(d, &common::random_points(&mut r, d, n, 0, 4)).unwrap()
}

fn in_face(s: &PseudoPolytope, f: &PolytopeFace, x: &RatVec) -> bool {
    in_polytope(s, x) && dot_iq(&f.witness, x) == s.ord_at(&f.witness).unwrap()
}

fn in_polytope(s: &PseudoPolytope, x: &RatVec) -> bool {
    s.normal_fan().rays().iter().all(|w| dot_iq(w, x) >= s.ord_at(w).unwrap())
}

/// `G ⊆ F` for faces, by vertices and recession.
fn face_le(g: &PolytopeFace, f: &PolytopeFace) -> bool {
    g.vertices.iter().all(|v| f.vertices.contains(v)) && f.recession.contains_cone(&g.recession)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn relative_interiors_partition(seed in any::<u64>(), d in 2usize..=3) {
        let s = random_newton(seed, d);
        let faces = s.faces();
        let grid: Vec<i64> = (0..=10).collect();
        let mut pts: Vec<RatVec> = Vec::new();
        for a in &grid {
            for b in &grid {
                let mut p = vec![rat(*a, 2), rat(*b, 2)];
                if d == 3 {
                    p.push(rat((a + b) % 5, 1));
                }
                pts.push(p);
            }
        }
        for x in pts.iter().filter(|x| in_polytope(&s, x)) {
            let owners = faces
                .iter()
                .filter(|f| in_face(&s, f, x))
                .filter(|f| !faces.iter().any(|g| face_le(g, f) && g.dim < f.dim && in_face(&s, g, x)))
                .count();
            prop_assert_eq!(owners, 1);
        }
        for a in 0..=4i64 {
            for b in 0..=4i64 {
                let w = if d == 2 { ivec(&[a, b]) } else { ivec(&[a, b, (a * b) % 3]) };
                let owners = faces.iter().filter(|f| f.normal_cone.relint_contains(&w)).count();
                prop_assert_eq!(owners, 1);
            }
        }
    }

    #[test]
    fn homogenization_round_trip(seed in any::<u64>(), d in 2usize..=3) {
        let s = common::random_polytope(&mut common::rng(seed), d);
        let hom = s.homogenization();
        let mut pts: Vec<RatVec> = Vec::new();
        let mut rec: Vec<IntVec> = hom.lineality_basis().iter().flat_map(|l| {
            let neg: IntVec = l.iter().map(|c| -c).collect();
            [l[..d].to_vec(), neg[..d].to_vec()]
        }).collect();
        for r in hom.rays() {
            if r[d].is_positive() {
                pts.push(r[..d].iter().map(|c| Rational::new(c.clone(), r[d].clone())).collect());
            } else {
                rec.push(r[..d].to_vec());
            }
        }
        let back = PseudoPolytope::new(d, &pts, &rec).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn normal_cones_reverse_inclusion(seed in any::<u64>(), d in 2usize..=3) {
        let s = common::random_polytope(&mut common::rng(seed), d);
        let faces = s.faces();
        for f in &faces {
            for g in &faces {
                prop_assert_eq!(face_le(f, g), f.normal_cone.contains_cone(&g.normal_cone));
            }
        }
        prop_assert_eq!(s.c(), s.normal_fan().maximal().len());
    }
}
