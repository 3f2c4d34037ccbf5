mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use toricres::cone::Cone;
use toricres::exactmath::{int, rat, IntVec};
use toricres::fan::{real_intersection, Fan};

/// Up to `k` star subdivisions of the orthant fan at random regular cones.
fn random_star_fan(r: &mut ChaCha8Rng, d: usize, k: usize) -> (Fan, Vec<Fan>) {
    let mut fan = Fan::face_fan(&Cone::orthant(d));
    let mut history = vec![fan.clone()];
    for _ in 0..r.gen_range(0..=k) {
        let centers: Vec<Cone> = fan.cones().filter(|c| c.dim() >= 2).cloned().collect();
        let f = centers.choose(r).unwrap().clone();
        fan = fan.star_subdivision(&f).unwrap();
        history.push(fan.clone());
    }
    (fan, history)
}

/// The fan on the quadrant spanned by consecutive rays in angular order.
fn quadrant_fan(mut rays: Vec<IntVec>) -> Fan {
    rays.sort_by(|a, b| (&a[1] * &b[0]).cmp(&(&b[1] * &a[0])));
    rays.dedup();
    let cones: Vec<Cone> = rays.windows(2).map(|w| Cone::from_generators(2, w)).collect();
    Fan::from_cones(2, &cones).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn star_subdivision_preserves_structure(seed in any::<u64>(), d in 2usize..=3) {
        let (_, history) = random_star_fan(&mut common::rng(seed), d, 4);
        for w in history.windows(2) {
            prop_assert!(w[1].is_regular());
            prop_assert!(w[1].is_flat());
            prop_assert!(w[1].is_subdivision(&w[0]));
            prop_assert!(w[1].same_support(&w[0]));
        }
    }

    #[test]
    fn real_intersection_is_coarsest_common_refinement(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let (a, _) = random_star_fan(&mut r, 2, 4);
        let (b, _) = random_star_fan(&mut r, 2, 4);
        let meet = real_intersection(2, &[a.clone(), b.clone()]);
        prop_assert!(meet.is_subdivision(&a) && meet.is_subdivision(&b));
        let mut rays = a.rays();
        rays.extend(b.rays());
        let brute = quadrant_fan(rays);
        prop_assert!(brute.is_subdivision(&meet));
        prop_assert_eq!(brute, meet);
    }

    #[test]
    fn h_order_and_structure_constants(seed in any::<u64>(), d in 2usize..=3) {
        let (_, s) = common::random_z_simple(&mut common::rng(seed), d);
        let h_ray: IntVec = (0..d).map(|i| int((i == d - 1) as i64)).collect();
        let h = Cone::ray(&h_ray);
        let profile = s.normal_fan().h_simple_profile(&h).unwrap();
        prop_assume!(profile.is_some());
        let p = profile.unwrap();
        let r = p.r();
        for i in 0..r {
            for j in 0..r {
                let (ci, cj) = (p.ordered_max[i].minkowski_sum(&h), p.ordered_max[j].minkowski_sum(&h));
                prop_assert_eq!(ci.contains_cone(&cj), i <= j, "order at {} {}", i, j);
            }
        }
        let edges: Vec<IntVec> = Cone::orthant(d).rays().iter().filter(|e| **e != h_ray).cloned().collect();
        for e in &edges {
            prop_assert_eq!(p.constant(1, e).unwrap(), &rat(0, 1));
        }
        for i in 1..p.skeleton.len() {
            let mut strict = false;
            for e in &edges {
                let (a, b) = (p.constant(i, e).unwrap(), p.constant(i + 1, e).unwrap());
                prop_assert!(a <= b);
                strict |= a < b;
            }
            prop_assert!(strict, "no strict increase at {}", i);
        }
    }
}
