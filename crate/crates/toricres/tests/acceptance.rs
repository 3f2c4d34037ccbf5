//! Acceptance suite: one PASS/FAIL line per criterion, each with its runtime limit.
//! Runs without the libtest harness so the lines always reach stdout.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use num_traits::Zero;
use rand::Rng;
use toricres::cone::Cone;
use toricres::driver::{
    parse_problem, play_game, problem_usd, run, resolution_step, Adversary, Command, Overrides, RunOptions,
};
use toricres::exactmath::{int, ivec, IntVec};
use toricres::fan::{real_intersection, Fan};
use toricres::newton::{
    eliminate_removable, generic_tilt, inv_inv2, newton_polyhedron, parse_poly, removable_faces,
    weierstrass_data, FactoredPoly, Field, MultiPoly,
};
use toricres::upward::{hard_height_check, subdivides_normal_fan, upward_subdivision, UsdNode};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion(n: usize, name: &str, limit_secs: f64, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
    let secs = start.elapsed().as_secs_f64();
    let (ok, detail) = match outcome {
        Ok(d) if secs < limit_secs => (true, d),
        Ok(d) => (false, format!("{d}; runtime exceeds limit")),
        Err(e) => (false, e),
    };
    println!(
        "criterion {n} {}: {name}: {detail} [{secs:.3}s, limit {limit_secs}s]",
        if ok { "PASS" } else { "FAIL" }
    );
    ok
}

const CUSP: &str = "field Q\nvars x z\nz z\nfactor 1 : z^2 + x^3\n";

fn cusp_end_to_end() -> Check {
    let opts = RunOptions::default();
    let check = run(Command::Check, CUSP, &opts).map_err(|e| e.to_string())?.text;
    ensure(check == "weierstrass=yes simple=yes removable=none inv=2\n", || format!("check printed {check:?}"))?;
    let p = parse_problem(CUSP, &Overrides::default()).map_err(|e| e.to_string())?;
    let node = problem_usd(&p).map_err(|e| e.to_string())?;
    let rays: BTreeSet<IntVec> = node.result.rays().into_iter().collect();
    let want: BTreeSet<IntVec> =
        [[1, 0], [1, 1], [2, 3], [1, 2], [0, 1]].iter().map(|r| ivec(r)).collect();
    ensure(rays == want, || format!("usd rays {rays:?}"))?;
    ensure(node.result.maximal().len() == 4, || format!("{} maximal cones", node.result.maximal().len()))?;
    let usd = run(Command::Usd, CUSP, &opts).map_err(|e| e.to_string())?.text;
    ensure(usd.contains("FAN dim=2 rays=5 cones=4\n"), || "usd fan header".into())?;
    let report = resolution_step(&p).map_err(|e| e.to_string())?;
    // every interior Θ with 3 sampled values on each edge off Θ
    let expected: usize = node
        .result
        .cones()
        .filter(|t| t.dim() > 0 && t.relint_point().iter().all(|c| *c > int(0)))
        .map(|t| 3usize.pow((2 - t.dim()) as u32))
        .sum();
    ensure(report.branches.len() == expected, || {
        format!("{} branches, expected {expected}", report.branches.len())
    })?;
    ensure(report.branches.iter().all(|b| b.inv.inv == 0), || "a branch has inv > 0".into())?;
    Ok(format!("inv=2, 5 rays, 4 cones, {} branches all inv=0", report.branches.len()))
}

fn example_commuting_stars() -> Check {
    let (mut checked, mut maximal) = (0, 0);
    for basis in [[[1, 0, 0], [0, 1, 0], [0, 0, 1]], [[1, 0, 0], [1, 1, 0], [1, 1, 1]], [[2, 1, 0], [1, 1, 0], [0, 3, 1]]] {
        let b: Vec<IntVec> = basis.iter().map(|v| ivec(v)).collect();
        let s = Cone::from_generators(3, &b);
        ensure(s.is_regular(), || format!("{s} not regular"))?;
        let cone2 = |u: &IntVec, v: &IntVec| Cone::from_generators(3, &[u.clone(), v.clone()]);
        let sum = |u: &IntVec, v: &IntVec| u.iter().zip(v).map(|(a, c)| a + c).collect::<IntVec>();
        let f1 = cone2(&b[0], &b[2]);
        let f2 = cone2(&b[1], &b[2]);
        let g1 = cone2(&sum(&b[0], &b[2]), &b[1]);
        let g2 = cone2(&sum(&b[1], &b[2]), &b[0]);
        let fan = Fan::face_fan(&s);
        let left = fan.iterated_star(&[f1.clone(), f2.clone(), g1]).map_err(|e| e.to_string())?;
        let right = fan.iterated_star(&[f2, f1, g2]).map_err(|e| e.to_string())?;
        ensure(left == right, || format!("fans differ for basis {basis:?}"))?;
        ensure(left.is_regular() && left.same_support(&fan), || "result not a regular subdivision of F(S)".into())?;
        maximal = left.maximal().len();
        checked += 1;
    }
    Ok(format!("F(S)*F(1)*F(2)*G(1) = F(S)*F(2)*F(1)*G(2) on {checked} regular cones, {maximal} maximal cones"))
}

/// Strict descent and zero low levels at every node, checked independently of
/// the runtime assertions inside the recursion.
fn check_heights(node: &UsdNode, s: &toricres::polytope::PseudoPolytope) -> Result<usize, String> {
    let den = s.den();
    let mut nodes = 0;
    for n in node.nodes() {
        nodes += 1;
        ensure((&n.height * toricres::exactmath::rat_int(&den)).is_integer(), || {
            format!("height {} not in (1/{den})Z", n.height)
        })?;
        for (i, h) in n.level_heights.iter().enumerate() {
            ensure(*h < n.height, || format!("level {} height {h} ≥ {}", i + 1, n.height))?;
            ensure(i >= n.m_bar() || h.is_zero(), || format!("level {} ≤ m̄ has height {h}", i + 1))?;
        }
        for c in &n.children {
            ensure(c.height < n.height, || format!("child height {} ≥ {}", c.height, n.height))?;
        }
    }
    Ok(nodes)
}

fn height_suite() -> Check {
    let mut r = common::rng(3);
    let mut nodes = 0;
    let mut instances = 0;
    for k in 0..60 {
        let d = 2 + k % 2;
        let (phi, s) = common::random_z_simple(&mut r, d);
        let h: IntVec = (0..d).map(|i| int((i == d - 1) as i64)).collect();
        let orth = Fan::face_fan(&Cone::orthant(d));
        let node = upward_subdivision(&h, &orth, &s).map_err(|e| format!("{phi}: {e}"))?;
        nodes += check_heights(&node, &s).map_err(|e| format!("{phi}: {e}"))?;
        ensure(subdivides_normal_fan(&node, &s), || format!("{phi}: Σ* does not subdivide Σ(S)∧̂Φ"))?;
        let common = real_intersection(d, &[s.normal_fan().clone(), orth.clone()]);
        ensure(node.result.is_subdivision(&common) && node.result.is_subdivision(&orth), || {
            format!("{phi}: subdivision check")
        })?;
        instances += 1;
    }
    Ok(format!("{instances} instances, {nodes} recursion nodes, zero violations"))
}

fn hard_height_suite() -> Check {
    let mut r = common::rng(4);
    let mut polys = vec![parse_poly("z^2+x^3", Field::Q, &common::var_names(2)).unwrap()];
    for k in 0..20 {
        polys.push(common::random_z_simple(&mut r, 2 + k % 2).0);
    }
    let (mut codim_one, mut equalities) = (0, 0);
    for phi in &polys {
        let d = phi.nvars();
        let s = newton_polyhedron(phi).map_err(|e| e.to_string())?;
        let h: IntVec = (0..d).map(|i| int((i == d - 1) as i64)).collect();
        let node = upward_subdivision(&h, &Fan::face_fan(&Cone::orthant(d)), &s).map_err(|e| e.to_string())?;
        let rep = hard_height_check(&node, &s, None).map_err(|e| format!("{phi}: {e}"))?;
        codim_one += rep.codim_one;
        equalities += rep.equalities;
    }
    ensure(codim_one > 0, || "no codimension-one carriers exercised".into())?;
    Ok(format!(
        "{} instances, {codim_one} codim-one cones checked, {equalities} equalities, zero violations",
        polys.len()
    ))
}

fn convexity_suite() -> Check {
    let mut r = common::rng(5);
    let mut count = 0;
    for k in 0..120 {
        let d = 2 + k % 3;
        let c = common::random_cone(&mut r, d);
        ensure(c.dual().dual() == c, || format!("dual involution fails on {c}"))?;
        let dual = c.dual();
        let faces = c.faces();
        let mut duals = BTreeSet::new();
        for f in &faces {
            let g = dual.face_at(&f.cone.relint_point());
            ensure(f.cone.dim() + g.dim() == d, || format!("dims {} + {} on {c}", f.cone.dim(), g.dim()))?;
            duals.insert(g);
        }
        ensure(duals.len() == faces.len() && duals.len() == dual.faces().len(), || format!("face bijection on {c}"))?;
        for f in &faces {
            for g in &faces {
                if g.cone.contains_cone(&f.cone) {
                    let (df, dg) = (dual.face_at(&f.cone.relint_point()), dual.face_at(&g.cone.relint_point()));
                    ensure(df.contains_cone(&dg), || format!("inclusion not reversed on {c}"))?;
                }
            }
        }
        count += 1;
    }
    for k in 0..90 {
        let d = 2 + k % 3;
        let s = common::random_polytope(&mut r, d);
        let t = common::random_polytope(&mut r, d);
        let fan = s.normal_fan();
        let mut cones = BTreeSet::new();
        for f in s.faces() {
            ensure(f.dim + f.normal_cone.dim() == d, || format!("face/normal dims {} + {}", f.dim, f.normal_cone.dim()))?;
            ensure(fan.contains(&f.normal_cone), || "normal cone outside Σ(S)".into())?;
            cones.insert(f.normal_cone.clone());
        }
        ensure(cones.len() == fan.len(), || format!("{} faces vs {} cones", cones.len(), fan.len()))?;
        ensure(s.c() == fan.maximal().len(), || format!("c(S) = {} vs {}", s.c(), fan.maximal().len()))?;
        if s.stab() == t.stab() {
            let sum = s.minkowski_sum(&t);
            let meet = real_intersection(d, &[s.normal_fan().clone(), t.normal_fan().clone()]);
            ensure(*sum.normal_fan() == meet, || "Σ(S+T) ≠ Σ(S)∧Σ(T)".into())?;
        }
        count += 1;
    }
    for k in 0..40 {
        let d = 2 + k % 3;
        let fld = if k % 4 == 3 { Field::Fp(3) } else { Field::Q };
        let (na, nb) = (r.gen_range(1..=4), r.gen_range(1..=4));
        let a = common::random_poly(&mut r, fld, d, na, 3);
        let b = common::random_poly(&mut r, fld, d, nb, 3);
        if a.is_zero() || b.is_zero() {
            continue;
        }
        let lhs = newton_polyhedron(&a.mul(&b)).map_err(|e| e.to_string())?;
        let rhs = newton_polyhedron(&a).unwrap().minkowski_sum(&newton_polyhedron(&b).unwrap());
        ensure(lhs == rhs, || format!("Γ₊ not multiplicative on ({a})({b})"))?;
        count += 1;
    }
    ensure(count >= 200, || format!("only {count} instances"))?;
    Ok(format!("{count} random cones/polytopes/products, zero violations"))
}

fn chi0_suite() -> Check {
    let vars = common::var_names(2);
    let cases: [(Field, &str, &str); 3] = [
        (Field::Q, "(z+x)^2+x^5", "x"),
        (Field::Q, "(z+x+x^2)^3", "x^2 + x"),
        (Field::Fp(2), "(z+x)^2", "x"),
    ];
    for (fld, src, want) in cases {
        let psi = parse_poly(src, fld, &vars).unwrap();
        let rem = removable_faces(&psi, 1).map_err(|e| e.to_string())?;
        ensure(!rem.is_empty(), || format!("{src}: no removable face over {fld}"))?;
        let want = parse_poly(want, fld, &vars).unwrap();
        let mut seen = None;
        for order in [8, 9, 10] {
            let e = eliminate_removable(&psi, 1, order).map_err(|e| e.to_string())?;
            ensure(e.chi0 == want, || format!("{src}: χ₀ = {} at O = {order}", e.chi0))?;
            ensure(removable_faces(&e.result, 1).map_err(|e| e.to_string())?.is_empty(), || {
                format!("{src}: removable face left at O = {order}")
            })?;
            let chis: Vec<MultiPoly> = e.steps.iter().map(|s| s.chi.clone()).collect();
            if src == "(z+x+x^2)^3" {
                let greedy = vec![parse_poly("x", fld, &vars).unwrap(), parse_poly("x^2", fld, &vars).unwrap()];
                ensure(chis == greedy, || format!("{src}: greedy order {chis:?}"))?;
            }
            if let Some(prev) = &seen {
                ensure(*prev == chis, || format!("{src}: unstable at O = {order}"))?;
            }
            seen = Some(chis);
        }
    }
    Ok("χ₀ = x, x + x², x (F₂); stable for O = 8, 9, 10".into())
}

fn inv2_descent() -> Check {
    let p = parse_problem(
        "field Q\nvars x z\nz z\nfactor 1 : z\nfactor 1 : z + x\nfactor 1 : z + 2*x\n",
        &Overrides::default(),
    )
    .map_err(|e| e.to_string())?;
    let r = resolution_step(&p).map_err(|e| e.to_string())?;
    ensure(r.before.inv == 0 && r.before.inv2 == Some(3), || format!("before: {:?}", r.before))?;
    ensure(!r.branches.is_empty(), || "no branches".into())?;
    for b in &r.branches {
        ensure(b.inv.inv == 0 && b.inv.inv2.is_some_and(|v| v <= 2), || {
            format!("branch chart {} Θ {}: {:?}", b.chart, b.theta, b.inv)
        })?;
    }
    Ok(format!("inv=0 inv2=3 → {} branches with inv=0, inv2 ≤ 2", r.branches.len()))
}

fn invariant_sanity() -> Check {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus");
    let mut files: Vec<_> = std::fs::read_dir(&dir).map_err(|e| e.to_string())?.map(|e| e.unwrap().path()).collect();
    files.sort();
    let mut states = 0;
    for f in &files {
        let text = std::fs::read_to_string(f).unwrap();
        let p = parse_problem(&text, &Overrides::default()).map_err(|e| e.to_string())?;
        let trace = play_game(&p, Adversary::Exhaustive, 10).map_err(|e| format!("{}: {e}", f.display()))?;
        for e in &trace.entries {
            if let Some(i) = &e.inv {
                ensure(i.inv != 1, || format!("{}: inv = 1 at {}", f.display(), e.path))?;
                states += 1;
            }
        }
    }
    let mut r = common::rng(8);
    let mut tilts = 0;
    while tilts < 50 {
        let d = 2 + tilts % 2;
        let fld = if tilts % 5 == 4 { Field::Fp(7) } else { Field::Q };
        let n = r.gen_range(2..=5);
        let phi = common::random_poly(&mut r, fld, d, n, 4);
        let Some(h) = phi.order() else { continue };
        if h == 0 || h > 4 {
            continue;
        }
        let z = d - 1;
        let t = generic_tilt(&phi, z).map_err(|e| format!("{phi}: {e}"))?;
        let tilted = t.apply(&phi, z);
        let wd = weierstrass_data(&tilted, z).map_err(|e| e.to_string())?;
        let mut top = vec![0u32; d];
        top[z] = h;
        ensure(wd.is_type && wd.top_vertex == Some(top) && wd.z_height == Some(h), || {
            format!("tilt of {phi} gives {wd:?}")
        })?;
        match inv_inv2(&FactoredPoly::from_poly(&tilted), z, 16) {
            Ok(i) => ensure(i.inv != 1, || format!("inv = 1 for {tilted}"))?,
            Err(e) => return Err(format!("{tilted}: {e}")),
        }
        tilts += 1;
    }
    Ok(format!("{} corpus files, {states} game states with inv ≠ 1; {tilts} tilts Weierstrass at ord(φ)", files.len()))
}

fn main() {
    let results = [
        criterion(1, "cusp end-to-end", 5.0, cusp_end_to_end),
        criterion(2, "commuting star subdivisions", 1.0, example_commuting_stars),
        criterion(3, "height inequality suite", 120.0, height_suite),
        criterion(4, "hard height spot checks", 120.0, hard_height_suite),
        criterion(5, "convexity oracles", 60.0, convexity_suite),
        criterion(6, "χ₀ elimination", 5.0, chi0_suite),
        criterion(7, "inv2 descent", 10.0, inv2_descent),
        criterion(8, "invariant sanity", 30.0, invariant_sanity),
    ];
    let passed = results.iter().filter(|ok| **ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
