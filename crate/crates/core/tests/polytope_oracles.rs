//! Double description checked against brute force and LP oracles.

use nocon::linalg::{lp_solve, solve, LpBuilder, Rational};
use nocon::polytope::{contains, h_to_v, project, v_to_h, Constraint, HPolytope, VPolytope};
use nocon::Error;
use proptest::prelude::*;

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn box_rows(dim: usize, lo: &[i64], hi: &[i64]) -> Vec<Constraint> {
    let mut out = Vec::new();
    for j in 0..dim {
        let mut a = vec![0; dim];
        a[j] = 1;
        out.push(Constraint::from_ints(&a, r(hi[j], 1)));
        a[j] = -1;
        out.push(Constraint::from_ints(&a, r(-lo[j], 1)));
    }
    out
}

fn h_strategy() -> impl Strategy<Value = HPolytope> {
    (1usize..=4).prop_flat_map(|dim| {
        let extra = prop::collection::vec((prop::collection::vec(-3i64..=3, dim), -4i64..=6, 1i64..=3), 0..=(12 - 2 * dim));
        (Just(dim), prop::collection::vec(1i64..=3, dim), extra)
    })
    .prop_map(|(dim, hi, extra)| {
        let lo = vec![0; dim];
        let mut ineqs = box_rows(dim, &lo, &hi);
        for (a, num, den) in extra {
            ineqs.push(Constraint::from_ints(&a, r(num, den)));
        }
        HPolytope::new(dim, ineqs, vec![]).unwrap()
    })
}

fn brute_force_vertices(h: &HPolytope) -> Vec<Vec<Rational>> {
    let n = h.dim;
    let rows: Vec<&Constraint> = h.inequalities.iter().chain(&h.equalities).collect();
    let m = rows.len();
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    if n > m {
        return out;
    }
    loop {
        let a: Vec<Vec<Rational>> = idx.iter().map(|&i| rows[i].coeffs.clone()).collect();
        let b: Vec<Rational> = idx.iter().map(|&i| rows[i].bound.clone()).collect();
        if let Some(x) = solve(&a, &b) {
            if h.inequalities.iter().all(|c| !c.slack(&x).is_positive()) && h.equalities.iter().all(|c| c.slack(&x).is_zero()) {
                out.push(x);
            }
        }
        // Next n-subset in lexicographic order.
        let mut k = n;
        while k > 0 && idx[k - 1] == m - n + k - 1 {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        idx[k - 1] += 1;
        for j in k..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
    out.sort();
    out.dedup();
    out
}

fn v_strategy() -> impl Strategy<Value = VPolytope> {
    (1usize..=4).prop_flat_map(|dim| prop::collection::vec(prop::collection::vec((-4i64..=4, 1i64..=2), dim), 1..=10))
        .prop_map(|pts| {
            let dim = pts[0].len();
            VPolytope::new(dim, pts.into_iter().map(|p| p.into_iter().map(|(n, d)| r(n, d)).collect()).collect()).unwrap()
        })
}

/// Is `x` a convex combination of the points?
fn lp_in_hull(v: &VPolytope, x: &[Rational]) -> bool {
    let k = v.vertices.len();
    let mut lp = LpBuilder::new(k);
    lp.eq(vec![Rational::one(); k], Rational::one());
    for j in 0..v.dim {
        lp.eq(v.vertices.iter().map(|p| p[j].clone()).collect(), x[j].clone());
    }
    lp_solve(&lp.build().unwrap()).unwrap().is_feasible()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn h_to_v_matches_brute_force(h in h_strategy()) {
        let brute = brute_force_vertices(&h);
        match h_to_v(&h) {
            Ok(v) => {
                prop_assert_eq!(&v.vertices, &brute);
                for x in &v.vertices {
                    prop_assert!(h.inequalities.iter().all(|c| !c.slack(x).is_positive()));
                }
                prop_assert_eq!(v_to_h(&v).unwrap(), h.minimize().unwrap());
            }
            Err(Error::EmptyPolytope) => prop_assert!(brute.is_empty()),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn v_round_trip_and_membership(v in v_strategy(), probes in prop::collection::vec(prop::collection::vec((-5i64..=5, 1i64..=3), 4), 20)) {
        let h = v_to_h(&v).unwrap();
        for x in &v.vertices {
            prop_assert!(h.inequalities.iter().all(|c| !c.slack(x).is_positive()));
            prop_assert!(h.equalities.iter().all(|c| c.slack(x).is_zero()));
        }
        let minimal = VPolytope::minimal(v.dim, v.vertices.clone()).unwrap();
        prop_assert_eq!(h_to_v(&h).unwrap(), minimal.clone());
        prop_assert_eq!(v_to_h(&minimal).unwrap(), h.clone());
        for p in probes {
            let x: Vec<Rational> = p.into_iter().take(v.dim).map(|(n, d)| r(n, d)).collect();
            prop_assert_eq!(contains(&h, &x, 0.0).unwrap().is_inside(), lp_in_hull(&v, &x));
        }
        // Convex combinations are always inside.
        let k = v.vertices.len() as i64;
        let centroid: Vec<Rational> = (0..v.dim).map(|j| v.vertices.iter().map(|p| p[j].clone()).sum::<Rational>() / Rational::from_integer(k)).collect();
        prop_assert!(contains(&h, &centroid, 0.0).unwrap().is_inside());
    }

    #[test]
    fn projection_matches_lp_membership(v in v_strategy(), keep_mask in 1u8..16, probes in prop::collection::vec(prop::collection::vec((-5i64..=5, 1i64..=3), 4), 10)) {
        let keep: Vec<usize> = (0..v.dim).filter(|j| keep_mask >> j & 1 == 1).collect();
        prop_assume!(!keep.is_empty());
        let p = project(&v, &keep).unwrap();
        let restricted = VPolytope::new(keep.len(), v.vertices.iter().map(|x| keep.iter().map(|&j| x[j].clone()).collect()).collect()).unwrap();
        let h = v_to_h(&p).unwrap();
        for probe in probes {
            let x: Vec<Rational> = probe.into_iter().take(keep.len()).map(|(n, d)| r(n, d)).collect();
            prop_assert_eq!(contains(&h, &x, 0.0).unwrap().is_inside(), lp_in_hull(&restricted, &x));
        }
        // No projected vertex is a convex combination of the others.
        for (i, x) in p.vertices.iter().enumerate() {
            let others = VPolytope { dim: p.dim, vertices: p.vertices.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, y)| y.clone()).collect() };
            prop_assert!(others.vertices.is_empty() || !lp_in_hull(&others, x));
        }
    }
}

/// Facets of a full-dimensional 3D point set by brute force over vertex triples.
fn brute_force_facets_3d(pts: &[Vec<Rational>]) -> Vec<Constraint> {
    let mut out = Vec::new();
    let n = pts.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let u: Vec<Rational> = (0..3).map(|c| &pts[j][c] - &pts[i][c]).collect();
                let w: Vec<Rational> = (0..3).map(|c| &pts[k][c] - &pts[i][c]).collect();
                let normal = vec![
                    &u[1] * &w[2] - &u[2] * &w[1],
                    &u[2] * &w[0] - &u[0] * &w[2],
                    &u[0] * &w[1] - &u[1] * &w[0],
                ];
                if normal.iter().all(Rational::is_zero) {
                    continue;
                }
                for sign in [1i64, -1] {
                    let a: Vec<Rational> = normal.iter().map(|x| x * &Rational::from_integer(sign)).collect();
                    let c = Constraint::new(a.clone(), nocon::linalg::dot(&a, &pts[i]));
                    if pts.iter().all(|p| !c.slack(p).is_positive()) {
                        out.push(c);
                    }
                }
            }
        }
    }
    out
}

#[test]
fn facets_of_random_3d_polytopes_match_triples() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 40 {
        let k = rng.gen_range(4..=8);
        let pts: Vec<Vec<Rational>> = (0..k).map(|_| (0..3).map(|_| r(rng.gen_range(-4..=4), rng.gen_range(1..=2))).collect()).collect();
        let v = VPolytope::new(3, pts).unwrap();
        let h = v_to_h(&v).unwrap();
        if !h.equalities.is_empty() {
            continue;
        }
        let brute = HPolytope::new(3, brute_force_facets_3d(&v.vertices), vec![]).unwrap().canonical();
        assert_eq!(h, brute);
        checked += 1;
    }
}

#[test]
fn lower_dimensional_polytope_round_trip() {
    // A square in the plane x + y + z = 1.
    let pts = vec![
        vec![r(1, 1), r(0, 1), r(0, 1)],
        vec![r(0, 1), r(1, 1), r(0, 1)],
        vec![r(1, 2), r(0, 1), r(1, 2)],
        vec![r(0, 1), r(1, 2), r(1, 2)],
    ];
    let v = VPolytope::new(3, pts).unwrap();
    let h = v_to_h(&v).unwrap();
    assert_eq!(h.equalities.len(), 1);
    assert_eq!(h.inequalities.len(), 4);
    assert_eq!(h_to_v(&h).unwrap(), v);
}
