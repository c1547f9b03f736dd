use std::sync::Arc;

use mnls_core::geometry::{
    apply_with_boundary, assemble_laplacian, check_m_matrix, make_grid, ConvexDomain, Field,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn domains() -> Vec<ConvexDomain> {
    vec![
        ConvexDomain::unit_disk(),
        ConvexDomain::Disk {
            center: [0.3, -0.2],
            radius: 1.3,
        },
        ConvexDomain::Ellipse {
            semi_x: 2.0,
            semi_y: 1.0,
        },
        ConvexDomain::Rectangle {
            half_x: 1.0,
            half_y: 0.5,
        },
        ConvexDomain::stadium(3.0),
        ConvexDomain::Stadium {
            alpha: 1.0,
            lambda: 0.4,
        },
    ]
}

#[test]
fn coarse_disk_enumeration() {
    // lattice points of spacing 1/2 strictly inside the unit disk: the cross
    // (0,0), (±1/2,0), (0,±1/2) plus the four diagonals (±1/2,±1/2), whose
    // squared radius is 1/2 < 1
    let g = make_grid(&ConvexDomain::unit_disk(), 0.5).unwrap();
    let mut brute = 0;
    for i in -3..=3 {
        for j in -3..=3 {
            let (x, y) = (0.5 * i as f64, 0.5 * j as f64);
            if x * x + y * y < 1.0 {
                brute += 1;
            }
        }
    }
    assert_eq!(brute, 9);
    assert_eq!(g.len(), 9);
    assert!(g.is_coarse());
}

#[test]
fn coarse_square_has_nine_nodes() {
    let g = make_grid(&ConvexDomain::Rectangle { half_x: 1.0, half_y: 1.0 }, 0.5).unwrap();
    assert_eq!(g.len(), 9);
    // arms of the corner node (0.5, 0.5) reach the sides at full length
    let k = g.at(1, 1).unwrap();
    assert_eq!(g.node(k).theta, [1.0, 1.0, 1.0, 1.0]);
    assert_eq!(g.node(k).neighbor[0], None);
}

#[test]
fn wide_stadium_matches_lattice_scan() {
    let (alpha, h) = (12.0, 1.0 / 16.0);
    let g = make_grid(&ConvexDomain::stadium(alpha), h).unwrap();
    let mut brute = 0;
    for i in -300..=300 {
        for j in -20..=20 {
            let (x, y) = (i as f64 * h, j as f64 * h);
            if y.abs() < 1.0 && x.abs() < alpha + (1.0 - y * y).sqrt() {
                brute += 1;
            }
        }
    }
    assert_eq!(g.len(), brute);
    // the short axis runs fastest, so the band is one vertical lattice line
    assert!(g.bandwidth() <= 33, "{}", g.bandwidth());
}

#[test]
fn degenerate_input_is_an_error() {
    // the lattice is centred on the domain, so any proper domain has a node
    let tiny = ConvexDomain::Disk {
        center: [0.25, 0.25],
        radius: 0.1,
    };
    assert_eq!(make_grid(&tiny, 1.0).unwrap().len(), 1);
    assert!(make_grid(&ConvexDomain::Rectangle { half_x: 0.0, half_y: 1.0 }, 0.1).is_err());
    assert!(make_grid(&ConvexDomain::unit_disk(), 0.0).is_err());
}

#[test]
fn arms_and_membership() {
    for d in domains() {
        let g = make_grid(&d, 0.07).unwrap();
        for n in g.nodes() {
            assert!(d.contains(n.x, n.y));
            for arm in 0..4 {
                let t = n.theta[arm];
                assert!(t > 0.0 && t <= 1.0);
                if n.neighbor[arm].is_some() {
                    assert_eq!(t, 1.0);
                }
            }
        }
    }
}

#[test]
fn every_assembly_is_an_m_matrix() {
    for d in domains() {
        for h in [0.2, 0.05, 0.0123] {
            let g = make_grid(&d, h).unwrap();
            check_m_matrix(&assemble_laplacian(&g)).unwrap();
        }
    }
}

#[test]
fn exact_on_parabolic_profile_of_rectangle() {
    let d = ConvexDomain::Rectangle {
        half_x: 1.0,
        half_y: 1.0,
    };
    for h in [0.5, 0.1, 0.03] {
        let g = make_grid(&d, h).unwrap();
        let psi = |_: f64, y: f64| 0.5 * (1.0 - y * y);
        let vals: Vec<f64> = g.nodes().iter().map(|n| psi(n.x, n.y)).collect();
        let out = apply_with_boundary(&g, &vals, psi);
        for v in out {
            assert!((v - 1.0).abs() < 1e-9, "{v}");
        }
    }
}

#[test]
fn exact_on_disk_torsion_profile() {
    let g = Arc::new(make_grid(&ConvexDomain::unit_disk(), 0.03).unwrap());
    let u = Field::from_fn(g.clone(), |x, y| 0.25 * (1.0 - x * x - y * y)).unwrap();
    let out = assemble_laplacian(&g).apply(u.values());
    for v in out {
        assert!((v - 1.0).abs() < 1e-10, "{v}");
    }
}

#[test]
fn exact_on_quadratics_everywhere() {
    let q = |x: f64, y: f64| 1.0 + 0.3 * x - 0.7 * y + x * x + 3.0 * y * y - 0.5 * x * y;
    for d in domains() {
        let g = make_grid(&d, 0.04).unwrap();
        let vals: Vec<f64> = g.nodes().iter().map(|n| q(n.x, n.y)).collect();
        let out = apply_with_boundary(&g, &vals, q);
        for v in out {
            assert!((v + 8.0).abs() < 1e-8, "{d:?}: {v}");
        }
    }
}

#[test]
fn domains_are_convex() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in domains() {
        let (cx, cy) = d.center();
        let (ex, ey) = d.half_extent();
        let mut pts = Vec::new();
        while pts.len() < 2 * 10_000 {
            let p = (cx + rng.random_range(-ex..ex), cy + rng.random_range(-ey..ey));
            if d.contains(p.0, p.1) {
                pts.push(p);
            }
        }
        for pair in pts.chunks(2) {
            let (p, q) = (pair[0], pair[1]);
            assert!(d.contains(0.5 * (p.0 + q.0), 0.5 * (p.1 + q.1)), "{d:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn stadium_is_symmetric(x in -14.0f64..14.0, y in -1.2f64..1.2, alpha in 0.0f64..12.0, lambda in 0.1f64..2.0) {
        let d = ConvexDomain::Stadium { alpha, lambda };
        let inside = d.contains(x, y);
        prop_assert_eq!(inside, d.contains(-x, y));
        prop_assert_eq!(inside, d.contains(x, -y));
        prop_assert_eq!(inside, d.contains(-x, -y));
    }
}

#[test]
fn stadium_grid_is_symmetric() {
    let g = make_grid(&ConvexDomain::stadium(4.0), 1.0 / 16.0).unwrap();
    for n in g.nodes() {
        for (si, sj) in [(-1, 1), (1, -1), (-1, -1)] {
            let k = g.at(si * n.i, sj * n.j).expect("mirror node exists");
            let m = g.node(k);
            let swap = |t: [f64; 4]| {
                let [e, w, no, s] = t;
                let (e, w) = if si < 0 { (w, e) } else { (e, w) };
                let (no, s) = if sj < 0 { (s, no) } else { (no, s) };
                [e, w, no, s]
            };
            let expected = swap(n.theta);
            for a in 0..4 {
                assert!((m.theta[a] - expected[a]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn field_csv() {
    let g = Arc::new(make_grid(&ConvexDomain::unit_disk(), 0.5).unwrap());
    let f = Field::from_fn(g, |x, _| x).unwrap();
    let csv = f.to_csv();
    assert!(csv.starts_with("x,y,value\n"));
    assert_eq!(csv.lines().count(), 10);
}
