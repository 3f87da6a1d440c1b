use diffsil::optimizer::AdamState;
use diffsil::{
    aggregate, cdf, icosphere, parse_obj, render_silhouette, signed_distance, tconorm,
    transform_project, Camera, DistributionSpec, Mesh, RenderConfig, ScreenMesh, TConormSpec,
};
use proptest::prelude::*;

type V2 = [f64; 2];

fn point() -> impl Strategy<Value = V2> {
    (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y)| [x, y])
}

fn triangle() -> impl Strategy<Value = [V2; 3]> {
    [point(), point(), point()]
}

fn cross(o: V2, a: V2, b: V2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn area2(t: [V2; 3]) -> f64 {
    cross(t[0], t[1], t[2]).abs()
}

/// Strict barycentric inside test, either winding.
fn inside(p: V2, t: [V2; 3]) -> bool {
    let s = [cross(t[0], t[1], p), cross(t[1], t[2], p), cross(t[2], t[0], p)];
    s.iter().all(|v| *v > 0.0) || s.iter().all(|v| *v < 0.0)
}

fn segment_distance(p: V2, a: V2, b: V2) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [a[0] + t * ab[0] - p[0], a[1] + t * ab[1] - p[1]];
    q[0].hypot(q[1])
}

fn boundary_distance(p: V2, t: [V2; 3]) -> f64 {
    (0..3)
        .map(|i| segment_distance(p, t[i], t[(i + 1) % 3]))
        .fold(f64::INFINITY, f64::min)
}

proptest! {
    #[test]
    fn signed_distance_is_one_lipschitz(t in triangle(), p in point(), q in point()) {
        let dp = signed_distance(p, t);
        let dq = signed_distance(q, t);
        let step = (p[0] - q[0]).hypot(p[1] - q[1]);
        prop_assert!((dp - dq).abs() <= step + 1e-9);
    }

    #[test]
    fn signed_distance_sign_and_magnitude(t in triangle(), p in point()) {
        prop_assume!(area2(t) > 1e-3);
        let d = signed_distance(p, t);
        let b = boundary_distance(p, t);
        prop_assume!(b > 1e-9);
        prop_assert!((d.abs() - b).abs() <= 1e-9 * (1.0 + b));
        prop_assert_eq!(d > 0.0, inside(p, t));
    }

    #[test]
    fn tconorm_axioms_hold_off_grid(
        a in 0.0..=1.0f64,
        b in 0.0..=1.0f64,
        c in 0.0..=1.0f64,
        which in 0usize..6,
    ) {
        let text = ["max", "probabilistic", "einstein", "hamacher(p=0.5)", "frank(p=3)", "dombi(p=2)"][which];
        let s: TConormSpec = text.parse().unwrap();
        prop_assert!((tconorm(&s, a, b) - tconorm(&s, b, a)).abs() <= 1e-12);
        prop_assert!((tconorm(&s, a, 0.0) - a).abs() <= 1e-12);
        let l = tconorm(&s, tconorm(&s, a, b), c);
        let r = tconorm(&s, a, tconorm(&s, b, c));
        prop_assert!((l - r).abs() <= 1e-9, "{text}: {l} vs {r}");
        prop_assert!(tconorm(&s, a, b) >= a.max(b) - 1e-12);
    }

    #[test]
    fn adam_is_invariant_to_gradient_scale(
        g in prop::collection::vec(0.01..10.0f64, 1..6),
        scale in 0.01..100.0f64,
    ) {
        let start: Vec<f64> = (0..g.len()).map(|i| i as f64).collect();
        let mut a = AdamState::new(start.clone(), 0.05);
        let mut b = AdamState::new(start, 0.05);
        let scaled: Vec<f64> = g.iter().map(|v| v * scale).collect();
        for _ in 0..5 {
            a.step(&g).unwrap();
            b.step(&scaled).unwrap();
        }
        for (x, y) in a.params.iter().zip(&b.params) {
            prop_assert!((x - y).abs() <= 1e-6);
        }
    }
}

/// Renders one pixel per face by hand: occupancy from the signed distance,
/// folded left to right.
fn reference_pixel(screen: &ScreenMesh, config: &RenderConfig, p: V2) -> f64 {
    let values: Vec<f64> = (0..screen.faces.len())
        .map(|f| {
            let d = signed_distance(p, screen.triangle(f));
            config.occupancy(d)
        })
        .collect();
    aggregate(&config.tconorm, &values)
}

#[test]
fn render_matches_per_pixel_fold() {
    let mesh = icosphere(1).unwrap();
    let cam = Camera {
        width: 20,
        height: 20,
        azimuth: 30.0,
        elevation: 10.0,
        ..Camera::default()
    };
    let screen = transform_project(&mesh, &cam).unwrap();
    for (d, t, tau) in [
        ("logistic", "probabilistic", 0.05),
        ("gaussian(sq)", "einstein", 0.01),
        ("cauchy", "yager(p=2)", 0.02),
        ("exponential(rev)", "max", 0.05),
    ] {
        let config = RenderConfig::new(d.parse().unwrap(), t.parse().unwrap(), tau, 20);
        let img = render_silhouette(&screen, &config).unwrap();
        for y in 0..20 {
            for x in 0..20 {
                let want = reference_pixel(&screen, &config, [x as f64 + 0.5, y as f64 + 0.5]);
                let got = img.get(x, y);
                // culled faces contribute below 1e-10 each
                assert!((got - want).abs() < 1e-7, "{d} {t} ({x},{y}): {got} vs {want}");
            }
        }
    }
}

#[test]
fn cube_silhouette_width_matches_pinhole() {
    // corners at +-1, nearest face at depth d - 1
    let mesh = diffsil::meshes::cube(1.0);
    let (w, d) = (256usize, 2.732);
    let cam = Camera {
        distance: d,
        fov: 60.0,
        width: w,
        height: w,
        ..Camera::default()
    };
    let screen = transform_project(&mesh, &cam).unwrap();
    let xs: Vec<f64> = screen.vertices.iter().map(|v| v[0]).collect();
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let focal = (w as f64 / 2.0) / 30f64.to_radians().tan();
    let expected = 2.0 * focal * 1.0 / (d - 1.0);
    assert!((hi - lo - expected).abs() < 1e-9, "{} vs {expected}", hi - lo);
}

#[test]
fn mirrored_azimuth_mirrors_the_image() {
    let mesh = diffsil::meshes::desk_teapot().normalized();
    let mirrored = Mesh::new(
        mesh.vertices.iter().map(|v| [-v[0], v[1], v[2]]).collect(),
        mesh.faces.clone(),
    )
    .unwrap();
    let w = 64;
    for az in [0.0, 25.0, 140.0, -70.0] {
        let cam = Camera {
            azimuth: az,
            elevation: 20.0,
            width: w,
            height: w,
            ..Camera::default()
        };
        let a = transform_project(&mesh, &cam).unwrap();
        let b = transform_project(&mirrored, &Camera { azimuth: -az, ..cam }).unwrap();
        for (p, q) in a.vertices.iter().zip(&b.vertices) {
            assert!((p[0] - (w as f64 - q[0])).abs() < 1e-9, "az {az}");
            assert!((p[1] - q[1]).abs() < 1e-9);
            assert!((p[2] - q[2]).abs() < 1e-9);
        }
    }
}

#[test]
fn icosphere_counts_and_radius() {
    for s in 0..4 {
        let m = icosphere(s).unwrap();
        let f = 20 * 4usize.pow(s);
        assert_eq!(m.faces.len(), f);
        // Euler: V - E + F = 2 with E = 3F/2
        assert_eq!(m.vertices.len(), 2 + f / 2);
        for v in &m.vertices {
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            assert!((r - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn obj_polygons_are_fan_triangulated() {
    let text = "# quad\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\nf -1 -2 -3\n";
    let load = parse_obj(text).unwrap();
    assert_eq!(load.mesh.faces, vec![[0, 1, 2], [0, 2, 3], [3, 2, 1]]);
    assert_eq!(load.ignored_records, 1);
    assert!(parse_obj("v 0 0 0\nf 1 2 3\n").is_err());
    assert!(parse_obj("v 0 0\n").is_err());
}

#[test]
fn reversed_squares_edge_values() {
    for text in ["laplace(sq,rev)", "gumbel-max(sq)", "gamma(p=2,sq,rev)"] {
        let s: DistributionSpec = text.parse().unwrap();
        let base = s.without_squares();
        for x in [-3.0f64, -0.5, 0.0, 0.25, 2.0] {
            let want = cdf(&base, x.abs() * x);
            assert!((cdf(&s, x) - want).abs() < 1e-15, "{text} at {x}");
        }
    }
}
