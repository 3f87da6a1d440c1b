//! Small procedural meshes used by tests and desk-scale experiments.
//!
//! The teapot and airplane are coarse stand-ins built from lathes, tubes and
//! boxes. They are not watertight; only their silhouettes matter here.

use std::f64::consts::TAU;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{dot3, load_obj, Mesh, Vec3};

/// Axis-aligned cube with half-extent `h`, outward CCW faces.
pub fn cube(h: f64) -> Mesh {
    let mut b = Builder::default();
    b.push_box([0.0; 3], [h; 3]);
    b.finish()
}

/// Coarse teapot: lathe body, tapered spout, and a looped handle.
/// Asymmetric under rotations about the vertical axis.
pub fn desk_teapot() -> Mesh {
    let mut b = Builder::default();
    let profile = [
        (0.0, -0.5),
        (0.45, -0.5),
        (0.62, -0.3),
        (0.66, -0.02),
        (0.56, 0.28),
        (0.34, 0.44),
        (0.12, 0.5),
        (0.1, 0.6),
        (0.0, 0.64),
    ];
    b.push_lathe(&profile, 14, [0.0; 3], Axis::Y);
    let spout: Vec<(Vec3, f64)> = vec![
        ([0.5, -0.12, 0.0], 0.13),
        ([0.78, 0.02, 0.0], 0.09),
        ([0.95, 0.26, 0.0], 0.065),
        ([1.05, 0.4, 0.0], 0.055),
    ];
    b.push_tube(&spout, 6);
    let handle: Vec<(Vec3, f64)> = (0..=7)
        .map(|i| {
            let a = -1.25 + 2.5 * i as f64 / 7.0;
            ([-0.58 - 0.32 * a.cos(), 0.05 + 0.3 * a.sin(), 0.0], 0.06)
        })
        .collect();
    b.push_tube(&handle, 6);
    b.finish()
}

/// Coarse airplane: fuselage along +X, main wing, tailplane, and fin.
pub fn desk_airplane() -> Mesh {
    let mut b = Builder::default();
    let profile = [
        (0.0, -1.0),
        (0.08, -0.92),
        (0.13, -0.7),
        (0.14, -0.2),
        (0.13, 0.4),
        (0.09, 0.8),
        (0.04, 0.98),
        (0.0, 1.0),
    ];
    b.push_lathe(&profile, 10, [0.0; 3], Axis::X);
    b.push_box([-0.05, 0.0, 0.0], [0.2, 0.02, 0.95]);
    b.push_box([0.82, 0.02, 0.0], [0.1, 0.015, 0.35]);
    b.push_box([0.84, 0.18, 0.0], [0.1, 0.17, 0.015]);
    b.finish()
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

#[derive(Default)]
struct Builder {
    vertices: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
}

impl Builder {
    fn finish(self) -> Mesh {
        Mesh::new(self.vertices, self.faces).expect("procedural mesh is valid")
    }

    fn push_box(&mut self, c: Vec3, h: Vec3) {
        let base = self.vertices.len();
        for i in 0..8 {
            let sx = if i & 1 == 0 { -1.0 } else { 1.0 };
            let sy = if i & 2 == 0 { -1.0 } else { 1.0 };
            let sz = if i & 4 == 0 { -1.0 } else { 1.0 };
            self.vertices
                .push([c[0] + sx * h[0], c[1] + sy * h[1], c[2] + sz * h[2]]);
        }
        let quads = [
            [0, 2, 3, 1], // -z
            [4, 5, 7, 6], // +z
            [0, 1, 5, 4], // -y
            [2, 6, 7, 3], // +y
            [0, 4, 6, 2], // -x
            [1, 3, 7, 5], // +x
        ];
        for q in quads {
            self.faces.push([base + q[0], base + q[1], base + q[2]]);
            self.faces.push([base + q[0], base + q[2], base + q[3]]);
        }
    }

    /// Surface of revolution of `(radius, height)` pairs; zero-radius ends
    /// become single pole vertices.
    fn push_lathe(&mut self, profile: &[(f64, f64)], segments: usize, c: Vec3, axis: Axis) {
        let point = |r: f64, h: f64, a: f64| -> Vec3 {
            let (s, co) = a.sin_cos();
            match axis {
                Axis::Y => [c[0] + r * co, c[1] + h, c[2] + r * s],
                Axis::X => [c[0] + h, c[1] + r * co, c[2] + r * s],
            }
        };
        let mut rings: Vec<Vec<usize>> = Vec::new();
        for &(r, h) in profile {
            if r == 0.0 {
                self.vertices.push(point(0.0, h, 0.0));
                rings.push(vec![self.vertices.len() - 1; segments]);
            } else {
                let start = self.vertices.len();
                for k in 0..segments {
                    self.vertices
                        .push(point(r, h, TAU * k as f64 / segments as f64));
                }
                rings.push((start..start + segments).collect());
            }
        }
        for w in rings.windows(2) {
            let (lo, hi) = (&w[0], &w[1]);
            for k in 0..segments {
                let k1 = (k + 1) % segments;
                let quad = [lo[k], lo[k1], hi[k1], hi[k]];
                for tri in [[quad[0], quad[1], quad[2]], [quad[0], quad[2], quad[3]]] {
                    if tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2] {
                        self.faces.push(tri);
                    }
                }
            }
        }
    }

    /// Open tube of varying radius along a polyline.
    fn push_tube(&mut self, path: &[(Vec3, f64)], sides: usize) {
        let mut rings = Vec::new();
        for i in 0..path.len() {
            let prev = path[i.saturating_sub(1)].0;
            let next = path[(i + 1).min(path.len() - 1)].0;
            let t = normalize([next[0] - prev[0], next[1] - prev[1], next[2] - prev[2]]);
            let helper = if t[2].abs() < 0.9 {
                [0.0, 0.0, 1.0]
            } else {
                [1.0, 0.0, 0.0]
            };
            let n = normalize(cross(t, helper));
            let bn = cross(t, n);
            let (c, r) = path[i];
            let start = self.vertices.len();
            for k in 0..sides {
                let (s, co) = (TAU * k as f64 / sides as f64).sin_cos();
                self.vertices.push([
                    c[0] + r * (co * n[0] + s * bn[0]),
                    c[1] + r * (co * n[1] + s * bn[1]),
                    c[2] + r * (co * n[2] + s * bn[2]),
                ]);
            }
            rings.push(start);
        }
        for w in rings.windows(2) {
            for k in 0..sides {
                let k1 = (k + 1) % sides;
                let (a, b, c, d) = (w[0] + k, w[0] + k1, w[1] + k1, w[1] + k);
                self.faces.push([a, b, c]);
                self.faces.push([a, c, d]);
            }
        }
    }
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(v: Vec3) -> Vec3 {
    let n = dot3(v, v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Looks up a built-in mesh by name.
pub fn builtin(name: &str) -> Option<Mesh> {
    match name {
        "cube" => Some(cube(0.5)),
        "teapot" => Some(desk_teapot()),
        "airplane" => Some(desk_airplane()),
        "sphere" => crate::geometry::icosphere(2).ok(),
        _ => None,
    }
}

/// Resolves a built-in mesh name or an OBJ path.
pub fn resolve(spec: &str) -> Result<Mesh> {
    match builtin(spec) {
        Some(m) => Ok(m),
        None if Path::new(spec).exists() => load_obj(spec),
        None => Err(Error::config(format!(
            "`{spec}` is neither a built-in mesh (cube, teapot, airplane, sphere) nor an existing file"
        ))),
    }
}
