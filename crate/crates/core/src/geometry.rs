//! Meshes, the look-at pinhole camera, projection, and the signed
//! pixel-to-triangle distance.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

pub type Vec2 = [f64; 2];
pub type Vec3 = [f64; 3];

#[inline]
pub(crate) fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn cross2(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
fn sub2(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

/// Triangle mesh in world units. Faces index into `vertices`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
}

impl Mesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let mesh = Self { vertices, faces };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        for (i, v) in self.vertices.iter().enumerate() {
            if v.iter().any(|c| !c.is_finite()) {
                return Err(Error::config(format!(
                    "vertex {i} has a non-finite coordinate"
                )));
            }
        }
        for (i, f) in self.faces.iter().enumerate() {
            if f.iter().any(|&k| k >= n) {
                return Err(Error::config(format!("face {i} indexes past {n} vertices")));
            }
            if f[0] == f[1] && f[1] == f[2] {
                return Err(Error::config(format!("face {i} is degenerate")));
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Center of the axis-aligned bounding box and the radius of the
    /// smallest sphere around that center containing every vertex.
    pub fn bounding_sphere(&self) -> (Vec3, f64) {
        if self.vertices.is_empty() {
            return ([0.0; 3], 0.0);
        }
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        let c = [
            0.5 * (lo[0] + hi[0]),
            0.5 * (lo[1] + hi[1]),
            0.5 * (lo[2] + hi[2]),
        ];
        let r = self
            .vertices
            .iter()
            .map(|v| ((v[0] - c[0]).powi(2) + (v[1] - c[1]).powi(2) + (v[2] - c[2]).powi(2)).sqrt())
            .fold(0.0, f64::max);
        (c, r)
    }

    /// Recenters and scales the mesh so that its bounding sphere is the
    /// unit sphere at the origin.
    pub fn normalized(&self) -> Mesh {
        let (c, r) = self.bounding_sphere();
        let s = if r > 0.0 { 1.0 / r } else { 1.0 };
        Mesh {
            vertices: self
                .vertices
                .iter()
                .map(|v| [(v[0] - c[0]) * s, (v[1] - c[1]) * s, (v[2] - c[2]) * s])
                .collect(),
            faces: self.faces.clone(),
        }
    }

    /// For each vertex, the faces using it (ascending).
    pub fn vertex_faces(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices.len()];
        for (fi, f) in self.faces.iter().enumerate() {
            for &v in f {
                if out[v].last() != Some(&fi) {
                    out[v].push(fi);
                }
            }
        }
        out
    }

    /// Writes a minimal OBJ (`v` and `f` records only).
    pub fn to_obj_string(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            s.push_str(&format!("v {} {} {}\n", v[0], v[1], v[2]));
        }
        for f in &self.faces {
            s.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
        }
        s
    }
}

/// Result of parsing an OBJ file.
#[derive(Debug, Clone)]
pub struct ObjLoad {
    pub mesh: Mesh,
    /// Records other than `v`/`f` (normals, texture coords, groups, ...).
    pub ignored_records: usize,
}

pub fn load_obj(path: impl AsRef<Path>) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_obj(&text)?.mesh)
}

/// Parses the `v` / `f` subset of Wavefront OBJ. Polygons are
/// fan-triangulated around their first vertex; `i/j/k` index tuples use the
/// position index; negative indices are relative to the end.
pub fn parse_obj(text: &str) -> Result<ObjLoad> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut ignored = 0;
    // (line, polygon) checked once all vertices are known
    let mut polys: Vec<(usize, Vec<i64>)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut it = content.split_whitespace();
        match it.next() {
            Some("v") => {
                let mut v = [0.0; 3];
                for slot in &mut v {
                    let tok = it.next().ok_or_else(|| Error::Obj {
                        line,
                        reason: "vertex needs three coordinates".into(),
                    })?;
                    let x: f64 = tok.parse().map_err(|_| Error::Obj {
                        line,
                        reason: format!("bad coordinate `{tok}`"),
                    })?;
                    if !x.is_finite() {
                        return Err(Error::Obj {
                            line,
                            reason: format!("non-finite coordinate `{tok}`"),
                        });
                    }
                    *slot = x;
                }
                vertices.push(v);
            }
            Some("f") => {
                let mut idx = Vec::new();
                for tok in it {
                    let first = tok.split('/').next().unwrap_or("");
                    let k: i64 = first.parse().map_err(|_| Error::Obj {
                        line,
                        reason: format!("bad face index `{tok}`"),
                    })?;
                    if k == 0 {
                        return Err(Error::Obj {
                            line,
                            reason: "face index 0 (OBJ indices are 1-based)".into(),
                        });
                    }
                    idx.push(k);
                }
                if idx.len() < 3 {
                    return Err(Error::Obj {
                        line,
                        reason: "face needs at least three vertices".into(),
                    });
                }
                polys.push((line, idx));
            }
            Some(_) => ignored += 1,
            None => {}
        }
    }

    let n = vertices.len() as i64;
    for (line, idx) in polys {
        let mut resolved = Vec::with_capacity(idx.len());
        for k in idx {
            let r = if k > 0 { k - 1 } else { n + k };
            if r < 0 || r >= n {
                return Err(Error::Obj {
                    line,
                    reason: format!("face index {k} out of range for {n} vertices"),
                });
            }
            resolved.push(r as usize);
        }
        for i in 1..resolved.len() - 1 {
            let f = [resolved[0], resolved[i], resolved[i + 1]];
            if f[0] == f[1] && f[1] == f[2] {
                return Err(Error::Obj {
                    line,
                    reason: "degenerate face".into(),
                });
            }
            faces.push(f);
        }
    }
    Ok(ObjLoad {
        mesh: Mesh { vertices, faces },
        ignored_records: ignored,
    })
}

/// Unit-radius icosphere with `10 * 4^s + 2` vertices.
pub fn icosphere(subdivisions: u32) -> Result<Mesh> {
    if subdivisions > 5 {
        return Err(Error::config(format!(
            "icosphere subdivisions must be in 0..=5, got {subdivisions}"
        )));
    }
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Vec3> = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for v in &mut vertices {
        *v = normalize3(*v);
    }
    for _ in 0..subdivisions {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Vec3>| -> usize {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                let (p, q) = (vertices[a], vertices[b]);
                vertices.push(normalize3([
                    0.5 * (p[0] + q[0]),
                    0.5 * (p[1] + q[1]),
                    0.5 * (p[2] + q[2]),
                ]));
                vertices.len() - 1
            })
        };
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    Mesh::new(vertices, faces)
}

fn normalize3(v: Vec3) -> Vec3 {
    let n = dot3(v, v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

/// Look-at pinhole camera on a sphere around the origin, up = +Y.
///
/// Angles are in degrees. `roll` rotates the image plane about the viewing
/// axis; it lets pose recovery represent arbitrary orientations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub azimuth: f64,
    pub elevation: f64,
    pub roll: f64,
    pub distance: f64,
    pub fov: f64,
    pub width: usize,
    pub height: usize,
}

impl Default for Camera {
    fn default() -> Self {
        Self {
            azimuth: 0.0,
            elevation: 0.0,
            roll: 0.0,
            distance: 4.5,
            fov: 30.0,
            width: 64,
            height: 64,
        }
    }
}

/// Camera degrees of freedom, in the order used by gradient vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CameraParam {
    Azimuth,
    Elevation,
    Roll,
    Distance,
}

impl CameraParam {
    pub const ALL: [CameraParam; 4] = [
        CameraParam::Azimuth,
        CameraParam::Elevation,
        CameraParam::Roll,
        CameraParam::Distance,
    ];
}

impl Camera {
    pub fn validate(&self) -> Result<()> {
        if !(self.distance > 0.0) || !self.distance.is_finite() {
            return Err(Error::config(format!(
                "camera distance must be > 0, got {}",
                self.distance
            )));
        }
        if !(self.fov > 0.0 && self.fov < 180.0) {
            return Err(Error::config(format!(
                "camera fov must be in (0, 180), got {}",
                self.fov
            )));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::config("image size must be at least 1x1"));
        }
        if ![self.azimuth, self.elevation, self.roll]
            .iter()
            .all(|a| a.is_finite())
        {
            return Err(Error::config("camera angles must be finite"));
        }
        Ok(())
    }

    pub fn get(&self, p: CameraParam) -> f64 {
        match p {
            CameraParam::Azimuth => self.azimuth,
            CameraParam::Elevation => self.elevation,
            CameraParam::Roll => self.roll,
            CameraParam::Distance => self.distance,
        }
    }

    pub fn set(&mut self, p: CameraParam, v: f64) {
        match p {
            CameraParam::Azimuth => self.azimuth = v,
            CameraParam::Elevation => self.elevation = v,
            CameraParam::Roll => self.roll = v,
            CameraParam::Distance => self.distance = v,
        }
    }

    /// Focal length in pixels (horizontal field of view, square pixels).
    pub fn focal(&self) -> f64 {
        0.5 * self.width as f64 / (0.5 * self.fov.to_radians()).tan()
    }

    /// Rows are the camera right, up, and back axes in world coordinates;
    /// the matrix is a proper rotation (world to camera).
    pub fn rotation(&self) -> [Vec3; 3] {
        let f = Frame::new(self);
        [f.right, f.up, [-f.fwd[0], -f.fwd[1], -f.fwd[2]]]
    }

    /// Inverse of [`Camera::rotation`]; elevation is taken in [-90, 90].
    pub fn with_rotation(&self, rot: [Vec3; 3]) -> Camera {
        let back = rot[2];
        let el = back[1].clamp(-1.0, 1.0).asin();
        let az = back[0].atan2(back[2]);
        let (sa, ca) = az.sin_cos();
        let (se, ce) = el.sin_cos();
        let r = [ca, 0.0, -sa];
        let u = [-se * sa, ce, -se * ca];
        let roll = dot3(rot[0], u).atan2(dot3(rot[0], r));
        Camera {
            azimuth: az.to_degrees(),
            elevation: el.to_degrees(),
            roll: roll.to_degrees(),
            ..*self
        }
    }
}

/// Precomputed camera basis plus derivatives with respect to the angles.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub right: Vec3,
    pub up: Vec3,
    pub fwd: Vec3,
    pub distance: f64,
    pub focal: f64,
    pub cx: f64,
    pub cy: f64,
    // d/d(azimuth), d/d(elevation), d/d(roll) of right, up, fwd (per radian)
    d_right: [Vec3; 3],
    d_up: [Vec3; 3],
    d_fwd: [Vec3; 3],
}

impl Frame {
    pub fn new(cam: &Camera) -> Self {
        let (sa, ca) = cam.azimuth.to_radians().sin_cos();
        let (se, ce) = cam.elevation.to_radians().sin_cos();
        let (sr, cr) = cam.roll.to_radians().sin_cos();
        // unrolled basis
        let r = [ca, 0.0, -sa];
        let u = [-se * sa, ce, -se * ca];
        let f = [-ce * sa, -se, -ce * ca];
        let lin = |a: f64, x: Vec3, b: f64, y: Vec3| -> Vec3 {
            [
                a * x[0] + b * y[0],
                a * x[1] + b * y[1],
                a * x[2] + b * y[2],
            ]
        };
        let right = lin(cr, r, sr, u);
        let up = lin(-sr, r, cr, u);
        let dr_az = [-sa, 0.0, -ca];
        let du_az = [-se * ca, 0.0, se * sa];
        let df_az = [-ce * ca, 0.0, ce * sa];
        let neg_u = [-u[0], -u[1], -u[2]];
        Frame {
            right,
            up,
            fwd: f,
            distance: cam.distance,
            focal: cam.focal(),
            cx: 0.5 * cam.width as f64,
            cy: 0.5 * cam.height as f64,
            d_right: [lin(cr, dr_az, sr, du_az), lin(0.0, r, sr, f), up],
            d_up: [
                lin(-sr, dr_az, cr, du_az),
                lin(0.0, r, cr, f),
                [-right[0], -right[1], -right[2]],
            ],
            d_fwd: [df_az, neg_u, [0.0; 3]],
        }
    }

    /// Camera-space coordinates (x right, y up, z depth in front).
    #[inline]
    pub fn to_camera(&self, v: Vec3) -> Vec3 {
        [
            dot3(self.right, v),
            dot3(self.up, v),
            dot3(self.fwd, v) + self.distance,
        ]
    }

    /// Pixel coordinates (y down) and depth.
    #[inline]
    pub fn project(&self, v: Vec3) -> Vec3 {
        let [x, y, z] = self.to_camera(v);
        [
            self.cx + self.focal * x / z,
            self.cy - self.focal * y / z,
            z,
        ]
    }

    /// `d(px, py) / d(vx, vy, vz)`.
    pub fn jacobian_vertex(&self, v: Vec3) -> [Vec3; 2] {
        let [x, y, z] = self.to_camera(v);
        let k = self.focal / z;
        let mut jx = [0.0; 3];
        let mut jy = [0.0; 3];
        for i in 0..3 {
            jx[i] = k * (self.right[i] - x / z * self.fwd[i]);
            jy[i] = -k * (self.up[i] - y / z * self.fwd[i]);
        }
        [jx, jy]
    }

    /// `d(px, py) / d(azimuth, elevation, roll, distance)`, angles per radian.
    pub fn jacobian_camera(&self, v: Vec3) -> [[f64; 4]; 2] {
        let [x, y, z] = self.to_camera(v);
        let k = self.focal / z;
        let mut out = [[0.0; 4]; 2];
        for a in 0..3 {
            let dx = dot3(self.d_right[a], v);
            let dy = dot3(self.d_up[a], v);
            let dz = dot3(self.d_fwd[a], v);
            out[0][a] = k * (dx - x / z * dz);
            out[1][a] = -k * (dy - y / z * dz);
        }
        out[0][3] = -k * x / z;
        out[1][3] = k * y / z;
        out
    }
}

/// Mesh in image space: `(x, y)` in pixels (y down) and camera depth `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScreenMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
}

impl ScreenMesh {
    pub fn triangle(&self, face: usize) -> [Vec2; 3] {
        let f = self.faces[face];
        let p = |i: usize| [self.vertices[i][0], self.vertices[i][1]];
        [p(f[0]), p(f[1]), p(f[2])]
    }

    /// Translates every vertex in the image plane.
    pub fn translated(&self, dx: f64, dy: f64) -> ScreenMesh {
        ScreenMesh {
            vertices: self
                .vertices
                .iter()
                .map(|v| [v[0] + dx, v[1] + dy, v[2]])
                .collect(),
            faces: self.faces.clone(),
        }
    }

    /// Builds a screen mesh directly from 2D triangles at unit depth.
    pub fn from_triangles(tris: &[[Vec2; 3]]) -> ScreenMesh {
        let mut vertices = Vec::with_capacity(tris.len() * 3);
        let mut faces = Vec::with_capacity(tris.len());
        for t in tris {
            let base = vertices.len();
            for p in t {
                vertices.push([p[0], p[1], 1.0]);
            }
            faces.push([base, base + 1, base + 2]);
        }
        ScreenMesh { vertices, faces }
    }
}

/// Perspective projection of every vertex. Vertices at or behind the
/// camera plane (depth ≤ 1e-9) are rejected.
pub fn transform_project(mesh: &Mesh, camera: &Camera) -> Result<ScreenMesh> {
    camera.validate()?;
    let frame = Frame::new(camera);
    let mut vertices = Vec::with_capacity(mesh.vertices.len());
    for (i, &v) in mesh.vertices.iter().enumerate() {
        let p = frame.project(v);
        if !(p[2] > 1e-9) {
            return Err(Error::SingularProjection {
                vertex: i,
                depth: p[2],
            });
        }
        vertices.push(p);
    }
    Ok(ScreenMesh {
        vertices,
        faces: mesh.faces.clone(),
    })
}

/// Precomputed triangle for repeated distance queries.
#[derive(Debug, Clone, Copy)]
pub struct TriangleGeom {
    pub pts: [Vec2; 3],
    edges: [Vec2; 3],
    inv_len2: [f64; 3],
    /// +1 for positive signed area, -1 for negative, 0 for degenerate.
    orient: f64,
}

/// Nearest boundary feature of a distance query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceQuery {
    /// Signed distance, positive inside.
    pub d: f64,
    /// Index of the nearest edge (`i` joins vertex `i` and `i + 1`).
    pub edge: usize,
    /// Parameter of the closest point along that edge, in `[0, 1]`.
    pub t: f64,
    pub inside: bool,
    /// Closest boundary point.
    pub closest: Vec2,
}

impl TriangleGeom {
    pub fn new(pts: [Vec2; 3]) -> Self {
        let edges = [
            sub2(pts[1], pts[0]),
            sub2(pts[2], pts[1]),
            sub2(pts[0], pts[2]),
        ];
        let inv_len2 = edges.map(|e| {
            let l = e[0] * e[0] + e[1] * e[1];
            if l > 0.0 {
                1.0 / l
            } else {
                0.0
            }
        });
        let area2 = cross2(edges[0], sub2(pts[2], pts[0]));
        let orient = if area2 > 0.0 {
            1.0
        } else if area2 < 0.0 {
            -1.0
        } else {
            0.0
        };
        Self {
            pts,
            edges,
            inv_len2,
            orient,
        }
    }

    pub fn is_degenerate(&self) -> bool {
        self.orient == 0.0
    }

    /// Barycentric inside test, boundary inclusive; degenerate triangles
    /// have no interior.
    #[inline]
    pub fn contains(&self, p: Vec2) -> bool {
        if self.orient == 0.0 {
            return false;
        }
        (0..3).all(|i| self.orient * cross2(self.edges[i], sub2(p, self.pts[i])) >= 0.0)
    }

    /// Signed Euclidean distance to the boundary. Ties between edges go to
    /// the lowest edge index.
    #[inline]
    pub fn query(&self, p: Vec2) -> DistanceQuery {
        let mut best = f64::INFINITY;
        let mut edge = 0;
        let mut best_t = 0.0;
        let mut closest = self.pts[0];
        for i in 0..3 {
            let a = self.pts[i];
            let e = self.edges[i];
            let ap = sub2(p, a);
            let t = ((ap[0] * e[0] + ap[1] * e[1]) * self.inv_len2[i]).clamp(0.0, 1.0);
            let c = [a[0] + t * e[0], a[1] + t * e[1]];
            let dx = p[0] - c[0];
            let dy = p[1] - c[1];
            let d2 = dx * dx + dy * dy;
            if d2 < best {
                best = d2;
                edge = i;
                best_t = t;
                closest = c;
            }
        }
        let inside = self.contains(p);
        let dist = best.sqrt();
        DistanceQuery {
            d: if inside { dist } else { -dist },
            edge,
            t: best_t,
            inside,
            closest,
        }
    }

    /// `∂d / ∂(vertex i)` for the feature chosen by `q`.
    #[inline]
    pub fn distance_gradient(&self, p: Vec2, q: &DistanceQuery) -> [Vec2; 3] {
        let dist = q.d.abs();
        // outward unit vector from the boundary toward p, times the sign:
        // d(dist)/d(a) = -n (1 - t), d(dist)/d(b) = -n t
        let n = if dist > 0.0 {
            let s = if q.inside { 1.0 } else { -1.0 };
            [
                s * (p[0] - q.closest[0]) / dist,
                s * (p[1] - q.closest[1]) / dist,
            ]
        } else {
            // on the boundary: the inward normal of the edge
            let e = self.edges[q.edge];
            let l = (e[0] * e[0] + e[1] * e[1]).sqrt();
            if l == 0.0 || self.orient == 0.0 {
                [0.0, 0.0]
            } else {
                [self.orient * -e[1] / l, self.orient * e[0] / l]
            }
        };
        let a = q.edge;
        let b = (q.edge + 1) % 3;
        let mut g = [[0.0; 2]; 3];
        g[a] = [-n[0] * (1.0 - q.t), -n[1] * (1.0 - q.t)];
        g[b][0] += -n[0] * q.t;
        g[b][1] += -n[1] * q.t;
        g
    }

    /// Barycentric weights of the closest point of the triangle to `p`
    /// (the point itself when inside).
    pub fn closest_barycentric(&self, p: Vec2, q: &DistanceQuery) -> [f64; 3] {
        if q.inside {
            let a = self.pts[0];
            let e1 = sub2(self.pts[1], a);
            let e2 = sub2(self.pts[2], a);
            let ap = sub2(p, a);
            let det = cross2(e1, e2);
            let l1 = cross2(ap, e2) / det;
            let l2 = cross2(e1, ap) / det;
            [1.0 - l1 - l2, l1, l2]
        } else {
            let mut w = [0.0; 3];
            w[q.edge] = 1.0 - q.t;
            w[(q.edge + 1) % 3] += q.t;
            w
        }
    }
}

/// Signed Euclidean distance from `p` to the boundary of `tri`: positive
/// strictly inside, negative outside, zero on the boundary. Degenerate
/// triangles have no interior, so the value is never positive.
pub fn signed_distance(p: Vec2, tri: [Vec2; 3]) -> f64 {
    TriangleGeom::new(tri).query(p).d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_distance_examples() {
        let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        assert_eq!(signed_distance([0.0, 0.0], tri), 0.0);
        assert_eq!(signed_distance([2.0, 0.0], tri), -1.0);
        let big = [[0.0, 0.0], [4.0, 0.0], [0.0, 4.0]];
        assert_eq!(signed_distance([1.0, 1.0], big), 1.0);
        // winding does not matter
        let rev = [[0.0, 0.0], [0.0, 4.0], [4.0, 0.0]];
        assert_eq!(signed_distance([1.0, 1.0], rev), 1.0);
    }

    #[test]
    fn degenerate_triangle_has_no_interior() {
        let tri = [[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]];
        assert!(signed_distance([1.0, 1.0], tri) <= 0.0);
        assert!(signed_distance([1.0, 0.0], tri) < 0.0);
        let point = [[1.0, 1.0]; 3];
        assert!((signed_distance([4.0, 5.0], point) + 5.0).abs() < 1e-15);
    }

    #[test]
    fn obj_parsing() {
        let m = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n")
            .unwrap()
            .mesh;
        assert_eq!((m.vertices.len(), m.faces.len()), (3, 1));

        let q = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n").unwrap();
        assert_eq!(q.mesh.faces, vec![[0, 1, 2], [0, 2, 3]]);

        let err = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 5\n").unwrap_err();
        assert!(matches!(err, Error::Obj { line: 4, .. }), "{err}");

        let err = parse_obj("v 0 nan 0\n").unwrap_err();
        assert!(matches!(err, Error::Obj { line: 1, .. }));

        let l = parse_obj("# c\nvn 0 0 1\nv 0 0 0\nv 1 0 0\nv 0 1 0\ng x\nf 1//1 2//1 -1//1\n")
            .unwrap();
        assert_eq!(l.ignored_records, 2);
        assert_eq!(l.mesh.faces, vec![[0, 1, 2]]);
    }

    #[test]
    fn icosphere_counts() {
        let m0 = icosphere(0).unwrap();
        assert_eq!((m0.vertices.len(), m0.faces.len()), (12, 20));
        let m1 = icosphere(1).unwrap();
        assert_eq!((m1.vertices.len(), m1.faces.len()), (42, 80));
        let m3 = icosphere(3).unwrap();
        assert_eq!(m3.vertices.len(), 10 * 4usize.pow(3) + 2);
        for v in &m3.vertices {
            assert!((dot3(*v, *v).sqrt() - 1.0).abs() < 1e-12);
        }
        assert!(icosphere(6).is_err());
    }

    #[test]
    fn origin_projects_to_center() {
        for (az, el) in [(0.0, 0.0), (37.0, -20.0), (200.0, 60.0)] {
            let cam = Camera {
                azimuth: az,
                elevation: el,
                distance: 3.3,
                ..Camera::default()
            };
            let p = Frame::new(&cam).project([0.0; 3]);
            assert!((p[0] - 32.0).abs() < 1e-12 && (p[1] - 32.0).abs() < 1e-12);
            assert!((p[2] - 3.3).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_round_trip() {
        let cam = Camera {
            azimuth: 123.0,
            elevation: -35.0,
            roll: 20.0,
            ..Camera::default()
        };
        let back = cam.with_rotation(cam.rotation());
        assert!((back.azimuth - cam.azimuth).abs() < 1e-9);
        assert!((back.elevation - cam.elevation).abs() < 1e-9);
        assert!((back.roll - cam.roll).abs() < 1e-9);
    }

    #[test]
    fn camera_validation() {
        let bad = Camera {
            distance: 0.0,
            ..Camera::default()
        };
        assert!(bad.validate().is_err());
        let bad = Camera {
            fov: 180.0,
            ..Camera::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn vertex_at_camera_is_singular() {
        let mesh = Mesh::new(
            vec![[0.0, 0.0, 4.5], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let err = transform_project(&mesh, &Camera::default()).unwrap_err();
        assert!(matches!(err, Error::SingularProjection { vertex: 0, .. }));
    }
}
