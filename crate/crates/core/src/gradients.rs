//! Losses and analytic gradients of the soft rasterizer.
//!
//! The chain is loss → pixel → fold step → face occupancy → signed distance
//! → screen vertex → world vertex or camera parameter. Each pixel's fold is
//! walked in reverse with the T-conorm partials right after it is evaluated.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::distributions::pdf;
use crate::error::{Error, Result};
use crate::geometry::{
    transform_project, Camera, CameraParam, Frame, Mesh, ScreenMesh, Vec2, Vec3,
};
use crate::raster::{Contribution, Image, Prepared, RenderConfig};
use crate::tconorms::TConormFamily;

/// Image-space loss against a target silhouette.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Loss {
    /// `1 - Σ min(r, t) / Σ max(r, t)`.
    #[default]
    Iou,
    /// Mean squared pixel error.
    Mse,
}

impl Loss {
    pub fn name(self) -> &'static str {
        match self {
            Loss::Iou => "iou",
            Loss::Mse => "mse",
        }
    }

    pub fn value(self, render: &Image, target: &Image) -> f64 {
        let (r, t) = (&render.values, &target.values);
        match self {
            Loss::Iou => {
                let (mut i, mut u) = (0.0, 0.0);
                for (a, b) in r.iter().zip(t) {
                    i += a.min(*b);
                    u += a.max(*b);
                }
                if u > 0.0 {
                    1.0 - i / u
                } else {
                    0.0
                }
            }
            Loss::Mse => {
                let s: f64 = r.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum();
                s / r.len().max(1) as f64
            }
        }
    }

    /// `∂L/∂r` for every pixel. Ties in the soft IoU split the subgradient
    /// evenly between min and max.
    pub fn pixel_gradient(self, render: &Image, target: &Image) -> Vec<f64> {
        let (r, t) = (&render.values, &target.values);
        match self {
            Loss::Iou => {
                let (mut i, mut u) = (0.0, 0.0);
                for (a, b) in r.iter().zip(t) {
                    i += a.min(*b);
                    u += a.max(*b);
                }
                if u <= 0.0 {
                    return vec![0.0; r.len()];
                }
                r.iter()
                    .zip(t)
                    .map(|(a, b)| {
                        let (di, du) = if a < b {
                            (1.0, 0.0)
                        } else if a > b {
                            (0.0, 1.0)
                        } else {
                            (0.5, 0.5)
                        };
                        -(di * u - i * du) / (u * u)
                    })
                    .collect()
            }
            Loss::Mse => {
                let n = r.len().max(1) as f64;
                r.iter().zip(t).map(|(a, b)| 2.0 * (a - b) / n).collect()
            }
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "iou" | "soft-iou" => Ok(Loss::Iou),
            "mse" | "l2" => Ok(Loss::Mse),
            _ => Err(Error::parse("loss", s, "expected `iou` or `mse`")),
        }
    }
}

/// Loss, render, and per-vertex screen gradient `∂L/∂(x, y)`.
#[derive(Debug, Clone)]
pub struct ScreenGradient {
    pub loss: f64,
    pub render: Image,
    pub grads: Vec<Vec2>,
}

/// Loss, render, and per-vertex world gradient.
#[derive(Debug, Clone)]
pub struct VertexGradient {
    pub loss: f64,
    pub render: Image,
    pub grads: Vec<Vec3>,
}

/// Loss, render, and camera gradient. Angles are per degree, distance per
/// world unit.
#[derive(Debug, Clone)]
pub struct CameraGradient {
    pub loss: f64,
    pub render: Image,
    pub azimuth: f64,
    pub elevation: f64,
    pub roll: f64,
    pub distance: f64,
}

impl CameraGradient {
    pub fn get(&self, p: CameraParam) -> f64 {
        match p {
            CameraParam::Azimuth => self.azimuth,
            CameraParam::Elevation => self.elevation,
            CameraParam::Roll => self.roll,
            CameraParam::Distance => self.distance,
        }
    }
}

fn check_inputs(config: &RenderConfig, target: &Image) -> Result<()> {
    config.validate()?;
    if !config.distribution.is_differentiable() {
        return Err(Error::NonDifferentiable(format!(
            "distribution `{}` has no density",
            config.distribution
        )));
    }
    if target.width != config.width || target.height != config.height {
        return Err(Error::config(format!(
            "target is {}x{}, render is {}x{}",
            target.width, target.height, config.width, config.height
        )));
    }
    Ok(())
}

fn check_camera(camera: &Camera, config: &RenderConfig) -> Result<()> {
    camera.validate()?;
    if camera.width != config.width || camera.height != config.height {
        return Err(Error::config(format!(
            "camera is {}x{}, render config is {}x{}",
            camera.width, camera.height, config.width, config.height
        )));
    }
    Ok(())
}

/// Forward render and backward pass in one sweep over the pixels.
///
/// Both losses have pixel gradients of the form `α·aₚ + β·bₚ`, where
/// `aₚ, bₚ` depend only on pixel `p` and `α, β` on image-wide sums. Each
/// pixel's fold is therefore backpropagated once, right after it is
/// evaluated, into two buffers that are combined at the end.
pub(crate) fn render_and_backprop(
    prep: &Prepared,
    target: &Image,
    loss: Loss,
) -> (Image, f64, Vec<Vec2>) {
    let config = prep.config;
    let (w, h) = (config.width, config.height);
    let nv = prep.screen.vertices.len();
    let mut buf_a = vec![[0.0; 2]; nv];
    let mut buf_b = vec![[0.0; 2]; nv];
    let mut render = Image::zeros(w, h);
    let tc = &config.tconorm;
    let dist = &config.distribution;
    let (_, dxdd) = dist.scaled_argument(1.0, config.tau);
    let dxdd = dxdd * prep.scale;
    let average = tc.family() == TConormFamily::Average;
    let nfaces = prep.screen.faces.len() as f64;
    let npix = (w * h).max(1) as f64;
    let (mut inter, mut union) = (0.0, 0.0);
    let mut recs: Vec<Contribution> = Vec::new();
    let mut prev: Vec<f64> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            recs.clear();
            prep.for_each_contribution(x, y, |c| recs.push(c));
            let t = target.values[y * w + x];
            let r = if recs.is_empty() {
                0.0
            } else if average {
                (recs.iter().map(|c| c.prob).sum::<f64>() / nfaces).clamp(0.0, 1.0)
            } else {
                prev.clear();
                prev.push(f64::NAN);
                let mut acc = recs[0].prob;
                for c in &recs[1..] {
                    prev.push(acc);
                    acc = tc.apply(acc, c.prob);
                }
                acc
            };
            render.values[y * w + x] = r;
            inter += r.min(t);
            union += r.max(t);
            if recs.is_empty() {
                continue;
            }
            let (ca, cb) = match loss {
                Loss::Iou => {
                    if r < t {
                        (1.0, 0.0)
                    } else if r > t {
                        (0.0, 1.0)
                    } else {
                        (0.5, 0.5)
                    }
                }
                Loss::Mse => (2.0 * (r - t) / npix, 0.0),
            };
            if ca == 0.0 && cb == 0.0 {
                continue;
            }
            let p = [x as f64 + 0.5, y as f64 + 0.5];
            let mut push = |c: &Contribution, dr_dprob: f64| {
                let dr_dd = dr_dprob * pdf(dist, c.x) * dxdd;
                if dr_dd == 0.0 {
                    return;
                }
                let dd = prep.geoms[c.face].distance_gradient(p, &c.query);
                let f = prep.screen.faces[c.face];
                for k in 0..3 {
                    let gx = dr_dd * dd[k][0];
                    let gy = dr_dd * dd[k][1];
                    buf_a[f[k]][0] += ca * gx;
                    buf_a[f[k]][1] += ca * gy;
                    buf_b[f[k]][0] += cb * gx;
                    buf_b[f[k]][1] += cb * gy;
                }
            };
            if average {
                for c in &recs {
                    push(c, 1.0 / nfaces);
                }
                continue;
            }
            let mut g_acc = 1.0;
            for k in (0..recs.len()).rev() {
                let c = &recs[k];
                if k == 0 {
                    push(c, g_acc);
                } else {
                    let a = prev[k];
                    push(c, g_acc * tc.partial_b(a, c.prob));
                    g_acc *= tc.partial_a(a, c.prob);
                    if g_acc == 0.0 {
                        break;
                    }
                }
            }
        }
    }
    let (value, grads) = match loss {
        Loss::Iou => {
            if union > 0.0 {
                let u2 = union * union;
                let g = buf_a
                    .iter()
                    .zip(&buf_b)
                    .map(|(a, b)| {
                        [
                            -(a[0] * union - inter * b[0]) / u2,
                            -(a[1] * union - inter * b[1]) / u2,
                        ]
                    })
                    .collect();
                (1.0 - inter / union, g)
            } else {
                (0.0, vec![[0.0; 2]; nv])
            }
        }
        Loss::Mse => (loss.value(&render, target), buf_a),
    };
    (render, value, grads)
}

/// Loss and `∂L/∂(screen x, y)` for an already projected mesh.
pub fn grad_loss_wrt_screen(
    screen: &ScreenMesh,
    config: &RenderConfig,
    target: &Image,
    loss: Loss,
) -> Result<ScreenGradient> {
    check_inputs(config, target)?;
    let prep = Prepared::new(screen, config);
    let (render, value, grads) = render_and_backprop(&prep, target, loss);
    if let Some(i) = grads
        .iter()
        .position(|g| !g[0].is_finite() || !g[1].is_finite())
    {
        return Err(Error::NonFiniteGradient { index: i });
    }
    Ok(ScreenGradient {
        loss: value,
        render,
        grads,
    })
}

/// Loss and `∂L/∂(world vertex)`.
pub fn grad_loss_wrt_vertices(
    mesh: &Mesh,
    camera: &Camera,
    config: &RenderConfig,
    target: &Image,
    loss: Loss,
) -> Result<VertexGradient> {
    check_camera(camera, config)?;
    let screen = transform_project(mesh, camera)?;
    let sg = grad_loss_wrt_screen(&screen, config, target, loss)?;
    let frame = Frame::new(camera);
    let grads = mesh
        .vertices
        .iter()
        .zip(&sg.grads)
        .map(|(&v, g)| {
            let j = frame.jacobian_vertex(v);
            [
                g[0] * j[0][0] + g[1] * j[1][0],
                g[0] * j[0][1] + g[1] * j[1][1],
                g[0] * j[0][2] + g[1] * j[1][2],
            ]
        })
        .collect();
    Ok(VertexGradient {
        loss: sg.loss,
        render: sg.render,
        grads,
    })
}

/// Loss and gradient with respect to the camera pose.
pub fn grad_loss_wrt_camera(
    mesh: &Mesh,
    camera: &Camera,
    config: &RenderConfig,
    target: &Image,
    loss: Loss,
) -> Result<CameraGradient> {
    check_camera(camera, config)?;
    let screen = transform_project(mesh, camera)?;
    let sg = grad_loss_wrt_screen(&screen, config, target, loss)?;
    let frame = Frame::new(camera);
    let mut acc = [0.0; 4];
    for (&v, g) in mesh.vertices.iter().zip(&sg.grads) {
        if g[0] == 0.0 && g[1] == 0.0 {
            continue;
        }
        let j = frame.jacobian_camera(v);
        for k in 0..4 {
            acc[k] += g[0] * j[0][k] + g[1] * j[1][k];
        }
    }
    let deg = std::f64::consts::PI / 180.0;
    Ok(CameraGradient {
        loss: sg.loss,
        render: sg.render,
        azimuth: acc[0] * deg,
        elevation: acc[1] * deg,
        roll: acc[2] * deg,
        distance: acc[3],
    })
}

/// What a finite-difference check perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientTarget {
    /// Screen-space vertex coordinates, in pixels.
    Screen,
    /// World-space vertex coordinates.
    Vertices,
    /// Azimuth, elevation, roll (degrees) and distance.
    Camera,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdOptions {
    /// Central-difference step, in `[1e-6, 1e-2]`.
    pub h: f64,
    /// Parameters checked at most (randomly sampled beyond that), `≤ 64`.
    pub max_params: usize,
    pub seed: u64,
    /// Kink guard band, in multiples of the largest screen displacement a
    /// step causes.
    pub guard_factor: f64,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self {
            h: 1e-4,
            max_params: 64,
            seed: 0,
            guard_factor: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientEntry {
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

/// Outcome of a finite-difference check. Relative error per parameter is
/// `|a - n| / max(|a|, |n|, 1e-8)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientReport {
    pub max_rel_error: f64,
    /// Parameter index with the largest error.
    pub argmax: Option<usize>,
    pub h: f64,
    pub entries: Vec<GradientEntry>,
    /// Parameters skipped because a step crosses a non-smooth point.
    pub excluded: Vec<usize>,
}

impl GradientReport {
    pub fn checked(&self) -> usize {
        self.entries.len()
    }
}

/// Central-difference check of the analytic gradient.
///
/// The numeric derivative is the Richardson combination of the central
/// differences at `h` and `h / 2`, which cancels their `O(h²)` error.
///
/// Parameters are ordered vertex-major (`3 * vertex + axis`, or
/// `2 * vertex + axis` on screen); camera parameters are azimuth,
/// elevation, roll, distance. A parameter is excluded when the `±h` steps
/// change which branch of a piecewise function is active on any face it
/// moves, or when it sits within the guard band of such a switch.
pub fn finite_difference_check(
    mesh: &Mesh,
    camera: &Camera,
    config: &RenderConfig,
    target: &Image,
    loss: Loss,
    what: GradientTarget,
    opts: &FdOptions,
) -> Result<GradientReport> {
    check_camera(camera, config)?;
    match what {
        GradientTarget::Screen => {
            let screen = transform_project(mesh, camera)?;
            finite_difference_check_screen(&screen, config, target, loss, opts)
        }
        GradientTarget::Vertices => {
            let analytic: Vec<f64> = grad_loss_wrt_vertices(mesh, camera, config, target, loss)?
                .grads
                .iter()
                .flatten()
                .copied()
                .collect();
            let vf = mesh.vertex_faces();
            let nf = mesh.faces.len();
            fd_core(
                &analytic,
                config,
                target,
                loss,
                opts,
                |k, delta| {
                    let mut m = mesh.clone();
                    m.vertices[k / 3][k % 3] += delta;
                    transform_project(&m, camera)
                },
                |k| interest_from(&vf[k / 3], nf),
            )
        }
        GradientTarget::Camera => {
            let g = grad_loss_wrt_camera(mesh, camera, config, target, loss)?;
            let analytic: Vec<f64> = CameraParam::ALL.iter().map(|&p| g.get(p)).collect();
            let nf = mesh.faces.len();
            fd_core(
                &analytic,
                config,
                target,
                loss,
                opts,
                |k, delta| {
                    let p = CameraParam::ALL[k];
                    let mut c = *camera;
                    c.set(p, c.get(p) + delta);
                    transform_project(mesh, &c)
                },
                |_| vec![true; nf],
            )
        }
    }
}

/// Finite-difference check on screen-space vertex coordinates.
pub fn finite_difference_check_screen(
    screen: &ScreenMesh,
    config: &RenderConfig,
    target: &Image,
    loss: Loss,
    opts: &FdOptions,
) -> Result<GradientReport> {
    let analytic: Vec<f64> = grad_loss_wrt_screen(screen, config, target, loss)?
        .grads
        .iter()
        .flatten()
        .copied()
        .collect();
    let mut vf = vec![Vec::new(); screen.vertices.len()];
    for (fi, f) in screen.faces.iter().enumerate() {
        for &v in f {
            if !vf[v].contains(&fi) {
                vf[v].push(fi);
            }
        }
    }
    let nf = screen.faces.len();
    fd_core(
        &analytic,
        config,
        target,
        loss,
        opts,
        |k, delta| {
            let mut s = screen.clone();
            s.vertices[k / 2][k % 2] += delta;
            Ok(s)
        },
        |k| interest_from(&vf[k / 2], nf),
    )
}

fn interest_from(faces: &[usize], nf: usize) -> Vec<bool> {
    let mut v = vec![false; nf];
    for &f in faces {
        v[f] = true;
    }
    v
}

fn fd_core(
    analytic: &[f64],
    config: &RenderConfig,
    target: &Image,
    loss: Loss,
    opts: &FdOptions,
    perturbed: impl Fn(usize, f64) -> Result<ScreenMesh>,
    interest: impl Fn(usize) -> Vec<bool>,
) -> Result<GradientReport> {
    if !(1e-6..=1e-2).contains(&opts.h) {
        return Err(Error::config(format!(
            "h must be in [1e-6, 1e-2], got {}",
            opts.h
        )));
    }
    if opts.max_params == 0 || opts.max_params > 64 {
        return Err(Error::config("max_params must be in 1..=64"));
    }
    let n = analytic.len();
    let mut indices: Vec<usize> = if n <= opts.max_params {
        (0..n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        sample(&mut rng, n, opts.max_params).into_vec()
    };
    indices.sort_unstable();

    let base = perturbed(0, 0.0)?;
    let h = opts.h;
    let mut entries = Vec::new();
    let mut excluded = Vec::new();
    for &k in &indices {
        let plus = perturbed(k, h)?;
        let minus = perturbed(k, -h)?;
        let focus = interest(k);
        let disp = max_displacement(&base, &plus).max(max_displacement(&base, &minus));
        let (_, dxdd) = config.distribution.scaled_argument(1.0, config.tau);
        let guard = opts.guard_factor * disp * config.distance_scale() * dxdd;
        let (s0, near) = regime_signature(&base, config, &focus, guard);
        let (sp, _) = regime_signature(&plus, config, &focus, 0.0);
        let (sm, _) = regime_signature(&minus, config, &focus, 0.0);
        if near || sp != s0 || sm != s0 {
            excluded.push(k);
            continue;
        }
        let eval = |s: &ScreenMesh| loss.value(&Prepared::new(s, config).render(), target);
        let d_full = (eval(&plus) - eval(&minus)) / (2.0 * h);
        let d_half = (eval(&perturbed(k, 0.5 * h)?) - eval(&perturbed(k, -0.5 * h)?)) / h;
        let numeric = (4.0 * d_half - d_full) / 3.0;
        let a = analytic[k];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
        entries.push(GradientEntry {
            index: k,
            analytic: a,
            numeric,
            rel_error: rel,
        });
    }
    let worst = entries
        .iter()
        .max_by(|a, b| a.rel_error.total_cmp(&b.rel_error));
    Ok(GradientReport {
        max_rel_error: worst.map_or(0.0, |e| e.rel_error),
        argmax: worst.map(|e| e.index),
        h,
        entries,
        excluded,
    })
}

fn max_displacement(a: &ScreenMesh, b: &ScreenMesh) -> f64 {
    a.vertices
        .iter()
        .zip(&b.vertices)
        .map(|(p, q)| (p[0] - q[0]).abs().max((p[1] - q[1]).abs()))
        .fold(0.0, f64::max)
}

/// Fingerprint of every piecewise branch that faces in `focus` take, plus
/// whether any of them lies within `guard` (CDF-argument units) of a kink.
pub(crate) fn regime_signature(
    screen: &ScreenMesh,
    config: &RenderConfig,
    focus: &[bool],
    guard: f64,
) -> (u64, bool) {
    let prep = Prepared::new(screen, config);
    let tc = &config.tconorm;
    let mut hasher = DefaultHasher::new();
    let mut near = false;
    let mut recs: Vec<Contribution> = Vec::new();
    for y in 0..config.height {
        for x in 0..config.width {
            recs.clear();
            prep.for_each_contribution(x, y, |c| recs.push(c));
            if !recs.iter().any(|c| focus[c.face]) {
                continue;
            }
            (x, y).hash(&mut hasher);
            let mut acc = f64::NAN;
            for (i, c) in recs.iter().enumerate() {
                let tcode = if i == 0 { 0 } else { tc.regime(acc, c.prob) };
                acc = if i == 0 {
                    c.prob
                } else {
                    tc.apply(acc, c.prob)
                };
                tcode.hash(&mut hasher);
                if focus[c.face] {
                    let code = config.distribution.regime(c.x, guard);
                    if code == 255 {
                        near = true;
                    }
                    // outside a triangle the distance is C1 whichever edge
                    // wins; inside, a change of nearest edge is a ridge
                    let feature = if c.query.inside { c.query.edge } else { 3 };
                    (c.face, feature, code).hash(&mut hasher);
                }
            }
        }
    }
    (hasher.finish(), near)
}
