use std::time::Instant;

use super::records::{fingerprint, RunRecord};
use crate::error::{Error, Result};
use crate::geometry::{icosphere, transform_project, Camera, Mesh, Vec3};
use crate::gradients::{grad_loss_wrt_vertices, Loss};
use crate::meshes;
use crate::optimizer::AdamState;
use crate::raster::{hard_render, Image, RenderConfig};

/// Multi-view silhouette fitting of an icosphere to a target mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeTaskConfig {
    /// Built-in mesh name or OBJ path; normalized to the unit bounding
    /// sphere before use.
    pub target_mesh: String,
    pub n_azimuths: usize,
    /// One independent run per elevation (degrees); the metric averages
    /// their final losses.
    pub elevations: Vec<f64>,
    pub steps: usize,
    pub lr_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
    pub loss: Loss,
    /// Recorded for provenance; the task itself has no randomness.
    pub seed: u64,
    pub resolution: usize,
    pub subdivisions: u32,
    pub camera_distance: f64,
    pub fov: f64,
    /// Weight of the uniform Laplacian smoothness term, 0 disables it.
    pub laplacian_weight: f64,
    pub record_wall_time: bool,
}

impl Default for ShapeTaskConfig {
    /// Full-scale grids: 24 azimuths, 5 elevations, 3 learning rates and
    /// 81 temperatures.
    fn default() -> Self {
        Self {
            target_mesh: "airplane".into(),
            n_azimuths: 24,
            elevations: vec![-60.0, -30.0, 0.0, 30.0, 60.0],
            steps: 100,
            lr_grid: [-1.25, -1.5, -1.75].iter().map(|e| 10f64.powf(*e)).collect(),
            tau_grid: (0..=80).map(|n| 10f64.powf(-0.1 * n as f64)).collect(),
            loss: Loss::Iou,
            seed: 0,
            resolution: 64,
            subdivisions: 2,
            camera_distance: 4.5,
            fov: 30.0,
            laplacian_weight: 0.0,
            record_wall_time: false,
        }
    }
}

impl ShapeTaskConfig {
    /// Single-core scale: 6 azimuths at two elevations, one learning rate,
    /// three temperatures.
    pub fn desk() -> Self {
        Self {
            target_mesh: "cube".into(),
            n_azimuths: 6,
            elevations: vec![-30.0, 30.0],
            lr_grid: vec![10f64.powf(-1.5)],
            tau_grid: vec![10f64.powf(-2.0), 10f64.powf(-2.5), 10f64.powf(-3.0)],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::config("steps must be >= 1"));
        }
        if self.n_azimuths == 0 || self.elevations.is_empty() {
            return Err(Error::config("need at least one view"));
        }
        if self.lr_grid.is_empty() || self.tau_grid.is_empty() {
            return Err(Error::config("learning-rate and tau grids must be non-empty"));
        }
        if self.lr_grid.iter().chain(&self.tau_grid).any(|v| !(*v > 0.0)) {
            return Err(Error::config("grid values must be > 0"));
        }
        if !(self.laplacian_weight >= 0.0) {
            return Err(Error::config("laplacian weight must be >= 0"));
        }
        Ok(())
    }

    fn cameras(&self, elevation: f64) -> Vec<Camera> {
        (0..self.n_azimuths)
            .map(|k| Camera {
                azimuth: 360.0 * k as f64 / self.n_azimuths as f64,
                elevation,
                roll: 0.0,
                distance: self.camera_distance,
                fov: self.fov,
                width: self.resolution,
                height: self.resolution,
            })
            .collect()
    }
}

/// A finished shape run.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeOutcome {
    pub record: RunRecord,
    /// Loss before the first step, averaged over elevations.
    pub initial_metric: f64,
    /// Loss before each step and after the last one, averaged over
    /// elevations (`steps + 1` entries).
    pub trace: Vec<f64>,
}

impl ShapeOutcome {
    pub fn failed(&self) -> bool {
        self.record.failed()
    }
}

/// Fits an icosphere to the target's silhouettes with Adam on the raw
/// vertex coordinates. The renderer's resolution is replaced by the task's.
///
/// A run that diverges (non-finite loss or gradient, vertices behind the
/// camera) is returned with metric `NaN` rather than as an error.
pub fn run_shape_optimization(
    cfg: &ShapeTaskConfig,
    renderer: &RenderConfig,
    lr: f64,
) -> Result<ShapeOutcome> {
    cfg.validate()?;
    let config = RenderConfig {
        width: cfg.resolution,
        height: cfg.resolution,
        ..*renderer
    };
    config.validate()?;
    if !config.distribution.is_differentiable() {
        return Err(Error::NonDifferentiable(format!(
            "distribution `{}` has no density",
            config.distribution
        )));
    }
    if !(lr > 0.0) {
        return Err(Error::config("learning rate must be > 0"));
    }
    let target = meshes::resolve(&cfg.target_mesh)?.normalized();
    let init = icosphere(cfg.subdivisions)?;
    let start = Instant::now();

    let mut traces = Vec::new();
    let mut diverged = false;
    for &el in &cfg.elevations {
        let cams = cfg.cameras(el);
        let targets = cams
            .iter()
            .map(|c| Ok(hard_render(&transform_project(&target, c)?, c.width, c.height)))
            .collect::<Result<Vec<_>>>()?;
        match fit_one_elevation(&init, &cams, &targets, &config, cfg, lr) {
            Ok(trace) => traces.push(trace),
            Err(Error::Config(msg)) => return Err(Error::Config(msg)),
            Err(_) => {
                diverged = true;
                break;
            }
        }
    }
    let n = cfg.elevations.len() as f64;
    let trace: Vec<f64> = if diverged {
        Vec::new()
    } else {
        (0..=cfg.steps)
            .map(|k| traces.iter().map(|t| t[k]).sum::<f64>() / n)
            .collect()
    };
    let metric = trace.last().copied().unwrap_or(f64::NAN);
    let initial_metric = trace.first().copied().unwrap_or(f64::NAN);
    let record = RunRecord {
        distribution: config.distribution.to_string(),
        tconorm: config.tconorm.to_string(),
        tau: format!("{}", config.tau),
        lr,
        loss: cfg.loss.to_string(),
        seed: cfg.seed,
        metric,
        steps: cfg.steps as u64,
        wall_ms: if cfg.record_wall_time {
            start.elapsed().as_millis() as u64
        } else {
            0
        },
        fingerprint: fingerprint(&[
            ("task", "shape".into()),
            ("target", cfg.target_mesh.clone()),
            ("views", format!("{}x{}", cfg.n_azimuths, cfg.elevations.len())),
            ("res", cfg.resolution.to_string()),
            ("init", format!("icosphere{}", cfg.subdivisions)),
            ("laplacian", cfg.laplacian_weight.to_string()),
        ]),
    };
    Ok(ShapeOutcome {
        record,
        initial_metric,
        trace,
    })
}

fn fit_one_elevation(
    init: &Mesh,
    cams: &[Camera],
    targets: &[Image],
    config: &RenderConfig,
    cfg: &ShapeTaskConfig,
    lr: f64,
) -> Result<Vec<f64>> {
    let mut mesh = init.clone();
    let flat: Vec<f64> = mesh.vertices.iter().flatten().copied().collect();
    let mut adam = AdamState::new(flat, lr);
    let neighbors = vertex_neighbors(&mesh);
    let mut trace = Vec::with_capacity(cfg.steps + 1);
    let nv = cams.len() as f64;
    for step in 0..=cfg.steps {
        let mut loss = 0.0;
        let mut grad = vec![0.0; adam.params.len()];
        for (cam, target) in cams.iter().zip(targets) {
            let g = grad_loss_wrt_vertices(&mesh, cam, config, target, cfg.loss)?;
            loss += g.loss / nv;
            for (acc, v) in grad.chunks_exact_mut(3).zip(&g.grads) {
                for k in 0..3 {
                    acc[k] += v[k] / nv;
                }
            }
        }
        if cfg.laplacian_weight > 0.0 {
            loss += laplacian(&mesh.vertices, &neighbors, cfg.laplacian_weight, &mut grad);
        }
        if !loss.is_finite() {
            return Err(Error::NonDifferentiable("loss is not finite".into()));
        }
        trace.push(loss);
        if step == cfg.steps {
            break;
        }
        adam.step(&grad)?;
        for (v, p) in mesh.vertices.iter_mut().zip(adam.params.chunks_exact(3)) {
            *v = [p[0], p[1], p[2]];
        }
    }
    Ok(trace)
}

fn vertex_neighbors(mesh: &Mesh) -> Vec<Vec<usize>> {
    let mut nb = vec![Vec::new(); mesh.vertices.len()];
    for f in &mesh.faces {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            if !nb[a].contains(&b) {
                nb[a].push(b);
            }
            if !nb[b].contains(&a) {
                nb[b].push(a);
            }
        }
    }
    for n in &mut nb {
        n.sort_unstable();
    }
    nb
}

/// `w / V · Σᵢ |vᵢ - mean(N(i))|²`; adds its gradient to `grad`.
fn laplacian(verts: &[Vec3], nb: &[Vec<usize>], w: f64, grad: &mut [f64]) -> f64 {
    let scale = w / verts.len() as f64;
    let mut value = 0.0;
    for (i, n) in nb.iter().enumerate() {
        if n.is_empty() {
            continue;
        }
        let inv = 1.0 / n.len() as f64;
        let mut r = verts[i];
        for &j in n {
            for k in 0..3 {
                r[k] -= inv * verts[j][k];
            }
        }
        value += scale * (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
        for k in 0..3 {
            grad[3 * i + k] += 2.0 * scale * r[k];
            for &j in n {
                grad[3 * j + k] -= 2.0 * scale * r[k] * inv;
            }
        }
    }
    value
}
