use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::records::{fingerprint, RunRecord};
use crate::error::{Error, Result};
use crate::geometry::{dot3, transform_project, Camera, Mesh, Vec3};
use crate::gradients::{grad_loss_wrt_camera, Loss};
use crate::meshes;
use crate::optimizer::{AdamState, Schedule};
use crate::raster::{hard_render, RenderConfig};

/// Camera pose recovery from a single silhouette.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseTaskConfig {
    /// Built-in mesh name or OBJ path, normalized to the unit bounding
    /// sphere.
    pub target_mesh: String,
    pub n_trials: usize,
    /// Initial orientation error in degrees, drawn uniformly from this range.
    pub init_angle_range: (f64, f64),
    pub steps: usize,
    /// Adam step sizes; the parameters are angles in degrees.
    pub lr_grid: Vec<f64>,
    pub sigma_start: f64,
    pub sigma_end: f64,
    /// Success iff the final geodesic orientation error is at most this
    /// many degrees.
    pub success_threshold: f64,
    /// Ground-truth camera distance, in bounding radii.
    pub distance_range: (f64, f64),
    pub fov_range: (f64, f64),
    /// Ground-truth elevation range in degrees; azimuth is uniform.
    pub elevation_range: (f64, f64),
    pub resolution: usize,
    pub loss: Loss,
    pub seed: u64,
    pub record_wall_time: bool,
}

impl Default for PoseTaskConfig {
    fn default() -> Self {
        Self {
            target_mesh: "teapot".into(),
            n_trials: 600,
            init_angle_range: (15.0, 75.0),
            steps: 1000,
            lr_grid: vec![0.1, 0.3],
            sigma_start: 1e-1,
            sigma_end: 1e-7,
            success_threshold: 3.0,
            distance_range: (2.0, 3.5),
            fov_range: (25.0, 35.0),
            elevation_range: (-30.0, 30.0),
            resolution: 64,
            loss: Loss::Iou,
            seed: 0,
            record_wall_time: false,
        }
    }
}

impl PoseTaskConfig {
    /// 20 trials, otherwise the full protocol.
    pub fn desk() -> Self {
        Self {
            n_trials: 20,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.init_angle_range;
        if !(0.0 <= lo && lo <= hi && hi <= 180.0) {
            return Err(Error::config(format!(
                "initial angle range must satisfy 0 <= lo <= hi <= 180, got [{lo}, {hi}]"
            )));
        }
        if self.n_trials == 0 || self.steps == 0 {
            return Err(Error::config("need at least one trial and one step"));
        }
        if !(self.success_threshold > 0.0) {
            return Err(Error::config("success threshold must be > 0"));
        }
        if self.lr_grid.is_empty() || self.lr_grid.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::config("learning rates must be > 0"));
        }
        if !(self.distance_range.0 > 0.0 && self.distance_range.0 <= self.distance_range.1) {
            return Err(Error::config("invalid distance range"));
        }
        if !(self.fov_range.0 > 0.0 && self.fov_range.0 <= self.fov_range.1 && self.fov_range.1 < 180.0)
        {
            return Err(Error::config("invalid fov range"));
        }
        self.schedule().validate()
    }

    pub fn schedule(&self) -> Schedule {
        Schedule::log(self.sigma_start, self.sigma_end, self.steps as u64)
    }
}

/// Ground truth and initialization of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseTrial {
    pub ground_truth: Camera,
    pub init: Camera,
    /// Rotation angle (degrees) and unit axis of the perturbation.
    pub angle: f64,
    pub axis: Vec3,
}

/// Draws trial `index` from its own ChaCha8 stream (`seed`, stream
/// `index`). The draw order is fixed: angle fraction, axis (2), azimuth,
/// elevation, distance, fov. The same seed therefore gives the same axis
/// and ground truth for any angle range.
pub fn sample_trial(cfg: &PoseTaskConfig, index: usize) -> PoseTrial {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let u: f64 = rng.gen();
    let (lo, hi) = cfg.init_angle_range;
    let angle = lo + u * (hi - lo);
    let z: f64 = 2.0 * rng.gen::<f64>() - 1.0;
    let phi: f64 = std::f64::consts::TAU * rng.gen::<f64>();
    let s = (1.0 - z * z).max(0.0).sqrt();
    let axis = [s * phi.cos(), s * phi.sin(), z];
    let lerp = |r: (f64, f64), t: f64| r.0 + t * (r.1 - r.0);
    let ground_truth = Camera {
        azimuth: 360.0 * rng.gen::<f64>(),
        elevation: lerp(cfg.elevation_range, rng.gen()),
        roll: 0.0,
        distance: lerp(cfg.distance_range, rng.gen()),
        fov: lerp(cfg.fov_range, rng.gen()),
        width: cfg.resolution,
        height: cfg.resolution,
    };
    let q = axis_angle(axis, angle.to_radians());
    let rot = ground_truth.rotation().map(|row| mat_vec(&q, row));
    let init = ground_truth.with_rotation(rot);
    PoseTrial {
        ground_truth,
        init,
        angle,
        axis,
    }
}

/// Angle in degrees of the rotation taking orientation `a` to `b`.
pub fn geodesic_degrees(a: &[Vec3; 3], b: &[Vec3; 3]) -> f64 {
    let tr: f64 = (0..3).map(|i| dot3(a[i], b[i])).sum();
    ((tr - 1.0) / 2.0).clamp(-1.0, 1.0).acos().to_degrees()
}

fn axis_angle(k: Vec3, theta: f64) -> [Vec3; 3] {
    let (s, c) = theta.sin_cos();
    let t = 1.0 - c;
    [
        [c + t * k[0] * k[0], t * k[0] * k[1] - s * k[2], t * k[0] * k[2] + s * k[1]],
        [t * k[0] * k[1] + s * k[2], c + t * k[1] * k[1], t * k[1] * k[2] - s * k[0]],
        [t * k[0] * k[2] - s * k[1], t * k[1] * k[2] + s * k[0], c + t * k[2] * k[2]],
    ]
}

fn mat_vec(m: &[Vec3; 3], v: Vec3) -> Vec3 {
    [dot3(m[0], v), dot3(m[1], v), dot3(m[2], v)]
}

/// A finished pose run: one entry per trial.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseOutcome {
    pub record: RunRecord,
    /// Final orientation error per trial in degrees, `NaN` if it diverged.
    pub errors: Vec<f64>,
    pub successes: Vec<bool>,
}

impl PoseOutcome {
    pub fn success_fraction(&self) -> f64 {
        self.successes.iter().filter(|s| **s).count() as f64 / self.successes.len().max(1) as f64
    }
}

/// Runs every trial with step size `lr`, annealing the renderer's
/// temperature along the configured σ schedule (the renderer's own `tau`
/// is ignored). Azimuth, elevation and roll are optimized; distance and
/// field of view stay at their ground-truth values.
pub fn run_pose_optimization(
    cfg: &PoseTaskConfig,
    renderer: &RenderConfig,
    lr: f64,
) -> Result<PoseOutcome> {
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
    let mesh = meshes::resolve(&cfg.target_mesh)?.normalized();
    let start = Instant::now();
    let mut errors = Vec::with_capacity(cfg.n_trials);
    for i in 0..cfg.n_trials {
        let trial = sample_trial(cfg, i);
        let err = match run_trial(&mesh, &trial, &config, cfg, lr) {
            Ok(cam) => geodesic_degrees(&cam.rotation(), &trial.ground_truth.rotation()),
            Err(Error::Config(msg)) => return Err(Error::Config(msg)),
            Err(_) => f64::NAN,
        };
        errors.push(err);
    }
    let successes: Vec<bool> = errors.iter().map(|e| *e <= cfg.success_threshold).collect();
    let metric = successes.iter().filter(|s| **s).count() as f64 / cfg.n_trials as f64;
    let record = RunRecord {
        distribution: config.distribution.to_string(),
        tconorm: config.tconorm.to_string(),
        tau: format!("log({:e}->{:e})", cfg.sigma_start, cfg.sigma_end),
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
            ("task", "pose".into()),
            ("target", cfg.target_mesh.clone()),
            ("trials", cfg.n_trials.to_string()),
            (
                "angle",
                format!("{}..{}", cfg.init_angle_range.0, cfg.init_angle_range.1),
            ),
            (
                "dist",
                format!("{}..{}", cfg.distance_range.0, cfg.distance_range.1),
            ),
            ("fov", format!("{}..{}", cfg.fov_range.0, cfg.fov_range.1)),
            ("res", cfg.resolution.to_string()),
            ("params", "az/el/roll-deg".into()),
        ]),
    };
    Ok(PoseOutcome {
        record,
        errors,
        successes,
    })
}

fn run_trial(
    mesh: &Mesh,
    trial: &PoseTrial,
    config: &RenderConfig,
    cfg: &PoseTaskConfig,
    lr: f64,
) -> Result<Camera> {
    let gt = trial.ground_truth;
    let target = hard_render(&transform_project(mesh, &gt)?, gt.width, gt.height);
    let mut cam = trial.init;
    let mut adam = AdamState::new(vec![cam.azimuth, cam.elevation, cam.roll], lr);
    let schedule = cfg.schedule();
    for step in 0..cfg.steps {
        let tau = schedule.value(step as u64)?;
        let rc = RenderConfig { tau, ..*config };
        let g = grad_loss_wrt_camera(mesh, &cam, &rc, &target, cfg.loss)?;
        if !g.loss.is_finite() {
            return Err(Error::NonDifferentiable("loss is not finite".into()));
        }
        adam.step(&[g.azimuth, g.elevation, g.roll])?;
        cam.azimuth = adam.params[0];
        cam.elevation = adam.params[1];
        cam.roll = adam.params[2];
    }
    Ok(cam)
}
