use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use diffsil::experiments::{
    benchmark_distributions, benchmark_tconorms, enumerate_renderers, fingerprint, grid_search, heatmap_csv, records_to_string,
    run_pose_optimization, run_shape_optimization, top_decile_histogram, GridSpec, GridTask,
    PoseTaskConfig, RunRecord, ShapeTaskConfig,
};
use diffsil::meshes;
use diffsil::{
    finite_difference_check, hard_render, render_silhouette, transform_project, Camera,
    DistributionSpec, Error, Family, FdOptions, GradientTarget, Loss, RenderConfig, TConormFamily,
    TConormSpec,
};

mod selftest;

#[derive(Parser)]
#[command(name = "diffsil", version, about = "Differentiable silhouette rasterizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a soft silhouette to <out>/render.png.
    Render(RenderArgs),
    /// Fit an icosphere to a target's multi-view silhouettes.
    ShapeOpt(ShapeArgs),
    /// Recover camera orientation from one silhouette.
    PoseOpt(PoseArgs),
    /// Sweep distributions x t-conorms x lr x tau on one task.
    GridSearch(GridArgs),
    /// List every benchmark renderer and print the count.
    Enumerate(EnumerateArgs),
    /// Compare analytic gradients with finite differences.
    CheckGrads(CheckArgs),
    /// Run the built-in axiom, CDF and gradient checks.
    Selftest,
}

#[derive(Args)]
struct Renderer {
    /// Distribution spec, e.g. `logistic`, `gamma(p=0.5,rev)`.
    #[arg(long = "dist", default_value = "logistic")]
    dist: String,
    /// T-conorm spec, e.g. `probabilistic`, `yager(p=2)`.
    #[arg(long, default_value = "probabilistic")]
    tconorm: String,
}

impl Renderer {
    fn parse(&self) -> diffsil::Result<(DistributionSpec, TConormSpec)> {
        Ok((self.dist.parse()?, self.tconorm.parse()?))
    }
}

#[derive(Args)]
struct View {
    /// Degrees.
    #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
    azimuth: f64,
    /// Degrees.
    #[arg(long, default_value_t = 20.0, allow_negative_numbers = true)]
    elevation: f64,
    #[arg(long, default_value_t = 3.0)]
    distance: f64,
    /// Vertical field of view in degrees.
    #[arg(long, default_value_t = 30.0)]
    fov: f64,
}

impl View {
    fn camera(&self, size: usize) -> Camera {
        Camera {
            azimuth: self.azimuth,
            elevation: self.elevation,
            roll: 0.0,
            distance: self.distance,
            fov: self.fov,
            width: size,
            height: size,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Single-core scale.
    Desk,
    /// Full protocol grids.
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskName {
    Shape,
    Pose,
}

#[derive(Clone, Copy, ValueEnum)]
enum Wrt {
    Vertices,
    Camera,
}

#[derive(Args)]
struct RenderArgs {
    /// Built-in mesh (cube, teapot, airplane, sphere) or OBJ path.
    #[arg(long, default_value = "teapot")]
    mesh: String,
    #[command(flatten)]
    renderer: Renderer,
    /// Temperature in normalized image units.
    #[arg(long, default_value_t = 0.01)]
    tau: f64,
    #[arg(long, default_value_t = 64)]
    size: usize,
    #[command(flatten)]
    view: View,
    /// Also run a finite-difference check of the vertex gradients.
    #[arg(long)]
    check_grads: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ShapeArgs {
    /// Target mesh.
    #[arg(long)]
    mesh: Option<String>,
    #[command(flatten)]
    renderer: Renderer,
    /// Single temperature instead of the preset grid.
    #[arg(long)]
    tau: Option<f64>,
    /// Single learning rate instead of the preset grid.
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long, value_enum, default_value_t = Preset::Desk)]
    preset: Preset,
    #[arg(long, default_value = "iou")]
    loss: String,
    #[arg(long, default_value_t = 0.0)]
    laplacian: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Record wall-clock time (makes output non-reproducible).
    #[arg(long)]
    wall_time: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct PoseArgs {
    #[arg(long)]
    mesh: Option<String>,
    #[command(flatten)]
    renderer: Renderer,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    size: Option<usize>,
    /// Initial orientation error range in degrees, `lo:hi`.
    #[arg(long)]
    angles: Option<String>,
    #[arg(long, value_enum, default_value_t = Preset::Desk)]
    preset: Preset,
    #[arg(long, default_value = "iou")]
    loss: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    wall_time: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, value_enum, default_value_t = TaskName::Shape)]
    task: TaskName,
    #[arg(long, value_enum, default_value_t = Preset::Desk)]
    preset: Preset,
    /// Distribution spec; repeat for more. Default: logistic and levy.
    #[arg(long = "dist")]
    dists: Vec<String>,
    /// T-conorm spec; repeat for more. Default: probabilistic and einstein.
    #[arg(long = "tconorm")]
    tconorms: Vec<String>,
    /// Run every benchmark renderer.
    #[arg(long)]
    all: bool,
    /// Temperature; repeat for more. Shape task only.
    #[arg(long = "tau")]
    taus: Vec<f64>,
    /// Learning rate; repeat for more.
    #[arg(long = "lr")]
    lrs: Vec<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long)]
    mesh: Option<String>,
    #[arg(long, default_value = "iou")]
    loss: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads. Default: available parallelism.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    wall_time: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct EnumerateArgs {
    /// Also write the list to <out>/renderers.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value = "sphere")]
    mesh: String,
    #[command(flatten)]
    renderer: Renderer,
    #[arg(long, default_value_t = 0.01)]
    tau: f64,
    #[arg(long, default_value_t = 32)]
    size: usize,
    #[command(flatten)]
    view: View,
    #[arg(long, value_enum, default_value_t = Wrt::Vertices)]
    wrt: Wrt,
    #[arg(long, default_value = "iou")]
    loss: String,
    #[arg(long, default_value_t = 1e-4)]
    h: f64,
    #[arg(long, default_value_t = 64)]
    max_params: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn grammar_help() -> String {
    let fams: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
    let tcs: Vec<&str> = TConormFamily::ALL.iter().map(|f| f.name()).collect();
    format!(
        "Distribution grammar:  NAME[(OPTION,...)]\n  \
         NAME    {}\n  \
         OPTION  rev | sq | shift=<real> | p=<real> (gamma only, p > 0)\n  \
         e.g.    logistic, gaussian(sq), gamma(p=0.5,rev), levy(rev,shift=1)\n\n\
         T-conorm grammar:  NAME[(p=<real>)]\n  \
         NAME    {}\n  \
         p       hamacher, frank (p != 1), yager, aczel-alsina, dombi: p > 0;\n          \
         schweizer-sklar: p < 0; others take none\n  \
         e.g.    probabilistic, einstein, yager(p=2), schweizer-sklar(p=-2)\n\n\
         Exit codes: 0 success, 1 configuration error, 2 runtime error.",
        fams.join(", "),
        tcs.join(", ")
    )
}

fn main() -> ExitCode {
    let grammar = grammar_help();
    let cmd = Cli::command()
        .after_long_help(grammar.clone())
        .mut_subcommands(|s| s.after_long_help(grammar.clone()));
    let cli = match cmd
        .try_get_matches()
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}

fn run(cmd: Command) -> diffsil::Result<ExitCode> {
    let result = match cmd {
        Command::Render(a) => render(a),
        Command::ShapeOpt(a) => shape_opt(a),
        Command::PoseOpt(a) => pose_opt(a),
        Command::GridSearch(a) => grid(a),
        Command::Enumerate(a) => enumerate(a),
        Command::CheckGrads(a) => check_grads(a),
        Command::Selftest => return Ok(selftest::run()),
    };
    match result {
        Ok(()) => Ok(ExitCode::SUCCESS),
        Err(RunError::Lib(e)) => Err(e),
        Err(RunError::Failed) => Ok(ExitCode::from(2)),
    }
}

enum RunError {
    Lib(Error),
    /// Already reported on stderr.
    Failed,
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Lib(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Lib(e.into())
    }
}

type Out = Result<(), RunError>;

fn config_err(msg: impl Into<String>) -> RunError {
    RunError::Lib(Error::Config(msg.into()))
}

fn prepare_out(dir: &Path) -> Out {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn write_records(dir: &Path, records: &[RunRecord]) -> Out {
    fs::write(dir.join("records.csv"), records_to_string(records)?)?;
    Ok(())
}

fn render(a: RenderArgs) -> Out {
    let (dist, tc) = a.renderer.parse()?;
    let config = RenderConfig::new(dist, tc, a.tau, a.size);
    config.validate()?;
    if a.check_grads && !dist.is_differentiable() {
        return Err(Error::NonDifferentiable(dist.to_string()).into());
    }
    let mesh = meshes::resolve(&a.mesh)?.normalized();
    let camera = a.view.camera(a.size);
    let screen = transform_project(&mesh, &camera)?;
    let image = render_silhouette(&screen, &config)?;
    prepare_out(&a.out)?;
    let path = a.out.join("render.png");
    image.write_png(&path)?;
    println!(
        "fingerprint: {}",
        fingerprint(&[
            ("task", "render".into()),
            ("mesh", a.mesh.clone()),
            ("dist", dist.to_string()),
            ("tconorm", tc.to_string()),
            ("tau", a.tau.to_string()),
            ("res", a.size.to_string()),
        ])
    );
    println!("wrote {}", path.display());
    if a.check_grads {
        let target_cam = Camera {
            azimuth: camera.azimuth + 10.0,
            ..camera
        };
        let target = hard_render(&transform_project(&mesh, &target_cam)?, a.size, a.size);
        let report = finite_difference_check(
            &mesh,
            &camera,
            &config,
            &target,
            Loss::Iou,
            GradientTarget::Vertices,
            &FdOptions::default(),
        )?;
        println!(
            "gradient check: max_rel_error {:.3e} over {} parameters ({} excluded near kinks)",
            report.max_rel_error,
            report.entries.len(),
            report.excluded.len()
        );
    }
    Ok(())
}

fn shape_config(
    preset: Preset,
    mesh: Option<String>,
    steps: Option<usize>,
    size: Option<usize>,
    loss: &str,
    seed: u64,
    wall_time: bool,
) -> diffsil::Result<ShapeTaskConfig> {
    let mut cfg = match preset {
        Preset::Desk => ShapeTaskConfig::desk(),
        Preset::Full => ShapeTaskConfig::default(),
    };
    if let Some(m) = mesh {
        cfg.target_mesh = m;
    }
    if let Some(s) = steps {
        cfg.steps = s;
    }
    if let Some(s) = size {
        cfg.resolution = s;
    }
    cfg.loss = loss.parse()?;
    cfg.seed = seed;
    cfg.record_wall_time = wall_time;
    Ok(cfg)
}

#[allow(clippy::too_many_arguments)]
fn pose_config(
    preset: Preset,
    mesh: Option<String>,
    steps: Option<usize>,
    trials: Option<usize>,
    size: Option<usize>,
    loss: &str,
    seed: u64,
    wall_time: bool,
) -> diffsil::Result<PoseTaskConfig> {
    let mut cfg = match preset {
        Preset::Desk => PoseTaskConfig::desk(),
        Preset::Full => PoseTaskConfig::default(),
    };
    if let Some(m) = mesh {
        cfg.target_mesh = m;
    }
    if let Some(s) = steps {
        cfg.steps = s;
    }
    if let Some(t) = trials {
        cfg.n_trials = t;
    }
    if let Some(s) = size {
        cfg.resolution = s;
    }
    cfg.loss = loss.parse()?;
    cfg.seed = seed;
    cfg.record_wall_time = wall_time;
    Ok(cfg)
}

fn shape_opt(a: ShapeArgs) -> Out {
    let (dist, tc) = a.renderer.parse()?;
    let mut cfg = shape_config(a.preset, a.mesh, a.steps, a.size, &a.loss, a.seed, a.wall_time)?;
    cfg.laplacian_weight = a.laplacian;
    if let Some(t) = a.tau {
        cfg.tau_grid = vec![t];
    }
    if let Some(lr) = a.lr {
        cfg.lr_grid = vec![lr];
    }
    cfg.validate()?;
    prepare_out(&a.out)?;
    println!("seed: {}", cfg.seed);
    let mut records = Vec::new();
    let mut traces = String::from("tau,lr,step,loss\n");
    for &tau in &cfg.tau_grid {
        for &lr in &cfg.lr_grid {
            let rc = RenderConfig::new(dist, tc, tau, cfg.resolution);
            let out = run_shape_optimization(&cfg, &rc, lr)?;
            for (k, l) in out.trace.iter().enumerate() {
                traces.push_str(&format!("{tau},{lr},{k},{l}\n"));
            }
            println!(
                "tau {tau:e} lr {lr:e}: loss {:.5} -> {:.5}",
                out.initial_metric, out.record.metric
            );
            records.push(out.record);
        }
    }
    println!("fingerprint: {}", records[0].fingerprint);
    write_records(&a.out, &records)?;
    fs::write(a.out.join("trace.csv"), traces)?;
    if records.iter().all(|r| r.failed()) {
        eprintln!("every run diverged");
        return Err(RunError::Failed);
    }
    Ok(())
}

fn parse_angles(text: &str) -> Result<(f64, f64), RunError> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| config_err(format!("--angles expects lo:hi, got `{text}`")))?;
    let p = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| config_err(format!("bad angle `{s}`")))
    };
    Ok((p(lo)?, p(hi)?))
}

fn pose_opt(a: PoseArgs) -> Out {
    let (dist, tc) = a.renderer.parse()?;
    let mut cfg = pose_config(
        a.preset, a.mesh, a.steps, a.trials, a.size, &a.loss, a.seed, a.wall_time,
    )?;
    if let Some(r) = &a.angles {
        cfg.init_angle_range = parse_angles(r)?;
    }
    if let Some(lr) = a.lr {
        cfg.lr_grid = vec![lr];
    }
    cfg.validate()?;
    prepare_out(&a.out)?;
    println!("seed: {}", cfg.seed);
    let mut records = Vec::new();
    let mut errors = String::from("lr,trial,error_deg,success\n");
    for &lr in &cfg.lr_grid {
        let rc = RenderConfig::new(dist, tc, cfg.sigma_start, cfg.resolution);
        let out = run_pose_optimization(&cfg, &rc, lr)?;
        for (i, (e, s)) in out.errors.iter().zip(&out.successes).enumerate() {
            errors.push_str(&format!("{lr},{i},{e},{s}\n"));
        }
        println!("lr {lr}: success fraction {:.3}", out.success_fraction());
        records.push(out.record);
    }
    println!("fingerprint: {}", records[0].fingerprint);
    write_records(&a.out, &records)?;
    fs::write(a.out.join("trials.csv"), errors)?;
    Ok(())
}

fn grid(a: GridArgs) -> Out {
    let mut grid = if a.all {
        GridSpec {
            distributions: benchmark_distributions(),
            tconorms: benchmark_tconorms(),
        }
    } else {
        GridSpec {
            distributions: vec!["logistic".parse()?, "levy".parse()?],
            tconorms: vec!["probabilistic".parse()?, "einstein".parse()?],
        }
    };
    if !a.dists.is_empty() {
        grid.distributions = a
            .dists
            .iter()
            .map(|s| s.parse())
            .collect::<diffsil::Result<_>>()?;
    }
    if !a.tconorms.is_empty() {
        grid.tconorms = a
            .tconorms
            .iter()
            .map(|s| s.parse())
            .collect::<diffsil::Result<_>>()?;
    }
    let task = match a.task {
        TaskName::Shape => {
            let mut cfg =
                shape_config(a.preset, a.mesh, a.steps, a.size, &a.loss, a.seed, a.wall_time)?;
            if !a.taus.is_empty() {
                cfg.tau_grid = a.taus.clone();
            }
            if !a.lrs.is_empty() {
                cfg.lr_grid = a.lrs.clone();
            }
            GridTask::Shape(cfg)
        }
        TaskName::Pose => {
            if !a.taus.is_empty() {
                return Err(config_err("--tau does not apply to the pose task (σ is scheduled)"));
            }
            let mut cfg = pose_config(
                a.preset, a.mesh, a.steps, a.trials, a.size, &a.loss, a.seed, a.wall_time,
            )?;
            if !a.lrs.is_empty() {
                cfg.lr_grid = a.lrs.clone();
            }
            GridTask::Pose(cfg)
        }
    };
    let jobs = a.jobs.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    });
    if jobs == 0 {
        return Err(config_err("--jobs must be >= 1"));
    }
    prepare_out(&a.out)?;
    println!("seed: {}", a.seed);
    let (records, cells) = grid_search(&task, &grid, jobs)?;
    write_records(&a.out, &records)?;
    fs::write(a.out.join("heatmap.csv"), heatmap_csv(&cells)?)?;
    if cells.len() >= 10 {
        let h = top_decile_histogram(&cells, task.higher_is_better())?;
        let mut text = String::from("axis,value,count\n");
        for (k, n) in &h.by_distribution {
            text.push_str(&format!("distribution,\"{k}\",{n}\n"));
        }
        for (k, n) in &h.by_tconorm {
            text.push_str(&format!("tconorm,\"{k}\",{n}\n"));
        }
        fs::write(a.out.join("top_decile.csv"), text)?;
    }
    for c in &cells {
        println!(
            "{:<28} {:<22} best {:.5} (tau {}, lr {}){}",
            c.distribution,
            c.tconorm,
            c.best_metric,
            c.best_tau,
            c.best_lr,
            if c.extreme_tau || c.extreme_lr {
                "  [extreme grid value]"
            } else {
                ""
            }
        );
    }
    if let Some(r) = records.first() {
        println!("fingerprint: {}", r.fingerprint);
    }
    println!(
        "{} runs, {} failed; wrote {}",
        records.len(),
        records.iter().filter(|r| r.failed()).count(),
        a.out.join("records.csv").display()
    );
    Ok(())
}

fn enumerate(a: EnumerateArgs) -> Out {
    let e = enumerate_renderers();
    println!("{}", e.breakdown());
    println!("reference total: 1242 (difference {})", 1242 - e.count() as i64);
    if let Some(dir) = a.out {
        prepare_out(&dir)?;
        let mut w = String::from("distribution,tconorm\n");
        for (d, t) in &e.renderers {
            w.push_str(&format!("\"{d}\",\"{t}\"\n"));
        }
        fs::write(dir.join("renderers.csv"), w)?;
    }
    println!("fingerprint: {}", fingerprint(&[("task", "enumerate".into())]));
    Ok(())
}

fn check_grads(a: CheckArgs) -> Out {
    let (dist, tc) = a.renderer.parse()?;
    let config = RenderConfig::new(dist, tc, a.tau, a.size);
    let loss: Loss = a.loss.parse()?;
    let mesh = meshes::resolve(&a.mesh)?.normalized();
    let camera = a.view.camera(a.size);
    let target_cam = Camera {
        azimuth: camera.azimuth + 10.0,
        ..camera
    };
    let target = hard_render(&transform_project(&mesh, &target_cam)?, a.size, a.size);
    let what = match a.wrt {
        Wrt::Vertices => GradientTarget::Vertices,
        Wrt::Camera => GradientTarget::Camera,
    };
    let opts = FdOptions {
        h: a.h,
        max_params: a.max_params,
        seed: a.seed,
        ..FdOptions::default()
    };
    println!("seed: {}", a.seed);
    let r = finite_difference_check(&mesh, &camera, &config, &target, loss, what, &opts)?;
    for e in &r.entries {
        println!(
            "param {:>4}: analytic {:+.6e} numeric {:+.6e} rel {:.2e}",
            e.index, e.analytic, e.numeric, e.rel_error
        );
    }
    println!("excluded near kinks: {:?}", r.excluded);
    println!(
        "max_rel_error {:.3e} at {:?} (h = {})",
        r.max_rel_error, r.argmax, r.h
    );
    let failed = r.max_rel_error >= 1e-3;
    println!(
        "fingerprint: {}",
        fingerprint(&[
            ("task", "check-grads".into()),
            ("dist", dist.to_string()),
            ("tconorm", tc.to_string()),
            ("tau", a.tau.to_string()),
        ])
    );
    if failed {
        eprintln!("gradient check failed: relative error above 1e-3");
        return Err(RunError::Failed);
    }
    Ok(())
}
