//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed. Exits
//! non-zero when a criterion fails that is not in `KNOWN_RED`, or when a
//! known-red criterion unexpectedly passes (the list must then be updated).

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use diffsil::experiments::{
    benchmark_distributions, grid_search, records_to_string, run_pose_optimization,
    run_shape_optimization, GridSpec, GridTask, PoseTaskConfig, ShapeTaskConfig,
};
use diffsil::special::{erf, regularized_lower_gamma};
use diffsil::{
    aggregate, cdf, finite_difference_check, hard_render, icosphere, meshes, pdf,
    render_silhouette, transform_project, Camera, DistributionSpec, Family, FdOptions,
    GradientTarget, Loss, RenderConfig, ScreenMesh, TConormFamily, TConormSpec,
};

/// Criteria that cannot pass as written, with the reason printed next to
/// the FAIL line.
const KNOWN_RED: &[(u32, &str)] = &[(
    2,
    "the Levy tail mass beyond |x| = 1e6 is erf(1/sqrt(2e6)) = 8.0e-4 > 1e-6 \
     (upper tail of the plain variants, lower tail of the reversed ones); \
     the exact CDF cannot meet the limit bound",
)];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn main() {
    let only: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let criteria: [(u32, &str, fn() -> Outcome); 9] = [
        (1, "t-conorm axioms", c1_tconorm_axioms),
        (2, "distribution identities", c2_distributions),
        (3, "special functions", c3_special_functions),
        (4, "gradient correctness", c4_gradients),
        (5, "hard limit", c5_hard_limit),
        (6, "aggregation closed forms", c6_aggregation),
        (7, "desk shape optimization", c7_shape),
        (8, "desk pose recovery", c8_pose),
        (9, "grid-search determinism", c9_determinism),
    ];
    let mut unexpected = 0;
    for (id, name, check) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let out = check();
        let secs = start.elapsed().as_secs_f64();
        let known = KNOWN_RED.iter().find(|k| k.0 == id);
        let status = if out.pass { "PASS" } else { "FAIL" };
        println!("[{status}] {id}. {name} ({secs:.1}s): {}", out.detail);
        match (out.pass, known) {
            (false, Some((_, why))) => println!("       known red: {why}"),
            (false, None) => unexpected += 1,
            (true, Some(_)) => {
                println!("       listed as known red but passed; update KNOWN_RED");
                unexpected += 1;
            }
            (true, None) => {}
        }
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected result(s)");
        std::process::exit(1);
    }
}

fn within(budget: Duration, start: Instant) -> (bool, String) {
    let e = start.elapsed();
    (e < budget, format!("{:.1}s of {}s budget", e.as_secs_f64(), budget.as_secs()))
}

// ---------------------------------------------------------------- 1

fn tconorm_grid() -> Vec<TConormSpec> {
    use TConormFamily::*;
    let mut out: Vec<TConormSpec> = [Max, Probabilistic, Einstein]
        .into_iter()
        .map(TConormSpec::simple)
        .collect();
    let grids: [(TConormFamily, &[f64]); 6] = [
        (Hamacher, &[0.5, 1.0, 2.0, 4.0]),
        (Frank, &[0.5, 2.0, 4.0]),
        (Yager, &[0.5, 1.0, 2.0, 4.0]),
        (AczelAlsina, &[0.5, 1.0, 2.0, 4.0]),
        (Dombi, &[0.5, 1.0, 2.0, 4.0]),
        (SchweizerSklar, &[-0.5, -1.0, -2.0, -4.0]),
    ];
    for (f, ps) in grids {
        for &p in ps {
            out.push(TConormSpec::with_parameter(f, p).unwrap());
        }
    }
    out
}

fn c1_tconorm_axioms() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let triples: Vec<[f64; 3]> = (0..10_000)
        .map(|_| [rng.gen(), rng.gen(), rng.gen()])
        .collect();
    let mut failures = Vec::new();
    let mut families = std::collections::BTreeSet::new();
    let mut worst: f64 = 0.0;
    for spec in tconorm_grid() {
        families.insert(spec.family().name());
        let (mut comm, mut assoc, mut neutral, mut mono): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
        for &[a, b, c] in &triples {
            comm = comm.max((spec.apply(a, b) - spec.apply(b, a)).abs());
            assoc = assoc.max(
                (spec.apply(spec.apply(a, b), c) - spec.apply(a, spec.apply(b, c))).abs(),
            );
            neutral = neutral.max((spec.apply(a, 0.0) - a).abs());
            let (lo, hi) = if a <= c { (a, c) } else { (c, a) };
            mono = mono.max(spec.apply(lo, b) - spec.apply(hi, b));
        }
        let dev = comm.max(assoc).max(neutral).max(mono);
        worst = worst.max(dev);
        if dev > 1e-9 {
            failures.push(format!(
                "{spec}: comm {comm:.1e} assoc {assoc:.1e} neutral {neutral:.1e} mono {mono:.1e}"
            ));
        }
    }
    let avg = TConormSpec::simple(TConormFamily::Average);
    let avg_assoc = triples
        .iter()
        .map(|&[a, b, c]| (avg.apply(avg.apply(a, b), c) - avg.apply(a, avg.apply(b, c))).abs())
        .fold(0.0, f64::max);
    let avg_fails = avg_assoc > 1e-3;
    let (fast, time) = within(Duration::from_secs(10), start);
    let pass = failures.is_empty() && avg_fails && families.len() == 9 && fast;
    let mut detail = format!(
        "{} families, worst deviation {worst:.1e} on 1e4 triples; average associativity gap {avg_assoc:.2}; {time}",
        families.len()
    );
    for f in failures {
        detail.push_str(&format!("\n       {f}"));
    }
    outcome(pass, detail)
}

// ---------------------------------------------------------------- 2

fn symmetric(f: Family) -> bool {
    use Family::*;
    matches!(
        f,
        Uniform
            | CubicHermite
            | WignerSemicircle
            | Gaussian
            | Laplace
            | Logistic
            | HyperbolicSecant
            | Cauchy
            | Reciprocal
    )
}

fn finite_left_support(d: &DistributionSpec) -> bool {
    use Family::*;
    match d.family() {
        Uniform | CubicHermite | WignerSemicircle => true,
        Exponential | Gamma | Levy => !d.reversed(),
        _ => false,
    }
}

/// Points in `x` where the CDF is not smooth.
fn kinks_in_x(d: &DistributionSpec) -> Vec<f64> {
    use Family::*;
    let base: &[f64] = match d.family() {
        Uniform | CubicHermite | WignerSemicircle => &[-1.0, 1.0],
        Exponential | Gamma | Levy => &[0.0],
        _ => &[],
    };
    base.iter()
        .map(|k| {
            let mut y = k + d.shift();
            if d.reversed() {
                y = -y;
            }
            if d.squares() {
                y.signum() * y.abs().sqrt()
            } else {
                y
            }
        })
        .collect()
}

fn c2_distributions() -> Outcome {
    let start = Instant::now();
    let grid: Vec<f64> = (0..1000).map(|i| -20.0 + 40.0 * i as f64 / 999.0).collect();
    let mut problems = Vec::new();
    let mut checked = 0;
    for d in benchmark_distributions() {
        checked += 1;
        let plain = d.with_squares(false);
        let unrev = d.with_reversed(false);
        let mut prev = f64::NEG_INFINITY;
        let (mut mono, mut sym, mut rev, mut sq, mut pdf_err) = (true, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
        let kinks = kinks_in_x(&d);
        for &x in &grid {
            let c = cdf(&d, x);
            if c < prev || !(0.0..=1.0).contains(&c) {
                mono = false;
            }
            prev = c;
            if symmetric(d.family()) {
                sym = sym.max((c + cdf(&d, -x) - 1.0).abs());
                rev = rev.max((cdf(&d.with_reversed(true), x) - c).abs());
            } else if d.reversed() {
                rev = rev.max((c - (1.0 - cdf(&unrev, -x))).abs());
            }
            if d.squares() {
                sq = sq.max((c - cdf(&plain, x.abs() * x)).abs());
            }
            let h = 1e-5;
            if kinks.iter().all(|k| (x - k).abs() > 0.05) {
                let fd = (cdf(&d, x + h) - cdf(&d, x - h)) / (2.0 * h);
                pdf_err = pdf_err.max((fd - pdf(&d, x)).abs());
            }
        }
        let lo = cdf(&d, -1e6);
        let hi = cdf(&d, 1e6);
        let lo_ok = if finite_left_support(&d) {
            lo == 0.0
        } else {
            lo <= 1e-6
        };
        let hi_ok = hi >= 1.0 - 1e-6;
        let mut bad = Vec::new();
        if !mono {
            bad.push("not monotone".to_string());
        }
        if !lo_ok {
            bad.push(format!("cdf(-1e6) = {lo:.2e}"));
        }
        if !hi_ok {
            bad.push(format!("1 - cdf(1e6) = {:.2e}", 1.0 - hi));
        }
        if sym > 1e-12 {
            bad.push(format!("symmetry {sym:.1e}"));
        }
        if rev > 1e-15 {
            bad.push(format!("reversal {rev:.1e}"));
        }
        if sq > 1e-12 {
            bad.push(format!("squares {sq:.1e}"));
        }
        if pdf_err > 1e-5 {
            bad.push(format!("pdf vs difference {pdf_err:.1e}"));
        }
        if !bad.is_empty() {
            problems.push(format!("{d}: {}", bad.join(", ")));
        }
    }
    let mut gamma_exp: f64 = 0.0;
    for rev in [false, true] {
        let g = DistributionSpec::gamma(1.0).unwrap().with_reversed(rev);
        let e = DistributionSpec::of(Family::Exponential).with_reversed(rev);
        for &x in &grid {
            gamma_exp = gamma_exp
                .max((cdf(&g, x) - cdf(&e, x)).abs())
                .max((pdf(&g, x) - pdf(&e, x)).abs());
        }
    }
    if gamma_exp > 1e-10 {
        problems.push(format!("gamma(p=1) vs exponential {gamma_exp:.1e}"));
    }
    let (fast, time) = within(Duration::from_secs(10), start);
    let mut detail = format!(
        "{checked} variants on a 1e3-point grid; gamma(p=1) vs exponential {gamma_exp:.1e}; {} with violations; {time}",
        problems.len()
    );
    for p in &problems {
        detail.push_str(&format!("\n       {p}"));
    }
    outcome(problems.is_empty() && fast, detail)
}

// ---------------------------------------------------------------- 3

/// `erf(x) = 2/√π · e^{-x²} · Σ 2ⁿ x^{2n+1} / (2n+1)!!`, all terms positive.
fn erf_oracle(x: f64) -> f64 {
    if x < 0.0 {
        return -erf_oracle(-x);
    }
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while term > 1e-18 * sum {
        n += 1.0;
        term *= 2.0 * x * x / (2.0 * n + 1.0);
        sum += term;
    }
    2.0 / std::f64::consts::PI.sqrt() * (-x * x).exp() * sum
}

fn ln_gamma_oracle(a: f64) -> f64 {
    // a is a positive integer or half-integer
    let mut v = if a.fract() == 0.0 {
        1.0
    } else {
        std::f64::consts::PI.sqrt()
    };
    let mut z = if a.fract() == 0.0 { 1.0 } else { 0.5 };
    let mut ln = 0.0;
    while z < a {
        ln += z.ln();
        z += 1.0;
    }
    v = v.ln();
    v + ln
}

/// `P(a, x) = x^a e^{-x} / Γ(a) · Σ xⁿ / (a (a+1) … (a+n))`.
fn lower_gamma_oracle(a: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut n = 0.0;
    while term > 1e-18 * sum {
        n += 1.0;
        term *= x / (a + n);
        sum += term;
    }
    (a * x.ln() - x - ln_gamma_oracle(a)).exp() * sum
}

fn c3_special_functions() -> Outcome {
    let mut erf_err: f64 = 0.0;
    for i in 0..=1200 {
        let x = -6.0 + 12.0 * i as f64 / 1200.0;
        erf_err = erf_err.max((erf(x) - erf_oracle(x)).abs());
    }
    let mut gamma_err: f64 = 0.0;
    let mut failures = 0;
    for &a in &[0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 25.0] {
        for i in 0..=600 {
            let x = 60.0 * i as f64 / 600.0;
            let want = lower_gamma_oracle(a, x);
            match regularized_lower_gamma(a, x) {
                Ok(got) => {
                    let rel = if want == 0.0 {
                        got.abs()
                    } else {
                        ((got - want) / want).abs()
                    };
                    gamma_err = gamma_err.max(rel);
                }
                Err(_) => failures += 1,
            }
        }
    }
    let mut ident: f64 = 0.0;
    for i in 0..=400 {
        let x = 40.0 * i as f64 / 400.0;
        let p = regularized_lower_gamma(0.5, x).unwrap_or(f64::NAN);
        ident = ident.max((p - erf(x.sqrt())).abs());
    }
    let pass = erf_err <= 1e-10 && gamma_err <= 1e-10 && ident <= 1e-10 && failures == 0;
    outcome(
        pass,
        format!(
            "erf abs error {erf_err:.1e} on [-6, 6]; P(a, x) rel error {gamma_err:.1e} for a in 0.5..25, x in [0, 60]; \
             |P(1/2, x) - erf(sqrt x)| {ident:.1e}; {failures} evaluation errors"
        ),
    )
}

// ---------------------------------------------------------------- 4

fn c4_gradients() -> Outcome {
    let start = Instant::now();
    let size = 24;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut mesh = icosphere(0).unwrap();
    for v in &mut mesh.vertices {
        for k in 0..3 {
            v[k] *= 1.0 + 0.15 * (rng.gen::<f64>() - 0.5);
        }
    }
    let camera = Camera {
        width: size,
        height: size,
        azimuth: 20.0,
        elevation: 15.0,
        ..Camera::default()
    };
    let target_cam = Camera {
        azimuth: 35.0,
        ..camera
    };
    let target = hard_render(
        &transform_project(&meshes::cube(0.6), &target_cam).unwrap(),
        size,
        size,
    );
    let mut worst = (0.0f64, String::new());
    let (mut checked, mut excluded, mut runs, mut errors) = (0, 0, 0, Vec::new());
    for d in benchmark_distributions() {
        for tc in ["probabilistic", "einstein", "yager(p=2)"] {
            let config = RenderConfig::new(d, tc.parse().unwrap(), 0.01, size);
            for what in [GradientTarget::Vertices, GradientTarget::Camera] {
                runs += 1;
                match finite_difference_check(
                    &mesh,
                    &camera,
                    &config,
                    &target,
                    Loss::Iou,
                    what,
                    &FdOptions::default(),
                ) {
                    Ok(r) => {
                        checked += r.entries.len();
                        excluded += r.excluded.len();
                        if r.max_rel_error >= worst.0 {
                            worst = (r.max_rel_error, format!("{d} + {tc} wrt {what:?}"));
                        }
                    }
                    Err(e) => errors.push(format!("{d} + {tc}: {e}")),
                }
            }
        }
    }
    let (fast, time) = within(Duration::from_secs(120), start);
    let pass = worst.0 < 1e-3 && errors.is_empty() && fast;
    outcome(
        pass,
        format!(
            "{runs} checks, {checked} parameters compared, {excluded} excluded near kinks; \
             worst {:.2e} ({}); {} errors; {time}",
            worst.0,
            worst.1,
            errors.len()
        ),
    )
}

// ---------------------------------------------------------------- 5

/// Barycentric inside test, independent of the library.
fn inside(p: [f64; 2], t: [[f64; 2]; 3]) -> bool {
    let cross = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    };
    let area = cross(t[0], t[1], t[2]);
    let l0 = cross(t[1], t[2], p) / area;
    let l1 = cross(t[2], t[0], p) / area;
    let l2 = 1.0 - l0 - l1;
    l0 >= 0.0 && l1 >= 0.0 && l2 >= 0.0
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / (ab[0] * ab[0] + ab[1] * ab[1])).clamp(0.0, 1.0);
    let q = [a[0] + t * ab[0] - p[0], a[1] + t * ab[1] - p[1]];
    (q[0] * q[0] + q[1] * q[1]).sqrt()
}

fn c5_hard_limit() -> Outcome {
    let size = 48;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let config = RenderConfig::new(
        "logistic".parse().unwrap(),
        "probabilistic".parse().unwrap(),
        1e-6,
        size,
    );
    let (mut agree, mut total, mut hard_agree) = (0usize, 0usize, 0usize);
    let mut worst_fraction: f64 = 1.0;
    for _ in 0..50 {
        let tri: [[f64; 2]; 3] = std::array::from_fn(|_| {
            [
                rng.gen_range(-4.0..size as f64 + 4.0),
                rng.gen_range(-4.0..size as f64 + 4.0),
            ]
        });
        let screen = ScreenMesh::from_triangles(&[tri]);
        let soft = render_silhouette(&screen, &config).unwrap();
        let hard = hard_render(&screen, size, size);
        let (mut a, mut n) = (0, 0);
        for y in 0..size {
            for x in 0..size {
                let p = [x as f64 + 0.5, y as f64 + 0.5];
                let edge = (0..3)
                    .map(|k| segment_distance(p, tri[k], tri[(k + 1) % 3]))
                    .fold(f64::INFINITY, f64::min);
                if edge < 1e-3 {
                    continue;
                }
                let want = inside(p, tri);
                n += 1;
                if (soft.get(x, y) > 0.5) == want {
                    a += 1;
                }
                if (hard.get(x, y) > 0.5) == want {
                    hard_agree += 1;
                }
            }
        }
        agree += a;
        total += n;
        worst_fraction = worst_fraction.min(a as f64 / n.max(1) as f64);
    }
    let frac = agree as f64 / total as f64;
    let hard_frac = hard_agree as f64 / total as f64;
    outcome(
        frac >= 0.99 && hard_frac >= 0.99,
        format!(
            "tau=1e-6 soft vs barycentric oracle {:.4} of {total} non-boundary pixels (worst triangle {:.4}); hard_render vs oracle {:.4}",
            frac, worst_fraction, hard_frac
        ),
    )
}

// ---------------------------------------------------------------- 6

fn c6_aggregation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let prob = TConormSpec::simple(TConormFamily::Probabilistic);
    let ein = TConormSpec::simple(TConormFamily::Einstein);
    let h1 = TConormSpec::with_parameter(TConormFamily::Hamacher, 1.0).unwrap();
    let h2 = TConormSpec::with_parameter(TConormFamily::Hamacher, 2.0).unwrap();
    let (mut closed, mut e1, mut e2): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..2000 {
        let n = rng.gen_range(1..40);
        let ps: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let want = 1.0 - ps.iter().map(|p| 1.0 - p).product::<f64>();
        closed = closed.max((aggregate(&prob, &ps) - want).abs());
        let (a, b) = (rng.gen::<f64>(), rng.gen::<f64>());
        e1 = e1.max((h1.apply(a, b) - prob.apply(a, b)).abs());
        e2 = e2.max((h2.apply(a, b) - ein.apply(a, b)).abs());
    }
    outcome(
        closed <= 1e-12 && e1 <= 1e-12 && e2 <= 1e-12,
        format!(
            "probabilistic fold vs 1 - prod(1 - p) {closed:.1e}; hamacher(1) vs probabilistic {e1:.1e}; hamacher(2) vs einstein {e2:.1e}"
        ),
    )
}

// ---------------------------------------------------------------- 7

fn c7_shape() -> Outcome {
    let cfg = ShapeTaskConfig::desk();
    let best_of = |dist: &str| -> (f64, f64, f64, Duration) {
        let start = Instant::now();
        let mut best = (f64::INFINITY, f64::NAN, f64::NAN);
        for &tau in &cfg.tau_grid {
            for &lr in &cfg.lr_grid {
                let rc = RenderConfig::new(dist.parse().unwrap(), "probabilistic".parse().unwrap(), tau, 64);
                let out = run_shape_optimization(&cfg, &rc, lr).unwrap();
                if out.record.metric < best.0 {
                    best = (out.record.metric, out.initial_metric, tau);
                }
            }
        }
        (best.0, best.1, best.2, start.elapsed())
    };
    let (metric, initial, tau, elapsed) = best_of("logistic");
    let reduction = 1.0 - metric / initial;
    let fast = elapsed < Duration::from_secs(120);
    // Reversed Levy variants are omitted: their outside tail saturates the
    // whole image, the loss does not move, and one run takes minutes.
    let levy = ["levy", "levy(sq)", "levy(shift=1)", "levy(sq,shift=1)"];
    let mut best_levy = (f64::INFINITY, "");
    for d in levy {
        let (m, _, _, _) = best_of(d);
        if m < best_levy.0 {
            best_levy = (m, d);
        }
    }
    // logistic is in the exponential-decay block, so the block's best is
    // at most the logistic cell
    let ordered = metric < best_levy.0;
    outcome(
        reduction >= 0.5 && fast && ordered,
        format!(
            "logistic+probabilistic best at tau={tau:.4}: {initial:.4} -> {metric:.4} ({:.0}% reduction, {:.1}s of 120s); \
             exponential-decay best <= {metric:.4} < Levy best {:.4} ({})",
            100.0 * reduction,
            elapsed.as_secs_f64(),
            best_levy.0,
            best_levy.1
        ),
    )
}

// ---------------------------------------------------------------- 8

/// Success fraction of the pilot run at [15°, 30°], seed 0, lr 0.3.
const POSE_PILOT_LOCK: f64 = 0.85;

fn c8_pose() -> Outcome {
    let rc = RenderConfig::new(
        "logistic".parse().unwrap(),
        "probabilistic".parse().unwrap(),
        0.1,
        64,
    );
    let run = |range: (f64, f64), n_trials: usize| {
        let cfg = PoseTaskConfig {
            init_angle_range: range,
            n_trials,
            seed: 0,
            ..PoseTaskConfig::desk()
        };
        run_pose_optimization(&cfg, &rc, 0.3).unwrap()
    };
    let easy = run((15.0, 30.0), 20);
    let hard = run((45.0, 75.0), 20);
    // each trial has its own stream, so a shorter rerun repeats a prefix
    let again = run((15.0, 30.0), 3);
    let (e, h) = (easy.success_fraction(), hard.success_fraction());
    let deterministic = easy.errors.iter().zip(&again.errors).all(|(a, b)| a.to_bits() == b.to_bits());
    outcome(
        e >= POSE_PILOT_LOCK && e >= h && deterministic,
        format!(
            "20 trials, lr 0.3: success {e:.2} at [15, 30] (lock {POSE_PILOT_LOCK}), {h:.2} at [45, 75]; \
             3-trial rerun bitwise identical: {deterministic}"
        ),
    )
}

// ---------------------------------------------------------------- 9

fn c9_determinism() -> Outcome {
    let cfg = ShapeTaskConfig {
        n_azimuths: 2,
        elevations: vec![30.0],
        steps: 4,
        resolution: 32,
        subdivisions: 1,
        seed: 7,
        ..ShapeTaskConfig::desk()
    };
    let grid = GridSpec {
        distributions: vec!["logistic".parse().unwrap(), "gaussian(sq)".parse().unwrap()],
        tconorms: vec!["probabilistic".parse().unwrap(), "yager(p=2)".parse().unwrap()],
    };
    let task = GridTask::Shape(cfg);
    let csv = |jobs| {
        let (records, _) = grid_search(&task, &grid, jobs).unwrap();
        records_to_string(&records).unwrap()
    };
    let a = csv(1);
    let b = csv(3);
    let c = csv(1);
    let rows = a.lines().count() - 1;
    outcome(
        a == b && a == c && rows == 12,
        format!("{rows} runs; jobs=1 vs jobs=3 identical: {}; repeat identical: {}", a == b, a == c),
    )
}
