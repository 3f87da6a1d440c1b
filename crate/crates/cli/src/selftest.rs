use std::process::ExitCode;

use diffsil::experiments::{benchmark_distributions, benchmark_tconorms};
use diffsil::meshes;
use diffsil::{
    cdf, finite_difference_check, hard_render, icosphere, pdf, transform_project, Camera,
    FdOptions, GradientTarget, Loss, RenderConfig, TConormFamily, TConormSpec,
};

struct Tally {
    failures: usize,
}

impl Tally {
    fn report(&mut self, name: &str, ok: bool, detail: String) {
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures += 1;
        }
    }
}

pub fn run() -> ExitCode {
    let mut t = Tally { failures: 0 };
    tconorm_axioms(&mut t);
    distributions(&mut t);
    gradients(&mut t);
    if t.failures == 0 {
        println!("selftest: all checks passed");
        ExitCode::SUCCESS
    } else {
        println!("selftest: {} check(s) failed", t.failures);
        ExitCode::from(2)
    }
}

fn grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).chain([0.05, 0.999]).collect()
}

fn tconorm_axioms(t: &mut Tally) {
    let g = grid();
    for spec in benchmark_tconorms() {
        let mut worst: f64 = 0.0;
        let mut monotone = true;
        for &a in &g {
            worst = worst.max((spec.apply(a, 0.0) - a).abs());
            for &b in &g {
                worst = worst.max((spec.apply(a, b) - spec.apply(b, a)).abs());
                if b < 1.0 && spec.apply(a, b + 1e-3_f64.min(1.0 - b)) < spec.apply(a, b) - 1e-12 {
                    monotone = false;
                }
                for &c in &g {
                    let l = spec.apply(spec.apply(a, b), c);
                    let r = spec.apply(a, spec.apply(b, c));
                    if spec.family().is_tconorm() {
                        worst = worst.max((l - r).abs());
                    }
                }
            }
        }
        let ok = if spec.family().is_tconorm() {
            worst <= 1e-9 && monotone
        } else {
            true
        };
        t.report(
            &format!("t-conorm axioms {spec}"),
            ok,
            format!("max deviation {worst:.1e}"),
        );
    }
    let avg = TConormSpec::simple(TConormFamily::Average);
    let (l, r) = (
        avg.apply(avg.apply(0.2, 0.6), 1.0),
        avg.apply(0.2, avg.apply(0.6, 1.0)),
    );
    t.report(
        "average is not associative",
        (l - r).abs() > 1e-3,
        format!("{l} vs {r}"),
    );
}

fn distributions(t: &mut Tally) {
    let xs: Vec<f64> = (-400..=400).map(|k| k as f64 / 40.0).collect();
    for d in benchmark_distributions() {
        let mut monotone = true;
        let mut in_range = true;
        let mut pdf_err: f64 = 0.0;
        let mut prev = f64::NEG_INFINITY;
        for &x in &xs {
            let c = cdf(&d, x);
            in_range &= (0.0..=1.0).contains(&c);
            monotone &= c >= prev - 1e-15;
            prev = c;
            let h = 1e-5;
            if d.regime(x, 10.0 * h) == 255 {
                continue;
            }
            let fd = (cdf(&d, x + h) - cdf(&d, x - h)) / (2.0 * h);
            pdf_err = pdf_err.max((fd - pdf(&d, x)).abs());
        }
        t.report(
            &format!("distribution {d}"),
            monotone && in_range && pdf_err < 1e-5,
            format!("monotone {monotone}, in [0,1] {in_range}, pdf error {pdf_err:.1e}"),
        );
    }
}

fn gradients(t: &mut Tally) {
    let mesh = icosphere(0).expect("icosphere");
    let cam = Camera {
        width: 24,
        height: 24,
        azimuth: 20.0,
        elevation: 15.0,
        ..Camera::default()
    };
    let target_cam = Camera {
        azimuth: 35.0,
        ..cam
    };
    let target = hard_render(
        &transform_project(&meshes::cube(0.6), &target_cam).expect("projection"),
        24,
        24,
    );
    for (d, tc) in [
        ("logistic", "probabilistic"),
        ("gaussian", "einstein"),
        ("cauchy", "yager(p=2)"),
    ] {
        let config = RenderConfig::new(d.parse().unwrap(), tc.parse().unwrap(), 0.01, 24);
        for what in [GradientTarget::Vertices, GradientTarget::Camera] {
            let r = finite_difference_check(
                &mesh,
                &cam,
                &config,
                &target,
                Loss::Iou,
                what,
                &FdOptions::default(),
            );
            let (ok, detail) = match r {
                Ok(r) => (
                    r.max_rel_error < 1e-3,
                    format!(
                        "max rel error {:.1e} over {} parameters",
                        r.max_rel_error,
                        r.entries.len()
                    ),
                ),
                Err(e) => (false, e.to_string()),
            };
            t.report(&format!("gradients {d} + {tc} wrt {what:?}"), ok, detail);
        }
    }
}
