//! Acceptance suite: one PASS/FAIL line per criterion, each with its runtime
//! bound. Runs without the libtest harness so the criteria execute in order
//! and their timings are not distorted by parallel tests.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DVector;
use probmorph::gaussian::GridAxis;
use probmorph::gp::gp_predictive_by_conditioning;
use probmorph::laws::{run_filtered, Fault, LawConfig, LawReport};
use probmorph::{
    bayes_invert, gauss_discretize, gauss_invert, gp_posterior_predictive, posterior, predictive,
    random, AffineGaussianMap, BayesModel, FiniteKernel, FiniteMeasure, FiniteSpace,
    GaussianMeasure, GpData, GpModel, GridSpec, InvertOptions, Label, Rational, Scalar,
    SupervisedModel, TestInputs, TrainingSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const SEED: u64 = 42;
const TRIALS: usize = 200;

type Criterion = (&'static str, Duration, fn() -> Verdict);

struct Verdict {
    ok: bool,
    detail: String,
}

impl Verdict {
    fn new(ok: bool, detail: impl Into<String>) -> Self {
        Self {
            ok,
            detail: detail.into(),
        }
    }
}

fn laws<S: Scalar>(names: &[&str], trials: usize, tolerance: f64) -> LawReport {
    let cfg = LawConfig {
        seed: SEED,
        trials,
        tolerance,
        ..LawConfig::default()
    };
    run_filtered::<S>(&cfg, |law| names.contains(&law))
}

/// All named laws ran at least `trials` times without a failure.
fn laws_hold(report: &LawReport, names: &[&str], trials: usize) -> Result<(), String> {
    for name in names {
        let o = report
            .outcome(name)
            .ok_or_else(|| format!("law {name} missing"))?;
        if o.trials < trials {
            return Err(format!("{name}: only {} trials", o.trials));
        }
        if o.failures > 0 {
            return Err(format!(
                "{name}: {} failures, first {}",
                o.failures, o.counterexamples[0]
            ));
        }
    }
    Ok(())
}

fn exact_law_criterion(names: &[&str]) -> Verdict {
    let report = laws::<Rational>(names, TRIALS, 0.0);
    match laws_hold(&report, names, TRIALS) {
        Ok(()) => Verdict::new(
            true,
            format!("{} x {TRIALS} instances, exact", names.join(", ")),
        ),
        Err(e) => Verdict::new(false, e),
    }
}

fn category_laws() -> Verdict {
    let names = [
        "compose-associativity",
        "pushforward-functoriality",
        "pullback-contravariance",
        "pushforward-pullback-duality",
    ];
    let exact = laws::<Rational>(&names, TRIALS, 0.0);
    let float = laws::<f64>(&names, TRIALS, 1e-12);
    match laws_hold(&exact, &names, TRIALS).and_then(|_| laws_hold(&float, &names, TRIALS)) {
        Ok(()) => Verdict::new(
            true,
            format!("4 laws x {TRIALS}, rational exact, float max-abs 1e-12"),
        ),
        Err(e) => Verdict::new(false, e),
    }
}

fn graph_laws() -> Verdict {
    exact_law_criterion(&[
        "graph-projection-target",
        "graph-projection-source",
        "graph-of-composite",
        "graph-pushforward-map",
    ])
}

fn disintegration() -> Verdict {
    exact_law_criterion(&["disintegration-round-trip"])
}

fn inversion() -> Verdict {
    exact_law_criterion(&[
        "inversion-identity",
        "double-inversion",
        "composite-inversion",
    ])
}

fn absolute_continuity() -> Verdict {
    exact_law_criterion(&["absolute-continuity"])
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1e-300)
}

/// Posterior mean and variance of `θ` at the observation cell nearest `y_obs`,
/// obtained by discretizing the prior and every sampling row on grids and
/// inverting the finite model. Returns the cell center actually observed.
fn grid_posterior(prior: &GaussianMeasure, t: &AffineGaussianMap, y_obs: f64) -> (f64, f64, f64) {
    let (m0, sd0) = (prior.mean()[0], prior.std_devs()[0]);
    let theta_grid = GridSpec::uniform_1d(m0 - 8.0 * sd0, m0 + 8.0 * sd0, sd0 / 100.0);
    let disc_prior = gauss_discretize(prior, &theta_grid).unwrap();
    let thetas: Vec<f64> = disc_prior.points.iter().map(|p| p[0]).collect();

    let (a, b) = (t.a()[(0, 0)], t.b()[0]);
    let noise_sd = t.noise()[(0, 0)].sqrt();
    let step = noise_sd / 20.0;
    let means = [a * thetas[0] + b, a * thetas[thetas.len() - 1] + b];
    let (lo, hi) = (means[0].min(means[1]), means[0].max(means[1]));
    let reach = ((y_obs - lo).max(hi - y_obs) + 8.0 * noise_sd) / step;
    let k = reach.ceil();
    let y_axis = GridAxis {
        lo: y_obs - k * step,
        hi: y_obs + k * step,
        step,
    };
    let obs = k as usize;
    let y_cell = y_axis.centers()[obs];
    assert!((y_cell - y_obs).abs() <= 1e-12);
    let y_grid = GridSpec { axes: vec![y_axis] };

    let mut target: Option<FiniteSpace> = None;
    let rows: Vec<Vec<f64>> = thetas
        .iter()
        .map(|&th| {
            let row = gauss_discretize(
                &GaussianMeasure::scalar(a * th + b, noise_sd * noise_sd).unwrap(),
                &y_grid,
            )
            .unwrap()
            .measure;
            target.get_or_insert_with(|| row.space().clone());
            row.weights().to_vec()
        })
        .collect();
    let sampling =
        FiniteKernel::new(disc_prior.measure.space().clone(), target.unwrap(), rows).unwrap();
    let model = BayesModel::new(disc_prior.measure.clone(), sampling).unwrap();
    let inv = bayes_invert(&model);
    let post = inv.kernel.row(obs);
    let w = post.weights();
    let mean: f64 = w.iter().zip(&thetas).map(|(w, t)| w * t).sum();
    let var: f64 = w
        .iter()
        .zip(&thetas)
        .map(|(w, t)| w * (t - mean) * (t - mean))
        .sum();
    (y_cell, mean, var)
}

fn gaussian_vs_finite() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let m0 = rng.random_range(-2.0..2.0);
        let s0 = rng.random_range(0.5..2.0);
        let slope = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let offset = rng.random_range(-1.0..1.0);
        let noise = rng.random_range(0.25..4.0);
        let prior = GaussianMeasure::scalar(m0, s0).unwrap();
        let t = AffineGaussianMap::scalar(slope, offset, noise).unwrap();
        let pred_sd = (slope * slope * s0 + noise).sqrt();
        let y_obs = slope * m0 + offset + rng.random_range(-2.0..2.0) * pred_sd;

        let (y_cell, mean, var) = grid_posterior(&prior, &t, y_obs);
        let closed = gauss_invert(&t, &prior, InvertOptions::default())
            .unwrap()
            .apply(&DVector::from_element(1, y_cell))
            .unwrap();
        worst = worst
            .max(rel_err(mean, closed.mean()[0]))
            .max(rel_err(var, closed.cov()[(0, 0)]));
    }
    Verdict::new(
        worst <= 1e-3,
        format!("20 problems, worst relative error {worst:.2e} (bound 1e-3)"),
    )
}

fn gp_two_route() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let opts = InvertOptions::default();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (gp, data, test) = random::gp_problem(&mut rng, 10, 5);
        let fast = gp_posterior_predictive(&gp, &data, &test, opts).unwrap();
        let generic = gp_predictive_by_conditioning(&gp, &data, &test, opts).unwrap();
        worst = worst.max(fast.max_abs_diff(&generic));
    }
    let unit = GpModel::squared_exponential(1.0, 1.0, 1.0).unwrap();
    let data = GpData::new(vec![vec![0.0]], vec![1.0]).unwrap();
    let hand = gp_posterior_predictive(&unit, &data, &[vec![0.0]], opts).unwrap();
    let hand_err = (hand.mean()[0] - 0.5)
        .abs()
        .max((hand.cov()[(0, 0)] - 0.5).abs());
    Verdict::new(
        worst <= 1e-10 && hand_err <= 1e-12,
        format!("20 problems, max-abs diff {worst:.2e} (bound 1e-10); N(0.5, 0.5) off by {hand_err:.1e}"),
    )
}

fn coin_model() -> SupervisedModel<Rational> {
    let q = <Rational as Scalar>::from_ratio;
    let xs = FiniteSpace::from_names(["a", "b"]).unwrap();
    let ys = FiniteSpace::range(2).unwrap();
    let bern = |ps: [Rational; 2]| {
        let rows = ps.iter().map(|p| vec![q(1, 1) - p, p.clone()]).collect();
        FiniteKernel::new(xs.clone(), ys.clone(), rows).unwrap()
    };
    SupervisedModel::new(
        FiniteMeasure::uniform(FiniteSpace::from_names(["t1", "t2"]).unwrap()),
        vec![bern([q(1, 10), q(9, 10)]), bern([q(1, 2), q(1, 2)])],
    )
    .unwrap()
}

fn supervised() -> Verdict {
    let names = [
        "sequential-update",
        "exchangeability",
        "restriction-consistency",
    ];
    let report = laws::<Rational>(&names, TRIALS, 0.0);
    if let Err(e) = laws_hold(&report, &names, TRIALS) {
        return Verdict::new(false, e);
    }
    let q = <Rational as Scalar>::from_ratio;
    let m = coin_model();
    let s = TrainingSet::new(vec![(Label::name("a"), Label::Int(1))]);
    let post = posterior(&m, &s).unwrap();
    let t = TestInputs::new(vec![Label::name("b")]).unwrap();
    let pred = predictive(&m, &s, &t).unwrap();
    let one = pred.joint.weight(&Label::Int(1)).cloned();
    let ok = post.measure.weights() == [q(1, 6), q(5, 6)] && one == Some(q(17, 30));
    Verdict::new(
        ok,
        format!("3 laws x {TRIALS} models, exact; posterior (1/6, 5/6), predictive 17/30"),
    )
}

fn probmorph(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_probmorph"))
        .args(args)
        .output()
        .unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn read(p: &Path) -> Vec<u8> {
    fs::read(p).unwrap()
}

fn cli_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name);
    let s = |p: &Path| p.to_str().unwrap().to_string();

    let mut twice = Vec::new();
    for run in ["a", "b"] {
        let report = path(&format!("laws-{run}.json"));
        let (code, _) = probmorph(&[
            "check-laws",
            "--seed",
            "42",
            "--trials",
            "200",
            "--output",
            &s(&report),
        ]);
        if code != 0 {
            return Verdict::new(
                false,
                format!("check-laws exited {code} on the correct build"),
            );
        }
        twice.push(read(&report));
    }
    let report: Value = serde_json::from_slice(&twice[0]).unwrap();
    if report["total_failures"] != 0 {
        return Verdict::new(false, "check-laws reported failures");
    }

    fs::write(path("gp.json"), r#"{"kernel": {"family": "squared-exponential", "length_scale": 0.8, "amplitude": 1.3}, "noise_var": 0.1}"#).unwrap();
    fs::write(path("train.csv"), "x,y\n-1,0.3\n0.5,1.1\n2,-0.4\n").unwrap();
    fs::write(path("test.csv"), "x\n-2\n0\n1.5\n3\n").unwrap();
    for run in ["a", "b"] {
        let out = path(&format!("pred-{run}.csv"));
        let args = [
            "gp-predict",
            "--input",
            &s(&path("gp.json")),
            "--data",
            &s(&path("train.csv")),
            "--test",
            &s(&path("test.csv")),
            "--output",
            &s(&out),
        ];
        if probmorph(&args).0 != 0 {
            return Verdict::new(false, "gp-predict failed");
        }
    }
    let same = twice[0] == twice[1]
        && read(&path("pred-a.csv")) == read(&path("pred-b.csv"))
        && read(&path("pred-a.cov.json")) == read(&path("pred-b.cov.json"));
    if !same {
        return Verdict::new(false, "repeated runs differ");
    }

    for fault in Fault::ALL {
        let (code, _) = probmorph(&[
            "check-laws",
            "--seed",
            "42",
            "--trials",
            "200",
            "--inject-fault",
            fault.as_str(),
        ]);
        if code != 4 {
            return Verdict::new(
                false,
                format!("fault {fault} went undetected (exit {code})"),
            );
        }
    }
    Verdict::new(
        true,
        format!(
            "byte-identical reruns; {} injected faults each exit 4",
            Fault::ALL.len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("category laws", Duration::from_secs(10), category_laws),
        ("graph identities", Duration::from_secs(10), graph_laws),
        (
            "disintegration round trip",
            Duration::from_secs(10),
            disintegration,
        ),
        ("Bayesian inversion", Duration::from_secs(20), inversion),
        (
            "absolute continuity",
            Duration::from_secs(5),
            absolute_continuity,
        ),
        (
            "Gaussian vs finite grid",
            Duration::from_secs(30),
            gaussian_vs_finite,
        ),
        ("GP two routes", Duration::from_secs(10), gp_two_route),
        ("supervised pipeline", Duration::from_secs(20), supervised),
        ("CLI determinism", Duration::from_secs(120), cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, bound, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let took = start.elapsed();
        let ok = v.ok && took < *bound;
        failed += usize::from(!ok);
        println!(
            "{} [{}] {name}: {} ({:.2} s, bound {} s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            took.as_secs_f64(),
            bound.as_secs()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
