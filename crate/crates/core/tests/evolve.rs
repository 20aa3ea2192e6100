use std::sync::Arc;

use arnold_lab::evolve::{Bump, EvolveGrid, Terms, TimeStep};
use arnold_lab::*;
use nalgebra::DMatrix;

fn evolver(n: usize, r_max: f64, k_max: usize, alpha: f64) -> Evolver {
    let g = Arc::new(make_grid(n, r_max, Mapping::UniformR).unwrap());
    Evolver::new(g, k_max, alpha, Terms::default()).unwrap()
}

fn bump(k: usize, width: f64) -> Bump {
    Bump { k, amplitude: 1.0, width, phase: 0.0 }
}

fn spec(bumps: Vec<Bump>, x_norm: Option<f64>) -> PerturbationSpec {
    PerturbationSpec { bumps, random_seed: None, x_norm }
}

fn distance(a: &PolarField, b: &PolarField) -> f64 {
    a.iter_modes()
        .zip(b.iter_modes())
        .flat_map(|((_, x), (_, y))| x.iter().zip(y).map(|(p, q)| (p - q).norm()))
        .fold(0.0, f64::max)
}

fn radial_config(alpha: f64) -> RunConfig {
    RunConfig {
        alpha,
        init: spec(vec![bump(0, 1.0)], Some(1e-3)),
        t_end: 10.0,
        dt: TimeStep::Fixed(0.02),
        stride: 5,
        grid: EvolveGrid { n: 512, r_max: 16.0, k_max: 0 },
        terms: Terms::default(),
    }
}

#[test]
fn empty_spec_gives_zero_state() {
    let ev = evolver(257, 12.0, 4, 1.0);
    let s = ev.init_state(&PerturbationSpec::default()).unwrap();
    assert_eq!(distance(&s.field, &PolarField::zeros(ev.grid.clone(), 4)), 0.0);
    assert_eq!(ev.diagnostics(&s).xnorm, 0.0);
}

#[test]
fn scaled_bump_hits_target_norm_with_zero_moments() {
    let ev = evolver(257, 12.0, 4, 1.0);
    let s = ev.init_state(&spec(vec![bump(2, 1.0), bump(0, 0.8), bump(1, 1.2)], Some(1e-6))).unwrap();
    let d = ev.diagnostics(&s);
    assert!((d.xnorm.sqrt() - 1e-6).abs() < 1e-15, "{}", d.xnorm.sqrt());
    assert!(d.mass.abs() < 1e-18 && d.m1.abs() < 1e-18 && d.m2.abs() < 1e-18, "{d:?}");
}

#[test]
fn radial_bump_is_projected_to_zero_mass() {
    let ev = evolver(257, 12.0, 0, 0.0);
    let s = ev.init_state(&spec(vec![bump(0, 1.0)], None)).unwrap();
    let mass = ev.diagnostics(&s).mass;
    assert!(mass.abs() < 1e-12, "{mass}");
}

#[test]
fn bump_errors() {
    let ev = evolver(129, 10.0, 2, 1.0);
    assert!(matches!(ev.init_state(&spec(vec![bump(3, 1.0)], None)), Err(LabError::Invalid(_))));
    assert!(matches!(ev.init_state(&spec(vec![bump(1, 2.0)], None)), Err(LabError::Domain(_))));
    assert!(matches!(ev.init_state(&spec(vec![bump(1, 0.0)], None)), Err(LabError::Domain(_))));
}

#[test]
fn advective_limit_is_enforced() {
    let ev = evolver(257, 12.0, 4, 50.0);
    let s = ev.init_state(&spec(vec![bump(2, 1.0)], Some(1.0))).unwrap();
    let limit = 1.0 / ev.cfl_rate(&s);
    assert!(matches!(ev.step(&s, 2.0 * limit), Err(LabError::Domain(_))));
    assert!(ev.step(&s, 0.5 * limit).is_ok());
}

#[test]
fn grid_must_be_uniform_from_origin() {
    let g = Arc::new(make_grid(128, 100.0, Mapping::LogR).unwrap());
    assert!(matches!(Evolver::new(g, 2, 1.0, Terms::default()), Err(LabError::Invalid(_))));
}

#[test]
fn circulation_does_not_act_on_radial_fields() {
    let a = run(&radial_config(0.0)).unwrap();
    let b = run(&radial_config(5.0)).unwrap();
    for (x, y) in a.xnorm_series.iter().zip(&b.xnorm_series) {
        assert!((x - y).abs() <= 1e-12 * x, "{x} {y}");
    }
}

fn step_doubling_ratio(n: usize, terms: Terms, dt: f64) -> f64 {
    let g = Arc::new(make_grid(n, 12.0, Mapping::UniformR).unwrap());
    let ev = Evolver::new(g, 6, 5.0, terms).unwrap();
    let s0 = ev.init_state(&spec(vec![bump(0, 1.0), bump(2, 0.9), bump(3, 1.1)], Some(0.5))).unwrap();
    let local = |dt: f64| {
        let one = ev.step(&s0, dt).unwrap();
        let half = ev.step(&s0, 0.5 * dt).unwrap();
        let two = ev.step(&half, 0.5 * dt).unwrap();
        distance(&one.field, &two.field)
    };
    local(dt) / local(0.5 * dt)
}

#[test]
fn explicit_part_is_third_order_locally() {
    let ratio = step_doubling_ratio(257, Terms { diffusion: false, cubic: true }, 0.01);
    assert!((ratio - 8.0).abs() < 0.1, "{ratio}");
}

#[test]
fn full_step_is_third_order_when_resolved() {
    let ratio = step_doubling_ratio(65, Terms::default(), 0.001);
    assert!(ratio > 6.0 && ratio < 10.0, "{ratio}");
}

#[test]
fn radial_decay_matches_generator_gap() {
    let ev = evolver(512, 16.0, 0, 0.0);
    let op = ev.generator(0).unwrap();
    let n = op.len() - 1;
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = op.diag[i];
        if i + 1 < n {
            m[(i, i + 1)] = op.upper[i];
            m[(i + 1, i)] = op.lower[i];
        }
    }
    let mut re: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.re).collect();
    re.sort_by(|a, b| b.total_cmp(a));
    assert!(re[0].abs() < 1e-3, "{}", re[0]);
    let gap = -re[1];
    assert!((gap - 1.0).abs() < 1e-2, "{gap}");

    let mu = run(&radial_config(0.0)).unwrap().fitted_mu;
    assert!((mu - 2.0 * gap).abs() <= 0.05 * 2.0 * gap, "mu {mu}, gap {gap}");

    let delta = delta_estimate(&make_grid(1025, 20.0, Mapping::UniformR).unwrap()).unwrap().delta;
    assert!(mu >= 2.0 * delta, "mu {mu}, delta {delta}");
}

#[test]
fn csv_is_reproducible() {
    let cfg = RunConfig {
        alpha: 2.0,
        init: PerturbationSpec { bumps: vec![bump(2, 1.0)], random_seed: Some(11), x_norm: Some(1e-2) },
        t_end: 0.5,
        dt: TimeStep::Named(evolve::AutoStep::Auto),
        stride: 2,
        grid: EvolveGrid { n: 129, r_max: 10.0, k_max: 4 },
        terms: Terms::default(),
    };
    let csv = |log: &TrajectoryLog| {
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    };
    let (a, b) = (csv(&run(&cfg).unwrap()), csv(&run(&cfg).unwrap()));
    assert_eq!(a, b);
    assert!(a.starts_with("t,J,Q,N,xnorm,mass,M1,M2,residual\n"));
}

#[test]
fn run_config_json_round_trip() {
    let text = r#"{"alpha": 1.0, "T": 2.0, "dt": "auto", "init": {"bumps": [{"k": 2}], "x_norm": 1e-3}, "grid": {"N": 128}}"#;
    let cfg: RunConfig = serde_json::from_str(text).unwrap();
    assert_eq!(cfg.grid.n, 128);
    assert_eq!(cfg.init.bumps[0], Bump { k: 2, amplitude: 1.0, width: 1.0, phase: 0.0 });
    let back: RunConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(back, cfg);
    assert!(serde_json::from_str::<RunConfig>(r#"{"alpha": 1.0, "T": 1.0, "bogus": 3}"#).is_err());
}
