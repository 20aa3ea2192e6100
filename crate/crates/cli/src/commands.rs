use std::collections::BTreeSet;
use std::io::Write;
use std::sync::Arc;

use arnold_lab::energy::{l1_distance, EntropyFunction};
use arnold_lab::evolve::fit_decay_rate;
use arnold_lab::grid::csv_number;
use arnold_lab::sampling::{random_field, seeded_rng};
use arnold_lab::spectral::SpectralReport;
use arnold_lab::verify::select;
use arnold_lab::*;
use serde_json::json;

use crate::config::{read_json, Settings};
use crate::output::Output;
use crate::{Cli, CliError, Command};

type Result<T> = std::result::Result<T, CliError>;

const GAUSSIAN_ONLY: &str = "this command is defined around the Gaussian vortex; drop --profile or pass gaussian";

pub fn dispatch(cli: &Cli) -> Result<u8> {
    let evolve = matches!(cli.command, Command::Evolve);
    let s = Settings::load(&cli.common, !evolve)?;
    match &cli.command {
        Command::Profile => profile(&s),
        Command::Hardy => hardy(&s),
        Command::Spectrum { operator, k } => {
            let op = operator.clone().or_else(|| s.file.operator.clone()).unwrap_or_else(|| "btilde1".into());
            spectrum(&s, &op, k.or(s.file.k).unwrap_or(0))
        }
        Command::Forms => forms(&s),
        Command::Energy => energy(&s),
        Command::Maximize { mass } => maximize(&s, mass.or(s.file.mass)),
        Command::Evolve => evolve_run(&s),
        Command::Verify { suite } => {
            let suite = suite.clone().or_else(|| s.file.suite.clone()).unwrap_or_else(|| "all".into());
            verify(&s, &suite)
        }
    }
}

fn is_gaussian(s: &Settings) -> bool {
    s.kind() == ProfileKind::Gaussian
}

fn radial_default(s: &Settings, gaussian: (usize, f64), other: (usize, f64)) -> (Mapping, usize, f64) {
    if is_gaussian(s) {
        (Mapping::UniformR, gaussian.0, gaussian.1)
    } else {
        (Mapping::LogR, other.0, other.1)
    }
}

fn write_row<W: Write>(w: &mut W, row: &[f64]) -> std::io::Result<()> {
    let cells: Vec<String> = row.iter().map(|v| csv_number(*v)).collect();
    writeln!(w, "{}", cells.join(","))
}

fn profile(s: &Settings) -> Result<u8> {
    let p = s.profile()?;
    let g = s.grid(radial_default(s, (1025, 20.0), (2048, 1e3)))?;
    // B and W exist only for the Gaussian
    let full = is_gaussian(s);
    let mut rows = Vec::with_capacity(g.len());
    for &r in g.nodes.iter().filter(|r| **r > 0.0) {
        let mut row = vec![r, p.omega_star(r), p.psi_prime(r), p.weight_a(r), p.potential_v(r)?];
        if full {
            row.extend([p.weight_b(r)?, p.potential_w(r)?]);
        }
        rows.push(row);
    }
    let mut out = Output::new("profile", s.out())?;
    out.csv("profile.csv", |w| {
        writeln!(w, "{}", if full { "r,omega,psi_prime,A,V,B,W" } else { "r,omega,psi_prime,A,V" })?;
        rows.iter().try_for_each(|row| write_row(w, row))
    })?;
    out.finish(&json!({
        "profile": p.label(),
        "kind": p.kind(),
        "kappa": p.kappa(),
        "amplitude": p.amplitude(),
        "mass": p.mass(),
        "decay_exponent": p.beta(),
        "hardy_ordering": vsign_hardy_check(&p, &g).to_string(),
        "grid": {"N": g.len(), "r_max": g.r_max, "mapping": g.mapping},
    }))?;
    Ok(0)
}

fn report_out(name: &'static str, s: &Settings, rep: &SpectralReport, extra: serde_json::Value) -> Result<u8> {
    let mut out = Output::new(name, s.out())?;
    out.csv(&format!("{name}_eigenfunctions.csv"), |w| rep.write_eigenfunctions_csv(w))?;
    let mut v = serde_json::to_value(rep)?;
    if let (Some(obj), serde_json::Value::Object(more)) = (v.as_object_mut(), extra) {
        obj.extend(more);
    }
    out.finish(&v)?;
    if rep.converged {
        Ok(0)
    } else {
        eprintln!("error: {} did not pass the resolution-doubling check", rep.operator);
        Ok(3)
    }
}

fn hardy(s: &Settings) -> Result<u8> {
    let p = s.profile()?;
    let g = s.grid((Mapping::LogR, 2048, 1e3))?;
    let rep = hardy_constant(&p, &g)?;
    report_out("hardy", s, &rep, json!({"profile": p.label()}))
}

fn spectrum(s: &Settings, op: &str, k: i32) -> Result<u8> {
    let p = s.profile()?;
    let rep = match op {
        "btilde1" => btilde1_spectrum(&p, &s.grid(radial_default(s, (1024, 20.0), (1024, 1e3)))?)?,
        "kernel" => kernel_index(&p, &s.grid(radial_default(s, (1025, 20.0), (1024, 1e3)))?)?,
        "lk" | "quasimode" if !is_gaussian(s) => return Err(CliError::Validation(GAUSSIAN_ONLY.into())),
        "lk" => lk_spectrum(k, &s.grid((Mapping::UniformR, 2048, 20.0))?)?,
        "quasimode" => quasimode_analysis(&s.grid((Mapping::UniformR, 4097, 24.0))?)?,
        other => {
            return Err(CliError::Usage(format!("unknown operator `{other}`, expected btilde1, lk, kernel or quasimode")))
        }
    };
    report_out("spectrum", s, &rep, json!({"profile": p.label()}))
}

fn forms(s: &Settings) -> Result<u8> {
    if !is_gaussian(s) {
        return Err(CliError::Validation(GAUSSIAN_ONLY.into()));
    }
    let gauss = VortexProfile::gaussian();
    let g = Arc::new(s.grid((Mapping::UniformR, 1025, 20.0))?);
    let seed = s.seed();
    let raw = random_field(&g, s.k_max(6), &mut seeded_rng(seed));
    let x1: BTreeSet<_> = [Constraint::Mass, Constraint::LinearFirst].into();
    let field = project_constraints(&raw, &x1, &gauss)?;
    let (ge, de) = rayon::join(|| gamma_estimate(&gauss, &g), || delta_estimate(&g));
    let (ge, de) = (ge?, de?);
    let values = form_values(&field, ge.gamma, de.delta)?;
    let mut out = Output::new("forms", s.out())?;
    out.csv("field.csv", |w| field.write_csv(w))?;
    out.finish(&json!({
        "seed": seed,
        "K_max": field.k_max,
        "forms": values,
        "gamma_estimate": ge,
        "delta_estimate": de,
    }))?;
    Ok(0)
}

fn energy(s: &Settings) -> Result<u8> {
    let p = s.profile()?;
    let g = Arc::new(s.grid(radial_default(s, (4097, 24.0), (8192, 1e4)))?);
    let w = g.map(|r| p.omega_star(r));
    let field = PolarField::radial(g.clone(), &w, 0);
    let radial = energy_radial(&w, &g);
    let via_h = energy_via_h(&ConstraintProfile::from_profile(&p))?;
    let modes = energy_modes(&field);
    let gap = log_hls_gap(&field)?;
    let cumulative = g.cumulative(&w);
    let mut out = Output::new("energy", s.out())?;
    out.csv("energy.csv", |w_| {
        writeln!(w_, "r,omega,enclosed_mass")?;
        g.nodes.iter().zip(&w).zip(&cumulative).try_for_each(|((r, o), c)| write_row(w_, &[*r, *o, 2.0 * std::f64::consts::PI * c]))
    })?;
    out.finish(&json!({
        "profile": p.label(),
        "mass": p.mass(),
        "energy_radial": radial,
        "energy_via_h": via_h,
        "energy_modes": modes,
        "max_relative_disagreement": ((radial - via_h).abs().max((radial - modes).abs()).max((via_h - modes).abs())) / via_h.abs(),
        "log_hls_gap": gap,
    }))?;
    Ok(0)
}

fn maximize(s: &Settings, mass: Option<f64>) -> Result<u8> {
    let p = s.profile()?;
    let entropy = match s.kind() {
        ProfileKind::Custom => EntropyFunction::from_profile(&p),
        kind => entropy_catalog(kind, p.kappa().unwrap_or(0.0))?,
    };
    let m = mass.unwrap_or_else(|| p.mass());
    let g = s.grid(radial_default(s, (1025, 20.0), (1024, 1e3)))?;
    let res = maximize_free_energy(&entropy, m, &g, s.seed())?;
    let distance = if (m - p.mass()).abs() <= 1e-12 * m {
        Some(l1_distance(&res.profile, &g.map(|r| p.omega_star(r)), &g) / m)
    } else {
        None
    };
    let mut out = Output::new("maximize", s.out())?;
    out.csv("maximizer.csv", |w| res.write_csv(&g, w))?;
    out.finish(&json!({
        "profile": p.label(),
        "seed": s.seed(),
        "maximizer": res,
        "l1_distance_to_profile_over_mass": distance,
    }))?;
    if res.converged {
        Ok(0)
    } else {
        eprintln!("error: the ascent stopped before converging");
        Ok(3)
    }
}

fn evolve_run(s: &Settings) -> Result<u8> {
    let path = s.flags.config.as_ref().ok_or_else(|| CliError::Usage("evolve needs --config run.json".into()))?;
    let mut cfg: RunConfig = read_json(path)?;
    let f = &s.flags;
    cfg.grid.n = f.n.unwrap_or(cfg.grid.n);
    cfg.grid.r_max = f.rmax.unwrap_or(cfg.grid.r_max);
    cfg.grid.k_max = f.kmax.unwrap_or(cfg.grid.k_max);
    if f.seed.is_some() {
        cfg.init.random_seed = f.seed;
    }
    let log = run(&cfg)?;
    let mut out = Output::new("evolve", f.out.clone())?;
    out.csv("trajectory.csv", |w| log.write_csv(w))?;
    let last = log.times.len() - 1;
    out.finish(&json!({
        "config": cfg,
        "fitted_mu": log.fitted_mu,
        "fitted_mu_full_run": fit_decay_rate(&log.times, &log.xnorm_series, 0.0),
        "dt": log.dt,
        "steps": log.steps,
        "max_residual": log.max_residual,
        "max_moment": log.max_moment(),
        "J_initial": log.j_series[0],
        "J_final": log.j_series[last],
        "xnorm_initial": log.xnorm_series[0],
        "xnorm_final": log.xnorm_series[last],
    }))?;
    Ok(0)
}

fn verify(s: &Settings, suite: &str) -> Result<u8> {
    let chosen = select(suite).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut results = Vec::new();
    for c in chosen {
        let r = c.run();
        eprintln!("{r}");
        results.push(r);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    let mut out = Output::new("verify", s.out())?;
    out.csv("verify.csv", |w| {
        writeln!(w, "id,name,passed")?;
        results.iter().try_for_each(|r| writeln!(w, "{},{},{}", r.id, r.slug, r.passed))
    })?;
    out.finish(&json!({"suite": suite, "passed": failed == 0, "failed": failed, "checks": results}))?;
    Ok(if failed == 0 { 0 } else { 2 })
}
