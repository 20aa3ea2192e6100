//! Perturbations of the Oseen vortex in self-similar variables.
//!
//! The scheme works on a uniform grid starting at the origin, with finite-volume
//! cell volumes `V_i` as the discrete measure `r dr`. Every quantity that enters
//! the conservation laws and the Lyapunov identity (moments, `J`, the stream
//! function, the transport of the background) is built on that same measure, so
//! the semi-discrete system conserves mass and first moments exactly and the
//! linear advection leaves `J` unchanged.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::grid::{csv_number, make_grid, Mapping, PolarField, RadialGrid};
use crate::sampling::{random_field, seeded_rng};
use crate::tridiag::{ThomasFactor, Tridiagonal};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Norm growth factor that aborts a run.
pub const BLOWUP_FACTOR: f64 = 1e3;

/// Perturbation evolved around the vortex of circulation `alpha`.
#[derive(Debug, Clone)]
pub struct EvolState {
    pub field: PolarField,
    pub alpha: f64,
    pub time: f64,
    pub stream: PolarField,
}

/// Single localized mode `amplitude · (r/width)^k e^{-r²/(2 width²)} e^{i(kθ + phase)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub k: usize,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default)]
    pub phase: f64,
}

fn one() -> f64 {
    1.0
}

/// Initial perturbation: a sum of bumps and an optional seeded random field,
/// projected onto the constrained space and scaled to the requested norm.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    #[serde(default)]
    pub bumps: Vec<Bump>,
    #[serde(default)]
    pub random_seed: Option<u64>,
    /// Target `‖ω̃₀‖_X`; the unscaled projection is kept when absent.
    #[serde(default)]
    pub x_norm: Option<f64>,
}

/// Terms of the perturbation equation that can be switched off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Terms {
    #[serde(default = "yes")]
    pub diffusion: bool,
    #[serde(default = "yes")]
    pub cubic: bool,
}

fn yes() -> bool {
    true
}

impl Default for Terms {
    fn default() -> Self {
        Self { diffusion: true, cubic: true }
    }
}

/// Discretized perturbation equation around `α` times the unit-mass Oseen vortex.
pub struct Evolver {
    pub grid: Arc<RadialGrid>,
    pub k_max: usize,
    pub alpha: f64,
    pub terms: Terms,
    vols: Vec<f64>,
    /// Discrete weight `A_h` of the X-norm.
    a_h: Vec<f64>,
    /// `ω̄′/r` of the unit-mass vortex.
    wbar_slope: Vec<f64>,
    ops: Vec<Tridiagonal>,
    n_theta: usize,
}

/// Scalar diagnostics of one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub xnorm: f64,
    pub mass: f64,
    #[serde(rename = "M1")]
    pub m1: f64,
    #[serde(rename = "M2")]
    pub m2: f64,
}

type Modes = Vec<Vec<Complex64>>;

impl Evolver {
    pub fn new(grid: Arc<RadialGrid>, k_max: usize, alpha: f64, terms: Terms) -> Result<Self> {
        if grid.mapping != Mapping::UniformR || grid.nodes[0] != 0.0 {
            return invalid("the evolution needs a uniform grid starting at the origin");
        }
        if grid.len() < 8 {
            return invalid("the evolution needs at least 8 radial nodes");
        }
        if !alpha.is_finite() {
            return invalid("circulation must be finite");
        }
        let r = &grid.nodes;
        let n = r.len();
        let h = r[1] - r[0];
        let mut vols: Vec<f64> = r.iter().map(|&x| x * h).collect();
        vols[0] = h * h / 8.0;
        let wbar_prime: Vec<f64> = r.iter().map(|&x| -x / (8.0 * PI) * (-x * x / 4.0).exp()).collect();
        let wbar_slope: Vec<f64> = r.iter().map(|&x| -(-x * x / 4.0).exp() / (8.0 * PI)).collect();
        let mut ev = Self {
            grid: grid.clone(),
            k_max,
            alpha,
            terms,
            vols,
            a_h: vec![1.0; n],
            wbar_slope,
            ops: Vec::new(),
            n_theta: (3 * k_max + 1).next_power_of_two().max(4),
        };
        // A_h = B_{1,h}[ω̄′]/ω̄′ makes the background stream consistent with the discrete Biot–Savart law
        let b1 = ev.stream_mode(1, &wbar_prime.iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>());
        for i in 1..n {
            let a = -b1[i].re / wbar_prime[i];
            ev.a_h[i] = if a.is_finite() && a > 0.0 { a } else { f64::MAX };
        }
        ev.ops = (0..=k_max).map(|k| ev.operator(k)).collect();
        Ok(ev)
    }

    fn first(k: usize) -> usize {
        if k == 0 {
            0
        } else {
            1
        }
    }

    /// `𝓛_k = Δ_k + ½r∂_r + 1` in flux form on the cells, zero rows at the fixed nodes.
    fn operator(&self, k: usize) -> Tridiagonal {
        let r = &self.grid.nodes;
        let n = r.len();
        let h = r[1] - r[0];
        let (mut lo, mut di, mut up) = (vec![0.0; n - 1], vec![0.0; n], vec![0.0; n - 1]);
        let k2 = (k * k) as f64;
        for i in Self::first(k)..n - 1 {
            let v = self.vols[i];
            let rp = 0.5 * (r[i] + r[i + 1]);
            // drift flux ½·(r²ω) at the faces; the origin face of the radial mode uses r_{1/2}²
            let (dr_up, dr_self_right) = if k == 0 && i == 0 {
                (0.25 * rp * rp, 0.25 * rp * rp)
            } else {
                (0.25 * r[i + 1] * r[i + 1], 0.25 * r[i] * r[i])
            };
            up[i] = (rp / h + dr_up) / v;
            di[i] = (-rp / h + dr_self_right) / v;
            if i > 0 {
                let rm = 0.5 * (r[i - 1] + r[i]);
                let (dr_low, dr_self_left) =
                    if k == 0 && i == 1 { (0.25 * rm * rm, 0.25 * rm * rm) } else { (0.25 * r[i - 1] * r[i - 1], 0.25 * r[i] * r[i]) };
                lo[i - 1] = (rm / h - dr_low) / v;
                di[i] += (-rm / h - dr_self_left) / v;
                di[i] -= k2 / (r[i] * r[i]);
            }
        }
        if k > 0 {
            // the origin node is fixed; drop its coupling
            lo[0] = 0.0;
        }
        Tridiagonal::new(lo, di, up)
    }

    /// The discrete linear generator of mode `k`.
    pub fn generator(&self, k: usize) -> Option<&Tridiagonal> {
        self.ops.get(k)
    }

    /// Cell volumes, the discrete `r dr`.
    pub fn volumes(&self) -> &[f64] {
        &self.vols
    }

    /// Discrete weight of the X-norm.
    pub fn weight(&self) -> &[f64] {
        &self.a_h
    }

    /// `ψ_k` with `Δψ = ω`, from the discrete Green's function on the cells.
    fn stream_mode(&self, k: usize, w: &[Complex64]) -> Vec<Complex64> {
        let r = &self.grid.nodes;
        let v = &self.vols;
        let n = r.len();
        let mut out = vec![ZERO; n];
        if k == 0 {
            let h = r[1] - r[0];
            let mut tail = vec![ZERO; n + 1];
            for i in (1..n).rev() {
                tail[i] = tail[i + 1] + w[i] * (v[i] * r[i].ln());
            }
            let mut inner = w[0] * v[0];
            out[0] = w[0] * (v[0] * ((0.5 * h).ln() - 0.25)) + tail[1];
            for i in 1..n {
                inner += w[i] * v[i];
                out[i] = inner * r[i].ln() + tail[i + 1];
            }
        } else {
            let m = k as i32;
            let mut tail = vec![ZERO; n + 1];
            for i in (1..n).rev() {
                tail[i] = tail[i + 1] + w[i] * (v[i] * r[i].powi(-m));
            }
            let mut inner = ZERO;
            let c = -1.0 / (2.0 * k as f64);
            for i in 1..n {
                inner += w[i] * (v[i] * r[i].powi(m));
                out[i] = (inner * r[i].powi(-m) + tail[i + 1] * r[i].powi(m)) * c;
            }
        }
        out
    }

    fn streams(&self, w: &Modes) -> Modes {
        (0..=self.k_max).into_par_iter().map(|k| self.stream_mode(k, &w[k])).collect()
    }

    fn to_field(&self, w: &Modes) -> PolarField {
        let mut f = PolarField::zeros(self.grid.clone(), self.k_max);
        for (k, v) in w.iter().enumerate() {
            f.set_mode(k as i32, v.clone());
        }
        f
    }

    fn from_field(&self, f: &PolarField) -> Modes {
        (0..=self.k_max)
            .map(|k| {
                let mut v = f.mode(k as i32).to_vec();
                let n = v.len();
                v[n - 1] = ZERO;
                if k > 0 {
                    v[0] = ZERO;
                }
                if k == 0 {
                    v.iter_mut().for_each(|z| z.im = 0.0);
                }
                v
            })
            .collect()
    }

    /// `{ψ, ω}` with `Δψ = ω`; the radial mode is kept in flux form so that it
    /// integrates to zero on the cells.
    fn bracket(&self, w: &Modes, psi: &Modes) -> Modes {
        let g = &self.grid;
        let n = g.len();
        let deriv = |m: &Modes| -> Modes {
            m.par_iter().enumerate().map(|(k, v)| g.derivative_complex(v, Some(k as i32))).collect()
        };
        let ang = |m: &Modes| -> Modes {
            m.iter()
                .enumerate()
                .map(|(k, v)| v.iter().map(|z| z * Complex64::new(0.0, k as f64)).collect())
                .collect()
        };
        let nt = self.n_theta;
        let phys = |m: &Modes| self.to_field(m).to_collocation(nt);
        let (w_r, w_t) = (phys(&deriv(w)), phys(&ang(w)));
        let (p_r, p_t) = (phys(&deriv(psi)), phys(&ang(psi)));
        let w_c = phys(w);
        let r = &g.nodes;
        let mut prod = vec![vec![0.0; n]; nt];
        let mut flux = vec![0.0; n];
        for j in 0..nt {
            for i in 1..n {
                prod[j][i] = (p_r[j][i] * w_t[j][i] - p_t[j][i] * w_r[j][i]) / r[i];
                flux[i] -= p_t[j][i] * w_c[j][i] / r[i];
            }
        }
        flux.iter_mut().for_each(|q| *q /= nt as f64);
        let mut out = self.from_field(&PolarField::from_collocation(g.clone(), &prod, self.k_max));
        let face = |i: usize| 0.5 * (r[i] + r[i + 1]) * 0.5 * (flux[i] + flux[i + 1]);
        for i in 0..n - 1 {
            let right = face(i);
            let left = if i == 0 { 0.0 } else { face(i - 1) };
            out[0][i] = Complex64::new((right - left) / self.vols[i], 0.0);
        }
        out[0][n - 1] = ZERO;
        out
    }

    /// Right-hand side without diffusion: linear transport by and of the vortex, minus the bracket.
    fn advection(&self, w: &Modes, psi: &Modes, nl: Option<&Modes>) -> Modes {
        let n = self.grid.len();
        (0..=self.k_max)
            .map(|k| {
                let mut f = vec![ZERO; n];
                for i in Self::first(k)..n - 1 {
                    if k > 0 {
                        let c = Complex64::new(0.0, self.alpha * k as f64 * self.wbar_slope[i]);
                        f[i] = c * (w[k][i] * self.a_h[i] + psi[k][i]);
                    }
                    if let Some(nl) = nl {
                        f[i] -= nl[k][i];
                    }
                }
                f
            })
            .collect()
    }

    fn rhs(&self, w: &Modes) -> (Modes, Modes, Option<Modes>) {
        let psi = self.streams(w);
        let nl = self.terms.cubic.then(|| self.bracket(w, &psi));
        let f = self.advection(w, &psi, nl.as_ref());
        (f, psi, nl)
    }

    fn factors(&self, dt: f64) -> Vec<(ThomasFactor, Tridiagonal)> {
        self.ops
            .iter()
            .map(|op| {
                let s = if self.terms.diffusion { 0.5 * dt } else { 0.0 };
                let scale = |v: &[f64], c: f64, add: f64| v.iter().map(|x| c * x + add).collect::<Vec<_>>();
                let implicit = Tridiagonal::new(scale(&op.lower, -s, 0.0), scale(&op.diag, -s, 1.0), scale(&op.upper, -s, 0.0));
                let explicit = Tridiagonal::new(scale(&op.lower, s, 0.0), scale(&op.diag, s, 1.0), scale(&op.upper, s, 0.0));
                (implicit.factor(), explicit)
            })
            .collect()
    }

    fn imex(&self, w: &Modes, force: &Modes, dt: f64, facs: &[(ThomasFactor, Tridiagonal)]) -> Modes {
        (0..=self.k_max)
            .into_par_iter()
            .map(|k| {
                let (fac, expl) = &facs[k];
                let mut rhs = expl.apply_complex(&w[k]);
                for (a, b) in rhs.iter_mut().zip(&force[k]) {
                    *a += b * dt;
                }
                let n = rhs.len();
                rhs[n - 1] = ZERO;
                if k > 0 {
                    rhs[0] = ZERO;
                }
                let mut out = fac.solve_complex(&rhs);
                if k == 0 {
                    out.iter_mut().for_each(|z| z.im = 0.0);
                }
                out
            })
            .collect()
    }

    /// Largest advective rate `|u_r|/Δr + K|u_θ|/r` of the total flow.
    pub fn cfl_rate(&self, state: &EvolState) -> f64 {
        let g = &self.grid;
        let r = &g.nodes;
        let h = r[1] - r[0];
        let w = self.from_field(&state.field);
        let psi = self.streams(&w);
        let mut u = 0.0f64;
        for i in 1..g.len() {
            let mut ur = 0.0;
            let mut ut = self.alpha * (self.a_h[i] * self.wbar_slope[i] * r[i]).abs().min(1e300);
            for (k, p) in psi.iter().enumerate() {
                let c = if k == 0 { 1.0 } else { 2.0 };
                ur += c * k as f64 * p[i].norm() / r[i];
                if i + 1 < g.len() {
                    ut += c * ((p[i + 1] - p[i - 1]) / (2.0 * h)).norm();
                }
            }
            u = u.max(ur / h + self.k_max.max(1) as f64 * ut / r[i]);
        }
        u
    }

    /// `min(0.25 Δr², 0.5/rate)`.
    pub fn auto_dt(&self, state: &EvolState) -> f64 {
        let h = self.grid.nodes[1];
        let rate = self.cfl_rate(state);
        (0.25 * h * h).min(if rate > 0.0 { 0.5 / rate } else { f64::INFINITY })
    }

    /// Build the initial perturbation, project it onto the constrained space and scale it.
    pub fn init_state(&self, spec: &PerturbationSpec) -> Result<EvolState> {
        let g = &self.grid;
        let mut field = PolarField::zeros(g.clone(), self.k_max);
        for b in &spec.bumps {
            if b.k > self.k_max {
                return invalid(format!("bump in mode {} exceeds the angular truncation {}", b.k, self.k_max));
            }
            if !(b.width > 0.0 && b.width < 2.0) {
                return Err(LabError::Domain(format!(
                    "bump width {} gives tails outside the weighted space (need 0 < width < 2)",
                    b.width
                )));
            }
            let phase = Complex64::from_polar(b.amplitude, if b.k == 0 { 0.0 } else { b.phase });
            let mut v = field.mode(b.k as i32).to_vec();
            for (z, &r) in v.iter_mut().zip(&g.nodes) {
                let x = r / b.width;
                *z += phase * x.powi(b.k as i32) * (-0.5 * x * x).exp();
            }
            field.set_mode(b.k as i32, v);
        }
        if let Some(seed) = spec.random_seed {
            field.add_scaled(&random_field(g, self.k_max, &mut seeded_rng(seed)), 1.0);
        }
        let mut w = self.from_field(&field);
        self.project(&mut w);
        let mut state = self.state_from(w, 0.0);
        if let Some(target) = spec.x_norm {
            let x = self.xnorm(&self.from_field(&state.field));
            if x > 0.0 {
                let s = target / x.sqrt();
                state.field.scale(s);
                state.stream.scale(s);
            }
        }
        Ok(state)
    }

    /// X-orthogonal removal of the mass and both first moments on the cells.
    fn project(&self, w: &mut Modes) {
        let r = &self.grid.nodes;
        let v = &self.vols;
        let remove = |mode: &mut Vec<Complex64>, gen: &dyn Fn(usize) -> f64, start: usize| {
            let n = mode.len();
            let (mut num, mut den) = (ZERO, 0.0);
            for i in start..n - 1 {
                num += mode[i] * (v[i] * gen(i));
                den += v[i] * gen(i) * gen(i) / self.a_h[i];
            }
            let c = num / den;
            for i in start..n - 1 {
                mode[i] -= c * (gen(i) / self.a_h[i]);
            }
        };
        remove(&mut w[0], &|_| 1.0, 0);
        if self.k_max >= 1 {
            remove(&mut w[1], &|i| r[i], 1);
        }
    }

    fn state_from(&self, w: Modes, time: f64) -> EvolState {
        let psi = self.streams(&w);
        EvolState { field: self.to_field(&w), alpha: self.alpha, time, stream: self.to_field(&psi) }
    }

    /// `2π Σ_k Σ_i V_i Re(f_k conj g_k)` over all modes `|k| ≤ K`.
    fn inner(&self, f: &Modes, g: &Modes) -> f64 {
        2.0 * PI
            * f.iter()
                .zip(g)
                .enumerate()
                .map(|(k, (a, b))| {
                    let c = if k == 0 { 1.0 } else { 2.0 };
                    c * a.iter().zip(b).zip(&self.vols).map(|((x, y), v)| v * (x * y.conj()).re).sum::<f64>()
                })
                .sum::<f64>()
    }

    fn weighted(&self, w: &Modes) -> Modes {
        w.iter().map(|v| v.iter().zip(&self.a_h).map(|(z, a)| if z.norm_sqr() == 0.0 { ZERO } else { z * a }).collect()).collect()
    }

    fn xnorm(&self, w: &Modes) -> f64 {
        self.inner(&self.weighted(w), w)
    }

    /// `J`, `Q`, `N` and the moments, all in the discrete inner product.
    ///
    /// `Q = −⟨Aω+ψ, 𝓛ω⟩` and `N = ⟨Aω+ψ, {ψ,ω}⟩`, so that `dJ/dt = −Q − N`
    /// holds exactly for the semi-discrete system.
    pub fn diagnostics(&self, state: &EvolState) -> Diagnostics {
        let w = self.from_field(&state.field);
        let psi = self.streams(&w);
        let aw = self.weighted(&w);
        let dual: Modes = aw.iter().zip(&psi).map(|(a, p)| a.iter().zip(p).map(|(x, y)| x + y).collect()).collect();
        let j = 0.5 * self.inner(&dual, &w);
        let q = if self.terms.diffusion {
            let lw: Modes = self.ops.iter().zip(&w).map(|(op, v)| op.apply_complex(v)).collect();
            -self.inner(&dual, &lw)
        } else {
            0.0
        };
        let n = if self.terms.cubic { self.inner(&dual, &self.bracket(&w, &psi)) } else { 0.0 };
        let r = &self.grid.nodes;
        let mass = 2.0 * PI * w[0].iter().zip(&self.vols).map(|(z, v)| z.re * v).sum::<f64>();
        let first = if self.k_max >= 1 {
            w[1].iter().zip(&self.vols).zip(r).map(|((z, v), x)| z * (v * x)).sum::<Complex64>() * (2.0 * PI)
        } else {
            ZERO
        };
        Diagnostics { j, q, n, xnorm: self.inner(&aw, &w), mass, m1: first.re, m2: -first.im }
    }

    /// One IMEX step: Crank–Nicolson for `𝓛`, Heun for the transport and bracket terms.
    pub fn step(&self, state: &EvolState, dt: f64) -> Result<EvolState> {
        let facs = self.factors(dt);
        self.step_with(state, dt, &facs)
    }

    fn step_with(&self, state: &EvolState, dt: f64, facs: &[(ThomasFactor, Tridiagonal)]) -> Result<EvolState> {
        if !(dt > 0.0) {
            return invalid("time step must be positive");
        }
        let rate = self.cfl_rate(state);
        if dt * rate > 1.0 {
            return Err(LabError::Domain(format!(
                "time step {dt:.3e} violates the advective limit {:.3e}",
                1.0 / rate
            )));
        }
        let w = self.from_field(&state.field);
        let (f0, _, _) = self.rhs(&w);
        let stage = self.imex(&w, &f0, dt, facs);
        let (f1, _, _) = self.rhs(&stage);
        let avg: Modes =
            f0.iter().zip(&f1).map(|(a, b)| a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()).collect();
        let next = self.imex(&w, &avg, dt, facs);
        let out = self.state_from(next, state.time + dt);
        if !out.field.is_finite() {
            return Err(LabError::Breakdown(format!("non-finite vorticity at t = {:.6}", out.time)));
        }
        Ok(out)
    }
}

/// Time step choice of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeStep {
    Fixed(f64),
    Named(AutoStep),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoStep {
    Auto,
}

impl Default for TimeStep {
    fn default() -> Self {
        TimeStep::Named(AutoStep::Auto)
    }
}

/// Radial and angular resolution of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveGrid {
    #[serde(rename = "N", default = "default_n")]
    pub n: usize,
    #[serde(default = "default_rmax")]
    pub r_max: f64,
    #[serde(rename = "K_max", alias = "k_max", default = "default_kmax")]
    pub k_max: usize,
}

fn default_n() -> usize {
    512
}
fn default_rmax() -> f64 {
    16.0
}
fn default_kmax() -> usize {
    16
}

impl Default for EvolveGrid {
    fn default() -> Self {
        Self { n: default_n(), r_max: default_rmax(), k_max: default_kmax() }
    }
}

/// Configuration of [`run`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: f64,
    #[serde(default)]
    pub init: PerturbationSpec,
    #[serde(rename = "T")]
    pub t_end: f64,
    #[serde(default)]
    pub dt: TimeStep,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default)]
    pub grid: EvolveGrid,
    #[serde(default)]
    pub terms: Terms,
}

fn default_stride() -> usize {
    1
}

/// Time series recorded along a run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct TrajectoryLog {
    pub times: Vec<f64>,
    #[serde(rename = "J_series")]
    pub j_series: Vec<f64>,
    #[serde(rename = "Q_series")]
    pub q_series: Vec<f64>,
    #[serde(rename = "N_series")]
    pub n_series: Vec<f64>,
    pub xnorm_series: Vec<f64>,
    pub mass_series: Vec<f64>,
    pub m1_series: Vec<f64>,
    pub m2_series: Vec<f64>,
    /// `|ΔJ/Δt + Q + N|` of the step ending at each recorded time, with `Q + N` averaged over the step.
    pub identity_residual: Vec<f64>,
    /// Decay rate of the X-norm squared, fitted over the second half of the run.
    pub fitted_mu: f64,
    pub dt: f64,
    pub steps: usize,
    /// Largest step residual over the whole run, recorded or not.
    pub max_residual: f64,
}

impl TrajectoryLog {
    /// Largest `|mass|`, `|M1|`, `|M2|` along the run.
    pub fn max_moment(&self) -> f64 {
        self.mass_series
            .iter()
            .chain(&self.m1_series)
            .chain(&self.m2_series)
            .fold(0.0f64, |a, b| a.max(b.abs()))
    }

    /// CSV with header `t,J,Q,N,xnorm,mass,M1,M2,residual` at 12 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,J,Q,N,xnorm,mass,M1,M2,residual")?;
        for i in 0..self.times.len() {
            let row = [
                self.times[i],
                self.j_series[i],
                self.q_series[i],
                self.n_series[i],
                self.xnorm_series[i],
                self.mass_series[i],
                self.m1_series[i],
                self.m2_series[i],
                self.identity_residual[i],
            ];
            let cells: Vec<String> = row.iter().map(|v| csv_number(*v)).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    fn push(&mut self, t: f64, d: &Diagnostics, residual: f64) {
        self.times.push(t);
        self.j_series.push(d.j);
        self.q_series.push(d.q);
        self.n_series.push(d.n);
        self.xnorm_series.push(d.xnorm);
        self.mass_series.push(d.mass);
        self.m1_series.push(d.m1);
        self.m2_series.push(d.m2);
        self.identity_residual.push(residual);
    }
}

/// Least-squares decay rate `μ` of `xnorm ≈ C e^{−μt}` over `t ≥ t_from`.
pub fn fit_decay_rate(times: &[f64], xnorm: &[f64], t_from: f64) -> f64 {
    let pts: Vec<(f64, f64)> =
        times.iter().zip(xnorm).filter(|(t, x)| **t >= t_from && **x > 0.0).map(|(t, x)| (*t, x.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let (st, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + t, b + y));
    let (mt, my) = (st / n, sy / n);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + (t - mt) * (y - my), b + (t - mt) * (t - mt)));
    -num / den
}

/// Integrate to `T` and record the Lyapunov diagnostics.
pub fn run(config: &RunConfig) -> Result<TrajectoryLog> {
    if !(config.t_end > 0.0) || config.stride == 0 {
        return invalid("run needs T > 0 and stride >= 1");
    }
    let gs = config.grid;
    let grid = Arc::new(make_grid(gs.n, gs.r_max, Mapping::UniformR)?);
    let ev = Evolver::new(grid, gs.k_max, config.alpha, config.terms)?;
    let mut state = ev.init_state(&config.init)?;
    let dt0 = match config.dt {
        TimeStep::Fixed(dt) => dt,
        TimeStep::Named(AutoStep::Auto) => ev.auto_dt(&state),
    };
    if !(dt0 > 0.0) {
        return invalid("time step must be positive");
    }
    let steps = (config.t_end / dt0).round().max(1.0) as usize;
    let dt = config.t_end / steps as f64;
    let facs = ev.factors(dt);
    let mut log = TrajectoryLog { dt, steps, ..Default::default() };
    let mut d = ev.diagnostics(&state);
    let x0 = d.xnorm;
    log.push(0.0, &d, 0.0);
    for s in 1..=steps {
        let next = ev.step_with(&state, dt, &facs)?;
        let dn = ev.diagnostics(&next);
        let residual = ((dn.j - d.j) / dt + 0.5 * (d.q + d.n + dn.q + dn.n)).abs();
        log.max_residual = log.max_residual.max(residual);
        if dn.xnorm > BLOWUP_FACTOR * BLOWUP_FACTOR * x0 || !dn.xnorm.is_finite() {
            return Err(LabError::Breakdown(format!("perturbation norm blew up at t = {:.6}", next.time)));
        }
        if s % config.stride == 0 || s == steps {
            log.push(next.time, &dn, residual);
        }
        state = next;
        d = dn;
    }
    log.fitted_mu = fit_decay_rate(&log.times, &log.xnorm_series, 0.5 * config.t_end);
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn evolver(alpha: f64) -> Evolver {
        let g = Arc::new(make_grid(257, 12.0, Mapping::UniformR).unwrap());
        Evolver::new(g, 6, alpha, Terms::default()).unwrap()
    }

    #[test]
    fn discrete_weight_tracks_the_continuous_one() {
        let ev = evolver(1.0);
        let gauss = crate::profiles::VortexProfile::gaussian();
        for (i, &r) in ev.grid.nodes.iter().enumerate().take(150).skip(1) {
            let a = gauss.weight_a(r);
            assert!((ev.a_h[i] - a).abs() < 2e-3 * a, "r={r} {} {a}", ev.a_h[i]);
        }
    }

    #[test]
    fn first_moment_is_a_left_eigenvector_of_the_diffusion() {
        let ev = evolver(0.0);
        let op = &ev.ops[1];
        let r = &ev.grid.nodes;
        let n = r.len();
        let l: Vec<f64> = (0..n).map(|i| ev.vols[i] * r[i]).collect();
        // ℓᵀ𝓛 = −½ℓᵀ on the interior columns
        for j in 1..n - 3 {
            let mut s = l[j] * op.diag[j];
            s += l[j - 1] * op.upper[j - 1];
            s += l[j + 1] * op.lower[j];
            assert!((s + 0.5 * l[j]).abs() < 1e-12 * l[j].max(1.0), "column {j}: {s} vs {}", -0.5 * l[j]);
        }
    }

    #[test]
    fn zero_state_is_a_fixed_point() {
        let ev = evolver(1.0);
        let s = ev.init_state(&PerturbationSpec::default()).unwrap();
        let next = ev.step(&s, 0.01).unwrap();
        assert!(next.field.iter_modes().all(|(_, v)| v.iter().all(|z| z.norm() == 0.0)));
    }
}
