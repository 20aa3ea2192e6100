//! Kinetic energy, rearrangement, entropies and free-energy maximization.

use std::f64::consts::{LN_2, PI};
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, LabError, Result};
use crate::grid::{csv_number, simpson_weights, PolarField, RadialGrid};
use crate::profiles::{algebraic_psi, ProfileKind, VortexProfile};
use crate::special::{ein, EULER_GAMMA};
use crate::spectral::bk_apply;

/// Values below this are treated as zero by [`rearrange`]; anything more negative is rejected.
pub const NEGATIVE_SLACK: f64 = 1e-10;

/// Minimum number of angles sampled by [`rearrange`].
pub const REARRANGE_ANGLES: usize = 512;

/// `E = −π ∬ log max(r,s) ω(r) ω(s) r s dr ds` for a radial field.
pub fn energy_radial(field: &[f64], grid: &RadialGrid) -> f64 {
    let c = grid.cumulative(field);
    let integrand: Vec<f64> = grid
        .nodes
        .iter()
        .zip(field)
        .zip(&c)
        .map(|((&r, &w), &ci)| if r > 0.0 { w * r.ln() * ci } else { 0.0 })
        .collect();
    -2.0 * PI * grid.integrate(&integrand)
}

/// Radial stream function `ψ(r) = ∫ log max(r,s) ω(s) s ds`, obtained by
/// integrating `ψ′ = C(r)/r` inward from `r_max`.
pub fn radial_stream(field: &[f64], grid: &RadialGrid) -> Vec<f64> {
    let c = grid.cumulative(field);
    let total = c[c.len() - 1];
    let slope: Vec<f64> = grid
        .nodes
        .iter()
        .zip(&c)
        .enumerate()
        .map(|(i, (&r, &ci))| if r > 0.0 { ci / (r * r) } else { 0.5 * field[i] })
        .collect();
    let back = grid.cumulative_from_end(&slope);
    back.iter().map(|b| grid.r_max.ln() * total - b).collect()
}

/// Apply `B_k` to a complex mode.
pub fn bk_apply_complex(k: i32, f: &[Complex64], grid: &RadialGrid) -> Result<Vec<Complex64>> {
    let re: Vec<f64> = f.iter().map(|z| z.re).collect();
    let im: Vec<f64> = f.iter().map(|z| z.im).collect();
    let (a, b) = (bk_apply(k, &re, grid)?, bk_apply(k, &im, grid)?);
    Ok(a.into_iter().zip(b).map(|(x, y)| Complex64::new(x, y)).collect())
}

/// Energy of a field from its angular modes.
pub fn energy_modes(field: &PolarField) -> f64 {
    let g = &field.grid;
    let radial: Vec<f64> = field.mode(0).iter().map(|z| z.re).collect();
    let mut e = energy_radial(&radial, g);
    for (k, v) in field.iter_modes() {
        if k == 0 || v.iter().all(|z| z.norm_sqr() == 0.0) {
            continue;
        }
        let b = bk_apply_complex(k, v, g).expect("k != 0");
        e += PI * g.integrate(&b.iter().zip(v).map(|(x, y)| (x * y.conj()).re).collect::<Vec<_>>());
    }
    e
}

fn angular_points(k_max: usize) -> usize {
    (4 * k_max + 4).next_power_of_two().max(32)
}

/// Ring area around each node and the fraction of that area lying inside the node radius.
fn ring_cells(grid: &RadialGrid) -> Vec<(f64, f64)> {
    let r = &grid.nodes;
    let n = r.len();
    (0..n)
        .map(|i| {
            let outer = if i + 1 < n { 0.5 * (r[i] + r[i + 1]) } else { r[i] };
            let inner = if i == 0 { 0.0 } else { 0.5 * (r[i - 1] + r[i]) };
            let area = PI * (outer * outer - inner * inner);
            let frac = if area > 0.0 { PI * (r[i] * r[i] - inner * inner) / area } else { 0.0 };
            (area, frac)
        })
        .collect()
}

/// Radial profile with the same distribution function as the given `(value, area, frac)` cells.
///
/// Sorted cells are placed at their node-equivalent area and the profile is read
/// off by linear interpolation in area, which reproduces sorted radial input exactly.
fn rearrange_samples(mut samples: Vec<(f64, f64, f64)>, grid: &RadialGrid, mass: f64) -> Vec<f64> {
    samples.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut pos = Vec::with_capacity(samples.len());
    let mut cum = 0.0;
    for &(_, a, f) in &samples {
        pos.push(cum + f * a);
        cum += a;
    }
    let mut out = Vec::with_capacity(grid.len());
    let last = samples.len() - 1;
    for &r in &grid.nodes {
        let target = PI * r * r;
        let j = pos.partition_point(|&p| p <= target);
        let v = if j == 0 {
            samples[0].0
        } else if j > last {
            samples[last].0
        } else {
            let t = (target - pos[j - 1]) / (pos[j] - pos[j - 1]);
            samples[j - 1].0 + t * (samples[j].0 - samples[j - 1].0)
        };
        out.push(v);
    }
    let got = 2.0 * PI * grid.integrate(&out);
    if got > 0.0 && mass > 0.0 {
        out.iter_mut().for_each(|v| *v *= mass / got);
    }
    out
}

/// Symmetric decreasing rearrangement of a nonnegative field.
pub fn rearrange(field: &PolarField) -> Result<Vec<f64>> {
    let g = &field.grid;
    let n_theta = angular_points(field.k_max).max(REARRANGE_ANGLES);
    let vals = field.to_collocation(n_theta);
    let cells = ring_cells(g);
    let mut samples = Vec::with_capacity(n_theta * g.len());
    for row in &vals {
        for (i, &v) in row.iter().enumerate() {
            if v < -NEGATIVE_SLACK {
                return Err(LabError::Domain(format!("rearrangement needs a nonnegative field, found {v:.3e}")));
            }
            samples.push((v.max(0.0), cells[i].0 / n_theta as f64, cells[i].1));
        }
    }
    let mass = 2.0 * PI * g.integrate(&field.mode(0).iter().map(|z| z.re).collect::<Vec<_>>());
    Ok(rearrange_samples(samples, g, mass))
}

/// Rearrangement of a radial profile sampled on the nodes.
pub fn rearrange_radial(values: &[f64], grid: &RadialGrid) -> Vec<f64> {
    let samples = values.iter().zip(ring_cells(grid)).map(|(&v, (a, f))| (v.max(0.0), a, f)).collect();
    let mass = 2.0 * PI * grid.integrate(values);
    rearrange_samples(samples, grid, mass)
}

/// Level-set data `ĥ(a) = |{ω > a}|/π` of a radial nonincreasing vorticity.
#[derive(Clone)]
pub struct ConstraintProfile {
    /// Maximum of the vorticity.
    pub m: f64,
    /// `ĥ` as a function of `u = log(m/a)`.
    hbar_u: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for ConstraintProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConstraintProfile").field("m", &self.m).finish()
    }
}

impl ConstraintProfile {
    /// From `ĥ` given on `(0, m)`.
    pub fn new<F>(m: f64, hbar: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(m > 0.0) {
            return invalid("constraint profile needs a positive maximum");
        }
        Ok(Self { m, hbar_u: Arc::new(move |u: f64| hbar(m * (-u).exp())) })
    }

    pub fn from_profile(profile: &VortexProfile) -> Self {
        let m = profile.omega_star(0.0);
        let hbar_u: Arc<dyn Fn(f64) -> f64 + Send + Sync> = match profile.kind() {
            ProfileKind::Gaussian => Arc::new(|u: f64| 4.0 * u),
            ProfileKind::Algebraic => {
                let kappa = profile.kappa().expect("algebraic");
                Arc::new(move |u: f64| (u / kappa).exp_m1())
            }
            ProfileKind::Custom => {
                let p = profile.clone();
                Arc::new(move |u: f64| {
                    let r = invert_profile(&p, m * (-u).exp());
                    r * r
                })
            }
        };
        Self { m, hbar_u }
    }

    /// From a radial nonincreasing profile sampled on a grid.
    pub fn from_radial(values: &[f64], grid: &RadialGrid) -> Result<Self> {
        if values.windows(2).any(|w| w[1] > w[0] * (1.0 + 1e-12) + 1e-300) {
            return invalid("constraint profile needs a nonincreasing radial vorticity");
        }
        let m = values[0];
        let r = grid.nodes.clone();
        let v = values.to_vec();
        Self::new(m, move |a: f64| {
            // last node where the vorticity exceeds a, then linear in r²
            let j = v.partition_point(|&x| x > a);
            if j == 0 {
                return 0.0;
            }
            if j >= v.len() {
                return r[r.len() - 1].powi(2);
            }
            let (r0, r1) = (r[j - 1] * r[j - 1], r[j] * r[j]);
            let (w0, w1) = (v[j - 1], v[j]);
            if w0 == w1 {
                r1
            } else {
                r0 + (r1 - r0) * (w0 - a) / (w0 - w1)
            }
        })
    }

    /// `ĥ(a)`.
    pub fn hbar(&self, a: f64) -> f64 {
        if a >= self.m {
            0.0
        } else {
            (self.hbar_u)((self.m / a).ln())
        }
    }
}

fn invert_profile(p: &VortexProfile, a: f64) -> f64 {
    let mut hi = 1.0;
    while p.omega_star(hi) > a && hi < 1e150 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if p.omega_star(mid) > a {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `L(R,S) = −RS log max(R,S) − ½ min(R,S)²`.
pub fn level_kernel(r: f64, s: f64) -> f64 {
    let big = r.max(s);
    let log_term = if big > 0.0 { -r * s * big.ln() } else { 0.0 };
    log_term - 0.5 * r.min(s).powi(2)
}

/// Fourth-order running integral on a uniform grid.
fn cumulative_uniform(g: &[f64], h: f64) -> Vec<f64> {
    let n = g.len();
    let mut c = vec![0.0; n];
    for i in 0..n - 1 {
        let piece = if i == 0 {
            h * (9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3]) / 24.0
        } else if i == n - 2 {
            h * (9.0 * g[n - 1] + 19.0 * g[n - 2] - 5.0 * g[n - 3] + g[n - 4]) / 24.0
        } else {
            h * (-g[i - 1] + 13.0 * g[i] + 13.0 * g[i + 1] - g[i + 2]) / 24.0
        };
        c[i + 1] = c[i] + piece;
    }
    c
}

/// Energy from the level-set areas: `(π/8)∬ L(ĥ(a), ĥ(b)) da db + M₀²/(8π)`.
pub fn energy_via_h(cp: &ConstraintProfile) -> Result<f64> {
    let m = cp.m;
    let h = 0.005;
    let mut hb = vec![(cp.hbar_u)(0.0)];
    let mut u = 0.0;
    loop {
        u += h;
        let v = (cp.hbar_u)(u);
        if !v.is_finite() || v < 0.0 {
            return Err(LabError::Domain(format!("ĥ is not finite and nonnegative at a = {:.3e}", m * (-u).exp())));
        }
        let last = hb[hb.len() - 1];
        if v < last * (1.0 - 1e-10) - 1e-14 {
            return invalid("ĥ must be nonincreasing");
        }
        hb.push(v);
        let size = m * (-u).exp() * v.max(1.0) * v.max(1.0).ln().max(1.0) * (1.0 + u);
        if (hb.len() % 2 == 1 && size < 1e-18 * m.max(1e-300)) || u > 4000.0 {
            break;
        }
    }
    let n = hb.len();
    let weight: Vec<f64> = (0..n).map(|i| m * (-(i as f64) * h).exp()).collect();
    let t1 = cumulative_uniform(&hb.iter().zip(&weight).map(|(a, b)| a * b).collect::<Vec<_>>(), h);
    let t2 = cumulative_uniform(&hb.iter().zip(&weight).map(|(a, b)| a * a * b).collect::<Vec<_>>(), h);
    let integrand: Vec<f64> = (0..n)
        .map(|i| {
            let x = hb[i];
            let xlogx = if x > 0.0 { x * x.ln() } else { 0.0 };
            weight[i] * (-xlogx * t1[i] - 0.5 * t2[i])
        })
        .collect();
    let w = simpson_weights(n, h);
    let double = 2.0 * integrand.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
    let m0 = PI * t1[n - 1];
    Ok(PI / 8.0 * double + m0 * m0 / (8.0 * PI))
}

/// `∫ F(ω(x)) dx` over the truncated disk using the collocation values.
fn collocation_integral(field: &PolarField, f: impl Fn(f64) -> f64) -> f64 {
    let g = &field.grid;
    let n_theta = angular_points(field.k_max);
    let vals = field.to_collocation(n_theta);
    let mut acc = vec![0.0; g.len()];
    for row in &vals {
        for (a, &v) in acc.iter_mut().zip(row) {
            *a += f(v);
        }
    }
    2.0 * PI * g.integrate(&acc) / n_theta as f64
}

/// `M²(1+log π)/(8π) − E(ω) − (M/8π)∫ω log(M/ω) dx`, nonnegative by the
/// logarithmic HLS inequality.
pub fn log_hls_gap(field: &PolarField) -> Result<f64> {
    let g = &field.grid;
    let mass = 2.0 * PI * g.integrate(&field.mode(0).iter().map(|z| z.re).collect::<Vec<_>>());
    if !(mass > 0.0) {
        return invalid("log-HLS gap needs a field with positive mass");
    }
    let ent = collocation_integral(field, |w| if w > 0.0 { w * (mass / w).ln() } else { 0.0 });
    Ok(mass * mass * (1.0 + PI.ln()) / (8.0 * PI) - energy_modes(field) - mass / (8.0 * PI) * ent)
}

// ---------------------------------------------------------------- entropies

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyKind {
    AlgebraicKappa,
    Gaussian,
    Custom,
}

/// Constants of the growth conditions on `Φ` at mass `M`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HypConstants {
    pub mass: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    /// `lim Φ(ω)/(ω log(M/ω))` as `ω → 0`.
    pub small_coefficient: f64,
    /// `lim −Φ(ω)/(ω log(ω/M))` as `ω → ∞`.
    pub large_coefficient: f64,
    /// Both strict inequalities `c₀ < M/8π < c_∞` hold.
    pub admissible: bool,
}

/// Entropy density `Φ` with `Φ(0) = 0`, whose derivative is the stream
/// function of a radial vortex read as a function of the vorticity.
#[derive(Debug, Clone)]
pub struct EntropyFunction {
    pub kind: EntropyKind,
    pub kappa: Option<f64>,
    profile: VortexProfile,
}

pub fn entropy_catalog(kind: ProfileKind, kappa: f64) -> Result<EntropyFunction> {
    match kind {
        ProfileKind::Gaussian => Ok(EntropyFunction { kind: EntropyKind::Gaussian, kappa: None, profile: VortexProfile::gaussian() }),
        ProfileKind::Algebraic => Ok(EntropyFunction {
            kind: EntropyKind::AlgebraicKappa,
            kappa: Some(kappa),
            profile: VortexProfile::algebraic(kappa)?,
        }),
        ProfileKind::Custom => invalid("custom entropies are built with EntropyFunction::from_profile"),
    }
}

/// 32-point Gauss–Laguerre rule.
fn laguerre_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = 32;
        let jac = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                (2 * i + 1) as f64
            } else if i + 1 == j || j + 1 == i {
                i.max(j) as f64
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(jac);
        let mut pairs: Vec<(f64, f64)> =
            (0..n).map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2))).collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        pairs.into_iter().unzip()
    })
}

/// `∫₁² e^{−u v}/v dv`.
fn log_ratio_exp(u: f64) -> f64 {
    // 12-point Gauss–Legendre on [1, 2]
    const X: [f64; 6] = [0.125_233_408_511_469, 0.367_831_498_998_180, 0.587_317_954_286_617, 0.769_902_674_194_305, 0.904_117_256_370_475, 0.981_560_634_246_719];
    const W: [f64; 6] = [0.249_147_045_813_403, 0.233_492_536_538_355, 0.203_167_426_723_066, 0.160_078_328_543_346, 0.106_939_325_995_318, 0.047_175_336_386_512];
    let mut acc = 0.0;
    for (x, w) in X.iter().zip(&W) {
        for v in [1.5 + 0.5 * x, 1.5 - 0.5 * x] {
            acc += 0.5 * w * (-u * v).exp() / v;
        }
    }
    acc
}

impl EntropyFunction {
    /// Entropy whose derivative is `ψ*∘ω*^{-1}` for an arbitrary monotone profile.
    pub fn from_profile(profile: &VortexProfile) -> Self {
        Self { kind: EntropyKind::Custom, kappa: profile.kappa(), profile: profile.clone() }
    }

    /// The vortex that is stationary for this entropy.
    pub fn profile(&self) -> &VortexProfile {
        &self.profile
    }

    /// `φ = Φ′`.
    pub fn phi_prime(&self, w: f64) -> f64 {
        let a = self.profile.amplitude();
        match self.kind {
            EntropyKind::Gaussian | EntropyKind::AlgebraicKappa => self.phi_prime_log((a / w).ln()),
            EntropyKind::Custom => {
                if w >= self.profile.omega_star(0.0) {
                    self.profile.psi(0.0)
                } else {
                    self.profile.psi(invert_profile(&self.profile, w))
                }
            }
        }
    }

    /// `φ` as a function of `L = log(a/ω)`, finite where `ω` underflows.
    fn phi_prime_log(&self, l: f64) -> f64 {
        let a = self.profile.amplitude();
        match self.kind {
            EntropyKind::Gaussian => a * (2.0 * LN_2 - EULER_GAMMA + ein(l)),
            EntropyKind::AlgebraicKappa => {
                let kappa = self.kappa.unwrap();
                if kappa == 2.0 {
                    a / 8.0 * l
                } else if kappa == 3.0 {
                    a / 24.0 * l - a * (-l / 3.0).exp() / 8.0
                } else {
                    a * algebraic_psi(kappa - 1.0, l / kappa)
                }
            }
            EntropyKind::Custom => self.phi_prime(a * (-l).exp()),
        }
    }

    /// `Φ(ω) = ∫₀^ω φ`.
    pub fn phi(&self, w: f64) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        let a = self.profile.amplitude();
        match (self.kind, self.kappa) {
            (EntropyKind::Gaussian, _) => {
                let u = (a / w).ln();
                a * ((2.0 * LN_2 - EULER_GAMMA) * w + w * ein(u) + a * log_ratio_exp(u))
            }
            (EntropyKind::AlgebraicKappa, Some(2.0)) => a / 8.0 * (w * (a / w).ln() + w),
            (EntropyKind::AlgebraicKappa, Some(3.0)) => {
                a / 24.0 * (w * (a / w).ln() + w) - 3.0 * a * w * (w / a).cbrt() / 32.0
            }
            _ => {
                let (x, wt) = laguerre_rule();
                let l = (a / w).ln();
                w * x.iter().zip(wt).map(|(&u, &c)| c * self.phi_prime_log(l + u)).sum::<f64>()
            }
        }
    }

    /// Growth constants at mass `m`, with the admissibility verdict.
    pub fn hyp_constants(&self, m: f64) -> HypConstants {
        let crit = m / (8.0 * PI);
        let a = self.profile.amplitude();
        let (c0, cinf) = match (self.kind, self.kappa) {
            (EntropyKind::Gaussian, _) => (0.0, f64::INFINITY),
            (EntropyKind::AlgebraicKappa, Some(k)) => {
                let c0 = a / (4.0 * k * (k - 1.0));
                let cinf = if k > 2.0 {
                    f64::INFINITY
                } else if k == 2.0 {
                    a / 8.0
                } else {
                    0.0
                };
                (c0, cinf)
            }
            _ => {
                let eps = 1e-200 * m.min(1.0);
                (self.phi(eps) / (eps * (m / eps).ln()), 0.0)
            }
        };
        let admissible = c0 < crit && crit < cinf;
        let c2 = if admissible { 0.5 * (c0 + crit) } else { c0 };
        let c3 = if admissible {
            if cinf.is_finite() {
                0.5 * (crit + cinf)
            } else {
                2.0 * crit
            }
        } else {
            cinf
        };
        let mut c1 = f64::NEG_INFINITY;
        for i in 0..=480 {
            let w = m * 10f64.powf(-12.0 + 0.05 * i as f64);
            let bound = if w <= m { c2 * w * (m / w).ln() } else { -c3 * w * (w / m).ln() };
            let need = (self.phi(w) - bound) / w;
            if need.is_finite() {
                c1 = c1.max(need);
            }
        }
        HypConstants { mass: m, c1, c2, c3, small_coefficient: c0, large_coefficient: cinf, admissible }
    }
}

/// `E + ∫Φ(ω)dx` for a field.
pub fn free_energy(field: &PolarField, entropy: &EntropyFunction) -> f64 {
    energy_modes(field) + collocation_integral(field, |w| entropy.phi(w.max(0.0)))
}

/// `E + 2π∫Φ(ω) r dr` for a radial profile.
pub fn free_energy_radial(values: &[f64], grid: &RadialGrid, entropy: &EntropyFunction) -> f64 {
    let s: Vec<f64> = values.iter().map(|&w| entropy.phi(w.max(0.0))).collect();
    energy_radial(values, grid) + 2.0 * PI * grid.integrate(&s)
}

/// Outcome of [`maximize_free_energy`].
#[derive(Debug, Clone, Serialize)]
pub struct Maximizer {
    #[serde(skip)]
    pub profile: Vec<f64>,
    #[serde(skip)]
    pub stream: Vec<f64>,
    #[serde(skip)]
    pub residual: Vec<f64>,
    #[serde(rename = "F")]
    pub free_energy: f64,
    #[serde(rename = "E")]
    pub energy: f64,
    #[serde(rename = "S")]
    pub entropy: f64,
    #[serde(rename = "M")]
    pub mass: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the entropy makes `F` invariant under mass-preserving dilations;
    /// the result is then rescaled to unit half-mass radius.
    pub dilation_gauge: bool,
    #[serde(skip)]
    pub history: Vec<f64>,
}

impl Maximizer {
    /// CSV with header `r,omega,psi,phi_prime_residual` on the grid the ascent ran on.
    pub fn write_csv<W: std::io::Write>(&self, grid: &RadialGrid, mut out: W) -> std::io::Result<()> {
        writeln!(out, "r,omega,psi,phi_prime_residual")?;
        for (i, r) in grid.nodes.iter().enumerate() {
            let row = [*r, self.profile[i], self.stream[i], self.residual[i]];
            writeln!(out, "{}", row.map(csv_number).join(","))?;
        }
        Ok(())
    }
}

pub const MAX_ASCENT_ITERATIONS: usize = 10_000;
pub const ASCENT_TOL: f64 = 1e-10;

fn mass_of(values: &[f64], grid: &RadialGrid) -> f64 {
    2.0 * PI * grid.integrate(values)
}

/// Radius enclosing half the mass of a radial profile.
fn half_mass_radius(values: &[f64], grid: &RadialGrid) -> f64 {
    let c = grid.cumulative(values);
    let total = c[c.len() - 1];
    let j = c.partition_point(|&x| x < 0.5 * total).max(1);
    let (r0, r1) = (grid.nodes[j - 1], grid.nodes[j]);
    r0 + (r1 - r0) * (0.5 * total - c[j - 1]) / (c[j] - c[j - 1])
}

/// `ω ↦ λ²ω(λ·)` resampled on the grid by interpolation in `log r`.
fn dilate(values: &[f64], grid: &RadialGrid, lambda: f64) -> Vec<f64> {
    let r = &grid.nodes;
    grid.nodes
        .iter()
        .map(|&x| {
            let y = lambda * x;
            let j = r.partition_point(|&z| z < y);
            let v = if j == 0 {
                values[0]
            } else if j >= r.len() {
                0.0
            } else {
                let t = (y - r[j - 1]) / (r[j] - r[j - 1]);
                values[j - 1] * (1.0 - t) + values[j] * t
            };
            lambda * lambda * v
        })
        .collect()
}

/// Mirror ascent of `F = E + S` over radial nonincreasing profiles of mass `M`.
pub fn maximize_free_energy(entropy: &EntropyFunction, m: f64, grid: &RadialGrid, seed: u64) -> Result<Maximizer> {
    let hyp = entropy.hyp_constants(m);
    let borderline = matches!((entropy.kind, entropy.kappa), (EntropyKind::AlgebraicKappa, Some(k)) if k == 2.0)
        && (hyp.small_coefficient - m / (8.0 * PI)).abs() < 1e-12 * hyp.small_coefficient;
    if !hyp.admissible && !borderline {
        return Err(LabError::Domain(format!(
            "entropy growth conditions fail at mass {m}: small-ω coefficient {:.4}, large-ω coefficient {:.4}, threshold {:.4}",
            hyp.small_coefficient,
            hyp.large_coefficient,
            m / (8.0 * PI)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width: f64 = rng.gen_range(0.6..1.6);
    let mut w: Vec<f64> = grid.map(|r| (1.0 + r * r / (2.0 * width)).powi(-3));
    let scale = m / mass_of(&w, grid);
    w.iter_mut().for_each(|v| *v *= scale);
    let mut f = free_energy_radial(&w, grid, entropy);
    let mut history = vec![f];
    let mut eta = 1.0;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ASCENT_ITERATIONS {
        iterations += 1;
        let psi = radial_stream(&w, grid);
        let g: Vec<f64> = w.iter().zip(&psi).map(|(&x, &p)| entropy.phi_prime(x) - p).collect();
        let gmax = g.iter().copied().filter(|v| v.is_finite()).fold(f64::NEG_INFINITY, f64::max);
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial: Vec<f64> =
                w.iter().zip(&g).map(|(&x, &d)| (x * (eta * (d - gmax)).exp()).max(f64::MIN_POSITIVE)).collect();
            trial = rearrange_radial(&trial, grid);
            let s = m / mass_of(&trial, grid);
            trial.iter_mut().for_each(|v| *v *= s);
            let ft = free_energy_radial(&trial, grid, entropy);
            if !ft.is_finite() {
                return Err(LabError::Breakdown(format!("free energy became {ft} at iteration {iterations}")));
            }
            if ft >= f {
                accepted = Some((trial, ft));
                break;
            }
            eta *= 0.5;
        }
        let Some((trial, ft)) = accepted else {
            converged = true;
            break;
        };
        let gain = (ft - f) / f.abs().max(1e-300);
        w = trial;
        f = ft;
        history.push(f);
        if f.abs() > 1e12 * m.max(1.0) {
            return Err(LabError::Breakdown("free energy grows without bound".into()));
        }
        if gain < ASCENT_TOL {
            converged = true;
            break;
        }
        eta = (eta * 1.5).min(1e3);
    }
    let mut dilation_gauge = false;
    if borderline && (m - 8.0 * PI * hyp.small_coefficient).abs() < 1e-9 * m {
        let lambda = half_mass_radius(&w, grid);
        w = dilate(&w, grid, lambda);
        let s = m / mass_of(&w, grid);
        w.iter_mut().for_each(|v| *v *= s);
        dilation_gauge = true;
    }
    let psi = radial_stream(&w, grid);
    let residual: Vec<f64> = w.iter().zip(&psi).map(|(&x, &p)| entropy.phi_prime(x) - p).collect();
    let energy = energy_radial(&w, grid);
    let s: Vec<f64> = w.iter().map(|&x| entropy.phi(x)).collect();
    let ent = 2.0 * PI * grid.integrate(&s);
    Ok(Maximizer {
        profile: w,
        stream: psi,
        residual,
        free_energy: energy + ent,
        energy,
        entropy: ent,
        mass: m,
        iterations,
        converged,
        dilation_gauge,
        history,
    })
}

/// `2π∫|f − g| r dr`.
pub fn l1_distance(f: &[f64], g: &[f64], grid: &RadialGrid) -> f64 {
    2.0 * PI * grid.integrate(&f.iter().zip(g).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>())
}
