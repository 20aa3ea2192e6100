//! Vortex profiles and the radial weights derived from them.

use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::special::{ein, expm1_over, h_aux, harmonic, EULER_GAMMA};

/// Below this value of `s = r²/4` every ratio switches to its Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Gaussian,
    Algebraic,
    Custom,
}

impl std::str::FromStr for ProfileKind {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "algebraic" => Ok(Self::Algebraic),
            "custom" => Ok(Self::Custom),
            other => invalid(format!("unknown profile kind `{other}`")),
        }
    }
}

/// Profile block of a run configuration.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ProfileSpec {
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub amplitude: Option<f64>,
    /// `[r, ω]` pairs for custom profiles, starting at `r = 0`.
    #[serde(default)]
    pub samples: Option<Vec<[f64; 2]>>,
    /// Decay exponent of a custom profile; fitted from the last two samples when absent.
    #[serde(default)]
    pub beta: Option<f64>,
}

/// Radial vorticity profile `ω*` with its stream derivative and weights.
#[derive(Debug, Clone)]
pub struct VortexProfile {
    kind: ProfileKind,
    kappa: f64,
    amplitude: f64,
    beta: f64,
    custom: Option<Arc<CustomProfile>>,
}

pub fn make_profile(kind: ProfileKind, params: &ProfileSpec) -> Result<VortexProfile> {
    let amplitude = params.amplitude.unwrap_or(1.0);
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return invalid(format!("amplitude must be positive, got {amplitude}"));
    }
    match kind {
        ProfileKind::Gaussian => {
            Ok(VortexProfile { kind, kappa: f64::NAN, amplitude, beta: f64::INFINITY, custom: None })
        }
        ProfileKind::Algebraic => {
            let kappa = params.kappa.ok_or_else(|| LabError::Invalid("algebraic profile needs kappa".into()))?;
            if !(kappa > 1.0 && kappa.is_finite()) {
                return invalid(format!("algebraic profile needs kappa > 1, got {kappa}"));
            }
            Ok(VortexProfile { kind, kappa, amplitude, beta: 2.0 * kappa, custom: None })
        }
        ProfileKind::Custom => {
            let samples =
                params.samples.as_ref().ok_or_else(|| LabError::Invalid("custom profile needs samples".into()))?;
            let c = CustomProfile::new(samples, params.beta)?;
            let beta = c.beta;
            Ok(VortexProfile { kind, kappa: f64::NAN, amplitude: 1.0, beta, custom: Some(Arc::new(c)) })
        }
    }
}

impl VortexProfile {
    /// `ω*(r) = e^{-r²/4}`.
    pub fn gaussian() -> Self {
        make_profile(ProfileKind::Gaussian, &ProfileSpec::default()).expect("gaussian profile")
    }

    /// `ω*(r) = (1+r²)^{-κ}`.
    pub fn algebraic(kappa: f64) -> Result<Self> {
        make_profile(ProfileKind::Algebraic, &ProfileSpec { kappa: Some(kappa), ..Default::default() })
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        assert!(amplitude > 0.0);
        if self.kind != ProfileKind::Custom {
            self.amplitude = amplitude;
        }
        self
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn kappa(&self) -> Option<f64> {
        (self.kind == ProfileKind::Algebraic).then_some(self.kappa)
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Growth exponent of `A`; infinite for the Gaussian.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Short label such as `gaussian` or `algebraic(k=2)`.
    pub fn label(&self) -> String {
        match self.kind {
            ProfileKind::Gaussian => "gaussian".into(),
            ProfileKind::Algebraic => format!("algebraic(k={})", self.kappa),
            ProfileKind::Custom => "custom".into(),
        }
    }

    fn nu(&self) -> f64 {
        self.kappa - 1.0
    }

    pub fn omega_star(&self, r: f64) -> f64 {
        match self.kind {
            ProfileKind::Gaussian => self.amplitude * (-r * r / 4.0).exp(),
            ProfileKind::Algebraic => self.amplitude * (1.0 + r * r).powf(-self.kappa),
            ProfileKind::Custom => self.custom().value(r).0,
        }
    }

    pub fn omega_star_prime(&self, r: f64) -> f64 {
        match self.kind {
            ProfileKind::Gaussian => -self.amplitude * r / 2.0 * (-r * r / 4.0).exp(),
            ProfileKind::Algebraic => -2.0 * self.kappa * self.amplitude * r * (1.0 + r * r).powf(-self.kappa - 1.0),
            ProfileKind::Custom => self.custom().value(r).1,
        }
    }

    /// `ω*″(0)`.
    pub fn omega_star_pp0(&self) -> f64 {
        match self.kind {
            ProfileKind::Gaussian => -self.amplitude / 2.0,
            ProfileKind::Algebraic => -2.0 * self.kappa * self.amplitude,
            ProfileKind::Custom => self.custom().second_derivative_at_origin(),
        }
    }

    /// Total circulation `2π∫ω* r dr`.
    pub fn mass(&self) -> f64 {
        match self.kind {
            ProfileKind::Gaussian => 4.0 * PI * self.amplitude,
            ProfileKind::Algebraic => PI * self.amplitude / self.nu(),
            ProfileKind::Custom => 2.0 * PI * self.custom().cumulative(f64::INFINITY),
        }
    }

    /// `ψ*′(r) = (1/r)∫₀ʳ s ω*(s) ds`.
    pub fn psi_prime(&self, r: f64) -> f64 {
        match self.kind {
            ProfileKind::Gaussian => {
                let s = r * r / 4.0;
                let ratio = if s < SERIES_THRESHOLD { 1.0 - s / 2.0 + s * s / 6.0 - s * s * s / 24.0 } else { -(-s).exp_m1() / s };
                self.amplitude * r / 2.0 * ratio
            }
            ProfileKind::Algebraic => {
                let t = r * r;
                let nu = self.nu();
                let ratio = if t < 4.0 * SERIES_THRESHOLD {
                    nu * (1.0 - (nu + 1.0) * t / 2.0 + (nu + 1.0) * (nu + 2.0) * t * t / 6.0
                        - (nu + 1.0) * (nu + 2.0) * (nu + 3.0) * t * t * t / 24.0)
                } else {
                    -(-nu * t.ln_1p()).exp_m1() / t
                };
                self.amplitude * r / (2.0 * nu) * ratio
            }
            ProfileKind::Custom => {
                if r == 0.0 {
                    0.0
                } else {
                    self.custom().cumulative(r) / r
                }
            }
        }
    }

    /// Stream function normalized so that `ψ*(r) = ∫₀^∞ log max(r,s) ω*(s) s ds`.
    pub fn psi(&self, r: f64) -> f64 {
        match self.kind {
            ProfileKind::Gaussian => self.amplitude * (2.0 * LN_2 - EULER_GAMMA + ein(r * r / 4.0)),
            ProfileKind::Algebraic => self.amplitude * algebraic_psi(self.nu(), (r * r).ln_1p()),
            ProfileKind::Custom => self.custom().psi(r),
        }
    }

    /// `A = -ψ*′/ω*′`, with `A(0) = -ω*(0)/(2ω*″(0))`.
    pub fn weight_a(&self, r: f64) -> f64 {
        match self.kind {
            ProfileKind::Gaussian => expm1_over(r * r / 4.0),
            ProfileKind::Algebraic => {
                let t = r * r;
                let (kappa, nu) = (self.kappa, self.nu());
                if t < 4.0 * SERIES_THRESHOLD {
                    let c = |j: i32| (binom(kappa + 1.0, j + 1) - binom(2.0, j + 1)) / (4.0 * kappa * nu);
                    c(0) + t * (c(1) + t * (c(2) + t * c(3)))
                } else {
                    let q = 1.0 + t;
                    q * q * (nu * t.ln_1p()).exp_m1() / (4.0 * kappa * nu * t)
                }
            }
            ProfileKind::Custom => self.custom().weight_a(r),
        }
    }

    /// `log A(r)`, finite even where `A` overflows.
    pub fn log_a(&self, r: f64) -> f64 {
        match self.kind {
            ProfileKind::Gaussian => {
                let s = r * r / 4.0;
                if s > 1.0 {
                    s + (-(-s).exp_m1()).ln() - s.ln()
                } else {
                    expm1_over(s).ln()
                }
            }
            ProfileKind::Algebraic => {
                let t = r * r;
                if t < 1.0 {
                    self.weight_a(r).ln()
                } else {
                    let (kappa, nu) = (self.kappa, self.nu());
                    let x = nu * t.ln_1p();
                    2.0 * t.ln_1p() + x + (-(-x).exp_m1()).ln() - (4.0 * kappa * nu * t).ln()
                }
            }
            ProfileKind::Custom => self.weight_a(r).ln(),
        }
    }

    /// `χ = ½ log A`.
    pub fn chi(&self, r: f64) -> f64 {
        0.5 * self.log_a(r)
    }

    pub fn chi_prime(&self, r: f64) -> f64 {
        match self.kind {
            ProfileKind::Gaussian => r / 4.0 * (1.0 - h_aux(r * r / 4.0)),
            ProfileKind::Algebraic => {
                let t = r * r;
                let nu = self.nu();
                if t < 4.0 * SERIES_THRESHOLD {
                    let d = [
                        (nu + 3.0) / 2.0,
                        (nu * nu - 6.0 * nu - 19.0) / 12.0,
                        -(nu * nu - 4.0 * nu - 13.0) / 8.0,
                        -(nu.powi(4) - 110.0 * nu * nu + 360.0 * nu + 1189.0) / 720.0,
                    ];
                    r * (d[0] + t * (d[1] + t * (d[2] + t * d[3])))
                } else {
                    let q = 1.0 + t;
                    r * (2.0 / q + (algebraic_s(nu, t) * q.powf(nu - 1.0) - 1.0) / t)
                }
            }
            ProfileKind::Custom => {
                let h = 1e-4 * r.max(1e-3);
                (self.chi(r + h) - self.chi((r - h).max(0.5 * r))) / (r + h - (r - h).max(0.5 * r))
            }
        }
    }

    /// `V = χ″ − χ′/r + χ′²`.
    pub fn potential_v(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(LabError::Domain(format!("V is defined for r > 0, got {r}")));
        }
        Ok(match self.kind {
            ProfileKind::Gaussian => {
                let s = r * r / 4.0;
                if s < SERIES_THRESHOLD {
                    s * (5.0 / 48.0 + s * (1.0 / 48.0 - s / 2880.0))
                } else {
                    let e = s.exp_m1();
                    0.75 / s - 0.5 + s / 4.0 - 0.5 / e - s / 4.0 / (e * e)
                }
            }
            ProfileKind::Algebraic => {
                let t = r * r;
                let nu = self.nu();
                if t < 4.0 * SERIES_THRESHOLD {
                    let c1 = (nu - 1.0) * (5.0 * nu + 11.0) / 12.0;
                    let c2 = (nu - 1.0) * (nu * nu - 8.0 * nu - 21.0) / 12.0;
                    let c3 = -(nu - 1.0) * (nu.powi(3) + 151.0 * nu * nu - 589.0 * nu - 1819.0) / 720.0;
                    t * (c1 + t * (c2 + t * c3))
                } else {
                    let s = algebraic_s(nu, t);
                    let q = 1.0 + t;
                    (3.0 - 2.0 * (nu - 1.0) * t + (nu * nu - 1.0) * t * t - 2.0 * s - s * s) / (t * q * q)
                }
            }
            ProfileKind::Custom => {
                let h = 1e-3 * r;
                let c = |x: f64| self.chi(x);
                let d1 = (c(r + h) - c(r - h)) / (2.0 * h);
                let d2 = (c(r + h) - 2.0 * c(r) + c(r - h)) / (h * h);
                d2 - d1 / r + d1 * d1
            }
        })
    }

    fn require_gaussian(&self, what: &str) -> Result<()> {
        if self.kind == ProfileKind::Gaussian {
            Ok(())
        } else {
            Err(LabError::Invalid(format!("{what} is only defined for the gaussian profile")))
        }
    }

    /// `B = 1 + A − x·∇A/|x|²` (Gaussian only).
    pub fn weight_b(&self, r: f64) -> Result<f64> {
        self.require_gaussian("B")?;
        Ok(eval_gaussian_bw(r).0)
    }

    /// Potential of the diffusive form in the `e^χ` variables (Gaussian only).
    pub fn potential_w(&self, r: f64) -> Result<f64> {
        self.require_gaussian("W")?;
        Ok(eval_gaussian_bw(r).1)
    }

    fn custom(&self) -> &CustomProfile {
        self.custom.as_deref().expect("custom data present for custom profiles")
    }
}

/// Closed-form `B(r)` and `W(r)` of the Gaussian profile.
pub fn eval_gaussian_bw(r: f64) -> (f64, f64) {
    let s = r * r / 4.0;
    if s < SERIES_THRESHOLD {
        let b = 1.75 + s * (1.0 / 3.0 + s * (5.0 / 48.0 + s / 40.0));
        let w = -1.5 + s * (11.0 / 16.0 + s * (-1.0 / 16.0 - s / 576.0));
        return (b, w);
    }
    let a = expm1_over(s);
    let h = h_aux(s);
    let b = 1.0 + a * 0.5 * (1.0 + h);
    let w = s / 2.0 * (1.0 - h) - s / 4.0 * (1.0 - h) * (1.0 - h) - 0.5 - 1.0 / a;
    (b, w)
}

/// `S = νt/((1+t)^ν − 1)`.
fn algebraic_s(nu: f64, t: f64) -> f64 {
    nu * t / (nu * t.ln_1p()).exp_m1()
}

/// Generalized binomial coefficient `C(a, j)`.
fn binom(a: f64, j: i32) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (a - i as f64) / (i + 1) as f64)
}

/// Stream function of `(1+r²)^{-(ν+1)}` as a function of `y = log(1+r²)`.
pub(crate) fn algebraic_psi(nu: f64, y: f64) -> f64 {
    (y - algebraic_tail(nu, y)) / (4.0 * nu)
}

/// `∫_y^∞ (e^{-u} − e^{-νu})/(1 − e^{-u}) du`.
fn algebraic_tail(nu: f64, y: f64) -> f64 {
    if (nu - 1.0).abs() < 1e-15 {
        return 0.0;
    }
    if y > 1.0 {
        (0..200)
            .map(|m| {
                let m = m as f64;
                (-(m + 1.0) * y).exp() / (m + 1.0) - (-(m + nu) * y).exp() / (m + nu)
            })
            .sum()
    } else {
        let g = |u: f64| {
            if u.abs() < 1e-12 {
                nu - 1.0
            } else {
                ((-u).exp_m1() - (-nu * u).exp_m1()) / -(-u).exp_m1()
            }
        };
        let n = 400;
        let h = y / n as f64;
        let mut acc = g(0.0) + g(y);
        for i in 1..n {
            acc += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        harmonic(nu - 1.0) - acc * h / 3.0
    }
}

/// Monotone cubic interpolant of sampled `ω*` in the variable `t = r²`,
/// continued by a power-law tail.
#[derive(Debug, Clone)]
struct CustomProfile {
    /// Knots in `t = r²`.
    t: Vec<f64>,
    w: Vec<f64>,
    /// `dω/dt` at the knots.
    d: Vec<f64>,
    /// `∫₀^{t_j} ω dt` at the knots.
    cum: Vec<f64>,
    beta: f64,
}

impl CustomProfile {
    fn new(samples: &[[f64; 2]], beta: Option<f64>) -> Result<Self> {
        if samples.len() < 4 {
            return invalid("custom profile needs at least 4 samples");
        }
        let r: Vec<f64> = samples.iter().map(|p| p[0]).collect();
        let w: Vec<f64> = samples.iter().map(|p| p[1]).collect();
        if r[0] != 0.0 {
            return invalid("custom samples must start at r = 0");
        }
        if !(w[0] > 0.0) {
            return invalid(format!("custom profile needs omega(0) > 0, got {}", w[0]));
        }
        for j in 1..r.len() {
            if !(r[j] > r[j - 1]) {
                return invalid("custom sample radii must increase strictly");
            }
            if !(w[j] < w[j - 1] && w[j] > 0.0) {
                return invalid(format!("custom samples must be positive and strictly decreasing (index {j})"));
            }
        }
        let n = r.len();
        let beta = match beta {
            Some(b) => b,
            None => -(w[n - 1] / w[n - 2]).ln() / (r[n - 1] / r[n - 2]).ln(),
        };
        if !(beta > 2.0) {
            return invalid(format!("custom profile decay exponent must exceed 2, got {beta}"));
        }
        let t: Vec<f64> = r.iter().map(|x| x * x).collect();
        let h: Vec<f64> = t.windows(2).map(|p| p[1] - p[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|j| (w[j + 1] - w[j]) / h[j]).collect();
        let mut d = vec![0.0; n];
        for j in 1..n - 1 {
            let (w1, w2) = (2.0 * h[j] + h[j - 1], h[j] + 2.0 * h[j - 1]);
            d[j] = (w1 + w2) / (w1 / delta[j - 1] + w2 / delta[j]);
        }
        d[0] = ((2.0 * h[0] + h[1]) * delta[0] - h[0] * delta[1]) / (h[0] + h[1]);
        if d[0] >= 0.0 {
            d[0] = 0.5 * delta[0];
        } else if d[0].abs() > 3.0 * delta[0].abs() {
            d[0] = 3.0 * delta[0];
        }
        d[n - 1] = -0.5 * beta * w[n - 1] / t[n - 1];
        if d[n - 1].abs() > 3.0 * delta[n - 2].abs() {
            d[n - 1] = 3.0 * delta[n - 2];
        }
        let mut c = Self { t, w, d, cum: vec![0.0; n], beta };
        for j in 0..n - 1 {
            c.cum[j + 1] = c.cum[j] + c.piece_integral(j, c.t[j + 1]);
        }
        Ok(c)
    }

    fn locate(&self, t: f64) -> usize {
        let last = self.t.len() - 2;
        match self.t.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(j) => j.min(last),
            Err(j) => j.saturating_sub(1).min(last),
        }
    }

    /// Value and `dω/dt` of the cubic on piece `j`.
    fn hermite(&self, j: usize, t: f64) -> (f64, f64) {
        let h = self.t[j + 1] - self.t[j];
        let u = (t - self.t[j]) / h;
        let (y0, y1, d0, d1) = (self.w[j], self.w[j + 1], self.d[j], self.d[j + 1]);
        let v = (2.0 * u * u * u - 3.0 * u * u + 1.0) * y0
            + (u * u * u - 2.0 * u * u + u) * h * d0
            + (-2.0 * u * u * u + 3.0 * u * u) * y1
            + (u * u * u - u * u) * h * d1;
        let dv = ((6.0 * u * u - 6.0 * u) * (y0 - y1)
            + (3.0 * u * u - 4.0 * u + 1.0) * h * d0
            + (3.0 * u * u - 2.0 * u) * h * d1)
            / h;
        (v, dv)
    }

    /// `∫_{t_j}^{x} ω dt` inside piece `j`; Simpson is exact for the cubic.
    fn piece_integral(&self, j: usize, x: f64) -> f64 {
        let a = self.t[j];
        (x - a) / 6.0 * (self.hermite(j, a).0 + 4.0 * self.hermite(j, 0.5 * (a + x)).0 + self.hermite(j, x).0)
    }

    fn last(&self) -> (f64, f64) {
        (*self.t.last().unwrap(), *self.w.last().unwrap())
    }

    /// `ω(r)` and `ω′(r)`.
    fn value(&self, r: f64) -> (f64, f64) {
        let t = r * r;
        let (tl, wl) = self.last();
        if t >= tl {
            let v = wl * (t / tl).powf(-0.5 * self.beta);
            return (v, -self.beta * v / r);
        }
        let (v, dv) = self.hermite(self.locate(t), t);
        (v, 2.0 * r * dv)
    }

    fn second_derivative_at_origin(&self) -> f64 {
        2.0 * self.d[0]
    }

    /// `∫₀ʳ ω s ds`.
    fn cumulative(&self, r: f64) -> f64 {
        let t = r * r;
        let (tl, wl) = self.last();
        let n = self.t.len();
        let half_b = 0.5 * self.beta;
        let integral = if t >= tl {
            let tail = if t.is_infinite() {
                tl / (half_b - 1.0)
            } else {
                tl * (1.0 - (t / tl).powf(1.0 - half_b)) / (half_b - 1.0)
            };
            self.cum[n - 1] + wl * tail
        } else {
            let j = self.locate(t);
            self.cum[j] + self.piece_integral(j, t)
        };
        0.5 * integral
    }

    fn weight_a(&self, r: f64) -> f64 {
        if r * r < 1e-12 * self.t[1] {
            return -self.w[0] / (2.0 * self.second_derivative_at_origin());
        }
        self.cumulative(r) / (r * -self.value(r).1)
    }

    fn psi(&self, r: f64) -> f64 {
        let (tl, wl) = self.last();
        let rl = tl.sqrt();
        let b = self.beta;
        let lo = r.max(1e-6 * self.t[1].sqrt());
        let mut acc = 0.0;
        if lo < rl {
            // ∫ log(s) ω(s) s ds with s = e^u
            let n = 4000;
            let (ua, ub) = (lo.ln(), rl.ln());
            let h = (ub - ua) / n as f64;
            let f = |u: f64| {
                let s = u.exp();
                u * self.value(s).0 * s * s
            };
            let mut sum = f(ua) + f(ub);
            for i in 1..n {
                sum += f(ua + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc += sum * h / 3.0;
        }
        let big = lo.max(rl);
        acc += wl * rl.powf(b) * big.powf(2.0 - b) * (big.ln() / (b - 2.0) + 1.0 / ((b - 2.0) * (b - 2.0)));
        if r < lo {
            acc + self.w[0] * lo * lo / 2.0 * (lo.ln() - 0.5)
        } else {
            acc + r.ln() * self.cumulative(r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_two_weight_is_polynomial() {
        let p = VortexProfile::algebraic(2.0).unwrap();
        for &r in &[0.0, 0.01, 0.3, 1.0, 5.0, 40.0] {
            let exact = (1.0f64 + r * r).powi(2) / 8.0;
            assert!((p.weight_a(r) - exact).abs() < 1e-13 * exact, "r={r}");
        }
    }

    #[test]
    fn gaussian_weight_at_origin() {
        let p = VortexProfile::gaussian();
        assert_eq!(p.weight_a(0.0), 1.0);
        assert!((p.weight_a(0.0) + p.omega_star(0.0) / (2.0 * p.omega_star_pp0())).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_kappa() {
        assert!(VortexProfile::algebraic(0.5).is_err());
        assert!(VortexProfile::algebraic(1.0).is_err());
    }

    #[test]
    fn v_at_origin_is_a_domain_error() {
        assert!(matches!(VortexProfile::gaussian().potential_v(0.0), Err(LabError::Domain(_))));
    }

    /// Central differences of `χ = ½ log A` as an oracle for `V` and `χ′`.
    fn fd_v(p: &VortexProfile, r: f64) -> (f64, f64) {
        let h = 1e-4 * r;
        let c = |x: f64| 0.5 * p.weight_a(x).ln();
        let d1 = (c(r + h) - c(r - h)) / (2.0 * h);
        let d2 = (c(r + h) - 2.0 * c(r) + c(r - h)) / (h * h);
        (d2 - d1 / r + d1 * d1, d1)
    }

    #[test]
    fn v_and_chi_prime_match_finite_differences() {
        let profiles = [VortexProfile::gaussian(), VortexProfile::algebraic(1.5).unwrap(), VortexProfile::algebraic(3.0).unwrap()];
        for p in &profiles {
            for &r in &[0.2, 0.7, 1.0, 2.0, 3.5] {
                let (v, cp) = fd_v(p, r);
                assert!((p.potential_v(r).unwrap() - v).abs() < 1e-5, "{} r={r}", p.label());
                assert!((p.chi_prime(r) - cp).abs() < 1e-7, "{} r={r}", p.label());
            }
        }
        let g = VortexProfile::gaussian();
        assert!(g.potential_v(2.0).unwrap() > 0.0);
        assert!(VortexProfile::algebraic(1.5).unwrap().potential_v(1.0).unwrap() < 0.0);
        assert!(VortexProfile::algebraic(2.0).unwrap().potential_v(1.3).unwrap().abs() < 1e-13);
    }

    #[test]
    fn series_and_closed_forms_join() {
        let r0 = 2.0 * SERIES_THRESHOLD.sqrt();
        let (below, above) = (r0 * (1.0 - 1e-9), r0 * (1.0 + 1e-9));
        for p in [VortexProfile::gaussian(), VortexProfile::algebraic(3.0).unwrap()] {
            assert!((p.weight_a(below) - p.weight_a(above)).abs() < 1e-10);
            assert!((p.psi_prime(below) - p.psi_prime(above)).abs() < 1e-10);
            assert!((p.chi_prime(below) - p.chi_prime(above)).abs() < 1e-9);
            assert!((p.potential_v(below).unwrap() - p.potential_v(above).unwrap()).abs() < 1e-9);
        }
        let (b1, w1) = eval_gaussian_bw(below);
        let (b2, w2) = eval_gaussian_bw(above);
        assert!((b1 - b2).abs() < 1e-10 && (w1 - w2).abs() < 1e-10, "{b1} {b2} {w1} {w2}");
    }

    #[test]
    fn gaussian_b_at_two() {
        // direct quadrature of B = 1 + A − A′/r with A′ by differences
        let p = VortexProfile::gaussian();
        let r = 2.0;
        let h = 1e-5;
        let da = (p.weight_a(r + h) - p.weight_a(r - h)) / (2.0 * h);
        let oracle = 1.0 + p.weight_a(r) - da / r;
        assert!((p.weight_b(r).unwrap() - oracle).abs() < 1e-8);
        let h1 = 1.0 - 1.0 / (std::f64::consts::E - 1.0);
        let ratio = 0.5 * (1.0 + h1) + 1.0 / p.weight_a(r);
        assert!((p.weight_b(r).unwrap() / p.weight_a(r) - ratio).abs() < 1e-14);
    }

    #[test]
    fn w_limits() {
        assert!((eval_gaussian_bw(0.0).1 + 1.5).abs() < 1e-15);
        let r = 60.0;
        assert!((eval_gaussian_bw(r).1 / (r * r / 16.0) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn psi_matches_table() {
        let k2 = VortexProfile::algebraic(2.0).unwrap();
        let k3 = VortexProfile::algebraic(3.0).unwrap();
        let k15 = VortexProfile::algebraic(1.5).unwrap();
        for &r in &[0.0, 0.5, 0.9, 1.0, 1.1, 3.0, 20.0] {
            let q: f64 = 1.0 + r * r;
            assert!((k2.psi(r) - q.ln() / 4.0).abs() < 1e-13);
            assert!((k3.psi(r) - (q.ln() - 1.0 / q) / 8.0).abs() < 1e-12, "r={r}");
            assert!((k15.psi(r) - (1.0 + q.sqrt()).ln()).abs() < 1e-12, "r={r}");
        }
    }

    #[test]
    fn psi_is_the_log_potential() {
        // ψ(r) = ∫ log max(r,s) ω(s) s ds by brute-force quadrature
        for p in [VortexProfile::gaussian(), VortexProfile::algebraic(3.0).unwrap()] {
            for &r in &[0.0, 0.8, 2.5] {
                // midpoint rule in v = √s, split at the kink s = r
                let mid = |a: f64, b: f64, n: usize| {
                    let h = (b - a) / n as f64;
                    (0..n)
                        .map(|i| {
                            let v = a + (i as f64 + 0.5) * h;
                            let s = v * v;
                            s.max(r).ln() * p.omega_star(s) * s * 2.0 * v * h
                        })
                        .sum::<f64>()
                };
                let inner = if r > 0.0 { mid(0.0, r.sqrt(), 20_000) } else { 0.0 };
                let acc = inner + mid(r.sqrt(), 20.0, 200_000);
                assert!((acc - p.psi(r)).abs() < 1e-6, "{} r={r}: {acc} vs {}", p.label(), p.psi(r));
            }
        }
    }

    #[test]
    fn custom_profile_reproduces_gaussian() {
        let samples: Vec<[f64; 2]> = (0..=400).map(|i| {
            let r = i as f64 * 0.03;
            [r, (-r * r / 4.0).exp()]
        }).collect();
        let p = make_profile(ProfileKind::Custom, &ProfileSpec { samples: Some(samples), beta: Some(40.0), ..Default::default() }).unwrap();
        let g = VortexProfile::gaussian();
        for &r in &[0.0, 0.5, 1.0, 2.0, 4.0] {
            assert!((p.weight_a(r) - g.weight_a(r)).abs() < 3e-4 * g.weight_a(r), "r={r}");
            assert!((p.psi_prime(r) - g.psi_prime(r)).abs() < 1e-7);
        }
        assert!((p.mass() - g.mass()).abs() < 1e-5);
        assert!((p.psi(1.0) - g.psi(1.0)).abs() < 1e-5);
    }

    #[test]
    fn custom_rejects_bad_samples() {
        let bad = vec![[0.0, 1.0], [1.0, 0.5], [2.0, 0.6], [3.0, 0.1]];
        let spec = ProfileSpec { samples: Some(bad), ..Default::default() };
        assert!(make_profile(ProfileKind::Custom, &spec).is_err());
        let neg = vec![[0.0, -1.0], [1.0, -2.0], [2.0, -3.0], [3.0, -4.0]];
        let spec = ProfileSpec { samples: Some(neg), ..Default::default() };
        assert!(make_profile(ProfileKind::Custom, &spec).is_err());
    }
}
