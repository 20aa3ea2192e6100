//! Radial grids, quadrature, difference operators and angular-mode fields.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::profiles::VortexProfile;

/// Node placement rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mapping {
    /// Evenly spaced in `r`, first node at the origin.
    UniformR,
    /// Evenly spaced in `log r` between `r_max·1e-7` and `r_max`.
    LogR,
    /// Evenly spaced in `s = r²/4`, first node at the origin.
    UniformS,
}

impl std::str::FromStr for Mapping {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform_r" => Ok(Mapping::UniformR),
            "log_r" => Ok(Mapping::LogR),
            "uniform_s" => Ok(Mapping::UniformS),
            other => invalid(format!("unknown mapping `{other}`")),
        }
    }
}

/// Ratio between the innermost and outermost node of a `log_r` grid.
pub const LOG_R_SPAN: f64 = 1e-7;

/// Discretized half-line `[0, r_max]` with weights for `∫ f(r) r dr`.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub nodes: Vec<f64>,
    pub quad_weights: Vec<f64>,
    pub r_max: f64,
    pub mapping: Mapping,
    xi_step: f64,
    /// `dr/dξ` at each node.
    dr_dxi: Vec<f64>,
    /// `r·dr/dξ`, the Jacobian of `r dr` in the mapped coordinate.
    jac: Vec<f64>,
}

/// Grid block of a JSON configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "N")]
    pub n: usize,
    pub r_max: f64,
    pub mapping: Mapping,
    #[serde(rename = "K_max", default)]
    pub k_max: usize,
}

impl GridSpec {
    pub fn build(&self) -> Result<RadialGrid> {
        make_grid(self.n, self.r_max, self.mapping)
    }
}

/// A number with 12 significant digits, as written to every CSV table.
pub fn csv_number(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.11e}")
}

/// Build a grid of `n` nodes ending at `r_max`.
pub fn make_grid(n: usize, r_max: f64, mapping: Mapping) -> Result<RadialGrid> {
    if n < 16 {
        return invalid(format!("grid needs at least 16 nodes, got {n}"));
    }
    if !(r_max > 0.0 && r_max.is_finite()) {
        return invalid(format!("r_max must be positive, got {r_max}"));
    }
    let m = (n - 1) as f64;
    let (xi_step, nodes, dr_dxi, jac): (f64, Vec<f64>, Vec<f64>, Vec<f64>) = match mapping {
        Mapping::UniformR => {
            let h = r_max / m;
            let r: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
            let jac = r.clone();
            (h, r, vec![1.0; n], jac)
        }
        Mapping::LogR => {
            let (a, b) = ((r_max * LOG_R_SPAN).ln(), r_max.ln());
            let h = (b - a) / m;
            let r: Vec<f64> = (0..n).map(|i| (a + i as f64 * h).exp()).collect();
            let jac = r.iter().map(|x| x * x).collect();
            (h, r.clone(), r, jac)
        }
        Mapping::UniformS => {
            let h = r_max * r_max / 4.0 / m;
            let r: Vec<f64> = (0..n).map(|i| 2.0 * (i as f64 * h).sqrt()).collect();
            let d = r.iter().map(|&x| if x > 0.0 { 2.0 / x } else { f64::INFINITY }).collect();
            (h, r, d, vec![2.0; n])
        }
    };
    let mut nodes = nodes;
    nodes[n - 1] = r_max;
    let sw = simpson_weights(n, xi_step);
    let mut quad_weights: Vec<f64> = sw.iter().zip(&jac).map(|(w, j)| w * j).collect();
    if mapping == Mapping::LogR {
        quad_weights[0] += nodes[0] * nodes[0] / 2.0;
    }
    Ok(RadialGrid { nodes, quad_weights, r_max, mapping, xi_step, dr_dxi, jac })
}

/// Composite Simpson weights on `n` equispaced points, closing with the
/// 3/8 rule when the number of intervals is odd.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let intervals = n - 1;
    let mut w = vec![0.0; n];
    let simpson_end = if intervals.is_multiple_of(2) { intervals } else { intervals - 3 };
    let mut i = 0;
    while i < simpson_end {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
        i += 2;
    }
    if simpson_end < intervals {
        let j = simpson_end;
        let c = 3.0 * h / 8.0;
        w[j] += c;
        w[j + 1] += 3.0 * c;
        w[j + 2] += 3.0 * c;
        w[j + 3] += c;
    }
    w
}

/// Weights of the first derivative at `x0` from values at `xs` (Fornberg).
fn derivative_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![[0.0f64; 2]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|v| v[1]).collect()
}

const CENTRAL6: [f64; 7] = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0];

impl RadialGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Step of the mapped coordinate.
    pub fn xi_step(&self) -> f64 {
        self.xi_step
    }

    /// Radius and `dr/du` at the fractional node index `u`.
    pub fn radius_at(&self, u: f64) -> (f64, f64) {
        let h = self.xi_step;
        match self.mapping {
            Mapping::UniformR => (u * h, h),
            Mapping::LogR => {
                let r = self.nodes[0] * (u * h).exp();
                (r, r * h)
            }
            Mapping::UniformS => {
                let r = 2.0 * (u * h).sqrt();
                (r, 2.0 * h / r)
            }
        }
    }

    /// Smallest spacing between consecutive nodes.
    pub fn min_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// `∫ f(r) r dr` over the grid.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.quad_weights).map(|(a, w)| a * w).sum()
    }

    pub fn integrate_complex(&self, f: &[Complex64]) -> Complex64 {
        f.iter().zip(&self.quad_weights).map(|(a, w)| a * w).sum()
    }

    /// Fourth-order integrals of `f(r) r dr` over each grid interval.
    fn interval_pieces(&self, f: &[f64]) -> Vec<f64> {
        let n = self.len();
        let g: Vec<f64> = f.iter().zip(&self.jac).map(|(a, j)| a * j).collect();
        let h = self.xi_step;
        (0..n - 1)
            .map(|i| {
                if i == 0 {
                    h * (9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3]) / 24.0
                } else if i == n - 2 {
                    h * (9.0 * g[n - 1] + 19.0 * g[n - 2] - 5.0 * g[n - 3] + g[n - 4]) / 24.0
                } else {
                    h * (-g[i - 1] + 13.0 * g[i] + 13.0 * g[i + 1] - g[i + 2]) / 24.0
                }
            })
            .collect()
    }

    /// Running integral `C_i = ∫₀^{r_i} f(r) r dr`, fourth order in the mapped step.
    pub fn cumulative(&self, f: &[f64]) -> Vec<f64> {
        let pieces = self.interval_pieces(f);
        let mut c = Vec::with_capacity(self.len());
        c.push(if self.mapping == Mapping::LogR { f[0] * self.nodes[0] * self.nodes[0] / 2.0 } else { 0.0 });
        for p in pieces {
            c.push(c[c.len() - 1] + p);
        }
        c
    }

    /// Tail integral `∫_{r_i}^{r_max} f(r) r dr`.
    pub fn cumulative_from_end(&self, f: &[f64]) -> Vec<f64> {
        let pieces = self.interval_pieces(f);
        let n = self.len();
        let mut c = vec![0.0; n];
        for i in (0..n - 1).rev() {
            c[i] = c[i + 1] + pieces[i];
        }
        c
    }

    /// `df/dr` with a sixth-order stencil in the mapped coordinate.
    ///
    /// `parity` gives the symmetry `f(-r) = ±f(r)` used for ghost values at the
    /// origin on grids that start at `r = 0`; `None` switches to one-sided stencils.
    pub fn derivative(&self, f: &[f64], parity: Option<i32>) -> Vec<f64> {
        let n = self.len();
        let h = self.xi_step;
        let use_ghosts = parity.is_some() && self.mapping == Mapping::UniformR;
        let sign = parity.map(|p| if p.rem_euclid(2) == 0 { 1.0 } else { -1.0 }).unwrap_or(1.0);
        let mut d = vec![0.0; n];
        for i in 0..n {
            let interior = i >= 3 && i + 3 < n;
            let dxi = if interior || (use_ghosts && i + 3 < n) {
                let mut s = 0.0;
                for (j, c) in CENTRAL6.iter().enumerate() {
                    let idx = i as isize + j as isize - 3;
                    let v = if idx < 0 { sign * f[(-idx) as usize] } else { f[idx as usize] };
                    s += c * v;
                }
                s / (60.0 * h)
            } else {
                let lo = if i < 3 { 0 } else { n - 7 };
                let xs: Vec<f64> = (lo..lo + 7).map(|j| j as f64).collect();
                let w = derivative_weights(i as f64, &xs);
                w.iter().zip(&f[lo..lo + 7]).map(|(a, b)| a * b).sum::<f64>() / h
            };
            d[i] = if self.dr_dxi[i].is_finite() { dxi / self.dr_dxi[i] } else { 0.0 };
        }
        if self.mapping == Mapping::UniformS {
            d[0] = if parity.map(|p| p.rem_euclid(2) == 0).unwrap_or(false) { 0.0 } else { d[1] };
        }
        d
    }

    pub fn derivative_complex(&self, f: &[Complex64], parity: Option<i32>) -> Vec<Complex64> {
        let re: Vec<f64> = f.iter().map(|z| z.re).collect();
        let im: Vec<f64> = f.iter().map(|z| z.im).collect();
        let dr = self.derivative(&re, parity);
        let di = self.derivative(&im, parity);
        dr.into_iter().zip(di).map(|(a, b)| Complex64::new(a, b)).collect()
    }

    /// Evaluate `g` at every node.
    pub fn map<F: Fn(f64) -> f64>(&self, g: F) -> Vec<f64> {
        self.nodes.iter().map(|&r| g(r)).collect()
    }
}

/// Vorticity expanded as `ω(r,θ) = Σ_k ω_k(r) e^{ikθ}` for `|k| ≤ k_max`.
#[derive(Debug, Clone)]
pub struct PolarField {
    pub grid: Arc<RadialGrid>,
    pub k_max: usize,
    /// Mode `k` lives at index `k + k_max`.
    modes: Vec<Vec<Complex64>>,
    pub reality: bool,
}

impl PolarField {
    pub fn zeros(grid: Arc<RadialGrid>, k_max: usize) -> Self {
        let n = grid.len();
        Self { grid, k_max, modes: vec![vec![Complex64::new(0.0, 0.0); n]; 2 * k_max + 1], reality: true }
    }

    /// A radially symmetric field.
    pub fn radial(grid: Arc<RadialGrid>, f: &[f64], k_max: usize) -> Self {
        let mut out = Self::zeros(grid, k_max);
        out.set_mode(0, f.iter().map(|&v| Complex64::new(v, 0.0)).collect());
        out
    }

    pub fn mode(&self, k: i32) -> &[Complex64] {
        &self.modes[self.index(k)]
    }

    fn index(&self, k: i32) -> usize {
        assert!(k.unsigned_abs() as usize <= self.k_max, "mode {k} outside |k| <= {}", self.k_max);
        (k + self.k_max as i32) as usize
    }

    /// Set mode `k`; with the reality flag the mode `-k` becomes the conjugate.
    pub fn set_mode(&mut self, k: i32, v: Vec<Complex64>) {
        assert_eq!(v.len(), self.grid.len());
        if self.reality {
            if k == 0 {
                let idx = self.index(0);
                self.modes[idx] = v.iter().map(|z| Complex64::new(z.re, 0.0)).collect();
                return;
            }
            let neg = self.index(-k);
            self.modes[neg] = v.iter().map(|z| z.conj()).collect();
        }
        let idx = self.index(k);
        self.modes[idx] = v;
    }

    /// Replace negative modes by conjugates of the positive ones.
    pub fn enforce_reality(&mut self) {
        for k in 1..=self.k_max as i32 {
            let v = self.mode(k).to_vec();
            let neg = self.index(-k);
            self.modes[neg] = v.iter().map(|z| z.conj()).collect();
        }
        let z = self.index(0);
        self.modes[z].iter_mut().for_each(|c| c.im = 0.0);
        self.reality = true;
    }

    pub fn scale(&mut self, t: f64) {
        self.modes.iter_mut().flatten().for_each(|z| *z *= t);
    }

    pub fn scaled(&self, t: f64) -> Self {
        let mut out = self.clone();
        out.scale(t);
        out
    }

    pub fn add_scaled(&mut self, other: &PolarField, t: f64) {
        assert_eq!(self.k_max, other.k_max);
        for (a, b) in self.modes.iter_mut().zip(&other.modes) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y * t);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.modes.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Modes in ascending order of `k`.
    pub fn iter_modes(&self) -> impl Iterator<Item = (i32, &[Complex64])> {
        let km = self.k_max as i32;
        self.modes.iter().enumerate().map(move |(i, v)| (i as i32 - km, v.as_slice()))
    }

    /// `2π Σ_k ∫ w |ω_k|² r dr` for a radial weight `w` sampled on the nodes.
    pub fn weighted_norm_sq(&self, w: &[f64]) -> f64 {
        let g = &self.grid;
        2.0 * PI
            * self
                .iter_modes()
                .map(|(_, v)| g.integrate(&v.iter().zip(w).map(|(z, a)| a * z.norm_sqr()).collect::<Vec<_>>()))
                .sum::<f64>()
    }

    /// Real part of `2π Σ_k ∫ w ω_k conj(η_k) r dr`.
    pub fn weighted_inner(&self, other: &PolarField, w: &[f64]) -> f64 {
        let g = &self.grid;
        2.0 * PI
            * self
                .iter_modes()
                .zip(other.iter_modes())
                .map(|((_, a), (_, b))| {
                    g.integrate(&a.iter().zip(b).zip(w).map(|((x, y), c)| c * (x * y.conj()).re).collect::<Vec<_>>())
                })
                .sum::<f64>()
    }

    /// Values on `n_theta` equispaced angles: `out[j][i] = ω(r_i, θ_j)`.
    pub fn to_collocation(&self, n_theta: usize) -> Vec<Vec<f64>> {
        assert!(n_theta > 2 * self.k_max, "angular grid too coarse for the modes");
        let n = self.grid.len();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_inverse(n_theta);
        let mut out = vec![vec![0.0; n]; n_theta];
        let mut buf = vec![Complex64::new(0.0, 0.0); n_theta];
        for i in 0..n {
            buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            for (k, v) in self.iter_modes() {
                buf[k.rem_euclid(n_theta as i32) as usize] += v[i];
            }
            fft.process(&mut buf);
            for j in 0..n_theta {
                out[j][i] = buf[j].re;
            }
        }
        out
    }

    /// CSV with header `k,r,re,im`, modes in ascending order of `k`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k,r,re,im")?;
        for (k, v) in self.iter_modes() {
            for (z, r) in v.iter().zip(&self.grid.nodes) {
                writeln!(out, "{k},{},{},{}", csv_number(*r), csv_number(z.re), csv_number(z.im))?;
            }
        }
        Ok(())
    }

    /// Project collocation values `vals[j][i]` back onto modes `|k| ≤ k_max`.
    pub fn from_collocation(grid: Arc<RadialGrid>, vals: &[Vec<f64>], k_max: usize) -> Self {
        let n_theta = vals.len();
        let n = grid.len();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n_theta);
        let mut out = Self::zeros(grid, k_max);
        let mut buf = vec![Complex64::new(0.0, 0.0); n_theta];
        let km = k_max as i32;
        for i in 0..n {
            for j in 0..n_theta {
                buf[j] = Complex64::new(vals[j][i], 0.0);
            }
            fft.process(&mut buf);
            for k in -km..=km {
                let idx = out.index(k);
                out.modes[idx][i] = buf[k.rem_euclid(n_theta as i32) as usize] / n_theta as f64;
            }
        }
        out
    }
}

/// Mass, first moments and moment of inertia.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
    pub inertia: f64,
}

pub fn moments(field: &PolarField) -> Moments {
    let g = &field.grid;
    let r = &g.nodes;
    let w0: Vec<f64> = field.mode(0).iter().map(|z| z.re).collect();
    let m0 = 2.0 * PI * g.integrate(&w0);
    let inertia = 2.0 * PI * g.integrate(&w0.iter().zip(r).map(|(a, x)| a * x * x).collect::<Vec<_>>());
    if field.k_max == 0 {
        return Moments { m0, m1: 0.0, m2: 0.0, inertia };
    }
    let first = |k: i32| g.integrate_complex(&field.mode(k).iter().zip(r).map(|(z, x)| z * x).collect::<Vec<_>>());
    let (p, m) = (first(1), first(-1));
    let m1 = PI * (p + m).re;
    let m2 = (PI * (m - p) / Complex64::new(0.0, 1.0)).re;
    Moments { m0, m1, m2, inertia }
}

/// Linear functionals that [`project_constraints`] can remove.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    /// `∫ ω dx = 0`.
    Mass,
    /// `∫ (x_j/|x|) ω dx = 0`.
    AngularFirst,
    /// `∫ x_j ω dx = 0`.
    LinearFirst,
}

/// Orthogonal projection, in the `⟨𝒜·,·⟩` inner product, onto the fields where
/// the selected functionals vanish.
pub fn project_constraints(
    field: &PolarField,
    which: &BTreeSet<Constraint>,
    profile: &VortexProfile,
) -> Result<PolarField> {
    if which.contains(&Constraint::LinearFirst) && profile.beta() <= 4.0 {
        return invalid(format!(
            "linear first-moment projector needs decay exponent above 4, profile has {}",
            profile.beta()
        ));
    }
    let g = field.grid.clone();
    let inv_a: Vec<f64> = g.nodes.iter().map(|&r| 1.0 / profile.weight_a(r)).collect();
    let mut out = field.clone();
    if which.contains(&Constraint::Mass) {
        project_mode(&mut out, 0, &[vec![1.0; g.len()]], &inv_a);
    }
    if field.k_max >= 1 {
        let mut gens = Vec::new();
        if which.contains(&Constraint::AngularFirst) {
            gens.push(vec![1.0; g.len()]);
        }
        if which.contains(&Constraint::LinearFirst) {
            gens.push(g.nodes.clone());
        }
        if !gens.is_empty() {
            project_mode(&mut out, 1, &gens, &inv_a);
            if field.k_max >= 1 {
                project_mode(&mut out, -1, &gens, &inv_a);
            }
        }
    }
    Ok(out)
}

/// Remove from mode `k` its components along `g_j/A` so that `∫ g_j ω_k r dr = 0`.
fn project_mode(field: &mut PolarField, k: i32, gens: &[Vec<f64>], inv_a: &[f64]) {
    let g = field.grid.clone();
    let m = gens.len();
    let dirs: Vec<Vec<f64>> = gens.iter().map(|gj| gj.iter().zip(inv_a).map(|(a, b)| a * b).collect()).collect();
    let mut gram = nalgebra::DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            gram[(i, j)] = g.integrate(&gens[i].iter().zip(&dirs[j]).map(|(a, b)| a * b).collect::<Vec<_>>());
        }
    }
    let v = field.mode(k).to_vec();
    let rhs_re = nalgebra::DVector::from_iterator(
        m,
        gens.iter().map(|gj| g.integrate(&gj.iter().zip(&v).map(|(a, z)| a * z.re).collect::<Vec<_>>())),
    );
    let rhs_im = nalgebra::DVector::from_iterator(
        m,
        gens.iter().map(|gj| g.integrate(&gj.iter().zip(&v).map(|(a, z)| a * z.im).collect::<Vec<_>>())),
    );
    let lu = gram.lu();
    let (cr, ci) = (lu.solve(&rhs_re).expect("gram matrix"), lu.solve(&rhs_im).expect("gram matrix"));
    let idx = field.index(k);
    for (i, z) in field.modes[idx].iter_mut().enumerate() {
        for j in 0..m {
            *z -= Complex64::new(cr[j], ci[j]) * dirs[j][i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(make_grid(15, 1.0, Mapping::UniformR).is_err());
        assert!(make_grid(64, 0.0, Mapping::UniformR).is_err());
    }

    #[test]
    fn uniform_spacing() {
        let g = make_grid(512, 20.0, Mapping::UniformR).unwrap();
        assert!((g.nodes[1] - 20.0 / 511.0).abs() < 1e-15);
        assert_eq!(*g.nodes.last().unwrap(), 20.0);
    }

    #[test]
    fn gaussian_moment_on_every_mapping() {
        for (mapping, n, tol) in [(Mapping::UniformR, 512, 2e-8), (Mapping::LogR, 512, 2e-8), (Mapping::UniformS, 4096, 1e-8)] {
            let g = make_grid(n, 20.0, mapping).unwrap();
            let v = g.integrate(&g.map(|r| (-r * r / 4.0).exp()));
            assert!((v - 2.0).abs() < tol, "{mapping:?}: {v}");
        }
    }

    #[test]
    fn algebraic_tail_on_log_grid() {
        let g = make_grid(2048, 1e3, Mapping::LogR).unwrap();
        let v = g.integrate(&g.map(|r| (1.0 + r * r).powi(-2)));
        assert!((v - 0.5).abs() < 1e-6, "{v}");
    }

    #[test]
    fn cumulative_matches_closed_form() {
        let g = make_grid(400, 12.0, Mapping::UniformR).unwrap();
        let c = g.cumulative(&g.map(|r| (-r * r / 4.0).exp()));
        for (i, &r) in g.nodes.iter().enumerate() {
            let exact = 2.0 * (1.0 - (-r * r / 4.0).exp());
            assert!((c[i] - exact).abs() < 5e-8);
        }
    }

    #[test]
    fn derivative_with_parity() {
        let g = make_grid(257, 8.0, Mapping::UniformR).unwrap();
        let f = g.map(|r| r * (-r * r / 4.0).exp());
        let d = g.derivative(&f, Some(1));
        for (i, &r) in g.nodes.iter().enumerate() {
            let exact = (1.0 - r * r / 2.0) * (-r * r / 4.0).exp();
            assert!((d[i] - exact).abs() < 1e-7, "r={r}");
        }
    }

    #[test]
    fn collocation_round_trip() {
        let g = Arc::new(make_grid(32, 4.0, Mapping::UniformR).unwrap());
        let mut f = PolarField::zeros(g.clone(), 3);
        f.set_mode(0, g.nodes.iter().map(|&r| Complex64::new((-r).exp(), 0.0)).collect());
        f.set_mode(2, g.nodes.iter().map(|&r| Complex64::new(r, -0.5 * r)).collect());
        let vals = f.to_collocation(16);
        let back = PolarField::from_collocation(g, &vals, 3);
        for (k, v) in f.iter_modes() {
            for (a, b) in v.iter().zip(back.mode(k)) {
                assert!((a - b).norm() < 1e-13);
            }
        }
    }
}
