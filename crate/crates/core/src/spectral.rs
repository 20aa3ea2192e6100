//! Eigenvalue problems: Hardy operator, `B̃₁`, the operators `L_k`, the
//! logarithmic kernel and the quasimode bounds.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{invalid, LabError, Result};
use crate::grid::{csv_number, make_grid, RadialGrid};
use crate::profiles::{eval_gaussian_bw, VortexProfile};
use crate::special::h_aux;
use crate::tridiag::SymTridiagonal;

/// Relative agreement required between the `N` and `2N` solves.
pub const DOUBLING_TOL: f64 = 1e-4;

/// Dynamic range of `B(x)` kept in the Hardy domain.
pub const HARDY_B_CAP: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resolution {
    #[serde(rename = "N")]
    pub n: usize,
    pub r_max: f64,
}

/// Eigenvalues, eigenfunctions and derived scalars of one operator.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub operator: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<i32>,
    pub eigenvalues: Vec<f64>,
    /// Radii at which the eigenfunctions are sampled.
    #[serde(skip)]
    pub abscissa: Vec<f64>,
    #[serde(skip)]
    pub eigenfunctions: Vec<Vec<f64>>,
    pub resolution: Resolution,
    pub converged: bool,
    pub derived: BTreeMap<String, f64>,
}

impl SpectralReport {
    fn new(operator: &str, k: Option<i32>, grid: &RadialGrid) -> Self {
        Self {
            operator: operator.into(),
            k,
            eigenvalues: Vec::new(),
            abscissa: Vec::new(),
            eigenfunctions: Vec::new(),
            resolution: Resolution { n: grid.len(), r_max: grid.r_max },
            converged: false,
            derived: BTreeMap::new(),
        }
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.derived.get(key).copied()
    }

    /// Eigenfunctions as CSV with header `r,value_0,value_1,…`.
    pub fn write_eigenfunctions_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        let head: Vec<String> = (0..self.eigenfunctions.len()).map(|i| format!("value_{i}")).collect();
        writeln!(out, "r,{}", head.join(","))?;
        for (i, r) in self.abscissa.iter().enumerate() {
            let cells: Vec<String> = self.eigenfunctions.iter().map(|f| csv_number(f[i])).collect();
            writeln!(out, "{},{}", csv_number(*r), cells.join(","))?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, v: f64) {
        self.derived.insert(key.into(), v);
    }
}

/// Run `f` at `N` and `2N` and flag the report converged when the reported
/// eigenvalues agree to [`DOUBLING_TOL`].
pub fn with_doubling<F>(grid: &RadialGrid, f: F) -> Result<SpectralReport>
where
    F: Fn(&RadialGrid) -> Result<SpectralReport> + Sync,
{
    let fine = make_grid(2 * grid.len(), grid.r_max, grid.mapping)?;
    let (coarse, fine) = rayon::join(|| f(grid), || f(&fine));
    let (mut coarse, fine) = (coarse?, fine?);
    let m = coarse.eigenvalues.len().min(fine.eigenvalues.len());
    let mut worst: f64 = 0.0;
    for (a, b) in coarse.eigenvalues[..m].iter().zip(&fine.eigenvalues[..m]) {
        worst = worst.max((a - b).abs() / a.abs().max(b.abs()).max(1.0));
    }
    coarse.converged = worst < DOUBLING_TOL;
    coarse.set("doubling_change", worst);
    Ok(coarse)
}

/// Flip the sign so that the entry of largest magnitude is positive.
fn fix_sign(v: &mut [f64]) {
    let big = v.iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
    if big < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Top eigenpairs of a symmetric operator by Lanczos with full reorthogonalization.
pub(crate) fn lanczos_top<F>(apply: F, n: usize, want: usize, tol: f64) -> (Vec<f64>, Vec<Vec<f64>>)
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let max_steps = n.min(400);
    let want = want.min(n);
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(max_steps);
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * (i as f64).sin()).collect();
    normalize(&mut v);
    let mut result = (Vec::new(), Vec::new());
    for j in 0..max_steps {
        q.push(v.clone());
        let mut w = apply(&q[j]);
        let a = dot(&q[j], &w);
        alpha.push(a);
        for _ in 0..2 {
            for qi in &q {
                let c = dot(qi, &w);
                w.iter_mut().zip(qi).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = dot(&w, &w).sqrt();
        let steps = j + 1;
        let check = steps >= want + 8 && (steps % 8 == 0 || steps == max_steps) || b < 1e-13 || steps == n;
        if check {
            let mut t = DMatrix::<f64>::zeros(steps, steps);
            for i in 0..steps {
                t[(i, i)] = alpha[i];
                if i + 1 < steps {
                    t[(i, i + 1)] = beta[i];
                    t[(i + 1, i)] = beta[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            let mut order: Vec<usize> = (0..steps).collect();
            order.sort_by(|&x, &y| eig.eigenvalues[y].partial_cmp(&eig.eigenvalues[x]).unwrap());
            let top: Vec<usize> = order.into_iter().take(want).collect();
            let scale = top.iter().map(|&i| eig.eigenvalues[i].abs()).fold(1e-300, f64::max);
            let done = b < 1e-13
                || steps == n
                || steps == max_steps
                || top.iter().all(|&i| (b * eig.eigenvectors[(steps - 1, i)]).abs() <= tol * scale);
            if done {
                let vals: Vec<f64> = top.iter().map(|&i| eig.eigenvalues[i]).collect();
                let vecs: Vec<Vec<f64>> = top
                    .iter()
                    .map(|&i| {
                        let mut x = vec![0.0; n];
                        for (l, ql) in q.iter().enumerate() {
                            let c = eig.eigenvectors[(l, i)];
                            x.iter_mut().zip(ql).for_each(|(a, b)| *a += c * b);
                        }
                        normalize(&mut x);
                        x
                    })
                    .collect();
                result = (vals, vecs);
                break;
            }
        }
        beta.push(b);
        v = w.iter().map(|x| x / b).collect();
    }
    result
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

fn dense_apply(m: &DMatrix<f64>) -> impl Fn(&[f64]) -> Vec<f64> + '_ {
    move |x: &[f64]| {
        let v = nalgebra::DVector::from_column_slice(x);
        (m * v).as_slice().to_vec()
    }
}

/// Largest `|m_ij − m_ji|` relative to the largest entry.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = m.amax().max(f64::MIN_POSITIVE);
    (m - m.transpose()).amax() / scale
}

fn require_symmetric(m: &DMatrix<f64>) -> Result<()> {
    let a = asymmetry(m);
    if a > 1e-12 {
        return Err(LabError::Breakdown(format!("assembled matrix is not symmetric (relative defect {a:.1e})")));
    }
    Ok(())
}

// ---------------------------------------------------------------- Hardy

/// Check the two integrability conditions that make the Hardy inequality hold.
///
/// Returns the local growth exponent `d log A / d log r` at the outer radius.
pub fn hardy_conditions(profile: &VortexProfile, r_max: f64) -> Result<f64> {
    let a0 = profile.weight_a(0.0);
    if !(a0 > 0.0 && a0.is_finite()) {
        return Err(LabError::Domain(format!("A(0) = {a0} is not positive and finite")));
    }
    let h = 1e-4;
    let p = (profile.log_a(r_max * (1.0 + h)) - profile.log_a(r_max * (1.0 - h))) / (2.0 * h);
    if !(p > 2.0) {
        return Err(LabError::Domain(format!(
            "A grows like r^{p:.3} at r = {r_max}; the Hardy condition at infinity needs an exponent above 2"
        )));
    }
    Ok(p)
}

/// Hardy operator `-∂ₓ(B ∂ₓ)` with `log B` given as a function of `x = log r`.
fn hardy_eigen(log_b: &dyn Fn(f64) -> f64, x_lo: f64, x_hi: f64, intervals: usize) -> (f64, Vec<f64>, Vec<f64>, (f64, f64)) {
    // clip the domain where B exceeds HARDY_B_CAP times its minimum
    let probe = 4096;
    let xs: Vec<f64> = (0..=probe).map(|i| x_lo + (x_hi - x_lo) * i as f64 / probe as f64).collect();
    let lb: Vec<f64> = xs.iter().map(|&x| log_b(x)).collect();
    let lb_min = lb.iter().copied().fold(f64::INFINITY, f64::min);
    let thr = lb_min + HARDY_B_CAP.ln();
    let first = lb.iter().position(|&v| v <= thr).unwrap_or(0);
    let last = lb.iter().rposition(|&v| v <= thr).unwrap_or(probe);
    let (a, b) = (xs[first], xs[last]);
    let dx = (b - a) / intervals as f64;
    let bm: Vec<f64> = (0..intervals).map(|j| (log_b(a + (j as f64 + 0.5) * dx) - lb_min).exp()).collect();
    let m = intervals - 1;
    let diag: Vec<f64> = (0..m).map(|i| (bm[i] + bm[i + 1]) / (dx * dx)).collect();
    let off: Vec<f64> = (0..m - 1).map(|i| -bm[i + 1] / (dx * dx)).collect();
    let t = SymTridiagonal::new(diag, off);
    let lam = t.eigenvalue(0);
    let mut v = t.eigenvector(lam);
    fix_sign(&mut v);
    let scale = dx.sqrt();
    let mut h = vec![0.0];
    h.extend(v.iter().map(|x| x / scale));
    h.push(0.0);
    let x: Vec<f64> = (0..=intervals).map(|j| a + j as f64 * dx).collect();
    (lam * lb_min.exp(), x, h, (a, b))
}

/// Optimal Hardy constant `C_H` for a weight given through `log A(r)`.
pub fn hardy_constant_for(log_a: &dyn Fn(f64) -> f64, r_lo: f64, r_hi: f64, intervals: usize) -> (f64, Vec<f64>, Vec<f64>) {
    let log_b = |x: f64| -2.0 * x + log_a(x.exp());
    let (lam, x, h, _) = hardy_eigen(&log_b, r_lo.ln(), r_hi.ln(), intervals);
    (1.0 / lam, x, h)
}

/// One Hardy solve on the log variable, with `N - 1` interior unknowns.
pub fn hardy_single(profile: &VortexProfile, grid: &RadialGrid) -> Result<SpectralReport> {
    let growth = hardy_conditions(profile, grid.r_max)?;
    let log_b = |x: f64| -2.0 * x + profile.log_a(x.exp());
    let x_lo = (grid.r_max * crate::grid::LOG_R_SPAN).ln();
    let (lam, x, h, (a, b)) = hardy_eigen(&log_b, x_lo, grid.r_max.ln(), grid.len());
    let mut rep = SpectralReport::new("hardy_B", None, grid);
    rep.eigenvalues = vec![lam];
    rep.abscissa = x.iter().map(|v| v.exp()).collect();
    rep.eigenfunctions = vec![h];
    rep.set("C_H", 1.0 / lam);
    rep.set("x_lo", a);
    rep.set("x_hi", b);
    rep.set("growth_exponent", growth.min(1e300));
    Ok(rep)
}

pub fn hardy_constant(profile: &VortexProfile, grid: &RadialGrid) -> Result<SpectralReport> {
    with_doubling(grid, |g| hardy_single(profile, g))
}

/// Which side of 1 the Hardy constant lies on, read off the sign of `V`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HardyOrdering {
    #[serde(rename = "C_H<1")]
    Below,
    #[serde(rename = "C_H=1")]
    Equal,
    #[serde(rename = "C_H>1")]
    Above,
    #[serde(rename = "indeterminate")]
    Indeterminate,
}

impl std::fmt::Display for HardyOrdering {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Below => "C_H<1",
            Self::Equal => "C_H=1",
            Self::Above => "C_H>1",
            Self::Indeterminate => "indeterminate",
        })
    }
}

/// Tolerance on `|V|` below which a sample counts as zero.
pub const V_SIGN_TOL: f64 = 1e-10;

pub fn vsign_hardy_check(profile: &VortexProfile, grid: &RadialGrid) -> HardyOrdering {
    let vals: Vec<f64> = grid.nodes.iter().filter(|&&r| r > 0.0).filter_map(|&r| profile.potential_v(r).ok()).collect();
    if vals.iter().all(|v| v.abs() < V_SIGN_TOL) {
        HardyOrdering::Equal
    } else if vals.iter().all(|&v| v > -V_SIGN_TOL) {
        HardyOrdering::Below
    } else if vals.iter().all(|&v| v < V_SIGN_TOL) {
        HardyOrdering::Above
    } else {
        HardyOrdering::Indeterminate
    }
}

// ---------------------------------------------------------------- B_k

/// 8-point Gauss–Legendre rule on `[0, 1]`.
const GL8: [(f64, f64); 8] = [
    (0.019855071751231912, 0.050614268145188344),
    (0.10166676129318664, 0.11119051722668717),
    (0.2372337950418355, 0.15685332293894352),
    (0.4082826787521751, 0.18134189168918088),
    (0.5917173212478248, 0.18134189168918088),
    (0.7627662049581645, 0.15685332293894352),
    (0.8983332387068134, 0.11119051722668717),
    (0.9801449282487681, 0.050614268145188344),
];

/// `B_k[f]`, the regular decaying solution of `-g″ - g′/r + k²g/r² = f`.
///
/// The split kernel is integrated exactly against a cubic interpolant of `f`
/// on each interval, with both halves rescaled so that no power of `r` overflows.
pub fn bk_apply(k: i32, f: &[f64], grid: &RadialGrid) -> Result<Vec<f64>> {
    if k == 0 {
        return invalid("B_k is defined for k != 0; the radial stream function is handled by the energy module");
    }
    let m = k.unsigned_abs() as i32;
    let r = &grid.nodes;
    let n = r.len();
    let mut p_in = vec![0.0; n - 1];
    let mut p_out = vec![0.0; n - 1];
    for i in 0..n - 1 {
        let j0 = i.saturating_sub(1).min(n - 4);
        let (a, b) = (r[i], r[i + 1]);
        for &(t, w) in &GL8 {
            let u = i as f64 + t;
            let (s, ds) = grid.radius_at(u);
            let mut fs = 0.0;
            for j in j0..j0 + 4 {
                let mut l = 1.0;
                for q in j0..j0 + 4 {
                    if q != j {
                        l *= (u - q as f64) / (j as f64 - q as f64);
                    }
                }
                fs += l * f[j];
            }
            let base = w * s * fs * ds;
            p_in[i] += base * (s / b).powi(m);
            if a > 0.0 {
                p_out[i] += base * (a / s).powi(m);
            }
        }
    }
    let ratio: Vec<f64> = (0..n - 1).map(|i| (r[i] / r[i + 1]).powi(m)).collect();
    let mut c_in = vec![0.0; n];
    c_in[0] = f[0] * r[0] * r[0] / (m + 2) as f64;
    for i in 0..n - 1 {
        c_in[i + 1] = ratio[i] * c_in[i] + p_in[i];
    }
    let mut c_out = vec![0.0; n];
    for i in (0..n - 1).rev() {
        c_out[i] = ratio[i] * c_out[i + 1] + p_out[i];
    }
    Ok((0..n).map(|i| if r[i] == 0.0 { 0.0 } else { (c_in[i] + c_out[i]) / (2 * m) as f64 }).collect())
}

/// Nodes with positive quadrature weight and finite `A`, with `√w·A^{-1/2}`.
fn weighted_nodes(profile: &VortexProfile, grid: &RadialGrid) -> (Vec<usize>, Vec<f64>) {
    let mut idx = Vec::new();
    let mut u = Vec::new();
    for (i, (&r, &w)) in grid.nodes.iter().zip(&grid.quad_weights).enumerate() {
        let la = profile.log_a(r);
        if w > 0.0 && la.is_finite() {
            let ui = w.sqrt() * (-0.5 * la).exp();
            if ui > 0.0 {
                idx.push(i);
                u.push(ui);
            }
        }
    }
    (idx, u)
}

fn expand(idx: &[usize], v: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    for (&i, &x) in idx.iter().zip(v) {
        out[i] = x;
    }
    out
}

/// Spectrum of `B̃₁ = A^{-1/2} B₁ A^{-1/2}` on `L²(r dr)`.
pub fn btilde1_single(profile: &VortexProfile, grid: &RadialGrid) -> Result<SpectralReport> {
    let (idx, u) = weighted_nodes(profile, grid);
    let n = idx.len();
    let r: Vec<f64> = idx.iter().map(|&i| grid.nodes[i]).collect();
    let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (r[i] / r[j]).min(r[j] / r[i]) * u[i] * u[j]);
    require_symmetric(&m)?;
    let (vals, vecs) = lanczos_top(dense_apply(&m), n, 4, 1e-12);
    let sw: Vec<f64> = idx.iter().map(|&i| grid.quad_weights[i].sqrt()).collect();
    let to_h = |v: &[f64]| {
        let mut h: Vec<f64> = v.iter().zip(&sw).map(|(a, s)| a / s).collect();
        fix_sign(&mut h);
        expand(&idx, &h, grid.len())
    };
    let mut rep = SpectralReport::new("btilde1", Some(1), grid);
    rep.eigenfunctions = vecs.iter().map(|v| to_h(v)).collect();
    rep.abscissa = grid.nodes.clone();
    rep.eigenvalues = vals.clone();
    rep.set("spectral_radius", vals[0]);
    rep.set("gap", vals[0] - vals.get(1).copied().unwrap_or(0.0));

    // the predicted eigenfunction h = A^{1/2}(-ω*′), compared in L²(r dr)
    let pred: Vec<f64> = idx.iter().map(|&i| {
        let x = grid.nodes[i];
        (0.5 * profile.log_a(x)).exp() * -profile.omega_star_prime(x)
    }).collect();
    let pv: Vec<f64> = pred.iter().zip(&sw).map(|(a, s)| a * s).collect();
    let pn = dot(&pv, &pv).sqrt();
    let sgn = dot(&pv, &vecs[0]).signum();
    let err = pv.iter().zip(&vecs[0]).map(|(a, b)| (a / pn - sgn * b).powi(2)).sum::<f64>().sqrt();
    rep.set("eigenfunction_l2_error", err);

    // sup of B̃₁ on the complement of A^{-1/2}
    let mut p = u.clone();
    normalize(&mut p);
    let proj = |x: &[f64]| {
        let c = dot(&p, x);
        x.iter().zip(&p).map(|(a, b)| a - c * b).collect::<Vec<f64>>()
    };
    let apply = |x: &[f64]| {
        let y = dense_apply(&m)(&proj(x));
        proj(&y)
    };
    let (pvals, _) = lanczos_top(apply, n, 2, 1e-12);
    rep.set("C1_prime", pvals[0]);
    rep.set("gamma_1", 0.5f64.min(1.0 - pvals[0]));
    Ok(rep)
}

pub fn btilde1_spectrum(profile: &VortexProfile, grid: &RadialGrid) -> Result<SpectralReport> {
    with_doubling(grid, |g| btilde1_single(profile, g))
}

/// Generalized pencil `L g = μ A^{-1} g` with `L = -∂²-∂/r+1/r²`, Dirichlet at both ends.
pub fn generalized_l0_single(profile: &VortexProfile, grid: &RadialGrid) -> Result<SpectralReport> {
    let r = &grid.nodes;
    let n = r.len();
    let lo = if r[0] == 0.0 { 1 } else { 0 };
    let unknowns: Vec<usize> = (lo.max(1)..n - 1).collect();
    let flux = |i: usize| 0.5 * (r[i] + r[i + 1]) / (r[i + 1] - r[i]);
    let mut diag = Vec::new();
    let mut mass = Vec::new();
    for &i in &unknowns {
        let left = if i > 0 { r[i - 1] } else { 0.0 };
        let width = 0.5 * (r[i + 1] - left);
        let cell = r[i] * width;
        let mut d = flux(i) + if i > 0 { flux(i - 1) } else { 0.0 };
        d += cell / (r[i] * r[i]);
        diag.push(d);
        mass.push(cell * (-profile.log_a(r[i])).exp());
    }
    let m = unknowns.len();
    let d: Vec<f64> = (0..m).map(|j| diag[j] / mass[j]).collect();
    let off: Vec<f64> = (0..m - 1).map(|j| -flux(unknowns[j]) / (mass[j] * mass[j + 1]).sqrt()).collect();
    let t = SymTridiagonal::new(d, off);
    let mut rep = SpectralReport::new("generalized_L0", Some(1), grid);
    rep.eigenvalues = t.lowest(2);
    rep.abscissa = grid.nodes.clone();
    rep.set("mu_min", rep.eigenvalues[0]);
    Ok(rep)
}

// ---------------------------------------------------------------- L_k

/// Finite-volume matrix of `L_k` in the measure `r dr`, symmetrized by the cell volumes.
///
/// Returns the operator, the node indices of the unknowns and the cell volumes.
pub fn lk_operator(k: i32, grid: &RadialGrid) -> Result<(SymTridiagonal, Vec<usize>, Vec<f64>)> {
    let r = &grid.nodes;
    if r[0] != 0.0 {
        return invalid("L_k needs a grid whose first node is the origin");
    }
    let n = r.len();
    let first = if k == 0 { 0 } else { 1 };
    let idx: Vec<usize> = (first..n - 1).collect();
    let half = |i: usize| 0.5 * (r[i] + r[i + 1]);
    let flux = |i: usize| half(i) / (r[i + 1] - r[i]);
    let vol = |i: usize| {
        let outer = half(i);
        let inner = if i == 0 { 0.0 } else { half(i - 1) };
        0.5 * (outer * outer - inner * inner)
    };
    let k2 = (k * k) as f64;
    let mut diag = Vec::with_capacity(idx.len());
    let mut vols = Vec::with_capacity(idx.len());
    for &i in &idx {
        let v = vol(i);
        let mut d = flux(i) + if i > 0 { flux(i - 1) } else { 0.0 };
        let w = eval_gaussian_bw(r[i]).1;
        d += v * (w + if r[i] > 0.0 { k2 / (r[i] * r[i]) } else { 0.0 });
        diag.push(d / v);
        vols.push(v);
    }
    let off: Vec<f64> = (0..idx.len() - 1).map(|j| -flux(idx[j]) / (vols[j] * vols[j + 1]).sqrt()).collect();
    Ok((SymTridiagonal::new(diag, off), idx, vols))
}

/// Lowest eigenpairs of `L_k = -(1/r)∂(r∂) + k²/r² + W`.
pub fn lk_single(k: i32, grid: &RadialGrid) -> Result<SpectralReport> {
    let (t, idx, vols) = lk_operator(k, grid)?;
    let gauss = VortexProfile::gaussian();
    let vals = t.lowest(2);
    let mut rep = SpectralReport::new("L_k", Some(k), grid);
    rep.abscissa = grid.nodes.clone();
    for &lam in &vals {
        let v = t.eigenvector(lam);
        let mut g: Vec<f64> = v.iter().zip(&vols).map(|(a, w)| a / w.sqrt()).collect();
        fix_sign(&mut g);
        rep.eigenfunctions.push(expand(&idx, &g, grid.len()));
    }
    rep.eigenvalues = vals.clone();
    let inner = |a: &[f64], b: &[f64]| idx.iter().enumerate().map(|(j, &i)| a[i] * b[i] * vols[j]).sum::<f64>();
    let unit = |f: Vec<f64>| {
        let n = inner(&f, &f).sqrt();
        f.into_iter().map(|x| x / n).collect::<Vec<f64>>()
    };
    let r = &grid.nodes;
    let e_minus_chi: Vec<f64> = r.iter().map(|&x| (-gauss.chi(x)).exp()).collect();
    match k.abs() {
        0 => {
            rep.set("mu0", vals[0]);
            rep.set("mu1", vals[1]);
            let psi = unit(e_minus_chi);
            rep.set("constraint_overlap", inner(&rep.eigenfunctions[0], &psi).abs());
        }
        1 => {
            let h1 = unit(e_minus_chi.iter().zip(r).map(|(a, x)| a * x).collect());
            rep.set("constraint_overlap", inner(&rep.eigenfunctions[0], &h1).abs());
            let g1 = unit(r.iter().map(|&x| gauss.chi(x).exp() * x * (-x * x / 4.0).exp()).collect());
            let s = inner(&rep.eigenfunctions[0], &g1).signum();
            let err = idx
                .iter()
                .enumerate()
                .map(|(j, &i)| (rep.eigenfunctions[0][i] - s * g1[i]).powi(2) * vols[j])
                .sum::<f64>()
                .sqrt();
            rep.set("zero_mode_l2_error", err);
        }
        _ => {}
    }
    Ok(rep)
}

pub fn lk_spectrum(k: i32, grid: &RadialGrid) -> Result<SpectralReport> {
    with_doubling(grid, |g| lk_single(k, g))
}

// ---------------------------------------------------------------- coercivity

/// Lower bound `(a+b)·overlap² − a` for a form with one negative direction.
pub fn coercivity_bound(a: f64, b: f64, overlap: f64) -> Result<f64> {
    if a + b < 0.0 {
        return invalid(format!("coercivity bound needs a + b >= 0, got {}", a + b));
    }
    let o = overlap.abs();
    if o > 1.0 + 1e-12 {
        return invalid(format!("overlap must lie in [0, 1], got {overlap}"));
    }
    Ok((a + b) * o * o - a)
}

/// Closed form of `‖R‖²` for the Gaussian quasimode.
pub fn quasimode_norm_sq_exact() -> f64 {
    (3.0 - LN_2 - 2.0 * PI.ln()) / (16.0 * LN_2)
}

/// Closed form of the overlap between the quasimode and the mass direction.
pub fn quasimode_overlap_exact() -> f64 {
    (6.0 / LN_2).sqrt() / PI
}

/// Residual of the Gaussian quasimode `g = c e^χ e^{-r²/4}` of `L₀ + 3/4`.
pub fn quasimode_analysis(grid: &RadialGrid) -> Result<SpectralReport> {
    let gauss = VortexProfile::gaussian();
    let c = (2.0 * LN_2).powf(-0.5);
    let ch = 3f64.sqrt() / PI;
    let r = &grid.nodes;
    let g: Vec<f64> = r.iter().map(|&x| c * (gauss.chi(x) - x * x / 4.0).exp()).collect();
    // (B-1)/A = (1 + h(s))/2
    let factor: Vec<f64> = r.iter().map(|&x| 0.75 - 0.5 * (1.0 + h_aux(x * x / 4.0))).collect();
    let big_r: Vec<f64> = g.iter().zip(&factor).map(|(a, b)| a * b).collect();
    let psi: Vec<f64> = r.iter().map(|&x| ch * (-gauss.chi(x)).exp()).collect();
    let norm_sq = grid.integrate(&big_r.iter().map(|x| x * x).collect::<Vec<_>>());
    let overlap = grid.integrate(&psi.iter().zip(&g).map(|(a, b)| a * b).collect::<Vec<_>>());
    let g_norm_sq = grid.integrate(&g.iter().map(|x| x * x).collect::<Vec<_>>());
    let eps = norm_sq.sqrt();
    let min_factor = r.iter().zip(&factor).filter(|(x, _)| **x > 0.0).map(|(_, f)| *f).fold(f64::INFINITY, f64::min);
    let mut rep = SpectralReport::new("quasimode", Some(0), grid);
    rep.abscissa = r.clone();
    rep.eigenfunctions = vec![g, big_r];
    rep.converged = true;
    rep.set("norm_R_sq", norm_sq);
    rep.set("norm_R_sq_exact", quasimode_norm_sq_exact());
    rep.set("eps", eps);
    rep.set("norm_g_sq", g_norm_sq);
    rep.set("overlap", overlap);
    rep.set("overlap_exact", quasimode_overlap_exact());
    rep.set("mu0_lower", -0.75);
    rep.set("mu0_upper", -0.75 + eps);
    rep.set("min_R_over_g", min_factor);
    // certified chain: a ≤ 3/4, d = μ₁ − μ₀ ≥ 1/2 + 3/4 − ε, overlap ≥ ⟨ψ,g⟩ − 2ε/d
    let d = 0.5 + 0.75 - eps;
    let cert_overlap = overlap - 2.0 * eps / d;
    rep.set("gap_lower", d);
    rep.set("overlap_lower", cert_overlap);
    rep.set("delta_certified", coercivity_bound(0.75, d - 0.75, cert_overlap)?);
    Ok(rep)
}

/// Correction factor of the improved trial function.
pub fn improved_trial_beta(alpha: f64) -> f64 {
    let e = (-1.0 / alpha).exp();
    alpha * (1.0 - 2.0 * e) / (2.0 * alpha - 1.0 + 2.0 * e * (1.0 - alpha))
}

/// Rayleigh quotient `L̃₀f/(Af)` of the trial `f = e^{-s}(1-αs)(1+βs)`, `s = r²/4`.
pub fn rayleigh_quotient(alpha: f64, beta: f64, s: f64) -> f64 {
    let p = 1.0 + (beta - alpha) * s - alpha * beta * s * s;
    rayleigh_numerator(alpha, beta, s) / p
}

fn rayleigh_numerator(alpha: f64, beta: f64, s: f64) -> f64 {
    let p = 1.0 + (beta - alpha) * s - alpha * beta * s * s;
    let dp = (beta - alpha) - 2.0 * alpha * beta * s;
    let ddp = -2.0 * alpha * beta;
    let h = h_aux(s);
    let inv_a = if s > 700.0 { 0.0 } else { 1.0 / crate::special::expm1_over(s) };
    let b_over_a = 0.5 * (1.0 + h) + inv_a;
    -(s * (ddp - 2.0 * dp + p) + (1.0 + s * (1.0 - h)) * (dp - p)) - b_over_a * p
}

/// Two-sided bounds `(min, max)` of the Rayleigh quotient over the grid nodes.
pub fn rayleigh_mu1_bounds(alpha: f64, use_improved: bool, grid: &RadialGrid) -> Result<(f64, f64)> {
    let beta = if use_improved {
        if !(alpha > 0.5 && alpha < 1.0 / LN_2) {
            return invalid(format!("improved trial needs 1/2 < alpha < 1/log 2, got {alpha}"));
        }
        improved_trial_beta(alpha)
    } else {
        0.0
    };
    // the numerator has to vanish where f does
    let root = 1.0 / alpha;
    let at_root = rayleigh_numerator(alpha, beta, root);
    if at_root.abs() > 1e-8 {
        return invalid(format!("trial quotient is singular at s = {root:.6} (numerator {at_root:.3e})"));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &r in &grid.nodes {
        let s = r * r / 4.0;
        let p = 1.0 + (beta - alpha) * s - alpha * beta * s * s;
        if p.abs() < 1e-6 {
            continue;
        }
        let q = rayleigh_quotient(alpha, beta, s);
        lo = lo.min(q);
        hi = hi.max(q);
    }
    Ok((lo, hi))
}

// ---------------------------------------------------------------- kernel

/// Largest eigenvalues of the logarithmic kernel `𝔨(r,s) = −log max(r,s) A(r)^{-1/2}A(s)^{-1/2}`
/// for the profile rescaled by `λ` (`λ = 1` is the profile itself).
pub fn kernel_single(profile: &VortexProfile, grid: &RadialGrid, lambda: f64) -> Result<SpectralReport> {
    if !(profile.beta() > 2.0) {
        return invalid("kernel needs a decay exponent above 2");
    }
    let (idx, u) = weighted_nodes(profile, grid);
    let n = idx.len();
    let r: Vec<f64> = idx.iter().map(|&i| grid.nodes[i]).collect();
    let shift = lambda.ln();
    let m = DMatrix::from_fn(n, n, |i, j| (shift - r[i].max(r[j]).ln()) * u[i] * u[j]);
    require_symmetric(&m)?;
    let (vals, vecs) = lanczos_top(dense_apply(&m), n, 4, 1e-12);
    let sw: Vec<f64> = idx.iter().map(|&i| grid.quad_weights[i].sqrt()).collect();
    let mut rep = SpectralReport::new("kernel_K", None, grid);
    rep.abscissa = grid.nodes.clone();
    rep.eigenfunctions = vecs
        .iter()
        .map(|v| {
            let mut h: Vec<f64> = v.iter().zip(&sw).map(|(a, s)| a / s).collect();
            fix_sign(&mut h);
            expand(&idx, &h, grid.len())
        })
        .collect();
    rep.set("largest", vals[0]);
    rep.set("index", vals.iter().filter(|&&v| v > 1.0).count() as f64);
    rep.set("lambda", lambda);
    rep.eigenvalues = vals;
    Ok(rep)
}

pub fn kernel_index(profile: &VortexProfile, grid: &RadialGrid) -> Result<SpectralReport> {
    with_doubling(grid, |g| kernel_single(profile, g, 1.0))
}

/// Smallest rescaling `λ ≥ 1` at which the kernel acquires an eigenvalue above 1, by bisection in `log λ`.
pub fn kernel_threshold(profile: &VortexProfile, grid: &RadialGrid, lambda_max: f64) -> Result<f64> {
    let largest = |lam: f64| -> Result<f64> { Ok(kernel_single(profile, grid, lam)?.eigenvalues[0]) };
    if largest(1.0)? > 1.0 {
        return Ok(1.0);
    }
    if largest(lambda_max)? <= 1.0 {
        return Err(LabError::NonConvergence(format!("no threshold below lambda = {lambda_max}")));
    }
    let (mut lo, mut hi) = (0.0, lambda_max.ln());
    while hi - lo > 1e-10 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if largest(mid.exp())? > 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Mapping;

    #[test]
    fn lanczos_matches_dense() {
        let n = 60;
        let m = DMatrix::from_fn(n, n, |i, j| 1.0 / (1.0 + (i as f64 - j as f64).abs()) + if i == j { (i as f64).sin() } else { 0.0 });
        let eig = SymmetricEigen::new(m.clone());
        let mut all: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        all.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let (vals, _) = lanczos_top(dense_apply(&m), n, 3, 1e-13);
        for (a, b) in vals.iter().zip(&all) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn coercivity_arithmetic() {
        assert!((coercivity_bound(0.75, 0.45, 0.8705).unwrap() - 0.159).abs() < 1e-3);
        assert!((coercivity_bound(0.0, 0.7, 0.5).unwrap() - 0.175).abs() < 1e-15);
        assert!((coercivity_bound(0.3, 0.9, 1.0).unwrap() - 0.9).abs() < 1e-15);
        assert!(coercivity_bound(-1.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn basic_rayleigh_quotient_matches_printed_form() {
        let alpha = 1.0 / LN_2;
        for &s in &[0.05f64, 0.7, 2.0, 9.0] {
            let e = (-s).exp();
            let printed = (e * (1.0 + (2.0 - alpha) * s + 2.0 * alpha * s * s) - (1.0 + (1.0 - alpha) * s + alpha * s * s))
                / (2.0 * s * (1.0 - e) * (1.0 - alpha * s));
            assert!((rayleigh_quotient(alpha, 0.0, s) - printed).abs() < 1e-10, "s={s}");
        }
        assert!((rayleigh_quotient(alpha, 0.0, 0.0) - (alpha - 0.75)).abs() < 1e-14);
    }

    #[test]
    fn bk_of_translation_mode_is_stream_derivative() {
        let g = make_grid(1024, 20.0, Mapping::UniformR).unwrap();
        let p = VortexProfile::gaussian();
        let f = g.map(|r| -p.omega_star_prime(r));
        let b = bk_apply(1, &f, &g).unwrap();
        for (i, &r) in g.nodes.iter().enumerate() {
            assert!((b[i] - p.psi_prime(r)).abs() < 1e-6, "r={r}");
        }
        assert!(bk_apply(0, &f, &g).is_err());
    }

    #[test]
    fn generalized_pencil_has_unit_ground_state() {
        let g = make_grid(2048, 1e3, Mapping::LogR).unwrap();
        let rep = generalized_l0_single(&VortexProfile::algebraic(3.0).unwrap(), &g).unwrap();
        assert!((rep.eigenvalues[0] - 1.0).abs() < 1e-3, "{:?}", rep.eigenvalues);
    }
}
