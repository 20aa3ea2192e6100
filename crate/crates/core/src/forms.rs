//! The quadratic forms `J`, `Q`, the cubic term `N`, and the coercivity constants.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::energy::{bk_apply_complex, energy_modes};
use crate::error::{LabError, Result};
use crate::grid::{PolarField, RadialGrid};
use crate::profiles::{eval_gaussian_bw, VortexProfile};
use crate::special::h_aux;
use crate::spectral::{btilde1_spectrum, coercivity_bound, hardy_constant, lk_spectrum, quasimode_analysis};

/// Distance of `C_H` from 1 below which the radial sector is reported as borderline.
pub const BORDERLINE_TOL: f64 = 1e-3;

/// Values of the forms on one field, with the constants they are compared against.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FormValues {
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub gamma: f64,
    pub delta: f64,
    pub x_norm_sq: f64,
    pub grad_norm_sq: f64,
}

/// `A` at the nodes, saturating at `f64::MAX` where it overflows.
pub fn a_weights(profile: &VortexProfile, grid: &RadialGrid) -> Vec<f64> {
    grid.map(|r| profile.log_a(r).exp().min(f64::MAX))
}

/// `∫ A ω² dx`.
pub fn x_norm_sq(field: &PolarField, profile: &VortexProfile) -> f64 {
    field.weighted_norm_sq(&a_weights(profile, &field.grid))
}

/// `|ω_k′|² + k²|ω_k|²/r²` at every node.
fn gradient_density(k: i32, v: &[Complex64], grid: &RadialGrid) -> Vec<f64> {
    let d = grid.derivative_complex(v, Some(k));
    let k2 = (k * k) as f64;
    grid.nodes
        .iter()
        .zip(v)
        .zip(&d)
        .map(|((&r, z), dz)| {
            let ang = if k == 0 {
                0.0
            } else if r > 0.0 {
                k2 * z.norm_sqr() / (r * r)
            } else if k.abs() == 1 {
                dz.norm_sqr()
            } else {
                0.0
            };
            dz.norm_sqr() + ang
        })
        .collect()
}

/// `∫ A |∇ω|² dx`.
pub fn grad_norm_sq(field: &PolarField, profile: &VortexProfile) -> f64 {
    let g = &field.grid;
    let a = a_weights(profile, g);
    2.0 * PI
        * field
            .iter_modes()
            .map(|(k, v)| g.integrate(&gradient_density(k, v, g).iter().zip(&a).map(|(x, w)| x * w).collect::<Vec<_>>()))
            .sum::<f64>()
}

/// `J(ω) = ½∫Aω² dx − E(ω)`.
pub fn j_form(field: &PolarField, profile: &VortexProfile) -> Result<f64> {
    let x = x_norm_sq(field, profile);
    if !x.is_finite() {
        return Err(LabError::Domain("field has infinite weighted norm".into()));
    }
    Ok(0.5 * x - energy_modes(field))
}

/// `Q(ω) = ∫(A|∇ω|² − Bω²) dx` around the Gaussian vortex.
pub fn q_form(field: &PolarField) -> Result<f64> {
    let gauss = VortexProfile::gaussian();
    let grad = grad_norm_sq(field, &gauss);
    if !grad.is_finite() {
        return Err(LabError::Domain("field has infinite weighted gradient norm".into()));
    }
    let b = field.grid.map(|r| eval_gaussian_bw(r).0.min(f64::MAX));
    Ok(grad - field.weighted_norm_sq(&b))
}

/// `Σ_k 2π∫(|w_k′|² + (k²/r² + W)|w_k|²) r dr` with `w_k = A^{1/2}ω_k`.
pub fn lk_quadratic_form(field: &PolarField) -> f64 {
    let g = &field.grid;
    let gauss = VortexProfile::gaussian();
    let half_a: Vec<f64> = g.map(|r| (0.5 * gauss.log_a(r)).exp());
    let w_pot: Vec<f64> = g.map(|r| eval_gaussian_bw(r).1);
    2.0 * PI
        * field
            .iter_modes()
            .map(|(k, v)| {
                let w: Vec<Complex64> = v.iter().zip(&half_a).map(|(z, a)| z * a).collect();
                let dens = gradient_density(k, &w, g);
                g.integrate(&dens.iter().zip(&w).zip(&w_pot).map(|((d, z), p)| d + p * z.norm_sqr()).collect::<Vec<_>>())
            })
            .sum::<f64>()
}

/// `N(ω) = ½∫{A, ψ}ω² dx` around the Gaussian vortex, with `Δψ = ω`.
///
/// The bracket reduces to `A′ψ_θ/r`; the angular mean of `ψ_θω²` is taken on
/// `3K+1` or more collocation angles, enough to hold the cubic product exactly.
pub fn n_form(field: &PolarField) -> Result<f64> {
    let g = &field.grid;
    if !field.is_finite() {
        return Err(LabError::Domain("field has non-finite values".into()));
    }
    let mut psi_theta = PolarField::zeros(g.clone(), field.k_max);
    for (k, v) in field.iter_modes() {
        if k > 0 {
            let b = bk_apply_complex(k, v, g)?;
            // ψ_k = −B_k[ω_k], so ∂_θψ has modes −ik B_k[ω_k]
            let i_k = Complex64::new(0.0, -(k as f64));
            psi_theta.set_mode(k, b.into_iter().map(|z| i_k * z).collect());
        }
    }
    let n_theta = (3 * field.k_max + 1).next_power_of_two().max(4);
    let w = field.to_collocation(n_theta);
    let p = psi_theta.to_collocation(n_theta);
    let gauss = VortexProfile::gaussian();
    let mean: Vec<f64> = (0..g.len())
        .map(|i| (0..n_theta).map(|j| p[j][i] * w[j][i] * w[j][i]).sum::<f64>() / n_theta as f64)
        .collect();
    // A′/r = A(1 − h(s))/2 with s = r²/4
    let integrand: Vec<f64> = g
        .nodes
        .iter()
        .zip(&mean)
        .map(|(&r, &m)| {
            if m == 0.0 {
                0.0
            } else {
                let s = r * r / 4.0;
                (gauss.log_a(r) + (0.5 * (1.0 - h_aux(s))).ln()).exp().min(f64::MAX) * m
            }
        })
        .collect();
    Ok(PI * g.integrate(&integrand))
}

/// Sector-wise status of the radial part of `J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialSector {
    Coercive,
    Borderline,
    NotCoercive,
}

/// Coercivity constant of `J` and its ingredients.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GammaEstimate {
    /// `min(1/2, 1 − C₁′, 1 − C_H)` when the radial sector is coercive, else the nonradial value.
    pub gamma: f64,
    /// `min(1/2, 1 − C₁′)`, valid on fields without a radial part that satisfy the angular first-moment constraint.
    pub gamma_nonradial: f64,
    /// `1 − C_H`, set to 0 in the borderline case.
    pub gamma_radial: f64,
    #[serde(rename = "C1_prime")]
    pub c1_prime: f64,
    #[serde(rename = "C_H")]
    pub c_h: f64,
    pub radial: RadialSector,
}

pub fn gamma_estimate(profile: &VortexProfile, grid: &RadialGrid) -> Result<GammaEstimate> {
    let bt = btilde1_spectrum(profile, grid)?;
    let c1_prime = bt.get("C1_prime").expect("B̃₁ report carries C1_prime");
    let c_h = hardy_constant(profile, grid)?.get("C_H").expect("Hardy report carries C_H");
    let gamma_nonradial = 0.5f64.min(1.0 - c1_prime);
    let (radial, gamma_radial) = if (1.0 - c_h).abs() < BORDERLINE_TOL {
        (RadialSector::Borderline, 0.0)
    } else if c_h < 1.0 {
        (RadialSector::Coercive, 1.0 - c_h)
    } else {
        (RadialSector::NotCoercive, 1.0 - c_h)
    };
    let gamma = if radial == RadialSector::Coercive { gamma_nonradial.min(gamma_radial) } else { gamma_nonradial };
    Ok(GammaEstimate { gamma, gamma_nonradial, gamma_radial, c1_prime, c_h, radial })
}

/// Coercivity constant of `Q` on the constrained space, sector by sector.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeltaEstimate {
    pub delta: f64,
    /// Bound on `k = 0` from `μ₀ < 0 < μ₁` and the overlap with the mass direction.
    pub k0: f64,
    /// Bound on `|k| = 1` from the zero mode, the next eigenvalue and the overlap with the first moment.
    pub k1: f64,
    /// Lowest eigenvalue of `L₂`, a lower bound on every `|k| ≥ 2`.
    pub k2: f64,
    /// Rigorous lower bound from the quasimode argument.
    pub certified: f64,
}

/// `δ` for the Gaussian, on a grid starting at the origin.
pub fn delta_estimate(grid: &RadialGrid) -> Result<DeltaEstimate> {
    let (l0, (l1, l2)) =
        rayon::join(|| lk_spectrum(0, grid), || rayon::join(|| lk_spectrum(1, grid), || lk_spectrum(2, grid)));
    let (l0, l1, l2) = (l0?, l1?, l2?);
    let get = |rep: &crate::spectral::SpectralReport, key: &str| rep.get(key).expect("L_k report key");
    let k0 = coercivity_bound(-get(&l0, "mu0"), get(&l0, "mu1"), get(&l0, "constraint_overlap"))?;
    let k1 = coercivity_bound(l1.eigenvalues[0].max(0.0), l1.eigenvalues[1], get(&l1, "constraint_overlap"))?;
    let k2 = l2.eigenvalues[0];
    let certified = quasimode_analysis(grid)?.get("delta_certified").expect("certified δ");
    Ok(DeltaEstimate { delta: k0.min(k1).min(k2), k0, k1, k2, certified })
}

/// All form values of a field around the Gaussian vortex.
pub fn form_values(field: &PolarField, gamma: f64, delta: f64) -> Result<FormValues> {
    let gauss = VortexProfile::gaussian();
    Ok(FormValues {
        j: j_form(field, &gauss)?,
        q: q_form(field)?,
        n: n_form(field)?,
        gamma,
        delta,
        x_norm_sq: x_norm_sq(field, &gauss),
        grad_norm_sq: grad_norm_sq(field, &gauss),
    })
}

/// Twice the largest `|N|/(x(x^{1/2} + g^{1/2}))` over the sample, with `x`, `g` the
/// weighted norm and gradient norm squared.
pub fn estimate_c0(fields: &[PolarField]) -> Result<f64> {
    let gauss = VortexProfile::gaussian();
    let mut best: f64 = 0.0;
    for f in fields {
        let x = x_norm_sq(f, &gauss);
        let g = grad_norm_sq(f, &gauss);
        let denom = x * (x.sqrt() + g.sqrt());
        if denom > 0.0 {
            best = best.max(n_form(f)?.abs() / denom);
        }
    }
    Ok(2.0 * best)
}
