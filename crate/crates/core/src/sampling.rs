//! Seeded random fields for the property suites.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;

use crate::grid::{PolarField, RadialGrid};

/// Deterministic generator used by every sampling routine.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Band-limited signed field `Σ_k r^{|k|} e^{-c_k r²} P_k(c_k r²) e^{ikθ}`.
///
/// Modes up to `min(k_max, 6)` are populated, with cubic `P_k`, random decay
/// rates `c_k ∈ [0.3, 0.6)` and amplitudes falling off like `1/(1+k)`.
pub fn random_field<R: Rng>(grid: &Arc<RadialGrid>, k_max: usize, rng: &mut R) -> PolarField {
    let mut field = PolarField::zeros(grid.clone(), k_max);
    for k in 0..=k_max.min(6) {
        let c: f64 = rng.gen_range(0.3..0.6);
        let mut coef: Vec<Complex64> = (0..4).map(|_| complex_normal(rng) / (1.0 + k as f64)).collect();
        if k == 0 {
            coef.iter_mut().for_each(|z| z.im = 0.0);
        }
        let mode = grid
            .nodes
            .iter()
            .map(|&r| {
                let t = c * r * r;
                let p = coef[0] + t * (coef[1] + t * (coef[2] / 2.0 + t * coef[3] / 6.0));
                p * r.powi(k as i32) * (-t).exp()
            })
            .collect();
        field.set_mode(k as i32, mode);
    }
    field
}

/// Nonnegative field `e^{-b r²} |Σ_{k≤K} c_k (r/ρ)^k e^{ikθ}|²` with `K = min(2, k_max/2)`.
///
/// The product is band-limited to `2K ≤ k_max`, so the mode representation is exact.
pub fn random_nonnegative_field<R: Rng>(grid: &Arc<RadialGrid>, k_max: usize, rng: &mut R) -> PolarField {
    let band = (k_max / 2).min(2);
    let b: f64 = rng.gen_range(0.2..0.5);
    let rho: f64 = rng.gen_range(0.8..1.6);
    let c: Vec<Complex64> = (0..=band).map(|_| complex_normal(rng)).collect();
    let n_theta = (4 * k_max + 4).next_power_of_two().max(32);
    let vals: Vec<Vec<f64>> = (0..n_theta)
        .map(|j| {
            let th = 2.0 * PI * j as f64 / n_theta as f64;
            let e = Complex64::from_polar(1.0, th);
            grid.nodes
                .iter()
                .map(|&r| {
                    let z = e * (r / rho);
                    let mut acc = Complex64::new(0.0, 0.0);
                    let mut zk = Complex64::new(1.0, 0.0);
                    for ck in &c {
                        acc += ck * zk;
                        zk *= z;
                    }
                    (-b * r * r).exp() * acc.norm_sqr()
                })
                .collect()
        })
        .collect();
    PolarField::from_collocation(grid.clone(), &vals, k_max)
}
