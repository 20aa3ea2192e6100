use std::f64::consts::PI;
use std::sync::Arc;

use arnold_lab::energy::{
    entropy_catalog, free_energy_radial, level_kernel, l1_distance, maximize_free_energy, rearrange, rearrange_radial,
};
use arnold_lab::sampling::{random_nonnegative_field, seeded_rng};
use arnold_lab::*;
use proptest::prelude::*;

fn grid() -> Arc<RadialGrid> {
    Arc::new(make_grid(1025, 20.0, Mapping::UniformR).unwrap())
}

/// Field with modes `c_k r^k e^{-a_k r²}` for `k = 0..=3`, evaluated at `λr`.
fn analytic_field(g: &Arc<RadialGrid>, coef: &[(f64, f64)], lambda: f64) -> PolarField {
    let mut f = PolarField::zeros(g.clone(), 3);
    for (k, &(c, a)) in coef.iter().enumerate() {
        let mode = g.map(|r| {
            let x = lambda * r;
            lambda * lambda * c * x.powi(k as i32) * (-a * x * x).exp()
        });
        f.set_mode(k as i32, mode.into_iter().map(|v| Complex64::new(v, 0.0)).collect());
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn level_kernel_is_separately_concave(s in 0.0f64..10.0, lo in 0.0f64..5.0, width in 0.1f64..10.0) {
        let h = width / 200.0;
        for i in 1..200 {
            let r = lo + i as f64 * h;
            let d2 = level_kernel(r + h, s) - 2.0 * level_kernel(r, s) + level_kernel(r - h, s);
            prop_assert!(d2 <= 1e-12 * (1.0 + r * s));
            prop_assert_eq!(level_kernel(r, s), level_kernel(s, r));
        }
    }

    #[test]
    fn energy_obeys_the_scaling_law(c0 in 0.5f64..2.0, c1 in -1.0f64..1.0, c2 in -1.0f64..1.0, a in 0.3f64..1.0, lam in prop::sample::select(vec![0.5, 2.0])) {
        let g = Arc::new(make_grid(4097, 24.0, Mapping::UniformR).unwrap());
        let coef = [(c0, a), (c1, a), (c2, 1.2 * a), (0.3, a)];
        let base = analytic_field(&g, &coef, 1.0);
        let scaled = analytic_field(&g, &coef, lam);
        let m = moments(&base).m0;
        let want = m * m / (4.0 * PI) * f64::ln(lam);
        let got = energy_modes(&scaled) - energy_modes(&base);
        prop_assert!((got - want).abs() <= 1e-6 * want.abs(), "{} vs {}", got, want);
    }

    #[test]
    fn rearrangement_preserves_mass_and_is_monotone(seed in any::<u64>()) {
        let g = Arc::new(make_grid(257, 12.0, Mapping::UniformR).unwrap());
        let f = random_nonnegative_field(&g, 4, &mut seeded_rng(seed));
        let star = rearrange(&f).unwrap();
        let m = moments(&f).m0;
        prop_assert!((2.0 * PI * g.integrate(&star) - m).abs() <= 1e-12 * m);
        prop_assert!(star.windows(2).all(|w| w[1] <= w[0]));
        prop_assert!(energy_radial(&star, &g) >= energy_modes(&f));
    }
}

#[test]
fn rearranging_a_translate_recovers_the_profile() {
    let g = grid();
    let n_theta = 256;
    let shift = 0.4;
    let vals: Vec<Vec<f64>> = (0..n_theta)
        .map(|j| {
            let th = 2.0 * PI * j as f64 / n_theta as f64;
            g.nodes.iter().map(|&r| (-(r * r - 2.0 * shift * r * th.cos() + shift * shift) / 4.0).exp()).collect()
        })
        .collect();
    let f = PolarField::from_collocation(g.clone(), &vals, 32);
    let star = rearrange(&f).unwrap();
    let exact = g.map(|r| (-r * r / 4.0).exp());
    assert!(l1_distance(&star, &exact, &g) < 1e-3 * 4.0 * PI);
    let (e_star, e) = (energy_radial(&star, &g), energy_modes(&f));
    assert!((e_star - e).abs() < 1e-5 * e.abs(), "{e_star} vs {e}");
}

#[test]
fn sorted_radial_input_is_a_fixed_point() {
    let g = grid();
    let w = g.map(|r| 1.0 / (1.0 + r * r).powi(3));
    let star = rearrange_radial(&w, &g);
    let dev = w.iter().zip(&star).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-12, "{dev}");
}

#[test]
fn level_set_energy_of_sampled_profiles() {
    let g = grid();
    let w = g.map(|r| (-r * r / 3.0).exp() * (1.0 + r * r / 6.0));
    let cp = ConstraintProfile::from_radial(&w, &g).unwrap();
    let (a, b) = (energy_via_h(&cp).unwrap(), energy_radial(&w, &g));
    // ĥ of sampled data is piecewise linear in r², a second-order reconstruction
    assert!((a - b).abs() < 2e-4 * b.abs(), "{a} vs {b}");
    assert!(ConstraintProfile::from_radial(&g.map(|r| r), &g).is_err());
}

#[test]
fn maximizers_have_exact_mass_and_monotone_profiles() {
    let lg = make_grid(1024, 1e3, Mapping::LogR).unwrap();
    let ug = make_grid(1025, 20.0, Mapping::UniformR).unwrap();
    let cases = [
        (entropy_catalog(ProfileKind::Algebraic, 2.0).unwrap(), PI, &lg),
        (entropy_catalog(ProfileKind::Algebraic, 3.0).unwrap(), 1.5, &lg),
        (entropy_catalog(ProfileKind::Gaussian, 0.0).unwrap(), 4.0 * PI, &ug),
    ];
    for (ent, m, g) in cases {
        let out = maximize_free_energy(&ent, m, g, 3).unwrap();
        let mass = 2.0 * PI * g.integrate(&out.profile);
        assert!((mass - m).abs() <= 1e-8 * m, "{:?}: {mass}", ent.kind);
        assert!(out.profile.windows(2).all(|w| w[1] <= w[0]));
        assert!(out.history.windows(2).all(|w| w[1] >= w[0]));
        assert!((free_energy_radial(&out.profile, g, &ent) - out.free_energy).abs() < 1e-12 * out.free_energy.abs().max(1.0));
        assert_eq!(ent.phi(0.0), 0.0);
    }
}

#[test]
fn maximizer_refuses_inadmissible_mass() {
    let g = make_grid(512, 20.0, Mapping::UniformR).unwrap();
    let ent = entropy_catalog(ProfileKind::Algebraic, 3.0).unwrap();
    // M/8π must exceed the small-ω coefficient 1/24
    assert!(matches!(maximize_free_energy(&ent, 0.5, &g, 0), Err(LabError::Domain(_))));
    let ent = entropy_catalog(ProfileKind::Algebraic, 1.5).unwrap();
    assert!(matches!(maximize_free_energy(&ent, PI, &g, 0), Err(LabError::Domain(_))));
}
