use std::collections::BTreeSet;
use std::sync::Arc;

use arnold_lab::sampling::{random_field, seeded_rng};
use arnold_lab::*;
use proptest::prelude::*;

fn grid() -> Arc<RadialGrid> {
    Arc::new(make_grid(513, 16.0, Mapping::UniformR).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn j_splits_over_radial_and_nonradial_parts(seed in any::<u64>()) {
        let g = grid();
        let gauss = VortexProfile::gaussian();
        let f = random_field(&g, 4, &mut seeded_rng(seed));
        let radial = PolarField::radial(g.clone(), &f.mode(0).iter().map(|z| z.re).collect::<Vec<_>>(), 4);
        let mut rest = f.clone();
        rest.set_mode(0, vec![Complex64::new(0.0, 0.0); g.len()]);
        let whole = j_form(&f, &gauss).unwrap();
        let parts = j_form(&radial, &gauss).unwrap() + j_form(&rest, &gauss).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-10 * x_norm_sq(&f, &gauss));
    }

    #[test]
    fn forms_scale_with_their_degree(seed in any::<u64>(), t in 0.1f64..5.0) {
        let g = grid();
        let gauss = VortexProfile::gaussian();
        let f = random_field(&g, 4, &mut seeded_rng(seed));
        let ft = f.scaled(t);
        let (j, q, n) = (j_form(&f, &gauss).unwrap(), q_form(&f).unwrap(), n_form(&f).unwrap());
        let x = x_norm_sq(&f, &gauss);
        prop_assert!((j_form(&ft, &gauss).unwrap() - t * t * j).abs() <= 1e-10 * t * t * x);
        prop_assert!((q_form(&ft).unwrap() - t * t * q).abs() <= 1e-10 * t * t * (x + grad_norm_sq(&f, &gauss)));
        prop_assert!((n_form(&ft).unwrap() - t.powi(3) * n).abs() <= 1e-10 * t.powi(3) * n.abs().max(1e-300));
    }

    #[test]
    fn q_dominates_gradient_minus_twice_the_norm(seed in any::<u64>()) {
        let g = grid();
        let gauss = VortexProfile::gaussian();
        let x1: BTreeSet<_> = [Constraint::Mass, Constraint::LinearFirst].into();
        let f = random_field(&g, 6, &mut seeded_rng(seed));
        let f = project_constraints(&f, &x1, &gauss).unwrap();
        let q = q_form(&f).unwrap();
        prop_assert!(q >= grad_norm_sq(&f, &gauss) - 2.0 * x_norm_sq(&f, &gauss));
    }
}

#[test]
fn form_values_serialize_with_short_names() {
    let g = grid();
    let f = random_field(&g, 3, &mut seeded_rng(1));
    let v = form_values(&f, 0.5, 0.43).unwrap();
    let json = serde_json::to_value(v).unwrap();
    for key in ["J", "Q", "N", "gamma", "delta", "x_norm_sq", "grad_norm_sq"] {
        assert!(json.get(key).is_some(), "{key}");
    }
}

#[test]
fn gamma_is_sector_aware() {
    let g = make_grid(1025, 1e3, Mapping::LogR).unwrap();
    let k2 = gamma_estimate(&VortexProfile::algebraic(2.0).unwrap(), &g).unwrap();
    assert_eq!(k2.radial, RadialSector::Borderline);
    assert_eq!(k2.gamma, k2.gamma_nonradial);
    let k15 = gamma_estimate(&VortexProfile::algebraic(1.5).unwrap(), &g).unwrap();
    assert_eq!(k15.radial, RadialSector::NotCoercive);
    let k3 = gamma_estimate(&VortexProfile::algebraic(3.0).unwrap(), &g).unwrap();
    assert_eq!(k3.radial, RadialSector::Coercive);
    assert!(k3.gamma <= k3.gamma_nonradial && k3.gamma > 0.0);
}
