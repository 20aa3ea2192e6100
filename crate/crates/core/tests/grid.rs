use std::collections::BTreeSet;
use std::sync::Arc;

use arnold_lab::forms::a_weights;
use arnold_lab::sampling::{random_field, seeded_rng};
use arnold_lab::*;
use proptest::prelude::*;

fn grid() -> Arc<RadialGrid> {
    Arc::new(make_grid(513, 16.0, Mapping::UniformR).unwrap())
}

fn constraint_sets() -> Vec<BTreeSet<Constraint>> {
    vec![
        [Constraint::Mass].into(),
        [Constraint::Mass, Constraint::AngularFirst].into(),
        [Constraint::Mass, Constraint::LinearFirst].into(),
        [Constraint::Mass, Constraint::AngularFirst, Constraint::LinearFirst].into(),
    ]
}

fn max_diff(a: &PolarField, b: &PolarField) -> f64 {
    a.iter_modes().zip(b.iter_modes()).flat_map(|((_, x), (_, y))| x.iter().zip(y).map(|(u, v)| (u - v).norm())).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projectors_are_idempotent_and_self_adjoint(seed in any::<u64>()) {
        let g = grid();
        let gauss = VortexProfile::gaussian();
        let w = a_weights(&gauss, &g);
        let mut rng = seeded_rng(seed);
        let f = random_field(&g, 4, &mut rng);
        let h = random_field(&g, 4, &mut rng);
        for which in constraint_sets() {
            let pf = project_constraints(&f, &which, &gauss).unwrap();
            let ppf = project_constraints(&pf, &which, &gauss).unwrap();
            let scale = f.iter_modes().flat_map(|(_, v)| v.iter().map(|z| z.norm())).fold(0.0, f64::max);
            prop_assert!(max_diff(&pf, &ppf) <= 1e-10 * scale);

            let ph = project_constraints(&h, &which, &gauss).unwrap();
            let lhs = pf.weighted_inner(&h, &w);
            let rhs = f.weighted_inner(&ph, &w);
            let norm = (f.weighted_norm_sq(&w) * h.weighted_norm_sq(&w)).sqrt();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * norm);

            let m = moments(&pf);
            prop_assert!(m.m0.abs() <= 1e-10 * scale);
            if which.contains(&Constraint::LinearFirst) {
                prop_assert!(m.m1.abs().max(m.m2.abs()) <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn quadrature_is_stable_under_doubling(c in 0.1f64..2.0, p in 0u32..4) {
        let f = |r: f64| r.powi(p as i32) * (-c * r * r).exp();
        let v: Vec<f64> = [513, 1025, 2049]
            .iter()
            .map(|&n| {
                let g = make_grid(n, 20.0, Mapping::UniformR).unwrap();
                g.integrate(&g.map(f))
            })
            .collect();
        let (d1, d2) = ((v[0] - v[1]).abs(), (v[1] - v[2]).abs());
        prop_assert!(d2 <= 1e-7 * v[2].abs());
        if d2 > 1e-13 * v[2].abs() {
            prop_assert!(d1 / d2 > 12.0, "doubling ratio {}", d1 / d2);
        }
    }
}

#[test]
fn grid_block_round_trips_through_json() {
    let spec: GridSpec = serde_json::from_str(r#"{"N": 257, "r_max": 12.5, "mapping": "log_r", "K_max": 8}"#).unwrap();
    assert_eq!(spec.n, 257);
    assert_eq!(spec.k_max, 8);
    let g = spec.build().unwrap();
    assert_eq!(g.len(), 257);
    assert_eq!(g.mapping, Mapping::LogR);
    let back: GridSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
    assert_eq!(back, spec);
    assert!(serde_json::from_str::<GridSpec>(r#"{"N": 257, "r_max": 1, "mapping": "cubic"}"#).is_err());
}

#[test]
fn field_csv_lists_every_mode() {
    let g = Arc::new(make_grid(16, 1.0, Mapping::UniformR).unwrap());
    let mut f = PolarField::zeros(g.clone(), 1);
    f.set_mode(1, g.nodes.iter().map(|&r| Complex64::new(r, 2.0 * r)).collect());
    let mut buf = Vec::new();
    f.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,r,re,im");
    assert_eq!(lines.len(), 1 + 3 * 16);
    assert_eq!(lines[1].split(',').next(), Some("-1"));
    assert_eq!(lines[48], "1,1.00000000000e0,1.00000000000e0,2.00000000000e0");
}
