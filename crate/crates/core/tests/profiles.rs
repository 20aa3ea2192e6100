use arnold_lab::*;
use proptest::prelude::*;

fn profiles() -> Vec<VortexProfile> {
    let mut out = vec![VortexProfile::gaussian()];
    out.extend([1.5, 2.0, 2.5, 3.0, 4.0].map(|k| VortexProfile::algebraic(k).unwrap()));
    out
}

#[test]
fn weight_is_positive_and_grows_at_the_decay_rate() {
    let g = make_grid(2048, 1e3, Mapping::LogR).unwrap();
    for p in profiles() {
        if p.kind() == ProfileKind::Gaussian {
            assert!(g.nodes.iter().all(|&r| p.log_a(r) > -1e-12));
            continue;
        }
        let lower = g.nodes.iter().map(|&r| p.log_a(r) - p.beta() * (1.0 + r).ln()).fold(f64::INFINITY, f64::min);
        assert!(lower.is_finite() && lower > -10.0, "{}: {lower}", p.label());
        assert!(g.nodes.iter().all(|&r| p.weight_a(r) > 0.0));
    }
}

#[test]
fn stream_derivative_matches_quadrature() {
    for p in profiles() {
        let g = make_grid(8193, 30.0, Mapping::UniformR).unwrap();
        let c = g.cumulative(&g.map(|r| p.omega_star(r)));
        for (i, &r) in g.nodes.iter().enumerate().skip(64).step_by(509) {
            let exact = p.psi_prime(r);
            assert!((c[i] / r - exact).abs() <= 1e-8 * exact.abs(), "{} r={r}", p.label());
        }
    }
}

#[test]
fn b_over_a_is_nonincreasing_between_its_limits() {
    let g = VortexProfile::gaussian();
    let mut prev = f64::INFINITY;
    for i in 0..4000 {
        let r = i as f64 * 0.01;
        let ratio = g.weight_b(r).unwrap() / g.weight_a(r);
        assert!(ratio <= prev * (1.0 + 1e-12), "r={r}");
        assert!((0.5..=1.75).contains(&ratio));
        let excess = (g.weight_b(r).unwrap() - 1.0) / g.weight_a(r);
        if r > 0.0 {
            assert!(excess < 0.75, "r={r}");
        } else {
            assert_eq!(excess, 0.75);
        }
        prev = ratio;
    }
}

#[test]
fn vsign_matches_hardy_side() {
    let g = make_grid(2048, 1e3, Mapping::LogR).unwrap();
    let expect = [
        (VortexProfile::gaussian(), HardyOrdering::Below),
        (VortexProfile::algebraic(3.0).unwrap(), HardyOrdering::Below),
        (VortexProfile::algebraic(2.0).unwrap(), HardyOrdering::Equal),
        (VortexProfile::algebraic(1.5).unwrap(), HardyOrdering::Above),
    ];
    for (p, side) in expect {
        assert_eq!(vsign_hardy_check(&p, &g), side, "{}", p.label());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn w_stays_above_its_quadratic_floor(r in 1e-3f64..60.0) {
        let w = VortexProfile::gaussian().potential_w(r).unwrap();
        prop_assert!(w > r * r / 16.0 - 1.5);
    }

    #[test]
    fn v_sign_follows_kappa(r in 1e-3f64..1e3, kappa in 1.2f64..6.0) {
        prop_assume!((kappa - 2.0).abs() > 1e-3);
        let v = VortexProfile::algebraic(kappa).unwrap().potential_v(r).unwrap();
        if kappa > 2.0 {
            prop_assert!(v > 0.0);
        } else {
            prop_assert!(v < 0.0);
        }
    }

    #[test]
    fn kappa_two_has_no_potential(r in 1e-3f64..1e4) {
        prop_assert!(VortexProfile::algebraic(2.0).unwrap().potential_v(r).unwrap().abs() < 1e-10);
    }
}
