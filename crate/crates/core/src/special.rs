//! Special functions that appear in the closed-form weights.

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `(e^s - 1) / s`, continuous at `s = 0`.
pub fn expm1_over(s: f64) -> f64 {
    if s.abs() < 1e-3 {
        1.0 + s / 2.0 + s * s / 6.0 + s * s * s / 24.0
    } else {
        s.exp_m1() / s
    }
}

/// `h(s) = 1/s - 1/(e^s - 1)`, decreasing from 1/2 to 0.
pub fn h_aux(s: f64) -> f64 {
    if s.abs() < 1e-3 {
        0.5 - s / 12.0 + s * s * s / 720.0
    } else {
        1.0 / s - 1.0 / s.exp_m1()
    }
}

/// Exponential integral `E1(x)` for `x > 0`.
pub fn e1(x: f64) -> f64 {
    assert!(x > 0.0, "E1 needs a positive argument");
    if x <= 1.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..60 {
            term *= -x / k as f64;
            sum += term / k as f64;
            if term.abs() < 1e-18 {
                break;
            }
        }
        -EULER_GAMMA - x.ln() - sum
    } else {
        // modified Lentz on the continued fraction
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// Entire exponential integral `Ein(z) = ∫₀^z (1 - e^{-t})/t dt`.
pub fn ein(z: f64) -> f64 {
    if z.abs() <= 2.0 || z < 0.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..400 {
            term *= -z / k as f64;
            let add = -term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        sum
    } else {
        e1(z) + z.ln() + EULER_GAMMA
    }
}

/// Digamma function for `x > 0`.
pub fn digamma(x: f64) -> f64 {
    assert!(x > 0.0, "digamma needs a positive argument");
    let mut x = x;
    let mut acc = 0.0;
    while x < 12.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let x2 = 1.0 / (x * x);
    acc + x.ln() - 0.5 / x
        - x2 * (1.0 / 12.0 - x2 * (1.0 / 120.0 - x2 * (1.0 / 252.0 - x2 * (1.0 / 240.0 - x2 / 132.0))))
}

/// Generalized harmonic number `H_x = ψ(x+1) + γ`, for `x > -1`.
pub fn harmonic(x: f64) -> f64 {
    digamma(x + 1.0) + EULER_GAMMA
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ein_matches_both_branches() {
        for &z in &[-3.0, 0.5, 1.9, 2.1, 5.0, 30.0] {
            // direct Simpson oracle of the defining integral
            let n = 20_000;
            let h = z / n as f64;
            let f = |t: f64| if t == 0.0 { 1.0 } else { -(-t).exp_m1() / t };
            let mut s = f(0.0) + f(z);
            for i in 1..n {
                s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s *= h / 3.0;
            assert!((ein(z) - s).abs() < 1e-10 * s.abs().max(1.0), "z={z}");
        }
    }

    #[test]
    fn e1_known_values() {
        assert!((e1(1.0) - 0.219_383_934_395_520_3).abs() < 1e-14);
        assert!((e1(0.1) - 1.822_923_958_419_390_7).abs() < 1e-13);
        assert!((e1(10.0) - 4.156_968_929_685_324e-6).abs() < 1e-18);
    }

    #[test]
    fn small_argument_branches_are_continuous() {
        for &s in &[0.999e-3, 1.001e-3] {
            assert!((expm1_over(s) - s.exp_m1() / s).abs() < 1e-13);
            assert!((h_aux(s) - (1.0 / s - 1.0 / s.exp_m1())).abs() < 1e-9);
        }
    }

    #[test]
    fn harmonic_numbers() {
        assert!(harmonic(0.0).abs() < 1e-14);
        assert!((harmonic(3.0) - 11.0 / 6.0).abs() < 1e-14);
        assert!((harmonic(-0.5) + 2.0 * 2f64.ln()).abs() < 1e-14);
    }
}
