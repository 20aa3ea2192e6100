//! Tridiagonal solves and symmetric tridiagonal eigenpairs.

use rustfft::num_complex::Complex64;

/// General tridiagonal matrix: `lower[i]` couples row `i+1` to column `i`,
/// `upper[i]` couples row `i` to column `i+1`.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(lower: Vec<f64>, diag: Vec<f64>, upper: Vec<f64>) -> Self {
        debug_assert_eq!(lower.len() + 1, diag.len());
        debug_assert_eq!(upper.len() + 1, diag.len());
        Self { lower, diag, upper }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `y = T x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.upper[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    pub fn apply_complex(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = x[i] * self.diag[i];
                if i > 0 {
                    y += x[i - 1] * self.lower[i - 1];
                }
                if i + 1 < n {
                    y += x[i + 1] * self.upper[i];
                }
                y
            })
            .collect()
    }

    /// Precomputed Thomas factorization.
    pub fn factor(&self) -> ThomasFactor {
        let n = self.len();
        let mut c = vec![0.0; n];
        let mut inv = vec![0.0; n];
        let mut denom = self.diag[0];
        inv[0] = 1.0 / denom;
        if n > 1 {
            c[0] = self.upper[0] * inv[0];
        }
        for i in 1..n {
            denom = self.diag[i] - self.lower[i - 1] * c[i - 1];
            inv[i] = 1.0 / denom;
            if i + 1 < n {
                c[i] = self.upper[i] * inv[i];
            }
        }
        ThomasFactor { lower: self.lower.clone(), c, inv }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.factor().solve(rhs)
    }
}

/// Forward-elimination data for repeated solves with one matrix.
#[derive(Debug, Clone)]
pub struct ThomasFactor {
    lower: Vec<f64>,
    c: Vec<f64>,
    inv: Vec<f64>,
}

impl ThomasFactor {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = rhs.len();
        let mut x = vec![0.0; n];
        x[0] = rhs[0] * self.inv[0];
        for i in 1..n {
            x[i] = (rhs[i] - self.lower[i - 1] * x[i - 1]) * self.inv[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.c[i] * x[i + 1];
        }
        x
    }

    pub fn solve_complex(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = rhs.len();
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        x[0] = rhs[0] * self.inv[0];
        for i in 1..n {
            x[i] = (rhs[i] - x[i - 1] * self.lower[i - 1]) * self.inv[i];
        }
        for i in (0..n - 1).rev() {
            let next = x[i + 1];
            x[i] -= next * self.c[i];
        }
        x
    }
}

/// Symmetric tridiagonal matrix given by its diagonal and off-diagonal.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        debug_assert_eq!(off.len() + 1, diag.len());
        Self { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x` (Sturm count).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            let qq = if q == 0.0 { f64::EPSILON * self.off[i - 1].abs().max(1e-300) } else { q };
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / qq;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut rad = 0.0;
            if i > 0 {
                rad += self.off[i - 1].abs();
            }
            if i + 1 < n {
                rad += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - rad);
            hi = hi.max(self.diag[i] + rad);
        }
        (lo, hi)
    }

    /// Eigenvalue with ascending index `j` by bisection.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > j {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Lowest `m` eigenvalues in ascending order.
    pub fn lowest(&self, m: usize) -> Vec<f64> {
        (0..m.min(self.len())).map(|j| self.eigenvalue(j)).collect()
    }

    /// Unit eigenvector for an eigenvalue via inverse iteration.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.len();
        let shift = lambda + 1e-10 * lambda.abs().max(1e-6);
        let t = Tridiagonal::new(
            self.off.clone(),
            self.diag.iter().map(|d| d - shift).collect(),
            self.off.clone(),
        );
        let f = t.factor();
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * ((i * 7919) % 101) as f64 / 101.0).collect();
        for _ in 0..4 {
            v = f.solve(&v);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_spectrum_matches_closed_form() {
        let n = 50;
        let t = SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]);
        for j in 0..3 {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * (j + 1) as f64 / (n + 1) as f64).cos();
            assert!((t.eigenvalue(j) - exact).abs() < 1e-12);
            let v = t.eigenvector(exact);
            let full = Tridiagonal::new(vec![-1.0; n - 1], vec![2.0; n], vec![-1.0; n - 1]);
            let tv = full.apply(&v);
            let res: f64 = tv.iter().zip(&v).map(|(a, b)| (a - exact * b).powi(2)).sum();
            assert!(res.sqrt() < 1e-9);
        }
    }

    #[test]
    fn thomas_inverts() {
        let t = Tridiagonal::new(vec![1.0, -0.5, 0.2], vec![4.0, 5.0, 3.0, 6.0], vec![0.3, 1.0, -2.0]);
        let x = vec![1.0, -2.0, 0.5, 3.0];
        let b = t.apply(&x);
        let y = t.solve(&b);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-13);
        }
        let bc: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, -v)).collect();
        let yc = t.factor().solve_complex(&bc);
        for (a, b) in x.iter().zip(&yc) {
            assert!((a - b.re).abs() < 1e-13 && (a + b.im).abs() < 1e-13);
        }
    }
}
