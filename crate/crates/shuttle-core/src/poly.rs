//! Small dense-polynomial helper used for the exact kernel integrals.
//!
//! The dynamical sensitivity kernels contain inner integrals of the form
//! `A(w) = integral_0^{1-w} p(s) p(s+w) ds` with `p` a low-degree
//! polynomial. `A` is itself a polynomial in `w`, and computing its
//! coefficients once in closed form removes all inner quadrature error from
//! the sensitivity evaluation.

/// Polynomial `sum_i coeffs[i] x^i` with `f64` coefficients.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Poly {
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Poly { coeffs }
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::new(vec![0.0]);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| c * i as f64)
            .collect();
        Poly::new(coeffs)
    }

    /// `self + scale * other`, padding degrees as needed.
    pub fn add_scaled(&self, other: &Poly, scale: f64) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = vec![0.0; n];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let a = self.coeffs.get(i).copied().unwrap_or(0.0);
            let b = other.coeffs.get(i).copied().unwrap_or(0.0);
            *c = a + scale * b;
        }
        Poly::new(coeffs)
    }

    /// Exact lag autocorrelation over the unit interval:
    /// `A(w) = integral_0^{1-w} p(s) p(s+w) ds`, valid for `w` in `[0, 1]`.
    ///
    /// Expanding `p(s+w)` binomially and integrating term by term gives
    /// `A(w) = sum_{i,j,r} c_i c_j C(j,r) w^{j-r} (1-w)^{i+r+1} / (i+r+1)`,
    /// which is collected into the power basis below. For `deg p = n` the
    /// result has degree `2n + 1`.
    pub fn autocorrelation_unit(&self) -> Poly {
        let n = self.coeffs.len();
        let mut acc = vec![0.0; 2 * n];
        for (i, &ci) in self.coeffs.iter().enumerate() {
            for (j, &cj) in self.coeffs.iter().enumerate() {
                for r in 0..=j {
                    let m = i + r + 1;
                    let c = ci * cj * binomial(j, r) / m as f64;
                    // (1-w)^m expanded into powers of w.
                    for q in 0..=m {
                        let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
                        acc[j - r + q] += c * sign * binomial(m, q);
                    }
                }
            }
        }
        Poly::new(acc)
    }
}

/// Binomial coefficient as f64; exact for the small arguments used here.
fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let n = n + n % 2;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn binomials_are_exact() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(11, 5), 462.0);
        assert_eq!(binomial(7, 0), 1.0);
        assert_eq!(binomial(6, 6), 1.0);
    }

    #[test]
    fn eval_and_derivative() {
        // p(x) = 1 + 2x + 3x^2
        let p = Poly::new(vec![1.0, 2.0, 3.0]);
        assert_eq!(p.eval(2.0), 17.0);
        let dp = p.derivative();
        assert_eq!(dp.coeffs, vec![2.0, 6.0]);
        assert_eq!(dp.eval(2.0), 14.0);
    }

    #[test]
    fn autocorrelation_of_constant() {
        // p = 1: A(w) = 1 - w.
        let a = Poly::new(vec![1.0]).autocorrelation_unit();
        assert!((a.eval(0.0) - 1.0).abs() < 1e-15);
        assert!((a.eval(0.25) - 0.75).abs() < 1e-15);
        assert!((a.eval(1.0)).abs() < 1e-15);
    }

    #[test]
    fn autocorrelation_of_linear() {
        // p = s: A(w) = (1-w)^3/3 + w(1-w)^2/2.
        let a = Poly::new(vec![0.0, 1.0]).autocorrelation_unit();
        for w in [0.0_f64, 0.1, 0.5, 0.9, 1.0] {
            let exact = (1.0 - w).powi(3) / 3.0 + w * (1.0 - w) * (1.0 - w) / 2.0;
            assert!((a.eval(w) - exact).abs() < 1e-15, "w = {w}");
        }
    }

    #[test]
    fn autocorrelation_matches_quadrature_for_degree_five() {
        // The transport polynomial shape 10 s^3 - 15 s^4 + 6 s^5.
        let p = Poly::new(vec![0.0, 0.0, 0.0, 10.0, -15.0, 6.0]);
        let a = p.autocorrelation_unit();
        for &w in &[0.0, 0.05, 0.3, 0.62, 0.97] {
            let numeric = simpson(|s| p.eval(s) * p.eval(s + w), 0.0, 1.0 - w, 4000);
            assert!(
                (a.eval(w) - numeric).abs() < 1e-10,
                "w = {w}: closed {} vs quadrature {}",
                a.eval(w),
                numeric
            );
        }
    }

    #[test]
    fn lag_zero_matches_moment_integrals() {
        // integral_0^1 p^2 with p the transport shape: 181/462.
        let p = Poly::new(vec![0.0, 0.0, 0.0, 10.0, -15.0, 6.0]);
        assert!((p.autocorrelation_unit().eval(0.0) - 181.0 / 462.0).abs() < 1e-13);
        // Second derivative: integral_0^1 (p'')^2 = 120/7.
        let pdd = p.derivative().derivative();
        assert!((pdd.autocorrelation_unit().eval(0.0) - 120.0 / 7.0).abs() < 1e-11);
    }
}
