//! Truncated branched Fourier functions and the boundary pairing.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::{C, I};

/// A function `f(θ) = Δ·θ/(2π) + Σ_{|n|≤N} c_n e^{inθ}` with
/// `f(θ + 2π) = f(θ) + Δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchedFunction {
    degree: C,
    /// `coeffs[n + N]` holds `c_n`.
    coeffs: Vec<C>,
}

impl BranchedFunction {
    pub fn zero(truncation: usize) -> Self {
        Self {
            degree: C::new(0.0, 0.0),
            coeffs: vec![C::new(0.0, 0.0); 2 * truncation + 1],
        }
    }

    /// Builds from a degree and `2N+1` coefficients ordered `c_{-N} .. c_N`.
    pub fn from_parts(degree: C, coeffs: Vec<C>) -> Result<Self> {
        if coeffs.len() % 2 != 1 {
            return Err(Error::Dimension(format!(
                "expected an odd number of Fourier coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(Self { degree, coeffs })
    }

    pub fn constant(value: C, truncation: usize) -> Self {
        let mut f = Self::zero(truncation);
        f.set_coeff(0, value);
        f
    }

    /// `Δ·θ/(2π)`.
    pub fn winding(degree: C, truncation: usize) -> Self {
        let mut f = Self::zero(truncation);
        f.degree = degree;
        f
    }

    /// `a·e^{inθ}`.
    pub fn mode(n: i64, a: C, truncation: usize) -> Self {
        let mut f = Self::zero(truncation);
        f.set_coeff(n, a);
        f
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn degree(&self) -> C {
        self.degree
    }

    pub fn set_degree(&mut self, d: C) {
        self.degree = d;
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// `c_n`, zero outside the truncation window.
    pub fn coeff(&self, n: i64) -> C {
        let big_n = self.truncation() as i64;
        if n.abs() > big_n {
            C::new(0.0, 0.0)
        } else {
            self.coeffs[(n + big_n) as usize]
        }
    }

    pub fn set_coeff(&mut self, n: i64, value: C) {
        let big_n = self.truncation() as i64;
        assert!(n.abs() <= big_n, "mode {n} outside truncation {big_n}");
        self.coeffs[(n + big_n) as usize] = value;
    }

    pub fn eval(&self, theta: f64) -> C {
        let big_n = self.truncation() as i64;
        let mut acc = self.degree * (theta / (2.0 * PI));
        for n in -big_n..=big_n {
            acc += self.coeff(n) * (I * (n as f64 * theta)).exp();
        }
        acc
    }

    pub fn derivative(&self, theta: f64) -> C {
        let big_n = self.truncation() as i64;
        let mut acc = self.degree / (2.0 * PI);
        for n in -big_n..=big_n {
            if n != 0 {
                acc += self.coeff(n) * I * (n as f64) * (I * (n as f64 * theta)).exp();
            }
        }
        acc
    }

    /// Value at the base point, taken on the branch continuous from the
    /// right: `c_0 + Σ_{n≠0} c_n`.
    pub fn value_at_zero(&self) -> C {
        self.coeffs.iter().sum()
    }

    /// Largest coefficient magnitude, degree included.
    pub fn scale(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|z| z.norm())
            .fold(self.degree.norm(), f64::max)
    }

    /// Whether this represents a real function: real degree and
    /// `c_{-n} = conj(c_n)` to within `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        if self.degree.im.abs() > tol {
            return false;
        }
        let big_n = self.truncation() as i64;
        (0..=big_n).all(|n| (self.coeff(-n) - self.coeff(n).conj()).norm() <= tol)
    }

    /// Complex conjugate function.
    pub fn conj(&self) -> Self {
        let big_n = self.truncation() as i64;
        let mut out = Self::zero(self.truncation());
        out.degree = self.degree.conj();
        for n in -big_n..=big_n {
            out.set_coeff(n, self.coeff(-n).conj());
        }
        out
    }

    pub fn add_constant(&mut self, v: C) {
        let c0 = self.coeff(0);
        self.set_coeff(0, c0 + v);
    }

    fn zip_with(&self, other: &Self, op: impl Fn(C, C) -> C) -> Self {
        assert_eq!(self.truncation(), other.truncation(), "truncation mismatch");
        Self {
            degree: op(self.degree, other.degree),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        }
    }
}

impl Add for &BranchedFunction {
    type Output = BranchedFunction;
    fn add(self, rhs: Self) -> BranchedFunction {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &BranchedFunction {
    type Output = BranchedFunction;
    fn sub(self, rhs: Self) -> BranchedFunction {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &BranchedFunction {
    type Output = BranchedFunction;
    fn neg(self) -> BranchedFunction {
        self * C::new(-1.0, 0.0)
    }
}

impl Mul<C> for &BranchedFunction {
    type Output = BranchedFunction;
    fn mul(self, k: C) -> BranchedFunction {
        BranchedFunction {
            degree: self.degree * k,
            coeffs: self.coeffs.iter().map(|&z| z * k).collect(),
        }
    }
}

/// The antisymmetric form `S(f,g) = ∫ f dg − Δ_f g(0) − ½ Δ_f Δ_g`, in
/// closed form on Fourier coefficients:
/// `Δ_g c_0(f) − Δ_f c_0(g) + 2πi Σ_{n≠0} n c_{-n}(f) c_n(g)`.
pub fn pairing(f: &BranchedFunction, g: &BranchedFunction) -> Result<C> {
    if f.truncation() != g.truncation() {
        return Err(Error::TruncationMismatch(f.truncation(), g.truncation()));
    }
    let big_n = f.truncation() as i64;
    let mut modes = C::new(0.0, 0.0);
    for n in 1..=big_n {
        let nf = n as f64;
        modes += nf * (f.coeff(-n) * g.coeff(n) - f.coeff(n) * g.coeff(-n));
    }
    Ok(g.degree() * f.coeff(0) - f.degree() * g.coeff(0) + 2.0 * PI * I * modes)
}

/// Integrates the defining formula of [`pairing`] literally, with
/// Gauss–Legendre quadrature of `∫_0^{2π} f(θ) g'(θ) dθ` on the branched
/// evaluations. Serves as an independent check of the closed form.
///
/// The node count is raised to `4N + 4` if `samples` is smaller.
pub fn quadrature_pairing(f: &BranchedFunction, g: &BranchedFunction, samples: usize) -> C {
    let n_nodes = samples.max(4 * f.truncation().max(g.truncation()) + 4);
    let (nodes, weights) = gauss_legendre(n_nodes);
    let mut integral = C::new(0.0, 0.0);
    for (x, w) in nodes.iter().zip(&weights) {
        let theta = PI * (x + 1.0);
        integral += f.eval(theta) * g.derivative(theta) * (w * PI);
    }
    integral - f.degree() * g.eval(0.0) - 0.5 * f.degree() * g.degree()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        weights[i] = w;
        nodes[n - 1 - i] = -x;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> C {
        C::new(1.0, 0.0)
    }

    #[test]
    fn winding_against_constant() {
        let f = BranchedFunction::winding(one(), 4);
        let g = BranchedFunction::constant(one(), 4);
        assert!((pairing(&f, &g).unwrap() - C::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((quadrature_pairing(&f, &g, 256) - C::new(-1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn opposite_modes() {
        let f = BranchedFunction::mode(1, one(), 4);
        let g = BranchedFunction::mode(-1, one(), 4);
        let expected = C::new(0.0, -2.0 * PI);
        assert!((pairing(&f, &g).unwrap() - expected).norm() < 1e-14);
        assert!((quadrature_pairing(&f, &g, 256) - expected).norm() < 1e-12);
    }

    #[test]
    fn self_pairing_vanishes() {
        let mut f = BranchedFunction::winding(C::new(2.0, 0.0), 3);
        f.set_coeff(2, C::new(0.3, -1.0));
        f.set_coeff(-1, C::new(0.7, 0.2));
        f.set_coeff(0, C::new(5.0, 0.0));
        assert!(pairing(&f, &f).unwrap().norm() < 1e-14);
    }

    #[test]
    fn zero_input_quadrature() {
        let f = BranchedFunction::zero(4);
        let mut g = BranchedFunction::winding(one(), 4);
        g.set_coeff(3, C::new(1.0, 1.0));
        assert_eq!(quadrature_pairing(&f, &g, 256), C::new(0.0, 0.0));
    }

    #[test]
    fn truncation_mismatch_is_error() {
        let f = BranchedFunction::zero(3);
        let g = BranchedFunction::zero(4);
        assert!(matches!(pairing(&f, &g), Err(Error::TruncationMismatch(3, 4))));
    }

    #[test]
    fn degree_is_the_period_jump() {
        let mut f = BranchedFunction::winding(C::new(3.0, 0.0), 5);
        f.set_coeff(4, C::new(0.1, 0.4));
        f.set_coeff(-2, C::new(-0.5, 0.0));
        for &t in &[0.0, 0.3, 1.7, 4.0] {
            let jump = f.eval(t + 2.0 * PI) - f.eval(t);
            assert!((jump - C::new(3.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((integral - 2.0 / 13.0).abs() < 1e-14);
    }
}
