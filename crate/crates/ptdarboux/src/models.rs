//! Closed-form solvable baseline models: the PT-symmetric oscillator and the
//! PT-symmetric Scarf II potential, with potentials and eigenstates exposed as
//! exact symbolic expressions.

use crate::expr::Expression;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("coordinate shift must be positive, got epsilon = {epsilon}")]
    InvalidShift { epsilon: f64 },
    #[error("quasi-parity must be +1 or -1, got {q}")]
    InvalidQuasiParity { q: i32 },
    #[error("invalid Scarf parameters: require lambda > 0 and mu != 0 (lambda = {lambda}, mu = {mu})")]
    InvalidStrength { lambda: f64, mu: f64 },
    #[error("broken PT regime: |mu| = {mu_abs} exceeds lambda + 1/4 = {limit}")]
    BrokenPTRegime { mu_abs: f64, limit: f64 },
    #[error("no bound states for the selected tower")]
    NoBoundStates,
    #[error("eigenstate index {n} out of range (bound_count = {bound_count})")]
    InvalidIndex { n: usize, bound_count: usize },
    #[error("gamma pole in polynomial prefactor or series denominator")]
    ParameterPole,
}

/// One bound state: its index, energy, and wavefunction as an expression.
#[derive(Debug, Clone)]
pub struct Eigenstate {
    pub index: usize,
    pub energy: Complex64,
    pub wavefunction: Expression,
}

/// Coefficients of the generalized Laguerre polynomial L_n^a, ascending in
/// its argument, built by the three-term recurrence
/// (n+1) L_{n+1} = (2n+1+a-x) L_n - (n+a) L_{n-1}.
pub fn laguerre(n: usize, a: Complex64) -> Vec<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let mut prev = vec![one]; // L_0 = 1
    if n == 0 {
        return prev;
    }
    let mut cur = vec![one + a, -one]; // L_1 = 1 + a - x
    for m in 1..n {
        let mf = m as f64;
        let mut next = vec![zero; m + 2];
        // (2m+1+a) * L_m  -  x * L_m
        for (k, &c) in cur.iter().enumerate() {
            next[k] += (2.0 * mf + 1.0 + a) * c;
            next[k + 1] -= c;
        }
        // - (m+a) * L_{m-1}
        for (k, &c) in prev.iter().enumerate() {
            next[k] -= (mf + a) * c;
        }
        for c in next.iter_mut() {
            *c /= mf + 1.0;
        }
        prev = cur;
        cur = next;
    }
    cur
}

fn pochhammer(a: Complex64, k: usize) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for j in 0..k {
        acc *= a + j as f64;
    }
    acc
}

/// Coefficients of the Jacobi polynomial P_n^{a,b} as a polynomial in
/// z, via the terminating hypergeometric series
/// P_n = [(a+1)_n / n!] F(-n, n+a+b+1; a+1; z).
pub fn jacobi(n: usize, a: Complex64, b: Complex64) -> Result<Vec<Complex64>, ModelError> {
    // gamma pole when a+1 is a non-positive integer reached by the series
    let ap1 = a + 1.0;
    if ap1.im == 0.0 && ap1.re.fract() == 0.0 && ap1.re <= 0.0 && (-ap1.re) < n as f64 {
        return Err(ModelError::ParameterPole);
    }
    let mut fact = 1.0;
    for j in 1..=n {
        fact *= j as f64;
    }
    let prefactor = pochhammer(ap1, n) / fact;
    let minus_n = Complex64::new(-(n as f64), 0.0);
    let upper = a + b + (n as f64 + 1.0);
    let mut coeffs = Vec::with_capacity(n + 1);
    let mut term = Complex64::new(1.0, 0.0);
    for k in 0..=n {
        coeffs.push(prefactor * term);
        if k < n {
            let den = (ap1 + k as f64) * (k as f64 + 1.0);
            if den.norm() == 0.0 {
                return Err(ModelError::ParameterPole);
            }
            term *= (minus_n + k as f64) * (upper + k as f64) / den;
        }
    }
    Ok(coeffs)
}

/// Horner form of sum_k coeffs[k] * arg^k.
fn polynomial(coeffs: &[Complex64], arg: &Expression) -> Expression {
    let mut acc = Expression::Constant(*coeffs.last().expect("nonempty coefficients"));
    for &c in coeffs.iter().rev().skip(1) {
        acc = acc * arg.clone() + Expression::Constant(c);
    }
    acc
}

/// The PT-symmetric oscillator V(x) = (x - i eps)^2 + (alpha^2 - 1/4)/(x - i eps)^2.
#[derive(Debug, Clone)]
pub struct OscillatorModel {
    pub alpha: f64,
    pub epsilon: f64,
    pub quasi_parity: i32,
}

impl OscillatorModel {
    pub fn new(alpha: f64, epsilon: f64, quasi_parity: i32) -> Result<Self, ModelError> {
        if !(epsilon > 0.0) {
            return Err(ModelError::InvalidShift { epsilon });
        }
        if quasi_parity != 1 && quasi_parity != -1 {
            return Err(ModelError::InvalidQuasiParity { q: quasi_parity });
        }
        Ok(OscillatorModel {
            alpha,
            epsilon,
            quasi_parity,
        })
    }

    /// The shifted coordinate x - i eps.
    pub fn shifted(&self) -> Expression {
        Expression::x() - Expression::imag(self.epsilon)
    }

    pub fn potential(&self) -> Expression {
        let s = self.shifted();
        Expression::power(s.clone(), 2.0)
            + Expression::constant(self.alpha * self.alpha - 0.25)
                * Expression::power(s, -2.0)
    }

    /// E_n = 4n - 2 q alpha + 2.
    pub fn energy(&self, n: usize) -> f64 {
        4.0 * n as f64 - 2.0 * self.quasi_parity as f64 * self.alpha + 2.0
    }

    pub fn eigenstate(&self, n: usize) -> Eigenstate {
        let qa = self.quasi_parity as f64 * self.alpha;
        let s = self.shifted();
        let s2 = Expression::power(s.clone(), 2.0);
        let gauss = Expression::exp(Expression::constant(-0.5) * s2.clone());
        let prefix = Expression::power(s, Complex64::new(-qa + 0.5, 0.0));
        let lag = polynomial(&laguerre(n, Complex64::new(-qa, 0.0)), &s2);
        Eigenstate {
            index: n,
            energy: Complex64::new(self.energy(n), 0.0),
            wavefunction: gauss * prefix * lag,
        }
    }
}

/// Which sign to take in q = -1/4 ± s/2; the two choices give the two
/// eigenfunction towers of Scarf II.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Tower {
    Plus,
    Minus,
}

/// The PT-symmetric Scarf II potential
/// V(x) = -lambda sech^2 x - i mu sech x tanh x in its unbroken-PT regime.
#[derive(Debug, Clone)]
pub struct ScarfModel {
    pub lambda: f64,
    pub mu: f64,
    pub tower: Tower,
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub t: f64,
    pub bound_count: usize,
    /// When false, eigenfunctions drop their gamma-ratio normalization
    /// constant; all downstream formulas are scale-covariant.
    pub normalized: bool,
}

impl ScarfModel {
    pub fn new(lambda: f64, mu: f64, tower: Option<Tower>) -> Result<Self, ModelError> {
        if !(lambda > 0.0) || mu == 0.0 {
            return Err(ModelError::InvalidStrength { lambda, mu });
        }
        let limit = lambda + 0.25;
        if mu.abs() > limit {
            return Err(ModelError::BrokenPTRegime {
                mu_abs: mu.abs(),
                limit,
            });
        }
        let t = (0.25 + lambda + mu).sqrt();
        let s = (0.25 + lambda - mu).sqrt();
        // normalizability allows only the positive sign in p
        let p = -0.25 + t / 2.0;
        // default tower: the one with the larger bound count, i.e. the plus sign
        let tower = tower.unwrap_or(Tower::Plus);
        let q = match tower {
            Tower::Plus => -0.25 + s / 2.0,
            Tower::Minus => -0.25 - s / 2.0,
        };
        // bound states: integers n >= 0 with n < p + q (= (s+t-1)/2 for the
        // plus tower)
        let pq = p + q;
        let bound_count = if pq <= 0.0 {
            0
        } else if pq.fract() == 0.0 {
            pq as usize
        } else {
            pq.ceil() as usize
        };
        if bound_count == 0 {
            return Err(ModelError::NoBoundStates);
        }
        Ok(ScarfModel {
            lambda,
            mu,
            tower,
            p,
            q,
            s,
            t,
            bound_count,
            normalized: true,
        })
    }

    pub fn unnormalized(mut self) -> Self {
        self.normalized = false;
        self
    }

    pub fn potential(&self) -> Expression {
        // -lambda sech^2 x - i mu sech x tanh x
        let cosh2 = Expression::power(Expression::cosh(Expression::x()), 2.0);
        Expression::quotient(
            Expression::constant(-self.lambda)
                + Expression::imag(-self.mu) * Expression::sinh(Expression::x()),
            cosh2,
        )
    }

    /// E_n = -(n - p - q)^2.
    pub fn energy(&self, n: usize) -> f64 {
        let d = n as f64 - self.p - self.q;
        -d * d
    }

    /// z = (1 - i sinh x)/2; its conjugate on the real line is (1 + i sinh x)/2.
    fn z_pair(&self) -> (Expression, Expression) {
        let half = Expression::constant(0.5);
        let z = half.clone()
            + Expression::imag(-0.5) * Expression::sinh(Expression::x());
        let zc = half + Expression::imag(0.5) * Expression::sinh(Expression::x());
        (z, zc)
    }

    pub fn eigenstate(&self, n: usize) -> Result<Eigenstate, ModelError> {
        if n >= self.bound_count {
            return Err(ModelError::InvalidIndex {
                n,
                bound_count: self.bound_count,
            });
        }
        let a = Complex64::new(-2.0 * self.p - 0.5, 0.0);
        let b = Complex64::new(-2.0 * self.q - 0.5, 0.0);
        let coeffs = jacobi(n, a, b)?;
        let (z, zc) = self.z_pair();
        let poly = polynomial(&coeffs, &z);
        let zp = Expression::power(z, Complex64::new(-self.p, 0.0));
        let zq = Expression::power(zc, Complex64::new(-self.q, 0.0));
        let mut wf = zp * zq * poly;
        if self.normalized {
            // Gamma(n - 2p + 1/2) / (n! Gamma(1/2 - 2p)) = (1/2 - 2p)_n / n!
            let mut fact = 1.0;
            for j in 1..=n {
                fact *= j as f64;
            }
            let norm = pochhammer(Complex64::new(0.5 - 2.0 * self.p, 0.0), n) / fact;
            wf = Expression::Constant(norm) * wf;
        }
        Ok(Eigenstate {
            index: n,
            energy: Complex64::new(self.energy(n), 0.0),
            wavefunction: wf,
        })
    }
}

/// A solvable baseline: potential, indexed eigenstates, energy formula.
#[derive(Debug, Clone)]
pub enum SolvableModel {
    Oscillator(OscillatorModel),
    Scarf(ScarfModel),
}

impl SolvableModel {
    pub fn potential(&self) -> Expression {
        match self {
            SolvableModel::Oscillator(m) => m.potential(),
            SolvableModel::Scarf(m) => m.potential(),
        }
    }

    pub fn energy(&self, n: usize) -> f64 {
        match self {
            SolvableModel::Oscillator(m) => m.energy(n),
            SolvableModel::Scarf(m) => m.energy(n),
        }
    }

    pub fn eigenstate(&self, n: usize) -> Result<Eigenstate, ModelError> {
        match self {
            SolvableModel::Oscillator(m) => Ok(m.eigenstate(n)),
            SolvableModel::Scarf(m) => m.eigenstate(n),
        }
    }

    /// Number of bound states, if finite.
    pub fn bound_count(&self) -> Option<usize> {
        match self {
            SolvableModel::Oscillator(_) => None,
            SolvableModel::Scarf(m) => Some(m.bound_count),
        }
    }

    /// Probe grid on which boundary wavefunction magnitude is negligible.
    pub fn default_grid(&self) -> (f64, usize) {
        match self {
            SolvableModel::Oscillator(_) => (8.0, 1601),
            SolvableModel::Scarf(_) => (18.0, 2401),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SolvableModel::Oscillator(_) => "pt-oscillator",
            SolvableModel::Scarf(_) => "scarf2",
        }
    }
}
