//! Exact symbolic representation of complex-valued functions of one real
//! variable.
//!
//! The grammar is deliberately small: it is closed under differentiation, so
//! every derivative needed by the Wronskian machinery is again an expression
//! in the same grammar and nothing is ever approximated. There is no general
//! simplifier; the smart constructors only do cheap local rewrites (constant
//! folding, dropping zero summands and unit factors). Equality of expressions
//! is always decided by pointwise evaluation on a probe grid, never
//! structurally.

use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};
use thiserror::Error;

/// Relative threshold below which a denominator counts as a pole.
pub const POLE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("denominator vanishes at x = {x}")]
    PoleAtPoint { x: f64 },
    #[error("power base lies on the principal branch cut at x = {x}")]
    BranchViolation { x: f64 },
}

/// A complex-valued function of the real coordinate x.
///
/// `Power` uses the principal branch of the complex logarithm; integer
/// exponents are evaluated by repeated multiplication and are exempt from the
/// branch-cut check.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Constant(Complex64),
    Variable,
    Sum(Vec<Expression>),
    Product(Vec<Expression>),
    Quotient(Box<Expression>, Box<Expression>),
    Power(Box<Expression>, Complex64),
    Exp(Box<Expression>),
    Sinh(Box<Expression>),
    Cosh(Box<Expression>),
}

/// Function value and derivatives of orders 1..k at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub point: f64,
    pub values: Vec<Complex64>,
}

impl Jet {
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }
}

fn is_int_exponent(c: Complex64) -> Option<i32> {
    if c.im == 0.0 && c.re.fract() == 0.0 && c.re.abs() <= 64.0 {
        Some(c.re as i32)
    } else {
        None
    }
}

impl Expression {
    pub fn x() -> Expression {
        Expression::Variable
    }

    pub fn constant(c: impl Into<Complex64>) -> Expression {
        Expression::Constant(c.into())
    }

    /// The imaginary unit times `v`.
    pub fn imag(v: f64) -> Expression {
        Expression::Constant(Complex64::new(0.0, v))
    }

    pub fn sum(terms: Vec<Expression>) -> Expression {
        let mut flat = Vec::new();
        let mut acc = Complex64::new(0.0, 0.0);
        for t in terms {
            match t {
                Expression::Constant(c) => acc += c,
                Expression::Sum(inner) => {
                    for s in inner {
                        match s {
                            Expression::Constant(c) => acc += c,
                            other => flat.push(other),
                        }
                    }
                }
                other => flat.push(other),
            }
        }
        if acc != Complex64::new(0.0, 0.0) || flat.is_empty() {
            flat.push(Expression::Constant(acc));
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Expression::Sum(flat)
        }
    }

    pub fn product(factors: Vec<Expression>) -> Expression {
        let mut flat = Vec::new();
        let mut acc = Complex64::new(1.0, 0.0);
        for f in factors {
            match f {
                Expression::Constant(c) => acc *= c,
                Expression::Product(inner) => {
                    for p in inner {
                        match p {
                            Expression::Constant(c) => acc *= c,
                            other => flat.push(other),
                        }
                    }
                }
                other => flat.push(other),
            }
        }
        if acc == Complex64::new(0.0, 0.0) {
            return Expression::Constant(acc);
        }
        if acc != Complex64::new(1.0, 0.0) || flat.is_empty() {
            flat.insert(0, Expression::Constant(acc));
        }
        if flat.len() == 1 {
            flat.pop().unwrap()
        } else {
            Expression::Product(flat)
        }
    }

    pub fn quotient(num: Expression, den: Expression) -> Expression {
        if let Expression::Constant(c) = &num {
            if *c == Complex64::new(0.0, 0.0) {
                return num;
            }
        }
        if let Expression::Constant(c) = &den {
            if *c != Complex64::new(0.0, 0.0) {
                return Expression::product(vec![Expression::Constant(1.0 / c), num]);
            }
        }
        Expression::Quotient(Box::new(num), Box::new(den))
    }

    pub fn power(base: Expression, exponent: impl Into<Complex64>) -> Expression {
        let exponent = exponent.into();
        if exponent == Complex64::new(0.0, 0.0) {
            return Expression::Constant(Complex64::new(1.0, 0.0));
        }
        if exponent == Complex64::new(1.0, 0.0) {
            return base;
        }
        if let (Expression::Constant(c), Some(k)) = (&base, is_int_exponent(exponent)) {
            if *c != Complex64::new(0.0, 0.0) || k > 0 {
                return Expression::Constant(c.powi(k));
            }
        }
        Expression::Power(Box::new(base), exponent)
    }

    pub fn exp(arg: Expression) -> Expression {
        Expression::Exp(Box::new(arg))
    }

    pub fn sinh(arg: Expression) -> Expression {
        Expression::Sinh(Box::new(arg))
    }

    pub fn cosh(arg: Expression) -> Expression {
        Expression::Cosh(Box::new(arg))
    }

    /// Exact complex value of the represented function at real x.
    pub fn evaluate(&self, x: f64) -> Result<Complex64, ExprError> {
        match self {
            Expression::Constant(c) => Ok(*c),
            Expression::Variable => Ok(Complex64::new(x, 0.0)),
            Expression::Sum(terms) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in terms {
                    acc += t.evaluate(x)?;
                }
                Ok(acc)
            }
            Expression::Product(factors) => {
                let mut acc = Complex64::new(1.0, 0.0);
                for f in factors {
                    acc *= f.evaluate(x)?;
                }
                Ok(acc)
            }
            Expression::Quotient(num, den) => {
                let n = num.evaluate(x)?;
                let d = den.evaluate(x)?;
                // pole when the denominator is small against the local scale
                // set by the numerator (tiny/tiny is fine in the decay tails)
                if d.norm() == 0.0 || d.norm() < POLE_TOL * n.norm() {
                    return Err(ExprError::PoleAtPoint { x });
                }
                Ok(n / d)
            }
            Expression::Power(base, exponent) => {
                let b = base.evaluate(x)?;
                if let Some(k) = is_int_exponent(*exponent) {
                    if k < 0 && b.norm() < POLE_TOL {
                        return Err(ExprError::PoleAtPoint { x });
                    }
                    Ok(b.powi(k))
                } else {
                    // principal branch; the cut is the non-positive real axis
                    if b.im.abs() <= POLE_TOL * (1.0 + b.re.abs()) && b.re <= 0.0 {
                        return Err(ExprError::BranchViolation { x });
                    }
                    Ok(b.powc(*exponent))
                }
            }
            Expression::Exp(arg) => Ok(arg.evaluate(x)?.exp()),
            Expression::Sinh(arg) => Ok(arg.evaluate(x)?.sinh()),
            Expression::Cosh(arg) => Ok(arg.evaluate(x)?.cosh()),
        }
    }

    pub fn evaluate_on(&self, xs: &[f64]) -> Result<Vec<Complex64>, ExprError> {
        xs.iter().map(|&x| self.evaluate(x)).collect()
    }

    /// Exact symbolic derivative; the result stays inside the grammar.
    pub fn differentiate(&self) -> Expression {
        match self {
            Expression::Constant(_) => Expression::constant(0.0),
            Expression::Variable => Expression::constant(1.0),
            Expression::Sum(terms) => {
                Expression::sum(terms.iter().map(|t| t.differentiate()).collect())
            }
            Expression::Product(factors) => {
                let mut terms = Vec::with_capacity(factors.len());
                for i in 0..factors.len() {
                    let mut fs: Vec<Expression> = factors.clone();
                    fs[i] = fs[i].differentiate();
                    terms.push(Expression::product(fs));
                }
                Expression::sum(terms)
            }
            Expression::Quotient(num, den) => {
                // (n/d)' = (n'd - nd')/d^2
                let n = (**num).clone();
                let d = (**den).clone();
                let numerator = Expression::sum(vec![
                    Expression::product(vec![num.differentiate(), d.clone()]),
                    Expression::product(vec![
                        Expression::constant(-1.0),
                        n,
                        den.differentiate(),
                    ]),
                ]);
                Expression::quotient(numerator, Expression::power(d, 2.0))
            }
            Expression::Power(base, exponent) => Expression::product(vec![
                Expression::Constant(*exponent),
                Expression::power((**base).clone(), *exponent - 1.0),
                base.differentiate(),
            ]),
            Expression::Exp(arg) => {
                Expression::product(vec![self.clone(), arg.differentiate()])
            }
            Expression::Sinh(arg) => Expression::product(vec![
                Expression::cosh((**arg).clone()),
                arg.differentiate(),
            ]),
            Expression::Cosh(arg) => Expression::product(vec![
                Expression::sinh((**arg).clone()),
                arg.differentiate(),
            ]),
        }
    }

    /// Successive symbolic derivatives, orders 0..=k.
    pub fn derivatives(&self, k: usize) -> Vec<Expression> {
        let mut out = Vec::with_capacity(k + 1);
        out.push(self.clone());
        for j in 0..k {
            let next = out[j].differentiate();
            out.push(next);
        }
        out
    }

    /// Value and derivatives of orders 1..k at the point.
    pub fn jet(&self, x: f64, k: usize) -> Result<Jet, ExprError> {
        let derivs = self.derivatives(k);
        let values = derivs
            .iter()
            .map(|d| d.evaluate(x))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Jet { point: x, values })
    }

    /// The PT image: substitute x -> -x and conjugate every complex constant.
    ///
    /// Applying twice yields an expression pointwise equal to the original.
    pub fn pt_reflect(&self) -> Expression {
        match self {
            Expression::Constant(c) => Expression::Constant(c.conj()),
            Expression::Variable => Expression::product(vec![
                Expression::constant(-1.0),
                Expression::Variable,
            ]),
            Expression::Sum(terms) => {
                Expression::sum(terms.iter().map(|t| t.pt_reflect()).collect())
            }
            Expression::Product(factors) => {
                Expression::product(factors.iter().map(|f| f.pt_reflect()).collect())
            }
            Expression::Quotient(num, den) => {
                Expression::quotient(num.pt_reflect(), den.pt_reflect())
            }
            Expression::Power(base, exponent) => {
                Expression::Power(Box::new(base.pt_reflect()), exponent.conj())
            }
            Expression::Exp(arg) => Expression::exp(arg.pt_reflect()),
            Expression::Sinh(arg) => Expression::sinh(arg.pt_reflect()),
            Expression::Cosh(arg) => Expression::cosh(arg.pt_reflect()),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + match self {
            Expression::Constant(_) | Expression::Variable => 0,
            Expression::Sum(v) | Expression::Product(v) => {
                v.iter().map(|e| e.node_count()).sum()
            }
            Expression::Quotient(a, b) => a.node_count() + b.node_count(),
            Expression::Power(a, _)
            | Expression::Exp(a)
            | Expression::Sinh(a)
            | Expression::Cosh(a) => a.node_count(),
        }
    }
}

impl Add for Expression {
    type Output = Expression;
    fn add(self, rhs: Expression) -> Expression {
        Expression::sum(vec![self, rhs])
    }
}

impl Sub for Expression {
    type Output = Expression;
    fn sub(self, rhs: Expression) -> Expression {
        Expression::sum(vec![
            self,
            Expression::product(vec![Expression::constant(-1.0), rhs]),
        ])
    }
}

impl Mul for Expression {
    type Output = Expression;
    fn mul(self, rhs: Expression) -> Expression {
        Expression::product(vec![self, rhs])
    }
}

impl Div for Expression {
    type Output = Expression;
    fn div(self, rhs: Expression) -> Expression {
        Expression::quotient(self, rhs)
    }
}

impl Neg for Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        Expression::product(vec![Expression::constant(-1.0), self])
    }
}
