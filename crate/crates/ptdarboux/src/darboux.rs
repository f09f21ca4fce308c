//! The generative core: order-N Crum transformations via Wronskians,
//! first-order Darboux chains, transformed potentials and eigenfunctions, and
//! intermediate Hamiltonians.
//!
//! Everything here is symbolic: Wronskians are expanded as determinants of
//! expression matrices and differentiated exactly, so the transformed
//! potential V - 2 (ln W)'' never touches a finite difference.

use crate::expr::{ExprError, Expression};
use crate::models::{ModelError, SolvableModel};
use num_complex::Complex64;
use thiserror::Error;

/// Relative nodelessness threshold: a transform whose Wronskian dips below
/// this fraction of its grid maximum is rejected rather than patched.
pub const NODELESS_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum DarbouxError {
    #[error("transformation indices must be strictly increasing, got {0:?}")]
    InvalidIndices(Vec<usize>),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("state {n} is a transformation index; its image is identically zero")]
    AnnihilatedState { n: usize },
    #[error("singular transform: Wronskian min/max ratio {ratio:.3e} below {NODELESS_TOL:.0e}")]
    SingularTransform { ratio: f64 },
    #[error("singular intermediate at chain step {step}: Wronskian ratio {ratio:.3e}")]
    SingularIntermediate { step: usize, ratio: f64 },
    #[error("Wronskian node detected at x = {x}")]
    NodeDetected { x: f64 },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// The chosen transformation functions u_k = psi_{i_k} with their
/// factorization energies alpha_k = E_{i_k}.
#[derive(Debug, Clone)]
pub struct TransformationSet {
    pub model: SolvableModel,
    pub indices: Vec<usize>,
    pub functions: Vec<Expression>,
    pub energies: Vec<f64>,
}

impl TransformationSet {
    /// Indices must be strictly increasing and valid for the model. An empty
    /// set is the trivial (order-zero) transform.
    pub fn new(model: SolvableModel, indices: Vec<usize>) -> Result<Self, DarbouxError> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DarbouxError::InvalidIndices(indices));
        }
        if let (Some(bound), Some(&max)) = (model.bound_count(), indices.last()) {
            if max >= bound {
                return Err(DarbouxError::Model(ModelError::InvalidIndex {
                    n: max,
                    bound_count: bound,
                }));
            }
        }
        let mut functions = Vec::with_capacity(indices.len());
        let mut energies = Vec::with_capacity(indices.len());
        for &i in &indices {
            let state = model.eigenstate(i)?;
            functions.push(state.wavefunction);
            energies.push(state.energy.re);
        }
        Ok(TransformationSet {
            model,
            indices,
            functions,
            energies,
        })
    }

    pub fn order(&self) -> usize {
        self.indices.len()
    }

    pub fn contains(&self, n: usize) -> bool {
        self.indices.contains(&n)
    }
}

/// Symbolic N-function Wronskian: the determinant of the matrix whose rows
/// are the functions and their successive derivatives, expanded by cofactors.
pub fn wronskian_expression(functions: &[Expression]) -> Expression {
    let n = functions.len();
    assert!(n >= 1, "Wronskian needs at least one function");
    if n == 1 {
        return functions[0].clone();
    }
    // matrix[row][col] = d^row/dx^row functions[col]
    let mut matrix = Vec::with_capacity(n);
    let derivs: Vec<Vec<Expression>> =
        functions.iter().map(|f| f.derivatives(n - 1)).collect();
    for row in 0..n {
        matrix.push((0..n).map(|col| derivs[col][row].clone()).collect::<Vec<_>>());
    }
    symbolic_det(&matrix)
}

fn symbolic_det(m: &[Vec<Expression>]) -> Expression {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut terms = Vec::with_capacity(n);
    for col in 0..n {
        let minor: Vec<Vec<Expression>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(j, _)| *j != col)
                    .map(|(_, e)| e.clone())
                    .collect()
            })
            .collect();
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(Expression::product(vec![
            Expression::constant(sign),
            m[0][col].clone(),
            symbolic_det(&minor),
        ]));
    }
    Expression::sum(terms)
}

/// W, W', W'' at a point.
#[derive(Debug, Clone, Copy)]
pub struct WronskianSample {
    pub w: Complex64,
    pub dw: Complex64,
    pub ddw: Complex64,
}

/// Evaluates W(u_1..u_N) and its first two derivatives numerically from jets,
/// with the derivatives taken exactly by row-differentiated determinant
/// expansions (the derivative of a determinant is the sum over rows of
/// determinants with that one row differentiated).
pub struct WronskianEvaluator {
    derivs: Vec<Vec<Expression>>,
    order: usize,
    terms_w: Vec<(f64, Vec<usize>)>,
    terms_dw: Vec<(f64, Vec<usize>)>,
    terms_ddw: Vec<(f64, Vec<usize>)>,
}

/// Differentiate a sum of determinants, each given as the list of derivative
/// orders of its rows: bump one row's order at a time, dropping terms where
/// two rows coincide.
fn differentiate_terms(terms: &[(f64, Vec<usize>)]) -> Vec<(f64, Vec<usize>)> {
    let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
    for (coeff, orders) in terms {
        for i in 0..orders.len() {
            let mut bumped = orders.clone();
            bumped[i] += 1;
            if bumped.iter().filter(|&&o| o == bumped[i]).count() > 1 {
                continue; // duplicate rows: determinant vanishes
            }
            if let Some(existing) = out.iter_mut().find(|(_, o)| *o == bumped) {
                existing.0 += coeff;
            } else {
                out.push((*coeff, bumped));
            }
        }
    }
    out
}

impl WronskianEvaluator {
    pub fn new(functions: &[Expression]) -> Self {
        let n = functions.len();
        assert!(n >= 1);
        // rows need derivative orders up to N-1 for W itself, +2 for W''
        let derivs = functions.iter().map(|f| f.derivatives(n + 1)).collect();
        let base: Vec<(f64, Vec<usize>)> = vec![(1.0, (0..n).collect())];
        let terms_dw = differentiate_terms(&base);
        let terms_ddw = differentiate_terms(&terms_dw);
        WronskianEvaluator {
            derivs,
            order: n,
            terms_w: base,
            terms_dw,
            terms_ddw,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn det_for_orders(vals: &[Vec<Complex64>], orders: &[usize]) -> Complex64 {
        let n = orders.len();
        let mut m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for (r, &ord) in orders.iter().enumerate() {
            for c in 0..n {
                m[r][c] = vals[c][ord];
            }
        }
        numeric_det(&mut m)
    }

    pub fn eval(&self, x: f64) -> Result<WronskianSample, ExprError> {
        let vals: Vec<Vec<Complex64>> = self
            .derivs
            .iter()
            .map(|ds| ds.iter().map(|d| d.evaluate(x)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        let combine = |terms: &[(f64, Vec<usize>)]| {
            terms
                .iter()
                .map(|(c, o)| c * Self::det_for_orders(&vals, o))
                .sum::<Complex64>()
        };
        Ok(WronskianSample {
            w: combine(&self.terms_w),
            dw: combine(&self.terms_dw),
            ddw: combine(&self.terms_ddw),
        })
    }

    /// W samples over the grid, for nodelessness scans.
    pub fn samples(&self, xs: &[f64]) -> Result<Vec<Complex64>, ExprError> {
        xs.iter().map(|&x| Ok(self.eval(x)?.w)).collect()
    }
}

/// Pivoted Gaussian elimination determinant for the small complex matrices
/// that appear here (k <= 4 in practice).
fn numeric_det(m: &mut [Vec<Complex64>]) -> Complex64 {
    let n = m.len();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&a, &b| m[a][k].norm().total_cmp(&m[b][k].norm()))
            .unwrap();
        if m[pivot][k].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != k {
            m.swap(pivot, k);
            det = -det;
        }
        det *= m[k][k];
        for i in (k + 1)..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                let sub = f * m[k][j];
                m[i][j] -= sub;
            }
        }
    }
    det
}

/// A single Darboux factor L = -d/dx + (ln u)'.
#[derive(Debug, Clone)]
pub struct FirstOrderTransform {
    pub seed: Expression,
    pub superpotential: Expression,
    pub source_potential: Expression,
    pub target_potential: Expression,
}

impl FirstOrderTransform {
    pub fn from_seed(seed: Expression, source_potential: Expression) -> Self {
        let ds = seed.differentiate();
        let superpotential = Expression::quotient(ds.clone(), seed.clone());
        // target = source - 2 (ln u)'' with (ln u)'' = u''/u - (u'/u)^2
        let log_dd = Expression::quotient(ds.differentiate(), seed.clone())
            - Expression::power(
                Expression::quotient(ds, seed.clone()),
                2.0,
            );
        let target_potential =
            source_potential.clone() - Expression::constant(2.0) * log_dd;
        FirstOrderTransform {
            seed,
            superpotential,
            source_potential,
            target_potential,
        }
    }

    /// L f = -f' + (ln u)' f.
    pub fn apply(&self, f: &Expression) -> Expression {
        Expression::constant(-1.0) * f.differentiate()
            + self.superpotential.clone() * f.clone()
    }
}

/// The order-N intertwiner A = L_N ... L_1 as a composable factor sequence.
#[derive(Debug, Clone)]
pub struct ChainOperator {
    pub factors: Vec<FirstOrderTransform>,
    pub energies: Vec<f64>,
}

impl ChainOperator {
    pub fn order(&self) -> usize {
        self.factors.len()
    }

    /// The final potential seen after all factors.
    pub fn final_potential(&self) -> Expression {
        self.factors
            .last()
            .expect("chain has at least one factor")
            .target_potential
            .clone()
    }

    /// Potentials V_1, .., V_{N-1} of the intermediate Hamiltonians.
    pub fn intermediate_potentials(&self) -> Vec<Expression> {
        self.factors[..self.factors.len() - 1]
            .iter()
            .map(|f| f.target_potential.clone())
            .collect()
    }
}

/// Apply the full chain to an expression: A f.
pub fn apply_chain(chain: &ChainOperator, f: &Expression) -> Expression {
    let mut g = f.clone();
    for factor in &chain.factors {
        g = factor.apply(&g);
    }
    g
}

/// The transformed model: potential, deleted levels, surviving levels.
#[derive(Debug, Clone)]
pub struct TransformedModel {
    pub transformation: TransformationSet,
    pub potential: Expression,
    pub wronskian: Option<Expression>,
}

impl TransformedModel {
    /// Energies deleted from the source spectrum.
    pub fn deleted_levels(&self) -> &[f64] {
        &self.transformation.energies
    }

    /// The first `count` surviving levels: source levels with the
    /// transformation indices removed, in ascending order.
    pub fn surviving_levels(&self, count: usize) -> Vec<f64> {
        let model = &self.transformation.model;
        let bound = model.bound_count();
        let mut out = Vec::with_capacity(count);
        let mut n = 0usize;
        while out.len() < count {
            if let Some(b) = bound {
                if n >= b {
                    break;
                }
            }
            if !self.transformation.contains(n) {
                out.push(model.energy(n));
            }
            n += 1;
        }
        out
    }

    /// Source indices of the first `count` surviving levels.
    pub fn surviving_indices(&self, count: usize) -> Vec<usize> {
        let bound = self.transformation.model.bound_count();
        let mut out = Vec::with_capacity(count);
        let mut n = 0usize;
        while out.len() < count {
            if let Some(b) = bound {
                if n >= b {
                    break;
                }
            }
            if !self.transformation.contains(n) {
                out.push(n);
            }
            n += 1;
        }
        out
    }
}

fn probe_points(model: &SolvableModel) -> Vec<f64> {
    let (half_width, points) = model.default_grid();
    let h = 2.0 * half_width / (points - 1) as f64;
    (0..points).map(|i| -half_width + h * i as f64).collect()
}

/// Worst local magnitude ratio of |W| against its envelope in a sliding
/// window, paired with a phase-reversal flag. A decaying but regular
/// Wronskian keeps the windowed ratio near 1; a (near-)zero on the real line
/// either collapses the ratio or flips the phase of W by ~pi between
/// adjacent samples.
pub fn nodeless_ratio(samples: &[Complex64]) -> f64 {
    let n = samples.len();
    if n < 3 {
        return 1.0;
    }
    let window = (n / 100).max(2);
    let mags: Vec<f64> = samples.iter().map(|w| w.norm()).collect();
    let mut worst = f64::INFINITY;
    for i in 0..n {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(n);
        let local = mags[lo..hi].iter().fold(0.0f64, |a, &b| a.max(b));
        let r = if local == 0.0 { 0.0 } else { mags[i] / local };
        worst = worst.min(r);
    }
    // a simple zero crossed between samples reverses the phase of W
    for i in 0..n - 1 {
        let dot = (samples[i] * samples[i + 1].conj()).re;
        if dot < -0.5 * mags[i] * mags[i + 1] && mags[i] > 0.0 && mags[i + 1] > 0.0 {
            worst = 0.0;
        }
    }
    worst
}

fn check_nodeless(functions: &[Expression], xs: &[f64]) -> Result<f64, DarbouxError> {
    let ev = WronskianEvaluator::new(functions);
    let ratio = nodeless_ratio(&ev.samples(xs)?);
    if ratio < NODELESS_TOL {
        return Err(DarbouxError::SingularTransform { ratio });
    }
    Ok(ratio)
}

/// The Crum potential V_N = V - 2 d^2/dx^2 ln W(u_1..u_N), with the
/// nodelessness of W checked on the model's probe grid.
pub fn crum_potential(t: &TransformationSet) -> Result<TransformedModel, DarbouxError> {
    let source = t.model.potential();
    if t.order() == 0 {
        return Ok(TransformedModel {
            transformation: t.clone(),
            potential: source,
            wronskian: None,
        });
    }
    let xs = probe_points(&t.model);
    check_nodeless(&t.functions, &xs)?;
    let w = wronskian_expression(&t.functions);
    let dw = w.differentiate();
    let ddw = dw.differentiate();
    // (ln W)'' = W''/W - (W'/W)^2
    let log_dd = Expression::quotient(ddw, w.clone())
        - Expression::power(Expression::quotient(dw, w.clone()), 2.0);
    let potential = source - Expression::constant(2.0) * log_dd;
    Ok(TransformedModel {
        transformation: t.clone(),
        potential,
        wronskian: Some(w),
    })
}

/// The transformed eigenfunction as the Wronskian ratio
/// W(u_1..u_N, psi_n) / W(u_1..u_N); it is returned raw, without
/// renormalization.
pub fn transform_eigenstate(
    t: &TransformationSet,
    n: usize,
) -> Result<Expression, DarbouxError> {
    if t.contains(n) {
        return Err(DarbouxError::AnnihilatedState { n });
    }
    let psi = t.model.eigenstate(n)?.wavefunction;
    if t.order() == 0 {
        return Ok(psi);
    }
    let mut funcs = t.functions.clone();
    funcs.push(psi);
    let big = wronskian_expression(&funcs);
    let small = wronskian_expression(&t.functions);
    Ok(Expression::quotient(big, small))
}

/// Factor the order-N transform into first-order Darboux steps
/// L_k = -d/dx + (ln s_k)' with seeds s_1 = u_1 and
/// s_k = W(u_1..u_k)/W(u_1..u_{k-1}); exposes the intermediate potentials.
pub fn first_order_chain(t: &TransformationSet) -> Result<ChainOperator, DarbouxError> {
    assert!(t.order() >= 1, "chain needs at least one factor");
    let xs = probe_points(&t.model);
    let mut factors = Vec::with_capacity(t.order());
    let mut source = t.model.potential();
    for k in 1..=t.order() {
        let ev = WronskianEvaluator::new(&t.functions[..k]);
        let ratio = nodeless_ratio(&ev.samples(&xs)?);
        if ratio < NODELESS_TOL {
            if k < t.order() {
                return Err(DarbouxError::SingularIntermediate { step: k, ratio });
            }
            return Err(DarbouxError::SingularTransform { ratio });
        }
        let seed = if k == 1 {
            t.functions[0].clone()
        } else {
            Expression::quotient(
                wronskian_expression(&t.functions[..k]),
                wronskian_expression(&t.functions[..k - 1]),
            )
        };
        let factor = FirstOrderTransform::from_seed(seed, source.clone());
        source = factor.target_potential.clone();
        factors.push(factor);
    }
    Ok(ChainOperator {
        factors,
        energies: t.energies.clone(),
    })
}
