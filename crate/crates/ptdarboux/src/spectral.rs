//! Independent numerical verification: discretize a potential into a dense
//! complex non-Hermitian matrix, compute its full spectrum (LAPACK zgeev),
//! and test PT, pseudo-Hermiticity and orthogonality claims.

use crate::expr::{ExprError, Expression};
use ndarray::Array2;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("grid needs an odd point count >= 3, got {points}")]
    InvalidGrid { points: usize },
    #[error("potential is singular at grid node x = {x}")]
    PoleOnGrid { x: f64 },
    #[error("eigensolver failed to converge (zgeev info = {info})")]
    NoConvergence { info: i32 },
    #[error("integrand has not decayed at the grid boundary (leak {leak:.3e} of peak)")]
    BoundaryLeak { leak: f64 },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Uniform symmetric grid on [-L, L]; the point count is odd so that x = 0 is
/// a grid point and the parity flip is an exact grid symmetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    half_width: f64,
    points: usize,
}

impl Grid {
    pub fn new(half_width: f64, points: usize) -> Result<Grid, SpectralError> {
        if points < 3 || points % 2 == 0 {
            return Err(SpectralError::InvalidGrid { points });
        }
        Ok(Grid { half_width, points })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points)
            .map(|i| -self.half_width + h * i as f64)
            .collect()
    }

    /// Grid points excluding the two Dirichlet boundary nodes.
    pub fn interior_xs(&self) -> Vec<f64> {
        let xs = self.xs();
        xs[1..xs.len() - 1].to_vec()
    }

    /// Same box, halved spacing.
    pub fn refine(&self) -> Grid {
        Grid {
            half_width: self.half_width,
            points: 2 * self.points - 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StencilOrder {
    Two,
    Four,
}

impl StencilOrder {
    pub fn order(&self) -> usize {
        match self {
            StencilOrder::Two => 2,
            StencilOrder::Four => 4,
        }
    }
}

/// Dense matrix of -d^2/dx^2 + V(x) on the interior grid points with
/// Dirichlet ends.
#[derive(Debug, Clone)]
pub struct DiscreteHamiltonian {
    pub grid: Grid,
    pub matrix: Array2<Complex64>,
    pub stencil_order: StencilOrder,
}

impl DiscreteHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Kinetic part -d^2/dx^2 as a real banded stencil; values beyond the
/// Dirichlet wall are treated as zero.
fn kinetic_stencil(stencil: StencilOrder, h: f64) -> Vec<(i64, f64)> {
    match stencil {
        StencilOrder::Two => vec![
            (-1, -1.0 / (h * h)),
            (0, 2.0 / (h * h)),
            (1, -1.0 / (h * h)),
        ],
        StencilOrder::Four => vec![
            (-2, 1.0 / (12.0 * h * h)),
            (-1, -16.0 / (12.0 * h * h)),
            (0, 30.0 / (12.0 * h * h)),
            (1, -16.0 / (12.0 * h * h)),
            (2, 1.0 / (12.0 * h * h)),
        ],
    }
}

pub fn discretize(
    v: &Expression,
    grid: &Grid,
    stencil: StencilOrder,
) -> Result<DiscreteHamiltonian, SpectralError> {
    let xs = grid.interior_xs();
    let n = xs.len();
    let mut m = Array2::zeros((n, n));
    let coeffs = kinetic_stencil(stencil, grid.spacing());
    for i in 0..n {
        for &(off, c) in &coeffs {
            let j = i as i64 + off;
            if j >= 0 && (j as usize) < n {
                m[[i, j as usize]] += Complex64::new(c, 0.0);
            }
        }
        let vi = v
            .evaluate(xs[i])
            .map_err(|_| SpectralError::PoleOnGrid { x: xs[i] })?;
        m[[i, i]] += vi;
    }
    Ok(DiscreteHamiltonian {
        grid: *grid,
        matrix: m,
        stencil_order: stencil,
    })
}

extern "C" {
    fn zgeev_(
        jobvl: *const u8,
        jobvr: *const u8,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        w: *mut Complex64,
        vl: *mut Complex64,
        ldvl: *const i32,
        vr: *mut Complex64,
        ldvr: *const i32,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
}

/// All eigenvalues of a dense complex matrix, sorted by real part then
/// imaginary part.
pub fn eig_complex(matrix: &Array2<Complex64>) -> Result<Vec<Complex64>, SpectralError> {
    let n = matrix.nrows() as i32;
    assert_eq!(matrix.nrows(), matrix.ncols());
    // zgeev is column-major; eigenvalues of the transpose coincide, so the
    // row-major buffer can be handed over as-is
    let mut a: Vec<Complex64> = matrix.iter().cloned().collect();
    let mut w = vec![Complex64::new(0.0, 0.0); n as usize];
    let mut rwork = vec![0.0f64; (2 * n) as usize];
    let mut info = 0i32;
    let one = 1i32;
    // workspace query
    let mut query = [Complex64::new(0.0, 0.0)];
    let minus_one = -1i32;
    unsafe {
        zgeev_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &n,
            a.as_mut_ptr(),
            &n,
            w.as_mut_ptr(),
            std::ptr::null_mut(),
            &one,
            std::ptr::null_mut(),
            &one,
            query.as_mut_ptr(),
            &minus_one,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(SpectralError::NoConvergence { info });
    }
    let lwork = query[0].re as i32;
    let mut work = vec![Complex64::new(0.0, 0.0); lwork as usize];
    unsafe {
        zgeev_(
            b"N".as_ptr(),
            b"N".as_ptr(),
            &n,
            a.as_mut_ptr(),
            &n,
            w.as_mut_ptr(),
            std::ptr::null_mut(),
            &one,
            std::ptr::null_mut(),
            &one,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(SpectralError::NoConvergence { info });
    }
    w.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(w)
}

pub fn eigenvalues(h: &DiscreteHamiltonian) -> Result<Vec<Complex64>, SpectralError> {
    eig_complex(&h.matrix)
}

/// max over the grid of |conj(V(-x)) - V(x)|; zero for a PT-invariant
/// potential.
pub fn pt_residual(v: &Expression, grid: &Grid) -> Result<f64, SpectralError> {
    let mut worst = 0.0f64;
    for x in grid.xs() {
        let here = v.evaluate(x)?;
        let there = v.evaluate(-x)?;
        worst = worst.max((there.conj() - here).norm());
    }
    Ok(worst)
}

/// || P M P - M^dagger ||_max / || M ||_max with P the index-reversal
/// permutation; zero when the Hamiltonian is parity pseudo-Hermitian.
pub fn pseudo_hermiticity_residual(h: &DiscreteHamiltonian) -> f64 {
    let m = &h.matrix;
    let n = m.nrows();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let pmp = m[[n - 1 - i, n - 1 - j]];
            let adj = m[[j, i]].conj();
            worst = worst.max((pmp - adj).norm());
            scale = scale.max(m[[i, j]].norm());
        }
    }
    worst / scale
}

/// The PT pairing integral of f and g over the truncated box by composite
/// trapezoid: int [pt_reflect f](x) g(x) dx = int conj(f(-x)) g(x) dx.
pub fn pt_inner_product(
    f: &Expression,
    g: &Expression,
    grid: &Grid,
) -> Result<Complex64, SpectralError> {
    let xs = grid.xs();
    let h = grid.spacing();
    let mut vals = Vec::with_capacity(xs.len());
    let mut peak = 0.0f64;
    for &x in &xs {
        let v = f.evaluate(-x)?.conj() * g.evaluate(x)?;
        peak = peak.max(v.norm());
        vals.push(v);
    }
    let edge = vals[0].norm().max(vals[vals.len() - 1].norm());
    if peak > 0.0 && edge > 1e-10 * peak {
        return Err(SpectralError::BoundaryLeak { leak: edge / peak });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, v) in vals.iter().enumerate() {
        let weight = if i == 0 || i == vals.len() - 1 { 0.5 } else { 1.0 };
        acc += weight * v;
    }
    Ok(acc * h)
}

#[derive(Debug, Clone, Serialize)]
pub struct MatchedLevel {
    pub analytic: f64,
    pub numeric_re: f64,
    pub numeric_im: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MissingLevel {
    pub analytic: f64,
    pub nearest_distance: f64,
    /// True when some numeric eigenvalue sits within the separation floor of
    /// a level that should have been deleted.
    pub violated: bool,
}

/// Numeric spectrum matched against analytic levels, with deleted-level
/// detection.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub matched: Vec<MatchedLevel>,
    pub missing: Vec<MissingLevel>,
    pub tolerance: f64,
    pub separation_floor: f64,
    #[serde(skip)]
    pub numeric_eigenvalues: Vec<Complex64>,
}

impl SpectralReport {
    pub fn all_matched(&self, im_guard: f64) -> bool {
        self.matched
            .iter()
            .all(|m| m.gap <= self.tolerance && m.numeric_im.abs() <= im_guard)
    }

    pub fn no_violations(&self) -> bool {
        self.missing.iter().all(|m| !m.violated)
    }

    pub fn worst_gap(&self) -> f64 {
        self.matched.iter().map(|m| m.gap).fold(0.0, f64::max)
    }
}

/// Greedy nearest matching of analytic levels against numeric real parts;
/// any numeric eigenvalue within the separation floor (10x tolerance) of a
/// deleted level is flagged as a violation.
pub fn match_spectrum(
    numeric: &[Complex64],
    analytic_levels: &[f64],
    deleted_levels: &[f64],
    tol: f64,
) -> SpectralReport {
    let separation_floor = 10.0 * tol;
    let nearest = |level: f64| {
        numeric
            .iter()
            .min_by(|a, b| (a.re - level).abs().total_cmp(&(b.re - level).abs()))
            .copied()
    };
    let matched = analytic_levels
        .iter()
        .map(|&level| {
            let ev = nearest(level).expect("nonempty spectrum");
            MatchedLevel {
                analytic: level,
                numeric_re: ev.re,
                numeric_im: ev.im,
                gap: (ev.re - level).abs(),
            }
        })
        .collect();
    let missing = deleted_levels
        .iter()
        .map(|&level| {
            let d = nearest(level)
                .map(|ev| (ev.re - level).abs())
                .unwrap_or(f64::INFINITY);
            MissingLevel {
                analytic: level,
                nearest_distance: d,
                violated: d < separation_floor,
            }
        })
        .collect();
    SpectralReport {
        matched,
        missing,
        tolerance: tol,
        separation_floor,
        numeric_eigenvalues: numeric.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::OscillatorModel;

    #[test]
    fn grid_rejects_even_or_tiny_counts() {
        assert!(Grid::new(1.0, 4).is_err());
        assert!(Grid::new(1.0, 1).is_err());
        assert!(Grid::new(1.0, 5).is_ok());
    }

    #[test]
    fn grid_is_symmetric_with_zero() {
        let g = Grid::new(2.0, 5).unwrap();
        let xs = g.xs();
        assert_eq!(xs.len(), 5);
        assert_eq!(xs[2], 0.0);
        assert_eq!(xs[0], -2.0);
        assert_eq!(xs[4], 2.0);
    }

    #[test]
    fn diagonal_matrix_eigenvalues_are_diagonal() {
        let mut m = Array2::zeros((3, 3));
        m[[0, 0]] = Complex64::new(1.0, 0.5);
        m[[1, 1]] = Complex64::new(-2.0, 0.0);
        m[[2, 2]] = Complex64::new(3.0, -1.0);
        let ev = eig_complex(&m).unwrap();
        assert!((ev[0] - m[[1, 1]]).norm() < 1e-14);
        assert!((ev[1] - m[[0, 0]]).norm() < 1e-14);
        assert!((ev[2] - m[[2, 2]]).norm() < 1e-14);
    }

    #[test]
    fn antisymmetric_imaginary_matrix_eigenvalues() {
        // [[0, i], [i, 0]] has eigenvalues +/- i
        let mut m = Array2::zeros((2, 2));
        m[[0, 1]] = Complex64::new(0.0, 1.0);
        m[[1, 0]] = Complex64::new(0.0, 1.0);
        let ev = eig_complex(&m).unwrap();
        assert!(ev.iter().any(|z| (z - Complex64::new(0.0, 1.0)).norm() < 1e-14));
        assert!(ev.iter().any(|z| (z + Complex64::new(0.0, 1.0)).norm() < 1e-14));
    }

    #[test]
    fn free_particle_box_levels() {
        let scale = 3.0;
        let l = std::f64::consts::PI * scale;
        let grid = Grid::new(l, 401).unwrap();
        let v = Expression::constant(0.0);
        // the hard-wall box breaks the zero-ghost-point assumption of the
        // wide stencil, so the box check uses the three-point one
        let h = discretize(&v, &grid, StencilOrder::Two).unwrap();
        let ev = eigenvalues(&h).unwrap();
        // lowest levels of the box of width 2L are (k pi / 2L)^2
        for k in 1..=3 {
            let want = (k as f64 * std::f64::consts::PI / (2.0 * l)).powi(2);
            // leading discretization error of the three-point stencil is
            // k^4 h^2 / 12
            let budget = 2.0 * want.powi(2) * grid.spacing().powi(2) / 12.0 + 1e-9;
            assert!(
                (ev[k - 1].re - want).abs() < budget,
                "level {k}: {} vs {want}",
                ev[k - 1].re
            );
            assert!(ev[k - 1].im.abs() < 1e-10);
        }
    }

    #[test]
    fn hermitian_harmonic_oscillator_levels() {
        let grid = Grid::new(8.0, 401).unwrap();
        let v = Expression::power(Expression::x(), 2.0);
        let h = discretize(&v, &grid, StencilOrder::Four).unwrap();
        let ev = eigenvalues(&h).unwrap();
        for (n, want) in [1.0, 3.0, 5.0, 7.0, 9.0].iter().enumerate() {
            assert!(
                (ev[n].re - want).abs() < 1e-4,
                "level {n}: {} vs {want}",
                ev[n].re
            );
        }
    }

    #[test]
    fn diagonal_holds_exact_potential_samples() {
        let m = OscillatorModel::new(0.75, 1.0, 1).unwrap();
        let v = m.potential();
        let grid = Grid::new(4.0, 41).unwrap();
        let h = discretize(&v, &grid, StencilOrder::Two).unwrap();
        let xs = grid.interior_xs();
        let hh = grid.spacing();
        for (i, &x) in xs.iter().enumerate() {
            let kin = Complex64::new(2.0 / (hh * hh), 0.0);
            assert!((h.matrix[[i, i]] - kin - v.evaluate(x).unwrap()).norm() < 1e-13);
        }
    }

    #[test]
    fn pt_residual_flags_constructed_violation() {
        let m = OscillatorModel::new(0.75, 1.0, 1).unwrap();
        let grid = Grid::new(6.0, 201).unwrap();
        let v = m.potential();
        assert!(pt_residual(&v, &grid).unwrap() <= 1e-13);
        let broken = v + Expression::imag(1.0) * Expression::power(Expression::x(), 2.0);
        assert!(pt_residual(&broken, &grid).unwrap() > 1.0);
    }

    #[test]
    fn real_symmetric_matrix_is_pseudo_hermitian() {
        let grid = Grid::new(5.0, 101).unwrap();
        let v = Expression::power(Expression::x(), 2.0);
        let h = discretize(&v, &grid, StencilOrder::Four).unwrap();
        assert!(pseudo_hermiticity_residual(&h) <= 1e-13);
    }

    #[test]
    fn discretized_oscillator_is_pseudo_hermitian() {
        let m = OscillatorModel::new(0.75, 1.0, 1).unwrap();
        let grid = Grid::new(6.0, 201).unwrap();
        let h = discretize(&m.potential(), &grid, StencilOrder::Four).unwrap();
        assert!(pseudo_hermiticity_residual(&h) <= 1e-13);
    }

    #[test]
    fn parity_commutes_with_laplacian() {
        let grid = Grid::new(3.0, 41).unwrap();
        let h = discretize(&Expression::constant(0.0), &grid, StencilOrder::Four).unwrap();
        let n = h.dim();
        // P^2 = identity trivially for index reversal; [P, T] via entries
        for i in 0..n {
            for j in 0..n {
                let pt = h.matrix[[n - 1 - i, n - 1 - j]];
                assert_eq!(pt, h.matrix[[i, j]]);
            }
        }
    }

    #[test]
    fn pt_inner_product_of_antisymmetric_combination_vanishes() {
        let f = Expression::exp(
            Expression::constant(-1.0) * Expression::power(Expression::x(), 2.0),
        );
        let grid = Grid::new(8.0, 401).unwrap();
        let zero = f.clone() - f.clone();
        let v = pt_inner_product(&zero, &f, &grid).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
        let diag = pt_inner_product(&f, &f, &grid).unwrap();
        assert!(diag.norm() > 0.1);
    }

    #[test]
    fn oscillator_eigenstates_are_pt_orthogonal() {
        let m = OscillatorModel::new(0.75, 1.0, 1).unwrap();
        let grid = Grid::new(8.0, 1601).unwrap();
        let states: Vec<_> = (0..5).map(|n| m.eigenstate(n).wavefunction).collect();
        let diag: Vec<f64> = states
            .iter()
            .map(|f| pt_inner_product(f, f, &grid).unwrap().norm())
            .collect();
        for i in 0..5 {
            assert!(diag[i] > 0.0);
            for j in 0..5 {
                if i == j {
                    continue;
                }
                let off = pt_inner_product(&states[i], &states[j], &grid)
                    .unwrap()
                    .norm();
                let ratio = off / (diag[i] * diag[j]).sqrt();
                assert!(ratio <= 1e-6, "({i},{j}) ratio {ratio:.3e}");
            }
        }
    }

    #[test]
    fn boundary_leak_is_reported() {
        let f = Expression::constant(1.0);
        let grid = Grid::new(2.0, 21).unwrap();
        assert!(matches!(
            pt_inner_product(&f, &f, &grid),
            Err(SpectralError::BoundaryLeak { .. })
        ));
    }

    #[test]
    fn exact_spectrum_matches_with_zero_gap() {
        let numeric: Vec<Complex64> =
            [0.5, 4.5, 8.5].iter().map(|&r| Complex64::new(r, 0.0)).collect();
        let report = match_spectrum(&numeric, &[0.5, 4.5, 8.5], &[], 1e-3);
        assert!(report.all_matched(1e-12));
        assert_eq!(report.worst_gap(), 0.0);
        assert!(report.no_violations());
    }

    #[test]
    fn deleted_level_violation_is_flagged() {
        let numeric: Vec<Complex64> =
            [0.5, 4.5].iter().map(|&r| Complex64::new(r, 0.0)).collect();
        let report = match_spectrum(&numeric, &[0.5], &[4.5], 1e-3);
        assert!(!report.no_violations());
    }
}
