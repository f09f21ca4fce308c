//! Acceptance suite: one test per exit criterion, each printing a single
//! pass/fail line (visible with `--nocapture`). All runs are desk scale.

use num_complex::Complex64;
use ptdarboux::closed_form::{self, fitted_constant_error, pointwise_relative_error, probe_points};
use ptdarboux::darboux::{
    apply_chain, crum_potential, first_order_chain, transform_eigenstate, wronskian_expression,
    TransformationSet,
};
use ptdarboux::expr::Expression;
use ptdarboux::models::{OscillatorModel, ScarfModel, SolvableModel, Tower};
use ptdarboux::spectral::{
    discretize, eigenvalues, match_spectrum, pseudo_hermiticity_residual, pt_inner_product,
    pt_residual, Grid, StencilOrder,
};
use ptdarboux::susy::{
    chain_matrix, intertwining_residual, symbolic_algebra_residual, MotherPolynomial, TRIM_MARGIN,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SPECTRUM_TOL: f64 = 1e-3;
const IMAG_GUARD: f64 = 1e-4;
const DELETION_SEPARATION: f64 = 1.0;

fn oscillator() -> OscillatorModel {
    OscillatorModel::new(0.75, 1.0, 1).unwrap()
}

fn scarf() -> ScarfModel {
    ScarfModel::new(30.0, 5.0, Some(Tower::Plus)).unwrap()
}

fn osc_grid() -> Grid {
    Grid::new(8.0, 1601).unwrap()
}

fn scarf_grid() -> Grid {
    Grid::new(18.0, 1601).unwrap()
}

fn spectrum_of(v: &Expression, grid: &Grid) -> Vec<Complex64> {
    let h = discretize(v, grid, StencilOrder::Four).unwrap();
    eigenvalues(&h).unwrap()
}

fn min_distance(spectrum: &[Complex64], level: f64) -> f64 {
    spectrum
        .iter()
        .map(|z| (z.re - level).abs())
        .fold(f64::INFINITY, f64::min)
}

fn report(criterion: u32, pass: bool, detail: &str) {
    let tag = if pass { "pass" } else { "FAIL" };
    println!("criterion {criterion}: {tag} — {detail}");
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_1_oscillator_baseline_spectrum() {
    let start = std::time::Instant::now();
    let model = oscillator();
    let spectrum = spectrum_of(&model.potential(), &osc_grid());
    let analytic: Vec<f64> = (0..10).map(|n| model.energy(n)).collect();
    let rep = match_spectrum(&spectrum, &analytic, &[], SPECTRUM_TOL);
    let elapsed = start.elapsed().as_secs_f64();
    let pass = rep.all_matched(IMAG_GUARD) && elapsed <= 20.0;
    report(
        1,
        pass,
        &format!(
            "ten lowest oscillator levels match 4n+0.5, worst gap {:.2e}, {:.1}s",
            rep.worst_gap(),
            elapsed
        ),
    );
}

#[test]
fn criterion_2_level_deletion_1_2() {
    let model = SolvableModel::Oscillator(oscillator());
    let t = TransformationSet::new(model, vec![1, 2]).unwrap();
    let transformed = crum_potential(&t).unwrap();
    let spectrum = spectrum_of(&transformed.potential, &osc_grid());
    let rep = match_spectrum(&spectrum, &[0.5, 12.5, 16.5, 20.5], &[], SPECTRUM_TOL);
    let gap_1 = min_distance(&spectrum, 4.5);
    let gap_2 = min_distance(&spectrum, 8.5);
    let pass =
        rep.all_matched(IMAG_GUARD) && gap_1 >= DELETION_SEPARATION && gap_2 >= DELETION_SEPARATION;
    report(
        2,
        pass,
        &format!(
            "deleting levels 1,2 keeps {{0.5,12.5,16.5,20.5}} (worst gap {:.2e}) and clears 4.5/8.5 by {:.2}/{:.2}",
            rep.worst_gap(),
            gap_1,
            gap_2
        ),
    );
}

#[test]
fn criterion_3_level_deletion_0_2() {
    let model = SolvableModel::Oscillator(oscillator());
    let t = TransformationSet::new(model, vec![0, 2]).unwrap();
    let transformed = crum_potential(&t).unwrap();
    let spectrum = spectrum_of(&transformed.potential, &osc_grid());
    let ground_gap = min_distance(&spectrum, 4.5);
    let gap_0 = min_distance(&spectrum, 0.5);
    let gap_2 = min_distance(&spectrum, 8.5);
    let pass =
        ground_gap <= SPECTRUM_TOL && gap_0 >= DELETION_SEPARATION && gap_2 >= DELETION_SEPARATION;
    report(
        3,
        pass,
        &format!(
            "deleting levels 0,2 leaves ground level 4.5 (gap {:.2e}) and clears 0.5/8.5 by {:.2}/{:.2}",
            ground_gap, gap_0, gap_2
        ),
    );
}

#[test]
fn criterion_4_intermediate_spectra() {
    let mut worst = 0.0f64;
    let mut pass = true;
    for indices in [vec![1, 2], vec![0, 2]] {
        // the first chain step deletes its own seed level; the intermediate
        // spectrum is the source spectrum without it, i.e. e_n = E_(n+1)
        // above the seed index
        let deleted = indices[0];
        let model = SolvableModel::Oscillator(oscillator());
        let t = TransformationSet::new(model.clone(), indices).unwrap();
        let chain = first_order_chain(&t).unwrap();
        let v1 = &chain.intermediate_potentials()[0];
        let spectrum = spectrum_of(v1, &osc_grid());
        let analytic: Vec<f64> = (0..=6)
            .filter(|&n| n != deleted)
            .take(6)
            .map(|n| model.energy(n))
            .collect();
        let rep = match_spectrum(&spectrum, &analytic, &[model.energy(deleted)], SPECTRUM_TOL);
        worst = worst.max(rep.worst_gap());
        pass &= rep.all_matched(IMAG_GUARD) && rep.no_violations();
    }
    report(
        4,
        pass,
        &format!(
            "both oscillator intermediate potentials reproduce the source spectrum minus the seed level (e_n = E_(n+1) above it) for six levels, worst gap {:.2e}",
            worst
        ),
    );
}

#[test]
fn criterion_5_scarf_spectra() {
    let model = scarf();
    let grid = scarf_grid();
    let analytic: Vec<f64> = (0..5).map(|n| model.energy(n)).collect();
    let source_rep = match_spectrum(
        &spectrum_of(&model.potential(), &grid),
        &analytic,
        &[],
        SPECTRUM_TOL,
    );

    let t = TransformationSet::new(SolvableModel::Scarf(model.clone()), vec![0, 2]).unwrap();
    let transformed = crum_potential(&t).unwrap();
    let spectrum = spectrum_of(&transformed.potential, &grid);
    let retained: Vec<f64> = [1usize, 3, 4].iter().map(|&n| model.energy(n)).collect();
    let final_rep = match_spectrum(&spectrum, &retained, &[], SPECTRUM_TOL);
    let gap_0 = min_distance(&spectrum, model.energy(0));
    let gap_2 = min_distance(&spectrum, model.energy(2));
    let pass = source_rep.all_matched(IMAG_GUARD)
        && final_rep.all_matched(IMAG_GUARD)
        && gap_0 >= DELETION_SEPARATION
        && gap_2 >= DELETION_SEPARATION;
    report(
        5,
        pass,
        &format!(
            "Scarf II levels n=0..4 match (worst gap {:.2e}); transformed well retains E1,E3,E4 (worst gap {:.2e}) and clears E0/E2 by {:.2}/{:.2}",
            source_rep.worst_gap(),
            final_rep.worst_gap(),
            gap_0,
            gap_2
        ),
    );
}

#[test]
fn criterion_6_closed_form_regressions() {
    const TOL: f64 = 1e-9;
    let osc = oscillator();
    let sc = scarf();
    let osc_xs = probe_points(6.0, 241);
    let scarf_xs = probe_points(8.0, 241);
    let mut worst = 0.0f64;

    {
        let t = TransformationSet::new(SolvableModel::Oscillator(osc.clone()), vec![1, 2]).unwrap();
        let transformed = crum_potential(&t).unwrap();
        let chain = first_order_chain(&t).unwrap();
        let w = wronskian_expression(&t.functions);
        worst = worst.max(
            fitted_constant_error(&w, &closed_form::oscillator_wronskian_12(&osc), &osc_xs)
                .unwrap(),
        );
        worst = worst.max(
            pointwise_relative_error(
                &transformed.potential,
                &closed_form::oscillator_potential_12(&osc),
                &osc_xs,
            )
            .unwrap(),
        );
        worst = worst.max(
            pointwise_relative_error(
                &chain.intermediate_potentials()[0],
                &closed_form::oscillator_intermediate_12(&osc),
                &osc_xs,
            )
            .unwrap(),
        );
    }
    {
        let t = TransformationSet::new(SolvableModel::Oscillator(osc.clone()), vec![0, 2]).unwrap();
        let transformed = crum_potential(&t).unwrap();
        let chain = first_order_chain(&t).unwrap();
        let w = wronskian_expression(&t.functions);
        worst = worst.max(
            fitted_constant_error(&w, &closed_form::oscillator_wronskian_02(&osc), &osc_xs)
                .unwrap(),
        );
        worst = worst.max(
            pointwise_relative_error(
                &transformed.potential,
                &closed_form::oscillator_potential_02(&osc),
                &osc_xs,
            )
            .unwrap(),
        );
        worst = worst.max(
            pointwise_relative_error(
                &chain.intermediate_potentials()[0],
                &closed_form::oscillator_intermediate_02(&osc),
                &osc_xs,
            )
            .unwrap(),
        );
    }
    {
        let t = TransformationSet::new(SolvableModel::Scarf(sc.clone()), vec![0, 2]).unwrap();
        let transformed = crum_potential(&t).unwrap();
        let chain = first_order_chain(&t).unwrap();
        let w = wronskian_expression(&t.functions);
        worst = worst.max(
            fitted_constant_error(&w, &closed_form::scarf_wronskian_02(&sc), &scarf_xs).unwrap(),
        );
        worst = worst.max(
            pointwise_relative_error(
                &transformed.potential,
                &closed_form::scarf_potential_02(&sc),
                &scarf_xs,
            )
            .unwrap(),
        );
        worst = worst.max(
            pointwise_relative_error(
                &chain.intermediate_potentials()[0],
                &closed_form::scarf_intermediate_02(&sc),
                &scarf_xs,
            )
            .unwrap(),
        );
    }
    report(
        6,
        worst <= TOL,
        &format!(
            "all transformed potentials, intermediates and Wronskians match their closed forms, worst relative error {:.2e}",
            worst
        ),
    );
}

#[test]
fn criterion_7_pseudo_susy_algebra() {
    const OPERATOR_TOL: f64 = 1e-5;
    const COEFFICIENT_TOL: f64 = 1e-12;
    let mut worst_intertwining = 0.0f64;
    let mut worst_algebra = 0.0f64;
    let mut pass = true;

    // the entrywise commutator residual carries an O(h^3) discretization
    // floor, so each case gets a grid fine enough to clear the tolerance
    let cases: Vec<(SolvableModel, Vec<usize>, Grid, f64, Vec<usize>)> = vec![
        (
            SolvableModel::Oscillator(oscillator()),
            vec![1, 2],
            Grid::new(8.0, 2001).unwrap(),
            6.0,
            vec![0, 3],
        ),
        (
            SolvableModel::Oscillator(oscillator()),
            vec![0, 2],
            Grid::new(8.0, 2001).unwrap(),
            6.0,
            vec![1, 3],
        ),
        (
            SolvableModel::Scarf(scarf()),
            vec![0, 2],
            Grid::new(4.0, 3201).unwrap(),
            8.0,
            vec![1, 3],
        ),
    ];
    for (model, indices, grid, probe_half_width, survivors) in cases {
        let t = TransformationSet::new(model.clone(), indices).unwrap();
        let transformed = crum_potential(&t).unwrap();
        let chain = first_order_chain(&t).unwrap();
        let a = chain_matrix(&chain, &grid, StencilOrder::Four).unwrap();
        let h0 = discretize(&model.potential(), &grid, StencilOrder::Four).unwrap();
        let hn = discretize(&transformed.potential, &grid, StencilOrder::Four).unwrap();
        let r = intertwining_residual(&a, &h0, &hn, TRIM_MARGIN);
        worst_intertwining = worst_intertwining.max(r);
        pass &= r <= OPERATOR_TOL;
        let probe_xs = probe_points(probe_half_width, 241);
        for n in survivors {
            let check = symbolic_algebra_residual(&t, n, &probe_xs).unwrap();
            worst_algebra = worst_algebra.max(check.residual);
            pass &= check.residual <= OPERATOR_TOL;
        }
    }

    // coefficient identities of the anticommutator polynomial over random
    // oscillator strengths: P(t) = (t - E_i)(t - E_j) with E_n = 4n + 2 - 2qa
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_coeff = 0.0f64;
    for _ in 0..20 {
        let alpha: f64 = rng.gen_range(0.05..0.95);
        let q = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let qa = q * alpha;
        let e = |n: f64| 4.0 * n + 2.0 - 2.0 * qa;
        for (i, j, c1, c0) in [
            (1.0, 2.0, -4.0 * (4.0 - qa), (6.0 - 2.0 * qa) * (10.0 - 2.0 * qa)),
            (0.0, 2.0, -4.0 * (3.0 - qa), (2.0 - 2.0 * qa) * (10.0 - 2.0 * qa)),
        ] {
            let p = MotherPolynomial::from_roots(&[e(i), e(j)]);
            worst_coeff = worst_coeff
                .max((p.coefficients[0] - 1.0).abs())
                .max((p.coefficients[1] - c1).abs())
                .max((p.coefficients[2] - c0).abs());
        }
    }
    pass &= worst_coeff <= COEFFICIENT_TOL;

    // the published Scarf mother polynomial uses roots (p+q), (p+q-2)
    // instead of the deleted energies; record the mismatch informationally
    let sc = scarf();
    let pq = sc.p + sc.q;
    let published = MotherPolynomial::from_roots(&[pq, pq - 2.0]);
    let derived = MotherPolynomial::from_roots(&[sc.energy(0), sc.energy(2)]);
    let deviation = published
        .coefficients
        .iter()
        .zip(derived.coefficients.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!(
        "criterion 7 (informational): published Scarf mother-polynomial roots deviate from the deleted energies by {:.2e} in coefficients",
        deviation
    );

    report(
        7,
        pass,
        &format!(
            "intertwining residual {:.2e}, algebra residual {:.2e} (tol 1e-5); coefficient identities hold to {:.2e} over 20 random strengths",
            worst_intertwining, worst_algebra, worst_coeff
        ),
    );
}

#[test]
fn criterion_8_symmetry_suite() {
    const SYMMETRY_TOL: f64 = 1e-12;
    const ORTHOGONALITY_TOL: f64 = 1e-6;
    let mut worst_pt = 0.0f64;
    let mut worst_ph = 0.0f64;

    let cases: Vec<(SolvableModel, Vec<usize>, Grid)> = vec![
        (
            SolvableModel::Oscillator(oscillator()),
            vec![1, 2],
            Grid::new(8.0, 801).unwrap(),
        ),
        (
            SolvableModel::Oscillator(oscillator()),
            vec![0, 2],
            Grid::new(8.0, 801).unwrap(),
        ),
        (
            SolvableModel::Scarf(scarf()),
            vec![0, 2],
            Grid::new(18.0, 801).unwrap(),
        ),
    ];
    for (model, indices, grid) in cases {
        let t = TransformationSet::new(model.clone(), indices).unwrap();
        let transformed = crum_potential(&t).unwrap();
        let chain = first_order_chain(&t).unwrap();
        let mut potentials = vec![model.potential()];
        potentials.extend(chain.intermediate_potentials());
        potentials.push(transformed.potential.clone());
        for v in &potentials {
            // normalize the PT residual by the potential's scale on the grid
            let scale = grid
                .xs()
                .iter()
                .map(|&x| v.evaluate(x).unwrap().norm())
                .fold(0.0, f64::max);
            worst_pt = worst_pt.max(pt_residual(v, &grid).unwrap() / scale);
            let h = discretize(v, &grid, StencilOrder::Four).unwrap();
            worst_ph = worst_ph.max(pseudo_hermiticity_residual(&h));
        }
    }

    // PT pairing of distinct oscillator eigenstates vanishes
    let osc = oscillator();
    let grid = osc_grid();
    let states: Vec<Expression> = (0..=4).map(|n| osc.eigenstate(n).wavefunction).collect();
    let norms: Vec<f64> = states
        .iter()
        .map(|s| pt_inner_product(s, s, &grid).unwrap().norm())
        .collect();
    let mut worst_ratio = 0.0f64;
    for m in 0..=4usize {
        for n in 0..m {
            let cross = pt_inner_product(&states[m], &states[n], &grid).unwrap().norm();
            worst_ratio = worst_ratio.max(cross / (norms[m] * norms[n]).sqrt());
        }
    }

    let pass = worst_pt <= SYMMETRY_TOL
        && worst_ph <= SYMMETRY_TOL
        && worst_ratio <= ORTHOGONALITY_TOL;
    report(
        8,
        pass,
        &format!(
            "PT residual {:.2e}, parity pseudo-Hermiticity {:.2e} (tol 1e-12); PT-orthogonality ratio {:.2e} (tol 1e-6)",
            worst_pt, worst_ph, worst_ratio
        ),
    );
}

/// Random expression of bounded depth built from the grammar the library
/// supports, excluding quotients so every draw is pole-free.
fn random_expression(rng: &mut ChaCha8Rng, depth: usize) -> Expression {
    if depth == 0 || rng.gen_range(0..5) == 0 {
        return if rng.gen::<bool>() {
            Expression::x()
        } else {
            Expression::constant(Complex64::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-1.0..1.0),
            ))
        };
    }
    match rng.gen_range(0..6) {
        0 => random_expression(rng, depth - 1) + random_expression(rng, depth - 1),
        1 => random_expression(rng, depth - 1) * random_expression(rng, depth - 1),
        2 => Expression::exp(
            Expression::constant(rng.gen_range(-1.0..1.0)) * Expression::x()
                + Expression::constant(rng.gen_range(-1.0..1.0)),
        ),
        3 => Expression::sinh(Expression::constant(rng.gen_range(-1.0..1.0)) * Expression::x()),
        4 => Expression::cosh(Expression::constant(rng.gen_range(-1.0..1.0)) * Expression::x()),
        _ => Expression::power(
            random_expression(rng, depth - 1),
            Complex64::new(rng.gen_range(2..4) as f64, 0.0),
        ),
    }
}

#[test]
fn criterion_9_property_suite() {
    let mut pass = true;

    // 1: symbolic derivative vs central finite differences on 200 random
    // expressions; halving the step must shrink the error at order >= 2
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut checked = 0;
    let mut worst_order = f64::INFINITY;
    while checked < 200 {
        let f = random_expression(&mut rng, 4);
        let x0: f64 = rng.gen_range(-1.0..1.0);
        let d = f.differentiate();
        let Ok(exact) = d.evaluate(x0) else { continue };
        let scale = 1.0 + exact.norm();
        if !exact.is_finite() || scale > 1e8 {
            continue;
        }
        let fd = |h: f64| (f.evaluate(x0 + h).unwrap() - f.evaluate(x0 - h).unwrap()) / (2.0 * h);
        let e1 = (fd(1e-2) - exact).norm();
        let e2 = (fd(5e-3) - exact).norm();
        checked += 1;
        // flat third derivative: both errors at rounding level, counts as
        // passing without a measurable order
        if e1 < 1e-10 * scale {
            continue;
        }
        let order = (e1 / e2).log2();
        worst_order = worst_order.min(order);
        pass &= order >= 1.6;
    }

    // 2: Wronskian antisymmetry and chain annihilation of its own seeds
    let osc = SolvableModel::Oscillator(oscillator());
    let t = TransformationSet::new(osc.clone(), vec![1, 2]).unwrap();
    let xs = probe_points(3.0, 101);
    let w12 = wronskian_expression(&t.functions);
    let swapped = vec![t.functions[1].clone(), t.functions[0].clone()];
    let w21 = wronskian_expression(&swapped);
    let mut worst_antisym = 0.0f64;
    let mut wscale = 0.0f64;
    for &x in &xs {
        let a = w12.evaluate(x).unwrap();
        let b = w21.evaluate(x).unwrap();
        worst_antisym = worst_antisym.max((a + b).norm());
        wscale = wscale.max(a.norm());
    }
    worst_antisym /= wscale;
    pass &= worst_antisym <= 1e-10;

    let chain = first_order_chain(&t).unwrap();
    let reference = apply_chain(&chain, &osc.eigenstate(0).unwrap().wavefunction);
    let ref_scale = xs
        .iter()
        .map(|&x| reference.evaluate(x).unwrap().norm())
        .fold(0.0, f64::max);
    let mut worst_annihilation = 0.0f64;
    for seed in &t.functions {
        let image = apply_chain(&chain, seed);
        for &x in &xs {
            worst_annihilation =
                worst_annihilation.max(image.evaluate(x).unwrap().norm() / ref_scale);
        }
    }
    pass &= worst_annihilation <= 1e-10;

    // 3: the first-order chain and the Wronskian-ratio construction agree
    // pointwise, for both the potential and a transformed eigenstate
    let transformed = crum_potential(&t).unwrap();
    let chain_vs_crum_v =
        pointwise_relative_error(&chain.final_potential(), &transformed.potential, &xs).unwrap();
    let psi3_chain = apply_chain(&chain, &osc.eigenstate(3).unwrap().wavefunction);
    let psi3_crum = transform_eigenstate(&t, 3).unwrap();
    let chain_vs_crum_psi = pointwise_relative_error(&psi3_chain, &psi3_crum, &xs).unwrap();
    pass &= chain_vs_crum_v <= 1e-9 && chain_vs_crum_psi <= 1e-9;

    // 4: discretization eigenvalue error decays at (at least) the stencil
    // order under two grid refinements, measured on the oscillator ground
    // level with a deliberately coarse base grid
    let model = oscillator();
    let mut worst_slope = f64::INFINITY;
    for stencil in [StencilOrder::Two, StencilOrder::Four] {
        let mut errors = Vec::new();
        let mut grid = Grid::new(8.0, 101).unwrap();
        for _ in 0..3 {
            let h = discretize(&model.potential(), &grid, stencil).unwrap();
            let ev = eigenvalues(&h).unwrap();
            errors.push(min_distance(&ev, model.energy(0)).max(1e-15));
            grid = grid.refine();
        }
        for w in errors.windows(2) {
            let slope = (w[0] / w[1]).log2();
            worst_slope = worst_slope.min(slope - stencil.order() as f64);
        }
    }
    pass &= worst_slope >= -0.2;

    report(
        9,
        pass,
        &format!(
            "derivative order >= 2 on 200 random expressions (worst {:.2}); Wronskian antisymmetry {:.2e} and seed annihilation {:.2e}; chain-vs-Wronskian agreement {:.2e}/{:.2e}; discretization convergence slack {:.2}",
            worst_order,
            worst_antisym,
            worst_annihilation,
            chain_vs_crum_v,
            chain_vs_crum_psi,
            worst_slope
        ),
    );
}
