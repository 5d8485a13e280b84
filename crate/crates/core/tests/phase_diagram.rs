use approx::assert_abs_diff_eq;
use urnlab::phase::{
    boundary_curves, grid_crossings, linspace_step, overlay_empirical, sweep_cyclic,
    sweep_symmetric, CellLabel, CurveId,
};
use urnlab::stationary::{beta1, SymmetricPhase};
use urnlab::Stability;

#[test]
fn full_symmetric_grid_is_labelled() {
    let a = linspace_step(0.05, 0.95, 0.05).unwrap();
    let b = linspace_step(1.0, 6.0, 0.25).unwrap();
    let grid = sweep_symmetric(&a, &b).unwrap();
    assert_eq!(grid.cells.len(), a.len() * b.len());
    for (i, ai) in a.iter().enumerate() {
        // Phases are ordered in beta along every row.
        let order: Vec<u8> = (0..b.len())
            .map(|j| match grid.cell(i, j).label {
                CellLabel::Symmetric(SymmetricPhase::SymmetricOnly) => 0,
                CellLabel::Symmetric(SymmetricPhase::Coexistence) => 1,
                CellLabel::Symmetric(SymmetricPhase::AsymmetricOnly) => 2,
                other => panic!("a = {ai}: {other:?}"),
            })
            .collect();
        assert!(order.windows(2).all(|w| w[0] <= w[1]), "a = {ai}: {order:?}");
    }
}

#[test]
fn beta_two_row_transitions() {
    let a = linspace_step(0.2, 0.32, 0.005).unwrap();
    let grid = sweep_symmetric(&a, &[2.0]).unwrap();
    let xs = grid_crossings(&grid).unwrap();
    assert_eq!(xs.len(), 2, "{xs:?}");
    assert_abs_diff_eq!(xs[0].a, 0.25, epsilon = 1e-4);
    assert_abs_diff_eq!(xs[1].a, (8f64.sqrt() - 1.0) / 7.0, epsilon = 1e-4);
    assert_eq!(xs[0].from, "asymmetric-only");
    assert_eq!(xs[0].to, "coexistence");
    assert_eq!(xs[1].to, "symmetric-only");
}

#[test]
fn curves_through_published_points() {
    let a = [0.1, 0.261203, 0.4160306, 0.6, 0.9, 0.99];
    let pts = boundary_curves(&a).unwrap();
    let lower: Vec<_> = pts.iter().filter(|p| p.curve == CurveId::Beta1).collect();
    let upper: Vec<_> = pts.iter().filter(|p| p.curve == CurveId::CenterInstability).collect();
    assert_eq!(lower.len(), a.len());
    assert_abs_diff_eq!(lower[1].beta, 2.0, epsilon = 1e-3);
    assert_abs_diff_eq!(lower[2].beta, 3.0, epsilon = 1e-2);
    for (l, u) in lower.iter().zip(&upper) {
        assert!(1.0 < l.beta && l.beta < u.beta, "{l:?} {u:?}");
    }
    assert!(lower.windows(2).all(|w| w[0].beta < w[1].beta));
    assert!(lower.last().unwrap().beta > 50.0, "{:?}", lower.last());
    assert!(beta1(0.999).unwrap() > beta1(0.99).unwrap());
}

#[test]
fn cyclic_columns() {
    let b = linspace_step(1.0, 8.0, 0.5).unwrap();
    let grid = sweep_cyclic(&[1.0, 2.0, 3.0], &b, false).unwrap();
    for (j, beta) in b.iter().enumerate() {
        let unit = grid.cell(0, j);
        let expected = if *beta < 4.0 {
            Stability::LinearlyStable
        } else if *beta > 4.0 {
            Stability::LinearlyUnstable
        } else {
            Stability::Marginal
        };
        assert_eq!(unit.label, CellLabel::Cyclic(expected), "beta = {beta}");
        assert_eq!(grid.cell(1, j).label, CellLabel::Cyclic(Stability::LinearlyStable));
        assert_eq!(grid.cell(2, j).label, CellLabel::Cyclic(Stability::LinearlyStable));
    }
    // Every crossing lies on beta = 2(1 + a)/(2 - a).
    let xs = grid_crossings(&grid).unwrap();
    assert!(!xs.is_empty());
    for c in &xs {
        let a_on_curve = (2.0 * c.beta - 2.0) / (c.beta + 2.0);
        assert!((c.a - a_on_curve).abs() < 1e-4, "{c:?}");
    }
}

#[test]
fn cyclic_extra_stable_points_end_near_quarter() {
    let a = linspace_step(0.2, 0.3, 0.02).unwrap();
    let grid = sweep_cyclic(&a, &[2.0], true).unwrap();
    let flags: Vec<bool> = grid.cells.iter().map(|c| c.extra_stable.unwrap()).collect();
    assert_eq!(flags, [true, true, true, false, false, false]);
    let xs = grid_crossings(&grid).unwrap();
    assert_eq!(xs.len(), 1);
    println!("extra stable points end at a = {:.5}", xs[0].a);
    assert!((xs[0].a - 0.25057).abs() < 0.01);
}

#[test]
fn ensembles_match_labels() {
    let mut grid = sweep_symmetric(&[0.2, 0.26, 0.5], &[2.0]).unwrap();
    overlay_empirical(&mut grid, &[(0, 0), (1, 0), (2, 0)], 20, 100_000, 7).unwrap();
    for c in &grid.cells {
        let e = c.empirical.as_ref().unwrap();
        println!("a = {}: {} {e:?}", c.a, c.label.label());
        assert_eq!(e.unstable_hits, 0);
    }
    assert!(grid.cell(0, 0).empirical.as_ref().unwrap().consistent);
    assert!(grid.cell(2, 0).empirical.as_ref().unwrap().consistent);
    // Coexistence at a = 0.26 needs both kinds of limit; the centre
    // attracts at rate n^-0.026 there, so within 10^5 draws runs rarely sit
    // inside the point tolerance. Only the absence of wrong limits is
    // asserted here.
    let mid = grid.cell(1, 0).empirical.as_ref().unwrap();
    assert_eq!(mid.cycling, 0);
}

#[test]
fn invalid_grids() {
    assert!(sweep_symmetric(&[0.3, 0.3], &[2.0]).is_err());
    assert!(sweep_cyclic(&[0.3], &[0.0, 1.0], false).is_err());
    assert!(boundary_curves(&[1.2]).is_err());
}
