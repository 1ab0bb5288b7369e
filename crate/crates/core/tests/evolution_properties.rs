mod common;

use common::{constant_map, cos_map};
use shorttime::evolution::{
    compose_chapman, density_distance, liouville_density, solve_fokker_planck, tabulate, CompositionPlan, GridDensity,
    Metric,
};
use shorttime::kernels::{gaussian, kernel_eval, GridSpec, KernelKind};
use shorttime::quadrature::integrate_pure;

#[test]
fn liouville_mass_is_preserved() {
    let m = cos_map();
    let (horizon, xp) = (0.3, 0.2);
    for &t in &[0.0, horizon / 2.0, horizon] {
        let mass = integrate_pure(|x| liouville_density(&m, t, horizon, x, xp).unwrap(), -6.0, 8.0, 1e-11).unwrap();
        assert!((mass - 1.0).abs() < 1e-9, "t = {t}: {mass}");
    }
}

#[test]
fn liouville_at_horizon_is_the_girsanov_kernel_on_a_grid() {
    let m = cos_map().with_alpha(0.5);
    let grid = GridSpec::padded(0.5, 0.2, 1.0, 3.0, 301).unwrap();
    for x in grid.points() {
        let a = liouville_density(&m, 0.2, 0.2, x, 0.5).unwrap();
        let b = kernel_eval(KernelKind::Girsanov, &m, 0.2, x, 0.5).unwrap();
        assert!((a - b).abs() <= 1e-12, "{x}: {a} vs {b}");
    }
}

#[test]
fn constant_drift_composition_is_exact() {
    let c = 1.2;
    let m = constant_map(c);
    let grid = GridSpec::padded(0.0, 1.0, c, c, 2001).unwrap();
    let exact = tabulate(&grid, 1.0, |x| gaussian(x - c, 1.0));
    for n in [1, 3, 8] {
        let plan = CompositionPlan { total_time: 1.0, n_slices: n, grid, kind: KernelKind::Girsanov };
        let d = compose_chapman(&m, &plan, 0.0).unwrap();
        let err = density_distance(&d, &exact, Metric::Sup).unwrap();
        assert!(err <= 1e-6, "N = {n}: {err:e}");
    }
}

#[test]
fn composition_is_cauchy_in_slices() {
    let m = cos_map();
    let grid = GridSpec::padded(0.0, 1.0, 1.0, 3.0, 801).unwrap();
    let run = |n| {
        let plan = CompositionPlan { total_time: 1.0, n_slices: n, grid, kind: KernelKind::Girsanov };
        compose_chapman(&m, &plan, 0.0).unwrap()
    };
    let ds: Vec<GridDensity> = [2, 4, 8, 16].into_iter().map(run).collect();
    let gaps: Vec<f64> = ds.windows(2).map(|w| density_distance(&w[0], &w[1], Metric::L1).unwrap()).collect();
    assert!(gaps.windows(2).all(|g| g[1] < g[0]), "{gaps:?}");
    for d in &ds {
        assert!((d.mass() - 1.0).abs() < 1e-8, "{}", d.mass());
    }
}

#[test]
fn backward_euler_composition_defect_is_reported() {
    let m = cos_map();
    let grid = GridSpec::padded(0.0, 1.0, 1.0, 3.0, 801).unwrap();
    let defect = |n| {
        let plan = CompositionPlan { total_time: 1.0, n_slices: n, grid, kind: KernelKind::BackwardEuler };
        compose_chapman(&m, &plan, 0.0).unwrap().mass_defect()
    };
    let (a, b) = (defect(1), defect(4));
    assert!(a.abs() > 1e-6 && b.abs() > 1e-6, "{a} {b}");
}

fn restrict(fine: &GridDensity, coarse: &GridSpec) -> GridDensity {
    let stride = (fine.grid.n_points - 1) / (coarse.n_points - 1);
    GridDensity { grid: *coarse, values: fine.values.iter().step_by(stride).copied().collect(), time: fine.time }
}

#[test]
fn fokker_planck_self_converges_at_second_order() {
    let m = cos_map();
    let (t, xp) = (0.5, 0.0);
    let base = GridSpec::padded(xp, t, 1.0, 3.0, 401).unwrap();
    let refine = |k: usize| GridSpec::new(base.x_min, base.x_max, (base.n_points - 1) * k + 1).unwrap();
    let solve = |k: usize| solve_fokker_planck(&m, t, xp, &refine(k), 200 * k).unwrap();
    let (p1, p2, p4) = (solve(1), solve(2), solve(4));
    let d1 = density_distance(&p1, &restrict(&p2, &base), Metric::L1).unwrap();
    let d2 = density_distance(&restrict(&p2, &base), &restrict(&p4, &base), Metric::L1).unwrap();
    assert!(d1 / d2 >= 3.0, "changes {d1:e} then {d2:e}");
}
