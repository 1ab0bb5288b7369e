//! Chapman-Kolmogorov composition of the short-time kernel against a
//! Crank-Nicolson Fokker-Planck reference.

use shorttime::evolution::{compose_chapman, density_distance, solve_fokker_planck, CompositionPlan, Metric};
use shorttime::kernels::{GridSpec, KernelKind};
use shorttime::{validate_assumption, DriftExpr, Interval, LampertiMap};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let drift = DriftExpr::parse("2 + cos(x)")?;
    let report = validate_assumption(&drift, Interval::new(-30.0, 30.0), 0.5, 6001)?;
    let m = LampertiMap::validated(drift, &report)?;
    let (total, xp) = (1.0, 0.0);
    let grid = GridSpec::padded(xp, total, report.f_min, report.f_max, 2001)?;
    let oracle = solve_fokker_planck(&m, total, xp, &grid, 2000)?;

    println!("{:>4} {:>16} {:>12} {:>12}", "N", "kind", "L1 to FP", "mass − 1");
    for kind in [KernelKind::Girsanov, KernelKind::EulerMaruyama, KernelKind::BackwardEuler] {
        for n in [4, 8, 16, 32] {
            let plan = CompositionPlan { total_time: total, n_slices: n, grid, kind };
            let d = compose_chapman(&m, &plan, xp)?;
            let l1 = density_distance(&d, &oracle, Metric::L1)?;
            println!("{n:>4} {:>16} {l1:>12.4e} {:>12.3e}", kind.name(), d.mass_defect());
        }
    }
    Ok(())
}
