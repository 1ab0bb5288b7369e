//! Crank-Nicolson Fokker-Planck solutions against closed forms: the heat
//! kernel, constant advection and the f(x) = x (Ornstein-Uhlenbeck type) law.

use shorttime::evolution::{density_distance, solve_fokker_planck, tabulate, Metric};
use shorttime::kernels::{gaussian, GridSpec};
use shorttime::{Admission, DriftExpr, LampertiMap};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let t = 0.5;
    let cases: [(&str, f64, Box<dyn Fn(f64) -> f64>); 3] = [
        ("0", 0.0, Box::new(move |x| gaussian(x, t))),
        ("2", 0.0, Box::new(move |x| gaussian(x - 2.0 * t, t))),
        ("x", 0.5, Box::new(move |x| gaussian(x - 0.5 * t.exp(), ((2.0 * t).exp() - 1.0) / 2.0))),
    ];
    for (src, xp, exact) in cases {
        let m = LampertiMap::new(DriftExpr::parse(src)?, Admission::Override);
        let grid = GridSpec::new(-6.0, 7.0, 2001)?;
        let d = solve_fokker_planck(&m, t, xp, &grid, 1000)?;
        let e = tabulate(&grid, t, |x| exact(x));
        println!(
            "f = {src:<2} x′ = {xp}: sup {:.2e}, L1 {:.2e}, mass − 1 = {:+.1e}",
            density_distance(&d, &e, Metric::Sup)?,
            density_distance(&d, &e, Metric::L1)?,
            d.mass_defect()
        );
    }
    Ok(())
}
