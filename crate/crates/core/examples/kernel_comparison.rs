//! The four short-time kernels side by side, with their mass defects.

use shorttime::kernels::{kernel_eval, normalization_defect, GridSpec, KernelKind};
use shorttime::{validate_assumption, DriftExpr, Interval, LampertiMap};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let drift = DriftExpr::parse("2 + cos(x)")?;
    let report = validate_assumption(&drift, Interval::new(-30.0, 30.0), 0.5, 6001)?;
    let m = LampertiMap::validated(drift, &report)?;
    let (t, xp) = (0.2, 0.0);

    print!("{:>8}", "x");
    for k in KernelKind::ALL {
        print!(" {:>15}", k.name());
    }
    println!();
    for i in 0..=12 {
        let x = -0.6 + 0.15 * i as f64;
        print!("{x:>8.3}");
        for k in KernelKind::ALL {
            print!(" {:>15.10}", kernel_eval(k, &m, t, x, xp)?);
        }
        println!();
    }

    println!("\nmass defect ∫p dx − 1 at x′ = {xp}:");
    for &t in &[0.01, 0.1, 0.5] {
        let grid = GridSpec::padded(xp, t, report.f_min, report.f_max, 401)?;
        let d: Vec<String> = KernelKind::ALL
            .iter()
            .map(|&k| Ok(format!("{}={:+.3e}", k.name(), normalization_defect(k, &m, t, xp, &grid)?)))
            .collect::<Result<_, shorttime::kernels::KernelError>>()?;
        println!("T = {t:<5} {}", d.join("  "));
    }
    Ok(())
}
