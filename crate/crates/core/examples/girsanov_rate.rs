//! ‖M_T − 𝓜_T‖_p across a ladder of horizons, with the fitted log-log slope.
//!
//! cargo run --release --example girsanov_rate -- [n_paths] [alpha]

use shorttime::girsanov::{default_n_steps, lp_errors, rate_fit, McConfig};
use shorttime::{validate_assumption, DriftExpr, Interval, LampertiMap};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n_paths: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(20_000);
    let alpha: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1.0);

    let drift = DriftExpr::parse("2 + cos(x)")?;
    let report = validate_assumption(&drift, Interval::new(-30.0, 30.0), 0.5, 6001)?;
    let m = LampertiMap::validated(drift, &report)?.with_alpha(alpha);

    let ps = [1.0, 2.0];
    let horizons = [0.2, 0.1, 0.05, 0.025, 0.0125];
    let mut table = vec![Vec::new(); ps.len()];
    println!("α = {alpha}, {n_paths} paths");
    println!("{:>8} {:>6} {:>12} {:>10}", "T", "p", "error", "std err");
    for &t in &horizons {
        let cfg = McConfig { n_paths, n_steps: default_n_steps(t).min(4096), base_seed: 1, p: 1.0 };
        for (j, e) in lp_errors(&m, t, &cfg, &ps)?.into_iter().enumerate() {
            println!("{t:>8} {:>6} {:>12.4e} {:>10.2e}", ps[j], e.mean, e.std_error);
            table[j].push((t, e));
        }
    }
    for (j, rows) in table.iter().enumerate() {
        let fit = rate_fit(rows)?;
        println!("p = {}: slope {:.3}, r² {:.4}", ps[j], fit.slope, fit.r_squared);
    }
    Ok(())
}
