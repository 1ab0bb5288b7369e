//! Parse a drift, look at its jets, and scan it for the boundedness and
//! positivity conditions.
//!
//! cargo run --example drift_validation -- "2 + cos(x)" 0.5

use shorttime::{validate_assumption, DriftExpr, Interval};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let source = args.next().unwrap_or_else(|| "2 + cos(x)".into());
    let epsilon: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0.5);

    let drift = DriftExpr::parse(&source)?;
    println!("parsed:    {}", drift.canonical());

    println!("{:>6} {:>12} {:>12} {:>12}", "x", "f", "f'", "f''");
    for i in 0..=8 {
        let x = -2.0 + 0.5 * i as f64;
        let e = drift.eval(x)?;
        println!("{x:>6.2} {:>12.6} {:>12.6} {:>12.6}", e.f, e.f1, e.f2);
    }

    let report = validate_assumption(&drift, Interval::new(-30.0, 30.0), epsilon, 6001)?;
    println!("\n{}", serde_json::to_string_pretty(&report)?);
    if !report.passed {
        println!("f dips to {:.4} ≤ ε = {epsilon}; downstream use needs the override", report.f_min);
    }
    Ok(())
}
