//! The flow of ẋ = f(x) through the Lamperti map, checked against the
//! closed form for f(x) = x and against the group law for 2 + cos(x).

use shorttime::{validate_assumption, Admission, DriftExpr, Interval, LampertiMap};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let drift = DriftExpr::parse("2 + cos(x)")?;
    let report = validate_assumption(&drift, Interval::new(-30.0, 30.0), 0.5, 6001)?;
    let m = LampertiMap::validated(drift, &report)?;

    println!("f = 2 + cos(x)");
    println!("{:>6} {:>10} {:>14} {:>14} {:>12}", "x", "Λ(x)", "φ_0.5(x)", "φ_-0.5(x)", "∂xφ_0.5");
    for i in 0..=6 {
        let x = -3.0 + i as f64;
        let (y, jac) = m.flow_with_jacobian(x, 0.5)?;
        println!("{x:>6.1} {:>10.6} {y:>14.10} {:>14.10} {jac:>12.8}", m.lambda_map(x)?, m.flow(x, -0.5)?);
    }
    let x = 0.3;
    let gap = (m.flow(m.flow(x, 0.2)?, 0.3)? - m.flow(x, 0.5)?).abs();
    println!("group law |φ_0.3(φ_0.2(x)) − φ_0.5(x)| = {gap:.2e}");

    // f(x) = x fails the positivity scan; with the override the flow is x·e^t away from 0
    let linear = LampertiMap::new(DriftExpr::parse("x")?, Admission::Override).with_reference_point(1.0);
    println!("\nf = x (override)");
    for &x in &[0.5, 1.0, 2.0] {
        let y = linear.flow(x, 0.7)?;
        println!("φ_0.7({x}) = {y:.12}  (x·e^0.7 = {:.12})", x * 0.7f64.exp());
    }
    Ok(())
}
