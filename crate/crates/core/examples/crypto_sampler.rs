//! Exact draws of φ_T(x′ + B_T) compared with the girsanov kernel, and fine
//! Euler-Maruyama paths of the diffusion compared with both.

use shorttime::kernels::{GridSpec, KernelCdf, KernelKind};
use shorttime::sampler::{ks_distance, sample_crypto, sample_em_path};
use shorttime::{validate_assumption, DriftExpr, Interval, LampertiMap};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let drift = DriftExpr::parse("2 + cos(x)")?;
    let report = validate_assumption(&drift, Interval::new(-30.0, 30.0), 0.5, 6001)?;
    let m = LampertiMap::validated(drift, &report)?;
    let (xp, n) = (0.0, 50_000);

    println!("{:>6} {:>14} {:>14} {:>10} {:>10}", "T", "KS crypto", "KS EM path", "mean", "var");
    for &t in &[0.4, 0.2, 0.1, 0.05] {
        let grid = GridSpec::padded(xp, t, report.f_min, report.f_max, 2001)?;
        let cdf = KernelCdf::tabulate(KernelKind::Girsanov, &m, t, xp, &grid)?;
        let crypto = sample_crypto(&m, xp, t, n, 1)?;
        let em = sample_em_path(&m, xp, t, 400, n, 2)?;
        println!(
            "{t:>6} {:>14.5} {:>14.5} {:>10.5} {:>10.5}",
            ks_distance(&crypto, |x| cdf.cdf(x)),
            ks_distance(&em, |x| cdf.cdf(x)),
            crypto.mean(),
            crypto.variance()
        );
    }
    Ok(())
}
