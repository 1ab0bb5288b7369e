mod common;

use common::{constant_map, cos_map, linear_map, normal_cdf_oracle};
use shorttime::kernels::{GridSpec, KernelCdf, KernelKind};
use shorttime::sampler::{ks_distance, normal_cdf, sample_crypto, sample_em_path};

#[test]
fn library_normal_cdf_matches_quadrature() {
    for i in 0..81 {
        let z = -8.0 + 0.2 * i as f64;
        let (a, b) = (normal_cdf(z), normal_cdf_oracle(z));
        assert!((a - b).abs() <= 1e-14 + 1e-12 * b, "{z}: {a} vs {b}");
    }
}

#[test]
fn linear_drift_crypto_samples_are_scaled_brownian() {
    // φ_T(y) = e^T y, so 𝓧_T ~ N(e^T x′, e^{2T} T)
    let (xp, t, n) = (0.5, 0.3, 20_000);
    let s = sample_crypto(&linear_map(), xp, t, n, 21).unwrap();
    let (mu, sd) = (t.exp() * xp, t.exp() * t.sqrt());
    let ks = ks_distance(&s, |x| normal_cdf_oracle((x - mu) / sd));
    assert!(ks < 1.63 / (n as f64).sqrt(), "{ks}");
}

#[test]
fn constant_drift_euler_paths_are_exact_in_law() {
    let (c, xp, t, n) = (1.5, -0.2, 0.4, 20_000);
    let s = sample_em_path(&constant_map(c), xp, t, 5, n, 8).unwrap();
    let ks = ks_distance(&s, |x| normal_cdf_oracle((x - xp - c * t) / t.sqrt()));
    assert!(ks < 1.63 / (n as f64).sqrt(), "{ks}");
}

#[test]
fn ou_path_moments() {
    // dX = X dt + dB: E X_T = x′e^T, Var X_T = (e^{2T} − 1)/2
    let (xp, t, n) = (0.5, 0.5, 40_000);
    let s = sample_em_path(&linear_map(), xp, t, 500, n, 4).unwrap();
    let var = ((2.0 * t).exp() - 1.0) / 2.0;
    assert!((s.mean() - xp * t.exp()).abs() < 4.0 * (var / n as f64).sqrt() + 2e-3);
    assert!((s.variance() / var - 1.0).abs() < 0.03, "{}", s.variance());
}

#[test]
fn consistency_triangle() {
    let m = cos_map();
    let n = 20_000;
    let ks = |t: f64, crypto: bool| {
        let g = GridSpec::padded(0.0, t, 1.0, 3.0, 801).unwrap();
        let cdf = KernelCdf::tabulate(KernelKind::Girsanov, &m, t, 0.0, &g).unwrap();
        let s = if crypto {
            sample_crypto(&m, 0.0, t, n, 17).unwrap()
        } else {
            sample_em_path(&m, 0.0, t, 400, n, 17).unwrap()
        };
        ks_distance(&s, |x| cdf.cdf(x))
    };
    assert!(ks(0.2, true) < 1.63 / (n as f64).sqrt());
    let (wide, narrow) = (ks(0.8, false), ks(0.05, false));
    assert!(narrow < wide, "EM vs girsanov KS: T = 0.8 → {wide}, T = 0.05 → {narrow}");
}
