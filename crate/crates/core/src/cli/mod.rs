//! Command dispatch: each command validates the config, computes, writes its
//! artifacts into the output directory and returns a manifest.

pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde_json::json;

use crate::error::{Error, Result};
use crate::evolution::{self, CompositionPlan, Metric};
use crate::girsanov::{self, McConfig};
use crate::kernels::{self, InitialLaw, KernelCdf};
use crate::sampler::{self, Scheme};

pub use config::{ExperimentConfig, OUT_DIR_ENV};
pub use output::{error_record, Manifest};
use output::{ArtifactWriter, Cell};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Validate,
    Flow,
    Density,
    GirsanovError,
    Rate,
    Compose,
    FpSolve,
    Sample,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Flow => "flow",
            Command::Density => "density",
            Command::GirsanovError => "girsanov-error",
            Command::Rate => "rate",
            Command::Compose => "compose",
            Command::FpSolve => "fp-solve",
            Command::Sample => "sample",
        }
    }
}

/// Run `cmd` writing into the configured output directory.
pub fn run_command(cmd: Command, cfg: &ExperimentConfig) -> Result<Manifest> {
    run_command_in(cmd, cfg, cfg.resolved_out_dir())
}

/// Run `cmd` writing into `out_dir`. The manifest is also written there as
/// `manifest-<command>.json`.
pub fn run_command_in(cmd: Command, cfg: &ExperimentConfig, out_dir: impl Into<PathBuf>) -> Result<Manifest> {
    cfg.validate_for(cmd)?;
    let mut w = ArtifactWriter::new(out_dir)?;
    let summary = match cmd {
        Command::Validate => validate(cfg, &mut w)?,
        Command::Flow => flow(cfg, &mut w)?,
        Command::Density => density(cfg, &mut w)?,
        Command::GirsanovError => girsanov_errors(cfg, &mut w, false)?,
        Command::Rate => girsanov_errors(cfg, &mut w, true)?,
        Command::Compose => compose(cfg, &mut w)?,
        Command::FpSolve => fp_solve(cfg, &mut w)?,
        Command::Sample => sample(cfg, &mut w)?,
    };
    // Where the artifacts go is not part of the experiment.
    let hashed = ExperimentConfig { out_dir: None, ..cfg.clone() };
    let config_bytes = serde_json::to_vec(&hashed).map_err(|e| Error::Config(e.to_string()))?;
    let manifest_name = format!("manifest-{}.json", cmd.name());
    let dir = w.dir().to_path_buf();
    let manifest = Manifest {
        command: cmd.name().to_owned(),
        config_sha256: output::sha256_hex(&config_bytes),
        seed: cfg.seed,
        files: w.into_files(),
        summary,
    };
    ArtifactWriter::new(dir)?.write_json(&manifest_name, &manifest)?;
    Ok(manifest)
}

fn validate(cfg: &ExperimentConfig, w: &mut ArtifactWriter) -> Result<serde_json::Value> {
    let report = cfg.scan()?;
    w.write_json("assumption.json", &report)?;
    Ok(json!({ "passed": report.passed, "f_min": report.f_min, "f_max": report.f_max }))
}

fn flow(cfg: &ExperimentConfig, w: &mut ArtifactWriter) -> Result<serde_json::Value> {
    let s = cfg.flow.as_ref().expect("validated");
    let m = cfg.lamperti(&cfg.scan()?)?;
    let mut rows = Vec::with_capacity(s.points.len() * s.times.len());
    for &x in &s.points {
        for &t in &s.times {
            let (y, jac) = m.flow_with_jacobian(x - m.alpha(), t)?;
            rows.push(vec![Cell::F(x), Cell::F(t), Cell::F(m.alpha() + y), Cell::F(jac)]);
        }
    }
    let n = rows.len();
    w.write_csv("flow.csv", &["x", "t", "phi", "jacobian"], rows)?;
    Ok(json!({ "rows": n }))
}

fn density(cfg: &ExperimentConfig, w: &mut ArtifactWriter) -> Result<serde_json::Value> {
    let s = cfg.density.as_ref().expect("validated");
    let report = cfg.scan()?;
    let m = cfg.lamperti(&report)?;
    let kinds = s.kinds.resolve()?;
    let law = cfg.initial_law.clone().unwrap_or_else(|| InitialLaw::point(s.x_prime));
    let atoms = law.atoms();
    let lo = atoms.iter().map(|a| a.0).fold(f64::INFINITY, f64::min);
    let hi = atoms.iter().map(|a| a.0).fold(f64::NEG_INFINITY, f64::max);
    let mut grid = s.grid.resolve(lo, s.horizon, &report)?;
    if hi > lo {
        let upper = s.grid.resolve(hi, s.horizon, &report)?;
        grid = kernels::GridSpec::new(grid.x_min, upper.x_max, grid.n_points)?;
    }
    let xs = grid.points();
    let mut columns = Vec::with_capacity(kinds.len());
    let mut masses = BTreeMap::new();
    let mut defects = BTreeMap::new();
    for &kind in &kinds {
        let col: Vec<f64> = xs
            .iter()
            .map(|&x| kernels::marginal_density(kind, &m, &law, s.horizon, x))
            .collect::<std::result::Result<_, _>>()?;
        masses.insert(kind.name(), grid.trapezoid(&col));
        if atoms.len() == 1 {
            let a = atoms[0].0;
            let d = kernels::normalization_defect(kind, &m.with_alpha(a), s.horizon, a, &grid)?;
            defects.insert(kind.name(), d);
        }
        columns.push(col);
    }
    let mut header = vec!["x"];
    header.extend(kinds.iter().map(|k| k.name()));
    let rows = (0..xs.len()).map(|i| {
        let mut r = vec![Cell::F(xs[i])];
        r.extend(columns.iter().map(|c| Cell::F(c[i])));
        r
    });
    w.write_csv("density.csv", &header, rows)?;
    Ok(json!({ "grid": grid, "trapezoid_mass": masses, "mass_defect": defects }))
}

fn girsanov_errors(cfg: &ExperimentConfig, w: &mut ArtifactWriter, fit: bool) -> Result<serde_json::Value> {
    let s = cfg.girsanov.as_ref().expect("validated");
    let m = cfg.lamperti(&cfg.scan()?)?;
    let mut rows = Vec::new();
    let mut by_p: Vec<Vec<(f64, girsanov::ErrorEstimate)>> = vec![Vec::new(); s.p.len()];
    for &t in &s.horizons {
        let n_steps = s.n_steps.unwrap_or_else(|| girsanov::default_n_steps(t));
        let mc = McConfig { n_paths: s.n_paths, n_steps, base_seed: cfg.seed, p: s.p[0] };
        let est = girsanov::lp_errors(&m, t, &mc, &s.p)?;
        for (j, e) in est.into_iter().enumerate() {
            rows.push(vec![
                Cell::F(t),
                Cell::F(s.p[j]),
                Cell::F(e.mean),
                Cell::F(e.std_error),
                Cell::I(e.n as u64),
                Cell::I(n_steps as u64),
            ]);
            by_p[j].push((t, e));
        }
    }
    w.write_csv("girsanov_error.csv", &["T", "p", "error", "std_error", "n_paths", "n_steps"], rows)?;
    if !fit {
        return Ok(json!({ "horizons": s.horizons.len(), "p": s.p }));
    }
    let mut fits = Vec::new();
    for (j, data) in by_p.iter().enumerate() {
        let f = girsanov::rate_fit(data)?;
        fits.push(json!({ "p": s.p[j], "slope": f.slope, "r_squared": f.r_squared }));
        w.write_json(&format!("rate_p{}.json", s.p[j]), &f)?;
    }
    Ok(json!({ "fits": fits }))
}

fn compose(cfg: &ExperimentConfig, w: &mut ArtifactWriter) -> Result<serde_json::Value> {
    let s = cfg.compose.as_ref().expect("validated");
    let report = cfg.scan()?;
    let m = cfg.lamperti(&report)?;
    let grid = s.grid.resolve(s.x_prime, s.total_time, &report)?;
    let oracle = match s.oracle_steps {
        Some(steps) => Some(evolution::solve_fokker_planck(&m, s.total_time, s.x_prime, &grid, steps)?),
        None => None,
    };
    let mut distances = Vec::new();
    for &n in &s.n_slices {
        let plan = CompositionPlan { total_time: s.total_time, n_slices: n, grid, kind: s.kind };
        let d = evolution::compose_chapman(&m, &plan, s.x_prime)?;
        let dist = match &oracle {
            Some(o) => Some(evolution::density_distance(&d, o, Metric::L1)?),
            None => None,
        };
        let xs = grid.points();
        let rows = xs.iter().zip(&d.values).map(|(&x, &p)| vec![Cell::F(x), Cell::F(p)]);
        w.write_csv(&format!("compose_n{n}.csv"), &["x", "density"], rows)?;
        w.write_json(
            &format!("compose_n{n}.json"),
            &json!({ "mass": d.mass(), "n_slices": n, "distance_to_oracle": dist }),
        )?;
        distances.push(json!({ "n_slices": n, "mass": d.mass(), "l1_to_oracle": dist }));
    }
    Ok(json!({ "kind": s.kind, "grid": grid, "results": distances }))
}

fn fp_solve(cfg: &ExperimentConfig, w: &mut ArtifactWriter) -> Result<serde_json::Value> {
    let s = cfg.fp.as_ref().expect("validated");
    let report = cfg.scan()?;
    let m = cfg.lamperti(&report)?;
    let grid = s.grid.resolve(s.x_prime, s.horizon, &report)?;
    let d = evolution::solve_fokker_planck(&m, s.horizon, s.x_prime, &grid, s.n_time_steps)?;
    let rows = grid.points().into_iter().zip(d.values.clone()).map(|(x, p)| vec![Cell::F(x), Cell::F(p)]);
    w.write_csv("fp.csv", &["x", "density"], rows)?;
    let side = json!({ "mass": d.mass(), "steps": s.n_time_steps, "warm_start_time": evolution::warm_start_time(s.horizon) });
    w.write_json("fp.json", &side)?;
    Ok(side)
}

fn sample(cfg: &ExperimentConfig, w: &mut ArtifactWriter) -> Result<serde_json::Value> {
    let s = cfg.sample.as_ref().expect("validated");
    let report = cfg.scan()?;
    let m = cfg.lamperti(&report)?;
    let set = match s.scheme {
        Scheme::Crypto => sampler::sample_crypto(&m, s.x_prime, s.horizon, s.n, cfg.seed)?,
        Scheme::EulerMaruyamaPath => {
            sampler::sample_em_path(&m, s.x_prime, s.horizon, s.n_steps.expect("validated"), s.n, cfg.seed)?
        }
    };
    let rows = set.values.iter().enumerate().map(|(i, &v)| vec![Cell::I(i as u64), Cell::F(v)]);
    w.write_csv("samples.csv", &["index", "value"], rows)?;
    let ks = match s.ks_against {
        Some(kind) => {
            let mk = m.with_alpha(s.x_prime);
            let grid = s.grid.resolve(s.x_prime, s.horizon, &report)?;
            let cdf = KernelCdf::tabulate(kind, &mk, s.horizon, s.x_prime, &grid)?;
            Some(sampler::ks_distance(&set, |x| cdf.cdf(x)))
        }
        None => None,
    };
    let side = json!({
        "scheme": set.scheme,
        "n": set.values.len(),
        "mean": set.mean(),
        "variance": if set.values.len() > 1 { Some(set.variance()) } else { None },
        "ks_against": s.ks_against,
        "ks_distance": ks,
    });
    w.write_json("sample.json", &side)?;
    Ok(side)
}
