//! Runs scenario products and writes their data files.
//!
//! Every CSV starts with `#` comment lines holding the resolved scenario
//! (tolerances included) and the derived single-polariton quantities, so a
//! file is self-describing. Scalar results go to a JSON report. Outputs
//! depend only on the scenario: parallel stages keep input order and no
//! timing or host information is written.

use std::cell::OnceCell;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::homodyne::{mode_moments, purity, wigner};
use crate::interaction::TwoBodyPotential;
use crate::massterm::{mass_correction, validity_scan, write_scan_csv};
use crate::medium::{derive, CoordinateMap, DerivedQuantities, MediumProfile, PolaritonParams};
use crate::phase::{build_phase_kernel, KernelOptions, kerr_scan, kerr_summary, sigma_long_slab, PhaseKernel};
use crate::scattering::{
    coherent_out, correlator_batch, kerr_field, write_correlator_csv, CorrelatorRequest,
};
use crate::scenario::{Product, Resolved, Scenario};

/// Scalars produced by one invocation, written as `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub scenario: String,
    pub derived: DerivedQuantities,
    pub products: serde_json::Map<String, Value>,
    pub files: Vec<String>,
}

struct Context<'a> {
    scenario: &'a Scenario,
    resolved: Resolved,
    derived: DerivedQuantities,
    out_dir: PathBuf,
    header: String,
    kernel: OnceCell<PhaseKernel>,
    files: Vec<String>,
}

/// Computes `products` (all listed outputs when empty) into `out_dir`.
pub fn run(scenario: &Scenario, products: &[Product], out_dir: &Path) -> Result<Report> {
    let resolved = scenario.resolve()?;
    let derived = derive(&resolved.params, &resolved.medium)?;
    std::fs::create_dir_all(out_dir)?;
    let header = header(scenario, &derived);
    let mut ctx = Context {
        scenario,
        resolved,
        derived,
        out_dir: out_dir.to_path_buf(),
        header,
        kernel: OnceCell::new(),
        files: Vec::new(),
    };
    let selected = if products.is_empty() { &scenario.outputs[..] } else { products };
    let mut report = serde_json::Map::new();
    for &p in selected {
        let value = match p {
            Product::Kernel => kernel_tables(&mut ctx)?,
            Product::KerrScan => kerr_scan_table(&mut ctx)?,
            Product::FieldOut => field_out(&mut ctx)?,
            Product::Correlators => correlators(&mut ctx)?,
            Product::Wigner => wigner_grids(&mut ctx)?,
            Product::MassValidity => mass_validity(&mut ctx)?,
        };
        report.insert(p.name().to_string(), value);
    }
    let report = Report {
        scenario: scenario.name.clone(),
        derived: ctx.derived,
        products: report,
        files: ctx.files.clone(),
    };
    let mut w = BufWriter::new(File::create(out_dir.join("report.json"))?);
    serde_json::to_writer_pretty(&mut w, &report).map_err(|e| Error::Numerical(format!("report: {e}")))?;
    writeln!(w)?;
    w.flush()?;
    Ok(report)
}

fn header(scenario: &Scenario, d: &DerivedQuantities) -> String {
    let mut h = format!("# rydberg-kerr {}\n", env!("CARGO_PKG_VERSION"));
    for line in scenario.to_toml().lines() {
        if line.is_empty() {
            h.push_str("#\n");
        } else {
            h.push_str(&format!("# {line}\n"));
        }
    }
    h.push_str(&format!(
        "# derived: g = {:e}, xi = {:e}, xi_out = {:e}, v_g = {:e}, kappa = {:e}, delta_t = {:e}, mass = {:e}\n",
        d.g, d.xi, d.xi_out, d.v_g, d.kappa, d.delta_t, d.mass
    ));
    h
}

impl Context<'_> {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let mut w = BufWriter::new(File::create(self.out_dir.join(name))?);
        w.write_all(self.header.as_bytes())?;
        self.files.push(name.to_string());
        Ok(w)
    }

    fn kernel(&self) -> Result<&PhaseKernel> {
        if let Some(k) = self.kernel.get() {
            return Ok(k);
        }
        let k = kernel_for(&self.resolved.params, &self.scenario.tolerances.kernel, &self.resolved.medium)?;
        Ok(self.kernel.get_or_init(|| k))
    }
}

fn kernel_for(params: &PolaritonParams, opts: &KernelOptions, medium: &MediumProfile) -> Result<PhaseKernel> {
    let map = CoordinateMap::build(params, medium)?;
    let pot = TwoBodyPotential::from_params(params)?;
    build_phase_kernel(params, medium, &pot, &map, opts)
}

fn write_kernel_table<W: Write>(w: &mut W, kernel: &PhaseKernel) -> Result<f64> {
    writeln!(w, "u,phi,phi_over_phi0,universal")?;
    let (u, phi) = kernel.samples();
    let phi0 = kernel.phi0();
    let xo = kernel.xi_out();
    let mut max_dev: f64 = 0.0;
    let rows = (1..u.len()).rev().map(|i| (-u[i], phi[i])).chain(u.iter().copied().zip(phi.iter().copied()));
    for (x, p) in rows {
        let norm = if phi0 == 0.0 { 0.0 } else { p / phi0 };
        let universal = 1.0 / (1.0 + (x / xo).powi(6));
        max_dev = max_dev.max((norm - universal).abs());
        writeln!(w, "{x:.17e},{p:.17e},{norm:.17e},{universal:.17e}")?;
    }
    Ok(max_dev)
}

fn kernel_tables(ctx: &mut Context) -> Result<Value> {
    let lengths = ctx.scenario.kernel.lengths_over_xi.clone();
    if lengths.is_empty() {
        let kernel = ctx.kernel()?.clone();
        let mut w = ctx.create("kernel.csv")?;
        let max_dev = write_kernel_table(&mut w, &kernel)?;
        w.flush()?;
        let s = kerr_summary(&kernel, kernel.xi_out());
        return Ok(json!({
            "phi0": kernel.phi0(),
            "xi_out": kernel.xi_out(),
            "max_deviation_from_universal": max_dev,
            "sigma": s.sigma,
            "phi": s.phi,
            "eta": s.eta,
        }));
    }
    let density = ctx
        .resolved
        .medium
        .as_slab()
        .map(|(n, _)| n)
        .ok_or_else(|| Error::invalid("kernel.lengths_over_xi", "needs a slab medium"))?;
    let xi = ctx.derived.xi;
    let (params, opts) = (ctx.resolved.params, ctx.scenario.tolerances.kernel);
    let kernels = lengths
        .par_iter()
        .map(|&l| kernel_for(&params, &opts, &MediumProfile::slab(density, l * xi)?))
        .collect::<Result<Vec<_>>>()?;
    let mut entries = Vec::new();
    for (&l, kernel) in lengths.iter().zip(&kernels) {
        let mut w = ctx.create(&format!("kernel_L{l}.csv"))?;
        let max_dev = write_kernel_table(&mut w, kernel)?;
        w.flush()?;
        let s = kerr_summary(kernel, kernel.xi_out());
        entries.push(json!({
            "l_over_xi": l,
            "phi0": kernel.phi0(),
            "xi_out": kernel.xi_out(),
            "max_deviation_from_universal": max_dev,
            "sigma": s.sigma,
            "sigma_long_slab": sigma_long_slab(kernel.phi0(), kernel.xi_out()),
        }));
    }
    Ok(Value::Array(entries))
}

/// Least-squares slope of `ln |y|` against `ln x`.
pub fn power_law_exponent(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a.ln(), b.abs().ln())).collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(sx, sy), (a, b)| (sx + a, sy + b));
    let (mx, my) = (sx / n, sy / n);
    let (sxy, sxx) = pts
        .iter()
        .fold((0.0, 0.0), |(sxy, sxx), (a, b)| (sxy + (a - mx) * (b - my), sxx + (a - mx) * (a - mx)));
    sxy / sxx
}

/// Number of sign changes in the successive differences of `y`.
pub fn turning_points(y: &[f64]) -> usize {
    let d: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).filter(|d| *d != 0.0).collect();
    d.windows(2).filter(|w| w[0].signum() != w[1].signum()).count()
}

fn kerr_scan_table(ctx: &mut Context) -> Result<Value> {
    let spec = ctx.scenario.kerr_scan.clone();
    let kernel = ctx.kernel()?.clone();
    let log: Vec<f64> = (0..spec.log_points)
        .map(|k| spec.log_min * (spec.log_max / spec.log_min).powf(k as f64 / (spec.log_points - 1) as f64))
        .collect();
    let linear: Vec<f64> = (1..=spec.points).map(|k| spec.phi0_max * k as f64 / spec.points as f64).collect();
    let log_rows = kerr_scan(&kernel, &log)?;
    let lin_rows = kerr_scan(&kernel, &linear)?;
    let mut rows: Vec<_> = log_rows.iter().chain(&lin_rows).copied().collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut w = ctx.create("kerr_scan.csv")?;
    writeln!(w, "phi0,sigma,Phi,eta")?;
    for (p, s) in &rows {
        writeln!(w, "{p:.17e},{:.17e},{:.17e},{:.17e}", s.sigma, s.phi, s.eta)?;
    }
    w.flush()?;
    let mut out = json!({
        "phi_turning_points": turning_points(&lin_rows.iter().map(|r| r.1.phi).collect::<Vec<_>>()),
    });
    if log_rows.len() >= 2 {
        let x: Vec<f64> = log_rows.iter().map(|r| r.0).collect();
        let phi: Vec<f64> = log_rows.iter().map(|r| r.1.phi).collect();
        let eta: Vec<f64> = log_rows.iter().map(|r| r.1.eta).collect();
        out["phi_exponent"] = json!(power_law_exponent(&x, &phi));
        out["eta_exponent"] = json!(power_law_exponent(&x, &eta));
    }
    Ok(out)
}

fn field_out(ctx: &mut Context) -> Result<Value> {
    let spec = ctx.scenario.field_out.clone().expect("validated");
    let input = ctx.resolved.input.clone().expect("validated");
    let kernel = ctx.kernel()?.clone();
    let opts = ctx.scenario.tolerances.scattering;
    let sigma = kerr_summary(&kernel, kernel.xi_out()).sigma;
    let taus: Vec<f64> = (0..spec.points)
        .map(|k| spec.tau_min + (spec.tau_max - spec.tau_min) * k as f64 / (spec.points - 1) as f64)
        .collect();
    let values = taus
        .par_iter()
        .map(|&t| coherent_out(&input, &kernel, t, &opts))
        .collect::<Result<Vec<_>>>()?;
    let mut w = ctx.create("field_out.csv")?;
    writeln!(w, "tau,re_in,im_in,re_out,im_out,err,re_kerr,im_kerr")?;
    let mut max_err: f64 = 0.0;
    for (&t, v) in taus.iter().zip(&values) {
        let a = input.amplitude(t);
        let k = kerr_field(&input, sigma, t);
        max_err = max_err.max(v.error);
        writeln!(
            w,
            "{t:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.3e},{:.17e},{:.17e}",
            a.re, a.im, v.value.re, v.value.im, v.error, k.re, k.im
        )?;
    }
    w.flush()?;
    Ok(json!({ "sigma": sigma, "points": taus.len(), "max_error": max_err }))
}

fn correlators(ctx: &mut Context) -> Result<Value> {
    let input = ctx.resolved.input.clone().expect("validated");
    let kernel = ctx.kernel()?.clone();
    let requests = ctx
        .scenario
        .correlators
        .iter()
        .map(|c| CorrelatorRequest::new(c.n, c.m, c.points.clone()))
        .collect::<Result<Vec<_>>>()?;
    let values = correlator_batch(&input, &kernel, &requests, &ctx.scenario.tolerances.scattering)?;
    let mut w = ctx.create("correlators.csv")?;
    write_correlator_csv(&mut w, &requests, &values)?;
    w.flush()?;
    Ok(Value::Array(
        requests
            .iter()
            .zip(&values)
            .map(|(r, v)| json!({ "n": r.n, "m": r.m, "re": v.value.re, "im": v.value.im, "error": v.error }))
            .collect(),
    ))
}

fn wigner_grids(ctx: &mut Context) -> Result<Value> {
    let spec = ctx.scenario.wigner.clone();
    let input = ctx.resolved.input.clone().expect("validated");
    let probe = ctx.resolved.probe.clone().expect("validated");
    let base = ctx.kernel()?.clone();
    let phases: Vec<f64> = if spec.phi0_over_pi.is_empty() {
        vec![base.phi0()]
    } else {
        spec.phi0_over_pi.iter().map(|p| p * std::f64::consts::PI).collect()
    };
    let tol = ctx.scenario.tolerances;
    let mut entries = Vec::new();
    for (i, &phi0) in phases.iter().enumerate() {
        let kernel = base.rescaled(phi0)?;
        let moments = mode_moments(&input, &kernel, &probe, spec.n_max, spec.method, &tol.moments)?;
        let grid = wigner(&moments, &spec.grid(), &tol.wigner)?;
        let mut w = ctx.create(&format!("wigner_{i}.csv"))?;
        grid.write_csv(&mut w)?;
        w.flush()?;
        let (minor, major) = grid.principal_variances();
        entries.push(json!({
            "phi0": phi0,
            "file": format!("wigner_{i}.csv"),
            "integral": grid.integral(),
            "purity": purity(&grid),
            "mean": grid.mean(),
            "variance_minor": minor,
            "variance_major": major,
            "min_value": grid.min_value(),
            "moment_tail_estimate": moments.tail_estimate,
            "moment_quadrature_error": moments.quadrature_error,
            "diagnostics": grid.diagnostics,
        }));
    }
    Ok(Value::Array(entries))
}

fn mass_validity(ctx: &mut Context) -> Result<Value> {
    let spec = ctx.scenario.mass_validity.clone();
    let points = validity_scan(&spec.g_over_omega, &spec.l_over_xi, spec.phi0, spec.threshold);
    let mut w = ctx.create("mass_validity.csv")?;
    write_scan_csv(&mut w, &points)?;
    w.flush()?;
    let mut out = json!({
        "points": points.len(),
        "valid_points": points.iter().filter(|p| p.correction.valid).count(),
    });
    if ctx.resolved.medium.as_slab().is_some() {
        out["scenario"] = serde_json::to_value(mass_correction(
            &ctx.resolved.params,
            &ctx.resolved.medium,
            spec.threshold,
        )?)
        .map_err(|e| Error::Numerical(format!("report: {e}")))?;
    }
    Ok(out)
}
