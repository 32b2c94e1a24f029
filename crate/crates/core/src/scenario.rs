//! Scenario files.
//!
//! A scenario is one TOML document naming the physical parameters, the
//! medium, the coherent input, an optional homodyne probe, the products to
//! compute and the numerical tolerances. Individual keys can be overridden
//! with dotted paths (`medium.length=20`).

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homodyne::{GridSpec, MomentMethod, MomentOptions, ProbeMode, WignerOptions};
use crate::medium::{MediumProfile, PolaritonParams, TabulatedDensity};
use crate::phase::KernelOptions;
use crate::scattering::{CoherentInput, CorrelatorRequest, ScatteringOptions};

const BUILTINS: [(&str, &str); 4] = [
    ("fig2-left", include_str!("../scenarios/fig2-left.toml")),
    ("fig2-right", include_str!("../scenarios/fig2-right.toml")),
    ("fig3", include_str!("../scenarios/fig3.toml")),
    ("demo", include_str!("../scenarios/demo.toml")),
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTINS.iter().map(|(n, _)| *n).collect()
}

pub fn builtin_source(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Product {
    Kernel,
    KerrScan,
    FieldOut,
    Correlators,
    Wigner,
    MassValidity,
}

impl Product {
    pub fn name(self) -> &'static str {
        match self {
            Product::Kernel => "kernel",
            Product::KerrScan => "kerr-scan",
            Product::FieldOut => "field-out",
            Product::Correlators => "correlators",
            Product::Wigner => "wigner",
            Product::MassValidity => "mass-validity",
        }
    }
}

fn one() -> f64 {
    1.0
}

/// Physical parameters; give either `c6` or the blockade radius `xi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub omega: f64,
    pub delta: f64,
    pub gamma: f64,
    pub g0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c6: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(default = "one")]
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MediumSpec {
    Slab {
        density: f64,
        length: f64,
    },
    Gaussian {
        peak: f64,
        width: f64,
        #[serde(default)]
        center: f64,
    },
    /// Two-column CSV `x,n`.
    Tabulated { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InputSpec {
    /// Exactly one of `amplitude` (`[re, im]`), `nbar` or `probe_photons`
    /// (mean photon number in the probe mode) fixes the scale.
    Gaussian {
        width: f64,
        #[serde(default)]
        center: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        amplitude: Option<[f64; 2]>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nbar: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        probe_photons: Option<f64>,
    },
    Flat {
        density: f64,
        half_width: f64,
        #[serde(default)]
        center: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProbeSpec {
    Gaussian {
        width: f64,
        #[serde(default)]
        center: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelSpec {
    /// Slab lengths in units of ξ; empty means the scenario medium.
    pub lengths_over_xi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KerrScanSpec {
    /// Linear scan `φ(0) = k φ_max / points`, `k = 1..=points`.
    pub phi0_max: f64,
    pub points: usize,
    /// Logarithmic scan used for the small-φ(0) power-law fits.
    pub log_min: f64,
    pub log_max: f64,
    pub log_points: usize,
}

impl Default for KerrScanSpec {
    fn default() -> Self {
        KerrScanSpec {
            phi0_max: 3.0 * std::f64::consts::PI,
            points: 120,
            log_min: 1e-3,
            log_max: 1e-2,
            log_points: 11,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldOutSpec {
    pub tau_min: f64,
    pub tau_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorrelatorSpec {
    pub n: usize,
    pub m: usize,
    pub points: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WignerSpec {
    /// Peak phases in units of π; the kernel is rescaled to each. Empty
    /// means the scenario's own φ(0).
    pub phi0_over_pi: Vec<f64>,
    pub n_max: usize,
    pub method: MomentMethod,
    pub half_width: f64,
    pub points: usize,
}

impl Default for WignerSpec {
    fn default() -> Self {
        WignerSpec {
            phi0_over_pi: Vec::new(),
            n_max: 20,
            method: MomentMethod::NarrowProbe,
            half_width: 4.0,
            points: 81,
        }
    }
}

impl WignerSpec {
    pub fn grid(&self) -> GridSpec {
        GridSpec::square(self.half_width, self.points)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MassValiditySpec {
    pub g_over_omega: Vec<f64>,
    pub l_over_xi: Vec<f64>,
    pub phi0: f64,
    pub threshold: f64,
}

impl Default for MassValiditySpec {
    fn default() -> Self {
        let logspace = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
            (0..n)
                .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
                .collect()
        };
        MassValiditySpec {
            g_over_omega: logspace(0.01, 10.0, 61),
            l_over_xi: logspace(1.0, 1000.0, 61),
            phi0: 1.0,
            threshold: crate::massterm::DEFAULT_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub kernel: KernelOptions,
    pub scattering: ScatteringOptions,
    pub moments: MomentOptions,
    pub wigner: WignerOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub outputs: Vec<Product>,
    pub params: ParamsSpec,
    pub medium: MediumSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<InputSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSpec>,
    #[serde(default)]
    pub kernel: KernelSpec,
    #[serde(default)]
    pub kerr_scan: KerrScanSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field_out: Option<FieldOutSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub correlators: Vec<CorrelatorSpec>,
    #[serde(default)]
    pub wigner: WignerSpec,
    #[serde(default)]
    pub mass_validity: MassValiditySpec,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// Runtime objects built from a scenario.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: PolaritonParams,
    pub medium: MediumProfile,
    pub input: Option<CoherentInput>,
    pub probe: Option<ProbeMode>,
}

/// Applies `path=value` to a TOML table, creating intermediate tables.
/// Values parse as TOML and fall back to plain strings.
pub fn apply_override(root: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not of the form key=value")))?;
    let path = path.trim();
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::Config(format!("override path `{path}` has an empty key")));
    }
    let (last, parents) = keys.split_last().expect("nonempty split");
    let mut table = root;
    for (depth, key) in parents.iter().enumerate() {
        let entry = table
            .entry(key.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(|| {
            Error::Config(format!("override path `{}` is not a table", keys[..=depth].join(".")))
        })?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

impl Scenario {
    pub fn parse(source: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = source.parse().map_err(|e| Error::Config(format!("{e}")))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        // partial tolerance tables fill in from each option's own defaults
        let mut tolerances = match toml::Value::try_from(Tolerances::default()) {
            Ok(toml::Value::Table(t)) => t,
            _ => unreachable!("tolerances serialize to a table"),
        };
        if let Some(user) = table.remove("tolerances") {
            let user = match user {
                toml::Value::Table(t) => t,
                _ => return Err(Error::Config("tolerances: expected a table".into())),
            };
            merge(&mut tolerances, user);
        }
        table.insert("tolerances".into(), toml::Value::Table(tolerances));
        let scenario: Scenario = serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
            let path = e.path().to_string();
            Error::Config(format!("{path}: {}", e.into_inner()))
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn builtin(name: &str, overrides: &[String]) -> Result<Self> {
        let source = builtin_source(name).ok_or_else(|| {
            Error::Config(format!(
                "unknown scenario `{name}`; built-ins are {}",
                builtin_names().join(", ")
            ))
        })?;
        Self::parse(source, overrides)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let source = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&source, overrides)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Checks that requested products have their inputs.
    pub fn validate(&self) -> Result<()> {
        let requires = |p: Product, ok: bool, what: &str| -> Result<()> {
            if self.outputs.contains(&p) && !ok {
                Err(Error::invalid(what, format!("required by output `{}`", p.name())))
            } else {
                Ok(())
            }
        };
        requires(Product::FieldOut, self.input.is_some(), "input")?;
        requires(Product::FieldOut, self.field_out.is_some(), "field_out")?;
        requires(Product::Correlators, self.input.is_some(), "input")?;
        requires(Product::Correlators, !self.correlators.is_empty(), "correlators")?;
        requires(Product::Wigner, self.input.is_some(), "input")?;
        requires(Product::Wigner, self.probe.is_some(), "probe")?;
        if let Some(f) = &self.field_out {
            if f.points < 2 || !(f.tau_max > f.tau_min) {
                return Err(Error::invalid("field_out", "need tau_max > tau_min and points >= 2"));
            }
        }
        for (i, c) in self.correlators.iter().enumerate() {
            CorrelatorRequest::new(c.n, c.m, c.points.clone()).map_err(|e| prefix(&format!("correlators[{i}]"), e))?;
        }
        let ks = &self.kerr_scan;
        if ks.points == 0 || !(ks.phi0_max > 0.0) {
            return Err(Error::invalid("kerr_scan", "need phi0_max > 0 and points >= 1"));
        }
        if ks.log_points == 1 || (ks.log_points > 1 && !(ks.log_max > ks.log_min && ks.log_min > 0.0)) {
            return Err(Error::invalid("kerr_scan", "need 0 < log_min < log_max and log_points != 1"));
        }
        if self.kernel.lengths_over_xi.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::invalid("kernel.lengths_over_xi", "lengths must be positive"));
        }
        if !self.kernel.lengths_over_xi.is_empty() && !matches!(self.medium, MediumSpec::Slab { .. }) {
            return Err(Error::invalid("kernel.lengths_over_xi", "needs a slab medium"));
        }
        let w = &self.wigner;
        if w.points < 2 || !(w.half_width > 0.0) {
            return Err(Error::invalid("wigner", "need half_width > 0 and points >= 2"));
        }
        let mv = &self.mass_validity;
        if mv.g_over_omega.is_empty() || mv.l_over_xi.is_empty() || !(mv.threshold > 0.0) {
            return Err(Error::invalid("mass_validity", "need nonempty axes and threshold > 0"));
        }
        Ok(())
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let p = &self.params;
        let base = PolaritonParams {
            omega: p.omega,
            delta: p.delta,
            gamma: p.gamma,
            g0: p.g0,
            c6: p.c6.unwrap_or(0.0),
            c: p.c,
        };
        let params = match (p.c6, p.xi) {
            (Some(_), None) => base,
            (None, Some(xi)) if xi > 0.0 && xi.is_finite() => base.with_blockade_radius(xi),
            (None, Some(_)) => return Err(Error::invalid("params.xi", "must be positive")),
            _ => return Err(Error::invalid("params", "give exactly one of c6 and xi")),
        };
        params.validate()?;
        let medium = match &self.medium {
            MediumSpec::Slab { density, length } => MediumProfile::slab(*density, *length),
            MediumSpec::Gaussian { peak, width, center } => MediumProfile::gaussian(*peak, *width, *center),
            MediumSpec::Tabulated { path } => TabulatedDensity::from_csv(path).map(MediumProfile::from_table),
        }
        .map_err(|e| prefix("medium", e))?;
        let probe = match &self.probe {
            Some(ProbeSpec::Gaussian { width, center }) => {
                Some(ProbeMode::gaussian(*center, *width).map_err(|e| prefix("probe", e))?)
            }
            None => None,
        };
        let input = match &self.input {
            Some(spec) => Some(resolve_input(spec, probe.as_ref()).map_err(|e| prefix("input", e))?),
            None => None,
        };
        Ok(Resolved {
            params,
            medium,
            input,
            probe,
        })
    }
}

fn resolve_input(spec: &InputSpec, probe: Option<&ProbeMode>) -> Result<CoherentInput> {
    match *spec {
        InputSpec::Gaussian {
            width,
            center,
            amplitude,
            nbar,
            probe_photons,
        } => match (amplitude, nbar, probe_photons) {
            (Some([re, im]), None, None) => CoherentInput::gaussian(Complex64::new(re, im), center, width),
            (None, Some(n), None) => CoherentInput::gaussian_with_photons(n, center, width),
            (None, None, Some(n)) => {
                let probe = probe.ok_or_else(|| Error::invalid("probe_photons", "needs a probe"))?;
                if !(n >= 0.0) {
                    return Err(Error::invalid("probe_photons", "must be nonnegative"));
                }
                let unit = CoherentInput::gaussian(Complex64::new(1.0, 0.0), center, width)?;
                let overlap = probe.overlap(&unit)?.norm();
                if overlap == 0.0 {
                    return Err(Error::invalid("probe_photons", "probe does not overlap the input"));
                }
                CoherentInput::gaussian(Complex64::new(n.sqrt() / overlap, 0.0), center, width)
            }
            _ => Err(Error::invalid(
                "gaussian",
                "give exactly one of amplitude, nbar and probe_photons",
            )),
        },
        InputSpec::Flat {
            density,
            half_width,
            center,
        } => CoherentInput::flat(density, center, half_width),
    }
}

fn prefix(scope: &str, e: Error) -> Error {
    match e {
        Error::Invalid { field, reason } if !field.starts_with(scope) => Error::Invalid {
            field: format!("{scope}.{field}"),
            reason,
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse_and_resolve() {
        for name in builtin_names() {
            let s = Scenario::builtin(name, &[]).unwrap();
            assert_eq!(s.name, name);
            s.resolve().unwrap();
            let again = Scenario::parse(&s.to_toml(), &[]).unwrap();
            assert_eq!(again, s);
        }
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let s = Scenario::builtin(
            "fig2-right",
            &[
                "medium.length=20".into(),
                "tolerances.kernel.quadrature.rel=1e-9".into(),
                "name=custom".into(),
            ],
        )
        .unwrap();
        assert_eq!(s.medium, MediumSpec::Slab { density: 1.0, length: 20.0 });
        assert_eq!(s.tolerances.kernel.quadrature.rel, 1e-9);
        assert_eq!(s.tolerances.kernel.quadrature.abs, KernelOptions::default().quadrature.abs);
        assert_eq!(s.name, "custom");
    }

    #[test]
    fn errors_name_the_field() {
        let e = Scenario::builtin("fig2-left", &["medium.length=\"long\"".into()]).unwrap_err();
        assert!(e.to_string().contains("medium"), "{e}");
        let e = Scenario::builtin("fig2-left", &["params.omgea=1".into()]).unwrap_err();
        assert!(e.to_string().contains("omgea"), "{e}");
        let e = Scenario::builtin("fig2-left", &["outputs=[\"wigner\"]".into()]).unwrap_err();
        assert!(matches!(e, Error::Invalid { ref field, .. } if field == "input"), "{e}");
        let e = Scenario::builtin("fig2-left", &["params.delta=0.5".into()])
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(matches!(e, Error::Invalid { ref field, .. } if field == "params.delta"), "{e}");
        assert!(Scenario::builtin("nope", &[]).is_err());
        assert!(Scenario::builtin("fig2-left", &["no-equals".into()]).is_err());
    }

    #[test]
    fn probe_photon_scale() {
        let s = Scenario::builtin("fig3", &[]).unwrap();
        let r = s.resolve().unwrap();
        let c = r.probe.unwrap().overlap(r.input.as_ref().unwrap()).unwrap();
        assert!((c.norm_sqr() - 1.0).abs() < 1e-12);
    }
}
