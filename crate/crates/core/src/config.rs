//! Run configuration files.
//!
//! A configuration is TOML with the sections `[material]`, `[fluid]`,
//! `[source]`, `[geometry]`, `[solver]` and an optional `[output]`. Physical
//! quantities are strings with a unit suffix (`"20 mm"`, `"4e4 N/mm^2"`);
//! counts, tolerances and switches are plain TOML values. Unknown keys are
//! rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    DlForm, FluidParams, FrontCondition, MaterialParams, SifPrefactor, SolverSettings, SourceTerm, State,
};
use crate::solver::Problem;
use crate::units::{parse_quantity, Dimension};

/// The benchmark preset shipped with the binary.
pub const BENCHMARK_PRESET: &str = include_str!("../presets/benchmark.toml");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub crack_radius: f64,
    pub fluid_radius: f64,
    pub initial_pressure: f64,
    pub elements: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSettings {
    pub directory: PathBuf,
    /// Write a profile every this many steps; 0 disables profiles.
    pub profile_every: usize,
}

impl Default for OutputSettings {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("output"),
            profile_every: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub material: MaterialParams,
    pub fluid: FluidParams,
    pub source: SourceTerm,
    pub geometry: Geometry,
    pub settings: SolverSettings,
    pub steps: usize,
    pub output: OutputSettings,
}

impl RunConfig {
    pub fn problem(&self) -> Problem {
        Problem {
            material: self.material,
            fluid: self.fluid,
            source: self.source,
            settings: self.settings,
        }
    }

    pub fn initial_state(&self) -> Result<State> {
        let g = &self.geometry;
        State::initial(g.crack_radius, g.fluid_radius, g.elements, g.initial_pressure)
    }

    pub fn benchmark() -> Self {
        parse_config(BENCHMARK_PRESET).expect("bundled preset is valid")
    }

    pub fn validate(&self) -> Result<()> {
        self.problem().validate()?;
        self.initial_state().map(|_| ())
    }

    /// Serialises to TOML with every quantity in SI units.
    pub fn to_toml(&self) -> String {
        let m = &self.material;
        let f = &self.fluid;
        let s = &self.source;
        let g = &self.geometry;
        let st = &self.settings;
        let raw = RawConfig {
            material: RawMaterial {
                plane_strain_modulus: si(m.plane_strain_modulus, "Pa"),
                poisson_ratio: m.poisson,
                toughness: si(m.toughness, "Pa*m^0.5"),
                numerical_viscosity: si(m.numerical_viscosity, "Pa*s/m"),
                far_field_stress: si(m.far_field_stress, "Pa"),
            },
            fluid: RawFluid {
                viscosity: si(f.viscosity, "Pa*s"),
                density: si(f.density, "kg/m^3"),
            },
            source: RawSource {
                amplitude: si(s.amplitude, "kg/(m^2*s)"),
                radial_decay: si(s.radial_decay, "m^2"),
                ramp_rate: si(s.ramp_rate, "1/s"),
            },
            geometry: RawGeometry {
                crack_radius: si(g.crack_radius, "m"),
                fluid_radius: si(g.fluid_radius, "m"),
                initial_pressure: si(g.initial_pressure, "Pa"),
                elements: g.elements,
            },
            solver: RawSolver {
                dt: si(st.dt, "s"),
                steps: self.steps,
                tol_ell: st.tol_ell,
                tol_a: st.tol_a,
                max_inner_iters: st.max_inner_iters,
                max_outer_iters: st.max_outer_iters,
                include_dadl_terms: st.include_dadl_terms,
                include_dadr_terms: st.include_dadr_terms,
                quadrature_tol: st.quadrature_tol,
                front_condition: st.front_condition,
                sif_prefactor: st.sif_prefactor,
                dl_form: st.dl_form,
                opening_floor: si(st.opening_floor, "m"),
            },
            output: Some(RawOutput {
                directory: self.output.directory.clone(),
                profile_every: self.output.profile_every,
            }),
        };
        toml::to_string(&raw).expect("config serialises")
    }
}

fn si(v: f64, unit: &str) -> String {
    format!("{v:e} {unit}")
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    material: RawMaterial,
    fluid: RawFluid,
    source: RawSource,
    geometry: RawGeometry,
    solver: RawSolver,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output: Option<RawOutput>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMaterial {
    plane_strain_modulus: String,
    #[serde(default)]
    poisson_ratio: f64,
    toughness: String,
    numerical_viscosity: String,
    far_field_stress: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFluid {
    viscosity: String,
    density: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    amplitude: String,
    radial_decay: String,
    ramp_rate: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGeometry {
    crack_radius: String,
    fluid_radius: String,
    initial_pressure: String,
    elements: usize,
}

fn default_settings() -> SolverSettings {
    SolverSettings::default()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    dt: String,
    steps: usize,
    #[serde(default = "d_tol_ell")]
    tol_ell: f64,
    #[serde(default = "d_tol_a")]
    tol_a: f64,
    #[serde(default = "d_inner")]
    max_inner_iters: usize,
    #[serde(default = "d_outer")]
    max_outer_iters: usize,
    #[serde(default = "yes")]
    include_dadl_terms: bool,
    #[serde(default = "yes")]
    include_dadr_terms: bool,
    #[serde(default = "d_quad")]
    quadrature_tol: f64,
    #[serde(default)]
    front_condition: FrontCondition,
    #[serde(default)]
    sif_prefactor: SifPrefactor,
    #[serde(default)]
    dl_form: DlForm,
    #[serde(default = "d_floor")]
    opening_floor: String,
}

fn d_tol_ell() -> f64 {
    default_settings().tol_ell
}
fn d_tol_a() -> f64 {
    default_settings().tol_a
}
fn d_inner() -> usize {
    default_settings().max_inner_iters
}
fn d_outer() -> usize {
    default_settings().max_outer_iters
}
fn d_quad() -> f64 {
    default_settings().quadrature_tol
}
fn d_floor() -> String {
    si(default_settings().opening_floor, "m")
}
fn yes() -> bool {
    true
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: PathBuf,
    #[serde(default = "d_profile_every")]
    profile_every: usize,
}

fn d_profile_every() -> usize {
    OutputSettings::default().profile_every
}

fn quantity(section: &str, field: &str, text: &str, dim: Dimension) -> Result<f64> {
    parse_quantity(text, dim).map_err(|e| Error::config(e.to_string(), Some(format!("{section}.{field}"))))
}

fn check(section: &str, r: Result<()>) -> Result<()> {
    r.map_err(|e| match e {
        Error::InvalidParameter { name, reason } => {
            Error::config(format!("invalid value: {reason}"), Some(format!("{section}.{name}")))
        }
        other => other,
    })
}

/// Parses and validates configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let location = e.span().map(|span| {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            format!("line {line}")
        });
        Error::config(e.message().to_string(), location)
    })?;
    let rm = &raw.material;
    let material = MaterialParams {
        plane_strain_modulus: quantity("material", "plane_strain_modulus", &rm.plane_strain_modulus, Dimension::PRESSURE)?,
        poisson: rm.poisson_ratio,
        toughness: quantity("material", "toughness", &rm.toughness, Dimension::TOUGHNESS)?,
        numerical_viscosity: quantity("material", "numerical_viscosity", &rm.numerical_viscosity, Dimension::DRAG)?,
        far_field_stress: quantity("material", "far_field_stress", &rm.far_field_stress, Dimension::PRESSURE)?,
    };
    check("material", material.validate())?;
    let fluid = FluidParams {
        viscosity: quantity("fluid", "viscosity", &raw.fluid.viscosity, Dimension::VISCOSITY)?,
        density: quantity("fluid", "density", &raw.fluid.density, Dimension::DENSITY)?,
    };
    check("fluid", fluid.validate())?;
    let rs = &raw.source;
    let source = SourceTerm {
        amplitude: quantity("source", "amplitude", &rs.amplitude, Dimension::MASS_FLUX)?,
        radial_decay: quantity("source", "radial_decay", &rs.radial_decay, Dimension::AREA)?,
        ramp_rate: quantity("source", "ramp_rate", &rs.ramp_rate, Dimension::RATE)?,
    };
    check("source", source.validate())?;
    let rg = &raw.geometry;
    let geometry = Geometry {
        crack_radius: quantity("geometry", "crack_radius", &rg.crack_radius, Dimension::LENGTH)?,
        fluid_radius: quantity("geometry", "fluid_radius", &rg.fluid_radius, Dimension::LENGTH)?,
        initial_pressure: quantity("geometry", "initial_pressure", &rg.initial_pressure, Dimension::PRESSURE)?,
        elements: rg.elements,
    };
    let s = &raw.solver;
    let settings = SolverSettings {
        dt: quantity("solver", "dt", &s.dt, Dimension::TIME)?,
        tol_ell: s.tol_ell,
        tol_a: s.tol_a,
        max_inner_iters: s.max_inner_iters,
        max_outer_iters: s.max_outer_iters,
        include_dadl_terms: s.include_dadl_terms,
        include_dadr_terms: s.include_dadr_terms,
        quadrature_tol: s.quadrature_tol,
        front_condition: s.front_condition,
        sif_prefactor: s.sif_prefactor,
        dl_form: s.dl_form,
        opening_floor: quantity("solver", "opening_floor", &s.opening_floor, Dimension::LENGTH)?,
    };
    check("solver", settings.validate())?;
    let output = raw
        .output
        .map(|o| OutputSettings {
            directory: o.directory,
            profile_every: o.profile_every,
        })
        .unwrap_or_default();
    let cfg = RunConfig {
        material,
        fluid,
        source,
        geometry,
        settings,
        steps: s.steps,
        output,
    };
    check("geometry", cfg.initial_state().map(|_| ()))?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text).map_err(|e| match e {
        Error::Config { message, location } => Error::Config {
            message,
            location: Some(match location {
                Some(l) => format!("{}: {l}", path.display()),
                None => path.display().to_string(),
            }),
        },
        other => other,
    })
}

/// Replaces `section.key` in configuration text by `value`, which is written
/// as a TOML string unless it parses as a number or boolean.
pub fn override_field(text: &str, path: &str, value: &str) -> Result<String> {
    let mut doc: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::config(e.message().to_string(), None))?;
    let (section, key) = path
        .split_once('.')
        .ok_or_else(|| Error::config(format!("parameter path `{path}` is not of the form section.key"), None))?;
    let table = doc
        .get_mut(section)
        .and_then(|t| t.as_table_mut())
        .ok_or_else(|| Error::config(format!("no section `{section}`"), Some(path.to_string())))?;
    let v = if let Ok(i) = value.parse::<i64>() {
        toml::Value::Integer(i)
    } else if let Ok(b) = value.parse::<bool>() {
        toml::Value::Boolean(b)
    } else if let Ok(x) = value.parse::<f64>() {
        toml::Value::Float(x)
    } else {
        toml::Value::String(value.to_string())
    };
    let v = match table.get(key) {
        Some(toml::Value::String(_)) if !v.is_str() => toml::Value::String(value.to_string()),
        _ => v,
    };
    table.insert(key.to_string(), v);
    Ok(toml::to_string(&doc).expect("table serialises"))
}
