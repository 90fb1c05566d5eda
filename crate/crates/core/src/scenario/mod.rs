//! Scenario files, parameter sweeps and their CSV output.
//!
//! A scenario is a TOML file naming a geometry, the electrolyte, the two
//! material files and a one-dimensional sweep. Lengths always carry a unit
//! suffix. Relative material paths are resolved against the scenario file.
//!
//! ```toml
//! name = "slabs-tetradecane-6nm"
//! temperature = 293.0
//!
//! [geometry]
//! kind = "slabs"
//! width = "6 nm"
//!
//! [electrolyte]
//! salt_mM = 150.0
//!
//! [materials]
//! medium = "../materials/water.json"
//! bodies = "../materials/tetradecane.json"
//!
//! [sweep]
//! variable = "gap"
//! min = "5 nm"
//! max = "100 nm"
//! points = 20
//! spacing = "log"
//! ```

mod crossover;
mod derjaguin;
mod materials;
mod run;

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dielectric::{Electrolyte, IonSpecies, MaterialModel};
use crate::units::Length;
use crate::{CasimirError, Result, TruncationConfig};

pub use crossover::{crossover_finder, Crossover, CrossoverFamily};
pub use derjaguin::{cylinder_pfa_per_length, sphere_pfa, PlanarProfile};
pub use materials::{list_and_validate_materials, MaterialEntry, MaterialsReport};
pub use run::{evaluate, run_scenario, run_scenario_to, Row, ScenarioOutput, SweepResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeometrySpec {
    /// Two half-spaces.
    Planar { gap: Option<Length> },
    Slabs { gap: Option<Length>, width: Length },
    Spheres {
        radius_1: Length,
        radius_2: Length,
        gap: Option<Length>,
    },
    Cylinders {
        radius_1: Length,
        radius_2: Length,
        gap: Option<Length>,
        length: Length,
    },
}

impl GeometrySpec {
    pub fn kind(&self) -> &'static str {
        match self {
            GeometrySpec::Planar { .. } => "planar",
            GeometrySpec::Slabs { .. } => "slabs",
            GeometrySpec::Spheres { .. } => "spheres",
            GeometrySpec::Cylinders { .. } => "cylinders",
        }
    }

    pub fn gap(&self) -> Option<f64> {
        match self {
            GeometrySpec::Planar { gap }
            | GeometrySpec::Slabs { gap, .. }
            | GeometrySpec::Spheres { gap, .. }
            | GeometrySpec::Cylinders { gap, .. } => gap.map(Length::meters),
        }
    }

    fn is_curved(&self) -> bool {
        matches!(self, GeometrySpec::Spheres { .. } | GeometrySpec::Cylinders { .. })
    }

    fn lengths(&self) -> Vec<(&'static str, Option<f64>)> {
        let mut v = vec![("geometry.gap", self.gap())];
        match self {
            GeometrySpec::Planar { .. } => {}
            GeometrySpec::Slabs { width, .. } => v.push(("geometry.width", Some(width.0))),
            GeometrySpec::Spheres {
                radius_1, radius_2, ..
            } => {
                v.push(("geometry.radius_1", Some(radius_1.0)));
                v.push(("geometry.radius_2", Some(radius_2.0)));
            }
            GeometrySpec::Cylinders {
                radius_1,
                radius_2,
                length,
                ..
            } => {
                v.push(("geometry.radius_1", Some(radius_1.0)));
                v.push(("geometry.radius_2", Some(radius_2.0)));
                v.push(("geometry.length", Some(length.0)));
            }
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IonSpec {
    #[serde(rename = "concentration_mM")]
    pub concentration_mm: f64,
    pub valence: i32,
}

/// Exactly one of `salt_mM`, `ions` or `debye_length`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectrolyteSpec {
    /// Symmetric monovalent salt, mmol/L.
    #[serde(rename = "salt_mM", default, skip_serializing_if = "Option::is_none")]
    pub salt_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ions: Vec<IonSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub debye_length: Option<Length>,
}

impl ElectrolyteSpec {
    fn validate(&self) -> Result<()> {
        let given = usize::from(self.salt_mm.is_some())
            + usize::from(!self.ions.is_empty())
            + usize::from(self.debye_length.is_some());
        if given != 1 {
            return Err(CasimirError::config(
                "electrolyte",
                "give exactly one of salt_mM, ions or debye_length",
            ));
        }
        if let Some(c) = self.salt_mm {
            if !(c.is_finite() && c >= 0.0) {
                return Err(CasimirError::config("electrolyte.salt_mM", "must be non-negative"));
            }
        }
        for (i, ion) in self.ions.iter().enumerate() {
            if !(ion.concentration_mm.is_finite() && ion.concentration_mm >= 0.0) {
                return Err(CasimirError::config(
                    format!("electrolyte.ions[{i}].concentration_mM"),
                    "must be non-negative",
                ));
            }
        }
        if let Some(l) = self.debye_length {
            if !(l.0 > 0.0) {
                return Err(CasimirError::config("electrolyte.debye_length", "must be positive"));
            }
        }
        Ok(())
    }

    /// The electrolyte, with the salt concentration replaced by `salt_mm`
    /// when given.
    pub fn build(&self, solvent: MaterialModel, salt_mm: Option<f64>) -> Result<Electrolyte> {
        if let Some(c) = salt_mm.or(self.salt_mm) {
            return Electrolyte::monovalent_salt(solvent, c);
        }
        if let Some(l) = self.debye_length {
            return Electrolyte::with_debye_length(solvent, l.0);
        }
        let ions = self
            .ions
            .iter()
            .map(|i| IonSpecies::from_millimolar(i.concentration_mm, i.valence))
            .collect();
        Electrolyte::new(solvent, ions)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialRefs {
    /// Solvent filling the gap.
    pub medium: PathBuf,
    /// Material of both bodies.
    pub bodies: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    Gap,
    Width,
    Salt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

/// A sweep bound: a length for `gap` and `width`, a plain number in mmol/L
/// for `salt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Length(Length),
    Number(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub min: Bound,
    pub max: Bound,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Sweep {
    fn bound(&self, which: &str, b: Bound) -> Result<f64> {
        let field = format!("sweep.{which}");
        match (self.variable, b) {
            (SweepVariable::Salt, Bound::Number(v)) => Ok(v),
            (SweepVariable::Salt, Bound::Length(_)) => {
                Err(CasimirError::config(field, "salt bounds are plain numbers in mM"))
            }
            (_, Bound::Length(l)) => Ok(l.0),
            (_, Bound::Number(_)) => Err(CasimirError::config(
                field,
                "length bounds need a unit suffix (nm, um, mm or m)",
            )),
        }
    }

    fn validate(&self) -> Result<(f64, f64)> {
        let lo = self.bound("min", self.min)?;
        let hi = self.bound("max", self.max)?;
        if !(lo > 0.0 && lo.is_finite()) {
            return Err(CasimirError::config("sweep.min", format!("must be positive, got {lo}")));
        }
        if !(hi.is_finite() && lo < hi) {
            return Err(CasimirError::config(
                "sweep.max",
                format!("must exceed sweep.min, got min = {lo}, max = {hi}"),
            ));
        }
        if self.points < 2 {
            return Err(CasimirError::config(
                "sweep.points",
                format!("must be at least 2, got {}", self.points),
            ));
        }
        Ok((lo, hi))
    }

    /// Sweep values in SI units (mmol/L for salt), in increasing order.
    pub fn values(&self) -> Result<Vec<f64>> {
        let (lo, hi) = self.validate()?;
        let last = (self.points - 1) as f64;
        let v = (0..self.points)
            .map(|i| {
                let s = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => (lo * (last - i as f64) + hi * i as f64) / last,
                    Spacing::Log => (lo.ln() + s * (hi / lo).ln()).exp(),
                }
            })
            .collect::<Vec<_>>();
        // pin the end points against rounding in exp/ln
        Ok(v.iter()
            .enumerate()
            .map(|(i, &x)| match i {
                0 => lo,
                i if i == self.points - 1 => hi,
                _ => x,
            })
            .collect())
    }
}

/// Columns that can be requested in `outputs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Column {
    Total,
    Universal,
    Longitudinal,
    Nonuniversal,
    Ratio,
    F,
    Phi,
    X,
    U,
    Y,
    Flags,
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Column::Total => "total",
            Column::Universal => "universal",
            Column::Longitudinal => "longitudinal",
            Column::Nonuniversal => "nonuniversal",
            Column::Ratio => "ratio",
            Column::F => "f",
            Column::Phi => "phi",
            Column::X => "x",
            Column::U => "u",
            Column::Y => "y",
            Column::Flags => "flags",
        };
        f.write_str(s)
    }
}

impl Column {
    const ALL: [Column; 11] = [
        Column::Total,
        Column::Universal,
        Column::Longitudinal,
        Column::Nonuniversal,
        Column::Ratio,
        Column::F,
        Column::Phi,
        Column::X,
        Column::U,
        Column::Y,
        Column::Flags,
    ];

    fn applies_to(self, g: &GeometrySpec) -> bool {
        match self {
            Column::F | Column::U | Column::Y => matches!(g, GeometrySpec::Spheres { .. }),
            Column::Phi => matches!(g, GeometrySpec::Cylinders { .. }),
            Column::X => g.is_curved(),
            _ => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    /// Kelvin.
    pub temperature: f64,
    pub geometry: GeometrySpec,
    pub electrolyte: ElectrolyteSpec,
    pub materials: MaterialRefs,
    pub sweep: Sweep,
    /// Requested columns; empty means every column that applies.
    #[serde(default)]
    pub outputs: Vec<Column>,
    #[serde(default)]
    pub truncation: TruncationConfig,
    /// Directory that relative material paths refer to.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Scenario {
    pub fn from_toml(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut s: Scenario =
            toml::from_str(text).map_err(|e| CasimirError::config("scenario", e.to_string()))?;
        s.base_dir = base_dir.into();
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CasimirError::io(path, e))?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, dir).map_err(|e| match e {
            CasimirError::Config { field, reason } => CasimirError::Config {
                field: format!("{} ({field})", path.display()),
                reason,
            },
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(CasimirError::config("name", "must not be empty"));
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(CasimirError::config(
                "temperature",
                format!("must be positive (K), got {}", self.temperature),
            ));
        }
        self.electrolyte.validate()?;
        self.sweep.validate()?;
        self.truncation.validate()?;
        let swept = self.sweep.variable;
        for (field, v) in self.geometry.lengths() {
            match v {
                Some(v) if !(v > 0.0 && v.is_finite()) => {
                    return Err(CasimirError::config(field, format!("must be positive, got {v}")));
                }
                None if !(field == "geometry.gap" && swept == SweepVariable::Gap) => {
                    return Err(CasimirError::config(field, "required unless it is swept"));
                }
                _ => {}
            }
        }
        if swept == SweepVariable::Width && !matches!(self.geometry, GeometrySpec::Slabs { .. }) {
            return Err(CasimirError::config(
                "sweep.variable",
                "width can only be swept for slabs",
            ));
        }
        if swept == SweepVariable::Salt && self.electrolyte.salt_mm.is_none() {
            return Err(CasimirError::config(
                "sweep.variable",
                "a salt sweep needs electrolyte.salt_mM",
            ));
        }
        for c in &self.outputs {
            if !c.applies_to(&self.geometry) {
                return Err(CasimirError::config(
                    "outputs",
                    format!("column {c} does not apply to {} geometry", self.geometry.kind()),
                ));
            }
        }
        Ok(())
    }

    /// Requested columns in canonical order.
    pub fn columns(&self) -> Vec<Column> {
        let mut cols: Vec<Column> = if self.outputs.is_empty() {
            Column::ALL
                .into_iter()
                .filter(|c| c.applies_to(&self.geometry))
                .collect()
        } else {
            self.outputs.clone()
        };
        cols.sort();
        cols.dedup();
        cols
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SLABS: &str = r#"
name = "t"
temperature = 293.0
[geometry]
kind = "slabs"
width = "6 nm"
[electrolyte]
salt_mM = 150.0
[materials]
medium = "water.json"
bodies = "tetradecane.json"
[sweep]
variable = "gap"
min = "5 nm"
max = "100 nm"
points = 4
"#;

    #[test]
    fn parses_and_resolves() {
        let s = Scenario::from_toml(SLABS, "/data").unwrap();
        assert_eq!(s.geometry.kind(), "slabs");
        assert_eq!(s.resolve(&s.materials.medium), PathBuf::from("/data/water.json"));
        let v = s.sweep.values().unwrap();
        assert_eq!(v.len(), 4);
        assert_eq!(v[0], 5e-9);
        assert_eq!(v[3], 1e-7);
        assert!((v[1] / v[0] - v[2] / v[1]).abs() < 1e-12);
        assert!(s.columns().contains(&Column::Ratio));
        assert!(!s.columns().contains(&Column::F));
    }

    #[test]
    fn degenerate_sweep_names_the_field() {
        let text = SLABS.replace("max = \"100 nm\"", "max = \"5 nm\"");
        match Scenario::from_toml(&text, ".") {
            Err(CasimirError::Config { field, .. }) => assert_eq!(field, "sweep.max"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_inconsistent_inputs() {
        let cases = [
            SLABS.replace("min = \"5 nm\"", "min = 5.0"),
            SLABS.replace("salt_mM = 150.0", "salt_mM = 150.0\ndebye_length = \"1 nm\""),
            SLABS.replace("width = \"6 nm\"", ""),
            SLABS.replace("points = 4", "points = 1"),
            SLABS.replace("temperature = 293.0", "temperature = -1.0"),
            SLABS.replace("kind = \"slabs\"", "kind = \"planar\""),
            SLABS.replace("points = 4", "points = 4\noutputs = [\"f\"]"),
            SLABS.replace("variable = \"gap\"", "variable = \"width\"")
                .replace("kind = \"slabs\"\nwidth = \"6 nm\"", "kind = \"planar\"\ngap = \"1 nm\""),
        ];
        for text in cases {
            assert!(Scenario::from_toml(&text, ".").is_err(), "{text}");
        }
    }

    #[test]
    fn linear_spacing_and_salt_bounds() {
        let text = SLABS
            .replace("variable = \"gap\"", "variable = \"salt\"")
            .replace("min = \"5 nm\"", "min = 10.0")
            .replace("max = \"100 nm\"", "max = 40.0")
            .replace("points = 4", "points = 4\nspacing = \"linear\"")
            .replace("width = \"6 nm\"", "width = \"6 nm\"\ngap = \"10 nm\"");
        let s = Scenario::from_toml(&text, ".").unwrap();
        assert_eq!(s.sweep.values().unwrap(), vec![10.0, 20.0, 30.0, 40.0]);
    }
}
