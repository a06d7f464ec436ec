//! Unit-tagged physical quantities in configuration files.

use ccqme_core::units;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Energy,
    Temperature,
    Time,
    Length,
    Mass,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::Energy => "energy",
            Dimension::Temperature => "temperature",
            Dimension::Time => "time",
            Dimension::Length => "length",
            Dimension::Mass => "mass",
        })
    }
}

/// `{ value = 300, unit = "kelvin" }`. Units: `hartree`, `cm-1`, `kelvin`,
/// `fs`, `au`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    #[serde(rename = "hartree")]
    Hartree,
    #[serde(rename = "cm-1")]
    Wavenumber,
    #[serde(rename = "kelvin")]
    Kelvin,
    #[serde(rename = "fs")]
    Femtosecond,
    #[serde(rename = "au")]
    Atomic,
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::Hartree => "hartree",
            Unit::Wavenumber => "cm-1",
            Unit::Kelvin => "kelvin",
            Unit::Femtosecond => "fs",
            Unit::Atomic => "au",
        })
    }
}

impl Quantity {
    pub const fn new(value: f64, unit: Unit) -> Self {
        Self { value, unit }
    }

    /// Value in atomic units (kelvin stays kelvin for temperatures).
    pub fn to_atomic(&self, dim: Dimension) -> Result<f64, String> {
        let v = self.value;
        let bad = || Err(format!("unit '{}' is not a valid {dim} unit", self.unit));
        match (dim, self.unit) {
            (Dimension::Energy, Unit::Hartree | Unit::Atomic) => Ok(v),
            (Dimension::Energy, Unit::Wavenumber) => Ok(units::wavenumber_to_hartree(v)),
            (Dimension::Energy, Unit::Kelvin) => Ok(v * units::BOLTZMANN_HARTREE_PER_KELVIN),
            (Dimension::Temperature, Unit::Kelvin) => Ok(v),
            (Dimension::Time, Unit::Femtosecond) => Ok(units::fs_to_au(v)),
            (Dimension::Time, Unit::Atomic) => Ok(v),
            (Dimension::Length | Dimension::Mass, Unit::Atomic) => Ok(v),
            _ => bad(),
        }
    }
}
