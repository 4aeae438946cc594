//! Catalog of measured power-law conductivities `κ ∝ T^ω`.
//!
//! The model is dimensionless; no unit conversion is attempted. Each entry records the
//! measured regime it came from. An entry with ω ≤ −1 cannot seed a self-similar family.

use serde::{Deserialize, Serialize};

/// Either a single exponent or a measured range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OmegaSpec {
    Value(f64),
    Interval([f64; 2]),
}

impl OmegaSpec {
    /// A representative exponent: the value itself, or the interval midpoint.
    pub fn representative(&self) -> f64 {
        match *self {
            OmegaSpec::Value(w) => w,
            OmegaSpec::Interval([lo, hi]) => 0.5 * (lo + hi),
        }
    }

    pub fn contains(&self, omega: f64) -> bool {
        match *self {
            OmegaSpec::Value(w) => w == omega,
            OmegaSpec::Interval([lo, hi]) => (lo..=hi).contains(&omega),
        }
    }

    fn lower(&self) -> f64 {
        match *self {
            OmegaSpec::Value(w) => w,
            OmegaSpec::Interval([lo, _]) => lo,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialPreset {
    pub name: String,
    pub omega: OmegaSpec,
    pub usable: bool,
    #[serde(rename = "note")]
    pub validity_note: String,
    /// Measured law and regime, e.g. `kappa ~ T^2.5 for T < 50 K`.
    #[serde(skip_serializing, default)]
    pub source: String,
}

fn preset(name: &str, omega: OmegaSpec, note: &str, source: &str) -> MaterialPreset {
    MaterialPreset {
        name: name.to_string(),
        usable: omega.lower() > -1.0,
        omega,
        validity_note: note.to_string(),
        source: source.to_string(),
    }
}

pub fn list_material_presets() -> Vec<MaterialPreset> {
    vec![
        preset(
            "nanotube_low_T",
            OmegaSpec::Value(2.5),
            "carbon nanotubes, low-temperature regime T < 50 K",
            "kappa ~ T^2.5 for T < 50 K",
        ),
        preset(
            "nanotube_mid_T",
            OmegaSpec::Value(2.0),
            "carbon nanotubes, 50 K < T < 150 K",
            "kappa ~ T^2 for 50 K < T < 150 K",
        ),
        preset(
            "nanotube_high_T",
            OmegaSpec::Value(-1.0),
            "carbon nanotubes above the conductivity maximum near 320 K; omega = -1 lies \
             outside the self-similar family (omega > -1 required)",
            "kappa ~ 1/T at high temperature",
        ),
        preset(
            "graphene_encased",
            OmegaSpec::Interval([1.5, 2.0]),
            "encased graphene, T < 150 K; exponent only bracketed by measurement",
            "kappa ~ T^b with 1.5 < b < 2 for T < 150 K",
        ),
        preset(
            "metal_wiedemann_franz",
            OmegaSpec::Value(1.0),
            "pure metals via kappa = sigma L T (Lorenz number L ~ 2.44e-8 W Ohm K^-2); \
             omega = 1 assumes the electrical conductivity sigma is temperature independent",
            "Wiedemann-Franz law kappa = sigma L T",
        ),
    ]
}

pub fn lookup_preset(name: &str) -> Option<MaterialPreset> {
    list_material_presets().into_iter().find(|p| p.name == name)
}
