//! Physical constants and unit conversions. Internal unit system is atomic
//! units throughout.

/// 1 cm⁻¹ in hartree.
pub const HARTREE_PER_WAVENUMBER: f64 = 4.556335e-6;
/// Boltzmann constant in hartree per kelvin.
pub const BOLTZMANN_HARTREE_PER_KELVIN: f64 = 3.166811563e-6;
/// One atomic unit of time in femtoseconds.
pub const FS_PER_AU_TIME: f64 = 0.02418884;
/// Proton mass in electron masses.
pub const PROTON_MASS: f64 = 1836.15;

pub fn wavenumber_to_hartree(cm: f64) -> f64 {
    cm * HARTREE_PER_WAVENUMBER
}

pub fn hartree_to_wavenumber(e: f64) -> f64 {
    e / HARTREE_PER_WAVENUMBER
}

/// Inverse temperature in hartree⁻¹.
pub fn beta_from_kelvin(kelvin: f64) -> f64 {
    1.0 / (BOLTZMANN_HARTREE_PER_KELVIN * kelvin)
}

pub fn fs_to_au(fs: f64) -> f64 {
    fs / FS_PER_AU_TIME
}

pub fn au_to_fs(t: f64) -> f64 {
    t * FS_PER_AU_TIME
}
