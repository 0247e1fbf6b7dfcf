//! SI-unit layer: coupling strength, graviton number from strain, and the
//! thermal-noise conditions. Double precision only, since the Planck-scale
//! magnitudes fall outside the `f32` range.

use std::f64::consts::PI;

use crate::gaussian::GwSignalParams;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub g: f64,
    pub c: f64,
    pub hbar: f64,
    pub k_b: f64,
    pub t_p: f64,
}

impl PhysicalConstants {
    /// CODATA 2018 values.
    pub fn si() -> Self {
        Self::new(6.674_30e-11, 299_792_458.0, 1.054_571_817e-34, 1.380_649e-23)
    }

    /// Derives the Planck time from `(G, c, ħ)`.
    pub fn new(g: f64, c: f64, hbar: f64, k_b: f64) -> Self {
        Self {
            g,
            c,
            hbar,
            k_b,
            t_p: (hbar * g / c.powi(5)).sqrt(),
        }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::si()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorConfig {
    /// kg
    pub mass: f64,
    /// m
    pub length: f64,
    /// rad/s
    pub omega_ell: f64,
    /// Odd mode index.
    pub ell: u32,
    /// m³
    pub gw_volume: f64,
    pub quality_factor: f64,
    /// K
    pub temperature: f64,
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ell.is_multiple_of(2) {
            return Err(Error::param("ell", format!("mode index must be odd, got {}", self.ell)));
        }
        let positive = [
            ("mass", self.mass),
            ("length", self.length),
            ("omega_ell", self.omega_ell),
            ("gw_volume", self.gw_volume),
            ("quality_factor", self.quality_factor),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be positive and finite"));
            }
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::param("temperature", "must be non-negative and finite"));
        }
        Ok(())
    }
}

/// `γ_g = √(8πGMν³L³ / (ω_ℓ c² V π⁴ ℓ⁴))` for odd `ℓ`.
pub fn coupling_gamma(k: &PhysicalConstants, cfg: &DetectorConfig, nu: f64) -> Result<f64> {
    cfg.validate()?;
    if !(nu > 0.0) {
        return Err(Error::param("nu", "must be positive"));
    }
    let ell4 = f64::from(cfg.ell).powi(4);
    let num = 8.0 * PI * k.g * cfg.mass * nu.powi(3) * cfg.length.powi(3);
    let den = cfg.omega_ell * k.c * k.c * cfg.gw_volume * PI.powi(4) * ell4;
    Ok((num / den).sqrt())
}

/// `n_grav = h² / (32π ν² t_P²)` with `ν` in rad/s, evaluated in log space.
pub fn graviton_flux(k: &PhysicalConstants, h_strain: f64, nu: f64) -> Result<f64> {
    if !(h_strain > 0.0) || !(nu > 0.0) {
        return Err(Error::param("h_strain", "strain and frequency must be positive"));
    }
    let ln = 2.0 * h_strain.ln() - (32.0 * PI).ln() - 2.0 * nu.ln() - 2.0 * k.t_p.ln();
    Ok(ln.exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NqDecomposition {
    pub n_grav: f64,
    pub n_q: f64,
    pub fraction: f64,
    /// `n_q/n_grav ≤ 0.01`: the signal is mostly coherent.
    pub mostly_coherent: bool,
}

pub fn nq_decomposition(p: &GwSignalParams<f64>) -> Result<NqDecomposition> {
    let n_q = p.n_q().max(0.0);
    let n_grav = p.alpha.norm_sqr() + n_q;
    if n_grav == 0.0 {
        return Err(Error::param("alpha", "vacuum signal has no graviton number to split"));
    }
    let fraction = n_q / n_grav;
    Ok(NqDecomposition {
        n_grav,
        n_q,
        fraction,
        mostly_coherent: fraction <= 0.01,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseThresholds {
    /// `k_B T/(ħQ)`, 1/s.
    pub gamma_th: f64,
    /// Interaction time `γt/γ_g`, s.
    pub t: f64,
    /// Thermal occupation of the bar mode.
    pub n_th: f64,
    /// `n_grav (γt)²`.
    pub signal_phonons: f64,
    /// `n_grav(γt)² / (Γ_th t)`.
    pub heating_margin: f64,
    /// `n_grav(γt)² / n_th`.
    pub occupation_margin: f64,
    pub heating_ok: bool,
    pub occupation_ok: bool,
}

/// Margins above one count as satisfied.
pub fn noise_thresholds(
    k: &PhysicalConstants,
    cfg: &DetectorConfig,
    nu: f64,
    gamma_t: f64,
    n_grav: f64,
) -> Result<NoiseThresholds> {
    let gamma_g = coupling_gamma(k, cfg, nu)?;
    let t = gamma_t / gamma_g;
    let gamma_th = k.k_b * cfg.temperature / (k.hbar * cfg.quality_factor);
    let n_th = if cfg.temperature == 0.0 {
        0.0
    } else {
        1.0 / (k.hbar * cfg.omega_ell / (k.k_b * cfg.temperature)).exp_m1()
    };
    let signal_phonons = (n_grav.ln() + 2.0 * gamma_t.ln()).exp();
    let heating_margin = signal_phonons / (gamma_th * t);
    let occupation_margin = signal_phonons / n_th;
    Ok(NoiseThresholds {
        gamma_th,
        t,
        n_th,
        signal_phonons,
        heating_margin,
        occupation_margin,
        heating_ok: heating_margin > 1.0,
        occupation_ok: occupation_margin > 1.0,
    })
}
