//! Physical-layer models: keyhole antenna gains, Nakagami-m fading, thermal
//! noise, composite link gains and SINR.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{invalid, Error, Result};
use crate::units::{dbm_to_watts, linear_to_db};

/// Boltzmann constant as used in the link budget, J/K.
pub const BOLTZMANN: f64 = 1.38e-23;

/// Main-lobe and side-lobe gains for a beam width (rad) and main-to-side-lobe
/// ratio (linear). Radiated power integrates to one.
pub fn derive_antenna_gains(beam_width: f64, msr: f64) -> Result<(f64, f64)> {
    if !(beam_width > 0.0 && beam_width < 2.0 * PI) {
        return Err(invalid("beam_width", format!("{beam_width} rad is outside (0, 2pi)")));
    }
    if !(msr >= 1.0) || !msr.is_finite() {
        return Err(invalid("msr", format!("{msr} must be a finite ratio >= 1")));
    }
    let g_min = 1.0 / ((msr - 1.0) * beam_width + 2.0 * PI);
    Ok((msr * g_min, g_min))
}

/// Sectorized ("keyhole") antenna: constant gain inside the main lobe,
/// constant side-lobe gain elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaPattern {
    beam_width: f64,
    msr: f64,
    g_max: f64,
    g_min: f64,
}

impl AntennaPattern {
    pub fn new(beam_width: f64, msr: f64) -> Result<Self> {
        let (g_max, g_min) = derive_antenna_gains(beam_width, msr)?;
        Ok(Self {
            beam_width,
            msr,
            g_max,
            g_min,
        })
    }

    pub fn beam_width(&self) -> f64 {
        self.beam_width
    }

    pub fn msr(&self) -> f64 {
        self.msr
    }

    pub fn g_max(&self) -> f64 {
        self.g_max
    }

    pub fn g_min(&self) -> f64 {
        self.g_min
    }

    /// Gain at an angular offset from boresight. The lobe edge belongs to the
    /// main lobe.
    pub fn gain(&self, offset: f64) -> f64 {
        if offset.abs() <= self.beam_width / 2.0 {
            self.g_max
        } else {
            self.g_min
        }
    }

    /// Total radiated power, `beam_width * g_max + (2pi - beam_width) * g_min`.
    pub fn radiated_power(&self) -> f64 {
        self.beam_width * self.g_max + (2.0 * PI - self.beam_width) * self.g_min
    }
}

/// Nakagami-m shape `mu` and spread `omega = E[h^2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingParams {
    pub mu: f64,
    pub omega: f64,
}

impl FadingParams {
    pub fn new(mu: f64, omega: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(invalid("mu", format!("{mu} must be positive")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(invalid("omega", format!("{omega} must be positive")));
        }
        Ok(Self { mu, omega })
    }
}

/// Sampler for Nakagami-m amplitudes. The power `h^2` is Gamma(mu, omega/mu)
/// distributed, which reproduces `E[h^2] = omega` and `Var(h^2) = omega^2/mu`.
#[derive(Debug, Clone)]
pub struct NakagamiFading {
    params: FadingParams,
    power: Gamma<f64>,
}

impl NakagamiFading {
    pub fn new(params: FadingParams) -> Self {
        let power = Gamma::new(params.mu, params.omega / params.mu)
            .expect("validated Nakagami parameters give a valid gamma law");
        Self { params, power }
    }

    pub fn params(&self) -> FadingParams {
        self.params
    }

    /// One draw of the power gain `|h|^2`.
    pub fn sample_power<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.power.sample(rng)
    }

    /// One draw of the amplitude `h`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_power(rng).sqrt()
    }
}

/// Convenience wrapper for a single amplitude draw.
pub fn sample_fading<R: Rng + ?Sized>(params: FadingParams, rng: &mut R) -> f64 {
    NakagamiFading::new(params).sample(rng)
}

/// Receiver thermal noise over the band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub noise_figure_db: f64,
    pub temperature_k: f64,
    pub bandwidth_hz: f64,
    pub sigma2_watts: f64,
}

impl NoiseModel {
    pub fn sigma2_dbm(&self) -> f64 {
        noise_dbm(self.noise_figure_db, self.temperature_k, self.bandwidth_hz)
    }
}

fn noise_dbm(nr_db: f64, temperature_k: f64, bandwidth_hz: f64) -> f64 {
    linear_to_db(BOLTZMANN * temperature_k * 1e3) + nr_db + linear_to_db(bandwidth_hz)
}

/// `sigma^2 (dBm) = 10 lg(k_B T0 1e3) + NR + 10 lg W`.
pub fn noise_power(nr_db: f64, temperature_k: f64, bandwidth_hz: f64) -> Result<NoiseModel> {
    if !(bandwidth_hz > 0.0 && bandwidth_hz.is_finite()) {
        return Err(invalid("bandwidth", format!("{bandwidth_hz} Hz must be positive")));
    }
    if !(temperature_k > 0.0 && temperature_k.is_finite()) {
        return Err(invalid("temperature", format!("{temperature_k} K must be positive")));
    }
    if !nr_db.is_finite() {
        return Err(invalid("noise_figure", "must be finite"));
    }
    let sigma2_watts = dbm_to_watts(noise_dbm(nr_db, temperature_k, bandwidth_hz));
    Ok(NoiseModel {
        noise_figure_db: nr_db,
        temperature_k,
        bandwidth_hz,
        sigma2_watts,
    })
}

/// Composite gain `hbar^2 = G_UE * G_BS * |h|^2 * d^-eta` of one BS-UE pair.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LinkGain(pub f64);

impl LinkGain {
    pub fn hbar2(self) -> f64 {
        self.0
    }
}

pub fn composite_gain(
    g_ue: f64,
    g_bs: f64,
    fading_power: f64,
    distance: f64,
    eta: f64,
) -> Result<LinkGain> {
    if !(distance > 0.0) {
        return Err(Error::Geometry(format!(
            "BS and UE are coincident (distance {distance} m)"
        )));
    }
    Ok(LinkGain(g_ue * g_bs * fading_power * distance.powf(-eta)))
}

/// SINR seen by one UE together with the equivalent gain `g` such that
/// `sinr = g * p_serving`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sinr {
    pub sinr: f64,
    pub equivalent_gain: f64,
    /// Interference plus noise, Watts.
    pub interference: f64,
}

/// SINR at a UE given the composite gains from every BS (`gains[l]` is the
/// gain from BS `l` to this UE), every BS's transmit power, and the noise
/// power. All BSs other than `serving` interfere.
pub fn sinr(gains: &[f64], serving: usize, powers: &[f64], sigma2: f64) -> Sinr {
    debug_assert_eq!(gains.len(), powers.len());
    let interference = gains
        .iter()
        .zip(powers)
        .enumerate()
        .filter(|&(l, _)| l != serving)
        .map(|(_, (g, p))| g * p)
        .sum::<f64>()
        + sigma2;
    let equivalent_gain = gains[serving] / interference;
    Sinr {
        sinr: equivalent_gain * powers[serving],
        equivalent_gain,
        interference,
    }
}
