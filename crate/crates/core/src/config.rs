//! TOML scenario files.
//!
//! Physical quantities are strings with an explicit unit (`"400 MHz"`,
//! `"39 dBm"`, `"pi/9"`, `"20 dB"`); bare numbers are only accepted for
//! dimensionless values and counts. Quantities keep their original text so a
//! file re-emits exactly as written.

use std::fmt;
use std::path::Path;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::{noise_power, AntennaPattern, FadingParams};
use crate::engine::{Protocol, QueueUnits, Scenario, SimConfig};
use crate::error::{Error, Result};
use crate::mac::ContentionConfig;
use crate::topology::{BsLayout, LayoutParams, Point};
use crate::units::{db_to_linear, dbm_to_watts};

/// Dimension of a [`Quantity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Frequency,
    Power,
    PowerSquared,
    Ratio,
    Length,
    Temperature,
    Angle,
    Bits,
}

impl Kind {
    fn units(self) -> &'static str {
        match self {
            Kind::Frequency => "Hz, kHz, MHz, GHz",
            Kind::Power => "W, mW, dBm, dBW",
            Kind::PowerSquared => "W^2",
            Kind::Ratio => "dB, lin",
            Kind::Length => "m, km",
            Kind::Temperature => "K",
            Kind::Angle => "rad, deg, or a multiple of pi such as pi/9",
            Kind::Bits => "bit",
        }
    }
}

/// A number with a unit, as written in the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quantity(pub String);

impl Quantity {
    pub fn new(text: impl Into<String>) -> Self {
        Self(text.into())
    }

    /// SI value (linear for ratios, radians for angles).
    pub fn value(&self, kind: Kind) -> Result<f64> {
        parse_quantity(&self.0, kind)
    }

    /// A ratio in dB, without a round trip through linear scale.
    pub fn decibels(&self) -> Result<f64> {
        match self.0.trim().strip_suffix("dB").and_then(parse_number) {
            Some(db) => Ok(db),
            None => self.value(Kind::Ratio).map(|x| 10.0 * x.log10()),
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Quantity;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a quantity with a unit, e.g. \"39 dBm\"")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Quantity, E> {
                Ok(Quantity::new(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Quantity, E> {
                Err(E::custom(format!("`{v}` has no unit; write it as a string such as \"{v} m\"")))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Quantity, E> {
                self.visit_i64(v as i64)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Quantity, E> {
                Err(E::custom(format!("`{v}` has no unit; write it as a string such as \"{v} m\"")))
            }
        }
        d.deserialize_any(V)
    }
}

fn bad_quantity(text: &str, kind: Kind) -> Error {
    Error::Config(format!("cannot read `{text}` as {kind:?} (units: {})", kind.units()))
}

fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|x| x.is_finite())
}

/// Longest numeric prefix and the non-empty unit after it: `"20dB"` and
/// `"20 dB"` both give `(20, "dB")`.
fn split_number(t: &str) -> Option<(f64, &str)> {
    t.char_indices()
        .map(|(i, _)| i)
        .chain([t.len()])
        .rev()
        .find_map(|i| parse_number(&t[..i]).map(|x| (x, t[i..].trim())))
        .filter(|(_, unit)| !unit.is_empty())
}

/// `pi`, `pi/9`, `2*pi/3`, `2pi`, `0.5 pi`.
fn parse_pi_multiple(s: &str) -> Option<f64> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let (num, den) = match compact.split_once('/') {
        Some((n, d)) => (n, parse_number(d)?),
        None => (compact.as_str(), 1.0),
    };
    let coef = num.strip_suffix("pi")?.trim_end_matches('*');
    let coef = if coef.is_empty() { 1.0 } else { parse_number(coef)? };
    (den != 0.0).then(|| coef * std::f64::consts::PI / den)
}

/// Parses `text` as a quantity of `kind` into SI units.
pub fn parse_quantity(text: &str, kind: Kind) -> Result<f64> {
    let t = text.trim();
    if kind == Kind::Angle && t.contains("pi") {
        return parse_pi_multiple(t).ok_or_else(|| bad_quantity(text, kind));
    }
    let (x, unit) = split_number(t).ok_or_else(|| bad_quantity(text, kind))?;
    let v = match (kind, unit) {
        (Kind::Frequency, "Hz") => x,
        (Kind::Frequency, "kHz") => x * 1e3,
        (Kind::Frequency, "MHz") => x * 1e6,
        (Kind::Frequency, "GHz") => x * 1e9,
        (Kind::Power, "W") => x,
        (Kind::Power, "mW") => x * 1e-3,
        (Kind::Power, "dBm") => dbm_to_watts(x),
        (Kind::Power, "dBW") => db_to_linear(x),
        (Kind::PowerSquared, "W^2") => x,
        (Kind::Ratio, "dB") => db_to_linear(x),
        (Kind::Ratio, "lin") => x,
        (Kind::Length, "m") => x,
        (Kind::Length, "km") => x * 1e3,
        (Kind::Temperature, "K") => x,
        (Kind::Angle, "rad") => x,
        (Kind::Angle, "deg") => x.to_radians(),
        (Kind::Bits, "bit" | "bits") => x,
        _ => return Err(bad_quantity(text, kind)),
    };
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub num_bs: usize,
    pub num_ues: usize,
    pub grid_side: Quantity,
    pub coverage_radius: Quantity,
    pub min_bs_separation: Quantity,
    /// Explicit BS sites as `[x, y]` pairs; overrides random placement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bs_sites: Option<Vec<[Quantity; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interference_radius: Option<Quantity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioSection {
    pub bandwidth: Quantity,
    pub carrier: Quantity,
    pub p_avg: Quantity,
    pub p_max: Quantity,
    pub path_loss_exponent: f64,
    pub noise_figure: Quantity,
    pub temperature: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FadingSection {
    pub mu: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennaSection {
    pub bs_beam_width: Quantity,
    pub bs_msr: Quantity,
    pub ue_beam_width: Quantity,
    pub ue_msr: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub blocks_per_epoch: usize,
    pub block_slots: usize,
    pub feedback_subslots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovSection {
    pub v: f64,
    pub queue_units: String,
    pub gamma_floor: f64,
    pub throughput_floor: Quantity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    pub epsilon: Quantity,
    pub max_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContentionSection {
    pub p_c: f64,
    pub cw_min_slots: usize,
    pub cw_max_slots: usize,
    pub tx_duration_slots: usize,
    pub sensing_slots: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub epochs: usize,
    pub seed: u64,
    pub protocol: String,
}

/// Whole scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub network: NetworkSection,
    pub radio: RadioSection,
    pub fading: FadingSection,
    pub antenna: AntennaSection,
    pub schedule: ScheduleSection,
    pub lyapunov: LyapunovSection,
    pub game: GameSection,
    pub contention: ContentionSection,
    pub run: RunSection,
}

impl Default for ConfigFile {
    fn default() -> Self {
        let q = Quantity::new;
        Self {
            network: NetworkSection {
                num_bs: 10,
                num_ues: 100,
                grid_side: q("800 m"),
                coverage_radius: q("150 m"),
                min_bs_separation: q("150 m"),
                bs_sites: None,
                interference_radius: None,
            },
            radio: RadioSection {
                bandwidth: q("400 MHz"),
                carrier: q("37 GHz"),
                p_avg: q("38.13 dBm"),
                p_max: q("39 dBm"),
                path_loss_exponent: 4.0,
                noise_figure: q("1.5 dB"),
                temperature: q("290 K"),
            },
            fading: FadingSection { mu: 1.0, omega: 0.001 },
            antenna: AntennaSection {
                bs_beam_width: q("pi/9"),
                bs_msr: q("20 dB"),
                ue_beam_width: q("pi/18"),
                ue_msr: q("10 dB"),
            },
            schedule: ScheduleSection {
                blocks_per_epoch: 8,
                block_slots: 50,
                feedback_subslots: 0,
            },
            lyapunov: LyapunovSection {
                v: 1000.0,
                queue_units: "block".into(),
                gamma_floor: 1e-6,
                throughput_floor: q("1 bit"),
            },
            game: GameSection {
                epsilon: q("1e-6 W^2"),
                max_iterations: 50,
            },
            contention: ContentionSection {
                p_c: 0.1,
                cw_min_slots: 20,
                cw_max_slots: 200,
                tx_duration_slots: 2,
                sensing_slots: 1,
            },
            run: RunSection {
                epochs: 2000,
                seed: 1,
                protocol: "game".into(),
            },
        }
    }
}

impl ConfigFile {
    /// Physical scenario and run settings described by the file.
    pub fn resolve(&self) -> Result<(Scenario, SimConfig)> {
        let n = &self.network;
        let r = &self.radio;
        let a = &self.antenna;
        let bs_layout = match &n.bs_sites {
            Some(sites) => BsLayout::Fixed(
                sites
                    .iter()
                    .map(|[x, y]| Ok(Point::new(x.value(Kind::Length)?, y.value(Kind::Length)?)))
                    .collect::<Result<_>>()?,
            ),
            None => BsLayout::Uniform {
                min_separation: n.min_bs_separation.value(Kind::Length)?,
            },
        };
        let bandwidth_hz = r.bandwidth.value(Kind::Frequency)?;
        let scenario = Scenario {
            layout: LayoutParams {
                grid_side: n.grid_side.value(Kind::Length)?,
                num_bs: n.num_bs,
                num_ues: n.num_ues,
                coverage_radius: n.coverage_radius.value(Kind::Length)?,
                bs_layout,
            },
            bandwidth_hz,
            carrier_hz: r.carrier.value(Kind::Frequency)?,
            p_avg: r.p_avg.value(Kind::Power)?,
            p_max: r.p_max.value(Kind::Power)?,
            path_loss_exponent: r.path_loss_exponent,
            fading: FadingParams::new(self.fading.mu, self.fading.omega)?,
            bs_antenna: AntennaPattern::new(a.bs_beam_width.value(Kind::Angle)?, a.bs_msr.value(Kind::Ratio)?)?,
            ue_antenna: AntennaPattern::new(a.ue_beam_width.value(Kind::Angle)?, a.ue_msr.value(Kind::Ratio)?)?,
            noise: noise_power(
                r.noise_figure.decibels()?,
                r.temperature.value(Kind::Temperature)?,
                bandwidth_hz,
            )?,
            interference_radius: n.interference_radius.as_ref().map(|q| q.value(Kind::Length)).transpose()?,
        };
        let c = &self.contention;
        let config = SimConfig {
            epochs: self.run.epochs,
            blocks_per_epoch: self.schedule.blocks_per_epoch,
            slots_per_block: self.schedule.block_slots,
            v: self.lyapunov.v,
            protocol: self.run.protocol.parse::<Protocol>()?,
            feedback_subslots: self.schedule.feedback_subslots,
            seed: self.run.seed,
            gamma_floor: self.lyapunov.gamma_floor,
            throughput_floor: self.lyapunov.throughput_floor.value(Kind::Bits)?,
            epsilon: self.game.epsilon.value(Kind::PowerSquared)?,
            max_iterations: self.game.max_iterations,
            contention: ContentionConfig {
                p_c: c.p_c,
                cw_min: c.cw_min_slots,
                cw_max: c.cw_max_slots,
                tx_duration: c.tx_duration_slots,
                sensing_slots: c.sensing_slots,
            },
            queue_units: self.lyapunov.queue_units.parse::<QueueUnits>()?,
            record_blocks: false,
        };
        scenario.validate()?;
        config.validate()?;
        Ok((scenario, config))
    }
}

/// Parses a scenario file.
pub fn parse_config(text: &str) -> Result<ConfigFile> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

pub fn load_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn float(x: f64) -> String {
    // Debug keeps a decimal point or exponent, so TOML reads a float back.
    format!("{x:?}")
}

fn quoted(q: &Quantity) -> String {
    format!("\"{}\"", q.0.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Commented TOML for `cfg`.
pub fn emit_config(cfg: &ConfigFile) -> String {
    let n = &cfg.network;
    let r = &cfg.radio;
    let a = &cfg.antenna;
    let s = &cfg.schedule;
    let l = &cfg.lyapunov;
    let c = &cfg.contention;
    let mut out = String::new();
    let mut line = |text: String| {
        out.push_str(&text);
        out.push('\n');
    };
    line("# beamsched scenario".into());
    line("#".into());
    line("# Physical values are strings with a unit. Angles may be written as".into());
    line("# multiples of pi (\"pi/9\"), ratios in dB or \"lin\", powers in W or dBm.".into());
    line(String::new());
    line("[network]".into());
    line(format!("num_bs = {}", n.num_bs));
    line("# must be a multiple of num_bs; UEs are split evenly".into());
    line(format!("num_ues = {}", n.num_ues));
    line("# side of the square deployment area".into());
    line(format!("grid_side = {}", quoted(&n.grid_side)));
    line("# UEs are dropped uniformly in a disk of this radius around their BS".into());
    line(format!("coverage_radius = {}", quoted(&n.coverage_radius)));
    line(format!("min_bs_separation = {}", quoted(&n.min_bs_separation)));
    match &n.bs_sites {
        Some(sites) => {
            let pairs: Vec<String> = sites.iter().map(|[x, y]| format!("[{}, {}]", quoted(x), quoted(y))).collect();
            line(format!("bs_sites = [{}]", pairs.join(", ")));
        }
        None => line("# bs_sites = [[\"100 m\", \"100 m\"], ...]  fixes the BS positions".into()),
    }
    match &n.interference_radius {
        Some(q) => line(format!("interference_radius = {}", quoted(q))),
        None => line("# interference_radius = \"300 m\"  ignores farther BSs; \"0 m\" removes all interference".into()),
    }
    line(String::new());
    line("[radio]".into());
    line(format!("bandwidth = {}", quoted(&r.bandwidth)));
    line(format!("carrier = {}", quoted(&r.carrier)));
    line("# average and peak transmit power per BS".into());
    line(format!("p_avg = {}", quoted(&r.p_avg)));
    line(format!("p_max = {}", quoted(&r.p_max)));
    line(format!("path_loss_exponent = {}", float(r.path_loss_exponent)));
    line(format!("noise_figure = {}", quoted(&r.noise_figure)));
    line(format!("temperature = {}", quoted(&r.temperature)));
    line(String::new());
    line("# Nakagami-m small-scale fading: shape mu, mean power omega".into());
    line("[fading]".into());
    line(format!("mu = {}", float(cfg.fading.mu)));
    line(format!("omega = {}", float(cfg.fading.omega)));
    line(String::new());
    line("# keyhole patterns: beam width and main-to-side-lobe ratio".into());
    line("[antenna]".into());
    line(format!("bs_beam_width = {}", quoted(&a.bs_beam_width)));
    line(format!("bs_msr = {}", quoted(&a.bs_msr)));
    line(format!("ue_beam_width = {}", quoted(&a.ue_beam_width)));
    line(format!("ue_msr = {}", quoted(&a.ue_msr)));
    line(String::new());
    line("[schedule]".into());
    line(format!("blocks_per_epoch = {}", s.blocks_per_epoch));
    line(format!("block_slots = {}", s.block_slots));
    line("# sub-slots (of 20) per slot spent on feedback by the game scheme".into());
    line(format!("feedback_subslots = {}", s.feedback_subslots));
    line(String::new());
    line("[lyapunov]".into());
    line(format!("v = {}", float(l.v)));
    line("# \"block\": queues count blocks and nats/s/Hz; \"raw\": slots and W*log(1+SINR)".into());
    line(format!("queue_units = \"{}\"", l.queue_units));
    line(format!("gamma_floor = {}", float(l.gamma_floor)));
    line("# floor inside the log utility".into());
    line(format!("throughput_floor = {}", quoted(&l.throughput_floor)));
    line(String::new());
    line("[game]".into());
    line("# stop once the squared power step falls below this".into());
    line(format!("epsilon = {}", quoted(&cfg.game.epsilon)));
    line(format!("max_iterations = {}", cfg.game.max_iterations));
    line(String::new());
    line("[contention]".into());
    line("# p-persistent transmit probability".into());
    line(format!("p_c = {}", float(c.p_c)));
    line("# CSMA/CA windows and grant length".into());
    line(format!("cw_min_slots = {}", c.cw_min_slots));
    line(format!("cw_max_slots = {}", c.cw_max_slots));
    line(format!("tx_duration_slots = {}", c.tx_duration_slots));
    line(format!("sensing_slots = {}", c.sensing_slots));
    line(String::new());
    line("[run]".into());
    line(format!("epochs = {}", cfg.run.epochs));
    line(format!("seed = {}", cfg.run.seed));
    line("# game, ideal, p-persistent, csma, p-persistent-random, csma-random".into());
    line(format!("protocol = \"{}\"", cfg.run.protocol));
    out
}

/// The default scenario as commented TOML.
pub fn default_config_text() -> String {
    emit_config(&ConfigFile::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn quantities() {
        assert_eq!(parse_quantity("400 MHz", Kind::Frequency).unwrap(), 400e6);
        assert!((parse_quantity("pi/9", Kind::Angle).unwrap() - PI / 9.0).abs() < 1e-15);
        assert!((parse_quantity("2*pi/3", Kind::Angle).unwrap() - 2.0 * PI / 3.0).abs() < 1e-15);
        assert_eq!(parse_quantity("pi", Kind::Angle).unwrap(), PI);
        assert!((parse_quantity("20 deg", Kind::Angle).unwrap() - PI / 9.0).abs() < 1e-15);
        assert!((parse_quantity("20 dB", Kind::Ratio).unwrap() - 100.0).abs() < 1e-12);
        assert!((parse_quantity("30 dBm", Kind::Power).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(parse_quantity("1.5 km", Kind::Length).unwrap(), 1500.0);
        assert_eq!(parse_quantity("1e-6 W^2", Kind::PowerSquared).unwrap(), 1e-6);
        assert!((parse_quantity("10dB", Kind::Ratio).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn quantities_need_matching_units() {
        for (t, k) in [
            ("400", Kind::Frequency),
            ("400 m", Kind::Frequency),
            ("0.349", Kind::Angle),
            ("pi/0", Kind::Angle),
            ("twenty dB", Kind::Ratio),
            ("39 dBm", Kind::Length),
        ] {
            assert!(parse_quantity(t, k).is_err(), "{t}");
        }
    }

    #[test]
    fn default_round_trips() {
        let text = default_config_text();
        let parsed = parse_config(&text).unwrap();
        assert_eq!(parsed, ConfigFile::default());
        assert_eq!(emit_config(&parsed), text);
    }

    #[test]
    fn round_trip_with_optional_fields() {
        let mut cfg = ConfigFile::default();
        cfg.network.bs_sites = Some(vec![[Quantity::new("1 m"), Quantity::new("2 m")]]);
        cfg.network.interference_radius = Some(Quantity::new("0 m"));
        cfg.lyapunov.v = 123.456;
        let text = emit_config(&cfg);
        let parsed = parse_config(&text).unwrap();
        assert_eq!(parsed, cfg);
        assert_eq!(emit_config(&parsed), text);
    }

    #[test]
    fn default_resolves_to_standard_scenario() {
        let (sc, cfg) = ConfigFile::default().resolve().unwrap();
        assert!((sc.noise.sigma2_dbm() - (-86.46)).abs() < 0.01);
        assert!((sc.p_avg - 6.5).abs() / 6.5 < 5e-3);
        assert!((sc.p_max - 7.943).abs() < 1e-3);
        assert!((sc.bs_antenna.beam_width() - PI / 9.0).abs() < 1e-15);
        assert_eq!(cfg.epoch_len(), 400);
        assert_eq!(cfg.protocol, Protocol::Game);
        assert_eq!(cfg.epsilon, 1e-6);
        let standard = Scenario::standard();
        assert_eq!(sc.noise, standard.noise);
        assert_eq!(sc.bs_antenna, standard.bs_antenna);
        assert_eq!(sc.layout, standard.layout);
    }

    #[test]
    fn unitless_physical_value_rejected() {
        let text = default_config_text().replace("bandwidth = \"400 MHz\"", "bandwidth = 400000000");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("no unit"), "{err}");
    }

    #[test]
    fn unknown_field_rejected() {
        let text = default_config_text().replace("[fading]\n", "[fading]\nshape = 2.0\n");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn bad_protocol_rejected_on_resolve() {
        let mut cfg = ConfigFile::default();
        cfg.run.protocol = "aloha".into();
        assert!(cfg.resolve().is_err());
    }
}
