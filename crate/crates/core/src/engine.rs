//! Epoch, block and slot simulation loop.
//!
//! Every epoch the channel is redrawn, each BS picks a UE, auxiliary
//! variables are solved, the chosen protocol fills the slots, and the virtual
//! queues are advanced. Queue arithmetic runs in configurable units (see
//! [`QueueUnits`]); reported throughput is always `slots * W * log(1 + SINR)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use std::f64::consts::PI;

use crate::channel::{
    composite_gain, noise_power, AntennaPattern, FadingParams, NakagamiFading, NoiseModel,
};
use crate::error::{invalid, Error, Result};
use crate::game::{best_response, GameInstance, ParallelUpdate, MAX_P_MATRIX_ORDER};
use crate::lyapunov::{
    aux_cap, game_ideal_gap, network_utility, pricing_factors, solve_aux, RunningMean,
    VirtualQueues,
};
use crate::mac::{
    baseline_power, csma_schedule, p_persistent_schedule, random_power, ContentionConfig,
    TransmissionSchedule,
};
use crate::rng::{substream, Stream};
use crate::topology::{
    generate_placement, link_gain, select_ues, BsLayout, LayoutParams, Placement, PointingState,
};
use crate::units::{db_to_linear, dbm_to_watts};

/// Sub-slots per slot in the feedback model.
pub const SUBSLOTS_PER_SLOT: usize = 20;

/// Smallest composite gain used where a zero would divide.
const GAIN_FLOOR: f64 = f64::MIN_POSITIVE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Game,
    Ideal,
    PPersistent,
    Csma,
    PPersistentRandom,
    CsmaRandom,
}

impl Protocol {
    pub const ALL: [Protocol; 6] = [
        Protocol::Game,
        Protocol::Ideal,
        Protocol::PPersistent,
        Protocol::Csma,
        Protocol::PPersistentRandom,
        Protocol::CsmaRandom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Game => "game",
            Protocol::Ideal => "ideal",
            Protocol::PPersistent => "p-persistent",
            Protocol::Csma => "csma",
            Protocol::PPersistentRandom => "p-persistent-random",
            Protocol::CsmaRandom => "csma-random",
        }
    }

    /// Powers come from the queue-driven rule rather than a random draw.
    pub fn optimized_power(self) -> bool {
        !matches!(self, Protocol::PPersistentRandom | Protocol::CsmaRandom)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Protocol::ALL.iter().map(|p| p.name()).collect();
                invalid("protocol", format!("unknown protocol `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

/// Units of the virtual-queue arithmetic.
///
/// `Block` measures time in blocks and rate in nats per second per Hz, so a
/// queue holds numbers of order one to a few hundred and `V` of a few hundred
/// to a few thousand gives a meaningful trade-off. `Raw` uses slots and
/// `W log(1 + SINR)` directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueueUnits {
    Block,
    Raw,
}

impl FromStr for QueueUnits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "block" => Ok(QueueUnits::Block),
            "raw" => Ok(QueueUnits::Raw),
            _ => Err(invalid("queue_units", format!("`{s}` is neither `block` nor `raw`"))),
        }
    }
}

impl QueueUnits {
    pub fn name(self) -> &'static str {
        match self {
            QueueUnits::Block => "block",
            QueueUnits::Raw => "raw",
        }
    }
}

/// Physical description of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub layout: LayoutParams,
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
    pub p_avg: f64,
    pub p_max: f64,
    pub path_loss_exponent: f64,
    pub fading: FadingParams,
    pub bs_antenna: AntennaPattern,
    pub ue_antenna: AntennaPattern,
    pub noise: NoiseModel,
    /// BSs farther than this from a UE do not interfere with it.
    pub interference_radius: Option<f64>,
}

impl Scenario {
    /// Ten BSs with ten UEs each on an 800 m square, 400 MHz at 37 GHz,
    /// 20 dB / pi/9 BS beams and 10 dB / pi/18 UE beams.
    pub fn standard() -> Self {
        let bandwidth_hz = 400e6;
        Self {
            layout: LayoutParams {
                grid_side: 800.0,
                num_bs: 10,
                num_ues: 100,
                coverage_radius: 150.0,
                bs_layout: BsLayout::Uniform { min_separation: 150.0 },
            },
            bandwidth_hz,
            carrier_hz: 37e9,
            p_avg: dbm_to_watts(38.13),
            p_max: dbm_to_watts(39.0),
            path_loss_exponent: 4.0,
            fading: FadingParams { mu: 1.0, omega: 0.001 },
            bs_antenna: AntennaPattern::new(PI / 9.0, db_to_linear(20.0)).expect("valid pattern"),
            ue_antenna: AntennaPattern::new(PI / 18.0, db_to_linear(10.0)).expect("valid pattern"),
            noise: noise_power(1.5, 290.0, bandwidth_hz).expect("valid noise"),
            interference_radius: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.layout.validate()?;
        if !(self.p_max > 0.0) || !(self.p_avg > 0.0) || self.p_avg > self.p_max {
            return Err(invalid("p_avg", "need 0 < p_avg <= p_max"));
        }
        if !(self.path_loss_exponent > 0.0) {
            return Err(invalid("path_loss_exponent", "must be positive"));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(invalid("bandwidth", "must be positive"));
        }
        if let Some(r) = self.interference_radius {
            if !(r >= 0.0) {
                return Err(invalid("interference_radius", "must be nonnegative"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub epochs: usize,
    pub blocks_per_epoch: usize,
    pub slots_per_block: usize,
    pub v: f64,
    pub protocol: Protocol,
    /// Feedback sub-slots `S` out of 20 per slot (game scheme only).
    pub feedback_subslots: usize,
    pub seed: u64,
    /// Lower clamp of the auxiliary variables, queue units.
    pub gamma_floor: f64,
    /// Throughput floor inside the log utility.
    pub throughput_floor: f64,
    /// Stop threshold on the squared best-response step, W^2.
    pub epsilon: f64,
    pub max_iterations: usize,
    pub contention: ContentionConfig,
    pub queue_units: QueueUnits,
    /// Keep per-block game records.
    pub record_blocks: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            epochs: 2000,
            blocks_per_epoch: 8,
            slots_per_block: 50,
            v: 1000.0,
            protocol: Protocol::Game,
            feedback_subslots: 0,
            seed: 1,
            gamma_floor: 1e-6,
            throughput_floor: 1.0,
            epsilon: 1e-6,
            max_iterations: 50,
            contention: ContentionConfig::default(),
            queue_units: QueueUnits::Block,
            record_blocks: false,
        }
    }
}

impl SimConfig {
    pub fn epoch_len(&self) -> usize {
        self.blocks_per_epoch * self.slots_per_block
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks_per_epoch == 0 || self.slots_per_block == 0 {
            return Err(invalid("blocks_per_epoch", "epochs need at least one slot"));
        }
        if !(self.v > 0.0) {
            return Err(invalid("v", "must be positive"));
        }
        if self.feedback_subslots > SUBSLOTS_PER_SLOT {
            return Err(invalid("feedback_subslots", format!("must be at most {SUBSLOTS_PER_SLOT}")));
        }
        if !(self.epsilon >= 0.0) {
            return Err(invalid("epsilon", "must be nonnegative"));
        }
        if !(self.throughput_floor > 0.0) {
            return Err(invalid("throughput_floor", "must be positive"));
        }
        if !(self.gamma_floor >= 0.0) {
            return Err(invalid("gamma_floor", "must be nonnegative"));
        }
        if matches!(self.protocol, Protocol::PPersistent | Protocol::PPersistentRandom | Protocol::Csma | Protocol::CsmaRandom) {
            self.contention.validate(self.epoch_len())?;
        }
        Ok(())
    }

    /// Queue time unit in slots and rate unit, see [`QueueUnits`].
    fn queue_scale(&self, bandwidth: f64) -> (f64, f64) {
        match self.queue_units {
            QueueUnits::Block => (self.slots_per_block as f64, bandwidth),
            QueueUnits::Raw => (1.0, 1.0),
        }
    }
}

/// Fraction of each slot left for data after `s` feedback sub-slots.
pub fn feedback_factor(s: usize) -> f64 {
    SUBSLOTS_PER_SLOT.saturating_sub(s) as f64 / SUBSLOTS_PER_SLOT as f64
}

/// Effective transmission time of `slots` slots when BSs stay silent for the
/// first `s` sub-slots of each.
pub fn apply_feedback_overhead(s: usize, slots: f64) -> f64 {
    slots * feedback_factor(s)
}

/// One game block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub epoch: usize,
    pub block: usize,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub powers: Vec<f64>,
    /// Uniqueness certificate of the epoch's game, when it was evaluated.
    pub p_matrix: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Log utility of the running-mean throughputs.
    pub utility: f64,
    /// Running-mean power per BS, W.
    pub mean_power: Vec<f64>,
    /// Energy spent this epoch per BS, W * slots.
    pub energy: Vec<f64>,
    pub z: Vec<f64>,
    pub h_mean: f64,
    pub ne_iterations_mean: Option<f64>,
    pub ne_converged_fraction: Option<f64>,
    /// Interference-free utility minus game utility on this epoch's state.
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub protocol: Protocol,
    pub seed: u64,
    pub epochs: Vec<EpochRecord>,
    pub blocks: Vec<BlockRecord>,
    /// Running-mean throughput per UE at the end of the run, per epoch.
    pub mean_throughput: Vec<f64>,
    pub final_queues: VirtualQueues,
    pub blocks_total: usize,
    pub blocks_converged: usize,
}

impl RunTrace {
    pub fn final_utility(&self) -> Option<f64> {
        self.epochs.last().map(|e| e.utility)
    }

    pub fn final_mean_power(&self) -> Option<&[f64]> {
        self.epochs.last().map(|e| e.mean_power.as_slice())
    }

    pub fn converged_fraction(&self) -> Option<f64> {
        (self.blocks_total > 0).then(|| self.blocks_converged as f64 / self.blocks_total as f64)
    }
}

struct Streams {
    fading: ChaCha8Rng,
    selection: ChaCha8Rng,
    contention: ChaCha8Rng,
    estimation: ChaCha8Rng,
    initial_power: ChaCha8Rng,
    random_power: ChaCha8Rng,
}

impl Streams {
    fn new(seed: u64) -> Self {
        Self {
            fading: substream(seed, Stream::Fading),
            selection: substream(seed, Stream::Selection),
            contention: substream(seed, Stream::Contention),
            estimation: substream(seed, Stream::Estimation),
            initial_power: substream(seed, Stream::InitialPower),
            random_power: substream(seed, Stream::RandomPower),
        }
    }
}

/// What one epoch of a protocol produced.
struct EpochOutcome {
    bits: Vec<f64>,
    rate_q: Vec<f64>,
    energy: Vec<f64>,
    iterations: Vec<usize>,
    converged: Vec<bool>,
    gap: Option<f64>,
}

/// A run in progress. [`run`] drives it to completion; stepping it by hand is
/// useful for benchmarks and for inspecting intermediate state.
pub struct Simulation {
    scenario: Scenario,
    config: SimConfig,
    placement: Placement,
    fading_model: NakagamiFading,
    streams: Streams,
    queues: VirtualQueues,
    bits_mean: RunningMean,
    energy_mean: RunningMean,
    access_mean: RunningMean,
    /// `fading[j * M + l]`: fading power between UE `j` and BS `l`.
    fading: Vec<f64>,
    epoch: usize,
    blocks: Vec<BlockRecord>,
    blocks_total: usize,
    blocks_converged: usize,
}

impl Simulation {
    pub fn new(scenario: &Scenario, config: &SimConfig) -> Result<Self> {
        scenario.validate()?;
        config.validate()?;
        let placement = generate_placement(&scenario.layout, config.seed)?;
        let (m, k) = (placement.num_bs(), placement.num_ues());
        Ok(Self {
            scenario: scenario.clone(),
            config: config.clone(),
            placement,
            fading_model: NakagamiFading::new(scenario.fading),
            streams: Streams::new(config.seed),
            queues: VirtualQueues::new(m, k),
            bits_mean: RunningMean::new(k),
            energy_mean: RunningMean::new(m),
            access_mean: RunningMean::new(m),
            fading: vec![0.0; k * m],
            epoch: 0,
            blocks: Vec::new(),
            blocks_total: 0,
            blocks_converged: 0,
        })
    }

    pub fn placement(&self) -> &Placement {
        &self.placement
    }

    pub fn queues(&self) -> &VirtualQueues {
        &self.queues
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    /// Advances one epoch.
    pub fn step(&mut self) -> Result<EpochRecord> {
        let m = self.placement.num_bs();
        let k = self.placement.num_ues();
        let sc = &self.scenario;
        let cfg = &self.config;
        let sigma2 = sc.noise.sigma2_watts;
        let epoch_len = cfg.epoch_len() as f64;
        let (tau, rate_unit) = cfg.queue_scale(sc.bandwidth_hz);
        let w_q = sc.bandwidth_hz / rate_unit;

        for f in self.fading.iter_mut() {
            *f = self.fading_model.sample_power(&mut self.streams.fading);
        }
        let selected = select_ues(&self.placement, &mut self.streams.selection);
        let pointing = PointingState::new(&self.placement, &selected);

        // Direct gain of every UE with both beams aligned on it.
        let mut aligned = Vec::with_capacity(k);
        for j in 0..k {
            let bs = self.placement.serving[j];
            let g = composite_gain(
                sc.ue_antenna.g_max(),
                sc.bs_antenna.g_max(),
                self.fading[j * m + bs],
                self.placement.distance(j, bs),
                sc.path_loss_exponent,
            )?;
            aligned.push(g.hbar2().max(GAIN_FLOOR));
        }

        let gamma: Vec<f64> = (0..k)
            .map(|j| {
                let cap = aux_cap(epoch_len / tau, w_q, aligned[j] / sigma2, sc.p_max);
                solve_aux(cfg.v, self.queues.h[j], cap, cfg.gamma_floor)
            })
            .collect();

        let outcome = match cfg.protocol {
            Protocol::Game | Protocol::Ideal => self.simultaneous_epoch(&selected, &pointing, &aligned)?,
            _ => self.exclusive_epoch(&selected, &aligned),
        };

        let energy_q: Vec<f64> = outcome.energy.iter().map(|e| e / tau).collect();
        let budget = vec![epoch_len / tau * self.scenario.p_avg; m];
        self.queues.update_z(&energy_q, &budget);
        self.queues.update_h(&gamma, &outcome.rate_q);

        self.bits_mean.push(&outcome.bits);
        self.energy_mean.push(&outcome.energy);
        let utility = network_utility(&self.bits_mean.mean(), self.config.throughput_floor);
        let mean_power = self.energy_mean.mean().iter().map(|e| e / epoch_len).collect();

        let (ne_iterations_mean, ne_converged_fraction) = if outcome.iterations.is_empty() {
            (None, None)
        } else {
            let n = outcome.iterations.len() as f64;
            self.blocks_total += outcome.converged.len();
            self.blocks_converged += outcome.converged.iter().filter(|c| **c).count();
            (
                Some(outcome.iterations.iter().sum::<usize>() as f64 / n),
                Some(outcome.converged.iter().filter(|c| **c).count() as f64 / n),
            )
        };

        let record = EpochRecord {
            epoch: self.epoch,
            utility,
            mean_power,
            energy: outcome.energy,
            z: self.queues.z.clone(),
            h_mean: self.queues.h.iter().sum::<f64>() / k as f64,
            ne_iterations_mean,
            ne_converged_fraction,
            gap: outcome.gap,
        };
        self.epoch += 1;
        Ok(record)
    }

    /// Game and ideal schemes: every BS transmits to its selected UE in every
    /// slot of the epoch.
    fn simultaneous_epoch(
        &mut self,
        selected: &[usize],
        pointing: &PointingState,
        aligned: &[f64],
    ) -> Result<EpochOutcome> {
        let sc = &self.scenario;
        let cfg = &self.config;
        let m = selected.len();
        let k = self.placement.num_ues();
        let sigma2 = sc.noise.sigma2_watts;
        let (tau, rate_unit) = cfg.queue_scale(sc.bandwidth_hz);
        let w_q = sc.bandwidth_hz / rate_unit;
        let w = sc.bandwidth_hz;
        let block_q = cfg.slots_per_block as f64 / tau;

        let mut gains = vec![vec![0.0; m]; m];
        for (i, row) in gains.iter_mut().enumerate() {
            let ue = selected[i];
            for (l, g) in row.iter_mut().enumerate() {
                if l == i {
                    *g = aligned[ue];
                    continue;
                }
                if let Some(r) = sc.interference_radius {
                    if self.placement.distance(ue, l) > r {
                        continue;
                    }
                }
                *g = link_gain(
                    &self.placement,
                    pointing,
                    l,
                    ue,
                    self.fading[ue * m + l],
                    &sc.bs_antenna,
                    &sc.ue_antenna,
                    sc.path_loss_exponent,
                )?
                .hbar2();
            }
        }
        let (alpha, lambda): (Vec<f64>, Vec<f64>) = (0..m)
            .map(|i| pricing_factors(self.queues.h[selected[i]], self.queues.z[i], block_q))
            .unzip();
        let game = GameInstance::new(alpha, lambda, vec![sc.p_max; m], w_q, gains, sigma2)?;

        let mut out = EpochOutcome {
            bits: vec![0.0; k],
            rate_q: vec![0.0; k],
            energy: vec![0.0; m],
            iterations: Vec::new(),
            converged: Vec::new(),
            gap: None,
        };

        if cfg.protocol == Protocol::Ideal {
            let slots = cfg.epoch_len() as f64;
            for i in 0..m {
                let g = game.gains[i][i] / sigma2;
                let p = best_response(game.alpha[i], game.lambda[i], w_q, g, sc.p_max)?;
                let nats = (g * p).ln_1p();
                out.bits[selected[i]] += slots * w * nats;
                out.rate_q[selected[i]] += slots / tau * w_q * nats;
                out.energy[i] += slots * p;
            }
            return Ok(out);
        }

        let factor = feedback_factor(cfg.feedback_subslots);
        let p_matrix = if cfg.record_blocks && m <= MAX_P_MATRIX_ORDER {
            Some(game.q_matrix()?.is_p_matrix()?)
        } else {
            None
        };
        let mut powers: Vec<f64> = (0..m)
            .map(|_| self.streams.initial_power.random_range(0.0..=sc.p_max))
            .collect();
        for b in 0..cfg.blocks_per_epoch {
            let mut update = ParallelUpdate::new(&game, powers, cfg.epsilon);
            for _ in 0..cfg.slots_per_block {
                if !update.converged() && update.iterations() < cfg.max_iterations {
                    update.step();
                }
                let p = update.powers();
                for i in 0..m {
                    let nats = game.sinr(i, p).ln_1p() * factor;
                    out.bits[selected[i]] += w * nats;
                    out.rate_q[selected[i]] += w_q * nats / tau;
                    out.energy[i] += factor * p[i];
                }
            }
            let res = update.finish();
            out.iterations.push(res.iterations);
            out.converged.push(res.converged);
            if cfg.record_blocks {
                self.blocks.push(BlockRecord {
                    epoch: self.epoch,
                    block: b,
                    iterations: res.iterations,
                    converged: res.converged,
                    residual: res.residual,
                    powers: res.powers.clone(),
                    p_matrix,
                });
            }
            powers = res.powers;
        }

        // Game powers held for a whole epoch against the interference-free optimum.
        let slots = cfg.epoch_len() as f64;
        let mut ideal_tp = Vec::with_capacity(m);
        let mut game_tp = Vec::with_capacity(m);
        for i in 0..m {
            let g = game.gains[i][i] / sigma2;
            let p = best_response(game.alpha[i], game.lambda[i], w_q, g, sc.p_max)?;
            ideal_tp.push(slots * w * (g * p).ln_1p());
            game_tp.push(slots * w * game.sinr(i, &powers).ln_1p());
        }
        out.gap = Some(game_ideal_gap(&ideal_tp, &game_tp, cfg.throughput_floor));
        Ok(out)
    }

    /// p-persistent and CSMA/CA: one BS at a time, SNR-based rates.
    fn exclusive_epoch(&mut self, selected: &[usize], aligned: &[f64]) -> EpochOutcome {
        let sc = &self.scenario;
        let cfg = &self.config;
        let m = selected.len();
        let k = self.placement.num_ues();
        let sigma2 = sc.noise.sigma2_watts;
        let (tau, rate_unit) = cfg.queue_scale(sc.bandwidth_hz);
        let w_q = sc.bandwidth_hz / rate_unit;
        let w = sc.bandwidth_hz;
        let p_persistent = matches!(cfg.protocol, Protocol::PPersistent | Protocol::PPersistentRandom);

        let schedule = |rng: &mut ChaCha8Rng| -> TransmissionSchedule {
            if p_persistent {
                p_persistent_schedule(&cfg.contention, &self.placement.members, cfg.blocks_per_epoch, cfg.slots_per_block, rng)
            } else {
                csma_schedule(&cfg.contention, selected, cfg.epoch_len(), rng)
            }
        };

        // Expected channel time from a simulated pass on its own stream.
        let estimate = schedule(&mut self.streams.estimation);
        let owned: Vec<f64> = estimate.owned_by_bs(m).into_iter().map(|s| s as f64).collect();
        self.access_mean.push(&owned);
        let access = self.access_mean.mean();

        let random: Option<Vec<f64>> = (!cfg.protocol.optimized_power())
            .then(|| (0..m).map(|_| random_power(sc.p_max, &mut self.streams.random_power)).collect());

        let power_for = |ue: usize| -> f64 {
            let bs = self.placement.serving[ue];
            if let Some(r) = &random {
                return r[bs];
            }
            let td = if p_persistent {
                access[bs] / self.placement.members[bs].len() as f64
            } else if selected[bs] == ue {
                access[bs]
            } else {
                0.0
            };
            baseline_power(self.queues.h[ue], self.queues.z[bs], td, aligned[ue] / sigma2, w_q, sc.p_max)
        };

        let live = schedule(&mut self.streams.contention);
        let mut out = EpochOutcome {
            bits: vec![0.0; k],
            rate_q: vec![0.0; k],
            energy: vec![0.0; m],
            iterations: Vec::new(),
            converged: Vec::new(),
            gap: None,
        };
        for grant in &live.grants {
            let p = power_for(grant.ue);
            let len = grant.len as f64;
            let nats = (aligned[grant.ue] / sigma2 * p).ln_1p();
            out.bits[grant.ue] += len * w * nats;
            out.rate_q[grant.ue] += len / tau * w_q * nats;
            out.energy[grant.bs] += len * p;
        }
        out
    }

    fn into_trace(self, epochs: Vec<EpochRecord>) -> RunTrace {
        RunTrace {
            protocol: self.config.protocol,
            seed: self.config.seed,
            epochs,
            blocks: self.blocks,
            mean_throughput: self.bits_mean.mean(),
            final_queues: self.queues,
            blocks_total: self.blocks_total,
            blocks_converged: self.blocks_converged,
        }
    }
}

/// Runs `config.epochs` epochs.
pub fn run(scenario: &Scenario, config: &SimConfig) -> Result<RunTrace> {
    let mut sim = Simulation::new(scenario, config)?;
    let mut epochs = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        epochs.push(sim.step()?);
    }
    Ok(sim.into_trace(epochs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    BeamWidth,
    Msr,
    UeCount,
    Feedback,
    Protocol,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::BeamWidth => "beam_width",
            SweepAxis::Msr => "msr",
            SweepAxis::UeCount => "ue_count",
            SweepAxis::Feedback => "feedback",
            SweepAxis::Protocol => "protocol",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beam_width" => Ok(SweepAxis::BeamWidth),
            "msr" => Ok(SweepAxis::Msr),
            "ue_count" => Ok(SweepAxis::UeCount),
            "feedback" => Ok(SweepAxis::Feedback),
            "protocol" => Ok(SweepAxis::Protocol),
            _ => Err(invalid("axis", format!("unknown sweep axis `{s}`"))),
        }
    }
}

/// One point on a sweep axis. Angles are radians, MSR is linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepValue {
    BeamWidth(f64),
    Msr(f64),
    UeCount(usize),
    Feedback(usize),
    Protocol(Protocol),
}

impl SweepValue {
    pub fn axis(&self) -> SweepAxis {
        match self {
            SweepValue::BeamWidth(_) => SweepAxis::BeamWidth,
            SweepValue::Msr(_) => SweepAxis::Msr,
            SweepValue::UeCount(_) => SweepAxis::UeCount,
            SweepValue::Feedback(_) => SweepAxis::Feedback,
            SweepValue::Protocol(_) => SweepAxis::Protocol,
        }
    }

    /// Scenario and config with this value substituted. Seeds are left alone
    /// so every point sees the same random numbers.
    pub fn apply(&self, scenario: &Scenario, config: &SimConfig) -> Result<(Scenario, SimConfig)> {
        let mut sc = scenario.clone();
        let mut cfg = config.clone();
        match *self {
            SweepValue::BeamWidth(bw) => sc.bs_antenna = AntennaPattern::new(bw, sc.bs_antenna.msr())?,
            SweepValue::Msr(d) => sc.bs_antenna = AntennaPattern::new(sc.bs_antenna.beam_width(), d)?,
            SweepValue::UeCount(k) => sc.layout.num_ues = k,
            SweepValue::Feedback(s) => cfg.feedback_subslots = s,
            SweepValue::Protocol(p) => cfg.protocol = p,
        }
        Ok((sc, cfg))
    }
}

/// One run per value, in parallel, returned in the order of `values`.
pub fn sweep(scenario: &Scenario, config: &SimConfig, values: &[SweepValue]) -> Result<Vec<RunTrace>> {
    values
        .par_iter()
        .map(|v| {
            let (sc, cfg) = v.apply(scenario, config)?;
            run(&sc, &cfg)
        })
        .collect()
}
