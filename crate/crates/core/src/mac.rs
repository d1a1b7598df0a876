//! Exclusive-channel baselines: p-persistent contention and CSMA/CA with
//! binary exponential backoff, plus the per-epoch power rule they share.
//!
//! Schedules are pure slot bookkeeping. Rates, energy and queue updates are
//! applied by the engine.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContentionConfig {
    /// Per-slot transmit probability of a p-persistent BS.
    pub p_c: f64,
    pub cw_min: usize,
    pub cw_max: usize,
    /// Slots per CSMA/CA grant.
    pub tx_duration: usize,
    /// Carrier-sensing slots spent before every CSMA/CA attempt.
    pub sensing_slots: usize,
}

impl Default for ContentionConfig {
    fn default() -> Self {
        Self {
            p_c: 0.1,
            cw_min: 20,
            cw_max: 200,
            tx_duration: 2,
            sensing_slots: 1,
        }
    }
}

impl ContentionConfig {
    pub fn validate(&self, epoch_len: usize) -> Result<()> {
        if !(self.p_c > 0.0 && self.p_c <= 1.0) {
            return Err(invalid("p_c", format!("{} is not in (0, 1]", self.p_c)));
        }
        if self.cw_min == 0 || self.cw_min > self.cw_max {
            return Err(invalid("cw_min", "need 1 <= cw_min <= cw_max"));
        }
        if self.cw_max > epoch_len {
            return Err(invalid("cw_max", format!("{} exceeds the epoch length {epoch_len}", self.cw_max)));
        }
        if self.tx_duration == 0 {
            return Err(invalid("tx_duration", "grants must last at least one slot"));
        }
        Ok(())
    }
}

/// Maximizer over `[0, p_max]` of `H Td W log(1 + g p) - Z Td p`.
///
/// `td_estimate` scales both terms and drops out unless it is zero, in which
/// case the BS is not expected to transmit and spends nothing.
pub fn baseline_power(h: f64, z: f64, td_estimate: f64, g: f64, w: f64, p_max: f64) -> f64 {
    if td_estimate <= 0.0 || h <= 0.0 || !(g > 0.0) {
        return 0.0;
    }
    if z <= 0.0 {
        return p_max;
    }
    (h * w / z - 1.0 / g).clamp(0.0, p_max)
}

/// Power of a random-power baseline, drawn once per BS per epoch.
pub fn random_power<R: Rng + ?Sized>(p_max: f64, rng: &mut R) -> f64 {
    rng.random_range(0.0..=p_max)
}

/// A contiguous run of slots in which `bs` alone serves `ue`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grant {
    pub bs: usize,
    pub ue: usize,
    pub start: usize,
    pub len: usize,
}

/// One epoch of channel ownership. Every slot is exactly one of: owned by a
/// grant, idle, spent on a successful contention or sensing, or lost to a
/// collision.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransmissionSchedule {
    pub len: usize,
    pub grants: Vec<Grant>,
    pub idle_slots: usize,
    pub contention_slots: usize,
    pub collision_slots: usize,
}

impl TransmissionSchedule {
    pub fn owned_slots(&self) -> usize {
        self.grants.iter().map(|g| g.len).sum()
    }

    pub fn owned_by_bs(&self, num_bs: usize) -> Vec<usize> {
        let mut out = vec![0; num_bs];
        for g in &self.grants {
            out[g.bs] += g.len;
        }
        out
    }

    pub fn owned_by_ue(&self, num_ues: usize) -> Vec<usize> {
        let mut out = vec![0; num_ues];
        for g in &self.grants {
            out[g.ue] += g.len;
        }
        out
    }

    pub fn owner(&self, slot: usize) -> Option<usize> {
        self.grants
            .iter()
            .find(|g| (g.start..g.start + g.len).contains(&slot))
            .map(|g| g.bs)
    }

    /// Grants are disjoint, in range, and slot categories add up to `len`.
    pub fn is_consistent(&self) -> bool {
        let mut sorted = self.grants.clone();
        sorted.sort_by_key(|g| g.start);
        let disjoint = sorted.windows(2).all(|w| w[0].start + w[0].len <= w[1].start);
        let in_range = sorted.iter().all(|g| g.start + g.len <= self.len);
        let total = self.owned_slots() + self.idle_slots + self.contention_slots + self.collision_slots;
        disjoint && in_range && total == self.len
    }
}

/// p-persistent access for one epoch of `blocks` blocks of `block_len` slots.
///
/// At the start of each block every BS independently elects to transmit with
/// probability `p_c`. Slots where nobody or more than one BS elects are lost
/// and contention repeats. The first slot with a single elector is spent on
/// the contention itself; from the next slot the winner owns the rest of the
/// block and serves a UE drawn uniformly from its cell.
pub fn p_persistent_schedule<R: Rng + ?Sized>(
    cfg: &ContentionConfig,
    members: &[Vec<usize>],
    blocks: usize,
    block_len: usize,
    rng: &mut R,
) -> TransmissionSchedule {
    let m = members.len();
    let mut s = TransmissionSchedule {
        len: blocks * block_len,
        ..Default::default()
    };
    for b in 0..blocks {
        let end = (b + 1) * block_len;
        let mut t = b * block_len;
        while t < end {
            let mut winner = None;
            let mut electors = 0;
            for bs in 0..m {
                if rng.random_bool(cfg.p_c) {
                    electors += 1;
                    winner = Some(bs);
                }
            }
            t += 1;
            match (electors, winner) {
                (1, Some(bs)) => {
                    s.contention_slots += 1;
                    if t < end {
                        let cell = &members[bs];
                        let ue = cell[rng.random_range(0..cell.len())];
                        s.grants.push(Grant {
                            bs,
                            ue,
                            start: t,
                            len: end - t,
                        });
                    }
                    break;
                }
                (0, _) => s.idle_slots += 1,
                _ => s.collision_slots += 1,
            }
        }
    }
    s
}

/// Probability that exactly one of `m` BSs elects in a slot.
pub fn p_persistent_success(m: usize, p_c: f64) -> f64 {
    m as f64 * p_c * (1.0 - p_c).powi(m as i32 - 1)
}

/// Upper end of the backoff window after `collisions` consecutive collisions.
pub fn backoff_window(collisions: u32, cw_max: usize, epoch_len: usize) -> usize {
    let doubled = 1usize.checked_shl(collisions.min(62)).unwrap_or(usize::MAX);
    doubled.min(cw_max).min(epoch_len).max(1)
}

/// CSMA/CA access for one epoch of `epoch_len` slots. `selected[i]` is the UE
/// BS `i` serves for the whole epoch.
///
/// Backoff counters start uniform on `[1, cw_min]` and count down only over
/// idle slots. BSs whose counter expires sense the channel for
/// `sensing_slots`; a lone attempter then transmits for `tx_duration` slots
/// (cut at the epoch end), resets its collision count and draws a fresh
/// backoff of 1 or 2. When several attempt together the sensing slots are
/// lost and each of them draws from `[1, min(2^C, cw_max, T)]` after its
/// `C`-th consecutive collision. Other BSs keep their residual counters.
pub fn csma_schedule<R: Rng + ?Sized>(
    cfg: &ContentionConfig,
    selected: &[usize],
    epoch_len: usize,
    rng: &mut R,
) -> TransmissionSchedule {
    let m = selected.len();
    let mut s = TransmissionSchedule {
        len: epoch_len,
        ..Default::default()
    };
    if m == 0 {
        s.idle_slots = epoch_len;
        return s;
    }
    let cw0 = cfg.cw_min.min(epoch_len).max(1);
    let mut backoff: Vec<usize> = (0..m).map(|_| rng.random_range(1..=cw0)).collect();
    let mut collisions = vec![0u32; m];
    let mut t = 0;
    let mut attempters = Vec::with_capacity(m);
    while t < epoch_len {
        let wait = *backoff.iter().min().expect("m > 0");
        let idle = wait.min(epoch_len - t);
        s.idle_slots += idle;
        t += idle;
        if t >= epoch_len {
            break;
        }
        attempters.clear();
        for (bs, b) in backoff.iter_mut().enumerate() {
            *b -= wait;
            if *b == 0 {
                attempters.push(bs);
            }
        }
        let sense = cfg.sensing_slots.min(epoch_len - t);
        t += sense;
        if let [bs] = attempters[..] {
            s.contention_slots += sense;
            let len = cfg.tx_duration.min(epoch_len - t);
            if len > 0 {
                s.grants.push(Grant {
                    bs,
                    ue: selected[bs],
                    start: t,
                    len,
                });
            }
            t += len;
            collisions[bs] = 0;
            backoff[bs] = rng.random_range(1..=2);
        } else {
            s.collision_slots += sense;
            for &bs in &attempters {
                collisions[bs] += 1;
                let hi = backoff_window(collisions[bs], cfg.cw_max, epoch_len);
                backoff[bs] = rng.random_range(1..=hi);
            }
        }
    }
    s
}
