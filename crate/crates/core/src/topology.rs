//! Scenario geometry: BS and UE placement, fixed association, beam
//! boresights and angular offsets.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{composite_gain, AntennaPattern, LinkGain};
use crate::error::{invalid, Error, Result};
use crate::rng::{substream, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Direction of `other` as seen from `self`, radians in (-pi, pi].
    pub fn bearing(self, other: Point) -> f64 {
        (other.y - self.y).atan2(other.x - self.x)
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Signed angle between `boresight` (as seen from `from`) and the direction
/// towards `to`.
pub fn angular_offset(from: Point, boresight: f64, to: Point) -> Result<f64> {
    if from.distance(to) == 0.0 {
        return Err(Error::Geometry(format!(
            "offset undefined for coincident points ({}, {})",
            from.x, from.y
        )));
    }
    Ok(wrap_angle(from.bearing(to) - boresight))
}

/// How BS sites are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum BsLayout {
    /// Explicit coordinates, meters.
    Fixed(Vec<Point>),
    /// Uniform on the grid, rejecting sites closer than `min_separation`.
    Uniform { min_separation: f64 },
}

/// Geometric part of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutParams {
    pub grid_side: f64,
    pub num_bs: usize,
    pub num_ues: usize,
    pub coverage_radius: f64,
    pub bs_layout: BsLayout,
}

impl LayoutParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_bs == 0 {
            return Err(invalid("num_bs", "at least one BS is required"));
        }
        if self.num_ues == 0 || self.num_ues % self.num_bs != 0 {
            return Err(invalid(
                "num_ues",
                format!(
                    "{} UEs cannot be split evenly over {} BSs",
                    self.num_ues, self.num_bs
                ),
            ));
        }
        if !(self.grid_side > 0.0) {
            return Err(invalid("grid_side", "must be positive"));
        }
        if !(self.coverage_radius > 0.0 && self.coverage_radius <= self.grid_side) {
            return Err(invalid("coverage_radius", "must lie in (0, grid_side]"));
        }
        if let BsLayout::Fixed(sites) = &self.bs_layout {
            if sites.len() != self.num_bs {
                return Err(invalid(
                    "bs_positions",
                    format!("{} sites given for {} BSs", sites.len(), self.num_bs),
                ));
            }
        }
        Ok(())
    }

    pub fn ues_per_bs(&self) -> usize {
        self.num_ues / self.num_bs
    }
}

/// BS/UE positions and the fixed association.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub bs_positions: Vec<Point>,
    pub ue_positions: Vec<Point>,
    /// Serving BS of every UE.
    pub serving: Vec<usize>,
    /// UEs associated with every BS.
    pub members: Vec<Vec<usize>>,
}

impl Placement {
    pub fn num_bs(&self) -> usize {
        self.bs_positions.len()
    }

    pub fn num_ues(&self) -> usize {
        self.ue_positions.len()
    }

    pub fn distance(&self, ue: usize, bs: usize) -> f64 {
        self.ue_positions[ue].distance(self.bs_positions[bs])
    }
}

const MAX_SITE_ATTEMPTS: usize = 100_000;

/// Draws BS sites and UEs. BS sites and UE drops use separate substreams so
/// the sites stay put when only the UE count changes.
pub fn generate_placement(params: &LayoutParams, seed: u64) -> Result<Placement> {
    params.validate()?;
    let bs_positions = match &params.bs_layout {
        BsLayout::Fixed(sites) => sites.clone(),
        BsLayout::Uniform { min_separation } => {
            let mut rng = substream(seed, Stream::BsPlacement);
            let mut sites: Vec<Point> = Vec::with_capacity(params.num_bs);
            let mut attempts = 0;
            while sites.len() < params.num_bs {
                attempts += 1;
                if attempts > MAX_SITE_ATTEMPTS {
                    return Err(invalid(
                        "min_bs_separation",
                        format!(
                            "could not place {} BSs {min_separation} m apart on a {} m grid",
                            params.num_bs, params.grid_side
                        ),
                    ));
                }
                let p = Point::new(
                    rng.random::<f64>() * params.grid_side,
                    rng.random::<f64>() * params.grid_side,
                );
                if sites.iter().all(|s| s.distance(p) >= *min_separation) {
                    sites.push(p);
                }
            }
            sites
        }
    };

    let mut rng = substream(seed, Stream::UePlacement);
    let k = params.ues_per_bs();
    let mut ue_positions = Vec::with_capacity(params.num_ues);
    let mut serving = Vec::with_capacity(params.num_ues);
    let mut members = vec![Vec::with_capacity(k); params.num_bs];
    for (bs, site) in bs_positions.iter().enumerate() {
        for _ in 0..k {
            // Area-uniform in the disk; r = 0 exactly would collide with the site.
            let p = loop {
                let r = params.coverage_radius * rng.random::<f64>().sqrt();
                let theta = rng.random::<f64>() * 2.0 * PI;
                if r > 0.0 {
                    break Point::new(site.x + r * theta.cos(), site.y + r * theta.sin());
                }
            };
            members[bs].push(ue_positions.len());
            ue_positions.push(p);
            serving.push(bs);
        }
    }
    Ok(Placement {
        bs_positions,
        ue_positions,
        serving,
        members,
    })
}

/// One uniformly drawn UE per BS.
pub fn select_ues<R: Rng + ?Sized>(placement: &Placement, rng: &mut R) -> Vec<usize> {
    placement
        .members
        .iter()
        .map(|m| m[rng.random_range(0..m.len())])
        .collect()
}

/// Beam directions for one epoch: every BS points at its selected UE and every
/// UE points at its serving BS.
#[derive(Debug, Clone, PartialEq)]
pub struct PointingState {
    pub bs_boresight: Vec<f64>,
    pub ue_boresight: Vec<f64>,
}

impl PointingState {
    pub fn new(placement: &Placement, selected: &[usize]) -> Self {
        let bs_boresight = selected
            .iter()
            .enumerate()
            .map(|(bs, &ue)| placement.bs_positions[bs].bearing(placement.ue_positions[ue]))
            .collect();
        let ue_boresight = placement
            .ue_positions
            .iter()
            .zip(&placement.serving)
            .map(|(p, &bs)| p.bearing(placement.bs_positions[bs]))
            .collect();
        Self {
            bs_boresight,
            ue_boresight,
        }
    }

    /// Antenna gains `(G_UE, G_BS)` on the path between `bs` and `ue`.
    pub fn antenna_gains(
        &self,
        placement: &Placement,
        bs: usize,
        ue: usize,
        bs_antenna: &AntennaPattern,
        ue_antenna: &AntennaPattern,
    ) -> Result<(f64, f64)> {
        let bs_pos = placement.bs_positions[bs];
        let ue_pos = placement.ue_positions[ue];
        let at_bs = angular_offset(bs_pos, self.bs_boresight[bs], ue_pos)?;
        let at_ue = angular_offset(ue_pos, self.ue_boresight[ue], bs_pos)?;
        Ok((ue_antenna.gain(at_ue), bs_antenna.gain(at_bs)))
    }
}

/// Composite gain between `bs` and `ue` under the current pointing.
pub fn link_gain(
    placement: &Placement,
    pointing: &PointingState,
    bs: usize,
    ue: usize,
    fading_power: f64,
    bs_antenna: &AntennaPattern,
    ue_antenna: &AntennaPattern,
    eta: f64,
) -> Result<LinkGain> {
    let (g_ue, g_bs) = pointing.antenna_gains(placement, bs, ue, bs_antenna, ue_antenna)?;
    composite_gain(g_ue, g_bs, fading_power, placement.distance(ue, bs), eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;

    fn default_layout() -> LayoutParams {
        LayoutParams {
            grid_side: 800.0,
            num_bs: 10,
            num_ues: 100,
            coverage_radius: 150.0,
            bs_layout: BsLayout::Uniform {
                min_separation: 100.0,
            },
        }
    }

    #[test]
    fn offsets() {
        let o = Point::new(0.0, 0.0);
        assert_eq!(angular_offset(o, 0.0, Point::new(5.0, 0.0)).unwrap(), 0.0);
        assert!((angular_offset(o, 0.0, Point::new(-5.0, 0.0)).unwrap() - PI).abs() < 1e-15);
        assert!((angular_offset(o, 0.0, Point::new(0.0, 3.0)).unwrap() - PI / 2.0).abs() < 1e-15);
        assert!(angular_offset(o, 0.0, o).is_err());
    }

    #[test]
    fn wrap_is_half_open() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn default_layout_disks() {
        let params = default_layout();
        let p = generate_placement(&params, 7).unwrap();
        assert_eq!(p.num_bs(), 10);
        assert_eq!(p.num_ues(), 100);
        for (bs, m) in p.members.iter().enumerate() {
            assert_eq!(m.len(), 10);
            for &ue in m {
                assert_eq!(p.serving[ue], bs);
                assert!(p.distance(ue, bs) <= 150.0);
            }
        }
    }

    #[test]
    fn single_pair() {
        let params = LayoutParams {
            grid_side: 100.0,
            num_bs: 1,
            num_ues: 1,
            coverage_radius: 50.0,
            bs_layout: BsLayout::Fixed(vec![Point::new(50.0, 50.0)]),
        };
        let p = generate_placement(&params, 1).unwrap();
        assert_eq!(p.serving, vec![0]);
        assert_eq!(p.members, vec![vec![0]]);
        let mut rng = seeded(0);
        for _ in 0..10 {
            assert_eq!(select_ues(&p, &mut rng), vec![0]);
        }
    }

    #[test]
    fn placement_is_deterministic() {
        let a = generate_placement(&default_layout(), 42).unwrap();
        let b = generate_placement(&default_layout(), 42).unwrap();
        assert_eq!(a, b);
        let c = generate_placement(&default_layout(), 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn bs_sites_survive_ue_count_change() {
        let mut fewer = default_layout();
        fewer.num_ues = 30;
        let a = generate_placement(&default_layout(), 9).unwrap();
        let b = generate_placement(&fewer, 9).unwrap();
        assert_eq!(a.bs_positions, b.bs_positions);
    }

    #[test]
    fn rejects_uneven_split() {
        let mut params = default_layout();
        params.num_ues = 95;
        assert!(generate_placement(&params, 1).is_err());
    }

    #[test]
    fn impossible_separation_is_reported() {
        let mut params = default_layout();
        params.bs_layout = BsLayout::Uniform {
            min_separation: 1000.0,
        };
        assert!(generate_placement(&params, 1).is_err());
    }

    #[test]
    fn selection_is_uniform() {
        let p = generate_placement(&default_layout(), 3).unwrap();
        let mut rng = seeded(17);
        let epochs = 10_000;
        let mut counts = vec![0usize; p.num_ues()];
        for _ in 0..epochs {
            for ue in select_ues(&p, &mut rng) {
                counts[ue] += 1;
            }
        }
        let sigma = (epochs as f64 * 0.1 * 0.9).sqrt();
        for c in counts {
            assert!((c as f64 - 1000.0).abs() < 3.0 * sigma + 1.0, "count {c}");
        }
    }

    #[test]
    fn serving_pairs_are_aligned() {
        let p = generate_placement(&default_layout(), 5).unwrap();
        let mut rng = seeded(2);
        let sel = select_ues(&p, &mut rng);
        let pointing = PointingState::new(&p, &sel);
        for (bs, &ue) in sel.iter().enumerate() {
            let at_bs = angular_offset(p.bs_positions[bs], pointing.bs_boresight[bs], p.ue_positions[ue]).unwrap();
            let at_ue = angular_offset(p.ue_positions[ue], pointing.ue_boresight[ue], p.bs_positions[bs]).unwrap();
            assert!(at_bs.abs() < 1e-12 && at_ue.abs() < 1e-12);
        }
    }

    #[test]
    fn aligned_link_gain() {
        let bs_ant = AntennaPattern::new(PI / 9.0, 100.0).unwrap();
        let ue_ant = AntennaPattern::new(PI / 18.0, 10.0).unwrap();
        let p = Placement {
            bs_positions: vec![Point::new(0.0, 0.0)],
            ue_positions: vec![Point::new(1.0, 0.0)],
            serving: vec![0],
            members: vec![vec![0]],
        };
        let pointing = PointingState::new(&p, &[0]);
        let g = link_gain(&p, &pointing, 0, 0, 1.0, &bs_ant, &ue_ant, 4.0).unwrap();
        assert!((g.hbar2() - bs_ant.g_max() * ue_ant.g_max()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn offsets_antisymmetric_under_reflection(
            bx in -100.0..100.0f64, by in -100.0..100.0f64,
            bore in -PI..PI, tx in -100.0..100.0f64, ty in -100.0..100.0f64,
        ) {
            let from = Point::new(bx, by);
            let to = Point::new(bx + tx, by + ty);
            prop_assume!(from.distance(to) > 1e-6);
            // Reflect the relative target across the boresight axis.
            let (c, s) = (bore.cos(), bore.sin());
            let along = tx * c + ty * s;
            let across = -tx * s + ty * c;
            let refl = Point::new(bx + along * c + across * s, by + along * s - across * c);
            let a = angular_offset(from, bore, to).unwrap();
            let b = angular_offset(from, bore, refl).unwrap();
            if (a.abs() - PI).abs() > 1e-9 {
                prop_assert!((a + b).abs() < 1e-9, "{a} {b}");
            }
        }
    }
}
