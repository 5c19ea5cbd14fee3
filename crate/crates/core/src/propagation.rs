//! Intersection scenarios, device trajectories and deterministic multipath synthesis.
//!
//! The channel between two antennas is built with the image method: a direct path
//! (dropped when a building box occludes it), a specular bounce off the ground plane
//! `z = 0`, and one single-bounce reflection per vertical building facade whose
//! specular point lies on the facade. Antennas are isotropic with unit gain and each
//! path's amplitude follows free-space spreading over the unfolded path length.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::geometry::{Pose, Vec3};
use crate::{Error, Result, SPEED_OF_LIGHT};

/// Ground reflection coefficient used by the built-in scenarios.
pub const DEFAULT_GROUND_REFLECTION: f64 = -0.5;
/// Facade reflection coefficient used by the built-in scenarios.
pub const DEFAULT_WALL_REFLECTION: f64 = -0.6;

/// Slack used when deciding whether a point is strictly inside a box.
const INTERIOR_EPS: f64 = 1e-9;

/// Axis-aligned opaque building.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildingBox {
    pub center: Vec3,
    pub half_extents: Vec3,
}

impl BuildingBox {
    pub fn new(center: Vec3, half_extents: Vec3) -> Result<Self> {
        let valid = half_extents.x > 0.0 && half_extents.y > 0.0 && half_extents.z > 0.0;
        if !valid || !center.is_finite() || !half_extents.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "building half extents must be positive and finite, got {half_extents}"
            )));
        }
        Ok(Self {
            center,
            half_extents,
        })
    }

    pub fn min(&self) -> Vec3 {
        self.center - self.half_extents
    }

    pub fn max(&self) -> Vec3 {
        self.center + self.half_extents
    }

    /// The four vertical outer faces.
    pub fn facades(&self) -> [Facade; 4] {
        [
            Facade::new(Side::NegX),
            Facade::new(Side::PosX),
            Facade::new(Side::NegY),
            Facade::new(Side::PosY),
        ]
        .map(|f| f.bind(self))
    }
}

/// Which vertical face of a building.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    NegX,
    PosX,
    NegY,
    PosY,
}

impl Side {
    fn axis(self) -> usize {
        match self {
            Side::NegX | Side::PosX => 0,
            Side::NegY | Side::PosY => 1,
        }
    }

    fn outward(self) -> f64 {
        match self {
            Side::NegX | Side::NegY => -1.0,
            Side::PosX | Side::PosY => 1.0,
        }
    }
}

/// A vertical facade rectangle: the plane `axis = offset` bounded in the other
/// horizontal axis and in height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Facade {
    pub side: Side,
    pub offset: f64,
    pub lateral: (f64, f64),
    pub height: (f64, f64),
}

impl Facade {
    fn new(side: Side) -> Self {
        Self {
            side,
            offset: 0.0,
            lateral: (0.0, 0.0),
            height: (0.0, 0.0),
        }
    }

    fn bind(mut self, b: &BuildingBox) -> Self {
        let axis = self.side.axis();
        let other = 1 - axis;
        self.offset = b.center[axis] + self.side.outward() * b.half_extents[axis];
        self.lateral = (
            b.center[other] - b.half_extents[other],
            b.center[other] + b.half_extents[other],
        );
        self.height = (b.center.z - b.half_extents.z, b.center.z + b.half_extents.z);
        self
    }

    pub fn axis(&self) -> usize {
        self.side.axis()
    }

    /// Signed distance of `p` in front of the facade (positive on the outer side).
    fn front_distance(&self, p: Vec3) -> f64 {
        self.side.outward() * (p[self.axis()] - self.offset)
    }

    /// Distance from `p` to the facade rectangle, zero when `p` lies on it.
    pub fn distance_to(&self, p: Vec3) -> f64 {
        let other = 1 - self.axis();
        let outside = |v: f64, (lo, hi): (f64, f64)| (lo - v).max(0.0).max(v - hi);
        let dn = p[self.axis()] - self.offset;
        let dl = outside(p[other], self.lateral);
        let dh = outside(p.z, self.height);
        (dn * dn + dl * dl + dh * dh).sqrt()
    }

    fn contains(&self, p: Vec3) -> bool {
        self.distance_to(p) <= INTERIOR_EPS
    }
}

/// Complete description of one of the intersection scenarios.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario_id: u8,
    pub rsu: Option<Pose>,
    pub vehicle_start: Vec3,
    pub vehicle_end: Vec3,
    pub bicycle_start: Vec3,
    pub bicycle_end: Vec3,
    pub vehicle_speed: f64,
    pub bicycle_speed: f64,
    pub buildings: Vec<BuildingBox>,
    pub measurement_interval: f64,
    pub ground_reflection_coeff: Complex64,
    pub wall_reflection_coeff: Complex64,
}

/// A mobile device in the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Device {
    Vehicle,
    Bicycle,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        match (self.scenario_id, self.rsu.is_some()) {
            (1, true) | (2, false) => {}
            (1 | 2, _) => {
                return bad(format!(
                    "scenario {} must {}have a road-side unit",
                    self.scenario_id,
                    if self.scenario_id == 1 { "" } else { "not " }
                ))
            }
            (id, _) => return Err(Error::InvalidScenario(id)),
        }
        if let Some(rsu) = &self.rsu {
            if rsu.velocity != Vec3::ZERO {
                return bad("road-side unit must be static".into());
            }
        }
        if !(self.measurement_interval > 0.0) {
            return bad("measurement_interval must be positive".into());
        }
        if !(self.vehicle_speed > 0.0 && self.bicycle_speed > 0.0) {
            return bad("lane speeds must be positive".into());
        }
        if self.vehicle_start == self.vehicle_end || self.bicycle_start == self.bicycle_end {
            return bad("lane start and end must differ".into());
        }
        for (name, g) in [
            ("ground_reflection_coeff", self.ground_reflection_coeff),
            ("wall_reflection_coeff", self.wall_reflection_coeff),
        ] {
            if !(g.norm() <= 1.0) {
                return bad(format!("{name} magnitude must not exceed 1"));
            }
        }
        for b in &self.buildings {
            BuildingBox::new(b.center, b.half_extents)?;
        }
        Ok(())
    }

    fn lane(&self, device: Device) -> (Vec3, Vec3, f64) {
        match device {
            Device::Vehicle => (self.vehicle_start, self.vehicle_end, self.vehicle_speed),
            Device::Bicycle => (self.bicycle_start, self.bicycle_end, self.bicycle_speed),
        }
    }

    /// Time for `device` to travel from its lane start to its lane end.
    pub fn device_horizon(&self, device: Device) -> f64 {
        let (start, end, speed) = self.lane(device);
        start.distance(end) / speed
    }

    /// Time window during which both devices stay on their lanes.
    pub fn horizon(&self) -> f64 {
        self.device_horizon(Device::Vehicle)
            .min(self.device_horizon(Device::Bicycle))
    }
}

/// Returns the built-in intersection scenario (1: with a central RSU, 2: without).
pub fn build_scenario(scenario_id: u8) -> Result<ScenarioConfig> {
    let rsu = match scenario_id {
        1 => Some(Pose::fixed(Vec3::new(0.0, 0.0, 10.0))),
        2 => None,
        other => return Err(Error::InvalidScenario(other)),
    };
    let bicycle_start_x = if scenario_id == 1 { -70.0 } else { -16.4 };
    let half = Vec3::new(25.0, 25.0, 15.0);
    let buildings = [(45.0, 45.0), (-45.0, 45.0), (-45.0, -45.0), (45.0, -45.0)]
        .into_iter()
        .map(|(x, y)| BuildingBox {
            center: Vec3::new(x, y, 15.0),
            half_extents: half,
        })
        .collect();
    Ok(ScenarioConfig {
        scenario_id,
        rsu,
        vehicle_start: Vec3::new(1.6, -70.0, 1.5),
        vehicle_end: Vec3::new(1.6, 70.0, 1.5),
        bicycle_start: Vec3::new(bicycle_start_x, -7.0, 1.0),
        bicycle_end: Vec3::new(70.0, -7.0, 1.0),
        vehicle_speed: 14.0,
        bicycle_speed: 4.0,
        buildings,
        measurement_interval: 0.1,
        ground_reflection_coeff: Complex64::new(DEFAULT_GROUND_REFLECTION, 0.0),
        wall_reflection_coeff: Complex64::new(DEFAULT_WALL_REFLECTION, 0.0),
    })
}

/// Pose of a single device at time `t`, valid up to that device's own lane horizon.
pub fn sample_device(config: &ScenarioConfig, device: Device, t: f64) -> Result<Pose> {
    let horizon = config.device_horizon(device);
    check_time(t, horizon)?;
    let (start, end, speed) = config.lane(device);
    let dir = (end - start).normalized().ok_or(Error::ZeroDistance)?;
    let velocity = dir * speed;
    Ok(Pose::new(start + velocity * t, velocity))
}

/// Poses of the vehicle and the bicycle at time `t`.
pub fn sample_trajectory(config: &ScenarioConfig, t: f64) -> Result<(Pose, Pose)> {
    check_time(t, config.horizon())?;
    Ok((
        sample_device(config, Device::Vehicle, t)?,
        sample_device(config, Device::Bicycle, t)?,
    ))
}

fn check_time(t: f64, horizon: f64) -> Result<()> {
    if !(t >= 0.0 && t <= horizon * (1.0 + 1e-12)) {
        return Err(Error::OutsideHorizon { t, horizon });
    }
    Ok(())
}

/// True when the open segment `(a, b)` passes through the interior of any box.
///
/// Touching a face (grazing, or an endpoint lying on a facade) does not block.
pub fn segment_blocked(a: Vec3, b: Vec3, buildings: &[BuildingBox]) -> bool {
    buildings.iter().any(|bx| segment_hits_interior(a, b, bx))
}

fn segment_hits_interior(a: Vec3, b: Vec3, bx: &BuildingBox) -> bool {
    let lo = bx.min();
    let hi = bx.max();
    let d = b - a;
    let mut t0 = 0.0_f64;
    let mut t1 = 1.0_f64;
    for axis in 0..3 {
        let (l, h) = (lo[axis] + INTERIOR_EPS, hi[axis] - INTERIOR_EPS);
        if d[axis].abs() < 1e-15 {
            if a[axis] <= l || a[axis] >= h {
                return false;
            }
            continue;
        }
        let inv = 1.0 / d[axis];
        let (mut ta, mut tb) = ((l - a[axis]) * inv, (h - a[axis]) * inv);
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
        }
        t0 = t0.max(ta);
        t1 = t1.min(tb);
        if t0 >= t1 {
            return false;
        }
    }
    true
}

/// Free-space complex amplitude `λ/(4πd)·exp(−j2πd/λ)` over distance `‖tx − rx‖`.
pub fn friis_gain(tx: Vec3, rx: Vec3, wavelength: f64) -> Result<Complex64> {
    let d = tx.distance(rx);
    if d <= 0.0 {
        return Err(Error::ZeroDistance);
    }
    Ok(spreading_gain(d, wavelength))
}

fn spreading_gain(length: f64, wavelength: f64) -> Complex64 {
    let amplitude = wavelength / (4.0 * PI * length);
    Complex64::from_polar(amplitude, -2.0 * PI * length / wavelength)
}

/// How a propagation path reached the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathKind {
    LineOfSight,
    Ground,
    /// Single bounce off facade `side` of building `building`.
    Wall {
        building: usize,
        side: Side,
    },
}

/// One propagation path: delay, complex amplitude and rate of change of its length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent {
    pub delay: f64,
    pub gain: Complex64,
    pub radial_velocity: f64,
    pub kind: PathKind,
    /// Specular point for reflected paths.
    pub bounce_point: Option<Vec3>,
}

impl PathComponent {
    /// Bare path with the given delay and gain, used for synthetic channels.
    pub fn new(delay: f64, gain: Complex64, kind: PathKind) -> Self {
        Self {
            delay,
            gain,
            radial_velocity: 0.0,
            kind,
            bounce_point: None,
        }
    }

    pub fn is_los(&self) -> bool {
        self.kind == PathKind::LineOfSight
    }
}

/// All paths between two poses at one instant, sorted by delay.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSnapshot {
    pub paths: Vec<PathComponent>,
    pub tx_pose: Pose,
    pub rx_pose: Pose,
    pub time: f64,
}

impl ChannelSnapshot {
    pub fn los(&self) -> Option<&PathComponent> {
        self.paths.first().filter(|p| p.is_los())
    }

    pub fn has_los(&self) -> bool {
        self.los().is_some()
    }
}

/// Image-method multipath synthesis between `tx` and `rx` for the given scenario.
///
/// `wavelength` sets the free-space amplitude and carrier phase of each path.
pub fn trace_paths(
    tx: &Pose,
    rx: &Pose,
    config: &ScenarioConfig,
    wavelength: f64,
) -> Result<ChannelSnapshot> {
    let (a, b) = (tx.position, rx.position);
    if a.distance(b) <= 0.0 {
        return Err(Error::ZeroDistance);
    }
    let buildings = &config.buildings;
    let mut paths = Vec::new();

    // Unfolded path: the receiver sees a (possibly mirrored) source with its own velocity.
    let unfolded = |src: Vec3, src_vel: Vec3, gain_scale: Complex64, kind, bounce| {
        let length = src.distance(b);
        let los_dir = (b - src) * (1.0 / length);
        PathComponent {
            delay: length / SPEED_OF_LIGHT,
            gain: spreading_gain(length, wavelength) * gain_scale,
            radial_velocity: (rx.velocity - src_vel).dot(los_dir),
            kind,
            bounce_point: bounce,
        }
    };

    if !segment_blocked(a, b, buildings) {
        paths.push(unfolded(
            a,
            tx.velocity,
            Complex64::new(1.0, 0.0),
            PathKind::LineOfSight,
            None,
        ));
    }

    let ground = config.ground_reflection_coeff;
    if ground.norm() > 0.0 && a.z > 0.0 && b.z > 0.0 {
        let image = a.mirrored(2, 0.0);
        let s = image.z.abs() / (image.z.abs() + b.z);
        let point = image + (b - image) * s;
        let point = Vec3::new(point.x, point.y, 0.0);
        if !segment_blocked(a, point, buildings) && !segment_blocked(point, b, buildings) {
            paths.push(unfolded(
                image,
                tx.velocity.flipped(2),
                ground,
                PathKind::Ground,
                Some(point),
            ));
        }
    }

    let wall = config.wall_reflection_coeff;
    if wall.norm() > 0.0 {
        for (index, building) in buildings.iter().enumerate() {
            for facade in building.facades() {
                if facade.front_distance(a) <= 0.0 || facade.front_distance(b) <= 0.0 {
                    continue;
                }
                let axis = facade.axis();
                let image = a.mirrored(axis, facade.offset);
                let s = (facade.offset - image[axis]) / (b[axis] - image[axis]);
                let mut point = image + (b - image) * s;
                point[axis] = facade.offset;
                if !facade.contains(point) {
                    continue;
                }
                if segment_blocked(a, point, buildings) || segment_blocked(point, b, buildings) {
                    continue;
                }
                paths.push(unfolded(
                    image,
                    tx.velocity.flipped(axis),
                    wall,
                    PathKind::Wall {
                        building: index,
                        side: facade.side,
                    },
                    Some(point),
                ));
            }
        }
    }

    paths.sort_by(|p, q| {
        p.delay
            .total_cmp(&q.delay)
            .then_with(|| q.is_los().cmp(&p.is_los()))
    });

    Ok(ChannelSnapshot {
        paths,
        tx_pose: *tx,
        rx_pose: *rx,
        time: 0.0,
    })
}
