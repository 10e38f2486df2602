//! Satellite, beam and UE geometry.
//!
//! The ground is a local tangent plane (x east, y north, km) with the
//! satellite at nadir above the origin. Beam centers sit on a hexagonal
//! lattice with spacing equal to the inter-cell distance; ring `k` of the
//! lattice holds `6k` beams. Rings 0..=2 are the 19 statistics beams, the
//! outer rings only generate interference.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{self, Purpose};

/// Rings whose beams contribute to the KPIs.
pub const STATISTICS_RINGS: u32 = 2;

/// Axial neighbour offsets on the hex lattice, walked in ring order.
const AXIAL_DIRECTIONS: [(i32, i32); 6] = [(1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundPoint {
    /// East, km.
    pub x: f64,
    /// North, km.
    pub y: f64,
}

impl GroundPoint {
    pub const ORIGIN: GroundPoint = GroundPoint { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(&self, other: &GroundPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BeamRole {
    Statistics,
    Wraparound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Polarization {
    Rhcp,
    Lhcp,
}

/// Frequency reuse factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Frf {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "3")]
    Three,
}

impl Frf {
    pub fn colors(self) -> u8 {
        match self {
            Frf::One => 1,
            Frf::Three => 3,
        }
    }

    /// Outermost populated ring: two wraparound tiers for FRF1, four for FRF3.
    pub fn outer_ring(self) -> u32 {
        match self {
            Frf::One => STATISTICS_RINGS + 2,
            Frf::Three => STATISTICS_RINGS + 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Beam {
    pub id: usize,
    pub center: GroundPoint,
    /// Axial lattice coordinates `(q, r)`.
    pub axial: (i32, i32),
    pub ring: u32,
    pub role: BeamRole,
    pub freq_color: u8,
    pub pol_color: Polarization,
}

impl Beam {
    pub fn is_statistics(&self) -> bool {
        self.role == BeamRole::Statistics
    }

    pub fn is_adjacent(&self, other: &Beam) -> bool {
        let dq = self.axial.0 - other.axial.0;
        let dr = self.axial.1 - other.axial.1;
        AXIAL_DIRECTIONS.contains(&(dq, dr))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamLayout {
    pub beams: Vec<Beam>,
    pub sat_altitude_km: f64,
    pub icd_km: f64,
    pub frf: Frf,
}

impl BeamLayout {
    pub fn statistics_beams(&self) -> impl Iterator<Item = &Beam> {
        self.beams.iter().filter(|b| b.is_statistics())
    }

    pub fn statistics_count(&self) -> usize {
        self.statistics_beams().count()
    }

    /// Circumradius of a hexagonal cell.
    pub fn cell_radius_km(&self) -> f64 {
        self.icd_km / 3f64.sqrt()
    }

    pub fn nadir(&self) -> GroundPoint {
        GroundPoint::ORIGIN
    }
}

/// Distances and angles of one UE-beam pair as seen from the satellite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    pub slant_range_km: f64,
    pub off_boresight_deg: f64,
    pub elevation_deg: f64,
}

fn axial_to_ground(q: i32, r: i32, icd: f64) -> GroundPoint {
    let q = f64::from(q);
    let r = f64::from(r);
    GroundPoint::new(icd * (q + r / 2.0), icd * 3f64.sqrt() / 2.0 * r)
}

/// Builds the colored beam grid for the given reuse factor.
pub fn build_beam_layout(frf: Frf, icd_km: f64, altitude_km: f64) -> BeamLayout {
    debug_assert!(icd_km > 0.0 && altitude_km > 0.0);
    let mut beams = Vec::new();
    let mut push = |q: i32, r: i32, ring: u32| {
        let role = if ring <= STATISTICS_RINGS { BeamRole::Statistics } else { BeamRole::Wraparound };
        beams.push(Beam {
            id: beams.len(),
            center: axial_to_ground(q, r, icd_km),
            axial: (q, r),
            ring,
            role,
            freq_color: 0,
            pol_color: Polarization::Rhcp,
        });
    };
    push(0, 0, 0);
    for ring in 1..=frf.outer_ring() {
        let k = ring as i32;
        // start at direction 4 scaled by k, then walk the six sides
        let (mut q, mut r) = (AXIAL_DIRECTIONS[4].0 * k, AXIAL_DIRECTIONS[4].1 * k);
        for dir in AXIAL_DIRECTIONS {
            for _ in 0..ring {
                push(q, r, ring);
                q += dir.0;
                r += dir.1;
            }
        }
    }
    let layout = BeamLayout { beams, sat_altitude_km: altitude_km, icd_km, frf };
    crate::phy_link::assign_colors(layout)
}

/// A dropped UE before attachment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UePosition {
    pub id: usize,
    /// Beam whose cell the UE was dropped in.
    pub dropped_beam: usize,
    pub pos: GroundPoint,
}

/// True when `p` (relative to a cell center) lies in the lattice's Voronoi hexagon.
pub fn in_hex_cell(dx: f64, dy: f64, icd: f64) -> bool {
    let half = icd / 2.0 + 1e-12;
    let s = 3f64.sqrt() / 2.0;
    dx.abs() <= half && (0.5 * dx + s * dy).abs() <= half && (-0.5 * dx + s * dy).abs() <= half
}

/// Drops `per_beam` UEs uniformly inside every beam's hexagonal cell.
pub fn drop_ues(layout: &BeamLayout, per_beam: usize, seed: u64) -> Vec<UePosition> {
    let icd = layout.icd_km;
    let radius = layout.cell_radius_km();
    let half_width = icd / 2.0;
    let mut ues = Vec::with_capacity(layout.beams.len() * per_beam);
    for beam in &layout.beams {
        let mut rng = rng::stream(seed, Purpose::Drop, beam.id as u64);
        for _ in 0..per_beam {
            let (dx, dy) = loop {
                let dx = rng.gen_range(-half_width..=half_width);
                let dy = rng.gen_range(-radius..=radius);
                if in_hex_cell(dx, dy, icd) {
                    break (dx, dy);
                }
            };
            ues.push(UePosition {
                id: ues.len(),
                dropped_beam: beam.id,
                pos: GroundPoint::new(beam.center.x + dx, beam.center.y + dy),
            });
        }
    }
    ues
}

/// Geometry between a ground position and a beam of the layout.
pub fn link_geometry(pos: &GroundPoint, beam: &Beam, layout: &BeamLayout) -> LinkGeometry {
    let h = layout.sat_altitude_km;
    let nadir = layout.nadir();
    let ground = pos.distance(&nadir);
    let slant_range_km = h.hypot(ground);
    // vectors from the satellite to the beam center and to the UE
    let a = [beam.center.x - nadir.x, beam.center.y - nadir.y, -h];
    let b = [pos.x - nadir.x, pos.y - nadir.y, -h];
    let cross = [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
    let cross_norm = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    LinkGeometry {
        slant_range_km,
        off_boresight_deg: cross_norm.atan2(dot).to_degrees(),
        elevation_deg: h.atan2(ground).to_degrees(),
    }
}
