//! Room worlds: walls, floating box obstacles, start and goal.

use super::geom::{rot_z, Vec3};
use crate::rng::RngStream;
use rand::Rng;

/// Obstacle catalog. Sizes are full extents (x, y, z) in meters before yaw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ShapeKind {
    Panel,
    Rod,
    PlateSmall,
    PlateLarge,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 4] = [ShapeKind::Panel, ShapeKind::Rod, ShapeKind::PlateSmall, ShapeKind::PlateLarge];

    pub fn size(self) -> Vec3 {
        match self {
            ShapeKind::Panel => Vec3::new(0.1, 1.2, 3.0),
            ShapeKind::Rod => Vec3::new(0.1, 0.1, 2.0),
            ShapeKind::PlateSmall => Vec3::new(0.1, 0.5, 0.5),
            ShapeKind::PlateLarge => Vec3::new(0.1, 1.0, 1.0),
        }
    }
}

/// An axis-aligned box rotated about +z, floating in the room.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct Obstacle {
    pub kind: ShapeKind,
    pub center: Vec3,
    pub yaw: f64,
    pub albedo: f64,
}

impl Obstacle {
    pub fn half_extents(&self) -> Vec3 {
        self.kind.size() * 0.5
    }

    /// Squared distance from a point to this box.
    pub fn distance_sq(&self, p: Vec3) -> f64 {
        let local = rot_z(p - self.center, -self.yaw);
        let h = self.half_extents();
        let dx = (local.x.abs() - h.x).max(0.0);
        let dy = (local.y.abs() - h.y).max(0.0);
        let dz = (local.z.abs() - h.z).max(0.0);
        dx * dx + dy * dy + dz * dz
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RoomSpec {
    pub length: f64,
    pub width: f64,
    pub height: f64,
    pub obstacles: Vec<Obstacle>,
    pub start: Vec3,
    pub goal: Vec3,
}

impl RoomSpec {
    pub fn contains(&self, p: Vec3) -> bool {
        (0.0..=self.length).contains(&p.x) && (0.0..=self.width).contains(&p.y) && (0.0..=self.height).contains(&p.z)
    }
}

/// Wall margin applied to obstacle centers and lateral start/goal positions.
pub const WALL_MARGIN: f64 = 0.5;

/// Samples a room at the given curriculum level (`level` = obstacle count).
///
/// Dimensions: length U(10,12), width U(5,8), height U(4,6). Start is drawn
/// from the first 20% of the length, the goal from the last 10%, heights from
/// [1, height-1]. Levels 0-5 place only panels; higher levels draw uniformly
/// from the full catalog. Obstacles are floating boxes with uniform centers
/// (0.5 m wall margin) and uniform yaw; placements that intrude on the start
/// or goal region are redrawn so episodes never begin in contact.
pub fn sample_room(level: usize, rng: &mut RngStream) -> RoomSpec {
    let length = rng.random_range(10.0..12.0);
    let width = rng.random_range(5.0..8.0);
    let height = rng.random_range(4.0..6.0);

    let start = Vec3::new(
        rng.random_range(WALL_MARGIN..0.2 * length),
        rng.random_range(WALL_MARGIN..width - WALL_MARGIN),
        rng.random_range(1.0..height - 1.0),
    );
    let goal = Vec3::new(
        rng.random_range(0.9 * length..length - WALL_MARGIN),
        rng.random_range(WALL_MARGIN..width - WALL_MARGIN),
        rng.random_range(1.0..height - 1.0),
    );

    let mut obstacles = Vec::with_capacity(level);
    for _ in 0..level {
        let kind = if level <= 5 {
            ShapeKind::Panel
        } else {
            ShapeKind::ALL[rng.random_range(0..ShapeKind::ALL.len())]
        };
        let albedo = rng.random_range(0.2..0.9);
        // Keep launch and goal regions clear; 20 tries then accept as-is.
        let mut placed = None;
        for _ in 0..20 {
            let candidate = Obstacle {
                kind,
                center: Vec3::new(
                    rng.random_range(WALL_MARGIN..length - WALL_MARGIN),
                    rng.random_range(WALL_MARGIN..width - WALL_MARGIN),
                    rng.random_range(WALL_MARGIN..height - WALL_MARGIN),
                ),
                yaw: rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
                albedo,
            };
            if candidate.distance_sq(start) > 0.6 * 0.6 && candidate.distance_sq(goal) > 1.2 * 1.2 {
                placed = Some(candidate);
                break;
            }
        }
        obstacles.push(placed.unwrap_or(Obstacle {
            kind,
            center: Vec3::new(length / 2.0, width / 2.0, height / 2.0),
            yaw: 0.0,
            albedo,
        }));
    }

    RoomSpec {
        length,
        width,
        height,
        obstacles,
        start,
        goal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng_stream;

    #[test]
    fn level_zero_has_no_obstacles() {
        let room = sample_room(0, &mut derive_rng_stream(1, "room", 0));
        assert!(room.obstacles.is_empty());
    }

    #[test]
    fn low_levels_use_only_panels() {
        let room = sample_room(3, &mut derive_rng_stream(1, "room", 1));
        assert_eq!(room.obstacles.len(), 3);
        assert!(room.obstacles.iter().all(|o| o.kind == ShapeKind::Panel));
    }

    #[test]
    fn high_levels_draw_all_shapes_roughly_uniformly() {
        let mut counts = [0usize; 4];
        let mut total = 0usize;
        for i in 0..1000 {
            let room = sample_room(8, &mut derive_rng_stream(2, "room", i));
            for o in &room.obstacles {
                let idx = ShapeKind::ALL.iter().position(|&k| k == o.kind).unwrap();
                counts[idx] += 1;
                total += 1;
            }
        }
        for c in counts {
            let freq = c as f64 / total as f64;
            assert!((freq - 0.25).abs() < 0.05, "shape frequency {freq}");
        }
    }

    #[test]
    fn dimensions_and_endpoints_within_ranges() {
        for i in 0..10_000 {
            let room = sample_room(2, &mut derive_rng_stream(3, "room", i));
            assert!((10.0..=12.0).contains(&room.length));
            assert!((5.0..=8.0).contains(&room.width));
            assert!((4.0..=6.0).contains(&room.height));
            assert!(room.start.x <= 0.2 * room.length);
            assert!(room.goal.x >= 0.9 * room.length);
            assert!(room.start.z >= 1.0 && room.start.z <= room.height - 1.0);
            assert!(room.goal.z >= 1.0 && room.goal.z <= room.height - 1.0);
        }
    }

    #[test]
    fn sampling_is_deterministic_in_seed_and_level() {
        let a = sample_room(4, &mut derive_rng_stream(5, "room", 9));
        let b = sample_room(4, &mut derive_rng_stream(5, "room", 9));
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
