//! Per-pixel raycast camera producing planar depth and Lambertian grayscale.
//!
//! Rays are parameterized so the parameter `t` equals distance along the
//! optical axis (planar depth): camera-frame directions are (1, y, z) with
//! unit forward component. Depth uses a d_max cutoff with 0 encoding
//! "no return"; grayscale always shades the nearest surface.

use super::geom::{Mat3, Vec3};
use super::room::RoomSpec;
use super::RobotState;
use crate::rng::RngStream;
use ndarray::Array2;
use rand::Rng;

#[derive(Debug, Clone, Copy)]
pub struct CameraIntrinsics {
    pub width: usize,
    pub height: usize,
    pub hfov_deg: f64,
    pub vfov_deg: f64,
    /// Depth range cutoff in meters; beyond it the sensor reports no return.
    pub d_max: f64,
}

impl CameraIntrinsics {
    pub fn with_resolution(size: usize) -> Self {
        Self {
            width: size,
            height: size,
            hfov_deg: 87.0,
            vfov_deg: 58.0,
            d_max: 10.0,
        }
    }
}

/// Per-episode camera mounting error: body-frame translation plus
/// roll/pitch/yaw offsets.
#[derive(Debug, Clone, Copy, Default)]
pub struct CameraPerturb {
    pub translation: Vec3,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

/// Draws a perturbation with translations U(-t_max, t_max) per axis and
/// rotations U(-r_max, r_max) per axis. Draw order: tx ty tz, roll pitch yaw.
pub fn sample_camera_perturb(t_max: f64, r_max: f64, rng: &mut RngStream) -> CameraPerturb {
    let mut draw = |m: f64| if m > 0.0 { rng.random_range(-m..m) } else { 0.0 };
    CameraPerturb {
        translation: Vec3::new(draw(t_max), draw(t_max), draw(t_max)),
        roll: draw(r_max),
        pitch: draw(r_max),
        yaw: draw(r_max),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CameraPose {
    pub origin: Vec3,
    pub rot: Mat3,
}

/// Camera pose: mounted at the robot center facing body-x, yaw-aligned with
/// the vehicle, composed with the episode perturbation.
pub fn camera_pose(state: &RobotState, perturb: &CameraPerturb) -> CameraPose {
    let yaw_rot = Mat3::rot_z(state.yaw);
    let perturb_rot = Mat3::rot_z(perturb.yaw)
        .mul_mat(&Mat3::rot_y(perturb.pitch))
        .mul_mat(&Mat3::rot_x(perturb.roll));
    CameraPose {
        origin: state.pos + yaw_rot.mul_vec(perturb.translation),
        rot: yaw_rot.mul_mat(&perturb_rot),
    }
}

/// Camera-frame ray direction for a pixel center: x forward (unit), y left,
/// z up. Kept public so reference intersectors can reuse the exact rays.
pub fn ray_dir_cam(intr: &CameraIntrinsics, row: usize, col: usize) -> Vec3 {
    let tan_h = (intr.hfov_deg.to_radians() / 2.0).tan();
    let tan_v = (intr.vfov_deg.to_radians() / 2.0).tan();
    let u = (2.0 * (col as f64 + 0.5) / intr.width as f64 - 1.0) * tan_h;
    let v = (1.0 - 2.0 * (row as f64 + 0.5) / intr.height as f64) * tan_v;
    Vec3::new(1.0, -u, v)
}

#[derive(Debug, Clone, Copy)]
pub struct Hit {
    /// Ray parameter = distance along the optical axis.
    pub t: f64,
    pub normal: Vec3,
    pub albedo: f64,
    /// 0 = room shell, i+1 = obstacle i.
    pub id: u16,
}

const T_EPS: f64 = 1e-9;
const WALL_ALBEDO: f64 = 0.5;

/// Exit intersection with the room shell for a ray starting inside.
fn intersect_room(room: &RoomSpec, o: Vec3, d: Vec3) -> Hit {
    let mut best_t = f64::INFINITY;
    let mut normal = Vec3::ZERO;
    let axes: [(f64, f64, f64, Vec3); 3] = [
        (o.x, d.x, room.length, Vec3::new(1.0, 0.0, 0.0)),
        (o.y, d.y, room.width, Vec3::new(0.0, 1.0, 0.0)),
        (o.z, d.z, room.height, Vec3::new(0.0, 0.0, 1.0)),
    ];
    for (oa, da, hi, axis) in axes {
        if da == 0.0 {
            continue;
        }
        let face = if da > 0.0 { hi } else { 0.0 };
        let t = (face - oa) / da;
        if t > T_EPS && t < best_t {
            best_t = t;
            normal = axis * (-da.signum());
        }
    }
    Hit {
        t: best_t,
        normal,
        albedo: WALL_ALBEDO,
        id: 0,
    }
}

/// Slab intersection with an obstacle box in its local frame.
fn intersect_obstacle(obstacle: &super::room::Obstacle, o: Vec3, d: Vec3) -> Option<(f64, Vec3)> {
    let (s, c) = (-obstacle.yaw).sin_cos();
    let rel = o - obstacle.center;
    let ol = Vec3::new(c * rel.x - s * rel.y, s * rel.x + c * rel.y, rel.z);
    let dl = Vec3::new(c * d.x - s * d.y, s * d.x + c * d.y, d.z);
    let h = obstacle.half_extents();

    let mut t_enter = f64::NEG_INFINITY;
    let mut t_exit = f64::INFINITY;
    let mut enter_axis = 0usize;
    let mut enter_sign = 0.0f64;
    for (axis, (oa, da, ha)) in [(ol.x, dl.x, h.x), (ol.y, dl.y, h.y), (ol.z, dl.z, h.z)].into_iter().enumerate() {
        if da == 0.0 {
            if oa < -ha || oa > ha {
                return None;
            }
            continue;
        }
        let t1 = (-ha - oa) / da;
        let t2 = (ha - oa) / da;
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        if lo > t_enter {
            t_enter = lo;
            enter_axis = axis;
            enter_sign = -da.signum();
        }
        t_exit = t_exit.min(hi);
    }
    if t_enter > t_exit || t_enter <= T_EPS {
        return None;
    }
    // Face normal in local frame, rotated back to world.
    let mut nl = Vec3::ZERO;
    match enter_axis {
        0 => nl.x = enter_sign,
        1 => nl.y = enter_sign,
        _ => nl.z = enter_sign,
    }
    let (s2, c2) = obstacle.yaw.sin_cos();
    let n = Vec3::new(c2 * nl.x - s2 * nl.y, s2 * nl.x + c2 * nl.y, nl.z);
    Some((t_enter, n))
}

/// Nearest hit across the room shell and every obstacle.
pub fn intersect_scene(room: &RoomSpec, o: Vec3, d: Vec3) -> Hit {
    let mut best = intersect_room(room, o, d);
    for (i, obstacle) in room.obstacles.iter().enumerate() {
        if let Some((t, normal)) = intersect_obstacle(obstacle, o, d) {
            if t < best.t {
                best = Hit {
                    t,
                    normal,
                    albedo: obstacle.albedo,
                    id: (i + 1) as u16,
                };
            }
        }
    }
    best
}

/// Fixed directional light (pointing toward the light source).
pub const LIGHT_DIR: Vec3 = Vec3 {
    x: 0.3440,
    y: 0.4414,
    z: 0.8291,
};
const AMBIENT: f64 = 0.15;

#[derive(Debug, Clone)]
pub struct SensorFrame {
    /// Planar depth normalized by d_max; 0 = no return in range.
    pub depth: Array2<f64>,
    /// Lambertian shading in [0, 1].
    pub gray: Array2<f64>,
    /// Perturbation active for this frame's episode.
    pub perturb: CameraPerturb,
}

pub fn render(room: &RoomSpec, state: &RobotState, perturb: &CameraPerturb, intr: &CameraIntrinsics) -> SensorFrame {
    render_with_ids(room, state, perturb, intr).0
}

/// Like [`render`] but also returns per-pixel entity ids (0 = room shell,
/// i+1 = obstacle i).
pub fn render_with_ids(
    room: &RoomSpec,
    state: &RobotState,
    perturb: &CameraPerturb,
    intr: &CameraIntrinsics,
) -> (SensorFrame, Array2<u16>) {
    let pose = camera_pose(state, perturb);
    let mut depth = Array2::<f64>::zeros((intr.height, intr.width));
    let mut gray = Array2::<f64>::zeros((intr.height, intr.width));
    let mut ids = Array2::<u16>::zeros((intr.height, intr.width));
    for row in 0..intr.height {
        for col in 0..intr.width {
            let dir = pose.rot.mul_vec(ray_dir_cam(intr, row, col));
            let hit = intersect_scene(room, pose.origin, dir);
            depth[[row, col]] = if hit.t.is_finite() && hit.t <= intr.d_max {
                hit.t / intr.d_max
            } else {
                0.0
            };
            let shade = hit.albedo * hit.normal.dot(LIGHT_DIR).max(0.0) + AMBIENT;
            gray[[row, col]] = shade.clamp(0.0, 1.0);
            ids[[row, col]] = hit.id;
        }
    }
    (
        SensorFrame {
            depth,
            gray,
            perturb: *perturb,
        },
        ids,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simkit::room::{Obstacle, ShapeKind};

    fn empty_room() -> RoomSpec {
        RoomSpec {
            length: 11.0,
            width: 6.0,
            height: 5.0,
            obstacles: vec![],
            start: Vec3::new(1.0, 3.0, 2.0),
            goal: Vec3::new(10.0, 3.0, 2.0),
        }
    }

    #[test]
    fn center_pixel_sees_far_wall_at_planar_distance() {
        // Camera 5 m from the far wall, facing it: center depth = 5/10.
        let mut room = empty_room();
        room.length = 11.0;
        let state = RobotState::at(Vec3::new(6.0, 3.0, 2.0), 0.0);
        let intr = CameraIntrinsics::with_resolution(17); // odd => a true center pixel
        let frame = render(&room, &state, &CameraPerturb::default(), &intr);
        let center = frame.depth[[8, 8]];
        assert!((center - 0.5).abs() < 1e-6, "center depth {center}");
    }

    #[test]
    fn surfaces_beyond_range_report_no_return() {
        // Far wall 10.5 m away: depth 0 at the center, but grayscale still shades it.
        let room = empty_room();
        let state = RobotState::at(Vec3::new(0.5, 3.0, 2.0), 0.0);
        let intr = CameraIntrinsics::with_resolution(17);
        let frame = render(&room, &state, &CameraPerturb::default(), &intr);
        assert_eq!(frame.depth[[8, 8]], 0.0);
        assert!(frame.gray[[8, 8]] > 0.0);
    }

    #[test]
    fn panel_two_meters_ahead_has_uniform_planar_depth() {
        let mut room = empty_room();
        room.obstacles.push(Obstacle {
            kind: ShapeKind::Panel,
            center: Vec3::new(3.0, 3.0, 2.0),
            yaw: 0.0,
            albedo: 0.8,
        });
        let state = RobotState::at(Vec3::new(0.95, 3.0, 2.0), 0.0);
        let intr = CameraIntrinsics::with_resolution(33);
        let (frame, ids) = render_with_ids(&room, &state, &CameraPerturb::default(), &intr);
        let mut covered = 0;
        for ((r, c), &id) in ids.indexed_iter() {
            if id == 1 {
                covered += 1;
                // Planar depth has no cosine falloff: every panel pixel reads
                // the perpendicular distance to the front face.
                assert!((frame.depth[[r, c]] - 0.2).abs() < 1e-9);
            }
        }
        assert!(covered > 0, "panel not visible");
    }

    #[test]
    fn ids_distinguish_obstacles_from_walls() {
        let mut room = empty_room();
        room.obstacles.push(Obstacle {
            kind: ShapeKind::PlateLarge,
            center: Vec3::new(4.0, 3.0, 2.0),
            yaw: 0.3,
            albedo: 0.4,
        });
        let state = RobotState::at(Vec3::new(1.0, 3.0, 2.0), 0.0);
        let intr = CameraIntrinsics::with_resolution(33);
        let (_, ids) = render_with_ids(&room, &state, &CameraPerturb::default(), &intr);
        assert!(ids.iter().any(|&i| i == 1));
        assert!(ids.iter().any(|&i| i == 0));
    }

    #[test]
    fn render_is_deterministic() {
        let room = empty_room();
        let state = RobotState::at(Vec3::new(2.0, 3.0, 2.0), 0.4);
        let intr = CameraIntrinsics::with_resolution(16);
        let p = CameraPerturb {
            translation: Vec3::new(0.01, -0.02, 0.03),
            roll: 0.01,
            pitch: -0.02,
            yaw: 0.015,
        };
        let a = render(&room, &state, &p, &intr);
        let b = render(&room, &state, &p, &intr);
        assert_eq!(a.depth, b.depth);
        assert_eq!(a.gray, b.gray);
    }
}
