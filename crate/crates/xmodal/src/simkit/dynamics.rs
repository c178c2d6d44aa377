//! Simplified flight dynamics: first-order velocity and yaw-rate tracking
//! with quasi-static tilt, plus the random disturbance process.

use super::geom::{rot_z, wrap_angle, Vec3};
use crate::rng::RngStream;
use rand::Rng;

const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, Default, serde::Serialize, serde::Deserialize)]
pub struct RobotState {
    /// Position in the inertial frame, meters.
    pub pos: Vec3,
    /// Velocity in the inertial frame, m/s.
    pub vel: Vec3,
    /// Yaw, wrapped to (-pi, pi].
    pub yaw: f64,
    /// Achieved yaw rate, rad/s.
    pub yaw_rate: f64,
    /// Quasi-static tilt derived from commanded acceleration, rad.
    pub pitch: f64,
    pub roll: f64,
}

impl RobotState {
    pub fn at(pos: Vec3, yaw: f64) -> Self {
        Self {
            pos,
            yaw,
            ..Default::default()
        }
    }

    pub fn is_finite(&self) -> bool {
        self.pos.is_finite()
            && self.vel.is_finite()
            && self.yaw.is_finite()
            && self.yaw_rate.is_finite()
            && self.pitch.is_finite()
            && self.roll.is_finite()
    }
}

/// Body-frame velocity command plus yaw rate.
#[derive(Debug, Clone, Copy, Default)]
pub struct VelocityCommand {
    pub v_body: Vec3,
    pub yaw_rate: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct DynParams {
    /// Velocity tracking time constant, seconds.
    pub tau_v: f64,
    /// Yaw-rate tracking time constant, seconds.
    pub tau_omega: f64,
    /// Tilt clamp, radians.
    pub tilt_limit: f64,
}

impl Default for DynParams {
    fn default() -> Self {
        Self {
            tau_v: 0.3,
            tau_omega: 0.2,
            tilt_limit: 0.35,
        }
    }
}

/// Advances the state by `dt` under a body-frame velocity command.
///
/// The command rotates through the current yaw into the inertial frame;
/// achieved velocity and yaw rate follow first-order tracking; position and
/// yaw integrate the updated rates. Tilt is derived from the commanded
/// acceleration as if hovering quasi-statically and clamped.
pub fn step(state: &RobotState, cmd: &VelocityCommand, dt: f64, params: &DynParams) -> RobotState {
    debug_assert!(dt > 0.0);
    let v_cmd_inertial = rot_z(cmd.v_body, state.yaw);

    let alpha_v = dt / params.tau_v;
    let vel = state.vel + (v_cmd_inertial - state.vel) * alpha_v;
    let pos = state.pos + vel * dt;

    let alpha_w = dt / params.tau_omega;
    let yaw_rate = state.yaw_rate + (cmd.yaw_rate - state.yaw_rate) * alpha_w;
    let yaw = wrap_angle(state.yaw + yaw_rate * dt);

    // Commanded acceleration in the body frame drives the apparent tilt.
    let v_body = rot_z(state.vel, -state.yaw);
    let accel_body = (cmd.v_body - v_body) * (1.0 / params.tau_v);
    let pitch = (accel_body.x / GRAVITY).atan().clamp(-params.tilt_limit, params.tilt_limit);
    let roll = (accel_body.y / GRAVITY).atan().clamp(-params.tilt_limit, params.tilt_limit);

    RobotState {
        pos,
        vel,
        yaw,
        yaw_rate,
        pitch,
        roll,
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DisturbanceParams {
    /// Per-step Bernoulli probability of an impulse.
    pub prob: f64,
    /// Velocity impulse bound per component, m/s.
    pub vel_mag: f64,
    /// Yaw-rate impulse bound, rad/s.
    pub yaw_rate_mag: f64,
}

impl Default for DisturbanceParams {
    fn default() -> Self {
        Self {
            prob: 0.05,
            vel_mag: 0.3,
            yaw_rate_mag: 0.2,
        }
    }
}

/// With probability `prob`, adds a uniform velocity and yaw-rate impulse.
///
/// Draw order is fixed: one Bernoulli draw, then (on hit) vx, vy, vz, yaw.
pub fn apply_disturbance(state: &RobotState, params: &DisturbanceParams, rng: &mut RngStream) -> RobotState {
    let hit = rng.random_range(0.0..1.0) < params.prob;
    if !hit {
        return *state;
    }
    let mut out = *state;
    out.vel.x += rng.random_range(-params.vel_mag..params.vel_mag);
    out.vel.y += rng.random_range(-params.vel_mag..params.vel_mag);
    out.vel.z += rng.random_range(-params.vel_mag..params.vel_mag);
    out.yaw_rate += rng.random_range(-params.yaw_rate_mag..params.yaw_rate_mag);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng_stream;

    #[test]
    fn zero_command_from_rest_is_a_fixed_point() {
        let s0 = RobotState::at(Vec3::new(1.0, 2.0, 1.5), 0.3);
        let s1 = step(&s0, &VelocityCommand::default(), 0.1, &DynParams::default());
        assert_eq!(s1.pos, s0.pos);
        assert_eq!(s1.vel, Vec3::ZERO);
        assert_eq!(s1.yaw, s0.yaw);
        assert_eq!(s1.pitch, 0.0);
        assert_eq!(s1.roll, 0.0);
    }

    #[test]
    fn velocity_tracks_step_command_within_five_time_constants() {
        let params = DynParams::default();
        let cmd = VelocityCommand {
            v_body: Vec3::new(1.0, 0.0, 0.0),
            yaw_rate: 0.0,
        };
        let mut s = RobotState::default();
        let steps = (5.0 * params.tau_v / 0.1).round() as usize;
        for _ in 0..steps {
            s = step(&s, &cmd, 0.1, &params);
        }
        assert!((s.vel.x - 1.0).abs() < 0.01, "vx = {}", s.vel.x);
    }

    #[test]
    fn yaw_advances_one_radian_per_second_at_steady_state() {
        let params = DynParams::default();
        let cmd = VelocityCommand {
            v_body: Vec3::ZERO,
            yaw_rate: 1.0,
        };
        let mut s = RobotState::default();
        s.yaw_rate = 1.0; // tracking steady state
        for _ in 0..10 {
            s = step(&s, &cmd, 0.1, &params);
        }
        assert!((s.yaw - 1.0).abs() < 1e-9, "yaw = {}", s.yaw);
    }

    #[test]
    fn disturbance_frequency_matches_probability() {
        let params = DisturbanceParams::default();
        let mut rng = derive_rng_stream(1, "dist", 0);
        let base = RobotState::default();
        let mut hits = 0;
        let n = 10_000;
        for _ in 0..n {
            let s = apply_disturbance(&base, &params, &mut rng);
            if s.vel != base.vel || s.yaw_rate != base.yaw_rate {
                hits += 1;
                assert!(s.vel.x.abs() <= params.vel_mag);
                assert!(s.vel.y.abs() <= params.vel_mag);
                assert!(s.vel.z.abs() <= params.vel_mag);
                assert!(s.yaw_rate.abs() <= params.yaw_rate_mag);
            }
        }
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.05).abs() < 0.01, "impulse frequency {freq}");
    }

    #[test]
    fn zero_probability_never_disturbs() {
        let params = DisturbanceParams {
            prob: 0.0,
            ..Default::default()
        };
        let mut rng = derive_rng_stream(1, "dist", 1);
        let base = RobotState::at(Vec3::new(3.0, 1.0, 2.0), 0.7);
        for _ in 0..100 {
            let s = apply_disturbance(&base, &params, &mut rng);
            assert_eq!(s.vel, base.vel);
            assert_eq!(s.yaw_rate, base.yaw_rate);
        }
    }
}
