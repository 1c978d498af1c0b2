//! Triangulated range finding from a camera/laser pair on a stepper mount.
//!
//! The laser beam is fixed perpendicular to the camera–laser baseline. To
//! measure a distance, the camera rotates step by step until the dot sits on
//! the vertical center of the frame; the rotation angle closes a right
//! triangle whose far side is the target distance. A one-shot calibration at
//! unit distance fixes the baseline in calibration units, so every later
//! reading comes out as a proportion of that unit.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, TAU};
use thiserror::Error;

use crate::detection::{detect_laser_dot, DetectionConfig, DotDetection};
use crate::imaging::{rgb_to_hsv, ImageError, RgbImage};

#[derive(Debug, Error)]
pub enum RangeError {
    #[error("{what} must lie in ({lo}, {hi}), got {value}")]
    OutOfRange {
        what: &'static str,
        lo: f64,
        hi: f64,
        value: f64,
    },
    #[error("laser dot lost for {0} consecutive frames")]
    DotLost(u32),
    #[error("no convergence after {0} steps (actuator fault?)")]
    NoConvergence(u32),
    #[error("frame source failed: {0}")]
    Frame(String),
    #[error("actuator failed: {0}")]
    Actuator(String),
    #[error(transparent)]
    Image(#[from] ImageError),
}

/// Camera geometry plus the stepper's angular resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub image_width: u32,
    pub image_height: u32,
    /// Horizontal field of view in radians, in `(0, π)`.
    pub horizontal_fov: f64,
    pub steps_per_revolution: u32,
}

impl CameraModel {
    pub fn new(
        image_width: u32,
        image_height: u32,
        horizontal_fov: f64,
        steps_per_revolution: u32,
    ) -> Result<Self, RangeError> {
        if !(horizontal_fov > 0.0 && horizontal_fov < std::f64::consts::PI) {
            return Err(RangeError::OutOfRange {
                what: "horizontal_fov",
                lo: 0.0,
                hi: std::f64::consts::PI,
                value: horizontal_fov,
            });
        }
        if steps_per_revolution < 4 {
            return Err(RangeError::OutOfRange {
                what: "steps_per_revolution",
                lo: 4.0,
                hi: f64::INFINITY,
                value: steps_per_revolution as f64,
            });
        }
        Ok(Self {
            image_width,
            image_height,
            horizontal_fov,
            steps_per_revolution,
        })
    }

    /// Pinhole focal length in pixels, derived from width and FOV.
    pub fn focal_px(&self) -> f64 {
        (self.image_width as f64 / 2.0) / (self.horizontal_fov / 2.0).tan()
    }

    /// Rotation of a single stepper step, in radians.
    pub fn step_angle(&self) -> f64 {
        TAU / self.steps_per_revolution as f64
    }
}

/// Calibration product: the camera–laser baseline expressed in calibration
/// units, plus the angle observed at calibration distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeModel {
    pub baseline: f64,
    pub calibration_angle: f64,
}

/// Result of a centering search: the winning step and its leftover offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationReading {
    pub step_index: i64,
    /// `step_index * 2π / steps_per_revolution`.
    pub angle: f64,
    /// Dot offset still visible at the winning step, in pixels.
    pub residual_offset_px: f64,
}

/// Blocking source of camera frames for the actuator's current step.
pub trait FrameSource {
    fn next_frame(&mut self) -> Result<RgbImage, RangeError>;
}

/// Single-step rotation actuator with absolute position readback.
///
/// Positive steps rotate the camera toward the laser side, i.e. they reduce
/// a positive (right-of-center) dot offset.
pub trait RotationActuator {
    fn step(&mut self, delta: i64) -> Result<(), RangeError>;
    fn position(&self) -> i64;
}

/// Glue for driving a search from a separate frame source and actuator.
pub struct Rig<F, A> {
    pub frames: F,
    pub actuator: A,
}

impl<F: FrameSource, A> FrameSource for Rig<F, A> {
    fn next_frame(&mut self) -> Result<RgbImage, RangeError> {
        self.frames.next_frame()
    }
}

impl<F, A: RotationActuator> RotationActuator for Rig<F, A> {
    fn step(&mut self, delta: i64) -> Result<(), RangeError> {
        self.actuator.step(delta)
    }

    fn position(&self) -> i64 {
        self.actuator.position()
    }
}

/// Detection thresholds plus the search's tolerance for dropped frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub detection: DetectionConfig,
    /// Consecutive no-dot frames tolerated before giving up.
    pub max_lost_frames: u32,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            detection: DetectionConfig::default(),
            max_lost_frames: 5,
        }
    }
}

/// Signed sub-pixel distance of the dot from the vertical center column.
/// Positive means the dot sits right of center.
pub fn pixel_offset(dot: &DotDetection) -> f64 {
    dot.centroid.0 - (dot.image_width as f64 - 1.0) / 2.0
}

/// Camera rotation for an absolute step index.
pub fn angle_from_step(step_index: i64, cam: &CameraModel) -> f64 {
    step_index as f64 * cam.step_angle()
}

fn measure_offset<R: FrameSource>(
    rig: &mut R,
    cfg: &SearchConfig,
) -> Result<f64, RangeError> {
    for _ in 0..cfg.max_lost_frames.max(1) {
        let frame = rig.next_frame()?;
        let hsv = rgb_to_hsv(&frame);
        if let Some(dot) = detect_laser_dot(&hsv, &cfg.detection)? {
            return Ok(pixel_offset(&dot));
        }
    }
    Err(RangeError::DotLost(cfg.max_lost_frames.max(1)))
}

/// Rotates the camera one step at a time until the dot's pixel offset stops
/// shrinking, then returns (and re-positions the actuator at) the best step.
///
/// The stepping direction is the sign of the current offset. The search ends
/// when the offset reaches zero, changes sign, or grows in magnitude; it
/// fails with [`RangeError::DotLost`] after `max_lost_frames` consecutive
/// frames with no detection and with [`RangeError::NoConvergence`] once the
/// step count exceeds a full revolution.
pub fn center_dot_search<R>(
    rig: &mut R,
    cam: &CameraModel,
    cfg: &SearchConfig,
) -> Result<RotationReading, RangeError>
where
    R: FrameSource + RotationActuator,
{
    let mut offset = measure_offset(rig, cfg)?;
    let mut best = (rig.position(), offset);
    if offset == 0.0 {
        return Ok(reading_for(best, cam));
    }
    let initial_sign = offset.signum();
    let direction = if offset > 0.0 { 1 } else { -1 };

    let mut steps_taken: u32 = 0;
    loop {
        if steps_taken >= cam.steps_per_revolution {
            return Err(RangeError::NoConvergence(steps_taken));
        }
        let prev_abs = offset.abs();
        rig.step(direction)?;
        steps_taken += 1;
        offset = measure_offset(rig, cfg)?;
        if offset.abs() < best.1.abs() {
            best = (rig.position(), offset);
        }
        if offset == 0.0 || offset.signum() != initial_sign || offset.abs() >= prev_abs {
            break;
        }
    }

    // Leave the actuator parked on the winning step.
    let delta = best.0 - rig.position();
    if delta != 0 {
        rig.step(delta)?;
    }
    Ok(reading_for(best, cam))
}

fn reading_for((step_index, residual): (i64, f64), cam: &CameraModel) -> RotationReading {
    RotationReading {
        step_index,
        angle: angle_from_step(step_index, cam),
        residual_offset_px: residual,
    }
}

/// Builds a [`RangeModel`] from the centering angle observed with the target
/// exactly one calibration unit away.
///
/// The unit distance is the triangle side opposite the centering angle, so
/// the baseline comes out as `tan(angle)` calibration units.
pub fn calibrate_unit(centering_angle: f64) -> Result<RangeModel, RangeError> {
    if !(centering_angle > 0.0 && centering_angle < FRAC_PI_2) {
        return Err(RangeError::OutOfRange {
            what: "centering_angle",
            lo: 0.0,
            hi: FRAC_PI_2,
            value: centering_angle,
        });
    }
    Ok(RangeModel {
        baseline: centering_angle.tan(),
        calibration_angle: centering_angle,
    })
}

/// Distance to the target for a centering angle, in calibration units.
///
/// Law of sines on the right triangle: `baseline · sin(π/2 − angle) /
/// sin(angle)`, strictly decreasing on `(0, π/2)`.
pub fn distance_from_angle(model: &RangeModel, angle: f64) -> Result<f64, RangeError> {
    if !(angle > 0.0 && angle < FRAC_PI_2) {
        return Err(RangeError::OutOfRange {
            what: "angle",
            lo: 0.0,
            hi: FRAC_PI_2,
            value: angle,
        });
    }
    Ok(model.baseline * (FRAC_PI_2 - angle).sin() / angle.sin())
}

/// How much one stepper step shrinks the dot's absolute offset when the
/// camera still points straight ahead at a target `d` away.
///
/// Once this falls below half a pixel the search cannot make headway: the
/// dot has effectively converged with the center plane (the vanishing
/// point). Negative values mean a single step already overshoots.
fn step_offset_gain(d: f64, baseline: f64, cam: &CameraModel) -> f64 {
    let theta = (baseline / d).atan();
    cam.focal_px() * (theta.tan().abs() - (theta - cam.step_angle()).tan().abs())
}

/// Largest distance at which one stepper step still moves the dot toward
/// center by at least half a pixel, found by bisection to 1e-6 relative
/// tolerance. Grows with camera resolution and with stepper resolution.
pub fn max_resolvable_distance(model: &RangeModel, cam: &CameraModel) -> f64 {
    const HALF_PIXEL: f64 = 0.5;
    let b = model.baseline;
    let mut lo = 1e-9;
    if b <= 0.0 || step_offset_gain(lo, b, cam) < HALF_PIXEL {
        return 0.0;
    }
    let mut hi = 1.0;
    while step_offset_gain(hi, b, cam) >= HALF_PIXEL {
        hi *= 2.0;
        if hi > 1e15 {
            return f64::INFINITY;
        }
    }
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if step_offset_gain(mid, b, cam) >= HALF_PIXEL {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Worst-case distance error at true distance `d` when the measured
/// centering angle may be off by one full step plus a half-pixel of
/// centroid error. Infinite once the angle uncertainty swallows the
/// whole centering angle.
pub fn quantization_bound(model: &RangeModel, cam: &CameraModel, d: f64) -> f64 {
    let b = model.baseline;
    let theta = (b / d).atan();
    let delta = cam.step_angle() + (0.5 / cam.focal_px()).atan();
    let low = theta - delta;
    if low <= 0.0 {
        return f64::INFINITY;
    }
    let high = (theta + delta).min(FRAC_PI_2 - 1e-12);
    let d_far = b / low.tan();
    let d_near = b / high.tan();
    (d_far - d).max(d - d_near)
}
