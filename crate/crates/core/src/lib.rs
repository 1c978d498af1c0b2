//! Laser-dot range finding and room-coverage traversal.
//!
//! The pipeline stages are:
//!
//! 1. **imaging** – PNG frames in, HSV matrices and threshold masks out.
//! 2. **detection** – 4-connected blob extraction, oval rejection, centroid.
//! 3. **ranging** – stepper-quantized centering search and the triangular
//!    distance model, with one-point calibration.
//! 4. **planner** – max-distance room traversal over an abstract range
//!    sensor, plus the naive-bounce baseline it is compared against.
//! 5. **simworld** – deterministic 2D world: exact raycasting, synthetic
//!    camera frames, robot motion, coverage metrics and path renderings.

pub mod detection;
pub mod geom;
pub mod imaging;
pub mod planner;
pub mod ranging;
pub mod simworld;

pub use detection::{Blob, DetectionConfig, DotDetection};
pub use imaging::{HsvImage, MonoMask, RgbImage};
pub use planner::{Pose, ScanReading, Termination, TraversalResult};
pub use ranging::{CameraModel, RangeModel, RotationReading};
pub use simworld::{CoverageReport, SceneParams, World};
