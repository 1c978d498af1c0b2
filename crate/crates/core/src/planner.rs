//! Placeholder while the module is built.
pub struct Pose;
pub struct ScanReading;
pub struct Termination;
pub struct TraversalResult;
