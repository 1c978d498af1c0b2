//! Placeholder while the module is built.
pub struct World;
pub struct SceneParams;
pub struct CoverageReport;
