//! Fast probabilistic collision-risk bounds for robot paths in the plane.
//!
//! Obstacles are "tethered": each has a known polygonal shape and an
//! uncertain location given by a probability density. For a candidate path
//! the robot footprint sweeps out an area `A`, and the risk of collision
//! with obstacle `k` is the Laugier integral of its location density over
//! the Minkowski-dilated swept area. Computing that exactly for `N` paths
//! and `K` obstacles costs `O(NK)`.
//!
//! This crate instead precomputes two global grids from the obstacle set —
//! an occupancy-rate field `G` and a smoothed contour field `∂Gσ` — and
//! evaluates an upper bound `F_D` on the expected number of collisions per
//! path from two Riemann sums against those grids. The per-path cost is
//! then independent of `K`, giving `O(N+K)` overall.
//!
//! Modules:
//! - [`geometry`]: polygons, poses, grids, rasterization, Minkowski dilation
//! - [`fields`]: Gaussian kernels, convolution, contour ridges, integration
//! - [`risk`]: the bound itself plus exact baselines
//! - [`oracle`]: Monte-Carlo ground truth for validation
//! - [`paths`]: candidate path generation and file I/O
//! - [`scenario`]: scene schema, templates, automatic grid sizing
//! - [`render`]: PPM heatmaps and path overlays
//! - [`bench`]: scaling benchmark harness
//! - [`cli`]: command-line entry points

pub mod bench;
pub mod cli;
pub mod fields;
pub mod geometry;
pub mod oracle;
pub mod paths;
pub mod render;
pub mod risk;
pub mod scenario;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Shape fails polygon invariants (too few vertices, degenerate area,
    /// self-intersection, ...).
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    /// Argument violates an operation precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Obstacle area is below one grid cell; finite-obstacle fields would
    /// diverge. Use the point-obstacle bound instead.
    #[error("point obstacle: {0}")]
    PointObstacle(String),
    /// The Monte-Carlo oracle only supports convex collision geometry.
    #[error("unsupported shape: {0}")]
    UnsupportedShape(String),
    /// Path sampling exhausted its retry budget without emitting any path.
    #[error("path generation failed: {0}")]
    GenerationFailed(String),
    /// Scene template could not place the requested obstacles.
    #[error("obstacle placement failed: {0}")]
    PlacementFailed(String),
    /// Malformed scenario or path file.
    #[error("parse error: {0}")]
    Parse(String),
    /// Non-finite values produced by a numeric stage.
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 1 input/schema, 2 numerical,
    /// 3 generation/placement.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) | Error::PointObstacle(_) => 2,
            Error::GenerationFailed(_) | Error::PlacementFailed(_) => 3,
            _ => 1,
        }
    }
}
