//! Differentiable silhouette rasterization of triangle meshes.
//!
//! A pixel's occupancy is a fold of per-face occlusion probabilities. Each
//! probability is a CDF applied to the signed pixel-to-triangle distance
//! scaled by a temperature, and the fold uses a T-conorm. Swapping the CDF
//! and the T-conorm gives a large family of renderers, all differentiable
//! through the same code path.
//!
//! ```
//! use diffsil::{icosphere, transform_project, render_silhouette, Camera, RenderConfig};
//!
//! let mesh = icosphere(1).unwrap();
//! let camera = Camera { width: 32, height: 32, ..Camera::default() };
//! let screen = transform_project(&mesh, &camera).unwrap();
//! let config = RenderConfig::new(
//!     "logistic".parse().unwrap(),
//!     "probabilistic".parse().unwrap(),
//!     0.01,
//!     32,
//! );
//! let image = render_silhouette(&screen, &config).unwrap();
//! assert!(image.get(16, 16) > 0.9);
//! assert!(image.get(0, 0) < 0.01);
//! ```

pub mod distributions;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod gradients;
pub mod meshes;
pub mod optimizer;
pub mod raster;
mod spec_text;
pub mod special;
pub mod tconorms;

pub use distributions::{cdf, pdf, DistributionSpec, Family};
pub use error::{Error, Result};
pub use geometry::{
    icosphere, load_obj, parse_obj, signed_distance, transform_project, Camera, CameraParam, Mesh,
    ScreenMesh,
};
pub use gradients::{
    finite_difference_check, finite_difference_check_screen, grad_loss_wrt_camera,
    grad_loss_wrt_screen, grad_loss_wrt_vertices, FdOptions, GradientReport, GradientTarget, Loss,
};
pub use raster::{hard_render, render_depth_aggregated, render_silhouette, Image, RenderConfig};
pub use tconorms::{aggregate, tconorm, TConormFamily, TConormSpec};
