//! Soft silhouette rasterization.
//!
//! Pixel `p` gets occupancy `⊥_t F(d(p, t) / τ)`: the signed distance to
//! every face is turned into an occlusion probability by the CDF of the
//! configured distribution, and the probabilities are folded with the
//! configured T-conorm in ascending face order.
//!
//! Conventions:
//!
//! * pixel `(i, j)` is sampled at its center `(i + 0.5, j + 0.5)`, y down;
//! * distances are measured in normalized image units, `2 / max(width,
//!   height)` per pixel, so `τ` is resolution independent;
//! * a face only touches pixels within the cull radius of its bounding box,
//!   the distance beyond which its occupancy is below [`CULL_CUTOFF`];
//! * degenerate (zero-area) faces and faces with occupancy exactly 0 are
//!   neutral and skipped.

use std::io::Write;
use std::path::Path;

use crate::distributions::{cdf, DistributionSpec};
use crate::error::{Error, Result};
use crate::geometry::{DistanceQuery, ScreenMesh, TriangleGeom, Vec2};
use crate::tconorms::{TConormFamily, TConormSpec};

/// Occupancy below which a face is culled from a pixel.
pub const CULL_CUTOFF: f64 = 1e-10;

const TILE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderConfig {
    pub distribution: DistributionSpec,
    pub tconorm: TConormSpec,
    /// Temperature / scale of the perturbation, in normalized image units.
    pub tau: f64,
    pub width: usize,
    pub height: usize,
    /// Softmin temperature for depth-aggregated shading.
    pub depth_softmin_tau: Option<f64>,
    /// Depth of the background plane for depth aggregation.
    pub z_far: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            distribution: DistributionSpec::default(),
            tconorm: TConormSpec::default(),
            tau: 0.01,
            width: 64,
            height: 64,
            depth_softmin_tau: None,
            z_far: 100.0,
        }
    }
}

impl RenderConfig {
    pub fn new(
        distribution: DistributionSpec,
        tconorm: TConormSpec,
        tau: f64,
        size: usize,
    ) -> Self {
        Self {
            distribution,
            tconorm,
            tau,
            width: size,
            height: size,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::config(format!("tau must be > 0, got {}", self.tau)));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::config("image size must be at least 1x1"));
        }
        if let Some(t) = self.depth_softmin_tau {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::config(format!(
                    "depth softmin tau must be > 0, got {t}"
                )));
            }
        }
        Ok(())
    }

    /// Normalized distance units per pixel.
    pub fn distance_scale(&self) -> f64 {
        2.0 / self.width.max(self.height) as f64
    }

    /// Occupancy of one face at signed pixel distance `d_px`.
    pub fn occupancy(&self, d_px: f64) -> f64 {
        let (x, _) = self
            .distribution
            .scaled_argument(d_px * self.distance_scale(), self.tau);
        cdf(&self.distribution, x)
    }

    /// Pixel distance outside a face beyond which its occupancy stays below
    /// [`CULL_CUTOFF`], capped just past the image diagonal.
    pub fn cull_radius(&self) -> f64 {
        let diag = ((self.width * self.width + self.height * self.height) as f64).sqrt() + 2.0;
        if self.occupancy(-diag) >= CULL_CUTOFF {
            return diag;
        }
        let (mut lo, mut hi) = (0.0, diag);
        if self.occupancy(-lo) < CULL_CUTOFF {
            return 0.0;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.occupancy(-mid) >= CULL_CUTOFF {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// Row-major image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
}

impl Image {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// 8-bit quantization `round(v * 255)`.
    pub fn to_u8(&self) -> Vec<u8> {
        self.values
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect()
    }

    /// Binary PGM (P5, maxval 255).
    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        write!(f, "P5\n{} {}\n255\n", self.width, self.height)?;
        f.write_all(&self.to_u8())?;
        f.flush()?;
        Ok(())
    }

    /// 8-bit grayscale PNG.
    pub fn write_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        let mut enc = png::Encoder::new(file, self.width as u32, self.height as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc
            .write_header()
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        w.write_image_data(&self.to_u8())
            .map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(())
    }
}

/// Inclusive pixel index box.
#[derive(Debug, Clone, Copy)]
struct PixelBox {
    x0: usize,
    x1: usize,
    y0: usize,
    y1: usize,
}

impl PixelBox {
    #[inline]
    fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }
}

/// One face's contribution at one pixel.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Contribution {
    pub face: usize,
    pub query: DistanceQuery,
    /// Argument of the CDF.
    pub x: f64,
    pub prob: f64,
}

/// Per-render precomputation: face geometry, cull boxes, tile bins.
pub(crate) struct Prepared<'a> {
    pub config: &'a RenderConfig,
    pub screen: &'a ScreenMesh,
    pub geoms: Vec<TriangleGeom>,
    boxes: Vec<Option<PixelBox>>,
    tiles: Vec<Vec<u32>>,
    tiles_x: usize,
    pub scale: f64,
}

impl<'a> Prepared<'a> {
    pub fn new(screen: &'a ScreenMesh, config: &'a RenderConfig) -> Self {
        let (w, h) = (config.width, config.height);
        let radius = config.cull_radius();
        let geoms: Vec<TriangleGeom> = (0..screen.faces.len())
            .map(|f| TriangleGeom::new(screen.triangle(f)))
            .collect();
        let tiles_x = w.div_ceil(TILE);
        let tiles_y = h.div_ceil(TILE);
        let mut tiles = vec![Vec::new(); tiles_x * tiles_y];
        let mut boxes = Vec::with_capacity(geoms.len());
        for (fi, g) in geoms.iter().enumerate() {
            let b = if g.is_degenerate() {
                None
            } else {
                pixel_box(&g.pts, radius, w, h)
            };
            if let Some(b) = b {
                for ty in b.y0 / TILE..=b.y1 / TILE {
                    for tx in b.x0 / TILE..=b.x1 / TILE {
                        tiles[ty * tiles_x + tx].push(fi as u32);
                    }
                }
            }
            boxes.push(b);
        }
        Self {
            config,
            screen,
            geoms,
            boxes,
            tiles,
            tiles_x,
            scale: config.distance_scale(),
        }
    }

    /// Visits every face with nonzero occupancy at pixel `(x, y)`, in
    /// ascending face order.
    #[inline]
    pub fn for_each_contribution(&self, x: usize, y: usize, mut visit: impl FnMut(Contribution)) {
        let p: Vec2 = [x as f64 + 0.5, y as f64 + 0.5];
        let tile = &self.tiles[(y / TILE) * self.tiles_x + x / TILE];
        let dist = &self.config.distribution;
        for &fi in tile {
            let fi = fi as usize;
            let Some(b) = self.boxes[fi] else { continue };
            if !b.contains(x, y) {
                continue;
            }
            let q = self.geoms[fi].query(p);
            let (arg, _) = dist.scaled_argument(q.d * self.scale, self.config.tau);
            let prob = cdf(dist, arg);
            if prob > 0.0 {
                visit(Contribution {
                    face: fi,
                    query: q,
                    x: arg,
                    prob,
                });
            }
        }
    }

    /// Aggregated occupancy at one pixel.
    pub fn pixel_value(&self, x: usize, y: usize) -> f64 {
        let tc = &self.config.tconorm;
        if tc.family() == TConormFamily::Average {
            let mut sum = 0.0;
            self.for_each_contribution(x, y, |c| sum += c.prob);
            let n = self.screen.faces.len();
            return if n == 0 {
                0.0
            } else {
                (sum / n as f64).clamp(0.0, 1.0)
            };
        }
        let mut acc: Option<f64> = None;
        self.for_each_contribution(x, y, |c| {
            acc = Some(match acc {
                None => c.prob,
                Some(a) => tc.apply(a, c.prob),
            });
        });
        acc.unwrap_or(0.0)
    }

    pub fn render(&self) -> Image {
        let (w, h) = (self.config.width, self.config.height);
        let mut img = Image::zeros(w, h);
        for y in 0..h {
            for x in 0..w {
                img.values[y * w + x] = self.pixel_value(x, y);
            }
        }
        img
    }
}

fn pixel_box(pts: &[Vec2; 3], radius: f64, w: usize, h: usize) -> Option<PixelBox> {
    let minx = pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min) - radius;
    let maxx = pts.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max) + radius;
    let miny = pts.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min) - radius;
    let maxy = pts.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max) + radius;
    // centers i + 0.5 within [min, max]
    let x0 = (minx - 0.5).ceil().max(0.0);
    let x1 = (maxx - 0.5).floor().min(w as f64 - 1.0);
    let y0 = (miny - 0.5).ceil().max(0.0);
    let y1 = (maxy - 0.5).floor().min(h as f64 - 1.0);
    if !(x0 <= x1 && y0 <= y1) {
        return None;
    }
    Some(PixelBox {
        x0: x0 as usize,
        x1: x1 as usize,
        y0: y0 as usize,
        y1: y1 as usize,
    })
}

/// Soft silhouette of a projected mesh.
pub fn render_silhouette(screen: &ScreenMesh, config: &RenderConfig) -> Result<Image> {
    config.validate()?;
    Ok(Prepared::new(screen, config).render())
}

/// Classic binary coverage: a pixel is 1 iff its center lies inside (or on
/// the boundary of) at least one non-degenerate face.
pub fn hard_render(screen: &ScreenMesh, width: usize, height: usize) -> Image {
    let mut img = Image::zeros(width, height);
    for f in 0..screen.faces.len() {
        let g = TriangleGeom::new(screen.triangle(f));
        if g.is_degenerate() {
            continue;
        }
        let Some(b) = pixel_box(&g.pts, 0.0, width, height) else {
            continue;
        };
        for y in b.y0..=b.y1 {
            for x in b.x0..=b.x1 {
                if g.contains([x as f64 + 0.5, y as f64 + 0.5]) {
                    img.values[y * width + x] = 1.0;
                }
            }
        }
    }
    img
}

/// Blends one scalar per face by occupancy-masked softmin over depth.
///
/// At each pixel, face `i` with occupancy `oᵢ` and depth `zᵢ` (depth of the
/// closest point of the face, interpolated linearly in screen space) gets
/// weight `wᵢ = oᵢ · exp(-zᵢ / τ_d)`. The background (value 0, depth
/// `z_far`) gets `exp(-z_far / τ_d)`. The pixel value is
/// `Σ wᵢ vᵢ / (Σ wᵢ + w_bg)`.
pub fn render_depth_aggregated(
    screen: &ScreenMesh,
    config: &RenderConfig,
    face_values: &[f64],
) -> Result<Image> {
    config.validate()?;
    let tau_d = config
        .depth_softmin_tau
        .ok_or_else(|| Error::config("depth aggregation needs depth_softmin_tau"))?;
    if face_values.len() != screen.faces.len() {
        return Err(Error::config(format!(
            "{} face values for {} faces",
            face_values.len(),
            screen.faces.len()
        )));
    }
    let prep = Prepared::new(screen, config);
    let (w, h) = (config.width, config.height);
    let mut img = Image::zeros(w, h);
    let mut items: Vec<(f64, f64, f64)> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            items.clear();
            let p = [x as f64 + 0.5, y as f64 + 0.5];
            prep.for_each_contribution(x, y, |c| {
                let bary = prep.geoms[c.face].closest_barycentric(p, &c.query);
                let f = screen.faces[c.face];
                let z: f64 = (0..3).map(|k| bary[k] * screen.vertices[f[k]][2]).sum();
                items.push((c.prob, z, face_values[c.face]));
            });
            let zmin = items.iter().map(|it| it.1).fold(config.z_far, f64::min);
            let mut num = 0.0;
            let mut den = (-(config.z_far - zmin) / tau_d).exp();
            for &(o, z, v) in &items {
                let wgt = o * (-(z - zmin) / tau_d).exp();
                num += wgt * v;
                den += wgt;
            }
            img.values[y * w + x] = if den > 0.0 { num / den } else { 0.0 };
        }
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Family;

    fn cfg(dist: &str, tc: &str, tau: f64, size: usize) -> RenderConfig {
        RenderConfig::new(dist.parse().unwrap(), tc.parse().unwrap(), tau, size)
    }

    #[test]
    fn empty_mesh_renders_zero() {
        let screen = ScreenMesh {
            vertices: vec![],
            faces: vec![],
        };
        let img = render_silhouette(&screen, &cfg("logistic", "probabilistic", 0.1, 8)).unwrap();
        assert!(img.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pixel_on_edge_is_half_for_logistic() {
        // edge x = 4 passes through pixel centers (3.5 is center of col 3)
        let screen = ScreenMesh::from_triangles(&[[[3.5, -10.0], [30.0, 4.0], [3.5, 30.0]]]);
        let img = render_silhouette(&screen, &cfg("logistic", "probabilistic", 0.05, 16)).unwrap();
        assert!((img.get(3, 5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cull_radius_is_monotone_in_tau() {
        let a = cfg("logistic", "max", 0.01, 64).cull_radius();
        let b = cfg("logistic", "max", 0.02, 64).cull_radius();
        assert!(a < b);
        assert_eq!(cfg("levy", "max", 0.02, 64).cull_radius(), 0.0);
        let diag = cfg("cauchy", "max", 0.02, 64).cull_radius();
        assert!(diag > 90.0);
    }

    #[test]
    fn hard_render_matches_heaviside_max() {
        let screen = ScreenMesh::from_triangles(&[
            [[2.0, 3.0], [20.0, 5.5], [7.0, 25.0]],
            [[15.0, 15.0], [31.0, 18.0], [22.0, 30.0]],
        ]);
        let hard = hard_render(&screen, 32, 32);
        let soft = render_silhouette(&screen, &cfg("heaviside", "max", 0.1, 32)).unwrap();
        assert_eq!(hard, soft);
        assert!(hard.sum() > 50.0);
    }

    #[test]
    fn off_screen_triangle_is_empty() {
        let screen =
            ScreenMesh::from_triangles(&[[[-50.0, -50.0], [-40.0, -50.0], [-45.0, -40.0]]]);
        assert_eq!(hard_render(&screen, 16, 16).sum(), 0.0);
    }

    #[test]
    fn missing_depth_tau_is_an_error() {
        let screen = ScreenMesh::from_triangles(&[[[0.0, 0.0], [8.0, 0.0], [0.0, 8.0]]]);
        let c = cfg("logistic", "probabilistic", 0.01, 8);
        assert!(render_depth_aggregated(&screen, &c, &[1.0]).is_err());
    }

    #[test]
    fn invalid_tau_rejected() {
        let screen = ScreenMesh::from_triangles(&[]);
        let c = RenderConfig {
            tau: 0.0,
            ..RenderConfig::default()
        };
        assert!(render_silhouette(&screen, &c).is_err());
        let _ = Family::Logistic;
    }
}
