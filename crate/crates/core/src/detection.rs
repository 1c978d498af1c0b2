//! Blob extraction from binary masks and laser-dot identification.
//!
//! Blobs are maximal 4-connected groups of true pixels. Reflections of the
//! laser dot tend to smear into elongated shapes, so candidates whose
//! bounding box is far from square are rejected before the centroid of the
//! surviving blob is reported.

use crate::imaging::{hue_mask, luminosity_mask, mask_and, HsvImage, ImageError, MonoMask};

/// A 4-connected group of mask pixels with its exact bounding box.
///
/// Coordinates are `(x, y)` = (column, row), sorted row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blob {
    coords: Vec<(u32, u32)>,
    bbox: (u32, u32, u32, u32),
}

impl Blob {
    /// Pixel coordinates, row-major order, no duplicates.
    pub fn coords(&self) -> &[(u32, u32)] {
        &self.coords
    }

    /// `(min_x, min_y, max_x, max_y)`, the exact envelope of the coords.
    pub fn bbox(&self) -> (u32, u32, u32, u32) {
        self.bbox
    }

    pub fn pixel_count(&self) -> usize {
        self.coords.len()
    }

    fn from_unsorted(mut coords: Vec<(u32, u32)>) -> Self {
        debug_assert!(!coords.is_empty());
        coords.sort_unstable_by_key(|&(x, y)| (y, x));
        let mut bbox = (u32::MAX, u32::MAX, 0, 0);
        for &(x, y) in &coords {
            bbox.0 = bbox.0.min(x);
            bbox.1 = bbox.1.min(y);
            bbox.2 = bbox.2.max(x);
            bbox.3 = bbox.3.max(y);
        }
        Self { coords, bbox }
    }
}

/// A detected laser dot: the surviving blob and its sub-pixel centroid.
#[derive(Debug, Clone, PartialEq)]
pub struct DotDetection {
    pub centroid: (f64, f64),
    pub blob: Blob,
    pub image_width: u32,
    pub image_height: u32,
}

/// Thresholds for the full detection pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionConfig {
    /// Minimum HSV value for the luminosity filter.
    pub value_threshold: f64,
    /// Target hue on the `[0, 1)` wheel.
    pub hue_target: f64,
    /// Maximum circular hue distance from the target, in `[0, 0.5]`.
    pub hue_threshold: f64,
    /// Saturation floor; 0 disables it.
    pub saturation_min: f64,
    /// Blobs below this pixel count are discarded as artifacts.
    pub min_blob_size: usize,
    /// Minimum bounding-box side ratio for a blob to count as a dot.
    pub min_circle_ratio: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        // Tuned for the simulator's green dot on a dark background.
        Self {
            value_threshold: 0.8,
            hue_target: 1.0 / 3.0,
            hue_threshold: 0.1,
            saturation_min: 0.3,
            min_blob_size: 4,
            min_circle_ratio: 0.75,
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<(), ImageError> {
        let unit = |what: &'static str, v: f64| -> Result<(), ImageError> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(ImageError::OutOfRange {
                    what,
                    lo: 0.0,
                    hi: 1.0,
                    value: v,
                })
            }
        };
        unit("value_threshold", self.value_threshold)?;
        unit("hue_target", self.hue_target)?;
        unit("saturation_min", self.saturation_min)?;
        if !(0.0..=0.5).contains(&self.hue_threshold) {
            return Err(ImageError::OutOfRange {
                what: "hue_threshold",
                lo: 0.0,
                hi: 0.5,
                value: self.hue_threshold,
            });
        }
        if !(self.min_circle_ratio > 0.0 && self.min_circle_ratio <= 1.0) {
            return Err(ImageError::OutOfRange {
                what: "min_circle_ratio",
                lo: 0.0,
                hi: 1.0,
                value: self.min_circle_ratio,
            });
        }
        if self.min_blob_size == 0 {
            return Err(ImageError::OutOfRange {
                what: "min_blob_size",
                lo: 1.0,
                hi: f64::INFINITY,
                value: 0.0,
            });
        }
        Ok(())
    }
}

/// Extracts all maximal 4-connected components with at least
/// `min_blob_size` pixels.
///
/// Blobs are ordered by their first pixel in a row-major scan, which makes
/// the output deterministic regardless of labeling internals.
pub fn find_blobs(mask: &MonoMask, min_blob_size: usize) -> Vec<Blob> {
    let min_blob_size = min_blob_size.max(1);
    let (w, h) = (mask.width() as usize, mask.height() as usize);
    let bits = mask.bits();
    let mut visited = vec![false; w * h];
    let mut blobs = Vec::new();
    let mut stack: Vec<usize> = Vec::new();

    for start in 0..w * h {
        if !bits[start] || visited[start] {
            continue;
        }
        let mut coords = Vec::new();
        visited[start] = true;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            coords.push((x as u32, y as u32));
            if x > 0 && bits[i - 1] && !visited[i - 1] {
                visited[i - 1] = true;
                stack.push(i - 1);
            }
            if x + 1 < w && bits[i + 1] && !visited[i + 1] {
                visited[i + 1] = true;
                stack.push(i + 1);
            }
            if y > 0 && bits[i - w] && !visited[i - w] {
                visited[i - w] = true;
                stack.push(i - w);
            }
            if y + 1 < h && bits[i + w] && !visited[i + w] {
                visited[i + w] = true;
                stack.push(i + w);
            }
        }
        if coords.len() >= min_blob_size {
            blobs.push(Blob::from_unsorted(coords));
        }
    }
    blobs
}

/// Ratio of the blob's bounding-box side lengths, in `(0, 1]`.
///
/// 1.0 means a square envelope (a circular blob); elongated reflections
/// score lower. Extents are inclusive, so a single pixel scores 1.0.
pub fn circle_ratio(blob: &Blob) -> f64 {
    let (min_x, min_y, max_x, max_y) = blob.bbox();
    let w = (max_x - min_x + 1) as f64;
    let h = (max_y - min_y + 1) as f64;
    w.min(h) / w.max(h)
}

/// Keeps blobs whose [`circle_ratio`] is at least `min_circle_ratio`,
/// preserving order.
pub fn reject_ovals(blobs: Vec<Blob>, min_circle_ratio: f64) -> Vec<Blob> {
    blobs
        .into_iter()
        .filter(|b| circle_ratio(b) >= min_circle_ratio)
        .collect()
}

/// Unweighted arithmetic mean of the blob's pixel coordinates.
pub fn centroid(blob: &Blob) -> (f64, f64) {
    let n = blob.pixel_count() as f64;
    let (sx, sy) = blob
        .coords()
        .iter()
        .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x as f64, sy + y as f64));
    (sx / n, sy / n)
}

/// Runs the full pipeline: luminosity mask, hue mask, AND, blob extraction,
/// oval rejection. Returns `None` when no blob survives (no dot visible).
///
/// If several blobs survive, the largest by pixel count wins; ties fall to
/// the largest circle ratio, then to row-major scan order.
pub fn detect_laser_dot(
    img: &HsvImage,
    cfg: &DetectionConfig,
) -> Result<Option<DotDetection>, ImageError> {
    cfg.validate()?;
    let bright = luminosity_mask(img, cfg.value_threshold)?;
    let colored = hue_mask(img, cfg.hue_target, cfg.hue_threshold, cfg.saturation_min)?;
    let combined = mask_and(&bright, &colored)?;
    let blobs = find_blobs(&combined, cfg.min_blob_size);
    let survivors = reject_ovals(blobs, cfg.min_circle_ratio);

    let best = survivors.into_iter().enumerate().max_by(|(ia, a), (ib, b)| {
        a.pixel_count()
            .cmp(&b.pixel_count())
            .then(
                circle_ratio(a)
                    .partial_cmp(&circle_ratio(b))
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
            // Earlier scan order wins ties, so compare indices reversed.
            .then(ib.cmp(ia))
    });
    Ok(best.map(|(_, blob)| DotDetection {
        centroid: centroid(&blob),
        blob,
        image_width: img.width(),
        image_height: img.height(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask_from_rows(rows: &[&str]) -> MonoMask {
        let h = rows.len() as u32;
        let w = rows[0].len() as u32;
        MonoMask::from_fn(w, h, |x, y| {
            rows[y as usize].as_bytes()[x as usize] == b'#'
        })
    }

    #[test]
    fn empty_mask_has_no_blobs() {
        let m = MonoMask::filled(8, 8, false);
        assert!(find_blobs(&m, 1).is_empty());
    }

    #[test]
    fn diagonal_pixels_are_separate_components() {
        let m = mask_from_rows(&["#.", ".#"]);
        assert_eq!(find_blobs(&m, 1).len(), 2);
    }

    #[test]
    fn min_size_drops_small_artifacts() {
        let m = mask_from_rows(&["##....#", "##....."]);
        let blobs = find_blobs(&m, 2);
        assert_eq!(blobs.len(), 1);
        assert_eq!(blobs[0].pixel_count(), 4);
    }

    #[test]
    fn blob_order_follows_row_major_first_pixel() {
        let m = mask_from_rows(&["..#", "#.#", "#.."]);
        let blobs = find_blobs(&m, 1);
        assert_eq!(blobs.len(), 2);
        assert_eq!(blobs[0].coords()[0], (2, 0));
        assert_eq!(blobs[1].coords()[0], (0, 1));
    }

    #[test]
    fn single_pixel_circle_ratio_is_one() {
        let m = mask_from_rows(&["#"]);
        let b = &find_blobs(&m, 1)[0];
        assert_eq!(circle_ratio(b), 1.0);
        assert_eq!(centroid(b), (0.0, 0.0));
    }

    #[test]
    fn filled_2x4_rectangle_ratio_is_half() {
        let m = mask_from_rows(&["####", "####"]);
        let b = &find_blobs(&m, 1)[0];
        assert_eq!(circle_ratio(b), 0.5);
    }

    #[test]
    fn ratio_is_mirror_invariant() {
        let tall = mask_from_rows(&["##", "##", "##", "##"]);
        let wide = mask_from_rows(&["####", "####"]);
        let bt = &find_blobs(&tall, 1)[0];
        let bw = &find_blobs(&wide, 1)[0];
        assert_eq!(circle_ratio(bt), circle_ratio(bw));
    }

    #[test]
    fn reject_ovals_keeps_discs_only() {
        // A 3x3 disc (ratio 1.0) and a 3x9 bar (ratio 1/3).
        let m = mask_from_rows(&[
            "###..#########",
            "###..#########",
            "###..#########",
        ]);
        let blobs = find_blobs(&m, 1);
        assert_eq!(blobs.len(), 2);
        let kept = reject_ovals(blobs, 0.5);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].bbox(), (0, 0, 2, 2));
    }

    #[test]
    fn tiny_min_ratio_keeps_everything() {
        let m = mask_from_rows(&["#########", "....#...."]);
        let blobs = find_blobs(&m, 1);
        let n = blobs.len();
        assert_eq!(reject_ovals(blobs, f64::MIN_POSITIVE).len(), n);
    }

    #[test]
    fn centroid_of_square_is_center() {
        let m = mask_from_rows(&["##", "##"]);
        let b = &find_blobs(&m, 1)[0];
        assert_eq!(centroid(b), (0.5, 0.5));
    }

    #[test]
    fn centroid_of_singleton() {
        let m = MonoMask::from_fn(8, 8, |x, y| x == 3 && y == 7);
        let b = &find_blobs(&m, 1)[0];
        assert_eq!(centroid(b), (3.0, 7.0));
    }

    #[test]
    fn dark_frame_detects_nothing() {
        let img = HsvImage::from_fn(16, 16, |_, _| [0.0, 0.0, 0.05]);
        let cfg = DetectionConfig::default();
        assert!(detect_laser_dot(&img, &cfg).unwrap().is_none());
    }

    #[test]
    fn dot_beats_reflection() {
        // Bright green 3x3 square at (2..5, 2..5); bright green 2x8 smear
        // at (8..16, 3..5). Both pass the filters; the smear fails the
        // circle ratio.
        let img = HsvImage::from_fn(20, 10, |x, y| {
            let in_dot = (2..5).contains(&x) && (2..5).contains(&y);
            let in_smear = (8..16).contains(&x) && (3..5).contains(&y);
            if in_dot || in_smear {
                [1.0 / 3.0, 1.0, 1.0]
            } else {
                [0.0, 0.0, 0.1]
            }
        });
        let cfg = DetectionConfig::default();
        let det = detect_laser_dot(&img, &cfg).unwrap().expect("dot expected");
        assert_eq!(det.centroid, (3.0, 3.0));
        assert_eq!(det.blob.pixel_count(), 9);
    }

    #[test]
    fn largest_survivor_wins() {
        // Two discs, both circular; the bigger one must be reported.
        let img = HsvImage::from_fn(20, 8, |x, y| {
            let small = (1..3).contains(&x) && (1..3).contains(&y);
            let big = (8..12).contains(&x) && (2..6).contains(&y);
            if small || big {
                [1.0 / 3.0, 1.0, 1.0]
            } else {
                [0.0, 0.0, 0.0]
            }
        });
        let mut cfg = DetectionConfig::default();
        cfg.min_blob_size = 1;
        let det = detect_laser_dot(&img, &cfg).unwrap().unwrap();
        assert_eq!(det.blob.pixel_count(), 16);
    }

    #[test]
    fn centroid_lies_within_bbox() {
        let m = mask_from_rows(&[".#.", "###", ".#."]);
        let b = &find_blobs(&m, 1)[0];
        let (cx, cy) = centroid(b);
        let (x0, y0, x1, y1) = b.bbox();
        assert!(cx >= x0 as f64 && cx <= x1 as f64);
        assert!(cy >= y0 as f64 && cy <= y1 as f64);
    }
}
