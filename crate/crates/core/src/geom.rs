//! Small 2D geometry helpers shared by the planner and the simulator.

use std::f64::consts::{PI, TAU};

/// Tolerance for segment-contact parameter checks. Segment coordinates in
/// this crate are world units (tens of units), so an absolute epsilon is fine.
const EPS: f64 = 1e-9;

/// Normalizes an angle into `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let mut a = a % TAU;
    if a < 0.0 {
        a += TAU;
    }
    // `-1e-17 % TAU` rounds back up to TAU itself.
    if a >= TAU {
        a = 0.0;
    }
    a
}

/// Circular distance between two angles, in `[0, π]`.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (normalize_angle(a) - normalize_angle(b)).abs();
    d.min(TAU - d)
}

/// The heading of the vector `from -> to`.
pub fn heading_between(from: (f64, f64), to: (f64, f64)) -> f64 {
    normalize_angle((to.1 - from.1).atan2(to.0 - from.0))
}

pub fn distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Distance from point `p` to the closed segment `a..b`.
pub fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return distance(p, a);
    }
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0);
    distance(p, (a.0 + t * dx, a.1 + t * dy))
}

/// Contact between segment `a0..a1` and segment `b0..b1`, parametrized along
/// the first segment (t = 0 at `a0`, t = 1 at `a1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegContact {
    /// Transversal contact at a single point.
    Point { t: f64, at: (f64, f64) },
    /// Collinear overlap covering `t0..t1` of the first segment.
    Overlap { t0: f64, t1: f64 },
}

/// Computes the contact (if any) between two closed segments, including
/// collinear overlap. Endpoint touches count as contact.
pub fn seg_contact(
    a0: (f64, f64),
    a1: (f64, f64),
    b0: (f64, f64),
    b1: (f64, f64),
) -> Option<SegContact> {
    let r = (a1.0 - a0.0, a1.1 - a0.1);
    let s = (b1.0 - b0.0, b1.1 - b0.1);
    let denom = r.0 * s.1 - r.1 * s.0;
    let qp = (b0.0 - a0.0, b0.1 - a0.1);

    if denom.abs() > EPS {
        let t = (qp.0 * s.1 - qp.1 * s.0) / denom;
        let u = (qp.0 * r.1 - qp.1 * r.0) / denom;
        if (-EPS..=1.0 + EPS).contains(&t) && (-EPS..=1.0 + EPS).contains(&u) {
            let t = t.clamp(0.0, 1.0);
            return Some(SegContact::Point {
                t,
                at: (a0.0 + t * r.0, a0.1 + t * r.1),
            });
        }
        return None;
    }

    // Parallel. Non-collinear parallels never touch.
    if cross(a0, a1, b0).abs() > EPS {
        return None;
    }
    let len2 = r.0 * r.0 + r.1 * r.1;
    if len2 == 0.0 {
        // Degenerate first segment: treat as a point probe against b.
        if point_segment_distance(a0, b0, b1) <= EPS {
            return Some(SegContact::Point { t: 0.0, at: a0 });
        }
        return None;
    }
    let proj = |p: (f64, f64)| ((p.0 - a0.0) * r.0 + (p.1 - a0.1) * r.1) / len2;
    let (mut t0, mut t1) = (proj(b0), proj(b1));
    if t0 > t1 {
        std::mem::swap(&mut t0, &mut t1);
    }
    let lo = t0.max(0.0);
    let hi = t1.min(1.0);
    if lo > hi + EPS {
        return None;
    }
    if (hi - lo).abs() <= EPS {
        let t = lo.clamp(0.0, 1.0);
        return Some(SegContact::Point {
            t,
            at: (a0.0 + t * r.0, a0.1 + t * r.1),
        });
    }
    Some(SegContact::Overlap {
        t0: lo.clamp(0.0, 1.0),
        t1: hi.clamp(0.0, 1.0),
    })
}

/// `true` when `h` lies within `tol` of the direction opposite to `arrival`.
pub fn is_reverse_of(h: f64, arrival: f64, tol: f64) -> bool {
    angle_distance(h, arrival + PI) < tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_wraps() {
        assert_eq!(normalize_angle(TAU), 0.0);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI) - PI).abs() < 1e-12);
    }

    #[test]
    fn angle_distance_wraps() {
        assert!((angle_distance(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
        assert_eq!(angle_distance(PI, PI), 0.0);
    }

    #[test]
    fn crossing_segments_meet_at_point() {
        let c = seg_contact((0.0, 0.0), (10.0, 0.0), (5.0, -5.0), (5.0, 5.0));
        match c {
            Some(SegContact::Point { t, at }) => {
                assert!((t - 0.5).abs() < 1e-12);
                assert!(distance(at, (5.0, 0.0)) < 1e-12);
            }
            other => panic!("expected point contact, got {other:?}"),
        }
    }

    #[test]
    fn parallel_disjoint_segments_do_not_meet() {
        assert_eq!(
            seg_contact((0.0, 0.0), (10.0, 0.0), (0.0, 1.0), (10.0, 1.0)),
            None
        );
    }

    #[test]
    fn collinear_overlap_is_reported() {
        let c = seg_contact((0.0, 0.0), (10.0, 0.0), (4.0, 0.0), (20.0, 0.0));
        match c {
            Some(SegContact::Overlap { t0, t1 }) => {
                assert!((t0 - 0.4).abs() < 1e-12);
                assert!((t1 - 1.0).abs() < 1e-12);
            }
            other => panic!("expected overlap, got {other:?}"),
        }
    }

    #[test]
    fn endpoint_touch_counts() {
        let c = seg_contact((0.0, 0.0), (10.0, 0.0), (10.0, 0.0), (10.0, 5.0));
        assert!(matches!(c, Some(SegContact::Point { t, .. }) if (t - 1.0).abs() < 1e-12));
    }

    #[test]
    fn point_segment_distance_basics() {
        assert_eq!(point_segment_distance((0.0, 1.0), (0.0, 0.0), (10.0, 0.0)), 1.0);
        assert_eq!(point_segment_distance((-3.0, 4.0), (0.0, 0.0), (10.0, 0.0)), 5.0);
    }
}
