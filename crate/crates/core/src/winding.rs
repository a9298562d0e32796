//! Winding number of the auxiliary-plane loop about the origin.
//!
//! The integer comes from accumulating the wrapped polar-angle increment
//! between consecutive samples. Each increment is exact as long as the true
//! angle change per step stays below pi, so correctness only depends on the
//! sampling density. A trapezoidal quadrature of `(x dy - y dx) / r^2` is
//! carried along as an independent cross-check.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{sample_loop, CouplingSet, LoopCurve};

/// Below this loop radius the system is treated as critical.
pub const GAP_TOLERANCE: f64 = 1e-8;

/// Maximum distance of the accumulated winding from an integer.
const ROUNDING_SLACK: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindingResult {
    pub n: i64,
    /// Quadrature value before rounding.
    pub raw: f64,
    /// Minimum loop radius.
    pub gap: f64,
}

/// Signed angle from `(x0, y0)` to `(x1, y1)`, in `(-pi, pi]`.
pub fn wrapped_increment(x0: f64, y0: f64, x1: f64, y1: f64) -> f64 {
    let cross = x0 * y1 - y0 * x1;
    let dot = x0 * x1 + y0 * y1;
    let d = cross.atan2(dot);
    // atan2 returns -pi for (-0, negative); fold into (-pi, pi]
    if d == -PI {
        PI
    } else {
        d
    }
}

/// Running unwrapped polar angle of a sequence of planar points.
#[derive(Debug, Clone)]
pub struct AngleAccumulator {
    start: Option<(f64, f64)>,
    last: Option<(f64, f64)>,
    total: f64,
}

impl Default for AngleAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl AngleAccumulator {
    pub fn new() -> Self {
        AngleAccumulator {
            start: None,
            last: None,
            total: 0.0,
        }
    }

    pub fn push(&mut self, x: f64, y: f64) {
        if let Some((x0, y0)) = self.last {
            self.total += wrapped_increment(x0, y0, x, y);
        } else {
            self.start = Some((x, y));
        }
        self.last = Some((x, y));
    }

    /// Unwrapped angle swept so far.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// Angle swept after closing the path back to its first point.
    pub fn closed_total(&self) -> f64 {
        match (self.start, self.last) {
            (Some((xs, ys)), Some((xl, yl))) => self.total + wrapped_increment(xl, yl, xs, ys),
            _ => 0.0,
        }
    }
}

/// Total unwrapped polar angle swept by the closed curve.
pub fn swept_angle(curve: &LoopCurve) -> f64 {
    let mut acc = AngleAccumulator::new();
    for s in curve.samples() {
        acc.push(s.x, s.y);
    }
    acc.closed_total()
}

/// Trapezoidal quadrature of the winding integral over the closed polygon,
/// in units of full turns.
pub fn winding_quadrature(curve: &LoopCurve) -> f64 {
    let s = curve.samples();
    let m = s.len();
    let mut sum = 0.0;
    for i in 0..m {
        let a = s[i];
        let b = s[(i + 1) % m];
        // x dy - y dx is the same cross product at both ends of the segment
        let cross = a.x * b.y - a.y * b.x;
        let inv_a = 1.0 / (a.x * a.x + a.y * a.y);
        let inv_b = 1.0 / (b.x * b.x + b.y * b.y);
        sum += 0.5 * cross * (inv_a + inv_b);
    }
    sum / (2.0 * PI)
}

pub fn winding_number(curve: &LoopCurve) -> Result<WindingResult> {
    winding_number_with_tolerance(curve, GAP_TOLERANCE)
}

pub fn winding_number_with_tolerance(curve: &LoopCurve, gap_tolerance: f64) -> Result<WindingResult> {
    let gap = curve.r_min();
    if gap <= gap_tolerance {
        return Err(Error::LoopThroughOrigin { r_min: gap });
    }
    let turns = swept_angle(curve) / (2.0 * PI);
    let n = turns.round();
    let raw = winding_quadrature(curve);
    if (turns - n).abs() > ROUNDING_SLACK || (raw - n).abs() >= ROUNDING_SLACK {
        return Err(Error::InconsistentWinding {
            accumulated: turns,
            quadrature: raw,
        });
    }
    Ok(WindingResult {
        n: n as i64,
        raw,
        gap,
    })
}

/// Finest grid tried by [`winding_of_coupling`].
pub const MAX_REFINED_GRID: usize = 1 << 20;

/// Winding number of the loop sampled on `grid_size` points. A loop that
/// passes close to the origin compared with the sample spacing can fail the
/// quadrature cross-check; the grid is then doubled up to
/// [`MAX_REFINED_GRID`].
pub fn winding_of_coupling(c: &CouplingSet, grid_size: usize) -> Result<WindingResult> {
    let mut m = grid_size;
    loop {
        match winding_number(&sample_loop(c, m)?) {
            Err(Error::InconsistentWinding { .. }) if m < MAX_REFINED_GRID => m *= 2,
            other => return other,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{preset, LoopSample};

    fn cs(jx: &[f64], jy: &[f64], g: f64) -> CouplingSet {
        CouplingSet::new(jx.to_vec(), jy.to_vec(), g).unwrap()
    }

    #[test]
    fn thin_ellipse_is_refined() {
        // flat ellipse hugging the origin: 4096 samples are too coarse for the
        // quadrature check, a refined grid is not
        let c = cs(&[-0.8526670572102432], &[0.8596058977075166], 0.9168605217025897 * 0.0069388404973);
        assert!(matches!(
            winding_number(&sample_loop(&c, 4096).unwrap()),
            Err(Error::InconsistentWinding { .. })
        ));
        let w = winding_of_coupling(&c, 4096).unwrap();
        assert_eq!(w.n, -1);
        assert!((w.raw + 1.0).abs() < 0.25);
    }

    #[test]
    fn increments_are_wrapped() {
        assert!((wrapped_increment(1.0, 0.0, 0.0, 1.0) - PI / 2.0).abs() < 1e-15);
        assert!((wrapped_increment(0.0, 1.0, 1.0, 0.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrapped_increment(1.0, 0.0, -1.0, 0.0), PI);
        assert_eq!(wrapped_increment(1.0, -0.0, -1.0, -0.0), PI);
    }

    #[test]
    fn accumulator_unwraps_past_pi() {
        let mut acc = AngleAccumulator::new();
        for i in 0..=12 {
            let t = i as f64 * PI / 4.0;
            acc.push(t.cos(), t.sin());
        }
        assert!((acc.total() - 3.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn table_examples() {
        assert_eq!(winding_of_coupling(&preset("d").unwrap(), 4096).unwrap().n, 1);
        assert_eq!(winding_of_coupling(&preset("a").unwrap(), 4096).unwrap().n, -2);
        assert_eq!(winding_of_coupling(&preset("g").unwrap(), 4096).unwrap().n, 3);
        assert_eq!(winding_of_coupling(&preset("i").unwrap(), 4096).unwrap().n, 5);
    }

    #[test]
    fn point_loop_has_zero_winding() {
        let r = winding_of_coupling(&cs(&[0.0], &[0.0], 1.0), 64).unwrap();
        assert_eq!(r.n, 0);
        assert_eq!(r.raw, 0.0);
        assert_eq!(r.gap, 1.0);
    }

    #[test]
    fn strong_field_ellipse_excludes_origin() {
        // x(k) = J cos k - g never vanishes on y = 0 crossings when |g| > |J|
        for (j, g) in [(1.0, 1.5), (-0.7, 0.9), (0.3, -2.0)] {
            let c = cs(&[j], &[0.0], g);
            let curve = sample_loop(&c, 4096).unwrap();
            let crossings: Vec<f64> = curve
                .samples()
                .windows(2)
                .filter(|w| w[0].y == 0.0 || w[0].y.signum() != w[1].y.signum())
                .map(|w| w[0].x)
                .collect();
            assert!(crossings.iter().all(|x| x.signum() == crossings[0].signum()));
            assert_eq!(winding_number(&curve).unwrap().n, 0);
        }
    }

    #[test]
    fn critical_loop_is_rejected() {
        let err = winding_of_coupling(&cs(&[1.0], &[0.0], 1.0), 4096).unwrap_err();
        assert!(matches!(err, Error::LoopThroughOrigin { .. }));
        assert!(err.to_string().starts_with("loop through origin"));
    }

    #[test]
    fn undersampled_curve_is_inconsistent() {
        let samples = (0..5)
            .map(|i| {
                let k = -PI + 2.0 * PI * i as f64 / 5.0;
                LoopSample { k, x: (4.0 * k).cos(), y: (4.0 * k).sin() }
            })
            .collect();
        let curve = LoopCurve::from_samples(samples).unwrap();
        // five samples of a fourfold circle alias to one reversed turn
        assert_eq!(winding_number(&curve).unwrap().n, -1);

        let samples = (0..8)
            .map(|i| {
                let k = -PI + 2.0 * PI * i as f64 / 8.0;
                let r = if i % 2 == 0 { 1.0 } else { 1e-3 };
                LoopSample { k, x: r * (3.0 * k).cos(), y: r * (3.0 * k).sin() }
            })
            .collect();
        let curve = LoopCurve::from_samples(samples).unwrap();
        assert!(matches!(
            winding_number(&curve),
            Err(Error::InconsistentWinding { .. })
        ));
    }

    #[test]
    fn raw_tracks_integer() {
        for name in crate::model::PRESET_NAMES {
            let r = winding_of_coupling(&preset(name).unwrap(), 4096).unwrap();
            assert!((r.raw - r.n as f64).abs() < 1e-3, "{name}: {r:?}");
        }
    }
}
