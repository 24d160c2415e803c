//! Evaluation grids and probe points.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::C64;

/// Grid settings as they appear in scenario files.
///
/// `count` is the number of points on each of the two pieces (real segment
/// and circle).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub real_span: Option<[f64; 2]>,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub circle_radius: Option<f64>,
}

impl GridSpec {
    /// Half the points on a real segment, half on a circle. Defaults: 20 + 20
    /// on `[min Re z_n - 2, max Re z_n + 2]` and radius `max |z_n| + 3`.
    pub fn build(&self, nodes: &[C64]) -> Vec<C64> {
        let count = self.count.unwrap_or(20);
        let [a, b] = self.real_span.unwrap_or_else(|| {
            let lo = nodes.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
            let hi = nodes.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
            if lo.is_finite() {
                [lo - 2.0, hi + 2.0]
            } else {
                [-2.0, 2.0]
            }
        });
        let radius = self
            .circle_radius
            .unwrap_or_else(|| nodes.iter().map(|z| z.norm()).fold(0.0, f64::max) + 3.0);
        let mut pts = linspace(a, b, count);
        pts.extend(circle(radius, count));
        pts
    }
}

/// Default 40-point test grid for a node set.
pub fn test_grid(nodes: &[C64]) -> Vec<C64> {
    GridSpec::default().build(nodes)
}

/// `2d` points used to decide membership in `H`: `d` on the segment
/// `Im z = 1/2` above the nodes and `d` on the far circle.
pub fn membership_grid(nodes: &[C64], dim: usize) -> Vec<C64> {
    let lo = nodes.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let hi = nodes.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (-1.0, 1.0) };
    let radius = nodes.iter().map(|z| z.norm()).fold(0.0, f64::max) + 3.0;
    let step = (hi - lo + 4.0) / dim as f64;
    let mut pts: Vec<C64> = (0..dim)
        .map(|k| C64::new(lo - 2.0 + (k as f64 + 0.5) * step, 0.5))
        .collect();
    pts.extend(circle(radius, dim));
    pts
}

/// Fixed generic points used to pin down `H = ∩ ker F(z)` beyond the nodes.
pub fn generic_probes() -> [C64; 5] {
    [
        C64::new(0.3719, 0.6113),
        C64::new(-1.1307, 0.2931),
        C64::new(2.7113, -0.8317),
        C64::new(-0.5237, -1.3719),
        C64::new(1.6109, 1.0531),
    ]
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<C64> {
    match n {
        0 => Vec::new(),
        1 => vec![C64::new(0.5 * (a + b), 0.0)],
        _ => (0..n)
            .map(|k| C64::new(a + (b - a) * k as f64 / (n - 1) as f64, 0.0))
            .collect(),
    }
}

/// `n` points on a centered circle, offset half a step from the real axis.
pub fn circle(radius: f64, n: usize) -> Vec<C64> {
    (0..n)
        .map(|k| C64::from_polar(radius, 2.0 * PI * (k as f64 + 0.5) / n as f64))
        .collect()
}
