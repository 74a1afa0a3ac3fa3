//! Poisson point processes on a square window centred on the typical user.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::Scenario;

/// Square observation window `[-h, h]²` around the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub half_width: f64,
}

impl Window {
    pub fn new(half_width: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(invalid("half_width", format!("must be positive, got {half_width}")));
        }
        Ok(Window { half_width })
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half_width * self.half_width
    }

    pub fn expected_points(&self, density: f64) -> f64 {
        density * self.area()
    }
}

/// How the simulation window is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WindowSpec {
    /// Sized so the small tier expects `target_small_points` points and each
    /// tier expects at least `min_points`.
    Auto {
        target_small_points: f64,
        min_points: f64,
    },
    Fixed(Window),
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec::Auto {
            target_small_points: 2000.0,
            min_points: 200.0,
        }
    }
}

impl WindowSpec {
    /// The 5 km × 5 km field of the reference setup.
    pub fn literal() -> Self {
        WindowSpec::Fixed(Window { half_width: 2500.0 })
    }

    pub fn resolve(&self, sc: &Scenario) -> Result<Window> {
        match *self {
            WindowSpec::Fixed(w) => Window::new(w.half_width),
            WindowSpec::Auto {
                target_small_points,
                min_points,
            } => {
                if !(target_small_points > 0.0 && min_points > 0.0) {
                    return Err(invalid("window", "point targets must be positive"));
                }
                let area = (target_small_points / sc.small_tier.density)
                    .max(min_points / sc.macro_tier.density)
                    .max(min_points / sc.small_tier.density);
                Window::new(0.5 * area.sqrt())
            }
        }
    }
}

/// A base station location and its distance to the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    pub distance: f64,
}

/// Draws a homogeneous PPP of intensity `density` on `window`. Points that
/// land exactly on the origin are redrawn.
pub fn generate_ppp<R: Rng + ?Sized>(density: f64, window: &Window, rng: &mut R) -> Result<Vec<Point>> {
    if !(density.is_finite() && density >= 0.0) {
        return Err(invalid("density", format!("must be non-negative, got {density}")));
    }
    let mean = window.expected_points(density);
    if mean == 0.0 {
        return Ok(Vec::new());
    }
    let count = Poisson::new(mean)
        .map_err(|e| invalid("density", e.to_string()))?
        .sample(rng) as usize;
    let h = window.half_width;
    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        let x = h * (2.0 * rng.random::<f64>() - 1.0);
        let y = h * (2.0 * rng.random::<f64>() - 1.0);
        let distance = x.hypot(y);
        if distance > 0.0 {
            points.push(Point { x, y, distance });
        }
    }
    Ok(points)
}
