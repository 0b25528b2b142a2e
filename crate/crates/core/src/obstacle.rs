//! Opaque circular obstacle: transmission mask and the modified Kirchhoff
//! boundary condition `ψ(x, y, 0) = u(x, y, 0)·t(x - d, y)` with renormalization.

use log::debug;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{ScalarField, TransverseGrid};

/// Super-Gaussian order used throughout unless overridden.
pub const DEFAULT_ORDER: u32 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeProfile {
    /// `t = 1 - exp{-[r²/a²]^m}`.
    SuperGaussian { order: u32 },
    /// `t = Θ(r² - a²)`.
    Hard,
}

/// Circular screen of radius `radius`, centered at `(displacement, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstacleSpec {
    pub radius: f64,
    pub displacement: f64,
    pub edge: EdgeProfile,
}

impl ObstacleSpec {
    /// Smooth obstacle with the default order `m = 12`.
    pub fn new(radius: f64, displacement: f64) -> Self {
        Self { radius, displacement, edge: EdgeProfile::SuperGaussian { order: DEFAULT_ORDER } }
    }

    pub fn with_edge(mut self, edge: EdgeProfile) -> Self {
        self.edge = edge;
        self
    }

    pub fn displaced(mut self, displacement: f64) -> Self {
        self.displacement = displacement;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::param("radius", format!("must be positive, got {}", self.radius)));
        }
        if !self.displacement.is_finite() {
            return Err(Error::param("displacement", "must be finite"));
        }
        if let EdgeProfile::SuperGaussian { order: 0 } = self.edge {
            return Err(Error::param("order", "super-Gaussian order must be >= 1"));
        }
        Ok(())
    }

    /// Transmission at a point.
    #[inline]
    pub fn transmission_at(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.displacement;
        let r2 = dx * dx + y * y;
        let a2 = self.radius * self.radius;
        match self.edge {
            EdgeProfile::SuperGaussian { order } => -(-(r2 / a2).powi(order as i32)).exp_m1(),
            EdgeProfile::Hard => {
                if r2 > a2 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Sampled transmission map.
    pub fn transmission(&self, grid: &TransverseGrid) -> Result<Transmission> {
        self.validate()?;
        let mut values = vec![0.0; grid.len()];
        values.par_chunks_mut(grid.nx()).enumerate().for_each(|(iy, row)| {
            let y = grid.y(iy);
            for (ix, t) in row.iter_mut().enumerate() {
                *t = self.transmission_at(grid.x(ix), y);
            }
        });
        Ok(Transmission { grid: *grid, values })
    }
}

/// Real transmission map sampled on a grid.
#[derive(Debug, Clone)]
pub struct Transmission {
    grid: TransverseGrid,
    values: Vec<f64>,
}

impl Transmission {
    pub fn grid(&self) -> &TransverseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Screen a field and renormalize it.
    pub fn apply(&self, input: &ScalarField) -> Result<Diffracted> {
        self.grid.ensure_same(input.grid())?;
        let screened = input.multiply_real(&self.values)?;
        let passed = screened.norm_sqr();
        let incident = input.norm_sqr();
        let field = screened.normalize()?;
        let blocked_fraction = 1.0 - passed / incident;
        debug!("obstacle blocked {:.6} of the incident power", blocked_fraction);
        Ok(Diffracted { field, blocked_fraction })
    }

    /// Discrete L² distance to another map, with the grid cell measure.
    pub fn l2_distance(&self, other: &Transmission) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok((s * self.grid.cell_area()).sqrt())
    }
}

/// Field just behind the screen, renormalized, with the fraction of incident
/// power the screen removed.
#[derive(Debug, Clone)]
pub struct Diffracted {
    pub field: ScalarField,
    pub blocked_fraction: f64,
}

/// `normalize(u · t)` for the given obstacle.
pub fn apply_obstacle(input: &ScalarField, obstacle: &ObstacleSpec) -> Result<Diffracted> {
    obstacle.transmission(input.grid())?.apply(input)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{bg_mode, lg_mode};

    const A: f64 = 200e-6;

    #[test]
    fn transmission_point_values() {
        let o = ObstacleSpec::new(A, 50e-6);
        assert_eq!(o.transmission_at(50e-6, 0.0), 0.0);
        let on_edge = o.transmission_at(50e-6 + A * 0.6, A * 0.8);
        assert!((on_edge - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert!((on_edge - 0.63212).abs() < 1e-5);
        let far = o.transmission_at(50e-6 + 2.0 * A, 0.0);
        assert!((far - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hard_edge_is_binary() {
        let o = ObstacleSpec::new(A, 0.0).with_edge(EdgeProfile::Hard);
        assert_eq!(o.transmission_at(0.5 * A, 0.0), 0.0);
        assert_eq!(o.transmission_at(1.01 * A, 0.0), 1.0);
    }

    #[test]
    fn transmission_in_unit_interval() {
        let g = TransverseGrid::square(128, 2e-3).unwrap();
        for o in [ObstacleSpec::new(A, 1e-4), ObstacleSpec::new(A, 0.0).with_edge(EdgeProfile::Hard)] {
            let t = o.transmission(&g).unwrap();
            assert!(t.values().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn higher_order_approaches_hard_edge() {
        let g = TransverseGrid::square(512, 2e-3).unwrap();
        let hard = ObstacleSpec::new(A, 0.0).with_edge(EdgeProfile::Hard).transmission(&g).unwrap();
        let m12 = ObstacleSpec::new(A, 0.0).transmission(&g).unwrap();
        let m48 = ObstacleSpec::new(A, 0.0)
            .with_edge(EdgeProfile::SuperGaussian { order: 48 })
            .transmission(&g)
            .unwrap();
        assert!(m48.l2_distance(&hard).unwrap() < m12.l2_distance(&hard).unwrap());
    }

    #[test]
    fn invalid_obstacles() {
        assert!(ObstacleSpec::new(0.0, 0.0).validate().is_err());
        assert!(ObstacleSpec::new(A, 0.0).with_edge(EdgeProfile::SuperGaussian { order: 0 }).validate().is_err());
    }

    #[test]
    fn window_filling_obstacle_blocks_everything() {
        let g = TransverseGrid::square(128, 2e-3).unwrap();
        let u = lg_mode(&g, 0, 1, 100e-6, 710e-9).unwrap();
        let o = ObstacleSpec::new(10e-3, 0.0).with_edge(EdgeProfile::Hard);
        assert!(matches!(apply_obstacle(&u, &o), Err(Error::ZeroNorm)));
    }

    #[test]
    fn tiny_obstacle_is_identity() {
        let g = TransverseGrid::square(128, 2e-3).unwrap();
        let u = lg_mode(&g, 0, 1, 200e-6, 710e-9).unwrap();
        let o = ObstacleSpec::new(g.dx() * 1e-3, 0.3 * g.dx());
        let out = apply_obstacle(&u, &o).unwrap();
        assert!(out.field.is_normalized());
        assert!(out.blocked_fraction.abs() < 1e-10);
        for (a, b) in out.field.samples().iter().zip(u.samples()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn bg_blocked_fraction_nearly_independent_of_l0() {
        // reference values from direct quadrature on the default grid
        let expected = [0.330_732, 0.271_624, 0.293_361, 0.257_065];
        let g = TransverseGrid::default_grid();
        let o = ObstacleSpec::new(A, 0.0);
        let fractions: Vec<f64> = (1..=4)
            .map(|l| apply_obstacle(&bg_mode(&g, 30e3, l, 1e-3, 710e-9).unwrap(), &o).unwrap().blocked_fraction)
            .collect();
        for (f, e) in fractions.iter().zip(expected) {
            assert!((f - e).abs() < 1e-5, "{fractions:?}");
        }
        let spread = fractions.iter().cloned().fold(f64::MIN, f64::max) - fractions.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 0.08, "{fractions:?}");

        // LG modes with the ring rule lose a strongly l0-dependent share
        let lg: Vec<f64> = (1..=4u32)
            .map(|l| {
                let w = crate::modes::lg_waist_for_obstacle(A, l).unwrap();
                apply_obstacle(&lg_mode(&g, 0, l as i32, w, 710e-9).unwrap(), &o).unwrap().blocked_fraction
            })
            .collect();
        assert!(lg[3] - lg[0] > 0.25, "{lg:?}");
    }
}
