//! Laguerre-Gaussian and Bessel-Gaussian mode generators at the waist plane.
//!
//! Every generated mode is normalized numerically on its grid; no analytic
//! normalization constant is used anywhere.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{ScalarField, TransverseGrid};
use crate::special::{assoc_laguerre, bessel_j};

/// Fraction of the obstacle radius at which the LG intensity ring is placed.
pub const DEFAULT_RING_FRACTION: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeFamily {
    Lg,
    Bg,
}

impl fmt::Display for ModeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeFamily::Lg => "LG",
            ModeFamily::Bg => "BG",
        })
    }
}

/// A single paraxial mode, fully specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeSpec {
    /// Laguerre-Gaussian mode with radial index `p` and azimuthal index `l`.
    Lg { p: u32, l: i32, waist: f64, wavelength: f64 },
    /// Bessel-Gaussian mode with radial wavenumber `k_rho` (1/m).
    Bg { k_rho: f64, l: i32, waist: f64, wavelength: f64 },
}

impl ModeSpec {
    pub fn family(&self) -> ModeFamily {
        match self {
            ModeSpec::Lg { .. } => ModeFamily::Lg,
            ModeSpec::Bg { .. } => ModeFamily::Bg,
        }
    }

    pub fn l(&self) -> i32 {
        match *self {
            ModeSpec::Lg { l, .. } | ModeSpec::Bg { l, .. } => l,
        }
    }

    pub fn waist(&self) -> f64 {
        match *self {
            ModeSpec::Lg { waist, .. } | ModeSpec::Bg { waist, .. } => waist,
        }
    }

    pub fn wavelength(&self) -> f64 {
        match *self {
            ModeSpec::Lg { wavelength, .. } | ModeSpec::Bg { wavelength, .. } => wavelength,
        }
    }

    /// Same mode with the azimuthal index replaced.
    pub fn with_l(self, l: i32) -> Self {
        match self {
            ModeSpec::Lg { p, waist, wavelength, .. } => ModeSpec::Lg { p, l, waist, wavelength },
            ModeSpec::Bg { k_rho, waist, wavelength, .. } => ModeSpec::Bg { k_rho, l, waist, wavelength },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.waist();
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::param("waist", format!("must be positive, got {w}")));
        }
        let lam = self.wavelength();
        if !(lam > 0.0 && lam.is_finite()) {
            return Err(Error::param("wavelength", format!("must be positive, got {lam}")));
        }
        if let ModeSpec::Bg { k_rho, .. } = *self {
            if !(k_rho >= 0.0 && k_rho.is_finite()) {
                return Err(Error::param("k_rho", format!("must be non-negative, got {k_rho}")));
            }
        }
        Ok(())
    }

    /// Unnormalized field value at `(x, y)`.
    pub fn value_at(&self, x: f64, y: f64) -> Complex64 {
        match *self {
            ModeSpec::Lg { p, l, waist, .. } => lg_value(p, l, waist, x, y),
            ModeSpec::Bg { k_rho, l, waist, .. } => bg_value(k_rho, l, waist, x, y),
        }
    }

    pub fn generate(&self, grid: &TransverseGrid) -> Result<ScalarField> {
        match *self {
            ModeSpec::Lg { p, l, waist, wavelength } => lg_mode(grid, p, l, waist, wavelength),
            ModeSpec::Bg { k_rho, l, waist, wavelength } => bg_mode(grid, k_rho, l, waist, wavelength),
        }
    }
}

/// Waist-plane LG mode `(√2ρ/w)^|l| L_p^|l|(2ρ²/w²) e^{ilφ} e^{-ρ²/w²}`, unit norm.
pub fn lg_mode(grid: &TransverseGrid, p: u32, l: i32, waist: f64, wavelength: f64) -> Result<ScalarField> {
    ModeSpec::Lg { p, l, waist, wavelength }.validate()?;
    ScalarField::from_fn(*grid, wavelength, |x, y| lg_value(p, l, waist, x, y))?.normalize()
}

#[inline]
fn lg_value(p: u32, l: i32, waist: f64, x: f64, y: f64) -> Complex64 {
    let order = l.unsigned_abs();
    let inv_w2 = 1.0 / (waist * waist);
    let r2 = x * x + y * y;
    let s = 2.0 * r2 * inv_w2;
    let radial = s.sqrt().powi(order as i32) * assoc_laguerre(p, order as f64, s) * (-r2 * inv_w2).exp();
    Complex64::from_polar(radial, l as f64 * y.atan2(x))
}

/// Waist-plane BG mode `J_|l|(k_ρ ρ) e^{ilφ} e^{-ρ²/w²}`, unit norm.
///
/// The Bessel order is `|l|`, so `u_{-l} = conj(u_l)`; the signed order would
/// only add the global sign `(-1)^l`.
pub fn bg_mode(grid: &TransverseGrid, k_rho: f64, l: i32, waist: f64, wavelength: f64) -> Result<ScalarField> {
    ModeSpec::Bg { k_rho, l, waist, wavelength }.validate()?;
    // the radial factor depends on |x| and |y| only; tabulate one quadrant
    let (nx, ny) = (grid.nx(), grid.ny());
    let (hx, hy) = (nx / 2, ny / 2);
    let mut radial = vec![0.0; (hx + 1) * (hy + 1)];
    radial.par_chunks_mut(hx + 1).enumerate().for_each(|(ay, row)| {
        let y = ay as f64 * grid.dy();
        for (ax, v) in row.iter_mut().enumerate() {
            *v = bg_radial(k_rho, l, waist, ax as f64 * grid.dx(), y);
        }
    });
    let mut data = vec![Complex64::new(0.0, 0.0); grid.len()];
    data.par_chunks_mut(nx).enumerate().for_each(|(iy, row)| {
        let y = grid.y(iy);
        let r_row = &radial[iy.abs_diff(hy) * (hx + 1)..];
        for (ix, v) in row.iter_mut().enumerate() {
            *v = Complex64::from_polar(r_row[ix.abs_diff(hx)], l as f64 * y.atan2(grid.x(ix)));
        }
    });
    ScalarField::from_samples(*grid, wavelength, data)?.normalize()
}

#[inline]
fn bg_radial(k_rho: f64, l: i32, waist: f64, x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    bessel_j(l.unsigned_abs() as i32, k_rho * r2.sqrt()) * (-r2 / (waist * waist)).exp()
}

#[inline]
fn bg_value(k_rho: f64, l: i32, waist: f64, x: f64, y: f64) -> Complex64 {
    Complex64::from_polar(bg_radial(k_rho, l, waist, x, y), l as f64 * y.atan2(x))
}

/// LG waist placing the intensity ring `√(l0/2)·w` at `ring_fraction · a`.
pub fn lg_waist_for_ring(a: f64, l0: u32, ring_fraction: f64) -> Result<f64> {
    if l0 == 0 {
        return Err(Error::param("l0", "waist rule is undefined for l0 = 0"));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::param("radius", format!("must be positive, got {a}")));
    }
    if !(ring_fraction > 0.0 && ring_fraction.is_finite()) {
        return Err(Error::param("ring_fraction", format!("must be positive, got {ring_fraction}")));
    }
    Ok(ring_fraction * a * (2.0 / l0 as f64).sqrt())
}

/// `0.8·a·√(2/l0)`: the LG waist whose intensity ring sits at `0.8a`.
pub fn lg_waist_for_obstacle(a: f64, l0: u32) -> Result<f64> {
    lg_waist_for_ring(a, l0, DEFAULT_RING_FRACTION)
}
