//! Transverse sampling grid and the complex scalar field container.
//!
//! Discrete integrals carry the cell measure `dx * dy`, so norms and inner
//! products approximate the continuum integrals directly. All reductions are
//! done per grid row in parallel and then summed in row order, which keeps
//! results bit-identical regardless of the thread count.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Tolerance on `|‖ψ‖² - 1|` for a field flagged as normalized.
pub const NORMALIZED_TOL: f64 = 1e-10;

/// Uniform lattice over the transverse plane.
///
/// Sample `(ix, iy)` sits at `x = (ix - nx/2)·dx`, `y = (iy - ny/2)·dy`, so the
/// sample `(nx/2, ny/2)` is exactly the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseGrid {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
}

impl TransverseGrid {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        if nx < 2 || !nx.is_power_of_two() || ny < 2 || !ny.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "sample counts must be powers of two >= 2, got {nx}x{ny}"
            )));
        }
        if !(dx > 0.0 && dx.is_finite() && dy > 0.0 && dy.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got dx={dx}, dy={dy}")));
        }
        Ok(Self { nx, ny, dx, dy })
    }

    /// `n x n` samples spanning a square window of side `window` meters.
    pub fn square(n: usize, window: f64) -> Result<Self> {
        let d = window / n as f64;
        Self::new(n, n, d, d)
    }

    /// The default grid: 1024 x 1024 samples over 8 mm x 8 mm.
    pub fn default_grid() -> Self {
        Self::square(1024, 8e-3).expect("default grid is valid")
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }

    /// Physical window extent along x and y.
    pub fn window(&self) -> (f64, f64) {
        (self.nx as f64 * self.dx, self.ny as f64 * self.dy)
    }

    #[inline]
    pub fn x(&self, ix: usize) -> f64 {
        (ix as f64 - (self.nx / 2) as f64) * self.dx
    }

    #[inline]
    pub fn y(&self, iy: usize) -> f64 {
        (iy as f64 - (self.ny / 2) as f64) * self.dy
    }

    /// Flat index, x fastest.
    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    /// Angular wavenumber of FFT bin `i` on an axis of `n` samples with spacing `d`.
    #[inline]
    fn wavenumber(i: usize, n: usize, d: f64) -> f64 {
        let signed = if i < n / 2 { i as f64 } else { i as f64 - n as f64 };
        2.0 * PI * signed / (n as f64 * d)
    }

    #[inline]
    pub fn kx(&self, ix: usize) -> f64 {
        Self::wavenumber(ix, self.nx, self.dx)
    }

    #[inline]
    pub fn ky(&self, iy: usize) -> f64 {
        Self::wavenumber(iy, self.ny, self.dy)
    }

    /// Require the window to span at least eight times `waist` in both directions.
    pub fn check_covers_waist(&self, waist: f64) -> Result<()> {
        let (wx, wy) = self.window();
        if wx.min(wy) < 8.0 * waist {
            return Err(Error::InvalidGrid(format!(
                "window {:.3e} m is smaller than 8x the beam waist {:.3e} m",
                wx.min(wy),
                waist
            )));
        }
        Ok(())
    }

    pub(crate) fn ensure_same(&self, other: &Self) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Complex field amplitude sampled on a [`TransverseGrid`].
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: TransverseGrid,
    wavelength: f64,
    data: Vec<Complex64>,
    normalized: bool,
}

impl ScalarField {
    /// Samples `f(x, y)` at every grid point.
    pub fn from_fn<F>(grid: TransverseGrid, wavelength: f64, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64 + Sync,
    {
        let mut data = vec![Complex64::new(0.0, 0.0); grid.len()];
        data.par_chunks_mut(grid.nx).enumerate().for_each(|(iy, row)| {
            let y = grid.y(iy);
            for (ix, v) in row.iter_mut().enumerate() {
                *v = f(grid.x(ix), y);
            }
        });
        Self::from_samples(grid, wavelength, data)
    }

    pub fn from_samples(grid: TransverseGrid, wavelength: f64, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {}",
                data.len(),
                grid.len()
            )));
        }
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::param("wavelength", format!("must be positive, got {wavelength}")));
        }
        if data.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::param("amplitude", "non-finite sample"));
        }
        Ok(Self { grid, wavelength, data, normalized: false })
    }

    pub fn zeros(grid: TransverseGrid, wavelength: f64) -> Result<Self> {
        Self::from_samples(grid, wavelength, vec![Complex64::new(0.0, 0.0); grid.len()])
    }

    pub fn grid(&self) -> &TransverseGrid {
        &self.grid
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Vacuum wavenumber `2π/λ`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.data
    }

    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.data[self.grid.index(ix, iy)]
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub(crate) fn with_data(&self, data: Vec<Complex64>) -> Self {
        Self { grid: self.grid, wavelength: self.wavelength, data, normalized: false }
    }

    pub fn ensure_compatible(&self, other: &Self) -> Result<()> {
        self.grid.ensure_same(&other.grid)?;
        if self.wavelength != other.wavelength {
            return Err(Error::GridMismatch(format!(
                "wavelengths differ: {} vs {}",
                self.wavelength, other.wavelength
            )));
        }
        Ok(())
    }

    /// `ΣΣ conj(self)·other dx dy`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        self.ensure_compatible(other)?;
        let nx = self.grid.nx;
        let rows: Vec<Complex64> = self
            .data
            .par_chunks(nx)
            .zip(other.data.par_chunks(nx))
            .map(|(a, b)| a.iter().zip(b).map(|(a, b)| a.conj() * b).sum::<Complex64>())
            .collect();
        Ok(rows.into_iter().sum::<Complex64>() * self.grid.cell_area())
    }

    pub fn norm_sqr(&self) -> f64 {
        let rows: Vec<f64> = self
            .data
            .par_chunks(self.grid.nx)
            .map(|r| r.iter().map(|v| v.norm_sqr()).sum::<f64>())
            .collect();
        rows.into_iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Returns `self / ‖self‖`, flagged normalized.
    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let inv = 1.0 / n;
        let data = self.data.par_iter().map(|v| v * inv).collect();
        let mut out = self.with_data(data);
        out.normalized = true;
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.with_data(self.data.par_iter().map(|v| v * c).collect())
    }

    /// Pointwise product with a real mask of the same length.
    pub fn multiply_real(&self, mask: &[f64]) -> Result<Self> {
        if mask.len() != self.data.len() {
            return Err(Error::GridMismatch(format!(
                "mask of {} samples for a field of {}",
                mask.len(),
                self.data.len()
            )));
        }
        Ok(self.with_data(self.data.par_iter().zip(mask).map(|(v, t)| v * t).collect()))
    }

    /// Complex conjugate field.
    pub fn conj(&self) -> Self {
        let mut out = self.with_data(self.data.par_iter().map(|v| v.conj()).collect());
        out.normalized = self.normalized;
        out
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.data.par_iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn phase(&self) -> Vec<f64> {
        self.data.par_iter().map(|v| v.arg()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Marks a field produced by a norm-preserving map of a normalized field.
    pub(crate) fn mark_normalized(mut self, normalized: bool) -> Self {
        self.normalized = normalized;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_grid() -> TransverseGrid {
        TransverseGrid::square(64, 4e-3).unwrap()
    }

    fn gaussian(grid: TransverseGrid, w: f64) -> ScalarField {
        ScalarField::from_fn(grid, 710e-9, |x, y| Complex64::new((-(x * x + y * y) / (w * w)).exp(), 0.0))
            .unwrap()
    }

    #[test]
    fn center_sample_is_origin() {
        let g = TransverseGrid::new(128, 64, 1e-5, 2e-5).unwrap();
        assert_eq!(g.x(64), 0.0);
        assert_eq!(g.y(32), 0.0);
        assert_eq!(g.x(0), -64.0 * 1e-5);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(TransverseGrid::new(100, 128, 1e-5, 1e-5).is_err());
        assert!(TransverseGrid::new(128, 128, 0.0, 1e-5).is_err());
    }

    #[test]
    fn window_must_cover_waist() {
        let g = small_grid();
        assert!(g.check_covers_waist(0.4e-3).is_ok());
        assert!(g.check_covers_waist(1e-3).is_err());
    }

    #[test]
    fn wavenumbers_follow_fft_ordering() {
        let g = TransverseGrid::square(8, 8.0).unwrap();
        let expect = [0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0];
        for (i, e) in expect.iter().enumerate() {
            assert!((g.kx(i) - 2.0 * PI * e / 8.0).abs() < 1e-15);
        }
    }

    #[test]
    fn normalized_field_has_unit_self_overlap() {
        let f = gaussian(small_grid(), 0.3e-3).normalize().unwrap();
        let ip = f.inner_product(&f).unwrap();
        assert!((ip.re - 1.0).abs() < 1e-10 && ip.im.abs() < 1e-12);
        assert!((f.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_field_norm_and_normalize() {
        let z = ScalarField::zeros(small_grid(), 1e-6).unwrap();
        assert_eq!(z.norm(), 0.0);
        assert!(matches!(z.normalize(), Err(Error::ZeroNorm)));
    }

    #[test]
    fn scaling_scales_norm() {
        let f = gaussian(small_grid(), 0.3e-3).normalize().unwrap();
        let g = f.scale(Complex64::new(2.0, 0.0));
        assert!((g.norm() - 2.0).abs() < 1e-10);
        let back = g.normalize().unwrap();
        let max_diff = back
            .samples()
            .iter()
            .zip(f.samples())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(max_diff < 1e-12);
    }

    #[test]
    fn normalize_is_idempotent() {
        let f = gaussian(small_grid(), 0.3e-3).normalize().unwrap();
        let g = f.normalize().unwrap();
        let max_diff = g
            .samples()
            .iter()
            .zip(f.samples())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(max_diff < 1e-12);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let f = gaussian(small_grid(), 0.3e-3);
        let g = gaussian(TransverseGrid::square(64, 5e-3).unwrap(), 0.3e-3);
        assert!(matches!(f.inner_product(&g), Err(Error::GridMismatch(_))));
        let h = ScalarField::from_fn(small_grid(), 800e-9, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        assert!(f.inner_product(&h).is_err());
    }

    #[test]
    fn non_finite_samples_are_rejected() {
        let g = TransverseGrid::square(2, 1.0).unwrap();
        let data = vec![Complex64::new(f64::NAN, 0.0); 4];
        assert!(ScalarField::from_samples(g, 1e-6, data).is_err());
    }

    fn random_field(seed: &[(f64, f64)]) -> ScalarField {
        let g = TransverseGrid::square(4, 1.0).unwrap();
        let data = seed.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        ScalarField::from_samples(g, 1.0, data).unwrap()
    }

    proptest! {
        #[test]
        fn inner_product_is_sesquilinear(
            f in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
            g in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
            h in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
            ar in -2.0f64..2.0, ai in -2.0f64..2.0,
        ) {
            let (f, g, h) = (random_field(&f), random_field(&g), random_field(&h));
            let alpha = Complex64::new(ar, ai);
            // conjugate symmetry
            let fg = f.inner_product(&g).unwrap();
            let gf = g.inner_product(&f).unwrap();
            prop_assert!((fg - gf.conj()).norm() < 1e-12);
            // linear in the second slot
            let g_plus_h = g.with_data(g.samples().iter().zip(h.samples()).map(|(a, b)| alpha * a + b).collect());
            let lhs = f.inner_product(&g_plus_h).unwrap();
            let rhs = alpha * fg + f.inner_product(&h).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-12);
            // conjugate-linear in the first
            let lhs = f.scale(alpha).inner_product(&g).unwrap();
            prop_assert!((lhs - alpha.conj() * fg).norm() < 1e-12);
        }
    }
}
