//! Two-dimensional FFT over a [`TransverseGrid`] layout (x fastest).
//!
//! Rows are transformed in parallel, columns through a transpose. The forward
//! transform is unscaled and the inverse carries the `1/(nx·ny)` factor.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::fields::TransverseGrid;

pub struct Fft2 {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn new(grid: &TransverseGrid) -> Self {
        let mut planner = FftPlanner::new();
        let (nx, ny) = (grid.nx(), grid.ny());
        Self {
            nx,
            ny,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.fwd_x, &self.fwd_y);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inv_x, &self.inv_y);
        let s = 1.0 / (self.nx * self.ny) as f64;
        data.par_iter_mut().for_each(|v| *v *= s);
    }

    fn run(&self, data: &mut [Complex64], along_x: &Arc<dyn Fft<f64>>, along_y: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.nx * self.ny);
        transform_rows(data, self.nx, along_x);
        let mut t = transpose(data, self.nx, self.ny);
        transform_rows(&mut t, self.ny, along_y);
        let back = transpose(&t, self.ny, self.nx);
        data.copy_from_slice(&back);
    }
}

fn transform_rows(data: &mut [Complex64], len: usize, fft: &Arc<dyn Fft<f64>>) {
    let scratch_len = fft.get_inplace_scratch_len();
    data.par_chunks_mut(len).for_each_init(
        || vec![Complex64::new(0.0, 0.0); scratch_len],
        |scratch, row| fft.process_with_scratch(row, scratch),
    );
}

/// Transpose a row-major `rows x cols` buffer (row length `cols`).
fn transpose(data: &[Complex64], cols: usize, rows: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    out.par_chunks_mut(rows).enumerate().for_each(|(c, dst)| {
        for (r, v) in dst.iter_mut().enumerate() {
            *v = data[r * cols + c];
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::ScalarField;

    #[test]
    fn roundtrip_restores_input() {
        let g = TransverseGrid::new(32, 16, 1.0, 1.0).unwrap();
        let orig: Vec<Complex64> =
            (0..g.len()).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let mut d = orig.clone();
        let fft = Fft2::new(&g);
        fft.forward(&mut d);
        fft.inverse(&mut d);
        for (a, b) in d.iter().zip(&orig) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn single_plane_wave_lands_in_one_bin() {
        let g = TransverseGrid::new(16, 8, 1.0, 1.0).unwrap();
        let (mx, my) = (3usize, 5usize);
        let mut d: Vec<Complex64> = (0..g.len())
            .map(|i| {
                let (ix, iy) = (i % 16, i / 16);
                Complex64::from_polar(1.0, g.kx(mx) * ix as f64 + g.ky(my) * iy as f64)
            })
            .collect();
        Fft2::new(&g).forward(&mut d);
        for (i, v) in d.iter().enumerate() {
            let expect = if i == g.index(mx, my) { g.len() as f64 } else { 0.0 };
            assert!((v.norm() - expect).abs() < 1e-9, "bin {i}: {v}");
        }
    }

    #[test]
    fn parseval_holds_with_grid_scaling() {
        let g = TransverseGrid::square(128, 4e-3).unwrap();
        let f = ScalarField::from_fn(g, 710e-9, |x, y| {
            let r2 = x * x + y * y;
            Complex64::new(x * 1e3, y * 2e3) * (-r2 / (0.4e-3f64).powi(2)).exp()
        })
        .unwrap();
        let mut spec = f.samples().to_vec();
        Fft2::new(&g).forward(&mut spec);
        let spectral: f64 =
            spec.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.cell_area() / g.len() as f64;
        let direct = f.norm_sqr();
        assert!(((spectral - direct) / direct).abs() < 1e-10);
    }
}
