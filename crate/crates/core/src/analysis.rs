//! Modal decomposition of diffracted fields, the mutual overlap `b`, and
//! phase-structure diagnostics.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::fields::TransverseGrid;
use crate::modes::{bg_mode, lg_mode, ModeFamily, ModeSpec};
use crate::propagator::Propagator;

/// Largest admissible `|Im ⟨ψ₋|ψ₊⟩|` before the overlap is rejected.
pub const IMAG_RESIDUAL_TOL: f64 = 1e-6;

/// Corner amplitudes below this fraction of the peak are treated as noise by
/// the singularity counter.
pub const SINGULARITY_NOISE_FLOOR: f64 = 1e-6;

/// Default BG radial lattice: `[0, 3κ]` with 64 samples.
pub const DEFAULT_KRHO_SPAN: f64 = 3.0;
pub const DEFAULT_KRHO_SAMPLES: usize = 64;

/// Radial label of a spectrum entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialIndex {
    P(u32),
    KRho { index: usize, k_rho: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEntry {
    pub radial: RadialIndex,
    pub l: i32,
    pub coefficient: Complex64,
}

/// Projection coefficients of a field onto a truncated mode set.
///
/// BG coefficients are projections onto individually unit-normalized modes on
/// a discrete `k_ρ` lattice. Those modes are not mutually orthogonal, so the
/// BG captured power is not bounded by one.
#[derive(Debug, Clone)]
pub struct ModalSpectrum {
    family: ModeFamily,
    entries: Vec<SpectrumEntry>,
}

impl ModalSpectrum {
    pub fn family(&self) -> ModeFamily {
        self.family
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    /// `Σ|c|²` over all entries.
    pub fn captured_power(&self) -> f64 {
        self.entries.iter().map(|e| e.coefficient.norm_sqr()).sum()
    }

    /// `Σ|c|²` over the entries with azimuthal index `l`.
    pub fn power_in_l(&self, l: i32) -> f64 {
        self.entries.iter().filter(|e| e.l == l).map(|e| e.coefficient.norm_sqr()).sum()
    }

    pub fn lg_coefficient(&self, p: u32, l: i32) -> Option<Complex64> {
        self.entries
            .iter()
            .find(|e| e.l == l && e.radial == RadialIndex::P(p))
            .map(|e| e.coefficient)
    }

    pub fn bg_coefficient(&self, index: usize, l: i32) -> Option<Complex64> {
        self.entries
            .iter()
            .find(|e| e.l == l && matches!(e.radial, RadialIndex::KRho { index: i, .. } if i == index))
            .map(|e| e.coefficient)
    }

    /// Largest-magnitude entry.
    pub fn dominant(&self) -> Option<&SpectrumEntry> {
        self.entries.iter().max_by(|a, b| a.coefficient.norm_sqr().total_cmp(&b.coefficient.norm_sqr()))
    }
}

/// Which truncated basis to project onto.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisRequest {
    Lg { waist: f64, p_max: u32, l_range: RangeInclusive<i32> },
    Bg { waist: f64, k_rho: Vec<f64>, l_range: RangeInclusive<i32> },
}

impl BasisRequest {
    fn labels(&self) -> Vec<(RadialIndex, i32)> {
        match self {
            BasisRequest::Lg { p_max, l_range, .. } => l_range
                .clone()
                .flat_map(|l| (0..=*p_max).map(move |p| (RadialIndex::P(p), l)))
                .collect(),
            BasisRequest::Bg { k_rho, l_range, .. } => l_range
                .clone()
                .flat_map(|l| k_rho.iter().enumerate().map(move |(index, &k)| (RadialIndex::KRho { index, k_rho: k }, l)))
                .collect(),
        }
    }

    fn family(&self) -> ModeFamily {
        match self {
            BasisRequest::Lg { .. } => ModeFamily::Lg,
            BasisRequest::Bg { .. } => ModeFamily::Bg,
        }
    }

    /// `None` for the identically vanishing BG modes with `k_ρ = 0`, `l ≠ 0`.
    fn mode(&self, like: &ScalarField, radial: RadialIndex, l: i32) -> Result<Option<ScalarField>> {
        match (self, radial) {
            (BasisRequest::Lg { waist, .. }, RadialIndex::P(p)) => {
                lg_mode(like.grid(), p, l, *waist, like.wavelength()).map(Some)
            }
            (BasisRequest::Bg { .. }, RadialIndex::KRho { k_rho, .. }) if k_rho == 0.0 && l != 0 => Ok(None),
            (BasisRequest::Bg { waist, .. }, RadialIndex::KRho { k_rho, .. }) => {
                bg_mode(like.grid(), k_rho, l, *waist, like.wavelength()).map(Some)
            }
            _ => unreachable!("labels match their basis"),
        }
    }
}

/// Uniform `k_ρ` lattice `k_max·i/(n-1)`, `i = 0..n`.
pub fn uniform_k_rho_lattice(k_max: f64, samples: usize) -> Result<Vec<f64>> {
    if samples < 2 {
        return Err(Error::param("krho_samples", "need at least 2 lattice points"));
    }
    if !(k_max > 0.0 && k_max.is_finite()) {
        return Err(Error::param("krho_max", format!("must be positive, got {k_max}")));
    }
    Ok((0..samples).map(|i| k_max * i as f64 / (samples - 1) as f64).collect())
}

/// The default lattice `[0, 3κ]`, 64 points.
pub fn default_k_rho_lattice(kappa: f64) -> Result<Vec<f64>> {
    uniform_k_rho_lattice(DEFAULT_KRHO_SPAN * kappa, DEFAULT_KRHO_SAMPLES)
}

/// `c = ⟨u|ψ⟩` for every mode `u` of the requested basis.
pub fn spectrum(psi: &ScalarField, basis: &BasisRequest) -> Result<ModalSpectrum> {
    let entries = basis
        .labels()
        .into_par_iter()
        .map(|(radial, l)| {
            let coefficient = match basis.mode(psi, radial, l)? {
                Some(mode) => mode.inner_product(psi)?,
                None => Complex64::new(0.0, 0.0),
            };
            Ok(SpectrumEntry { radial, l, coefficient })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModalSpectrum { family: basis.family(), entries })
}

/// LG coefficients `c_pl` for `p ≤ p_max`, `l ∈ l_range`.
pub fn lg_spectrum(psi: &ScalarField, p_max: u32, l_range: RangeInclusive<i32>, waist: f64) -> Result<ModalSpectrum> {
    spectrum(psi, &BasisRequest::Lg { waist, p_max, l_range })
}

/// BG coefficients `c_l(k_ρ)` on the given `k_ρ` lattice.
pub fn bg_spectrum(psi: &ScalarField, k_rho: &[f64], l_range: RangeInclusive<i32>, waist: f64) -> Result<ModalSpectrum> {
    spectrum(psi, &BasisRequest::Bg { waist, k_rho: k_rho.to_vec(), l_range })
}

/// Largest change of any expansion coefficient when both the field and the
/// basis modes are propagated to `z`.
pub fn z_invariance_check(psi0: &ScalarField, z: f64, basis: &BasisRequest) -> Result<f64> {
    let at_zero = spectrum(psi0, basis)?;
    if z == 0.0 {
        return Ok(0.0);
    }
    let prop = Propagator::new(psi0.grid());
    let psi_z = prop.propagate(psi0, z)?;
    let deviations = at_zero
        .entries
        .par_iter()
        .map(|e| {
            let Some(mode) = basis.mode(psi0, e.radial, e.l)? else {
                return Ok(0.0);
            };
            let mode_z = prop.propagate(&mode, z)?;
            Ok((mode_z.inner_product(&psi_z)? - e.coefficient).norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(deviations.into_iter().fold(0.0, f64::max))
}

/// Normalized Gram matrix `⟨u_i|u_j⟩ / (‖u_i‖‖u_j‖)` of a set of modes.
///
/// Mode values are evaluated row by row and never stored as whole fields, so
/// large bases fit in memory on large grids.
pub fn mode_gram(grid: &TransverseGrid, modes: &[ModeSpec]) -> Result<Vec<Vec<Complex64>>> {
    for m in modes {
        m.validate()?;
    }
    let k = modes.len();
    const ROWS_PER_CHUNK: usize = 16;
    let rows: Vec<usize> = (0..grid.ny()).collect();
    let partials: Vec<Vec<Complex64>> = rows
        .par_chunks(ROWS_PER_CHUNK)
        .map(|chunk| {
            let mut acc = vec![Complex64::new(0.0, 0.0); k * k];
            let mut vals = vec![Complex64::new(0.0, 0.0); k];
            for &iy in chunk {
                let y = grid.y(iy);
                for ix in 0..grid.nx() {
                    let x = grid.x(ix);
                    for (v, m) in vals.iter_mut().zip(modes) {
                        *v = m.value_at(x, y);
                    }
                    for i in 0..k {
                        let ci = vals[i].conj();
                        for j in i..k {
                            acc[i * k + j] += ci * vals[j];
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let mut raw = vec![Complex64::new(0.0, 0.0); k * k];
    for p in &partials {
        for (r, v) in raw.iter_mut().zip(p) {
            *r += v;
        }
    }
    let norms: Vec<f64> = (0..k).map(|i| raw[i * k + i].re.sqrt()).collect();
    if norms.contains(&0.0) {
        return Err(Error::ZeroNorm);
    }
    let mut gram = vec![vec![Complex64::new(0.0, 0.0); k]; k];
    for i in 0..k {
        for j in i..k {
            let g = raw[i * k + j] / (norms[i] * norms[j]);
            gram[i][j] = g;
            gram[j][i] = g.conj();
        }
    }
    Ok(gram)
}

/// Mutual overlap of the two diffracted single-photon fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapReport {
    /// `Re ⟨ψ₋|ψ₊⟩`.
    pub b: f64,
    /// `Im ⟨ψ₋|ψ₊⟩`, expected to vanish.
    pub imag_residual: f64,
    /// Obstacle displacement, when known.
    pub displacement: Option<f64>,
}

/// `b = ∫ conj(ψ₋) ψ₊`, asserting the imaginary part is negligible.
pub fn mutual_overlap(psi_plus: &ScalarField, psi_minus: &ScalarField) -> Result<OverlapReport> {
    if !psi_plus.is_normalized() || !psi_minus.is_normalized() {
        return Err(Error::param("field", "mutual overlap requires normalized fields"));
    }
    let raw = psi_minus.inner_product(psi_plus)?;
    if raw.im.abs() > IMAG_RESIDUAL_TOL {
        return Err(Error::SymmetryViolation { residual: raw.im.abs(), threshold: IMAG_RESIDUAL_TOL });
    }
    Ok(OverlapReport { b: raw.re, imag_residual: raw.im, displacement: None })
}

/// Counts phase vortices whose loop center lies within `radius` of the origin.
///
/// Circulation is measured on 8-sample loops around 2x2-cell blocks centered on
/// every other sample, aligned so that the origin is a block center. Such a
/// loop resolves charges up to ±3, including a vortex sitting exactly on a
/// sample. Blocks whose loop amplitudes all fall below
/// [`SINGULARITY_NOISE_FLOOR`] times the peak are skipped. Returns the total
/// positive and negative charge.
pub fn count_phase_singularities(psi: &ScalarField, radius: f64) -> Result<(usize, usize)> {
    let g = psi.grid();
    let (wx, wy) = g.window();
    if !(radius > 0.0 && radius < 0.5 * wx.min(wy)) {
        return Err(Error::param("radius", format!("must lie in (0, half window), got {radius}")));
    }
    let floor = SINGULARITY_NOISE_FLOOR * psi.max_abs();
    let (nx, ny) = (g.nx(), g.ny());
    let (ox, oy) = (nx / 2 % 2, ny / 2 % 2);
    let centers_y: Vec<usize> = (1..ny - 1).filter(|iy| iy % 2 == oy).collect();

    let per_row: Vec<(usize, usize)> = centers_y
        .par_iter()
        .map(|&cy| {
            let mut counts = (0usize, 0usize);
            for cx in (1..nx - 1).filter(|ix| ix % 2 == ox) {
                let (x, y) = (g.x(cx), g.y(cy));
                if (x * x + y * y).sqrt() >= radius {
                    continue;
                }
                let ring = [
                    (cx - 1, cy - 1),
                    (cx, cy - 1),
                    (cx + 1, cy - 1),
                    (cx + 1, cy),
                    (cx + 1, cy + 1),
                    (cx, cy + 1),
                    (cx - 1, cy + 1),
                    (cx - 1, cy),
                ];
                let values: Vec<Complex64> = ring.iter().map(|&(i, j)| psi.at(i, j)).collect();
                if values.iter().all(|v| v.norm() < floor) {
                    continue;
                }
                let circulation: f64 =
                    (0..8).map(|k| (values[(k + 1) % 8] * values[k].conj()).arg()).sum();
                let charge = (circulation / (2.0 * PI)).round() as i64;
                if charge > 0 {
                    counts.0 += charge as usize;
                } else if charge < 0 {
                    counts.1 += (-charge) as usize;
                }
            }
            counts
        })
        .collect();
    Ok(per_row.into_iter().fold((0, 0), |acc, c| (acc.0 + c.0, acc.1 + c.1)))
}

/// `Γ(3/2 + n) / Γ(1 + n)`.
fn gamma_ratio(n: f64) -> f64 {
    gamma(1.5 + n) / gamma(1.0 + n)
}

fn correlation_factor(l0: u32) -> f64 {
    let n = l0 as f64;
    (PI / (2.0 * n)).sin() * gamma_ratio(n) / 2f64.sqrt()
}

/// Phase correlation length of a `p = 0` LG mode with waist `w`:
/// `ξ = (w/√2)·sin(π/2|l0|)·Γ(3/2+|l0|)/Γ(1+|l0|)`, defined for `|l0| ≥ 2`.
pub fn phase_correlation_length(l0: i32, waist: f64) -> Result<f64> {
    let n = l0.unsigned_abs();
    if n < 2 {
        return Err(Error::param("l0", format!("correlation length needs |l0| >= 2, got {l0}")));
    }
    Ok(waist * correlation_factor(n))
}

/// LG waist for which `ξ(l0)/a` equals `ratio`.
pub fn waist_for_correlation_ratio(ratio: f64, a: f64, l0: i32) -> Result<f64> {
    let n = l0.unsigned_abs();
    if n < 2 {
        return Err(Error::param("l0", format!("correlation length needs |l0| >= 2, got {l0}")));
    }
    if !(ratio > 0.0 && a > 0.0) {
        return Err(Error::param("ratio", "ratio and radius must be positive"));
    }
    Ok(ratio * a / correlation_factor(n))
}
