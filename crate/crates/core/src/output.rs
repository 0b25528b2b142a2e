//! CSV and binary graymap writers. All floats are written as `%.12e`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::analysis::{ModalSpectrum, RadialIndex};
use crate::entanglement::ConcurrenceResult;
use crate::error::Result;
use crate::fields::ScalarField;

/// C-style `%.12e`: twelve fraction digits and an exponent of at least two digits.
pub fn sci(v: f64) -> String {
    let s = format!("{v:.12e}");
    match s.split_once('e') {
        Some((mantissa, exp)) => {
            let (sign, digits) = match exp.strip_prefix('-') {
                Some(d) => ('-', d),
                None => ('+', exp),
            };
            format!("{mantissa}e{sign}{digits:0>2}")
        }
        None => s, // NaN, inf
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

/// `x_m,y_m,re,im`, row-major with `x` fastest.
pub fn write_field_csv(path: &Path, field: &ScalarField) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "x_m,y_m,re,im")?;
    let g = field.grid();
    for iy in 0..g.ny() {
        let y = sci(g.y(iy));
        for ix in 0..g.nx() {
            let v = field.at(ix, iy);
            writeln!(w, "{},{},{},{}", sci(g.x(ix)), y, sci(v.re), sci(v.im))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_overlap_csv(path: &Path, points: &[(f64, f64)]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "d_over_a,b")?;
    for (x, b) in points {
        writeln!(w, "{},{}", sci(*x), sci(*b))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_concurrence_csv(path: &Path, rows: &[ConcurrenceResult]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "d_over_a,b,C_paper,C_normalized,purity_paper,purity_oracle")?;
    for r in rows {
        let oracle = r.purity_oracle.map_or_else(String::new, sci);
        writeln!(
            w,
            "{},{},{},{},{},{}",
            sci(r.d_over_a),
            sci(r.b),
            sci(r.c_paper),
            sci(r.c_normalized),
            sci(r.purity_paper),
            oracle
        )?;
    }
    w.flush()?;
    Ok(())
}

/// `basis,p_or_krho,l,re,im,abs2`; the radial column is `p` for LG and `k_ρ` in 1/m for BG.
pub fn write_spectrum_csv(path: &Path, spectrum: &ModalSpectrum) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "basis,p_or_krho,l,re,im,abs2")?;
    for e in spectrum.entries() {
        let radial = match e.radial {
            RadialIndex::P(p) => p.to_string(),
            RadialIndex::KRho { k_rho, .. } => sci(k_rho),
        };
        let c = e.coefficient;
        writeln!(w, "{},{},{},{},{},{}", spectrum.family(), radial, e.l, sci(c.re), sci(c.im), sci(c.norm_sqr()))?;
    }
    w.flush()?;
    Ok(())
}

/// 8-bit binary PGM of `values` mapped linearly from `[lo, hi]` to `[0, 255]`.
/// Row 0 of the image is the largest `y`.
pub fn write_pgm(path: &Path, values: &[f64], nx: usize, ny: usize, lo: f64, hi: f64) -> Result<()> {
    let mut w = create(path)?;
    write!(w, "P5\n{nx} {ny}\n255\n")?;
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut row = vec![0u8; nx];
    for iy in (0..ny).rev() {
        for (ix, px) in row.iter_mut().enumerate() {
            let t = ((values[iy * nx + ix] - lo) / span).clamp(0.0, 1.0);
            *px = (t * 255.0).round() as u8;
        }
        w.write_all(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Intensity normalized to its peak.
pub fn write_intensity_pgm(path: &Path, field: &ScalarField) -> Result<()> {
    let intensity = field.intensity();
    let peak = intensity.iter().fold(0.0f64, |m, &v| m.max(v));
    let g = field.grid();
    write_pgm(path, &intensity, g.nx(), g.ny(), 0.0, peak)
}

/// Phase mapped from `[-π, π]`.
pub fn write_phase_pgm(path: &Path, field: &ScalarField) -> Result<()> {
    let g = field.grid();
    write_pgm(path, &field.phase(), g.nx(), g.ny(), -std::f64::consts::PI, std::f64::consts::PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scientific_format_matches_c() {
        assert_eq!(sci(1.0), "1.000000000000e+00");
        assert_eq!(sci(-2.5e-7), "-2.500000000000e-07");
        assert_eq!(sci(0.0), "0.000000000000e+00");
        assert_eq!(sci(6.02214076e123), "6.022140760000e+123");
        assert_eq!(sci(1e-300), "1.000000000000e-300");
    }

    #[test]
    fn pgm_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.pgm");
        // 2x2 image, row-major with y increasing
        write_pgm(&path, &[0.0, 1.0, 2.0, 4.0], 2, 2, 0.0, 4.0).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let header = b"P5\n2 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[128, 255, 0, 64]);
    }
}
