//! Invariant suite: basis orthonormality, propagator unitarity and semigroup
//! property, Gaussian spreading, z-invariance of modal coefficients, and the
//! Gram-matrix purity oracle against the closed form.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::analysis::{mode_gram, mutual_overlap, z_invariance_check, BasisRequest};
use crate::entanglement::{purity_bruteforce, purity_from_overlap, BiphotonScenario, ScenarioRunner};
use crate::error::Result;
use crate::fields::TransverseGrid;
use crate::modes::{lg_mode, ModeSpec};
use crate::obstacle::apply_obstacle;
use crate::propagator::{second_moment_width, Propagator};

/// One invariant: `value` must not exceed `threshold`. Informational checks
/// report a value without a pass/fail verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub informational: bool,
}

impl Check {
    pub fn bound(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, informational: false }
    }

    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), value, threshold: f64::NAN, informational: true }
    }

    pub fn passed(&self) -> bool {
        self.informational || self.value <= self.threshold
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.informational {
            write!(f, "INFO {}: {:.3e}", self.name, self.value)
        } else {
            let tag = if self.passed() { "PASS" } else { "FAIL" };
            write!(f, "{tag} {}: {:.3e} (limit {:.1e})", self.name, self.value, self.threshold)
        }
    }
}

/// Largest `|G_ij - δ_ij|` of an LG basis with `p ≤ p_max`, `|l| ≤ l_max`.
pub fn lg_orthonormality(grid: &TransverseGrid, waist: f64, wavelength: f64, p_max: u32, l_max: i32) -> Result<f64> {
    let modes: Vec<ModeSpec> = (-l_max..=l_max)
        .flat_map(|l| (0..=p_max).map(move |p| ModeSpec::Lg { p, l, waist, wavelength }))
        .collect();
    let g = mode_gram(grid, &modes)?;
    let mut worst = 0.0f64;
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - Complex64::new(target, 0.0)).norm());
        }
    }
    Ok(worst)
}

/// BG overlaps on a few `k_ρ` values: `(max |overlap| across different l,
/// max |overlap| between distinct k_ρ at equal l)`.
pub fn bg_overlaps(grid: &TransverseGrid, waist: f64, wavelength: f64, k_rho: &[f64], l_max: i32) -> Result<(f64, f64)> {
    let modes: Vec<ModeSpec> = (-l_max..=l_max)
        .flat_map(|l| k_rho.iter().map(move |&k| ModeSpec::Bg { k_rho: k, l, waist, wavelength }))
        .collect();
    let g = mode_gram(grid, &modes)?;
    let (mut cross_l, mut same_l) = (0.0f64, 0.0f64);
    for i in 0..modes.len() {
        for j in 0..modes.len() {
            if i == j {
                continue;
            }
            if modes[i].l() != modes[j].l() {
                cross_l = cross_l.max(g[i][j].norm());
            } else {
                same_l = same_l.max(g[i][j].norm());
            }
        }
    }
    Ok((cross_l, same_l))
}

/// Settings for [`run_suite`].
#[derive(Debug, Clone)]
pub struct SuiteParams {
    pub grid: TransverseGrid,
    pub lg: BiphotonScenario,
    pub bg: BiphotonScenario,
    pub z: f64,
}

/// Runs every invariant and returns the outcomes in a fixed order.
pub fn run_suite(p: &SuiteParams) -> Result<Vec<Check>> {
    let g = &p.grid;
    let lambda = p.lg.wavelength;
    let lg_waist = p.lg.encoding.waist();
    let a = p.lg.radius;
    let mut checks = Vec::new();

    checks.push(Check::bound("LG orthonormality p<=4 |l|<=4", lg_orthonormality(g, lg_waist, lambda, 4, 4)?, 1e-6));

    if let crate::entanglement::Encoding::Bg { waist, k_rho } = p.bg.encoding {
        let ks = [k_rho, 1.1 * k_rho, 1.5 * k_rho];
        let (cross, same) = bg_overlaps(g, waist, p.bg.wavelength, &ks, 2)?;
        checks.push(Check::bound("BG cross-l orthogonality", cross, 1e-8));
        checks.push(Check::info("BG equal-l overlap between distinct k_rho", same));
    }

    let prop = Propagator::new(g);
    let u = lg_mode(g, 0, p.lg.l0 as i32, lg_waist, lambda)?;
    let psi = apply_obstacle(&u, &p.lg.obstacle(a))?.field;
    let psi_z = prop.propagate(&psi, p.z)?;
    checks.push(Check::bound("propagator unitarity", (psi_z.norm_sqr() - 1.0).abs(), 1e-10));

    let (z1, z2) = (0.4 * p.z, 0.6 * p.z);
    let two_step = prop.propagate(&prop.propagate(&psi, z1)?, z2)?;
    let one_step = prop.propagate(&psi, z1 + z2)?;
    let diff = one_step.samples().iter().zip(two_step.samples()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>();
    checks.push(Check::bound("propagator semigroup", (diff * g.cell_area()).sqrt(), 1e-10));

    let gauss = lg_mode(g, 0, 0, lg_waist, lambda)?;
    let z_r = PI * lg_waist * lg_waist / lambda;
    let analytic = lg_waist * (1.0 + (p.z / z_r).powi(2)).sqrt();
    let numeric = second_moment_width(&prop.propagate(&gauss, p.z)?);
    checks.push(Check::bound("Gaussian width vs analytic", ((numeric - analytic) / analytic).abs(), 5e-3));

    let l0 = p.lg.l0 as i32;
    let basis = BasisRequest::Lg { waist: lg_waist, p_max: 3, l_range: l0 - 3..=l0 + 3 };
    checks.push(Check::bound("z-invariance of LG coefficients", z_invariance_check(&psi, p.z, &basis)?, 1e-4));

    for s in [&p.lg, &p.bg] {
        let runner = ScenarioRunner::new(*s, g)?;
        let mut oracle = 0.0f64;
        for x in [0.5, 1.0, 1.5] {
            let (pp, mm) = runner.diffracted(&s.obstacle(x * s.radius))?;
            let b = mutual_overlap(&pp, &mm)?.b;
            oracle = oracle.max((purity_bruteforce(&pp, &mm, false)? - purity_from_overlap(b)?).abs());
        }
        let family = s.encoding.family();
        checks.push(Check::bound(format!("{family} Gram purity vs closed form"), oracle, 1e-10));
        checks.push(Check::bound(format!("{family} b at d = 0"), runner.overlap(0.0)?.abs(), 1e-8));
        checks.push(Check::bound(format!("{family} mirror-arm overlap"), runner.mirror_check(s.radius)?.0, 1e-10));
    }
    Ok(checks)
}
