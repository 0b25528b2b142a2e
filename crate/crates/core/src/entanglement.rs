//! Concurrence of the diffracted bi-photon state from the mutual overlap `b`,
//! with a Gram-matrix oracle for the reduced-state purity.

use num_complex::Complex64;

use crate::analysis::mutual_overlap;
use crate::error::{Error, Result};
use crate::fields::{ScalarField, TransverseGrid};
use crate::modes::{bg_mode, lg_mode, ModeFamily};
use crate::obstacle::{EdgeProfile, ObstacleSpec, DEFAULT_ORDER};

/// Largest `|b - b_mirror|` accepted when the `-d` arm is simulated explicitly.
pub const MIRROR_TOL: f64 = 1e-10;

/// `√(√10 - 3)`: the positive root of `b⁴ + 6b² - 1`, beyond which
/// [`concurrence_paper`] is undefined.
pub fn concurrence_domain_limit() -> f64 {
    (10f64.sqrt() - 3.0).sqrt()
}

fn check_unit(b: f64) -> Result<()> {
    if b.is_nan() || b.abs() > 1.0 {
        return Err(Error::param("b", format!("overlap must satisfy |b| <= 1, got {b}")));
    }
    Ok(())
}

/// `tr ϱ² = (1 + 6b² + b⁴)/2`, returned as written even where it exceeds one.
pub fn purity_from_overlap(b: f64) -> Result<f64> {
    check_unit(b)?;
    let b2 = b * b;
    Ok(0.5 * (1.0 + 6.0 * b2 + b2 * b2))
}

/// `C = √(1 - 6b² - b⁴)`; a negative radicand is a domain error, never clamped.
pub fn concurrence_paper(b: f64) -> Result<f64> {
    let b2 = b * b;
    let radicand = 1.0 - 6.0 * b2 - b2 * b2;
    if radicand.is_nan() || radicand < 0.0 {
        return Err(Error::ConcurrenceDomain { b, limit: concurrence_domain_limit() });
    }
    Ok(radicand.sqrt())
}

/// `(1 - b²)/(1 + b²)`: the concurrence of the reduced state renormalized to unit trace.
pub fn concurrence_normalized(b: f64) -> Result<f64> {
    check_unit(b)?;
    let b2 = b * b;
    Ok((1.0 - b2) / (1.0 + b2))
}

/// Purity of the rank-two reduced state `ϱ = Σ M_ij |ψ_i⟩⟨ψ_j|` of photon 1.
///
/// `arm1` holds the diffracted images of `u_{+l0}` and `u_{-l0}` seen by photon
/// 1, `arm2` the same for photon 2. Photon 1 in `ψ₊` is paired with photon 2 in
/// `ψ₋'` and vice versa, so `M = ½ [⟨φ_j|φ_i⟩]` with `φ = (ψ₋', ψ₊')`. The purity
/// is `tr(MGMG)` with `G_jk = ⟨ψ_j|ψ_k⟩`, or `tr(MGMG)/tr(MG)²` when
/// `renormalize` is set.
pub fn purity_two_arm(arm1: (&ScalarField, &ScalarField), arm2: (&ScalarField, &ScalarField), renormalize: bool) -> Result<f64> {
    let g = gram(arm1.0, arm1.1)?;
    let partner = gram(arm2.1, arm2.0)?;
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = 0.5 * partner[j][i];
        }
    }
    let mg = matmul(&m, &g);
    let trace = mg[0][0] + mg[1][1];
    let sq = matmul(&mg, &mg);
    let purity = sq[0][0] + sq[1][1];
    let purity = if renormalize { purity / (trace * trace) } else { purity };
    Ok(purity.re)
}

/// [`purity_two_arm`] with photon 2 taken as the mirror image of photon 1,
/// whose pairing coefficient equals that of photon 1's own pair.
pub fn purity_bruteforce(psi_plus: &ScalarField, psi_minus: &ScalarField, renormalize: bool) -> Result<f64> {
    // the mirror arm satisfies ⟨ψ₊'|ψ₋'⟩ = ⟨ψ₋|ψ₊⟩, which is the Gram entry of
    // the swapped pair (ψ₋, ψ₊)
    purity_two_arm((psi_plus, psi_minus), (psi_minus, psi_plus), renormalize)
}

fn gram(a: &ScalarField, b: &ScalarField) -> Result<[[Complex64; 2]; 2]> {
    let ab = a.inner_product(b)?;
    Ok([[a.inner_product(a)?, ab], [ab.conj(), b.inner_product(b)?]])
}

fn matmul(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Mode family and beam parameters of the entangled photons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Encoding {
    Lg { waist: f64 },
    Bg { waist: f64, k_rho: f64 },
}

impl Encoding {
    pub fn family(&self) -> ModeFamily {
        match self {
            Encoding::Lg { .. } => ModeFamily::Lg,
            Encoding::Bg { .. } => ModeFamily::Bg,
        }
    }

    pub fn waist(&self) -> f64 {
        match *self {
            Encoding::Lg { waist } | Encoding::Bg { waist, .. } => waist,
        }
    }
}

/// OAM-entangled pair `(|l0⟩|-l0⟩ + |-l0⟩|l0⟩)/√2`, each photon meeting an
/// obstacle displaced by `±d` and detected at distance `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiphotonScenario {
    pub encoding: Encoding,
    pub l0: u32,
    pub wavelength: f64,
    pub radius: f64,
    pub edge: EdgeProfile,
    /// Detection distance; does not enter any entanglement quantity.
    pub detection_distance: f64,
}

impl BiphotonScenario {
    pub fn new(encoding: Encoding, l0: u32, wavelength: f64, radius: f64) -> Self {
        Self {
            encoding,
            l0,
            wavelength,
            radius,
            edge: EdgeProfile::SuperGaussian { order: DEFAULT_ORDER },
            detection_distance: 0.05,
        }
    }

    pub fn validate(&self, grid: &TransverseGrid) -> Result<()> {
        if self.l0 == 0 {
            return Err(Error::param("l0", "the l0 = 0 input is a product state; need l0 >= 1"));
        }
        if !(self.detection_distance >= 0.0 && self.detection_distance.is_finite()) {
            return Err(Error::param("z", "detection distance must be non-negative"));
        }
        self.obstacle(0.0).validate()?;
        grid.check_covers_waist(self.encoding.waist())
    }

    /// The obstacle seen by photon 1 (`+d`); photon 2 sees its mirror image at `-d`.
    pub fn obstacle(&self, d: f64) -> ObstacleSpec {
        ObstacleSpec { radius: self.radius, displacement: d, edge: self.edge }
    }

    pub fn obstacle_pair(&self, d: f64) -> (ObstacleSpec, ObstacleSpec) {
        (self.obstacle(d), self.obstacle(-d))
    }

    /// Undiffracted `u_{+l0}` and `u_{-l0}`.
    pub fn input_modes(&self, grid: &TransverseGrid) -> Result<(ScalarField, ScalarField)> {
        let l = self.l0 as i32;
        let make = |l: i32| match self.encoding {
            Encoding::Lg { waist } => lg_mode(grid, 0, l, waist, self.wavelength),
            Encoding::Bg { waist, k_rho } => bg_mode(grid, k_rho, l, waist, self.wavelength),
        };
        Ok((make(l)?, make(-l)?))
    }
}

/// Entanglement figures at one displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrenceResult {
    pub d_over_a: f64,
    pub b: f64,
    pub c_paper: f64,
    pub c_normalized: f64,
    pub purity_paper: f64,
    pub purity_oracle: Option<f64>,
}

/// Scenario bound to a grid, with its input modes generated once.
pub struct ScenarioRunner {
    scenario: BiphotonScenario,
    u_plus: ScalarField,
    u_minus: ScalarField,
}

impl ScenarioRunner {
    pub fn new(scenario: BiphotonScenario, grid: &TransverseGrid) -> Result<Self> {
        scenario.validate(grid)?;
        let (u_plus, u_minus) = scenario.input_modes(grid)?;
        Ok(Self { scenario, u_plus, u_minus })
    }

    pub fn scenario(&self) -> &BiphotonScenario {
        &self.scenario
    }

    /// Diffracted `(ψ₊, ψ₋)` behind one obstacle.
    pub fn diffracted(&self, obstacle: &ObstacleSpec) -> Result<(ScalarField, ScalarField)> {
        let t = obstacle.transmission(self.u_plus.grid())?;
        Ok((t.apply(&self.u_plus)?.field, t.apply(&self.u_minus)?.field))
    }

    /// `b` behind the `+d` obstacle.
    pub fn overlap(&self, d: f64) -> Result<f64> {
        let (p, m) = self.diffracted(&self.scenario.obstacle(d))?;
        Ok(mutual_overlap(&p, &m)?.b)
    }

    /// Single-arm result, with the Gram oracle evaluated on the same fields.
    pub fn run(&self, d: f64) -> Result<ConcurrenceResult> {
        let (p, m) = self.diffracted(&self.scenario.obstacle(d))?;
        let b = mutual_overlap(&p, &m)?.b;
        Ok(ConcurrenceResult {
            d_over_a: d / self.scenario.radius,
            b,
            c_paper: concurrence_paper(b)?,
            c_normalized: concurrence_normalized(b)?,
            purity_paper: purity_from_overlap(b)?,
            purity_oracle: Some(purity_bruteforce(&p, &m, false)?),
        })
    }

    /// Simulates both arms explicitly and returns `|b(+d) - b(-d)|` together with
    /// the two-arm purity. Fails if the arms disagree by more than [`MIRROR_TOL`].
    pub fn mirror_check(&self, d: f64) -> Result<(f64, f64)> {
        let (plus_obs, minus_obs) = self.scenario.obstacle_pair(d);
        let (p1, m1) = self.diffracted(&plus_obs)?;
        let (p2, m2) = self.diffracted(&minus_obs)?;
        let b1 = mutual_overlap(&p1, &m1)?.b;
        let b2 = mutual_overlap(&p2, &m2)?.b;
        let residual = (b1 - b2).abs();
        if residual > MIRROR_TOL {
            return Err(Error::SymmetryViolation { residual, threshold: MIRROR_TOL });
        }
        Ok((residual, purity_two_arm((&p1, &m1), (&p2, &m2), false)?))
    }
}

/// One-off evaluation of a scenario at displacement `d`.
pub fn run_scenario(scenario: &BiphotonScenario, grid: &TransverseGrid, d: f64) -> Result<ConcurrenceResult> {
    ScenarioRunner::new(*scenario, grid)?.run(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obstacle::apply_obstacle;
    use proptest::prelude::*;

    const LAMBDA: f64 = 710e-9;
    const A: f64 = 200e-6;

    fn grid() -> TransverseGrid {
        TransverseGrid::square(256, 2e-3).unwrap()
    }

    fn lg_scenario(l0: u32) -> BiphotonScenario {
        let w = crate::modes::lg_waist_for_obstacle(A, l0).unwrap();
        BiphotonScenario::new(Encoding::Lg { waist: w }, l0, LAMBDA, A)
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(purity_from_overlap(0.0).unwrap(), 0.5);
        assert!((purity_from_overlap(0.3).unwrap() - 0.774_050).abs() < 1e-6);
        assert_eq!(purity_from_overlap(1.0).unwrap(), 4.0);
        assert!(purity_from_overlap(1.1).is_err());

        assert_eq!(concurrence_paper(0.0).unwrap(), 1.0);
        assert!((concurrence_paper(0.3).unwrap() - 0.672_235).abs() < 1e-6);
        assert!(matches!(concurrence_paper(0.8), Err(Error::ConcurrenceDomain { .. })));

        assert_eq!(concurrence_normalized(0.0).unwrap(), 1.0);
        assert_eq!(concurrence_normalized(1.0).unwrap(), 0.0);
        assert!((concurrence_normalized(0.3).unwrap() - 0.834_862).abs() < 1e-6);
    }

    #[test]
    fn domain_limit_is_root_of_quartic() {
        let b = concurrence_domain_limit();
        assert!((b.powi(4) + 6.0 * b * b - 1.0).abs() < 1e-14);
        assert!((b - 0.402_84).abs() < 1e-5);
        assert!(concurrence_paper(b * (1.0 - 1e-12)).is_ok());
        assert!(concurrence_paper(b * (1.0 + 1e-9)).is_err());
    }

    #[test]
    fn normalized_concurrence_from_renormalized_purity() {
        // C = √(2(1 - tr ρ̂²)), ρ̂ = ϱ / tr ϱ with tr ϱ = 1 + b²
        for b in [0.0, 0.1, 0.3, 0.6, 0.9, 1.0] {
            let raw = purity_from_overlap(b).unwrap();
            let renorm = raw / (1.0 + b * b).powi(2);
            let c = (2.0 * (1.0 - renorm)).max(0.0).sqrt();
            assert!((c - concurrence_normalized(b).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn gram_oracle_trivial_pairs() {
        let g = grid();
        let p = lg_mode(&g, 0, 1, 200e-6, LAMBDA).unwrap();
        let m = lg_mode(&g, 0, -1, 200e-6, LAMBDA).unwrap();
        assert!((purity_bruteforce(&p, &m, false).unwrap() - 0.5).abs() < 1e-12);
        assert!((purity_bruteforce(&p, &m, true).unwrap() - 0.5).abs() < 1e-12);
        assert!((purity_bruteforce(&p, &p, false).unwrap() - 4.0).abs() < 1e-10);
        assert!((purity_bruteforce(&p, &p, true).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gram_oracle_matches_closed_form_on_diffracted_pair() {
        let g = grid();
        let s = lg_scenario(1);
        let (up, um) = s.input_modes(&g).unwrap();
        for d in [0.3 * A, A, 1.6 * A] {
            let o = s.obstacle(d);
            let p = apply_obstacle(&up, &o).unwrap().field;
            let m = apply_obstacle(&um, &o).unwrap().field;
            let b = mutual_overlap(&p, &m).unwrap().b;
            assert!(b.abs() > 1e-3);
            let raw = purity_bruteforce(&p, &m, false).unwrap();
            assert!((raw - purity_from_overlap(b).unwrap()).abs() < 1e-10);
            let renorm = purity_bruteforce(&p, &m, true).unwrap();
            let c = (2.0 * (1.0 - renorm)).sqrt();
            assert!((c - concurrence_normalized(b).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn mirror_arm_reproduces_overlap_and_purity() {
        let g = grid();
        let runner = ScenarioRunner::new(lg_scenario(2), &g).unwrap();
        let d = 0.9 * A;
        let (residual, purity) = runner.mirror_check(d).unwrap();
        assert!(residual < MIRROR_TOL);
        let r = runner.run(d).unwrap();
        assert!((purity - r.purity_paper).abs() < 1e-10);
    }

    #[test]
    fn scenario_symmetries() {
        let g = grid();
        let runner = ScenarioRunner::new(lg_scenario(1), &g).unwrap();
        let at_zero = runner.run(0.0).unwrap();
        assert!(at_zero.b.abs() < 1e-8);
        assert!((at_zero.c_paper - 1.0).abs() < 1e-6);
        let d = 1.1 * A;
        assert!((runner.run(d).unwrap().b - runner.run(-d).unwrap().b).abs() < 1e-10);
        // swapping the roles of ±l0 leaves b unchanged
        let (p, m) = runner.diffracted(&runner.scenario().obstacle(d)).unwrap();
        let forward = mutual_overlap(&p, &m).unwrap().b;
        let swapped = mutual_overlap(&m, &p).unwrap().b;
        assert!((forward - swapped).abs() < 1e-12);
    }

    #[test]
    fn detection_distance_does_not_matter() {
        let g = grid();
        let mut s = lg_scenario(1);
        let a = run_scenario(&s, &g, A).unwrap();
        s.detection_distance = 1.0;
        assert_eq!(run_scenario(&s, &g, A).unwrap(), a);
    }

    #[test]
    fn invalid_scenarios() {
        let g = grid();
        assert!(ScenarioRunner::new(lg_scenario(1).clone_with_l0(0), &g).is_err());
        let wide = BiphotonScenario::new(Encoding::Bg { waist: 1e-3, k_rho: 30e3 }, 1, LAMBDA, A);
        assert!(matches!(wide.validate(&g), Err(Error::InvalidGrid(_))));
    }

    impl BiphotonScenario {
        fn clone_with_l0(mut self, l0: u32) -> Self {
            self.l0 = l0;
            self
        }
    }

    proptest! {
        #[test]
        fn concurrence_identity(b in -0.4028f64..0.4028) {
            let c = concurrence_paper(b).unwrap();
            prop_assert!((c * c + 6.0 * b * b + b.powi(4) - 1.0).abs() < 1e-14);
            prop_assert!((0.0..=1.0).contains(&c));
            prop_assert!((0.0..=1.0).contains(&concurrence_normalized(b).unwrap()));
        }

        #[test]
        fn concurrences_decrease_in_abs_b(x in 0.0f64..0.395, dx in 1e-6f64..0.005) {
            let y = x + dx;
            prop_assert!(concurrence_paper(y).unwrap() < concurrence_paper(x).unwrap());
            prop_assert!(concurrence_normalized(-y).unwrap() < concurrence_normalized(x).unwrap());
        }
    }
}
