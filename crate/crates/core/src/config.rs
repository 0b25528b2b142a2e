//! Flat `key = value` run configuration, its resolved manifest, and the content
//! hash used to name output files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::analysis::{waist_for_correlation_ratio, DEFAULT_KRHO_SAMPLES, DEFAULT_KRHO_SPAN};
use crate::entanglement::{BiphotonScenario, Encoding};
use crate::error::{Error, Result};
use crate::experiments::*;
use crate::fields::TransverseGrid;
use crate::modes::{lg_waist_for_ring, ModeFamily, ModeSpec, DEFAULT_RING_FRACTION};
use crate::obstacle::{EdgeProfile, ObstacleSpec, DEFAULT_ORDER};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    CsvPgm,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "csv" => Some(Self::Csv),
            "csv+pgm" => Some(Self::CsvPgm),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::CsvPgm => "csv+pgm",
        }
    }
}

/// Every tunable of a run. Lengths are in meters, wavenumbers in 1/m.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: usize,
    pub window: f64,
    pub family: ModeFamily,
    pub l0: u32,
    pub wavelength: f64,
    /// Explicit LG waist; otherwise derived from `xi_over_a` or the ring rule.
    pub lg_waist: Option<f64>,
    pub ring_fraction: f64,
    pub xi_over_a: Option<f64>,
    pub bg_waist: f64,
    pub k_rho: f64,
    pub a: f64,
    pub m: u32,
    pub hard_edge: bool,
    /// Displacement used by `maps` and `decompose`.
    pub d_over_a: f64,
    pub d_over_a_max: f64,
    pub samples: usize,
    /// Explicit sweep samples, overriding `samples`/`d_over_a_max`.
    pub d_over_a_list: Option<Vec<f64>>,
    pub z: f64,
    pub map_radius: f64,
    pub prominence: f64,
    pub p_max: u32,
    pub l_span: u32,
    pub krho_samples: usize,
    pub krho_span: f64,
    pub format: OutputFormat,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: 1024,
            window: 8e-3,
            family: ModeFamily::Lg,
            l0: 1,
            wavelength: DEFAULT_WAVELENGTH,
            lg_waist: None,
            ring_fraction: DEFAULT_RING_FRACTION,
            xi_over_a: None,
            bg_waist: DEFAULT_BG_WAIST,
            k_rho: DEFAULT_KAPPA,
            a: DEFAULT_RADIUS,
            m: DEFAULT_ORDER,
            hard_edge: false,
            d_over_a: 1.0,
            d_over_a_max: DEFAULT_MAX_D_OVER_A,
            samples: DEFAULT_SAMPLES,
            d_over_a_list: None,
            z: DEFAULT_DISTANCE,
            map_radius: DEFAULT_MAP_RADIUS,
            prominence: DEFAULT_PROMINENCE,
            p_max: 10,
            l_span: 5,
            krho_samples: DEFAULT_KRHO_SAMPLES,
            krho_span: DEFAULT_KRHO_SPAN,
            format: OutputFormat::Csv,
            out: PathBuf::from("out"),
        }
    }
}

fn config_err(key: &str, reason: impl Into<String>) -> Error {
    Error::Config { key: key.to_string(), reason: reason.into() }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| config_err(key, format!("cannot parse `{value}`")))
}

fn positive(key: &str, value: &str) -> Result<f64> {
    let v: f64 = parse_num(key, value)?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(config_err(key, format!("must be positive, got {v}")));
    }
    Ok(v)
}

fn non_negative(key: &str, value: &str) -> Result<f64> {
    let v: f64 = parse_num(key, value)?;
    if !(v >= 0.0 && v.is_finite()) {
        return Err(config_err(key, format!("must be non-negative, got {v}")));
    }
    Ok(v)
}

impl RunConfig {
    /// Parses a config file on top of the defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(&std::fs::read_to_string(path)?)?;
        Ok(cfg)
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(line, format!("line {} is not `key = value`", n + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_pair(&mut self, pair: &str) -> Result<()> {
        let (key, value) = pair.split_once('=').ok_or_else(|| config_err(pair, "expected KEY=VALUE"))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "grid" => {
                let n: usize = parse_num(key, value)?;
                if n < 2 || !n.is_power_of_two() {
                    return Err(config_err(key, format!("must be a power of two >= 2, got {n}")));
                }
                self.grid = n;
            }
            "window" => self.window = positive(key, value)?,
            "family" => {
                self.family = match value.to_ascii_lowercase().as_str() {
                    "lg" => ModeFamily::Lg,
                    "bg" => ModeFamily::Bg,
                    _ => return Err(config_err(key, format!("expected lg or bg, got `{value}`"))),
                }
            }
            "l0" => {
                let l: u32 = parse_num(key, value)?;
                if l == 0 {
                    return Err(config_err(key, "must be >= 1"));
                }
                self.l0 = l;
            }
            "wavelength" => self.wavelength = positive(key, value)?,
            "lg_waist" => self.lg_waist = Some(positive(key, value)?),
            "ring_fraction" => self.ring_fraction = positive(key, value)?,
            "xi_over_a" => self.xi_over_a = Some(positive(key, value)?),
            "bg_waist" => self.bg_waist = positive(key, value)?,
            "k_rho" => self.k_rho = non_negative(key, value)?,
            "a" => self.a = positive(key, value)?,
            "m" => {
                let m: u32 = parse_num(key, value)?;
                if m == 0 {
                    return Err(config_err(key, "must be >= 1"));
                }
                self.m = m;
            }
            "edge" => {
                self.hard_edge = match value {
                    "smooth" => false,
                    "hard" => true,
                    _ => return Err(config_err(key, format!("expected smooth or hard, got `{value}`"))),
                }
            }
            "d_over_a" => self.d_over_a = parse_num(key, value)?,
            "d_over_a_max" => self.d_over_a_max = positive(key, value)?,
            "samples" => {
                let n: usize = parse_num(key, value)?;
                if n < 2 {
                    return Err(config_err(key, "need at least 2 samples"));
                }
                self.samples = n;
            }
            "d_over_a_list" => {
                let list = value.split(',').map(|v| parse_num::<f64>(key, v)).collect::<Result<Vec<_>>>()?;
                if list.len() < 2 || list.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(config_err(key, "need at least 2 strictly increasing values"));
                }
                self.d_over_a_list = Some(list);
            }
            "z" => self.z = non_negative(key, value)?,
            "map_radius" => self.map_radius = positive(key, value)?,
            "prominence" => self.prominence = non_negative(key, value)?,
            "p_max" => self.p_max = parse_num(key, value)?,
            "l_span" => self.l_span = parse_num(key, value)?,
            "krho_samples" => {
                let n: usize = parse_num(key, value)?;
                if n < 2 {
                    return Err(config_err(key, "need at least 2 samples"));
                }
                self.krho_samples = n;
            }
            "krho_span" => self.krho_span = positive(key, value)?,
            "format" => {
                self.format =
                    OutputFormat::parse(value).ok_or_else(|| config_err(key, format!("expected csv or csv+pgm, got `{value}`")))?
            }
            "out" => self.out = PathBuf::from(value),
            _ => return Err(config_err(key, "unknown key")),
        }
        Ok(())
    }

    pub fn transverse_grid(&self) -> Result<TransverseGrid> {
        TransverseGrid::square(self.grid, self.window)
    }

    /// LG waist: explicit value, else from `xi_over_a`, else the ring rule.
    pub fn resolved_lg_waist(&self) -> Result<f64> {
        if let Some(w) = self.lg_waist {
            return Ok(w);
        }
        if let Some(ratio) = self.xi_over_a {
            return waist_for_correlation_ratio(ratio, self.a, self.l0 as i32)
                .map_err(|e| config_err("xi_over_a", e.to_string()));
        }
        lg_waist_for_ring(self.a, self.l0, self.ring_fraction)
    }

    pub fn edge(&self) -> EdgeProfile {
        if self.hard_edge {
            EdgeProfile::Hard
        } else {
            EdgeProfile::SuperGaussian { order: self.m }
        }
    }

    pub fn encoding(&self) -> Result<Encoding> {
        Ok(match self.family {
            ModeFamily::Lg => Encoding::Lg { waist: self.resolved_lg_waist()? },
            ModeFamily::Bg => Encoding::Bg { waist: self.bg_waist, k_rho: self.k_rho },
        })
    }

    pub fn scenario(&self) -> Result<BiphotonScenario> {
        let mut s = BiphotonScenario::new(self.encoding()?, self.l0, self.wavelength, self.a);
        s.edge = self.edge();
        s.detection_distance = self.z;
        Ok(s)
    }

    /// The input mode `u_{+l0}`.
    pub fn mode(&self) -> Result<ModeSpec> {
        let l = self.l0 as i32;
        Ok(match self.encoding()? {
            Encoding::Lg { waist } => ModeSpec::Lg { p: 0, l, waist, wavelength: self.wavelength },
            Encoding::Bg { waist, k_rho } => ModeSpec::Bg { k_rho, l, waist, wavelength: self.wavelength },
        })
    }

    pub fn obstacle(&self) -> ObstacleSpec {
        ObstacleSpec { radius: self.a, displacement: self.d_over_a * self.a, edge: self.edge() }
    }

    pub fn sweep_plan(&self) -> Result<SweepPlan> {
        let s = self.scenario()?;
        match &self.d_over_a_list {
            Some(list) => SweepPlan::new(s, list.clone()),
            None => SweepPlan::uniform(s, self.d_over_a_max, self.samples),
        }
    }

    /// Every setting that influences results, one `key = value` per line in a
    /// fixed order, followed by the derived quantities and fixed tolerances.
    pub fn resolved_lines(&self) -> Result<String> {
        let mut s = String::new();
        let family = match self.family {
            ModeFamily::Lg => "lg",
            ModeFamily::Bg => "bg",
        };
        let opt = |v: Option<f64>| v.map_or_else(|| "auto".to_string(), |v| format!("{v:e}"));
        let list = self.d_over_a_list.as_ref().map_or_else(
            || "auto".to_string(),
            |l| l.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(","),
        );
        let _ = writeln!(s, "grid = {}", self.grid);
        let _ = writeln!(s, "window = {:e}", self.window);
        let _ = writeln!(s, "family = {family}");
        let _ = writeln!(s, "l0 = {}", self.l0);
        let _ = writeln!(s, "wavelength = {:e}", self.wavelength);
        let _ = writeln!(s, "lg_waist = {}", opt(self.lg_waist));
        let _ = writeln!(s, "ring_fraction = {:e}", self.ring_fraction);
        let _ = writeln!(s, "xi_over_a = {}", opt(self.xi_over_a));
        let _ = writeln!(s, "bg_waist = {:e}", self.bg_waist);
        let _ = writeln!(s, "k_rho = {:e}", self.k_rho);
        let _ = writeln!(s, "a = {:e}", self.a);
        let _ = writeln!(s, "m = {}", self.m);
        let _ = writeln!(s, "edge = {}", if self.hard_edge { "hard" } else { "smooth" });
        let _ = writeln!(s, "d_over_a = {:e}", self.d_over_a);
        let _ = writeln!(s, "d_over_a_max = {:e}", self.d_over_a_max);
        let _ = writeln!(s, "samples = {}", self.samples);
        let _ = writeln!(s, "d_over_a_list = {list}");
        let _ = writeln!(s, "z = {:e}", self.z);
        let _ = writeln!(s, "map_radius = {:e}", self.map_radius);
        let _ = writeln!(s, "prominence = {:e}", self.prominence);
        let _ = writeln!(s, "p_max = {}", self.p_max);
        let _ = writeln!(s, "l_span = {}", self.l_span);
        let _ = writeln!(s, "krho_samples = {}", self.krho_samples);
        let _ = writeln!(s, "krho_span = {:e}", self.krho_span);
        let _ = writeln!(s, "format = {}", self.format.as_str());
        let _ = writeln!(s, "# derived");
        if let Ok(w) = self.resolved_lg_waist() {
            let _ = writeln!(s, "# lg_waist_resolved = {w:e}");
        }
        let _ = writeln!(s, "# fixed tolerances");
        let _ = writeln!(s, "# imag_residual_tol = {:e}", crate::analysis::IMAG_RESIDUAL_TOL);
        let _ = writeln!(s, "# mirror_tol = {:e}", crate::entanglement::MIRROR_TOL);
        let _ = writeln!(s, "# singularity_noise_floor = {:e}", crate::analysis::SINGULARITY_NOISE_FLOOR);
        let _ = writeln!(s, "# normalized_tol = {:e}", crate::fields::NORMALIZED_TOL);
        let _ = writeln!(s, "# version = {}", env!("CARGO_PKG_VERSION"));
        Ok(s)
    }

    /// First 16 hex digits of the SHA-256 of the resolved settings plus the
    /// subcommand name. Output location and thread count do not enter.
    pub fn content_hash(&self, command: &str) -> Result<String> {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update(b"\n");
        h.update(self.resolved_lines()?.as_bytes());
        Ok(hex::encode(h.finalize())[..16].to_string())
    }

    /// Manifest text: the resolved settings and the output directory.
    pub fn manifest(&self, command: &str) -> Result<String> {
        Ok(format!("# command = {command}\n{}# out = {}\n", self.resolved_lines()?, self.out.display()))
    }
}
