//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are comma
//! separated. Unknown or repeated keys are rejected.

use std::fmt::Write as _;
use std::path::Path as FsPath;
use std::str::FromStr;

use thiserror::Error;

use crate::bench::{Plate, RecombinationJitter};
use crate::cebit::BellOutcome;
use crate::field::{GridSpec, DEFAULT_WAVELENGTH};
use crate::measure::{AngleOptions, NoiseModel};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },
    #[error("precondition violated for `{key}`: {msg}")]
    Precondition { key: String, msg: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Run(#[from] crate::error::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } => 2,
            HarnessError::Precondition { .. } => 3,
            HarnessError::Io(_) | HarnessError::Run(_) => 1,
        }
    }

    fn config(key: &str, msg: impl Into<String>) -> Self {
        HarnessError::Config {
            key: key.to_string(),
            msg: msg.into(),
        }
    }

    fn pre(key: &str, msg: impl Into<String>) -> Self {
        HarnessError::Precondition {
            key: key.to_string(),
            msg: msg.into(),
        }
    }
}

pub type HarnessResult<T> = std::result::Result<T, HarnessError>;

/// Every recognized key, in canonical order.
pub const KEYS: [&str; 31] = [
    "grid.n",
    "grid.window_w0",
    "grid.w0",
    "wavelength",
    "payload.t_alpha",
    "payload.t_beta",
    "payload.phase_alpha",
    "payload.phase_beta",
    "payload.tilt_alpha_deg",
    "payload.tilt_beta_deg",
    "filter.thickness",
    "filter.index",
    "outcome",
    "noise.sigma",
    "noise.shot_photons",
    "noise.jitter_deg",
    "noise.jitter_lateral_w0",
    "frames",
    "seed",
    "angle.threshold",
    "angle.smoothing",
    "suite.n",
    "fig2.angles",
    "fig2.dense_start",
    "fig2.dense_stop",
    "fig2.dense_step",
    "fig3.ratios",
    "fig3.tilts",
    "fig3.jitter_deg",
    "fig3.sigma",
    "threads",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub grid_n: usize,
    pub window_w0: f64,
    pub waist: f64,
    pub wavelength: f64,
    pub t_alpha: f64,
    pub t_beta: f64,
    pub phase_alpha: f64,
    pub phase_beta: f64,
    pub tilt_alpha_deg: Option<f64>,
    pub tilt_beta_deg: Option<f64>,
    pub plate_thickness: f64,
    pub plate_index: f64,
    pub outcome: Option<BellOutcome>,
    pub noise_sigma: f64,
    pub shot_photons: Option<f64>,
    pub jitter_deg: f64,
    pub jitter_lateral_w0: f64,
    pub frames: usize,
    pub seed: u64,
    pub angle_threshold: f64,
    pub angle_smoothing: bool,
    pub suite_n: usize,
    pub fig2_angles: Vec<f64>,
    pub fig2_dense: (f64, f64, f64),
    pub fig3_ratios: Vec<f64>,
    pub fig3_tilts: Vec<f64>,
    /// Overrides `noise.jitter_deg` for the ratio sweep when set.
    pub fig3_jitter_deg: Option<f64>,
    /// Overrides `noise.sigma` for the ratio sweep when set.
    pub fig3_sigma: Option<f64>,
    /// Worker threads; 0 lets the runtime decide.
    pub threads: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            grid_n: 512,
            window_w0: 8.0,
            waist: 1e-3,
            wavelength: DEFAULT_WAVELENGTH,
            t_alpha: 1.0,
            t_beta: 1.0,
            phase_alpha: 0.0,
            phase_beta: 0.0,
            tilt_alpha_deg: None,
            tilt_beta_deg: None,
            plate_thickness: crate::bench::DEFAULT_PLATE_THICKNESS,
            plate_index: crate::bench::DEFAULT_PLATE_INDEX,
            outcome: None,
            noise_sigma: 0.02,
            shot_photons: None,
            jitter_deg: 0.0,
            jitter_lateral_w0: 0.0,
            frames: crate::measure::DEFAULT_FRAMES,
            seed: 1,
            angle_threshold: crate::measure::DEFAULT_THRESHOLD,
            angle_smoothing: true,
            suite_n: 100,
            fig2_angles: vec![47.0, 55.0, 62.0, 76.0],
            fig2_dense: (20.0, 80.0, 5.0),
            fig3_ratios: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            fig3_tilts: vec![2.5, 5.0, 10.0],
            fig3_jitter_deg: None,
            fig3_sigma: None,
            threads: 0,
        }
    }
}

fn num<V: FromStr>(key: &str, v: &str) -> HarnessResult<V> {
    v.trim()
        .parse()
        .map_err(|_| HarnessError::config(key, format!("cannot parse {v:?}")))
}

fn opt_num<V: FromStr>(key: &str, v: &str) -> HarnessResult<Option<V>> {
    match v.trim() {
        "" | "none" => Ok(None),
        s => num(key, s).map(Some),
    }
}

fn list(key: &str, v: &str) -> HarnessResult<Vec<f64>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

fn fmt_opt<V: ToString>(v: &Option<V>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

impl Config {
    pub fn parse_str(text: &str) -> HarnessResult<Self> {
        let mut cfg = Config::default();
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(HarnessError::config(
                    &format!("line {}", lineno + 1),
                    format!("expected key = value, got {line:?}"),
                ));
            };
            let k = k.trim();
            if !seen.insert(k.to_string()) {
                return Err(HarnessError::config(k, "key given twice"));
            }
            cfg.set(k, v.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<FsPath>) -> HarnessResult<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::config("--config", format!("{}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    pub fn set(&mut self, key: &str, v: &str) -> HarnessResult<()> {
        match key {
            "grid.n" => self.grid_n = num(key, v)?,
            "grid.window_w0" => self.window_w0 = num(key, v)?,
            "grid.w0" => self.waist = num(key, v)?,
            "wavelength" => self.wavelength = num(key, v)?,
            "payload.t_alpha" => self.t_alpha = num(key, v)?,
            "payload.t_beta" => self.t_beta = num(key, v)?,
            "payload.phase_alpha" => self.phase_alpha = num(key, v)?,
            "payload.phase_beta" => self.phase_beta = num(key, v)?,
            "payload.tilt_alpha_deg" => self.tilt_alpha_deg = opt_num(key, v)?,
            "payload.tilt_beta_deg" => self.tilt_beta_deg = opt_num(key, v)?,
            "filter.thickness" => self.plate_thickness = num(key, v)?,
            "filter.index" => self.plate_index = num(key, v)?,
            "outcome" => {
                self.outcome = match v.trim() {
                    "" | "all" => None,
                    s => Some(s.parse().map_err(|_| HarnessError::config(key, format!("bad outcome {s:?}")))?),
                }
            }
            "noise.sigma" => self.noise_sigma = num(key, v)?,
            "noise.shot_photons" => self.shot_photons = opt_num(key, v)?,
            "noise.jitter_deg" => self.jitter_deg = num(key, v)?,
            "noise.jitter_lateral_w0" => self.jitter_lateral_w0 = num(key, v)?,
            "frames" => self.frames = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "angle.threshold" => self.angle_threshold = num(key, v)?,
            "angle.smoothing" => self.angle_smoothing = num(key, v)?,
            "suite.n" => self.suite_n = num(key, v)?,
            "fig2.angles" => self.fig2_angles = list(key, v)?,
            "fig2.dense_start" => self.fig2_dense.0 = num(key, v)?,
            "fig2.dense_stop" => self.fig2_dense.1 = num(key, v)?,
            "fig2.dense_step" => self.fig2_dense.2 = num(key, v)?,
            "fig3.ratios" => self.fig3_ratios = list(key, v)?,
            "fig3.tilts" => self.fig3_tilts = list(key, v)?,
            "fig3.jitter_deg" => self.fig3_jitter_deg = opt_num(key, v)?,
            "fig3.sigma" => self.fig3_sigma = opt_num(key, v)?,
            "threads" => self.threads = num(key, v)?,
            _ => return Err(HarnessError::config(key, "unknown key")),
        }
        Ok(())
    }

    fn value_of(&self, key: &str) -> String {
        match key {
            "grid.n" => self.grid_n.to_string(),
            "grid.window_w0" => self.window_w0.to_string(),
            "grid.w0" => self.waist.to_string(),
            "wavelength" => self.wavelength.to_string(),
            "payload.t_alpha" => self.t_alpha.to_string(),
            "payload.t_beta" => self.t_beta.to_string(),
            "payload.phase_alpha" => self.phase_alpha.to_string(),
            "payload.phase_beta" => self.phase_beta.to_string(),
            "payload.tilt_alpha_deg" => fmt_opt(&self.tilt_alpha_deg),
            "payload.tilt_beta_deg" => fmt_opt(&self.tilt_beta_deg),
            "filter.thickness" => self.plate_thickness.to_string(),
            "filter.index" => self.plate_index.to_string(),
            "outcome" => fmt_opt(&self.outcome),
            "noise.sigma" => self.noise_sigma.to_string(),
            "noise.shot_photons" => fmt_opt(&self.shot_photons),
            "noise.jitter_deg" => self.jitter_deg.to_string(),
            "noise.jitter_lateral_w0" => self.jitter_lateral_w0.to_string(),
            "frames" => self.frames.to_string(),
            "seed" => self.seed.to_string(),
            "angle.threshold" => self.angle_threshold.to_string(),
            "angle.smoothing" => self.angle_smoothing.to_string(),
            "suite.n" => self.suite_n.to_string(),
            "fig2.angles" => fmt_list(&self.fig2_angles),
            "fig2.dense_start" => self.fig2_dense.0.to_string(),
            "fig2.dense_stop" => self.fig2_dense.1.to_string(),
            "fig2.dense_step" => self.fig2_dense.2.to_string(),
            "fig3.ratios" => fmt_list(&self.fig3_ratios),
            "fig3.tilts" => fmt_list(&self.fig3_tilts),
            "fig3.jitter_deg" => fmt_opt(&self.fig3_jitter_deg),
            "fig3.sigma" => fmt_opt(&self.fig3_sigma),
            // Thread count never changes results, so it stays out of the hash.
            "threads" => String::new(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    /// Effective configuration, one `key = value` per line in [`KEYS`] order.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for k in KEYS {
            if k != "threads" {
                let _ = writeln!(out, "{k} = {}", self.value_of(k));
            }
        }
        out
    }

    pub fn validate(&self) -> HarnessResult<()> {
        self.grid().map(|_| ())?;
        let finite_pos = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(HarnessError::pre(key, format!("must be finite and > 0, got {v}")))
            }
        };
        finite_pos("wavelength", self.wavelength)?;
        finite_pos("filter.thickness", self.plate_thickness)?;
        if !(self.plate_index > 1.0) {
            return Err(HarnessError::pre("filter.index", "must exceed 1"));
        }
        for (k, t) in [("payload.t_alpha", self.t_alpha), ("payload.t_beta", self.t_beta)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(HarnessError::pre(k, format!("transmittance must lie in [0, 1], got {t}")));
            }
        }
        if self.t_alpha == 0.0 && self.t_beta == 0.0 {
            return Err(HarnessError::pre("payload.t_alpha", "both transmittances are zero"));
        }
        let tilts = [
            ("payload.tilt_alpha_deg", self.tilt_alpha_deg),
            ("payload.tilt_beta_deg", self.tilt_beta_deg),
        ];
        for (k, t) in tilts {
            if let Some(t) = t {
                if !(t.abs() < 45.0) {
                    return Err(HarnessError::pre(k, format!("|tilt| must be < 45 deg, got {t}")));
                }
            }
        }
        let non_neg = |key: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(HarnessError::pre(key, format!("must be finite and >= 0, got {v}")))
            }
        };
        non_neg("noise.sigma", self.noise_sigma)?;
        non_neg("noise.jitter_deg", self.jitter_deg)?;
        non_neg("noise.jitter_lateral_w0", self.jitter_lateral_w0)?;
        if let Some(p) = self.shot_photons {
            finite_pos("noise.shot_photons", p)?;
        }
        if let Some(j) = self.fig3_jitter_deg {
            non_neg("fig3.jitter_deg", j)?;
        }
        if let Some(s) = self.fig3_sigma {
            non_neg("fig3.sigma", s)?;
        }
        if self.frames == 0 {
            return Err(HarnessError::pre("frames", "must be >= 1"));
        }
        if self.suite_n == 0 {
            return Err(HarnessError::pre("suite.n", "must be >= 1"));
        }
        if !(self.angle_threshold > 0.0 && self.angle_threshold < 1.0) {
            return Err(HarnessError::pre("angle.threshold", "must lie in (0, 1)"));
        }
        for &a in &self.fig2_angles {
            if !(a > 0.0 && a < 90.0) {
                return Err(HarnessError::pre("fig2.angles", format!("angle {a} outside (0, 90)")));
            }
        }
        let (start, stop, step) = self.fig2_dense;
        if !(start > 0.0 && stop < 90.0 && start <= stop) {
            return Err(HarnessError::pre("fig2.dense_start", "dense sweep must lie in (0, 90)"));
        }
        if !(step > 0.0) {
            return Err(HarnessError::pre("fig2.dense_step", "must be > 0"));
        }
        for &r in &self.fig3_ratios {
            if !(r > 0.0 && r.is_finite()) {
                return Err(HarnessError::pre("fig3.ratios", format!("ratio {r} must be finite and > 0")));
            }
        }
        for &t in &self.fig3_tilts {
            if !(t.abs() < 45.0) {
                return Err(HarnessError::pre("fig3.tilts", format!("|tilt| must be < 45 deg, got {t}")));
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> HarnessResult<GridSpec<f64>> {
        if !(self.waist > 0.0 && self.waist.is_finite()) {
            return Err(HarnessError::pre("grid.w0", "must be finite and > 0"));
        }
        GridSpec::with_window(self.grid_n, self.window_w0, self.waist).map_err(|e| {
            let key = if self.grid_n < 64 || !self.grid_n.is_power_of_two() {
                "grid.n"
            } else {
                "grid.window_w0"
            };
            HarnessError::pre(key, e.to_string())
        })
    }

    pub fn plate(&self) -> Plate<f64> {
        Plate {
            thickness: self.plate_thickness,
            index: self.plate_index,
        }
    }

    pub fn noise(&self) -> NoiseModel {
        NoiseModel {
            gaussian_sigma: self.noise_sigma,
            shot_photons: self.shot_photons,
            seed: self.seed,
        }
    }

    pub fn jitter(&self) -> RecombinationJitter {
        RecombinationJitter {
            rotation_rms: self.jitter_deg.to_radians(),
            shift_rms_w0: self.jitter_lateral_w0,
        }
    }

    pub fn angle_options(&self) -> AngleOptions {
        AngleOptions {
            threshold: self.angle_threshold,
            smoothing: self.angle_smoothing,
        }
    }

    /// Anchor angles followed by the dense sweep, without duplicates, sorted.
    pub fn fig2_targets(&self) -> Vec<(f64, bool)> {
        let mut out: Vec<(f64, bool)> = self.fig2_angles.iter().map(|&a| (a, true)).collect();
        let (start, stop, step) = self.fig2_dense;
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        for k in 0..=count {
            let a = start + k as f64 * step;
            if !out.iter().any(|(b, _)| (a - b).abs() < 1e-9) {
                out.push((a, false));
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_canonical_round_trip() {
        let cfg = Config::parse_str("# demo\ngrid.n = 256\nfig3.ratios = 1, 2\noutcome = 11\n\nseed=9\n").unwrap();
        assert_eq!(cfg.grid_n, 256);
        assert_eq!(cfg.fig3_ratios, vec![1.0, 2.0]);
        assert_eq!(cfg.outcome, Some(BellOutcome::new(1, 1).unwrap()));
        assert_eq!(cfg.seed, 9);
        let again = Config::parse_str(&cfg.canonical()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn errors_name_the_key() {
        let e = Config::parse_str("grid.n = big").unwrap_err();
        assert!(matches!(&e, HarnessError::Config { key, .. } if key == "grid.n"));
        assert_eq!(e.exit_code(), 2);
        let e = Config::parse_str("colour = red").unwrap_err();
        assert!(matches!(&e, HarnessError::Config { key, .. } if key == "colour"));
        assert!(Config::parse_str("seed = 1\nseed = 2").is_err());
        assert!(Config::parse_str("just words").is_err());

        let mut cfg = Config::default();
        cfg.grid_n = 100;
        let e = cfg.validate().unwrap_err();
        assert!(matches!(&e, HarnessError::Precondition { key, .. } if key == "grid.n"));
        assert_eq!(e.exit_code(), 3);
        let mut cfg = Config::default();
        cfg.frames = 0;
        assert!(matches!(cfg.validate(), Err(HarnessError::Precondition { key, .. }) if key == "frames"));
    }

    #[test]
    fn fig2_targets_dedupe() {
        let t = Config::default().fig2_targets();
        assert_eq!(t.iter().filter(|(a, _)| *a == 55.0).count(), 1);
        assert!(t.iter().any(|&(a, anchor)| a == 55.0 && anchor));
        assert_eq!(t.iter().filter(|(_, anchor)| *anchor).count(), 4);
        assert_eq!(t.first().unwrap().0, 20.0);
        assert_eq!(t.last().unwrap().0, 80.0);
    }
}
