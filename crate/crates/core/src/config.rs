//! Flat `key = value` run configuration with command-line overrides.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pri::RefinerBackend;
use crate::sim::{sweep_angles, SimParams};

/// Which spherical angle a sweep varies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    /// θ fixed, φ swept.
    Phi,
    /// φ fixed, θ swept.
    Theta,
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub fixed_deg: f64,
    pub start_deg: f64,
    pub stop_deg: f64,
    pub step_deg: f64,
}

impl SweepSpec {
    /// `(theta, phi)` pairs in sweep order.
    pub fn angles(&self) -> Result<Vec<(f64, f64)>> {
        let swept = sweep_angles(self.start_deg, self.stop_deg, self.step_deg)?;
        Ok(swept
            .into_iter()
            .map(|a| match self.axis {
                SweepAxis::Phi => (self.fixed_deg, a),
                SweepAxis::Theta => (a, self.fixed_deg),
            })
            .collect())
    }
}

#[derive(Clone, Debug)]
pub struct Config {
    pub sim: SimParams,
    pub sweep: SweepSpec,
    pub fusion_views: Vec<(f64, f64)>,
    pub seed: u64,
    pub target_extent: f64,
    pub sample_count: usize,
    pub dataset_views: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            sim: SimParams::default(),
            sweep: SweepSpec {
                axis: SweepAxis::Phi,
                fixed_deg: 60.0,
                start_deg: 0.0,
                stop_deg: 360.0,
                step_deg: 1.0,
            },
            fusion_views: [60.0, 120.0]
                .iter()
                .flat_map(|&t| [45.0, 135.0, 225.0, 315.0].map(|p| (t, p)))
                .collect(),
            seed: 1,
            target_extent: 20.0,
            sample_count: 50_000,
            dataset_views: 100,
        }
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse '{value}'")))
}

/// Parses `theta:phi` pairs separated by commas.
pub fn parse_views(value: &str) -> Result<Vec<(f64, f64)>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (t, p) = pair
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("view '{pair}' is not theta:phi")))?;
            Ok((num("view", t.trim())?, num("view", p.trim())?))
        })
        .collect()
}

impl Config {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "frequency" => self.sim.frequency = num(key, v)?,
            "polarization" => self.sim.polarization = v.parse()?,
            "sweep_axis" => {
                self.sweep.axis = match v {
                    "phi" => SweepAxis::Phi,
                    "theta" => SweepAxis::Theta,
                    _ => return Err(Error::Config(format!("sweep_axis must be phi or theta, got '{v}'"))),
                }
            }
            "sweep_fixed_deg" => self.sweep.fixed_deg = num(key, v)?,
            "sweep_start_deg" => self.sweep.start_deg = num(key, v)?,
            "sweep_stop_deg" => self.sweep.stop_deg = num(key, v)?,
            "sweep_step_deg" => self.sweep.step_deg = num(key, v)?,
            "pitch_factor" => self.sim.pitch_factor = num(key, v)?,
            "k" => self.sim.k = num(key, v)?,
            "rel_radius" => self.sim.rel_radius = num(key, v)?,
            "max_bounce" => self.sim.max_bounce = num(key, v)?,
            "fusion_views" => self.fusion_views = parse_views(v)?,
            "fusion_resolution" => self.sim.fusion_resolution = num(key, v)?,
            "backend" => self.sim.backend = RefinerBackend::parse(v)?,
            "epsilon_factor" => self.sim.epsilon_factor = num(key, v)?,
            "blend_r_factor" => self.sim.blend_r_factor = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "target_extent" => self.target_extent = num(key, v)?,
            "sample_count" => self.sample_count = num(key, v)?,
            "dataset_views" => self.dataset_views = num(key, v)?,
            other => return Err(Error::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{kv}' is not key=value")))?;
        self.set(k, v)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut c = Config::default();
        c.apply_text(&std::fs::read_to_string(path)?)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sim;
        let positive = [
            ("frequency", s.frequency),
            ("pitch_factor", s.pitch_factor),
            ("rel_radius", s.rel_radius),
            ("epsilon_factor", s.epsilon_factor),
            ("blend_r_factor", s.blend_r_factor),
            ("target_extent", self.target_extent),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{k} must be positive, got {v}")));
            }
        }
        if s.k == 0 || s.max_bounce == 0 || s.fusion_resolution == 0 || self.sample_count == 0 {
            return Err(Error::Config("k, max_bounce, fusion_resolution and sample_count must be at least 1".into()));
        }
        if self.fusion_views.is_empty() {
            return Err(Error::Config("fusion_views is empty".into()));
        }
        self.sweep.angles()?;
        Ok(())
    }

    /// Every key with its current value, in a form [`apply_text`](Self::apply_text)
    /// reads back.
    pub fn dump(&self) -> String {
        let s = &self.sim;
        let views: Vec<String> = self.fusion_views.iter().map(|(t, p)| format!("{t}:{p}")).collect();
        let axis = match self.sweep.axis {
            SweepAxis::Phi => "phi",
            SweepAxis::Theta => "theta",
        };
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("frequency", format!("{:e}", s.frequency));
        line("polarization", s.polarization.to_string());
        line("sweep_axis", axis.into());
        line("sweep_fixed_deg", self.sweep.fixed_deg.to_string());
        line("sweep_start_deg", self.sweep.start_deg.to_string());
        line("sweep_stop_deg", self.sweep.stop_deg.to_string());
        line("sweep_step_deg", self.sweep.step_deg.to_string());
        line("pitch_factor", s.pitch_factor.to_string());
        line("k", s.k.to_string());
        line("rel_radius", s.rel_radius.to_string());
        line("max_bounce", s.max_bounce.to_string());
        line("fusion_views", views.join(","));
        line("fusion_resolution", s.fusion_resolution.to_string());
        line("backend", s.backend.to_string());
        line("epsilon_factor", s.epsilon_factor.to_string());
        line("blend_r_factor", s.blend_r_factor.to_string());
        line("seed", self.seed.to_string());
        line("target_extent", self.target_extent.to_string());
        line("sample_count", self.sample_count.to_string());
        line("dataset_views", self.dataset_views.to_string());
        out
    }
}
