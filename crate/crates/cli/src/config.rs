use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::Deserialize;

use renormgeo::quadrature::QuadratureSpec;
use renormgeo::renorm::Ladder;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Catalog,
    Curvature,
    Integrate,
    Renorm,
    Expand,
    Verify,
    Suite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderOverrides {
    pub eps0: Option<f64>,
    pub ratio: Option<f64>,
    pub rungs: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOverrides {
    pub nodes: Option<usize>,
    pub profile_nodes: Option<usize>,
    pub transverse_nodes: Option<usize>,
    pub transverse_panels: Option<usize>,
    pub panels: Option<usize>,
    pub grading_ratio: Option<f64>,
    pub refine_check: Option<bool>,
    pub sequential: Option<bool>,
}

/// Everything one invocation needs. Built from flags, a JSON config file, or both
/// (flags win).
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub surface: Option<String>,
    pub quantity: Option<String>,
    pub boundary: Option<bool>,
    pub theorem: Option<String>,
    pub metric: Option<String>,
    pub eps: Option<f64>,
    pub point: Option<Vec<f64>>,
    pub basis: Option<Vec<String>>,
    pub only: Option<Vec<u32>>,
    #[serde(default)]
    pub ladder: LadderOverrides,
    #[serde(default)]
    pub quadrature: QuadratureOverrides,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
}

macro_rules! prefer {
    ($a:expr, $b:expr, $($f:ident).+) => {
        $a.$($f).+ = $a.$($f).+.take().or($b.$($f).+.take());
    };
}

impl RunConfig {
    pub fn from_file(path: &PathBuf) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Fills every unset field of `self` from `other`.
    pub fn fill_from(mut self, mut other: RunConfig) -> Self {
        prefer!(self, other, command);
        prefer!(self, other, surface);
        prefer!(self, other, quantity);
        prefer!(self, other, boundary);
        prefer!(self, other, theorem);
        prefer!(self, other, metric);
        prefer!(self, other, eps);
        prefer!(self, other, point);
        prefer!(self, other, basis);
        prefer!(self, other, only);
        prefer!(self, other, ladder.eps0);
        prefer!(self, other, ladder.ratio);
        prefer!(self, other, ladder.rungs);
        prefer!(self, other, quadrature.nodes);
        prefer!(self, other, quadrature.profile_nodes);
        prefer!(self, other, quadrature.transverse_nodes);
        prefer!(self, other, quadrature.transverse_panels);
        prefer!(self, other, quadrature.panels);
        prefer!(self, other, quadrature.grading_ratio);
        prefer!(self, other, quadrature.refine_check);
        prefer!(self, other, quadrature.sequential);
        prefer!(self, other, output);
        prefer!(self, other, format);
        prefer!(self, other, threads);
        self
    }

    pub fn ladder(&self) -> Result<Ladder> {
        let d = Ladder::default();
        let l = Ladder {
            eps0: self.ladder.eps0.unwrap_or(d.eps0),
            ratio: self.ladder.ratio.unwrap_or(d.ratio),
            rungs: self.ladder.rungs.unwrap_or(d.rungs),
        };
        if !(l.eps0 > 0.0 && l.ratio > 1.0 && l.rungs >= 2) {
            bail!("ladder needs eps0 > 0, ratio > 1 and at least 2 rungs");
        }
        Ok(l)
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec> {
        let mut s = QuadratureSpec::default();
        let q = &self.quadrature;
        s.nodes = q.nodes.unwrap_or(s.nodes);
        s.profile_nodes = q.profile_nodes.unwrap_or(s.profile_nodes);
        s.transverse_nodes = q.transverse_nodes.unwrap_or(s.transverse_nodes);
        s.transverse_panels = q.transverse_panels.unwrap_or(s.transverse_panels);
        s.panels = q.panels.unwrap_or(s.panels);
        s.grading_ratio = q.grading_ratio.unwrap_or(s.grading_ratio);
        s.refine_check = q.refine_check.unwrap_or(s.refine_check);
        if q.sequential.unwrap_or(false) {
            s.execution = renormgeo::par::Execution::Sequential;
        }
        if [s.nodes, s.profile_nodes, s.transverse_nodes, s.transverse_panels, s.panels].contains(&0) {
            bail!("quadrature node and panel counts must be positive");
        }
        if s.grading_ratio.is_nan() || s.grading_ratio <= 1.0 {
            bail!("grading ratio must exceed 1");
        }
        Ok(s)
    }

    pub fn require_surface(&self) -> Result<&str> {
        self.surface.as_deref().context("--surface is required")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"command": "verify", "theorm": "thm2"}"#).unwrap_err();
        assert!(err.to_string().contains("theorm"));
        let err = serde_json::from_str::<RunConfig>(r#"{"ladder": {"eps": 0.1}}"#).unwrap_err();
        assert!(err.to_string().contains("eps"));
    }

    #[test]
    fn flags_win_over_file() {
        let flags = RunConfig {
            theorem: Some("cor1".into()),
            ..Default::default()
        };
        let file: RunConfig =
            serde_json::from_str(r#"{"command": "verify", "theorem": "thm2", "ladder": {"rungs": 9}}"#).unwrap();
        let merged = flags.fill_from(file);
        assert_eq!(merged.command, Some(Command::Verify));
        assert_eq!(merged.theorem.as_deref(), Some("cor1"));
        assert_eq!(merged.ladder().unwrap().rungs, 9);
    }

    #[test]
    fn bad_overrides() {
        let cfg = RunConfig {
            ladder: LadderOverrides {
                ratio: Some(1.0),
                ..Default::default()
            },
            ..Default::default()
        };
        assert!(cfg.ladder().is_err());
    }
}
