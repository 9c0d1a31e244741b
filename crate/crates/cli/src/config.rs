use std::path::PathBuf;

use anyhow::{bail, ensure, Result};

use crate::output::{Format, Sink};
use crate::{Common, Lengths};

/// Resolved settings shared by every command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    pub out: Option<PathBuf>,
    pub formats: Vec<Format>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

impl RunConfig {
    pub fn new(command: &'static str, common: &Common, seed: Option<u64>, tol: Option<f64>) -> Result<Self> {
        if let Some(t) = tol {
            ensure!(t >= 0.0 && t.is_finite(), "--tol must be a nonnegative number, got {t}");
        }
        let mut formats = common.format.clone();
        formats.dedup();
        ensure!(!formats.is_empty(), "--format needs at least one of csv, json, svg");
        Ok(Self {
            command,
            out: common.out.clone(),
            formats,
            seed,
            tol,
        })
    }

    pub fn sink(&self) -> Result<Sink> {
        Sink::new(self.out.clone(), self.formats.clone())
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(0.0)
    }
}

impl Lengths {
    /// Explicit `--L` values, else the inclusive `--L-min/--L-max/--L-steps`
    /// grid, else `default`.
    pub fn resolve(&self, default: Option<&[f64]>) -> Result<Vec<f64>> {
        let ranged = self.l_min.is_some() || self.l_max.is_some() || self.l_steps.is_some();
        let ls = if !self.l.is_empty() {
            ensure!(!ranged, "--L cannot be combined with --L-min/--L-max/--L-steps");
            self.l.clone()
        } else if ranged {
            let (Some(lo), Some(hi)) = (self.l_min, self.l_max) else {
                bail!("a length range needs both --L-min and --L-max");
            };
            ensure!(lo <= hi, "empty length range [{lo}, {hi}]");
            let n = self.l_steps.unwrap_or(10);
            ensure!(n >= 1, "--L-steps must be at least 1");
            if n == 1 {
                vec![lo]
            } else {
                (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
            }
        } else if let Some(d) = default {
            d.to_vec()
        } else {
            bail!("give --L or a --L-min/--L-max range");
        };
        for &l in &ls {
            ensure!(l.is_finite() && l >= 0.0, "length {l} must be a nonnegative number");
        }
        Ok(ls)
    }

    pub fn is_empty(&self) -> bool {
        self.l.is_empty() && self.l_min.is_none() && self.l_max.is_none() && self.l_steps.is_none()
    }
}
