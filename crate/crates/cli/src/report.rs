//! Comparison of mean SINRs across the three mixing ratios and the baseline.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use corridor_bo::{Error, Result};

use crate::config::Mode;
use crate::runner::Summary;

/// Table rows, in order.
pub const CONFIGS: [&str; 4] = ["lambda=0", "lambda=0.5", "lambda=1", "baseline"];

/// Headline differences: label, minuend config, subtrahend config,
/// population, published reference value in dB.
pub const DELTAS: [(&str, usize, usize, Population, f64); 4] = [
    ("UAV gain over baseline", 1, 3, Population::Uav, 23.4),
    ("GUE gain over baseline", 1, 3, Population::Gue, 1.3),
    ("UAV gap to UAV bound", 1, 2, Population::Uav, -1.2),
    ("GUE gap to GUE bound", 1, 0, Population::Gue, -2.6),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Population {
    Gue,
    Uav,
}

#[derive(Debug, Clone)]
pub struct Report {
    /// Indexed like [`CONFIGS`].
    pub summaries: [Summary; 4],
    pub sources: [PathBuf; 4],
}

fn slot(s: &Summary) -> Option<usize> {
    match s.mode {
        Mode::Baseline => Some(3),
        Mode::Optimize if s.lambda == 0.0 => Some(0),
        Mode::Optimize if s.lambda == 0.5 => Some(1),
        Mode::Optimize if s.lambda == 1.0 => Some(2),
        _ => None,
    }
}

impl Report {
    /// Reads `summary.json` from each run directory. Exactly one run per
    /// configuration is required.
    pub fn collect(dirs: &[PathBuf]) -> Result<Self> {
        let mut found: [Option<(Summary, PathBuf)>; 4] = Default::default();
        for d in dirs {
            let path = d.join("summary.json");
            let s = Summary::load(&path)?;
            let i = slot(&s).ok_or_else(|| Error::Format {
                path: path.display().to_string(),
                reason: format!("{} run with lambda {} is not part of the comparison", s.mode.as_str(), s.lambda),
            })?;
            if found[i].is_some() {
                return Err(Error::Config(format!("more than one {} run given", CONFIGS[i])));
            }
            found[i] = Some((s, d.clone()));
        }
        let missing: Vec<&str> = (0..4).filter(|&i| found[i].is_none()).map(|i| CONFIGS[i]).collect();
        if !missing.is_empty() {
            return Err(Error::MissingArtifact(format!("summary for {}", missing.join(", "))));
        }
        let [a, b, c, d] = found.map(Option::unwrap);
        Ok(Self {
            summaries: [a.0, b.0, c.0, d.0],
            sources: [a.1, b.1, c.1, d.1],
        })
    }

    pub fn mean(&self, config: usize, pop: Population) -> f64 {
        let s = &self.summaries[config];
        match pop {
            Population::Gue => s.mean_sinr_gue_db,
            Population::Uav => s.mean_sinr_uav_db,
        }
    }

    pub fn deltas(&self) -> Vec<(&'static str, f64, f64)> {
        DELTAS
            .iter()
            .map(|&(label, a, b, pop, reference)| (label, self.mean(a, pop) - self.mean(b, pop), reference))
            .collect()
    }

    pub fn markdown(&self) -> String {
        let mut s = String::new();
        s.push_str("| config | GUE mean SINR (dB) | UAV mean SINR (dB) |\n|---|---:|---:|\n");
        for (i, name) in CONFIGS.iter().enumerate() {
            let _ = writeln!(
                s,
                "| {name} | {:.2} | {:.2} |",
                self.mean(i, Population::Gue),
                self.mean(i, Population::Uav)
            );
        }
        s.push_str("\n| delta | measured (dB) | reference (dB) |\n|---|---:|---:|\n");
        for (label, v, r) in self.deltas() {
            let _ = writeln!(s, "| {label} | {v:+.2} | {r:+.1} |");
        }
        s
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("kind,name,population,value_db,reference_db\n");
        for (i, name) in CONFIGS.iter().enumerate() {
            for (p, pn) in [(Population::Gue, "gue"), (Population::Uav, "uav")] {
                let _ = writeln!(s, "mean,{name},{pn},{:.6},", self.mean(i, p));
            }
        }
        for (&(label, _, _, pop, _), (_, v, r)) in DELTAS.iter().zip(self.deltas()) {
            let pn = if pop == Population::Gue { "gue" } else { "uav" };
            let _ = writeln!(s, "delta,{label},{pn},{v:.6},{r:.1}");
        }
        s
    }

    /// Writes `report.md` and `report.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.md"), self.markdown())?;
        std::fs::write(dir.join("report.csv"), self.csv())?;
        Ok(())
    }
}
