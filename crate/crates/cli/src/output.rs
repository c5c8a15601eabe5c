//! Result files.  One directory per run:
//!
//! * `results.json` — task summary with the fully resolved scenario echo;
//! * `points.csv` — best configurations, one row per site;
//! * `density.csv` — gridded density dump (tasks that produce one);
//! * `plotdata/*.csv` — two-column series;
//! * `log.txt` — wall-clock timings, kept out of results.json so repeated
//!   seeded runs stay byte-identical.
//!
//! All floats are written with Rust's shortest round-trip formatting, so the
//! files are reproducible bit for bit.

use serde::Serialize;
use siglo_core::measure::GriddedDensity;

use crate::config::{AtomSpec, MeasureSpec};
use crate::CliError;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// An approximate scalar together with its absolute error bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Approx {
    pub value: f64,
    pub tolerance: f64,
}

impl Approx {
    pub fn new(value: f64, tolerance: f64) -> Self {
        Self { value, tolerance }
    }
}

/// Density summary used in the scenario echo instead of the raw value
/// array, which can run to millions of entries.
#[derive(Debug, Clone, Serialize)]
pub struct DensityEcho {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub resolution: Vec<usize>,
    /// Constant cell value when the density was given as `uniform`.
    pub uniform: Option<f64>,
    pub mass: f64,
    pub cell_count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentEcho {
    pub atom_count: usize,
    /// Atoms listed verbatim up to [`ATOM_ECHO_CAP`]; beyond that only the
    /// count and total mass are kept.
    pub atoms: Vec<AtomSpec>,
    pub densities: Vec<DensityEcho>,
    pub total_mass: f64,
}

/// Largest atom list echoed into results.json verbatim.
pub const ATOM_ECHO_CAP: usize = 32;

fn capped_atoms(atoms: Vec<AtomSpec>) -> Vec<AtomSpec> {
    if atoms.len() > ATOM_ECHO_CAP {
        Vec::new()
    } else {
        atoms
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasureEcho {
    pub plus: ComponentEcho,
    pub minus: ComponentEcho,
}

pub fn echo_measure(spec: &MeasureSpec, phi: &siglo_core::SignedMeasure) -> MeasureEcho {
    let comp = |c: &crate::config::ComponentSpec, built: &siglo_core::MeasureComponent| {
        ComponentEcho {
            atom_count: c.atoms.len(),
            atoms: capped_atoms(c.atoms.clone()),
            densities: c
                .densities
                .iter()
                .zip(&built.densities)
                .map(|(d, g)| DensityEcho {
                    lo: d.lo.clone(),
                    hi: d.hi.clone(),
                    resolution: d.resolution.clone(),
                    uniform: d.uniform,
                    mass: g.mass(),
                    cell_count: g.cell_count(),
                })
                .collect(),
            total_mass: built.total_mass(),
        }
    };
    MeasureEcho { plus: comp(&spec.plus, &phi.plus), minus: comp(&spec.minus, &phi.minus) }
}

/// Echo for measures built in code (the examples): no config spec to copy,
/// so atoms are listed verbatim and densities summarized.
pub fn echo_built_measure(phi: &siglo_core::SignedMeasure) -> MeasureEcho {
    let comp = |built: &siglo_core::MeasureComponent| ComponentEcho {
        atom_count: built.atoms.len(),
        atoms: capped_atoms(
            built
                .atoms
                .iter()
                .map(|a| AtomSpec { location: a.location.clone(), weight: a.weight })
                .collect(),
        ),
        densities: built
            .densities
            .iter()
            .map(|g| DensityEcho {
                lo: g.bounds.lo.clone(),
                hi: g.bounds.hi.clone(),
                resolution: g.resolution.clone(),
                uniform: None,
                mass: g.mass(),
                cell_count: g.cell_count(),
            })
            .collect(),
        total_mass: built.total_mass(),
    };
    MeasureEcho { plus: comp(&phi.plus), minus: comp(&phi.minus) }
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub siglo: &'static str,
    pub siglo_core: &'static str,
}

impl Versions {
    pub fn current() -> Self {
        Self { siglo: env!("CARGO_PKG_VERSION"), siglo_core: siglo_core::VERSION }
    }
}

/// Single writer for a run's output directory.
pub struct RunDir {
    dir: PathBuf,
    started: Instant,
    log: String,
    last_mark: Instant,
}

impl RunDir {
    pub fn create(dir: PathBuf) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir.join("plotdata"))
            .map_err(|e| CliError::Failure(format!("cannot create {}: {e}", dir.display())))?;
        let now = Instant::now();
        Ok(Self { dir, started: now, log: String::new(), last_mark: now })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    /// Appends a timing line for the stage that just finished.
    pub fn mark(&mut self, stage: &str) {
        let now = Instant::now();
        let _ = writeln!(
            self.log,
            "{stage}: {:.3}s (total {:.3}s)",
            now.duration_since(self.last_mark).as_secs_f64(),
            now.duration_since(self.started).as_secs_f64()
        );
        self.last_mark = now;
    }

    fn write(&self, rel: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(rel);
        std::fs::write(&path, contents)
            .map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display())))
    }

    pub fn write_results(&self, results: &impl Serialize) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(results)
            .map_err(|e| CliError::Failure(format!("serializing results: {e}")))?;
        text.push('\n');
        self.write("results.json", &text)
    }

    /// `points.csv`: one row per site of a best configuration.  `restart` is
    /// the index of the restart that produced it.
    pub fn write_points(&self, dim: usize, rows: &[(usize, usize, &[f64])]) -> Result<(), CliError> {
        let mut out = String::from("k,restart");
        for a in 0..dim {
            let _ = write!(out, ",x{a}");
        }
        out.push('\n');
        for (k, restart, p) in rows {
            let _ = write!(out, "{k},{restart}");
            for c in *p {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        self.write("points.csv", &out)
    }

    pub fn write_density(&self, field: Option<&GriddedDensity>, dim: usize) -> Result<(), CliError> {
        let mut out = String::new();
        for a in 0..dim {
            let _ = write!(out, "x{a},");
        }
        out.push_str("value\n");
        if let Some(g) = field {
            let mut mid = vec![0.0; g.dim()];
            for idx in 0..g.values.len() {
                g.cell_midpoint(idx, &mut mid);
                for c in &mid {
                    let _ = write!(out, "{c},");
                }
                let _ = writeln!(out, "{}", g.values[idx]);
            }
        }
        self.write("density.csv", &out)
    }

    /// Two-column series under `plotdata/`.
    pub fn write_series(
        &self,
        name: &str,
        header: (&str, &str),
        rows: &[(f64, f64)],
    ) -> Result<(), CliError> {
        let mut out = format!("{},{}\n", header.0, header.1);
        for (a, b) in rows {
            let _ = writeln!(out, "{a},{b}");
        }
        self.write(&format!("plotdata/{name}"), &out)
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.mark("write outputs");
        let log = std::mem::take(&mut self.log);
        self.write("log.txt", &log)
    }
}
