//! `necklace` — symbolic and geometric analysis of fractal necklaces.
//!
//! Every verb reads a spec or a planar realization (a JSON file or
//! `builtin:NAME`), runs one analysis, and prints a single JSON report to
//! standard output. Reports are deterministic: identical inputs and flags
//! produce byte-identical output. Exit codes: 0 for a completed analysis
//! (negative verdicts included), 1 for usage errors, 2 when a resource cap
//! stopped the computation, 3 for malformed input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use necklace_core::builtins::builtin_spec;
use necklace_core::class::{check_goodness, ClassOptions};
use necklace_core::cuts::{cut_report, survey_extremal, verify_theorem_suite};
use necklace_core::geometry::{
    address_point, attractor_cells, catalog, crowded4_ifs, detect_contacts, gasket_ifs,
    render_svg, spec_from_geometry, MarkRole, RenderMark,
};
use necklace_core::rigidity::{rigid_maps, verify_nifs_uniqueness};
use necklace_core::{Engine, EngineLimits, GeometricIFS, NecklaceSpec, Word};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "necklace",
    version,
    about = "Symbolic and geometric analyzer for fractal necklaces",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Check the pairwise-intersection dichotomy of a spec up to a depth
    Validate {
        /// Spec JSON path or builtin:NAME
        input: String,
        /// Cylinder depth for the pairwise check
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Decide whether every copy meets deeper copies in at most one
    /// boundary point
    Goodness {
        /// Spec JSON path or builtin:NAME
        input: String,
        /// Identification-closure depth
        #[arg(long, default_value_t = 12)]
        depth: usize,
    },
    /// Components of the space with the given points removed
    Components {
        /// Spec JSON path or builtin:NAME
        input: String,
        /// Addresses of the points to remove, e.g. "1(2)"
        #[arg(required = true)]
        points: Vec<String>,
        /// Highest refinement level before giving up on stabilization
        #[arg(long, default_value_t = 10)]
        max_level: usize,
        /// Consecutive stable levels required to accept a count
        #[arg(long, default_value_t = 2)]
        window: usize,
    },
    /// Survey candidate two-point cuts and report the extremal ones
    Survey {
        /// Spec JSON path or builtin:NAME
        input: String,
        /// Enumerate candidate pairs within copies up to this level
        #[arg(long, default_value_t = 2)]
        level_cap: usize,
        /// Worker threads for candidate evaluation
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Highest refinement level before giving up on stabilization
        #[arg(long, default_value_t = 10)]
        max_level: usize,
        /// Consecutive stable levels required to accept a count
        #[arg(long, default_value_t = 2)]
        window: usize,
    },
    /// Run the full claim suite (cut bounds, boundary law, complements)
    Theorems {
        /// Spec JSON path or builtin:NAME
        input: String,
        /// Enumerate candidate pairs within copies up to this level
        #[arg(long, default_value_t = 2)]
        level_cap: usize,
        /// Check copy complements up to this level
        #[arg(long, default_value_t = 3)]
        copy_level_max: usize,
        /// Worker threads for candidate evaluation
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Highest refinement level before giving up on stabilization
        #[arg(long, default_value_t = 10)]
        max_level: usize,
        /// Consecutive stable levels required to accept a count
        #[arg(long, default_value_t = 2)]
        window: usize,
    },
    /// Structure-preserving relabelings admitted from one spec to another
    Rigid {
        /// Source spec JSON path or builtin:NAME
        from: String,
        /// Target spec JSON path or builtin:NAME
        to: String,
        /// Verify the admitted maps on all copies up to this depth
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Relabeling-invariance suite over the whole dihedral group
    Uniqueness {
        /// Spec JSON path or builtin:NAME
        input: String,
        /// Survey level cap used for the invariance comparison
        #[arg(long, default_value_t = 1)]
        level_cap: usize,
        /// Worker threads for candidate evaluation
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Recover a symbolic spec from a planar realization
    Extract {
        /// Realization JSON path or builtin:NAME
        input: String,
        /// Refine contact chains to this depth
        #[arg(long, default_value_t = 24)]
        depth: usize,
        /// Tolerance relative to the root disk diameter
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Classify every pair of first-level copies as touching or disjoint
    Contacts {
        /// Realization JSON path or builtin:NAME
        input: String,
        /// Refine contact chains to this depth
        #[arg(long, default_value_t = 24)]
        depth: usize,
        /// Tolerance relative to the root disk diameter
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Draw the disk cover of a planar realization as SVG
    Render {
        /// Realization JSON path or builtin:NAME
        input: String,
        /// Write the SVG here
        #[arg(long)]
        out: PathBuf,
        /// Subdivision level to draw
        #[arg(long, default_value_t = 6)]
        level: usize,
        /// Refinement depth for locating the labeled nodes
        #[arg(long, default_value_t = 24)]
        depth: usize,
        /// Tolerance relative to the root disk diameter
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// List the bundled example specs and realizations
    Catalog {
        /// Also write each example's JSON files into this directory
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

/// A failed run, carrying the exit code mandated for its class.
enum Failure {
    Usage(String),
    Resource(String),
    Input(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Resource(_) => 2,
            Failure::Input(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Resource(m) | Failure::Input(m) => m,
        }
    }
}

impl From<necklace_core::Error> for Failure {
    fn from(e: necklace_core::Error) -> Self {
        if e.is_resource_cap() {
            Failure::Resource(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.verb) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("necklace: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

fn run(verb: Verb) -> Result<(), Failure> {
    let cells = max_cells_override()?;
    match verb {
        Verb::Validate { input, depth } => {
            let spec = load_spec(&input)?;
            print_report(&spec.validate(depth)?)
        }
        Verb::Goodness { input, depth } => {
            let spec = load_spec(&input)?;
            let opts = ClassOptions {
                depth,
                ..ClassOptions::default()
            };
            print_report(&check_goodness(&spec, &opts)?)
        }
        Verb::Components {
            input,
            points,
            max_level,
            window,
        } => {
            let engine = engine(load_spec(&input)?, max_level, window, cells);
            let mut classes = Vec::with_capacity(points.len());
            for p in &points {
                let addr = p
                    .parse()
                    .map_err(|e: necklace_core::Error| Failure::Input(format!("{p:?}: {e}")))?;
                classes.push(engine.class(&addr)?);
            }
            print_report(&cut_report(&engine, &classes)?)
        }
        Verb::Survey {
            input,
            level_cap,
            threads,
            max_level,
            window,
        } => {
            let engine = engine(load_spec(&input)?, max_level, window, cells);
            print_report(&survey_extremal(&engine, level_cap, threads.max(1))?)
        }
        Verb::Theorems {
            input,
            level_cap,
            copy_level_max,
            threads,
            max_level,
            window,
        } => {
            let engine = engine(load_spec(&input)?, max_level, window, cells);
            print_report(&verify_theorem_suite(
                &engine,
                level_cap,
                copy_level_max,
                threads.max(1),
            )?)
        }
        Verb::Rigid { from, to, depth } => {
            let f = load_spec(&from)?;
            let g = load_spec(&to)?;
            print_report(&rigid_maps(&f, &g, depth)?)
        }
        Verb::Uniqueness {
            input,
            level_cap,
            threads,
        } => {
            let spec = load_spec(&input)?;
            print_report(&verify_nifs_uniqueness(&spec, level_cap, threads.max(1))?)
        }
        Verb::Extract { input, depth, tol } => {
            let ifs = load_ifs(&input)?;
            print_report(&spec_from_geometry(&ifs, depth, tol)?)
        }
        Verb::Contacts { input, depth, tol } => {
            let ifs = load_ifs(&input)?;
            print_report(&detect_contacts(&ifs, depth, tol))
        }
        Verb::Render {
            input,
            out,
            level,
            depth,
            tol,
        } => {
            let ifs = load_ifs(&input)?;
            let max_cells = cells.unwrap_or(EngineLimits::default().max_cells);
            let marks = node_marks(&ifs, depth, tol);
            let svg = render_svg(&ifs, level, max_cells, &marks)?;
            std::fs::write(&out, &svg)
                .map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?;
            let tree = attractor_cells(&ifs, level, max_cells)?;
            print_report(&json!({
                "v": 1,
                "label": ifs.label(),
                "level": level,
                "cells": tree.cells_at(level).len(),
                "marks": marks.len(),
                "out": out.display().to_string(),
                "bytes": svg.len(),
            }))
        }
        Verb::Catalog { out_dir } => {
            let entries = catalog();
            if let Some(dir) = &out_dir {
                write_catalog_files(dir, &entries)?;
            }
            print_report(&entries)
        }
    }
}

fn print_report<T: serde::Serialize>(report: &T) -> Result<(), Failure> {
    use std::io::Write;
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| Failure::Input(format!("report serialization: {e}")))?;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|()| out.flush()) {
        Ok(()) => Ok(()),
        // The reader went away (e.g. piped into `head`); not our failure.
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(Failure::Usage(format!("stdout: {e}"))),
    }
}

/// `NECKLACE_MAX_CELLS` overrides the global cap on cylinders per level.
fn max_cells_override() -> Result<Option<u64>, Failure> {
    match std::env::var("NECKLACE_MAX_CELLS") {
        Ok(s) => s
            .trim()
            .parse::<u64>()
            .map(Some)
            .map_err(|_| Failure::Usage(format!("NECKLACE_MAX_CELLS must be an integer, got {s:?}"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Failure::Usage(format!("NECKLACE_MAX_CELLS: {e}"))),
    }
}

fn engine(spec: NecklaceSpec, max_level: usize, window: usize, cells: Option<u64>) -> Engine {
    let mut limits = EngineLimits {
        max_level,
        window,
        ..EngineLimits::default()
    };
    if let Some(c) = cells {
        limits.max_cells = c;
    }
    Engine::new(spec, limits)
}

fn load_spec(input: &str) -> Result<NecklaceSpec, Failure> {
    if let Some(name) = input.strip_prefix("builtin:") {
        return builtin_spec(name).ok_or_else(|| {
            Failure::Input(format!(
                "unknown builtin spec {name:?} (bundled: gasket, good4, crowded4)"
            ))
        });
    }
    let text = std::fs::read_to_string(input)
        .map_err(|e| Failure::Input(format!("{input}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{input}: {e}")))
}

fn load_ifs(input: &str) -> Result<GeometricIFS, Failure> {
    if let Some(name) = input.strip_prefix("builtin:") {
        return match name {
            "gasket" => Ok(gasket_ifs()),
            "crowded4" => Ok(crowded4_ifs()),
            other if builtin_spec(other).is_some() => Err(Failure::Input(format!(
                "builtin {other:?} has no bundled planar realization"
            ))),
            other => Err(Failure::Input(format!(
                "unknown builtin realization {other:?} (bundled: gasket, crowded4)"
            ))),
        };
    }
    let text = std::fs::read_to_string(input)
        .map_err(|e| Failure::Input(format!("{input}: {e}")))?;
    GeometricIFS::from_json_str(&text).map_err(|e| Failure::Input(format!("{input}: {e}")))
}

/// Locate the junction points so the drawing can label them; a realization
/// that does not extract cleanly is simply drawn without marks.
fn node_marks(ifs: &GeometricIFS, depth: usize, tol: f64) -> Vec<RenderMark> {
    let Ok(extraction) = spec_from_geometry(ifs, depth, tol) else {
        return Vec::new();
    };
    extraction
        .spec
        .glue()
        .iter()
        .map(|rule| RenderMark {
            label: format!("z{}", rule.k),
            point: address_point(ifs, &rule.u.prepend(&Word::new(vec![rule.k]))),
            role: MarkRole::Node,
        })
        .collect()
}

fn write_catalog_files(
    dir: &Path,
    entries: &[necklace_core::geometry::CatalogEntry],
) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    for entry in entries {
        let spec_path = dir.join(format!("{}.spec.json", entry.name));
        let text = serde_json::to_string_pretty(&entry.spec)
            .map_err(|e| Failure::Input(format!("{}: {e}", entry.name)))?;
        std::fs::write(&spec_path, text + "\n")
            .map_err(|e| Failure::Usage(format!("{}: {e}", spec_path.display())))?;
        if let Some(ifs) = &entry.ifs {
            let ifs_path = dir.join(format!("{}.ifs.json", entry.name));
            let text = serde_json::to_string_pretty(ifs)
                .map_err(|e| Failure::Input(format!("{}: {e}", entry.name)))?;
            std::fs::write(&ifs_path, text + "\n")
                .map_err(|e| Failure::Usage(format!("{}: {e}", ifs_path.display())))?;
        }
    }
    Ok(())
}
