//! Deterministic CSV persistence for sweep results.
//!
//! Formatting is fixed-precision and locale-free so re-running a sweep
//! with the same configuration and seed produces byte-identical files.
//! Wall-clock time is deliberately excluded from every file.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Result, SimError};

use super::config::LinkConfig;
use super::sweep::SweepResult;

fn io_err(e: std::io::Error) -> SimError {
    SimError::Io(e)
}

/// Per-point CSV body (one row per SNR grid point).
pub fn points_csv(cfg: &LinkConfig, result: &SweepResult) -> String {
    let mut out = String::new();
    out.push_str(
        "config_id,waveform,scs_khz,modulation,rank,ptrs_scheme,snr_db,blocks,errors,bler\n",
    );
    let scheme = cfg
        .resolve_ptrs()
        .map(|p| p.scheme.name().to_string())
        .unwrap_or_else(|_| "invalid".into());
    for p in &result.points {
        writeln!(
            out,
            "{},{},{},{},{},{},{:.3},{},{},{:.6e}",
            result.config_id,
            cfg.waveform.waveform.name(),
            cfg.numerology.scs_khz,
            cfg.waveform.modulation.name(),
            cfg.waveform.rank,
            scheme,
            p.snr_db,
            p.blocks,
            p.errors,
            p.bler(),
        )
        .expect("writing to String cannot fail");
    }
    out
}

/// Summary CSV body: one row per configuration.
pub fn summary_csv(results: &[SweepResult]) -> String {
    let mut out = String::from("config_id,required_snr_db\n");
    for r in results {
        match r.required_snr_db {
            Some(v) => writeln!(out, "{},{:.3}", r.config_id, v).unwrap(),
            None => writeln!(out, "{},NA", r.config_id).unwrap(),
        }
    }
    out
}

/// Write a sweep's artifacts into `out_dir`: per-point CSV, summary CSV,
/// and the resolved configuration snapshot for provenance.
pub fn write_sweep_outputs(
    out_dir: &Path,
    cfg: &LinkConfig,
    result: &SweepResult,
) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(io_err)?;
    std::fs::write(
        out_dir.join(format!("{}_points.csv", result.config_id)),
        points_csv(cfg, result),
    )
    .map_err(io_err)?;
    std::fs::write(
        out_dir.join(format!("{}_summary.csv", result.config_id)),
        summary_csv(std::slice::from_ref(result)),
    )
    .map_err(io_err)?;
    write_config_snapshot(out_dir, cfg)?;
    Ok(())
}

/// Echo the resolved configuration (defaults and overrides applied).
pub fn write_config_snapshot(out_dir: &Path, cfg: &LinkConfig) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(io_err)?;
    std::fs::write(out_dir.join("resolved_config.toml"), cfg.to_toml_string()).map_err(io_err)
}
