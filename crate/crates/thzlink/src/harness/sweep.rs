//! SNR sweeps: Monte-Carlo BLER per grid point with stopping rules,
//! required-SNR extraction at the 10% BLER target, and scheme comparison.
//!
//! Determinism: drops are dispatched in fixed-size batches indexed by
//! `drop_index`; results are reduced in index order, so the outcome is
//! byte-identical for any thread count.

use rayon::prelude::*;

use crate::error::Result;

use super::config::LinkConfig;
use super::drop::{run_drop, LinkContext};

/// BLER target for required-SNR extraction.
pub const BLER_TARGET: f64 = 0.1;

/// Points whose BLER falls below this for two consecutive grid points end
/// the sweep early.
pub const EARLY_EXIT_BLER: f64 = 1e-2;

/// Drops dispatched per scheduling batch. Stopping rules are evaluated on
/// batch boundaries, which keeps block counts independent of thread count.
pub const DROP_BATCH: u64 = 32;

/// Monte-Carlo tally for one SNR grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrPoint {
    pub snr_db: f64,
    pub blocks: u64,
    pub errors: u64,
    /// Drops that failed numerically (subset of `errors`).
    pub numerical_failures: u64,
}

impl SnrPoint {
    pub fn bler(&self) -> f64 {
        if self.blocks == 0 {
            f64::NAN
        } else {
            self.errors as f64 / self.blocks as f64
        }
    }
}

/// Result of one configuration's sweep.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub config_id: String,
    pub points: Vec<SnrPoint>,
    /// SNR meeting the 10% BLER target, `None` when the target is never
    /// reached (error floor).
    pub required_snr_db: Option<f64>,
    /// Statistical anomalies worth a look (non-monotonic beyond 2 sigma).
    pub flags: Vec<String>,
    /// Wall-clock duration; informational only, never written to CSV.
    pub wall_seconds: f64,
}

/// Run the configured SNR sweep.
pub fn run_sweep(cfg: &LinkConfig) -> Result<SweepResult> {
    let started = std::time::Instant::now();
    let ctx = LinkContext::new(cfg.clone())?;
    let grid = cfg.snr_grid();
    let mut points = Vec::with_capacity(grid.len());
    let mut below_exit = 0usize;

    for (snr_index, &snr_db) in grid.iter().enumerate() {
        let point = run_point(&ctx, snr_db, snr_index);
        let bler = point.bler();
        points.push(point);
        below_exit = if bler < EARLY_EXIT_BLER { below_exit + 1 } else { 0 };
        if below_exit >= 2 {
            break;
        }
    }

    let required_snr_db = required_snr_at_target(&points, BLER_TARGET);
    let flags = monotonicity_flags(&points);
    Ok(SweepResult {
        config_id: cfg.id.clone(),
        points,
        required_snr_db,
        flags,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Monte-Carlo one grid point until `min_errors` errors (with at least
/// `min_blocks` blocks) or `max_blocks` blocks.
pub fn run_point(ctx: &LinkContext, snr_db: f64, snr_index: usize) -> SnrPoint {
    let sweep = &ctx.cfg.sweep;
    let mut point =
        SnrPoint { snr_db, blocks: 0, errors: 0, numerical_failures: 0 };
    while point.blocks < sweep.max_blocks {
        let batch = DROP_BATCH.min(sweep.max_blocks - point.blocks);
        let start = point.blocks;
        let results: Vec<_> = (start..start + batch)
            .into_par_iter()
            .map(|drop_index| run_drop(ctx, snr_db, snr_index, drop_index))
            .collect();
        for r in results {
            point.blocks += 1;
            if r.block_error {
                point.errors += 1;
            }
            if r.numerical_failure {
                point.numerical_failures += 1;
            }
        }
        if point.errors >= sweep.min_errors && point.blocks >= sweep.min_blocks {
            break;
        }
    }
    point
}

/// Required SNR at `target` BLER by linear interpolation of `log10(BLER)`
/// between the bracketing grid points.
///
/// Rules: points are scanned in ascending SNR; the first point at or below
/// the target closes the bracket. If that is the first grid point, its SNR
/// is returned directly (nothing to interpolate against). A zero-error
/// point is clamped to `0.5/blocks` so the logarithm stays finite. `None`
/// when no point reaches the target.
pub fn required_snr_at_target(points: &[SnrPoint], target: f64) -> Option<f64> {
    let idx = points
        .iter()
        .position(|p| p.blocks > 0 && p.bler() <= target)?;
    if idx == 0 {
        return Some(points[0].snr_db);
    }
    let lo = &points[idx - 1];
    let hi = &points[idx];
    let clamp = |p: &SnrPoint| {
        let b = p.bler();
        if b > 0.0 {
            b
        } else {
            0.5 / p.blocks as f64
        }
    };
    let (b1, b2) = (clamp(lo), clamp(hi));
    if (b2 - b1).abs() < f64::EPSILON {
        return Some(hi.snr_db);
    }
    let t = (target.log10() - b1.log10()) / (b2.log10() - b1.log10());
    Some(lo.snr_db + t * (hi.snr_db - lo.snr_db))
}

/// Flag adjacent-point BLER increases beyond two binomial sigmas.
pub fn monotonicity_flags(points: &[SnrPoint]) -> Vec<String> {
    let mut flags = Vec::new();
    for w in points.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.blocks == 0 || b.blocks == 0 {
            continue;
        }
        let (pa, pb) = (a.bler(), b.bler());
        let sigma = (pa * (1.0 - pa) / a.blocks as f64
            + pb * (1.0 - pb) / b.blocks as f64)
            .sqrt();
        if pb > pa + 2.0 * sigma {
            flags.push(format!(
                "BLER rose from {pa:.4} at {:.2} dB to {pb:.4} at {:.2} dB (> 2 sigma)",
                a.snr_db, b.snr_db
            ));
        }
    }
    flags
}

/// Required-SNR table with pairwise deltas for configurations that differ
/// in waveform/PTRS scheme.
#[derive(Debug, Clone)]
pub struct SchemeComparison {
    /// `(config_id, required_snr_db)` in input order.
    pub rows: Vec<(String, Option<f64>)>,
    /// `deltas[i][j] = required[i] - required[j]` when both are finite.
    pub deltas: Vec<Vec<Option<f64>>>,
}

impl SchemeComparison {
    /// True when required SNRs are non-decreasing across `order` (indices
    /// into `rows`), treating `None` as +infinity (an N/A scheme can only
    /// sit at the degraded end).
    pub fn ordering_holds(&self, order: &[usize]) -> bool {
        order.windows(2).all(|w| {
            let a = self.rows[w[0]].1.unwrap_or(f64::INFINITY);
            let b = self.rows[w[1]].1.unwrap_or(f64::INFINITY);
            a <= b
        })
    }
}

impl std::fmt::Display for SchemeComparison {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{:<40} required SNR @10% BLER", "config")?;
        for (id, snr) in &self.rows {
            match snr {
                Some(v) => writeln!(f, "{id:<40} {v:7.2} dB")?,
                None => writeln!(f, "{id:<40}      NA")?,
            }
        }
        for (i, (id_i, _)) in self.rows.iter().enumerate() {
            for (j, (id_j, _)) in self.rows.iter().enumerate() {
                if i < j {
                    if let Some(d) = self.deltas[i][j] {
                        writeln!(f, "delta {id_i} - {id_j} = {d:+.2} dB")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Compare finished sweeps (typically schemes over a common link setup).
pub fn compare_schemes(results: &[SweepResult]) -> SchemeComparison {
    let rows: Vec<(String, Option<f64>)> = results
        .iter()
        .map(|r| (r.config_id.clone(), r.required_snr_db))
        .collect();
    let deltas = rows
        .iter()
        .map(|(_, a)| {
            rows.iter()
                .map(|(_, b)| match (a, b) {
                    (Some(x), Some(y)) => Some(x - y),
                    _ => None,
                })
                .collect()
        })
        .collect();
    SchemeComparison { rows, deltas }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(snr_db: f64, blocks: u64, errors: u64) -> SnrPoint {
        SnrPoint { snr_db, blocks, errors, numerical_failures: 0 }
    }

    #[test]
    fn interpolation_matches_a_hand_computed_bracket() {
        // BLER 0.4 at 2 dB and 0.04 at 3 dB: log10 interpolation puts the
        // 10% crossing at 2 + (log10(0.1)-log10(0.4))/(log10(0.04)-log10(0.4))
        // = 2 + 0.602/1.0 = 2.602 dB.
        let points = vec![pt(2.0, 1000, 400), pt(3.0, 1000, 40)];
        let snr = required_snr_at_target(&points, 0.1).unwrap();
        assert!((snr - 2.602).abs() < 1e-3, "got {snr}");
    }

    #[test]
    fn first_point_already_below_target_returns_grid_edge() {
        let points = vec![pt(5.0, 500, 10), pt(6.0, 500, 2)];
        assert_eq!(required_snr_at_target(&points, 0.1), Some(5.0));
    }

    #[test]
    fn floor_above_target_gives_none() {
        let points = vec![pt(0.0, 300, 200), pt(5.0, 300, 80), pt(10.0, 300, 70)];
        assert_eq!(required_snr_at_target(&points, 0.1), None);
    }

    #[test]
    fn zero_error_endpoint_is_clamped_not_infinite() {
        let points = vec![pt(1.0, 200, 100), pt(2.0, 200, 0)];
        let snr = required_snr_at_target(&points, 0.1).unwrap();
        assert!(snr > 1.0 && snr < 2.0, "got {snr}");
    }

    #[test]
    fn monotonicity_violations_are_flagged_beyond_two_sigma() {
        let clean = vec![pt(0.0, 1000, 500), pt(1.0, 1000, 490), pt(2.0, 1000, 200)];
        assert!(monotonicity_flags(&clean).is_empty());
        let dirty = vec![pt(0.0, 1000, 100), pt(1.0, 1000, 200)];
        assert_eq!(monotonicity_flags(&dirty).len(), 1);
    }

    #[test]
    fn identical_results_compare_with_zero_delta() {
        let r = SweepResult {
            config_id: "a".into(),
            points: vec![pt(0.0, 100, 50), pt(1.0, 100, 5)],
            required_snr_db: Some(0.7),
            flags: vec![],
            wall_seconds: 0.0,
        };
        let cmp = compare_schemes(&[r.clone(), r]);
        assert_eq!(cmp.deltas[0][1], Some(0.0));
        assert!(cmp.ordering_holds(&[0, 1]));
    }

    #[test]
    fn ordering_treats_na_as_worst() {
        let mk = |id: &str, snr: Option<f64>| SweepResult {
            config_id: id.into(),
            points: vec![],
            required_snr_db: snr,
            flags: vec![],
            wall_seconds: 0.0,
        };
        let cmp = compare_schemes(&[mk("good", Some(10.0)), mk("bad", None)]);
        assert!(cmp.ordering_holds(&[0, 1]));
        assert!(!cmp.ordering_holds(&[1, 0]));
    }
}
