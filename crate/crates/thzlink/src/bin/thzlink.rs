//! Batch front end for the link simulator: SNR sweeps, single-point runs,
//! PA back-off tables, PAPR CCDFs, phase-noise model checks, and config
//! validation. Emits CSV data files; plotting is out of process.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thzlink::error::SimError;
use thzlink::harness::{
    run_point, run_sweep, write_config_snapshot, write_sweep_outputs, LinkConfig, LinkContext,
};
use thzlink::impairments::{required_backoff, PaModel, PnProfile};
use thzlink::math::{welch_psd, lin_to_db};
use thzlink::modulation::Modulation;
use thzlink::numerology::{Numerology, SYMBOLS_PER_SLOT};
use thzlink::waveform::{
    ofdm_modulate_oversampled, scfdma_spread, PaprAccumulator, ResourceGrid, ScFdmaFrame, Waveform,
};

#[derive(Parser)]
#[command(
    name = "thzlink",
    version,
    about = "Link-level simulator for sub-THz NR-style radio links"
)]
struct Cli {
    /// Worker threads for drop-level parallelism (default: all cores).
    /// Outputs are independent of this setting.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Link configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSVs and the resolved config snapshot.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the master seed from the file.
    #[arg(long)]
    seed: Option<u64>,
    /// Dotted-path overrides, e.g. --set waveform.modulation=64qam
    /// (repeatable; applied in order after the file is parsed).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<LinkConfig, SimError> {
        let text = std::fs::read_to_string(&self.config)?;
        let mut overrides = self.set.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("sweep.master_seed={seed}"));
        }
        LinkConfig::from_toml_str_with_overrides(&text, &overrides)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo a single SNR point and print the tally.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// SNR of the point, dB.
        #[arg(long)]
        snr_db: f64,
        /// Blocks to simulate (stops early at sweep.min_errors errors).
        #[arg(long, default_value_t = 200)]
        blocks: u64,
    },
    /// Full BLER-vs-SNR sweep; writes per-point and summary CSVs.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Minimum PA back-off meeting EVM and ACLR limits, per waveform and
    /// modulation; writes backoff.csv.
    Backoff {
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Subcarrier spacing for the probe numerology, kHz.
        #[arg(long, default_value_t = 960)]
        scs_khz: u32,
        /// Allocation width in PRBs.
        #[arg(long, default_value_t = 8)]
        prb: usize,
        /// Rapp smoothness factor p.
        #[arg(long, default_value_t = 2.0)]
        smoothness: f64,
        /// Use an ideal (distortion-free) PA instead of the Rapp model.
        #[arg(long)]
        ideal_pa: bool,
        /// Probe length in slots.
        #[arg(long, default_value_t = 2)]
        slots: usize,
        /// Probe data seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// PAPR CCDF of a waveform/modulation pair; writes papr_ccdf.csv.
    Papr {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 960)]
        scs_khz: u32,
        #[arg(long, default_value_t = 8)]
        prb: usize,
        /// ofdm or sc-fdma.
        #[arg(long)]
        waveform: String,
        /// qpsk, 16qam, 64qam or 256qam.
        #[arg(long, default_value = "qpsk")]
        modulation: String,
        /// Slots of random data to accumulate.
        #[arg(long, default_value_t = 200)]
        slots: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Phase-noise model PSD vs periodogram of synthesized noise; writes
    /// pn_psd.csv.
    PnPsd {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// bs or ue.
        #[arg(long, default_value = "bs")]
        profile: String,
        #[arg(long, default_value_t = 90.0)]
        carrier_ghz: f64,
        /// Sample rate of the synthesized record, MHz.
        #[arg(long, default_value_t = 200.0)]
        fs_mhz: f64,
        /// Record length in samples.
        #[arg(long, default_value_t = 1 << 21)]
        samples: usize,
        /// Realizations averaged in the periodogram.
        #[arg(long, default_value_t = 10)]
        realizations: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Parse and resolve a config, print it, run nothing.
    ValidateConfig {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // Ignore failure: the global pool may already exist in tests.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                SimError::InvalidConfig(_) | SimError::InvalidArgument(_) => 2,
                SimError::Numerical(_) | SimError::EstimationFailed(_) | SimError::Infeasible(_) => 3,
                SimError::Io(_) => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), SimError> {
    match cmd {
        Command::Run { config, snr_db, blocks } => {
            let mut cfg = config.load()?;
            cfg.sweep.max_blocks = blocks;
            let ctx = LinkContext::new(cfg.clone())?;
            let point = run_point(&ctx, snr_db, 0);
            write_config_snapshot(&config.out, &cfg)?;
            println!(
                "{} @ {:.2} dB: {} blocks, {} errors, BLER {:.4e}{}",
                cfg.id,
                snr_db,
                point.blocks,
                point.errors,
                point.bler(),
                if point.numerical_failures > 0 {
                    format!(" ({} numerical failures)", point.numerical_failures)
                } else {
                    String::new()
                }
            );
            Ok(())
        }
        Command::Sweep { config } => {
            let cfg = config.load()?;
            let result = run_sweep(&cfg)?;
            write_sweep_outputs(&config.out, &cfg, &result)?;
            for p in &result.points {
                println!(
                    "snr {:6.2} dB  blocks {:6}  errors {:5}  bler {:.4e}",
                    p.snr_db,
                    p.blocks,
                    p.errors,
                    p.bler()
                );
            }
            match result.required_snr_db {
                Some(v) => println!("required SNR @10% BLER: {v:.2} dB"),
                None => println!("required SNR @10% BLER: NA (error floor)"),
            }
            for f in &result.flags {
                println!("flag: {f}");
            }
            eprintln!("wall time: {:.1} s", result.wall_seconds);
            Ok(())
        }
        Command::Backoff { out, scs_khz, prb, smoothness, ideal_pa, slots, seed } => {
            let num = Numerology::derive(scs_khz, prb)?;
            let pa = if ideal_pa {
                PaModel::Ideal
            } else {
                PaModel::Rapp { smoothness_p: smoothness, sat_amplitude: 1.0 }
            };
            let mut csv = String::from("waveform,modulation,backoff_db,evm_pct,aclr_db\n");
            let mut table = String::new();
            for waveform in [Waveform::Ofdm, Waveform::ScFdma] {
                for modulation in [
                    Modulation::Qpsk,
                    Modulation::Qam16,
                    Modulation::Qam64,
                    Modulation::Qam256,
                ] {
                    let r = required_backoff(waveform, modulation, &num, &pa, slots, seed)?;
                    csv.push_str(&format!(
                        "{},{},{:.1},{:.3},{:.3}\n",
                        waveform.name(),
                        modulation.name(),
                        r.backoff_db,
                        r.evm_pct,
                        r.aclr_db
                    ));
                    table.push_str(&format!(
                        "{:8} {:7}: back-off {:5.1} dB (EVM {:5.2}%, ACLR {:5.2} dB)\n",
                        waveform.name(),
                        modulation.name(),
                        r.backoff_db,
                        r.evm_pct,
                        r.aclr_db
                    ));
                }
            }
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("backoff.csv"), csv)?;
            print!("{table}");
            Ok(())
        }
        Command::Papr { out, scs_khz, prb, waveform, modulation, slots, seed } => {
            let num = Numerology::derive(scs_khz, prb)?;
            let waveform = Waveform::parse(&waveform)?;
            let modulation = Modulation::parse(&modulation)?;
            let mut acc = PaprAccumulator::new();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            const OS: usize = 4;
            for _ in 0..slots {
                let grid = random_slot(waveform, modulation, &num, &mut rng);
                let sig = ofdm_modulate_oversampled(&grid, &num, OS)?;
                acc.add_signal(&sig, OS * num.samples_per_symbol());
            }
            let levels: Vec<f64> = (0..=48).map(|i| 2.0 + 0.25 * i as f64).collect();
            let ccdf = acc.ccdf_curve(&levels)?;
            let mut csv = String::from("papr_db,ccdf\n");
            for (l, c) in levels.iter().zip(&ccdf) {
                csv.push_str(&format!("{l:.2},{c:.6e}\n"));
            }
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("papr_ccdf.csv"), csv)?;
            match acc.ccdf_level(1e-2) {
                Ok(level) => println!(
                    "{} {}: PAPR @1e-2 = {level:.2} dB over {} symbols",
                    waveform.name(),
                    modulation.name(),
                    acc.n_symbols()
                ),
                Err(_) => println!(
                    "{} {}: CCDF written ({} symbols; too few to quote the 1e-2 level)",
                    waveform.name(),
                    modulation.name(),
                    acc.n_symbols()
                ),
            }
            Ok(())
        }
        Command::PnPsd { out, profile, carrier_ghz, fs_mhz, samples, realizations, seed } => {
            let model = PnProfile::parse(&profile)?.model();
            let fs = fs_mhz * 1e6;
            let carrier = carrier_ghz * 1e9;
            let seg_len = 1 << 17;
            if samples < seg_len {
                return Err(SimError::InvalidArgument(format!(
                    "need at least {seg_len} samples"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut acc = vec![0.0f64; seg_len];
            for _ in 0..realizations.max(1) {
                let phase =
                    thzlink::impairments::synthesize_pn(&model, samples, fs, carrier, &mut rng)?;
                let x: Vec<Complex64> =
                    phase.iter().map(|&p| Complex64::new(p, 0.0)).collect();
                let psd = welch_psd(&x, seg_len, fs)?;
                for (a, p) in acc.iter_mut().zip(&psd) {
                    *a += p;
                }
            }
            let scale = 1.0 / realizations.max(1) as f64;
            let mut csv = String::from("offset_hz,model_dbchz,periodogram_dbchz\n");
            for k in 1..seg_len / 2 {
                let f = k as f64 * fs / seg_len as f64;
                csv.push_str(&format!(
                    "{f:.1},{:.3},{:.3}\n",
                    model.psd_dbchz(f, carrier),
                    lin_to_db(acc[k] * scale)
                ));
            }
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join("pn_psd.csv"), csv)?;
            println!(
                "{profile} model at {carrier_ghz} GHz: periodogram written ({} bins)",
                seg_len / 2 - 1
            );
            Ok(())
        }
        Command::ValidateConfig { config } => {
            let cfg = config.load()?;
            print!("{}", cfg.to_toml_string());
            Ok(())
        }
    }
}

/// One slot of random unit-energy data on every resource element (no
/// pilots): the PAPR/back-off probe signal.
fn random_slot(
    waveform: Waveform,
    modulation: Modulation,
    num: &Numerology,
    rng: &mut ChaCha8Rng,
) -> ResourceGrid {
    let active = num.active_subcarriers();
    let draw = |rng: &mut ChaCha8Rng| {
        let bits: Vec<u8> =
            (0..modulation.bits_per_symbol()).map(|_| rng.gen_range(0..2u8)).collect();
        modulation.map_symbol(&bits)
    };
    match waveform {
        Waveform::Ofdm => {
            let mut grid = ResourceGrid::for_slot(num);
            for sym in 0..SYMBOLS_PER_SLOT {
                for sc in 0..active {
                    grid.set(sym, sc, draw(rng));
                }
            }
            grid
        }
        Waveform::ScFdma => {
            let mut frame = ScFdmaFrame::for_slot(num);
            for sym in 0..SYMBOLS_PER_SLOT {
                for k in 0..active {
                    frame.set(sym, k, draw(rng));
                }
            }
            scfdma_spread(&frame, num).expect("frame matches numerology")
        }
    }
}
