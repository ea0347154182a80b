//! The reproduction commands. Each writes its table or report into the
//! output directory and reports whether the recomputed values sit within
//! the published tolerances.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use cvmem::benchmark::{
    monotone_envelope, optimize_gaussian_strategy, seesaw_truncated, BenchmarkResult,
    OptimizeConfig, SeesawConfig,
};
use cvmem::epr::{duan_e, hybrid_e, EprReport, SignConvention};
use cvmem::fidelity::{
    average_fidelity, table1_overlap, table1_records, Alphabet, MomentSource, PhaseSet,
};
use cvmem::gaussian::two_mode_squeezed;
use cvmem::memory::{
    calibrate_kappa, infer_added_noise, simulate_kappa_readout, storage_in_local_picture,
    MemoryParams, ADDED_NOISE_PHASE_0, ADDED_NOISE_PHASE_90, MEASURED_STORED_PHASE_0,
    MEASURED_STORED_PHASE_90,
};

use crate::config::{OutputFormat, RunConfig};

/// Tolerance check result of a command; `WithinTolerance` maps to exit 0,
/// `ToleranceExceeded` to exit 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmdStatus {
    WithinTolerance,
    ToleranceExceeded,
}

#[derive(Debug)]
pub enum CmdError {
    Validation(String),
    Io(std::io::Error),
}

impl From<cvmem::Error> for CmdError {
    fn from(e: cvmem::Error) -> Self {
        CmdError::Validation(e.to_string())
    }
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Io(e)
    }
}

pub type CmdResult = Result<CmdStatus, CmdError>;

/// Published values are rounded to two decimals, so recomputed values are
/// compared at the same resolution: round to two decimals first, then ask
/// for agreement within one least digit (inclusive).
pub fn rounded_deviation(computed: f64, published: f64) -> f64 {
    ((computed * 100.0).round() / 100.0 - published).abs()
}

const TOLERANCE: f64 = 0.01 + 1e-9;

fn write_output(path: &PathBuf, content: &str) -> Result<(), CmdError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, content)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x:.6}")
}

fn json_num(x: f64) -> String {
    format!("{x:.11e}")
}

/// Recompute the 18 stored-state overlaps next to the published column.
pub fn cmd_table1(config: &RunConfig) -> CmdResult {
    let records = table1_records();
    let mut rows = Vec::new();
    let mut max_dev = 0.0f64;
    for record in &records {
        let overlap = table1_overlap(record)?;
        let dev = rounded_deviation(overlap, record.overlap);
        max_dev = max_dev.max(dev);
        rows.push((record, overlap, dev));
    }

    let content = match config.format {
        OutputFormat::Csv => {
            let mut out = String::from(
                "mean_x_in,mean_p_in,phi_deg,mean_pA,mean_xA,var_pA,var_xA,overlap,paper_overlap,abs_deviation\n",
            );
            for (r, overlap, dev) in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    num(r.mean_x_in),
                    num(r.mean_p_in),
                    num(r.phi_deg),
                    num(r.mean_pa),
                    num(r.mean_xa),
                    num(r.var_pa),
                    num(r.var_xa),
                    num(*overlap),
                    num(r.overlap),
                    num(*dev),
                )
                .unwrap();
            }
            out
        }
        OutputFormat::Json => {
            let body: Vec<String> = rows
                .iter()
                .map(|(r, overlap, dev)| {
                    format!(
                        "  {{\"mean_x_in\": {}, \"mean_p_in\": {}, \"phi_deg\": {}, \"mean_pA\": {}, \"mean_xA\": {}, \"var_pA\": {}, \"var_xA\": {}, \"overlap\": {}, \"paper_overlap\": {}, \"abs_deviation\": {}}}",
                        json_num(r.mean_x_in),
                        json_num(r.mean_p_in),
                        json_num(r.phi_deg),
                        json_num(r.mean_pa),
                        json_num(r.mean_xa),
                        json_num(r.var_pa),
                        json_num(r.var_xa),
                        json_num(*overlap),
                        json_num(r.overlap),
                        json_num(*dev),
                    )
                })
                .collect();
            format!("[\n{}\n]\n", body.join(",\n"))
        }
    };
    let ext = if config.format == OutputFormat::Csv { "csv" } else { "json" };
    write_output(&config.out_dir.join(format!("table1.{ext}")), &content)?;
    println!("table1: max deviation {max_dev:.4} over {} rows", rows.len());
    Ok(if max_dev <= TOLERANCE { CmdStatus::WithinTolerance } else { CmdStatus::ToleranceExceeded })
}

/// Invert the noise model for the measured per-phase added noise.
pub fn cmd_table2(config: &RunConfig) -> CmdResult {
    let cases = [
        (0.0, MEASURED_STORED_PHASE_0, ADDED_NOISE_PHASE_0),
        (90.0, MEASURED_STORED_PHASE_90, ADDED_NOISE_PHASE_90),
    ];
    let mut rows = Vec::new();
    let mut max_dev = 0.0f64;
    for (phi, stored, published) in cases {
        let noise = infer_added_noise(stored, &config.memory, phi)?;
        let dev_x = rounded_deviation(noise.var_sx, published.0);
        let dev_p = rounded_deviation(noise.var_sp, published.1);
        max_dev = max_dev.max(dev_x).max(dev_p);
        rows.push((phi, stored, noise, published, dev_x, dev_p));
    }

    let content = match config.format {
        OutputFormat::Csv => {
            let mut out = String::from(
                "phi_deg,var_xA_fin,var_pA_fin,var_sx,var_sp,paper_sx,paper_sp,dev_sx,dev_sp,model_mismatch\n",
            );
            for (phi, stored, noise, published, dev_x, dev_p) in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    num(*phi),
                    num(stored.0),
                    num(stored.1),
                    num(noise.var_sx),
                    num(noise.var_sp),
                    num(published.0),
                    num(published.1),
                    num(*dev_x),
                    num(*dev_p),
                    noise.model_mismatch,
                )
                .unwrap();
            }
            out
        }
        OutputFormat::Json => {
            let body: Vec<String> = rows
                .iter()
                .map(|(phi, stored, noise, published, dev_x, dev_p)| {
                    format!(
                        "  {{\"phi_deg\": {}, \"var_xA_fin\": {}, \"var_pA_fin\": {}, \"var_sx\": {}, \"var_sp\": {}, \"paper_sx\": {}, \"paper_sp\": {}, \"dev_sx\": {}, \"dev_sp\": {}, \"model_mismatch\": {}}}",
                        json_num(*phi),
                        json_num(stored.0),
                        json_num(stored.1),
                        json_num(noise.var_sx),
                        json_num(noise.var_sp),
                        json_num(published.0),
                        json_num(published.1),
                        json_num(*dev_x),
                        json_num(*dev_p),
                        noise.model_mismatch,
                    )
                })
                .collect();
            format!("[\n{}\n]\n", body.join(",\n"))
        }
    };
    let ext = if config.format == OutputFormat::Csv { "csv" } else { "json" };
    write_output(&config.out_dir.join(format!("table2.{ext}")), &content)?;
    println!("table2: max deviation {max_dev:.4}");
    Ok(if max_dev <= TOLERANCE { CmdStatus::WithinTolerance } else { CmdStatus::ToleranceExceeded })
}

/// Fidelity curve over the configured d_max grid: model prediction,
/// experimental-moments value, Gaussian-strategy benchmark bound and its
/// monotone envelope.
pub fn cmd_curve(config: &RunConfig) -> CmdResult {
    let gain = config.memory.memory_gain();
    let mut model = Vec::new();
    let mut experimental = Vec::new();
    let mut bench = Vec::new();
    for &d in &config.d_max {
        let alphabet = Alphabet::new(d, config.s, config.phases.clone())?;
        model.push(average_fidelity(&alphabet, &config.memory, MomentSource::Model)?);
        experimental.push(average_fidelity(&alphabet, &config.memory, MomentSource::Experimental)?);
        let bench_alphabet =
            Alphabet::new(d, config.s, PhaseSet::Continuous { samples: 64 })?;
        let (_, result) = optimize_gaussian_strategy(
            &bench_alphabet,
            gain,
            &OptimizeConfig { seed: config.seed, ..OptimizeConfig::default() },
        )?;
        bench.push(result.value);
    }
    let bench_points: Vec<(f64, f64)> =
        config.d_max.iter().copied().zip(bench.iter().copied()).collect();
    let envelope = monotone_envelope(&bench_points)?;

    let content = match config.format {
        OutputFormat::Csv => {
            let mut out = String::from(
                "d_max,model_fidelity,experimental_fidelity,benchmark_lower_bound,benchmark_envelope\n",
            );
            for (i, &d) in config.d_max.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    num(d),
                    num(model[i]),
                    num(experimental[i]),
                    num(bench[i]),
                    num(envelope[i].1),
                )
                .unwrap();
            }
            out
        }
        OutputFormat::Json => {
            let body: Vec<String> = config
                .d_max
                .iter()
                .enumerate()
                .map(|(i, &d)| {
                    format!(
                        "  {{\"d_max\": {}, \"model_fidelity\": {}, \"experimental_fidelity\": {}, \"benchmark_lower_bound\": {}, \"benchmark_envelope\": {}}}",
                        json_num(d),
                        json_num(model[i]),
                        json_num(experimental[i]),
                        json_num(bench[i]),
                        json_num(envelope[i].1),
                    )
                })
                .collect();
            format!("[\n{}\n]\n", body.join(",\n"))
        }
    };
    let ext = if config.format == OutputFormat::Csv { "csv" } else { "json" };
    write_output(&config.out_dir.join(format!("curve.{ext}")), &content)?;
    Ok(CmdStatus::WithinTolerance)
}

fn epr_report_json(label: &str, report: &EprReport, params: &MemoryParams) -> String {
    format!(
        "  \"{label}\": {{\"e\": {}, \"separable\": {}, \"eof_lower_bound\": {}, \"var_sx\": {}, \"var_sp\": {}}}",
        json_num(report.e),
        report.separable,
        json_num(report.eof_lower_bound),
        json_num(params.var_sx),
        json_num(params.var_sp),
    )
}

/// EPR diagnostics: the stored pair in both cells and the hybrid
/// stored/propagating scenario.
pub fn cmd_epr(config: &RunConfig) -> CmdResult {
    // the stored-pair scenario is a phase-0 storage run; with the
    // paper-2010 preset it therefore uses the phase-0 measured added noise
    let pair_params = if config.memory == MemoryParams::paper_2010() {
        MemoryParams::paper_2010_phase(0.0)
    } else {
        config.memory
    };
    let stored = storage_in_local_picture(&two_mode_squeezed(config.s)?, &pair_params)?;
    let stored_pair = EprReport::from_duan_sum(duan_e(&stored, SignConvention::MinusPlus)?);
    let hybrid = EprReport::from_duan_sum(hybrid_e(&config.memory, config.s));

    let content = format!(
        "{{\n{},\n{}\n}}\n",
        epr_report_json("stored_pair", &stored_pair, &pair_params),
        epr_report_json("hybrid", &hybrid, &config.memory),
    );
    write_output(&config.out_dir.join("epr.json"), &content)?;
    println!("epr: stored-pair E = {:.4}, hybrid E = {:.4}", stored_pair.e, hybrid.e);
    Ok(CmdStatus::WithinTolerance)
}

fn benchmark_json(result: &BenchmarkResult) -> String {
    format!(
        "{{\"value\": {}, \"kind\": \"{}\", \"truncation_tail\": {}, \"iterations\": {}, \"seed\": {}}}",
        json_num(result.value),
        result.kind.as_str(),
        json_num(result.truncation_tail),
        result.iterations,
        result.seed,
    )
}

/// The seesaw runs only for alphabets up to the width the published
/// benchmark was computed at; wider alphabets reuse the monotone envelope,
/// like the published curve does.
const SEESAW_DMAX_CAP: f64 = 3.8 + 1e-9;

/// Classical benchmark estimates per configured d_max: the optimized
/// Gaussian strategy everywhere, the truncated-Fock seesaw up to
/// d_max = 3.8, and the monotone envelope of the best estimates.
pub fn cmd_benchmark(config: &RunConfig) -> CmdResult {
    let gain = config.memory.memory_gain();
    let mut entries = Vec::new();
    let mut best_points = Vec::new();
    let mut carried: Option<f64> = None;
    for &d in &config.d_max {
        let gauss_alphabet = Alphabet::new(d, config.s, PhaseSet::Continuous { samples: 64 })?;
        let (_, gauss) = optimize_gaussian_strategy(
            &gauss_alphabet,
            gain,
            &OptimizeConfig { seed: config.seed, ..OptimizeConfig::default() },
        )?;
        let seesaw = if d <= SEESAW_DMAX_CAP {
            let seesaw_alphabet =
                Alphabet::new(d, config.s, PhaseSet::Continuous { samples: 16 })?;
            Some(seesaw_truncated(
                &seesaw_alphabet,
                None,
                gain,
                &SeesawConfig { seed: config.seed, ..SeesawConfig::default() },
            )?)
        } else {
            None
        };
        // widths beyond the seesaw cap reuse the capped estimate, as the
        // published curve reuses the d = 3.8 benchmark at d = 7.6
        let best = match &seesaw {
            Some(s) => s.value.max(gauss.value),
            None => carried.unwrap_or(gauss.value),
        };
        carried = Some(best);
        best_points.push((d, best));
        entries.push((d, gauss, seesaw));
    }
    let envelope = monotone_envelope(&best_points)?;

    let body: Vec<String> = entries
        .iter()
        .zip(&envelope)
        .map(|((d, gauss, seesaw), env)| {
            let seesaw_field = match seesaw {
                Some(s) => benchmark_json(s),
                None => "null".to_string(),
            };
            format!(
                "  {{\"d_max\": {}, \"gaussian_strategy\": {}, \"seesaw\": {}, \"envelope\": {}}}",
                json_num(*d),
                benchmark_json(gauss),
                seesaw_field,
                json_num(env.1),
            )
        })
        .collect();
    let content = format!("[\n{}\n]\n", body.join(",\n"));
    write_output(&config.out_dir.join("benchmark.json"), &content)?;
    for ((d, gauss, seesaw), env) in entries.iter().zip(&envelope) {
        match seesaw {
            Some(s) => println!(
                "d_max {d}: gaussian {:.4}, seesaw {:.4}, envelope {:.4}",
                gauss.value, s.value, env.1
            ),
            None => println!(
                "d_max {d}: gaussian {:.4}, envelope {:.4} (seesaw reused via monotonicity)",
                gauss.value, env.1
            ),
        }
    }
    Ok(CmdStatus::WithinTolerance)
}

/// Simulate the two-pulse coupling calibration and recover kappa^2.
pub fn cmd_calibrate(config: &RunConfig) -> CmdResult {
    let injected = 5.0;
    let readout = simulate_kappa_readout(&config.memory, injected)?;
    let recovered = calibrate_kappa(readout, injected)?;
    let expected = config.memory.kappa * config.memory.kappa;
    let content = format!(
        "{{\"kappa_configured\": {}, \"kappa_sq_configured\": {}, \"injected_mean\": {}, \"readout_mean\": {}, \"kappa_sq_recovered\": {}}}\n",
        json_num(config.memory.kappa),
        json_num(expected),
        json_num(injected),
        json_num(readout),
        json_num(recovered),
    );
    write_output(&config.out_dir.join("calibrate.json"), &content)?;
    println!("calibrate: recovered kappa^2 = {recovered:.12}");
    Ok(if (recovered - expected).abs() <= 1e-9 {
        CmdStatus::WithinTolerance
    } else {
        CmdStatus::ToleranceExceeded
    })
}
