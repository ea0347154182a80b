//! Acceptance suite: every published number this crate claims to reproduce,
//! checked at its stated tolerance, one PASS/FAIL line per criterion.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture` to see
//! the lines as they print.

use cvmem::benchmark::{
    monotone_envelope, optimize_gaussian_strategy, seesaw_truncated, OptimizeConfig, SeesawConfig,
};
use cvmem::epr::{duan_e, eof_lower_bound, hybrid_e, SignConvention};
use cvmem::fidelity::{
    average_fidelity, gaussian_overlap, stored_as_light, table1_overlap, table1_records, Alphabet,
    MomentSource, PhaseSet,
};
use cvmem::fock::{tms_fock, wigner_overlap, WignerGrid};
use cvmem::gaussian::{apply_loss, squeezed_state, two_mode_squeezed, vacuum};
use cvmem::memory::{
    added_noise_excess, infer_added_noise, interaction_map, storage_in_local_picture, store_ideal,
    store_noisy, MemoryParams, ADDED_NOISE_PHASE_0, ADDED_NOISE_PHASE_90, MEASURED_STORED_PHASE_0,
    MEASURED_STORED_PHASE_90,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn check(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Published values carry two decimals; compare at that resolution.
fn rounded_dev(computed: f64, published: f64) -> f64 {
    ((computed * 100.0).round() / 100.0 - published).abs()
}

const ROUNDED_TOL: f64 = 0.01 + 1e-9;

fn criterion_1_table1() -> Check {
    let records = table1_records();
    let mut max_dev = 0.0f64;
    let mut max_raw = 0.0f64;
    for record in &records {
        let f = table1_overlap(record).map_err(|e| e.to_string())?;
        max_dev = max_dev.max(rounded_dev(f, record.overlap));
        max_raw = max_raw.max((f - record.overlap).abs());
    }
    // the four rows cited in the criterion hold at the raw tolerance too
    let cited = [(0usize, 0.62), (4, 0.55), (1, 0.60), (12, 0.15)];
    let mut cited_ok = true;
    for (idx, published) in cited {
        let f = table1_overlap(&records[idx]).map_err(|e| e.to_string())?;
        cited_ok &= (f - published).abs() <= ROUNDED_TOL;
    }
    check(
        max_dev <= ROUNDED_TOL && cited_ok,
        format!(
            "18 rows, max deviation {max_dev:.4} at two-decimal resolution (raw max {max_raw:.4})"
        ),
    )
}

fn criterion_2_ideal_fidelities() -> Check {
    let params = MemoryParams { var_xa_init: 0.5, ..MemoryParams::perfect() };
    let mut overlaps = Vec::new();
    for phi in [0.0, 90.0] {
        let pure = squeezed_state(4.0, phi, (0.0, 0.0)).map_err(|e| e.to_string())?;
        let stored = store_ideal(&pure, &params).map_err(|e| e.to_string())?;
        let as_light = stored_as_light(stored.mean()[1], stored.mean()[0], stored.var(1), stored.var(0));
        overlaps.push(gaussian_overlap(&pure, &as_light).map_err(|e| e.to_string())?);
    }
    let mean = (overlaps[0] + overlaps[1]) / 2.0;
    check(
        (overlaps[0] - 0.95).abs() <= 0.01
            && (overlaps[1] - 0.61).abs() <= 0.01
            && (mean - 0.78).abs() <= 0.01,
        format!(
            "ideal-memory fidelities {:.3}/{:.3}, mean {:.3} (published 0.95/0.61, 0.78)",
            overlaps[0], overlaps[1], mean
        ),
    )
}

fn criterion_3_added_noise() -> Check {
    let params = MemoryParams::paper_2010();
    let n0 = infer_added_noise(MEASURED_STORED_PHASE_0, &params, 0.0).map_err(|e| e.to_string())?;
    let n90 =
        infer_added_noise(MEASURED_STORED_PHASE_90, &params, 90.0).map_err(|e| e.to_string())?;
    let inversion_ok = (n0.var_sx - ADDED_NOISE_PHASE_0.0).abs() <= 0.01
        && (n0.var_sp - ADDED_NOISE_PHASE_0.1).abs() <= 0.01
        && (n90.var_sx - ADDED_NOISE_PHASE_90.0).abs() <= 0.01
        && (n90.var_sp - ADDED_NOISE_PHASE_90.1).abs() <= 0.01;

    // aggregate added noise across the four published variance blocks
    let blocks = [
        (0.0, (1.99, 0.52)),
        (0.0, (2.01, 0.55)),
        (90.0, (0.73, 1.95)),
        (90.0, (0.78, 2.12)),
    ];
    let gain = params.memory_gain();
    let (mut sum_x, mut sum_p) = (0.0, 0.0);
    for (phi, stored) in blocks {
        let pure = squeezed_state(4.0, phi, (0.0, 0.0)).map_err(|e| e.to_string())?;
        let excess = added_noise_excess(stored, (pure.var(0), pure.var(1)), gain);
        sum_x += excess.0 / 4.0;
        sum_p += excess.1 / 4.0;
    }
    let aggregate_ok = (sum_x - 0.47).abs() <= 0.06 && (sum_p - 0.38).abs() <= 0.11;
    check(
        inversion_ok && aggregate_ok,
        format!(
            "inferred ({:.3},{:.3})/({:.3},{:.3}) vs (0.08,0.29)/(0.13,0.32); aggregate ({sum_x:.3},{sum_p:.3}) vs 0.47(6)/0.38(11)",
            n0.var_sx, n0.var_sp, n90.var_sx, n90.var_sp
        ),
    )
}

fn criterion_4_epr() -> Check {
    let pair_params = MemoryParams::paper_2010_phase(0.0);
    let stored = storage_in_local_picture(&two_mode_squeezed(4.0).unwrap(), &pair_params)
        .map_err(|e| e.to_string())?;
    let stored_pair = duan_e(&stored, SignConvention::MinusPlus).map_err(|e| e.to_string())?;
    let hybrid = hybrid_e(&MemoryParams::paper_2010(), 4.0);
    let eof = eof_lower_bound(1.52);
    let tms_duan =
        duan_e(&two_mode_squeezed(4.0).unwrap(), SignConvention::PlusMinus).map_err(|e| e.to_string())?;
    check(
        (stored_pair - 2.08).abs() <= 0.01
            && (hybrid - 1.51).abs() <= 0.01
            && (eof - 0.136).abs() <= 0.005
            && (tms_duan - 0.5).abs() <= 1e-12,
        format!(
            "stored-pair E {stored_pair:.4} (2.08), hybrid E {hybrid:.4} (1.51), eof(1.52) {eof:.4} (0.136), tms Duan {tms_duan:.4} (0.5)"
        ),
    )
}

fn criterion_5_average_fidelity() -> Check {
    let memory = MemoryParams::paper_2010();
    let mut curve = Vec::new();
    for d in [0.0, 3.8, 7.6] {
        let alphabet = Alphabet::experimental(d);
        curve.push(
            average_fidelity(&alphabet, &memory, MomentSource::Experimental)
                .map_err(|e| e.to_string())?,
        );
    }
    let bracket_ok = (0.50..=0.56).contains(&curve[1]);
    let monotone_ok = curve[0] >= curve[1] && curve[1] >= curve[2];
    check(
        bracket_ok && monotone_ok,
        format!(
            "experimental-moments fidelity {:.4}/{:.4}/{:.4} over d_max 0/3.8/7.6 (3.8 value in [0.50, 0.56], published 0.52(2))",
            curve[0], curve[1], curve[2]
        ),
    )
}

fn criterion_6_benchmarks() -> Check {
    // coherent-state classical limit
    let coherent = Alphabet::new(50.0, 1.0, PhaseSet::Continuous { samples: 8 }).unwrap();
    let (_, limit) = optimize_gaussian_strategy(&coherent, 1.0, &OptimizeConfig::default())
        .map_err(|e| e.to_string())?;
    let limit_ok = (limit.value - 0.50).abs() <= 0.005;

    // experimental alphabet at d_max = 3.8
    let gain = MemoryParams::paper_2010().memory_gain();
    let gauss_alphabet = Alphabet::new(3.8, 4.0, PhaseSet::Continuous { samples: 64 }).unwrap();
    let (_, gauss) = optimize_gaussian_strategy(&gauss_alphabet, gain, &OptimizeConfig::default())
        .map_err(|e| e.to_string())?;
    let seesaw_alphabet = Alphabet::new(3.8, 4.0, PhaseSet::Continuous { samples: 16 }).unwrap();
    let seesaw = seesaw_truncated(&seesaw_alphabet, None, gain, &SeesawConfig::default())
        .map_err(|e| e.to_string())?;
    let band_ok = gauss.value <= 0.48
        && seesaw.value <= 0.48
        && gauss.value <= seesaw.value + 1e-3
        && seesaw.truncation_tail < 1e-4;

    // flat extension of the published curve
    let env = monotone_envelope(&[(0.0, 0.62), (3.8, 0.45), (7.6, 0.47)]).unwrap();
    let envelope_ok = env == vec![(0.0, 0.62), (3.8, 0.45), (7.6, 0.45)];

    // the quantum-memory claim: the measured fidelity beats both estimates
    let memory_fidelity = average_fidelity(
        &Alphabet::experimental(3.8),
        &MemoryParams::paper_2010(),
        MomentSource::Experimental,
    )
    .map_err(|e| e.to_string())?;
    let beats_classical = memory_fidelity > gauss.value && memory_fidelity > seesaw.value;

    check(
        limit_ok && band_ok && envelope_ok && beats_classical,
        format!(
            "coherent limit {:.4} (0.50); at d=3.8 gaussian {:.4} <= seesaw {:.4} <= 0.48 (tail {:.1e}) < memory fidelity {:.4}; envelope reuses 0.45 at 7.6",
            limit.value, gauss.value, seesaw.value, seesaw.truncation_tail, memory_fidelity
        ),
    )
}

fn criterion_7_oracle_equivalence() -> Check {
    let grid = WignerGrid { extent: 18.0, resolution: 1401 };
    let mut max_diff = 0.0f64;
    for record in table1_records() {
        let closed = table1_overlap(&record).map_err(|e| e.to_string())?;
        let pure = squeezed_state(4.0, record.phi_deg, (record.mean_x_in, record.mean_p_in))
            .map_err(|e| e.to_string())?;
        let stored = stored_as_light(record.mean_pa, record.mean_xa, record.var_pa, record.var_xa);
        let integrated = wigner_overlap(&pure, &stored, &grid).map_err(|e| e.to_string())?;
        max_diff = max_diff.max((closed - integrated).abs());
    }
    // published amplitudes carry two decimals; compare at that resolution
    let amps = tms_fock(4.0, 10).map_err(|e| e.to_string())?;
    let amp_dev = [(0, 0.8), (1, 0.48), (2, 0.29), (3, 0.18)]
        .iter()
        .map(|&(n, v): &(usize, f64)| (amps.amplitudes[n].re - v).abs())
        .fold(0.0f64, f64::max);
    check(
        max_diff <= 1e-6 && amp_dev <= ROUNDED_TOL,
        format!(
            "closed form vs Wigner grid: max |diff| {max_diff:.2e} over 18 rows; photon amplitudes vs (0.8, 0.48, 0.29, 0.18): max dev {amp_dev:.4}"
        ),
    )
}

fn criterion_8_property_suites() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20100811);
    let cases = 1000;

    // symplectic invariance of the interaction map over random couplings
    for _ in 0..cases {
        let z2: f64 = 6.4;
        let params = MemoryParams {
            kappa: rng.gen_range(1e-6..1.0) * z2.sqrt(),
            ..MemoryParams::paper_2010()
        };
        interaction_map(&params)
            .and_then(|m| m.verify())
            .map_err(|e| format!("symplectic invariance: {e}"))?;
    }

    // loss composition law
    for _ in 0..cases {
        let state = squeezed_state(
            rng.gen_range(0.05..20.0),
            rng.gen_range(0.0..360.0),
            (rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0)),
        )
        .unwrap();
        let (eta1, eta2) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        let chained = apply_loss(&apply_loss(&state, 0, eta1).unwrap(), 0, eta2).unwrap();
        let direct = apply_loss(&state, 0, eta1 * eta2).unwrap();
        if (chained.cov() - direct.cov()).abs().max() > 1e-12 {
            return Err("loss composition law violated".into());
        }
    }

    // uncertainty preservation through the full storage chain
    for _ in 0..cases {
        let state = squeezed_state(
            rng.gen_range(0.2..10.0),
            rng.gen_range(0.0..360.0),
            (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)),
        )
        .unwrap();
        let stored = store_noisy(&state, &MemoryParams::paper_2010()).unwrap();
        let min_nu =
            stored.symplectic_eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min_nu < 0.5 - 1e-9 {
            return Err(format!("uncertainty violated: min eigenvalue {min_nu}"));
        }
    }

    // seesaw monotone ascent on randomized small alphabets (the objective
    // is asserted non-decreasing inside every iteration)
    for _ in 0..cases {
        let d = rng.gen_range(0.0..1.5);
        let s = rng.gen_range(1.0..4.0);
        let phases = PhaseSet::Discrete(vec![rng.gen_range(0.0..180.0)]);
        let alphabet = Alphabet::new(d, s, phases).unwrap();
        let config = SeesawConfig {
            xi_nodes_per_axis: 3,
            outcome_nodes_per_axis: 6,
            outcome_margin_sigmas: 3.0,
            max_iterations: 4,
            rel_tol: 0.0,
            seed: 7,
        };
        seesaw_truncated(&alphabet, None, rng.gen_range(0.6..1.0), &config)
            .map_err(|e| format!("seesaw ascent case failed: {e}"))?;
    }

    // deterministic reruns
    for _ in 0..cases {
        let alphabet = Alphabet::new(
            rng.gen_range(0.0..2.0),
            rng.gen_range(1.0..4.0),
            PhaseSet::Discrete(vec![0.0, 90.0]),
        )
        .unwrap();
        let memory = MemoryParams::paper_2010();
        let a = average_fidelity(&alphabet, &memory, MomentSource::Model).unwrap();
        let b = average_fidelity(&alphabet, &memory, MomentSource::Model).unwrap();
        if a.to_bits() != b.to_bits() {
            return Err("average_fidelity rerun differed".into());
        }
    }
    let tiny = Alphabet::new(0.8, 2.0, PhaseSet::Discrete(vec![0.0])).unwrap();
    let config = SeesawConfig {
        xi_nodes_per_axis: 3,
        outcome_nodes_per_axis: 6,
        outcome_margin_sigmas: 3.0,
        max_iterations: 3,
        rel_tol: 0.0,
        seed: 7,
    };
    let a = seesaw_truncated(&tiny, Some(10), 0.85, &config).unwrap();
    let b = seesaw_truncated(&tiny, Some(10), 0.85, &config).unwrap();
    if a.value.to_bits() != b.value.to_bits() {
        return Err("seesaw rerun differed".into());
    }

    // the vacuum sanity anchor for the whole suite
    if (vacuum(1).var(0) - 0.5).abs() > 0.0 {
        return Err("vacuum variance drifted".into());
    }
    Ok(format!("{cases} randomized cases per property, zero failures"))
}

type Criterion = (&'static str, fn() -> Check);

#[test]
fn acceptance() {
    let criteria: Vec<Criterion> = vec![
        ("1 stored-state table reproduction", criterion_1_table1),
        ("2 ideal-memory fidelities", criterion_2_ideal_fidelities),
        ("3 added-noise inversion", criterion_3_added_noise),
        ("4 EPR diagnostics", criterion_4_epr),
        ("5 averaged fidelity", criterion_5_average_fidelity),
        ("6 classical benchmarks", criterion_6_benchmarks),
        ("7 oracle equivalence", criterion_7_oracle_equivalence),
        ("8 property suites", criterion_8_property_suites),
    ];
    let mut failures = Vec::new();
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("acceptance {name}: PASS - {detail}"),
            Err(detail) => {
                println!("acceptance {name}: FAIL - {detail}");
                failures.push(name);
            }
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
