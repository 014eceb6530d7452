//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured numbers once its assertions hold.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion lines.

use std::collections::BTreeSet;

use esdmd::bench::{all_formats, emit_report, run_experiment, ExperimentConfig, Method, SystemKind};
use esdmd::numerics::{eig_general, frobenius};
use esdmd::snapshots::{SnapshotPair, SnapshotStream};
use esdmd::spectrum::{dynamic_spectrum, match_spectra, Spectrum};
use esdmd::systems::{kuramoto_trajectory, oscillatory_trajectory, KuramotoConfig, OscillatoryConfig};
use esdmd::{fit_batch, full_operator, EsdmdState, SdmdState};
use ndarray::{Array1, Array2, ArrayView2};
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const RANK: usize = 10;
const TOL: f64 = 1e-10;
const RCOND: f64 = 1e-12;

fn paper_oscillatory() -> Array2<f64> {
    oscillatory_trajectory(&OscillatoryConfig::default()).unwrap()
}

fn paper_kuramoto() -> Array2<f64> {
    kuramoto_trajectory(&KuramotoConfig::fully_connected(100)).unwrap()
}

fn batch_spectrum(trajectory: &Array2<f64>, rank: usize) -> Spectrum {
    let stream = SnapshotStream::from_trajectory(trajectory.clone()).unwrap();
    let (x, y) = stream.batch_matrices();
    let fit = fit_batch(&x.view(), &y.view(), rank).unwrap();
    dynamic_spectrum(&fit.basis.view(), &fit.operator.view()).unwrap()
}

fn drive_esdmd(trajectory: &Array2<f64>, rank: usize) -> EsdmdState {
    let mut iter = SnapshotStream::from_trajectory(trajectory.clone()).unwrap();
    let mut state = EsdmdState::new(&iter.next().unwrap(), rank, TOL).unwrap();
    for pair in iter {
        state.update(&pair).unwrap();
    }
    state
}

fn drive_sdmd(trajectory: &Array2<f64>, rank: usize) -> SdmdState {
    let mut iter = SnapshotStream::from_trajectory(trajectory.clone()).unwrap();
    let mut state = SdmdState::new(&iter.next().unwrap(), rank, TOL).unwrap();
    for pair in iter {
        state.update(&pair).unwrap();
    }
    state
}

fn esdmd_spectrum(state: &EsdmdState) -> Spectrum {
    let op = state.operator(RCOND).unwrap();
    dynamic_spectrum(&state.basis(), &op.view()).unwrap()
}

fn sdmd_spectrum(state: &SdmdState) -> Spectrum {
    let op = state.operator(RCOND).unwrap();
    dynamic_spectrum(&state.basis_x(), &op.view()).unwrap()
}

fn contains_frequency(spectrum: &Spectrum, target: f64, tol: f64) -> bool {
    spectrum
        .normalized_frequencies
        .iter()
        .any(|f| (f - target).abs() <= tol)
}

/// Criterion 1: on the rank-4 oscillatory protocol no compression fires,
/// so both streaming methods reproduce batch DMD's four eigenvalues to
/// 1e-6 and all three spectra contain the 3 Hz and 7 Hz lines.
#[test]
fn acceptance_1_exact_regime_spectral_equivalence() {
    let trajectory = paper_oscillatory();
    let batch = batch_spectrum(&trajectory, RANK);
    let es = esdmd_spectrum(&drive_esdmd(&trajectory, RANK));
    let sd = sdmd_spectrum(&drive_sdmd(&trajectory, RANK));

    assert_eq!(batch.len(), 4, "batch retains the numerical rank");
    assert_eq!(es.len(), 4, "esDMD basis saturates at the stream rank");
    assert_eq!(sd.len(), 4, "sDMD basis saturates at the stream rank");

    let d_es = match_spectra(&es, &batch, 4).unwrap();
    let d_sd = match_spectra(&sd, &batch, 4).unwrap();
    assert!(d_es <= 1e-6, "esDMD vs batch distance {d_es:.3e}");
    assert!(d_sd <= 1e-6, "sDMD vs batch distance {d_sd:.3e}");

    let f1 = 3.0 / 60.0;
    let f2 = 7.0 / 60.0;
    for (name, s) in [("dmd", &batch), ("sdmd", &sd), ("esdmd", &es)] {
        assert!(contains_frequency(s, f1, 1e-6), "{name} misses {f1}");
        assert!(contains_frequency(s, f2, 1e-6), "{name} misses {f2}");
    }

    println!(
        "ACCEPTANCE 1 PASS: exact-regime equivalence; esdmd-batch {d_es:.2e}, \
         sdmd-batch {d_sd:.2e}, frequencies {{{f1:.4}, {f2:.4}}} present in all spectra"
    );
}

/// Criterion 2: on the Kuramoto protocol (compression active) the top-5
/// esDMD eigenvalues stay within 0.05 of batch DMD's.
#[test]
fn acceptance_2_compression_regime_agreement() {
    let trajectory = paper_kuramoto();
    let batch = batch_spectrum(&trajectory, RANK);
    let es = esdmd_spectrum(&drive_esdmd(&trajectory, RANK));

    let distance = match_spectra(&es, &batch, 5).unwrap();
    assert!(
        distance <= 0.05,
        "top-5 esDMD vs batch distance {distance:.4} exceeds 0.05"
    );
    println!("ACCEPTANCE 2 PASS: Kuramoto top-5 esdmd-batch distance {distance:.4} <= 0.05");
}

/// Criterion 3: mean per-iteration update time of esDMD is strictly below
/// sDMD's on both benchmark systems (single-threaded, same backend).
#[test]
fn acceptance_3_esdmd_is_faster_per_iteration() {
    for system in [SystemKind::Oscillatory, SystemKind::Kuramoto] {
        let cfg = ExperimentConfig {
            system: system.clone(),
            methods: vec![Method::Sdmd, Method::Esdmd],
            repeats: 3,
            ..Default::default()
        };
        let report = run_experiment(&cfg).unwrap();
        assert_eq!(report.pair_count, 1200);
        let sd = report.result(Method::Sdmd).unwrap().timing.clone().unwrap();
        let es = report.result(Method::Esdmd).unwrap().timing.clone().unwrap();
        assert!(
            es.mean_us < sd.mean_us,
            "{system:?}: esDMD mean {:.2} us not below sDMD mean {:.2} us",
            es.mean_us,
            sd.mean_us
        );
        assert!(
            es.single_pass_mean_us < sd.single_pass_mean_us,
            "{system:?}: single-pass means out of order"
        );
        println!(
            "ACCEPTANCE 3 PASS: {system:?} mean per-iteration esdmd {:.2} us vs sdmd {:.2} us \
             (ratio {:.2}x, single-pass ratio {:.2}x)",
            es.mean_us,
            sd.mean_us,
            sd.mean_us / es.mean_us,
            sd.single_pass_mean_us / es.single_pass_mean_us
        );
    }
}

fn orthonormality_defect(q: &ArrayView2<'_, f64>) -> f64 {
    let k = q.ncols();
    frobenius(&(&q.t().dot(q) - &Array2::<f64>::eye(k)).view())
}

fn relative_asymmetry(g: &ArrayView2<'_, f64>) -> f64 {
    let scale = frobenius(g);
    if scale == 0.0 {
        return 0.0;
    }
    frobenius(&(g - &g.t()).view()) / scale
}

/// Criterion 4: structural invariants hold after every update of both
/// streaming methods on both systems: orthonormal bases, symmetric Gram
/// accumulators, capped basis width, and Gram-trace consistency with the
/// accumulated projected energy between compressions.
#[test]
fn acceptance_4_invariant_suite() {
    let mut updates_checked = 0usize;
    for trajectory in [paper_oscillatory(), paper_kuramoto()] {
        // esDMD
        {
            let mut iter = SnapshotStream::from_trajectory(trajectory.clone()).unwrap();
            let first = iter.next().unwrap();
            let mut state = EsdmdState::new(&first, RANK, TOL).unwrap();
            let mut expected_trace = state.basis().t().dot(&first.x).mapv(|v| v * v).sum();
            for pair in iter {
                let out = state.update(&pair).unwrap();
                assert!(orthonormality_defect(&state.basis()) <= 1e-10);
                assert!(relative_asymmetry(&state.gram_x()) <= 1e-12);
                assert!(relative_asymmetry(&state.gram_y()) <= 1e-12);
                assert!(state.basis().ncols() <= RANK);
                let trace: f64 = state.gram_x().diag().sum();
                if out.compressed {
                    expected_trace = trace;
                } else {
                    expected_trace += state.basis().t().dot(&pair.x).mapv(|v| v * v).sum();
                    assert!(
                        (trace - expected_trace).abs() <= 1e-8 * expected_trace.max(1.0),
                        "esDMD trace drift {:.3e}",
                        (trace - expected_trace).abs()
                    );
                    expected_trace = trace;
                }
                updates_checked += 1;
            }
        }
        // sDMD
        {
            let mut iter = SnapshotStream::from_trajectory(trajectory.clone()).unwrap();
            let first = iter.next().unwrap();
            let mut state = SdmdState::new(&first, RANK, TOL).unwrap();
            let mut expected_trace = state.basis_x().t().dot(&first.x).mapv(|v| v * v).sum();
            for pair in iter {
                let out = state.update(&pair).unwrap();
                assert!(orthonormality_defect(&state.basis_x()) <= 1e-10);
                assert!(orthonormality_defect(&state.basis_y()) <= 1e-10);
                assert!(relative_asymmetry(&state.gram_x()) <= 1e-12);
                assert!(relative_asymmetry(&state.gram_y()) <= 1e-12);
                assert!(state.basis_x().ncols() <= RANK);
                assert!(state.basis_y().ncols() <= RANK);
                let trace: f64 = state.gram_x().diag().sum();
                if out.compressed_x {
                    expected_trace = trace;
                } else {
                    expected_trace += state.basis_x().t().dot(&pair.x).mapv(|v| v * v).sum();
                    assert!(
                        (trace - expected_trace).abs() <= 1e-8 * expected_trace.max(1.0),
                        "sDMD trace drift {:.3e}",
                        (trace - expected_trace).abs()
                    );
                    expected_trace = trace;
                }
                updates_checked += 1;
            }
        }
    }
    println!("ACCEPTANCE 4 PASS: invariants held across {updates_checked} streaming updates");
}

fn filtered_nonzero(values: &[Complex64], cutoff: f64) -> Vec<Complex64> {
    values.iter().copied().filter(|z| z.norm() > cutoff).collect()
}

fn nearest_distance(target: Complex64, pool: &[Complex64]) -> f64 {
    pool.iter()
        .map(|z| (z - target).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Criterion 5: on 50 seeded random linear systems small enough for the
/// full-space oracle, the nonzero eigenvalues of the esDMD reduced
/// operator match `Y X^+` at every step to 1e-8.
#[test]
fn acceptance_5_small_scale_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut steps_checked = 0usize;
    for _ in 0..50 {
        let n = rng.random_range(2..=6);
        let k = rng.random_range(4..=20);
        let raw = Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0));
        let radius = eig_general(&raw.view())
            .unwrap()
            .values
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
            .max(1e-3);
        let map = raw.mapv(|v| 0.95 * v / radius);
        let mut x = Array1::from_shape_fn(n, |_| rng.random_range(-1.0..1.0));
        let mut cols = vec![x.clone()];
        for _ in 0..k {
            x = map.dot(&x);
            cols.push(x.clone());
        }
        let views: Vec<_> = cols.iter().map(|c| c.view()).collect();
        let t = ndarray::stack(ndarray::Axis(1), &views).unwrap();

        let stream = SnapshotStream::from_trajectory(t).unwrap();
        let mut iter = stream.clone();
        let mut state = EsdmdState::new(&iter.next().unwrap(), n.max(2), TOL).unwrap();
        let (x_full, y_full) = stream.batch_matrices();
        let mut step = 1;
        loop {
            let x_k = x_full.slice(ndarray::s![.., ..step]).to_owned();
            let y_k = y_full.slice(ndarray::s![.., ..step]).to_owned();
            let full = full_operator(&x_k.view(), &y_k.view()).unwrap();
            let full_eigs = eig_general(&full.view()).unwrap().values;
            let reduced = state.operator(RCOND).unwrap();
            let reduced_eigs = eig_general(&reduced.view()).unwrap().values;

            let scale = full_eigs.iter().map(|z| z.norm()).fold(1.0, f64::max);
            let cutoff = 1e-6 * scale;
            for lam in filtered_nonzero(&full_eigs, cutoff) {
                let d = nearest_distance(lam, &reduced_eigs);
                assert!(d <= 1e-8, "full eigenvalue {lam} unmatched ({d:.2e}) at step {step}");
            }
            for lam in filtered_nonzero(&reduced_eigs, cutoff) {
                let d = nearest_distance(lam, &full_eigs);
                assert!(d <= 1e-8, "reduced eigenvalue {lam} unmatched ({d:.2e}) at step {step}");
            }
            steps_checked += 1;

            match iter.next() {
                Some(pair) => {
                    state.update(&pair).unwrap();
                    step += 1;
                }
                None => break,
            }
        }
    }
    println!("ACCEPTANCE 5 PASS: oracle equivalence at {steps_checked} steps over 50 systems");
}

/// Criterion 6: on streams whose total rank stays at or below the cap,
/// the single basis reconstructs every historical snapshot at every step.
#[test]
fn acceptance_6_span_covers_history() {
    let cfg = OscillatoryConfig {
        state_dim: 30,
        ..Default::default()
    };
    let trajectory = oscillatory_trajectory(&cfg).unwrap();
    let stream = SnapshotStream::from_trajectory(trajectory.clone()).unwrap();
    let mut iter = stream.clone();
    let first = iter.next().unwrap();
    let mut state = EsdmdState::new(&first, RANK, TOL).unwrap();

    let mut checked = 0usize;
    let mut step = 1;
    loop {
        // All snapshots seen so far are the first step+1 trajectory
        // columns (x_1..x_k plus y_k).
        let seen = trajectory.slice(ndarray::s![.., ..step + 1]);
        let q = state.basis();
        let projected = q.dot(&q.t().dot(&seen));
        for (j, col) in seen.columns().into_iter().enumerate() {
            let res_sq: f64 = col
                .iter()
                .zip(projected.column(j).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let norm_sq: f64 = col.iter().map(|v| v * v).sum();
            assert!(
                res_sq.sqrt() <= 1e-8 * norm_sq.sqrt(),
                "column {j} not reconstructed at step {step}"
            );
            checked += 1;
        }
        match iter.next() {
            Some(pair) => {
                state.update(&pair).unwrap();
                step += 1;
            }
            None => break,
        }
    }
    println!("ACCEPTANCE 6 PASS: {checked} historical reconstructions within 1e-8");
}

/// Criterion 7: identical config and seed produce bit-identical spectrum
/// CSV files.
#[test]
fn acceptance_7_determinism_of_spectrum_outputs() {
    let cfg = ExperimentConfig {
        methods: vec![Method::Dmd, Method::Sdmd, Method::Esdmd],
        repeats: 1,
        ..Default::default()
    };
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let formats: BTreeSet<_> = all_formats();
    emit_report(&run_experiment(&cfg).unwrap(), dir_a.path(), &formats).unwrap();
    emit_report(&run_experiment(&cfg).unwrap(), dir_b.path(), &formats).unwrap();

    for name in ["spectrum_dmd.csv", "spectrum_sdmd.csv", "spectrum_esdmd.csv"] {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
        assert!(!a.is_empty());
    }
    println!("ACCEPTANCE 7 PASS: spectrum CSVs bit-identical across reruns");
}

/// Supporting check for the exact regime: the two streaming methods agree
/// with each other, not only with batch.
#[test]
fn streaming_methods_agree_in_exact_regime() {
    let trajectory = paper_oscillatory();
    let es = esdmd_spectrum(&drive_esdmd(&trajectory, RANK));
    let sd = sdmd_spectrum(&drive_sdmd(&trajectory, RANK));
    let d = match_spectra(&es, &sd, es.len().min(sd.len())).unwrap();
    assert!(d <= 1e-8, "esDMD vs sDMD distance {d:.3e}");
}

/// The checkpoint interface survives a full benchmark stream.
#[test]
fn checkpoint_mid_protocol_resumes_exactly() {
    let trajectory = paper_oscillatory();
    let pairs: Vec<SnapshotPair> = SnapshotStream::from_trajectory(trajectory).unwrap().collect();
    let mut state = EsdmdState::new(&pairs[0], RANK, TOL).unwrap();
    for pair in &pairs[1..600] {
        state.update(pair).unwrap();
    }
    let blob = state.checkpoint_json().unwrap();
    let mut resumed = EsdmdState::from_checkpoint_json(&blob).unwrap();
    for pair in &pairs[600..] {
        state.update(pair).unwrap();
        resumed.update(pair).unwrap();
    }
    let a = state.operator(RCOND).unwrap();
    let b = resumed.operator(RCOND).unwrap();
    assert_eq!(a, b);
}
