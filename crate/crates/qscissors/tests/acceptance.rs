//! Acceptance suite: one test per acceptance criterion, each printing a
//! single PASS/FAIL line (visible with `--nocapture`, and always visible
//! on failure). Tolerances are pinned here, next to each criterion.
//!
//! Criterion 1 is expected to fail one sub-assertion: the reported
//! starting boundary 0.06 µs for the single-pump dX2_2 window cannot be
//! reproduced by any path in this crate — the trace departs the 1/4
//! threshold tangentially at t = 0 (deficit ~ (alpha t)^4 / 8), so the
//! refined boundary collapses to the origin. The assertion is kept
//! faithful rather than widened.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qscissors::analysis::{
    detect_windows, rwa_validation, scan_variances, Quadrature, SqueezingWindow, VarianceSource,
};
use qscissors::cli::{FigureId, FIGURE_COUPLING};
use qscissors::dynamics::{integrate_ode, AnalyticModel, Propagator};
use qscissors::fock::{build_hamiltonian, FockBasis, StateVector, SystemSpec};
use qscissors::observables::{
    quadrature_variances, reconcile_printed_formulas, Verdict, VACUUM_VARIANCE,
};

const WINDOW_TOL_US: f64 = 0.05;
const REFINE_TOL_US: f64 = 1e-4;
const DT_US: f64 = 0.01;

struct Criterion {
    label: &'static str,
    failures: Vec<String>,
    subchecks: usize,
}

impl Criterion {
    fn new(label: &'static str) -> Self {
        Self {
            label,
            failures: Vec::new(),
            subchecks: 0,
        }
    }

    fn check(&mut self, ok: bool, detail: impl FnOnce() -> String) {
        self.subchecks += 1;
        if !ok {
            self.failures.push(detail());
        }
    }

    fn finish(self) {
        if self.failures.is_empty() {
            println!("acceptance {}: PASS ({} checks)", self.label, self.subchecks);
        } else {
            let mut msg = format!(
                "acceptance {}: FAIL ({}/{} checks failed)",
                self.label,
                self.failures.len(),
                self.subchecks
            );
            for f in &self.failures {
                let _ = write!(msg, "\n    {f}");
            }
            println!("{msg}");
            panic!("{msg}");
        }
    }
}

fn real_spec(epsilon: f64, pumps: &[f64]) -> SystemSpec {
    SystemSpec::new(
        vec![0.0; pumps.len()],
        num_complex::Complex64::new(epsilon, 0.0),
        pumps
            .iter()
            .map(|&p| num_complex::Complex64::new(p, 0.0))
            .collect(),
    )
    .unwrap()
}

fn windows_for(
    windows: &[SqueezingWindow],
    mode: usize,
    quadrature: Quadrature,
) -> Vec<&SqueezingWindow> {
    windows
        .iter()
        .filter(|w| w.mode == mode && w.quadrature == quadrature)
        .collect()
}

fn check_window_list(
    crit: &mut Criterion,
    windows: &[SqueezingWindow],
    mode: usize,
    quadrature: Quadrature,
    expected: &[(f64, f64)],
) {
    let got = windows_for(windows, mode, quadrature);
    crit.check(got.len() == expected.len(), || {
        format!(
            "mode {mode} {quadrature}: expected {} windows, found {}: {:?}",
            expected.len(),
            got.len(),
            got.iter()
                .map(|w| (w.t_start_us, w.t_end_us))
                .collect::<Vec<_>>()
        )
    });
    for (k, &(start, end)) in expected.iter().enumerate() {
        if let Some(w) = got.get(k) {
            crit.check((w.t_start_us - start).abs() <= WINDOW_TOL_US, || {
                format!(
                    "mode {mode} {quadrature} window {k}: start {:.4} vs expected {start} (tol {WINDOW_TOL_US})",
                    w.t_start_us
                )
            });
            crit.check((w.t_end_us - end).abs() <= WINDOW_TOL_US, || {
                format!(
                    "mode {mode} {quadrature} window {k}: end {:.4} vs expected {end} (tol {WINDOW_TOL_US})",
                    w.t_end_us
                )
            });
        }
    }
}

/// 1: single-pump two-mode window reproduction on the amplitude path.
#[test]
fn criterion_1_single_pump_windows() {
    let started = Instant::now();
    let mut crit = Criterion::new("1 (single-pump windows, amplitude path)");
    let source = VarianceSource::Closed(AnalyticModel::TwoModeSinglePump {
        alpha: FIGURE_COUPLING,
    });
    let series = scan_variances(&source, 5.0, DT_US).unwrap();
    let windows = detect_windows(&source, &series, VACUUM_VARIANCE, REFINE_TOL_US).unwrap();

    check_window_list(&mut crit, &windows, 2, Quadrature::X, &[(0.06, 2.37)]);
    if let Some(w) = windows_for(&windows, 2, Quadrature::X).first() {
        crit.check((w.t_min_us - 1.83).abs() <= WINDOW_TOL_US, || {
            format!("dX2_2 minimum at {:.4} vs expected 1.83", w.t_min_us)
        });
    }
    check_window_list(&mut crit, &windows, 1, Quadrature::Y, &[(0.0, 1.74)]);
    if let Some(w) = windows_for(&windows, 1, Quadrature::Y).first() {
        crit.check((w.t_min_us - 1.08).abs() <= WINDOW_TOL_US, || {
            format!("dY2_1 minimum at {:.4} vs expected 1.08", w.t_min_us)
        });
    }
    let elapsed = started.elapsed();
    crit.check(elapsed.as_secs_f64() < 5.0, || {
        format!("runtime {elapsed:?} exceeded 5 s")
    });
    crit.finish();
}

/// 2: two-pump two-mode window reproduction. The published two-pump
/// curves come from the corrected published variance expressions; the
/// amplitude path of the equal-pump model is mode-symmetric and cannot
/// produce the mode-distinct windows quoted here.
#[test]
fn criterion_2_two_pump_windows() {
    let started = Instant::now();
    let mut crit = Criterion::new("2 (two-pump windows, published-formula path)");
    let source = VarianceSource::PublishedTwoPump {
        alpha: FIGURE_COUPLING,
        epsilon: FIGURE_COUPLING,
    };
    let series = scan_variances(&source, 10.0, DT_US).unwrap();
    let windows = detect_windows(&source, &series, VACUUM_VARIANCE, REFINE_TOL_US).unwrap();

    check_window_list(
        &mut crit,
        &windows,
        1,
        Quadrature::X,
        &[(5.42, 6.10), (6.56, 6.84)],
    );
    check_window_list(
        &mut crit,
        &windows,
        2,
        Quadrature::X,
        &[(2.80, 3.06), (5.58, 6.10), (8.78, 9.16)],
    );
    check_window_list(
        &mut crit,
        &windows,
        1,
        Quadrature::Y,
        &[(0.0, 1.42), (5.68, 6.10)],
    );
    check_window_list(
        &mut crit,
        &windows,
        2,
        Quadrature::Y,
        &[(2.66, 3.06), (5.82, 6.10), (8.84, 9.16)],
    );
    if let Some(w) = windows_for(&windows, 1, Quadrature::X).first() {
        crit.check((w.t_min_us - 5.70).abs() <= WINDOW_TOL_US, || {
            format!("dX2_1 minimum at {:.4} vs expected 5.70", w.t_min_us)
        });
    }
    if let Some(w) = windows_for(&windows, 1, Quadrature::Y).first() {
        crit.check((w.t_min_us - 0.94).abs() <= WINDOW_TOL_US, || {
            format!("dY2_1 minimum at {:.4} vs expected 0.94", w.t_min_us)
        });
    }
    let elapsed = started.elapsed();
    crit.check(elapsed.as_secs_f64() < 10.0, || {
        format!("runtime {elapsed:?} exceeded 10 s")
    });
    crit.finish();
}

/// 3: the unpumped coupler never squeezes.
#[test]
fn criterion_3_no_pump_null_result() {
    let mut crit = Criterion::new("3 (no-pump null result)");
    let source = VarianceSource::Closed(AnalyticModel::TwoModeNoPump {
        epsilon: FIGURE_COUPLING,
    });
    for (t_max, dt) in [(20.0, 0.01), (20.0, 0.037), (7.3, 0.004)] {
        let series = scan_variances(&source, t_max, dt).unwrap();
        let windows = detect_windows(&source, &series, VACUUM_VARIANCE, REFINE_TOL_US).unwrap();
        crit.check(windows.is_empty(), || {
            format!("grid (t_max={t_max}, dt={dt}): found {} windows", windows.len())
        });
        for m in 0..2 {
            for q in [Quadrature::X, Quadrature::Y] {
                let min = series
                    .trace(m, q)
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min);
                crit.check(min >= VACUUM_VARIANCE - 1e-12, || {
                    format!("trace mode {} {q} dips to {min}", m + 1)
                });
            }
        }
    }
    crit.finish();
}

/// 4: closed-form amplitude sets stay normalized at random times.
#[test]
fn criterion_4_closed_form_normalization() {
    let mut crit = Criterion::new("4 (closed-form normalization)");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let models = [
        AnalyticModel::TwoModeSinglePump { alpha: FIGURE_COUPLING },
        AnalyticModel::TwoModeTwoPump {
            alpha: FIGURE_COUPLING,
            epsilon: FIGURE_COUPLING,
        },
        AnalyticModel::ThreeModeSymmetric { epsilon: FIGURE_COUPLING },
        AnalyticModel::TwoModeNoPump { epsilon: FIGURE_COUPLING },
    ];
    for model in models {
        let mut worst = 0.0f64;
        for _ in 0..10_000 {
            let t = rng.gen_range(0.0..20.0e-6);
            let n: f64 = model.qubit_amplitudes(t).iter().map(|c| c.norm_sqr()).sum();
            worst = worst.max((n - 1.0).abs());
        }
        crit.check(worst <= 1e-12, || {
            format!("{model:?}: worst norm deviation {worst:.3e}")
        });
    }
    crit.finish();
}

/// 5: analytic and numeric paths agree.
#[test]
fn criterion_5_oracle_equivalence() {
    let mut crit = Criterion::new("5 (analytic vs numeric oracle equivalence)");

    // truncated amplitude equations vs the symmetric three-mode closed form
    let eps = FIGURE_COUPLING;
    let basis = FockBasis::new(3, 1).unwrap();
    let h = build_hamiltonian(&real_spec(eps, &[eps, eps, eps]), &basis).unwrap();
    let psi0 = StateVector::vacuum(basis);
    let times: Vec<f64> = (0..=200).map(|k| k as f64 * 0.1e-6).collect();
    let states = integrate_ode(&h, &psi0, &times, 1e-10).unwrap();
    let model = AnalyticModel::ThreeModeSymmetric { epsilon: eps };
    let mut worst = 0.0f64;
    for (state, &t) in states.iter().zip(&times) {
        for (idx, want) in model.qubit_amplitudes(t).into_iter().enumerate() {
            worst = worst.max((state.amplitudes()[idx] - want).norm());
        }
    }
    crit.check(worst <= 1e-8, || {
        format!("three-mode ODE vs closed form: max deviation {worst:.3e}")
    });

    // spectral propagator vs the no-pump closed form
    let basis = FockBasis::new(2, 1).unwrap();
    let h = build_hamiltonian(&real_spec(eps, &[0.0, 0.0]), &basis).unwrap();
    let psi0 = StateVector::fock_state(basis, &[1, 0]).unwrap();
    let prop = Propagator::new(&h);
    let model = AnalyticModel::TwoModeNoPump { epsilon: eps };
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let t = 20.0e-6 * k as f64 / 999.0;
        let state = prop.evolve(&psi0, t).unwrap();
        for (idx, want) in model.qubit_amplitudes(t).into_iter().enumerate() {
            worst = worst.max((state.amplitudes()[idx] - want).norm());
        }
    }
    crit.check(worst <= 1e-10, || {
        format!("spectral vs no-pump closed form: max deviation {worst:.3e}")
    });
    crit.finish();
}

/// 6: published variance expressions reconciled against the amplitude
/// path; every expression either matches (possibly after the documented
/// single-term corrections) or is flagged irrecoverable.
#[test]
fn criterion_6_printed_formula_reconciliation() {
    let mut crit = Criterion::new("6 (published-formula reconciliation)");
    let report =
        reconcile_printed_formulas(FIGURE_COUPLING, FIGURE_COUPLING, 10.0e-6, 1000, 1e-9)
            .unwrap();
    print!("{report}");
    crit.check(report.all_matched_or_flagged(), || {
        "report missing".to_string()
    });
    for check in &report.checks {
        match check.verdict {
            Verdict::MatchesAsPublished => crit.check(check.max_dev_published <= 1e-9, || {
                format!("{}: published deviation {:.3e}", check.expression, check.max_dev_published)
            }),
            Verdict::MatchesCorrected => crit.check(check.max_dev_corrected <= 1e-9, || {
                format!("{}: corrected deviation {:.3e}", check.expression, check.max_dev_corrected)
            }),
            Verdict::IrrecoverableAsPublished => {
                // flagged and documented; the two-pump expressions are
                // mode-asymmetric while the amplitude path is symmetric
                crit.check(check.expression.starts_with("two_pump"), || {
                    format!("{}: unexpectedly irrecoverable", check.expression)
                });
            }
        }
    }
    // the four single-pump expressions must all be matched
    let matched = report
        .checks
        .iter()
        .filter(|c| c.verdict != Verdict::IrrecoverableAsPublished)
        .count();
    crit.check(matched == 4, || format!("expected 4 matched expressions, got {matched}"));
    crit.finish();
}

fn parse_windows_csv(text: &str) -> Vec<(usize, String, [f64; 4])> {
    text.lines()
        .skip(1)
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            (
                f[0].parse().unwrap(),
                f[1].to_string(),
                [
                    f[2].parse().unwrap(),
                    f[3].parse().unwrap(),
                    f[4].parse().unwrap(),
                    f[5].parse().unwrap(),
                ],
            )
        })
        .collect()
}

/// 7: figure 2/3 degeneracies, the all-pump qualitative squeezing claim,
/// and regression against frozen golden window files.
#[test]
fn criterion_7_three_mode_properties() {
    let mut crit = Criterion::new("7 (three-mode degeneracies and golden regression)");
    let eps = FIGURE_COUPLING;

    // spectral truncated sources: per-time-point evaluation keeps the
    // physical mode symmetry at rounding level, with no step accumulation
    let spectral = |pumps: &[f64], label: &str| {
        let basis = FockBasis::new(3, 1).unwrap();
        let h = build_hamiltonian(&real_spec(eps, pumps), &basis).unwrap();
        let psi0 = StateVector::vacuum(basis.clone());
        VarianceSource::spectral(&h, psi0, label)
    };

    let cases: [(&str, Vec<f64>, Vec<(usize, usize)>); 3] = [
        ("fig2a", vec![eps, 0.0, 0.0], vec![(1, 2)]),
        ("fig2b", vec![eps, eps, 0.0], vec![(0, 1)]),
        ("fig3", vec![eps, eps, eps], vec![(0, 1), (1, 2)]),
    ];
    for (name, pumps, pairs) in &cases {
        let source = spectral(pumps, name);
        let series = scan_variances(&source, 20.0, DT_US).unwrap();
        for &(a, b) in pairs {
            let mut worst = 0.0f64;
            for k in 0..series.len() {
                worst = worst
                    .max((series.dx2[a][k] - series.dx2[b][k]).abs())
                    .max((series.dy2[a][k] - series.dy2[b][k]).abs());
            }
            crit.check(worst <= 1e-12, || {
                format!("{name}: modes {}/{} split by {worst:.3e}", a + 1, b + 1)
            });
        }
        if *name == "fig3" {
            let windows =
                detect_windows(&source, &series, VACUUM_VARIANCE, REFINE_TOL_US).unwrap();
            for mode in 1..=3 {
                crit.check(
                    windows
                        .iter()
                        .any(|w| w.mode == mode && w.quadrature == Quadrature::Y),
                    || format!("three pumps: no Y window on mode {mode}"),
                );
            }
        }
    }

    // golden regression: freeze this implementation's own windows
    let golden_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for id in [FigureId::Fig2a, FigureId::Fig2b, FigureId::Fig3] {
        let dir = tempfile::tempdir().unwrap();
        let paths = qscissors::cli::run_figure(id, dir.path(), DT_US).unwrap();
        let windows_path = paths
            .iter()
            .find(|p| p.file_name().unwrap().to_str().unwrap().contains("windows"))
            .unwrap();
        let produced = parse_windows_csv(&std::fs::read_to_string(windows_path).unwrap());
        let golden_file = golden_dir.join(format!("{}_windows.csv", id.stem()));
        let golden = parse_windows_csv(&std::fs::read_to_string(&golden_file).unwrap_or_else(
            |_| panic!("missing golden file {}", golden_file.display()),
        ));
        crit.check(produced.len() == golden.len(), || {
            format!(
                "{}: {} windows vs {} frozen",
                id.stem(),
                produced.len(),
                golden.len()
            )
        });
        for (p, g) in produced.iter().zip(&golden) {
            let same = p.0 == g.0
                && p.1 == g.1
                && p.2.iter().zip(&g.2).all(|(a, b)| (a - b).abs() <= 1e-9);
            crit.check(same, || format!("{}: window drifted: {p:?} vs {g:?}", id.stem()));
        }
    }
    crit.finish();
}

/// 8: qubit-truncation quality improves monotonically with chi/epsilon.
#[test]
fn criterion_8_rwa_monotone_validation() {
    let started = Instant::now();
    let mut crit = Criterion::new("8 (truncation validation sweep)");
    let eps = FIGURE_COUPLING;
    let spec = SystemSpec::new(
        vec![1e8, 1e8],
        num_complex::Complex64::new(eps, 0.0),
        vec![
            num_complex::Complex64::new(eps, 0.0),
            num_complex::Complex64::new(0.0, 0.0),
        ],
    )
    .unwrap();
    let reports = rwa_validation(&spec, 4, 10.0, &[50.0, 200.0, 1000.0]).unwrap();
    for r in &reports {
        println!(
            "  chi/eps {:>6}: leakage {:.3e}, amplitude deviation {:.3e}{}",
            r.chi_ratio,
            r.max_leakage,
            r.max_amplitude_deviation,
            if r.cutoff_flagged { " (cutoff flagged)" } else { "" }
        );
    }
    for pair in reports.windows(2) {
        crit.check(pair[0].max_leakage > pair[1].max_leakage, || {
            format!(
                "leakage not decreasing: {:.3e} -> {:.3e}",
                pair[0].max_leakage, pair[1].max_leakage
            )
        });
        crit.check(
            pair[0].max_amplitude_deviation > pair[1].max_amplitude_deviation,
            || {
                format!(
                    "deviation not decreasing: {:.3e} -> {:.3e}",
                    pair[0].max_amplitude_deviation, pair[1].max_amplitude_deviation
                )
            },
        );
    }
    crit.check(!reports.iter().any(|r| r.cutoff_flagged), || {
        "cutoff 4 cannot bound the leakage".to_string()
    });
    let elapsed = started.elapsed();
    crit.check(elapsed.as_secs_f64() < 60.0, || {
        format!("runtime {elapsed:?} exceeded 60 s")
    });
    crit.finish();
}

/// 9: elementary variance values.
#[test]
fn criterion_9_variance_unit_values() {
    let mut crit = Criterion::new("9 (elementary variance values)");

    let vacuum = StateVector::vacuum(FockBasis::new(2, 2).unwrap());
    let v = quadrature_variances(&vacuum).unwrap();
    for (k, val) in v.dx2.iter().chain(&v.dy2).enumerate() {
        crit.check((val - 0.25).abs() <= 1e-15, || {
            format!("vacuum variance #{k} = {val} (expected exactly 1/4)")
        });
    }

    let one = StateVector::fock_state(FockBasis::new(2, 1).unwrap(), &[1, 0]).unwrap();
    let v = quadrature_variances(&one).unwrap();
    crit.check((v.dx2[0] - 0.75).abs() <= 1e-12, || format!("dX2_1 = {}", v.dx2[0]));
    crit.check((v.dy2[0] - 0.75).abs() <= 1e-12, || format!("dY2_1 = {}", v.dy2[0]));

    let basis = FockBasis::new(1, 1).unwrap();
    let amps = nalgebra::DVector::from_vec(vec![
        num_complex::Complex64::new(3.0f64.sqrt() / 2.0, 0.0),
        num_complex::Complex64::new(0.5, 0.0),
    ]);
    let state = StateVector::new(basis, amps).unwrap();
    let v = quadrature_variances(&state).unwrap();
    crit.check((v.dx2[0] - 3.0 / 16.0).abs() <= 1e-12, || {
        format!("superposition dX2 = {} (expected 3/16)", v.dx2[0])
    });
    crit.finish();
}
