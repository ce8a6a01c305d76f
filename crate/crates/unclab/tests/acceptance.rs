//! Acceptance suite. Each test prints one `PASS criterion N` line (run with
//! `--nocapture` to see them on success); a failing criterion prints `FAIL`
//! and panics with the offending assertion.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use unclab::cones::{
    classify, max_membership, min_violation_search, CompletionCertificate, ConeStatus, RunConfig,
};
use unclab::correlations::{
    identity_tuple, npa_check, sample_ucq, tuple_convex_combine, Letter, NpaVerdict,
};
use unclab::dilation::{retract_diag, rfd_compression, unitary_dilation};
use unclab::linalg::{
    ginibre, herm_eig, operator_norm, random_contraction, random_unitary, ComplexMatrix, RngState,
};
use unclab::opsys::{
    choi_of_phi, functional_eval, phi_apply, state_negativity_witness, vn_state_check,
    QuotientRep, VnElement,
};
use unclab::Complex64;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn criterion(number: u32, label: &str, budget_secs: f64, body: impl FnOnce()) {
    let started = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let elapsed = started.elapsed().as_secs_f64();
    match outcome {
        Ok(()) if elapsed <= budget_secs => {
            println!("PASS criterion {number}: {label} ({elapsed:.1}s of {budget_secs:.0}s budget)");
        }
        Ok(()) => {
            println!("FAIL criterion {number}: {label} (runtime {elapsed:.1}s exceeds {budget_secs:.0}s)");
            panic!("criterion {number} exceeded its runtime budget");
        }
        Err(cause) => {
            println!("FAIL criterion {number}: {label} ({elapsed:.1}s)");
            std::panic::resume_unwind(cause);
        }
    }
}

/// Completion-generated element: draw a PSD `R`, read the element off its
/// blocks. Feasible at eps = 0 by construction.
fn completion_generated(n: usize, p: usize, rng: &mut RngState) -> VnElement {
    let d = 2 * n * p;
    let g = ginibre(d, rng);
    let r = g.adjoint().matmul(&g).scale_re(1.0 / d as f64).hermitize();
    phi_apply(&QuotientRep::new(n, p, r).expect("valid lift"))
}

#[test]
fn criterion_1_dilation_soundness() {
    criterion(1, "dilation soundness on 10^4 random contractions", 30.0, || {
        let master = RngState::new(0xD11A);
        for trial in 0..10_000u64 {
            let size = (trial as usize % 16) + 1;
            let mut rng = master.derive(trial);
            let t = random_contraction(size, 1, &mut rng).expect("sample");
            let v = unitary_dilation(&t).expect("dilate");
            let residual = v
                .adjoint()
                .matmul(&v)
                .sub(&ComplexMatrix::identity(2 * size))
                .frobenius_norm();
            assert!(
                residual <= 1e-9,
                "unitarity residual {residual:.3e} at size {size}, trial {trial}"
            );
            assert!(
                v.block(0, 0, size, size).bit_eq(&t),
                "corner recovery not exact at trial {trial}"
            );
        }
    });
}

#[test]
fn criterion_2_phi_is_ucp() {
    criterion(2, "Choi matrix of the quotient map is PSD", 5.0, || {
        let master = RngState::new(0xC407);
        for n in 2..=4usize {
            for trial in 0..20u64 {
                let d = (trial as usize % 3) + 1;
                let mut rng = master.derive((n as u64) << 32 | trial);
                let u = random_unitary(n * d, &mut rng).expect("haar");
                let choi = choi_of_phi(n, Some(&u)).expect("choi");
                let lam = herm_eig(&choi).expect("eig").lambda_min();
                assert!(
                    lam >= -1e-10,
                    "negative eigenvalue {lam:.3e} at n={n}, trial {trial}"
                );
            }
        }
    });
}

#[test]
fn criterion_3_and_4_completion_oracle_and_mutual_exclusion() {
    criterion(
        3,
        "completion-generated elements re-certify and draw no violation",
        600.0,
        || {
            let cfg = RunConfig {
                eps: 1e-9,
                r_max: Some(4),
                starts: 16,
                seed: 0x0C0E,
                check_mutual_exclusion: true,
                ..RunConfig::default()
            };
            let master = RngState::new(0xACC3);
            let mut failures = 0u32;
            for trial in 0..200u64 {
                let p = if trial % 2 == 0 { 1 } else { 2 };
                let mut rng = master.derive(trial);
                let x = completion_generated(2, p, &mut rng);
                let verdict = classify(&x, &cfg).expect("classify");
                if verdict.status != ConeStatus::InMax {
                    failures += 1;
                    continue;
                }
                let cert = verdict.completion.expect("certificate present");
                assert!((cert.eps - 1e-9).abs() < 1e-18);
                cert.verify(&x).expect("certificate re-verifies");
            }
            assert_eq!(failures, 0, "{failures} completion-generated elements failed");
        },
    );

    criterion(4, "classify never yields both certificates", 600.0, || {
        let cfg = RunConfig {
            r_max: Some(4),
            starts: 16,
            max_iter: 20_000,
            seed: 0x0C0F,
            check_mutual_exclusion: true,
            ..RunConfig::default()
        };
        let master = RngState::new(0xF8EE);
        let mut tally = [0u64; 3];
        for trial in 0..200u64 {
            let p = if trial % 2 == 0 { 1 } else { 2 };
            let mut rng = master.derive(trial);
            let y = VnElement::random_hermitian(2, p, &mut rng).expect("element");
            // an InternalInconsistency error here means both certificates fired
            let verdict = classify(&y, &cfg).expect("mutually exclusive certificates");
            assert!(
                !(verdict.completion.is_some() && verdict.violation.is_some()),
                "both certificates present at trial {trial}"
            );
            tally[verdict.status.exit_code() as usize] += 1;
        }
        println!(
            "  (criterion 4 tally over free elements: {} in-max, {} violated, {} undetermined)",
            tally[0], tally[1], tally[2]
        );
    });
}

#[test]
fn criterion_5_hand_checkable_violation() {
    criterion(5, "hand-checkable violation lands at -0.25", 5.0, || {
        let mut x = VnElement::new(2, 1, ComplexMatrix::scalar(ONE)).expect("element");
        x.set_generator_pair(1, 3, ComplexMatrix::scalar(Complex64::new(-2.5, 0.0)))
            .expect("pair");
        let cfg = RunConfig {
            r_max: Some(4),
            starts: 16,
            seed: 5,
            ..RunConfig::default()
        };
        let verdict = classify(&x, &cfg).expect("classify");
        assert_eq!(verdict.status, ConeStatus::ViolatedMin);
        let cert = verdict.violation.expect("violation certificate");
        assert!(
            (cert.lambda_min + 0.25).abs() <= 0.01,
            "lambda_min {} is not within 0.01 of -0.25",
            cert.lambda_min
        );
        cert.verify(&x).expect("certificate re-verifies");
    });
}

#[test]
fn criterion_6_state_characterization() {
    criterion(6, "states of V_n are exactly the contractions", 120.0, || {
        let n = 2usize;
        let master = RngState::new(0x57A7);

        // 500 contractions pass, 500 super-unit matrices fail
        let mut pass_group = Vec::new();
        let mut fail_group = Vec::new();
        for trial in 0..500u64 {
            let mut rng = master.derive(trial);
            let s = random_contraction(n, 1, &mut rng).expect("contraction");
            assert!(
                vn_state_check(ONE, &s).expect("check"),
                "contraction rejected at trial {trial}"
            );
            pass_group.push(s);

            let mut rng = master.derive(1000 + trial);
            let g = ginibre(n, &mut rng);
            let u = rng.next_f64().max(1e-6);
            let target = 1.0 + 2.0 * u; // in (1, 3]
            let s = g.scale_re(target / operator_norm(&g).expect("norm"));
            assert!(
                !vn_state_check(ONE, &s).expect("check"),
                "norm-{target:.3} matrix accepted at trial {trial}"
            );
            fail_group.push(s);
        }

        // cross-validate 50 of each against 50 completion-generated positives
        let mut elements = Vec::new();
        for trial in 0..50u64 {
            let p = if trial % 2 == 0 { 1 } else { 2 };
            let mut rng = master.derive(2000 + trial);
            elements.push(completion_generated(n, p, &mut rng));
        }
        for (k, s) in pass_group.iter().take(50).enumerate() {
            for x in &elements {
                let value = functional_eval(ONE, s, x).expect("eval");
                let lam = herm_eig(&value).expect("eig").lambda_min();
                assert!(
                    lam >= -1e-8,
                    "state #{k} went negative ({lam:.3e}) on a positive element"
                );
            }
        }
        for (k, s) in fail_group.iter().take(50).enumerate() {
            // closed-form search for a maximal-cone element mapped negative
            let witness = state_negativity_witness(s).expect("witness");
            let cert = CompletionCertificate {
                n,
                p: 1,
                eps: 0.0,
                completion: witness.lift.matrix().clone(),
                affine_residual: 0.0,
                psd_residual: 0.0,
            };
            cert.verify(&witness.element)
                .expect("witness element carries a valid completion certificate");
            assert!(
                witness.value < -1e-8,
                "non-state #{k} produced no negative value ({:.3e})",
                witness.value
            );
            let recheck = functional_eval(ONE, s, &witness.element).expect("eval");
            assert!((recheck[(0, 0)].re - witness.value).abs() <= 1e-9);
        }
    });
}

#[test]
fn criterion_7_correlation_containment() {
    criterion(7, "UC_q samples are level-1 feasible", 300.0, || {
        let master = RngState::new(0x0C0Eu64);
        let dims = [1usize, 2, 3];
        for trial in 0..100u64 {
            let da = dims[(trial as usize) % 3];
            let db = dims[(trial as usize / 3) % 3];
            let mut rng = master.derive(trial);
            let t = sample_ucq(2, 2, da, db, &mut rng).expect("sample");
            t.check_invariants().expect("tuple invariants");
            match npa_check(&t, 50_000).expect("npa") {
                NpaVerdict::Feasible { moment_matrix } => {
                    moment_matrix.verify(&t).expect("moment matrix verifies")
                }
                other => panic!("tuple {trial} (dA={da}, dB={db}) gave {other:?}"),
            }
        }

        // the corrupted tuple is rejected by the closed-form minor bound
        let mut bad = identity_tuple(2, 2).expect("identity tuple");
        let two = Complex64::new(2.0, 0.0);
        bad.set_value(Letter::Gen { i: 1, j: 1, star: false }, Letter::One, two);
        bad.set_value(Letter::Gen { i: 1, j: 1, star: true }, Letter::One, two);
        match npa_check(&bad, 1_000).expect("npa") {
            NpaVerdict::InfeasibleEvidence { .. } => {}
            other => panic!("corrupted tuple gave {other:?}"),
        }

        // convexity spot check: midpoints of feasible samples stay feasible
        let t1 = sample_ucq(2, 2, 2, 2, &mut master.derive(900)).expect("sample");
        let t2 = sample_ucq(2, 2, 1, 2, &mut master.derive(901)).expect("sample");
        let mid = tuple_convex_combine(&t1, &t2, 0.5).expect("combine");
        assert!(
            !matches!(npa_check(&mid, 50_000).expect("npa"), NpaVerdict::InfeasibleEvidence { .. }),
            "midpoint of feasible tuples flagged infeasible"
        );
    });
}

#[test]
fn criterion_8_rfd_construction() {
    criterion(8, "compress-then-dilate representations", 10.0, || {
        let master = RngState::new(0x8FD);
        for trial in 0..5u64 {
            let mut rng = master.derive(trial);
            let w1 = random_unitary(4, &mut rng).expect("haar");
            let w2 = random_unitary(4, &mut rng).expect("haar");
            let rep = retract_diag(&[w1, w2]).expect("diag rep");

            let full = rfd_compression(&rep, 4).expect("m = d");
            for i in 1..=2 {
                for j in 1..=2 {
                    assert!(
                        full.block(i, j).block(0, 0, 4, 4).bit_eq(rep.block(i, j)),
                        "corner ({i},{j}) drifted at trial {trial}"
                    );
                }
            }
            for m in 1..=3usize {
                let comp = rfd_compression(&rep, m).expect("compress");
                assert!(
                    comp.unitarity_residual() <= 1e-9,
                    "unitarity residual {:.3e} at m={m}, trial {trial}",
                    comp.unitarity_residual()
                );
            }
        }
    });
}

#[test]
fn criterion_9_determinism() {
    criterion(9, "identical seeds produce byte-identical artifacts", 600.0, || {
        let run = || -> String {
            let mut bundle = String::new();

            // dilation artifact
            let mut rng = RngState::new(77);
            let t = random_contraction(4, 1, &mut rng).expect("sample");
            let v = unitary_dilation(&t).expect("dilate");
            bundle.push_str(&serde_json::to_string(&v).expect("json"));
            bundle.push('\n');

            // classify verdict artifact
            let cfg = RunConfig {
                starts: 6,
                max_iter: 20_000,
                seed: 7,
                ..RunConfig::default()
            };
            let mut rng = RngState::new(78);
            let x = VnElement::random_hermitian(2, 1, &mut rng).expect("element");
            let verdict = classify(&x, &cfg).expect("classify");
            bundle.push_str(&serde_json::to_string(&verdict).expect("json"));
            bundle.push('\n');

            // completion + violation certificates for fixed elements
            let unit = VnElement::unit(2, 2).expect("unit");
            let cert = max_membership(&unit, 1e-6, 20_000).expect("solve").expect("found");
            bundle.push_str(&serde_json::to_string(&cert).expect("json"));
            bundle.push('\n');
            let neg = VnElement::new(2, 1, ComplexMatrix::scalar(-ONE)).expect("element");
            let viol = min_violation_search(&neg, 2, 4, &RngState::new(9))
                .expect("search")
                .expect("violated");
            bundle.push_str(&serde_json::to_string(&viol).expect("json"));
            bundle.push('\n');

            // crosscheck report artifact
            let report = unclab::cones::crosscheck(
                2,
                1,
                2,
                &RngState::new(79),
                &RunConfig {
                    starts: 4,
                    max_iter: 20_000,
                    ..RunConfig::default()
                },
            )
            .expect("crosscheck");
            bundle.push_str(&serde_json::to_string(&report).expect("json"));
            bundle.push('\n');

            // sampled tuples and their npa verdicts
            let master = RngState::new(80);
            for item in 0..5u64 {
                let mut rng = master.derive(item);
                let t = sample_ucq(2, 2, 2, 1, &mut rng).expect("sample");
                bundle.push_str(&serde_json::to_string(&t).expect("json"));
                bundle.push('\n');
                let verdict = npa_check(&t, 30_000).expect("npa");
                bundle.push_str(&serde_json::to_string(&verdict).expect("json"));
                bundle.push('\n');
            }

            // rfd compression artifact
            let mut rng = RngState::new(81);
            let w1 = random_unitary(4, &mut rng).expect("haar");
            let w2 = random_unitary(4, &mut rng).expect("haar");
            let rep = retract_diag(&[w1, w2]).expect("rep");
            let comp = rfd_compression(&rep, 2).expect("compress");
            bundle.push_str(&serde_json::to_string(&comp).expect("json"));
            bundle.push('\n');

            bundle
        };
        let first = run();
        let second = run();
        assert!(first == second, "artifact bundles differ between reruns");
        assert!(!first.is_empty());
    });
}
