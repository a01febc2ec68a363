//! Acceptance suite: one test per release criterion, each printing a
//! pass/fail line and enforcing its runtime budget.
//!
//! Run with `cargo test -p qsim-core --test acceptance -- --nocapture` to
//! see the per-criterion lines.

mod common;

use std::time::Instant;

use common::{random_suite, upset_gambler};
use qsim_core::gram::{
    effective_cryptic_order, eta_overlap_series, gram_series, solve_gram, CrypticOrderEstimate,
    PairTransitionMatrix, DEFAULT_GRAM_TOL,
};
use qsim_core::machine::EpsilonMachine;
use qsim_core::parallel;
use qsim_core::quantum::{quantum_complexity, quantum_topological, QuantumModel, DEFAULT_RANK_TOL};
use qsim_core::simulate::{
    classical_empirical_distribution, conditional_memory_entropy, empirical_distribution,
    exact_distribution, joint_overlap_invariance, tv_distance, Start,
};
use qsim_core::sweep::{cq_curve, upset_gambler_point};

fn criterion(number: usize, name: &str, budget_seconds: f64, body: impl FnOnce(&mut Vec<String>)) {
    let start = Instant::now();
    let mut failures = Vec::new();
    body(&mut failures);
    let elapsed = start.elapsed().as_secs_f64();
    if elapsed > budget_seconds {
        failures.push(format!(
            "runtime {elapsed:.2} s exceeds the {budget_seconds} s budget"
        ));
    }
    if failures.is_empty() {
        println!("acceptance criterion {number} ({name}): PASS ({elapsed:.2} s)");
    } else {
        println!("acceptance criterion {number} ({name}): FAIL ({elapsed:.2} s)");
        for f in &failures {
            println!("  - {f}");
        }
        panic!("criterion {number} failed: {}", failures.join("; "));
    }
}

fn check(failures: &mut Vec<String>, ok: bool, msg: impl FnOnce() -> String) {
    if !ok {
        failures.push(msg());
    }
}

#[test]
fn criterion_1_complexity_curve_reproduction() {
    criterion(1, "complexity curve reproduction", 5.0, |failures| {
        let rows = cq_curve(0.7, 0.8, 60).unwrap();
        let c_mu = rows[0].c_mu;
        let c_q = rows[0].c_q;
        check(failures, (c_mu - 0.9774).abs() <= 0.005, || {
            format!("C_mu = {c_mu}, expected 0.9774 +- 0.005")
        });
        check(failures, (c_q - 0.1001).abs() <= 0.005, || {
            format!("C_q = {c_q}, expected 0.1001 +- 0.005")
        });
        for w in rows[..=20].windows(2) {
            check(failures, w[1].tilde_cq < w[0].tilde_cq, || {
                format!(
                    "staged complexity not strictly decreasing at L={}: {} -> {}",
                    w[1].l, w[0].tilde_cq, w[1].tilde_cq
                )
            });
        }
        check(failures, rows[20].tilde_cq - c_q < 0.01, || {
            format!("C~_q(20) - C_q = {}", rows[20].tilde_cq - c_q)
        });
        check(failures, (rows[60].tilde_cq - c_q).abs() < 1e-6, || {
            format!("|C~_q(60) - C_q| = {:e}", (rows[60].tilde_cq - c_q).abs())
        });
    });
}

#[test]
fn criterion_2_unitary_correctness() {
    criterion(2, "unitary correctness", 30.0, |failures| {
        let mut machines = vec![upset_gambler()];
        machines.extend(random_suite());
        let results = parallel::map_indexed(machines.len(), |k| {
            let machine = machines[k].clone();
            let name = machine.name().to_string();
            let model = QuantumModel::build(machine).map_err(|e| format!("{name}: {e}"))?;
            let report = model.verification(1e-10);
            let channel = model.channel_residual();
            let mut worst_overlap = 0.0f64;
            for l in 1..=8 {
                let dev = joint_overlap_invariance(&model, model.gram(), l)
                    .map_err(|e| format!("{name}: {e}"))?;
                worst_overlap = worst_overlap.max(dev);
            }
            Ok::<_, String>((name, report, channel, worst_overlap))
        });
        for result in results {
            match result {
                Ok((name, report, channel, overlap)) => {
                    check(failures, report.unitarity_defect < 1e-10, || {
                        format!("{name}: unitarity defect {:e}", report.unitarity_defect)
                    });
                    check(failures, report.step_residual < 1e-10, || {
                        format!("{name}: one-step residual {:e}", report.step_residual)
                    });
                    check(failures, channel < 1e-10, || {
                        format!("{name}: channel fixed-point residual {channel:e}")
                    });
                    check(failures, overlap < 1e-10, || {
                        format!("{name}: joint overlap deviation {overlap:e}")
                    });
                }
                Err(e) => failures.push(e),
            }
        }
    });
}

#[test]
fn criterion_3_gram_oracle_equivalence() {
    criterion(3, "gram oracle equivalence", 10.0, |failures| {
        let mut machines = vec![upset_gambler()];
        machines.extend(random_suite());
        for machine in &machines {
            let gram = match solve_gram(machine, DEFAULT_GRAM_TOL) {
                Ok(g) => g,
                Err(e) => {
                    failures.push(format!("{}: {e}", machine.name()));
                    continue;
                }
            };
            let residual = gram.self_consistency_residual(machine);
            check(failures, residual < 1e-12, || {
                format!("{}: self-consistency residual {residual:e}", machine.name())
            });

            let zeta = PairTransitionMatrix::new(machine);
            let rho = zeta.spectral_radius(true).unwrap();
            if rho < 0.9 {
                let series = gram_series(machine, 30);
                // Geometric tail bound, floored at the solve tolerance:
                // below 1e-12 neither side of the comparison is defined
                // more precisely than the solver contract.
                let bound = rho.powi(30) / (1.0 - rho) + DEFAULT_GRAM_TOL;
                let mut worst = 0.0f64;
                for i in 0..machine.n_states() {
                    for j in 0..machine.n_states() {
                        worst = worst.max((series.entry(i, j) - gram.entry(i, j)).abs());
                    }
                }
                check(failures, worst <= bound, || {
                    format!(
                        "{}: series gap {worst:e} exceeds tail bound {bound:e} (rho {rho:.3})",
                        machine.name()
                    )
                });
            }
        }
    });
}

#[test]
fn criterion_4_statistical_indistinguishability() {
    criterion(4, "statistical indistinguishability", 60.0, |failures| {
        let machine = upset_gambler();
        let pi = machine.stationary_distribution().unwrap();
        let exact = exact_distribution(&machine, &pi, 4).unwrap();
        let model = QuantumModel::build(machine.clone()).unwrap();

        let quantum = empirical_distribution(&model, 4, 1_000_000, 20_240_817).unwrap();
        let tv_q = tv_distance(&quantum, &exact);
        check(failures, tv_q < 0.005, || {
            format!("quantum sampler TV {tv_q} >= 0.005")
        });

        let classical =
            classical_empirical_distribution(&machine, &pi, 4, 1_000_000, 20_240_817).unwrap();
        let tv_c = tv_distance(&classical, &exact);
        check(failures, tv_c < 0.005, || {
            format!("classical sampler TV {tv_c} >= 0.005")
        });
    });
}

#[test]
fn criterion_5_parameter_phenomenology() {
    criterion(5, "parameter phenomenology", 10.0, |failures| {
        // Discontinuity of the classical complexity at p -> q while the
        // quantum complexity vanishes continuously.
        let near = upset_gambler_point(0.799, 0.8).unwrap();
        check(failures, near.c_mu > 0.9, || {
            format!("C_mu(0.799) = {} <= 0.9", near.c_mu)
        });
        check(failures, near.c_q < 0.01, || {
            format!("C_q(0.799) = {} >= 0.01", near.c_q)
        });

        // Ambiguity of simplicity on the q = 0.8 slice.
        let at_04 = upset_gambler_point(0.4, 0.8).unwrap();
        let at_06 = upset_gambler_point(0.6, 0.8).unwrap();
        check(failures, at_04.c_q > at_06.c_q, || {
            format!("C_q(0.4) = {} !> C_q(0.6) = {}", at_04.c_q, at_06.c_q)
        });
        check(failures, at_04.c_mu < at_06.c_mu, || {
            format!("C_mu(0.4) = {} !< C_mu(0.6) = {}", at_04.c_mu, at_06.c_mu)
        });

        // The quantum advantage grows monotonically as p approaches q, and
        // is already large close to the degenerate line.
        let steps = 40;
        let mut prev_ratio = 0.0;
        for k in 0..=steps {
            let p = 0.6 + (0.799 - 0.6) * k as f64 / steps as f64;
            let v = upset_gambler_point(p, 0.8).unwrap();
            let ratio = v.c_mu / v.c_q;
            check(failures, ratio > prev_ratio, || {
                format!("advantage not increasing at p = {p}: {ratio} <= {prev_ratio}")
            });
            prev_ratio = ratio;
        }
        let close = upset_gambler_point(0.79, 0.8).unwrap();
        let advantage = close.c_mu / close.c_q;
        check(failures, advantage > 50.0, || {
            format!("advantage at (0.79, 0.8) only {advantage}")
        });
    });
}

#[test]
fn criterion_6_convergence_machinery() {
    criterion(6, "convergence machinery", 5.0, |failures| {
        let machine = upset_gambler();
        let zeta = PairTransitionMatrix::new(&machine);

        let rho = zeta.spectral_radius(true).unwrap();
        check(failures, (rho - 0.56f64.sqrt()).abs() <= 1e-9, || {
            format!("off-diagonal spectral radius {rho}, expected sqrt(0.56)")
        });

        // Substochasticity of every row of zeta^L, strictly below one on
        // off-diagonal rows once L exceeds the state count.
        for l in 0..=50usize {
            let sums = zeta.row_sums_after(l);
            for (row, &s) in sums.iter().enumerate() {
                check(failures, s <= 1.0 + 1e-12, || {
                    format!("row {row} of zeta^{l} sums to {s}")
                });
            }
            if l > 2 {
                for (i, j) in zeta.off_diagonal_pairs() {
                    let s = sums[zeta.pair_index(i, j)];
                    check(failures, s < 1.0, || {
                        format!("off-diagonal row ({i},{j}) of zeta^{l} not strictly substochastic")
                    });
                }
            }
        }

        // Monotone convergence of the overlap machinery at 1e-12: the
        // truncated series decreases onto the solved overlaps from above,
        // and the encoding overlaps increase onto them from below.
        let gram = solve_gram(&machine, DEFAULT_GRAM_TOL).unwrap();
        let pi = machine.stationary_distribution().unwrap();
        let tables = eta_overlap_series(&machine, &pi, 20);
        let mut prev_series = gram_series(&machine, 0);
        for l in 0..=20usize {
            let series = gram_series(&machine, l);
            for i in 0..2 {
                for j in 0..2 {
                    check(
                        failures,
                        series.entry(i, j) >= gram.entry(i, j) - 1e-12,
                        || format!("series({l})[{i},{j}] below solved overlap"),
                    );
                    check(
                        failures,
                        series.entry(i, j) <= prev_series.entry(i, j) + 1e-12,
                        || format!("series not non-increasing at L={l} entry ({i},{j})"),
                    );
                    let dev = (tables[l].overlap(i, j) - gram.entry(i, j)).abs();
                    let prev_dev = if l == 0 {
                        f64::INFINITY
                    } else {
                        (tables[l - 1].overlap(i, j) - gram.entry(i, j)).abs()
                    };
                    check(
                        failures,
                        tables[l].overlap(i, j) <= gram.entry(i, j) + 1e-12,
                        || format!("encoding overlap({l})[{i},{j}] above solved overlap"),
                    );
                    check(failures, dev <= prev_dev + 1e-12, || {
                        format!("overlap deviation not non-increasing at L={l} entry ({i},{j})")
                    });
                }
            }
            prev_series = series;
        }
    });
}

#[test]
fn criterion_7_degenerate_analytic_cases() {
    criterion(7, "degenerate and analytic cases", 10.0, |failures| {
        // Biased coin: no complexity of either kind.
        let coin = EpsilonMachine::biased_coin(0.3).unwrap();
        let cpi = coin.stationary_distribution().unwrap();
        check(failures, coin.classical_complexity(&cpi) == 0.0, || {
            "biased coin C_mu != 0".into()
        });
        let cmodel = QuantumModel::build(coin).unwrap();
        let c_q = quantum_complexity(cmodel.phi());
        check(failures, c_q == 0.0, || format!("biased coin C_q = {c_q}"));

        // Alternating process: exactly one bit both ways, orthogonal
        // memory states, cryptic order one.
        let alt = EpsilonMachine::alternating();
        let api = alt.stationary_distribution().unwrap();
        let c_mu = alt.classical_complexity(&api);
        check(failures, (c_mu - 1.0).abs() <= 1e-12, || {
            format!("alternating C_mu = {c_mu}")
        });
        let amodel = QuantumModel::build(alt.clone()).unwrap();
        let c_q = quantum_complexity(amodel.phi());
        check(failures, (c_q - 1.0).abs() <= 1e-12, || {
            format!("alternating C_q = {c_q}")
        });
        check(failures, amodel.gram().entry(0, 1) == 0.0, || {
            format!("alternating overlap = {}", amodel.gram().entry(0, 1))
        });
        let order = effective_cryptic_order(&alt, amodel.gram(), 1e-12, 50);
        check(failures, order == CrypticOrderEstimate::Order(1), || {
            format!("alternating cryptic order {order}")
        });
    });
}

#[test]
fn criterion_8_entropy_bounds() {
    criterion(8, "entropy bounds", 60.0, |failures| {
        let mut machines = vec![upset_gambler()];
        machines.extend(random_suite());
        for machine in machines {
            let name = machine.name().to_string();
            let pi = machine.stationary_distribution().unwrap();
            let c_mu = machine.classical_complexity(&pi);
            let c_mu0 = machine.topological_complexity();
            let model = match QuantumModel::build(machine) {
                Ok(m) => m,
                Err(e) => {
                    failures.push(format!("{name}: {e}"));
                    continue;
                }
            };
            let c_q = quantum_complexity(model.phi());
            let c_q0 = quantum_topological(model.phi(), DEFAULT_RANK_TOL);
            check(failures, c_q <= c_mu + 1e-9, || {
                format!("{name}: C_q = {c_q} exceeds C_mu = {c_mu}")
            });
            check(failures, c_q0 <= c_mu0 + 1e-9, || {
                format!("{name}: C_q0 = {c_q0} exceeds C_mu0 = {c_mu0}")
            });
        }

        // Conditioning on measured output never pushes the memory entropy
        // above C_q.
        let model = QuantumModel::build(upset_gambler()).unwrap();
        let c_q = quantum_complexity(model.phi());
        for l in 0..=4usize {
            let h = conditional_memory_entropy(&model, Start::Stationary, l).unwrap();
            check(failures, h <= c_q + 1e-9, || {
                format!("conditional memory entropy {h} at L={l} exceeds C_q = {c_q}")
            });
        }
    });
}
