//! Report assembly and rendering: human-readable text, JSON, and CSV.
//!
//! CSV floats carry 17 significant digits so that emitted tables re-ingest
//! losslessly; identical inputs always produce byte-identical output.

use serde::Serialize;

use qsim_core::machine::{EpsilonMachine, MarkovOrderBound, ValidationReport};
use qsim_core::quantum::{QuantumComplexityReport, QuantumModel};
use qsim_core::simulate::{joint_overlap_invariance, JOINT_DIM_CAP};
use qsim_core::sweep::{CqCurveRow, SurfaceCell};
use qsim_core::QsimError;

/// 17 significant digits, lossless for f64.
pub fn float17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Csv,
    Json,
}

/// Everything `analyze` reports for one machine.
#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    pub name: String,
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    pub validation: ValidationSummary,
    pub stationary: Vec<f64>,
    pub c_mu: f64,
    pub c_mu0: f64,
    pub markov_order_bound: String,
    /// Off-diagonal overlaps `c_ij` for `i < j`, labelled.
    pub overlaps: Vec<OverlapEntry>,
    pub memory_rank: usize,
    pub c_q: f64,
    pub c_q0: f64,
    pub renyi: Vec<RenyiEntry>,
    pub residuals: Residuals,
    pub tol: f64,
    pub verified: bool,
}

#[derive(Debug, Serialize)]
pub struct ValidationSummary {
    pub normalized: bool,
    pub worst_row_deviation: f64,
    pub connected: bool,
    pub minimal: bool,
    pub support_consistent: bool,
}

#[derive(Debug, Serialize)]
pub struct OverlapEntry {
    pub state_i: String,
    pub state_j: String,
    pub c: f64,
}

#[derive(Debug, Serialize)]
pub struct RenyiEntry {
    pub alpha: f64,
    pub bits: f64,
}

#[derive(Debug, Serialize)]
pub struct Residuals {
    pub unitarity: f64,
    pub one_step: f64,
    pub gram_reproduction: f64,
    pub channel_fixed_point: f64,
    /// Max joint-overlap deviation over checked lengths (up to 8, within
    /// the dimension cap).
    pub joint_overlap: f64,
    pub joint_overlap_max_len: usize,
}

impl AnalysisReport {
    pub fn build(
        model: &QuantumModel,
        validation: &ValidationReport,
        markov: MarkovOrderBound,
        tol: f64,
    ) -> Self {
        let machine = model.machine();
        let verification = model.verification(tol);
        let quantum: QuantumComplexityReport = model.quantum_report();

        let mut joint_overlap = 0.0f64;
        let mut joint_overlap_max_len = 0;
        for l in 1..=8usize {
            let dim = (machine.n_symbols() as u64).pow(l as u32) * model.states().rank() as u64;
            if dim > JOINT_DIM_CAP as u64 {
                break;
            }
            match joint_overlap_invariance(model, model.gram(), l) {
                Ok(dev) => {
                    joint_overlap = joint_overlap.max(dev);
                    joint_overlap_max_len = l;
                }
                Err(_) => break,
            }
        }

        let mut overlaps = Vec::new();
        for i in 0..machine.n_states() {
            for j in (i + 1)..machine.n_states() {
                overlaps.push(OverlapEntry {
                    state_i: machine.states()[i].clone(),
                    state_j: machine.states()[j].clone(),
                    c: model.gram().entry(i, j),
                });
            }
        }

        let pi = model.stationary();
        let residuals = Residuals {
            unitarity: verification.unitarity_defect,
            one_step: verification.step_residual,
            gram_reproduction: verification.gram_defect,
            channel_fixed_point: model.channel_residual(),
            joint_overlap,
            joint_overlap_max_len,
        };
        let verified = verification.passed()
            && residuals.channel_fixed_point < tol
            && residuals.joint_overlap < tol;

        Self {
            name: machine.name().to_string(),
            states: machine.states().to_vec(),
            alphabet: machine.alphabet().to_vec(),
            validation: ValidationSummary {
                normalized: validation.normalized,
                worst_row_deviation: validation.worst_row_deviation,
                connected: validation.connected,
                minimal: validation.minimal,
                support_consistent: validation.support_consistent,
            },
            stationary: pi.probs().to_vec(),
            c_mu: machine.classical_complexity(pi),
            c_mu0: machine.topological_complexity(),
            markov_order_bound: markov.to_string(),
            overlaps,
            memory_rank: model.states().rank(),
            c_q: quantum.c_q,
            c_q0: quantum.c_q0,
            renyi: quantum
                .renyi
                .iter()
                .map(|&(alpha, bits)| RenyiEntry { alpha, bits })
                .collect(),
            residuals,
            tol,
            verified,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(self).expect("report serializes"),
            Format::Csv => self.render_csv(),
            Format::Text => self.render_text(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        let flag = |b: bool| if b { "ok" } else { "FAIL" };
        out.push_str(&format!(
            "machine: {} ({} states, {} symbols)\n",
            self.name,
            self.states.len(),
            self.alphabet.len()
        ));
        out.push_str(&format!(
            "validation: normalized {} (worst row deviation {:.3e}), connected {}, minimal {}, support {}\n",
            flag(self.validation.normalized),
            self.validation.worst_row_deviation,
            flag(self.validation.connected),
            flag(self.validation.minimal),
            flag(self.validation.support_consistent),
        ));
        for (label, p) in self.states.iter().zip(&self.stationary) {
            out.push_str(&format!("pi[{label}] = {:.6}\n", p));
        }
        out.push_str(&format!("C_mu  = {:.6} bits\n", self.c_mu));
        out.push_str(&format!("C_mu0 = {:.6} bits\n", self.c_mu0));
        out.push_str(&format!(
            "markov order bound: {}\n",
            self.markov_order_bound
        ));
        for e in &self.overlaps {
            out.push_str(&format!("c[{}, {}] = {:.6}\n", e.state_i, e.state_j, e.c));
        }
        out.push_str(&format!("memory rank = {}\n", self.memory_rank));
        out.push_str(&format!("C_q   = {:.6} bits\n", self.c_q));
        out.push_str(&format!("C_q0  = {:.6} bits\n", self.c_q0));
        let renyi: Vec<String> = self
            .renyi
            .iter()
            .map(|e| format!("H^{}={:.6}", e.alpha, e.bits))
            .collect();
        out.push_str(&format!("renyi: {}\n", renyi.join(" ")));
        out.push_str(&format!(
            "residuals: unitarity {:.3e}, one-step {:.3e}, gram {:.3e}, channel {:.3e}, joint-overlap(L<={}) {:.3e}\n",
            self.residuals.unitarity,
            self.residuals.one_step,
            self.residuals.gram_reproduction,
            self.residuals.channel_fixed_point,
            self.residuals.joint_overlap_max_len,
            self.residuals.joint_overlap,
        ));
        out.push_str(&format!(
            "verification ({:.1e}): {}\n",
            self.tol,
            if self.verified { "PASS" } else { "FAIL" }
        ));
        out
    }

    fn render_csv(&self) -> String {
        let mut out = String::from("key,value\n");
        let mut push = |k: &str, v: String| out.push_str(&format!("{k},{v}\n"));
        push("name", self.name.clone());
        push("n_states", self.states.len().to_string());
        push("n_symbols", self.alphabet.len().to_string());
        push("validated", self.validation_passed().to_string());
        for (label, p) in self.states.iter().zip(&self.stationary) {
            push(&format!("pi[{label}]"), float17(*p));
        }
        push("c_mu", float17(self.c_mu));
        push("c_mu0", float17(self.c_mu0));
        push("markov_order_bound", self.markov_order_bound.clone());
        for e in &self.overlaps {
            push(&format!("c[{};{}]", e.state_i, e.state_j), float17(e.c));
        }
        push("memory_rank", self.memory_rank.to_string());
        push("c_q", float17(self.c_q));
        push("c_q0", float17(self.c_q0));
        push("residual_unitarity", float17(self.residuals.unitarity));
        push("residual_one_step", float17(self.residuals.one_step));
        push("residual_gram", float17(self.residuals.gram_reproduction));
        push(
            "residual_channel",
            float17(self.residuals.channel_fixed_point),
        );
        push(
            "residual_joint_overlap",
            float17(self.residuals.joint_overlap),
        );
        push("verified", self.verified.to_string());
        out
    }

    fn validation_passed(&self) -> bool {
        self.validation.normalized
            && self.validation.connected
            && self.validation.minimal
            && self.validation.support_consistent
    }
}

/// CSV table for the staged-complexity curve.
pub fn curve_csv(rows: &[CqCurveRow]) -> String {
    let mut out = String::from("L,tilde_cq,c_mu,c_q\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.l,
            float17(row.tilde_cq),
            float17(row.c_mu),
            float17(row.c_q)
        ));
    }
    out
}

pub fn curve_json(rows: &[CqCurveRow]) -> String {
    #[derive(Serialize)]
    struct Row {
        l: usize,
        tilde_cq: f64,
        c_mu: f64,
        c_q: f64,
    }
    let rows: Vec<Row> = rows
        .iter()
        .map(|r| Row {
            l: r.l,
            tilde_cq: r.tilde_cq,
            c_mu: r.c_mu,
            c_q: r.c_q,
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("rows serialize")
}

/// CSV table for the parameter surface. Excluded cells keep their (p, q)
/// coordinates and leave the value fields empty.
pub fn surface_csv(cells: &[SurfaceCell]) -> String {
    let mut out = String::from("p,q,c_mu,c_q,ratio_cq_cmu\n");
    for cell in cells {
        match &cell.values {
            Some(v) => out.push_str(&format!(
                "{},{},{},{},{}\n",
                float17(cell.p),
                float17(cell.q),
                float17(v.c_mu),
                float17(v.c_q),
                float17(v.ratio_cq_cmu)
            )),
            None => out.push_str(&format!("{},{},,,\n", float17(cell.p), float17(cell.q))),
        }
    }
    out
}

pub fn surface_json(cells: &[SurfaceCell]) -> String {
    #[derive(Serialize)]
    struct Cell {
        p: f64,
        q: f64,
        c_mu: Option<f64>,
        c_q: Option<f64>,
        ratio_cq_cmu: Option<f64>,
    }
    let cells: Vec<Cell> = cells
        .iter()
        .map(|c| Cell {
            p: c.p,
            q: c.q,
            c_mu: c.values.as_ref().map(|v| v.c_mu),
            c_q: c.values.as_ref().map(|v| v.c_q),
            ratio_cq_cmu: c.values.as_ref().map(|v| v.ratio_cq_cmu),
        })
        .collect();
    serde_json::to_string_pretty(&cells).expect("cells serialize")
}

/// Render a validation report for the `validate` subcommand.
pub fn validation_text(machine: &EpsilonMachine, report: &ValidationReport) -> String {
    let flag = |b: bool| if b { "ok" } else { "FAIL" };
    let mut out = String::new();
    out.push_str(&format!(
        "machine: {} ({} states, {} symbols)\n",
        machine.name(),
        machine.n_states(),
        machine.n_symbols()
    ));
    out.push_str(&format!(
        "normalized: {} (worst row deviation {:.3e})\n",
        flag(report.normalized),
        report.worst_row_deviation
    ));
    out.push_str(&format!("connected: {}\n", flag(report.connected)));
    out.push_str(&format!("minimal: {}\n", flag(report.minimal)));
    if let Some((i, j)) = report.offending_pair {
        out.push_str(&format!(
            "  indistinguishable pair: `{}`, `{}`\n",
            machine.states()[i],
            machine.states()[j]
        ));
    }
    out.push_str(&format!(
        "support consistent: {}\n",
        flag(report.support_consistent)
    ));
    out.push_str(&format!(
        "validation: {}\n",
        if report.passed() { "PASS" } else { "FAIL" }
    ));
    out
}

/// Exit code for an error: verification/numerical failures map to 1, input
/// and validation problems to 2.
pub fn exit_code_for(err: &QsimError) -> u8 {
    match err {
        QsimError::Degenerate(_) | QsimError::Numerical(_) => 1,
        _ => 2,
    }
}
