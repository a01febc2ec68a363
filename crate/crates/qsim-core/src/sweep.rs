//! Figure-data generation: complexity curves and parameter-surface sweeps
//! for the upset-gambler family.
//!
//! Sweep cells are independent and run in parallel under the default
//! `parallel` feature; output order is always row-major over the grid
//! regardless of scheduling.

use crate::error::{QsimError, Result};
use crate::gram::{eta_overlap_series, solve_gram, DEFAULT_GRAM_TOL};
use crate::machine::EpsilonMachine;
use crate::parallel;
use crate::quantum::{quantum_complexity, MemoryStateSet, SteadyStateOperator, DEFAULT_RANK_TOL};

/// Default exclusion half-width around the degenerate line `p = q`.
pub const DEFAULT_EXCLUSION_BAND: f64 = 1e-3;

/// Rectangular (p, q) grid with an exclusion band around `p = q`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub p_min: f64,
    pub p_max: f64,
    pub p_count: usize,
    pub q_min: f64,
    pub q_max: f64,
    pub q_count: usize,
    pub exclusion_band: f64,
}

impl GridSpec {
    /// Parse the CLI grid syntax `pmin:pmax:n,qmin:qmax:n`.
    pub fn parse(text: &str) -> Result<Self> {
        let axes: Vec<&str> = text.split(',').collect();
        if axes.len() != 2 {
            return Err(QsimError::InvalidParameter(format!(
                "grid `{text}` must have two axes separated by a comma"
            )));
        }
        let mut parsed = [(0.0, 0.0, 0usize); 2];
        for (slot, axis) in parsed.iter_mut().zip(&axes) {
            let parts: Vec<&str> = axis.split(':').collect();
            if parts.len() != 3 {
                return Err(QsimError::InvalidParameter(format!(
                    "axis `{axis}` must be min:max:count"
                )));
            }
            let min: f64 = parts[0]
                .parse()
                .map_err(|_| QsimError::InvalidParameter(format!("bad number `{}`", parts[0])))?;
            let max: f64 = parts[1]
                .parse()
                .map_err(|_| QsimError::InvalidParameter(format!("bad number `{}`", parts[1])))?;
            let count: usize = parts[2]
                .parse()
                .map_err(|_| QsimError::InvalidParameter(format!("bad count `{}`", parts[2])))?;
            if count < 2 {
                return Err(QsimError::InvalidParameter(format!(
                    "axis `{axis}` needs at least 2 points"
                )));
            }
            if !(min.is_finite() && max.is_finite()) || min > max {
                return Err(QsimError::InvalidParameter(format!(
                    "axis `{axis}` has an empty or non-finite range"
                )));
            }
            *slot = (min, max, count);
        }
        Ok(Self {
            p_min: parsed[0].0,
            p_max: parsed[0].1,
            p_count: parsed[0].2,
            q_min: parsed[1].0,
            q_max: parsed[1].1,
            q_count: parsed[1].2,
            exclusion_band: DEFAULT_EXCLUSION_BAND,
        })
    }

    pub fn p_values(&self) -> Vec<f64> {
        linspace(self.p_min, self.p_max, self.p_count)
    }

    pub fn q_values(&self) -> Vec<f64> {
        linspace(self.q_min, self.q_max, self.q_count)
    }

    /// Whether a cell falls in the degenerate band or outside the open unit
    /// square.
    pub fn excluded(&self, p: f64, q: f64) -> bool {
        (p - q).abs() < self.exclusion_band || !(p > 0.0 && p < 1.0) || !(q > 0.0 && q < 1.0)
    }
}

fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    let step = if count > 1 {
        (max - min) / (count - 1) as f64
    } else {
        0.0
    };
    (0..count).map(|k| min + step * k as f64).collect()
}

/// Complexities at one (p, q) point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceValues {
    pub c_mu: f64,
    pub c_q: f64,
    /// `C_q / C_μ`, the inverse quantum advantage.
    pub ratio_cq_cmu: f64,
}

/// One sweep cell; `values` is `None` for excluded cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceCell {
    pub p: f64,
    pub q: f64,
    pub values: Option<SurfaceValues>,
}

/// Classical and quantum complexity of `upset_gambler(p, q)`.
///
/// Goes through the full solve pipeline (stationary distribution, overlap
/// solve, steady-state spectrum); no unitary is needed for the entropies.
pub fn upset_gambler_point(p: f64, q: f64) -> Result<SurfaceValues> {
    let machine = EpsilonMachine::upset_gambler(p, q)?;
    let pi = machine.stationary_distribution()?;
    let gram = solve_gram(&machine, DEFAULT_GRAM_TOL)?;
    let states = MemoryStateSet::from_gram(&gram, DEFAULT_RANK_TOL)?;
    let phi = SteadyStateOperator::new(&states, &pi);
    let c_mu = machine.classical_complexity(&pi);
    let c_q = quantum_complexity(&phi);
    Ok(SurfaceValues {
        c_mu,
        c_q,
        ratio_cq_cmu: c_q / c_mu,
    })
}

fn surface_cell(grid: &GridSpec, index: usize) -> Result<SurfaceCell> {
    let q_count = grid.q_count;
    let p = grid.p_values()[index / q_count];
    let q = grid.q_values()[index % q_count];
    let values = if grid.excluded(p, q) {
        None
    } else {
        Some(upset_gambler_point(p, q)?)
    };
    Ok(SurfaceCell { p, q, values })
}

/// Evaluate the sweep over the grid, row-major (p outer, q inner).
pub fn surface(grid: &GridSpec) -> Result<Vec<SurfaceCell>> {
    parallel::map_indexed(grid.p_count * grid.q_count, |k| surface_cell(grid, k))
        .into_iter()
        .collect()
}

/// Sequential reference implementation of [`surface`]; produces identical
/// results.
pub fn surface_seq(grid: &GridSpec) -> Result<Vec<SurfaceCell>> {
    parallel::map_indexed_seq(grid.p_count * grid.q_count, |k| surface_cell(grid, k))
        .into_iter()
        .collect()
}

/// One row of the staged-complexity curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CqCurveRow {
    pub l: usize,
    /// `C̃_q(L)` of the length-`L` encoding.
    pub tilde_cq: f64,
    /// Classical complexity (constant along the curve).
    pub c_mu: f64,
    /// Quantum complexity, the `L → ∞` limit.
    pub c_q: f64,
}

/// Staged complexities `C̃_q(L)` for `L = 0..=l_max` of the upset-gambler
/// process, alongside the constant classical and quantum complexities.
pub fn cq_curve(p: f64, q: f64, l_max: usize) -> Result<Vec<CqCurveRow>> {
    let machine = EpsilonMachine::upset_gambler(p, q)?;
    let pi = machine.stationary_distribution()?;
    let gram = solve_gram(&machine, DEFAULT_GRAM_TOL)?;
    let states = MemoryStateSet::from_gram(&gram, DEFAULT_RANK_TOL)?;
    let phi = SteadyStateOperator::new(&states, &pi);
    let c_mu = machine.classical_complexity(&pi);
    let c_q = quantum_complexity(&phi);
    let rows = eta_overlap_series(&machine, &pi, l_max)
        .into_iter()
        .map(|table| CqCurveRow {
            l: table.len,
            tilde_cq: table.tilde_cq,
            c_mu,
            c_q,
        })
        .collect();
    Ok(rows)
}
