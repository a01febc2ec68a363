//! Memory-state overlaps and convergence diagnostics.
//!
//! The overlaps `c_ij = ⟨σ_i|σ_j⟩` between quantum memory states satisfy a
//! self-consistency condition
//!
//! ```text
//! c_ij = Σ_x √(P(x|i)·P(x|j)) · c_{λ(i,x), λ(j,x)},    c_kk = 1.
//! ```
//!
//! This module solves that system directly as a linear solve on the
//! off-diagonal pair coordinates, exposes the pair-space transfer matrix ζ
//! whose powers drive all convergence diagnostics, and computes the staged
//! complexities `C̃_q(L)` of finite-length encodings together with a plateau
//! estimator for the effective cryptic order.

use nalgebra::{DMatrix, DVector};

use crate::error::{QsimError, Result};
use crate::linalg::{power_iteration_radius, shannon_bits, symmetric_eigen_desc};
use crate::machine::{EpsilonMachine, StationaryDistribution};

/// Default residual tolerance for overlap solves.
pub const DEFAULT_GRAM_TOL: f64 = 1e-12;

/// Default tolerance for the cryptic-order plateau estimator.
pub const DEFAULT_PLATEAU_TOL: f64 = 1e-6;

/// Symmetric matrix of pairwise memory-state overlaps, unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    c: DMatrix<f64>,
}

impl GramMatrix {
    pub fn from_matrix(c: DMatrix<f64>) -> Self {
        debug_assert_eq!(c.nrows(), c.ncols());
        Self { c }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            c: DMatrix::identity(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.c[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let (vals, _) = symmetric_eigen_desc(&self.c);
        vals[vals.len() - 1]
    }

    /// Number of eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        let (vals, _) = symmetric_eigen_desc(&self.c);
        vals.iter().filter(|&&v| v > tol).count()
    }

    /// Largest self-consistency violation against the machine's overlap
    /// equations, over all ordered state pairs.
    pub fn self_consistency_residual(&self, machine: &EpsilonMachine) -> f64 {
        let n = machine.n_states();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut rhs = 0.0;
                for x in 0..machine.n_symbols() {
                    let w = (machine.emit_prob(i, x) * machine.emit_prob(j, x)).sqrt();
                    if w > 0.0 {
                        let (si, sj) = (
                            machine.successor(i, x).expect("support"),
                            machine.successor(j, x).expect("support"),
                        );
                        rhs += w * self.c[(si, sj)];
                    }
                }
                worst = worst.max((self.c[(i, j)] - rhs).abs());
            }
        }
        worst
    }
}

/// Transfer matrix ζ on ordered causal-state pairs.
///
/// `ζ[(i,j), (i',j')] = Σ_x √(P(x|i)·P(x|j)) · [i' = λ(i,x)] · [j' = λ(j,x)]`.
/// Pairs are indexed row-major over the declared state order. Powers of ζ
/// applied to indicator vectors yield both the truncated overlap series and
/// the finite-length encoding overlaps.
#[derive(Debug, Clone)]
pub struct PairTransitionMatrix {
    zeta: DMatrix<f64>,
    n_states: usize,
}

impl PairTransitionMatrix {
    pub fn new(machine: &EpsilonMachine) -> Self {
        let n = machine.n_states();
        let dim = n * n;
        let mut zeta = DMatrix::zeros(dim, dim);
        for i in 0..n {
            for j in 0..n {
                let row = i * n + j;
                for x in 0..machine.n_symbols() {
                    let w = (machine.emit_prob(i, x) * machine.emit_prob(j, x)).sqrt();
                    if w > 0.0 {
                        let (si, sj) = (
                            machine.successor(i, x).expect("support"),
                            machine.successor(j, x).expect("support"),
                        );
                        zeta[(row, si * n + sj)] += w;
                    }
                }
            }
        }
        Self { zeta, n_states: n }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn pair_index(&self, i: usize, j: usize) -> usize {
        i * self.n_states + j
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.zeta
    }

    /// ζ restricted to rows and columns of ordered pairs with `i ≠ j`.
    pub fn off_diagonal_block(&self) -> DMatrix<f64> {
        let pairs = self.off_diagonal_pairs();
        let mut block = DMatrix::zeros(pairs.len(), pairs.len());
        for (r, &(i, j)) in pairs.iter().enumerate() {
            for (c, &(k, l)) in pairs.iter().enumerate() {
                block[(r, c)] = self.zeta[(self.pair_index(i, j), self.pair_index(k, l))];
            }
        }
        block
    }

    /// Ordered off-diagonal pairs in row-major order.
    pub fn off_diagonal_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.n_states;
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j)
            .collect()
    }

    /// Row sums of `ζ^L`, i.e. the truncated overlap series
    /// `Σ_{|w|=L} √(P(w|i)·P(w|j))` per pair, computed by repeated matvec.
    pub fn row_sums_after(&self, l: usize) -> DVector<f64> {
        let mut v = DVector::from_element(self.zeta.nrows(), 1.0);
        for _ in 0..l {
            v = &self.zeta * v;
        }
        v
    }

    /// Diagonal-pair mass of `ζ^L` per row: the overlaps of the length-`L`
    /// encoding states.
    pub fn diagonal_mass_after(&self, l: usize) -> DVector<f64> {
        let mut v = self.diagonal_indicator();
        for _ in 0..l {
            v = &self.zeta * v;
        }
        v
    }

    fn diagonal_indicator(&self) -> DVector<f64> {
        let n = self.n_states;
        let mut v = DVector::zeros(n * n);
        for i in 0..n {
            v[self.pair_index(i, i)] = 1.0;
        }
        v
    }

    /// Spectral radius by power iteration (all-ones start, relative
    /// tolerance `1e-10`, capped at `1e5` iterations). With
    /// `restrict_offdiag` the estimate is taken on the off-diagonal pair
    /// block, whose radius governs overlap convergence.
    pub fn spectral_radius(&self, restrict_offdiag: bool) -> Result<f64> {
        let m = if restrict_offdiag {
            self.off_diagonal_block()
        } else {
            self.zeta.clone()
        };
        power_iteration_radius(&m, 1e-10, 100_000)
    }
}

/// Overlaps of the length-`L` encoding states together with their staged
/// complexity `C̃_q(L)`.
#[derive(Debug, Clone)]
pub struct EtaOverlapTable {
    pub len: usize,
    overlaps: DMatrix<f64>,
    pub tilde_cq: f64,
}

impl EtaOverlapTable {
    pub fn overlap(&self, i: usize, j: usize) -> f64 {
        self.overlaps[(i, j)]
    }

    pub fn overlaps(&self) -> &DMatrix<f64> {
        &self.overlaps
    }
}

/// Plateau-estimator outcome for the cryptic order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrypticOrderEstimate {
    Order(usize),
    ExceedsCap(usize),
}

impl std::fmt::Display for CrypticOrderEstimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Order(k) => write!(f, "{k}"),
            Self::ExceedsCap(cap) => write!(f, "exceeds {cap}"),
        }
    }
}

/// Solve the overlap self-consistency equations.
///
/// Off-diagonal coordinates satisfy `(I − ζ_od)·c_od = b`, where `b`
/// collects the terms whose successors coincide. The system is solved by LU
/// with an iterative-refinement fallback from `c_od = 0`; the result is
/// symmetrized and checked: residual below `tol`, off-diagonal entries
/// strictly below one, positive semidefinite.
pub fn solve_gram(machine: &EpsilonMachine, tol: f64) -> Result<GramMatrix> {
    let n = machine.n_states();
    if n == 1 {
        return Ok(GramMatrix::identity(1));
    }
    let zeta = PairTransitionMatrix::new(machine);
    let pairs = zeta.off_diagonal_pairs();
    let dim = pairs.len();
    let block = zeta.off_diagonal_block();

    let mut rhs = DVector::zeros(dim);
    for (r, &(i, j)) in pairs.iter().enumerate() {
        let mut b = 0.0;
        for x in 0..machine.n_symbols() {
            let w = (machine.emit_prob(i, x) * machine.emit_prob(j, x)).sqrt();
            if w > 0.0 && machine.successor(i, x) == machine.successor(j, x) {
                b += w;
            }
        }
        rhs[r] = b;
    }

    let system = DMatrix::identity(dim, dim) - &block;
    let residual_of = |sol: &DVector<f64>| (&system * sol - &rhs).amax();

    let mut solution = system.clone().lu().solve(&rhs);
    if let Some(sol) = &solution {
        if residual_of(sol) > tol {
            solution = None;
        }
    }
    let c_od = match solution {
        Some(sol) => sol,
        None => {
            // Geometric refinement: c ← ζ_od·c + b, converges whenever the
            // off-diagonal spectral radius is below one.
            let mut c = DVector::zeros(dim);
            let mut converged = false;
            for _ in 0..500_000 {
                let next = &block * &c + &rhs;
                let delta = (&next - &c).amax();
                c = next;
                if delta < tol * 0.1 {
                    converged = true;
                    break;
                }
            }
            if !converged || residual_of(&c) > tol {
                return Err(QsimError::Degenerate(
                    "overlap system is singular or ill-conditioned".into(),
                ));
            }
            c
        }
    };

    let mut c = DMatrix::identity(n, n);
    for (r, &(i, j)) in pairs.iter().enumerate() {
        c[(i, j)] = c_od[r];
    }
    // The ordered-pair system is exactly symmetric; average out round-off.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = avg.clamp(0.0, 1.0);
            c[(j, i)] = c[(i, j)];
        }
    }

    let gram = GramMatrix::from_matrix(c);
    for i in 0..n {
        for j in (i + 1)..n {
            if gram.entry(i, j) >= 1.0 - tol {
                return Err(QsimError::Degenerate(format!(
                    "states `{}` and `{}` have unit overlap",
                    machine.states()[i],
                    machine.states()[j]
                )));
            }
        }
    }
    let residual = gram.self_consistency_residual(machine);
    if residual > tol {
        return Err(QsimError::Numerical(format!(
            "overlap solve residual {residual:.3e} exceeds tolerance {tol:.1e}"
        )));
    }
    if gram.min_eigenvalue() < -1e-10 {
        return Err(QsimError::Numerical(
            "solved overlap matrix is not positive semidefinite".into(),
        ));
    }
    Ok(gram)
}

/// Truncated overlap series `c_ij ≈ Σ_{|w|=L} √(P(w|i)·P(w|j))`, evaluated
/// through powers of ζ rather than literal word enumeration. Converges to
/// [`solve_gram`] entrywise from above as `L` grows; used as an independent
/// oracle.
pub fn gram_series(machine: &EpsilonMachine, l: usize) -> GramMatrix {
    let n = machine.n_states();
    let zeta = PairTransitionMatrix::new(machine);
    let sums = zeta.row_sums_after(l);
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            c[(i, j)] = sums[zeta.pair_index(i, j)];
        }
    }
    GramMatrix::from_matrix(c)
}

/// Entropy in bits of the mixture `Σ_i w_i |v_i⟩⟨v_i|` given only the
/// overlap matrix `⟨v_i|v_j⟩`: the nonzero spectrum equals that of
/// `D_√w · overlaps · D_√w`.
pub fn mixture_entropy_bits(overlaps: &DMatrix<f64>, weights: &[f64]) -> f64 {
    let n = weights.len();
    debug_assert_eq!(overlaps.nrows(), n);
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = (weights[i] * weights[j]).sqrt() * overlaps[(i, j)];
        }
    }
    let (vals, _) = symmetric_eigen_desc(&g);
    shannon_bits(vals.as_slice())
}

/// Overlap tables for encoding lengths `0..=l_max`, computed incrementally.
pub fn eta_overlap_series(
    machine: &EpsilonMachine,
    pi: &StationaryDistribution,
    l_max: usize,
) -> Vec<EtaOverlapTable> {
    let n = machine.n_states();
    let zeta = PairTransitionMatrix::new(machine);
    let mut mass = {
        let mut v = DVector::zeros(n * n);
        for i in 0..n {
            v[zeta.pair_index(i, i)] = 1.0;
        }
        v
    };
    let mut tables = Vec::with_capacity(l_max + 1);
    for l in 0..=l_max {
        if l > 0 {
            mass = zeta.matrix() * &mass;
        }
        let mut overlaps = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                overlaps[(i, j)] = mass[zeta.pair_index(i, j)];
            }
        }
        let tilde_cq = mixture_entropy_bits(&overlaps, pi.probs());
        tables.push(EtaOverlapTable {
            len: l,
            overlaps,
            tilde_cq,
        });
    }
    tables
}

/// Overlap table for a single encoding length.
pub fn eta_overlaps(
    machine: &EpsilonMachine,
    pi: &StationaryDistribution,
    l: usize,
) -> EtaOverlapTable {
    eta_overlap_series(machine, pi, l)
        .pop()
        .expect("series is non-empty")
}

/// Plateau estimator for the cryptic order: smallest `k ≤ cap` with
/// `max_ij |overlap_k(i,j) − c_ij| < tol`.
///
/// The scan starts at `k = 1`: the length-zero encoding is orthogonal by
/// construction and does not witness a plateau.
pub fn effective_cryptic_order(
    machine: &EpsilonMachine,
    gram: &GramMatrix,
    tol: f64,
    cap: usize,
) -> CrypticOrderEstimate {
    let n = machine.n_states();
    let zeta = PairTransitionMatrix::new(machine);
    let mut mass = DVector::zeros(n * n);
    for i in 0..n {
        mass[zeta.pair_index(i, i)] = 1.0;
    }
    for k in 1..=cap {
        mass = zeta.matrix() * &mass;
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                dev = dev.max((mass[zeta.pair_index(i, j)] - gram.entry(i, j)).abs());
            }
        }
        if dev < tol {
            return CrypticOrderEstimate::Order(k);
        }
    }
    CrypticOrderEstimate::ExceedsCap(cap)
}

/// Closed-form off-diagonal overlap for the upset-gambler family:
/// `c_AB = √((1−p)(1−q)) / (1 − √(pq))`.
pub fn upset_gambler_overlap(p: f64, q: f64) -> f64 {
    ((1.0 - p) * (1.0 - q)).sqrt() / (1.0 - (p * q).sqrt())
}
