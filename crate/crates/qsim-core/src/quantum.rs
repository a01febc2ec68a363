//! Quantum memory states, complexities, and the simulator unitary.
//!
//! Given a machine and its solved overlap matrix, this module constructs
//! real amplitude vectors `|σ_i⟩` reproducing the overlaps, the steady-state
//! operator `φ = Σ_i π_i |σ_i⟩⟨σ_i|` with its entropies, and the orthogonal
//! operator `U` acting on (memory ⊗ symbol) that advances the simulation by
//! one step:
//!
//! ```text
//! U (|σ_i⟩ ⊗ |0⟩) = Σ_x √(P(x|i)) |σ_{λ(i,x)}⟩ ⊗ |x⟩.
//! ```
//!
//! Columns of `U` for inputs `|e_j⟩|0⟩` are determined by that relation; the
//! remaining columns are completed deterministically by modified
//! Gram-Schmidt over canonical basis vectors.

use nalgebra::{DMatrix, DVector};

use crate::error::{QsimError, Result};
use crate::gram::{solve_gram, GramMatrix, DEFAULT_GRAM_TOL};
use crate::linalg::{max_abs, shannon_bits, symmetric_eigen_desc};
use crate::machine::{EpsilonMachine, StationaryDistribution};

/// Eigenvalues of the overlap matrix below this threshold do not contribute
/// a memory dimension.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Memory-state vectors in an orthonormal working basis.
///
/// Row `i` of `vectors` holds the coordinates of `|σ_i⟩`; the number of
/// columns is the rank of the overlap matrix. Coordinates are
/// convention-dependent (any orthogonal rotation is equally valid); all
/// observable quantities depend only on the overlaps.
#[derive(Debug, Clone)]
pub struct MemoryStateSet {
    vectors: DMatrix<f64>,
    gram: GramMatrix,
}

impl MemoryStateSet {
    /// Construct memory states by spectral factorization of the overlap
    /// matrix: numerically stable for near-degenerate overlaps and handles
    /// rank deficiency uniformly. Deterministic: eigenvalues descending,
    /// each eigenvector's largest-magnitude entry positive.
    pub fn from_gram(gram: &GramMatrix, rank_tol: f64) -> Result<Self> {
        let (vals, vecs) = symmetric_eigen_desc(gram.matrix());
        if vals[vals.len() - 1] < -1e-8 {
            return Err(QsimError::Numerical(format!(
                "overlap matrix has negative eigenvalue {:.3e}; input is corrupted",
                vals[vals.len() - 1]
            )));
        }
        let rank = vals.iter().filter(|&&v| v > rank_tol).count().max(1);
        let n = gram.dim();
        let mut vectors = DMatrix::zeros(n, rank);
        for k in 0..rank {
            let scale = vals[k].max(0.0).sqrt();
            for i in 0..n {
                vectors[(i, k)] = vecs[(i, k)] * scale;
            }
        }
        Ok(Self {
            vectors,
            gram: gram.clone(),
        })
    }

    /// Construct memory states in triangular (inverse Gram-Schmidt) form:
    /// `|σ_1⟩ = |e_1⟩`, each later state adds at most one new basis
    /// direction. Linearly dependent states simply skip the new direction,
    /// so the construction also covers rank-deficient overlap matrices.
    pub fn from_gram_triangular(gram: &GramMatrix, rank_tol: f64) -> Result<Self> {
        let n = gram.dim();
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
        // Pivot state that introduced each basis direction.
        let mut pivots: Vec<usize> = Vec::new();
        for i in 0..n {
            let mut coords = vec![0.0; pivots.len() + 1];
            for (k, &p) in pivots.iter().enumerate() {
                let mut t = gram.entry(i, p);
                for m in 0..k {
                    t -= coords[m] * rows[p][m];
                }
                coords[k] = t / rows[p][k];
            }
            let used: f64 = coords[..pivots.len()].iter().map(|v| v * v).sum();
            let residual = gram.entry(i, i) - used;
            if residual < -1e-8 {
                return Err(QsimError::Numerical(format!(
                    "overlap matrix is not positive semidefinite at state {i} \
                     (residual {residual:.3e})"
                )));
            }
            if residual > rank_tol {
                coords[pivots.len()] = residual.sqrt();
                pivots.push(i);
            } else {
                coords.truncate(pivots.len());
            }
            rows.push(coords);
        }
        let rank = pivots.len().max(1);
        let mut vectors = DMatrix::zeros(n, rank);
        for (i, row) in rows.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                vectors[(i, k)] = v;
            }
        }
        Ok(Self {
            vectors,
            gram: gram.clone(),
        })
    }

    /// Number of causal states.
    pub fn n_states(&self) -> usize {
        self.vectors.nrows()
    }

    /// Memory dimension (rank of the overlap matrix).
    pub fn rank(&self) -> usize {
        self.vectors.ncols()
    }

    /// Coordinates of `|σ_i⟩`.
    pub fn state_vector(&self, i: usize) -> DVector<f64> {
        self.vectors.row(i).transpose()
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// The overlap matrix the states were built from.
    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    /// Largest deviation between `⟨σ_i|σ_j⟩` and the source overlaps.
    pub fn reproduction_defect(&self) -> f64 {
        let prod = &self.vectors * self.vectors.transpose();
        max_abs(&(prod - self.gram.matrix()))
    }

    /// Apply an orthogonal rotation to the working basis. Observable
    /// quantities are invariant under this.
    pub fn rotated(&self, rotation: &DMatrix<f64>) -> Self {
        Self {
            vectors: &self.vectors * rotation,
            gram: self.gram.clone(),
        }
    }
}

/// The stationary memory state `φ = Σ_i π_i |σ_i⟩⟨σ_i|`.
#[derive(Debug, Clone)]
pub struct SteadyStateOperator {
    phi: DMatrix<f64>,
    eigenvalues: DVector<f64>,
}

impl SteadyStateOperator {
    pub fn new(states: &MemoryStateSet, pi: &StationaryDistribution) -> Self {
        let r = states.rank();
        let mut phi = DMatrix::zeros(r, r);
        for (i, &w) in pi.probs().iter().enumerate() {
            let v = states.state_vector(i);
            phi += w * &v * v.transpose();
        }
        let (eigenvalues, _) = symmetric_eigen_desc(&phi);
        Self { phi, eigenvalues }
    }

    pub fn from_matrix(phi: DMatrix<f64>) -> Self {
        let (eigenvalues, _) = symmetric_eigen_desc(&phi);
        Self { phi, eigenvalues }
    }

    pub fn dim(&self) -> usize {
        self.phi.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.phi
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &[f64] {
        self.eigenvalues.as_slice()
    }

    pub fn trace(&self) -> f64 {
        self.phi.trace()
    }
}

/// Von Neumann entropy of the steady state in bits: the quantum statistical
/// complexity `C_q`.
pub fn quantum_complexity(phi: &SteadyStateOperator) -> f64 {
    shannon_bits(phi.eigenvalues())
}

/// `log₂` of the ε-rank of the steady state: the quantum topological
/// complexity `C_q⁰`.
pub fn quantum_topological(phi: &SteadyStateOperator, rank_tol: f64) -> f64 {
    let rank = phi.eigenvalues().iter().filter(|&&v| v > rank_tol).count();
    (rank.max(1) as f64).log2()
}

/// Rényi entropy `H^α(φ)` in bits. `α = 1` and `α = 0` map to the von
/// Neumann entropy and the log-rank; `α = ∞` gives `−log₂ λ_max`.
pub fn renyi_entropy(phi: &SteadyStateOperator, alpha: f64) -> Result<f64> {
    if alpha < 0.0 || alpha.is_nan() {
        return Err(QsimError::InvalidParameter(format!(
            "Rényi order {alpha} must be nonnegative"
        )));
    }
    let eigs: Vec<f64> = phi
        .eigenvalues()
        .iter()
        .cloned()
        .filter(|&v| v > 1e-15)
        .collect();
    if alpha == 0.0 {
        return Ok(quantum_topological(phi, DEFAULT_RANK_TOL));
    }
    if (alpha - 1.0).abs() < 1e-12 {
        return Ok(shannon_bits(&eigs));
    }
    if alpha.is_infinite() {
        let max = eigs.iter().cloned().fold(0.0f64, f64::max);
        return Ok((-max.log2()).max(0.0));
    }
    let sum: f64 = eigs.iter().map(|&v| v.powf(alpha)).sum();
    Ok((sum.log2() / (1.0 - alpha)).max(0.0))
}

/// Quantum complexity summary.
#[derive(Debug, Clone)]
pub struct QuantumComplexityReport {
    /// `C_q` in bits.
    pub c_q: f64,
    /// `C_q⁰` in bits.
    pub c_q0: f64,
    /// Rényi entropies on a standard order grid.
    pub renyi: Vec<(f64, f64)>,
}

impl QuantumComplexityReport {
    pub fn new(phi: &SteadyStateOperator) -> Self {
        let grid = [0.0, 0.5, 1.0, 2.0, f64::INFINITY];
        let renyi = grid
            .iter()
            .map(|&a| (a, renyi_entropy(phi, a).expect("grid orders are valid")))
            .collect();
        Self {
            c_q: quantum_complexity(phi),
            c_q0: quantum_topological(phi, DEFAULT_RANK_TOL),
            renyi,
        }
    }
}

/// Real orthogonal one-step operator on the joint (memory ⊗ symbol) space.
///
/// Basis order is memory-major, symbol-minor: index `j·|A| + x` holds
/// `|e_j⟩|x⟩`. The ancilla symbol register is prepared in the first alphabet
/// basis state.
#[derive(Debug, Clone)]
pub struct UnitaryModel {
    u: DMatrix<f64>,
    rank: usize,
    n_symbols: usize,
}

impl UnitaryModel {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn joint_dim(&self) -> usize {
        self.rank * self.n_symbols
    }

    pub fn joint_index(&self, memory: usize, symbol: usize) -> usize {
        memory * self.n_symbols + symbol
    }

    /// Assemble from raw parts without checks; intended for fault-injection
    /// tests.
    pub fn from_raw(u: DMatrix<f64>, rank: usize, n_symbols: usize) -> Self {
        Self { u, rank, n_symbols }
    }

    /// `‖UᵀU − I‖∞`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.u.nrows();
        max_abs(&(self.u.transpose() * &self.u - DMatrix::identity(d, d)))
    }

    /// Apply `U` to `memory ⊗ |0⟩`.
    pub fn apply_to_memory(&self, memory: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.joint_dim());
        for j in 0..self.rank {
            let amp = memory[j];
            if amp != 0.0 {
                out += amp * self.u.column(self.joint_index(j, 0));
            }
        }
        out
    }

    /// The memory-register Kraus operator for outcome `x`:
    /// `K_x = (I ⊗ ⟨x|) U (I ⊗ |0⟩)`.
    pub fn kraus(&self, symbol: usize) -> DMatrix<f64> {
        let r = self.rank;
        DMatrix::from_fn(r, r, |jp, j| {
            self.u[(self.joint_index(jp, symbol), self.joint_index(j, 0))]
        })
    }

    /// The channel `Λ(ρ) = tr_symbol[U (ρ ⊗ |0⟩⟨0|) Uᵀ] = Σ_x K_x ρ K_xᵀ`
    /// that one step induces on the memory register.
    pub fn memory_channel(&self, rho: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.rank, self.rank);
        for x in 0..self.n_symbols {
            let k = self.kraus(x);
            out += &k * rho * k.transpose();
        }
        out
    }
}

/// The one-step images `|1_i⟩ = Σ_x √(P(x|i)) |σ_{λ(i,x)}⟩|x⟩`, one column
/// per causal state.
fn step_images(machine: &EpsilonMachine, states: &MemoryStateSet) -> DMatrix<f64> {
    let (n, a, r) = (machine.n_states(), machine.n_symbols(), states.rank());
    let mut images = DMatrix::zeros(r * a, n);
    for i in 0..n {
        for x in 0..a {
            let p = machine.emit_prob(i, x);
            if p > 0.0 {
                let target = machine.successor(i, x).expect("support");
                let amp = p.sqrt();
                for j in 0..r {
                    images[(j * a + x, i)] += amp * states.vectors()[(target, j)];
                }
            }
        }
    }
    images
}

/// Construct the simulator unitary for a machine and a consistent memory
/// state set.
///
/// Columns for inputs `|e_j⟩|0⟩` follow from the one-step relation expanded
/// in the working basis. The remaining columns are completed by modified
/// Gram-Schmidt over canonical basis vectors taken in index order, skipping
/// candidates whose residual norm falls below `1e-8`.
pub fn build_unitary(machine: &EpsilonMachine, states: &MemoryStateSet) -> Result<UnitaryModel> {
    let (a, r) = (machine.n_symbols(), states.rank());
    let dim = r * a;

    // Express each basis vector e_j through the memory states (min-norm
    // solution via the pseudo-inverse, which keeps the conditioning at
    // √κ of the overlap matrix) and push it through the one-step images.
    let s = states.vectors().transpose(); // r × n, columns are σ_i
    let coeffs = s.pseudo_inverse(1e-9).map_err(|e| {
        QsimError::Numerical(format!("memory states do not span the working space: {e}"))
    })?; // n × r, column j solves S·a = e_j
    let mut determined = step_images(machine, states) * coeffs; // dim × r

    // The determined columns must already be orthonormal; anything else
    // signals an inconsistent machine/overlap pair.
    let skew = determined.transpose() * &determined;
    let defect = max_abs(&(&skew - DMatrix::identity(r, r)));
    if defect > 1e-8 {
        return Err(QsimError::Numerical(format!(
            "determined unitary columns deviate from orthonormality by {defect:.3e}; \
             memory states are inconsistent with the machine"
        )));
    }
    // Polar polish: snap to the nearest orthonormal frame, scrubbing the
    // residual O(defect) skew without leaving the column span.
    let (skew_vals, skew_vecs) = symmetric_eigen_desc(&skew);
    let inv_sqrt = &skew_vecs
        * DMatrix::from_diagonal(&skew_vals.map(|v| 1.0 / v.sqrt()))
        * skew_vecs.transpose();
    determined *= inv_sqrt;

    let mut u = DMatrix::zeros(dim, dim);
    let mut filled: Vec<usize> = Vec::with_capacity(dim);
    for j in 0..r {
        let col = j * a; // input |e_j⟩|0⟩
        u.set_column(col, &determined.column(j));
        filled.push(col);
    }

    // Deterministic completion: canonical candidates in index order.
    let mut candidate = 0usize;
    for col in 0..dim {
        if filled.contains(&col) {
            continue;
        }
        loop {
            if candidate >= dim {
                return Err(QsimError::Numerical(
                    "ran out of canonical candidates while completing the unitary".into(),
                ));
            }
            let mut v = DVector::zeros(dim);
            v[candidate] = 1.0;
            candidate += 1;
            // Two MGS passes keep the completed columns orthogonal to
            // working precision.
            for _ in 0..2 {
                for &f in &filled {
                    let proj = u.column(f).dot(&v);
                    v -= proj * u.column(f).clone_owned();
                }
            }
            let norm = v.norm();
            if norm >= 1e-8 {
                v /= norm;
                u.set_column(col, &v);
                filled.push(col);
                break;
            }
        }
    }

    Ok(UnitaryModel {
        u,
        rank: r,
        n_symbols: a,
    })
}

/// Residuals of a constructed model.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    /// `‖UᵀU − I‖∞`.
    pub unitarity_defect: f64,
    /// Largest `‖U(|σ_i⟩|0⟩) − |1_i⟩‖` over states.
    pub step_residual: f64,
    /// Largest deviation between state overlaps and the overlap matrix.
    pub gram_defect: f64,
    pub tol: f64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.unitarity_defect < self.tol
            && self.step_residual < self.tol
            && self.gram_defect < self.tol
    }
}

/// Check a built model against the machine: unitarity, the one-step
/// relation, and overlap reproduction.
pub fn verify_unitary(
    machine: &EpsilonMachine,
    states: &MemoryStateSet,
    unitary: &UnitaryModel,
    tol: f64,
) -> VerificationReport {
    let images = step_images(machine, states);
    let mut step_residual = 0.0f64;
    for i in 0..machine.n_states() {
        let mapped = unitary.apply_to_memory(&states.state_vector(i));
        step_residual = step_residual.max((mapped - images.column(i)).norm());
    }
    VerificationReport {
        unitarity_defect: unitary.unitarity_defect(),
        step_residual,
        gram_defect: states.reproduction_defect(),
        tol,
    }
}

/// `‖Λ(φ) − φ‖∞`: how far the steady state is from being a fixed point of
/// the memory channel. Below `1e-10` for correctly built models.
pub fn memory_channel_fixed_point(unitary: &UnitaryModel, phi: &SteadyStateOperator) -> f64 {
    max_abs(&(unitary.memory_channel(phi.matrix()) - phi.matrix()))
}

/// A fully constructed q-simulator: machine, stationary distribution,
/// overlaps, memory states, steady state, and the one-step unitary.
#[derive(Debug, Clone)]
pub struct QuantumModel {
    machine: EpsilonMachine,
    pi: StationaryDistribution,
    gram: GramMatrix,
    states: MemoryStateSet,
    phi: SteadyStateOperator,
    unitary: UnitaryModel,
}

impl QuantumModel {
    /// Build the full pipeline for a validated machine.
    pub fn build(machine: EpsilonMachine) -> Result<Self> {
        machine.validated()?;
        let pi = machine.stationary_distribution()?;
        let gram = solve_gram(&machine, DEFAULT_GRAM_TOL)?;
        let states = MemoryStateSet::from_gram(&gram, DEFAULT_RANK_TOL)?;
        Self::assemble(machine, pi, gram, states)
    }

    /// Build with an explicit memory-state construction (e.g. the
    /// triangular convention).
    pub fn assemble(
        machine: EpsilonMachine,
        pi: StationaryDistribution,
        gram: GramMatrix,
        states: MemoryStateSet,
    ) -> Result<Self> {
        let phi = SteadyStateOperator::new(&states, &pi);
        let unitary = build_unitary(&machine, &states)?;
        Ok(Self {
            machine,
            pi,
            gram,
            states,
            phi,
            unitary,
        })
    }

    pub fn machine(&self) -> &EpsilonMachine {
        &self.machine
    }

    pub fn stationary(&self) -> &StationaryDistribution {
        &self.pi
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    pub fn states(&self) -> &MemoryStateSet {
        &self.states
    }

    pub fn phi(&self) -> &SteadyStateOperator {
        &self.phi
    }

    pub fn unitary(&self) -> &UnitaryModel {
        &self.unitary
    }

    pub fn quantum_report(&self) -> QuantumComplexityReport {
        QuantumComplexityReport::new(&self.phi)
    }

    pub fn verification(&self, tol: f64) -> VerificationReport {
        verify_unitary(&self.machine, &self.states, &self.unitary, tol)
    }

    pub fn channel_residual(&self) -> f64 {
        memory_channel_fixed_point(&self.unitary, &self.phi)
    }

    /// Replace the one-step operator without re-verification. Fault-injection
    /// support for tests; a mismatched operator will fail every residual
    /// check.
    pub fn with_unitary(mut self, unitary: UnitaryModel) -> Self {
        self.unitary = unitary;
        self
    }
}
