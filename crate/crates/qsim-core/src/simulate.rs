//! Running the q-simulator and comparing its statistics to the process.
//!
//! A simulation step embeds the memory vector into the joint (memory ⊗
//! symbol) space, applies the one-step unitary, samples a symbol from the
//! Born marginals, and collapses the memory to the renormalized conditional
//! vector. Between steps only the memory vector is retained; the symbol
//! register is measured and recycled.
//!
//! Exact L-step joint states are available separately as a bounded-size
//! oracle, and word distributions (exact, quantum-sampled, and
//! classical-sampled) support the statistical comparisons.

use nalgebra::{DMatrix, DVector};

use crate::error::{QsimError, Result};
use crate::gram::GramMatrix;
use crate::linalg::symmetric_eigen_desc;
use crate::machine::{EpsilonMachine, StationaryDistribution};
use crate::parallel;
use crate::quantum::{QuantumModel, UnitaryModel};
use crate::rng::{derive_seed, sample_index, SeedStream};

/// Cap on `rank · |A|^L` for exact joint states.
pub const JOINT_DIM_CAP: usize = 1 << 22;

/// Cap on `|A|^len` for dense word distributions.
pub const WORD_DIM_CAP: usize = 1 << 20;

/// Initial memory configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    /// Start from `|σ_i⟩` for a fixed causal state.
    State(usize),
    /// Draw the initial state from the stationary distribution.
    Stationary,
}

/// One running q-simulator: memory vector plus a seeded symbol sampler.
///
/// Deterministic for a fixed seed. The random stream is consumed as one
/// draw for the initial state (stationary start only), then one draw per
/// emitted symbol.
#[derive(Debug, Clone)]
pub struct SimulatorState<'m> {
    model: &'m QuantumModel,
    memory: DVector<f64>,
    rng: SeedStream,
    step_count: u64,
}

impl<'m> SimulatorState<'m> {
    pub fn memory(&self) -> &[f64] {
        self.memory.as_slice()
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Emit one symbol and collapse the memory.
    pub fn step(&mut self) -> Result<usize> {
        let u = self.rng.uniform();
        let symbol = step_memory(self.model.unitary(), &mut self.memory, u)?;
        self.step_count += 1;
        Ok(symbol)
    }

    /// Emit `length` symbols.
    pub fn run(&mut self, length: usize) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(length);
        for _ in 0..length {
            out.push(self.step()?);
        }
        Ok(out)
    }
}

/// Initialize a simulator. With [`Start::Stationary`] the initial causal
/// state is drawn once from π by inverse CDF over the declared state order.
pub fn init_simulator(model: &QuantumModel, start: Start, seed: u64) -> Result<SimulatorState<'_>> {
    let mut rng = SeedStream::new(seed);
    let index = match start {
        Start::State(i) => {
            if i >= model.machine().n_states() {
                return Err(QsimError::IndexOutOfRange {
                    index: i,
                    count: model.machine().n_states(),
                });
            }
            i
        }
        Start::Stationary => sample_index(model.stationary().probs(), rng.uniform()),
    };
    Ok(SimulatorState {
        model,
        memory: model.states().state_vector(index),
        rng,
        step_count: 0,
    })
}

/// Born marginals `p(x) = Σ_j |amp(j, x)|²` after one unitary application to
/// `memory ⊗ |0⟩`.
pub fn symbol_marginals(unitary: &UnitaryModel, memory: &DVector<f64>) -> Vec<f64> {
    let joint = unitary.apply_to_memory(memory);
    let (r, a) = (unitary.rank(), unitary.n_symbols());
    (0..a)
        .map(|x| {
            (0..r)
                .map(|j| joint[unitary.joint_index(j, x)].powi(2))
                .sum()
        })
        .collect()
}

/// One simulation step on a bare memory vector: apply `U`, sample the
/// symbol by inverse CDF from `u`, collapse and renormalize the memory.
fn step_memory(unitary: &UnitaryModel, memory: &mut DVector<f64>, u: f64) -> Result<usize> {
    let joint = unitary.apply_to_memory(memory);
    let (r, a) = (unitary.rank(), unitary.n_symbols());
    let marginals: Vec<f64> = (0..a)
        .map(|x| {
            (0..r)
                .map(|j| joint[unitary.joint_index(j, x)].powi(2))
                .sum()
        })
        .collect();
    let symbol = sample_index(&marginals, u);
    let mass = marginals[symbol];
    if mass < 1e-12 {
        return Err(QsimError::Numerical(format!(
            "degenerate symbol marginal {mass:.3e}; model is corrupted"
        )));
    }
    let scale = mass.sqrt();
    for j in 0..r {
        memory[j] = joint[unitary.joint_index(j, symbol)] / scale;
    }
    let norm = memory.norm();
    *memory /= norm;
    Ok(symbol)
}

/// Exact joint state after `l` unitary applications from `|σ_i⟩`.
///
/// Amplitudes are stored per word: row `w` (a base-`|A|` encoded word read
/// left-to-right, first symbol most significant) holds the unnormalized
/// memory vector conditioned on that word.
#[derive(Debug, Clone)]
pub struct JointState {
    pub len: usize,
    n_symbols: usize,
    /// `|A|^len × rank` matrix of amplitudes.
    amps: DMatrix<f64>,
}

impl JointState {
    pub fn n_words(&self) -> usize {
        self.amps.nrows()
    }

    /// Squared norm of the whole vector.
    pub fn norm_squared(&self) -> f64 {
        self.amps.iter().map(|v| v * v).sum()
    }

    /// `P(word|i)` for every word, in encoded order.
    pub fn word_marginals(&self) -> Vec<f64> {
        (0..self.n_words())
            .map(|w| self.amps.row(w).iter().map(|v| v * v).sum())
            .collect()
    }

    /// Unnormalized memory component for one word.
    pub fn memory_component(&self, word: &[usize]) -> DVector<f64> {
        let idx = encode_word(word, self.n_symbols);
        self.amps.row(idx).transpose()
    }

    /// Inner product with another joint state of the same shape.
    pub fn overlap(&self, other: &JointState) -> f64 {
        debug_assert_eq!(self.amps.shape(), other.amps.shape());
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a * b)
            .sum()
    }
}

fn encode_word(word: &[usize], n_symbols: usize) -> usize {
    word.iter().fold(0, |acc, &x| acc * n_symbols + x)
}

fn decode_word(mut index: usize, n_symbols: usize, len: usize) -> Vec<usize> {
    let mut word = vec![0; len];
    for slot in (0..len).rev() {
        word[slot] = index % n_symbols;
        index /= n_symbols;
    }
    word
}

/// Build the exact joint state for `l` steps from causal state `i`.
pub fn joint_state(model: &QuantumModel, i: usize, l: usize) -> Result<JointState> {
    let machine = model.machine();
    if i >= machine.n_states() {
        return Err(QsimError::IndexOutOfRange {
            index: i,
            count: machine.n_states(),
        });
    }
    let u = model.unitary();
    let (r, a) = (u.rank(), u.n_symbols());
    let n_words = a
        .checked_pow(l as u32)
        .filter(|&w| w.saturating_mul(r) <= JOINT_DIM_CAP)
        .ok_or_else(|| {
            QsimError::DimensionCap(format!("joint state of {l} symbol registers is too large"))
        })?;

    let mut amps = DMatrix::zeros(1, r);
    amps.set_row(0, &model.states().state_vector(i).transpose());
    for step in 0..l {
        let prefix_count = a.pow(step as u32);
        let mut next = DMatrix::zeros(prefix_count * a, r);
        for w in 0..prefix_count {
            let mem = amps.row(w).transpose();
            let joint = u.apply_to_memory(&mem);
            for x in 0..a {
                for j in 0..r {
                    next[(w * a + x, j)] = joint[u.joint_index(j, x)];
                }
            }
        }
        amps = next;
    }
    debug_assert_eq!(amps.nrows(), n_words);
    Ok(JointState {
        len: l,
        n_symbols: a,
        amps,
    })
}

/// Largest deviation `max_ij |⟨L_i|L_j⟩ − c_ij|` between joint-state
/// overlaps at length `l` and the solved overlap matrix. Unitarity forces
/// this below `1e-10` for correctly built models.
pub fn joint_overlap_invariance(model: &QuantumModel, gram: &GramMatrix, l: usize) -> Result<f64> {
    let n = model.machine().n_states();
    let joints: Vec<JointState> = (0..n)
        .map(|i| joint_state(model, i, l))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((joints[i].overlap(&joints[j]) - gram.entry(i, j)).abs());
        }
    }
    Ok(worst)
}

/// Distribution over all words of a fixed length, dense in encoded word
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct WordDistribution {
    pub length: usize,
    n_symbols: usize,
    probs: Vec<f64>,
}

impl WordDistribution {
    /// Build from a dense probability table in encoded word order.
    pub fn from_dense(length: usize, n_symbols: usize, probs: Vec<f64>) -> Self {
        assert_eq!(probs.len(), n_symbols.pow(length as u32));
        Self {
            length,
            n_symbols,
            probs,
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, word: &[usize]) -> f64 {
        self.probs[encode_word(word, self.n_symbols)]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Iterate `(word, probability)` pairs in encoded order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(idx, &p)| (decode_word(idx, self.n_symbols, self.length), p))
    }
}

fn word_count(n_symbols: usize, length: usize) -> Result<usize> {
    n_symbols
        .checked_pow(length as u32)
        .filter(|&w| w <= WORD_DIM_CAP)
        .ok_or_else(|| QsimError::DimensionCap(format!("{n_symbols}^{length} words is too large")))
}

/// Exact π-weighted word distribution of the classical process.
pub fn exact_distribution(
    machine: &EpsilonMachine,
    pi: &StationaryDistribution,
    length: usize,
) -> Result<WordDistribution> {
    let a = machine.n_symbols();
    let n_words = word_count(a, length)?;
    let mut probs = vec![0.0; n_words];
    for (idx, slot) in probs.iter_mut().enumerate() {
        let word = decode_word(idx, a, length);
        *slot = machine.word_probability_stationary(pi, &word);
    }
    Ok(WordDistribution {
        length,
        n_symbols: a,
        probs,
    })
}

/// Total variation distance `½ Σ |a − b|` between two distributions over the
/// same word space.
pub fn tv_distance(a: &WordDistribution, b: &WordDistribution) -> f64 {
    assert_eq!(a.length, b.length);
    assert_eq!(a.n_symbols, b.n_symbols);
    0.5 * a
        .probs
        .iter()
        .zip(&b.probs)
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
}

fn counts_to_distribution(counts: Vec<u64>, n: usize, length: usize, a: usize) -> WordDistribution {
    WordDistribution {
        length,
        n_symbols: a,
        probs: counts.iter().map(|&c| c as f64 / n as f64).collect(),
    }
}

/// Empirical distribution over `n_samples` independent quantum runs of
/// `length` steps, each from a fresh stationary draw.
///
/// Sample `k` uses the derived seed `derive_seed(seed, k)`, so the result is
/// independent of execution order and thread count.
pub fn empirical_distribution(
    model: &QuantumModel,
    length: usize,
    n_samples: usize,
    seed: u64,
) -> Result<WordDistribution> {
    let a = model.machine().n_symbols();
    let n_words = word_count(a, length)?;
    let counts = parallel::tally_indexed(n_samples, n_words, |k| {
        quantum_sample_word(model, length, derive_seed(seed, k as u64))
    });
    Ok(counts_to_distribution(counts, n_samples, length, a))
}

/// Sequential reference implementation of [`empirical_distribution`];
/// produces identical results.
pub fn empirical_distribution_seq(
    model: &QuantumModel,
    length: usize,
    n_samples: usize,
    seed: u64,
) -> Result<WordDistribution> {
    let a = model.machine().n_symbols();
    let n_words = word_count(a, length)?;
    let counts = parallel::tally_indexed_seq(n_samples, n_words, |k| {
        quantum_sample_word(model, length, derive_seed(seed, k as u64))
    });
    Ok(counts_to_distribution(counts, n_samples, length, a))
}

fn quantum_sample_word(model: &QuantumModel, length: usize, seed: u64) -> usize {
    let mut sim = init_simulator(model, Start::Stationary, seed).expect("stationary start");
    let a = model.machine().n_symbols();
    let mut idx = 0;
    for _ in 0..length {
        idx = idx * a + sim.step().expect("healthy model");
    }
    idx
}

/// Classical paired sampler: the same batch protocol as
/// [`empirical_distribution`], but words are drawn by following the machine
/// itself.
pub fn classical_empirical_distribution(
    machine: &EpsilonMachine,
    pi: &StationaryDistribution,
    length: usize,
    n_samples: usize,
    seed: u64,
) -> Result<WordDistribution> {
    let a = machine.n_symbols();
    let n_words = word_count(a, length)?;
    let counts = parallel::tally_indexed(n_samples, n_words, |k| {
        let mut rng = SeedStream::new(derive_seed(seed, k as u64));
        let mut state = sample_index(pi.probs(), rng.uniform());
        let mut idx = 0;
        for _ in 0..length {
            let row: Vec<f64> = (0..a).map(|x| machine.emit_prob(state, x)).collect();
            let x = sample_index(&row, rng.uniform());
            idx = idx * a + x;
            state = machine.successor(state, x).expect("support");
        }
        idx
    });
    Ok(counts_to_distribution(counts, n_samples, length, a))
}

/// Average post-measurement memory entropy after `l` observed symbols.
///
/// For each word `w` the memory is left in the mixture
/// `Σ_i P(i|w) |σ_{λ(i,w)}⟩⟨σ_{λ(i,w)}|`; the entropies are averaged with
/// weight `P(w)`. Bounded above by `C_q` when started from the stationary
/// ensemble, and zero from any pure start.
pub fn conditional_memory_entropy(model: &QuantumModel, start: Start, l: usize) -> Result<f64> {
    let machine = model.machine();
    let (n, a) = (machine.n_states(), machine.n_symbols());
    let n_words = word_count(a, l)?;
    let start_weights: Vec<f64> = match start {
        Start::State(i) => {
            if i >= n {
                return Err(QsimError::IndexOutOfRange { index: i, count: n });
            }
            (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect()
        }
        Start::Stationary => model.stationary().probs().to_vec(),
    };

    let r = model.states().rank();
    let mut average = 0.0;
    for idx in 0..n_words {
        let word = decode_word(idx, a, l);
        let mut word_mass = 0.0;
        let mut rho = DMatrix::zeros(r, r);
        for (i, &weight) in start_weights.iter().enumerate() {
            let w = weight * machine.word_probability_from(i, &word);
            if w > 0.0 {
                let target = machine
                    .advance_word(i, &word)
                    .expect("positive probability");
                let v = model.states().state_vector(target);
                rho += w * &v * v.transpose();
                word_mass += w;
            }
        }
        if word_mass <= 0.0 {
            continue;
        }
        rho /= word_mass;
        let (vals, _) = symmetric_eigen_desc(&rho);
        average += word_mass * crate::linalg::shannon_bits(vals.as_slice());
    }
    Ok(average)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::quantum_complexity;

    fn ug_model() -> QuantumModel {
        QuantumModel::build(EpsilonMachine::upset_gambler(0.7, 0.8).unwrap()).unwrap()
    }

    fn alt_model() -> QuantumModel {
        QuantumModel::build(EpsilonMachine::alternating()).unwrap()
    }

    #[test]
    fn init_assigns_memory() {
        let model = ug_model();
        let sim = init_simulator(&model, Start::State(0), 7).unwrap();
        let sigma_a = model.states().state_vector(0);
        for (m, s) in sim.memory().iter().zip(sigma_a.iter()) {
            assert_eq!(m, s);
        }
        assert!(matches!(
            init_simulator(&model, Start::State(5), 7),
            Err(QsimError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn stationary_init_frequencies() {
        let model = ug_model();
        let n = 100_000;
        let sigma_a = model.states().state_vector(0);
        let sigma_b = model.states().state_vector(1);
        let mut hits = 0;
        for seed in 0..n {
            let sim = init_simulator(&model, Start::Stationary, seed).unwrap();
            let mem = DVector::from_column_slice(sim.memory());
            if (&mem - &sigma_a).norm() < (&mem - &sigma_b).norm() {
                hits += 1;
            }
        }
        let freq = hits as f64 / n as f64;
        let expect = 1.0 / 1.7;
        let sigma = (expect * (1.0 - expect) / n as f64).sqrt();
        assert!((freq - expect).abs() < 4.0 * sigma);
    }

    #[test]
    fn step_emits_born_marginals_and_collapses() {
        let model = ug_model();
        let sigma_a = model.states().state_vector(0);
        let marginals = symbol_marginals(model.unitary(), &sigma_a);
        assert!((marginals[0] - 0.7).abs() < 1e-12);
        assert!((marginals[1] - 0.3).abs() < 1e-12);

        // Force symbol 0 (u < 0.7): memory collapses to σ_B.
        let mut mem = sigma_a.clone();
        let sym = step_memory(model.unitary(), &mut mem, 0.3).unwrap();
        assert_eq!(sym, 0);
        let sigma_b = model.states().state_vector(1);
        assert!((mem - sigma_b).norm() < 1e-10);

        // Force symbol 1 (u ≥ 0.7): memory collapses back to σ_A.
        let mut mem = model.states().state_vector(0);
        let sym = step_memory(model.unitary(), &mut mem, 0.9).unwrap();
        assert_eq!(sym, 1);
        assert!((mem - sigma_a).norm() < 1e-10);
    }

    #[test]
    fn corrupted_model_reports_degenerate_marginals() {
        let model = ug_model();
        let dim = model.unitary().joint_dim();
        let broken =
            model
                .clone()
                .with_unitary(UnitaryModel::from_raw(DMatrix::zeros(dim, dim), 2, 2));
        let mut sim = init_simulator(&broken, Start::State(0), 1).unwrap();
        assert!(matches!(sim.step(), Err(QsimError::Numerical(_))));
    }

    #[test]
    fn deterministic_process_runs_deterministically() {
        let model = alt_model();
        let mut sim = init_simulator(&model, Start::State(0), 42).unwrap();
        let word = sim.run(4).unwrap();
        assert_eq!(model.machine().format_word(&word), "1010");
        assert_eq!(sim.step_count(), 4);
        let sigma_a = model.states().state_vector(0);
        assert!((DVector::from_column_slice(sim.memory()) - sigma_a).norm() < 1e-12);

        let mut sim = init_simulator(&model, Start::State(0), 42).unwrap();
        assert!(sim.run(0).unwrap().is_empty());
    }

    #[test]
    fn long_run_frequency_and_norm_drift() {
        let model = QuantumModel::build(EpsilonMachine::biased_coin(0.5).unwrap()).unwrap();
        let mut sim = init_simulator(&model, Start::State(0), 99).unwrap();
        let n = 1_000_000;
        let word = sim.run(n).unwrap();
        let freq = word.iter().filter(|&&x| x == 0).count() as f64 / n as f64;
        let sigma = (0.25 / n as f64).sqrt();
        assert!((freq - 0.5).abs() < 4.0 * sigma);

        // Norm drift with per-step renormalization.
        let model = ug_model();
        let mut sim = init_simulator(&model, Start::State(0), 5).unwrap();
        sim.run(100_000).unwrap();
        let norm: f64 = sim.memory().iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn memory_tracks_classical_state() {
        let model = ug_model();
        for seed in [1u64, 2, 3] {
            let mut sim = init_simulator(&model, Start::State(0), seed).unwrap();
            let mut classical = 0usize;
            for _ in 0..100 {
                let x = sim.step().unwrap();
                classical = model.machine().advance(classical, x).unwrap();
                let expect = model.states().state_vector(classical);
                let mem = DVector::from_column_slice(sim.memory());
                assert!((mem - expect).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn joint_state_amplitudes_and_marginals() {
        let model = ug_model();

        // L = 0: the memory vector itself.
        let j0 = joint_state(&model, 0, 0).unwrap();
        assert_eq!(j0.n_words(), 1);
        let mem = j0.memory_component(&[]);
        assert!((mem - model.states().state_vector(0)).norm() < 1e-14);

        // L = 1 from σ_A: amplitude √p on (σ_B, "0") and √(1−p) on (σ_A, "1").
        let j1 = joint_state(&model, 0, 1).unwrap();
        let comp0 = j1.memory_component(&[0]);
        let comp1 = j1.memory_component(&[1]);
        let expect0 = 0.7f64.sqrt() * model.states().state_vector(1);
        let expect1 = 0.3f64.sqrt() * model.states().state_vector(0);
        assert!((comp0 - expect0).norm() < 1e-12);
        assert!((comp1 - expect1).norm() < 1e-12);
        assert!((j1.norm_squared() - 1.0).abs() < 1e-12);

        // L = 6: every word marginal matches the classical word probability.
        let j6 = joint_state(&model, 0, 6).unwrap();
        let marginals = j6.word_marginals();
        assert_eq!(marginals.len(), 64);
        for (idx, &p) in marginals.iter().enumerate() {
            let word = decode_word(idx, 2, 6);
            let expect = model.machine().word_probability_from(0, &word);
            assert!((p - expect).abs() < 1e-12);
        }
        assert!((marginals.iter().sum::<f64>() - 1.0).abs() < 1e-10);

        // Dimension cap.
        assert!(matches!(
            joint_state(&model, 0, 64),
            Err(QsimError::DimensionCap(_))
        ));
    }

    #[test]
    fn overlap_invariance_holds_and_detects_faults() {
        let model = ug_model();
        let dev = joint_overlap_invariance(&model, model.gram(), 8).unwrap();
        assert!(dev < 1e-10, "deviation {dev}");

        let alt = alt_model();
        let dev = joint_overlap_invariance(&alt, alt.gram(), 5).unwrap();
        assert!(dev < 1e-12);

        // Perturbing one unitary column by 1e-3 is clearly visible.
        let mut u = model.unitary().matrix().clone();
        let mut col = u.column(0).clone_owned();
        col[0] += 1e-3;
        u.set_column(0, &col);
        let broken = model.clone().with_unitary(UnitaryModel::from_raw(u, 2, 2));
        let dev = joint_overlap_invariance(&broken, model.gram(), 4).unwrap();
        assert!(dev > 1e-4, "deviation {dev}");
    }

    #[test]
    fn exact_distribution_values() {
        let m = EpsilonMachine::upset_gambler(0.7, 0.8).unwrap();
        let pi = m.stationary_distribution().unwrap();
        let d1 = exact_distribution(&m, &pi, 1).unwrap();
        let p0 = (0.7 * 0.8 + 0.7) / 1.7;
        assert!((d1.prob(&[0]) - p0).abs() < 1e-14);
        assert!((d1.prob(&[1]) - (1.0 - p0)).abs() < 1e-14);
        assert!((d1.prob(&[0]) - 0.74118).abs() < 1e-5);

        for len in 0..=6 {
            let d = exact_distribution(&m, &pi, len).unwrap();
            assert!((d.total() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn tv_distance_basics() {
        let m = EpsilonMachine::upset_gambler(0.7, 0.8).unwrap();
        let pi = m.stationary_distribution().unwrap();
        let d = exact_distribution(&m, &pi, 3).unwrap();
        assert_eq!(tv_distance(&d, &d), 0.0);
    }

    #[test]
    fn empirical_matches_sequential_reference() {
        let model = ug_model();
        let a = empirical_distribution(&model, 3, 4000, 11).unwrap();
        let b = empirical_distribution_seq(&model, 3, 4000, 11).unwrap();
        assert_eq!(a, b);
        let c = empirical_distribution(&model, 3, 4000, 11).unwrap();
        assert_eq!(a, c);
        assert!((a.total() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn conditional_entropy_bounds() {
        let model = ug_model();
        let cq = quantum_complexity(model.phi());

        for l in 0..=4 {
            let pure = conditional_memory_entropy(&model, Start::State(0), l).unwrap();
            assert!(pure.abs() < 1e-12, "pure start stays pure, got {pure}");
        }
        let stationary = conditional_memory_entropy(&model, Start::Stationary, 4).unwrap();
        assert!(stationary >= 0.0);
        assert!(stationary <= cq + 1e-9);

        let coin = QuantumModel::build(EpsilonMachine::biased_coin(0.4).unwrap()).unwrap();
        let e = conditional_memory_entropy(&coin, Start::Stationary, 3).unwrap();
        assert!(e.abs() < 1e-12);
    }
}
