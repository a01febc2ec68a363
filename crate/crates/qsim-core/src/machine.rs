//! Classical ε-machines: representation, validation, and analysis.
//!
//! An ε-machine is a minimal unifilar hidden Markov model of a stationary
//! stochastic process. It is defined by an ordered alphabet, an ordered set
//! of causal states, emission probabilities `P(x|i)`, and a successor map
//! `λ(i, x)` defined exactly where `P(x|i) > 0`. This module provides the
//! machine type itself plus the classical quantities derived from it:
//! stationary distribution, statistical and topological complexity, word
//! probabilities, reference sampling, and a Markov-order bound.

use nalgebra::{DMatrix, DVector};

use crate::error::{QsimError, Result};
use crate::linalg::shannon_bits;
use crate::rng::{sample_index, SeedStream};

/// Probabilities below this threshold are treated as exactly zero when
/// defining the transition support.
pub const SUPPORT_EPS: f64 = 1e-15;

/// Row-normalization tolerance for emission probabilities.
pub const ROW_SUM_TOL: f64 = 1e-9;

/// Tolerance for the minimality probe on word distributions.
pub const MINIMALITY_TOL: f64 = 1e-9;

/// A unifilar hidden Markov model over a finite alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonMachine {
    name: String,
    alphabet: Vec<String>,
    states: Vec<String>,
    /// `emit[(i, x)] = P(x|i)`, states × symbols.
    emit: DMatrix<f64>,
    /// Flattened successor map, `succ[i * n_symbols + x] = λ(i, x)`.
    succ: Vec<Option<usize>>,
}

impl EpsilonMachine {
    /// Build a machine from indexed transitions `(from, symbol, to, prob)`.
    ///
    /// Rejects duplicate labels, out-of-range indices, probabilities outside
    /// `(0, 1]`, and two transitions sharing a `(state, symbol)` pair
    /// (unifilarity violation). Probabilities below [`SUPPORT_EPS`] are
    /// dropped from the support.
    pub fn new(
        name: impl Into<String>,
        alphabet: Vec<String>,
        states: Vec<String>,
        transitions: &[(usize, usize, usize, f64)],
    ) -> Result<Self> {
        let name = name.into();
        if alphabet.is_empty() || states.is_empty() {
            return Err(QsimError::Parse(
                "alphabet and state list must be non-empty".into(),
            ));
        }
        for (label_set, kind) in [(&alphabet, "symbol"), (&states, "state")] {
            for (k, label) in label_set.iter().enumerate() {
                if label_set[..k].contains(label) {
                    return Err(QsimError::Parse(format!(
                        "duplicate {kind} label `{label}`"
                    )));
                }
            }
        }
        let (n, a) = (states.len(), alphabet.len());
        let mut emit = DMatrix::zeros(n, a);
        let mut succ = vec![None; n * a];
        for &(from, symbol, to, prob) in transitions {
            if from >= n || to >= n {
                return Err(QsimError::Parse(format!(
                    "transition references state index {} out of range",
                    from.max(to)
                )));
            }
            if symbol >= a {
                return Err(QsimError::Parse(format!(
                    "transition references symbol index {symbol} out of range"
                )));
            }
            if !(prob > 0.0 && prob <= 1.0) || !prob.is_finite() {
                return Err(QsimError::Parse(format!(
                    "transition probability {prob} outside (0, 1] for state `{}` symbol `{}`",
                    states[from], alphabet[symbol]
                )));
            }
            if succ[from * a + symbol].is_some() {
                return Err(QsimError::Parse(format!(
                    "unifilarity violation: two transitions from state `{}` on symbol `{}`",
                    states[from], alphabet[symbol]
                )));
            }
            if prob < SUPPORT_EPS {
                continue; // treated as exact zero
            }
            emit[(from, symbol)] = prob;
            succ[from * a + symbol] = Some(to);
        }
        Ok(Self {
            name,
            alphabet,
            states,
            emit,
            succ,
        })
    }

    /// The two-state machine of a gambler who loses with probability `p` and,
    /// once upset, plays one round with losing probability `q`.
    ///
    /// Symbols are `"0"` (loss) and `"1"` (win); states `s_A` and `s_B`.
    /// `p = q` is rejected: the machine would be non-minimal (a biased coin).
    pub fn upset_gambler(p: f64, q: f64) -> Result<Self> {
        for (v, label) in [(p, "p"), (q, "q")] {
            if !(v > 0.0 && v < 1.0) {
                return Err(QsimError::InvalidParameter(format!(
                    "{label} = {v} outside (0, 1)"
                )));
            }
        }
        if p == q {
            return Err(QsimError::InvalidParameter(
                "non-minimal: p = q reduces to a biased coin".into(),
            ));
        }
        Self::new(
            format!("upset-gambler(p={p}, q={q})"),
            vec!["0".into(), "1".into()],
            vec!["s_A".into(), "s_B".into()],
            &[
                (0, 0, 1, p),       // s_A --0:p--> s_B
                (0, 1, 0, 1.0 - p), // s_A --1:1-p--> s_A
                (1, 0, 0, q),       // s_B --0:q--> s_A
                (1, 1, 0, 1.0 - q), // s_B --1:1-q--> s_A
            ],
        )
    }

    /// The period-two process `…010101…`: two states, deterministic emissions.
    pub fn alternating() -> Self {
        Self::new(
            "alternating",
            vec!["0".into(), "1".into()],
            vec!["s_A".into(), "s_B".into()],
            &[(0, 1, 1, 1.0), (1, 0, 0, 1.0)],
        )
        .expect("alternating machine is well-formed")
    }

    /// Single-state i.i.d. process emitting `"0"` with probability `b`.
    pub fn biased_coin(b: f64) -> Result<Self> {
        if !(b > 0.0 && b < 1.0) {
            return Err(QsimError::InvalidParameter(format!(
                "bias {b} outside (0, 1)"
            )));
        }
        Self::new(
            format!("biased-coin(b={b})"),
            vec!["0".into(), "1".into()],
            vec!["s".into()],
            &[(0, 0, 0, b), (0, 1, 0, 1.0 - b)],
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    pub fn n_symbols(&self) -> usize {
        self.alphabet.len()
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    /// `P(x|i)`.
    pub fn emit_prob(&self, state: usize, symbol: usize) -> f64 {
        self.emit[(state, symbol)]
    }

    /// `λ(i, x)`, defined exactly where `P(x|i) > 0`.
    pub fn successor(&self, state: usize, symbol: usize) -> Option<usize> {
        self.succ[state * self.n_symbols() + symbol]
    }

    pub fn symbol_index(&self, label: &str) -> Result<usize> {
        self.alphabet
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| QsimError::UnknownSymbol(label.into()))
    }

    pub fn state_index(&self, label: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| QsimError::UnknownState(label.into()))
    }

    /// Parse a word from text. Single-character symbol labels are matched
    /// per character; otherwise the word is split on whitespace.
    pub fn parse_word(&self, text: &str) -> Result<Vec<usize>> {
        if self.alphabet.iter().all(|s| s.chars().count() == 1) {
            text.chars()
                .map(|c| self.symbol_index(&c.to_string()))
                .collect()
        } else {
            text.split_whitespace()
                .map(|tok| self.symbol_index(tok))
                .collect()
        }
    }

    /// Render a word as text (concatenated labels, or space-separated when
    /// any label is longer than one character).
    pub fn format_word(&self, word: &[usize]) -> String {
        let sep = if self.alphabet.iter().all(|s| s.chars().count() == 1) {
            ""
        } else {
            " "
        };
        word.iter()
            .map(|&x| self.alphabet[x].as_str())
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Follow one transition. Errors if `P(symbol|state) = 0`.
    pub fn advance(&self, state: usize, symbol: usize) -> Result<usize> {
        self.check_state(state)?;
        if symbol >= self.n_symbols() {
            return Err(QsimError::UnknownSymbol(format!("index {symbol}")));
        }
        self.successor(state, symbol)
            .ok_or_else(|| QsimError::ZeroProbabilityTransition {
                state: self.states[state].clone(),
                symbol: self.alphabet[symbol].clone(),
            })
    }

    /// Follow a whole word; `None` once the path leaves the support.
    pub fn advance_word(&self, state: usize, word: &[usize]) -> Option<usize> {
        let mut cur = state;
        for &x in word {
            cur = self.successor(cur, x)?;
        }
        Some(cur)
    }

    /// `P(word|state)`: product of emission probabilities along the unique
    /// unifilar path; zero once the path leaves the support.
    pub fn word_probability_from(&self, state: usize, word: &[usize]) -> f64 {
        let mut cur = state;
        let mut prob = 1.0;
        for &x in word {
            prob *= self.emit_prob(cur, x);
            match self.successor(cur, x) {
                Some(next) => cur = next,
                None => return 0.0,
            }
        }
        prob
    }

    /// π-weighted word probability `P_π(word) = Σ_i π_i P(word|i)`.
    pub fn word_probability_stationary(&self, pi: &StationaryDistribution, word: &[usize]) -> f64 {
        pi.probs()
            .iter()
            .enumerate()
            .map(|(i, &w)| w * self.word_probability_from(i, word))
            .sum()
    }

    /// State-to-state transition matrix `M_ij = Σ_x P(x|i)·[λ(i,x)=j]`.
    pub fn transition_matrix(&self) -> DMatrix<f64> {
        let n = self.n_states();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for x in 0..self.n_symbols() {
                if let Some(j) = self.successor(i, x) {
                    m[(i, j)] += self.emit_prob(i, x);
                }
            }
        }
        m
    }

    /// Left fixed point of the transition matrix: `πM = π`, `Σπ = 1`.
    ///
    /// Solved directly as a constrained linear system; a power-method sweep
    /// is used as fallback if the direct solve fails. Errors when the
    /// residual cannot be brought below `1e-12` (disconnected or malformed
    /// machine).
    pub fn stationary_distribution(&self) -> Result<StationaryDistribution> {
        let n = self.n_states();
        let m = self.transition_matrix();
        if n == 1 {
            return StationaryDistribution::checked(DVector::from_element(1, 1.0), &m);
        }

        // (Mᵀ − I)π = 0 with the last equation replaced by Σπ = 1.
        let mut sys = m.transpose() - DMatrix::<f64>::identity(n, n);
        let mut rhs = DVector::zeros(n);
        for j in 0..n {
            sys[(n - 1, j)] = 1.0;
        }
        rhs[n - 1] = 1.0;

        if let Some(pi) = sys.lu().solve(&rhs) {
            if let Ok(sd) = StationaryDistribution::checked(pi, &m) {
                return Ok(sd);
            }
        }

        // Fallback: power iteration from the uniform vector.
        let mut pi = DVector::from_element(n, 1.0 / n as f64);
        for _ in 0..200_000 {
            let next = (m.transpose() * &pi).map(|v: f64| v.max(0.0));
            let total: f64 = next.sum();
            if total <= 0.0 {
                break;
            }
            let next = next / total;
            let delta = (&next - &pi).amax();
            pi = next;
            if delta < 1e-16 {
                break;
            }
        }
        StationaryDistribution::checked(pi, &m)
    }

    /// Shannon entropy of the stationary distribution, in bits.
    pub fn classical_complexity(&self, pi: &StationaryDistribution) -> f64 {
        shannon_bits(pi.probs())
    }

    /// `log₂` of the number of causal states, in bits.
    pub fn topological_complexity(&self) -> f64 {
        (self.n_states() as f64).log2()
    }

    /// Classical summary: `C_μ`, `C_μ⁰`, and the Markov-order bound.
    pub fn classical_report(
        &self,
        pi: &StationaryDistribution,
        markov_cap: usize,
    ) -> ClassicalComplexityReport {
        ClassicalComplexityReport {
            c_mu: self.classical_complexity(pi),
            c_mu0: self.topological_complexity(),
            markov_order: self.markov_order_bound(markov_cap),
        }
    }

    /// Deterministic reference sampler: one inverse-CDF draw per step over
    /// the alphabet in declared order.
    pub fn sample_classical(&self, start: usize, length: usize, seed: u64) -> Vec<usize> {
        let mut rng = SeedStream::new(seed);
        let mut state = start;
        let mut out = Vec::with_capacity(length);
        for _ in 0..length {
            let row: Vec<f64> = (0..self.n_symbols())
                .map(|x| self.emit_prob(state, x))
                .collect();
            let x = sample_index(&row, rng.uniform());
            out.push(x);
            state = self
                .successor(state, x)
                .expect("sampled symbol lies in the support");
        }
        out
    }

    /// Smallest `R ≤ cap` such that every positive-probability word of
    /// length `R` drives all states able to emit it to one common successor.
    ///
    /// Tracked as a reachability search over subsets of states; subsets are
    /// deduplicated per level, so the search is exact and terminates fast at
    /// desk scale.
    pub fn markov_order_bound(&self, cap: usize) -> MarkovOrderBound {
        let n = self.n_states();
        debug_assert!(n <= 64, "subset bitmasks require at most 64 states");
        let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut frontier: Vec<u64> = vec![full];
        if frontier.iter().all(|s| s.count_ones() == 1) {
            return MarkovOrderBound::Exact(0);
        }
        for level in 1..=cap {
            let mut next: Vec<u64> = Vec::new();
            for &mask in &frontier {
                for x in 0..self.n_symbols() {
                    let mut out = 0u64;
                    for i in 0..n {
                        if mask & (1 << i) != 0 && self.emit_prob(i, x) > 0.0 {
                            out |= 1 << self.successor(i, x).expect("support");
                        }
                    }
                    if out != 0 && !next.contains(&out) {
                        next.push(out);
                    }
                }
            }
            if next.iter().all(|s| s.count_ones() == 1) {
                return MarkovOrderBound::Exact(level);
            }
            next.sort_unstable();
            if next == frontier {
                // Subset dynamics reached a fixed point with an ambiguous
                // set remaining: the process never synchronizes.
                return MarkovOrderBound::ExceedsCap(cap);
            }
            frontier = next;
        }
        MarkovOrderBound::ExceedsCap(cap)
    }

    /// Default probe depth for the minimality check.
    pub fn default_probe_depth(&self) -> usize {
        2 * self.n_states()
    }

    /// Structural validation: row normalization, support consistency of the
    /// successor map, strong connectivity, and pairwise state
    /// distinguishability up to `probe_depth`.
    pub fn validate(&self, probe_depth: usize) -> ValidationReport {
        let n = self.n_states();
        let a = self.n_symbols();

        let mut worst_row_deviation = 0.0f64;
        let mut in_range = true;
        for i in 0..n {
            let mut sum = 0.0;
            for x in 0..a {
                let p = self.emit_prob(i, x);
                if !(0.0..=1.0).contains(&p) {
                    in_range = false;
                }
                sum += p;
            }
            worst_row_deviation = worst_row_deviation.max((sum - 1.0).abs());
        }
        let normalized = in_range && worst_row_deviation < ROW_SUM_TOL;

        let mut support_consistent = true;
        for i in 0..n {
            for x in 0..a {
                let has_succ = self.successor(i, x).is_some();
                let has_prob = self.emit_prob(i, x) > 0.0;
                if has_succ != has_prob {
                    support_consistent = false;
                }
            }
        }

        let connected = self.strongly_connected();

        let mut minimal = true;
        let mut offending_pair = None;
        'outer: for i in 0..n {
            for j in (i + 1)..n {
                if !self.states_distinguishable(i, j, probe_depth) {
                    minimal = false;
                    offending_pair = Some((i, j));
                    break 'outer;
                }
            }
        }

        ValidationReport {
            normalized,
            worst_row_deviation,
            connected,
            minimal,
            offending_pair,
            support_consistent,
        }
    }

    /// Validate with the default probe depth and convert failure into an
    /// error.
    pub fn validated(&self) -> Result<ValidationReport> {
        let report = self.validate(self.default_probe_depth());
        if report.passed() {
            Ok(report)
        } else {
            Err(QsimError::Validation(report.describe(self)))
        }
    }

    fn check_state(&self, state: usize) -> Result<()> {
        if state >= self.n_states() {
            return Err(QsimError::IndexOutOfRange {
                index: state,
                count: self.n_states(),
            });
        }
        Ok(())
    }

    fn strongly_connected(&self) -> bool {
        let n = self.n_states();
        let mut fwd: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut bwd: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, out) in fwd.iter_mut().enumerate() {
            for x in 0..self.n_symbols() {
                if let Some(j) = self.successor(i, x) {
                    out.push(j);
                    bwd[j].push(i);
                }
            }
        }
        let reach = |adj: &[Vec<usize>]| {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            seen.into_iter().all(|b| b)
        };
        reach(&fwd) && reach(&bwd)
    }

    /// True iff some word of length ≤ `depth` separates the two states:
    /// `|P(w|i) − P(w|j)| > MINIMALITY_TOL` for some `w`.
    fn states_distinguishable(&self, i: usize, j: usize, depth: usize) -> bool {
        // Depth-first over words, carrying exact path probabilities for both
        // start states. A branch is pruned once both probabilities drop to
        // the tolerance, since extensions can only shrink them.
        struct Node {
            si: Option<usize>,
            sj: Option<usize>,
            pi: f64,
            pj: f64,
            depth_left: usize,
        }
        let mut stack = vec![Node {
            si: Some(i),
            sj: Some(j),
            pi: 1.0,
            pj: 1.0,
            depth_left: depth,
        }];
        while let Some(node) = stack.pop() {
            if node.depth_left == 0 {
                continue;
            }
            for x in 0..self.n_symbols() {
                let (pi, si) = match node.si {
                    Some(s) => (node.pi * self.emit_prob(s, x), self.successor(s, x)),
                    None => (0.0, None),
                };
                let (pj, sj) = match node.sj {
                    Some(s) => (node.pj * self.emit_prob(s, x), self.successor(s, x)),
                    None => (0.0, None),
                };
                if (pi - pj).abs() > MINIMALITY_TOL {
                    return true;
                }
                if pi.max(pj) <= MINIMALITY_TOL {
                    continue;
                }
                stack.push(Node {
                    si,
                    sj,
                    pi,
                    pj,
                    depth_left: node.depth_left - 1,
                });
            }
        }
        false
    }
}

/// Stationary distribution over causal states.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pi: DVector<f64>,
}

impl StationaryDistribution {
    /// Residual bound enforced on construction.
    pub const RESIDUAL_TOL: f64 = 1e-12;

    fn checked(pi: DVector<f64>, m: &DMatrix<f64>) -> Result<Self> {
        let sum: f64 = pi.sum();
        let residual = (m.transpose() * &pi - &pi).amax();
        if pi.iter().any(|&v| v < -Self::RESIDUAL_TOL)
            || (sum - 1.0).abs() > Self::RESIDUAL_TOL
            || residual > Self::RESIDUAL_TOL
        {
            return Err(QsimError::Numerical(format!(
                "stationary solve failed (sum deviation {:.2e}, residual {:.2e}); \
                 machine may be disconnected or malformed",
                (sum - 1.0).abs(),
                residual
            )));
        }
        Ok(Self {
            pi: pi.map(|v| v.max(0.0)),
        })
    }

    pub fn probs(&self) -> &[f64] {
        self.pi.as_slice()
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.pi
    }
}

/// Classical complexity summary.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalComplexityReport {
    /// Statistical complexity `C_μ` in bits.
    pub c_mu: f64,
    /// Topological complexity `C_μ⁰ = log₂|Σ|` in bits.
    pub c_mu0: f64,
    pub markov_order: MarkovOrderBound,
}

/// Result of the synchronizing-word search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkovOrderBound {
    Exact(usize),
    ExceedsCap(usize),
}

impl std::fmt::Display for MarkovOrderBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Exact(r) => write!(f, "{r}"),
            Self::ExceedsCap(cap) => write!(f, "exceeds {cap}"),
        }
    }
}

/// Outcome of structural validation. The machine is accepted only if all
/// flags pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub normalized: bool,
    pub worst_row_deviation: f64,
    pub connected: bool,
    pub minimal: bool,
    /// First indistinguishable state pair found, if any.
    pub offending_pair: Option<(usize, usize)>,
    pub support_consistent: bool,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.normalized && self.connected && self.minimal && self.support_consistent
    }

    /// Human-readable failure summary.
    pub fn describe(&self, machine: &EpsilonMachine) -> String {
        let mut parts = Vec::new();
        if !self.normalized {
            parts.push(format!(
                "emission rows not normalized (worst deviation {:.3e})",
                self.worst_row_deviation
            ));
        }
        if !self.connected {
            parts.push("state graph not strongly connected".into());
        }
        if !self.minimal {
            let pair = self
                .offending_pair
                .map(|(i, j)| format!("`{}` and `{}`", machine.states()[i], machine.states()[j]))
                .unwrap_or_else(|| "unknown".into());
            parts.push(format!("not minimal: states {pair} are indistinguishable"));
        }
        if !self.support_consistent {
            parts.push("successor map inconsistent with emission support".into());
        }
        if parts.is_empty() {
            "all checks passed".into()
        } else {
            parts.join("; ")
        }
    }
}

/// Deterministic pseudo-random minimal machine, for test suites and
/// benchmarks. All emission probabilities are kept above a floor so the
/// generated machines are numerically well-behaved; generation retries until
/// the machine is strongly connected and minimal.
pub fn random_minimal_machine(n_states: usize, n_symbols: usize, seed: u64) -> EpsilonMachine {
    assert!(n_states >= 1 && n_symbols >= 2);
    let mut rng = SeedStream::new(seed);
    loop {
        let mut transitions = Vec::with_capacity(n_states * n_symbols);
        for i in 0..n_states {
            let weights: Vec<f64> = (0..n_symbols).map(|_| 0.15 + rng.uniform()).collect();
            let total: f64 = weights.iter().sum();
            for (x, w) in weights.iter().enumerate() {
                let to = (rng.uniform() * n_states as f64) as usize % n_states;
                transitions.push((i, x, to, w / total));
            }
        }
        let alphabet = (0..n_symbols).map(|x| x.to_string()).collect();
        let states = (0..n_states).map(|i| format!("s{i}")).collect();
        let machine = EpsilonMachine::new("random", alphabet, states, &transitions)
            .expect("generated transitions are structurally valid");
        if machine.validate(machine.default_probe_depth()).passed() {
            return machine;
        }
    }
}
