//! Shared fixtures for the integration suites.
#![allow(dead_code)] // each suite uses a subset

use qsim_core::machine::{random_minimal_machine, EpsilonMachine};

pub fn upset_gambler() -> EpsilonMachine {
    EpsilonMachine::upset_gambler(0.7, 0.8).unwrap()
}

/// Deterministic suite of 50 random minimal machines with 2–5 states and
/// 2–3 symbols.
pub fn random_suite() -> Vec<EpsilonMachine> {
    (0..50u64)
        .map(|k| {
            let n_states = 2 + (k % 4) as usize;
            let n_symbols = 2 + (k % 2) as usize;
            random_minimal_machine(n_states, n_symbols, 9000 + k)
        })
        .collect()
}
