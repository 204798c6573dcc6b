//! Shared fixtures for the criterion benchmarks.

use kslab::{make_family, ObstructionFamily, PureState, StateSpec};

pub fn family(grid: usize, n: u32) -> ObstructionFamily {
    make_family(grid, n, 1, 1.0).expect("commensurate benchmark family")
}

pub fn states(family: &ObstructionFamily) -> Vec<PureState> {
    family
        .instantiate_states(&StateSpec::standard_family())
        .expect("standard family instantiates")
}
