//! Shared fixtures for the benchmarks.

use qtraj_core::states::{ModelParams, StateSpec, Wavefunction};

pub fn fig4_state(n_max: usize) -> Wavefunction {
    Wavefunction::new(
        ModelParams::default(),
        StateSpec::HoCoherentSeries {
            lambda: 2.1,
            kappa: 0.0,
            n_max,
            renormalize: false,
        },
    )
    .expect("valid coherent state")
}

pub fn pt_state() -> Wavefunction {
    Wavefunction::new(
        ModelParams::default(),
        StateSpec::PtCoherent {
            j: 0.16,
            l: 1.5,
            n_max: 4,
        },
    )
    .expect("valid Pöschl–Teller state")
}
