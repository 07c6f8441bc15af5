//! Reference data generators with known Fisher information.

mod ising;
mod normal;

pub use ising::{
    acceptance_probability, critical_temperature, heat_capacity, ising_exact_small,
    ising_sample_energies, ExactIsing, IsingConfig, IsingState, MAX_EXACT_L,
};
pub use normal::{normal_fi, normal_kl, normal_pdf, normal_sample, NormalParams};
