//! Izhikevich cortical network simulation and NSGA-III fitting of its
//! connectivity to target population firing rates.

pub mod analysis;
pub mod error;
pub mod network;
pub mod neuron;
pub mod objectives;
pub mod seed;
pub mod simulator;

pub use error::SnnError;
pub use network::{build_network, regenerate_for_evaluation, NetworkGenome, NetworkInstance, WeightMatrix};
pub use neuron::{NeuronParams, NeuronState, Population};
pub use simulator::{mean_rates, run_simulation, RateSummary, SimOptions, SpikeRecord};
