pub mod cache;
pub mod data;
pub mod error;
pub mod grid;
pub mod kernel_bank;
pub mod prox;
pub mod weights;
pub mod solver;
pub mod synthetic;
pub mod spectral;
pub mod metrics;
pub mod pipeline;
