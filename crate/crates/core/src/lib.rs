//! Cellular downlink simulator for ground users and UAV corridors, and a
//! Bayesian optimizer for per-BS electrical tilt and transmit power.

pub mod bo;
pub mod channel;
pub mod deploy;
pub mod error;
pub mod gp;
pub mod linalg;
pub mod netsim;
pub mod optim;
pub mod rng;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision aliases.
pub type ScenarioConfig = deploy::ScenarioConfig<f64>;
pub type Network = netsim::Network<f64>;
pub type NetworkSetting = netsim::NetworkSetting<f64>;
pub type EvalReport = netsim::EvalReport<f64>;
pub type GpHyper = gp::GpHyper<f64>;
pub type GpModel = gp::GpModel<f64>;
pub type ObservationDataset = gp::ObservationDataset<f64>;
pub type BoSettings = bo::BoSettings<f64>;
pub type BayesOpt<'a> = bo::BayesOpt<'a, f64>;
