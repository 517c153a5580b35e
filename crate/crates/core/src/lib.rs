//! Finite-size key rates and reconciliation-code sizing for continuous-variable
//! QKD with digitized Gaussian-modulated coherent states.

pub mod config;
pub mod digitizer;
pub mod error;
pub mod holevo;
pub mod keyrate;
pub mod ldpc;
pub mod leakage;
pub mod normal;
pub mod plan;
pub mod protocol;
pub mod quadrature;
pub mod report;
pub mod selftest;

pub use config::RunConfig;
pub use digitizer::{DigitizationGrid, DiscreteStats};
pub use error::{Error, Result};
pub use holevo::{CovarianceMatrix, HolevoResult};
pub use keyrate::{optimize, sweep, RateEngine, RatePoint, SearchBounds, SweepAxis, SweepFixed};
pub use leakage::LeakageBudget;
pub use ldpc::{GaloisField, LdpcCode, StorageReport};
pub use plan::{code_plan, CodePlan, RegularChoice};
pub use protocol::{ChannelParams, Detection, DetectorModel, Direction, ProtocolConfig, SignalModel};
