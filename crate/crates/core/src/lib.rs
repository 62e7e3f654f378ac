//! Quantum–classical trade-off for pure-state source compression.

pub mod closedform;
pub mod error;
pub mod linalg;
pub mod oracle;
pub mod qcore;
pub mod solver;
pub mod symmetry;
pub mod typicality;

pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};
pub use qcore::{DensityMatrix, EncodingKernel, Ensemble, PureState};
pub use solver::{DecompositionPoint, SimplexGrid, Solution, TradeoffCurve};
pub use symmetry::GroupAction;
pub use typicality::{ChannelMatrix, TypeVector};
