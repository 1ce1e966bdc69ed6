//! Impossibility instances and the checks that certify them.

mod grid27;
mod simple;
mod submodular6;
mod suite;

use thiserror::Error;

use crate::model::ModelError;
use crate::valuations::ValuationError;

pub use grid27::{
    instance_27, instance_27_with_epsilon, structured_check_27, Grid27Certificate, Grid27Instance,
    PlacementCheck, GRID27_EPSILON,
};
pub use simple::{
    has_blocking_subset, instance_421, instance_floor_n3, instance_half_cap, instance_n_minus_1,
    HalfCapInstance, HALF_CAP_MAX_ITEMS,
};
pub use submodular6::{instance_submodular_6, submodular_6_pair_table, submodular_6_rule};
pub use suite::{run_suite, SuiteRow, PROBE_EPSILON};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CounterexampleError {
    #[error("{0}")]
    InvalidParameter(String),
    #[error("{items} items exceeds the supported maximum of {max}")]
    TooLarge { items: u128, max: usize },
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
