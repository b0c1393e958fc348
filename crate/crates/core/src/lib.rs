//! Executable generalization bounds for learning under domain shift.
//!
//! Hypotheses, classes and distributions are finite and exactly enumerable,
//! so every supremum and minimum in a bound is computed by exhaustive search.

pub mod adapt;
pub mod bounds;
pub mod class;
pub mod distribution;
pub mod error;
pub mod harness;
pub mod hypothesis;
pub mod json;
pub mod loss;
pub mod measures;
pub mod point;
pub mod scenarios;

pub use adapt::{train, LearnerView, ObjectiveWeights, TrainResult};
pub use bounds::{BoundReport, DASetting, SettingKind};
pub use class::{HypothesisClass, InverseClass};
pub use distribution::{pushforward, FiniteDistribution};
pub use error::{Error, Result};
pub use hypothesis::{Form, Hypothesis, PreluLayer, Table};
pub use loss::{LossKind, LossSpec};
pub use measures::{
    discrepancy, quad_discrepancy, risk, DiscrepancyResult, QuadDiscrepancyResult, RiskMatrix, RiskValue,
};
pub use point::{Point, PointKey};
pub use scenarios::{generate, Scenario, ScenarioConfig};
