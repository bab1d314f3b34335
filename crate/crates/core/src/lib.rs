//! Continuous-variable quantum teleportation switch.
//!
//! Two two-mode squeezed (EPR) sources are mixed on beamsplitters, the
//! sender homodynes the input against one conditional mode, and the
//! outcomes are fed forward to two receivers. Flipping the sign of one
//! squeezing parameter routes the teleported state to the other receiver.
//!
//! - [`algebra`]: exact Heisenberg-picture quadrature expressions
//! - [`protocol`]: the switch network, fidelities, witnesses, routing
//! - [`montecarlo`]: shot-level Gaussian sampling oracle
//! - [`dsl`]: the `.cvc` circuit description language
//! - [`report`]: CSV/JSON emission with a stable schema

pub mod algebra;
pub mod dsl;
pub mod montecarlo;
pub mod protocol;
pub mod report;

/// The bundled switch circuit, parameterized by `${ra}`, `${rb}`,
/// `${g1}`, `${g2}`, `${alpha_re}`, `${alpha_im}`.
pub const SWITCH_CIRCUIT: &str = include_str!("../circuits/switch.cvc");
