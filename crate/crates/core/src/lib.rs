//! Equilibrium coefficients and relaxation dynamics for two-species quantum
//! BGK gases (Fermi–Dirac and Bose–Einstein statistics).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod discrete;
pub mod distributions;
pub mod dynamics;
pub mod equilibrium;
pub mod error;
pub mod oracle;
pub mod quadrature;
pub mod quantum_integrals;
pub mod root;
pub mod snapshot;
pub mod verify;
