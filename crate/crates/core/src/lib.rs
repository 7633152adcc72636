//! Static balance for multi-contact legged robots with fixed and sliding
//! contacts.
//!
//! The crate builds the CoM support area (CSA) induced by two coplanar feet and
//! a prescribed hand wrench, assembles the centroidal quadratic program that
//! picks the CoM position and contact wrenches under friction-cone and
//! sliding-edge constraints, and runs a reduced closed-loop controller around
//! it. Everything here is allocation-only (`alloc`), with no IO.
//!
//! Module map:
//!
//! - [`spatial`]: vectors, wrenches, contact-to-world wrench maps, gravity.
//! - [`csa`]: convex hull, CoM support area, point containment.
//! - [`constraints`]: friction/CoP/yaw-torque inequality rows and sliding equalities.
//! - [`qp`]: dense convex QP solver (primal-dual interior point + polishing).
//! - [`centroidal`]: decision-vector layout, QP assembly and solve.
//! - [`controller`]: task laws and the quasi-static scenario integrator.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod centroidal;
pub mod constraints;
pub mod controller;
pub mod csa;
mod error;
pub mod qp;
pub mod spatial;

pub use error::Error;
pub use nalgebra;

/// Gravity magnitude used unless a configuration overrides it [m/s²].
pub const G_MAG: f64 = 9.81;
