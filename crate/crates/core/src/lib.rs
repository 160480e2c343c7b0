//! Multi-agent runtime-assurance scenarios: definition, closed-loop
//! execution with pluggable switching logics, and evaluation of the
//! recorded traces.
//!
//! The geometry and dynamics kernels are generic over [`Scalar`] (`f32` or
//! `f64`); the engine, traces and evaluation run on [`Real`].

pub mod agents;
pub mod cli;
pub mod eval;
pub mod geometry;
pub mod rta;
pub mod scalar;
pub mod scenario;

pub use scalar::Scalar;

/// Scalar type of the execution engine and traces.
pub type Real = f64;

pub type UnsafeSet = geometry::SetDef<f64>;
pub type UnsafeSet32 = geometry::SetDef<f32>;
pub type Polytope = geometry::Polytope<f64>;
pub type Polytope32 = geometry::Polytope<f32>;
pub type RelativeSet = geometry::RelativeSetSpec<f64>;
pub type AccParams = agents::AccParams<f64>;
pub type AccParams32 = agents::AccParams<f32>;
pub type DubinsCarParams = agents::DubinsCarParams<f64>;
pub type DubinsCarParams32 = agents::DubinsCarParams<f32>;
pub type DubinsPlaneParams = agents::DubinsPlaneParams<f64>;
pub type DubinsPlaneParams32 = agents::DubinsPlaneParams<f32>;
