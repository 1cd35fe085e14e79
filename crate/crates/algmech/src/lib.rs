//! Hamiltonian mechanics on Lie algebroids.
//!
//! A Lie algebroid is represented at chart level by its anchor field ρ^i_α(x)
//! and structure field C^γ_αβ(x). On top of that sit the exterior calculus
//! (d^A, wedge, contraction, pullback), symplectic 2-sections with their
//! Hamiltonian sections and Poisson brackets, the prolongation 𝒯^A A* with
//! its canonical symplectic structure, Hamilton-equation integration, and
//! the reduction of a symplectic Lie algebroid by a Lie subalgebroid and a
//! symmetry Lie group, validated end to end on the Lagrange top.
//!
//! Start with the runnable examples (`cargo run --example lagrange_top_reduction`)
//! or the `algmech` command-line tool.

// index-based loops mirror the tensor formulas and stay; closure fields are
// aliased where it helps, tolerated where splitting them would obscure intent
#![allow(clippy::needless_range_loop, clippy::type_complexity)]

pub mod algebroid;
pub mod cartan;
pub mod chart;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod linalg;
pub mod models;
pub mod prolongation;
pub mod reduction;
pub mod report;
pub mod run;
pub mod sample;
pub mod section;
pub mod symplectic;

pub use chart::{ChartPoint, LieAlgebroidChart, StructureArray};
pub use error::{AlgError, Result};
pub use section::{MorphismData, MultiSection, Section};

#[cfg(test)]
mod concurrency_contract {
    // all core types are immutable after construction and shareable across
    // verification workers
    fn assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn core_types_are_send_sync() {
        assert_send_sync::<crate::LieAlgebroidChart>();
        assert_send_sync::<crate::Section>();
        assert_send_sync::<crate::MultiSection>();
        assert_send_sync::<crate::MorphismData>();
        assert_send_sync::<crate::symplectic::SymplecticSection>();
        assert_send_sync::<crate::prolongation::ProlongationChart>();
        assert_send_sync::<crate::dynamics::HamiltonianSystem>();
        assert_send_sync::<crate::reduction::ReductionSetup>();
        assert_send_sync::<crate::reduction::ReducedModel>();
    }
}
