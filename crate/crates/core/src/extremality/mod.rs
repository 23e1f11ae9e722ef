//! Hamiltonian, adjoint, the extremality checker and the multiplier search.

pub mod adjoint;
pub mod check;
pub mod hamiltonian;
pub mod search;

pub use adjoint::{integrate_adjoint, AdjointFlow};
pub use check::{check_extremal, CheckConfig, ConditionRecord, ExtremalityReport, MultiplierSet, SubResidual};
pub use hamiltonian::{hamiltonian, max_hamiltonian, MaxHamiltonian};
pub use search::{search_multipliers, BranchOutcome, Classification, SearchConfig, SearchReport};
