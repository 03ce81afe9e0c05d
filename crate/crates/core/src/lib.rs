//! Statevector VQE with analytical derivatives of optimal energies with
//! respect to Hamiltonian parameters.

pub mod assembler;
pub mod circuit;
pub mod continuation;
pub mod data;
pub mod cost;
pub mod error;
pub mod excited;
pub mod fd;
pub mod hamiltonian;
pub mod operator;
pub mod pauli;
pub mod pes;
pub mod response;
pub mod seed;
pub mod state;
pub mod tensor;
pub mod theta;
pub mod vqe;

#[cfg(test)]
mod testing;

pub use circuit::{Circuit, Entangler, GateElement, GeneratorTerm, Insertion, InsertionSpec, NamedKind};
pub use error::{Error, Result};
pub use hamiltonian::{CoefficientFunction, HamiltonianFamily};
pub use operator::Operator;
pub use pauli::{pauli_mul, Pauli, PauliString, PauliSum, Phase};
pub use state::{apply_pauli, apply_pauli_rotation, expectation, sample_expectation, Statevector};
pub use tensor::Tensor3;
pub use theta::{Backend, BackendKind, ThetaEngine};
pub use vqe::{optimize, OptimizationResult, OptimizerConfig};
pub use assembler::{assemble, derivatives, grad_x, AssemblyConfig, DerivativeBundle, DerivativeSource, GroundStateSource, GuardMode};
pub use continuation::{continuation_scan, euler_step, ContinuationTrajectory, ScanConfig};
pub use cost::{cost_estimate, CostEstimate};
pub use excited::{excited_derivatives, overlap, vqd_optimize, DeflatedOperator, VqdStack};
pub use fd::{fd_validate, FdReport};
pub use pes::{taylor_pes, TaylorPes};
pub use response::{solve_first, solve_second, ResponseSolution};
