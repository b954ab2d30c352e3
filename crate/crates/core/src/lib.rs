//! Symbolic + numeric engine for variational symmetries of higher-order
//! Lagrangians: exact jet-space calculus, determining-system assembly and
//! solution over the rationals, conserved-quantity construction and
//! verification, cyclic-coordinate transformations, and RK4 drift checks.

pub mod calculus;
pub mod conserved;
pub mod cyclic;
pub mod error;
pub mod expr;
pub mod linsolve;
pub mod numeric;
pub mod rational;
pub mod symmetry;

pub use calculus::{euler_lagrange, partial, total_derivative, Diff, LagrangianSpec};
pub use conserved::{noether_charge, span_contains, verify_offshell, ConservedQuantity};
pub use error::{Error, Result};
pub use expr::{parse, to_text, Expr, JetVar, TransArg, TransFactor, TransKind};
pub use linsolve::RationalMatrix;
pub use rational::Rational;
pub use symmetry::{
    assemble_system, build_ansatz, determining_identity, extract_generators, AnsatzConfig,
    DeterminingSystem, GeneratorAnsatz, SymmetryGenerator,
};

/// Default jet-order cap; the sixth-order example needs x^(5) in its
/// charges plus one more total derivative for the identity check.
pub const DEFAULT_ORDER_CAP: u32 = 8;
