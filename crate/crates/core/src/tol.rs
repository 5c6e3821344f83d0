//! Numerical tolerances shared by the online solver and the certifier.
//!
//! Every decision is taken as `expr > tol` on both routes, so these values
//! must never be duplicated elsewhere.

/// A constraint row is violated when its slack is below `-FEAS`.
pub const FEAS: f64 = 1e-9;
/// Two candidate scores are considered equal within this margin.
pub const TIE: f64 = 1e-10;
/// Pivot elements and step components below this are treated as zero.
pub const PIVOT: f64 = 1e-10;
/// Dominance cut margin on `J_bar - J_lower`.
pub const DOMINANCE: f64 = 1e-9;
/// Pieces narrower than this (Chebyshev radius) are merged into a neighbour.
pub const WIDTH: f64 = 1e-9;
/// Point-in-region membership tolerance.
pub const MEMBERSHIP: f64 = 1e-8;
/// Integrality tolerance for reporting fractional binaries.
pub const INTEGRALITY: f64 = 1e-6;
/// Negative multipliers beyond this are dropped on warm start.
pub const DUAL: f64 = 1e-9;
