//! Maximally recoverable (PMDS) codes built from linearized Reed-Solomon
//! blocks over finite-field towers, plus the machinery to verify their
//! claimed properties exhaustively at desk scale.

pub mod cli;
pub mod codec;
pub mod gf;
pub mod linalg;
pub mod mrcons;
pub mod sumrank;
pub mod verify;
