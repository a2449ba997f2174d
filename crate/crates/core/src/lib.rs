//! Canonical bases of the positive part of the quantum general linear
//! supergroup and of its finite-level Schur superalgebras.
//!
//! The crate is layered bottom-up: [`laurent`] provides exact arithmetic in
//! `Z[v, v^-1]`, [`matrices`] the combinatorics of super matrices, [`uplus`]
//! the positive (and negative) half with its canonical basis, [`schur`] the
//! level-`r` Schur superalgebra, and [`tableaux`] the semistandard super
//! tableaux indexing its simple modules.

pub mod golden;
pub mod laurent;
pub mod matrices;
pub mod schur;
pub mod tableaux;
pub mod uplus;
