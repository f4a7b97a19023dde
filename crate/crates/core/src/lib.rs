//! Exact canonical measures on finitely presented perfect subtrees of the
//! Cantor space `2^ω`.
//!
//! A closed set `P ⊆ 2^ω` is given by a pruned tree `T_P ⊆ 2^<ω`. When `P` is
//! perfect, the order isomorphism between `2^<ω` and the branching points of
//! `T_P` induces a homeomorphism `2^ω → P`, and the pushforward of the uniform
//! measure along it is the canonical measure `μ_P`. A node `w` with `i`
//! branching points strictly below it carries `μ_P([w]_P) = 1/2^i`.
//!
//! The crate is organised bottom-up:
//!
//! * [`words`]: finite binary and natural-number words.
//! * [`trees`]: tree presentations compiled into finite automata.
//! * [`splits`]: branching points, levels, classification and the canonical
//!   embedding.
//! * [`measure`]: exact cylinder, clopen and traced measures, bound
//!   certificates and their replay checker.
//! * [`constructions`]: the named sets (`E`, `Q`, `P_J`, `U`, the staircase
//!   `B`), block tables, the `φ` embedding and the Lusin tree on `ω^ω`.
//! * [`script`]: the line-oriented query language and report writer.

pub mod constructions;
mod error;
pub mod measure;
mod rational;
pub mod script;
pub mod splits;
pub mod trees;
pub mod words;

pub use error::{Error, Result};
pub use rational::Rational;
pub use trees::{Tree, TreePresentation};
pub use words::{BinWord, NatWord};
