//! Planar algebras of finite bipartite graphs.
//!
//! A finite bipartite graph with a positive spin vector carries a planar
//! algebra whose level-n spaces are spanned by loops of length 2n.  This
//! crate builds those box spaces, computes the automorphism group
//! (vertex permutations extended by edge numbering, and unitary blocks on
//! parallel-edge spaces), takes fixed points under group actions, verifies
//! the subfactor axioms (scalar zero-boxes, sphericality, positivity), and
//! extracts invariants: tower dimensions, Bratteli data, the principal
//! graph, and the index.
//!
//! Start with the runnable examples (`cargo run --example cube_invariants`)
//! or the `bgpa` binary, which exposes the same pipeline on JSON files.

pub mod algebra;
pub mod autos;
pub mod catalog;
pub mod cli;
pub mod error;
pub mod fixedpoint;
pub mod graph;
pub mod io;
pub mod oracles;
pub mod paths;
pub mod spa;
pub mod tangles;
pub mod tower;

pub use algebra::{AlgebraElement, Bgpa, ZeroBoxElement};
pub use autos::{find_graph_autos, AutomorphismOp, GroupAction, TorusMode};
pub use error::{Error, Result};
pub use graph::{check_modulus, BipartiteGraph, GraphSpec, ModulusCheck, Parity, Sign, SpinVector};
pub use paths::{concat, reverse_path, LoopRef, Path};
pub use tangles::TlElement;
