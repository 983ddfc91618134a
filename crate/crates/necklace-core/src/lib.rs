//! Symbolic and geometric analysis of fractal necklaces.
//!
//! A necklace is the attractor of `n >= 3` contracting homeomorphisms whose
//! first-level pieces touch exactly like beads on a loop: cyclically adjacent
//! pieces share a single point (a *main node*) and all other pairs are
//! disjoint. This crate models such spaces symbolically — points are
//! eventually periodic addresses over the alphabet `{1..n}`, and the gluing
//! is a finite table identifying `k·u_k` with `(k+1)·v_k` — and provides:
//!
//! * address arithmetic and canonical forms ([`address`]),
//! * spec validation, main nodes and goodness checking ([`spec`], [`class`]),
//! * finite level-`m` contact graphs with component/articulation analysis
//!   under level escalation ([`graph`]),
//! * the cut invariants `ncp`, `N(A, F)` and `N_2(F)`, extremal 2-cut
//!   surveys, and a consolidated theorem checklist ([`cuts`]),
//! * dihedral relabelings, spec isomorphism, and enumeration of rigid
//!   homeomorphisms between two specs ([`rigidity`]),
//! * planar IFS realizations: certified cell bounds, contact detection,
//!   extraction of the symbolic glue table from coordinates, and SVG
//!   rendering ([`geometry`]).

pub mod address;
pub mod builtins;
pub mod class;
pub mod cuts;
pub mod errors;
pub mod geometry;
pub mod graph;
pub mod rigidity;
pub mod spec;

pub use address::{Address, Symbol, Word};
pub use class::PointClass;
pub use cuts::{CutReport, ExtremalSurvey, SuiteReport};
pub use errors::{Error, Result};
pub use geometry::{AffineMap2D, CellTree, GeometricIFS, Point2};
pub use graph::{ComponentSet, ContactGraph, Engine, EngineLimits};
pub use rigidity::{DihedralElement, RigidMapClosure};
pub use spec::{GlueRule, NecklaceSpec, ValidationReport};
