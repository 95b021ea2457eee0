//! Frame-quality functionals for finite frames over R and C.
//!
//! The crate computes total coherence, total k-dimensional volume,
//! complementary volume and k-nuclear energy of a frame, evaluates their
//! closed-form bounds, maximizes them over Parseval or equal-norm frames, and
//! checks the identities relating them on constructed and random instances.
//!
//! Frames are `N x M` matrices (columns are the frame vectors) stored with
//! complex entries; real frames carry zero imaginary parts. Subset indices
//! are 0-based.

pub mod constructors;
pub mod error;
pub mod frame;
pub mod io;
pub mod linalg;
pub mod measures;
pub mod optimize;
pub mod verify;

pub use error::{FrameError, Result};
pub use frame::{
    gram, partial_frame, predicates, subsets, Frame, FramePredicates, GramMatrix, ScalarField, SubsetSelector,
    Tolerances,
};
pub use linalg::{CMatrix, C64};
