//! Quadratic points of surfaces in real affine 3-space: the affine cubic
//! form, local models of its direction field near a quadratic point, their
//! indices and phase portraits, and a global search with a Poincaré-Hopf
//! check.

pub mod acceptance;
pub mod blowup;
pub mod cubicform;
pub mod error;
pub mod global;
pub mod index;
pub mod ingest;
pub mod jets;
pub mod localmodel;
pub mod poly;
pub mod report;
pub mod surfaces;

pub use error::{Error, Result};
