//! Generalized cluster algebras from triangulated orbifolds: seeds and their
//! tropical data, gentle Jacobian algebras and their string modules,
//! support τ-tilting mutation, stability chambers, scattering wall-crossing
//! and Caldero–Chapoton functions.

pub mod ccscatter;
pub mod error;
pub mod fixtures;
pub mod genseed;
pub mod gentlerep;
pub mod linalg;
pub mod orbsurf;
pub mod stability;
pub mod symbolic;
pub mod taufan;
pub mod tropical;

pub use error::{Error, Result};
pub use genseed::{ExchangeGraph, ExchangeMatrix, GenSeed, SeedSpec, ThetaCoeffs};
pub use orbsurf::{quiver_of, QuiverWithPotential, Side, Triangle, Triangulation};
pub use symbolic::{ExpVector, LaurentPoly, YPoly};
