//! Specular calculus for piecewise-smooth functions whose singular sets are
//! affine hyperplanes in one or two dimensions.
//!
//! The crate is layered bottom-up:
//!
//! - [`expr`]: expression trees, parsing, symbolic differentiation.
//! - [`arrangement`]: sign-vector cells of a set of affine forms.
//! - [`piecewise`]: functions given by branch tables over those cells.
//! - [`specular`]: the A-combination, specular derivatives and fields,
//!   phototangents and membership checks for the specular spaces.
//! - [`tangent2d`]: phototangent sphere points, the strong-tangent
//!   criterion, specular normals and weak tangent planes.
//! - [`quad`]: quadrature that splits at singular points and lines, and a
//!   Green's-theorem verifier.
//! - [`waves`]: transport and wave solvers plus residual checks.
//!
//! ```
//! use speculus_core::{expr::parse, piecewise::PiecewiseFn, specular};
//!
//! let vars = vec!["x".to_string()];
//! let u = PiecewiseFn::from_expression(&parse("abs(x)", &vars).unwrap(), &vars).unwrap();
//! let d = specular::specular_partial(&u, &[0.0], 0).unwrap();
//! assert_eq!(d, 0.0);
//! ```

pub mod arrangement;
mod error;
pub mod expr;
pub mod piecewise;
pub mod quad;
pub mod specular;
pub mod tangent2d;
pub mod waves;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
