//! Truncated multivariable weighted shifts and numerical checks of the von
//! Neumann inequality.
//!
//! The crate builds the commuting matrices `T_j e_I = w_{I,j} e_{I+ε_j}` on
//! `span{e_I : |I| ≤ N+1}` from a weight family, and provides:
//!
//! * validation of the commutation relations and the `β ↔ w` correspondence
//!   ([`weights`]);
//! * phase normalization to positive weights ([`normalize`]);
//! * the good/bad index classification and the scaling that moves a family
//!   to the unimodular boundary ([`boundary`]);
//! * matrix polynomials, torus sup-norms and von Neumann ratios
//!   ([`poly`], [`vncheck`]);
//! * a finite cyclic unitary dilation of the all-ones shift and Brehmer
//!   defect operators ([`dilation`]);
//! * a zero-weight counterexample to the matrix inequality ([`parrott`]).

pub mod boundary;
pub mod certificate;
pub mod dilation;
pub mod error;
pub mod formats;
pub mod linalg;
pub mod multiindex;
pub mod normalize;
pub mod parrott;
pub mod poly;
pub mod shift;
pub mod vncheck;
pub mod weights;

pub use error::{Result, ShiftError};
pub use linalg::{op_norm, CMatrix};
pub use multiindex::{BasisEnumeration, MultiIndex};
pub use poly::MatrixPolynomial;
pub use shift::TruncatedShift;
pub use weights::{BetaFamily, Profile, WeightFamily};

pub use num_complex::Complex64;
