//! Cohen–Macaulay representation type of complete hypersurface
//! singularities `k[[x_0, ..., x_d]]/(f)`, together with explicit witnesses:
//! matrix factorizations, double branched cover lifts, the `D_infinity`
//! module catalog, and conductor-square liftings of Artinian pair modules.

pub mod algebra;
pub mod bivariate;
pub mod catalog;
pub mod classify;
pub mod cli;
pub mod field;
pub mod jets;
pub mod linalg;
pub mod local;
pub mod matrix;
pub mod pairs;
pub mod parse;
pub mod series;

pub use field::{FieldSpec, Scalar};
pub use parse::{parse_series, ParseError};
pub use series::{Order, SeriesError, TruncatedSeries, WeierstrassData};
