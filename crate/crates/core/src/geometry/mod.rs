//! Exact rational polyhedral kernel over the unit cube.

mod affine;
mod complex;
mod cut;
pub mod linalg;
mod polyhedron;
mod simplex;

pub use affine::AffineFn;
pub use complex::{refine, split_by_hyperplane, triangulate_cube, Refinement, Side, SimplicialComplex};
pub use cut::slice_simplex;
pub use polyhedron::{polyhedron_equal, RationalPolyhedron};
pub use simplex::{affinely_independent, barycenter, simplex_volume, Hrep, Simplex, Volume};

pub(crate) use complex::check_dim;
pub(crate) use cut::{clip, split_off};

use crate::scalar::{format_rational, parse_rational, Rational};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 6;

pub type Point = Vec<Rational>;

pub fn format_point(p: &[Rational]) -> Vec<String> {
    p.iter().map(format_rational).collect()
}

pub fn parse_point(coords: &[impl AsRef<str>]) -> crate::error::Result<Point> {
    coords.iter().map(|c| parse_rational(c.as_ref())).collect()
}
