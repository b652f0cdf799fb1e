//! Complex multivariate polynomials and polynomial vector fields.

mod field;
mod poly;

pub use field::PolyVectorField;
pub use poly::{monomials_of_degree, monomials_up_to, CPolynomial, Monomial};
