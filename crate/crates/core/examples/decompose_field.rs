//! Writes a quadratic field on ℂ² as a sum of shear and overshear fields with
//! directions near v, then checks the reconstruction.
use alkit::decomp::{decompose_full, DecompOptions};
use alkit::polyalg::{CPolynomial, Monomial, PolyVectorField};
use alkit::shears::{Direction, Kind};
use num_complex::Complex64 as C;

fn main() -> alkit::Result<()> {
    let m = |e: [u32; 2], re: f64, im: f64| (Monomial(e.to_vec()), C::new(re, im));
    let x = PolyVectorField::new(vec![
        CPolynomial::from_terms(
            2,
            [
                m([0, 2], 1.0, 0.0),
                m([1, 1], 0.0, 0.5),
                m([1, 0], 0.2, 0.0),
            ],
        )?,
        CPolynomial::from_terms(2, [m([2, 0], -0.3, 0.0), m([0, 0], 1.0, 0.0)])?,
    ])?;
    let v = Direction::new(vec![C::new(0.6, 0.0), C::new(0.0, 0.8)])?;
    let decs = decompose_full(&x, &v, 0.3, &DecompOptions::default())?;

    let mut rec = PolyVectorField::zero(2);
    for d in &decs {
        println!(
            "degree {}: {} shears, {} overshears, condition {:.2e}, residual {:.1e}",
            d.degree,
            d.terms
                .iter()
                .filter(|t| t.generator.kind() == Kind::Shear)
                .count(),
            d.terms
                .iter()
                .filter(|t| t.generator.kind() == Kind::Overshear)
                .count(),
            d.condition,
            d.residual
        );
        rec = rec.add(&d.reconstruct(2));
    }
    println!(
        "max |X − Σ| coefficient: {:.2e}",
        x.sub(&rec).max_abs_coeff()
    );
    Ok(())
}
