//! Builds a short word of shears and overshears, evaluates it, inverts it and
//! checks that the Jacobian determinant matches the overshear contributions.
use alkit::polyalg::CPolynomial;
use alkit::shears::{AutomorphismWord, Direction, ShearGenerator};
use num_complex::Complex64 as C;

fn main() -> alkit::Result<()> {
    let w1 = CPolynomial::variable(1, 0);
    let e1 = Direction::axis(2, 0);
    let d = Direction::new(vec![C::new(1.0, 0.0), C::new(0.3, -0.2)])?;

    let mut word = AutomorphismWord::empty();
    // z ↦ z + w² e₁, a shear.
    word.push(ShearGenerator::shear(e1.clone(), w1.pow(2))?, 1.0);
    // z ↦ z + (e^{t·0.5w} − 1)⟨z, d⟩ d, an overshear.
    word.push(
        ShearGenerator::overshear(d.clone(), w1.scale(C::new(0.5, 0.0)))?,
        0.7,
    );
    word.push(
        ShearGenerator::shear(d, w1.pow(3).scale(C::new(0.1, 0.0)))?,
        -1.2,
    );

    let z = vec![C::new(0.4, -0.1), C::new(-0.3, 0.6)];
    let fz = word.eval(&z)?;
    let back = word.invert().eval(&fz)?;
    let err = z
        .iter()
        .zip(&back)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    println!("F(z)        = [{:.6}, {:.6}]", fz[0], fz[1]);
    println!("|F⁻¹(F(z)) − z| = {err:.2e}");
    println!("det DF(z)   = {:.6}", word.jacobian_det(&z));
    println!("{}", serde_json::to_string(&word).expect("word serializes"));
    Ok(())
}
