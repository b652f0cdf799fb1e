//! First-order convergence of Lie splitting for a random quadratic field on ℂ²,
//! and second-order convergence of the Strang variant.
use alkit::decomp::DecompOptions;
use alkit::flows::{
    ball_samples, convergence_study, random_polynomial_field, split_compose, sup_error,
    SplitScheme, TimeDependentField,
};
use alkit::shears::Direction;
use num_complex::Complex64 as C;

fn main() -> alkit::Result<()> {
    let x = TimeDependentField::constant(random_polynomial_field(2, 2, 0.1, 42), 1.0);
    let v = Direction::new(vec![C::new(1.0, 0.0), C::new(0.1, 0.0)])?;
    let samples = ball_samples(2, 1.0, 40, 1);
    let opts = DecompOptions::default();

    println!("Lie");
    for r in convergence_study(&x, &v, 0.5, &[8, 16, 32, 64], &samples, &opts)? {
        match r.ratio {
            Some(q) => println!(
                "  N = {:>3}  sup error {:.3e}  ratio {q:.3}",
                r.steps, r.sup_error
            ),
            None => println!("  N = {:>3}  sup error {:.3e}", r.steps, r.sup_error),
        }
    }
    println!("Strang");
    let mut prev: Option<f64> = None;
    for n in [8, 16, 32] {
        let word = split_compose(&x, &v, 0.5, n, SplitScheme::Strang, &opts)?;
        let e = sup_error(&x, &word, &samples, 1e-12)?;
        match prev {
            Some(p) => println!("  N = {n:>3}  sup error {e:.3e}  ratio {:.3}", p / e),
            None => println!("  N = {n:>3}  sup error {e:.3e}"),
        }
        prev = Some(e);
    }
    Ok(())
}
