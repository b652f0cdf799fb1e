//! Runtime diagnostics for the projection along v of a perturbed real line in
//! ℂ²: properness, totally real embedding and the inner-product lower bound.
use alkit::pipeline::{nice_projection_diagnostics, BOUNDED_HULLS_NOTE};
use alkit::shears::Direction;
use num_complex::Complex64 as C;

fn main() {
    let params: Vec<f64> = (0..=400).map(|i| -10.0 + 0.05 * i as f64).collect();
    let curve: Vec<Vec<C>> = params
        .iter()
        .map(|&x| {
            let b = (-(x - 1.0).powi(2)).exp();
            vec![C::new(x + 0.05 * b, 0.0), C::new(0.0, 0.08 * b)]
        })
        .collect();
    let k: Vec<Vec<C>> = (0..50)
        .map(|i| {
            let a = i as f64 * 0.1256;
            vec![C::new(0.1 * a.cos(), 0.0), C::new(0.0, 0.5 + 0.1 * a.sin())]
        })
        .collect();
    let v = Direction::axis(2, 1);
    let rep = nice_projection_diagnostics(&curve, &params, (-1.0, 3.0), &k, &v, 0.3, 25, 7);
    println!(
        "target radius {:.2}, sample extent {:.2}",
        rep.target_radius, rep.sample_extent
    );
    println!("proper: {}", rep.proper);
    println!("totally real embedding: {}", rep.totally_real_embedding);
    match rep.inner_lower_bound {
        Some(b) => println!("inf |⟨z, v⟩| over K: {b:.3}"),
        None => println!("inner product not bounded away from zero"),
    }
    println!("bounded hulls: {BOUNDED_HULLS_NOTE}");
    let worst = rep
        .directions
        .iter()
        .map(|d| d.min_stretch)
        .fold(f64::INFINITY, f64::min);
    println!(
        "{} directions, smallest stretch {worst:.3}",
        rep.directions.len()
    );
}
