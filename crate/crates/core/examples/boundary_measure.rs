use yfr::boundary::{level_mass, pi_boundary, BoundaryMeasure, BoundaryVertex};
use yfr::graph::level;

fn main() -> yfr::Result<()> {
    let v = BoundaryVertex::parse("runs=[1,2];idx=cycle(1,2);tail=geometric(4,2);tidx=const(1)", 2)?;
    println!("v = {v}");
    println!("last 12 symbols: {}", v.materialize(12));
    println!("π(v) = {}", pi_boundary(&v, 1e-15)?);

    for beta in [1.0, 0.7] {
        let tol = 1e-9;
        let m = BoundaryMeasure::new(&v, beta, tol)?;
        println!("\nβ = {beta}");
        for w in level(2, 2)?.vertices {
            println!("  μ({w}) = {}", m.eval(&w)?);
        }
        for lvl in 0..=5 {
            let n = level(2, lvl)?.vertices.len() as f64;
            let mass = level_mass(|w| m.eval_with_tolerance(w, tol / n), 2, lvl)?;
            println!("  level {lvl} mass = {mass}");
        }
    }
    Ok(())
}
