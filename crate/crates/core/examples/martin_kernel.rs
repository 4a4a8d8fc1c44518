use yfr::boundary::{martin_kernel, BoundaryVertex};
use yfr::experiments::kernel_trace;
use yfr::Word;

fn main() -> yfr::Result<()> {
    let w = Word::parse("2", 1)?;
    let v = Word::parse("2,2", 1)?;
    println!("K({w}, {v}) = {}", martin_kernel(&w, &v)?);

    let bv = BoundaryVertex::parse("runs=[1,2];tail=geometric(4,2)", 2)?;
    let w = Word::parse("2,1_2", 2)?;
    for beta in [1.0, 0.7] {
        let trace = kernel_trace(&w, &bv, beta, 10, 1e-14)?;
        println!("\nK({w}, v_n) → μ({w}) at β = {beta}");
        for p in &trace.points {
            println!(
                "  |v_n| = {:5}  K = {:.10}  distance = {:.2e}",
                p.length,
                p.value.value(),
                p.distance
            );
        }
    }
    Ok(())
}
