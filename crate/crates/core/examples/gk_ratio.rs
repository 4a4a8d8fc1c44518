use yfr::boundary::{BoundaryVertex, Truncator};
use yfr::experiments::gk_ratio_trace;

fn main() -> yfr::Result<()> {
    let v = BoundaryVertex::parse("runs=[1,2];tail=geometric(4,2)", 1)?;
    let t = Truncator::new(&v)?;
    for n in [10, 40, 160] {
        let cut = t.truncate(0.5, n)?;
        println!(
            "n={n:3}: {} Twos and {} units prepended, π(v_n)/π(v) = {:.8}",
            cut.prefix_twos, cut.extra_units, cut.achieved_ratio
        );
    }

    for beta in [1.0, 0.7] {
        for i in [2, 3] {
            let trace = gk_ratio_trace(&v, beta, i, 10, 1e-14)?;
            let d: Vec<String> = trace.distances().iter().map(|x| format!("{x:.1e}")).collect();
            println!("β={beta} i={i}: |π_i(v_n)/π_i(v) - β^i| = {}", d.join(" "));
        }
    }
    Ok(())
}
