use yfr::boundary::BoundaryVertex;
use yfr::experiments::{tail_q_report, tail_r_report, TailParams};

fn main() -> yfr::Result<()> {
    let v = BoundaryVertex::parse("runs=[1,8];idx=const(1);tail=geometric(16,2);tidx=const(1)", 2)?;
    let params = TailParams::new(v, 1.0, 1e-9, 6);

    for k in [1, 2] {
        let rep = tail_q_report(&params, k)?;
        println!("e(w, v) < {k}:");
        for row in &rep.rows {
            println!("  m={} |set|={:3}/{:3} mass={:.5}", row.m, row.set_size, row.level_size, row.mass.value());
        }
    }
    let rep = tail_r_report(&params, 0.3)?;
    println!("\nπ(w) outside the 0.3-window:");
    rep.write_csv(std::io::stdout())?;
    Ok(())
}
