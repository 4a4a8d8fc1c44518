use yfr::boundary::{harmonicity_residual_exact, level_mass_exact, plancherel};
use yfr::graph::level;
use yfr::Word;

fn main() -> yfr::Result<()> {
    for w in ["2", "1_1", "2,1_2", "1_1,2,2"] {
        let w = Word::parse(w, 2)?;
        println!("μ_P({w}) = {}", plancherel(&w));
    }
    for r in 1..=3 {
        let masses: Vec<String> = (0..=8)
            .map(|m| level(r, m).map(|lv| level_mass_exact(&lv.vertices, plancherel).to_string()))
            .collect::<yfr::Result<_>>()?;
        println!("r={r} level masses: {}", masses.join(" "));
    }
    let w = Word::parse("2,1_1", 2)?;
    println!("harmonicity residual at {w}: {}", harmonicity_residual_exact(&w, plancherel));
    Ok(())
}
