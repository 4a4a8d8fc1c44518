use yfr::graph::{count_paths_dp, LevelTable, PathCounter};
use yfr::Word;

fn main() -> yfr::Result<()> {
    let v = Word::parse("2,1_2,2,1_1", 2)?;
    let w = Word::parse("1_1", 2)?;
    println!("d({w}, {v}) = {}", count_paths_dp(&w, &v)?);

    let counter = PathCounter::new();
    for to in ["2,2", "2,1,2", "1,2,2,1"] {
        let v = Word::parse(to, 1)?;
        println!("d(ε, {v}) = {}", counter.count(&Word::empty(1), &v)?);
    }
    println!("memo entries: {}", counter.cache_len());

    // all counts from ε to level 6 in one sweep
    let table = LevelTable::new(2, 6)?;
    let counts = table.counts_from(&Word::empty(2));
    let total: num_bigint::BigUint = counts[6].iter().map(|c| c * c).sum();
    println!("Σ d(ε, v)² over level 6 (r=2): {total}");
    Ok(())
}
