use yfr::closed_form::{d1_closed, dr_closed, dr_suffix_class, f_eval, g_values};
use yfr::graph::count_paths_dp;
use yfr::Word;

fn main() -> yfr::Result<()> {
    let v = Word::parse("1,2,1,1,2,1", 1)?;
    println!("g-values of {v}: {:?}", g_values(&v));
    for i in 0..=3 {
        println!("f({v}, {i}, 0) = {}", f_eval(&v, i, 0)?);
    }

    let w = Word::parse("2,1", 1)?;
    println!("\nd1({w}, {v}): closed {} dp {}", d1_closed(&w, &v)?, count_paths_dp(&w, &v)?);

    let w = Word::parse("1_2,1_1", 3)?;
    let v = Word::parse("2,1_3,2,1_2,1_1", 3)?;
    println!("d3({w}, {v}): closed {} dp {}", dr_closed(&w, &v)?, count_paths_dp(&w, &v)?);
    for l in 0..=w.common_suffix_len(&v) {
        println!("  chains sharing exactly {l} trailing symbols: {}", dr_suffix_class(&w, &v, l)?);
    }
    Ok(())
}
