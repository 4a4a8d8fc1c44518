use yfr::graph::{degrees, level, level_size};

fn main() -> yfr::Result<()> {
    for r in 1..=3 {
        let sizes: Vec<String> = (0..=8).map(|n| level_size(r, n).to_string()).collect();
        println!("r={r} level sizes: {}", sizes.join(" "));
    }

    let lv = level(2, 3)?;
    println!("\nlevel 3 of the 2-differential graph ({} vertices):", lv.vertices.len());
    for v in &lv.vertices {
        let (up, down) = degrees(v);
        println!("  {v:<12} up={up} down={down}");
    }
    Ok(())
}
