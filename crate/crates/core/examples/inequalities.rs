use yfr::experiments::inequality_scan;

fn main() -> yfr::Result<()> {
    for (r, max) in [(2, 6), (3, 5)] {
        let scan = inequality_scan(r, max)?;
        println!(
            "r={r} up to weight {max}: {} comparisons, {} violations",
            scan.checked, scan.violations
        );
        if let Some(first) = scan.first_violation {
            println!("  first: {first}");
        }
    }
    Ok(())
}
