use yfr::boundary::{BoundaryMeasure, BoundaryVertex, MeasureValue};
use yfr::closed_form::{fiber_sum_check, s_fiber};
use yfr::Word;

fn main() -> yfr::Result<()> {
    let r = 3;
    let u = Word::parse("2,1", 1)?;
    let v = Word::parse("1_2,2,1_3,1_1", r)?;
    let fiber = s_fiber(&u, r)?;
    println!("fiber of {u} at r={r}: {} words", fiber.len());
    let (lhs, rhs) = fiber_sum_check(&u, &v, r)?;
    println!("Σ d(w, {v}) over the fiber = {lhs}, r-scaled index-free count = {rhs}");

    let bv = BoundaryVertex::parse("runs=[1,2];idx=cycle(1,3);tail=geometric(4,2)", r)?;
    let full = BoundaryMeasure::new(&bv, 0.7, 1e-12)?;
    let free = BoundaryMeasure::new(&bv.forget(), 0.7, 1e-12)?;
    let mut sum = MeasureValue::Exact(num_rational::BigRational::from_integer(0.into()));
    for w in &fiber {
        sum = sum.add(&full.eval(w)?);
    }
    println!("Σ μ over the fiber = {sum}");
    println!("index-free μ({u})    = {}", free.eval(&u)?);
    Ok(())
}
