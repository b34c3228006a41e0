//! Ranks the inputs of a 10-dimensional Rosenbrock function by their
//! derivative-based sensitivity indices, using gradients from training data.

use sgek::benchmarks::TestFunction;
use sgek::sensitivity;

fn main() -> sgek::Result<()> {
    let f = TestFunction::rosenbrock(10)?;
    let data = f.sample(60, 3)?;
    let s = sensitivity::from_samples(&data)?;
    println!("{:>4} {:>12} {:>10}", "dim", "raw", "share");
    for &k in &s.ranking {
        println!("{:>4} {:>12.3} {:>10.4}", k + 1, s.raw[k], s.normalized[k]);
    }
    println!("slicing dimension: x_{}", s.most_important() + 1);
    Ok(())
}
