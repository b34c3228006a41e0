//! Compares the full GEK likelihood with its sliced approximations on the
//! camelback function, for several slice counts and appendant orders.

use sgek::benchmarks::TestFunction;
use sgek::gek::full_log_likelihood;
use sgek::sensitivity;
use sgek::sliced::{cost_ratio, partition, sliced_log_likelihood};
use sgek::KernelParams;

fn main() -> sgek::Result<()> {
    let data = TestFunction::camelback().sample(20, 5)?;
    let dim = sensitivity::from_samples(&data)?.most_important();
    println!("slicing along x_{}", dim + 1);

    for theta in [[0.05, 0.025], [0.2, 0.1], [0.8, 0.4]] {
        let p = KernelParams::new(theta.to_vec())?;
        println!(
            "\ntheta = {theta:?}: full {:.3}",
            full_log_likelihood(&data, &p, true)?
        );
        for m in [5, 10, 20] {
            let layout = partition(&data, dim, m)?;
            println!(
                "  m = {m:>2}: 2-appendant {:>9.3}  3-appendant {:>9.3}",
                sliced_log_likelihood(&p, &data, &layout, 2)?,
                sliced_log_likelihood(&p, &data, &layout, 3)?
            );
        }
    }

    println!("\nfactorization cost of the full likelihood relative to 2-appendant:");
    for m in [10, 20, 50, 100, 200] {
        println!("  m = {m:>3}: {:.2}", cost_ratio(m)?);
    }
    Ok(())
}
