//! Tunes sliced GEK hyper-parameters with both schemes on a 10-dimensional
//! Rosenbrock function and writes the scheme-1 search trace.

use sgek::benchmarks::TestFunction;
use sgek::sensitivity;
use sgek::sliced::partition;
use sgek::tuner::{tune_scheme1, tune_scheme2, TunerConfig};

fn main() -> sgek::Result<()> {
    let data = TestFunction::rosenbrock(10)?.sample(60, 2)?;
    let sens = sensitivity::from_samples(&data)?;
    let layout = partition(&data, sens.most_important(), 6)?;
    let config = TunerConfig {
        starts: 4,
        max_evals: Some(300),
        ..TunerConfig::default()
    };

    let two = tune_scheme2(&data, &layout, &sens, 2, &config)?;
    println!(
        "scheme 2: value {:.3}, {} evaluations, {:?}",
        two.value,
        two.evaluations,
        two.alpha.unwrap()
    );
    let one = tune_scheme1(&data, &layout, &sens, 2, &config)?;
    println!(
        "scheme 1: value {:.3}, {} evaluations",
        one.value, one.evaluations
    );
    for (k, (a, b)) in one.theta.iter().zip(&two.theta).enumerate() {
        println!("  theta_{:<2} trend {b:.4}  refined {a:.4}", k + 1);
    }

    let path = std::env::temp_dir().join("sgek-scheme1-trace.csv");
    one.trace.write_csv(&path)?;
    println!("trace written to {}", path.display());
    Ok(())
}
