//! Trains Kriging, GEK and sliced GEK on the camelback function and compares
//! their predictions on a held-out test set.

use std::time::Instant;

use sgek::benchmarks::{rmse, TestFunction};
use sgek::{TrainOptions, TrainedSurrogate, Variant};

fn main() -> sgek::Result<()> {
    let f = TestFunction::camelback();
    let data = f.sample(20, 1)?;
    let (points, truth) = f.test_set(2000, 2)?;
    let options = TrainOptions {
        slices: Some(10),
        ..TrainOptions::default()
    };

    for variant in Variant::ALL {
        let started = Instant::now();
        let model = TrainedSurrogate::train(&data, variant, &options)?;
        let seconds = started.elapsed().as_secs_f64();
        let err = rmse(&model.predict_means(&points)?, &truth)?;
        println!(
            "{variant:>8}: relative error {err:.5}  theta {:.4?}  ({seconds:.2}s)",
            model.theta()
        );
    }

    let model = TrainedSurrogate::train(&data, Variant::Gek, &options)?;
    let x = [0.09, -0.71];
    println!(
        "\nGEK at {x:?}: mean {:.5} (true {:.5}), variance {:.3e}",
        model.predict_mean(&x)?,
        f.value(&x)?,
        model.predict_variance(&x)?
    );
    Ok(())
}
