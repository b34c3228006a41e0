//! Trains on an external CSV dataset (`x_1..x_n, y, dy_1..dy_n`) and predicts
//! at new points. Without an argument a synthetic dataset is written first.

use std::path::PathBuf;

use sgek::benchmarks::TestFunction;
use sgek::{SampleSet, TrainOptions, TrainedSurrogate, Variant};

fn main() -> sgek::Result<()> {
    let path = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => {
            let p = std::env::temp_dir().join("sgek-dataset.csv");
            TestFunction::dixon_price(6)?.sample(40, 8)?.write_csv(&p)?;
            println!("wrote synthetic dataset {}", p.display());
            p
        }
    };
    // the domain defaults to the bounding box of the sites
    let data = SampleSet::read_csv(&path, None)?;
    println!("{} sites in {} dimensions", data.len(), data.dim());

    let options = TrainOptions {
        slices: Some(5),
        ..TrainOptions::default()
    };
    let model = TrainedSurrogate::train(&data, Variant::Sgek1, &options)?;
    let model_path = std::env::temp_dir().join("sgek-model.json");
    model.save(&model_path)?;
    let model = TrainedSurrogate::load(&model_path)?;

    let centre: Vec<f64> = (0..data.dim())
        .map(|k| 0.5 * (data.domain().lower()[k] + data.domain().upper()[k]))
        .collect();
    println!(
        "prediction at the box centre: mean {:.4}, variance {:.3e}",
        model.predict_mean(&centre)?,
        model.predict_variance(&centre)?
    );
    Ok(())
}
