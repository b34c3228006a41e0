//! Kriging, gradient-enhanced Kriging (GEK) and sliced gradient-enhanced
//! Kriging (SGEK) surrogate models.
//!
//! ```no_run
//! use sgek::benchmarks::TestFunction;
//! use sgek::gek::{TrainOptions, TrainedSurrogate, Variant};
//!
//! let f = TestFunction::camelback();
//! let data = f.sample(20, 7).unwrap();
//! let model = TrainedSurrogate::train(&data, Variant::Sgek2, &TrainOptions::default()).unwrap();
//! println!("{}", model.predict_mean(&[0.1, -0.3]).unwrap());
//! ```

pub mod benchmarks;
pub mod cli;
pub mod error;
pub mod gek;
pub mod kernels;
pub mod linalg;
pub mod sampling;
pub mod sensitivity;
pub mod sliced;
pub mod tuner;

pub use error::{Error, Result};
pub use gek::{TrainOptions, TrainedSurrogate, Variant};
pub use kernels::KernelParams;
pub use sampling::{DomainBox, SampleSet};
pub use sensitivity::SensitivityResult;
pub use sliced::SliceLayout;
