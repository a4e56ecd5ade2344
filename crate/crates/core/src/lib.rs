pub mod eigen;
pub mod error;
pub mod function;
pub mod inequalities;
pub mod instance;
pub mod learner;
pub mod lsd;
pub mod majix;
pub mod matrix;
pub mod measures;
pub mod oracle;
pub mod protocol;
pub mod random;
pub mod scalar;
pub mod state;

pub use error::{Error, Result};
pub use function::{Cell, PartialFunction};

pub type ComplexMatrix = matrix::Matrix<f64>;
pub type DensityMatrix = state::DensityMatrix<f64>;
pub type Projector = state::Projector<f64>;
pub type Spectrum = eigen::Spectrum<f64>;
pub type EntropyValue = measures::EntropyValue<f64>;
