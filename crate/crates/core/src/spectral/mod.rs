//! Fourier representation of periodic fields on `[0, 2π)³`.

mod fft;
mod field;
mod grid;
mod identities;
mod interp;
mod ops;
mod random;
mod tensor;

pub use field::{SpectralField, BOX_VOLUME};
pub use grid::{ksq, Grid, ModeIter};
pub use interp::FourierInterpolant;
pub use identities::{projection_identity_residuals, IdentityResiduals};
pub use ops::*;
pub use random::{random_field, random_solenoidal, random_vector};
pub use tensor::{sym_index, SymTensor, SYM_PAIRS};
