//! Numerical substrate: tensors, reverse-mode tape, FFT and Adam.

pub mod adam;
pub mod fft;
pub mod gradcheck;
pub mod spectral;
pub mod tape;
pub mod tensor;

pub use adam::{adam_step, AdamState};
pub use fft::{fft, ifft, ComplexVector, FftPlan};
pub use spectral::SpectralShape;
pub use tape::{Activation, Gradients, Tape, Var};
pub use tensor::Tensor;
