//! Dense `f64` numeric substrate: tensors, the reverse-mode tape, Adam,
//! dropout masks, truncated-normal initialisation and gradient checking.

mod adam;
mod dropout;
mod gradcheck;
mod init;
mod ops;
mod tape;
mod tensor;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use dropout::{dropout_mask, dropout_mask_with};
pub use gradcheck::{grad_check, GradCheckReport, DEFAULT_EPS};
pub use init::truncated_normal;
pub use ops::{log_sigmoid, matmul, sigmoid, sigmoid_xent, softmax};
pub use tape::{Fault, Gradients, Tape, Var};
pub use tensor::Tensor;
