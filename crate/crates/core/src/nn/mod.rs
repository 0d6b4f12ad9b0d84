//! Minimal tensor math and exact forward/backward passes for the six
//! classifier architectures.

mod attention;
mod gemm;
mod gradcheck;
mod layers;
mod model;
mod recurrent;
mod tensor;

pub use attention::{self_attention, self_attention_backward, AttentionGrads, AttentionTrace};
pub use gradcheck::{grad_check, relative_error, GradCheckReport};
pub use layers::{
    conv1d_backward, conv1d_forward, dense_backward, dense_forward, maxpool1d, maxpool1d_backward,
    softmax_cross_entropy, softmax_rows,
};
pub use model::{
    argmax, batch_loss_and_grads, init_params, model_backward, model_forward, predict_sample, sample_logits,
    ForwardTrace, ModelKind, ModelSpec, DEFAULT_CONV_CHANNELS, DEFAULT_HIDDEN, DEFAULT_KERNELS,
};
pub use recurrent::{
    backward_recurrent, gru_cell, lstm_cell, run_bidirectional, run_recurrent, CellGrads, CellKind,
    CellWeights, Direction, RecurrentOutput, SequenceTrace,
};
pub use tensor::{ParamEntry, ParamSet, Tensor};
