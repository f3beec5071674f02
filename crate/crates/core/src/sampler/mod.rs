//! The trainable frame sampler: model, losses, and the distillation trainer.

mod loss;
mod model;
mod train;

pub use loss::{
    label_guidance_loss, mse_importance_loss, ranking_loss, ranking_loss_printed, so_loss,
    ScoreLoss, SoLossKind,
};
pub use model::{ForwardPass, InputProjection, SamplerModel, TensorSet};
pub use train::{
    cosine_lr, infer, teacher_targets, total_loss, train, EpochLog, MomentumSgd, TotalLoss,
    TrainConfig, TrainInputs, TrainReport,
};
