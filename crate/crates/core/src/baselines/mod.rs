//! Prediction-based and topic-model baselines.

pub mod lda;
pub mod sgns;

pub use lda::{infer_theta, theta_features, train_lda, LdaConfig, LdaModel};
pub use sgns::{
    check_implicit_factorization, train_sgns, FactorizationCheck, SgnsConfig, SgnsModel,
};
