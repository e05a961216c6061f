//! Cluster-respecting cross-validation, information criteria with an
//! equicorrelated-block likelihood, and forward/backward term scans.

mod cv;
mod folds;
mod ic;
mod likelihood;
mod scan;

pub use cv::{cv_loss, CvResult, FoldResult};
pub use folds::{make_folds, FoldPlan};
pub use ic::{information_criterion, Criterion, ICResult, ParamCount};
pub use likelihood::{fit_rho, loglik_equicorr, loglik_iid, EquicorrParams, RhoFit};
pub use scan::{backward_scan, forward_scan, write_scan_csv, CvScorer, IcScorer, ModelScore, ModelScorer, Scan, ScanRow};
