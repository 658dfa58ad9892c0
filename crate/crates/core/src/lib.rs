//! Continuous optimization of discrete information criteria.
//!
//! AIC, BIC and their generalizations count free parameters, which makes them
//! discontinuous in the parameter vector. This crate replaces each indicator
//! `I(x = 0)` in that count with a smooth bump `d_k(x)` whose sharpness `k`
//! is annealed toward infinity. Every surrogate is optimized by coordinate-wise
//! root finding on its gradient, warm-started from the optimum of the previous,
//! smoother surrogate.
//!
//! Two penalty modes are supported:
//!
//! * [`PenaltyMode::ZeroPenalty`] counts coefficients that are not exactly zero
//!   (variable selection).
//! * [`PenaltyMode::FusionPenalty`] counts distinct parameter values, so that an
//!   overparameterized model (one mean per observation) clusters itself.
//!
//! ```
//! use surrogate_ic::{
//!     continuation_solve, ContinuationSchedule, GaussMeansData, IcWeight, PenaltyMode,
//!     PenaltySpec, SmootherFamily,
//! };
//!
//! let data = GaussMeansData::with_plugin_sigma(vec![0.0, 0.1, 0.05, 5.0, 5.1]).unwrap();
//! let penalty = PenaltySpec::new(PenaltyMode::FusionPenalty, SmootherFamily::Sech, IcWeight::Bic);
//! let schedule = ContinuationSchedule::for_scale(data.sigma());
//! let path = continuation_solve(&data, &penalty, &schedule, data.y()).unwrap();
//! assert_eq!(path.terminal_pattern.labels().unwrap(), &[1, 1, 1, 2, 2]);
//! ```

pub mod cluster;
pub mod continuation;
pub mod io;
pub mod models;
pub mod objective;
pub mod oracle;
pub mod rootfind;
pub mod smoothers;
pub mod toy;

pub use cluster::{extract_clusters, ClusterAssignment, ClusterError};
pub use continuation::{
    continuation_solve, multistart_solve, polish, snap_pattern, ContinuationError, ContinuationSchedule,
    CoordinateReport, MultiStart, PathRecord, Pattern, SolutionPath, UpdateMethod,
};
pub use io::IoError;
pub use models::{GaussMeansData, LikelihoodModel, LinRegData, ModelError};
pub use objective::{
    fusion_pk, fusion_pk_grad, surface_slice, IcWeight, ObjectiveError, PenaltyMode, PenaltySpec, SurfacePoint,
    SurrogateObjective,
};
pub use oracle::{exhaustive_partition_ic, exhaustive_subset_ic, OracleError, OracleRow, OracleTable};
pub use rootfind::{
    lagrange_step, rescale, solve_root, DifferentiableTarget, FnTarget, RootError, RootMethod, RootSolveReport,
};
pub use smoothers::{Smoother, SmootherError, SmootherFamily};
pub use toy::{regression_toy, RegressionToy};
