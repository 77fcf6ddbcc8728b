//! Statistics used to parameterise and validate the model.

pub mod bass;
pub mod mnl;
pub mod stats;
pub mod survey;

pub use bass::{
    bass_curve, bass_fit, compare_trajectories, read_registry, synthetic_registry, BassFit, BassParams,
    TrajectoryComparison,
};
pub use mnl::{mnl_fit, ChoiceData, MnlModel, MnlOptions, WaldResult};
pub use stats::{
    chi_square_independence, cochran_sample_size, kruskal_wallis, mann_whitney_u, paired_t_test, MannWhitney,
    PairedTest, TestResult,
};
pub use survey::{
    normalize_weights, survey_from_population, survey_report, SurveyReport, SurveyRow, SurveyTable, WeightEstimate,
};
