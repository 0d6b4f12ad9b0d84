//! Predictions, confusion matrices, classification reports, cross-model
//! comparison and the report/chart artifacts.

mod chart;
mod compare;
mod metrics;
mod report_json;

pub use chart::{emit_chart, render_chart, CHART_HEIGHT, CHART_WIDTH};
pub use compare::{
    compare_models, evaluate_checkpoint, evaluate_predictions, predict_batch, ModelComparison, ModelEvaluation,
};
pub use metrics::{
    accuracy, classification_report, confusion_matrix, ClassMetrics, ClassificationReport, ConfusionMatrix,
};
pub use report_json::{
    emit_report_json, parse_report_json, render_report_json, round_accuracy, validate_report_value, ClassEntry,
    ModelEntry, ReportJson,
};
