use super::metrics::{accuracy, classification_report, confusion_matrix, ClassificationReport, ConfusionMatrix};
use crate::data::{FeatureTensor, SplitSet};
use crate::error::{Error, Result};
use crate::hash::hex64;
use crate::nn::{argmax, sample_logits, ModelSpec, ParamSet};
use crate::svm::{svm_features, svm_predict, SvmModel};
use crate::train::Checkpoint;

/// Arg-max class of every sample in a flat `B x T x C` batch (ties go to the
/// lower class index).
pub fn predict_batch(spec: &ModelSpec, params: &ParamSet, batch: &[f64]) -> Result<Vec<usize>> {
    let per = spec.input_t * spec.input_c;
    if per == 0 || batch.is_empty() || batch.len() % per != 0 {
        return Err(Error::Shape(format!(
            "batch of {} values is not a multiple of {}x{}",
            batch.len(),
            spec.input_t,
            spec.input_c
        )));
    }
    batch
        .chunks_exact(per)
        .map(|x| sample_logits(spec, params, x).map(|l| argmax(&l)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelEvaluation {
    pub name: String,
    pub accuracy: f64,
    pub true_positives: u64,
    pub errors: u64,
    pub confusion: ConfusionMatrix,
    pub report: ClassificationReport,
    /// Identity of the test subset the predictions were made on.
    pub test_hash: u64,
}

pub fn evaluate_predictions(
    name: impl Into<String>,
    truth: &[usize],
    predicted: &[usize],
    test_hash: u64,
) -> Result<ModelEvaluation> {
    let confusion = confusion_matrix(truth, predicted)?;
    let acc = accuracy(&confusion)?;
    let correct = confusion.correct();
    Ok(ModelEvaluation {
        name: name.into(),
        accuracy: acc,
        true_positives: correct,
        errors: confusion.total() - correct,
        report: classification_report(&confusion)?,
        confusion,
        test_hash,
    })
}

/// Scores a checkpoint on the test subset of `split` after checking that it
/// was trained on the same features and split.
pub fn evaluate_checkpoint(ckpt: &Checkpoint, tensor: &FeatureTensor, split: &SplitSet) -> Result<ModelEvaluation> {
    let name = ckpt.meta.kind.clone();
    let feature_hash = hex64(tensor.config_hash());
    if ckpt.meta.feature_config_hash != feature_hash {
        return Err(Error::Integrity(format!(
            "{name} was trained on features {} but the tensor has {feature_hash}",
            ckpt.meta.feature_config_hash
        )));
    }
    let test_hash = split.test_hash();
    if ckpt.meta.split.test_hash != hex64(test_hash) || ckpt.meta.split.test_size != split.test.len() {
        return Err(Error::Split(format!("{name} was selected on a different split")));
    }
    let test = tensor.select(&split.test);
    let truth: Vec<usize> = test.labels().iter().map(|l| l.index()).collect();
    let predicted = if ckpt.is_svm() {
        let meta = ckpt.meta.svm.clone().expect("decoded SVM checkpoints carry settings");
        let model = SvmModel::from_params(&ckpt.params, meta)?;
        svm_predict(&model, &svm_features(&test))?
    } else {
        let spec = ckpt.spec()?;
        if spec.input_t != test.time_steps() || spec.input_c != test.channels() {
            return Err(Error::Shape(format!(
                "{name} expects {}x{} samples, tensor has {}x{}",
                spec.input_t,
                spec.input_c,
                test.time_steps(),
                test.channels()
            )));
        }
        predict_batch(spec, &ckpt.params, test.data())?
    };
    evaluate_predictions(name, &truth, &predicted, test_hash)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelComparison {
    pub test_size: u64,
    pub test_hash: u64,
    /// Best accuracy first; equal accuracies by name.
    pub entries: Vec<ModelEvaluation>,
}

/// Ranks evaluations made on one test subset.
pub fn compare_models(mut evaluations: Vec<ModelEvaluation>) -> Result<ModelComparison> {
    let first = evaluations
        .first()
        .ok_or_else(|| Error::InvalidArgument("nothing to compare".into()))?;
    let (hash, size) = (first.test_hash, first.confusion.total());
    for e in &evaluations {
        if e.test_hash != hash || e.confusion.total() != size {
            return Err(Error::Split(format!(
                "{} was evaluated on a different test split than {}",
                e.name, first.name
            )));
        }
    }
    let mut names: Vec<&str> = evaluations.iter().map(|e| e.name.as_str()).collect();
    names.sort_unstable();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument(format!("model {} appears twice", w[0])));
    }
    evaluations.sort_by(|a, b| b.accuracy.total_cmp(&a.accuracy).then_with(|| a.name.cmp(&b.name)));
    Ok(ModelComparison {
        test_size: size,
        test_hash: hash,
        entries: evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{init_params, ModelKind};

    fn eval(name: &str, truth: &[usize], pred: &[usize], hash: u64) -> ModelEvaluation {
        evaluate_predictions(name, truth, pred, hash).unwrap()
    }

    #[test]
    fn ranking_and_split_checks() {
        let truth = [0, 1, 2, 0, 1, 2, 0, 1, 2, 0];
        let a = eval("GRU", &truth, &[0, 1, 2, 0, 1, 2, 0, 1, 0, 0], 7);
        let b = eval("CNN", &truth, &[0, 1, 2, 0, 1, 2, 0, 0, 0, 0], 7);
        let c = eval("ATTN", &truth, &[0, 1, 2, 0, 1, 2, 0, 1, 0, 0], 7);
        let cmp = compare_models(vec![b.clone(), a.clone(), c]).unwrap();
        let names: Vec<&str> = cmp.entries.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names, ["ATTN", "GRU", "CNN"]);
        assert!(cmp.entries.iter().all(|e| e.true_positives + e.errors == 10));

        let other = eval("LSTM", &truth, &truth, 8);
        assert!(compare_models(vec![a.clone(), other]).is_err());
        assert!(compare_models(vec![a.clone(), a]).is_err());
        assert!(compare_models(vec![]).is_err());
    }

    #[test]
    fn batch_predictions_equal_single_predictions() {
        let spec = ModelSpec::new(ModelKind::Cnn, 12, 3);
        let params = init_params(&spec, 5).unwrap();
        let mut rng = crate::rng::Rng::new(1);
        let batch: Vec<f64> = (0..6 * 36).map(|_| rng.normal()).collect();
        let all = predict_batch(&spec, &params, &batch).unwrap();
        for (i, x) in batch.chunks_exact(36).enumerate() {
            assert_eq!(predict_batch(&spec, &params, x).unwrap(), vec![all[i]]);
        }
        assert!(predict_batch(&spec, &params, &batch[..35]).is_err());
    }
}
