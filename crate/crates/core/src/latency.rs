//! Linear latency cost models.
//!
//! A graph maps to a fixed 16-entry feature vector: per operation bucket
//! (1x1 / 3x3 / 5x5 regular conv, 3x3 / 5x5 depthwise conv, fully-connected,
//! pooling) the total MAdds and the total output-element count, then the
//! layer count and a constant bias feature. MAdds track compute-bound cost,
//! output elements track memory-bound cost; together they let one schema fit
//! hardware with very different bottlenecks. A [`CostModel`] is one weight
//! per feature, fitted by ridge-stabilized least squares on
//! (architecture, latency) samples.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{LayerGraph, LayerKind};

/// Feature schema length.
pub const FEATURE_LEN: usize = 16;

/// Feature names in vector order.
pub const FEATURE_NAMES: [&str; FEATURE_LEN] = [
    "conv1x1_madds",
    "conv1x1_elems",
    "conv3x3_madds",
    "conv3x3_elems",
    "conv5x5_madds",
    "conv5x5_elems",
    "dw3x3_madds",
    "dw3x3_elems",
    "dw5x5_madds",
    "dw5x5_elems",
    "fc_madds",
    "fc_elems",
    "pool_madds",
    "pool_elems",
    "layer_count",
    "bias",
];

/// Predictions are clamped below this so downstream latency ratios stay
/// positive.
pub const MIN_LATENCY_MS: f64 = 1e-3;

const SCHEMA_VERSION: u32 = 1;

/// Fixed-order numeric summary of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURE_LEN]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Maps every layer onto (bucket madds, bucket output elements), plus the
/// layer count and bias entries. Additive over graph concatenation except
/// for the bias. Residual adds carry no parameterized compute and count only
/// toward the layer total.
pub fn extract_features(graph: &LayerGraph) -> Result<FeatureVector> {
    graph.validate()?;
    let mut f = [0.0f64; FEATURE_LEN];
    let resolutions = graph.resolutions();
    for (i, (layer, in_res)) in graph.layers.iter().zip(resolutions).enumerate() {
        let bucket = match (layer.kind, layer.kernel) {
            (LayerKind::Conv2d, Some(1)) => Some(0),
            (LayerKind::Conv2d, Some(3)) => Some(1),
            (LayerKind::Conv2d, Some(5)) => Some(2),
            (LayerKind::DepthwiseConv2d, Some(3)) => Some(3),
            (LayerKind::DepthwiseConv2d, Some(5)) => Some(4),
            (LayerKind::FullyConnected, _) => Some(5),
            (LayerKind::GlobalAvgPool, _) => Some(6),
            (LayerKind::ResidualAdd, _) => None,
            (kind, kernel) => {
                return Err(Error::FeatureSchema {
                    layer: i,
                    reason: format!("no bucket for {} with kernel {kernel:?}", kind.name()),
                });
            }
        };
        if let Some(b) = bucket {
            let out_res = match layer.kind {
                LayerKind::Conv2d | LayerKind::DepthwiseConv2d => {
                    in_res.div_ceil(layer.stride.max(1))
                }
                LayerKind::GlobalAvgPool => 1,
                _ => in_res,
            } as f64;
            let madds = crate::graph::layer_madds(layer, in_res) as f64;
            let elems = match layer.kind {
                LayerKind::FullyConnected => layer.out_ch as f64,
                _ => out_res * out_res * layer.out_ch as f64,
            };
            f[2 * b] += madds;
            f[2 * b + 1] += elems;
        }
        f[FEATURE_LEN - 2] += 1.0;
    }
    f[FEATURE_LEN - 1] = 1.0;
    Ok(FeatureVector(f))
}

/// Fit quality on the held-out split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub pearson_r: f64,
    pub rmse: f64,
    pub n_train: usize,
    pub n_test: usize,
}

/// Linear latency predictor for one hardware target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub hardware_id: String,
    pub schema_version: u32,
    pub weights: Vec<f64>,
    pub calibration: Calibration,
}

impl CostModel {
    /// Builds a model directly from weights (synthetic fixtures, tests).
    pub fn from_weights(hardware_id: &str, weights: Vec<f64>) -> CostModel {
        CostModel {
            hardware_id: hardware_id.to_string(),
            schema_version: SCHEMA_VERSION,
            weights,
            calibration: Calibration {
                pearson_r: 1.0,
                rmse: 0.0,
                n_train: 0,
                n_test: 0,
            },
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<CostModel> {
        let model: CostModel = serde_json::from_str(json)?;
        if model.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidInput(format!(
                "unsupported cost model schema version {}",
                model.schema_version
            )));
        }
        if model.weights.len() != FEATURE_LEN {
            return Err(Error::SchemaMismatch {
                model: model.weights.len(),
                schema: FEATURE_LEN,
            });
        }
        Ok(model)
    }

    pub fn read_file(path: impl AsRef<std::path::Path>) -> Result<CostModel> {
        CostModel::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write_file(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// One latency measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencySample {
    pub arch_id: String,
    pub hardware_id: String,
    pub latency_ms: f64,
}

/// Resolves sample architecture ids to graphs.
pub trait GraphResolver {
    fn resolve(&self, arch_id: &str) -> Result<&LayerGraph>;
}

impl GraphResolver for HashMap<String, LayerGraph> {
    fn resolve(&self, arch_id: &str) -> Result<&LayerGraph> {
        self.get(arch_id)
            .ok_or_else(|| Error::InvalidInput(format!("no graph for arch id `{arch_id}`")))
    }
}

/// Reads `arch_id,hardware_id,latency_ms` rows.
pub fn read_samples_csv(reader: impl std::io::Read) -> Result<Vec<LatencySample>> {
    let mut out = Vec::new();
    for record in csv::Reader::from_reader(reader).deserialize() {
        out.push(record?);
    }
    Ok(out)
}

pub fn write_samples_csv(samples: &[LatencySample], writer: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for sample in samples {
        w.serialize(sample)?;
    }
    w.flush()?;
    Ok(())
}

/// Fits a linear cost model by least squares.
///
/// Columns are scaled to unit norm before solving, absorbing the
/// ten-orders-of-magnitude spread between MAdds features and the bias; a
/// ridge term of `1e-8 * trace / d` keeps structurally degenerate columns
/// (the pool-MAdds feature is identically zero) harmless, leaving the
/// estimator effectively OLS. Calibration statistics come from a
/// seeded-shuffle holdout split (on the training split when `holdout`
/// rounds to zero rows).
pub fn fit(
    samples: &[LatencySample],
    graphs: &impl GraphResolver,
    holdout: f64,
    seed: u64,
) -> Result<CostModel> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !(0.0..1.0).contains(&holdout) {
        return Err(Error::InvalidInput(format!(
            "holdout fraction must be in [0, 1), got {holdout}"
        )));
    }
    let hardware_id = samples[0].hardware_id.clone();
    for s in samples {
        if s.hardware_id != hardware_id {
            return Err(Error::MixedHardware {
                expected: hardware_id,
                got: s.hardware_id.clone(),
            });
        }
        if !(s.latency_ms > 0.0) {
            return Err(Error::NonPositiveLatency {
                hardware: s.hardware_id.clone(),
                value: s.latency_ms,
            });
        }
    }

    let features: Vec<FeatureVector> = samples
        .iter()
        .map(|s| extract_features(graphs.resolve(&s.arch_id)?))
        .collect::<Result<_>>()?;

    let n = samples.len();
    let n_test = (n as f64 * holdout).round() as usize;
    let n_train = n - n_test;
    if n_train < FEATURE_LEN {
        return Err(Error::Underdetermined {
            rows: n_train,
            features: FEATURE_LEN,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train_idx, test_idx) = order.split_at(n_train);

    // Column scaling to unit norm; zero columns stay zero and ridge drives
    // their weights to zero.
    let mut scale = [0.0f64; FEATURE_LEN];
    for &i in train_idx {
        for (j, v) in features[i].0.iter().enumerate() {
            scale[j] += v * v;
        }
    }
    for s in &mut scale {
        *s = if *s > 0.0 { s.sqrt() } else { 1.0 };
    }

    // Ridge-regularized least squares in augmented form: the solution of
    // min |Xw - y|^2 + ridge * |w|^2 is the plain least-squares solution of
    // [X; sqrt(ridge) I] w = [y; 0], solved by SVD. This avoids forming
    // X^T X, whose squared condition number would eat six digits here.
    let column_norm_sq: f64 = FEATURE_LEN as f64; // unit-norm columns
    let ridge = 1e-8 * column_norm_sq / FEATURE_LEN as f64;
    let sqrt_ridge = ridge.sqrt();
    let x = DMatrix::from_fn(n_train + FEATURE_LEN, FEATURE_LEN, |r, c| {
        if r < n_train {
            features[train_idx[r]].0[c] / scale[c]
        } else if r - n_train == c {
            sqrt_ridge
        } else {
            0.0
        }
    });
    let y = DVector::from_fn(n_train + FEATURE_LEN, |r, _| {
        if r < n_train {
            samples[train_idx[r]].latency_ms
        } else {
            0.0
        }
    });
    let solved = x
        .svd(true, true)
        .solve(&y, 0.0)
        .map_err(|e| Error::InvalidInput(format!("least-squares solve failed: {e}")))?;
    let weights: Vec<f64> = solved
        .iter()
        .zip(&scale)
        .map(|(w, s)| w / s)
        .collect();

    let model = CostModel {
        hardware_id,
        schema_version: SCHEMA_VERSION,
        weights,
        calibration: Calibration {
            pearson_r: 0.0,
            rmse: 0.0,
            n_train,
            n_test,
        },
    };
    let eval_idx = if test_idx.is_empty() { train_idx } else { test_idx };
    let truths: Vec<f64> = eval_idx.iter().map(|&i| samples[i].latency_ms).collect();
    let predictions: Vec<f64> = eval_idx
        .iter()
        .map(|&i| dot(&model.weights, &features[i]))
        .collect();
    let (pearson_r, _) = pearson(&truths, &predictions);
    let mut model = model;
    model.calibration.pearson_r = pearson_r;
    model.calibration.rmse = rmse(&truths, &predictions);
    Ok(model)
}

fn dot(weights: &[f64], features: &FeatureVector) -> f64 {
    weights
        .iter()
        .zip(features.0.iter())
        .map(|(w, f)| w * f)
        .sum()
}

/// Predicted latency in milliseconds, clamped to [`MIN_LATENCY_MS`].
pub fn predict(model: &CostModel, graph: &LayerGraph) -> Result<f64> {
    if model.weights.len() != FEATURE_LEN {
        return Err(Error::SchemaMismatch {
            model: model.weights.len(),
            schema: FEATURE_LEN,
        });
    }
    let features = extract_features(graph)?;
    Ok(dot(&model.weights, &features).max(MIN_LATENCY_MS))
}

/// The data behind a predicted-vs-true scatter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub hardware_id: String,
    /// (true latency, predicted latency) per sample.
    pub pairs: Vec<(f64, f64)>,
    pub pearson_r: f64,
    pub rmse: f64,
    /// Set when either side has zero variance, where correlation is
    /// undefined and reported as 0.
    pub degenerate: bool,
}

pub fn calibration_report(
    model: &CostModel,
    samples: &[LatencySample],
    graphs: &impl GraphResolver,
) -> Result<CalibrationReport> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    for s in samples {
        if s.hardware_id != model.hardware_id {
            return Err(Error::MixedHardware {
                expected: model.hardware_id.clone(),
                got: s.hardware_id.clone(),
            });
        }
    }
    let pairs: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| Ok((s.latency_ms, predict(model, graphs.resolve(&s.arch_id)?)?)))
        .collect::<Result<_>>()?;
    let truths: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let predictions: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let (pearson_r, degenerate) = pearson(&truths, &predictions);
    Ok(CalibrationReport {
        hardware_id: model.hardware_id.clone(),
        pearson_r,
        rmse: rmse(&truths, &predictions),
        pairs,
        degenerate,
    })
}

/// Pearson correlation; `(0.0, true)` when either side is constant.
fn pearson(a: &[f64], b: &[f64]) -> (f64, bool) {
    let n = a.len() as f64;
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - mean_a) * (y - mean_b);
        var_a += (x - mean_a).powi(2);
        var_b += (y - mean_b).powi(2);
    }
    if var_a <= 0.0 || var_b <= 0.0 {
        return (0.0, true);
    }
    (cov / (var_a.sqrt() * var_b.sqrt()), false)
}

fn rmse(truths: &[f64], predictions: &[f64]) -> f64 {
    let n = truths.len() as f64;
    (truths
        .iter()
        .zip(predictions)
        .map(|(t, p)| (t - p).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{compute_bound_weights, diverse_graphs, diverse_samples};
    use crate::graph::Layer;
    use std::collections::HashMap;

    fn stem_only() -> LayerGraph {
        LayerGraph::new(224, 1001, vec![Layer::conv(3, 2, 3, 32)])
    }

    #[test]
    fn stem_only_features() {
        let f = extract_features(&stem_only()).unwrap();
        // conv3x3 buckets populated, everything else zero except count/bias
        assert!(f.0[2] > 0.0 && f.0[3] > 0.0);
        for (i, v) in f.0.iter().enumerate() {
            if ![2, 3, 14, 15].contains(&i) {
                assert_eq!(*v, 0.0, "feature {} should be zero", FEATURE_NAMES[i]);
            }
        }
        assert_eq!(f.0[14], 1.0);
        assert_eq!(f.0[15], 1.0);
    }

    #[test]
    fn features_are_additive_over_concatenation() {
        let a = LayerGraph::new(
            32,
            1001,
            vec![Layer::conv(3, 2, 3, 16), Layer::dwconv(5, 1, 16)],
        );
        let b = LayerGraph::new(
            16,
            1001,
            vec![Layer::conv(1, 1, 16, 32), Layer::fully_connected(32, 10)],
        );
        let mut layers = a.layers.clone();
        layers.extend(&b.layers);
        let combined = LayerGraph::new(32, 1001, layers);
        let (fa, fb, fc) = (
            extract_features(&a).unwrap(),
            extract_features(&b).unwrap(),
            extract_features(&combined).unwrap(),
        );
        for i in 0..FEATURE_LEN - 1 {
            assert!(
                (fc.0[i] - fa.0[i] - fb.0[i]).abs() < 1e-9,
                "feature {} not additive",
                FEATURE_NAMES[i]
            );
        }
        assert_eq!(fc.0[FEATURE_LEN - 1], 1.0);
    }

    #[test]
    fn bucket_madds_sum_to_total_madds() {
        let g = crate::baseline::build_baseline("mobilenet_v1", 1.0).unwrap();
        let f = extract_features(&g).unwrap();
        let bucket_sum: f64 = (0..7).map(|b| f.0[2 * b]).sum();
        assert_eq!(bucket_sum, g.madds().unwrap() as f64);
    }

    #[test]
    fn kernel_outside_schema_is_rejected() {
        let g = LayerGraph::new(32, 1001, vec![Layer::conv(7, 2, 3, 16)]);
        assert!(matches!(
            extract_features(&g),
            Err(Error::FeatureSchema { layer: 0, .. })
        ));
    }

    #[test]
    fn noiseless_fit_recovers_generator_weights() {
        let truth = compute_bound_weights();
        let (samples, graphs) = diverse_samples("cpu", &truth, 400, 0.0, 11);
        let model = fit(&samples, &graphs, 0.1, 0).unwrap();
        let err: f64 = model
            .weights
            .iter()
            .zip(&truth)
            .map(|(w, t)| (w - t).powi(2))
            .sum::<f64>()
            .sqrt();
        let norm: f64 = truth.iter().map(|t| t * t).sum::<f64>().sqrt();
        assert!(err / norm <= 1e-6, "relative error {}", err / norm);
        assert!(model.calibration.pearson_r >= 0.999_999);
    }

    #[test]
    fn noiseless_fit_predicts_unseen_graphs_exactly() {
        let truth = compute_bound_weights();
        let (samples, graphs) = diverse_samples("cpu", &truth, 400, 0.0, 12);
        let model = fit(&samples, &graphs, 0.1, 0).unwrap();
        for g in diverse_graphs(50, 999) {
            let f = extract_features(&g).unwrap();
            let expected: f64 = truth
                .iter()
                .zip(f.as_slice())
                .map(|(w, x)| w * x)
                .sum();
            let got = predict(&model, &g).unwrap();
            assert!(
                (got - expected).abs() <= 1e-6 * expected.abs().max(1.0),
                "expected {expected}, got {got}"
            );
        }
    }

    #[test]
    fn noisy_fit_keeps_holdout_correlation() {
        let truth = compute_bound_weights();
        let (samples, graphs) = diverse_samples("cpu", &truth, 2000, 0.05, 13);
        let model = fit(&samples, &graphs, 0.1, 0).unwrap();
        assert!(
            model.calibration.pearson_r >= 0.95,
            "pearson {}",
            model.calibration.pearson_r
        );
        assert_eq!(model.calibration.n_train, 1800);
        assert_eq!(model.calibration.n_test, 200);
    }

    #[test]
    fn too_few_rows_is_underdetermined() {
        let truth = compute_bound_weights();
        let (samples, graphs) = diverse_samples("cpu", &truth, 3, 0.0, 14);
        assert!(matches!(
            fit(&samples, &graphs, 0.0, 0),
            Err(Error::Underdetermined { rows: 3, .. })
        ));
    }

    #[test]
    fn mixed_hardware_is_rejected() {
        let truth = compute_bound_weights();
        let (mut samples, graphs) = diverse_samples("cpu", &truth, 20, 0.0, 15);
        samples[10].hardware_id = "gpu".to_string();
        assert!(matches!(
            fit(&samples, &graphs, 0.0, 0),
            Err(Error::MixedHardware { .. })
        ));
    }

    #[test]
    fn bias_only_model_predicts_its_bias() {
        let mut weights = vec![0.0; FEATURE_LEN];
        weights[FEATURE_LEN - 1] = 4.5;
        let model = CostModel::from_weights("cpu", weights);
        for g in diverse_graphs(5, 1) {
            assert_eq!(predict(&model, &g).unwrap(), 4.5);
        }
    }

    #[test]
    fn predictions_clamp_at_the_floor() {
        let mut weights = vec![0.0; FEATURE_LEN];
        weights[FEATURE_LEN - 1] = -10.0;
        let model = CostModel::from_weights("cpu", weights);
        assert_eq!(predict(&model, &stem_only()).unwrap(), MIN_LATENCY_MS);
    }

    #[test]
    fn prediction_is_linear_in_parts() {
        let model = CostModel::from_weights("cpu", compute_bound_weights());
        let bias = model.weights[FEATURE_LEN - 1];
        let a = LayerGraph::new(32, 1001, vec![Layer::conv(3, 2, 3, 16)]);
        let b = LayerGraph::new(16, 1001, vec![Layer::conv(1, 1, 16, 32)]);
        let mut layers = a.layers.clone();
        layers.extend(&b.layers);
        let combined = LayerGraph::new(32, 1001, layers);
        let (pa, pb, pc) = (
            predict(&model, &a).unwrap(),
            predict(&model, &b).unwrap(),
            predict(&model, &combined).unwrap(),
        );
        // the bias feature is counted once per part, so one copy cancels
        assert!((pc - (pa + pb - bias)).abs() < 1e-9);
    }

    #[test]
    fn calibration_degenerates_on_constant_predictions() {
        let mut weights = vec![0.0; FEATURE_LEN];
        weights[FEATURE_LEN - 1] = 2.0;
        let model = CostModel::from_weights("cpu", weights);
        let (samples, graphs) = diverse_samples("cpu", &compute_bound_weights(), 50, 0.0, 16);
        let report = calibration_report(&model, &samples, &graphs).unwrap();
        assert!(report.degenerate);
        assert_eq!(report.pearson_r, 0.0);
        assert_eq!(report.pairs.len(), 50);
    }

    #[test]
    fn perfect_model_calibrates_perfectly() {
        let truth = compute_bound_weights();
        let model = CostModel::from_weights("cpu", truth.clone());
        let (samples, graphs) = diverse_samples("cpu", &truth, 50, 0.0, 17);
        let report = calibration_report(&model, &samples, &graphs).unwrap();
        assert!((report.pearson_r - 1.0).abs() < 1e-12);
        assert!(report.rmse < 1e-9);
    }

    #[test]
    fn calibration_rejects_foreign_samples() {
        let model = CostModel::from_weights("cpu", compute_bound_weights());
        let (samples, graphs) = diverse_samples("gpu", &compute_bound_weights(), 5, 0.0, 18);
        assert!(matches!(
            calibration_report(&model, &samples, &graphs),
            Err(Error::MixedHardware { .. })
        ));
        let empty: Vec<LatencySample> = Vec::new();
        assert!(matches!(
            calibration_report(&model, &empty, &graphs),
            Err(Error::EmptySamples)
        ));
    }

    #[test]
    fn pearson_is_invariant_under_affine_latency_rescaling() {
        let truth = compute_bound_weights();
        let (samples, graphs) = diverse_samples("cpu", &truth, 600, 0.05, 19);
        let base = fit(&samples, &graphs, 0.1, 0).unwrap();
        let rescaled: Vec<LatencySample> = samples
            .iter()
            .map(|s| LatencySample {
                arch_id: s.arch_id.clone(),
                hardware_id: s.hardware_id.clone(),
                latency_ms: 3.0 * s.latency_ms + 0.5,
            })
            .collect();
        let refit = fit(&rescaled, &graphs, 0.1, 0).unwrap();
        assert!(
            (base.calibration.pearson_r - refit.calibration.pearson_r).abs() < 1e-9,
            "{} vs {}",
            base.calibration.pearson_r,
            refit.calibration.pearson_r
        );
    }

    #[test]
    fn samples_csv_round_trip() {
        let samples = vec![
            LatencySample {
                arch_id: "a1".into(),
                hardware_id: "dsp".into(),
                latency_ms: 3.72,
            },
            LatencySample {
                arch_id: "a2".into(),
                hardware_id: "dsp".into(),
                latency_ms: 4.97,
            },
        ];
        let mut buffer = Vec::new();
        write_samples_csv(&samples, &mut buffer).unwrap();
        let text = String::from_utf8(buffer.clone()).unwrap();
        assert!(text.starts_with("arch_id,hardware_id,latency_ms\n"));
        assert_eq!(read_samples_csv(&buffer[..]).unwrap(), samples);
    }

    #[test]
    fn cost_model_json_field_names() {
        let model = CostModel::from_weights("dsp", compute_bound_weights());
        let json = model.to_json().unwrap();
        for key in ["hardware_id", "schema_version", "weights", "calibration", "pearson_r", "rmse", "n_train", "n_test"] {
            assert!(json.contains(&format!("\"{key}\"")), "missing {key}");
        }
        assert_eq!(CostModel::from_json(&json).unwrap(), model);
        let short = r#"{"hardware_id":"x","schema_version":1,"weights":[1.0],"calibration":{"pearson_r":0,"rmse":0,"n_train":0,"n_test":0}}"#;
        assert!(matches!(
            CostModel::from_json(short),
            Err(Error::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn resolver_miss_is_an_error() {
        let graphs: HashMap<String, LayerGraph> = HashMap::new();
        let samples = vec![LatencySample {
            arch_id: "missing".into(),
            hardware_id: "cpu".into(),
            latency_ms: 1.0,
        }];
        assert!(fit(&samples, &graphs, 0.0, 0).is_err());
    }
}
