//! Normalized multi-hardware latency metrics and reward functions.
//!
//! Raw latencies on different hardware live on different scales, so each one
//! is divided by a per-hardware normalization factor (the latency of a
//! reference model on that hardware). The normalized average is the mean of
//! those ratios, the normalized max their worst case; both equal 1 exactly
//! when a model matches the reference everywhere. Rewards combine an
//! accuracy term with a beta-weighted penalty for missing the latency
//! target.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LayerGraph;
use crate::latency::{predict, CostModel};

/// Per-hardware normalization factors, in milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormFactors {
    /// Where the factors came from, e.g. `mobilenet_v1@1.0` or `explicit`.
    pub reference: String,
    pub factors: BTreeMap<String, f64>,
}

impl NormFactors {
    pub fn explicit(factors: BTreeMap<String, f64>) -> Result<NormFactors> {
        let nf = NormFactors {
            reference: "explicit".to_string(),
            factors,
        };
        nf.validate()?;
        Ok(nf)
    }

    /// Predicts the reference model's latency on every hardware.
    pub fn from_reference(
        reference: &LayerGraph,
        models: &[CostModel],
        description: &str,
    ) -> Result<NormFactors> {
        let mut factors = BTreeMap::new();
        for model in models {
            let latency = predict(model, reference)?;
            if factors.insert(model.hardware_id.clone(), latency).is_some() {
                return Err(Error::InvalidInput(format!(
                    "duplicate cost model for hardware `{}`",
                    model.hardware_id
                )));
            }
        }
        let nf = NormFactors {
            reference: description.to_string(),
            factors,
        };
        nf.validate()?;
        Ok(nf)
    }

    pub fn validate(&self) -> Result<()> {
        if self.factors.is_empty() {
            return Err(Error::InvalidInput("empty normalization factors".into()));
        }
        for (hw, &c) in &self.factors {
            if !(c > 0.0) {
                return Err(Error::NonPositiveLatency {
                    hardware: hw.clone(),
                    value: c,
                });
            }
        }
        Ok(())
    }

    /// Folds optional importance weights into the factors (dividing a factor
    /// re-weights that hardware's ratio).
    pub fn reweighted(&self, weights: &BTreeMap<String, f64>) -> Result<NormFactors> {
        let mut factors = self.factors.clone();
        for (hw, &w) in weights {
            if !(w > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "weight for `{hw}` must be positive"
                )));
            }
            match factors.get_mut(hw) {
                Some(c) => *c /= w,
                None => {
                    return Err(Error::HardwareMismatch(format!(
                        "weight for unknown hardware `{hw}`"
                    )))
                }
            }
        }
        Ok(NormFactors {
            reference: format!("{} (reweighted)", self.reference),
            factors,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<NormFactors> {
        let nf: NormFactors = serde_json::from_str(json)?;
        nf.validate()?;
        Ok(nf)
    }

    pub fn read_file(path: impl AsRef<std::path::Path>) -> Result<NormFactors> {
        NormFactors::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write_file(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// A model's latency on each hardware, in milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyVector {
    pub entries: BTreeMap<String, f64>,
}

impl LatencyVector {
    pub fn new(entries: BTreeMap<String, f64>) -> LatencyVector {
        LatencyVector { entries }
    }

    fn checked_ratios(&self, norm: &NormFactors) -> Result<Vec<f64>> {
        if self.entries.len() != norm.factors.len()
            || !self.entries.keys().eq(norm.factors.keys())
        {
            return Err(Error::HardwareMismatch(format!(
                "latency hardware {:?} vs normalization hardware {:?}",
                self.entries.keys().collect::<Vec<_>>(),
                norm.factors.keys().collect::<Vec<_>>()
            )));
        }
        self.entries
            .iter()
            .map(|(hw, &l)| {
                if !(l > 0.0) {
                    return Err(Error::NonPositiveLatency {
                        hardware: hw.clone(),
                        value: l,
                    });
                }
                let c = norm.factors[hw];
                if !(c > 0.0) {
                    return Err(Error::NonPositiveLatency {
                        hardware: hw.clone(),
                        value: c,
                    });
                }
                Ok(l / c)
            })
            .collect()
    }

    /// Restricts to a hardware subset.
    pub fn restricted(&self, hardware: &[String]) -> Result<LatencyVector> {
        let mut entries = BTreeMap::new();
        for hw in hardware {
            match self.entries.get(hw) {
                Some(&l) => {
                    entries.insert(hw.clone(), l);
                }
                None => {
                    return Err(Error::HardwareMismatch(format!(
                        "no latency entry for `{hw}`"
                    )))
                }
            }
        }
        Ok(LatencyVector { entries })
    }
}

impl NormFactors {
    /// Restricts to a hardware subset.
    pub fn restricted(&self, hardware: &[String]) -> Result<NormFactors> {
        let mut factors = BTreeMap::new();
        for hw in hardware {
            match self.factors.get(hw) {
                Some(&c) => {
                    factors.insert(hw.clone(), c);
                }
                None => {
                    return Err(Error::HardwareMismatch(format!(
                        "no normalization factor for `{hw}`"
                    )))
                }
            }
        }
        Ok(NormFactors {
            reference: self.reference.clone(),
            factors,
        })
    }
}

/// Normalized average latency: mean over hardware of `L_i / C_i`.
pub fn f_avg(latencies: &LatencyVector, norm: &NormFactors) -> Result<f64> {
    let ratios = latencies.checked_ratios(norm)?;
    Ok(ratios.iter().sum::<f64>() / ratios.len() as f64)
}

/// Normalized max latency: worst ratio `L_i / C_i` over hardware.
pub fn f_max(latencies: &LatencyVector, norm: &NormFactors) -> Result<f64> {
    let ratios = latencies.checked_ratios(norm)?;
    Ok(ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    Single,
    Avg,
    Max,
}

/// How candidate rewards are computed during search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardSpec {
    pub mode: RewardMode,
    /// Latency penalty strength; must be negative.
    pub beta: f64,
    /// Latency target in ms (single mode only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    /// Hardware subset; `None` means every hardware in the normalization set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hardware: Option<Vec<String>>,
}

/// Default latency penalty strength.
pub const DEFAULT_BETA: f64 = -0.07;

impl RewardSpec {
    pub fn single(hardware: &str, target: f64, beta: f64) -> RewardSpec {
        RewardSpec {
            mode: RewardMode::Single,
            beta,
            target: Some(target),
            hardware: Some(vec![hardware.to_string()]),
        }
    }

    pub fn avg(beta: f64) -> RewardSpec {
        RewardSpec {
            mode: RewardMode::Avg,
            beta,
            target: None,
            hardware: None,
        }
    }

    pub fn max(beta: f64) -> RewardSpec {
        RewardSpec {
            mode: RewardMode::Max,
            beta,
            target: None,
            hardware: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta < 0.0) {
            return Err(Error::InvalidReward(format!(
                "beta must be negative, got {}",
                self.beta
            )));
        }
        if self.mode == RewardMode::Single {
            match self.target {
                Some(t) if t > 0.0 => {}
                _ => {
                    return Err(Error::InvalidReward(
                        "single mode requires a positive latency target".into(),
                    ))
                }
            }
            match &self.hardware {
                Some(hw) if hw.len() == 1 => {}
                _ => {
                    return Err(Error::InvalidReward(
                        "single mode requires exactly one hardware id".into(),
                    ))
                }
            }
        }
        Ok(())
    }

    /// The single target hardware (single mode).
    pub fn single_hardware(&self) -> Result<&str> {
        self.hardware
            .as_deref()
            .and_then(|h| h.first())
            .map(|s| s.as_str())
            .ok_or_else(|| Error::InvalidReward("missing hardware for single mode".into()))
    }
}

/// Single-hardware reward: `A + beta * |L / L0 - 1|`.
pub fn reward_single(accuracy: f64, latency_ms: f64, spec: &RewardSpec) -> Result<f64> {
    if spec.mode != RewardMode::Single {
        return Err(Error::RewardMode {
            expected: "single",
            got: format!("{:?}", spec.mode),
        });
    }
    spec.validate()?;
    let target = spec.target.expect("validated");
    if !(latency_ms > 0.0) {
        return Err(Error::NonPositiveLatency {
            hardware: spec.single_hardware().unwrap_or("?").to_string(),
            value: latency_ms,
        });
    }
    Ok(accuracy + spec.beta * (latency_ms / target - 1.0).abs())
}

/// Multi-hardware reward: `A + beta * |f - 1|` with `f` the normalized
/// average or max over the spec's hardware subset.
pub fn reward_multi(
    accuracy: f64,
    latencies: &LatencyVector,
    norm: &NormFactors,
    spec: &RewardSpec,
) -> Result<f64> {
    let f = f_value(latencies, norm, spec)?;
    Ok(accuracy + spec.beta * (f - 1.0).abs())
}

/// The latency figure a reward penalizes: `L / L0` in single mode, the
/// normalized average or max otherwise.
pub fn f_value(latencies: &LatencyVector, norm: &NormFactors, spec: &RewardSpec) -> Result<f64> {
    spec.validate()?;
    match spec.mode {
        RewardMode::Single => {
            let hw = spec.single_hardware()?;
            let l = latencies.entries.get(hw).copied().ok_or_else(|| {
                Error::HardwareMismatch(format!("no latency entry for `{hw}`"))
            })?;
            if !(l > 0.0) {
                return Err(Error::NonPositiveLatency {
                    hardware: hw.to_string(),
                    value: l,
                });
            }
            Ok(l / spec.target.expect("validated"))
        }
        RewardMode::Avg | RewardMode::Max => {
            let (l, c) = match &spec.hardware {
                Some(subset) => (latencies.restricted(subset)?, norm.restricted(subset)?),
                None => (latencies.clone(), norm.clone()),
            };
            if spec.mode == RewardMode::Avg {
                f_avg(&l, &c)
            } else {
                f_max(&l, &c)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Avg,
    Max,
}

/// Outcome of comparing two models on one normalized metric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelOrdering {
    Equal,
    FirstBetter,
    SecondBetter,
    /// Accuracies differ beyond tolerance; the metric alone cannot rank.
    Incomparable,
}

/// Default accuracy tolerance for [`compare`].
pub const ACCURACY_TOLERANCE: f64 = 1e-4;

/// Ranks two (accuracy, latency vector) models on a normalized metric.
///
/// With `accuracy_tolerance = None` the accuracy gate is disabled and models
/// are ranked on the metric alone.
pub fn compare(
    first: (f64, &LatencyVector),
    second: (f64, &LatencyVector),
    norm: &NormFactors,
    metric: MetricKind,
    accuracy_tolerance: Option<f64>,
) -> Result<ModelOrdering> {
    if let Some(tol) = accuracy_tolerance {
        if (first.0 - second.0).abs() > tol {
            return Ok(ModelOrdering::Incomparable);
        }
    }
    let f = match metric {
        MetricKind::Avg => f_avg,
        MetricKind::Max => f_max,
    };
    let fa = f(first.1, norm)?;
    let fb = f(second.1, norm)?;
    Ok(if fa == fb {
        ModelOrdering::Equal
    } else if fa < fb {
        ModelOrdering::FirstBetter
    } else {
        ModelOrdering::SecondBetter
    })
}
