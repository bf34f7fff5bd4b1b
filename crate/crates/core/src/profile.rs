//! Hardware profiles and search-space membership checks.
//!
//! A profile captures what a hardware target can execute without falling
//! back: the largest kernel it supports, a filter-count granularity it
//! prefers, and operator kinds it cannot run. Validating a graph against a
//! profile set answers whether the model sits inside the intersection of
//! supported architectures. Violations are data, not errors.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{LayerGraph, LayerKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardwareProfile {
    pub id: String,
    /// Largest supported convolution kernel side.
    pub max_kernel: u32,
    /// Filter counts of convolutional layers must divide by this; 0 disables
    /// the check.
    pub requires_filter_multiple: u32,
    /// Layer kinds (serialized names) the hardware cannot run.
    #[serde(default)]
    pub forbidden_ops: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_model_ref: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    KernelTooLarge,
    FilterMultiple,
    ForbiddenOp,
}

/// One broken constraint: which profile, which rule, which layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub profile: String,
    pub constraint: Constraint,
    pub layer: usize,
    pub detail: String,
}

/// Outcome of a membership check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

/// Checks a compiled graph against every profile.
///
/// The filter-multiple rule applies to the output filters of convolutional
/// layers only; pooling, residual wiring and the fully-connected head carry
/// no searched filters.
pub fn validate(graph: &LayerGraph, profiles: &[HardwareProfile]) -> Result<Verdict> {
    graph.validate()?;
    let mut violations = Vec::new();
    for profile in profiles {
        for (i, layer) in graph.layers.iter().enumerate() {
            let is_conv = matches!(
                layer.kind,
                LayerKind::Conv2d | LayerKind::DepthwiseConv2d
            );
            if is_conv {
                if let Some(k) = layer.kernel {
                    if k > profile.max_kernel {
                        violations.push(Violation {
                            profile: profile.id.clone(),
                            constraint: Constraint::KernelTooLarge,
                            layer: i,
                            detail: format!(
                                "kernel {k} exceeds max {}",
                                profile.max_kernel
                            ),
                        });
                    }
                }
                let m = profile.requires_filter_multiple;
                if m > 0 && layer.out_ch % m != 0 {
                    violations.push(Violation {
                        profile: profile.id.clone(),
                        constraint: Constraint::FilterMultiple,
                        layer: i,
                        detail: format!("{} filters not a multiple of {m}", layer.out_ch),
                    });
                }
            }
            if profile
                .forbidden_ops
                .iter()
                .any(|op| op == layer.kind.name())
            {
                violations.push(Violation {
                    profile: profile.id.clone(),
                    constraint: Constraint::ForbiddenOp,
                    layer: i,
                    detail: format!("op `{}` unsupported", layer.kind.name()),
                });
            }
        }
    }
    Ok(Verdict {
        ok: violations.is_empty(),
        violations,
    })
}

/// The five mobile targets the default space is built for. Accelerator
/// constraints: kernels above 5x5 are not broadly supported on the DSP and
/// EdgeTPU, the DSP prefers filter counts in multiples of 32, and the
/// EdgeTPU lacks squeeze-excite and h-swish (kinds this IR cannot express,
/// kept as profile data).
pub fn default_profiles() -> Vec<HardwareProfile> {
    let profile = |id: &str, max_kernel: u32, multiple: u32, forbidden: &[&str]| HardwareProfile {
        id: id.to_string(),
        max_kernel,
        requires_filter_multiple: multiple,
        forbidden_ops: forbidden.iter().map(|s| s.to_string()).collect(),
        cost_model_ref: None,
    };
    vec![
        profile("cpu_float", 7, 0, &[]),
        profile("cpu_uint8", 7, 0, &[]),
        profile("gpu", 7, 0, &[]),
        profile("dsp", 5, 32, &[]),
        profile("edgetpu", 5, 0, &["squeeze_excite", "h_swish"]),
    ]
}

pub fn read_profiles(path: impl AsRef<std::path::Path>) -> Result<Vec<HardwareProfile>> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

pub fn write_profiles(
    profiles: &[HardwareProfile],
    path: impl AsRef<std::path::Path>,
) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(profiles)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Layer;

    fn dsp() -> HardwareProfile {
        default_profiles().into_iter().find(|p| p.id == "dsp").unwrap()
    }

    #[test]
    fn oversized_kernel_is_reported() {
        let g = LayerGraph::new(
            32,
            1001,
            vec![Layer::conv(3, 2, 3, 32), Layer::conv(7, 1, 32, 32)],
        );
        let verdict = validate(&g, &[dsp()]).unwrap();
        assert!(!verdict.ok);
        let v = &verdict.violations[0];
        assert_eq!(v.constraint, Constraint::KernelTooLarge);
        assert_eq!(v.layer, 1);
        assert_eq!(v.profile, "dsp");
    }

    #[test]
    fn off_multiple_filters_are_reported() {
        let g = LayerGraph::new(
            32,
            1001,
            vec![Layer::conv(3, 2, 3, 32), Layer::conv(1, 1, 32, 48)],
        );
        let verdict = validate(&g, &[dsp()]).unwrap();
        assert!(verdict
            .violations
            .iter()
            .any(|v| v.constraint == Constraint::FilterMultiple && v.layer == 1));
    }

    #[test]
    fn head_and_classifier_are_exempt_from_filter_multiple() {
        let g = LayerGraph::new(
            32,
            1001,
            vec![
                Layer::conv(3, 2, 3, 32),
                Layer::global_pool(32),
                Layer::fully_connected(32, 1001),
            ],
        );
        assert!(validate(&g, &[dsp()]).unwrap().ok);
    }

    #[test]
    fn forbidden_op_is_reported() {
        let mut profile = dsp();
        profile.forbidden_ops = vec!["depthwise_conv2d".to_string()];
        let g = LayerGraph::new(
            32,
            1001,
            vec![Layer::conv(3, 2, 3, 32), Layer::dwconv(3, 1, 32)],
        );
        let verdict = validate(&g, &[profile]).unwrap();
        assert!(verdict
            .violations
            .iter()
            .any(|v| v.constraint == Constraint::ForbiddenOp && v.layer == 1));
    }

    #[test]
    fn profiles_round_trip_through_json() {
        let profiles = default_profiles();
        let json = serde_json::to_string(&profiles).unwrap();
        let parsed: Vec<HardwareProfile> = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, profiles);
    }
}
