//! Layer-level model IR and analytical MAdds / parameter counting.
//!
//! A [`LayerGraph`] is a flat, ordered list of layers with square spatial
//! dimensions. Spatial resolution is derived, not stored: it starts at
//! `input_resolution` and each layer's output resolution is
//! `ceil(in / stride)` (SAME padding). Counting conventions: one MAdd is one
//! multiply-accumulate; batch-norm, bias (except the fully-connected bias
//! parameter) and activations are excluded.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The operation a layer performs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    Conv2d,
    DepthwiseConv2d,
    GlobalAvgPool,
    FullyConnected,
    ResidualAdd,
}

impl LayerKind {
    /// Serialized name, as used in graph JSON and profile `forbidden_ops`.
    pub fn name(&self) -> &'static str {
        match self {
            LayerKind::Conv2d => "conv2d",
            LayerKind::DepthwiseConv2d => "depthwise_conv2d",
            LayerKind::GlobalAvgPool => "global_avg_pool",
            LayerKind::FullyConnected => "fully_connected",
            LayerKind::ResidualAdd => "residual_add",
        }
    }

    fn is_conv(&self) -> bool {
        matches!(self, LayerKind::Conv2d | LayerKind::DepthwiseConv2d)
    }
}

fn default_stride() -> u32 {
    1
}

/// One layer of a [`LayerGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layer {
    pub kind: LayerKind,
    /// Kernel side length; present for convolutional kinds only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<u32>,
    #[serde(default = "default_stride")]
    pub stride: u32,
    pub in_ch: u32,
    pub out_ch: u32,
}

impl Layer {
    pub fn conv(kernel: u32, stride: u32, in_ch: u32, out_ch: u32) -> Layer {
        Layer {
            kind: LayerKind::Conv2d,
            kernel: Some(kernel),
            stride,
            in_ch,
            out_ch,
        }
    }

    pub fn dwconv(kernel: u32, stride: u32, channels: u32) -> Layer {
        Layer {
            kind: LayerKind::DepthwiseConv2d,
            kernel: Some(kernel),
            stride,
            in_ch: channels,
            out_ch: channels,
        }
    }

    pub fn global_pool(channels: u32) -> Layer {
        Layer {
            kind: LayerKind::GlobalAvgPool,
            kernel: None,
            stride: 1,
            in_ch: channels,
            out_ch: channels,
        }
    }

    pub fn fully_connected(in_ch: u32, out_ch: u32) -> Layer {
        Layer {
            kind: LayerKind::FullyConnected,
            kernel: None,
            stride: 1,
            in_ch,
            out_ch,
        }
    }

    pub fn residual(channels: u32) -> Layer {
        Layer {
            kind: LayerKind::ResidualAdd,
            kernel: None,
            stride: 1,
            in_ch: channels,
            out_ch: channels,
        }
    }
}

/// Analytical cost summary of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelStats {
    pub madds: u64,
    pub params: u64,
}

/// An ordered stack of layers on a square input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerGraph {
    pub input_resolution: u32,
    pub num_classes: u32,
    pub layers: Vec<Layer>,
}

impl LayerGraph {
    pub fn new(input_resolution: u32, num_classes: u32, layers: Vec<Layer>) -> LayerGraph {
        LayerGraph {
            input_resolution,
            num_classes,
            layers,
        }
    }

    /// Checks the structural invariants; errors carry the offending layer index.
    pub fn validate(&self) -> Result<()> {
        if self.input_resolution == 0 {
            return Err(Error::Graph {
                layer: 0,
                reason: "input resolution must be positive".into(),
            });
        }
        if self.num_classes == 0 {
            return Err(Error::Graph {
                layer: 0,
                reason: "num_classes must be positive".into(),
            });
        }
        for (i, layer) in self.layers.iter().enumerate() {
            if layer.in_ch == 0 || layer.out_ch == 0 {
                return Err(Error::Graph {
                    layer: i,
                    reason: "channel counts must be positive".into(),
                });
            }
            if layer.kind.is_conv() {
                match layer.kernel {
                    // 1x1 depthwise is representable but meaningless; reject.
                    Some(k) if k >= 1 && k % 2 == 1 => {
                        if layer.kind == LayerKind::DepthwiseConv2d && k == 1 {
                            return Err(Error::Graph {
                                layer: i,
                                reason: "depthwise kernel must be at least 3".into(),
                            });
                        }
                    }
                    Some(k) => {
                        return Err(Error::Graph {
                            layer: i,
                            reason: format!("kernel must be odd and positive, got {k}"),
                        });
                    }
                    None => {
                        return Err(Error::Graph {
                            layer: i,
                            reason: "convolutional layer requires a kernel".into(),
                        });
                    }
                }
                if layer.stride != 1 && layer.stride != 2 {
                    return Err(Error::Graph {
                        layer: i,
                        reason: format!("stride must be 1 or 2, got {}", layer.stride),
                    });
                }
            } else if layer.stride != 1 {
                return Err(Error::Graph {
                    layer: i,
                    reason: "non-convolutional layers must have stride 1".into(),
                });
            }
            if layer.kind == LayerKind::DepthwiseConv2d && layer.in_ch != layer.out_ch {
                return Err(Error::Graph {
                    layer: i,
                    reason: "depthwise conv must preserve channel count".into(),
                });
            }
            if matches!(layer.kind, LayerKind::GlobalAvgPool | LayerKind::ResidualAdd)
                && layer.in_ch != layer.out_ch
            {
                return Err(Error::Graph {
                    layer: i,
                    reason: format!("{} must preserve channel count", layer.kind.name()),
                });
            }
            if i + 1 < self.layers.len() && layer.out_ch != self.layers[i + 1].in_ch {
                return Err(Error::Graph {
                    layer: i + 1,
                    reason: format!(
                        "channel mismatch: layer {i} outputs {}, layer {} expects {}",
                        layer.out_ch,
                        i + 1,
                        self.layers[i + 1].in_ch
                    ),
                });
            }
        }
        Ok(())
    }

    /// Input spatial resolution of each layer, in order.
    pub fn resolutions(&self) -> Vec<u32> {
        let mut res = self.input_resolution;
        self.layers
            .iter()
            .map(|layer| {
                let r = res;
                res = match layer.kind {
                    LayerKind::Conv2d | LayerKind::DepthwiseConv2d => {
                        res.div_ceil(layer.stride.max(1))
                    }
                    LayerKind::GlobalAvgPool => 1,
                    LayerKind::FullyConnected | LayerKind::ResidualAdd => res,
                };
                r
            })
            .collect()
    }

    /// MAdds of each layer, in order. The graph must be valid.
    pub fn layer_madds(&self) -> Result<Vec<u64>> {
        self.validate()?;
        Ok(self
            .layers
            .iter()
            .zip(self.resolutions())
            .map(|(layer, in_res)| layer_madds(layer, in_res))
            .collect())
    }

    /// Total multiply-accumulate count.
    pub fn madds(&self) -> Result<u64> {
        Ok(self.layer_madds()?.iter().sum())
    }

    /// Total trainable parameter count.
    pub fn params(&self) -> Result<u64> {
        self.validate()?;
        Ok(self.layers.iter().map(layer_params).sum())
    }

    pub fn stats(&self) -> Result<ModelStats> {
        Ok(ModelStats {
            madds: self.madds()?,
            params: self.params()?,
        })
    }

    /// Scales every channel count by `wm`, rounding to the nearest multiple
    /// of 8 (ties up, floor 8). The first layer's input channels and the
    /// classifier output are left untouched. `wm = 1` is the identity.
    pub fn apply_width_multiplier(&self, wm: f64) -> Result<LayerGraph> {
        if !(wm > 0.0) || !wm.is_finite() {
            return Err(Error::InvalidWidthMultiplier(wm));
        }
        if wm == 1.0 {
            return Ok(self.clone());
        }
        let last = self.layers.len().saturating_sub(1);
        let layers = self
            .layers
            .iter()
            .enumerate()
            .map(|(i, layer)| {
                let mut scaled = *layer;
                if i > 0 {
                    scaled.in_ch = scale_channels(layer.in_ch, wm);
                }
                if i < last || layer.out_ch != self.num_classes {
                    scaled.out_ch = scale_channels(layer.out_ch, wm);
                }
                scaled
            })
            .collect();
        Ok(LayerGraph::new(self.input_resolution, self.num_classes, layers))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<LayerGraph> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn write_file(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read_file(path: impl AsRef<std::path::Path>) -> Result<LayerGraph> {
        LayerGraph::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Rounds `channels * wm` to the nearest multiple of 8, ties up, minimum 8.
pub fn scale_channels(channels: u32, wm: f64) -> u32 {
    round_to_multiple(channels as f64 * wm, 8)
}

/// Nearest multiple of `m` (ties round up), with floor `m`.
pub fn round_to_multiple(value: f64, m: u32) -> u32 {
    let rounded = (value / m as f64 + 0.5).floor() as i64 * m as i64;
    rounded.max(m as i64) as u32
}

pub(crate) fn layer_madds(layer: &Layer, in_res: u32) -> u64 {
    let out_res = match layer.kind {
        LayerKind::Conv2d | LayerKind::DepthwiseConv2d => in_res.div_ceil(layer.stride.max(1)),
        _ => in_res,
    } as u64;
    let k = layer.kernel.unwrap_or(1) as u64;
    let (cin, cout) = (layer.in_ch as u64, layer.out_ch as u64);
    match layer.kind {
        LayerKind::Conv2d => out_res * out_res * k * k * cin * cout,
        LayerKind::DepthwiseConv2d => out_res * out_res * k * k * cin,
        LayerKind::FullyConnected => cin * cout,
        LayerKind::GlobalAvgPool | LayerKind::ResidualAdd => 0,
    }
}

fn layer_params(layer: &Layer) -> u64 {
    let k = layer.kernel.unwrap_or(1) as u64;
    let (cin, cout) = (layer.in_ch as u64, layer.out_ch as u64);
    match layer.kind {
        LayerKind::Conv2d => k * k * cin * cout,
        LayerKind::DepthwiseConv2d => k * k * cin,
        LayerKind::FullyConnected => cin * cout + cout,
        LayerKind::GlobalAvgPool | LayerKind::ResidualAdd => 0,
    }
}
