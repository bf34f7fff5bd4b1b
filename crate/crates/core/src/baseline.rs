//! Reference model builders used for normalization factors and as counting
//! fixtures.
//!
//! Channel counts are scaled by the width multiplier at build time and
//! rounded to the nearest multiple of 8 (ties up, floor 8). Expansion widths
//! in the v2 bottlenecks are derived from the already-scaled block input, the
//! convention the published models follow.

use crate::error::{Error, Result};
use crate::graph::{scale_channels, Layer, LayerGraph};

const INPUT_RESOLUTION: u32 = 224;
const NUM_CLASSES: u32 = 1001;

/// Builds a published baseline stack at the given width multiplier.
///
/// Known names: `mobilenet_v1`, `mobilenet_v2`.
pub fn build_baseline(name: &str, wm: f64) -> Result<LayerGraph> {
    if !(wm > 0.0) || !wm.is_finite() {
        return Err(Error::InvalidWidthMultiplier(wm));
    }
    match name {
        "mobilenet_v1" => Ok(mobilenet_v1(wm)),
        "mobilenet_v2" => Ok(mobilenet_v2(wm)),
        other => Err(Error::UnknownBaseline(other.to_string())),
    }
}

/// Parses `name@wm` (e.g. `mobilenet_v1@1.0`) into a baseline graph.
pub fn parse_baseline_ref(reference: &str) -> Result<LayerGraph> {
    let (name, wm) = reference
        .split_once('@')
        .ok_or_else(|| Error::InvalidInput(format!("expected `name@wm`, got `{reference}`")))?;
    let wm: f64 = wm
        .parse()
        .map_err(|_| Error::InvalidInput(format!("bad width multiplier in `{reference}`")))?;
    build_baseline(name, wm)
}

fn mobilenet_v1(wm: f64) -> LayerGraph {
    // (stride of the depthwise conv, output channels of the pointwise conv)
    const BLOCKS: [(u32, u32); 13] = [
        (1, 64),
        (2, 128),
        (1, 128),
        (2, 256),
        (1, 256),
        (2, 512),
        (1, 512),
        (1, 512),
        (1, 512),
        (1, 512),
        (1, 512),
        (2, 1024),
        (1, 1024),
    ];
    let d = |c: u32| scale_channels(c, wm);

    let mut layers = vec![Layer::conv(3, 2, 3, d(32))];
    let mut in_ch = d(32);
    for (stride, out) in BLOCKS {
        let out_ch = d(out);
        layers.push(Layer::dwconv(3, stride, in_ch));
        layers.push(Layer::conv(1, 1, in_ch, out_ch));
        in_ch = out_ch;
    }
    layers.push(Layer::global_pool(in_ch));
    layers.push(Layer::fully_connected(in_ch, NUM_CLASSES));
    LayerGraph::new(INPUT_RESOLUTION, NUM_CLASSES, layers)
}

fn mobilenet_v2(wm: f64) -> LayerGraph {
    // (expansion, output channels, repeats, first stride)
    const BOTTLENECKS: [(u32, u32, u32, u32); 7] = [
        (1, 16, 1, 1),
        (6, 24, 2, 2),
        (6, 32, 3, 2),
        (6, 64, 4, 2),
        (6, 96, 3, 1),
        (6, 160, 3, 2),
        (6, 320, 1, 1),
    ];
    let d = |c: u32| scale_channels(c, wm);

    let mut layers = vec![Layer::conv(3, 2, 3, d(32))];
    let mut in_ch = d(32);
    for (expansion, out, repeats, first_stride) in BOTTLENECKS {
        let out_ch = d(out);
        for i in 0..repeats {
            let stride = if i == 0 { first_stride } else { 1 };
            let hidden = in_ch * expansion;
            if expansion > 1 {
                layers.push(Layer::conv(1, 1, in_ch, hidden));
            }
            layers.push(Layer::dwconv(3, stride, hidden));
            layers.push(Layer::conv(1, 1, hidden, out_ch));
            if stride == 1 && in_ch == out_ch {
                layers.push(Layer::residual(out_ch));
            }
            in_ch = out_ch;
        }
    }
    // The published head keeps 1280 filters unless the multiplier exceeds 1.
    let head = if wm > 1.0 { d(1280) } else { 1280 };
    layers.push(Layer::conv(1, 1, in_ch, head));
    layers.push(Layer::global_pool(head));
    layers.push(Layer::fully_connected(head, NUM_CLASSES));
    LayerGraph::new(INPUT_RESOLUTION, NUM_CLASSES, layers)
}
