//! Deterministic fixtures: small enumerable spaces, synthetic cost models,
//! and sample generators. Shared by unit tests, the acceptance suite, and
//! the bench targets.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::genome::sample;
use crate::graph::LayerGraph;
use crate::latency::{extract_features, CostModel, LatencySample, FEATURE_LEN};
use crate::profile::default_profiles;
use crate::space::{
    BlockType, DecisionSpec, SearchSpace, Skeleton, StageDecisions, StageSkeleton,
};

// Fixture graphs stay in the regime the synthetic oracle and the cost
// weights were shaped for: tens to hundreds of millions of MAdds, so both
// the accuracy curve and the latency penalty vary substantially across each
// space.
fn small_skeleton(stages: Vec<StageSkeleton>) -> Skeleton {
    Skeleton {
        input_resolution: 128,
        num_classes: 1001,
        stem_filters: 32,
        stages,
        head_filters: 480,
        head_embed: 640,
    }
}

/// Tiny space: one stage, 256 genomes.
pub fn tiny_space() -> SearchSpace {
    SearchSpace {
        space_id: "fixture-tiny".to_string(),
        skeleton: small_skeleton(vec![StageSkeleton {
            base_filters: 96,
            stride: 2,
        }]),
        decisions: DecisionSpec {
            stages: vec![StageDecisions {
                repeats: vec![1, 2],
                filter_ratios: vec![0.5, 1.0],
                block_types: vec![
                    BlockType::InvertedBottleneck,
                    BlockType::FusedInvertedBottleneck,
                ],
                kernels: vec![3, 5],
                expansions: vec![1, 6],
            }],
        },
        profiles: default_profiles(),
    }
}

/// Medium space: two stages, 32,768 genomes.
pub fn medium_space() -> SearchSpace {
    SearchSpace {
        space_id: "fixture-medium".to_string(),
        skeleton: small_skeleton(vec![
            StageSkeleton {
                base_filters: 96,
                stride: 2,
            },
            StageSkeleton {
                base_filters: 160,
                stride: 2,
            },
        ]),
        decisions: DecisionSpec {
            stages: vec![
                StageDecisions {
                    repeats: vec![1, 2],
                    filter_ratios: vec![0.5, 1.0],
                    block_types: vec![
                        BlockType::InvertedBottleneck,
                        BlockType::FusedInvertedBottleneck,
                    ],
                    kernels: vec![3, 5],
                    expansions: vec![1, 6],
                },
                StageDecisions {
                    repeats: vec![1, 2],
                    filter_ratios: vec![1.0],
                    block_types: vec![
                        BlockType::InvertedBottleneck,
                        BlockType::FusedInvertedBottleneck,
                    ],
                    kernels: vec![3, 5],
                    expansions: vec![2, 4],
                },
            ],
        },
        profiles: default_profiles(),
    }
}

/// Wide space: three single-block stages, 46,656 genomes.
pub fn wide_space() -> SearchSpace {
    let stage_decisions = StageDecisions {
        repeats: vec![1],
        filter_ratios: vec![0.5, 1.0, 2.0],
        block_types: vec![
            BlockType::InvertedBottleneck,
            BlockType::FusedInvertedBottleneck,
        ],
        kernels: vec![3, 5],
        expansions: vec![1, 3, 6],
    };
    SearchSpace {
        space_id: "fixture-wide".to_string(),
        skeleton: small_skeleton(vec![
            StageSkeleton {
                base_filters: 64,
                stride: 1,
            },
            StageSkeleton {
                base_filters: 96,
                stride: 2,
            },
            StageSkeleton {
                base_filters: 160,
                stride: 2,
            },
        ]),
        decisions: DecisionSpec {
            stages: vec![stage_decisions; 3],
        },
        profiles: default_profiles(),
    }
}

/// Weight vector of a plausible compute-bound target: cost tracks MAdds,
/// with a small per-layer overhead.
///
/// Generator weights sit in the schema's identifiable subspace: within a
/// depthwise bucket MAdds and output elements are exactly proportional
/// (madds = kernel^2 * elems, depthwise preserves channels), so only the
/// proportional weight split `w_elems = kernel^2 * w_madds` is recoverable;
/// the pool-MAdds feature is identically zero and its weight must be too.
pub fn compute_bound_weights() -> Vec<f64> {
    let mut w = vec![0.0; FEATURE_LEN];
    w[0] = 4.0e-8; // conv1x1 madds
    w[2] = 3.0e-8; // conv3x3 madds
    w[4] = 3.5e-8; // conv5x5 madds
    w[6] = 4.5e-8; // dw3x3 madds
    w[7] = 4.05e-7; // dw3x3 elems, 9 * madds weight
    w[8] = 5.0e-8; // dw5x5 madds
    w[9] = 1.25e-6; // dw5x5 elems, 25 * madds weight
    w[10] = 5.0e-8; // fc madds
    w[14] = 0.02; // per-layer overhead
    w[15] = 0.4; // dispatch constant
    w
}

/// Weight vector of a memory-bound accelerator: cost tracks output elements
/// and depthwise work, MAdds are nearly free. Identifiable like
/// [`compute_bound_weights`].
pub fn memory_bound_weights() -> Vec<f64> {
    let mut w = vec![0.0; FEATURE_LEN];
    w[0] = 2.0e-9;
    w[2] = 1.5e-9;
    w[4] = 1.8e-9;
    w[1] = 6.0e-7; // conv1x1 elems
    w[3] = 5.0e-7; // conv3x3 elems
    w[5] = 5.5e-7; // conv5x5 elems
    w[6] = 8.6e-8; // dw3x3 madds
    w[7] = 7.74e-7; // dw3x3 elems, 9 * madds weight
    w[8] = 5.3e-8; // dw5x5 madds
    w[9] = 1.325e-6; // dw5x5 elems, 25 * madds weight
    w[11] = 2.0e-6; // fc elems
    w[13] = 1.0e-6; // pool elems
    w[14] = 0.03;
    w[15] = 0.8;
    w
}

/// A two-hardware model set with opposite bottlenecks.
pub fn fixture_cost_models() -> Vec<CostModel> {
    vec![
        CostModel::from_weights("cpu", compute_bound_weights()),
        CostModel::from_weights("accel", memory_bound_weights()),
    ]
}

/// Synthetic (architecture, latency) data from a known weight vector.
///
/// Graphs are drawn uniformly from `space`; latency is the linear model's
/// output, optionally with multiplicative Gaussian noise of relative scale
/// `noise`. Returns the samples and the id → graph table.
pub fn synthetic_samples(
    space: &SearchSpace,
    hardware_id: &str,
    weights: &[f64],
    n: usize,
    noise: f64,
    seed: u64,
) -> (Vec<LatencySample>, HashMap<String, LayerGraph>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(n);
    let mut graphs = HashMap::with_capacity(n);
    for i in 0..n {
        let genome = sample(&space.decisions, &mut rng);
        let graph = space.compile(&genome).expect("fixture genome compiles");
        let features = extract_features(&graph).expect("fixture features");
        let mut latency: f64 = weights
            .iter()
            .zip(features.as_slice())
            .map(|(w, f)| w * f)
            .sum();
        if noise > 0.0 {
            // Box-Muller; two uniform draws per sample keep the stream simple.
            let (u1, u2): (f64, f64) = (rng.gen(), rng.gen());
            let gaussian =
                (-2.0 * u1.max(1e-12).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            latency *= 1.0 + noise * gaussian;
        }
        let arch_id = format!("arch{i:05}");
        graphs.insert(arch_id.clone(), graph);
        samples.push(LatencySample {
            arch_id,
            hardware_id: hardware_id.to_string(),
            latency_ms: latency.max(1e-3),
        });
    }
    (samples, graphs)
}

/// Hand-assembled graphs with diverse shapes, resolutions and head layouts;
/// their feature matrix has full column rank on every structurally non-zero
/// feature, which graphs from a single space cannot provide (fixed heads
/// make the FC and pool columns collinear with the bias).
pub fn diverse_graphs(n: usize, seed: u64) -> Vec<LayerGraph> {
    use crate::graph::Layer;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let resolution = *[16u32, 32, 48, 64, 96].get(rng.gen_range(0..5)).unwrap();
            let classes = rng.gen_range(10..2000);
            let mut channels = 8 * rng.gen_range(1..5);
            let mut layers = vec![Layer::conv(3, 2, 3, channels)];
            for _ in 0..rng.gen_range(2..10) {
                match rng.gen_range(0..4) {
                    0 => {
                        let out = 8 * rng.gen_range(1..9);
                        layers.push(Layer::conv(1, 1, channels, out));
                        channels = out;
                    }
                    1 => {
                        let out = 8 * rng.gen_range(1..7);
                        let kernel = if rng.gen() { 3 } else { 5 };
                        let stride = if rng.gen() { 1 } else { 2 };
                        layers.push(Layer::conv(kernel, stride, channels, out));
                        channels = out;
                    }
                    2 => {
                        let kernel = if rng.gen() { 3 } else { 5 };
                        layers.push(Layer::dwconv(kernel, 1, channels));
                    }
                    _ => {
                        layers.push(Layer::conv(1, 1, channels, channels));
                        layers.push(Layer::residual(channels));
                    }
                }
            }
            if rng.gen() {
                layers.push(Layer::global_pool(channels));
            }
            if rng.gen() {
                let hidden = 8 * rng.gen_range(4..40);
                layers.push(Layer::fully_connected(channels, hidden));
                layers.push(Layer::fully_connected(hidden, classes));
            } else {
                layers.push(Layer::fully_connected(channels, classes));
            }
            LayerGraph::new(resolution, classes, layers)
        })
        .collect()
}

/// Samples over [`diverse_graphs`] for the weight-recovery oracle. The pool
/// MAdds feature is structurally zero, so the generator weight there is zero
/// as well.
pub fn diverse_samples(
    hardware_id: &str,
    weights: &[f64],
    n: usize,
    noise: f64,
    seed: u64,
) -> (Vec<LatencySample>, HashMap<String, LayerGraph>) {
    let graphs = diverse_graphs(n, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut table = HashMap::with_capacity(n);
    let mut samples = Vec::with_capacity(n);
    for (i, graph) in graphs.into_iter().enumerate() {
        let features = extract_features(&graph).expect("fixture features");
        let mut latency: f64 = weights
            .iter()
            .zip(features.as_slice())
            .map(|(w, f)| w * f)
            .sum();
        if noise > 0.0 {
            let (u1, u2): (f64, f64) = (rng.gen(), rng.gen());
            let gaussian =
                (-2.0 * u1.max(1e-12).ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            latency *= 1.0 + noise * gaussian;
        }
        let arch_id = format!("g{i:05}");
        table.insert(arch_id.clone(), graph);
        samples.push(LatencySample {
            arch_id,
            hardware_id: hardware_id.to_string(),
            latency_ms: latency.max(1e-3),
        });
    }
    (samples, table)
}
