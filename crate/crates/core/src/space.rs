//! Multi-hardware search space: a fixed skeleton plus per-stage decision
//! sets, compiled genomes, and hardware membership.
//!
//! The searchable part of a network is its body: a stack of stages, each a
//! run of repeated blocks. Stem and head are fixed. Every decision site is
//! categorical; a [`Genome`](crate::genome::Genome) assigns one index per
//! site. Block slots beyond a stage's chosen repeat count stay in the genome
//! but are ignored during compilation (masked).

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::Genome;
use crate::graph::{round_to_multiple, Layer, LayerGraph};
use crate::profile::HardwareProfile;

/// Granularity the searched filter counts snap to.
pub const FILTER_MULTIPLE: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSkeleton {
    /// Filter count the stage's ratio decision scales; positive multiple of 32.
    pub base_filters: u32,
    /// Stride of the stage's first block.
    pub stride: u32,
}

/// The fixed parts of every architecture in the space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skeleton {
    pub input_resolution: u32,
    pub num_classes: u32,
    /// Output filters of the 3x3 stride-2 stem.
    pub stem_filters: u32,
    pub stages: Vec<StageSkeleton>,
    /// Filters of the 1x1 conv before global pooling.
    pub head_filters: u32,
    /// Width of the embedding layer after pooling.
    pub head_embed: u32,
}

impl Skeleton {
    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::InvalidSpace("skeleton has no stages".into()));
        }
        let mut stride_product = 2u32; // stem
        for (i, stage) in self.stages.iter().enumerate() {
            if stage.base_filters == 0 || stage.base_filters % FILTER_MULTIPLE != 0 {
                return Err(Error::InvalidSpace(format!(
                    "stage {i}: base_filters must be a positive multiple of {FILTER_MULTIPLE}"
                )));
            }
            if stage.stride != 1 && stage.stride != 2 {
                return Err(Error::InvalidSpace(format!(
                    "stage {i}: stride must be 1 or 2"
                )));
            }
            stride_product *= stage.stride;
        }
        if self.input_resolution == 0 || self.input_resolution % stride_product != 0 {
            return Err(Error::InvalidSpace(format!(
                "input resolution {} is not divisible by total stride {}",
                self.input_resolution, stride_product
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockType {
    /// 1x1 expansion, KxK depthwise, 1x1 projection.
    InvertedBottleneck,
    /// Single regular KxK conv in place of expansion + depthwise.
    FusedInvertedBottleneck,
}

/// Choice sets for one stage. Each of the stage's block slots draws from the
/// same per-slot sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageDecisions {
    pub repeats: Vec<u32>,
    pub filter_ratios: Vec<f64>,
    pub block_types: Vec<BlockType>,
    pub kernels: Vec<u32>,
    pub expansions: Vec<u32>,
}

impl StageDecisions {
    /// Number of block slots carried in the genome: enough for the largest
    /// repeat choice.
    pub fn slots(&self) -> usize {
        self.repeats.iter().copied().max().unwrap_or(0) as usize
    }

    fn slot_arity(&self) -> u64 {
        (self.block_types.len() * self.kernels.len() * self.expansions.len()) as u64
    }

    fn validate(&self, stage: usize) -> Result<()> {
        let check = |name: &str, empty: bool| {
            if empty {
                Err(Error::InvalidSpace(format!(
                    "stage {stage}: empty choice set `{name}`"
                )))
            } else {
                Ok(())
            }
        };
        check("repeats", self.repeats.is_empty())?;
        check("filter_ratios", self.filter_ratios.is_empty())?;
        check("block_types", self.block_types.is_empty())?;
        check("kernels", self.kernels.is_empty())?;
        check("expansions", self.expansions.is_empty())?;
        if self.repeats.iter().any(|&r| r == 0) {
            return Err(Error::InvalidSpace(format!(
                "stage {stage}: repeat counts must be positive"
            )));
        }
        if self.filter_ratios.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::InvalidSpace(format!(
                "stage {stage}: filter ratios must be positive"
            )));
        }
        if self.kernels.iter().any(|&k| k == 0 || k % 2 == 0) {
            return Err(Error::InvalidSpace(format!(
                "stage {stage}: kernels must be odd and positive"
            )));
        }
        if self.expansions.iter().any(|&e| e == 0) {
            return Err(Error::InvalidSpace(format!(
                "stage {stage}: expansions must be positive"
            )));
        }
        Ok(())
    }
}

/// What a decision site controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteRole {
    Repeats,
    FilterRatio,
    BlockType { slot: usize },
    Kernel { slot: usize },
    Expansion { slot: usize },
}

/// One categorical decision site of the flattened genome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Site {
    pub stage: usize,
    pub role: SiteRole,
    pub arity: usize,
}

/// All per-stage decision sets of a space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionSpec {
    pub stages: Vec<StageDecisions>,
}

/// Raw and masked-collapsed sizes of a space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cardinality {
    /// Product over all sites of their arity; counts masked slots.
    pub raw: BigUint,
    /// Distinct compiled architectures per decision structure: masked slots
    /// collapsed.
    pub effective: BigUint,
}

impl DecisionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::InvalidSpace("decision spec has no stages".into()));
        }
        for (i, stage) in self.stages.iter().enumerate() {
            stage.validate(i)?;
        }
        Ok(())
    }

    /// Flattened site layout, stage-major:
    /// `[repeats, filter_ratio, (block_type, kernel, expansion) x slots]`.
    pub fn sites(&self) -> Vec<Site> {
        let mut sites = Vec::new();
        for (stage, d) in self.stages.iter().enumerate() {
            sites.push(Site {
                stage,
                role: SiteRole::Repeats,
                arity: d.repeats.len(),
            });
            sites.push(Site {
                stage,
                role: SiteRole::FilterRatio,
                arity: d.filter_ratios.len(),
            });
            for slot in 0..d.slots() {
                sites.push(Site {
                    stage,
                    role: SiteRole::BlockType { slot },
                    arity: d.block_types.len(),
                });
                sites.push(Site {
                    stage,
                    role: SiteRole::Kernel { slot },
                    arity: d.kernels.len(),
                });
                sites.push(Site {
                    stage,
                    role: SiteRole::Expansion { slot },
                    arity: d.expansions.len(),
                });
            }
        }
        sites
    }

    pub fn num_sites(&self) -> usize {
        self.stages.iter().map(|d| 2 + 3 * d.slots()).sum()
    }

    pub fn cardinality(&self) -> Cardinality {
        let mut raw = BigUint::from(1u32);
        for site in self.sites() {
            raw *= BigUint::from(site.arity);
        }
        let mut effective = BigUint::from(1u32);
        for d in &self.stages {
            let mut stage_total = BigUint::from(0u32);
            for &r in &d.repeats {
                let mut active = BigUint::from(d.filter_ratios.len());
                for _ in 0..r {
                    active *= BigUint::from(d.slot_arity());
                }
                stage_total += active;
            }
            effective *= stage_total;
        }
        Cardinality { raw, effective }
    }

    /// Checks that a genome has the right length and in-range choices.
    pub fn check_genome(&self, genome: &Genome) -> Result<()> {
        let sites = self.sites();
        if genome.choices.len() != sites.len() {
            return Err(Error::GenomeMismatch(format!(
                "expected {} sites, got {}",
                sites.len(),
                genome.choices.len()
            )));
        }
        for (i, (site, &choice)) in sites.iter().zip(&genome.choices).enumerate() {
            if choice as usize >= site.arity {
                return Err(Error::GenomeMismatch(format!(
                    "site {i} has arity {}, got choice {choice}",
                    site.arity
                )));
            }
        }
        Ok(())
    }

    /// Indices of the sites that influence compilation under `genome`'s
    /// current repeat choices.
    pub fn unmasked_sites(&self, genome: &Genome) -> Result<Vec<usize>> {
        self.check_genome(genome)?;
        let mut unmasked = Vec::new();
        let mut idx = 0;
        for d in &self.stages {
            let repeats = d.repeats[genome.choices[idx] as usize] as usize;
            unmasked.push(idx); // repeats
            unmasked.push(idx + 1); // filter ratio
            for slot in 0..d.slots() {
                let base = idx + 2 + 3 * slot;
                if slot < repeats {
                    unmasked.extend([base, base + 1, base + 2]);
                }
            }
            idx += 2 + 3 * d.slots();
        }
        Ok(unmasked)
    }
}

/// A complete space definition: skeleton, decisions, and the hardware set
/// whose intersection the space is built inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub space_id: String,
    pub skeleton: Skeleton,
    pub decisions: DecisionSpec,
    pub profiles: Vec<HardwareProfile>,
}

impl SearchSpace {
    pub fn validate(&self) -> Result<()> {
        self.skeleton.validate()?;
        self.decisions.validate()?;
        if self.decisions.stages.len() != self.skeleton.stages.len() {
            return Err(Error::InvalidSpace(format!(
                "decision spec has {} stages, skeleton has {}",
                self.decisions.stages.len(),
                self.skeleton.stages.len()
            )));
        }
        Ok(())
    }

    /// Compiles a genome into a concrete layer graph.
    pub fn compile(&self, genome: &Genome) -> Result<LayerGraph> {
        compile(&self.skeleton, &self.decisions, genome)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<SearchSpace> {
        let space: SearchSpace = serde_json::from_str(json)?;
        space.validate()?;
        Ok(space)
    }

    pub fn read_file(path: impl AsRef<std::path::Path>) -> Result<SearchSpace> {
        SearchSpace::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write_file(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// The default multi-hardware space: a 6-stage mobile body with filter bases
/// lifted to multiples of 32, blocks limited to what every profile in
/// [`crate::profile::default_profiles`] supports.
pub fn default_space() -> SearchSpace {
    let stage = |base_filters: u32, stride: u32| StageSkeleton {
        base_filters,
        stride,
    };
    let decisions = StageDecisions {
        repeats: vec![1, 2, 3, 4],
        filter_ratios: vec![0.5, 0.625, 0.75, 1.0, 1.25, 1.5, 2.0],
        block_types: vec![
            BlockType::InvertedBottleneck,
            BlockType::FusedInvertedBottleneck,
        ],
        kernels: vec![3, 5],
        expansions: vec![1, 2, 3, 4, 5, 6],
    };
    SearchSpace {
        space_id: "multihw-v1".to_string(),
        skeleton: Skeleton {
            input_resolution: 224,
            num_classes: 1001,
            stem_filters: 32,
            stages: vec![
                stage(32, 1),
                stage(32, 2),
                stage(64, 2),
                stage(96, 2),
                stage(128, 1),
                stage(192, 2),
            ],
            head_filters: 960,
            head_embed: 1280,
        },
        decisions: DecisionSpec {
            stages: vec![decisions; 6],
        },
        profiles: crate::profile::default_profiles(),
    }
}

/// Per-stage view of a genome's choices.
#[derive(Debug, Clone, PartialEq)]
pub struct StageChoice {
    pub repeats: u32,
    pub filter_ratio: f64,
    pub blocks: Vec<BlockChoice>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockChoice {
    pub block_type: BlockType,
    pub kernel: u32,
    pub expansion: u32,
}

/// Decodes a genome into per-stage choices (all slots, masked ones included).
pub fn decode(decisions: &DecisionSpec, genome: &Genome) -> Result<Vec<StageChoice>> {
    decisions.check_genome(genome)?;
    let mut choices = Vec::with_capacity(decisions.stages.len());
    let mut idx = 0;
    for d in &decisions.stages {
        let repeats = d.repeats[genome.choices[idx] as usize];
        let filter_ratio = d.filter_ratios[genome.choices[idx + 1] as usize];
        let blocks = (0..d.slots())
            .map(|slot| {
                let base = idx + 2 + 3 * slot;
                BlockChoice {
                    block_type: d.block_types[genome.choices[base] as usize],
                    kernel: d.kernels[genome.choices[base + 1] as usize],
                    expansion: d.expansions[genome.choices[base + 2] as usize],
                }
            })
            .collect();
        idx += 2 + 3 * d.slots();
        choices.push(StageChoice {
            repeats,
            filter_ratio,
            blocks,
        });
    }
    Ok(choices)
}

/// Compiles a genome against a skeleton.
///
/// Stage output filters are `base * ratio` snapped to the nearest multiple
/// of 32 (ties up, floor 32). The first block of a stage carries the stage
/// stride. A residual add closes every stride-1 block whose input and output
/// widths match. Expansion 1 omits the expansion conv in inverted
/// bottlenecks.
pub fn compile(
    skeleton: &Skeleton,
    decisions: &DecisionSpec,
    genome: &Genome,
) -> Result<LayerGraph> {
    skeleton.validate()?;
    decisions.validate()?;
    if decisions.stages.len() != skeleton.stages.len() {
        return Err(Error::InvalidSpace(format!(
            "decision spec has {} stages, skeleton has {}",
            decisions.stages.len(),
            skeleton.stages.len()
        )));
    }
    let stages = decode(decisions, genome)?;

    let mut layers = vec![Layer::conv(3, 2, 3, skeleton.stem_filters)];
    let mut in_ch = skeleton.stem_filters;
    for (stage, choice) in skeleton.stages.iter().zip(&stages) {
        let out_ch = round_to_multiple(
            stage.base_filters as f64 * choice.filter_ratio,
            FILTER_MULTIPLE,
        );
        for b in 0..choice.repeats as usize {
            let block = choice.blocks[b];
            let stride = if b == 0 { stage.stride } else { 1 };
            let expanded = in_ch * block.expansion;
            match block.block_type {
                BlockType::InvertedBottleneck => {
                    if block.expansion > 1 {
                        layers.push(Layer::conv(1, 1, in_ch, expanded));
                    }
                    layers.push(Layer::dwconv(block.kernel, stride, expanded));
                    layers.push(Layer::conv(1, 1, expanded, out_ch));
                }
                BlockType::FusedInvertedBottleneck => {
                    layers.push(Layer::conv(block.kernel, stride, in_ch, expanded));
                    layers.push(Layer::conv(1, 1, expanded, out_ch));
                }
            }
            if stride == 1 && in_ch == out_ch {
                layers.push(Layer::residual(out_ch));
            }
            in_ch = out_ch;
        }
    }
    layers.push(Layer::conv(1, 1, in_ch, skeleton.head_filters));
    layers.push(Layer::global_pool(skeleton.head_filters));
    layers.push(Layer::fully_connected(
        skeleton.head_filters,
        skeleton.head_embed,
    ));
    layers.push(Layer::fully_connected(
        skeleton.head_embed,
        skeleton.num_classes,
    ));
    Ok(LayerGraph::new(
        skeleton.input_resolution,
        skeleton.num_classes,
        layers,
    ))
}
