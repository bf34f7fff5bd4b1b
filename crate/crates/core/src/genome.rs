//! Genomes: flat categorical encodings of every decision in a space, plus
//! the sampling, mutation and enumeration operators the searchers build on.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::DecisionSpec;

/// One assignment of all decision sites; entry `i` indexes into site `i`'s
/// choice set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Genome {
    pub choices: Vec<u16>,
}

impl Genome {
    pub fn new(choices: Vec<u16>) -> Genome {
        Genome { choices }
    }

    /// Stable string key (`"0-3-1"`), used by tabular oracles.
    pub fn key(&self) -> String {
        let mut out = String::with_capacity(self.choices.len() * 2);
        for (i, c) in self.choices.iter().enumerate() {
            if i > 0 {
                out.push('-');
            }
            out.push_str(&c.to_string());
        }
        out
    }

    pub fn parse_key(key: &str) -> Result<Genome> {
        let choices = key
            .split('-')
            .map(|part| {
                part.parse::<u16>()
                    .map_err(|_| Error::InvalidInput(format!("bad genome key `{key}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Genome { choices })
    }
}

/// Interchange format tying a genome to its space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenomeFile {
    pub space_id: String,
    pub choices: Vec<u16>,
}

impl GenomeFile {
    pub fn new(space_id: &str, genome: &Genome) -> GenomeFile {
        GenomeFile {
            space_id: space_id.to_string(),
            choices: genome.choices.clone(),
        }
    }

    pub fn genome(&self) -> Genome {
        Genome::new(self.choices.clone())
    }

    pub fn read_file(path: impl AsRef<std::path::Path>) -> Result<GenomeFile> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn write_file(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Draws every site independently and uniformly.
pub fn sample(spec: &DecisionSpec, rng: &mut impl Rng) -> Genome {
    let choices = spec
        .sites()
        .iter()
        .map(|site| rng.gen_range(0..site.arity) as u16)
        .collect();
    Genome { choices }
}

/// Seeded convenience wrapper around [`sample`].
pub fn sample_uniform(spec: &DecisionSpec, seed: u64) -> Genome {
    sample(spec, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Resamples exactly one unmasked, non-degenerate site to a different value.
///
/// Sites with a single choice cannot change and are skipped. Errors if no
/// mutable site exists.
pub fn mutate(spec: &DecisionSpec, genome: &Genome, rng: &mut impl Rng) -> Result<Genome> {
    let sites = spec.sites();
    let mutable: Vec<usize> = spec
        .unmasked_sites(genome)?
        .into_iter()
        .filter(|&i| sites[i].arity > 1)
        .collect();
    if mutable.is_empty() {
        return Err(Error::GenomeMismatch(
            "no mutable site: every unmasked site has a single choice".into(),
        ));
    }
    let site_idx = mutable[rng.gen_range(0..mutable.len())];
    let arity = sites[site_idx].arity;
    let current = genome.choices[site_idx] as usize;
    // Uniform over the other arity-1 values.
    let mut pick = rng.gen_range(0..arity - 1);
    if pick >= current {
        pick += 1;
    }
    let mut child = genome.clone();
    child.choices[site_idx] = pick as u16;
    Ok(child)
}

/// Lexicographic enumeration of every genome in the raw space.
pub struct GenomeIter {
    arities: Vec<usize>,
    next: Option<Vec<u16>>,
}

impl Iterator for GenomeIter {
    type Item = Genome;

    fn next(&mut self) -> Option<Genome> {
        let current = self.next.clone()?;
        // Mixed-radix increment, rightmost site fastest.
        let mut bumped = current.clone();
        let mut done = true;
        for i in (0..bumped.len()).rev() {
            if (bumped[i] as usize) + 1 < self.arities[i] {
                bumped[i] += 1;
                bumped[i + 1..].iter_mut().for_each(|c| *c = 0);
                done = false;
                break;
            }
        }
        self.next = if done { None } else { Some(bumped) };
        Some(Genome { choices: current })
    }
}

/// Enumerates the whole space in lexicographic order, refusing spaces whose
/// raw cardinality exceeds `limit`.
pub fn enumerate(spec: &DecisionSpec, limit: u64) -> Result<GenomeIter> {
    spec.validate()?;
    let cardinality = spec.cardinality().raw;
    if cardinality > limit.into() {
        return Err(Error::SpaceTooLarge {
            cardinality: cardinality.to_string(),
            limit,
        });
    }
    let arities: Vec<usize> = spec.sites().iter().map(|s| s.arity).collect();
    let start = vec![0u16; arities.len()];
    Ok(GenomeIter {
        arities,
        next: Some(start),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{BlockType, StageDecisions};
    use std::collections::HashSet;

    /// One stage, fixed repeats/ratio/type/expansion, two kernels and two
    /// expansions searched: a 2-site, (2, 2)-arity playground.
    fn two_site_spec() -> DecisionSpec {
        DecisionSpec {
            stages: vec![StageDecisions {
                repeats: vec![1],
                filter_ratios: vec![1.0],
                block_types: vec![BlockType::InvertedBottleneck],
                kernels: vec![3, 5],
                expansions: vec![1, 6],
            }],
        }
    }

    fn arity_2_3_spec() -> DecisionSpec {
        DecisionSpec {
            stages: vec![StageDecisions {
                repeats: vec![1],
                filter_ratios: vec![1.0],
                block_types: vec![BlockType::InvertedBottleneck],
                kernels: vec![3, 5],
                expansions: vec![1, 3, 6],
            }],
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let spec = crate::space::default_space().decisions;
        assert_eq!(sample_uniform(&spec, 7), sample_uniform(&spec, 7));
        let distinct: HashSet<Genome> = (0..50).map(|s| sample_uniform(&spec, s)).collect();
        assert_eq!(distinct.len(), 50, "seeds should not collide on 10^38 points");
    }

    #[test]
    fn sampling_is_roughly_uniform_on_a_binary_site() {
        let spec = two_site_spec();
        let sites = spec.sites();
        // kernel site: first arity-2 site
        let kernel_site = sites.iter().position(|s| s.arity == 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut ones = 0;
        for _ in 0..10_000 {
            if sample(&spec, &mut rng).choices[kernel_site] == 1 {
                ones += 1;
            }
        }
        assert!((4700..=5300).contains(&ones), "got {ones}");
    }

    #[test]
    fn mutation_changes_exactly_one_unmasked_site() {
        let space = crate::space::default_space();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let g = sample(&space.decisions, &mut rng);
            let child = mutate(&space.decisions, &g, &mut rng).unwrap();
            let diffs: Vec<usize> = (0..g.choices.len())
                .filter(|&i| g.choices[i] != child.choices[i])
                .collect();
            assert_eq!(diffs.len(), 1);
            let unmasked = space.decisions.unmasked_sites(&g).unwrap();
            assert!(unmasked.contains(&diffs[0]), "mutated a masked site");
        }
    }

    #[test]
    fn binary_site_mutation_always_flips() {
        let spec = two_site_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = sample(&spec, &mut rng);
        for _ in 0..50 {
            let child = mutate(&spec, &g, &mut rng).unwrap();
            let site = (0..g.choices.len())
                .find(|&i| g.choices[i] != child.choices[i])
                .unwrap();
            assert_ne!(child.choices[site], g.choices[site]);
        }
    }

    #[test]
    fn repeated_mutation_reaches_every_genome() {
        // Brute-force reachability on the 2-site space: build the transition
        // closure from the all-zeros genome.
        let spec = two_site_spec();
        let all: Vec<Genome> = enumerate(&spec, 100).unwrap().collect();
        let mut reached: HashSet<Genome> = HashSet::new();
        let mut frontier = vec![all[0].clone()];
        reached.insert(all[0].clone());
        while let Some(g) = frontier.pop() {
            let sites = spec.sites();
            for &site in &spec.unmasked_sites(&g).unwrap() {
                for v in 0..sites[site].arity as u16 {
                    if v == g.choices[site] {
                        continue;
                    }
                    let mut next = g.clone();
                    next.choices[site] = v;
                    if reached.insert(next.clone()) {
                        frontier.push(next);
                    }
                }
            }
        }
        assert_eq!(reached.len(), all.len());
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let spec = arity_2_3_spec();
        let genomes: Vec<Vec<u16>> = enumerate(&spec, 100)
            .unwrap()
            .map(|g| {
                // project onto the two searched sites (kernel, expansion)
                let sites = spec.sites();
                (0..sites.len())
                    .filter(|&i| sites[i].arity > 1)
                    .map(|i| g.choices[i])
                    .collect()
            })
            .collect();
        assert_eq!(
            genomes,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![0, 2],
                vec![1, 0],
                vec![1, 1],
                vec![1, 2]
            ]
        );
    }

    #[test]
    fn enumeration_respects_limit() {
        let spec = arity_2_3_spec();
        assert!(matches!(
            enumerate(&spec, 5),
            Err(Error::SpaceTooLarge { .. })
        ));
    }

    #[test]
    fn sampling_closure_matches_enumeration_on_tiny_space() {
        let spec = arity_2_3_spec();
        let enumerated: HashSet<Genome> = enumerate(&spec, 100).unwrap().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sampled: HashSet<Genome> = (0..500).map(|_| sample(&spec, &mut rng)).collect();
        assert_eq!(enumerated, sampled);
    }

    #[test]
    fn genome_key_round_trips() {
        let g = Genome::new(vec![0, 3, 1, 12]);
        assert_eq!(g.key(), "0-3-1-12");
        assert_eq!(Genome::parse_key("0-3-1-12").unwrap(), g);
        assert!(Genome::parse_key("0-x-1").is_err());
    }
}
