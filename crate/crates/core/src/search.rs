//! Reward-driven search over a genome space.
//!
//! Four optimizers share one evaluation path (compile, accuracy oracle,
//! per-hardware latency prediction, reward): uniform random sampling, aging
//! evolution, a categorical policy-gradient controller, and exhaustive
//! enumeration as the ground-truth reference on small spaces.
//!
//! Every run is a pure function of its config, seed included. Candidate
//! batches are evaluated with [`crate::par::map_ordered`], which preserves
//! index order, so run artifacts are byte-identical across thread counts.
//! Ties on reward always resolve to the lexicographically smaller genome.

use std::collections::{BTreeMap, VecDeque};
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::{enumerate, mutate, sample, Genome};
use crate::latency::{predict, CostModel};
use crate::metrics::{f_value, reward_multi, reward_single, LatencyVector, NormFactors, RewardMode, RewardSpec};
use crate::oracle::AccuracyOracle;
use crate::par;
use crate::space::SearchSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Random,
    Evolution,
    Reinforce,
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionParams {
    pub population: usize,
    pub sample_size: usize,
}

impl Default for EvolutionParams {
    fn default() -> Self {
        EvolutionParams {
            population: 64,
            sample_size: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReinforceParams {
    pub learning_rate: f64,
    pub baseline_momentum: f64,
}

impl Default for ReinforceParams {
    fn default() -> Self {
        ReinforceParams {
            learning_rate: 0.05,
            baseline_momentum: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub algorithm: Algorithm,
    pub reward: RewardSpec,
    pub budget: usize,
    pub seed: u64,
    #[serde(default)]
    pub evolution: EvolutionParams,
    #[serde(default)]
    pub reinforce: ReinforceParams,
}

impl SearchConfig {
    pub fn new(algorithm: Algorithm, reward: RewardSpec, budget: usize, seed: u64) -> SearchConfig {
        SearchConfig {
            algorithm,
            reward,
            budget,
            seed,
            evolution: EvolutionParams::default(),
            reinforce: ReinforceParams::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        self.reward.validate()?;
        if self.budget == 0 {
            return Err(Error::InvalidInput("budget must be at least 1".into()));
        }
        match self.algorithm {
            Algorithm::Evolution => {
                if self.evolution.population == 0 || self.evolution.sample_size == 0 {
                    return Err(Error::InvalidInput(
                        "evolution population and sample size must be positive".into(),
                    ));
                }
                if self.budget < self.evolution.population {
                    return Err(Error::InvalidInput(format!(
                        "budget {} below population {}",
                        self.budget, self.evolution.population
                    )));
                }
            }
            Algorithm::Reinforce => {
                if !(self.reinforce.learning_rate >= 0.0) {
                    return Err(Error::InvalidInput(
                        "reinforce learning rate must be non-negative".into(),
                    ));
                }
                if !(0.0..1.0).contains(&self.reinforce.baseline_momentum) {
                    return Err(Error::InvalidInput(
                        "baseline momentum must be in [0, 1)".into(),
                    ));
                }
            }
            Algorithm::Random | Algorithm::Exhaustive => {}
        }
        Ok(())
    }
}

/// One evaluated candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub choices: Vec<u16>,
    pub accuracy: f64,
    pub latency_ms: BTreeMap<String, f64>,
    pub f_value: f64,
    pub reward: f64,
}

/// Timing kept out of the persisted artifact so seeded runs serialize
/// byte-identically.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WallStats {
    pub elapsed: Duration,
    pub evaluations: usize,
}

/// A completed search: config echo, full history, best candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRun {
    pub space_id: String,
    pub config: SearchConfig,
    /// Bookkeeping: one search run costs one search unit, independent of how
    /// many hardware targets its reward covers.
    pub cost_units: u32,
    pub best: StepRecord,
    pub history: Vec<StepRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_logits: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_baseline: Option<f64>,
    #[serde(skip)]
    pub wall: WallStats,
}

impl SearchRun {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<SearchRun> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn read_file(path: impl AsRef<std::path::Path>) -> Result<SearchRun> {
        SearchRun::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write_file(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// Shared evaluation context: space, oracle, latency models, normalization.
pub struct Evaluator<'a> {
    space: &'a SearchSpace,
    oracle: &'a AccuracyOracle,
    models: &'a [CostModel],
    norm: Option<&'a NormFactors>,
    reward: &'a RewardSpec,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        space: &'a SearchSpace,
        oracle: &'a AccuracyOracle,
        models: &'a [CostModel],
        norm: Option<&'a NormFactors>,
        reward: &'a RewardSpec,
    ) -> Result<Evaluator<'a>> {
        space.validate()?;
        reward.validate()?;
        if models.is_empty() {
            return Err(Error::InvalidInput("no cost models given".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for m in models {
            if !seen.insert(&m.hardware_id) {
                return Err(Error::InvalidInput(format!(
                    "duplicate cost model for hardware `{}`",
                    m.hardware_id
                )));
            }
        }
        match reward.mode {
            RewardMode::Single => {
                let hw = reward.single_hardware()?;
                if !models.iter().any(|m| m.hardware_id == hw) {
                    return Err(Error::MissingCostModel(hw.to_string()));
                }
            }
            RewardMode::Avg | RewardMode::Max => {
                let norm = norm.ok_or_else(|| {
                    Error::InvalidReward("avg/max mode requires normalization factors".into())
                })?;
                let covered: Vec<&String> = match &reward.hardware {
                    Some(subset) => subset.iter().collect(),
                    None => norm.factors.keys().collect(),
                };
                for hw in covered {
                    if !models.iter().any(|m| &m.hardware_id == hw) {
                        return Err(Error::MissingCostModel(hw.clone()));
                    }
                    if !norm.factors.contains_key(hw) {
                        return Err(Error::HardwareMismatch(format!(
                            "no normalization factor for `{hw}`"
                        )));
                    }
                }
            }
        }
        Ok(Evaluator {
            space,
            oracle,
            models,
            norm,
            reward,
        })
    }

    /// Compiles and scores one genome: oracle accuracy, predicted latency on
    /// every model's hardware, reward per the spec. Pure and deterministic.
    pub fn evaluate(&self, genome: &Genome) -> Result<Evaluation> {
        let graph = self.space.compile(genome)?;
        let accuracy = self.oracle.accuracy(genome, &graph)?;
        let mut entries = BTreeMap::new();
        for model in self.models {
            entries.insert(model.hardware_id.clone(), predict(model, &graph)?);
        }
        let latencies = LatencyVector::new(entries);
        let (f, reward) = match self.reward.mode {
            RewardMode::Single => {
                let hw = self.reward.single_hardware()?;
                let l = latencies.entries[hw];
                let f = l / self.reward.target.expect("validated");
                (f, reward_single(accuracy, l, self.reward)?)
            }
            RewardMode::Avg | RewardMode::Max => {
                let norm = self.norm.expect("validated");
                let f = f_value(&latencies, norm, self.reward)?;
                (f, reward_multi(accuracy, &latencies, norm, self.reward)?)
            }
        };
        Ok(Evaluation {
            accuracy,
            latency_ms: latencies.entries,
            f_value: f,
            reward,
        })
    }

    fn record(&self, step: usize, genome: &Genome) -> Result<StepRecord> {
        let eval = self.evaluate(genome)?;
        Ok(StepRecord {
            step,
            choices: genome.choices.clone(),
            accuracy: eval.accuracy,
            latency_ms: eval.latency_ms,
            f_value: eval.f_value,
            reward: eval.reward,
        })
    }

    /// Evaluates a batch in input order (parallel when enabled).
    fn record_batch(&self, start_step: usize, genomes: &[Genome]) -> Result<Vec<StepRecord>> {
        par::map_ordered(genomes, |g| self.evaluate(g))
            .into_iter()
            .zip(genomes)
            .enumerate()
            .map(|(i, (eval, genome))| {
                let eval = eval?;
                Ok(StepRecord {
                    step: start_step + i,
                    choices: genome.choices.clone(),
                    accuracy: eval.accuracy,
                    latency_ms: eval.latency_ms,
                    f_value: eval.f_value,
                    reward: eval.reward,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    pub latency_ms: BTreeMap<String, f64>,
    pub f_value: f64,
    pub reward: f64,
}

/// Reward-descending order with lexicographic genome tie-break.
fn improves(candidate: &StepRecord, incumbent: &StepRecord) -> bool {
    candidate.reward > incumbent.reward
        || (candidate.reward == incumbent.reward && candidate.choices < incumbent.choices)
}

fn best_of(history: &[StepRecord]) -> StepRecord {
    let mut best = &history[0];
    for record in &history[1..] {
        if improves(record, best) {
            best = record;
        }
    }
    best.clone()
}

fn finish(
    space: &SearchSpace,
    config: SearchConfig,
    history: Vec<StepRecord>,
    started: Instant,
) -> SearchRun {
    let best = best_of(&history);
    let evaluations = history.len();
    SearchRun {
        space_id: space.space_id.clone(),
        config,
        cost_units: 1,
        best,
        history,
        final_logits: None,
        final_baseline: None,
        wall: WallStats {
            elapsed: started.elapsed(),
            evaluations,
        },
    }
}

/// Dispatches on `config.algorithm`. Exhaustive uses the budget as the
/// enumeration limit.
pub fn run_search(
    space: &SearchSpace,
    oracle: &AccuracyOracle,
    models: &[CostModel],
    norm: Option<&NormFactors>,
    config: &SearchConfig,
) -> Result<SearchRun> {
    match config.algorithm {
        Algorithm::Random => search_random(space, oracle, models, norm, config),
        Algorithm::Evolution => search_evolution(space, oracle, models, norm, config),
        Algorithm::Reinforce => search_reinforce(space, oracle, models, norm, config),
        Algorithm::Exhaustive => search_exhaustive(
            space,
            oracle,
            models,
            norm,
            &config.reward,
            config.budget as u64,
            config.seed,
        ),
    }
}

/// Uniform sampling baseline.
pub fn search_random(
    space: &SearchSpace,
    oracle: &AccuracyOracle,
    models: &[CostModel],
    norm: Option<&NormFactors>,
    config: &SearchConfig,
) -> Result<SearchRun> {
    let started = Instant::now();
    config.validate()?;
    let evaluator = Evaluator::new(space, oracle, models, norm, &config.reward)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let genomes: Vec<Genome> = (0..config.budget)
        .map(|_| sample(&space.decisions, &mut rng))
        .collect();
    let history = evaluator.record_batch(0, &genomes)?;
    Ok(finish(space, config.clone(), history, started))
}

/// Aging evolution: sample a tournament from the population, mutate its best
/// member, evict the oldest.
pub fn search_evolution(
    space: &SearchSpace,
    oracle: &AccuracyOracle,
    models: &[CostModel],
    norm: Option<&NormFactors>,
    config: &SearchConfig,
) -> Result<SearchRun> {
    let started = Instant::now();
    config.validate()?;
    let evaluator = Evaluator::new(space, oracle, models, norm, &config.reward)?;
    let params = config.evolution;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let seeds: Vec<Genome> = (0..params.population)
        .map(|_| sample(&space.decisions, &mut rng))
        .collect();
    let mut history = evaluator.record_batch(0, &seeds)?;
    let mut population: VecDeque<usize> = (0..params.population).collect();

    for step in params.population..config.budget {
        let mut parent: Option<&StepRecord> = None;
        for _ in 0..params.sample_size {
            let member = &history[population[rng.gen_range(0..population.len())]];
            if parent.map_or(true, |p| improves(member, p)) {
                parent = Some(member);
            }
        }
        let parent = Genome::new(parent.expect("population non-empty").choices.clone());
        let child = mutate(&space.decisions, &parent, &mut rng)?;
        history.push(evaluator.record(step, &child)?);
        population.push_back(step);
        population.pop_front();
    }
    Ok(finish(space, config.clone(), history, started))
}

/// Categorical policy gradient with an EMA reward baseline: one logit vector
/// per decision site, genomes sampled from independent softmaxes.
pub fn search_reinforce(
    space: &SearchSpace,
    oracle: &AccuracyOracle,
    models: &[CostModel],
    norm: Option<&NormFactors>,
    config: &SearchConfig,
) -> Result<SearchRun> {
    let started = Instant::now();
    config.validate()?;
    let evaluator = Evaluator::new(space, oracle, models, norm, &config.reward)?;
    let params = config.reinforce;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let arities: Vec<usize> = space.decisions.sites().iter().map(|s| s.arity).collect();
    let mut logits: Vec<Vec<f64>> = arities.iter().map(|&a| vec![0.0; a]).collect();
    let mut baseline = 0.0;
    let mut history = Vec::with_capacity(config.budget);

    for step in 0..config.budget {
        let mut choices = Vec::with_capacity(logits.len());
        let mut probs: Vec<Vec<f64>> = Vec::with_capacity(logits.len());
        for site_logits in &logits {
            let p = softmax(site_logits);
            choices.push(sample_categorical(&p, &mut rng) as u16);
            probs.push(p);
        }
        let genome = Genome::new(choices);
        let record = evaluator.record(step, &genome)?;
        let advantage = record.reward - baseline;
        baseline = params.baseline_momentum * baseline
            + (1.0 - params.baseline_momentum) * record.reward;
        for (site, site_logits) in logits.iter_mut().enumerate() {
            let chosen = genome.choices[site] as usize;
            for (j, logit) in site_logits.iter_mut().enumerate() {
                let indicator = if j == chosen { 1.0 } else { 0.0 };
                *logit += params.learning_rate * advantage * (indicator - probs[site][j]);
            }
        }
        history.push(record);
    }
    let mut run = finish(space, config.clone(), history, started);
    run.final_logits = Some(logits);
    run.final_baseline = Some(baseline);
    Ok(run)
}

/// Evaluates every genome in the space; exact argmax with lexicographic
/// tie-break. Errors when the raw cardinality exceeds `limit`.
pub fn search_exhaustive(
    space: &SearchSpace,
    oracle: &AccuracyOracle,
    models: &[CostModel],
    norm: Option<&NormFactors>,
    reward: &RewardSpec,
    limit: u64,
    seed: u64,
) -> Result<SearchRun> {
    let started = Instant::now();
    space.validate()?;
    let evaluator = Evaluator::new(space, oracle, models, norm, reward)?;
    let genomes: Vec<Genome> = enumerate(&space.decisions, limit)?.collect();
    let history = evaluator.record_batch(0, &genomes)?;
    let config = SearchConfig::new(Algorithm::Exhaustive, reward.clone(), history.len(), seed);
    Ok(finish(space, config, history, started))
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

fn sample_categorical(probs: &[f64], rng: &mut impl Rng) -> usize {
    let draw: f64 = rng.gen();
    let mut cumulative = 0.0;
    for (i, p) in probs.iter().enumerate() {
        cumulative += p;
        if draw < cumulative {
            return i;
        }
    }
    probs.len() - 1
}
