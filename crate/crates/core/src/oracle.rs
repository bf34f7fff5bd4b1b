//! Pluggable accuracy oracles.
//!
//! Search needs an accuracy figure per candidate without training anything.
//! Two surrogates: a tabular lookup keyed on genome, and a synthetic curve
//! that grows with model capacity (MAdds) at a diminishing rate, so latency
//! penalties trade against a real accuracy frontier.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::Genome;
use crate::graph::LayerGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AccuracyOracle {
    /// `base + span * (1 - exp(-madds / madds_ref))`.
    Synthetic { base: f64, span: f64, madds_ref: f64 },
    /// Exact lookup by genome key.
    Tabular { table: BTreeMap<String, f64> },
}

impl AccuracyOracle {
    pub fn synthetic_default() -> AccuracyOracle {
        AccuracyOracle::Synthetic {
            base: 0.70,
            span: 0.08,
            madds_ref: 3e8,
        }
    }

    pub fn synthetic(base: f64, span: f64, madds_ref: f64) -> Result<AccuracyOracle> {
        if !(base > 0.0 && span > 0.0 && base + span < 1.0) {
            return Err(Error::InvalidInput(format!(
                "synthetic oracle needs 0 < base and base + span < 1, got {base} + {span}"
            )));
        }
        if !(madds_ref > 0.0) {
            return Err(Error::InvalidInput(
                "synthetic oracle needs a positive madds_ref".into(),
            ));
        }
        Ok(AccuracyOracle::Synthetic {
            base,
            span,
            madds_ref,
        })
    }

    pub fn tabular(table: BTreeMap<String, f64>) -> AccuracyOracle {
        AccuracyOracle::Tabular { table }
    }

    /// Reads `genome_key,accuracy` rows.
    pub fn tabular_from_csv(reader: impl std::io::Read) -> Result<AccuracyOracle> {
        let mut table = BTreeMap::new();
        let mut csv = csv::Reader::from_reader(reader);
        for record in csv.deserialize() {
            let (key, accuracy): (String, f64) = record?;
            table.insert(key, accuracy);
        }
        Ok(AccuracyOracle::Tabular { table })
    }

    /// Accuracy fraction in (0, 1) for one candidate; deterministic.
    pub fn accuracy(&self, genome: &Genome, graph: &LayerGraph) -> Result<f64> {
        match self {
            AccuracyOracle::Synthetic {
                base,
                span,
                madds_ref,
            } => {
                let madds = graph.madds()? as f64;
                Ok(base + span * (1.0 - (-madds / madds_ref).exp()))
            }
            AccuracyOracle::Tabular { table } => {
                let key = genome.key();
                table
                    .get(&key)
                    .copied()
                    .ok_or(Error::OracleMiss(key))
            }
        }
    }
}
