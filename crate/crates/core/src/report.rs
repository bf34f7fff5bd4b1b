//! Pareto extraction, comparison tables, and tradeoff CSV emission.
//!
//! Points flow in and out through a CSV with header
//! `model_id,accuracy,params,madds,<metric keys...>`; a metric cell of `x`
//! (or an empty cell) marks hardware the model cannot run on. Accuracy is a
//! fraction in (0, 1).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{f_avg, f_max, LatencyVector, NormFactors};

/// Marker for metrics a model cannot produce (unsupported hardware).
pub const UNSUPPORTED: &str = "x";

/// One model's row in a tradeoff study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub model_id: String,
    pub accuracy: f64,
    pub params: f64,
    pub madds: f64,
    /// Latency or published metric values keyed by column name; missing key
    /// means unsupported.
    pub metrics: BTreeMap<String, f64>,
}

impl TradeoffPoint {
    pub fn metric(&self, key: &str) -> Option<f64> {
        self.metrics.get(key).copied()
    }
}

/// Points plus the metric column order their CSV used.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub points: Vec<TradeoffPoint>,
    pub metric_keys: Vec<String>,
}

/// Reads a `model_id,accuracy,params,madds,<metrics...>` CSV.
pub fn read_points_csv(reader: impl std::io::Read) -> Result<PointSet> {
    let mut csv = csv::Reader::from_reader(reader);
    let headers = csv.headers()?.clone();
    let fixed = ["model_id", "accuracy", "params", "madds"];
    if headers.len() < fixed.len()
        || headers.iter().take(4).ne(fixed)
    {
        return Err(Error::InvalidInput(format!(
            "points CSV must start with columns {fixed:?}, got {:?}",
            headers.iter().collect::<Vec<_>>()
        )));
    }
    let metric_keys: Vec<String> = headers.iter().skip(4).map(|h| h.to_string()).collect();
    let mut points = Vec::new();
    for record in csv.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("").trim().to_string();
        let number = |i: usize| -> Result<f64> {
            field(i)
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad number `{}` in points CSV", field(i))))
        };
        let mut metrics = BTreeMap::new();
        for (j, key) in metric_keys.iter().enumerate() {
            let raw = field(4 + j);
            if raw.is_empty() || raw == UNSUPPORTED {
                continue;
            }
            metrics.insert(key.clone(), number(4 + j)?);
        }
        points.push(TradeoffPoint {
            model_id: field(0),
            accuracy: number(1)?,
            params: number(2)?,
            madds: number(3)?,
            metrics,
        });
    }
    Ok(PointSet {
        points,
        metric_keys,
    })
}

pub fn write_points_csv(set: &PointSet, writer: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![
        "model_id".to_string(),
        "accuracy".to_string(),
        "params".to_string(),
        "madds".to_string(),
    ];
    header.extend(set.metric_keys.iter().cloned());
    w.write_record(&header)?;
    for p in &set.points {
        let mut row = vec![
            p.model_id.clone(),
            p.accuracy.to_string(),
            p.params.to_string(),
            p.madds.to_string(),
        ];
        for key in &set.metric_keys {
            row.push(match p.metric(key) {
                Some(v) => v.to_string(),
                None => UNSUPPORTED.to_string(),
            });
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn dominates(p: &TradeoffPoint, q: &TradeoffPoint, key: &str) -> bool {
    let (pl, ql) = (p.metrics[key], q.metrics[key]);
    pl <= ql && p.accuracy >= q.accuracy && (pl < ql || p.accuracy > q.accuracy)
}

/// Non-dominated subset under (minimize `latency_key`, maximize accuracy),
/// sorted by the latency key. Tied duplicates are all kept.
pub fn pareto_front(points: &[TradeoffPoint], latency_key: &str) -> Result<Vec<TradeoffPoint>> {
    if points.is_empty() {
        return Err(Error::InvalidInput("no points given".into()));
    }
    for p in points {
        if p.metric(latency_key).is_none() {
            return Err(Error::MissingMetric {
                model_id: p.model_id.clone(),
                key: latency_key.to_string(),
            });
        }
    }
    let mut front: Vec<TradeoffPoint> = points
        .iter()
        .filter(|p| !points.iter().any(|q| dominates(q, p, latency_key)))
        .cloned()
        .collect();
    front.sort_by(|a, b| {
        a.metrics[latency_key]
            .partial_cmp(&b.metrics[latency_key])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.model_id.cmp(&b.model_id))
    });
    Ok(front)
}

/// A rendered comparison table: per model the accuracy, cost counts,
/// per-hardware latency, and normalized avg/max, with per-column best flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub columns: Vec<String>,
    pub rows: Vec<TableRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub model_id: String,
    /// One cell per column; `None` renders as the unsupported marker.
    pub cells: Vec<Option<f64>>,
    pub best: Vec<bool>,
}

/// Builds the comparison table for a shared hardware set.
///
/// Latency columns come from the normalization set. A model missing a
/// hardware entry gets the unsupported marker there and no normalized
/// metrics, and is skipped when flagging column bests. Accuracy is
/// best-is-highest; every other column is best-is-lowest.
pub fn comparison_table(points: &[TradeoffPoint], norm: &NormFactors) -> Result<ComparisonTable> {
    if points.is_empty() {
        return Err(Error::InvalidInput("no points given".into()));
    }
    norm.validate()?;
    let hardware: Vec<String> = norm.factors.keys().cloned().collect();
    let mut columns = vec![
        "accuracy".to_string(),
        "params".to_string(),
        "madds".to_string(),
    ];
    columns.extend(hardware.iter().cloned());
    columns.push("mn_norm_avg".to_string());
    columns.push("mn_norm_max".to_string());

    let mut rows = Vec::with_capacity(points.len());
    for p in points {
        let mut cells = vec![Some(p.accuracy), Some(p.params), Some(p.madds)];
        let latencies: Vec<Option<f64>> = hardware.iter().map(|hw| p.metric(hw)).collect();
        cells.extend(latencies.iter().copied());
        if latencies.iter().all(|l| l.is_some()) {
            let vector = LatencyVector::new(
                hardware
                    .iter()
                    .zip(&latencies)
                    .map(|(hw, l)| (hw.clone(), l.unwrap()))
                    .collect(),
            );
            cells.push(Some(f_avg(&vector, norm)?));
            cells.push(Some(f_max(&vector, norm)?));
        } else {
            cells.push(None);
            cells.push(None);
        }
        let best = vec![false; cells.len()];
        rows.push(TableRow {
            model_id: p.model_id.clone(),
            cells,
            best,
        });
    }

    for col in 0..columns.len() {
        let maximize = columns[col] == "accuracy";
        let best_value = rows
            .iter()
            .filter_map(|r| r.cells[col])
            .fold(None::<f64>, |acc, v| {
                Some(match acc {
                    None => v,
                    Some(a) => {
                        if (maximize && v > a) || (!maximize && v < a) {
                            v
                        } else {
                            a
                        }
                    }
                })
            });
        if let Some(best) = best_value {
            for row in &mut rows {
                if row.cells[col] == Some(best) {
                    row.best[col] = true;
                }
            }
        }
    }
    Ok(ComparisonTable { columns, rows })
}

impl ComparisonTable {
    /// CSV rendering; best cells carry a trailing `*`, unsupported cells the
    /// `x` marker.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["model_id".to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut record = vec![row.model_id.clone()];
            for (cell, &best) in row.cells.iter().zip(&row.best) {
                record.push(match cell {
                    Some(v) if best => format!("{v}*"),
                    Some(v) => v.to_string(),
                    None => UNSUPPORTED.to_string(),
                });
            }
            w.write_record(&record)?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| {
            Error::InvalidInput(format!("csv buffer error: {e}"))
        })?)
        .expect("csv output is utf-8"))
    }
}

/// One plottable series row: `model_id,series,x,y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffRow {
    pub model_id: String,
    pub series: String,
    pub x: f64,
    pub y: f64,
}

/// Series name for a model id: the part before `@`, so width-multiplier
/// variants of one family share a series.
pub fn series_of(model_id: &str) -> String {
    model_id
        .split_once('@')
        .map(|(family, _)| family.to_string())
        .unwrap_or_else(|| model_id.to_string())
}

/// Emits `model_id,series,x,y` rows (x = chosen metric, y = accuracy),
/// grouped by series and ordered by x within each series. Errors if a point
/// lacks the x metric.
pub fn emit_tradeoff_csv(
    points: &[TradeoffPoint],
    x_key: &str,
    writer: impl std::io::Write,
) -> Result<()> {
    let mut rows = Vec::with_capacity(points.len());
    for p in points {
        let x = p.metric(x_key).ok_or_else(|| Error::MissingMetric {
            model_id: p.model_id.clone(),
            key: x_key.to_string(),
        })?;
        rows.push(TradeoffRow {
            model_id: p.model_id.clone(),
            series: series_of(&p.model_id),
            x,
            y: p.accuracy,
        });
    }
    rows.sort_by(|a, b| {
        a.series
            .cmp(&b.series)
            .then(a.x.partial_cmp(&b.x).unwrap_or(std::cmp::Ordering::Equal))
            .then(a.model_id.cmp(&b.model_id))
    });
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["model_id", "series", "x", "y"])?;
    for row in &rows {
        w.write_record([
            row.model_id.as_str(),
            row.series.as_str(),
            &row.x.to_string(),
            &row.y.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_tradeoff_csv(reader: impl std::io::Read) -> Result<Vec<TradeoffRow>> {
    let mut out = Vec::new();
    for record in csv::Reader::from_reader(reader).deserialize() {
        out.push(record?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn point(model_id: &str, accuracy: f64, metrics: &[(&str, f64)]) -> TradeoffPoint {
        TradeoffPoint {
            model_id: model_id.to_string(),
            accuracy,
            params: 1.0,
            madds: 1.0,
            metrics: metrics
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
        }
    }

    /// Published comparison rows for the eight mobile models on the five
    /// Pixel4 targets (accuracy as a fraction; parameters and MAdds in
    /// raw counts; latencies in ms; normalized metrics ingested as data).
    pub fn published_rows() -> Vec<TradeoffPoint> {
        let row = |id: &str,
                   accu: f64,
                   params: f64,
                   madds: f64,
                   cells: &[(&str, f64)]|
         -> TradeoffPoint {
            TradeoffPoint {
                model_id: id.to_string(),
                accuracy: accu,
                params: params * 1e6,
                madds: madds * 1e6,
                metrics: cells
                    .iter()
                    .map(|(k, v)| (k.to_string(), *v))
                    .collect(),
            }
        };
        vec![
            row("mobilenet_v1@1.25", 0.751, 6.25, 883.0, &[
                ("cpu_float", 54.7), ("cpu_uint8", 18.2), ("gpu", 7.12),
                ("dsp", 3.72), ("edgetpu", 2.84), ("mn_norm_avg", 1.36), ("mn_norm_max", 1.49),
            ]),
            row("mobilenet_v2@1.25", 0.753, 5.01, 487.0, &[
                ("cpu_float", 38.8), ("cpu_uint8", 16.6), ("gpu", 5.74),
                ("dsp", 4.97), ("edgetpu", 2.93), ("mn_norm_avg", 1.28), ("mn_norm_max", 1.62),
            ]),
            row("mobilenet_v3_large@1.0", 0.753, 5.45, 217.0, &[
                ("cpu_float", 20.3), ("cpu_uint8", 13.2), ("gpu", 5.61), ("dsp", 4.51),
            ]),
            row("mobilenet_v3_large_min@1.25", 0.749, 5.73, 346.0, &[
                ("cpu_float", 27.7), ("cpu_uint8", 12.6), ("gpu", 4.56),
                ("dsp", 3.81), ("edgetpu", 2.58), ("mn_norm_avg", 1.00), ("mn_norm_max", 1.25),
            ]),
            row("proxyless_mobile@1.0", 0.749, 4.05, 321.0, &[
                ("cpu_float", 27.6), ("cpu_uint8", 14.8), ("gpu", 5.92),
                ("dsp", 3.90), ("edgetpu", 3.09), ("mn_norm_avg", 1.14), ("mn_norm_max", 1.30),
            ]),
            row("mobilenet_edgetpu@1.0", 0.762, 4.05, 991.0, &[
                ("cpu_float", 59.3), ("cpu_uint8", 19.4), ("gpu", 7.52),
                ("dsp", 4.29), ("edgetpu", 2.67), ("mn_norm_avg", 1.44), ("mn_norm_max", 1.61),
            ]),
            row("multi_avg@1.0", 0.758, 4.91, 433.0, &[
                ("cpu_float", 31.0), ("cpu_uint8", 13.9), ("gpu", 5.40),
                ("dsp", 3.81), ("edgetpu", 2.40), ("mn_norm_avg", 1.06), ("mn_norm_max", 1.25),
            ]),
            row("multi_max@1.0", 0.749, 4.39, 349.0, &[
                ("cpu_float", 25.2), ("cpu_uint8", 11.7), ("gpu", 4.47),
                ("dsp", 3.38), ("edgetpu", 2.22), ("mn_norm_avg", 0.91), ("mn_norm_max", 1.10),
            ]),
        ]
    }

    /// Independent dominance scan used to verify `pareto_front`.
    fn brute_force_front(points: &[TradeoffPoint], key: &str) -> Vec<String> {
        let mut ids: Vec<String> = points
            .iter()
            .filter(|p| {
                !points.iter().any(|q| {
                    let (ql, pl) = (q.metrics[key], p.metrics[key]);
                    ql <= pl && q.accuracy >= p.accuracy && (ql < pl || q.accuracy > p.accuracy)
                })
            })
            .map(|p| p.model_id.clone())
            .collect();
        ids.sort();
        ids
    }

    #[test]
    fn single_point_is_its_own_front() {
        let points = vec![point("only", 0.7, &[("cpu", 10.0)])];
        let front = pareto_front(&points, "cpu").unwrap();
        assert_eq!(front.len(), 1);
    }

    #[test]
    fn tied_duplicates_are_both_kept() {
        let points = vec![
            point("a", 0.7, &[("cpu", 10.0)]),
            point("b", 0.7, &[("cpu", 10.0)]),
        ];
        let front = pareto_front(&points, "cpu").unwrap();
        assert_eq!(front.len(), 2);
    }

    #[test]
    fn published_rows_front_on_cpu_float() {
        let rows = published_rows();
        let front = pareto_front(&rows, "cpu_float").unwrap();
        let ids: Vec<&str> = front.iter().map(|p| p.model_id.as_str()).collect();
        assert_eq!(
            ids,
            vec!["mobilenet_v3_large@1.0", "multi_avg@1.0", "mobilenet_edgetpu@1.0"]
        );
        // brute-force cross-check
        let mut sorted = ids.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        sorted.sort();
        assert_eq!(sorted, brute_force_front(&rows, "cpu_float"));
    }

    #[test]
    fn published_normalized_max_ordering_holds() {
        let rows = published_rows();
        let multi_max = rows.iter().find(|p| p.model_id == "multi_max@1.0").unwrap();
        let v1 = rows
            .iter()
            .find(|p| p.model_id == "mobilenet_v1@1.25")
            .unwrap();
        assert!(multi_max.metrics["mn_norm_max"] < v1.metrics["mn_norm_max"]);
    }

    #[test]
    fn front_is_permutation_and_monotone_transform_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let points: Vec<TradeoffPoint> = (0..60)
            .map(|i| {
                point(
                    &format!("m{i}"),
                    0.5 + 0.4 * rng.gen::<f64>(),
                    &[("lat", 1.0 + 99.0 * rng.gen::<f64>())],
                )
            })
            .collect();
        let mut ids: Vec<String> = pareto_front(&points, "lat")
            .unwrap()
            .iter()
            .map(|p| p.model_id.clone())
            .collect();
        ids.sort();

        let mut shuffled = points.clone();
        use rand::seq::SliceRandom;
        shuffled.shuffle(&mut rng);
        let mut shuffled_ids: Vec<String> = pareto_front(&shuffled, "lat")
            .unwrap()
            .iter()
            .map(|p| p.model_id.clone())
            .collect();
        shuffled_ids.sort();
        assert_eq!(ids, shuffled_ids);

        // strictly increasing transform of the latency axis
        let transformed: Vec<TradeoffPoint> = points
            .iter()
            .map(|p| {
                let mut t = p.clone();
                let v = t.metrics["lat"];
                t.metrics.insert("lat".to_string(), (1.0 + v).ln());
                t
            })
            .collect();
        let mut transformed_ids: Vec<String> = pareto_front(&transformed, "lat")
            .unwrap()
            .iter()
            .map(|p| p.model_id.clone())
            .collect();
        transformed_ids.sort();
        assert_eq!(ids, transformed_ids);
    }

    #[test]
    fn front_is_idempotent_and_dominates_the_rest() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let points: Vec<TradeoffPoint> = (0..80)
            .map(|i| {
                point(
                    &format!("m{i}"),
                    0.5 + 0.4 * rng.gen::<f64>(),
                    &[("lat", 1.0 + 99.0 * rng.gen::<f64>())],
                )
            })
            .collect();
        let front = pareto_front(&points, "lat").unwrap();
        let again = pareto_front(&front, "lat").unwrap();
        assert_eq!(front, again);

        let front_ids: std::collections::HashSet<&str> =
            front.iter().map(|p| p.model_id.as_str()).collect();
        for p in &points {
            if !front_ids.contains(p.model_id.as_str()) {
                assert!(
                    front.iter().any(|q| {
                        q.metrics["lat"] <= p.metrics["lat"]
                            && q.accuracy >= p.accuracy
                            && (q.metrics["lat"] < p.metrics["lat"] || q.accuracy > p.accuracy)
                    }),
                    "excluded point {} is not dominated by the front",
                    p.model_id
                );
            }
        }
    }

    #[test]
    fn missing_latency_key_is_an_error() {
        let points = vec![point("a", 0.7, &[("cpu", 10.0)])];
        assert!(matches!(
            pareto_front(&points, "gpu"),
            Err(Error::MissingMetric { .. })
        ));
    }

    #[test]
    fn single_model_is_best_everywhere() {
        let norm = NormFactors::explicit(
            [("cpu".to_string(), 10.0), ("dsp".to_string(), 2.0)]
                .into_iter()
                .collect(),
        )
        .unwrap();
        let points = vec![point("only", 0.7, &[("cpu", 10.0), ("dsp", 2.0)])];
        let table = comparison_table(&points, &norm).unwrap();
        assert!(table.rows[0].best.iter().all(|&b| b));
    }

    #[test]
    fn unsupported_rows_get_markers_and_no_norm_metrics() {
        let norm = NormFactors::explicit(
            [("cpu".to_string(), 10.0), ("dsp".to_string(), 2.0)]
                .into_iter()
                .collect(),
        )
        .unwrap();
        let points = vec![
            point("full", 0.7, &[("cpu", 20.0), ("dsp", 4.0)]),
            point("partial", 0.8, &[("cpu", 5.0)]),
        ];
        let table = comparison_table(&points, &norm).unwrap();
        let dsp_col = table.columns.iter().position(|c| c == "dsp").unwrap();
        let avg_col = table
            .columns
            .iter()
            .position(|c| c == "mn_norm_avg")
            .unwrap();
        assert_eq!(table.rows[1].cells[dsp_col], None);
        assert_eq!(table.rows[1].cells[avg_col], None);
        // "full" wins dsp despite "partial" being absent there
        assert!(table.rows[0].best[dsp_col]);
        assert!(!table.rows[1].best[dsp_col]);
        let csv = table.to_csv().unwrap();
        assert!(csv.contains(",x,"));
    }

    #[test]
    fn normalized_columns_delegate_to_the_metric_functions() {
        let norm = NormFactors::explicit(
            [("cpu".to_string(), 10.0), ("dsp".to_string(), 2.0)]
                .into_iter()
                .collect(),
        )
        .unwrap();
        let points = vec![point("m", 0.7, &[("cpu", 20.0), ("dsp", 3.0)])];
        let table = comparison_table(&points, &norm).unwrap();
        let avg_col = table.columns.iter().position(|c| c == "mn_norm_avg").unwrap();
        let max_col = table.columns.iter().position(|c| c == "mn_norm_max").unwrap();
        let vector = LatencyVector::new(
            [("cpu".to_string(), 20.0), ("dsp".to_string(), 3.0)]
                .into_iter()
                .collect(),
        );
        assert!(
            (table.rows[0].cells[avg_col].unwrap() - f_avg(&vector, &norm).unwrap()).abs()
                < 1e-9
        );
        assert!(
            (table.rows[0].cells[max_col].unwrap() - f_max(&vector, &norm).unwrap()).abs()
                < 1e-9
        );
    }

    #[test]
    fn tradeoff_csv_round_trips_and_orders_series() {
        let points = vec![
            point("mnv1@1.25", 0.751, &[("cpu", 54.7)]),
            point("mnv1@0.75", 0.684, &[("cpu", 21.3)]),
            point("mnv1@1.0", 0.721, &[("cpu", 38.0)]),
        ];
        let mut buffer = Vec::new();
        emit_tradeoff_csv(&points, "cpu", &mut buffer).unwrap();
        let rows = read_tradeoff_csv(&buffer[..]).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.series == "mnv1"));
        assert!(rows.windows(2).all(|w| w[0].x <= w[1].x));
        // exact values survive the round trip
        assert_eq!(rows[2].x, 54.7);
        assert_eq!(rows[2].y, 0.751);
    }

    #[test]
    fn empty_point_list_emits_header_only() {
        let mut buffer = Vec::new();
        emit_tradeoff_csv(&[], "cpu", &mut buffer).unwrap();
        assert_eq!(String::from_utf8(buffer).unwrap(), "model_id,series,x,y\n");
    }

    #[test]
    fn points_csv_round_trips_with_unsupported_markers() {
        let csv = "model_id,accuracy,params,madds,cpu_float,edgetpu\n\
                   a,0.75,1000000,20000000,10.5,x\n\
                   b,0.76,2000000,30000000,12.5,2.2\n";
        let set = read_points_csv(csv.as_bytes()).unwrap();
        assert_eq!(set.points.len(), 2);
        assert_eq!(set.points[0].metric("edgetpu"), None);
        assert_eq!(set.points[1].metric("edgetpu"), Some(2.2));
        let mut buffer = Vec::new();
        write_points_csv(&set, &mut buffer).unwrap();
        assert_eq!(String::from_utf8(buffer).unwrap(), csv.replace("                   ", ""));
    }

    #[test]
    fn points_csv_rejects_wrong_header() {
        let csv = "id,acc\nx,0.5\n";
        assert!(read_points_csv(csv.as_bytes()).is_err());
    }
}
