//! Scenario files and report serialisation.
//!
//! Scenario JSON layout:
//!
//! ```json
//! {
//!   "horizon": 1,
//!   "tree": { "children": [[2]], "leaf_probs": [0.5, 0.5] },
//!   "d1": 0, "d2": 1,
//!   "s0_fin": [],
//!   "m_fin": [],
//!   "dividends": [[2.0], [1.0]],
//!   "agents": [
//!     { "eta2": [1.0], "xi_n": [0.0, 0.0], "preference": { "kind": "quadratic", "gamma": 10.0 } }
//!   ],
//!   "prices": [[1.47], [2.0], [1.0]]
//! }
//! ```
//!
//! `m_fin` holds one `d1`-vector per node in canonical order (it may be empty
//! when `d1 = 0`); `dividends` one `d2`-vector per leaf; the optional `prices`
//! block one `(d1 + d2)`-vector per node.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::{AdaptedProcess, PredictableProcess};
use crate::scenario::{AgentSpec, Scenario};
use crate::tree::FiltrationTree;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TreeFile {
    children: Vec<Vec<usize>>,
    leaf_probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    horizon: usize,
    tree: TreeFile,
    d1: usize,
    d2: usize,
    s0_fin: Vec<f64>,
    #[serde(default)]
    m_fin: Vec<Vec<f64>>,
    dividends: Vec<Vec<f64>>,
    agents: Vec<AgentSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prices: Option<Vec<Vec<f64>>>,
}

/// A parsed scenario together with an optional user-supplied price system.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioInput {
    pub scenario: Scenario,
    pub prices: Option<AdaptedProcess>,
}

fn process_from_rows(rows: &[Vec<f64>], dim: usize, tree: &FiltrationTree, what: &str) -> Result<AdaptedProcess> {
    if dim == 0 && rows.iter().all(|r| r.is_empty()) {
        return Ok(AdaptedProcess::zeros(tree, 0));
    }
    if rows.len() != tree.num_nodes() {
        return Err(Error::Parse(format!(
            "{what} has {} rows, expected one per node ({})",
            rows.len(),
            tree.num_nodes()
        )));
    }
    AdaptedProcess::from_rows(rows, dim)
        .ok_or_else(|| Error::Parse(format!("every {what} row must have length {dim}")))
}

/// Parses a scenario file. Structural problems (malformed JSON, tree shape,
/// row counts) are errors; economic constraints are left to [`Scenario::validate`].
pub fn parse_scenario(text: &str) -> Result<ScenarioInput> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if file.horizon != file.tree.children.len() {
        return Err(Error::Parse(format!(
            "horizon {} does not match the {} layers of tree.children",
            file.horizon,
            file.tree.children.len()
        )));
    }
    let tree = FiltrationTree::new(&file.tree.children, &file.tree.leaf_probs)?;
    if file.tree.leaf_probs.len() != tree.num_leaves() {
        return Err(Error::Parse(format!(
            "leaf_probs has {} entries, tree has {} leaves",
            file.tree.leaf_probs.len(),
            tree.num_leaves()
        )));
    }
    let m_fin = process_from_rows(&file.m_fin, file.d1, &tree, "m_fin")?;
    let prices = match &file.prices {
        Some(rows) => Some(process_from_rows(rows, file.d1 + file.d2, &tree, "prices")?),
        None => None,
    };
    Ok(ScenarioInput {
        scenario: Scenario {
            tree,
            d1: file.d1,
            d2: file.d2,
            s0_fin: file.s0_fin,
            m_fin,
            dividends: file.dividends,
            agents: file.agents,
        },
        prices,
    })
}

pub fn read_scenario(path: &Path) -> Result<ScenarioInput> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

/// Serialises a scenario (and optionally a price system) in the file layout.
pub fn scenario_to_json(s: &Scenario, prices: Option<&AdaptedProcess>) -> Result<String> {
    let file = ScenarioFile {
        horizon: s.tree.horizon(),
        tree: TreeFile {
            children: s.tree.branching().to_vec(),
            leaf_probs: s.tree.leaf_probs(),
        },
        d1: s.d1,
        d2: s.d2,
        s0_fin: s.s0_fin.clone(),
        m_fin: s.m_fin.rows(),
        dividends: s.dividends.clone(),
        agents: s.agents.clone(),
        prices: prices.map(|p| p.rows()),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

/// One row of a CSV report. Scalars leave `time`, `node` and `asset` empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvRow {
    pub quantity: String,
    pub time: Option<usize>,
    pub node: Option<usize>,
    pub asset: Option<usize>,
    pub value: f64,
}

impl CsvRow {
    pub fn scalar(quantity: impl Into<String>, value: f64) -> Self {
        Self {
            quantity: quantity.into(),
            time: None,
            node: None,
            asset: None,
            value,
        }
    }
}

/// Rows for an adapted process, one per (node, component).
pub fn adapted_rows(quantity: &str, tree: &FiltrationTree, x: &AdaptedProcess) -> Vec<CsvRow> {
    let mut out = Vec::new();
    for n in 0..x.num_nodes() {
        for j in 0..x.dim() {
            out.push(CsvRow {
                quantity: quantity.to_string(),
                time: Some(tree.time(n)),
                node: Some(n),
                asset: Some(j),
                value: x.get(n, j),
            });
        }
    }
    out
}

/// Rows for a predictable process; `time` is the end of the period the position is held over.
pub fn predictable_rows(quantity: &str, tree: &FiltrationTree, x: &PredictableProcess) -> Vec<CsvRow> {
    let mut out = Vec::new();
    for n in 0..tree.num_inner() {
        for j in 0..x.dim() {
            out.push(CsvRow {
                quantity: quantity.to_string(),
                time: Some(tree.time(n) + 1),
                node: Some(n),
                asset: Some(j),
                value: x.get(n, j),
            });
        }
    }
    out
}

pub fn write_csv<W: Write>(rows: &[CsvRow], writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(["quantity", "time", "node", "asset", "value"])?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[CsvRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;

    #[test]
    fn round_trip() {
        for s in [reference::coin_toss(), reference::financial_coin(), reference::coin_toss_mv()] {
            let text = scenario_to_json(&s, None).unwrap();
            let back = parse_scenario(&text).unwrap();
            assert_eq!(back.scenario, s);
            assert!(back.prices.is_none());
        }
        let s = reference::coin_toss();
        let p = AdaptedProcess::scalar(vec![0.1 + 0.2, 2.0, 1.0]);
        let back = parse_scenario(&scenario_to_json(&s, Some(&p)).unwrap()).unwrap();
        assert_eq!(back.prices.unwrap(), p);
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(parse_scenario("{"), Err(Error::Parse(_))));
        let s = reference::coin_toss();
        let text = scenario_to_json(&s, None).unwrap().replace("\"horizon\": 1", "\"horizon\": 2");
        assert!(matches!(parse_scenario(&text), Err(Error::Parse(_))));
        let text = scenario_to_json(&s, Some(&AdaptedProcess::scalar(vec![1.0, 2.0]))).unwrap();
        assert!(matches!(parse_scenario(&text), Err(Error::Parse(_))));
    }

    #[test]
    fn csv_layout() {
        let tree = FiltrationTree::one_period(&[0.5, 0.5]).unwrap();
        let mut rows = adapted_rows("price", &tree, &AdaptedProcess::scalar(vec![1.5, 2.0, 1.0]));
        rows.push(CsvRow::scalar("ell", 0.8));
        let text = csv_string(&rows).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "quantity,time,node,asset,value");
        assert_eq!(lines[1], "price,0,0,0,1.5");
        assert_eq!(lines[4], "ell,,,,0.8");
    }
}
