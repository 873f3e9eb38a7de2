//! Growth histories from timestamped transaction lists.
//!
//! Input rows are `receiver,sender,timestamp`. Nodes arrive in order of
//! first appearance, each attaching to the counterparty of its first
//! transaction; transactions between nodes that both already exist are
//! dropped and counted.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GrowthHistory;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TxRecord {
    pub receiver: String,
    pub sender: String,
    pub timestamp: i64,
}

/// Records sorted by timestamp.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RawEdgeList {
    pub records: Vec<TxRecord>,
    /// Adjacent input pairs whose timestamps were out of order.
    pub reordered: usize,
}

impl RawEdgeList {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Parses `receiver,sender,timestamp` CSV (with that header) and sorts the
/// records stably by timestamp.
pub fn parse_edges<R: Read>(reader: R) -> Result<RawEdgeList> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let expected = ["receiver", "sender", "timestamp"];
    if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h.trim() != e) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header `receiver,sender,timestamp`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut records = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let line = i as u64 + 2;
        let row = row?;
        if row.len() != 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected 3 fields, found {}", row.len()),
            });
        }
        let receiver = row[0].trim();
        let sender = row[1].trim();
        if receiver.is_empty() || sender.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty address".into(),
            });
        }
        let timestamp = row[2].trim().parse::<i64>().map_err(|e| Error::Parse {
            line,
            message: format!("bad timestamp `{}`: {e}", &row[2]),
        })?;
        records.push(TxRecord {
            receiver: receiver.to_string(),
            sender: sender.to_string(),
            timestamp,
        });
    }
    if records.is_empty() {
        return Err(Error::EmptyData("no transaction records".into()));
    }
    let reordered = records
        .windows(2)
        .filter(|w| w[1].timestamp < w[0].timestamp)
        .count();
    records.sort_by_key(|r| r.timestamp);
    Ok(RawEdgeList { records, reordered })
}

/// Removes records with either endpoint starting with a blocked prefix.
/// Returns the kept records and the number removed.
pub fn filter_addresses(edges: &RawEdgeList, prefix_blocklist: &[String]) -> (RawEdgeList, usize) {
    let blocked = |id: &str| prefix_blocklist.iter().any(|p| id.starts_with(p.as_str()));
    let records: Vec<TxRecord> = edges
        .records
        .iter()
        .filter(|r| !blocked(&r.receiver) && !blocked(&r.sender))
        .cloned()
        .collect();
    let removed = edges.records.len() - records.len();
    if records.is_empty() && !edges.records.is_empty() {
        log::warn!("the blocklist removed every record");
    }
    (
        RawEdgeList {
            records,
            reordered: edges.reordered,
        },
        removed,
    )
}

/// How nodes are assigned to communities.
#[derive(Debug, Clone, PartialEq)]
pub enum LabelingRule {
    /// The `max(1, floor(q N))` most active of `N` ids form community 1,
    /// the rest community 2. Activity is the number of records an id takes
    /// part in; ties go to the lexicographically smaller id.
    TopFraction(f64),
    /// Known memberships (1-based) over `k` communities.
    Explicit {
        labels: HashMap<String, u32>,
        k: usize,
    },
}

impl LabelingRule {
    pub fn top_fraction(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "top fraction {q} must lie strictly between 0 and 1"
            )));
        }
        Ok(Self::TopFraction(q))
    }

    fn num_communities(&self) -> usize {
        match self {
            Self::TopFraction(_) => 2,
            Self::Explicit { k, .. } => *k,
        }
    }
}

/// Counts reported alongside a built history.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DropReport {
    /// Records between two nodes that had both already arrived.
    pub dropped_existing_pair: usize,
    /// Records removed by the address blocklist.
    pub dropped_blocked: usize,
    /// Out-of-order adjacent timestamps in the input.
    pub reordered: usize,
    /// Records whose two endpoints were both new; the sender arrives first
    /// with a self-loop and the receiver attaches to it.
    pub seeded_self_loops: usize,
    pub records_used: usize,
    pub nodes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IngestResult {
    pub history: GrowthHistory,
    /// Address of each node in arrival order.
    pub ids: Vec<String>,
    pub report: DropReport,
}

/// Builds a labeled history from the first `n_limit` records (all of them
/// when `None`).
pub fn build_history(
    edges: &RawEdgeList,
    n_limit: Option<usize>,
    rule: &LabelingRule,
) -> Result<IngestResult> {
    if edges.is_empty() {
        return Err(Error::EmptyData("no transaction records".into()));
    }
    let take = match n_limit {
        Some(n) if n > edges.len() => {
            log::info!(
                "n-limit {n} exceeds the {} available records; using all",
                edges.len()
            );
            edges.len()
        }
        Some(0) => return Err(Error::InvalidParameter("n-limit must be positive".into())),
        Some(n) => n,
        None => edges.len(),
    };
    let window = &edges.records[..take];
    let mut report = DropReport {
        reordered: edges.reordered,
        records_used: take,
        ..DropReport::default()
    };
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut ids: Vec<String> = Vec::new();
    let mut targets: Vec<usize> = Vec::new();
    let mut arrive = |id: &str, target: Option<usize>| {
        let node = ids.len() + 1;
        ids.push(id.to_string());
        targets.push(target.unwrap_or(node));
        node
    };
    for rec in window {
        let (r, s) = (rec.receiver.as_str(), rec.sender.as_str());
        match (index.get(r).copied(), index.get(s).copied()) {
            (Some(_), Some(_)) => report.dropped_existing_pair += 1,
            (None, Some(t)) => {
                let v = arrive(r, Some(t));
                index.insert(r, v);
            }
            (Some(t), None) => {
                let v = arrive(s, Some(t));
                index.insert(s, v);
            }
            (None, None) if r == s => {
                let v = arrive(r, None);
                index.insert(r, v);
            }
            (None, None) => {
                let vs = arrive(s, None);
                index.insert(s, vs);
                let vr = arrive(r, Some(vs));
                index.insert(r, vr);
                report.seeded_self_loops += 1;
            }
        }
    }
    report.nodes = ids.len();

    let labels: Vec<u32> = match rule {
        LabelingRule::TopFraction(q) => {
            let mut activity: BTreeMap<&str, u64> = BTreeMap::new();
            for rec in window {
                *activity.entry(&rec.receiver).or_default() += 1;
                if rec.sender != rec.receiver {
                    *activity.entry(&rec.sender).or_default() += 1;
                }
            }
            let mut ranked: Vec<(&str, u64)> = activity.into_iter().collect();
            ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
            let top = ((q * ranked.len() as f64).floor() as usize).max(1);
            let supers: std::collections::HashSet<&str> =
                ranked[..top].iter().map(|(id, _)| *id).collect();
            ids.iter()
                .map(|id| if supers.contains(id.as_str()) { 1 } else { 2 })
                .collect()
        }
        LabelingRule::Explicit { labels, .. } => ids
            .iter()
            .map(|id| {
                labels
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::Labeling(format!("no membership given for `{id}`")))
            })
            .collect::<Result<_>>()?,
    };
    let history = GrowthHistory::from_targets_labeled(&targets, &labels, rule.num_communities())?;
    Ok(IngestResult {
        history,
        ids,
        report,
    })
}

/// [`filter_addresses`] followed by [`build_history`], with the blocked
/// count recorded in the report.
pub fn ingest_records(
    edges: &RawEdgeList,
    prefix_blocklist: &[String],
    n_limit: Option<usize>,
    rule: &LabelingRule,
) -> Result<IngestResult> {
    let (kept, removed) = filter_addresses(edges, prefix_blocklist);
    let mut out = build_history(&kept, n_limit, rule)?;
    out.report.dropped_blocked = removed;
    Ok(out)
}

/// One record per event of `history`: node `k` (id `v{k}`) as receiver, its
/// target as sender, timestamp `k`. [`build_history`] maps these records back
/// onto the same history.
pub fn history_to_transactions(history: &GrowthHistory) -> Vec<TxRecord> {
    history
        .events()
        .iter()
        .map(|ev| TxRecord {
            receiver: format!("v{}", ev.node),
            sender: format!("v{}", ev.target),
            timestamp: ev.node as i64,
        })
        .collect()
}

/// Memberships of the ids produced by [`history_to_transactions`].
pub fn history_labels(history: &GrowthHistory) -> Option<HashMap<String, u32>> {
    let labels = history.labels()?;
    Some(
        labels
            .into_iter()
            .enumerate()
            .map(|(i, l)| (format!("v{}", i + 1), l))
            .collect(),
    )
}

pub fn write_transactions_csv<W: Write>(writer: W, records: &[TxRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads `id,community` rows.
pub fn read_labels_csv<R: Read>(reader: R) -> Result<HashMap<String, u32>> {
    #[derive(Deserialize)]
    struct Row {
        id: String,
        community: u32,
    }
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = HashMap::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| Error::Parse {
            line: i as u64 + 2,
            message: e.to_string(),
        })?;
        if row.community == 0 {
            return Err(Error::Parse {
                line: i as u64 + 2,
                message: "communities are numbered from 1".into(),
            });
        }
        out.insert(row.id, row.community);
    }
    Ok(out)
}

pub fn write_labels_csv<W: Write>(writer: W, labels: &HashMap<String, u32>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    w.write_record(["id", "community"])?;
    let mut rows: Vec<_> = labels.iter().collect();
    rows.sort();
    for (id, c) in rows {
        w.write_record([id.as_str(), &c.to_string()])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
