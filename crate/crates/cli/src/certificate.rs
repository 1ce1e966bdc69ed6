//! Certificate files written by `solve` and read by `verify`.
//!
//! Agents are numbered from 1 in `agent_order` and the trace; items are bit
//! positions. Serialization is deterministic, so a parsed certificate renders
//! back to the same bytes.

use mmslab_core::protocols::{ProtocolCertificate, TraceEvent};
use mmslab_core::{Allocation, Instance, ItemSet, Partition, ThresholdVector};
use serde::{Deserialize, Serialize};

use crate::format::Rat;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub instance: String,
    pub protocol: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand: Option<Vec<usize>>,
    pub alpha: Vec<Rat>,
    pub partitions: Vec<Vec<Vec<usize>>>,
    pub allocation: Vec<Vec<usize>>,
    pub agent_order: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit: Option<usize>,
    pub trace: Vec<TraceRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case", deny_unknown_fields)]
pub enum TraceRecord {
    Cut {
        agent: usize,
        cut: Vec<usize>,
        side: String,
        satisfied: Vec<usize>,
    },
    Relabel {
        agent: usize,
        order: Vec<usize>,
    },
    Candidate {
        id: usize,
        bundles: Vec<(usize, Vec<usize>)>,
    },
    Closing {
        candidate: usize,
        agents: (usize, usize),
        success: bool,
    },
    Disjoint {
        label: String,
        holds: bool,
    },
    Level {
        depth: usize,
        agents: Vec<usize>,
    },
    Exit {
        candidate: usize,
    },
}

fn items(s: ItemSet) -> Vec<usize> {
    s.iter().collect()
}

impl From<&TraceEvent> for TraceRecord {
    fn from(e: &TraceEvent) -> Self {
        match e {
            TraceEvent::Cut {
                agent,
                cut,
                side,
                satisfied,
            } => TraceRecord::Cut {
                agent: agent + 1,
                cut: items(*cut),
                side: side.name().to_string(),
                satisfied: satisfied.clone(),
            },
            TraceEvent::Relabel { agent, order } => TraceRecord::Relabel {
                agent: agent + 1,
                order: order.clone(),
            },
            TraceEvent::Candidate { id, bundles } => TraceRecord::Candidate {
                id: *id,
                bundles: bundles.iter().map(|&(a, s)| (a + 1, items(s))).collect(),
            },
            TraceEvent::Closing {
                candidate,
                agents,
                success,
            } => TraceRecord::Closing {
                candidate: *candidate,
                agents: (agents.0 + 1, agents.1 + 1),
                success: *success,
            },
            TraceEvent::Disjoint { label, holds } => TraceRecord::Disjoint {
                label: label.clone(),
                holds: *holds,
            },
            TraceEvent::Level { depth, agents } => TraceRecord::Level {
                depth: *depth,
                agents: agents.iter().map(|a| a + 1).collect(),
            },
            TraceEvent::Exit { candidate } => TraceRecord::Exit {
                candidate: *candidate,
            },
        }
    }
}

fn set_of(items: &[usize], m: usize, what: &str) -> Result<ItemSet, CliError> {
    match items.iter().find(|&&g| g >= m) {
        Some(g) => Err(CliError::Input(format!(
            "{what}: item {g} out of range for m = {m}"
        ))),
        None => Ok(ItemSet::from_items(items.iter().copied())),
    }
}

/// Partitions of all items, one per agent, as lists of item lists.
pub fn parse_partitions(raw: &[Vec<Vec<usize>>], m: usize) -> Result<Vec<Partition>, CliError> {
    raw.iter()
        .enumerate()
        .map(|(i, parts)| {
            let what = format!("partition of agent {}", i + 1);
            let sets = parts
                .iter()
                .map(|p| set_of(p, m, &what))
                .collect::<Result<Vec<_>, _>>()?;
            Partition::of_items(m, sets).map_err(|e| CliError::Input(format!("{what}: {e}")))
        })
        .collect()
}

pub fn render_partition(p: &Partition) -> Vec<Vec<usize>> {
    p.parts().iter().map(|&s| items(s)).collect()
}

impl CertificateFile {
    pub fn new(inst: &Instance, cert: &ProtocolCertificate, demand: Option<Vec<usize>>) -> Self {
        CertificateFile {
            instance: inst.label().to_string(),
            protocol: cert.protocol.clone(),
            demand,
            alpha: cert.alpha.as_slice().iter().copied().map(Rat).collect(),
            partitions: cert.partitions.iter().map(render_partition).collect(),
            allocation: cert
                .allocation
                .bundles()
                .iter()
                .map(|&b| items(b))
                .collect(),
            agent_order: cert.agent_order.iter().map(|a| a + 1).collect(),
            exit: cert.exit(),
            trace: cert.trace.iter().map(TraceRecord::from).collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("certificate: {e}")))
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn allocation(&self, m: usize) -> Result<Allocation, CliError> {
        let bundles = self
            .allocation
            .iter()
            .enumerate()
            .map(|(i, b)| set_of(b, m, &format!("bundle of agent {}", i + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Allocation::new(bundles))
    }

    pub fn alpha(&self) -> Result<ThresholdVector, CliError> {
        Ok(ThresholdVector::new(
            self.alpha.iter().map(|r| r.0).collect(),
        )?)
    }

    pub fn partitions(&self, m: usize) -> Result<Vec<Partition>, CliError> {
        parse_partitions(&self.partitions, m)
    }
}
