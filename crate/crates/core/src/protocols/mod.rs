//! Cut-based allocation protocols.
//!
//! Every protocol takes explicit per-agent partitions, returns an allocation
//! together with the guarantee it claims and a trace of the cuts it made, and
//! re-verifies that guarantee before returning. Agents are addressed by
//! position: in the three- and four-agent protocols position 0 is the agent
//! with the most parts.
//!
//! When a step that subadditivity guarantees fails, the protocol returns the
//! concrete violated inequality instead of an allocation.

mod dispatch;
mod four;
mod three;
mod two;
mod two_types;

use std::fmt;

use thiserror::Error;

use crate::cuts::{is_half, Side};
use crate::items::ItemSet;
use crate::mms::{verify_alpha_mms_p, Verification, VerifyError};
use crate::model::{Allocation, Instance, Partition, ThresholdVector};
use crate::valuations::ValuationOracle;
use crate::{q, Rational};

pub use dispatch::{dispatch_three, solve, Dispatch, HalfMode, Impossibility, ImpossibilityFamily};
pub use four::four_agents_3344;
pub use three::{three_agents_322, three_agents_422, three_agents_431, three_agents_521};
pub use two::cut_and_choose_two;
pub use two_types::{two_types, AgentType};

/// `v(first) + v(second) < v(first ∪ second)` for one agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationEvidence {
    pub agent: usize,
    pub first: ItemSet,
    pub second: ItemSet,
    pub first_value: Rational,
    pub second_value: Rational,
    pub union_value: Rational,
}

impl ViolationEvidence {
    pub fn new(agent: usize, v: &ValuationOracle, first: ItemSet, second: ItemSet) -> Self {
        ViolationEvidence {
            agent,
            first,
            second,
            first_value: v.value(first),
            second_value: v.value(second),
            union_value: v.value(first | second),
        }
    }

    /// True if the recorded values really violate subadditivity.
    pub fn is_violation(&self) -> bool {
        self.first_value + self.second_value < self.union_value
    }
}

impl fmt::Display for ViolationEvidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "agent {}: v({}) + v({}) = {} + {} < {} = v({})",
            self.agent,
            self.first,
            self.second,
            self.first_value,
            self.second_value,
            self.union_value,
            self.first | self.second
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("valuation is not subadditive: {0}")]
    SubadditivityViolation(ViolationEvidence),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("agent {agent} receives {value}, below its threshold {threshold}")]
    PostconditionFailed {
        agent: usize,
        value: Rational,
        threshold: Rational,
    },
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

/// One recorded step of a protocol run. Agent indices are positions in the
/// instance the protocol was called with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceEvent {
    /// A cut offered to `agent` over `partition`; `satisfied` lists the part
    /// indices whose piece on `side` was kept.
    Cut {
        agent: usize,
        cut: ItemSet,
        side: Side,
        satisfied: Vec<usize>,
    },
    /// A renaming of `agent`'s parts: new part `k` is old part `order[k]`.
    Relabel { agent: usize, order: Vec<usize> },
    /// A tentative partial allocation.
    Candidate {
        id: usize,
        bundles: Vec<(usize, ItemSet)>,
    },
    /// Attempt to finish a candidate with cut-and-choose between two agents.
    Closing {
        candidate: usize,
        agents: (usize, usize),
        success: bool,
    },
    /// A disjointness requirement between sets, checked as a set predicate.
    Disjoint { label: String, holds: bool },
    /// One level of a recursive protocol.
    Level { depth: usize, agents: Vec<usize> },
    /// Which candidate became the final allocation.
    Exit { candidate: usize },
}

/// An allocation together with the α-MMS(P) guarantee it satisfies and the
/// steps that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtocolCertificate {
    pub protocol: String,
    pub allocation: Allocation,
    pub alpha: ThresholdVector,
    pub partitions: Vec<Partition>,
    pub trace: Vec<TraceEvent>,
    /// Original agent index of each protocol position.
    pub agent_order: Vec<usize>,
}

impl ProtocolCertificate {
    /// Re-checks the claimed guarantee against `inst`.
    pub fn recheck(&self, inst: &Instance) -> Result<Verification, VerifyError> {
        verify_alpha_mms_p(&self.allocation, inst, &self.alpha, &self.partitions)
    }

    /// The exit recorded in the trace, if any.
    pub fn exit(&self) -> Option<usize> {
        self.trace.iter().rev().find_map(|e| match e {
            TraceEvent::Exit { candidate } => Some(*candidate),
            _ => None,
        })
    }

    /// Maps positions back to original agents: position `k` becomes agent
    /// `order[k]` in allocation, thresholds, partitions and trace.
    pub(crate) fn unpermute(mut self, order: &[usize]) -> Self {
        let n = order.len();
        let mut bundles = vec![ItemSet::EMPTY; n];
        let mut alpha = vec![Rational::from_integer(0); n];
        let mut partitions: Vec<Option<Partition>> = vec![None; n];
        for (pos, &agent) in order.iter().enumerate() {
            bundles[agent] = self.allocation.bundle(pos);
            alpha[agent] = self.alpha.get(pos);
            partitions[agent] = Some(self.partitions[pos].clone());
        }
        let map = |a: usize| order[a];
        for e in &mut self.trace {
            match e {
                TraceEvent::Cut { agent, .. } | TraceEvent::Relabel { agent, .. } => {
                    *agent = map(*agent)
                }
                TraceEvent::Candidate { bundles, .. } => {
                    for (a, _) in bundles.iter_mut() {
                        *a = map(*a);
                    }
                }
                TraceEvent::Closing { agents, .. } => *agents = (map(agents.0), map(agents.1)),
                TraceEvent::Level { agents, .. } => {
                    for a in agents.iter_mut() {
                        *a = map(*a);
                    }
                }
                TraceEvent::Disjoint { .. } | TraceEvent::Exit { .. } => {}
            }
        }
        self.allocation = Allocation::new(bundles);
        self.alpha = ThresholdVector::new(alpha).expect("permuted thresholds stay in range");
        self.partitions = partitions
            .into_iter()
            .map(|p| p.expect("total order"))
            .collect();
        self.agent_order = order.iter().map(|&k| self.agent_order[k]).collect();
        self
    }
}

pub(crate) fn half() -> Rational {
    q(1, 2)
}

pub(crate) fn check_partitions(
    inst: &Instance,
    partitions: &[Partition],
    sizes: &[usize],
) -> Result<(), ProtocolError> {
    if inst.agents() != sizes.len() || partitions.len() != sizes.len() {
        return Err(ProtocolError::InvalidInput(format!(
            "expected {} agents and partitions, got {} and {}",
            sizes.len(),
            inst.agents(),
            partitions.len()
        )));
    }
    for (i, (p, &s)) in partitions.iter().zip(sizes).enumerate() {
        if p.len() != s {
            return Err(ProtocolError::InvalidInput(format!(
                "agent {i} needs a partition into {s} parts, got {}",
                p.len()
            )));
        }
        if p.ground() != inst.ground() {
            return Err(ProtocolError::InvalidInput(format!(
                "partition of agent {i} covers {} instead of all {} items",
                p.ground(),
                inst.m()
            )));
        }
    }
    Ok(())
}

/// The piece of `part` on one side of `cut` worth at least half of `part`,
/// trying `prefer` first.
pub(crate) fn satisfied_piece(
    agent: usize,
    v: &ValuationOracle,
    part: ItemSet,
    cut: ItemSet,
    prefer: Side,
) -> Result<(Side, ItemSet), ProtocolError> {
    let other = match prefer {
        Side::Cut => Side::Complement,
        Side::Complement => Side::Cut,
    };
    for side in [prefer, other] {
        let piece = side.region(cut, part);
        if is_half(v, piece, part) {
            return Ok((side, piece));
        }
    }
    Err(ProtocolError::SubadditivityViolation(
        ViolationEvidence::new(agent, v, part & cut, part - cut),
    ))
}

/// Fails with evidence if `part` has a satisfied piece on neither side of `cut`.
pub(crate) fn audit_cut(
    agent: usize,
    v: &ValuationOracle,
    p: &Partition,
    cut: ItemSet,
) -> Result<(), ProtocolError> {
    for &part in p.parts() {
        satisfied_piece(agent, v, part, cut, Side::Cut)?;
    }
    Ok(())
}

/// A participant in a two-agent step.
#[derive(Debug, Clone, Copy)]
pub struct Party<'a> {
    pub agent: usize,
    pub valuation: &'a ValuationOracle,
}

/// Cut-and-choose on `ground` between a chooser who values `ground` at least
/// `chooser_base` and a divider whose two `halves` are each worth at least
/// `divider_threshold` to it.
///
/// The chooser takes its favourite half (lowest index among maxima) and the
/// divider the other. Returns `(divider bundle, chooser bundle)`; the divider
/// gets at least `divider_threshold` and the chooser at least half of
/// `chooser_base`.
pub fn extend_cut_and_choose(
    divider: Party<'_>,
    chooser: Party<'_>,
    ground: ItemSet,
    halves: (ItemSet, ItemSet),
    divider_threshold: Rational,
    chooser_base: Rational,
) -> Result<(ItemSet, ItemSet), ProtocolError> {
    let (h0, h1) = halves;
    if !h0.is_disjoint(h1) || (h0 | h1) != ground {
        return Err(ProtocolError::Precondition(format!(
            "halves {h0} and {h1} do not partition {ground}"
        )));
    }
    for h in [h0, h1] {
        let value = divider.valuation.value(h);
        if value < divider_threshold {
            return Err(ProtocolError::Precondition(format!(
                "agent {} values half {h} at {value} < {divider_threshold}",
                divider.agent
            )));
        }
    }
    let total = chooser.valuation.value(ground);
    if total < chooser_base {
        return Err(ProtocolError::Precondition(format!(
            "agent {} values {ground} at {total} < {chooser_base}",
            chooser.agent
        )));
    }
    let (v0, v1) = (chooser.valuation.value(h0), chooser.valuation.value(h1));
    let (pick, rest) = if v0 >= v1 { (h0, h1) } else { (h1, h0) };
    if v0.max(v1) * 2 < total {
        return Err(ProtocolError::SubadditivityViolation(
            ViolationEvidence::new(chooser.agent, chooser.valuation, h0, h1),
        ));
    }
    Ok((rest, pick))
}

/// Which base allocation a disjoint extension kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensionBase {
    First,
    Second,
}

/// Result of [`disjoint_extension`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extension {
    pub allocation: Allocation,
    pub base: ExtensionBase,
    /// Index of the part of the last agent's partition that was used.
    pub part: usize,
}

/// Extends one of two partial allocations `a`, `b` over the first agents by
/// a bundle for one more agent with valuation `v` and partition `p`.
///
/// Looks for a part `X` of `p` on which the items of `a` and of `b` are
/// disjoint. If `X ∩ ∪a` is worth half of `X` it goes to the new agent on
/// top of `b`; otherwise `X \ ∪a` is, and it goes on top of `a`.
pub fn disjoint_extension(
    a: &Allocation,
    b: &Allocation,
    p: &Partition,
    agent: usize,
    v: &ValuationOracle,
) -> Result<Extension, ProtocolError> {
    if a.agents() != b.agents() {
        return Err(ProtocolError::InvalidInput(
            "base allocations have different agent counts".into(),
        ));
    }
    let (ua, ub) = (a.allocated(), b.allocated());
    let mut evidence = None;
    for (index, &x) in p.parts().iter().enumerate() {
        if !(x & ua).is_disjoint(x & ub) {
            continue;
        }
        let extend = |base: &Allocation, piece: ItemSet| {
            let mut bundles = base.bundles().to_vec();
            bundles.push(piece);
            Allocation::new(bundles)
        };
        if is_half(v, x & ua, x) {
            return Ok(Extension {
                allocation: extend(b, x & ua),
                base: ExtensionBase::Second,
                part: index,
            });
        }
        if is_half(v, x - ua, x) {
            return Ok(Extension {
                allocation: extend(a, x - ua),
                base: ExtensionBase::First,
                part: index,
            });
        }
        evidence.get_or_insert_with(|| ViolationEvidence::new(agent, v, x & ua, x - ua));
    }
    match evidence {
        Some(e) => Err(ProtocolError::SubadditivityViolation(e)),
        None => Err(ProtocolError::Precondition(format!(
            "no part of agent {agent} sees the two base allocations disjointly"
        ))),
    }
}

/// Builds the certificate and re-verifies it.
pub(crate) fn certify(
    inst: &Instance,
    protocol: &str,
    allocation: Allocation,
    alpha: Vec<Rational>,
    partitions: Vec<Partition>,
    trace: Vec<TraceEvent>,
) -> Result<ProtocolCertificate, ProtocolError> {
    let alpha =
        ThresholdVector::new(alpha).map_err(|e| ProtocolError::InvalidInput(e.to_string()))?;
    let cert = ProtocolCertificate {
        protocol: protocol.to_string(),
        allocation,
        alpha,
        partitions,
        trace,
        agent_order: (0..inst.agents()).collect(),
    };
    let check = cert.recheck(inst)?;
    if let Some(agent) = check.first_violation() {
        return Err(ProtocolError::PostconditionFailed {
            agent,
            value: check.values[agent],
            threshold: check.thresholds[agent],
        });
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn units(m: usize) -> ValuationOracle {
        ValuationOracle::additive(vec![q(1, 1); m])
    }

    #[test]
    fn extend_gives_chooser_the_better_half() {
        let va = units(4);
        let vb = ValuationOracle::additive(vec![q(3, 1), q(0, 1), q(1, 1), q(0, 1)]);
        let ground = ItemSet::full(4);
        let halves = (ItemSet::from_items([0, 1]), ItemSet::from_items([2, 3]));
        let (a, b) = extend_cut_and_choose(
            Party {
                agent: 0,
                valuation: &va,
            },
            Party {
                agent: 1,
                valuation: &vb,
            },
            ground,
            halves,
            q(2, 1),
            q(4, 1),
        )
        .unwrap();
        assert_eq!(b, halves.0);
        assert_eq!(a, halves.1);
    }

    #[test]
    fn extend_with_zero_thresholds_accepts_any_split() {
        let v = units(3);
        let ground = ItemSet::full(3);
        let halves = (ItemSet::EMPTY, ground);
        let p = Party {
            agent: 0,
            valuation: &v,
        };
        assert!(extend_cut_and_choose(p, p, ground, halves, q(0, 1), q(0, 1)).is_ok());
    }

    #[test]
    fn extend_audits_preconditions() {
        let v = units(4);
        let ground = ItemSet::full(4);
        let p = Party {
            agent: 0,
            valuation: &v,
        };
        let bad = (ItemSet::from_items([0]), ItemSet::from_items([1, 2, 3]));
        assert!(matches!(
            extend_cut_and_choose(p, p, ground, bad, q(2, 1), q(0, 1)),
            Err(ProtocolError::Precondition(_))
        ));
    }

    #[test]
    fn extension_with_untouched_part() {
        let v = units(6);
        let a = Allocation::new(vec![ItemSet::from_items([0, 1])]);
        let b = Allocation::new(vec![ItemSet::from_items([2, 3])]);
        let p = Partition::of_items(
            6,
            vec![
                ItemSet::from_items([0, 1, 2, 3]),
                ItemSet::from_items([4, 5]),
            ],
        )
        .unwrap();
        let e = disjoint_extension(&a, &b, &p, 1, &v).unwrap();
        assert_eq!(e.part, 0);
        assert_eq!(e.base, ExtensionBase::Second);
        assert_eq!(e.allocation.bundle(1), ItemSet::from_items([0, 1]));

        let b2 = Allocation::new(vec![ItemSet::from_items([0])]);
        let e = disjoint_extension(&a, &b2, &p, 1, &v).unwrap();
        assert_eq!(e.part, 1);
        assert_eq!(e.allocation.bundle(1), ItemSet::from_items([4, 5]));
    }
}
