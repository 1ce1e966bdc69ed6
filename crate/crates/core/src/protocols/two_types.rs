use super::{
    audit_cut, certify, half, ProtocolCertificate, ProtocolError, TraceEvent, ViolationEvidence,
};
use crate::cuts::{max_desired_half, Side};
use crate::items::ItemSet;
use crate::model::{Allocation, Instance, Partition};

/// Which of the two shared valuations an agent holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentType {
    S,
    T,
}

struct Type<'a> {
    partition: &'a Partition,
    /// Indices of parts no allocated item touches.
    surviving: Vec<usize>,
}

impl Type<'_> {
    fn refresh(&mut self, allocated: ItemSet) {
        let p = self.partition;
        self.surviving.retain(|&j| p.part(j).is_disjoint(allocated));
    }
}

/// `n` agents, each holding one of two valuations; certifies `1/2` for every
/// agent against its type's `n`-part partition.
///
/// Each level cuts the majority type's surviving parts by the union of
/// `⌊k/2⌋` surviving parts of the minority type, where `k` agents remain,
/// and hands satisfied pieces to majority agents. Two remaining agents of
/// different types finish by cut-and-choose. The trace holds one
/// [`TraceEvent::Level`] per level.
pub fn two_types(
    inst: &Instance,
    types: &[AgentType],
    ps: &Partition,
    pt: &Partition,
) -> Result<ProtocolCertificate, ProtocolError> {
    let n = inst.agents();
    if n == 0 || types.len() != n {
        return Err(ProtocolError::InvalidInput(format!(
            "{} type labels for {n} agents",
            types.len()
        )));
    }
    for (name, p) in [("S", ps), ("T", pt)] {
        if p.len() != n || p.ground() != inst.ground() {
            return Err(ProtocolError::InvalidInput(format!(
                "type {name} needs a partition of all items into {n} parts"
            )));
        }
    }
    let representative = |t: AgentType| types.iter().position(|&x| x == t);
    for (i, &t) in types.iter().enumerate() {
        let r = representative(t).expect("type occurs");
        if inst.valuation(i) != inst.valuation(r) {
            return Err(ProtocolError::InvalidInput(format!(
                "agents {r} and {i} share a type but not a valuation"
            )));
        }
    }

    let mut state = [
        Type {
            partition: ps,
            surviving: (0..n).collect(),
        },
        Type {
            partition: pt,
            surviving: (0..n).collect(),
        },
    ];
    let slot = |t: AgentType| match t {
        AgentType::S => 0,
        AgentType::T => 1,
    };
    let mut bundles = vec![ItemSet::EMPTY; n];
    let mut allocated = ItemSet::EMPTY;
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut trace = Vec::new();
    let mut depth = 0;

    while !remaining.is_empty() {
        depth += 1;
        let k = remaining.len();
        let rest = inst.ground() - allocated;
        let of = |t: AgentType| -> Vec<usize> {
            remaining
                .iter()
                .copied()
                .filter(|&i| types[i] == t)
                .collect()
        };
        let (s_agents, t_agents) = (of(AgentType::S), of(AgentType::T));
        let served: Vec<usize>;
        if k == 1 {
            bundles[remaining[0]] = rest;
            served = remaining.clone();
        } else if s_agents.is_empty() || t_agents.is_empty() {
            let t = types[remaining[0]];
            let st = &state[slot(t)];
            if st.surviving.len() < k {
                return Err(ProtocolError::Precondition(format!(
                    "{} surviving parts for {k} agents",
                    st.surviving.len()
                )));
            }
            for (&agent, &j) in remaining.iter().zip(&st.surviving) {
                bundles[agent] = st.partition.part(j);
            }
            served = remaining.clone();
        } else {
            let (major, minor, major_agents) = if s_agents.len() >= t_agents.len() {
                (AgentType::S, AgentType::T, s_agents)
            } else {
                (AgentType::T, AgentType::S, t_agents)
            };
            let chooser = major_agents[0];
            let vx = inst.valuation(chooser);
            let minor_parts = &state[slot(minor)];
            if k == 2 {
                let h0 = minor_parts.partition.part(minor_parts.surviving[0]);
                let h1 = rest - h0;
                let (a, b) = (vx.value(h0), vx.value(h1));
                if a.max(b) * 2 < vx.value(rest) {
                    return Err(ProtocolError::SubadditivityViolation(
                        ViolationEvidence::new(chooser, vx, h0, h1),
                    ));
                }
                let (pick, other, side) = if a >= b {
                    (h0, h1, Side::Cut)
                } else {
                    (h1, h0, Side::Complement)
                };
                let other_agent = *remaining
                    .iter()
                    .find(|&&i| i != chooser)
                    .expect("two agents");
                bundles[chooser] = pick;
                bundles[other_agent] = other;
                trace.push(TraceEvent::Cut {
                    agent: chooser,
                    cut: h0,
                    side,
                    satisfied: vec![],
                });
                served = remaining.clone();
            } else {
                let cut = minor_parts.surviving[..k / 2]
                    .iter()
                    .fold(ItemSet::EMPTY, |acc, &j| {
                        acc | minor_parts.partition.part(j)
                    });
                let majors = &state[slot(major)];
                let parts: Vec<ItemSet> = majors
                    .surviving
                    .iter()
                    .map(|&j| majors.partition.part(j))
                    .collect();
                let ground = parts.iter().fold(ItemSet::EMPTY, |acc, &p| acc | p);
                let sub = Partition::new(parts, ground)
                    .map_err(|e| ProtocolError::Precondition(e.to_string()))?;
                audit_cut(chooser, vx, &sub, cut)?;
                let r = max_desired_half(vx, &sub, cut);
                let take = r.len().min(major_agents.len());
                for (&agent, piece) in major_agents.iter().zip(&r.satisfied[..take]) {
                    bundles[agent] = piece.items;
                }
                trace.push(TraceEvent::Cut {
                    agent: chooser,
                    cut,
                    side: r.side,
                    satisfied: r.satisfied[..take]
                        .iter()
                        .map(|b| majors.surviving[b.index])
                        .collect(),
                });
                served = major_agents[..take].to_vec();
            }
        }
        for &a in &served {
            allocated = allocated | bundles[a];
        }
        remaining.retain(|a| !served.contains(a));
        for st in state.iter_mut() {
            st.refresh(allocated);
            if st.surviving.len() < remaining.len() {
                return Err(ProtocolError::Precondition(format!(
                    "only {} untouched parts remain for {} agents",
                    st.surviving.len(),
                    remaining.len()
                )));
            }
        }
        trace.push(TraceEvent::Level {
            depth,
            agents: served,
        });
    }

    let partitions = types
        .iter()
        .map(|&t| match t {
            AgentType::S => ps.clone(),
            AgentType::T => pt.clone(),
        })
        .collect();
    certify(
        inst,
        "two_types",
        Allocation::new(bundles),
        vec![half(); n],
        partitions,
        trace,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mms::{mms_value, MmsBudget};
    use crate::q;
    use crate::valuations::ValuationOracle;

    #[test]
    fn uniform_four_agents() {
        let v = ValuationOracle::additive(vec![q(1, 1); 8]);
        let inst = Instance::new(8, vec![v.clone(); 4], "uniform").unwrap();
        let p = mms_value(&v, inst.ground(), 4, &MmsBudget::default())
            .unwrap()
            .witness;
        let types = [AgentType::S, AgentType::S, AgentType::T, AgentType::T];
        let cert = two_types(&inst, &types, &p, &p).unwrap();
        let check = cert.recheck(&inst).unwrap();
        assert!(check.holds);
        assert!(check.values.iter().all(|&x| x >= q(1, 1)));
    }

    #[test]
    fn mismatched_valuations_rejected() {
        let a = ValuationOracle::additive(vec![q(1, 1); 4]);
        let b = ValuationOracle::additive(vec![q(2, 1); 4]);
        let inst = Instance::new(4, vec![a.clone(), b], "mixed").unwrap();
        let p = mms_value(&a, inst.ground(), 2, &MmsBudget::default())
            .unwrap()
            .witness;
        assert!(two_types(&inst, &[AgentType::S, AgentType::S], &p, &p).is_err());
    }

    #[test]
    fn single_agent_takes_everything() {
        let v = ValuationOracle::additive(vec![q(1, 1); 3]);
        let inst = Instance::new(3, vec![v], "one").unwrap();
        let p = Partition::whole(inst.ground());
        let cert = two_types(&inst, &[AgentType::T], &p, &p).unwrap();
        assert_eq!(cert.allocation.bundle(0), inst.ground());
    }
}
