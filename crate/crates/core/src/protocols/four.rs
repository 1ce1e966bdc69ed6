use super::{
    audit_cut, certify, check_partitions, extend_cut_and_choose, half, Party, ProtocolCertificate,
    ProtocolError, TraceEvent,
};
use crate::cuts::{desired_half, max_desired_half, Side};
use crate::items::ItemSet;
use crate::mms::min_value;
use crate::model::{Allocation, Instance, Partition};

const S: usize = 0;
const T: usize = 1;
const Q: usize = 2;
const R: usize = 3;

struct Run<'a> {
    inst: &'a Instance,
    partitions: &'a [Partition],
    trace: Vec<TraceEvent>,
}

impl Run<'_> {
    fn disjoint(&mut self, label: &str, a: ItemSet, b: ItemSet) {
        self.trace.push(TraceEvent::Disjoint {
            label: label.to_string(),
            holds: a.is_disjoint(b),
        });
    }

    fn candidate(&mut self, id: usize, bundles: &[(usize, ItemSet)]) {
        self.trace.push(TraceEvent::Candidate {
            id,
            bundles: bundles.to_vec(),
        });
    }

    /// Tries to finish candidate `id` by cut-and-choose between agent `x`
    /// and the last agent on the items the candidate leaves.
    fn close(
        &mut self,
        id: usize,
        x: usize,
        bundles: &[(usize, ItemSet)],
    ) -> Result<Option<Allocation>, ProtocolError> {
        let used = bundles.iter().fold(ItemSet::EMPTY, |acc, &(_, b)| acc | b);
        let rest = self.inst.ground() - used;
        let (vx, px) = (self.inst.valuation(x), &self.partitions[x]);
        let kept = desired_half(vx, px, rest);
        let success = kept.len() >= 2;
        self.trace.push(TraceEvent::Closing {
            candidate: id,
            agents: (x, R),
            success,
        });
        if !success {
            return Ok(None);
        }
        let first = kept[0].items;
        let (to_x, to_r) = extend_cut_and_choose(
            Party {
                agent: x,
                valuation: vx,
            },
            Party {
                agent: R,
                valuation: self.inst.valuation(R),
            },
            rest,
            (first, rest - first),
            min_value(vx, px) * half(),
            min_value(self.inst.valuation(R), &self.partitions[R]),
        )?;
        let mut out = vec![ItemSet::EMPTY; 4];
        for &(agent, b) in bundles {
            out[agent] = b;
        }
        out[x] = to_x;
        out[R] = to_r;
        self.trace.push(TraceEvent::Exit { candidate: id });
        Ok(Some(Allocation::new(out)))
    }

    /// Pieces of `agent`'s parts inside `cut` worth half their part; at
    /// least `need` of them exist whenever the closing attempt failed.
    fn harvest(
        &mut self,
        agent: usize,
        cut: ItemSet,
        need: usize,
    ) -> Result<Vec<ItemSet>, ProtocolError> {
        let (v, p) = (self.inst.valuation(agent), &self.partitions[agent]);
        audit_cut(agent, v, p, cut)?;
        let pieces = desired_half(v, p, cut);
        self.trace.push(TraceEvent::Cut {
            agent,
            cut,
            side: Side::Cut,
            satisfied: pieces.iter().map(|b| b.index).collect(),
        });
        if pieces.len() < need {
            return Err(ProtocolError::Precondition(format!(
                "agent {agent} has {} satisfied pieces inside {cut}, expected {need}",
                pieces.len()
            )));
        }
        Ok(pieces.into_iter().map(|b| b.items).collect())
    }
}

/// Four agents with partitions of sizes `(3, 3, 4, 4)`; certifies `1/2` for
/// every agent.
///
/// Builds up to four candidate allocations, each keeping one part of agent 3
/// untouched; the trace records the disjointness conditions each stage relies
/// on and the candidate that became final.
pub fn four_agents_3344(
    inst: &Instance,
    partitions: &[Partition],
) -> Result<ProtocolCertificate, ProtocolError> {
    check_partitions(inst, partitions, &[3, 3, 4, 4])?;
    let mut run = Run {
        inst,
        partitions,
        trace: Vec::new(),
    };
    let (ps, pt, pr) = (&partitions[S], &partitions[T], &partitions[R]);
    let (vs, vt) = (inst.valuation(S), inst.valuation(T));

    // Agent S against two of R's parts; the other two stay whole.
    let cut = pr.part(0) | pr.part(1);
    audit_cut(S, vs, ps, cut)?;
    let first = max_desired_half(vs, ps, cut);
    run.trace.push(TraceEvent::Cut {
        agent: S,
        cut,
        side: first.side,
        satisfied: first.indices(),
    });
    let (s1, s2) = (first.satisfied[0].items, first.satisfied[1].items);
    let order = match first.side {
        Side::Cut => vec![0, 1, 2, 3],
        Side::Complement => vec![2, 3, 0, 1],
    };
    run.trace.push(TraceEvent::Relabel {
        agent: R,
        order: order.clone(),
    });
    let (rc, rd) = (pr.part(order[2]), pr.part(order[3]));
    for (label, s) in [("S1*", s1), ("S2*", s2)] {
        run.disjoint(&format!("{label} ∩ R3"), s, rc);
        run.disjoint(&format!("{label} ∩ R4"), s, rd);
    }

    // Agent T against one S piece and one whole R part.
    let cut = s2 | rd;
    audit_cut(T, vt, pt, cut)?;
    let second = max_desired_half(vt, pt, cut);
    run.trace.push(TraceEvent::Cut {
        agent: T,
        cut,
        side: second.side,
        satisfied: second.indices(),
    });
    let (t1, t2) = (second.satisfied[0].items, second.satisfied[1].items);
    let (s_alloc, r_keep) = match second.side {
        Side::Complement => (s2, rd),
        Side::Cut => (s1, rc),
    };
    for (label, t) in [("T1*", t1), ("T2*", t2)] {
        run.disjoint(&format!("{label} ∩ R4"), t, r_keep);
        run.disjoint(&format!("{label} ∩ S*"), t, s_alloc);
    }

    let finish = |run: Run<'_>, alloc: Allocation| {
        certify(
            inst,
            "four_agents_3344",
            alloc,
            vec![half(); 4],
            partitions.to_vec(),
            run.trace,
        )
    };

    let cand1 = [(S, s_alloc), (T, t1)];
    run.candidate(1, &cand1);
    if let Some(alloc) = run.close(1, Q, &cand1)? {
        return finish(run, alloc);
    }
    let q_star = run.harvest(Q, s_alloc | t1, 3)?;
    let (q1, q2, q3) = (q_star[0], q_star[1], q_star[2]);
    for (label, q) in [("Q1*", q1), ("Q2*", q2), ("Q3*", q3)] {
        run.disjoint(&format!("{label} ∩ T2*"), q, t2);
        run.disjoint(&format!("{label} ∩ R4"), q, r_keep);
    }

    let cand2 = [(T, t2), (Q, q1)];
    run.candidate(2, &cand2);
    if let Some(alloc) = run.close(2, S, &cand2)? {
        return finish(run, alloc);
    }
    let s_prime = run.harvest(S, t2 | q1, 2)?;
    let (s1p, s2p) = (s_prime[0], s_prime[1]);
    for (label, s) in [("S1'", s1p), ("S2'", s2p)] {
        run.disjoint(&format!("{label} ∩ Q2*"), s, q2);
        run.disjoint(&format!("{label} ∩ Q3*"), s, q3);
        run.disjoint(&format!("{label} ∩ R4"), s, r_keep);
    }

    let cand3 = [(S, s1p), (Q, q2)];
    run.candidate(3, &cand3);
    if let Some(alloc) = run.close(3, T, &cand3)? {
        return finish(run, alloc);
    }
    let t_prime = run.harvest(T, s1p | q2, 2)?;
    let t1p = t_prime[0];
    for (label, t) in [("T1'", t_prime[0]), ("T2'", t_prime[1])] {
        run.disjoint(&format!("{label} ∩ Q3*"), t, q3);
        run.disjoint(&format!("{label} ∩ S2'"), t, s2p);
        run.disjoint(&format!("{label} ∩ R4"), t, r_keep);
    }

    let final_bundles = [(S, s2p), (T, t1p), (Q, q3), (R, r_keep)];
    run.candidate(4, &final_bundles);
    run.trace.push(TraceEvent::Exit { candidate: 4 });
    finish(run, Allocation::new(vec![s2p, t1p, q3, r_keep]))
}
