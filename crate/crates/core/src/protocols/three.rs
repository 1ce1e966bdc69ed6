use super::{
    audit_cut, certify, check_partitions, disjoint_extension, extend_cut_and_choose, half,
    satisfied_piece, ExtensionBase, Party, ProtocolCertificate, ProtocolError, TraceEvent,
    ViolationEvidence,
};
use crate::cuts::{is_half, max_desired_half, Side};
use crate::items::ItemSet;
use crate::mms::min_value;
use crate::model::{Allocation, Instance, Partition};
use crate::q;

fn candidate(id: usize, a: &Allocation) -> TraceEvent {
    TraceEvent::Candidate {
        id,
        bundles: a.bundles().iter().copied().enumerate().collect(),
    }
}

fn disjoint_event(label: &str, a: ItemSet, b: ItemSet) -> TraceEvent {
    TraceEvent::Disjoint {
        label: label.to_string(),
        holds: a.is_disjoint(b),
    }
}

/// Finishes with the third agent via [`disjoint_extension`] and certifies
/// `(1, 1/2, 1/2)`.
fn close_with_extension(
    inst: &Instance,
    name: &str,
    partitions: &[Partition],
    a: Allocation,
    b: Allocation,
    mut trace: Vec<TraceEvent>,
) -> Result<ProtocolCertificate, ProtocolError> {
    trace.push(candidate(1, &a));
    trace.push(candidate(2, &b));
    let ext = disjoint_extension(&a, &b, &partitions[2], 2, inst.valuation(2))?;
    trace.push(TraceEvent::Exit {
        candidate: match ext.base {
            ExtensionBase::First => 1,
            ExtensionBase::Second => 2,
        },
    });
    certify(
        inst,
        name,
        ext.allocation,
        vec![q(1, 1), half(), half()],
        partitions.to_vec(),
        trace,
    )
}

/// Three agents with partitions of sizes `(3, 2, 2)`; certifies `1/2` for
/// every agent.
///
/// Agent 0 is cut by agent 1's second part and keeps two satisfied pieces;
/// agent 1 takes a satisfied piece of its other part relative to agent 2's
/// first part; agents 0 and 2 split the rest by cut-and-choose.
pub fn three_agents_322(
    inst: &Instance,
    partitions: &[Partition],
) -> Result<ProtocolCertificate, ProtocolError> {
    check_partitions(inst, partitions, &[3, 2, 2])?;
    let (ps, pt, pq) = (&partitions[0], &partitions[1], &partitions[2]);
    let (vs, vt, vq) = (inst.valuation(0), inst.valuation(1), inst.valuation(2));
    let ground = inst.ground();
    let mut trace = Vec::new();

    let cut = pt.part(1);
    audit_cut(0, vs, ps, cut)?;
    let first = max_desired_half(vs, ps, cut);
    trace.push(TraceEvent::Cut {
        agent: 0,
        cut,
        side: first.side,
        satisfied: first.indices(),
    });
    let s_pieces: Vec<ItemSet> = first.satisfied.iter().take(2).map(|b| b.items).collect();
    // The T part on the other side of the cut from agent 0's pieces.
    let t_keep = match first.side {
        Side::Cut => 0,
        Side::Complement => 1,
    };

    let cut = pq.part(0);
    let second = max_desired_half(vt, pt, cut);
    let (side, t_star) = satisfied_piece(1, vt, pt.part(t_keep), cut, second.side)?;
    trace.push(TraceEvent::Cut {
        agent: 1,
        cut,
        side,
        satisfied: vec![t_keep],
    });
    trace.push(TraceEvent::Candidate {
        id: 1,
        bundles: vec![(1, t_star)],
    });

    let rest = ground - t_star;
    let halves = (s_pieces[0], rest - s_pieces[0]);
    let (a_s, a_q) = extend_cut_and_choose(
        Party {
            agent: 0,
            valuation: vs,
        },
        Party {
            agent: 2,
            valuation: vq,
        },
        rest,
        halves,
        min_value(vs, ps) * half(),
        min_value(vq, pq),
    )?;
    trace.push(TraceEvent::Closing {
        candidate: 1,
        agents: (0, 2),
        success: true,
    });
    trace.push(TraceEvent::Exit { candidate: 1 });
    certify(
        inst,
        "three_agents_322",
        Allocation::new(vec![a_s, t_star, a_q]),
        vec![half(); 3],
        partitions.to_vec(),
        trace,
    )
}

fn triples() -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for i in 0..5 {
        for j in i + 1..5 {
            for k in j + 1..5 {
                out.push([i, j, k]);
            }
        }
    }
    out
}

fn union_of(p: &Partition, idx: &[usize]) -> ItemSet {
    idx.iter().fold(ItemSet::EMPTY, |acc, &i| acc | p.part(i))
}

/// Evidence that no triple cut satisfies both of agent 1's parts.
fn triple_cut_evidence(inst: &Instance, ps: &Partition, pt: &Partition) -> ProtocolError {
    let vt = inst.valuation(1);
    let cuts: Vec<(usize, ItemSet)> = triples()
        .iter()
        .map(|t| (t.iter().fold(0usize, |m, &i| m | 1 << i), union_of(ps, t)))
        .collect();
    for &part in pt.parts() {
        for &(mask, c) in &cuts {
            let e = ViolationEvidence::new(1, vt, part & c, part - c);
            if e.is_violation() {
                return ProtocolError::SubadditivityViolation(e);
            }
            for &(mask2, c2) in &cuts {
                if mask | mask2 == 0b11111 {
                    let e = ViolationEvidence::new(1, vt, part & c, part & c2);
                    if e.is_violation() {
                        return ProtocolError::SubadditivityViolation(e);
                    }
                }
            }
        }
    }
    ProtocolError::Precondition("no triple cut satisfies both parts of agent 1".into())
}

/// Three agents with partitions of sizes `(5, 2, 1)`; certifies
/// `(1, 1/2, 1/2)`.
///
/// Searches the ten cuts formed by three of agent 0's parts, in
/// lexicographic order, for one keeping half of both of agent 1's parts.
pub fn three_agents_521(
    inst: &Instance,
    partitions: &[Partition],
) -> Result<ProtocolCertificate, ProtocolError> {
    check_partitions(inst, partitions, &[5, 2, 1])?;
    let (ps, pt) = (&partitions[0], &partitions[1]);
    let vt = inst.valuation(1);
    let found = triples().into_iter().find(|t| {
        let c = union_of(ps, t);
        pt.parts().iter().all(|&part| is_half(vt, part & c, part))
    });
    let Some(t) = found else {
        return Err(triple_cut_evidence(inst, ps, pt));
    };
    let c = union_of(ps, &t);
    let left: Vec<usize> = (0..5).filter(|i| !t.contains(i)).collect();
    let (t1, t2) = (pt.part(0) & c, pt.part(1) & c);
    let trace = vec![
        TraceEvent::Cut {
            agent: 1,
            cut: c,
            side: Side::Cut,
            satisfied: vec![0, 1],
        },
        disjoint_event(
            "S_l ∪ T1* and S_l' ∪ T2*",
            ps.part(left[0]) | t1,
            ps.part(left[1]) | t2,
        ),
    ];
    let a = Allocation::new(vec![ps.part(left[0]), t1]);
    let b = Allocation::new(vec![ps.part(left[1]), t2]);
    close_with_extension(inst, "three_agents_521", partitions, a, b, trace)
}

/// Three agents with partitions of sizes `(4, 3, 1)`; certifies
/// `(1, 1/2, 1/2)`.
pub fn three_agents_431(
    inst: &Instance,
    partitions: &[Partition],
) -> Result<ProtocolCertificate, ProtocolError> {
    check_partitions(inst, partitions, &[4, 3, 1])?;
    let (ps, pt) = (&partitions[0], &partitions[1]);
    let vt = inst.valuation(1);
    let cut = ps.part(0) | ps.part(1);
    audit_cut(1, vt, pt, cut)?;
    let r = max_desired_half(vt, pt, cut);
    let (l, l2) = match r.side {
        Side::Cut => (2, 3),
        Side::Complement => (0, 1),
    };
    let (t1, t2) = (r.satisfied[0].items, r.satisfied[1].items);
    let trace = vec![
        TraceEvent::Cut {
            agent: 1,
            cut,
            side: r.side,
            satisfied: r.indices(),
        },
        disjoint_event(
            "S_l ∪ T1* and S_l' ∪ T2*",
            ps.part(l) | t1,
            ps.part(l2) | t2,
        ),
    ];
    let a = Allocation::new(vec![ps.part(l), t1]);
    let b = Allocation::new(vec![ps.part(l2), t2]);
    close_with_extension(inst, "three_agents_431", partitions, a, b, trace)
}

/// A part of agent 1 and three of agent 0's parts `(a, b, c)` such that
/// the part keeps half of its value inside both `S_a ∪ S_b` and `S_b ∪ S_c`.
fn relabel_422(
    inst: &Instance,
    ps: &Partition,
    pt: &Partition,
) -> Result<(usize, [usize; 4]), ProtocolError> {
    let vt = inst.valuation(1);
    for ta in 0..2 {
        let part = pt.part(ta);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    if a == b || b == c || a == c {
                        continue;
                    }
                    let ab = ps.part(a) | ps.part(b);
                    let bc = ps.part(b) | ps.part(c);
                    if is_half(vt, part & ab, part) && is_half(vt, part & bc, part) {
                        let d = 6 - a - b - c;
                        return Ok((ta, [a, b, c, d]));
                    }
                }
            }
        }
    }
    // Each pairing of agent 0's parts must leave half of the part on one side.
    let part = pt.part(0);
    for (x, y) in [(0, 1), (0, 2), (0, 3)] {
        let c = ps.part(x) | ps.part(y);
        let e = ViolationEvidence::new(1, vt, part & c, part - c);
        if e.is_violation() {
            return Err(ProtocolError::SubadditivityViolation(e));
        }
    }
    Err(ProtocolError::Precondition(
        "no relabelling of agent 0's parts realizes the two pair cuts".into(),
    ))
}

/// Three agents with partitions of sizes `(4, 2, 2)`; certifies
/// `(1, 1/2, 1/2)`.
pub fn three_agents_422(
    inst: &Instance,
    partitions: &[Partition],
) -> Result<ProtocolCertificate, ProtocolError> {
    check_partitions(inst, partitions, &[4, 2, 2])?;
    let (ps, pt, pq) = (&partitions[0], &partitions[1], &partitions[2]);
    let vt = inst.valuation(1);
    let (ta, [a, b, c, d]) = relabel_422(inst, ps, pt)?;
    let tb = 1 - ta;
    let (s1, s2, s3, s4) = (ps.part(a), ps.part(b), ps.part(c), ps.part(d));
    let t1 = pt.part(ta);
    let mut trace = vec![
        TraceEvent::Relabel {
            agent: 0,
            order: vec![a, b, c, d],
        },
        TraceEvent::Relabel {
            agent: 1,
            order: vec![ta, tb],
        },
        TraceEvent::Cut {
            agent: 1,
            cut: s1 | s2,
            side: Side::Cut,
            satisfied: vec![ta],
        },
        TraceEvent::Cut {
            agent: 1,
            cut: s2 | s3,
            side: Side::Cut,
            satisfied: vec![ta],
        },
    ];

    let cut = (pq.part(0) - s1) | s3;
    let prefer = max_desired_half(vt, pt, cut).side;
    let (side, t2_star) = satisfied_piece(1, vt, pt.part(tb), cut, prefer)?;
    trace.push(TraceEvent::Cut {
        agent: 1,
        cut,
        side,
        satisfied: vec![tb],
    });
    let (a_alloc, b_alloc, x) = match side {
        Side::Cut => (
            Allocation::new(vec![s1, t2_star]),
            Allocation::new(vec![s4, t1 & (s2 | s3)]),
            pq.part(1),
        ),
        Side::Complement => (
            Allocation::new(vec![s3, t2_star]),
            Allocation::new(vec![s4, t1 & (s1 | s2)]),
            pq.part(0),
        ),
    };
    trace.push(disjoint_event(
        "A and A' inside the kept Q part",
        a_alloc.allocated() & x,
        b_alloc.allocated() & x,
    ));
    close_with_extension(
        inst,
        "three_agents_422",
        partitions,
        a_alloc,
        b_alloc,
        trace,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mms::{mms_value, MmsBudget};
    use crate::valuations::ValuationOracle;

    fn witnesses(inst: &Instance, sizes: &[usize]) -> Vec<Partition> {
        sizes
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                mms_value(inst.valuation(i), inst.ground(), d, &MmsBudget::default())
                    .unwrap()
                    .witness
            })
            .collect()
    }

    fn identical(m: usize) -> Instance {
        let v = ValuationOracle::additive((1..=m as i64).map(|w| q(w, 1)).collect());
        Instance::new(m, vec![v; 3], "identical").unwrap()
    }

    #[test]
    fn identical_agents_each_protocol() {
        let inst = identical(9);
        type Run = fn(&Instance, &[Partition]) -> Result<ProtocolCertificate, ProtocolError>;
        let runs: [(Run, [usize; 3]); 4] = [
            (three_agents_322, [3, 2, 2]),
            (three_agents_521, [5, 2, 1]),
            (three_agents_431, [4, 3, 1]),
            (three_agents_422, [4, 2, 2]),
        ];
        for (run, sizes) in runs {
            let p = witnesses(&inst, &sizes);
            let cert = run(&inst, &p).unwrap();
            assert!(cert.recheck(&inst).unwrap().holds, "{}", cert.protocol);
            assert!(cert.exit().is_some());
        }
    }

    #[test]
    fn zero_valuation_agent_is_fine() {
        let v = ValuationOracle::additive(vec![q(1, 1); 6]);
        let zero = ValuationOracle::additive(vec![q(0, 1); 6]);
        let inst = Instance::new(6, vec![v.clone(), zero, v], "zero").unwrap();
        let p = witnesses(&inst, &[3, 2, 2]);
        let cert = three_agents_322(&inst, &p).unwrap();
        assert!(cert.recheck(&inst).unwrap().holds);
    }

    #[test]
    fn wrong_sizes_rejected() {
        let inst = identical(6);
        let p = witnesses(&inst, &[2, 2, 2]);
        assert!(matches!(
            three_agents_322(&inst, &p),
            Err(ProtocolError::InvalidInput(_))
        ));
    }
}
