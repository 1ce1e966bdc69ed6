use super::{
    certify, check_partitions, half, ProtocolCertificate, ProtocolError, TraceEvent,
    ViolationEvidence,
};
use crate::cuts::Side;
use crate::model::{Allocation, Instance, Partition};
use crate::q;

/// Two agents: agent 0 picks its favourite part of agent 1's two-part
/// partition `pt` (lowest index among maxima), agent 1 gets the other.
///
/// Certifies `(1/2, 1)` against `((M), pt)`.
pub fn cut_and_choose_two(
    inst: &Instance,
    pt: &Partition,
) -> Result<ProtocolCertificate, ProtocolError> {
    let whole = Partition::whole(inst.ground());
    let partitions = vec![whole, pt.clone()];
    check_partitions(inst, &partitions, &[1, 2])?;
    let vs = inst.valuation(0);
    let (t0, t1) = (pt.part(0), pt.part(1));
    let (a, b) = (vs.value(t0), vs.value(t1));
    let (pick, rest, side) = if a >= b {
        (t0, t1, Side::Cut)
    } else {
        (t1, t0, Side::Complement)
    };
    if a.max(b) * 2 < vs.value(inst.ground()) {
        return Err(ProtocolError::SubadditivityViolation(
            ViolationEvidence::new(0, vs, t0, t1),
        ));
    }
    let trace = vec![
        TraceEvent::Cut {
            agent: 0,
            cut: t0,
            side,
            satisfied: vec![0],
        },
        TraceEvent::Exit { candidate: 1 },
    ];
    certify(
        inst,
        "cut_and_choose_two",
        Allocation::new(vec![pick, rest]),
        vec![half(), q(1, 1)],
        partitions,
        trace,
    )
}
