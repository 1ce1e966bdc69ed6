use super::{
    cut_and_choose_two, four_agents_3344, three_agents_322, three_agents_422, three_agents_431,
    three_agents_521, ProtocolCertificate, ProtocolError,
};
use crate::counterexamples::has_blocking_subset;
use crate::mms::{mms_value, MmsBudget};
use crate::model::{DemandVector, Instance, Partition};

/// Which threshold vector to aim for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HalfMode {
    /// `1/2` for every agent.
    UniformHalf,
    /// `1` for the agent with the largest demand, `1/2` for the others.
    OneHalfHalf,
}

impl HalfMode {
    pub fn name(self) -> &'static str {
        match self {
            HalfMode::UniformHalf => "uniform-half",
            HalfMode::OneHalfHalf => "one-half-half",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "uniform-half" | "half" | "1/2" => Some(HalfMode::UniformHalf),
            "one-half-half" | "1,1/2,1/2" => Some(HalfMode::OneHalfHalf),
            _ => None,
        }
    }
}

/// Counterexample families that rule out a demand vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImpossibilityFamily {
    /// `n` agents, `n - 1` items, every nonempty set worth 1.
    NMinus1,
    /// The four-item instance against `(4, 2, 1)`.
    Instance421,
    /// The triplet-block family against `(n, .., n, ⌊n/3⌋)`.
    FloorN3,
    /// The 27-item grid against `(3, 3, 3)` with one agent at `α = 1`.
    Grid27,
}

impl ImpossibilityFamily {
    pub fn name(self) -> &'static str {
        match self {
            ImpossibilityFamily::NMinus1 => "n_minus_1",
            ImpossibilityFamily::Instance421 => "instance_421",
            ImpossibilityFamily::FloorN3 => "floor_n3",
            ImpossibilityFamily::Grid27 => "grid27",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Impossibility {
    pub family: ImpossibilityFamily,
    /// The demand vector sorted in decreasing order.
    pub sorted_demand: Vec<usize>,
    /// Agents witnessing `d_i < |N'|`, for [`ImpossibilityFamily::NMinus1`].
    pub blocking: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Dispatch {
    /// A certificate against MMS partitions of sizes `targets` (per agent),
    /// with `targets[i] <= d_i`.
    Solved {
        certificate: ProtocolCertificate,
        targets: Vec<usize>,
    },
    Impossible(Impossibility),
}

type Protocol = fn(&Instance, &[Partition]) -> Result<ProtocolCertificate, ProtocolError>;

fn dominates(d: &[usize], target: &[usize]) -> bool {
    d.iter().zip(target).all(|(a, b)| a >= b)
}

/// Agent indices ordered by decreasing demand, lowest index first on ties.
fn by_demand_desc(d: &[usize]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[b].cmp(&d[a]));
    order
}

fn run_permuted(
    inst: &Instance,
    order: &[usize],
    targets_by_position: &[usize],
    protocol: Protocol,
    budget: &MmsBudget,
) -> Result<Dispatch, ProtocolError> {
    let permuted = inst.permuted(order);
    let partitions = targets_by_position
        .iter()
        .enumerate()
        .map(|(pos, &size)| {
            mms_value(permuted.valuation(pos), permuted.ground(), size, budget).map(|r| r.witness)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| ProtocolError::Verify(e.into()))?;
    let certificate = protocol(&permuted, &partitions)?.unpermute(order);
    let mut targets = vec![0; order.len()];
    for (pos, &agent) in order.iter().enumerate() {
        targets[agent] = targets_by_position[pos];
    }
    Ok(Dispatch::Solved {
        certificate,
        targets,
    })
}

/// Routes a three-agent instance to the protocol whose demand vector is
/// dominated by `d` (after sorting agents by decreasing demand), or names the
/// counterexample family that rules `d` out.
pub fn dispatch_three(
    inst: &Instance,
    mode: HalfMode,
    d: &DemandVector,
    budget: &MmsBudget,
) -> Result<Dispatch, ProtocolError> {
    if d.len() != 3 || inst.agents() != 3 {
        return Err(ProtocolError::InvalidInput(format!(
            "three agents expected, got {} agents and {} demands",
            inst.agents(),
            d.len()
        )));
    }
    let order = by_demand_desc(d.as_slice());
    let sorted: Vec<usize> = order.iter().map(|&i| d.get(i)).collect();
    let routes: &[([usize; 3], Protocol)] = match mode {
        HalfMode::UniformHalf => &[
            ([3, 2, 2], three_agents_322 as Protocol),
            ([5, 2, 1], three_agents_521),
            ([4, 3, 1], three_agents_431),
            ([4, 2, 2], three_agents_422),
        ],
        HalfMode::OneHalfHalf => &[
            ([5, 2, 1], three_agents_521 as Protocol),
            ([4, 3, 1], three_agents_431),
            ([4, 2, 2], three_agents_422),
        ],
    };
    if let Some((target, protocol)) = routes.iter().find(|(t, _)| dominates(&sorted, t)) {
        return run_permuted(inst, &order, target, *protocol, budget);
    }
    Ok(Dispatch::Impossible(three_agent_impossibility(
        mode,
        d.as_slice(),
        sorted,
    )))
}

fn three_agent_impossibility(mode: HalfMode, d: &[usize], sorted: Vec<usize>) -> Impossibility {
    let blocking = has_blocking_subset(d);
    let family = if blocking.is_some() {
        ImpossibilityFamily::NMinus1
    } else if dominates(&[4, 2, 1], &sorted) {
        ImpossibilityFamily::Instance421
    } else {
        match mode {
            HalfMode::UniformHalf => ImpossibilityFamily::FloorN3,
            HalfMode::OneHalfHalf => ImpossibilityFamily::Grid27,
        }
    };
    Impossibility {
        family,
        sorted_demand: sorted,
        blocking,
    }
}

/// Any supported agent count: two agents by cut-and-choose, three by
/// [`dispatch_three`], four with demands dominating `(3, 3, 4, 4)`.
pub fn solve(
    inst: &Instance,
    mode: HalfMode,
    d: &DemandVector,
    budget: &MmsBudget,
) -> Result<Dispatch, ProtocolError> {
    let n = inst.agents();
    if d.len() != n {
        return Err(ProtocolError::InvalidInput(format!(
            "{n} agents but {} demands",
            d.len()
        )));
    }
    if n == 3 {
        return dispatch_three(inst, mode, d, budget);
    }
    if mode == HalfMode::OneHalfHalf {
        return Err(ProtocolError::InvalidInput(
            "the (1, 1/2, 1/2) mode is defined for three agents".into(),
        ));
    }
    let order = by_demand_desc(d.as_slice());
    let sorted: Vec<usize> = order.iter().map(|&i| d.get(i)).collect();
    if let Some(blocking) = has_blocking_subset(d.as_slice()) {
        return Ok(Dispatch::Impossible(Impossibility {
            family: ImpossibilityFamily::NMinus1,
            sorted_demand: sorted,
            blocking: Some(blocking),
        }));
    }
    match n {
        2 => {
            // Position 0 chooses against the whole set; position 1 splits in two.
            let order = vec![order[1], order[0]];
            run_permuted(inst, &order, &[1, 2], two_agent_route, budget)
        }
        4 if dominates(&sorted, &[4, 4, 3, 3]) => {
            let ascending: Vec<usize> = order.iter().rev().copied().collect();
            run_permuted(inst, &ascending, &[3, 3, 4, 4], four_agents_3344, budget)
        }
        _ => Err(ProtocolError::Precondition(format!(
            "no constructive route for {n} agents with demands {:?}",
            d.as_slice()
        ))),
    }
}

fn two_agent_route(
    inst: &Instance,
    partitions: &[Partition],
) -> Result<ProtocolCertificate, ProtocolError> {
    cut_and_choose_two(inst, &partitions[1])
}
