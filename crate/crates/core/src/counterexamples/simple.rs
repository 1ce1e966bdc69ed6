use super::CounterexampleError;
use crate::items::{ItemSet, MAX_ITEMS};
use crate::model::{DemandVector, Instance};
use crate::q;
use crate::valuations::{BlockCapValuation, ValuationClass, ValuationKind, ValuationOracle};

/// Item cap for [`instance_half_cap`]; `∏ d_i` must not exceed it.
pub const HALF_CAP_MAX_ITEMS: usize = MAX_ITEMS;

/// Items `g(r_1, .., r_n)` with `r_i < d_i`; `B_{i,j}` holds the items with
/// `r_i = j`. Every agent values a set at 1 if it contains some `B_{i,j}`,
/// at 1/2 if it is nonempty otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfCapInstance {
    pub d: DemandVector,
    pub instance: Instance,
    /// `bundles[i][j] = B_{i,j}`.
    pub bundles: Vec<Vec<ItemSet>>,
}

impl HalfCapInstance {
    /// Coordinates of item `g`, first coordinate varying fastest.
    pub fn coordinates(&self, mut g: usize) -> Vec<usize> {
        self.d
            .as_slice()
            .iter()
            .map(|&di| {
                let r = g % di;
                g /= di;
                r
            })
            .collect()
    }
}

pub fn instance_half_cap(d: &DemandVector) -> Result<HalfCapInstance, CounterexampleError> {
    let ds = d.as_slice();
    if ds.is_empty() {
        return Err(CounterexampleError::InvalidParameter("no agents".into()));
    }
    let items = ds
        .iter()
        .fold(1u128, |acc, &di| acc.saturating_mul(di as u128));
    if items > HALF_CAP_MAX_ITEMS as u128 {
        return Err(CounterexampleError::TooLarge {
            items,
            max: HALF_CAP_MAX_ITEMS,
        });
    }
    let m = items as usize;
    let mut bundles: Vec<Vec<ItemSet>> = ds.iter().map(|&di| vec![ItemSet::EMPTY; di]).collect();
    for g in 0..m {
        let mut rest = g;
        for (i, &di) in ds.iter().enumerate() {
            let r = rest % di;
            rest /= di;
            bundles[i][r] = bundles[i][r].with(g);
        }
    }
    let agents = bundles
        .iter()
        .map(|b| {
            let kind = ValuationKind::BlockCap(BlockCapValuation::new(b.clone())?);
            ValuationOracle::new(m, kind, ValuationClass::Subadditive)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let names: Vec<usize> = ds.to_vec();
    let label = format!(
        "half_cap:{}",
        names
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    let item_names = (0..m)
        .map(|g| {
            let mut rest = g;
            let coords: Vec<String> = ds
                .iter()
                .map(|&di| {
                    let r = rest % di;
                    rest /= di;
                    (r + 1).to_string()
                })
                .collect();
            format!("g({})", coords.join(","))
        })
        .collect();
    let instance = Instance::new(m, agents, label)?.with_item_names(item_names)?;
    Ok(HalfCapInstance {
        d: d.clone(),
        instance,
        bundles,
    })
}

/// `n` agents and `n - 1` items; every agent values every nonempty set at 1.
pub fn instance_n_minus_1(n: usize) -> Result<Instance, CounterexampleError> {
    if !(2..=MAX_ITEMS + 1).contains(&n) {
        return Err(CounterexampleError::InvalidParameter(format!(
            "n_minus_1 needs 2 <= n <= {}, got {n}",
            MAX_ITEMS + 1
        )));
    }
    let m = n - 1;
    let v = ValuationOracle::unit(m);
    Ok(Instance::new(m, vec![v; n], format!("n_minus_1:{n}"))?)
}

/// Items `h, g1, g2, g3`. Agent 1 values every nonempty set at 1; agent 2
/// values a set at 1 if it holds `h`, else at a third per item; agent 3 is
/// additive with `h = 1/3` and `g = 2/9`.
pub fn instance_421() -> Result<Instance, CounterexampleError> {
    let v1 = ValuationOracle::unit(4);
    let v2 = ValuationOracle::table_from_fn(4, ValuationClass::Subadditive, |s| {
        if s.contains(0) {
            q(1, 1)
        } else {
            q(s.len() as i64, 3)
        }
    })?;
    let v3 = ValuationOracle::additive(vec![q(1, 3), q(2, 9), q(2, 9), q(2, 9)]);
    let names = ["h", "g1", "g2", "g3"].map(String::from).to_vec();
    Ok(Instance::new(4, vec![v1, v2, v3], "instance_421")?.with_item_names(names)?)
}

/// `n` items. The first `n - 1` agents value every nonempty set at 1; the
/// last values `S` at `max_k |S ∩ B_k| / 3` over the triplets
/// `B_k = {g_{3k+1}, g_{3k+2}, g_{3k+3}}`, `k < ⌊n/3⌋`.
pub fn instance_floor_n3(n: usize) -> Result<Instance, CounterexampleError> {
    if !(3..=MAX_ITEMS).contains(&n) {
        return Err(CounterexampleError::InvalidParameter(format!(
            "floor_n3 needs 3 <= n <= {MAX_ITEMS}, got {n}"
        )));
    }
    let blocks = n / 3;
    let clauses = (0..blocks)
        .map(|k| {
            (0..n)
                .map(|g| if g / 3 == k { q(1, 3) } else { q(0, 1) })
                .collect()
        })
        .collect();
    let last = ValuationOracle::xos(clauses);
    let mut agents = vec![ValuationOracle::unit(n); n - 1];
    agents.push(last);
    let names = (1..=n).map(|g| format!("g{g}")).collect();
    Ok(Instance::new(n, agents, format!("floor_n3:{n}"))?.with_item_names(names)?)
}

/// A largest set `N'` of agents with `d_i < |N'|` for every `i ∈ N'`, in
/// increasing index order.
pub fn has_blocking_subset(d: &[usize]) -> Option<Vec<usize>> {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by_key(|&i| (d[i], i));
    (1..=d.len()).rev().find_map(|k| {
        (d[order[k - 1]] < k).then(|| {
            let mut set = order[..k].to_vec();
            set.sort_unstable();
            set
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mms::{mms_value, MmsBudget};

    #[test]
    fn blocking_subsets() {
        assert_eq!(has_blocking_subset(&[5, 1, 1]), Some(vec![1, 2]));
        assert_eq!(has_blocking_subset(&[3, 2, 2]), None);
        assert_eq!(has_blocking_subset(&[2, 2, 2]), Some(vec![0, 1, 2]));
        assert_eq!(has_blocking_subset(&[1, 4, 4, 4]), None);
        assert_eq!(has_blocking_subset(&[0]), Some(vec![0]));
    }

    #[test]
    fn half_cap_layout() {
        let h = instance_half_cap(&DemandVector::new(vec![2, 3]).unwrap()).unwrap();
        assert_eq!(h.instance.m(), 6);
        assert_eq!(h.bundles[1][2], ItemSet::from_items([4, 5]));
        assert_eq!(h.coordinates(5), vec![1, 2]);
        assert_eq!(h.instance.item_names()[5], "g(2,3)");
        let budget = MmsBudget::default();
        for (i, &di) in [2, 3].iter().enumerate() {
            let r = mms_value(h.instance.valuation(i), h.instance.ground(), di, &budget).unwrap();
            assert_eq!(r.value, q(1, 1));
        }
    }

    #[test]
    fn half_cap_single_item() {
        let h = instance_half_cap(&DemandVector::new(vec![1, 1]).unwrap()).unwrap();
        assert_eq!(h.instance.m(), 1);
        for i in 0..2 {
            assert_eq!(h.instance.value(i, ItemSet::singleton(0)), q(1, 1));
        }
    }

    #[test]
    fn half_cap_size_cap() {
        let d = DemandVector::new(vec![4, 3, 3]).unwrap();
        assert!(matches!(
            instance_half_cap(&d),
            Err(CounterexampleError::TooLarge { .. })
        ));
    }

    #[test]
    fn instance_421_values() {
        let inst = instance_421().unwrap();
        assert_eq!(inst.value(2, inst.ground()), q(1, 1));
        assert_eq!(inst.value(1, ItemSet::from_items([1, 2])), q(2, 3));
        assert_eq!(inst.value(1, ItemSet::from_items([0])), q(1, 1));
        assert_eq!(inst.value(0, ItemSet::EMPTY), q(0, 1));
        let budget = MmsBudget::default();
        for (i, d) in [4, 2, 1].into_iter().enumerate() {
            let r = mms_value(inst.valuation(i), inst.ground(), d, &budget).unwrap();
            assert_eq!(r.value, q(1, 1));
        }
    }

    #[test]
    fn floor_n3_blocks() {
        let inst = instance_floor_n3(7).unwrap();
        assert_eq!(inst.value(6, ItemSet::from_items([0, 1, 2])), q(1, 1));
        assert_eq!(inst.value(6, ItemSet::from_items([2, 3, 6])), q(1, 3));
        let r = mms_value(inst.valuation(6), inst.ground(), 2, &MmsBudget::default()).unwrap();
        assert_eq!(r.value, q(1, 1));
    }
}
