use super::{
    has_blocking_subset, instance_27, instance_27_with_epsilon, instance_421, instance_floor_n3,
    instance_half_cap, instance_n_minus_1, instance_submodular_6, structured_check_27,
    CounterexampleError,
};
use crate::model::{DemandVector, Instance, ThresholdVector};
use crate::oracle::{best_alpha, exists_alpha_mms, AlphaValue, SearchBudget};
use crate::q;
use crate::valuations::{
    is_monotone, is_subadditive, is_submodular, third_transform, ValuationOracle,
};
use crate::Rational;

/// Margin used when probing thresholds just above a claimed bound.
pub const PROBE_EPSILON: Rational = Rational::new_raw(1, 100);

/// One line of the counterexample table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteRow {
    pub key: &'static str,
    pub claim: &'static str,
    pub passed: bool,
    pub detail: String,
}

struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Checks {
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn expect(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        if ok {
            self.notes.push(what);
        } else {
            self.failures.push(what);
        }
    }

    fn classes(&mut self, inst: &Instance) {
        for (i, v) in inst.valuations().iter().enumerate() {
            self.expect(is_monotone(v).holds(), format!("agent {} monotone", i + 1));
            self.expect(
                is_subadditive(v).holds(),
                format!("agent {} subadditive", i + 1),
            );
        }
    }

    fn row(self, key: &'static str, claim: &'static str) -> SuiteRow {
        let passed = self.failures.is_empty();
        let detail = if passed {
            self.notes.join("; ")
        } else {
            format!("failed: {}", self.failures.join("; "))
        };
        SuiteRow {
            key,
            claim,
            passed,
            detail,
        }
    }
}

fn demand(d: &[usize]) -> DemandVector {
    DemandVector::new(d.to_vec()).expect("positive demands")
}

fn alpha(a: &[Rational]) -> ThresholdVector {
    ThresholdVector::new(a.to_vec()).expect("non-negative thresholds")
}

fn not_exists(inst: &Instance, a: &[Rational], d: &[usize]) -> Result<bool, String> {
    exists_alpha_mms(inst, &alpha(a), &demand(d), &SearchBudget::default())
        .map(|r| !r.exists())
        .map_err(|e| e.to_string())
}

fn best(inst: &Instance, d: &[usize]) -> Result<AlphaValue, String> {
    best_alpha(inst, &demand(d), &SearchBudget::default())
        .map(|b| b.alpha)
        .map_err(|e| e.to_string())
}

type RowResult = Result<SuiteRow, CounterexampleError>;

fn upper_half() -> RowResult {
    let mut c = Checks::new();
    let h = instance_half_cap(&demand(&[2, 2, 2]))?;
    c.classes(&h.instance);
    let crossing = (0..3).all(|i| {
        (0..3).filter(|&k| k != i).all(|k| {
            h.bundles[i]
                .iter()
                .all(|b| h.bundles[k].iter().all(|c| !b.is_disjoint(*c)))
        })
    });
    c.expect(crossing, "bundles of distinct agents intersect");
    match best(&h.instance, &[2, 2, 2]) {
        Ok(a) => c.expect(
            a == AlphaValue::Finite(q(1, 2)),
            format!("best alpha {a} over 3^8"),
        ),
        Err(e) => c.expect(false, e),
    }
    Ok(c.row("upper_half", "no (1/2+e)-MMS(d) allocation, d = (2,2,2)"))
}

fn n_minus_1() -> RowResult {
    let mut c = Checks::new();
    let inst = instance_n_minus_1(3)?;
    c.classes(&inst);
    match not_exists(&inst, &[PROBE_EPSILON; 3], &[2, 2, 2]) {
        Ok(ok) => c.expect(ok, "no allocation at alpha = 1/100"),
        Err(e) => c.expect(false, e),
    }
    match best(&instance_n_minus_1(4)?, &[3, 3, 3, 3]) {
        Ok(a) => c.expect(
            a == AlphaValue::Finite(q(0, 1)),
            format!("n = 4 best alpha {a}"),
        ),
        Err(e) => c.expect(false, e),
    }
    Ok(c.row("n_minus_1", "d_i < n for all i rules out every alpha > 0"))
}

fn blocking() -> RowResult {
    let mut c = Checks::new();
    let d = [5, 1, 1];
    let found = has_blocking_subset(&d);
    c.expect(
        found == Some(vec![1, 2]),
        format!("blocking set for (5,1,1): {found:?}"),
    );
    // The two blocked agents with one shared item, the first agent valuing nothing.
    let sub = instance_n_minus_1(2)?;
    let zero = ValuationOracle::additive(vec![q(0, 1)]);
    let mut agents = vec![zero];
    agents.extend(sub.valuations().iter().cloned());
    let inst = Instance::new(1, agents, "blocked")?;
    match not_exists(&inst, &[PROBE_EPSILON; 3], &d) {
        Ok(ok) => c.expect(ok, "no allocation at alpha = 1/100"),
        Err(e) => c.expect(false, e),
    }
    c.expect(
        has_blocking_subset(&[3, 2, 2]).is_none(),
        "(3,2,2) is not blocked",
    );
    Ok(c.row(
        "blocking_subset",
        "d_i < |N'| on a subset N' rules out every alpha > 0",
    ))
}

fn four_two_one() -> RowResult {
    let mut c = Checks::new();
    let inst = instance_421()?;
    c.classes(&inst);
    match not_exists(&inst, &[q(1, 2); 3], &[4, 2, 1]) {
        Ok(ok) => c.expect(ok, "no 1/2-MMS(4,2,1) allocation over 3^4"),
        Err(e) => c.expect(false, e),
    }
    Ok(c.row("instance_421", "no 1/2-MMS(4,2,1) allocation"))
}

fn one_third() -> RowResult {
    let mut c = Checks::new();
    let base = instance_421()?;
    let rounded = base.map_valuations("instance_421_thirds", |v| {
        third_transform(v).expect("normalized valuation")
    });
    c.classes(&rounded);
    let a = q(1, 3) + PROBE_EPSILON;
    match not_exists(&rounded, &[a; 3], &[4, 2, 1]) {
        Ok(ok) => c.expect(ok, "no (1/3+1/100)-MMS(4,2,1) allocation after rounding"),
        Err(e) => c.expect(false, e),
    }
    Ok(c.row(
        "one_third_rounding",
        "rounding lifts 1/2 impossibility to 1/3+e",
    ))
}

fn floor_n3() -> RowResult {
    let mut c = Checks::new();
    for n in [3usize, 6] {
        let inst = instance_floor_n3(n)?;
        c.classes(&inst);
        let mut d = vec![n; n];
        d[n - 1] = n / 3;
        let mut a = vec![PROBE_EPSILON; n];
        a[n - 1] = q(1, 2);
        match not_exists(&inst, &a, &d) {
            Ok(ok) => c.expect(ok, format!("n = {n}: no allocation over {n}^{n}")),
            Err(e) => c.expect(false, e),
        }
    }
    Ok(c.row("floor_n3", "no 1/2-MMS(n,..,n,floor(n/3)) allocation"))
}

fn grid27() -> RowResult {
    let mut c = Checks::new();
    let g = instance_27()?;
    c.classes(&g.instance);
    c.expect(
        g.claim_holds(),
        "no distinguished complement contains another",
    );
    let cert = structured_check_27(&g);
    let branches: usize = cert.placements.iter().map(|p| p.branches).sum();
    c.expect(
        cert.nonexistence(),
        format!("all three placements of the 1 fail ({branches} branches)"),
    );
    let flat = structured_check_27(&instance_27_with_epsilon(q(0, 1))?);
    c.expect(!flat.nonexistence(), "epsilon = 0 admits an allocation");
    Ok(c.row("grid27", "no (1,1/2,1/2)-MMS allocation for three agents"))
}

fn submodular_6() -> RowResult {
    let mut c = Checks::new();
    let inst = instance_submodular_6()?;
    c.classes(&inst);
    for (i, v) in inst.valuations().iter().enumerate() {
        let r = is_submodular(v);
        c.expect(
            r.holds(),
            format!("agent {} submodular ({} triples)", i + 1, r.checked),
        );
    }
    match best(&inst, &[3, 3, 3]) {
        Ok(a) => c.expect(a == AlphaValue::Finite(q(2, 3)), format!("best alpha {a}")),
        Err(e) => c.expect(false, e),
    }
    Ok(c.row(
        "submodular_6",
        "no (2/3+e)-MMS allocation under submodular valuations",
    ))
}

/// Builds every counterexample and runs its checks; one row per claim.
pub fn run_suite() -> Result<Vec<SuiteRow>, CounterexampleError> {
    [
        upper_half,
        n_minus_1,
        blocking,
        four_two_one,
        one_third,
        floor_n3,
        grid27,
        submodular_6,
    ]
    .iter()
    .map(|f| f())
    .collect()
}
