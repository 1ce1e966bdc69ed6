//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so every line is printed; exits non-zero if any criterion fails.

mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{exists_with_discards, mms_by_labelings, mms_by_rgs, Sampler};
use mmslab_core::counterexamples::{
    instance_27, instance_421, instance_floor_n3, instance_half_cap, instance_submodular_6,
    structured_check_27, PROBE_EPSILON,
};
use mmslab_core::cuts::max_desired_half;
use mmslab_core::mms::{mms_value, verify_alpha_mms_d, verify_alpha_mms_p, MmsBudget};
use mmslab_core::oracle::{best_alpha, exists_alpha_mms, AlphaValue, Existence, SearchBudget};
use mmslab_core::protocols::{
    cut_and_choose_two, four_agents_3344, three_agents_322, three_agents_422, three_agents_431,
    three_agents_521, two_types, AgentType, ProtocolCertificate, ProtocolError,
};
use mmslab_core::valuations::{
    is_subadditive, is_submodular, third_transform, CheckMode, GeneratedClass,
};
use mmslab_core::{
    guarantee_dominates, q, Allocation, DemandVector, Instance, ItemSet, Partition, Rational,
    ThresholdVector,
};
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn demand(d: &[usize]) -> DemandVector {
    DemandVector::new(d.to_vec()).unwrap()
}

fn alpha(a: &[Rational]) -> ThresholdVector {
    ThresholdVector::new(a.to_vec()).unwrap()
}

fn submodular_six() -> Outcome {
    let inst = instance_submodular_6().unwrap();
    let best = best_alpha(&inst, &demand(&[3, 3, 3]), &SearchBudget::default()).unwrap();
    let triples: Vec<(CheckMode, u64, bool)> = inst
        .valuations()
        .iter()
        .map(|v| {
            let r = is_submodular(v);
            (r.mode, r.checked, r.holds())
        })
        .collect();
    let submodular = triples
        .iter()
        .all(|&(mode, checked, holds)| mode == CheckMode::Exhaustive && checked == 1458 && holds);
    outcome(
        best.alpha == AlphaValue::Finite(q(2, 3)) && submodular,
        format!(
            "best alpha {} over 3^6; submodular {:?}",
            best.alpha,
            triples.iter().map(|t| (t.1, t.2)).collect::<Vec<_>>()
        ),
    )
}

fn upper_half() -> Outcome {
    let h = instance_half_cap(&demand(&[2, 2, 2])).unwrap();
    let best = best_alpha(&h.instance, &demand(&[2, 2, 2]), &SearchBudget::default()).unwrap();
    outcome(
        best.alpha == AlphaValue::Finite(q(1, 2)) && best.record.space == 6561,
        format!(
            "best alpha {} over {} allocations",
            best.alpha, best.record.space
        ),
    )
}

fn four_two_one() -> Outcome {
    let inst = instance_421().unwrap();
    let d = demand(&[4, 2, 1]);
    let budget = SearchBudget::default();
    let half = exists_alpha_mms(&inst, &alpha(&[q(1, 2); 3]), &d, &budget).unwrap();
    let rounded = inst.map_valuations("thirds", |v| third_transform(v).unwrap());
    let a = q(1, 3) + PROBE_EPSILON;
    let third = exists_alpha_mms(&rounded, &alpha(&[a; 3]), &d, &budget).unwrap();
    outcome(
        !half.exists() && !third.exists(),
        format!(
            "1/2: exists={}; after rounding, {a}: exists={}",
            half.exists(),
            third.exists()
        ),
    )
}

fn grid27() -> Outcome {
    let g = instance_27().unwrap();
    let cert = structured_check_27(&g);
    let scans: Vec<_> = g.instance.valuations().iter().map(is_subadditive).collect();
    let pairs: u64 = scans.iter().map(|r| r.checked).sum();
    let scanned = scans
        .iter()
        .all(|r| r.holds() && r.checked == 3 * (1 << 18));
    let branches: Vec<usize> = cert.placements.iter().map(|p| p.branches).collect();
    outcome(
        cert.nonexistence() && cert.placements.len() == 3 && scanned && g.claim_holds(),
        format!("branches {branches:?} all fail; {pairs} bundle pairs subadditive"),
    )
}

fn floor_n3() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for n in [3usize, 6] {
        let inst = instance_floor_n3(n).unwrap();
        let mut d = vec![n; n];
        d[n - 1] = n / 3;
        let mut a = vec![PROBE_EPSILON; n];
        a[n - 1] = q(1, 2);
        let d = demand(&d);
        let r = exists_alpha_mms(&inst, &alpha(&a), &d, &SearchBudget::default()).unwrap();
        let mus: Vec<Rational> = (0..n)
            .map(|i| mms_by_labelings(inst.valuation(i), n, d.get(i)))
            .collect();
        let thresholds: Vec<Rational> = mus.iter().zip(&a).map(|(m, x)| m * x).collect();
        let reference = exists_with_discards(&inst, &thresholds);
        ok &= !r.exists() && !reference;
        details.push(format!(
            "n={n}: exists={} reference={reference}",
            r.exists()
        ));
    }
    outcome(ok, details.join(", "))
}

type Runner = fn(&Instance, &[Partition]) -> Result<ProtocolCertificate, ProtocolError>;

fn random_partition(s: &mut Sampler, m: usize, d: usize) -> Partition {
    let assignment: Vec<usize> = (0..m).map(|_| s.rng.gen_range(0..d)).collect();
    let mut parts = vec![ItemSet::EMPTY; d];
    for (g, &a) in assignment.iter().enumerate() {
        parts[a] = parts[a].with(g);
    }
    Partition::of_items(m, parts).unwrap()
}

fn partitions_for(
    s: &mut Sampler,
    inst: &Instance,
    sizes: &[usize],
    witness: bool,
) -> Vec<Partition> {
    sizes
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if witness {
                mms_value(inst.valuation(i), inst.ground(), d, &MmsBudget::default())
                    .unwrap()
                    .witness
            } else {
                random_partition(s, inst.m(), d)
            }
        })
        .collect()
}

/// Runs `trial` 500 times per generated class; returns failures and a sample.
fn per_class(
    s: &mut Sampler,
    mut trial: impl FnMut(&mut Sampler, GeneratedClass, usize) -> Result<(), String>,
) -> (usize, Option<String>) {
    let mut failures = 0;
    let mut first = None;
    for class in GeneratedClass::ALL {
        for t in 0..500 {
            if let Err(e) = trial(s, class, t) {
                failures += 1;
                first.get_or_insert(format!("{}: {e}", class.name()));
            }
        }
    }
    (failures, first)
}

fn check_certificate(
    inst: &Instance,
    cert: Result<ProtocolCertificate, ProtocolError>,
    expected: &[Rational],
    partitions: &[Partition],
) -> Result<(), String> {
    let cert = cert.map_err(|e| e.to_string())?;
    let v = verify_alpha_mms_p(&cert.allocation, inst, &alpha(expected), partitions)
        .map_err(|e| e.to_string())?;
    if v.holds {
        Ok(())
    } else {
        Err(format!("agent {:?} below threshold", v.first_violation()))
    }
}

fn protocol_suite() -> Outcome {
    let half = q(1, 2);
    let one = q(1, 1);
    let three: [(&str, Runner, [usize; 3], [Rational; 3]); 4] = [
        ("three_agents_322", three_agents_322, [3, 2, 2], [half; 3]),
        (
            "three_agents_521",
            three_agents_521,
            [5, 2, 1],
            [one, half, half],
        ),
        (
            "three_agents_431",
            three_agents_431,
            [4, 3, 1],
            [one, half, half],
        ),
        (
            "three_agents_422",
            three_agents_422,
            [4, 2, 2],
            [one, half, half],
        ),
    ];
    let mut s = Sampler::new(6);
    let mut lines = Vec::new();
    let mut total_failures = 0;

    let (f, e) = per_class(&mut s, |s, class, t| {
        let m = s.rng.gen_range(2..=10);
        let inst = s.instance(class, 2, m);
        let parts = partitions_for(s, &inst, &[1, 2], t % 2 == 0);
        check_certificate(
            &inst,
            cut_and_choose_two(&inst, &parts[1]),
            &[half, one],
            &parts,
        )
    });
    total_failures += f;
    lines.push(format!(
        "cut_and_choose_two {f}{}",
        e.map(|x| format!(" ({x})")).unwrap_or_default()
    ));

    for (name, run, sizes, expected) in three {
        let (f, e) = per_class(&mut s, |s, class, t| {
            let m = s.rng.gen_range(3..=10);
            let inst = s.instance(class, 3, m);
            let parts = partitions_for(s, &inst, &sizes, t % 2 == 0);
            check_certificate(&inst, run(&inst, &parts), &expected, &parts)
        });
        total_failures += f;
        lines.push(format!(
            "{name} {f}{}",
            e.map(|x| format!(" ({x})")).unwrap_or_default()
        ));
    }

    let (f, e) = per_class(&mut s, |s, class, t| {
        let m = s.rng.gen_range(4..=10);
        let inst = s.instance(class, 4, m);
        let parts = partitions_for(s, &inst, &[3, 3, 4, 4], t % 2 == 0);
        check_certificate(&inst, four_agents_3344(&inst, &parts), &[half; 4], &parts)
    });
    total_failures += f;
    lines.push(format!(
        "four_agents_3344 {f}{}",
        e.map(|x| format!(" ({x})")).unwrap_or_default()
    ));

    let (f, e) = per_class(&mut s, |s, class, t| {
        let n = s.rng.gen_range(2..=6);
        let m = s.rng.gen_range(2..=10);
        let vs = s.valuation(class, m);
        let vt = s.valuation(class, m);
        let types: Vec<AgentType> = (0..n)
            .map(|_| {
                if s.rng.gen_bool(0.5) {
                    AgentType::S
                } else {
                    AgentType::T
                }
            })
            .collect();
        let agents = types
            .iter()
            .map(|t| match t {
                AgentType::S => vs.clone(),
                AgentType::T => vt.clone(),
            })
            .collect();
        let inst = Instance::new(m, agents, "two types").unwrap();
        let by_type = |s: &mut Sampler, v: &mmslab_core::ValuationOracle| {
            if t % 2 == 0 {
                mms_value(v, inst.ground(), n, &MmsBudget::default())
                    .unwrap()
                    .witness
            } else {
                random_partition(s, m, n)
            }
        };
        let ps = by_type(s, &vs);
        let pt = by_type(s, &vt);
        let parts: Vec<Partition> = types
            .iter()
            .map(|t| match t {
                AgentType::S => ps.clone(),
                AgentType::T => pt.clone(),
            })
            .collect();
        check_certificate(
            &inst,
            two_types(&inst, &types, &ps, &pt),
            &vec![half; n],
            &parts,
        )
    });
    total_failures += f;
    lines.push(format!(
        "two_types {f}{}",
        e.map(|x| format!(" ({x})")).unwrap_or_default()
    ));

    outcome(
        total_failures == 0,
        format!("failures per protocol: {}", lines.join(", ")),
    )
}

fn observation_1() -> Outcome {
    let mut s = Sampler::new(7);
    let mut worst_slack = usize::MAX;
    let mut failures = 0;
    let trials = 2000;
    for _ in 0..trials {
        let m = s.rng.gen_range(1..=12);
        let r = s.rng.gen_range(1..=5);
        let class = s.any_class();
        let v = s.valuation(class, m);
        let p = random_partition(&mut s, m, r);
        let cut = ItemSet::from_bits(s.rng.gen_range(0..1u32 << m));
        let got = max_desired_half(&v, &p, cut).len();
        let need = r.div_ceil(2);
        if got < need {
            failures += 1;
        } else {
            worst_slack = worst_slack.min(got - need);
        }
    }
    outcome(
        failures == 0,
        format!("{trials} triples, {failures} below ceil(r/2), minimum slack {worst_slack}"),
    )
}

fn observation_2() -> Outcome {
    let mut s = Sampler::new(8);
    let budget = MmsBudget::default();
    let mut checked = 0;
    let mut failures = 0;
    while checked < 200 {
        let m = s.rng.gen_range(1..=6);
        let inst = s.mixed_instance(3, m);
        let mut bundles = vec![ItemSet::EMPTY; 3];
        for g in 0..m {
            let a = s.rng.gen_range(0..4);
            if a < 3 {
                bundles[a] = bundles[a].with(g);
            }
        }
        let alloc = Allocation::new(bundles);
        let d: Vec<usize> = (0..3).map(|_| s.rng.gen_range(1..=4)).collect();
        let d_other: Vec<usize> = d.iter().map(|&x| x + s.rng.gen_range(0..=2)).collect();
        // alpha_i is a fraction of what A_i already achieves, so the premise holds.
        let a: Vec<Rational> = (0..3)
            .map(|i| {
                let mu = mms_value(inst.valuation(i), inst.ground(), d[i], &budget)
                    .unwrap()
                    .value;
                let ratio = if mu == q(0, 1) {
                    q(1, 1)
                } else {
                    (inst.value(i, alloc.bundle(i)) / mu).min(q(1, 1))
                };
                ratio * q(s.rng.gen_range(1..=4), 4)
            })
            .collect();
        let a_other: Vec<Rational> = a.iter().map(|x| x * q(s.rng.gen_range(0..=4), 4)).collect();
        let (a, a_other) = (alpha(&a), alpha(&a_other));
        let (d, d_other) = (demand(&d), demand(&d_other));
        if !guarantee_dominates(&a, &d, &a_other, &d_other).unwrap() {
            failures += 1;
            continue;
        }
        let premise = verify_alpha_mms_d(&alloc, &inst, &a, &d, &budget).unwrap();
        if !premise.holds {
            failures += 1;
            continue;
        }
        let conclusion = verify_alpha_mms_d(&alloc, &inst, &a_other, &d_other, &budget).unwrap();
        if !conclusion.holds {
            failures += 1;
        }
        checked += 1;
    }
    outcome(
        failures == 0,
        format!("{checked} dominated tuples, {failures} failures"),
    )
}

fn oracle_cross_check() -> Outcome {
    let mut s = Sampler::new(9);
    let budget = SearchBudget::default();
    let mut disagreements = Vec::new();
    let mut mms_checks = 0;
    let mut found = 0;
    let levels = [q(1, 4), q(1, 2), q(2, 3), q(3, 4), q(1, 1)];
    for t in 0..100 {
        let m = s.rng.gen_range(1..=6);
        let inst = s.mixed_instance(3, m);
        let d: Vec<usize> = (0..3).map(|_| s.rng.gen_range(1..=3)).collect();
        let a: Vec<Rational> = (0..3)
            .map(|_| levels[s.rng.gen_range(0..levels.len())])
            .collect();
        let mut mus = Vec::new();
        for (i, &di) in d.iter().enumerate() {
            let v = inst.valuation(i);
            let lib = mms_value(v, inst.ground(), di, &budget.mms).unwrap().value;
            let rgs = mms_by_rgs(v, m, di);
            mms_checks += 1;
            if lib != rgs {
                disagreements.push(format!(
                    "instance {t}: mms agent {i} d={di}: {lib} vs {rgs}"
                ));
            }
            mus.push(rgs);
        }
        let thresholds: Vec<Rational> = mus.iter().zip(&a).map(|(m, x)| m * x).collect();
        let reference = exists_with_discards(&inst, &thresholds);
        let lib = exists_alpha_mms(&inst, &alpha(&a), &demand(&d), &budget).unwrap();
        if let Existence::Exists(w) = &lib {
            let v = verify_alpha_mms_d(w, &inst, &alpha(&a), &demand(&d), &budget.mms).unwrap();
            if !v.holds {
                disagreements.push(format!("instance {t}: witness fails verification"));
            }
        }
        found += usize::from(reference);
        if lib.exists() != reference {
            disagreements.push(format!(
                "instance {t}: exists {} vs {reference}",
                lib.exists()
            ));
        }
    }
    outcome(
        disagreements.is_empty(),
        format!(
            "100 instances ({found} feasible), {mms_checks} mms values; {}",
            if disagreements.is_empty() {
                "no disagreement".to_string()
            } else {
                disagreements.join("; ")
            }
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            "submodular six-item bound",
            submodular_six,
            Duration::from_secs(1),
        ),
        ("upper half at (2,2,2)", upper_half, Duration::from_secs(1)),
        (
            "(4,2,1) and one-third rounding",
            four_two_one,
            Duration::from_secs(1),
        ),
        ("(3,3,3) grid", grid27, Duration::from_secs(60)),
        ("floor(n/3) at n = 3, 6", floor_n3, Duration::from_secs(5)),
        (
            "protocol guarantee suite",
            protocol_suite,
            Duration::from_secs(300),
        ),
        (
            "maximum desired half bound",
            observation_1,
            Duration::from_secs(10),
        ),
        (
            "guarantee domination",
            observation_2,
            Duration::from_secs(30),
        ),
        (
            "oracle cross-check",
            oracle_cross_check,
            Duration::from_secs(120),
        ),
    ];
    let mut failed = 0;
    for (k, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(run));
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(o) => (o.passed && elapsed < *limit, o.detail),
            Err(_) => (false, "panicked".to_string()),
        };
        failed += usize::from(!passed);
        println!(
            "{} [{}] {name}: {detail} ({:.2?} of {:?})",
            if passed { "PASS" } else { "FAIL" },
            k + 1,
            elapsed,
            limit
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
