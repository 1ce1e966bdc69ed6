use mmslab_bench::{random_instance, MMS_SIZES};
use mmslab_core::mms::MmsBudget;
use mmslab_core::protocols::{solve, Dispatch, HalfMode};
use mmslab_core::valuations::GeneratedClass;
use mmslab_core::DemandVector;

#[test]
fn fixtures_are_deterministic() {
    for class in GeneratedClass::ALL {
        assert_eq!(
            random_instance(class, 3, 8, 1),
            random_instance(class, 3, 8, 1)
        );
    }
    assert_ne!(
        random_instance(GeneratedClass::Xos, 1, 8, 1),
        random_instance(GeneratedClass::Xos, 1, 8, 2)
    );
}

#[test]
fn mms_sizes_fit_the_default_budget() {
    let budget = MmsBudget::default();
    assert!(MMS_SIZES.iter().all(|&m| budget.allows(m, 3)));
}

#[test]
fn protocol_workloads_solve() {
    for d in [
        vec![3, 2, 2],
        vec![5, 2, 1],
        vec![4, 3, 1],
        vec![4, 2, 2],
        vec![3, 3, 4, 4],
    ] {
        let inst = random_instance(GeneratedClass::Xos, d.len(), 10, 11);
        let r = solve(
            &inst,
            HalfMode::UniformHalf,
            &DemandVector::new(d).unwrap(),
            &MmsBudget::default(),
        )
        .unwrap();
        let Dispatch::Solved { certificate, .. } = r else {
            panic!("expected a certificate");
        };
        assert!(certificate.recheck(&inst).unwrap().holds);
    }
}
