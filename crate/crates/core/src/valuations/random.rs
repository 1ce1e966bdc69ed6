//! Seeded generators for random valuations in the closed-form families.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    BudgetAdditiveValuation, CoverageValuation, ValuationClass, ValuationError, ValuationKind,
    ValuationOracle,
};
use crate::items::MAX_ITEMS;
use crate::{q, Rational};

const DENOMINATORS: [i64; 5] = [1, 2, 3, 4, 6];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratedClass {
    Additive,
    Xos,
    BudgetAdditive,
    Coverage,
}

impl GeneratedClass {
    pub const ALL: [GeneratedClass; 4] = [
        GeneratedClass::Additive,
        GeneratedClass::Xos,
        GeneratedClass::BudgetAdditive,
        GeneratedClass::Coverage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratedClass::Additive => "additive",
            GeneratedClass::Xos => "xos",
            GeneratedClass::BudgetAdditive => "budget-additive",
            GeneratedClass::Coverage => "coverage",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        GeneratedClass::ALL.into_iter().find(|c| c.name() == name)
    }
}

/// Shape parameters for [`random_valuation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorParams {
    /// Number of additive clauses of an XOS valuation.
    pub clauses: usize,
    /// Largest numerator of a generated weight.
    pub max_numerator: i64,
    /// Ground elements of a coverage valuation (at most 64).
    pub elements: usize,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            clauses: 4,
            max_numerator: 6,
            elements: 12,
        }
    }
}

fn weight(rng: &mut ChaCha8Rng, max_numerator: i64) -> Rational {
    let d = *DENOMINATORS.choose(rng).expect("nonempty");
    q(rng.gen_range(0..=max_numerator), d)
}

fn weights(rng: &mut ChaCha8Rng, m: usize, max_numerator: i64) -> Vec<Rational> {
    (0..m).map(|_| weight(rng, max_numerator)).collect()
}

/// A random valuation of the given family on `m` items, deterministic in `seed`.
///
/// Additive oracles are declared additive, XOS oracles XOS, and budget-additive
/// and coverage oracles submodular.
pub fn random_valuation(
    class: GeneratedClass,
    m: usize,
    seed: u64,
    params: &GeneratorParams,
) -> Result<ValuationOracle, ValuationError> {
    if m > MAX_ITEMS {
        return Err(ValuationError::TooManyItems(m));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = params.max_numerator.max(1);
    match class {
        GeneratedClass::Additive => Ok(ValuationOracle::additive(weights(&mut rng, m, top))),
        GeneratedClass::Xos => {
            let clauses = (0..params.clauses.max(1))
                .map(|_| weights(&mut rng, m, top))
                .collect::<Vec<_>>();
            let x = super::XosValuation::new(clauses)?;
            ValuationOracle::new(m, ValuationKind::Xos(x), ValuationClass::Xos)
        }
        GeneratedClass::BudgetAdditive => {
            let w = weights(&mut rng, m, top);
            let total: Rational = w.iter().sum();
            let budget = total * q(rng.gen_range(1..=4), 4);
            let b = BudgetAdditiveValuation::new(w, budget)?;
            ValuationOracle::new(
                m,
                ValuationKind::BudgetAdditive(b),
                ValuationClass::Submodular,
            )
        }
        GeneratedClass::Coverage => {
            let e = params.elements.clamp(1, 64);
            let mask = if e == 64 { u64::MAX } else { (1u64 << e) - 1 };
            let covers = (0..m)
                .map(|_| rng.gen::<u64>() & rng.gen::<u64>() & mask)
                .collect();
            let element_weights = weights(&mut rng, e, top);
            let c = CoverageValuation::new(covers, element_weights)?;
            ValuationOracle::new(m, ValuationKind::Coverage(c), ValuationClass::Submodular)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valuations::{is_monotone, is_subadditive, is_submodular};

    #[test]
    fn deterministic_in_seed() {
        let p = GeneratorParams::default();
        for c in GeneratedClass::ALL {
            let a = random_valuation(c, 6, 7, &p).unwrap();
            let b = random_valuation(c, 6, 7, &p).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn additive_has_m_weights() {
        let v =
            random_valuation(GeneratedClass::Additive, 6, 1, &GeneratorParams::default()).unwrap();
        match v.kind() {
            ValuationKind::Additive(a) => assert_eq!(a.weights().len(), 6),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn xos_has_requested_clauses() {
        let p = GeneratorParams {
            clauses: 4,
            ..GeneratorParams::default()
        };
        let v = random_valuation(GeneratedClass::Xos, 8, 2, &p).unwrap();
        match v.kind() {
            ValuationKind::Xos(x) => assert_eq!(x.clauses().len(), 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn coverage_is_submodular() {
        let v =
            random_valuation(GeneratedClass::Coverage, 6, 3, &GeneratorParams::default()).unwrap();
        assert!(is_submodular(&v).holds());
    }

    #[test]
    fn generated_oracles_sit_in_their_class() {
        let p = GeneratorParams::default();
        for seed in 0..40 {
            for c in GeneratedClass::ALL {
                let v = random_valuation(c, 6, seed, &p).unwrap();
                assert!(is_monotone(&v).holds());
                assert!(is_subadditive(&v).holds());
                if c != GeneratedClass::Xos {
                    assert!(is_submodular(&v).holds(), "{} seed {seed}", c.name());
                }
            }
        }
    }
}
