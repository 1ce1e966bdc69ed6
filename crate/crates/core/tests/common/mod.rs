//! Reference implementations that share no search code with the library:
//! plain enumeration without pruning, bounds or tables.

#![allow(dead_code)]

use mmslab_core::valuations::{random_valuation, GeneratedClass, GeneratorParams};
use mmslab_core::{Instance, ItemSet, Rational, ValuationOracle};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `μ^d` by trying every map from items to `d` labels.
pub fn mms_by_labelings(v: &ValuationOracle, m: usize, d: usize) -> Rational {
    let mut best: Option<Rational> = None;
    let mut labels = vec![0usize; m];
    loop {
        let mut parts = vec![ItemSet::EMPTY; d];
        for (g, &l) in labels.iter().enumerate() {
            parts[l] = parts[l].with(g);
        }
        let worst = parts.iter().map(|&p| v.value(p)).min().expect("d >= 1");
        if best.is_none_or(|b| worst > b) {
            best = Some(worst);
        }
        if !advance(&mut labels, d) {
            return best.expect("at least one labeling");
        }
    }
}

/// `μ^d` by iterating restricted-growth strings: `a_0 = 0` and
/// `a_g <= 1 + max(a_0..a_{g-1})`, with every label below `d`.
pub fn mms_by_rgs(v: &ValuationOracle, m: usize, d: usize) -> Rational {
    if m == 0 {
        return v.value(ItemSet::EMPTY);
    }
    let mut a = vec![0usize; m];
    let mut best: Option<Rational> = None;
    loop {
        let used = a.iter().max().expect("m >= 1") + 1;
        let mut parts = vec![ItemSet::EMPTY; d];
        for (g, &l) in a.iter().enumerate() {
            parts[l] = parts[l].with(g);
        }
        let worst = if used < d {
            v.value(ItemSet::EMPTY)
        } else {
            parts.iter().map(|&p| v.value(p)).min().expect("d >= 1")
        };
        if best.is_none_or(|b| worst > b) {
            best = Some(worst);
        }
        // Next string: bump the last position that can grow, reset the tail.
        let mut g = m;
        loop {
            if g == 1 {
                return best.expect("at least one string");
            }
            g -= 1;
            let prefix_max = a[..g].iter().copied().max().expect("g >= 1");
            if a[g] <= prefix_max && a[g] + 1 < d {
                a[g] += 1;
                for x in &mut a[g + 1..] {
                    *x = 0;
                }
                break;
            }
        }
    }
}

/// Odometer step over `base^len`; false after the last vector.
pub fn advance(v: &mut [usize], base: usize) -> bool {
    for x in v.iter_mut() {
        *x += 1;
        if *x < base {
            return true;
        }
        *x = 0;
    }
    false
}

/// Every map from items to `{discard, agent 0, .., agent n-1}`, no pruning.
pub fn exists_with_discards(inst: &Instance, thresholds: &[Rational]) -> bool {
    let (n, m) = (inst.agents(), inst.m());
    let mut labels = vec![0usize; m];
    loop {
        let mut bundles = vec![ItemSet::EMPTY; n];
        for (g, &l) in labels.iter().enumerate() {
            if l > 0 {
                bundles[l - 1] = bundles[l - 1].with(g);
            }
        }
        if (0..n).all(|i| inst.value(i, bundles[i]) >= thresholds[i]) {
            return true;
        }
        if !advance(&mut labels, n + 1) {
            return false;
        }
    }
}

/// `max_A min_i v_i(A_i) / μ_i` over every complete assignment, agents with
/// `μ_i = 0` skipped; `None` if every agent has `μ_i = 0`.
pub fn best_ratio(inst: &Instance, mus: &[Rational]) -> Option<Rational> {
    let (n, m) = (inst.agents(), inst.m());
    let mut labels = vec![0usize; m];
    let mut best: Option<Rational> = None;
    loop {
        let mut bundles = vec![ItemSet::EMPTY; n];
        for (g, &l) in labels.iter().enumerate() {
            bundles[l] = bundles[l].with(g);
        }
        let ratio = (0..n)
            .filter(|&i| !mus[i].is_zero())
            .map(|i| inst.value(i, bundles[i]) / mus[i])
            .min();
        if let Some(r) = ratio {
            if best.is_none_or(|b| r > b) {
                best = Some(r);
            }
        }
        if !advance(&mut labels, n) {
            return best;
        }
    }
}

/// Deterministic random valuations from the four generated families.
pub struct Sampler {
    pub rng: ChaCha8Rng,
    pub params: GeneratorParams,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            params: GeneratorParams::default(),
        }
    }

    pub fn valuation(&mut self, class: GeneratedClass, m: usize) -> ValuationOracle {
        let seed = self.rng.gen();
        random_valuation(class, m, seed, &self.params).expect("generator accepts m <= 32")
    }

    pub fn any_class(&mut self) -> GeneratedClass {
        GeneratedClass::ALL[self.rng.gen_range(0..GeneratedClass::ALL.len())]
    }

    pub fn instance(&mut self, class: GeneratedClass, n: usize, m: usize) -> Instance {
        let agents = (0..n).map(|_| self.valuation(class, m)).collect();
        Instance::new(m, agents, "random").expect("consistent item counts")
    }

    pub fn mixed_instance(&mut self, n: usize, m: usize) -> Instance {
        let agents = (0..n)
            .map(|_| {
                let c = self.any_class();
                self.valuation(c, m)
            })
            .collect();
        Instance::new(m, agents, "random").expect("consistent item counts")
    }
}
