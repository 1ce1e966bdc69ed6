//! Fixed workloads shared by the benchmarks in `benches/`.

use mmslab_core::valuations::{random_valuation, GeneratedClass, GeneratorParams};
use mmslab_core::{Instance, ValuationOracle};

/// `n` agents of one generated class on `m` items, deterministic in `seed`.
pub fn random_instance(class: GeneratedClass, n: usize, m: usize, seed: u64) -> Instance {
    let params = GeneratorParams::default();
    let agents: Vec<ValuationOracle> = (0..n as u64)
        .map(|i| random_valuation(class, m, seed * 97 + i, &params).expect("m fits"))
        .collect();
    Instance::new(m, agents, format!("bench:{}:{seed}", class.name())).expect("consistent")
}

/// The item counts swept by the MMS benchmark.
pub const MMS_SIZES: [usize; 4] = [8, 10, 12, 14];
