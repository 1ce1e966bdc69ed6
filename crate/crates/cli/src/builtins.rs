//! Counterexample instances addressable by name.

use mmslab_core::counterexamples::{
    instance_27, instance_421, instance_floor_n3, instance_half_cap, instance_n_minus_1,
    instance_submodular_6,
};
use mmslab_core::{DemandVector, Instance};

use crate::CliError;

/// Accepted names; `N` and `d1,d2,..` are parameters.
pub const NAMES: [&str; 6] = [
    "submodular_6",
    "grid27",
    "instance_421",
    "half_cap:d1,d2,..",
    "n_minus_1:N",
    "floor_n3:N",
];

fn count(name: &str, arg: Option<&str>) -> Result<usize, CliError> {
    let arg =
        arg.ok_or_else(|| CliError::Input(format!("{name} needs a parameter, e.g. {name}:3")))?;
    arg.parse()
        .map_err(|_| CliError::Input(format!("bad parameter {arg:?} for {name}")))
}

pub fn resolve(spec: &str) -> Result<Instance, CliError> {
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    let inst = match name {
        "submodular_6" => instance_submodular_6()?,
        "grid27" => instance_27()?.instance,
        "instance_421" => instance_421()?,
        "half_cap" => {
            let d = arg
                .unwrap_or("2,2,2")
                .split(',')
                .map(|x| x.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| CliError::Input(format!("bad demand vector in {spec:?}")))?;
            instance_half_cap(&DemandVector::new(d)?)?.instance
        }
        "n_minus_1" => instance_n_minus_1(count(name, arg)?)?,
        "floor_n3" => instance_floor_n3(count(name, arg)?)?,
        _ => {
            return Err(CliError::Input(format!(
                "unknown builtin {spec:?}; known: {}",
                NAMES.join(", ")
            )))
        }
    };
    Ok(inst)
}

/// True if `spec` looks like a builtin name rather than a path.
pub fn is_builtin(spec: &str) -> bool {
    let name = spec.split_once(':').map_or(spec, |(n, _)| n);
    NAMES.iter().any(|n| n.split(':').next() == Some(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        assert_eq!(resolve("half_cap").unwrap().label(), "half_cap:2,2,2");
        assert_eq!(resolve("n_minus_1:4").unwrap().agents(), 4);
        assert_eq!(resolve("floor_n3:6").unwrap().m(), 6);
        assert!(resolve("n_minus_1").is_err());
        assert!(resolve("nope").is_err());
        assert!(is_builtin("half_cap:2,3"));
        assert!(!is_builtin("instance.json"));
    }
}
