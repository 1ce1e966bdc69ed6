//! JSON instance files.
//!
//! ```json
//! {"label": "pair", "m": 2, "items": ["a", "b"],
//!  "agents": [{"class": "additive", "spec": {"weights": ["1/2", "1"]}}]}
//! ```
//!
//! Rationals are strings in lowest terms (`"2/3"`, `"1"`). Table keys are
//! subset bitmasks with item `g` at bit `g`.

use std::collections::BTreeMap;
use std::fmt;

use mmslab_core::valuations::{
    AdditiveValuation, BlockCapValuation, BudgetAdditiveValuation, BundleMaxValuation,
    CoverageValuation, TableValuation, ValuationKind, XosValuation,
};
use mmslab_core::{Instance, ItemSet, Rational, ValuationClass, ValuationOracle};
use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::{builtins, CliError};

/// A rational that serializes as `"p/q"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rat(pub Rational);

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map(Rat).map_err(de::Error::custom)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

pub fn parse_rational(s: &str) -> Result<Rational, CliError> {
    s.trim()
        .parse::<Rational>()
        .map_err(|e| CliError::Input(format!("bad rational {s:?}: {e}")))
}

/// A subset bitmask used as a JSON object key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Mask(pub u32);

impl Serialize for Mask {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u32(self.0)
    }
}

impl<'de> Deserialize<'de> for Mask {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Mask;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a subset bitmask")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Mask, E> {
                u32::try_from(v).map(Mask).map_err(E::custom)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Mask, E> {
                v.parse()
                    .map(Mask)
                    .map_err(|_| E::custom(format!("bad bitmask {v:?}")))
            }
        }
        d.deserialize_any(V)
    }
}

fn rats(v: &[Rational]) -> Vec<Rat> {
    v.iter().copied().map(Rat).collect()
}

fn unrat(v: Vec<Rat>) -> Vec<Rational> {
    v.into_iter().map(|r| r.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub label: String,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub items: Option<Vec<String>>,
    pub agents: Vec<AgentEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentEntry {
    pub class: String,
    pub spec: Spec,
}

/// The valuation of one agent. Variants are told apart by their keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Spec {
    BudgetAdditive(BudgetSpec),
    Additive(WeightsSpec),
    Xos(ClausesSpec),
    Coverage(CoverageSpec),
    Table(TableSpec),
    BundleMax(BundleMaxSpec),
    BlockCap(BlockCapSpec),
    Thirds(ThirdsSpec),
    Builtin(BuiltinSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSpec {
    pub weights: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    pub weights: Vec<Rat>,
    pub budget: Rat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClausesSpec {
    pub clauses: Vec<Vec<Rat>>,
}

/// `covers[g]` lists the ground elements item `g` covers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageSpec {
    pub covers: Vec<Vec<usize>>,
    pub element_weights: Vec<Rat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub table: BTreeMap<Mask, Rat>,
}

/// `inner[i]` is indexed by bitmasks local to `bundles[i]`: bit `k` is the
/// `k`-th smallest item of the bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleMaxSpec {
    pub bundles: Vec<Vec<usize>>,
    pub inner: Vec<BTreeMap<Mask, Rat>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockCapSpec {
    pub blocks: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThirdsSpec {
    pub thirds: Box<AgentEntry>,
}

/// Agent `params.agent` (1-based) of a builtin instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinSpec {
    pub builtin: String,
    #[serde(default)]
    pub params: BuiltinParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinParams {
    pub agent: usize,
}

impl Default for BuiltinParams {
    fn default() -> Self {
        BuiltinParams { agent: 1 }
    }
}

fn items(set: ItemSet) -> Vec<usize> {
    set.iter().collect()
}

fn set_of(items: &[usize], m: usize) -> Result<ItemSet, CliError> {
    match items.iter().find(|&&g| g >= m) {
        Some(g) => Err(CliError::Input(format!(
            "item {g} out of range for m = {m}"
        ))),
        None => Ok(ItemSet::from_items(items.iter().copied())),
    }
}

fn table_values(table: &BTreeMap<Mask, Rat>, m: usize) -> Result<Vec<Rational>, CliError> {
    let size = 1usize << m;
    if table.len() != size || table.keys().any(|k| k.0 as usize >= size) {
        return Err(CliError::Input(format!(
            "a table over {m} items needs exactly the keys 0..{size}"
        )));
    }
    Ok(table.values().map(|r| r.0).collect())
}

fn table_map(values: &[Rational]) -> BTreeMap<Mask, Rat> {
    values
        .iter()
        .enumerate()
        .map(|(k, &v)| (Mask(k as u32), Rat(v)))
        .collect()
}

impl AgentEntry {
    pub fn from_oracle(v: &ValuationOracle) -> Self {
        let spec = match v.kind() {
            ValuationKind::Additive(a) => Spec::Additive(WeightsSpec {
                weights: rats(a.weights()),
            }),
            ValuationKind::Xos(x) => Spec::Xos(ClausesSpec {
                clauses: x.clauses().iter().map(|c| rats(c.weights())).collect(),
            }),
            ValuationKind::BudgetAdditive(b) => Spec::BudgetAdditive(BudgetSpec {
                weights: rats(b.weights()),
                budget: Rat(b.budget()),
            }),
            ValuationKind::Coverage(c) => Spec::Coverage(CoverageSpec {
                covers: c
                    .covers()
                    .iter()
                    .map(|&mask| (0..64).filter(|e| mask >> e & 1 == 1).collect())
                    .collect(),
                element_weights: rats(c.element_weights()),
            }),
            ValuationKind::Table(t) => Spec::Table(TableSpec {
                table: table_map(t.values()),
            }),
            ValuationKind::BundleMax(b) => Spec::BundleMax(BundleMaxSpec {
                bundles: b.bundles().iter().map(|&s| items(s)).collect(),
                inner: b.inner().iter().map(|t| table_map(t.values())).collect(),
            }),
            ValuationKind::BlockCap(b) => Spec::BlockCap(BlockCapSpec {
                blocks: b.blocks().iter().map(|&s| items(s)).collect(),
            }),
            ValuationKind::Thirds(inner) => Spec::Thirds(ThirdsSpec {
                thirds: Box::new(AgentEntry::from_oracle(inner)),
            }),
        };
        AgentEntry {
            class: v.class().name().to_string(),
            spec,
        }
    }

    pub fn to_oracle(&self, m: usize) -> Result<ValuationOracle, CliError> {
        let class = ValuationClass::parse(&self.class)
            .ok_or_else(|| CliError::Input(format!("unknown class {:?}", self.class)))?;
        let kind = match &self.spec {
            Spec::Additive(s) => {
                ValuationKind::Additive(AdditiveValuation::new(unrat(s.weights.clone()))?)
            }
            Spec::Xos(s) => ValuationKind::Xos(XosValuation::new(
                s.clauses.iter().map(|c| unrat(c.clone())).collect(),
            )?),
            Spec::BudgetAdditive(s) => ValuationKind::BudgetAdditive(BudgetAdditiveValuation::new(
                unrat(s.weights.clone()),
                s.budget.0,
            )?),
            Spec::Coverage(s) => {
                let e = s.element_weights.len();
                let mut covers = Vec::with_capacity(s.covers.len());
                for c in &s.covers {
                    if let Some(x) = c.iter().find(|&&x| x >= e.min(64)) {
                        return Err(CliError::Input(format!(
                            "element {x} out of range for {e} elements"
                        )));
                    }
                    covers.push(c.iter().fold(0u64, |acc, &x| acc | 1 << x));
                }
                ValuationKind::Coverage(CoverageValuation::new(
                    covers,
                    unrat(s.element_weights.clone()),
                )?)
            }
            Spec::Table(s) => {
                ValuationKind::Table(TableValuation::new(m, table_values(&s.table, m)?)?)
            }
            Spec::BundleMax(s) => {
                let bundles = s
                    .bundles
                    .iter()
                    .map(|b| set_of(b, m))
                    .collect::<Result<Vec<_>, _>>()?;
                let inner = s
                    .inner
                    .iter()
                    .zip(&bundles)
                    .map(|(t, b)| {
                        TableValuation::new(b.len(), table_values(t, b.len())?)
                            .map_err(CliError::from)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                ValuationKind::BundleMax(BundleMaxValuation::new(m, bundles, inner)?)
            }
            Spec::BlockCap(s) => ValuationKind::BlockCap(BlockCapValuation::new(
                s.blocks
                    .iter()
                    .map(|b| set_of(b, m))
                    .collect::<Result<Vec<_>, _>>()?,
            )?),
            Spec::Thirds(s) => ValuationKind::Thirds(Box::new(s.thirds.to_oracle(m)?)),
            Spec::Builtin(s) => {
                let inst = builtins::resolve(&s.builtin)?;
                let k = s.params.agent;
                if k == 0 || k > inst.agents() {
                    return Err(CliError::Input(format!(
                        "builtin {} has no agent {k}",
                        s.builtin
                    )));
                }
                let v = inst.valuation(k - 1).clone();
                if v.m() != m {
                    return Err(CliError::Input(format!(
                        "builtin {} has {} items, the file declares {m}",
                        s.builtin,
                        v.m()
                    )));
                }
                return Ok(v.with_class(class));
            }
        };
        Ok(ValuationOracle::new(m, kind, class)?)
    }
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> Self {
        InstanceFile {
            label: inst.label().to_string(),
            m: inst.m(),
            items: Some(inst.item_names().to_vec()),
            agents: inst
                .valuations()
                .iter()
                .map(AgentEntry::from_oracle)
                .collect(),
        }
    }

    pub fn to_instance(&self) -> Result<Instance, CliError> {
        let agents = self
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| {
                a.to_oracle(self.m)
                    .map_err(|e| CliError::Input(format!("agent {}: {e}", i + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let inst = Instance::new(self.m, agents, self.label.clone())?;
        match &self.items {
            Some(names) => Ok(inst.with_item_names(names.clone())?),
            None => Ok(inst),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("instance file: {e}")))
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}
