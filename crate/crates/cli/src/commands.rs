use std::fs;
use std::path::Path;

use mmslab_core::counterexamples::run_suite;
use mmslab_core::mms::{
    mms_value, verify_alpha_mms_d, verify_alpha_mms_p, MmsBudget, Verification,
};
use mmslab_core::oracle::{best_alpha, exists_alpha_mms, Existence, SearchBudget};
use mmslab_core::protocols::{
    cut_and_choose_two, four_agents_3344, solve, three_agents_322, three_agents_422,
    three_agents_431, three_agents_521, two_types, AgentType, Dispatch, HalfMode, Impossibility,
    ProtocolCertificate, ProtocolError,
};
use mmslab_core::valuations::{
    is_monotone, is_subadditive, is_submodular, random_valuation, CheckMode, GeneratedClass,
    GeneratorParams,
};
use mmslab_core::{
    Allocation, DemandVector, Instance, ItemSet, Partition, Rational, ThresholdVector,
    ValuationClass,
};
use serde::Serialize;
use serde_json::json;

use crate::certificate::{parse_partitions, render_partition, CertificateFile};
use crate::format::{parse_rational, InstanceFile, Rat};
use crate::{builtins, Cli, CliError, Command, Outcome, EXIT_IMPOSSIBLE, EXIT_OK, EXIT_VERIFY};

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Mms {
            instance,
            agent,
            d,
            max_partitions,
        } => cmd_mms(
            &load_instance(instance)?,
            *agent,
            *d,
            &mms_budget(*max_partitions),
        ),
        Command::Solve {
            instance,
            alpha,
            d,
            partitions,
            protocol,
            types,
            output,
            max_partitions,
        } => {
            let inst = load_instance(instance)?;
            let request = SolveRequest {
                mode: HalfMode::parse(alpha)
                    .ok_or_else(|| CliError::Input(format!("unknown alpha mode {alpha:?}")))?,
                d: d.clone(),
                partitions: partitions.as_deref().map(read_partitions).transpose()?,
                protocol: protocol.clone(),
                types: types.clone(),
                budget: mms_budget(*max_partitions),
            };
            cmd_solve(&inst, &request, output.as_deref())
        }
        Command::Verify {
            instance,
            certificate,
            d,
            max_partitions,
        } => {
            let inst = load_instance(instance)?;
            let text = fs::read_to_string(certificate)?;
            cmd_verify(&inst, &text, d.clone(), &mms_budget(*max_partitions))
        }
        Command::CheckClass { instance } => cmd_check_class(&load_instance(instance)?),
        Command::Counterexamples { all, keys } => cmd_counterexamples(*all, keys),
        Command::Oracle {
            instance,
            d,
            alpha,
            best_alpha,
            max_assignments,
        } => {
            let inst = load_instance(instance)?;
            let mut budget = SearchBudget::default();
            if let Some(cap) = max_assignments {
                budget.max_assignments = u128::from(*cap);
            }
            let alpha = match (alpha, best_alpha) {
                (Some(a), false) => Some(parse_alpha(a, inst.agents())?),
                (None, true) => None,
                _ => {
                    return Err(CliError::Input(
                        "give either --alpha or --best-alpha".into(),
                    ))
                }
            };
            cmd_oracle(&inst, d, alpha.as_ref(), &budget)
        }
        Command::Export { name, output } => cmd_export(name, output.as_deref()),
        Command::Random {
            class,
            agents,
            items,
            seed,
            output,
        } => cmd_random(class, *agents, *items, *seed, output.as_deref()),
    }
}

fn mms_budget(cap: Option<u64>) -> MmsBudget {
    cap.map_or_else(MmsBudget::default, |c| MmsBudget::new(u128::from(c)))
}

/// Reads a JSON instance file, or builds a builtin instance when `spec`
/// names one and no such file exists.
pub fn load_instance(spec: &str) -> Result<Instance, CliError> {
    let path = Path::new(spec);
    if path.is_file() {
        return InstanceFile::parse(&fs::read_to_string(path)?)?.to_instance();
    }
    if builtins::is_builtin(spec) {
        return builtins::resolve(spec);
    }
    Err(CliError::Input(format!(
        "no instance file or builtin named {spec:?}"
    )))
}

fn read_partitions(path: &Path) -> Result<Vec<Vec<Vec<usize>>>, CliError> {
    serde_json::from_str(&fs::read_to_string(path)?)
        .map_err(|e| CliError::Input(format!("partitions file: {e}")))
}

fn pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn write_or_print(content: String, output: Option<&Path>, what: &str) -> Result<Outcome, CliError> {
    match output {
        Some(path) => {
            fs::write(path, &content)?;
            Ok(Outcome {
                code: EXIT_OK,
                text: format!("wrote {what} to {}\n", path.display()),
                json: pretty(&json!({ "written": path.display().to_string() })),
            })
        }
        None => Ok(Outcome {
            code: EXIT_OK,
            text: content.clone(),
            json: content,
        }),
    }
}

/// Left-aligned columns separated by two spaces.
fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c + 1 == row.len() {
                line.push_str(cell);
            } else {
                line.push_str(&format!("{cell:<w$}  ", w = widths[c]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn agent_index(inst: &Instance, agent: usize) -> Result<usize, CliError> {
    if agent == 0 || agent > inst.agents() {
        return Err(CliError::Input(format!(
            "agent {agent} out of range 1..={}",
            inst.agents()
        )));
    }
    Ok(agent - 1)
}

fn show_partition(inst: &Instance, p: &Partition) -> String {
    let parts: Vec<String> = p.parts().iter().map(|&s| inst.display_set(s)).collect();
    format!("[{}]", parts.join(","))
}

fn show_allocation(inst: &Instance, a: &Allocation) -> String {
    let rows: Vec<Vec<String>> = a
        .bundles()
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            vec![
                format!("agent {}", i + 1),
                inst.display_set(b),
                format!("value {}", inst.value(i, b)),
            ]
        })
        .collect();
    table(&rows)
}

fn bundles_json(a: &Allocation) -> Vec<Vec<usize>> {
    a.bundles().iter().map(|b| b.iter().collect()).collect()
}

pub fn cmd_mms(
    inst: &Instance,
    agent: usize,
    d: usize,
    budget: &MmsBudget,
) -> Result<Outcome, CliError> {
    let i = agent_index(inst, agent)?;
    let r = mms_value(inst.valuation(i), inst.ground(), d, budget)?;
    Ok(Outcome {
        code: EXIT_OK,
        text: format!("{} : {}\n", r.value, show_partition(inst, &r.witness)),
        json: pretty(&json!({
            "agent": agent,
            "d": d,
            "value": Rat(r.value),
            "partition": render_partition(&r.witness),
        })),
    })
}

/// Inputs to `solve` beyond the instance.
#[derive(Debug, Clone)]
pub struct SolveRequest {
    pub mode: HalfMode,
    pub d: Option<Vec<usize>>,
    pub partitions: Option<Vec<Vec<Vec<usize>>>>,
    pub protocol: Option<String>,
    pub types: Option<Vec<String>>,
    pub budget: MmsBudget,
}

type Protocol = fn(&Instance, &[Partition]) -> Result<ProtocolCertificate, ProtocolError>;

fn two_agent(
    inst: &Instance,
    partitions: &[Partition],
) -> Result<ProtocolCertificate, ProtocolError> {
    cut_and_choose_two(inst, &partitions[1])
}

/// Fixed-size protocols with their partition sizes in agent order.
const PROTOCOLS: [(&str, &[usize], Protocol); 6] = [
    ("cut_and_choose_two", &[1, 2], two_agent),
    ("three_agents_322", &[3, 2, 2], three_agents_322),
    ("three_agents_521", &[5, 2, 1], three_agents_521),
    ("three_agents_431", &[4, 3, 1], three_agents_431),
    ("three_agents_422", &[4, 2, 2], three_agents_422),
    ("four_agents_3344", &[3, 3, 4, 4], four_agents_3344),
];

fn witnesses(
    inst: &Instance,
    sizes: &[usize],
    budget: &MmsBudget,
) -> Result<Vec<Partition>, CliError> {
    sizes
        .iter()
        .enumerate()
        .map(|(i, &s)| Ok(mms_value(inst.valuation(i), inst.ground(), s, budget)?.witness))
        .collect()
}

fn run_two_types(inst: &Instance, req: &SolveRequest) -> Result<ProtocolCertificate, CliError> {
    let n = inst.agents();
    let labels = req
        .types
        .as_ref()
        .ok_or_else(|| CliError::Input("two_types needs --types, e.g. S,T,S".into()))?;
    let types = labels
        .iter()
        .map(|t| match t.trim() {
            "S" | "s" => Ok(AgentType::S),
            "T" | "t" => Ok(AgentType::T),
            other => Err(CliError::Input(format!("unknown type {other:?}"))),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if types.len() != n {
        return Err(CliError::Input(format!(
            "{} types for {n} agents",
            types.len()
        )));
    }
    let given = req
        .partitions
        .as_ref()
        .map(|raw| parse_partitions(raw, inst.m()))
        .transpose()?;
    let partition_of = |t: AgentType| -> Result<Partition, CliError> {
        let i = types.iter().position(|&x| x == t);
        match (i, &given) {
            (Some(i), Some(ps)) => ps
                .get(i)
                .cloned()
                .ok_or_else(|| CliError::Input(format!("no partition for agent {}", i + 1))),
            (Some(i), None) => {
                Ok(mms_value(inst.valuation(i), inst.ground(), n, &req.budget)?.witness)
            }
            // A type nobody holds is never consulted; any n-part partition will do.
            (None, _) => Ok(Partition::of_items(
                inst.m(),
                (0..n)
                    .map(|j| {
                        if j == 0 {
                            inst.ground()
                        } else {
                            ItemSet::EMPTY
                        }
                    })
                    .collect(),
            )?),
        }
    };
    let (ps, pt) = (partition_of(AgentType::S)?, partition_of(AgentType::T)?);
    Ok(two_types(inst, &types, &ps, &pt)?)
}

fn run_named(
    inst: &Instance,
    name: &str,
    req: &SolveRequest,
) -> Result<ProtocolCertificate, CliError> {
    if name == "two_types" {
        return run_two_types(inst, req);
    }
    let (_, sizes, protocol) = PROTOCOLS
        .iter()
        .find(|(n, _, _)| *n == name)
        .ok_or_else(|| CliError::Input(format!("unknown protocol {name:?}")))?;
    if inst.agents() != sizes.len() {
        return Err(CliError::Input(format!(
            "{name} needs {} agents, the instance has {}",
            sizes.len(),
            inst.agents()
        )));
    }
    if let Some(d) = &req.d {
        if d.len() != sizes.len() || d.iter().zip(sizes.iter()).any(|(di, s)| di < s) {
            return Err(CliError::Input(format!(
                "{name} uses partition sizes {sizes:?}, not dominated by the demand {d:?}"
            )));
        }
    }
    let partitions = match &req.partitions {
        Some(raw) => parse_partitions(raw, inst.m())?,
        None => witnesses(inst, sizes, &req.budget)?,
    };
    Ok(protocol(inst, &partitions)?)
}

fn infer_protocol(raw: &[Vec<Vec<usize>>]) -> Result<&'static str, CliError> {
    let sizes: Vec<usize> = raw.iter().map(Vec::len).collect();
    PROTOCOLS
        .iter()
        .find(|(_, s, _)| *s == sizes.as_slice())
        .map(|(n, _, _)| *n)
        .ok_or_else(|| {
            CliError::Input(format!(
                "no protocol takes partition sizes {sizes:?}; pass --protocol"
            ))
        })
}

fn impossible(imp: &Impossibility) -> Outcome {
    let family = imp.family.name();
    let sorted: Vec<String> = imp.sorted_demand.iter().map(usize::to_string).collect();
    let mut text = format!(
        "impossible: {family}\nsorted demand: {}\n",
        sorted.join(",")
    );
    if let Some(b) = &imp.blocking {
        let agents: Vec<String> = b.iter().map(|a| (a + 1).to_string()).collect();
        text.push_str(&format!("blocking agents: {}\n", agents.join(",")));
    }
    Outcome {
        code: EXIT_IMPOSSIBLE,
        text,
        json: pretty(&json!({
            "impossible": family,
            "sorted_demand": imp.sorted_demand,
            "blocking": imp.blocking.as_ref().map(|b| b.iter().map(|a| a + 1).collect::<Vec<_>>()),
        })),
    }
}

pub fn cmd_solve(
    inst: &Instance,
    req: &SolveRequest,
    output: Option<&Path>,
) -> Result<Outcome, CliError> {
    let name = match (&req.protocol, &req.partitions) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(raw)) => Some(infer_protocol(raw)?.to_string()),
        (None, None) => None,
    };
    let cert = match name {
        Some(name) => run_named(inst, &name, req)?,
        None => {
            let d = req.d.clone().ok_or_else(|| {
                CliError::Input("solve needs --d, --protocol or --partitions".into())
            })?;
            match solve(inst, req.mode, &DemandVector::new(d)?, &req.budget)? {
                Dispatch::Solved { certificate, .. } => certificate,
                Dispatch::Impossible(imp) => return Ok(impossible(&imp)),
            }
        }
    };
    let check = cert.recheck(inst)?;
    if let Some(i) = check.first_violation() {
        return Err(CliError::Verification(format!(
            "{} left agent {} with margin {}",
            cert.protocol,
            i + 1,
            check.margins[i]
        )));
    }
    let file = CertificateFile::new(inst, &cert, req.d.clone());
    write_or_print(file.render(), output, "certificate")
}

fn margins_table(inst: &Instance, v: &Verification) -> String {
    let mut rows = vec![vec![
        "agent".to_string(),
        "value".to_string(),
        "threshold".to_string(),
        "margin".to_string(),
    ]];
    for i in 0..inst.agents() {
        rows.push(vec![
            (i + 1).to_string(),
            v.values[i].to_string(),
            v.thresholds[i].to_string(),
            v.margins[i].to_string(),
        ]);
    }
    table(&rows)
}

fn verification_json(v: &Verification) -> serde_json::Value {
    json!({
        "holds": v.holds,
        "values": v.values.iter().copied().map(Rat).collect::<Vec<_>>(),
        "thresholds": v.thresholds.iter().copied().map(Rat).collect::<Vec<_>>(),
        "margins": v.margins.iter().copied().map(Rat).collect::<Vec<_>>(),
    })
}

pub fn cmd_verify(
    inst: &Instance,
    text: &str,
    d: Option<Vec<usize>>,
    budget: &MmsBudget,
) -> Result<Outcome, CliError> {
    let cert = CertificateFile::parse(text)?;
    let canonical = cert.render() == text;
    let alloc = cert.allocation(inst.m())?;
    let alpha = cert.alpha()?;
    let partitions = cert.partitions(inst.m())?;
    let at_p = verify_alpha_mms_p(&alloc, inst, &alpha, &partitions)?;
    let d = d.or_else(|| cert.demand.clone());
    let at_d = match &d {
        Some(d) => Some(verify_alpha_mms_d(
            &alloc,
            inst,
            &alpha,
            &DemandVector::new(d.clone())?,
            budget,
        )?),
        None => None,
    };
    let mut out = format!(
        "protocol: {}\nagainst the recorded partitions:\n",
        cert.protocol
    );
    out.push_str(&margins_table(inst, &at_p));
    if let (Some(v), Some(d)) = (&at_d, &d) {
        let ds: Vec<String> = d.iter().map(usize::to_string).collect();
        out.push_str(&format!("against MMS values for d = {}:\n", ds.join(",")));
        out.push_str(&margins_table(inst, v));
    }
    let failure = [Some(&at_p), at_d.as_ref()]
        .into_iter()
        .flatten()
        .find_map(|v| v.first_violation().map(|i| (i, v.margins[i])));
    match failure {
        Some((i, margin)) => out.push_str(&format!("FAIL: agent {} has margin {margin}\n", i + 1)),
        None => out.push_str("OK\n"),
    }
    out.push_str(&format!("canonical: {canonical}\n"));
    Ok(Outcome {
        code: if failure.is_some() {
            EXIT_VERIFY
        } else {
            EXIT_OK
        },
        text: out,
        json: pretty(&json!({
            "protocol": cert.protocol,
            "holds": failure.is_none(),
            "first_violation": failure.map(|(i, m)| json!({ "agent": i + 1, "margin": Rat(m) })),
            "partitions": verification_json(&at_p),
            "demand": at_d.as_ref().map(verification_json),
            "canonical": canonical,
        })),
    })
}

fn mode_name(mode: CheckMode) -> String {
    match mode {
        CheckMode::Exhaustive => "exhaustive".into(),
        CheckMode::Structured => "structured".into(),
        CheckMode::Sampled { samples } => format!("sampled {samples}"),
    }
}

pub fn cmd_check_class(inst: &Instance) -> Result<Outcome, CliError> {
    let mut text = String::new();
    let mut agents = Vec::new();
    let mut consistent = true;
    for (i, v) in inst.valuations().iter().enumerate() {
        let declared = v.class();
        let mono = is_monotone(v);
        let sub = is_subadditive(v);
        let smod = is_submodular(v);
        let ok = mono.holds()
            && (!declared.is_subadditive() || sub.holds())
            && (declared > ValuationClass::Submodular || smod.holds());
        consistent &= ok;
        text.push_str(&format!("agent {} (declared {})\n", i + 1, declared.name()));
        let checks = [
            ("monotone", mono.holds(), mono.mode, mono.checked),
            ("subadditive", sub.holds(), sub.mode, sub.checked),
            ("submodular", smod.holds(), smod.mode, smod.checked),
        ];
        for (name, holds, mode, checked) in checks {
            text.push_str(&format!(
                "  {name}: {holds} [{}, {checked} checked]\n",
                mode_name(mode)
            ));
        }
        agents.push(json!({
            "agent": i + 1,
            "declared": declared.name(),
            "consistent": ok,
            "monotone": mono.holds(),
            "subadditive": sub.holds(),
            "submodular": smod.holds(),
        }));
    }
    text.push_str(&format!("declared classes consistent: {consistent}\n"));
    Ok(Outcome {
        code: if consistent { EXIT_OK } else { EXIT_VERIFY },
        text,
        json: pretty(&json!({ "consistent": consistent, "agents": agents })),
    })
}

pub fn cmd_counterexamples(all: bool, keys: &[String]) -> Result<Outcome, CliError> {
    if !all && keys.is_empty() {
        return Err(CliError::Input("pass --all or one or more row keys".into()));
    }
    let rows: Vec<_> = run_suite()?
        .into_iter()
        .filter(|r| all || keys.iter().any(|k| k == r.key))
        .collect();
    if let Some(k) = keys
        .iter()
        .find(|k| !rows.iter().any(|r| r.key == k.as_str()))
    {
        return Err(CliError::Input(format!("no counterexample row {k:?}")));
    }
    let passed = rows.iter().all(|r| r.passed);
    let mut lines = vec![vec![
        "result".to_string(),
        "key".to_string(),
        "claim".to_string(),
    ]];
    lines.extend(rows.iter().map(|r| {
        vec![
            if r.passed { "PASS" } else { "FAIL" }.to_string(),
            r.key.to_string(),
            r.claim.to_string(),
        ]
    }));
    let mut text = table(&lines);
    text.push_str(&format!(
        "{} of {} rows pass\n",
        rows.iter().filter(|r| r.passed).count(),
        rows.len()
    ));
    let json_rows: Vec<_> = rows
        .iter()
        .map(|r| json!({ "key": r.key, "claim": r.claim, "passed": r.passed, "detail": r.detail }))
        .collect();
    Ok(Outcome {
        code: if passed { EXIT_OK } else { EXIT_VERIFY },
        text,
        json: pretty(&json!({ "passed": passed, "rows": json_rows })),
    })
}

/// One fraction for every agent, or a comma-separated list.
pub fn parse_alpha(s: &str, n: usize) -> Result<ThresholdVector, CliError> {
    let values = s
        .split(',')
        .map(parse_rational)
        .collect::<Result<Vec<Rational>, _>>()?;
    let values = match values.len() {
        1 => vec![values[0]; n],
        k if k == n => values,
        k => return Err(CliError::Input(format!("{k} alpha values for {n} agents"))),
    };
    Ok(ThresholdVector::new(values)?)
}

pub fn cmd_oracle(
    inst: &Instance,
    d: &[usize],
    alpha: Option<&ThresholdVector>,
    budget: &SearchBudget,
) -> Result<Outcome, CliError> {
    let d = DemandVector::new(d.to_vec())?;
    match alpha {
        None => {
            let best = best_alpha(inst, &d, budget)?;
            let mus: Vec<String> = best.mms.iter().map(Rational::to_string).collect();
            let text = format!(
                "best alpha: {}\nmms: {}\n{}searched {} assignments ({} nodes, {} pruned)\n",
                best.alpha,
                mus.join(", "),
                show_allocation(inst, &best.allocation),
                best.record.space,
                best.record.visited,
                best.record.pruned
            );
            Ok(Outcome {
                code: EXIT_OK,
                text,
                json: pretty(&json!({
                    "best_alpha": best.alpha.to_string(),
                    "mms": best.mms.iter().copied().map(Rat).collect::<Vec<_>>(),
                    "allocation": bundles_json(&best.allocation),
                    "space": best.record.space.to_string(),
                    "visited": best.record.visited,
                    "pruned": best.record.pruned,
                })),
            })
        }
        Some(alpha) => match exists_alpha_mms(inst, alpha, &d, budget)? {
            Existence::Exists(a) => Ok(Outcome {
                code: EXIT_OK,
                text: format!("exists: true\n{}", show_allocation(inst, &a)),
                json: pretty(&json!({ "exists": true, "allocation": bundles_json(&a) })),
            }),
            Existence::NotExists(r) => Ok(Outcome {
                code: EXIT_OK,
                text: format!(
                    "exists: false\nsearched {} assignments ({} nodes, {} pruned)\n",
                    r.space, r.visited, r.pruned
                ),
                json: pretty(&json!({
                    "exists": false,
                    "space": r.space.to_string(),
                    "visited": r.visited,
                    "pruned": r.pruned,
                })),
            }),
        },
    }
}

pub fn cmd_export(name: &str, output: Option<&Path>) -> Result<Outcome, CliError> {
    let inst = builtins::resolve(name)?;
    write_or_print(
        InstanceFile::from_instance(&inst).render(),
        output,
        "instance",
    )
}

pub fn random_instance(
    class: &str,
    agents: usize,
    items: usize,
    seed: u64,
) -> Result<Instance, CliError> {
    let c = GeneratedClass::parse(class).ok_or_else(|| {
        CliError::Input(format!(
            "unknown class {class:?}; use additive, xos, budget-additive or coverage"
        ))
    })?;
    let params = GeneratorParams::default();
    let valuations = (0..agents as u64)
        .map(|i| {
            random_valuation(
                c,
                items,
                seed.wrapping_mul(1_000_003).wrapping_add(i),
                &params,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Instance::new(
        items,
        valuations,
        format!("random:{class}:{seed}"),
    )?)
}

pub fn cmd_random(
    class: &str,
    agents: usize,
    items: usize,
    seed: u64,
    output: Option<&Path>,
) -> Result<Outcome, CliError> {
    let inst = random_instance(class, agents, items, seed)?;
    write_or_print(
        InstanceFile::from_instance(&inst).render(),
        output,
        "instance",
    )
}
