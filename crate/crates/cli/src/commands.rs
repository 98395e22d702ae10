use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use meixner::apc::{decompose, moment_equal, MomentFunctional, MomentFunctionalJson};
use meixner::classify::decouple;
use meixner::lie::check_ml;
use meixner::meixner1d::{build_triple, classify1d, lie_closure_1d, JacobiSpec, Preset};
use meixner::sampling::{random_mixed_spec, random_mixing_matrix};
use meixner::vectors2d::{
    build_mixed, mix_linear, FactorSpec, MixedPreservationSpec, SystemSpec, DEFAULT_TRUNCATION,
};
use meixner::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::{Cli, Command};

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_CLASSIFICATION: u8 = 3;
pub const EXIT_AUDIT: u8 = 4;

#[derive(Debug)]
pub struct Failure {
    pub status: u8,
    pub message: String,
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure {
            status: EXIT_VALIDATION,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::AuditFailed { .. } => EXIT_AUDIT,
            e if e.is_validation() => EXIT_VALIDATION,
            _ => EXIT_CLASSIFICATION,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<u8, Failure>;

pub fn run(cli: &Cli) -> Outcome {
    match cli.command {
        Command::Classify => classify(cli),
        Command::CheckMl => check(cli),
        Command::Decompose => decompose_cmd(cli),
        Command::Moments => moments(cli),
        Command::Catalog => catalog(cli),
        Command::VerifyEqual => verify_equal(cli),
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    let mut text = String::new();
    let res = if path.as_os_str() == "-" {
        io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
    Ok(text)
}

fn read_input<T: DeserializeOwned>(cli: &Cli) -> Result<T, Failure> {
    let path = cli
        .input
        .as_deref()
        .ok_or_else(|| Failure::validation("--input is required for this command"))?;
    let text = read_text(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let mut at = e.path().to_string();
        let mut msg = e.inner().to_string();
        // tagged enums buffer their content, which hides the inner path
        if let Ok(value) = serde_json::from_str::<Value>(&text) {
            if let Some((p, m)) = locate_system_error(&value, &at) {
                (at, msg) = (p, m);
            } else if let Some(obj) = value.as_object() {
                for side in ["left", "right"] {
                    if let Some((p, m)) = obj.get(side).and_then(|v| locate_system_error(v, side)) {
                        (at, msg) = (p, m);
                        break;
                    }
                }
            }
        }
        Failure::validation(format!("{}: at `{at}`: {msg}", path.display()))
    })
}

fn join(prefix: &str, field: &str) -> String {
    if field.is_empty() || field == "." {
        prefix.to_string()
    } else if prefix.is_empty() || prefix == "." {
        field.to_string()
    } else {
        format!("{prefix}.{field}")
    }
}

fn check_field<T: DeserializeOwned>(value: &Value, prefix: &str) -> Option<(String, String)> {
    serde_path_to_error::deserialize::<_, T>(value.clone())
        .err()
        .map(|e| (join(prefix, &e.path().to_string()), e.inner().to_string()))
}

/// Finds the innermost offending field of a system spec, if any.
fn locate_system_error(value: &Value, prefix: &str) -> Option<(String, String)> {
    let obj = value.as_object()?;
    let kind = obj.get("kind")?.as_str()?;
    let mut rest = obj.clone();
    rest.remove("kind");
    let rest = Value::Object(rest);
    match kind {
        "mixed" => check_field::<MixedPreservationSpec>(&rest, prefix),
        "product" => ["x", "y"].iter().find_map(|f| {
            let v = obj.get(*f);
            match v {
                None => Some((join(prefix, f), "missing field".into())),
                Some(v) => check_field::<FactorSpec>(v, &join(prefix, f)).map(|(p, _)| {
                    (p, "expected a preset name or a JacobiSpec object".into())
                }),
            }
        }),
        "linear_mix" => obj
            .get("matrix")
            .map_or(Some((join(prefix, "matrix"), "missing field".into())), |m| {
                check_field::<[[f64; 2]; 2]>(m, &join(prefix, "matrix"))
            })
            .or_else(|| {
                obj.get("base")
                    .map_or(Some((join(prefix, "base"), "missing field".into())), |b| {
                        locate_system_error(b, &join(prefix, "base"))
                    })
            }),
        other => Some((join(prefix, "kind"), format!("unknown system kind `{other}`"))),
    }
}

/// Pretty JSON with sorted keys and shortest round-trip floats.
fn emit(cli: &Cli, report: &impl Serialize) -> Result<(), Failure> {
    let value = serde_json::to_value(report).map_err(|e| Failure {
        status: EXIT_CLASSIFICATION,
        message: format!("cannot serialize report: {e}"),
    })?;
    let mut text = serde_json::to_string_pretty(&value).expect("values always serialize");
    text.push('\n');
    let written = match &cli.output {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| e.to_string()),
    };
    written.map_err(|message| Failure {
        status: EXIT_VALIDATION,
        message,
    })
}

fn truncation_for(cli: &Cli, spec: &SystemSpec) -> usize {
    spec.truncation()
        .or(cli.truncation)
        .unwrap_or(DEFAULT_TRUNCATION)
}

fn classify(cli: &Cli) -> Outcome {
    if cli.input.is_none() {
        let Some(seed) = cli.seed else {
            return Err(Failure::validation("classify needs --input or --seed"));
        };
        let n = cli.truncation.unwrap_or(DEFAULT_TRUNCATION);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_mixed_spec(&mut rng).with_truncation(n);
        let m = random_mixing_matrix(&mut rng, 50.0);
        let sys = mix_linear(&build_mixed(&spec)?, &m)?;
        let report = decouple(&sys, cli.degree, cli.tolerance)?;
        emit(
            cli,
            &json!({
                "seed": seed,
                "input": SystemSpec::LinearMix {
                    matrix: [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]],
                    base: Box::new(SystemSpec::Mixed(spec)),
                },
                "report": report,
            }),
        )?;
        return Ok(0);
    }
    let spec: SystemSpec = read_input(cli)?;
    let sys = spec.build(truncation_for(cli, &spec))?;
    let report = decouple(&sys, cli.degree, cli.tolerance)?;
    emit(cli, &report)?;
    Ok(0)
}

fn check(cli: &Cli) -> Outcome {
    let spec: SystemSpec = read_input(cli)?;
    let sys = spec.build(truncation_for(cli, &spec))?;
    emit(cli, &check_ml(&sys)?)?;
    Ok(0)
}

fn decompose_cmd(cli: &Cli) -> Outcome {
    let raw: MomentFunctionalJson = read_input(cli)?;
    let mf = MomentFunctional::from_json(&raw)?;
    let level = cli.truncation.unwrap_or(mf.degree_cap() / 2);
    let res = decompose(&mf, level)?;
    let closure = check_ml(&res.system).ok();
    emit(
        cli,
        &json!({
            "N": level,
            "grade_dims": res.grade_dims,
            "rank_tolerance_used": res.rank_tolerance_used,
            "top_block_complete": res.top_block_complete,
            "closure": closure,
        }),
    )?;
    Ok(0)
}

fn moments(cli: &Cli) -> Outcome {
    let spec: SystemSpec = read_input(cli)?;
    let sys = spec.build(truncation_for(cli, &spec))?;
    let mf = MomentFunctional::from_system(&sys, cli.degree)?;
    emit(cli, &mf.to_json())?;
    Ok(0)
}

#[derive(Serialize)]
struct CatalogEntry {
    name: &'static str,
    description: &'static str,
    mean: f64,
    spec: JacobiSpec,
    class: &'static str,
}

fn catalog(cli: &Cli) -> Outcome {
    if cli.input.is_some() {
        let spec: JacobiSpec = read_input(cli)?;
        let n = cli.truncation.unwrap_or(DEFAULT_TRUNCATION);
        let closure = lie_closure_1d(&build_triple(&spec, n)?)?;
        emit(
            cli,
            &json!({
                "spec": spec,
                "class": classify1d(&spec).tag(),
                "closure": closure,
            }),
        )?;
        return Ok(0);
    }
    let entries: Vec<CatalogEntry> = Preset::ALL
        .iter()
        .map(|p| CatalogEntry {
            name: p.name(),
            description: p.description(),
            mean: p.mean(),
            spec: p.spec(),
            class: classify1d(&p.spec()).tag(),
        })
        .collect();
    emit(cli, &entries)?;
    Ok(0)
}

#[derive(Deserialize)]
struct Pair {
    left: SystemSpec,
    right: SystemSpec,
}

fn verify_equal(cli: &Cli) -> Outcome {
    let pair: Pair = read_input(cli)?;
    let left = pair.left.build(truncation_for(cli, &pair.left))?;
    let right = pair.right.build(truncation_for(cli, &pair.right))?;
    let eq = moment_equal(&left, &right, cli.degree, cli.tolerance)?;
    emit(cli, &eq)?;
    Ok(if eq.equal { 0 } else { EXIT_AUDIT })
}
