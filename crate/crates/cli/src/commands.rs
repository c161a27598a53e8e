//! Subcommand bodies: resolve settings, call into the core, collect the
//! report, its pass flag and the witnesses to log on failure.

use std::path::Path;

use nalgebra::{Complex, DMatrix};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use qidlab::capacity::{self, AntidegradabilityGap, CapacityConfig, CapacityEstimate, QidOneShot};
use qidlab::channels::spec::{parse_channel, ChannelSpec};
use qidlab::duality::{self, flat_prior, DualityConfig};
use qidlab::lemmas::{lemma_battery, LemmaConfig};
use qidlab::metrics::OptimConfig;
use qidlab::qid::{self, Code, CodeRecord, DecoderAtom, DecoderRecord};
use qidlab::rng::{child_seed, stream};
use qidlab::typicality::{self, TypicalityOptions};
use qidlab::{report, Channel, ComplexOperator};

use crate::config::{resolve, Settings};
use crate::UsageError;

pub struct Outcome {
    pub settings: Settings,
    pub json: String,
    pub csv: Option<Vec<u8>>,
    pub pass: bool,
    pub witnesses: Vec<String>,
}

#[derive(Serialize)]
struct Envelope<'a, R> {
    command: &'a str,
    version: &'a str,
    config: Settings,
    report: R,
    pass: bool,
}

/// Capacity restarts are the only randomness of that command; without a
/// seed they use this one so bare invocations stay reproducible.
const CAPACITY_SEED: u64 = 17;
/// Trace-distance spacing of the net swept on two-dimensional codes.
const NET_ETA: f64 = 0.05;
/// Restart values further apart than this count as disagreement.
const SPREAD_TOL: f64 = 1e-5;
const CONCENTRATION_QUANTILE: f64 = 0.95;

fn none() -> Settings {
    Settings::default()
}

fn finish<R: Serialize>(command: &str, settings: Settings, report: R, pass: bool) -> Result<Outcome, UsageError> {
    let env = Envelope { command, version: env!("CARGO_PKG_VERSION"), config: settings.provenance(), report, pass };
    let mut json = report::to_string(&env)?;
    json.push('\n');
    Ok(Outcome { settings, json, csv: None, pass, witnesses: Vec::new() })
}

fn compact<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).unwrap_or_else(|e| format!("<unserializable: {e}>"))
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, UsageError> {
    let err = |e: csv::Error| UsageError(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    w.into_inner().map_err(|e| UsageError(e.to_string()))
}

fn channels(s: &Settings) -> Result<Vec<(String, Channel)>, UsageError> {
    let specs = s.channel.as_deref().unwrap_or_default();
    if specs.is_empty() {
        return Err(UsageError("--channel is required".into()));
    }
    let dim = s.dim.unwrap_or(2);
    let mut out = Vec::new();
    for spec in specs {
        if spec == "battery" {
            out.extend(duality::battery()?);
        } else {
            out.push((spec.clone(), parse_channel(spec, dim)?));
        }
    }
    Ok(out)
}

pub fn run(name: &str, flags: &Settings, init: impl Fn(&Settings) -> Result<(), UsageError>) -> Result<Outcome, UsageError> {
    let (allowed, defaults): (&[&str], Settings) = match name {
        "verify-lemmas" => (&["trials", "dim", "restarts", "slack", "seed"], {
            let d = LemmaConfig::default();
            Settings {
                trials: Some(d.trials),
                dim: Some(d.max_dim),
                restarts: Some(d.norm_restarts),
                slack: Some(d.slack),
                ..none()
            }
        }),
        "fidelity-alternative" => (&["channel", "dim", "samples", "restarts", "iters", "slack", "seed"], {
            let d = DualityConfig::default();
            Settings {
                channel: Some(vec!["battery".into()]),
                dim: Some(2),
                samples: Some(d.optim.samples),
                restarts: Some(d.optim.restarts),
                iters: Some(d.optim.iters),
                slack: Some(d.slack),
                ..none()
            }
        }),
        "info-disturbance" => (&["channel", "dim", "restarts", "iters", "slack", "seed"], {
            let d = DualityConfig::default();
            Settings {
                channel: Some(vec!["battery".into()]),
                dim: Some(2),
                restarts: Some(d.diamond_restarts),
                iters: Some(d.seesaw_iters),
                slack: Some(d.slack),
                ..none()
            }
        }),
        "build-qid-code" => (
            &["b_dim", "e_dim", "s_dim", "targets", "iters", "epsilon", "seed"],
            Settings { b_dim: Some(16), e_dim: Some(2), s_dim: Some(8), targets: Some(8), iters: Some(500), ..none() },
        ),
        "evaluate-qid-code" => (&["code", "samples", "epsilon", "seed"], Settings { samples: Some(2000), ..none() }),
        "capacity" => (&["channel", "dim", "restarts", "iters", "seed"], {
            let d = CapacityConfig::default();
            Settings { dim: Some(2), restarts: Some(d.restarts), iters: Some(d.iters), seed: Some(CAPACITY_SEED), ..none() }
        }),
        "typicality" => (
            &["channel", "dim", "input", "n", "delta", "epsilon"],
            Settings { dim: Some(2), n: Some(8), delta: Some(0.25), epsilon: Some(0.05), ..none() },
        ),
        "concentration" => (
            &["b_dim", "e_dim", "s_dim", "samples", "eps_grid", "sizes", "draws", "seed"],
            Settings {
                b_dim: Some(64),
                e_dim: Some(2),
                s_dim: Some(32),
                samples: Some(2000),
                eps_grid: Some(vec![0.1]),
                draws: Some(20),
                ..none()
            },
        ),
        other => return Err(UsageError(format!("unknown command {other}"))),
    };
    let allowed: Vec<String> = allowed.iter().map(|k| k.replace('_', "-")).collect();
    let allowed: Vec<&str> = allowed.iter().map(String::as_str).collect();
    let s = resolve(name, flags, defaults, &allowed)?;
    init(&s)?;
    match name {
        "verify-lemmas" => verify_lemmas(s),
        "fidelity-alternative" => fidelity_alternative(s),
        "info-disturbance" => info_disturbance(s),
        "build-qid-code" => build_code(s),
        "evaluate-qid-code" => evaluate_code(s),
        "capacity" => capacity(s),
        "typicality" => typicality(s),
        _ => concentration(s),
    }
}

fn verify_lemmas(s: Settings) -> Result<Outcome, UsageError> {
    let cfg = LemmaConfig {
        trials: s.trials.unwrap_or_default(),
        max_dim: s.dim.unwrap_or_default(),
        norm_restarts: s.restarts.unwrap_or_default(),
        slack: s.slack.unwrap_or_default(),
        seed: s.require_seed()?,
    };
    let r = lemma_battery(&cfg)?;
    let mut witnesses: Vec<String> = r.lemmas.iter().filter(|l| l.failures > 0).map(compact).collect();
    if !(r.norm_bound.bound_holds && r.norm_bound_tight) {
        witnesses.push(compact(&r.norm_bound));
    }
    let pass = r.all_pass;
    let mut out = finish("verify-lemmas", s, r, pass)?;
    out.witnesses = witnesses;
    Ok(out)
}

fn duality_config(s: &Settings, seed: u64) -> DualityConfig {
    let d = DualityConfig::default();
    DualityConfig {
        optim: OptimConfig {
            restarts: s.restarts.unwrap_or(d.optim.restarts),
            iters: s.iters.unwrap_or(d.optim.iters),
            samples: s.samples.unwrap_or(d.optim.samples),
            seed,
            ..d.optim
        },
        slack: s.slack.unwrap_or(d.slack),
        ..d
    }
}

fn fidelity_alternative(s: Settings) -> Result<Outcome, UsageError> {
    let cfg = duality_config(&s, s.require_seed()?);
    let chans = channels(&s)?;
    let reports = chans
        .par_iter()
        .map(|(spec, ch)| duality::fidelity_alternative_report(spec, ch, &cfg, false))
        .collect::<qidlab::Result<Vec<_>>>()?;
    let pass = reports.iter().all(|r| r.pass);
    let witnesses = reports.iter().filter(|r| !r.pass).map(compact).collect();
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.channel_spec.clone(),
                num(r.delta_hat),
                num(r.f_hat),
                num(r.bound_forward),
                num(r.bound_converse),
                r.pass.to_string(),
            ]
        })
        .collect();
    let csv = csv_bytes(&["channel_spec", "delta_hat", "f_hat", "bound_forward", "bound_converse", "pass"], &rows)?;
    let mut out = finish("fidelity-alternative", s, reports, pass)?;
    out.csv = Some(csv);
    out.witnesses = witnesses;
    Ok(out)
}

fn info_disturbance(s: Settings) -> Result<Outcome, UsageError> {
    let seed = s.require_seed()?;
    let d = DualityConfig::default();
    let cfg = DualityConfig {
        optim: OptimConfig { seed, ..d.optim },
        slack: s.slack.unwrap_or(d.slack),
        seesaw_iters: s.iters.unwrap_or(d.seesaw_iters),
        diamond_restarts: s.restarts.unwrap_or(d.diamond_restarts),
    };
    let chans = channels(&s)?;
    let reports = chans
        .par_iter()
        .map(|(spec, ch)| duality::info_disturbance_report(spec, ch, &flat_prior(ch), &cfg, false))
        .collect::<qidlab::Result<Vec<_>>>()?;
    let pass = reports.iter().all(|r| r.pass);
    let witnesses = reports.iter().filter(|r| !r.pass).map(compact).collect();
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| vec![r.channel_spec.clone(), num(r.disturbance), num(r.found), num(r.bound), r.pass.to_string()])
        .collect();
    let csv = csv_bytes(&["channel_spec", "disturbance", "found", "bound", "pass"], &rows)?;
    let mut out = finish("info-disturbance", s, reports, pass)?;
    out.csv = Some(csv);
    out.witnesses = witnesses;
    Ok(out)
}

#[derive(Serialize)]
struct BuiltCode {
    code: CodeRecord,
    decoders: Vec<DecoderRecord>,
    /// Largest upper-minus-lower game bracket over the decoders.
    max_game_gap: f64,
    /// Largest `tr ψ^B D` over orthogonal adversaries.
    max_false_acceptance: f64,
    min_acceptance: f64,
    /// Largest certified payoff `1 − tr φ^B D + max_ψ tr ψ^B D`.
    max_game_upper: f64,
    /// `max_game_upper ≤ epsilon`, present when a ceiling was given.
    within_epsilon: Option<bool>,
}

fn build_code(s: Settings) -> Result<Outcome, UsageError> {
    let seed = s.require_seed()?;
    let (b, e, dim_s) = (s.b_dim.unwrap_or_default(), s.e_dim.unwrap_or_default(), s.s_dim.unwrap_or_default());
    if dim_s == 0 || dim_s > b * e {
        return Err(UsageError(format!("need 1 <= s-dim <= b-dim * e-dim, got {dim_s} > {b} * {e}")));
    }
    let code = qid::random_code(b, e, dim_s, &mut stream(seed, 0))?;
    let targets = qid::haar_targets(&code, s.targets.unwrap_or_default(), child_seed(&mut stream(seed, 1)));
    let decoders = qid::build_decoders(&code, &targets, s.iters.unwrap_or_default())?;
    let fold = |f: fn(&DecoderAtom) -> f64, init: f64, pick: fn(f64, f64) -> f64| decoders.iter().map(f).fold(init, pick);
    let max_game_upper = fold(|a| a.game_upper, f64::NEG_INFINITY, f64::max);
    let within_epsilon = s.epsilon.map(|eps| max_game_upper <= eps);
    let pass = within_epsilon != Some(false);
    let witnesses = match decoders.iter().max_by(|a, b| a.game_upper.total_cmp(&b.game_upper)) {
        Some(worst) if !pass => vec![compact(&worst.to_record().adversary)],
        _ => Vec::new(),
    };
    let built = BuiltCode {
        code: code.to_record(),
        max_game_upper,
        within_epsilon,
        max_game_gap: fold(|a| a.gap(), 0.0, f64::max),
        max_false_acceptance: fold(|a| a.false_acceptance, 0.0, f64::max),
        min_acceptance: fold(|a| a.acceptance, 1.0, f64::min),
        decoders: decoders.iter().map(DecoderAtom::to_record).collect(),
    };
    let mut out = finish("build-qid-code", s, built, pass)?;
    out.witnesses = witnesses;
    Ok(out)
}

fn read_code(path: &Path) -> Result<(Code, Vec<DecoderAtom>), UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    let bad = |e: String| UsageError(format!("{}: {e}", path.display()));
    let mut v: Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    if let Some(inner) = v.get_mut("report") {
        v = inner.take();
    }
    let code: CodeRecord = serde_json::from_value(v.get("code").cloned().unwrap_or(Value::Null)).map_err(|e| bad(e.to_string()))?;
    let decoders: Vec<DecoderRecord> =
        serde_json::from_value(v.get("decoders").cloned().unwrap_or(Value::Null)).map_err(|e| bad(e.to_string()))?;
    let code = Code::from_record(&code)?;
    let decoders = decoders.iter().map(DecoderAtom::from_record).collect::<qidlab::Result<Vec<_>>>()?;
    Ok((code, decoders))
}

#[derive(Serialize)]
struct Evaluation {
    #[serde(flatten)]
    evaluation: qid::CodeEvaluation,
    /// `ε̂ ≤ epsilon`, present when a ceiling was given.
    within_epsilon: Option<bool>,
}

fn evaluate_code(s: Settings) -> Result<Outcome, UsageError> {
    let seed = s.require_seed()?;
    let path = s.code.clone().ok_or_else(|| UsageError("--code is required".into()))?;
    let (code, decoders) = read_code(&path)?;
    let evaluation = qid::evaluate_code(&code, &decoders, s.samples.unwrap_or_default(), NET_ETA, seed)?;
    let within_epsilon = s.epsilon.map(|eps| evaluation.epsilon_hat <= eps);
    let pass = evaluation.env_holds && evaluation.sandwich.holds && within_epsilon != Some(false);
    let witnesses = if pass { Vec::new() } else { vec![compact(&evaluation.witness), compact(&evaluation.sandwich)] };
    let mut out = finish("evaluate-qid-code", s, Evaluation { evaluation, within_epsilon }, pass)?;
    out.witnesses = witnesses;
    Ok(out)
}

#[derive(Serialize)]
struct CapacityRow {
    channel_spec: String,
    param: Option<f64>,
    c_e: CapacityEstimate,
    q_id1: QidOneShot,
    coh_info: f64,
    ad_gap: AntidegradabilityGap,
    /// Restart values agree within the spread tolerance.
    restarts_agree: bool,
    /// `Q_ID^(1) ≤ C_E`.
    ordered: bool,
    /// A vanishing antidegradability gap forces `Q_ID^(1) = 0`.
    zero_when_antidegradable: bool,
    pass: bool,
}

/// The noise parameter of the one-parameter families.
fn family_param(spec: &str) -> Option<f64> {
    let cs = ChannelSpec::parse(spec).ok()?;
    match cs.name.as_str() {
        "depolarizing" | "dephasing" | "erasure" | "amplitude-damping" => {
            let raw = cs.named.get("p").or(cs.named.get("gamma")).or(cs.positional.first())?;
            raw.parse().ok()
        }
        _ => None,
    }
}

fn capacity(s: Settings) -> Result<Outcome, UsageError> {
    let d = CapacityConfig::default();
    let cfg = CapacityConfig {
        restarts: s.restarts.unwrap_or(d.restarts),
        iters: s.iters.unwrap_or(d.iters),
        seed: s.seed.unwrap_or(CAPACITY_SEED),
        ..d
    };
    let chans = channels(&s)?;
    let rows = chans
        .par_iter()
        .map(|(spec, ch)| {
            let c_e = capacity::entanglement_assisted_capacity(ch, &cfg)?;
            let q_id1 = capacity::q_id_one_shot(ch, &c_e, &cfg)?;
            let ad_gap = capacity::antidegradability_gap(ch, cfg.antidegradability_iters)?;
            let restarts_agree = c_e.spread <= SPREAD_TOL;
            let ordered = q_id1.value <= c_e.value + 1e-9;
            let zero_when_antidegradable = ad_gap.gap >= 1e-4 || q_id1.value == 0.0;
            Ok(CapacityRow {
                channel_spec: spec.clone(),
                param: family_param(spec),
                coh_info: q_id1.best_coherent_info,
                pass: restarts_agree && ordered && zero_when_antidegradable,
                c_e,
                q_id1,
                ad_gap,
                restarts_agree,
                ordered,
                zero_when_antidegradable,
            })
        })
        .collect::<qidlab::Result<Vec<_>>>()?;
    let pass = rows.iter().all(|r| r.pass);
    let witnesses = rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("{}: restart values {}", r.channel_spec, compact(&r.c_e.restart_values)))
        .collect();
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.channel_spec.clone(),
                r.param.map(num).unwrap_or_default(),
                num(r.c_e.value),
                num(r.q_id1.value),
                num(r.coh_info),
                num(r.ad_gap.gap),
            ]
        })
        .collect();
    let csv = csv_bytes(&["channel_spec", "param", "C_E", "Q_ID1", "coh_info", "ad_gap"], &table)?;
    let mut out = finish("capacity", s, rows, pass)?;
    out.csv = Some(csv);
    out.witnesses = witnesses;
    Ok(out)
}

fn typicality(s: Settings) -> Result<Outcome, UsageError> {
    let mut chans = channels(&s)?;
    if chans.len() != 1 {
        return Err(UsageError("typicality takes exactly one --channel".into()));
    }
    let (_, ch) = chans.remove(0);
    let input = match &s.input {
        Some(p) => {
            if p.len() != ch.in_dim() {
                return Err(UsageError(format!("--input has {} entries, channel input dimension is {}", p.len(), ch.in_dim())));
            }
            let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(p.len(), p.iter().map(|&x| Complex::new(x, 0.0))));
            ComplexOperator::from_matrix(diag)?
        }
        None => flat_prior(&ch),
    };
    let state = typicality::tripartite_state(&ch, &input)?;
    let r = typicality::typicality_report(
        &state,
        s.n.unwrap_or_default(),
        s.delta.unwrap_or_default(),
        s.epsilon.unwrap_or_default(),
        &TypicalityOptions::default(),
    )?;
    let pass = r.ok();
    let witnesses = r.properties.iter().filter(|p| !p.pass).map(compact).collect();
    let mut out = finish("typicality", s, r, pass)?;
    out.witnesses = witnesses;
    Ok(out)
}

#[derive(Serialize)]
struct Concentration {
    check: qid::ConcentrationReport,
    /// Every grid point has at least this fraction of samples within `η(ε)`.
    quantile: f64,
    quantile_holds: bool,
    monotonicity: Option<qid::MonotonicityReport>,
}

fn concentration(s: Settings) -> Result<Outcome, UsageError> {
    let seed = s.require_seed()?;
    let (b, e, dim_s) = (s.b_dim.unwrap_or_default(), s.e_dim.unwrap_or_default(), s.s_dim.unwrap_or_default());
    if dim_s == 0 || dim_s > b * e {
        return Err(UsageError(format!("need 1 <= s-dim <= b-dim * e-dim, got {dim_s} > {b} * {e}")));
    }
    let samples = s.samples.unwrap_or_default();
    let code = qid::random_code(b, e, dim_s, &mut stream(seed, 0))?;
    let grid = s.eps_grid.clone().unwrap_or_default();
    let check = qid::concentration_check(&code, None, samples, &grid, child_seed(&mut stream(seed, 1)))?;
    let quantile_holds = check.predictions.iter().all(|p| p.fraction_within >= CONCENTRATION_QUANTILE);
    let monotonicity = match &s.sizes {
        Some(sizes) => Some(qid::concentration_monotonicity(b, e, sizes, s.draws.unwrap_or_default(), samples, child_seed(&mut stream(seed, 2)))?),
        None => None,
    };
    let mono_holds = monotonicity.as_ref().is_none_or(|m| m.decreasing);
    let pass = quantile_holds && mono_holds;
    let mut witnesses: Vec<String> = check.predictions.iter().filter(|p| p.fraction_within < CONCENTRATION_QUANTILE).map(compact).collect();
    if !mono_holds {
        witnesses.extend(monotonicity.as_ref().map(|m| format!("medians {}", compact(&m.medians))));
    }
    let report = Concentration { check, quantile: CONCENTRATION_QUANTILE, quantile_holds, monotonicity };
    let mut out = finish("concentration", s, report, pass)?;
    out.witnesses = witnesses;
    Ok(out)
}
