//! Handlers behind the subcommands.

use std::fs::File;
use std::io::Write;

use serde::Serialize;
use serde_json::json;

use crate::bounds::{
    beta_eps, beta_eps_upper, direct_product_thresholds, lower_bound, protocol5_budget, second_order_predict,
};
use crate::error::{Error, Result};
use crate::eval::{comm_stats, measure_sim_error, EvalMode};
use crate::probcore::{Density, DensityModel, FiniteDistribution, JointSource, SpectrumTable, TailSide};
use crate::protocol::{appendix_a_example, generators, mixed_protocol, TranscriptLaw};
use crate::simulate::{default_round_configs, run_trials, Protocol5, TrialSummary};

use super::build::build;
use super::config::{
    ExperimentConfig, FunctionSpec, Model, ProtocolSpec, SimKind, SourceSpec, DEFAULT_EPS, DEFAULT_ETA, DEFAULT_TRIALS,
};
use super::{BoundArgs, BoundCommand, Command, ExampleCommand, Inputs, OutFormat, Output, SCHEMA};

/// Largest `n` for which the exact `n`-fold spectrum is computed on request.
const EXACT_POWER_LIMIT: usize = 14;

#[derive(Serialize)]
struct Report<'a, C: Serialize, R: Serialize> {
    schema: u32,
    command: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    config: &'a C,
    result: R,
}

fn emit(output: &Output, stdout: &mut dyn Write, text: &str) -> Result<()> {
    match &output.output {
        Some(path) => File::create(path)?.write_all(text.as_bytes())?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json_report<C: Serialize, R: Serialize>(command: &str, seed: Option<u64>, config: &C, result: R) -> Result<String> {
    let mut text = serde_json::to_string_pretty(&Report { schema: SCHEMA, command, seed, config, result })?;
    text.push('\n');
    Ok(text)
}

fn load(inputs: &Inputs, protocol_alias: Option<&String>) -> Result<ExperimentConfig> {
    let mut cfg = match &inputs.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = &inputs.source {
        cfg.source = Some(SourceSpec::Named(s.clone()));
    }
    if let Some(t) = inputs.tree.as_ref().or(protocol_alias) {
        cfg.protocol = Some(ProtocolSpec::Named(t.clone()));
    }
    Ok(cfg)
}

fn sim_kind(arg: Option<SimKind>, cfg: &ExperimentConfig) -> Result<SimKind> {
    arg.or(cfg.simulation)
        .ok_or_else(|| Error::InvalidConfig("choose a simulation protocol with --protocol p1..p5".into()))
}

fn density_name(d: Density) -> String {
    serde_json::to_value(d).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

pub fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Analyze { inputs, protocol, eps, density, output } => analyze(&inputs, protocol.as_ref(), eps, &density, &output, stdout),
        Command::Simulate { protocol, inputs, trials, seed, output } => simulate(protocol, &inputs, trials, seed, &output, stdout),
        Command::Bound { which } => bound(which, stdout),
        Command::Eval { protocol, inputs, mode, trials, seed, output } => evaluate(protocol, &inputs, mode, trials, seed, &output, stdout),
        Command::Example { which } => example(which, stdout),
    }
}

#[derive(Serialize)]
struct DensitySummary {
    mean: f64,
    variance: f64,
    third_central_moment: f64,
    min: f64,
    max: f64,
    atoms: usize,
    lower_tail: f64,
    upper_tail: f64,
}

fn summarize(s: &SpectrumTable, eps: f64) -> Result<DensitySummary> {
    let m = s.moments();
    Ok(DensitySummary {
        mean: m.mean,
        variance: m.variance,
        third_central_moment: m.third_central_moment,
        min: s.min(),
        max: s.max(),
        atoms: s.len(),
        lower_tail: s.eps_tail(eps, TailSide::Lower)?,
        upper_tail: s.eps_tail(eps, TailSide::Upper)?,
    })
}

fn analyze(
    inputs: &Inputs,
    protocol: Option<&String>,
    eps: Option<f64>,
    density: &str,
    output: &Output,
    stdout: &mut dyn Write,
) -> Result<()> {
    let mut cfg = load(inputs, protocol)?;
    let model = cfg.resolve_model()?;
    let eps = *cfg.eps.insert(eps.or(cfg.eps).unwrap_or(DEFAULT_EPS));
    if output.format == Some(OutFormat::Csv) {
        let d: Density = serde_json::from_value(json!(density))
            .map_err(|_| Error::InvalidConfig(format!("unknown density '{density}'")))?;
        return emit(output, stdout, &model.spectrum(d)?.to_csv_string()?);
    }
    let mut densities = serde_json::Map::new();
    for d in Density::ALL {
        densities.insert(density_name(d), serde_json::to_value(summarize(&model.spectrum(d)?, eps)?)?);
    }
    let (hxy, hyx) = model.conditional_entropies();
    let result = json!({
        "information_complexity": model.ic()?.mean(),
        "rounds": model.rounds(),
        "h_x_given_y": hxy,
        "h_y_given_x": hyx,
        "densities": densities,
    });
    emit(output, stdout, &json_report("analyze", None, &cfg, result)?)
}

fn resolve_run(cfg: &mut ExperimentConfig, trials: Option<u64>, seed: Option<u64>) -> (u64, u64) {
    let trials = *cfg.trials.insert(trials.or(cfg.trials).unwrap_or(DEFAULT_TRIALS));
    let seed = *cfg.seed.insert(seed.or(cfg.seed).unwrap_or(0));
    (trials, seed)
}

fn simulate(
    kind: Option<SimKind>,
    inputs: &Inputs,
    trials: Option<u64>,
    seed: Option<u64>,
    output: &Output,
    stdout: &mut dyn Write,
) -> Result<()> {
    let mut cfg = load(inputs, None)?;
    let kind = sim_kind(kind, &cfg)?;
    let (trials, seed) = resolve_run(&mut cfg, trials, seed);
    let built = build(&mut cfg, kind)?;
    let sim = built.simulation();
    let outcomes = run_trials(sim, trials, seed);
    if output.format == Some(OutFormat::Csv) {
        let source = sim.source();
        let labels = sim.transcript_labels();
        let tau = |t: Option<usize>| t.map(|i| labels[i].clone()).unwrap_or_default();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["trial", "x", "y", "tau_x", "tau_y", "bits", "error_cause", "rounds"])?;
        for (i, o) in outcomes.iter().enumerate() {
            w.write_record([
                i.to_string(),
                source.x_alphabet()[o.x].clone(),
                source.y_alphabet()[o.y].clone(),
                tau(o.tau_x),
                tau(o.tau_y),
                o.bits.to_string(),
                o.error.map(|e| e.as_str().to_string()).unwrap_or_default(),
                o.rounds_completed.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        return emit(output, stdout, &String::from_utf8(bytes).expect("utf-8 labels"));
    }
    let result = json!({
        "protocol": sim.name(),
        "summary": TrialSummary::from_outcomes(&outcomes),
        "comm": comm_stats(&outcomes)?,
        "error_budget": built.error_budget()?,
    });
    emit(output, stdout, &json_report("simulate", Some(seed), &cfg, result)?)
}

fn evaluate(
    kind: Option<SimKind>,
    inputs: &Inputs,
    mode: EvalMode,
    trials: Option<u64>,
    seed: Option<u64>,
    output: &Output,
    stdout: &mut dyn Write,
) -> Result<()> {
    let mut cfg = load(inputs, None)?;
    let kind = sim_kind(kind, &cfg)?;
    let (trials, seed) = resolve_run(&mut cfg, trials, seed);
    let built = build(&mut cfg, kind)?;
    let estimate = measure_sim_error(built.simulation(), mode, trials, seed)?;
    let budget = built.error_budget()?;
    let pass = estimate.value <= budget + estimate.ci_halfwidth;
    if output.format == Some(OutFormat::Csv) {
        let text = format!(
            "estimate,ci,samples,budget,pass\n{},{},{},{},{}\n",
            estimate.value, estimate.ci_halfwidth, estimate.samples, budget, pass
        );
        return emit(output, stdout, &text);
    }
    let result = json!({
        "protocol": built.simulation().name(),
        "mode": mode.as_str(),
        "estimate": estimate,
        "budget": budget,
        "pass": pass,
        "note": "the measured error witnesses achievability of this simulation only; it is not a converse",
    });
    emit(output, stdout, &json_report("eval", Some(seed), &cfg, result)?)
}

fn bound(which: BoundCommand, stdout: &mut dyn Write) -> Result<()> {
    let (name, args) = match &which {
        BoundCommand::Lower(a) => ("bound lower", a),
        BoundCommand::Upper(a) => ("bound upper", a),
        BoundCommand::SecondOrder(a) => ("bound second-order", a),
        BoundCommand::DirectProduct(a) => ("bound direct-product", a),
        BoundCommand::Beta(a) => ("bound beta", a),
    };
    let mut cfg = load(&args.inputs, args.protocol.as_ref())?;
    let result = match &which {
        BoundCommand::Lower(a) => bound_lower(&mut cfg, a)?,
        BoundCommand::Upper(a) => bound_upper(&mut cfg, a)?,
        BoundCommand::SecondOrder(a) => bound_second_order(&mut cfg, a)?,
        BoundCommand::DirectProduct(a) => bound_direct_product(&mut cfg, a)?,
        BoundCommand::Beta(a) => bound_beta(&mut cfg, a)?,
    };
    emit(&args.output, stdout, &json_report(name, None, &cfg, result)?)
}

fn eps_of(cfg: &mut ExperimentConfig, a: &BoundArgs) -> f64 {
    *cfg.eps.insert(a.eps.or(cfg.eps).unwrap_or(DEFAULT_EPS))
}

fn bound_lower(cfg: &mut ExperimentConfig, a: &BoundArgs) -> Result<serde_json::Value> {
    let model = cfg.resolve_model()?;
    let eps = eps_of(cfg, a);
    let eta = *cfg.eta.insert(a.eta.or(cfg.eta).unwrap_or(DEFAULT_ETA));
    let tails = *cfg.tails.get_or_insert_with(Default::default);
    Ok(serde_json::to_value(lower_bound(&model, eps, eta, &tails)?)?)
}

fn bound_upper(cfg: &mut ExperimentConfig, a: &BoundArgs) -> Result<serde_json::Value> {
    let model = cfg.resolve_model()?;
    let (tree, law) = match &model {
        Model::Law { tree, law } => (tree, law),
        Model::Region(_) => return Err(Error::InvalidConfig("the upper bound needs an explicit tree protocol".into())),
    };
    if let Some(g) = a.gamma {
        cfg.gamma = Some(g);
    }
    let gamma = cfg.gamma();
    let target = *cfg.target_eps.insert(a.eps.or(cfg.target_eps).unwrap_or(0.1));
    let rounds = match &cfg.rounds {
        Some(r) => r.clone(),
        None => default_round_configs(tree, law.source(), gamma)?,
    };
    cfg.rounds = Some(rounds.clone());
    let p5 = Protocol5::new(tree, law.source(), &rounds, gamma, None)?;
    Ok(serde_json::to_value(protocol5_budget(&p5, target)?)?)
}

fn bound_second_order(cfg: &mut ExperimentConfig, a: &BoundArgs) -> Result<serde_json::Value> {
    let model = cfg.resolve_model()?;
    let eps = eps_of(cfg, a);
    let n = *cfg.n.insert(a.n.or(cfg.n).unwrap_or(10));
    let ic = model.ic()?;
    let m = ic.moments();
    let prediction = second_order_predict(&m, n, eps)?;
    let exact = if n <= EXACT_POWER_LIMIT { Some(ic.power(n)?.eps_tail(eps, TailSide::Lower)?) } else { None };
    Ok(json!({
        "n": n,
        "eps": eps,
        "information_complexity": m.mean,
        "dispersion": m.variance,
        "third_central_moment": m.third_central_moment,
        "prediction": prediction,
        "exact_lower_tail": exact,
        "residual": exact.map(|e| e - prediction),
    }))
}

fn bound_direct_product(cfg: &mut ExperimentConfig, a: &BoundArgs) -> Result<serde_json::Value> {
    let model = cfg.resolve_model()?;
    let n = *cfg.n.insert(a.n.or(cfg.n).unwrap_or(100));
    let delta = *cfg.delta.insert(a.delta.or(cfg.delta).unwrap_or(0.1));
    let f = *cfg.function.get_or_insert_with(FunctionSpec::default);
    let (hxy, hyx) = model.conditional_entropies();
    let hsum_f = match f {
        FunctionSpec::Xy => hxy + hyx,
        FunctionSpec::X => hxy,
        FunctionSpec::Y => hyx,
    };
    Ok(serde_json::to_value(direct_product_thresholds(&model.ic()?, hsum_f, n, delta, EXACT_POWER_LIMIT)?)?)
}

fn bound_beta(cfg: &mut ExperimentConfig, a: &BoundArgs) -> Result<serde_json::Value> {
    let eps = eps_of(cfg, a);
    let (p, q) = match (&cfg.p, &cfg.q) {
        (Some(p), Some(q)) => (p.clone(), q.clone()),
        _ => return Err(Error::InvalidConfig("bound beta needs p and q in the config".into())),
    };
    if p.len() != q.len() {
        return Err(Error::MismatchedSupport);
    }
    let p = FiniteDistribution::new(p.into_iter().enumerate())?;
    let q = FiniteDistribution::new(q.into_iter().enumerate())?;
    let beta = beta_eps(&p, &q, eps)?;
    let upper = match cfg.lambda {
        Some(l) => Some(beta_eps_upper(&p, &q, eps, l)?),
        None => None,
    };
    Ok(json!({
        "eps": eps,
        "beta": beta,
        "neg_log_beta": -beta.log2(),
        "lambda": cfg.lambda,
        "upper": upper,
    }))
}

fn example(which: ExampleCommand, stdout: &mut dyn Write) -> Result<()> {
    match which {
        ExampleCommand::AppendixA { n, eps, eta, output } => {
            let parse = |s: &str, auto: f64| -> Result<f64> {
                if s == "auto" {
                    Ok(auto)
                } else {
                    s.parse().map_err(|_| Error::InvalidConfig(format!("cannot parse '{s}'")))
                }
            };
            let nf = n as f64;
            let eps = parse(&eps, 1.0 / (nf * nf * nf))?;
            let eta = parse(&eta, 1.0 / (4.0 * nf * nf))?;
            let law = appendix_a_example(n)?;
            let ic = law.spectrum(Density::Ic)?;
            let lambda_eps = ic.eps_tail(eps, TailSide::Lower)?;
            let lb = lower_bound(&law, eps, eta, &Default::default())?;
            let regions: Vec<_> = law
                .regions
                .iter()
                .map(|r| json!({"region": r.name, "mass": r.mass, "ic": r.atom.density(Density::Ic)}))
                .collect();
            if output.format.unwrap_or(OutFormat::Text) == OutFormat::Text {
                let mut text = format!("n = {n}, delta = {}, eps = {eps}, eta = {eta}\n", law.delta);
                for r in &law.regions {
                    text.push_str(&format!("region {:<2}  mass {:<24} ic {}\n", r.name, r.mass, r.atom.density(Density::Ic)));
                }
                text.push_str(&format!("λ_ε = {lambda_eps}\n"));
                text.push_str(&format!("IC = {}\n", ic.mean()));
                text.push_str(&format!("λ′ = {}\n", lb.lambda_prime));
                text.push_str(&format!("lower bound = {}\n", lb.bound));
                return emit(&output, stdout, &text);
            }
            let config = json!({"n": n, "eps": eps, "eta": eta});
            let result = json!({
                "regions": regions,
                "lambda_eps": lambda_eps,
                "information_complexity": ic.mean(),
                "lower_bound": lb,
            });
            emit(&output, stdout, &json_report("example appendix-a", None, &config, result)?)
        }
        ExampleCommand::Mixed { p, n, q, draws, seed, output } => {
            let seed = seed.unwrap_or(0);
            let source = JointSource::dsbs(q)?;
            let heads = TranscriptLaw::from_tree(&generators::send_x(&source), &source)?;
            let tails = TranscriptLaw::from_tree(&generators::constant(), &source)?;
            let mixed = mixed_protocol(&heads, &tails, p, n)?;
            let summary = mixed.summary()?;
            let samples = mixed.sample_normalized_ic(draws, seed)?;
            let frac = |t: f64| samples.iter().filter(|v| **v > t).count() as f64 / samples.len().max(1) as f64;
            let ic = mixed.spectrum(Density::Ic)?;
            let nf = n as f64;
            let (hi, lo) = (summary.ic_heads + 0.05, summary.ic_heads - 0.05);
            let result = json!({
                "ic_heads": summary.ic_heads,
                "ic_tails": summary.ic_tails,
                "ic_per_copy": summary.ic_total / nf,
                "monte_carlo": {"draws": draws, "above_ic_heads_plus": frac(hi), "above_ic_heads_minus": frac(lo)},
                "exact": {"above_ic_heads_plus": ic.prob_greater(nf * hi), "above_ic_heads_minus": ic.prob_greater(nf * lo)},
            });
            if output.format.unwrap_or(OutFormat::Text) == OutFormat::Text {
                let text = format!(
                    "p = {p}, n = {n}, q = {q}\nIC(heads) = {}\nIC per copy (mixture mean) = {}\nPr[ic/n > IC(heads) + 0.05] = {} (exact {})\nPr[ic/n > IC(heads) - 0.05] = {} (exact {})\n",
                    summary.ic_heads,
                    summary.ic_total / nf,
                    frac(hi),
                    ic.prob_greater(nf * hi),
                    frac(lo),
                    ic.prob_greater(nf * lo),
                );
                return emit(&output, stdout, &text);
            }
            let config = json!({"p": p, "n": n, "q": q, "draws": draws});
            emit(&output, stdout, &json_report("example mixed", Some(seed), &config, result)?)
        }
        ExampleCommand::Dsbs { q, k, eps, output } => {
            let source = JointSource::dsbs_bits(q, k)?;
            let law = TranscriptLaw::from_tree(&generators::send_x(&source), &source)?;
            let ic = law.spectrum(Density::Ic)?;
            let s = summarize(&ic, eps)?;
            if output.format.unwrap_or(OutFormat::Text) == OutFormat::Text {
                let text = format!(
                    "DSBS({q}) on {k} bit(s), protocol: send X\nH(X|Y) = {}\nIC = {}\nV = {}\nlower {eps}-tail = {}\nupper {eps}-tail = {}\n",
                    source.entropy_x_given_y(),
                    s.mean,
                    s.variance,
                    s.lower_tail,
                    s.upper_tail
                );
                return emit(&output, stdout, &text);
            }
            let config = json!({"q": q, "k": k, "eps": eps});
            let result = json!({"h_x_given_y": source.entropy_x_given_y(), "ic": s});
            emit(&output, stdout, &json_report("example dsbs", None, &config, result)?)
        }
    }
}
