//! Subcommand implementations. Each returns the JSON document to print.

use std::collections::HashSet;

use crn_core::elimination::{classify, condition_report, reduce, ConditionReport, EliminationGraph, ReducedNetwork};
use crn_core::kinetics::{mass_action_fit, reduced_intensities, DEFAULT_CHAIN_CAP};
use crn_core::markov::{
    check_complex_balance, check_detailed_balance, check_stationary, conditional_distribution,
    decompose_reduced_component, irreducible_component, max_residual, mixture_weights, stationary_distribution,
    ComponentSet, Distribution, MarkovError,
};
use crn_core::model::State;
use crn_core::netparse::json::{
    condition_report_json, convergence_json, distribution_json, occupation_json, rat_value, reduced_network_json,
};
use crn_core::netparse::NetworkDocument;
use crn_core::num::{NumericMode, Rat};
use crn_core::scaling::{
    convergence_table, exponent, limit_distribution, limit_support, scale_kinetics, ScalingSpec,
};
use crn_core::simulate::{empirical_distribution, replicas, Occupation};
use crn_core::system::{ReactionSystem, ReducedSrn};
use num_traits::Zero;
use serde_json::{json, Value};

use crate::inputs::{
    elim_failure, kinetics_failure, load, markov_failure, parse_beta, parse_bound, parse_ns, parse_state,
    resolve_set, scaling_failure, sim_failure, species_indices,
};
use crate::{Cli, Command, Failure, LimitArgs, ReduceArgs, SetArgs, SimulateArgs, StationaryArgs, ValidateArgs};

/// Sample spread and count used to recognize mass-action reduced rates.
const FIT_SPREAD: u64 = 3;
const FIT_SAMPLES: usize = 64;

pub fn run(cli: &Cli) -> Result<Value, Failure> {
    match &cli.command {
        Command::Validate(a) => validate(a),
        Command::Reduce(a) => reduce_cmd(a),
        Command::Stationary(a) => stationary(a, cli.mode),
        Command::Limit(a) => limit(a, cli.mode),
        Command::Simulate(a) => simulate(a),
    }
}

fn validate(args: &ValidateArgs) -> Result<Value, Failure> {
    let doc = load(&args.file)?;
    let net = &doc.network;
    let violations = net.validate();
    let compatibility = net.check_compatibility(&vec![args.probe_box; net.dim()]);
    let mut sets = Vec::new();
    let mut bad_sets = Vec::new();
    for set in &doc.sets {
        let result = crn_core::elimination::species_set(net, &set.species).and_then(|u| classify(net, &u));
        let error = result.err().map(|e| e.to_string());
        if let Some(e) = &error {
            bad_sets.push(format!("set {}: {e}", set.name));
        }
        sets.push(json!({"name": set.name, "species": set.species, "non_interacting": error.is_none(), "error": error}));
    }
    let valid = violations.is_empty() && bad_sets.is_empty();
    let out = json!({
        "valid": valid,
        "species": net.species_names(),
        "reactions": net.reactions().len(),
        "mass_action": net.is_mass_action(),
        "sets": sets,
        "violations": violations,
        "compatibility_warnings": compatibility,
    });
    for w in &compatibility {
        eprintln!("warning: {}", serde_json::to_string(w).unwrap_or_default());
    }
    if !valid {
        let mut problems: Vec<String> = violations.iter().map(|v| serde_json::to_string(v).unwrap_or_default()).collect();
        problems.extend(bad_sets);
        return Err(Failure::validation(problems.join("; ")).with_detail(out));
    }
    Ok(out)
}

/// Classify, check the conditions and reduce. Violations exit with code 3
/// and the condition report as detail.
fn reduced_network(doc: &NetworkDocument, set: &SetArgs, cap: usize) -> Result<(EliminationGraph, ConditionReport, ReducedNetwork), Failure> {
    let net = &doc.network;
    let u = resolve_set(doc, set)?;
    let g = classify(net, &u).map_err(elim_failure)?;
    let report = condition_report(net, &g);
    let detail = json!({"conditions": condition_report_json(&report)});
    if !report.eliminable {
        return Err(Failure::new(3, format!(
            "species set is not eliminable: produced {:?}, degraded {:?}",
            report.u_pro, report.u_deg
        ))
        .with_detail(detail));
    }
    if !report.condition1.holds {
        let what = report
            .condition1
            .witness
            .as_ref()
            .map(|c| format!("cycle {} has net change {:?}", c.display, c.zeta))
            .unwrap_or_default();
        return Err(Failure::new(3, format!("condition 1 fails: {what}")).with_detail(detail));
    }
    let rn = reduce(net, &g, cap).map_err(|e| elim_failure(e).with_detail(detail))?;
    Ok((g, report, rn))
}

fn reduce_cmd(args: &ReduceArgs) -> Result<Value, Failure> {
    let doc = load(&args.file)?;
    let net = &doc.network;
    let (_, report, rn) = reduced_network(&doc, &args.set, args.cap)?;
    let mut fits = Vec::with_capacity(rn.reactions.len());
    for k in 0..rn.reactions.len() {
        fits.push(mass_action_fit(net, &rn, k, FIT_SPREAD, FIT_SAMPLES, DEFAULT_CHAIN_CAP).map_err(kinetics_failure)?);
    }
    let mut reduced = reduced_network_json(net, &rn);
    let mut text = format!("species {}\n", rn.core_names.join(", "));
    if rn.reactions.is_empty() {
        text.push_str("# no reactions remain after elimination\n");
    }
    for (k, r) in rn.reactions.iter().enumerate() {
        let line = format!(
            "{} -> {}",
            r.reactant.format_declared(&rn.core_names),
            r.product.format_declared(&rn.core_names)
        );
        match &fits[k] {
            Some(kappa) => text.push_str(&format!("{line} : k={}\n", crn_core::num::format_rat(kappa))),
            None => text.push_str(&format!("# {line} : not mass-action, evaluate with --eval\n")),
        }
        reduced["reactions"][k]["mass_action_rate"] = fits[k].as_ref().map(rat_value).unwrap_or(Value::Null);
    }
    let mut evaluations = Vec::new();
    for e in &args.eval {
        let z = parse_state(e, &rn.core_names)?;
        let lam = reduced_intensities(net, &rn, z.as_slice(), DEFAULT_CHAIN_CAP).map_err(kinetics_failure)?;
        evaluations.push(json!({
            "state": z.as_slice(),
            "intensities": lam.iter().map(rat_value).collect::<Vec<_>>(),
        }));
    }
    Ok(json!({
        "conditions": condition_report_json(&report),
        "reduced_network": reduced,
        "reduced_crn": text,
        "evaluations": evaluations,
    }))
}

/// The full network, or the reduced one when asked.
fn system(doc: &NetworkDocument, reduced: bool, set: &SetArgs) -> Result<Box<dyn ReactionSystem>, Failure> {
    if reduced {
        let (_, _, rn) = reduced_network(doc, set, crn_core::elimination::DEFAULT_MEMO_CAP)?;
        Ok(Box::new(ReducedSrn::new(doc.network.clone(), rn)))
    } else {
        Ok(Box::new(doc.network.clone()))
    }
}

fn residuals(sys: &dyn ReactionSystem, gamma: &ComponentSet, pi: &Distribution) -> Result<Value, Failure> {
    let stationary = check_stationary(sys, gamma, pi).map_err(markov_failure)?;
    let complex = check_complex_balance(sys, gamma, pi).map_err(markov_failure)?;
    let detailed = match check_detailed_balance(sys, gamma, pi) {
        Ok(t) => rat_value(&max_residual(&t)),
        Err(MarkovError::NotReversible(_)) => Value::Null,
        Err(e) => return Err(markov_failure(e)),
    };
    Ok(json!({
        "stationary": rat_value(&stationary),
        "complex_balance": rat_value(&max_residual(&complex)),
        "detailed_balance": detailed,
    }))
}

fn stationary(args: &StationaryArgs, mode: NumericMode) -> Result<Value, Failure> {
    let doc = load(&args.file)?;
    let sys = system(&doc, args.reduced, &args.set)?;
    let names = sys.species_names().to_vec();
    let seed = parse_state(&args.seed_state, &names)?;
    let bound = parse_bound(args.bound.as_deref(), sys.dim(), &seed)?;
    let gamma = irreducible_component(sys.as_ref(), &seed, &bound).map_err(markov_failure)?;
    let pi = stationary_distribution(sys.as_ref(), &gamma, mode).map_err(markov_failure)?;
    Ok(json!({
        "reduced": args.reduced,
        "component": {"states": gamma.len(), "closed": gamma.closed},
        "distribution": distribution_json(&pi, &names),
        "residuals": residuals(sys.as_ref(), &gamma, &pi)?,
    }))
}

/// Compare the limit on the slice `ρ = 0` with the stationary laws of the
/// reduced network on each of its closed classes.
fn reduced_check(doc: &NetworkDocument, args: &LimitArgs, limit: &Distribution, mode: NumericMode) -> Result<Value, Failure> {
    let (_, _, rn) = reduced_network(doc, &args.set, crn_core::elimination::DEFAULT_MEMO_CAP)?;
    let core = rn.core_species.clone();
    let projected = limit.project(&core);
    let sys = ReducedSrn::new(doc.network.clone(), rn);
    let slice = ComponentSet::from_states(projected.states.clone());
    let parts = decompose_reduced_component(&sys, &slice).map_err(markov_failure)?;
    let weights = mixture_weights(&projected, &parts);
    let mut max_tv = Rat::zero();
    let mut all_closed = true;
    for part in &parts {
        all_closed &= part.closed;
        let reduced_pi = stationary_distribution(&sys, part, mode).map_err(markov_failure)?;
        let members: HashSet<&State> = part.states.iter().collect();
        let cond = conditional_distribution(&projected, |s| members.contains(s)).map_err(markov_failure)?;
        max_tv = max_tv.max(cond.total_variation(&reduced_pi));
    }
    Ok(json!({
        "components": parts.len(),
        "all_closed": all_closed,
        "mixture_weights": weights.iter().map(rat_value).collect::<Vec<_>>(),
        "max_tv": rat_value(&max_tv),
        "matches": max_tv.is_zero() && all_closed,
    }))
}

fn limit(args: &LimitArgs, mode: NumericMode) -> Result<Value, Failure> {
    let doc = load(&args.file)?;
    let net = &doc.network;
    let u = resolve_set(&doc, &args.set)?;
    let beta = parse_beta(args.beta.as_deref(), &doc, &u)?;
    ScalingSpec::new(beta.clone(), 1).map_err(scaling_failure)?;
    let ns = parse_ns(&args.ns)?;
    let names = net.species_names().to_vec();
    let seed = parse_state(&args.seed_state, &names)?;
    let bound = parse_bound(args.bound.as_deref(), net.dim(), &seed)?;
    let gamma = irreducible_component(net, &seed, &bound).map_err(markov_failure)?;
    let pi = stationary_distribution(net, &gamma, mode).map_err(markov_failure)?;
    let table = convergence_table(&pi, &u, &beta, &ns).map_err(scaling_failure)?;
    let support = limit_support(&pi.states, &u, &beta).map_err(scaling_failure)?;
    let lim = limit_distribution(&pi, &u, &beta).map_err(scaling_failure)?;
    let on_slice = |s: &State| exponent(s.as_slice(), &u, &beta) == support.gamma0;
    let conditional = conditional_distribution(&pi, on_slice).map_err(markov_failure)?;
    let complex = check_complex_balance(net, &gamma, &pi).map_err(markov_failure)?;
    let reduced = if support.gamma0.is_zero() {
        reduced_check(&doc, args, &lim, mode)?
    } else {
        Value::Null
    };
    let u_names: Vec<&String> = u.iter().map(|&i| &names[i]).collect();
    Ok(json!({
        "eliminated": u_names,
        "beta": beta.iter().map(rat_value).collect::<Vec<_>>(),
        "component": {"states": gamma.len(), "closed": gamma.closed},
        "gamma0": rat_value(&support.gamma0),
        "gap": support.gap.as_ref().map(rat_value),
        "table": convergence_json(&table),
        "limit_distribution": distribution_json(&lim, &names),
        "checks": {
            "limit_equals_conditional": lim.total_variation(&conditional).is_zero(),
            "complex_balance_residual": rat_value(&max_residual(&complex)),
            "reduced": reduced,
        },
    }))
}

fn simulate(args: &SimulateArgs) -> Result<Value, Failure> {
    let mut doc = load(&args.file)?;
    if let Some(n) = args.scale_n {
        let u = resolve_set(&doc, &args.set)?;
        let beta = parse_beta(args.beta.as_deref(), &doc, &u)?;
        let spec = ScalingSpec::new(beta, n).map_err(scaling_failure)?;
        doc.network = scale_kinetics(&doc.network, &u, &spec).map_err(scaling_failure)?;
    }
    let sys = system(&doc, args.reduced, &args.set)?;
    let names = sys.species_names().to_vec();
    let x0 = parse_state(&args.x0, &names)?;
    if !(args.t_end.is_finite() && args.t_end > 0.0) {
        return Err(Failure::validation("--t-end must be positive and finite"));
    }
    if args.replicas == 0 {
        return Err(Failure::validation("--replicas must be at least 1"));
    }
    let trajs = replicas(sys.as_ref(), &x0, args.t_end, args.seed, args.replicas, args.max_jumps).map_err(sim_failure)?;
    if let Some(path) = &args.trajectory {
        std::fs::write(path, trajs[0].to_csv(&names))
            .map_err(|e| Failure::new(2, format!("cannot write {}: {e}", path.display())))?;
    }
    let parts: Vec<Occupation> = trajs
        .iter()
        .map(|t| empirical_distribution(t, args.burn_in))
        .collect::<Result<_, _>>()
        .map_err(sim_failure)?;
    let mut occupation = Occupation::average(&parts);
    let mut species = names.clone();
    if let Some(list) = &args.project {
        let coords = species_indices(&names, list)?;
        occupation = occupation.project(&coords);
        species = coords.iter().map(|&i| names[i].clone()).collect();
    }
    Ok(json!({
        "seed": args.seed,
        "replicas": args.replicas,
        "t_end": args.t_end,
        "burn_in": args.burn_in,
        "reduced": args.reduced,
        "jumps": trajs.iter().map(|t| t.jumps()).collect::<Vec<_>>(),
        "final_states": trajs.iter().map(|t| t.final_state().as_slice().to_vec()).collect::<Vec<_>>(),
        "occupation": occupation_json(&occupation, &species),
    }))
}
