//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

mod common;

use std::time::Instant;

use common::{all_evidence_sets, cancer_findings, random_binary_net, random_evidence};
use strawnet::corpus::{cancer, CANCER_NET};
use strawnet::format::{parse_network, serialize_network};
use strawnet::harness::{
    generate_diagnostic_network, surprise_bound_check, DetectionExperiment, NetSpec,
};
use strawnet::inference::{brute_force_joint, posterior_marginal, prob_of_evidence, BRUTE_FORCE_CAP};
use strawnet::straw::{
    build_bipartite_straw, build_independent_straw, conflict_index, conflict_report,
};
use strawnet::{validate_network, Evidence, Network, Role, StrawKind, Verdict};

/// Published values are rounded to three significant digits.
const PUBLISHED_TOL: f64 = 5e-4;
/// Agreement between exact computations.
const EXACT_TOL: f64 = 1e-9;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(label: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    check((got - want).abs() <= tol, || {
        format!("{label}: got {got:.6}, expected {want} ± {tol:e}")
    })
}

fn p_given(net: &Network, pairs: &[(&str, &str)]) -> f64 {
    prob_of_evidence(net, &cancer_findings(net, pairs)).unwrap()
}

const SECTION3: &[(&str, &str)] = &[("Palpation", "yes"), ("Diabetes", "yes")];
const SECTION4: &[(&str, &str)] = &[("Palpation", "yes"), ("X-ray", "yes"), ("Diabetes", "yes")];

fn worked_example_numbers() -> Outcome {
    let net = cancer();
    let straw = build_bipartite_straw(&net).map_err(|e| e.to_string())?.network;
    let indep = build_independent_straw(&net).map_err(|e| e.to_string())?;
    let e3 = cancer_findings(&net, SECTION3);
    let e4 = cancer_findings(&net, SECTION4);
    let p = |n: &Network, e: &Evidence| prob_of_evidence(n, e).unwrap();

    close("P(Palpation=yes)", p_given(&net, &[("Palpation", "yes")]), 0.252, PUBLISHED_TOL)?;
    close("P(X-ray=yes)", p_given(&net, &[("X-ray", "yes")]), 0.365, PUBLISHED_TOL)?;
    close("P(Diabetes=yes)", p_given(&net, &[("Diabetes", "yes")]), 0.247, PUBLISHED_TOL)?;
    close("P_given(pair)", p(&net, &e3), 0.0452, PUBLISHED_TOL)?;
    close("P_straw(pair)", p(&straw, &e3), 0.0619, PUBLISHED_TOL)?;
    close("P_given(triple)", p(&net, &e4), 0.0388, PUBLISHED_TOL)?;
    close("P_independent(triple)", p(&indep, &e4), 0.0227, PUBLISHED_TOL)?;
    close("P_straw(triple)", p(&straw, &e4), 0.0551, PUBLISHED_TOL)?;
    Ok(format!(
        "given {:.4}/{:.4}, bipartite {:.4}/{:.4}, independent {:.4}",
        p(&net, &e3),
        p(&net, &e4),
        p(&straw, &e3),
        p(&straw, &e4),
        p(&indep, &e4)
    ))
}

fn verdicts() -> Outcome {
    let net = cancer();
    let both = [StrawKind::Bipartite, StrawKind::Independent];
    let r3 = conflict_report(&net, &cancer_findings(&net, SECTION3), &both).map_err(|e| e.to_string())?;
    let r4 = conflict_report(&net, &cancer_findings(&net, SECTION4), &both).map_err(|e| e.to_string())?;
    let v = |r: &strawnet::ConflictReport, k| r.score(k).unwrap().verdict;
    check(v(&r3, StrawKind::Bipartite) == Verdict::Conflict, || "pair: bipartite not Conflict".into())?;
    check(v(&r4, StrawKind::Bipartite) == Verdict::Conflict, || "triple: bipartite not Conflict".into())?;
    check(v(&r4, StrawKind::Independent) == Verdict::NoConflict, || {
        "triple: independent not NoConflict".into()
    })?;
    let c = |r: &strawnet::ConflictReport, k| r.score(k).unwrap().index.unwrap();
    Ok(format!(
        "c_s pair bipartite {:+.4}; triple bipartite {:+.4}, independent {:+.4}",
        c(&r3, StrawKind::Bipartite),
        c(&r4, StrawKind::Bipartite),
        c(&r4, StrawKind::Independent)
    ))
}

fn oracle_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..200u64 {
        let n = 1 + (i % 12) as usize;
        let net = random_binary_net(n, i);
        check(validate_network(&net).is_empty(), || format!("random net {i} invalid"))?;
        let e = random_evidence(&net, i);
        let ve = prob_of_evidence(&net, &e).map_err(|x| x.to_string())?;
        let bf = brute_force_joint(&net, &e, BRUTE_FORCE_CAP).map_err(|x| x.to_string())?;
        worst = worst.max((ve - bf).abs());
        check((ve - bf).abs() <= EXACT_TOL, || format!("net {i}: VE {ve} vs brute force {bf}"))?;
    }
    Ok(format!("200 networks, max |diff| = {worst:.2e}"))
}

fn straw_fidelity_on(net: &Network) -> Result<f64, String> {
    let straw = build_bipartite_straw(net).map_err(|e| e.to_string())?.network;
    let empty = Evidence::new();
    let mut worst: f64 = 0.0;
    let targets = net.ids_with_role(Role::Target);
    for &t in &targets {
        let name = &net.variable(t).name;
        let given = posterior_marginal(net, t, &empty).unwrap();
        let built = posterior_marginal(&straw, straw.find(name).unwrap(), &empty).unwrap();
        for (g, b) in given.iter().zip(&built) {
            worst = worst.max((g - b).abs());
        }
    }
    let target_names: Vec<usize> = targets.clone();
    for config in all_evidence_sets(net, &target_names)
        .into_iter()
        .filter(|e| e.len() == targets.len())
    {
        if prob_of_evidence(net, &config).unwrap() <= 0.0 {
            continue;
        }
        for a in net.ids_with_role(Role::Evidence) {
            let name = &net.variable(a).name;
            let given = posterior_marginal(net, a, &config).unwrap();
            let built = posterior_marginal(&straw, straw.find(name).unwrap(), &config).unwrap();
            for (g, b) in given.iter().zip(&built) {
                worst = worst.max((g - b).abs());
            }
        }
    }
    if worst > EXACT_TOL {
        return Err(format!("{}: deviation {worst:e}", net.name()));
    }
    Ok(worst)
}

fn fidelity_specs() -> Vec<NetSpec> {
    (0..50u64)
        .map(|i| NetSpec {
            n_target: 1 + (i % 3) as usize,
            n_evidence: 1 + (i % 4) as usize,
            n_other: (i % 5) as usize,
            states_per_var: 2 + (i % 2) as usize,
            edge_density: 0.3 + 0.1 * (i % 6) as f64,
            seed: 1000 + i,
        })
        .collect()
}

fn straw_fidelity() -> Outcome {
    let mut worst = straw_fidelity_on(&cancer())?;
    for spec in fidelity_specs() {
        let net = generate_diagnostic_network(&spec).map_err(|e| e.to_string())?;
        worst = worst.max(straw_fidelity_on(&net)?);
    }
    Ok(format!("cancer.net + 50 generated, max deviation {worst:.2e}"))
}

fn surprise_bound() -> Outcome {
    let net = cancer();
    let n = 100_000;
    let mut parts = Vec::new();
    for kind in StrawKind::ALL {
        let rows = surprise_bound_check(&net, kind, &[1.0, 2.0, 3.0, 4.0], n, 2024)
            .map_err(|e| e.to_string())?;
        for x in rows {
            let bound = 2f64.powf(-x.k);
            let limit = bound + 3.0 * (bound * (1.0 - bound) / n as f64).sqrt();
            check(x.fraction <= limit, || {
                format!("{kind} K={}: exceedance {} > {limit}", x.k, x.fraction)
            })?;
            parts.push(format!("{}K{}={:.4}", &kind.as_str()[..3], x.k, x.fraction));
        }
    }
    Ok(parts.join(" "))
}

fn degenerate_identity() -> Outcome {
    let shapes = [(1, 1), (1, 4), (2, 3), (3, 5), (2, 8), (3, 7), (4, 6), (5, 5)];
    let mut sets = 0usize;
    let mut worst: f64 = 0.0;
    for (i, &(nt, ne)) in shapes.iter().enumerate() {
        let mut spec = NetSpec::new(nt, ne, 0, 77 + i as u64);
        spec.edge_density = 0.6;
        let net = generate_diagnostic_network(&spec).map_err(|e| e.to_string())?;
        let straw = build_bipartite_straw(&net).map_err(|e| e.to_string())?.network;
        let evidence = net.ids_with_role(Role::Evidence);
        for e in all_evidence_sets(&net, &evidence) {
            if e.is_empty() {
                continue;
            }
            let pg = prob_of_evidence(&net, &e).unwrap();
            let ps = prob_of_evidence(&straw, &e).unwrap();
            let c = conflict_index(ps, pg).map_err(|x| x.to_string())?;
            worst = worst.max(c.abs());
            check(c.abs() <= EXACT_TOL, || format!("{}: c_s = {c} for {e}", net.name()))?;
            sets += 1;
        }
    }
    Ok(format!("{} nets, {sets} evidence sets, max |c_s| = {worst:.2e}", shapes.len()))
}

fn round_trip_and_determinism() -> Outcome {
    let corpus = parse_network(CANCER_NET).map_err(|e| e.to_string())?;
    let text = serialize_network(&corpus);
    check(parse_network(&text).map_err(|e| e.to_string())? == corpus, || {
        "corpus round trip differs".into()
    })?;
    check(serialize_network(&parse_network(&text).unwrap()) == text, || {
        "corpus serialization not stable".into()
    })?;
    for spec in fidelity_specs() {
        let net = generate_diagnostic_network(&spec).map_err(|e| e.to_string())?;
        let text = serialize_network(&net);
        let back = parse_network(&text).map_err(|e| format!("{}: {e}", net.name()))?;
        check(back.approx_eq(&net, 1e-12), || format!("{}: round trip differs", net.name()))?;
        check(serialize_network(&back) == text, || {
            format!("{}: serialization not stable", net.name())
        })?;
    }
    let exp = DetectionExperiment::new(NetSpec::new(2, 3, 2, 11), 0.7, 0.4, 3000, 99);
    let a = exp.run().map_err(|e| e.to_string())?.to_table();
    let b = exp.run().map_err(|e| e.to_string())?.to_table();
    check(a == b, || "experiment reruns differ".into())?;
    Ok("corpus + 50 generated round-trip; experiment rerun byte-identical".into())
}

fn comparison_sanity() -> Outcome {
    let trials = 30u64;
    let mut wins = 0;
    let mut margin = 0.0;
    for trial in 0..trials {
        let mut spec = NetSpec::new(2, 4, 4, 500 + trial);
        spec.edge_density = 0.6;
        let mut exp = DetectionExperiment::new(spec, 0.9, 1.0, 2000, 7000 + trial);
        exp.perturb_roles = vec![Role::Other];
        let result = exp.run().map_err(|e| e.to_string())?;
        let rate = |k| result.rates_for(k).and_then(|r| r.detection_rate).unwrap_or(0.0);
        let (bip, ind) = (rate(StrawKind::Bipartite), rate(StrawKind::Independent));
        margin += bip - ind;
        if bip >= ind {
            wins += 1;
        }
    }
    check(wins * 2 > trials, || {
        format!("bipartite >= independent in only {wins}/{trials} trials")
    })?;
    Ok(format!(
        "bipartite >= independent in {wins}/{trials} trials (mean margin {:+.3})",
        margin / trials as f64
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 worked-example regression", worked_example_numbers),
        ("2 verdict regression", verdicts),
        ("3 oracle equivalence", oracle_equivalence),
        ("4 straw fidelity", straw_fidelity),
        ("5 surprise-index bound", surprise_bound),
        ("6 degenerate identity", degenerate_identity),
        ("7 round trip and determinism", round_trip_and_determinism),
        ("8 comparison experiment", comparison_sanity),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (name, run) in criteria {
        let t = Instant::now();
        match run() {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{:.2?}]", t.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why} [{:.2?}]", t.elapsed());
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.2?}",
        criteria.len() - failed,
        start.elapsed()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
