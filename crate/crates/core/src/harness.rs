//! Synthetic experiments around straw models.
//!
//! The world is modelled as a two-component mixture
//! `P(x) = (1 - ε) P_base(x) + ε P_alt(x)`: with probability `1 - ε` the
//! base network's background assumptions hold, otherwise the data come from
//! an alternate network. Alternates are built by perturbing the base CPTs,
//! which keeps variables and states aligned.
//!
//! Randomness comes from ChaCha8 seeded with [`rand::SeedableRng::seed_from_u64`],
//! whose output is specified independently of platform, so a seed fixes
//! every network, case and rate bit for bit.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evidence::Evidence;
use crate::network::{normalize_row, row_index, topological_order, Cpt, Network, Role, Variable};
use crate::straw::{ConflictReport, ConflictScorer, StrawKind, Verdict};

/// Most parents the generator gives a single variable.
pub const MAX_PARENTS: usize = 4;

/// Shape of a generated diagnostic network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetSpec {
    pub n_target: usize,
    pub n_evidence: usize,
    pub n_other: usize,
    pub states_per_var: usize,
    /// Probability of each admissible edge.
    pub edge_density: f64,
    pub seed: u64,
}

impl NetSpec {
    pub fn new(n_target: usize, n_evidence: usize, n_other: usize, seed: u64) -> Self {
        NetSpec {
            n_target,
            n_evidence,
            n_other,
            states_per_var: 2,
            edge_density: 0.5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_target == 0 || self.n_evidence == 0 {
            return Err(Error::InvalidParameter(
                "a diagnostic network needs at least one target and one evidence variable".into(),
            ));
        }
        if self.states_per_var < 2 {
            return Err(Error::InvalidParameter("variables need at least two states".into()));
        }
        if !(self.edge_density > 0.0 && self.edge_density <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "edge density {} is outside (0, 1]",
                self.edge_density
            )));
        }
        Ok(())
    }
}

/// Derives an independent seed for a numbered sub-stream of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.gen()
}

/// Uniform draw from the probability simplex with `k` vertices.
fn sample_simplex(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    // Normalized unit exponentials; 1 - u lies in (0, 1].
    let mut row: Vec<f64> = (0..k).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    normalize_row(&mut row);
    row
}

fn pick_parents(rng: &mut impl Rng, candidates: &[usize], density: f64) -> Vec<usize> {
    let mut chosen: Vec<usize> = candidates
        .iter()
        .copied()
        .filter(|_| rng.gen::<f64>() < density)
        .collect();
    while chosen.len() > MAX_PARENTS {
        chosen.remove(rng.gen_range(0..chosen.len()));
    }
    chosen
}

/// Random layered diagnostic network.
///
/// Declaration order is setting factors, targets, mediators, evidence. The
/// first half (rounded up) of the Other variables are roots that may parent
/// targets; the rest are mediators with at least one target parent. Evidence
/// variables draw parents from targets and mediators and always get at least
/// one.
pub fn generate_diagnostic_network(spec: &NetSpec) -> Result<Network> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_setting = spec.n_other.div_ceil(2);
    let n_mediator = spec.n_other - n_setting;
    let states: Vec<String> = (0..spec.states_per_var).map(|s| format!("s{s}")).collect();

    let settings: Vec<usize> = (0..n_setting).collect();
    let targets: Vec<usize> = (n_setting..n_setting + spec.n_target).collect();
    let first_mediator = n_setting + spec.n_target;
    let mediators: Vec<usize> = (first_mediator..first_mediator + n_mediator).collect();
    let first_evidence = first_mediator + n_mediator;

    let mut variables = Vec::new();
    let mut parents: Vec<Vec<usize>> = Vec::new();
    for i in 0..n_setting {
        variables.push(Variable::new(format!("O{}", i + 1), states.clone(), Role::Other));
        parents.push(Vec::new());
    }
    for i in 0..spec.n_target {
        variables.push(Variable::new(format!("T{}", i + 1), states.clone(), Role::Target));
        parents.push(pick_parents(&mut rng, &settings, spec.edge_density));
    }
    let settings_and_targets: Vec<usize> = (0..n_setting + spec.n_target).collect();
    for i in 0..n_mediator {
        variables.push(Variable::new(
            format!("O{}", n_setting + i + 1),
            states.clone(),
            Role::Other,
        ));
        let mut ps = pick_parents(&mut rng, &settings_and_targets, spec.edge_density);
        if !ps.iter().any(|p| targets.contains(p)) {
            let t = targets[rng.gen_range(0..targets.len())];
            if ps.len() == MAX_PARENTS {
                ps.pop();
            }
            ps.push(t);
            ps.sort_unstable();
        }
        parents.push(ps);
    }
    let evidence_candidates: Vec<usize> = targets.iter().chain(&mediators).copied().collect();
    for i in 0..spec.n_evidence {
        variables.push(Variable::new(format!("E{}", i + 1), states.clone(), Role::Evidence));
        let mut ps = pick_parents(&mut rng, &evidence_candidates, spec.edge_density);
        if ps.is_empty() {
            ps.push(evidence_candidates[rng.gen_range(0..evidence_candidates.len())]);
        }
        parents.push(ps);
    }
    debug_assert_eq!(variables.len(), first_evidence + spec.n_evidence);

    let k = spec.states_per_var;
    let cpts = parents
        .into_iter()
        .enumerate()
        .map(|(child, ps)| {
            let rows = (0..k.pow(ps.len() as u32)).map(|_| sample_simplex(&mut rng, k)).collect();
            Cpt { child, parents: ps, rows }
        })
        .collect();
    Ok(Network::from_parts(
        format!("generated-{}", spec.seed),
        variables,
        cpts,
    ))
}

/// Mixes every CPT row with a fresh simplex draw:
/// `(1 - strength) * row + strength * fresh`.
pub fn perturb_network(net: &Network, strength: f64, seed: u64) -> Result<Network> {
    perturb_roles(net, strength, seed, &[Role::Target, Role::Evidence, Role::Other])
}

/// [`perturb_network`] restricted to variables whose role is in `roles`.
pub fn perturb_roles(net: &Network, strength: f64, seed: u64, roles: &[Role]) -> Result<Network> {
    if !(0.0..=1.0).contains(&strength) {
        return Err(Error::InvalidParameter(format!(
            "perturbation strength {strength} is outside [0, 1]"
        )));
    }
    if strength == 0.0 {
        return Ok(net.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cpts = net
        .cpts()
        .iter()
        .map(|cpt| {
            let role = net.variable(cpt.child).role;
            let rows = cpt
                .rows
                .iter()
                .map(|row| {
                    // Draw even for skipped rows so the stream does not depend on `roles`.
                    let fresh = sample_simplex(&mut rng, row.len());
                    if !roles.contains(&role) {
                        return row.clone();
                    }
                    let mut mixed: Vec<f64> = row
                        .iter()
                        .zip(&fresh)
                        .map(|(x, f)| (1.0 - strength) * x + strength * f)
                        .collect();
                    normalize_row(&mut mixed);
                    mixed
                })
                .collect();
            Cpt {
                child: cpt.child,
                parents: cpt.parents.clone(),
                rows,
            }
        })
        .collect();
    Ok(Network::from_parts(net.name(), net.variables().to_vec(), cpts))
}

/// Base model, alternate model and the probability `epsilon` that the
/// alternate generated a case.
#[derive(Debug, Clone)]
pub struct MixtureWorld {
    base: Network,
    alternate: Network,
    epsilon: f64,
}

impl MixtureWorld {
    pub fn new(base: Network, alternate: Network, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidParameter(format!(
                "mixing weight {epsilon} is outside [0, 1]"
            )));
        }
        if base.len() != alternate.len() {
            return Err(Error::MismatchedWorld(format!(
                "{} vs {} variables",
                base.len(),
                alternate.len()
            )));
        }
        for (a, b) in base.variables().iter().zip(alternate.variables()) {
            if a.name != b.name || a.states != b.states {
                return Err(Error::MismatchedWorld(format!(
                    "variable \"{}\" does not match \"{}\"",
                    a.name, b.name
                )));
            }
        }
        Ok(MixtureWorld { base, alternate, epsilon })
    }

    pub fn base(&self) -> &Network {
        &self.base
    }

    pub fn alternate(&self) -> &Network {
        &self.alternate
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    Base,
    Alternate,
}

/// One sampled case: which component produced it and its findings on the
/// Evidence-role variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub label: Component,
    pub findings: Evidence,
}

/// Ancestral sampler over a fixed network.
#[derive(Debug, Clone)]
pub struct ForwardSampler<'a> {
    net: &'a Network,
    order: Vec<usize>,
    parent_cards: Vec<Vec<usize>>,
}

impl<'a> ForwardSampler<'a> {
    pub fn new(net: &'a Network) -> Result<Self> {
        let order = topological_order(net)?;
        let parent_cards = (0..net.len())
            .map(|v| net.parents(v).iter().map(|&p| net.variable(p).cardinality()).collect())
            .collect();
        Ok(ForwardSampler { net, order, parent_cards })
    }

    /// A full assignment (state index per variable id).
    pub fn sample(&self, rng: &mut impl Rng) -> Vec<usize> {
        let mut state = vec![0; self.net.len()];
        let mut cfg = Vec::with_capacity(MAX_PARENTS);
        for &v in &self.order {
            cfg.clear();
            cfg.extend(self.net.parents(v).iter().map(|&p| state[p]));
            let row = &self.net.cpt(v).rows[row_index(&self.parent_cards[v], &cfg)];
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            state[v] = row.len() - 1;
            for (s, &p) in row.iter().enumerate() {
                acc += p;
                if u < acc {
                    state[v] = s;
                    break;
                }
            }
        }
        state
    }
}

fn findings_of(net: &Network, evidence_ids: &[usize], state: &[usize]) -> Evidence {
    let mut e = Evidence::new();
    for &v in evidence_ids {
        let var = net.variable(v);
        e.insert(var.name.clone(), var.states[state[v]].clone());
    }
    e
}

/// Draws `n` labelled cases from the mixture.
pub fn sample_cases(world: &MixtureWorld, n: usize, seed: u64) -> Result<Vec<Case>> {
    let base = ForwardSampler::new(&world.base)?;
    let alternate = ForwardSampler::new(&world.alternate)?;
    let evidence_ids = world.base.ids_with_role(Role::Evidence);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n)
        .map(|_| {
            let label = if rng.gen::<f64>() < world.epsilon {
                Component::Alternate
            } else {
                Component::Base
            };
            let state = match label {
                Component::Base => base.sample(&mut rng),
                Component::Alternate => alternate.sample(&mut rng),
            };
            Case {
                label,
                findings: findings_of(&world.base, &evidence_ids, &state),
            }
        })
        .collect())
}

/// Scores each distinct finding set once, in parallel.
fn score_distinct<'e>(
    scorer: &ConflictScorer<'_>,
    findings: impl Iterator<Item = &'e Evidence>,
) -> Result<HashMap<Evidence, ConflictReport>> {
    let mut distinct: Vec<&Evidence> = findings.collect();
    distinct.sort_by(|a, b| a.iter().cmp(b.iter()));
    distinct.dedup();
    distinct
        .into_par_iter()
        .map(|e| scorer.score(e).map(|r| (e.clone(), r)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct KindRates {
    pub kind: StrawKind,
    /// Fraction of alternate-generated cases flagged; `None` without such cases.
    pub detection_rate: Option<f64>,
    /// Fraction of base-generated cases flagged; `None` without such cases.
    pub false_alarm_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub n_cases: usize,
    pub n_alternate: usize,
    pub seed: u64,
    pub rates: Vec<KindRates>,
}

impl ExperimentResult {
    pub fn rates_for(&self, kind: StrawKind) -> Option<&KindRates> {
        self.rates.iter().find(|r| r.kind == kind)
    }

    /// Tab-separated table, one row per straw kind; absent rates print `NA`.
    pub fn to_table(&self) -> String {
        let rate = |r: Option<f64>| r.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"));
        let mut out = String::from("kind\tn\tdetection_rate\tfalse_alarm_rate\tseed\n");
        for r in &self.rates {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                r.kind,
                self.n_cases,
                rate(r.detection_rate),
                rate(r.false_alarm_rate),
                self.seed
            );
        }
        out
    }
}

/// Detection-rate comparison of straw kinds on a generated mixture world.
#[derive(Debug, Clone)]
pub struct DetectionExperiment {
    pub spec: NetSpec,
    pub strength: f64,
    pub epsilon: f64,
    pub n_cases: usize,
    pub seed: u64,
    /// A case is flagged when `c_s > threshold`.
    pub threshold: f64,
    /// Roles whose CPT rows the alternate model perturbs.
    pub perturb_roles: Vec<Role>,
    pub kinds: Vec<StrawKind>,
}

impl DetectionExperiment {
    pub fn new(spec: NetSpec, strength: f64, epsilon: f64, n_cases: usize, seed: u64) -> Self {
        DetectionExperiment {
            spec,
            strength,
            epsilon,
            n_cases,
            seed,
            threshold: 0.0,
            perturb_roles: vec![Role::Target, Role::Evidence, Role::Other],
            kinds: StrawKind::ALL.to_vec(),
        }
    }

    pub fn run(&self) -> Result<ExperimentResult> {
        let base = generate_diagnostic_network(&self.spec)?;
        let alternate = perturb_roles(&base, self.strength, derive_seed(self.seed, 1), &self.perturb_roles)?;
        let world = MixtureWorld::new(base, alternate, self.epsilon)?;
        let cases = sample_cases(&world, self.n_cases, derive_seed(self.seed, 2))?;
        let scorer = ConflictScorer::new(world.base(), &self.kinds)?.with_threshold(self.threshold);
        let reports = score_distinct(&scorer, cases.iter().map(|c| &c.findings))?;

        let n_alternate = cases.iter().filter(|c| c.label == Component::Alternate).count();
        let n_base = cases.len() - n_alternate;
        let rates = scorer
            .straws()
            .iter()
            .map(|straw| {
                let (mut hit_alt, mut hit_base) = (0usize, 0usize);
                for case in &cases {
                    let flagged = reports[&case.findings]
                        .score(straw.kind)
                        .is_some_and(|s| s.verdict == Verdict::Conflict);
                    match (flagged, case.label) {
                        (true, Component::Alternate) => hit_alt += 1,
                        (true, Component::Base) => hit_base += 1,
                        _ => {}
                    }
                }
                let frac = |hits: usize, n: usize| (n > 0).then(|| hits as f64 / n as f64);
                KindRates {
                    kind: straw.kind,
                    detection_rate: frac(hit_alt, n_alternate),
                    false_alarm_rate: frac(hit_base, n_base),
                }
            })
            .collect();
        Ok(ExperimentResult {
            n_cases: cases.len(),
            n_alternate,
            seed: self.seed,
            rates,
        })
    }
}

/// Runs [`DetectionExperiment`] with its defaults (threshold 0, every role
/// perturbed, both straw kinds).
pub fn run_detection_experiment(
    spec: &NetSpec,
    strength: f64,
    epsilon: f64,
    n: usize,
    seed: u64,
) -> Result<ExperimentResult> {
    DetectionExperiment::new(*spec, strength, epsilon, n, seed).run()
}

/// Empirical `P_given(c_s > k)` for one threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exceedance {
    pub k: f64,
    pub n: usize,
    pub fraction: f64,
}

impl Exceedance {
    /// The theoretical bound `2^-k`.
    pub fn bound(&self) -> f64 {
        2f64.powf(-self.k).min(1.0)
    }

    /// Three binomial standard deviations at the bound.
    pub fn slack(&self) -> f64 {
        let b = self.bound();
        3.0 * (b * (1.0 - b) / self.n.max(1) as f64).sqrt()
    }

    pub fn within_bound(&self) -> bool {
        self.fraction <= self.bound() + self.slack()
    }
}

/// Samples `n` full evidence configurations from `net` and reports, for
/// each `k`, the fraction whose conflict index against the `kind` straw
/// model exceeds `k`.
pub fn surprise_bound_check(
    net: &Network,
    kind: StrawKind,
    ks: &[f64],
    n: usize,
    seed: u64,
) -> Result<Vec<Exceedance>> {
    let scorer = ConflictScorer::new(net, &[kind])?;
    let evidence_ids = net.ids_with_role(Role::Evidence);
    if evidence_ids.is_empty() {
        return Err(Error::NoEvidence);
    }
    let sampler = ForwardSampler::new(net)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
    for _ in 0..n {
        let state = sampler.sample(&mut rng);
        let key = evidence_ids.iter().map(|&v| state[v]).collect();
        *counts.entry(key).or_default() += 1;
    }
    let keyed: Vec<(Evidence, usize)> = counts
        .into_iter()
        .map(|(key, c)| {
            let mut full = vec![0; net.len()];
            for (&v, s) in evidence_ids.iter().zip(key) {
                full[v] = s;
            }
            (findings_of(net, &evidence_ids, &full), c)
        })
        .collect();
    let reports = score_distinct(&scorer, keyed.iter().map(|(e, _)| e))?;
    Ok(ks
        .iter()
        .map(|&k| {
            let exceed: usize = keyed
                .iter()
                .filter(|(e, _)| {
                    reports[e]
                        .score(kind)
                        .and_then(|s| s.index)
                        .is_some_and(|c| c > k)
                })
                .map(|(_, c)| c)
                .sum();
            Exceedance {
                k,
                n,
                fraction: if n == 0 { 0.0 } else { exceed as f64 / n as f64 },
            }
        })
        .collect())
}
