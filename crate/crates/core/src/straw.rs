//! Straw models and conflict indices.
//!
//! A straw model is a deliberately crude alternative to the given network.
//! Findings that the straw model explains better than the given model get a
//! positive conflict index `log2(P_straw(e) / P_given(e))`, which flags
//! evidence the given model may not have been built to handle.
//!
//! Two constructions are provided:
//!
//! * **bipartite**: keep only Target and Evidence variables, make every
//!   target a root with its given-model marginal, and make every evidence
//!   variable a child of all targets with rows `P_given(A | targets = t)`;
//! * **independent**: keep every variable with no edges, each with its
//!   given-model marginal. Its index is the negated classic `conf` measure.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evidence::Evidence;
use crate::inference::{joint_marginal, posterior_marginal, prob_of_evidence};
use crate::network::{row_config, validate_network, Cpt, Network, Role, Variable};

/// Default limit on the number of joint target configurations.
pub const TARGET_CAP: u128 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrawKind {
    Bipartite,
    Independent,
}

impl StrawKind {
    pub const ALL: [StrawKind; 2] = [StrawKind::Bipartite, StrawKind::Independent];

    pub fn as_str(self) -> &'static str {
        match self {
            StrawKind::Bipartite => "bipartite",
            StrawKind::Independent => "independent",
        }
    }
}

impl fmt::Display for StrawKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrawKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bipartite" => Ok(StrawKind::Bipartite),
            "independent" => Ok(StrawKind::Independent),
            other => Err(format!(
                "unknown straw kind \"{other}\" (expected bipartite or independent)"
            )),
        }
    }
}

/// A built straw network together with construction warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct Straw {
    pub kind: StrawKind,
    pub network: Network,
    pub warnings: Vec<String>,
}

pub fn build_straw(net: &Network, kind: StrawKind) -> Result<Straw> {
    match kind {
        StrawKind::Bipartite => build_bipartite_straw(net),
        StrawKind::Independent => build_independent_straw(net).map(|network| Straw {
            kind,
            network,
            warnings: Vec::new(),
        }),
    }
}

pub fn build_bipartite_straw(net: &Network) -> Result<Straw> {
    build_bipartite_straw_with_cap(net, TARGET_CAP)
}

/// Builds the bipartite straw model, refusing more than `cap` joint target
/// configurations.
///
/// Rows for target configurations of probability zero are undefined in the
/// given model; they are filled uniformly and reported in `warnings`.
pub fn build_bipartite_straw_with_cap(net: &Network, cap: u128) -> Result<Straw> {
    let targets = net.ids_with_role(Role::Target);
    let evidence = net.ids_with_role(Role::Evidence);
    if targets.is_empty() {
        return Err(Error::NoTargets);
    }
    if evidence.is_empty() {
        return Err(Error::NoEvidence);
    }
    let target_cards: Vec<usize> = targets.iter().map(|&t| net.variable(t).cardinality()).collect();
    let configs: u128 = target_cards.iter().map(|&c| c as u128).product();
    if configs > cap {
        return Err(Error::TargetCapExceeded { configs, cap });
    }
    let configs = configs as usize;

    let mut variables = Vec::with_capacity(targets.len() + evidence.len());
    let mut cpts = Vec::with_capacity(targets.len() + evidence.len());
    let mut warnings = Vec::new();
    let empty = Evidence::new();

    for (new_id, &t) in targets.iter().enumerate() {
        variables.push(net.variable(t).clone());
        cpts.push(Cpt {
            child: new_id,
            parents: Vec::new(),
            rows: vec![posterior_marginal(net, t, &empty)?],
        });
    }

    let target_ids: Vec<usize> = (0..targets.len()).collect();
    for (k, &a) in evidence.iter().enumerate() {
        let var = net.variable(a);
        let card = var.cardinality();
        let mut keep = targets.clone();
        keep.push(a);
        // Joint P(targets, A): one block of `card` entries per target configuration.
        let joint = joint_marginal(net, &keep, &empty)?;
        let mut rows = Vec::with_capacity(configs);
        for (t, block) in joint.values().chunks(card).enumerate() {
            let mass: f64 = block.iter().sum();
            if mass > 0.0 {
                rows.push(block.iter().map(|x| x / mass).collect());
            } else {
                rows.push(vec![1.0 / card as f64; card]);
                // Zero target configurations are the same for every evidence variable.
                if k == 0 {
                    let cfg = row_config(&target_cards, t);
                    let names: Vec<String> = targets
                        .iter()
                        .zip(&cfg)
                        .map(|(&tv, &s)| {
                            let v = net.variable(tv);
                            format!("{}={}", v.name, v.states[s])
                        })
                        .collect();
                    warnings.push(format!(
                        "target configuration ({}) has probability zero; evidence rows use the uniform distribution",
                        names.join(", ")
                    ));
                }
            }
        }
        variables.push(var.clone());
        cpts.push(Cpt {
            child: targets.len() + k,
            parents: target_ids.clone(),
            rows,
        });
    }

    let network = Network::from_parts(format!("{}-bipartite-straw", net.name()), variables, cpts);
    debug_assert!(validate_network(&network).is_empty());
    Ok(Straw {
        kind: StrawKind::Bipartite,
        network,
        warnings,
    })
}

/// Same variables as `net`, no edges, each prior the given-model marginal.
pub fn build_independent_straw(net: &Network) -> Result<Network> {
    let empty = Evidence::new();
    let cpts = (0..net.len())
        .map(|v| {
            Ok(Cpt {
                child: v,
                parents: Vec::new(),
                rows: vec![posterior_marginal(net, v, &empty)?],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let variables: Vec<Variable> = net.variables().to_vec();
    Ok(Network::from_parts(
        format!("{}-independent-straw", net.name()),
        variables,
        cpts,
    ))
}

/// `log2(p_straw / p_given)`.
///
/// Infinite when exactly one probability is zero; [`Error::UndefinedIndex`]
/// when both are.
pub fn conflict_index(p_straw: f64, p_given: f64) -> Result<f64> {
    for p in [p_straw, p_given] {
        // Exact inference can overshoot 1 by a few ulps.
        if !(0.0..=1.0 + 1e-9).contains(&p) {
            return Err(Error::InvalidProbability(p));
        }
    }
    match (p_straw > 0.0, p_given > 0.0) {
        (false, false) => Err(Error::UndefinedIndex),
        (true, false) => Ok(f64::INFINITY),
        (false, true) => Ok(f64::NEG_INFINITY),
        (true, true) => Ok((p_straw / p_given).log2()),
    }
}

/// `log2(P(x) · … · P(y) / P(x, …, y))` from single-finding marginals of
/// the given model.
pub fn jensen_conf(net: &Network, e: &Evidence) -> Result<f64> {
    if e.is_empty() {
        return Err(Error::EmptyEvidence);
    }
    let mut product = 1.0;
    for (var, state) in e.iter() {
        let mut single = Evidence::new();
        single.insert(var, state);
        product *= prob_of_evidence(net, &single)?;
    }
    conflict_index(product, prob_of_evidence(net, e)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Conflict,
    NoConflict,
    Undefined,
}

/// Indices within this distance of the threshold count as equal to it, so
/// rounding noise in two exact computations of the same probability never
/// raises an alarm.
pub const VERDICT_TOLERANCE: f64 = 1e-9;

impl Verdict {
    /// Conflict iff the index is strictly above `threshold` (beyond
    /// [`VERDICT_TOLERANCE`]).
    pub fn from_index(index: Option<f64>, threshold: f64) -> Verdict {
        match index {
            None => Verdict::Undefined,
            Some(c) if c > threshold + VERDICT_TOLERANCE => Verdict::Conflict,
            Some(_) => Verdict::NoConflict,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Conflict => "conflict",
            Verdict::NoConflict => "no conflict",
            Verdict::Undefined => "undefined",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrawScore {
    pub kind: StrawKind,
    pub p_straw: f64,
    /// `None` when both probabilities are zero.
    pub index: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConflictReport {
    pub evidence: Evidence,
    pub p_given: f64,
    pub scores: Vec<StrawScore>,
}

impl ConflictReport {
    pub fn score(&self, kind: StrawKind) -> Option<&StrawScore> {
        self.scores.iter().find(|s| s.kind == kind)
    }
}

impl fmt::Display for ConflictReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "findings: {}", self.evidence)?;
        write!(f, "P_given(e) = {}", fmt_sig(self.p_given, 4))?;
        for s in &self.scores {
            let index = s.index.map_or_else(|| "undefined".to_string(), |c| fmt_sig(c, 4));
            write!(
                f,
                "\n{}: P_straw(e) = {}, c_s = {}, verdict = {}",
                s.kind,
                fmt_sig(s.p_straw, 4),
                index,
                s.verdict
            )?;
        }
        Ok(())
    }
}

/// Formats `x` with `digits` significant digits, without exponent notation.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Rounding may carry into a new leading digit (9.9996 -> 10.000).
    let rounded: f64 = s.parse().unwrap_or(x);
    if rounded != 0.0 && (rounded.abs().log10().floor() as i64) > magnitude && decimals > 0 {
        format!("{x:.prec$}", prec = decimals - 1)
    } else {
        s
    }
}

/// Given network with its straw models prebuilt, for scoring many cases.
#[derive(Debug, Clone)]
pub struct ConflictScorer<'a> {
    given: &'a Network,
    straws: Vec<Straw>,
    threshold: f64,
}

impl<'a> ConflictScorer<'a> {
    pub fn new(given: &'a Network, kinds: &[StrawKind]) -> Result<Self> {
        let mut unique: Vec<StrawKind> = kinds.to_vec();
        unique.sort();
        unique.dedup();
        if unique.is_empty() {
            return Err(Error::InvalidParameter("no straw kind requested".into()));
        }
        let straws = unique
            .into_iter()
            .map(|k| build_straw(given, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(ConflictScorer {
            given,
            straws,
            threshold: 0.0,
        })
    }

    /// Scores with `Conflict iff c_s > threshold` (default 0).
    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn straws(&self) -> &[Straw] {
        &self.straws
    }

    pub fn score(&self, e: &Evidence) -> Result<ConflictReport> {
        if e.is_empty() {
            return Err(Error::EmptyEvidence);
        }
        for (var, _) in e.iter() {
            let id = self.given.find_or_err(var)?;
            let role = self.given.variable(id).role;
            if role != Role::Evidence {
                return Err(Error::RoleMismatch {
                    variable: var.to_string(),
                    role: role.to_string(),
                });
            }
        }
        e.validate(self.given)?;
        let p_given = prob_of_evidence(self.given, e)?;
        let scores = self
            .straws
            .iter()
            .map(|straw| {
                let p_straw = prob_of_evidence(&straw.network, e)?;
                let index = match conflict_index(p_straw, p_given) {
                    Ok(c) => Some(c),
                    Err(Error::UndefinedIndex) => None,
                    Err(err) => return Err(err),
                };
                Ok(StrawScore {
                    kind: straw.kind,
                    p_straw,
                    index,
                    verdict: Verdict::from_index(index, self.threshold),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ConflictReport {
            evidence: e.clone(),
            p_given,
            scores,
        })
    }
}

/// Scores `e` against straw models of every requested kind.
///
/// Every finding must be on an Evidence-role variable.
pub fn conflict_report(net: &Network, e: &Evidence, kinds: &[StrawKind]) -> Result<ConflictReport> {
    ConflictScorer::new(net, kinds)?.score(e)
}
