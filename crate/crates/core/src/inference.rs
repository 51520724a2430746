//! Exact inference by variable elimination, plus a brute-force enumeration
//! oracle used to cross-check it.
//!
//! All routines expect a network that passes
//! [`validate_network`](crate::network::validate_network).

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::evidence::Evidence;
use crate::factor::Factor;
use crate::network::{row_index, Network};

/// Default limit on the joint state space [`brute_force_joint`] will enumerate.
pub const BRUTE_FORCE_CAP: u128 = 1 << 22;

fn moral_graph(net: &Network) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); net.len()];
    for cpt in net.cpts() {
        let mut family = cpt.parents.clone();
        family.push(cpt.child);
        for (i, &a) in family.iter().enumerate() {
            for &b in &family[i + 1..] {
                if a != b {
                    adj[a].insert(b);
                    adj[b].insert(a);
                }
            }
        }
    }
    adj
}

/// Greedy min-fill ordering of every variable not in `keep`.
///
/// Ties go to the variable declared first, so the order is deterministic.
pub fn elimination_order(net: &Network, keep: &[usize]) -> Vec<usize> {
    let mut adj = moral_graph(net);
    let mut remaining: BTreeSet<usize> = (0..net.len()).filter(|v| !keep.contains(v)).collect();
    let mut order = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let mut best: Option<(usize, usize)> = None;
        for &v in &remaining {
            let nbrs: Vec<usize> = adj[v].iter().copied().collect();
            let mut fill = 0;
            for (i, &a) in nbrs.iter().enumerate() {
                for &b in &nbrs[i + 1..] {
                    if !adj[a].contains(&b) {
                        fill += 1;
                    }
                }
            }
            if best.is_none_or(|(_, f)| fill < f) {
                best = Some((v, fill));
            }
        }
        let (v, _) = best.expect("remaining is nonempty");
        let nbrs: Vec<usize> = adj[v].iter().copied().collect();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        for &a in &nbrs {
            adj[a].remove(&v);
        }
        adj[v].clear();
        remaining.remove(&v);
        order.push(v);
    }
    order
}

/// Evidence-reduced CPT factors. Observed variables listed in `keep` are
/// handled with an indicator factor so they stay in scope.
fn initial_factors(net: &Network, keep: &[usize], observed: &[(usize, usize)]) -> Result<Vec<Factor>> {
    let mut factors = Vec::with_capacity(net.len() + observed.len());
    for id in 0..net.len() {
        let mut f = Factor::from_cpt(net, id);
        for &(v, s) in observed {
            if !keep.contains(&v) && f.contains(v) {
                f = f.reduce(v, s)?;
            }
        }
        factors.push(f);
    }
    for &(v, s) in observed {
        if keep.contains(&v) {
            let card = net.variable(v).cardinality();
            let mut ind = vec![0.0; card];
            ind[s] = 1.0;
            factors.push(Factor::new(vec![v], vec![card], ind)?);
        }
    }
    Ok(factors)
}

fn eliminate(mut factors: Vec<Factor>, order: &[usize]) -> Result<Factor> {
    for &v in order {
        let (with, without): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.contains(v));
        factors = without;
        if with.is_empty() {
            continue;
        }
        let mut prod = with[0].clone();
        for f in &with[1..] {
            prod = prod.product(f)?;
        }
        factors.push(prod.marginalize(v)?);
    }
    let mut result = Factor::scalar(1.0);
    for f in &factors {
        result = result.product(f)?;
    }
    Ok(result)
}

/// Unnormalized `P(keep, e)` as a factor whose scope is `keep`, in order.
pub fn joint_marginal(net: &Network, keep: &[usize], e: &Evidence) -> Result<Factor> {
    let observed = e.resolve(net)?;
    let mut fixed: Vec<usize> = keep.to_vec();
    fixed.extend(observed.iter().map(|&(v, _)| v));
    let order = elimination_order(net, &fixed);
    joint_marginal_inner(net, keep, &observed, &order)
}

/// [`joint_marginal`] with a caller-supplied elimination order. The order
/// must mention every variable that is neither kept nor observed.
pub fn joint_marginal_with_order(
    net: &Network,
    keep: &[usize],
    e: &Evidence,
    order: &[usize],
) -> Result<Factor> {
    let observed = e.resolve(net)?;
    for v in 0..net.len() {
        let needed = !keep.contains(&v) && !observed.iter().any(|&(o, _)| o == v);
        if needed && !order.contains(&v) {
            return Err(Error::InvalidParameter(format!(
                "elimination order omits variable \"{}\"",
                net.variable(v).name
            )));
        }
    }
    let order: Vec<usize> = order.iter().copied().filter(|v| !keep.contains(v)).collect();
    joint_marginal_inner(net, keep, &observed, &order)
}

fn joint_marginal_inner(
    net: &Network,
    keep: &[usize],
    observed: &[(usize, usize)],
    order: &[usize],
) -> Result<Factor> {
    for (i, &k) in keep.iter().enumerate() {
        if k >= net.len() {
            return Err(Error::UnknownVariable(format!("#{k}")));
        }
        if keep[..i].contains(&k) {
            return Err(Error::InvalidParameter(format!(
                "variable \"{}\" kept twice",
                net.variable(k).name
            )));
        }
    }
    let factors = initial_factors(net, keep, observed)?;
    eliminate(factors, order)?.reorder(keep)
}

/// Exact `P(e)`; the empty evidence has probability one.
pub fn prob_of_evidence(net: &Network, e: &Evidence) -> Result<f64> {
    Ok(joint_marginal(net, &[], e)?.values()[0])
}

/// `P(e)` computed with a specific elimination order.
pub fn prob_of_evidence_with_order(net: &Network, e: &Evidence, order: &[usize]) -> Result<f64> {
    Ok(joint_marginal_with_order(net, &[], e, order)?.values()[0])
}

/// `P(var | e)` over the states of `var`.
pub fn posterior_marginal(net: &Network, var: usize, e: &Evidence) -> Result<Vec<f64>> {
    let jm = joint_marginal(net, &[var], e)?;
    jm.normalized()
        .map(|f| f.values().to_vec())
        .ok_or(Error::ImpossibleEvidence)
}

/// Same as [`posterior_marginal`], addressing the variable by name.
pub fn posterior_marginal_by_name(net: &Network, var: &str, e: &Evidence) -> Result<Vec<f64>> {
    posterior_marginal(net, net.find_or_err(var)?, e)
}

/// `P(e)` by summing the chain-rule product over every joint configuration
/// consistent with `e`. Refuses state spaces larger than `cap`.
pub fn brute_force_joint(net: &Network, e: &Evidence, cap: u128) -> Result<f64> {
    let cards = net.cardinalities();
    let size: u128 = cards.iter().map(|&c| c as u128).product();
    if size > cap {
        return Err(Error::StateSpaceTooLarge { size, cap });
    }
    let mut state = vec![0usize; net.len()];
    let mut fixed = vec![false; net.len()];
    for (v, s) in e.resolve(net)? {
        state[v] = s;
        fixed[v] = true;
    }
    let free: Vec<usize> = (0..net.len()).filter(|&v| !fixed[v]).collect();
    let families: Vec<(Vec<usize>, Vec<usize>)> = (0..net.len())
        .map(|v| {
            let ps = net.parents(v).to_vec();
            let pc = ps.iter().map(|&p| cards[p]).collect();
            (ps, pc)
        })
        .collect();

    let mut total = 0.0;
    loop {
        let mut p = 1.0;
        for v in 0..net.len() {
            let (ps, pc) = &families[v];
            let cfg: Vec<usize> = ps.iter().map(|&q| state[q]).collect();
            p *= net.cpt(v).rows[row_index(pc, &cfg)][state[v]];
            if p == 0.0 {
                break;
            }
        }
        total += p;

        // Odometer over the free variables, last one fastest.
        let mut carry = true;
        for &v in free.iter().rev() {
            state[v] += 1;
            if state[v] < cards[v] {
                carry = false;
                break;
            }
            state[v] = 0;
        }
        if carry {
            break;
        }
    }
    Ok(total)
}
