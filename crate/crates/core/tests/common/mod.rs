#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strawnet::{Cpt, Evidence, Network, Role, Variable};

/// Random DAG over `n` binary variables, edges only from lower to higher
/// ids, at most three parents each. Roles cycle through target, evidence,
/// other.
pub fn random_binary_net(n: usize, seed: u64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let roles = [Role::Target, Role::Evidence, Role::Other];
    let variables = (0..n)
        .map(|i| Variable::new(format!("V{i}"), vec!["0", "1"], roles[i % 3]))
        .collect();
    let cpts = (0..n)
        .map(|child| {
            let mut parents: Vec<usize> = (0..child).filter(|_| rng.gen_bool(0.4)).collect();
            while parents.len() > 3 {
                parents.remove(rng.gen_range(0..parents.len()));
            }
            let rows = (0..1usize << parents.len())
                .map(|_| {
                    // Occasional deterministic rows exercise zeros.
                    let p: f64 = if rng.gen_bool(0.1) { 1.0 } else { rng.gen() };
                    vec![p, 1.0 - p]
                })
                .collect();
            Cpt { child, parents, rows }
        })
        .collect();
    Network::from_parts(format!("random-{seed}"), variables, cpts)
}

/// Random partial assignment: each variable observed with probability 1/3.
pub fn random_evidence(net: &Network, seed: u64) -> Evidence {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut e = Evidence::new();
    for v in net.variables() {
        if rng.gen_bool(1.0 / 3.0) {
            let s = rng.gen_range(0..v.states.len());
            e.insert(v.name.clone(), v.states[s].clone());
        }
    }
    e
}

/// Every assignment to every subset of `vars` (including the empty one).
pub fn all_evidence_sets(net: &Network, vars: &[usize]) -> Vec<Evidence> {
    let mut out = vec![Evidence::new()];
    for &v in vars {
        let var = net.variable(v);
        let mut next = Vec::with_capacity(out.len() * (var.states.len() + 1));
        for e in &out {
            next.push(e.clone());
            for s in &var.states {
                let mut e2 = e.clone();
                e2.insert(var.name.clone(), s.clone());
                next.push(e2);
            }
        }
        out = next;
    }
    out
}

pub fn cancer_findings(net: &Network, pairs: &[(&str, &str)]) -> Evidence {
    Evidence::from_pairs(net, pairs.iter().copied()).unwrap()
}
