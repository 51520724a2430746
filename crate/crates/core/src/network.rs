//! Annotated discrete Bayesian networks.
//!
//! A [`Network`] is a DAG of discrete [`Variable`]s, each tagged with a
//! diagnostic [`Role`] and carrying one [`Cpt`]. CPT rows are laid out
//! row-major over the parent configurations with the first listed parent
//! varying slowest: for parents `(Gender[male,female], Age[below30,above30])`
//! the rows are `(male,below30), (male,above30), (female,below30),
//! (female,above30)`.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest tolerated deviation of a CPT row sum from one.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    /// Variables whose posterior is wanted (diseases).
    Target,
    /// Variables that receive findings (symptoms, test results).
    Evidence,
    /// Everything else (setting factors, mediating states).
    Other,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Target => "target",
            Role::Evidence => "evidence",
            Role::Other => "other",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "target" => Ok(Role::Target),
            "evidence" => Ok(Role::Evidence),
            "other" => Ok(Role::Other),
            _ => Err(format!(
                "unknown role \"{s}\" (expected target, evidence or other)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub states: Vec<String>,
    pub role: Role,
}

impl Variable {
    pub fn new<S: Into<String>>(name: impl Into<String>, states: Vec<S>, role: Role) -> Self {
        Variable {
            name: name.into(),
            states: states.into_iter().map(Into::into).collect(),
            role,
        }
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }
}

/// Conditional probability table of `child` given `parents`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    pub child: usize,
    pub parents: Vec<usize>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    name: String,
    variables: Vec<Variable>,
    cpts: Vec<Cpt>,
}

impl Network {
    /// Assembles a network without checking any invariant.
    ///
    /// Use [`validate_network`] (or [`NetworkBuilder`]) before running
    /// inference on the result.
    pub fn from_parts(name: impl Into<String>, variables: Vec<Variable>, cpts: Vec<Cpt>) -> Self {
        Network {
            name: name.into(),
            variables,
            cpts,
        }
    }

    pub fn builder(name: impl Into<String>) -> NetworkBuilder {
        NetworkBuilder::new(name)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: usize) -> &Variable {
        &self.variables[id]
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    /// CPT whose child is `id`.
    ///
    /// # Panics
    /// If the network has no such CPT; validated networks always do.
    pub fn cpt(&self, id: usize) -> &Cpt {
        if let Some(c) = self.cpts.get(id).filter(|c| c.child == id) {
            return c;
        }
        self.cpts
            .iter()
            .find(|c| c.child == id)
            .unwrap_or_else(|| panic!("no CPT for variable #{id}"))
    }

    pub fn parents(&self, id: usize) -> &[usize] {
        &self.cpt(id).parents
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn find_or_err(&self, name: &str) -> Result<usize> {
        self.find(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn ids_with_role(&self, role: Role) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.variables[i].role == role)
            .collect()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.variables.iter().map(Variable::cardinality).collect()
    }

    /// Copy of the network with every CPT row divided by its sum.
    ///
    /// Rows summing to zero become uniform.
    pub fn renormalized(&self) -> Network {
        let mut out = self.clone();
        for cpt in &mut out.cpts {
            for row in &mut cpt.rows {
                normalize_row(row);
            }
        }
        out
    }

    /// Same name, variables and parents with all probabilities within `tol`.
    pub fn approx_eq(&self, other: &Network, tol: f64) -> bool {
        self.name == other.name
            && self.variables == other.variables
            && self.cpts.len() == other.cpts.len()
            && self.cpts.iter().zip(&other.cpts).all(|(a, b)| {
                a.child == b.child
                    && a.parents == b.parents
                    && a.rows.len() == b.rows.len()
                    && a.rows.iter().zip(&b.rows).all(|(ra, rb)| {
                        ra.len() == rb.len()
                            && ra.iter().zip(rb).all(|(x, y)| (x - y).abs() <= tol)
                    })
            })
    }
}

pub(crate) fn normalize_row(row: &mut [f64]) {
    let sum: f64 = row.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        row.iter_mut().for_each(|x| *x /= sum);
    } else {
        let u = 1.0 / row.len() as f64;
        row.iter_mut().for_each(|x| *x = u);
    }
}

/// Name-based network construction; parents may be declared after their
/// children.
#[derive(Debug, Clone)]
pub struct NetworkBuilder {
    name: String,
    variables: Vec<Variable>,
    cpts: Vec<(String, Vec<String>, Vec<Vec<f64>>)>,
}

impl NetworkBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        NetworkBuilder {
            name: name.into(),
            variables: Vec::new(),
            cpts: Vec::new(),
        }
    }

    pub fn variable(mut self, name: &str, states: &[&str], role: Role) -> Self {
        self.variables.push(Variable::new(name, states.to_vec(), role));
        self
    }

    pub fn cpt(mut self, child: &str, parents: &[&str], rows: Vec<Vec<f64>>) -> Self {
        self.cpts.push((
            child.to_string(),
            parents.iter().map(|p| p.to_string()).collect(),
            rows,
        ));
        self
    }

    /// Resolves names without checking the numeric or structural invariants.
    pub fn build_unvalidated(self) -> Result<Network> {
        let index: HashMap<&str, usize> = self
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.name.as_str(), i))
            .collect();
        let lookup = |n: &str| {
            index
                .get(n)
                .copied()
                .ok_or_else(|| Error::UnknownVariable(n.to_string()))
        };
        let mut cpts = Vec::with_capacity(self.cpts.len());
        for (child, parents, rows) in &self.cpts {
            let child = lookup(child)?;
            let parents = parents.iter().map(|p| lookup(p)).collect::<Result<Vec<_>>>()?;
            cpts.push(Cpt {
                child,
                parents,
                rows: rows.clone(),
            });
        }
        cpts.sort_by_key(|c| c.child);
        Ok(Network::from_parts(self.name, self.variables, cpts))
    }

    pub fn build(self) -> Result<Network> {
        let net = self.build_unvalidated()?;
        let report = validate_network(&net);
        if report.is_empty() {
            Ok(net)
        } else {
            Err(Error::Invalid(report))
        }
    }
}

/// One way in which a network fails to be well formed.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateVariable { variable: String },
    TooFewStates { variable: String, count: usize },
    DuplicateState { variable: String, state: String },
    MissingCpt { variable: String },
    DuplicateCpt { variable: String },
    UnknownChild { index: usize },
    DanglingParent { variable: String, parent: usize },
    Cycle { variables: Vec<String> },
    RowCount { variable: String, expected: usize, found: usize },
    RowLength { variable: String, row: usize, expected: usize, found: usize },
    BadEntry { variable: String, row: usize, column: usize, value: f64 },
    RowSum { variable: String, row: usize, sum: f64 },
}

impl Violation {
    /// Name of the variable at fault, if the violation concerns one.
    pub fn variable(&self) -> Option<&str> {
        use Violation::*;
        match self {
            DuplicateVariable { variable }
            | TooFewStates { variable, .. }
            | DuplicateState { variable, .. }
            | MissingCpt { variable }
            | DuplicateCpt { variable }
            | DanglingParent { variable, .. }
            | RowCount { variable, .. }
            | RowLength { variable, .. }
            | BadEntry { variable, .. }
            | RowSum { variable, .. } => Some(variable),
            Cycle { variables } => variables.first().map(String::as_str),
            UnknownChild { .. } => None,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            DuplicateVariable { variable } => write!(f, "variable \"{variable}\" is declared twice"),
            TooFewStates { variable, count } => {
                write!(f, "variable \"{variable}\" has {count} state(s), at least 2 required")
            }
            DuplicateState { variable, state } => {
                write!(f, "variable \"{variable}\" lists state \"{state}\" twice")
            }
            MissingCpt { variable } => write!(f, "variable \"{variable}\" has no CPT"),
            DuplicateCpt { variable } => write!(f, "variable \"{variable}\" has more than one CPT"),
            UnknownChild { index } => write!(f, "CPT refers to unknown child #{index}"),
            DanglingParent { variable, parent } => {
                write!(f, "variable \"{variable}\" refers to unknown parent #{parent}")
            }
            Cycle { variables } => write!(f, "cycle through {}", variables.join(" -> ")),
            RowCount { variable, expected, found } => write!(
                f,
                "CPT of \"{variable}\" has {found} rows, expected {expected}"
            ),
            RowLength { variable, row, expected, found } => write!(
                f,
                "CPT of \"{variable}\" row {row} has {found} entries, expected {expected}"
            ),
            BadEntry { variable, row, column, value } => write!(
                f,
                "CPT of \"{variable}\" row {row} entry {column} is {value}, outside [0, 1]"
            ),
            RowSum { variable, row, sum } => {
                write!(f, "CPT of \"{variable}\" row {row} sums to {sum}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Lists every structural and numeric defect of `net`.
pub fn validate_network(net: &Network) -> ValidationReport {
    let mut out = Vec::new();
    let n = net.variables.len();

    let mut seen = HashSet::new();
    for v in &net.variables {
        if !seen.insert(v.name.as_str()) {
            out.push(Violation::DuplicateVariable { variable: v.name.clone() });
        }
        if v.states.len() < 2 {
            out.push(Violation::TooFewStates {
                variable: v.name.clone(),
                count: v.states.len(),
            });
        }
        let mut states = HashSet::new();
        for s in &v.states {
            if !states.insert(s.as_str()) {
                out.push(Violation::DuplicateState {
                    variable: v.name.clone(),
                    state: s.clone(),
                });
            }
        }
    }

    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (ci, cpt) in net.cpts.iter().enumerate() {
        if cpt.child >= n {
            out.push(Violation::UnknownChild { index: cpt.child });
            continue;
        }
        if owner[cpt.child].is_some() {
            out.push(Violation::DuplicateCpt {
                variable: net.variables[cpt.child].name.clone(),
            });
        } else {
            owner[cpt.child] = Some(ci);
        }
    }
    for (i, o) in owner.iter().enumerate() {
        if o.is_none() {
            out.push(Violation::MissingCpt { variable: net.variables[i].name.clone() });
        }
    }

    let mut parents_ok = true;
    for cpt in net.cpts.iter().filter(|c| c.child < n) {
        let name = &net.variables[cpt.child].name;
        for &p in &cpt.parents {
            if p >= n {
                parents_ok = false;
                out.push(Violation::DanglingParent { variable: name.clone(), parent: p });
            }
        }
    }

    if parents_ok {
        let parents: Vec<Vec<usize>> = (0..n)
            .map(|i| owner[i].map(|c| net.cpts[c].parents.clone()).unwrap_or_default())
            .collect();
        if let Err(cycle) = kahn(&parents) {
            out.push(Violation::Cycle {
                variables: cycle.iter().map(|&i| net.variables[i].name.clone()).collect(),
            });
        }
    }

    for cpt in net.cpts.iter().filter(|c| c.child < n) {
        let child = &net.variables[cpt.child];
        if cpt.parents.iter().any(|&p| p >= n) {
            continue;
        }
        let expected_rows = cpt
            .parents
            .iter()
            .map(|&p| net.variables[p].states.len())
            .fold(1usize, usize::saturating_mul);
        if cpt.rows.len() != expected_rows {
            out.push(Violation::RowCount {
                variable: child.name.clone(),
                expected: expected_rows,
                found: cpt.rows.len(),
            });
        }
        for (r, row) in cpt.rows.iter().enumerate() {
            if row.len() != child.states.len() {
                out.push(Violation::RowLength {
                    variable: child.name.clone(),
                    row: r,
                    expected: child.states.len(),
                    found: row.len(),
                });
                continue;
            }
            let mut entries_ok = true;
            for (c, &x) in row.iter().enumerate() {
                if !(0.0..=1.0).contains(&x) {
                    entries_ok = false;
                    out.push(Violation::BadEntry {
                        variable: child.name.clone(),
                        row: r,
                        column: c,
                        value: x,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if entries_ok && (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                out.push(Violation::RowSum { variable: child.name.clone(), row: r, sum });
            }
        }
    }

    ValidationReport { violations: out }
}

/// Kahn's algorithm, always releasing the lowest ready index. On failure
/// returns the variables left on or behind a cycle.
fn kahn(parents: &[Vec<usize>]) -> std::result::Result<Vec<usize>, Vec<usize>> {
    let n = parents.len();
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (c, ps) in parents.iter().enumerate() {
        for &p in ps {
            children[p].push(c);
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).filter(|&i| indegree[i] > 0).collect())
    }
}

/// Variable ids with every parent before its children; ties go to the
/// variable declared first.
pub fn topological_order(net: &Network) -> Result<Vec<usize>> {
    let n = net.len();
    let mut parents = vec![Vec::new(); n];
    for cpt in &net.cpts {
        if cpt.child < n {
            parents[cpt.child] = cpt.parents.iter().copied().filter(|&p| p < n).collect();
        }
    }
    kahn(&parents).map_err(|cycle| {
        Error::Cycle(cycle.iter().map(|&i| net.variables[i].name.clone()).collect())
    })
}

/// Row of a CPT selected by naming one state per parent.
pub fn cpt_row_index(parents: &[&Variable], config: &[&str]) -> Result<usize> {
    if parents.len() != config.len() {
        return Err(Error::InvalidParameter(format!(
            "{} parent states given for {} parents",
            config.len(),
            parents.len()
        )));
    }
    let mut index = 0;
    for (var, state) in parents.iter().zip(config) {
        let s = var.state_index(state).ok_or_else(|| Error::UnknownState {
            variable: var.name.clone(),
            state: state.to_string(),
        })?;
        index = index * var.cardinality() + s;
    }
    Ok(index)
}

/// Row-major index of `states` over dimensions `cards`, first slowest.
pub fn row_index(cards: &[usize], states: &[usize]) -> usize {
    debug_assert_eq!(cards.len(), states.len());
    cards
        .iter()
        .zip(states)
        .fold(0, |acc, (&card, &s)| acc * card + s)
}

/// Inverse of [`row_index`].
pub fn row_config(cards: &[usize], mut index: usize) -> Vec<usize> {
    let mut out = vec![0; cards.len()];
    for (slot, &card) in out.iter_mut().zip(cards).rev() {
        *slot = index % card;
        index /= card;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Network {
        Network::builder("chain")
            .variable("A", &["a0", "a1"], Role::Other)
            .variable("B", &["b0", "b1"], Role::Target)
            .variable("C", &["c0", "c1"], Role::Evidence)
            .cpt("C", &["B"], vec![vec![0.9, 0.1], vec![0.3, 0.7]])
            .cpt("A", &[], vec![vec![0.4, 0.6]])
            .cpt("B", &["A"], vec![vec![0.5, 0.5], vec![0.2, 0.8]])
            .build()
            .unwrap()
    }

    #[test]
    fn chain_topological_order() {
        assert_eq!(topological_order(&chain()).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn single_node_order() {
        let net = Network::builder("one")
            .variable("X", &["x", "y"], Role::Target)
            .cpt("X", &[], vec![vec![0.5, 0.5]])
            .build()
            .unwrap();
        assert_eq!(topological_order(&net).unwrap(), vec![0]);
    }

    #[test]
    fn ties_follow_declaration_order() {
        // C is declared first but depends on B.
        let net = Network::builder("t")
            .variable("C", &["0", "1"], Role::Evidence)
            .variable("A", &["0", "1"], Role::Other)
            .variable("B", &["0", "1"], Role::Target)
            .cpt("C", &["B"], vec![vec![0.5, 0.5], vec![0.5, 0.5]])
            .cpt("A", &[], vec![vec![0.5, 0.5]])
            .cpt("B", &[], vec![vec![0.5, 0.5]])
            .build()
            .unwrap();
        assert_eq!(topological_order(&net).unwrap(), vec![1, 2, 0]);
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let net = Network::builder("loop")
            .variable("A", &["0", "1"], Role::Other)
            .cpt("A", &["A"], vec![vec![0.5, 0.5], vec![0.5, 0.5]])
            .build_unvalidated()
            .unwrap();
        let report = validate_network(&net);
        assert!(matches!(report.violations[..], [Violation::Cycle { .. }]));
        assert!(matches!(topological_order(&net), Err(Error::Cycle(_))));
    }

    #[test]
    fn bad_row_sum_is_reported() {
        let net = Network::builder("bad")
            .variable("A", &["0", "1"], Role::Other)
            .cpt("A", &[], vec![vec![0.5, 0.6]])
            .build_unvalidated()
            .unwrap();
        let report = validate_network(&net);
        match &report.violations[..] {
            [Violation::RowSum { variable, row: 0, sum }] => {
                assert_eq!(variable, "A");
                assert!((sum - 1.1).abs() < 1e-12);
            }
            other => panic!("unexpected report {other:?}"),
        }
    }

    #[test]
    fn dimension_and_reference_defects() {
        let vars = vec![
            Variable::new("A", vec!["0", "1"], Role::Other),
            Variable::new("B", vec!["0", "0"], Role::Target),
        ];
        let cpts = vec![
            Cpt { child: 0, parents: vec![7], rows: vec![vec![0.5, 0.5]] },
            Cpt { child: 1, parents: vec![0], rows: vec![vec![1.0, 0.0]] },
        ];
        let report = validate_network(&Network::from_parts("x", vars, cpts));
        let has = |f: fn(&Violation) -> bool| report.violations.iter().any(f);
        assert!(has(|v| matches!(v, Violation::DanglingParent { parent: 7, .. })));
        assert!(has(|v| matches!(v, Violation::DuplicateState { .. })));
        assert!(has(|v| matches!(v, Violation::RowCount { expected: 2, found: 1, .. })));
    }

    #[test]
    fn missing_cpt_and_builder_errors() {
        let net = Network::builder("m")
            .variable("A", &["0", "1"], Role::Other)
            .build_unvalidated()
            .unwrap();
        assert!(matches!(
            validate_network(&net).violations[..],
            [Violation::MissingCpt { .. }]
        ));
        let err = Network::builder("m")
            .variable("A", &["0", "1"], Role::Other)
            .cpt("A", &["Agee"], vec![])
            .build()
            .unwrap_err();
        assert!(err.to_string().contains("Agee"));
    }

    #[test]
    fn row_index_examples() {
        let gender = Variable::new("Gender", vec!["male", "female"], Role::Other);
        let age = Variable::new("Age", vec!["below30", "above30"], Role::Other);
        assert_eq!(cpt_row_index(&[&gender, &age], &["female", "above30"]).unwrap(), 3);
        assert_eq!(cpt_row_index(&[&gender, &age], &["male", "below30"]).unwrap(), 0);
        let three = Variable::new("T", vec!["a", "b", "c"], Role::Other);
        assert_eq!(cpt_row_index(&[&three], &["b"]).unwrap(), 1);
        assert!(matches!(
            cpt_row_index(&[&three], &["d"]),
            Err(Error::UnknownState { .. })
        ));
    }

    #[test]
    fn renormalize_fixes_row_sums() {
        let net = Network::builder("bad")
            .variable("A", &["0", "1"], Role::Other)
            .cpt("A", &[], vec![vec![0.5, 0.6]])
            .build_unvalidated()
            .unwrap()
            .renormalized();
        assert!(validate_network(&net).is_empty());
    }

    proptest::proptest! {
        #[test]
        fn row_index_is_a_bijection(cards in proptest::collection::vec(1usize..5, 0..5)) {
            let rows: usize = cards.iter().product();
            let mut hit = vec![false; rows];
            for i in 0..rows {
                let cfg = row_config(&cards, i);
                proptest::prop_assert!(cfg.iter().zip(&cards).all(|(s, c)| s < c));
                let j = row_index(&cards, &cfg);
                proptest::prop_assert_eq!(i, j);
                hit[j] = true;
            }
            proptest::prop_assert!(hit.into_iter().all(|h| h));
        }
    }
}
