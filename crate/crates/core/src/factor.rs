//! Nonnegative tables over sets of discrete variables.

use crate::error::{Error, Result};
use crate::network::{row_config, Network};

/// A table over `scope`, row-major with the first scope variable slowest
/// (the CPT convention, with the child as the last, fastest axis).
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    scope: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

fn strides(cards: &[usize]) -> Vec<usize> {
    let mut s = vec![1; cards.len()];
    for i in (0..cards.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * cards[i + 1];
    }
    s
}

impl Factor {
    pub fn new(scope: Vec<usize>, cards: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if scope.len() != cards.len() {
            return Err(Error::InvalidParameter(format!(
                "scope has {} variables but {} cardinalities",
                scope.len(),
                cards.len()
            )));
        }
        for (i, v) in scope.iter().enumerate() {
            if scope[..i].contains(v) {
                return Err(Error::InvalidParameter(format!(
                    "variable #{v} appears twice in a factor scope"
                )));
            }
        }
        let size: usize = cards.iter().product();
        if values.len() != size {
            return Err(Error::InvalidParameter(format!(
                "factor needs {size} values, got {}",
                values.len()
            )));
        }
        if let Some(&bad) = values.iter().find(|x| !x.is_finite() || x.is_sign_negative() && **x != 0.0) {
            return Err(Error::InvalidParameter(format!(
                "factor value {bad} is negative or not finite"
            )));
        }
        Ok(Factor { scope, cards, values })
    }

    pub fn scalar(value: f64) -> Self {
        Factor {
            scope: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    /// The CPT of `id` as a factor over `parents ++ [id]`.
    pub fn from_cpt(net: &Network, id: usize) -> Self {
        let cpt = net.cpt(id);
        let mut scope = cpt.parents.clone();
        scope.push(id);
        let cards = scope.iter().map(|&v| net.variable(v).cardinality()).collect();
        let values = cpt.rows.iter().flatten().copied().collect();
        Factor { scope, cards, values }
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn contains(&self, var: usize) -> bool {
        self.scope.contains(&var)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Value at a full configuration of the scope.
    pub fn value_at(&self, states: &[usize]) -> f64 {
        let idx = states
            .iter()
            .zip(&self.cards)
            .fold(0, |acc, (&s, &c)| acc * c + s);
        self.values[idx]
    }

    pub fn product(&self, other: &Factor) -> Result<Factor> {
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        for (&v, &c) in other.scope.iter().zip(&other.cards) {
            match self.scope.iter().position(|&x| x == v) {
                Some(i) if self.cards[i] != c => {
                    return Err(Error::ScopeMismatch {
                        variable: v,
                        left: self.cards[i],
                        right: c,
                    })
                }
                Some(_) => {}
                None => {
                    scope.push(v);
                    cards.push(c);
                }
            }
        }
        // Stride of each output axis inside each operand (0 when absent).
        let project = |f: &Factor| -> Vec<usize> {
            let s = strides(&f.cards);
            scope
                .iter()
                .map(|v| f.scope.iter().position(|x| x == v).map_or(0, |i| s[i]))
                .collect()
        };
        let (sa, sb) = (project(self), project(other));
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut counter = vec![0usize; scope.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..size {
            values.push(self.values[ia] * other.values[ib]);
            for axis in (0..scope.len()).rev() {
                counter[axis] += 1;
                ia += sa[axis];
                ib += sb[axis];
                if counter[axis] < cards[axis] {
                    break;
                }
                ia -= sa[axis] * cards[axis];
                ib -= sb[axis] * cards[axis];
                counter[axis] = 0;
            }
        }
        Ok(Factor { scope, cards, values })
    }

    /// Sums `var` out of the factor.
    pub fn marginalize(&self, var: usize) -> Result<Factor> {
        let axis = self.axis(var)?;
        let (scope, cards, out_strides) = self.without_axis(axis);
        let mut values = vec![0.0; cards.iter().product()];
        for (i, &x) in self.values.iter().enumerate() {
            values[self.project_index(i, axis, &out_strides)] += x;
        }
        Ok(Factor { scope, cards, values })
    }

    /// Slice of the factor at `var = state`, without renormalization.
    pub fn reduce(&self, var: usize, state: usize) -> Result<Factor> {
        let axis = self.axis(var)?;
        if state >= self.cards[axis] {
            return Err(Error::StateOutOfRange { variable: var, state });
        }
        let (scope, cards, out_strides) = self.without_axis(axis);
        let mut values = vec![0.0; cards.iter().product()];
        let in_strides = strides(&self.cards);
        for (i, &x) in self.values.iter().enumerate() {
            if (i / in_strides[axis]) % self.cards[axis] == state {
                values[self.project_index(i, axis, &out_strides)] = x;
            }
        }
        Ok(Factor { scope, cards, values })
    }

    /// Same table with axes rearranged into `order` (a permutation of the scope).
    pub fn reorder(&self, order: &[usize]) -> Result<Factor> {
        if order.len() != self.scope.len() {
            return Err(Error::InvalidParameter(
                "reorder needs a permutation of the scope".into(),
            ));
        }
        let axes = order.iter().map(|&v| self.axis(v)).collect::<Result<Vec<_>>>()?;
        let cards: Vec<usize> = axes.iter().map(|&a| self.cards[a]).collect();
        let in_strides = strides(&self.cards);
        let size = self.values.len();
        let values = (0..size)
            .map(|i| {
                let cfg = row_config(&cards, i);
                let src: usize = cfg.iter().zip(&axes).map(|(s, &a)| s * in_strides[a]).sum();
                self.values[src]
            })
            .collect();
        Factor::new(order.to_vec(), cards, values)
    }

    /// Scales the values to sum to one; `None` if they sum to zero.
    pub fn normalized(&self) -> Option<Factor> {
        let total = self.sum();
        (total > 0.0).then(|| Factor {
            scope: self.scope.clone(),
            cards: self.cards.clone(),
            values: self.values.iter().map(|x| x / total).collect(),
        })
    }

    fn axis(&self, var: usize) -> Result<usize> {
        self.scope
            .iter()
            .position(|&v| v == var)
            .ok_or(Error::NotInScope(var))
    }

    fn without_axis(&self, axis: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(axis);
        cards.remove(axis);
        let s = strides(&cards);
        (scope, cards, s)
    }

    fn project_index(&self, i: usize, axis: usize, out_strides: &[usize]) -> usize {
        let cfg = row_config(&self.cards, i);
        cfg.iter()
            .enumerate()
            .filter(|&(a, _)| a != axis)
            .zip(out_strides)
            .map(|((_, s), stride)| s * stride)
            .sum()
    }
}
