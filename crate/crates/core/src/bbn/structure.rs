use crate::error::{Error, Result};
use crate::keypad::{Key, KeypadLayout};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSpec {
    pub name: String,
    pub cardinality: usize,
}

impl VariableSpec {
    pub fn new(name: impl Into<String>, cardinality: usize) -> Result<Self> {
        if cardinality < 2 {
            return Err(Error::validation(format!(
                "variable cardinality {cardinality} below 2"
            )));
        }
        Ok(VariableSpec {
            name: name.into(),
            cardinality,
        })
    }
}

/// Network variables for a layout and context length `n`:
/// `L{n} .. L1` (letter or space), `Key`, `State`.
pub fn letter_variables(layout: &KeypadLayout, n: usize) -> Vec<VariableSpec> {
    let radix = layout.alphabet().radix();
    (1..=n)
        .rev()
        .map(|i| VariableSpec {
            name: format!("L{i}"),
            cardinality: radix,
        })
        .chain([
            VariableSpec {
                name: "Key".into(),
                cardinality: Key::COUNT,
            },
            VariableSpec {
                name: "State".into(),
                cardinality: layout.max_group_size(),
            },
        ])
        .collect()
}

/// Parent sets of a DAG over indexed variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkStructure {
    parents: Vec<Vec<usize>>,
}

impl NetworkStructure {
    pub fn new(parents: Vec<Vec<usize>>) -> Result<Self> {
        let count = parents.len();
        for (i, ps) in parents.iter().enumerate() {
            for (a, &p) in ps.iter().enumerate() {
                if p >= count {
                    return Err(Error::validation(format!("parent {p} of {i} out of range")));
                }
                if p == i || ps[..a].contains(&p) {
                    return Err(Error::validation(format!("bad parent set for {i}: {ps:?}")));
                }
            }
        }
        let structure = NetworkStructure { parents };
        if structure.has_cycle() {
            return Err(Error::validation("structure contains a cycle"));
        }
        Ok(structure)
    }

    /// No arcs at all.
    pub fn empty(count: usize) -> Self {
        NetworkStructure {
            parents: vec![Vec::new(); count],
        }
    }

    /// Only the last variable (the query) has parents.
    pub fn state_family(count: usize, parents: &[usize]) -> Result<Self> {
        if count == 0 {
            return Err(Error::validation("no variables"));
        }
        let mut sets = vec![Vec::new(); count];
        sets[count - 1] = parents.to_vec();
        Self::new(sets)
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn parent_sets(&self) -> &[Vec<usize>] {
        &self.parents
    }

    fn has_cycle(&self) -> bool {
        // 0 = unvisited, 1 = on stack, 2 = done
        fn visit(v: usize, parents: &[Vec<usize>], mark: &mut [u8]) -> bool {
            match mark[v] {
                1 => return true,
                2 => return false,
                _ => {}
            }
            mark[v] = 1;
            if parents[v].iter().any(|&p| visit(p, parents, mark)) {
                return true;
            }
            mark[v] = 2;
            false
        }
        let mut mark = vec![0u8; self.parents.len()];
        (0..self.parents.len()).any(|v| visit(v, &self.parents, &mut mark))
    }
}
