//! Column layout of the delivery MILP.
//!
//! Columns come in `N x N` blocks, one per (family, owner) pair. Within a
//! block the source site varies fastest, so the column of edge `(from, to)`
//! is `to * N + from`. Blocks are ordered: x for every quadcopter, q for
//! every item, z for every quadcopter, t for every quadcopter. The makespan
//! column T comes last.

use std::fmt;

use crate::instance::PdpInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Edge traversal indicator, per quadcopter.
    X,
    /// Item quantity on an edge, per item.
    Q,
    /// Battery reserve after an edge, per quadcopter.
    Z,
    /// Remaining-leg counter after an edge, per quadcopter.
    T,
}

impl Family {
    pub fn symbol(self) -> char {
        match self {
            Family::X => 'x',
            Family::Q => 'q',
            Family::Z => 'z',
            Family::T => 't',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKey {
    Edge {
        family: Family,
        owner: usize,
        from: usize,
        to: usize,
    },
    Makespan,
}

impl fmt::Display for VarKey {
    /// One-based owner and site numbers, e.g. `x^1_(2,1)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VarKey::Edge {
                family,
                owner,
                from,
                to,
            } => write!(f, "{}^{}_({},{})", family.symbol(), owner + 1, from + 1, to + 1),
            VarKey::Makespan => f.write_str("T"),
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LayoutError {
    #[error("no such variable: {0:?}")]
    UnknownVariable(VarKey),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VariableLayout {
    quads: usize,
    items: usize,
    nodes: usize,
}

impl VariableLayout {
    pub fn new(quads: usize, items: usize, nodes: usize) -> Self {
        Self { quads, items, nodes }
    }

    pub fn for_instance(inst: &PdpInstance) -> Self {
        Self::new(inst.quadcopters.len(), inst.items.len(), inst.node_count())
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    fn block_len(&self) -> usize {
        self.nodes * self.nodes
    }

    fn owners(&self, family: Family) -> usize {
        match family {
            Family::Q => self.items,
            _ => self.quads,
        }
    }

    fn first_block(&self, family: Family) -> usize {
        match family {
            Family::X => 0,
            Family::Q => self.quads,
            Family::Z => self.quads + self.items,
            Family::T => 2 * self.quads + self.items,
        }
    }

    /// (3|H| + |S|)·|N|² + 1
    pub fn total_columns(&self) -> usize {
        (3 * self.quads + self.items) * self.block_len() + 1
    }

    pub fn makespan_column(&self) -> usize {
        self.total_columns() - 1
    }

    pub fn index(&self, key: VarKey) -> Result<usize, LayoutError> {
        match key {
            VarKey::Makespan => Ok(self.makespan_column()),
            VarKey::Edge {
                family,
                owner,
                from,
                to,
            } => {
                if owner >= self.owners(family) || from >= self.nodes || to >= self.nodes {
                    return Err(LayoutError::UnknownVariable(key));
                }
                Ok((self.first_block(family) + owner) * self.block_len() + to * self.nodes + from)
            }
        }
    }

    /// Shorthand for edge families; panics on keys outside the layout.
    pub fn col(&self, family: Family, owner: usize, from: usize, to: usize) -> usize {
        self.index(VarKey::Edge {
            family,
            owner,
            from,
            to,
        })
        .expect("variable inside layout")
    }

    /// Inverse of [`VariableLayout::index`].
    pub fn key(&self, column: usize) -> Option<VarKey> {
        if column == self.makespan_column() {
            return Some(VarKey::Makespan);
        }
        if column > self.makespan_column() {
            return None;
        }
        let block = column / self.block_len();
        let within = column % self.block_len();
        let (family, owner) = if block < self.quads {
            (Family::X, block)
        } else if block < self.quads + self.items {
            (Family::Q, block - self.quads)
        } else if block < 2 * self.quads + self.items {
            (Family::Z, block - self.quads - self.items)
        } else {
            (Family::T, block - 2 * self.quads - self.items)
        };
        Some(VarKey::Edge {
            family,
            owner,
            from: within % self.nodes,
            to: within / self.nodes,
        })
    }

    pub fn name(&self, column: usize) -> String {
        self.key(column).map(|k| k.to_string()).unwrap_or_default()
    }

    /// Space-separated names of every column in order.
    pub fn dump(&self) -> String {
        (0..self.total_columns())
            .map(|j| self.name(j))
            .collect::<Vec<_>>()
            .join(" ")
    }
}
