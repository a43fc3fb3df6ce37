//! Sparse mixed-integer linear programs.
//!
//! A model minimizes `objective · x` subject to rows `terms · x (<=|=|>=) rhs`,
//! per-column bounds and an integrality mask.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    Continuous,
    Integer,
    Binary,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        self != VarKind::Continuous
    }
}

/// Which family of constraints a row belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowTag {
    SelfLoop,
    StartArrival,
    FirstLegBattery,
    StationBattery,
    ForeignDeparture,
    /// Numbered restriction types 0 through 13.
    Type(u8),
    LaunchCut,
    /// Rows of models not built from a delivery instance.
    Generic,
}

impl fmt::Display for RowTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowTag::SelfLoop => f.write_str("self_loop"),
            RowTag::StartArrival => f.write_str("start_arrival"),
            RowTag::FirstLegBattery => f.write_str("first_leg_battery"),
            RowTag::StationBattery => f.write_str("station_battery"),
            RowTag::ForeignDeparture => f.write_str("foreign_departure"),
            RowTag::Type(n) => write!(f, "type{n}"),
            RowTag::LaunchCut => f.write_str("launch_cut"),
            RowTag::Generic => f.write_str("row"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub tag: RowTag,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates this row (zero when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MilpModel {
    pub names: Vec<String>,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub kinds: Vec<VarKind>,
    pub rows: Vec<Row>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ModelError {
    #[error("row {row} references column {column} of {columns}")]
    BadColumn {
        row: usize,
        column: usize,
        columns: usize,
    },
    #[error("column {0} has crossed or NaN bounds")]
    BadBounds(usize),
    #[error("row {0} has a non-finite coefficient or right-hand side")]
    NonFinite(usize),
}

impl MilpModel {
    pub fn new() -> Self {
        Self {
            names: Vec::new(),
            objective: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            kinds: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn add_column(&mut self, name: impl Into<String>, kind: VarKind, lower: f64, upper: f64, cost: f64) -> usize {
        self.names.push(name.into());
        self.kinds.push(kind);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.push(cost);
        self.names.len() - 1
    }

    /// Adds a row, merging repeated columns and dropping zero coefficients.
    pub fn add_row(&mut self, tag: RowTag, terms: impl IntoIterator<Item = (usize, f64)>, sense: Sense, rhs: f64) -> usize {
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for (j, a) in terms {
            *merged.entry(j).or_insert(0.0) += a;
        }
        let terms = merged.into_iter().filter(|&(_, a)| a != 0.0).collect();
        self.rows.push(Row { tag, terms, sense, rhs });
        self.rows.len() - 1
    }

    pub fn columns(&self) -> usize {
        self.objective.len()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.columns();
        for j in 0..n {
            if self.lower[j].is_nan() || self.upper[j].is_nan() || self.lower[j] > self.upper[j] {
                return Err(ModelError::BadBounds(j));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(ModelError::NonFinite(i));
            }
            for &(j, a) in &row.terms {
                if j >= n {
                    return Err(ModelError::BadColumn {
                        row: i,
                        column: j,
                        columns: n,
                    });
                }
                if !a.is_finite() {
                    return Err(ModelError::NonFinite(i));
                }
            }
        }
        Ok(())
    }

    /// Largest row or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(x));
        let bounds = (0..self.columns()).map(|j| (self.lower[j] - x[j]).max(x[j] - self.upper[j]).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    /// Number of rows per tag.
    pub fn row_report(&self) -> BTreeMap<RowTag, usize> {
        let mut out = BTreeMap::new();
        for row in &self.rows {
            *out.entry(row.tag).or_insert(0) += 1;
        }
        out
    }

    /// Plain-text listing, one line per column then one line per row:
    ///
    /// ```text
    /// col <index> <name> <kind> <lower> <upper> <cost>
    /// row <index> <tag> <sense> <rhs> <coef>*<name> ...
    /// ```
    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# columns {} rows {}", self.columns(), self.rows.len());
        for j in 0..self.columns() {
            let kind = match self.kinds[j] {
                VarKind::Continuous => "C",
                VarKind::Integer => "I",
                VarKind::Binary => "B",
            };
            let _ = writeln!(
                out,
                "col {j} {} {kind} {} {} {}",
                self.names[j], self.lower[j], self.upper[j], self.objective[j]
            );
        }
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "row {i} {} {} {}", row.tag, row.sense.symbol(), row.rhs);
            for &(j, a) in &row.terms {
                let _ = write!(out, " {a}*{}", self.names[j]);
            }
            out.push('\n');
        }
        out
    }
}

impl Default for MilpModel {
    fn default() -> Self {
        Self::new()
    }
}
