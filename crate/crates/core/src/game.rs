//! Bargaining-game predicates and best-response analysis.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::market::JobEconomics;
use crate::{Error, Result};

/// Absolute tolerance for the `a = b` test.
pub const NASH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BidAskProfile {
    pub bid: f64,
    pub ask: f64,
    pub econ: JobEconomics,
}

/// Region of the price plane a profile falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProfileSet {
    /// Bid below the carrier's cost.
    BidBelowCost,
    /// Ask above the shipper's ceiling.
    AskAboveCeiling,
    /// Inside the band but the bid does not reach the ask.
    Crossed,
    Feasible,
    /// Ask below cost or bid above the ceiling, with the bid covering the ask.
    Outside,
}

impl ProfileSet {
    pub fn index(&self) -> u8 {
        match self {
            ProfileSet::BidBelowCost => 1,
            ProfileSet::AskAboveCeiling => 2,
            ProfileSet::Crossed => 3,
            ProfileSet::Feasible => 4,
            ProfileSet::Outside => 0,
        }
    }
}

/// First matching region wins. Crossing prices where the ask sits below cost
/// or the bid above the ceiling belong to none of the four sets.
pub fn classify_profile(p: &BidAskProfile) -> ProfileSet {
    let (trn, pay) = (p.econ.trn_cost, p.econ.max_pay);
    if p.bid < trn {
        ProfileSet::BidBelowCost
    } else if p.ask > pay {
        ProfileSet::AskAboveCeiling
    } else if p.bid < p.ask {
        ProfileSet::Crossed
    } else if trn <= p.ask && p.bid <= pay {
        ProfileSet::Feasible
    } else {
        ProfileSet::Outside
    }
}

pub fn is_nash_point(p: &BidAskProfile) -> bool {
    let (trn, pay) = (p.econ.trn_cost, p.econ.max_pay);
    (p.bid - p.ask).abs() <= NASH_TOLERANCE
        && p.ask >= trn - NASH_TOLERANCE
        && p.bid <= pay + NASH_TOLERANCE
        && p.ask <= pay + NASH_TOLERANCE
        && p.bid >= trn - NASH_TOLERANCE
}

/// Payoffs of a carrier profile (row) against a shipper profile (column).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Cell {
    pub carrier: f64,
    pub shipper: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PayoffMatrix {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    /// Row-major; `None` marks an unstable profile pair.
    pub cells: Vec<Option<Cell>>,
}

impl PayoffMatrix {
    pub fn new(rows: Vec<String>, columns: Vec<String>, cells: Vec<Option<Cell>>) -> Result<Self> {
        if cells.len() != rows.len() * columns.len() {
            return Err(Error::Shape(format!(
                "{} cells for a {}x{} matrix",
                cells.len(),
                rows.len(),
                columns.len()
            )));
        }
        for labels in [&rows, &columns] {
            for (i, l) in labels.iter().enumerate() {
                if labels[..i].contains(l) {
                    return Err(Error::Shape(format!("duplicate label `{l}`")));
                }
            }
        }
        Ok(PayoffMatrix { rows, columns, cells })
    }

    pub fn cell(&self, row: usize, col: usize) -> Option<Cell> {
        self.cells[row * self.columns.len() + col]
    }
}

fn argmax(values: impl Iterator<Item = Option<f64>>) -> Vec<usize> {
    let mut best = f64::NEG_INFINITY;
    let mut idx = Vec::new();
    for (i, v) in values.enumerate() {
        let Some(v) = v else { continue };
        if v > best {
            best = v;
            idx.clear();
            idx.push(i);
        } else if v == best {
            idx.push(i);
        }
    }
    idx
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BestResponses {
    /// Per shipper column: the carrier rows that maximize the carrier payoff.
    /// Empty when the column has no defined cell.
    pub carrier: Vec<Vec<usize>>,
    /// Per carrier row: the shipper columns that maximize the shipper payoff.
    pub shipper: Vec<Vec<usize>>,
    /// Pure equilibria as `(row, column)`.
    pub nash: Vec<(usize, usize)>,
}

impl BestResponses {
    pub fn is_carrier_best(&self, row: usize, col: usize) -> bool {
        self.carrier[col].contains(&row)
    }

    pub fn is_shipper_best(&self, row: usize, col: usize) -> bool {
        self.shipper[row].contains(&col)
    }
}

pub fn best_responses(m: &PayoffMatrix) -> BestResponses {
    let (nr, nc) = (m.rows.len(), m.columns.len());
    let carrier: Vec<Vec<usize>> = (0..nc)
        .map(|c| argmax((0..nr).map(|r| m.cell(r, c).map(|x| x.carrier))))
        .collect();
    let shipper: Vec<Vec<usize>> = (0..nr)
        .map(|r| argmax((0..nc).map(|c| m.cell(r, c).map(|x| x.shipper))))
        .collect();
    let nash = (0..nr)
        .flat_map(|r| (0..nc).map(move |c| (r, c)))
        .filter(|&(r, c)| carrier[c].contains(&r) && shipper[r].contains(&c))
        .collect();
    BestResponses { carrier, shipper, nash }
}

/// Table with best responses marked: `*` carrier best, `+` shipper best,
/// `[..]` around equilibria.
pub struct NashReport<'a> {
    pub matrix: &'a PayoffMatrix,
    pub responses: BestResponses,
}

impl<'a> NashReport<'a> {
    pub fn new(matrix: &'a PayoffMatrix) -> Self {
        NashReport {
            matrix,
            responses: best_responses(matrix),
        }
    }
}

impl fmt::Display for NashReport<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.matrix;
        let width = 18;
        write!(f, "{:<10}", "C \\ S")?;
        for c in &m.columns {
            write!(f, "{c:>width$}")?;
        }
        writeln!(f)?;
        for (r, row) in m.rows.iter().enumerate() {
            write!(f, "{row:<10}")?;
            for c in 0..m.columns.len() {
                let text = match m.cell(r, c) {
                    None => String::from("NA"),
                    Some(cell) => {
                        let cm = if self.responses.is_carrier_best(r, c) { "*" } else { "" };
                        let sm = if self.responses.is_shipper_best(r, c) { "+" } else { "" };
                        let body = format!("{:.2}{cm}/{:.2}{sm}", cell.carrier, cell.shipper);
                        if self.responses.nash.contains(&(r, c)) {
                            format!("[{body}]")
                        } else {
                            body
                        }
                    }
                };
                write!(f, "{text:>width$}")?;
            }
            writeln!(f)?;
        }
        writeln!(f)?;
        writeln!(f, "* carrier best response, + shipper best response, [..] pure Nash equilibrium")?;
        for (c, rows) in self.responses.carrier.iter().enumerate() {
            let names: Vec<&str> = rows.iter().map(|&r| m.rows[r].as_str()).collect();
            let names = if names.is_empty() { String::from("undefined") } else { names.join(", ") };
            writeln!(f, "carrier best response to shipper {}: {names}", m.columns[c])?;
        }
        for (r, cols) in self.responses.shipper.iter().enumerate() {
            let names: Vec<&str> = cols.iter().map(|&c| m.columns[c].as_str()).collect();
            let names = if names.is_empty() { String::from("undefined") } else { names.join(", ") };
            writeln!(f, "shipper best response to carrier {}: {names}", m.rows[r])?;
        }
        if self.responses.nash.is_empty() {
            writeln!(f, "no pure Nash equilibrium")?;
        }
        for &(r, c) in &self.responses.nash {
            writeln!(f, "Nash equilibrium: carrier {} / shipper {}", m.rows[r], m.columns[c])?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    const ECON: JobEconomics = JobEconomics {
        max_pay: 2.0,
        trn_cost: 1.0,
    };

    fn profile(ask: f64, bid: f64) -> BidAskProfile {
        BidAskProfile { bid, ask, econ: ECON }
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_profile(&profile(1.2, 0.5)), ProfileSet::BidBelowCost);
        assert_eq!(classify_profile(&profile(1.2, 1.6)), ProfileSet::Feasible);
        assert_eq!(classify_profile(&profile(2.5, 2.6)), ProfileSet::AskAboveCeiling);
        assert_eq!(classify_profile(&profile(1.8, 1.3)), ProfileSet::Crossed);
        assert_eq!(classify_profile(&profile(0.5, 1.5)), ProfileSet::Outside);
        assert_eq!(classify_profile(&profile(1.5, 2.5)), ProfileSet::Outside);
    }

    #[test]
    fn nash_examples() {
        assert!(is_nash_point(&profile(1.5, 1.5)));
        assert!(!is_nash_point(&profile(1.2, 1.6)));
        assert!(!is_nash_point(&profile(2.5, 2.5)));
        assert!(is_nash_point(&profile(1.0, 1.0)) && is_nash_point(&profile(2.0, 2.0)));
    }

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn dominant_row_holds_every_equilibrium() {
        let c = |carrier, shipper| Some(Cell { carrier, shipper });
        let m = PayoffMatrix::new(
            labels(&["A", "B"]),
            labels(&["X", "Y"]),
            vec![c(5.0, 1.0), c(6.0, 2.0), c(1.0, 3.0), c(2.0, 1.0)],
        )
        .unwrap();
        let br = best_responses(&m);
        assert_eq!(br.carrier, vec![vec![0], vec![0]]);
        assert_eq!(br.nash, vec![(0, 1)]);
    }

    #[test]
    fn missing_cells_never_win() {
        let m = PayoffMatrix::new(
            labels(&["A", "B"]),
            labels(&["X"]),
            vec![None, Some(Cell { carrier: -3.0, shipper: -1.0 })],
        )
        .unwrap();
        let br = best_responses(&m);
        assert_eq!(br.carrier, vec![vec![1]]);
        assert_eq!(br.shipper, vec![vec![], vec![0]]);
        assert_eq!(br.nash, vec![(1, 0)]);
    }

    #[test]
    fn ties_are_kept() {
        let cell = Some(Cell { carrier: 1.0, shipper: 1.0 });
        let m = PayoffMatrix::new(labels(&["A", "B"]), labels(&["X"]), vec![cell, cell]).unwrap();
        assert_eq!(best_responses(&m).nash, vec![(0, 0), (1, 0)]);
    }

    #[test]
    fn shape_is_validated() {
        assert!(PayoffMatrix::new(labels(&["A"]), labels(&["X"]), vec![]).is_err());
        assert!(PayoffMatrix::new(labels(&["A", "A"]), labels(&["X"]), vec![None, None]).is_err());
    }
}
