//! CSV readers and writers for networks and bipartite incidence tables.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::network::{WeightedNetwork, DIAGONAL_TOL};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetworkFormat {
    /// Header row of labels, then `n` rows of `n` numeric cells.
    SquareMatrixCsv,
    /// Rows of `labelA,labelB,weight`; duplicates and reversed pairs are summed.
    EdgeListCsv,
}

impl FromStr for NetworkFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square-matrix-csv" | "square-matrix" | "matrix" => Ok(NetworkFormat::SquareMatrixCsv),
            "edge-list-csv" | "edge-list" | "edges" => Ok(NetworkFormat::EdgeListCsv),
            other => Err(Error::Validation(format!("unknown network format `{other}`"))),
        }
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn csv_reader<R: Read>(rdr: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .flexible(true)
        .from_reader(rdr)
}

fn parse_cell(cell: &str, row: usize, col: usize) -> Result<f64> {
    cell.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Parse(format!("row {row}, column {col}: `{cell}` is not a number")))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn load_network(path: impl AsRef<Path>, format: NetworkFormat) -> Result<WeightedNetwork> {
    let path = path.as_ref();
    let file = open(path)?;
    match format {
        NetworkFormat::SquareMatrixCsv => read_square_matrix(file),
        NetworkFormat::EdgeListCsv => read_edge_list(file, None),
    }
}

/// Loads an edge list whose node set and order come from a separate file
/// with one label per line.
pub fn load_edge_list_with_nodes(path: impl AsRef<Path>, nodes: impl AsRef<Path>) -> Result<WeightedNetwork> {
    let mut text = String::new();
    open(nodes.as_ref())?
        .read_to_string(&mut text)
        .map_err(|e| Error::io(nodes.as_ref(), e))?;
    let labels: Vec<String> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    read_edge_list(open(path.as_ref())?, Some(labels))
}

pub fn read_square_matrix<R: Read>(rdr: R) -> Result<WeightedNetwork> {
    let mut records = csv_reader(rdr).into_records();
    let header = records
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?
        .map_err(csv_err)?;
    let labels: Vec<String> = header.iter().map(String::from).collect();
    let n = labels.len();
    let mut rows = Vec::with_capacity(n);
    for (r, rec) in records.enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != n {
            return Err(Error::Parse(format!(
                "row {} has {} cells, expected {n}",
                r + 1,
                rec.len()
            )));
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(c, cell)| parse_cell(cell, r + 1, c))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.len() != n {
        return Err(Error::Parse(format!("{} data rows for {n} labels", rows.len())));
    }
    WeightedNetwork::new(labels, rows)
}

pub fn read_edge_list<R: Read>(rdr: R, labels: Option<Vec<String>>) -> Result<WeightedNetwork> {
    let fixed = labels.is_some();
    let mut labels = labels.unwrap_or_default();
    let mut index: HashMap<String, usize> = labels.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
    if index.len() != labels.len() {
        return Err(Error::InvalidNetwork("duplicate label in node list".into()));
    }
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for (r, rec) in csv_reader(rdr).into_records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != 3 {
            return Err(Error::Parse(format!("edge row {r} has {} fields, expected 3", rec.len())));
        }
        let weight = match rec[2].parse::<f64>() {
            Ok(v) if v.is_finite() => v,
            // a non-numeric weight in the first row is a header
            _ if r == 0 => continue,
            _ => return Err(Error::Parse(format!("edge row {r}: `{}` is not a number", &rec[2]))),
        };
        let mut lookup = |label: &str| -> Result<usize> {
            if let Some(&i) = index.get(label) {
                return Ok(i);
            }
            if fixed {
                return Err(Error::Parse(format!("edge row {r}: unknown node `{label}`")));
            }
            labels.push(label.to_string());
            index.insert(label.to_string(), labels.len() - 1);
            Ok(labels.len() - 1)
        };
        let a = lookup(&rec[0])?;
        let b = lookup(&rec[1])?;
        if weight < 0.0 {
            return Err(Error::NegativeWeight { i: a, j: b, value: weight });
        }
        if a == b {
            if weight > DIAGONAL_TOL {
                return Err(Error::Diagonal { i: a, value: weight });
            }
            continue;
        }
        entries.push((a.min(b), a.max(b), weight));
    }
    let mut net = WeightedNetwork::empty(labels)?;
    for (i, j, w) in entries {
        let cur = net.weight(i, j);
        net.set_weight(i, j, cur + w);
    }
    Ok(net)
}

pub fn write_square_matrix<W: Write>(net: &WeightedNetwork, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(net.labels()).map_err(csv_err)?;
    for i in 0..net.n() {
        wtr.write_record(net.row(i).iter().map(|x| x.to_string()))
            .map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

pub fn save_network(net: &WeightedNetwork, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_square_matrix(net, file)
}

/// Entity-by-role incidence table.
#[derive(Clone, Debug, PartialEq)]
pub struct Incidence {
    pub roles: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_incidence<R: Read>(rdr: R) -> Result<Incidence> {
    let mut records = csv_reader(rdr).into_records();
    let header = records
        .next()
        .ok_or_else(|| Error::Parse("empty incidence file".into()))?
        .map_err(csv_err)?;
    let roles: Vec<String> = header.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for (r, rec) in records.enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != roles.len() {
            return Err(Error::Parse(format!(
                "incidence row {} has {} cells, expected {}",
                r + 1,
                rec.len(),
                roles.len()
            )));
        }
        rows.push(
            rec.iter()
                .enumerate()
                .map(|(c, cell)| parse_cell(cell, r + 1, c))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(Incidence { roles, rows })
}

pub fn load_incidence(path: impl AsRef<Path>) -> Result<Incidence> {
    read_incidence(open(path.as_ref())?)
}

pub fn write_incidence<W: Write>(inc: &Incidence, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(&inc.roles).map_err(csv_err)?;
    for row in &inc.rows {
        wtr.write_record(row.iter().map(|x| x.to_string())).map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}
