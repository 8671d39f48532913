//! Parameter sets of several subspaces behind one shared hidden
//! architecture, and the `SLBANK1` text container that stores them.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::metrics::threshold_filter;
use super::{forward, Layer, NetArchitecture, OutputLink, ParameterSet};
use crate::datagen::SubspaceDescriptor;
use crate::error::{Error, Result};

pub const BANK_FORMAT: &str = "SLBANK1";

#[derive(Debug, Clone, PartialEq)]
pub struct BankEntry {
    pub descriptor: SubspaceDescriptor,
    pub link: OutputLink,
    pub params: ParameterSet,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceBank {
    hidden_sizes: Vec<usize>,
    entries: Vec<BankEntry>,
}

impl SubspaceBank {
    pub fn new(hidden_sizes: Vec<usize>) -> Result<Self> {
        if hidden_sizes.contains(&0) {
            return Err(Error::invalid(
                "bank.hidden_sizes",
                "layer sizes must be >= 1",
            ));
        }
        Ok(Self {
            hidden_sizes,
            entries: Vec::new(),
        })
    }

    pub fn hidden_sizes(&self) -> &[usize] {
        &self.hidden_sizes
    }

    pub fn entries(&self) -> &[BankEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.entries
            .iter()
            .map(|e| e.descriptor.id.as_str())
            .collect()
    }

    /// Network shape for a descriptor under this bank's hidden layers.
    pub fn architecture(&self, descriptor: &SubspaceDescriptor) -> NetArchitecture {
        NetArchitecture {
            input_dim: descriptor.input_dim(),
            hidden_sizes: self.hidden_sizes.clone(),
            output_dim: descriptor.output_dim(),
        }
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.descriptor.id == id)
    }

    pub fn get(&self, id: &str) -> Option<&BankEntry> {
        self.position(id).map(|i| &self.entries[i])
    }

    /// Adds an entry, replacing in place any entry with the same id.
    /// Returns the replaced entry.
    pub fn insert(&mut self, entry: BankEntry) -> Result<Option<BankEntry>> {
        entry.descriptor.validate()?;
        if !entry.params.matches(&self.architecture(&entry.descriptor)) {
            return Err(Error::invalid(
                "bank entry",
                format!(
                    "parameters of '{}' do not match the bank architecture",
                    entry.descriptor.id
                ),
            ));
        }
        match self.position(&entry.descriptor.id) {
            Some(i) => Ok(Some(std::mem::replace(&mut self.entries[i], entry))),
            None => {
                self.entries.push(entry);
                Ok(None)
            }
        }
    }

    /// Weight matrix of layer `layer` for subspace `subspace`, both 1-based.
    pub fn weight(&self, layer: usize, subspace: usize) -> Option<&DMatrix<f64>> {
        let e = self.entries.get(subspace.checked_sub(1)?)?;
        Some(&e.params.layers.get(layer.checked_sub(1)?)?.weights)
    }

    /// Bias vector of layer `layer` for subspace `subspace`, both 1-based.
    pub fn bias(&self, layer: usize, subspace: usize) -> Option<&DVector<f64>> {
        let e = self.entries.get(subspace.checked_sub(1)?)?;
        Some(&e.params.layers.get(layer.checked_sub(1)?)?.biases)
    }

    fn no_match(&self, query: String) -> Error {
        Error::NoMatchingSubspace {
            query,
            stored: self.ids().join(", "),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BankQuery {
    /// Free inputs of a named subspace.
    Id { id: String, x: Vec<f64> },
    /// A complete input vector; the first entry whose support contains it
    /// is used.
    FullInput(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// 1-based position of the selected entry.
    pub entry: usize,
    pub id: String,
    /// Outputs after the entry's link function.
    pub scores: Vec<f64>,
    pub bits: Vec<bool>,
}

/// Linear search for the matching entry, forward pass, threshold.
pub fn bank_predict(bank: &SubspaceBank, query: &BankQuery, tau: f64) -> Result<Prediction> {
    let (index, x) = match query {
        BankQuery::Id { id, x } => {
            let i = bank
                .entries
                .iter()
                .position(|e| &e.descriptor.id == id)
                .ok_or_else(|| bank.no_match(format!("id '{id}'")))?;
            (i, x.clone())
        }
        BankQuery::FullInput(full) => bank
            .entries
            .iter()
            .enumerate()
            .find_map(|(i, e)| e.descriptor.project(full).map(|x| (i, x)))
            .ok_or_else(|| bank.no_match(format!("full input of length {}", full.len())))?,
    };
    let entry = &bank.entries[index];
    let raw = forward(&bank.architecture(&entry.descriptor), &entry.params, &x)?;
    let scores: Vec<f64> = raw.iter().map(|v| entry.link.apply(*v)).collect();
    Ok(Prediction {
        entry: index + 1,
        id: entry.descriptor.id.clone(),
        bits: threshold_filter(&scores, tau),
        scores,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BankFile {
    format: String,
    hidden_sizes: Vec<usize>,
    #[serde(default)]
    entries: Vec<EntryFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryFile {
    link: OutputLink,
    descriptor: SubspaceDescriptor,
    layers: Vec<LayerFile>,
}

/// Weights column-major, both blobs as little-endian `f64` in hex.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    rows: usize,
    cols: usize,
    weights: String,
    biases: String,
}

fn encode(values: &[f64]) -> String {
    let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    hex::encode(bytes)
}

fn decode(text: &str, expected: usize) -> Result<Vec<f64>> {
    let bytes = hex::decode(text).map_err(|e| Error::format(BANK_FORMAT, e.to_string()))?;
    if bytes.len() != expected * 8 {
        return Err(Error::format(
            BANK_FORMAT,
            format!(
                "blob holds {} bytes, expected {}",
                bytes.len(),
                expected * 8
            ),
        ));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

pub fn write_bank(bank: &SubspaceBank) -> Result<String> {
    let file = BankFile {
        format: BANK_FORMAT.to_string(),
        hidden_sizes: bank.hidden_sizes.clone(),
        entries: bank
            .entries
            .iter()
            .map(|e| EntryFile {
                link: e.link,
                descriptor: e.descriptor.clone(),
                layers: e
                    .params
                    .layers
                    .iter()
                    .map(|l| LayerFile {
                        rows: l.weights.nrows(),
                        cols: l.weights.ncols(),
                        weights: encode(l.weights.as_slice()),
                        biases: encode(l.biases.as_slice()),
                    })
                    .collect(),
            })
            .collect(),
    };
    toml::to_string(&file).map_err(|e| Error::format(BANK_FORMAT, e.to_string()))
}

pub fn read_bank(text: &str) -> Result<SubspaceBank> {
    let file: BankFile =
        toml::from_str(text).map_err(|e| Error::format(BANK_FORMAT, e.to_string()))?;
    if file.format != BANK_FORMAT {
        return Err(Error::format(
            BANK_FORMAT,
            format!("unsupported format '{}'", file.format),
        ));
    }
    let mut bank = SubspaceBank::new(file.hidden_sizes)?;
    for e in file.entries {
        let layers = e
            .layers
            .into_iter()
            .map(|l| {
                Ok(Layer {
                    weights: DMatrix::from_vec(
                        l.rows,
                        l.cols,
                        decode(&l.weights, l.rows * l.cols)?,
                    ),
                    biases: DVector::from_vec(decode(&l.biases, l.rows)?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let id = e.descriptor.id.clone();
        let replaced = bank.insert(BankEntry {
            descriptor: e.descriptor,
            link: e.link,
            params: ParameterSet { layers },
        })?;
        if replaced.is_some() {
            return Err(Error::format(
                BANK_FORMAT,
                format!("duplicate entry id '{id}'"),
            ));
        }
    }
    Ok(bank)
}
