//! JSON file formats for structures, potentials, Markov specs and sofic maps.
//!
//! Symbols are written by label and words in the `s1 s2^-1` notation, so the
//! files stay readable and independent of internal indices.

use std::fs;
use std::path::Path;

use gibbsent::{Alphabet, EnergyTerm, FiniteWindow, GibbsStructure, GroupWord, MarkovTreeSpec, ShiftPotential, SoficMap};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermFile {
    pub support: Vec<usize>,
    pub table: Vec<f64>,
}

/// A finite structure. Either `alphabet` (shared by all `vertices`) or
/// `alphabets` (one per vertex) must be given. `pinned` lists `[vertex, label]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabets: Option<Vec<Vec<String>>>,
    pub terms: Vec<TermFile>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pinned: Vec<(usize, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialFile {
    pub rank: usize,
    pub support: Vec<String>,
    pub alphabet: Vec<String>,
    pub table: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovFile {
    pub alphabet: Vec<String>,
    pub rho: Vec<f64>,
    /// One row-major `q × q` matrix per generator.
    pub transitions: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoficFile {
    pub rank: usize,
    pub n: usize,
    pub seed: Option<u64>,
    pub perms: Vec<Vec<usize>>,
}

fn alphabet(labels: Vec<String>) -> Result<Alphabet> {
    Ok(Alphabet::new(labels)?)
}

impl StructureFile {
    pub fn into_structure(self) -> Result<GibbsStructure> {
        let alphabets = match (self.alphabet, self.alphabets, self.vertices) {
            (Some(a), None, Some(n)) => vec![alphabet(a)?; n],
            (None, Some(list), n) => {
                if n.is_some_and(|n| n != list.len()) {
                    return Err(CliError::Usage("`vertices` disagrees with the length of `alphabets`".into()));
                }
                list.into_iter().map(alphabet).collect::<Result<_>>()?
            }
            _ => {
                return Err(CliError::Usage(
                    "structure needs `alphabet` with `vertices`, or `alphabets`".into(),
                ))
            }
        };
        let terms = self.terms.into_iter().map(|t| EnergyTerm::new(t.support, t.table)).collect();
        let g = GibbsStructure::new(alphabets, terms)?;
        if self.pinned.is_empty() {
            return Ok(g);
        }
        let mut omega = vec![0; g.len()];
        let mut set = Vec::new();
        for (v, label) in &self.pinned {
            let a = g
                .alphabets()
                .get(*v)
                .and_then(|a| a.index_of(label))
                .ok_or_else(|| CliError::Usage(format!("cannot pin vertex {v} to `{label}`")))?;
            omega[*v] = a;
            set.push(*v);
        }
        Ok(g.pin(&set, &omega)?)
    }

    pub fn from_structure(g: &GibbsStructure) -> Self {
        let pinned = (0..g.len())
            .filter_map(|v| g.pinned(v).map(|a| (v, g.alphabet(v).symbol(a).to_string())))
            .collect();
        let shared = g.alphabets().windows(2).all(|w| w[0] == w[1]);
        StructureFile {
            vertices: Some(g.len()),
            alphabet: (shared && !g.is_empty()).then(|| g.alphabet(0).symbols().to_vec()),
            alphabets: (!shared).then(|| g.alphabets().iter().map(|a| a.symbols().to_vec()).collect()),
            terms: g
                .terms()
                .iter()
                .map(|t| TermFile {
                    support: t.support().to_vec(),
                    table: t.table().to_vec(),
                })
                .collect(),
            pinned,
        }
    }
}

pub fn parse_words<S: AsRef<str>>(words: &[S]) -> Result<FiniteWindow> {
    let parsed = words
        .iter()
        .map(|w| w.as_ref().parse::<GroupWord>())
        .collect::<gibbsent::Result<Vec<_>>>()?;
    Ok(FiniteWindow::new(parsed))
}

impl PotentialFile {
    pub fn into_potential(self) -> Result<ShiftPotential> {
        let support = parse_words(&self.support)?;
        if support.len() != self.support.len() {
            return Err(CliError::Usage("potential support lists a word twice".into()));
        }
        Ok(ShiftPotential::new(self.rank, support, alphabet(self.alphabet)?, self.table)?)
    }

    pub fn from_potential(p: &ShiftPotential) -> Self {
        PotentialFile {
            rank: p.rank(),
            support: p.support().iter().map(ToString::to_string).collect(),
            alphabet: p.alphabet().symbols().to_vec(),
            table: p.table().to_vec(),
        }
    }
}

impl MarkovFile {
    pub fn into_spec(self) -> Result<MarkovTreeSpec> {
        Ok(MarkovTreeSpec::new(alphabet(self.alphabet)?, self.rho, self.transitions)?)
    }

    pub fn from_spec(s: &MarkovTreeSpec) -> Self {
        MarkovFile {
            alphabet: s.alphabet().symbols().to_vec(),
            rho: s.rho().to_vec(),
            transitions: (0..s.rank()).map(|i| s.transition(i).to_vec()).collect(),
        }
    }
}

impl SoficFile {
    pub fn into_map(self) -> Result<SoficMap> {
        if self.perms.len() != self.rank || self.perms.iter().any(|p| p.len() != self.n) {
            return Err(CliError::Usage("sofic file needs `rank` permutations of length `n`".into()));
        }
        Ok(SoficMap::from_permutations(self.perms)?)
    }

    pub fn from_map(sigma: &SoficMap, seed: Option<u64>) -> Self {
        SoficFile {
            rank: sigma.rank(),
            n: sigma.len(),
            seed,
            perms: (0..sigma.rank()).map(|i| sigma.permutation(i)).collect(),
        }
    }
}

/// Reads and decodes a JSON file, mapping failures to parse errors.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
