//! Objects files: a reference inverse temperature and named objects.

use std::collections::BTreeMap;
use std::fs;

use serde::Deserialize;
use thermocool::model::{matrix_from_pairs, QuantumObject, QuasiClassicalObject};
use thermocool::Object;

use crate::output::Failure;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectsFile {
    beta: f64,
    objects: BTreeMap<String, Entry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Entry {
    Classical {
        p: Vec<f64>,
        g: Vec<f64>,
    },
    Quantum {
        rho: Vec<[f64; 2]>,
        gamma: Vec<[f64; 2]>,
    },
}

#[derive(Debug)]
pub struct Objects {
    path: String,
    pub beta: f64,
    entries: BTreeMap<String, Entry>,
}

impl Objects {
    pub fn load(path: &str, beta_override: Option<f64>) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::input(format!("cannot read {path}: {e}")))?;
        let file: ObjectsFile = serde_json::from_str(&text)
            .map_err(|e| Failure::input(format!("malformed objects file {path}: {e}")))?;
        Ok(Self {
            path: path.to_string(),
            beta: beta_override.unwrap_or(file.beta),
            entries: file.objects,
        })
    }

    pub fn get(&self, name: &str) -> Result<Object, Failure> {
        let entry = self
            .entries
            .get(name)
            .ok_or_else(|| Failure::input(format!("no object named '{name}' in {}", self.path)))?;
        let invalid = |e: thermocool::Error| Failure::input(format!("object '{name}': {e}"));
        Ok(match entry {
            Entry::Classical { p, g } => QuasiClassicalObject::new(p.clone(), g.clone(), self.beta)
                .map_err(invalid)?
                .into(),
            Entry::Quantum { rho, gamma } => {
                let rho = matrix_from_pairs(rho).map_err(invalid)?;
                let gamma = matrix_from_pairs(gamma).map_err(invalid)?;
                QuantumObject::new(rho, gamma, self.beta)
                    .map_err(invalid)?
                    .into()
            }
        })
    }

    /// Quasi-classical view; quantum objects must commute with their equilibrium state.
    pub fn classical(&self, name: &str) -> Result<QuasiClassicalObject, Failure> {
        self.get(name)?
            .to_classical()
            .map_err(|e| Failure::input(format!("object '{name}': {e}")))
    }
}
