//! JSON instance files.
//!
//! Elements are 1-based in files. Matrices are row-major lists of rows.

use std::io::{Read, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    problem_id, CaInstance, CovInstance, InfInstance, Instance, InstanceKind, LocInstance, Problem, RewardOverlay,
};
use crate::error::{Error, Result};
use crate::function::{GroundSet, SetFunction};
use crate::subset::Subset;

pub const FORMAT_TAG: &str = "asfm-instance/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Payload {
    Loc {
        g: Vec<Vec<f64>>,
    },
    Cov {
        w: Vec<f64>,
        a: Vec<Vec<u8>>,
    },
    Inf {
        p: Vec<f64>,
        edges: Vec<Vec<u8>>,
    },
    Ca {
        w: Vec<f64>,
        r: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        items: Vec<String>,
    },
}

/// A perturbed subset (sorted, 1-based) and its reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayEntry(pub Vec<usize>, pub f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub format: String,
    #[serde(rename = "type")]
    pub kind: InstanceKind,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub gamma_lower: f64,
    pub seed: u64,
    pub payload: Payload,
    #[serde(default)]
    pub overlay: Vec<OverlayEntry>,
}

fn bits(rows: &[Vec<bool>]) -> Vec<Vec<u8>> {
    rows.iter().map(|r| r.iter().map(|&b| b as u8).collect()).collect()
}

fn unbits(rows: &[Vec<u8>]) -> Result<Vec<Vec<bool>>> {
    rows.iter()
        .map(|r| {
            r.iter()
                .map(|&b| match b {
                    0 => Ok(false),
                    1 => Ok(true),
                    other => Err(Error::Parse(format!("binary matrix entry {other}"))),
                })
                .collect()
        })
        .collect()
}

impl InstanceFile {
    pub fn from_problem(p: &Problem) -> Self {
        Self::new(&p.instance, p.k, p.gamma_lower, p.seed, p.overlay.as_deref(), Vec::new())
    }

    pub fn new(
        instance: &Instance,
        k: usize,
        gamma_lower: f64,
        seed: u64,
        overlay: Option<&RewardOverlay>,
        items: Vec<String>,
    ) -> Self {
        let (m, payload) = match instance {
            Instance::Loc(i) => (i.clients(), Payload::Loc { g: i.matrix().to_vec() }),
            Instance::Cov(i) => (i.weights().len(), Payload::Cov { w: i.weights().to_vec(), a: bits(i.cover()) }),
            Instance::Inf(i) => (i.edges().len(), Payload::Inf { p: i.probs().to_vec(), edges: bits(i.edges()) }),
            Instance::Ca(i) => (0, Payload::Ca { w: i.utilities().to_vec(), r: i.mutual().to_vec(), items }),
        };
        let overlay = overlay
            .map(|o| o.iter().map(|(s, r)| OverlayEntry(s.iter().map(|e| e + 1).collect(), *r)).collect())
            .unwrap_or_default();
        InstanceFile {
            format: FORMAT_TAG.to_string(),
            kind: instance.kind(),
            n: instance.ground_size(),
            m,
            k,
            gamma_lower,
            seed,
            payload,
            overlay,
        }
    }

    pub fn instance(&self) -> Result<Instance> {
        let inst = match (&self.kind, &self.payload) {
            (InstanceKind::Loc, Payload::Loc { g }) => Instance::Loc(LocInstance::from_matrix(g.clone())?),
            (InstanceKind::Cov, Payload::Cov { w, a }) => {
                Instance::Cov(CovInstance::from_parts(w.clone(), unbits(a)?)?)
            }
            (InstanceKind::Inf, Payload::Inf { p, edges }) => {
                Instance::Inf(InfInstance::from_parts(p.clone(), unbits(edges)?)?)
            }
            (InstanceKind::Ca, Payload::Ca { w, r, .. }) => Instance::Ca(CaInstance::from_parts(w.clone(), r.clone())?),
            (kind, _) => return Err(Error::Parse(format!("payload does not match type {kind}"))),
        };
        if inst.ground_size() != self.n {
            return Err(Error::Parse(format!("header n = {} but payload has {}", self.n, inst.ground_size())));
        }
        Ok(inst)
    }

    pub fn reward_overlay(&self) -> Result<Option<RewardOverlay>> {
        if self.overlay.is_empty() {
            return Ok(None);
        }
        let mut ov = RewardOverlay::new(self.k, self.gamma_lower);
        for OverlayEntry(elems, r) in &self.overlay {
            if elems.iter().any(|&e| e == 0 || e > self.n) {
                return Err(Error::Parse(format!("overlay element out of range in {elems:?}")));
            }
            ov.insert(elems.iter().map(|e| e - 1).collect::<Subset>(), *r)?;
        }
        Ok(Some(ov))
    }

    pub fn to_problem(&self) -> Result<Problem> {
        if self.format != FORMAT_TAG {
            return Err(Error::Parse(format!("unsupported format {:?}", self.format)));
        }
        GroundSet::new(self.n, self.k)?;
        if !(self.gamma_lower > 0.0 && self.gamma_lower <= 1.0) {
            return Err(Error::Parse(format!("gamma_lower {} outside (0, 1]", self.gamma_lower)));
        }
        let overlay = self.reward_overlay()?.map(Arc::new);
        let gamma = overlay.as_ref().map(|_| self.gamma_lower);
        Ok(Problem {
            id: problem_id(self.kind, self.n, self.k, self.seed, gamma),
            kind: self.kind,
            m: self.m,
            k: self.k,
            gamma_lower: self.gamma_lower,
            seed: self.seed,
            instance: Arc::new(self.instance()?),
            overlay,
        })
    }

    pub fn read<R: Read>(reader: R) -> Result<Self> {
        Ok(serde_json::from_reader(reader)?)
    }

    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut writer, self)?;
        writeln!(writer)?;
        Ok(())
    }
}
