//! Versioned JSON model files.

use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use tbm_core::baselines::{FullBmModel, RbmConfig, RbmModel};
use tbm_core::miner::MiningParams;
use tbm_core::{FitReport, GibbsModel, ParameterDomain, Pattern, SampleSpace, ThetaVector};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ModelFileError {
    #[error("unsupported model schema {0}")]
    Schema(u32),
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("inconsistent model: {0}")]
    Model(#[from] tbm_core::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub iterations: usize,
    pub final_gap: f64,
    pub converged: bool,
    pub all_removed: bool,
    pub removed_parameters: Vec<Vec<u32>>,
    pub removal_sweeps: Vec<usize>,
    pub evaluations: u64,
}

impl From<&FitReport> for ReportJson {
    fn from(r: &FitReport) -> Self {
        ReportJson {
            iterations: r.iterations,
            final_gap: r.final_gap,
            converged: r.converged,
            all_removed: r.all_removed,
            removed_parameters: r.removed_parameters.iter().map(items).collect(),
            removal_sweeps: r.removal_sweeps.clone(),
            evaluations: r.evaluations,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiningJson {
    pub sigma: f64,
    pub k: usize,
}

impl From<MiningParams> for MiningJson {
    fn from(m: MiningParams) -> Self {
        MiningJson { sigma: m.sigma, k: m.k }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TbmFile {
    pub n_variables: usize,
    pub mining: Option<MiningJson>,
    /// S in graded order; ⊥ first.
    pub sample_space: Vec<Vec<u32>>,
    /// B in graded order, aligned with `theta`.
    pub domain: Vec<Vec<u32>>,
    pub theta: Vec<f64>,
    pub log_partition: f64,
    pub report: ReportJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BmFile {
    pub n_variables: usize,
    pub mining: Option<MiningJson>,
    pub domain: Vec<Vec<u32>>,
    pub theta: Vec<f64>,
    pub log_partition: f64,
    pub report: ReportJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbmFile {
    pub n_visible: usize,
    pub n_hidden: usize,
    pub learning_rate: f64,
    pub updates: usize,
    pub chains: usize,
    pub seed: u64,
    pub visible_bias: Vec<f64>,
    pub hidden_bias: Vec<f64>,
    /// One row of `n_hidden` weights per visible unit.
    pub weights: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelBody {
    Tbm(TbmFile),
    Bm(BmFile),
    Rbm(RbmFile),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema: u32,
    #[serde(flatten)]
    pub body: ModelBody,
}

/// A model loaded back from disk.
#[derive(Clone, Debug)]
pub enum LoadedModel {
    Tbm(GibbsModel),
    Bm(FullBmModel),
    Rbm(RbmModel),
}

fn items(p: &Pattern) -> Vec<u32> {
    p.items().to_vec()
}

fn patterns(v: &[Vec<u32>]) -> impl Iterator<Item = Pattern> + '_ {
    v.iter().map(|x| Pattern::new(x.iter().copied()))
}

impl ModelFile {
    pub fn tbm(m: &GibbsModel, n_variables: usize, report: &FitReport) -> Self {
        let body = TbmFile {
            n_variables,
            mining: m.domain().mining().map(Into::into),
            sample_space: m.space().outcomes().iter().map(items).collect(),
            domain: m.domain().patterns().iter().map(items).collect(),
            theta: m.theta().values().to_vec(),
            log_partition: m.log_partition(),
            report: report.into(),
        };
        ModelFile { schema: SCHEMA_VERSION, body: ModelBody::Tbm(body) }
    }

    pub fn bm(m: &FullBmModel, report: &FitReport) -> Self {
        let body = BmFile {
            n_variables: m.n_variables(),
            mining: m.domain().mining().map(Into::into),
            domain: m.domain().patterns().iter().map(items).collect(),
            theta: m.theta().values().to_vec(),
            log_partition: m.log_partition(),
            report: report.into(),
        };
        ModelFile { schema: SCHEMA_VERSION, body: ModelBody::Bm(body) }
    }

    pub fn rbm(m: &RbmModel, cfg: &RbmConfig) -> Self {
        let h = m.n_hidden();
        let body = RbmFile {
            n_visible: m.n_visible(),
            n_hidden: h,
            learning_rate: cfg.learning_rate,
            updates: cfg.updates,
            chains: cfg.chains,
            seed: cfg.seed,
            visible_bias: m.visible_bias.clone(),
            hidden_bias: m.hidden_bias.clone(),
            weights: if h == 0 { Vec::new() } else { m.weights.chunks(h).map(<[f64]>::to_vec).collect() },
        };
        ModelFile { schema: SCHEMA_VERSION, body: ModelBody::Rbm(body) }
    }

    pub fn to_writer<W: Write>(&self, mut out: W) -> io::Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self, ModelFileError> {
        let value: serde_json::Value = serde_json::from_reader(reader)?;
        let schema = value.get("schema").and_then(serde_json::Value::as_u64).unwrap_or(0) as u32;
        if schema != SCHEMA_VERSION {
            return Err(ModelFileError::Schema(schema));
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn read(path: &Path) -> Result<Self, ModelFileError> {
        Self::from_reader(BufReader::new(File::open(path)?))
    }

    /// Rebuilds the in-memory model; ψ is recomputed from θ.
    pub fn load(&self) -> Result<LoadedModel, ModelFileError> {
        Ok(match &self.body {
            ModelBody::Tbm(f) => {
                let domain = ParameterDomain::from_patterns(patterns(&f.domain))?;
                let theta = ThetaVector::new(domain, f.theta.clone())?;
                let space = SampleSpace::from_outcomes(patterns(&f.sample_space));
                LoadedModel::Tbm(GibbsModel::new(space, theta)?)
            }
            ModelBody::Bm(f) => {
                let domain = ParameterDomain::from_patterns(patterns(&f.domain))?;
                let theta = ThetaVector::new(domain, f.theta.clone())?;
                LoadedModel::Bm(FullBmModel::new(f.n_variables, theta)?)
            }
            ModelBody::Rbm(f) => {
                if f.visible_bias.len() != f.n_visible
                    || f.hidden_bias.len() != f.n_hidden
                    || f.weights.len() != f.n_visible
                    || f.weights.iter().any(|row| row.len() != f.n_hidden)
                {
                    return Err(tbm_core::Error::InvalidConfig("RBM dimensions disagree").into());
                }
                LoadedModel::Rbm(RbmModel {
                    visible_bias: f.visible_bias.clone(),
                    hidden_bias: f.hidden_bias.clone(),
                    weights: f.weights.concat(),
                })
            }
        })
    }
}
