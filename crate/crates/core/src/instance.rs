//! JSON instance files.
//!
//! ```text
//! {
//!   "n": 20, "field": "complex", "kind": "fpp",
//!   "objective": { "A": [[re, im], ...] | null, "b": [[re, im], ...] } | null,
//!   "constraints": [ { "A": [...] | "a": [...], "b": [...]?, "c": 1.5,
//!                      "sense": "le" | "ge" | "eq" | "bounded", "eps": 0.5? } ],
//!   "meta": { "x_feas": [...]?, "ground_truth": [...]?, "noise": {...}?,
//!             "tau": 10.0?, "eta": 1.0?, "primary_users": 10? }
//! }
//! ```
//!
//! Matrices are row-major lists of `[re, im]` pairs. Numbers are written in
//! the shortest form that parses back to the same `f64`, so a write/read
//! cycle is lossless.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::apps::beamforming::BeamformingInstance;
use crate::apps::fpp::FppInstance;
use crate::apps::generate::Instance;
use crate::apps::phase_retrieval::{NoiseModel, PhaseRetrievalInstance};
use crate::error::{Error, Result};
use crate::linalg::{from_pairs, to_pairs, CMatrix, CVector};
use crate::model::{ConstraintSense, Field, HermitianMatrix, QcqpProblem, QuadraticConstraint};

type Pairs = Vec<[f64; 2]>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    Generic,
    Fpp,
    Beamforming,
    PhaseRetrieval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SenseTag {
    Le,
    Ge,
    Eq,
    Bounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveRecord {
    #[serde(rename = "A")]
    pub a: Option<Pairs>,
    pub b: Pairs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRecord {
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a_full: Option<Pairs>,
    #[serde(rename = "a", default, skip_serializing_if = "Option::is_none")]
    pub a_vec: Option<Pairs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Pairs>,
    pub c: f64,
    pub sense: SenseTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NoiseRecord {
    Noiseless,
    Bounded { eps: f64 },
    Gaussian { sigma: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetaRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_feas: Option<Pairs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<Pairs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Number of trailing `le` constraints protecting primary users.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primary_users: Option<usize>,
}

/// On-disk form of an [`Instance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub n: usize,
    pub field: Field,
    pub kind: InstanceKind,
    #[serde(default)]
    pub objective: Option<ObjectiveRecord>,
    pub constraints: Vec<ConstraintRecord>,
    #[serde(default)]
    pub meta: MetaRecord,
}

fn matrix_pairs(m: &CMatrix) -> Pairs {
    let mut out = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            out.push([z.re, z.im]);
        }
    }
    out
}

fn matrix_from_pairs(p: &[[f64; 2]], n: usize) -> Result<CMatrix> {
    if p.len() != n * n {
        return Err(Error::Format(format!("matrix has {} entries, expected {}", p.len(), n * n)));
    }
    Ok(CMatrix::from_row_iterator(n, n, from_pairs(p).iter().copied()))
}

fn vector_from_pairs(p: &[[f64; 2]], n: usize, what: &str) -> Result<CVector> {
    if p.len() != n {
        return Err(Error::Format(format!("{what} has {} entries, expected {n}", p.len())));
    }
    Ok(from_pairs(p))
}

fn sense_record(s: ConstraintSense) -> (SenseTag, Option<f64>) {
    match s {
        ConstraintSense::LessEqual => (SenseTag::Le, None),
        ConstraintSense::GreaterEqual => (SenseTag::Ge, None),
        ConstraintSense::Equal => (SenseTag::Eq, None),
        ConstraintSense::Bounded(eps) => (SenseTag::Bounded, Some(eps)),
    }
}

fn sense_from(tag: SenseTag, eps: Option<f64>) -> Result<ConstraintSense> {
    Ok(match tag {
        SenseTag::Le => ConstraintSense::LessEqual,
        SenseTag::Ge => ConstraintSense::GreaterEqual,
        SenseTag::Eq => ConstraintSense::Equal,
        SenseTag::Bounded => ConstraintSense::Bounded(
            eps.ok_or_else(|| Error::Format("bounded constraint without eps".into()))?,
        ),
    })
}

fn constraint_record(q: &QuadraticConstraint) -> ConstraintRecord {
    if let Some((a, c, sense)) = q.rank1_view() {
        let (tag, eps) = sense_record(sense);
        return ConstraintRecord { a_full: None, a_vec: Some(to_pairs(a)), b: None, c, sense: tag, eps };
    }
    let (tag, eps) = sense_record(q.sense());
    ConstraintRecord {
        a_full: Some(matrix_pairs(q.a().matrix())),
        a_vec: None,
        b: Some(to_pairs(q.b())),
        c: q.c(),
        sense: tag,
        eps,
    }
}

fn rank1_record(a: CVector, c: f64, sense: ConstraintSense) -> ConstraintRecord {
    let (tag, eps) = sense_record(sense);
    ConstraintRecord { a_full: None, a_vec: Some(to_pairs(&a)), b: None, c, sense: tag, eps }
}

impl ConstraintRecord {
    pub fn to_constraint(&self, n: usize) -> Result<QuadraticConstraint> {
        let sense = sense_from(self.sense, self.eps)?;
        match (&self.a_full, &self.a_vec) {
            (Some(a), None) => {
                let a = HermitianMatrix::new(matrix_from_pairs(a, n)?)?;
                let b = match &self.b {
                    Some(b) => vector_from_pairs(b, n, "b")?,
                    None => CVector::zeros(n),
                };
                QuadraticConstraint::new(a, b, self.c, sense)
            }
            (None, Some(a)) => {
                if self.b.as_ref().is_some_and(|b| b.iter().any(|p| p[0] != 0.0 || p[1] != 0.0)) {
                    return Err(Error::Format("rank-1 constraints carry no linear term".into()));
                }
                QuadraticConstraint::rank1(vector_from_pairs(a, n, "a")?, self.c, sense)
            }
            _ => Err(Error::Format("constraint needs exactly one of \"A\" or \"a\"".into())),
        }
    }

    fn rank1_parts(&self, n: usize) -> Result<(CVector, f64, ConstraintSense)> {
        let a = self
            .a_vec
            .as_ref()
            .ok_or_else(|| Error::Format("expected rank-1 constraints (\"a\")".into()))?;
        Ok((vector_from_pairs(a, n, "a")?, self.c, sense_from(self.sense, self.eps)?))
    }
}

fn columns(cols: &[CVector], n: usize) -> CMatrix {
    CMatrix::from_fn(n, cols.len(), |r, c| cols[c][r])
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance) -> InstanceFile {
        let n = inst.n();
        match inst {
            Instance::Generic(p) => InstanceFile {
                n,
                field: p.field(),
                kind: InstanceKind::Generic,
                objective: p.has_objective().then(|| ObjectiveRecord {
                    a: Some(matrix_pairs(p.a0().matrix())),
                    b: to_pairs(p.b0()),
                }),
                constraints: p.constraints().iter().map(constraint_record).collect(),
                meta: MetaRecord::default(),
            },
            Instance::Fpp(f) => InstanceFile {
                n,
                field: f.field,
                kind: InstanceKind::Fpp,
                objective: Some(ObjectiveRecord { a: None, b: to_pairs(&CVector::zeros(n)) }),
                constraints: f.constraints.iter().map(constraint_record).collect(),
                meta: MetaRecord { x_feas: f.x_feas.as_ref().map(to_pairs), ..MetaRecord::default() },
            },
            Instance::Beamforming(b) => {
                let mut constraints: Vec<ConstraintRecord> = b
                    .h_s
                    .column_iter()
                    .map(|h| rank1_record(h.into_owned(), b.tau, ConstraintSense::GreaterEqual))
                    .collect();
                if let Some(g) = &b.g_s {
                    constraints.extend(
                        g.column_iter().map(|g| rank1_record(g.into_owned(), b.eta, ConstraintSense::LessEqual)),
                    );
                }
                InstanceFile {
                    n,
                    field: Field::Complex,
                    kind: InstanceKind::Beamforming,
                    objective: Some(ObjectiveRecord { a: None, b: to_pairs(&CVector::zeros(n)) }),
                    constraints,
                    meta: MetaRecord {
                        tau: Some(b.tau),
                        eta: Some(b.eta),
                        primary_users: Some(b.l()),
                        ..MetaRecord::default()
                    },
                }
            }
            Instance::PhaseRetrieval(p) => {
                let sense = match p.noise {
                    NoiseModel::Bounded(eps) => ConstraintSense::Bounded(eps),
                    _ => ConstraintSense::Equal,
                };
                let noise = match p.noise {
                    NoiseModel::Noiseless => NoiseRecord::Noiseless,
                    NoiseModel::Bounded(eps) => NoiseRecord::Bounded { eps },
                    NoiseModel::Gaussian(sigma) => NoiseRecord::Gaussian { sigma },
                };
                InstanceFile {
                    n,
                    field: Field::Complex,
                    kind: InstanceKind::PhaseRetrieval,
                    objective: None,
                    constraints: p
                        .a_s
                        .column_iter()
                        .zip(&p.y)
                        .map(|(a, &y)| rank1_record(a.into_owned(), y, sense))
                        .collect(),
                    meta: MetaRecord {
                        ground_truth: p.truth.as_ref().map(to_pairs),
                        noise: Some(noise),
                        ..MetaRecord::default()
                    },
                }
            }
        }
    }

    pub fn to_instance(&self) -> Result<Instance> {
        let n = self.n;
        if n == 0 {
            return Err(Error::Format("n must be positive".into()));
        }
        if self.constraints.is_empty() {
            return Err(Error::Format("no constraints".into()));
        }
        match self.kind {
            InstanceKind::Generic => {
                let constraints = self.constraints_full()?;
                let (a0, b0) = match &self.objective {
                    None => (HermitianMatrix::zeros(n), CVector::zeros(n)),
                    Some(o) => (
                        match &o.a {
                            Some(a) => HermitianMatrix::new(matrix_from_pairs(a, n)?)?,
                            None => HermitianMatrix::identity(n),
                        },
                        vector_from_pairs(&o.b, n, "objective b")?,
                    ),
                };
                Ok(Instance::Generic(QcqpProblem::new(a0, b0, constraints, self.field)?))
            }
            InstanceKind::Fpp => Ok(Instance::Fpp(FppInstance {
                constraints: self.constraints_full()?,
                x_feas: self.meta.x_feas.as_ref().map(|v| vector_from_pairs(v, n, "x_feas")).transpose()?,
                field: self.field,
            })),
            InstanceKind::Beamforming => {
                let l = self.meta.primary_users.unwrap_or(0);
                let m = self
                    .constraints
                    .len()
                    .checked_sub(l)
                    .filter(|&m| m > 0)
                    .ok_or_else(|| Error::Format("more primary users than constraints".into()))?;
                let mut h = Vec::with_capacity(m);
                let mut g = Vec::with_capacity(l);
                let mut tau = self.meta.tau;
                let mut eta = self.meta.eta;
                for (i, rec) in self.constraints.iter().enumerate() {
                    let (a, c, sense) = rec.rank1_parts(n)?;
                    let (want, level, out) = if i < m {
                        (ConstraintSense::GreaterEqual, &mut tau, &mut h)
                    } else {
                        (ConstraintSense::LessEqual, &mut eta, &mut g)
                    };
                    if sense != want {
                        return Err(Error::Format(format!("beamforming constraint {i} has the wrong sense")));
                    }
                    match *level {
                        Some(v) if v != c => {
                            return Err(Error::Format(format!("beamforming constraint {i} has a different level")))
                        }
                        _ => *level = Some(c),
                    }
                    out.push(a);
                }
                Ok(Instance::Beamforming(BeamformingInstance {
                    h_s: columns(&h, n),
                    g_s: (l > 0).then(|| columns(&g, n)),
                    tau: tau.unwrap_or(1.0),
                    eta: eta.unwrap_or(0.0),
                }))
            }
            InstanceKind::PhaseRetrieval => {
                let mut cols = Vec::with_capacity(self.constraints.len());
                let mut y = Vec::with_capacity(self.constraints.len());
                for rec in &self.constraints {
                    let (a, c, _) = rec.rank1_parts(n)?;
                    cols.push(a);
                    y.push(c);
                }
                let noise = match self.meta.noise {
                    Some(NoiseRecord::Bounded { eps }) => NoiseModel::Bounded(eps),
                    Some(NoiseRecord::Gaussian { sigma }) => NoiseModel::Gaussian(sigma),
                    Some(NoiseRecord::Noiseless) => NoiseModel::Noiseless,
                    None => match self.constraints[0].sense {
                        SenseTag::Bounded => NoiseModel::Bounded(self.constraints[0].eps.unwrap_or(0.0)),
                        _ => NoiseModel::Noiseless,
                    },
                };
                Ok(Instance::PhaseRetrieval(PhaseRetrievalInstance {
                    a_s: columns(&cols, n),
                    y,
                    noise,
                    truth: self
                        .meta
                        .ground_truth
                        .as_ref()
                        .map(|v| vector_from_pairs(v, n, "ground_truth"))
                        .transpose()?,
                }))
            }
        }
    }

    fn constraints_full(&self) -> Result<Vec<QuadraticConstraint>> {
        self.constraints.iter().map(|c| c.to_constraint(self.n)).collect()
    }
}

pub fn to_json(inst: &Instance) -> Result<String> {
    Ok(serde_json::to_string(&InstanceFile::from_instance(inst))?)
}

pub fn from_json(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text)?;
    file.to_instance()
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<()> {
    fs::write(path, to_json(inst)?)?;
    Ok(())
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    from_json(&fs::read_to_string(path)?)
}
