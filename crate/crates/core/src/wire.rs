//! Serializable mirrors of the core types. Every number is carried as a
//! string in the canonical text form of its scalar type, never as a JSON
//! float.

use serde::{Deserialize, Serialize};

use crate::coding::{DvsCode, EncodedModel};
use crate::dvs::{Cap, DistanceSet};
use crate::equiv::{RatMatrix, ScalingWitness};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::space::MetricSpace;
use crate::BigRational;

fn parse_all<T: Scalar>(v: &[String]) -> Result<Vec<T>> {
    v.iter().map(|s| T::parse_text(s)).collect()
}

fn texts<T: Scalar>(v: &[T]) -> Vec<String> {
    v.iter().map(Scalar::to_text).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetJson {
    pub values: Vec<String>,
    /// A number, or `"unbounded"`.
    pub cap: String,
    /// Informational on input; recomputed on parse.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed: Option<bool>,
}

impl SetJson {
    pub fn from_set<T: Scalar>(d: &DistanceSet<T>) -> Self {
        SetJson {
            values: texts(d.values()),
            cap: match d.cap() {
                Cap::Bounded(c) => c.to_text(),
                Cap::Unbounded => "unbounded".into(),
            },
            closed: Some(d.is_closed()),
        }
    }

    pub fn to_set<T: Scalar>(&self) -> Result<DistanceSet<T>> {
        let values = parse_all(&self.values)?;
        let cap = match self.cap.as_str() {
            "unbounded" => Cap::Unbounded,
            s => Cap::Bounded(T::parse_text(s)?),
        };
        DistanceSet::new(values, cap)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceJson {
    pub labels: Vec<String>,
    pub dist: Vec<Vec<String>>,
    /// Labels from least to greatest; absent for an unordered space.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<SetJson>,
}

impl SpaceJson {
    pub fn from_space<T: Scalar>(x: &MetricSpace<T>) -> Self {
        SpaceJson {
            labels: x.labels().to_vec(),
            dist: x.matrix().iter().map(|r| texts(r)).collect(),
            order: x
                .order()
                .map(|o| o.iter().map(|&i| x.label(i).to_string()).collect()),
            delta: x.delta().map(SetJson::from_set),
        }
    }

    /// Builds the space (shape checks only; see [`MetricSpace::validate`]).
    pub fn to_space<T: Scalar>(&self) -> Result<MetricSpace<T>> {
        let dist = self
            .dist
            .iter()
            .map(|r| parse_all(r))
            .collect::<Result<Vec<Vec<T>>>>()?;
        let order = match &self.order {
            None => None,
            Some(o) => Some(
                o.iter()
                    .map(|l| {
                        self.labels
                            .iter()
                            .position(|m| m == l)
                            .ok_or_else(|| Error::InvalidSpace(format!("order names unknown point {l:?}")))
                    })
                    .collect::<Result<Vec<usize>>>()?,
            ),
        };
        let mut x = MetricSpace::new(self.labels.clone(), dist, order)?;
        if let Some(d) = &self.delta {
            x = x.with_delta(d.to_set()?);
        }
        Ok(x)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeJson {
    pub prefix: Vec<String>,
    pub bounded: bool,
}

impl CodeJson {
    pub fn from_code<T: Scalar>(c: &DvsCode<T>) -> Self {
        CodeJson {
            prefix: texts(&c.prefix),
            bounded: c.bounded,
        }
    }

    pub fn to_code<T: Scalar>(&self) -> Result<DvsCode<T>> {
        Ok(DvsCode::new(parse_all(&self.prefix)?, self.bounded))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WitnessJson {
    Ratio { r: String },
    Matrix { matrix: [String; 4] },
}

impl WitnessJson {
    pub fn from_scaling<T: Scalar>(w: &ScalingWitness<T>) -> Self {
        WitnessJson::Ratio { r: w.ratio.to_text() }
    }

    pub fn from_matrix(m: &RatMatrix) -> Self {
        WitnessJson::Matrix {
            matrix: m.entries().map(|q| q.to_text()),
        }
    }

    pub fn to_matrix(&self) -> Result<RatMatrix> {
        match self {
            WitnessJson::Matrix { matrix } => {
                let [a, b, c, d] = matrix
                    .clone()
                    .map(|s| BigRational::parse_text(&s));
                RatMatrix::new(a?, b?, c?, d?)
            }
            WitnessJson::Ratio { .. } => Err(Error::Malformed("expected a matrix witness".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RqJson {
    pub q: String,
    /// Every `[x, y]` with `R_q(x, y)`.
    pub holds: Vec<[String; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelJson {
    pub universe: Vec<String>,
    pub c: String,
    /// Every defined `[x, y, x + y]`.
    pub plus: Vec<[String; 3]>,
    pub rq: Vec<RqJson>,
}

impl ModelJson {
    pub fn from_model<T: Scalar>(m: &EncodedModel<T>) -> Self {
        let u = |i: usize| m.universe[i].to_text();
        let n = m.universe.len();
        let mut plus = Vec::new();
        for x in 0..n {
            for y in 0..n {
                if let Some(s) = m.plus[x][y] {
                    plus.push([u(x), u(y), u(s)]);
                }
            }
        }
        let rq = m
            .sample
            .iter()
            .enumerate()
            .map(|(qi, q)| {
                let mut holds = Vec::new();
                for x in 0..n {
                    for y in 0..n {
                        if m.r(qi, x, y) {
                            holds.push([u(x), u(y)]);
                        }
                    }
                }
                RqJson { q: q.to_text(), holds }
            })
            .collect();
        ModelJson {
            universe: texts(&m.universe),
            c: u(m.c),
            plus,
            rq,
        }
    }

    pub fn to_model<T: Scalar>(&self) -> Result<EncodedModel<T>> {
        let universe: Vec<T> = parse_all(&self.universe)?;
        let n = universe.len();
        let index = |s: &str| -> Result<usize> {
            let v = T::parse_text(s)?;
            universe
                .iter()
                .position(|u| u.partial_cmp(&v) == Some(std::cmp::Ordering::Equal))
                .ok_or_else(|| Error::Malformed(format!("{s} is not in the universe")))
        };
        let c = index(&self.c)?;
        let mut plus = vec![vec![None; n]; n];
        for [x, y, s] in &self.plus {
            plus[index(x)?][index(y)?] = Some(index(s)?);
        }
        let mut sample = Vec::with_capacity(self.rq.len());
        let mut rq = Vec::with_capacity(self.rq.len());
        for t in &self.rq {
            sample.push(BigRational::parse_text(&t.q)?);
            let mut table = vec![vec![false; n]; n];
            for [x, y] in &t.holds {
                table[index(x)?][index(y)?] = true;
            }
            rq.push(table);
        }
        EncodedModel::from_parts(universe, c, sample, plus, rq)
    }
}
