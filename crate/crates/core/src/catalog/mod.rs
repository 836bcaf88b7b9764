//! Worked systems: twisted pendula, constant-twist oscillators, the
//! four-body Calogero system and the E³ metric families.

mod calogero;
mod e3;
mod oscillators;
mod pendula;
mod transform;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::model::{ModelError, PhasePoint, TwistedSystem};
use crate::sampling::{rejection_sample, CoordinateBox};

pub use calogero::{calogero4, calogero_potential, k1_components, k2_components, CalogeroReference, CalogeroTransform};
pub use e3::{e3_case_i, e3_case_ii, CaseI, CaseII, E3Family, E3Kind};
pub use oscillators::{oscillators, OscillatorSolution};
pub use pendula::pendula;
pub use transform::{CanonicalTransform, Chain, HyperSpherical4, LinearMap, PointMap};

/// Names accepted by [`lookup`].
pub const NAMES: [&str; 5] = ["pendula", "oscillators", "calogero4", "e3-case-i", "e3-case-ii"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("unknown catalog entry `{0}`")]
    Unknown(String),
}

/// Region of configuration space away from declared singular sets.
#[derive(Clone)]
pub struct Domain {
    pub region: CoordinateBox,
    pub description: String,
    accept: Arc<dyn Fn(&[f64]) -> bool + Send + Sync>,
}

impl fmt::Debug for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Domain").field("region", &self.region).field("description", &self.description).finish()
    }
}

impl Domain {
    pub fn new(region: CoordinateBox, description: impl Into<String>, accept: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        Self { region, description: description.into(), accept: Arc::new(accept) }
    }

    pub fn contains(&self, q: &[f64]) -> bool {
        q.len() == self.region.dim()
            && self.region.bounds.iter().zip(q).all(|(&(lo, hi), &x)| x >= lo && x <= hi)
            && (self.accept)(q)
    }

    /// `count` seeded points inside the domain.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        rejection_sample(&self.region, count, seed, |q| (self.accept)(q))
    }

    /// Seeded phase points: positions from the domain, momenta uniform in `[-p_max, p_max]`.
    pub fn sample_phase(&self, count: usize, seed: u64, p_max: f64) -> Vec<PhasePoint> {
        let n = self.region.dim();
        let momenta = CoordinateBox::new(vec![(-p_max, p_max); n]);
        let mut rng = crate::sampling::rng(seed ^ 0x9e37_79b9_7f4a_7c15);
        self.sample(count, seed).into_iter().map(|q| PhasePoint::new(q, momenta.sample(&mut rng))).collect()
    }
}

/// A catalog twisted system with its recommended data.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub system: Arc<TwistedSystem>,
    pub initial: PhasePoint,
    pub domain: Domain,
    pub cartesian: Option<Arc<CalogeroReference>>,
    pub solution: Option<OscillatorSolution>,
}

/// Either kind of catalog item.
#[derive(Debug, Clone)]
pub enum Entry {
    System(CatalogEntry),
    Metric(E3Family),
}

/// Default-parameter entry by CLI name.
pub fn lookup(name: &str) -> Result<Entry, CatalogError> {
    Ok(match name {
        "pendula" => Entry::System(pendula()),
        "oscillators" => Entry::System(oscillators(&[1.0, 2.0, 3.0], &[1.0, 0.5, 1.0 / 3.0])?),
        "calogero4" => Entry::System(calogero4()),
        "e3-case-i" => Entry::Metric(CaseI::flat()),
        "e3-case-ii" => Entry::Metric(CaseII::sphere()),
        other => return Err(CatalogError::Unknown(other.to_string())),
    })
}
