use std::f64::consts::PI;
use std::sync::Arc;

use super::transform::{CanonicalTransform, Chain, HyperSpherical4, LinearMap, PointMap};
use super::{CatalogEntry, CatalogError, Domain};
use crate::expr::Expression;
use crate::geometry::{GeometryError, MetricField, PhaseScalar, TensorField2, Variance};
use crate::linalg::Mat;
use crate::model::{build_system, BlockStructure, NaturalBlock, PhasePoint, ProbeSet, StackelMatrix};
use crate::sampling::CoordinateBox;

const CARTESIAN: [&str; 4] = ["x1", "x2", "x3", "x4"];
/// Width of the excluded bands around `φ_1, φ_2 ∈ {0, π}`.
const ANGLE_BAND: f64 = 0.1;
/// Minimal particle separation `|x_i − x_j|` inside the sampling domain.
const MIN_SEPARATION: f64 = 0.05;

/// Cartesian `x` to hyperspherical `(r, φ_1, φ_2, φ_3)` through centre-of-mass coordinates `z`.
pub type CalogeroTransform = CanonicalTransform<Chain<LinearMap, HyperSpherical4>>;

/// `z = A x` with `z^4` proportional to the centre of mass.
fn jacobi_matrix() -> Mat<f64> {
    let (s2, s6, s12) = (2f64.sqrt(), 6f64.sqrt(), 12f64.sqrt());
    Mat::from_rows(&[
        vec![1.0 / s2, -1.0 / s2, 0.0, 0.0],
        vec![1.0 / s6, 1.0 / s6, -2.0 / s6, 0.0],
        vec![1.0 / s12, 1.0 / s12, 1.0 / s12, -3.0 / s12],
        vec![0.5, 0.5, 0.5, 0.5],
    ])
}

fn transform() -> CalogeroTransform {
    CanonicalTransform::new(Chain(LinearMap::new(jacobi_matrix()).expect("orthogonal"), HyperSpherical4))
}

fn pairs() -> impl Iterator<Item = (usize, usize)> {
    (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j)))
}

/// `Σ_{i<j} (x_i − x_j)^{-2}` over `x1..x4`.
pub fn calogero_potential() -> Expression {
    let terms: Vec<String> = pairs().map(|(i, j)| format!("1/(x{}-x{})^2", i + 1, j + 1)).collect();
    Expression::parse(&terms.join(" + ")).expect("generated potential")
}

/// The potential at `r = 1`, `φ_1 = π/2`, as a function of `φ_2, φ_3`.
fn sphere_potential() -> Expression {
    let a = jacobi_matrix();
    let z = ["sin(phi2)*sin(phi3)", "sin(phi2)*cos(phi3)", "cos(phi2)"];
    let terms: Vec<String> = pairs()
        .map(|(i, j)| {
            // x = Aᵀ z, and z^4 drops out of differences
            let diff: Vec<String> =
                (0..3).map(|k| format!("({:.17e})*{}", a[(k, i)] - a[(k, j)], z[k])).collect();
            format!("1/({})^2", diff.join(" + "))
        })
        .collect();
    Expression::parse(&terms.join(" + ")).expect("generated potential")
}

fn x(i: usize) -> String {
    format!("x{}", i + 1)
}

/// Contravariant Cartesian components of the quadratic part of the second integral.
pub fn k1_components() -> Vec<Vec<String>> {
    let all_pairs = pairs().map(|(j, k)| format!("{}*{}", x(j), x(k))).collect::<Vec<_>>().join(" + ");
    (0..4)
        .map(|i| {
            (0..4)
                .map(|j| {
                    if i == j {
                        pairs()
                            .filter(|&(a, b)| a != i && b != i)
                            .map(|(a, b)| format!("{}*{}", x(a), x(b)))
                            .collect::<Vec<_>>()
                            .join(" + ")
                    } else {
                        let rest: Vec<usize> = (0..4).filter(|&k| k != i && k != j).collect();
                        let (l, m) = (x(rest[0]), x(rest[1]));
                        format!("0.5*({l}^2 + {m}^2 + {}*{} + {l}*{m} - ({all_pairs}))", x(i), x(j))
                    }
                })
                .collect()
        })
        .collect()
}

/// `|x|² δ^{ij} − x^i x^j`.
pub fn k2_components() -> Vec<Vec<String>> {
    let norm = (0..4).map(|i| format!("{}^2", x(i))).collect::<Vec<_>>().join(" + ");
    (0..4)
        .map(|i| {
            (0..4)
                .map(|j| if i == j { format!("{norm} - {}^2", x(i)) } else { format!("-{}*{}", x(i), x(j)) })
                .collect()
        })
        .collect()
}

/// The Cartesian form of the Calogero system and its two extra integrals.
#[derive(Debug, Clone)]
pub struct CalogeroReference {
    pub transform: CalogeroTransform,
    pub metric: MetricField,
    pub potential: Expression,
    pub hamiltonian: PhaseScalar,
    pub k1: TensorField2,
    pub k2: TensorField2,
    /// Cartesian counterparts of the hyperspherical `K_1`, `K_2`.
    pub integrals: [PhaseScalar; 2],
}

impl CalogeroReference {
    fn new() -> Result<Self, GeometryError> {
        let v = calogero_potential();
        let metric = MetricField::euclidean(&CARTESIAN);
        let hamiltonian = PhaseScalar::new(metric.field().clone(), &v)?;
        let k1 = TensorField2::parse(&CARTESIAN, &k1_components(), Variance::Contravariant)?;
        let k2 = TensorField2::parse(&CARTESIAN, &k2_components(), Variance::Contravariant)?;
        let parse = |s: String| Expression::parse(&s).map_err(|e| GeometryError::Parse(e.to_string()));
        let pair_sum = pairs().map(|(i, j)| format!("{}*{}", x(i), x(j))).collect::<Vec<_>>().join(" + ");
        let norm = (0..4).map(|i| format!("{}^2", x(i))).collect::<Vec<_>>().join(" + ");
        let w1 = parse(format!("({pair_sum} - 0.5*({norm}))*({v})"))?;
        let w2 = parse(format!("({norm})*({v})"))?;
        let integrals = [PhaseScalar::new(k1.clone(), &w1)?, PhaseScalar::new(k2.clone(), &w2)?];
        Ok(Self { transform: transform(), metric, potential: v, hamiltonian, k1, k2, integrals })
    }

    /// `(H, K_1, K_2)` at a Cartesian phase point.
    pub fn integrals_at(&self, pt: &PhasePoint) -> Result<[f64; 3], GeometryError> {
        Ok([
            self.hamiltonian.value(&pt.q, &pt.p)?,
            self.integrals[0].value(&pt.q, &pt.p)?,
            self.integrals[1].value(&pt.q, &pt.p)?,
        ])
    }

    pub fn to_spherical(&self, pt: &PhasePoint) -> PhasePoint {
        self.transform.to_new(pt)
    }

    pub fn to_cartesian(&self, pt: &PhasePoint) -> Result<PhasePoint, crate::linalg::LinalgError> {
        self.transform.to_old(pt)
    }

    pub fn min_separation(x: &[f64]) -> f64 {
        pairs().map(|(i, j)| (x[i] - x[j]).abs()).fold(f64::INFINITY, f64::min)
    }

    /// Whether a Cartesian point avoids collisions and the hyperspherical bands.
    pub fn regular(&self, x: &[f64]) -> bool {
        let s = self.transform.map.forward(x);
        Self::min_separation(x) > MIN_SEPARATION && in_band(s[1]) && in_band(s[2]) && s[0] > 0.0
    }
}

fn in_band(phi: f64) -> bool {
    phi > ANGLE_BAND && phi < PI - ANGLE_BAND
}

/// Four particles on a line with inverse-square pair repulsion, in
/// hyperspherical coordinates with blocks `{r}`, `{φ_1}`, `{φ_2, φ_3}`.
pub fn calogero4() -> CatalogEntry {
    try_calogero4().expect("calogero data is valid")
}

fn try_calogero4() -> Result<CatalogEntry, CatalogError> {
    let structure = BlockStructure::new(vec![
        vec!["r".into()],
        vec!["phi1".into()],
        vec!["phi2".into(), "phi3".into()],
    ])?;
    let stackel = StackelMatrix::parse(&[
        vec!["1", "0", "-1/r^2"],
        vec!["0", "1/(2*sin(phi1)^2)", "(2*sin(phi1)^2-1)/(2*sin(phi1)^2)"],
        vec!["0", "-0.5", "0.5"],
    ])?;
    let blocks = vec![
        NaturalBlock::parse_diagonal(&["1"], "0")?,
        NaturalBlock::parse_diagonal(&["1"], "0")?,
        NaturalBlock::diagonal(
            vec![Expression::constant(1.0), Expression::parse("1/sin(phi2)^2").expect("fixed entry")],
            sphere_potential(),
        ),
    ];
    let lo = ANGLE_BAND;
    let hi = PI - ANGLE_BAND;
    let region = CoordinateBox::new(vec![(0.5, 2.0), (lo, hi), (lo, hi), (-PI, PI)]);
    let probes = ProbeSet::points(vec![vec![1.0, 1.2, 1.0, 0.4]]).with_region(region.clone());
    let system = Arc::new(build_system(structure, stackel, blocks, probes)?);
    let reference = Arc::new(CalogeroReference::new()?);
    let r = reference.clone();
    let domain = Domain::new(region, "0.5 ≤ r ≤ 2, φ_1, φ_2 ∈ [0.1, π − 0.1], |x_i − x_j| > 0.05", move |q| {
        CalogeroReference::min_separation(&r.transform.map.backward(q)) > MIN_SEPARATION
    });
    Ok(CatalogEntry {
        name: "calogero4".into(),
        system,
        initial: PhasePoint::new(vec![2.0, 1.5, 2.4, -2.5], vec![0.05, -0.25, 0.03, -0.5]),
        domain,
        cartesian: Some(reference),
        solution: None,
    })
}
