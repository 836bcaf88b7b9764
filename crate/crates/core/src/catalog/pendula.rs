use std::sync::Arc;

use super::{CatalogEntry, Domain};
use crate::model::{build_system, BlockStructure, NaturalBlock, PhasePoint, ProbeSet, StackelMatrix};
use crate::sampling::CoordinateBox;

/// Three twisted one-degree-of-freedom blocks: two pendula and a free particle.
pub fn pendula() -> CatalogEntry {
    let structure = BlockStructure::with_sizes(&[1, 1, 1]).expect("fixed sizes");
    let stackel = StackelMatrix::parse(&[
        vec!["2", "1+q1", "2*q1^2+2"],
        vec!["3", "q2", "q2^3+2"],
        vec!["4", "q3", "q3^2+1"],
    ])
    .expect("fixed entries");
    let blocks = vec![
        NaturalBlock::parse_diagonal(&["1"], "-0.5*cos(q1)").expect("fixed block"),
        NaturalBlock::parse_diagonal(&["1"], "-0.5*cos(q2)").expect("fixed block"),
        NaturalBlock::parse_diagonal(&["1"], "0").expect("fixed block"),
    ];
    let region = CoordinateBox::new(vec![(-0.5, 0.5); 3]);
    let probes = ProbeSet::points(vec![vec![0.0; 3], vec![0.2, -0.2, 0.0]]).with_region(region.clone());
    let system = Arc::new(build_system(structure, stackel, blocks, probes).expect("pendula data is valid"));
    let sys = system.clone();
    // α^1 vanishes at the origin, so probe points keep every twist away from zero
    let domain = Domain::new(region, "|q^i| ≤ 0.5, |α^r| ≥ 0.05, cond(S) ≤ 1e3", move |q| match sys.twist_rows(q) {
        Ok(ci) => ci.cond <= 1e3 && ci.inverse.row(0).iter().all(|a| a.abs() >= 0.05),
        Err(_) => false,
    });
    CatalogEntry {
        name: "pendula".into(),
        system,
        initial: PhasePoint::at_rest(vec![0.2, -0.2, 0.0]),
        domain,
        cartesian: None,
        solution: None,
    }
}
