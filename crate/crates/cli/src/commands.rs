//! The subcommands, as functions from a resolved configuration to results.
//!
//! Nothing here writes files; see the crate root for output handling.

use std::sync::Arc;

use blocksep::catalog::{CatalogEntry, E3Family, E3Kind, NAMES};
use blocksep::dynamics::{compare_block_orbits, full_field_into, integrate, phase_point, ComparisonReport, DynamicsError};
use blocksep::geometry::{
    block_eisenhart_residual_against, block_levi_civita_residual, characteristic_condition, haantjes, killing_residual,
    poisson_bracket, tsn_residuals, PhaseScalar,
};
use blocksep::sampling::{rejection_sample, CoordinateBox};
use blocksep::{Expression, PhasePoint, TwistedSystem};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{Perturbation, Resolved, RunConfig};
use crate::report::{Check, VerificationReport};

#[derive(Debug, Error)]
pub enum CommandError {
    /// The configuration does not fit the command.
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
}

fn system<'a>(cfg: &'a RunConfig, command: &str) -> Result<&'a CatalogEntry, CommandError> {
    match &cfg.system {
        Resolved::System(e) => Ok(e),
        Resolved::Metric(m) => Err(CommandError::Usage(format!("`{command}` needs a twisted system; {} is a metric family", m.name))),
    }
}

/// Momentum column name for a coordinate: `q3` becomes `p3`, `r` becomes `p_r`.
pub fn momentum_name(q: &str) -> String {
    match q.strip_prefix('q') {
        Some(rest) if !rest.is_empty() => format!("p{rest}"),
        _ => format!("p_{q}"),
    }
}

pub fn list() -> Vec<(&'static str, &'static str)> {
    let about = |name: &str| match name {
        "pendula" => "two pendula and a free particle, twisted by a polynomial Stäckel matrix",
        "oscillators" => "harmonic oscillators with constant twist (closed-form solution)",
        "calogero4" => "four-body Calogero system in hyperspherical blocks {r}, {phi1}, {phi2, phi3}",
        "e3-case-i" => "Euclidean 3-space family, Case i (blocks {u}, {v, w})",
        "e3-case-ii" => "Euclidean 3-space family, Case ii (blocks {u}, {v, w})",
        _ => "",
    };
    NAMES.iter().map(|n| (*n, about(n))).collect()
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Set when integration stopped early; `rows` then hold the completed samples.
    pub failure: Option<String>,
    pub report: VerificationReport,
}

impl Simulation {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// Integrates the full system (with clocks) sample by sample and tabulates
/// the state, the clocks and every first integral.
pub fn simulate(cfg: &RunConfig) -> Result<Simulation, CommandError> {
    let e = system(cfg, "simulate")?;
    let sys = &e.system;
    let p0 = cfg.initial.clone().unwrap_or_else(|| e.initial.clone());
    let (n, nb) = (sys.dim(), sys.n_blocks());
    let names = sys.structure().names();
    let mut header = vec!["t".to_string()];
    header.extend(names.iter().cloned());
    header.extend(names.iter().map(|q| momentum_name(q)));
    header.extend((1..=nb).map(|r| format!("tau_{r}")));
    header.push("H".into());
    header.extend((2..=nb).map(|a| format!("K_{a}")));

    let row = |t: f64, y: &[f64]| -> Result<Vec<f64>, String> {
        let k = sys.first_integrals(&phase_point(sys, y)).map_err(|e| e.to_string())?;
        let mut r = Vec::with_capacity(1 + y.len() + nb);
        r.push(t);
        r.extend_from_slice(y);
        r.extend(k);
        Ok(r)
    };

    let (t0, t1) = cfg.t_span;
    let m = cfg.output.samples;
    let mut y = p0.to_state();
    y.extend(std::iter::repeat_n(0.0, nb));
    let mut rows = Vec::with_capacity(m);
    let mut failure = None;
    match row(t0, &y) {
        Ok(r) => rows.push(r),
        Err(msg) => failure = Some(format!("at t = {t0}: {msg}")),
    }
    let mut t_prev = t0;
    for k in 1..m {
        if failure.is_some() {
            break;
        }
        let t = t0 + (t1 - t0) * k as f64 / (m - 1) as f64;
        let step = integrate(|_, y, dy| full_field_into(sys, y, dy), &y, (t_prev, t), &cfg.integrator);
        match step {
            Ok(traj) => {
                y = traj.last_state().to_vec();
                match row(t, &y) {
                    Ok(r) => rows.push(r),
                    Err(msg) => failure = Some(format!("at t = {t}: {msg}")),
                }
                t_prev = t;
            }
            Err(err) => failure = Some(err.to_string()),
        }
    }

    let mut report = VerificationReport::new("simulate");
    report.info("system", e.name.clone());
    report.info("samples", format!("{} of {m}", rows.len()));
    if let Some(first) = rows.first() {
        let k0 = &first[1 + 2 * n + nb..];
        for (a, &c) in k0.iter().enumerate() {
            report.info(if a == 0 { "c_1 = H(P0)".to_string() } else { format!("c_{} = K_{}(P0)", a + 1, a + 1) }, format!("{c:.12e}"));
        }
        let mut worst = 0.0f64;
        let mut at = None;
        for r in &rows {
            for (a, &c) in k0.iter().enumerate() {
                let d = (r[1 + 2 * n + nb + a] - c).abs() / c.abs().max(1.0);
                if at.is_none() || d > worst {
                    worst = d;
                    at = Some(vec![r[0]]);
                }
            }
        }
        report.push(Check::new("first-integral drift", worst, cfg.thresholds.drift).at(at).note("relative to max(1, |c_a|); worst point is the time t"));
    }
    Ok(Simulation { header, rows, failure, report })
}

/// Block orbit comparison with one check per block component.
pub fn compare(cfg: &RunConfig) -> Result<(ComparisonReport, VerificationReport), CommandError> {
    let e = system(cfg, "compare")?;
    let p0 = cfg.initial.clone().unwrap_or_else(|| e.initial.clone());
    let mut rep = compare_block_orbits(&e.system, &p0, cfg.block, cfg.t_span, &cfg.compare_config()).map_err(|err| match err {
        DynamicsError::NoSuchBlock { .. } | DynamicsError::EmptySegment { .. } => CommandError::Usage(err.to_string()),
        other => CommandError::Numerical(other.to_string()),
    })?;
    let names = e.system.structure().block_names(cfg.block);
    rep.labels = names.iter().cloned().chain(names.iter().map(|q| momentum_name(q))).collect();
    let mut v = VerificationReport::new(format!("compare block {}", cfg.block + 1));
    v.info("system", e.name.clone());
    v.info("separation constants", rep.constants.iter().map(|c| format!("{c:.12e}")).collect::<Vec<_>>().join(", "));
    v.info("compared t range", format!("[{}, {}]", rep.t_span.0, rep.t_compared));
    v.info("tau range", format!("[{:.6}, {:.6}]", rep.tau_range.0, rep.tau_range.1));
    v.info("matched samples", rep.samples.to_string());
    v.info(
        "sign changes of alpha",
        if rep.sign_changes.is_empty() { "none".into() } else { format!("{:.6?}", rep.sign_changes) },
    );
    v.info("restricted to initial segment", rep.restricted.to_string());
    v.info("tolerances", format!("rtol {:e}, atol {:e}", rep.config.integrator.rtol, rep.config.integrator.atol));
    for (j, label) in rep.labels.iter().enumerate() {
        let k = rep.series.full.iter().zip(&rep.series.reduced).enumerate().fold((0usize, -1.0f64), |acc, (k, (a, b))| {
            let d = (a[j] - b[j]).abs();
            if d > acc.1 {
                (k, d)
            } else {
                acc
            }
        });
        let at = rep.series.t.get(k.0).map(|t| vec![*t]);
        v.push(Check::new(format!("sup |{label}| discrepancy"), rep.sup[j], cfg.thresholds.compare).at(at).note(format!("rms {:.3e}", rep.rms[j])));
    }
    Ok((rep, v))
}

fn perturbed(sys: &TwistedSystem, p: &Perturbation) -> Result<Arc<TwistedSystem>, CommandError> {
    let e = sys.stackel().entry(p.row, p.column);
    let bumped = Expression::parse(&format!("({e}) + ({:?})", p.delta)).expect("printed expressions reparse");
    sys.with_stackel(sys.stackel().with_entry(p.row, p.column, bumped))
        .map(Arc::new)
        .map_err(|err| CommandError::Usage(format!("perturbed Stäckel matrix: {err}")))
}

fn state(pt: &PhasePoint) -> Vec<f64> {
    pt.to_state()
}

/// The residual battery for a twisted system.
///
/// With a perturbation, the integrals come from the perturbed Stäckel matrix
/// while `H` stays the configured one.
pub fn verify(cfg: &RunConfig) -> Result<VerificationReport, CommandError> {
    let e = match &cfg.system {
        Resolved::Metric(m) => return curvature_report(cfg, m),
        Resolved::System(e) => e,
    };
    let th = &cfg.thresholds;
    let sys = &e.system;
    let n = sys.n_blocks();
    let integrals = match &cfg.perturb {
        Some(p) => perturbed(sys, p)?,
        None => sys.clone(),
    };
    let mut rep = VerificationReport::new("verify");
    rep.info("system", e.name.clone());
    rep.info("domain", e.domain.description.clone());
    rep.info("points", cfg.points.to_string());
    rep.info("seed", cfg.seed.to_string());
    if let Some(p) = &cfg.perturb {
        rep.info("perturbation", format!("S[{}][{}] += {:?} in the integrals only", p.row + 1, p.column + 1, p.delta));
    }

    let phase = e.domain.sample_phase(cfg.points, cfg.seed, 1.0);
    if phase.len() < cfg.points {
        rep.push(Check::new("probe sampling", f64::NAN, 0.0).note(format!("only {} of {} points found in the domain", phase.len(), cfg.points)));
    }
    let positions: Vec<Vec<f64>> = phase.iter().map(|p| p.q.clone()).collect();

    if n > 1 {
        let h = PhaseScalar::integral(sys.clone(), 0);
        let k: Vec<PhaseScalar> = (0..n).map(|a| PhaseScalar::integral(integrals.clone(), a)).collect();
        let results: Vec<_> = phase
            .par_iter()
            .map(|pt| {
                let mut worst = 0.0f64;
                for a in 1..n {
                    worst = worst.max(poisson_bracket(&h, &k[a], pt)?.abs());
                    for b in a + 1..n {
                        worst = worst.max(poisson_bracket(&k[a], &k[b], pt)?.abs());
                    }
                }
                Ok::<_, blocksep::geometry::GeometryError>(worst)
            })
            .collect();
        rep.push(Check::sweep("involution {H,K_a}, {K_a,K_b}", th.bracket, phase.iter().map(state).zip(results)));

        let results: Vec<_> = positions
            .par_iter()
            .map(|q| (1..n).try_fold(0.0f64, |w, a| block_eisenhart_residual_against(sys, &integrals, a, q).map(|r| w.max(r))))
            .collect();
        rep.push(Check::sweep("block Eisenhart", th.residual, positions.iter().cloned().zip(results)));
    }

    let lc: Vec<_> = positions.par_iter().map(|q| block_levi_civita_residual(sys, q)).collect();
    rep.push(Check::sweep(
        "block Levi-Civita (metric)",
        th.residual,
        positions.iter().cloned().zip(lc.iter().map(|r| r.as_ref().map(|r| r.metric).map_err(|e| e.clone()))),
    ));
    rep.push(Check::sweep(
        "block Levi-Civita (potential)",
        th.residual,
        positions.iter().cloned().zip(lc.iter().map(|r| r.as_ref().map(|r| r.potential).map_err(|e| e.clone()))),
    ));

    let sep: Vec<_> = phase
        .par_iter()
        .map(|pt| {
            let c = sys.separation_constants(pt)?;
            (0..n).try_fold(0.0f64, |w, r| sys.reduced_hamiltonian(r, &c, pt).map(|v: f64| w.max(v.abs())))
        })
        .collect();
    rep.push(Check::sweep("separated equations |H_r - S^a_r c_a|", th.residual, phase.iter().map(state).zip(sep)));

    if let Some(reference) = &e.cartesian {
        let region = CoordinateBox::new(vec![(-2.0, 2.0); reference.metric.dim()]);
        let xs = rejection_sample(&region, cfg.points, cfg.seed, |x| reference.regular(x));
        let momenta = rejection_sample(&CoordinateBox::new(vec![(-1.0, 1.0); xs.first().map_or(0, Vec::len)]), xs.len(), cfg.seed + 1, |_| true);
        let v = reference.potential.bind(reference.metric.names()).expect("potential binds to its own coordinates");
        for (label, k) in [("k1", &reference.k1), ("k2", &reference.k2)] {
            let res: Vec<_> = xs.par_iter().map(|x| killing_residual(&reference.metric, k, x)).collect();
            rep.push(Check::sweep(format!("Killing equation {label}"), th.killing, xs.iter().cloned().zip(res)));
            let res: Vec<_> = xs
                .par_iter()
                .map(|x| {
                    let c = characteristic_condition(k, &reference.potential, Some(&reference.metric), x)?;
                    let scale = 1.0 + v.eval(x).map_err(|source| blocksep::geometry::GeometryError::Eval { entry: "potential".into(), source })?.abs();
                    Ok::<_, blocksep::geometry::GeometryError>(c / (scale * scale))
                })
                .collect();
            rep.push(
                Check::sweep(format!("characteristic condition d({label} dV)"), th.normality, xs.iter().cloned().zip(res))
                    .note("relative to (1 + |V|)^2"),
            );
            let res: Vec<_> = xs.par_iter().map(|x| tsn_residuals(k, &reference.metric, x).map(|t| t.iter().fold(0.0f64, |a, b| a.max(*b)))).collect();
            rep.push(Check::sweep(format!("TSN conditions {label}"), th.normality, xs.iter().cloned().zip(res)));
        }
        let res: Vec<_> = xs.par_iter().map(|x| haantjes(&reference.k2, Some(&reference.metric), x).map(|h| h.condition_residual)).collect();
        rep.push(Check::sweep("Haantjes condition k2", th.normality, xs.iter().cloned().zip(res)));

        let res: Vec<_> = xs
            .par_iter()
            .zip(&momenta)
            .map(|(x, p)| {
                let pt = PhasePoint::new(x.clone(), p.clone());
                let cart = reference.integrals_at(&pt).map_err(|e| e.to_string())?;
                let k = integrals.first_integrals(&reference.to_spherical(&pt)).map_err(|e| e.to_string())?;
                Ok::<_, String>(k.iter().zip(cart).fold(0.0f64, |w, (a, b)| w.max((a - b).abs() / (1.0 + b.abs()))))
            })
            .collect();
        rep.push(Check::sweep("Cartesian vs spherical integrals (relative)", th.agreement, xs.iter().cloned().zip(res)));
    }
    Ok(rep)
}

/// Flatness and leaf-curvature checks for an E³ family.
pub fn curvature(cfg: &RunConfig) -> Result<VerificationReport, CommandError> {
    match &cfg.system {
        Resolved::Metric(m) => curvature_report(cfg, m),
        Resolved::System(e) => Err(CommandError::Usage(format!("`curvature` needs an e3 family; {} is a twisted system", e.name))),
    }
}

fn curvature_report(cfg: &RunConfig, fam: &E3Family) -> Result<VerificationReport, CommandError> {
    let th = &cfg.thresholds;
    let mut rep = VerificationReport::new("curvature");
    rep.info("family", fam.name.clone());
    rep.info("parameters", format!("{:?}", fam.kind));
    rep.info("f", fam.f.to_string());
    rep.info("l", fam.l.to_string());
    rep.info("points", cfg.points.to_string());
    rep.info("seed", cfg.seed.to_string());
    let pts = fam.sample(cfg.points, Some(cfg.seed));
    if pts.len() < cfg.points {
        rep.push(Check::new("probe sampling", f64::NAN, 0.0).note(format!("only {} of {} points with f, l nonzero", pts.len(), cfg.points)));
    }
    let res: Vec<_> = pts.par_iter().map(|q| fam.riemann_max(q)).collect();
    rep.push(Check::sweep("max |Riemann|", th.riemann, pts.iter().cloned().zip(res)));

    let residuals: Vec<_> = pts.par_iter().map(|q| fam.residuals(q)).collect();
    if let Some(Ok(first)) = residuals.first() {
        for (j, (label, _)) in first.iter().enumerate() {
            let vals = residuals.iter().map(|r| r.as_ref().map(|v| v[j].1.abs()).map_err(|e| e.clone()));
            rep.push(Check::sweep(format!("equation {label}"), th.residual, pts.iter().cloned().zip(vals)));
        }
    } else if let Some(Err(err)) = residuals.first() {
        rep.push(Check::new("equations", f64::NAN, th.residual).at(pts.first().cloned()).note(format!("evaluation failed: {err}")));
    }

    let rel = |got: f64, want: f64| (got - want).abs() / want.abs().max(1e-3);
    let res: Vec<_> = pts.par_iter().map(|q| Ok::<_, blocksep::geometry::GeometryError>(rel(fam.leaf_scalar_curvature(q)?, fam.expected_leaf_curvature(q)?))).collect();
    let expected = match fam.kind {
        E3Kind::CaseI { .. } => "0",
        E3Kind::CaseII { .. } => "2 l^2 c1^2",
    };
    rep.push(Check::sweep(format!("leaf scalar curvature vs {expected}"), th.leaf, pts.iter().cloned().zip(res)).note("relative"));
    let res: Vec<_> = pts
        .par_iter()
        .map(|q| Ok::<_, blocksep::geometry::GeometryError>(rel(fam.leaf_mixed_component(q)?, fam.expected_leaf_mixed_component(q)?)))
        .collect();
    let expected = match fam.kind {
        E3Kind::CaseI { .. } => "0",
        E3Kind::CaseII { .. } => "c1^2 / f^2",
    };
    rep.push(Check::sweep(format!("leaf R^v_wvw vs {expected}"), th.leaf, pts.iter().cloned().zip(res)).note("relative"));
    Ok(rep)
}
