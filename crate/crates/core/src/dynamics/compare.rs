use super::{block_clock, block_state, integrate_full, integrate_reduced, DynamicsError, IntegratorConfig, IntegratorStats};
use crate::model::{PhasePoint, TwistedSystem};

/// What to do when `α^r` changes sign along the full orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignChangePolicy {
    /// Integrate the reduced flow over the whole range of `τ_r` (forward and
    /// backward from 0) and compare over the full time span.
    #[default]
    FullRange,
    /// Compare only up to the first sign change.
    RestrictToInitialSegment,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareConfig {
    pub integrator: IntegratorConfig,
    /// Matched samples, uniform in `t`; at least 500 are used.
    pub samples: usize,
    pub policy: SignChangePolicy,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self { integrator: IntegratorConfig::default(), samples: 1000, policy: SignChangePolicy::default() }
    }
}

/// Matched samples of the full-orbit projection and the reduced orbit.
#[derive(Debug, Clone, Default)]
pub struct ComparisonSeries {
    pub t: Vec<f64>,
    pub tau: Vec<f64>,
    /// Block state `[q_r, p_r]` of the full orbit at `t_k`.
    pub full: Vec<Vec<f64>>,
    /// Reduced orbit at `τ_r(t_k)`.
    pub reduced: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub block: usize,
    /// Component labels, block coordinates then momenta.
    pub labels: Vec<String>,
    pub sup: Vec<f64>,
    pub rms: Vec<f64>,
    pub samples: usize,
    pub t_span: (f64, f64),
    /// End of the compared segment (differs from `t_span.1` when restricted).
    pub t_compared: f64,
    pub tau_range: (f64, f64),
    pub constants: Vec<f64>,
    pub sign_changes: Vec<f64>,
    pub restricted: bool,
    pub config: CompareConfig,
    pub full_stats: IntegratorStats,
    pub reduced_stats: Vec<IntegratorStats>,
    pub series: ComparisonSeries,
}

impl ComparisonReport {
    /// Largest per-component sup discrepancy.
    pub fn max_sup(&self) -> f64 {
        self.sup.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_rms(&self) -> f64 {
        self.rms.iter().copied().fold(0.0, f64::max)
    }
}

/// Compares the block-`r` projection of the orbit of `H` through `p0` with the
/// orbit of `H̃_r` (constants `c = K(p0)`) reparametrised by the clock `τ_r`.
pub fn compare_block_orbits(
    sys: &TwistedSystem,
    p0: &PhasePoint,
    r: usize,
    t_span: (f64, f64),
    cfg: &CompareConfig,
) -> Result<ComparisonReport, DynamicsError> {
    let n = sys.n_blocks();
    if r >= n {
        return Err(DynamicsError::NoSuchBlock { block: r, n });
    }
    let dim = sys.dim();
    let c = sys.separation_constants(p0)?;
    let full = integrate_full(sys, p0, t_span, &cfg.integrator)?;
    let clock = block_clock(sys, &full, r)?;

    let (t0, mut t1) = t_span;
    let mut restricted = false;
    if cfg.policy == SignChangePolicy::RestrictToInitialSegment {
        if let Some(ts) = clock.first_sign_change() {
            if (ts - t0).abs() <= 1e-12 * (1.0 + t0.abs()) {
                return Err(DynamicsError::EmptySegment { block: r, t: ts });
            }
            t1 = ts;
            restricted = true;
        }
    }

    let count = cfg.samples.max(500);
    let t: Vec<f64> = (0..count).map(|k| t0 + (t1 - t0) * k as f64 / (count - 1) as f64).collect();
    let tau: Vec<f64> = t.iter().map(|&s| clock.tau(s)).collect();
    let tau_min = tau.iter().copied().fold(0.0, f64::min);
    let tau_max = tau.iter().copied().fold(0.0, f64::max);

    let b0 = block_state(sys, r, p0);
    let fwd = if tau_max > 0.0 { Some(integrate_reduced(sys, r, &c, &b0, (0.0, tau_max), &cfg.integrator)?) } else { None };
    let back = if tau_min < 0.0 { Some(integrate_reduced(sys, r, &c, &b0, (0.0, tau_min), &cfg.integrator)?) } else { None };

    let range = sys.structure().range(r);
    let m = range.len();
    let mut sup = vec![0.0f64; 2 * m];
    let mut sq = vec![0.0f64; 2 * m];
    let mut series = ComparisonSeries { t: t.clone(), tau: tau.clone(), ..Default::default() };
    for (&tk, &sk) in t.iter().zip(&tau) {
        let y = full.interpolate(tk);
        let proj: Vec<f64> = range.clone().chain(range.clone().map(|k| dim + k)).map(|k| y[k]).collect();
        let red = match (sk, &fwd, &back) {
            (s, Some(f), _) if s >= 0.0 => f.interpolate(s.min(tau_max)),
            (s, _, Some(b)) if s < 0.0 => b.interpolate(s.max(tau_min)),
            _ => b0.clone(),
        };
        for j in 0..2 * m {
            let d = (proj[j] - red[j]).abs();
            sup[j] = sup[j].max(d);
            sq[j] += d * d;
        }
        series.full.push(proj);
        series.reduced.push(red);
    }
    let rms = sq.iter().map(|s| (s / count as f64).sqrt()).collect();
    let names = sys.structure().block_names(r);
    let labels = names.iter().cloned().chain(names.iter().map(|q| format!("p_{q}"))).collect();
    let reduced_stats = fwd.iter().chain(&back).map(|tr| tr.stats).collect();

    Ok(ComparisonReport {
        block: r,
        labels,
        sup,
        rms,
        samples: count,
        t_span,
        t_compared: t1,
        tau_range: (tau_min, tau_max),
        constants: c,
        sign_changes: clock.sign_changes.clone(),
        restricted,
        config: *cfg,
        full_stats: full.stats,
        reduced_stats,
        series,
    })
}
