//! Dormand–Prince 5(4) with PI step control and quartic dense output.

use thiserror::Error;

use crate::scalar::Scalar;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const MIN_RATIO: f64 = 0.2;
const MAX_RATIO: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on `|h|`; `None` means the span length.
    pub max_step: Option<f64>,
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_step: None, initial_step: None, max_steps: 1_000_000 }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }

    /// Tolerances for plotting runs.
    pub fn plotting() -> Self {
        Self::with_tolerances(1e-8, 1e-10)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegratorStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrateError<E> {
    #[error("degenerate time span [{t0}, {t1}]")]
    InvalidSpan { t0: f64, t1: f64 },
    #[error("step size underflow (h = {h:e}) after last good time t = {t}")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step limit reached at t = {t}")]
    TooManySteps { t: f64 },
    #[error("non-finite state after last good time t = {t}")]
    NonFinite { t: f64 },
    #[error("field evaluation failed after last good time t = {t}: {source}")]
    Field { t: f64, source: E },
}

/// Accepted steps of an integration, with dense output on every step.
///
/// Times are strictly monotone in the direction of integration.
#[derive(Debug, Clone)]
pub struct Trajectory<T = f64> {
    t: Vec<T>,
    y: Vec<Vec<T>>,
    dense: Vec<[Vec<T>; 5]>,
    pub stats: IntegratorStats,
    pub config: IntegratorConfig,
}

impl<T: Scalar> Trajectory<T> {
    pub fn times(&self) -> &[T] {
        &self.t
    }

    pub fn states(&self) -> &[Vec<T>] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.y[0].len()
    }

    pub fn start(&self) -> T {
        self.t[0]
    }

    pub fn end(&self) -> T {
        *self.t.last().expect("trajectory has at least one sample")
    }

    pub fn last_state(&self) -> &[T] {
        self.y.last().expect("trajectory has at least one sample")
    }

    fn forward(&self) -> bool {
        self.t.len() < 2 || self.t[1] > self.t[0]
    }

    /// Whether `t` lies in the covered span (inclusive).
    pub fn covers(&self, t: T) -> bool {
        let (a, b) = if self.forward() { (self.start(), self.end()) } else { (self.end(), self.start()) };
        t >= a && t <= b
    }

    /// State at time `t` from the dense output of the step containing it.
    ///
    /// # Panics
    /// If `t` is outside the covered span.
    pub fn interpolate(&self, t: T) -> Vec<T> {
        assert!(self.covers(t), "time {t} outside trajectory span");
        if self.t.len() == 1 {
            return self.y[0].clone();
        }
        let fwd = self.forward();
        let i = if fwd { self.t.partition_point(|&s| s <= t) } else { self.t.partition_point(|&s| s >= t) };
        let i = i.clamp(1, self.t.len() - 1) - 1;
        let h = self.t[i + 1] - self.t[i];
        let theta = (t - self.t[i]) / h;
        let theta1 = T::one() - theta;
        let r = &self.dense[i];
        (0..r[0].len())
            .map(|j| r[0][j] + theta * (r[1][j] + theta1 * (r[2][j] + theta * (r[3][j] + theta1 * r[4][j]))))
            .collect()
    }

    /// One component at time `t`.
    pub fn component(&self, t: T, j: usize) -> T {
        self.interpolate(t)[j]
    }
}

fn norm<T: Scalar>(v: &[T], sk: &[T]) -> T {
    let n = T::lit(v.len() as f64);
    (v.iter().zip(sk).fold(T::zero(), |acc, (&x, &s)| acc + (x / s) * (x / s)) / n).sqrt()
}

/// Integrates `y' = f(t, y)` from `t_span.0` to `t_span.1` (either direction).
///
/// `f` writes the derivative into its third argument.
pub fn integrate<T, E, F>(
    mut f: F,
    y0: &[T],
    t_span: (T, T),
    cfg: &IntegratorConfig,
) -> Result<Trajectory<T>, IntegrateError<E>>
where
    T: Scalar,
    F: FnMut(T, &[T], &mut [T]) -> Result<(), E>,
{
    let (t0, t1) = t_span;
    let span = t1 - t0;
    if !(span.real().abs() > 0.0) || !span.real().is_finite() {
        return Err(IntegrateError::InvalidSpan { t0: t0.real(), t1: t1.real() });
    }
    let dir = span.signum();
    let n = y0.len();
    let lit = T::lit;
    let rtol = lit(cfg.rtol);
    let atol = lit(cfg.atol);
    let hmax = lit(cfg.max_step.unwrap_or(f64::INFINITY)).min(span.abs());

    let mut stats = IntegratorStats::default();
    let mut eval = |t: T, y: &[T], out: &mut [T], stats: &mut IntegratorStats| -> Result<(), IntegrateError<E>> {
        stats.evaluations += 1;
        f(t, y, out).map_err(|source| IntegrateError::Field { t: t.real(), source })?;
        if out.iter().any(|x| !x.real().is_finite()) {
            return Err(IntegrateError::NonFinite { t: t.real() });
        }
        Ok(())
    };

    let mut k1 = vec![T::zero(); n];
    eval(t0, y0, &mut k1, &mut stats)?;

    let sk0: Vec<T> = y0.iter().map(|&y| atol + rtol * y.abs()).collect();
    let mut h = match cfg.initial_step {
        Some(h) => lit(h).abs().min(hmax),
        None => {
            let d0 = norm(y0, &sk0);
            let d1 = norm(&k1, &sk0);
            let h0 = if d0.real() < 1e-10 || d1.real() < 1e-10 { lit(1e-6) } else { lit(0.01) * d0 / d1 };
            let h0 = h0.min(hmax);
            let y1: Vec<T> = y0.iter().zip(&k1).map(|(&y, &k)| y + dir * h0 * k).collect();
            let mut f1 = vec![T::zero(); n];
            eval(t0 + dir * h0, &y1, &mut f1, &mut stats)?;
            let diff: Vec<T> = f1.iter().zip(&k1).map(|(&a, &b)| a - b).collect();
            let d2 = norm(&diff, &sk0) / h0;
            let m = d1.max(d2);
            let h1 = if m.real() <= 1e-15 { (h0 * lit(1e-3)).max(lit(1e-6)) } else { (lit(0.01) / m).powf(lit(0.2)) };
            (lit(100.0) * h0).min(h1).min(hmax)
        }
    };

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut traj = Trajectory { t: vec![t0], y: vec![y.clone()], dense: Vec::new(), stats, config: *cfg };
    let mut facold = lit(1e-4);
    let mut last_rejected = false;

    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    let mut ys = vec![T::zero(); n];
    let mut y1 = vec![T::zero(); n];

    loop {
        let remaining = (t1 - t).abs();
        if remaining.real() <= 0.0 {
            break;
        }
        if stats.accepted + stats.rejected >= cfg.max_steps {
            return Err(IntegrateError::TooManySteps { t: t.real() });
        }
        let last = h * lit(1.0 + 1e-12) >= remaining;
        if last {
            h = remaining;
        }
        if (h / (t.abs() + T::one())).real() < 1e-15 {
            return Err(IntegrateError::StepUnderflow { t: t.real(), h: h.real() });
        }
        let hs = dir * h;

        for i in 0..n {
            ys[i] = y[i] + hs * lit(A21) * k1[i];
        }
        eval(t + lit(C2) * hs, &ys, &mut k2, &mut stats)?;
        for i in 0..n {
            ys[i] = y[i] + hs * (lit(A31) * k1[i] + lit(A32) * k2[i]);
        }
        eval(t + lit(C3) * hs, &ys, &mut k3, &mut stats)?;
        for i in 0..n {
            ys[i] = y[i] + hs * (lit(A41) * k1[i] + lit(A42) * k2[i] + lit(A43) * k3[i]);
        }
        eval(t + lit(C4) * hs, &ys, &mut k4, &mut stats)?;
        for i in 0..n {
            ys[i] = y[i] + hs * (lit(A51) * k1[i] + lit(A52) * k2[i] + lit(A53) * k3[i] + lit(A54) * k4[i]);
        }
        eval(t + lit(C5) * hs, &ys, &mut k5, &mut stats)?;
        for i in 0..n {
            ys[i] = y[i]
                + hs * (lit(A61) * k1[i] + lit(A62) * k2[i] + lit(A63) * k3[i] + lit(A64) * k4[i] + lit(A65) * k5[i]);
        }
        let t_new = if last { t1 } else { t + hs };
        eval(t_new, &ys, &mut k6, &mut stats)?;
        for i in 0..n {
            y1[i] = y[i]
                + hs * (lit(A71) * k1[i] + lit(A73) * k3[i] + lit(A74) * k4[i] + lit(A75) * k5[i] + lit(A76) * k6[i]);
        }
        eval(t_new, &y1, &mut k7, &mut stats)?;

        let mut err = T::zero();
        for i in 0..n {
            let e = hs
                * (lit(E1) * k1[i] + lit(E3) * k3[i] + lit(E4) * k4[i] + lit(E5) * k5[i] + lit(E6) * k6[i]
                    + lit(E7) * k7[i]);
            let sk = atol + rtol * y[i].abs().max(y1[i].abs());
            err = err + (e / sk) * (e / sk);
        }
        let err = (err / lit(n.max(1) as f64)).sqrt();
        if !err.real().is_finite() {
            return Err(IntegrateError::NonFinite { t: t.real() });
        }

        let fac11 = err.powf(lit(0.2 - BETA * 0.75));
        if err.real() <= 1.0 {
            let fac = fac11 / facold.powf(lit(BETA));
            let fac = (fac / lit(SAFETY)).min(lit(1.0 / MIN_RATIO)).max(lit(1.0 / MAX_RATIO));
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            facold = err.max(lit(1e-4));

            let dense = {
                let ydiff: Vec<T> = y1.iter().zip(&y).map(|(&a, &b)| a - b).collect();
                let bspl: Vec<T> = (0..n).map(|i| hs * k1[i] - ydiff[i]).collect();
                let r4: Vec<T> = (0..n).map(|i| ydiff[i] - hs * k7[i] - bspl[i]).collect();
                let r5: Vec<T> = (0..n)
                    .map(|i| {
                        hs * (lit(D1) * k1[i] + lit(D3) * k3[i] + lit(D4) * k4[i] + lit(D5) * k5[i]
                            + lit(D6) * k6[i]
                            + lit(D7) * k7[i])
                    })
                    .collect();
                [y.clone(), ydiff, bspl, r4, r5]
            };
            stats.accepted += 1;
            t = t_new;
            std::mem::swap(&mut y, &mut y1);
            std::mem::swap(&mut k1, &mut k7);
            traj.t.push(t);
            traj.y.push(y.clone());
            traj.dense.push(dense);
            last_rejected = false;
            h = h_new.min(hmax);
            if last {
                break;
            }
        } else {
            stats.rejected += 1;
            h = h / (fac11 / lit(SAFETY)).min(lit(1.0 / MIN_RATIO));
            last_rejected = true;
        }
    }
    traj.stats = stats;
    Ok(traj)
}
