use super::{DynamicsError, Trajectory};
use crate::model::TwistedSystem;

/// The block clock `τ_r(t)` of a full-system trajectory, `τ̇_r = α^r(q(t))`.
#[derive(Debug, Clone)]
pub struct BlockClock<'a> {
    pub block: usize,
    trajectory: &'a Trajectory,
    index: usize,
    /// Approximate times at which `α^r` changes sign, in integration order.
    pub sign_changes: Vec<f64>,
}

impl BlockClock<'_> {
    pub fn tau(&self, t: f64) -> f64 {
        self.trajectory.component(t, self.index)
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.trajectory.times().iter().zip(self.trajectory.states()).map(|(&t, y)| (t, y[self.index]))
    }

    pub fn changed_sign(&self) -> bool {
        !self.sign_changes.is_empty()
    }

    pub fn first_sign_change(&self) -> Option<f64> {
        self.sign_changes.first().copied()
    }
}

/// Reads `τ_r` off a trajectory from [`integrate_full`](super::integrate_full)
/// and locates sign changes of `α^r` along it.
pub fn block_clock<'a>(sys: &TwistedSystem, traj: &'a Trajectory, r: usize) -> Result<BlockClock<'a>, DynamicsError> {
    let dim = sys.dim();
    let n = sys.n_blocks();
    if r >= n {
        return Err(DynamicsError::NoSuchBlock { block: r, n });
    }
    if traj.dim() != 2 * dim + n {
        return Err(DynamicsError::MissingClocks { expected: 2 * dim + n, got: traj.dim() });
    }
    let alpha_at = |t: f64| -> Result<f64, DynamicsError> {
        let y = traj.interpolate(t);
        Ok(sys.alpha(&y[..dim])?[r])
    };
    // α is sampled at step ends and midpoints so a sign change inside one step is seen
    let mut sign_changes = Vec::new();
    let times = traj.times();
    let mut prev_t = times[0];
    let mut prev_a = alpha_at(prev_t)?;
    for w in times.windows(2) {
        for t in [0.5 * (w[0] + w[1]), w[1]] {
            let a = alpha_at(t)?;
            if prev_a != 0.0 && (a == 0.0 || a.signum() != prev_a.signum()) {
                let (mut lo, mut hi, mut alo) = (prev_t, t, prev_a);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let am = alpha_at(mid)?;
                    if am != 0.0 && am.signum() == alo.signum() {
                        lo = mid;
                        alo = am;
                    } else {
                        hi = mid;
                    }
                }
                sign_changes.push(0.5 * (lo + hi));
            }
            if a != 0.0 {
                prev_a = a;
            }
            prev_t = t;
        }
    }
    Ok(BlockClock { block: r, trajectory: traj, index: 2 * dim + r, sign_changes })
}
