use super::Trajectory;

/// Angular frequency of component `j` from its upward zero crossings,
/// `2π (m − 1) / (t_m − t_1)`; `None` with fewer than two crossings.
pub fn estimate_frequency(traj: &Trajectory, j: usize) -> Option<f64> {
    let times = traj.times();
    let mut crossings = Vec::new();
    for w in times.windows(2) {
        // sub-sample each step so a full oscillation inside one step is not missed
        let sub = 8;
        for s in 0..sub {
            let a = w[0] + (w[1] - w[0]) * s as f64 / sub as f64;
            let b = w[0] + (w[1] - w[0]) * (s + 1) as f64 / sub as f64;
            let (fa, fb) = (traj.component(a, j), traj.component(b, j));
            if fa < 0.0 && fb >= 0.0 {
                crossings.push(bisect(traj, j, a, b));
            }
        }
    }
    match crossings.as_slice() {
        [first, .., last] => Some(2.0 * std::f64::consts::PI * (crossings.len() - 1) as f64 / (last - first)),
        _ => None,
    }
}

fn bisect(traj: &Trajectory, j: usize, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if traj.component(m, j) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}
