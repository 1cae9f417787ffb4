//! Derivative-free maximization over blocks of angles, shared by the
//! violation criteria and the direct settings search.
//!
//! Multi-start block-coordinate ascent: every angle in turn is
//! improved by a golden-section line search on a half-period bracket,
//! sweeping until the objective gain drops below tolerance. Restarts
//! are deterministic in the seed (restart 0 additionally runs a
//! coarse pi/8 per-angle grid pass) and independent, so they run in
//! parallel; ties resolve to the lowest restart index.

use rayon::prelude::*;

use crate::bellcore::general_lhs;
use crate::corrtensor::{correlation_table, CorrelationTensor, MeasurementSettings};
use crate::error::{Error, Result};

/// Tuning knobs shared by every angle search.
#[derive(Debug, Clone)]
pub struct OptimOptions {
    /// Independent starts, minimum 1.
    pub restarts: usize,
    /// Seed for the deterministic start sequence.
    pub seed: u64,
    /// Sweep convergence threshold and verdict slack.
    pub tol: f64,
    /// Hard cap on coordinate sweeps per restart.
    pub max_sweeps: usize,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            seed: 0,
            tol: 1e-9,
            max_sweeps: 200,
        }
    }
}

/// Objective over a flat angle vector grouped into per-observer
/// blocks. All angles are 2*pi periodic.
pub struct BlockObjective<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pub block_sizes: Vec<usize>,
    pub eval: F,
}

impl<F> BlockObjective<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pub fn dim(&self) -> usize {
        self.block_sizes.iter().sum()
    }
}

/// One restart's outcome.
#[derive(Debug, Clone)]
pub struct RestartRecord {
    pub index: usize,
    pub value: f64,
    pub sweeps: usize,
    pub converged: bool,
    /// Set when a non-finite objective value ended the restart early.
    pub aborted: bool,
}

/// Best point over all restarts plus the per-restart trace.
#[derive(Debug, Clone)]
pub struct MaximizeResult {
    pub best_value: f64,
    pub best_angles: Vec<f64>,
    pub restarts: Vec<RestartRecord>,
}

impl MaximizeResult {
    pub fn converged(&self) -> bool {
        self.restarts
            .iter()
            .any(|r| r.converged && r.value == self.best_value)
    }
}

const GOLDEN_ITERS: usize = 40;
const GRID_STEP: f64 = std::f64::consts::PI / 8.0;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Generalized-golden-ratio additive sequence: well spread points of
/// the unit cube, offset deterministically by the seed.
pub(crate) fn low_discrepancy_point(seed: u64, index: usize, dim: usize) -> Vec<f64> {
    // phi_d is the positive root of x^(d+1) = x + 1.
    let d = dim as f64;
    let mut phi = 2.0_f64;
    for _ in 0..64 {
        phi = (phi + 1.0).powf(1.0 / (d + 1.0));
    }
    let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15) ^ 0x5851f42d4c957f2d;
    (0..dim)
        .map(|i| {
            let alpha = phi.powi(-(i as i32 + 1)).fract();
            let offset = splitmix64(&mut state) as f64 / u64::MAX as f64;
            (offset + alpha * (index as f64)).fract()
        })
        .collect()
}

/// Golden-section maximization of `f` on `[lo, hi]`; returns the best
/// probe, including the bracket endpoints.
fn golden_max<G: FnMut(f64) -> f64>(mut f: G, lo: f64, hi: f64) -> (f64, f64) {
    let inv_gr = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut a = lo;
    let mut b = hi;
    let mut c = b - inv_gr * (b - a);
    let mut d = a + inv_gr * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for _ in 0..GOLDEN_ITERS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_gr * (b - a);
            fd = f(d);
        }
        let (x, fx) = if fc >= fd { (c, fc) } else { (d, fd) };
        if fx > best.1 {
            best = (x, fx);
        }
    }
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

struct RestartOutcome {
    record: RestartRecord,
    angles: Vec<f64>,
}

/// Golden search from `x` along the unit direction `u`, offsets in
/// [-pi/2, pi/2]. Moves `x` and returns the new value only on strict
/// improvement.
fn line_search<F>(eval: &F, x: &mut [f64], u: &[f64], current: f64, scratch: &mut [f64]) -> f64
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let (t, best) = golden_max(
        |t| {
            for (s, (xi, ui)) in scratch.iter_mut().zip(x.iter().zip(u)) {
                *s = xi + t * ui;
            }
            eval(scratch)
        },
        -std::f64::consts::FRAC_PI_2,
        std::f64::consts::FRAC_PI_2,
    );
    if best > current {
        for (xi, ui) in x.iter_mut().zip(u) {
            *xi += t * ui;
        }
        best
    } else {
        current
    }
}

fn run_restart<F>(
    obj: &BlockObjective<F>,
    opts: &OptimOptions,
    index: usize,
) -> RestartOutcome
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dim = obj.dim();
    let mut angles = if index == 0 {
        vec![0.0; dim]
    } else {
        low_discrepancy_point(opts.seed, index, dim)
            .into_iter()
            .map(|x| x * std::f64::consts::TAU)
            .collect()
    };
    let abort = |angles: Vec<f64>, sweeps: usize| RestartOutcome {
        record: RestartRecord {
            index,
            value: f64::NEG_INFINITY,
            sweeps,
            converged: false,
            aborted: true,
        },
        angles,
    };

    let mut value = (obj.eval)(&angles);
    if !value.is_finite() {
        return abort(angles, 0);
    }

    // Coarse deterministic grid pass seeds the first restart.
    if index == 0 {
        for i in 0..dim {
            let saved = angles[i];
            let mut best = (saved, value);
            for step in 0..16 {
                angles[i] = step as f64 * GRID_STEP;
                let v = (obj.eval)(&angles);
                if v > best.1 {
                    best = (angles[i], v);
                }
            }
            angles[i] = best.0;
            value = best.1;
        }
        if !value.is_finite() {
            return abort(angles, 0);
        }
    }

    // Powell's direction-set method. Plain per-angle ascent crawls on
    // curved ridges; promoting the net sweep displacement to a search
    // direction (under the usual extrapolation test) does not.
    let mut directions: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            e
        })
        .collect();
    let mut scratch = vec![0.0; dim];
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < opts.max_sweeps {
        let sweep_start = value;
        let start_angles = angles.clone();
        let mut biggest_gain = 0.0;
        let mut biggest = 0;
        for (i, u) in directions.iter().enumerate() {
            let before = value;
            value = line_search(&obj.eval, &mut angles, u, value, &mut scratch);
            if value - before > biggest_gain {
                biggest_gain = value - before;
                biggest = i;
            }
        }
        let mut delta: Vec<f64> = angles
            .iter()
            .zip(&start_angles)
            .map(|(a, b)| a - b)
            .collect();
        let norm = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
        if norm > 1e-12 {
            for (s, (a, b)) in scratch.iter_mut().zip(angles.iter().zip(&start_angles)) {
                *s = 2.0 * a - b;
            }
            let extrapolated = (obj.eval)(&scratch);
            // Adopt the displacement only if doubling the step still
            // helps and no single direction dominated the sweep.
            if extrapolated > sweep_start {
                let t = 2.0 * (2.0 * value - sweep_start - extrapolated)
                    * (value - sweep_start - biggest_gain).powi(2)
                    - biggest_gain * (extrapolated - sweep_start).powi(2);
                if t < 0.0 {
                    for d in delta.iter_mut() {
                        *d /= norm;
                    }
                    value = line_search(&obj.eval, &mut angles, &delta, value, &mut scratch);
                    directions[biggest] = directions[dim - 1].clone();
                    directions[dim - 1] = delta;
                }
            }
        }
        sweeps += 1;
        if !value.is_finite() {
            return abort(angles, sweeps);
        }
        if value - sweep_start < opts.tol {
            converged = true;
            break;
        }
    }
    RestartOutcome {
        record: RestartRecord {
            index,
            value,
            sweeps,
            converged,
            aborted: false,
        },
        angles,
    }
}

/// Runs `opts.restarts` independent ascents in parallel and keeps the
/// best. Fails only when every restart hit a non-finite objective.
pub fn multistart_maximize<F>(
    obj: &BlockObjective<F>,
    opts: &OptimOptions,
) -> Result<MaximizeResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let restarts = opts.restarts.max(1);
    let mut outcomes: Vec<RestartOutcome> = (0..restarts)
        .into_par_iter()
        .map(|index| run_restart(obj, opts, index))
        .collect();
    outcomes.sort_by_key(|o| o.record.index);
    let best = outcomes
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            a.record
                .value
                .partial_cmp(&b.record.value)
                .unwrap()
                .then(ib.cmp(ia))
        })
        .map(|(i, _)| i)
        .expect("at least one restart");
    if outcomes[best].record.aborted {
        return Err(Error::NonFiniteObjective);
    }
    let best_angles = outcomes[best].angles.clone();
    let best_value = outcomes[best].record.value;
    Ok(MaximizeResult {
        best_value,
        best_angles,
        restarts: outcomes.into_iter().map(|o| o.record).collect(),
    })
}

/// Unit direction from polar angles (theta from the +3 axis, phi in
/// the 1-2 plane).
pub fn direction_from_polar(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Settings from a flat angle vector, one [theta1, phi1, theta2,
/// phi2] block per observer. Directions are unit by construction.
pub fn settings_from_angles(angles: &[f64]) -> MeasurementSettings {
    assert_eq!(angles.len() % 4, 0);
    let directions = angles
        .chunks_exact(4)
        .map(|c| [direction_from_polar(c[0], c[1]), direction_from_polar(c[2], c[3])])
        .collect();
    MeasurementSettings::from_directions(directions).expect("polar directions are unit")
}

/// Maximizes the general-inequality LHS of the tensor's correlation
/// table over all measurement settings. The maximum over settings
/// equals 2^N times the tensor criterion's maximum.
pub fn maximize_quantum_value(
    t: &CorrelationTensor,
    opts: &OptimOptions,
) -> Result<(f64, MeasurementSettings)> {
    let n = t.n_qubits();
    let obj = BlockObjective {
        block_sizes: vec![4; n],
        eval: |angles: &[f64]| {
            let settings = settings_from_angles(angles);
            match correlation_table(t, &settings) {
                Ok(table) => general_lhs(&table),
                Err(_) => f64::NEG_INFINITY,
            }
        },
    };
    let result = multistart_maximize(&obj, opts)?;
    Ok((result.best_value, settings_from_angles(&result.best_angles)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::make_ghz;
    use approx::assert_abs_diff_eq;

    fn opts(restarts: usize) -> OptimOptions {
        OptimOptions {
            restarts,
            ..OptimOptions::default()
        }
    }

    #[test]
    fn one_dimensional_cosine() {
        let obj = BlockObjective {
            block_sizes: vec![1],
            eval: |a: &[f64]| a[0].cos(),
        };
        let r = multistart_maximize(&obj, &opts(4)).unwrap();
        assert_abs_diff_eq!(r.best_value, 1.0, epsilon = 1e-9);
        assert!(r.converged());
    }

    #[test]
    fn separable_two_block_objective() {
        let obj = BlockObjective {
            block_sizes: vec![1, 1],
            eval: |a: &[f64]| a[0].cos() + a[1].sin(),
        };
        let r = multistart_maximize(&obj, &opts(4)).unwrap();
        assert_abs_diff_eq!(r.best_value, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn constant_objective_converges_immediately() {
        let obj = BlockObjective {
            block_sizes: vec![3],
            eval: |_: &[f64]| 2.5,
        };
        let r = multistart_maximize(&obj, &opts(2)).unwrap();
        assert_eq!(r.best_value, 2.5);
        assert!(r.restarts.iter().all(|rec| rec.converged && rec.sweeps == 1));
    }

    #[test]
    fn non_finite_objective_fails() {
        let obj = BlockObjective {
            block_sizes: vec![1],
            eval: |_: &[f64]| f64::NAN,
        };
        assert!(matches!(
            multistart_maximize(&obj, &opts(3)),
            Err(Error::NonFiniteObjective)
        ));
    }

    #[test]
    fn same_seed_reproduces_bit_for_bit() {
        let obj = BlockObjective {
            block_sizes: vec![2],
            eval: |a: &[f64]| (a[0] - 1.0).cos() + (2.0 * a[1]).cos(),
        };
        let o = OptimOptions {
            restarts: 6,
            seed: 42,
            ..OptimOptions::default()
        };
        let r1 = multistart_maximize(&obj, &o).unwrap();
        let r2 = multistart_maximize(&obj, &o).unwrap();
        assert_eq!(r1.best_value.to_bits(), r2.best_value.to_bits());
        assert_eq!(
            r1.best_angles
                .iter()
                .map(|a| a.to_bits())
                .collect::<Vec<_>>(),
            r2.best_angles
                .iter()
                .map(|a| a.to_bits())
                .collect::<Vec<_>>()
        );
    }

    #[test]
    fn low_discrepancy_points_fill_the_cube() {
        let points: Vec<Vec<f64>> =
            (0..64).map(|k| low_discrepancy_point(7, k, 3)).collect();
        for p in &points {
            assert!(p.iter().all(|&x| (0.0..1.0).contains(&x)));
        }
        // Coordinates should not collapse onto a few values.
        let mut first: Vec<f64> = points.iter().map(|p| p[0]).collect();
        first.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let max_gap = first
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0f64, f64::max);
        assert!(max_gap < 0.2, "poorly spread sequence, gap {max_gap}");
    }

    #[test]
    fn ghz2_settings_search_reaches_tsirelson() {
        let t = crate::corrtensor::compute_tensor(&make_ghz(2).unwrap().density()).unwrap();
        let (value, settings) = maximize_quantum_value(&t, &OptimOptions::default()).unwrap();
        assert_abs_diff_eq!(value, 4.0 * 2.0_f64.sqrt(), epsilon = 1e-6);
        // The returned settings actually achieve the value.
        let table = correlation_table(&t, &settings).unwrap();
        assert_abs_diff_eq!(general_lhs(&table), value, epsilon = 1e-12);
    }

    #[test]
    fn ghz3_settings_search_reaches_sixteen() {
        let t = crate::corrtensor::compute_tensor(&make_ghz(3).unwrap().density()).unwrap();
        let (value, _) = maximize_quantum_value(&t, &OptimOptions::default()).unwrap();
        assert_abs_diff_eq!(value, 16.0, epsilon = 1e-5);
    }

    #[test]
    fn product_state_stays_at_the_bound() {
        let rho = crate::qstate::product_state(&[[0.6, 0.0, 0.8], [0.0, 1.0, 0.0]]).unwrap();
        let t = crate::corrtensor::compute_tensor(&rho).unwrap();
        let (value, _) = maximize_quantum_value(&t, &OptimOptions::default()).unwrap();
        assert!(value <= 4.0 + 1e-9);
        assert!(value >= 4.0 - 1e-6);
    }
}
