//! Violation criteria evaluated directly on the correlation tensor,
//! behind a runtime registry of named tests.
//!
//! The central quantity: for local frames F and one unit 2-vector c^j
//! per observer,
//! `tmod = sum over x in {1,2}^N of prod_j c^j[x_j] * |T^F[x]|`.
//! Correlations violate some two-setting inequality exactly when the
//! maximum over frames and c-vectors exceeds 1; the maximum equals
//! the settings-search optimum of the general inequality divided by
//! 2^N. The sum of squared in-plane components bounds tmod from above
//! via Cauchy-Schwarz, giving a cheaper sufficient condition for
//! locality, and for two qubits the same maximum is the sum of the
//! two largest eigenvalues of T^t T in closed form.

use nalgebra::{Matrix3, Vector3};

use crate::corrtensor::{
    rotate_entries, rotate_frame, CorrelationTensor, LocalFrame, MeasurementSettings,
    GEOMETRY_TOL,
};
use crate::error::{Error, Result};
use crate::optimizer::{
    low_discrepancy_point, multistart_maximize, maximize_quantum_value, BlockObjective,
    OptimOptions,
};
use crate::qstate::MAX_QUBITS;

/// One unit 2-vector per observer weighting the two in-plane axes.
#[derive(Debug, Clone, PartialEq)]
pub struct CVectors {
    components: Vec<[f64; 2]>,
}

impl CVectors {
    pub fn from_components(components: Vec<[f64; 2]>) -> Result<Self> {
        for (observer, c) in components.iter().enumerate() {
            let norm = (c[0] * c[0] + c[1] * c[1]).sqrt();
            if (norm - 1.0).abs() > GEOMETRY_TOL {
                return Err(Error::CVectorNotUnit {
                    observer: observer + 1,
                    norm,
                });
            }
        }
        Ok(Self { components })
    }

    /// Unit c-vectors `(cos(a + pi/2), cos(a + pi))` from one angle
    /// per observer.
    pub fn from_alphas(alphas: &[f64]) -> Self {
        Self {
            components: alphas
                .iter()
                .map(|&a| {
                    let (s, c) = a.sin_cos();
                    [-s, -c]
                })
                .collect(),
        }
    }

    pub fn n_observers(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[[f64; 2]] {
        &self.components
    }
}

/// Optimum found by [`max_tmod`], with everything needed to check it:
/// the frames and c-vectors attaining `value`, and the measurement
/// settings whose correlation table reaches `2^N * value` on the
/// general inequality.
#[derive(Debug, Clone)]
pub struct ViolationCertificate {
    pub value: f64,
    pub frame: LocalFrame,
    pub c_vectors: CVectors,
    pub settings: MeasurementSettings,
    pub converged: bool,
    pub restarts_used: usize,
}

fn plane_powers(n: usize) -> Vec<usize> {
    (0..n).map(|j| 3usize.pow((n - 1 - j) as u32)).collect()
}

/// Signed in-plane contraction of absolute entries.
fn tmod_of_entries(entries: &[f64], components: &[[f64; 2]], powers: &[usize]) -> f64 {
    let n = components.len();
    let mut total = 0.0;
    for mask in 0..1usize << n {
        let mut product = 1.0;
        let mut index = 0;
        for (j, p) in powers.iter().enumerate() {
            let bit = (mask >> (n - 1 - j)) & 1;
            product *= components[j][bit];
            index += bit * p;
        }
        total += product * entries[index].abs();
    }
    total
}

/// Criterion value at explicit frames and c-vectors.
pub fn tmod_value(t: &CorrelationTensor, frame: &LocalFrame, c: &CVectors) -> Result<f64> {
    if c.n_observers() != t.n_qubits() {
        return Err(Error::QubitCountMismatch {
            a: t.n_qubits(),
            b: c.n_observers(),
        });
    }
    CVectors::from_components(c.components.clone())?;
    let rotated = rotate_frame(t, frame)?;
    Ok(tmod_of_entries(
        rotated.entries(),
        &c.components,
        &plane_powers(t.n_qubits()),
    ))
}

fn frame_from_angle_blocks(angles: &[f64]) -> LocalFrame {
    let euler: Vec<[f64; 3]> = angles
        .chunks_exact(4)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    LocalFrame::from_euler(&euler)
}

fn alphas_from_angle_blocks(angles: &[f64]) -> Vec<f64> {
    angles.chunks_exact(4).map(|c| c[3]).collect()
}

/// Maximizes the criterion over frames and c-vectors by multi-start
/// coordinate ascent on 4 angles per observer (three Euler angles
/// plus the c-vector angle).
///
/// The best point is canonicalized: c-components are replaced by
/// their absolute values, which never lowers the value and makes the
/// reconstructed settings reach exactly `2^N * value` on the general
/// inequality. A zero tensor short-circuits to value 0.
pub fn max_tmod(t: &CorrelationTensor, opts: &OptimOptions) -> Result<ViolationCertificate> {
    let n = t.n_qubits();
    if t.entries().iter().all(|&e| e == 0.0) {
        return Ok(ViolationCertificate {
            value: 0.0,
            frame: LocalFrame::identity(n),
            c_vectors: CVectors::from_alphas(&vec![-std::f64::consts::FRAC_PI_2; n]),
            settings: MeasurementSettings::from_directions(vec![
                [[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]];
                n
            ])?,
            converged: true,
            restarts_used: 0,
        });
    }
    let powers = plane_powers(n);
    let obj = BlockObjective {
        block_sizes: vec![4; n],
        eval: |angles: &[f64]| {
            let frame = frame_from_angle_blocks(angles);
            let rotated = rotate_entries(t.entries(), n, frame.triads());
            let c = CVectors::from_alphas(&alphas_from_angle_blocks(angles));
            tmod_of_entries(&rotated, c.components(), &powers)
        },
    };
    let result = multistart_maximize(&obj, opts)?;
    let frame = frame_from_angle_blocks(&result.best_angles);
    let raw = CVectors::from_alphas(&alphas_from_angle_blocks(&result.best_angles));
    let canonical = CVectors {
        components: raw
            .components
            .iter()
            .map(|c| [c[0].abs(), c[1].abs()])
            .collect(),
    };
    let rotated = rotate_entries(t.entries(), n, frame.triads());
    let value = tmod_of_entries(&rotated, canonical.components(), &powers);
    debug_assert!(value >= result.best_value - 1e-12);
    let settings = settings_from_certificate(&frame, &canonical)?;
    Ok(ViolationCertificate {
        value,
        frame,
        c_vectors: canonical,
        settings,
        converged: result.converged(),
        restarts_used: result.restarts.len(),
    })
}

/// Measurement directions attaining the criterion value: per observer
/// `n1 = c1 a1 - c2 a2` and `n2 = c1 a1 + c2 a2`, so the two-setting
/// sums recover `2 c1 a1` and `2 c2 a2`.
fn settings_from_certificate(frame: &LocalFrame, c: &CVectors) -> Result<MeasurementSettings> {
    let directions = frame
        .triads()
        .iter()
        .zip(c.components.iter())
        .map(|(triad, &[c1, c2])| {
            let a1 = triad[0];
            let a2 = triad[1];
            let n1 = [
                c1 * a1[0] - c2 * a2[0],
                c1 * a1[1] - c2 * a2[1],
                c1 * a1[2] - c2 * a2[2],
            ];
            let n2 = [
                c1 * a1[0] + c2 * a2[0],
                c1 * a1[1] + c2 * a2[1],
                c1 * a1[2] + c2 * a2[2],
            ];
            [n1, n2]
        })
        .collect();
    MeasurementSettings::from_directions(directions)
}

const SUMSQ_RESTARTS: usize = 8;
const SUMSQ_TOL: f64 = 1e-12;
const SUMSQ_MAX_ITERS: usize = 500;

fn in_plane_sum_squares(entries: &[f64], n: usize, powers: &[usize]) -> f64 {
    let mut total = 0.0;
    for mask in 0..1usize << n {
        let mut index = 0;
        for (j, p) in powers.iter().enumerate() {
            index += ((mask >> (n - 1 - j)) & 1) * p;
        }
        total += entries[index] * entries[index];
    }
    total
}

/// Maximizes the sum of squared in-plane components over local
/// frames. Alternating exact updates: with every other observer
/// fixed, observer j's optimal plane spans the top two eigenvectors
/// of a 3x3 positive semidefinite contraction, so each step is solved
/// exactly and the ascent is monotone.
///
/// A value at most 1 certifies that every inequality of the family is
/// satisfied; the value is always at least the square of the
/// [`max_tmod`] optimum.
pub fn sum_squares_max(t: &CorrelationTensor) -> Result<(f64, LocalFrame)> {
    let n = t.n_qubits();
    let powers = plane_powers(n);
    if t.entries().iter().all(|&e| e == 0.0) {
        return Ok((0.0, LocalFrame::identity(n)));
    }
    let mut best: Option<(f64, LocalFrame)> = None;
    for restart in 0..SUMSQ_RESTARTS {
        let mut triads: Vec<[[f64; 3]; 3]> = if restart == 0 {
            LocalFrame::identity(n).triads().to_vec()
        } else {
            let angles = low_discrepancy_point(0, restart, 3 * n);
            let euler: Vec<[f64; 3]> = angles
                .chunks_exact(3)
                .map(|c| {
                    [
                        c[0] * std::f64::consts::TAU,
                        c[1] * std::f64::consts::TAU,
                        c[2] * std::f64::consts::TAU,
                    ]
                })
                .collect();
            LocalFrame::from_euler(&euler).triads().to_vec()
        };
        let mut value = {
            let rotated = rotate_entries(t.entries(), n, &triads);
            in_plane_sum_squares(&rotated, n, &powers)
        };
        for _ in 0..SUMSQ_MAX_ITERS {
            let previous = value;
            for j in 0..n {
                let mut partial = triads.clone();
                partial[j] = LocalFrame::identity(1).triads()[0];
                let u = rotate_entries(t.entries(), n, &partial);
                // M[p][q] = sum over the other observers' in-plane
                // indices of U[p,rest] U[q,rest].
                let mut m = Matrix3::<f64>::zeros();
                for mask in 0..1usize << (n - 1) {
                    let mut base = 0;
                    let mut bit_pos = 0;
                    for (i, p) in powers.iter().enumerate() {
                        if i == j {
                            continue;
                        }
                        base += ((mask >> bit_pos) & 1) * p;
                        bit_pos += 1;
                    }
                    let slice = [
                        u[base],
                        u[base + powers[j]],
                        u[base + 2 * powers[j]],
                    ];
                    for p in 0..3 {
                        for q in 0..3 {
                            m[(p, q)] += slice[p] * slice[q];
                        }
                    }
                }
                let eigen = nalgebra::SymmetricEigen::new(m);
                let mut order = [0usize, 1, 2];
                order.sort_by(|&a, &b| {
                    eigen.eigenvalues[b]
                        .partial_cmp(&eigen.eigenvalues[a])
                        .unwrap()
                });
                let v1: Vector3<f64> = eigen.eigenvectors.column(order[0]).into();
                let v2: Vector3<f64> = eigen.eigenvectors.column(order[1]).into();
                let v3 = v1.cross(&v2);
                triads[j] = [
                    [v1[0], v1[1], v1[2]],
                    [v2[0], v2[1], v2[2]],
                    [v3[0], v3[1], v3[2]],
                ];
                value = eigen.eigenvalues[order[0]] + eigen.eigenvalues[order[1]];
            }
            if value - previous < SUMSQ_TOL {
                break;
            }
        }
        let frame = LocalFrame::from_triads(triads)?;
        if best.as_ref().is_none_or(|(bv, _)| value > *bv) {
            best = Some((value, frame));
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Two-qubit closed form: the sum of the two largest eigenvalues of
/// T^t T. Violation occurs exactly when it exceeds 1.
pub fn horodecki_2qubit(t: &CorrelationTensor) -> Result<f64> {
    if t.n_qubits() != 2 {
        return Err(Error::UnsupportedQubitCount {
            id: "horodecki".into(),
            n: t.n_qubits(),
        });
    }
    let mut m = Matrix3::<f64>::zeros();
    for p in 0..3 {
        for q in 0..3 {
            m[(p, q)] = t.get(&[p + 1, q + 1]);
        }
    }
    let g = m.transpose() * m;
    let mut eig: Vec<f64> = nalgebra::SymmetricEigen::new(g).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(eig[0] + eig[1])
}

/// Noise weight above which the N-qubit GHZ-noise mixture violates
/// some two-setting inequality: 1/sqrt(2^(N-1)).
pub fn werner_threshold(n_qubits: usize) -> Result<f64> {
    if n_qubits < 2 {
        return Err(Error::QubitCountTooSmall {
            n: n_qubits,
            min: 2,
        });
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::QubitCountOutOfRange {
            n: n_qubits,
            max: MAX_QUBITS,
        });
    }
    Ok(1.0 / ((1u64 << (n_qubits - 1)) as f64).sqrt())
}

/// What a passing value proves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guarantee {
    /// Value > 1 iff some two-setting inequality is violated.
    NecessaryAndSufficient,
    /// Value <= 1 certifies locality; above 1 proves nothing.
    SufficientForLocality,
    /// Value > 1 exhibits violating settings; below proves nothing.
    WitnessOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Violated,
    Satisfied,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Violated => "violated",
            Verdict::Satisfied => "satisfied",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Result of one registered test: `value` compared against
/// `threshold` 1, plus whatever witness the test produces.
#[derive(Debug, Clone)]
pub struct TestOutcome {
    pub id: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub certificate: Option<ViolationCertificate>,
    pub frame: Option<LocalFrame>,
    pub settings: Option<MeasurementSettings>,
}

/// A named violation test selectable at runtime.
pub trait ViolationTest: Sync {
    fn id(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn guarantee(&self) -> Guarantee;
    fn supports(&self, n_qubits: usize) -> bool;
    fn run(&self, t: &CorrelationTensor, opts: &OptimOptions) -> Result<TestOutcome>;
}

fn check_support(test: &dyn ViolationTest, n: usize) -> Result<()> {
    if test.supports(n) {
        Ok(())
    } else {
        Err(Error::UnsupportedQubitCount {
            id: test.id().into(),
            n,
        })
    }
}

struct TmodAscent;

impl ViolationTest for TmodAscent {
    fn id(&self) -> &'static str {
        "tmod"
    }

    fn summary(&self) -> &'static str {
        "maximum of the modulus-tensor criterion over frames and c-vectors"
    }

    fn guarantee(&self) -> Guarantee {
        Guarantee::NecessaryAndSufficient
    }

    fn supports(&self, n_qubits: usize) -> bool {
        (1..=MAX_QUBITS).contains(&n_qubits)
    }

    fn run(&self, t: &CorrelationTensor, opts: &OptimOptions) -> Result<TestOutcome> {
        check_support(self, t.n_qubits())?;
        let cert = max_tmod(t, opts)?;
        let verdict = if cert.value > 1.0 + opts.tol {
            Verdict::Violated
        } else {
            Verdict::Satisfied
        };
        Ok(TestOutcome {
            id: self.id(),
            value: cert.value,
            threshold: 1.0,
            verdict,
            certificate: Some(cert),
            frame: None,
            settings: None,
        })
    }
}

struct SumSquares;

impl ViolationTest for SumSquares {
    fn id(&self) -> &'static str {
        "sum-squares"
    }

    fn summary(&self) -> &'static str {
        "maximum sum of squared in-plane components over frames"
    }

    fn guarantee(&self) -> Guarantee {
        Guarantee::SufficientForLocality
    }

    fn supports(&self, n_qubits: usize) -> bool {
        (1..=MAX_QUBITS).contains(&n_qubits)
    }

    fn run(&self, t: &CorrelationTensor, opts: &OptimOptions) -> Result<TestOutcome> {
        check_support(self, t.n_qubits())?;
        let (value, frame) = sum_squares_max(t)?;
        let verdict = if value <= 1.0 + opts.tol {
            Verdict::Satisfied
        } else {
            Verdict::Inconclusive
        };
        Ok(TestOutcome {
            id: self.id(),
            value,
            threshold: 1.0,
            verdict,
            certificate: None,
            frame: Some(frame),
            settings: None,
        })
    }
}

struct HorodeckiTwoQubit;

impl ViolationTest for HorodeckiTwoQubit {
    fn id(&self) -> &'static str {
        "horodecki"
    }

    fn summary(&self) -> &'static str {
        "two-qubit closed form: top two eigenvalues of T^t T"
    }

    fn guarantee(&self) -> Guarantee {
        Guarantee::NecessaryAndSufficient
    }

    fn supports(&self, n_qubits: usize) -> bool {
        n_qubits == 2
    }

    fn run(&self, t: &CorrelationTensor, opts: &OptimOptions) -> Result<TestOutcome> {
        check_support(self, t.n_qubits())?;
        let value = horodecki_2qubit(t)?;
        let verdict = if value > 1.0 + opts.tol {
            Verdict::Violated
        } else {
            Verdict::Satisfied
        };
        Ok(TestOutcome {
            id: self.id(),
            value,
            threshold: 1.0,
            verdict,
            certificate: None,
            frame: None,
            settings: None,
        })
    }
}

struct DirectSearch;

impl ViolationTest for DirectSearch {
    fn id(&self) -> &'static str {
        "direct"
    }

    fn summary(&self) -> &'static str {
        "settings search on the general inequality, scaled by 2^-N"
    }

    fn guarantee(&self) -> Guarantee {
        Guarantee::WitnessOnly
    }

    fn supports(&self, n_qubits: usize) -> bool {
        (1..=MAX_QUBITS).contains(&n_qubits)
    }

    fn run(&self, t: &CorrelationTensor, opts: &OptimOptions) -> Result<TestOutcome> {
        check_support(self, t.n_qubits())?;
        let (raw, settings) = maximize_quantum_value(t, opts)?;
        let value = raw / (1u64 << t.n_qubits()) as f64;
        let verdict = if value > 1.0 + opts.tol {
            Verdict::Violated
        } else {
            Verdict::Inconclusive
        };
        Ok(TestOutcome {
            id: self.id(),
            value,
            threshold: 1.0,
            verdict,
            certificate: None,
            frame: None,
            settings: Some(settings),
        })
    }
}

static TESTS: [&dyn ViolationTest; 4] =
    [&TmodAscent, &SumSquares, &HorodeckiTwoQubit, &DirectSearch];

/// Every registered violation test, in registration order.
pub fn all_tests() -> &'static [&'static dyn ViolationTest] {
    &TESTS
}

/// Finds a registered test by id.
pub fn lookup_test(id: &str) -> Result<&'static dyn ViolationTest> {
    TESTS
        .iter()
        .find(|t| t.id() == id)
        .copied()
        .ok_or_else(|| Error::UnknownTest { id: id.into() })
}
