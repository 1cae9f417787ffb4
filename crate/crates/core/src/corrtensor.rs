//! Full correlation tensors of N-qubit states and their contractions
//! with measurement directions.
//!
//! `T[x1..xN] = Tr[rho (sigma_x1 x ... x sigma_xN)]` with axes
//! `x_j in {1,2,3}`. Entries are stored flat in base-3 mixed radix with
//! observer 1 as the most significant digit.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::bellcore::CorrelationTable;
use crate::error::{Error, Result};
use crate::qstate::{pauli, validate, DensityMatrix, MAX_QUBITS};

/// Orthonormality and unit-length tolerance for frames and directions.
pub const GEOMETRY_TOL: f64 = 1e-10;

/// Slack allowed on the physical entry range [-1, 1].
pub const ENTRY_RANGE_TOL: f64 = 1e-9;

/// Full correlation tensor with 3^N real entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTensor {
    n_qubits: usize,
    entries: Vec<f64>,
}

impl CorrelationTensor {
    /// Wraps raw entries; rejects entries outside [-1, 1] beyond slack.
    pub fn from_entries(n_qubits: usize, entries: Vec<f64>) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::QubitCountOutOfRange {
                n: n_qubits,
                max: MAX_QUBITS,
            });
        }
        let expected = 3usize.pow(n_qubits as u32);
        if entries.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                actual: entries.len(),
            });
        }
        for (index, &value) in entries.iter().enumerate() {
            if !value.is_finite() || value.abs() > 1.0 + ENTRY_RANGE_TOL {
                return Err(Error::EntryOutOfRange { index, value });
            }
        }
        Ok(Self { n_qubits, entries })
    }

    pub fn zeros(n_qubits: usize) -> Result<Self> {
        Self::from_entries(n_qubits, vec![0.0; 3usize.pow(n_qubits as u32)])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Flat index for 1-based axes, observer 1 most significant.
    pub fn index_of_axes(&self, axes: &[usize]) -> usize {
        assert_eq!(axes.len(), self.n_qubits);
        axes.iter().fold(0, |acc, &x| {
            assert!((1..=3).contains(&x));
            acc * 3 + (x - 1)
        })
    }

    /// 1-based axes for a flat index.
    pub fn axes_of_index(&self, mut index: usize) -> Vec<usize> {
        let mut axes = vec![0; self.n_qubits];
        for j in (0..self.n_qubits).rev() {
            axes[j] = index % 3 + 1;
            index /= 3;
        }
        axes
    }

    pub fn get(&self, axes: &[usize]) -> f64 {
        self.entries[self.index_of_axes(axes)]
    }

    /// Sum of squared entries; invariant under local frame rotations.
    pub fn frobenius_sq(&self) -> f64 {
        self.entries.iter().map(|e| e * e).sum()
    }

    /// Entries with |value| above `tol`, as (1-based axes, value) pairs.
    pub fn nonzero_components(&self, tol: f64) -> Vec<(Vec<usize>, f64)> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > tol)
            .map(|(i, &v)| (self.axes_of_index(i), v))
            .collect()
    }
}

/// One orthonormal triad of measurement axes per observer.
///
/// Row i of observer j's triad is the direction that becomes axis i
/// after [`rotate_frame`].
#[derive(Debug, Clone, PartialEq)]
pub struct LocalFrame {
    triads: Vec<[[f64; 3]; 3]>,
}

impl LocalFrame {
    /// Validates orthonormality of every triad within [`GEOMETRY_TOL`].
    pub fn from_triads(triads: Vec<[[f64; 3]; 3]>) -> Result<Self> {
        for (observer, triad) in triads.iter().enumerate() {
            let mut deviation: f64 = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let dot = dot3(&triad[i], &triad[j]);
                    let target = if i == j { 1.0 } else { 0.0 };
                    deviation = deviation.max((dot - target).abs());
                }
            }
            if deviation > GEOMETRY_TOL {
                return Err(Error::FrameNotOrthonormal {
                    observer: observer + 1,
                    deviation,
                });
            }
        }
        Ok(Self { triads })
    }

    /// Identity frame: every observer keeps the global axes.
    pub fn identity(n_qubits: usize) -> Self {
        let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        Self {
            triads: vec![id; n_qubits],
        }
    }

    /// Proper rotation triads from z-y-z Euler angles, one [a, b, c]
    /// triple per observer. Rows are the rotated axes, orthonormal by
    /// construction.
    pub fn from_euler(angles: &[[f64; 3]]) -> Self {
        let triads = angles
            .iter()
            .map(|&[a, b, c]| {
                let rz1 = rot_z(a);
                let ry = rot_y(b);
                let rz2 = rot_z(c);
                mat3_mul(&mat3_mul(&rz1, &ry), &rz2)
            })
            .collect();
        Self { triads }
    }

    pub fn n_observers(&self) -> usize {
        self.triads.len()
    }

    pub fn triads(&self) -> &[[[f64; 3]; 3]] {
        &self.triads
    }
}

/// Two measurement directions per observer.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSettings {
    directions: Vec<[[f64; 3]; 2]>,
}

impl MeasurementSettings {
    /// Validates unit length of every direction within [`GEOMETRY_TOL`].
    pub fn from_directions(directions: Vec<[[f64; 3]; 2]>) -> Result<Self> {
        for (observer, pair) in directions.iter().enumerate() {
            for (setting, dir) in pair.iter().enumerate() {
                let norm = dot3(dir, dir).sqrt();
                if (norm - 1.0).abs() > GEOMETRY_TOL {
                    return Err(Error::DirectionNotUnit {
                        observer: observer + 1,
                        setting: setting + 1,
                        norm,
                    });
                }
            }
        }
        Ok(Self { directions })
    }

    pub fn n_observers(&self) -> usize {
        self.directions.len()
    }

    pub fn directions(&self) -> &[[[f64; 3]; 2]] {
        &self.directions
    }
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn rot_z(t: f64) -> [[f64; 3]; 3] {
    let (s, c) = t.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

fn rot_y(t: f64) -> [[f64; 3]; 3] {
    let (s, c) = t.sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

fn mat3_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// Computes the full correlation tensor of a valid state.
///
/// One pass of partial contractions: the most significant qubit of the
/// current matrix is traced against each Pauli factor, shrinking the
/// matrix by half per level, so all 3^N traces share their prefixes.
pub fn compute_tensor(rho: &DensityMatrix) -> Result<CorrelationTensor> {
    let report = validate(rho);
    if !report.all_pass() {
        return Err(Error::InvalidState { report });
    }
    let n = rho.n_qubits();
    let paulis: Vec<DMatrix<C64>> = (1..=3).map(pauli).collect();
    let mut entries = Vec::with_capacity(3usize.pow(n as u32));
    contract_level(rho.matrix(), &paulis, &mut entries);
    Ok(CorrelationTensor { n_qubits: n, entries })
}

/// Tr[M (sigma x Rest)] = Tr[M'(sigma) Rest] with
/// M'(sigma)_ij = sum_ab sigma_ba M_(a:i),(b:j) over the leading qubit.
fn contract_level(m: &DMatrix<C64>, paulis: &[DMatrix<C64>], out: &mut Vec<f64>) {
    let dim = m.nrows();
    if dim == 1 {
        out.push(m[(0, 0)].re);
        return;
    }
    let half = dim / 2;
    for sigma in paulis {
        let mut reduced = DMatrix::<C64>::zeros(half, half);
        for a in 0..2 {
            for b in 0..2 {
                let weight = sigma[(b, a)];
                if weight == C64::new(0.0, 0.0) {
                    continue;
                }
                for i in 0..half {
                    for j in 0..half {
                        reduced[(i, j)] += weight * m[(a * half + i, b * half + j)];
                    }
                }
            }
        }
        contract_level(&reduced, paulis, out);
    }
}

/// Re-expresses the tensor in new local frames: one mode-j product with
/// observer j's triad per observer, O(N * 3^(N+1)) work.
pub fn rotate_frame(t: &CorrelationTensor, frame: &LocalFrame) -> Result<CorrelationTensor> {
    if frame.n_observers() != t.n_qubits {
        return Err(Error::QubitCountMismatch {
            a: t.n_qubits,
            b: frame.n_observers(),
        });
    }
    LocalFrame::from_triads(frame.triads.clone())?;
    Ok(CorrelationTensor {
        n_qubits: t.n_qubits,
        entries: rotate_entries(&t.entries, t.n_qubits, &frame.triads),
    })
}

/// Rotation core without the orthonormality check, for optimizer loops
/// whose frames are orthonormal by construction.
pub(crate) fn rotate_entries(
    entries: &[f64],
    n_qubits: usize,
    triads: &[[[f64; 3]; 3]],
) -> Vec<f64> {
    let mut entries = entries.to_vec();
    let total = entries.len();
    for (j, triad) in triads.iter().enumerate() {
        let stride = 3usize.pow((n_qubits - 1 - j) as u32);
        let mut next = vec![0.0; total];
        for (idx, &value) in entries.iter().enumerate() {
            let digit = (idx / stride) % 3;
            let base = idx - digit * stride;
            for (y, row) in triad.iter().enumerate() {
                next[base + y * stride] += row[digit] * value;
            }
        }
        entries = next;
    }
    entries
}

/// Correlation function for one unit direction per observer:
/// `E = sum_x T[x] prod_j n_j[x_j]`.
pub fn quantum_correlation(t: &CorrelationTensor, directions: &[[f64; 3]]) -> Result<f64> {
    if directions.len() != t.n_qubits {
        return Err(Error::QubitCountMismatch {
            a: t.n_qubits,
            b: directions.len(),
        });
    }
    for (observer, dir) in directions.iter().enumerate() {
        let norm = dot3(dir, dir).sqrt();
        if (norm - 1.0).abs() > GEOMETRY_TOL {
            return Err(Error::DirectionNotUnit {
                observer: observer + 1,
                setting: 1,
                norm,
            });
        }
    }
    let mut partial = t.entries.clone();
    for dir in directions.iter().rev() {
        partial = contract_last_mode(&partial, dir);
    }
    Ok(partial[0])
}

/// Contracts the least significant mode (consecutive triples).
fn contract_last_mode(entries: &[f64], dir: &[f64; 3]) -> Vec<f64> {
    entries
        .chunks_exact(3)
        .map(|c| c[0] * dir[0] + c[1] * dir[1] + c[2] * dir[2])
        .collect()
}

/// Contracts the most significant mode (three equal blocks).
fn contract_first_mode(entries: &[f64], dir: &[f64; 3]) -> Vec<f64> {
    let third = entries.len() / 3;
    (0..third)
        .map(|r| {
            dir[0] * entries[r] + dir[1] * entries[third + r] + dir[2] * entries[2 * third + r]
        })
        .collect()
}

/// Two-setting correlation table over all 2^N joint settings, k_j = 1
/// first, observer 1 most significant. Shared-prefix contraction keeps
/// this near O(3^(N+1)) instead of 2^N full contractions.
pub fn correlation_table(
    t: &CorrelationTensor,
    settings: &MeasurementSettings,
) -> Result<CorrelationTable> {
    if settings.n_observers() != t.n_qubits {
        return Err(Error::QubitCountMismatch {
            a: t.n_qubits,
            b: settings.n_observers(),
        });
    }
    MeasurementSettings::from_directions(settings.directions.clone())?;
    let mut out = Vec::with_capacity(1usize << t.n_qubits);
    table_level(&t.entries, &settings.directions, &mut out);
    CorrelationTable::from_entries(t.n_qubits, out)
}

fn table_level(entries: &[f64], directions: &[[[f64; 3]; 2]], out: &mut Vec<f64>) {
    if directions.is_empty() {
        out.push(entries[0]);
        return;
    }
    for setting in 0..2 {
        let reduced = contract_first_mode(entries, &directions[0][setting]);
        table_level(&reduced, &directions[1..], out);
    }
}
