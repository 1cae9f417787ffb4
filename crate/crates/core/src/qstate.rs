//! N-qubit state construction and validation.
//!
//! States are dense density matrices over at most [`MAX_QUBITS`] qubits,
//! with qubit 1 occupying the most significant bit of the computational
//! basis index.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest supported register size; 2^8 x 2^8 dense matrices stay cheap.
pub const MAX_QUBITS: usize = 8;

/// Tolerance on |Tr(rho) - 1| for a valid state.
pub const TRACE_TOL: f64 = 1e-12;

/// Tolerance on the Hermiticity deviation max |rho_ij - conj(rho_ji)|.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Most negative eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = -1e-9;

/// Pauli matrix for axis 1, 2 or 3 (x, y, z).
pub fn pauli(axis: usize) -> DMatrix<C64> {
    let z = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match axis {
        1 => DMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        2 => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        3 => DMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
        _ => panic!("Pauli axis must be 1, 2 or 3, got {axis}"),
    }
}

/// Observable n.sigma for a real direction vector n.
pub fn direction_observable(n: [f64; 3]) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(2, 2);
    for (axis, weight) in n.iter().enumerate() {
        m += pauli(axis + 1) * C64::new(*weight, 0.0);
    }
    m
}

fn qubit_count_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::NotPowerOfTwo { len: dim });
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::QubitCountOutOfRange { n, max: MAX_QUBITS });
    }
    Ok(n)
}

/// Normalized pure state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: DVector<C64>,
}

impl PureState {
    /// Normalizes `amplitudes` into a pure state.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let n_qubits = qubit_count_for_dim(amplitudes.len())?;
        let v = DVector::from_vec(amplitudes);
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            n_qubits,
            amplitudes: v / C64::new(norm, 0.0),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    /// Rank-one density matrix |psi><psi|.
    pub fn density(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix {
            n_qubits: self.n_qubits,
            mat: m,
        }
    }
}

/// Dense N-qubit density matrix.
///
/// Construction symmetrizes the stored matrix, so Hermiticity is exact.
/// Unit trace and positivity are checked by [`validate`], not enforced
/// here; operations that require a physical state call `validate` first.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    mat: DMatrix<C64>,
}

impl DensityMatrix {
    /// Wraps a square matrix, symmetrizing it to (M + M^dagger)/2.
    pub fn from_matrix(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::SizeMismatch {
                expected: mat.nrows() * mat.nrows(),
                actual: mat.nrows() * mat.ncols(),
            });
        }
        let n_qubits = qubit_count_for_dim(mat.nrows())?;
        let herm = (&mat + mat.adjoint()) * C64::new(0.5, 0.0);
        Ok(Self { n_qubits, mat: herm })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn trace(&self) -> C64 {
        self.mat.diagonal().sum()
    }
}

/// Builds the normalized pure-state density matrix for `amplitudes`.
pub fn make_pure(amplitudes: Vec<C64>) -> Result<DensityMatrix> {
    Ok(PureState::new(amplitudes)?.density())
}

/// GHZ state (|0...0> + |1...1>)/sqrt(2) on `n` >= 2 qubits.
pub fn make_ghz(n: usize) -> Result<PureState> {
    if n < 2 {
        return Err(Error::QubitCountTooSmall { n, min: 2 });
    }
    if n > MAX_QUBITS {
        return Err(Error::QubitCountOutOfRange { n, max: MAX_QUBITS });
    }
    let dim = 1usize << n;
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    amps[0] = C64::new(1.0, 0.0);
    amps[dim - 1] = C64::new(1.0, 0.0);
    PureState::new(amps)
}

/// Mixes `rho` with white noise: v*rho + (1-v)*I/2^N.
///
/// Mixing is affine in the state, so mixing at v then w equals mixing
/// once at v*w.
pub fn mix_with_noise(rho: &DensityMatrix, v: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&v) || !v.is_finite() {
        return Err(Error::NoiseWeightOutOfRange { v });
    }
    let dim = rho.dim();
    let uniform = (1.0 - v) / dim as f64;
    let mut mat = rho.mat.clone() * C64::new(v, 0.0);
    for k in 0..dim {
        mat[(k, k)] += C64::new(uniform, 0.0);
    }
    Ok(DensityMatrix {
        n_qubits: rho.n_qubits,
        mat,
    })
}

/// Product state from one Bloch vector per qubit: tensor product of
/// (I + b.sigma)/2 factors. Bloch vectors may have length below 1
/// (mixed single-qubit factors); length above 1 is rejected.
pub fn product_state(bloch: &[[f64; 3]]) -> Result<DensityMatrix> {
    if bloch.is_empty() {
        return Err(Error::QubitCountTooSmall { n: 0, min: 1 });
    }
    if bloch.len() > MAX_QUBITS {
        return Err(Error::QubitCountOutOfRange {
            n: bloch.len(),
            max: MAX_QUBITS,
        });
    }
    let mut mat = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for (index, b) in bloch.iter().enumerate() {
        let len = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        if len > 1.0 + 1e-12 {
            return Err(Error::BlochVectorTooLong { index, len });
        }
        let mut factor = direction_observable(*b);
        factor[(0, 0)] += C64::new(1.0, 0.0);
        factor[(1, 1)] += C64::new(1.0, 0.0);
        factor *= C64::new(0.5, 0.0);
        mat = mat.kronecker(&factor);
    }
    Ok(DensityMatrix {
        n_qubits: bloch.len(),
        mat,
    })
}

/// Diagnostics from checking the three density-matrix invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub hermiticity_deviation: f64,
    pub trace_deviation: f64,
    pub min_eigenvalue: f64,
}

impl ValidationReport {
    pub fn hermitian_ok(&self) -> bool {
        self.hermiticity_deviation <= HERMITICITY_TOL
    }

    pub fn trace_ok(&self) -> bool {
        self.trace_deviation <= TRACE_TOL
    }

    pub fn psd_ok(&self) -> bool {
        self.min_eigenvalue >= PSD_TOL
    }

    pub fn all_pass(&self) -> bool {
        self.hermitian_ok() && self.trace_ok() && self.psd_ok()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "hermiticity deviation {:.3e} ({}), trace deviation {:.3e} ({}), min eigenvalue {:.3e} ({})",
            self.hermiticity_deviation,
            if self.hermitian_ok() { "ok" } else { "FAIL" },
            self.trace_deviation,
            if self.trace_ok() { "ok" } else { "FAIL" },
            self.min_eigenvalue,
            if self.psd_ok() { "ok" } else { "FAIL" },
        )
    }
}

/// Measures Hermiticity, trace and positivity of `rho`.
pub fn validate(rho: &DensityMatrix) -> ValidationReport {
    let dim = rho.dim();
    let mut herm: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            herm = herm.max((rho.mat[(i, j)] - rho.mat[(j, i)].conj()).norm());
        }
    }
    let trace_deviation = (rho.trace() - C64::new(1.0, 0.0)).norm();
    // The eigensolver assumes a Hermitian input; measure the symmetrized
    // spectrum, which matches the stored matrix whenever herm is small.
    let sym = (&rho.mat + rho.mat.adjoint()) * C64::new(0.5, 0.0);
    let eigen = sym.symmetric_eigenvalues();
    let min_eigenvalue = eigen.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    ValidationReport {
        hermiticity_deviation: herm,
        trace_deviation,
        min_eigenvalue,
    }
}
