//! Two-setting correlation tables and the single general Bell
//! inequality that characterizes their local hidden variable polytope.
//!
//! A table holds `E(k_1..k_N)` for settings `k_j in {1,2}`, stored at
//! bit index `k_j - 1` with observer 1 most significant. The general
//! inequality bounds the L1 norm of the table's unnormalized
//! Walsh-Hadamard transform by 2^N; correlations admit a local model
//! exactly when the bound holds. Each individual inequality of the
//! family is a sign function `S : {-1,1}^N -> {-1,+1}` paired with the
//! same transform.

use crate::error::{Error, Result};
use crate::qstate::MAX_QUBITS;

/// Largest register for exhaustive sign-function enumeration
/// (2^(2^4) = 65536 functions).
pub const MAX_ENUMERATION_QUBITS: usize = 4;

/// Absolute slack on comparisons against the bound 2^N.
pub const BOUND_SLACK: f64 = 1e-12;

/// Local-model bound 2^N of the general inequality.
pub fn general_bound(n_qubits: usize) -> f64 {
    (1u64 << n_qubits) as f64
}

/// Correlation function values for all 2^N joint settings.
///
/// Quantum and local-model tables lie in [-1, 1]; arbitrary finite
/// entries are accepted so polytope experiments can rescale freely,
/// with [`CorrelationTable::is_physical`] flagging the range.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    n_qubits: usize,
    entries: Vec<f64>,
}

impl CorrelationTable {
    pub fn from_entries(n_qubits: usize, entries: Vec<f64>) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&n_qubits) {
            return Err(Error::QubitCountOutOfRange {
                n: n_qubits,
                max: MAX_QUBITS,
            });
        }
        let expected = 1usize << n_qubits;
        if entries.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                actual: entries.len(),
            });
        }
        for (index, &value) in entries.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::EntryOutOfRange { index, value });
            }
        }
        Ok(Self { n_qubits, entries })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Bit index for 1-based settings, observer 1 most significant.
    pub fn index_of_settings(&self, settings: &[usize]) -> usize {
        assert_eq!(settings.len(), self.n_qubits);
        settings.iter().fold(0, |acc, &k| {
            assert!((1..=2).contains(&k));
            (acc << 1) | (k - 1)
        })
    }

    pub fn get(&self, settings: &[usize]) -> f64 {
        self.entries[self.index_of_settings(settings)]
    }

    /// True when every entry lies in [-1, 1] within `tol`.
    pub fn is_physical(&self, tol: f64) -> bool {
        self.entries.iter().all(|e| e.abs() <= 1.0 + tol)
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        Self::from_entries(
            self.n_qubits,
            self.entries.iter().map(|e| e * factor).collect(),
        )
    }
}

/// Unnormalized Walsh-Hadamard transform (involution up to a factor
/// 2^N): `W[s] = sum_k (-1)^popcount(s & k) v[k]`.
pub fn walsh_transform(v: &[f64]) -> Vec<f64> {
    assert!(v.len().is_power_of_two());
    let mut w = v.to_vec();
    let mut h = 1;
    while h < w.len() {
        for chunk in w.chunks_exact_mut(2 * h) {
            for i in 0..h {
                let a = chunk[i];
                let b = chunk[i + h];
                chunk[i] = a + b;
                chunk[i + h] = a - b;
            }
        }
        h *= 2;
    }
    w
}

/// Integer Walsh-Hadamard transform for exact +-1 table identities.
pub fn walsh_transform_i64(v: &[i64]) -> Vec<i64> {
    assert!(v.len().is_power_of_two());
    let mut w = v.to_vec();
    let mut h = 1;
    while h < w.len() {
        for chunk in w.chunks_exact_mut(2 * h) {
            for i in 0..h {
                let a = chunk[i];
                let b = chunk[i + h];
                chunk[i] = a + b;
                chunk[i + h] = a - b;
            }
        }
        h *= 2;
    }
    w
}

/// Left-hand side of the single general Bell inequality: the L1 norm
/// of the table's Walsh-Hadamard transform. A local hidden variable
/// model exists exactly when this does not exceed 2^N.
pub fn general_lhs(table: &CorrelationTable) -> f64 {
    walsh_transform(&table.entries)
        .iter()
        .map(|w| w.abs())
        .sum()
}

/// One inequality of the family: a sign choice per hidden outcome
/// vector `s in {-1,1}^N`. Index bit j (observer 1 most significant)
/// is set exactly when `s_j = -1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignFunction {
    n_qubits: usize,
    negative: Vec<bool>,
}

impl SignFunction {
    pub fn from_signs(n_qubits: usize, signs: &[i8]) -> Result<Self> {
        let expected = 1usize
            .checked_shl(n_qubits as u32)
            .filter(|_| (1..=MAX_QUBITS).contains(&n_qubits))
            .ok_or(Error::QubitCountOutOfRange {
                n: n_qubits,
                max: MAX_QUBITS,
            })?;
        if signs.len() != expected {
            return Err(Error::SizeMismatch {
                expected,
                actual: signs.len(),
            });
        }
        let negative = signs
            .iter()
            .enumerate()
            .map(|(index, &s)| match s {
                1 => Ok(false),
                -1 => Ok(true),
                _ => Err(Error::EntryOutOfRange {
                    index,
                    value: s as f64,
                }),
            })
            .collect::<Result<Vec<bool>>>()?;
        Ok(Self { n_qubits, negative })
    }

    /// The all-plus sign function; its inequality bounds a single
    /// Walsh coefficient.
    pub fn trivial(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            negative: vec![false; 1 << n_qubits],
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Sign at hidden outcome index `s` as +-1.
    pub fn value(&self, s: usize) -> f64 {
        if self.negative[s] {
            -1.0
        } else {
            1.0
        }
    }

    pub fn signs(&self) -> Vec<i8> {
        self.negative.iter().map(|&n| if n { -1 } else { 1 }).collect()
    }

    /// Relabels observers: bit j of the new argument feeds bit
    /// `perm[j]` of the old one. `perm` must be a permutation of 0..N.
    pub fn permute_observers(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_qubits;
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::SizeMismatch {
                expected: n,
                actual: perm.len(),
            });
        }
        let size = 1usize << n;
        let mut negative = vec![false; size];
        for (s, slot) in negative.iter_mut().enumerate() {
            let mut old = 0usize;
            for (j, &p) in perm.iter().enumerate() {
                let bit = (s >> (n - 1 - j)) & 1;
                old |= bit << (n - 1 - p);
            }
            *slot = self.negative[old];
        }
        Ok(Self { n_qubits: n, negative })
    }

    /// Swaps the two settings of one observer (0-based). The family
    /// value of the setting-swapped table under the original function
    /// equals the original table under the returned one.
    pub fn swap_settings(&self, observer: usize) -> Result<Self> {
        if observer >= self.n_qubits {
            return Err(Error::SizeMismatch {
                expected: self.n_qubits,
                actual: observer,
            });
        }
        let bit = self.n_qubits - 1 - observer;
        let negative = self
            .negative
            .iter()
            .enumerate()
            .map(|(s, &neg)| neg ^ ((s >> bit) & 1 == 1))
            .collect();
        Ok(Self {
            n_qubits: self.n_qubits,
            negative,
        })
    }

    /// Global sign flip; family values are unchanged.
    pub fn negate(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            negative: self.negative.iter().map(|n| !n).collect(),
        }
    }
}

/// Family inequality value `|sum_s S(s) W(s)|` for one sign function.
/// Never exceeds [`general_lhs`] of the same table.
pub fn family_lhs(table: &CorrelationTable, sf: &SignFunction) -> Result<f64> {
    if table.n_qubits != sf.n_qubits {
        return Err(Error::QubitCountMismatch {
            a: table.n_qubits,
            b: sf.n_qubits,
        });
    }
    let w = walsh_transform(&table.entries);
    let sum: f64 = w
        .iter()
        .enumerate()
        .map(|(s, &ws)| sf.value(s) * ws)
        .sum();
    Ok(sum.abs())
}

/// Sign function whose inequality is the two-setting series: CHSH
/// class at N = 2, the three-observer inequality at N = 3 (scaled by
/// 4), and so on. The sign depends only on the count m of -1 entries:
/// +1 for m = 0, 3 (mod 4), -1 for m = 1, 2 (mod 4), the exact value
/// of sqrt(2) cos(-pi/4 + (sum(s) - N) pi/4).
pub fn mabk_sign_function(n_qubits: usize) -> Result<SignFunction> {
    if !(1..=MAX_QUBITS).contains(&n_qubits) {
        return Err(Error::QubitCountOutOfRange {
            n: n_qubits,
            max: MAX_QUBITS,
        });
    }
    let negative = (0..1usize << n_qubits)
        .map(|s| matches!(s.count_ones() % 4, 1 | 2))
        .collect();
    Ok(SignFunction {
        n_qubits,
        negative,
    })
}

/// Iterates all 2^(2^N) sign functions, capped at
/// [`MAX_ENUMERATION_QUBITS`] observers.
pub fn enumerate_sign_functions(
    n_qubits: usize,
) -> Result<impl Iterator<Item = SignFunction>> {
    if n_qubits < 1 {
        return Err(Error::QubitCountTooSmall {
            n: n_qubits,
            min: 1,
        });
    }
    if n_qubits > MAX_ENUMERATION_QUBITS {
        return Err(Error::TooManyQubits {
            n: n_qubits,
            max: MAX_ENUMERATION_QUBITS,
        });
    }
    let bits = 1usize << n_qubits;
    Ok((0u64..(1u64 << bits)).map(move |code| SignFunction {
        n_qubits,
        negative: (0..bits).map(|s| (code >> s) & 1 == 1).collect(),
    }))
}
