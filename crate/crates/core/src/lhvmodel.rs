//! Constructive local hidden variable models for correlation tables
//! inside the general-inequality polytope.
//!
//! The hidden variable is a pair: an outcome-relation vector
//! `s in {-1,1}^N` (observer j's two outcomes satisfy
//! `A_j(n1) = s_j A_j(n2)`) plus a product sign demand on the first
//! settings. Sector s carries probability `|W(s)|/2^N` from the
//! table's Walsh coefficient `W(s)`, spread uniformly over the
//! 2^(N-1) deterministic strategies meeting both constraints; the
//! leftover mass is white noise, uniform over all 4^N strategies.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::bellcore::{
    general_bound, walsh_transform, CorrelationTable, BOUND_SLACK,
    MAX_ENUMERATION_QUBITS,
};
use crate::error::{Error, Result};

/// Fixed outcomes for both settings of every observer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DeterministicStrategy {
    /// `outcomes[j] = [A_j(n1), A_j(n2)]`, each +-1.
    pub outcomes: Vec<[i8; 2]>,
}

impl DeterministicStrategy {
    /// Product of outcomes for one joint setting choice (1-based).
    pub fn product(&self, settings: &[usize]) -> i64 {
        self.outcomes
            .iter()
            .zip(settings.iter())
            .map(|(o, &k)| o[k - 1] as i64)
            .product()
    }
}

/// Explicit local model: sector probabilities and sign demands over
/// the 2^N outcome-relation vectors, plus a white-noise weight.
/// Sector index bit j is set exactly when `s_j = -1` (observer 1 most
/// significant), matching the Walsh index of the source table.
#[derive(Debug, Clone, PartialEq)]
pub struct LhvModel {
    n_qubits: usize,
    sector_probabilities: Vec<f64>,
    sector_signs: Vec<i8>,
    noise_weight: f64,
}

impl LhvModel {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn sector_probabilities(&self) -> &[f64] {
        &self.sector_probabilities
    }

    pub fn sector_signs(&self) -> &[i8] {
        &self.sector_signs
    }

    pub fn noise_weight(&self) -> f64 {
        self.noise_weight
    }

    /// Total probability mass; 1 within 1e-12 by construction.
    pub fn total_mass(&self) -> f64 {
        self.sector_probabilities.iter().sum::<f64>() + self.noise_weight
    }

    /// The 2^(N-1) strategies of one sector: every choice of
    /// first-setting outcomes whose product meets the sign demand,
    /// second settings fixed by `A_j(n2) = s_j A_j(n1)`.
    pub fn sector_strategies(&self, sector: usize) -> Vec<DeterministicStrategy> {
        let n = self.n_qubits;
        let sign = self.sector_signs[sector] as i64;
        let mut out = Vec::with_capacity(1 << (n - 1));
        for choice in 0..1usize << n {
            let firsts: Vec<i8> = (0..n)
                .map(|j| if (choice >> (n - 1 - j)) & 1 == 1 { -1 } else { 1 })
                .collect();
            let product: i64 = firsts.iter().map(|&a| a as i64).product();
            if product != sign {
                continue;
            }
            let outcomes = firsts
                .iter()
                .enumerate()
                .map(|(j, &a1)| {
                    let s_j: i8 = if (sector >> (n - 1 - j)) & 1 == 1 { -1 } else { 1 };
                    [a1, s_j * a1]
                })
                .collect();
            out.push(DeterministicStrategy { outcomes });
        }
        out
    }

    /// Full distribution over deterministic strategies: sector mass
    /// split uniformly within each sector, noise split uniformly over
    /// all 4^N strategies. Weights of coinciding strategies add.
    pub fn strategy_distribution(&self) -> Vec<(DeterministicStrategy, f64)> {
        let n = self.n_qubits;
        let mut weights: BTreeMap<DeterministicStrategy, f64> = BTreeMap::new();
        let per_sector = 1.0 / (1u64 << (n - 1)) as f64;
        for (sector, &p) in self.sector_probabilities.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for strategy in self.sector_strategies(sector) {
                *weights.entry(strategy).or_insert(0.0) += p * per_sector;
            }
        }
        if self.noise_weight > 0.0 {
            let per_strategy = self.noise_weight / 4f64.powi(n as i32);
            for code in 0..1usize << (2 * n) {
                let outcomes = (0..n)
                    .map(|j| {
                        let a1: i8 = if (code >> (2 * j)) & 1 == 1 { -1 } else { 1 };
                        let a2: i8 = if (code >> (2 * j + 1)) & 1 == 1 { -1 } else { 1 };
                        [a1, a2]
                    })
                    .collect();
                *weights
                    .entry(DeterministicStrategy { outcomes })
                    .or_insert(0.0) += per_strategy;
            }
        }
        weights.into_iter().collect()
    }
}

/// Builds the explicit local model of a table satisfying the general
/// inequality; fails with the measured value when it is violated.
pub fn build_lhv(table: &CorrelationTable) -> Result<LhvModel> {
    let n = table.n_qubits();
    let bound = general_bound(n);
    let w = walsh_transform(table.entries());
    let value: f64 = w.iter().map(|x| x.abs()).sum();
    if value > bound + BOUND_SLACK {
        return Err(Error::NoLocalModel { value, bound });
    }
    let sector_probabilities: Vec<f64> = w.iter().map(|x| x.abs() / bound).collect();
    let sector_signs: Vec<i8> = w.iter().map(|&x| if x >= 0.0 { 1 } else { -1 }).collect();
    let mass: f64 = sector_probabilities.iter().sum();
    let noise_weight = (1.0 - mass).max(0.0);
    Ok(LhvModel {
        n_qubits: n,
        sector_probabilities,
        sector_signs,
        noise_weight,
    })
}

/// Expected correlation table of the model.
///
/// Every strategy of sector s yields the same product
/// `sign_s * prod_j s_j^(k_j - 1)` and the noise term averages to
/// zero, so the expectation is the Walsh transform of the signed
/// sector probabilities.
pub fn reconstruct(model: &LhvModel) -> CorrelationTable {
    let signed: Vec<f64> = model
        .sector_probabilities
        .iter()
        .zip(model.sector_signs.iter())
        .map(|(&p, &s)| p * s as f64)
        .collect();
    let entries = walsh_transform(&signed);
    CorrelationTable::from_entries(model.n_qubits, entries)
        .expect("model expectation is a valid table")
}

/// Checks every inequality of the family by exhaustive enumeration of
/// all 2^(2^N) sign functions; true exactly when none is violated
/// beyond [`BOUND_SLACK`]. Capped at [`MAX_ENUMERATION_QUBITS`].
pub fn lhv_exists_bruteforce(table: &CorrelationTable) -> Result<bool> {
    let n = table.n_qubits();
    if n > MAX_ENUMERATION_QUBITS {
        return Err(Error::TooManyQubits {
            n,
            max: MAX_ENUMERATION_QUBITS,
        });
    }
    let bound = general_bound(n) + BOUND_SLACK;
    let w = walsh_transform(table.entries());
    let size = w.len();
    let ok = (0u64..1u64 << size).into_par_iter().all(|code| {
        let mut total = 0.0;
        for (s, &ws) in w.iter().enumerate() {
            if (code >> s) & 1 == 1 {
                total -= ws;
            } else {
                total += ws;
            }
        }
        total.abs() <= bound
    });
    Ok(ok)
}
