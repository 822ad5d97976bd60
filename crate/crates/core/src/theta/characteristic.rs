use serde::Serialize;

use crate::error::{Error, Result};

/// Half-integer characteristic `[ε′/2; ε″/2]` with `ε′, ε″ ∈ {0,1}^g`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct HalfCharacteristic {
    pub eps_prime: Vec<u8>,
    pub eps_dblprime: Vec<u8>,
}

impl HalfCharacteristic {
    pub fn new(eps_prime: Vec<u8>, eps_dblprime: Vec<u8>) -> Result<Self> {
        if eps_prime.len() != eps_dblprime.len() || eps_prime.is_empty() {
            return Err(Error::InvalidInput("characteristic halves must have equal, nonzero length".into()));
        }
        if eps_prime.iter().chain(&eps_dblprime).any(|&b| b > 1) {
            return Err(Error::InvalidInput("characteristic entries must be 0 or 1".into()));
        }
        Ok(Self { eps_prime, eps_dblprime })
    }

    pub fn zero(g: usize) -> Self {
        Self { eps_prime: vec![0; g], eps_dblprime: vec![0; g] }
    }

    /// Characteristic `[ε/2; 0]` of the second-order theta functions.
    pub fn second_order(eps: &[u8]) -> Self {
        Self { eps_prime: eps.to_vec(), eps_dblprime: vec![0; eps.len()] }
    }

    pub fn genus(&self) -> usize {
        self.eps_prime.len()
    }

    /// `ε′ · ε″ mod 2`; 1 means the theta function is odd.
    pub fn parity(&self) -> u8 {
        (self.eps_prime.iter().zip(&self.eps_dblprime).map(|(a, b)| (a * b) as u32).sum::<u32>() % 2) as u8
    }

    pub fn is_odd(&self) -> bool {
        self.parity() == 1
    }

    pub(crate) fn a(&self) -> Vec<f64> {
        self.eps_prime.iter().map(|&b| 0.5 * b as f64).collect()
    }

    pub(crate) fn b(&self) -> Vec<f64> {
        self.eps_dblprime.iter().map(|&b| 0.5 * b as f64).collect()
    }

    /// All `2^{2g}` characteristics, `ε′` outer, each half in [`epsilon_vectors`] order.
    pub fn all(g: usize) -> Vec<Self> {
        let eps = epsilon_vectors(g);
        let mut out = Vec::with_capacity(eps.len() * eps.len());
        for p in &eps {
            for q in &eps {
                out.push(Self { eps_prime: p.clone(), eps_dblprime: q.clone() });
            }
        }
        out
    }
}

/// The vectors `ε ∈ {0,1}^g` in lexicographic order with `ε₁` most
/// significant. Index `i` has `ε_k` equal to bit `g − k` of `i`. Every module
/// and file format uses this order.
pub fn epsilon_vectors(g: usize) -> Vec<Vec<u8>> {
    (0..1usize << g).map(|i| epsilon_from_index(i, g)).collect()
}

pub fn epsilon_from_index(i: usize, g: usize) -> Vec<u8> {
    (0..g).map(|k| ((i >> (g - 1 - k)) & 1) as u8).collect()
}
