//! Brute-force spectral check of the original coupled pair.
//!
//! The dimensionless coupled system, written as a joint eigenproblem in the
//! eigenvalue `lambda = e2 + 1/2`, is
//!
//! ```text
//!   [ H0 + F Z + F b I     v I ] [psi1]            [psi1]
//!   [       v I            H0  ] [psi2]  = lambda  [psi2]
//! ```
//!
//! in the number basis of the unshifted oscillator, where `H0 = diag(k+1/2)`
//! and `Z` is the tridiagonal position matrix. The `F b` shift encodes
//! `e1 = e2 - F b`. Gaussian-decaying states converge spectrally in this
//! basis, and the algebraically accessible levels `lambda = n + 1/2` are
//! polynomial-times-Gaussian, so they sit in the truncated matrix exactly.
//!
//! Only the lower half of the computed spectrum (indices below `N/2`) is
//! trusted against truncation; that is a fixed reporting policy.

use crate::linalg::{symmetric_eigenvalues, DMat};
use crate::model::ModelParams;
use crate::{Error, Result};

/// Truncation and matching policy for the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Number of oscillator basis functions per channel.
    pub basis_size: usize,
    /// A level counts as matched when the nearest eigenvalue is closer than
    /// this.
    pub match_tolerance: f64,
}

impl OracleConfig {
    pub fn new(basis_size: usize, match_tolerance: f64) -> Result<Self> {
        if basis_size < 8 {
            return Err(Error::InvalidInput("basis size must be at least 8".into()));
        }
        if !(match_tolerance > 0.0) {
            return Err(Error::InvalidInput(
                "match tolerance must be positive".into(),
            ));
        }
        Ok(OracleConfig {
            basis_size,
            match_tolerance,
        })
    }

    /// Truncation safety margin: checking level `n` needs `N >= n + 20`.
    pub fn validate_for_level(&self, n: usize) -> Result<()> {
        if self.basis_size < n + 20 {
            return Err(Error::InvalidInput(format!(
                "basis size {} is too small for level {n}; need at least {}",
                self.basis_size,
                n + 20
            )));
        }
        Ok(())
    }
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            basis_size: 200,
            match_tolerance: 1e-7,
        }
    }
}

/// Position operator in the number basis: tridiagonal with
/// `sqrt((k+1)/2)` on the off-diagonals.
pub fn position_matrix(n: usize) -> DMat {
    DMat::from_fn(n, n, |i, j| {
        if i.abs_diff(j) == 1 {
            let k = i.min(j);
            ((k as f64 + 1.0) / 2.0).sqrt()
        } else {
            0.0
        }
    })
}

/// The `2N x 2N` joint eigenproblem matrix, exactly symmetric as stored.
pub fn coupled_matrix(mp: &ModelParams, cfg: &OracleConfig) -> DMat {
    let n = cfg.basis_size;
    let z = position_matrix(n);
    let f = mp.slope_diff;
    let fb = mp.slope_diff * mp.shift;
    let v = mp.coupling;
    DMat::from_fn(2 * n, 2 * n, |i, j| {
        let (ci, cj) = (i / n, j / n);
        let (ki, kj) = (i % n, j % n);
        match (ci, cj) {
            (0, 0) => {
                let h0 = if ki == kj { ki as f64 + 0.5 + fb } else { 0.0 };
                h0 + f * z.get(ki, kj)
            }
            (1, 1) => {
                if ki == kj {
                    ki as f64 + 0.5
                } else {
                    0.0
                }
            }
            _ => {
                if ki == kj {
                    v
                } else {
                    0.0
                }
            }
        }
    })
}

/// Match record for one exceptional level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchRecord {
    pub n: usize,
    /// `n + 1/2`.
    pub target: f64,
    pub nearest: f64,
    pub gap: f64,
    pub matched: bool,
}

/// Sorted spectrum of the coupled matrix, with the trusted prefix length and
/// any accumulated level matches.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// All `2N` eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// How many of the lowest eigenvalues are trusted (`N/2`).
    pub trusted: usize,
    pub matches: Vec<MatchRecord>,
}

/// Diagonalize the coupled system. Eigenvalues come back ascending; only the
/// first `trusted` of them should be compared against anything.
pub fn spectrum(mp: &ModelParams, cfg: &OracleConfig) -> Result<SpectrumReport> {
    let m = coupled_matrix(mp, cfg);
    debug_assert!(m.is_symmetric());
    let eigenvalues = symmetric_eigenvalues(&m)?;
    Ok(SpectrumReport {
        eigenvalues,
        trusted: cfg.basis_size / 2,
        matches: Vec::new(),
    })
}

/// Gap between `n + 1/2` and the nearest trusted eigenvalue.
pub fn match_exceptional(
    report: &SpectrumReport,
    n: usize,
    cfg: &OracleConfig,
) -> Result<MatchRecord> {
    cfg.validate_for_level(n)?;
    let target = n as f64 + 0.5;
    let trusted = &report.eigenvalues[..report.trusted.min(report.eigenvalues.len())];
    let top = trusted
        .last()
        .copied()
        .ok_or_else(|| Error::InvalidInput("empty spectrum".into()))?;
    if target > top {
        return Err(Error::InvalidInput(format!(
            "target {target} is outside the trusted spectral range (max {top})"
        )));
    }
    let mut nearest = trusted[0];
    let mut gap = (trusted[0] - target).abs();
    for &ev in trusted {
        let g = (ev - target).abs();
        if g < gap {
            gap = g;
            nearest = ev;
        }
    }
    Ok(MatchRecord {
        n,
        target,
        nearest,
        gap,
        matched: gap <= cfg.match_tolerance,
    })
}

/// Run [`match_exceptional`] over a level range and store the records in the
/// report.
pub fn match_levels(
    report: &mut SpectrumReport,
    levels: impl IntoIterator<Item = usize>,
    cfg: &OracleConfig,
) -> Result<()> {
    for n in levels {
        let rec = match_exceptional(report, n, cfg)?;
        report.matches.push(rec);
    }
    Ok(())
}
