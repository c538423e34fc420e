//! Truncated Fock-space realization of the quantized constant of motion.
//!
//! The velocity operator takes the place of the canonical momentum, the
//! constant of motion takes the place of the Hamiltonian, and the operator
//! to diagonalize splits as K = K_o + K_I with K_o = ħω(N + 1/2) diagonal
//! and K_I built from the number, sine, cosine, and phase operators.
//!
//! All operators live on the basis |0⟩..|n_max−1⟩. Matrix elements within
//! `trusted_window` indices of the bottom are unaffected by the basis
//! truncation; the sine/cosine powers in the phase-operator series couple
//! |n⟩ to |n ± (2k+1)⟩, so edge contamination reaches exactly
//! 2·series_k_max + 1 indices below the top.

mod operators;
mod perturbation;

pub use operators::{
    build_j_op, build_ladder, build_phi_op, build_sine_cosine, commutator, SeriesDiagnostics,
};
pub use perturbation::{
    build_k_interaction, closed_form_deviation_table, diagonalize_k, first_order_shift,
    first_order_shift_closed, hermitian_eigenvalues, matrix_element_closed_form,
    second_order_closed_form, second_order_shift_sum, shifted_frequency, MatrixElementDeviation,
    SecondOrderShift,
};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::SpectrumError;
use crate::params::OscillatorParams;

/// Basis and series truncation controls.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FockSpaceConfig {
    /// Basis dimension: states |0⟩..|n_max−1⟩.
    pub n_max: usize,
    /// Truncation index of the phase-operator series.
    pub series_k_max: usize,
    /// Tolerance on the last retained series term's max-abs entry inside the
    /// trusted window. The series converges algebraically (the tail entry of
    /// term k scales like k⁻²), so the default matches series_k_max = 64;
    /// tolerances much below ~1e-5 are unreachable for any practical k_max.
    pub series_tol: f64,
}

impl Default for FockSpaceConfig {
    fn default() -> Self {
        Self { n_max: 256, series_k_max: 64, series_tol: 1e-3 }
    }
}

impl FockSpaceConfig {
    pub fn new(n_max: usize, series_k_max: usize) -> Result<Self, SpectrumError> {
        let c = Self { n_max, series_k_max, ..Default::default() };
        c.validate()?;
        Ok(c)
    }

    /// Index margin contaminated by truncation: 2·series_k_max + 2.
    pub fn validity_margin(&self) -> usize {
        2 * self.series_k_max + 2
    }

    /// Matrix elements with both indices below this bound are trusted.
    pub fn trusted_window(&self) -> usize {
        self.n_max.saturating_sub(self.validity_margin())
    }

    pub fn validate(&self) -> Result<(), SpectrumError> {
        if self.series_k_max >= 1 && self.n_max > self.validity_margin() && self.series_tol > 0.0 {
            Ok(())
        } else {
            Err(SpectrumError::InvalidConfig {
                n_max: self.n_max,
                margin: self.validity_margin(),
            })
        }
    }
}

/// Dense complex operator on the truncated basis, with the index bound
/// inside which its entries are free of truncation effects.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub entries: DMatrix<Complex64>,
    pub label: String,
    pub trusted_window: usize,
}

impl OperatorMatrix {
    pub fn new(entries: DMatrix<Complex64>, label: impl Into<String>, window: usize) -> Self {
        Self { entries, label: label.into(), trusted_window: window }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Max |M − M†| entry inside the trusted window.
    pub fn hermiticity_defect(&self) -> f64 {
        let w = self.trusted_window.min(self.dim());
        let mut worst: f64 = 0.0;
        for i in 0..w {
            for j in 0..w {
                let d = self.entries[(i, j)] - self.entries[(j, i)].conj();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// (M + M†)/2.
    pub fn symmetrized(&self) -> Self {
        let h = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        Self { entries: h, label: self.label.clone(), trusted_window: self.trusted_window }
    }
}

/// Per-level spectral table: zeroth order, first and second corrections,
/// their sum, and the diagonalized eigenvalue.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub n: usize,
    /// ħω(n + 1/2).
    pub e0: f64,
    /// First-order correction ⟨n|K_I|n⟩.
    pub de1: f64,
    /// Second-order sum-over-states correction.
    pub de2: f64,
    /// e0 + de1 + de2.
    pub e_pert: f64,
    /// Eigenvalue of the full truncated operator.
    pub e_diag: f64,
    /// e_diag − e_pert.
    pub deviation: f64,
    /// True when doubling n_max moves e_diag by less than the stability
    /// tolerance (1e-8 relative).
    pub stable: bool,
}

/// Full spectral report with the inputs echoed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub params: OscillatorParams,
    pub config: FockSpaceConfig,
    pub rows: Vec<SpectrumRow>,
    /// Max relative eigenvalue change over the reported levels when n_max is
    /// doubled.
    pub max_doubling_change: f64,
}

/// Relative eigenvalue change above which a report level is flagged
/// truncation-unstable.
pub const TRUNCATION_STABILITY_TOL: f64 = 1e-8;
