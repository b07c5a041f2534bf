//! Bundled reference data: a printed `3 x 4 x 3 x 4` operator, the printed
//! value of a cubic polynomial in it, and the comparison against a fresh
//! computation.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::LinearOperator;
use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

pub const POLY_FIXTURE: &str = include_str!("../fixtures/poly_example.json");
pub const POLY_FIXTURE_SHA256: &str =
    "d4212ef9a828b27df22cc5b85025b59d87d18eb655a8b04702f9be8e4525466e";

/// Absolute tolerance for two-decimal printed values.
pub const PRINT_TOL: f64 = 0.02;
/// Minimum number of matching sampled entries.
pub const MIN_MATCHES: usize = 22;

#[derive(Debug, Clone, Deserialize)]
pub struct PolyFixture {
    pub a: DenseTensor,
    pub b_printed: DenseTensor,
    /// Constant term first.
    pub coefficients: Vec<f64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn load_poly_fixture() -> Result<PolyFixture> {
    parse_poly_fixture(POLY_FIXTURE)
}

pub fn parse_poly_fixture(text: &str) -> Result<PolyFixture> {
    let sum = sha256_hex(text.as_bytes());
    if sum != POLY_FIXTURE_SHA256 {
        return Err(Error::Format(format!(
            "fixture checksum {sum} does not match"
        )));
    }
    let fx: PolyFixture = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if fx.a.shape() != [3, 4, 3, 4] || fx.b_printed.shape() != [3, 4, 3, 4] {
        return Err(Error::Format("fixture tensors must be 3x4x3x4".into()));
    }
    Ok(fx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryCheck {
    /// 1-based multi-index.
    pub index: [usize; 4],
    pub printed: f64,
    pub computed: f64,
    pub deviation: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyReport {
    pub entries: Vec<EntryCheck>,
    pub matched: usize,
    pub total: usize,
    pub pass: bool,
    /// Sampled entries on the identity support whose deviation is close to
    /// the constant coefficient, i.e. printed without the identity term.
    pub identity_shift_suspects: Vec<[usize; 4]>,
}

/// 0-based indices of the two sampled blocks `B(:, :, j, k)`.
pub const SAMPLED_BLOCKS: [(usize, usize); 2] = [(0, 0), (2, 3)];

pub fn evaluate(fx: &PolyFixture) -> Result<DenseTensor> {
    Ok(LinearOperator::new(fx.a.clone())?
        .polynomial(&fx.coefficients)
        .into_tensor())
}

pub fn compare(fx: &PolyFixture, tol: f64) -> Result<PolyReport> {
    let b = evaluate(fx)?;
    let shift = fx.coefficients.first().copied().unwrap_or(0.0);
    let mut entries = Vec::new();
    let mut suspects = Vec::new();
    for &(j, k) in &SAMPLED_BLOCKS {
        for i0 in 0..3 {
            for i1 in 0..4 {
                let ix = [i0, i1, j, k];
                let printed = fx.b_printed[ix];
                let computed = b[ix];
                let deviation = (computed - printed).abs();
                let one = [i0 + 1, i1 + 1, j + 1, k + 1];
                if i0 == j && i1 == k && ((printed - computed) - (-shift)).abs() < 0.5 {
                    suspects.push(one);
                }
                entries.push(EntryCheck {
                    index: one,
                    printed,
                    computed,
                    deviation,
                    pass: deviation <= tol,
                });
            }
        }
    }
    let matched = entries.iter().filter(|e| e.pass).count();
    Ok(PolyReport {
        total: entries.len(),
        pass: matched >= MIN_MATCHES,
        matched,
        entries,
        identity_shift_suspects: suspects,
    })
}
