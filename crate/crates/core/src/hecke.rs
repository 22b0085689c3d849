//! Block-wise Hecke operator and spectral gap estimates.
//!
//! On the `j`-isotypic part of `L^2(SU(2))` the averaging operator
//! `T_S f(g) = (1/2k) sum_l f(tau_l g) + f(tau_l^{-1} g)` acts on coefficient
//! blocks by `A_j -> A_j S_j` with `S_j = (1/2k) sum_l D^j(tau_l) + D^j(tau_l)^H`.
//! The trivial block is the eigenvalue 1 on constants and is excluded.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::su2::GeneratorSet;
use crate::wigner::{wigner_matrix, BandLimitedFunction, CMatrix, IrrepLabel};

/// Default cap on `2J` for scans (largest block 201 x 201).
pub const DEFAULT_MAX_TWO_J: u32 = 200;

#[derive(Debug, Clone)]
pub struct HeckeBlock {
    pub j: IrrepLabel,
    /// Hermitized `S_j`.
    pub mat: CMatrix,
    /// `max |M - M^H|` before Hermitization.
    pub asymmetry: f64,
}

pub fn hecke_block(gens: &GeneratorSet, j: IrrepLabel) -> HeckeBlock {
    let d = j.dim();
    let mut m = CMatrix::zeros(d, d);
    for g in gens.symmetrized() {
        m += wigner_matrix(j, &g);
    }
    m /= Complex64::new(gens.alphabet() as f64, 0.0);
    let adj = m.adjoint();
    let asymmetry = (&m - &adj).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mat = (m + adj) * Complex64::new(0.5, 0.0);
    HeckeBlock { j, mat, asymmetry }
}

/// Spectral norm of a Hermitian block: largest `|eigenvalue|`.
pub fn block_norm(b: &HeckeBlock) -> f64 {
    hermitian_norm(&b.mat)
}

pub fn hermitian_norm(m: &CMatrix) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |acc, l| acc.max(l.abs()))
}

/// Power iteration on `M^2` from a fixed dense start vector.
///
/// Slower than the eigensolver, kept as a cross-check. Converges to the top
/// of the spectrum of `M^2` at rate `(lambda_2 / lambda_1)^2`.
pub fn hermitian_norm_power(m: &CMatrix, max_iter: usize, tol: f64) -> f64 {
    let d = m.nrows();
    let m2 = m * m;
    let mut v = nalgebra::DVector::from_fn(d, |i, _| Complex64::new(1.0 + 0.1 * i as f64, 0.3 * ((i % 3) as f64)));
    v /= Complex64::new(v.norm(), 0.0);
    let mut est = 0.0;
    for _ in 0..max_iter {
        let w = &m2 * &v;
        let n = w.norm();
        if n == 0.0 {
            return 0.0;
        }
        let next = n.sqrt();
        v = w / Complex64::new(n, 0.0);
        if (next - est).abs() < tol {
            return next;
        }
        est = next;
    }
    est
}

/// `T_S` truncated to blocks `1/2 <= j <= J`.
#[derive(Debug, Clone)]
pub struct HeckeOperator {
    blocks: Vec<HeckeBlock>,
}

impl HeckeOperator {
    pub fn new(gens: &GeneratorSet, j_max: IrrepLabel) -> Self {
        Self {
            blocks: j_max.nontrivial_up_to().map(|j| hecke_block(gens, j)).collect(),
        }
    }

    pub fn block(&self, j: IrrepLabel) -> &HeckeBlock {
        &self.blocks[j.two_j() as usize - 1]
    }

    /// Coefficients of `T_S^n f`: `A_j -> A_j S_j^n`, mean unchanged.
    pub fn apply(&self, f: &BandLimitedFunction, n: usize) -> BandLimitedFunction {
        f.map_blocks(|j, a| a * self.block(j).mat.pow(n as u32))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockNorm {
    pub j: IrrepLabel,
    pub norm: f64,
}

/// Result of a truncated gap scan.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub preset: String,
    pub k: usize,
    pub j_max: IrrepLabel,
    pub norms: Vec<BlockNorm>,
    /// `max_j ||S_j||` over the scanned blocks.
    pub rho: f64,
    /// `sqrt(2k - 1) / k`.
    pub kesten: f64,
}

pub fn kesten_value(k: usize) -> f64 {
    ((2 * k - 1) as f64).sqrt() / k as f64
}

/// Norms of `S_j` for `1/2 <= j <= J`. Blocks are independent and computed in
/// parallel when the `parallel` feature is on; order of the output is by `j`.
pub fn gap_scan(gens: &GeneratorSet, j_max: IrrepLabel, max_two_j: u32) -> Result<GapReport> {
    if j_max.two_j() == 0 {
        return Err(Error::InvalidArgument("gap scan needs J >= 1/2".into()));
    }
    if j_max.two_j() > max_two_j {
        return Err(Error::TruncationOverflow {
            two_j: j_max.two_j(),
            max: max_two_j,
        });
    }
    let labels: Vec<IrrepLabel> = j_max.nontrivial_up_to().collect();
    let norm_of = |j: &IrrepLabel| BlockNorm {
        j: *j,
        norm: block_norm(&hecke_block(gens, *j)),
    };
    #[cfg(feature = "parallel")]
    let norms: Vec<BlockNorm> = {
        use rayon::prelude::*;
        labels.par_iter().map(norm_of).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let norms: Vec<BlockNorm> = labels.iter().map(norm_of).collect();
    let rho = norms.iter().map(|b| b.norm).fold(0.0, f64::max);
    Ok(GapReport {
        preset: gens.name.clone(),
        k: gens.k(),
        j_max,
        norms,
        rho,
        kesten: kesten_value(gens.k()),
    })
}

impl GapReport {
    /// Running maximum `rho_J` as a function of the truncation.
    pub fn rho_profile(&self) -> Vec<f64> {
        self.norms
            .iter()
            .scan(0.0f64, |acc, b| {
                *acc = acc.max(b.norm);
                Some(*acc)
            })
            .collect()
    }

    /// CSV with a `#` summary header; `preamble` lines are emitted first.
    pub fn write_csv<W: Write>(&self, mut w: W, preamble: &[String]) -> std::io::Result<()> {
        for line in preamble {
            writeln!(w, "# {line}")?;
        }
        writeln!(w, "# preset = {}", self.preset)?;
        writeln!(w, "# k = {}", self.k)?;
        writeln!(w, "# J = {}", self.j_max)?;
        writeln!(w, "# kesten = {:.15e}", self.kesten)?;
        writeln!(w, "# rho_J = {:.15e}", self.rho)?;
        writeln!(w, "# tool_version = {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(w, "two_j,dim,norm")?;
        for b in &self.norms {
            writeln!(w, "{},{},{:.15e}", b.j.two_j(), b.j.dim(), b.norm)?;
        }
        Ok(())
    }
}
