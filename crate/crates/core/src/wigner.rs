//! Irreducible representations of SU(2) and Fourier calculus on band-limited
//! functions.
//!
//! `D^j(g)` is the matrix of `p(z) -> p(g^T z)` on homogeneous polynomials of
//! degree `2j` in `(z1, z2)`, written in the orthonormal basis
//! `z1^(2j-i) z2^i / sqrt((2j-i)! i!)`, `i = 0..=2j`. With this ordering
//! `D^{1/2}(g)` *is* the matrix view of `g`.
//!
//! A band-limited function is stored through its coefficient blocks:
//!
//! ```text
//!   f(g) = mean + sum_j dim_j * tr(A_j D^j(g))
//! ```
//!
//! which makes left translation `g -> f(tau g)` the right multiplication
//! `A_j -> A_j D^j(tau)`, and the `L^2(m)` pairing
//! `<f, h> = conj(mean_f) mean_h + sum_j dim_j tr(A_j^H B_j)`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::su2::GroupElement;

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Irrep label stored as `2j` so that half-integers compare exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IrrepLabel(pub u32);

impl IrrepLabel {
    pub const TRIVIAL: IrrepLabel = IrrepLabel(0);
    pub const HALF: IrrepLabel = IrrepLabel(1);

    pub fn two_j(self) -> u32 {
        self.0
    }

    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }

    pub fn j(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Parses `25`, `12.5` or `25/2` into a label.
    pub fn parse(s: &str) -> Option<IrrepLabel> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let (n, d) = (n.trim().parse::<u32>().ok()?, d.trim().parse::<u32>().ok()?);
            return match d {
                1 => Some(IrrepLabel(2 * n)),
                2 => Some(IrrepLabel(n)),
                _ => None,
            };
        }
        let x = s.parse::<f64>().ok()?;
        let two = 2.0 * x;
        (x >= 0.0 && (two - two.round()).abs() < 1e-12).then(|| IrrepLabel(two.round() as u32))
    }

    /// All nontrivial labels up to and including `self`.
    pub fn nontrivial_up_to(self) -> impl Iterator<Item = IrrepLabel> {
        (1..=self.0).map(IrrepLabel)
    }
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// `D^j(g)` for one irrep.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerBlock {
    pub j: IrrepLabel,
    pub mat: CMatrix,
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

/// Coefficients (indexed by the power of `z2`) of `(u1 z1 + u2 z2)^p` for
/// `p = 0..=n`, built up one factor at a time.
fn linear_form_powers(u1: Complex64, u2: Complex64, n: usize) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(n + 1);
    out.push(vec![ONE]);
    for p in 1..=n {
        let prev = &out[p - 1];
        let mut next = vec![ZERO; p + 1];
        for (s, &c) in prev.iter().enumerate() {
            next[s] += c * u1;
            next[s + 1] += c * u2;
        }
        out.push(next);
    }
    out
}

/// Matrix of `g` in the spin-`j` representation.
pub fn wigner_d(j: IrrepLabel, g: &GroupElement) -> WignerBlock {
    WignerBlock {
        j,
        mat: wigner_matrix(j, g),
    }
}

/// Direct expansion of `(g11 z1 + g21 z2)^(2j-b) (g12 z1 + g22 z2)^b`.
///
/// Exact in exact arithmetic but the expansion terms reach `2^j` times the
/// size of the result, so rounding error grows like `2^j` ulps. Used for small
/// `j` and as an independent oracle for [`wigner_matrix`].
pub fn wigner_matrix_polynomial(j: IrrepLabel, g: &GroupElement) -> CMatrix {
    let n = j.0 as usize;
    let m = g.matrix();
    // z1 -> g11 z1 + g21 z2,  z2 -> g12 z1 + g22 z2
    let first = linear_form_powers(m[0][0], m[1][0], n);
    let second = linear_form_powers(m[0][1], m[1][1], n);
    let lf = ln_factorials(n);
    let mut out = CMatrix::zeros(n + 1, n + 1);
    for col in 0..=n {
        let a = &first[n - col];
        let b = &second[col];
        let norm_in = 0.5 * (lf[n - col] + lf[col]);
        for (s, &x) in a.iter().enumerate() {
            for (t, &y) in b.iter().enumerate() {
                out[(s + t, col)] += x * y;
            }
        }
        for row in 0..=n {
            let scale = (0.5 * (lf[n - row] + lf[row]) - norm_in).exp();
            out[(row, col)] *= scale;
        }
    }
    out
}

/// Largest `2j` evaluated by direct polynomial expansion.
const POLYNOMIAL_MAX_TWO_J: u32 = 8;

/// Spectral data of the rotation generator on degree-`2j` polynomials.
struct RotationGenerator {
    vectors: CMatrix,
    eigenvalues: Vec<f64>,
}

/// Eigendecomposition of `-i dpi(X)` for `X = [[0, 1], [-1, 0]]`, acting on the
/// orthonormal monomial basis as the tridiagonal matrix
/// `e_i -> -sqrt((n-i)(i+1)) e_{i+1} + sqrt(i(n-i+1)) e_{i-1}`.
fn rotation_generator(n: usize) -> std::sync::Arc<RotationGenerator> {
    use std::sync::{Arc, Mutex, OnceLock};
    static CACHE: OnceLock<Mutex<Vec<Option<Arc<RotationGenerator>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    if let Some(Some(hit)) = cache.lock().expect("cache lock").get(n) {
        return hit.clone();
    }
    let mut h = CMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        let w = (((n - i) * (i + 1)) as f64).sqrt();
        // H = -i A with A[(i+1, i)] = -w, A[(i, i+1)] = w
        h[(i + 1, i)] = Complex64::new(0.0, w);
        h[(i, i + 1)] = Complex64::new(0.0, -w);
    }
    let eig = h.symmetric_eigen();
    // The spectrum is exactly {n, n-2, ..., -n}.
    let eigenvalues = eig.eigenvalues.iter().map(|l| l.round()).collect();
    let gen = Arc::new(RotationGenerator {
        vectors: eig.eigenvectors,
        eigenvalues,
    });
    let mut guard = cache.lock().expect("cache lock");
    if guard.len() <= n {
        guard.resize(n + 1, None);
    }
    guard[n] = Some(gen.clone());
    gen
}

/// Matrix of `g` in the spin-`j` representation.
///
/// Small `j` use the direct expansion. Larger `j` factor
/// `g = diag(e^{iu}, e^{-iu}) R(beta) diag(e^{iv}, e^{-iv})` with `R(beta)` a real
/// rotation; the diagonal factors act by phases on monomials and
/// `D^j(R(beta)) = exp(beta/2 dpi(X))` comes from the cached eigendecomposition of
/// the generator, which keeps the error at a few ulps times the dimension.
pub fn wigner_matrix(j: IrrepLabel, g: &GroupElement) -> CMatrix {
    let n = j.0 as usize;
    match n {
        0 => return CMatrix::from_element(1, 1, ONE),
        1 => {
            let m = g.matrix();
            return CMatrix::from_fn(2, 2, |r, c| m[r][c]);
        }
        _ if j.0 <= POLYNOMIAL_MAX_TWO_J => return wigner_matrix_polynomial(j, g),
        _ => {}
    }
    let [a, b, c, d] = g.quaternion();
    // g11 = cos(beta/2) e^{i xi}, g12 = sin(beta/2) e^{i eta}
    let (r1, xi) = (a.hypot(b), b.atan2(a));
    let (r2, eta) = (c.hypot(d), d.atan2(c));
    let half_beta = r2.atan2(r1);
    let u = 0.5 * (xi + eta);
    let v = 0.5 * (xi - eta);
    let mut out = if half_beta == 0.0 {
        // diagonal g: D^j is diagonal in the monomial basis
        CMatrix::identity(n + 1, n + 1)
    } else {
        let gen = rotation_generator(n);
        let w = &gen.vectors;
        let mut left = w.clone();
        for col in 0..=n {
            let phase = Complex64::from_polar(1.0, gen.eigenvalues[col] * half_beta);
            for row in 0..=n {
                left[(row, col)] *= phase;
            }
        }
        left * w.adjoint()
    };
    // Monomial z1^(n-i) z2^i picks up e^{i (n - 2i) u} on the left and
    // e^{i (n - 2i) v} on the right.
    for row in 0..=n {
        let pr = Complex64::from_polar(1.0, (n as f64 - 2.0 * row as f64) * u);
        for col in 0..=n {
            let pc = Complex64::from_polar(1.0, (n as f64 - 2.0 * col as f64) * v);
            out[(row, col)] *= pr * pc;
        }
    }
    out
}

/// `chi_j(g) = sin((2j+1) theta / 2) / sin(theta / 2)` with `theta` the class angle.
pub fn character(j: IrrepLabel, g: &GroupElement) -> f64 {
    let theta = g.class_angle();
    let half = 0.5 * theta;
    let s = half.sin();
    if s.abs() > 1e-6 {
        ((j.0 as f64 + 1.0) * half).sin() / s
    } else {
        // sum_{m=-j..j} cos(m theta), exact at the removable singularities
        (0..=j.0)
            .map(|i| ((i as f64 - j.j()) * theta).cos())
            .sum()
    }
}

/// Wigner matrices of a fixed list of group elements for every label up to `j_max`.
#[derive(Debug, Clone)]
pub struct RepTable {
    j_max: IrrepLabel,
    mats: Vec<Vec<CMatrix>>,
}

impl RepTable {
    pub fn new(elements: &[GroupElement], j_max: IrrepLabel) -> Self {
        let mats = elements
            .iter()
            .map(|g| (0..=j_max.0).map(|t| wigner_matrix(IrrepLabel(t), g)).collect())
            .collect();
        Self { j_max, mats }
    }

    pub fn j_max(&self) -> IrrepLabel {
        self.j_max
    }

    pub fn len(&self) -> usize {
        self.mats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mats.is_empty()
    }

    pub fn get(&self, element: usize, j: IrrepLabel) -> &CMatrix {
        &self.mats[element][j.0 as usize]
    }
}

/// Function on SU(2) with finitely many nonzero Peter-Weyl blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BandLimitedFunction {
    j_max: IrrepLabel,
    pub mean: Complex64,
    blocks: BTreeMap<IrrepLabel, CMatrix>,
}

impl BandLimitedFunction {
    pub fn zero(j_max: IrrepLabel) -> Self {
        Self::constant(j_max, ZERO)
    }

    pub fn constant(j_max: IrrepLabel, c: Complex64) -> Self {
        Self {
            j_max,
            mean: c,
            blocks: BTreeMap::new(),
        }
    }

    /// Adds or replaces the coefficient block for `j`.
    pub fn with_block(mut self, j: IrrepLabel, block: CMatrix) -> Result<Self> {
        self.set_block(j, block)?;
        Ok(self)
    }

    pub fn set_block(&mut self, j: IrrepLabel, block: CMatrix) -> Result<()> {
        if j == IrrepLabel::TRIVIAL || j > self.j_max {
            return Err(Error::InvalidArgument(format!(
                "block label j={j} outside 1/2..={}",
                self.j_max
            )));
        }
        if block.nrows() != j.dim() || block.ncols() != j.dim() {
            return Err(Error::InvalidArgument(format!(
                "block j={j} must be {0}x{0}, got {1}x{2}",
                j.dim(),
                block.nrows(),
                block.ncols()
            )));
        }
        self.blocks.insert(j, block);
        Ok(())
    }

    /// Gaussian random coefficients on every block up to `j_max`, scaled so
    /// each block carries comparable `L^2` mass.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, j_max: IrrepLabel, with_mean: bool) -> Self {
        let mut gauss = || Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
        let mean = if with_mean { gauss() } else { ZERO };
        let mut f = Self::constant(j_max, mean);
        for j in j_max.nontrivial_up_to() {
            let d = j.dim();
            let scale = 1.0 / (d as f64).powf(1.5);
            let block = CMatrix::from_fn(d, d, |_, _| gauss() * scale);
            f.blocks.insert(j, block);
        }
        f
    }

    pub fn j_max(&self) -> IrrepLabel {
        self.j_max
    }

    pub fn block(&self, j: IrrepLabel) -> Option<&CMatrix> {
        self.blocks.get(&j)
    }

    pub fn blocks(&self) -> impl Iterator<Item = (IrrepLabel, &CMatrix)> {
        self.blocks.iter().map(|(j, b)| (*j, b))
    }

    pub fn is_constant(&self) -> bool {
        self.blocks.values().all(|b| b.iter().all(|z| *z == ZERO))
    }

    pub fn evaluate(&self, g: &GroupElement) -> Complex64 {
        let mut acc = self.mean;
        for (j, a) in &self.blocks {
            let d = wigner_matrix(*j, g);
            acc += trace_product(a, &d) * j.dim() as f64;
        }
        acc
    }

    /// Coefficients of `g -> f(tau g)`.
    pub fn left_translate(&self, tau: &GroupElement) -> Self {
        self.map_blocks(|j, a| a * wigner_matrix(j, tau))
    }

    /// Same as [`left_translate`](Self::left_translate) with precomputed matrices.
    pub fn left_translate_by(&self, table: &RepTable, element: usize) -> Self {
        self.map_blocks(|j, a| a * table.get(element, j))
    }

    /// Applies `A_j -> op(j, A_j)` to every block, keeping the mean.
    pub fn map_blocks(&self, mut op: impl FnMut(IrrepLabel, &CMatrix) -> CMatrix) -> Self {
        Self {
            j_max: self.j_max,
            mean: self.mean,
            blocks: self.blocks.iter().map(|(j, a)| (*j, op(*j, a))).collect(),
        }
    }

    pub fn l2_inner(&self, other: &Self) -> Result<Complex64> {
        self.check_truncation(other)?;
        let mut acc = self.mean.conj() * other.mean;
        for (j, a) in &self.blocks {
            if let Some(b) = other.blocks.get(j) {
                acc += a.dotc(b) * j.dim() as f64;
            }
        }
        Ok(acc)
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.mean.norm_sqr()
            + self
                .blocks
                .iter()
                .map(|(j, a)| a.norm_squared() * j.dim() as f64)
                .sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Mean-zero part, the projection onto `L^2_0`.
    pub fn centered(&self) -> Self {
        let mut out = self.clone();
        out.mean = ZERO;
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.map_blocks(|_, a| a * c);
        out.mean *= c;
        out
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: Complex64, other: &Self) -> Result<()> {
        self.check_truncation(other)?;
        self.mean += c * other.mean;
        for (j, b) in &other.blocks {
            match self.blocks.get_mut(j) {
                Some(a) => *a += b * c,
                None => {
                    self.blocks.insert(*j, b * c);
                }
            }
        }
        Ok(())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.axpy(-ONE, other)?;
        Ok(out)
    }

    /// Coefficients of `g -> conj(f(g))`.
    ///
    /// Uses `conj(D^j(g)) = D^j(w) D^j(g) D^j(w)^{-1}` for the quaternion unit
    /// `w = j`, i.e. the matrix `[[0, 1], [-1, 0]]`.
    pub fn conj(&self) -> Self {
        let w = GroupElement::from_quaternion([0.0, 0.0, 1.0, 0.0]);
        let mut out = Self {
            j_max: self.j_max,
            mean: self.mean.conj(),
            blocks: BTreeMap::new(),
        };
        for (j, a) in &self.blocks {
            let e = wigner_matrix(*j, &w);
            let e_inv = e.adjoint();
            out.blocks.insert(*j, e_inv * a.map(|z| z.conj()) * e);
        }
        out
    }

    /// Coefficients of `g -> Re f(g)`.
    pub fn real_part(&self) -> Self {
        let c = self.conj();
        let mut out = self.clone();
        out.axpy(ONE, &c).expect("same truncation");
        out.scale(Complex64::new(0.5, 0.0))
    }

    /// `||f - conj f||_{L^2}`; zero exactly when `f` is real valued.
    pub fn imaginary_residue(&self) -> f64 {
        self.sub(&self.conj()).expect("same truncation").l2_norm()
    }

    fn check_truncation(&self, other: &Self) -> Result<()> {
        if self.j_max != other.j_max {
            return Err(Error::TruncationMismatch(format!(
                "J_max {} vs {}",
                self.j_max, other.j_max
            )));
        }
        Ok(())
    }
}

/// `tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let mut acc = ZERO;
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            acc += a[(r, c)] * b[(c, r)];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::su2::GeneratorSet;

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn identity_maps_to_identity() {
        for t in 0..=20 {
            let j = IrrepLabel(t);
            let d = wigner_matrix(j, &GroupElement::IDENTITY);
            assert!(max_abs(&(d - CMatrix::identity(j.dim(), j.dim()))) < 1e-15);
        }
    }

    #[test]
    fn spin_half_is_the_matrix_view() {
        let mut rng = stream(11, 0);
        for _ in 0..20 {
            let g = GroupElement::haar_sample(&mut rng);
            let m = g.matrix();
            let d = wigner_matrix(IrrepLabel::HALF, &g);
            for r in 0..2 {
                for c in 0..2 {
                    assert_eq!(d[(r, c)], m[r][c]);
                }
            }
        }
    }

    #[test]
    fn polynomial_expansion_at_spin_one() {
        let mut rng = stream(12, 0);
        let g = GroupElement::haar_sample(&mut rng);
        let m = g.matrix();
        let d1 = wigner_matrix_polynomial(IrrepLabel(2), &g);
        // column for z1^2: (g11 z1 + g21 z2)^2 = g11^2 z1^2 + 2 g11 g21 z1 z2 + g21^2 z2^2
        let s2 = 2f64.sqrt();
        assert!((d1[(0, 0)] - m[0][0] * m[0][0]).norm() < 1e-15);
        assert!((d1[(1, 0)] - m[0][0] * m[1][0] * s2).norm() < 1e-15);
        assert!((d1[(2, 0)] - m[1][0] * m[1][0]).norm() < 1e-15);
        let d_half = wigner_matrix_polynomial(IrrepLabel::HALF, &g);
        assert!(max_abs(&(d_half - wigner_matrix(IrrepLabel::HALF, &g))) < 1e-15);
    }

    #[test]
    fn spectral_route_agrees_with_polynomial_expansion() {
        let mut rng = stream(21, 0);
        for _ in 0..20 {
            let g = GroupElement::haar_sample(&mut rng);
            for t in 9..=20 {
                let j = IrrepLabel(t);
                let diff = wigner_matrix(j, &g) - wigner_matrix_polynomial(j, &g);
                assert!(max_abs(&diff) < 1e-11, "two_j={t}: {}", max_abs(&diff));
            }
        }
        // diagonal and anti-diagonal elements exercise the degenerate Euler angles
        for g in [
            GroupElement::diagonal(0.9),
            GroupElement::from_quaternion([0.0, 0.0, 0.6, 0.8]),
            GroupElement::from_quaternion([-1.0, 0.0, 0.0, 0.0]),
        ] {
            let j = IrrepLabel(12);
            let diff = wigner_matrix(j, &g) - wigner_matrix_polynomial(j, &g);
            assert!(max_abs(&diff) < 1e-11);
        }
    }

    #[test]
    fn spin_one_on_diagonal_element() {
        let phi = 0.37;
        let d = wigner_matrix(IrrepLabel(2), &GroupElement::diagonal(phi));
        let expect = [2.0 * phi, 0.0, -2.0 * phi];
        for r in 0..3 {
            for c in 0..3 {
                let want = if r == c {
                    Complex64::from_polar(1.0, expect[r])
                } else {
                    ZERO
                };
                assert!((d[(r, c)] - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn homomorphism_and_unitarity_up_to_j25() {
        let mut rng = stream(13, 0);
        for _ in 0..10 {
            let g = GroupElement::haar_sample(&mut rng);
            let h = GroupElement::haar_sample(&mut rng);
            for t in [3, 10, 25, 50, 100] {
                let j = IrrepLabel(t);
                let dg = wigner_matrix(j, &g);
                let dh = wigner_matrix(j, &h);
                let dgh = wigner_matrix(j, &g.compose(&h));
                assert!(max_abs(&(&dgh - &dg * &dh)) < 1e-9, "hom j={j}");
                let id = CMatrix::identity(j.dim(), j.dim());
                assert!(max_abs(&(dg.adjoint() * &dg - id)) < 1e-10, "unit j={j}");
            }
        }
    }

    #[test]
    fn characters() {
        let e = GroupElement::IDENTITY;
        for t in 0..10 {
            assert!((character(IrrepLabel(t), &e) - (t + 1) as f64).abs() < 1e-12);
        }
        let i = GroupElement::from_quaternion([0.0, 1.0, 0.0, 0.0]);
        assert!((character(IrrepLabel(2), &i) + 1.0).abs() < 1e-12);
        // -e acts by (-1)^{2j}
        let minus_e = GroupElement::from_quaternion([-1.0, 0.0, 0.0, 0.0]);
        assert!((character(IrrepLabel(3), &minus_e) + 4.0).abs() < 1e-9);
        assert!((character(IrrepLabel(4), &minus_e) - 5.0).abs() < 1e-9);

        let mut rng = stream(14, 0);
        for _ in 0..50 {
            let g = GroupElement::haar_sample(&mut rng);
            assert!((character(IrrepLabel::HALF, &g) - g.trace()).abs() < 1e-12);
            for t in [2, 7, 30] {
                let tr = wigner_matrix(IrrepLabel(t), &g).trace();
                assert!((tr.re - character(IrrepLabel(t), &g)).abs() < 1e-8);
                assert!(tr.im.abs() < 1e-8);
            }
        }
    }

    #[test]
    fn labels() {
        assert_eq!(IrrepLabel::parse("25"), Some(IrrepLabel(50)));
        assert_eq!(IrrepLabel::parse("1.5"), Some(IrrepLabel(3)));
        assert_eq!(IrrepLabel::parse("3/2"), Some(IrrepLabel(3)));
        assert_eq!(IrrepLabel::parse("0.3"), None);
        assert_eq!(IrrepLabel::parse("-1"), None);
        assert_eq!(IrrepLabel(3).to_string(), "3/2");
        assert_eq!(IrrepLabel(4).to_string(), "2");
        assert_eq!(IrrepLabel(50).dim(), 51);
    }

    #[test]
    fn constant_function_and_single_block_evaluation() {
        let jm = IrrepLabel(4);
        let c = Complex64::new(0.3, -1.2);
        let f = BandLimitedFunction::constant(jm, c);
        let mut rng = stream(15, 0);
        let g = GroupElement::haar_sample(&mut rng);
        assert_eq!(f.evaluate(&g), c);

        let block = CMatrix::from_fn(2, 2, |r, c| if r == 0 && c == 0 { ONE * 0.5 } else { ZERO });
        let f = BandLimitedFunction::constant(jm, c)
            .with_block(IrrepLabel::HALF, block)
            .unwrap();
        assert!((f.evaluate(&GroupElement::IDENTITY) - (c + 1.0)).norm() < 1e-15);
    }

    #[test]
    fn block_validation() {
        let f = BandLimitedFunction::zero(IrrepLabel(2));
        assert!(f.clone().with_block(IrrepLabel(3), CMatrix::zeros(4, 4)).is_err());
        assert!(f.clone().with_block(IrrepLabel(1), CMatrix::zeros(3, 3)).is_err());
        assert!(f.with_block(IrrepLabel(0), CMatrix::zeros(1, 1)).is_err());
    }

    #[test]
    fn left_translation_matches_pointwise_composition() {
        let mut rng = stream(16, 0);
        let f = BandLimitedFunction::random(&mut rng, IrrepLabel(6), true);
        let tau = GroupElement::haar_sample(&mut rng);
        let ft = f.left_translate(&tau);
        for _ in 0..100 {
            let g = GroupElement::haar_sample(&mut rng);
            let lhs = ft.evaluate(&g);
            let rhs = f.evaluate(&tau.compose(&g));
            assert!((lhs - rhs).norm() < 1e-9);
        }
        assert_eq!(f.left_translate(&GroupElement::IDENTITY), f);
    }

    #[test]
    fn double_translation_composes() {
        let mut rng = stream(17, 0);
        let f = BandLimitedFunction::random(&mut rng, IrrepLabel(8), true);
        let tau = GroupElement::haar_sample(&mut rng);
        let sigma = GroupElement::haar_sample(&mut rng);
        let a = f.left_translate(&tau).left_translate(&sigma);
        let b = f.left_translate(&tau.compose(&sigma));
        assert!(a.sub(&b).unwrap().l2_norm() < 1e-10);

        let table = RepTable::new(&[tau], IrrepLabel(8));
        assert!(f.left_translate_by(&table, 0).sub(&f.left_translate(&tau)).unwrap().l2_norm() < 1e-14);
    }

    #[test]
    fn inner_product_basics() {
        let jm = IrrepLabel(3);
        let one = BandLimitedFunction::constant(jm, ONE);
        assert_eq!(one.l2_inner(&one).unwrap(), ONE);
        let mut rng = stream(18, 0);
        let f = BandLimitedFunction::random(&mut rng, jm, true);
        let ff = f.l2_inner(&f).unwrap();
        assert!(ff.re > 0.0 && ff.im.abs() < 1e-14);
        assert!((ff.re - f.l2_norm_sq()).abs() < 1e-12);
        assert_eq!(BandLimitedFunction::zero(jm).l2_norm(), 0.0);
        let other = BandLimitedFunction::zero(IrrepLabel(4));
        assert!(matches!(f.l2_inner(&other), Err(Error::TruncationMismatch(_))));
    }

    #[test]
    fn parseval_and_inner_product_against_quadrature() {
        let jm = IrrepLabel(3);
        let mut rng = stream(19, 0);
        let f = BandLimitedFunction::random(&mut rng, jm, true);
        let h = BandLimitedFunction::random(&mut rng, jm, true);
        let n = 1_000_000usize;
        let (mut s_ff, mut s_ff2) = (0.0, 0.0);
        let (mut s_fh, mut s_fh2) = (ZERO, 0.0);
        for _ in 0..n {
            let g = GroupElement::haar_sample(&mut rng);
            let (fv, hv) = (f.evaluate(&g), h.evaluate(&g));
            let a = fv.norm_sqr();
            s_ff += a;
            s_ff2 += a * a;
            let b = fv.conj() * hv;
            s_fh += b;
            s_fh2 += b.norm_sqr();
        }
        let nf = n as f64;
        let m_ff = s_ff / nf;
        let se_ff = ((s_ff2 / nf - m_ff * m_ff) / nf).sqrt();
        assert!((m_ff - f.l2_norm_sq()).abs() < 3.0 * se_ff, "{m_ff} vs {}", f.l2_norm_sq());
        let m_fh = s_fh / nf;
        let se_fh = ((s_fh2 / nf - m_fh.norm_sqr()) / nf).sqrt();
        let exact = f.l2_inner(&h).unwrap();
        assert!((m_fh - exact).norm() < 3.0 * se_fh, "{m_fh} vs {exact}");
    }

    #[test]
    fn conjugation_and_real_part() {
        let mut rng = stream(20, 0);
        let f = BandLimitedFunction::random(&mut rng, IrrepLabel(5), true);
        let fc = f.conj();
        let fr = f.real_part();
        for _ in 0..50 {
            let g = GroupElement::haar_sample(&mut rng);
            assert!((fc.evaluate(&g) - f.evaluate(&g).conj()).norm() < 1e-10);
            let v = fr.evaluate(&g);
            assert!((v.re - f.evaluate(&g).re).abs() < 1e-10 && v.im.abs() < 1e-10);
        }
        assert!(fr.imaginary_residue() < 1e-12);
        assert!(f.imaginary_residue() > 1e-3);
    }

    #[test]
    fn trace_observable_is_unit_norm() {
        // tr(g) = 2 tr((I/2) g)
        let half = CMatrix::identity(2, 2) * Complex64::new(0.5, 0.0);
        let f = BandLimitedFunction::zero(IrrepLabel::HALF)
            .with_block(IrrepLabel::HALF, half)
            .unwrap();
        assert!((f.l2_norm() - 1.0).abs() < 1e-15);
        let g = GeneratorSet::lps5().taus[1];
        assert!((f.evaluate(&g).re - g.trace()).abs() < 1e-15);
    }
}
