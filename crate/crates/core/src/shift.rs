//! The symbolic layer: words and cylinders of the full shift on `2k` symbols,
//! the Bernoulli measure of maximal entropy, the metric `d_theta`, the symbol
//! to group map and its cocycle, the (untwisted) transfer operator and the
//! mixed norm `||.||_{theta,G}`.
//!
//! Symbols are `1..=2k`. Symbol `a <= k` carries `tau_a`, symbol `a > k`
//! carries `tau_{a-k}^{-1}`. Words of a fixed length are indexed by their rank
//! in base `2k`, first symbol most significant.

use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::su2::{GeneratorSet, GroupElement};
use crate::wigner::{BandLimitedFunction, CMatrix, IrrepLabel};

/// Default bound on exhaustive word enumerations.
pub const DEFAULT_ENUMERATION_CAP: u64 = 100_000_000;

/// A finite word over `{1, ..., 2k}`; the empty word is the whole space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn new(symbols: Vec<u8>, alphabet: usize) -> Result<Self> {
        for &s in &symbols {
            check_symbol(s, alphabet)?;
        }
        Ok(Word(symbols))
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    /// Concatenation `self other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// Rank among words of the same length.
    pub fn rank(&self, alphabet: usize) -> usize {
        rank(&self.0, alphabet)
    }

    pub fn unrank(mut r: usize, len: usize, alphabet: usize) -> Word {
        let mut v = vec![0u8; len];
        for slot in v.iter_mut().rev() {
            *slot = (r % alphabet) as u8 + 1;
            r /= alphabet;
        }
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

pub fn rank(symbols: &[u8], alphabet: usize) -> usize {
    symbols
        .iter()
        .fold(0usize, |acc, &s| acc * alphabet + (s as usize - 1))
}

fn check_symbol(s: u8, alphabet: usize) -> Result<()> {
    if s == 0 || s as usize > alphabet {
        return Err(Error::InvalidSymbol {
            symbol: s,
            alphabet,
        });
    }
    Ok(())
}

/// Number of words of length `len`, i.e. `alphabet^len`.
pub fn word_count(alphabet: usize, len: usize) -> u128 {
    (alphabet as u128).saturating_pow(len as u32)
}

/// Errors unless `alphabet^len <= cap`.
pub fn check_cap(alphabet: usize, len: usize, cap: u64) -> Result<usize> {
    let count = word_count(alphabet, len);
    if count > cap as u128 {
        return Err(Error::EnumerationCap { count, cap });
    }
    Ok(count as usize)
}

/// All words of length `len` in rank order.
pub fn words(alphabet: usize, len: usize) -> impl Iterator<Item = Word> {
    let count = word_count(alphabet, len) as usize;
    (0..count).map(move |r| Word::unrank(r, len, alphabet))
}

/// Alphabet, metric parameter and generators of one extension.
#[derive(Debug, Clone)]
pub struct ShiftConfig {
    pub theta: f64,
    pub gens: GeneratorSet,
}

impl ShiftConfig {
    pub fn new(theta: f64, gens: GeneratorSet) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "theta must lie in (0, 1), got {theta}"
            )));
        }
        Ok(Self { theta, gens })
    }

    pub fn k(&self) -> usize {
        self.gens.k()
    }

    pub fn alphabet(&self) -> usize {
        self.gens.alphabet()
    }
}

/// `d_theta` between the sequences represented by two cylinder prefixes.
///
/// Returns `theta^N` with `N` the number of leading agreeing symbols (so `1`
/// when the first symbols differ) and `0` for identical words. When one word
/// is a proper prefix of the other the representatives are undetermined; the
/// diameter `theta^{min len}` of the shorter cylinder is returned.
pub fn d_theta(x: &Word, xi: &Word, theta: f64) -> f64 {
    let common = x
        .0
        .iter()
        .zip(&xi.0)
        .take_while(|(a, b)| a == b)
        .count();
    if common == x.len() && common == xi.len() {
        return 0.0;
    }
    theta.powi(common as i32)
}

/// Group value `tau(a)` of a symbol.
pub fn tau_of_symbol(a: u8, gens: &GeneratorSet) -> Result<GroupElement> {
    check_symbol(a, gens.alphabet())?;
    let k = gens.k();
    let a = a as usize;
    Ok(if a <= k {
        gens.taus[a - 1]
    } else {
        gens.taus[a - k - 1].inverse()
    })
}

/// `tau(alpha_1) tau(alpha_2) ... tau(alpha_n)`; the identity for the empty word.
pub fn cocycle(word: &Word, gens: &GeneratorSet) -> Result<GroupElement> {
    let values = gens.symmetrized();
    let mut acc = GroupElement::IDENTITY;
    for &s in &word.0 {
        check_symbol(s, gens.alphabet())?;
        acc = acc.compose(&values[s as usize - 1]);
    }
    Ok(acc)
}

/// Bernoulli measure `(2k)^{-|alpha|}` of the cylinder `[alpha]`.
pub fn cylinder_measure(word: &Word, k: usize) -> f64 {
    (2.0 * k as f64).powi(-(word.len() as i32))
}

/// A function of `x` alone that depends on the first `depth` symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderFunction {
    alphabet: usize,
    depth: usize,
    values: Vec<Complex64>,
}

impl CylinderFunction {
    pub fn new(alphabet: usize, depth: usize, values: Vec<Complex64>) -> Result<Self> {
        let count = word_count(alphabet, depth);
        if values.len() as u128 != count {
            return Err(Error::InvalidArgument(format!(
                "depth {depth} needs {count} values, got {}",
                values.len()
            )));
        }
        Ok(Self {
            alphabet,
            depth,
            values,
        })
    }

    pub fn constant(alphabet: usize, c: Complex64) -> Self {
        Self {
            alphabet,
            depth: 0,
            values: vec![c],
        }
    }

    pub fn indicator(alphabet: usize, word: &Word) -> Self {
        let mut values = vec![Complex64::new(0.0, 0.0); word_count(alphabet, word.len()) as usize];
        values[word.rank(alphabet)] = Complex64::new(1.0, 0.0);
        Self {
            alphabet,
            depth: word.len(),
            values,
        }
    }

    pub fn from_fn(alphabet: usize, depth: usize, mut f: impl FnMut(&Word) -> Complex64) -> Self {
        let values = words(alphabet, depth).map(|w| f(&w)).collect();
        Self {
            alphabet,
            depth,
            values,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Value on any sequence starting with `prefix` (`prefix.len() >= depth`).
    pub fn at(&self, prefix: &[u8]) -> Complex64 {
        self.values[rank(&prefix[..self.depth], self.alphabet)]
    }

    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    /// `L^n g (xi) = (2k)^{-n} sum_{|alpha| = n} g(alpha xi)`, of depth
    /// `max(depth - n, 0)`.
    pub fn transfer_apply(&self, n: usize) -> CylinderFunction {
        let a = self.alphabet;
        if n == 0 {
            return self.clone();
        }
        if n >= self.depth {
            return Self::constant(a, self.integral());
        }
        let out_depth = self.depth - n;
        let block = word_count(a, out_depth) as usize;
        let prepends = word_count(a, n) as usize;
        let scale = 1.0 / prepends as f64;
        let values = (0..block)
            .map(|tail| {
                (0..prepends)
                    .map(|head| self.values[head * block + tail])
                    .sum::<Complex64>()
                    * scale
            })
            .collect();
        CylinderFunction {
            alphabet: a,
            depth: out_depth,
            values,
        }
    }
}

/// Observable on `Sigma+ x SU(2)`: locally constant in `x` at depth `m`,
/// band-limited in `g`. `values[rank(w)]` is `F(x, .)` on the cylinder `[w]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocallyConstantObservable {
    alphabet: usize,
    depth: usize,
    values: Vec<BandLimitedFunction>,
}

impl LocallyConstantObservable {
    pub fn new(alphabet: usize, depth: usize, values: Vec<BandLimitedFunction>) -> Result<Self> {
        let count = word_count(alphabet, depth);
        if values.len() as u128 != count {
            return Err(Error::InvalidArgument(format!(
                "depth {depth} over {alphabet} symbols needs {count} cylinder values, got {}",
                values.len()
            )));
        }
        if let Some(first) = values.first() {
            if values.iter().any(|v| v.j_max() != first.j_max()) {
                return Err(Error::TruncationMismatch(
                    "cylinder values use different J_max".into(),
                ));
            }
        }
        Ok(Self {
            alphabet,
            depth,
            values,
        })
    }

    /// `F(x, g) = f(g)`.
    pub fn from_group_function(alphabet: usize, f: BandLimitedFunction) -> Self {
        Self {
            alphabet,
            depth: 0,
            values: vec![f],
        }
    }

    pub fn constant(alphabet: usize, j_max: IrrepLabel, c: Complex64) -> Self {
        Self::from_group_function(alphabet, BandLimitedFunction::constant(j_max, c))
    }

    pub fn from_fn(
        alphabet: usize,
        depth: usize,
        mut f: impl FnMut(&Word) -> BandLimitedFunction,
    ) -> Result<Self> {
        let values = words(alphabet, depth).map(|w| f(&w)).collect();
        Self::new(alphabet, depth, values)
    }

    /// `F(x, g) = h(x)`, constant along the group.
    pub fn from_cylinder_function(h: &CylinderFunction, j_max: IrrepLabel) -> Self {
        Self {
            alphabet: h.alphabet,
            depth: h.depth,
            values: h
                .values
                .iter()
                .map(|&c| BandLimitedFunction::constant(j_max, c))
                .collect(),
        }
    }

    /// Independent random band-limited values on every cylinder.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        alphabet: usize,
        depth: usize,
        j_max: IrrepLabel,
    ) -> Self {
        let count = word_count(alphabet, depth) as usize;
        let values = (0..count)
            .map(|_| BandLimitedFunction::random(rng, j_max, true))
            .collect();
        Self {
            alphabet,
            depth,
            values,
        }
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn j_max(&self) -> IrrepLabel {
        self.values[0].j_max()
    }

    pub fn values(&self) -> &[BandLimitedFunction] {
        &self.values
    }

    pub fn value_by_rank(&self, r: usize) -> &BandLimitedFunction {
        &self.values[r]
    }

    /// `F(x, .)` for any `x` starting with `prefix` (`prefix.len() >= depth`).
    pub fn at(&self, prefix: &[u8]) -> &BandLimitedFunction {
        &self.values[rank(&prefix[..self.depth], self.alphabet)]
    }

    pub fn evaluate(&self, prefix: &[u8], g: &GroupElement) -> Complex64 {
        self.at(prefix).evaluate(g)
    }

    /// `integral F d mu d m`.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().map(|v| v.mean).sum::<Complex64>() / self.values.len() as f64
    }

    /// `F - integral F`.
    pub fn centered(&self) -> Self {
        let c = self.integral();
        let mut out = self.clone();
        for v in &mut out.values {
            v.mean -= c;
        }
        out
    }

    pub fn map_values(&self, f: impl FnMut(&BandLimitedFunction) -> BandLimitedFunction) -> Self {
        Self {
            alphabet: self.alphabet,
            depth: self.depth,
            values: self.values.iter().map(f).collect(),
        }
    }

    /// Re-expresses the observable at a larger depth (same function).
    pub fn refine(&self, depth: usize) -> Self {
        if depth <= self.depth {
            return self.clone();
        }
        let a = self.alphabet;
        let extra = word_count(a, depth - self.depth) as usize;
        let values = (0..word_count(a, depth) as usize)
            .map(|r| self.values[r / extra].clone())
            .collect();
        Self {
            alphabet: a,
            depth,
            values,
        }
    }

    /// Largest `||f - conj f||_{L^2}` over cylinders.
    pub fn imaginary_residue(&self) -> f64 {
        self.values
            .iter()
            .map(|v| v.imaginary_residue())
            .fold(0.0, f64::max)
    }

    /// `||F||_{theta,G}`: sup of `||F(x, .)||^2` plus the squared `d_theta`
    /// Lipschitz constant of `x -> F(x, .)` in `L^2(G)`, square-rooted. Both
    /// suprema are maxima over depth-`m` cylinders; two distinct cylinders sharing
    /// `N` leading symbols are at distance exactly `theta^N`.
    pub fn norm_theta_g(&self, theta: f64) -> f64 {
        let sup = self
            .values
            .iter()
            .map(|v| v.l2_norm_sq())
            .fold(0.0, f64::max);
        let mut lip: f64 = 0.0;
        let a = self.alphabet;
        for r1 in 0..self.values.len() {
            let w1 = Word::unrank(r1, self.depth, a);
            for r2 in (r1 + 1)..self.values.len() {
                let w2 = Word::unrank(r2, self.depth, a);
                let d = d_theta(&w1, &w2, theta);
                let diff = self.values[r1]
                    .sub(&self.values[r2])
                    .expect("one truncation per observable")
                    .l2_norm_sq();
                lip = lip.max(diff / (d * d));
            }
        }
        (sup + lip).sqrt()
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Parses the observable file format:
    ///
    /// ```toml
    /// alphabet = 6
    /// depth = 1
    /// two_j_max = 2
    ///
    /// [[cylinder]]
    /// word = [1]
    /// mean = [0.5, 0.0]
    ///
    /// [[cylinder.block]]
    /// two_j = 1
    /// re = [0.5, 0.0, 0.0, 0.5]   # row-major, dim x dim
    /// im = [0.0, 0.0, 0.0, 0.0]
    /// ```
    ///
    /// Cylinders that are not listed are the zero function.
    pub fn from_toml(text: &str) -> Result<Self> {
        let err = |msg: String| Error::Parse {
            what: "observable file".into(),
            msg,
        };
        let file: ObservableFile = toml::from_str(text).map_err(|e| err(e.to_string()))?;
        if file.alphabet < 2 {
            return Err(err(format!("alphabet must be >= 2, got {}", file.alphabet)));
        }
        if word_count(file.alphabet, file.depth) > DEFAULT_ENUMERATION_CAP as u128 {
            return Err(Error::EnumerationCap {
                count: word_count(file.alphabet, file.depth),
                cap: DEFAULT_ENUMERATION_CAP,
            });
        }
        let j_max = IrrepLabel(file.two_j_max);
        let count = word_count(file.alphabet, file.depth) as usize;
        let mut values: Vec<Option<BandLimitedFunction>> = vec![None; count];
        for cyl in file.cylinder {
            if cyl.word.len() != file.depth {
                return Err(err(format!(
                    "cylinder {:?} has length {}, expected depth {}",
                    cyl.word,
                    cyl.word.len(),
                    file.depth
                )));
            }
            let word = Word::new(cyl.word.clone(), file.alphabet)?;
            let r = word.rank(file.alphabet);
            if values[r].is_some() {
                return Err(err(format!("cylinder {word} listed twice")));
            }
            let mut f = BandLimitedFunction::constant(j_max, Complex64::new(cyl.mean[0], cyl.mean[1]));
            for b in cyl.block {
                let j = IrrepLabel(b.two_j);
                let d = j.dim();
                if b.re.len() != d * d || b.im.len() != d * d {
                    return Err(err(format!(
                        "block two_j={} on {word} needs {} re and im entries",
                        b.two_j,
                        d * d
                    )));
                }
                let m = CMatrix::from_fn(d, d, |r, c| Complex64::new(b.re[r * d + c], b.im[r * d + c]));
                f.set_block(j, m).map_err(|e| err(format!("{word}: {e}")))?;
            }
            values[r] = Some(f);
        }
        let values = values
            .into_iter()
            .map(|v| v.unwrap_or_else(|| BandLimitedFunction::zero(j_max)))
            .collect();
        Self::new(file.alphabet, file.depth, values)
    }

    pub fn to_toml(&self) -> String {
        let file = ObservableFile {
            alphabet: self.alphabet,
            depth: self.depth,
            two_j_max: self.j_max().two_j(),
            cylinder: self
                .values
                .iter()
                .enumerate()
                .map(|(r, v)| CylinderEntry {
                    word: Word::unrank(r, self.depth, self.alphabet).0,
                    mean: [v.mean.re, v.mean.im],
                    block: v
                        .blocks()
                        .map(|(j, m)| {
                            let d = j.dim();
                            let at = |i: usize| m[(i / d, i % d)];
                            BlockEntry {
                                two_j: j.two_j(),
                                re: (0..d * d).map(|i| at(i).re).collect(),
                                im: (0..d * d).map(|i| at(i).im).collect(),
                            }
                        })
                        .collect(),
                })
                .collect(),
        };
        toml::to_string(&file).expect("observable serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservableFile {
    alphabet: usize,
    depth: usize,
    two_j_max: u32,
    #[serde(default)]
    cylinder: Vec<CylinderEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CylinderEntry {
    word: Vec<u8>,
    #[serde(default)]
    mean: [f64; 2],
    #[serde(default)]
    block: Vec<BlockEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockEntry {
    two_j: u32,
    re: Vec<f64>,
    im: Vec<f64>,
}
