//! SU(2) arithmetic on unit quaternions.
//!
//! A quaternion `a + bi + cj + dk` is identified with the special unitary matrix
//!
//! ```text
//!   [  a + bi   c + di ]
//!   [ -c + di   a - bi ]
//! ```
//!
//! and the Hamilton product agrees with matrix multiplication under this map.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Deserialize;

use crate::error::{Error, Result};

/// Residual accepted for generator matrices read from text.
pub const INPUT_UNITARITY_TOL: f64 = 1e-9;

pub type Mat2 = [[Complex64; 2]; 2];

/// Element of SU(2) stored as a unit quaternion `(a, b, c, d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement {
    q: [f64; 4],
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement {
        q: [1.0, 0.0, 0.0, 0.0],
    };

    /// Normalizes `q` onto the unit sphere. A zero quaternion maps to the identity.
    pub fn from_quaternion(q: [f64; 4]) -> Self {
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n < 1e-300 {
            return Self::IDENTITY;
        }
        Self {
            q: [q[0] / n, q[1] / n, q[2] / n, q[3] / n],
        }
    }

    /// `diag(e^{i phi}, e^{-i phi})`.
    pub fn diagonal(phi: f64) -> Self {
        Self::from_quaternion([phi.cos(), phi.sin(), 0.0, 0.0])
    }

    /// Builds an element from a 2x2 complex matrix, rejecting anything farther
    /// than `tol` from SU(2).
    pub fn from_matrix(m: &Mat2, tol: f64) -> std::result::Result<Self, f64> {
        let r = su2_residual(m);
        if r > tol {
            return Err(r);
        }
        // Average the two redundant copies of each coefficient.
        let a = 0.5 * (m[0][0].re + m[1][1].re);
        let b = 0.5 * (m[0][0].im - m[1][1].im);
        let c = 0.5 * (m[0][1].re - m[1][0].re);
        let d = 0.5 * (m[0][1].im + m[1][0].im);
        Ok(Self::from_quaternion([a, b, c, d]))
    }

    pub fn quaternion(&self) -> [f64; 4] {
        self.q
    }

    pub fn matrix(&self) -> Mat2 {
        let [a, b, c, d] = self.q;
        [
            [Complex64::new(a, b), Complex64::new(c, d)],
            [Complex64::new(-c, d), Complex64::new(a, -b)],
        ]
    }

    /// Group product `self * other`, renormalized.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        let [a0, a1, a2, a3] = self.q;
        let [b0, b1, b2, b3] = other.q;
        Self::from_quaternion([
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ])
    }

    pub fn inverse(&self) -> GroupElement {
        let [a, b, c, d] = self.q;
        GroupElement { q: [a, -b, -c, -d] }
    }

    /// Haar-distributed element: four independent Gaussians projected to S^3.
    pub fn haar_sample<R: Rng + ?Sized>(rng: &mut R) -> GroupElement {
        // Rejection of the (probability zero) tiny-norm case keeps the law exact.
        loop {
            let q: [f64; 4] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            if q.iter().map(|x| x * x).sum::<f64>() > 1e-24 {
                return Self::from_quaternion(q);
            }
        }
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.q[0]
    }

    /// Rotation angle `theta` in `[0, 2 pi]` with `tr g = 2 cos(theta / 2)`.
    pub fn class_angle(&self) -> f64 {
        let [a, b, c, d] = self.q;
        let v = (b * b + c * c + d * d).sqrt();
        2.0 * v.atan2(a)
    }

    /// Largest entrywise modulus of the difference of the matrix views.
    pub fn max_dist(&self, other: &GroupElement) -> f64 {
        let (m, n) = (self.matrix(), other.matrix());
        let mut r: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                r = r.max((m[i][j] - n[i][j]).norm());
            }
        }
        r
    }
}

impl Default for GroupElement {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.q;
        write!(f, "{a:+.6} {b:+.6}i {c:+.6}j {d:+.6}k")
    }
}

/// `max(|m^H m - I|_max, |det m - 1|)` together with the SU(2) shape constraints
/// `m11 = conj(m22)` and `m12 = -conj(m21)`.
pub fn su2_residual(m: &Mat2) -> f64 {
    let mut r: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut s = Complex64::new(0.0, 0.0);
            for l in 0..2 {
                s += m[l][i].conj() * m[l][j];
            }
            if i == j {
                s -= 1.0;
            }
            r = r.max(s.norm());
        }
    }
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    r = r.max((det - 1.0).norm());
    r = r.max((m[0][0] - m[1][1].conj()).norm());
    r.max((m[0][1] + m[1][0].conj()).norm())
}

/// The generators `tau_1, ..., tau_k` of a locally constant extension.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    pub name: String,
    pub taus: Vec<GroupElement>,
}

impl GeneratorSet {
    pub fn new(name: impl Into<String>, taus: Vec<GroupElement>) -> Result<Self> {
        if taus.is_empty() {
            return Err(Error::InvalidArgument(
                "a generator set needs at least one element".into(),
            ));
        }
        Ok(Self {
            name: name.into(),
            taus,
        })
    }

    pub fn k(&self) -> usize {
        self.taus.len()
    }

    /// Alphabet size `2k` of the underlying full shift.
    pub fn alphabet(&self) -> usize {
        2 * self.taus.len()
    }

    /// `(tau_1, ..., tau_k, tau_1^{-1}, ..., tau_k^{-1})`, i.e. the group value of
    /// each symbol `1..=2k` in order.
    pub fn symmetrized(&self) -> Vec<GroupElement> {
        self.taus
            .iter()
            .copied()
            .chain(self.taus.iter().map(GroupElement::inverse))
            .collect()
    }

    /// Three generators of norm-5 quaternions `1 + 2i`, `1 + 2j`, `1 + 2k`,
    /// scaled to unit length.
    pub fn lps5() -> Self {
        let s = 5f64.sqrt().recip();
        let taus = vec![
            GroupElement::from_quaternion([s, 2.0 * s, 0.0, 0.0]),
            GroupElement::from_quaternion([s, 0.0, 2.0 * s, 0.0]),
            GroupElement::from_quaternion([s, 0.0, 0.0, 2.0 * s]),
        ];
        Self {
            name: "lps5".into(),
            taus,
        }
    }

    /// Single diagonal generator; generates an abelian (toral) group.
    pub fn diagonal(phi: f64) -> Self {
        Self {
            name: format!("diagonal:{phi}"),
            taus: vec![GroupElement::diagonal(phi)],
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut set = Self::from_toml(&text)?;
        if set.name.is_empty() {
            set.name = format!("file:{}", path.display());
        }
        Ok(set)
    }

    /// Parses a generator file:
    ///
    /// ```toml
    /// name = "my-set"
    /// generators = [
    ///   # g11.re, g11.im, g12.re, g12.im, g21.re, g21.im, g22.re, g22.im
    ///   [0.6, 0.8, 0.0, 0.0, 0.0, 0.0, 0.6, -0.8],
    /// ]
    /// ```
    pub fn from_toml(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct GeneratorFile {
            #[serde(default)]
            name: String,
            generators: Vec<Vec<f64>>,
        }
        let file: GeneratorFile = toml::from_str(text).map_err(|e| Error::Parse {
            what: "generator file".into(),
            msg: e.to_string(),
        })?;
        if file.generators.len() < 2 {
            return Err(Error::Parse {
                what: "generator file".into(),
                msg: format!(
                    "need at least 2 generators (alphabet size >= 4), found {}",
                    file.generators.len()
                ),
            });
        }
        let mut taus = Vec::with_capacity(file.generators.len());
        for (index, row) in file.generators.iter().enumerate() {
            if row.len() != 8 {
                return Err(Error::Parse {
                    what: "generator file".into(),
                    msg: format!("generator {index} has {} numbers, expected 8", row.len()),
                });
            }
            let c = |i: usize| Complex64::new(row[2 * i], row[2 * i + 1]);
            let m = [[c(0), c(1)], [c(2), c(3)]];
            let g = GroupElement::from_matrix(&m, INPUT_UNITARITY_TOL).map_err(|residual| {
                Error::NonUnitary {
                    index,
                    residual,
                    tolerance: INPUT_UNITARITY_TOL,
                }
            })?;
            taus.push(g);
        }
        Ok(Self {
            name: file.name,
            taus,
        })
    }

    pub fn to_toml(&self) -> String {
        let mut out = format!("name = {:?}\ngenerators = [\n", self.name);
        for g in &self.taus {
            let m = g.matrix();
            let nums: Vec<String> = m
                .iter()
                .flatten()
                .flat_map(|z| [z.re, z.im])
                .map(|x| format!("{x:?}"))
                .collect();
            out.push_str(&format!("  [{}],\n", nums.join(", ")));
        }
        out.push_str("]\n");
        out
    }
}

/// Resolves a preset label: `lps5`, `diagonal:<phi>` (also `diagonal(<phi>)`),
/// or `file:<path>`.
pub fn preset(name: &str) -> Result<GeneratorSet> {
    let name = name.trim();
    if name == "lps5" {
        return Ok(GeneratorSet::lps5());
    }
    if let Some(path) = name.strip_prefix("file:") {
        return GeneratorSet::from_file(Path::new(path));
    }
    let phi = name
        .strip_prefix("diagonal:")
        .or_else(|| {
            name.strip_prefix("diagonal(")
                .and_then(|s| s.strip_suffix(')'))
        })
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))?;
    let phi = parse_angle(phi).ok_or_else(|| Error::UnknownPreset(name.to_string()))?;
    Ok(GeneratorSet::diagonal(phi))
}

/// Accepts plain reals and the forms `pi`, `pi/3`, `2pi/5`.
fn parse_angle(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(x) = s.parse::<f64>() {
        return x.is_finite().then_some(x);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().ok()?),
        None => (s, 1.0),
    };
    let coef = num.strip_suffix("pi")?.trim().trim_end_matches('*');
    let coef = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().ok()? };
    Some(coef * PI / den)
}
