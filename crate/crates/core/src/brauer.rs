//! Quaternion algebras over Q as ramification sets, Hilbert symbols, and the
//! structure of C^+(Q) as a matrix algebra over a quaternion algebra.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use serde::{Serialize, Serializer};
use serde_json::json;

use crate::arith::{Rational, SquareClass};
use crate::error::{Error, Result};
use crate::qform::DiagonalForm;

pub const DEFAULT_WITNESS_HEIGHT: u64 = 50;

/// A place of Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Prime(u64),
    Infinity,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Prime(p) => write!(f, "{p}"),
            Place::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let m128 = m as u128;
    let mut acc: u128 = 1 % m128;
    let mut b = base as u128 % m128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    base = acc as u64;
    base
}

/// Legendre symbol (u/p) for an odd prime p not dividing u.
fn legendre(u: u64, p: u64) -> i8 {
    if pow_mod(u % p, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// (a,b)_v for square classes: +1 iff z^2 = a x^2 + b y^2 has a nontrivial
/// solution over Q_v.
pub fn hilbert_symbol_classes(a: &SquareClass, b: &SquareClass, place: Place) -> i8 {
    match place {
        Place::Infinity => {
            if a.is_negative() && b.is_negative() {
                -1
            } else {
                1
            }
        }
        Place::Prime(2) => {
            let alpha = a.contains_prime(2) as u64;
            let beta = b.contains_prime(2) as u64;
            let u = a.unit_part_mod(2, 8);
            let v = b.unit_part_mod(2, 8);
            let eps = |x: u64| (x % 4 == 3) as u64;
            let omega = |x: u64| (x % 8 == 3 || x % 8 == 5) as u64;
            let e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u);
            if e % 2 == 0 {
                1
            } else {
                -1
            }
        }
        Place::Prime(p) => {
            let alpha = a.contains_prime(p) as u64;
            let beta = b.contains_prime(p) as u64;
            let mut s: i8 = 1;
            if alpha * beta == 1 && (p - 1) / 2 % 2 == 1 {
                s = -s;
            }
            if beta == 1 {
                s *= legendre(a.unit_part_mod(p, p), p);
            }
            if alpha == 1 {
                s *= legendre(b.unit_part_mod(p, p), p);
            }
            s
        }
    }
}

pub fn hilbert_symbol(a: &Rational, b: &Rational, place: Place) -> Result<i8> {
    Ok(hilbert_symbol_classes(
        &SquareClass::from_rational(a)?,
        &SquareClass::from_rational(b)?,
        place,
    ))
}

/// The places where (a,b) can ramify: infinity and the primes dividing 2ab.
pub fn candidate_places(a: &SquareClass, b: &SquareClass) -> BTreeSet<Place> {
    let mut places: BTreeSet<Place> = a.primes().chain(b.primes()).map(Place::Prime).collect();
    places.insert(Place::Prime(2));
    places.insert(Place::Infinity);
    places
}

/// The quaternion algebra (a,b)_Q with a, b squarefree nonzero integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuaternionSymbol {
    a: SquareClass,
    b: SquareClass,
}

impl QuaternionSymbol {
    pub fn new(a: SquareClass, b: SquareClass) -> Self {
        QuaternionSymbol { a, b }
    }

    pub fn from_integers(a: i64, b: i64) -> Result<Self> {
        Ok(Self::new(SquareClass::from_i64(a)?, SquareClass::from_i64(b)?))
    }

    pub fn a(&self) -> &SquareClass {
        &self.a
    }

    pub fn b(&self) -> &SquareClass {
        &self.b
    }

    pub fn ramification(&self) -> Result<BrauerClass> {
        let ram: BTreeSet<Place> = candidate_places(&self.a, &self.b)
            .into_iter()
            .filter(|&v| hilbert_symbol_classes(&self.a, &self.b, v) == -1)
            .collect();
        if ram.len() % 2 == 1 {
            return Err(Error::Internal(format!(
                "odd ramification set for ({},{}): Hilbert symbol bug",
                self.a, self.b
            )));
        }
        Ok(BrauerClass { ram })
    }

    /// Split/division decision from the local obstruction; when split, also
    /// searches for a small witness of a x^2 + b y^2 = ab z^2.
    pub fn is_split(&self, height: u64) -> Result<SplitCertificate> {
        let class = self.ramification()?;
        let split = class.is_trivial();
        let witness = if split {
            isotropy_witness(&self.a, &self.b, height)
        } else {
            None
        };
        Ok(SplitCertificate {
            split,
            class,
            witness,
        })
    }
}

impl fmt::Display for QuaternionSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitCertificate {
    pub split: bool,
    pub class: BrauerClass,
    /// (x, y, z) != 0 with a x^2 + b y^2 - ab z^2 = 0, checked exactly.
    pub witness: Option<(i64, i64, i64)>,
}

/// Bounded search over 0 <= x, y, z <= height; signs do not matter.
pub fn isotropy_witness(a: &SquareClass, b: &SquareClass, height: u64) -> Option<(i64, i64, i64)> {
    let a = i128::from(a.to_i64()?);
    let b = i128::from(b.to_i64()?);
    let ab = a.checked_mul(b)?;
    let h = i128::from(height.min(1 << 20));
    for z in 0..=h {
        for x in 0..=h {
            let rest = ab * z * z - a * x * x;
            // b y^2 = rest
            if rest % b != 0 {
                continue;
            }
            let y2 = rest / b;
            if y2 < 0 {
                continue;
            }
            let y = isqrt(y2);
            if y * y == y2 && y <= h && (x, y, z) != (0, 0, 0) {
                debug_assert_eq!(a * x * x + b * y * y - ab * z * z, 0);
                return Some((x as i64, y as i64, z as i64));
            }
        }
    }
    None
}

fn isqrt(n: i128) -> i128 {
    let mut r = (n as f64).sqrt() as i128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// A 2-torsion Brauer class over Q, i.e. a quaternion algebra up to
/// isomorphism, given by its (even) set of ramified places.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize)]
pub struct BrauerClass {
    ram: BTreeSet<Place>,
}

impl BrauerClass {
    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn from_places(places: impl IntoIterator<Item = Place>) -> Result<Self> {
        let ram: BTreeSet<Place> = places.into_iter().collect();
        if ram.len() % 2 == 1 {
            return Err(Error::Usage("a Brauer class has an even number of ramified places".into()));
        }
        Ok(BrauerClass { ram })
    }

    pub fn ramified(&self) -> &BTreeSet<Place> {
        &self.ram
    }

    pub fn is_trivial(&self) -> bool {
        self.ram.is_empty()
    }

    /// A (x) B = M_2(D): D's ramification is the symmetric difference.
    pub fn tensor(&self, other: &Self) -> Self {
        BrauerClass {
            ram: self.ram.symmetric_difference(&other.ram).copied().collect(),
        }
    }

    /// Whether D (x) Q(sqrt d) is split: no ramified place may split in
    /// Q(sqrt d). `d` must not be a square.
    pub fn splits_over_quadratic(&self, d: &SquareClass) -> Result<bool> {
        if d.is_square() {
            return Err(Error::Usage("splits_over_quadratic needs a non-square d".into()));
        }
        Ok(self.ram.iter().all(|&v| !place_splits(v, d)))
    }
}

/// Whether the place v splits in Q(sqrt d) (d squarefree, not a square).
pub fn place_splits(v: Place, d: &SquareClass) -> bool {
    match v {
        Place::Infinity => !d.is_negative(),
        Place::Prime(2) => !d.contains_prime(2) && d.unit_part_mod(0, 8) == 1,
        Place::Prime(p) => !d.contains_prime(p) && legendre(d.unit_part_mod(0, p), p) == 1,
    }
}

impl fmt::Display for BrauerClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let places: Vec<String> = self.ram.iter().map(Place::to_string).collect();
        write!(f, "{{{}}}", places.join(","))
    }
}

/// Center of C^+(Q).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Center {
    Rationals,
    /// Q(sqrt d) for a squarefree non-square d.
    Quadratic(SquareClass),
    /// Q x Q.
    Split,
}

impl Center {
    pub fn degree(&self) -> u64 {
        match self {
            Center::Rationals => 1,
            _ => 2,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Center::Rationals => "Q".into(),
            Center::Quadratic(d) => format!("Q(sqrt {d})"),
            Center::Split => "QxQ".into(),
        }
    }
}

/// C^+(Q) = M_k(D) over its center, or M_k(D) x M_k(D) when the center is Q x Q.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraStructure {
    pub n: usize,
    pub matrix_size: u64,
    pub center: Center,
    /// The Q-class of D (before base change to a quadratic center); absent
    /// for n <= 2 where C^+(Q) is commutative.
    pub quaternion: Option<BrauerClass>,
    /// Whether D is M_2 over the center.
    pub is_split: bool,
    /// The symbols (-d1 d2, -d2 d3) peeled off by the recursion, in order.
    pub symbols: Vec<QuaternionSymbol>,
}

impl AlgebraStructure {
    /// dim_Q of the whole algebra as predicted by the structure.
    pub fn rational_dimension(&self) -> u64 {
        let quaternion_dim = if self.quaternion.is_some() { 4 } else { 1 };
        let (degree, factors) = match self.center {
            Center::Split => (1, 2),
            ref c => (c.degree(), 1),
        };
        self.matrix_size * self.matrix_size * quaternion_dim * degree * factors
    }

    /// JSON object printed by `classify`.
    pub fn to_json(&self) -> serde_json::Value {
        let quaternion = match (&self.quaternion, &self.center) {
            (None, _) => serde_json::Value::Null,
            (Some(c), Center::Quadratic(_)) => {
                json!({"ram": c.ramified(), "over": self.center.label()})
            }
            (Some(c), _) => json!({"ram": c.ramified()}),
        };
        json!({
            "matrix_size": self.matrix_size,
            "center": self.center.label(),
            "quaternion": quaternion,
            "split": self.is_split,
            "assumes_generic": true,
        })
    }
}

/// Discriminant class (-1)^m d_1 ... d_{2m}, computed directly from the form.
pub fn discriminant_class(classes: &[SquareClass]) -> SquareClass {
    let m = classes.len() / 2;
    let prod = classes.iter().fold(SquareClass::one(), |acc, c| acc.mul(c));
    if m % 2 == 1 {
        prod.neg()
    } else {
        prod
    }
}

/// Peels (-c1 c2, -c2 c3) off the leading three coefficients, replacing them
/// by <-c1 c2 c3>, until one or two coefficients remain; the Brauer classes
/// of the peeled symbols add up to D.
pub fn even_clifford_structure(form: &DiagonalForm) -> Result<AlgebraStructure> {
    let n = form.dim();
    if n == 0 {
        return Err(Error::Usage("even_clifford_structure needs n >= 1".into()));
    }
    let original = form.square_classes()?;
    let mut c = original.clone();
    let mut symbols = Vec::new();
    let mut class = BrauerClass::trivial();
    while c.len() >= 3 {
        let sym = QuaternionSymbol::new(c[0].mul(&c[1]).neg(), c[1].mul(&c[2]).neg());
        class = class.tensor(&sym.ramification()?);
        let merged = c[0].mul(&c[1]).mul(&c[2]).neg();
        symbols.push(sym);
        c.splice(0..3, [merged]);
    }

    let structure = if n % 2 == 1 {
        let m = (n - 1) / 2;
        if m == 0 {
            AlgebraStructure {
                n,
                matrix_size: 1,
                center: Center::Rationals,
                quaternion: None,
                is_split: true,
                symbols,
            }
        } else {
            AlgebraStructure {
                n,
                matrix_size: 1 << (m - 1),
                center: Center::Rationals,
                is_split: class.is_trivial(),
                quaternion: Some(class),
                symbols,
            }
        }
    } else {
        let m = n / 2;
        let disc = c[0].mul(&c[1]).neg();
        if disc != discriminant_class(&original) {
            return Err(Error::Internal("peeled discriminant disagrees with (-1)^m prod d_i".into()));
        }
        let center = if disc.is_square() {
            Center::Split
        } else {
            Center::Quadratic(disc.clone())
        };
        if m == 1 {
            AlgebraStructure {
                n,
                matrix_size: 1,
                center,
                quaternion: None,
                is_split: true,
                symbols,
            }
        } else {
            let is_split = match &center {
                Center::Quadratic(d) => class.splits_over_quadratic(d)?,
                _ => class.is_trivial(),
            };
            AlgebraStructure {
                n,
                matrix_size: 1 << (m - 2),
                center,
                quaternion: Some(class),
                is_split,
                symbols,
            }
        }
    };

    let expected = 1u64 << (n - 1);
    if structure.rational_dimension() != expected {
        return Err(Error::Internal(format!(
            "structure has dimension {} but dim C^+(Q) = {expected}",
            structure.rational_dimension()
        )));
    }
    Ok(structure)
}

/// One isotypic piece A_i^{n_i} of the Kuga-Satake variety.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsogenyFactor {
    pub multiplicity: u64,
    pub dimension: u64,
    /// The division algebra contained in End(A_i) (x) Q.
    pub endomorphisms: String,
    pub description: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IsogenyDecomposition {
    pub ks_dim: u64,
    pub factors: Vec<IsogenyFactor>,
    pub summary: String,
    pub assumes_generic: bool,
}

fn variety_name(dim: u64) -> String {
    match dim {
        1 => "elliptic curve".into(),
        2 => "abelian surface".into(),
        d => format!("abelian {d}-fold"),
    }
}

/// Translates End = M_{n_1}(D_1) x ... into A ~ A_1^{n_1} x ..., valid when
/// MT(V) = GO(Q).
pub fn isogeny_decomposition(structure: &AlgebraStructure) -> Result<IsogenyDecomposition> {
    let n = structure.n;
    if n < 2 {
        return Err(Error::Usage("a Kuga-Satake variety needs n >= 2".into()));
    }
    let ks_dim = 1u64 << (n - 2);
    let k = structure.matrix_size;

    // Division algebra over the center and the multiplicity it forces.
    let (mult, division): (u64, String) = match (&structure.quaternion, structure.is_split) {
        (None, _) => (k, String::new()),
        (Some(_), true) => (2 * k, String::new()),
        (Some(c), false) => (k, format!("quaternion algebra ramified at {c}")),
    };
    let (copies, field) = match &structure.center {
        Center::Rationals => (1, "Q".to_string()),
        Center::Quadratic(_) => (1, structure.center.label()),
        Center::Split => {
            if n == 2 {
                return Err(Error::Usage("C^+(Q) = Q x Q in dimension 2 carries no weight one structure".into()));
            }
            (2, "Q".to_string())
        }
    };
    let dimension = ks_dim / (mult * copies);
    let endomorphisms = match (division.is_empty(), &structure.center) {
        (true, _) => field.clone(),
        (false, Center::Quadratic(_)) => format!("{division}, base changed to {field}"),
        (false, _) => division,
    };
    let factor = |label: &str| {
        let name = variety_name(dimension);
        let description = if mult == 1 {
            format!("simple {name}{label}")
        } else {
            format!("{mult} isogenous copies of a simple {name}{label}")
        };
        IsogenyFactor {
            multiplicity: mult,
            dimension,
            endomorphisms: endomorphisms.clone(),
            description,
        }
    };
    let factors: Vec<IsogenyFactor> = if copies == 2 {
        vec![factor(" A_1"), factor(" A_2")]
    } else {
        vec![factor("")]
    };

    let summary = if copies == 1 && mult == 2 && dimension == 1 {
        "product of two isogenous elliptic curves".to_string()
    } else if copies == 1 && mult == 1 {
        format!("simple {}", variety_name(dimension))
    } else if copies == 1 {
        format!(
            "A^{mult} with A a simple {} (dim A = {dimension}), {endomorphisms} ⊆ End(A)",
            variety_name(dimension)
        )
    } else {
        format!(
            "A_1^{mult} x A_2^{mult} with A_1, A_2 non-isogenous simple {}s (dim {dimension}), {endomorphisms} ⊆ End(A_i)",
            variety_name(dimension)
        )
    };

    let total: u64 = factors.iter().map(|f| f.multiplicity * f.dimension).sum();
    if total != ks_dim {
        return Err(Error::Internal(format!("factor dimensions sum to {total}, expected {ks_dim}")));
    }
    Ok(IsogenyDecomposition {
        ks_dim,
        factors,
        summary,
        assumes_generic: true,
    })
}

/// The squarefree integer of a quadratic center, if any.
pub fn center_discriminant(structure: &AlgebraStructure) -> Option<BigInt> {
    match &structure.center {
        Center::Quadratic(d) => Some(d.to_bigint()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(n: i64) -> SquareClass {
        SquareClass::from_i64(n).unwrap()
    }

    fn places(ps: &[u64], inf: bool) -> BrauerClass {
        let mut v: Vec<Place> = ps.iter().map(|&p| Place::Prime(p)).collect();
        if inf {
            v.push(Place::Infinity);
        }
        BrauerClass::from_places(v).unwrap()
    }

    fn form(d: &[i64]) -> DiagonalForm {
        DiagonalForm::from_integers(d).unwrap()
    }

    #[test]
    fn hilbert_examples() {
        for b in [-7, -1, 2, 3, 5, 6] {
            for v in [Place::Prime(2), Place::Prime(3), Place::Prime(5), Place::Prime(7), Place::Infinity] {
                assert_eq!(hilbert_symbol_classes(&sc(1), &sc(b), v), 1);
            }
        }
        assert_eq!(hilbert_symbol_classes(&sc(-1), &sc(-1), Place::Infinity), -1);
        assert_eq!(hilbert_symbol_classes(&sc(-1), &sc(-1), Place::Prime(2)), -1);
        for p in [3, 5, 7, 11, 13] {
            assert_eq!(hilbert_symbol_classes(&sc(-1), &sc(-1), Place::Prime(p)), 1);
        }
        let half = Rational::new(1.into(), 2.into());
        assert_eq!(hilbert_symbol(&half, &Rational::from_integer((-1).into()), Place::Prime(2)).unwrap(), 1);
    }

    #[test]
    fn ramification_examples() {
        assert!(QuaternionSymbol::from_integers(1, 7).unwrap().ramification().unwrap().is_trivial());
        assert_eq!(QuaternionSymbol::from_integers(-1, -1).unwrap().ramification().unwrap(), places(&[2], true));
        assert_eq!(QuaternionSymbol::from_integers(-1, 3).unwrap().ramification().unwrap(), places(&[2, 3], false));
    }

    #[test]
    fn split_examples() {
        let c = QuaternionSymbol::from_integers(-1, 1).unwrap().is_split(50).unwrap();
        assert!(c.split);
        let (x, y, z) = c.witness.unwrap();
        assert_eq!(-x * x + y * y + z * z, 0);
        assert!(!QuaternionSymbol::from_integers(-1, 3).unwrap().is_split(50).unwrap().split);
        assert!(!QuaternionSymbol::from_integers(-1, -1).unwrap().is_split(50).unwrap().split);
    }

    #[test]
    fn tensor_is_symmetric_difference() {
        let c = places(&[2], true);
        assert!(c.tensor(&c).is_trivial());
        assert_eq!(places(&[2], true).tensor(&places(&[2, 3], false)), places(&[3], true));
        assert!(BrauerClass::from_places([Place::Infinity]).is_err());
    }

    #[test]
    fn quadratic_splitting_examples() {
        assert!(BrauerClass::trivial().splits_over_quadratic(&sc(5)).unwrap());
        assert!(places(&[2], true).splits_over_quadratic(&sc(-1)).unwrap());
        assert!(!places(&[3], true).splits_over_quadratic(&sc(3)).unwrap());
        // 7 splits in Q(sqrt 2) (3^2 = 2 mod 7); 2 ramifies there
        assert!(!places(&[2, 7], false).splits_over_quadratic(&sc(2)).unwrap());
        // 17 = 1 mod 8: 2 splits in Q(sqrt 17)
        assert!(!places(&[2], true).splits_over_quadratic(&sc(17)).unwrap());
        assert!(BrauerClass::trivial().splits_over_quadratic(&sc(4)).is_err());
    }

    #[test]
    fn ternary_forms() {
        let s = even_clifford_structure(&form(&[-1, -1, 1])).unwrap();
        assert_eq!((s.matrix_size, s.center.clone(), s.is_split), (1, Center::Rationals, true));
        for d in [3, 7, 11] {
            let s = even_clifford_structure(&form(&[-1, -1, d])).unwrap();
            assert!(!s.is_split, "d = {d}");
            assert_eq!(s.symbols[0], QuaternionSymbol::from_integers(-1, d).unwrap());
        }
    }

    #[test]
    fn weil_type_forms() {
        for d in [1, 2, 3, 5] {
            let s = even_clifford_structure(&form(&[-1, -1, 1, 1, 1, d])).unwrap();
            assert_eq!(s.matrix_size, 2);
            assert_eq!(s.center, Center::Quadratic(sc(-d)));
            assert!(s.is_split);
        }
    }

    #[test]
    fn binary_and_unary_forms() {
        let s = even_clifford_structure(&form(&[2, -2])).unwrap();
        assert_eq!(s.center, Center::Split);
        let s = even_clifford_structure(&form(&[-1, -2])).unwrap();
        assert_eq!(s.center, Center::Quadratic(sc(-2)));
        let s = even_clifford_structure(&form(&[5])).unwrap();
        assert_eq!((s.center, s.matrix_size, s.quaternion), (Center::Rationals, 1, None));
    }

    #[test]
    fn isogeny_examples() {
        let d = isogeny_decomposition(&even_clifford_structure(&form(&[-1, -1, 1])).unwrap()).unwrap();
        assert_eq!(d.summary, "product of two isogenous elliptic curves");
        let d = isogeny_decomposition(&even_clifford_structure(&form(&[-1, -1, 3])).unwrap()).unwrap();
        assert_eq!(d.summary, "simple abelian surface");
        let d = isogeny_decomposition(&even_clifford_structure(&form(&[-1, -1, 1, 1, 1, 3])).unwrap()).unwrap();
        assert_eq!(d.ks_dim, 16);
        assert_eq!(d.factors.len(), 1);
        assert_eq!((d.factors[0].multiplicity, d.factors[0].dimension), (4, 4));
        assert_eq!(d.factors[0].endomorphisms, "Q(sqrt -3)");
        assert!(d.assumes_generic);
    }

    #[test]
    fn structure_json_schema() {
        let s = even_clifford_structure(&form(&[-1, -1, 3])).unwrap();
        let v = s.to_json();
        assert_eq!(v["matrix_size"], 1);
        assert_eq!(v["center"], "Q");
        assert_eq!(v["quaternion"]["ram"], json!(["2", "3"]));
        assert_eq!(v["split"], false);
        assert_eq!(v["assumes_generic"], true);
    }
}
