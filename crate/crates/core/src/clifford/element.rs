use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::blade::{blade_product, Blade};
use crate::arith::{format_rational, Rational};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::qform::DiagonalForm;
use crate::scalar::Scalar;

/// The ambient C(Q) for Q = sum d_i X_i^2, over one scalar flavor.
#[derive(Clone, Debug, PartialEq)]
pub struct CliffordAlgebra<S> {
    d: Vec<S>,
}

impl<S: Scalar> CliffordAlgebra<S> {
    pub fn new(d: Vec<S>) -> Arc<Self> {
        assert!(!d.is_empty() && d.len() <= 30, "dimension must be in 1..=30");
        Arc::new(CliffordAlgebra { d })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn coefficients(&self) -> &[S] {
        &self.d
    }

    /// dim C^+(Q) = 2^{n-1}.
    pub fn even_dim(&self) -> usize {
        1 << (self.d.len() - 1)
    }

    pub fn even_basis(&self) -> Vec<Blade> {
        Blade::even(self.dim()).collect()
    }
}

impl CliffordAlgebra<Rational> {
    pub fn exact(form: &DiagonalForm) -> Arc<Self> {
        Self::new(form.coefficients().to_vec())
    }
}

impl CliffordAlgebra<f64> {
    pub fn real(form: &DiagonalForm) -> Arc<Self> {
        Self::new(form.coefficients_f64())
    }
}

/// A sparse element of C(Q): blade -> nonzero coefficient.
#[derive(Clone, Debug)]
pub struct CliffordElement<S> {
    alg: Arc<CliffordAlgebra<S>>,
    coeffs: BTreeMap<Blade, S>,
}

impl<S: Scalar> PartialEq for CliffordElement<S> {
    fn eq(&self, other: &Self) -> bool {
        self.same_algebra(other) && self.coeffs == other.coeffs
    }
}

impl<S: Scalar> CliffordElement<S> {
    pub fn zero(alg: &Arc<CliffordAlgebra<S>>) -> Self {
        CliffordElement {
            alg: alg.clone(),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn scalar(alg: &Arc<CliffordAlgebra<S>>, s: S) -> Self {
        Self::from_terms(alg, [(Blade::ONE, s)])
    }

    pub fn one(alg: &Arc<CliffordAlgebra<S>>) -> Self {
        Self::scalar(alg, S::one())
    }

    pub fn blade(alg: &Arc<CliffordAlgebra<S>>, b: Blade) -> Self {
        Self::from_terms(alg, [(b, S::one())])
    }

    /// The generator e_i (1-based).
    pub fn generator(alg: &Arc<CliffordAlgebra<S>>, i: usize) -> Self {
        Self::blade(alg, Blade::generator(i))
    }

    /// The vector sum_i v_i e_i.
    pub fn vector(alg: &Arc<CliffordAlgebra<S>>, v: &[S]) -> Self {
        assert_eq!(v.len(), alg.dim(), "vector length must equal n");
        Self::from_terms(
            alg,
            v.iter()
                .enumerate()
                .map(|(i, x)| (Blade::generator(i + 1), x.clone())),
        )
    }

    /// Sums repeated blades and drops zero coefficients.
    pub fn from_terms(
        alg: &Arc<CliffordAlgebra<S>>,
        terms: impl IntoIterator<Item = (Blade, S)>,
    ) -> Self {
        let mut coeffs: BTreeMap<Blade, S> = BTreeMap::new();
        for (b, c) in terms {
            assert!(b.fits(alg.dim()), "blade {b} exceeds dimension {}", alg.dim());
            accumulate(&mut coeffs, b, c);
        }
        coeffs.retain(|_, c| !c.is_zero());
        CliffordElement {
            alg: alg.clone(),
            coeffs,
        }
    }

    /// Element with coordinates `x` on the even blade basis.
    pub fn from_even_coords(alg: &Arc<CliffordAlgebra<S>>, x: &[S]) -> Self {
        assert_eq!(x.len(), alg.even_dim());
        Self::from_terms(alg, alg.even_basis().into_iter().zip(x.iter().cloned()))
    }

    pub fn even_coords(&self) -> Vec<S> {
        self.alg
            .even_basis()
            .into_iter()
            .map(|b| self.coeff(b))
            .collect()
    }

    pub fn algebra(&self) -> &Arc<CliffordAlgebra<S>> {
        &self.alg
    }

    pub fn same_algebra(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.alg, &other.alg) || *self.alg == *other.alg
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.same_algebra(other) {
            Ok(())
        } else {
            Err(Error::Usage("elements belong to different Clifford algebras".into()))
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (Blade, &S)> {
        self.coeffs.iter().map(|(b, c)| (*b, c))
    }

    pub fn coeff(&self, b: Blade) -> S {
        self.coeffs.get(&b).cloned().unwrap_or_else(S::zero)
    }

    pub fn scalar_part(&self) -> S {
        self.coeff(Blade::ONE)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_even(&self) -> bool {
        self.coeffs.keys().all(|b| b.is_even())
    }

    pub fn is_scalar(&self) -> bool {
        self.coeffs.keys().all(|&b| b == Blade::ONE)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut coeffs = self.coeffs.clone();
        for (b, c) in &other.coeffs {
            accumulate(&mut coeffs, *b, c.clone());
        }
        coeffs.retain(|_, c| !c.is_zero());
        Ok(CliffordElement {
            alg: self.alg.clone(),
            coeffs,
        })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.checked_add(&other.neg_ref())
    }

    /// Bilinear extension of the blade product.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let d = self.alg.coefficients();
        let mut coeffs: BTreeMap<Blade, S> = BTreeMap::new();
        for (a, x) in &self.coeffs {
            for (b, y) in &other.coeffs {
                let (sign, scale, c) = blade_product(*a, *b, d);
                let v = x.clone() * y.clone() * scale;
                accumulate(&mut coeffs, c, if sign < 0 { -v } else { v });
            }
        }
        coeffs.retain(|_, c| !c.is_zero());
        Ok(CliffordElement {
            alg: self.alg.clone(),
            coeffs,
        })
    }

    pub fn scale(&self, s: &S) -> Self {
        Self::from_terms(
            &self.alg,
            self.coeffs.iter().map(|(b, c)| (*b, c.clone() * s.clone())),
        )
    }

    fn neg_ref(&self) -> Self {
        CliffordElement {
            alg: self.alg.clone(),
            coeffs: self.coeffs.iter().map(|(b, c)| (*b, -c.clone())).collect(),
        }
    }

    /// The anti-involution iota reversing generator order.
    pub fn reversal(&self) -> Self {
        CliffordElement {
            alg: self.alg.clone(),
            coeffs: self
                .coeffs
                .iter()
                .map(|(b, c)| (*b, if b.reversal_sign() < 0 { -c.clone() } else { c.clone() }))
                .collect(),
        }
    }

    pub fn even_part(&self) -> Self {
        self.filter(|b| b.is_even())
    }

    pub fn odd_part(&self) -> Self {
        self.filter(|b| !b.is_even())
    }

    pub fn grade_part(&self, k: u32) -> Self {
        self.filter(|b| b.grade() == k)
    }

    fn filter(&self, keep: impl Fn(Blade) -> bool) -> Self {
        CliffordElement {
            alg: self.alg.clone(),
            coeffs: self
                .coeffs
                .iter()
                .filter(|(b, _)| keep(**b))
                .map(|(b, c)| (*b, c.clone()))
                .collect(),
        }
    }

    /// Trace of x -> c x on C^+(Q): 2^{n-1} times the identity coefficient.
    pub fn trace(&self) -> Result<S> {
        if !self.is_even() {
            return Err(Error::Usage("trace is defined on C^+(Q) only".into()));
        }
        let dim = S::from_usize(self.alg.even_dim())
            .ok_or_else(|| Error::Internal("dimension not representable".into()))?;
        Ok(dim * self.scalar_part())
    }

    /// Matrix of x -> self * x on the even blade basis (self even).
    pub fn left_mul_matrix(&self) -> Result<Matrix<S>> {
        if !self.is_even() {
            return Err(Error::Usage("left multiplication on C^+ needs an even element".into()));
        }
        let basis = self.alg.even_basis();
        let index: BTreeMap<Blade, usize> = basis.iter().enumerate().map(|(i, b)| (*b, i)).collect();
        let n = basis.len();
        let mut m = Matrix::<S>::zeros(n, n);
        let d = self.alg.coefficients();
        for (col, &b) in basis.iter().enumerate() {
            for (a, x) in &self.coeffs {
                let (sign, scale, c) = blade_product(*a, b, d);
                let v = x.clone() * scale;
                let row = index[&c];
                m[(row, col)] = m[(row, col)].clone() + if sign < 0 { -v } else { v };
            }
        }
        Ok(m)
    }

    /// Two-sided inverse. Fast path when iota(g) g is a nonzero scalar,
    /// otherwise an exact (or partially pivoted) linear solve g x = 1.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::NotAUnit);
        }
        let rev = self.reversal();
        let norm = rev.checked_mul(self)?;
        let norm_scale = norm.max_abs().max(self.max_abs() * self.max_abs());
        let nonscalar = norm.terms().filter(|(b, _)| *b != Blade::ONE).map(|(_, c)| c.to_f64().abs()).fold(0.0, f64::max);
        let s = norm.scalar_part();
        let exact_scalar = if S::EXACT { norm.is_scalar() } else { nonscalar <= 1e-14 * norm_scale.max(1.0) };
        if exact_scalar && !s.is_negligible(norm_scale) {
            return Ok(rev.scale(&(S::one() / s)));
        }
        let (basis, m) = if self.is_even() {
            (self.alg.even_basis(), self.left_mul_matrix()?)
        } else {
            let basis: Vec<Blade> = Blade::all(self.alg.dim()).collect();
            (basis.clone(), self.full_left_mul_matrix(&basis))
        };
        let mut rhs = vec![S::zero(); basis.len()];
        rhs[0] = S::one();
        let x = m.solve(&rhs).ok_or(Error::NotAUnit)?;
        let inv = Self::from_terms(&self.alg, basis.into_iter().zip(x));
        Ok(inv)
    }

    fn full_left_mul_matrix(&self, basis: &[Blade]) -> Matrix<S> {
        let n = basis.len();
        let mut m = Matrix::<S>::zeros(n, n);
        let d = self.alg.coefficients();
        for (col, &b) in basis.iter().enumerate() {
            for (a, x) in &self.coeffs {
                let (sign, scale, c) = blade_product(*a, b, d);
                let v = x.clone() * scale;
                let row = c.0 as usize;
                m[(row, col)] = m[(row, col)].clone() + if sign < 0 { -v } else { v };
            }
        }
        m
    }

    /// Debug JSON: {"a_1..a_n bit string": "coefficient"}.
    pub fn to_debug_json(&self) -> serde_json::Value {
        let n = self.alg.dim();
        let map = self
            .coeffs
            .iter()
            .map(|(b, c)| {
                let key: String = (0..n).map(|i| if b.0 >> i & 1 == 1 { '1' } else { '0' }).collect();
                (key, serde_json::Value::String(format_scalar(c)))
            })
            .collect();
        serde_json::Value::Object(map)
    }
}

fn format_scalar<S: Scalar>(c: &S) -> String {
    if S::EXACT {
        // Debug for BigRational is noisy; go through f64 only for floats.
        let any: &dyn std::any::Any = c;
        if let Some(r) = any.downcast_ref::<Rational>() {
            return format_rational(r);
        }
    }
    format!("{}", c.to_f64())
}

fn accumulate<S: Scalar>(coeffs: &mut BTreeMap<Blade, S>, b: Blade, c: S) {
    match coeffs.get_mut(&b) {
        Some(v) => *v = v.clone() + c,
        None => {
            coeffs.insert(b, c);
        }
    }
}

impl CliffordElement<Rational> {
    /// One-way promotion to the floating flavor.
    pub fn to_f64(&self, target: &Arc<CliffordAlgebra<f64>>) -> CliffordElement<f64> {
        assert_eq!(target.dim(), self.alg.dim(), "promotion target has different dimension");
        CliffordElement::from_terms(target, self.terms().map(|(b, c)| (b, c.to_f64())))
    }
}

impl CliffordElement<f64> {
    /// Max-abs coefficient difference relative to max(1, largest coefficient).
    pub fn relative_distance(&self, other: &Self) -> f64 {
        let scale = self.max_abs().max(other.max_abs()).max(1.0);
        self.checked_sub(other).expect("same algebra").max_abs() / scale
    }
}

impl<S: Scalar> Add for &CliffordElement<S> {
    type Output = CliffordElement<S>;
    fn add(self, rhs: Self) -> CliffordElement<S> {
        self.checked_add(rhs).expect("mismatched Clifford algebras")
    }
}

impl<S: Scalar> Sub for &CliffordElement<S> {
    type Output = CliffordElement<S>;
    fn sub(self, rhs: Self) -> CliffordElement<S> {
        self.checked_sub(rhs).expect("mismatched Clifford algebras")
    }
}

impl<S: Scalar> Mul for &CliffordElement<S> {
    type Output = CliffordElement<S>;
    fn mul(self, rhs: Self) -> CliffordElement<S> {
        self.checked_mul(rhs).expect("mismatched Clifford algebras")
    }
}

impl<S: Scalar> Neg for &CliffordElement<S> {
    type Output = CliffordElement<S>;
    fn neg(self) -> CliffordElement<S> {
        self.neg_ref()
    }
}

impl<S: Scalar> fmt::Display for CliffordElement<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (b, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})*{b}", format_scalar(c))?;
        }
        Ok(())
    }
}

/// Tr(alpha iota(v) w).
pub fn bilinear_e<S: Scalar>(
    alpha: &CliffordElement<S>,
    v: &CliffordElement<S>,
    w: &CliffordElement<S>,
) -> Result<S> {
    if !v.is_even() || !w.is_even() {
        return Err(Error::Usage("E is defined on C^+(Q) only".into()));
    }
    alpha.checked_mul(&v.reversal())?.checked_mul(w)?.trace()
}
