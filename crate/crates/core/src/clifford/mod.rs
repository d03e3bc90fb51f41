//! Arithmetic in the Clifford algebra C(Q) of a diagonal form, over exact
//! rationals or doubles.

mod blade;
mod element;

use std::collections::BTreeMap;
use std::sync::Arc;

pub use blade::{blade_product, swap_count, Blade};
pub use element::{bilinear_e, CliffordAlgebra, CliffordElement};

use crate::arith::Rational;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

pub const DEFAULT_ORACLE_BOUND: usize = 6;

/// Basis of the center of C^+(Q), found by solving z g = g z for every even
/// generator g = e_i e_j as one exact linear system. Brute force, so the
/// dimension is capped by `bound`.
pub fn center_of_even(
    alg: &Arc<CliffordAlgebra<Rational>>,
    bound: usize,
) -> Result<Vec<CliffordElement<Rational>>> {
    let n = alg.dim();
    if n > bound {
        return Err(Error::Usage(format!(
            "center oracle refuses n = {n} above its bound {bound}"
        )));
    }
    let basis = alg.even_basis();
    if n < 2 {
        return Ok(vec![CliffordElement::one(alg)]);
    }
    let index: BTreeMap<Blade, usize> = basis.iter().enumerate().map(|(i, b)| (*b, i)).collect();
    let dim = basis.len();
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            let g = CliffordElement::blade(alg, Blade::from_indices(&[i, j]));
            // columns: coefficient of z on each basis blade; rows: blades of z g - g z
            let mut block = Matrix::<Rational>::zeros(dim, dim);
            for (col, &b) in basis.iter().enumerate() {
                let e = CliffordElement::blade(alg, b);
                let comm = &(&e * &g) - &(&g * &e);
                for (blade, c) in comm.terms() {
                    block[(index[&blade], col)] = c.clone();
                }
            }
            rows.extend(block.to_rows().into_iter().filter(|r| r.iter().any(|x| !num_traits::Zero::is_zero(x))));
        }
    }
    if rows.is_empty() {
        return Ok(basis.iter().map(|&b| CliffordElement::blade(alg, b)).collect());
    }
    let system = Matrix::from_rows(rows);
    Ok(system
        .nullspace()
        .into_iter()
        .map(|v| CliffordElement::from_even_coords(alg, &v))
        .collect())
}

/// rho(g) v = g v g^{-1}.
pub fn conjugation_rho<S: Scalar>(
    g: &CliffordElement<S>,
    v: &CliffordElement<S>,
) -> Result<CliffordElement<S>> {
    let inv = g.inverse()?;
    g.checked_mul(v)?.checked_mul(&inv)
}

/// iota(g) g, split into its scalar part and the size of everything else.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorNorm<S> {
    pub value: S,
    /// Max |coefficient| off the identity blade; zero iff the product is scalar.
    pub nonscalar: f64,
}

impl<S> SpinorNorm<S> {
    pub fn is_scalar(&self) -> bool {
        self.nonscalar == 0.0
    }
}

pub fn spinor_norm<S: Scalar>(g: &CliffordElement<S>) -> Result<SpinorNorm<S>> {
    if !g.is_even() {
        return Err(Error::Usage("spinor norm needs an even element".into()));
    }
    let p = g.reversal().checked_mul(g)?;
    let nonscalar = p
        .terms()
        .filter(|(b, _)| *b != Blade::ONE)
        .map(|(_, c)| c.to_f64().abs())
        .fold(0.0, f64::max);
    Ok(SpinorNorm {
        value: p.scalar_part(),
        nonscalar,
    })
}

/// Matrix of M_v : y -> v y e_pivot on the even blade basis.
pub fn embed_v<S: Scalar>(v: &CliffordElement<S>, pivot: usize) -> Result<Matrix<S>> {
    if v.terms().any(|(b, _)| b.grade() != 1) {
        return Err(Error::Usage("embed_V needs a vector (grade-1 element)".into()));
    }
    let alg = v.algebra();
    let e = CliffordElement::generator(alg, pivot);
    let basis = alg.even_basis();
    let cols: Vec<Vec<S>> = basis
        .iter()
        .map(|&b| {
            let y = CliffordElement::blade(alg, b);
            (&(v * &y) * &e).even_coords()
        })
        .collect();
    let n = basis.len();
    Ok(Matrix::from_fn(n, n, |i, j| cols[j][i].clone()))
}
