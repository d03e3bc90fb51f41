//! Rational quadratic forms: Gram matrices, congruence diagonalization,
//! signature and squarefree normalization.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{format_rational, parse_rational, rational_to_f64, Rational, SquareClass};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A nondegenerate symmetric bilinear form given by its Gram matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct GramForm {
    entries: Matrix<Rational>,
}

impl GramForm {
    pub fn new(entries: Matrix<Rational>) -> Result<Self> {
        if !entries.is_square() || entries.rows() == 0 {
            return Err(Error::InvalidForm("Gram matrix must be square and nonempty".into()));
        }
        if !entries.is_symmetric() {
            return Err(Error::InvalidForm("Gram matrix is not symmetric".into()));
        }
        if entries.rank() < entries.rows() {
            return Err(Error::InvalidForm("degenerate form (determinant 0)".into()));
        }
        Ok(GramForm { entries })
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidForm("Gram matrix must be square".into()));
        }
        Self::new(Matrix::from_rows(rows))
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &Matrix<Rational> {
        &self.entries
    }

    pub fn signature(&self) -> (usize, usize) {
        self.diagonalize().signature()
    }

    /// Symmetric row/column elimination over Q. The returned form carries
    /// the change of basis B with B^T G B = diag(d).
    pub fn diagonalize(&self) -> DiagonalForm {
        let n = self.dim();
        let mut m = self.entries.clone();
        let mut b = Matrix::<Rational>::identity(n);

        for k in 0..n {
            if m[(k, k)].is_zero() {
                let j = (k + 1..n)
                    .find(|&j| !m[(k, j)].is_zero())
                    .expect("nondegenerate form has a coupling for every zero pivot");
                let two = Rational::from_integer(2.into());
                let added = two * m[(k, j)].clone() + m[(j, j)].clone();
                if added.is_zero() {
                    // m[j][j] = -2 m[k][j] is nonzero here
                    swap_basis(&mut m, &mut b, k, j);
                } else {
                    add_basis(&mut m, &mut b, k, j);
                }
            }
            let pivot = m[(k, k)].clone();
            for i in k + 1..n {
                if m[(i, k)].is_zero() {
                    continue;
                }
                let f = m[(i, k)].clone() / pivot.clone();
                // column i -= f column k, row i -= f row k
                for r in 0..n {
                    let v = m[(r, k)].clone();
                    m[(r, i)] = m[(r, i)].clone() - f.clone() * v;
                }
                for c in 0..n {
                    let v = m[(k, c)].clone();
                    m[(i, c)] = m[(i, c)].clone() - f.clone() * v;
                }
                for r in 0..n {
                    let v = b[(r, k)].clone();
                    b[(r, i)] = b[(r, i)].clone() - f.clone() * v;
                }
            }
        }

        let d: Vec<Rational> = (0..n).map(|i| m[(i, i)].clone()).collect();
        let order = canonical_order(&d);
        let d_sorted = order.iter().map(|&i| d[i].clone()).collect();
        let b_sorted = Matrix::from_fn(n, n, |r, c| b[(r, order[c])].clone());
        DiagonalForm {
            d: d_sorted,
            change_of_basis: Some(b_sorted),
        }
    }
}

// basis vector k <- k + j
fn add_basis(m: &mut Matrix<Rational>, b: &mut Matrix<Rational>, k: usize, j: usize) {
    let n = m.rows();
    for r in 0..n {
        let v = m[(r, j)].clone();
        m[(r, k)] = m[(r, k)].clone() + v;
    }
    for c in 0..n {
        let v = m[(j, c)].clone();
        m[(k, c)] = m[(k, c)].clone() + v;
    }
    for r in 0..n {
        let v = b[(r, j)].clone();
        b[(r, k)] = b[(r, k)].clone() + v;
    }
}

fn swap_basis(m: &mut Matrix<Rational>, b: &mut Matrix<Rational>, k: usize, j: usize) {
    let n = m.rows();
    for r in 0..n {
        let (x, y) = (m[(r, k)].clone(), m[(r, j)].clone());
        m[(r, k)] = y;
        m[(r, j)] = x;
    }
    for c in 0..n {
        let (x, y) = (m[(k, c)].clone(), m[(j, c)].clone());
        m[(k, c)] = y;
        m[(j, c)] = x;
    }
    for r in 0..n {
        let (x, y) = (b[(r, k)].clone(), b[(r, j)].clone());
        b[(r, k)] = y;
        b[(r, j)] = x;
    }
}

/// Negatives first; ties by magnitude, then original index.
fn canonical_order(d: &[Rational]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..d.len()).collect();
    idx.sort_by(|&a, &b| {
        let (da, db) = (&d[a], &d[b]);
        match (da.is_negative(), db.is_negative()) {
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => da.abs().cmp(&db.abs()).then(a.cmp(&b)),
        }
    });
    idx
}

/// A nondegenerate diagonal form d_1 X_1^2 + ... + d_n X_n^2.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalForm {
    d: Vec<Rational>,
    change_of_basis: Option<Matrix<Rational>>,
}

impl DiagonalForm {
    pub fn new(d: Vec<Rational>) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::InvalidForm("form must have dimension >= 1".into()));
        }
        if d.iter().any(Zero::is_zero) {
            return Err(Error::InvalidForm("degenerate form (zero coefficient)".into()));
        }
        Ok(DiagonalForm {
            d,
            change_of_basis: None,
        })
    }

    pub fn from_integers(d: &[i64]) -> Result<Self> {
        Self::new(d.iter().map(|&x| Rational::from_integer(x.into())).collect())
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.d
    }

    pub fn coefficients_f64(&self) -> Vec<f64> {
        self.d.iter().map(rational_to_f64).collect()
    }

    pub fn change_of_basis(&self) -> Option<&Matrix<Rational>> {
        self.change_of_basis.as_ref()
    }

    /// (negative count, positive count).
    pub fn signature(&self) -> (usize, usize) {
        let neg = self.d.iter().filter(|x| x.is_negative()).count();
        (neg, self.d.len() - neg)
    }

    /// True for signature (2-, (n-2)+) with d_1, d_2 < 0 leading.
    pub fn is_hodge_type(&self) -> bool {
        self.signature().0 == 2 && self.d[0].is_negative() && self.d[1].is_negative()
    }

    pub fn require_hodge_type(&self) -> Result<()> {
        if self.is_hodge_type() {
            Ok(())
        } else {
            let (neg, pos) = self.signature();
            Err(Error::InvalidForm(format!(
                "expected signature (2-,(n-2)+) with d1,d2 < 0 first; got ({neg}-,{pos}+)"
            )))
        }
    }

    /// Replaces each d_i by the squarefree integer in its square class,
    /// rescaling the recorded change of basis to match.
    pub fn squarefree_scale(&self) -> Result<DiagonalForm> {
        let mut scales = Vec::with_capacity(self.d.len());
        let mut d = Vec::with_capacity(self.d.len());
        for x in &self.d {
            let s = Rational::from_integer(SquareClass::from_rational(x)?.to_bigint());
            // x * c^2 = s with c = sqrt(s / x), rational because s/x is a square
            let c = crate::arith::rational_sqrt(&(s.clone() / x.clone()))
                .ok_or_else(|| Error::Internal("square class ratio is not a square".into()))?;
            scales.push(c);
            d.push(s);
        }
        let change_of_basis = self.change_of_basis.as_ref().map(|b| {
            Matrix::from_fn(b.rows(), b.cols(), |r, c| b[(r, c)].clone() * scales[c].clone())
        });
        Ok(DiagonalForm { d, change_of_basis })
    }

    pub fn square_classes(&self) -> Result<Vec<SquareClass>> {
        self.d.iter().map(SquareClass::from_rational).collect()
    }

    /// Q(v, w) for real coordinate vectors in the diagonal basis.
    pub fn bilinear_f64(&self, v: &[f64], w: &[f64]) -> f64 {
        self.coefficients_f64()
            .iter()
            .zip(v.iter().zip(w))
            .map(|(d, (a, b))| d * a * b)
            .sum()
    }

    pub fn gram(&self) -> Matrix<Rational> {
        let n = self.dim();
        Matrix::from_fn(n, n, |i, j| {
            if i == j {
                self.d[i].clone()
            } else {
                Rational::zero()
            }
        })
    }

    /// Checks B^T G B = diag(d) exactly against the originating Gram matrix.
    pub fn verify_congruence(&self, origin: &GramForm) -> bool {
        match &self.change_of_basis {
            None => false,
            Some(b) => b.transpose().mul(origin.entries()).mul(b) == self.gram(),
        }
    }
}

/// Either a GramForm or a DiagonalForm.
#[derive(Clone, Debug)]
pub enum Form {
    Gram(GramForm),
    Diagonal(DiagonalForm),
}

impl Form {
    pub fn signature(&self) -> (usize, usize) {
        match self {
            Form::Gram(g) => g.signature(),
            Form::Diagonal(d) => d.signature(),
        }
    }

    /// Diagonal form with negatives first. Diagonal input is reordered the
    /// same way, with a permutation recorded as its change of basis.
    pub fn to_diagonal(&self) -> DiagonalForm {
        match self {
            Form::Gram(g) => g.diagonalize(),
            Form::Diagonal(d) => {
                let order = canonical_order(&d.d);
                if order.iter().enumerate().all(|(i, &j)| i == j) {
                    return d.clone();
                }
                let n = d.dim();
                let perm = Matrix::from_fn(n, n, |r, c| {
                    if r == order[c] {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                });
                DiagonalForm {
                    d: order.iter().map(|&i| d.d[i].clone()).collect(),
                    change_of_basis: Some(perm),
                }
            }
        }
    }
}

/// JSON form input: `{"diag": ["p/q", ...]}` or `{"gram": [["p/q", ...], ...]}`.
/// Numbers are accepted in place of strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FormInput {
    Diag { diag: Vec<RationalInput> },
    Gram { gram: Vec<Vec<RationalInput>> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalInput {
    Text(String),
    Integer(i64),
    Float(f64),
}

impl RationalInput {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            RationalInput::Text(s) => parse_rational(s),
            RationalInput::Integer(i) => Ok(Rational::from_integer((*i).into())),
            RationalInput::Float(f) => parse_rational(&format!("{f}")),
        }
    }
}

/// Distinguishes malformed input (parse errors) from well-formed but
/// degenerate forms.
impl FormInput {
    pub fn parse_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("form JSON: {e}")))
    }

    pub fn to_form(&self) -> Result<Form> {
        match self {
            FormInput::Diag { diag } => {
                let d = diag.iter().map(RationalInput::to_rational).collect::<Result<_>>()?;
                Ok(Form::Diagonal(DiagonalForm::new(d)?))
            }
            FormInput::Gram { gram } => {
                let rows = gram
                    .iter()
                    .map(|row| row.iter().map(RationalInput::to_rational).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                Ok(Form::Gram(GramForm::from_rows(rows)?))
            }
        }
    }
}

pub fn diag_to_json(form: &DiagonalForm) -> FormInput {
    FormInput::Diag {
        diag: form
            .coefficients()
            .iter()
            .map(|x| RationalInput::Text(format_rational(x)))
            .collect(),
    }
}
