//! The Kuga-Satake abelian variety: the torus C^+(Q)_R / Gamma with complex
//! structure h_s(i), Gamma the blade lattice, polarized by E.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};
use serde_json::json;

use crate::arith::Rational;
use crate::brauer::{even_clifford_structure, isogeny_decomposition, AlgebraStructure, IsogenyDecomposition};
use crate::clifford::{conjugation_rho, embed_v, CliffordElement};
use crate::error::{Error, Result};
use crate::hodge::{polarization_e, HodgeStructure2, Polarization, WeilElement};
use crate::linalg::Matrix;
use crate::report::Check;

pub const RANK_TOLERANCE: f64 = 1e-8;
/// C^+(Q) has dimension 2^{n-1}; reports build dense matrices of that size.
pub const MAX_REPORT_DIM: usize = 10;

#[derive(Clone, Copy, Debug)]
pub struct ReportOptions {
    pub tolerance: f64,
    pub riemann_tolerance: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            tolerance: 1e-9,
            riemann_tolerance: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub struct KugaSatakeReport {
    pub n: usize,
    pub ks_dim: u64,
    pub structure: AlgebraStructure,
    pub factors: IsogenyDecomposition,
    pub polarization_sign: i32,
    /// g x 2g; column b holds the complex coordinates of the blade e^b.
    pub period_matrix: Vec<Vec<Complex64>>,
    /// E(e^a, e^b) times `denominator`.
    pub polarization_matrix: Vec<Vec<BigInt>>,
    pub denominator: BigInt,
    pub period_rank: usize,
    pub checks: Vec<Check>,
    pub assumes_generic: bool,
}

impl KugaSatakeReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let periods: Vec<Vec<[f64; 2]>> = self
            .period_matrix
            .iter()
            .map(|row| row.iter().map(|z| [z.re + 0.0, z.im + 0.0]).collect())
            .collect();
        let pol: Vec<Vec<String>> = self
            .polarization_matrix
            .iter()
            .map(|row| row.iter().map(BigInt::to_string).collect())
            .collect();
        json!({
            "n": self.n,
            "ks_dim": self.ks_dim,
            "structure": self.structure.to_json(),
            "factors": self.factors,
            "polarization_sign": self.polarization_sign,
            "period_matrix": periods,
            "period_rank": self.period_rank,
            "polarization_matrix": pol,
            "polarization_denominator": self.denominator.to_string(),
            "checks": self.checks,
            "assumes_generic": self.assumes_generic,
        })
    }
}

/// E on the blade lattice times the least common denominator of its entries.
pub fn integral_polarization(e_gram: &Matrix<Rational>) -> (Vec<Vec<BigInt>>, BigInt) {
    let lcd = e_gram
        .to_rows()
        .iter()
        .flatten()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let rows = e_gram
        .to_rows()
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|x| (x * Rational::from_integer(lcd.clone())).to_integer())
                .collect()
        })
        .collect();
    (rows, lcd)
}

/// Real basis [u_1..u_g, I u_1..I u_g] of C^+(Q)_R, the u_k chosen greedily
/// among the blades in increasing order.
fn complex_basis(complex_structure: &Matrix<f64>) -> Result<Matrix<f64>> {
    let dim = complex_structure.rows();
    let g = dim / 2;
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    let mut lead: Vec<usize> = Vec::new();
    let add = |ortho: &mut Vec<Vec<f64>>, v: &[f64]| -> bool {
        let norm0 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut w = v.to_vec();
        for _ in 0..2 {
            for q in ortho.iter() {
                let c: f64 = w.iter().zip(q).map(|(a, b)| a * b).sum();
                w.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= RANK_TOLERANCE * norm0.max(f64::MIN_POSITIVE) {
            return false;
        }
        ortho.push(w.iter().map(|x| x / norm).collect());
        true
    };
    for b in 0..dim {
        if lead.len() == g {
            break;
        }
        let mut e = vec![0.0; dim];
        e[b] = 1.0;
        let ie: Vec<f64> = (0..dim).map(|r| complex_structure[(r, b)]).collect();
        let mut trial = ortho.clone();
        if add(&mut trial, &e) && add(&mut trial, &ie) {
            ortho = trial;
            lead.push(b);
        }
    }
    if lead.len() != g {
        return Err(Error::Internal("complex structure has no complex basis among the blades".into()));
    }
    Ok(Matrix::from_fn(dim, dim, |r, c| {
        if c < g {
            if r == lead[c] {
                1.0
            } else {
                0.0
            }
        } else {
            complex_structure[(r, lead[c - g])]
        }
    }))
}

/// Complex coordinates of the blades in the basis u_1..u_g of (C^+(Q)_R, I).
pub fn period_matrix(complex_structure: &Matrix<f64>) -> Result<Vec<Vec<Complex64>>> {
    let basis = complex_basis(complex_structure)?;
    let inv = basis
        .inverse()
        .ok_or_else(|| Error::Internal("complex basis is singular".into()))?;
    let dim = basis.rows();
    let g = dim / 2;
    Ok((0..g)
        .map(|k| (0..dim).map(|b| Complex64::new(inv[(k, b)], inv[(g + k, b)])).collect())
        .collect())
}

pub fn complex_rank(p: &[Vec<Complex64>], tol: f64) -> usize {
    let rows = p.len();
    let cols = p.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return 0;
    }
    let m = DMatrix::from_fn(rows, cols, |i, j| p[i][j]);
    let sv = m.svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > tol * top.max(f64::MIN_POSITIVE)).count()
}

/// Riemann relations for a period matrix P (columns = lattice vectors) and
/// the alternating lattice form N: P N^{-1} P^T = 0 and -i P N^{-1} P^* > 0,
/// the sign matching E(x, I x) > 0.
/// The isotropy residual is relative to max|P|^2 max|N^{-1}| times the width.
pub fn riemann_relations(p: &[Vec<Complex64>], n_inv: &Matrix<f64>) -> (f64, bool) {
    let g = p.len();
    let w = n_inv.rows();
    let prod = |conj: bool| -> Vec<Vec<Complex64>> {
        let mut out = vec![vec![Complex64::new(0.0, 0.0); g]; g];
        for i in 0..g {
            let left: Vec<Complex64> = (0..w)
                .map(|l| (0..w).map(|k| p[i][k] * n_inv[(k, l)]).sum())
                .collect();
            for j in 0..g {
                out[i][j] = (0..w)
                    .map(|l| left[l] * if conj { p[j][l].conj() } else { p[j][l] })
                    .sum();
            }
        }
        out
    };
    let pmax = p.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = (pmax * pmax * n_inv.max_abs() * w as f64).max(f64::MIN_POSITIVE);
    let iso = prod(false)
        .iter()
        .flatten()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        / scale;
    let herm: Vec<Vec<Complex64>> = prod(true)
        .into_iter()
        .map(|row| row.into_iter().map(|z| z * Complex64::new(0.0, -1.0)).collect())
        .collect();
    // H = A + iB positive iff [[A, -B], [B, A]] is
    let real = Matrix::from_fn(2 * g, 2 * g, |r, c| {
        let (i, j) = (r % g, c % g);
        let z = herm[i][j];
        match (r < g, c < g) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let sym = Matrix::from_fn(2 * g, 2 * g, |r, c| 0.5 * (real[(r, c)] + real[(c, r)]));
    (iso, sym.is_positive_definite())
}

pub fn ks_report(hs: &HodgeStructure2, opts: &ReportOptions) -> Result<KugaSatakeReport> {
    let form = hs.form();
    let n = form.dim();
    if n < 3 {
        return Err(Error::InvalidForm(format!(
            "the Kuga-Satake construction needs n >= 3, got n = {n}"
        )));
    }
    if n > MAX_REPORT_DIM {
        return Err(Error::TooLarge(format!(
            "reports are limited to n <= {MAX_REPORT_DIM} (C^+(Q) of dimension 2^{})",
            n - 1
        )));
    }
    let structure = even_clifford_structure(form)?;
    let factors = isogeny_decomposition(&structure)?;
    let weil = hs.weil_element()?;
    let pol = polarization_e(hs, &weil)?;
    let ks_dim = 1u64 << (n - 2);
    let even_dim = weil.algebra().even_dim() as u64;

    let mut checks = vec![
        Check::within("weil_square", weil.square_deviation(), opts.tolerance),
        Check::holds("ks_dim_half_even_dim", 2 * ks_dim == even_dim),
        Check::holds(
            "factor_dimension_sum",
            factors.factors.iter().map(|f| f.multiplicity * f.dimension).sum::<u64>() == ks_dim,
        ),
        Check::holds("structure_dimension", structure.rational_dimension() == even_dim),
    ];
    checks.extend(polarization_checks(&weil, &pol, opts.tolerance));

    let (polarization_matrix, denominator) = integral_polarization(&pol.e_gram);
    let alternating = (0..polarization_matrix.len()).all(|i| {
        (0..polarization_matrix.len()).all(|j| polarization_matrix[i][j] == -&polarization_matrix[j][i])
    });
    checks.push(Check::holds("polarization_matrix_alternating", alternating));

    let complex_structure = weil.complex_structure();
    let periods = period_matrix(&complex_structure)?;
    let period_rank = complex_rank(&periods, RANK_TOLERANCE);
    checks.push(Check::holds("period_rank", period_rank as u64 == ks_dim));
    let n_float = Matrix::from_rows(
        polarization_matrix
            .iter()
            .map(|row| row.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect())
            .collect(),
    );
    let n_inv = n_float
        .inverse()
        .ok_or_else(|| Error::Internal("polarization matrix is singular".into()))?;
    let (isotropy, positive) = riemann_relations(&periods, &n_inv);
    checks.push(Check::within("period_isotropy", isotropy, opts.riemann_tolerance));
    checks.push(Check::holds("period_positivity", positive));

    Ok(KugaSatakeReport {
        n,
        ks_dim,
        structure,
        factors,
        polarization_sign: pol.sign,
        period_matrix: periods,
        polarization_matrix,
        denominator,
        period_rank,
        checks,
        assumes_generic: true,
    })
}

/// E(I x, I y) = E(x, y) and E(x, I y) symmetric positive definite, as
/// matrix identities on the blade basis.
fn polarization_checks(weil: &WeilElement, pol: &Polarization, tol: f64) -> Vec<Check> {
    let i_mat = weil.complex_structure();
    let e = pol.e_gram.map(crate::arith::rational_to_f64);
    let rotated = i_mat.transpose().mul(&e).mul(&i_mat);
    let via_matrix = e.mul(&i_mat);
    vec![
        Check::within("e_complex_invariance", rotated.relative_deviation(&e), tol),
        Check::within("weil_form_consistency", via_matrix.relative_deviation(&pol.weil_gram), tol),
        Check::within("weil_form_symmetric", pol.weil_gram.asymmetry(), tol),
        Check::holds("weil_form_positive_definite", pol.weil_gram.is_positive_definite()),
    ]
}

/// max over (v, z) of |L_g M_v L_{g^-1} - M_{rho(g) v}| with g = h_s(z) and
/// rho(g) = h(z) / |z|^2, relative to max(1, |M_v|).
pub fn verify_embedding(
    hs: &HodgeStructure2,
    weil: &WeilElement,
    vectors: &[Vec<f64>],
    zs: &[Complex64],
) -> Result<f64> {
    let alg = weil.algebra();
    let n = hs.form().dim();
    let mut worst: f64 = 0.0;
    for z in zs {
        let g = weil.hs_element(*z);
        let g_inv = g.inverse()?;
        let lg = g.left_mul_matrix()?;
        let lg_inv = g_inv.left_mul_matrix()?;
        let h = hs.hodge_action(*z)?;
        let norm = z.norm_sqr();
        for v in vectors {
            if v.len() != n {
                return Err(Error::Usage(format!("embedding vectors must have length {n}")));
            }
            let m_v = embed_v(&CliffordElement::vector(alg, v), 1)?;
            let moved: Vec<f64> = (0..n).map(|r| (0..n).map(|c| h[(r, c)] * v[c]).sum::<f64>() / norm).collect();
            let m_moved = embed_v(&CliffordElement::vector(alg, &moved), 1)?;
            let lhs = lg.mul(&m_v).mul(&lg_inv);
            worst = worst.max(lhs.relative_deviation(&m_moved));
        }
    }
    Ok(worst)
}

/// rho(h_s(z)) v compared with h(z) v / |z|^2 directly in the algebra.
pub fn rho_residual(hs: &HodgeStructure2, weil: &WeilElement, v: &[f64], z: Complex64) -> Result<f64> {
    let alg = weil.algebra();
    let g = weil.hs_element(z);
    let lhs = conjugation_rho(&g, &CliffordElement::vector(alg, v))?;
    let h = hs.hodge_action(z)?;
    let n = v.len();
    let moved: Vec<f64> = (0..n)
        .map(|r| (0..n).map(|c| h[(r, c)] * v[c]).sum::<f64>() / z.norm_sqr())
        .collect();
    Ok(lhs.relative_distance(&CliffordElement::vector(alg, &moved)))
}
