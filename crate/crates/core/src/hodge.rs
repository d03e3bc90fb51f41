//! Weight two Hodge structures with h^{2,0} = 1 as oriented negative planes,
//! and the weight one structure (C^+(Q), h_s, E) built from them.
//!
//! Conventions: the plane carries a Q-orthonormal oriented basis (f1, f2)
//! with Q(f1) = Q(f2) = -1, V^{2,0} = C (f1 + i f2), and h(z) acts on
//! f1 + i f2 by z^2. The Weil element is J = f1 f2 and h_s(a + bi) is left
//! multiplication by a - bJ.

use std::sync::Arc;

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{rational_sqrt, Rational};
use crate::clifford::{blade_product, spinor_norm, Blade, CliffordAlgebra, CliffordElement};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::qform::DiagonalForm;
use crate::report::Check;
use crate::scalar::Scalar;

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct HodgeStructure2 {
    form: DiagonalForm,
    f1: Vec<f64>,
    f2: Vec<f64>,
}

impl HodgeStructure2 {
    /// Gram-Schmidt inside span(v, w) keeping the orientation (v, w), then
    /// rescaling to Q(f1) = Q(f2) = -1.
    pub fn from_plane(form: &DiagonalForm, v: &[f64], w: &[f64]) -> Result<Self> {
        form.require_hodge_type()?;
        let n = form.dim();
        if v.len() != n || w.len() != n {
            return Err(Error::Usage(format!("plane vectors must have length {n}")));
        }
        if v.iter().chain(w).any(|x| !x.is_finite()) {
            return Err(Error::Usage("plane vectors must be finite".into()));
        }
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let (vv, ww, vw) = (dot(v, v), dot(w, w), dot(v, w));
        if vv == 0.0 || ww == 0.0 || vv * ww - vw * vw <= 1e-24 * vv * ww {
            return Err(Error::DependentPlane);
        }
        let qvv = form.bilinear_f64(v, v);
        let qww = form.bilinear_f64(w, w);
        let qvw = form.bilinear_f64(v, w);
        let det = qvv * qww - qvw * qvw;
        if !(qvv < 0.0 && det > 0.0) {
            return Err(Error::PlaneNotNegative(format!(
                "Gram matrix [[{qvv}, {qvw}], [{qvw}, {qww}]] is not negative definite"
            )));
        }
        let f1: Vec<f64> = v.iter().map(|x| x / (-qvv).sqrt()).collect();
        // u = w + Q(w, f1) f1 is Q-orthogonal to f1 since Q(f1) = -1
        let c = form.bilinear_f64(w, &f1);
        let u: Vec<f64> = w.iter().zip(&f1).map(|(wi, fi)| wi + c * fi).collect();
        let quu = form.bilinear_f64(&u, &u);
        let f2: Vec<f64> = u.iter().map(|x| x / (-quu).sqrt()).collect();
        let hs = HodgeStructure2 {
            form: form.clone(),
            f1,
            f2,
        };
        hs.check_normalization(1e-9)?;
        Ok(hs)
    }

    /// The plane spanned by (1, 0, a') and (0, 1, b'), read in the
    /// orthonormalized real basis e_i / sqrt|d_i|.
    pub fn from_parameters(form: &DiagonalForm, a: &[f64], b: &[f64]) -> Result<Self> {
        form.require_hodge_type()?;
        let n = form.dim();
        if a.len() != n - 2 || b.len() != n - 2 {
            return Err(Error::Usage(format!("parameters a', b' must have length {}", n - 2)));
        }
        let scale: Vec<f64> = form.coefficients_f64().iter().map(|d| d.abs().sqrt()).collect();
        let build = |lead: [f64; 2], tail: &[f64]| -> Vec<f64> {
            lead.iter()
                .chain(tail)
                .zip(&scale)
                .map(|(x, s)| x / s)
                .collect()
        };
        let v = build([1.0, 0.0], a);
        let w = build([0.0, 1.0], b);
        Self::from_plane(form, &v, &w)
    }

    /// The plane spanned by e1 and e2.
    pub fn aligned(form: &DiagonalForm) -> Result<Self> {
        let n = form.dim();
        let mut v = vec![0.0; n];
        let mut w = vec![0.0; n];
        v[0] = 1.0;
        w[1] = 1.0;
        Self::from_plane(form, &v, &w)
    }

    /// A random admissible plane: parameters uniform in (-spread, spread),
    /// resampled until the plane is negative definite.
    pub fn random<R: Rng>(form: &DiagonalForm, rng: &mut R, spread: f64) -> Result<Self> {
        let k = form.dim().saturating_sub(2);
        for _ in 0..1000 {
            let a: Vec<f64> = (0..k).map(|_| rng.gen_range(-spread..spread)).collect();
            let b: Vec<f64> = (0..k).map(|_| rng.gen_range(-spread..spread)).collect();
            match Self::from_parameters(form, &a, &b) {
                Ok(hs) => return Ok(hs),
                Err(Error::PlaneNotNegative(_)) | Err(Error::DependentPlane) => continue,
                Err(e) => return Err(e),
            }
        }
        Err(Error::Internal("no admissible random plane found".into()))
    }

    pub fn random_seeded(form: &DiagonalForm, seed: u64) -> Result<Self> {
        Self::random(form, &mut ChaCha8Rng::seed_from_u64(seed), 0.3)
    }

    fn check_normalization(&self, tol: f64) -> Result<()> {
        let q11 = self.form.bilinear_f64(&self.f1, &self.f1);
        let q22 = self.form.bilinear_f64(&self.f2, &self.f2);
        let q12 = self.form.bilinear_f64(&self.f1, &self.f2);
        if (q11 + 1.0).abs() > tol || (q22 + 1.0).abs() > tol || q12.abs() > tol {
            return Err(Error::Internal(format!(
                "plane normalization off: Q(f1) = {q11}, Q(f2) = {q22}, Q(f1,f2) = {q12}"
            )));
        }
        Ok(())
    }

    pub fn form(&self) -> &DiagonalForm {
        &self.form
    }

    pub fn f1(&self) -> &[f64] {
        &self.f1
    }

    pub fn f2(&self) -> &[f64] {
        &self.f2
    }

    /// The same plane with the opposite orientation (f1, -f2).
    pub fn reversed(&self) -> Self {
        HodgeStructure2 {
            form: self.form.clone(),
            f1: self.f1.clone(),
            f2: self.f2.iter().map(|x| -x).collect(),
        }
    }

    /// h(z) as an n x n matrix on the diagonal basis: |z|^2 on the Q-orthogonal
    /// complement of the plane and multiplication by z^2 on f1 + i f2.
    pub fn hodge_action(&self, z: Complex64) -> Result<Matrix<f64>> {
        if z.is_zero() {
            return Err(Error::Usage("h(z) needs z != 0".into()));
        }
        let n = self.form.dim();
        let z2 = z * z;
        let norm = z.norm_sqr();
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            let x = -self.form.bilinear_f64(&v, &self.f1);
            let y = -self.form.bilinear_f64(&v, &self.f2);
            for r in 0..n {
                let plane = x * self.f1[r] + y * self.f2[r];
                let rotated = x * (z2.re * self.f1[r] - z2.im * self.f2[r])
                    + y * (z2.im * self.f1[r] + z2.re * self.f2[r]);
                m[(r, i)] = norm * (v[r] - plane) + rotated;
            }
        }
        Ok(m)
    }

    pub fn real_algebra(&self) -> Arc<CliffordAlgebra<f64>> {
        CliffordAlgebra::real(&self.form)
    }

    pub fn weil_element(&self) -> Result<WeilElement> {
        self.weil_element_in(&self.real_algebra())
    }

    pub fn weil_element_in(&self, alg: &Arc<CliffordAlgebra<f64>>) -> Result<WeilElement> {
        let f1 = CliffordElement::vector(alg, &self.f1);
        let f2 = CliffordElement::vector(alg, &self.f2);
        let j = &f1 * &f2;
        let sq = &j * &j;
        let dev = sq.relative_distance(&CliffordElement::scalar(alg, -1.0));
        if dev > 1e-9 {
            return Err(Error::Internal(format!("J^2 differs from -1 by {dev}")));
        }
        Ok(WeilElement { j })
    }
}

/// J = f1 f2 in C^+(Q)_R.
#[derive(Clone, Debug)]
pub struct WeilElement {
    j: CliffordElement<f64>,
}

impl WeilElement {
    pub fn element(&self) -> &CliffordElement<f64> {
        &self.j
    }

    pub fn algebra(&self) -> &Arc<CliffordAlgebra<f64>> {
        self.j.algebra()
    }

    /// |J^2 + 1| relative to max(1, |J|^2).
    pub fn square_deviation(&self) -> f64 {
        let sq = &self.j * &self.j;
        sq.relative_distance(&CliffordElement::scalar(self.algebra(), -1.0))
    }

    /// h_s(a + bi) = a - bJ as an element of C^+(Q)_R.
    pub fn hs_element(&self, z: Complex64) -> CliffordElement<f64> {
        let a = CliffordElement::scalar(self.algebra(), z.re);
        &a - &self.j.scale(&z.im)
    }

    /// h_s(z) x = (a - bJ) x.
    pub fn hs_action(&self, z: Complex64, x: &CliffordElement<f64>) -> Result<CliffordElement<f64>> {
        if !x.is_even() {
            return Err(Error::Usage("h_s acts on C^+(Q) only".into()));
        }
        self.hs_element(z).checked_mul(x)
    }

    /// Matrix of x -> h_s(i) x = -J x on the even blade basis.
    pub fn complex_structure(&self) -> Matrix<f64> {
        self.hs_element(Complex64::new(0.0, 1.0))
            .left_mul_matrix()
            .expect("J is even")
    }
}

/// J = c e1 e2 with c = (d1 d2)^{-1/2}, exactly, when d1 d2 is a rational
/// square (the aligned plane only).
pub fn aligned_weil_exact(form: &DiagonalForm) -> Option<CliffordElement<Rational>> {
    let d = form.coefficients();
    if form.dim() < 2 {
        return None;
    }
    let root = rational_sqrt(&(d[0].clone() * d[1].clone()))?;
    let alg = CliffordAlgebra::exact(form);
    Some(CliffordElement::from_terms(&alg, [(Blade(0b11), Rational::from_integer(1.into()) / root)]))
}

/// Square of a blade: e^b e^b = sign * prod d_i.
fn blade_square<S: Scalar>(b: Blade, d: &[S]) -> S {
    let (sign, scale, _) = blade_product(b, b, d);
    if sign < 0 {
        -scale
    } else {
        scale
    }
}

/// Gram matrix [E(e^a, m e^b)] with E(v, w) = Tr(alpha iota(v) w), for an
/// even multiplier m. Only the b-coefficient of alpha iota(e^a) m pairs with
/// e^b, so each row costs one sparse product.
pub fn e_gram_with<S: Scalar>(
    alpha: &CliffordElement<S>,
    multiplier: &CliffordElement<S>,
) -> Result<Matrix<S>> {
    let alg = alpha.algebra();
    let basis = alg.even_basis();
    let d = alg.coefficients();
    let dim = S::from_usize(alg.even_dim()).expect("dimension fits");
    let squares: Vec<S> = basis.iter().map(|&b| blade_square(b, d)).collect();
    let mut rows = Vec::with_capacity(basis.len());
    for &a in &basis {
        let left = alpha
            .checked_mul(&CliffordElement::blade(alg, a).reversal())?
            .checked_mul(multiplier)?;
        rows.push(
            basis
                .iter()
                .zip(&squares)
                .map(|(&b, sq)| dim.clone() * left.coeff(b) * sq.clone())
                .collect(),
        );
    }
    Ok(Matrix::from_rows(rows))
}

/// E(x, y) = Tr(alpha iota(x) y) on elements.
pub fn e_value(alpha: &CliffordElement<f64>, x: &CliffordElement<f64>, y: &CliffordElement<f64>) -> Result<f64> {
    crate::clifford::bilinear_e(alpha, x, y)
}

/// The polarization E(v, w) = Tr(alpha iota(v) w), alpha = sign * e1 e2.
#[derive(Clone, Debug)]
pub struct Polarization {
    pub sign: i32,
    pub alpha: CliffordElement<Rational>,
    /// E(e^a, e^b), exact and alternating.
    pub e_gram: Matrix<Rational>,
    /// E(e^a, h_s(i) e^b), symmetric positive definite.
    pub weil_gram: Matrix<f64>,
}

impl Polarization {
    pub fn alpha_f64(&self, alg: &Arc<CliffordAlgebra<f64>>) -> CliffordElement<f64> {
        self.alpha.to_f64(alg)
    }
}

/// Picks the sign of alpha = +-e1 e2 making E(x, h_s(i) y) positive definite.
pub fn polarization_e(hs: &HodgeStructure2, weil: &WeilElement) -> Result<Polarization> {
    let exact = CliffordAlgebra::exact(hs.form());
    let real = weil.algebra();
    let hs_i = weil.hs_element(Complex64::new(0.0, 1.0));
    let e12 = CliffordElement::<Rational>::blade(&exact, Blade(0b11));
    let plus = e_gram_with(&e12.to_f64(real), &hs_i)?;
    let (sign, weil_gram) = if plus.is_positive_definite() {
        (1, plus)
    } else {
        let minus = plus.scale(&-1.0);
        if minus.is_positive_definite() {
            (-1, minus)
        } else {
            return Err(Error::PolarizationFailure);
        }
    };
    let alpha = e12.scale(&Rational::from_integer(sign.into()));
    let e_gram = e_gram_with(&alpha, &CliffordElement::one(&exact))?;
    Ok(Polarization {
        sign,
        alpha,
        e_gram,
        weil_gram,
    })
}

/// Closed form of E(e^a, h_s(i) e^b) on the aligned plane with alpha = e1 e2:
/// zero off the diagonal, 2^{n-1} (c d1 d2) (-1)^{a1+a2} d1^{a1} d2^{a2} d3^{a3}...
pub fn aligned_closed_form(form: &DiagonalForm) -> Matrix<f64> {
    let d = form.coefficients_f64();
    let n = d.len();
    let c = 1.0 / (d[0] * d[1]).sqrt();
    let basis: Vec<Blade> = Blade::even(n).collect();
    let dim = (1u64 << (n - 1)) as f64;
    Matrix::from_fn(basis.len(), basis.len(), |i, j| {
        if i != j {
            return 0.0;
        }
        let a = basis[i];
        let a1 = a.0 & 1;
        let a2 = (a.0 >> 1) & 1;
        let parity = if (a1 + a2) % 2 == 0 { 1.0 } else { -1.0 };
        let prod: f64 = a.indices().map(|k| d[k - 1]).product();
        dim * c * d[0] * d[1] * parity * prod
    })
}

/// Exact version of the closed form, for d1 d2 a rational square.
pub fn aligned_closed_form_exact(form: &DiagonalForm) -> Option<Matrix<Rational>> {
    let d = form.coefficients();
    let root = rational_sqrt(&(d[0].clone() * d[1].clone()))?;
    let n = d.len();
    let c = Rational::from_integer(1.into()) / root;
    let basis: Vec<Blade> = Blade::even(n).collect();
    let dim = Rational::from_integer((1u64 << (n - 1)).into());
    Some(Matrix::from_fn(basis.len(), basis.len(), |i, j| {
        if i != j {
            return Rational::zero();
        }
        let a = basis[i];
        let flips = (a.0 & 1) + ((a.0 >> 1) & 1);
        let prod = a.indices().fold(Rational::from_integer(1.into()), |acc, k| acc * d[k - 1].clone());
        let v = dim.clone() * c.clone() * d[0].clone() * d[1].clone() * prod;
        if flips % 2 == 0 {
            v
        } else {
            -v
        }
    }))
}

/// Exact E(e^a, h_s(i) e^b) on the aligned plane, available when d1 d2 is a
/// rational square; uses alpha = e1 e2.
pub fn aligned_weil_gram_exact(form: &DiagonalForm) -> Option<Matrix<Rational>> {
    let j = aligned_weil_exact(form)?;
    let alg = j.algebra().clone();
    let alpha = CliffordElement::blade(&alg, Blade(0b11));
    e_gram_with(&alpha, &-&j).ok()
}

/// CSpin membership of h_s(z), rho(h_s(z)) against h(z), and the spinor norm.
pub fn verify_cspin(
    hs: &HodgeStructure2,
    weil: &WeilElement,
    samples: &[Complex64],
    tol: f64,
) -> Result<Vec<Check>> {
    let alg = weil.algebra();
    let n = hs.form().dim();
    let mut membership: f64 = 0.0;
    let mut rho_dev: f64 = 0.0;
    let mut norm_dev: f64 = 0.0;
    for &z in samples {
        let g = weil.hs_element(z);
        let g_inv = g.inverse()?;
        let mut rho = Matrix::zeros(n, n);
        for i in 1..=n {
            let e = CliffordElement::generator(alg, i);
            let r = &(&g * &e) * &g_inv;
            let off_grade = r.terms().filter(|(b, _)| b.grade() != 1).map(|(_, c)| c.abs()).fold(0.0, f64::max);
            membership = membership.max(off_grade / r.max_abs().max(1.0));
            for j in 1..=n {
                rho[(j - 1, i - 1)] = r.coeff(Blade::generator(j));
            }
        }
        let h = hs.hodge_action(z)?;
        rho_dev = rho_dev.max(rho.scale(&z.norm_sqr()).relative_deviation(&h));
        let nu = spinor_norm(&g)?;
        let scale = z.norm_sqr().max(1.0);
        norm_dev = norm_dev.max((nu.value - z.norm_sqr()).abs().max(nu.nonscalar) / scale);
    }
    Ok(vec![
        Check::within("cspin_membership", membership, tol),
        Check::within("rho_equals_h", rho_dev, tol),
        Check::within("spinor_norm", norm_dev, tol),
    ])
}

/// Random element of C^+(Q)_R with coefficients uniform in (-1, 1).
pub fn random_even<R: Rng>(alg: &Arc<CliffordAlgebra<f64>>, rng: &mut R) -> CliffordElement<f64> {
    let coords: Vec<f64> = (0..alg.even_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    CliffordElement::from_even_coords(alg, &coords)
}

/// Random z with modulus in [0.5, 2).
pub fn random_z<R: Rng>(rng: &mut R) -> Complex64 {
    let r = rng.gen_range(0.5..2.0);
    let phi = rng.gen_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(r, phi)
}

/// The polarization conditions on (C^+(Q), h_s, E): E alternating (exact),
/// E(x, h_s(i) y) symmetric and positive definite, and
/// E(h_s(z) x, h_s(z) y) = |z|^2 E(x, y) on random samples.
pub fn verify_polarization<R: Rng>(
    weil: &WeilElement,
    pol: &Polarization,
    rng: &mut R,
    samples: usize,
    tol: f64,
    riemann_tol: f64,
) -> Result<Vec<Check>> {
    let alg = weil.algebra();
    let alpha = pol.alpha_f64(alg);
    let alternating = pol.e_gram.transpose() == pol.e_gram.scale(&Rational::from_integer((-1).into()));
    let mut riemann: f64 = 0.0;
    for _ in 0..samples {
        let z = random_z(rng);
        let x = random_even(alg, rng);
        let y = random_even(alg, rng);
        let lhs = e_value(&alpha, &weil.hs_action(z, &x)?, &weil.hs_action(z, &y)?)?;
        let rhs = z.norm_sqr() * e_value(&alpha, &x, &y)?;
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        riemann = riemann.max((lhs - rhs).abs() / scale);
    }
    Ok(vec![
        Check::holds("e_alternating", alternating),
        Check::within("weil_form_symmetric", pol.weil_gram.asymmetry(), tol),
        Check::holds("weil_form_positive_definite", pol.weil_gram.is_positive_definite()),
        Check::within("riemann_relation", riemann, riemann_tol),
    ])
}

/// Everything `hodge-verify` reports for one plane.
#[derive(Clone, Debug, serde::Serialize)]
pub struct HodgeReport {
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub polarization_sign: i32,
    pub samples: usize,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// J^2 = -1, the polarization conditions and the CSpin checks with `samples`
/// random z (half of them on the unit circle) drawn from `seed`.
pub fn verify_hodge(hs: &HodgeStructure2, seed: u64, samples: usize, tol: f64, riemann_tol: f64) -> Result<HodgeReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weil = hs.weil_element()?;
    let mut checks = vec![Check::within("weil_square", weil.square_deviation(), tol)];
    let pol = polarization_e(hs, &weil)?;
    checks.extend(verify_polarization(&weil, &pol, &mut rng, samples, tol, riemann_tol)?);
    let zs: Vec<Complex64> = (0..samples.max(1))
        .map(|k| {
            let z = random_z(&mut rng);
            if k % 2 == 0 {
                z / z.norm()
            } else {
                z
            }
        })
        .collect();
    checks.extend(verify_cspin(hs, &weil, &zs, tol)?);
    let pass = checks.iter().all(|c| c.pass);
    Ok(HodgeReport {
        f1: hs.f1().to_vec(),
        f2: hs.f2().to_vec(),
        polarization_sign: pol.sign,
        samples,
        checks,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(d: &[i64]) -> DiagonalForm {
        DiagonalForm::from_integers(d).unwrap()
    }

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn aligned_plane_is_already_normalized() {
        let f = form(&[-1, -1, 2, 3]);
        let hs = HodgeStructure2::from_plane(&f, &[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(close(hs.f1(), &[1.0, 0.0, 0.0, 0.0]));
        assert!(close(hs.f2(), &[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn gram_schmidt_example() {
        let f = form(&[-1, -1, 2, 3]);
        let hs = HodgeStructure2::from_plane(&f, &[2.0, 0.0, 0.0, 0.0], &[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(close(hs.f1(), &[1.0, 0.0, 0.0, 0.0]));
        assert!(close(hs.f2(), &[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn rejects_bad_planes() {
        let f = form(&[-1, -1, 1, 1]);
        let err = HodgeStructure2::from_plane(&f, &[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0]);
        assert!(matches!(err, Err(Error::PlaneNotNegative(_))));
        let dep = HodgeStructure2::from_plane(&f, &[1.0, 0.0, 0.0, 0.0], &[2.0, 0.0, 0.0, 0.0]);
        assert!(matches!(dep, Err(Error::DependentPlane)));
        assert!(HodgeStructure2::aligned(&form(&[-1, 1, -1])).is_err());
    }

    #[test]
    fn parameter_examples() {
        let f = form(&[-1, -1, 1, 1, 1]);
        let hs = HodgeStructure2::from_parameters(&f, &[0.0; 3], &[0.0; 3]).unwrap();
        assert!(close(hs.f1(), &[1.0, 0.0, 0.0, 0.0, 0.0]));
        assert!(close(hs.f2(), &[0.0, 1.0, 0.0, 0.0, 0.0]));
        assert!(HodgeStructure2::from_parameters(&f, &[0.2, -0.1, 0.25], &[0.1, 0.29, -0.2]).is_ok());
        // (1, 0, 1, 0, 0) is Q-isotropic
        assert!(HodgeStructure2::from_parameters(&f, &[1.0, 0.0, 0.0], &[0.0; 3]).is_err());
    }

    #[test]
    fn hodge_action_examples() {
        let f = form(&[-2, -3, 5]);
        let hs = HodgeStructure2::aligned(&f).unwrap();
        let id = hs.hodge_action(Complex64::new(1.0, 0.0)).unwrap();
        assert!(id.relative_deviation(&Matrix::identity(3)) < 1e-15);
        let t = hs.hodge_action(Complex64::new(3.0, 0.0)).unwrap();
        assert!(t.relative_deviation(&Matrix::identity(3).scale(&9.0)) < 1e-15);
        // z = e^{i pi/4}: z^2 = i, so f1 -> -f2 and f2 -> f1
        let z = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let h = hs.hodge_action(z).unwrap();
        let apply = |v: &[f64]| -> Vec<f64> { (0..3).map(|r| (0..3).map(|c| h[(r, c)] * v[c]).sum()).collect() };
        let minus_f2: Vec<f64> = hs.f2().iter().map(|x| -x).collect();
        assert!(close(&apply(hs.f1()), &minus_f2));
        assert!(close(&apply(hs.f2()), hs.f1()));
        assert!(close(&apply(&[0.0, 0.0, 1.0]), &[0.0, 0.0, 1.0]));
        assert!(hs.hodge_action(Complex64::zero()).is_err());
    }

    #[test]
    fn eigenvector_of_h() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = form(&[-1, -2, 3, 1, 5]);
        let hs = HodgeStructure2::random(&f, &mut rng, 0.3).unwrap();
        let z = Complex64::from_polar(1.0, 0.7);
        let h = hs.hodge_action(z).unwrap();
        let n = 5;
        for r in 0..n {
            let lhs: Complex64 = (0..n).map(|c| h[(r, c)] * Complex64::new(hs.f1()[c], hs.f2()[c])).sum();
            let rhs = z * z * Complex64::new(hs.f1()[r], hs.f2()[r]);
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn weil_element_examples() {
        let f = form(&[-1, -1, 3]);
        let j = HodgeStructure2::aligned(&f).unwrap().weil_element().unwrap();
        let alg = j.algebra().clone();
        assert!(j.element().relative_distance(&CliffordElement::blade(&alg, Blade(0b11))) < 1e-15);

        let f = form(&[-2, -3, 5]);
        let j = HodgeStructure2::aligned(&f).unwrap().weil_element().unwrap();
        let expected = CliffordElement::from_terms(j.algebra(), [(Blade(0b11), 1.0 / 6f64.sqrt())]);
        assert!(j.element().relative_distance(&expected) < 1e-15);
        assert!(j.square_deviation() < 1e-15);
    }

    #[test]
    fn exact_weil_element_when_d1d2_square() {
        let f = form(&[-2, -8, 3]);
        let j = aligned_weil_exact(&f).unwrap();
        let sq = &j * &j;
        assert_eq!(sq, CliffordElement::scalar(j.algebra(), Rational::from_integer((-1).into())));
        assert!(aligned_weil_exact(&form(&[-2, -3, 5])).is_none());
    }

    #[test]
    fn hs_action_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = form(&[-1, -3, 2, 5]);
        let hs = HodgeStructure2::random(&f, &mut rng, 0.3).unwrap();
        let w = hs.weil_element().unwrap();
        let x = random_even(w.algebra(), &mut rng);
        let one = w.hs_action(Complex64::new(1.0, 0.0), &x).unwrap();
        assert!(one.relative_distance(&x) < 1e-15);
        let i = Complex64::new(0.0, 1.0);
        let twice = w.hs_action(i, &w.hs_action(i, &x).unwrap()).unwrap();
        assert!(twice.relative_distance(&-&x) < 1e-12);
        assert!(w.hs_action(i, &CliffordElement::generator(w.algebra(), 1)).is_err());
    }

    #[test]
    fn polarization_aligned_matches_closed_form() {
        let f = form(&[-2, -3, 5, 1]);
        let hs = HodgeStructure2::aligned(&f).unwrap();
        let w = hs.weil_element().unwrap();
        let pol = polarization_e(&hs, &w).unwrap();
        assert_eq!(pol.sign, 1);
        assert!(pol.weil_gram.relative_deviation(&aligned_closed_form(&f)) < 1e-12);
    }

    #[test]
    fn exact_aligned_gram_equals_exact_closed_form() {
        let f = form(&[-3, -12, 5, 7, 2]);
        assert_eq!(aligned_weil_gram_exact(&f).unwrap(), aligned_closed_form_exact(&f).unwrap());
    }

    #[test]
    fn orientation_reversal_negates_j() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = form(&[-1, -2, 3, 5]);
        let hs = HodgeStructure2::random(&f, &mut rng, 0.3).unwrap();
        let j = hs.weil_element().unwrap();
        let jr = hs.reversed().weil_element().unwrap();
        assert!(jr.element().relative_distance(&-j.element()) < 1e-12);
    }

    #[test]
    fn cspin_checks_at_one_and_rotation() {
        let f = form(&[-1, -1, 2, 3]);
        let hs = HodgeStructure2::aligned(&f).unwrap();
        let w = hs.weil_element().unwrap();
        let checks = verify_cspin(&hs, &w, &[Complex64::new(1.0, 0.0)], 1e-9).unwrap();
        assert!(checks.iter().all(|c| c.max_deviation == 0.0), "{checks:?}");
        // rho(h_s(e^{i pi/4})) f1 = -f2 and fixes the orthogonal complement
        let z = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let g = w.hs_element(z);
        let alg = w.algebra();
        let rho = |v: &CliffordElement<f64>| crate::clifford::conjugation_rho(&g, v).unwrap();
        let f1 = CliffordElement::vector(alg, hs.f1());
        let f2 = CliffordElement::vector(alg, hs.f2());
        assert!(rho(&f1).relative_distance(&-&f2) < 1e-12);
        let e3 = CliffordElement::generator(alg, 3);
        assert!(rho(&e3).relative_distance(&e3) < 1e-12);
    }
}
