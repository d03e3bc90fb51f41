use std::sync::Arc;

use kuga_satake::arith::{Rational, SquareClass};
use kuga_satake::brauer::{
    candidate_places, even_clifford_structure, hilbert_symbol_classes, BrauerClass, Place, QuaternionSymbol,
};
use kuga_satake::clifford::{bilinear_e, Blade, CliffordAlgebra, CliffordElement};
use kuga_satake::hodge::HodgeStructure2;
use kuga_satake::qform::{DiagonalForm, GramForm};
use num_complex::Complex64;
use proptest::prelude::*;

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn coeff() -> impl Strategy<Value = i64> {
    prop_oneof![-5i64..=-1, 1i64..=5]
}

fn diag(max_n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(coeff(), 1..=max_n)
}

fn element(alg: &Arc<CliffordAlgebra<Rational>>, coeffs: &[i64]) -> CliffordElement<Rational> {
    let n = alg.dim();
    CliffordElement::from_terms(
        alg,
        coeffs.iter().enumerate().take(1 << n).map(|(i, &c)| (Blade(i as u32), q(c))),
    )
}

fn small_coeffs() -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-3i64..=3, 32)
}

fn squarefree() -> impl Strategy<Value = i64> {
    (-3000i64..=3000).prop_filter("squarefree nonzero", |&n| {
        n != 0 && (2..=60i64).all(|p| n % (p * p) != 0)
    })
}

fn hodge_form(max_n: usize) -> impl Strategy<Value = Vec<i64>> {
    (3..=max_n).prop_flat_map(|n| {
        prop::collection::vec(1i64..=5, n).prop_map(|mut d| {
            d[0] = -d[0];
            d[1] = -d[1];
            d
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_is_associative(d in diag(5), x in small_coeffs(), y in small_coeffs(), z in small_coeffs()) {
        let alg = CliffordAlgebra::exact(&DiagonalForm::from_integers(&d).unwrap());
        let (x, y, z) = (element(&alg, &x), element(&alg, &y), element(&alg, &z));
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
    }

    #[test]
    fn reversal_is_an_anti_involution(d in diag(5), x in small_coeffs(), y in small_coeffs()) {
        let alg = CliffordAlgebra::exact(&DiagonalForm::from_integers(&d).unwrap());
        let (x, y) = (element(&alg, &x), element(&alg, &y));
        prop_assert_eq!((&x * &y).reversal(), &y.reversal() * &x.reversal());
        prop_assert_eq!(x.reversal().reversal(), x);
    }

    #[test]
    fn vectors_square_to_q(d in diag(6), v in prop::collection::vec(-4i64..=4, 6)) {
        let alg = CliffordAlgebra::exact(&DiagonalForm::from_integers(&d).unwrap());
        let coords: Vec<Rational> = v.iter().take(d.len()).map(|&c| q(c)).collect();
        let x = CliffordElement::vector(&alg, &coords);
        let qv = d.iter().zip(&v).map(|(a, b)| a * b * b).sum::<i64>();
        prop_assert_eq!(&x * &x, CliffordElement::scalar(&alg, q(qv)));
    }

    #[test]
    fn trace_lemma_on_random_pairs(d in diag(8), a in 0u32..256, b in 0u32..256) {
        let n = d.len();
        let (a, b) = (Blade(a & ((1 << n) - 1)), Blade(b & ((1 << n) - 1)));
        prop_assume!((a.grade() + b.grade()) % 2 == 0);
        let alg = CliffordAlgebra::exact(&DiagonalForm::from_integers(&d).unwrap());
        let tr = (&CliffordElement::blade(&alg, a).reversal() * &CliffordElement::blade(&alg, b)).trace().unwrap();
        let expected = if a == b {
            a.indices().fold(q(1 << (n - 1)), |acc, i| acc * q(d[i - 1]))
        } else {
            q(0)
        };
        prop_assert_eq!(tr, expected);
    }

    #[test]
    fn e_is_alternating(d in hodge_form(5), x in small_coeffs(), y in small_coeffs()) {
        let alg = CliffordAlgebra::exact(&DiagonalForm::from_integers(&d).unwrap());
        let alpha = CliffordElement::blade(&alg, Blade(0b11));
        let (x, y) = (element(&alg, &x).even_part(), element(&alg, &y).even_part());
        prop_assert_eq!(bilinear_e(&alpha, &x, &x).unwrap(), q(0));
        prop_assert_eq!(bilinear_e(&alpha, &x, &y).unwrap(), -bilinear_e(&alpha, &y, &x).unwrap());
    }

    #[test]
    fn hilbert_product_formula(a in squarefree(), b in squarefree()) {
        let (ca, cb) = (SquareClass::from_i64(a).unwrap(), SquareClass::from_i64(b).unwrap());
        let prod: i32 = candidate_places(&ca, &cb)
            .into_iter()
            .map(|v| i32::from(hilbert_symbol_classes(&ca, &cb, v)))
            .product();
        prop_assert_eq!(prod, 1);
        prop_assert_eq!(hilbert_symbol_classes(&ca, &cb, Place::Prime(2)), hilbert_symbol_classes(&cb, &ca, Place::Prime(2)));
    }

    #[test]
    fn hilbert_symbol_bimultiplicative(a in squarefree(), b in squarefree(), c in squarefree()) {
        let (ca, cb, cc) = (SquareClass::from_i64(a).unwrap(), SquareClass::from_i64(b).unwrap(), SquareClass::from_i64(c).unwrap());
        for v in candidate_places(&ca, &cb.mul(&cc)).into_iter().chain(candidate_places(&cb, &cc)) {
            prop_assert_eq!(
                hilbert_symbol_classes(&ca, &cb.mul(&cc), v),
                hilbert_symbol_classes(&ca, &cb, v) * hilbert_symbol_classes(&ca, &cc, v)
            );
        }
    }

    #[test]
    fn tensor_is_a_group_law(a in squarefree(), b in squarefree(), c in squarefree(), e in squarefree()) {
        let x = QuaternionSymbol::from_integers(a, b).unwrap().ramification().unwrap();
        let y = QuaternionSymbol::from_integers(c, e).unwrap().ramification().unwrap();
        let z = QuaternionSymbol::from_integers(a, e).unwrap().ramification().unwrap();
        prop_assert_eq!(x.tensor(&y).tensor(&z), x.tensor(&y.tensor(&z)));
        prop_assert_eq!(x.tensor(&y), y.tensor(&x));
        prop_assert!(x.tensor(&x).is_trivial());
        prop_assert_eq!(x.tensor(&BrauerClass::trivial()), x);
    }

    #[test]
    fn split_symbols_have_witnesses(a in -30i64..=30, b in -30i64..=30) {
        prop_assume!(a != 0 && b != 0);
        prop_assume!((2..=5i64).all(|p| a % (p * p) != 0 && b % (p * p) != 0));
        let cert = QuaternionSymbol::from_integers(a, b).unwrap().is_split(60).unwrap();
        if let Some((x, y, z)) = cert.witness {
            prop_assert!(cert.split);
            prop_assert_eq!(a * x * x + b * y * y, a * b * z * z);
        }
    }

    #[test]
    fn diagonalization_is_a_congruence(entries in prop::collection::vec(-4i64..=4, 10)) {
        // symmetric 4x4 from its upper triangle
        let mut rows = vec![vec![q(0); 4]; 4];
        let mut it = entries.iter();
        for i in 0..4 {
            for j in i..4 {
                let v = q(*it.next().unwrap());
                rows[i][j] = v.clone();
                rows[j][i] = v;
            }
        }
        if let Ok(g) = GramForm::from_rows(rows) {
            let diag = g.diagonalize();
            prop_assert!(diag.verify_congruence(&g));
            prop_assert_eq!(diag.signature(), g.signature());
        }
    }

    #[test]
    fn squarefree_scaling_keeps_classification(d in hodge_form(6), s in prop::collection::vec(1i64..=4, 6)) {
        let scaled: Vec<i64> = d.iter().zip(&s).map(|(x, k)| x * k * k).collect();
        let a = even_clifford_structure(&DiagonalForm::from_integers(&d).unwrap()).unwrap();
        let b = even_clifford_structure(&DiagonalForm::from_integers(&scaled).unwrap()).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
        let sf = DiagonalForm::from_integers(&scaled).unwrap().squarefree_scale().unwrap();
        prop_assert_eq!(even_clifford_structure(&sf).unwrap().to_json(), a.to_json());
    }

    #[test]
    fn hodge_action_is_multiplicative(d in hodge_form(6), seed in any::<u64>(), r1 in 0.5f64..2.0, p1 in 0.0f64..6.3, r2 in 0.5f64..2.0, p2 in 0.0f64..6.3) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let form = DiagonalForm::from_integers(&d).unwrap();
        let hs = HodgeStructure2::random(&form, &mut rng, 0.3).unwrap();
        let (z1, z2) = (Complex64::from_polar(r1, p1), Complex64::from_polar(r2, p2));
        let lhs = hs.hodge_action(z1 * z2).unwrap();
        let rhs = hs.hodge_action(z1).unwrap().mul(&hs.hodge_action(z2).unwrap());
        prop_assert!(lhs.relative_deviation(&rhs) < 1e-12);
    }

    #[test]
    fn weil_element_depends_only_on_oriented_plane(d in hodge_form(6), seed in any::<u64>(), t in 0.1f64..3.0, s in -2.0f64..2.0) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let form = DiagonalForm::from_integers(&d).unwrap();
        let hs = HodgeStructure2::random(&form, &mut rng, 0.3).unwrap();
        // (v, w) = (t f1, s f1 + f2) spans the same oriented plane
        let v: Vec<f64> = hs.f1().iter().map(|x| t * x).collect();
        let w: Vec<f64> = hs.f1().iter().zip(hs.f2()).map(|(a, b)| s * a + b).collect();
        let other = HodgeStructure2::from_plane(&form, &v, &w).unwrap();
        let j1 = hs.weil_element().unwrap();
        let j2 = other.weil_element().unwrap();
        prop_assert!(j1.element().relative_distance(j2.element()) < 1e-9);
    }
}
