use std::fmt;

use crate::scalar::Scalar;

/// A basis blade e^a = e_1^{a_1} ... e_n^{a_n}; bit i-1 of the mask is a_i.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Blade(pub u32);

impl Blade {
    pub const ONE: Blade = Blade(0);

    /// The generator e_i, 1-based.
    pub fn generator(i: usize) -> Blade {
        assert!((1..=32).contains(&i), "generator index out of range");
        Blade(1 << (i - 1))
    }

    pub fn from_indices(indices: &[usize]) -> Blade {
        indices
            .iter()
            .fold(Blade::ONE, |acc, &i| Blade(acc.0 | Blade::generator(i).0))
    }

    pub fn grade(self) -> u32 {
        self.0.count_ones()
    }

    pub fn is_even(self) -> bool {
        self.grade() % 2 == 0
    }

    pub fn fits(self, n: usize) -> bool {
        n >= 32 || self.0 >> n == 0
    }

    /// 1-based generator indices in increasing order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let mask = self.0;
        (0..32).filter(move |i| mask >> i & 1 == 1).map(|i| i + 1)
    }

    /// (-1)^{k(k-1)/2}: the sign picked up under reversal.
    pub fn reversal_sign(self) -> i32 {
        let k = self.grade();
        if (k * k.saturating_sub(1) / 2) % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// All blades of C(Q) for dimension n, in increasing mask order.
    pub fn all(n: usize) -> impl Iterator<Item = Blade> {
        (0..1u32 << n).map(Blade)
    }

    /// The standard basis of C^+(Q), in increasing mask order.
    pub fn even(n: usize) -> impl Iterator<Item = Blade> {
        Self::all(n).filter(|b| b.is_even())
    }
}

impl fmt::Display for Blade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            return write!(f, "1");
        }
        for i in self.indices() {
            write!(f, "e{i}")?;
        }
        Ok(())
    }
}

/// Number of transpositions needed to sort e^a e^b into e^{a xor b}:
/// every generator of b moves left past the higher-index generators of a.
pub fn swap_count(a: Blade, b: Blade) -> u32 {
    let mut t = 0;
    let mut rest = b.0;
    while rest != 0 {
        let i = rest.trailing_zeros();
        rest &= rest - 1;
        let above = if i >= 31 { 0 } else { a.0 >> (i + 1) };
        t += above.count_ones();
    }
    t
}

/// e^a e^b = sign * scale * e^{a xor b} with scale = prod_{i in a and b} d_i.
pub fn blade_product<S: Scalar>(a: Blade, b: Blade, d: &[S]) -> (i32, S, Blade) {
    let sign = if swap_count(a, b) % 2 == 0 { 1 } else { -1 };
    let common = Blade(a.0 & b.0);
    let scale = common
        .indices()
        .fold(S::one(), |acc, i| acc * d[i - 1].clone());
    (sign, scale, Blade(a.0 ^ b.0))
}
