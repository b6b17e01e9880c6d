//! The set `T` of triples `(b, c, p)` modulo
//! `(b,c,p) ≡ (b,c,p+(k+l)/r) ≡ (b+k,c,p-1) ≡ (b,c+l,p+1)`, `r = gcd(k, l)`,
//! and the maps `φ_2: T -> Z/NZ`, `φ_3: T -> Z/(k+l)Z`.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::EllipticError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TSetElement {
    pub b: i64,
    pub c: i64,
    pub p: i64,
}

impl TSetElement {
    /// Representative with `0 ≤ b < k`, `0 ≤ c < l`, `0 ≤ p < (k+l)/r`.
    pub fn canonical(self, k: i64, l: i64) -> Self {
        let period = (k + l) / k.gcd(&l);
        let (jb, b) = (self.b.div_euclid(k), self.b.rem_euclid(k));
        let (jc, c) = (self.c.div_euclid(l), self.c.rem_euclid(l));
        Self {
            b,
            c,
            p: (self.p + jb - jc).rem_euclid(period),
        }
    }
}

/// `N = (k+l)kl/r²`.
pub fn big_n(k: i64, l: i64) -> i64 {
    let r = k.gcd(&l);
    (k + l) * k * l / (r * r)
}

/// The fibre `φ_1^{-1}(b, c)` in canonical form.
pub fn t_set_enumerate(k: i64, l: i64, b: i64, c: i64) -> Vec<TSetElement> {
    let period = (k + l) / k.gcd(&l);
    (0..period)
        .map(|p| TSetElement { b, c, p }.canonical(k, l))
        .collect()
}

/// `(b/k - c/l + p)·kl/r mod N`.
pub fn phi2(sigma: &TSetElement, k: i64, l: i64) -> Result<i64, EllipticError> {
    let r = k.gcd(&l);
    let num = sigma.b * l - sigma.c * k + sigma.p * k * l;
    if num % r != 0 {
        return Err(EllipticError::NonIntegralPhi2 {
            b: sigma.b,
            c: sigma.c,
            p: sigma.p,
        });
    }
    Ok((num / r).rem_euclid(big_n(k, l)))
}

/// `b + c + kp mod (k+l)`.
pub fn phi3(sigma: &TSetElement, k: i64, l: i64) -> i64 {
    (sigma.b + sigma.c + k * sigma.p).rem_euclid(k + l)
}
