//! Exact univariate integer polynomials.
//!
//! Coefficients are `BigInt`, stored lowest degree first. This is enough
//! machinery to expand rome-method determinants symbolically and to
//! isolate the largest real root: primitive pseudo-remainder gcd,
//! square-free part, Sturm chains, and bisection over exact dyadic
//! points. Floating point appears only in the returned root value.

use num::bigint::{BigInt, Sign};
use num::traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly {
    /// lowest degree first; invariant: last coefficient nonzero (empty = 0)
    coeffs: Vec<BigInt>,
}

/// Serializes as the coefficient list, lowest degree first; coefficients
/// beyond the i64 range are written as decimal strings.
impl serde::Serialize for IntPoly {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = serializer.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            match c.to_i64() {
                Some(v) => seq.serialize_element(&v)?,
                None => seq.serialize_element(&c.to_string())?,
            }
        }
        seq.end()
    }
}

impl<'de> serde::Deserialize<'de> for IntPoly {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(untagged)]
        enum Coeff {
            Int(i64),
            Big(String),
        }
        let raw: Vec<Coeff> = Vec::deserialize(deserializer)?;
        let coeffs = raw
            .into_iter()
            .map(|c| match c {
                Coeff::Int(v) => Ok(BigInt::from(v)),
                Coeff::Big(s) => s.parse().map_err(serde::de::Error::custom),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IntPoly::from_coeffs(coeffs))
    }
}

impl IntPoly {
    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        IntPoly { coeffs: vec![BigInt::one()] }
    }

    pub fn from_coeffs(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn monomial(coef: BigInt, deg: usize) -> Self {
        if coef.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigInt::zero(); deg + 1];
        coeffs[deg] = coef;
        IntPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigInt::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        IntPoly::from_coeffs(out)
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigInt::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] -= c;
        }
        IntPoly::from_coeffs(out)
    }

    pub fn neg(&self) -> IntPoly {
        IntPoly { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::from_coeffs(out)
    }

    pub fn scale(&self, k: &BigInt) -> IntPoly {
        if k.is_zero() {
            return IntPoly::zero();
        }
        IntPoly { coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }

    pub fn derivative(&self) -> IntPoly {
        if self.coeffs.len() <= 1 {
            return IntPoly::zero();
        }
        IntPoly::from_coeffs(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| c * BigInt::from(i + 1))
                .collect(),
        )
    }

    /// gcd of the coefficients, positive; 0 for the zero polynomial.
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = num::integer::gcd(g, c.abs());
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Divides by the content; sign of the leading coefficient is kept.
    pub fn primitive(&self) -> IntPoly {
        let g = self.content();
        if g.is_zero() || g.is_one() {
            return self.clone();
        }
        IntPoly { coeffs: self.coeffs.iter().map(|c| c / &g).collect() }
    }

    fn primitive_pos(&self) -> IntPoly {
        let p = self.primitive();
        match p.lead() {
            Some(l) if l.sign() == Sign::Minus => p.neg(),
            _ => p,
        }
    }

    pub fn eval_rational(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + Rational::from(c.clone());
        }
        acc
    }

    /// Sign of `p(num / 2^shift)`, computed exactly by integer Horner.
    pub fn sign_at_dyadic(&self, num: &BigInt, shift: u32) -> i8 {
        match self.degree() {
            None => 0,
            Some(d) => {
                let mut acc = self.coeffs[d].clone();
                let mut pw = BigInt::one();
                for i in (0..d).rev() {
                    pw <<= shift;
                    acc = acc * num + &self.coeffs[i] * &pw;
                }
                match acc.sign() {
                    Sign::Minus => -1,
                    Sign::NoSign => 0,
                    Sign::Plus => 1,
                }
            }
        }
    }

    /// `lc(d)^(deg self - deg d + 1) * self  mod  d`, by repeated reduction.
    fn pseudo_rem(&self, d: &IntPoly) -> IntPoly {
        let dd = d.degree().expect("division by zero polynomial");
        let lb = d.lead().unwrap().clone();
        let mut r = self.clone();
        let mut steps = match self.degree() {
            Some(ds) if ds >= dd => ds - dd + 1,
            _ => 0,
        };
        while let Some(dr) = r.degree() {
            if dr < dd || steps == 0 {
                break;
            }
            let lr = r.lead().unwrap().clone();
            let shifted = IntPoly::monomial(lr, dr - dd).mul(d);
            r = r.scale(&lb).sub(&shifted);
            steps -= 1;
        }
        // consume remaining multiplier so the total factor is lb^(δ+1)
        for _ in 0..steps {
            r = r.scale(&lb);
        }
        r
    }

    /// Primitive gcd via a primitive pseudo-remainder sequence.
    pub fn gcd(&self, other: &IntPoly) -> IntPoly {
        let mut a = self.primitive_pos();
        let mut b = other.primitive_pos();
        if a.is_zero() {
            return b;
        }
        if b.is_zero() {
            return a;
        }
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let r = a.pseudo_rem(&b).primitive_pos();
            a = b;
            b = r;
        }
        a.primitive_pos()
    }

    /// Exact quotient; panics if `d` does not divide `self` over Q.
    pub fn exact_div(&self, d: &IntPoly) -> IntPoly {
        let dd = d.degree().expect("division by zero polynomial");
        if self.is_zero() {
            return IntPoly::zero();
        }
        let ds = self.degree().unwrap();
        assert!(ds >= dd, "exact_div: degree underflow");
        let mut rem: Vec<Rational> =
            self.coeffs.iter().map(|c| Rational::from(c.clone())).collect();
        let lead = Rational::from(d.lead().unwrap().clone());
        let mut quot = vec![Rational::zero(); ds - dd + 1];
        for i in (0..quot.len()).rev() {
            let q = &rem[i + dd] / &lead;
            quot[i] = q.clone();
            for (j, c) in d.coeffs.iter().enumerate() {
                rem[i + j] = &rem[i + j] - &q * Rational::from(c.clone());
            }
        }
        assert!(rem.iter().all(|r| r.is_zero()), "exact_div: nonzero remainder");
        IntPoly::from_coeffs(
            quot.into_iter()
                .map(|q| {
                    assert!(q.denom().is_one(), "exact_div: non-integer quotient");
                    q.numer().clone()
                })
                .collect(),
        )
    }

    /// The square-free part `p / gcd(p, p')`, primitive with positive lead.
    pub fn square_free_part(&self) -> IntPoly {
        if self.degree().unwrap_or(0) <= 1 {
            return self.primitive_pos();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == Some(0) {
            return self.primitive_pos();
        }
        self.exact_div(&g).primitive_pos()
    }

    /// Sturm chain of a square-free polynomial. Each element is primitive;
    /// signs follow the textbook chain (positive rescaling only).
    pub fn sturm_chain(&self) -> Vec<IntPoly> {
        let mut chain = vec![self.primitive()];
        let d = self.derivative().primitive();
        if d.is_zero() {
            return chain;
        }
        chain.push(d);
        loop {
            let m = chain.len();
            let (a, b) = (&chain[m - 2], &chain[m - 1]);
            if b.is_zero() || b.degree() == Some(0) {
                break;
            }
            let delta = a.degree().unwrap().saturating_sub(b.degree().unwrap()) + 1;
            let r = a.pseudo_rem(b);
            if r.is_zero() {
                break;
            }
            // true remainder = r / lc(b)^delta; the chain wants -remainder,
            // rescaled by a positive constant
            let lead_negative = b.lead().unwrap().sign() == Sign::Minus && delta % 2 == 1;
            let next = if lead_negative { r.primitive() } else { r.primitive().neg() };
            chain.push(next);
        }
        chain
    }
}

/// Exact dyadic rational `num / 2^shift`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    pub num: BigInt,
    pub shift: u32,
}

impl Dyadic {
    pub fn from_int(n: i64) -> Self {
        Dyadic { num: BigInt::from(n), shift: 0 }
    }

    /// Smallest-shift dyadic at or above the given f64.
    pub fn from_f64_ceil(x: f64, shift: u32) -> Self {
        let scaled = (x * (2f64.powi(shift as i32))).ceil();
        Dyadic { num: BigInt::from(scaled as i128), shift }
    }

    pub fn to_f64(&self) -> f64 {
        self.num.to_f64().unwrap_or(f64::MAX) / 2f64.powi(self.shift as i32)
    }

    pub fn midpoint(a: &Dyadic, b: &Dyadic) -> Dyadic {
        let common = a.shift.max(b.shift);
        let num = (&a.num << (common - a.shift)) + (&b.num << (common - b.shift));
        Dyadic { num, shift: common + 1 }
    }
}

fn sign_variations(chain: &[IntPoly], x: &Dyadic) -> usize {
    let mut count = 0;
    let mut prev: i8 = 0;
    for p in chain {
        let s = p.sign_at_dyadic(&x.num, x.shift);
        if s != 0 {
            if prev != 0 && s != prev {
                count += 1;
            }
            prev = s;
        }
    }
    count
}

/// Number of distinct real roots of the (square-free) chain head in `(a, b]`.
/// The chain head must not vanish at `a` or `b`.
pub fn count_roots(chain: &[IntPoly], a: &Dyadic, b: &Dyadic) -> usize {
    sign_variations(chain, a).saturating_sub(sign_variations(chain, b))
}

/// Largest real root of `p` in `(lo, hi]`, to within `eps`, or None.
///
/// `p` need not be square-free; the square-free part is used internally.
/// `p` must not vanish at `lo`.
pub fn largest_root_in(p: &IntPoly, lo: f64, hi: f64, eps: f64) -> Option<f64> {
    let sf = p.square_free_part();
    if sf.degree().unwrap_or(0) == 0 {
        return None;
    }
    let chain = sf.sturm_chain();
    let mut lo = Dyadic::from_f64_ceil(lo, 30);
    let mut hi = Dyadic::from_f64_ceil(hi, 30);
    debug_assert!(sf.sign_at_dyadic(&lo.num, lo.shift) != 0, "largest_root_in: root at lo");
    if sf.sign_at_dyadic(&hi.num, hi.shift) == 0 {
        // hi must strictly dominate every root; nudge it upward
        hi = Dyadic { num: hi.num + BigInt::one(), shift: hi.shift };
    }
    if count_roots(&chain, &lo, &hi) == 0 {
        return None;
    }
    while hi.to_f64() - lo.to_f64() > eps {
        let mut mid = Dyadic::midpoint(&lo, &hi);
        // avoid landing exactly on a root of the chain head
        let mut step = 2u32;
        while sf.sign_at_dyadic(&mid.num, mid.shift) == 0 {
            let shift = lo.shift.max(hi.shift) + step;
            let span = (&hi.num << (shift - hi.shift)) - (&lo.num << (shift - lo.shift));
            let quarter = span >> step;
            mid = Dyadic { num: (&mid.num << (shift - mid.shift)) + quarter, shift };
            step += 1;
        }
        if count_roots(&chain, &mid, &hi) >= 1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo.to_f64() + hi.to_f64()))
}

/// Cauchy bound: every real root of `p` is below `1 + max |c_i| / |lead|`.
pub fn cauchy_root_bound(p: &IntPoly) -> f64 {
    match p.degree() {
        None | Some(0) => 1.0,
        Some(d) => {
            let lead = p.coeffs()[d].abs().to_f64().unwrap_or(1.0);
            let max = p.coeffs()[..d]
                .iter()
                .map(|c| c.abs().to_f64().unwrap_or(f64::MAX))
                .fold(0.0_f64, f64::max);
            1.0 + max / lead
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(cs: &[i64]) -> IntPoly {
        IntPoly::from_i64(cs)
    }

    #[test]
    fn arithmetic_basics() {
        let p = poly(&[1, 2, 3]); // 3x^2 + 2x + 1
        let q = poly(&[-1, 0, 0, 4]);
        assert_eq!(p.add(&q), poly(&[0, 2, 3, 4]));
        assert_eq!(p.mul(&poly(&[0, 1])), poly(&[0, 1, 2, 3]));
        assert_eq!(p.derivative(), poly(&[2, 6]));
        assert_eq!(poly(&[6, -12, 18]).content(), BigInt::from(6));
    }

    #[test]
    fn gcd_and_square_free() {
        // (x-1)^2 (x+2)
        let p = poly(&[2, -3, 0, 1]);
        let sf = p.square_free_part();
        // (x-1)(x+2) = x^2 + x - 2
        assert_eq!(sf, poly(&[-2, 1, 1]));
        let g = poly(&[-1, 1]).mul(&poly(&[-1, 1]));
        assert_eq!(p.gcd(&g), poly(&[1, -2, 1]));
        assert_eq!(p.gcd(&poly(&[2, 1])), poly(&[2, 1]));
    }

    #[test]
    fn exact_division() {
        let a = poly(&[-2, 1, 1]); // (x-1)(x+2)
        let b = poly(&[-1, 1]);
        assert_eq!(a.exact_div(&b), poly(&[2, 1]));
    }

    #[test]
    fn sturm_counts_roots() {
        // x^2 - 2: one root in (1, 2]
        let p = poly(&[-2, 0, 1]);
        let chain = p.sturm_chain();
        assert_eq!(count_roots(&chain, &Dyadic::from_int(1), &Dyadic::from_int(2)), 1);
        assert_eq!(count_roots(&chain, &Dyadic::from_int(-2), &Dyadic::from_int(2)), 2);
        assert_eq!(count_roots(&chain, &Dyadic::from_int(2), &Dyadic::from_int(3)), 0);
    }

    #[test]
    fn largest_root_golden_ratio() {
        // x^2 - x - 1, largest root (1+sqrt 5)/2; oracle by direct bisection
        let p = poly(&[-1, -1, 1]);
        let mut lo = 1.0_f64;
        let mut hi = 2.0_f64;
        for _ in 0..60 {
            let m = 0.5 * (lo + hi);
            if m * m - m - 1.0 > 0.0 {
                hi = m;
            } else {
                lo = m;
            }
        }
        let oracle = 0.5 * (lo + hi);
        let root = largest_root_in(&p, 0.0, 3.0, 1e-12).unwrap();
        assert!((root - oracle).abs() < 1e-11);
        assert!((root - 1.618_033_988_7).abs() < 1e-9);
    }

    #[test]
    fn largest_root_with_multiplicity() {
        // (x^4 - 1)^2 has largest real root exactly 1 (even multiplicity)
        let q = poly(&[-1, 0, 0, 0, 1]);
        let p = q.mul(&q);
        let root = largest_root_in(&p, 0.0, 3.0, 1e-12).unwrap();
        assert!((root - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_root_above() {
        let p = poly(&[-2, 0, 1]);
        assert!(largest_root_in(&p, 2.0, 5.0, 1e-12).is_none());
    }

    #[test]
    fn serde_coefficient_lists() {
        let p = poly(&[1, 0, -2, 0, 1]);
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(text, "[1,0,-2,0,1]");
        let back: IntPoly = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        // huge coefficients fall back to strings
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        let q = IntPoly::from_coeffs(vec![BigInt::from(1), big.clone()]);
        let text = serde_json::to_string(&q).unwrap();
        assert_eq!(text, "[1,\"123456789012345678901234567890\"]");
        let back: IntPoly = serde_json::from_str(&text).unwrap();
        assert_eq!(back.coeffs()[1], big);
    }
}
