//! Dense real polynomials and linear differential operators with polynomial
//! coefficients.
//!
//! Degrees stay tiny throughout (a level-`n` computation never exceeds
//! degree `n + 2`), so everything is a dense coefficient vector in ascending
//! powers of `z`. The zero polynomial is the empty coefficient vector;
//! constructors and arithmetic trim trailing exact zeros so that degrees
//! stay honest. Roots may be complex even though coefficients are real; a
//! complex-coefficient variant exists crate-internally for root polishing
//! and for kernel vectors attached to complex eigenvalues.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::linalg::{hessenberg_eigenvalues, CMat};
use crate::{Error, Result};

/// Maximum derivative order an operator may reach through composition.
pub const MAX_OPERATOR_ORDER: usize = 8;

/// Real polynomial, dense ascending coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs = coeffs.into();
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    pub fn one() -> Self {
        Polynomial::constant(1.0)
    }

    /// `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![0.0; k + 1];
        c[k] = 1.0;
        Polynomial { coeffs: c }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `z^k` (zero beyond the stored degree).
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn leading(&self) -> Option<f64> {
        self.coeffs.last().copied()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * z + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        Polynomial::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(k, &c)| (k as f64 + 1.0) * c)
                .collect::<Vec<_>>(),
        )
    }

    pub fn scale(&self, c: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|&a| c * a).collect::<Vec<_>>())
    }

    /// All complex roots with multiplicity, via companion-matrix eigenvalues
    /// followed by Newton polishing.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if self.degree() == Some(0) {
            return Err(Error::InvalidInput(
                "a nonzero constant polynomial has no roots".into(),
            ));
        }
        let cs: Vec<Complex64> = self
            .coeffs
            .iter()
            .map(|&c| Complex64::new(c, 0.0))
            .collect();
        croots(&cs)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new(
            (0..n)
                .map(|k| self.coeff(k) + rhs.coeff(k))
                .collect::<Vec<_>>(),
        )
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new(
            (0..n)
                .map(|k| self.coeff(k) - rhs.coeff(k))
                .collect::<Vec<_>>(),
        )
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl AddAssign<&Polynomial> for Polynomial {
    fn add_assign(&mut self, rhs: &Polynomial) {
        *self = &*self + rhs;
    }
}

/// Complex polynomial, crate-internal (root polishing, complex kernels).
#[derive(Debug, Clone, PartialEq, Default)]
pub(crate) struct CPolynomial {
    pub coeffs: Vec<Complex64>,
}

impl CPolynomial {
    pub fn new(coeffs: impl Into<Vec<Complex64>>) -> Self {
        let mut coeffs = coeffs.into();
        while coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            coeffs.pop();
        }
        CPolynomial { coeffs }
    }

    pub fn from_real(p: &Polynomial) -> Self {
        CPolynomial {
            coeffs: p.coeffs().iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        }
    }

    /// Monic product of the linear factors `(z - r)`.
    pub fn monic_from_roots(roots: &[Complex64]) -> Self {
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            coeffs = next;
        }
        CPolynomial { coeffs }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn real_part(&self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c.re).collect::<Vec<_>>())
    }

    pub fn imag_part(&self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c.im).collect::<Vec<_>>())
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// The real projection, if the imaginary part is negligible at `tol`
    /// relative to the largest coefficient.
    pub fn realify(&self, tol: f64) -> Option<Polynomial> {
        let scale = self.max_abs().max(1.0);
        let im = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
        if im <= tol * scale {
            Some(self.real_part())
        } else {
            None
        }
    }
}

/// Roots of a complex polynomial in ascending-coefficient form.
pub(crate) fn croots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut cs = coeffs.to_vec();
    while cs.last().is_some_and(|c| c.norm() == 0.0) {
        cs.pop();
    }
    if cs.is_empty() {
        return Err(Error::ZeroPolynomial);
    }
    // factor out exact roots at the origin
    let mut zeros_at_origin = 0;
    while cs.first().is_some_and(|c| c.norm() == 0.0) {
        cs.remove(0);
        zeros_at_origin += 1;
    }
    let deg = cs.len() - 1;
    let mut roots = Vec::with_capacity(deg + zeros_at_origin);
    for _ in 0..zeros_at_origin {
        roots.push(Complex64::new(0.0, 0.0));
    }
    if deg > 0 {
        let lead = *cs.last().expect("nonempty");
        let monic: Vec<Complex64> = cs.iter().map(|&c| c / lead).collect();
        let companion = CMat::from_fn(deg, |i, j| {
            if i == j + 1 {
                Complex64::new(1.0, 0.0)
            } else if j == deg - 1 {
                -monic[i]
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let poly = CPolynomial::new(cs.clone());
        let dpoly = CPolynomial::new(
            cs.iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect::<Vec<_>>(),
        );
        for mut r in hessenberg_eigenvalues(&companion)? {
            // Newton polish; keep a step only if it reduces |p|
            let mut pv = poly.eval(r).norm();
            for _ in 0..4 {
                let d = dpoly.eval(r);
                if d.norm() == 0.0 {
                    break;
                }
                let cand = r - poly.eval(r) / d;
                let cv = poly.eval(cand).norm();
                if cv < pv {
                    r = cand;
                    pv = cv;
                } else {
                    break;
                }
            }
            roots.push(r);
        }
    }
    roots.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .expect("finite roots")
    });
    Ok(roots)
}

/// Linear differential operator `sum_k p_k(z) d^k/dz^k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiffOperator {
    /// Coefficient polynomial per derivative order; trailing zero entries
    /// are trimmed, so `coeffs.len() - 1` is the order.
    coeffs: Vec<Polynomial>,
}

impl DiffOperator {
    pub fn new(coeffs: Vec<Polynomial>) -> Self {
        let mut coeffs = coeffs;
        while coeffs.last().is_some_and(|p| p.is_zero()) {
            coeffs.pop();
        }
        DiffOperator { coeffs }
    }

    pub fn zero() -> Self {
        DiffOperator { coeffs: Vec::new() }
    }

    pub fn identity() -> Self {
        DiffOperator::new(vec![Polynomial::one()])
    }

    /// `d^k/dz^k`.
    pub fn derivative(k: usize) -> Self {
        let mut coeffs = vec![Polynomial::zero(); k + 1];
        coeffs[k] = Polynomial::one();
        DiffOperator::new(coeffs)
    }

    /// Multiplication by `p(z)` as an operator.
    pub fn multiplication(p: Polynomial) -> Self {
        DiffOperator::new(vec![p])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero operator.
    pub fn order(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Polynomial] {
        &self.coeffs
    }

    /// Coefficient polynomial of `d^k/dz^k` (zero beyond the order).
    pub fn coeff(&self, k: usize) -> Polynomial {
        self.coeffs.get(k).cloned().unwrap_or_else(Polynomial::zero)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs
            .iter()
            .fold(0.0, |m, p| m.max(p.max_abs_coeff()))
    }

    /// `sum_k p_k(z) y^(k)(z)`.
    pub fn apply(&self, y: &Polynomial) -> Polynomial {
        let mut acc = Polynomial::zero();
        let mut dy = y.clone();
        for (k, p) in self.coeffs.iter().enumerate() {
            if k > 0 {
                dy = dy.derivative();
            }
            if !p.is_zero() && !dy.is_zero() {
                acc += &(p * &dy);
            }
        }
        acc
    }

    /// Operator composition `self . rhs` via the Leibniz rule:
    /// `apply(compose(a, b), y) = apply(a, apply(b, y))` for every `y`.
    pub fn compose(&self, rhs: &DiffOperator) -> Result<DiffOperator> {
        let (Some(oa), Some(ob)) = (self.order(), rhs.order()) else {
            return Ok(DiffOperator::zero());
        };
        if oa + ob > MAX_OPERATOR_ORDER {
            return Err(Error::OperatorOrderCap {
                order: oa + ob,
                cap: MAX_OPERATOR_ORDER,
            });
        }
        let mut out = vec![Polynomial::zero(); oa + ob + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                // d^i (b(z) d^j y) = sum_m C(i, m) b^(i-m) d^(m+j) y
                let mut db = b.clone();
                for m in (0..=i).rev() {
                    let term = &(a * &db).scale(binomial(i, m));
                    out[m + j] += term;
                    if m > 0 {
                        db = db.derivative();
                    }
                }
            }
        }
        Ok(DiffOperator::new(out))
    }

    /// `[self, rhs] = self . rhs - rhs . self`.
    pub fn commutator(&self, rhs: &DiffOperator) -> Result<DiffOperator> {
        Ok(&self.compose(rhs)? - &rhs.compose(self)?)
    }

    /// Largest absolute coefficient difference, across orders and powers.
    pub fn coeff_distance(&self, rhs: &DiffOperator) -> f64 {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        (0..n).fold(0.0, |m, k| {
            let d = &self.coeff(k) - &rhs.coeff(k);
            m.max(d.max_abs_coeff())
        })
    }
}

impl Add for &DiffOperator {
    type Output = DiffOperator;
    fn add(self, rhs: &DiffOperator) -> DiffOperator {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        DiffOperator::new((0..n).map(|k| &self.coeff(k) + &rhs.coeff(k)).collect())
    }
}

impl Sub for &DiffOperator {
    type Output = DiffOperator;
    fn sub(self, rhs: &DiffOperator) -> DiffOperator {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        DiffOperator::new((0..n).map(|k| &self.coeff(k) - &rhs.coeff(k)).collect())
    }
}

impl Neg for &DiffOperator {
    type Output = DiffOperator;
    fn neg(self) -> DiffOperator {
        self.scale(-1.0)
    }
}

impl DiffOperator {
    pub fn scale(&self, c: f64) -> DiffOperator {
        DiffOperator::new(self.coeffs.iter().map(|p| p.scale(c)).collect())
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly_close(a: &Polynomial, b: &Polynomial, tol: f64) -> bool {
        (a - b).max_abs_coeff() <= tol
    }

    #[test]
    fn trims_and_represents_zero() {
        assert!(Polynomial::new(vec![0.0, 0.0]).is_zero());
        assert_eq!(Polynomial::new(vec![1.0, 0.0]).degree(), Some(0));
        assert_eq!(Polynomial::zero().degree(), None);
    }

    #[test]
    fn apply_derivative_and_euler() {
        let d = DiffOperator::derivative(1);
        assert_eq!(
            d.apply(&Polynomial::monomial(2)),
            Polynomial::new(vec![0.0, 2.0])
        );

        // z d/dz - 1 annihilates z
        let euler = &DiffOperator::new(vec![Polynomial::zero(), Polynomial::monomial(1)])
            - &DiffOperator::identity();
        assert!(euler.apply(&Polynomial::monomial(1)).is_zero());
    }

    #[test]
    fn compose_canonical_commutation() {
        let d = DiffOperator::derivative(1);
        let z = DiffOperator::multiplication(Polynomial::monomial(1));
        // d . z = z d + 1
        let dz = d.compose(&z).unwrap();
        let want = &DiffOperator::new(vec![Polynomial::zero(), Polynomial::monomial(1)])
            + &DiffOperator::identity();
        assert_eq!(dz, want);
        // [d, z] = 1
        let c = d.commutator(&z).unwrap();
        assert_eq!(c, DiffOperator::identity());
        // identity is neutral
        let any = DiffOperator::new(vec![
            Polynomial::new(vec![1.0, 2.0]),
            Polynomial::monomial(2),
        ]);
        assert_eq!(DiffOperator::identity().compose(&any).unwrap(), any);
        assert_eq!(any.compose(&DiffOperator::identity()).unwrap(), any);
    }

    #[test]
    fn compose_respects_order_cap() {
        let d5 = DiffOperator::derivative(5);
        assert!(d5.compose(&d5).is_err());
        let d4 = DiffOperator::derivative(4);
        assert!(d4.compose(&d4).is_ok());
    }

    #[test]
    fn roots_simple_cases() {
        let p = Polynomial::new(vec![-1.0, 0.0, 1.0]); // z^2 - 1
        let r = p.roots().unwrap();
        assert!((r[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((r[1] - Complex64::new(1.0, 0.0)).norm() < 1e-12);

        let r = Polynomial::monomial(1).roots().unwrap();
        assert_eq!(r, vec![Complex64::new(0.0, 0.0)]);

        // double root: companion eigenvalues are only sqrt(eps)-accurate there
        let p = Polynomial::new(vec![1.0, -2.0, 1.0]); // (z-1)^2
        let r = p.roots().unwrap();
        assert_eq!(r.len(), 2);
        for root in r {
            assert!((root - Complex64::new(1.0, 0.0)).norm() < 1e-6);
        }

        assert!(Polynomial::zero().roots().is_err());
        assert!(Polynomial::one().roots().is_err());
    }

    #[test]
    fn roots_meet_residual_bound() {
        let mut rng = crate::rng::SplitMix64::new(17);
        for _ in 0..40 {
            let deg = rng.uniform_usize(1, 8);
            let coeffs: Vec<f64> = (0..=deg).map(|_| rng.uniform(-2.0, 2.0)).collect();
            let p = Polynomial::new(coeffs);
            let Some(d) = p.degree() else { continue };
            if d == 0 {
                continue;
            }
            let scale = p.max_abs_coeff();
            for r in p.roots().unwrap() {
                let bound = 1e-8 * scale * r.norm().max(1.0).powi(d as i32);
                let res = p.eval_complex(r).norm();
                assert!(res <= bound, "residual {res:e} above bound {bound:e}");
            }
        }
    }

    #[test]
    fn complex_product_from_roots() {
        let roots = [Complex64::new(1.0, 2.0), Complex64::new(1.0, -2.0)];
        let p = CPolynomial::monic_from_roots(&roots);
        let real = p
            .realify(1e-14)
            .expect("conjugate pair gives a real polynomial");
        // (z - 1 - 2i)(z - 1 + 2i) = z^2 - 2z + 5
        assert!(poly_close(
            &real,
            &Polynomial::new(vec![5.0, -2.0, 1.0]),
            1e-14
        ));
    }

    proptest! {
        #[test]
        fn apply_is_linear(
            a in proptest::collection::vec(-2.0..2.0f64, 0..5),
            b in proptest::collection::vec(-2.0..2.0f64, 0..5),
            p2 in proptest::collection::vec(-2.0..2.0f64, 0..4),
            p1 in proptest::collection::vec(-2.0..2.0f64, 0..4),
            p0 in proptest::collection::vec(-2.0..2.0f64, 0..4),
            c in -3.0..3.0f64,
        ) {
            let op = DiffOperator::new(vec![
                Polynomial::new(p0),
                Polynomial::new(p1),
                Polynomial::new(p2),
            ]);
            let pa = Polynomial::new(a);
            let pb = Polynomial::new(b);
            let lhs = op.apply(&(&pa + &pb));
            let rhs = &op.apply(&pa) + &op.apply(&pb);
            let scale = lhs.max_abs_coeff().max(rhs.max_abs_coeff()).max(1.0);
            prop_assert!(poly_close(&lhs, &rhs, 1e-12 * scale));

            let ls = op.apply(&pa.scale(c));
            let rs = op.apply(&pa).scale(c);
            let scale = ls.max_abs_coeff().max(rs.max_abs_coeff()).max(1.0);
            prop_assert!(poly_close(&ls, &rs, 1e-12 * scale));
        }

        #[test]
        fn compose_is_associative(
            seeds in proptest::collection::vec(-2.0..2.0f64, 27),
        ) {
            let mk = |chunk: &[f64]| {
                DiffOperator::new(vec![
                    Polynomial::new(vec![chunk[0], chunk[1], chunk[2]]),
                    Polynomial::new(vec![chunk[3], chunk[4], chunk[5]]),
                    Polynomial::new(vec![chunk[6], chunk[7], chunk[8]]),
                ])
            };
            let a = mk(&seeds[0..9]);
            let b = mk(&seeds[9..18]);
            let c = mk(&seeds[18..27]);
            let left = a.compose(&b).unwrap().compose(&c).unwrap();
            let right = a.compose(&b.compose(&c).unwrap()).unwrap();
            let scale = left.max_abs_coeff().max(right.max_abs_coeff()).max(1.0);
            prop_assert!(left.coeff_distance(&right) <= 1e-12 * scale);
        }

        #[test]
        fn compose_matches_sequential_application(
            y in proptest::collection::vec(-2.0..2.0f64, 1..6),
            qa in proptest::collection::vec(-2.0..2.0f64, 4),
            qb in proptest::collection::vec(-2.0..2.0f64, 4),
        ) {
            let a = DiffOperator::new(vec![
                Polynomial::new(vec![qa[0], qa[1]]),
                Polynomial::new(vec![qa[2], qa[3]]),
            ]);
            let b = DiffOperator::new(vec![
                Polynomial::new(vec![qb[0], qb[1]]),
                Polynomial::new(vec![qb[2], qb[3]]),
            ]);
            let y = Polynomial::new(y);
            let lhs = a.compose(&b).unwrap().apply(&y);
            let rhs = a.apply(&b.apply(&y));
            let scale = lhs.max_abs_coeff().max(rhs.max_abs_coeff()).max(1.0);
            prop_assert!(poly_close(&lhs, &rhs, 1e-12 * scale));
        }
    }
}
