//! Dense linear algebra backing the spectral machinery.
//!
//! Three solvers, all implemented in-repo so the numerical pipeline stays
//! self-contained and auditable:
//!
//! - [`symmetric_eigenvalues`]: Householder tridiagonalization followed by
//!   implicit-shift QL sweeps, for the oscillator-basis matrices of the
//!   oracle (sizes up to ~1000),
//! - [`hessenberg_eigenvalues`]: single-shift QR with Givens rotations and
//!   Wilkinson shifts on complex upper Hessenberg matrices, for companion
//!   matrices and the invariant-subspace operator (sizes up to ~100),
//! - [`inverse_iteration`] on top of a complex LU factorization, for the
//!   eigenvectors of the small nonsymmetric problems.

use num_complex::Complex64;

use crate::rng::SplitMix64;
use crate::{Error, Result};

const MAX_QL_SWEEPS: usize = 50;
const MAX_QR_SWEEPS_PER_EIGENVALUE: usize = 80;

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DMat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.data[i * cols + j] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: f64) {
        self.data[i * self.cols + j] = x;
    }

    /// Exact (bitwise) symmetry of the stored entries.
    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// All eigenvalues of an exactly symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &DMat) -> Result<Vec<f64>> {
    if !a.is_symmetric() {
        return Err(Error::InvalidInput(
            "symmetric_eigenvalues requires an exactly symmetric square matrix".into(),
        ));
    }
    let n = a.rows;
    if n == 0 {
        return Ok(Vec::new());
    }
    let (mut d, mut e) = tridiagonalize(a);
    ql_implicit(&mut d, &mut e)?;
    d.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(d)
}

/// Householder reduction of a symmetric matrix to tridiagonal form.
/// Returns the diagonal `d` and the subdiagonal `e` (`e[i]` couples `i` and
/// `i + 1`). Transforms are not accumulated; eigenvalues only.
fn tridiagonalize(a: &DMat) -> (Vec<f64>, Vec<f64>) {
    let n = a.rows;
    let mut m = a.data.clone();
    let mut v = vec![0.0; n];
    let mut q = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let mut scale = 0.0;
        for i in k + 1..n {
            scale += m[i * n + k].abs();
        }
        if scale == 0.0 {
            continue;
        }
        let mut norm2 = 0.0;
        for i in k + 1..n {
            v[i] = m[i * n + k] / scale;
            norm2 += v[i] * v[i];
        }
        let norm = norm2.sqrt();
        let alpha = if v[k + 1] >= 0.0 { -norm } else { norm };
        let sub = scale * alpha;
        v[k + 1] -= alpha;
        let beta: f64 = (k + 1..n).map(|i| v[i] * v[i]).sum();
        if beta == 0.0 {
            continue;
        }
        // Rank-2 symmetric update of the trailing block:
        //   B <- B - v q' - q v'   with q = (2/beta) B v - (v'(2/beta)Bv / beta) v
        for i in k + 1..n {
            let row = i * n;
            let mut s = 0.0;
            for j in k + 1..n {
                s += m[row + j] * v[j];
            }
            q[i] = 2.0 * s / beta;
        }
        let vq: f64 = (k + 1..n).map(|i| v[i] * q[i]).sum();
        let kappa = vq / beta;
        for i in k + 1..n {
            q[i] -= kappa * v[i];
        }
        for i in k + 1..n {
            let row = i * n;
            for j in k + 1..n {
                m[row + j] -= v[i] * q[j] + q[i] * v[j];
            }
        }
        m[(k + 1) * n + k] = sub;
        m[k * n + k + 1] = sub;
        for i in k + 2..n {
            m[i * n + k] = 0.0;
            m[k * n + i] = 0.0;
        }
    }
    let d = (0..n).map(|i| m[i * n + i]).collect();
    let e = (0..n - 1).map(|i| m[(i + 1) * n + i]).collect();
    (d, e)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix; `d` ends up holding
/// the (unsorted) eigenvalues.
fn ql_implicit(d: &mut [f64], e_sub: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(e_sub);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_SWEEPS {
                return Err(Error::EigenNoConvergence {
                    iterations: iter,
                    context: "implicit QL on the tridiagonal form",
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut underflow = false;
            while i > l {
                let ii = i - 1;
                let f = s * e[ii];
                let b = c * e[ii];
                r = f.hypot(g);
                e[ii + 1] = r;
                if r == 0.0 {
                    // recover from an exact cancellation and retry the sweep
                    d[ii + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[ii + 1] - p;
                r = (d[ii] - g) * s + 2.0 * c * b;
                p = s * r;
                d[ii + 1] = g + p;
                g = c * r - b;
                i = ii;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Dense row-major complex square matrix.
#[derive(Debug, Clone)]
pub struct CMat {
    n: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        CMat {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMat::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn from_real(a: &DMat) -> Self {
        assert_eq!(a.rows(), a.cols(), "square matrix expected");
        CMat::from_fn(a.rows(), |i, j| Complex64::new(a.get(i, j), 0.0))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: Complex64) {
        self.data[i * self.n + j] = x;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.norm()))
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|j| self.data[i * n + j] * x[j]).sum())
            .collect()
    }
}

fn eig_2x2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let tr = (a + d) * 0.5;
    let delta = (((a - d) * 0.5) * ((a - d) * 0.5) + b * c).sqrt();
    (tr + delta, tr - delta)
}

/// Unitary Givens pair `(c, s)` with real `c` such that
/// `[[c, s], [-conj(s), c]] · [a, b]' = [r, 0]'`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = an.hypot(bn);
    ((an / r), (a / an) * (b.conj() / r))
}

/// Eigenvalues of a complex upper Hessenberg matrix, sorted by real part
/// then imaginary part. Entries below the first subdiagonal are ignored.
pub fn hessenberg_eigenvalues(h: &CMat) -> Result<Vec<Complex64>> {
    let n = h.n;
    let zero = Complex64::new(0.0, 0.0);
    let mut a = h.data.clone();
    for i in 2..n {
        for j in 0..i - 1 {
            a[i * n + j] = zero;
        }
    }
    let scale = h.max_abs().max(f64::MIN_POSITIVE);
    let mut eig = Vec::with_capacity(n);
    let mut hi = n;
    let mut sweeps = 0usize;
    while hi > 0 {
        // deflate converged subdiagonals at the bottom of the active block
        let mut lo = hi - 1;
        while lo > 0 {
            let subn = a[lo * n + lo - 1].norm();
            let mut thr = f64::EPSILON * (a[(lo - 1) * n + lo - 1].norm() + a[lo * n + lo].norm());
            if thr == 0.0 {
                thr = f64::EPSILON * scale;
            }
            if subn <= thr {
                a[lo * n + lo - 1] = zero;
                break;
            }
            lo -= 1;
        }
        if hi - lo == 1 {
            eig.push(a[(hi - 1) * n + hi - 1]);
            hi -= 1;
            sweeps = 0;
            continue;
        }
        if hi - lo == 2 {
            let i = hi - 2;
            let (l1, l2) = eig_2x2(
                a[i * n + i],
                a[i * n + i + 1],
                a[(i + 1) * n + i],
                a[(i + 1) * n + i + 1],
            );
            eig.push(l1);
            eig.push(l2);
            hi -= 2;
            sweeps = 0;
            continue;
        }
        sweeps += 1;
        if sweeps > MAX_QR_SWEEPS_PER_EIGENVALUE {
            return Err(Error::EigenNoConvergence {
                iterations: sweeps,
                context: "shifted QR on the Hessenberg form",
            });
        }
        let mu = if sweeps.is_multiple_of(12) {
            // exceptional shift to break stalls
            a[(hi - 1) * n + hi - 1] + Complex64::new(0.75 * a[(hi - 1) * n + hi - 2].norm(), 0.0)
        } else {
            let i = hi - 2;
            let (l1, l2) = eig_2x2(
                a[i * n + i],
                a[i * n + i + 1],
                a[(i + 1) * n + i],
                a[(i + 1) * n + i + 1],
            );
            let dd = a[(hi - 1) * n + hi - 1];
            if (l1 - dd).norm() <= (l2 - dd).norm() {
                l1
            } else {
                l2
            }
        };
        // explicit shifted QR step on the active block: H - mu = QR, H <- RQ + mu
        for i in lo..hi {
            a[i * n + i] -= mu;
        }
        let mut rot = Vec::with_capacity(hi - lo - 1);
        for i in lo..hi - 1 {
            let (c, s) = givens(a[i * n + i], a[(i + 1) * n + i]);
            for j in i..hi {
                let t1 = a[i * n + j];
                let t2 = a[(i + 1) * n + j];
                a[i * n + j] = t1 * c + s * t2;
                a[(i + 1) * n + j] = t2 * c - s.conj() * t1;
            }
            a[(i + 1) * n + i] = zero;
            rot.push((c, s));
        }
        for (idx, &(c, s)) in rot.iter().enumerate() {
            let i = lo + idx;
            let rmax = (i + 2).min(hi);
            for r in lo..rmax {
                let t1 = a[r * n + i];
                let t2 = a[r * n + i + 1];
                a[r * n + i] = t1 * c + t2 * s.conj();
                a[r * n + i + 1] = t2 * c - t1 * s;
            }
        }
        for i in lo..hi {
            a[i * n + i] += mu;
        }
    }
    eig.sort_by(|x, y| {
        (x.re, x.im)
            .partial_cmp(&(y.re, y.im))
            .expect("finite eigenvalues")
    });
    Ok(eig)
}

/// LU factorization of a complex matrix with partial pivoting.
///
/// A positive `pivot_floor` replaces vanishing pivots instead of failing,
/// which is what inverse iteration wants when the shift is (numerically) an
/// exact eigenvalue.
pub(crate) struct CLu {
    n: usize,
    lu: Vec<Complex64>,
    piv: Vec<usize>,
}

pub(crate) fn clu_factor(a: &CMat, pivot_floor: f64) -> Result<CLu> {
    let n = a.n;
    let mut lu = a.data.clone();
    let mut piv = vec![0usize; n];
    for k in 0..n {
        let mut pr = k;
        let mut pm = lu[k * n + k].norm();
        for r in k + 1..n {
            let m = lu[r * n + k].norm();
            if m > pm {
                pm = m;
                pr = r;
            }
        }
        piv[k] = pr;
        if pr != k {
            for j in 0..n {
                lu.swap(k * n + j, pr * n + j);
            }
        }
        let mut pivot = lu[k * n + k];
        if pivot.norm() < pivot_floor {
            pivot = if pivot.norm() == 0.0 {
                Complex64::new(pivot_floor, 0.0)
            } else {
                pivot * (pivot_floor / pivot.norm())
            };
            lu[k * n + k] = pivot;
        } else if pivot.norm() == 0.0 {
            return Err(Error::SingularMatrix);
        }
        for r in k + 1..n {
            let f = lu[r * n + k] / pivot;
            lu[r * n + k] = f;
            for j in k + 1..n {
                let t = lu[k * n + j];
                lu[r * n + j] -= f * t;
            }
        }
    }
    Ok(CLu { n, lu, piv })
}

impl CLu {
    pub(crate) fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
        }
        for k in 0..n {
            let t = x[k];
            for r in k + 1..n {
                x[r] -= self.lu[r * n + k] * t;
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..n {
                s -= self.lu[k * n + j] * x[j];
            }
            x[k] = s / self.lu[k * n + k];
        }
        x
    }
}

fn normalize_by_largest(x: &mut [Complex64]) {
    let mut idx = 0;
    let mut best = 0.0;
    for (i, v) in x.iter().enumerate() {
        let m = v.norm();
        if m > best {
            best = m;
            idx = i;
        }
    }
    if best > 0.0 {
        let pivot = x[idx];
        for v in x.iter_mut() {
            *v /= pivot;
        }
    }
}

/// One eigenvector of `a` for the (approximate) eigenvalue `mu`, computed by
/// inverse iteration. The returned vector is normalized so its largest
/// component is exactly `1`, which also fixes the phase.
pub fn inverse_iteration(a: &CMat, mu: Complex64, seed: u64) -> Result<Vec<Complex64>> {
    let n = a.n;
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = a.max_abs().max(1.0);
    let floor = f64::EPSILON * scale * (n as f64);
    let mut best: Option<(f64, Vec<Complex64>)> = None;
    for attempt in 0..4u64 {
        let kick = attempt as f64 * 1e-11 * scale;
        let shift = mu + Complex64::new(kick, 0.5 * kick);
        let mut shifted = a.clone();
        for i in 0..n {
            let d = shifted.get(i, i);
            shifted.set(i, i, d - shift);
        }
        let lu = clu_factor(&shifted, floor)?;
        let mut rng = SplitMix64::new(seed ^ attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut x: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)))
            .collect();
        normalize_by_largest(&mut x);
        for _ in 0..5 {
            x = lu.solve(&x);
            normalize_by_largest(&mut x);
        }
        let ax = a.mul_vec(&x);
        let res = (0..n)
            .map(|i| (ax[i] - mu * x[i]).norm())
            .fold(0.0, f64::max);
        if best.as_ref().is_none_or(|(b, _)| res < *b) {
            best = Some((res, x));
        }
        if best.as_ref().expect("just set").0 <= 1e-12 * scale {
            break;
        }
    }
    let (res, x) = best.expect("at least one attempt");
    if res <= 1e-7 * scale {
        Ok(x)
    } else {
        Err(Error::EigenNoConvergence {
            iterations: 4,
            context: "inverse iteration",
        })
    }
}
