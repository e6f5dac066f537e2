//! Hidden sl(2) structure of the decoupled fourth-order operator.
//!
//! The generators
//!
//! ```text
//!   J+ = z^2 d/dz - n z,    J0 = z d/dz - n/2,    J- = d/dz
//! ```
//!
//! satisfy `[J+, J-] = -2 J0`, `[J+-, J0] = -+ J+-` and preserve the
//! polynomials of degree at most `n`. Any second-order bilinear combination
//! of them therefore has a finite invariant polynomial subspace; this module
//! builds that generic operator, builds the vibronic fourth-order operator,
//! checks the algebraization conditions on its lower-order coefficients, and
//! projects it onto the monomial basis `{1, z, ..., z^n}` to extract the
//! admissible couplings `v^2` together with their kernel polynomials.

use num_complex::Complex64;

use crate::linalg::{hessenberg_eigenvalues, inverse_iteration, CMat, DMat};
use crate::model::{LevelParams, ModelParams};
use crate::polyop::{CPolynomial, DiffOperator, Polynomial};
use crate::{Error, Result};

/// Tolerance for pure coefficient-identity checks.
pub const COEFF_TOL: f64 = 1e-12;
/// Tolerance for eigenpair/kernel checks on the small projected problems.
pub const KERNEL_TOL: f64 = 1e-9;

/// The three sl(2) generators at weight `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sl2Generators {
    pub n: usize,
    pub jplus: DiffOperator,
    pub jzero: DiffOperator,
    pub jminus: DiffOperator,
}

/// Build the generators for the `(n + 1)`-dimensional polynomial module.
pub fn make_generators(n: usize) -> Sl2Generators {
    let nf = n as f64;
    Sl2Generators {
        n,
        jplus: DiffOperator::new(vec![
            Polynomial::new(vec![0.0, -nf]),
            Polynomial::monomial(2),
        ]),
        jzero: DiffOperator::new(vec![
            Polynomial::constant(-0.5 * nf),
            Polynomial::monomial(1),
        ]),
        jminus: DiffOperator::derivative(1),
    }
}

/// Coefficients of the generic second-order bilinear generator combination
/// `C_pp J+J+ + C_p0 J+J0 + C_pm J+J- + C_0m J0J- + C_mm J-J-
///  + C_p J+ + C_0 J0 + C_m J- + C`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QesCoefficients {
    pub c_pp: f64,
    pub c_p0: f64,
    pub c_pm: f64,
    pub c_0m: f64,
    pub c_mm: f64,
    pub c_p: f64,
    pub c_0: f64,
    pub c_m: f64,
    pub c: f64,
}

/// Expand the bilinear combination into `P4(z) d^2 + P3(z) d + P2(z)` and
/// cross-check the expansion against the closed-form coefficient polynomials
/// before returning it.
pub fn build_general_qes(c: &QesCoefficients, n: usize) -> Result<DiffOperator> {
    let g = make_generators(n);
    let mut op = DiffOperator::zero();
    let terms: [(f64, DiffOperator); 9] = [
        (c.c_pp, g.jplus.compose(&g.jplus)?),
        (c.c_p0, g.jplus.compose(&g.jzero)?),
        (c.c_pm, g.jplus.compose(&g.jminus)?),
        (c.c_0m, g.jzero.compose(&g.jminus)?),
        (c.c_mm, g.jminus.compose(&g.jminus)?),
        (c.c_p, g.jplus.clone()),
        (c.c_0, g.jzero.clone()),
        (c.c_m, g.jminus.clone()),
        (c.c, DiffOperator::identity()),
    ];
    for (w, t) in terms {
        if w != 0.0 {
            op = &op + &t.scale(w);
        }
    }
    let closed = qes_closed_form(c, n);
    let dist = op.coeff_distance(&closed);
    let scale = op.max_abs_coeff().max(closed.max_abs_coeff()).max(1.0);
    if dist > COEFF_TOL * scale {
        return Err(Error::ConsistencyCheck {
            what: "generator expansion vs closed-form coefficients",
            deviation: dist,
        });
    }
    Ok(op)
}

/// Closed-form coefficient polynomials of the generic combination.
fn qes_closed_form(c: &QesCoefficients, n: usize) -> DiffOperator {
    let nf = n as f64;
    let p4 = Polynomial::new(vec![c.c_mm, c.c_0m, c.c_pm, c.c_p0, c.c_pp]);
    let p3 = Polynomial::new(vec![
        c.c_m - 0.5 * nf * c.c_0m,
        c.c_0 - nf * c.c_pm,
        c.c_p + c.c_p0 * (1.0 - 1.5 * nf),
        c.c_pp * (2.0 - 2.0 * nf),
    ]);
    let p2 = Polynomial::new(vec![
        c.c - 0.5 * nf * c.c_0,
        0.5 * nf * nf * c.c_p0 - nf * c.c_p,
        c.c_pp * nf * (nf - 1.0),
    ]);
    DiffOperator::new(vec![p2, p3, p4])
}

/// The decoupled fourth-order operator for channel energies `(e1, e2)`,
/// slope difference `f` and squared coupling `v2`:
///
/// ```text
///   H = 1/4 d^4 - z d^3 + [z^2 + (f/2) z + (e1 + e2)/2 - 1] d^2
///       + [-f z^2 + (1 - e1 - e2) z] d + [f e2 z + (e1 e2 - v2)]
/// ```
pub fn decoupled_hamiltonian_v_squared(lp: &LevelParams, f: f64, v2: f64) -> DiffOperator {
    let (e1, e2) = (lp.e1, lp.e2);
    DiffOperator::new(vec![
        Polynomial::new(vec![e1 * e2 - v2, f * e2]),
        Polynomial::new(vec![0.0, 1.0 - e2 - e1, -f]),
        Polynomial::new(vec![0.5 * e1 + 0.5 * e2 - 1.0, 0.5 * f, 1.0]),
        Polynomial::new(vec![0.0, -1.0]),
        Polynomial::constant(0.25),
    ])
}

/// [`decoupled_hamiltonian_v_squared`] with `f` and `v` taken from the model
/// parameters.
pub fn decoupled_hamiltonian(lp: &LevelParams, mp: &ModelParams) -> DiffOperator {
    decoupled_hamiltonian_v_squared(lp, mp.slope_diff, mp.coupling * mp.coupling)
}

/// One of the three algebraization conditions on the lower-order coefficient
/// polynomials of a (up to) fourth-order operator.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    /// Which relation this is, e.g. `"b3 = -2(n-1) a4"`.
    pub relation: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    /// Both sides vanish, so the relation constrains nothing.
    pub trivially_zero: bool,
}

/// Report of [`qes_condition_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct QesConditionReport {
    pub n: usize,
    pub holds: bool,
    /// All three relations degenerated to `0 = 0`; nothing is pinned down.
    pub degenerate: bool,
    pub checks: [ConditionCheck; 3],
}

/// Check the hidden-algebraization conditions
/// `b3 = -2(n-1) a4`, `c2 = n(n-1) a4`, `c1 = -n[(n-1) a3 + b2]`
/// read off the `d^2`, `d^1`, `d^0` coefficient polynomials
/// `sum a_k z^k` (degree <= 4), `sum b_k z^k` (<= 3), `sum c_k z^k` (<= 2).
pub fn qes_condition_check(op: &DiffOperator, n: usize) -> Result<QesConditionReport> {
    let a = op.coeff(2);
    let b = op.coeff(1);
    let c = op.coeff(0);
    if a.degree().is_some_and(|d| d > 4)
        || b.degree().is_some_and(|d| d > 3)
        || c.degree().is_some_and(|d| d > 2)
    {
        return Err(Error::InvalidInput(
            "coefficient degrees exceed (4, 3, 2) for orders (2, 1, 0)".into(),
        ));
    }
    let nf = n as f64;
    let (a4, a3) = (a.coeff(4), a.coeff(3));
    let (b3, b2) = (b.coeff(3), b.coeff(2));
    let (c2, c1) = (c.coeff(2), c.coeff(1));
    let scale = op.max_abs_coeff().max(1.0) * (nf * nf).max(1.0);
    let tol = COEFF_TOL * scale;
    // a relation is vacuous when every coefficient entering it vanishes,
    // independently of the combinatorial n-factors
    let mk = |relation, lhs: f64, rhs: f64, participants: &[f64]| ConditionCheck {
        relation,
        lhs,
        rhs,
        satisfied: (lhs - rhs).abs() <= tol,
        trivially_zero: lhs.abs() <= tol && participants.iter().all(|p| p.abs() <= tol),
    };
    let checks = [
        mk("b3 = -2(n-1) a4", b3, -2.0 * (nf - 1.0) * a4, &[b3, a4]),
        mk("c2 = n(n-1) a4", c2, nf * (nf - 1.0) * a4, &[c2, a4]),
        mk(
            "c1 = -n[(n-1) a3 + b2]",
            c1,
            -nf * ((nf - 1.0) * a3 + b2),
            &[c1, a3, b2],
        ),
    ];
    Ok(QesConditionReport {
        n,
        holds: checks.iter().all(|c| c.satisfied),
        degenerate: checks.iter().all(|c| c.trivially_zero),
        checks,
    })
}

/// Matrix of an operator restricted to `span{1, z, ..., z^n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceProjection {
    pub n: usize,
    /// `(n+1) x (n+1)`; column `j` holds the coefficients of the image of
    /// `z^j`, truncated to degree `n`.
    pub matrix: DMat,
    /// Largest above-degree-`n` coefficient of any basis image, relative to
    /// the largest image coefficient.
    pub spill: f64,
    /// `spill <= 1e-10`.
    pub invariant: bool,
}

/// Project `op` onto the monomial basis of degree `<= n`.
pub fn invariant_subspace_projection(op: &DiffOperator, n: usize) -> SubspaceProjection {
    let dim = n + 1;
    let mut matrix = DMat::zeros(dim, dim);
    let mut spill: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for j in 0..dim {
        let img = op.apply(&Polynomial::monomial(j));
        scale = scale.max(img.max_abs_coeff());
        for (k, &c) in img.coeffs().iter().enumerate() {
            if k < dim {
                matrix.set(k, j, c);
            } else {
                spill = spill.max(c.abs());
            }
        }
    }
    let spill = spill / scale;
    SubspaceProjection {
        n,
        matrix,
        spill,
        invariant: spill <= 1e-10,
    }
}

/// One admissible coupling of level `n` with its kernel polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingBranch {
    pub n: usize,
    /// Admissible squared coupling `v^2 = e1 e2 + mu` for an eigenvalue `mu`
    /// of the projected operator. A nonzero imaginary part can occur (the
    /// projected matrix is not symmetric); such branches are unphysical.
    pub v_squared: Complex64,
    /// Monic kernel polynomial, when the eigenvector is real.
    pub kernel: Option<Polynomial>,
    /// Roots of the kernel polynomial (complex allowed).
    pub roots: Vec<Complex64>,
    /// Real `v^2 >= 0`.
    pub physical: bool,
    /// The eigenvector has degree `< n`, so the degree-`n` ansatz does not
    /// reach this state (happens when the slope difference vanishes).
    pub degree_deficient: bool,
    /// Number of eigenvalues clustered with this one.
    pub multiplicity: usize,
}

impl CouplingBranch {
    /// `v = sqrt(v^2)` for physical branches.
    pub fn coupling(&self) -> Option<f64> {
        self.physical.then(|| self.v_squared.re.max(0.0).sqrt())
    }

    /// Relative residual of `H(v^2) y = 0` for this branch's kernel,
    /// reconstructed from the roots when the kernel is complex.
    pub fn kernel_residual(&self, lp: &LevelParams, slope_diff: f64) -> f64 {
        let y = match &self.kernel {
            Some(k) => CPolynomial::from_real(k),
            None => CPolynomial::monic_from_roots(&self.roots),
        };
        kernel_residual_impl(&y, self.v_squared, lp, slope_diff)
    }
}

fn kernel_residual_impl(y: &CPolynomial, v2: Complex64, lp: &LevelParams, slope_diff: f64) -> f64 {
    // H(v2) y = H(0) y - v2 y, which keeps everything in real operator
    // applications even for complex v2 and complex y.
    let h0 = decoupled_hamiltonian_v_squared(lp, slope_diff, 0.0);
    let yr = y.real_part();
    let yi = y.imag_part();
    let hr = h0.apply(&yr);
    let hi = h0.apply(&yi);
    let len = hr.coeffs().len().max(hi.coeffs().len()).max(y.coeffs.len());
    let mut max_res: f64 = 0.0;
    for k in 0..len {
        let yk = Complex64::new(yr.coeff(k), yi.coeff(k));
        let hk = Complex64::new(hr.coeff(k), hi.coeff(k));
        max_res = max_res.max((hk - v2 * yk).norm());
    }
    let scale = h0.max_abs_coeff().max(v2.norm()).max(1.0) * y.max_abs().max(1.0);
    max_res / scale
}

/// All admissible couplings of level `n`: the eigenvalues `mu` of the
/// projected operator with its scalar constant removed give
/// `v^2 = e1 e2 + mu`, and the eigenvectors read as coefficient vectors are
/// the kernel polynomials. Branches with negative or complex `v^2` are
/// returned flagged, not suppressed; the model coupling in `mp` is ignored.
pub fn allowed_couplings(n: usize, mp: &ModelParams) -> Result<Vec<CouplingBranch>> {
    let lp = LevelParams::for_level(n, mp);
    let h0 = decoupled_hamiltonian_v_squared(&lp, mp.slope_diff, 0.0);
    let proj = invariant_subspace_projection(&h0, n);
    let dim = n + 1;
    let e1e2 = lp.e1 * lp.e2;
    // remove the scalar constant term (e1 e2 at v = 0)
    let a0 = CMat::from_fn(dim, |i, j| {
        let x = proj.matrix.get(i, j) - if i == j { e1e2 } else { 0.0 };
        Complex64::new(x, 0.0)
    });
    let eigs = hessenberg_eigenvalues(&a0)?;
    let scale = a0.max_abs().max(1.0);
    let mut branches = Vec::with_capacity(dim);
    for (idx, &mu) in eigs.iter().enumerate() {
        let multiplicity = eigs
            .iter()
            .filter(|&&m| (m - mu).norm() <= 1e-8 * scale)
            .count();
        let seed = 0x5EED_0000_0000_0000u64 ^ ((n as u64) << 32) ^ idx as u64;
        let x = inverse_iteration(&a0, mu, seed)?;
        let xmax = x.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        // highest coefficient that is numerically present
        let top = (0..dim)
            .rev()
            .find(|&k| x[k].norm() > 1e-12 * xmax)
            .unwrap_or(0);
        let lead = x[top];
        let monic: Vec<Complex64> = x[..=top].iter().map(|&c| c / lead).collect();
        let y = CPolynomial::new(monic);
        let kernel = y.realify(1e-9);
        let roots = if y.coeffs.len() > 1 {
            crate::polyop::croots(&y.coeffs)?
        } else {
            Vec::new()
        };
        let v_squared = Complex64::new(e1e2, 0.0) + mu;
        let physical = v_squared.im.abs() <= KERNEL_TOL * scale && v_squared.re >= -KERNEL_TOL;
        branches.push(CouplingBranch {
            n,
            v_squared,
            kernel,
            roots,
            physical,
            degree_deficient: top < n,
            multiplicity,
        });
    }
    branches.sort_by(|a, b| {
        (a.v_squared.re, a.v_squared.im)
            .partial_cmp(&(b.v_squared.re, b.v_squared.im))
            .expect("finite couplings")
    });
    Ok(branches)
}
