//! Root-system equations for the polynomial eigenfunctions.
//!
//! Writing the degree-`n` polynomial factor as `y1(z) = prod_i (z - z_i)`
//! turns the fourth-order eigenvalue problem into residue conditions at the
//! roots: the quotient `H y1 / y1` is meromorphic with simple poles at the
//! `z_i`, and every pole residue must vanish. What survives of the quotient
//! is linear in `z`; its slope fixes `e2 = n` and its constant term is the
//! restriction `v^2 - e1 e2 = -F sum z_i + n(n-1) + n(1 - e2 - e1)` tying
//! the coupling to the root set.
//!
//! The solver runs damped Newton iteration with the analytic Jacobian,
//! multistarted from the kernel polynomials of the invariant-subspace route
//! (falling back to perturbed Chebyshev spreads), and deduplicates converged
//! root sets under permutation.

use num_complex::Complex64;

use crate::linalg::{clu_factor, CMat};
use crate::model::{LevelParams, ModelParams};
use crate::polyop::{CPolynomial, Polynomial};
use crate::sl2::allowed_couplings;
use crate::{Error, Result};

/// Roots closer than this are treated as coincident and rejected.
pub const MIN_ROOT_SEPARATION: f64 = 1e-10;
/// A root set counts as converged when every residue is below this.
pub const CONVERGENCE_TOL: f64 = 1e-9;
/// Two solutions are the same when their sorted roots agree within this.
pub const DEDUP_TOL: f64 = 1e-7;

/// Whether two root multisets agree within `tol`, irrespective of order.
/// Greedy matching is enough at the separations this crate works with.
pub fn roots_match(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    'outer: for ra in a {
        for (k, rb) in b.iter().enumerate() {
            if !used[k] && (ra - rb).norm() <= tol {
                used[k] = true;
                continue 'outer;
            }
        }
        return false;
    }
    true
}

fn min_separation(roots: &[Complex64]) -> f64 {
    let mut sep = f64::INFINITY;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            sep = sep.min((roots[i] - roots[j]).norm());
        }
    }
    sep
}

fn check_separation(roots: &[Complex64]) -> Result<()> {
    let sep = min_separation(roots);
    if sep <= MIN_ROOT_SEPARATION {
        return Err(Error::CoincidentRoots {
            separation: sep,
            limit: MIN_ROOT_SEPARATION,
        });
    }
    Ok(())
}

fn poly_d2(z: Complex64, f: f64, e1: f64, e2: f64) -> Complex64 {
    z * z + z * (0.5 * f) + (0.5 * (e1 + e2) - 1.0)
}

fn poly_d1(z: Complex64, f: f64, e1: f64, e2: f64) -> Complex64 {
    z * z * (-f) + z * (1.0 - e2 - e1)
}

/// Residue of `H y1 / y1` at every root, written exactly as the nested sums
/// over mutually distinct indices:
///
/// ```text
///   R_i = 1/4 sum_{p!=l!=j!=i} 4 / [(z_i-z_p)(z_i-z_l)(z_i-z_j)]
///         - z_i sum_{l!=j!=i} 3 / [(z_i-z_l)(z_i-z_j)]
///         + [z_i^2 + (F/2) z_i + (e1+e2)/2 - 1] sum_{j!=i} 2 / (z_i-z_j)
///         + [-F z_i^2 + (1 - e2 - e1) z_i]
/// ```
///
/// Roots must be pairwise distinct.
pub fn bethe_residues(
    roots: &[Complex64],
    lp: &LevelParams,
    mp: &ModelParams,
) -> Result<Vec<Complex64>> {
    let n = roots.len();
    if n == 0 {
        return Err(Error::InvalidInput(
            "residues need at least one root".into(),
        ));
    }
    check_separation(roots)?;
    let f = mp.slope_diff;
    let (e1, e2) = (lp.e1, lp.e2);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let zi = roots[i];
        let mut quad = Complex64::new(0.0, 0.0);
        for p in 0..n {
            if p == i {
                continue;
            }
            for l in 0..n {
                if l == i || l == p {
                    continue;
                }
                for j in 0..n {
                    if j == i || j == p || j == l {
                        continue;
                    }
                    quad += ((zi - roots[p]) * (zi - roots[l]) * (zi - roots[j])).inv() * 4.0;
                }
            }
        }
        let mut triple = Complex64::new(0.0, 0.0);
        for l in 0..n {
            if l == i {
                continue;
            }
            for j in 0..n {
                if j == i || j == l {
                    continue;
                }
                triple += ((zi - roots[l]) * (zi - roots[j])).inv() * 3.0;
            }
        }
        let mut single = Complex64::new(0.0, 0.0);
        for j in 0..n {
            if j == i {
                continue;
            }
            single += (zi - roots[j]).inv() * 2.0;
        }
        out.push(
            quad * 0.25 - zi * triple + poly_d2(zi, f, e1, e2) * single + poly_d1(zi, f, e1, e2),
        );
    }
    Ok(out)
}

/// Analytic Jacobian `dR_i / dz_k` of [`bethe_residues`], obtained by
/// differentiating the sums termwise; written through the power sums
/// `S_m = sum_{j != i} (z_i - z_j)^{-m}`.
pub fn bethe_jacobian(roots: &[Complex64], lp: &LevelParams, mp: &ModelParams) -> Result<CMat> {
    let n = roots.len();
    if n == 0 {
        return Err(Error::InvalidInput(
            "the Jacobian needs at least one root".into(),
        ));
    }
    check_separation(roots)?;
    let f = mp.slope_diff;
    let (e1, e2) = (lp.e1, lp.e2);
    let mut jac = CMat::zeros(n);
    for i in 0..n {
        let zi = roots[i];
        let mut s = [Complex64::new(0.0, 0.0); 4]; // S1..S4
        for j in 0..n {
            if j == i {
                continue;
            }
            let w = (zi - roots[j]).inv();
            let mut acc = w;
            for slot in s.iter_mut() {
                *slot += acc;
                acc *= w;
            }
        }
        let [s1, s2, s3, s4] = s;
        let t = s1 * s1 - s2;
        let p2 = poly_d2(zi, f, e1, e2);
        let dp2 = zi * 2.0 + 0.5 * f;
        let dp1 = zi * (-2.0 * f) + (1.0 - e2 - e1);
        // dQ/dz_i = -3 S1^2 S2 + 3 S2^2 + 6 S1 S3 - 6 S4
        let dq = s1 * s1 * s2 * (-3.0) + s2 * s2 * 3.0 + s1 * s3 * 6.0 - s4 * 6.0;
        let dt = s1 * s2 * (-2.0) + s3 * 2.0;
        let diag = dq - t * 3.0 - zi * 3.0 * dt + dp2 * s1 * 2.0 - p2 * s2 * 2.0 + dp1;
        jac.set(i, i, diag);
        for k in 0..n {
            if k == i {
                continue;
            }
            let w = (zi - roots[k]).inv();
            let u1 = w * w;
            let u2 = u1 * w * 2.0;
            let u3 = u1 * u1 * 3.0;
            let dq_dk = (s1 * s1 * 3.0 - s2 * 3.0) * u1 - s1 * u2 * 3.0 + u3 * 2.0;
            let dt_dk = s1 * u1 * 2.0 - u2;
            jac.set(i, k, dq_dk - zi * 3.0 * dt_dk + p2 * u1 * 2.0);
        }
    }
    Ok(jac)
}

/// Right-hand side of the parameter restriction for a root set:
/// `-F sum z_i + n(n-1) + n(1 - e2 - e1)`.
pub fn restriction_rhs(roots: &[Complex64], lp: &LevelParams, mp: &ModelParams) -> Complex64 {
    let n = roots.len() as f64;
    let sum: Complex64 = roots.iter().sum();
    sum * (-mp.slope_diff) + n * (n - 1.0) + n * (1.0 - lp.e2 - lp.e1)
}

/// The squared coupling this root set admits: `v^2 = e1 e2 + restriction`.
pub fn admissible_v_squared(roots: &[Complex64], lp: &LevelParams, mp: &ModelParams) -> Complex64 {
    restriction_rhs(roots, lp, mp) + lp.e1 * lp.e2
}

/// `|v^2 - e1 e2 - restriction|`; at most [`CONVERGENCE_TOL`] marks a
/// physically consistent state for the coupling `v`.
pub fn constraint_residual(roots: &[Complex64], lp: &LevelParams, mp: &ModelParams, v: f64) -> f64 {
    (Complex64::new(v * v, 0.0) - admissible_v_squared(roots, lp, mp)).norm()
}

/// A converged root set with its derived data.
#[derive(Debug, Clone, PartialEq)]
pub struct BetheSolution {
    pub n: usize,
    /// Roots sorted by real part, then imaginary part.
    pub roots: Vec<Complex64>,
    pub level: LevelParams,
    /// Coupling of the model the solve ran under.
    pub v: f64,
    /// `|v^2 - e1 e2 - restriction|` for the model coupling.
    pub constraint_residual: f64,
    /// Squared coupling the root set itself admits.
    pub admissible_v_squared: Complex64,
    /// `prod_i (z - z_i)`, real part. Exact whenever the root set is closed
    /// under conjugation (see `y1_is_real`).
    pub y1: Polynomial,
    pub y1_is_real: bool,
    /// Largest residue magnitude at the returned roots.
    pub max_residue: f64,
    /// `max_residue <= 1e-9`.
    pub converged: bool,
}

impl BetheSolution {
    fn from_roots(
        mut roots: Vec<Complex64>,
        lp: &LevelParams,
        mp: &ModelParams,
        max_residue: f64,
    ) -> Self {
        roots.sort_by(|a, b| {
            (a.re, a.im)
                .partial_cmp(&(b.re, b.im))
                .expect("finite roots")
        });
        let product = CPolynomial::monic_from_roots(&roots);
        let y1_is_real = product.realify(1e-9).is_some();
        let y1 = product.real_part();
        let v = mp.coupling;
        BetheSolution {
            n: roots.len(),
            roots: roots.clone(),
            level: *lp,
            v,
            constraint_residual: constraint_residual(&roots, lp, mp, v),
            admissible_v_squared: admissible_v_squared(&roots, lp, mp),
            y1,
            y1_is_real,
            max_residue,
            converged: max_residue <= CONVERGENCE_TOL,
        }
    }

    /// Real admissible `v^2 >= 0` and converged.
    pub fn is_physical(&self) -> bool {
        self.converged
            && self.admissible_v_squared.im.abs() <= CONVERGENCE_TOL
            && self.admissible_v_squared.re >= -CONVERGENCE_TOL
    }
}

/// Both polynomial factors of the two components. The partner of the ansatz
/// polynomial comes from the square-completed channel:
/// `y2 = [y1''/2 - z y1' + e2 y1] / v`; the full components are
/// `psi_{1,2}(z) = exp(-z^2/2) y_{1,2}(z)`.
pub fn wavefunctions(sol: &BetheSolution) -> Result<(Polynomial, Polynomial)> {
    if sol.v == 0.0 {
        return Err(Error::ZeroCoupling);
    }
    let y1 = sol.y1.clone();
    let half_dd = y1.derivative().derivative().scale(0.5);
    let zd = &Polynomial::monomial(1) * &y1.derivative();
    let y2 = (&(&half_dd - &zd) + &y1.scale(sol.level.e2)).scale(1.0 / sol.v);
    Ok((y1, y2))
}

/// Diagnostics accumulated over a multistart solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveDiagnostics {
    pub seeds_tried: usize,
    pub converged_seeds: usize,
    pub failures: Vec<String>,
}

/// Result of [`solve_bethe`]: all distinct converged solutions, plus what
/// happened to the seeds that did not make it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveOutcome {
    pub solutions: Vec<BetheSolution>,
    pub diagnostics: SolveDiagnostics,
}

fn newton(
    seed: &[Complex64],
    lp: &LevelParams,
    mp: &ModelParams,
) -> std::result::Result<(Vec<Complex64>, f64), String> {
    let mut z = seed.to_vec();
    let mut rmax = f64::INFINITY;
    for _ in 0..60 {
        let r = bethe_residues(&z, lp, mp).map_err(|e| e.to_string())?;
        rmax = r.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        if rmax <= 1e-13 {
            break;
        }
        let jac = bethe_jacobian(&z, lp, mp).map_err(|e| e.to_string())?;
        let lu = clu_factor(&jac, 0.0).map_err(|e| format!("Jacobian: {e}"))?;
        let rhs: Vec<Complex64> = r.iter().map(|c| -c).collect();
        let step = lu.solve(&rhs);
        // damped update: halve the step until the residual stops growing
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..8 {
            let cand: Vec<Complex64> = z
                .iter()
                .zip(&step)
                .map(|(zi, di)| zi + di * alpha)
                .collect();
            if min_separation(&cand) <= MIN_ROOT_SEPARATION {
                alpha *= 0.5;
                continue;
            }
            if let Ok(rc) = bethe_residues(&cand, lp, mp) {
                let cmax = rc.iter().fold(0.0f64, |m, c| m.max(c.norm()));
                if cmax < rmax || alpha < 0.1 {
                    z = cand;
                    rmax = cmax;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(format!("stalled at residue {rmax:.3e}"));
        }
        let step_size = step.iter().fold(0.0f64, |m, c| m.max(c.norm())) * alpha;
        let scale = z.iter().fold(1.0f64, |m, c| m.max(c.norm()));
        if step_size <= 1e-15 * scale {
            let r = bethe_residues(&z, lp, mp).map_err(|e| e.to_string())?;
            rmax = r.iter().fold(0.0f64, |m, c| m.max(c.norm()));
            break;
        }
    }
    if rmax <= CONVERGENCE_TOL {
        Ok((z, rmax))
    } else {
        Err(format!("no convergence, residue {rmax:.3e}"))
    }
}

fn fallback_seeds(n: usize) -> Vec<Vec<Complex64>> {
    let mut rng = crate::rng::SplitMix64::new(0xBE7E ^ (n as u64) << 8);
    let mut seeds = Vec::new();
    for variant in 0..6 {
        let radius = 0.5 + 0.45 * variant as f64;
        let seed: Vec<Complex64> = (0..n)
            .map(|i| {
                let angle = std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
                Complex64::new(
                    radius * angle.cos() + rng.uniform(-0.05, 0.05),
                    rng.uniform(-0.05, 0.05) * if variant % 2 == 0 { 1.0 } else { 4.0 },
                )
            })
            .collect();
        seeds.push(seed);
    }
    seeds
}

/// Solve the residue system for level `n` (the residues do not involve the
/// coupling, so every converged root set is reported together with the
/// coupling it admits). Seeds default to the kernel-polynomial roots of
/// [`allowed_couplings`], with perturbed Chebyshev spreads as fallback.
/// Seeds that fail to converge end up in the diagnostics, not in an error.
pub fn solve_bethe(
    n: usize,
    lp: &LevelParams,
    mp: &ModelParams,
    seeds: Option<&[Vec<Complex64>]>,
) -> Result<SolveOutcome> {
    if n == 0 {
        return Err(Error::InvalidInput(
            "the root system is defined for n >= 1".into(),
        ));
    }
    let mut seed_list: Vec<Vec<Complex64>> = Vec::new();
    match seeds {
        Some(s) => seed_list.extend(s.iter().cloned()),
        None => {
            if let Ok(branches) = allowed_couplings(n, mp) {
                for br in branches {
                    if br.roots.len() == n && min_separation(&br.roots) > MIN_ROOT_SEPARATION {
                        seed_list.push(br.roots);
                    }
                }
            }
            if seed_list.is_empty() {
                seed_list = fallback_seeds(n);
            }
        }
    }
    let mut outcome = SolveOutcome::default();
    for seed in &seed_list {
        if seed.len() != n {
            outcome
                .diagnostics
                .failures
                .push(format!("seed of length {} skipped", seed.len()));
            continue;
        }
        outcome.diagnostics.seeds_tried += 1;
        match newton(seed, lp, mp) {
            Ok((roots, rmax)) => {
                outcome.diagnostics.converged_seeds += 1;
                let sol = BetheSolution::from_roots(roots, lp, mp, rmax);
                let dup = outcome
                    .solutions
                    .iter()
                    .any(|s| roots_match(&s.roots, &sol.roots, DEDUP_TOL));
                if !dup {
                    outcome.solutions.push(sol);
                }
            }
            Err(msg) => outcome.diagnostics.failures.push(msg),
        }
    }
    outcome.solutions.sort_by(|a, b| {
        let ka = (a.admissible_v_squared.re, a.admissible_v_squared.im);
        let kb = (b.admissible_v_squared.re, b.admissible_v_squared.im);
        ka.partial_cmp(&kb).expect("finite couplings")
    });
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::sl2::decoupled_hamiltonian;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_root_residue_closed_form() {
        let mp = ModelParams::new(1.0, 0.0, 0.0).unwrap();
        let lp = LevelParams::for_level(1, &mp); // e1 = e2 = 1
                                                 // all sums are empty: residue is -F z^2 + z (1 - e2 - e1)
        let r = bethe_residues(&[c(0.7, 0.0)], &lp, &mp).unwrap();
        let expect = -0.7f64 * 0.7 + 0.7 * (1.0 - 2.0);
        assert!((r[0] - c(expect, 0.0)).norm() < 1e-14);

        // z1 = 0 and z1 = (1 - e1 - e2)/F are the two zeros
        let r = bethe_residues(&[c(0.0, 0.0)], &lp, &mp).unwrap();
        assert!(r[0].norm() < 1e-14);
        let r = bethe_residues(&[c(-1.0, 0.0)], &lp, &mp).unwrap();
        assert!(r[0].norm() < 1e-14);
    }

    #[test]
    fn residues_match_operator_application() {
        // Independent oracle: R_i = (H y1)(z_i) / prod_{j != i} (z_i - z_j),
        // since y1 has a simple zero at z_i.
        let mut rng = SplitMix64::new(5150);
        for _ in 0..40 {
            let n = rng.uniform_usize(1, 6);
            let f = rng.uniform(-1.5, 1.5);
            let b = rng.uniform(-1.0, 1.0);
            let mp = ModelParams::new(f, b, rng.uniform(0.0, 2.0)).unwrap();
            let e1 = rng.uniform(-2.0, 2.0);
            let e2 = rng.uniform(-2.0, 2.0);
            let lp = LevelParams::with_energies(n, e1, e2);
            let mut roots: Vec<Complex64> = Vec::new();
            while roots.len() < n {
                let cand = c(rng.uniform(-2.0, 2.0), 0.0);
                if roots.iter().all(|r| (r - cand).norm() > 0.1) {
                    roots.push(cand);
                }
            }
            let res = bethe_residues(&roots, &lp, &mp).unwrap();
            let h = decoupled_hamiltonian(&lp, &mp);
            let y1 = CPolynomial::monic_from_roots(&roots).real_part();
            let hy = h.apply(&y1);
            for (i, &zi) in roots.iter().enumerate() {
                let mut denom = c(1.0, 0.0);
                for (j, &zj) in roots.iter().enumerate() {
                    if j != i {
                        denom *= zi - zj;
                    }
                }
                let oracle = hy.eval_complex(zi) / denom;
                let scale = oracle.norm().max(1.0);
                assert!(
                    (res[i] - oracle).norm() <= 1e-9 * scale,
                    "n = {n}: residue {} vs oracle {oracle}",
                    res[i]
                );
            }
        }
    }

    #[test]
    fn residues_permutation_equivariant() {
        let mp = ModelParams::new(0.8, -0.3, 0.1).unwrap();
        let lp = LevelParams::for_level(3, &mp);
        let roots = vec![c(0.3, 0.1), c(-0.9, 0.0), c(1.4, -0.2)];
        let res = bethe_residues(&roots, &lp, &mp).unwrap();
        let perm = vec![roots[2], roots[0], roots[1]];
        let res_p = bethe_residues(&perm, &lp, &mp).unwrap();
        for (a, b) in [(res_p[0], res[2]), (res_p[1], res[0]), (res_p[2], res[1])] {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn residues_reject_coincident_roots() {
        let mp = ModelParams::new(1.0, 0.0, 0.0).unwrap();
        let lp = LevelParams::for_level(2, &mp);
        let roots = vec![c(0.5, 0.0), c(0.5 + 1e-12, 0.0)];
        assert!(matches!(
            bethe_residues(&roots, &lp, &mp),
            Err(Error::CoincidentRoots { .. })
        ));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = SplitMix64::new(808);
        for _ in 0..20 {
            let n = rng.uniform_usize(1, 5);
            let mp = ModelParams::new(rng.uniform(-1.5, 1.5), rng.uniform(-1.0, 1.0), 0.0).unwrap();
            let lp = LevelParams::with_energies(n, rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
            let mut roots: Vec<Complex64> = Vec::new();
            while roots.len() < n {
                let cand = c(rng.uniform(-2.0, 2.0), rng.uniform(-0.5, 0.5));
                if roots.iter().all(|r| (r - cand).norm() > 0.2) {
                    roots.push(cand);
                }
            }
            let jac = bethe_jacobian(&roots, &lp, &mp).unwrap();
            let h = 1e-6;
            for k in 0..n {
                let mut plus = roots.clone();
                let mut minus = roots.clone();
                plus[k] += c(h, 0.0);
                minus[k] -= c(h, 0.0);
                let rp = bethe_residues(&plus, &lp, &mp).unwrap();
                let rm = bethe_residues(&minus, &lp, &mp).unwrap();
                for i in 0..n {
                    let fd = (rp[i] - rm[i]) / (2.0 * h);
                    let an = jac.get(i, k);
                    let scale = an.norm().max(fd.norm()).max(1.0);
                    assert!(
                        (fd - an).norm() <= 1e-5 * scale,
                        "dR_{i}/dz_{k}: {an} vs {fd}"
                    );
                }
            }
        }
    }

    #[test]
    fn solve_level_one_closed_form() {
        // F = 1, b = 0: e1 = e2 = 1; roots {0} and {-1}
        let mp = ModelParams::new(1.0, 0.0, 0.0).unwrap();
        let lp = LevelParams::for_level(1, &mp);
        let out = solve_bethe(1, &lp, &mp, None).unwrap();
        assert_eq!(out.solutions.len(), 2);
        let roots: Vec<Complex64> = out.solutions.iter().map(|s| s.roots[0]).collect();
        assert!(roots.iter().any(|r| r.norm() <= 1e-10));
        assert!(roots.iter().any(|r| (r - c(-1.0, 0.0)).norm() <= 1e-10));
        // the admissible couplings are v^2 = 0 (root 0) and v^2 = e1 (root -1)
        for sol in &out.solutions {
            let expect = if sol.roots[0].norm() <= 1e-9 {
                0.0
            } else {
                1.0
            };
            assert!((sol.admissible_v_squared - c(expect, 0.0)).norm() <= 1e-10);
            assert!(sol.is_physical());
        }
    }

    #[test]
    fn solve_level_one_zero_slope() {
        // F = 0: the single residue is z1 (1 - e1 - e2), so z1 = 0 only
        let mp = ModelParams::new(0.0, 0.4, 0.0).unwrap();
        let lp = LevelParams::for_level(1, &mp);
        let out = solve_bethe(1, &lp, &mp, None).unwrap();
        assert_eq!(out.solutions.len(), 1);
        assert!(out.solutions[0].roots[0].norm() <= 1e-12);
    }

    #[test]
    fn solve_level_two_zero_slope_matches_kernels() {
        // F = 0, n = 2: the full-degree kernel is z^2 - 1/2
        let mp = ModelParams::new(0.0, 0.7, 0.0).unwrap();
        let lp = LevelParams::for_level(2, &mp);
        let out = solve_bethe(2, &lp, &mp, None).unwrap();
        assert_eq!(out.solutions.len(), 1);
        let sol = &out.solutions[0];
        let r = 0.5f64.sqrt();
        assert!((sol.roots[0] - c(-r, 0.0)).norm() <= 1e-8);
        assert!((sol.roots[1] - c(r, 0.0)).norm() <= 1e-8);
        assert!(sol.admissible_v_squared.norm() <= 1e-9);
    }

    #[test]
    fn converged_solutions_annihilated_by_operator() {
        let mut rng = SplitMix64::new(99);
        for _ in 0..8 {
            let f = rng.sign() * rng.uniform(0.3, 1.3);
            let b = rng.uniform(-1.0, 1.0);
            let mp = ModelParams::new(f, b, 0.0).unwrap();
            for n in 1..=5 {
                let lp = LevelParams::for_level(n, &mp);
                let out = solve_bethe(n, &lp, &mp, None).unwrap();
                for sol in out.solutions.iter().filter(|s| s.is_physical()) {
                    let v2 = sol.admissible_v_squared.re;
                    let h = crate::sl2::decoupled_hamiltonian_v_squared(&lp, f, v2);
                    let residual = h.apply(&sol.y1).max_abs_coeff();
                    let scale = h.max_abs_coeff() * sol.y1.max_abs_coeff().max(1.0);
                    assert!(residual <= 1e-8 * scale, "n = {n}: |H y1| = {residual:e}");
                    // and the restriction holds with v = sqrt(v^2)
                    let res = constraint_residual(&sol.roots, &lp, &mp, v2.max(0.0).sqrt());
                    assert!(res <= 1e-9, "restriction residual {res:e}");
                }
            }
        }
    }

    #[test]
    fn solutions_match_subspace_kernels() {
        let mut rng = SplitMix64::new(1234);
        for _ in 0..5 {
            let f = rng.sign() * rng.uniform(0.4, 1.2);
            let b = rng.uniform(-0.8, 0.8);
            let mp = ModelParams::new(f, b, 0.0).unwrap();
            for n in 1..=4 {
                let lp = LevelParams::for_level(n, &mp);
                let kernels: Vec<Vec<Complex64>> = allowed_couplings(n, &mp)
                    .unwrap()
                    .into_iter()
                    .filter(|br| br.physical && br.roots.len() == n)
                    .map(|br| br.roots)
                    .collect();
                let out = solve_bethe(n, &lp, &mp, None).unwrap();
                let physical: Vec<&BetheSolution> =
                    out.solutions.iter().filter(|s| s.is_physical()).collect();
                assert_eq!(physical.len(), kernels.len(), "n = {n} f = {f} b = {b}");
                for k in &kernels {
                    assert!(
                        physical.iter().any(|s| roots_match(&s.roots, k, 1e-7)),
                        "kernel root set {k:?} not found by the solver"
                    );
                }
            }
        }
    }

    #[test]
    fn wavefunction_pair_solves_both_channel_equations() {
        // F = 1, b = 0, n = 1, branch v^2 = 1: y1 = z + 1, y2 = 1
        let mp = ModelParams::new(1.0, 0.0, 1.0).unwrap();
        let lp = LevelParams::for_level(1, &mp);
        let out = solve_bethe(1, &lp, &mp, None).unwrap();
        let sol = out
            .solutions
            .iter()
            .find(|s| s.constraint_residual <= 1e-9)
            .expect("the v^2 = 1 branch is consistent with v = 1");
        let (y1, y2) = wavefunctions(sol).unwrap();
        assert!((&y1 - &Polynomial::new(vec![1.0, 1.0])).max_abs_coeff() <= 1e-9);
        assert!((&y2 - &Polynomial::one()).max_abs_coeff() <= 1e-9);

        // both transformed channel equations hold at sample points:
        //   y1''/2 - z y1' + e2 y1 = v y2
        //   y2''/2 - z y2' + (F z + e1) y2 = v y1
        let mut rng = SplitMix64::new(31);
        let (f, v) = (mp.slope_diff, sol.v);
        for _ in 0..20 {
            let z = rng.uniform(-2.0, 2.0);
            let lhs1 = 0.5 * y1.derivative().derivative().eval(z) - z * y1.derivative().eval(z)
                + lp.e2 * y1.eval(z);
            let rhs1 = v * y2.eval(z);
            assert!((lhs1 - rhs1).abs() <= 1e-8 * rhs1.abs().max(1.0));
            let lhs2 = 0.5 * y2.derivative().derivative().eval(z) - z * y2.derivative().eval(z)
                + (f * z + lp.e1) * y2.eval(z);
            let rhs2 = v * y1.eval(z);
            assert!((lhs2 - rhs2).abs() <= 1e-8 * rhs2.abs().max(1.0));
        }
    }

    #[test]
    fn kernel_roots_satisfy_residue_equations() {
        let mut rng = SplitMix64::new(606);
        for _ in 0..6 {
            let f = rng.sign() * rng.uniform(0.4, 1.3);
            let b = rng.uniform(-1.0, 1.0);
            let mp = ModelParams::new(f, b, 0.0).unwrap();
            for n in 1..=6 {
                let lp = LevelParams::for_level(n, &mp);
                for br in crate::sl2::allowed_couplings(n, &mp).unwrap() {
                    if br.roots.len() != n || min_separation(&br.roots) <= MIN_ROOT_SEPARATION {
                        continue;
                    }
                    let res = bethe_residues(&br.roots, &lp, &mp).unwrap();
                    let worst = res.iter().fold(0.0f64, |m, r| m.max(r.norm()));
                    assert!(worst <= 1e-8, "n = {n}: residue {worst:e} at kernel roots");
                }
            }
        }
    }

    #[test]
    fn wavefunction_pair_consistent_at_higher_levels() {
        let mut rng = SplitMix64::new(11);
        for n in 2..=4 {
            let f = rng.sign() * rng.uniform(0.4, 1.2);
            let b = rng.uniform(-0.8, 0.8);
            let mp0 = ModelParams::new(f, b, 0.0).unwrap();
            let lp = LevelParams::for_level(n, &mp0);
            let Some(branch) = crate::sl2::allowed_couplings(n, &mp0)
                .unwrap()
                .into_iter()
                .filter(|br| br.physical && br.v_squared.re > 0.01)
                .max_by(|x, y| x.v_squared.re.partial_cmp(&y.v_squared.re).unwrap())
            else {
                continue;
            };
            let v = branch.coupling().unwrap();
            let mp = ModelParams::new(f, b, v).unwrap();
            let out = solve_bethe(n, &lp, &mp, None).unwrap();
            let sol = out
                .solutions
                .iter()
                .find(|s| s.constraint_residual <= 1e-9)
                .expect("the solved branch is consistent with its own coupling");
            let (y1, y2) = wavefunctions(sol).unwrap();
            for _ in 0..20 {
                let z = rng.uniform(-2.0, 2.0);
                let lhs1 = 0.5 * y1.derivative().derivative().eval(z) - z * y1.derivative().eval(z)
                    + lp.e2 * y1.eval(z);
                let rhs1 = v * y2.eval(z);
                assert!(
                    (lhs1 - rhs1).abs() <= 1e-8 * rhs1.abs().max(1.0),
                    "n = {n}: first channel equation violated at z = {z}"
                );
                let lhs2 = 0.5 * y2.derivative().derivative().eval(z) - z * y2.derivative().eval(z)
                    + (f * z + lp.e1) * y2.eval(z);
                let rhs2 = v * y1.eval(z);
                assert!(
                    (lhs2 - rhs2).abs() <= 1e-8 * rhs2.abs().max(1.0),
                    "n = {n}: second channel equation violated at z = {z}"
                );
            }
        }
    }

    #[test]
    fn wavefunctions_require_nonzero_coupling() {
        let mp = ModelParams::new(0.0, 0.4, 0.0).unwrap();
        let lp = LevelParams::for_level(1, &mp);
        let out = solve_bethe(1, &lp, &mp, None).unwrap();
        assert!(matches!(
            wavefunctions(&out.solutions[0]),
            Err(Error::ZeroCoupling)
        ));
    }

    #[test]
    fn empty_levels() {
        let mp = ModelParams::new(1.0, 0.0, 0.0).unwrap();
        let lp = LevelParams::for_level(0, &mp);
        assert!(solve_bethe(0, &lp, &mp, None).is_err());
        // the restriction at n = 0 with v = 0: |0 - 0 - 0| = 0
        assert_eq!(constraint_residual(&[], &lp, &mp, 0.0), 0.0);
    }
}
