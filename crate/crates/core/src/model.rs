//! Dimensionful model inputs and the reduction to dimensionless form.
//!
//! The starting point is a pair of coupled channels
//!
//! ```text
//!   -hbar^2/(2m) psi1'' + (m W^2 x^2 / 2 - F1 x) psi1 + V psi2 = E psi1
//!   -hbar^2/(2m) psi2'' + (m W^2 x^2 / 2 - F2 x) psi2 + V psi1 = E psi2
//! ```
//!
//! Shifting `x = X + F2/(m W^2)` completes the square in the second channel,
//! rescaling `X = sqrt(hbar/(m W)) z` makes the coordinate dimensionless,
//! and the Gaussian gauge `psi = exp(-z^2/2) y` strips the asymptotic decay.
//! What survives are three dimensionless numbers,
//!
//! ```text
//!   F = (F2 - F1) / sqrt(hbar m W^3),   b = F2 / sqrt(m hbar W^3),
//!   v = |V| / (hbar W),
//! ```
//!
//! plus the per-channel shifted energies `E1`, `E2` of a level. Eliminating
//! `E` between their definitions gives `E1 - E2 = -F b` identically, which
//! is what [`LevelParams::for_level`] hard-codes. All spectral machinery
//! downstream works in `z`-space; units reappear only here.

use crate::{Error, Result};

/// Dimensionful inputs of the two-channel model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Particle mass `m > 0`.
    pub mass: f64,
    /// Reduced Planck constant `hbar > 0` (any consistent unit system).
    pub hbar: f64,
    /// Oscillator angular frequency `W > 0`.
    pub omega: f64,
    /// Linear slope of channel 1.
    pub slope1: f64,
    /// Linear slope of channel 2 (the channel the coordinate shift targets).
    pub slope2: f64,
    /// Constant off-diagonal coupling energy `V`.
    pub coupling: f64,
}

impl PhysicalParams {
    pub fn new(
        mass: f64,
        hbar: f64,
        omega: f64,
        slope1: f64,
        slope2: f64,
        coupling: f64,
    ) -> Result<Self> {
        let p = PhysicalParams {
            mass,
            hbar,
            omega,
            slope1,
            slope2,
            coupling,
        };
        let all_finite = [mass, hbar, omega, slope1, slope2, coupling]
            .iter()
            .all(|x| x.is_finite());
        if !all_finite {
            return Err(Error::InvalidInput(
                "physical parameters must be finite".into(),
            ));
        }
        if mass <= 0.0 || hbar <= 0.0 || omega <= 0.0 {
            return Err(Error::InvalidInput(
                "mass, hbar and omega must be strictly positive".into(),
            ));
        }
        Ok(p)
    }

    /// Reduce to the dimensionless parameter set.
    pub fn to_dimensionless(&self) -> Result<ModelParams> {
        let scale = (self.hbar * self.mass * self.omega.powi(3)).sqrt();
        let f = (self.slope2 - self.slope1) / scale;
        let b = self.slope2 / scale;
        let v = self.coupling.abs() / (self.hbar * self.omega);
        if !(f.is_finite() && b.is_finite() && v.is_finite()) {
            return Err(Error::NonFinite("reducing physical parameters"));
        }
        ModelParams::new(f, b, v)
    }

    /// Exchange the two channel slopes. Running the pipeline on the swapped
    /// set produces the exceptional levels tied to the other component.
    pub fn channel_swap(&self) -> PhysicalParams {
        PhysicalParams {
            slope1: self.slope2,
            slope2: self.slope1,
            ..*self
        }
    }

    /// Map the dimensionless coordinate back to position:
    /// `x = sqrt(hbar/(m W)) z + F2/(m W^2)`.
    pub fn physical_coordinate(&self, z: f64) -> f64 {
        (self.hbar / (self.mass * self.omega)).sqrt() * z
            + self.slope2 / (self.mass * self.omega * self.omega)
    }
}

/// Dimensionless model parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Slope difference `F`.
    pub slope_diff: f64,
    /// Shift `b` picked up by completing the square.
    pub shift: f64,
    /// Channel coupling `v >= 0` (its sign is a gauge on one component; only
    /// `v^2` enters the spectrum).
    pub coupling: f64,
}

impl ModelParams {
    pub fn new(slope_diff: f64, shift: f64, coupling: f64) -> Result<Self> {
        if !(slope_diff.is_finite() && shift.is_finite() && coupling.is_finite()) {
            return Err(Error::InvalidInput(
                "model parameters must be finite".into(),
            ));
        }
        if coupling < 0.0 {
            return Err(Error::InvalidInput(
                "the coupling is stored non-negative by convention".into(),
            ));
        }
        Ok(ModelParams {
            slope_diff,
            shift,
            coupling,
        })
    }

    /// A physical realization with `m = hbar = W = 1`, so that
    /// `to_dimensionless` returns exactly these parameters back.
    pub fn canonical_physical(&self) -> PhysicalParams {
        PhysicalParams {
            mass: 1.0,
            hbar: 1.0,
            omega: 1.0,
            slope1: self.shift - self.slope_diff,
            slope2: self.shift,
            coupling: self.coupling,
        }
    }
}

/// Per-level shifted channel energies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelParams {
    pub n: usize,
    /// Shifted energy of the slope channel; `e1 = e2 - F b`.
    pub e1: f64,
    /// Shifted energy of the square-completed channel; `e2 = n` exactly on
    /// the exceptional branch.
    pub e2: f64,
}

impl LevelParams {
    /// Exceptional-level parameters: `e2 = n`, `e1 = n - F b`.
    pub fn for_level(n: usize, mp: &ModelParams) -> LevelParams {
        let e2 = n as f64;
        LevelParams {
            n,
            e1: e2 - mp.slope_diff * mp.shift,
            e2,
        }
    }

    /// Arbitrary channel energies, for probing the operator away from the
    /// exceptional branch.
    pub fn with_energies(n: usize, e1: f64, e2: f64) -> LevelParams {
        LevelParams { n, e1, e2 }
    }
}

/// An exceptional level expressed both ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceptionalEnergy {
    /// `epsilon = E/(hbar W) + 1/2 = (n + 1) - b^2/2`.
    pub epsilon: f64,
    /// `E = hbar W (n + 1/2) - F2^2 / (2 m W^2)`, computed independently of
    /// `epsilon`; the two agree identically up to rounding.
    pub energy: f64,
}

/// Exceptional energy of level `n` for the given physical parameters.
pub fn exceptional_energy(n: usize, p: &PhysicalParams) -> ExceptionalEnergy {
    let b = p.slope2 / (p.mass * p.hbar * p.omega.powi(3)).sqrt();
    let epsilon = (n as f64 + 1.0) - 0.5 * b * b;
    let energy = p.hbar * p.omega * (n as f64 + 0.5)
        - p.slope2 * p.slope2 / (2.0 * p.mass * p.omega * p.omega);
    ExceptionalEnergy { epsilon, energy }
}

/// Gaussian gauge factor `exp(-z^2/2)` connecting the polynomial factors to
/// the normalizable wavefunction components.
pub fn gauge_envelope(z: f64) -> f64 {
    (-0.5 * z * z).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0f64).max(a.abs()).max(b.abs())
    }

    #[test]
    fn reduction_examples() {
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        let mp = p.to_dimensionless().unwrap();
        assert_eq!((mp.slope_diff, mp.shift, mp.coupling), (0.0, 0.0, 0.0));

        let p = PhysicalParams::new(1.0, 1.0, 1.0, 0.0, 1.0, 0.5).unwrap();
        let mp = p.to_dimensionless().unwrap();
        assert_eq!((mp.slope_diff, mp.shift, mp.coupling), (1.0, 1.0, 0.5));

        // sqrt(hbar m W^3) = sqrt(1 * 2 * 8) = 4
        let p = PhysicalParams::new(2.0, 1.0, 2.0, 1.0, 5.0, 4.0).unwrap();
        let mp = p.to_dimensionless().unwrap();
        assert!(close(mp.slope_diff, 1.0, 1e-15));
        assert!(close(mp.shift, 1.25, 1e-15));
        assert!(close(mp.coupling, 2.0, 1e-15));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PhysicalParams::new(0.0, 1.0, 1.0, 0.0, 0.0, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 1.0, f64::NAN, 0.0, 0.0).is_err());
        assert!(ModelParams::new(0.0, 0.0, -1.0).is_err());
        assert!(ModelParams::new(f64::INFINITY, 0.0, 0.0).is_err());
    }

    #[test]
    fn level_params_examples() {
        let mp = ModelParams::new(0.0, 7.0, 0.0).unwrap();
        let lp = LevelParams::for_level(0, &mp);
        assert_eq!((lp.e1, lp.e2), (0.0, 0.0));

        let mp = ModelParams::new(1.0, 0.5, 0.0).unwrap();
        let lp = LevelParams::for_level(1, &mp);
        assert_eq!((lp.e1, lp.e2), (0.5, 1.0));

        let mp = ModelParams::new(0.0, 2.0, 0.0).unwrap();
        let lp = LevelParams::for_level(3, &mp);
        assert_eq!((lp.e1, lp.e2), (3.0, 3.0));
    }

    #[test]
    fn exceptional_energy_examples() {
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(exceptional_energy(0, &p).epsilon, 1.0);

        // b = 1: epsilon = (n + 1) - 1/2
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 0.0, 1.0, 0.0).unwrap();
        assert_eq!(exceptional_energy(2, &p).epsilon, 2.5);
        let e = exceptional_energy(1, &p);
        assert!(close(e.energy, 1.0, 1e-15));
        // the two routes agree: E = hbar W (epsilon - 1/2)
        assert!(close(e.energy, e.epsilon - 0.5, 1e-15));
    }

    #[test]
    fn epsilon_and_energy_agree_for_random_parameters() {
        let mut rng = SplitMix64::new(2024);
        for _ in 0..1000 {
            let p = PhysicalParams::new(
                rng.uniform(0.2, 3.0),
                rng.uniform(0.2, 3.0),
                rng.uniform(0.2, 3.0),
                rng.uniform(-2.0, 2.0),
                rng.uniform(-2.0, 2.0),
                rng.uniform(-2.0, 2.0),
            )
            .unwrap();
            let n = rng.uniform_usize(0, 12);
            let e = exceptional_energy(n, &p);
            let eps_from_energy = e.energy / (p.hbar * p.omega) + 0.5;
            assert!(
                close(eps_from_energy, e.epsilon, 1e-12),
                "routes disagree: {} vs {}",
                eps_from_energy,
                e.epsilon
            );
        }
    }

    #[test]
    fn level_params_match_their_definitions() {
        // Recompute e1, e2 from the defining expressions at the exceptional
        // energy and compare with the hard-coded relation e1 = e2 - F b.
        let mut rng = SplitMix64::new(99);
        for _ in 0..500 {
            let p = PhysicalParams::new(
                rng.uniform(0.3, 2.5),
                rng.uniform(0.3, 2.5),
                rng.uniform(0.3, 2.5),
                rng.uniform(-2.0, 2.0),
                rng.uniform(-2.0, 2.0),
                rng.uniform(-2.0, 2.0),
            )
            .unwrap();
            let n = rng.uniform_usize(0, 9);
            let energy = exceptional_energy(n, &p).energy;
            let hw = p.hbar * p.omega;
            let mw2 = p.mass * p.omega * p.omega;
            let e1_def =
                (energy - p.slope2 * p.slope2 / (2.0 * mw2) + p.slope1 * p.slope2 / mw2) / hw - 0.5;
            let e2_def = (energy + p.slope2 * p.slope2 / (2.0 * mw2)) / hw - 0.5;
            let lp = LevelParams::for_level(n, &p.to_dimensionless().unwrap());
            assert!(close(e1_def, lp.e1, 1e-12), "{e1_def} vs {}", lp.e1);
            assert!(close(e2_def, lp.e2, 1e-12), "{e2_def} vs {}", lp.e2);
        }
    }

    #[test]
    fn channel_swap_is_an_involution() {
        let p = PhysicalParams::new(1.5, 1.0, 0.7, 0.3, -0.9, 0.4).unwrap();
        let s = p.channel_swap();
        assert_eq!(s.slope1, -0.9);
        assert_eq!(s.slope2, 0.3);
        assert_eq!(s.channel_swap(), p);

        let fixed = PhysicalParams::new(1.0, 1.0, 1.0, 0.4, 0.4, 0.0).unwrap();
        assert_eq!(fixed.channel_swap(), fixed);
    }

    #[test]
    fn coordinate_map_examples() {
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(p.physical_coordinate(0.0), 0.0);
        assert_eq!(p.physical_coordinate(1.0), 1.0);

        let p = PhysicalParams::new(1.0, 1.0, 2.0, 0.0, 4.0, 0.0).unwrap();
        assert!(close(p.physical_coordinate(0.0), 1.0, 1e-15));
    }

    #[test]
    fn gauge_envelope_values() {
        assert_eq!(gauge_envelope(0.0), 1.0);
        assert!(gauge_envelope(40.0) == 0.0 || gauge_envelope(40.0) < 1e-300);
        assert!(close(gauge_envelope(1.0), (-0.5f64).exp(), 1e-15));
    }

    #[test]
    fn canonical_physical_round_trips() {
        let mp = ModelParams::new(-0.8, 1.3, 0.6).unwrap();
        let back = mp.canonical_physical().to_dimensionless().unwrap();
        assert_eq!(mp, back);
    }
}
