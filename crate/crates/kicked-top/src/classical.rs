//! Classical limit of the kicked top: an area-preserving map on the
//! unit sphere for the scaled spin expectation (X, Y, Z) = <J>/j.
//!
//! One kick-plus-rotation period sends (X, Y, Z) to
//!   X' = (X cos a + Z sin a) cos(arg) - Y sin(arg)
//!   Y' = (X cos a + Z sin a) sin(arg) + Y cos(arg)
//!   Z' = Z cos a - X sin a
//! with arg = k (Z cos a - X sin a). Unlike its quantum counterpart the
//! map is not periodic in k; that contrast is part of the test suite.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Point on the unit sphere; construction and every map step enforce
/// |X^2 + Y^2 + Z^2 - 1| <= 1e-12.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpherePoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SpherePoint {
    pub fn new(x: f64, y: f64, z: f64) -> Result<SpherePoint> {
        let p = SpherePoint { x, y, z };
        if p.norm_defect() > 1e-12 {
            return Err(Error::Domain(format!(
                "point ({x}, {y}, {z}) is off the unit sphere by {:.3e}",
                p.norm_defect()
            )));
        }
        Ok(p)
    }

    pub fn from_angles(theta: f64, phi: f64) -> SpherePoint {
        SpherePoint {
            x: theta.sin() * phi.cos(),
            y: theta.sin() * phi.sin(),
            z: theta.cos(),
        }
    }

    /// (theta, phi) with theta in [0, pi] and phi in [0, 2 pi).
    pub fn to_angles(&self) -> (f64, f64) {
        let theta = self.z.clamp(-1.0, 1.0).acos();
        let phi = self.y.atan2(self.x).rem_euclid(2.0 * std::f64::consts::PI);
        (theta, phi)
    }

    pub fn norm_defect(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z - 1.0).abs()
    }

    fn renormalized(self) -> SpherePoint {
        let n = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        SpherePoint {
            x: self.x / n,
            y: self.y / n,
            z: self.z / n,
        }
    }

    pub fn distance(&self, other: &SpherePoint) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2))
            .sqrt()
    }
}

/// One map step; the boolean records whether the result had to be
/// renormalized (norm drift above 1e-12).
pub fn classical_step_recorded(p: SpherePoint, k: f64, alpha: f64) -> (SpherePoint, bool) {
    let (ca, sa) = (alpha.cos(), alpha.sin());
    let z_new = p.z * ca - p.x * sa;
    let planar = p.x * ca + p.z * sa;
    let arg = k * z_new;
    let (c, s) = (arg.cos(), arg.sin());
    let next = SpherePoint {
        x: planar * c - p.y * s,
        y: planar * s + p.y * c,
        z: z_new,
    };
    if next.norm_defect() > 1e-12 {
        (next.renormalized(), true)
    } else {
        (next, false)
    }
}

/// One map step (renormalization handled silently when needed).
pub fn classical_step(p: SpherePoint, k: f64, alpha: f64) -> SpherePoint {
    classical_step_recorded(p, k, alpha).0
}

/// n successive images of p0, plus the number of renormalization events.
pub fn trajectory_recorded(
    p0: SpherePoint,
    k: f64,
    alpha: f64,
    n: usize,
) -> Result<(Vec<SpherePoint>, usize)> {
    if n == 0 {
        return Err(Error::Domain("trajectory needs n >= 1".into()));
    }
    let mut points = Vec::with_capacity(n);
    let mut renorms = 0;
    let mut p = p0;
    for _ in 0..n {
        let (next, renormed) = classical_step_recorded(p, k, alpha);
        if renormed {
            renorms += 1;
        }
        if next.norm_defect() > 1e-9 {
            return Err(Error::Numerical(format!(
                "classical trajectory left the sphere (defect {:.3e})",
                next.norm_defect()
            )));
        }
        points.push(next);
        p = next;
    }
    Ok((points, renorms))
}

/// n successive images of p0.
pub fn trajectory(p0: SpherePoint, k: f64, alpha: f64, n: usize) -> Result<Vec<SpherePoint>> {
    trajectory_recorded(p0, k, alpha, n).map(|(points, _)| points)
}

/// Phase portrait: n_init initial points sampled uniformly on the
/// sphere (uniform phi, uniform cos theta, fixed seed), each iterated
/// n_iter times; trajectories are concatenated in sampling order.
pub fn phase_portrait(
    k: f64,
    alpha: f64,
    n_init: usize,
    n_iter: usize,
    seed: u64,
) -> Result<Vec<SpherePoint>> {
    if n_init == 0 || n_iter == 0 {
        return Err(Error::Domain("phase portrait needs n_init, n_iter >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut initials = Vec::with_capacity(n_init);
    for _ in 0..n_init {
        let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        let cos_theta: f64 = rng.gen_range(-1.0..=1.0);
        let sin_theta = (1.0 - cos_theta * cos_theta).sqrt();
        initials.push(SpherePoint {
            x: sin_theta * phi.cos(),
            y: sin_theta * phi.sin(),
            z: cos_theta,
        });
    }
    let orbits: Result<Vec<Vec<SpherePoint>>> = initials
        .into_par_iter()
        .map(|p0| trajectory(p0, k, alpha, n_iter))
        .collect();
    Ok(orbits?.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn sphere_point_validation() {
        assert!(SpherePoint::new(1.0, 0.0, 0.0).is_ok());
        assert!(SpherePoint::new(0.6, 0.8, 0.0).is_ok());
        assert!(SpherePoint::new(0.6, 0.8, 0.1).is_err());
        let p = SpherePoint::from_angles(1.1, 2.2);
        assert!(p.norm_defect() < 1e-15);
        let (theta, phi) = p.to_angles();
        assert_abs_diff_eq!(theta, 1.1, epsilon = 1e-14);
        assert_abs_diff_eq!(phi, 2.2, epsilon = 1e-14);
    }

    #[test]
    fn zero_kick_is_pure_rotation() {
        let p = SpherePoint::new(0.6, 0.8, 0.0).unwrap();
        let next = classical_step(p, 0.0, PI / 2.0);
        assert_abs_diff_eq!(next.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(next.y, 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(next.z, -0.6, epsilon = 1e-15);
    }

    #[test]
    fn simplified_map_at_alpha_pi_half() {
        for (p, k) in [
            (SpherePoint::new(0.6, 0.8, 0.0).unwrap(), 3.3),
            (SpherePoint::new(0.0, 0.0, 1.0).unwrap(), 1.1),
            (SpherePoint::from_angles(2.0, 0.3), 7.0),
        ] {
            let next = classical_step(p, k, PI / 2.0);
            let arg = k * p.x;
            assert_abs_diff_eq!(next.x, p.z * arg.cos() + p.y * arg.sin(), epsilon = 1e-14);
            assert_abs_diff_eq!(next.y, -p.z * arg.sin() + p.y * arg.cos(), epsilon = 1e-14);
            assert_abs_diff_eq!(next.z, -p.x, epsilon = 1e-15);
        }
    }

    #[test]
    fn one_step_oracle() {
        let p = SpherePoint::new(0.6, 0.8, 0.0).unwrap();
        let next = classical_step(p, 7.0, PI / 2.0);
        assert_abs_diff_eq!(next.x, -0.697_260_617_930_870_6, epsilon = 1e-14);
        assert_abs_diff_eq!(next.y, -0.39220865707255953, epsilon = 1e-14);
        assert_abs_diff_eq!(next.z, -0.6, epsilon = 1e-15);
    }

    #[test]
    fn trajectory_basics() {
        let p = SpherePoint::new(0.6, 0.8, 0.0).unwrap();
        let single = trajectory(p, 2.0, 0.9, 1).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0], classical_step(p, 2.0, 0.9));
        assert!(trajectory(p, 2.0, 0.9, 0).is_err());

        // zero kick: the orbit is the y-rotation circle, so Y is conserved
        let orbit = trajectory(p, 0.0, PI / 2.0, 50).unwrap();
        for q in &orbit {
            assert_abs_diff_eq!(q.y, 0.8, epsilon = 1e-12);
            assert!(q.norm_defect() < 1e-12);
        }
    }

    /// Median nearest-neighbor distance inside an orbit: small for points
    /// crowded onto a 1-D invariant curve, large for 2-D chaotic filling.
    fn median_nn(points: &[SpherePoint]) -> f64 {
        let mut nn: Vec<f64> = points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                points
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, q)| p.distance(q))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        nn.sort_by(|a, b| a.partial_cmp(b).unwrap());
        nn[nn.len() / 2]
    }

    #[test]
    fn small_kick_orbit_lies_on_a_curve() {
        let p = SpherePoint::new(0.6, 0.8, 0.0).unwrap();
        let orbit = trajectory(p, 0.5, PI / 2.0, 600).unwrap();
        assert!(median_nn(&orbit) < 0.03);
    }

    #[test]
    fn portrait_regular_versus_chaotic() {
        let frac_regular = |k: f64| {
            let n_init = 40;
            let n_iter = 300;
            let points = phase_portrait(k, PI / 2.0, n_init, n_iter, 1).unwrap();
            let regular = points
                .chunks(n_iter)
                .filter(|orbit| median_nn(orbit) < 0.03)
                .count();
            regular as f64 / n_init as f64
        };
        assert!(frac_regular(0.5) >= 0.9, "k = 0.5 should be mostly regular");
        assert!(frac_regular(7.0) <= 0.2, "k = 7 should be predominantly chaotic");
    }

    #[test]
    fn portrait_deterministic_and_on_sphere() {
        let a = phase_portrait(3.0, PI / 2.0, 10, 50, 99).unwrap();
        let b = phase_portrait(3.0, PI / 2.0, 10, 50, 99).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.norm_defect() < 1e-12));
        let c = phase_portrait(3.0, PI / 2.0, 10, 50, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn long_run_norm_conservation() {
        let p = SpherePoint::new(0.6, 0.8, 0.0).unwrap();
        let (orbit, renorms) = trajectory_recorded(p, 7.0, PI / 2.0, 100_000).unwrap();
        assert_eq!(renorms, 0, "no renormalization events expected");
        assert!(orbit.last().unwrap().norm_defect() <= 1e-9);
    }

    #[test]
    fn no_classical_k_periodicity() {
        let p = SpherePoint::new(0.6, 0.8, 0.0).unwrap();
        let a = trajectory(p, 7.0, PI / 2.0, 20).unwrap();
        let b = trajectory(p, 7.0 + 4.0 * PI, PI / 2.0, 20).unwrap();
        let max_dist = a
            .iter()
            .zip(b.iter())
            .map(|(x, y)| x.distance(y))
            .fold(0.0, f64::max);
        assert!(max_dist > 0.1, "classical map must not repeat after 4 pi (got {max_dist})");
    }
}
