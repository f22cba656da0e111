//! Plug-and-Play ADMM for
//!
//! ```text
//! min_u  μ Σ_l rank(R_l u) + ||u - v0||_0
//! ```
//!
//! split as `u = v` with scaled multiplier `b`:
//!
//! * `u` step: pixelwise closed form of the l0 + quadratic problem,
//! * `v` step: PLR denoising of `u - b` with `m t² = 2 μ / α`,
//! * `b` step: `b + v - u`.

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::lowrank::plr_denoise_guided;
use crate::patch::PatchGeometry;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmConfig {
    pub alpha: f64,
    pub t: f64,
    pub geometry: PatchGeometry,
    pub iterations: usize,
    mu: f64,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        Self::new(1.0 / 72.0, 7.5, PatchGeometry::default(), 50)
            .expect("default configuration is valid")
    }
}

impl AdmmConfig {
    /// `μ` is derived as `m t² α / 2`; it is never an independent input.
    pub fn new(alpha: f64, t: f64, geometry: PatchGeometry, iterations: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "alpha = {alpha} must be positive"
            )));
        }
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t = {t} must be non-negative"
            )));
        }
        geometry.validate()?;
        let mu = geometry.group as f64 * t * t * alpha / 2.0;
        Ok(Self {
            alpha,
            t,
            geometry,
            iterations,
            mu,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Residual magnitude below which the u step keeps the observation.
    pub fn keep_threshold(&self) -> f64 {
        (2.0 / self.alpha).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmmState {
    pub u: GrayImage,
    pub v: GrayImage,
    pub b: GrayImage,
    pub k: usize,
}

impl AdmmState {
    /// `v = init`, `b = 0`; `u` starts as a copy of `init` and is overwritten
    /// by the first step.
    pub fn new(init: GrayImage) -> Self {
        let b = GrayImage::zeros(init.width(), init.height());
        Self {
            u: init.clone(),
            v: init,
            b,
            k: 0,
        }
    }

    /// Performs one full u, v, b update.
    pub fn step(&mut self, v0: &GrayImage, cfg: &AdmmConfig) -> Result<()> {
        self.u = u_update(v0, &self.v, &self.b, cfg.alpha)?;
        self.v = v_update(&self.u, &self.b, cfg)?;
        self.b = b_update(&self.b, &self.v, &self.u)?;
        self.k += 1;
        Ok(())
    }
}

/// Keeps `v0` where it is within `√(2/α)` of `v + b`, otherwise takes `v + b`.
pub fn u_update(v0: &GrayImage, v: &GrayImage, b: &GrayImage, alpha: f64) -> Result<GrayImage> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "alpha = {alpha} must be positive"
        )));
    }
    v0.check_same_shape(v)?;
    v0.check_same_shape(b)?;
    let threshold = (2.0 / alpha).sqrt();
    let pixels = v0
        .pixels()
        .iter()
        .zip(v.pixels())
        .zip(b.pixels())
        .map(|((&obs, &vv), &bb)| {
            let target = vv + bb;
            if (target - obs).abs() < threshold {
                obs
            } else {
                target
            }
        })
        .collect();
    GrayImage::new(v0.width(), v0.height(), pixels)
}

/// PLR applied to `u_next - b`, which also serves as the matching guide.
pub fn v_update(u_next: &GrayImage, b: &GrayImage, cfg: &AdmmConfig) -> Result<GrayImage> {
    let noisy = u_next.zip_map(b, |u, b| u - b)?;
    plr_denoise_guided(&noisy, &noisy, &cfg.geometry, cfg.t)
}

pub fn b_update(b: &GrayImage, v_next: &GrayImage, u_next: &GrayImage) -> Result<GrayImage> {
    b.check_same_shape(v_next)?;
    b.check_same_shape(u_next)?;
    let pixels = b
        .pixels()
        .iter()
        .zip(v_next.pixels())
        .zip(u_next.pixels())
        .map(|((&bb, &vv), &uu)| bb + (vv - uu))
        .collect();
    GrayImage::new(b.width(), b.height(), pixels)
}

/// Runs `cfg.iterations` steps from `init` and returns the final state.
pub fn run_admm_state(v0: &GrayImage, cfg: &AdmmConfig, init: &GrayImage) -> Result<AdmmState> {
    v0.check_same_shape(init)?;
    if cfg.iterations > 0 {
        cfg.geometry.check_feasible(v0.width(), v0.height())?;
    }
    let mut state = AdmmState::new(init.clone());
    for _ in 0..cfg.iterations {
        state.step(v0, cfg)?;
    }
    Ok(state)
}

/// Final low-rank iterate `v`.
pub fn run_admm(v0: &GrayImage, cfg: &AdmmConfig, init: &GrayImage) -> Result<GrayImage> {
    Ok(run_admm_state(v0, cfg, init)?.v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lowrank::{plr_denoise, PlrConfig};
    use crate::rng::SplitMix64;

    fn random_image(w: usize, h: usize, rng: &mut SplitMix64) -> GrayImage {
        GrayImage::from_fn(w, h, |_, _| rng.next_f64() * 255.0).unwrap()
    }

    fn perturb(img: &GrayImage, amplitude: f64, rng: &mut SplitMix64) -> GrayImage {
        let noise = GrayImage::from_fn(img.width(), img.height(), |_, _| {
            (rng.next_f64() - 0.5) * amplitude
        })
        .unwrap();
        img + &noise
    }

    fn small_geometry() -> PatchGeometry {
        PatchGeometry::new(4, 12, 16, 3).unwrap()
    }

    /// Evaluates `||u - v0||_0 + α/2 (u - v - b)²` at both candidates.
    fn two_candidate(v0: f64, v: f64, b: f64, alpha: f64) -> f64 {
        let cost = |u: f64| f64::from(u8::from(u != v0)) + 0.5 * alpha * (u - v - b).powi(2);
        if cost(v0) < cost(v + b) || v + b == v0 {
            v0
        } else {
            v + b
        }
    }

    #[test]
    fn default_coupling() {
        let cfg = AdmmConfig::default();
        assert_eq!(cfg.mu(), 95.703125);
        assert_eq!(cfg.alpha, 1.0 / 72.0);
        assert_eq!(cfg.t, 7.5);
        assert_eq!(cfg.iterations, 50);
        let m = cfg.geometry.group as f64;
        assert!((m * cfg.t * cfg.t - 2.0 * cfg.mu() / cfg.alpha).abs() < 1e-9);
        assert!((cfg.keep_threshold() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn config_rejects_bad_values() {
        let g = PatchGeometry::default();
        assert!(AdmmConfig::new(0.0, 7.5, g, 1).is_err());
        assert!(AdmmConfig::new(-1.0, 7.5, g, 1).is_err());
        assert!(AdmmConfig::new(0.1, -1.0, g, 1).is_err());
    }

    #[test]
    fn u_update_examples() {
        let alpha = 1.0 / 72.0;
        let v0 = GrayImage::filled(1, 1, 100.0);
        let zero = GrayImage::zeros(1, 1);
        let near = u_update(&v0, &GrayImage::filled(1, 1, 105.0), &zero, alpha).unwrap();
        assert_eq!(near.pixels(), &[100.0]);
        let far = u_update(&v0, &GrayImage::filled(1, 1, 120.0), &zero, alpha).unwrap();
        assert_eq!(far.pixels(), &[120.0]);
        // split across v and b
        let split = u_update(
            &v0,
            &GrayImage::filled(1, 1, 90.0),
            &GrayImage::filled(1, 1, 30.0),
            alpha,
        )
        .unwrap();
        assert_eq!(split.pixels(), &[120.0]);
        let same = u_update(&v0, &v0, &zero, alpha).unwrap();
        assert_eq!(same, v0);
        assert!(u_update(&v0, &v0, &zero, 0.0).is_err());
    }

    #[test]
    fn u_update_matches_two_candidate_oracle() {
        let mut rng = SplitMix64::new(17);
        for alpha in [1.0 / 8.0, 1.0 / 72.0, 1.0 / 200.0] {
            let v0 = random_image(16, 16, &mut rng);
            let v = perturb(&v0, 60.0, &mut rng);
            let b = GrayImage::from_fn(16, 16, |_, _| (rng.next_f64() - 0.5) * 10.0).unwrap();
            let u = u_update(&v0, &v, &b, alpha).unwrap();
            for i in 0..v0.len() {
                let expected = two_candidate(v0.pixels()[i], v.pixels()[i], b.pixels()[i], alpha);
                assert_eq!(u.pixels()[i], expected);
            }
        }
    }

    #[test]
    fn keep_set_shrinks_as_alpha_grows() {
        let mut rng = SplitMix64::new(21);
        let v0 = random_image(32, 32, &mut rng);
        let v = perturb(&v0, 40.0, &mut rng);
        let b = GrayImage::zeros(32, 32);
        let kept = |alpha: f64| -> Vec<bool> {
            let u = u_update(&v0, &v, &b, alpha).unwrap();
            u.pixels()
                .iter()
                .zip(v0.pixels())
                .map(|(a, b)| a == b)
                .collect()
        };
        let alphas = [1.0 / 200.0, 1.0 / 72.0, 1.0 / 8.0, 1.0];
        for pair in alphas.windows(2) {
            let (loose, tight) = (kept(pair[0]), kept(pair[1]));
            assert!(tight.iter().zip(&loose).all(|(&t, &l)| !t || l));
        }
    }

    #[test]
    fn b_update_examples() {
        let b = GrayImage::zeros(3, 2);
        let v = GrayImage::filled(3, 2, 5.0);
        let u = GrayImage::filled(3, 2, 3.0);
        assert!(b_update(&b, &v, &u)
            .unwrap()
            .pixels()
            .iter()
            .all(|&x| x == 2.0));
        let mut rng = SplitMix64::new(2);
        let b = random_image(4, 4, &mut rng);
        let v = random_image(4, 4, &mut rng);
        assert_eq!(b_update(&b, &v, &v).unwrap(), b);
        let u = random_image(4, 4, &mut rng);
        let out = b_update(&b, &v, &u).unwrap();
        for i in 0..16 {
            let expected = b.pixels()[i] + v.pixels()[i] - u.pixels()[i];
            assert!((out.pixels()[i] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn v_update_delegates_to_plr() {
        let mut rng = SplitMix64::new(9);
        let u = random_image(24, 24, &mut rng);
        let b = GrayImage::from_fn(24, 24, |_, _| rng.next_f64() * 4.0 - 2.0).unwrap();
        let cfg = AdmmConfig::new(1.0 / 72.0, 7.5, small_geometry(), 1).unwrap();
        let direct = {
            let diff = &u - &b;
            let plr = PlrConfig::new(cfg.geometry, cfg.t)
                .unwrap()
                .with_guide(diff.clone());
            plr_denoise(&diff, &plr).unwrap()
        };
        assert_eq!(v_update(&u, &b, &cfg).unwrap(), direct);

        let zero_t = AdmmConfig::new(1.0 / 72.0, 0.0, small_geometry(), 1).unwrap();
        assert_eq!(v_update(&u, &b, &zero_t).unwrap(), &u - &b);

        let constant = GrayImage::filled(24, 24, 80.0);
        let out = v_update(&constant, &GrayImage::zeros(24, 24), &cfg).unwrap();
        assert!(out.pixels().iter().all(|&x| (x - 80.0).abs() < 1e-9));
    }

    #[test]
    fn zero_iterations_returns_init() {
        let mut rng = SplitMix64::new(3);
        let v0 = random_image(20, 20, &mut rng);
        let init = random_image(20, 20, &mut rng);
        let cfg = AdmmConfig::new(1.0 / 72.0, 7.5, PatchGeometry::default(), 0).unwrap();
        // default geometry is infeasible here, but no iteration runs
        assert_eq!(run_admm(&v0, &cfg, &init).unwrap(), init);
    }

    #[test]
    fn clean_input_is_a_fixed_point() {
        let mut rng = SplitMix64::new(4);
        let v0 = random_image(24, 24, &mut rng);
        let cfg = AdmmConfig::new(1.0 / 72.0, 0.0, small_geometry(), 5).unwrap();
        let state = run_admm_state(&v0, &cfg, &v0).unwrap();
        assert_eq!(state.u, v0);
        assert_eq!(state.v, v0);
        assert_eq!(state.b, GrayImage::zeros(24, 24));
        assert_eq!(state.k, 5);
    }

    #[test]
    fn deterministic() {
        let mut rng = SplitMix64::new(6);
        let v0 = random_image(24, 24, &mut rng);
        let cfg = AdmmConfig::new(1.0 / 72.0, 7.5, small_geometry(), 3).unwrap();
        assert_eq!(
            run_admm(&v0, &cfg, &v0).unwrap(),
            run_admm(&v0, &cfg, &v0).unwrap()
        );
    }
}
