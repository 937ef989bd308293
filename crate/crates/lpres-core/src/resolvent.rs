//! Resolvent denominator `h(z) = z - omega_v - \int J(s)/(z - s) ds`:
//! boundary values, analytic continuation through the cut and the
//! second-sheet resonance pole.

use crate::error::{Error, Result};
use crate::model::ChannelModel;
use crate::quad::{self, cauchy_pv, PvIntegrand};
use num_complex::Complex64;
use std::f64::consts::PI;

const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * PI);

/// Evaluators for the resolvent denominator of a channel model.
///
/// All evaluations are pure; the struct only carries the model, tolerances
/// and the continuation-override flag.
#[derive(Debug, Clone)]
pub struct Resolvent {
    model: ChannelModel,
    quad_tol: f64,
    force_continuation: bool,
}

/// A located second-sheet pole.
#[derive(Debug, Clone)]
pub struct Resonance {
    /// Pole position, `Im mu < 0`.
    pub mu: Complex64,
    /// Residue of `1/h_II` at the pole.
    pub residue: Complex64,
    /// `-2 Im mu`.
    pub width: f64,
    /// `1 / width`.
    pub lifetime: f64,
    /// Wigner-Weisskopf estimate used to start the search.
    pub seed: Complex64,
    pub iterations: usize,
    pub converged: bool,
    /// Other second-sheet zeros inside the scan window (not the resonance).
    pub secondary_zeros: Vec<Complex64>,
}

/// A zero of `h` on the real axis (bound state) with its spectral weight.
#[derive(Debug, Clone, Copy)]
pub struct RealZero {
    pub sigma: f64,
    /// Discrete spectral weight `1 / W'(sigma)`.
    pub weight: f64,
}

impl Resolvent {
    pub fn new(model: ChannelModel) -> Self {
        Resolvent { model, quad_tol: 1e-10, force_continuation: false }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.quad_tol = tol;
        self
    }

    /// Evaluate the second sheet even when the tabulated continuation is
    /// flagged unreliable.
    pub fn with_forced_continuation(mut self, force: bool) -> Self {
        self.force_continuation = force;
        self
    }

    pub fn model(&self) -> &ChannelModel {
        &self.model
    }

    /// `W(sigma) = sigma - omega_v - p.v. \int J(s)/(sigma - s) ds`.
    pub fn w(&self, sigma: f64) -> Result<f64> {
        let pv = match self.model.pv_closed(sigma) {
            Some(v) => v,
            None => {
                let model = self.model.clone();
                cauchy_pv(&PvIntegrand::new(move |s| model.j(s)), sigma, self.quad_tol)?
            }
        };
        Ok(sigma - self.model.omega_v - pv)
    }

    /// Upper boundary value `h(sigma + i0) = W + i pi J`, computed exactly
    /// rather than by a finite-epsilon limit.
    pub fn h_plus(&self, sigma: f64) -> Result<Complex64> {
        let w = self.w(sigma)?;
        Ok(Complex64::new(w, PI * self.model.j(sigma)))
    }

    /// Lower boundary value, the Schwarz reflection of [`Self::h_plus`].
    pub fn h_minus(&self, sigma: f64) -> Result<Complex64> {
        Ok(self.h_plus(sigma)?.conj())
    }

    fn cauchy_transform(&self, z: Complex64) -> Result<Complex64> {
        let model = self.model.clone();
        let (c, s) = model.center_scale();
        quad::integrate_about(&move |x| model.j(x) / (z - x), c, s.max(1.0), self.quad_tol)
    }

    /// `h` analytic in the upper half-plane.
    pub fn h_upper(&self, z: Complex64) -> Result<Complex64> {
        if z.im <= 0.0 {
            return Err(Error::NotUpperHalfPlane(z));
        }
        let c = match self.model.cauchy_upper_closed(z) {
            Some(v) => v,
            None => self.cauchy_transform(z)?,
        };
        Ok(z - self.model.omega_v - c)
    }

    /// The lower-boundary analytic function `z - omega_v - \int J/(z - s)`
    /// evaluated directly at `Im z < 0`. This is the continuation of
    /// `h_minus` into the lower half-plane and the reading of `h` at the pole
    /// in the resonant-state formulas.
    pub fn h_lower_analytic(&self, z: Complex64) -> Result<Complex64> {
        if z.im >= 0.0 {
            return Err(Error::NotLowerHalfPlane(z));
        }
        let c = match self.model.cauchy_lower_closed(z) {
            Some(v) => v,
            None => self.cauchy_transform(z)?,
        };
        Ok(z - self.model.omega_v - c)
    }

    fn check_continuation(&self) -> Result<()> {
        if !self.model.continuation_reliable() && !self.force_continuation {
            return Err(Error::ContinuationUnreliable(
                "tabulated density continuation flagged; enable forcing to proceed".into(),
            ));
        }
        Ok(())
    }

    /// Second-sheet continuation of the upper-boundary function across the
    /// cut: `h_II(z) = h_lower(z) + 2 pi i J_cont(z)` for `Im z < 0`, so that
    /// `h_II(sigma - i eps) -> h_plus(sigma)` as `eps -> 0`.
    pub fn h_second_sheet(&self, z: Complex64) -> Result<Complex64> {
        if z.im >= 0.0 {
            return Err(Error::NotLowerHalfPlane(z));
        }
        self.check_continuation()?;
        Ok(self.h_lower_analytic(z)? + TWO_PI_I * self.model.j_cont(z))
    }

    /// Continuation of the lower-boundary function into the upper half-plane:
    /// `h_minus_cont(z) = h_upper(z) - 2 pi i J_cont(z)` for `Im z > 0`.
    /// Numerator of the S-matrix continuation.
    pub fn h_minus_continued_up(&self, z: Complex64) -> Result<Complex64> {
        if z.im <= 0.0 {
            return Err(Error::NotUpperHalfPlane(z));
        }
        self.check_continuation()?;
        Ok(self.h_upper(z)? - TWO_PI_I * self.model.j_cont(z))
    }

    fn h_second_sheet_deriv(&self, z: Complex64) -> Result<Complex64> {
        let h = 1e-7 * (1.0 + z.norm());
        let step = Complex64::new(h, 0.0);
        Ok((self.h_second_sheet(z + step)? - self.h_second_sheet(z - step)?) / (2.0 * h))
    }

    /// First-order pole estimate `mu0 = omega_v + C_+(omega_v)` with
    /// `C_+` the upper boundary Cauchy transform; reduces to
    /// `omega_v - W(omega_v) - i pi J(omega_v)`.
    pub fn ww_seed(&self) -> Result<Complex64> {
        let ov = self.model.omega_v;
        let w = self.w(ov)?;
        Ok(Complex64::new(ov - w, -PI * self.model.j(ov)))
    }

    /// Locates the resonance pole as the second-sheet zero nearest the seed.
    ///
    /// Newton iteration first, Muller as fallback, then a windowed
    /// `|h_II|`-minimum scan. Fails if the model is free, if no zero is
    /// found, or if the zero sits in the closed upper half-plane.
    pub fn find_pole(&self, seed: Option<Complex64>, tol: f64) -> Result<Resonance> {
        if self.model.is_free() {
            return Err(Error::NoResonance(
                "free model: h has only a real zero at omega_v".into(),
            ));
        }
        self.check_continuation()?;
        let seed = match seed {
            Some(s) => s,
            None => self.ww_seed()?,
        };
        // A seed on the axis cannot start a lower-half-plane iteration.
        let seed_start = if seed.im < 0.0 {
            seed
        } else {
            Complex64::new(seed.re, -0.05 * (1.0 + seed.norm()))
        };

        let mut iterations = 0usize;
        let result = self
            .newton(seed_start, tol, &mut iterations)
            .or_else(|_| self.muller(seed_start, tol, &mut iterations))
            .or_else(|_| self.scan_then_newton(seed_start, tol, &mut iterations));
        let mu = result?;
        if mu.im >= 0.0 {
            return Err(Error::UpperHalfPlaneZero(mu));
        }
        let scale = 1.0 + mu.norm();
        if mu.im.abs() < 1e-9 * scale && self.model.j(mu.re) < 1e-12 {
            return Err(Error::NoResonance(format!(
                "h has only a real zero near sigma = {}",
                mu.re
            )));
        }
        let deriv = self.h_second_sheet_deriv(mu)?;
        if deriv.norm() == 0.0 {
            return Err(Error::RootSearchFailed("vanishing derivative at the root".into()));
        }
        let width = -2.0 * mu.im;
        Ok(Resonance {
            mu,
            residue: 1.0 / deriv,
            width,
            lifetime: 1.0 / width,
            seed,
            iterations,
            converged: true,
            secondary_zeros: self.secondary_zeros(mu)?,
        })
    }

    fn converged(&self, z: Complex64, tol: f64) -> Result<bool> {
        Ok(self.h_second_sheet(z)?.norm() <= tol * (z.norm() + 1.0))
    }

    /// Newton iteration on an arbitrary lower-half-plane analytic function
    /// with a numerical derivative; iterates are reflected back below the
    /// axis when they escape.
    fn newton_on<F>(&self, f: &F, start: Complex64, iterations: &mut usize) -> Result<Complex64>
    where
        F: Fn(Complex64) -> Result<Complex64>,
    {
        let clamp = |z: Complex64| {
            if z.im >= 0.0 {
                Complex64::new(z.re, -z.im.abs().max(1e-12))
            } else {
                z
            }
        };
        let mut z = clamp(start);
        for _ in 0..80 {
            *iterations += 1;
            let fv = f(z)?;
            let h = 1e-7 * (1.0 + z.norm());
            let d = (f(clamp(z + h))? - f(clamp(z - h))?) / (2.0 * h);
            if d.norm() < 1e-300 {
                break;
            }
            let step = fv / d;
            z = clamp(z - step);
            if step.norm() < 1e-13 * (1.0 + z.norm()) {
                return Ok(z);
            }
        }
        Err(Error::RootSearchFailed("newton did not converge".into()))
    }

    fn newton(&self, start: Complex64, tol: f64, iterations: &mut usize) -> Result<Complex64> {
        let mut z = start;
        for _ in 0..80 {
            *iterations += 1;
            if z.im >= 0.0 {
                // Reflect back: the iteration escaped the sheet.
                z = Complex64::new(z.re, -z.im.abs().max(1e-12));
            }
            let f = self.h_second_sheet(z)?;
            if f.norm() <= tol * (z.norm() + 1.0) {
                return Ok(z);
            }
            let d = self.h_second_sheet_deriv(z)?;
            if d.norm() < 1e-300 {
                break;
            }
            let step = f / d;
            z -= step;
            if step.norm() < 1e-15 * (1.0 + z.norm()) {
                break;
            }
        }
        if z.im < 0.0 && self.converged(z, tol)? {
            Ok(z)
        } else {
            Err(Error::RootSearchFailed("newton did not converge".into()))
        }
    }

    fn muller(&self, start: Complex64, tol: f64, iterations: &mut usize) -> Result<Complex64> {
        let h = 0.05 * (1.0 + start.norm());
        let mut x0 = start + Complex64::new(-h, 0.0);
        let mut x1 = start + Complex64::new(h, 0.0);
        let mut x2 = start;
        let clamp = |z: Complex64| {
            if z.im >= 0.0 {
                Complex64::new(z.re, -z.im.abs().max(1e-12))
            } else {
                z
            }
        };
        let mut f0 = self.h_second_sheet(clamp(x0))?;
        let mut f1 = self.h_second_sheet(clamp(x1))?;
        let mut f2 = self.h_second_sheet(clamp(x2))?;
        for _ in 0..200 {
            *iterations += 1;
            let q = (x2 - x1) / (x1 - x0);
            let a = q * f2 - q * (1.0 + q) * f1 + q * q * f0;
            let b = (2.0 * q + 1.0) * f2 - (1.0 + q) * (1.0 + q) * f1 + q * q * f0;
            let c = (1.0 + q) * f2;
            let disc = (b * b - 4.0 * a * c).sqrt();
            let den = if (b + disc).norm() > (b - disc).norm() { b + disc } else { b - disc };
            if den.norm() < 1e-300 {
                break;
            }
            let x3 = clamp(x2 - (x2 - x1) * 2.0 * c / den);
            let f3 = self.h_second_sheet(x3)?;
            x0 = x1;
            f0 = f1;
            x1 = x2;
            f1 = f2;
            x2 = x3;
            f2 = f3;
            if f2.norm() <= tol * (x2.norm() + 1.0) {
                return Ok(x2);
            }
        }
        Err(Error::RootSearchFailed("muller did not converge".into()))
    }

    fn scan_then_newton(
        &self,
        seed: Complex64,
        tol: f64,
        iterations: &mut usize,
    ) -> Result<Complex64> {
        let gamma = seed.im.abs().max(0.02 * (1.0 + seed.norm()));
        let (re0, re1) = (seed.re - 20.0 * gamma, seed.re + 20.0 * gamma);
        let (im0, im1) = (-20.0 * gamma, -1e-4 * gamma);
        let n = 60;
        let mut candidates: Vec<(f64, Complex64)> = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let z = Complex64::new(
                    re0 + (re1 - re0) * (i as f64 + 0.5) / n as f64,
                    im0 + (im1 - im0) * (j as f64 + 0.5) / n as f64,
                );
                let v = self.h_second_sheet(z)?.norm();
                candidates.push((v, z));
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, z0) in candidates.into_iter().take(5) {
            if let Ok(z) = self.newton(z0, tol, iterations) {
                return Ok(z);
            }
        }
        Err(Error::RootSearchFailed(format!(
            "no second-sheet zero located in [{re0}, {re1}] x [{im0}, {im1}]"
        )))
    }

    /// All second-sheet zeros in a window around `mu` other than `mu` itself,
    /// nearest-width first.
    ///
    /// The scan runs on a deflated surface: dividing out the known zero at
    /// `mu` and multiplying back the lower-half-plane density poles leaves
    /// clean dips at the remaining zeros, which a pole squeezed against a
    /// zero would otherwise hide from the grid.
    pub fn secondary_zeros(&self, mu: Complex64) -> Result<Vec<Complex64>> {
        let gamma = mu.im.abs();
        let (re0, re1) = (mu.re - 40.0 * gamma, mu.re + 40.0 * gamma);
        let (im0, im1) = (-40.0 * gamma, -1e-6 * gamma);
        let n = 64;
        let lower_poles: Vec<Complex64> = self
            .model
            .density_poles_upper()
            .into_iter()
            .map(|p| p.conj())
            .collect();
        let deflated = |z: Complex64| -> Result<Complex64> {
            let mut v = self.h_second_sheet(z)? / (z - mu);
            for &p in &lower_poles {
                v *= z - p;
            }
            Ok(v)
        };
        let at = |i: usize, j: usize| {
            Complex64::new(
                re0 + (re1 - re0) * i as f64 / (n - 1) as f64,
                im0 + (im1 - im0) * j as f64 / (n - 1) as f64,
            )
        };
        let mut zeros: Vec<Complex64> = vec![mu];
        let mut iterations = 0usize;
        let vals: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| deflated(at(i, j)).map(|v| v.norm()).unwrap_or(f64::INFINITY))
                    .collect()
            })
            .collect();
        for i in 1..n - 1 {
            for j in 1..n - 1 {
                let v = vals[i][j];
                // Non-strict comparison: symmetric models produce exact ties
                // on mirror-image grid columns; duplicates are merged below.
                if v.is_finite()
                    && v <= vals[i - 1][j]
                    && v <= vals[i + 1][j]
                    && v <= vals[i][j - 1]
                    && v <= vals[i][j + 1]
                {
                    // Polish on the deflated surface, then confirm on h_II.
                    let Ok(z0) = self.newton_on(&deflated, at(i, j), &mut iterations) else {
                        continue;
                    };
                    if let Ok(z) = self.newton(z0, 1e-10, &mut iterations) {
                        if z.im < 0.0
                            && z.re >= re0
                            && z.re <= re1
                            && zeros.iter().all(|p| (p - z).norm() > 1e-6 * (1.0 + z.norm()))
                        {
                            zeros.push(z);
                        }
                    }
                }
            }
        }
        zeros.retain(|z| (z - mu).norm() > 1e-6 * (1.0 + mu.norm()));
        zeros.sort_by(|a, b| a.im.abs().total_cmp(&b.im.abs()));
        Ok(zeros)
    }

    /// Real zeros of `h_+`: points where `W = 0` inside density-null regions.
    /// These are bound states and carry discrete spectral weight.
    pub fn detect_real_zeros(&self) -> Result<Vec<RealZero>> {
        let (lo, hi) = self.model.support_window();
        let (_, scale) = self.model.center_scale();
        let a = lo.min(self.model.omega_v - 20.0 * scale);
        let b = hi.max(self.model.omega_v + 20.0 * scale);
        let n = 2001;
        let xs: Vec<f64> = (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect();
        let jmax = xs.iter().map(|&x| self.model.j(x)).fold(0.0f64, f64::max);
        let floor = 1e-13 * jmax.max(1e-300);

        let mut zeros = Vec::new();
        let mut prev: Option<(f64, f64)> = None;
        for &x in &xs {
            if self.model.j(x) > floor {
                prev = None;
                continue;
            }
            let wx = self.w(x)?;
            if let Some((_, w0)) = prev {
                if w0 * wx < 0.0 {
                    let (mut la, mut lb) = (prev.unwrap().0, x);
                    let mut wa = w0;
                    for _ in 0..200 {
                        let mid = 0.5 * (la + lb);
                        let wm = self.w(mid)?;
                        if wa * wm <= 0.0 {
                            lb = mid;
                        } else {
                            la = mid;
                            wa = wm;
                        }
                        if (lb - la).abs() < 1e-12 * (1.0 + mid.abs()) {
                            break;
                        }
                    }
                    let sigma = 0.5 * (la + lb);
                    let h = 1e-6 * (1.0 + sigma.abs());
                    let wp = (self.w(sigma + h)? - self.w(sigma - h)?) / (2.0 * h);
                    zeros.push(RealZero { sigma, weight: 1.0 / wp });
                }
            }
            prev = Some((x, wx));
        }
        Ok(zeros)
    }
}
