//! Resonant-state machinery: the outer function `g` with `|g|^2 = J`, the
//! resonant state in the outgoing representations, the projection kernel onto
//! the resonance subspace, wave-operator kernels and the particle content.

use crate::error::{Error, Result};
use crate::model::ChannelModel;
use crate::quad::{self, hilbert_transform, GridFunction};
use crate::resolvent::{Resolvent, Resonance};
use crate::smatrix::{GridSpec, InnerFactorization};
use num_complex::Complex64;
use std::f64::consts::PI;

const J_FLOOR: f64 = 1e-300;

// ---------------------------------------------------------------------------
// Outer function
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum ClosedOuter {
    /// `g = sqrt(c)`.
    Flat { root_c: f64 },
    /// `g = amp / (z - sigma0 + i eta)`, `amp = sqrt(gamma eta / pi)`.
    Lorentzian { amp: f64, sigma0: f64, eta: f64 },
}

/// Zero-free function on the upper half-plane with boundary modulus
/// `sqrt(J)`: modulus taken from the density directly, phase from the
/// Hilbert transform of `log J / 2`, unimodular constant fixed by making
/// `g` real positive at an interior anchor point.
#[derive(Debug, Clone)]
pub struct OuterFunction {
    model: ChannelModel,
    half_log_j: GridFunction,
    phase: GridFunction,
    anchor: Complex64,
    anchor_point: Complex64,
    closed: Option<ClosedOuter>,
    /// Set when the grid Hilbert transform could not resolve the tails
    /// (non-integrable log-density, short window).
    pub window_limited: bool,
    /// Sub-intervals of the working grid where J fell below the floor.
    pub exclusion_zones: Vec<(f64, f64)>,
}

/// Builds the outer function for a channel model on the given grid.
///
/// Families with closed-form outer factors (flat, lorentzian) evaluate
/// exactly; the rest use the grid construction. Densities with heavy zero
/// sets on the window are rejected with the offending zones.
pub fn build_outer(model: &ChannelModel, grid: &GridSpec) -> Result<OuterFunction> {
    let mut zones: Vec<(f64, f64)> = Vec::new();
    let mut zone_start: Option<f64> = None;
    let mut alive: Vec<bool> = Vec::with_capacity(grid.n);
    let mut u = Vec::with_capacity(grid.n);
    for x in grid.points() {
        let j = model.j(x);
        alive.push(j > J_FLOOR);
        if j <= J_FLOOR {
            if zone_start.is_none() {
                zone_start = Some(x);
            }
        } else if let Some(z0) = zone_start.take() {
            zones.push((z0, x));
        }
        u.push(0.5 * j.max(J_FLOOR).ln());
    }
    if let Some(z0) = zone_start {
        zones.push((z0, grid.hi));
    }
    // Tail underflow is harmless; only interior gaps count as heavy zero
    // sets.
    let first = alive.iter().position(|&a| a);
    let last = alive.iter().rposition(|&a| a);
    if let (Some(first), Some(last)) = (first, last) {
        let interior_gaps = alive[first..=last].iter().filter(|&&a| !a).count();
        if interior_gaps * 4 > last - first + 1 {
            return Err(Error::DensityZeroRegions(zones));
        }
    } else {
        return Err(Error::DensityZeroRegions(zones));
    }

    let half_log_j = GridFunction::new(grid.lo, grid.step(), u)?;
    let hres = hilbert_transform(&half_log_j);

    let closed = match (model.family_name(), model.family_params().as_slice()) {
        ("flat", [c]) => Some(ClosedOuter::Flat { root_c: c.sqrt() }),
        ("lorentzian", [gamma, sigma0, eta]) => Some(ClosedOuter::Lorentzian {
            amp: (gamma * eta / PI).sqrt(),
            sigma0: *sigma0,
            eta: *eta,
        }),
        _ => None,
    };

    let anchor_point = {
        let (c, _) = model.center_scale();
        Complex64::new(c, 0.25 * (grid.hi - grid.lo))
    };
    let mut outer = OuterFunction {
        model: model.clone(),
        half_log_j,
        phase: hres.grid,
        anchor: Complex64::new(1.0, 0.0),
        anchor_point,
        closed,
        window_limited: hres.flagged,
        exclusion_zones: zones,
    };
    let probe = outer.eval_upper(anchor_point)?;
    if probe.norm() > 0.0 {
        outer.anchor = probe.conj() / probe.norm();
    }
    Ok(outer)
}

impl OuterFunction {
    /// Boundary value `g(sigma)`; `|g|^2 = J` by construction.
    pub fn eval_real(&self, sigma: f64) -> Complex64 {
        let raw = match &self.closed {
            Some(ClosedOuter::Flat { root_c }) => Complex64::new(*root_c, 0.0),
            Some(ClosedOuter::Lorentzian { amp, sigma0, eta }) => {
                amp / Complex64::new(sigma - sigma0, *eta)
            }
            None => {
                let modulus = self.model.j(sigma).max(0.0).sqrt();
                modulus * Complex64::new(0.0, self.phase.interp(sigma)).exp()
            }
        };
        self.anchor * raw
    }

    /// Analytic evaluation in the upper half-plane.
    pub fn eval_upper(&self, z: Complex64) -> Result<Complex64> {
        if z.im <= 0.0 {
            return Err(Error::NotUpperHalfPlane(z));
        }
        let raw = match &self.closed {
            Some(ClosedOuter::Flat { root_c }) => Complex64::new(*root_c, 0.0),
            Some(ClosedOuter::Lorentzian { amp, sigma0, eta }) => {
                amp / (z - sigma0 + Complex64::new(0.0, *eta))
            }
            None => {
                // g(z) = exp(-i/pi * \int u(s)/(s - z) ds), u = log(J)/2.
                let vals: Vec<Complex64> = self
                    .half_log_j
                    .values()
                    .iter()
                    .map(|&v| Complex64::new(v, 0.0))
                    .collect();
                let c = quad::cauchy_boundary_integral(
                    self.half_log_j.start(),
                    self.half_log_j.step(),
                    &vals,
                    z,
                );
                (Complex64::new(0.0, -1.0 / PI) * c).exp()
            }
        };
        Ok(self.anchor * raw)
    }

    /// Conjugate-family evaluator `g*(z) = conj(g(conj z))` for `Im z < 0`.
    pub fn eval_star_lower(&self, z: Complex64) -> Result<Complex64> {
        if z.im >= 0.0 {
            return Err(Error::NotLowerHalfPlane(z));
        }
        Ok(self.eval_upper(z.conj())?.conj())
    }

    pub fn anchor_point(&self) -> Complex64 {
        self.anchor_point
    }

    pub fn grid(&self) -> &GridFunction {
        &self.half_log_j
    }
}

// ---------------------------------------------------------------------------
// Resonant state
// ---------------------------------------------------------------------------

/// The resonant state at fixed total momentum, unit-normalized.
///
/// Outgoing spectral profile `a(sigma) = N / (sigma - mu)` with
/// `N = sqrt(|Im mu| / pi)`; outgoing translation profile
/// `theta(-s) sqrt(2 |Im mu|) exp(i mu s)`. The two are a Fourier pair. The
/// unnormalized constant `2 Im mu` of the projection construction is
/// recorded alongside.
#[derive(Debug, Clone)]
pub struct ResonantState {
    pub mu: Complex64,
    /// Unit-norm spectral constant `sqrt(|Im mu|/pi)`.
    pub norm_const: f64,
    /// The raw constant of the projection construction (negative).
    pub raw_constant: f64,
}

pub fn resonant_state(resonance: &Resonance) -> ResonantState {
    let im = resonance.mu.im;
    ResonantState {
        mu: resonance.mu,
        norm_const: (im.abs() / PI).sqrt(),
        raw_constant: 2.0 * im,
    }
}

impl ResonantState {
    /// Outgoing spectral representation, square-integrable with unit norm.
    pub fn spectral_amplitude(&self, sigma: f64) -> Complex64 {
        self.norm_const / (sigma - self.mu)
    }

    /// Outgoing translation representation, supported on `(-inf, 0)`.
    pub fn translation_profile(&self, s: f64) -> Complex64 {
        if s >= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        (2.0 * self.mu.im.abs()).sqrt() * (Complex64::new(0.0, 1.0) * self.mu * s).exp()
    }

    /// Truncated right shift by `tau >= 0` applied to the translation
    /// profile: shift, then cut back to `(-inf, 0)`. The profile is an exact
    /// eigenfunction with eigenvalue `exp(-i mu tau)`.
    pub fn evolve_translation(&self, s: f64, tau: f64) -> Complex64 {
        if s >= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        self.translation_profile(s - tau)
    }
}

// ---------------------------------------------------------------------------
// Particle content
// ---------------------------------------------------------------------------

/// Raw discrete-level amplitude `2 i Im mu * g*(mu) / h(mu)`, with `h` at the
/// pole read as the lower-boundary analytic continuation.
pub fn component_v_raw(
    resolvent: &Resolvent,
    resonance: &Resonance,
    outer: &OuterFunction,
) -> Result<Complex64> {
    let mu = resonance.mu;
    let h = resolvent.h_lower_analytic(mu)?;
    if h.norm() < 1e-12 {
        return Err(Error::DegenerateModel(
            "lower-boundary continuation vanishes at the pole".into(),
        ));
    }
    let g_star = outer.eval_star_lower(mu)?;
    Ok(Complex64::new(0.0, 2.0 * mu.im) * g_star / h)
}

/// Raw continuum amplitude at spectral parameter `sigma`:
/// `-2 i Im mu * conj(g(sigma)) [2 pi i g(sigma) g*(mu) + h(mu)] /
///  [(mu - sigma) h(mu) g(sigma)]`,
/// the rank-one radial reduction with the form factor represented by
/// `conj(g)`. Vanishes identically when `g` has constant phase (rational
/// case).
pub fn component_ntheta_raw(
    resolvent: &Resolvent,
    resonance: &Resonance,
    outer: &OuterFunction,
    sigma: f64,
) -> Result<Complex64> {
    let mu = resonance.mu;
    let h = resolvent.h_lower_analytic(mu)?;
    if h.norm() < 1e-12 {
        return Err(Error::DegenerateModel(
            "lower-boundary continuation vanishes at the pole".into(),
        ));
    }
    let g = outer.eval_real(sigma);
    if g.norm() < 1e-150 {
        return Err(Error::DensityZeroRegions(vec![(sigma, sigma)]));
    }
    let g_star_mu = outer.eval_star_lower(mu)?;
    let numerator = Complex64::new(0.0, 2.0 * PI) * g * g_star_mu + h;
    Ok(-Complex64::new(0.0, 2.0 * mu.im) * g.conj() * numerator / ((mu - sigma) * h * g))
}

/// Particle content of the resonance with unit-norm bookkeeping: the V and
/// N+theta amplitudes are normalized jointly so their squared norms sum to 1.
#[derive(Debug, Clone)]
pub struct ComponentReport {
    pub v_raw: Complex64,
    pub v_unit: Complex64,
    /// `|v_unit|^2`, the discrete-level weight of the resonance.
    pub v_fraction: f64,
    /// L2 norm of the raw continuum amplitude.
    pub ntheta_norm_raw: f64,
    /// Max |unit-normalized continuum amplitude| over the report grid.
    pub ntheta_max_unit: f64,
    /// Unit-normalized continuum profile samples (sigma, amplitude).
    pub ntheta_profile: Vec<(f64, Complex64)>,
}

pub fn component_report(
    resolvent: &Resolvent,
    resonance: &Resonance,
    outer: &OuterFunction,
    grid: &GridSpec,
) -> Result<ComponentReport> {
    let v_raw = component_v_raw(resolvent, resonance, outer)?;
    let f = |sigma: f64| -> Complex64 {
        component_ntheta_raw(resolvent, resonance, outer, sigma)
            .unwrap_or(Complex64::new(0.0, 0.0))
    };
    let (c, s) = resolvent.model().center_scale();
    let nt_sq =
        quad::integrate_about(&|x| Complex64::new(f(x).norm_sqr(), 0.0), c, s.max(1.0), 1e-9)?
            .re
            .max(0.0);
    let total = (v_raw.norm_sqr() + nt_sq).sqrt();
    if total == 0.0 {
        return Err(Error::DegenerateModel("vanishing resonant state".into()));
    }
    let mut profile = Vec::with_capacity(grid.n);
    let mut nt_max = 0.0f64;
    for x in grid.points() {
        let v = f(x) / total;
        nt_max = nt_max.max(v.norm());
        profile.push((x, v));
    }
    Ok(ComponentReport {
        v_raw,
        v_unit: v_raw / total,
        v_fraction: v_raw.norm_sqr() / (total * total),
        ntheta_norm_raw: nt_sq.sqrt(),
        ntheta_max_unit: nt_max,
        ntheta_profile: profile,
    })
}

// ---------------------------------------------------------------------------
// Projection kernel
// ---------------------------------------------------------------------------

/// Value of the projection `P_-` kernel in the outgoing translation
/// representation at `(s, s')`. The `theta(s) delta(s - s')` part is
/// symbolic (`future_diagonal`); the rank-one resonance part is numeric.
#[derive(Debug, Clone, Copy)]
pub struct ProjectionKernelValue {
    /// The diagonal `theta(s) delta(s - s')` term is present structurally.
    pub future_diagonal: bool,
    /// Raw resonance part
    /// `2 Im mu theta(-s) theta(-s') e^{i mu s} e^{-i conj(mu) s'}`.
    pub k_raw: Complex64,
    /// Unit-scaled projector part (sign flipped: the raw constant is
    /// negative while a projector is positive).
    pub k_normalized: Complex64,
}

/// Evaluates the projection kernel for a rational (trivial-phase) model and
/// verifies `Res S(mu) S^dagger(mu) = 0` on the Blaschke part.
pub fn projection_kernel(
    fact: &InnerFactorization,
    s: f64,
    s_prime: f64,
) -> Result<ProjectionKernelValue> {
    if !fact.trivial_phase {
        return Err(Error::InvalidInput(
            "projection kernel requires a rational model or a trivial factorization".into(),
        ));
    }
    let mu = fact.mu;
    // Res S(mu) * S^dagger(mu) = 0: the adjoint Blaschke part vanishes at mu.
    let res_s = {
        let mut v = Complex64::new(0.0, -2.0 * mu.im.abs());
        for &zk in fact.blaschke_zeros.iter().skip(1) {
            v *= (mu - zk.conj()) / (mu - zk);
        }
        v
    };
    let s_dag_at_mu = fact.inner_rational(mu.conj()).conj();
    if (res_s * s_dag_at_mu).norm() > 1e-10 {
        return Err(Error::InvalidInput(format!(
            "residue orthogonality violated: |Res S(mu) S^dag(mu)| = {:.3e}",
            (res_s * s_dag_at_mu).norm()
        )));
    }

    let k = if s < 0.0 && s_prime < 0.0 {
        let phase =
            (Complex64::i() * mu * s).exp() * (-Complex64::i() * mu.conj() * s_prime).exp();
        (2.0 * mu.im) * phase
    } else {
        Complex64::new(0.0, 0.0)
    };
    Ok(ProjectionKernelValue {
        future_diagonal: true,
        k_raw: k,
        k_normalized: -k,
    })
}

// ---------------------------------------------------------------------------
// Wave-operator kernels
// ---------------------------------------------------------------------------

/// Reduced wave-operator matrix elements at fixed `sigma`: the discrete-level
/// rows of the outgoing (`1/h_-`) and incoming (`1/h_+`) transformations and
/// the continuum weights of the non-delta kernel parts. Rows labelled by the
/// discrete level itself vanish identically.
#[derive(Debug, Clone, Copy)]
pub struct WaveKernels {
    pub sigma: f64,
    /// `<V|Omega_+|sigma>` reduced amplitude: `g(sigma)/h_-(sigma)`.
    pub v_out: Complex64,
    /// `<V|Omega_-|sigma>` reduced amplitude: `g(sigma)/h_+(sigma)`.
    pub v_in: Complex64,
    /// Continuum kernel weight on the outgoing side:
    /// `conj(g) g / h_-` (the energy-denominator factor stays symbolic).
    pub continuum_out: Complex64,
    /// Incoming counterpart with `h_+` in place of `h_-`.
    pub continuum_in: Complex64,
}

impl WaveKernels {
    /// Wave operators annihilate the discrete level: rows labelled by V-type
    /// quantum numbers are structural zeros.
    pub fn omega_on_v_label() -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
}

pub fn wave_kernels(
    resolvent: &Resolvent,
    outer: &OuterFunction,
    sigma: f64,
) -> Result<WaveKernels> {
    let g = outer.eval_real(sigma);
    let hp = resolvent.h_plus(sigma)?;
    let hm = resolvent.h_minus(sigma)?;
    Ok(WaveKernels {
        sigma,
        v_out: g / hm,
        v_in: g / hp,
        continuum_out: g.conj() * g / hm,
        continuum_in: g.conj() * g / hp,
    })
}

/// Independent S-matrix assembly through the wave-kernel route: the
/// partial-fraction collapse of the kernel products leaves
/// `s(sigma) = 1 - 2 pi i F F* / h_+` with `F F* = |g|^2` taken from the
/// outer function rather than the density.
pub fn s_from_wave_kernels(
    resolvent: &Resolvent,
    outer: &OuterFunction,
    sigma: f64,
) -> Result<Complex64> {
    let k = wave_kernels(resolvent, outer, sigma)?;
    let g = outer.eval_real(sigma);
    Ok(Complex64::new(1.0, 0.0) - Complex64::new(0.0, 2.0 * PI) * k.v_in * g.conj())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_density, FormFactor, FourMomentum, MassParams};
    use crate::smatrix::ScalarSMatrix;
    use approx::assert_abs_diff_eq;

    fn lorentzian_resolvent() -> Resolvent {
        let model = build_density(
            &FormFactor::Lorentzian { gamma: 0.1, sigma0: 1.0, eta: 1.0 },
            FourMomentum::new(1.0, 0.0, 0.0, 0.0),
            MassParams::new(0.5, 1.0, 1.0).unwrap(),
        )
        .unwrap();
        Resolvent::new(model)
    }

    fn flat_resolvent(c: f64, omega_v: f64) -> Resolvent {
        let (p, m_v) = if omega_v == 0.0 {
            (FourMomentum::zero(), 1.0)
        } else {
            (FourMomentum::new(1.0, 0.0, 0.0, 0.0), 0.5 / omega_v)
        };
        let model = build_density(
            &FormFactor::Flat { c },
            p,
            MassParams::new(m_v, 1.0, 1.0).unwrap(),
        )
        .unwrap();
        Resolvent::new(model)
    }

    fn gaussian_resolvent() -> Resolvent {
        let model = build_density(
            &FormFactor::Gaussian { gamma: 0.2, sigma0: 0.0, eta: 0.5 },
            FourMomentum::zero(),
            MassParams::new(1.0, 1.0, 1.0).unwrap(),
        )
        .unwrap();
        Resolvent::new(model)
    }

    #[test]
    fn outer_flat_is_constant_root() {
        let r = flat_resolvent(0.05, 0.0);
        let grid = GridSpec { lo: -40.0, hi: 40.0, n: 1024 };
        let g = build_outer(r.model(), &grid).unwrap();
        for sigma in [-3.0, 0.0, 7.7] {
            let v = g.eval_real(sigma);
            assert!((v - Complex64::new(0.05f64.sqrt(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn outer_lorentzian_closed_form_and_peak() {
        let r = lorentzian_resolvent();
        let grid = GridSpec { lo: -39.0, hi: 41.0, n: 2048 };
        let g = build_outer(r.model(), &grid).unwrap();
        // |g(sigma0)|^2 = gamma/(pi eta)
        assert_abs_diff_eq!(g.eval_real(1.0).norm_sqr(), 0.1 / PI, epsilon = 1e-12);
        // Matches sqrt(gamma eta / pi)/(sigma - sigma0 + i eta) up to the
        // anchor's unimodular constant.
        let amp = (0.1 / PI).sqrt();
        let mut ratios = Vec::new();
        for sigma in [-2.0, 0.5, 1.0, 3.0] {
            let closed = amp / Complex64::new(sigma - 1.0, 1.0);
            ratios.push(g.eval_real(sigma) / closed);
        }
        for r2 in &ratios {
            assert_abs_diff_eq!(r2.norm(), 1.0, epsilon = 1e-12);
            assert!((r2 - ratios[0]).norm() < 1e-12, "constant differs");
        }
    }

    #[test]
    fn outer_modulus_squared_reproduces_density() {
        let r = gaussian_resolvent();
        let grid = GridSpec { lo: -20.0, hi: 20.0, n: 4096 };
        let g = build_outer(r.model(), &grid).unwrap();
        for i in 0..100 {
            let sigma = -4.0 + 0.08 * i as f64;
            let j = r.model().j(sigma);
            if j > 1e-12 {
                let rel = (g.eval_real(sigma).norm_sqr() - j).abs() / j;
                assert!(rel < 1e-6, "relative modulus error {rel:.3e} at {sigma}");
            }
        }
    }

    #[test]
    fn outer_generic_phase_matches_closed_lorentzian() {
        // Run the lorentzian through the generic grid path by tabulating it.
        let xs: Vec<f64> = (0..4001).map(|i| -199.0 + 0.1 * i as f64).collect();
        let js: Vec<f64> = xs
            .iter()
            .map(|&x| (0.1 / PI) / ((x - 1.0) * (x - 1.0) + 1.0))
            .collect();
        let model = build_density(
            &FormFactor::Tabulated { sigma: xs, j: js },
            FourMomentum::zero(),
            MassParams::new(1.0, 1.0, 1.0).unwrap(),
        )
        .unwrap();
        let grid = GridSpec { lo: -199.0, hi: 201.0, n: 16384 };
        let g = build_outer(&model, &grid).unwrap();
        // The slowly decaying log tails outside the window limit the phase;
        // the builder flags that.
        assert!(g.window_limited);
        let amp = (0.1 / PI).sqrt();
        // Compare phase differences (the anchor constant drops out).
        let closed_phase = |s: f64| (amp / Complex64::new(s - 1.0, 1.0)).arg();
        let got_ref = g.eval_real(1.0).arg() - closed_phase(1.0);
        for sigma in [-1.5, 0.0, 2.0, 3.5] {
            let mut d = g.eval_real(sigma).arg() - closed_phase(sigma) - got_ref;
            while d > PI {
                d -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
            }
            assert!(d.abs() < 5e-2, "generic phase deviates by {d:.3e} at {sigma}");
        }
    }

    #[test]
    fn outer_zero_free_and_poisson_reproduction() {
        let r = lorentzian_resolvent();
        let grid = GridSpec { lo: -3999.0, hi: 4001.0, n: 1 << 20 };
        let g = build_outer(r.model(), &grid).unwrap();
        // Zero-free on a sample lattice.
        let mut min_mod = f64::INFINITY;
        for i in 0..20 {
            for j in 1..20 {
                let z = Complex64::new(-4.0 + 0.5 * i as f64, 0.3 * j as f64);
                min_mod = min_mod.min(g.eval_upper(z).unwrap().norm());
            }
        }
        assert!(min_mod > 0.0);
        // log |g| equals the Poisson extension of log sqrt(J) at interior
        // points.
        for &z in &[
            Complex64::new(0.5, 0.4),
            Complex64::new(1.0, 1.0),
            Complex64::new(2.5, 0.2),
            Complex64::new(-1.0, 0.6),
            Complex64::new(1.5, 0.9),
        ] {
            let expect = quad::poisson_extend(g.grid(), z).unwrap();
            let got = g.eval_upper(z).unwrap().norm().ln();
            assert!(
                (got - expect).abs() < 1e-4,
                "poisson reproduction off by {:.3e} at {z}",
                (got - expect).abs()
            );
        }
    }

    #[test]
    fn resonant_state_norms_and_fourier_pair() {
        let r = lorentzian_resolvent();
        let res = r.find_pole(None, 1e-12).unwrap();
        let state = resonant_state(&res);

        // Spectral norm: integral of |N/(sigma-mu)|^2 = N^2 pi/|Im mu| = 1.
        let norm = quad::integrate_about(
            &|x| Complex64::new(state.spectral_amplitude(x).norm_sqr(), 0.0),
            res.mu.re,
            1.0,
            1e-10,
        )
        .unwrap()
        .re;
        assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-8);

        // Translation norm: int_-inf^0 2|Im mu| e^{2 Im mu |s|} ds = 1.
        let tnorm = quad::integrate_about(
            &|s| Complex64::new(state.translation_profile(s).norm_sqr(), 0.0),
            -5.0,
            3.0,
            1e-10,
        )
        .unwrap()
        .re;
        assert_abs_diff_eq!(tnorm, 1.0, epsilon = 1e-8);

        // Fourier pair: the transform of the translation profile equals
        // i sqrt(2 pi) a(sigma). Midpoint sampling keeps clear of the
        // support cutoff at s = 0.
        let s_depth = 170.0;
        let n = 1 << 19;
        let ds = s_depth / n as f64;
        for k in 0..9 {
            let sigma = res.mu.re + 0.7 * (k as f64 - 4.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..n {
                let s = -s_depth + ds * (i as f64 + 0.5);
                acc += state.translation_profile(s) * (-Complex64::i() * sigma * s).exp();
            }
            acc *= ds;
            let expect = Complex64::i() * (2.0 * PI).sqrt() * state.spectral_amplitude(sigma);
            let rel = (acc - expect).norm() / expect.norm();
            assert!(rel < 1e-6, "fourier pair off by {rel:.3e} at {sigma}");
        }
    }

    #[test]
    fn translation_profile_is_semigroup_eigenfunction() {
        let r = flat_resolvent(0.05, 2.0);
        let res = r.find_pole(None, 1e-12).unwrap();
        let state = resonant_state(&res);
        for &tau in &[0.5, 1.0, 2.0] {
            let ev = (-Complex64::i() * res.mu * tau).exp();
            for i in 1..50 {
                let s = -0.2 * i as f64;
                let lhs = state.evolve_translation(s, tau);
                let rhs = ev * state.translation_profile(s);
                assert!(
                    (lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()),
                    "eigenprofile violated at s={s}, tau={tau}"
                );
            }
        }
    }

    #[test]
    fn component_v_closed_form_oracle() {
        // g*(mu) = conj(anchor amp/(conj mu - sigma0 + i eta)) and
        // h(mu) = mu - omega_v - gamma/(mu - sigma0 - i eta); the reference
        // is computed directly from these expressions.
        let r = lorentzian_resolvent();
        let res = r.find_pole(None, 1e-12).unwrap();
        let grid = GridSpec { lo: -39.0, hi: 41.0, n: 2048 };
        let outer = build_outer(r.model(), &grid).unwrap();
        let mu = res.mu;

        let amp = (0.1 / PI).sqrt();
        let anchor = outer.eval_real(1.0) / (amp / Complex64::new(0.0, 1.0));
        let g_star = (anchor * amp / (mu.conj() - 1.0 + Complex64::i())).conj();
        let h_low = mu - 1.0 - 0.1 / (mu - 1.0 - Complex64::i());
        let expect = Complex64::new(0.0, 2.0 * mu.im) * g_star / h_low;

        let got = component_v_raw(&r, &res, &outer).unwrap();
        assert!(
            (got - expect).norm() < 1e-9,
            "component V {got} vs oracle {expect}"
        );
        assert!(got.norm() > 0.0);
    }

    #[test]
    fn component_ntheta_vanishes_for_flat() {
        let r = flat_resolvent(0.05, 0.0);
        let res = r.find_pole(None, 1e-12).unwrap();
        let grid = GridSpec { lo: -40.0, hi: 40.0, n: 512 };
        let outer = build_outer(r.model(), &grid).unwrap();
        for x in grid.points() {
            let v = component_ntheta_raw(&r, &res, &outer, x).unwrap();
            assert!(v.norm() < 1e-10, "flat continuum amplitude {v} at {x}");
        }
        // The V component then carries the entire unit norm.
        let report = component_report(&r, &res, &outer, &grid).unwrap();
        assert!((report.v_fraction - 1.0).abs() < 1e-9);
        assert!(report.v_unit.norm() > 0.0);
    }

    #[test]
    fn component_ntheta_nonzero_for_lorentzian() {
        let r = lorentzian_resolvent();
        let res = r.find_pole(None, 1e-12).unwrap();
        let grid = GridSpec { lo: -39.0, hi: 41.0, n: 1024 };
        let outer = build_outer(r.model(), &grid).unwrap();
        let report = component_report(&r, &res, &outer, &grid).unwrap();
        assert!(
            report.ntheta_max_unit > 1e-3,
            "continuum content too small: {:.3e}",
            report.ntheta_max_unit
        );
        // Profile peaks near the resonance energy.
        let peak = report
            .ntheta_profile
            .iter()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        assert!((peak.0 - res.mu.re).abs() < 1.0, "peak at {}", peak.0);
    }

    #[test]
    fn component_amplitudes_shrink_with_coupling() {
        let mut v_fracs = Vec::new();
        let mut nt_at_2 = Vec::new();
        for &gamma in &[1e-1, 1e-2, 1e-3] {
            let model = build_density(
                &FormFactor::Lorentzian { gamma, sigma0: 1.0, eta: 1.0 },
                FourMomentum::new(1.0, 0.0, 0.0, 0.0),
                MassParams::new(0.5, 1.0, 1.0).unwrap(),
            )
            .unwrap();
            let r = Resolvent::new(model);
            let res = r.find_pole(None, 1e-13).unwrap();
            let grid = GridSpec { lo: -39.0, hi: 41.0, n: 512 };
            let outer = build_outer(r.model(), &grid).unwrap();
            let report = component_report(&r, &res, &outer, &grid).unwrap();
            v_fracs.push(report.v_fraction);
            nt_at_2.push(
                component_ntheta_raw(&r, &res, &outer, 2.0)
                    .unwrap()
                    .norm(),
            );
        }
        // V fraction tends to 1 (the continuum admixture scales with gamma)
        // and the raw continuum amplitude vanishes pointwise.
        assert!(v_fracs[0] < v_fracs[1] && v_fracs[1] < v_fracs[2]);
        assert!(v_fracs[2] > 0.95, "weak-coupling V fraction {}", v_fracs[2]);
        assert!(nt_at_2[0] > nt_at_2[1] && nt_at_2[1] > nt_at_2[2]);
        assert!(nt_at_2[2] < 0.1 * nt_at_2[0]);
    }

    #[test]
    fn projection_kernel_values_and_idempotence() {
        let r = flat_resolvent(0.05, 0.0);
        let res = r.find_pole(None, 1e-12).unwrap();
        let scalar = ScalarSMatrix::new(r.clone());
        let grid = GridSpec { lo: -40.0, hi: 40.0, n: 1024 };
        let fact = crate::smatrix::factorize(&scalar, &res, &grid).unwrap();

        // Support condition.
        let v = projection_kernel(&fact, 1.0, -1.0).unwrap();
        assert_eq!(v.k_raw, Complex64::new(0.0, 0.0));

        // Closed-form value at s = s' = -1: 2 Im mu e^{2 Im mu}.
        let v = projection_kernel(&fact, -1.0, -1.0).unwrap();
        let im = res.mu.im;
        let expect = 2.0 * im * (2.0 * im).exp();
        assert_abs_diff_eq!(v.k_raw.re, expect, epsilon = 1e-12);
        assert_abs_diff_eq!(v.k_raw.im, 0.0, epsilon = 1e-12);

        // Idempotence of the unit-scaled projector by quadrature.
        let (s, s_prime) = (-0.7, -1.3);
        let k = |a: f64, b: f64| projection_kernel(&fact, a, b).unwrap().k_normalized;
        let conv = quad::integrate_about(
            &|u| {
                if u >= 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    k(s, u) * k(u, s_prime)
                }
            },
            -3.0,
            2.0,
            1e-10,
        )
        .unwrap();
        assert!(
            (conv - k(s, s_prime)).norm() < 1e-8,
            "projector not idempotent: {:.3e}",
            (conv - k(s, s_prime)).norm()
        );
    }

    #[test]
    fn wave_kernels_swap_and_structural_zeros() {
        let r = lorentzian_resolvent();
        let grid = GridSpec { lo: -39.0, hi: 41.0, n: 1024 };
        let outer = build_outer(r.model(), &grid).unwrap();
        assert_eq!(WaveKernels::omega_on_v_label(), Complex64::new(0.0, 0.0));
        for sigma in [-1.0, 0.8, 2.5] {
            let k = wave_kernels(&r, &outer, sigma).unwrap();
            let hp = r.h_plus(sigma).unwrap();
            let hm = r.h_minus(sigma).unwrap();
            // Incoming kernels equal outgoing with h_+ <-> h_- exchange.
            assert!((k.v_in - k.v_out * hm / hp).norm() < 1e-12);
            assert!((k.continuum_in - k.continuum_out * hm / hp).norm() < 1e-12);
        }
    }

    #[test]
    fn s_assembly_matches_direct_ratio() {
        for r in [lorentzian_resolvent(), flat_resolvent(0.05, 0.0)] {
            let grid = GridSpec::phase_default(&r);
            let outer = build_outer(r.model(), &grid).unwrap();
            let scalar = ScalarSMatrix::new(r.clone());
            for sigma in [0.3, 1.0, 2.4] {
                let assembled = s_from_wave_kernels(&r, &outer, sigma).unwrap();
                let direct = scalar.eval_real(sigma).unwrap();
                assert!(
                    (assembled - direct).norm() < 1e-6,
                    "assembly mismatch {:.3e} at {sigma}",
                    (assembled - direct).norm()
                );
            }
        }
    }
}
