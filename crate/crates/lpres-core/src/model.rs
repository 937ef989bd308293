//! Physical model definition: masses, form factors, center-of-momentum
//! reduction and the coupling spectral density `J_P(sigma)` that drives all
//! downstream computations.

use crate::error::{Error, Result};
use crate::quad;
use crate::rational::{aaa, AaaFit};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

// ---------------------------------------------------------------------------
// Masses and momenta
// ---------------------------------------------------------------------------

/// Mass parameters of the three fields.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassParams {
    pub m_v: f64,
    pub m_n: f64,
    pub m_theta: f64,
}

impl MassParams {
    pub fn new(m_v: f64, m_n: f64, m_theta: f64) -> Result<Self> {
        if !(m_v > 0.0 && m_n > 0.0 && m_theta > 0.0) {
            return Err(Error::InvalidInput("all masses must be strictly positive".into()));
        }
        Ok(MassParams { m_v, m_n, m_theta })
    }

    /// Total mass of the continuum pair.
    pub fn m_total(&self) -> f64 {
        self.m_n + self.m_theta
    }

    /// Reduced mass of the continuum pair.
    pub fn m_reduced(&self) -> f64 {
        self.m_n * self.m_theta / (self.m_n + self.m_theta)
    }
}

/// Off-shell four-momentum with signature (+,-,-,-).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourMomentum {
    pub e: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl FourMomentum {
    pub fn new(e: f64, p1: f64, p2: f64, p3: f64) -> Self {
        FourMomentum { e, p1, p2, p3 }
    }

    pub fn zero() -> Self {
        FourMomentum::new(0.0, 0.0, 0.0, 0.0)
    }

    /// Invariant square `e^2 - p1^2 - p2^2 - p3^2`.
    pub fn square(&self) -> f64 {
        self.e * self.e - self.p1 * self.p1 - self.p2 * self.p2 - self.p3 * self.p3
    }

    pub fn add(&self, other: &FourMomentum) -> FourMomentum {
        FourMomentum::new(
            self.e + other.e,
            self.p1 + other.p1,
            self.p2 + other.p2,
            self.p3 + other.p3,
        )
    }

    pub fn scale(&self, s: f64) -> FourMomentum {
        FourMomentum::new(s * self.e, s * self.p1, s * self.p2, s * self.p3)
    }
}

/// Center-of-momentum reduction of a continuum pair `(p, k)`:
/// total momentum, relative momentum and the kinetic spectral parameter
/// `sigma = P^2/2M + p_rel^2/2mu = p^2/2M_N + k^2/2M_theta`.
pub fn cm_reduce(
    p: &FourMomentum,
    k: &FourMomentum,
    masses: &MassParams,
) -> (FourMomentum, FourMomentum, f64) {
    let total = p.add(k);
    let rel = p
        .scale(masses.m_theta / masses.m_total())
        .add(&k.scale(-masses.m_n / masses.m_total()));
    let sigma = p.square() / (2.0 * masses.m_n) + k.square() / (2.0 * masses.m_theta);
    (total, rel, sigma)
}

/// The same `sigma` through the center-of-momentum variables; used as the
/// oracle for the reduction identity.
pub fn sigma_from_cm(total: &FourMomentum, rel: &FourMomentum, masses: &MassParams) -> f64 {
    total.square() / (2.0 * masses.m_total()) + rel.square() / (2.0 * masses.m_reduced())
}

// ---------------------------------------------------------------------------
// Form factors / density families
// ---------------------------------------------------------------------------

/// Supported coupling families, parametrized directly by the reduced spectral
/// density they generate.
#[derive(Debug, Clone)]
pub enum FormFactor {
    /// `J(s) = (gamma/pi) eta / ((s - sigma0)^2 + eta^2)`
    Lorentzian { gamma: f64, sigma0: f64, eta: f64 },
    /// `J(s) = (gamma/(eta sqrt(pi))) exp(-(s - sigma0)^2/eta^2)`
    Gaussian { gamma: f64, sigma0: f64, eta: f64 },
    /// `J(s) = c` everywhere (non-integrable; the rational case).
    Flat { c: f64 },
    /// Sampled density, interpolated and rationally continued.
    Tabulated { sigma: Vec<f64>, j: Vec<f64> },
}

/// Monotone (Fritsch-Carlson) cubic interpolant; never overshoots the data,
/// so non-negative samples stay non-negative.
#[derive(Debug, Clone)]
struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl Pchip {
    fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let n = xs.len();
        let mut d = vec![0.0; n];
        if n >= 2 {
            let h: Vec<f64> = (0..n - 1).map(|i| xs[i + 1] - xs[i]).collect();
            let del: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
            for i in 1..n - 1 {
                if del[i - 1] * del[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
                }
            }
            // One-sided endpoint slopes, clamped to preserve shape.
            let end_slope = |h0: f64, h1: f64, d0: f64, d1: f64| {
                let mut s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
                if s * d0 <= 0.0 {
                    s = 0.0;
                } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
                    s = 3.0 * d0;
                }
                s
            };
            if n > 2 {
                d[0] = end_slope(h[0], h[1], del[0], del[1]);
                d[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
            } else {
                d[0] = del[0];
                d[1] = del[0];
            }
        }
        Pchip { xs, ys, slopes: d }
    }

    /// Zero outside the sampled window.
    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] || x > self.xs[n - 1] {
            return 0.0;
        }
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.xs[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let h = self.xs[hi] - self.xs[lo];
        let t = (x - self.xs[lo]) / h;
        let (y0, y1, d0, d1) = (self.ys[lo], self.ys[hi], self.slopes[lo], self.slopes[hi]);
        let t2 = t * t;
        let t3 = t2 * t;
        y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + d0 * h * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + d1 * h * (t3 - t2)
    }
}

#[derive(Debug, Clone)]
enum DensityKind {
    Lorentzian { gamma: f64, sigma0: f64, eta: f64 },
    Gaussian { gamma: f64, sigma0: f64, eta: f64 },
    Flat { c: f64 },
    Tabulated { interp: Arc<Pchip>, continuation: Arc<AaaFit> },
}

// ---------------------------------------------------------------------------
// Channel model
// ---------------------------------------------------------------------------

/// The reduced fixed-P model: discrete level `omega_v = P^2 / 2 m_V` plus the
/// coupling spectral density `J(sigma) >= 0` with its analytic continuation.
/// Immutable after construction and safe to share across threads.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    pub masses: MassParams,
    pub total_momentum: FourMomentum,
    pub omega_v: f64,
    kind: DensityKind,
    continuation_reliable: bool,
    integrable: bool,
}

/// Builds the channel model for a form-factor family at total momentum `p`.
///
/// Tabulated grids with negative values are rejected; grids too sparse for a
/// trustworthy rational continuation yield a model flagged unreliable.
pub fn build_density(
    ff: &FormFactor,
    p: FourMomentum,
    masses: MassParams,
) -> Result<ChannelModel> {
    let omega_v = p.square() / (2.0 * masses.m_v);
    let (kind, reliable, integrable) = match ff {
        FormFactor::Lorentzian { gamma, sigma0, eta } => {
            if !(*gamma >= 0.0 && *eta > 0.0) {
                return Err(Error::InvalidInput(
                    "lorentzian needs gamma >= 0 and eta > 0".into(),
                ));
            }
            (
                DensityKind::Lorentzian { gamma: *gamma, sigma0: *sigma0, eta: *eta },
                true,
                true,
            )
        }
        FormFactor::Gaussian { gamma, sigma0, eta } => {
            if !(*gamma >= 0.0 && *eta > 0.0) {
                return Err(Error::InvalidInput("gaussian needs gamma >= 0 and eta > 0".into()));
            }
            (
                DensityKind::Gaussian { gamma: *gamma, sigma0: *sigma0, eta: *eta },
                true,
                true,
            )
        }
        FormFactor::Flat { c } => {
            if !(*c >= 0.0) {
                return Err(Error::InvalidInput("flat density must be non-negative".into()));
            }
            (DensityKind::Flat { c: *c }, true, false)
        }
        FormFactor::Tabulated { sigma, j } => {
            if sigma.len() != j.len() || sigma.len() < 4 {
                return Err(Error::InvalidInput(
                    "tabulated density needs at least 4 (sigma, J) rows".into(),
                ));
            }
            if j.iter().any(|v| *v < 0.0) {
                return Err(Error::InvalidInput(
                    "tabulated density has negative values".into(),
                ));
            }
            if sigma.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidInput(
                    "tabulated sigma grid must be strictly increasing".into(),
                ));
            }
            let fit = aaa(sigma, j, 1e-11, 60)?;
            let jmax = j.iter().fold(0.0f64, |m, v| m.max(*v));
            let reliable = sigma.len() >= 16 && fit.max_residual <= 1e-8 * jmax.max(1e-300);
            let interp = Pchip::new(sigma.clone(), j.clone());
            (
                DensityKind::Tabulated { interp: Arc::new(interp), continuation: Arc::new(fit) },
                reliable,
                true,
            )
        }
    };
    Ok(ChannelModel {
        masses,
        total_momentum: p,
        omega_v,
        kind,
        continuation_reliable: reliable,
        integrable,
    })
}

impl ChannelModel {
    /// Spectral density on the real axis.
    pub fn j(&self, sigma: f64) -> f64 {
        match &self.kind {
            DensityKind::Lorentzian { gamma, sigma0, eta } => {
                gamma / PI * eta / ((sigma - sigma0).powi(2) + eta * eta)
            }
            DensityKind::Gaussian { gamma, sigma0, eta } => {
                gamma / (eta * PI.sqrt()) * (-((sigma - sigma0) / eta).powi(2)).exp()
            }
            DensityKind::Flat { c } => *c,
            DensityKind::Tabulated { interp, .. } => interp.eval(sigma).max(0.0),
        }
    }

    /// Analytic continuation of the density. Exact for the closed-form
    /// families, rational approximation for tabulated ones.
    pub fn j_cont(&self, z: Complex64) -> Complex64 {
        match &self.kind {
            DensityKind::Lorentzian { gamma, sigma0, eta } => {
                let d = z - sigma0;
                gamma / PI * eta / (d * d + eta * eta)
            }
            DensityKind::Gaussian { gamma, sigma0, eta } => {
                let u = (z - sigma0) / eta;
                gamma / (eta * PI.sqrt()) * (-u * u).exp()
            }
            DensityKind::Flat { c } => Complex64::new(*c, 0.0),
            DensityKind::Tabulated { continuation, .. } => continuation.approx.eval_complex(z),
        }
    }

    /// d/dz of the continued density.
    pub fn j_cont_derivative(&self, z: Complex64) -> Complex64 {
        match &self.kind {
            DensityKind::Lorentzian { gamma, sigma0, eta } => {
                let d = z - sigma0;
                let den = d * d + eta * eta;
                -gamma / PI * eta * 2.0 * d / (den * den)
            }
            DensityKind::Gaussian { gamma, sigma0, eta } => {
                let u = (z - sigma0) / eta;
                gamma / (eta * PI.sqrt()) * (-u * u).exp() * (-2.0 * u / eta)
            }
            DensityKind::Flat { .. } => Complex64::new(0.0, 0.0),
            DensityKind::Tabulated { continuation, .. } => {
                continuation.approx.derivative_complex(z)
            }
        }
    }

    /// Whether the analytic continuation can be trusted off the axis.
    pub fn continuation_reliable(&self) -> bool {
        self.continuation_reliable
    }

    /// False for the flat family, whose density is not integrable.
    pub fn integrable(&self) -> bool {
        self.integrable
    }

    /// Total coupling weight `\int J` when available in closed form.
    pub fn total_weight(&self) -> Option<f64> {
        match &self.kind {
            DensityKind::Lorentzian { gamma, .. } | DensityKind::Gaussian { gamma, .. } => {
                Some(*gamma)
            }
            _ => None,
        }
    }

    /// True when the coupling vanishes identically (free model).
    pub fn is_free(&self) -> bool {
        match &self.kind {
            DensityKind::Lorentzian { gamma, .. } | DensityKind::Gaussian { gamma, .. } => {
                *gamma == 0.0
            }
            DensityKind::Flat { c } => *c == 0.0,
            DensityKind::Tabulated { interp, .. } => interp.ys.iter().all(|v| *v == 0.0),
        }
    }

    /// Poles of the continued density in the upper half-plane, which are the
    /// non-inner singularities of the S-matrix continuation.
    pub fn density_poles_upper(&self) -> Vec<Complex64> {
        match &self.kind {
            DensityKind::Lorentzian { sigma0, eta, gamma } => {
                if *gamma == 0.0 {
                    vec![]
                } else {
                    vec![Complex64::new(*sigma0, *eta)]
                }
            }
            DensityKind::Gaussian { .. } | DensityKind::Flat { .. } => vec![],
            DensityKind::Tabulated { continuation, .. } => {
                let (lo, hi) = self.support_window();
                let span = hi - lo;
                continuation
                    .approx
                    .poles_in_region((lo, hi), (1e-6 * span.max(1.0), span), 64)
            }
        }
    }

    /// Window containing the interesting density structure; grids and
    /// truncations are centered on it.
    pub fn support_window(&self) -> (f64, f64) {
        match &self.kind {
            DensityKind::Lorentzian { sigma0, eta, .. }
            | DensityKind::Gaussian { sigma0, eta, .. } => {
                (sigma0 - 40.0 * eta, sigma0 + 40.0 * eta)
            }
            DensityKind::Flat { .. } => (self.omega_v - 40.0, self.omega_v + 40.0),
            DensityKind::Tabulated { interp, .. } => {
                (interp.xs[0], interp.xs[interp.xs.len() - 1])
            }
        }
    }

    /// Representative center/scale of the density structure.
    pub fn center_scale(&self) -> (f64, f64) {
        match &self.kind {
            DensityKind::Lorentzian { sigma0, eta, .. }
            | DensityKind::Gaussian { sigma0, eta, .. } => (*sigma0, *eta),
            DensityKind::Flat { .. } => (self.omega_v, 1.0),
            DensityKind::Tabulated { interp, .. } => {
                let lo = interp.xs[0];
                let hi = interp.xs[interp.xs.len() - 1];
                (0.5 * (lo + hi), 0.125 * (hi - lo))
            }
        }
    }

    /// Closed-form Cauchy transform `\int J(s)/(z - s) ds` for `Im z > 0`,
    /// when the family admits one. The flat value is the symmetric-limit
    /// convention.
    pub fn cauchy_upper_closed(&self, z: Complex64) -> Option<Complex64> {
        match &self.kind {
            DensityKind::Lorentzian { gamma, sigma0, eta } => {
                Some(gamma / (z - sigma0 + Complex64::new(0.0, *eta)))
            }
            DensityKind::Flat { c } => Some(Complex64::new(0.0, -PI * c)),
            _ => None,
        }
    }

    /// Lower half-plane counterpart of [`Self::cauchy_upper_closed`].
    pub fn cauchy_lower_closed(&self, z: Complex64) -> Option<Complex64> {
        match &self.kind {
            DensityKind::Lorentzian { gamma, sigma0, eta } => {
                Some(gamma / (z - sigma0 - Complex64::new(0.0, *eta)))
            }
            DensityKind::Flat { c } => Some(Complex64::new(0.0, PI * c)),
            _ => None,
        }
    }

    /// Closed-form principal value `p.v. \int J(s')/(sigma - s') ds'`.
    pub fn pv_closed(&self, sigma: f64) -> Option<f64> {
        match &self.kind {
            DensityKind::Lorentzian { gamma, sigma0, eta } => {
                let d = sigma - sigma0;
                Some(gamma * d / (d * d + eta * eta))
            }
            DensityKind::Flat { .. } => Some(0.0),
            _ => None,
        }
    }

    /// Family tag for reports.
    pub fn family_name(&self) -> &'static str {
        match &self.kind {
            DensityKind::Lorentzian { .. } => "lorentzian",
            DensityKind::Gaussian { .. } => "gaussian",
            DensityKind::Flat { .. } => "flat",
            DensityKind::Tabulated { .. } => "tabulated",
        }
    }

    /// Family parameters as stored, for round-trip checks.
    pub fn family_params(&self) -> Vec<f64> {
        match &self.kind {
            DensityKind::Lorentzian { gamma, sigma0, eta }
            | DensityKind::Gaussian { gamma, sigma0, eta } => vec![*gamma, *sigma0, *eta],
            DensityKind::Flat { c } => vec![*c],
            DensityKind::Tabulated { .. } => vec![],
        }
    }
}

// ---------------------------------------------------------------------------
// Round-trip parameter recovery
// ---------------------------------------------------------------------------

/// Outcome of reconstructing the family parameters from sampled `J`.
#[derive(Debug, Clone)]
pub struct RoundtripReport {
    pub family: &'static str,
    pub original: Vec<f64>,
    pub recovered: Vec<f64>,
    pub max_relative_error: f64,
    pub converged: bool,
}

/// Reconstructs the analytic-family parameters from a fresh sampling of the
/// density and compares against the originals. Fit divergence is reported in
/// the result, not raised.
pub fn density_roundtrip_check(model: &ChannelModel) -> Result<RoundtripReport> {
    let original = model.family_params();
    match &model.kind {
        DensityKind::Flat { c } => {
            let samples: Vec<f64> = (0..101)
                .map(|i| model.j(model.omega_v - 5.0 + 0.1 * i as f64))
                .collect();
            let rec = samples.iter().sum::<f64>() / samples.len() as f64;
            let err = if *c == 0.0 { rec.abs() } else { (rec - c).abs() / c };
            Ok(RoundtripReport {
                family: "flat",
                original,
                recovered: vec![rec],
                max_relative_error: err,
                converged: true,
            })
        }
        DensityKind::Lorentzian { .. } => fit_family(model, false),
        DensityKind::Gaussian { .. } => fit_family(model, true),
        DensityKind::Tabulated { .. } => Err(Error::InvalidInput(
            "round-trip check applies to analytic families only".into(),
        )),
    }
}

/// Gauss-Newton fit of (gamma, sigma0, eta) against sampled density values.
fn fit_family(model: &ChannelModel, gaussian: bool) -> Result<RoundtripReport> {
    let original = model.family_params();
    let (c0, s0) = model.center_scale();
    let n = 401;
    let lo = c0 - 8.0 * s0;
    let hi = c0 + 8.0 * s0;
    let xs: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let ys: Vec<f64> = xs.iter().map(|&x| model.j(x)).collect();

    // Feature-based initial guess: peak location, height, half-width.
    let (imax, &peak) = ys
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty sample set");
    let sigma0_init = xs[imax];
    let half = peak / 2.0;
    let mut width = s0;
    for i in imax..n {
        if ys[i] < half {
            width = xs[i] - sigma0_init;
            break;
        }
    }
    let eta_init = if gaussian { width / (2f64.ln()).sqrt() } else { width };
    let gamma_init = if gaussian {
        peak * eta_init * PI.sqrt()
    } else {
        peak * PI * eta_init
    };

    let mut theta = [gamma_init, sigma0_init, eta_init];
    let mut converged = false;
    for _ in 0..60 {
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jtr = [0.0f64; 3];
        for (&x, &y) in xs.iter().zip(&ys) {
            let (m, grad) = family_value_grad(&theta, x, gaussian);
            let r = m - y;
            for a in 0..3 {
                jtr[a] += grad[a] * r;
                for b in 0..3 {
                    jtj[a][b] += grad[a] * grad[b];
                }
            }
        }
        let Some(step) = solve3(&jtj, &jtr) else { break };
        theta[0] -= step[0];
        theta[1] -= step[1];
        theta[2] -= step[2];
        theta[2] = theta[2].abs().max(1e-12);
        if step.iter().map(|s| s.abs()).fold(0.0, f64::max)
            < 1e-12 * (1.0 + theta.iter().map(|t| t.abs()).fold(0.0, f64::max))
        {
            converged = true;
            break;
        }
    }

    // Near-zero parameters are compared against the overall parameter scale.
    let pmax = original.iter().map(|o| o.abs()).fold(0.0, f64::max);
    let max_rel = original
        .iter()
        .zip(&theta)
        .map(|(o, r)| (o - r).abs() / o.abs().max(0.01 * pmax).max(1e-300))
        .fold(0.0, f64::max);
    Ok(RoundtripReport {
        family: if gaussian { "gaussian" } else { "lorentzian" },
        original,
        recovered: theta.to_vec(),
        max_relative_error: max_rel,
        converged,
    })
}

fn family_value_grad(theta: &[f64; 3], x: f64, gaussian: bool) -> (f64, [f64; 3]) {
    let (gamma, sigma0, eta) = (theta[0], theta[1], theta[2]);
    if gaussian {
        let u = (x - sigma0) / eta;
        let m = gamma / (eta * PI.sqrt()) * (-u * u).exp();
        let d_gamma = m / gamma.max(1e-300);
        let d_sigma0 = m * 2.0 * u / eta;
        let d_eta = m * (2.0 * u * u - 1.0) / eta;
        (m, [d_gamma, d_sigma0, d_eta])
    } else {
        let d = x - sigma0;
        let den = d * d + eta * eta;
        let m = gamma / PI * eta / den;
        let d_gamma = m / gamma.max(1e-300);
        let d_sigma0 = gamma / PI * eta * 2.0 * d / (den * den);
        let d_eta = gamma / PI * (den - 2.0 * eta * eta) / (den * den);
        (m, [d_gamma, d_sigma0, d_eta])
    }
}

fn solve3(a: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
    let mut m = *a;
    let mut r = *b;
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in 0..3 {
            if row == col {
                continue;
            }
            let f = m[row][col] / m[col][col];
            for c2 in 0..3 {
                m[row][c2] -= f * m[col][c2];
            }
            r[row] -= f * r[col];
        }
    }
    Some([r[0] / m[0][0], r[1] / m[1][1], r[2] / m[2][2]])
}

/// Quadrature check that an integrable family integrates to its strength.
pub fn check_normalization(model: &ChannelModel, tol: f64) -> Result<f64> {
    let (c, s) = model.center_scale();
    quad::integrate_about(&|x| Complex64::new(model.j(x), 0.0), c, s.max(1.0), tol)
        .map(|v| v.re)
}
