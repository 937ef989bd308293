//! Numerical integration kernels shared by the resolvent and state modules:
//! adaptive Gauss-Kronrod quadrature on the line, Cauchy principal values,
//! grid Hilbert transforms and Poisson half-plane extensions.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;

// ---------------------------------------------------------------------------
// Gauss-Kronrod 7-15 panel rule
// ---------------------------------------------------------------------------

// Kronrod abscissae (positive half) and weights, Gauss weights interleaved.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7-K15 panel: returns (kronrod value, error estimate).
fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    kronrod *= half;
    gauss *= half;
    // |K15 - G7| overestimates the error of the returned Kronrod value.
    (kronrod, (kronrod - gauss).norm())
}

/// Adaptive Gauss-Kronrod integration of `f` over the finite interval `[a, b]`.
///
/// Returns the integral and an error estimate; fails with a partial result
/// when `max_panels` bisections cannot reach `tol`.
pub fn adaptive_gk<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_panels: usize,
) -> Result<(Complex64, f64)> {
    struct Panel {
        a: f64,
        b: f64,
        value: Complex64,
        err: f64,
    }
    let (v, e) = gk15(f, a, b);
    let mut panels = vec![Panel { a, b, value: v, err: e }];
    let mut total_err: f64 = e;
    while total_err > tol && panels.len() < max_panels {
        // Split the worst panel.
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .expect("non-empty panel list");
        let worst = panels.swap_remove(idx);
        if worst.b - worst.a < f64::EPSILON * (worst.a.abs() + worst.b.abs() + 1.0) {
            // Interval exhausted at machine precision; keep it as-is.
            total_err -= worst.err;
            panels.push(Panel { err: 0.0, ..worst });
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = gk15(f, worst.a, mid);
        let (v2, e2) = gk15(f, mid, worst.b);
        total_err += e1 + e2 - worst.err;
        panels.push(Panel { a: worst.a, b: mid, value: v1, err: e1 });
        panels.push(Panel { a: mid, b: worst.b, value: v2, err: e2 });
    }
    let value = panels.iter().fold(Complex64::new(0.0, 0.0), |s, p| s + p.value);
    let err = panels.iter().map(|p| p.err).sum::<f64>();
    if err > tol {
        return Err(Error::QuadratureNonConvergence { partial: value, estimate: err });
    }
    Ok((value, err))
}

/// Adaptive integration of a decaying integrand over the whole real line.
///
/// Uses the rational map `sigma = center + scale * t / (1 - t^2)` so that
/// power-law and faster tails are resolved without explicit truncation.
/// Non-integrable inputs surface as a non-convergence error carrying the
/// partial estimate.
pub fn integrate<F: Fn(f64) -> Complex64>(f: &F, tol: f64) -> Result<Complex64> {
    integrate_about(f, 0.0, 1.0, tol)
}

/// Same as [`integrate`] with an explicit map center/scale, useful when the
/// integrand lives far from the origin.
pub fn integrate_about<F: Fn(f64) -> Complex64>(
    f: &F,
    center: f64,
    scale: f64,
    tol: f64,
) -> Result<Complex64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let g = |t: f64| {
        let om = 1.0 - t * t;
        if om <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let sigma = center + scale * t / om;
        let jac = scale * (1.0 + t * t) / (om * om);
        f(sigma) * jac
    };
    let (value, _) = adaptive_gk(&g, -1.0, 1.0, tol, 4000)?;
    Ok(value)
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F: Fn(f64) -> f64>(f: &F, tol: f64) -> Result<f64> {
    Ok(integrate(&|x| Complex64::new(f(x), 0.0), tol)?.re)
}

// ---------------------------------------------------------------------------
// Cauchy principal values
// ---------------------------------------------------------------------------

/// Numerator of a principal-value integral; the `1/(sigma - sigma')` kernel is
/// supplied by [`cauchy_pv`], not by the numerator.
pub struct PvIntegrand<F: Fn(f64) -> f64> {
    pub numerator: F,
    /// Optional explicit truncation window. When absent, a symmetric window
    /// about the pole is grown automatically from the numerator decay.
    pub window: Option<(f64, f64)>,
}

impl<F: Fn(f64) -> f64> PvIntegrand<F> {
    pub fn new(numerator: F) -> Self {
        PvIntegrand { numerator, window: None }
    }

    pub fn with_window(numerator: F, lo: f64, hi: f64) -> Self {
        PvIntegrand { numerator, window: Some((lo, hi)) }
    }
}

/// PV integral `p.v. \int num(s') / (sigma - s') ds'`.
///
/// Regularized by symmetric subtraction: in the symmetric convention the
/// integral reduces to `\int_0^inf (num(sigma-u) - num(sigma+u))/u du`, which
/// is smooth through `u = 0`; with an explicit window the subtracted smooth
/// part is integrated and the analytic log remainder
/// `num(sigma) ln|(sigma-a)/(b-sigma)|` is added.
pub fn cauchy_pv<F: Fn(f64) -> f64>(g: &PvIntegrand<F>, sigma: f64, tol: f64) -> Result<f64> {
    let num = &g.numerator;
    match g.window {
        Some((a, b)) => {
            if !(a < sigma && sigma < b) {
                return Err(Error::PoleOutsideWindow { pole: sigma, lo: a, hi: b });
            }
            let nc = num(sigma);
            let h = 1e-6 * (1.0 + sigma.abs());
            let deriv = (num(sigma + h) - num(sigma - h)) / (2.0 * h);
            let smooth = |s: f64| {
                let d = sigma - s;
                let v = if d.abs() < 1e-9 * (1.0 + sigma.abs()) {
                    -deriv
                } else {
                    (num(s) - nc) / d
                };
                Complex64::new(v, 0.0)
            };
            let (val, _) = adaptive_gk(&smooth, a, b, tol, 2000)?;
            Ok(val.re + nc * ((sigma - a).abs() / (b - sigma).abs()).ln())
        }
        None => {
            let h = 1e-6 * (1.0 + sigma.abs());
            let deriv = (num(sigma + h) - num(sigma - h)) / (2.0 * h);
            let diff = |u: f64| {
                if u < 1e-9 * (1.0 + sigma.abs()) {
                    -2.0 * deriv
                } else {
                    (num(sigma - u) - num(sigma + u)) / u
                }
            };
            // Grow the window until the antisymmetric part has decayed.
            let mut umax = 8.0 * (1.0 + sigma.abs());
            while umax < 1e9 {
                let probe = diff(umax).abs().max(diff(1.41 * umax).abs());
                if probe * umax < 0.02 * tol {
                    break;
                }
                umax *= 2.0;
            }
            let (val, _) =
                adaptive_gk(&|u| Complex64::new(diff(u), 0.0), 0.0, umax, tol, 4000)?;
            Ok(val.re)
        }
    }
}

// ---------------------------------------------------------------------------
// Grid functions
// ---------------------------------------------------------------------------

/// Real samples on a uniform grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    start: f64,
    step: f64,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(start: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidInput("grid step must be positive".into()));
        }
        if values.len() < 8 {
            return Err(Error::InvalidInput("grid needs at least 8 samples".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("grid values must be finite".into()));
        }
        Ok(GridFunction { start, step, values })
    }

    /// Sample a callable on `n` uniform points spanning `[lo, hi]`.
    pub fn sample<F: Fn(f64) -> f64>(lo: f64, hi: f64, n: usize, f: F) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidInput("empty grid range".into()));
        }
        let step = (hi - lo) / (n as f64 - 1.0);
        let values = (0..n).map(|i| f(lo + step * i as f64)).collect();
        GridFunction::new(lo, step, values)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn end(&self) -> f64 {
        self.start + self.step * (self.values.len() - 1) as f64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Linear interpolation inside the grid, clamped at the ends.
    pub fn interp(&self, x: f64) -> f64 {
        let t = (x - self.start) / self.step;
        if t <= 0.0 {
            return self.values[0];
        }
        let n = self.values.len();
        if t >= (n - 1) as f64 {
            return self.values[n - 1];
        }
        let i = t.floor() as usize;
        let frac = t - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

// ---------------------------------------------------------------------------
// Hilbert transform on a grid
// ---------------------------------------------------------------------------

/// Grid Hilbert transform plus a quality flag; `flagged` is set when the grid
/// was too short for the requested handling of the tails.
#[derive(Debug, Clone)]
pub struct HilbertResult {
    pub grid: GridFunction,
    pub flagged: bool,
}

fn xlnx(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v * v.abs().ln()
    }
}

/// Exact PV moment of the unit hat element: `\int_{-1}^{1} (1-|t|)/(m-t) dt`.
fn hat_kernel(m: f64) -> f64 {
    if m.abs() >= 50.0 {
        let inv = 1.0 / m;
        let inv2 = inv * inv;
        inv * (1.0 + inv2 * (1.0 / 6.0 + inv2 * (1.0 / 15.0)))
    } else {
        xlnx(m + 1.0) + xlnx(m - 1.0) - 2.0 * xlnx(m)
    }
}

/// FFT-based linear convolution of `signal` with `kernel[d]` indexed by the
/// offset `d = i - j` from `-(n-1)` to `n-1`.
fn toeplitz_apply(kernel: &[f64], signal: &[f64]) -> Vec<f64> {
    let n = signal.len();
    debug_assert_eq!(kernel.len(), 2 * n - 1);
    let m = (2 * n - 1).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    let ifft = planner.plan_fft_inverse(m);

    // kernel laid out so that index (i - j + n - 1) lines up after convolution
    let mut ka: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); m];
    for (d, &k) in kernel.iter().enumerate() {
        ka[d] = Complex64::new(k, 0.0);
    }
    let mut sa: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); m];
    for (j, &s) in signal.iter().enumerate() {
        sa[j] = Complex64::new(s, 0.0);
    }
    fft.process(&mut ka);
    fft.process(&mut sa);
    for i in 0..m {
        ka[i] *= sa[i] / m as f64;
    }
    ifft.process(&mut ka);
    (0..n).map(|i| ka[i + n - 1].re).collect()
}

/// Least-squares fit of `f ~ a/x + b/x^2` over the given samples.
fn fit_inverse_power(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let mut s11 = 0.0;
    let mut s12 = 0.0;
    let mut s22 = 0.0;
    let mut r1 = 0.0;
    let mut r2 = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        if x == 0.0 {
            return None;
        }
        let b1 = 1.0 / x;
        let b2 = b1 * b1;
        s11 += b1 * b1;
        s12 += b1 * b2;
        s22 += b2 * b2;
        r1 += b1 * y;
        r2 += b2 * y;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() < 1e-300 {
        return None;
    }
    Some(((s22 * r1 - s12 * r2) / det, (s11 * r2 - s12 * r1) / det))
}

/// Least-squares fit of `f ~ c + alpha ln(u/R) + a/u` over tail samples.
fn fit_tail_log_model(xs: &[f64], ys: &[f64], r: f64) -> Option<(f64, f64, f64)> {
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for (&u, &y) in xs.iter().zip(ys) {
        if u <= 0.0 {
            return None;
        }
        let basis = [1.0, (u / r).ln(), 1.0 / u];
        for i in 0..3 {
            rhs[i] += basis[i] * y;
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
        }
    }
    // Gaussian elimination with partial pivoting.
    let mut aug = [[0.0f64; 4]; 3];
    for i in 0..3 {
        aug[i][..3].copy_from_slice(&m[i]);
        aug[i][3] = rhs[i];
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| aug[i][col].abs().total_cmp(&aug[j][col].abs()))?;
        if aug[piv][col].abs() < 1e-300 {
            return None;
        }
        aug.swap(col, piv);
        for row in 0..3 {
            if row == col {
                continue;
            }
            let f = aug[row][col] / aug[col][col];
            for k in col..4 {
                aug[row][k] -= f * aug[col][k];
            }
        }
    }
    Some((aug[0][3] / aug[0][0], aug[1][3] / aug[1][1], aug[2][3] / aug[2][2]))
}

/// `\int_R^inf y ln(u/R) / ((u - x)^2 + y^2) du` on the compactified
/// variable `u = R/t`.
fn poisson_log_tail(r: f64, x: f64, y: f64) -> f64 {
    let integrand = |t: f64| {
        if t <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let u = r / t;
        let p = y / ((u - x) * (u - x) + y * y);
        Complex64::new(p * (1.0 / t).ln() * r / (t * t), 0.0)
    };
    adaptive_gk(&integrand, 0.0, 1.0, 1e-11, 2000)
        .map(|(v, _)| v.re)
        .unwrap_or(0.0)
}

/// `\int_R^inf du / (u (u + c))` for `R > 0`, `R + c > 0`.
fn tail_i1(r: f64, c: f64) -> f64 {
    if c.abs() < 1e-8 * r {
        (1.0 - 0.5 * c / r) / r
    } else {
        (c / r).ln_1p() / c
    }
}

/// `\int_R^inf du / (u^2 (u + c))` for `R > 0`, `R + c > 0`.
fn tail_i2(r: f64, c: f64) -> f64 {
    if c.abs() < 1e-8 * r {
        0.5 / (r * r) - c / (3.0 * r * r * r)
    } else {
        1.0 / (c * r) - (c / r).ln_1p() / (c * c)
    }
}

/// Grid samples of the Hilbert transform
/// `H[f](x) = (1/pi) p.v. \int f(s)/(x - s) ds`.
///
/// The windowed part is the exact PV convolution of the piecewise-linear
/// interpolant (an O(n log n) Toeplitz product); the tails beyond the window
/// are extended with a fitted `a/s + b/s^2` model and integrated in closed
/// form. Matches [`cauchy_pv`] pointwise on interior points.
pub fn hilbert_transform(f: &GridFunction) -> HilbertResult {
    let n = f.len();
    let vals = f.values();
    let maxabs = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let kernel: Vec<f64> = (0..2 * n - 1)
        .map(|idx| hat_kernel(idx as f64 - (n - 1) as f64))
        .collect();
    let mut out = toeplitz_apply(&kernel, vals);

    // Tail handling: fit inverse powers on the outer quarter of each side.
    let mut flagged = false;
    let edge_small = maxabs * 1e-2;
    if vals[0].abs() > edge_small || vals[n - 1].abs() > edge_small {
        flagged = true;
    }
    let fit_len = (n / 8).max(16).min(n / 2);
    let right_ok = f.end() > 0.0;
    let left_ok = f.start() < 0.0;
    if !(right_ok && left_ok) {
        flagged = true;
    }

    let right_fit = if right_ok {
        let xs: Vec<f64> = (n - fit_len..n).map(|i| f.x(i)).collect();
        let ys: Vec<f64> = vals[n - fit_len..].to_vec();
        fit_inverse_power(&xs, &ys)
    } else {
        None
    };
    let left_fit = if left_ok {
        let xs: Vec<f64> = (0..fit_len).map(|i| f.x(i)).collect();
        let ys: Vec<f64> = vals[..fit_len].to_vec();
        fit_inverse_power(&xs, &ys)
    } else {
        None
    };

    let rr = f.end();
    let rl = -f.start();
    for (i, o) in out.iter_mut().enumerate() {
        let x = f.x(i);
        // Right tail: p.v. \int_R^inf (a/s + b/s^2)/(x - s) ds.
        if let Some((a, b)) = right_fit {
            if rr - x > 0.0 {
                *o += -(a * tail_i1(rr, -x) + b * tail_i2(rr, -x));
            }
        }
        // Left tail via s -> -u.
        if let Some((a, b)) = left_fit {
            if rl + x > 0.0 {
                *o += -a * tail_i1(rl, x) + b * tail_i2(rl, x);
            }
        }
        *o /= std::f64::consts::PI;
    }

    let grid = GridFunction::new(f.start(), f.step(), out).expect("same shape as input");
    HilbertResult { grid, flagged }
}

// ---------------------------------------------------------------------------
// Cauchy boundary integral
// ---------------------------------------------------------------------------

/// `\int f(s)/(s - z) ds` over the sampled window for complex boundary data
/// on a uniform grid, with fitted `a/s + b/s^2` tails.
///
/// Panels integrate the piecewise-linear interpolant exactly against the
/// Cauchy kernel; `z` must keep a safe distance from the sampled interval.
pub fn cauchy_boundary_integral(
    start: f64,
    step: f64,
    values: &[Complex64],
    z: Complex64,
) -> Complex64 {
    let n = values.len();
    let x = |i: usize| start + step * i as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n - 1 {
        let (s0, s1) = (x(i), x(i + 1));
        let (f0, f1) = (values[i], values[i + 1]);
        let q = (f1 - f0) / step;
        let p = f0 - q * s0;
        // int (p + q s)/(s - z) ds = q (s1 - s0) + (p + q z) log((s1-z)/(s0-z))
        let lg = ((s1 - z) / (s0 - z)).ln();
        acc += q * step + (p + q * z) * lg;
    }

    // Tails from inverse-power fits (complex coefficients).
    let fit_len = (n / 8).max(16).min(n / 2);
    let fit = |xs: &[f64], ys: &[Complex64]| -> Option<(Complex64, Complex64)> {
        let re: Vec<f64> = ys.iter().map(|v| v.re).collect();
        let im: Vec<f64> = ys.iter().map(|v| v.im).collect();
        let (ar, br) = fit_inverse_power(xs, &re)?;
        let (ai, bi) = fit_inverse_power(xs, &im)?;
        Some((Complex64::new(ar, ai), Complex64::new(br, bi)))
    };
    // int_R^inf 1/(s (s - z)) ds and 1/(s^2 (s - z)) ds, complex z.
    let i1 = |r: f64, zz: Complex64| -(((Complex64::new(1.0, 0.0) - zz / r).ln()) / zz);
    let i2 = |r: f64, zz: Complex64| {
        -(((Complex64::new(1.0, 0.0) - zz / r).ln()) / (zz * zz)) - 1.0 / (zz * r)
    };
    let end = x(n - 1);
    if end > 0.0 {
        let xs: Vec<f64> = (n - fit_len..n).map(x).collect();
        if let Some((a, b)) = fit(&xs, &values[n - fit_len..]) {
            acc += a * i1(end, z) + b * i2(end, z);
        }
    }
    if start < 0.0 {
        // Mirror s -> -u: int_{-inf}^{L} f/(s - z) ds with f ~ a/s + b/s^2.
        let r = -start;
        let xs: Vec<f64> = (0..fit_len).map(x).collect();
        if let Some((a, b)) = fit(&xs, &values[..fit_len]) {
            // f(-u) = -a/u + b/u^2; 1/(s - z) = -1/(u + z)
            acc += a * i1(r, -z) - b * i2(r, -z);
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// Poisson extension
// ---------------------------------------------------------------------------

/// Harmonic extension of grid boundary data to a point in the upper half-plane:
/// `(1/pi) \int Im z * f(s) / ((s - Re z)^2 + (Im z)^2) ds`.
///
/// Inside the window the piecewise-linear interpolant is integrated exactly
/// against the Poisson kernel; the tails use the fitted
/// `c + a/s + b/s^2` model in closed form.
pub fn poisson_extend(boundary: &GridFunction, z: Complex64) -> Result<f64> {
    let y = z.im;
    if !(y > 0.0) {
        return Err(Error::NotUpperHalfPlane(z));
    }
    let x = z.re;
    let n = boundary.len();
    let vals = boundary.values();

    // Exact panel integrals of (p + q s) * y / ((s-x)^2 + y^2).
    let mut acc = 0.0;
    let prim_atan = |s: f64| ((s - x) / y).atan();
    let prim_log = |s: f64| ((s - x) * (s - x) + y * y).ln();
    for i in 0..n - 1 {
        let s0 = boundary.x(i);
        let s1 = boundary.x(i + 1);
        let f0 = vals[i];
        let f1 = vals[i + 1];
        let q = (f1 - f0) / (s1 - s0);
        let p = f0 - q * s0;
        acc += (p + q * x) * (prim_atan(s1) - prim_atan(s0))
            + 0.5 * q * y * (prim_log(s1) - prim_log(s0));
    }

    // Tails: constant + log + inverse power fitted at the window edges. The
    // log term carries densities whose logarithm keeps growing (outer-phase
    // work); its Poisson moment is integrated numerically on a compactified
    // variable.
    let fit_len = (n / 8).max(16).min(n / 2);
    let w = Complex64::new(x, y);
    let mut tail = 0.0;
    // Right side.
    if boundary.end() > 0.0 {
        let r = boundary.end();
        let xs: Vec<f64> = (n - fit_len..n).map(|i| boundary.x(i)).collect();
        let ys: Vec<f64> = vals[n - fit_len..].to_vec();
        if let Some((c0, alpha, a)) = fit_tail_log_model(&xs, &ys, r) {
            tail += c0 * (std::f64::consts::FRAC_PI_2 - prim_atan(r));
            let lg = (Complex64::new(1.0, 0.0) - w / r).ln();
            tail += a * y * (-(lg / w)).im;
            tail += alpha * poisson_log_tail(r, x, y);
        }
    }
    // Left side, mirrored with s -> -u, so the kernel center moves to -x.
    if boundary.start() < 0.0 {
        let r = -boundary.start();
        let wm = Complex64::new(-x, y);
        let xs: Vec<f64> = (0..fit_len).map(|i| -boundary.x(i)).collect();
        let ys: Vec<f64> = vals[..fit_len].to_vec();
        if let Some((c0, alpha, a)) = fit_tail_log_model(&xs, &ys, r) {
            tail += c0 * (std::f64::consts::FRAC_PI_2 - ((r + x) / y).atan());
            let lg = (Complex64::new(1.0, 0.0) - wm / r).ln();
            tail += a * y * (-(lg / wm)).im;
            tail += alpha * poisson_log_tail(r, -x, y);
        }
    }

    Ok((acc + tail) / std::f64::consts::PI)
}
