//! Adaptive barycentric rational approximation (AAA) used to continue
//! tabulated spectral densities off the real axis.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Rational interpolant in barycentric form
/// `r(z) = sum_j w_j f_j / (z - z_j) / sum_j w_j / (z - z_j)`.
#[derive(Debug, Clone)]
pub struct BarycentricRational {
    support: Vec<f64>,
    fvals: Vec<f64>,
    weights: Vec<f64>,
}

impl BarycentricRational {
    fn data_scale(&self) -> f64 {
        self.fvals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Result of an AAA fit with its quality diagnostics.
#[derive(Debug, Clone)]
pub struct AaaFit {
    pub approx: BarycentricRational,
    /// Max |data - fit| over the sample set.
    pub max_residual: f64,
    pub terms: usize,
}

/// Greedy AAA fit of samples `(xs, ys)` to relative tolerance `rel_tol`.
pub fn aaa(xs: &[f64], ys: &[f64], rel_tol: f64, max_terms: usize) -> Result<AaaFit> {
    if xs.len() != ys.len() || xs.len() < 4 {
        return Err(Error::InvalidInput("AAA needs at least 4 samples".into()));
    }
    let n = xs.len();
    let scale = ys.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok(AaaFit {
            approx: BarycentricRational {
                support: vec![xs[0]],
                fvals: vec![0.0],
                weights: vec![1.0],
            },
            max_residual: 0.0,
            terms: 1,
        });
    }
    let tol = rel_tol * scale;

    let mut support_idx: Vec<usize> = Vec::new();
    let mean = ys.iter().sum::<f64>() / n as f64;
    let mut residual: Vec<f64> = ys.iter().map(|y| y - mean).collect();
    let mut best = AaaFit {
        approx: BarycentricRational {
            support: vec![xs[0]],
            fvals: vec![ys[0]],
            weights: vec![1.0],
        },
        max_residual: f64::INFINITY,
        terms: 1,
    };

    for _ in 0..max_terms.min(n / 2) {
        // Add the worst point to the support set.
        let (next, _) = residual
            .iter()
            .enumerate()
            .filter(|(i, _)| !support_idx.contains(i))
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .expect("non-support points remain");
        support_idx.push(next);
        let k = support_idx.len();

        let others: Vec<usize> = (0..n).filter(|i| !support_idx.contains(i)).collect();
        if others.is_empty() {
            break;
        }
        // Loewner matrix rows over non-support points.
        let mut a = DMatrix::<f64>::zeros(others.len(), k);
        for (r, &i) in others.iter().enumerate() {
            for (c, &j) in support_idx.iter().enumerate() {
                a[(r, c)] = (ys[i] - ys[j]) / (xs[i] - xs[j]);
            }
        }
        let svd = a.svd(false, true);
        let vt = svd.v_t.as_ref().expect("requested V^T");
        // Row of V^T for the smallest singular value.
        let last = svd.singular_values.len() - 1;
        let weights: Vec<f64> = (0..k).map(|c| vt[(last, c)]).collect();

        let approx = BarycentricRational {
            support: support_idx.iter().map(|&i| xs[i]).collect(),
            fvals: support_idx.iter().map(|&i| ys[i]).collect(),
            weights,
        };
        let mut max_res = 0.0f64;
        for i in 0..n {
            let r = ys[i] - approx.eval_real(xs[i]);
            residual[i] = r;
            max_res = max_res.max(r.abs());
        }
        if max_res < best.max_residual {
            best = AaaFit { approx: approx.clone(), max_residual: max_res, terms: k };
        }
        if max_res <= tol {
            break;
        }
    }
    Ok(best)
}

impl BarycentricRational {
    pub fn eval_real(&self, x: f64) -> f64 {
        self.eval_complex(Complex64::new(x, 0.0)).re
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = Complex64::new(0.0, 0.0);
        for ((&zj, &fj), &wj) in self.support.iter().zip(&self.fvals).zip(&self.weights) {
            let d = z - zj;
            if d.norm() < 1e-14 * (1.0 + zj.abs()) {
                return Complex64::new(fj, 0.0);
            }
            let c = wj / d;
            num += c * fj;
            den += c;
        }
        num / den
    }

    pub fn derivative_complex(&self, z: Complex64) -> Complex64 {
        let h = 1e-6 * (1.0 + z.norm());
        (self.eval_complex(z + h) - self.eval_complex(z - h)) / (2.0 * h)
    }

    fn denominator(&self, z: Complex64) -> Complex64 {
        self.support
            .iter()
            .zip(&self.weights)
            .fold(Complex64::new(0.0, 0.0), |s, (&zj, &wj)| s + wj / (z - zj))
    }

    fn denominator_deriv(&self, z: Complex64) -> Complex64 {
        self.support
            .iter()
            .zip(&self.weights)
            .fold(Complex64::new(0.0, 0.0), |s, (&zj, &wj)| {
                let d = z - zj;
                s - wj / (d * d)
            })
    }

    /// Poles of the rational approximant inside the given rectangle.
    ///
    /// Local minima of the barycentric denominator on a fine grid seed Newton
    /// polishing; Froissart doublets are rejected by their residue estimate.
    pub fn poles_in_region(
        &self,
        re_range: (f64, f64),
        im_range: (f64, f64),
        grid: usize,
    ) -> Vec<Complex64> {
        let mut found: Vec<Complex64> = Vec::new();
        let (re0, re1) = re_range;
        let (im0, im1) = im_range;
        let n = grid.max(8);
        let at = |i: usize, j: usize| {
            Complex64::new(
                re0 + (re1 - re0) * i as f64 / (n - 1) as f64,
                im0 + (im1 - im0) * j as f64 / (n - 1) as f64,
            )
        };
        let vals: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| self.denominator(at(i, j)).norm()).collect())
            .collect();
        for i in 0..n {
            for j in 0..n {
                let v = vals[i][j];
                let is_min = (i == 0 || v <= vals[i - 1][j])
                    && (i == n - 1 || v <= vals[i + 1][j])
                    && (j == 0 || v <= vals[i][j - 1])
                    && (j == n - 1 || v <= vals[i][j + 1]);
                if !is_min || !v.is_finite() {
                    continue;
                }
                let mut z = at(i, j);
                let mut ok = false;
                for _ in 0..60 {
                    let d = self.denominator(z);
                    let dp = self.denominator_deriv(z);
                    if dp.norm() == 0.0 {
                        break;
                    }
                    let step = d / dp;
                    z -= step;
                    if step.norm() < 1e-13 * (1.0 + z.norm()) {
                        ok = true;
                        break;
                    }
                }
                if !ok || z.re < re0 || z.re > re1 || z.im < im0 || z.im > im1 {
                    continue;
                }
                // A genuine pole dwarfs the data scale at small offsets;
                // denominator zeros cancelled by the numerator (Froissart
                // doublets, inactive support zeros) stay bounded.
                let eps = 1e-5 * (1.0 + z.norm());
                if self.eval_complex(z + eps).norm() < 10.0 * self.data_scale() {
                    continue;
                }
                if found.iter().all(|p| (p - z).norm() > 1e-6 * (1.0 + z.norm())) {
                    found.push(z);
                }
            }
        }
        found.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        found
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn aaa_reproduces_lorentzian_off_grid() {
        let j = |s: f64| (0.1 / PI) / ((s - 1.0) * (s - 1.0) + 1.0);
        let xs: Vec<f64> = (0..201).map(|i| -19.0 + 0.2 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| j(x)).collect();
        let fit = aaa(&xs, &ys, 1e-12, 40).unwrap();
        assert!(fit.max_residual < 1e-12);
        for &x in &[0.13, 1.77, -3.4] {
            assert!((fit.approx.eval_real(x) - j(x)).abs() < 1e-10);
        }
        // Continuation into the plane matches the true rational function.
        let z = Complex64::new(0.5, -0.4);
        let truth = (0.1 / PI) / ((z - 1.0) * (z - 1.0) + 1.0);
        assert!((fit.approx.eval_complex(z) - truth).norm() < 1e-8);
    }

    #[test]
    fn aaa_finds_density_poles() {
        let j = |s: f64| (0.1 / PI) / ((s - 1.0) * (s - 1.0) + 1.0);
        let xs: Vec<f64> = (0..201).map(|i| -19.0 + 0.2 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| j(x)).collect();
        let fit = aaa(&xs, &ys, 1e-12, 40).unwrap();
        let poles = fit.approx.poles_in_region((-2.0, 4.0), (0.1, 3.0), 12);
        assert_eq!(poles.len(), 1, "poles found: {poles:?}");
        assert!((poles[0] - Complex64::new(1.0, 1.0)).norm() < 1e-6);
    }

    #[test]
    fn aaa_handles_zero_data() {
        let xs: Vec<f64> = (0..32).map(|i| i as f64).collect();
        let ys = vec![0.0; 32];
        let fit = aaa(&xs, &ys, 1e-12, 10).unwrap();
        assert_eq!(fit.max_residual, 0.0);
        assert_eq!(fit.approx.eval_real(3.3), 0.0);
    }
}
