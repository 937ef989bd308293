use lpres_core::model::*;
use lpres_core::resolvent::*;
use num_complex::Complex64;

fn main() {
    let model2 = build_density(
        &FormFactor::Lorentzian { gamma: 0.1, sigma0: 1.0, eta: 1.0 },
        FourMomentum::new(1.0, 0.0, 0.0, 0.0),
        MassParams::new(0.5, 1.0, 1.0).unwrap(),
    ).unwrap();
    let r = Resolvent::new(model2);
    let mu = Complex64::new(1.0, -0.11270166537925828);
    let gamma = mu.im.abs();
    let (re0, re1) = (mu.re - 40.0 * gamma, mu.re + 40.0 * gamma);
    let (im0, im1) = (-40.0 * gamma, -1e-6 * gamma);
    let n = 48usize;
    let vals: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| {
        let z = Complex64::new(re0 + (re1-re0)*i as f64/(n-1) as f64, im0 + (im1-im0)*j as f64/(n-1) as f64);
        r.h_second_sheet(z).map(|v| v.norm()).unwrap_or(f64::INFINITY)
    }).collect()).collect();
    let mut count = 0;
    for i in 1..n-1 { for j in 1..n-1 {
        let v = vals[i][j];
        if v.is_finite() && v <= vals[i-1][j] && v <= vals[i+1][j] && v <= vals[i][j-1] && v <= vals[i][j+1] {
            count += 1;
            let z0 = Complex64::new(re0 + (re1-re0)*i as f64/(n-1) as f64, im0 + (im1-im0)*j as f64/(n-1) as f64);
            if count < 12 { println!("candidate ({i},{j}) at {z0} val {v:.3e}"); }
        }
    }}
    println!("candidates: {count}");
}
