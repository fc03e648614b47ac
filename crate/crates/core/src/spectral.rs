//! Derivatives of uniformly sampled periodic data.

use std::f64::consts::PI;

/// First and second derivatives by 4th-order central differences with
/// periodic wrap-around. `period` is the length of the sampled interval.
pub(crate) fn fd4_derivatives(f: &[f64], period: f64) -> (Vec<f64>, Vec<f64>) {
    let m = f.len();
    let h = period / m as f64;
    let at = |i: isize| f[i.rem_euclid(m as isize) as usize];
    let mut d1 = Vec::with_capacity(m);
    let mut d2 = Vec::with_capacity(m);
    for i in 0..m as isize {
        let (fm2, fm1, f0, fp1, fp2) = (at(i - 2), at(i - 1), at(i), at(i + 1), at(i + 2));
        d1.push((fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h));
        d2.push((-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h));
    }
    (d1, d2)
}

/// First and second derivatives by trigonometric interpolation (direct DFT,
/// O(m²)). The Nyquist mode is dropped from the first derivative.
pub(crate) fn spectral_derivatives(f: &[f64], period: f64) -> (Vec<f64>, Vec<f64>) {
    let m = f.len();
    let (cos_t, sin_t): (Vec<f64>, Vec<f64>) = (0..m)
        .map(|j| (2.0 * PI * j as f64 / m as f64).sin_cos())
        .map(|(s, c)| (c, s))
        .unzip();

    // the mean mode has zero derivative; removing it keeps its roundoff out
    let mean = f.iter().sum::<f64>() / m as f64;
    let g: Vec<f64> = f.iter().map(|v| v - mean).collect();

    let mut re = vec![0.0; m];
    let mut im = vec![0.0; m];
    for k in 0..m {
        let (mut sr, mut si) = (0.0, 0.0);
        for (j, v) in g.iter().enumerate() {
            let idx = (k * j) % m;
            sr += v * cos_t[idx];
            si -= v * sin_t[idx];
        }
        re[k] = sr;
        im[k] = si;
    }

    let base = 2.0 * PI / period;
    let wave = |k: usize| -> f64 {
        if 2 * k < m {
            k as f64
        } else {
            k as f64 - m as f64
        }
    };
    let mut d1 = vec![0.0; m];
    let mut d2 = vec![0.0; m];
    for j in 0..m {
        let (mut a1, mut a2) = (0.0, 0.0);
        for k in 0..m {
            let w = base * wave(k);
            let idx = (k * j) % m;
            let (c, s) = (cos_t[idx], sin_t[idx]);
            // (re + i im)(c + i s)
            let pr = re[k] * c - im[k] * s;
            let pi = re[k] * s + im[k] * c;
            if 2 * k != m {
                // i w (pr + i pi) -> real part -w pi
                a1 += -w * pi;
            }
            a2 += -w * w * pr;
        }
        d1[j] = a1 / m as f64;
        d2[j] = a2 / m as f64;
    }
    (d1, d2)
}
