//! Floating-point complex roots of rational polynomials (Aberth iteration).

use num_complex::Complex64;

use crate::algebra::{to_f64, Polynomial};

/// All complex roots of `p` with multiplicity; empty for constants.
pub fn complex_roots(p: &Polynomial) -> Vec<Complex64> {
    let Some(n) = p.deg() else {
        return Vec::new();
    };
    if n == 0 {
        return Vec::new();
    }
    let lc = to_f64(&p.coeffs()[n]);
    let coeffs: Vec<Complex64> = p
        .coeffs()
        .iter()
        .map(|c| Complex64::new(to_f64(c) / lc, 0.0))
        .collect();
    if n == 1 {
        return vec![-coeffs[0]];
    }
    let deriv: Vec<Complex64> = (1..=n).map(|i| coeffs[i] * i as f64).collect();
    let radius = 1.0 + coeffs[..n].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut roots: Vec<Complex64> = (0..n)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            Complex64::from_polar(radius * 0.5, angle)
        })
        .collect();
    for _ in 0..500 {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let z = roots[i];
            let pz = horner(&coeffs, z);
            let dz = horner(&deriv, z);
            if pz.norm() == 0.0 {
                continue;
            }
            let ratio = pz / dz;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let diff = z - roots[j];
                    if diff.norm() == 0.0 {
                        Complex64::new(0.0, 0.0)
                    } else {
                        diff.inv()
                    }
                })
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                roots[i] = z - step;
                max_step = max_step.max(step.norm() / (1.0 + z.norm()));
            }
        }
        if max_step < 1e-15 {
            break;
        }
    }
    // A few Newton polishing steps against the original coefficients.
    for z in roots.iter_mut() {
        for _ in 0..3 {
            let pz = horner(&coeffs, *z);
            let dz = horner(&deriv, *z);
            if dz.norm() > 0.0 {
                let next = *z - pz / dz;
                if next.is_finite() {
                    *z = next;
                }
            }
        }
    }
    roots
}

fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Evaluates a polynomial with f64-converted coefficients.
pub fn eval_complex(p: &Polynomial, z: Complex64) -> Complex64 {
    let coeffs: Vec<Complex64> = p
        .coeffs()
        .iter()
        .map(|c| Complex64::new(to_f64(c), 0.0))
        .collect();
    horner(&coeffs, z)
}

/// `log p(w)` (principal branch up to multiples of 2π) where `w = exp(log_w)`,
/// usable for arguments far beyond the f64 range.
pub fn log_eval(p: &Polynomial, log_w: Complex64) -> Option<Complex64> {
    let n = p.deg()?;
    let coeffs: Vec<f64> = p.coeffs().iter().map(to_f64).collect();
    if log_w.re < 20.0 {
        let w = log_w.exp();
        let v = coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * w + c);
        return (v.norm() > 0.0).then(|| v.ln());
    }
    // p(w) = w^n sum c_i w^{i-n}; the sum converges quickly for huge |w|.
    let inv = (-log_w).exp();
    let tail = coeffs
        .iter()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * inv + c);
    (tail.norm() > 0.0).then(|| tail.ln() + log_w * n as f64)
}
