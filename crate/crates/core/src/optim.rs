//! Derivative-free simplex minimizer (Nelder-Mead) used by the mixture fit.

#[derive(Debug, Clone)]
pub(crate) struct SimplexResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
}

/// Minimize `f` from `x0` with initial per-coordinate steps `scale`.
/// Stops when both the function spread and the simplex diameter fall below
/// `tol` (relative to the best value), or after `max_iter` reflections.
pub(crate) fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    scale: &[f64],
    tol: f64,
    max_iter: usize,
) -> SimplexResult {
    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const RHO: f64 = 0.5; // contraction
    const SIGMA: f64 = 0.5; // shrink

    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for k in 0..n {
        let mut v = x0.to_vec();
        v[k] += scale[k];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;

        // Order the simplex by function value.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        let spread = values[worst] - values[best];
        let mut diameter = 0.0f64;
        for v in &simplex {
            for (a, b) in v.iter().zip(simplex[best].iter()) {
                diameter = diameter.max((a - b).abs());
            }
        }
        if spread <= tol * (1.0 + values[best].abs()) && diameter <= tol.sqrt() {
            break;
        }

        // Centroid of all but the worst.
        let mut centroid = vec![0.0; n];
        for &i in order.iter().take(n) {
            for (c, x) in centroid.iter_mut().zip(simplex[i].iter()) {
                *c += x / n as f64;
            }
        }

        let point = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(simplex[worst].iter())
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let reflected = point(ALPHA);
        let f_ref = f(&reflected);

        if f_ref < values[best] {
            let expanded = point(GAMMA);
            let f_exp = f(&expanded);
            if f_exp < f_ref {
                simplex[worst] = expanded;
                values[worst] = f_exp;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_ref;
            }
            continue;
        }
        if f_ref < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_ref;
            continue;
        }

        let contracted = point(-RHO);
        let f_con = f(&contracted);
        if f_con < values[worst] {
            simplex[worst] = contracted;
            values[worst] = f_con;
            continue;
        }

        // Shrink toward the best vertex.
        let best_point = simplex[best].clone();
        for i in 0..=n {
            if i == best {
                continue;
            }
            for (x, b) in simplex[i].iter_mut().zip(best_point.iter()) {
                *x = b + SIGMA * (*x - b);
            }
            values[i] = f(&simplex[i]);
        }
    }

    let (best_idx, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .expect("nonempty simplex");
    SimplexResult {
        x: simplex[best_idx].clone(),
        fx: values[best_idx],
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_quadratic() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + 2.0 * (x[1] + 1.0).powi(2);
        let r = nelder_mead(f, &[0.0, 0.0], &[1.0, 1.0], 1e-14, 2000);
        assert!(r.iterations < 2000);
        assert!((r.x[0] - 3.0).abs() <= 1e-6);
        assert!((r.x[1] + 1.0).abs() <= 1e-6);
    }

    #[test]
    fn minimizes_rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead(f, &[-1.2, 1.0], &[0.5, 0.5], 1e-16, 5000);
        assert!((r.x[0] - 1.0).abs() <= 1e-5, "x = {:?}", r.x);
        assert!((r.x[1] - 1.0).abs() <= 1e-5);
    }
}
