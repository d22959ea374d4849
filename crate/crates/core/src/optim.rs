//! Derivative-free Nelder-Mead simplex minimizer.

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    /// Stop once every vertex is within this distance (max-norm) of the best.
    pub x_tol: f64,
    /// Stop once the objective spread is below `f_rel * (1 + |f_best|)`.
    pub f_rel: f64,
    pub max_iter: usize,
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            x_tol: 1e-9,
            f_rel: 1e-13,
            max_iter: 10_000,
            initial_step: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

impl NelderMead {
    pub fn minimize<F>(&self, f: F, x0: &[f64]) -> Minimum
    where
        F: Fn(&[f64]) -> f64,
    {
        let n = x0.len();
        let eval = |x: &[f64]| {
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((x0.to_vec(), eval(x0)));
        for i in 0..n {
            let mut x = x0.to_vec();
            x[i] += self.initial_step;
            let v = eval(&x);
            simplex.push((x, v));
        }

        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iter {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0].1;
            let worst = simplex[n].1;
            let diameter = simplex[1..]
                .iter()
                .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if diameter <= self.x_tol || (best.is_finite() && worst - best <= self.f_rel * (1.0 + best.abs())) {
                converged = true;
                break;
            }
            iterations += 1;

            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / n as f64;
                }
            }
            let along = |t: f64| -> Vec<f64> {
                centroid.iter().zip(&simplex[n].0).map(|(c, w)| c + t * (c - w)).collect()
            };

            let xr = along(REFLECT);
            let fr = eval(&xr);
            if fr < simplex[0].1 {
                let xe = along(EXPAND);
                let fe = eval(&xe);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(CONTRACT);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = along(-CONTRACT);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < fr.min(simplex[n].1) {
                simplex[n] = (xc, fc);
                continue;
            }
            let x_best = simplex[0].0.clone();
            for (x, v) in simplex.iter_mut().skip(1) {
                for (xi, bi) in x.iter_mut().zip(&x_best) {
                    *xi = bi + SHRINK * (*xi - bi);
                }
                *v = eval(x);
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, value) = simplex.swap_remove(0);
        Minimum {
            x,
            value,
            iterations,
            converged,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let nm = NelderMead {
            max_iter: 20_000,
            ..NelderMead::default()
        };
        let m = nm.minimize(|x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2), &[-1.2, 1.0]);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{:?}", m.x);
    }

    #[test]
    fn one_dimensional() {
        let m = NelderMead::default().minimize(|x| (x[0] - 3.0).powi(2), &[0.0]);
        assert!((m.x[0] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn nan_is_rejected() {
        let m = NelderMead::default().minimize(|x| if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.5).powi(2) }, &[0.2]);
        assert!((m.x[0] - 0.5).abs() < 1e-6, "{m:?}");
    }

    #[test]
    fn iteration_cap() {
        let nm = NelderMead {
            max_iter: 3,
            ..NelderMead::default()
        };
        let m = nm.minimize(|x| x[0] * x[0] + x[1] * x[1], &[5.0, 5.0]);
        assert!(!m.converged);
        assert_eq!(m.iterations, 3);
    }
}
