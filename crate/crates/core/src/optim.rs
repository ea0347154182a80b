//! Derivative-free maximization by Nelder-Mead, deterministic given the
//! starting point.

pub struct NelderMead {
    pub max_evals: usize,
    pub ftol: f64,
    pub initial_step: f64,
}

/// Convergence is visible through `evals`: a run that used the full budget
/// did not reach `ftol`.
pub struct NmOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self { max_evals: 2000, ftol: 1e-9, initial_step: 0.5 }
    }
}

impl NelderMead {
    /// Maximize `f` starting from `x0`.
    pub fn maximize<F: FnMut(&[f64]) -> f64>(&self, x0: &[f64], mut f: F) -> NmOutcome {
        let n = x0.len();
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            // minimize the negation
            -f(x)
        };

        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        simplex.push(x0.to_vec());
        for i in 0..n {
            let mut v = x0.to_vec();
            v[i] += self.initial_step;
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();

        let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
        while evals < self.max_evals {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
            let (best, worst, second_worst) = (order[0], order[n], order[n - 1]);
            if (values[worst] - values[best]).abs() < self.ftol {
                break;
            }

            let mut centroid = vec![0.0; n];
            for &i in order.iter().take(n) {
                for d in 0..n {
                    centroid[d] += simplex[i][d] / n as f64;
                }
            }

            let point = |t: f64| -> Vec<f64> {
                (0..n).map(|d| centroid[d] + t * (centroid[d] - simplex[worst][d])).collect()
            };

            let reflected = point(alpha);
            let fr = eval(&reflected, &mut evals);
            if fr < values[best] {
                let expanded = point(gamma);
                let fe = eval(&expanded, &mut evals);
                if fe < fr {
                    simplex[worst] = expanded;
                    values[worst] = fe;
                } else {
                    simplex[worst] = reflected;
                    values[worst] = fr;
                }
            } else if fr < values[second_worst] {
                simplex[worst] = reflected;
                values[worst] = fr;
            } else {
                let contracted = point(-rho);
                let fc = eval(&contracted, &mut evals);
                if fc < values[worst] {
                    simplex[worst] = contracted;
                    values[worst] = fc;
                } else {
                    // shrink toward the best vertex
                    let best_point = simplex[best].clone();
                    for i in 0..=n {
                        if i == best {
                            continue;
                        }
                        for d in 0..n {
                            simplex[i][d] = best_point[d] + sigma * (simplex[i][d] - best_point[d]);
                        }
                        values[i] = eval(&simplex[i].clone(), &mut evals);
                    }
                }
            }
        }

        let mut best_idx = 0;
        for i in 1..=n {
            if values[i] < values[best_idx] {
                best_idx = i;
            }
        }
        NmOutcome { x: simplex[best_idx].clone(), value: -values[best_idx], evals }
    }
}
