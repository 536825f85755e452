//! Box-constrained Nelder–Mead maximizer used by the GP hyperparameter fit.

use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct NelderMead<T> {
    pub lower: Vec<T>,
    pub upper: Vec<T>,
    pub initial_step: T,
    pub max_evals: usize,
    /// Stop once the spread of simplex values falls below this.
    pub f_tol: T,
}

#[derive(Debug, Clone)]
pub struct Optimum<T> {
    pub x: Vec<T>,
    pub value: T,
    pub evals: usize,
}

impl<T: Real> NelderMead<T> {
    fn project(&self, x: &mut [T]) {
        for ((v, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.max(*lo).min(*hi);
        }
    }

    /// Maximizes `f` from `start`. Non-finite values rank below everything.
    pub fn maximize<F: FnMut(&[T]) -> T>(&self, start: &[T], mut f: F) -> Optimum<T> {
        let d = start.len();
        let mut evals = 0;
        let mut eval = |x: &[T], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_finite() {
                v
            } else {
                T::neg_infinity()
            }
        };

        let mut x0 = start.to_vec();
        self.project(&mut x0);
        let mut simplex: Vec<(Vec<T>, T)> = Vec::with_capacity(d + 1);
        let v0 = eval(&x0, &mut evals);
        simplex.push((x0.clone(), v0));
        for i in 0..d {
            let mut x = x0.clone();
            x[i] = x[i] + self.initial_step;
            if x[i] > self.upper[i] {
                x[i] = x0[i] - self.initial_step;
            }
            self.project(&mut x);
            let v = eval(&x, &mut evals);
            simplex.push((x, v));
        }

        let (alpha, gamma, rho, sigma) = (T::one(), T::c(2.0), T::c(0.5), T::c(0.5));
        let sort = |s: &mut Vec<(Vec<T>, T)>| {
            s.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal))
        };
        while evals < self.max_evals {
            sort(&mut simplex);
            let best = simplex[0].1;
            let worst = simplex[d].1;
            if best.is_finite() && worst.is_finite() && (best - worst).abs() <= self.f_tol {
                break;
            }
            let mut centroid = vec![T::zero(); d];
            for (x, _) in &simplex[..d] {
                for (c, v) in centroid.iter_mut().zip(x) {
                    *c = *c + *v / T::c(d as f64);
                }
            }
            let along = |t: T| {
                let mut x: Vec<T> = centroid
                    .iter()
                    .zip(&simplex[d].0)
                    .map(|(c, w)| *c + t * (*c - *w))
                    .collect();
                self.project(&mut x);
                x
            };
            let xr = along(alpha);
            let fr = eval(&xr, &mut evals);
            if fr > simplex[0].1 {
                let xe = along(gamma);
                let fe = eval(&xe, &mut evals);
                simplex[d] = if fe > fr { (xe, fe) } else { (xr, fr) };
            } else if fr > simplex[d - 1].1 {
                simplex[d] = (xr, fr);
            } else {
                let xc = if fr > simplex[d].1 { along(rho) } else { along(-rho) };
                let fc = eval(&xc, &mut evals);
                if fc > simplex[d].1.max(fr) {
                    simplex[d] = (xc, fc);
                } else {
                    let x_best = simplex[0].0.clone();
                    for (x, v) in simplex.iter_mut().skip(1) {
                        for (xi, bi) in x.iter_mut().zip(&x_best) {
                            *xi = *bi + sigma * (*xi - *bi);
                        }
                        *v = eval(x, &mut evals);
                    }
                }
            }
        }
        sort(&mut simplex);
        let (x, value) = simplex.swap_remove(0);
        Optimum { x, value, evals }
    }
}
