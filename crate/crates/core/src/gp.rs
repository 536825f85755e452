//! Gaussian-process surrogate with an isotropic Matérn-5/2 kernel.
//!
//! Inputs are mapped affinely from their box to the unit cube; outputs are
//! standardized over the dataset when a model is built, and that
//! standardization stays frozen for every query against the model. The
//! prior mean is zero in standardized units.
//!
//! Hyperparameters are fitted by maximizing the log marginal likelihood plus
//! log-normal log-priors. The search runs over `(ln ℓ, ln g)` with
//! `g = noise_var / signal_var`; for fixed `(ℓ, g)` the objective is concave
//! in `ln signal_var`, which is solved exactly by projected Newton steps.

use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Cholesky};
use crate::optim::NelderMead;
use crate::scalar::Real;

/// Matérn-5/2 correlation at scaled distance `r`.
#[inline]
pub fn matern52_unit<T: Real>(r: T) -> T {
    let s5r = T::c(5.0).sqrt() * r;
    (T::one() + s5r + T::c(5.0) * r * r / T::c(3.0)) * (-s5r).exp()
}

/// `k(u, v)` for unit-cube inputs.
pub fn kernel_matern52<T: Real>(u: &[T], v: &[T], h: &GpHyper<T>) -> T {
    let d2 = u
        .iter()
        .zip(v)
        .fold(T::zero(), |a, (x, y)| a + (*x - *y) * (*x - *y));
    h.signal_var * matern52_unit(d2.sqrt() / h.lengthscale)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpHyper<T> {
    pub lengthscale: T,
    pub signal_var: T,
    pub noise_var: T,
}

/// Observed points and values inside a fixed input box.
///
/// Pairwise squared distances in the unit cube are maintained incrementally
/// so refits do not rescan all inputs.
#[derive(Debug, Clone)]
pub struct ObservationDataset<T> {
    lower: Vec<T>,
    upper: Vec<T>,
    points: Vec<Vec<T>>,
    values: Vec<T>,
    unit: Vec<Vec<T>>,
    /// Row `i` holds squared distances to points `0..i`.
    sqdist: Vec<Vec<T>>,
}

impl<T: Real> ObservationDataset<T> {
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::InvalidInput("box bounds must be non-empty and equal length".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::InvalidInput("box lower bounds must be below upper bounds".into()));
        }
        Ok(Self {
            lower,
            upper,
            points: Vec::new(),
            values: Vec::new(),
            unit: Vec::new(),
            sqdist: Vec::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn points(&self) -> &[Vec<T>] {
        &self.points
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn bounds(&self) -> (&[T], &[T]) {
        (&self.lower, &self.upper)
    }

    /// Maps a point of the box to the unit cube.
    pub fn to_unit(&self, x: &[T]) -> Vec<T> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, u))| (*v - *l) / (*u - *l))
            .collect()
    }

    pub fn from_unit(&self, u: &[T]) -> Vec<T> {
        u.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, h))| *l + *v * (*h - *l))
            .collect()
    }

    pub fn push(&mut self, x: Vec<T>, y: T) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "point has dimension {}, expected {}",
                x.len(),
                self.dim()
            )));
        }
        if x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .any(|(v, (l, u))| !(*v >= *l && *v <= *u))
        {
            return Err(Error::InvalidInput("point outside the input box".into()));
        }
        if !y.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite observation {y}")));
        }
        let u = self.to_unit(&x);
        let row = self
            .unit
            .iter()
            .map(|v| u.iter().zip(v).fold(T::zero(), |a, (p, q)| a + (*p - *q) * (*p - *q)))
            .collect();
        self.sqdist.push(row);
        self.unit.push(u);
        self.points.push(x);
        self.values.push(y);
        Ok(())
    }

    /// Output mean and standard deviation; a zero spread maps to 1.
    pub fn output_moments(&self) -> (T, T) {
        let n = T::c(self.len() as f64);
        let mean = self.values.iter().fold(T::zero(), |a, &b| a + b) / n;
        let var = self
            .values
            .iter()
            .fold(T::zero(), |a, &b| a + (b - mean) * (b - mean))
            / n;
        let std = var.sqrt();
        (mean, if std > T::zero() { std } else { T::one() })
    }

    fn standardized(&self) -> (Vec<T>, T, T) {
        let (m, s) = self.output_moments();
        (self.values.iter().map(|v| (*v - m) / s).collect(), m, s)
    }

    /// Unit-signal correlation matrix at lengthscale `ell`, row-major.
    fn correlation(&self, ell: T) -> Vec<T> {
        let n = self.len();
        let mut m = vec![T::zero(); n * n];
        for i in 0..n {
            for (j, d2) in self.sqdist[i].iter().enumerate() {
                let v = matern52_unit(d2.sqrt() / ell);
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
            m[i * n + i] = T::one();
        }
        m
    }

    /// CSV with columns `x1..xd,value`. Floats use shortest round-trip form.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.dim()).map(|i| format!("x{i}")).collect();
        writeln!(w, "{},value", header.join(","))?;
        for (p, v) in self.points.iter().zip(&self.values) {
            let cols: Vec<String> = p.iter().map(|x| format!("{}", x.as_f64())).collect();
            writeln!(w, "{},{}", cols.join(","), v.as_f64())?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R, lower: Vec<T>, upper: Vec<T>, origin: &str) -> Result<Self> {
        let mut ds = Self::new(lower, upper)?;
        let fmt = |line: usize, reason: String| Error::Format {
            path: origin.to_string(),
            reason: format!("line {line}: {reason}"),
        };
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| fmt(1, "empty file".into()))??;
        if header.split(',').count() != ds.dim() + 1 {
            return Err(fmt(1, format!("expected {} columns", ds.dim() + 1)));
        }
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| fmt(i + 2, e.to_string()))?;
            if vals.len() != ds.dim() + 1 {
                return Err(fmt(i + 2, format!("expected {} columns", ds.dim() + 1)));
            }
            let x = vals[..ds.dim()].iter().map(|v| T::c(*v)).collect();
            ds.push(x, T::c(vals[ds.dim()])).map_err(|e| fmt(i + 2, e.to_string()))?;
        }
        Ok(ds)
    }

    pub fn load_csv(path: &Path, lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        let f = std::fs::File::open(path)
            .map_err(|_| Error::MissingArtifact(path.display().to_string()))?;
        Self::read_csv(std::io::BufReader::new(f), lower, upper, &path.display().to_string())
    }
}

/// Gaussian prior on `ln v` with mode at `ln center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalPrior<T> {
    pub center: T,
    pub sigma_log: T,
}

impl<T: Real> LogNormalPrior<T> {
    #[inline]
    pub fn log_density(&self, ln_v: T) -> T {
        let z = (ln_v - self.center.ln()) / self.sigma_log;
        -T::c(0.5) * z * z
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitSettings<T> {
    pub lengthscale_prior: LogNormalPrior<T>,
    pub signal_prior: LogNormalPrior<T>,
    pub noise_prior: LogNormalPrior<T>,
    pub lengthscale_bounds: [T; 2],
    pub signal_bounds: [T; 2],
    pub noise_bounds: [T; 2],
    /// Number of local searches, including the warm start when one is given.
    pub n_starts: usize,
    pub max_evals: usize,
    /// Relative diagonal jitter and its escalation ceiling.
    pub jitter: T,
    pub max_jitter: T,
}

impl<T: Real> Default for FitSettings<T> {
    fn default() -> Self {
        let p = |c: f64| LogNormalPrior {
            center: T::c(c),
            sigma_log: T::one(),
        };
        Self {
            lengthscale_prior: p(0.3),
            signal_prior: p(1.0),
            noise_prior: p(0.05),
            lengthscale_bounds: [T::c(1e-2), T::c(1e2)],
            signal_bounds: [T::c(1e-3), T::c(1e2)],
            noise_bounds: [T::c(1e-6), T::c(1e1)],
            n_starts: 3,
            max_evals: 60,
            jitter: T::c(1e-8),
            max_jitter: T::c(1e-4),
        }
    }
}

impl<T: Real> FitSettings<T> {
    fn log_prior(&self, h: &GpHyper<T>) -> T {
        self.lengthscale_prior.log_density(h.lengthscale.ln())
            + self.signal_prior.log_density(h.signal_var.ln())
            + self.noise_prior.log_density(h.noise_var.ln())
    }
}

/// Log marginal likelihood of the standardized outputs under `h`.
pub fn log_marginal_likelihood<T: Real>(ds: &ObservationDataset<T>, h: &GpHyper<T>) -> Result<T> {
    let (y, _, _) = ds.standardized();
    let n = ds.len();
    let mut k = ds.correlation(h.lengthscale);
    k.iter_mut().for_each(|v| *v = *v * h.signal_var);
    for i in 0..n {
        k[i * n + i] = k[i * n + i] + h.noise_var;
    }
    let chol = Cholesky::factor(k, n).ok_or(Error::NotPositiveDefinite { jitter: 0.0 })?;
    let z = chol.solve_lower(&y);
    Ok(-T::c(0.5) * dot(&z, &z)
        - T::c(0.5) * chol.log_det()
        - T::c(0.5 * n as f64) * (T::c(2.0) * T::PI()).ln())
}

/// Log posterior (up to a constant) of hyperparameters `h`.
pub fn log_posterior<T: Real>(
    ds: &ObservationDataset<T>,
    h: &GpHyper<T>,
    settings: &FitSettings<T>,
) -> Result<T> {
    Ok(log_marginal_likelihood(ds, h)? + settings.log_prior(h))
}

struct Profile<'a, T> {
    ds: &'a ObservationDataset<T>,
    y: Vec<T>,
    s: &'a FitSettings<T>,
}

impl<T: Real> Profile<'_, T> {
    /// Best log posterior over `ln signal_var` at `(ln ℓ, ln g)`.
    fn eval(&self, ln_ell: T, ln_g: T) -> Option<(T, T)> {
        let s = self.s;
        let n = self.ds.len();
        let ell = ln_ell.exp();
        let g = ln_g.exp();
        let mut a = self.ds.correlation(ell);
        for i in 0..n {
            a[i * n + i] = a[i * n + i] + g;
        }
        let (chol, _) = Cholesky::factor_jittered(&a, n, s.jitter, s.max_jitter).ok()?;
        let z = chol.solve_lower(&self.y);
        let q = dot(&z, &z);
        let logdet = chol.log_det();

        let t_lo = s.signal_bounds[0].ln().max(s.noise_bounds[0].ln() - ln_g);
        let t_hi = s.signal_bounds[1].ln().min(s.noise_bounds[1].ln() - ln_g);
        if t_lo > t_hi {
            return None;
        }
        let half = T::c(0.5);
        let nf = T::c(n as f64);
        let (ps, pn) = (&s.signal_prior, &s.noise_prior);
        let inv_s2 = T::one() / (ps.sigma_log * ps.sigma_log);
        let inv_n2 = T::one() / (pn.sigma_log * pn.sigma_log);
        let (cs, cn) = (ps.center.ln(), pn.center.ln());
        let value = |t: T| {
            -half * q * (-t).exp() - half * nf * t - half * logdet
                + ps.log_density(t)
                + pn.log_density(ln_g + t)
        };
        let mut t = if q > T::zero() { (q / nf).ln() } else { t_lo };
        t = t.max(t_lo).min(t_hi);
        for _ in 0..60 {
            let e = q * (-t).exp();
            let d1 = half * e - half * nf - (t - cs) * inv_s2 - (ln_g + t - cn) * inv_n2;
            let d2 = -half * e - inv_s2 - inv_n2;
            let next = (t - d1 / d2).max(t_lo).min(t_hi);
            if (next - t).abs() < T::c(1e-10) {
                t = next;
                break;
            }
            t = next;
        }
        let v = value(t) + s.lengthscale_prior.log_density(ln_ell)
            - half * nf * (T::c(2.0) * T::PI()).ln();
        v.is_finite().then_some((v, t))
    }
}

/// MAP hyperparameters for `ds`.
///
/// Local searches start from `warm` (when given), the prior modes, and a
/// fixed spread of offsets around them, and run concurrently. Fails only
/// when no start yields a finite objective.
pub fn fit<T: Real>(
    ds: &ObservationDataset<T>,
    settings: &FitSettings<T>,
    warm: Option<&GpHyper<T>>,
) -> Result<GpHyper<T>> {
    if ds.len() < 2 {
        return Err(Error::FitFailed(format!("need at least 2 observations, have {}", ds.len())));
    }
    let (y, _, _) = ds.standardized();
    let profile = Profile { ds, y, s: settings };
    let ln = |v: T| v.ln();
    let g0 = settings.noise_prior.center / settings.signal_prior.center;
    let centre = [ln(settings.lengthscale_prior.center), ln(g0)];
    let offsets = [[0.0, 0.0], [1.5, -1.5], [-1.0, 1.0], [3.0, -3.0], [1.5, 1.5], [-2.0, -2.0]];
    let mut starts: Vec<[T; 2]> = Vec::new();
    if let Some(w) = warm {
        starts.push([ln(w.lengthscale), ln(w.noise_var / w.signal_var)]);
    }
    for o in offsets {
        if starts.len() >= settings.n_starts.max(1) {
            break;
        }
        starts.push([centre[0] + T::c(o[0]), centre[1] + T::c(o[1])]);
    }

    let nm = NelderMead {
        lower: vec![
            ln(settings.lengthscale_bounds[0]),
            ln(settings.noise_bounds[0]) - ln(settings.signal_bounds[1]),
        ],
        upper: vec![
            ln(settings.lengthscale_bounds[1]),
            ln(settings.noise_bounds[1]) - ln(settings.signal_bounds[0]),
        ],
        initial_step: T::c(0.5),
        max_evals: settings.max_evals,
        f_tol: T::c(1e-6),
    };

    let results: Vec<_> = starts
        .par_iter()
        .map(|st| {
            let o = nm.maximize(st, |p| profile.eval(p[0], p[1]).map_or(T::neg_infinity(), |r| r.0));
            (o.value, o.x)
        })
        .collect();
    let mut best: Option<(T, Vec<T>)> = None;
    for (v, x) in results {
        if v.is_finite() && best.as_ref().is_none_or(|b| v > b.0) {
            best = Some((v, x));
        }
    }
    let (_, x) = best.ok_or_else(|| Error::FitFailed("no start produced a finite objective".into()))?;
    let (_, t) = profile
        .eval(x[0], x[1])
        .ok_or_else(|| Error::FitFailed("optimum not reproducible".into()))?;
    let signal_var = t.exp();
    Ok(GpHyper {
        lengthscale: x[0].exp(),
        signal_var,
        noise_var: (x[1] + t).exp(),
    })
}

/// Output standardization frozen into a model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalization<T> {
    pub y_mean: T,
    pub y_std: T,
}

/// Factorized posterior for a dataset and hyperparameters.
#[derive(Debug, Clone)]
pub struct GpModel<T> {
    pub hyper: GpHyper<T>,
    pub norm: Normalization<T>,
    pub jitter: T,
    lower: Vec<T>,
    upper: Vec<T>,
    unit: Vec<Vec<T>>,
    chol: Cholesky<T>,
    alpha: Vec<T>,
}

impl<T: Real> GpModel<T> {
    pub fn new(ds: &ObservationDataset<T>, hyper: GpHyper<T>, settings: &FitSettings<T>) -> Result<Self> {
        if ds.is_empty() {
            return Err(Error::InvalidInput("empty dataset".into()));
        }
        let n = ds.len();
        let (y, y_mean, y_std) = ds.standardized();
        let mut k = ds.correlation(hyper.lengthscale);
        k.iter_mut().for_each(|v| *v = *v * hyper.signal_var);
        for i in 0..n {
            k[i * n + i] = k[i * n + i] + hyper.noise_var;
        }
        let (chol, jitter) = Cholesky::factor_jittered(
            &k,
            n,
            settings.jitter * hyper.signal_var,
            settings.max_jitter * hyper.signal_var,
        )?;
        let alpha = chol.solve(&y);
        Ok(Self {
            hyper,
            norm: Normalization { y_mean, y_std },
            jitter,
            lower: ds.lower.clone(),
            upper: ds.upper.clone(),
            unit: ds.unit.clone(),
            chol,
            alpha,
        })
    }

    pub fn n_train(&self) -> usize {
        self.unit.len()
    }

    fn cross_cov(&self, u: &[T]) -> Vec<T> {
        self.unit.iter().map(|x| kernel_matern52(u, x, &self.hyper)).collect()
    }

    /// Mean and variance in standardized units at a unit-cube point.
    pub fn posterior_standardized(&self, u: &[T]) -> (T, T) {
        let k = self.cross_cov(u);
        let mean = dot(&k, &self.alpha);
        let v = self.chol.solve_lower(&k);
        let var = self.hyper.signal_var - dot(&v, &v);
        (mean, if var < T::zero() { T::zero() } else { var })
    }

    /// Posterior mean (output units) and variance (output units squared).
    pub fn posterior(&self, x: &[T]) -> (T, T) {
        let u: Vec<T> = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (l, h))| (*v - *l) / (*h - *l))
            .collect();
        let (m, v) = self.posterior_standardized(&u);
        let s = self.norm.y_std;
        (self.norm.y_mean + s * m, s * s * v)
    }

    /// [`posterior`](Self::posterior) for many points, evaluated concurrently.
    pub fn posterior_batch(&self, xs: &[Vec<T>]) -> Vec<(T, T)> {
        xs.par_iter().map(|x| self.posterior(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_box(d: usize) -> (Vec<f64>, Vec<f64>) {
        (vec![0.0; d], vec![1.0; d])
    }

    #[test]
    fn kernel_at_zero_distance_is_signal_var() {
        let h = GpHyper {
            lengthscale: 0.3,
            signal_var: 2.5,
            noise_var: 0.1,
        };
        assert_eq!(kernel_matern52(&[0.2, 0.4], &[0.2, 0.4], &h), 2.5);
    }

    #[test]
    fn kernel_decays_monotonically() {
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let r = i as f64 * 0.05;
            let k = matern52_unit(r);
            assert!(k <= prev && k > 0.0 || r > 30.0);
            prev = k;
        }
        assert!(matern52_unit(40.0f64) < 1e-30);
    }

    #[test]
    fn kernel_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let u: Vec<f64> = (0..5).map(|_| rng.random()).collect();
            let v: Vec<f64> = (0..5).map(|_| rng.random()).collect();
            let h = GpHyper {
                lengthscale: rng.random_range(0.05..2.0),
                signal_var: rng.random_range(0.1..3.0),
                noise_var: 0.1,
            };
            let r = u.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() / h.lengthscale;
            let expect = h.signal_var
                * (1.0 + 5f64.sqrt() * r + 5.0 / 3.0 * r.powi(2))
                * (-(5f64.sqrt()) * r).exp();
            assert!((kernel_matern52(&u, &v, &h) - expect).abs() <= 1e-14 * expect.max(1e-300));
        }
    }

    #[test]
    fn dataset_rejects_out_of_box_and_dimension() {
        let (l, u) = unit_box(2);
        let mut ds = ObservationDataset::new(l, u).unwrap();
        assert!(ds.push(vec![0.5], 1.0).is_err());
        assert!(ds.push(vec![0.5, 1.5], 1.0).is_err());
        assert!(ds.push(vec![0.5, 0.5], f64::NAN).is_err());
        ds.push(vec![0.5, 0.5], 1.0).unwrap();
        assert_eq!(ds.len(), 1);
    }

    #[test]
    fn interpolates_in_noiseless_limit() {
        let (l, u) = unit_box(3);
        let mut ds = ObservationDataset::new(l, u).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..8 {
            let x: Vec<f64> = (0..3).map(|_| rng.random()).collect();
            let y = x[0].sin() + 2.0 * x[1];
            ds.push(x, y).unwrap();
        }
        let h = GpHyper {
            lengthscale: 0.5,
            signal_var: 1.0,
            noise_var: 1e-6,
        };
        let m = GpModel::new(&ds, h, &FitSettings::default()).unwrap();
        for (x, y) in ds.points().iter().zip(ds.values()) {
            let (mu, _) = m.posterior(x);
            assert!((mu - y).abs() / m.norm.y_std <= 1e-4);
        }
    }

    #[test]
    fn far_queries_revert_to_prior() {
        let d = 10;
        let mut ds = ObservationDataset::new(vec![0.0; d], vec![1.0; d]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let x: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..0.05)).collect();
            ds.push(x, rng.random()).unwrap();
        }
        let h = GpHyper {
            lengthscale: 0.05,
            signal_var: 1.3,
            noise_var: 0.01,
        };
        let m = GpModel::new(&ds, h, &FitSettings::default()).unwrap();
        let (mu, var) = m.posterior(&vec![1.0; d]);
        assert!((mu - m.norm.y_mean).abs() < 1e-9);
        assert!((var - 1.3 * m.norm.y_std.powi(2)).abs() < 1e-9);
    }

    #[test]
    fn constant_outputs_collapse_to_floors() {
        let (l, u) = unit_box(2);
        let mut ds = ObservationDataset::new(l, u).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            ds.push(vec![rng.random(), rng.random()], 3.0).unwrap();
        }
        let s = FitSettings {
            max_evals: 400,
            ..FitSettings::default()
        };
        let h = fit(&ds, &s, None).unwrap();
        assert!(h.noise_var <= 1.01 * s.noise_bounds[0], "{h:?}");
        // the signal prior keeps it off the hard floor, but far below its mode
        assert!(h.signal_var < 0.25 * s.signal_prior.center, "{h:?}");
    }

    #[test]
    fn output_scale_does_not_change_fit() {
        let (l, u) = unit_box(2);
        let mut a = ObservationDataset::new(l.clone(), u.clone()).unwrap();
        let mut b = ObservationDataset::new(l, u).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..15 {
            let x: Vec<f64> = vec![rng.random(), rng.random()];
            let y = (6.0 * x[0]).sin() + 0.1 * rng.random::<f64>();
            a.push(x.clone(), y).unwrap();
            b.push(x, 2.0 * y).unwrap();
        }
        let s = FitSettings::default();
        assert_eq!(fit(&a, &s, None).unwrap(), fit(&b, &s, None).unwrap());
    }

    #[test]
    fn fit_needs_two_points() {
        let (l, u) = unit_box(1);
        let mut ds = ObservationDataset::new(l, u).unwrap();
        ds.push(vec![0.3], 1.0).unwrap();
        assert!(matches!(fit(&ds, &FitSettings::default(), None), Err(Error::FitFailed(_))));
    }

    #[test]
    fn fit_is_at_least_as_good_as_its_starts() {
        let (l, u) = unit_box(3);
        let mut ds = ObservationDataset::new(l, u).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..30 {
            let x: Vec<f64> = (0..3).map(|_| rng.random()).collect();
            let y = (4.0 * x[0]).cos() + x[1] * x[2] + 0.05 * rng.random::<f64>();
            ds.push(x, y).unwrap();
        }
        let s = FitSettings::default();
        let h = fit(&ds, &s, None).unwrap();
        let best = log_posterior(&ds, &h, &s).unwrap();
        let prior_mode = GpHyper {
            lengthscale: 0.3,
            signal_var: 1.0,
            noise_var: 0.05,
        };
        assert!(best >= log_posterior(&ds, &prior_mode, &s).unwrap() - 1e-6);
    }

    #[test]
    fn csv_round_trip() {
        let (l, u) = (vec![-90.0, 6.0], vec![90.0, 46.0]);
        let mut ds = ObservationDataset::new(l.clone(), u.clone()).unwrap();
        ds.push(vec![-12.0, 46.0], 7.123456789012345).unwrap();
        ds.push(vec![33.3, 6.0], -0.1).unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let back = ObservationDataset::read_csv(&buf[..], l, u, "mem").unwrap();
        assert_eq!(back.points(), ds.points());
        assert_eq!(back.values(), ds.values());
    }
}
