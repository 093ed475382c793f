use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Bandwidths of the summed RBF kernel `Σ_s exp(−‖u−v‖² / (2σ_s²))`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelConfig {
    pub sigmas: Vec<f64>,
}

impl Default for KernelConfig {
    fn default() -> Self {
        let r2 = std::f64::consts::SQRT_2;
        Self {
            sigmas: vec![1.0, r2, 2.0, 2.0 * r2, 4.0],
        }
    }
}

impl KernelConfig {
    pub fn new(sigmas: Vec<f64>) -> Result<Self> {
        if sigmas.is_empty() || sigmas.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::Argument("kernel bandwidths must be positive".into()));
        }
        Ok(Self { sigmas })
    }

    /// Kernel value and `−Σ_s κ_s/σ_s²`, the factor multiplying `u − v` in `∂κ/∂u`.
    fn eval(&self, sq_dist: f64) -> (f64, f64) {
        let mut k = 0.0;
        let mut slope = 0.0;
        for s in &self.sigmas {
            let s2 = s * s;
            let ks = (-sq_dist / (2.0 * s2)).exp();
            k += ks;
            slope -= ks / s2;
        }
        (k, slope)
    }
}

/// Rows of feature vectors sharing one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    rows: DMatrix<f64>,
}

impl FeatureSet {
    pub fn new(rows: DMatrix<f64>) -> Result<Self> {
        if rows.ncols() == 0 || rows.nrows() == 0 {
            return Err(Error::Argument("feature set needs at least one row of dimension >= 1".into()));
        }
        if rows.iter().any(|x| !x.is_finite()) {
            return Err(Error::Argument("feature set has non-finite entries".into()));
        }
        Ok(Self { rows })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != c) {
            return Err(Error::Argument("feature rows differ in dimension".into()));
        }
        Self::new(DMatrix::from_fn(rows.len(), c, |i, j| rows[i][j]))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }

    /// Column means, the permutation-invariant summary of the set.
    pub fn mean(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.rows.row_sum().iter().map(|s| s / n).collect()
    }
}

fn sq_dist(a: &DMatrix<f64>, i: usize, b: &DMatrix<f64>, j: usize) -> f64 {
    (0..a.ncols()).map(|c| (a[(i, c)] - b[(j, c)]).powi(2)).sum()
}

fn mean_kernel(a: &DMatrix<f64>, b: &DMatrix<f64>, kernel: &KernelConfig) -> f64 {
    let mut total = 0.0;
    for i in 0..a.nrows() {
        for j in 0..b.nrows() {
            total += kernel.eval(sq_dist(a, i, b, j)).0;
        }
    }
    total / (a.nrows() * b.nrows()) as f64
}

/// Biased squared MMD over all ordered pairs (diagonal included), with the
/// gradient with respect to the rows of `y`.
pub fn mmd(x: &FeatureSet, y: &FeatureSet, kernel: &KernelConfig) -> Result<(f64, DMatrix<f64>)> {
    if x.dim() != y.dim() {
        return Err(Error::Argument(format!(
            "feature dimensions differ: {} vs {}",
            x.dim(),
            y.dim()
        )));
    }
    let (xm, ym) = (&x.rows, &y.rows);
    let n = xm.nrows() as f64;
    let m = ym.nrows() as f64;
    let kxx = mean_kernel(xm, xm, kernel);
    let mut grad = DMatrix::zeros(ym.nrows(), ym.ncols());
    let mut kyy = 0.0;
    for a in 0..ym.nrows() {
        for b in 0..ym.nrows() {
            let (k, slope) = kernel.eval(sq_dist(ym, a, ym, b));
            kyy += k;
            let f = 2.0 * slope / (m * m);
            for c in 0..ym.ncols() {
                grad[(a, c)] += f * (ym[(a, c)] - ym[(b, c)]);
            }
        }
    }
    let mut kxy = 0.0;
    for a in 0..ym.nrows() {
        for i in 0..xm.nrows() {
            let (k, slope) = kernel.eval(sq_dist(ym, a, xm, i));
            kxy += k;
            let f = -2.0 * slope / (n * m);
            for c in 0..ym.ncols() {
                grad[(a, c)] += f * (ym[(a, c)] - xm[(i, c)]);
            }
        }
    }
    let value = kxx + kyy / (m * m) - 2.0 * kxy / (n * m);
    Ok((value, grad))
}

/// `max(0, mmd − β)`; at or below the bound the gradient is zero.
pub fn bounded_mmd(
    x: &FeatureSet,
    y: &FeatureSet,
    kernel: &KernelConfig,
    beta: f64,
) -> Result<(f64, DMatrix<f64>)> {
    let (raw, grad) = mmd(x, y, kernel)?;
    if raw <= beta {
        return Ok((0.0, DMatrix::zeros(grad.nrows(), grad.ncols())));
    }
    Ok((raw - beta, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_set(rng: &mut ChaCha8Rng, n: usize, c: usize) -> FeatureSet {
        FeatureSet::new(DMatrix::from_fn(n, c, |_, _| rng.random_range(-1.0..1.0))).unwrap()
    }

    #[test]
    fn single_pair_matches_direct_summation() {
        let x = FeatureSet::from_rows(&[vec![0.0, 0.0]]).unwrap();
        let y = FeatureSet::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let direct: f64 = [1.0f64, 2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|s2| (-2.0 / (2.0 * s2)).exp())
            .sum();
        let (v, _) = mmd(&x, &y, &KernelConfig::default()).unwrap();
        assert!((v - 2.0 * (5.0 - direct)).abs() < 1e-12);
        assert!((v - 2.849_758).abs() < 1e-6);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let x = FeatureSet::from_rows(&[vec![0.0, 0.0]]).unwrap();
        let y = FeatureSet::from_rows(&[vec![0.0]]).unwrap();
        assert!(mmd(&x, &y, &KernelConfig::default()).is_err());
        assert!(FeatureSet::from_rows(&[vec![0.0], vec![1.0, 2.0]]).is_err());
        assert!(FeatureSet::from_rows(&[vec![f64::NAN]]).is_err());
        assert!(KernelConfig::new(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn hinge_boundaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_set(&mut rng, 10, 4);
        let (v, g) = bounded_mmd(&x, &x, &KernelConfig::default(), 0.01).unwrap();
        assert_eq!(v, 0.0);
        assert!(g.iter().all(|&e| e == 0.0));

        let y = random_set(&mut rng, 12, 4);
        let (raw, _) = mmd(&x, &y, &KernelConfig::default()).unwrap();
        let (at, g) = bounded_mmd(&x, &y, &KernelConfig::default(), raw).unwrap();
        assert_eq!(at, 0.0);
        assert!(g.iter().all(|&e| e == 0.0));
        let (below, _) = bounded_mmd(&x, &y, &KernelConfig::default(), raw / 2.0).unwrap();
        assert_eq!(below, raw - raw / 2.0);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_set(&mut rng, 32, 8);
        let y = random_set(&mut rng, 32, 8);
        let k = KernelConfig::default();
        let (_, g) = mmd(&x, &y, &k).unwrap();
        let h = 1e-6;
        for a in 0..32 {
            for c in 0..8 {
                let mut yp = y.matrix().clone();
                let mut ym = y.matrix().clone();
                yp[(a, c)] += h;
                ym[(a, c)] -= h;
                let fp = mmd(&x, &FeatureSet::new(yp).unwrap(), &k).unwrap().0;
                let fm = mmd(&x, &FeatureSet::new(ym).unwrap(), &k).unwrap().0;
                let fd = (fp - fm) / (2.0 * h);
                assert!((fd - g[(a, c)]).abs() <= 1e-5 * g[(a, c)].abs().max(1e-4));
            }
        }
    }

    proptest! {
        #[test]
        fn nonnegative_symmetric_and_zero_on_self(seed in 0u64..200, n in 1usize..12, m in 1usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_set(&mut rng, n, 3);
            let y = random_set(&mut rng, m, 3);
            let k = KernelConfig::default();
            let xy = mmd(&x, &y, &k).unwrap().0;
            let yx = mmd(&y, &x, &k).unwrap().0;
            prop_assert!(xy >= -1e-12);
            prop_assert!((xy - yx).abs() < 1e-12);
            prop_assert!(mmd(&x, &x, &k).unwrap().0.abs() <= 1e-12);
            let b = bounded_mmd(&x, &y, &k, 0.01).unwrap().0;
            prop_assert!(b <= xy);
        }
    }
}
