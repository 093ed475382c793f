//! Synthetic training task: closed loops that rotate and bend, described by
//! per-point extrinsic features with known correspondences.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{eiae_backward, eiae_forward, DenseNet, GlobalFeature};
use crate::error::{Error, Result};
use crate::losses::{bounded_mmd, mmd, FeatureSet, KernelConfig, LossWeights};
use crate::optim::Adam;

/// Width of the per-point descriptor produced by [`LoopFamily::features`].
pub const FEATURE_DIM: usize = 8;

/// One member of the loop family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoopShape {
    /// Turn about the loop's normal axis, radians.
    pub rotation: f64,
    /// Out-of-plane saddle amplitude.
    pub bend: f64,
}

/// Elliptical loops `R_z(α) (a cos u, b sin u, κ cos 2u)` sampled at `points`
/// unevenly spaced parameters, so the sample density itself is not symmetric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopFamily {
    pub points: usize,
    pub semi_axes: [f64; 2],
    pub max_rotation: f64,
    pub max_bend: f64,
    pub sampling_warp: f64,
}

impl Default for LoopFamily {
    fn default() -> Self {
        Self {
            points: 64,
            semi_axes: [1.0, 0.6],
            max_rotation: 0.3,
            max_bend: 0.1,
            sampling_warp: 0.3,
        }
    }
}

impl LoopFamily {
    fn parameter(&self, k: usize) -> f64 {
        let s = TAU * k as f64 / self.points as f64;
        s + self.sampling_warp * s.sin()
    }

    /// Rows `[p, unit tangent, |p|, p·t]` in sample order; row `k` of any two
    /// members corresponds.
    pub fn features(&self, shape: &LoopShape) -> FeatureSet {
        let [a, b] = self.semi_axes;
        let (sa, ca) = shape.rotation.sin_cos();
        let rot = |x: f64, y: f64| (ca * x - sa * y, sa * x + ca * y);
        let rows: Vec<Vec<f64>> = (0..self.points)
            .map(|k| {
                let u = self.parameter(k);
                let (px, py) = rot(a * u.cos(), b * u.sin());
                let pz = shape.bend * (2.0 * u).cos();
                let (tx, ty) = rot(-a * u.sin(), b * u.cos());
                let tz = -2.0 * shape.bend * (2.0 * u).sin();
                let tn = (tx * tx + ty * ty + tz * tz).sqrt();
                let (tx, ty, tz) = (tx / tn, ty / tn, tz / tn);
                let r = (px * px + py * py + pz * pz).sqrt();
                vec![px, py, pz, tx, ty, tz, r, px * tx + py * ty + pz * tz]
            })
            .collect();
        FeatureSet::from_rows(&rows).expect("loop features are finite")
    }

    pub fn sample(&self, rng: &mut impl Rng) -> LoopShape {
        LoopShape {
            rotation: rng.random_range(0.0..=self.max_rotation),
            bend: rng.random_range(0.0..=self.max_bend),
        }
    }

    /// The two most different members, used for evaluation.
    pub fn eval_pair(&self) -> (LoopShape, LoopShape) {
        (
            LoopShape {
                rotation: 0.0,
                bend: 0.0,
            },
            LoopShape {
                rotation: self.max_rotation,
                bend: self.max_bend,
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToyConfig {
    pub family: LoopFamily,
    /// Canonical dimension `e`.
    pub canonical_dim: usize,
    pub hidden: usize,
    pub epochs: usize,
    /// Source/target pairs drawn, one update each, per epoch.
    pub pairs_per_epoch: usize,
    pub learning_rate: f64,
    pub weights: LossWeights,
    pub seed: u64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            family: LoopFamily::default(),
            canonical_dim: 10,
            hidden: 64,
            epochs: 2000,
            pairs_per_epoch: 8,
            learning_rate: 1e-3,
            weights: LossWeights::default(),
            seed: 7,
        }
    }
}

/// Metrics on the evaluation pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalMetrics {
    pub raw_mmd: f64,
    pub bounded_mmd: f64,
    /// Fraction of source points whose nearest target point in canonical
    /// space is the true partner.
    pub accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean training objective over the epoch's updates.
    pub train_loss: f64,
    #[serde(flatten)]
    pub eval: EvalMetrics,
}

#[derive(Debug, Clone)]
pub struct TrainedEiae {
    pub encoder: DenseNet,
    pub decoder: DenseNet,
    pub trace: Vec<EpochRecord>,
}

/// Freshly initialized encoder (2 layers) and decoder (3 layers).
pub fn init_networks(cfg: &ToyConfig) -> Result<(DenseNet, DenseNet, ChaCha8Rng)> {
    if cfg.canonical_dim == 0 || cfg.hidden == 0 {
        return Err(Error::Argument("canonical and hidden widths must be positive".into()));
    }
    if cfg.family.points == 0 {
        return Err(Error::Argument("the loop family needs at least one point".into()));
    }
    let c = FEATURE_DIM;
    let d = FEATURE_DIM;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let enc = DenseNet::random(&[c + d, cfg.hidden, cfg.canonical_dim], &mut rng)?;
    let dec = DenseNet::random(&[cfg.canonical_dim + d, cfg.hidden, cfg.hidden, c], &mut rng)?;
    Ok((enc, dec, rng))
}

/// Share of rows `k` whose nearest row of `target` is `truth[k]`.
pub fn matching_accuracy(source: &DMatrix<f64>, target: &DMatrix<f64>, truth: &[usize]) -> f64 {
    let hits = (0..source.nrows())
        .filter(|&k| {
            let mut best = (f64::INFINITY, usize::MAX);
            for j in 0..target.nrows() {
                let d = (source.row(k) - target.row(j)).norm_squared();
                if d < best.0 {
                    best = (d, j);
                }
            }
            best.1 == truth[k]
        })
        .count();
    hits as f64 / source.nrows() as f64
}

/// Encodes both members of the evaluation pair (target rows shuffled with a
/// fixed permutation) and scores feature synthesis and canonical matching.
pub fn evaluate(enc: &DenseNet, dec: &DenseNet, family: &LoopFamily, beta: f64) -> Result<EvalMetrics> {
    let kernel = KernelConfig::default();
    let (s, t) = family.eval_pair();
    let xs = family.features(&s);
    let xt_ordered = family.features(&t);
    let mut perm: Vec<usize> = (0..family.points).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5eed));
    // row perm[k] of the shuffled target is source point k
    let mut shuffled = DMatrix::zeros(family.points, FEATURE_DIM);
    for (k, &p) in perm.iter().enumerate() {
        shuffled.set_row(p, &xt_ordered.matrix().row(k));
    }
    let xt = FeatureSet::new(shuffled)?;
    let (hs, ht) = (GlobalFeature::mean_of(&xs), GlobalFeature::mean_of(&xt));
    let fwd = eiae_forward(enc, dec, &xs, &hs, &ht)?;
    let y = FeatureSet::new(fwd.synthesized.clone()).map_err(|_| Error::Diverged(0))?;
    let raw = mmd(&xt, &y, &kernel)?.0;
    let bounded = bounded_mmd(&xt, &y, &kernel, beta)?.0;
    let (ct, _) = enc.forward(&super::concat_rows(xt.matrix(), &ht))?;
    let accuracy = matching_accuracy(&fwd.canonical.coords, &ct, &perm);
    Ok(EvalMetrics {
        raw_mmd: raw,
        bounded_mmd: bounded,
        accuracy,
    })
}

/// Trains on random pairs of the family with `λ_f · bounded MMD(X_t, Y_t)`
/// plus the mean squared error of decoding the source with its own global
/// feature. Correspondences are only used by the evaluation.
pub fn train_eiae(cfg: &ToyConfig) -> Result<TrainedEiae> {
    cfg.weights.validate()?;
    let (mut enc, mut dec, mut rng) = init_networks(cfg)?;
    let kernel = KernelConfig::default();
    let n_enc = enc.param_count();
    let mut params = enc.params();
    params.extend(dec.params());
    let mut opt = Adam::new(params.len(), cfg.learning_rate);
    let mut trace = Vec::with_capacity(cfg.epochs);
    let scale = 1.0 / (cfg.family.points * FEATURE_DIM) as f64;

    for epoch in 0..cfg.epochs {
        let mut epoch_loss = 0.0;
        for _ in 0..cfg.pairs_per_epoch {
            let xs = cfg.family.features(&cfg.family.sample(&mut rng));
            let xt = cfg.family.features(&cfg.family.sample(&mut rng));
            let (hs, ht) = (GlobalFeature::mean_of(&xs), GlobalFeature::mean_of(&xt));

            let cross = eiae_forward(&enc, &dec, &xs, &hs, &ht)?;
            let y = FeatureSet::new(cross.synthesized.clone()).map_err(|_| Error::Diverged(epoch))?;
            let (feat, feat_grad) = bounded_mmd(&xt, &y, &kernel, cfg.weights.beta)?;
            let (ge1, gd1) = eiae_backward(&enc, &dec, &cross, &(feat_grad * cfg.weights.lambda_f), None)?;

            let own = eiae_forward(&enc, &dec, &xs, &hs, &hs)?;
            let diff = &own.synthesized - xs.matrix();
            let recon = diff.norm_squared() * scale;
            let (ge2, gd2) = eiae_backward(&enc, &dec, &own, &(diff * (2.0 * scale)), None)?;

            let loss = recon + cfg.weights.lambda_f * feat;
            if !loss.is_finite() {
                return Err(Error::Diverged(epoch));
            }
            epoch_loss += loss;
            let mut grad = ge1.flatten();
            for (g, h) in grad.iter_mut().zip(ge2.flatten()) {
                *g += h;
            }
            let mut gd = gd1.flatten();
            for (g, h) in gd.iter_mut().zip(gd2.flatten()) {
                *g += h;
            }
            grad.extend(gd);
            opt.step(&mut params, &grad);
            enc.set_params(&params[..n_enc])?;
            dec.set_params(&params[n_enc..])?;
        }
        let eval = evaluate(&enc, &dec, &cfg.family, cfg.weights.beta).map_err(|_| Error::Diverged(epoch))?;
        trace.push(EpochRecord {
            epoch,
            train_loss: epoch_loss / cfg.pairs_per_epoch.max(1) as f64,
            eval,
        });
    }
    Ok(TrainedEiae {
        encoder: enc,
        decoder: dec,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ToyConfig {
        ToyConfig {
            family: LoopFamily {
                points: 16,
                ..LoopFamily::default()
            },
            hidden: 12,
            epochs: 5,
            pairs_per_epoch: 2,
            ..ToyConfig::default()
        }
    }

    #[test]
    fn features_have_the_declared_shape() {
        let fam = LoopFamily::default();
        let x = fam.features(&fam.sample(&mut ChaCha8Rng::seed_from_u64(0)));
        assert_eq!((x.len(), x.dim()), (64, FEATURE_DIM));
        for row in x.matrix().row_iter() {
            let t = nalgebra::Vector3::new(row[3], row[4], row[5]);
            assert!((t.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_acts_on_positions_only() {
        let fam = LoopFamily::default();
        let a = fam.features(&LoopShape { rotation: 0.0, bend: 0.05 });
        let b = fam.features(&LoopShape { rotation: 0.2, bend: 0.05 });
        for k in 0..fam.points {
            // radius and radial slope are unchanged by turning the loop
            assert!((a.matrix()[(k, 6)] - b.matrix()[(k, 6)]).abs() < 1e-12);
            assert!((a.matrix()[(k, 7)] - b.matrix()[(k, 7)]).abs() < 1e-12);
            assert!((a.matrix()[(k, 2)] - b.matrix()[(k, 2)]).abs() < 1e-15);
        }
    }

    #[test]
    fn accuracy_of_identical_codes_is_one() {
        let m = DMatrix::from_fn(5, 2, |i, j| (i * 3 + j) as f64);
        assert_eq!(matching_accuracy(&m, &m, &[0, 1, 2, 3, 4]), 1.0);
        assert_eq!(matching_accuracy(&m, &m, &[1, 0, 2, 3, 4]), 0.6);
    }

    #[test]
    fn training_is_reproducible() {
        let cfg = small();
        let a = train_eiae(&cfg).unwrap();
        let b = train_eiae(&cfg).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.encoder, b.encoder);
        assert_eq!(a.trace.len(), 5);
    }

    #[test]
    fn huge_learning_rate_is_reported_or_finite() {
        let cfg = ToyConfig {
            learning_rate: 1e6,
            ..small()
        };
        match train_eiae(&cfg) {
            Ok(t) => assert!(t.trace.iter().all(|r| r.train_loss.is_finite())),
            Err(e) => assert!(matches!(e, Error::Diverged(_))),
        }
    }

    #[test]
    fn e3_is_supported() {
        let cfg = ToyConfig {
            canonical_dim: 3,
            ..small()
        };
        let t = train_eiae(&cfg).unwrap();
        assert_eq!(t.encoder.output_dim(), 3);
    }
}
