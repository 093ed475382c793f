//! Extrinsic–intrinsic autoencoder on feature sets.
//!
//! The encoder maps each source feature, concatenated with the source's
//! global feature, to canonical coordinates. The decoder maps canonical
//! coordinates, concatenated with a target's global feature, back to
//! features of that target.

pub mod dense;
pub mod toy;

use nalgebra::DMatrix;

pub use dense::{DenseGrads, DenseNet, ForwardCache};
pub use toy::{train_eiae, EpochRecord, LoopFamily, ToyConfig, TrainedEiae};

use crate::error::{Error, Result};
use crate::losses::FeatureSet;

/// Per-point coordinates in the shared canonical space, one row per source feature.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalShape {
    pub coords: DMatrix<f64>,
}

/// Summary vector of a whole feature set.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalFeature(pub Vec<f64>);

impl GlobalFeature {
    /// Column means of `features`.
    pub fn mean_of(features: &FeatureSet) -> Self {
        Self(features.mean())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Appends `h` to every row of `rows`.
pub fn concat_rows(rows: &DMatrix<f64>, h: &GlobalFeature) -> DMatrix<f64> {
    let c = rows.ncols();
    DMatrix::from_fn(rows.nrows(), c + h.dim(), |i, j| if j < c { rows[(i, j)] } else { h.0[j - c] })
}

/// Output of [`eiae_forward`] with the caches its backward pass needs.
#[derive(Debug, Clone)]
pub struct EiaeForward {
    pub canonical: CanonicalShape,
    pub synthesized: DMatrix<f64>,
    encoder_cache: ForwardCache,
    decoder_cache: ForwardCache,
}

/// `C = enc(X_s ⊕ h_s)`, `Y_t = dec(C ⊕ h_t)`, row by row.
pub fn eiae_forward(
    encoder: &DenseNet,
    decoder: &DenseNet,
    x_s: &FeatureSet,
    h_s: &GlobalFeature,
    h_t: &GlobalFeature,
) -> Result<EiaeForward> {
    let c = x_s.dim();
    if encoder.input_dim() != c + h_s.dim() {
        return Err(Error::Argument(format!(
            "encoder takes {} inputs but features and global feature give {}",
            encoder.input_dim(),
            c + h_s.dim()
        )));
    }
    if decoder.input_dim() != encoder.output_dim() + h_t.dim() {
        return Err(Error::Argument(format!(
            "decoder takes {} inputs but canonical and global feature give {}",
            decoder.input_dim(),
            encoder.output_dim() + h_t.dim()
        )));
    }
    if decoder.output_dim() != c {
        return Err(Error::Argument(format!(
            "decoder emits {} features, expected {c}",
            decoder.output_dim()
        )));
    }
    let (coords, encoder_cache) = encoder.forward(&concat_rows(x_s.matrix(), h_s))?;
    let (synthesized, decoder_cache) = decoder.forward(&concat_rows(&coords, h_t))?;
    Ok(EiaeForward {
        canonical: CanonicalShape { coords },
        synthesized,
        encoder_cache,
        decoder_cache,
    })
}

/// Encoder and decoder gradients given the gradient with respect to the
/// synthesized features and, optionally, the canonical coordinates.
pub fn eiae_backward(
    encoder: &DenseNet,
    decoder: &DenseNet,
    fwd: &EiaeForward,
    grad_synthesized: &DMatrix<f64>,
    grad_canonical: Option<&DMatrix<f64>>,
) -> Result<(DenseGrads, DenseGrads)> {
    let dec = decoder.backward(&fwd.decoder_cache, grad_synthesized)?;
    let e = encoder.output_dim();
    let mut g_c = dec.input.columns(0, e).into_owned();
    if let Some(extra) = grad_canonical {
        g_c += extra;
    }
    let enc = encoder.backward(&fwd.encoder_cache, &g_c)?;
    Ok((enc, dec))
}
