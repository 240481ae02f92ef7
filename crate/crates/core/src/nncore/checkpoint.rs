//! `ckpt-v1` binary network container.
//!
//! Layout (all integers little-endian, all reals binary64):
//!
//! ```text
//! str  "ckpt-v1"
//! str  scalar tag ("f64" | "f32")
//! u32  number of layer sizes, then one u64 per size
//! u8   output activation: 0 identity, 1 tanh, 2 squashed
//!      (squashed only) f64 x out low bounds, f64 x out high bounds
//! per layer: weights (fan_in x fan_out, input-major), biases
//! f64  adam beta1, beta2, epsilon
//! u64  adam step counter
//! per layer: m weights, m biases, v weights, v biases
//! ```
//!
//! Strings are a `u32` byte length followed by UTF-8 bytes.

use std::path::Path;

use ndarray::{Array1, Array2};

use super::adam::{AdamConfig, AdamState};
use super::net::{DenseNet, Layer, OutputActivation};
use crate::codec::{Decoder, Encoder};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const NET_CHECKPOINT_TAG: &str = "ckpt-v1";

fn put_array<'a, T: Scalar>(e: &mut Encoder, it: impl IntoIterator<Item = &'a T>) {
    e.f64s(it.into_iter().map(|v| v.as_f64()));
}

fn get_matrix<T: Scalar>(d: &mut Decoder, rows: usize, cols: usize) -> Result<Array2<T>> {
    let raw = d.f64s(rows * cols)?;
    Array2::from_shape_vec((rows, cols), raw.into_iter().map(T::of).collect())
        .map_err(|e| Error::Checkpoint(e.to_string()))
}

fn get_vector<T: Scalar>(d: &mut Decoder, n: usize) -> Result<Array1<T>> {
    Ok(d.f64s(n)?.into_iter().map(T::of).collect())
}

impl<T: Scalar> DenseNet<T> {
    pub(crate) fn encode(&self, e: &mut Encoder) {
        e.str(NET_CHECKPOINT_TAG);
        e.str(T::DTYPE);
        let sizes = self.layer_sizes();
        e.u32(sizes.len() as u32);
        for s in sizes {
            e.u64(s as u64);
        }
        match self.output_activation() {
            OutputActivation::Identity => e.u8(0),
            OutputActivation::Tanh => e.u8(1),
            OutputActivation::Squashed { low, high } => {
                e.u8(2);
                put_array(e, low);
                put_array(e, high);
            }
        }
        for l in self.layers() {
            put_array(e, &l.weight);
            put_array(e, &l.bias);
        }
        let adam = &self.adam;
        e.f64(adam.config.beta1.as_f64());
        e.f64(adam.config.beta2.as_f64());
        e.f64(adam.config.epsilon.as_f64());
        e.u64(adam.step);
        for i in 0..self.layers().len() {
            put_array(e, &adam.m_weights[i]);
            put_array(e, &adam.m_biases[i]);
            put_array(e, &adam.v_weights[i]);
            put_array(e, &adam.v_biases[i]);
        }
    }

    pub(crate) fn decode(d: &mut Decoder) -> Result<Self> {
        d.expect_tag(NET_CHECKPOINT_TAG)?;
        let dtype = d.str()?;
        if dtype != T::DTYPE {
            return Err(Error::Checkpoint(format!(
                "scalar type mismatch: file holds {dtype}, loading as {}",
                T::DTYPE
            )));
        }
        let n_sizes = d.u32()? as usize;
        if !(2..=1024).contains(&n_sizes) {
            return Err(Error::Checkpoint(format!("implausible layer count {n_sizes}")));
        }
        let sizes = (0..n_sizes)
            .map(|_| d.u64().map(|v| v as usize))
            .collect::<Result<Vec<_>>>()?;
        if sizes.iter().any(|&s| s == 0 || s > 1 << 24) {
            return Err(Error::Checkpoint(format!("implausible layer sizes {sizes:?}")));
        }
        let out = *sizes.last().unwrap();
        let activation = match d.u8()? {
            0 => OutputActivation::Identity,
            1 => OutputActivation::Tanh,
            2 => OutputActivation::Squashed {
                low: get_vector(d, out)?.to_vec(),
                high: get_vector(d, out)?.to_vec(),
            },
            t => return Err(Error::Checkpoint(format!("unknown activation tag {t}"))),
        };
        let mut layers = Vec::with_capacity(n_sizes - 1);
        for w in sizes.windows(2) {
            layers.push(Layer {
                weight: get_matrix(d, w[0], w[1])?,
                bias: get_vector(d, w[1])?,
            });
        }
        let config = AdamConfig {
            beta1: T::of(d.f64()?),
            beta2: T::of(d.f64()?),
            epsilon: T::of(d.f64()?),
        };
        let mut adam = AdamState::for_layers(&layers, config);
        adam.step = d.u64()?;
        for (i, w) in sizes.windows(2).enumerate() {
            adam.m_weights[i] = get_matrix(d, w[0], w[1])?;
            adam.m_biases[i] = get_vector(d, w[1])?;
            adam.v_weights[i] = get_matrix(d, w[0], w[1])?;
            adam.v_biases[i] = get_vector(d, w[1])?;
        }
        let mut net = DenseNet::from_layers(layers, activation)
            .map_err(|e| Error::Checkpoint(format!("invalid network payload: {e}")))?;
        net.adam = adam;
        Ok(net)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut e = Encoder::new();
        self.encode(&mut e);
        e.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut d = Decoder::new(bytes);
        let net = Self::decode(&mut d)?;
        d.finish()?;
        Ok(net)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}
