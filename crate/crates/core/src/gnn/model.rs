use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};

/// Width of every hidden and output layer.
pub const HIDDEN: usize = 16;

/// Input features per vertex: normalized degree and normalized ID.
pub const INPUT_FEATURES: usize = 2;

pub const MIN_LAYERS: usize = 2;
pub const MAX_LAYERS: usize = 4;

const MAGIC: &[u8; 4] = b"GSGC";
const VERSION: u8 = 1;

/// How raw degree and ID are scaled into input features.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FeatureScheme {
    /// `(deg / max(1, Δ), id / max(1, n - 1))`.
    #[default]
    Normalized = 0,
}

/// One GraphSAGE layer. `weight` is `(2 * d_in) x d_out`, row-major; the
/// first `d_in` rows act on the vertex's own features, the rest on the
/// neighbor mean.
#[derive(Clone, Debug, PartialEq)]
pub struct SageLayer<T = f32> {
    d_in: usize,
    d_out: usize,
    weight: Vec<T>,
    bias: Vec<T>,
}

impl<T: Float> SageLayer<T> {
    pub fn zeros(d_in: usize, d_out: usize) -> Self {
        SageLayer {
            d_in,
            d_out,
            weight: vec![T::zero(); 2 * d_in * d_out],
            bias: vec![T::zero(); d_out],
        }
    }

    pub fn new(d_in: usize, d_out: usize, weight: Vec<T>, bias: Vec<T>) -> Result<Self> {
        if weight.len() != 2 * d_in * d_out || bias.len() != d_out {
            return Err(Error::Model(format!(
                "layer {d_in}->{d_out} needs {} weights and {d_out} biases, got {} and {}",
                2 * d_in * d_out,
                weight.len(),
                bias.len()
            )));
        }
        Ok(SageLayer {
            d_in,
            d_out,
            weight,
            bias,
        })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn weight(&self) -> &[T] {
        &self.weight
    }

    pub fn bias(&self) -> &[T] {
        &self.bias
    }

    pub fn weight_mut(&mut self) -> &mut [T] {
        &mut self.weight
    }

    pub fn bias_mut(&mut self) -> &mut [T] {
        &mut self.bias
    }

    #[inline]
    pub fn w(&self, row: usize, col: usize) -> T {
        self.weight[row * self.d_out + col]
    }

    pub fn num_params(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    /// Weights then biases.
    pub fn params(&self) -> impl Iterator<Item = &T> {
        self.weight.iter().chain(self.bias.iter())
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.weight.iter_mut().chain(self.bias.iter_mut())
    }
}

/// A stack of 2 to 4 GraphSAGE layers: `2 -> 16 -> ... -> 16`.
#[derive(Clone, Debug, PartialEq)]
pub struct GnnModel<T = f32> {
    layers: Vec<SageLayer<T>>,
}

impl<T: Float> GnnModel<T> {
    /// All-zero model with `num_layers` layers.
    pub fn zeros(num_layers: usize) -> Result<Self> {
        check_layer_count(num_layers)?;
        let layers = (0..num_layers)
            .map(|l| SageLayer::zeros(if l == 0 { INPUT_FEATURES } else { HIDDEN }, HIDDEN))
            .collect();
        Ok(GnnModel { layers })
    }

    pub fn from_layers(layers: Vec<SageLayer<T>>) -> Result<Self> {
        check_layer_count(layers.len())?;
        let mut d_in = INPUT_FEATURES;
        for (l, layer) in layers.iter().enumerate() {
            if layer.d_in != d_in || layer.d_out != HIDDEN {
                return Err(Error::Model(format!(
                    "layer {l} is {}->{}, expected {d_in}->{HIDDEN}",
                    layer.d_in, layer.d_out
                )));
            }
            d_in = layer.d_out;
        }
        let model = GnnModel { layers };
        if !model.is_finite() {
            return Err(Error::Model("non-finite parameter".into()));
        }
        Ok(model)
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[SageLayer<T>] {
        &self.layers
    }

    /// Shape-preserving mutable access.
    pub fn layers_mut(&mut self) -> &mut [SageLayer<T>] {
        &mut self.layers
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(SageLayer::num_params).sum()
    }

    /// Layer by layer, weights then biases.
    pub fn params(&self) -> impl Iterator<Item = &T> {
        self.layers.iter().flat_map(SageLayer::params)
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut T> {
        self.layers.iter_mut().flat_map(SageLayer::params_mut)
    }

    pub fn is_finite(&self) -> bool {
        self.params().all(|p| p.is_finite())
    }

    pub fn cast<U: Float>(&self) -> GnnModel<U> {
        let conv = |v: &[T]| v.iter().map(|&x| U::from(x).expect("float cast")).collect();
        GnnModel {
            layers: self
                .layers
                .iter()
                .map(|l| SageLayer {
                    d_in: l.d_in,
                    d_out: l.d_out,
                    weight: conv(&l.weight),
                    bias: conv(&l.bias),
                })
                .collect(),
        }
    }
}

fn check_layer_count(num_layers: usize) -> Result<()> {
    if (MIN_LAYERS..=MAX_LAYERS).contains(&num_layers) {
        Ok(())
    } else {
        Err(Error::Model(format!(
            "layer count must be in {MIN_LAYERS}..={MAX_LAYERS}, got {num_layers}"
        )))
    }
}

impl GnnModel<f32> {
    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng + ?Sized>(num_layers: usize, rng: &mut R) -> Result<Self> {
        let mut model = GnnModel::zeros(num_layers)?;
        for layer in &mut model.layers {
            let bound = glorot_bound(layer);
            for w in &mut layer.weight {
                *w = rng.random_range(-bound..=bound);
            }
        }
        Ok(model)
    }

    /// `GSGC` weight file: magic, version, feature scheme, layer count, then
    /// per layer `(2 * d_in, d_out)` as little-endian u32, the row-major
    /// weights and the bias as little-endian f32.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(MAGIC)?;
        out.write_all(&[VERSION, FeatureScheme::Normalized as u8, self.layers.len() as u8])?;
        for layer in &self.layers {
            out.write_all(&((2 * layer.d_in) as u32).to_le_bytes())?;
            out.write_all(&(layer.d_out as u32).to_le_bytes())?;
            for x in layer.weight.iter().chain(&layer.bias) {
                out.write_all(&x.to_le_bytes())?;
            }
        }
        out.flush()
    }

    pub fn read<R: Read>(mut input: R) -> Result<Self> {
        let mut header = [0u8; 7];
        input.read_exact(&mut header)?;
        if &header[..4] != MAGIC {
            return Err(Error::Model("bad GSGC magic".into()));
        }
        if header[4] != VERSION {
            return Err(Error::Model(format!("unsupported GSGC version {}", header[4])));
        }
        if header[5] != FeatureScheme::Normalized as u8 {
            return Err(Error::Model(format!("unknown feature scheme {}", header[5])));
        }
        let num_layers = header[6] as usize;
        check_layer_count(num_layers)?;

        let mut layers = Vec::with_capacity(num_layers);
        let mut expected_rows = 2 * INPUT_FEATURES;
        for l in 0..num_layers {
            let rows = read_u32(&mut input)? as usize;
            let cols = read_u32(&mut input)? as usize;
            if rows != expected_rows || cols != HIDDEN {
                return Err(Error::Model(format!(
                    "layer {l} has shape {rows}x{cols}, expected {expected_rows}x{HIDDEN}"
                )));
            }
            let weight = read_f32s(&mut input, rows * cols)?;
            let bias = read_f32s(&mut input, cols)?;
            layers.push(SageLayer::new(rows / 2, cols, weight, bias)?);
            expected_rows = 2 * cols;
        }
        let mut trailing = [0u8; 1];
        if input.read(&mut trailing)? != 0 {
            return Err(Error::Model("trailing bytes after last layer".into()));
        }
        GnnModel::from_layers(layers)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write(BufWriter::new(File::create(path)?))?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        GnnModel::read(BufReader::new(File::open(path)?))
    }
}

pub(crate) fn glorot_bound<T>(layer: &SageLayer<T>) -> f32 {
    let fan_in = 2 * layer.d_in;
    let fan_out = layer.d_out;
    (6.0 / (fan_in + fan_out) as f32).sqrt()
}

fn read_u32<R: Read>(input: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f32s<R: Read>(input: &mut R, count: usize) -> Result<Vec<f32>> {
    let mut bytes = vec![0u8; 4 * count];
    input.read_exact(&mut bytes)?;
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}
