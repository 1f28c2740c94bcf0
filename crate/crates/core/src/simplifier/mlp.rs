use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};

use super::SimplifierError;
use crate::embedding::EmbeddingMatrix;
use crate::rng::DetRng;

/// Hidden-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Self::Relu => z.max(0.0),
            Self::Tanh => z.tanh(),
            Self::Identity => z,
        }
    }

    /// Derivative in terms of the pre-activation `z`.
    fn derivative(self, z: f64) -> f64 {
        match self {
            Self::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Tanh => 1.0 - z.tanh().powi(2),
            Self::Identity => 1.0,
        }
    }
}

/// The four parameter tensors of the network. Also used for gradients and
/// optimizer moments, which share the shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    /// hidden × dim
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    /// dim × hidden
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

impl MlpParams {
    pub fn zeros(dim: usize, hidden: usize) -> Self {
        Self {
            w1: Array2::zeros((hidden, dim)),
            b1: Array1::zeros(hidden),
            w2: Array2::zeros((dim, hidden)),
            b2: Array1::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.b2.len()
    }

    pub fn hidden(&self) -> usize {
        self.b1.len()
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.w1.dim() == other.w1.dim()
            && self.b1.len() == other.b1.len()
            && self.w2.dim() == other.w2.dim()
            && self.b2.len() == other.b2.len()
    }

    /// Parameter slices in file order: W1 row-major, b1, W2 row-major, b2.
    pub fn slices(&self) -> [&[f64]; 4] {
        [
            self.w1.as_slice().expect("standard layout"),
            self.b1.as_slice().expect("standard layout"),
            self.w2.as_slice().expect("standard layout"),
            self.b2.as_slice().expect("standard layout"),
        ]
    }

    pub fn slices_mut(&mut self) -> [&mut [f64]; 4] {
        [
            self.w1.as_slice_mut().expect("standard layout"),
            self.b1.as_slice_mut().expect("standard layout"),
            self.w2.as_slice_mut().expect("standard layout"),
            self.b2.as_slice_mut().expect("standard layout"),
        ]
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.slices().into_iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn param_count(dim: usize, hidden: usize) -> usize {
    2 * dim * hidden + hidden + dim
}

/// Two-layer fully connected map `W2 · act(W1 · x + b1) + b2`.
///
/// Parameters are always representable as `f32` (the on-disk precision);
/// arithmetic runs in `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub params: MlpParams,
    pub activation: Activation,
}

/// Intermediate values kept for backpropagation.
pub(crate) struct ForwardPass {
    pub pre: Array2<f64>,
    pub hidden: Array2<f64>,
    pub out: Array2<f64>,
}

impl MlpModel {
    pub fn zeros(dim: usize, hidden: usize) -> Self {
        Self {
            params: MlpParams::zeros(dim, hidden),
            activation: Activation::Relu,
        }
    }

    pub fn from_params(params: MlpParams, activation: Activation) -> Result<Self, SimplifierError> {
        let (h, d) = params.w1.dim();
        if params.b1.len() != h || params.w2.dim() != (d, h) || params.b2.len() != d {
            return Err(SimplifierError::ShapeMismatch);
        }
        if params.iter().any(|v| !v.is_finite()) {
            return Err(SimplifierError::NonFinite);
        }
        let mut m = Self { params, activation };
        m.snap_to_f32();
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    pub fn hidden(&self) -> usize {
        self.params.hidden()
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub(crate) fn snap_to_f32(&mut self) {
        for s in self.params.slices_mut() {
            s.iter_mut().for_each(|v| *v = *v as f32 as f64);
        }
    }

    pub(crate) fn forward_pass(&self, x: ArrayView2<f64>) -> ForwardPass {
        let p = &self.params;
        let mut pre = x.dot(&p.w1.t());
        pre += &p.b1;
        let act = self.activation;
        let hidden = pre.mapv(|z| act.apply(z));
        let mut out = hidden.dot(&p.w2.t());
        out += &p.b2;
        ForwardPass { pre, hidden, out }
    }

    pub(crate) fn forward_array(&self, x: ArrayView2<f64>) -> Array2<f64> {
        self.forward_pass(x).out
    }

    /// Gradients of the mean squared error over all elements of the batch.
    pub(crate) fn gradients_array(&self, x: ArrayView2<f64>, target: ArrayView2<f64>) -> MlpParams {
        let fp = self.forward_pass(x);
        let scale = 2.0 / (fp.out.len() as f64);
        let g_out = (&fp.out - &target) * scale;
        let w2 = g_out.t().dot(&fp.hidden);
        let b2 = g_out.sum_axis(Axis(0));
        let mut g_pre = g_out.dot(&self.params.w2);
        let act = self.activation;
        Zip::from(&mut g_pre)
            .and(&fp.pre)
            .for_each(|g, &z| *g *= act.derivative(z));
        let w1 = g_pre.t().dot(&x);
        let b1 = g_pre.sum_axis(Axis(0));
        MlpParams { w1, b1, w2, b2 }
    }
}

/// Seeded uniform init in `±sqrt(6 / (fan_in + fan_out))`; biases zero.
///
/// Draws W1 row-major and then W2 row-major from one [`DetRng`] stream.
pub fn init_model(dim: usize, hidden: usize, seed: u64) -> MlpModel {
    let bound = (6.0 / (dim + hidden) as f64).sqrt();
    let mut rng = DetRng::new(seed);
    let mut m = MlpModel::zeros(dim, hidden);
    m.params
        .w1
        .iter_mut()
        .for_each(|v| *v = rng.symmetric(bound));
    m.params
        .w2
        .iter_mut()
        .for_each(|v| *v = rng.symmetric(bound));
    m.snap_to_f32();
    m
}

pub(crate) fn to_array(m: &EmbeddingMatrix) -> Array2<f64> {
    Array2::from_shape_vec(
        (m.rows(), m.dim()),
        m.as_flat().iter().map(|&v| v as f64).collect(),
    )
    .expect("matrix is rectangular")
}

fn check_dim(model: &MlpModel, m: &EmbeddingMatrix) -> Result<(), SimplifierError> {
    if m.dim() != model.dim() {
        return Err(SimplifierError::DimMismatch {
            model: model.dim(),
            input: m.dim(),
        });
    }
    Ok(())
}

fn check_shapes(a: &EmbeddingMatrix, b: &EmbeddingMatrix) -> Result<(), SimplifierError> {
    if a.rows() != b.rows() || a.dim() != b.dim() {
        return Err(SimplifierError::ShapeMismatch);
    }
    Ok(())
}

pub fn forward(
    model: &MlpModel,
    batch: &EmbeddingMatrix,
) -> Result<EmbeddingMatrix, SimplifierError> {
    check_dim(model, batch)?;
    let out = model.forward_array(to_array(batch).view());
    let data: Vec<f32> = out.iter().map(|&v| v as f32).collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(SimplifierError::NonFinite);
    }
    Ok(EmbeddingMatrix::from_flat(
        data,
        model.dim(),
        batch.lang().clone(),
    )?)
}

/// Row-wise [`forward`]; the result keeps the input's language tag.
pub fn transform_embeddings(
    model: &MlpModel,
    m: &EmbeddingMatrix,
) -> Result<EmbeddingMatrix, SimplifierError> {
    forward(model, m)
}

pub(crate) fn mse_array(pred: ArrayView2<f64>, target: ArrayView2<f64>) -> f64 {
    let mut acc = 0.0f64;
    for (p, t) in pred.iter().zip(target.iter()) {
        let d = p - t;
        acc += d * d;
    }
    acc / pred.len() as f64
}

/// Mean over all elements of the squared difference, accumulated in `f64`
/// in row-major order.
pub fn mse_loss(pred: &EmbeddingMatrix, target: &EmbeddingMatrix) -> Result<f64, SimplifierError> {
    check_shapes(pred, target)?;
    let mut acc = 0.0f64;
    for (&p, &t) in pred.as_flat().iter().zip(target.as_flat()) {
        let d = p as f64 - t as f64;
        acc += d * d;
    }
    Ok(acc / pred.as_flat().len() as f64)
}

pub fn gradients(
    model: &MlpModel,
    batch: &EmbeddingMatrix,
    target: &EmbeddingMatrix,
) -> Result<MlpParams, SimplifierError> {
    check_dim(model, batch)?;
    check_shapes(batch, target)?;
    Ok(model.gradients_array(to_array(batch).view(), to_array(target).view()))
}
