use super::mlp::{MlpModel, MlpParams};
use super::SimplifierError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment estimates plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: MlpParams,
    pub v: MlpParams,
    pub t: u64,
}

impl AdamState {
    pub fn new(model: &MlpModel) -> Self {
        let (d, h) = (model.dim(), model.hidden());
        Self {
            m: MlpParams::zeros(d, h),
            v: MlpParams::zeros(d, h),
            t: 0,
        }
    }
}

/// One bias-corrected Adam update in place.
pub fn adam_step(
    model: &mut MlpModel,
    grads: &MlpParams,
    state: &mut AdamState,
    lr: f64,
    cfg: &AdamConfig,
) -> Result<(), SimplifierError> {
    if !grads.same_shape(&model.params)
        || !state.m.same_shape(&model.params)
        || !state.v.same_shape(&model.params)
    {
        return Err(SimplifierError::ShapeMismatch);
    }
    state.t += 1;
    let c1 = 1.0 - cfg.beta1.powi(state.t as i32);
    let c2 = 1.0 - cfg.beta2.powi(state.t as i32);
    let params = model.params.slices_mut();
    let ms = state.m.slices_mut();
    let vs = state.v.slices_mut();
    for (((p, g), m), v) in params.into_iter().zip(grads.slices()).zip(ms).zip(vs) {
        for i in 0..p.len() {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            p[i] -= lr * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
    }
    model.snap_to_f32();
    Ok(())
}
