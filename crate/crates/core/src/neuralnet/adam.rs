use serde::{Deserialize, Serialize};

use crate::tensor::Scalar;

use super::params::ParamStore;
use super::NetError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { learning_rate: 0.001, beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<(), NetError> {
        let ok = self.learning_rate > 0.0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(NetError::InvalidConfig(format!("invalid Adam config {self:?}")))
        }
    }
}

/// One bias-corrected Adam update of every tensor in `params`.
pub fn adam_step<T: Scalar>(params: &mut ParamStore<T>, cfg: &AdamConfig) {
    let (values, grads, m, v, step) = params.adam_parts();
    *step += 1;
    let t = *step as i32;
    let (b1, b2) = (T::from_f64(cfg.beta1), T::from_f64(cfg.beta2));
    let (one_b1, one_b2) = (T::from_f64(1.0 - cfg.beta1), T::from_f64(1.0 - cfg.beta2));
    let c1 = T::from_f64(1.0 - cfg.beta1.powi(t));
    let c2 = T::from_f64(1.0 - cfg.beta2.powi(t));
    let lr = T::from_f64(cfg.learning_rate);
    let eps = T::from_f64(cfg.epsilon);

    for i in 0..values.len() {
        let g = grads[i].data();
        let m = m[i].data_mut();
        let v = v[i].data_mut();
        for (j, theta) in values[i].data_mut().iter_mut().enumerate() {
            m[j] = b1 * m[j] + one_b1 * g[j];
            v[j] = b2 * v[j] + one_b2 * g[j] * g[j];
            let m_hat = m[j] / c1;
            let v_hat = v[j] / c2;
            *theta -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    fn scalar_store(theta: f64, g: f64) -> ParamStore<f64> {
        let mut ps = ParamStore::new();
        let id = ps.insert("theta", Tensor::from_vec(&[1], vec![theta]));
        let (_, grads) = ps.values_and_grads();
        grads[id].data_mut()[0] = g;
        ps
    }

    #[test]
    fn hand_computed_first_step() {
        let mut ps = scalar_store(1.0, 0.5);
        adam_step(&mut ps, &AdamConfig::default());
        assert_eq!(ps.step(), 1);
        // m̂ = 0.5, v̂ = 0.25, step = 0.001 · 0.5 / (0.5 + 1e-8)
        let expected = 1.0 - 0.001 * 0.5 / (0.5 + 1e-8);
        let theta = ps.value(0).data()[0];
        assert!((theta - expected).abs() < 1e-15);
        assert!((theta - 0.999).abs() < 1e-10);
        assert!((ps.first_moment(0).data()[0] - 0.05).abs() < 1e-15);
        assert!((ps.second_moment(0).data()[0] - 0.00025).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_no_change() {
        let mut ps = scalar_store(0.3, 0.0);
        for _ in 0..5 {
            adam_step(&mut ps, &AdamConfig::default());
        }
        assert_eq!(ps.value(0).data()[0], 0.3);
    }

    #[test]
    fn equal_gradients_equal_updates() {
        let mut ps = ParamStore::<f32>::new();
        let a = ps.insert("a", Tensor::from_vec(&[2], vec![0.2, 0.2]));
        let b = ps.insert("b", Tensor::from_vec(&[1], vec![0.2]));
        let (_, grads) = ps.values_and_grads();
        grads[a].data_mut().copy_from_slice(&[0.3, 0.3]);
        grads[b].data_mut()[0] = 0.3;
        for _ in 0..3 {
            adam_step(&mut ps, &AdamConfig::default());
        }
        let wa = ps.value(a).data();
        assert_eq!(wa[0], wa[1]);
        assert_eq!(wa[0], ps.value(b).data()[0]);
        assert!(wa[0] < 0.2);
    }

    #[test]
    fn validation() {
        assert!(AdamConfig::default().validate().is_ok());
        assert!(AdamConfig { learning_rate: 0.0, ..Default::default() }.validate().is_err());
        assert!(AdamConfig { beta1: 1.0, ..Default::default() }.validate().is_err());
    }
}
