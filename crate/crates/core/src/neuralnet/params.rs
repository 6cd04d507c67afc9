use std::collections::HashMap;

use crate::rng::SplitMix64;
use crate::tensor::{Scalar, Tensor};

/// Every trainable tensor of a run, with gradient and Adam moment buffers.
///
/// Values and gradients live in separate vectors so backward passes can read
/// one while writing the other.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamStore<T> {
    names: Vec<String>,
    index: HashMap<String, usize>,
    values: Vec<Tensor<T>>,
    grads: Vec<Tensor<T>>,
    first_moment: Vec<Tensor<T>>,
    second_moment: Vec<Tensor<T>>,
    step: u64,
}

impl<T: Scalar> Default for ParamStore<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> ParamStore<T> {
    pub fn new() -> Self {
        Self {
            names: Vec::new(),
            index: HashMap::new(),
            values: Vec::new(),
            grads: Vec::new(),
            first_moment: Vec::new(),
            second_moment: Vec::new(),
            step: 0,
        }
    }

    /// Register a tensor. Panics on duplicate names.
    pub fn insert(&mut self, name: &str, value: Tensor<T>) -> usize {
        assert!(!self.index.contains_key(name), "duplicate parameter {name}");
        let id = self.values.len();
        let shape = value.shape().to_vec();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        self.values.push(value);
        self.grads.push(Tensor::zeros(&shape));
        self.first_moment.push(Tensor::zeros(&shape));
        self.second_moment.push(Tensor::zeros(&shape));
        id
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Like [`id`](Self::id) but panics with the missing name.
    pub fn expect_id(&self, name: &str) -> usize {
        self.id(name).unwrap_or_else(|| panic!("parameter {name} not registered"))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn value(&self, id: usize) -> &Tensor<T> {
        &self.values[id]
    }

    pub fn value_mut(&mut self, id: usize) -> &mut Tensor<T> {
        &mut self.values[id]
    }

    pub fn grad(&self, id: usize) -> &Tensor<T> {
        &self.grads[id]
    }

    pub fn values(&self) -> &[Tensor<T>] {
        &self.values
    }

    /// Disjoint borrow for backward passes.
    pub fn values_and_grads(&mut self) -> (&[Tensor<T>], &mut [Tensor<T>]) {
        (&self.values, &mut self.grads)
    }

    pub fn zero_grads(&mut self) {
        self.grads.iter_mut().for_each(|g| g.fill(T::zero()));
    }

    pub fn scale_grads(&mut self, factor: T) {
        for g in &mut self.grads {
            g.data_mut().iter_mut().for_each(|x| *x *= factor);
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn total_params(&self) -> usize {
        self.values.iter().map(Tensor::numel).sum()
    }

    pub(crate) fn adam_parts(&mut self) -> (&mut [Tensor<T>], &[Tensor<T>], &mut [Tensor<T>], &mut [Tensor<T>], &mut u64) {
        (&mut self.values, &self.grads, &mut self.first_moment, &mut self.second_moment, &mut self.step)
    }

    pub fn first_moment(&self, id: usize) -> &Tensor<T> {
        &self.first_moment[id]
    }

    pub fn second_moment(&self, id: usize) -> &Tensor<T> {
        &self.second_moment[id]
    }

    /// Same names and shapes, values converted to `U`; moments reset.
    pub fn cast<U: Scalar>(&self) -> ParamStore<U> {
        let mut out = ParamStore::new();
        for (name, v) in self.names.iter().zip(&self.values) {
            out.insert(name, v.cast());
        }
        out
    }
}

/// Glorot-uniform bound `sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Tensor with entries drawn uniform in (-bound, bound).
pub fn uniform_tensor<T: Scalar>(shape: &[usize], bound: f64, rng: &mut SplitMix64) -> Tensor<T> {
    let n = shape.iter().product();
    let data = (0..n).map(|_| T::from_f64(rng.uniform(-bound, bound))).collect();
    Tensor::from_vec(shape, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn buffers_follow_values() {
        let mut ps = ParamStore::<f32>::new();
        let a = ps.insert("a", Tensor::zeros(&[2, 3]));
        assert_eq!(ps.grad(a).shape(), &[2, 3]);
        assert_eq!(ps.first_moment(a).shape(), &[2, 3]);
        assert_eq!(ps.second_moment(a).shape(), &[2, 3]);
        assert_eq!(ps.id("a"), Some(a));
        assert_eq!(ps.step(), 0);
    }

    #[test]
    #[should_panic(expected = "duplicate")]
    fn duplicate_names_rejected() {
        let mut ps = ParamStore::<f32>::new();
        ps.insert("a", Tensor::zeros(&[1]));
        ps.insert("a", Tensor::zeros(&[1]));
    }

    #[test]
    fn uniform_respects_bound() {
        let mut rng = SplitMix64::new(1);
        let t: Tensor<f64> = uniform_tensor(&[100, 10], 0.3, &mut rng);
        assert!(t.data().iter().all(|x| x.abs() < 0.3));
    }
}
