use crate::diff::tensor::Tensor;
use crate::error::{Error, Result};

/// Adam optimizer state with bias-corrected moments.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<Tensor>,
    pub v: Vec<Tensor>,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(params: &[Tensor], lr: f64) -> Self {
        Self {
            step: 0,
            m: params.iter().map(|p| Tensor::zeros(p.shape())).collect(),
            v: params.iter().map(|p| Tensor::zeros(p.shape())).collect(),
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

pub fn adam_step(params: &mut [Tensor], grads: &[Tensor], state: &mut AdamState) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::shape(
            "adam_step",
            format!(
                "{} params, {} grads, {} moment slots",
                params.len(),
                grads.len(),
                state.m.len()
            ),
        ));
    }
    for (i, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.shape() != g.shape() || p.shape() != state.m[i].shape() {
            return Err(Error::shape(
                "adam_step",
                format!("param {i}: {:?} vs grad {:?}", p.shape(), g.shape()),
            ));
        }
        if !g.is_finite() {
            return Err(Error::NonFinite("adam_step gradient"));
        }
    }

    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (state.beta1, state.beta2);
    let bc1 = 1.0 - b1.powi(t);
    let bc2 = 1.0 - b2.powi(t);
    for ((p, g), (m, v)) in params
        .iter_mut()
        .zip(grads)
        .zip(state.m.iter_mut().zip(state.v.iter_mut()))
    {
        let (pd, gd) = (p.data_mut(), g.data());
        let (md, vd) = (m.data_mut(), v.data_mut());
        for j in 0..pd.len() {
            md[j] = b1 * md[j] + (1.0 - b1) * gd[j];
            vd[j] = b2 * vd[j] + (1.0 - b2) * gd[j] * gd[j];
            let m_hat = md[j] / bc1;
            let v_hat = vd[j] / bc2;
            pd[j] -= state.lr * m_hat / (v_hat.sqrt() + state.eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut params = vec![Tensor::full(&[2, 3], 0.7), Tensor::scalar(-1.5)];
        let before = params.clone();
        let grads: Vec<Tensor> = params.iter().map(|p| Tensor::zeros(p.shape())).collect();
        let mut state = AdamState::new(&params, 1e-3);
        for _ in 0..5 {
            adam_step(&mut params, &grads, &mut state).unwrap();
        }
        assert_eq!(params, before);
        assert!(state.m.iter().chain(&state.v).all(|t| t.data().iter().all(|&v| v == 0.0)));
        assert_eq!(state.step, 5);
    }

    #[test]
    fn first_step_moves_by_lr_against_gradient_sign() {
        // m1 = (1-b1) g, v1 = (1-b2) g^2; bias correction gives m_hat = g, v_hat = g^2.
        for g in [3.0, -0.02] {
            let mut params = vec![Tensor::scalar(1.0)];
            let mut state = AdamState::new(&params, 0.01);
            state.eps = 0.0;
            adam_step(&mut params, &[Tensor::scalar(g)], &mut state).unwrap();
            let want = 1.0 - 0.01 * f64::signum(g);
            assert!((params[0].data()[0] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn identical_inputs_give_identical_updates() {
        let grads = vec![Tensor::new(vec![3], vec![0.1, -2.0, 5.0]).unwrap()];
        let mut a = vec![Tensor::new(vec![3], vec![1.0, 2.0, 3.0]).unwrap()];
        let mut b = a.clone();
        let mut sa = AdamState::new(&a, 1e-3);
        let mut sb = AdamState::new(&b, 1e-3);
        for _ in 0..3 {
            adam_step(&mut a, &grads, &mut sa).unwrap();
            adam_step(&mut b, &grads, &mut sb).unwrap();
        }
        assert_eq!(a, b);
        assert_eq!(sa, sb);
    }

    #[test]
    fn rejects_mismatch_and_non_finite() {
        let mut params = vec![Tensor::zeros(&[2])];
        let mut state = AdamState::new(&params, 1e-3);
        assert!(adam_step(&mut params, &[Tensor::zeros(&[3])], &mut state).is_err());
        let bad = Tensor::new(vec![2], vec![f64::NAN, 0.0]).unwrap();
        assert!(matches!(
            adam_step(&mut params, &[bad], &mut state),
            Err(Error::NonFinite(_))
        ));
    }
}
