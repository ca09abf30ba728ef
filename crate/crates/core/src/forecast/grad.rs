//! Mean-absolute-error loss and its gradient by backpropagation through time.

use crate::data::Window;

use super::lstm::{LstmModel, StepTrace, GATES};

/// Subgradient of |e|, taken as 0 at the kink.
fn sign(e: f64) -> f64 {
    if e > 0.0 {
        1.0
    } else if e < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// MAE over every output of every window.
pub fn mae_loss(model: &LstmModel, batch: &[&Window]) -> f64 {
    let n = batch.len() * model.shape().output_size;
    batch
        .iter()
        .map(|w| model.run(&w.input, None).iter().zip(&w.target).map(|(p, y)| (p - y).abs()).sum::<f64>())
        .sum::<f64>()
        / n as f64
}

/// MAE and its gradient with respect to every parameter. The gradient is
/// returned as a model of the same shape.
pub fn loss_and_gradient(model: &LstmModel, batch: &[&Window]) -> (f64, LstmModel) {
    let shape = model.shape();
    let hs = shape.hidden_size;
    let scale = 1.0 / (batch.len() * shape.output_size) as f64;
    let mut grad = LstmModel::zeros(shape);
    let mut loss = 0.0;
    let mut trace: Vec<StepTrace> = Vec::with_capacity(shape.input_len);
    let zeros = vec![0.0; hs];

    for w in batch {
        trace.clear();
        let y_hat = model.run(&w.input, Some(&mut trace));
        let dy: Vec<f64> = y_hat
            .iter()
            .zip(&w.target)
            .map(|(p, y)| {
                loss += (p - y).abs();
                sign(p - y) * scale
            })
            .collect();
        let h_last = &trace.last().expect("window has at least one step").h;
        grad.output_weights_mut().add_outer(&dy, h_last);
        grad.output_bias_mut().iter_mut().zip(&dy).for_each(|(g, d)| *g += d);

        let mut dh = vec![0.0; hs];
        model.output_weights().tr_mul_add(&dy, &mut dh);
        let mut dc = vec![0.0; hs];

        for t in (0..trace.len()).rev() {
            let step = &trace[t];
            let (h_prev, c_prev) = match t {
                0 => (&zeros, &zeros),
                _ => (&trace[t - 1].h, &trace[t - 1].c),
            };
            let x = &w.input[t * shape.input_size..(t + 1) * shape.input_size];
            let [f, i, o, g] = &step.gates;
            let mut dz: [Vec<f64>; 4] = std::array::from_fn(|_| vec![0.0; hs]);
            for k in 0..hs {
                let tc = step.c[k].tanh();
                dc[k] += dh[k] * o[k] * (1.0 - tc * tc);
                dz[0][k] = dc[k] * c_prev[k] * f[k] * (1.0 - f[k]);
                dz[1][k] = dc[k] * g[k] * i[k] * (1.0 - i[k]);
                dz[2][k] = dh[k] * tc * o[k] * (1.0 - o[k]);
                dz[3][k] = dc[k] * i[k] * (1.0 - g[k] * g[k]);
                dc[k] *= f[k];
            }
            dh.iter_mut().for_each(|v| *v = 0.0);
            for gate in GATES {
                let k = gate as usize;
                grad.input_weights_mut(gate).add_outer(&dz[k], x);
                grad.recurrent_weights_mut(gate).add_outer(&dz[k], h_prev);
                grad.bias_mut(gate).iter_mut().zip(&dz[k]).for_each(|(b, d)| *b += d);
                model.recurrent_weights(gate).tr_mul_add(&dz[k], &mut dh);
            }
        }
    }
    (loss * scale, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::lstm::LstmShape;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gradient_matches_central_differences() {
        let shape = LstmShape { input_size: 1, hidden_size: 2, output_size: 2, input_len: 3 };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        for seed in 0..10 {
            let model = LstmModel::random(shape, seed);
            let w = Window {
                input: (0..3).map(|_| rng.random_range(0.0..1.0)).collect(),
                target: (0..2).map(|_| rng.random_range(-2.0..2.0)).collect(),
                start: 0,
            };
            let out = model.forecast(&w.input).unwrap();
            if out.iter().zip(&w.target).any(|(p, y)| (p - y).abs() < 1e-3) {
                continue;
            }
            let batch = [&w];
            let (_, grad) = loss_and_gradient(&model, &batch);
            let analytic: Vec<f64> = grad.params().concat();
            let eps = 1e-6;
            let mut idx = 0;
            let mut probe = model.clone();
            for block in 0..probe.params().len() {
                for j in 0..probe.params()[block].len() {
                    let orig = probe.params()[block][j];
                    probe.params_mut()[block][j] = orig + eps;
                    let up = mae_loss(&probe, &batch);
                    probe.params_mut()[block][j] = orig - eps;
                    let down = mae_loss(&probe, &batch);
                    probe.params_mut()[block][j] = orig;
                    let numeric = (up - down) / (2.0 * eps);
                    let a = analytic[idx];
                    let denom = a.abs().max(numeric.abs());
                    assert!(
                        (a - numeric).abs() <= 1e-4 * denom || (a - numeric).abs() < 1e-9,
                        "param {idx}: analytic {a}, numeric {numeric}"
                    );
                    idx += 1;
                }
            }
            checked += 1;
        }
        assert!(checked >= 5);
    }

    #[test]
    fn kink_subgradient_is_zero() {
        let shape = LstmShape { input_size: 1, hidden_size: 2, output_size: 1, input_len: 2 };
        let model = LstmModel::zeros(shape);
        let w = Window { input: vec![0.3, 0.6], target: vec![0.0], start: 0 };
        let (loss, grad) = loss_and_gradient(&model, &[&w]);
        assert_eq!(loss, 0.0);
        assert!(grad.params().iter().all(|p| p.iter().all(|&v| v == 0.0)));
    }
}
