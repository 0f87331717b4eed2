use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore};

use super::params::{LstmParams, ModelParams, Tensor};
use super::vocab::EncodedInstance;
use super::ModelError;

/// Probabilities below this are clamped inside the log.
pub const LOG_FLOOR: f64 = 1e-12;

/// Dropout on the dense-layer input, with inverted scaling.
pub enum Dropout<'a> {
    Off,
    On { keep: f64, rng: &'a mut dyn RngCore },
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}

/// `out += w * x` for a row-major `rows x cols` matrix.
fn mat_vec_acc(w: &Tensor, x: &[f64], out: &mut [f64]) {
    for (r, o) in out.iter_mut().enumerate() {
        *o += w.row(r).iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// `out += w^T * d`.
fn mat_t_vec_acc(w: &Tensor, d: &[f64], out: &mut [f64]) {
    for (r, dr) in d.iter().enumerate() {
        if *dr == 0.0 {
            continue;
        }
        for (o, wv) in out.iter_mut().zip(w.row(r)) {
            *o += wv * dr;
        }
    }
}

/// `w += d (outer) x`.
fn outer_acc(w: &mut Tensor, d: &[f64], x: &[f64]) {
    for (r, dr) in d.iter().enumerate() {
        if *dr == 0.0 {
            continue;
        }
        for (wv, xv) in w.row_mut(r).iter_mut().zip(x) {
            *wv += dr * xv;
        }
    }
}

/// Activations of one LSTM direction over one sequence.
struct DirectionTrace {
    tokens: Vec<usize>,
    /// activated gates per step, blocks i, f, o, g
    gates: Vec<Vec<f64>>,
    cells: Vec<Vec<f64>>,
    hiddens: Vec<Vec<f64>>,
}

impl DirectionTrace {
    fn final_hidden(&self, hidden: usize) -> Vec<f64> {
        self.hiddens.last().cloned().unwrap_or_else(|| vec![0.0; hidden])
    }
}

fn lstm_forward(lstm: &LstmParams, embedding: &Tensor, tokens: Vec<usize>) -> DirectionTrace {
    let h = lstm.hidden();
    let mut trace = DirectionTrace {
        gates: Vec::with_capacity(tokens.len()),
        cells: Vec::with_capacity(tokens.len()),
        hiddens: Vec::with_capacity(tokens.len()),
        tokens,
    };
    let mut h_prev = vec![0.0; h];
    let mut c_prev = vec![0.0; h];
    for &token in &trace.tokens {
        let mut z = lstm.bias.data.clone();
        mat_vec_acc(&lstm.w_input, embedding.row(token), &mut z);
        mat_vec_acc(&lstm.w_recurrent, &h_prev, &mut z);
        for v in &mut z[..3 * h] {
            *v = sigmoid(*v);
        }
        for v in &mut z[3 * h..] {
            *v = libm::tanh(*v);
        }
        let mut c = vec![0.0; h];
        let mut hid = vec![0.0; h];
        for j in 0..h {
            let (i, f, o, g) = (z[j], z[h + j], z[2 * h + j], z[3 * h + j]);
            c[j] = f * c_prev[j] + i * g;
            hid[j] = o * libm::tanh(c[j]);
        }
        trace.gates.push(z);
        trace.cells.push(c.clone());
        trace.hiddens.push(hid.clone());
        h_prev = hid;
        c_prev = c;
    }
    trace
}

/// Backpropagation through time from the gradient of the final hidden state.
fn lstm_backward(
    lstm: &LstmParams,
    embedding: &Tensor,
    trace: &DirectionTrace,
    dh_final: &[f64],
    grad: &mut LstmParams,
    grad_embedding: &mut Tensor,
) {
    let h = lstm.hidden();
    let zeros = vec![0.0; h];
    let mut dh = dh_final.to_vec();
    let mut dc = vec![0.0; h];
    let mut dz = vec![0.0; 4 * h];
    for t in (0..trace.tokens.len()).rev() {
        let gates = &trace.gates[t];
        let c = &trace.cells[t];
        let c_prev = if t > 0 { &trace.cells[t - 1] } else { &zeros };
        let h_prev = if t > 0 { &trace.hiddens[t - 1] } else { &zeros };
        for j in 0..h {
            let (i, f, o, g) = (gates[j], gates[h + j], gates[2 * h + j], gates[3 * h + j]);
            let tanh_c = libm::tanh(c[j]);
            let d_o = dh[j] * tanh_c;
            dc[j] += dh[j] * o * (1.0 - tanh_c * tanh_c);
            let d_i = dc[j] * g;
            let d_g = dc[j] * i;
            let d_f = dc[j] * c_prev[j];
            dz[j] = d_i * i * (1.0 - i);
            dz[h + j] = d_f * f * (1.0 - f);
            dz[2 * h + j] = d_o * o * (1.0 - o);
            dz[3 * h + j] = d_g * (1.0 - g * g);
            dc[j] *= f;
        }
        let token = trace.tokens[t];
        outer_acc(&mut grad.w_input, &dz, embedding.row(token));
        outer_acc(&mut grad.w_recurrent, &dz, h_prev);
        for (b, d) in grad.bias.data.iter_mut().zip(&dz) {
            *b += d;
        }
        mat_t_vec_acc(&lstm.w_input, &dz, grad_embedding.row_mut(token));
        dh.fill(0.0);
        mat_t_vec_acc(&lstm.w_recurrent, &dz, &mut dh);
    }
}

struct ItemTrace {
    directions: Vec<(DirectionTrace, DirectionTrace)>,
    /// dropout scale per feature, 1.0 when off
    mask: Vec<f64>,
    /// masked features
    dense_input: Vec<f64>,
    dense_output: Vec<f64>,
    probs: [f64; 2],
}

fn check_item(params: &ModelParams, item: &EncodedInstance) -> Result<(), ModelError> {
    if item.channels.len() != params.specs.len() {
        return Err(ModelError::ShapeMismatch(format!(
            "instance has {} channels, model has {}",
            item.channels.len(),
            params.specs.len()
        )));
    }
    for (seq, spec) in item.channels.iter().zip(&params.specs) {
        if seq.len() > spec.max_len {
            return Err(ModelError::ShapeMismatch(format!(
                "{} sequence of length {} exceeds max_len {}",
                spec.name,
                seq.len(),
                spec.max_len
            )));
        }
        if let Some(bad) = seq.iter().find(|&&t| t >= spec.vocab_size) {
            return Err(ModelError::ShapeMismatch(format!(
                "{} token id {bad} outside vocabulary of {}",
                spec.name, spec.vocab_size
            )));
        }
    }
    Ok(())
}

fn item_forward(params: &ModelParams, item: &EncodedInstance, dropout: &mut Dropout<'_>) -> ItemTrace {
    let mut directions = Vec::with_capacity(params.channels.len());
    let mut features = Vec::with_capacity(params.feature_width());
    for (ch, seq) in params.channels.iter().zip(&item.channels) {
        // padding ids are dropped, so the recurrence only sees real tokens
        let real: Vec<usize> = seq.iter().copied().filter(|&t| t != 0).collect();
        let reversed: Vec<usize> = real.iter().rev().copied().collect();
        let fwd = lstm_forward(&ch.forward, &ch.embedding, real);
        let bwd = lstm_forward(&ch.backward, &ch.embedding, reversed);
        features.extend(fwd.final_hidden(ch.forward.hidden()));
        features.extend(bwd.final_hidden(ch.backward.hidden()));
        directions.push((fwd, bwd));
    }

    let mask: Vec<f64> = match dropout {
        Dropout::On { keep, rng } if *keep < 1.0 => features
            .iter()
            .map(|_| if rng.gen_bool(*keep) { 1.0 / *keep } else { 0.0 })
            .collect(),
        _ => vec![1.0; features.len()],
    };
    let dense_input: Vec<f64> = features.iter().zip(&mask).map(|(f, m)| f * m).collect();

    let dense_dim = params.dense_dim();
    let mut dense_output = params.dense_bias.data.clone();
    for (d, x) in dense_input.iter().enumerate() {
        if *x == 0.0 {
            continue;
        }
        for (o, w) in dense_output.iter_mut().zip(params.dense_weight.row(d)) {
            *o += x * w;
        }
    }
    for v in &mut dense_output {
        *v = libm::tanh(*v);
    }

    let mut logits = [params.output_bias.data[0], params.output_bias.data[1]];
    for k in 0..dense_dim {
        let w = params.output_weight.row(k);
        logits[0] += dense_output[k] * w[0];
        logits[1] += dense_output[k] * w[1];
    }
    let top = logits[0].max(logits[1]);
    let e0 = libm::exp(logits[0] - top);
    let e1 = libm::exp(logits[1] - top);
    let probs = [e0 / (e0 + e1), e1 / (e0 + e1)];

    ItemTrace {
        directions,
        mask,
        dense_input,
        dense_output,
        probs,
    }
}

/// Class probabilities per item, `[negative, positive]`.
pub fn forward(params: &ModelParams, batch: &[EncodedInstance], mut dropout: Dropout<'_>) -> Result<Vec<[f64; 2]>, ModelError> {
    for item in batch {
        check_item(params, item)?;
    }
    Ok(batch
        .iter()
        .map(|item| item_forward(params, item, &mut dropout).probs)
        .collect())
}

/// Mean weighted cross-entropy; positive items weigh `class_weight_positive`.
pub fn loss(probs: &[[f64; 2]], labels: &[bool], class_weight_positive: f64) -> f64 {
    if probs.is_empty() {
        return 0.0;
    }
    let total: f64 = probs
        .iter()
        .zip(labels)
        .map(|(p, &positive)| {
            let (w, py) = if positive { (class_weight_positive, p[1]) } else { (1.0, p[0]) };
            -w * libm::log(py.max(LOG_FLOOR))
        })
        .sum();
    total / probs.len() as f64
}

/// Loss and its analytic gradient with respect to every parameter.
pub fn loss_and_gradients(
    params: &ModelParams,
    batch: &[EncodedInstance],
    labels: &[bool],
    class_weight_positive: f64,
    mut dropout: Dropout<'_>,
) -> Result<(f64, ModelParams), ModelError> {
    if batch.len() != labels.len() {
        return Err(ModelError::ShapeMismatch(format!(
            "{} items but {} labels",
            batch.len(),
            labels.len()
        )));
    }
    for item in batch {
        check_item(params, item)?;
    }
    let mut grad = params.zeros_like();
    let mut probs = Vec::with_capacity(batch.len());
    let n = batch.len() as f64;
    let dense_dim = params.dense_dim();

    for (item, &positive) in batch.iter().zip(labels) {
        let trace = item_forward(params, item, &mut dropout);
        probs.push(trace.probs);

        let (weight, y) = if positive { (class_weight_positive, 1) } else { (1.0, 0) };
        let mut d_logits = [0.0; 2];
        if trace.probs[y] > LOG_FLOOR {
            for (c, d) in d_logits.iter_mut().enumerate() {
                let target = if c == y { 1.0 } else { 0.0 };
                *d = weight / n * (trace.probs[c] - target);
            }
        }

        grad.output_bias.data[0] += d_logits[0];
        grad.output_bias.data[1] += d_logits[1];
        let mut d_pre = vec![0.0; dense_dim];
        for k in 0..dense_dim {
            let a = trace.dense_output[k];
            let gw = grad.output_weight.row_mut(k);
            gw[0] += a * d_logits[0];
            gw[1] += a * d_logits[1];
            let w = params.output_weight.row(k);
            let da = w[0] * d_logits[0] + w[1] * d_logits[1];
            d_pre[k] = da * (1.0 - a * a);
        }
        for (b, d) in grad.dense_bias.data.iter_mut().zip(&d_pre) {
            *b += d;
        }
        let mut d_features = vec![0.0; trace.dense_input.len()];
        for (r, x) in trace.dense_input.iter().enumerate() {
            for (g, d) in grad.dense_weight.row_mut(r).iter_mut().zip(&d_pre) {
                *g += x * d;
            }
            let w = params.dense_weight.row(r);
            d_features[r] = w.iter().zip(&d_pre).map(|(a, b)| a * b).sum::<f64>() * trace.mask[r];
        }

        let mut offset = 0;
        for ((ch, gch), (fwd, bwd)) in params
            .channels
            .iter()
            .zip(grad.channels.iter_mut())
            .zip(&trace.directions)
        {
            let hf = ch.forward.hidden();
            let hb = ch.backward.hidden();
            let d_fwd = &d_features[offset..offset + hf];
            let d_bwd = &d_features[offset + hf..offset + hf + hb];
            offset += hf + hb;
            lstm_backward(&ch.forward, &ch.embedding, fwd, d_fwd, &mut gch.forward, &mut gch.embedding);
            lstm_backward(&ch.backward, &ch.embedding, bwd, d_bwd, &mut gch.backward, &mut gch.embedding);
        }
    }

    let labels_loss = loss(&probs, labels, class_weight_positive);
    Ok((labels_loss, grad))
}

/// Analytic gradients with dropout disabled.
pub fn gradients(
    params: &ModelParams,
    batch: &[EncodedInstance],
    labels: &[bool],
    class_weight_positive: f64,
) -> Result<ModelParams, ModelError> {
    loss_and_gradients(params, batch, labels, class_weight_positive, Dropout::Off).map(|(_, g)| g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{init_params, seeded_rng, ChannelKind, ChannelSpec, TrainConfig};
    use rand::Rng;

    fn tiny_specs() -> Vec<ChannelSpec> {
        ChannelKind::ALL
            .iter()
            .enumerate()
            .map(|(i, &name)| ChannelSpec {
                name,
                vocab_size: 4,
                embed_dim: 2 + i % 3,
                hidden_dim: 4 - i % 2,
                max_len: 4,
            })
            .collect()
    }

    fn tiny_params(seed: u64, scale: f64) -> ModelParams {
        let config = TrainConfig {
            dense_dim: 3,
            seed,
            ..TrainConfig::default()
        };
        let mut p = init_params(&tiny_specs(), &config).unwrap();
        let mut rng = seeded_rng(seed, 99);
        for t in p.tensors_mut() {
            for v in &mut t.data {
                *v = rng.gen_range(-scale..scale);
            }
        }
        for ch in &mut p.channels {
            ch.embedding.row_mut(0).fill(0.0);
        }
        p
    }

    fn batch() -> Vec<EncodedInstance> {
        vec![
            EncodedInstance {
                channels: vec![vec![2, 3, 1, 3], vec![1, 2, 0, 0], vec![3, 2, 2], vec![]],
            },
            EncodedInstance {
                channels: vec![vec![3, 1], vec![2, 3, 3, 1], vec![1], vec![2, 3]],
            },
        ]
    }

    #[test]
    fn rows_are_distributions_and_pure() {
        let p = tiny_params(3, 0.5);
        let b = batch();
        let probs = forward(&p, &b, Dropout::Off).unwrap();
        for row in &probs {
            assert!((row[0] + row[1] - 1.0).abs() <= 1e-9);
        }
        let again = forward(&p, &b, Dropout::Off).unwrap();
        assert_eq!(
            probs.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>(),
            again.iter().flatten().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        let twins = forward(&p, &[b[0].clone(), b[0].clone()], Dropout::Off).unwrap();
        assert_eq!(twins[0], twins[1]);
        let swapped = forward(&p, &[b[1].clone(), b[0].clone()], Dropout::Off).unwrap();
        assert_eq!(swapped[0], probs[1]);
        assert_eq!(swapped[1], probs[0]);

        let empty = EncodedInstance {
            channels: vec![vec![], vec![], vec![], vec![]],
        };
        let out = forward(&p, &[empty], Dropout::Off).unwrap();
        assert!(out[0].iter().all(|v| v.is_finite()));
    }

    #[test]
    fn shape_errors() {
        let p = tiny_params(3, 0.5);
        let wrong_channels = EncodedInstance { channels: vec![vec![1]] };
        assert!(matches!(forward(&p, &[wrong_channels], Dropout::Off), Err(ModelError::ShapeMismatch(_))));
        let bad_token = EncodedInstance {
            channels: vec![vec![9], vec![], vec![], vec![]],
        };
        assert!(forward(&p, &[bad_token], Dropout::Off).is_err());
        assert!(gradients(&p, &batch(), &[true], 1.0).is_err());
    }

    #[test]
    fn loss_closed_forms() {
        assert_eq!(loss(&[[0.0, 1.0], [1.0, 0.0]], &[true, false], 1.0), 0.0);
        let l = loss(&[[0.5, 0.5]], &[true], 1.0);
        assert!((l - core::f64::consts::LN_2).abs() < 1e-15);
        let probs = [[0.3, 0.7], [0.6, 0.4]];
        let base = loss(&probs, &[true, false], 1.0);
        let doubled = loss(&probs, &[true, false], 2.0);
        let positive_part = -libm::log(0.7) / 2.0;
        assert!((doubled - base - positive_part).abs() < 1e-15);
        assert!(loss(&[[1.0, 0.0]], &[true], 1.0).is_finite());
    }

    #[test]
    fn dropout_changes_train_mode_only() {
        let p = tiny_params(5, 0.5);
        let b = batch();
        let eval = forward(&p, &b, Dropout::Off).unwrap();
        let mut rng = seeded_rng(1, 2);
        let train = forward(&p, &b, Dropout::On { keep: 0.5, rng: &mut rng }).unwrap();
        assert_ne!(eval, train);
        let mut rng = seeded_rng(1, 2);
        let keep_all = forward(&p, &b, Dropout::On { keep: 1.0, rng: &mut rng }).unwrap();
        assert_eq!(eval, keep_all);
    }

    #[test]
    fn padding_row_gradient_is_zero_and_shapes_match() {
        let p = tiny_params(11, 0.5);
        let g = gradients(&p, &batch(), &[true, false], 1.0).unwrap();
        for ch in &g.channels {
            assert!(ch.embedding.row(0).iter().all(|v| *v == 0.0));
        }
        let ps: Vec<Vec<usize>> = p.tensors().iter().map(|(_, t)| t.shape.clone()).collect();
        let gs: Vec<Vec<usize>> = g.tensors().iter().map(|(_, t)| t.shape.clone()).collect();
        assert_eq!(ps, gs);
    }

    /// Central differences over every scalar parameter.
    fn numeric_gradient(params: &ModelParams, b: &[EncodedInstance], labels: &[bool], w: f64) -> Vec<Vec<f64>> {
        let eps = 1e-5;
        let count = params.tensors().len();
        let mut out = Vec::with_capacity(count);
        for t in 0..count {
            let len = params.tensors()[t].1.len();
            let mut col = Vec::with_capacity(len);
            for k in 0..len {
                let mut plus = params.clone();
                plus.tensors_mut()[t].data[k] += eps;
                let mut minus = params.clone();
                minus.tensors_mut()[t].data[k] -= eps;
                let lp = loss(&forward(&plus, b, Dropout::Off).unwrap(), labels, w);
                let lm = loss(&forward(&minus, b, Dropout::Off).unwrap(), labels, w);
                col.push((lp - lm) / (2.0 * eps));
            }
            out.push(col);
        }
        out
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        for (seed, weight) in [(1, 1.0), (2, 2.5)] {
            let p = tiny_params(seed, 0.5);
            let b = batch();
            let labels = [true, false];
            let g = gradients(&p, &b, &labels, weight).unwrap();
            let numeric = numeric_gradient(&p, &b, &labels, weight);
            for ((name, analytic), numeric) in g.tensors().iter().zip(&numeric) {
                for (a, n) in analytic.data.iter().zip(numeric) {
                    // below 1e-6 central differences are dominated by round-off
                    let rel = (a - n).abs() / a.abs().max(n.abs()).max(1e-6);
                    assert!(rel < 1e-4, "{name}: analytic {a} numeric {n} rel {rel}");
                }
            }
        }
    }
}
