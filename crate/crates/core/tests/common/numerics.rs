//! Central finite-difference checks (h = 1e−6) for every layer and loss, and
//! the FFT against a direct DFT.

use jamcgan_core::cnn::CnnNet;
use jamcgan_core::nn::conv::{conv1d_backward, conv1d_forward};
use jamcgan_core::nn::dense::{dense_backward, dense_forward};
use jamcgan_core::nn::pool::{
    dropout_backward, dropout_forward, global_avg_pool1d_backward, global_avg_pool1d_forward, maxpool1d_backward,
    maxpool1d_forward,
};
use jamcgan_core::nn::{
    bce_loss, bce_with_logits, cross_entropy, Activation, BatchNorm1d, Embedding, Mode, Tensor,
};
use jamcgan_core::dsp::fft;
use jamcgan_core::rng::Stream;
use rustfft::num_complex::Complex64;

const H: f64 = 1e-6;

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(1e-300)
}

/// Numerical gradient of `f` at `x` over the listed coordinates.
fn numeric(x: &Tensor, coords: &[usize], f: impl Fn(&Tensor) -> f64) -> Vec<f64> {
    coords
        .iter()
        .map(|&i| {
            let mut up = x.clone();
            up.data_mut()[i] += H;
            let mut dn = x.clone();
            dn.data_mut()[i] -= H;
            (f(&up) - f(&dn)) / (2.0 * H)
        })
        .collect()
}

fn all(x: &Tensor) -> Vec<usize> {
    (0..x.len()).collect()
}

fn pick(v: &Tensor, coords: &[usize]) -> Vec<f64> {
    coords.iter().map(|&i| v.data()[i]).collect()
}

/// `Σ out ⊙ r`, turning any layer output into a scalar with upstream gradient `r`.
fn dot(out: &Tensor, r: &Tensor) -> f64 {
    out.data().iter().zip(r.data()).map(|(a, b)| a * b).sum()
}

pub fn activations() {
    let mut rng = Stream::new(1);
    for act in [Activation::Sigmoid, Activation::Relu, Activation::LeakyRelu(0.2), Activation::Tanh] {
        let x = Tensor::randn(&[7, 5], 2.0, &mut rng);
        let r = Tensor::randn(&[7, 5], 1.0, &mut rng);
        let y = act.forward(&x);
        let g = act.backward(&x, &y, &r);
        let num = numeric(&x, &all(&x), |x| dot(&act.forward(x), &r));
        assert!(rel_err(&num, g.data()) < 1e-5, "{act:?}");
    }
}

pub fn dense_all_gradients() {
    let mut rng = Stream::new(2);
    for (batch, inp, out) in [(1, 3, 4), (5, 7, 2), (3, 1, 1)] {
        let w = Tensor::randn(&[out, inp], 1.0, &mut rng);
        let b = Tensor::randn(&[out], 1.0, &mut rng);
        let x = Tensor::randn(&[batch, inp], 1.0, &mut rng);
        let r = Tensor::randn(&[batch, out], 1.0, &mut rng);
        let g = dense_backward(&w, &x, &r, true, true).unwrap();
        let nw = numeric(&w, &all(&w), |w| dot(&dense_forward(w, &b, &x).unwrap(), &r));
        let nb = numeric(&b, &all(&b), |b| dot(&dense_forward(&w, b, &x).unwrap(), &r));
        let nx = numeric(&x, &all(&x), |x| dot(&dense_forward(&w, &b, x).unwrap(), &r));
        assert!(rel_err(&nw, g.dw.unwrap().data()) < 1e-5);
        assert!(rel_err(&nb, g.db.unwrap().data()) < 1e-5);
        assert!(rel_err(&nx, g.dx.unwrap().data()) < 1e-5);
    }
}

pub fn conv1d_all_gradients() {
    let mut rng = Stream::new(3);
    for (batch, c_in, c_out, k, m, stride, pad) in [(1, 2, 2, 3, 8, 1, 0), (3, 2, 3, 5, 11, 2, 2), (2, 1, 4, 7, 16, 2, 3)] {
        let kern = Tensor::randn(&[c_out, c_in, k], 1.0, &mut rng);
        let bias = Tensor::randn(&[c_out], 1.0, &mut rng);
        let x = Tensor::randn(&[batch, c_in, m], 1.0, &mut rng);
        let y = conv1d_forward(&kern, &bias, &x, stride, pad).unwrap();
        let r = Tensor::randn(y.shape(), 1.0, &mut rng);
        let g = conv1d_backward(&kern, &x, &r, stride, pad, true).unwrap();
        let f = |k: &Tensor, b: &Tensor, x: &Tensor| dot(&conv1d_forward(k, b, x, stride, pad).unwrap(), &r);
        assert!(rel_err(&numeric(&kern, &all(&kern), |k| f(k, &bias, &x)), g.dk.data()) < 1e-5);
        assert!(rel_err(&numeric(&bias, &all(&bias), |b| f(&kern, b, &x)), g.db.data()) < 1e-5);
        assert!(rel_err(&numeric(&x, &all(&x), |x| f(&kern, &bias, x)), g.dx.unwrap().data()) < 1e-5);
    }
}

pub fn batchnorm_all_gradients() {
    let mut rng = Stream::new(4);
    for shape in [vec![4, 3, 5], vec![6, 2]] {
        let c = shape[1];
        let mut bn = BatchNorm1d::new(c);
        bn.gamma.value = Tensor::randn(&[c], 1.0, &mut rng);
        bn.beta.value = Tensor::randn(&[c], 1.0, &mut rng);
        let x = Tensor::randn(&shape, 2.0, &mut rng);
        let r = Tensor::randn(&shape, 1.0, &mut rng);
        let (_, cache) = bn.clone().forward(&x, Mode::Train).unwrap();
        let mut work = bn.clone();
        let dx = work.backward(&cache.unwrap(), &r).unwrap();
        let eval = |bn: &BatchNorm1d, x: &Tensor| dot(&bn.clone().forward(x, Mode::Train).unwrap().0, &r);
        assert!(rel_err(&numeric(&x, &all(&x), |x| eval(&bn, x)), dx.data()) < 1e-5);
        let ng = numeric(&bn.gamma.value, &all(&bn.gamma.value), |gm| {
            let mut b = bn.clone();
            b.gamma.value = gm.clone();
            eval(&b, &x)
        });
        let nb = numeric(&bn.beta.value, &all(&bn.beta.value), |bt| {
            let mut b = bn.clone();
            b.beta.value = bt.clone();
            eval(&b, &x)
        });
        assert!(rel_err(&ng, work.gamma.grad.data()) < 1e-5);
        assert!(rel_err(&nb, work.beta.grad.data()) < 1e-5);
    }
}

pub fn pooling_and_dropout() {
    let mut rng = Stream::new(5);
    for m in [8, 9] {
        let x = Tensor::randn(&[2, 3, m], 1.0, &mut rng);
        let (y, arg) = maxpool1d_forward(&x).unwrap();
        let r = Tensor::randn(y.shape(), 1.0, &mut rng);
        let dx = maxpool1d_backward(x.shape(), &arg, &r).unwrap();
        let num = numeric(&x, &all(&x), |x| dot(&maxpool1d_forward(x).unwrap().0, &r));
        assert!(rel_err(&num, dx.data()) < 1e-5);

        let y = global_avg_pool1d_forward(&x).unwrap();
        let r = Tensor::randn(y.shape(), 1.0, &mut rng);
        let dx = global_avg_pool1d_backward(x.shape(), &r).unwrap();
        let num = numeric(&x, &all(&x), |x| dot(&global_avg_pool1d_forward(x).unwrap(), &r));
        assert!(rel_err(&num, dx.data()) < 1e-5);

        let (y, mask) = dropout_forward(&x, 0.3, Mode::Train, 77).unwrap();
        let r = Tensor::randn(y.shape(), 1.0, &mut rng);
        let dx = dropout_backward(mask.as_deref(), &r);
        let num = numeric(&x, &all(&x), |x| dot(&dropout_forward(x, 0.3, Mode::Train, 77).unwrap().0, &r));
        assert!(rel_err(&num, dx.data()) < 1e-5);
    }
}

pub fn embedding_table() {
    let mut rng = Stream::new(6);
    let emb = Embedding::new(4, 3, &mut rng);
    let labels = [1, 3, 1];
    let r = Tensor::randn(&[3, 3], 1.0, &mut rng);
    let mut work = emb.clone();
    work.backward(&labels, &r).unwrap();
    let table = emb.table.value.clone();
    let num = numeric(&table, &all(&table), |t| dot(&t.gather_rows(&labels), &r));
    assert!(rel_err(&num, work.table.grad.data()) < 1e-5);
}

pub fn losses() {
    let mut rng = Stream::new(7);
    let p = Tensor::from_fn(&[12], |_| rng.uniform_in(0.02, 0.98));
    let t = Tensor::from_fn(&[12], |i| (i % 2) as f64);
    let (_, g) = bce_loss(&p, &t).unwrap();
    assert!(rel_err(&numeric(&p, &all(&p), |p| bce_loss(p, &t).unwrap().0), g.data()) < 1e-5);

    let z = Tensor::randn(&[12], 2.0, &mut rng);
    let (_, g) = bce_with_logits(&z, &t).unwrap();
    assert!(rel_err(&numeric(&z, &all(&z), |z| bce_with_logits(z, &t).unwrap().0), g.data()) < 1e-5);

    let logits = Tensor::randn(&[5, 8], 1.0, &mut rng);
    let labels = [0, 7, 3, 3, 5];
    let (_, g) = cross_entropy(&logits, &labels).unwrap();
    let num = numeric(&logits, &all(&logits), |l| cross_entropy(l, &labels).unwrap().0);
    assert!(rel_err(&num, g.data()) < 1e-5);
}

pub fn three_layer_composition_input_gradient() {
    let mut rng = Stream::new(8);
    let w: Vec<(Tensor, Tensor)> = [(6, 5), (5, 4), (4, 3)]
        .iter()
        .map(|&(i, o)| (Tensor::randn(&[o, i], 0.7, &mut rng), Tensor::randn(&[o], 0.3, &mut rng)))
        .collect();
    let acts = [Activation::Tanh, Activation::LeakyRelu(0.2), Activation::Sigmoid];
    let x = Tensor::randn(&[3, 6], 1.0, &mut rng);
    let labels = [2, 0, 1];
    let run = |x: &Tensor| {
        let mut h = x.clone();
        let mut tape = Vec::new();
        for ((wt, bt), act) in w.iter().zip(acts) {
            let z = dense_forward(wt, bt, &h).unwrap();
            let a = act.forward(&z);
            tape.push((h, z, a.clone()));
            h = a;
        }
        (h, tape)
    };
    let (out, tape) = run(&x);
    let (_, mut g) = cross_entropy(&out, &labels).unwrap();
    for (((wt, _), act), (inp, z, a)) in w.iter().zip(acts).zip(&tape).rev() {
        g = act.backward(z, a, &g);
        g = dense_backward(wt, inp, &g, false, true).unwrap().dx.unwrap();
    }
    let num = numeric(&x, &all(&x), |x| cross_entropy(&run(x).0, &labels).unwrap().0);
    assert!(rel_err(&num, g.data()) < 1e-4);
}

pub fn cnn_first_layer_kernels_end_to_end() {
    let net = CnnNet::new(11);
    let mut rng = Stream::new(12);
    let x = Tensor::randn(&[2, 800], 1.0, &mut rng);
    let labels = [3, 6];
    let mut work = net.clone();
    let (logits, cache) = work.forward(&x, Mode::Train).unwrap();
    let (_, g) = cross_entropy(&logits, &labels).unwrap();
    let dx = work.backward(&cache, &g).unwrap();
    let loss = |n: &CnnNet, x: &Tensor| {
        let mut n = n.clone();
        cross_entropy(&n.forward(x, Mode::Train).unwrap().0, &labels).unwrap().0
    };
    let k0 = net.stages[0].conv.kernels.value.clone();
    let num = numeric(&k0, &all(&k0), |k| {
        let mut n = net.clone();
        n.stages[0].conv.kernels.value = k.clone();
        loss(&n, &x)
    });
    assert!(rel_err(&num, work.stages[0].conv.kernels.grad.data()) < 1e-4);
    let coords: Vec<usize> = (0..1600).step_by(37).collect();
    let num = numeric(&x, &coords, |x| loss(&net, x));
    assert!(rel_err(&num, &pick(&dx, &coords)) < 1e-4);
}

pub fn fft_matches_direct_dft() {
    let n = 64;
    let mut rng = Stream::new(64);
    let x: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gaussian(), rng.gaussian())).collect();
    let fast = fft(&x).unwrap();
    for (k, got) in fast.iter().enumerate() {
        let mut want = Complex64::new(0.0, 0.0);
        for (t, v) in x.iter().enumerate() {
            let ang = -std::f64::consts::TAU * (k * t % n) as f64 / n as f64;
            want += v * Complex64::new(ang.cos(), ang.sin());
        }
        assert!((got - want).norm() < 1e-9, "bin {k}: {got} vs {want}");
    }
}

pub const CHECKS: &[(&str, fn())] = &[
    ("activations", activations),
    ("dense_all_gradients", dense_all_gradients),
    ("conv1d_all_gradients", conv1d_all_gradients),
    ("batchnorm_all_gradients", batchnorm_all_gradients),
    ("pooling_and_dropout", pooling_and_dropout),
    ("embedding_table", embedding_table),
    ("losses", losses),
    ("three_layer_composition_input_gradient", three_layer_composition_input_gradient),
    ("cnn_first_layer_kernels_end_to_end", cnn_first_layer_kernels_end_to_end),
    ("fft_matches_direct_dft", fft_matches_direct_dft),
];
