//! The autodiff tape: forward ops append nodes, backward sweeps once in
//! reverse.

use crate::{Tensor, TensorError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TensorId(usize);

impl TensorId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentMode {
    Sum,
    Avg,
    Max,
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Add(TensorId, TensorId),
    Sub(TensorId, TensorId),
    Mul(TensorId, TensorId),
    Div(TensorId, TensorId),
    Scale(TensorId, f64),
    Exp(TensorId),
    MatMul(TensorId, TensorId),
    AddRow(TensorId, TensorId),
    Conv1d {
        signal: TensorId,
        filter: TensorId,
        bias: Option<TensorId>,
        stride: usize,
        padding: usize,
    },
    Pool1d {
        input: TensorId,
        n: usize,
        stride: usize,
        max: bool,
        /// max: flat input index of the winner per output element;
        /// avg: in-range window size per output row.
        arg: Vec<usize>,
    },
    Relu(TensorId),
    LeakyRelu(TensorId, f64),
    Softmax(TensorId),
    LogSoftmax(TensorId),
    CrossEntropy {
        logits: TensorId,
        labels: Vec<usize>,
    },
    Mse {
        pred: TensorId,
        target: TensorId,
    },
    SumAll(TensorId),
    GatherRows {
        input: TensorId,
        rows: Vec<usize>,
    },
    ConcatRows(Vec<TensorId>),
    SliceRows {
        input: TensorId,
        start: usize,
    },
    ShiftRows {
        input: TensorId,
        offset: isize,
    },
    RowScale {
        input: TensorId,
        weights: TensorId,
    },
    SegmentReduce {
        input: TensorId,
        segments: Vec<usize>,
        mode: SegmentMode,
        /// Max mode: mask of winning elements.
        winners: Vec<bool>,
    },
    Reshape(TensorId),
}

struct Node {
    value: Tensor,
    op: Op,
    needs_grad: bool,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients with respect to every grad-requiring node of a tape.
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
}

impl Gradients {
    pub fn get(&self, id: TensorId) -> Option<&Tensor> {
        self.grads.get(id.0).and_then(|g| g.as_ref())
    }
}

fn mismatch(op: &'static str, detail: String) -> TensorError {
    TensorError::ShapeMismatch { op, detail }
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Constant input: no gradient is tracked for it.
    pub fn leaf(&mut self, value: Tensor) -> TensorId {
        self.push(value, Op::Leaf, false)
    }

    /// Trainable input: gradients are accumulated for it.
    pub fn param(&mut self, value: Tensor) -> TensorId {
        self.push(value, Op::Leaf, true)
    }

    pub fn value(&self, id: TensorId) -> &Tensor {
        &self.nodes[id.0].value
    }

    fn push(&mut self, value: Tensor, op: Op, needs_grad: bool) -> TensorId {
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        TensorId(self.nodes.len() - 1)
    }

    fn needs(&self, id: TensorId) -> bool {
        self.nodes[id.0].needs_grad
    }

    fn elementwise2(
        &mut self,
        op_name: &'static str,
        a: TensorId,
        b: TensorId,
        f: impl Fn(f64, f64) -> f64,
        op: Op,
    ) -> Result<TensorId, TensorError> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape() != tb.shape() {
            return Err(mismatch(
                op_name,
                format!("{:?} vs {:?}", ta.shape(), tb.shape()),
            ));
        }
        let data = ta
            .data()
            .iter()
            .zip(tb.data())
            .map(|(&x, &y)| f(x, y))
            .collect();
        let value = Tensor::new(ta.shape().to_vec(), data).unwrap();
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(value, op, needs))
    }

    pub fn add(&mut self, a: TensorId, b: TensorId) -> Result<TensorId, TensorError> {
        self.elementwise2("add", a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: TensorId, b: TensorId) -> Result<TensorId, TensorError> {
        self.elementwise2("sub", a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: TensorId, b: TensorId) -> Result<TensorId, TensorError> {
        self.elementwise2("mul", a, b, |x, y| x * y, Op::Mul(a, b))
    }

    pub fn div(&mut self, a: TensorId, b: TensorId) -> Result<TensorId, TensorError> {
        self.elementwise2("div", a, b, |x, y| x / y, Op::Div(a, b))
    }

    pub fn scale(&mut self, a: TensorId, factor: f64) -> TensorId {
        let t = self.value(a);
        let value = Tensor::new(
            t.shape().to_vec(),
            t.data().iter().map(|&x| x * factor).collect(),
        )
        .unwrap();
        let needs = self.needs(a);
        self.push(value, Op::Scale(a, factor), needs)
    }

    pub fn exp(&mut self, a: TensorId) -> TensorId {
        let t = self.value(a);
        let value = Tensor::new(
            t.shape().to_vec(),
            t.data().iter().map(|&x| x.exp()).collect(),
        )
        .unwrap();
        let needs = self.needs(a);
        self.push(value, Op::Exp(a), needs)
    }

    pub fn relu(&mut self, a: TensorId) -> TensorId {
        let t = self.value(a);
        let value = Tensor::new(
            t.shape().to_vec(),
            t.data().iter().map(|&x| x.max(0.0)).collect(),
        )
        .unwrap();
        let needs = self.needs(a);
        self.push(value, Op::Relu(a), needs)
    }

    pub fn leaky_relu(&mut self, a: TensorId, slope: f64) -> TensorId {
        let t = self.value(a);
        let value = Tensor::new(
            t.shape().to_vec(),
            t.data()
                .iter()
                .map(|&x| if x >= 0.0 { x } else { slope * x })
                .collect(),
        )
        .unwrap();
        let needs = self.needs(a);
        self.push(value, Op::LeakyRelu(a, slope), needs)
    }

    /// `[m, k] x [k, n] -> [m, n]`.
    pub fn matmul(&mut self, a: TensorId, b: TensorId) -> Result<TensorId, TensorError> {
        let (ta, tb) = (self.value(a), self.value(b));
        if ta.shape().len() != 2 || tb.shape().len() != 2 || ta.shape()[1] != tb.shape()[0] {
            return Err(mismatch(
                "matmul",
                format!("{:?} x {:?}", ta.shape(), tb.shape()),
            ));
        }
        let (m, k, n) = (ta.shape()[0], ta.shape()[1], tb.shape()[1]);
        let mut data = vec![0.0; m * n];
        let (da, db) = (ta.data(), tb.data());
        for i in 0..m {
            for l in 0..k {
                let x = da[i * k + l];
                if x == 0.0 {
                    continue;
                }
                let row = &db[l * n..(l + 1) * n];
                let out = &mut data[i * n..(i + 1) * n];
                for j in 0..n {
                    out[j] += x * row[j];
                }
            }
        }
        let value = Tensor::new(vec![m, n], data).unwrap();
        let needs = self.needs(a) || self.needs(b);
        Ok(self.push(value, Op::MatMul(a, b), needs))
    }

    /// Add a `[n]` bias to every row of `[m, n]`.
    pub fn add_row(&mut self, a: TensorId, bias: TensorId) -> Result<TensorId, TensorError> {
        let (ta, tb) = (self.value(a), self.value(bias));
        if ta.shape().len() != 2 || tb.shape() != [ta.shape()[1]] {
            return Err(mismatch(
                "add_row",
                format!("{:?} + {:?}", ta.shape(), tb.shape()),
            ));
        }
        let n = ta.shape()[1];
        let data = ta
            .data()
            .iter()
            .enumerate()
            .map(|(i, &x)| x + tb.data()[i % n])
            .collect();
        let value = Tensor::new(ta.shape().to_vec(), data).unwrap();
        let needs = self.needs(a) || self.needs(bias);
        Ok(self.push(value, Op::AddRow(a, bias), needs))
    }

    /// `x @ w + b` with `x: [m, in]`, `w: [in, out]`, `b: [out]`.
    pub fn dense(
        &mut self,
        x: TensorId,
        w: TensorId,
        b: TensorId,
    ) -> Result<TensorId, TensorError> {
        let y = self.matmul(x, w)?;
        self.add_row(y, b)
    }

    /// 1D convolution over `signal: [len, c_in]` with
    /// `filter: [taps, c_in, c_out]` and optional `bias: [c_out]`,
    /// zero-padded by `padding` on both sides. Output position `t` reads
    /// input positions `t * stride + j - padding` for tap `j`; the output
    /// length is `(len + 2 * padding - taps) / stride + 1`.
    pub fn conv1d(
        &mut self,
        signal: TensorId,
        filter: TensorId,
        bias: Option<TensorId>,
        stride: usize,
        padding: usize,
    ) -> Result<TensorId, TensorError> {
        let (ts, tf) = (self.value(signal), self.value(filter));
        if ts.shape().len() != 2 || tf.shape().len() != 3 || ts.shape()[1] != tf.shape()[1] {
            return Err(mismatch(
                "conv1d",
                format!("signal {:?}, filter {:?}", ts.shape(), tf.shape()),
            ));
        }
        if stride == 0 {
            return Err(mismatch("conv1d", "stride must be positive".into()));
        }
        let (len, c_in) = (ts.shape()[0], ts.shape()[1]);
        let (taps, c_out) = (tf.shape()[0], tf.shape()[2]);
        if let Some(b) = bias {
            if self.value(b).shape() != [c_out] {
                return Err(mismatch(
                    "conv1d",
                    format!("bias {:?}, expected [{}]", self.value(b).shape(), c_out),
                ));
            }
        }
        if len + 2 * padding < taps {
            return Err(TensorError::EmptyOutput {
                op: "conv1d",
                detail: format!("len {} + 2*{} < taps {}", len, padding, taps),
            });
        }
        let out_len = (len + 2 * padding - taps) / stride + 1;
        let mut data = vec![0.0; out_len * c_out];
        if let Some(b) = bias {
            let bd = self.value(b).data().to_vec();
            for t in 0..out_len {
                data[t * c_out..(t + 1) * c_out].copy_from_slice(&bd);
            }
        }
        let sd = self.value(signal).data();
        let fd = self.value(filter).data();
        for t in 0..out_len {
            for j in 0..taps {
                let pos = (t * stride + j) as isize - padding as isize;
                if pos < 0 || pos >= len as isize {
                    continue;
                }
                let srow = &sd[pos as usize * c_in..(pos as usize + 1) * c_in];
                let out = &mut data[t * c_out..(t + 1) * c_out];
                for (ci, &s) in srow.iter().enumerate() {
                    if s == 0.0 {
                        continue;
                    }
                    let frow = &fd[(j * c_in + ci) * c_out..(j * c_in + ci + 1) * c_out];
                    for co in 0..c_out {
                        out[co] += s * frow[co];
                    }
                }
            }
        }
        let value = Tensor::new(vec![out_len, c_out], data).unwrap();
        let needs =
            self.needs(signal) || self.needs(filter) || bias.map_or(false, |b| self.needs(b));
        Ok(self.push(
            value,
            Op::Conv1d {
                signal,
                filter,
                bias,
                stride,
                padding,
            },
            needs,
        ))
    }

    /// 1D pooling over `input: [len, c]` with window `n` and the given
    /// stride. Window `t` is centered at input position `t * stride`
    /// (`t = 0 .. ceil(len / stride) - 1`) and spans `n` positions; parts
    /// outside the signal are ignored, so max pooling never sees padding
    /// and average pooling divides by the in-range window size.
    pub fn pool1d(
        &mut self,
        input: TensorId,
        n: usize,
        stride: usize,
        max: bool,
    ) -> Result<TensorId, TensorError> {
        let t = self.value(input);
        if t.shape().len() != 2 {
            return Err(mismatch("pool1d", format!("input {:?}", t.shape())));
        }
        if n == 0 || stride == 0 {
            return Err(mismatch("pool1d", "window and stride must be positive".into()));
        }
        let (len, c) = (t.shape()[0], t.shape()[1]);
        if len == 0 {
            return Err(TensorError::EmptyOutput {
                op: "pool1d",
                detail: "empty input".into(),
            });
        }
        let out_len = len.div_ceil(stride);
        let half = n / 2;
        let mut data = vec![0.0; out_len * c];
        let mut arg = Vec::new();
        let din = t.data();
        if max {
            arg.resize(out_len * c, 0);
            for ti in 0..out_len {
                let center = ti * stride;
                let lo = center.saturating_sub(half);
                let hi = (center + half).min(len - 1);
                for ch in 0..c {
                    let mut best = f64::NEG_INFINITY;
                    let mut best_pos = lo;
                    for p in lo..=hi {
                        let v = din[p * c + ch];
                        if v > best {
                            best = v;
                            best_pos = p;
                        }
                    }
                    data[ti * c + ch] = best;
                    arg[ti * c + ch] = best_pos * c + ch;
                }
            }
        } else {
            arg.resize(out_len, 0);
            for ti in 0..out_len {
                let center = ti * stride;
                let lo = center.saturating_sub(half);
                let hi = (center + half).min(len - 1);
                let count = hi - lo + 1;
                arg[ti] = count;
                for ch in 0..c {
                    let sum: f64 = (lo..=hi).map(|p| din[p * c + ch]).sum();
                    data[ti * c + ch] = sum / count as f64;
                }
            }
        }
        let value = Tensor::new(vec![out_len, c], data).unwrap();
        let needs = self.needs(input);
        Ok(self.push(
            value,
            Op::Pool1d {
                input,
                n,
                stride,
                max,
                arg,
            },
            needs,
        ))
    }

    fn rowwise_softmax(t: &Tensor, log: bool) -> Tensor {
        let (rows, cols) = (t.rows(), t.cols());
        let mut data = vec![0.0; rows * cols];
        for r in 0..rows {
            let row = &t.data()[r * cols..(r + 1) * cols];
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = row.iter().map(|&x| (x - m).exp()).sum();
            let out = &mut data[r * cols..(r + 1) * cols];
            if log {
                let lse = m + sum.ln();
                for (o, &x) in out.iter_mut().zip(row) {
                    *o = x - lse;
                }
            } else {
                for (o, &x) in out.iter_mut().zip(row) {
                    *o = (x - m).exp() / sum;
                }
            }
        }
        Tensor::new(t.shape().to_vec(), data).unwrap()
    }

    /// Row-wise softmax; rank-1 tensors are one row.
    pub fn softmax(&mut self, a: TensorId) -> TensorId {
        let value = Self::rowwise_softmax(self.value(a), false);
        let needs = self.needs(a);
        self.push(value, Op::Softmax(a), needs)
    }

    pub fn log_softmax(&mut self, a: TensorId) -> TensorId {
        let value = Self::rowwise_softmax(self.value(a), true);
        let needs = self.needs(a);
        self.push(value, Op::LogSoftmax(a), needs)
    }

    /// Mean negative log-likelihood of `labels` under row-wise softmax of
    /// `logits`.
    pub fn cross_entropy_loss(
        &mut self,
        logits: TensorId,
        labels: &[usize],
    ) -> Result<TensorId, TensorError> {
        let t = self.value(logits);
        let (rows, cols) = (t.rows(), t.cols());
        if labels.len() != rows {
            return Err(mismatch(
                "cross_entropy",
                format!("{} rows vs {} labels", rows, labels.len()),
            ));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= cols) {
            return Err(mismatch(
                "cross_entropy",
                format!("label {} out of range for {} classes", bad, cols),
            ));
        }
        let log_probs = Self::rowwise_softmax(t, true);
        let loss = -labels
            .iter()
            .enumerate()
            .map(|(r, &l)| log_probs.data()[r * cols + l])
            .sum::<f64>()
            / rows as f64;
        let needs = self.needs(logits);
        Ok(self.push(
            Tensor::scalar(loss),
            Op::CrossEntropy {
                logits,
                labels: labels.to_vec(),
            },
            needs,
        ))
    }

    /// Mean squared error between two tensors of identical shape.
    pub fn mse_loss(&mut self, pred: TensorId, target: TensorId) -> Result<TensorId, TensorError> {
        let (tp, tt) = (self.value(pred), self.value(target));
        if tp.shape() != tt.shape() {
            return Err(mismatch(
                "mse",
                format!("{:?} vs {:?}", tp.shape(), tt.shape()),
            ));
        }
        let n = tp.len() as f64;
        let loss = tp
            .data()
            .iter()
            .zip(tt.data())
            .map(|(&p, &t)| (p - t) * (p - t))
            .sum::<f64>()
            / n;
        let needs = self.needs(pred) || self.needs(target);
        Ok(self.push(Tensor::scalar(loss), Op::Mse { pred, target }, needs))
    }

    pub fn sum_all(&mut self, a: TensorId) -> TensorId {
        let s = self.value(a).data().iter().sum();
        let needs = self.needs(a);
        self.push(Tensor::scalar(s), Op::SumAll(a), needs)
    }

    /// Select rows of a `[m, n]` tensor; indices may repeat.
    pub fn gather_rows(&mut self, input: TensorId, rows: &[usize]) -> Result<TensorId, TensorError> {
        let t = self.value(input);
        if t.shape().len() != 2 {
            return Err(mismatch("gather_rows", format!("input {:?}", t.shape())));
        }
        let (m, n) = (t.shape()[0], t.shape()[1]);
        if let Some(&bad) = rows.iter().find(|&&r| r >= m) {
            return Err(mismatch(
                "gather_rows",
                format!("row {} out of range for {} rows", bad, m),
            ));
        }
        let mut data = Vec::with_capacity(rows.len() * n);
        for &r in rows {
            data.extend_from_slice(&t.data()[r * n..(r + 1) * n]);
        }
        let value = Tensor::new(vec![rows.len(), n], data).unwrap();
        let needs = self.needs(input);
        Ok(self.push(
            value,
            Op::GatherRows {
                input,
                rows: rows.to_vec(),
            },
            needs,
        ))
    }

    /// Stack `[m_i, n]` tensors vertically.
    pub fn concat_rows(&mut self, parts: &[TensorId]) -> Result<TensorId, TensorError> {
        if parts.is_empty() {
            return Err(mismatch("concat_rows", "no inputs".into()));
        }
        let n = self.value(parts[0]).cols();
        let mut data = Vec::new();
        let mut rows = 0;
        for &p in parts {
            let t = self.value(p);
            if t.shape().len() != 2 || t.cols() != n {
                return Err(mismatch(
                    "concat_rows",
                    format!("expected [_, {}], got {:?}", n, t.shape()),
                ));
            }
            rows += t.rows();
            data.extend_from_slice(t.data());
        }
        let value = Tensor::new(vec![rows, n], data).unwrap();
        let needs = parts.iter().any(|&p| self.needs(p));
        Ok(self.push(value, Op::ConcatRows(parts.to_vec()), needs))
    }

    pub fn slice_rows(
        &mut self,
        input: TensorId,
        start: usize,
        len: usize,
    ) -> Result<TensorId, TensorError> {
        let t = self.value(input);
        if t.shape().len() != 2 || start + len > t.shape()[0] {
            return Err(mismatch(
                "slice_rows",
                format!("rows {}..{} of {:?}", start, start + len, t.shape()),
            ));
        }
        let n = t.shape()[1];
        let data = t.data()[start * n..(start + len) * n].to_vec();
        let value = Tensor::new(vec![len, n], data).unwrap();
        let needs = self.needs(input);
        Ok(self.push(value, Op::SliceRows { input, start }, needs))
    }

    /// Row `r` of the output is row `r + offset` of the input, zero where
    /// that falls outside.
    pub fn shift_rows(&mut self, input: TensorId, offset: isize) -> Result<TensorId, TensorError> {
        let t = self.value(input);
        if t.shape().len() != 2 {
            return Err(mismatch("shift_rows", format!("input {:?}", t.shape())));
        }
        let (m, n) = (t.shape()[0], t.shape()[1]);
        let mut data = vec![0.0; m * n];
        for r in 0..m {
            let src = r as isize + offset;
            if src >= 0 && (src as usize) < m {
                let s = src as usize;
                data[r * n..(r + 1) * n].copy_from_slice(&t.data()[s * n..(s + 1) * n]);
            }
        }
        let value = Tensor::new(vec![m, n], data).unwrap();
        let needs = self.needs(input);
        Ok(self.push(value, Op::ShiftRows { input, offset }, needs))
    }

    /// Scale row `r` of `[m, n]` by `weights[r]` (`weights: [m]` or `[m, 1]`).
    pub fn row_scale(&mut self, input: TensorId, weights: TensorId) -> Result<TensorId, TensorError> {
        let (t, w) = (self.value(input), self.value(weights));
        let m = if t.shape().len() == 2 { t.shape()[0] } else { 0 };
        if t.shape().len() != 2 || w.len() != m {
            return Err(mismatch(
                "row_scale",
                format!("input {:?}, weights {:?}", t.shape(), w.shape()),
            ));
        }
        let n = t.shape()[1];
        let mut data = vec![0.0; m * n];
        for r in 0..m {
            let s = w.data()[r];
            for c in 0..n {
                data[r * n + c] = t.data()[r * n + c] * s;
            }
        }
        let value = Tensor::new(vec![m, n], data).unwrap();
        let needs = self.needs(input) || self.needs(weights);
        Ok(self.push(value, Op::RowScale { input, weights }, needs))
    }

    /// Replace every row by the reduction of its segment (rows sharing
    /// `segments[r]`), broadcast back to all member rows.
    pub fn segment_reduce(
        &mut self,
        input: TensorId,
        segments: &[usize],
        mode: SegmentMode,
    ) -> Result<TensorId, TensorError> {
        let t = self.value(input);
        if t.shape().len() != 2 || t.shape()[0] != segments.len() {
            return Err(mismatch(
                "segment_reduce",
                format!("input {:?}, {} segment ids", t.shape(), segments.len()),
            ));
        }
        let (m, n) = (t.shape()[0], t.shape()[1]);
        let groups = group_rows(segments);
        let din = t.data();
        let mut data = vec![0.0; m * n];
        let mut winners = Vec::new();
        match mode {
            SegmentMode::Sum | SegmentMode::Avg => {
                for rows in groups.values() {
                    let mut acc = vec![0.0; n];
                    for &r in rows {
                        for c in 0..n {
                            acc[c] += din[r * n + c];
                        }
                    }
                    if mode == SegmentMode::Avg {
                        let inv = 1.0 / rows.len() as f64;
                        for a in &mut acc {
                            *a *= inv;
                        }
                    }
                    for &r in rows {
                        data[r * n..(r + 1) * n].copy_from_slice(&acc);
                    }
                }
            }
            SegmentMode::Max => {
                winners.resize(m * n, false);
                for rows in groups.values() {
                    for c in 0..n {
                        let mut best = f64::NEG_INFINITY;
                        let mut best_row = rows[0];
                        for &r in rows {
                            let v = din[r * n + c];
                            if v > best {
                                best = v;
                                best_row = r;
                            }
                        }
                        winners[best_row * n + c] = true;
                        for &r in rows {
                            data[r * n + c] = best;
                        }
                    }
                }
            }
        }
        let value = Tensor::new(vec![m, n], data).unwrap();
        let needs = self.needs(input);
        Ok(self.push(
            value,
            Op::SegmentReduce {
                input,
                segments: segments.to_vec(),
                mode,
                winners,
            },
            needs,
        ))
    }

    pub fn reshape(&mut self, input: TensorId, shape: Vec<usize>) -> Result<TensorId, TensorError> {
        let value = self.value(input).clone().reshape(shape)?;
        let needs = self.needs(input);
        Ok(self.push(value, Op::Reshape(input), needs))
    }

    /// Reverse sweep from a scalar root. Returns a gradient per node;
    /// nodes not requiring gradients have none.
    pub fn backward(&self, root: TensorId) -> Result<Gradients, TensorError> {
        let root_t = self.value(root);
        if !root_t.is_scalar() {
            return Err(TensorError::NonScalarRoot(root_t.shape().to_vec()));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; self.nodes.len()];
        if !self.nodes[root.0].needs_grad {
            return Ok(Gradients { grads });
        }
        grads[root.0] = Some(Tensor::scalar(1.0));

        for i in (0..=root.0).rev() {
            let go = match &grads[i] {
                Some(g) => g.clone(),
                None => continue,
            };
            if !self.nodes[i].needs_grad {
                continue;
            }
            self.accumulate(i, &go, &mut grads);
        }
        Ok(Gradients { grads })
    }

    fn bump(&self, grads: &mut [Option<Tensor>], id: TensorId, delta: Tensor) {
        if !self.needs(id) {
            return;
        }
        match &mut grads[id.0] {
            Some(g) => {
                for (a, b) in g.data_mut().iter_mut().zip(delta.data()) {
                    *a += b;
                }
            }
            slot => *slot = Some(delta),
        }
    }

    fn accumulate(&self, i: usize, go: &Tensor, grads: &mut Vec<Option<Tensor>>) {
        let shaped = |shape: &[usize], data: Vec<f64>| Tensor::new(shape.to_vec(), data).unwrap();
        match &self.nodes[i].op {
            Op::Leaf => {}
            Op::Add(a, b) => {
                self.bump(grads, *a, go.clone());
                self.bump(grads, *b, go.clone());
            }
            Op::Sub(a, b) => {
                self.bump(grads, *a, go.clone());
                let neg = shaped(go.shape(), go.data().iter().map(|&x| -x).collect());
                self.bump(grads, *b, neg);
            }
            Op::Mul(a, b) => {
                let (ta, tb) = (self.value(*a), self.value(*b));
                let ga = shaped(
                    go.shape(),
                    go.data().iter().zip(tb.data()).map(|(&g, &y)| g * y).collect(),
                );
                let gb = shaped(
                    go.shape(),
                    go.data().iter().zip(ta.data()).map(|(&g, &x)| g * x).collect(),
                );
                self.bump(grads, *a, ga);
                self.bump(grads, *b, gb);
            }
            Op::Div(a, b) => {
                let (ta, tb) = (self.value(*a), self.value(*b));
                let ga = shaped(
                    go.shape(),
                    go.data().iter().zip(tb.data()).map(|(&g, &y)| g / y).collect(),
                );
                let gb = shaped(
                    go.shape(),
                    go.data()
                        .iter()
                        .zip(ta.data().iter().zip(tb.data()))
                        .map(|(&g, (&x, &y))| -g * x / (y * y))
                        .collect(),
                );
                self.bump(grads, *a, ga);
                self.bump(grads, *b, gb);
            }
            Op::Scale(a, f) => {
                let ga = shaped(go.shape(), go.data().iter().map(|&g| g * f).collect());
                self.bump(grads, *a, ga);
            }
            Op::Exp(a) => {
                let out = &self.nodes[i].value;
                let ga = shaped(
                    go.shape(),
                    go.data().iter().zip(out.data()).map(|(&g, &y)| g * y).collect(),
                );
                self.bump(grads, *a, ga);
            }
            Op::MatMul(a, b) => {
                let (ta, tb) = (self.value(*a), self.value(*b));
                let (m, k) = (ta.shape()[0], ta.shape()[1]);
                let n = tb.shape()[1];
                // dA = dC . B^T
                let mut ga = vec![0.0; m * k];
                for r in 0..m {
                    for l in 0..k {
                        let mut s = 0.0;
                        for c in 0..n {
                            s += go.data()[r * n + c] * tb.data()[l * n + c];
                        }
                        ga[r * k + l] = s;
                    }
                }
                // dB = A^T . dC
                let mut gb = vec![0.0; k * n];
                for r in 0..m {
                    for l in 0..k {
                        let x = ta.data()[r * k + l];
                        if x == 0.0 {
                            continue;
                        }
                        for c in 0..n {
                            gb[l * n + c] += x * go.data()[r * n + c];
                        }
                    }
                }
                self.bump(grads, *a, shaped(&[m, k], ga));
                self.bump(grads, *b, shaped(&[k, n], gb));
            }
            Op::AddRow(a, bias) => {
                self.bump(grads, *a, go.clone());
                let n = self.value(*bias).len();
                let mut gb = vec![0.0; n];
                for (idx, &g) in go.data().iter().enumerate() {
                    gb[idx % n] += g;
                }
                self.bump(grads, *bias, shaped(&[n], gb));
            }
            Op::Conv1d {
                signal,
                filter,
                bias,
                stride,
                padding,
            } => {
                let (ts, tf) = (self.value(*signal), self.value(*filter));
                let (len, c_in) = (ts.shape()[0], ts.shape()[1]);
                let (taps, c_out) = (tf.shape()[0], tf.shape()[2]);
                let out_len = self.nodes[i].value.shape()[0];
                let mut gs = vec![0.0; len * c_in];
                let mut gf = vec![0.0; taps * c_in * c_out];
                for t in 0..out_len {
                    let grow = &go.data()[t * c_out..(t + 1) * c_out];
                    for j in 0..taps {
                        let pos = (t * stride + j) as isize - *padding as isize;
                        if pos < 0 || pos >= len as isize {
                            continue;
                        }
                        let p = pos as usize;
                        for ci in 0..c_in {
                            let s = ts.data()[p * c_in + ci];
                            let fbase = (j * c_in + ci) * c_out;
                            let mut acc = 0.0;
                            for co in 0..c_out {
                                let g = grow[co];
                                acc += g * tf.data()[fbase + co];
                                gf[fbase + co] += g * s;
                            }
                            gs[p * c_in + ci] += acc;
                        }
                    }
                }
                self.bump(grads, *signal, shaped(&[len, c_in], gs));
                self.bump(grads, *filter, shaped(&[taps, c_in, c_out], gf));
                if let Some(b) = bias {
                    let mut gb = vec![0.0; c_out];
                    for t in 0..out_len {
                        for co in 0..c_out {
                            gb[co] += go.data()[t * c_out + co];
                        }
                    }
                    self.bump(grads, *b, shaped(&[c_out], gb));
                }
            }
            Op::Pool1d {
                input,
                n,
                stride,
                max,
                arg,
            } => {
                let t = self.value(*input);
                let (len, c) = (t.shape()[0], t.shape()[1]);
                let out_len = self.nodes[i].value.shape()[0];
                let mut gi = vec![0.0; len * c];
                if *max {
                    for (idx, &src) in arg.iter().enumerate() {
                        gi[src] += go.data()[idx];
                    }
                } else {
                    let half = n / 2;
                    for ti in 0..out_len {
                        let center = ti * stride;
                        let lo = center.saturating_sub(half);
                        let hi = (center + half).min(len - 1);
                        let inv = 1.0 / arg[ti] as f64;
                        for p in lo..=hi {
                            for ch in 0..c {
                                gi[p * c + ch] += go.data()[ti * c + ch] * inv;
                            }
                        }
                    }
                }
                self.bump(grads, *input, shaped(&[len, c], gi));
            }
            Op::Relu(a) => {
                let ta = self.value(*a);
                let ga = shaped(
                    go.shape(),
                    go.data()
                        .iter()
                        .zip(ta.data())
                        .map(|(&g, &x)| if x > 0.0 { g } else { 0.0 })
                        .collect(),
                );
                self.bump(grads, *a, ga);
            }
            Op::LeakyRelu(a, slope) => {
                let ta = self.value(*a);
                let ga = shaped(
                    go.shape(),
                    go.data()
                        .iter()
                        .zip(ta.data())
                        .map(|(&g, &x)| if x >= 0.0 { g } else { g * slope })
                        .collect(),
                );
                self.bump(grads, *a, ga);
            }
            Op::Softmax(a) => {
                let y = &self.nodes[i].value;
                let (rows, cols) = (y.rows(), y.cols());
                let mut ga = vec![0.0; rows * cols];
                for r in 0..rows {
                    let yr = &y.data()[r * cols..(r + 1) * cols];
                    let gr = &go.data()[r * cols..(r + 1) * cols];
                    let dot: f64 = yr.iter().zip(gr).map(|(&v, &g)| v * g).sum();
                    for c in 0..cols {
                        ga[r * cols + c] = yr[c] * (gr[c] - dot);
                    }
                }
                self.bump(grads, *a, shaped(self.value(*a).shape(), ga));
            }
            Op::LogSoftmax(a) => {
                let y = &self.nodes[i].value;
                let (rows, cols) = (y.rows(), y.cols());
                let mut ga = vec![0.0; rows * cols];
                for r in 0..rows {
                    let yr = &y.data()[r * cols..(r + 1) * cols];
                    let gr = &go.data()[r * cols..(r + 1) * cols];
                    let gsum: f64 = gr.iter().sum();
                    for c in 0..cols {
                        ga[r * cols + c] = gr[c] - yr[c].exp() * gsum;
                    }
                }
                self.bump(grads, *a, shaped(self.value(*a).shape(), ga));
            }
            Op::CrossEntropy { logits, labels } => {
                let t = self.value(*logits);
                let (rows, cols) = (t.rows(), t.cols());
                let probs = Self::rowwise_softmax(t, false);
                let scale = go.scalar_value() / rows as f64;
                let mut ga = probs.data().to_vec();
                for (r, &l) in labels.iter().enumerate() {
                    ga[r * cols + l] -= 1.0;
                }
                for g in &mut ga {
                    *g *= scale;
                }
                self.bump(grads, *logits, shaped(t.shape(), ga));
            }
            Op::Mse { pred, target } => {
                let (tp, tt) = (self.value(*pred), self.value(*target));
                let scale = 2.0 * go.scalar_value() / tp.len() as f64;
                let gp: Vec<f64> = tp
                    .data()
                    .iter()
                    .zip(tt.data())
                    .map(|(&p, &t)| scale * (p - t))
                    .collect();
                let gt: Vec<f64> = gp.iter().map(|&x| -x).collect();
                self.bump(grads, *pred, shaped(tp.shape(), gp));
                self.bump(grads, *target, shaped(tt.shape(), gt));
            }
            Op::SumAll(a) => {
                let ta = self.value(*a);
                let g = go.scalar_value();
                self.bump(grads, *a, Tensor::full(ta.shape().to_vec(), g));
            }
            Op::GatherRows { input, rows } => {
                let t = self.value(*input);
                let (m, n) = (t.shape()[0], t.shape()[1]);
                let mut gi = vec![0.0; m * n];
                for (out_r, &src) in rows.iter().enumerate() {
                    for c in 0..n {
                        gi[src * n + c] += go.data()[out_r * n + c];
                    }
                }
                self.bump(grads, *input, shaped(&[m, n], gi));
            }
            Op::ConcatRows(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let t = self.value(p);
                    let (rows, n) = (t.rows(), t.cols());
                    let slice = go.data()[offset * n..(offset + rows) * n].to_vec();
                    offset += rows;
                    self.bump(grads, p, shaped(t.shape(), slice));
                }
            }
            Op::SliceRows { input, start } => {
                let t = self.value(*input);
                let (m, n) = (t.shape()[0], t.shape()[1]);
                let out_rows = self.nodes[i].value.shape()[0];
                let mut gi = vec![0.0; m * n];
                gi[start * n..(start + out_rows) * n].copy_from_slice(go.data());
                self.bump(grads, *input, shaped(&[m, n], gi));
            }
            Op::ShiftRows { input, offset } => {
                let t = self.value(*input);
                let (m, n) = (t.shape()[0], t.shape()[1]);
                let mut gi = vec![0.0; m * n];
                for r in 0..m {
                    let src = r as isize + offset;
                    if src >= 0 && (src as usize) < m {
                        let s = src as usize;
                        for c in 0..n {
                            gi[s * n + c] += go.data()[r * n + c];
                        }
                    }
                }
                self.bump(grads, *input, shaped(&[m, n], gi));
            }
            Op::RowScale { input, weights } => {
                let (t, w) = (self.value(*input), self.value(*weights));
                let (m, n) = (t.shape()[0], t.shape()[1]);
                let mut gi = vec![0.0; m * n];
                let mut gw = vec![0.0; m];
                for r in 0..m {
                    let s = w.data()[r];
                    for c in 0..n {
                        let g = go.data()[r * n + c];
                        gi[r * n + c] = g * s;
                        gw[r] += g * t.data()[r * n + c];
                    }
                }
                self.bump(grads, *input, shaped(&[m, n], gi));
                self.bump(grads, *weights, shaped(w.shape(), gw));
            }
            Op::SegmentReduce {
                input,
                segments,
                mode,
                winners,
            } => {
                let t = self.value(*input);
                let (m, n) = (t.shape()[0], t.shape()[1]);
                let groups = group_rows(segments);
                let mut gi = vec![0.0; m * n];
                for rows in groups.values() {
                    for c in 0..n {
                        let gsum: f64 = rows.iter().map(|&r| go.data()[r * n + c]).sum();
                        match mode {
                            SegmentMode::Sum => {
                                for &r in rows {
                                    gi[r * n + c] = gsum;
                                }
                            }
                            SegmentMode::Avg => {
                                let share = gsum / rows.len() as f64;
                                for &r in rows {
                                    gi[r * n + c] = share;
                                }
                            }
                            SegmentMode::Max => {
                                for &r in rows {
                                    if winners[r * n + c] {
                                        gi[r * n + c] = gsum;
                                    }
                                }
                            }
                        }
                    }
                }
                self.bump(grads, *input, shaped(&[m, n], gi));
            }
            Op::Reshape(input) => {
                let t = self.value(*input);
                let gi = Tensor::new(t.shape().to_vec(), go.data().to_vec()).unwrap();
                self.bump(grads, *input, gi);
            }
        }
    }

}

fn group_rows(segments: &[usize]) -> std::collections::BTreeMap<usize, Vec<usize>> {
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (r, &s) in segments.iter().enumerate() {
        groups.entry(s).or_default().push(r);
    }
    groups
}
