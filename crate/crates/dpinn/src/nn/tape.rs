//! Reverse-mode automatic differentiation over a tape of dense-matrix ops.
//!
//! A fresh tape is built per training step (eager style): forward values are
//! computed as nodes are appended, and one reverse sweep accumulates exact
//! gradients for every leaf. The op set is small but closed over everything
//! the loss terms need, including manually unrolled input-gradient and
//! Laplacian propagations, so second-order terms (gradients of losses that
//! themselves contain network derivatives) come out of the same sweep.

use nalgebra::DMatrix;

/// Node handle on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    /// a * b
    MatMul(Var, Var),
    /// a^T * b
    TrMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    /// matrix + column broadcast over columns
    AddCol(Var, Var),
    Hadamard(Var, Var),
    Scale(Var, f64),
    Shift(Var),
    Tanh(Var),
    /// tanh'(z) = 1 - tanh(z)^2, as a value
    TanhD(Var),
    /// tanh''(z) = -2 tanh(z) (1 - tanh(z)^2), as a value
    TanhD2(Var),
    Sqrt(Var),
    Reshape(Var),
    /// each column repeated `g` times consecutively
    RepeatCols(Var, usize),
    /// inverse of RepeatCols: sum each consecutive group of `g` columns
    SumColGroups(Var, usize),
    /// sum over rows: (r x c) -> (1 x c)
    ColSum(Var),
    /// sum of all entries -> (1 x 1)
    SumAll(Var),
}

struct Node {
    op: Op,
    value: DMatrix<f64>,
    needs_grad: bool,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Per-node gradients produced by [`Tape::backward`].
pub struct Gradients {
    grads: Vec<Option<DMatrix<f64>>>,
}

impl Gradients {
    pub fn get(&self, v: Var) -> Option<&DMatrix<f64>> {
        self.grads[v.0].as_ref()
    }

    pub fn take(&mut self, v: Var) -> Option<DMatrix<f64>> {
        self.grads[v.0].take()
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &DMatrix<f64> {
        &self.nodes[v.0].value
    }

    /// Value of a 1x1 node.
    pub fn scalar(&self, v: Var) -> f64 {
        let m = self.value(v);
        debug_assert_eq!((m.nrows(), m.ncols()), (1, 1));
        m[(0, 0)]
    }

    fn push(&mut self, op: Op, value: DMatrix<f64>, needs_grad: bool) -> Var {
        self.nodes.push(Node {
            op,
            value,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn ng(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    /// Differentiable input (parameters).
    pub fn leaf(&mut self, value: DMatrix<f64>) -> Var {
        self.push(Op::Leaf, value, true)
    }

    /// Non-differentiable input (data, precomputed operators).
    pub fn constant(&mut self, value: DMatrix<f64>) -> Var {
        self.push(Op::Leaf, value, false)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) * self.value(b);
        self.push(Op::MatMul(a, b), v, self.ng(a) | self.ng(b))
    }

    pub fn tr_mul(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).tr_mul(self.value(b));
        self.push(Op::TrMul(a, b), v, self.ng(a) | self.ng(b))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) + self.value(b);
        self.push(Op::Add(a, b), v, self.ng(a) | self.ng(b))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a) - self.value(b);
        self.push(Op::Sub(a, b), v, self.ng(a) | self.ng(b))
    }

    /// `m + col * ones_row`, broadcasting a column over all columns of `m`.
    pub fn add_col(&mut self, m: Var, col: Var) -> Var {
        debug_assert_eq!(self.value(col).ncols(), 1);
        let mut v = self.value(m).clone();
        let c = self.value(col);
        for mut column in v.column_iter_mut() {
            column += c.column(0);
        }
        self.push(Op::AddCol(m, col), v, self.ng(m) | self.ng(col))
    }

    pub fn hadamard(&mut self, a: Var, b: Var) -> Var {
        let v = self.value(a).component_mul(self.value(b));
        self.push(Op::Hadamard(a, b), v, self.ng(a) | self.ng(b))
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let v = self.value(a) * c;
        self.push(Op::Scale(a, c), v, self.ng(a))
    }

    pub fn shift(&mut self, a: Var, c: f64) -> Var {
        let v = self.value(a).add_scalar(c);
        self.push(Op::Shift(a), v, self.ng(a))
    }

    pub fn tanh(&mut self, z: Var) -> Var {
        let v = self.value(z).map(f64::tanh);
        self.push(Op::Tanh(z), v, self.ng(z))
    }

    pub fn tanh_d(&mut self, z: Var) -> Var {
        let v = self.value(z).map(|x| {
            let t = x.tanh();
            1.0 - t * t
        });
        self.push(Op::TanhD(z), v, self.ng(z))
    }

    pub fn tanh_d2(&mut self, z: Var) -> Var {
        let v = self.value(z).map(|x| {
            let t = x.tanh();
            -2.0 * t * (1.0 - t * t)
        });
        self.push(Op::TanhD2(z), v, self.ng(z))
    }

    pub fn sqrt(&mut self, a: Var) -> Var {
        let v = self.value(a).map(f64::sqrt);
        self.push(Op::Sqrt(a), v, self.ng(a))
    }

    pub fn reshape(&mut self, a: Var, rows: usize, cols: usize) -> Var {
        let src = self.value(a);
        debug_assert_eq!(src.nrows() * src.ncols(), rows * cols);
        let v = DMatrix::from_column_slice(rows, cols, src.as_slice());
        self.push(Op::Reshape(a), v, self.ng(a))
    }

    pub fn repeat_cols(&mut self, a: Var, g: usize) -> Var {
        let src = self.value(a);
        let (r, c) = (src.nrows(), src.ncols());
        let mut v = DMatrix::zeros(r, c * g);
        for j in 0..c {
            for k in 0..g {
                v.column_mut(j * g + k).copy_from(&src.column(j));
            }
        }
        self.push(Op::RepeatCols(a, g), v, self.ng(a))
    }

    pub fn sum_col_groups(&mut self, a: Var, g: usize) -> Var {
        let src = self.value(a);
        let (r, cg) = (src.nrows(), src.ncols());
        debug_assert_eq!(cg % g, 0);
        let c = cg / g;
        let mut v = DMatrix::zeros(r, c);
        for j in 0..c {
            for k in 0..g {
                let col = src.column(j * g + k);
                let mut dst = v.column_mut(j);
                dst += col;
            }
        }
        self.push(Op::SumColGroups(a, g), v, self.ng(a))
    }

    pub fn col_sum(&mut self, a: Var) -> Var {
        let src = self.value(a);
        let mut v = DMatrix::zeros(1, src.ncols());
        for j in 0..src.ncols() {
            v[(0, j)] = src.column(j).sum();
        }
        self.push(Op::ColSum(a), v, self.ng(a))
    }

    pub fn sum_all(&mut self, a: Var) -> Var {
        let s = self.value(a).sum();
        self.push(Op::SumAll(a), DMatrix::from_element(1, 1, s), self.ng(a))
    }

    /// mean of all entries
    pub fn mean_all(&mut self, a: Var) -> Var {
        let n = (self.value(a).nrows() * self.value(a).ncols()) as f64;
        let s = self.sum_all(a);
        self.scale(s, 1.0 / n)
    }

    /// Reverse sweep from a scalar root; gradients for every node that
    /// requires them.
    pub fn backward(&self, root: Var) -> Gradients {
        let mut grads: Vec<Option<DMatrix<f64>>> = vec![None; self.nodes.len()];
        {
            let rv = self.value(root);
            debug_assert_eq!((rv.nrows(), rv.ncols()), (1, 1), "root must be scalar");
        }
        grads[root.0] = Some(DMatrix::from_element(1, 1, 1.0));

        let acc = |slot: &mut Option<DMatrix<f64>>, inc: DMatrix<f64>| match slot {
            Some(g) => *g += inc,
            None => *slot = Some(inc),
        };

        for id in (0..=root.0).rev() {
            if !self.nodes[id].needs_grad {
                continue;
            }
            let Some(g) = grads[id].take() else { continue };
            match self.nodes[id].op {
                Op::Leaf => {
                    grads[id] = Some(g);
                    continue;
                }
                Op::MatMul(a, b) => {
                    if self.ng(a) {
                        let inc = &g * self.value(b).transpose();
                        acc(&mut grads[a.0], inc);
                    }
                    if self.ng(b) {
                        let inc = self.value(a).tr_mul(&g);
                        acc(&mut grads[b.0], inc);
                    }
                }
                Op::TrMul(a, b) => {
                    if self.ng(a) {
                        let inc = self.value(b) * g.transpose();
                        acc(&mut grads[a.0], inc);
                    }
                    if self.ng(b) {
                        let inc = self.value(a) * &g;
                        acc(&mut grads[b.0], inc);
                    }
                }
                Op::Add(a, b) => {
                    if self.ng(a) {
                        acc(&mut grads[a.0], g.clone());
                    }
                    if self.ng(b) {
                        acc(&mut grads[b.0], g);
                    }
                }
                Op::Sub(a, b) => {
                    if self.ng(a) {
                        acc(&mut grads[a.0], g.clone());
                    }
                    if self.ng(b) {
                        acc(&mut grads[b.0], -g);
                    }
                }
                Op::AddCol(m, col) => {
                    if self.ng(col) {
                        let mut s = DMatrix::zeros(g.nrows(), 1);
                        for j in 0..g.ncols() {
                            let mut c0 = s.column_mut(0);
                            c0 += g.column(j);
                        }
                        acc(&mut grads[col.0], s);
                    }
                    if self.ng(m) {
                        acc(&mut grads[m.0], g);
                    }
                }
                Op::Hadamard(a, b) => {
                    if self.ng(a) {
                        acc(&mut grads[a.0], g.component_mul(self.value(b)));
                    }
                    if self.ng(b) {
                        acc(&mut grads[b.0], g.component_mul(self.value(a)));
                    }
                }
                Op::Scale(a, c) => {
                    if self.ng(a) {
                        acc(&mut grads[a.0], g * c);
                    }
                }
                Op::Shift(a) => {
                    if self.ng(a) {
                        acc(&mut grads[a.0], g);
                    }
                }
                Op::Tanh(z) => {
                    if self.ng(z) {
                        let t = &self.nodes[id].value;
                        let d = t.map(|x| 1.0 - x * x);
                        acc(&mut grads[z.0], g.component_mul(&d));
                    }
                }
                Op::TanhD(z) => {
                    if self.ng(z) {
                        let d = self.value(z).map(|x| {
                            let t = x.tanh();
                            -2.0 * t * (1.0 - t * t)
                        });
                        acc(&mut grads[z.0], g.component_mul(&d));
                    }
                }
                Op::TanhD2(z) => {
                    if self.ng(z) {
                        // d/dz tanh''(z) = -2 (1 - t^2)(1 - 3 t^2)
                        let d = self.value(z).map(|x| {
                            let t = x.tanh();
                            let s = 1.0 - t * t;
                            -2.0 * s * (1.0 - 3.0 * t * t)
                        });
                        acc(&mut grads[z.0], g.component_mul(&d));
                    }
                }
                Op::Sqrt(a) => {
                    if self.ng(a) {
                        let out = &self.nodes[id].value;
                        let d = out.map(|s| if s > 1e-150 { 0.5 / s } else { 0.0 });
                        acc(&mut grads[a.0], g.component_mul(&d));
                    }
                }
                Op::Reshape(a) => {
                    if self.ng(a) {
                        let src = self.value(a);
                        let inc =
                            DMatrix::from_column_slice(src.nrows(), src.ncols(), g.as_slice());
                        acc(&mut grads[a.0], inc);
                    }
                }
                Op::RepeatCols(a, gr) => {
                    if self.ng(a) {
                        let src = self.value(a);
                        let mut inc = DMatrix::zeros(src.nrows(), src.ncols());
                        for j in 0..src.ncols() {
                            for k in 0..gr {
                                let mut c0 = inc.column_mut(j);
                                c0 += g.column(j * gr + k);
                            }
                        }
                        acc(&mut grads[a.0], inc);
                    }
                }
                Op::SumColGroups(a, gr) => {
                    if self.ng(a) {
                        let src = self.value(a);
                        let mut inc = DMatrix::zeros(src.nrows(), src.ncols());
                        for j in 0..g.ncols() {
                            for k in 0..gr {
                                inc.column_mut(j * gr + k).copy_from(&g.column(j));
                            }
                        }
                        acc(&mut grads[a.0], inc);
                    }
                }
                Op::ColSum(a) => {
                    if self.ng(a) {
                        let src = self.value(a);
                        let mut inc = DMatrix::zeros(src.nrows(), src.ncols());
                        for j in 0..src.ncols() {
                            inc.column_mut(j).fill(g[(0, j)]);
                        }
                        acc(&mut grads[a.0], inc);
                    }
                }
                Op::SumAll(a) => {
                    if self.ng(a) {
                        let src = self.value(a);
                        let inc = DMatrix::from_element(src.nrows(), src.ncols(), g[(0, 0)]);
                        acc(&mut grads[a.0], inc);
                    }
                }
            }
        }
        Gradients { grads }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rand_matrix(r: usize, c: usize, rng: &mut impl Rng) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.gen::<f64>() - 0.5)
    }

    /// Central finite-difference check of d(loss)/d(leaf) for a scalar graph.
    fn fd_check(build: impl Fn(&mut Tape, Var) -> Var, leaf0: DMatrix<f64>, tol: f64) {
        let mut tape = Tape::new();
        let x = tape.leaf(leaf0.clone());
        let root = build(&mut tape, x);
        let grads = tape.backward(root);
        let g = grads.get(x).expect("leaf gradient").clone();

        let h = 1e-6;
        for r in 0..leaf0.nrows() {
            for c in 0..leaf0.ncols() {
                let eval = |delta: f64| {
                    let mut pert = leaf0.clone();
                    pert[(r, c)] += delta;
                    let mut tape = Tape::new();
                    let x = tape.leaf(pert);
                    let root = build(&mut tape, x);
                    tape.scalar(root)
                };
                let fd = (eval(h) - eval(-h)) / (2.0 * h);
                let scale = fd.abs().max(g[(r, c)].abs()).max(1e-6);
                assert!(
                    (fd - g[(r, c)]).abs() / scale < tol,
                    "({r},{c}): analytic {} vs fd {fd}",
                    g[(r, c)]
                );
            }
        }
    }

    #[test]
    fn matmul_tanh_chain_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = rand_matrix(3, 4, &mut rng);
        let x = rand_matrix(4, 5, &mut rng);
        fd_check(
            move |tape, leaf| {
                let xc = tape.constant(x.clone());
                let z = tape.matmul(leaf, xc);
                let t = tape.tanh(z);
                let sq = tape.hadamard(t, t);
                tape.mean_all(sq)
            },
            w,
            1e-6,
        );
    }

    #[test]
    fn second_derivative_ops_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let z = rand_matrix(4, 3, &mut rng);
        fd_check(
            |tape, leaf| {
                let d1 = tape.tanh_d(leaf);
                let d2 = tape.tanh_d2(leaf);
                let p = tape.hadamard(d1, d2);
                // square + shift keeps sqrt away from zero
                let sq = tape.hadamard(p, p);
                let pos = tape.shift(sq, 0.3);
                let s = tape.sqrt(pos);
                tape.sum_all(s)
            },
            z,
            1e-5,
        );
    }

    #[test]
    fn structural_ops_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let a = rand_matrix(3, 4, &mut rng);
        let b = rand_matrix(3, 8, &mut rng);
        fd_check(
            move |tape, leaf| {
                let rep = tape.repeat_cols(leaf, 2); // 3 x 8
                let bc = tape.constant(b.clone());
                let h = tape.hadamard(rep, bc);
                let gr = tape.sum_col_groups(h, 2); // 3 x 4
                let cs = tape.col_sum(gr); // 1 x 4
                let rs = tape.reshape(cs, 2, 2);
                let q = tape.tr_mul(rs, rs);
                tape.sum_all(q)
            },
            a,
            1e-6,
        );
    }

    #[test]
    fn add_col_broadcast_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let bias = rand_matrix(3, 1, &mut rng);
        let m = rand_matrix(3, 5, &mut rng);
        fd_check(
            move |tape, leaf| {
                let mc = tape.constant(m.clone());
                let s = tape.add_col(mc, leaf);
                let t = tape.tanh(s);
                tape.mean_all(t)
            },
            bias,
            1e-6,
        );
    }

    #[test]
    fn gradient_accumulates_over_reuse() {
        // y = sum(x ∘ x) + sum(x): both paths contribute.
        let x = DMatrix::from_row_slice(1, 2, &[2.0, -3.0]);
        let mut tape = Tape::new();
        let v = tape.leaf(x);
        let sq = tape.hadamard(v, v);
        let s1 = tape.sum_all(sq);
        let s2 = tape.sum_all(v);
        let root = tape.add(s1, s2);
        let g = tape.backward(root);
        let gx = g.get(v).unwrap();
        assert!((gx[(0, 0)] - 5.0).abs() < 1e-14); // 2*2 + 1
        assert!((gx[(0, 1)] - (-5.0)).abs() < 1e-14); // -6 + 1
    }

    #[test]
    fn constants_get_no_gradient() {
        let mut tape = Tape::new();
        let c = tape.constant(DMatrix::from_element(2, 2, 3.0));
        let x = tape.leaf(DMatrix::from_element(2, 2, 1.0));
        let p = tape.hadamard(c, x);
        let root = tape.sum_all(p);
        let g = tape.backward(root);
        assert!(g.get(c).is_none());
        assert!(g.get(x).is_some());
    }
}
