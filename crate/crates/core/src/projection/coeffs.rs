//! Coefficients of the nonlocal part `h_j` of the divergence of `F'`:
//! `h_j = sum C d_beta d_gamma int d_{x_q} N^±(x, y) F_kl(y) dy`.
//!
//! Generated from the componentwise formulas for `F'` by moving every
//! `y`-derivative of `N` onto `x`, collecting the second normal derivatives of
//! the Dirichlet potential through `Delta_x int N^- f = f`, and keeping the
//! terms with three derivatives. Indices are 0-based; the normal axis is `n - 1`.

use crate::kernels::Sign;
use Sign::{Minus, Plus};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HTerm {
    pub j: usize,
    pub beta: usize,
    pub gamma: usize,
    pub q: usize,
    pub sign: Sign,
    pub k: usize,
    pub l: usize,
    pub coef: f64,
}

#[allow(clippy::too_many_arguments)]
const fn t(j: usize, beta: usize, gamma: usize, q: usize, sign: Sign, k: usize, l: usize, coef: i32) -> HTerm {
    HTerm { j, beta, gamma, q, sign, k, l, coef: coef as f64 }
}

const H2: [HTerm; 8] = [
    t(0, 0, 0, 0, Plus, 0, 0, -1),
    t(0, 0, 0, 1, Minus, 0, 1, -1),
    t(0, 0, 0, 1, Minus, 1, 0, -1),
    t(0, 0, 0, 0, Plus, 1, 1, 1),
    t(1, 0, 0, 1, Plus, 0, 0, -1),
    t(1, 0, 0, 1, Plus, 1, 1, 1),
    t(1, 0, 0, 0, Minus, 0, 1, 1),
    t(1, 0, 0, 0, Minus, 1, 0, 1),
];

const H3: [HTerm; 34] = [
    t(0, 0, 0, 0, Plus, 0, 0, -1),
    t(0, 0, 0, 1, Plus, 0, 1, -1),
    t(0, 0, 0, 2, Minus, 0, 2, -1),
    t(0, 0, 0, 2, Minus, 2, 0, -1),
    t(0, 0, 0, 0, Plus, 2, 2, 1),
    t(0, 1, 0, 0, Plus, 1, 0, -1),
    t(0, 1, 0, 1, Plus, 1, 1, -1),
    t(0, 1, 0, 2, Minus, 1, 2, -1),
    t(0, 1, 0, 2, Minus, 2, 1, -1),
    t(0, 1, 0, 1, Plus, 2, 2, 1),
    t(1, 0, 1, 0, Plus, 0, 0, -1),
    t(1, 0, 1, 1, Plus, 0, 1, -1),
    t(1, 0, 1, 2, Minus, 0, 2, -1),
    t(1, 0, 1, 2, Minus, 2, 0, -1),
    t(1, 0, 1, 0, Plus, 2, 2, 1),
    t(1, 1, 1, 0, Plus, 1, 0, -1),
    t(1, 1, 1, 1, Plus, 1, 1, -1),
    t(1, 1, 1, 2, Minus, 1, 2, -1),
    t(1, 1, 1, 2, Minus, 2, 1, -1),
    t(1, 1, 1, 1, Plus, 2, 2, 1),
    t(2, 0, 0, 2, Plus, 0, 0, -1),
    t(2, 0, 1, 2, Plus, 0, 1, -1),
    t(2, 1, 0, 2, Plus, 1, 0, -1),
    t(2, 1, 1, 2, Plus, 1, 1, -1),
    t(2, 0, 0, 2, Plus, 2, 2, 1),
    t(2, 1, 1, 2, Plus, 2, 2, 1),
    t(2, 0, 0, 0, Minus, 0, 2, 1),
    t(2, 0, 0, 0, Minus, 2, 0, 1),
    t(2, 1, 1, 0, Minus, 0, 2, 1),
    t(2, 1, 1, 0, Minus, 2, 0, 1),
    t(2, 0, 0, 1, Minus, 1, 2, 1),
    t(2, 0, 0, 1, Minus, 2, 1, 1),
    t(2, 1, 1, 1, Minus, 1, 2, 1),
    t(2, 1, 1, 1, Minus, 2, 1, 1),
];

/// The coefficient table for dimension `n` (2 or 3).
pub fn h_table(n: usize) -> &'static [HTerm] {
    match n {
        2 => &H2,
        3 => &H3,
        _ => &[],
    }
}
