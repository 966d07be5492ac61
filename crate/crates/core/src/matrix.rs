//! Dense square matrices indexed by registry order.

use serde::Serialize;

use crate::num::Real;

/// Dense `n x n` matrix stored row-major. Link and weight matrices are kept
/// symmetric by construction through [`SquareMatrix::set_sym`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Copy> SquareMatrix<T> {
    pub fn filled(n: usize, value: T) -> Self {
        SquareMatrix {
            n,
            data: vec![value; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn set_sym(&mut self, i: usize, j: usize, v: T) {
        self.set(i, j, v);
        self.set(j, i, v);
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Re-indexes rows and columns: entry `(a, b)` of the result is entry
    /// `(order[a], order[b])` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let n = order.len();
        let mut data = Vec::with_capacity(n * n);
        for &a in order {
            for &b in order {
                data.push(self.get(a, b));
            }
        }
        SquareMatrix { n, data }
    }
}

impl<T: Copy + PartialEq> SquareMatrix<T> {
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

impl<F: Real> SquareMatrix<F> {
    pub fn zeros(n: usize) -> Self {
        Self::filled(n, F::zero())
    }

    /// Row sums, accumulated in column order.
    pub fn row_sums(&self) -> Vec<F> {
        (0..self.n)
            .map(|i| self.row(i).iter().fold(F::zero(), |acc, &x| acc + x))
            .collect()
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.n, other.n, "dimension mismatch");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + b;
        }
    }

    pub fn scale(&mut self, k: F) {
        for a in &mut self.data {
            *a = *a * k;
        }
    }

    pub fn divide(&mut self, k: F) {
        for a in &mut self.data {
            *a = *a / k;
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> F {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| (a - b).abs())
            .fold(F::zero(), F::max)
    }
}
