//! Small dense helpers for the affine families.

use serde::{Deserialize, Serialize};

/// Row-major dense matrix, serialized as nested arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Matrix(pub Vec<Vec<f64>>);

impl Matrix {
    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(d: &[f64]) -> Self {
        let n = d.len();
        Matrix(
            (0..n)
                .map(|i| (0..n).map(|j| if i == j { d[i] } else { 0.0 }).collect())
                .collect(),
        )
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix(vec![vec![0.0; cols]; rows])
    }

    pub fn rows(&self) -> usize {
        self.0.len()
    }

    pub fn cols(&self) -> usize {
        self.0.first().map_or(0, Vec::len)
    }

    pub fn is_rectangular(&self) -> bool {
        let c = self.cols();
        self.0.iter().all(|r| r.len() == c)
    }

    /// `acc += self * v`
    #[inline]
    pub fn mul_add(&self, v: &[f64], acc: &mut [f64]) {
        for (a, row) in acc.iter_mut().zip(&self.0) {
            *a += dot(row, v);
        }
    }

    #[inline]
    pub fn row_dot(&self, i: usize, v: &[f64]) -> f64 {
        dot(&self.0[i], v)
    }

    /// Operator norm induced by the infinity norm (max absolute row sum).
    pub fn inf_norm(&self) -> f64 {
        self.0.iter().map(|r| l1(r)).fold(0.0, f64::max)
    }

    pub fn row_l1(&self, i: usize) -> f64 {
        l1(&self.0[i])
    }

    pub fn is_diagonal(&self) -> bool {
        self.0
            .iter()
            .enumerate()
            .all(|(i, r)| r.iter().enumerate().all(|(j, &v)| i == j || v == 0.0))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows().min(self.cols()))
            .map(|i| self.0[i][i])
            .collect()
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn l1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

pub fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn inf_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn induced_norm_is_max_row_sum() {
        let m = Matrix(vec![vec![1.0, -2.0], vec![0.5, 0.5]]);
        assert_eq!(m.inf_norm(), 3.0);
        assert_eq!(Matrix::identity(3).inf_norm(), 1.0);
    }

    #[test]
    fn mul_add_accumulates() {
        let m = Matrix(vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let mut acc = vec![1.0, 1.0];
        m.mul_add(&[1.0, -1.0], &mut acc);
        assert_eq!(acc, vec![0.0, 0.0]);
    }
}
