use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{real, Scalar};

use super::digraph::WeightedDigraph;

/// Dense row-major complex matrix with optional row and column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T: Scalar> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Entry {
    pub re: f64,
    pub im: f64,
}

impl<T: Scalar> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![Complex::new(T::zero(), T::zero()); rows * cols],
            row_labels: (0..rows).map(|r| r.to_string()).collect(),
            col_labels: (0..cols).map(|c| c.to_string()).collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = real(T::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            m.data[i * c..(i + 1) * c].copy_from_slice(&row);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Matrix with row `r` and column `c` removed.
    pub fn minor(&self, r: usize, c: usize) -> Self {
        let mut m = Self::zeros(self.rows - 1, self.cols - 1);
        let mut k = 0;
        for i in (0..self.rows).filter(|&i| i != r) {
            for j in (0..self.cols).filter(|&j| j != c) {
                m.data[k] = self[(i, j)];
                k += 1;
            }
        }
        m.row_labels = (0..self.rows)
            .filter(|&i| i != r)
            .map(|i| self.row_labels[i].clone())
            .collect();
        m.col_labels = (0..self.cols)
            .filter(|&j| j != c)
            .map(|j| self.col_labels[j].clone())
            .collect();
        m
    }

    fn check_square(&self) -> Result<()> {
        if self.rows == self.cols {
            Ok(())
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// Determinant by Gaussian elimination with partial pivoting on entry
    /// modulus. A pivot column whose largest entry is below `pivot_tol`
    /// makes the determinant zero. The empty matrix has determinant 1.
    pub fn det(&self, pivot_tol: f64) -> Result<Complex<T>> {
        self.check_square()?;
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = real(T::one());
        for k in 0..n {
            let (p, best) =
                (k..n)
                    .map(|i| (i, a[i * n + k].norm()))
                    .fold((k, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best.to_f64_lossy() < pivot_tol {
                return Ok(real(T::zero()));
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                det = -det;
            }
            let pivot = a[k * n + k];
            det *= pivot;
            for i in k + 1..n {
                let f = a[i * n + k] / pivot;
                if f.norm() == T::zero() {
                    continue;
                }
                for j in k..n {
                    let v = a[k * n + j];
                    a[i * n + j] -= f * v;
                }
            }
        }
        Ok(det)
    }

    /// Determinant by Laplace expansion along the first row. Exponential;
    /// only for cross-checking small matrices.
    pub fn det_cofactor(&self) -> Result<Complex<T>> {
        self.check_square()?;
        let n = self.rows;
        let cols: Vec<usize> = (0..n).collect();
        Ok(cofactor(&self.data, n, 0, &cols))
    }

    pub fn to_entries(&self) -> Vec<Vec<Entry>> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|z| Entry {
                        re: z.re.to_f64_lossy(),
                        im: z.im.to_f64_lossy(),
                    })
                    .collect()
            })
            .collect()
    }
}

fn cofactor<T: Scalar>(a: &[Complex<T>], n: usize, row: usize, cols: &[usize]) -> Complex<T> {
    if cols.is_empty() {
        return real(T::one());
    }
    let mut sum = real(T::zero());
    for (k, &c) in cols.iter().enumerate() {
        let v = a[row * n + c];
        if v.norm() == T::zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let term = v * cofactor(a, n, row + 1, &rest);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum
}

/// Permanent of a 0/1 matrix by expansion; counts perfect matchings of a
/// bipartite graph given its biadjacency matrix.
pub fn permanent_01(a: &[Vec<bool>]) -> u64 {
    fn go(a: &[Vec<bool>], row: usize, used: &mut Vec<bool>) -> u64 {
        if row == a.len() {
            return 1;
        }
        let mut total = 0;
        for c in 0..used.len() {
            if a[row][c] && !used[c] {
                used[c] = true;
                total += go(a, row + 1, used);
                used[c] = false;
            }
        }
        total
    }
    let cols = a.first().map_or(0, Vec::len);
    if a.len() != cols {
        return 0;
    }
    go(a, 0, &mut vec![false; cols])
}

impl<T: Scalar> std::ops::Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T: Scalar> std::ops::IndexMut<(usize, usize)> for ComplexMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// Laplacian of a weighted digraph: entry `(x, y)` is the total weight of
/// arcs `x -> y`, and the diagonal is minus the total outgoing weight.
pub fn laplacian<T: Scalar>(g: &WeightedDigraph<T>) -> ComplexMatrix<T> {
    let n = g.num_vertices;
    let mut m = ComplexMatrix::zeros(n, n);
    for a in &g.arcs {
        if a.from != a.to {
            m[(a.from, a.to)] += a.weight;
            m[(a.from, a.from)] -= a.weight;
        }
    }
    if let Some(labels) = &g.labels {
        m.row_labels = labels.clone();
        m.col_labels = labels.clone();
    }
    m
}

/// Oriented spanning tree partition function rooted at `root`, by the
/// matrix-tree theorem. With the diagonal carrying minus the outgoing
/// weight, the reduced determinant picks up `(-1)^(n-1)`, which is undone
/// here.
pub fn matrix_tree_z<T: Scalar>(g: &WeightedDigraph<T>, root: usize, pivot_tol: f64) -> Complex<T> {
    let reduced = laplacian(g).minor(root, root);
    let det = reduced.det(pivot_tol).expect("Laplacian minor is square");
    if reduced.rows() % 2 == 1 {
        -det
    } else {
        det
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::digraph::ArcOrigin;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn determinant_basics() {
        assert_eq!(ComplexMatrix::<f64>::identity(5).det(1e-13).unwrap(), c(1.0, 0.0));
        let d = ComplexMatrix::from_rows(vec![
            vec![c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
        ]);
        assert!((d.det(1e-13).unwrap() - c(0.0, -2.0)).norm() < 1e-15);
        assert_eq!(ComplexMatrix::<f64>::zeros(0, 0).det(1e-13).unwrap(), c(1.0, 0.0));
        assert!(ComplexMatrix::<f64>::zeros(2, 3).det(1e-13).is_err());
    }

    #[test]
    fn bidirected_cycles() {
        for n in [3usize, 4] {
            let mut g = WeightedDigraph::<f64>::new(n);
            for k in 0..n {
                g.add_arc(k, (k + 1) % n, c(1.0, 0.0), ArcOrigin::Plain);
                g.add_arc((k + 1) % n, k, c(1.0, 0.0), ArcOrigin::Plain);
            }
            let lap = laplacian(&g);
            assert_eq!(lap[(0, 0)], c(-2.0, 0.0));
            assert!((matrix_tree_z(&g, 0, 1e-13) - c(n as f64, 0.0)).norm() < 1e-12);
            let raw = lap.minor(0, 0).det(1e-13).unwrap();
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            assert!((raw - c(sign * n as f64, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn permanent_counts_matchings() {
        let k33 = vec![vec![true; 3]; 3];
        assert_eq!(permanent_01(&k33), 6);
        let cyc = vec![
            vec![true, true, false],
            vec![false, true, true],
            vec![true, false, true],
        ];
        assert_eq!(permanent_01(&cyc), 2);
    }
}
