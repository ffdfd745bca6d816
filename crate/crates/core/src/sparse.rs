//! Symmetric sparse matrices (lower triangle, CSR) and an envelope Cholesky
//! factorization under reverse Cuthill-McKee ordering.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};

const DROP: f64 = 1e-300;

/// Symmetric sparse matrix; only the lower triangle (with diagonal) is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSym {
    /// Builds from `(row, col, value)` triplets in either triangle. Duplicates
    /// are summed in input order; entries with magnitude at most 1e-300 are
    /// dropped, except that the diagonal is always kept.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::DimensionMismatch { expected: n, got: i.max(j) + 1 });
            }
            let (r, c) = if i >= j { (i, j) } else { (j, i) };
            rows[r].push((c, v));
        }
        Ok(Self::from_rows(n, rows))
    }

    fn from_rows(n: usize, mut rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for (i, row) in rows.iter_mut().enumerate() {
            // stable sort keeps the summation order of duplicates deterministic
            row.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut v = 0.0;
                while k < row.len() && row[k].0 == c {
                    v += row[k].1;
                    k += 1;
                }
                if v.abs() > DROP || c == i {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseSym { n, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        SparseSym {
            n: d.len(),
            row_ptr: (0..=d.len()).collect(),
            col_idx: (0..d.len()).collect(),
            values: d.to_vec(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored (lower-triangle) entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Lower-triangle entries `(i, j, value)` with `j <= i`, row by row.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let cols = &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]];
        match cols.binary_search(&c) {
            Ok(k) => self.values[self.row_ptr[r] + k],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diag().iter().sum()
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.len() });
        }
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let v = self.values[k];
                acc += v * x[j];
                if j != i {
                    y[j] += v * x[i];
                }
            }
            y[i] += acc;
        }
        Ok(y)
    }

    /// `a A + b B` over the union pattern.
    pub fn combine(a: f64, lhs: &SparseSym, b: f64, rhs: &SparseSym) -> Result<SparseSym> {
        if lhs.n != rhs.n {
            return Err(Error::DimensionMismatch { expected: lhs.n, got: rhs.n });
        }
        let mut trips: Vec<(usize, usize, f64)> = lhs.triplets().map(|(i, j, v)| (i, j, a * v)).collect();
        trips.extend(rhs.triplets().map(|(i, j, v)| (i, j, b * v)));
        SparseSym::from_triplets(lhs.n, &trips)
    }

    pub fn scaled(&self, s: f64) -> SparseSym {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Rows and columns listed in `keep`, in that order.
    pub fn principal_submatrix(&self, keep: &[usize]) -> Result<SparseSym> {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            if old >= self.n {
                return Err(Error::DimensionMismatch { expected: self.n, got: old + 1 });
            }
            map[old] = new;
        }
        let trips: Vec<_> = self
            .triplets()
            .filter(|&(i, j, _)| map[i] != usize::MAX && map[j] != usize::MAX)
            .map(|(i, j, v)| (map[i], map[j], v))
            .collect();
        SparseSym::from_triplets(keep.len(), &trips)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (i, j, v) in self.triplets() {
            d[i][j] = v;
            d[j][i] = v;
        }
        d
    }

    /// Coordinate text: header `n nnz`, then `i j value` per lower-triangle
    /// entry (0-based), values at 17 significant digits.
    pub fn to_coordinate_string(&self) -> String {
        let mut s = String::with_capacity(32 * (self.nnz() + 1));
        let _ = writeln!(s, "{} {}", self.n, self.nnz());
        for (i, j, v) in self.triplets() {
            let _ = writeln!(s, "{i} {j} {v:.16e}");
        }
        s
    }

    pub fn parse_coordinate(text: &str) -> Result<SparseSym> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let perr = |line: usize, message: String| Error::Parse { line: line + 1, message };
        let (hl, header) = lines.next().ok_or_else(|| perr(0, "empty input".into()))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 2 {
            return Err(perr(hl, "header must be `n nnz`".into()));
        }
        let n: usize = h[0].parse().map_err(|e| perr(hl, format!("{e}")))?;
        let nnz: usize = h[1].parse().map_err(|e| perr(hl, format!("{e}")))?;
        let mut trips = Vec::with_capacity(nnz);
        for (ln, l) in lines {
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.len() != 3 {
                return Err(perr(ln, format!("expected `i j value`, got `{l}`")));
            }
            let i: usize = t[0].parse().map_err(|e| perr(ln, format!("{e}")))?;
            let j: usize = t[1].parse().map_err(|e| perr(ln, format!("{e}")))?;
            let v: f64 = t[2].parse().map_err(|e| perr(ln, format!("{e}")))?;
            if j > i {
                return Err(perr(ln, "entry above the diagonal".into()));
            }
            trips.push((i, j, v));
        }
        if trips.len() != nnz {
            return Err(perr(hl, format!("header announces {nnz} entries, found {}", trips.len())));
        }
        SparseSym::from_triplets(n, &trips)
    }

    /// Adjacency lists of the off-diagonal pattern.
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, j, _) in self.triplets() {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for a in adj.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        adj
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `x^T Q x` with compensated (doubled working precision) accumulation.
pub fn quadratic_form(q: &SparseSym, x: &[f64]) -> Result<f64> {
    if x.len() != q.n {
        return Err(Error::DimensionMismatch { expected: q.n, got: x.len() });
    }
    let (mut s, mut c) = (0.0, 0.0);
    for (i, j, v) in q.triplets() {
        let v = if i == j { v } else { 2.0 * v };
        let (p1, e1) = two_prod(v, x[j]);
        let (p2, e2) = two_prod(p1, x[i]);
        let (ns, es) = two_sum(s, p2);
        s = ns;
        c += es + e2 + e1 * x[i];
    }
    Ok(s + c)
}

/// `x^T y` with compensated accumulation.
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (p, e) = two_prod(*a, *b);
        let (ns, es) = two_sum(s, p);
        s = ns;
        c += es + e;
    }
    s + c
}

/// Reverse Cuthill-McKee ordering; `perm[new] = old`. Each connected
/// component starts from a pseudo-peripheral vertex.
pub fn rcm_ordering(a: &SparseSym) -> Vec<usize> {
    let adj = a.adjacency();
    let n = a.n;
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(&adj, seed);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (adj[w].len(), w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(adj: &[Vec<usize>], start: usize) -> Vec<Vec<usize>> {
    let mut seen = std::collections::HashSet::from([start]);
    let mut levels = vec![vec![start]];
    loop {
        let mut next = Vec::new();
        for &v in levels.last().expect("nonempty") {
            for &w in &adj[v] {
                if seen.insert(w) {
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            return levels;
        }
        levels.push(next);
    }
}

fn pseudo_peripheral(adj: &[Vec<usize>], seed: usize) -> usize {
    let mut v = seed;
    let mut depth = bfs_levels(adj, v).len();
    loop {
        let levels = bfs_levels(adj, v);
        let last = levels.last().expect("nonempty");
        let &cand = last.iter().min_by_key(|&&w| (adj[w].len(), w)).expect("nonempty");
        let cand_depth = bfs_levels(adj, cand).len();
        if cand_depth > depth {
            v = cand;
            depth = cand_depth;
        } else {
            return v;
        }
    }
}

/// `P A P^T = L L^T` with `L` stored by rows over its envelope.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    vals: Vec<f64>,
}

impl Cholesky {
    pub fn factor(a: &SparseSym) -> Result<Self> {
        let n = a.n;
        let perm = rcm_ordering(a);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (i, j, _) in a.triplets() {
            let (pi, pj) = (inv[i], inv[j]);
            let (r, c) = if pi >= pj { (pi, pj) } else { (pj, pi) };
            first[r] = first[r].min(c);
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i] + 1));
        }
        let mut vals = vec![0.0; start[n]];
        for (i, j, v) in a.triplets() {
            let (pi, pj) = (inv[i], inv[j]);
            let (r, c) = if pi >= pj { (pi, pj) } else { (pj, pi) };
            vals[start[r] + c - first[r]] = v;
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let (ri, rj) = (start[i] - fi, start[j] - fj);
                let mut s = vals[ri + j];
                for k in k0..j {
                    s -= vals[ri + k] * vals[rj + k];
                }
                if j < i {
                    vals[ri + j] = s / vals[rj + j];
                } else {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite { row: perm[i], pivot: s });
                    }
                    vals[ri + i] = s.sqrt();
                }
            }
        }
        Ok(Cholesky { n, perm, first, start, vals })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.vals.len()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: b.len() });
        }
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let (fi, ri) = (self.first[i], self.start[i] - self.first[i]);
            let mut s = y[i];
            for k in fi..i {
                s -= self.vals[ri + k] * y[k];
            }
            y[i] = s / self.vals[ri + i];
        }
        for i in (0..n).rev() {
            let (fi, ri) = (self.first[i], self.start[i] - self.first[i]);
            y[i] /= self.vals[ri + i];
            let yi = y[i];
            for k in fi..i {
                y[k] -= self.vals[ri + k] * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn laplacian_1d(n: usize) -> SparseSym {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i + 1, i, -1.0));
            }
        }
        SparseSym::from_triplets(n, &t).unwrap()
    }

    #[test]
    fn duplicates_sum_and_transpose_folds() {
        let a = SparseSym::from_triplets(2, &[(0, 1, 1.0), (1, 0, 2.0), (0, 0, 1.0)]).unwrap();
        assert_eq!(a.get(1, 0), 3.0);
        assert_eq!(a.get(0, 1), 3.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn tiny_entries_dropped() {
        let a = SparseSym::from_triplets(2, &[(1, 0, 1e-310), (0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn quadratic_form_examples() {
        let d = SparseSym::diagonal(&[1.0, 2.0, 3.0]);
        assert_eq!(quadratic_form(&d, &[0.0; 3]).unwrap(), 0.0);
        assert_eq!(quadratic_form(&d, &[1.0, 2.0, 3.0]).unwrap(), 1.0 + 8.0 + 27.0);
        assert!(matches!(quadratic_form(&d, &[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn quadratic_form_cancellation() {
        // x^T A x for the discrete Laplacian and a slowly varying vector is
        // far smaller than the individual terms.
        let n = 1000;
        let a = laplacian_1d(n);
        let x: Vec<f64> = (0..n).map(|i| 1.0 + 1e-6 * i as f64).collect();
        let exact = 1.0 + (1.0 + 1e-6 * (n - 1) as f64).powi(2) + (n - 1) as f64 * 1e-12;
        assert_relative_eq!(quadratic_form(&a, &x).unwrap(), exact, max_relative = 1e-12);
    }

    #[test]
    fn cholesky_solves() {
        let a = laplacian_1d(50);
        let chol = Cholesky::factor(&a).unwrap();
        let x_true: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.mul_vec(&x_true).unwrap();
        let x = chol.solve(&b).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn rcm_keeps_a_shuffled_path_banded() {
        // a path graph with scrambled labels
        let n = 40;
        let label: Vec<usize> = (0..n).map(|i| (i * 17) % n).collect();
        let mut t = Vec::new();
        for i in 0..n {
            t.push((label[i], label[i], 4.0));
            if i + 1 < n {
                t.push((label[i], label[i + 1], -1.0));
            }
        }
        let a = SparseSym::from_triplets(n, &t).unwrap();
        let chol = Cholesky::factor(&a).unwrap();
        assert_eq!(chol.envelope_size(), 2 * n - 1);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = SparseSym::from_triplets(2, &[(0, 0, 1.0), (1, 1, 1.0), (1, 0, 2.0)]).unwrap();
        assert!(matches!(Cholesky::factor(&a), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn coordinate_round_trip() {
        let a = SparseSym::from_triplets(3, &[(0, 0, 1.0 / 3.0), (2, 1, -0.1), (2, 2, 7.0)]).unwrap();
        let text = a.to_coordinate_string();
        assert!(text.starts_with("3 3\n"));
        let b = SparseSym::parse_coordinate(&text).unwrap();
        assert_eq!(a, b);
        assert!(SparseSym::parse_coordinate("2 1\n0 1 1.0\n").is_err());
    }

    #[test]
    fn submatrix_and_combination() {
        let a = laplacian_1d(4);
        let s = a.principal_submatrix(&[1, 2]).unwrap();
        assert_eq!(s.to_dense(), vec![vec![2.0, -1.0], vec![-1.0, 2.0]]);
        let c = SparseSym::combine(1.0, &a, -1.0, &a).unwrap();
        assert!(c.triplets().all(|(i, j, v)| i == j && v == 0.0));
    }
}
