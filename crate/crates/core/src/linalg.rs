//! Exact dense linear algebra over a [`FieldSpec`].

use num_traits::Zero;

use crate::field::{FieldSpec, Scalar};

pub type Vector = Vec<Scalar>;

pub fn zero_vector(n: usize) -> Vector {
    vec![Scalar::zero(); n]
}

pub fn unit_vector(n: usize, i: usize) -> Vector {
    let mut v = zero_vector(n);
    v[i] = num_traits::One::one();
    v
}

pub fn is_zero_vector(v: &[Scalar]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn axpy(field: FieldSpec, y: &mut [Scalar], a: &Scalar, x: &[Scalar]) {
    if a.is_zero() {
        return;
    }
    for (yi, xi) in y.iter_mut().zip(x) {
        if !xi.is_zero() {
            *yi = field.add(yi, &field.mul(a, xi));
        }
    }
}

pub fn scale_vector(field: FieldSpec, v: &[Scalar], a: &Scalar) -> Vector {
    v.iter().map(|x| field.mul(x, a)).collect()
}

/// A subspace kept in semi-echelon form: every basis row has a pivot where
/// it equals one, and rows added later vanish at earlier pivots. Pivots are
/// the first nonzero column of the reduced row.
#[derive(Clone, Debug)]
pub struct Subspace {
    field: FieldSpec,
    ncols: usize,
    rows: Vec<(usize, Vector)>,
    pivot_of_col: Vec<Option<usize>>,
}

impl Subspace {
    pub fn new(field: FieldSpec, ncols: usize) -> Self {
        Subspace { field, ncols, rows: Vec::new(), pivot_of_col: vec![None; ncols] }
    }

    pub fn spanned_by(field: FieldSpec, ncols: usize, vectors: impl IntoIterator<Item = Vector>) -> Self {
        let mut s = Subspace::new(field, ncols);
        for v in vectors {
            s.insert(v);
        }
        s
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> impl Iterator<Item = &Vector> {
        self.rows.iter().map(|(_, r)| r)
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().map(|(p, _)| *p)
    }

    pub fn is_pivot(&self, col: usize) -> bool {
        self.pivot_of_col[col].is_some()
    }

    /// Residual of `v` after eliminating every pivot.
    pub fn reduce(&self, v: &[Scalar]) -> Vector {
        let mut v = v.to_vec();
        for (p, row) in &self.rows {
            if !v[*p].is_zero() {
                let c = self.field.neg(&v[*p]);
                axpy(self.field, &mut v, &c, row);
            }
        }
        v
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        is_zero_vector(&self.reduce(v))
    }

    /// Adds `v`; returns whether the dimension grew.
    pub fn insert(&mut self, v: Vector) -> bool {
        debug_assert_eq!(v.len(), self.ncols);
        let r = self.reduce(&v);
        match r.iter().position(|x| !x.is_zero()) {
            None => false,
            Some(p) => {
                let inv = self.field.inv(&r[p]).expect("nonzero");
                let r = scale_vector(self.field, &r, &inv);
                self.pivot_of_col[p] = Some(self.rows.len());
                self.rows.push((p, r));
                true
            }
        }
    }

    /// Coefficients expressing `v` in the stored basis, if `v` lies in the
    /// subspace.
    pub fn coordinates(&self, v: &[Scalar]) -> Option<Vector> {
        let mut v = v.to_vec();
        let mut coords = zero_vector(self.rows.len());
        for (i, (p, row)) in self.rows.iter().enumerate() {
            if !v[*p].is_zero() {
                coords[i] = v[*p].clone();
                let c = self.field.neg(&v[*p]);
                axpy(self.field, &mut v, &c, row);
            }
        }
        if is_zero_vector(&v) {
            Some(coords)
        } else {
            None
        }
    }

    /// Columns that are not pivots; their unit vectors span a complement.
    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.ncols).filter(|&c| self.pivot_of_col[c].is_none()).collect()
    }

    pub fn intersection_is_trivial_with(&self, other: &Subspace) -> bool {
        let mut s = self.clone();
        other.basis().all(|v| s.insert(v.clone()))
    }
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(field: FieldSpec, m: &mut [Vector]) -> Vec<usize> {
    let nrows = m.len();
    if nrows == 0 {
        return vec![];
    }
    let ncols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(pr) = (r..nrows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, pr);
        let inv = field.inv(&m[r][c]).expect("nonzero");
        m[r] = scale_vector(field, &m[r], &inv);
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let a = field.neg(&row[c]);
                axpy(field, row, &a, &pivot_row);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(field: FieldSpec, rows: &[Vector]) -> usize {
    let mut m = rows.to_vec();
    rref(field, &mut m).len()
}

/// Basis of `{x : A x = 0}` where `A` is given by its rows.
pub fn nullspace(field: FieldSpec, rows: &[Vector], ncols: usize) -> Vec<Vector> {
    let mut m: Vec<Vector> = rows.iter().filter(|r| !is_zero_vector(r)).cloned().collect();
    let pivots = rref(field, &mut m);
    let mut is_pivot = vec![false; ncols];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    let mut out = Vec::new();
    for free in (0..ncols).filter(|&c| !is_pivot[c]) {
        let mut v = zero_vector(ncols);
        v[free] = num_traits::One::one();
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = field.neg(&m[i][free]);
        }
        out.push(v);
    }
    out
}

/// Some solution of `A x = b`, if one exists.
pub fn solve(field: FieldSpec, rows: &[Vector], b: &[Scalar], ncols: usize) -> Option<Vector> {
    let mut aug: Vec<Vector> = rows
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut v = r.clone();
            v.push(bi.clone());
            v
        })
        .collect();
    let pivots = rref(field, &mut aug);
    if pivots.contains(&ncols) {
        return None;
    }
    let mut x = zero_vector(ncols);
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = aug[i][ncols].clone();
    }
    Some(x)
}

/// Square matrix product `a * b` with matrices as row lists.
pub fn mat_mul(field: FieldSpec, a: &[Vector], b: &[Vector]) -> Vec<Vector> {
    let n = b.first().map(|r| r.len()).unwrap_or(0);
    a.iter()
        .map(|row| {
            let mut out = zero_vector(n);
            for (k, aik) in row.iter().enumerate() {
                axpy(field, &mut out, aik, &b[k]);
            }
            out
        })
        .collect()
}
