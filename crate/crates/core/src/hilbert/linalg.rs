//! Dense matrices over an exact field, rows as `Vec`s.

use crate::exact::ExactField;

pub type Vector<T> = Vec<T>;
pub type Mat<T> = Vec<Vec<T>>;

pub fn zeros<T: ExactField>(rows: usize, cols: usize) -> Mat<T> {
    vec![vec![T::zero(); cols]; rows]
}

pub fn identity<T: ExactField>(n: usize) -> Mat<T> {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m
}

pub fn unit<T: ExactField>(n: usize, i: usize) -> Vector<T> {
    let mut v = vec![T::zero(); n];
    v[i] = T::one();
    v
}

pub fn transpose<T: ExactField>(m: &Mat<T>) -> Mat<T> {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

pub fn mat_mul<T: ExactField>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(T::zero(), |s, k| s + row[k].clone() * b[k][j].clone()))
                .collect()
        })
        .collect()
}

pub fn mat_vec<T: ExactField>(m: &Mat<T>, v: &[T]) -> Vector<T> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// Plain coordinate dot product.
pub fn dot<T: ExactField>(u: &[T], v: &[T]) -> T {
    u.iter().zip(v).fold(T::zero(), |s, (a, b)| s + a.clone() * b.clone())
}

pub fn add<T: ExactField>(u: &[T], v: &[T]) -> Vector<T> {
    u.iter().zip(v).map(|(a, b)| a.clone() + b.clone()).collect()
}

pub fn sub<T: ExactField>(u: &[T], v: &[T]) -> Vector<T> {
    u.iter().zip(v).map(|(a, b)| a.clone() - b.clone()).collect()
}

pub fn scale<T: ExactField>(t: &T, v: &[T]) -> Vector<T> {
    v.iter().map(|a| t.clone() * a.clone()).collect()
}

pub fn is_zero_vec<T: ExactField>(v: &[T]) -> bool {
    v.iter().all(|a| a.is_zero())
}

/// Rank of a list of vectors by row reduction.
pub fn rank<T: ExactField>(vectors: &[Vector<T>]) -> usize {
    let mut rows: Mat<T> = vectors.to_vec();
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r][c].clone();
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone() / pivot.clone();
                let sub_row = scale(&f, &rows[r]);
                rows[i] = sub(&rows[i], &sub_row);
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}
