//! Abelianization `F_r → Z^r` and integer lattice algebra.
//!
//! The obstruction test is exact over `Z`. For a free basis `h_1, ..., h_m`
//! of `H` with exponent vectors forming the columns of an `r × m` matrix `G`,
//! a retraction `F_r → H` abelianizes to a left inverse of `G`. So `H` can be
//! a retract only if `G` is split injective: rank `m` and every Smith
//! invariant factor equal to one. Failing that yields a checkable
//! certificate (an integer relation among the columns, or a torsion vector of
//! `Z^r / L`); passing yields the matrix `M = G·A` with `A·G = I`, whose
//! columns lie in the lattice `L` and which fixes every column of `G`.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::words::Word;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct ExponentVector(pub Vec<i64>);

impl ExponentVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn gcd(&self) -> i64 {
        gcd_all(&self.0)
    }
}

pub fn exponent_vector(w: &Word) -> ExponentVector {
    ExponentVector(w.exponent_sums())
}

/// `gcd(k_1, ..., k_r) = 1`. The zero vector has gcd 0 and is not primitive.
pub fn is_primitive(v: &ExponentVector) -> bool {
    v.gcd() == 1
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn gcd_all(v: &[i64]) -> i64 {
    v.iter().fold(0, |g, &x| gcd(g, x))
}

/// `(g, x, y)` with `a x + b y = g = gcd(a, b) >= 0`.
pub fn extended_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Integers `l` with `Σ k_i l_i = 1`, or `None` when `v` is not primitive.
///
/// Coordinates are absorbed left to right and the scan stops as soon as the
/// running gcd reaches one, so a leading `±1` entry gives a unit vector.
pub fn bezout_coefficients(v: &ExponentVector) -> Option<Vec<i64>> {
    let k = v.entries();
    let mut l = vec![0i64; k.len()];
    let mut g = 0i64;
    for i in 0..k.len() {
        if g == 1 {
            break;
        }
        let (ng, x, y) = extended_gcd(g, k[i]);
        for c in l.iter_mut().take(i) {
            *c *= x;
        }
        l[i] = y;
        g = ng;
    }
    (g == 1).then_some(l)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> IntMatrix {
        IntMatrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> IntMatrix {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    /// Panics on ragged input.
    pub fn from_rows(rows: &[Vec<i64>]) -> IntMatrix {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        IntMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    /// Matrix whose columns are the given vectors, each of length `height`.
    pub fn from_columns(columns: &[ExponentVector], height: usize) -> IntMatrix {
        let mut m = IntMatrix::zeros(height, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), height, "column length");
            for i in 0..height {
                m[(i, j)] = c.0[i];
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(self.cols, v.len(), "shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Determinant by fraction-free (Bareiss) elimination. Square only.
    pub fn determinant(&self) -> i64 {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return 1;
        }
        let mut a: Vec<Vec<i128>> = self.to_rows().into_iter().map(|r| r.into_iter().map(i128::from).collect()).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a[k][k] == 0 {
                match (k + 1..n).find(|&i| a[i][k] != 0) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
                }
            }
            prev = a[k][k];
        }
        (sign * a[n - 1][n - 1]) as i64
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[target] += q * row[source]
    fn add_row(&mut self, target: usize, source: usize, q: i64) {
        if q == 0 {
            return;
        }
        for j in 0..self.cols {
            let s = self[(source, j)];
            self[(target, j)] += q * s;
        }
    }

    /// col[target] += q * col[source]
    fn add_col(&mut self, target: usize, source: usize, q: i64) {
        if q == 0 {
            return;
        }
        for i in 0..self.rows {
            let s = self[(i, source)];
            self[(i, target)] += q * s;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            self[(i, j)] = -self[(i, j)];
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = i64;

    fn index(&self, (i, j): (usize, usize)) -> &i64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_rows())
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

/// `u · m · v = diag(factors)` with `u`, `v` unimodular and each factor
/// dividing the next. `factors` has length `min(rows, cols)`; zeros trail.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub factors: Vec<i64>,
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
}

impl SmithForm {
    /// Number of nonzero invariant factors.
    pub fn rank(&self) -> usize {
        self.factors.iter().take_while(|&&d| d != 0).count()
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut u_inv = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);
    let mut v_inv = IntMatrix::identity(cols);

    // Row operation E on a: a <- E a, u <- E u, u_inv <- u_inv E⁻¹.
    macro_rules! row_add {
        ($t:expr, $s:expr, $q:expr) => {{
            a.add_row($t, $s, $q);
            u.add_row($t, $s, $q);
            u_inv.add_col($s, $t, -$q);
        }};
    }
    macro_rules! row_swap {
        ($x:expr, $y:expr) => {{
            a.swap_rows($x, $y);
            u.swap_rows($x, $y);
            u_inv.swap_cols($x, $y);
        }};
    }
    // Column operation E on a: a <- a E, v <- v E, v_inv <- E⁻¹ v_inv.
    macro_rules! col_add {
        ($t:expr, $s:expr, $q:expr) => {{
            a.add_col($t, $s, $q);
            v.add_col($t, $s, $q);
            v_inv.add_row($s, $t, -$q);
        }};
    }
    macro_rules! col_swap {
        ($x:expr, $y:expr) => {{
            a.swap_cols($x, $y);
            v.swap_cols($x, $y);
            v_inv.swap_rows($x, $y);
        }};
    }

    let n = rows.min(cols);
    for t in 0..n {
        // Smallest nonzero entry of the trailing block becomes the pivot.
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if a[(i, j)] != 0 && best.is_none_or(|(bi, bj)| a[(i, j)].abs() < a[(bi, bj)].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        row_swap!(t, pi);
        col_swap!(t, pj);

        loop {
            let mut clean = true;
            for i in t + 1..rows {
                let q = a[(i, t)] / a[(t, t)];
                row_add!(i, t, -q);
                if a[(i, t)] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                let q = a[(t, j)] / a[(t, t)];
                col_add!(j, t, -q);
                if a[(t, j)] != 0 {
                    clean = false;
                }
            }
            if !clean {
                // A remainder smaller than the pivot remains; move it in.
                let mut best = (t, t);
                for i in t + 1..rows {
                    if a[(i, t)] != 0 && a[(i, t)].abs() < a[best].abs() {
                        best = (i, t);
                    }
                }
                for j in t + 1..cols {
                    if a[(t, j)] != 0 && a[(t, j)].abs() < a[best].abs() {
                        best = (t, j);
                    }
                }
                row_swap!(t, best.0);
                col_swap!(t, best.1);
                continue;
            }
            // Divisibility: fold any offending row into the pivot row.
            let p = a[(t, t)];
            let offending = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| a[(i, j)] % p != 0));
            match offending {
                Some(i) => row_add!(t, i, 1),
                None => break,
            }
        }
        if a[(t, t)] < 0 {
            a.negate_row(t);
            u.negate_row(t);
            for i in 0..rows {
                u_inv[(i, t)] = -u_inv[(i, t)];
            }
        }
    }
    let factors = (0..n).map(|i| a[(i, i)]).collect();
    SmithForm {
        factors,
        u,
        u_inv,
        v,
        v_inv,
    }
}

/// Integer solution `c` of `g c = x`, if any.
pub fn solve_integer(g: &IntMatrix, x: &[i64]) -> Option<Vec<i64>> {
    solve_with(g, &smith_normal_form(g), x)
}

/// As [`solve_integer`] with a precomputed Smith form of `g`.
pub fn solve_with(g: &IntMatrix, snf: &SmithForm, x: &[i64]) -> Option<Vec<i64>> {
    assert_eq!(x.len(), g.rows(), "right-hand side length");
    let y = snf.u.mul_vec(x);
    let mut z = vec![0i64; g.cols()];
    for (i, &yi) in y.iter().enumerate() {
        let d = snf.factors.get(i).copied().unwrap_or(0);
        if d == 0 {
            if yi != 0 {
                return None;
            }
        } else {
            if yi % d != 0 {
                return None;
            }
            z[i] = yi / d;
        }
    }
    Some(snf.v.mul_vec(&z))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AbelianObstruction {
    /// A nonzero integer relation among the exponent vectors of a free basis.
    RankDeficient { relation: Vec<i64> },
    /// `vector ∉ L` but `factor · vector ∈ L`: `Z^r / L` has torsion.
    Torsion { factor: i64, vector: Vec<i64> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AbelianVerdict {
    /// `witness` is `r × r`, columns in the lattice, fixing every vector.
    Passes { witness: IntMatrix },
    Obstructed(AbelianObstruction),
}

impl AbelianVerdict {
    pub fn passes(&self) -> bool {
        matches!(self, AbelianVerdict::Passes { .. })
    }

    /// Re-checks the witness or certificate against the vectors.
    pub fn verify(&self, vectors: &[ExponentVector], r: usize) -> bool {
        let g = IntMatrix::from_columns(vectors, r);
        match self {
            AbelianVerdict::Passes { witness } => {
                witness.rows() == r
                    && witness.cols() == r
                    && witness.mul(&g) == g
                    && (0..r).all(|j| solve_integer(&g, &witness.column(j)).is_some())
            }
            AbelianVerdict::Obstructed(AbelianObstruction::RankDeficient { relation }) => {
                relation.len() == vectors.len()
                    && relation.iter().any(|&c| c != 0)
                    && g.mul_vec(relation).iter().all(|&x| x == 0)
            }
            AbelianVerdict::Obstructed(AbelianObstruction::Torsion { factor, vector }) => {
                let scaled: Vec<i64> = vector.iter().map(|x| x * factor).collect();
                *factor > 1 && solve_integer(&g, vector).is_none() && solve_integer(&g, &scaled).is_some()
            }
        }
    }
}

/// Exact abelian test for retract-ness. `vectors` must be the exponent
/// vectors of a free basis of the subgroup.
pub fn abelian_retract_obstruction(vectors: &[ExponentVector], r: usize) -> AbelianVerdict {
    let m = vectors.len();
    let g = IntMatrix::from_columns(vectors, r);
    let snf = smith_normal_form(&g);
    let k = snf.rank();
    if k < m {
        return AbelianVerdict::Obstructed(AbelianObstruction::RankDeficient {
            relation: snf.v.column(k),
        });
    }
    if let Some(i) = snf.factors.iter().position(|&d| d > 1) {
        return AbelianVerdict::Obstructed(AbelianObstruction::Torsion {
            factor: snf.factors[i],
            vector: snf.u_inv.column(i),
        });
    }
    // A = V [I_m 0] U is a left inverse of G.
    let mut proj = IntMatrix::zeros(m, r);
    for i in 0..m {
        proj[(i, i)] = 1;
    }
    let left_inverse = snf.v.mul(&proj).mul(&snf.u);
    AbelianVerdict::Passes {
        witness: g.mul(&left_inverse),
    }
}
