//! Exact integers, rationals, vectors and integer matrix normal forms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Int = BigInt;
pub type Rational = BigRational;
pub type IntVec = Vec<Int>;
pub type RatVec = Vec<Rational>;

pub fn int(v: i64) -> Int {
    Int::from(v)
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(Int::from(n), Int::from(d))
}

pub fn rat_int(n: &Int) -> Rational {
    Rational::from_integer(n.clone())
}

pub fn ivec(v: &[i64]) -> IntVec {
    v.iter().map(|&x| Int::from(x)).collect()
}

pub fn to_rat_vec(v: &[Int]) -> RatVec {
    v.iter().map(rat_int).collect()
}

/// Returns `(⌊r⌋, ⌈r⌉)`.
pub fn floor_ceil(r: &Rational) -> (Int, Int) {
    (r.floor().to_integer(), r.ceil().to_integer())
}

pub fn dot(a: &[Int], b: &[Int]) -> Int {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_q(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn dot_iq(a: &[Int], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| rat_int(x) * y).sum()
}

pub fn add_vec(a: &[Int], b: &[Int]) -> IntVec {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_vec(a: &[Int], b: &[Int]) -> IntVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn scale_vec(a: &[Int], s: &Int) -> IntVec {
    a.iter().map(|x| x * s).collect()
}

pub fn is_zero_vec(a: &[Int]) -> bool {
    a.iter().all(|x| x.is_zero())
}

pub fn gcd_vec(a: &[Int]) -> Int {
    a.iter().fold(Int::zero(), |g, x| g.gcd(x))
}

/// Divides by the gcd of the coordinates; the zero vector is returned unchanged.
pub fn primitive(a: &[Int]) -> IntVec {
    let g = gcd_vec(a);
    if g.is_zero() || g.is_one() {
        return a.to_vec();
    }
    a.iter().map(|x| x / &g).collect()
}

/// Scales a rational vector to the primitive integer vector on the same ray.
pub fn primitive_of_rat(a: &[Rational]) -> IntVec {
    let l = a.iter().fold(Int::one(), |l, x| l.lcm(x.denom()));
    let v: IntVec = a.iter().map(|x| (x * rat_int(&l)).to_integer()).collect();
    primitive(&v)
}

pub fn lcm_denoms(a: &[Rational]) -> Int {
    a.iter().fold(Int::one(), |l, x| l.lcm(x.denom()))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    pub rows: Vec<IntVec>,
    pub ncols: usize,
}

impl IntMatrix {
    pub fn new(rows: Vec<IntVec>, ncols: usize) -> Self {
        assert!(rows.iter().all(|r| r.len() == ncols), "ragged matrix");
        IntMatrix { rows, ncols }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let ncols = rows.first().map_or(0, |r| r.len());
        IntMatrix::new(rows.iter().map(|r| ivec(r)).collect(), ncols)
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Int::one() } else { Int::zero() }).collect())
            .collect();
        IntMatrix { rows, ncols: n }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.ncols, other.nrows());
        let rows = self
            .rows
            .iter()
            .map(|r| {
                (0..other.ncols)
                    .map(|j| r.iter().zip(&other.rows).map(|(a, orow)| a * &orow[j]).sum())
                    .collect()
            })
            .collect();
        IntMatrix { rows, ncols: other.ncols }
    }

    pub fn transpose(&self) -> IntMatrix {
        let rows = (0..self.ncols)
            .map(|j| self.rows.iter().map(|r| r[j].clone()).collect())
            .collect();
        IntMatrix { rows, ncols: self.nrows() }
    }

    /// Determinant of a square matrix (fraction-free elimination).
    pub fn det(&self) -> Int {
        assert_eq!(self.nrows(), self.ncols);
        let q: Vec<RatVec> = self.rows.iter().map(|r| to_rat_vec(r)).collect();
        det_q(q).to_integer()
    }
}

fn det_q(mut m: Vec<RatVec>) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let piv = m[c][c].clone();
        det *= &piv;
        for r in c + 1..n {
            if m[r][c].is_zero() {
                continue;
            }
            let f = &m[r][c] / &piv;
            for k in c..n {
                let t = &f * &m[c][k];
                m[r][k] -= t;
            }
        }
    }
    det
}

/// Row-style Hermite normal form: returns `(H, U)` with `U` unimodular and `H = U·M`.
/// Pivots are positive, entries above each pivot lie in `[0, pivot)`, zero rows come last.
pub fn hermite_normal_form(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let nr = m.nrows();
    let nc = m.ncols;
    let mut h = m.rows.clone();
    let mut u = IntMatrix::identity(nr).rows;
    let mut prow = 0;
    for c in 0..nc {
        if prow == nr {
            break;
        }
        // Euclid on column c below prow.
        loop {
            let nz: Vec<usize> = (prow..nr).filter(|&r| !h[r][c].is_zero()).collect();
            if nz.is_empty() {
                break;
            }
            let best = *nz.iter().min_by_key(|&&r| h[r][c].abs()).unwrap();
            h.swap(prow, best);
            u.swap(prow, best);
            let mut done = true;
            for r in prow + 1..nr {
                if h[r][c].is_zero() {
                    continue;
                }
                let q = h[r][c].div_floor(&h[prow][c]);
                row_axpy(&mut h, r, prow, &q);
                row_axpy(&mut u, r, prow, &q);
                if !h[r][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[prow][c].is_zero() {
            continue;
        }
        if h[prow][c].is_negative() {
            negate_row(&mut h[prow]);
            negate_row(&mut u[prow]);
        }
        for r in 0..prow {
            let q = h[r][c].div_floor(&h[prow][c]);
            if !q.is_zero() {
                row_axpy(&mut h, r, prow, &q);
                row_axpy(&mut u, r, prow, &q);
            }
        }
        prow += 1;
    }
    (IntMatrix { rows: h, ncols: nc }, IntMatrix { rows: u, ncols: nr })
}

fn row_axpy(m: &mut [IntVec], target: usize, src: usize, q: &Int) {
    let s = m[src].clone();
    for (t, v) in m[target].iter_mut().zip(&s) {
        *t -= q * v;
    }
}

fn negate_row(r: &mut IntVec) {
    for v in r.iter_mut() {
        *v = -v.clone();
    }
}

/// Diagonal of the Smith normal form (nonzero elementary divisors only).
pub fn elementary_divisors(m: &IntMatrix) -> Vec<Int> {
    let mut a = m.rows.clone();
    let nr = a.len();
    let nc = m.ncols;
    let mut out = Vec::new();
    let mut t = 0;
    while t < nr.min(nc) {
        // smallest nonzero entry in the lower-right block
        let mut best: Option<(usize, usize)> = None;
        for (r, row) in a.iter().enumerate().skip(t) {
            for (c, v) in row.iter().enumerate().skip(t) {
                if !v.is_zero() && best.is_none_or(|(br, bc)| v.abs() < a[br][bc].abs()) {
                    best = Some((r, c));
                }
            }
        }
        let Some((br, bc)) = best else { break };
        a.swap(t, br);
        for row in a.iter_mut() {
            row.swap(t, bc);
        }
        let mut clean = true;
        for r in t + 1..nr {
            if !a[r][t].is_zero() {
                let q = a[r][t].div_floor(&a[t][t]);
                row_axpy(&mut a, r, t, &q);
                if !a[r][t].is_zero() {
                    clean = false;
                }
            }
        }
        for c in t + 1..nc {
            if !a[t][c].is_zero() {
                let q = a[t][c].div_floor(&a[t][t]);
                for row in a.iter_mut() {
                    let v = q.clone() * &row[t];
                    row[c] -= v;
                }
                if !a[t][c].is_zero() {
                    clean = false;
                }
            }
        }
        if !clean {
            continue;
        }
        // divisibility condition
        let p = a[t][t].clone();
        let bad = (t + 1..nr).find(|&r| (t + 1..nc).any(|c| !a[r][c].is_multiple_of(&p)));
        if let Some(r) = bad {
            let s = a[r].clone();
            for (x, y) in a[t].iter_mut().zip(&s) {
                *x += y;
            }
            continue;
        }
        out.push(p.abs());
        t += 1;
    }
    out
}

/// True iff the vectors extend to a ℤ-basis of ℤ^d.
pub fn is_lattice_basis_part(vectors: &[IntVec]) -> bool {
    if vectors.is_empty() {
        return true;
    }
    let d = vectors[0].len();
    let m = IntMatrix::new(vectors.to_vec(), d);
    let divs = elementary_divisors(&m);
    divs.len() == vectors.len() && divs.iter().all(|x| x.is_one())
}

/// Rank over ℚ.
pub fn rank_q(rows: &[RatVec]) -> usize {
    row_echelon(rows).0.len()
}

pub fn rank_i(rows: &[IntVec]) -> usize {
    let q: Vec<RatVec> = rows.iter().map(|r| to_rat_vec(r)).collect();
    rank_q(&q)
}

/// Reduced row echelon form; returns the nonzero rows and their pivot columns.
pub fn row_echelon(rows: &[RatVec]) -> (Vec<RatVec>, Vec<usize>) {
    let mut m: Vec<RatVec> = rows.to_vec();
    let nc = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..nc {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        let prow = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&prow) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

/// Basis of the rational null space `{x : rows·x = 0}`, scaled to primitive integer vectors.
pub fn nullspace(rows: &[RatVec], ncols: usize) -> Vec<IntVec> {
    let (e, piv) = row_echelon(rows);
    let free: Vec<usize> = (0..ncols).filter(|c| !piv.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![Rational::zero(); ncols];
            x[f] = Rational::one();
            for (row, &p) in e.iter().zip(&piv) {
                x[p] = -row[f].clone();
            }
            primitive_of_rat(&x)
        })
        .collect()
}

pub fn nullspace_i(rows: &[IntVec], ncols: usize) -> Vec<IntVec> {
    let q: Vec<RatVec> = rows.iter().map(|r| to_rat_vec(r)).collect();
    nullspace(&q, ncols)
}

/// Saturated integer basis of `{x ∈ ℤ^n : rows·x = 0}`.
pub fn integer_kernel(rows: &[IntVec], ncols: usize) -> Vec<IntVec> {
    if rows.is_empty() {
        return IntMatrix::identity(ncols).rows;
    }
    let mt = IntMatrix::new(rows.to_vec(), ncols).transpose();
    let (h, u) = hermite_normal_form(&mt);
    h.rows
        .iter()
        .zip(u.rows)
        .filter(|(hr, _)| is_zero_vec(hr))
        .map(|(_, ur)| ur)
        .collect()
}

/// Solves `A·x = b`; returns some solution if the system is consistent.
pub fn solve_exact(a: &IntMatrix, b: &[Rational]) -> Option<RatVec> {
    let rows: Vec<RatVec> = a.rows.iter().map(|r| to_rat_vec(r)).collect();
    solve_q(&rows, b, a.ncols)
}

pub fn solve_q(a: &[RatVec], b: &[Rational], ncols: usize) -> Option<RatVec> {
    let aug: Vec<RatVec> = a
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut r = r.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let (e, piv) = row_echelon(&aug);
    if piv.contains(&ncols) {
        return None;
    }
    let mut x = vec![Rational::zero(); ncols];
    for (row, &p) in e.iter().zip(&piv) {
        x[p] = row[ncols].clone();
    }
    Some(x)
}

/// Inverse of a square integer matrix over ℚ, if invertible.
pub fn inverse_q(m: &IntMatrix) -> Option<Vec<RatVec>> {
    let n = m.nrows();
    let aug: Vec<RatVec> = m
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut v = to_rat_vec(r);
            v.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            v
        })
        .collect();
    let (e, piv) = row_echelon(&aug);
    if piv.len() < n || piv[n - 1] >= n {
        return None;
    }
    Some(e.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_ceil_examples() {
        assert_eq!(floor_ceil(&rat(3, 2)), (int(1), int(2)));
        assert_eq!(floor_ceil(&rat(-3, 2)), (int(-2), int(-1)));
        assert_eq!(floor_ceil(&rat(2, 1)), (int(2), int(2)));
    }

    #[test]
    fn hnf_examples() {
        let (h, u) = hermite_normal_form(&IntMatrix::identity(3));
        assert_eq!(h, IntMatrix::identity(3));
        assert_eq!(u, IntMatrix::identity(3));
        let (h, _) = hermite_normal_form(&IntMatrix::from_i64(&[&[0, 1], &[1, 0]]));
        assert_eq!(h, IntMatrix::identity(2));
        let m = IntMatrix::from_i64(&[&[2, 0], &[0, 3]]);
        let (h, _) = hermite_normal_form(&m);
        assert_eq!(h, m);
    }

    #[test]
    fn lattice_basis_examples() {
        assert!(is_lattice_basis_part(&[ivec(&[1, 0]), ivec(&[0, 1])]));
        assert!(is_lattice_basis_part(&[ivec(&[1, 1]), ivec(&[1, 2])]));
        assert!(!is_lattice_basis_part(&[ivec(&[1, 0]), ivec(&[0, 2])]));
        assert!(is_lattice_basis_part(&[ivec(&[2, 3, 0])]));
        assert!(!is_lattice_basis_part(&[ivec(&[2, 4, 0])]));
    }

    #[test]
    fn solve_examples() {
        let b = vec![rat(3, 1), rat(-1, 2)];
        assert_eq!(solve_exact(&IntMatrix::identity(2), &b), Some(b.clone()));
        assert_eq!(solve_exact(&IntMatrix::from_i64(&[&[2]]), &[rat(1, 1)]), Some(vec![rat(1, 2)]));
        let a = IntMatrix::from_i64(&[&[1, 1], &[1, -1]]);
        assert_eq!(solve_exact(&a, &[rat(2, 1), rat(0, 1)]), Some(vec![rat(1, 1), rat(1, 1)]));
        let a = IntMatrix::from_i64(&[&[1, 1], &[2, 2]]);
        assert_eq!(solve_exact(&a, &[rat(1, 1), rat(3, 1)]), None);
    }

    #[test]
    fn kernel_is_saturated() {
        let k = integer_kernel(&[ivec(&[2, 4, 6])], 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(dot(v, &ivec(&[2, 4, 6])).is_zero());
        }
        assert!(is_lattice_basis_part(&k));
    }
}
