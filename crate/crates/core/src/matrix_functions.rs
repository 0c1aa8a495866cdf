//! Exact permanents and hafnians of complex matrices.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::{CMatrix, CompensatedSum, ONE, ZERO};
use crate::pattern::DetectionPattern;

pub const DEFAULT_PERMANENT_LIMIT: usize = 24;
pub const DEFAULT_HAFNIAN_LIMIT: usize = 20;
/// Size guard for the n!-cost reference permanent.
pub const NAIVE_PERMANENT_LIMIT: usize = 10;

fn check_square(a: &CMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    Ok(a.nrows())
}

pub fn permanent(a: &CMatrix) -> Result<Complex64> {
    permanent_with_limit(a, DEFAULT_PERMANENT_LIMIT)
}

/// Ryser inclusion-exclusion over column subsets visited in Gray-code order,
/// so each step toggles one column and updates the row sums in O(n).
pub fn permanent_with_limit(a: &CMatrix, limit: usize) -> Result<Complex64> {
    let n = check_square(a)?;
    if n > limit || n >= 63 {
        return Err(Error::CostLimit {
            what: "permanent",
            dim: n,
            limit,
        });
    }
    if n == 0 {
        return Ok(ONE);
    }
    // column-major copy so a column toggle reads contiguous memory
    let cols: Vec<Vec<Complex64>> = (0..n).map(|j| a.column(j).iter().copied().collect()).collect();
    let mut row_sums = vec![ZERO; n];
    let mut in_set = vec![false; n];
    let mut size = 0usize;
    let mut acc = CompensatedSum::new();
    for k in 1u64..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        let col = &cols[j];
        if in_set[j] {
            for (r, c) in row_sums.iter_mut().zip(col) {
                *r -= c;
            }
            size -= 1;
        } else {
            for (r, c) in row_sums.iter_mut().zip(col) {
                *r += c;
            }
            size += 1;
        }
        in_set[j] = !in_set[j];
        let prod = row_sums.iter().fold(ONE, |p, r| p * r);
        if size.is_multiple_of(2) {
            acc.add(prod);
        } else {
            acc.add(-prod);
        }
    }
    let total = acc.value();
    Ok(if n % 2 == 0 { total } else { -total })
}

/// Direct sum over all n! permutations. Reference implementation only.
pub fn permanent_naive(a: &CMatrix) -> Result<Complex64> {
    let n = check_square(a)?;
    if n > NAIVE_PERMANENT_LIMIT {
        return Err(Error::CostLimit {
            what: "naive permanent",
            dim: n,
            limit: NAIVE_PERMANENT_LIMIT,
        });
    }
    fn rec(a: &CMatrix, row: usize, used: &mut [bool], prod: Complex64, acc: &mut CompensatedSum) {
        if row == used.len() {
            acc.add(prod);
            return;
        }
        for col in 0..used.len() {
            if !used[col] {
                used[col] = true;
                rec(a, row + 1, used, prod * a[(row, col)], acc);
                used[col] = false;
            }
        }
    }
    let mut acc = CompensatedSum::new();
    rec(a, 0, &mut vec![false; n], ONE, &mut acc);
    Ok(acc.value())
}

pub fn hafnian(b: &CMatrix) -> Result<Complex64> {
    hafnian_with_limit(b, DEFAULT_HAFNIAN_LIMIT)
}

/// Sum over all `(n-1)!!` perfect matchings, enumerated by always pairing the
/// lowest unmatched index. Only entries with `i < j` are read; the diagonal
/// never contributes.
pub fn hafnian_with_limit(b: &CMatrix, limit: usize) -> Result<Complex64> {
    let n = check_hafnian_input(b, limit)?;
    if n == 0 {
        return Ok(ONE);
    }
    let upper = UpperTriangle::new(b);
    let mut acc = CompensatedSum::new();
    upper.expand(full_mask(n), ONE, &mut acc);
    Ok(acc.value())
}

/// Same sum with the first-level subtrees evaluated on the rayon pool.
///
/// Subtree totals are combined in index order, so the value is identical for
/// any thread count, though it may differ in the last bits from [`hafnian`].
pub fn hafnian_parallel(b: &CMatrix, limit: usize) -> Result<Complex64> {
    let n = check_hafnian_input(b, limit)?;
    if n == 0 {
        return Ok(ONE);
    }
    let upper = UpperTriangle::new(b);
    let rest = full_mask(n) & !1;
    let partials: Vec<Complex64> = (1..n)
        .into_par_iter()
        .map(|j| {
            let mut acc = CompensatedSum::new();
            upper.expand(rest & !(1u64 << j), upper.get(0, j), &mut acc);
            acc.value()
        })
        .collect();
    let mut acc = CompensatedSum::new();
    for p in partials {
        acc.add(p);
    }
    Ok(acc.value())
}

fn check_hafnian_input(b: &CMatrix, limit: usize) -> Result<usize> {
    let n = check_square(b)?;
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    if n > limit || n > 64 {
        return Err(Error::CostLimit {
            what: "hafnian",
            dim: n,
            limit,
        });
    }
    Ok(n)
}

fn full_mask(n: usize) -> u64 {
    if n == 64 { u64::MAX } else { (1u64 << n) - 1 }
}

struct UpperTriangle {
    n: usize,
    data: Vec<Complex64>,
}

impl UpperTriangle {
    fn new(b: &CMatrix) -> Self {
        let n = b.nrows();
        Self {
            n,
            data: (0..n * n).map(|idx| b[(idx / n, idx % n)]).collect(),
        }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    fn expand(&self, mask: u64, prod: Complex64, acc: &mut CompensatedSum) {
        if mask == 0 {
            acc.add(prod);
            return;
        }
        let i = mask.trailing_zeros() as usize;
        let rest = mask & !(1u64 << i);
        let mut partners = rest;
        while partners != 0 {
            let j = partners.trailing_zeros() as usize;
            partners &= partners - 1;
            self.expand(rest & !(1u64 << j), prod * self.get(i, j), acc);
        }
    }
}

/// Principal submatrix on the detected modes, in ascending mode order.
pub fn submatrix_by_pattern(m: &CMatrix, pattern: &DetectionPattern) -> Result<CMatrix> {
    let dim = check_square(m)?;
    if pattern.modes() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: pattern.modes(),
            context: "pattern length vs matrix dimension",
        });
    }
    let idx = pattern.detected();
    Ok(CMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    /// Reference hafnian: recursive pairing over an explicit index list.
    fn hafnian_reference(b: &CMatrix) -> Complex64 {
        fn rec(b: &CMatrix, idx: &[usize]) -> Complex64 {
            if idx.is_empty() {
                return ONE;
            }
            let (first, rest) = (idx[0], &idx[1..]);
            let mut total = ZERO;
            for (pos, &j) in rest.iter().enumerate() {
                let remaining: Vec<usize> =
                    rest.iter().enumerate().filter(|(p, _)| *p != pos).map(|(_, &x)| x).collect();
                total += b[(first.min(j), first.max(j))] * rec(b, &remaining);
            }
            total
        }
        rec(b, &(0..b.nrows()).collect::<Vec<_>>())
    }

    fn block(p: &CMatrix) -> CMatrix {
        let n = p.nrows();
        let mut b = CMatrix::zeros(2 * n, 2 * n);
        b.view_mut((0, n), (n, n)).copy_from(p);
        b.view_mut((n, 0), (n, n)).copy_from(&p.transpose());
        b
    }

    #[test]
    fn small_permanents() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(2., 0.), c(3., 0.), c(4., 0.)]);
        assert_eq!(permanent(&a).unwrap(), c(10., 0.));
        let ones = CMatrix::from_element(3, 3, ONE);
        assert_eq!(permanent(&ones).unwrap(), c(6., 0.));
        assert_eq!(permanent(&CMatrix::zeros(0, 0)).unwrap(), ONE);
    }

    #[test]
    fn ryser_matches_naive_oracle() {
        for seed in 0..5 {
            let a = random_matrix(5, seed);
            let fast = permanent(&a).unwrap();
            let slow = permanent_naive(&a).unwrap();
            assert!((fast - slow).norm() <= 1e-12 * slow.norm().max(1.0), "{fast} vs {slow}");
        }
    }

    #[test]
    fn permanent_cost_limit() {
        let a = CMatrix::identity(5, 5);
        assert!(matches!(permanent_with_limit(&a, 4), Err(Error::CostLimit { .. })));
        assert!(matches!(permanent_naive(&CMatrix::identity(11, 11)), Err(Error::CostLimit { .. })));
        assert!(matches!(permanent(&CMatrix::zeros(2, 3)), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn small_hafnians() {
        let a = c(0.3, -1.2);
        let b = CMatrix::from_row_slice(2, 2, &[ZERO, a, a, ZERO]);
        assert_eq!(hafnian(&b).unwrap(), a);
        let mut ones = CMatrix::from_element(4, 4, ONE);
        ones.fill_diagonal(ZERO);
        assert_eq!(hafnian(&ones).unwrap(), c(3., 0.));
        assert_eq!(hafnian(&CMatrix::zeros(0, 0)).unwrap(), ONE);
    }

    #[test]
    fn hafnian_errors() {
        assert!(matches!(hafnian(&CMatrix::identity(3, 3)), Err(Error::OddDimension(3))));
        assert!(matches!(
            hafnian_with_limit(&CMatrix::identity(8, 8), 6),
            Err(Error::CostLimit { .. })
        ));
    }

    #[test]
    fn hafnian_ignores_diagonal_and_lower_triangle() {
        let mut a = random_matrix(6, 17);
        let h = hafnian(&a).unwrap();
        a.fill_diagonal(c(99., 99.));
        a[(5, 0)] = c(-42., 7.);
        assert_eq!(hafnian(&a).unwrap(), h);
    }

    #[test]
    fn hafnian_of_block_is_permanent() {
        let p = random_matrix(3, 5);
        let h = hafnian(&block(&p)).unwrap();
        let per = permanent(&p).unwrap();
        assert!((h - per).norm() < 1e-13);
    }

    #[test]
    fn hafnian_matches_reference() {
        for seed in 0..4 {
            let mut a = random_matrix(8, seed);
            a = (&a + a.transpose()).scale(0.5);
            let h = hafnian(&a).unwrap();
            let r = hafnian_reference(&a);
            assert!((h - r).norm() < 1e-12 * r.norm().max(1.0));
        }
    }

    #[test]
    fn parallel_hafnian_agrees_and_is_stable() {
        let mut a = random_matrix(12, 99);
        a = (&a + a.transpose()).scale(0.5);
        let s = hafnian(&a).unwrap();
        let p1 = hafnian_parallel(&a, 20).unwrap();
        let p2 = hafnian_parallel(&a, 20).unwrap();
        assert_eq!(p1, p2);
        assert!((s - p1).norm() < 1e-12 * s.norm().max(1.0));
    }

    #[test]
    fn submatrix_selection() {
        let m = CMatrix::from_fn(3, 3, |i, j| c((10 * (i + 1) + j + 1) as f64, 0.));
        let p = DetectionPattern::new(vec![true, false, true]);
        let s = submatrix_by_pattern(&m, &p).unwrap();
        assert_eq!(s, CMatrix::from_row_slice(2, 2, &[c(11., 0.), c(13., 0.), c(31., 0.), c(33., 0.)]));
        assert_eq!(submatrix_by_pattern(&m, &DetectionPattern::ones(3)).unwrap(), m);
        assert_eq!(submatrix_by_pattern(&m, &DetectionPattern::zeros(3)).unwrap().nrows(), 0);
        assert!(submatrix_by_pattern(&m, &DetectionPattern::zeros(2)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn permanent_scaling(n in 1usize..=7, seed in any::<u64>(), q in 0.1f64..5.0) {
            let a = random_matrix(n, seed);
            let lhs = permanent(&a.scale(q)).unwrap();
            let rhs = permanent(&a).unwrap() * q.powi(n as i32);
            prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(q.powi(n as i32)));
        }

        #[test]
        fn psd_permanent_is_real_nonnegative(n in 1usize..=6, seed in any::<u64>()) {
            let g = random_matrix(n, seed);
            let h = g.adjoint() * &g;
            let per = permanent(&h).unwrap();
            let scale = h.iter().fold(0.0f64, |a, z| a.max(z.norm())).powi(n as i32);
            prop_assert!(per.im.abs() <= 1e-10 * scale);
            prop_assert!(per.re >= -1e-10 * scale);
        }

        #[test]
        fn hafnian_relabeling_invariance(seed in any::<u64>(), perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle()) {
            let mut a = random_matrix(6, seed);
            a = (&a + a.transpose()).scale(0.5);
            let b = CMatrix::from_fn(6, 6, |i, j| a[(perm[i], perm[j])]);
            let (ha, hb) = (hafnian(&a).unwrap(), hafnian(&b).unwrap());
            prop_assert!((ha - hb).norm() <= 1e-12 * ha.norm().max(1.0));
        }

        #[test]
        fn block_hafnian_equals_permanent(n in 1usize..=6, seed in any::<u64>()) {
            let p = random_matrix(n, seed);
            let h = hafnian(&block(&p)).unwrap();
            let per = permanent(&p).unwrap();
            prop_assert!((h - per).norm() <= 1e-11 * per.norm().max(1.0));
        }
    }
}
