//! Exact rational linear algebra used by the complexity classifier: span
//! membership over ℚ, computed with big-rational Gaussian elimination so that
//! no integer system can overflow or suffer rounding.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

fn to_rational_row(row: &[i64]) -> Vec<BigRational> {
    row.iter()
        .map(|&x| BigRational::from(BigInt::from(x)))
        .collect()
}

/// True iff `target` lies in the ℚ-linear span of `rows`. All rows and the
/// target must share one length.
pub fn in_span(rows: &[Vec<i64>], target: &[i64]) -> bool {
    let width = target.len();
    debug_assert!(rows.iter().all(|r| r.len() == width));

    // Maintain a row-echelon basis: each basis row has a pivot column,
    // strictly increasing down the list, normalized to a leading 1.
    let mut basis: Vec<(usize, Vec<BigRational>)> = Vec::new();
    for row in rows {
        let mut v = to_rational_row(row);
        for (pivot, b) in &basis {
            if !v[*pivot].is_zero() {
                let c = v[*pivot].clone();
                for (x, y) in v.iter_mut().zip(b.iter()) {
                    *x -= &c * y;
                }
            }
        }
        if let Some(pivot) = v.iter().position(|x| !x.is_zero()) {
            let lead = v[pivot].clone();
            for x in v.iter_mut() {
                *x /= &lead;
            }
            let at = basis.partition_point(|(p, _)| *p < pivot);
            basis.insert(at, (pivot, v));
        }
    }

    let mut t = to_rational_row(target);
    for (pivot, b) in &basis {
        if !t[*pivot].is_zero() {
            let c = t[*pivot].clone();
            for (x, y) in t.iter_mut().zip(b.iter()) {
                *x -= &c * y;
            }
        }
    }
    t.iter().all(|x| x.is_zero())
}
