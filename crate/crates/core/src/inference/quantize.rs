use crate::bits::BitMatrix;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// The entry of largest magnitude, keeping its sign.
///
/// Equal magnitudes resolve to the minimum.
pub fn maxstep<S: Scalar>(v: &[S]) -> S {
    let hi = v.iter().copied().fold(S::neg_infinity(), S::max);
    let lo = v.iter().copied().fold(S::infinity(), S::min);
    if v.is_empty() {
        S::zero()
    } else if hi.abs() > lo.abs() {
        hi
    } else {
        lo
    }
}

/// Binary structure read off a mixing matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Quantized {
    pub structure: BitMatrix,
    /// For each kept column, the mixing columns it came from.
    pub sources: Vec<Vec<usize>>,
}

/// Threshold each column of `mixing` after scaling it by `1 / maxstep`.
pub fn quantize<S: Scalar>(mixing: &Matrix<S>, threshold: S) -> Quantized {
    let scale: Vec<S> = (0..mixing.cols())
        .map(|j| {
            let ms = maxstep(&mixing.column(j));
            if ms == S::zero() {
                S::zero()
            } else {
                S::one() / ms
            }
        })
        .collect();
    quantize_with_scaling(mixing, &scale, threshold)
}

/// Threshold `mixing[i][j] * scale[j]` at `threshold`.
///
/// All-zero columns are dropped and identical columns merged, keeping first
/// appearance order.
pub fn quantize_with_scaling<S: Scalar>(
    mixing: &Matrix<S>,
    scale: &[S],
    threshold: S,
) -> Quantized {
    assert_eq!(mixing.cols(), scale.len(), "one scale per mixing column");
    let m = mixing.rows();
    let mut columns: Vec<Vec<bool>> = Vec::new();
    let mut sources: Vec<Vec<usize>> = Vec::new();
    for j in 0..mixing.cols() {
        let col: Vec<bool> = (0..m)
            .map(|i| mixing[(i, j)] * scale[j] - threshold > S::zero())
            .collect();
        if !col.iter().any(|&b| b) {
            continue;
        }
        match columns.iter().position(|c| *c == col) {
            Some(k) => sources[k].push(j),
            None => {
                columns.push(col);
                sources.push(vec![j]);
            }
        }
    }
    Quantized {
        structure: BitMatrix::from_columns(m, &columns).expect("columns have m rows"),
        sources,
    }
}
