//! Dense binary matrix used for coverage graphs, inferred structures and traces.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Row-major `rows × cols` matrix of bits.
///
/// Serialized as an array of row strings made of `'0'` / `'1'` characters.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    data: Vec<bool>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![false; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Build from nested rows of 0/1 values.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != ncols {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {ncols}",
                    row.len()
                )));
            }
            for &v in row {
                match v {
                    0 => data.push(false),
                    1 => data.push(true),
                    other => {
                        return Err(Error::InvalidInput(format!(
                            "binary matrix entry {other} is not 0 or 1"
                        )))
                    }
                }
            }
        }
        Ok(Self {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    /// Build from columns given as bit vectors of equal length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<bool>]) -> Result<Self> {
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::DimensionMismatch(format!(
                    "column {j} has {} entries, expected {rows}",
                    c.len()
                )));
            }
        }
        Ok(Self::from_fn(rows, columns.len(), |i, j| columns[j][i]))
    }

    pub fn parse_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let bytes: Vec<Vec<u8>> = rows
            .iter()
            .map(|r| {
                r.as_ref()
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(0u8),
                        '1' => Ok(1u8),
                        other => Err(Error::InvalidInput(format!(
                            "unexpected character {other:?} in bit row"
                        ))),
                    })
                    .collect::<Result<Vec<u8>>>()
            })
            .collect::<Result<_>>()?;
        Self::from_rows(&bytes)
    }

    pub fn row_strings(&self) -> Vec<String> {
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|&b| if b { '1' } else { '0' })
                    .collect()
            })
            .collect()
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[bool] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<bool> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<bool>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn column_weight(&self, j: usize) -> usize {
        (0..self.rows).filter(|&i| self.get(i, j)).count()
    }

    pub fn row_weight(&self, i: usize) -> usize {
        self.row(i).iter().filter(|&&b| b).count()
    }

    /// Column `j` packed into an integer, row `i` at bit `i`.
    ///
    /// Only valid for matrices with at most 64 rows.
    pub fn column_mask(&self, j: usize) -> u64 {
        debug_assert!(self.rows <= 64);
        (0..self.rows)
            .filter(|&i| self.get(i, j))
            .fold(0u64, |acc, i| acc | (1 << i))
    }

    /// Keep only the listed columns, in the listed order.
    pub fn select_columns(&self, keep: &[usize]) -> Self {
        Self::from_fn(self.rows, keep.len(), |i, j| self.get(i, keep[j]))
    }

    pub fn select_rows(&self, keep: &[usize]) -> Self {
        Self::from_fn(keep.len(), self.cols, |i, j| self.get(keep[i], j))
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.row_strings()).finish()
    }
}

impl Serialize for BitMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.row_strings().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BitMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<String>::deserialize(deserializer)?;
        BitMatrix::parse_rows(&rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_strings_roundtrip() {
        let m = BitMatrix::from_rows(&[[1u8, 0, 1], [0, 1, 1]]).unwrap();
        assert_eq!(m.row_strings(), vec!["101", "011"]);
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, r#"["101","011"]"#);
        let back: BitMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn rejects_ragged_and_non_binary() {
        assert!(BitMatrix::from_rows(&[vec![1u8, 0], vec![1u8]]).is_err());
        assert!(BitMatrix::from_rows(&[[2u8]]).is_err());
        assert!(BitMatrix::parse_rows(&["10", "1x"]).is_err());
    }

    #[test]
    fn masks_and_weights() {
        let m = BitMatrix::from_rows(&[[1u8, 0], [1, 1], [0, 1]]).unwrap();
        assert_eq!(m.column_mask(0), 0b011);
        assert_eq!(m.column_mask(1), 0b110);
        assert_eq!(m.column_weight(1), 2);
        assert_eq!(m.row_weight(1), 2);
        assert_eq!(m.select_columns(&[1]).column(0), vec![false, true, true]);
    }
}
