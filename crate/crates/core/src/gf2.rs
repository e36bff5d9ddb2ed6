//! Dense bit matrices over GF(2) with row reduction, kernel bases and
//! linear solves. Rows are packed into `u64` words.

/// A rows × cols matrix over GF(2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64).max(1);
        BitMatrix {
            rows,
            cols,
            words_per_row,
            data: vec![0; rows * words_per_row],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        let w = self.data[r * self.words_per_row + c / 64];
        (w >> (c % 64)) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let idx = r * self.words_per_row + c / 64;
        let bit = 1u64 << (c % 64);
        if value {
            self.data[idx] |= bit;
        } else {
            self.data[idx] &= !bit;
        }
    }

    fn xor_row_into(&mut self, target: usize, source: usize) {
        let (t0, s0) = (target * self.words_per_row, source * self.words_per_row);
        for w in 0..self.words_per_row {
            let s = self.data[s0 + w];
            self.data[t0 + w] ^= s;
        }
    }

    /// Reduced row echelon form in place; returns the pivot column of each
    /// nonzero row, in row order.
    fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row >= self.rows {
                break;
            }
            let Some(pivot_row) = (row..self.rows).find(|&r| self.get(r, col)) else {
                continue;
            };
            if pivot_row != row {
                for w in 0..self.words_per_row {
                    self.data.swap(
                        row * self.words_per_row + w,
                        pivot_row * self.words_per_row + w,
                    );
                }
            }
            for r in 0..self.rows {
                if r != row && self.get(r, col) {
                    self.xor_row_into(r, row);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    /// Basis of the kernel {x : Ax = 0}, one `cols`-length vector per free
    /// column of the reduced form.
    pub fn nullspace(&self) -> Vec<Vec<bool>> {
        let mut reduced = self.clone();
        let pivots = reduced.rref();
        let pivot_set: Vec<bool> = {
            let mut s = vec![false; self.cols];
            for &p in &pivots {
                s[p] = true;
            }
            s
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set[free] {
                continue;
            }
            let mut v = vec![false; self.cols];
            v[free] = true;
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = reduced.get(r, free);
            }
            basis.push(v);
        }
        basis
    }

    /// One solution of Ax = b if the system is consistent.
    pub fn solve(&self, b: &[bool]) -> Option<Vec<bool>> {
        assert_eq!(b.len(), self.rows, "rhs length must equal row count");
        let mut aug = BitMatrix::zeros(self.rows, self.cols + 1);
        for (r, &rhs) in b.iter().enumerate() {
            for c in 0..self.cols {
                if self.get(r, c) {
                    aug.set(r, c, true);
                }
            }
            if rhs {
                aug.set(r, self.cols, true);
            }
        }
        let pivots = aug.rref();
        // A pivot in the augmented column means 0 = 1.
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![false; self.cols];
        for (r, &p) in pivots.iter().enumerate() {
            x[p] = aug.get(r, self.cols);
        }
        Some(x)
    }

    /// A · x over GF(2).
    pub fn mul_vec(&self, x: &[bool]) -> Vec<bool> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .filter(|&c| x[c])
                    .fold(false, |acc, c| acc ^ self.get(r, c))
            })
            .collect()
    }
}
