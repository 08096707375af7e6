//! Bit-packed matrices over F_2, 64 columns per word.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> BitMatrix {
        let words = cols.div_ceil(64);
        BitMatrix { rows, cols, words, data: vec![0; rows * words] }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.data[i * self.words + j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, v: bool) {
        let w = &mut self.data[i * self.words + j / 64];
        if v {
            *w |= 1 << (j % 64);
        } else {
            *w &= !(1 << (j % 64));
        }
    }

    pub fn flip(&mut self, i: usize, j: usize) {
        self.data[i * self.words + j / 64] ^= 1 << (j % 64);
    }

    fn xor_rows(&mut self, dst: usize, src: usize, from_word: usize) {
        let w = self.words;
        let (d, s) = (dst * w, src * w);
        for k in from_word..w {
            self.data[d + k] ^= self.data[s + k];
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for k in 0..self.words {
                self.data.swap(a * self.words + k, b * self.words + k);
            }
        }
    }

    /// Gauss-Jordan elimination in place on a copy; returns the reduced matrix
    /// and its pivot columns.
    pub fn rref(&self) -> (BitMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| m.get(i, c)) else { continue };
            m.swap_rows(r, p);
            let fw = c / 64;
            for i in 0..m.rows {
                if i != r && m.get(i, c) {
                    m.xor_rows(i, r, fw);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Solves `M x = b`; on failure returns `Err(y)` with `y^T M = 0`, `y^T b = 1`.
    pub fn solve(&self, b: &[bool]) -> Result<Vec<bool>, Vec<bool>> {
        let (m, n) = (self.rows, self.cols);
        let mut aug = BitMatrix::zeros(m, n + 1 + m);
        for i in 0..m {
            for j in 0..n {
                if self.get(i, j) {
                    aug.set(i, j, true);
                }
            }
            aug.set(i, n, b[i]);
            aug.set(i, n + 1 + i, true);
        }
        let (red, pivots) = aug.rref();
        if let Some(ri) = pivots.iter().position(|&p| p == n) {
            return Err((0..m).map(|i| red.get(ri, n + 1 + i)).collect());
        }
        let mut x = vec![false; n];
        for (ri, &pc) in pivots.iter().enumerate() {
            if pc < n {
                x[pc] = red.get(ri, n);
            }
        }
        Ok(x)
    }
}
