//! Partial Boolean functions given as lookup tables.

use std::fmt;

use crate::error::{Error, Result};

/// One cell of a communication matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Zero,
    One,
    Undefined,
}

impl Cell {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Cell::One
        } else {
            Cell::Zero
        }
    }

    pub fn bit(self) -> Option<bool> {
        match self {
            Cell::Zero => Some(false),
            Cell::One => Some(true),
            Cell::Undefined => None,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Cell::Zero => '0',
            Cell::One => '1',
            Cell::Undefined => '*',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '0' => Some(Cell::Zero),
            '1' => Some(Cell::One),
            '*' | '⊥' => Some(Cell::Undefined),
            _ => None,
        }
    }
}

/// `f : X x Y -> {0, 1, undefined}` with at least one defined cell.
#[derive(Clone, PartialEq, Eq)]
pub struct PartialFunction {
    x_count: usize,
    y_count: usize,
    cells: Vec<Cell>,
}

impl PartialFunction {
    pub fn new(x_count: usize, y_count: usize, cells: Vec<Cell>) -> Result<Self> {
        if x_count == 0 || y_count == 0 {
            return Err(Error::invariant("nonempty", "function needs at least one row and column"));
        }
        if cells.len() != x_count * y_count {
            return Err(Error::DimensionMismatch(format!(
                "{} cells for a {x_count} x {y_count} table",
                cells.len()
            )));
        }
        if cells.iter().all(|&c| c == Cell::Undefined) {
            return Err(Error::invariant("defined-cell", "every entry is undefined"));
        }
        Ok(Self { x_count, y_count, cells })
    }

    pub fn from_fn(x_count: usize, y_count: usize, mut f: impl FnMut(usize, usize) -> Cell) -> Result<Self> {
        let mut cells = Vec::with_capacity(x_count * y_count);
        for x in 0..x_count {
            for y in 0..y_count {
                cells.push(f(x, y));
            }
        }
        Self::new(x_count, y_count, cells)
    }

    pub fn constant(x_count: usize, y_count: usize, value: bool) -> Self {
        Self::from_fn(x_count, y_count, |_, _| Cell::from_bit(value)).expect("nonempty table")
    }

    /// `f((x, i), (y, j)) = x_{i xor j}` under the promise `x = y`, for `n` a power of two.
    ///
    /// Rows and columns are indexed `x * n + i` with `x` read as an `n`-bit integer.
    pub fn index_shift(n: usize) -> Result<Self> {
        if !n.is_power_of_two() || n > 16 {
            return Err(Error::InvalidArgument(format!("index_shift needs n a power of two <= 16, got {n}")));
        }
        let size = (1usize << n) * n;
        Self::from_fn(size, size, |row, col| {
            let (x, i) = (row / n, row % n);
            let (y, j) = (col / n, col % n);
            if x != y {
                Cell::Undefined
            } else {
                Cell::from_bit((x >> (i ^ j)) & 1 == 1)
            }
        })
    }

    pub fn x_count(&self) -> usize {
        self.x_count
    }

    pub fn y_count(&self) -> usize {
        self.y_count
    }

    /// Bits needed to name a column: `ceil(log2 |Y|)`.
    pub fn column_bits(&self) -> u32 {
        ceil_log2(self.y_count)
    }

    pub fn get(&self, x: usize, y: usize) -> Cell {
        self.cells[x * self.y_count + y]
    }

    pub fn row(&self, x: usize) -> &[Cell] {
        &self.cells[x * self.y_count..(x + 1) * self.y_count]
    }

    /// Defined columns of row `x` with their values, ascending in `y`.
    pub fn defined_in_row(&self, x: usize) -> impl Iterator<Item = (usize, bool)> + '_ {
        self.row(x).iter().enumerate().filter_map(|(y, c)| c.bit().map(|b| (y, b)))
    }

    pub fn defined_cells(&self) -> impl Iterator<Item = (usize, usize, bool)> + '_ {
        (0..self.x_count).flat_map(move |x| self.defined_in_row(x).map(move |(y, b)| (x, y, b)))
    }

    pub fn defined_count(&self) -> usize {
        self.cells.iter().filter(|c| c.bit().is_some()).count()
    }

    pub fn is_total(&self) -> bool {
        self.cells.iter().all(|c| c.bit().is_some())
    }
}

impl fmt::Debug for PartialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "PartialFunction({} x {})", self.x_count, self.y_count)?;
        for x in 0..self.x_count {
            let row: String = self.row(x).iter().map(|c| c.symbol()).collect();
            writeln!(f, "  {row}")?;
        }
        Ok(())
    }
}

/// `ceil(log2 n)`, with `ceil_log2(0) = ceil_log2(1) = 0`.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}
