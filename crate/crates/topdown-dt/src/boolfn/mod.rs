//! Exact representation and statistics of boolean functions `{0,1}^n -> {±1}`.
//!
//! A function is stored as a bitset of `2^n` output bits: bit `x` (reading
//! `x` as an n-bit integer whose least significant bit is coordinate 1) is 1
//! when `f(x) = +1` and 0 when `f(x) = -1`. All statistics are exact dyadic
//! rationals; nothing in this module uses floating point.

mod families;
mod io;

pub use families::{
    family_approx_monotone, family_approx_nonmonotone, family_exact_monotone,
    family_exact_nonmonotone, majority, parity, random_monotone_function, random_tree_function,
    threshold, tribes, tribes_biased, FamilyParams, Layout, LayoutBlock, TribesInfo, TribesSide,
};
pub use io::{read_layout, read_truth_table, write_layout, write_truth_table};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// Largest supported variable count: a 2^26-bit table is 8 MiB, which keeps
/// every exact operation comfortably in memory.
pub const MAX_VARS: usize = 26;

/// Masks selecting the bit positions whose index has bit `p` clear, `p < 6`.
const SUBWORD_LO_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0F0F_0F0F_0F0F_0F0F,
    0x00FF_00FF_00FF_00FF,
    0x0000_FFFF_0000_FFFF,
    0x0000_0000_FFFF_FFFF,
];

fn words_for(n: usize) -> usize {
    if n >= 6 {
        1 << (n - 6)
    } else {
        1
    }
}

fn used_mask(n: usize) -> u64 {
    if n >= 6 {
        u64::MAX
    } else {
        (1u64 << (1usize << n)) - 1
    }
}

/// Explicit truth table of a boolean function on `n ≤ 26` variables.
///
/// Restricting every variable yields the legal degenerate case `n = 0`: a
/// single-point table holding one output bit.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    n: usize,
    words: Vec<u64>,
}

impl std::fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TruthTable(n={}, ones={})", self.n, self.ones())
    }
}

impl TruthTable {
    /// Constant table on `n` variables (`value` read as ±1).
    pub fn constant(n: usize, value: i8) -> Result<Self> {
        if n > MAX_VARS {
            return Err(Error::TooManyVariables(n));
        }
        let words = if value > 0 {
            let mut w = vec![u64::MAX; words_for(n)];
            if n < 6 {
                w[0] = used_mask(n);
            }
            w
        } else {
            vec![0u64; words_for(n)]
        };
        Ok(TruthTable { n, words })
    }

    /// Builds a table by evaluating `f` on every point.
    pub fn from_fn(n: usize, mut f: impl FnMut(u32) -> bool) -> Result<Self> {
        if n > MAX_VARS {
            return Err(Error::TooManyVariables(n));
        }
        let mut words = vec![0u64; words_for(n)];
        for x in 0..(1u64 << n) {
            if f(x as u32) {
                words[(x >> 6) as usize] |= 1u64 << (x & 63);
            }
        }
        Ok(TruthTable { n, words })
    }

    pub(crate) fn from_words(n: usize, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), words_for(n));
        debug_assert!(n >= 6 || words[0] & !used_mask(n) == 0);
        TruthTable { n, words }
    }

    /// Table whose output equals coordinate `coord` (1-indexed) read as ±1.
    pub fn coordinate(n: usize, coord: usize) -> Result<Self> {
        let table = Self::constant(n, -1)?;
        Ok(table.coordinate_mask(Self::check_coord(&table, coord)?))
    }

    fn check_coord(&self, coord: usize) -> Result<usize> {
        if coord == 0 || coord > self.n {
            Err(Error::CoordOutOfRange { coord, n: self.n })
        } else {
            Ok(coord - 1)
        }
    }

    /// Bitset with bit `x` set iff bit `p` (0-indexed) of `x` is set.
    fn coordinate_mask(&self, p: usize) -> TruthTable {
        let mut words = vec![0u64; self.words.len()];
        if p >= 6 {
            let block = 1usize << (p - 6);
            let mut base = 0;
            while base < words.len() {
                for w in words.iter_mut().skip(base + block).take(block) {
                    *w = u64::MAX;
                }
                base += 2 * block;
            }
        } else {
            let hi = !SUBWORD_LO_MASKS[p] & used_mask(self.n);
            for w in words.iter_mut() {
                *w = hi;
            }
        }
        TruthTable { n: self.n, words }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_points(&self) -> u64 {
        1u64 << self.n
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    /// Number of +1 outputs.
    pub fn ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_constant(&self) -> bool {
        let ones = self.ones();
        ones == 0 || ones == self.num_points()
    }

    /// `f(x)` as ±1. `x` must have at most `n` significant bits.
    pub fn evaluate(&self, x: u32) -> i8 {
        debug_assert!((x as u64) < self.num_points());
        let bit = (self.words[(x >> 6) as usize] >> (x & 63)) & 1;
        if bit == 1 {
            1
        } else {
            -1
        }
    }

    /// Count of `x` with bit `p = 0` and `f(x) != f(x ^ 2^p)` (0-indexed `p`).
    pub(crate) fn influence_count(&self, p: usize) -> u64 {
        if p >= 6 {
            let block = 1usize << (p - 6);
            let mut count = 0u64;
            let mut base = 0;
            while base < self.words.len() {
                for t in 0..block {
                    count +=
                        (self.words[base + t] ^ self.words[base + block + t]).count_ones() as u64;
                }
                base += 2 * block;
            }
            count
        } else {
            let shift = 1u32 << p;
            let mask = SUBWORD_LO_MASKS[p];
            self.words
                .iter()
                .map(|w| ((w ^ (w >> shift)) & mask).count_ones() as u64)
                .sum()
        }
    }

    /// Influence of coordinate `i` (1-indexed): `Pr[f(x) != f(x^{⊕i})]`.
    pub fn influence(&self, i: usize) -> Result<Dyadic> {
        let p = self.check_coord(i)?;
        Ok(Dyadic::ratio(
            self.influence_count(p) as i64,
            (self.n - 1) as u32,
        ))
    }

    /// Total influence `Inf(f) = Σ_i Inf_i(f)`.
    pub fn total_influence(&self) -> Dyadic {
        let mut total = 0u64;
        for p in 0..self.n {
            total += self.influence_count(p);
        }
        if self.n == 0 {
            return Dyadic::zero();
        }
        Dyadic::ratio(total as i64, (self.n - 1) as u32)
    }

    /// `E[f]` as an exact dyadic value.
    pub fn mean(&self) -> Dyadic {
        Dyadic::ratio(
            2 * self.ones() as i64 - self.num_points() as i64,
            self.n as u32,
        )
    }

    /// `Var(f) = 4·Pr[f=-1]·Pr[f=+1]`.
    pub fn variance(&self) -> Dyadic {
        let ones = self.ones() as i64;
        let zeros = self.num_points() as i64 - ones;
        Dyadic::ratio(4 * ones * zeros, 2 * self.n as u32)
    }

    /// Number of coordinates whose flip changes `f` at `x`.
    pub fn sensitivity(&self, x: u32) -> usize {
        let fx = self.evaluate(x);
        (0..self.n)
            .filter(|&p| self.evaluate(x ^ (1u32 << p)) != fx)
            .count()
    }

    /// `2E[f(x)·x_i] - E[f(x)]` with `x_i ∈ {0,1}`; equals `Inf_i(f)` for
    /// monotone `f`.
    pub fn correlation(&self, i: usize) -> Result<Dyadic> {
        let p = self.check_coord(i)?;
        let ones_hi = self.ones_where_coord_set(p) as i64;
        let ones = self.ones() as i64;
        Ok(Dyadic::ratio(4 * ones_hi - 2 * ones, self.n as u32))
    }

    pub(crate) fn ones_where_coord_set(&self, p: usize) -> u64 {
        if p >= 6 {
            let block = 1usize << (p - 6);
            let mut count = 0u64;
            let mut base = 0;
            while base < self.words.len() {
                for t in 0..block {
                    count += self.words[base + block + t].count_ones() as u64;
                }
                base += 2 * block;
            }
            count
        } else {
            let mask = !SUBWORD_LO_MASKS[p];
            self.words
                .iter()
                .map(|w| (w & mask).count_ones() as u64)
                .sum()
        }
    }

    /// Exact disagreement probability `Pr[f != g]`.
    pub fn error(&self, other: &TruthTable) -> Result<Dyadic> {
        if self.n != other.n {
            return Err(Error::ArityMismatch(self.n, other.n));
        }
        let diff: u64 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as u64)
            .sum();
        Ok(Dyadic::ratio(diff as i64, self.n as u32))
    }

    /// `min(error(f,-1), error(f,+1))`: distance to the nearest constant.
    pub fn error_pm1(&self) -> Dyadic {
        let ones = self.ones();
        let zeros = self.num_points() - ones;
        Dyadic::ratio(ones.min(zeros) as i64, self.n as u32)
    }

    /// True iff no coordinate edge decreases `f`.
    #[allow(clippy::needless_range_loop)]
    pub fn is_monotone(&self) -> bool {
        for p in 0..self.n {
            if p >= 6 {
                let block = 1usize << (p - 6);
                let mut base = 0;
                while base < self.words.len() {
                    for t in 0..block {
                        if self.words[base + t] & !self.words[base + block + t] != 0 {
                            return false;
                        }
                    }
                    base += 2 * block;
                }
            } else {
                let shift = 1u32 << p;
                let mask = SUBWORD_LO_MASKS[p];
                for w in &self.words {
                    if (w & !(w >> shift)) & mask != 0 {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Fixes coordinate `i` (1-indexed) to `b`; remaining coordinates keep
    /// their relative order.
    pub fn restrict_one(&self, i: usize, b: bool) -> Result<TruthTable> {
        let p = self.check_coord(i)?;
        let out_n = self.n - 1;
        let mut out = vec![0u64; words_for(out_n)];
        if p >= 6 {
            let block = 1usize << (p - 6);
            let offset = if b { block } else { 0 };
            let mut src = 0;
            let mut dst = 0;
            while src < self.words.len() {
                out[dst..dst + block]
                    .copy_from_slice(&self.words[src + offset..src + offset + block]);
                src += 2 * block;
                dst += block;
            }
        } else if self.words.len() == 1 {
            out[0] = pack_half(self.words[0], p, b) & used_mask(out_n);
        } else {
            for (k, o) in out.iter_mut().enumerate() {
                let lo = pack_half(self.words[2 * k], p, b);
                let hi = pack_half(self.words[2 * k + 1], p, b);
                *o = lo | (hi << 32);
            }
        }
        Ok(TruthTable {
            n: out_n,
            words: out,
        })
    }

    /// Applies a whole restriction (coordinates refer to this table's
    /// numbering; they are removed from highest to lowest so positions stay
    /// valid).
    pub fn restrict(&self, r: &Restriction) -> Result<TruthTable> {
        r.validate(self.n)?;
        let mut sorted = r.assignments().to_vec();
        sorted.sort_by_key(|&(coord, _)| std::cmp::Reverse(coord));
        let mut t = self.clone();
        for (coord, bit) in sorted {
            t = t.restrict_one(coord, bit)?;
        }
        Ok(t)
    }

    /// Inserts a fresh irrelevant coordinate at 1-indexed position `i`
    /// (existing coordinates at `i` and above shift up by one).
    pub fn lift_insert(&self, i: usize) -> Result<TruthTable> {
        if i == 0 || i > self.n + 1 {
            return Err(Error::CoordOutOfRange {
                coord: i,
                n: self.n + 1,
            });
        }
        if self.n + 1 > MAX_VARS {
            return Err(Error::TooManyVariables(self.n + 1));
        }
        let p = i - 1;
        let out_n = self.n + 1;
        let mut out = vec![0u64; words_for(out_n)];
        if p >= 6 {
            let block = 1usize << (p - 6);
            let mut src = 0;
            let mut dst = 0;
            while src < self.words.len() {
                out[dst..dst + block].copy_from_slice(&self.words[src..src + block]);
                out[dst + block..dst + 2 * block].copy_from_slice(&self.words[src..src + block]);
                src += block;
                dst += 2 * block;
            }
        } else if out.len() == 1 {
            out[0] = spread_double(self.words[0], p) & used_mask(out_n);
        } else {
            for (k, w) in self.words.iter().enumerate() {
                out[2 * k] = spread_double(w & 0xFFFF_FFFF, p);
                out[2 * k + 1] = spread_double(w >> 32, p);
            }
        }
        Ok(TruthTable {
            n: out_n,
            words: out,
        })
    }

    /// Bitwise combine: `if cond { a } else { b }` pointwise (+1 treated as
    /// true in `cond`).
    pub fn select(cond: &TruthTable, a: &TruthTable, b: &TruthTable) -> Result<TruthTable> {
        if cond.n != a.n || cond.n != b.n {
            return Err(Error::ArityMismatch(cond.n, a.n.max(b.n)));
        }
        let words = cond
            .words
            .iter()
            .zip(a.words.iter().zip(&b.words))
            .map(|(c, (x, y))| (c & x) | (!c & y))
            .collect();
        Ok(TruthTable { n: cond.n, words })
    }

    /// Pointwise XOR as ±1 functions (+1 where outputs differ... i.e. parity
    /// of the two indicator bits).
    pub fn xor(&self, other: &TruthTable) -> Result<TruthTable> {
        if self.n != other.n {
            return Err(Error::ArityMismatch(self.n, other.n));
        }
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(TruthTable { n: self.n, words })
    }

    pub fn and(&self, other: &TruthTable) -> Result<TruthTable> {
        if self.n != other.n {
            return Err(Error::ArityMismatch(self.n, other.n));
        }
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a & b)
            .collect();
        Ok(TruthTable { n: self.n, words })
    }

    pub fn or(&self, other: &TruthTable) -> Result<TruthTable> {
        if self.n != other.n {
            return Err(Error::ArityMismatch(self.n, other.n));
        }
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a | b)
            .collect();
        Ok(TruthTable { n: self.n, words })
    }

    pub fn not(&self) -> TruthTable {
        let mask = used_mask(self.n);
        let words = self
            .words
            .iter()
            .enumerate()
            .map(|(k, w)| if self.n >= 6 || k > 0 { !w } else { !w & mask })
            .collect();
        TruthTable { n: self.n, words }
    }

    /// Coordinates with nonzero influence, 1-indexed ascending.
    pub fn relevant_coords(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&p| self.influence_count(p) != 0)
            .map(|p| p + 1)
            .collect()
    }

    /// Drops every irrelevant coordinate, returning the compacted table and
    /// the kept (originally numbered) coordinates.
    pub fn drop_irrelevant(&self) -> (TruthTable, Vec<usize>) {
        let keep = self.relevant_coords();
        let mut t = self.clone();
        for p in (0..self.n).rev() {
            if !keep.contains(&(p + 1)) {
                t = t.restrict_one(p + 1, false).expect("coord in range");
            }
        }
        (t, keep)
    }
}

/// Extracts the 2^p-bit groups of `w` whose index has bit `p` equal to `b`,
/// packed into the low 32 bits.
fn pack_half(w: u64, p: usize, b: bool) -> u64 {
    let g = 1usize << p;
    let gmask = if g == 64 { u64::MAX } else { (1u64 << g) - 1 };
    let groups = 64usize >> (p + 1);
    let offset = if b { g } else { 0 };
    let mut acc = 0u64;
    for grp in 0..groups {
        let chunk = (w >> (grp * 2 * g + offset)) & gmask;
        acc |= chunk << (grp * g);
    }
    acc
}

/// Inverse of `pack_half`: spreads the low 32 bits of `half` into 2^p-bit
/// groups duplicated on both sides of the inserted coordinate.
fn spread_double(half: u64, p: usize) -> u64 {
    let g = 1usize << p;
    let gmask = (1u64 << g) - 1;
    let groups = 32usize >> p;
    let mut acc = 0u64;
    for grp in 0..groups {
        let chunk = (half >> (grp * g)) & gmask;
        acc |= chunk << (grp * 2 * g);
    }
    acc | (acc << g)
}

/// An ordered partial assignment of coordinates (1-indexed, pairwise
/// distinct).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Restriction {
    assignments: Vec<(usize, bool)>,
}

impl Restriction {
    pub fn empty() -> Self {
        Restriction {
            assignments: Vec::new(),
        }
    }

    pub fn new(assignments: Vec<(usize, bool)>) -> Result<Self> {
        let r = Restriction { assignments };
        r.check_distinct()?;
        Ok(r)
    }

    fn check_distinct(&self) -> Result<()> {
        for (idx, (c, _)) in self.assignments.iter().enumerate() {
            if self.assignments[..idx].iter().any(|(c2, _)| c2 == c) {
                return Err(Error::DuplicateCoord(*c));
            }
        }
        Ok(())
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        self.check_distinct()?;
        for &(c, _) in &self.assignments {
            if c == 0 || c > n {
                return Err(Error::CoordOutOfRange { coord: c, n });
            }
        }
        Ok(())
    }

    pub fn push(&mut self, coord: usize, bit: bool) -> Result<()> {
        if self.assignments.iter().any(|(c, _)| *c == coord) {
            return Err(Error::DuplicateCoord(coord));
        }
        self.assignments.push((coord, bit));
        Ok(())
    }

    pub fn assignments(&self) -> &[(usize, bool)] {
        &self.assignments
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn fixes(&self, coord: usize) -> Option<bool> {
        self.assignments
            .iter()
            .find(|(c, _)| *c == coord)
            .map(|&(_, b)| b)
    }

    /// True when `x` agrees with every fixed coordinate.
    pub fn matches(&self, x: u32) -> bool {
        self.assignments
            .iter()
            .all(|&(c, b)| ((x >> (c - 1)) & 1 == 1) == b)
    }
}
