//! Generators for every function family the experiments exercise, plus the
//! coordinate-layout descriptor that names their variable blocks.
//!
//! Composed families use a fixed documented coordinate order: all x-blocks
//! for levels h down to 1, then all y-blocks in the same level order, then
//! the z-block. That makes tie-breaking (and therefore every built tree)
//! reproducible.

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TruthTable;
use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

/// One named variable block of a composed family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutBlock {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub level: Option<u32>,
    /// Distinguishes the paired x-blocks of the monotone approximate family.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub part: Option<u32>,
    /// 1-indexed coordinates, ascending.
    pub coords: Vec<usize>,
}

/// Coordinate layout of a generated function, serialized as JSON alongside
/// truth-table files.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub n: usize,
    pub blocks: Vec<LayoutBlock>,
}

impl Layout {
    pub fn block(&self, name: &str, level: Option<u32>, part: Option<u32>) -> Option<&LayoutBlock> {
        self.blocks
            .iter()
            .find(|b| b.name == name && b.level == level && b.part == part)
    }

    /// Coordinates of the z-block (empty if there is none).
    pub fn z_coords(&self) -> Vec<usize> {
        self.block("z", None, None)
            .map(|b| b.coords.clone())
            .unwrap_or_default()
    }
}

/// Parameters of the approximate separation families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyParams {
    /// Recursion depth.
    pub h: usize,
    /// Threshold / biased-Tribes block width.
    pub ell: usize,
    /// Parity / majority arity.
    pub k: usize,
    /// Base Tribes arity.
    pub r: usize,
    /// Bias target as a rational in (0,1); only the monotone family uses it.
    pub delta: (u64, u64),
}

impl FamilyParams {
    fn check_positive(&self) -> Result<()> {
        if self.ell == 0 || self.k == 0 || self.r == 0 {
            return Err(Error::InvalidParams("arities must be positive".into()));
        }
        Ok(())
    }
}

/// Realized shape of a Tribes instance; the acceptance probability is the
/// exact value, never assumed to be 1/2 (or delta).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TribesInfo {
    pub width: usize,
    pub terms: usize,
    pub accept_prob: Dyadic,
}

/// Which of the two bias targets a biased-Tribes instance aims for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TribesSide {
    Delta,
    OneMinusDelta,
}

/// Parity of `k` bits: +1 on an odd number of ones.
pub fn parity(k: usize) -> Result<TruthTable> {
    if k == 0 {
        return Err(Error::InvalidParams("parity arity must be positive".into()));
    }
    TruthTable::from_fn(k, |x| x.count_ones() % 2 == 1)
}

/// Majority: +1 when more than half the bits are ones.
pub fn majority(k: usize) -> Result<TruthTable> {
    if k == 0 {
        return Err(Error::InvalidParams(
            "majority arity must be positive".into(),
        ));
    }
    TruthTable::from_fn(k, move |x| 2 * x.count_ones() as usize > k)
}

/// `+1 ⟺ Σ x_i ≤ t`.
pub fn threshold(ell: usize, t: usize) -> Result<TruthTable> {
    if ell == 0 {
        return Err(Error::InvalidParams(
            "threshold arity must be positive".into(),
        ));
    }
    if t > ell {
        return Err(Error::InvalidParams(format!(
            "threshold {t} exceeds arity {ell}"
        )));
    }
    TruthTable::from_fn(ell, move |x| x.count_ones() as usize <= t)
}

fn tribes_accept_prob(width: usize, terms: usize) -> Dyadic {
    // 1 - (1 - 2^-w)^t, exactly.
    let base = Dyadic::new(BigInt::from((1u64 << width) - 1), width as u32);
    let mut pow = Dyadic::one();
    for _ in 0..terms {
        pow = &pow * &base;
    }
    &Dyadic::one() - &pow
}

fn tribes_table(r: usize, width: usize, terms: usize) -> Result<TruthTable> {
    let wmask = (1u32 << width) - 1;
    TruthTable::from_fn(r, move |x| {
        (0..terms).any(|j| (x >> (j * width)) & wmask == wmask)
    })
}

/// Read-once DNF with `⌊r/w⌋` terms of width exactly `w`, where `w` is the
/// largest integer with `(1 - 2^-w)^⌊r/w⌋ ≤ 1/2`. Leftover coordinates stay
/// irrelevant. Returns the table and the realized shape.
pub fn tribes(r: usize) -> Result<(TruthTable, TribesInfo)> {
    if r == 0 {
        return Err(Error::InvalidParams("tribes arity must be positive".into()));
    }
    if r > super::MAX_VARS {
        return Err(Error::TooManyVariables(r));
    }
    let mut width = 1;
    for w in 1..=r {
        let t = r / w;
        let reject = &Dyadic::one() - &tribes_accept_prob(w, t);
        if reject.cmp_ratio(1, 2) != std::cmp::Ordering::Greater {
            width = w;
        }
    }
    let terms = r / width;
    let info = TribesInfo {
        width,
        terms,
        accept_prob: tribes_accept_prob(width, terms),
    };
    Ok((tribes_table(r, width, terms)?, info))
}

/// Biased Tribes on `ell` coordinates: the width is chosen by exhaustive
/// search to bring the acceptance probability as close to the target (delta
/// or 1-delta) as possible, ties to the smaller width.
pub fn tribes_biased(
    ell: usize,
    delta: (u64, u64),
    side: TribesSide,
) -> Result<(TruthTable, TribesInfo)> {
    let (dn, dd) = delta;
    if dd == 0 || dn == 0 || dn >= dd {
        return Err(Error::InvalidParams(format!(
            "delta {dn}/{dd} must lie strictly in (0,1)"
        )));
    }
    if ell == 0 {
        return Err(Error::InvalidParams("tribes arity must be positive".into()));
    }
    if ell > super::MAX_VARS {
        return Err(Error::TooManyVariables(ell));
    }
    let (tn, td) = match side {
        TribesSide::Delta => (dn, dd),
        TribesSide::OneMinusDelta => (dd - dn, dd),
    };
    let mut best: Option<(usize, Dyadic)> = None;
    for w in 1..=ell {
        let acc = tribes_accept_prob(w, ell / w);
        // |acc - tn/td| scaled by td stays dyadic, so the comparison is exact.
        let dist = (&(&acc * &Dyadic::from_int(td as i64)) - &Dyadic::from_int(tn as i64)).abs();
        match &best {
            Some((_, d)) if *d <= dist => {}
            _ => best = Some((w, dist)),
        }
    }
    let (width, _) = best.expect("nonempty width range");
    let terms = ell / width;
    let info = TribesInfo {
        width,
        terms,
        accept_prob: tribes_accept_prob(width, terms),
    };
    Ok((tribes_table(ell, width, terms)?, info))
}

/// Lifts `block` (a table on `coords.len()` variables) into an n-variable
/// table living on the given ascending 1-indexed coordinates.
fn embed(block: &TruthTable, n: usize, coords: &[usize]) -> Result<TruthTable> {
    debug_assert_eq!(block.n(), coords.len());
    debug_assert!(coords.windows(2).all(|w| w[0] < w[1]));
    let mut t = block.clone();
    for q in 1..=n {
        if !coords.contains(&q) {
            t = t.lift_insert(q)?;
        }
    }
    Ok(t)
}

/// XOR of the named coordinates as a ±1 function on `n` variables.
fn parity_of_coords(n: usize, coords: &[usize]) -> Result<TruthTable> {
    let mut t = TruthTable::constant(n, -1)?;
    for &c in coords {
        t = t.xor(&TruthTable::coordinate(n, c)?)?;
    }
    Ok(t)
}

fn union_of_coords(n: usize, coords: &[usize]) -> Result<TruthTable> {
    let mut t = TruthTable::constant(n, -1)?;
    for &c in coords {
        t = t.or(&TruthTable::coordinate(n, c)?)?;
    }
    Ok(t)
}

fn exact_layout(h: usize, x_width: usize) -> Layout {
    let n = h * (x_width + 1) + 1;
    let mut blocks = Vec::new();
    for (slot, level) in (1..=h).rev().enumerate() {
        blocks.push(LayoutBlock {
            name: "x".into(),
            level: Some(level as u32),
            part: None,
            coords: (slot * x_width + 1..=(slot + 1) * x_width).collect(),
        });
    }
    for (slot, level) in (1..=h).rev().enumerate() {
        blocks.push(LayoutBlock {
            name: "y".into(),
            level: Some(level as u32),
            part: None,
            coords: vec![h * x_width + slot + 1],
        });
    }
    blocks.push(LayoutBlock {
        name: "z".into(),
        level: None,
        part: None,
        coords: vec![n],
    });
    Layout { n, blocks }
}

/// The exact-representation separation family over `3h+1` variables:
/// `f_0(z) = z`, and `f_h` outputs `y^(h)` when `x_1^(h) ∨ x_2^(h)` holds and
/// recurses otherwise.
pub fn family_exact_nonmonotone(h: usize) -> Result<(TruthTable, Layout)> {
    let n = 3 * h + 1;
    if n > super::MAX_VARS {
        return Err(Error::TooManyVariables(n));
    }
    let mut t = TruthTable::coordinate(1, 1)?;
    for i in 1..=h {
        t = t.lift_insert(2 * (i - 1) + 1)?; // y^(i) slot
        t = t.lift_insert(1)?;
        t = t.lift_insert(1)?; // x^(i) pair at the front
        let ni = 3 * i + 1;
        let cond = union_of_coords(ni, &[1, 2])?;
        let y = TruthTable::coordinate(ni, 2 * i + 1)?;
        t = TruthTable::select(&cond, &y, &t)?;
    }
    Ok((t, exact_layout(h, 2)))
}

/// The monotone exact-representation separation family over `5h+1`
/// variables, built around the pivot `x* = (0,0,1,1)`.
pub fn family_exact_monotone(h: usize) -> Result<(TruthTable, Layout)> {
    let n = 5 * h + 1;
    if n > super::MAX_VARS {
        return Err(Error::TooManyVariables(n));
    }
    let mut t = TruthTable::coordinate(1, 1)?;
    for i in 1..=h {
        t = t.lift_insert(4 * (i - 1) + 1)?; // y^(i) slot
        for _ in 0..4 {
            t = t.lift_insert(1)?; // x^(i) quad at the front
        }
        let ni = 5 * i + 1;
        let m1 = TruthTable::coordinate(ni, 1)?;
        let m2 = TruthTable::coordinate(ni, 2)?;
        let m3 = TruthTable::coordinate(ni, 3)?;
        let m4 = TruthTable::coordinate(ni, 4)?;
        let low = m1.or(&m2)?.not(); // x1 = x2 = 0
        let high = m3.and(&m4)?; // x3 = x4 = 1
        let eq = low.and(&high)?;
        let succ_strict = high.and(&low.not())?;
        let prec_strict = low.and(&high.not())?;
        let y = TruthTable::coordinate(ni, 4 * i + 1)?;
        let ones = TruthTable::constant(ni, 1)?;
        let neg = TruthTable::constant(ni, -1)?;
        let inner = TruthTable::select(
            &succ_strict,
            &ones,
            &TruthTable::select(&prec_strict, &neg, &y)?,
        )?;
        t = TruthTable::select(&eq, &t, &inner)?;
    }
    Ok((t, exact_layout(h, 4)))
}

fn approx_layout(h: usize, ell: usize, k: usize, r: usize, paired_x: bool) -> Layout {
    let x_width = if paired_x { 2 * ell } else { ell };
    let n = h * (x_width + k) + r;
    let mut blocks = Vec::new();
    for (slot, level) in (1..=h).rev().enumerate() {
        let base = slot * x_width;
        if paired_x {
            blocks.push(LayoutBlock {
                name: "x".into(),
                level: Some(level as u32),
                part: Some(1),
                coords: (base + 1..=base + ell).collect(),
            });
            blocks.push(LayoutBlock {
                name: "x".into(),
                level: Some(level as u32),
                part: Some(2),
                coords: (base + ell + 1..=base + 2 * ell).collect(),
            });
        } else {
            blocks.push(LayoutBlock {
                name: "x".into(),
                level: Some(level as u32),
                part: None,
                coords: (base + 1..=base + ell).collect(),
            });
        }
    }
    for (slot, level) in (1..=h).rev().enumerate() {
        let base = h * x_width + slot * k;
        blocks.push(LayoutBlock {
            name: "y".into(),
            level: Some(level as u32),
            part: None,
            coords: (base + 1..=base + k).collect(),
        });
    }
    blocks.push(LayoutBlock {
        name: "z".into(),
        level: None,
        part: None,
        coords: (h * (x_width + k) + 1..=n).collect(),
    });
    Layout { n, blocks }
}

/// The approximate-representation separation family over `h(ℓ+k)+r`
/// variables: Tribes base, Parity blocks gated by `Threshold_{ℓ,1}`.
pub fn family_approx_nonmonotone(p: &FamilyParams) -> Result<(TruthTable, Layout)> {
    p.check_positive()?;
    let n = p.h * (p.ell + p.k) + p.r;
    if n > super::MAX_VARS {
        return Err(Error::TooManyVariables(n));
    }
    let (mut t, _) = tribes(p.r)?;
    let thr = threshold(p.ell, 1)?;
    for i in 1..=p.h {
        for _ in 0..p.k {
            t = t.lift_insert((i - 1) * p.ell + 1)?;
        }
        for _ in 0..p.ell {
            t = t.lift_insert(1)?;
        }
        let ni = i * (p.ell + p.k) + p.r;
        let x_coords: Vec<usize> = (1..=p.ell).collect();
        let y_coords: Vec<usize> = (i * p.ell + 1..=i * p.ell + p.k).collect();
        let cond = embed(&thr, ni, &x_coords)?;
        let par = parity_of_coords(ni, &y_coords)?;
        t = TruthTable::select(&cond, &par, &t)?;
    }
    Ok((t, approx_layout(p.h, p.ell, p.k, p.r, false)))
}

/// The monotone approximate-representation separation family over
/// `h(2ℓ+k)+r` variables: paired biased-Tribes gates selecting between
/// constants, Majority, and the recursive subfunction.
pub fn family_approx_monotone(p: &FamilyParams) -> Result<(TruthTable, Layout)> {
    p.check_positive()?;
    let n = p.h * (2 * p.ell + p.k) + p.r;
    if n > super::MAX_VARS {
        return Err(Error::TooManyVariables(n));
    }
    let (mut t, _) = tribes(p.r)?;
    let (tribes_delta, _) = tribes_biased(p.ell, p.delta, TribesSide::Delta)?;
    let (tribes_comp, _) = tribes_biased(p.ell, p.delta, TribesSide::OneMinusDelta)?;
    let maj = majority(p.k)?;
    for i in 1..=p.h {
        for _ in 0..p.k {
            t = t.lift_insert((i - 1) * 2 * p.ell + 1)?;
        }
        for _ in 0..2 * p.ell {
            t = t.lift_insert(1)?;
        }
        let ni = i * (2 * p.ell + p.k) + p.r;
        let x1_coords: Vec<usize> = (1..=p.ell).collect();
        let x2_coords: Vec<usize> = (p.ell + 1..=2 * p.ell).collect();
        let y_coords: Vec<usize> = (2 * p.ell * i + 1..=2 * p.ell * i + p.k).collect();
        let gate1 = embed(&tribes_delta, ni, &x1_coords)?;
        let gate2 = embed(&tribes_comp, ni, &x2_coords)?;
        let maj_t = embed(&maj, ni, &y_coords)?;
        let ones = TruthTable::constant(ni, 1)?;
        let neg = TruthTable::constant(ni, -1)?;
        let when_gate1 = TruthTable::select(&gate2, &ones, &maj_t)?;
        let when_not = TruthTable::select(&gate2, &t, &neg)?;
        t = TruthTable::select(&gate1, &when_gate1, &when_not)?;
    }
    Ok((t, approx_layout(p.h, p.ell, p.k, p.r, true)))
}

/// Truth table of a seeded random decision tree with (at most) `s` leaves;
/// the tree itself is available from `dtree::random_tree`.
pub fn random_tree_function(n: usize, s: usize, seed: u64) -> Result<TruthTable> {
    let tree = crate::dtree::random_tree(n, s, seed)?;
    crate::dtree::to_truth_table(&tree, n)
}

/// Seeded random monotone function: an OR of random AND-terms (a random
/// monotone DNF). Never constant, since the all-zeros point maps to -1 and
/// the all-ones point to +1.
pub fn random_monotone_function(n: usize, seed: u64) -> Result<TruthTable> {
    if n == 0 || n > super::MAX_VARS {
        return Err(Error::InvalidParams(format!("n = {n} out of range")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let num_terms = rng.gen_range(1..=5);
    let max_width = (2 * n / 3).max(2).min(n);
    let mut f = TruthTable::constant(n, -1)?;
    for _ in 0..num_terms {
        let width = rng.gen_range(1..=max_width);
        let mut coords: Vec<usize> = (1..=n).collect();
        coords.shuffle(&mut rng);
        coords.truncate(width);
        let mut term = TruthTable::constant(n, 1)?;
        for c in coords {
            term = term.and(&TruthTable::coordinate(n, c)?)?;
        }
        f = f.or(&term)?;
    }
    Ok(f)
}
