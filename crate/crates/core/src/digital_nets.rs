//! Base-2 digital (t,d)-sequences and exhaustive (t,m,d)-net verification.
//!
//! Generation uses Sobol'-type generating matrices built from a
//! direction-number table (one line per dimension, `d s a m_1 .. m_s`).
//! Every coordinate is produced as a 64-bit digit word whose lowest
//! `64 - PRECISION_DEPTH` bits are zero, so the conversion to `f64` is exact.
//!
//! Verification works for any base `b >= 2`: it enumerates every shape
//! `(k_1, .., k_d)` with `sum k_i = m - t`, counts points per cell and checks
//! that each cell holds exactly `b^t` points.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

/// Number of base-2 digits carried by generated coordinates.
pub const PRECISION_DEPTH: u32 = 53;

/// Default cap on `shapes * points` for [`verify_net`].
pub const DEFAULT_WORK_BUDGET: u128 = 100_000_000;

const BUNDLED_TABLE: &str = include_str!("../data/new-joe-kuo-6.64.txt");

/// Digit-reversed fraction of `index` in base `base`.
///
/// For base 2 the result is exact for every index below `2^53`.
pub fn radical_inverse(index: u64, base: u32) -> f64 {
    assert!(base >= 2, "radical_inverse: base must be >= 2");
    if base == 2 {
        return word_to_f64_exact(index.reverse_bits() & !((1u64 << (64 - PRECISION_DEPTH)) - 1));
    }
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut value = 0.0;
    let mut i = index;
    while i > 0 {
        value += (i % b) as f64 * scale;
        i /= b;
        scale *= inv;
    }
    value
}

/// Exact conversion of a digit word with at most 53 significant bits.
#[inline]
pub(crate) fn word_to_f64_exact(word: u64) -> f64 {
    word as f64 * (1.0 / 18_446_744_073_709_551_616.0)
}

/// First 64 base-2 digits of a coordinate in `[0, 1)`, left aligned.
#[inline]
pub fn f64_to_word(x: f64) -> u64 {
    debug_assert!((0.0..1.0).contains(&x));
    (x * 18_446_744_073_709_551_616.0) as u64
}

/// One dimension's entry in a direction-number table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionEntry {
    pub dimension: usize,
    /// Degree `s` of the primitive polynomial.
    pub degree: u32,
    /// Interior polynomial coefficients `a`, most significant first.
    pub coefficients: u32,
    /// Initial direction integers `m_1 .. m_s`.
    pub initial: Vec<u64>,
}

/// Direction numbers for dimensions `2..=max_dimension()`; dimension 1 is the
/// van der Corput sequence and needs no entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectionTable {
    entries: Vec<DirectionEntry>,
}

impl DirectionTable {
    /// Parse the plain-text format: comment lines start with `#`, every
    /// other non-blank line is `d s a m_1 ... m_s`. Dimensions must be
    /// consecutive starting at 2.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |msg: String| Error::Parse {
                line: lineno + 1,
                msg,
            };
            let fields = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<u64>()
                        .map_err(|e| perr(format!("bad integer {tok:?}: {e}")))
                })
                .collect::<Result<Vec<u64>>>()?;
            if fields.len() < 3 {
                return Err(perr("expected `d s a m_1 .. m_s`".into()));
            }
            let (dimension, degree, coefficients) =
                (fields[0] as usize, fields[1] as u32, fields[2] as u32);
            let expected_dim = entries.len() + 2;
            if dimension != expected_dim {
                return Err(perr(format!(
                    "dimension {dimension} out of order, expected {expected_dim}"
                )));
            }
            if degree == 0 || degree > PRECISION_DEPTH {
                return Err(perr(format!("degree {degree} out of range")));
            }
            if degree > 1 && coefficients >= 1 << (degree - 1) {
                return Err(perr(format!("coefficient word {coefficients} too wide")));
            }
            let initial = fields[3..].to_vec();
            if initial.len() != degree as usize {
                return Err(perr(format!(
                    "expected {degree} initial direction integers, found {}",
                    initial.len()
                )));
            }
            for (k, &m) in initial.iter().enumerate() {
                if m % 2 == 0 || m >= 1 << (k + 1) {
                    return Err(perr(format!(
                        "m_{} = {m} must be odd and < 2^{}",
                        k + 1,
                        k + 1
                    )));
                }
            }
            entries.push(DirectionEntry {
                dimension,
                degree,
                coefficients,
                initial,
            });
        }
        Ok(Self { entries })
    }

    /// The bundled table (Joe and Kuo, 64 dimensions).
    pub fn bundled() -> &'static DirectionTable {
        static TABLE: OnceLock<DirectionTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            DirectionTable::parse(BUNDLED_TABLE).expect("bundled direction table is well formed")
        })
    }

    pub fn max_dimension(&self) -> usize {
        self.entries.len() + 1
    }

    pub fn entries(&self) -> &[DirectionEntry] {
        &self.entries
    }

    fn check_dimension(&self, d: usize) -> Result<()> {
        if d == 0 {
            return contract("dimension must be >= 1");
        }
        if d > self.max_dimension() {
            return Err(Error::Capacity {
                what: "dimension",
                requested: d,
                available: self.max_dimension(),
            });
        }
        Ok(())
    }

    /// Upper bound on the quality parameter of the first `d` dimensions:
    /// the sum of `degree - 1` over the primitive polynomials used.
    pub fn t_bound(&self, d: usize) -> Result<u32> {
        self.check_dimension(d)?;
        Ok(self.entries[..d - 1].iter().map(|e| e.degree - 1).sum())
    }

    /// Build the generating matrices for the first `d` dimensions.
    pub fn generator(&self, d: usize) -> Result<SobolGenerator> {
        self.check_dimension(d)?;
        let depth = PRECISION_DEPTH as usize;
        let mut columns = Vec::with_capacity(d);
        // Column k (0-based) holds v_{k+1} = m_{k+1} / 2^{k+1} left aligned in 64 bits.
        columns.push((0..depth).map(|k| 1u64 << (63 - k)).collect::<Vec<_>>());
        for entry in &self.entries[..d - 1] {
            let s = entry.degree as usize;
            let mut v = vec![0u64; depth];
            for (k, slot) in v.iter_mut().enumerate().take(s) {
                *slot = entry.initial[k] << (63 - k);
            }
            for k in s..depth {
                let mut next = v[k - s] ^ (v[k - s] >> s);
                for j in 1..s {
                    if (entry.coefficients >> (s - 1 - j)) & 1 == 1 {
                        next ^= v[k - j];
                    }
                }
                v[k] = next;
            }
            columns.push(v);
        }
        Ok(SobolGenerator { columns })
    }
}

/// Base-2 digital sequence generator for a fixed dimension.
#[derive(Debug, Clone)]
pub struct SobolGenerator {
    columns: Vec<Vec<u64>>,
}

impl SobolGenerator {
    pub fn dimension(&self) -> usize {
        self.columns.len()
    }

    /// Digit words of point `index` (natural order). `index < 2^53`.
    pub fn point_words(&self, index: u64, out: &mut [u64]) {
        debug_assert!(index >> PRECISION_DEPTH == 0);
        for (slot, cols) in out.iter_mut().zip(&self.columns) {
            let mut word = 0u64;
            let mut i = index;
            let mut k = 0;
            while i != 0 {
                if i & 1 == 1 {
                    word ^= cols[k];
                }
                i >>= 1;
                k += 1;
            }
            *slot = word;
        }
    }

    pub fn point(&self, index: u64) -> Vec<f64> {
        let mut words = vec![0u64; self.dimension()];
        self.point_words(index, &mut words);
        words.into_iter().map(word_to_f64_exact).collect()
    }

    /// Points `start .. start + count` of the sequence, in index order.
    pub fn points(&self, start: u64, count: usize) -> Result<PointSet> {
        let end = start
            .checked_add(count as u64)
            .filter(|&e| e <= 1u64 << PRECISION_DEPTH)
            .ok_or(Error::Capacity {
                what: "sequence index",
                requested: usize::MAX,
                available: 1usize << PRECISION_DEPTH,
            })?;
        let d = self.dimension();
        let mut coords = Vec::with_capacity(count * d);
        let mut words = vec![0u64; d];
        for i in start..end {
            self.point_words(i, &mut words);
            coords.extend(words.iter().map(|&w| word_to_f64_exact(w)));
        }
        PointSet::new(d, coords, PRECISION_DEPTH)
    }
}

/// Parameters of a base-`b` (t,m,d)-net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSpec {
    pub base: u32,
    pub t: u32,
    pub m: u32,
    pub d: usize,
}

impl NetSpec {
    /// A base-2 net from the bundled table with `t` set to the table's bound
    /// (clipped to `m`).
    pub fn sobol(m: u32, d: usize) -> Result<Self> {
        let t = DirectionTable::bundled().t_bound(d)?.min(m);
        Ok(Self { base: 2, t, m, d })
    }

    pub fn num_points(&self) -> Result<usize> {
        (self.base as usize)
            .checked_pow(self.m)
            .ok_or(Error::Capacity {
                what: "net size exponent",
                requested: self.m as usize,
                available: usize::BITS as usize - 1,
            })
    }
}

/// An ordered list of `d`-vectors in `[0,1)^d`, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    precision_depth: u32,
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>, precision_depth: u32) -> Result<Self> {
        if dim == 0 {
            return contract("point dimension must be >= 1");
        }
        if !coords.len().is_multiple_of(dim) {
            return contract(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            ));
        }
        if let Some(bad) = coords.iter().find(|x| !(0.0..1.0).contains(*x)) {
            return contract(format!("coordinate {bad} outside [0,1)"));
        }
        if precision_depth > 64 {
            return contract("precision depth above 64 digits is not representable");
        }
        Ok(Self {
            dim,
            coords,
            precision_depth,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>], precision_depth: u32) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return contract("rows have differing dimensions");
        }
        Self::new(dim, rows.concat(), precision_depth)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn precision_depth(&self) -> u32 {
        self.precision_depth
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// The first `n` points.
    pub fn prefix(&self, n: usize) -> PointSet {
        PointSet {
            dim: self.dim,
            coords: self.coords[..n * self.dim].to_vec(),
            precision_depth: self.precision_depth,
        }
    }
}

/// First `2^m` points of the base-2 sequence described by `spec`.
pub fn generate_net(spec: &NetSpec) -> Result<PointSet> {
    generate_net_with(spec, DirectionTable::bundled())
}

pub fn generate_net_with(spec: &NetSpec, table: &DirectionTable) -> Result<PointSet> {
    if spec.base != 2 {
        return contract(format!(
            "generation supports base 2 only, got {}",
            spec.base
        ));
    }
    if spec.t > spec.m {
        return contract(format!("t = {} exceeds m = {}", spec.t, spec.m));
    }
    if spec.m > PRECISION_DEPTH {
        return Err(Error::Capacity {
            what: "net size exponent",
            requested: spec.m as usize,
            available: PRECISION_DEPTH as usize,
        });
    }
    let generator = table.generator(spec.d)?;
    generator.points(0, 1usize << spec.m)
}

/// Half-open box `prod [t_i / b^k_i, (t_i + 1) / b^k_i)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementaryInterval {
    pub base: u32,
    pub shape: Vec<u32>,
    pub cell: Vec<u64>,
}

impl ElementaryInterval {
    pub fn volume(&self) -> f64 {
        let total: i32 = self.shape.iter().map(|&k| k as i32).sum();
        (self.base as f64).powi(-total)
    }

    /// Per-dimension `(lower, upper)` bounds.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.shape
            .iter()
            .zip(&self.cell)
            .map(|(&k, &t)| {
                let w = (self.base as f64).powi(k as i32);
                (t as f64 / w, (t + 1) as f64 / w)
            })
            .collect()
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        locate_cell(point, &self.shape, self.base) == self.cell
    }
}

impl std::fmt::Display for ElementaryInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .shape
            .iter()
            .zip(&self.cell)
            .map(|(k, t)| format!("[{t}/{b}^{k}, {}/{b}^{k})", t + 1, b = self.base))
            .collect();
        write!(f, "{}", parts.join(" x "))
    }
}

/// Cell indices `t_i = floor(u_i * b^k_i)` of the elementary interval with
/// the given shape that contains `point`.
pub fn locate_cell(point: &[f64], shape: &[u32], base: u32) -> Vec<u64> {
    point
        .iter()
        .zip(shape)
        .map(|(&u, &k)| cell_index(u, k, base))
        .collect()
}

#[inline]
fn cell_index(u: f64, k: u32, base: u32) -> u64 {
    if base == 2 {
        if k == 0 {
            return 0;
        }
        return f64_to_word(u) >> (64 - k.min(64));
    }
    let cells = (base as u64).pow(k);
    ((u * cells as f64).floor() as u64).min(cells - 1)
}

/// Outcome of [`verify_net`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NetVerdict {
    Pass,
    Fail {
        interval: ElementaryInterval,
        count: u64,
        expected: u64,
    },
}

impl NetVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, NetVerdict::Pass)
    }
}

/// Exhaustive (t,m,d)-net check with the default work budget.
pub fn verify_net(points: &PointSet, base: u32, t: u32, m: u32, d: usize) -> Result<NetVerdict> {
    verify_net_with_budget(points, base, t, m, d, DEFAULT_WORK_BUDGET)
}

pub fn verify_net_with_budget(
    points: &PointSet,
    base: u32,
    t: u32,
    m: u32,
    d: usize,
    budget: u128,
) -> Result<NetVerdict> {
    if base < 2 {
        return contract("base must be >= 2");
    }
    if t > m {
        return contract(format!("t = {t} exceeds m = {m}"));
    }
    if points.dim() != d {
        return contract(format!(
            "point dimension {} does not match d = {d}",
            points.dim()
        ));
    }
    let n = (base as u128).checked_pow(m).unwrap_or(u128::MAX);
    if points.len() as u128 != n {
        return contract(format!(
            "a ({t},{m},{d})-net in base {base} has {n} points, got {}",
            points.len()
        ));
    }
    let level = m - t;
    let shapes = compositions(level, d);
    let required = shapes.len() as u128 * n;
    if required > budget {
        return Err(Error::WorkBudget { required, budget });
    }
    let expected = (base as u64).pow(t);
    let cells = (base as usize).pow(level);
    let mut counts = vec![0u64; cells];
    for shape in shapes {
        counts.iter_mut().for_each(|c| *c = 0);
        for p in points.iter() {
            let mut idx = 0usize;
            for (&u, &k) in p.iter().zip(&shape) {
                idx = idx * (base as usize).pow(k) + cell_index(u, k, base) as usize;
            }
            counts[idx] += 1;
        }
        if let Some(pos) = counts.iter().position(|&c| c != expected) {
            let mut cell = vec![0u64; d];
            let mut rest = pos;
            for i in (0..d).rev() {
                let w = (base as usize).pow(shape[i]);
                cell[i] = (rest % w) as u64;
                rest /= w;
            }
            return Ok(NetVerdict::Fail {
                interval: ElementaryInterval { base, shape, cell },
                count: counts[pos],
                expected,
            });
        }
    }
    Ok(NetVerdict::Pass)
}

/// Smallest `t` for which `points` is a (t,m,d)-net.
pub fn certify_t(points: &PointSet, base: u32, m: u32, d: usize) -> Result<u32> {
    for t in 0..=m {
        if verify_net(points, base, t, m, d)?.passed() {
            return Ok(t);
        }
    }
    unreachable!("every b^m point set is an (m,m,d)-net")
}

/// All `(k_1..k_d)` with `sum = total`, in ascending lexicographic order.
fn compositions(total: u32, d: usize) -> Vec<Vec<u32>> {
    fn rec(remaining: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=remaining {
            prefix.push(k);
            rec(remaining - k, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, d, &mut Vec::with_capacity(d), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_radical_inverse(mut i: u64, b: u64) -> f64 {
        let mut digits = Vec::new();
        while i > 0 {
            digits.push(i % b);
            i /= b;
        }
        digits
            .iter()
            .enumerate()
            .map(|(k, &a)| a as f64 / (b as f64).powi(k as i32 + 1))
            .sum()
    }

    #[test]
    fn radical_inverse_examples() {
        assert_eq!(radical_inverse(0, 2), 0.0);
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        for i in 0..2000 {
            for b in [2u32, 3, 5, 7] {
                let got = radical_inverse(i, b);
                assert!((got - brute_radical_inverse(i, b as u64)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn radical_inverse_is_bijective_on_grid() {
        let m = 10;
        let mut seen: Vec<u64> = (0..1u64 << m)
            .map(|i| (radical_inverse(i, 2) * (1u64 << m) as f64) as u64)
            .collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..1u64 << m).collect::<Vec<_>>());
    }

    #[test]
    fn one_dimensional_net_is_van_der_corput() {
        let pts = generate_net(&NetSpec {
            base: 2,
            t: 0,
            m: 2,
            d: 1,
        })
        .unwrap();
        assert_eq!(pts.coords(), &[0.0, 0.5, 0.25, 0.75]);
        let pts = generate_net(&NetSpec {
            base: 2,
            t: 0,
            m: 12,
            d: 1,
        })
        .unwrap();
        for (i, p) in pts.iter().enumerate() {
            assert_eq!(p[0], radical_inverse(i as u64, 2));
        }
    }

    #[test]
    fn single_point_net() {
        let pts = generate_net(&NetSpec {
            base: 2,
            t: 0,
            m: 0,
            d: 3,
        })
        .unwrap();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts.point(0), &[0.0, 0.0, 0.0]);
        assert!(verify_net(&pts, 2, 0, 0, 3).unwrap().passed());
    }

    #[test]
    fn frozen_natural_order_points() {
        // Independent brute-force evaluation of the recurrence (32-bit words).
        let gen = DirectionTable::bundled().generator(10).unwrap();
        let cases: [(u64, [f64; 5]); 5] = [
            (2, [0.25, 0.75, 0.75, 0.25, 0.25]),
            (5, [0.625, 0.125, 0.875, 0.625, 0.375]),
            (11, [0.8125, 0.6875, 0.8125, 0.4375, 0.4375]),
            (100, [0.1484375, 0.7734375, 0.6953125, 0.5234375, 0.9921875]),
            (
                1000,
                [
                    0.0927734375,
                    0.1611328125,
                    0.4501953125,
                    0.9931640625,
                    0.1220703125,
                ],
            ),
        ];
        for (i, expected) in cases {
            let p = gen.point(i);
            let picked = [p[0], p[1], p[2], p[4], p[9]];
            assert_eq!(picked, expected, "index {i}");
        }
    }

    #[test]
    fn two_dimensional_net_has_t_zero() {
        let pts = generate_net(&NetSpec {
            base: 2,
            t: 0,
            m: 4,
            d: 2,
        })
        .unwrap();
        assert!(verify_net(&pts, 2, 0, 4, 2).unwrap().passed());
    }

    #[test]
    fn capacity_error_beyond_table() {
        let err = generate_net(&NetSpec {
            base: 2,
            t: 0,
            m: 2,
            d: 65,
        })
        .unwrap_err();
        assert!(matches!(err, Error::Capacity { requested: 65, .. }));
    }

    #[test]
    fn generation_rejects_other_bases() {
        assert!(matches!(
            generate_net(&NetSpec {
                base: 3,
                t: 0,
                m: 2,
                d: 1
            }),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn identical_points_fail() {
        let pts = PointSet::new(2, vec![0.3; 16], 53).unwrap();
        match verify_net(&pts, 2, 0, 3, 2).unwrap() {
            NetVerdict::Fail {
                interval,
                count,
                expected,
            } => {
                assert_eq!(expected, 1);
                // Lexicographic first shape is (0, 3); first cell (0, 0) is empty.
                assert_eq!(interval.shape, vec![0, 3]);
                assert_eq!(interval.cell, vec![0, 0]);
                assert_eq!(count, 0);
            }
            NetVerdict::Pass => panic!("identical points cannot form a net"),
        }
    }

    #[test]
    fn wrong_point_count_is_contract_error() {
        let pts = PointSet::new(1, vec![0.0, 0.5, 0.25], 53).unwrap();
        assert!(matches!(
            verify_net(&pts, 2, 0, 2, 1),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn work_budget_guard() {
        let pts = generate_net(&NetSpec {
            base: 2,
            t: 0,
            m: 10,
            d: 3,
        })
        .unwrap();
        assert!(matches!(
            verify_net_with_budget(&pts, 2, 0, 10, 3, 1000),
            Err(Error::WorkBudget { .. })
        ));
    }

    #[test]
    fn verify_in_base_three() {
        // Base-3 van der Corput: a (0,m,1)-net in base 3.
        // Shift to cell centres so float rounding of thirds cannot move a point.
        let coords: Vec<f64> = (0..27)
            .map(|i| radical_inverse(i, 3) + 0.5 / 27.0)
            .collect();
        let pts = PointSet::new(1, coords, 53).unwrap();
        assert!(verify_net(&pts, 3, 0, 3, 1).unwrap().passed());
    }

    #[test]
    fn locate_cell_examples() {
        assert_eq!(locate_cell(&[0.3], &[1], 2), vec![0]);
        assert_eq!(locate_cell(&[0.75, 0.2], &[2, 0], 2), vec![3, 0]);
        assert_eq!(locate_cell(&[0.999], &[3], 2), vec![7]);
        assert_eq!(locate_cell(&[0.5], &[2], 3), vec![4]);
    }

    #[test]
    fn compositions_are_lexicographic() {
        let c = compositions(2, 2);
        assert_eq!(c, vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(compositions(3, 3).len(), 10);
    }

    #[test]
    fn parse_rejects_malformed_tables() {
        assert!(DirectionTable::parse("3 1 0 1\n").is_err());
        assert!(DirectionTable::parse("2 1 0 2\n").is_err());
        assert!(DirectionTable::parse("2 2 0 1\n").is_err());
        let t = DirectionTable::parse("# c\n\n2 1 0 1\n3 2 1 1 3\n").unwrap();
        assert_eq!(t.max_dimension(), 3);
        assert_eq!(t.t_bound(3).unwrap(), 1);
    }

    #[test]
    fn bundled_table_covers_64_dimensions() {
        let table = DirectionTable::bundled();
        assert_eq!(table.max_dimension(), 64);
        assert_eq!(table.t_bound(1).unwrap(), 0);
        assert_eq!(table.t_bound(2).unwrap(), 0);
        assert_eq!(table.t_bound(6).unwrap(), 8);
    }
}
