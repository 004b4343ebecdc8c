//! Free nilpotent groups `N_{r,c} = F_r / γ_{c+1} F_r`.
//!
//! Elements are kept in Mal'cev normal form `b_1^{e_1} ... b_n^{e_n}` over a
//! Hall basis. Arithmetic goes through the Magnus embedding `f_i ↦ 1 + X_i`
//! into power series truncated above degree `c`, which is faithful on
//! `N_{r,c}`; normal forms are recovered by sifting one weight at a time.
//! Collection from the left, driven by memoized conjugation tables, is kept
//! as an independent second route.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abelian::{smith_normal_form, solve_with, IntMatrix, SmithForm};
use crate::error::{Error, Result};
use crate::words::{Letter, Word, MAX_TEXT_RANK};

/// Default cap on the number of basic commutators.
pub const DEFAULT_BASIS_CAP: usize = 64;

/// Default cap on commutator evaluations in the width searches.
pub const DEFAULT_WIDTH_BUDGET: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasicCommutator {
    Generator(usize),
    /// `[u, v]` by basis index.
    Bracket(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HallBasis {
    rank: usize,
    class: usize,
    elements: Vec<BasicCommutator>,
    weights: Vec<usize>,
}

fn mobius(n: usize) -> i64 {
    let mut n = n;
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Number of basic commutators of weight `w` on `r` generators:
/// `(1/w) Σ_{d | w} μ(d) r^{w/d}`.
pub fn witt_count(r: usize, w: usize) -> usize {
    let sum: i128 = (1..=w)
        .filter(|d| w.is_multiple_of(*d))
        .map(|d| mobius(d) as i128 * (r as i128).pow((w / d) as u32))
        .sum();
    (sum / w as i128) as usize
}

impl HallBasis {
    pub fn new(rank: usize, class: usize) -> Result<HallBasis> {
        HallBasis::with_cap(rank, class, DEFAULT_BASIS_CAP)
    }

    pub fn with_cap(rank: usize, class: usize, cap: usize) -> Result<HallBasis> {
        if rank == 0 || rank > MAX_TEXT_RANK {
            return Err(Error::InvalidRank(rank));
        }
        if class == 0 {
            return Err(Error::InvalidArgument("nilpotency class must be at least 1".into()));
        }
        let size: usize = (1..=class).map(|w| witt_count(rank, w)).sum();
        if size > cap {
            return Err(Error::BasisTooLarge { size, cap });
        }
        let mut elements: Vec<BasicCommutator> = (0..rank).map(BasicCommutator::Generator).collect();
        let mut weights = vec![1; rank];
        for w in 2..=class {
            let known = elements.len();
            for u in 0..known {
                for v in 0..known {
                    if weights[u] + weights[v] != w || u <= v {
                        continue;
                    }
                    let admissible = match elements[u] {
                        BasicCommutator::Generator(_) => true,
                        BasicCommutator::Bracket(_, y) => y <= v,
                    };
                    if admissible {
                        elements.push(BasicCommutator::Bracket(u, v));
                        weights.push(w);
                    }
                }
            }
        }
        debug_assert_eq!(elements.len(), size);
        Ok(HallBasis {
            rank,
            class,
            elements,
            weights,
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn class(&self) -> usize {
        self.class
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[BasicCommutator] {
        &self.elements
    }

    pub fn weight(&self, i: usize) -> usize {
        self.weights[i]
    }

    /// Basis indices of weight `w` (contiguous, since the basis is sorted by weight).
    pub fn weight_range(&self, w: usize) -> Range<usize> {
        let start = self.weights.partition_point(|&x| x < w);
        let end = self.weights.partition_point(|&x| x <= w);
        start..end
    }

    pub fn name(&self, i: usize) -> String {
        match self.elements[i] {
            BasicCommutator::Generator(g) => Letter::new(g, false).to_char().expect("rank <= 26").to_string(),
            BasicCommutator::Bracket(u, v) => format!("[{},{}]", self.name(u), self.name(v)),
        }
    }

    pub fn label(&self) -> String {
        format!("N({},{})", self.rank, self.class)
    }
}

/// Mal'cev coordinates with respect to a Hall basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NilElement {
    exps: Vec<i64>,
}

impl NilElement {
    pub fn exps(&self) -> &[i64] {
        &self.exps
    }

    pub fn is_identity(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    fn max_abs(&self) -> i64 {
        self.exps.iter().map(|e| e.abs()).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NilElementJson {
    pub basis: String,
    pub exps: Vec<i64>,
}

/// Truncated noncommutative power series in `X_1, ..., X_r`; the monomial
/// `X_{i_1} ... X_{i_d}` sits at `offset[d] + Σ i_j r^{d-j}`.
type Series = Vec<i64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WidthOutcome {
    Representable,
    NotRepresentableWithinBound,
}

/// Result of a bounded search for `g` as a product of `k` commutators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WidthReport {
    pub outcome: WidthOutcome,
    /// `(x_i, y_i)` with `g = [x_1, y_1] ... [x_k, y_k]`.
    pub factors: Vec<(NilElement, NilElement)>,
    pub bound: i64,
}

/// Normal forms of a conjugate and of its inverse.
type ConjPair = (Vec<i64>, Vec<i64>);
/// A partial product together with the operand choices that built it.
type Layer = Vec<(Series, Vec<(usize, usize)>)>;

pub struct FreeNilpotentGroup {
    basis: HallBasis,
    offsets: Vec<usize>,
    powers: Vec<usize>,
    series: Vec<Series>,
    /// Per weight: the degree-`w` parts of the weight-`w` basic commutators, as columns.
    lie: Vec<(IntMatrix, SmithForm)>,
    /// `conj[m][k][s]` for `m > k`: normal forms of `b_k^{-δ} b_m b_k^{δ}` and
    /// its inverse, `δ = +1` for `s = 0` and `-1` for `s = 1`.
    conj: Vec<Vec<[ConjPair; 2]>>,
}

impl fmt::Debug for FreeNilpotentGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FreeNilpotentGroup({})", self.basis.label())
    }
}

impl FreeNilpotentGroup {
    pub fn new(rank: usize, class: usize) -> Result<FreeNilpotentGroup> {
        FreeNilpotentGroup::from_basis(HallBasis::new(rank, class)?)
    }

    pub fn from_basis(basis: HallBasis) -> Result<FreeNilpotentGroup> {
        let (r, c) = (basis.rank, basis.class);
        let powers: Vec<usize> = (0..=c).map(|d| r.pow(d as u32)).collect();
        let mut offsets = vec![0];
        for d in 0..=c {
            offsets.push(offsets[d] + powers[d]);
        }
        let mut group = FreeNilpotentGroup {
            basis,
            offsets,
            powers,
            series: Vec::new(),
            lie: Vec::new(),
            conj: Vec::new(),
        };
        for i in 0..group.basis.len() {
            let s = match group.basis.elements[i] {
                BasicCommutator::Generator(g) => {
                    let mut s = group.one();
                    s[1 + g] = 1;
                    s
                }
                BasicCommutator::Bracket(u, v) => group.series_commutator(&group.series[u], &group.series[v]),
            };
            group.series.push(s);
        }
        for w in 1..=c {
            let range = group.basis.weight_range(w);
            let mut m = IntMatrix::zeros(group.powers[w], range.len());
            for (col, k) in range.enumerate() {
                for row in 0..group.powers[w] {
                    m[(row, col)] = group.series[k][group.offsets[w] + row];
                }
            }
            let snf = smith_normal_form(&m);
            if snf.rank() != m.cols() {
                return Err(Error::Inconsistency(format!("basic commutators of weight {w} are dependent")));
            }
            group.lie.push((m, snf));
        }
        let n = group.basis.len();
        let mut conj = Vec::with_capacity(n);
        for m in 0..n {
            let mut row = Vec::with_capacity(m);
            for k in 0..m {
                let entry = [1i64, -1].map(|delta| {
                    let bk = group.series_pow(&group.series[k], delta);
                    let bk_inv = group.series_pow(&group.series[k], -delta);
                    let s = group.mul(&group.mul(&bk_inv, &group.series[m]), &bk);
                    let inv = group.inverse(&s);
                    (group.sift(&s), group.sift(&inv))
                });
                row.push(entry);
            }
            conj.push(row);
        }
        group.conj = conj;
        Ok(group)
    }

    pub fn basis(&self) -> &HallBasis {
        &self.basis
    }

    pub fn identity(&self) -> NilElement {
        NilElement {
            exps: vec![0; self.basis.len()],
        }
    }

    pub fn generator(&self, i: usize) -> NilElement {
        let mut x = self.identity();
        x.exps[i] = 1;
        x
    }

    pub fn element(&self, exps: Vec<i64>) -> Result<NilElement> {
        if exps.len() != self.basis.len() {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates given, {} expects {}",
                exps.len(),
                self.basis.label(),
                self.basis.len()
            )));
        }
        Ok(NilElement { exps })
    }

    pub fn to_json(&self, x: &NilElement) -> NilElementJson {
        NilElementJson {
            basis: self.basis.label(),
            exps: x.exps.clone(),
        }
    }

    pub fn from_json(&self, json: &NilElementJson) -> Result<NilElement> {
        if json.basis != self.basis.label() {
            return Err(Error::InvalidArgument(format!(
                "element of {} given to {}",
                json.basis,
                self.basis.label()
            )));
        }
        self.element(json.exps.clone())
    }

    /// `a^2 b [b,a]^-1`
    pub fn format(&self, x: &NilElement) -> String {
        let parts: Vec<String> = x
            .exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e != 0)
            .map(|(i, &e)| {
                if e == 1 {
                    self.basis.name(i)
                } else {
                    format!("{}^{}", self.basis.name(i), e)
                }
            })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(" ")
        }
    }

    /// Every weight-1 coordinate vanishes.
    pub fn in_derived_subgroup(&self, x: &NilElement) -> bool {
        x.exps[..self.basis.rank].iter().all(|&e| e == 0)
    }

    fn one(&self) -> Series {
        let mut s = vec![0; self.offsets[self.basis.class + 1]];
        s[0] = 1;
        s
    }

    fn mul(&self, a: &Series, b: &Series) -> Series {
        let c = self.basis.class;
        let mut out = vec![0; a.len()];
        for da in 0..=c {
            for ia in 0..self.powers[da] {
                let x = a[self.offsets[da] + ia];
                if x == 0 {
                    continue;
                }
                for db in 0..=c - da {
                    let base = self.offsets[da + db] + ia * self.powers[db];
                    let src = &b[self.offsets[db]..self.offsets[db] + self.powers[db]];
                    for (jb, &y) in src.iter().enumerate() {
                        if y != 0 {
                            out[base + jb] += x * y;
                        }
                    }
                }
            }
        }
        out
    }

    /// `(1 + N)⁻¹ = Σ (-N)^k`, finite because `N` has no constant term.
    fn inverse(&self, a: &Series) -> Series {
        let mut neg = a.iter().map(|x| -x).collect::<Series>();
        neg[0] = 0;
        let mut out = self.one();
        let mut term = self.one();
        for _ in 0..self.basis.class {
            term = self.mul(&term, &neg);
            for (o, t) in out.iter_mut().zip(&term) {
                *o += t;
            }
        }
        out
    }

    fn series_pow(&self, a: &Series, e: i64) -> Series {
        let mut base = if e < 0 { self.inverse(a) } else { a.clone() };
        let mut n = e.unsigned_abs();
        let mut out = self.one();
        while n > 0 {
            if n & 1 == 1 {
                out = self.mul(&out, &base);
            }
            n >>= 1;
            if n > 0 {
                base = self.mul(&base, &base);
            }
        }
        out
    }

    fn series_commutator(&self, u: &Series, v: &Series) -> Series {
        self.commutator_with_inverses(u, &self.inverse(u), v, &self.inverse(v))
    }

    fn commutator_with_inverses(&self, u: &Series, u_inv: &Series, v: &Series, v_inv: &Series) -> Series {
        self.mul(&self.mul(&self.mul(u_inv, v_inv), u), v)
    }

    fn to_series(&self, x: &NilElement) -> Series {
        x.exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e != 0)
            .fold(self.one(), |acc, (k, &e)| self.mul(&acc, &self.series_pow(&self.series[k], e)))
    }

    /// Normal form of the group element with Magnus image `s`.
    fn sift(&self, s: &Series) -> Vec<i64> {
        let mut s = s.clone();
        let mut exps = vec![0; self.basis.len()];
        for w in 1..=self.basis.class {
            let (m, snf) = &self.lie[w - 1];
            let part = &s[self.offsets[w]..self.offsets[w] + self.powers[w]];
            let e = solve_with(m, snf, part).expect("leading part lies in the span of the basic commutators");
            let mut layer = self.one();
            for (k, ek) in self.basis.weight_range(w).zip(e) {
                exps[k] = ek;
                if ek != 0 {
                    layer = self.mul(&layer, &self.series_pow(&self.series[k], ek));
                }
            }
            s = self.mul(&self.inverse(&layer), &s);
        }
        debug_assert_eq!(s, self.one());
        exps
    }

    fn series_to_element(&self, s: &Series) -> NilElement {
        NilElement { exps: self.sift(s) }
    }

    pub fn multiply(&self, x: &NilElement, y: &NilElement) -> NilElement {
        self.series_to_element(&self.mul(&self.to_series(x), &self.to_series(y)))
    }

    pub fn invert(&self, x: &NilElement) -> NilElement {
        self.series_to_element(&self.inverse(&self.to_series(x)))
    }

    /// `[x, y] = x⁻¹ y⁻¹ x y`
    pub fn commutator(&self, x: &NilElement, y: &NilElement) -> NilElement {
        self.series_to_element(&self.series_commutator(&self.to_series(x), &self.to_series(y)))
    }

    pub fn pow(&self, x: &NilElement, e: i64) -> NilElement {
        self.series_to_element(&self.series_pow(&self.to_series(x), e))
    }

    fn check_word(&self, w: &Word) -> Result<()> {
        if w.rank() != self.basis.rank {
            return Err(Error::AlphabetMismatch {
                left: w.rank(),
                right: self.basis.rank,
            });
        }
        Ok(())
    }

    /// Normal form of the image of `w`.
    pub fn collect(&self, w: &Word) -> Result<NilElement> {
        self.check_word(w)?;
        let s = w.letters().iter().fold(self.one(), |acc, l| {
            let g = &self.series[l.gen()];
            let step = if l.is_inverse() { self.inverse(g) } else { g.clone() };
            self.mul(&acc, &step)
        });
        Ok(self.series_to_element(&s))
    }

    /// Normal form of `w` by collection from the left.
    pub fn collect_by_collection(&self, w: &Word) -> Result<NilElement> {
        self.check_word(w)?;
        let mut e = vec![0; self.basis.len()];
        for l in w.letters() {
            self.push_letter(&mut e, l.gen(), l.sign());
        }
        Ok(NilElement { exps: e })
    }

    /// `x · y` by collection from the left.
    pub fn multiply_by_collection(&self, x: &NilElement, y: &NilElement) -> NilElement {
        let mut e = x.exps.clone();
        self.push_normal_form(&mut e, &y.exps);
        NilElement { exps: e }
    }

    /// `e ← e · b_k^δ`. The tail `T` beyond `k` is moved across with
    /// `T b_k^δ = b_k^δ (b_k^{-δ} T b_k^δ)`; every conjugate only involves
    /// indices above `k`, so the recursion terminates.
    fn push_letter(&self, e: &mut [i64], k: usize, delta: i64) {
        let tail: Vec<(usize, i64)> = (k + 1..e.len()).filter(|&m| e[m] != 0).map(|m| (m, e[m])).collect();
        for &(m, _) in &tail {
            e[m] = 0;
        }
        e[k] += delta;
        let side = usize::from(delta < 0);
        for (m, em) in tail {
            let (fwd, back) = &self.conj[m][k][side];
            let nf = if em > 0 { fwd } else { back };
            for _ in 0..em.unsigned_abs() {
                self.push_normal_form(e, nf);
            }
        }
    }

    fn push_normal_form(&self, e: &mut [i64], nf: &[i64]) {
        for (j, &x) in nf.iter().enumerate() {
            for _ in 0..x.unsigned_abs() {
                self.push_letter(e, j, x.signum());
            }
        }
    }

    /// All elements whose non-central coordinates lie in `[-bound, bound]`
    /// and whose central (weight `c`) coordinates are zero, sorted by
    /// largest coordinate, then lexicographically. Central coordinates do
    /// not affect commutators, so this loses nothing in the width searches.
    pub fn operands(&self, bound: i64) -> Vec<NilElement> {
        let free = self.basis.weight_range(self.basis.class).start;
        let free = if self.basis.class == 1 { 0 } else { free };
        let side = (2 * bound + 1) as usize;
        let count = side.pow(free as u32);
        let mut out: Vec<NilElement> = (0..count)
            .map(|mut idx| {
                let mut exps = vec![0; self.basis.len()];
                for slot in exps.iter_mut().take(free).rev() {
                    *slot = (idx % side) as i64 - bound;
                    idx /= side;
                }
                NilElement { exps }
            })
            .collect();
        out.sort_by_key(|x| (x.max_abs(), x.clone()));
        out
    }

    fn require_derived(&self, g: &NilElement) -> Result<()> {
        if g.exps.len() != self.basis.len() {
            return Err(Error::InvalidArgument("coordinate count does not match the basis".into()));
        }
        if !self.in_derived_subgroup(g) {
            return Err(Error::NotInDerivedSubgroup);
        }
        Ok(())
    }

    fn charge(cost: u128, budget: u64) -> Result<()> {
        if cost > budget as u128 {
            return Err(Error::BudgetExceeded {
                explored: u64::try_from(cost).unwrap_or(u64::MAX),
                budget,
            });
        }
        Ok(())
    }

    /// Searches for `g` as a product of `k` commutators of elements with
    /// coordinates in `[-bound, bound]`. The cost of the search is computed
    /// up front and checked against `budget` before any work is done.
    pub fn commutator_width_bounded(&self, g: &NilElement, k: usize, bound: i64, budget: u64) -> Result<WidthReport> {
        self.require_derived(g)?;
        let report = |factors: Option<Vec<(NilElement, NilElement)>>| match factors {
            Some(factors) => WidthReport {
                outcome: WidthOutcome::Representable,
                factors,
                bound,
            },
            None => WidthReport {
                outcome: WidthOutcome::NotRepresentableWithinBound,
                factors: Vec::new(),
                bound,
            },
        };
        if k == 0 {
            return Ok(report(g.is_identity().then(Vec::new)));
        }
        let ops = self.operands(bound);
        let n = ops.len() as u128;
        let half = k.div_ceil(2);
        Self::charge(n.pow(2 * half as u32) + n * n, budget)?;
        let prepared: Vec<(Series, Series)> = ops
            .iter()
            .map(|x| {
                let s = self.to_series(x);
                let inv = self.inverse(&s);
                (s, inv)
            })
            .collect();
        let target = self.to_series(g);
        let comm = |i: usize, j: usize| {
            let (x, xi) = &prepared[i];
            let (y, yi) = &prepared[j];
            self.commutator_with_inverses(x, xi, y, yi)
        };
        let pair = |(i, j): (usize, usize)| (ops[i].clone(), ops[j].clone());

        if k == 1 {
            let found = (0..ops.len())
                .into_par_iter()
                .find_map_first(|i| (0..ops.len()).find(|&j| comm(i, j) == target).map(|j| (i, j)));
            return Ok(report(found.map(|p| vec![pair(p)])));
        }

        // Products of `j` commutators, first witness kept, in discovery order.
        let singles: Vec<(Series, (usize, usize))> = {
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for i in 0..ops.len() {
                for j in 0..ops.len() {
                    let s = comm(i, j);
                    if seen.insert(s.clone()) {
                        out.push((s, (i, j)));
                    }
                }
            }
            out
        };
        let extend = |layer: &[(Series, Vec<(usize, usize)>)]| {
            let mut seen = HashSet::new();
            let mut out = Vec::new();
            for (s, w) in layer {
                for (t, p) in &singles {
                    let st = self.mul(s, t);
                    if seen.insert(st.clone()) {
                        let mut w2 = w.clone();
                        w2.push(*p);
                        out.push((st, w2));
                    }
                }
            }
            out
        };
        let mut layers: Vec<Layer> =
            vec![singles.iter().map(|(s, p)| (s.clone(), vec![*p])).collect()];
        while layers.len() < half {
            let last = layers.last().expect("nonempty");
            Self::charge((last.len() as u128) * (singles.len() as u128), budget)?;
            let next = extend(last);
            layers.push(next);
        }
        let left = &layers[half - 1];
        let right_layer = &layers[k - half - 1];
        let right: HashMap<&Series, &Vec<(usize, usize)>> = {
            let mut map = HashMap::new();
            for (s, w) in right_layer {
                map.entry(s).or_insert(w);
            }
            map
        };
        let found = left.par_iter().find_map_first(|(s, w)| {
            let rest = self.mul(&self.inverse(s), &target);
            right.get(&rest).map(|w2| w.iter().chain(w2.iter()).map(|&p| pair(p)).collect::<Vec<_>>())
        });
        Ok(report(found))
    }

    /// Searches for `g = [g_1, z_1] ... [g_r, z_r]`, `z_i` the generators, with
    /// every `g_i` drawn from [`operands`](Self::operands)`(bound)`.
    pub fn verify_commutator_form(&self, g: &NilElement, bound: i64, budget: u64) -> Result<Option<Vec<NilElement>>> {
        self.require_derived(g)?;
        let r = self.basis.rank;
        let ops = self.operands(bound);
        let n = ops.len() as u128;
        let left_terms = r.div_ceil(2);
        let right_terms = r - left_terms;
        Self::charge(n.pow(left_terms as u32) + n.pow(right_terms as u32), budget)?;
        // terms[i][j] = [ops[j], z_i]
        let terms: Vec<Vec<Series>> = (0..r)
            .map(|i| {
                let z = &self.series[i];
                let z_inv = self.inverse(z);
                ops.iter()
                    .map(|x| {
                        let s = self.to_series(x);
                        self.commutator_with_inverses(&s, &self.inverse(&s), z, &z_inv)
                    })
                    .collect()
            })
            .collect();
        let tuple = |mut idx: usize, len: usize| -> Vec<usize> {
            let mut out = vec![0; len];
            for slot in out.iter_mut().rev() {
                *slot = idx % ops.len();
                idx /= ops.len();
            }
            out
        };
        let product = |from: usize, t: &[usize]| {
            t.iter()
                .enumerate()
                .fold(self.one(), |acc, (o, &j)| self.mul(&acc, &terms[from + o][j]))
        };
        let right_count = ops.len().pow(right_terms as u32);
        let mut right: HashMap<Series, Vec<usize>> = HashMap::new();
        for idx in 0..right_count {
            let t = tuple(idx, right_terms);
            right.entry(product(left_terms, &t)).or_insert(t);
        }
        let target = self.to_series(g);
        let left_count = ops.len().pow(left_terms as u32);
        let found = (0..left_count).into_par_iter().find_map_first(|idx| {
            let t = tuple(idx, left_terms);
            let rest = self.mul(&self.inverse(&product(0, &t)), &target);
            right.get(&rest).map(|t2| t.iter().chain(t2).map(|&j| ops[j].clone()).collect::<Vec<_>>())
        });
        Ok(found)
    }

    /// Product `[g_1, z_1] ... [g_r, z_r]`.
    pub fn commutator_form(&self, gs: &[NilElement]) -> NilElement {
        gs.iter()
            .enumerate()
            .fold(self.identity(), |acc, (i, x)| self.multiply(&acc, &self.commutator(x, &self.generator(i))))
    }

    /// Finds an element of the derived subgroup that is of the form
    /// `[g_1, z_1] ... [g_r, z_r]` with coordinates in `[-form_bound, form_bound]`
    /// but is not a single commutator of elements with coordinates in
    /// `[-single_bound, single_bound]`. Tuples are tried in order of their
    /// largest coordinate, so the first hit has the smallest such witness.
    pub fn find_width_gap(
        &self,
        single_bound: i64,
        form_bound: i64,
        budget: u64,
    ) -> Result<Option<(NilElement, Vec<NilElement>)>> {
        let r = self.basis.rank;
        let singles_ops = self.operands(single_bound);
        let ops = self.operands(form_bound);
        let sn = singles_ops.len() as u128;
        Self::charge(sn * sn + (ops.len() as u128).pow(r as u32), budget)?;
        let prepared: Vec<(Series, Series)> = singles_ops
            .iter()
            .map(|x| {
                let s = self.to_series(x);
                (self.inverse(&s), s)
            })
            .collect();
        let singles: HashSet<Series> = prepared
            .par_iter()
            .flat_map_iter(|(xi, x)| {
                prepared
                    .iter()
                    .map(move |(yi, y)| self.commutator_with_inverses(x, xi, y, yi))
            })
            .collect();
        let terms: Vec<Vec<Series>> = (0..r)
            .map(|i| {
                let z = &self.series[i];
                let z_inv = self.inverse(z);
                ops.iter()
                    .map(|x| {
                        let s = self.to_series(x);
                        self.commutator_with_inverses(&s, &self.inverse(&s), z, &z_inv)
                    })
                    .collect()
            })
            .collect();
        for level in 0..=form_bound {
            let within = ops.partition_point(|x| x.max_abs() <= level);
            let total = within.pow(r as u32);
            for mut idx in 0..total {
                let mut t = vec![0; r];
                for slot in t.iter_mut().rev() {
                    *slot = idx % within;
                    idx /= within;
                }
                if t.iter().all(|&j| ops[j].max_abs() < level) {
                    continue;
                }
                let value = t
                    .iter()
                    .enumerate()
                    .fold(self.one(), |acc, (i, &j)| self.mul(&acc, &terms[i][j]));
                if !singles.contains(&value) {
                    let witness = t.iter().map(|&j| ops[j].clone()).collect();
                    return Ok(Some((self.series_to_element(&value), witness)));
                }
            }
        }
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn names(b: &HallBasis) -> Vec<String> {
        (0..b.len()).map(|i| b.name(i)).collect()
    }

    #[test]
    fn hall_basis_examples() {
        assert_eq!(names(&HallBasis::new(2, 2).unwrap()), ["a", "b", "[b,a]"]);
        assert_eq!(
            names(&HallBasis::new(2, 3).unwrap()),
            ["a", "b", "[b,a]", "[[b,a],a]", "[[b,a],b]"]
        );
        assert_eq!(HallBasis::new(3, 2).unwrap().len(), 6);
        assert_eq!(
            HallBasis::with_cap(3, 6, 50),
            Err(Error::BasisTooLarge { size: 3 + 3 + 8 + 18 + 48 + 116, cap: 50 })
        );
        assert!(HallBasis::new(2, 0).is_err());
    }

    // Oracle: basic commutator counts are the dimensions of the graded
    // pieces of the free Lie algebra, tabulated independently.
    #[test]
    fn witt_counts() {
        let table = [(2, [2, 1, 2, 3, 6]), (3, [3, 3, 8, 18, 48])];
        for (r, counts) in table {
            for (w, &n) in counts.iter().enumerate() {
                assert_eq!(witt_count(r, w + 1), n);
            }
            for c in 1..=4 {
                let b = HallBasis::new(r, c).unwrap();
                for w in 1..=c {
                    assert_eq!(b.weight_range(w).len(), counts[w - 1], "r={r} c={c} w={w}");
                }
            }
        }
    }

    fn word(s: &str, r: usize) -> Word {
        Word::parse(s, r).unwrap()
    }

    #[test]
    fn collect_examples() {
        let n = FreeNilpotentGroup::new(2, 2).unwrap();
        assert_eq!(n.collect(&word("abAB", 2)).unwrap().exps(), [0, 0, -1]);
        assert_eq!(n.collect(&word("aa", 2)).unwrap().exps(), [2, 0, 0]);
        assert_eq!(n.collect(&word("abab", 2)).unwrap().exps(), [2, 2, 1]);
        assert_eq!(n.collect(&word("Bab", 2)).unwrap().exps(), [1, 0, -1]);
        for w in ["abAB", "aa", "abab", "Bab"] {
            assert_eq!(n.collect_by_collection(&word(w, 2)), n.collect(&word(w, 2)));
        }
    }

    // Oracle: closed-form class-2 product a^x b^y [b,a]^z · a^x' b^y' [b,a]^z'
    // = a^{x+x'} b^{y+y'} [b,a]^{z+z'+y·x'}, from b a = a b [b,a].
    #[test]
    fn class_two_product_formula() {
        let n = FreeNilpotentGroup::new(2, 2).unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let p: Vec<i64> = (0..6).map(|_| rng.gen_range(-4..=4)).collect();
            let x = n.element(p[..3].to_vec()).unwrap();
            let y = n.element(p[3..].to_vec()).unwrap();
            let expected = vec![p[0] + p[3], p[1] + p[4], p[2] + p[5] + p[1] * p[3]];
            assert_eq!(n.multiply(&x, &y).exps(), expected);
            assert_eq!(n.multiply_by_collection(&x, &y).exps(), expected);
        }
    }

    #[test]
    fn two_routes_agree() {
        let mut rng = StdRng::seed_from_u64(11);
        for (r, c) in [(2, 3), (3, 2), (2, 4), (3, 3)] {
            let n = FreeNilpotentGroup::new(r, c).unwrap();
            for _ in 0..40 {
                let len = rng.gen_range(0..=10);
                let signed: Vec<i32> = (0..len)
                    .map(|_| {
                        let g = rng.gen_range(1..=r as i32);
                        if rng.gen_bool(0.5) {
                            g
                        } else {
                            -g
                        }
                    })
                    .collect();
                let w = Word::from_signed(r, &signed).unwrap();
                assert_eq!(n.collect(&w).unwrap(), n.collect_by_collection(&w).unwrap(), "{w} in N({r},{c})");
            }
        }
    }

    #[test]
    fn group_operations() {
        let n = FreeNilpotentGroup::new(2, 2).unwrap();
        let a = n.generator(0);
        let b = n.generator(1);
        assert!(n.commutator(&a, &a).is_identity());
        for k in -5i64..=5 {
            // Oracle: iterated multiplication.
            let ak = (0..k.abs()).fold(n.identity(), |acc, _| {
                n.multiply(&acc, &if k > 0 { a.clone() } else { n.invert(&a) })
            });
            assert_eq!(ak, n.pow(&a, k));
            assert_eq!(n.commutator(&ak, &b).exps(), [0, 0, -k]);
        }
        let x = n.element(vec![3, -2, 5]).unwrap();
        assert!(n.multiply(&x, &n.invert(&x)).is_identity());
        assert_eq!(n.format(&x), "a^3 b^-2 [b,a]^5");
        assert_eq!(n.format(&n.identity()), "1");
        let j = n.to_json(&x);
        assert_eq!(serde_json::to_string(&j).unwrap(), r#"{"basis":"N(2,2)","exps":[3,-2,5]}"#);
        assert_eq!(n.from_json(&j).unwrap(), x);
    }

    #[test]
    fn width_examples() {
        let n = FreeNilpotentGroup::new(2, 2).unwrap();
        let c5 = n.element(vec![0, 0, 5]).unwrap();
        let report = n.commutator_width_bounded(&c5, 1, 5, DEFAULT_WIDTH_BUDGET).unwrap();
        assert_eq!(report.outcome, WidthOutcome::Representable);
        let (x, y) = &report.factors[0];
        assert_eq!(n.commutator(x, y), c5);

        let zero = n.commutator_width_bounded(&n.identity(), 0, 1, 1).unwrap();
        assert_eq!(zero.outcome, WidthOutcome::Representable);
        let none = n.commutator_width_bounded(&c5, 0, 1, 1).unwrap();
        assert_eq!(none.outcome, WidthOutcome::NotRepresentableWithinBound);

        let two = n.commutator_width_bounded(&c5, 2, 1, DEFAULT_WIDTH_BUDGET).unwrap();
        assert_eq!(two.outcome, WidthOutcome::NotRepresentableWithinBound);
        let two = n.commutator_width_bounded(&n.element(vec![0, 0, 2]).unwrap(), 2, 1, DEFAULT_WIDTH_BUDGET).unwrap();
        assert_eq!(two.outcome, WidthOutcome::Representable);

        assert_eq!(
            n.commutator_width_bounded(&n.generator(0), 1, 1, 100),
            Err(Error::NotInDerivedSubgroup)
        );
        assert!(matches!(
            n.commutator_width_bounded(&c5, 1, 5, 10),
            Err(Error::BudgetExceeded { budget: 10, .. })
        ));
    }

    #[test]
    fn commutator_form_examples() {
        let n = FreeNilpotentGroup::new(2, 2).unwrap();
        let g = n.element(vec![0, 0, 1]).unwrap();
        let gs = n.verify_commutator_form(&g, 2, DEFAULT_WIDTH_BUDGET).unwrap().unwrap();
        assert_eq!(n.commutator_form(&gs), g);
        let gs = n.verify_commutator_form(&n.identity(), 2, DEFAULT_WIDTH_BUDGET).unwrap().unwrap();
        assert!(gs.iter().all(|x| x.is_identity()));
    }
}
