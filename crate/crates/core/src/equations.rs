//! Equations over free groups and their subgroups.
//!
//! The solver is exhaustive over subgroup elements up to a length bound, so a
//! `Found` answer is always exact while `NotFoundUpToBound` only speaks for
//! the searched region. Conjugator extraction, by contrast, is exact: the
//! centralizer of a nontrivial element is cyclic, which leaves a finite
//! window of candidates to check.

use serde::{Deserialize, Serialize};

use crate::audit;
use crate::error::{Error, Result};
use crate::stallings::SubgroupGraph;
use crate::words::{Substitution, Word};

/// Default cap on visited search states.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    /// Maximum reduced length of each variable's value.
    pub bound: usize,
    /// Maximum number of partial assignments visited.
    pub budget: u64,
}

impl SearchLimits {
    pub fn new(bound: usize) -> SearchLimits {
        SearchLimits {
            bound,
            budget: DEFAULT_BUDGET,
        }
    }

    pub fn with_budget(self, budget: u64) -> SearchLimits {
        SearchLimits { budget, ..self }
    }
}

/// `lhs(x_1, ..., x_n) = rhs` with `rhs` a constant of `F_r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Equation {
    pub lhs: Word,
    pub rhs: Word,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientSystem {
    vars: usize,
    rank: usize,
    equations: Vec<Equation>,
}

#[derive(Deserialize)]
struct SystemJson {
    vars: usize,
    eqs: Vec<EquationJson>,
}

#[derive(Deserialize)]
struct EquationJson {
    lhs: String,
    rhs: String,
}

impl CoefficientSystem {
    pub fn new(vars: usize, rank: usize, equations: Vec<Equation>) -> Result<CoefficientSystem> {
        for e in &equations {
            if e.lhs.rank() != vars {
                return Err(Error::AlphabetMismatch {
                    left: e.lhs.rank(),
                    right: vars,
                });
            }
            if e.rhs.rank() != rank {
                return Err(Error::AlphabetMismatch {
                    left: e.rhs.rank(),
                    right: rank,
                });
            }
        }
        Ok(CoefficientSystem { vars, rank, equations })
    }

    /// `{"vars": n, "eqs": [{"lhs": "x1 x2 X1", "rhs": "abA"}]}`
    pub fn from_json(text: &str, rank: usize) -> Result<CoefficientSystem> {
        let parsed: SystemJson = serde_json::from_str(text).map_err(|e| Error::Parse {
            position: e.column(),
            message: e.to_string(),
        })?;
        let equations = parsed
            .eqs
            .iter()
            .map(|e| {
                Ok(Equation {
                    lhs: Word::parse_variables(&e.lhs, parsed.vars)?,
                    rhs: Word::parse(&e.rhs, rank)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        CoefficientSystem::new(parsed.vars, rank, equations)
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn is_satisfied_by(&self, assignment: &Substitution) -> bool {
        assignment.domain_rank() == self.vars
            && assignment.target_rank() == self.rank
            && self
                .equations
                .iter()
                .all(|e| assignment.apply_unchecked(&e.lhs) == e.rhs)
    }

    fn occurring(&self) -> Vec<bool> {
        let mut used = vec![false; self.vars];
        for e in &self.equations {
            for l in e.lhs.letters() {
                used[l.gen()] = true;
            }
        }
        used
    }
}

/// The retraction system for `H`: one equation `v_i(x_1, ..., x_r) = h_i`
/// per basis word `h_i = v_i(f_1, ..., f_r)`. Its solutions with every `x_j`
/// in `H` are exactly the retractions `f_j ↦ x_j` of `F_r` onto `H`.
pub fn retraction_system(h: &SubgroupGraph) -> CoefficientSystem {
    let r = h.ambient_rank();
    let equations = h
        .basis()
        .generators
        .into_iter()
        .map(|b| Equation { lhs: b.clone(), rhs: b })
        .collect();
    CoefficientSystem {
        vars: r,
        rank: r,
        equations,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub assignment: Substitution,
    pub states_explored: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Found(Solution),
    NotFoundUpToBound { bound: usize, states_explored: u64 },
}

impl SolveOutcome {
    pub fn is_found(&self) -> bool {
        matches!(self, SolveOutcome::Found(_))
    }

    pub fn solution(&self) -> Option<&Solution> {
        match self {
            SolveOutcome::Found(s) => Some(s),
            SolveOutcome::NotFoundUpToBound { .. } => None,
        }
    }
}

/// Depth-first search over assignments drawn from `candidates`.
///
/// Tuples are visited level by level, level `L` holding the tuples whose
/// longest component has length exactly `L`. Within a level the order is
/// colexicographic on candidate indices (`x_1` varies fastest), candidates
/// being in shortlex order. Equations are checked as soon as all of their
/// variables are assigned.
struct TupleSearch<'a> {
    system: &'a CoefficientSystem,
    candidates: &'a [Word],
    budget: u64,
    explored: u64,
    order: Vec<usize>,
    checks: Vec<Vec<usize>>,
    current: Substitution,
}

impl<'a> TupleSearch<'a> {
    fn new(system: &'a CoefficientSystem, candidates: &'a [Word], budget: u64, free: &[bool]) -> TupleSearch<'a> {
        let order: Vec<usize> = (0..system.vars).rev().filter(|&v| free[v]).collect();
        let mut depth_of = vec![usize::MAX; system.vars];
        for (d, &v) in order.iter().enumerate() {
            depth_of[v] = d;
        }
        let mut checks = vec![Vec::new(); order.len()];
        for (i, e) in system.equations.iter().enumerate() {
            if let Some(d) = e.lhs.letters().iter().map(|l| depth_of[l.gen()]).max() {
                checks[d].push(i);
            }
        }
        TupleSearch {
            system,
            candidates,
            budget,
            explored: 0,
            order,
            checks,
            current: Substitution::trivial(system.vars, system.rank),
        }
    }

    fn run(&mut self, bound: usize, accept: &mut dyn FnMut(&Substitution) -> bool) -> Result<Option<Substitution>> {
        // Equations without variables.
        if self
            .system
            .equations
            .iter()
            .any(|e| e.lhs.is_empty() && !e.rhs.is_empty())
        {
            return Ok(None);
        }
        if self.order.is_empty() {
            self.explored += 1;
            return Ok(accept(&self.current).then(|| self.current.clone()));
        }
        for level in 0..=bound {
            if !self.candidates.iter().any(|c| c.len() == level) {
                continue;
            }
            if let Some(s) = self.dfs(0, level, false, accept)? {
                return Ok(Some(s));
            }
        }
        Ok(None)
    }

    fn dfs(
        &mut self,
        depth: usize,
        level: usize,
        reached: bool,
        accept: &mut dyn FnMut(&Substitution) -> bool,
    ) -> Result<Option<Substitution>> {
        let var = self.order[depth];
        let last = depth + 1 == self.order.len();
        for cand in self.candidates {
            if cand.len() > level {
                break;
            }
            if last && !reached && cand.len() < level {
                continue;
            }
            self.explored += 1;
            if self.explored > self.budget {
                return Err(Error::BudgetExceeded {
                    explored: self.explored,
                    budget: self.budget,
                });
            }
            self.current.set_image(var, cand.clone());
            let ok = self.checks[depth].iter().all(|&i| {
                let e = &self.system.equations[i];
                self.current.apply_unchecked(&e.lhs) == e.rhs
            });
            if !ok {
                continue;
            }
            if last {
                if accept(&self.current) {
                    return Ok(Some(self.current.clone()));
                }
            } else if let Some(s) = self.dfs(depth + 1, level, reached || cand.len() == level, accept)? {
                return Ok(Some(s));
            }
        }
        self.current.set_image(var, Word::identity(self.system.rank));
        Ok(None)
    }
}

fn check_domain(system: &CoefficientSystem, domain: &SubgroupGraph) -> Result<()> {
    if domain.ambient_rank() != system.rank {
        return Err(Error::AlphabetMismatch {
            left: system.rank,
            right: domain.ambient_rank(),
        });
    }
    Ok(())
}

/// Searches for a solution with every variable in `domain`, of length at
/// most `limits.bound`. Variables that occur in no equation are set to the
/// identity.
pub fn solve_in_subgroup(system: &CoefficientSystem, domain: &SubgroupGraph, limits: SearchLimits) -> Result<SolveOutcome> {
    check_domain(system, domain)?;
    let candidates = domain.enumerate_elements(limits.bound);
    let free = system.occurring();
    let mut search = TupleSearch::new(system, &candidates, limits.budget, &free);
    let found = search.run(limits.bound, &mut |_| true)?;
    finish(system, found, limits.bound, search.explored)
}

fn finish(system: &CoefficientSystem, found: Option<Substitution>, bound: usize, explored: u64) -> Result<SolveOutcome> {
    match found {
        Some(assignment) => {
            let ok = system.is_satisfied_by(&assignment);
            audit::record_solution(ok);
            if !ok {
                return Err(Error::Inconsistency(format!("solver returned a non-solution: {assignment}")));
            }
            Ok(SolveOutcome::Found(Solution {
                assignment,
                states_explored: explored,
            }))
        }
        None => Ok(SolveOutcome::NotFoundUpToBound {
            bound,
            states_explored: explored,
        }),
    }
}

/// The single equation `w(x_1, ..., x_n) = h` over `domain`.
pub fn solve_verbal(w: &Word, h: &Word, domain: &SubgroupGraph, limits: SearchLimits) -> Result<SolveOutcome> {
    let system = CoefficientSystem::new(
        w.rank(),
        h.rank(),
        vec![Equation {
            lhs: w.clone(),
            rhs: h.clone(),
        }],
    )?;
    solve_in_subgroup(&system, domain, limits)
}

/// Shortest `u` (ties shortlex) with `g_i = u⁻¹ h_i u` for every `i`.
pub fn conjugator_of_tuples(g: &[Word], h: &[Word]) -> Result<Option<Word>> {
    if g.len() != h.len() {
        return Err(Error::TupleLengthMismatch {
            left: g.len(),
            right: h.len(),
        });
    }
    let Some(first) = h.iter().position(|x| !x.is_empty()) else {
        return Err(Error::DegenerateTuple);
    };
    let rank = h[first].rank();
    for x in g.iter().chain(h) {
        if x.rank() != rank {
            return Err(Error::AlphabetMismatch {
                left: x.rank(),
                right: rank,
            });
        }
    }
    if g.iter().zip(h).any(|(a, b)| a.is_empty() != b.is_empty()) {
        return Ok(None);
    }
    let Some(u0) = conjugator_of_pair(&g[first], &h[first]) else {
        return Ok(None);
    };
    // Every solution of the first coordinate is c^k u0, c the root of h[first].
    let (c, _) = h[first].primitive_root()?;
    let (p, _) = h[first].cyclic_decomposition();
    let mut fixed_k: Option<Vec<i64>> = None;
    for (gj, hj) in g.iter().zip(h) {
        if hj.is_empty() {
            continue;
        }
        let target = &(&u0 * gj) * &u0.invert();
        if &c * hj == hj * &c {
            if *hj != target {
                return Ok(None);
            }
            continue;
        }
        let window = (hj.len() + target.len() + 4 * p.len() + 2) as i64;
        let ks: Vec<i64> = (-window..=window)
            .filter(|&k| hj.conjugate(&c.pow(k)).expect("same rank") == target)
            .collect();
        fixed_k = Some(match fixed_k {
            None => ks,
            Some(prev) => prev.into_iter().filter(|k| ks.contains(k)).collect(),
        });
    }
    let ks = match fixed_k {
        Some(ks) => ks,
        None => {
            let window = 2 * u0.len() as i64 + 1;
            (-window..=window).collect()
        }
    };
    Ok(ks.into_iter().map(|k| &c.pow(k) * &u0).min())
}

/// Some `u` with `g = u⁻¹ h u`, both nontrivial.
fn conjugator_of_pair(g: &Word, h: &Word) -> Option<Word> {
    let (p, hc) = h.cyclic_decomposition();
    let (q, gc) = g.cyclic_decomposition();
    if hc.len() != gc.len() {
        return None;
    }
    let hl = hc.letters();
    let gl = gc.letters();
    let n = hl.len();
    let s = (0..n).find(|&s| (0..n).all(|i| gl[i] == hl[(s + i) % n]))?;
    let t0 = Word::from_letters(h.rank(), hl[..s].iter().copied()).expect("letters in range");
    Some(&(&p * &t0) * &q.invert())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum CTestVerdict {
    /// `w(ḡ) ≠ w(v̄)`: the pair says nothing.
    Vacuous,
    /// Equal nontrivial values and `s⁻¹ g_i s = v_i` for the returned `s`.
    Consistent { conjugator: Word },
    /// Equal nontrivial values but the tuples are not conjugate.
    NotConjugate,
    /// Both values trivial.
    TrivialValue,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CTestReport {
    pub verdict: CTestVerdict,
    /// Lee property on the left tuple: `w(ḡ) = 1` exactly when `⟨ḡ⟩` is cyclic.
    pub lee_left: bool,
    pub lee_right: bool,
}

fn generates_cyclic(tuple: &[Word], rank: usize) -> Result<bool> {
    Ok(SubgroupGraph::fold(tuple, rank)?.rank() <= 1)
}

/// Checks the C-test property of `w` (over `m` variables) on each pair of
/// `m`-tuples, and the Lee property on each tuple.
pub fn check_ctest_property(w: &Word, pairs: &[(Vec<Word>, Vec<Word>)], rank: usize) -> Result<Vec<CTestReport>> {
    pairs
        .iter()
        .map(|(g, v)| {
            let eval = |tuple: &[Word]| -> Result<Word> {
                Substitution::new(tuple.to_vec(), rank)?.apply(w)
            };
            let wg = eval(g)?;
            let wv = eval(v)?;
            let verdict = if wg != wv {
                CTestVerdict::Vacuous
            } else if wg.is_empty() {
                CTestVerdict::TrivialValue
            } else {
                match conjugator_of_tuples(v, g)? {
                    Some(conjugator) => CTestVerdict::Consistent { conjugator },
                    None => CTestVerdict::NotConjugate,
                }
            };
            Ok(CTestReport {
                verdict,
                lee_left: wg.is_empty() == generates_cyclic(g, rank)?,
                lee_right: wv.is_empty() == generates_cyclic(v, rank)?,
            })
        })
        .collect()
}

/// Searches for a retraction `φ: F_r → H` taking pairwise distinct values on
/// `targets`.
pub fn find_discriminating_retraction(domain: &SubgroupGraph, targets: &[Word], limits: SearchLimits) -> Result<SolveOutcome> {
    for (i, t) in targets.iter().enumerate() {
        if t.rank() != domain.ambient_rank() {
            return Err(Error::AlphabetMismatch {
                left: t.rank(),
                right: domain.ambient_rank(),
            });
        }
        if targets[..i].contains(t) {
            return Err(Error::DuplicateTargets);
        }
    }
    let system = retraction_system(domain);
    let candidates = domain.enumerate_elements(limits.bound);
    let free = vec![true; system.vars];
    let mut search = TupleSearch::new(&system, &candidates, limits.budget, &free);
    let mut distinct = |phi: &Substitution| {
        let images: Vec<Word> = targets.iter().map(|t| phi.apply_unchecked(t)).collect();
        images.iter().enumerate().all(|(i, x)| !images[..i].contains(x))
    };
    let found = search.run(limits.bound, &mut distinct)?;
    if let Some(phi) = &found {
        if !distinct(phi) {
            return Err(Error::Inconsistency("discriminating search returned a collision".into()));
        }
    }
    finish(&system, found, limits.bound, search.explored)
}
