//! Retracts, verbal closedness and verbal closures.
//!
//! A finitely generated subgroup of `F_r` is verbally closed exactly when it
//! is a retract, so both questions share one decision pipeline. Every `Yes`
//! carries a retraction that has been re-checked, every `No` a certificate
//! that can be re-checked independently, and `Unknown` is returned only when
//! the bounded search over system `v_i(x̄) = h_i` comes up empty.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::abelian::{
    abelian_retract_obstruction, bezout_coefficients, exponent_vector, AbelianObstruction, AbelianVerdict,
    ExponentVector,
};
use crate::audit;
use crate::equations::{retraction_system, solve_in_subgroup, SearchLimits, SolveOutcome};
use crate::error::{Error, Result};
use crate::stallings::{Basis, SubgroupGraph, DEFAULT_FRINGE_LIMIT};
use crate::words::{Letter, Substitution, Word};

/// An endomorphism of `F_r`, given by the images of the generators.
pub type Endomorphism = Substitution;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum RetractCertificate {
    /// A retract of `F_r` has rank at most `r`.
    RankExceedsAmbient { rank: usize, ambient: usize },
    /// `H = ⟨h⟩` and the exponent vector of `h` has `gcd ≠ 1` (zero for `h ∈ [F, F]`).
    CyclicNonPrimitive { vector: ExponentVector, gcd: i64 },
    /// `H` has rank `r` but is proper. A retraction onto it would be a
    /// surjection `F_r → H ≅ F_r`, hence injective, hence the identity.
    ProperFullRank { rank: usize },
    /// No retraction of `Z^r` onto the image of `H`.
    Abelian { obstruction: AbelianObstruction },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RetractVerdict {
    Yes { witness: Endomorphism },
    No { certificate: RetractCertificate },
    Unknown { bound: usize, note: Option<String> },
}

impl RetractVerdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, RetractVerdict::Yes { .. })
    }

    pub fn is_no(&self) -> bool {
        matches!(self, RetractVerdict::No { .. })
    }

    pub fn is_decisive(&self) -> bool {
        !matches!(self, RetractVerdict::Unknown { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            RetractVerdict::Yes { .. } => "yes",
            RetractVerdict::No { .. } => "no",
            RetractVerdict::Unknown { .. } => "unknown",
        }
    }

    /// `{verdict, witness: {a: ..}, certificate: {type: ..}, bound}`
    pub fn to_json(&self, bound: usize) -> Value {
        let mut out = Map::new();
        out.insert("verdict".into(), json!(self.label()));
        match self {
            RetractVerdict::Yes { witness } => {
                out.insert("witness".into(), endomorphism_json(witness));
            }
            RetractVerdict::No { certificate } => {
                out.insert("certificate".into(), serde_json::to_value(certificate).expect("serializable"));
            }
            RetractVerdict::Unknown { note, .. } => {
                if let Some(note) = note {
                    out.insert("note".into(), json!(note));
                }
            }
        }
        out.insert("bound".into(), json!(bound));
        Value::Object(out)
    }
}

/// `{a: "ab", b: ""}`
pub fn endomorphism_json(phi: &Endomorphism) -> Value {
    let map: Map<String, Value> = phi
        .images()
        .iter()
        .enumerate()
        .map(|(g, w)| {
            let name = Letter::new(g, false).to_char().map(String::from).unwrap_or_else(|| format!("x{}", g + 1));
            (name, json!(w.to_string()))
        })
        .collect();
    Value::Object(map)
}

/// `φ` fixes every basis word and takes every generator into `H`.
pub fn verify_retraction(phi: &Endomorphism, h: &SubgroupGraph, basis: &Basis) -> bool {
    let r = h.ambient_rank();
    phi.domain_rank() == r
        && phi.target_rank() == r
        && basis.generators.iter().all(|b| phi.apply(b).as_ref() == Ok(b))
        && phi.images().iter().all(|w| h.contains(w))
}

fn checked_yes(phi: Endomorphism, h: &SubgroupGraph, basis: &Basis) -> Result<RetractVerdict> {
    let ok = verify_retraction(&phi, h, basis);
    audit::record_retraction(ok);
    if !ok {
        return Err(Error::Inconsistency(format!("retraction witness {phi} does not verify")));
    }
    Ok(RetractVerdict::Yes { witness: phi })
}

/// Decides whether `h` is a retract of `F_r`, searching assignments of
/// length at most `bound` when no exact criterion applies.
pub fn is_retract(h: &SubgroupGraph, bound: usize) -> Result<RetractVerdict> {
    is_retract_with(h, SearchLimits::new(bound))
}

pub fn is_retract_with(h: &SubgroupGraph, limits: SearchLimits) -> Result<RetractVerdict> {
    let r = h.ambient_rank();
    let basis = h.basis();
    let m = basis.generators.len();
    if m == 0 {
        return checked_yes(Substitution::trivial(r, r), h, &basis);
    }
    if m > r {
        return Ok(RetractVerdict::No {
            certificate: RetractCertificate::RankExceedsAmbient { rank: m, ambient: r },
        });
    }
    if m == 1 {
        let gen = &basis.generators[0];
        let vector = exponent_vector(gen);
        return match bezout_coefficients(&vector) {
            Some(l) => {
                let images = l.iter().map(|&li| gen.pow(li)).collect();
                checked_yes(Substitution::new(images, r)?, h, &basis)
            }
            None => {
                let gcd = vector.gcd();
                Ok(RetractVerdict::No {
                    certificate: RetractCertificate::CyclicNonPrimitive { vector, gcd },
                })
            }
        };
    }
    if m == r {
        if h.is_full() {
            return checked_yes(Substitution::identity(r), h, &basis);
        }
        return Ok(RetractVerdict::No {
            certificate: RetractCertificate::ProperFullRank { rank: m },
        });
    }
    let vectors: Vec<ExponentVector> = basis.generators.iter().map(exponent_vector).collect();
    if let AbelianVerdict::Obstructed(obstruction) = abelian_retract_obstruction(&vectors, r) {
        return Ok(RetractVerdict::No {
            certificate: RetractCertificate::Abelian { obstruction },
        });
    }
    match solve_in_subgroup(&retraction_system(h), h, limits) {
        Ok(SolveOutcome::Found(solution)) => checked_yes(solution.assignment, h, &basis),
        Ok(SolveOutcome::NotFoundUpToBound { bound, states_explored }) => Ok(RetractVerdict::Unknown {
            bound,
            note: Some(format!("no retraction with images of length <= {bound} ({states_explored} states)")),
        }),
        Err(Error::BudgetExceeded { explored, budget }) => Ok(RetractVerdict::Unknown {
            bound: limits.bound,
            note: Some(format!("search budget exceeded after {explored} states (budget {budget})")),
        }),
        Err(e) => Err(e),
    }
}

/// A verbal equation `w(x̄) = h` with `h ∈ H`, solvable in `F_r` but not in `H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FalsifyingEquation {
    /// `h(x_1, ..., x_r)`: the generator of `H` read as a word in variables.
    pub lhs: Word,
    pub rhs: Word,
    /// Exponent sums `k_i` of `h`.
    pub exponents: Vec<i64>,
    /// `h'` in `h(x̄) = x_1^{k_1} ... x_r^{k_r} h'(x̄)`, so `h'(x̄)` lies in the derived subgroup.
    pub commutator_part: Word,
    /// A solution in `F_r`: the identity assignment.
    pub solution_in_ambient: Substitution,
}

impl FalsifyingEquation {
    pub fn to_json(&self) -> Value {
        json!({
            "lhs": self.lhs.to_variable_string(),
            "rhs": self.rhs.to_string(),
            "exponents": self.exponents,
            "commutator_part": self.commutator_part.to_variable_string(),
            "solution_in_ambient": endomorphism_json(&self.solution_in_ambient),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerbalClosedness {
    pub verdict: RetractVerdict,
    pub falsifying_equation: Option<FalsifyingEquation>,
}

/// Same verdict as [`is_retract`]. For a cyclic `No` the falsifying
/// equation is `h(x̄) = h`: with every `x_i = h^{m_i}` its left side is
/// `h^{k·m}`, and `k·m` is a multiple of `gcd(k) ≠ 1`.
pub fn is_verbally_closed(h: &SubgroupGraph, bound: usize) -> Result<VerbalClosedness> {
    is_verbally_closed_with(h, SearchLimits::new(bound))
}

pub fn is_verbally_closed_with(h: &SubgroupGraph, limits: SearchLimits) -> Result<VerbalClosedness> {
    let verdict = is_retract_with(h, limits)?;
    let falsifying_equation = match &verdict {
        RetractVerdict::No {
            certificate: RetractCertificate::CyclicNonPrimitive { vector, .. },
        } => {
            let r = h.ambient_rank();
            let gen = h.basis().generators.remove(0);
            let abelian_part = (0..r).fold(Word::identity(r), |acc, i| &acc * &Word::generator(r, i).pow(vector.0[i]));
            Some(FalsifyingEquation {
                lhs: gen.clone(),
                rhs: gen.clone(),
                exponents: vector.0.clone(),
                commutator_part: &abelian_part.invert() * &gen,
                solution_in_ambient: Substitution::identity(r),
            })
        }
        _ => None,
    };
    Ok(VerbalClosedness {
        verdict,
        falsifying_equation,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClosureStatus {
    Exact,
    Conditional,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerbalClosure {
    pub closure: SubgroupGraph,
    pub witness: Endomorphism,
    pub status: ClosureStatus,
    /// Other inclusion-minimal verified retracts (only when conditional).
    pub alternatives: Vec<SubgroupGraph>,
    /// Candidates with an `Unknown` verdict strictly inside `closure`.
    pub undecided: Vec<SubgroupGraph>,
    pub candidates_tested: usize,
}

/// The smallest retract of `F_r` containing `h`.
///
/// Candidates are the fringe of `h` together with `F_r`. The answer is
/// exact when no undecided candidate sits strictly inside the minimal
/// verified retract: by Bergman's theorem the true closure is the
/// intersection of all retracts containing `h`, and it is a candidate.
pub fn vcl(h: &SubgroupGraph, bound: usize) -> Result<VerbalClosure> {
    vcl_with(h, SearchLimits::new(bound), DEFAULT_FRINGE_LIMIT)
}

pub fn vcl_with(h: &SubgroupGraph, limits: SearchLimits, fringe_limit: usize) -> Result<VerbalClosure> {
    let r = h.ambient_rank();
    let mut candidates = h.fringe(fringe_limit)?;
    let full = SubgroupGraph::full(r);
    if !candidates.contains(&full) {
        candidates.push(full);
    }
    let verdicts: Vec<RetractVerdict> = candidates
        .par_iter()
        .map(|k| is_retract_with(k, limits))
        .collect::<Result<_>>()?;

    let mut yes = Vec::new();
    let mut unknown = Vec::new();
    for (k, v) in candidates.iter().zip(verdicts) {
        if !k.includes(h)? {
            continue;
        }
        match v {
            RetractVerdict::Yes { witness } => yes.push((k, witness)),
            RetractVerdict::Unknown { .. } => unknown.push(k),
            RetractVerdict::No { .. } => {}
        }
    }
    let mut minimal = Vec::new();
    for (i, (k, _)) in yes.iter().enumerate() {
        let mut is_minimal = true;
        for (j, (other, _)) in yes.iter().enumerate() {
            if i != j && k.includes(other)? {
                is_minimal = false;
                break;
            }
        }
        if is_minimal {
            minimal.push(i);
        }
    }
    // F_r is always a verified retract, so `minimal` is nonempty.
    let (closure, witness) = yes[minimal[0]].clone();
    let mut undecided = Vec::new();
    for k in unknown {
        if k != closure && closure.includes(k)? {
            undecided.push(k.clone());
        }
    }
    let alternatives: Vec<SubgroupGraph> = minimal[1..].iter().map(|&i| yes[i].0.clone()).collect();
    if !alternatives.is_empty() && undecided.is_empty() {
        return Err(Error::Inconsistency(format!(
            "{} incomparable minimal retracts with every smaller candidate decided",
            minimal.len()
        )));
    }
    let status = if undecided.is_empty() {
        ClosureStatus::Exact
    } else {
        ClosureStatus::Conditional
    };
    Ok(VerbalClosure {
        closure: closure.clone(),
        witness,
        status,
        alternatives,
        undecided,
        candidates_tested: candidates.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntersectionReport {
    /// One of the inputs is not a verified retract.
    Skipped { left: RetractVerdict, right: RetractVerdict },
    Checked { intersection: SubgroupGraph, verdict: RetractVerdict },
}

/// Intersects two verified retracts and checks that the intersection is
/// not refuted as a retract. A refutation is reported as an inconsistency.
pub fn intersect_retracts_check(h1: &SubgroupGraph, h2: &SubgroupGraph, bound: usize) -> Result<IntersectionReport> {
    let left = is_retract(h1, bound)?;
    let right = is_retract(h2, bound)?;
    if !left.is_yes() || !right.is_yes() {
        return Ok(IntersectionReport::Skipped { left, right });
    }
    let intersection = h1.intersect(h2)?;
    let verdict = is_retract(&intersection, bound)?;
    if let RetractVerdict::No { certificate } = &verdict {
        return Err(Error::Inconsistency(format!(
            "intersection of two retracts refuted as a retract: {certificate:?}"
        )));
    }
    Ok(IntersectionReport::Checked { intersection, verdict })
}
