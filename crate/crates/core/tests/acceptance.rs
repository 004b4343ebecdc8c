//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::collections::{BTreeSet, HashSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use vclosure::audit;
use vclosure::closure::{
    intersect_retracts_check, is_retract, is_verbally_closed, vcl, verify_retraction, ClosureStatus,
    IntersectionReport, RetractVerdict,
};
use vclosure::equations::{solve_verbal, SearchLimits};
use vclosure::nilpotent::{FreeNilpotentGroup, HallBasis, WidthOutcome, DEFAULT_WIDTH_BUDGET};
use vclosure::{Error, SubgroupGraph, Word};

struct Outcome {
    pass: bool,
    detail: String,
}

/// Tallies YES verdicts re-verified by the suite itself.
#[derive(Default)]
struct Ledger {
    yes_seen: usize,
    yes_verified: usize,
}

impl Ledger {
    fn record(&mut self, h: &SubgroupGraph, v: &RetractVerdict) {
        if let RetractVerdict::Yes { witness } = v {
            self.yes_seen += 1;
            if verify_retraction(witness, h, &h.basis()) {
                self.yes_verified += 1;
            }
        }
    }
}

fn random_word(rng: &mut StdRng, rank: usize, max_len: usize) -> Word {
    let len = rng.gen_range(1..=max_len);
    let signed: Vec<i32> = (0..len)
        .map(|_| {
            let g = rng.gen_range(1..=rank as i32);
            if rng.gen_bool(0.5) {
                g
            } else {
                -g
            }
        })
        .collect();
    Word::from_signed(rank, &signed).unwrap()
}

fn random_nontrivial(rng: &mut StdRng, rank: usize, max_len: usize) -> Word {
    loop {
        let w = random_word(rng, rank, max_len);
        if !w.is_empty() {
            return w;
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Exponent sums read straight off the letters of the text.
fn exponent_sums_from_text(text: &str, rank: usize) -> Vec<i64> {
    let mut v = vec![0; rank];
    for ch in text.chars() {
        let i = (ch.to_ascii_lowercase() as u8 - b'a') as usize;
        v[i] += if ch.is_ascii_lowercase() { 1 } else { -1 };
    }
    v
}

fn criterion_1(ledger: &mut Ledger) -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let mut disagreements = 0;
    let mut no_cases = 0;
    let mut equation_failures = 0;
    for i in 0..200 {
        let r = if i % 2 == 0 { 2 } else { 3 };
        let h = random_nontrivial(&mut rng, r, 8);
        let oracle_yes = exponent_sums_from_text(&h.to_string(), r).into_iter().fold(0, gcd) == 1;
        let g = SubgroupGraph::fold(std::slice::from_ref(&h), r).unwrap();
        let verdict = is_retract(&g, 4).unwrap();
        ledger.record(&g, &verdict);
        if verdict.is_yes() != oracle_yes || !verdict.is_decisive() {
            disagreements += 1;
        }
        if !oracle_yes {
            no_cases += 1;
            let eq = is_verbally_closed(&g, 4).unwrap().falsifying_equation;
            let ok = eq.is_some_and(|eq| {
                let ambient = solve_verbal(&eq.lhs, &eq.rhs, &SubgroupGraph::full(r), SearchLimits::new(4)).unwrap();
                let inside = solve_verbal(&eq.lhs, &eq.rhs, &g, SearchLimits::new(6)).unwrap();
                ambient.is_found() && !inside.is_found()
            });
            if !ok {
                equation_failures += 1;
            }
        }
    }
    Outcome {
        pass: disagreements == 0 && equation_failures == 0,
        detail: format!(
            "200 cyclic subgroups, {disagreements} disagreements with the gcd oracle; {no_cases} NO cases, {equation_failures} falsifying-equation failures"
        ),
    }
}

/// Random subgroups of F_2 and F_3 plus a fixed list of structured ones.
fn corpus() -> Vec<SubgroupGraph> {
    let mut rng = StdRng::seed_from_u64(2);
    let mut seen = BTreeSet::new();
    let fixed: &[(&[&str], usize)] = &[
        (&["a"], 2),
        (&["aa"], 2),
        (&["ab"], 2),
        (&["abAB"], 2),
        (&["a", "b"], 2),
        (&["a", "bab"], 2),
        (&["aa", "bb"], 2),
        (&["a", "b"], 3),
        (&["ac", "bc"], 3),
        (&["a", "bb"], 3),
        (&["a", "bcBC"], 3),
        (&["abc"], 3),
        (&["", "a"], 2),
    ];
    for (gens, r) in fixed {
        seen.insert(SubgroupGraph::parse(gens, *r).unwrap());
    }
    while seen.len() < 320 {
        let r = rng.gen_range(2..=3);
        let count = rng.gen_range(1..=3);
        let gens: Vec<Word> = (0..count).map(|_| random_word(&mut rng, r, 5)).collect();
        seen.insert(SubgroupGraph::fold(&gens, r).unwrap());
    }
    seen.into_iter().collect()
}

fn criterion_2(corpus: &[SubgroupGraph], ledger: &mut Ledger) -> Outcome {
    let mut conflicts = 0;
    let mut unknown = 0;
    for h in corpus {
        let retract = is_retract(h, 3).unwrap();
        let verbal = is_verbally_closed(h, 3).unwrap().verdict;
        ledger.record(h, &retract);
        if retract.label() != verbal.label() {
            conflicts += 1;
        }
        if !retract.is_decisive() {
            unknown += 1;
        }
    }
    Outcome {
        pass: conflicts == 0 && corpus.len() >= 300,
        detail: format!("{} subgroups, {conflicts} conflicting verdicts, {unknown} unknown", corpus.len()),
    }
}

fn criterion_3(ledger: &mut Ledger) -> Outcome {
    let f2 = |gens: &[&str]| SubgroupGraph::parse(gens, 2).unwrap();
    let mut cases: Vec<(SubgroupGraph, SubgroupGraph)> = Vec::new();
    for k in 2..=5 {
        cases.push((f2(&["a".repeat(k).as_str()]), f2(&["a"])));
    }
    cases.push((f2(&["a"]), f2(&["a"])));
    cases.push((f2(&["abAB"]), SubgroupGraph::full(2)));
    let mut failures = Vec::new();
    for (h, expected) in &cases {
        let result = vcl(h, 4).unwrap();
        ledger.record(&result.closure, &RetractVerdict::Yes { witness: result.witness.clone() });
        if result.closure != *expected || result.status != ClosureStatus::Exact {
            failures.push(format!("{:?}", h.basis().generators));
            continue;
        }
        let again = vcl(&result.closure, 4).unwrap();
        if again.closure != result.closure || again.status != ClosureStatus::Exact {
            failures.push(format!("idempotence at {:?}", h.basis().generators));
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!("{} closures exact and idempotent; failures: {failures:?}", cases.len() - failures.len()),
    }
}

/// Random Nielsen moves applied to the standard basis of F_r.
fn random_basis(rng: &mut StdRng, r: usize, moves: usize) -> Vec<Word> {
    let mut basis: Vec<Word> = (0..r).map(|i| Word::generator(r, i)).collect();
    for _ in 0..moves {
        let i = rng.gen_range(0..r);
        let j = (i + rng.gen_range(1..r)) % r;
        let other = if rng.gen_bool(0.5) { basis[j].clone() } else { basis[j].invert() };
        basis[i] = if rng.gen_bool(0.5) { &basis[i] * &other } else { &other * &basis[i] };
    }
    basis
}

fn random_retract(rng: &mut StdRng) -> SubgroupGraph {
    let r = rng.gen_range(2..=3);
    if rng.gen_bool(0.5) {
        let basis = random_basis(rng, r, 2);
        let size = rng.gen_range(1..r);
        SubgroupGraph::fold(&basis[..size], r).unwrap()
    } else {
        loop {
            let h = random_nontrivial(rng, r, 6);
            if h.exponent_sums().into_iter().fold(0, gcd) == 1 {
                return SubgroupGraph::fold(&[h], r).unwrap();
            }
        }
    }
}

fn criterion_4(ledger: &mut Ledger) -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let mut pairs = 0;
    let mut yes = 0;
    let mut unknown = 0;
    let mut inconsistencies = 0;
    let mut attempts = 0;
    while pairs < 50 && attempts < 10_000 {
        attempts += 1;
        let h1 = random_retract(&mut rng);
        let r = h1.ambient_rank();
        let h2 = loop {
            let h = random_retract(&mut rng);
            if h.ambient_rank() == r {
                break h;
            }
        };
        match intersect_retracts_check(&h1, &h2, 3) {
            Ok(IntersectionReport::Checked { intersection, verdict }) => {
                pairs += 1;
                ledger.record(&intersection, &verdict);
                if verdict.is_yes() {
                    yes += 1;
                } else {
                    unknown += 1;
                }
            }
            Ok(IntersectionReport::Skipped { .. }) => {}
            Err(Error::Inconsistency(msg)) => {
                eprintln!("inconsistency: {msg}");
                inconsistencies += 1;
                break;
            }
            Err(e) => panic!("{e}"),
        }
    }
    Outcome {
        pass: pairs == 50 && inconsistencies == 0,
        detail: format!("{pairs} pairs of verified retracts: {yes} YES, {unknown} UNKNOWN, {inconsistencies} NO"),
    }
}

fn criterion_5(corpus: &[SubgroupGraph]) -> Outcome {
    let mut violations = 0;
    let mut retracts = 0;
    let mut closures = 0;
    for h in corpus {
        let r = h.ambient_rank();
        if is_retract(h, 3).unwrap().is_yes() {
            retracts += 1;
            if h.rank() > r {
                violations += 1;
            }
        }
        if h.vertex_count() <= 7 {
            closures += 1;
            let c = vcl(h, 3).unwrap();
            if c.closure.rank() > r || !c.closure.includes(h).unwrap() {
                violations += 1;
            }
        }
    }
    Outcome {
        pass: violations == 0,
        detail: format!("{retracts} YES retracts and {closures} closures, {violations} exceed the ambient rank"),
    }
}

/// Products of generators and inverses reachable from the identity through
/// prefixes of reduced length at most `window`. Independent of folding.
fn product_oracle(gens: &[Word], r: usize, window: usize) -> HashSet<Word> {
    let mut letters: Vec<Word> = gens.to_vec();
    letters.extend(gens.iter().map(Word::invert));
    let mut layer = vec![Word::identity(r)];
    let mut all: HashSet<Word> = layer.iter().cloned().collect();
    while !layer.is_empty() {
        let mut next = Vec::new();
        for x in &layer {
            for y in &letters {
                let p = x * y;
                if p.len() <= window && all.insert(p.clone()) {
                    next.push(p);
                }
            }
        }
        layer = next;
    }
    all
}

fn criterion_6() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let mut checked = 0u64;
    let mut disagreements = 0u64;
    for i in 0..50 {
        let r = if i < 35 { 2 } else { 3 };
        let count = rng.gen_range(1..=2);
        let max_len = if r == 2 { 3 } else { 2 };
        let gens: Vec<Word> = (0..count).map(|_| random_word(&mut rng, r, max_len)).collect();
        let g = SubgroupGraph::fold(&gens, r).unwrap();
        let oracle = product_oracle(&gens, r, 6 + 2 * max_len);
        for w in SubgroupGraph::full(r).enumerate_elements(6) {
            checked += 1;
            if g.contains(&w) != oracle.contains(&w) {
                disagreements += 1;
            }
        }
    }
    Outcome {
        pass: disagreements == 0,
        detail: format!("50 subgroups, {checked} membership queries, {disagreements} disagreements"),
    }
}

fn mobius(n: usize) -> i64 {
    let factors: Vec<usize> = (2..=n).filter(|p| n.is_multiple_of(*p) && (2..*p).all(|q| p % q != 0)).collect();
    if factors.iter().any(|p| n.is_multiple_of(p * p)) {
        0
    } else if factors.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn criterion_7() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    for r in 2..=3usize {
        for c in 2..=4usize {
            let basis = HallBasis::new(r, c).unwrap();
            for w in 1..=c {
                let witt: i64 = (1..=w)
                    .filter(|d| w % d == 0)
                    .map(|d| mobius(d) * (r as i64).pow((w / d) as u32))
                    .sum::<i64>()
                    / w as i64;
                let count = (0..basis.len()).filter(|&i| basis.weight(i) == w).count();
                if count as i64 != witt {
                    pass = false;
                    notes.push(format!("N({r},{c}) weight {w}: {count} vs {witt}"));
                }
            }
        }
    }

    let n22 = FreeNilpotentGroup::new(2, 2).unwrap();
    let a = n22.generator(0);
    let b = n22.generator(1);
    for k in -5i64..=5 {
        if k == 0 {
            continue;
        }
        let g = n22.element(vec![0, 0, k]).unwrap();
        let explicit = n22.commutator(&n22.pow(&a, -k), &b);
        let report = n22.commutator_width_bounded(&g, 1, 5, DEFAULT_WIDTH_BUDGET).unwrap();
        let found = report.outcome == WidthOutcome::Representable
            && report.factors.len() == 1
            && n22.commutator(&report.factors[0].0, &report.factors[0].1) == g;
        if explicit != g || !found || g.is_identity() {
            pass = false;
            notes.push(format!("N(2,2) c^{k}"));
        }
    }

    let n23 = FreeNilpotentGroup::new(2, 3).unwrap();
    match n23.find_width_gap(3, 4, DEFAULT_WIDTH_BUDGET).unwrap() {
        Some((g, gs)) => {
            let single = n23.commutator_width_bounded(&g, 1, 3, DEFAULT_WIDTH_BUDGET).unwrap();
            let form = n23.verify_commutator_form(&g, 4, DEFAULT_WIDTH_BUDGET).unwrap();
            let ok = single.outcome == WidthOutcome::NotRepresentableWithinBound
                && form.as_ref().is_some_and(|f| n23.commutator_form(f) == g)
                && n23.commutator_form(&gs) == g
                && n23.in_derived_subgroup(&g);
            notes.push(format!(
                "N(2,3) gap element {} = [{}, a][{}, b], no single commutator with coordinates <= 3",
                n23.format(&g),
                n23.format(&gs[0]),
                n23.format(&gs[1])
            ));
            pass &= ok;
        }
        None => {
            pass = false;
            notes.push("no N(2,3) gap element within bounds".into());
        }
    }
    Outcome {
        pass,
        detail: format!("Witt counts for r in 2..=3, c in 2..=4; N(2,2) c^k width 1 for 1 <= |k| <= 5; {}", notes.join("; ")),
    }
}

fn criterion_8(ledger: &Ledger, before: audit::AuditSnapshot) -> Outcome {
    let after = audit::snapshot();
    let retractions = after.retraction_checks - before.retraction_checks;
    let solutions = after.solution_checks - before.solution_checks;
    let failures = (after.retraction_failures - before.retraction_failures) + (after.solution_failures - before.solution_failures);
    Outcome {
        pass: failures == 0 && ledger.yes_seen == ledger.yes_verified && retractions > 0 && solutions > 0,
        detail: format!(
            "{}/{} YES verdicts re-verified by the suite; inline checks: {retractions} retractions, {solutions} solutions, {failures} failures",
            ledger.yes_verified, ledger.yes_seen
        ),
    }
}

fn report(index: usize, name: &str, limit: Duration, run: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = run();
    let elapsed = start.elapsed();
    let pass = outcome.pass && elapsed <= limit;
    println!(
        "[{}] {index}. {name}: {} ({:.1}s, limit {}s)",
        if pass { "PASS" } else { "FAIL" },
        outcome.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn main() -> ExitCode {
    let before = audit::snapshot();
    let mut ledger = Ledger::default();
    let corpus = corpus();
    let results = [
        report(1, "cyclic primitivity equivalence", Duration::from_secs(60), || criterion_1(&mut ledger)),
        report(2, "verbal closedness agrees with retract test", Duration::from_secs(300), || {
            criterion_2(&corpus, &mut ledger)
        }),
        report(3, "vcl exactness and idempotence", Duration::from_secs(30), || criterion_3(&mut ledger)),
        report(4, "intersections of retracts", Duration::from_secs(300), || criterion_4(&mut ledger)),
        report(5, "rank bound", Duration::from_secs(300), || criterion_5(&corpus)),
        report(6, "folded graph membership vs product oracle", Duration::from_secs(120), criterion_6),
        report(7, "free nilpotent suite", Duration::from_secs(600), criterion_7),
        report(8, "witness verification", Duration::from_secs(10), || criterion_8(&ledger, before)),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
