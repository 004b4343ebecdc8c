use proptest::prelude::*;

use vclosure::abelian::{abelian_retract_obstruction, exponent_vector, gcd_all, is_primitive};
use vclosure::closure::{is_retract, vcl, verify_retraction, RetractVerdict};
use vclosure::equations::{conjugator_of_tuples, solve_in_subgroup, CoefficientSystem, Equation, SearchLimits};
use vclosure::nilpotent::{FreeNilpotentGroup, DEFAULT_WIDTH_BUDGET};
use vclosure::{Substitution, SubgroupGraph, Word};

fn word(rank: usize, max_len: usize) -> impl Strategy<Value = Word> {
    let r = rank as i32;
    prop::collection::vec((1..=r, any::<bool>()), 0..=max_len).prop_map(move |letters| {
        let signed: Vec<i32> = letters.into_iter().map(|(g, inv)| if inv { -g } else { g }).collect();
        Word::from_signed(rank, &signed).unwrap()
    })
}

fn words(rank: usize, max_len: usize, count: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Word>> {
    prop::collection::vec(word(rank, max_len), count)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn group_axioms(u in word(3, 8), v in word(3, 8), w in word(3, 8)) {
        prop_assert_eq!(&(&u * &v) * &w, &u * &(&v * &w));
        prop_assert!((&u * &u.invert()).is_empty());
        prop_assert_eq!(&u * &Word::identity(3), u.clone());
        prop_assert_eq!(u.commutator(&v).unwrap(), &(&(&u.invert() * &v.invert()) * &u) * &v);
    }

    #[test]
    fn substitution_is_a_homomorphism(images in words(2, 4, 3..=3), u in word(3, 8), v in word(3, 8)) {
        let phi = Substitution::new(images, 2).unwrap();
        prop_assert_eq!(phi.apply(&(&u * &v)).unwrap(), &phi.apply(&u).unwrap() * &phi.apply(&v).unwrap());
    }

    #[test]
    fn primitive_root_is_not_a_proper_power(base in word(2, 5), k in 1i64..4) {
        prop_assume!(!base.is_empty());
        let w = base.pow(k);
        let (root, n) = w.primitive_root().unwrap();
        prop_assert_eq!(root.pow(n as i64), w);
        prop_assert_eq!(root.primitive_root().unwrap().1, 1);
        prop_assert_eq!(n as i64 % k, 0);
    }

    #[test]
    fn folded_graph_contains_generated_products(gens in words(2, 5, 1..=3), picks in prop::collection::vec((0usize..3, any::<bool>()), 0..6)) {
        let g = SubgroupGraph::fold(&gens, 2).unwrap();
        let mut product = Word::identity(2);
        for (i, inv) in picks {
            let x = &gens[i % gens.len()];
            product = &product * &(if inv { x.invert() } else { x.clone() });
        }
        prop_assert!(g.contains(&product));
        prop_assert!(g.basis().generators.iter().all(|b| g.contains(b)));
        // Same subgroup from its own basis.
        prop_assert_eq!(SubgroupGraph::fold(&g.basis().generators, 2).unwrap(), g);
    }

    #[test]
    fn intersection_is_the_pullback(h in words(2, 4, 1..=2), k in words(2, 4, 1..=2), w in word(2, 8)) {
        let h = SubgroupGraph::fold(&h, 2).unwrap();
        let k = SubgroupGraph::fold(&k, 2).unwrap();
        let i = h.intersect(&k).unwrap();
        prop_assert_eq!(i.contains(&w), h.contains(&w) && k.contains(&w));
        prop_assert!(h.includes(&i).unwrap() && k.includes(&i).unwrap());
    }

    #[test]
    fn cyclic_obstruction_iff_primitive(h in word(3, 8)) {
        let v = exponent_vector(&h);
        let passes = abelian_retract_obstruction(std::slice::from_ref(&v), 3).passes();
        prop_assert_eq!(passes, is_primitive(&v));
        prop_assert_eq!(passes, gcd_all(&v.0) == 1);
    }

    #[test]
    fn conjugator_is_sound(h in words(2, 5, 1..=3), u in word(2, 5)) {
        prop_assume!(h.iter().any(|x| !x.is_empty()));
        let g: Vec<Word> = h.iter().map(|x| x.conjugate(&u).unwrap()).collect();
        let found = conjugator_of_tuples(&g, &h).unwrap().expect("u itself conjugates");
        prop_assert!(found.len() <= u.len());
        for (gi, hi) in g.iter().zip(&h) {
            prop_assert_eq!(gi, &hi.conjugate(&found).unwrap());
        }
    }

    #[test]
    fn found_solutions_satisfy_the_system(x in word(2, 3), y in word(2, 3)) {
        // Build a solvable system from a known assignment.
        let lhs = Word::parse_variables("x1 x2 X1", 2).unwrap();
        let rhs = &(&x * &y) * &x.invert();
        let system = CoefficientSystem::new(2, 2, vec![Equation { lhs, rhs }]).unwrap();
        let out = solve_in_subgroup(&system, &SubgroupGraph::full(2), SearchLimits::new(3)).unwrap();
        let sol = out.solution().expect("x, y is a solution within the bound");
        prop_assert!(system.is_satisfied_by(&sol.assignment));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn retract_verdicts_are_sound(gens in words(2, 4, 1..=2)) {
        let h = SubgroupGraph::fold(&gens, 2).unwrap();
        let vectors: Vec<_> = h.basis().generators.iter().map(exponent_vector).collect();
        match is_retract(&h, 3).unwrap() {
            RetractVerdict::Yes { witness } => {
                prop_assert!(verify_retraction(&witness, &h, &h.basis()));
                prop_assert!(abelian_retract_obstruction(&vectors, 2).passes());
            }
            RetractVerdict::No { .. } => {}
            RetractVerdict::Unknown { .. } => prop_assert!(false, "every subgroup of F_2 is decided"),
        }
    }

    #[test]
    fn closure_contains_and_is_idempotent(gens in words(2, 3, 1..=2)) {
        let h = SubgroupGraph::fold(&gens, 2).unwrap();
        let c = vcl(&h, 3).unwrap();
        prop_assert!(c.closure.includes(&h).unwrap());
        prop_assert!(c.closure.rank() <= 2);
        prop_assert!(is_retract(&c.closure, 3).unwrap().is_yes());
        prop_assert_eq!(vcl(&c.closure, 3).unwrap().closure, c.closure);
    }

    #[test]
    fn fringe_members_contain_the_subgroup(gens in words(2, 3, 1..=2)) {
        let h = SubgroupGraph::fold(&gens, 2).unwrap();
        let fringe = h.fringe(8).unwrap();
        prop_assert!(fringe.contains(&h));
        for k in &fringe {
            prop_assert!(k.includes(&h).unwrap());
        }
    }

    #[test]
    fn collect_is_a_homomorphism(u in word(2, 8), v in word(2, 8)) {
        let n = FreeNilpotentGroup::new(2, 3).unwrap();
        let cu = n.collect(&u).unwrap();
        let cv = n.collect(&v).unwrap();
        prop_assert_eq!(n.collect(&(&u * &v)).unwrap(), n.multiply(&cu, &cv));
        prop_assert!(n.multiply(&cu, &n.invert(&cu)).is_identity());
    }

    #[test]
    fn lower_central_series_vanishes(ws in words(2, 4, 4..=4)) {
        // (c+1)-fold left-nested commutator words lie in γ_{c+1}.
        for c in 1..=3usize {
            let n = FreeNilpotentGroup::new(2, c).unwrap();
            let nested = ws[1..=c].iter().fold(ws[0].clone(), |acc, x| acc.commutator(x).unwrap());
            prop_assert!(n.collect(&nested).unwrap().is_identity());
        }
    }
}

/// Every derived-subgroup element with coordinates in [-2, 2] has the form
/// [g_1, a][g_2, b] with operands bounded by 4.
#[test]
fn commutator_form_is_universal_at_small_coordinates() {
    for class in [2usize, 3] {
        let n = FreeNilpotentGroup::new(2, class).unwrap();
        let free = n.basis().len() - 2;
        for idx in 0..5usize.pow(free as u32) {
            let mut exps = vec![0i64; 2];
            let mut rest = idx;
            for _ in 0..free {
                exps.push((rest % 5) as i64 - 2);
                rest /= 5;
            }
            let g = n.element(exps).unwrap();
            let gs = n
                .verify_commutator_form(&g, 4, DEFAULT_WIDTH_BUDGET)
                .unwrap()
                .unwrap_or_else(|| panic!("no form for {}", n.format(&g)));
            assert_eq!(n.commutator_form(&gs), g);
        }
    }
}
