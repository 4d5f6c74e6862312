//! Randomised properties of the whole pipeline: printing and parsing agree,
//! finished tableaux keep their structural invariants, eventualities reduce
//! to the documented shape, and satisfiable verdicts carry witnesses that
//! survive independent model checking.

mod common;

use proptest::prelude::*;

use tpdl::oracle::{random_formula, GenConfig};
use tpdl::parser::{parse, print_f};
use tpdl::syntax::{disj, not};
use tpdl::witness::verify_sat;
use tpdl::{solve, Answer, Config, FId, SolveError};

use common::{
    check_cycles_hit_states, check_deps_are_forward_ancestors, check_eventuality_shape,
    check_sat_children, check_statuses_final, collect_eventualities,
};

fn formula(seed: u64, max_size: u64) -> FId {
    random_formula(&GenConfig {
        seed,
        max_size,
        ..GenConfig::default()
    })
}

/// Solve under a node cap; `None` means the cap was hit, which a property
/// treats as a discarded case rather than a failure.
fn solve_capped(roots: &[FId], trace: bool) -> Result<Option<tpdl::Verdict>, TestCaseError> {
    let config = Config {
        trace,
        max_nodes: Some(200_000),
        ..Config::default()
    };
    match solve(roots, config) {
        Ok(v) => Ok(Some(v)),
        Err(SolveError::Internal(e)) => {
            prop_assert!(false, "internal solver error: {e}");
            unreachable!()
        }
        Err(_) => Ok(None),
    }
}

proptest! {
    /// Printing a formula and parsing it back lands on the same interned id.
    #[test]
    fn printing_then_parsing_is_identity(seed in any::<u64>()) {
        let f = formula(seed, 18);
        let printed = print_f(f);
        let back = parse(&printed);
        prop_assert_eq!(back, Ok(f), "printed form was {}", printed);
    }

    /// Double negation never changes the verdict.
    #[test]
    fn double_negation_keeps_the_verdict(seed in any::<u64>()) {
        let f = formula(seed, 10);
        if let (Some(plain), Some(doubled)) =
            (solve_capped(&[f], false)?, solve_capped(&[not(not(f))], false)?)
        {
            prop_assert_eq!(plain.answer, doubled.answer, "formula was {}", print_f(f));
        }
    }

    /// The excluded middle holds: no formula refutes `f | ~f`.
    #[test]
    fn excluded_middle_is_never_refuted(seed in any::<u64>()) {
        let f = formula(seed, 10);
        if let Some(v) = solve_capped(&[not(disj(f, not(f)))], false)? {
            prop_assert_eq!(v.answer, Answer::Unsat, "formula was {}", print_f(f));
        }
    }

    /// Finished runs have settled statuses, satisfied children where the
    /// verdict promises them, loops that pass through states, and tracked
    /// dependencies pointing at forward ancestors.
    #[test]
    fn finished_tableaux_keep_their_invariants(seed in any::<u64>()) {
        let f = formula(seed, 12);
        if let Some(v) = solve_capped(&[f], true)? {
            for check in [
                check_statuses_final(&v.tableau),
                check_sat_children(&v.tableau),
                check_cycles_hit_states(&v.tableau),
                check_deps_are_forward_ancestors(&v.trace, &v.tableau),
            ] {
                if let Err(m) = check {
                    prop_assert!(false, "{}: {}", print_f(f), m);
                }
            }
        }
    }

    /// Every eventuality inside a generated formula reduces to successors of
    /// the documented shape: the target or a further box chain over the same
    /// iterated tail.
    #[test]
    fn eventualities_reduce_to_the_documented_shape(seed in any::<u64>()) {
        let f = formula(seed, 18);
        let mut evs = std::collections::BTreeSet::new();
        collect_eventualities(f, &mut evs);
        for ev in evs {
            if let Err(m) = check_eventuality_shape(ev) {
                prop_assert!(false, "{}", m);
            }
        }
    }

    /// A satisfiable verdict always yields a structure that passes the
    /// independent model check of the root.
    #[test]
    fn satisfiable_verdicts_carry_checkable_witnesses(seed in any::<u64>()) {
        let f = formula(seed, 12);
        if let Some(v) = solve_capped(&[f], false)? {
            if v.answer == Answer::Sat {
                if let Err(e) = verify_sat(&v.tableau, &[f], false) {
                    prop_assert!(false, "witness for {} failed: {}", print_f(f), e);
                }
            }
        }
    }
}
