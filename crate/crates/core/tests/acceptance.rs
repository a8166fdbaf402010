//! Acceptance criteria, one pass/fail line each.
//!
//! Runs without the libtest harness so the summary is always printed.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::sync::Arc;

use cegar_core::cegar::Round;
use cegar_core::fixtures;
use cegar_core::random::{random_case, RandomModelConfig};
use cegar_core::{
    abstract_mc, abstract_mc_with, check, check_spurious, concretize, holds_on_path, minimal_separating_set,
    parse_property, refine_extra_var, Abstraction, BenchCase, CegarConfig, CheckOutcome, Counterexample, FinalVerdict,
    Property, SpuriousVerdict, StateId, Strategy, Value,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ids(xs: &[&str]) -> BTreeSet<StateId> {
    xs.iter().map(|&x| StateId::from(x)).collect()
}

fn corpus(seed: u64, count: usize) -> Vec<BenchCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let config = RandomModelConfig {
                variables: rng.gen_range(2..=6),
                max_states: 64,
                density: [1.0, 1.5, 2.0, 3.0][i % 4],
            };
            random_case(&mut rng, format!("m{i}"), &config)
        })
        .collect()
}

fn chain_abstraction() -> Outcome {
    let a = Abstraction::hiding(Arc::new(fixtures::chain()), &["v3", "v4"]).map_err(|e| e.to_string())?;
    let am = a.build();
    let h = |s: &str| a.project(s).unwrap().id;
    let (s1, s3) = (h("s1"), h("s3"));
    ensure!(h("s2") == s1 && h("s4") == s3 && s1 != s3, "blocks are not {{s1,s2}} and {{s3,s4}}");
    ensure!(am.state_count() == 2, "{} abstract states", am.state_count());
    let expected: BTreeSet<_> = [(s1.clone(), s1.clone()), (s1.clone(), s3.clone()), (s3.clone(), s3.clone())].into();
    ensure!(am.model().transitions() == &expected, "edges {:?}", am.model().transitions());
    Ok(format!("2 states, edges {s1}->{s1}, {s1}->{s3}, {s3}->{s3}"))
}

fn traffic_light() -> Outcome {
    let base = Arc::new(fixtures::traffic_light());
    let property = parse_property("GF state=stop").unwrap();
    let a = Abstraction::hiding(base.clone(), &["color"]).unwrap();
    let am = a.build();
    let CheckOutcome::Violated(cex) = check(am.model(), &property).unwrap() else {
        return Err("abstract model satisfies the property".into());
    };
    ensure!(
        cex == Counterexample::lasso(["(state=stop)"], ["(state=go)"]),
        "abstract counterexample {cex:?}"
    );
    let SpuriousVerdict::Spurious(f) = check_spurious(&am, &cex).unwrap() else {
        return Err("counterexample judged real".into());
    };
    ensure!(f.dead == ids(&["s3"]) && f.bad == ids(&["s2"]) && f.isolated.is_empty(), "partition {f:?}");
    let refined = refine_extra_var(&a, &f, "B1").unwrap().build();
    ensure!(check(refined.model(), &property).unwrap().holds(), "refined abstraction still violates");
    ensure!(check(&base, &property).unwrap().holds(), "concrete model violates");
    let report = abstract_mc(base, &property, &CegarConfig::new(["color"], Strategy::ExtraVar)).unwrap();
    ensure!(
        report.final_verdict == FinalVerdict::Holds && report.total_iterations() == 2,
        "cegar run ended {:?} after {}",
        report.final_verdict,
        report.total_iterations()
    );
    Ok("lasso (stop)(go)^w, spurious at position 2 with D={s3} B={s2}, holds after one refinement".into())
}

fn spurious_path_partition() -> Outcome {
    let a = Abstraction::hiding(Arc::new(fixtures::spurious_path()), &["aux"]).unwrap();
    let am = a.build();
    let CheckOutcome::Violated(cex) = check(am.model(), &parse_property("AG !(pos=d)").unwrap()).unwrap() else {
        return Err("abstract model satisfies the property".into());
    };
    let SpuriousVerdict::Spurious(f) = check_spurious(&am, &cex).unwrap() else {
        return Err("counterexample judged real".into());
    };
    ensure!(a.origins(&f.failure_state) == ids(&["7", "8", "9"]), "failure state {}", f.failure_state.id);
    ensure!(
        f.dead == ids(&["9"]) && f.bad == ids(&["7"]) && f.isolated == ids(&["8"]),
        "D={:?} B={:?} I={:?}",
        f.dead,
        f.bad,
        f.isolated
    );
    Ok(format!("failure at {} with D={{9}} B={{7}} I={{8}}", f.failure_state.id))
}

fn separation_dominance() -> Outcome {
    let base = Arc::new(fixtures::separation());
    let property = parse_property("AG !(x1=2)").unwrap();
    let hidden = ["x2", "x3"];
    let a = Abstraction::hiding(base.clone(), &hidden).unwrap();
    let am = a.build();
    let CheckOutcome::Violated(cex) = check(am.model(), &property).unwrap() else {
        return Err("abstract model satisfies the property".into());
    };
    let SpuriousVerdict::Spurious(f) = check_spurious(&am, &cex).unwrap() else {
        return Err("counterexample judged real".into());
    };
    ensure!(f.dead == ids(&["s3"]) && f.bad == ids(&["s4"]), "D={:?} B={:?}", f.dead, f.bad);
    let u = minimal_separating_set(&base, &f.dead, &f.bad, &hidden).unwrap();
    ensure!(u == Some(["x3".to_owned()].into()), "minimal set {u:?}");
    let size = |s| {
        let r = abstract_mc(base.clone(), &property, &CegarConfig::new(hidden, s)).unwrap();
        (r.final_verdict.name(), r.final_abstract_states())
    };
    let (extra, visible) = (size(Strategy::ExtraVar), size(Strategy::VisibleMinimal));
    ensure!(extra.0 == "holds" && visible.0 == "holds", "verdicts {extra:?} {visible:?}");
    ensure!(extra.1 < visible.1, "extra-var {} vs visible-minimal {}", extra.1, visible.1);
    Ok(format!("minimal set {{x3}}, final sizes extra-var {} < visible-minimal {}", extra.1, visible.1))
}

#[derive(Default)]
struct RefinementStats {
    steps: usize,
    extra_var_steps: usize,
    with_isolated: usize,
    growth_violations: Vec<String>,
    separation_violations: Vec<String>,
    locality_violations: Vec<String>,
}

impl RefinementStats {
    fn observe(&mut self, name: &str, strategy: Strategy, r: &Round<'_>) {
        let (Some(f), Some(next)) = (r.failure, r.refined) else { return };
        if strategy == Strategy::VisibleMinimal {
            return;
        }
        self.steps += 1;
        let before = r.abstract_model.state_count();
        let after = next.build().state_count();
        let grew = after as isize - before as isize;
        if strategy == Strategy::ExtraVar {
            self.extra_var_steps += 1;
            if !f.isolated.is_empty() {
                self.with_isolated += 1;
            }
        }
        let allowed = if strategy == Strategy::ExtraVar && !f.isolated.is_empty() { 1..=2 } else { 1..=1 };
        if !allowed.contains(&grew) {
            self.growth_violations.push(format!("{name}/{strategy} round {}: +{grew}", r.iteration));
        }
        for d in &f.dead {
            for b in &f.bad {
                if next.project(d.as_str()).unwrap() == next.project(b.as_str()).unwrap() {
                    self.separation_violations.push(format!("{name}/{strategy}: {d} and {b} merged"));
                }
            }
        }
        let failure_origins = r.abstraction.origins(&f.failure_state);
        for s in r.abstraction.base().states() {
            if failure_origins.contains(&s.id) {
                continue;
            }
            let old = r.abstraction.project(s.id.as_str()).unwrap().values;
            let new = next.project(s.id.as_str()).unwrap().values;
            if new.len() != old.len() + 1 || new[..old.len()] != old[..] || new[old.len()] != Value::Undefined {
                self.locality_violations.push(format!("{name}/{strategy}: {} moved", s.id));
            }
        }
    }
}

#[derive(Default)]
struct OracleStats {
    runs: usize,
    finite_checked: usize,
    lasso_checked: usize,
    verdict_mismatches: Vec<String>,
    finite_mismatches: Vec<String>,
    lasso_mismatches: Vec<String>,
    witness_errors: Vec<String>,
    over_bound: Vec<String>,
    capped: Vec<String>,
}

fn run_case(
    case: &BenchCase,
    property: &Property,
    strategy: Strategy,
    refinements: &mut RefinementStats,
    oracle: &mut OracleStats,
) {
    let model = Arc::new(case.model.clone());
    let tag = format!("{} {property} {strategy}", case.name);
    let config = CegarConfig::new(case.hidden.iter().cloned(), strategy);
    let report = abstract_mc_with(model.clone(), property, &config, |r| {
        refinements.observe(&case.name, strategy, r);
        if let Some(cex) = r.counterexample {
            let real = check_spurious(r.abstract_model, cex).unwrap() == SpuriousVerdict::Real;
            let witness = concretize(r.abstract_model, cex).unwrap().is_some();
            let (count, mismatches) = if cex.is_lasso() {
                (&mut oracle.lasso_checked, &mut oracle.lasso_mismatches)
            } else {
                (&mut oracle.finite_checked, &mut oracle.finite_mismatches)
            };
            *count += 1;
            if real != witness {
                mismatches.push(format!("{tag} round {}: real={real} concretized={witness}", r.iteration));
            }
        }
    })
    .unwrap();
    oracle.runs += 1;
    let direct = check(&model, property).unwrap();
    match (&report.final_verdict, &direct) {
        (FinalVerdict::Holds, CheckOutcome::Holds) => {}
        (FinalVerdict::Violated(w), CheckOutcome::Violated(_)) => {
            if w.validate(&model).is_err() || holds_on_path(&model, property, w).unwrap() {
                oracle.witness_errors.push(tag.clone());
            }
        }
        (FinalVerdict::CapExceeded, _) => oracle.capped.push(tag.clone()),
        (got, want) => oracle
            .verdict_mismatches
            .push(format!("{tag}: cegar {} vs direct holds={}", got.name(), want.holds())),
    }
    if report.total_iterations() > model.len() {
        oracle
            .over_bound
            .push(format!("{tag}: {} iterations for {} states", report.total_iterations(), model.len()));
    }
}

fn summarize(v: &[String]) -> String {
    let shown: Vec<&str> = v.iter().take(3).map(String::as_str).collect();
    format!("{} violations, e.g. {}", v.len(), shown.join("; "))
}

fn main() -> ExitCode {
    let mut refinements = RefinementStats::default();
    let mut oracle_refinements = RefinementStats::default();
    let mut oracle = OracleStats::default();
    let mut growth_corpus = OracleStats::default();

    // criteria 5, 7, 8: 500 models under every synthetic-variable strategy
    let growth_cases = corpus(0x5eed_0005, 500);
    for case in &growth_cases {
        for strategy in [Strategy::ExtraVar, Strategy::SmallestToDead, Strategy::SmallestToBad] {
            run_case(case, &case.property, strategy, &mut refinements, &mut growth_corpus);
        }
    }
    // criteria 6, 8: 200 models, both property shapes, every strategy
    let oracle_cases = corpus(0x5eed_0006, 200);
    for case in &oracle_cases {
        let p = case.property.predicate().clone();
        for property in [Property::Globally(p.clone()), Property::InfinitelyOften(p)] {
            for strategy in Strategy::ALL {
                run_case(case, &property, strategy, &mut oracle_refinements, &mut oracle);
            }
        }
    }

    let growth = || -> Outcome {
        ensure!(refinements.extra_var_steps > 0, "no refinement happened; corpus is vacuous");
        ensure!(refinements.growth_violations.is_empty(), "{}", summarize(&refinements.growth_violations));
        Ok(format!(
            "{} models, {} extra-var steps ({} with isolated states) and {} smallest-variant steps within bounds",
            growth_cases.len(),
            refinements.extra_var_steps,
            refinements.with_isolated,
            refinements.steps - refinements.extra_var_steps
        ))
    };
    let oracle_eq = || -> Outcome {
        ensure!(oracle.verdict_mismatches.is_empty(), "{}", summarize(&oracle.verdict_mismatches));
        ensure!(oracle.witness_errors.is_empty(), "bad witnesses: {}", summarize(&oracle.witness_errors));
        ensure!(oracle.finite_checked > 0, "no finite counterexample was analyzed");
        ensure!(oracle.finite_mismatches.is_empty(), "{}", summarize(&oracle.finite_mismatches));
        ensure!(oracle.lasso_mismatches.is_empty(), "lassos: {}", summarize(&oracle.lasso_mismatches));
        Ok(format!(
            "{} models, {} runs agree with direct checking; {} finite and {} lasso counterexamples agree with concretize",
            oracle_cases.len(),
            oracle.runs,
            oracle.finite_checked,
            oracle.lasso_checked
        ))
    };
    let separation = || -> Outcome {
        for stats in [&refinements, &oracle_refinements] {
            ensure!(stats.separation_violations.is_empty(), "{}", summarize(&stats.separation_violations));
            ensure!(stats.locality_violations.is_empty(), "{}", summarize(&stats.locality_violations));
        }
        Ok(format!(
            "{} refinements on the growth corpus (plus {} on the oracle corpus) separate dead from bad and leave other states in place",
            refinements.steps, oracle_refinements.steps
        ))
    };
    let termination = || -> Outcome {
        let over: Vec<String> = growth_corpus.over_bound.iter().chain(&oracle.over_bound).cloned().collect();
        let capped: Vec<String> = growth_corpus.capped.iter().chain(&oracle.capped).cloned().collect();
        ensure!(over.is_empty(), "{}", summarize(&over));
        ensure!(capped.is_empty(), "cap reached: {}", summarize(&capped));
        Ok(format!("{} runs all end within |S| iterations", growth_corpus.runs + oracle.runs))
    };

    let results: Vec<(u32, &str, Outcome)> = vec![
        (1, "chain abstraction", chain_abstraction()),
        (2, "traffic light end to end", traffic_light()),
        (3, "dead/bad/isolated partition", spurious_path_partition()),
        (4, "extra-var smaller than visible-minimal", separation_dominance()),
        (5, "refinement growth bounds", growth()),
        (6, "oracle equivalence", oracle_eq()),
        (7, "separation and locality", separation()),
        (8, "termination", termination()),
    ];
    let mut failed = 0;
    for (n, title, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {n} PASS  {title}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} FAIL  {title}: {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
