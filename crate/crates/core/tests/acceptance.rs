//! Acceptance suite: one line per criterion on stdout, nonzero exit if any
//! criterion fails. Runs with `cargo test --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use common::*;
use qmetric_core::algebra::{
    is_magic_unitary, pauli_block_rep, random_magic_unitary, rep_from_isometry, search_quantum_rep,
    spectral_obstruction, verify_intertwiner, verify_rep_relations,
};
use qmetric_core::game::{
    correlation_from_projections, find_perfect_deterministic, is_bisynchronous, is_perfect_correlation,
    isom_rule, simulate_rounds, Game, InputDist,
};
use qmetric_core::linalg::{MatrixCF, OperatorSubspace, Rational};
use qmetric_core::metric::{enumerate_isometries, FiniteMetricSpace, Isometry, WeightedGraph};
use qmetric_core::qgraph::{
    bimodule_from_adjacency, classical_graph_embed, filtration_from_quantum_graph, is_delta_form,
    reflexive_adjacency, verify_quantum_adjacency, FiniteQuantumSet, QuantumAdjacency,
};
use qmetric_core::linalg::MatrixGQ;
use qmetric_core::rng::SplitMix64;
use qmetric_core::wstar::{
    conjugation_invariance_check, filtration_from_graph, filtration_from_metric, recover_metric,
    verify_filtration_axioms,
};

struct Outcome {
    pass: bool,
    summary: String,
    report: Value,
}

fn outcome(pass: bool, summary: String, report: Value) -> Outcome {
    Outcome { pass, summary, report }
}

/// Pairs for the classical-equivalence suite: 100 random pairs (every tenth
/// with mismatched sizes) and 20 relabelings.
fn classical_pairs() -> Vec<(FiniteMetricSpace, FiniteMetricSpace)> {
    let mut rng = SplitMix64::new(2024);
    let values = ones_and_twos();
    let mut pairs = Vec::new();
    for k in 0..100 {
        let n = 1 + rng.below(5);
        let m = if k % 10 == 9 { 1 + rng.below(5) } else { n };
        let x = random_space(&mut rng, n, &values);
        let y = random_space(&mut rng, m, &values);
        pairs.push((x, y));
    }
    for _ in 0..20 {
        let n = 1 + rng.below(5);
        let x = random_space(&mut rng, n, &quarter_steps());
        let p = random_perm(&mut rng, n);
        let y = relabeled(&x, &p);
        pairs.push((x, y));
    }
    pairs
}

fn criterion_1() -> Outcome {
    let pairs = classical_pairs();
    let mut agree = 0;
    let mut isometric = 0;
    let mut strategies = Vec::new();
    for (x, y) in &pairs {
        let oracle = brute_isometries(x, y);
        let found = find_perfect_deterministic(&isom_rule(x, y));
        // The strategy's X part must itself be an isometry in the oracle's list.
        let consistent = match &found {
            Some(s) => {
                let g: Vec<usize> = s.f[..x.len()].iter().map(|&o| o - x.len()).collect();
                oracle.contains(&g)
            }
            None => oracle.is_empty(),
        };
        agree += usize::from(consistent);
        isometric += usize::from(!oracle.is_empty());
        strategies.push(serde_json::to_value(&found).unwrap());
    }
    let pass = agree == pairs.len();
    outcome(
        pass,
        format!("{agree}/{} pairs agree with brute force ({isometric} isometric)", pairs.len()),
        json!({ "agree": agree, "isometric": isometric, "strategies": strategies }),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = SplitMix64::new(77);
    let values = ones_and_twos();
    let mut violations = 0usize;
    let mut tuples = 0usize;
    let mut flags = Vec::new();
    for _ in 0..20 {
        let x = random_space(&mut rng, 3, &values);
        let y = random_space(&mut rng, 3, &values);
        let game = isom_rule(&x, &y);
        let n = game.size();
        for v in 0..n {
            for w in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        tuples += 1;
                        let win = game.wins(v, w, a, b);
                        if win && ((v == w && a != b) || (v != w && a == b)) {
                            violations += 1;
                        }
                    }
                }
            }
        }
        flags.push(is_bisynchronous(&game));
    }
    let pass = violations == 0 && tuples == 20 * 1296 && flags.iter().all(|&f| f);
    outcome(
        pass,
        format!("{violations} violations over {tuples} tuples"),
        json!({ "violations": violations, "tuples": tuples, "library": flags }),
    )
}

fn criterion_3() -> Outcome {
    let mut iso_reps = 0;
    let mut iso_bad = 0;
    let mut non_iso = 0;
    let mut non_iso_bad = 0;
    let mut residuals = Vec::new();
    for (x, y) in classical_pairs() {
        if x.len() != y.len() {
            continue;
        }
        for p in permutations(x.len()) {
            let rep = rep_from_isometry(&Isometry { perm: p.clone() });
            let report = verify_rep_relations(&rep, &x, &y, 0.0).unwrap();
            if preserves(&x, &y, &p) {
                iso_reps += 1;
                iso_bad += usize::from(!report.pass || report.max_residual() != 0.0);
            } else {
                non_iso += 1;
                non_iso_bad += usize::from(report.pass);
                residuals.push(report.failed().next().map(|c| c.name.clone()));
            }
        }
    }
    let pass = iso_bad == 0 && non_iso_bad == 0 && iso_reps > 0 && non_iso > 0;
    outcome(
        pass,
        format!("{iso_reps} isometry reps exact, {non_iso} non-isometric bijections rejected ({non_iso_bad} wrongly accepted)"),
        json!({ "isometry_reps": iso_reps, "iso_failures": iso_bad, "non_iso": non_iso, "first_failed": residuals }),
    )
}

fn criterion_4() -> Outcome {
    let rows: Vec<Vec<i64>> = (0..4).map(|i| (0..4).map(|j| i64::from(i != j)).collect()).collect();
    let refs: Vec<&[i64]> = rows.iter().map(Vec::as_slice).collect();
    let x = FiniteMetricSpace::from_int_rows(&refs).unwrap();
    let p = MatrixCF::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap();
    let q = MatrixCF::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap();
    let rep = pauli_block_rep(&p, &q, &x, &x, 1e-12).unwrap();
    let magic = is_magic_unitary(&rep, 1e-12);
    let relations = verify_rep_relations(&rep, &x, &x, 1e-12).unwrap();
    let tw = verify_intertwiner(&rep, &x, &x, 1e-12).unwrap();
    let game = isom_rule(&x, &x);
    let corr = correlation_from_projections(&rep, 1e-9).unwrap();
    let perfect = is_perfect_correlation(&corr, &game, 1e-9);
    let sim = simulate_rounds(&corr, &game, 10_000, 0, InputDist::Uniform).unwrap();
    let residual = magic.max_residual().max(relations.max_residual()).max(tw.residual);
    let pass = magic.pass && relations.pass && tw.pass && residual < 1e-12 && perfect.perfect && sim.wins == sim.total;
    outcome(
        pass,
        format!("max residual {residual:.1e}, perfect correlation {}, win rate {}", perfect.perfect, sim.win_rate),
        json!({ "magic": magic, "relations": relations, "intertwiner": tw, "perfect": perfect, "simulation": sim }),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = SplitMix64::new(5150);
    let values = ones_and_twos();
    let (mut obstructed, mut isometric, mut bad) = (0, 0, 0);
    let mut rows = Vec::new();
    for k in 0..50 {
        let n = 2 + rng.below(4);
        let x = random_space(&mut rng, n, &values);
        let y = if k % 5 == 0 {
            let p = random_perm(&mut rng, n);
            relabeled(&x, &p)
        } else {
            random_space(&mut rng, n, &values)
        };
        let obs = spectral_obstruction(&x, &y);
        let is_iso = !brute_isometries(&x, &y).is_empty();
        let mut searches = Vec::new();
        if is_iso {
            isometric += 1;
            bad += usize::from(obs.obstructed);
        }
        if obs.obstructed {
            obstructed += 1;
            for d in [1, 2] {
                let out = search_quantum_rep(&x, &y, d, k as u64, 2000);
                bad += usize::from(out.is_found());
                searches.push(serde_json::to_value(&out).unwrap());
            }
            for c in 0..100 {
                let cand = random_magic_unitary(n, 1 + c % 2, &mut rng);
                bad += usize::from(verify_intertwiner(&cand, &x, &y, 1e-9).unwrap().pass);
            }
        }
        rows.push(json!({ "obstruction": obs, "searches": searches }));
    }
    let pass = bad == 0 && obstructed > 0 && isometric > 0;
    outcome(
        pass,
        format!("{obstructed} obstructed pairs all refuted, {isometric} isometric pairs unobstructed, {bad} violations"),
        json!({ "pairs": rows, "violations": bad }),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = SplitMix64::new(66);
    let values = quarter_steps();
    let (mut axioms_ok, mut round_trip_ok) = (0, 0);
    let mut filtrations = Vec::new();
    for _ in 0..100 {
        let n = 1 + rng.below(5);
        let x = random_space(&mut rng, n, &values);
        let f = filtration_from_metric(&x);
        axioms_ok += usize::from(verify_filtration_axioms(&f).pass);
        let back = recover_metric(&f).unwrap();
        round_trip_ok += usize::from(back.distance_rows() == x.distance_rows() && back.labels() == x.labels());
        filtrations.push(serde_json::to_value(&f).unwrap());
    }
    let pass = axioms_ok == 100 && round_trip_ok == 100;
    outcome(
        pass,
        format!("axioms {axioms_ok}/100, round trip {round_trip_ok}/100"),
        json!({ "filtrations": filtrations }),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = SplitMix64::new(707);
    let (mut graph_ok, mut quantum_ok) = (0, 0);
    let mut dims = Vec::new();
    for _ in 0..30 {
        let n = 2 + rng.below(6);
        let edges = random_connected_graph(&mut rng, n);
        let dist = bfs(n, &edges);
        let oracle = |k: usize| {
            OperatorSubspace::from_units(
                n,
                (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| dist[i][j].unwrap() <= k),
            )
        };
        let f = filtration_from_graph(&WeightedGraph::unweighted(n, &edges).unwrap()).unwrap();
        let graph_match = f.subspaces()[0] == OperatorSubspace::scalars(n)
            && f.subspaces().iter().enumerate().skip(1).all(|(k, s)| *s == oracle(k));
        let (qs, a) = classical_graph_embed(&reflexive_adjacency(n, &edges)).unwrap();
        let s = bimodule_from_adjacency(&qs, &a).unwrap();
        let fq = filtration_from_quantum_graph(&s, &qs.algebra()).unwrap();
        let quantum_match = fq.breakpoints() == f.breakpoints()
            && fq.subspaces()[0] == OperatorSubspace::diagonal(n)
            && fq.subspaces().iter().enumerate().skip(1).all(|(k, s)| *s == oracle(k));
        graph_ok += usize::from(graph_match);
        quantum_ok += usize::from(quantum_match);
        dims.push(json!({ "n": n, "graph": f.dims(), "quantum": fq.dims() }));
    }
    let pass = graph_ok == 30 && quantum_ok == 30;
    outcome(
        pass,
        format!("products match BFS on {graph_ok}/30 graphs, quantum route on {quantum_ok}/30"),
        json!({ "graphs": dims }),
    )
}

fn criterion_8() -> Outcome {
    let mut total = 0usize;
    let mut passed = 0usize;
    let mut delta_ok = true;
    for n in 1..=6usize {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let qs = FiniteQuantumSet::classical(n);
        delta_ok &= is_delta_form(&qs).ok() == Some(Rational::from(n as i64));
        for mask in 0u32..(1 << pairs.len()) {
            let edges: Vec<(usize, usize)> =
                pairs.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, e)| *e).collect();
            let (qs, a) = classical_graph_embed(&reflexive_adjacency(n, &edges)).unwrap();
            total += 1;
            passed += usize::from(verify_quantum_adjacency(&qs, &a).unwrap().pass);
        }
    }
    let zero = QuantumAdjacency { matrix: MatrixGQ::zeros(3, 3) };
    let zero_report = verify_quantum_adjacency(&FiniteQuantumSet::classical(3), &zero).unwrap();
    let zero_fails = !zero_report.check("axiom_3").unwrap().pass;
    let pass = passed == total && delta_ok && zero_fails;
    outcome(
        pass,
        format!("{passed}/{total} labelled reflexive graphs pass, δ² = n {delta_ok}, A = 0 fails axiom 3 {zero_fails}"),
        json!({ "total": total, "passed": passed, "zero": zero_report }),
    )
}

fn criterion_9() -> Outcome {
    let (mut checked, mut failures) = (0, 0);
    let mut reports = Vec::new();
    for (x, y) in classical_pairs() {
        let isos = enumerate_isometries(&x, &y);
        if isos.is_empty() {
            continue;
        }
        let (fx, fy) = (filtration_from_metric(&x), filtration_from_metric(&y));
        for g in isos {
            let report = conjugation_invariance_check(&rep_from_isometry(&g), &fx, &fy, 0.0).unwrap();
            checked += 1;
            failures += usize::from(!report.pass);
            reports.push(report.pass);
        }
    }
    let line = FiniteMetricSpace::from_int_rows(&[&[0, 1, 2], &[1, 0, 1], &[2, 1, 0]]).unwrap();
    let fl = filtration_from_metric(&line);
    let corrupted = rep_from_isometry(&Isometry { perm: vec![1, 0, 2] });
    let bad = conjugation_invariance_check(&corrupted, &fl, &fl, 0.0).unwrap();
    let witness = bad.failed().find_map(|c| c.witness.clone());
    let pass = checked > 0 && failures == 0 && !bad.pass && witness.is_some();
    outcome(
        pass,
        format!("{checked} isometries invariant ({failures} failures), corrupted rep fails with witness {witness:?}"),
        json!({ "checked": reports, "corrupted": bad }),
    )
}

type Criterion = (usize, fn() -> Outcome, u64);

const CRITERIA: [Criterion; 9] = [
    (1, criterion_1, 5),
    (2, criterion_2, 1),
    (3, criterion_3, 5),
    (4, criterion_4, 5),
    (5, criterion_5, 30),
    (6, criterion_6, 10),
    (7, criterion_7, 20),
    (8, criterion_8, 5),
    (9, criterion_9, 5),
];

fn main() -> ExitCode {
    let mut all_pass = true;
    let mut first_reports = Vec::new();
    for (id, run, limit) in CRITERIA {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(limit);
        let pass = out.pass && in_time;
        all_pass &= pass;
        println!(
            "criterion {id}: {} {} [{:.2}s, limit {limit}s]",
            if pass { "PASS" } else { "FAIL" },
            out.summary,
            elapsed.as_secs_f64()
        );
        first_reports.push(serde_json::to_string(&out.report).unwrap());
    }
    let rerun: Vec<String> = CRITERIA.iter().map(|(_, run, _)| serde_json::to_string(&run().report).unwrap()).collect();
    let differing: Vec<usize> =
        (0..CRITERIA.len()).filter(|&i| first_reports[i] != rerun[i]).map(|i| CRITERIA[i].0).collect();
    let bytes: usize = first_reports.iter().map(String::len).sum();
    let deterministic = differing.is_empty();
    all_pass &= deterministic;
    println!(
        "criterion 10: {} {bytes} bytes of JSON reports identical on rerun (differing: {differing:?})",
        if deterministic { "PASS" } else { "FAIL" }
    );
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
