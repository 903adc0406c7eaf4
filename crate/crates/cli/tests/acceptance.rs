//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

#[path = "../../core/tests/support/steiner_oracle.rs"]
mod steiner_oracle;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, ExitCode};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use ssql_core::eval::{exact_set_match, read_corpus, rerank_report, roundtrip_report};
use ssql_core::rerank::{
    combine_score, read_beam_file, rerank_beams, soft_logit, standalone_rank, BeamSet, LabelConfig,
    OracleScorer, RerankConfig, ScorerInput, DEFAULT_D_FLOOR,
};
use ssql_core::schema::{build_graph, load_schemas, steiner_tree, NodeId, Schema, SchemaSet};
use ssql_core::sqlast::{parse_sql, print_sql};
use steiner_oracle::{random_schema, subsets_up_to, Oracle};

type Outcome = Result<String, String>;
type Check = fn() -> Outcome;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($msg)+));
        }
    };
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/data")
        .join(name)
}

fn schemas() -> SchemaSet {
    load_schemas(data("tables.json")).expect("bundled schemas load")
}

fn config_defaults() -> Outcome {
    let out = Command::new(env!("CARGO_BIN_EXE_ssql"))
        .args(["config", "--json"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "config exited with {}", out.status);
    let dump: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    ensure!(dump["alpha"] == 0.7, "alpha = {}", dump["alpha"]);
    ensure!(dump["delta"] == 0.7, "delta = {}", dump["delta"]);
    ensure!(
        RerankConfig::default().alpha == 0.7,
        "library alpha default"
    );
    ensure!(LabelConfig::default().delta == 0.7, "library delta default");
    Ok(format!("alpha={} delta={}", dump["alpha"], dump["delta"]))
}

fn combine_vectors() -> Outcome {
    let cfg = |a: f64| RerankConfig::new(a, DEFAULT_D_FLOOR).unwrap();
    let s = combine_score(0.9, 0.1, &cfg(0.7)).map_err(|e| e.to_string())?;
    ensure!(
        (s - (-0.7645)).abs() <= 1e-4,
        "combine(0.9, 0.1, 0.7) = {s}"
    );
    for g in [1.0, 0.5, 0.123, 1e-9] {
        for d in [1.0, 0.3, 1e-3] {
            let s = combine_score(g, d, &cfg(1.0)).unwrap();
            ensure!(s == g.ln(), "alpha=1 gives {s} for g={g}, expected ln g");
        }
    }
    // Geometric-mean form, computed without logs of the parts.
    let vectors = [
        (0.9, 0.1, 0.7),
        (0.5, 0.5, 0.5),
        (0.01, 0.99, 0.3),
        (0.75, 0.2, 0.0),
        (0.33, 0.66, 0.9),
        (1.0, 0.05, 0.4),
        (0.2, 1.0, 0.6),
        (0.6, 0.01, 0.5),
        (0.05, 0.5, 0.25),
        (0.999, 0.001, 0.8),
    ];
    for (g, d, a) in vectors {
        let got = combine_score(g, d, &cfg(a)).unwrap();
        let want = (g.powf(a) * d.powf(1.0 - a)).ln();
        ensure!(
            (got - want).abs() <= 1e-12,
            "({g}, {d}, {a}): {got} vs {want}"
        );
    }
    Ok(format!("combine(0.9, 0.1, 0.7) = {s:.4}; 10 vectors agree"))
}

fn label_rules() -> Outcome {
    let cfg = LabelConfig::new(0.7).unwrap();
    let table = [
        (1, true, 0.7),
        (1, false, 0.3),
        (2, true, 1.0),
        (3, false, 0.3),
    ];
    for (rank, correct, want) in table {
        let got = soft_logit(rank, correct, &cfg);
        // 1 - 0.7 is 0.30000000000000004 in binary floating point.
        ensure!(
            (got - want).abs() <= 1e-15,
            "rank {rank} correct={correct}: {got}"
        );
    }
    ensure!(LabelConfig::new(0.5).is_err(), "delta = 0.5 accepted");
    Ok("{0.7, 0.3, 1.0, 0.3}".into())
}

fn steiner_optimality() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2024);
    let mut cases = 0usize;
    let schemas = 60;
    for _ in 0..schemas {
        let schema = random_schema(&mut rng, 8);
        let oracle = Oracle::new(&schema);
        let graph = build_graph(&schema);
        for terminals in subsets_up_to(oracle.nodes, 4) {
            let nodes: Vec<NodeId> = terminals.iter().map(|&t| NodeId(t)).collect();
            let got = steiner_tree(&graph, &nodes).ok().map(|t| t.size());
            ensure!(
                got == oracle.min_edges(&terminals),
                "terminals {terminals:?}: solver {got:?}, brute force {:?}\n{schema}",
                oracle.min_edges(&terminals)
            );
            cases += 1;
        }
    }
    Ok(format!("{cases} terminal sets over {schemas} schemas"))
}

fn recovery() -> Outcome {
    let corpus = read_corpus(data("corpus.jsonl")).map_err(|e| e.to_string())?;
    ensure!(corpus.len() >= 40, "corpus has {} entries", corpus.len());
    let report = roundtrip_report(&corpus, &schemas());
    ensure!(report.recovery_rate >= 0.9, "{report}");
    for f in &report.failures {
        ensure!(
            matches!(f.reason.as_str(), "self_join" | "non_minimal_join"),
            "uncategorized failure {} ({})",
            f.id,
            f.reason
        );
    }
    Ok(format!(
        "{}/{} = {:.3}",
        report.recovered, report.total, report.recovery_rate
    ))
}

fn length_reduction() -> Outcome {
    let corpus = read_corpus(data("corpus.jsonl")).map_err(|e| e.to_string())?;
    let report = roundtrip_report(&corpus, &schemas());
    ensure!(
        report.avg_ssql_tokens < report.avg_sql_tokens,
        "avg ssql {} vs sql {}",
        report.avg_ssql_tokens,
        report.avg_sql_tokens
    );
    for e in &report.entries {
        if e.joins > 0 {
            ensure!(
                e.ssql_tokens < e.sql_tokens,
                "{}: {} vs {}",
                e.id,
                e.ssql_tokens,
                e.sql_tokens
            );
        }
    }
    Ok(format!(
        "avg tokens {:.2} -> {:.2}",
        report.avg_sql_tokens, report.avg_ssql_tokens
    ))
}

fn random_beam_set(rng: &mut StdRng) -> (BeamSet, Vec<f64>) {
    let n = rng.gen_range(1..=8);
    let beams = (0..n)
        .map(|i| {
            (
                format!("select name from singer limit {}", i + 1),
                rng.gen_range(1e-4..1.0),
                None,
            )
        })
        .collect();
    let ds = (0..n).map(|_| rng.gen_range(1e-4..1.0)).collect();
    (BeamSet::new("q", "concert_singer", beams).unwrap(), ds)
}

fn order(set: &BeamSet) -> Vec<usize> {
    set.candidates.iter().map(|c| c.g_rank).collect()
}

fn rerank_invariances() -> Outcome {
    let set = schemas();
    let schema: &Schema = set.get("concert_singer").unwrap();
    let mut rng = StdRng::seed_from_u64(17);
    for trial in 0..100 {
        let (beams, ds) = random_beam_set(&mut rng);
        let scorer = |i: &ScorerInput<'_>| {
            let k: usize = i.sql.rsplit(' ').next().unwrap().parse().unwrap();
            ds[k - 1]
        };
        let generator: Vec<usize> = (1..=beams.candidates.len()).collect();
        let one = rerank_beams(
            &beams,
            schema,
            &scorer,
            &RerankConfig::new(1.0, DEFAULT_D_FLOOR).unwrap(),
        )
        .map_err(|e| e.to_string())?;
        ensure!(order(&one) == generator, "trial {trial}: alpha=1 reordered");

        let zero_cfg = RerankConfig::new(0.0, DEFAULT_D_FLOOR).unwrap();
        let zero = rerank_beams(&beams, schema, &scorer, &zero_cfg).map_err(|e| e.to_string())?;
        let alone =
            standalone_rank(&beams, schema, &scorer, &zero_cfg).map_err(|e| e.to_string())?;
        ensure!(
            order(&zero) == order(&alone),
            "trial {trial}: alpha=0 differs from standalone"
        );

        let alpha = rng.gen_range(0.0..1.0);
        let constant = |_: &ScorerInput<'_>| 0.42;
        let flat = rerank_beams(
            &beams,
            schema,
            &constant,
            &RerankConfig::new(alpha, DEFAULT_D_FLOOR).unwrap(),
        )
        .map_err(|e| e.to_string())?;
        ensure!(
            order(&flat) == generator,
            "trial {trial}: constant scorer reordered"
        );
    }
    Ok("100 random beam sets".into())
}

fn rerank_lift() -> Outcome {
    let sets = read_beam_file(data("beams.jsonl")).map_err(|e| e.to_string())?;
    let promoted = sets
        .iter()
        .filter(|s| s.candidates[0].correct == Some(false) && s.candidates[1].correct == Some(true))
        .count();
    ensure!(
        promoted * 10 == sets.len() * 3,
        "fixture has {promoted}/{} rank-2 sets",
        sets.len()
    );
    let oracle = OracleScorer::from_beams(&sets, 1.0, 0.01);
    let cfg = RerankConfig::new(0.5, DEFAULT_D_FLOOR).unwrap();
    let report = rerank_report(&sets, &schemas(), &oracle, &cfg).map_err(|e| e.to_string())?;
    let gain = report.top1_by_combined as i64 - report.top1_by_g as i64;
    ensure!(gain == promoted as i64, "gain {gain}, expected {promoted}");
    Ok(format!(
        "top-1 {} -> {} (+{gain} of {})",
        report.top1_by_g, report.top1_by_combined, report.total
    ))
}

fn parser_fixpoint() -> Outcome {
    let set = schemas();
    let corpus = read_corpus(data("corpus.jsonl")).map_err(|e| e.to_string())?;
    for e in &corpus {
        let schema = set.get(&e.db_id).map_err(|e| e.to_string())?;
        let first = parse_sql(&e.sql, schema).map_err(|err| format!("{}: {err}", e.id))?;
        let printed = print_sql(&first, schema);
        let second =
            parse_sql(&printed, schema).map_err(|err| format!("{}: {err} in {printed}", e.id))?;
        ensure!(first == second, "{}: reparse of {printed} differs", e.id);
        ensure!(
            print_sql(&second, schema) == printed,
            "{}: print is not stable",
            e.id
        );
    }
    Ok(format!("{} corpus entries", corpus.len()))
}

fn qm_matcher() -> Outcome {
    let set = schemas();
    let schema = set.get("concert_singer").unwrap();
    let q = |text: &str| parse_sql(text, schema).unwrap();

    let a = q("select name from singer where age > 20 and country = 'France' and is_male = 'T'");
    let b = q("select name from singer where is_male = 'T' and country = 'France' and age > 20");
    ensure!(exact_set_match(&a, &b, false), "reordered conjuncts differ");

    let c = q("select name from singer where age > 45 and country = 'Japan' and is_male = 'F'");
    ensure!(
        !exact_set_match(&a, &c, false),
        "different literals match with values"
    );
    ensure!(
        exact_set_match(&a, &c, true),
        "different literals differ without values"
    );

    let corpus = read_corpus(data("corpus.jsonl")).map_err(|e| e.to_string())?;
    let parsed: Vec<_> = corpus
        .iter()
        .map(|e| parse_sql(&e.sql, set.get(&e.db_id).unwrap()).unwrap())
        .chain([a, b, c])
        .collect();
    let mut rng = StdRng::seed_from_u64(5);
    let mut triples = 0;
    for _ in 0..2000 {
        let pick = |rng: &mut StdRng| &parsed[rng.gen_range(0..parsed.len())];
        let (x, y, z) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        for ignore in [false, true] {
            ensure!(exact_set_match(x, x, ignore), "not reflexive");
            ensure!(
                exact_set_match(x, y, ignore) == exact_set_match(y, x, ignore),
                "not symmetric"
            );
            if exact_set_match(x, y, ignore) && exact_set_match(y, z, ignore) {
                ensure!(exact_set_match(x, z, ignore), "not transitive");
            }
        }
        triples += 1;
    }
    Ok(format!("{triples} sampled triples"))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 10] = [
        ("1 default constants", config_defaults),
        ("2 combined score vectors", combine_vectors),
        ("3 soft label rules", label_rules),
        ("4 steiner optimality", steiner_optimality),
        ("5 round-trip recovery", recovery),
        ("6 length reduction", length_reduction),
        ("7 rerank invariances", rerank_invariances),
        ("8 rerank lift", rerank_lift),
        ("9 parser fixpoint", parser_fixpoint),
        ("10 exact set match", qm_matcher),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".to_string()));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
