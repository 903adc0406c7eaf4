use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use ssql_core::eval::{read_corpus, rerank_report, roundtrip_report_with, CorpusEntry};
use ssql_core::rerank::{
    assign_soft_logits, read_beam_file, write_training_targets, BaselineScorer, BeamSet,
    ExternalScorer, LabelConfig, OracleScorer, RerankConfig, Scorer,
};
use ssql_core::schema::{
    build_graph, join_plan_from_tree, load_schemas, steiner_tree, Schema, SchemaGraph, SchemaSet,
};
use ssql_core::sqlast::{parse_sql, print_sql};
use ssql_core::ssql::{lift_with_graph, lower_to_ssql, parse_ssql, print_ssql};

use crate::{CliConfig, Command, QueryInput, UsageError};

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Lower { input, config } => translate(Direction::Lower, input, &config),
        Command::Lift { input, config } => translate(Direction::Lift, input, &config),
        Command::Roundtrip { corpus, config } => roundtrip(&corpus, &config),
        Command::Rerank { beams, config } => rerank(&beams, &config),
        Command::Label {
            beams,
            output,
            config,
        } => label(&beams, output.as_deref(), &config),
        Command::Steiner { terminals, config } => steiner(&terminals, &config),
        Command::Config { config } => dump_config(&config),
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn schema_set(config: &CliConfig) -> Result<SchemaSet> {
    let path = config
        .schema
        .as_ref()
        .ok_or_else(|| usage("--schema is required"))?;
    Ok(load_schemas(path)?)
}

fn single_schema<'s>(set: &'s SchemaSet, config: &CliConfig) -> Result<&'s Schema> {
    let db = config
        .db_id
        .as_deref()
        .ok_or_else(|| usage("--db-id is required"))?;
    Ok(set.get(db)?)
}

fn rerank_config(config: &CliConfig) -> Result<RerankConfig> {
    RerankConfig::new(config.alpha, config.d_floor).map_err(|e| usage(e.to_string()))
}

fn label_config(config: &CliConfig) -> Result<LabelConfig> {
    LabelConfig::new(config.delta).map_err(|e| usage(e.to_string()))
}

fn print_json(value: &impl Serialize) -> Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Clone, Copy)]
enum Direction {
    Lower,
    Lift,
}

fn translate_one(
    dir: Direction,
    text: &str,
    schema: &Schema,
    graph: &SchemaGraph,
) -> Result<String> {
    Ok(match dir {
        Direction::Lower => print_ssql(&lower_to_ssql(&parse_sql(text, schema)?, schema)?, schema),
        Direction::Lift => print_sql(
            &lift_with_graph(&parse_ssql(text, schema)?, schema, graph)?,
            schema,
        ),
    })
}

#[derive(Serialize)]
struct BatchLine {
    id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn translate(dir: Direction, input: QueryInput, config: &CliConfig) -> Result<()> {
    let set = schema_set(config)?;
    if let Some(path) = &input.corpus {
        let corpus = read_corpus(path)?;
        if corpus.is_empty() {
            return Err(usage("corpus is empty"));
        }
        let graphs: HashMap<&str, SchemaGraph> = set
            .iter()
            .map(|s| (s.db_id.as_str(), build_graph(s)))
            .collect();
        let lines: Vec<BatchLine> = corpus
            .par_iter()
            .map(|e: &CorpusEntry| {
                let result = set
                    .get(&e.db_id)
                    .map_err(anyhow::Error::from)
                    .and_then(|schema| {
                        translate_one(dir, &e.sql, schema, &graphs[e.db_id.as_str()])
                    });
                match result {
                    Ok(out) => BatchLine {
                        id: e.id.clone(),
                        output: Some(out),
                        error: None,
                    },
                    Err(err) => BatchLine {
                        id: e.id.clone(),
                        output: None,
                        error: Some(err.to_string()),
                    },
                }
            })
            .collect();
        if config.json {
            return print_json(&lines);
        }
        for line in lines {
            match (line.output, line.error) {
                (Some(out), _) => println!("{}\t{out}", line.id),
                (None, Some(err)) => println!("{}\terror: {err}", line.id),
                (None, None) => unreachable!(),
            }
        }
        return Ok(());
    }

    let text = match input.text {
        Some(t) => t,
        None => {
            let mut buf = String::new();
            std::io::stdin().read_to_string(&mut buf)?;
            buf
        }
    };
    if text.trim().is_empty() {
        return Err(usage("no query given"));
    }
    let schema = single_schema(&set, config)?;
    let out = translate_one(dir, text.trim(), schema, &build_graph(schema))?;
    if config.json {
        print_json(&serde_json::json!({ "output": out }))
    } else {
        println!("{out}");
        Ok(())
    }
}

fn roundtrip(corpus: &Path, config: &CliConfig) -> Result<()> {
    let set = schema_set(config)?;
    let entries = read_corpus(corpus)?;
    if entries.is_empty() {
        return Err(usage("corpus is empty"));
    }
    let report = roundtrip_report_with(&entries, &set, config.ignore_values);
    if config.json {
        print_json(&report)
    } else {
        print!("{report}");
        Ok(())
    }
}

fn make_scorer(config: &CliConfig, beams: &[BeamSet]) -> Result<Box<dyn Scorer>> {
    Ok(match config.scorer.as_str() {
        "baseline" => Box::new(BaselineScorer {
            floor: config.d_floor,
        }),
        "oracle" => Box::new(OracleScorer::from_beams(beams, 1.0, config.d_floor)),
        command => Box::new(ExternalScorer::spawn(command)?),
    })
}

fn rerank(beams: &Path, config: &CliConfig) -> Result<()> {
    let rc = rerank_config(config)?;
    let set = schema_set(config)?;
    let sets = read_beam_file(beams)?;
    if sets.is_empty() {
        return Err(usage("beam file is empty"));
    }
    let scorer = make_scorer(config, &sets)?;
    let report = rerank_report(&sets, &set, scorer.as_ref(), &rc)?;
    if config.json {
        return print_json(&report);
    }
    for (i, s) in report.selections.iter().enumerate() {
        let mark = |c: &ssql_core::rerank::BeamCandidate| match c.correct {
            Some(true) => "+",
            Some(false) => "-",
            None => "?",
        };
        println!("#{} {}", i + 1, s.question);
        println!("  by g:        [{}] {}", mark(&s.by_g), s.by_g.sql);
        let changed = if s.by_combined.g_rank != s.by_g.g_rank {
            "  (changed)"
        } else {
            ""
        };
        println!(
            "  by combined: [{}] {}{changed}",
            mark(&s.by_combined),
            s.by_combined.sql
        );
    }
    print!("{report}");
    Ok(())
}

fn label(beams: &Path, output: Option<&Path>, config: &CliConfig) -> Result<()> {
    let lc = label_config(config)?;
    let set = schema_set(config)?;
    let sets = read_beam_file(beams)?;
    let mut targets = Vec::new();
    for b in &sets {
        targets.extend(assign_soft_logits(b, set.get(&b.db_id)?, &lc)?);
    }
    match output {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            write_training_targets(BufWriter::new(file), &targets)?;
        }
        None => write_training_targets(std::io::stdout().lock(), &targets)?,
    }
    Ok(())
}

fn steiner(terminals: &[String], config: &CliConfig) -> Result<()> {
    let set = schema_set(config)?;
    let schema = single_schema(&set, config)?;
    let graph = build_graph(schema);
    let mut nodes = Vec::with_capacity(terminals.len());
    for name in terminals {
        let name = name.trim();
        let node = match name.split_once('.') {
            Some((t, c)) => schema.find_qualified(t, c).map(|c| graph.column_node(c)),
            None => schema.find_table(name).map(|t| graph.table_node(t)),
        };
        nodes.push(
            node.ok_or_else(|| anyhow!("{name} is not a table or column of {}", schema.db_id))?,
        );
    }
    let tree = steiner_tree(&graph, &nodes)?;
    let plan = join_plan_from_tree(&tree, &graph);
    if config.json {
        let tables: Vec<&str> = plan.tables.iter().map(|&t| schema.table_name(t)).collect();
        let joins: Vec<[String; 2]> = plan
            .steps
            .iter()
            .map(|s| {
                [
                    format!(
                        "{}.{}",
                        schema.table_name(s.left.table),
                        schema.column_name(s.left)
                    ),
                    format!(
                        "{}.{}",
                        schema.table_name(s.right.table),
                        schema.column_name(s.right)
                    ),
                ]
            })
            .collect();
        print_json(&serde_json::json!({ "tables": tables, "joins": joins }))
    } else {
        println!("{}", plan.render(schema));
        Ok(())
    }
}

fn dump_config(config: &CliConfig) -> Result<()> {
    rerank_config(config)?;
    label_config(config)?;
    if config.json {
        return print_json(config);
    }
    println!("alpha = {}", config.alpha);
    println!("delta = {}", config.delta);
    println!("d_floor = {}", config.d_floor);
    println!("ignore_values = {}", config.ignore_values);
    println!("scorer = {}", config.scorer);
    if let Some(p) = &config.schema {
        println!("schema = {}", p.display());
    }
    if let Some(db) = &config.db_id {
        println!("db_id = {db}");
    }
    Ok(())
}
