use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use attrlens_core::analysis::{
    category_histogram, confusion_matrix, consensus_labels, crosstab, dataset_auc,
    distribution_diff, machine_labels, run_sweep, AnalysisError, GroundTruth, HumanAnnotation,
    UNKNOWN_LABEL,
};
use attrlens_core::annotate::{store_matches, FsImageSource};
use attrlens_core::report::{self, ReportSection};
use attrlens_core::store::{read_manifest, read_schema, write_atomic, write_schema, StoreAppender};
use attrlens_core::{
    normalize_name, validate_schema, AnnotationRecord, AnnotationStore, Annotator, AttributeKind,
    CaptionTemplate, SchemaGenerator, NONE_LABEL,
};

use crate::config::ProjectConfig;
use crate::error::CliError;
use crate::services::Services;

pub const REPORT_NAMES: [&str; 6] = ["histograms", "crosstab", "diff", "auc", "confusion", "sweep"];

/// RFC 3339 time from `SOURCE_DATE_EPOCH` when set, else the current time.
fn timestamp() -> String {
    let now = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0))
        .unwrap_or_else(chrono::Utc::now);
    now.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub fn generate(
    config: &ProjectConfig,
    services: &Services,
    n: Option<u32>,
    m: Option<u32>,
) -> Result<(), CliError> {
    let mut domain = config.domain.clone();
    if let Some(n) = n {
        domain.n_categories = n;
    }
    if let Some(m) = m {
        domain.m_attributes = m;
    }
    let problems = domain.violations();
    if !problems.is_empty() {
        return Err(CliError::Usage(problems.join("; ")));
    }
    let chat = services.client("chat")?;
    let mut schema = SchemaGenerator::new(&chat).generate(&domain)?;
    schema.provenance.insert("generated_at".into(), timestamp());

    let path = config.resolve(&config.paths.schema_file);
    write_schema(&path, &schema)?;
    let pending = schema.pending_review();
    println!(
        "wrote {} categories to {}",
        schema.categories.len(),
        path.display()
    );
    if !pending.is_empty() {
        println!("awaiting template review: {}", pending.join(", "));
    }
    Ok(())
}

/// Parses `category=template` pairs.
pub fn parse_assignment(raw: &str) -> Result<(String, CaptionTemplate), CliError> {
    let (cat, tpl) = raw
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("expected CATEGORY=TEMPLATE, got {raw:?}")))?;
    let template = tpl
        .trim()
        .parse::<CaptionTemplate>()
        .map_err(|_| CliError::InvalidAssignment(format!("{raw:?}: unknown template {:?}", tpl.trim())))?;
    Ok((normalize_name(cat), template))
}

/// Reads a TOML table mapping category names to template names.
fn read_assignments(path: &Path) -> Result<Vec<(String, CaptionTemplate)>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let table: BTreeMap<String, String> =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    table
        .iter()
        .map(|(k, v)| parse_assignment(&format!("{k}={v}")))
        .collect()
}

pub fn review(
    config: &ProjectConfig,
    assignments_file: Option<&Path>,
    assign: &[String],
) -> Result<(), CliError> {
    let path = config.resolve(&config.paths.schema_file);
    let mut schema = read_schema(&path)?;
    let mut assignments = match assignments_file {
        Some(p) => read_assignments(p)?,
        None => Vec::new(),
    };
    for raw in assign {
        assignments.push(parse_assignment(raw)?);
    }
    for (name, template) in &assignments {
        let category = schema
            .category_mut(name)
            .ok_or_else(|| CliError::UnknownCategory(name.clone()))?;
        if category.kind == AttributeKind::ObjectLevel && *template != CaptionTemplate::Identity {
            return Err(CliError::InvalidAssignment(format!(
                "{name} is object-level and only takes the identity template, not {template}"
            )));
        }
        category.template = *template;
        category.needs_review = false;
    }
    let problems = validate_schema(&schema);
    if !problems.is_empty() {
        return Err(CliError::InvalidAssignment(problems.join("; ")));
    }
    write_schema(&path, &schema)?;
    let pending = schema.pending_review();
    if pending.is_empty() {
        println!("all categories reviewed");
    } else {
        println!("awaiting template review: {}", pending.join(", "));
    }
    Ok(())
}

pub fn annotate(config: &ProjectConfig, services: &Services, alpha: Option<f64>) -> Result<(), CliError> {
    let schema = read_schema(&config.resolve(&config.paths.schema_file))?;
    let pending = schema.pending_review();
    if !pending.is_empty() {
        return Err(CliError::Gated(format!(
            "categories awaiting template review: {}; run `attrlens review` first",
            pending.join(", ")
        )));
    }
    let mut annotator_config = config.annotator.clone();
    if let Some(a) = alpha {
        annotator_config.alpha = a;
    }
    annotator_config.validate()?;
    let manifest_path = config.resolve(&config.paths.corpus_manifest);
    let images = read_manifest(&manifest_path)?;
    let image_root = manifest_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let source = FsImageSource::new(image_root);

    let store_path = config.resolve(&config.paths.store_file);
    let existing = if store_path.exists() {
        Some(AnnotationStore::read(&store_path)?)
    } else {
        None
    };
    // Rewrite the starting point canonically so appends never follow a torn line.
    let start = match existing {
        Some(s) if store_matches(&s, &schema, annotator_config.alpha) => s,
        Some(_) => {
            log::warn!("{} was built with another schema or alpha; starting over", store_path.display());
            AnnotationStore::new(schema.clone(), annotator_config.alpha)
        }
        None => AnnotationStore::new(schema.clone(), annotator_config.alpha),
    };
    start.write(&store_path)?;
    let appender = Mutex::new(StoreAppender::open(&store_path, &start)?);
    let sink = |r: &AnnotationRecord| appender.lock().expect("appender lock").append(r);

    let itm = services.client("itm")?;
    let detect = services.client("detect")?;
    let annotator = Annotator {
        itm: &itm,
        detect: &detect,
        images: &source,
        config: annotator_config,
    };
    let outcome = annotator.annotate_corpus(&images, &schema, Some(start), Some(&sink))?;
    drop(appender);
    outcome.store.write(&store_path)?;
    for s in &outcome.skipped {
        log::warn!("skipped {} / {}: {}", s.image_id, s.category, s.reason);
    }
    println!(
        "annotated {} records ({} new, {} reused, {} skipped)",
        outcome.store.len(),
        outcome.computed,
        outcome.reused,
        outcome.skipped.len()
    );
    Ok(())
}

fn missing(what: &str) -> AnalysisError {
    AnalysisError::InvalidInput(format!("{what} is not configured"))
}

fn read_input(path: &Path) -> Result<String, AnalysisError> {
    fs::read_to_string(path).map_err(|e| AnalysisError::InvalidInput(format!("{}: {e}", path.display())))
}

fn run_report(
    name: &str,
    config: &ProjectConfig,
    services: &Services,
    store: &AnnotationStore,
    beta: Option<f64>,
) -> Result<ReportSection, CliError> {
    let inputs = &config.report;
    match name {
        "histograms" => {
            let mut tables = Vec::new();
            for c in &store.schema.categories {
                match category_histogram(store, &c.name) {
                    Ok(t) => tables.push(t),
                    Err(AnalysisError::EmptyCategory(n)) => log::warn!("category {n} has no records"),
                    Err(e) => return Err(e.into()),
                }
            }
            if tables.is_empty() {
                return Err(AnalysisError::EmptyInput("annotation store").into());
            }
            Ok(report::histograms(&tables))
        }
        "crosstab" => {
            let images = read_manifest(&config.resolve(&config.paths.corpus_manifest))?;
            let names: Vec<String> = if inputs.crosstab_categories.is_empty() {
                store.schema.categories.iter().map(|c| c.name.clone()).collect()
            } else {
                inputs.crosstab_categories.iter().map(|c| normalize_name(c)).collect()
            };
            let tables = names
                .iter()
                .map(|n| crosstab(store, &images, n))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(report::crosstabs(&tables))
        }
        "diff" => {
            let path = inputs.compare_store.as_ref().ok_or_else(|| missing("report.compare_store"))?;
            let other = AnnotationStore::read(&config.resolve(path))?;
            Ok(report::diffs(&distribution_diff(store, &other)?))
        }
        "auc" => {
            let path = inputs.ground_truth.as_ref().ok_or_else(|| missing("report.ground_truth"))?;
            let truth = GroundTruth::from_csv(read_input(&config.resolve(path))?.as_bytes())?;
            Ok(report::auc_table(&dataset_auc(store, &truth)?))
        }
        "confusion" => {
            if inputs.confusion.is_empty() {
                return Err(missing("report.confusion").into());
            }
            let mut matrices = Vec::new();
            for input in &inputs.confusion {
                let name = normalize_name(&input.category);
                let rows = HumanAnnotation::from_csv(read_input(&config.resolve(&input.human_annotations))?.as_bytes())?;
                let human = consensus_labels(&rows);
                let machine = machine_labels(store, &name)?;
                let category = store.schema.category(&name).expect("checked by machine_labels");
                let mut order = category.attributes.clone();
                order.push(NONE_LABEL.to_string());
                order.push(UNKNOWN_LABEL.to_string());
                matrices.push((name, confusion_matrix(&human, &machine, &order)?));
            }
            Ok(report::confusion(&matrices))
        }
        "sweep" => {
            let path = inputs.real_attributes.as_ref().ok_or_else(|| missing("report.real_attributes"))?;
            let real: Vec<String> = read_input(&config.resolve(path))?
                .lines()
                .map(normalize_name)
                .filter(|l| !l.is_empty())
                .collect();
            let mut recall_config = config.recall.clone();
            if let Some(b) = beta {
                recall_config.beta = b;
            }
            let n_values = if inputs.sweep_n.is_empty() { vec![config.domain.n_categories] } else { inputs.sweep_n.clone() };
            let m_values = if inputs.sweep_m.is_empty() { vec![config.domain.m_attributes] } else { inputs.sweep_m.clone() };
            let chat = services.client("chat")?;
            let embed = services.embedder()?;
            let outcomes = run_sweep(
                &real,
                &config.domain,
                &n_values,
                &m_values,
                &chat,
                embed.as_ref(),
                &recall_config,
                inputs.variance_threshold,
            )?;
            Ok(report::sweep(&outcomes))
        }
        other => Err(CliError::Usage(format!("unknown report {other}"))),
    }
}

/// Report names from `--reports`, else the config default, else histograms.
pub fn requested_reports(config: &ProjectConfig, flag: Option<&str>) -> Result<Vec<String>, CliError> {
    let names: Vec<String> = match flag {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
        None if !config.report.default.is_empty() => config.report.default.clone(),
        None => vec!["histograms".to_string()],
    };
    if names.is_empty() {
        return Err(CliError::Usage("--reports needs at least one report name".into()));
    }
    if let Some(bad) = names.iter().find(|n| !REPORT_NAMES.contains(&n.as_str())) {
        return Err(CliError::Usage(format!(
            "unknown report {bad:?}; choose from {}",
            REPORT_NAMES.join(", ")
        )));
    }
    Ok(names)
}

pub fn report(
    config: &ProjectConfig,
    services: &Services,
    which: &[String],
    beta: Option<f64>,
) -> Result<(), CliError> {
    let store = AnnotationStore::read(&config.resolve(&config.paths.store_file))?;
    let dir: PathBuf = config.resolve(&config.paths.report_dir);
    fs::create_dir_all(&dir).map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?;

    let mut markdown = String::from("# Dataset attribute report\n\n");
    let mut failures = Vec::new();
    let mut backend_failure = false;
    for name in which {
        match run_report(name, config, services, &store, beta) {
            Ok(section) => {
                let csv_path = dir.join(format!("{}.csv", section.name));
                write_atomic(&csv_path, section.csv.as_bytes())
                    .map_err(|e| CliError::Config(format!("{}: {e}", csv_path.display())))?;
                markdown.push_str(&section.markdown);
                println!("wrote {}", csv_path.display());
            }
            Err(e) => {
                log::error!("report {name} failed: {e}");
                backend_failure |= e.exit_code() == 2;
                failures.push(format!("{name}: {e}"));
            }
        }
    }
    let md_path = dir.join("report.md");
    write_atomic(&md_path, markdown.as_bytes())
        .map_err(|e| CliError::Config(format!("{}: {e}", md_path.display())))?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Reports {
            failed: failures.len(),
            messages: failures,
            backend: backend_failure,
        })
    }
}
