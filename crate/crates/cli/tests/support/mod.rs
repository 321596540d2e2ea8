//! A scripted mock project on disk: 3 categories of 3 attributes, 20 images
//! with class labels, and a fixture file that answers every backend request
//! with planted values.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use attrlens_core::attrgen::{build_q1, build_q2, build_q3};
use attrlens_core::backends::{Detection, FixtureBuilder};
use attrlens_core::caption::render_caption;
use attrlens_core::store::write_manifest;
use attrlens_core::{CaptionTemplate, DetectionBox, DomainSpec, ImageRef};

pub const CHAT_MODEL: &str = "gpt-3.5-turbo-1106";
pub const ITM_MODEL: &str = "blip-itm-large-coco";
pub const DETECT_MODEL: &str = "owlv2-base-patch16";
pub const N_IMAGES: usize = 20;

pub const STYLE: [&str; 3] = ["industrial style", "bohemian style", "scandinavian style"];
pub const COLOR: [&str; 3] = [
    "neutral color scheme",
    "monochromatic color scheme",
    "complementary color scheme",
];
pub const FURNITURE: [&str; 3] = ["sofa", "coffee table", "armchair"];

pub fn domain() -> DomainSpec {
    DomainSpec::new("a photo of a living room", "living room")
        .with_sizes(3, 3)
        .with_reps(3, 3, 3)
}

pub fn image_id(i: usize) -> String {
    format!("img-{i:02}")
}

pub fn image_bytes(i: usize) -> Vec<u8> {
    format!("not really a png, image {i:02}").into_bytes()
}

pub fn class_of(i: usize) -> &'static str {
    if i < 10 {
        "catalog"
    } else {
        "render"
    }
}

/// Planted style: renders are all industrial; catalog images split
/// bohemian (0-3), scandinavian (4-7), none (8-9).
pub fn planted_style(i: usize) -> Option<usize> {
    match i {
        10.. => Some(0),
        0..=3 => Some(1),
        4..=7 => Some(2),
        _ => None,
    }
}

/// Planted colour scheme: cycles through the three attributes and none.
pub fn planted_color(i: usize) -> Option<usize> {
    (i % 4 < 3).then_some(i % 4)
}

/// Planted detector scores per furniture attribute. Coffee tables sit on
/// either side of the 0.3 threshold.
pub fn planted_furniture(i: usize) -> [f64; 3] {
    [0.8, if i.is_multiple_of(2) { 0.31 } else { 0.30 }, 0.1]
}

fn itm_scores(chosen: Option<usize>) -> ([f64; 3], f64) {
    let mut scores = [0.3; 3];
    if let Some(c) = chosen {
        scores = [0.2; 3];
        scores[c] = 0.9;
    }
    (scores, 0.5)
}

/// Fixture lines for every request the full pipeline makes.
pub fn fixtures(sweep_ns: &[u32]) -> FixtureBuilder {
    let d = domain();
    let mut fx = FixtureBuilder::new();
    let categories: [(&str, &[&str; 3], &str); 3] = [
        ("style", &STYLE, "No, these are design styles."),
        ("color scheme", &COLOR, "No."),
        ("furniture", &FURNITURE, "Yes, these are physical objects."),
    ];
    fx.chat(
        CHAT_MODEL,
        &build_q1(&d),
        0.3,
        None,
        None,
        "Here are the categories:\n```python\n['Style', 'Color scheme', 'Furniture']\n```",
    );
    for &n in sweep_ns {
        let names = ["'Style'", "'Color scheme'", "'Furniture'"];
        let text = format!("[{}]", names[..n.min(3) as usize].join(", "));
        fx.chat(CHAT_MODEL, &build_q1(&d.clone().with_sizes(n, 3)), 0.3, None, None, &text);
    }
    for (name, attrs, verdict) in categories {
        let quoted: Vec<String> = attrs.iter().map(|a| format!("\"{a}\"")).collect();
        fx.chat(CHAT_MODEL, &build_q2(&d, name).unwrap(), 0.3, None, None, &format!("[{}]", quoted.join(", ")));
        fx.chat(CHAT_MODEL, &build_q3(attrs).unwrap(), 0.3, None, None, verdict);
    }

    for i in 0..N_IMAGES {
        let bytes = image_bytes(i);
        for (name, attrs, chosen) in [
            ("style", &STYLE, planted_style(i)),
            ("color scheme", &COLOR, planted_color(i)),
        ] {
            let (scores, base) = itm_scores(chosen);
            for (a, s) in attrs.iter().zip(scores) {
                let caption = render_caption(CaptionTemplate::With, &d.noun, a, name);
                fx.itm(ITM_MODEL, &bytes, &caption.text, s);
            }
            fx.itm(ITM_MODEL, &bytes, &d.caption, base);
        }
        let queries: Vec<String> = FURNITURE.iter().map(|s| s.to_string()).collect();
        let detections: Vec<Detection> = FURNITURE
            .iter()
            .zip(planted_furniture(i))
            .map(|(q, s)| Detection {
                query: q.to_string(),
                boxes: vec![
                    DetectionBox { x_min: 10.0, y_min: 20.0, x_max: 110.0, y_max: 90.0, score: s },
                    DetectionBox { x_min: 0.0, y_min: 0.0, x_max: 5.0, y_max: 5.0, score: 0.05 },
                ],
            })
            .collect();
        fx.detect(DETECT_MODEL, &bytes, &queries, &detections);
    }
    fx
}

pub struct Project {
    pub dir: tempfile::TempDir,
}

pub const CONFIG: &str = r#"# scripted mock project
[domain]
caption = "a photo of a living room"
noun = "living room"
n_categories = 3
m_attributes = 3
reps_categories = 3
reps_attributes = 3
reps_kind = 3

[backends.chat]
endpoint_url = "mock:fixtures"
model_id = "gpt-3.5-turbo-1106"

[backends.itm]
endpoint_url = "mock:fixtures"
model_id = "blip-itm-large-coco"

[backends.detect]
endpoint_url = "mock:fixtures"
model_id = "owlv2-base-patch16"

[backends.embed]
endpoint_url = "mock:hash-embedding?dim=16"
model_id = "hash-16"

[annotator]
alpha = 0.3
parallelism = 4
fail_policy = "abort_run"

[recall]
beta = 0.8

[paths]
corpus_manifest = "corpus/manifest.jsonl"
schema_file = "schema.json"
store_file = "store.jsonl"
report_dir = "reports"
cache_dir = "cache"
mock_fixtures = "fixtures.jsonl"

[report]
default = ["histograms", "crosstab"]
crosstab_categories = ["style"]
ground_truth = "ground_truth.csv"
real_attributes = "real_attributes.txt"
sweep_n = [2, 3]
sweep_m = [3]

[[report.confusion]]
category = "style"
human_annotations = "human_style.csv"
"#;

impl Project {
    pub fn new() -> Project {
        Self::with_config(CONFIG)
    }

    pub fn with_config(config: &str) -> Project {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        fs::write(root.join("project.toml"), config).unwrap();
        fs::write(root.join("fixtures.jsonl"), fixtures(&[2, 3]).to_jsonl()).unwrap();

        fs::create_dir_all(root.join("corpus/images")).unwrap();
        let images: Vec<ImageRef> = (0..N_IMAGES)
            .map(|i| {
                let uri = format!("images/{}.png", image_id(i));
                fs::write(root.join("corpus").join(&uri), image_bytes(i)).unwrap();
                ImageRef {
                    id: image_id(i),
                    uri,
                    class_label: Some(class_of(i).to_string()),
                }
            })
            .collect();
        write_manifest(&root.join("corpus/manifest.jsonl"), &images).unwrap();

        let mut gt = String::from("image_id,attribute,label\n");
        for i in 0..N_IMAGES {
            for (attrs, chosen) in [(&STYLE, planted_style(i)), (&COLOR, planted_color(i))] {
                for (k, a) in attrs.iter().enumerate() {
                    gt.push_str(&format!("{},{a},{}\n", image_id(i), u8::from(chosen == Some(k))));
                }
            }
            for (a, s) in FURNITURE.iter().zip(planted_furniture(i)) {
                gt.push_str(&format!("{},{a},{}\n", image_id(i), u8::from(s > 0.3)));
            }
        }
        fs::write(root.join("ground_truth.csv"), gt).unwrap();

        // Two annotators per image. They agree with the planted style except
        // on img-00 (both say vintage-like "unknown"), and split on img-01.
        let mut human = String::from("image_id,annotator_id,label\n");
        for i in 0..N_IMAGES {
            let label = planted_style(i).map_or("none", |k| STYLE[k]);
            let (a, b) = match i {
                0 => ("unknown", "unknown"),
                1 => ("bohemian style", "industrial style"),
                _ => (label, label),
            };
            human.push_str(&format!("{},h1,{a}\n{},h2,{b}\n", image_id(i), image_id(i)));
        }
        fs::write(root.join("human_style.csv"), human).unwrap();
        fs::write(
            root.join("real_attributes.txt"),
            "industrial style\nsofa\nvelvet upholstery\n",
        )
        .unwrap();
        Project { dir }
    }

    pub fn root(&self) -> &Path {
        self.dir.path()
    }

    pub fn config(&self) -> PathBuf {
        self.root().join("project.toml")
    }

    pub fn run(&self, args: &[&str]) -> Output {
        run_in(&self.config(), args)
    }

    pub fn read(&self, rel: &str) -> String {
        fs::read_to_string(self.root().join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
    }

    /// generate, review and annotate; panics on any failure.
    pub fn pipeline(&self) {
        for args in [
            &["generate"][..],
            &["review", "--assign", "style=with", "--assign", "color scheme=with"],
            &["annotate"],
        ] {
            let out = self.run(args);
            assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        }
    }
}

pub fn run_in(config: &Path, args: &[&str]) -> Output {
    run_env(config, args, &[])
}

/// Runs the binary with a fixed clock; `env` entries override the defaults.
pub fn run_env(config: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let (sub, rest) = args.split_first().expect("subcommand");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_attrlens"));
    cmd.arg(sub)
        .arg("--config")
        .arg(config)
        .args(rest)
        .env("SOURCE_DATE_EPOCH", "0")
        .env("RUST_LOG", "warn");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

/// Requests served by the fixture file, as logged by the binary at info level.
pub fn fixture_calls(out: &Output) -> usize {
    let stderr = String::from_utf8_lossy(&out.stderr);
    stderr
        .lines()
        .find_map(|l| {
            l.split("fixture backend answered ")
                .nth(1)?
                .split_whitespace()
                .next()?
                .parse()
                .ok()
        })
        .unwrap_or_else(|| panic!("no fixture call count in stderr:\n{stderr}"))
}

pub fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
