mod common;

use std::sync::Arc;

use attrlens_core::attrgen::{build_q1, build_q2, build_q3, parse_list_response};
use attrlens_core::backends::{Client, FixtureBuilder};
use attrlens_core::{generate_schema, AttributeKind, AttributeSchema, CaptionTemplate, DomainSpec};

const MODEL: &str = "gpt-3.5-turbo-1106";

fn py_list(items: &[String]) -> String {
    let quoted: Vec<String> = items.iter().map(|s| format!("'{s}'")).collect();
    format!("[{}]", quoted.join(", "))
}

fn title(s: &str) -> String {
    s.split(' ')
        .map(|w| {
            let mut c = w.chars();
            c.next().map_or(String::new(), |f| f.to_uppercase().collect::<String>() + c.as_str())
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Scripts five noisy samples per list prompt that still agree on `target`,
/// and kind votes that favour the target kind.
fn script(target: &AttributeSchema) -> FixtureBuilder {
    let d = &target.domain;
    let mut fx = FixtureBuilder::new();
    let names: Vec<String> = target.categories.iter().map(|c| c.name.clone()).collect();
    let noise_cats = ["beak shape", "tail length"];
    for rep in 0..5u32 {
        let mut run: Vec<String> = if rep == 0 {
            names.iter().map(|n| title(n)).collect()
        } else {
            let mut r = names.clone();
            r.rotate_left(rep as usize);
            r
        };
        if rep > 0 && rep < 3 {
            run.push(noise_cats[rep as usize - 1].to_string());
        }
        let text = match rep {
            0 => format!("```python\n{}\n```", py_list(&run)),
            1 => format!("Sure! Here are the categories: {}", py_list(&run)),
            _ => py_list(&run),
        };
        fx.chat(MODEL, &build_q1(d), 0.3, Some(rep), None, &text);
    }
    for c in &target.categories {
        let q2 = build_q2(d, &c.name).unwrap();
        for rep in 0..5u32 {
            let mut run = c.attributes.clone();
            if rep > 0 {
                run.rotate_right(rep as usize);
                run.push(format!("odd {} {rep}", c.name));
            }
            fx.chat(MODEL, &q2, 0.3, Some(rep), None, &py_list(&run));
        }
        let q3 = build_q3(&c.attributes).unwrap();
        let votes = match (c.kind, c.name.as_str()) {
            (_, "background scenery") => ["Yes, a bird is an object.", "No.", "Hard to say."],
            (AttributeKind::ObjectLevel, _) => ["Yes, these are physical items.", "yes", "No."],
            (AttributeKind::ImageLevel, _) => ["No, these describe qualities.", "No.", "Yes"],
        };
        for (rep, v) in votes.iter().enumerate() {
            fx.chat(MODEL, &q3, 0.3, Some(rep as u32), None, v);
        }
    }
    fx
}

#[test]
fn cub_scripted_generation() {
    let target = common::cub();
    let fx = script(&target).build();
    let client = Client::new(Arc::new(fx), MODEL);
    let schema = generate_schema(&target.domain, &client).unwrap();

    let names: Vec<&str> = schema.categories.iter().map(|c| c.name.as_str()).collect();
    let expected: Vec<&str> = target.categories.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(names, expected);
    for (got, want) in schema.categories.iter().zip(&target.categories) {
        assert_eq!(got.attributes, want.attributes, "{}", want.name);
        assert_eq!(got.kind, want.kind, "{}", want.name);
        assert_eq!(got.template, CaptionTemplate::Identity);
        assert_eq!(got.needs_review, got.kind == AttributeKind::ImageLevel);
    }
    assert!(names.contains(&"habitat") && names.contains(&"plumage pattern"));
    assert_eq!(
        schema.category("perching behavior").unwrap().kind,
        AttributeKind::ObjectLevel
    );
    assert_eq!(schema.provenance["n_categories"], "10");
    assert_eq!(schema.provenance["m_attributes"], "5");
    assert_eq!(schema.provenance["temperature"], "0.3");
    assert_eq!(schema.provenance["model_id"], MODEL);
}

#[test]
fn deterministic_under_replay() {
    let target = common::deepfashion();
    let fx = script(&target);
    let a = generate_schema(&target.domain, &Client::new(Arc::new(fx.build()), MODEL)).unwrap();
    let b = generate_schema(&target.domain, &Client::new(Arc::new(fx.build()), MODEL)).unwrap();
    assert_eq!(
        attrlens_core::store::schema_to_string(&a),
        attrlens_core::store::schema_to_string(&b)
    );
}

#[test]
fn single_identical_run_equals_its_parse() {
    let d = DomainSpec::new("a photo of a dog", "dog").with_sizes(3, 3).with_reps(1, 1, 1);
    let q1 = "[\"Color\", \"Size\", \"Posture\"]";
    let mut fx = FixtureBuilder::new();
    fx.chat(MODEL, &build_q1(&d), 0.3, None, None, q1);
    let lists = [
        ("color", "['black', 'white', 'golden']"),
        ("size", "['giant', 'tiny', 'small']"),
        ("posture", "['upright posture', 'playful posture', 'sitting posture']"),
    ];
    for (cat, text) in lists {
        fx.chat(MODEL, &build_q2(&d, cat).unwrap(), 0.3, None, None, text);
        let attrs = parse_list_response(text).unwrap();
        fx.chat(MODEL, &build_q3(&attrs).unwrap(), 0.3, None, None, "No.");
    }
    let schema = generate_schema(&d, &Client::new(Arc::new(fx.build()), MODEL)).unwrap();
    assert_eq!(
        schema.categories.iter().map(|c| c.name.clone()).collect::<Vec<_>>(),
        parse_list_response(q1).unwrap()
    );
    for (cat, text) in lists {
        assert_eq!(schema.category(cat).unwrap().attributes, parse_list_response(text).unwrap());
    }
}

#[test]
fn split_vote_defaults_to_image_level() {
    let d = DomainSpec::new("a photo of a bird", "bird").with_sizes(1, 2).with_reps(1, 1, 3);
    let mut fx = FixtureBuilder::new();
    fx.chat(MODEL, &build_q1(&d), 0.3, None, None, "['beak']");
    fx.chat(MODEL, &build_q2(&d, "beak").unwrap(), 0.3, None, None, "['hooked beak', 'short beak']");
    let q3 = build_q3(&["hooked beak", "short beak"]).unwrap();
    for (rep, v) in ["Yes", "No", "Maybe"].iter().enumerate() {
        fx.chat(MODEL, &q3, 0.3, Some(rep as u32), None, v);
    }
    let schema = generate_schema(&d, &Client::new(Arc::new(fx.build()), MODEL)).unwrap();
    assert_eq!(schema.categories[0].kind, AttributeKind::ImageLevel);
}
