mod common;

use attrlens_core::caption::{base_caption, render_caption};
use attrlens_core::store::{schema_from_str, schema_to_string};
use attrlens_core::{validate_schema, AttributeKind, CaptionTemplate};

#[test]
fn published_schemas_validate() {
    for schema in [common::deepfashion(), common::cub(), common::stanford_cars()] {
        assert_eq!(schema.categories.len(), 10);
        assert!(schema.categories.iter().all(|c| c.attributes.len() == 5));
        assert_eq!(validate_schema(&schema), Vec::<String>::new(), "{}", schema.domain.noun);
    }
}

#[test]
fn shared_attribute_across_categories_is_allowed() {
    let cars = common::stanford_cars();
    let with_suv = cars
        .categories
        .iter()
        .filter(|c| c.attributes.iter().any(|a| a == "suv"))
        .count();
    assert_eq!(with_suv, 2);
    assert!(validate_schema(&cars).is_empty());
}

#[test]
fn duplicate_category_after_normalization() {
    let mut s = common::deepfashion();
    let mut dup = s.categories[5].clone();
    dup.name = "color".into();
    s.categories.push(dup);
    s.domain.n_categories = 11;
    assert_eq!(validate_schema(&s), ["duplicate category name: color"]);
}

#[test]
fn object_level_needs_identity() {
    let mut s = common::deepfashion();
    let emb = s.category_mut("embellishments").unwrap();
    assert_eq!(emb.kind, AttributeKind::ObjectLevel);
    emb.template = CaptionTemplate::With;
    assert_eq!(validate_schema(&s), ["object-level category must use identity template"]);
}

#[test]
fn schema_file_round_trip_is_byte_identical() {
    for schema in [common::deepfashion(), common::cub(), common::stanford_cars()] {
        let text = schema_to_string(&schema);
        let back = schema_from_str(&text).unwrap();
        assert_eq!(back, schema);
        assert_eq!(schema_to_string(&back), text);
    }
}

#[test]
fn captions_for_published_templates() {
    let df = common::deepfashion();
    let caption = |schema: &attrlens_core::AttributeSchema, cat: &str, attr: &str| {
        let c = schema.category(cat).unwrap();
        render_caption(c.template, &schema.domain.noun, attr, &c.name).text
    };
    assert_eq!(caption(&df, "material", "silk"), "a silk clothing item");
    assert_eq!(caption(&df, "fit", "loose fit"), "a clothing item with loose fit");
    assert_eq!(caption(&df, "embellishments", "lace"), "lace");

    let cub = common::cub();
    assert_eq!(caption(&cub, "habitat", "forest habitat"), "a bird in forest habitat");
    assert_eq!(caption(&cub, "plumage pattern", "striped"), "a bird has striped plumage pattern");
    assert_eq!(caption(&cub, "eye color", "yellow eyes"), "a bird has yellow eyes");
    assert_eq!(caption(&cub, "wing shape", "pointed wings"), "a bird has pointed wings");

    let cars = common::stanford_cars();
    assert_eq!(caption(&cars, "year", "1965"), "a car from 1965");
    assert_eq!(
        caption(&cars, "location", "a photo of a car in a garage"),
        "a photo of a car in a garage"
    );
    assert_eq!(base_caption(&cars.domain), "a photo of a car");
}
