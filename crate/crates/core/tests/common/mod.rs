#![allow(dead_code)]

use attrlens_core::{
    AttributeCategory, AttributeKind, AttributeSchema, DomainSpec,
};

fn cat(name: &str, template: &str, object: bool, attrs: &[&str]) -> AttributeCategory {
    let mut c = AttributeCategory::new(
        name,
        attrs.iter().map(|a| attrlens_core::normalize_name(a)).collect(),
        if object {
            AttributeKind::ObjectLevel
        } else {
            AttributeKind::ImageLevel
        },
        template.parse().unwrap(),
    );
    c.needs_review = false;
    c
}

fn schema(caption: &str, noun: &str, categories: Vec<AttributeCategory>) -> AttributeSchema {
    AttributeSchema {
        domain: DomainSpec::new(caption, noun),
        categories,
        provenance: Default::default(),
    }
}

pub fn deepfashion() -> AttributeSchema {
    schema(
        "a photo of a clothing item",
        "clothing item",
        vec![
            cat("material", "is", false, &["silk", "leather", "cotton", "denim", "wool"]),
            cat("fit", "with", false, &["loose fit", "oversized fit", "slim fit", "tailored fit", "athletic fit"]),
            cat("style", "with", false, &["bohemian style", "vintage style", "streetwear style", "formal style", "minimalist style"]),
            cat("pattern", "with", false, &["striped pattern", "floral pattern", "polka dot pattern", "animal print pattern", "plaid pattern"]),
            cat("sleeve length", "with", false, &["sleeveless", "short sleeve", "long sleeve", "cap sleeve", "three-quarter sleeve"]),
            cat("color", "is", false, &["red", "yellow", "blue", "black", "white"]),
            cat("embellishments", "-", true, &["embroidery", "sequins", "beads", "lace", "appliqué"]),
            cat("neckline", "with", false, &["v-neckline", "halter neckline", "boat neckline", "off-the-shoulder neckline", "crew neckline"]),
            cat("brand/logo", "with", false, &["gucci logo", "adidas logo", "nike logo", "polo ralph lauren logo", "levi's logo"]),
            cat("type of clothing item", "-", true, &["skirt", "jacket", "pants", "dress", "t-shirt"]),
        ],
    )
}

pub fn cub() -> AttributeSchema {
    schema(
        "a photo of a bird",
        "bird",
        vec![
            cat("habitat", "in", false, &["forest habitat", "wetland habitat", "desert habitat", "coastal habitat", "urban habitat"]),
            cat("plumage pattern", "has", false, &["solid-colored", "striped", "spotted", "mottled", "barred"]),
            cat("color", "is", false, &["yellow", "blue", "orange", "green", "red"]),
            cat("size", "is", false, &["small", "medium-sized", "large", "tiny", "gigantic"]),
            cat("wing shape", "has", false, &["rounded wings", "pointed wings", "broad wings", "slender wings", "elongated wings"]),
            cat("species", "is", false, &["american robin", "great horned owl", "bald eagle", "blue jay", "sparrow"]),
            cat("perching behavior", "-", true, &["bird perched on a statue", "bird perched on a fence", "bird perched on a rooftop", "bird perched on a tree branch", "bird perched on a power line"]),
            cat("background scenery", "-", false, &[
                "a photo of a bird with a clear blue sky as the background scenery",
                "a photo of a bird perched on a tree branch with lush green foliage as the background scenery",
                "a photo of a bird flying above a field of colorful wildflowers as the background scenery",
                "a photo of a bird standing on a rock with a serene lake as the background scenery",
                "a photo of a bird standing on a rocky cliff with a vast ocean as the background scenery",
            ]),
            cat("shape", "has", false, &["square", "circle", "triangle", "pentagon", "diamond"]),
            cat("eye color", "has", false, &["yellow eyes", "red eyes", "blue eyes", "green eyes", "brown eyes"]),
        ],
    )
}

pub fn stanford_cars() -> AttributeSchema {
    schema(
        "a photo of a car",
        "car",
        vec![
            cat("body type", "-", true, &["sedan", "convertible", "SUV", "hatchback", "coupe"]),
            cat("color", "is", false, &["blue", "red", "black", "white", "silver"]),
            cat("condition", "is", false, &["vintage", "brand new", "damaged", "restored", "rusty"]),
            cat("year", "from", false, &["1965", "2010", "2021", "2012", "2020"]),
            cat("size", "-", true, &["small car", "compact car", "mid-size car", "SUV", "full-size car"]),
            cat("make/model", "-", true, &["ford mustang", "bmw 3 series", "toyota camry", "honda civic", "chevrolet corvette"]),
            cat("lighting", "in", false, &["natural sunlight", "spotlight", "soft lighting", "dramatic low-key lighting", "neon lighting"]),
            cat("location", "-", false, &[
                "a photo of a car in a parking lot",
                "a photo of a car on a city street",
                "a photo of a car in a garage",
                "a photo of a car on a highway",
                "a photo of a car at a gas station",
            ]),
            cat("features", "-", false, &["color histogram", "object detection", "texture analysis", "shape features", "edge detection"]),
            cat("surroundings", "-", false, &[
                "a photo of a car parked in a busy city street",
                "a photo of a car surrounded by palm trees on a tropical beach",
                "a photo of a car driving on a winding mountain road",
                "a photo of a car in a crowded parking lot",
                "a photo of a car parked in a suburban driveway",
            ]),
        ],
    )
}
