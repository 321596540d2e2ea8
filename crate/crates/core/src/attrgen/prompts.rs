use crate::model::DomainSpec;

use super::GenerateError;

pub const CATEGORY_LIST_SUFFIX: &str = "Output the categories in one Python list";
pub const EXAMPLE_LIST_SUFFIX: &str = "Output the examples in one Python list";

/// Category query for the domain.
pub fn build_q1(domain: &DomainSpec) -> String {
    format!(
        "What are {} attribute categories that can be used to visually distinguish images \
         described by the caption \"{}\"? {CATEGORY_LIST_SUFFIX}",
        domain.n_categories, domain.caption
    )
}

/// Attribute-example query for one category.
pub fn build_q2(domain: &DomainSpec, category: &str) -> Result<String, GenerateError> {
    if category.trim().is_empty() {
        return Err(GenerateError::InvalidInput("category must be non-empty".into()));
    }
    Ok(format!(
        "What are {} different examples of the category {category} that can be used to \
         distinguish images described by the caption \"{}\"? {EXAMPLE_LIST_SUFFIX}",
        domain.m_attributes, domain.caption
    ))
}

/// Object-versus-holistic query for a category's attributes.
pub fn build_q3<S: AsRef<str>>(attributes: &[S]) -> Result<String, GenerateError> {
    if attributes.is_empty() {
        return Err(GenerateError::InvalidInput("attribute list must be non-empty".into()));
    }
    let list = attributes.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(", ");
    Ok(format!(
        "Are {list} examples of objects or items? Answer with a yes or no. Explain your answer."
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q1_bird() {
        let d = DomainSpec::new("a photo of a bird", "bird");
        assert_eq!(
            build_q1(&d),
            "What are 10 attribute categories that can be used to visually distinguish images \
             described by the caption \"a photo of a bird\"? Output the categories in one Python list"
        );
    }

    #[test]
    fn q1_substitutes_n() {
        let d = DomainSpec::new("a photo of a living room", "living room").with_sizes(1, 5);
        let q = build_q1(&d);
        assert!(q.starts_with("What are 1 attribute categories"));
        assert!(q.contains("\"a photo of a living room\""));
    }

    #[test]
    fn q2_substitutions() {
        let d = DomainSpec::new("a photo of a car", "car").with_sizes(10, 5);
        let q = build_q2(&d, "color").unwrap();
        assert!(q.contains("5 different examples of the category color"));
        assert!(q.contains("\"a photo of a car\""));
        assert!(q.ends_with("Output the examples in one Python list"));

        let d = DomainSpec::new("a photo of a bird", "bird").with_sizes(10, 3);
        assert!(build_q2(&d, "habitat")
            .unwrap()
            .contains("3 different examples of the category habitat"));
        assert!(build_q2(&d, " ").is_err());
    }

    #[test]
    fn q3_lists_attributes() {
        assert_eq!(
            build_q3(&["couch", "coffee table"]).unwrap(),
            "Are couch, coffee table examples of objects or items? Answer with a yes or no. Explain your answer."
        );
        assert_eq!(
            build_q3(&["sofa"]).unwrap(),
            "Are sofa examples of objects or items? Answer with a yes or no. Explain your answer."
        );
        assert!(build_q3::<&str>(&[]).is_err());
    }
}
