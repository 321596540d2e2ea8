//! Turns attributes into ITM captions using noun-attribute templates.

use crate::model::{collapse_whitespace, CaptionTemplate, DomainSpec};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenderedCaption {
    pub text: String,
    pub category_name: String,
    pub attribute: String,
}

/// Renders the caption for `attribute` under `template`.
///
/// For [`CaptionTemplate::Has`] the category is appended after the attribute
/// unless the attribute already ends with the category's first word
/// ("yellow eyes" under "eye color" renders as "a bird has yellow eyes").
/// Identity returns the attribute untouched.
pub fn render_caption(
    template: CaptionTemplate,
    noun: &str,
    attribute: &str,
    category_name: &str,
) -> RenderedCaption {
    let text = match template {
        CaptionTemplate::Is => format!("a {attribute} {noun}"),
        CaptionTemplate::Has => {
            if category_name.trim().is_empty() || repeats_head_word(attribute, category_name) {
                format!("a {noun} has {attribute}")
            } else {
                format!("a {noun} has {attribute} {category_name}")
            }
        }
        CaptionTemplate::With => format!("a {noun} with {attribute}"),
        CaptionTemplate::In => format!("a {noun} in {attribute}"),
        CaptionTemplate::From => format!("a {noun} from {attribute}"),
        CaptionTemplate::Identity => attribute.to_string(),
    };
    RenderedCaption {
        text,
        category_name: category_name.to_string(),
        attribute: attribute.to_string(),
    }
}

// Plural-insensitive: "eyes" matches "eye".
fn repeats_head_word(attribute: &str, category: &str) -> bool {
    let (Some(last), Some(first)) = (
        attribute.split_whitespace().last(),
        category.split_whitespace().next(),
    ) else {
        return false;
    };
    let last = last.to_lowercase();
    let first = first.to_lowercase();
    last == first || last.strip_suffix('s') == Some(first.as_str())
}

/// The generic reference caption scored next to every attribute caption:
/// the domain caption with surrounding and repeated whitespace removed.
pub fn base_caption(domain: &DomainSpec) -> String {
    collapse_whitespace(&domain.caption)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn template_rows() {
        let r = |t, a, c| render_caption(t, "clothing item", a, c).text;
        assert_eq!(r(CaptionTemplate::Is, "red", "color"), "a red clothing item");
        assert_eq!(r(CaptionTemplate::With, "loose fit", "fit"), "a clothing item with loose fit");
        assert_eq!(r(CaptionTemplate::In, "x", "c"), "a clothing item in x");
        assert_eq!(r(CaptionTemplate::From, "2010", "year"), "a clothing item from 2010");
    }

    #[test]
    fn has_template() {
        let r = |a, c| render_caption(CaptionTemplate::Has, "bird", a, c).text;
        assert_eq!(r("solid-colored", "plumage pattern"), "a bird has solid-colored plumage pattern");
        assert_eq!(r("yellow eyes", "eye color"), "a bird has yellow eyes");
        assert_eq!(r("rounded wings", "wing shape"), "a bird has rounded wings");
        assert_eq!(r("square", "shape"), "a bird has square shape");
    }

    #[test]
    fn identity_is_verbatim() {
        let c = render_caption(
            CaptionTemplate::Identity,
            "bird",
            "bird perched on a fence",
            "perching behavior",
        );
        assert_eq!(c.text, "bird perched on a fence");
        assert_eq!(c.category_name, "perching behavior");
    }

    #[test]
    fn base_caption_trims() {
        let d = DomainSpec::new(" padded  ", "x");
        assert_eq!(base_caption(&d), "padded");
        let d = DomainSpec::new("a photo of a bird", "bird");
        assert_eq!(base_caption(&d), "a photo of a bird");
    }

    proptest! {
        #[test]
        fn rendering_is_total(noun in "[a-z]{1,8}", attr in "[a-z ]{0,6}[a-z]", cat in "[a-z ]{0,12}", t in 0usize..6) {
            let template = CaptionTemplate::ALL[t];
            let c = render_caption(template, &noun, &attr, &cat);
            prop_assert!(!c.text.is_empty());
            prop_assert_eq!(&c, &render_caption(template, &noun, &attr, &cat));
            if template == CaptionTemplate::Identity {
                prop_assert_eq!(c.text, attr);
            }
        }
    }
}
