//! Reduces an HTML or SGML filing document to plain text.

use std::sync::OnceLock;

use regex::Regex;

fn hidden_blocks() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?is)<!--.*?-->|<script\b.*?</script\s*>|<style\b.*?</style\s*>|<head\b.*?</head\s*>")
            .unwrap()
    })
}

fn block_tags() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)</?(?:p|div|br|tr|td|th|li|ul|ol|table|h[1-6]|hr|section|article|page)\b[^>]*>")
            .unwrap()
    })
}

fn any_tag() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)<[^>]*>").unwrap())
}

/// True when the document looks like markup rather than plain text.
pub fn looks_like_markup(raw: &str) -> bool {
    let head: String = raw.chars().take(4096).collect::<String>().to_ascii_lowercase();
    head.contains("<html") || head.contains("<body") || head.contains("<div") || head.contains("<p") || head.contains("<document>")
}

/// Removes tags (block-level ones become line breaks), drops script, style and
/// comment content, and decodes character entities. Plain text passes through
/// unchanged.
pub fn strip_markup(raw: &str) -> String {
    if !looks_like_markup(raw) {
        return raw.to_string();
    }
    let text = hidden_blocks().replace_all(raw, " ");
    let text = block_tags().replace_all(&text, "\n");
    let text = any_tag().replace_all(&text, "");
    html_escape::decode_html_entities(&text).replace('\u{a0}', " ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_tags_and_entities() {
        let html = "<html><head><title>x</title></head><body><p>Green<b>house</b> gas&nbsp;emissions &amp; <i>air</i></p>\
                    <div>quality</div><script>var ghg=1;</script><!-- ghg --></body></html>";
        let text = strip_markup(html);
        assert!(text.contains("Greenhouse gas emissions & air"));
        assert!(text.contains("\nquality"));
        assert!(!text.contains("ghg"));
        assert!(!text.contains('<'));
    }

    #[test]
    fn plain_text_untouched() {
        let t = "plain 10-K text with a < b comparison";
        assert_eq!(strip_markup(t), t);
    }
}
