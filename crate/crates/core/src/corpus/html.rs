//! Visible-text extraction for crawled webpages.
//!
//! This is a tag stripper, not a readability engine: markup is removed,
//! `script`/`style`-like elements are dropped with their content, and
//! block-level boundaries become spaces so adjacent blocks do not run
//! together.

const SKIPPED_ELEMENTS: [&str; 6] = ["script", "style", "noscript", "template", "svg", "head"];

const BLOCK_ELEMENTS: [&str; 42] = [
    "address", "article", "aside", "blockquote", "body", "br", "caption", "dd", "details", "div",
    "dl", "dt", "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5",
    "h6", "header", "hr", "html", "li", "main", "nav", "ol", "option", "p", "pre", "section",
    "select", "summary", "table", "td", "th", "title", "tr", "ul",
];

/// Extract the visible text of an HTML document (or pass plain text through),
/// collapsing every run of whitespace to a single space.
pub fn extract_webpage_text(html: &str) -> String {
    let mut out = String::with_capacity(html.len());
    let mut rest = html;

    while let Some(pos) = rest.find(['<', '&']) {
        out.push_str(&rest[..pos]);
        rest = &rest[pos..];
        if rest.starts_with('&') {
            let (decoded, used) = decode_entity(rest);
            out.push_str(&decoded);
            rest = &rest[used..];
            continue;
        }
        rest = consume_markup(rest, &mut out);
    }
    out.push_str(rest);

    collapse_whitespace(&out)
}

/// `input` starts with '<'. Returns the remainder after the markup construct,
/// pushing any separator it implies onto `out`.
fn consume_markup<'a>(input: &'a str, out: &mut String) -> &'a str {
    let after = &input[1..];
    if let Some(body) = after.strip_prefix("!--") {
        return match body.find("-->") {
            Some(end) => &body[end + 3..],
            None => "",
        };
    }
    let first = after.chars().next();
    let is_tag = match first {
        Some('!') | Some('?') => true,
        Some('/') => after[1..].starts_with(|c: char| c.is_ascii_alphabetic()),
        Some(c) => c.is_ascii_alphabetic(),
        None => false,
    };
    if !is_tag {
        out.push('<');
        return after;
    }

    let closing = first == Some('/');
    let name_start = if closing { 1 } else { 0 };
    let name: String = after[name_start..]
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric() || *c == '-' || *c == ':')
        .collect::<String>()
        .to_ascii_lowercase();

    let tag_end = find_tag_end(after);
    let remainder = match tag_end {
        Some(end) => &after[end + 1..],
        None => return "",
    };

    if BLOCK_ELEMENTS.contains(&name.as_str()) {
        out.push(' ');
    }

    let self_closing = tag_end.is_some_and(|end| after[..end].ends_with('/'));
    if !closing && !self_closing && SKIPPED_ELEMENTS.contains(&name.as_str()) {
        out.push(' ');
        return skip_element_body(remainder, &name);
    }
    remainder
}

/// Index of the '>' closing a tag, honouring quoted attribute values.
fn find_tag_end(tag: &str) -> Option<usize> {
    let mut quote: Option<char> = None;
    for (i, c) in tag.char_indices() {
        match quote {
            Some(q) if c == q => quote = None,
            Some(_) => {}
            None if c == '"' || c == '\'' => quote = Some(c),
            None if c == '>' => return Some(i),
            None => {}
        }
    }
    None
}

fn skip_element_body<'a>(body: &'a str, name: &str) -> &'a str {
    let needle = format!("</{name}");
    let lower = body.to_ascii_lowercase();
    let mut from = 0;
    while let Some(found) = lower[from..].find(&needle) {
        let start = from + found;
        let after = start + needle.len();
        // Avoid matching `</scripts` as `</script`.
        let boundary = lower[after..]
            .chars()
            .next()
            .is_none_or(|c| !(c.is_ascii_alphanumeric() || c == '-'));
        if boundary {
            return match body[after..].find('>') {
                Some(end) => &body[after + end + 1..],
                None => "",
            };
        }
        from = after;
    }
    ""
}

/// Decode a character reference at the start of `input`. Unknown or
/// malformed references are kept literally.
fn decode_entity(input: &str) -> (String, usize) {
    let limit = input.len().min(12);
    let Some(semi) = input.as_bytes()[..limit].iter().position(|&b| b == b';') else {
        return ("&".into(), 1);
    };
    let name = &input[1..semi];
    let decoded = match name {
        "amp" => Some('&'),
        "lt" => Some('<'),
        "gt" => Some('>'),
        "quot" => Some('"'),
        "apos" => Some('\''),
        "nbsp" => Some(' '),
        "ndash" => Some('\u{2013}'),
        "mdash" => Some('\u{2014}'),
        "hellip" => Some('\u{2026}'),
        "rsquo" => Some('\u{2019}'),
        "lsquo" => Some('\u{2018}'),
        "rdquo" => Some('\u{201d}'),
        "ldquo" => Some('\u{201c}'),
        _ => {
            let code = if let Some(hex) = name.strip_prefix("#x").or_else(|| name.strip_prefix("#X")) {
                u32::from_str_radix(hex, 16).ok()
            } else if let Some(dec) = name.strip_prefix('#') {
                dec.parse::<u32>().ok()
            } else {
                None
            };
            code.and_then(char::from_u32)
        }
    };
    match decoded {
        Some(c) => (c.to_string(), semi + 1),
        None => ("&".into(), 1),
    }
}

fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}
