use percent_encoding::percent_decode_str;

use super::IngestError;

/// Readable local name of an HTTP(S) IRI.
///
/// Takes the fragment after the last `#` when there is one, otherwise the last
/// non-empty path segment, and percent-decodes it. Casing and underscores are
/// kept as written.
pub fn derive_label(iri: &str) -> Result<String, IngestError> {
    let local = match iri.rfind('#') {
        Some(pos) => &iri[pos + 1..],
        None => {
            let rest = iri.split_once("://").map(|(_, rest)| rest).unwrap_or(iri);
            // Query strings are part of the last segment; authority-only IRIs
            // have no path segment to name.
            match rest.split_once('/') {
                Some((_, path)) => path.rsplit('/').next().unwrap_or(""),
                None => "",
            }
        }
    };
    if local.is_empty() {
        return Err(IngestError::EmptyLocalName(iri.to_string()));
    }
    let decoded = percent_decode_str(local).decode_utf8_lossy().into_owned();
    if decoded.trim().is_empty() {
        return Err(IngestError::EmptyLocalName(iri.to_string()));
    }
    Ok(decoded)
}

/// Heuristic for local names that carry no human-readable meaning:
/// a letter followed only by digits (`Q42`), a name with no alphabetic
/// character at all, or a UUID-shaped token.
pub fn is_opaque_label(label: &str) -> bool {
    let mut chars = label.chars();
    if let Some(first) = chars.next() {
        let rest = chars.as_str();
        if first.is_ascii_alphabetic() && !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()) {
            return true;
        }
    }
    if !label.chars().any(char::is_alphabetic) {
        return true;
    }
    is_uuid_shaped(label)
}

fn is_uuid_shaped(label: &str) -> bool {
    let hex_run = |s: &str, n: usize| s.len() == n && s.chars().all(|c| c.is_ascii_hexdigit());
    let parts: Vec<&str> = label.split('-').collect();
    match parts.as_slice() {
        [a, b, c, d, e] => hex_run(a, 8) && hex_run(b, 4) && hex_run(c, 4) && hex_run(d, 4) && hex_run(e, 12),
        [single] => hex_run(single, 32),
        _ => false,
    }
}
