//! Shared tokenizer for both retrieval channels: lowercase, split on
//! non-alphanumerics, split camel-case words, split letter/digit boundaries.
//! `EdgeOpenHomePage` therefore matches the query "open home page".

/// Tokenize `text` into lowercase word tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut run = String::new();
    for c in text.chars() {
        if c.is_ascii_alphanumeric() {
            run.push(c);
        } else if !run.is_empty() {
            split_camel_into(&run, &mut tokens);
            run.clear();
        }
    }
    if !run.is_empty() {
        split_camel_into(&run, &mut tokens);
    }
    tokens
}

/// Split one alphanumeric run at case and letter/digit boundaries, pushing
/// lowercased subtokens. `HTTPServer2` becomes [http, server, 2].
fn split_camel_into(run: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = run.chars().collect();
    let mut start = 0;
    for i in 1..chars.len() {
        let prev = chars[i - 1];
        let cur = chars[i];
        let boundary = ((prev.is_ascii_lowercase() || prev.is_ascii_digit())
            && cur.is_ascii_uppercase())
            || (prev.is_ascii_uppercase()
                && cur.is_ascii_uppercase()
                && chars.get(i + 1).is_some_and(|n| n.is_ascii_lowercase()))
            || (prev.is_ascii_alphabetic() && cur.is_ascii_digit())
            || (prev.is_ascii_digit() && cur.is_ascii_alphabetic());
        if boundary {
            out.push(chars[start..i].iter().collect::<String>().to_ascii_lowercase());
            start = i;
        }
    }
    out.push(chars[start..].iter().collect::<String>().to_ascii_lowercase());
}
