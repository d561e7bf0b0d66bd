//! Open-domain value generators: parsing, seeded sampling, and membership.

use std::collections::BTreeMap;

use crate::rng::Lcg;

/// Generator backing an open feasible domain. Membership is defined by the
/// value grammar, not by what the sampler happens to emit, so planner-chosen
/// values validate as long as they fit the domain's shape.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    /// Integers in `lo..=hi`, written in canonical decimal form.
    IntRange(i64, i64),
    /// One of a fixed list of alternatives.
    Choice(Vec<String>),
    /// `stem.ext` where the extension is one of the listed ones.
    Filename(Vec<String>),
    /// Single-line text with a character-count range.
    Text(usize, usize),
    /// A template over sub-generators, e.g. `"{a}-{b}"`.
    Composite {
        template: String,
        subs: BTreeMap<String, GeneratorSpec>,
    },
}

const SAMPLE_ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz";

impl GeneratorSpec {
    /// Check structural invariants; returns a reason string on failure.
    pub fn check(&self) -> Result<(), String> {
        match self {
            GeneratorSpec::IntRange(lo, hi) => {
                if lo > hi {
                    return Err(format!("int_range lo {lo} exceeds hi {hi}"));
                }
            }
            GeneratorSpec::Choice(values) => {
                if values.is_empty() {
                    return Err("choice has no alternatives".to_string());
                }
            }
            GeneratorSpec::Filename(exts) => {
                if exts.is_empty() {
                    return Err("filename has no extensions".to_string());
                }
            }
            GeneratorSpec::Text(lo, hi) => {
                if lo > hi {
                    return Err(format!("text lo {lo} exceeds hi {hi}"));
                }
            }
            GeneratorSpec::Composite { template, subs } => {
                let names = crate::skill::placeholders_in(template);
                if names.is_empty() {
                    return Err("composite template has no placeholders".to_string());
                }
                for name in &names {
                    if !subs.contains_key(name) {
                        return Err(format!("composite placeholder {{{name}}} has no sub-generator"));
                    }
                }
                for sub in subs.values() {
                    sub.check()?;
                }
            }
        }
        Ok(())
    }

    /// Draw one value using the given stream. Draw order is part of the
    /// stable contract; golden tests pin concrete outputs.
    pub fn sample(&self, rng: &mut Lcg) -> String {
        match self {
            GeneratorSpec::IntRange(lo, hi) => {
                let span = (*hi - *lo) as u64 + 1;
                let v = *lo + rng.next_range(span) as i64;
                v.to_string()
            }
            GeneratorSpec::Choice(values) => {
                values[rng.next_range(values.len() as u64) as usize].clone()
            }
            GeneratorSpec::Filename(exts) => {
                let stem = sample_word(rng, 3, 10);
                let ext = &exts[rng.next_range(exts.len() as u64) as usize];
                format!("{stem}.{ext}")
            }
            GeneratorSpec::Text(lo, hi) => {
                let lo = (*lo).max(1);
                let hi = (*hi).max(lo);
                sample_word(rng, lo, hi)
            }
            GeneratorSpec::Composite { template, subs } => {
                let mut values = BTreeMap::new();
                for name in crate::skill::placeholders_in(template) {
                    if !values.contains_key(&name) {
                        let v = subs[&name].sample(rng);
                        values.insert(name, v);
                    }
                }
                crate::skill::substitute_placeholders(template, &values)
                    .expect("composite placeholders all have sub-generators")
            }
        }
    }

    /// True when `value` matches this generator's value grammar.
    pub fn contains(&self, value: &str) -> bool {
        match self {
            GeneratorSpec::IntRange(lo, hi) => match value.parse::<i64>() {
                Ok(v) => v >= *lo && v <= *hi && v.to_string() == value,
                Err(_) => false,
            },
            GeneratorSpec::Choice(values) => values.iter().any(|v| v == value),
            GeneratorSpec::Filename(exts) => match value.rsplit_once('.') {
                Some((stem, ext)) => {
                    !stem.is_empty()
                        && !stem.contains(['/', '\n'])
                        && exts.iter().any(|e| e == ext)
                }
                None => false,
            },
            GeneratorSpec::Text(lo, hi) => {
                let n = value.chars().count();
                n >= *lo && n <= *hi && !value.contains('\n')
            }
            GeneratorSpec::Composite { template, subs } => {
                match_template(template, value, subs)
            }
        }
    }
}

fn sample_word(rng: &mut Lcg, lo: usize, hi: usize) -> String {
    let len = lo + rng.next_range((hi - lo) as u64 + 1) as usize;
    (0..len)
        .map(|_| SAMPLE_ALPHABET[rng.next_range(SAMPLE_ALPHABET.len() as u64) as usize] as char)
        .collect()
}

/// Backtracking match of `value` against `template`, requiring each captured
/// placeholder span to satisfy its sub-generator.
fn match_template(template: &str, value: &str, subs: &BTreeMap<String, GeneratorSpec>) -> bool {
    let tokens = template_tokens(template);
    match_tokens(&tokens, value, subs)
}

enum TemplateToken {
    Literal(String),
    Placeholder(String),
}

fn template_tokens(template: &str) -> Vec<TemplateToken> {
    let mut tokens = Vec::new();
    let mut literal = String::new();
    let bytes = template.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'{' if i + 1 < bytes.len() && bytes[i + 1] == b'{' => {
                literal.push('{');
                i += 2;
            }
            b'}' if i + 1 < bytes.len() && bytes[i + 1] == b'}' => {
                literal.push('}');
                i += 2;
            }
            b'{' => match template[i + 1..].find('}') {
                Some(end) => {
                    if !literal.is_empty() {
                        tokens.push(TemplateToken::Literal(std::mem::take(&mut literal)));
                    }
                    tokens.push(TemplateToken::Placeholder(
                        template[i + 1..i + 1 + end].to_string(),
                    ));
                    i += end + 2;
                }
                None => {
                    literal.push('{');
                    i += 1;
                }
            },
            c => {
                literal.push(c as char);
                i += 1;
            }
        }
    }
    if !literal.is_empty() {
        tokens.push(TemplateToken::Literal(literal));
    }
    tokens
}

fn match_tokens(tokens: &[TemplateToken], value: &str, subs: &BTreeMap<String, GeneratorSpec>) -> bool {
    match tokens.first() {
        None => value.is_empty(),
        Some(TemplateToken::Literal(lit)) => match value.strip_prefix(lit.as_str()) {
            Some(rest) => match_tokens(&tokens[1..], rest, subs),
            None => false,
        },
        Some(TemplateToken::Placeholder(name)) => {
            let Some(sub) = subs.get(name) else {
                return false;
            };
            // Try every split point; char boundaries only.
            let mut cut_points: Vec<usize> =
                value.char_indices().map(|(i, _)| i).collect();
            cut_points.push(value.len());
            for cut in cut_points {
                if sub.contains(&value[..cut]) && match_tokens(&tokens[1..], &value[cut..], subs) {
                    return true;
                }
            }
            false
        }
    }
}

// --- grammar -----------------------------------------------------------

/// Parse the generator grammar used in skill files, e.g. `int_range(1,999)`,
/// `choice(a|b|c)`, `filename(xlsx,txt)`, `text(1,64)`,
/// `composite("{a}-{b}", a=int_range(0,9), b=text(1,4))`.
pub fn parse_generator(s: &str) -> Result<GeneratorSpec, String> {
    let s = s.trim();
    let open = s
        .find('(')
        .ok_or_else(|| format!("generator `{s}` is missing its parameter list"))?;
    if !s.ends_with(')') {
        return Err(format!("generator `{s}` is missing a closing parenthesis"));
    }
    let kind = &s[..open];
    let body = &s[open + 1..s.len() - 1];
    let gen = match kind {
        "int_range" => {
            let (lo, hi) = parse_two_ints(body)?;
            GeneratorSpec::IntRange(lo, hi)
        }
        "choice" => {
            let values: Vec<String> = body.split('|').map(|v| v.trim().to_string()).collect();
            if values.iter().any(|v| v.is_empty()) {
                return Err("choice alternatives must be nonempty".to_string());
            }
            GeneratorSpec::Choice(values)
        }
        "filename" => {
            let exts: Vec<String> = body.split(',').map(|v| v.trim().to_string()).collect();
            if exts.iter().any(|v| v.is_empty()) {
                return Err("filename extensions must be nonempty".to_string());
            }
            GeneratorSpec::Filename(exts)
        }
        "text" => {
            let (lo, hi) = parse_two_ints(body)?;
            if lo < 0 {
                return Err("text lengths must be nonnegative".to_string());
            }
            GeneratorSpec::Text(lo as usize, hi as usize)
        }
        "composite" => parse_composite(body)?,
        other => return Err(format!("unknown generator kind `{other}`")),
    };
    gen.check()?;
    Ok(gen)
}

fn parse_two_ints(body: &str) -> Result<(i64, i64), String> {
    let (a, b) = body
        .split_once(',')
        .ok_or_else(|| format!("expected two comma-separated integers, got `{body}`"))?;
    let lo = a
        .trim()
        .parse::<i64>()
        .map_err(|_| format!("`{}` is not an integer", a.trim()))?;
    let hi = b
        .trim()
        .parse::<i64>()
        .map_err(|_| format!("`{}` is not an integer", b.trim()))?;
    Ok((lo, hi))
}

fn parse_composite(body: &str) -> Result<GeneratorSpec, String> {
    let parts = split_top_level(body);
    let mut parts = parts.into_iter();
    let template_part = parts
        .next()
        .ok_or_else(|| "composite needs a template".to_string())?;
    let template_part = template_part.trim();
    if !(template_part.starts_with('"') && template_part.ends_with('"') && template_part.len() >= 2)
    {
        return Err("composite template must be double-quoted".to_string());
    }
    let template = unescape_quoted(&template_part[1..template_part.len() - 1])?;
    let mut subs = BTreeMap::new();
    for part in parts {
        let part = part.trim();
        let (name, spec) = part
            .split_once('=')
            .ok_or_else(|| format!("composite sub `{part}` is not name=generator"))?;
        let name = name.trim().to_string();
        if subs.contains_key(&name) {
            return Err(format!("composite sub `{name}` declared twice"));
        }
        subs.insert(name, parse_generator(spec.trim())?);
    }
    Ok(GeneratorSpec::Composite { template, subs })
}

/// Split on commas that sit outside parentheses and double quotes.
fn split_top_level(s: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut in_quotes = false;
    let mut current = String::new();
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '\\' if in_quotes => {
                current.push(c);
                if let Some(next) = chars.next() {
                    current.push(next);
                }
            }
            '"' => {
                in_quotes = !in_quotes;
                current.push(c);
            }
            '(' if !in_quotes => {
                depth += 1;
                current.push(c);
            }
            ')' if !in_quotes => {
                depth = depth.saturating_sub(1);
                current.push(c);
            }
            ',' if !in_quotes && depth == 0 => {
                parts.push(std::mem::take(&mut current));
            }
            _ => current.push(c),
        }
    }
    if !current.is_empty() {
        parts.push(current);
    }
    parts
}

fn unescape_quoted(s: &str) -> Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some('"') => out.push('"'),
                Some('\\') => out.push('\\'),
                Some('n') => out.push('\n'),
                Some(other) => return Err(format!("unknown escape `\\{other}`")),
                None => return Err("dangling escape at end of string".to_string()),
            }
        } else {
            out.push(c);
        }
    }
    Ok(out)
}

/// Render a generator back into its grammar form.
pub fn serialize_generator(gen: &GeneratorSpec) -> String {
    match gen {
        GeneratorSpec::IntRange(lo, hi) => format!("int_range({lo},{hi})"),
        GeneratorSpec::Choice(values) => format!("choice({})", values.join("|")),
        GeneratorSpec::Filename(exts) => format!("filename({})", exts.join(",")),
        GeneratorSpec::Text(lo, hi) => format!("text({lo},{hi})"),
        GeneratorSpec::Composite { template, subs } => {
            let mut out = format!("composite(\"{}\"", escape_quoted(template));
            for (name, sub) in subs {
                out.push_str(", ");
                out.push_str(name);
                out.push('=');
                out.push_str(&serialize_generator(sub));
            }
            out.push(')');
            out
        }
    }
}

pub(crate) fn escape_quoted(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(src: &str) -> GeneratorSpec {
        let gen = parse_generator(src).unwrap();
        let emitted = serialize_generator(&gen);
        assert_eq!(parse_generator(&emitted).unwrap(), gen);
        gen
    }

    #[test]
    fn parses_every_kind() {
        assert_eq!(roundtrip("int_range(1,999)"), GeneratorSpec::IntRange(1, 999));
        assert_eq!(
            roundtrip("choice(a|b|c)"),
            GeneratorSpec::Choice(vec!["a".into(), "b".into(), "c".into()])
        );
        assert_eq!(
            roundtrip("filename(xlsx,txt)"),
            GeneratorSpec::Filename(vec!["xlsx".into(), "txt".into()])
        );
        assert_eq!(roundtrip("text(1,64)"), GeneratorSpec::Text(1, 64));
        let composite = roundtrip("composite(\"{a}-{b}\", a=int_range(0,9), b=text(1,4))");
        match composite {
            GeneratorSpec::Composite { template, subs } => {
                assert_eq!(template, "{a}-{b}");
                assert_eq!(subs.len(), 2);
                assert_eq!(subs["a"], GeneratorSpec::IntRange(0, 9));
            }
            other => panic!("expected composite, got {other:?}"),
        }
    }

    #[test]
    fn rejects_malformed_specs() {
        assert!(parse_generator("int_range(9,1)").is_err());
        assert!(parse_generator("choice()").is_err());
        assert!(parse_generator("int_range(1)").is_err());
        assert!(parse_generator("mystery(1,2)").is_err());
        assert!(parse_generator("composite(\"no placeholders\")").is_err());
        assert!(parse_generator("composite(\"{a}\", b=text(1,2))").is_err());
    }

    #[test]
    fn membership_follows_value_grammar() {
        let range = GeneratorSpec::IntRange(1, 999);
        assert!(range.contains("398"));
        assert!(range.contains("1"));
        assert!(!range.contains("0"));
        assert!(!range.contains("007"));
        assert!(!range.contains("12.5"));

        let file = GeneratorSpec::Filename(vec!["txt".into(), "md".into()]);
        assert!(file.contains("notes.txt"));
        assert!(file.contains("a.b.md"));
        assert!(!file.contains("notes.pdf"));
        assert!(!file.contains(".txt"));

        let text = GeneratorSpec::Text(3, 24);
        assert!(text.contains("company analysis"));
        assert!(!text.contains("ab"));
        assert!(!text.contains("line\nbreak"));
    }

    #[test]
    fn composite_membership_backtracks() {
        let gen = parse_generator("composite(\"{a}-{b}\", a=int_range(0,9), b=text(1,4))").unwrap();
        assert!(gen.contains("7-abc"));
        assert!(!gen.contains("77-abc"));
        assert!(!gen.contains("7_abc"));
        // Dashes inside the text span force the matcher to try later splits.
        let tricky = parse_generator("composite(\"{a}-{b}\", a=text(1,4), b=int_range(0,9))").unwrap();
        assert!(tricky.contains("x-y--3"));
        assert!(!tricky.contains("abcde-3"));
        assert!(tricky.contains("ab-3"));
    }

    #[test]
    fn sampled_values_lie_in_domain() {
        use crate::rng::Lcg;
        let gens = [
            parse_generator("int_range(1,999)").unwrap(),
            parse_generator("choice(a|b|c)").unwrap(),
            parse_generator("filename(txt,md)").unwrap(),
            parse_generator("text(3,12)").unwrap(),
            parse_generator("composite(\"{a}-{b}\", a=int_range(0,9), b=text(1,4))").unwrap(),
        ];
        let mut rng = Lcg::new(99);
        for gen in &gens {
            for _ in 0..200 {
                let v = gen.sample(&mut rng);
                assert!(gen.contains(&v), "{gen:?} produced out-of-domain `{v}`");
            }
        }
    }

    #[test]
    fn singleton_choice_is_constant() {
        let gen = GeneratorSpec::Choice(vec!["a".to_string()]);
        let mut rng = Lcg::new(4242);
        assert_eq!(gen.sample(&mut rng), "a");
        assert_eq!(gen.sample(&mut rng), "a");
    }
}
