use std::fmt::Display;

/// One report: a single `key=value` line, or aligned `key: value` lines in
/// human mode.
#[derive(Debug, Default)]
pub struct Record {
    fields: Vec<(String, String)>,
}

impl Record {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl Display) -> Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    pub fn render(&self, human: bool) -> String {
        if human {
            let width = self.fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            let lines: Vec<String> = self.fields.iter().map(|(k, v)| format!("{k:>width$}: {v}")).collect();
            return lines.join("\n");
        }
        let parts: Vec<String> = self.fields.iter().map(|(k, v)| format!("{k}={}", quote(v))).collect();
        parts.join(" ")
    }
}

/// Quotes values that would break `key=value` splitting.
fn quote(v: &str) -> String {
    if !v.is_empty() && !v.contains(|c: char| c.is_whitespace() || c == '"' || c == '=') {
        return v.to_string();
    }
    format!("\"{}\"", v.replace('\\', "\\\\").replace('"', "\\\""))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_values_stay_bare() {
        let r = Record::new().with("outcome", "value").with("value", 3);
        assert_eq!(r.render(false), "outcome=value value=3");
    }

    #[test]
    fn spaces_and_quotes_are_escaped() {
        let r = Record::new().with("detail", "row 3 said \"7\"");
        assert_eq!(r.render(false), r#"detail="row 3 said \"7\"""#);
    }

    #[test]
    fn human_mode_aligns_keys() {
        let r = Record::new().with("m", 4).with("hcost", 10);
        assert_eq!(r.render(true), "    m: 4\nhcost: 10");
    }
}
