//! Machine-readable JSON reports with stable key order and deterministic
//! float formatting; the human-readable table is a formatting layer on top.

use crate::reduction::CheckResult;

/// Minimal JSON value with insertion-ordered objects.
#[derive(Debug, Clone)]
pub enum Json {
    Null,
    Bool(bool),
    Num(f64),
    Int(i64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn obj() -> Json {
        Json::Obj(Vec::new())
    }

    pub fn push(&mut self, key: &str, value: Json) {
        if let Json::Obj(entries) = self {
            entries.push((key.to_string(), value));
        } else {
            panic!("push on a non-object Json value");
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(v) => out.push_str(&v.to_string()),
            Json::Num(v) => out.push_str(&format_f64(*v)),
            Json::Str(s) => {
                out.push('"');
                for c in s.chars() {
                    match c {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        '\t' => out.push_str("\\t"),
                        c if (c as u32) < 0x20 => {
                            out.push_str(&format!("\\u{:04x}", c as u32))
                        }
                        c => out.push(c),
                    }
                }
                out.push('"');
            }
            Json::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    item.write(out, indent);
                }
                out.push(']');
            }
            Json::Obj(entries) => {
                if entries.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push_str("{\n");
                let pad = "  ".repeat(indent + 1);
                for (i, (k, v)) in entries.iter().enumerate() {
                    out.push_str(&pad);
                    out.push('"');
                    out.push_str(k);
                    out.push_str("\": ");
                    v.write(out, indent + 1);
                    if i + 1 < entries.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                out.push_str(&"  ".repeat(indent));
                out.push('}');
            }
        }
    }
}

/// Deterministic shortest round-trip formatting; non-finite values are
/// rendered as strings since JSON has no literal for them.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        return "\"NaN\"".into();
    }
    if v.is_infinite() {
        return if v > 0.0 {
            "\"inf\"".into()
        } else {
            "\"-inf\"".into()
        };
    }
    let mut s = format!("{v}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") {
        s.push_str(".0");
    }
    s
}

pub fn check_to_json(c: &CheckResult) -> Json {
    let mut o = Json::obj();
    o.push("name", Json::Str(c.name.clone()));
    o.push("max_residual", Json::Num(c.max_residual));
    o.push("tolerance", Json::Num(c.tolerance));
    o.push("pass", Json::Bool(c.pass));
    o.push("detail", Json::Str(c.detail.clone()));
    if !c.offending.is_empty() {
        o.push(
            "offending_points",
            Json::Arr(
                c.offending
                    .iter()
                    .map(|p| Json::Arr(p.iter().map(|v| Json::Num(*v)).collect()))
                    .collect(),
            ),
        );
    }
    o
}

pub fn vec_to_json(v: &[f64]) -> Json {
    Json::Arr(v.iter().map(|x| Json::Num(*x)).collect())
}

/// One pass/fail line per check, for terminal output.
pub fn render_table(checks: &[CheckResult]) -> String {
    let mut out = String::new();
    for c in checks {
        out.push_str(&format!(
            "{:<26} {}  max residual {:.3e} (tol {:.1e})\n",
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.max_residual,
            c.tolerance
        ));
    }
    out
}
