//! Deterministic JSON emission: insertion-ordered objects, floats with 17
//! significant digits, non-finite values nulled and recorded as errors.

/// JSON value tree with stable field order.
#[derive(Debug, Clone)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Array(Vec<Json>),
    Object(Vec<(String, Json)>),
}

impl Json {
    pub fn object() -> Json {
        Json::Object(Vec::new())
    }

    pub fn push(&mut self, key: &str, value: Json) -> &mut Self {
        if let Json::Object(fields) = self {
            fields.push((key.to_string(), value));
        } else {
            panic!("push on non-object");
        }
        self
    }

    pub fn float_opt(v: Option<f64>) -> Json {
        match v {
            Some(x) => Json::Float(x),
            None => Json::Null,
        }
    }

    /// Replace every non-finite float with null, reporting the JSON paths.
    pub fn sanitize(&mut self, path: &str, flagged: &mut Vec<String>) {
        match self {
            Json::Float(x) if !x.is_finite() => {
                flagged.push(format!("non-finite value at {path}"));
                *self = Json::Null;
            }
            Json::Array(items) => {
                for (i, item) in items.iter_mut().enumerate() {
                    item.sanitize(&format!("{path}[{i}]"), flagged);
                }
            }
            Json::Object(fields) => {
                for (k, v) in fields.iter_mut() {
                    v.sanitize(&format!("{path}.{k}"), flagged);
                }
            }
            _ => {}
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String, depth: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Int(i) => out.push_str(&i.to_string()),
            Json::Float(x) => out.push_str(&format_float(*x)),
            Json::Str(s) => write_escaped(out, s),
            Json::Array(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    out.push_str(&"  ".repeat(depth + 1));
                    item.write(out, depth + 1);
                }
                out.push('\n');
                out.push_str(&"  ".repeat(depth));
                out.push(']');
            }
            Json::Object(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    out.push('\n');
                    out.push_str(&"  ".repeat(depth + 1));
                    write_escaped(out, k);
                    out.push_str(": ");
                    v.write(out, depth + 1);
                }
                out.push('\n');
                out.push_str(&"  ".repeat(depth));
                out.push('}');
            }
        }
    }
}

/// 17 significant digits; exact f64 round-trip.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    format!("{x:.16e}")
}

fn write_escaped(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
}

pub fn vec3_json(v: &nalgebra::Vector3<f64>) -> Json {
    Json::Array(vec![Json::Float(v.x), Json::Float(v.y), Json::Float(v.z)])
}
