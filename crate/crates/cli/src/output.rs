use serde_json::Value;

/// Pretty JSON document with a trailing newline.
pub fn json_doc(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    text
}

/// CSV document: a `# config` comment line, the header, then one line per row.
pub fn csv_doc(config: &Value, header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut text = format!("# config {config}\n{header}\n");
    for row in rows {
        text.push_str(&row);
        text.push('\n');
    }
    text
}
