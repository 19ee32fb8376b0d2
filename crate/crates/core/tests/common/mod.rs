#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::{json, Value as JsonValue};
use taskgrader::config::{parse_task_config, TaskConfig};
use taskgrader::grading::{Engine, GradeReport, Submission};
use taskgrader::sandbox::Sandbox;
use taskgrader::taskstore::TaskStore;
use taskgrader::Value;

pub const CORPUS: &[&str] = &["sub", "answer", "mean", "shout", "is_even", "repeat"];

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn task_config_text(name: &str) -> String {
    std::fs::read_to_string(fixtures().join("tasks").join(format!("{name}.json"))).unwrap()
}

pub fn task_config(name: &str) -> TaskConfig {
    parse_task_config(&task_config_text(name)).unwrap()
}

pub fn golden(name: &str) -> String {
    std::fs::read_to_string(fixtures().join("golden").join(name)).unwrap()
}

pub fn engine(dir: &Path) -> Engine {
    Engine::new(TaskStore::new(dir.join("tasks")), Sandbox::new(dir.join("scratch")))
}

/// Engine with the named corpus tasks created under their own names.
pub fn engine_with(dir: &Path, tasks: &[&str]) -> Engine {
    let e = engine(dir);
    for t in tasks {
        e.create_task("unit-testing", "python", &task_config(t), Some(t)).unwrap();
    }
    e
}

pub fn submission(id: &str, body: &str) -> Submission {
    Submission::new(id, BTreeMap::from([("f1".to_string(), body.to_string())]))
}

pub fn grade(e: &Engine, task: &str, body: &str, seed: Option<u64>) -> GradeReport {
    let pkg = e.store.load_task(task).unwrap();
    e.run_pipeline(&pkg, &submission("s001", body), seed)
}

pub fn value_json(v: &Value) -> JsonValue {
    match v {
        Value::Int(i) => json!(i),
        Value::Float(f) => json!(f),
        Value::Bool(b) => json!(b),
        Value::Str(s) => json!(s),
    }
}

/// Call `def <name>(<params>): <body>` directly in a fresh interpreter, once
/// per row, outside the engine. Results: ints/bools/strs in engine notation,
/// `exception: <Type>` for raised errors.
pub fn python_call(name: &str, params: &[&str], body: &str, rows: &[Vec<Value>]) -> Vec<String> {
    let indented: String = body.lines().map(|l| format!("    {l}\n")).collect();
    let source = format!("def {name}({}):\n{indented}", params.join(", "));
    let rows: Vec<JsonValue> = rows.iter().map(|r| JsonValue::Array(r.iter().map(value_json).collect())).collect();
    let script = r#"
import json, sys
src, name, rows = json.loads(sys.stdin.read())
ns = {}
exec(src, ns)
out = []
for r in rows:
    try:
        v = ns[name](*r)
    except Exception as e:
        out.append("exception: " + type(e).__name__)
        continue
    if isinstance(v, bool):
        out.append("true" if v else "false")
    elif isinstance(v, str):
        out.append(json.dumps(v, ensure_ascii=False))
    else:
        out.append(str(v))
print(json.dumps(out))
"#;
    let mut child = Command::new("python3")
        .args(["-I", "-c", script])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    {
        use std::io::Write;
        let payload = json!([source, name, rows]).to_string();
        child.stdin.take().unwrap().write_all(payload.as_bytes()).unwrap();
    }
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    serde_json::from_slice(&out.stdout).unwrap()
}
