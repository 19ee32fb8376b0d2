//! Task configuration: the instructor's single JSON document made of a
//! function specification, a test plan and a reference solution.
//!
//! ```json
//! {
//!   "spec": {"name": "sub", "args": [{"name": "a", "type": "int"}, {"name": "b", "type": "int"}], "return": "int"},
//!   "test": {
//!     "predefined": [{"data": "(10, 5)", "feedback": {"10": "Have you subtracted the 2nd parameter?"}}],
//!     "random": {"n": 10, "args": ["int(-20,20)", "int(-20,20)"]}
//!   },
//!   "solution": {"f1": "return a - b"}
//! }
//! ```
//!
//! Parsing walks the raw JSON so that every [`SchemaError`] carries the path
//! of the offending node (`test.predefined[0].data`).

pub mod dsl;
pub mod tuple;

use std::collections::BTreeMap;
use std::fmt;

use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use crate::value::{parse_value, SemType, Value};

pub use dsl::{parse_generator_expr, DslError, GeneratorExpr};
pub use tuple::{parse_args_tuple, render_args_tuple, TupleError};

/// Name of the single code field of unit-testing tasks.
pub const BODY_FIELD: &str = "f1";

/// Feedback key matching any wrong answer.
pub const WILDCARD_KEY: &str = "**";

/// Largest accepted `random.n`.
pub const MAX_RANDOM_TESTS: u64 = 100_000;

const PYTHON_KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class",
    "continue", "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if",
    "import", "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try",
    "while", "with", "yield",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl SchemaError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        SchemaError {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskConfig {
    pub spec: FunctionSpec,
    pub test: TestPlan,
    pub solution: Solution,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionSpec {
    pub name: String,
    pub args: Vec<ArgSpec>,
    pub return_type: SemType,
}

impl FunctionSpec {
    pub fn arg_types(&self) -> Vec<SemType> {
        self.args.iter().map(|a| a.ty).collect()
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self
            .args
            .iter()
            .map(|a| format!("{}: {}", a.name, a.ty))
            .collect();
        write!(f, "{}({}) -> {}", self.name, args.join(", "), self.return_type)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArgSpec {
    pub name: String,
    pub ty: SemType,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TestPlan {
    pub predefined: Vec<PredefinedTest>,
    pub random: Option<RandomSpec>,
    /// Compare float answers exactly instead of with a relative tolerance.
    pub strict_float: bool,
}

impl TestPlan {
    pub fn total_tests(&self) -> usize {
        self.predefined.len() + self.random.as_ref().map_or(0, |r| r.n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredefinedTest {
    /// Tuple text exactly as written by the instructor.
    pub data: String,
    /// `data` parsed against the argument types.
    pub args: Vec<Value>,
    /// Answer key (canonical text or `**`) to hint message.
    pub feedback: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomSpec {
    pub n: usize,
    pub args: Vec<GeneratorExpr>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub fields: BTreeMap<String, String>,
}

/// Parse and validate a complete task configuration document.
pub fn parse_task_config(raw: &str) -> Result<TaskConfig, SchemaError> {
    let doc: Json =
        serde_json::from_str(raw).map_err(|e| SchemaError::new("$", format!("invalid JSON: {e}")))?;
    TaskConfig::from_json(&doc)
}

impl TaskConfig {
    pub fn from_json(doc: &Json) -> Result<TaskConfig, SchemaError> {
        let obj = as_object(doc, "$")?;
        check_keys(obj, "", &["spec", "test", "solution"])?;
        let spec = FunctionSpec::from_json(require(obj, "", "spec")?, "spec")?;
        let test = TestPlan::from_json(require(obj, "", "test")?, &spec, "test")?;
        let solution = Solution::from_json(require(obj, "", "solution")?, "solution")?;
        Ok(TaskConfig {
            spec,
            test,
            solution,
        })
    }

    /// The document in the same shape it was read from.
    pub fn to_json(&self) -> Json {
        json!({
            "spec": self.spec.to_json(),
            "test": self.test.to_json(),
            "solution": self.solution.to_json(),
        })
    }
}

impl FunctionSpec {
    pub fn from_json(v: &Json, path: &str) -> Result<FunctionSpec, SchemaError> {
        let obj = as_object(v, path)?;
        check_keys(obj, path, &["name", "args", "return"])?;
        let name_path = join(path, "name");
        let name = as_str(require(obj, path, "name")?, &name_path)?;
        check_identifier(name, &name_path)?;

        let args_path = join(path, "args");
        let raw_args = as_array(require(obj, path, "args")?, &args_path)?;
        let mut args: Vec<ArgSpec> = Vec::with_capacity(raw_args.len());
        for (i, a) in raw_args.iter().enumerate() {
            let p = format!("{args_path}[{i}]");
            let o = as_object(a, &p)?;
            check_keys(o, &p, &["name", "type"])?;
            let np = join(&p, "name");
            let arg_name = as_str(require(o, &p, "name")?, &np)?;
            check_identifier(arg_name, &np)?;
            if args.iter().any(|prev| prev.name == arg_name) {
                return Err(SchemaError::new(np, format!("duplicate argument name `{arg_name}`")));
            }
            let tp = join(&p, "type");
            let ty = parse_type(require(o, &p, "type")?, &tp)?;
            args.push(ArgSpec {
                name: arg_name.to_string(),
                ty,
            });
        }

        let rp = join(path, "return");
        let return_type = parse_type(require(obj, path, "return")?, &rp)?;
        Ok(FunctionSpec {
            name: name.to_string(),
            args,
            return_type,
        })
    }

    pub fn to_json(&self) -> Json {
        let args: Vec<Json> = self
            .args
            .iter()
            .map(|a| json!({"name": a.name, "type": a.ty.as_str()}))
            .collect();
        json!({"name": self.name, "args": args, "return": self.return_type.as_str()})
    }
}

impl TestPlan {
    pub fn from_json(v: &Json, spec: &FunctionSpec, path: &str) -> Result<TestPlan, SchemaError> {
        let obj = as_object(v, path)?;
        check_keys(obj, path, &["predefined", "random", "strict_float"])?;
        let types = spec.arg_types();

        let mut predefined = Vec::new();
        if let Some(raw) = obj.get("predefined") {
            let pp = join(path, "predefined");
            for (i, item) in as_array(raw, &pp)?.iter().enumerate() {
                predefined.push(PredefinedTest::from_json(
                    item,
                    &types,
                    spec.return_type,
                    &format!("{pp}[{i}]"),
                )?);
            }
        }

        let random = match obj.get("random") {
            None | Some(Json::Null) => None,
            Some(r) => Some(RandomSpec::from_json(r, &types, &join(path, "random"))?),
        };

        let strict_float = match obj.get("strict_float") {
            None => false,
            Some(Json::Bool(b)) => *b,
            Some(_) => {
                return Err(SchemaError::new(
                    join(path, "strict_float"),
                    "expected a boolean",
                ))
            }
        };

        let plan = TestPlan {
            predefined,
            random,
            strict_float,
        };
        if plan.total_tests() == 0 {
            return Err(SchemaError::new(
                path,
                "the test plan is empty: add a predefined test or set random.n >= 1",
            ));
        }
        Ok(plan)
    }

    pub fn to_json(&self) -> Json {
        let mut out = Map::new();
        out.insert(
            "predefined".into(),
            Json::Array(self.predefined.iter().map(PredefinedTest::to_json).collect()),
        );
        if let Some(r) = &self.random {
            out.insert("random".into(), r.to_json());
        }
        if self.strict_float {
            out.insert("strict_float".into(), Json::Bool(true));
        }
        Json::Object(out)
    }
}

impl PredefinedTest {
    fn from_json(
        v: &Json,
        types: &[SemType],
        return_type: SemType,
        path: &str,
    ) -> Result<PredefinedTest, SchemaError> {
        let obj = as_object(v, path)?;
        check_keys(obj, path, &["data", "feedback"])?;
        let dp = join(path, "data");
        let data = as_str(require(obj, path, "data")?, &dp)?;
        let args = parse_args_tuple(data, types).map_err(|e| SchemaError::new(&dp, e.to_string()))?;

        let mut feedback = BTreeMap::new();
        if let Some(raw) = obj.get("feedback") {
            let fp = join(path, "feedback");
            for (key, msg) in as_object(raw, &fp)? {
                let kp = format!("{fp}[{key:?}]");
                if key != WILDCARD_KEY {
                    parse_value(key, return_type).map_err(|e| {
                        SchemaError::new(&kp, format!("feedback key is neither `**` nor a valid answer: {e}"))
                    })?;
                }
                let msg = as_str(msg, &kp)?;
                feedback.insert(key.clone(), msg.to_string());
            }
        }

        Ok(PredefinedTest {
            data: data.to_string(),
            args,
            feedback,
        })
    }

    fn to_json(&self) -> Json {
        let mut out = Map::new();
        out.insert("data".into(), Json::String(self.data.clone()));
        if !self.feedback.is_empty() {
            out.insert(
                "feedback".into(),
                Json::Object(
                    self.feedback
                        .iter()
                        .map(|(k, v)| (k.clone(), Json::String(v.clone())))
                        .collect(),
                ),
            );
        }
        Json::Object(out)
    }
}

impl RandomSpec {
    fn from_json(v: &Json, types: &[SemType], path: &str) -> Result<RandomSpec, SchemaError> {
        let obj = as_object(v, path)?;
        check_keys(obj, path, &["n", "args", "seed"])?;
        let np = join(path, "n");
        let n = require(obj, path, "n")?
            .as_u64()
            .ok_or_else(|| SchemaError::new(&np, "expected a non-negative integer"))?;
        if n > MAX_RANDOM_TESTS {
            return Err(SchemaError::new(
                np,
                format!("at most {MAX_RANDOM_TESTS} random tests are allowed"),
            ));
        }

        let ap = join(path, "args");
        let raw = as_array(require(obj, path, "args")?, &ap)?;
        if raw.len() != types.len() {
            return Err(SchemaError::new(
                ap,
                format!(
                    "expected {} generator(s), one per argument, found {}",
                    types.len(),
                    raw.len()
                ),
            ));
        }
        let mut args = Vec::with_capacity(raw.len());
        for (i, (g, ty)) in raw.iter().zip(types).enumerate() {
            let gp = format!("{ap}[{i}]");
            let text = as_str(g, &gp)?;
            args.push(parse_generator_expr(text, *ty).map_err(|e| SchemaError::new(&gp, e.to_string()))?);
        }

        let seed = match obj.get("seed") {
            None | Some(Json::Null) => None,
            Some(s) => Some(
                s.as_u64()
                    .ok_or_else(|| SchemaError::new(join(path, "seed"), "expected an unsigned 64-bit integer"))?,
            ),
        };

        Ok(RandomSpec {
            n: n as usize,
            args,
            seed,
        })
    }

    fn to_json(&self) -> Json {
        let mut out = Map::new();
        out.insert("n".into(), Json::from(self.n));
        out.insert(
            "args".into(),
            Json::Array(self.args.iter().map(|g| Json::String(g.to_string())).collect()),
        );
        if let Some(seed) = self.seed {
            out.insert("seed".into(), Json::from(seed));
        }
        Json::Object(out)
    }
}

impl Solution {
    pub fn from_json(v: &Json, path: &str) -> Result<Solution, SchemaError> {
        let obj = as_object(v, path)?;
        let mut fields = BTreeMap::new();
        for (key, code) in obj {
            let kp = join(path, key);
            if key != BODY_FIELD {
                return Err(SchemaError::new(
                    kp,
                    format!("unknown solution field `{key}` (unit-testing tasks have a single field `{BODY_FIELD}`)"),
                ));
            }
            fields.insert(key.clone(), as_str(code, &kp)?.to_string());
        }
        match fields.get(BODY_FIELD) {
            None => Err(SchemaError::new(
                path,
                format!("missing solution field `{BODY_FIELD}`"),
            )),
            Some(code) if code.trim().is_empty() => Err(SchemaError::new(
                join(path, BODY_FIELD),
                "the solution must not be empty",
            )),
            Some(_) => Ok(Solution { fields }),
        }
    }

    pub fn to_json(&self) -> Json {
        Json::Object(
            self.fields
                .iter()
                .map(|(k, v)| (k.clone(), Json::String(v.clone())))
                .collect(),
        )
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn as_object<'a>(v: &'a Json, path: &str) -> Result<&'a Map<String, Json>, SchemaError> {
    v.as_object()
        .ok_or_else(|| SchemaError::new(path, "expected an object"))
}

fn as_array<'a>(v: &'a Json, path: &str) -> Result<&'a Vec<Json>, SchemaError> {
    v.as_array()
        .ok_or_else(|| SchemaError::new(path, "expected an array"))
}

fn as_str<'a>(v: &'a Json, path: &str) -> Result<&'a str, SchemaError> {
    v.as_str()
        .ok_or_else(|| SchemaError::new(path, "expected a string"))
}

fn require<'a>(obj: &'a Map<String, Json>, path: &str, key: &str) -> Result<&'a Json, SchemaError> {
    obj.get(key)
        .ok_or_else(|| SchemaError::new(join(path, key), "missing"))
}

fn check_keys(obj: &Map<String, Json>, path: &str, allowed: &[&str]) -> Result<(), SchemaError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(SchemaError::new(join(path, k), "unknown key")),
        None => Ok(()),
    }
}

fn parse_type(v: &Json, path: &str) -> Result<SemType, SchemaError> {
    as_str(v, path)?
        .parse::<SemType>()
        .map_err(|e| SchemaError::new(path, e.to_string()))
}

fn check_identifier(name: &str, path: &str) -> Result<(), SchemaError> {
    let mut chars = name.chars();
    let valid = chars
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !valid {
        return Err(SchemaError::new(
            path,
            format!("`{name}` is not a valid identifier"),
        ));
    }
    if PYTHON_KEYWORDS.contains(&name) {
        return Err(SchemaError::new(
            path,
            format!("`{name}` is a reserved word in a target language"),
        ));
    }
    Ok(())
}
