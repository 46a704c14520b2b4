//! Shared fixtures for the command-line tests: a stub chat endpoint, a
//! synthetic dataset and a template file.

#![allow(dead_code)]

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread;

use secrev_core::SecurityType;
use serde_json::{json, Value};

pub const BIN: &str = env!("CARGO_BIN_EXE_secrev");

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn secrev(args: &[&str], envs: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("SECREV_API_KEY");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Serves chat completions with `respond(user_message) -> content` until
/// the process exits. Returns the base URL and a request counter.
pub fn serve<F>(respond: F) -> (String, Arc<AtomicUsize>)
where
    F: Fn(&str) -> String + Send + Sync + 'static,
{
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let hits = Arc::new(AtomicUsize::new(0));
    let counter = hits.clone();
    let respond = Arc::new(respond);
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { continue };
            let counter = counter.clone();
            let respond = respond.clone();
            thread::spawn(move || handle(stream, &*respond, &counter));
        }
    });
    (format!("http://{addr}/v1"), hits)
}

fn handle(mut stream: std::net::TcpStream, respond: &dyn Fn(&str) -> String, counter: &AtomicUsize) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut len = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap_or(0) == 0 || line == "\r\n" {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                len = v.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut buf = vec![0; len];
    reader.read_exact(&mut buf).ok();
    counter.fetch_add(1, Ordering::SeqCst);
    let body: Value = serde_json::from_slice(&buf).unwrap_or(Value::Null);
    let user = body["messages"].as_array().and_then(|m| m.last()).and_then(|m| m["content"].as_str()).unwrap_or("");
    let text = json!({"choices": [{"message": {"role": "assistant", "content": respond(user)}}]}).to_string();
    let _ = write!(
        stream,
        "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
        text.len()
    );
}

pub fn review_text(ty: SecurityType, detail: &str) -> String {
    format!(
        "Security Type: {}\nDescription: {detail} looks unsafe.\nImpact: {detail} can be abused.\nAdvice: Guard {detail} properly.",
        ty.display_name()
    )
}

fn fnv(s: &str) -> u64 {
    s.bytes().fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3))
}

/// Deterministic review model: the first stage picks a type from a hash of
/// the prompt, the second stage answers with the type it is told to use.
pub fn review_stub(user: &str) -> String {
    if user.contains("Reference review") {
        let ty = user
            .split("The security type is \"")
            .nth(1)
            .and_then(|rest| rest.split('"').next())
            .and_then(|name| name.parse::<SecurityType>().ok())
            .unwrap_or(SecurityType::NonIssue);
        return review_text(ty, "the refined change");
    }
    let ty = SecurityType::ALL[(fnv(user) % 8) as usize];
    if ty == SecurityType::NonIssue {
        return "Security Type: Non-Issue".into();
    }
    review_text(ty, "the change")
}

fn comment(ty: SecurityType, ident: &str) -> Value {
    if ty == SecurityType::NonIssue {
        return json!({"security_type": "Non-Issue", "description": "", "impact": "", "advice": ""});
    }
    json!({
        "security_type": ty.display_name(),
        "description": format!("The call to {ident} has a {} problem.", ty.display_name().to_lowercase()),
        "impact": format!("Attackers may exploit {ident}."),
        "advice": format!("Validate inputs before {ident} and handle errors."),
    })
}

/// Dataset entries `e000`.. with a structured comment each; indices 7, 15, ...
/// are Non-Issue.
pub fn dataset(n: usize) -> Vec<Value> {
    (0..n)
        .map(|i| {
            let ty = SecurityType::ALL[i % 8];
            let ident = format!("handler_{i}");
            let source = if ty == SecurityType::NonIssue { "non_issue" } else { "keyword" };
            json!({
                "id": format!("e{i:03}"),
                "lang": "py",
                "diff": format!("@@ -1,2 +1,3 @@\n def run():\n+    data = {ident}(request.args)\n+    return data"),
                "comment_raw": format!("check {ident}"),
                "security_type": ty.display_name(),
                "comment": comment(ty, &ident),
                "source": source,
            })
        })
        .collect()
}

/// Two templates per issue type.
pub fn templates() -> Vec<Value> {
    SecurityType::ISSUES
        .iter()
        .enumerate()
        .flat_map(|(t, ty)| {
            (0..2).map(move |k| {
                let ident = format!("tpl_{t}_{k}");
                json!({
                    "id": format!("t{t}{k}"),
                    "security_type": ty.display_name(),
                    "diff": format!("+    value = {ident}(buffer, size_{k})\n+    release(value)"),
                    "comment": comment(*ty, &ident),
                })
            })
        })
        .collect()
}

pub fn write_jsonl(path: &Path, records: &[Value]) -> PathBuf {
    let text: String = records.iter().map(|r| format!("{r}\n")).collect();
    std::fs::write(path, text).unwrap();
    path.to_path_buf()
}

/// Predictions for `dataset(n)`: the comment itself for most entries, a
/// wrong type for every fifth.
pub fn predictions(entries: &[Value]) -> Vec<Value> {
    entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let mut c = e["comment"].clone();
            if i % 5 == 0 {
                c = comment(SecurityType::Concurrency, "worker");
            }
            json!({"id": e["id"], "comment": c})
        })
        .collect()
}
