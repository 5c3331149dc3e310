//! Local stand-ins for the World Bank API and a chat endpoint, and a
//! runner for the `metaqa` binary.
#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};
use std::sync::{Arc, Mutex};
use std::thread;

use metaqa_core::fixtures::wb_api_response;
use metaqa_core::harness::{response_body, ChatProvider, Message, OracleProvider};
use metaqa_core::templates::QuestionInstance;
use metaqa_core::wb_data::DataContext;
use serde_json::Value;

fn spawn(handle: impl Fn(&str, &str) -> (u16, String) + Send + 'static) -> String {
    let server = tiny_http::Server::http("127.0.0.1:0").unwrap();
    let addr = format!("http://{}", server.server_addr().to_ip().unwrap());
    thread::spawn(move || {
        for mut req in server.incoming_requests() {
            let mut body = String::new();
            let _ = req.as_reader().read_to_string(&mut body);
            let (status, text) = handle(req.url(), &body);
            let _ = req.respond(tiny_http::Response::from_string(text).with_status_code(status));
        }
    });
    addr
}

/// Serves `ctx` the way the World Bank API would.
pub fn serve_world_bank(ctx: DataContext) -> String {
    spawn(move |url, _| {
        let (status, body) = wb_api_response(&ctx, url);
        (status, body.to_string())
    })
}

pub struct ChatServer {
    pub base_url: String,
    /// Number of tool schemas in each request received.
    pub tool_counts: Arc<Mutex<Vec<usize>>>,
}

/// A chat endpoint that replays each known question's essential actions,
/// then answers with the gold answer.
pub fn serve_oracle_chat(questions: &[QuestionInstance]) -> ChatServer {
    let oracle = OracleProvider::from_instances(questions);
    let tool_counts = Arc::new(Mutex::new(Vec::new()));
    let counts = tool_counts.clone();
    let url = spawn(move |_, body| {
        let Ok(req) = serde_json::from_str::<Value>(body) else {
            return (400, "bad json".into());
        };
        let messages: Vec<Message> = req["messages"]
            .as_array()
            .map(|m| m.iter().filter_map(|v| Message::from_wire(v).ok()).collect())
            .unwrap_or_default();
        counts
            .lock()
            .unwrap()
            .push(req["tools"].as_array().map_or(0, Vec::len));
        let reply = oracle.chat(&messages, &[]).unwrap();
        (200, response_body(&reply).to_string())
    });
    ChatServer {
        base_url: format!("{url}/v1"),
        tool_counts,
    }
}

pub fn metaqa(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metaqa"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

pub fn ok(dir: &Path, args: &[&str]) -> String {
    let out = metaqa(dir, args);
    assert!(
        out.status.success(),
        "metaqa {args:?} failed:\n{}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}
