//! Label reasoning steps through an HTTP service instead of local rules.
//!
//! This example starts a tiny in-process labeling server on a loopback
//! port, then points the remote extraction client at it. The server
//! classifies each step by its first word, standing in for a model-backed
//! labeler.
//!
//! Run with: `cargo run --example remote_labeler`

use std::error::Error;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::thread;

use thip::extract::{extract_trace_remote, RemoteLabelerConfig};

fn label(step: &str) -> &'static str {
    let first = step.split_whitespace().next().unwrap_or("");
    match first.to_ascii_lowercase().as_str() {
        "plan" | "first" => "plan",
        "compute" | "calculate" => "compute",
        "check" | "verify" => "verify",
        _ => "state",
    }
}

fn serve(listener: TcpListener) {
    for stream in listener.incoming() {
        let Ok(mut stream) = stream else { continue };
        let mut reader = BufReader::new(stream.try_clone().expect("clone stream"));
        let mut content_length = 0;
        loop {
            let mut line = String::new();
            if reader.read_line(&mut line).is_err() || line.trim().is_empty() {
                break;
            }
            if let Some(value) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                content_length = value.trim().parse().unwrap_or(0);
            }
        }
        let mut body = vec![0u8; content_length];
        if reader.read_exact(&mut body).is_err() {
            continue;
        }
        let request: serde_json::Value = serde_json::from_slice(&body).unwrap_or_default();
        let text = request["text"].as_str().unwrap_or("");
        let labels: Vec<&str> = text
            .split(". ")
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(label)
            .collect();
        let payload = serde_json::json!({ "labels": labels }).to_string();
        let response = format!(
            "HTTP/1.1 200 OK\r\ncontent-type: application/json\r\ncontent-length: {}\r\n\r\n{payload}",
            payload.len()
        );
        let _ = stream.write_all(response.as_bytes());
    }
}

fn main() -> Result<(), Box<dyn Error>> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?;
    thread::spawn(move || serve(listener));

    let config = RemoteLabelerConfig::new(format!("http://{addr}/label"));
    println!("labeling service listening on {addr}\n");

    let text = "Plan the factorization. Compute the discriminant. Check both roots. Done";
    let trace = extract_trace_remote(text, &config, "remote-1")?;
    println!("text:  {text}");
    println!("trace: {:?}", trace.activities());
    Ok(())
}
