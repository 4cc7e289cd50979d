//! Fixtures shared by the integration tests.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};

/// Five themes with disjoint vocabularies.
pub const TEMPLATES: [&[&str]; 5] = [
    &["medal", "podium", "gold", "silver", "bronze", "ceremony", "anthem", "flag", "winners", "champion", "trophy", "final", "victory", "honor", "glory", "celebrate"],
    &["stadium", "venue", "tickets", "queue", "arena", "seats", "schedule", "transport", "shuttle", "parking", "entrance", "security", "volunteers", "hall", "booth", "wifi"],
    &["player", "striker", "captain", "rookie", "veteran", "carry", "clutch", "highlight", "mvp", "skills", "aim", "reflexes", "legend", "prodigy", "career", "debut"],
    &["federation", "recognition", "olympic", "committee", "official", "sport", "status", "legitimacy", "governing", "accreditation", "policy", "charter", "inclusion", "decision", "vote", "announcement"],
    &["fans", "stream", "viewers", "chat", "hype", "memes", "community", "forum", "discussion", "predictions", "bracket", "watch", "party", "cosplay", "banner", "chant"],
];

pub const PER_TEMPLATE: usize = 100;

/// Words shared by every template.
pub const FILLER: [&str; 6] = ["esports", "asian", "games", "hangzhou", "today", "wow"];

/// 500 posts, 100 per template: eight words drawn from one template, a
/// hashtag, one shared filler word, and on every tenth post a link and a
/// mention.
/// Returns the JSONL text and each post's template index.
pub fn synthetic_corpus(seed: u64) -> (String, Vec<i64>) {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut lines = String::new();
    let mut truth = Vec::new();
    let mut i = 0;
    for (t, vocab) in TEMPLATES.iter().enumerate() {
        for _ in 0..PER_TEMPLATE {
            let words: Vec<&str> = (0..8).map(|_| *vocab.choose(&mut rng).unwrap()).collect();
            let likes: u32 = rng.random_range(0..500);
            let day = 1 + (i % 28);
            let filler = FILLER.choose(&mut rng).unwrap();
            let extra = if i % 10 == 0 { format!(" https://t.co/x{i} @fan{i}") } else { String::new() };
            lines.push_str(&format!(
                "{{\"id\":\"p{i:04}\",\"text\":\"{} #{} {filler}{extra}\",\"ts\":\"2023-09-{day:02}T12:00:00Z\",\"likes\":{likes},\"retweets\":{},\"lang\":\"en\"}}\n",
                words.join(" "),
                vocab[0],
                likes / 3
            ));
            truth.push(t as i64);
            i += 1;
        }
    }
    (lines, truth)
}

/// Writes the synthetic corpus and a config tuned for it into `dir`.
pub fn synthetic_setup(dir: &Path, seed: u64) -> (PathBuf, Vec<i64>) {
    let (text, truth) = synthetic_corpus(seed);
    std::fs::write(dir.join("posts.jsonl"), text).unwrap();
    let config = r#"seed = 7
out_dir = "out"

[corpus]
path = "posts.jsonl"

[embedding]
kind = "hash-test"
dim = 64

[reduce]
n_neighbors = 15
n_components = 5

[cluster]
min_cluster_size = 20
min_samples = 5

[represent]
threshold = 0.0

[labeling]
provider = "stub"
"#;
    let cfg = dir.join("topicflow.toml");
    std::fs::write(&cfg, config).unwrap();
    (cfg, truth)
}

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_topicflow"))
}

pub fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

/// A recorded request to [`TestServer`].
#[derive(Debug, Clone)]
pub struct Request {
    pub method: String,
    pub path: String,
    pub headers: Vec<(String, String)>,
    pub body: String,
}

impl Request {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers.iter().find(|(k, _)| k.eq_ignore_ascii_case(name)).map(|(_, v)| v.as_str())
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::from_str(&self.body).unwrap()
    }
}

type Handler = dyn Fn(&Request) -> (u16, String) + Send + Sync;

/// Minimal HTTP/1.1 server on a loopback port; one thread per connection,
/// `Connection: close` on every response.
pub struct TestServer {
    pub url: String,
    pub log: std::sync::Arc<std::sync::Mutex<Vec<Request>>>,
}

fn read_request(stream: &mut std::net::TcpStream) -> Option<Request> {
    use std::io::{BufRead, BufReader, Read};
    let mut r = BufReader::new(stream);
    let mut line = String::new();
    r.read_line(&mut line).ok()?;
    let mut parts = line.split_whitespace();
    let method = parts.next()?.to_string();
    let path = parts.next()?.to_string();
    let mut headers = Vec::new();
    loop {
        let mut h = String::new();
        r.read_line(&mut h).ok()?;
        let h = h.trim_end();
        if h.is_empty() {
            break;
        }
        let (k, v) = h.split_once(':')?;
        headers.push((k.trim().to_string(), v.trim().to_string()));
    }
    let get = |n: &str| headers.iter().find(|(k, _)| k.eq_ignore_ascii_case(n)).map(|(_, v)| v.clone());
    let mut body = Vec::new();
    if let Some(len) = get("content-length") {
        body.resize(len.parse().ok()?, 0);
        r.read_exact(&mut body).ok()?;
    } else if get("transfer-encoding").is_some_and(|v| v.eq_ignore_ascii_case("chunked")) {
        loop {
            let mut size = String::new();
            r.read_line(&mut size).ok()?;
            let n = usize::from_str_radix(size.trim(), 16).ok()?;
            let mut chunk = vec![0; n + 2];
            r.read_exact(&mut chunk).ok()?;
            if n == 0 {
                break;
            }
            body.extend_from_slice(&chunk[..n]);
        }
    }
    Some(Request { method, path, headers, body: String::from_utf8(body).ok()? })
}

impl TestServer {
    pub fn start(handler: impl Fn(&Request) -> (u16, String) + Send + Sync + 'static) -> Self {
        use std::io::Write;
        use std::sync::{Arc, Mutex};
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let log = Arc::new(Mutex::new(Vec::new()));
        let handler: Arc<Handler> = Arc::new(handler);
        let log2 = log.clone();
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { continue };
                let (handler, log) = (handler.clone(), log2.clone());
                std::thread::spawn(move || {
                    let Some(req) = read_request(&mut stream) else { return };
                    let (status, body) = handler(&req);
                    log.lock().unwrap().push(req);
                    let resp = format!(
                        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                        body.len()
                    );
                    let _ = stream.write_all(resp.as_bytes());
                });
            }
        });
        TestServer { url, log }
    }

    pub fn requests(&self) -> Vec<Request> {
        self.log.lock().unwrap().clone()
    }
}
