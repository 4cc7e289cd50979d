//! Logging to stderr, optionally as JSON lines.

use std::io::Write;

use log::{Level, LevelFilter, Log, Metadata, Record};

struct JsonLogger {
    level: LevelFilter,
}

impl Log for JsonLogger {
    fn enabled(&self, m: &Metadata) -> bool {
        m.level() <= self.level
    }

    fn log(&self, r: &Record) {
        if !self.enabled(r.metadata()) {
            return;
        }
        let line = serde_json::json!({
            "level": r.level().as_str(),
            "target": r.target(),
            "msg": r.args().to_string(),
        });
        let _ = writeln!(std::io::stderr().lock(), "{line}");
    }

    fn flush(&self) {}
}

/// Installs the process logger. `RUST_LOG` overrides the default level
/// (`info`) for the text format.
pub fn init(json: bool) {
    if json {
        let level = std::env::var("RUST_LOG")
            .ok()
            .and_then(|s| s.parse::<Level>().ok())
            .map_or(LevelFilter::Info, |l| l.to_level_filter());
        if log::set_boxed_logger(Box::new(JsonLogger { level })).is_ok() {
            log::set_max_level(level);
        }
    } else {
        let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
            .format_timestamp(None)
            .target(env_logger::Target::Stderr)
            .try_init();
    }
}
