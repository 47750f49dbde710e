//! Run directories. All files of a run go through one `RunDir`, on the
//! orchestrating thread.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::Failure;

pub struct RunDir {
    path: PathBuf,
    start: Instant,
    written: Vec<String>,
}

impl RunDir {
    pub fn create(path: &Path) -> Result<Self, Failure> {
        std::fs::create_dir_all(path).map_err(|e| Failure::io(path, e))?;
        Ok(RunDir {
            path: path.to_path_buf(),
            start: Instant::now(),
            written: Vec::new(),
        })
    }

    fn put(&mut self, name: &str, body: String) -> Result<(), Failure> {
        let p = self.path.join(name);
        std::fs::write(&p, body).map_err(|e| Failure::io(&p, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Header plus rows, `\n` line endings.
    pub fn csv<I: IntoIterator<Item = String>>(&mut self, name: &str, header: &str, rows: I) -> Result<(), Failure> {
        let mut body = String::from(header);
        body.push('\n');
        for r in rows {
            body.push_str(&r);
            body.push('\n');
        }
        self.put(name, body)
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let mut body = serde_json::to_string_pretty(value).map_err(|e| Failure::Compute(format!("{name}: {e}")))?;
        body.push('\n');
        self.put(name, body)
    }

    /// Writes `provenance.log`. Called whether or not the run succeeded.
    pub fn finish(mut self, args: &[String], experiment: &str, outcome: Option<&Failure>) -> Result<(), Failure> {
        let mut log = String::new();
        let _ = writeln!(log, "ucp-lab {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(log, "experiment: {experiment}");
        let _ = writeln!(log, "args: {}", args.join(" "));
        let _ = writeln!(log, "threads: {}", rayon::current_num_threads());
        let _ = writeln!(log, "wall_time_s: {:.3}", self.start.elapsed().as_secs_f64());
        let _ = writeln!(log, "files: {}", self.written.join(" "));
        match outcome {
            None => log.push_str("status: ok\n"),
            Some(f) => {
                let _ = writeln!(log, "status: {f}");
            }
        }
        self.put("provenance.log", log)
    }
}
